//! WebAssembly bindings for the browser demo in `www/`.

use wasm_bindgen::prelude::*;

pub mod explore;

fn js<T>(r: explore::DemoResult<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn filter_names() -> String {
    fbmc_core::filter::BuiltinFilter::ALL
        .iter()
        .map(|b| b.name())
        .chain(["ofdm"])
        .collect::<Vec<_>>()
        .join(",")
}

/// Interleaved `(frequency, dB)` pairs of one pulse's PSD.
#[wasm_bindgen]
pub fn psd_curve(filter: &str, m: usize, l: usize, span: f64) -> Result<Vec<f64>, JsError> {
    js(explore::psd_points(filter, m, l, span))
}

/// Interleaved `(SNR, self-SINR)` pairs over AWGN.
#[wasm_bindgen]
pub fn sinr_curve(filter: &str, receiver: &str, m: usize, l: usize, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, JsError> {
    js(explore::sinr_points(filter, receiver, m, l, lo, hi, step))
}

#[wasm_bindgen]
pub struct FilterReport(explore::FilterSummary);

#[wasm_bindgen]
impl FilterReport {
    #[wasm_bindgen(getter)]
    pub fn time(&self) -> Vec<f64> {
        self.0.time.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_t(&self) -> f64 {
        self.0.sigma_t
    }

    #[wasm_bindgen(getter)]
    pub fn c0(&self) -> f64 {
        self.0.c0
    }

    #[wasm_bindgen(getter)]
    pub fn c1(&self) -> f64 {
        self.0.c1
    }

    #[wasm_bindgen(getter)]
    pub fn c2(&self) -> f64 {
        self.0.c2
    }

    #[wasm_bindgen(getter)]
    pub fn feasible(&self) -> bool {
        self.0.feasible
    }

    #[wasm_bindgen(getter)]
    pub fn noiseless_sinr_db(&self) -> f64 {
        self.0.noiseless_sinr_db
    }

    #[wasm_bindgen(getter)]
    pub fn matched_sir_db(&self) -> f64 {
        self.0.matched_sir_db
    }
}

/// Time samples, constraint values and noiseless self-SINR of a filter.
#[wasm_bindgen]
pub fn explore_filter(filter: &str, m: usize, l: usize) -> Result<FilterReport, JsError> {
    js(explore::summarize(filter, m, l)).map(FilterReport)
}
