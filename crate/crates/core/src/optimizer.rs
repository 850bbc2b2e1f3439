//! Prototype filter design by generalized pattern search.
//!
//! The search maximizes the AWGN self-SINR of the MMSE (or matched) receiver
//! over the frequency coefficients `q`, under the edge, slope, curvature and
//! time-dispersion constraints. Infeasible points get fitness `−∞`.
//! Constraints are checked on the `q_0 = 1` normalized vector, which is also
//! the form returned.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::filter::{resolve_filter, PrototypeFilter};
use crate::kv::KvFile;
use crate::metrics::{awgn_self_sinr, constraint_values, time_dispersion, ConstraintValues, ReceiverType};
use crate::{noise_variance_from_snr_db, to_db, Complex, Error, FbmcConfig, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffDomain {
    RealOnly,
    Complex,
}

impl std::str::FromStr for CoeffDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "realonly" | "real_only" => Ok(Self::RealOnly),
            "complex" => Ok(Self::Complex),
            _ => Err(Error::Config(format!("unknown coefficient domain `{s}` (real|complex)"))),
        }
    }
}

/// Constraint tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eps0: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps_t: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps0: 0.01,
            eps1: 0.1,
            eps2: 0.1,
            eps_t: 0.1,
        }
    }
}

/// Everything a single fitness evaluation needs.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    config: FbmcConfig,
    target_snr_db: f64,
    tolerances: Tolerances,
    domain: CoeffDomain,
    receiver: ReceiverType,
    // cos/sin(2πkn/N), row k
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl DesignProblem {
    /// Real coefficients, MMSE receiver, default tolerances.
    pub fn new(config: FbmcConfig, target_snr_db: f64) -> Result<Self> {
        if target_snr_db.is_nan() {
            return Err(Error::Config("target SNR is NaN".into()));
        }
        let (n, k) = (config.fft_size(), config.num_freq_taps());
        let table = |f: fn(f64) -> f64| -> Vec<Vec<f64>> {
            (0..k)
                .map(|kk| (0..n).map(|i| f(2.0 * PI * ((kk * i) % n) as f64 / n as f64)).collect())
                .collect()
        };
        Ok(Self {
            config,
            target_snr_db,
            tolerances: Tolerances::default(),
            domain: CoeffDomain::RealOnly,
            receiver: ReceiverType::Mmse,
            cos: table(f64::cos),
            sin: table(f64::sin),
        })
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Result<Self> {
        let t = tolerances;
        if [t.eps0, t.eps1, t.eps2, t.eps_t].iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        self.tolerances = tolerances;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: CoeffDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_receiver(mut self, receiver: ReceiverType) -> Self {
        self.receiver = receiver;
        self
    }

    pub fn config(&self) -> &FbmcConfig {
        &self.config
    }

    pub fn target_snr_db(&self) -> f64 {
        self.target_snr_db
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    pub fn domain(&self) -> CoeffDomain {
        self.domain
    }

    pub fn receiver(&self) -> ReceiverType {
        self.receiver
    }

    pub fn noise_var(&self) -> f64 {
        noise_variance_from_snr_db(self.target_snr_db, self.config.data_power())
    }

    fn check_len(&self, q: &[Complex]) -> Result<()> {
        let k = self.config.num_freq_taps();
        if q.len() != k {
            return Err(Error::Dimension(format!("expected K={k} coefficients, got {}", q.len())));
        }
        Ok(())
    }

    fn time_filter(&self, q: &[Complex]) -> Vec<Complex> {
        let n = self.config.fft_size();
        (0..n)
            .map(|i| {
                let tail: f64 = q
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, v)| v.re * self.cos[k][i] - v.im * self.sin[k][i])
                    .sum();
                q[0] + 2.0 * tail
            })
            .collect()
    }

    /// Constraint values and time dispersion of `q` after `q_0`
    /// normalization. `None` if `q_0` is zero or the filter vanishes.
    pub fn assess(&self, q: &[Complex]) -> Option<(ConstraintValues, f64)> {
        let q = normalized(q)?;
        let sigma_t = time_dispersion(&self.time_filter(&q)).ok()?;
        Some((constraint_values(&q), sigma_t))
    }

    pub fn is_feasible(&self, q: &[Complex]) -> bool {
        let t = self.tolerances;
        let domain_ok = self.domain == CoeffDomain::Complex || q.iter().all(|v| v.im == 0.0);
        domain_ok
            && self
                .assess(q)
                .is_some_and(|(c, st)| c.c0 < t.eps0 && c.c1 < t.eps1 && c.c2 < t.eps2 && st < t.eps_t)
    }

    /// Self-SINR in dB at `noise_var`, ignoring feasibility.
    pub fn self_sinr_db(&self, q: &[Complex], noise_var: f64) -> Result<f64> {
        self.check_len(q)?;
        let p = crate::filter::normalize_energy(&self.time_filter(q))?;
        Ok(to_db(awgn_self_sinr(&p, &self.config, self.receiver, noise_var)?))
    }

    /// Objective: self-SINR at the target SNR, `−∞` when infeasible or
    /// degenerate.
    pub fn fitness(&self, q: &[Complex]) -> f64 {
        if q.len() != self.config.num_freq_taps() || !self.is_feasible(q) {
            return f64::NEG_INFINITY;
        }
        self.self_sinr_db(q, self.noise_var()).unwrap_or(f64::NEG_INFINITY)
    }

    /// Poll directions as (index, unit step): real parts first, then
    /// imaginary parts for complex designs.
    fn directions(&self) -> Vec<(usize, Complex)> {
        let k = self.config.num_freq_taps();
        let mut units = vec![Complex::new(1.0, 0.0)];
        if self.domain == CoeffDomain::Complex {
            units.push(Complex::new(0.0, 1.0));
        }
        units
            .iter()
            .flat_map(|u| (0..k).flat_map(move |i| [(i, *u), (i, -*u)]))
            .collect()
    }
}

fn normalized(q: &[Complex]) -> Option<Vec<Complex>> {
    let q0 = *q.first()?;
    if q0.norm() == 0.0 || !q0.is_finite() {
        return None;
    }
    Some(q.iter().map(|v| v / q0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub fitness_db: f64,
    pub mesh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub q: Vec<Complex>,
    pub mesh: f64,
    pub best_fitness: f64,
    pub eval_count: usize,
    pub iteration: usize,
    pub history: Vec<HistoryEntry>,
}

impl SearchState {
    /// Evaluates the starting point (one evaluation).
    pub fn new(problem: &DesignProblem, q: Vec<Complex>, mesh: f64) -> Self {
        let best_fitness = problem.fitness(&q);
        Self {
            q,
            mesh,
            best_fitness,
            eval_count: 1,
            iteration: 0,
            history: vec![HistoryEntry {
                iteration: 0,
                fitness_db: best_fitness,
                mesh,
            }],
        }
    }
}

/// Mesh update factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSchedule {
    pub expansion: f64,
    pub contraction: f64,
}

impl Default for MeshSchedule {
    fn default() -> Self {
        Self {
            expansion: 2.0,
            contraction: 0.5,
        }
    }
}

fn evaluate_all(problem: &DesignProblem, candidates: &[Vec<Complex>]) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if rayon::current_num_threads() > 1 {
            return candidates.par_iter().map(|q| problem.fitness(q)).collect();
        }
    }
    candidates.iter().map(|q| problem.fitness(q)).collect()
}

/// One poll: evaluates `q ± mesh·e_i` for every direction and moves to the
/// best strict improvement (lowest direction index on ties).
pub fn poll_step(state: &SearchState, problem: &DesignProblem, schedule: MeshSchedule) -> SearchState {
    let candidates: Vec<Vec<Complex>> = problem
        .directions()
        .into_iter()
        .map(|(i, unit)| {
            let mut q = state.q.clone();
            q[i] += unit * state.mesh;
            q
        })
        .collect();
    let scores = evaluate_all(problem, &candidates);
    let best = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > state.best_fitness)
        .fold(None, |acc: Option<(usize, f64)>, (i, s)| match acc {
            Some((_, b)) if b >= *s => acc,
            _ => Some((i, *s)),
        });
    let mut next = state.clone();
    next.eval_count += candidates.len();
    next.iteration += 1;
    match best {
        Some((i, s)) => {
            next.q = candidates[i].clone();
            next.best_fitness = s;
            next.mesh *= schedule.expansion;
        }
        None => next.mesh *= schedule.contraction,
    }
    next.history.push(HistoryEntry {
        iteration: next.iteration,
        fitness_db: next.best_fitness,
        mesh: next.mesh,
    });
    next
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub initial_mesh: f64,
    pub min_mesh: f64,
    pub max_evals: usize,
    pub schedule: MeshSchedule,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            initial_mesh: 0.1,
            min_mesh: 1e-5,
            max_evals: 200_000,
            schedule: MeshSchedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    /// Fitness at the target SNR.
    pub fitness_db: f64,
    /// Self-SINR of the result at `σ_n² = 0`.
    pub noiseless_sinr_db: f64,
    pub constraints: ConstraintValues,
    pub time_dispersion: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub final_mesh: f64,
    /// Whether the seed had to be projected onto the constraint set.
    pub repaired: bool,
    pub history: Vec<HistoryEntry>,
}

impl DesignReport {
    /// Convergence history as `iteration,fitness_db,mesh`.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,fitness_db,mesh\n");
        for h in &self.history {
            let _ = writeln!(out, "{},{:.9},{:.6e}", h.iteration, h.fitness_db, h.mesh);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub q: Vec<Complex>,
    pub report: DesignReport,
}

impl DesignOutcome {
    pub fn filter(&self, config: &FbmcConfig, label: impl Into<String>) -> Result<PrototypeFilter> {
        PrototypeFilter::new(self.q.clone(), config.fft_size(), label)
    }
}

/// Least-norm correction of `q` (after `q_0` normalization) onto
/// `c0 = c1 = c2 = 0`, keeping `q_0 = 1`.
pub fn repair_seed(q: &[Complex], domain: CoeffDomain) -> Option<Vec<Complex>> {
    let mut q = normalized(q)?;
    let k = q.len();
    if k < 2 {
        return Some(q);
    }
    // unknowns: Re q_1..q_{K-1}, then Im q_1..q_{K-1} for complex designs
    let free = k - 1;
    let width = if domain == CoeffDomain::Complex { 2 * free } else { free };
    let mut rows: Vec<Vec<f64>> = vec![
        (1..k).map(|_| 2.0).chain(std::iter::repeat_n(0.0, width - free)).collect(),
        (1..k).map(|i| (i * i) as f64).chain(std::iter::repeat_n(0.0, width - free)).collect(),
    ];
    let mut target = vec![-1.0, 0.0];
    if domain == CoeffDomain::Complex {
        rows.push(std::iter::repeat_n(0.0, free).chain((1..k).map(|i| i as f64)).collect());
        target.push(0.0);
    } else {
        q.iter_mut().for_each(|v| v.im = 0.0);
    }
    let a = DMatrix::from_fn(rows.len(), width, |r, c| rows[r][c]);
    let x = DVector::from_fn(width, |c, _| if c < free { q[c + 1].re } else { q[c - free + 1].im });
    let residual = DVector::from_vec(target) - &a * &x;
    let gram = &a * a.transpose();
    let correction = a.transpose() * gram.lu().solve(&residual)?;
    let x = x + correction;
    for i in 1..k {
        q[i].re = x[i - 1];
        if domain == CoeffDomain::Complex {
            q[i].im = x[free + i - 1];
        }
    }
    Some(q)
}

/// Runs pattern search from `seed` until the mesh drops below `min_mesh` or
/// the evaluation budget is spent. An infeasible seed is first projected
/// onto the linear constraints; if that is still infeasible the run fails.
pub fn run_design(problem: &DesignProblem, seed: &[Complex], options: &DesignOptions) -> Result<DesignOutcome> {
    problem.check_len(seed)?;
    if !(options.initial_mesh > 0.0 && options.min_mesh > 0.0) {
        return Err(Error::Config("mesh sizes must be positive".into()));
    }
    let s = options.schedule;
    if !(s.expansion >= 1.0 && s.contraction > 0.0 && s.contraction < 1.0) {
        return Err(Error::Config("need expansion >= 1 and 0 < contraction < 1".into()));
    }
    let mut repaired = false;
    let start = if problem.is_feasible(seed) {
        seed.to_vec()
    } else {
        repaired = true;
        repair_seed(seed, problem.domain())
            .filter(|q| problem.is_feasible(q))
            .ok_or_else(|| Error::InfeasibleSeed(describe_violation(problem, seed)))?
    };
    let mut state = SearchState::new(problem, start, options.initial_mesh);
    if !state.best_fitness.is_finite() {
        return Err(Error::InfeasibleSeed("seed fitness is not finite".into()));
    }
    while state.mesh >= options.min_mesh && state.eval_count < options.max_evals {
        state = poll_step(&state, problem, options.schedule);
    }
    let q = normalized(&state.q).ok_or(Error::ZeroFilter)?;
    let (constraints, sigma_t) = problem.assess(&q).ok_or(Error::ZeroFilter)?;
    Ok(DesignOutcome {
        report: DesignReport {
            fitness_db: problem.fitness(&q),
            noiseless_sinr_db: problem.self_sinr_db(&q, 0.0)?,
            constraints,
            time_dispersion: sigma_t,
            evaluations: state.eval_count,
            iterations: state.iteration,
            final_mesh: state.mesh,
            repaired,
            history: state.history,
        },
        q,
    })
}

fn describe_violation(problem: &DesignProblem, q: &[Complex]) -> String {
    match problem.assess(q) {
        None => "q_0 is zero or the filter vanishes".into(),
        Some((c, st)) => format!(
            "c0={:.4} c1={:.4} c2={:.4} sigma_t={:.4} (tolerances {:?})",
            c.c0,
            c.c1,
            c.c2,
            st,
            problem.tolerances()
        ),
    }
}

/// Raised-cosine-like starting point: the coefficients of `(1 − cos θ)³`,
/// `[1, −3/4, 3/10, −1/20, 0, …]`. Edge value and curvature sum vanish and
/// `σ_t ≈ 0.088`.
pub fn default_seed(k: usize) -> Vec<Complex> {
    [1.0, -0.75, 0.3, -0.05]
        .into_iter()
        .chain(std::iter::repeat(0.0))
        .take(k)
        .map(|v| Complex::new(v, 0.0))
        .collect()
}

/// Pads with zeros or truncates to `k` coefficients.
pub fn fit_to_taps(q: &[Complex], k: usize) -> Vec<Complex> {
    q.iter().copied().chain(std::iter::repeat(Complex::new(0.0, 0.0))).take(k).collect()
}

/// A design run read from a `key = value` file.
#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub problem: DesignProblem,
    pub seed: Vec<Complex>,
    pub seed_label: String,
    pub options: DesignOptions,
    pub output: Option<PathBuf>,
    pub history: Option<PathBuf>,
}

const DESIGN_KEYS: &[&str] = &[
    "m",
    "l",
    "k",
    "target_snr_db",
    "eps0",
    "eps1",
    "eps2",
    "eps_t",
    "domain",
    "receiver",
    "seed",
    "initial_mesh",
    "min_mesh",
    "max_evals",
    "expansion",
    "contraction",
    "output",
    "history",
];

impl DesignSpec {
    /// Relative paths in the file are resolved against `base`.
    pub fn from_kv(kv: &KvFile, base: &Path) -> Result<Self> {
        let unknown = kv.unknown_keys(DESIGN_KEYS);
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        let config = FbmcConfig::new(kv.get_or("m", 128)?, kv.get_or("l", 4)?, kv.get_or("k", 15)?)?;
        let target = match kv.raw("target_snr_db") {
            None => return Err(Error::Config("missing `target_snr_db`".into())),
            Some(v) => crate::kv::parse_f64(v).map_err(Error::Config)?,
        };
        let d = Tolerances::default();
        let tolerances = Tolerances {
            eps0: kv.get_or("eps0", d.eps0)?,
            eps1: kv.get_or("eps1", d.eps1)?,
            eps2: kv.get_or("eps2", d.eps2)?,
            eps_t: kv.get_or("eps_t", d.eps_t)?,
        };
        let problem = DesignProblem::new(config, target)?
            .with_tolerances(tolerances)?
            .with_domain(kv.get_or("domain", CoeffDomain::RealOnly)?)
            .with_receiver(kv.get_or("receiver", ReceiverType::Mmse)?);
        let k = config.num_freq_taps();
        let (seed, seed_label) = match kv.raw("seed") {
            None | Some("default") => (default_seed(k), "default".to_string()),
            Some(s) => {
                let resolved = if Path::new(s).is_relative() && base.join(s).exists() {
                    base.join(s).to_string_lossy().into_owned()
                } else {
                    s.to_string()
                };
                let f = resolve_filter(&resolved, &config)?;
                (fit_to_taps(f.coeffs(), k), f.label().to_string())
            }
        };
        let d = DesignOptions::default();
        let options = DesignOptions {
            initial_mesh: kv.get_or("initial_mesh", d.initial_mesh)?,
            min_mesh: kv.get_or("min_mesh", d.min_mesh)?,
            max_evals: kv.get_or("max_evals", d.max_evals)?,
            schedule: MeshSchedule {
                expansion: kv.get_or("expansion", d.schedule.expansion)?,
                contraction: kv.get_or("contraction", d.schedule.contraction)?,
            },
        };
        let path = |key: &str| kv.raw(key).map(|p| base.join(p));
        Ok(Self {
            problem,
            seed,
            seed_label,
            options,
            output: path("output"),
            history: path("history"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::BuiltinFilter;

    fn real(v: &[f64]) -> Vec<Complex> {
        v.iter().map(|x| Complex::new(*x, 0.0)).collect()
    }

    fn small() -> FbmcConfig {
        FbmcConfig::new(16, 4, 15).unwrap()
    }

    #[test]
    fn basis_matches_direct_synthesis() {
        let p = DesignProblem::new(small(), 30.0).unwrap();
        let q: Vec<Complex> = (0..15).map(|k| Complex::new(0.3 / (k + 1) as f64, 0.1 * k as f64)).collect();
        let direct = crate::filter::synthesize_time_filter(&q, 64).unwrap();
        for (a, b) in p.time_filter(&q).iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn published_filters_are_feasible() {
        let p = DesignProblem::new(FbmcConfig::standard(), 30.0).unwrap();
        for b in BuiltinFilter::ALL {
            assert!(p.is_feasible(&real(b.coeffs())), "{b}");
        }
        assert!(p.is_feasible(&default_seed(15)));
        // rectangle: c0 = 1
        assert!(!p.is_feasible(&default_seed(1).into_iter().chain(std::iter::repeat_n(Complex::new(0.0, 0.0), 14)).collect::<Vec<_>>()));
    }

    #[test]
    fn fitness_is_scale_invariant() {
        let p = DesignProblem::new(small(), 30.0).unwrap();
        let q = real(BuiltinFilter::G30.coeffs());
        let doubled: Vec<Complex> = q.iter().map(|v| v * 2.0).collect();
        assert!((p.fitness(&q) - p.fitness(&doubled)).abs() < 1e-9);
        assert!(p.fitness(&q).is_finite());
    }

    #[test]
    fn wrong_domain_is_infeasible() {
        let p = DesignProblem::new(small(), 30.0).unwrap();
        let mut q = real(BuiltinFilter::G30.coeffs());
        q[3].im = 1e-3;
        assert_eq!(p.fitness(&q), f64::NEG_INFINITY);
        let pc = p.clone().with_domain(CoeffDomain::Complex);
        assert!(pc.fitness(&q).is_finite());
        assert_eq!(pc.directions().len(), 60);
        assert_eq!(p.directions().len(), 30);
    }

    #[test]
    fn failed_poll_contracts() {
        let p = DesignProblem::new(small(), f64::INFINITY).unwrap();
        let s = SearchState::new(&p, real(BuiltinFilter::Ginf.coeffs()), 1e3);
        // a huge step breaks every constraint
        let next = poll_step(&s, &p, MeshSchedule::default());
        assert_eq!(next.q, s.q);
        assert_eq!(next.mesh, 500.0);
        assert_eq!(next.eval_count, 31);
        assert_eq!(next.history.len(), 2);
    }

    #[test]
    fn repair_projects_onto_linear_constraints() {
        let q = real(&[2.0, -0.5, 0.1, 0.05]);
        let r = repair_seed(&q, CoeffDomain::RealOnly).unwrap();
        let c = constraint_values(&r);
        assert_eq!(r[0], Complex::new(1.0, 0.0));
        assert!(c.c0 < 1e-12 && c.c2 < 1e-12);
        let mut qc = r.clone();
        qc[2].im = 0.3;
        let rc = repair_seed(&qc, CoeffDomain::Complex).unwrap();
        assert!(constraint_values(&rc).c1 < 1e-12);
        assert!(repair_seed(&real(&[0.0, 1.0]), CoeffDomain::RealOnly).is_none());
    }

    #[test]
    fn infeasible_seed_is_repaired_or_rejected() {
        let p = DesignProblem::new(small(), 30.0).unwrap();
        let opts = DesignOptions {
            max_evals: 0,
            ..DesignOptions::default()
        };
        let mut seed = real(BuiltinFilter::G30.coeffs());
        seed[1].re += 0.05;
        let out = run_design(&p, &seed, &opts).unwrap();
        assert!(out.report.repaired);
        assert!(p.is_feasible(&out.q));
        // an impulse-like seed cannot meet the dispersion bound after repair
        let spike = vec![Complex::new(1.0, 0.0); 15];
        assert!(matches!(run_design(&p, &spike, &opts), Err(Error::InfeasibleSeed(_))));
    }

    #[test]
    fn zero_budget_returns_seed() {
        let p = DesignProblem::new(small(), 30.0).unwrap();
        let seed = real(BuiltinFilter::G30.coeffs());
        let opts = DesignOptions {
            max_evals: 0,
            ..DesignOptions::default()
        };
        let out = run_design(&p, &seed, &opts).unwrap();
        assert_eq!(out.q, seed);
        assert!(!out.report.repaired);
        assert_eq!(out.report.history.len(), 1);
        assert!(out.report.history_csv().starts_with("iteration,fitness_db,mesh\n0,"));
    }

    #[test]
    fn short_run_is_monotone_feasible_and_deterministic() {
        let p = DesignProblem::new(small(), 30.0).unwrap();
        let opts = DesignOptions {
            max_evals: 1500,
            ..DesignOptions::default()
        };
        let a = run_design(&p, &default_seed(15), &opts).unwrap();
        let b = run_design(&p, &default_seed(15), &opts).unwrap();
        assert_eq!(a, b);
        assert!(p.is_feasible(&a.q));
        assert!(a.report.history.windows(2).all(|w| w[1].fitness_db >= w[0].fitness_db));
        assert!(a.report.fitness_db > a.report.history[0].fitness_db);
    }

    #[test]
    fn spec_file() {
        let kv = KvFile::parse("M = 32\nL = 4\nK = 15\ntarget_snr_db = inf\nseed = G50\nmax_evals = 10\nreceiver = matched\noutput = q.txt\n").unwrap();
        let spec = DesignSpec::from_kv(&kv, Path::new("/tmp/x")).unwrap();
        assert_eq!(spec.problem.noise_var(), 0.0);
        assert_eq!(spec.problem.receiver(), ReceiverType::Matched);
        assert_eq!(spec.seed, real(BuiltinFilter::G50.coeffs()));
        assert_eq!(spec.output.unwrap(), Path::new("/tmp/x/q.txt"));
        let bad = KvFile::parse("target_snr_db = 30\nmesh = 3\n").unwrap();
        assert!(matches!(DesignSpec::from_kv(&bad, Path::new(".")), Err(Error::Config(_))));
        let missing = KvFile::parse("m = 64\n").unwrap();
        assert!(DesignSpec::from_kv(&missing, Path::new(".")).is_err());
    }
}
