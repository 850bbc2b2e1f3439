//! Gray-coded square QAM with unit average energy.

use rand::Rng;

use crate::{Complex, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QamOrder {
    Qam16,
    Qam64,
}

impl QamOrder {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            QamOrder::Qam16 => 4,
            QamOrder::Qam64 => 6,
        }
    }

    /// Points per real dimension.
    pub fn side(self) -> usize {
        1 << (self.bits_per_symbol() / 2)
    }

    /// Scale making the average symbol energy 1 (`1/√10`, `1/√42`).
    pub fn scale(self) -> f64 {
        let s = self.side() as f64;
        (1.5 / (s * s - 1.0)).sqrt()
    }

    pub fn name(self) -> &'static str {
        match self {
            QamOrder::Qam16 => "16qam",
            QamOrder::Qam64 => "64qam",
        }
    }

    /// Gray bits of the amplitude index `a` along one axis.
    fn gray(a: usize) -> usize {
        a ^ (a >> 1)
    }

    fn level(self, a: usize) -> f64 {
        (2.0 * a as f64 + 1.0 - self.side() as f64) * self.scale()
    }

    /// Maps the low `bits_per_symbol` bits of `word`: high half on I, low half on Q.
    pub fn map(self, word: usize) -> Complex {
        let half = self.bits_per_symbol() / 2;
        let mask = (1 << half) - 1;
        let inv = |g: usize| (0..self.side()).find(|&a| Self::gray(a) == g).unwrap_or(0);
        Complex::new(
            self.level(inv((word >> half) & mask)),
            self.level(inv(word & mask)),
        )
    }

    fn slice(self, x: f64) -> usize {
        let a = ((x / self.scale() + self.side() as f64 - 1.0) / 2.0).round();
        a.clamp(0.0, (self.side() - 1) as f64) as usize
    }

    /// Nearest-point hard decision, returned as a bit word.
    pub fn demap(self, y: Complex) -> usize {
        let half = self.bits_per_symbol() / 2;
        (Self::gray(self.slice(y.re)) << half) | Self::gray(self.slice(y.im))
    }
}

impl std::fmt::Display for QamOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for QamOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "16qam" | "qam16" | "16" => Ok(Self::Qam16),
            "64qam" | "qam64" | "64" => Ok(Self::Qam64),
            _ => Err(Error::Config(format!("unknown modulation `{s}` (16qam|64qam)"))),
        }
    }
}

pub fn random_words<R: Rng + ?Sized>(order: QamOrder, count: usize, rng: &mut R) -> Vec<usize> {
    let m = 1 << order.bits_per_symbol();
    (0..count).map(|_| rng.random_range(0..m)).collect()
}

pub fn random_symbols<R: Rng + ?Sized>(order: QamOrder, count: usize, rng: &mut R) -> Vec<Complex> {
    random_words(order, count, rng).into_iter().map(|w| order.map(w)).collect()
}

/// Number of differing bits between two words.
pub fn bit_errors(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn unit_energy_and_roundtrip() {
        for order in [QamOrder::Qam16, QamOrder::Qam64] {
            let m = 1 << order.bits_per_symbol();
            let energy: f64 = (0..m).map(|w| order.map(w).norm_sqr()).sum::<f64>() / m as f64;
            assert!((energy - 1.0).abs() < 1e-12);
            for w in 0..m {
                assert_eq!(order.demap(order.map(w)), w);
                assert_eq!(order.demap(order.map(w) * 1.3), order.demap(order.map(w) * 1.3));
            }
        }
        assert!((QamOrder::Qam16.scale() - 1.0 / 10f64.sqrt()).abs() < 1e-15);
        assert!((QamOrder::Qam64.scale() - 1.0 / 42f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nearest_neighbours_differ_by_one_bit() {
        for order in [QamOrder::Qam16, QamOrder::Qam64] {
            let m = 1 << order.bits_per_symbol();
            let d = 2.0 * order.scale();
            for a in 0..m {
                for b in 0..m {
                    if ((order.map(a) - order.map(b)).norm() - d).abs() < 1e-9 {
                        assert_eq!(bit_errors(a, b), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn decisions_clamp_outside_the_grid() {
        let q = QamOrder::Qam16;
        let corner = q.map(0);
        assert_eq!(q.demap(corner * 10.0), 0);
        assert_eq!(q.demap(Complex::new(0.01, -0.01) + q.map(5)), 5);
    }

    #[test]
    fn random_symbols_cover_the_constellation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let words = random_words(QamOrder::Qam64, 20_000, &mut rng);
        let mut seen = [false; 64];
        words.iter().for_each(|w| seen[*w] = true);
        assert!(seen.iter().all(|s| *s));
        assert_eq!("64-QAM".parse::<QamOrder>().unwrap(), QamOrder::Qam64);
        assert!("8psk".parse::<QamOrder>().is_err());
    }
}
