use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Predicate selecting the part of the cube where a map is a submersion.
pub type RegularPredicate = fn(&[f64]) -> bool;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Grid,
}

#[derive(Clone, Debug)]
pub struct Sampler {
    pub strategy: Strategy,
    pub n: usize,
    pub seed: u64,
    /// Half-width of the sampling cube `[−extent, extent]^m`.
    pub extent: f64,
    pub regular: Option<RegularPredicate>,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            strategy: Strategy::Random,
            n: 100,
            seed: 42,
            extent: 2.0,
            regular: None,
        }
    }
}

impl Sampler {
    pub fn random(n: usize, seed: u64) -> Sampler {
        Sampler {
            n,
            seed,
            ..Sampler::default()
        }
    }

    pub fn grid(n: usize) -> Sampler {
        Sampler {
            strategy: Strategy::Grid,
            n,
            ..Sampler::default()
        }
    }

    pub fn with_regular(mut self, regular: Option<RegularPredicate>) -> Sampler {
        self.regular = regular;
        self
    }

    fn accepts(&self, x: &[f64]) -> bool {
        self.regular.is_none_or(|f| f(x))
    }

    /// Up to `n` points in the cube that pass the regular predicate.
    /// Random sampling gives up after `1000·n` rejected draws.
    pub fn points(&self, m: usize) -> Vec<DVector<f64>> {
        match self.strategy {
            Strategy::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut out = Vec::with_capacity(self.n);
                let mut attempts = 0usize;
                while out.len() < self.n && attempts < 1000 * self.n.max(1) {
                    attempts += 1;
                    let x: Vec<f64> = (0..m).map(|_| rng.random_range(-self.extent..=self.extent)).collect();
                    if self.accepts(&x) {
                        out.push(DVector::from_vec(x));
                    }
                }
                out
            }
            Strategy::Grid => {
                if self.n == 0 {
                    return Vec::new();
                }
                let k = (self.n as f64).powf(1.0 / m as f64).ceil().max(1.0) as usize;
                let coord = |i: usize| {
                    if k == 1 {
                        0.0
                    } else {
                        -self.extent + 2.0 * self.extent * i as f64 / (k - 1) as f64
                    }
                };
                let total = k.checked_pow(m as u32).unwrap_or(usize::MAX);
                let mut out = Vec::with_capacity(self.n);
                let mut idx = vec![0usize; m];
                for _ in 0..total {
                    let x: Vec<f64> = idx.iter().map(|&i| coord(i)).collect();
                    if self.accepts(&x) {
                        out.push(DVector::from_vec(x));
                        if out.len() == self.n {
                            break;
                        }
                    }
                    for d in (0..m).rev() {
                        idx[d] += 1;
                        if idx[d] < k {
                            break;
                        }
                        idx[d] = 0;
                    }
                }
                out
            }
        }
    }
}
