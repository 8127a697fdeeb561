//! Seeded samplers for the toy distributions.
//!
//! Determinism contract: the artifact pins the `ChaCha8` generator
//! (`rand_chacha::ChaCha8Rng`, seeded via `seed_from_u64`, streams via
//! `set_stream`) and draws Gaussians with the Box–Muller transform from
//! 53-bit uniforms, so a stream can be reproduced from this description
//! alone. Samplers are pure functions of `(spec, n, rng state)`.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A toy source or target distribution.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Isotropic Gaussian with the given mean point and axis-wise std.
    Gaussian { mean: Vec<f64>, std: f64 },
    /// Mixture of isotropic Gaussians with shared component std.
    GaussianMixture {
        centers: Vec<Vec<f64>>,
        component_std: f64,
        mixture_weights: Vec<f64>,
    },
    /// 2-D spiral: `scale * t (cos t, sin t)` for
    /// `t ~ Uniform[1.5π, 1.5π + 2π·turns]`, plus Gaussian jitter.
    SwissRoll {
        turns: f64,
        scale: f64,
        jitter_std: f64,
    },
}

impl DistributionSpec {
    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::Gaussian { mean, .. } => mean.len(),
            DistributionSpec::GaussianMixture { centers, .. } => {
                centers.first().map_or(0, |c| c.len())
            }
            DistributionSpec::SwissRoll { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Gaussian { mean, std } => {
                if mean.is_empty() {
                    return Err(Error::Config("gaussian needs a nonempty mean".to_string()));
                }
                if !(*std > 0.0) || !std.is_finite() {
                    return Err(Error::Config(format!("gaussian std must be > 0, got {std}")));
                }
            }
            DistributionSpec::GaussianMixture {
                centers,
                component_std,
                mixture_weights,
            } => {
                if centers.is_empty() {
                    return Err(Error::Config("mixture needs at least one center".to_string()));
                }
                let dim = centers[0].len();
                if dim == 0 || centers.iter().any(|c| c.len() != dim) {
                    return Err(Error::Config(
                        "mixture centers must share a positive dimension".to_string(),
                    ));
                }
                if !(*component_std > 0.0) || !component_std.is_finite() {
                    return Err(Error::Config(format!(
                        "component_std must be > 0, got {component_std}"
                    )));
                }
                if mixture_weights.len() != centers.len() {
                    return Err(Error::Config(
                        "one mixture weight per center required".to_string(),
                    ));
                }
                if mixture_weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
                    return Err(Error::Config("mixture weights must be >= 0".to_string()));
                }
                let total: f64 = mixture_weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "mixture weights must sum to 1 (got {total})"
                    )));
                }
            }
            DistributionSpec::SwissRoll {
                turns,
                scale,
                jitter_std,
            } => {
                if !(*turns > 0.0) || !(*scale > 0.0) {
                    return Err(Error::Config("swiss roll needs turns > 0, scale > 0".to_string()));
                }
                if !(*jitter_std >= 0.0) || !jitter_std.is_finite() {
                    return Err(Error::Config(format!(
                        "jitter_std must be >= 0, got {jitter_std}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Axis-wise Gaussian noise fed to the stochastic map.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct NoiseSpec {
    pub dim: usize,
    pub std: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("noise dim must be positive".to_string()));
        }
        if !(self.std > 0.0) || !self.std.is_finite() {
            return Err(Error::Config(format!("noise std must be > 0, got {}", self.std)));
        }
        Ok(())
    }
}

/// Buffered Box–Muller source: every pair of uniforms yields two normals,
/// so the number of generator words consumed by a batch is a fixed function
/// of its shape.
struct NormalSource {
    pending: Option<f64>,
}

impl NormalSource {
    fn new() -> Self {
        NormalSource { pending: None }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(v) = self.pending.take() {
            return v;
        }
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        // 1 - u1 lies in (0, 1], keeping the log finite.
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.pending = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Draw `n` i.i.d. rows from a distribution spec.
pub fn sample<R: Rng>(spec: &DistributionSpec, n: usize, rng: &mut R) -> Result<Array2<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Usage("sample count must be >= 1".to_string()));
    }
    let dim = spec.dim();
    let mut out = Array2::zeros((n, dim));
    let mut normals = NormalSource::new();
    match spec {
        DistributionSpec::Gaussian { mean, std } => {
            for mut row in out.rows_mut() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = mean[j] + std * normals.next(rng);
                }
            }
        }
        DistributionSpec::GaussianMixture {
            centers,
            component_std,
            mixture_weights,
        } => {
            for mut row in out.rows_mut() {
                let u: f64 = rng.gen();
                let mut k = centers.len() - 1;
                let mut acc = 0.0;
                for (i, w) in mixture_weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        k = i;
                        break;
                    }
                }
                for (j, v) in row.iter_mut().enumerate() {
                    *v = centers[k][j] + component_std * normals.next(rng);
                }
            }
        }
        DistributionSpec::SwissRoll {
            turns,
            scale,
            jitter_std,
        } => {
            let t_min = 1.5 * std::f64::consts::PI;
            let t_span = 2.0 * std::f64::consts::PI * turns;
            for mut row in out.rows_mut() {
                let t = t_min + t_span * rng.gen::<f64>();
                row[0] = scale * t * t.cos() + jitter_std * normals.next(rng);
                row[1] = scale * t * t.sin() + jitter_std * normals.next(rng);
            }
        }
    }
    Ok(out)
}

/// Draw `n` rows of axis-wise Gaussian noise.
pub fn sample_noise<R: Rng>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Array2<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Usage("sample count must be >= 1".to_string()));
    }
    let mut out = Array2::zeros((n, spec.dim));
    let mut normals = NormalSource::new();
    for v in out.iter_mut() {
        *v = spec.std * normals.next(rng);
    }
    Ok(out)
}

/// Canonical toy pairs used throughout the verification protocol.
///
/// * `gauss_to_8gauss` — 2-D Gaussian (std 0.5) to 8 Gaussians (std 0.2)
///   on a circle of radius 4;
/// * `gauss_to_swissroll` — the same Gaussian to a 1.5-turn spiral;
/// * `gauss_to_2gauss_1d` / `gauss_to_3gauss_1d` — 1-D Gaussian (std 0.5)
///   to equal mixtures at ±2 (and 0), std 0.25.
pub fn make_toy_pair(name: &str) -> Result<(DistributionSpec, DistributionSpec)> {
    let p2 = DistributionSpec::Gaussian {
        mean: vec![0.0, 0.0],
        std: 0.5,
    };
    let p1 = DistributionSpec::Gaussian {
        mean: vec![0.0],
        std: 0.5,
    };
    match name {
        "gauss_to_8gauss" => {
            let centers = (0..8)
                .map(|k| {
                    let angle = k as f64 * std::f64::consts::FRAC_PI_4;
                    vec![4.0 * angle.cos(), 4.0 * angle.sin()]
                })
                .collect();
            Ok((
                p2,
                DistributionSpec::GaussianMixture {
                    centers,
                    component_std: 0.2,
                    mixture_weights: vec![0.125; 8],
                },
            ))
        }
        "gauss_to_swissroll" => Ok((
            p2,
            DistributionSpec::SwissRoll {
                turns: 1.5,
                scale: 1.0 / 3.0,
                jitter_std: 0.05,
            },
        )),
        "gauss_to_2gauss_1d" => Ok((
            p1,
            DistributionSpec::GaussianMixture {
                centers: vec![vec![-2.0], vec![2.0]],
                component_std: 0.25,
                mixture_weights: vec![0.5, 0.5],
            },
        )),
        "gauss_to_3gauss_1d" => Ok((
            p1,
            DistributionSpec::GaussianMixture {
                centers: vec![vec![-2.0], vec![0.0], vec![2.0]],
                component_std: 0.25,
                mixture_weights: vec![1.0 / 3.0; 3],
            },
        )),
        other => Err(Error::Config(format!("unknown toy pair \"{other}\""))),
    }
}
