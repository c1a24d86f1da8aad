//! Statistical model of key-membership: Box-Cox-normalized cohesiveness
//! features, a trivariate Gaussian joint density per class, and the
//! Bayesian posterior that a node belongs to the densest sub-truss.

use nalgebra::{Cholesky, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{average_support, node_truss_upper_bound, support_skewness};
use crate::graph::{Graph, NodeId, SupportMap};

/// Shifted Box-Cox transform ((y+1)^λ − 1)/λ, with the λ → 0 limit
/// log(y+1). Defined for y > −1.
pub fn box_cox(y: f64, lambda: f64) -> Result<f64> {
    if y <= -1.0 {
        return Err(Error::Domain(format!(
            "Box-Cox input {y} outside the domain y > -1"
        )));
    }
    let log1p = y.ln_1p();
    if lambda == 0.0 {
        Ok(log1p)
    } else {
        // exp_m1 keeps the λ → 0 limit numerically smooth
        Ok((lambda * log1p).exp_m1() / lambda)
    }
}

/// Box-Cox profile log-likelihood, up to constants, of `samples` at λ.
fn profile_log_likelihood(samples: &[f64], log1p_sum: f64, lambda: f64) -> f64 {
    let n = samples.len() as f64;
    let transformed: Vec<f64> = samples
        .iter()
        .map(|&y| box_cox(y, lambda).unwrap())
        .collect();
    let mean = transformed.iter().sum::<f64>() / n;
    let var = transformed.iter().map(|&t| (t - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) || !var.is_finite() {
        return f64::NEG_INFINITY;
    }
    -0.5 * n * var.ln() + (lambda - 1.0) * log1p_sum
}

/// Maximum-likelihood λ over the grid [−5, 5] with golden-section
/// refinement around the best grid point. Deterministic.
pub fn estimate_lambda(samples: &[f64]) -> Result<f64> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "lambda estimation needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            (lo.min(y), hi.max(y))
        });
    if min <= -1.0 {
        return Err(Error::Domain(format!(
            "sample value {min} outside the Box-Cox domain y > -1"
        )));
    }
    if min == max {
        return Err(Error::DegenerateSample(
            "constant sample has no normalizing transform".into(),
        ));
    }
    let log1p_sum: f64 = samples.iter().map(|&y| y.ln_1p()).sum();
    let ll = |lambda: f64| profile_log_likelihood(samples, log1p_sum, lambda);

    let mut best = -5.0;
    let mut best_ll = f64::NEG_INFINITY;
    for step in 0..=100 {
        let lambda = -5.0 + 0.1 * step as f64;
        let value = ll(lambda);
        if value > best_ll {
            best_ll = value;
            best = lambda;
        }
    }
    let (mut lo, mut hi) = ((best - 0.1).max(-5.0), (best + 0.1).min(5.0));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (ll(x1), ll(x2));
    while hi - lo > 1e-7 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = ll(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = ll(x2);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Per-feature normalization: domain shift, Box-Cox λ, and the
/// post-transform standardization moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureTransform {
    pub shift: f64,
    pub lambda: f64,
    pub mean: f64,
    pub std_dev: f64,
}

impl FeatureTransform {
    /// Standardized score of a raw feature value, if inside the domain.
    fn standardize(&self, x: f64) -> Option<f64> {
        let shifted = x + self.shift;
        if shifted <= -1.0 {
            return None;
        }
        Some((box_cox(shifted, self.lambda).unwrap() - self.mean) / self.std_dev)
    }

    /// d(standardized)/dx at x: the change-of-variables factor that makes
    /// the fitted density a density in raw feature space.
    fn jacobian(&self, x: f64) -> f64 {
        (x + self.shift + 1.0).powf(self.lambda - 1.0) / self.std_dev
    }
}

/// Trivariate Gaussian over Box-Cox-standardized features, evaluated as
/// a density in raw feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDensityModel {
    pub transforms: [FeatureTransform; 3],
    /// Covariance of the standardized training features.
    pub covariance: [[f64; 3]; 3],
    /// Set when the covariance needed diagonal jitter to invert.
    pub jittered: bool,
    precision: [[f64; 3]; 3],
    normalizer: f64,
}

/// Fits the per-feature transforms and the joint Gaussian from samples
/// of (average support, support skewness, node trussness bound).
pub fn fit_joint_density(triples: &[[f64; 3]]) -> Result<JointDensityModel> {
    let n = triples.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "joint density fit needs at least 4 samples, got {n}"
        )));
    }
    let mut transforms = Vec::with_capacity(3);
    let mut z = vec![[0.0f64; 3]; n];
    for j in 0..3 {
        let col: Vec<f64> = triples.iter().map(|t| t[j]).collect();
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let shift = if min < 0.0 { 1.0 - min } else { 0.0 };
        let shifted: Vec<f64> = col.iter().map(|&y| y + shift).collect();
        let lambda = estimate_lambda(&shifted)?;
        let transformed: Vec<f64> = shifted
            .iter()
            .map(|&y| box_cox(y, lambda))
            .collect::<Result<_>>()?;
        let mean = transformed.iter().sum::<f64>() / n as f64;
        let var = transformed.iter().map(|&t| (t - mean).powi(2)).sum::<f64>() / n as f64;
        let std_dev = var.sqrt();
        for (i, &t) in transformed.iter().enumerate() {
            z[i][j] = (t - mean) / std_dev;
        }
        transforms.push(FeatureTransform {
            shift,
            lambda,
            mean,
            std_dev,
        });
    }
    let mut cov = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            cov[(a, b)] = z.iter().map(|zi| zi[a] * zi[b]).sum::<f64>() / n as f64;
        }
    }
    let (chol, jittered) = match Cholesky::new(cov) {
        Some(c) => (c, false),
        None => {
            let padded = cov + Matrix3::identity() * 1e-8;
            let c = Cholesky::new(padded).ok_or_else(|| {
                Error::DegenerateSample(
                    "covariance of standardized features is not positive definite \
                     even after jitter"
                        .into(),
                )
            })?;
            (c, true)
        }
    };
    let det: f64 = (0..3).map(|i| chol.l()[(i, i)].powi(2)).product();
    let precision = chol.inverse();
    let normalizer = 1.0 / ((2.0 * std::f64::consts::PI).powi(3) * det).sqrt();
    let as_array = |m: &Matrix3<f64>| {
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    };
    Ok(JointDensityModel {
        transforms: [transforms[0], transforms[1], transforms[2]],
        covariance: as_array(&cov),
        jittered,
        precision: as_array(&precision),
        normalizer,
    })
}

impl JointDensityModel {
    /// Density at a raw feature triple; 0 outside the transform domain.
    pub fn density(&self, x: &[f64; 3]) -> f64 {
        let mut z = [0.0; 3];
        let mut jacobian = 1.0;
        for j in 0..3 {
            match self.transforms[j].standardize(x[j]) {
                Some(score) => z[j] = score,
                None => return 0.0,
            }
            jacobian *= self.transforms[j].jacobian(x[j]);
        }
        let mut quad = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                quad += z[a] * self.precision[a][b] * z[b];
            }
        }
        self.normalizer * (-0.5 * quad).exp() * jacobian
    }
}

/// Two-class mixture: the key-member class and the rest of the
/// community, sharing one class prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub key: JointDensityModel,
    pub rest: JointDensityModel,
    /// P{node is a key member} before seeing features.
    pub prior: f64,
}

impl MixtureModel {
    pub fn new(key: JointDensityModel, rest: JointDensityModel, prior: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior) {
            return Err(Error::InvalidParameter(format!(
                "prior must lie in [0, 1], got {prior}"
            )));
        }
        Ok(Self { key, rest, prior })
    }

    pub fn mixture_density(&self, x: &[f64; 3]) -> f64 {
        self.prior * self.key.density(x) + (1.0 - self.prior) * self.rest.density(x)
    }
}

/// Posterior key-membership probability with its support diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub probability: f64,
    /// The evaluation point had zero mixture density; the prior was
    /// returned unchanged.
    pub out_of_support: bool,
}

/// Bayes posterior P{key member | features} as the density ratio
/// prior·f⁺/(prior·f⁺ + (1−prior)·f⁻).
pub fn key_member_posterior(x: &[f64; 3], mix: &MixtureModel) -> Posterior {
    let f_plus = mix.key.density(x);
    let f = mix.prior * f_plus + (1.0 - mix.prior) * mix.rest.density(x);
    if f == 0.0 {
        return Posterior {
            probability: mix.prior,
            out_of_support: true,
        };
    }
    Posterior {
        probability: (mix.prior * f_plus / f).clamp(0.0, 1.0),
        out_of_support: false,
    }
}

/// The feature triple the model is fitted over.
pub fn node_feature_triple(g: &Graph, supports: &SupportMap, u: NodeId) -> Result<[f64; 3]> {
    Ok([
        average_support(g, supports, u)?,
        support_skewness(g, supports, u)?,
        node_truss_upper_bound(g, supports, u) as f64,
    ])
}
