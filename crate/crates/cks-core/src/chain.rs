//! Coarse Markov-chain abstraction of the walk: collapse the graph to
//! three states (query Q, fringe X, key members K) joined by hyperedges
//! weighted with maximal crossing trussness, verify the chain's
//! eigenvalues analytically, and extend the chain with longer Q→K paths.
//! Also hosts the Pearson-correlation utility used to relate visiting
//! probability to cohesiveness.

use nalgebra::{DMatrix, Matrix3};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::truss::TrussnessMap;

/// Hyperedge weights of the three-state chain: γ joins Q–K, μ joins
/// Q–X, β joins X–K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperChainParams {
    pub gamma: f64,
    pub mu: f64,
    pub beta: f64,
}

impl HyperChainParams {
    pub fn new(gamma: f64, mu: f64, beta: f64) -> Result<Self> {
        for (name, w) in [("gamma", gamma), ("mu", mu), ("beta", beta)] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!(
                    "hyperedge weight {name} must be positive and finite, got {w}"
                )));
            }
        }
        Ok(Self { gamma, mu, beta })
    }
}

/// Collapses the graph into the three-state chain: each hyperedge weight
/// is the maximal trussness over the crossing edges of its node-category
/// pair, X being everything outside Q ∪ K.
pub fn build_hypergraph_params(
    g: &Graph,
    trussness: &TrussnessMap,
    q_nodes: &[NodeId],
    k_nodes: &[NodeId],
) -> Result<HyperChainParams> {
    #[derive(Clone, Copy, PartialEq)]
    enum Class {
        Q,
        K,
        X,
    }
    let mut class = vec![Class::X; g.node_count()];
    for &u in q_nodes {
        g.check_node(u)?;
        class[u as usize] = Class::Q;
    }
    for &u in k_nodes {
        g.check_node(u)?;
        if class[u as usize] == Class::Q {
            return Err(Error::InvalidParameter(format!(
                "node {u} appears in both Q and K"
            )));
        }
        class[u as usize] = Class::K;
    }
    let (mut gamma, mut mu, mut beta) = (None::<u32>, None::<u32>, None::<u32>);
    for (idx, &(u, v)) in g.edges().iter().enumerate() {
        let phi = trussness.value(idx);
        let slot = match (class[u as usize], class[v as usize]) {
            (Class::Q, Class::K) | (Class::K, Class::Q) => &mut gamma,
            (Class::Q, Class::X) | (Class::X, Class::Q) => &mut mu,
            (Class::K, Class::X) | (Class::X, Class::K) => &mut beta,
            _ => continue,
        };
        *slot = Some(slot.map_or(phi, |best| best.max(phi)));
    }
    let gamma = gamma.ok_or(Error::MissingHyperedge("Q", "K"))?;
    let mu = mu.ok_or(Error::MissingHyperedge("Q", "X"))?;
    let beta = beta.ok_or(Error::MissingHyperedge("K", "X"))?;
    HyperChainParams::new(gamma as f64, mu as f64, beta as f64)
}

/// Row-stochastic 3×3 transition matrix in state order (Q, X, K).
pub fn chain_transition_matrix(p: &HyperChainParams) -> Matrix3<f64> {
    let HyperChainParams { gamma, mu, beta } = *p;
    Matrix3::new(
        0.0,
        mu / (mu + gamma),
        gamma / (mu + gamma),
        mu / (mu + beta),
        0.0,
        beta / (mu + beta),
        gamma / (gamma + beta),
        beta / (gamma + beta),
        0.0,
    )
}

/// Analytic eigenvalues of the chain with their characteristic-equation
/// residuals and the numerically iterated stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck {
    /// 1 plus the two roots of λ² + λ + c.
    pub eigenvalues: [f64; 3],
    /// |det(P − λI)| at each eigenvalue.
    pub residuals: [f64; 3],
    /// π after power iteration, state order (Q, X, K).
    pub stationary: [f64; 3],
}

/// Verifies that the chain's spectrum is {1} ∪ roots of λ² + λ + c with
/// c = 2μβγ / ((μ+β)(β+γ)(γ+μ)). The quadratic's discriminant 1 − 4c is
/// nonnegative for all positive weights, so the spectrum is real.
pub fn chain_eigen_check(p: &HyperChainParams) -> ChainCheck {
    let HyperChainParams { gamma, mu, beta } = *p;
    let c = 2.0 * mu * beta * gamma / ((mu + beta) * (beta + gamma) * (gamma + mu));
    let disc = (1.0 - 4.0 * c).max(0.0).sqrt();
    let eigenvalues = [1.0, (-1.0 + disc) / 2.0, (-1.0 - disc) / 2.0];
    let matrix = chain_transition_matrix(p);
    let residuals =
        eigenvalues.map(|lambda| (matrix - Matrix3::identity() * lambda).determinant().abs());
    // Small γ pushes an eigenvalue toward −1, so raw iterates can
    // oscillate for a long time; the average of consecutive iterates
    // damps that mode. Iterate it to numerical fixpoint.
    let mut pi = [1.0, 0.0, 0.0];
    let mut avg = pi;
    for _ in 0..200_000 {
        let mut next = [0.0; 3];
        for (i, &mass) in pi.iter().enumerate() {
            for j in 0..3 {
                next[j] += mass * matrix[(i, j)];
            }
        }
        let new_avg = [
            0.5 * (pi[0] + next[0]),
            0.5 * (pi[1] + next[1]),
            0.5 * (pi[2] + next[2]),
        ];
        pi = next;
        let delta = (0..3).map(|j| (new_avg[j] - avg[j]).abs()).fold(0.0, f64::max);
        avg = new_avg;
        if delta < 1e-14 {
            break;
        }
    }
    ChainCheck {
        eigenvalues,
        residuals,
        stationary: avg,
    }
}

/// Chain with the direct Q–K hyperedge (weight γ) competing against a
/// path Q–X₁–…–X_l–K of `l` intermediate states (weights η).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedChain {
    pub matrix: DMatrix<f64>,
    /// Probability mass on K after `r` steps from Q, averaged over the
    /// last two iterates: even-length cycles are periodic and the raw
    /// iterates oscillate, while the two-step average converges.
    pub k_probability: f64,
}

/// Builds the (l+2)-state cycle and iterates `r` steps from Q.
pub fn extended_chain(gamma: f64, eta: f64, l: usize, r: u32) -> Result<ExtendedChain> {
    for (name, w) in [("gamma", gamma), ("eta", eta)] {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Domain(format!(
                "hyperedge weight {name} must be positive and finite, got {w}"
            )));
        }
    }
    if l < 1 {
        return Err(Error::InvalidParameter(
            "path length l must be at least 1".into(),
        ));
    }
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    // states: 0 = Q, 1..=l = path, l+1 = K; edges form an (l+2)-cycle
    let states = l + 2;
    let k = l + 1;
    let mut weights = DMatrix::zeros(states, states);
    weights[(0, 1)] = eta;
    weights[(1, 0)] = eta;
    for i in 1..l {
        weights[(i, i + 1)] = eta;
        weights[(i + 1, i)] = eta;
    }
    weights[(l, k)] = eta;
    weights[(k, l)] = eta;
    weights[(0, k)] = gamma;
    weights[(k, 0)] = gamma;
    let mut matrix = weights.clone();
    for i in 0..states {
        let total: f64 = weights.row(i).sum();
        for j in 0..states {
            matrix[(i, j)] /= total;
        }
    }
    let mut pi = vec![0.0; states];
    pi[0] = 1.0;
    let mut prev_k = pi[k];
    for _ in 0..r {
        let mut next = vec![0.0; states];
        for (i, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for j in 0..states {
                next[j] += mass * matrix[(i, j)];
            }
        }
        prev_k = pi[k];
        pi = next;
    }
    Ok(ExtendedChain {
        matrix,
        k_probability: 0.5 * (prev_k + pi[k]),
    })
}

/// Pearson correlation with its t statistic and two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub t: f64,
    pub p_value: f64,
}

pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "correlation needs at least 3 points, got {n}"
        )));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateSample(
            "constant series has undefined correlation".into(),
        ));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let (t, p_value) = if r.abs() >= 1.0 {
        (f64::INFINITY.copysign(r), 0.0)
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        (t, 2.0 * (1.0 - dist.cdf(t.abs())))
    };
    Ok(Correlation { r, t, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bridged_clique, complete};
    use crate::truss::truss_decompose;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_hyperedge_weights() {
        let g = bridged_clique();
        let tm = truss_decompose(&g);
        let p = build_hypergraph_params(&g, &tm, &[1], &[0, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!((p.gamma, p.mu, p.beta), (3.0, 3.0, 3.0));
    }

    #[test]
    fn missing_crossing_edges_are_reported() {
        let k4 = complete(4);
        let tm = truss_decompose(&k4);
        // X is empty: no Q–X hyperedge can exist
        let err = build_hypergraph_params(&k4, &tm, &[0], &[1, 2, 3]);
        assert!(matches!(err, Err(Error::MissingHyperedge("Q", "X"))));
        let overlap = build_hypergraph_params(&k4, &tm, &[0], &[0, 1]);
        assert!(matches!(overlap, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn transition_rows() {
        let p = HyperChainParams::new(2.0, 1.0, 1.0).unwrap();
        let m = chain_transition_matrix(&p);
        assert_relative_eq!(m[(0, 0)], 0.0);
        assert_relative_eq!(m[(0, 1)], 1.0 / 3.0);
        assert_relative_eq!(m[(0, 2)], 2.0 / 3.0);
        for i in 0..3 {
            assert!((m.row(i).sum() - 1.0).abs() < 1e-15);
        }

        let sym = HyperChainParams::new(3.0, 3.0, 3.0).unwrap();
        let m = chain_transition_matrix(&sym);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 0.5 };
                assert_relative_eq!(m[(i, j)], expect);
            }
        }
    }

    #[test]
    fn symmetric_chain_spectrum_and_stationary() {
        let p = HyperChainParams::new(3.0, 3.0, 3.0).unwrap();
        let check = chain_eigen_check(&p);
        assert_relative_eq!(check.eigenvalues[0], 1.0);
        assert_relative_eq!(check.eigenvalues[1], -0.5, epsilon = 1e-9);
        assert_relative_eq!(check.eigenvalues[2], -0.5, epsilon = 1e-9);
        for res in check.residuals {
            assert!(res < 1e-9);
        }
        for s in check.stationary {
            assert_relative_eq!(s, 1.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn random_chains_satisfy_the_characteristic_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = HyperChainParams::new(
                rng.gen_range(0.1..50.0),
                rng.gen_range(0.1..50.0),
                rng.gen_range(0.1..50.0),
            )
            .unwrap();
            let check = chain_eigen_check(&p);
            assert!(check.residuals.iter().all(|&r| r < 1e-9), "{p:?}");
            assert!(check.residuals[0] < 1e-12, "unit eigenvalue, {p:?}");
            let m = chain_transition_matrix(&p);
            let pi = nalgebra::RowVector3::from(check.stationary);
            let diff = (pi * m) - pi;
            assert!(diff.amax() < 1e-9, "stationarity, {p:?}");
        }
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(HyperChainParams::new(0.0, 1.0, 1.0).is_err());
        assert!(HyperChainParams::new(1.0, -2.0, 1.0).is_err());
        assert!(extended_chain(1.0, 0.0, 2, 10).is_err());
    }

    #[test]
    fn single_intermediate_state_reduces_to_the_original_chain() {
        let ext = extended_chain(2.0, 1.0, 1, 150).unwrap();
        let p = HyperChainParams::new(2.0, 1.0, 1.0).unwrap();
        let original = chain_transition_matrix(&p);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(ext.matrix[(i, j)], original[(i, j)]);
            }
        }
    }

    #[test]
    fn k_probability_decreases_with_path_length() {
        let mut last = f64::INFINITY;
        for l in 1..=6 {
            // long cycles mix slowly (second eigenvalue near −1), so give
            // the fixed-step iteration room to settle for the tight check
            let ext = extended_chain(3.0, 3.0, l, 600).unwrap();
            // equal weights make the cycle uniform: mass 1/(l+2) on K
            assert_relative_eq!(
                ext.k_probability,
                1.0 / (l + 2) as f64,
                epsilon = 1e-9
            );
            assert!(ext.k_probability < last);
            last = ext.k_probability;
        }
    }

    #[test]
    fn direct_edge_dominates_when_much_heavier() {
        let ext = extended_chain(100.0, 1.0, 4, 200).unwrap();
        assert!(ext.k_probability > 0.4, "got {}", ext.k_probability);
        for i in 0..ext.matrix.nrows() {
            assert!((ext.matrix.row(i).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_reference_values() {
        let perfect = pearson_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(perfect.r, 1.0);
        assert_eq!(perfect.p_value, 0.0);
        let inverse = pearson_correlation(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap();
        assert_eq!(inverse.r, -1.0);

        let mixed = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_relative_eq!(mixed.r, 0.5, epsilon = 1e-12);
        assert_relative_eq!(mixed.t, 0.5773502692, epsilon = 1e-9);
        assert_relative_eq!(mixed.p_value, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn correlation_input_validation() {
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        assert!(matches!(
            pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateSample(_))
        ));
    }
}
