//! Closed-form expectations and bounds for the diagonal scheme and the
//! binary splitting baselines.

use crate::combinatorics::{binomial, ceil_log2_big, log2_binomial};
use crate::error::{Error, Result};
use crate::instance::Model;
use crate::tree::tree_depth;

/// Probability that a depth-`depth` node (with `n / 2^depth` leaves) holds at
/// least one infection.
///
/// Combinatorial: `1 - C(n-k, m) / C(n, m)`, evaluated as the product
/// `prod_{j<m} (n-k-j)/(n-j)` so it never leaves `[0, 1]`.
/// Probabilistic: `1 - (1-p)^m`.
pub fn positive_prob(n: usize, model: Model, depth: u32) -> Result<f64> {
    let d = tree_depth(n)?;
    if depth > d {
        return Err(Error::param(format!("depth {depth} exceeds tree depth {d}")));
    }
    model.validate(n)?;
    let leaves = n >> depth;
    Ok(match model {
        Model::Combinatorial { k } => {
            if leaves > n - k {
                1.0
            } else {
                let all_healthy: f64 = (0..leaves)
                    .map(|j| (n - k - j) as f64 / (n - j) as f64)
                    .product();
                1.0 - all_healthy
            }
        }
        Model::Probabilistic { p } => 1.0 - (1.0 - p).powi(leaves as i32),
    })
}

/// Expected number of tests of the diagonal scheme, not counting a
/// whole-population screen:
/// `d + 1 + sum_{i=1}^{d-1} 2^(i-1) * P_i * (d - i + 1)`.
pub fn expected_tests_dsa(n: usize, model: Model) -> Result<f64> {
    let d = tree_depth(n)?;
    let mut total = (d + 1) as f64;
    for i in 1..d {
        let nodes = (1u64 << (i - 1)) as f64;
        total += nodes * positive_prob(n, model, i)? * (d - i + 1) as f64;
    }
    Ok(total)
}

/// Expected tests at one infection: `d^2/4 + 5d/4 + 1/2`.
pub fn corollary_k1(d: u32) -> f64 {
    let d = d as f64;
    0.25 * d * d + 1.25 * d + 0.5
}

/// Expected tests when everyone is infected: `3n/2 - 1`.
pub fn corollary_kn(n: usize) -> f64 {
    1.5 * n as f64 - 1.0
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Information-theoretic minimum: `log2 C(n, k)`, or `n h2(p)` on average.
pub fn counting_bound(n: usize, model: Model) -> Result<f64> {
    model.validate(n)?;
    Ok(match model {
        Model::Combinatorial { k } => log2_binomial(n, k),
        Model::Probabilistic { p } => n as f64 * binary_entropy(p),
    })
}

fn check_count(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    Ok(())
}

/// `k log2 n + k`.
pub fn bsa_bound(n: usize, k: usize) -> Result<f64> {
    check_count(n, k)?;
    Ok(k as f64 * (n as f64).log2() + k as f64)
}

/// `log2 C(n, k) + k`.
pub fn hgbsa_bound(n: usize, k: usize) -> Result<f64> {
    check_count(n, k)?;
    Ok(log2_binomial(n, k) + k as f64)
}

/// `ceil(log2 C(n, k)) + k`, computed exactly.
pub fn hgbsa_test_ceiling(n: usize, k: usize) -> Result<u64> {
    check_count(n, k)?;
    Ok(ceil_log2_big(&binomial(n, k)) + k as u64)
}

/// Closed form of `sum_{i=1}^{beta} i 2^(i-1)`: `(beta - 1) 2^beta + 1`.
pub fn appendix_sum_identity(beta: u32) -> u64 {
    assert!((1..=62).contains(&beta), "beta must be in 1..=62");
    (beta as u64 - 1) * (1u64 << beta) + 1
}

/// Constants of the order-optimality bound for a target `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub epsilon: f64,
    /// `-ln(1 - epsilon)`
    pub c: f64,
    /// `log2(k / c)`, the depth below which nodes are rarely positive.
    pub beta: f64,
}

impl BoundParams {
    pub fn new(epsilon: f64, k: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(format!("epsilon = {epsilon} is outside (0, 1)")));
        }
        let c = -(1.0 - epsilon).ln();
        Ok(Self {
            epsilon,
            c,
            beta: (k as f64 / c).log2(),
        })
    }
}

/// `(1/C) log2 C(n,k) + (log2 C + 2) k / C + 3/2 epsilon n - 1` with
/// `C = -ln(1 - epsilon)`. Asymptotic in `n`; finite-`n` values of
/// [`expected_tests_dsa`] may sit on either side of it.
pub fn appendix_upper_bound(n: usize, k: usize, epsilon: f64) -> Result<f64> {
    check_count(n, k)?;
    let BoundParams { c, .. } = BoundParams::new(epsilon, k)?;
    Ok(log2_binomial(n, k) / c + (c.log2() + 2.0) * k as f64 / c + 1.5 * epsilon * n as f64 - 1.0)
}

/// One line of the bound-versus-expectation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReportRow {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Expected tests under i.i.d. infections with `p = k / n`.
    pub expected_tests: f64,
    pub upper_bound: f64,
}

impl BoundReportRow {
    pub fn bound_holds(&self) -> bool {
        self.expected_tests <= self.upper_bound
    }
}

/// Compares the asymptotic bound with the exact expectation for each `n`.
pub fn bound_report(k: usize, epsilon: f64, ns: &[usize]) -> Result<Vec<BoundReportRow>> {
    ns.iter()
        .map(|&n| {
            let p = k as f64 / n as f64;
            Ok(BoundReportRow {
                n,
                k,
                epsilon,
                expected_tests: expected_tests_dsa(n, Model::Probabilistic { p })?,
                upper_bound: appendix_upper_bound(n, k, epsilon)?,
            })
        })
        .collect()
}

pub fn bound_report_csv(rows: &[BoundReportRow]) -> String {
    let mut out = String::from("n,k,epsilon,expected_tests,upper_bound,bound_holds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.epsilon,
            r.expected_tests,
            r.upper_bound,
            r.bound_holds()
        ));
    }
    out
}

/// One row of the analytic table.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRow {
    pub n: usize,
    pub model: Model,
    pub expected_tests: Option<f64>,
    pub counting_bound: f64,
    /// Baseline guarantees at `k` (or `round(p n)`), absent when that is 0.
    pub hgbsa_bound: Option<f64>,
    pub bsa_bound: Option<f64>,
}

pub fn analytic_row(n: usize, model: Model) -> Result<AnalyticRow> {
    model.validate(n)?;
    let k = match model {
        Model::Combinatorial { k } => k,
        Model::Probabilistic { p } => (p * n as f64).round() as usize,
    };
    let expected_tests = match tree_depth(n) {
        Ok(_) => Some(expected_tests_dsa(n, model)?),
        Err(_) => None,
    };
    Ok(AnalyticRow {
        n,
        model,
        expected_tests,
        counting_bound: counting_bound(n, model)?,
        hgbsa_bound: (k > 0).then(|| hgbsa_bound(n, k)).transpose()?,
        bsa_bound: (k > 0).then(|| bsa_bound(n, k)).transpose()?,
    })
}

pub fn analytic_csv(rows: &[AnalyticRow]) -> String {
    fn opt(v: Option<f64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut out = String::from("n,regime,param,expected_tests,counting_bound,hgbsa_bound,bsa_bound\n");
    for r in rows {
        let param = match r.model {
            Model::Combinatorial { k } => k.to_string(),
            Model::Probabilistic { p } => p.to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.model.tag(),
            param,
            opt(r.expected_tests),
            r.counting_bound,
            opt(r.hgbsa_bound),
            opt(r.bsa_bound)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMB1: Model = Model::Combinatorial { k: 1 };

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    /// Fraction of all size-m pools that meet a single infected individual.
    fn enumerated_hit_rate(n: usize, m: usize) -> f64 {
        let (mut hit, mut total) = (0u64, 0u64);
        for mask in 0u32..1 << n {
            if mask.count_ones() as usize == m {
                total += 1;
                hit += (mask & 1) as u64;
            }
        }
        hit as f64 / total as f64
    }

    #[test]
    fn positive_prob_examples() {
        for i in 1..3 {
            assert_eq!(positive_prob(8, Model::Combinatorial { k: 0 }, i).unwrap(), 0.0);
            assert_eq!(positive_prob(8, Model::Probabilistic { p: 1.0 }, i).unwrap(), 1.0);
        }
        let p = positive_prob(8, COMB1, 1).unwrap();
        assert!(close(p, enumerated_hit_rate(8, 4)));
        assert!(close(p, 0.5));
        assert!(close(positive_prob(8, COMB1, 2).unwrap(), enumerated_hit_rate(8, 2)));
        // pools larger than the healthy population are certainly positive
        assert_eq!(positive_prob(8, Model::Combinatorial { k: 6 }, 1).unwrap(), 1.0);
    }

    #[test]
    fn expected_tests_examples() {
        assert!(close(expected_tests_dsa(8, COMB1).unwrap(), 6.5));
        assert!(close(expected_tests_dsa(8, Model::Combinatorial { k: 8 }).unwrap(), 11.0));
        assert!(close(expected_tests_dsa(16, COMB1).unwrap(), 9.5));
        assert!(expected_tests_dsa(12, COMB1).is_err());
    }

    #[test]
    fn corollaries_match_the_general_formula() {
        assert_eq!(corollary_k1(3), 6.5);
        assert_eq!(corollary_kn(8), 11.0);
        for d in 1..=14u32 {
            let n = 1usize << d;
            assert!(close(corollary_k1(d), expected_tests_dsa(n, COMB1).unwrap()), "d={d}");
            let all = Model::Combinatorial { k: n };
            assert!(close(corollary_kn(n), expected_tests_dsa(n, all).unwrap()), "d={d}");
            let sure = Model::Probabilistic { p: 1.0 };
            assert!(close(corollary_kn(n), expected_tests_dsa(n, sure).unwrap()), "d={d}");
        }
    }

    #[test]
    fn counting_bound_examples() {
        assert!(close(counting_bound(8, COMB1).unwrap(), 3.0));
        assert!(close(counting_bound(8, Model::Probabilistic { p: 0.5 }).unwrap(), 8.0));
        assert_eq!(counting_bound(1024, Model::Combinatorial { k: 1024 }).unwrap(), 0.0);
        assert_eq!(counting_bound(16, Model::Combinatorial { k: 0 }).unwrap(), 0.0);
        assert_eq!(counting_bound(16, Model::Probabilistic { p: 0.0 }).unwrap(), 0.0);
    }

    #[test]
    fn baseline_bounds() {
        assert!(close(bsa_bound(8, 2).unwrap(), 8.0));
        assert!(close(hgbsa_bound(8, 1).unwrap(), 4.0));
        for n in [1usize, 7, 16, 1024] {
            assert!(close(hgbsa_bound(n, n).unwrap(), n as f64));
        }
        assert!(bsa_bound(8, 0).is_err());
        assert_eq!(hgbsa_test_ceiling(8, 1).unwrap(), 4);
        assert_eq!(hgbsa_test_ceiling(16, 2).unwrap(), 9);
    }

    #[test]
    fn counting_bound_below_hgbsa_bound() {
        for n in (1..=1024).step_by(37).chain([1024]) {
            for k in 1..=n {
                let cb = counting_bound(n, Model::Combinatorial { k }).unwrap();
                assert!(cb <= hgbsa_bound(n, k).unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn summation_identity_matches_direct_sum() {
        for beta in 1..=20u32 {
            let direct: u64 = (1..=beta as u64).map(|i| i << (i - 1)).sum();
            assert_eq!(appendix_sum_identity(beta), direct, "beta={beta}");
        }
        assert_eq!(appendix_sum_identity(3), 17);
        assert_eq!(appendix_sum_identity(10), 9217);
    }

    #[test]
    fn upper_bound_at_unit_constant() {
        let eps = 1.0 - (-1.0f64).exp();
        for (n, k) in [(16usize, 1usize), (64, 5), (1024, 100)] {
            let expected = log2_binomial(n, k) + 2.0 * k as f64 + 1.5 * eps * n as f64 - 1.0;
            assert!((appendix_upper_bound(n, k, eps).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn upper_bound_sanity() {
        let b = appendix_upper_bound(1024, 1, 0.01).unwrap();
        assert!(b.is_finite() && b > 33.5, "{b}");
        assert!(close(expected_tests_dsa(1024, COMB1).unwrap(), 38.0));
        let mut last = f64::NEG_INFINITY;
        for d in 4..=10 {
            let v = appendix_upper_bound(1 << d, 3, 0.05).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert!(appendix_upper_bound(16, 1, 0.0).is_err());
        assert!(appendix_upper_bound(16, 1, 1.0).is_err());
    }

    #[test]
    fn models_converge_as_n_grows() {
        let mut last = f64::INFINITY;
        for n in [16usize, 64, 256, 1024] {
            let k = n / 16;
            let comb = expected_tests_dsa(n, Model::Combinatorial { k }).unwrap();
            let prob = expected_tests_dsa(n, Model::Probabilistic { p: k as f64 / n as f64 }).unwrap();
            let gap = (comb - prob).abs() / comb;
            assert!(gap < last, "n={n}: {gap} vs {last}");
            last = gap;
        }
    }
}
