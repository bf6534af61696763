//! Likelihood of the first-stage outcome pattern as a function of the number
//! of infections, and the estimate derived from it.
//!
//! `M[k, s]` counts the size-`k` infection sets whose first diagonal stage
//! produces pattern `s`. Clearing the first positive bit of `s` (pool of `N0`
//! leaves) gives `s0`, and
//!
//! ```text
//! M[k, s] = sum_{i=1..k} C(N0, i) * M[k - i, s0],   M[0, 0] = 1.
//! ```
//!
//! Only the column of the observed pattern is ever built; the chain
//! `s -> s0 -> ... -> 0` has at most `d + 1` links.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::combinatorics::{binomial_row, ratio};
use crate::error::{Error, Result};
use crate::tree::tree_depth;

/// Outcomes of the first diagonal stage, largest pool first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomePattern {
    bits: Vec<bool>,
}

impl OutcomePattern {
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        let expected = tree_depth(n)? as usize + 1;
        if bits.len() != expected {
            return Err(Error::PatternLength {
                expected,
                got: bits.len(),
            });
        }
        Ok(Self { bits })
    }

    /// Parses a big-endian bitstring such as `1100`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(Error::param(format!("pattern character {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, bits)
    }

    /// Pattern whose big-endian reading is `code`.
    pub fn from_code(n: usize, code: u64) -> Result<Self> {
        let len = tree_depth(n)? as usize + 1;
        if len < 64 && code >> len != 0 {
            return Err(Error::param(format!("pattern code {code} has more than {len} bits")));
        }
        Self::new(n, (0..len).rev().map(|j| code >> j & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn code(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }

    pub fn is_all_zero(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}

impl fmt::Display for OutcomePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Leaf count of the pool at `position` in the first-stage layout of `n`.
fn pool_size(n: usize, position: usize, d: usize) -> usize {
    if position < d {
        n >> (position + 1)
    } else {
        1
    }
}

/// The whole column `M[., s]` for `k = 0..=n`, evaluated along the
/// bit-clearing chain.
pub fn occurrence_column(n: usize, pattern: &OutcomePattern) -> Result<Vec<BigUint>> {
    let d = tree_depth(n)? as usize;
    if pattern.bits.len() != d + 1 {
        return Err(Error::PatternLength {
            expected: d + 1,
            got: pattern.bits.len(),
        });
    }
    // Base of the chain: the all-zero pattern, M[k, 0] = [k == 0].
    let mut column = vec![BigUint::zero(); n + 1];
    column[0] = BigUint::one();
    let mut support = 0usize;

    // The first positive bit is the outermost link of the chain, so the
    // column is assembled from the last positive bit backwards.
    for position in (0..=d).rev().filter(|&j| pattern.bits[j]) {
        let leaves = pool_size(n, position, d);
        let coeffs = binomial_row(leaves);
        let mut next = vec![BigUint::zero(); n + 1];
        for (prev_k, prev) in column.iter().enumerate().take(support + 1) {
            if prev.is_zero() {
                continue;
            }
            for (i, c) in coeffs.iter().enumerate().skip(1) {
                next[prev_k + i] += c * prev;
            }
        }
        support += leaves;
        column = next;
    }
    Ok(column)
}

/// `M[k, s]` by the recurrence.
pub fn occurrence_count(n: usize, k: usize, pattern: &OutcomePattern) -> Result<BigUint> {
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds n = {n}")));
    }
    Ok(occurrence_column(n, pattern)?.swap_remove(k))
}

/// `M[k, s]` by enumerating every size-`k` subset of a population of at most
/// 16 and simulating the first diagonal stage.
pub fn brute_force_occurrence(n: usize, k: usize, pattern: &OutcomePattern) -> Result<u64> {
    if n > 16 {
        return Err(Error::TooLargeForEnumeration(n));
    }
    let d = tree_depth(n)? as usize;
    if pattern.bits.len() != d + 1 {
        return Err(Error::PatternLength {
            expected: d + 1,
            got: pattern.bits.len(),
        });
    }
    // Leaf i (1-based) is bit i-1. Pool j < d covers the left half of what
    // remains after pools 0..j; the final pool is leaf n.
    let mut masks = Vec::with_capacity(d + 1);
    let mut start = 0usize;
    for j in 0..d {
        let size = n >> (j + 1);
        masks.push(((1u32 << size) - 1) << start);
        start += size;
    }
    masks.push(1u32 << (n - 1));

    let target = pattern.code();
    let count = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .filter(|&m| {
            let code = masks
                .iter()
                .fold(0u64, |acc, &pool| acc << 1 | (m & pool != 0) as u64);
            code == target
        })
        .count();
    Ok(count as u64)
}

/// Occurrence counts and per-`k` likelihoods of one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodColumn {
    counts: Vec<BigUint>,
    totals: Vec<BigUint>,
    likelihoods: Vec<f64>,
}

impl LikelihoodColumn {
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// `L_s(k) = M[k, s] / C(n, k)`.
    pub fn likelihoods(&self) -> &[f64] {
        &self.likelihoods
    }
}

pub fn likelihood_column(n: usize, pattern: &OutcomePattern) -> Result<LikelihoodColumn> {
    let counts = occurrence_column(n, pattern)?;
    let totals = binomial_row(n);
    let likelihoods = counts.iter().zip(&totals).map(|(c, t)| ratio(c, t)).collect();
    Ok(LikelihoodColumn {
        counts,
        totals,
        likelihoods,
    })
}

/// Maximum-likelihood infection count. Ties go to the smaller count.
/// Compared exactly: `a/C(n,a) > b/C(n,b)` iff `a * C(n,b) > b * C(n,a)`.
pub fn estimate_k(column: &LikelihoodColumn) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (k, count) in column.counts.iter().enumerate() {
        if count.is_zero() {
            continue;
        }
        best = match best {
            Some(b) if count * &column.totals[b] <= &column.counts[b] * &column.totals[k] => Some(b),
            _ => Some(k),
        };
    }
    best.ok_or(Error::InconsistentPattern)
}

fn estimate_cache() -> &'static Mutex<HashMap<(usize, u64), usize>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), usize>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// [`estimate_k`] for a pattern, memoized per `(n, pattern)` across the process.
pub fn cached_estimate(n: usize, pattern: &OutcomePattern) -> Result<usize> {
    let key = (n, pattern.code());
    if let Some(&k) = estimate_cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(k);
    }
    let k = estimate_k(&likelihood_column(n, pattern)?)?;
    estimate_cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, k);
    Ok(k)
}

/// Splits the residual estimate `k_hat - certified` over positive subtrees
/// in proportion to their leaf counts by largest remainder, then clamps each
/// share to `[1, leaves]`. The residual is raised to at least one per subtree.
/// Remainder ties go to the larger subtree, then the earlier one.
pub fn allocate_estimate(k_hat: usize, certified: usize, leaf_counts: &[usize]) -> Vec<usize> {
    if leaf_counts.is_empty() {
        return Vec::new();
    }
    let total = k_hat.saturating_sub(certified).max(leaf_counts.len());
    let leaves: usize = leaf_counts.iter().sum();
    let mut shares: Vec<usize> = leaf_counts.iter().map(|&l| total * l / leaves).collect();
    let assigned: usize = shares.iter().sum();

    let mut order: Vec<usize> = (0..leaf_counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = total * leaf_counts[a] % leaves;
        let rb = total * leaf_counts[b] % leaves;
        rb.cmp(&ra)
            .then(leaf_counts[b].cmp(&leaf_counts[a]))
            .then(a.cmp(&b))
    });
    for &j in order.iter().take(total - assigned) {
        shares[j] += 1;
    }
    shares
        .iter()
        .zip(leaf_counts)
        .map(|(&s, &l)| s.clamp(1, l))
        .collect()
}

/// The full occurrence matrix for `n <= 16` as CSV: one row per `k`, one
/// column per pattern bitstring in numeric order.
pub fn matrix_csv(n: usize) -> Result<String> {
    if n > 16 {
        return Err(Error::TooLargeForEnumeration(n));
    }
    let d = tree_depth(n)? as usize;
    let patterns = (0..1u64 << (d + 1))
        .map(|code| OutcomePattern::from_code(n, code))
        .collect::<Result<Vec<_>>>()?;
    let columns = patterns
        .iter()
        .map(|p| occurrence_column(n, p))
        .collect::<Result<Vec<_>>>()?;

    let mut out = String::from("k");
    for p in &patterns {
        out.push(',');
        out.push_str(&p.to_string());
    }
    out.push('\n');
    for k in 0..=n {
        out.push_str(&k.to_string());
        for col in &columns {
            out.push(',');
            out.push_str(&col[k].to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(n: usize, s: &str) -> OutcomePattern {
        OutcomePattern::parse(n, s).unwrap()
    }

    #[test]
    fn base_case() {
        assert_eq!(occurrence_count(8, 0, &pat(8, "0000")).unwrap(), BigUint::one());
        for k in 1..=8 {
            assert!(occurrence_count(8, k, &pat(8, "0000")).unwrap().is_zero());
        }
    }

    #[test]
    fn hand_checked_counts() {
        // one infected in {1..4} and one in {5,6}
        assert_eq!(occurrence_count(8, 2, &pat(8, "1100")).unwrap(), BigUint::from(8u32));
        assert_eq!(brute_force_occurrence(8, 2, &pat(8, "1100")).unwrap(), 8);
        // C(4,1) * M[1, 0100]
        let inner = occurrence_count(8, 1, &pat(8, "0100")).unwrap();
        assert_eq!(inner, BigUint::from(2u32));
        assert_eq!(occurrence_count(8, 1, &pat(8, "0010")).unwrap(), BigUint::one());
        assert_eq!(brute_force_occurrence(8, 1, &pat(8, "0010")).unwrap(), 1);
    }

    #[test]
    fn brute_force_row_sum() {
        let total: u64 = (0..16)
            .map(|c| brute_force_occurrence(8, 3, &OutcomePattern::from_code(8, c).unwrap()).unwrap())
            .sum();
        assert_eq!(total, 56);
    }

    #[test]
    fn brute_force_limits() {
        assert!(matches!(
            brute_force_occurrence(32, 1, &OutcomePattern::from_code(32, 0).unwrap()),
            Err(Error::TooLargeForEnumeration(32))
        ));
        assert!(OutcomePattern::parse(8, "101").is_err());
        assert!(OutcomePattern::parse(8, "10x1").is_err());
        assert!(OutcomePattern::from_code(8, 16).is_err());
    }

    #[test]
    fn likelihood_examples() {
        let zero = likelihood_column(8, &pat(8, "0000")).unwrap();
        assert_eq!(zero.likelihoods()[0], 1.0);
        assert!(zero.likelihoods()[1..].iter().all(|&l| l == 0.0));
        assert_eq!(estimate_k(&zero).unwrap(), 0);

        let seven = likelihood_column(8, &pat(8, "0010")).unwrap();
        for (k, &l) in seven.likelihoods().iter().enumerate() {
            if k == 1 {
                assert!((l - 0.125).abs() < 1e-15);
            } else {
                assert_eq!(l, 0.0);
            }
        }
        assert_eq!(estimate_k(&seven).unwrap(), 1);

        let ones = likelihood_column(8, &pat(8, "1111")).unwrap();
        assert_eq!(ones.likelihoods()[8], 1.0);
        assert_eq!(estimate_k(&ones).unwrap(), 8);
        assert_eq!(cached_estimate(8, &pat(8, "1111")).unwrap(), 8);
    }

    #[test]
    fn argmax_ties_go_low() {
        let column = LikelihoodColumn {
            counts: vec![BigUint::zero(), BigUint::from(2u32), BigUint::one()],
            totals: vec![BigUint::one(), BigUint::from(2u32), BigUint::one()],
            likelihoods: vec![0.0, 1.0, 1.0],
        };
        assert_eq!(estimate_k(&column).unwrap(), 1);
        let empty = LikelihoodColumn {
            counts: vec![BigUint::zero(); 3],
            totals: vec![BigUint::one(); 3],
            likelihoods: vec![0.0; 3],
        };
        assert!(matches!(estimate_k(&empty), Err(Error::InconsistentPattern)));
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(allocate_estimate(8, 2, &[4, 2]), vec![4, 2]);
        assert_eq!(allocate_estimate(1, 0, &[4, 2]), vec![1, 1]);
        assert_eq!(allocate_estimate(5, 0, &[4]), vec![4]);
        assert!(allocate_estimate(3, 0, &[]).is_empty());
        // residual 3 over (4, 4, 2): quotas 1.2, 1.2, 0.6 -> the 0.6 remainder wins
        assert_eq!(allocate_estimate(3, 0, &[4, 4, 2]), vec![1, 1, 1]);
        // residual 4 over (4, 4): exact
        assert_eq!(allocate_estimate(6, 2, &[4, 4]), vec![2, 2]);
        // residual 3 over (4, 4): tie on remainder and size -> earlier subtree
        assert_eq!(allocate_estimate(3, 0, &[4, 4]), vec![2, 1]);
    }

    #[test]
    fn matrix_dump_shape() {
        let csv = matrix_csv(4).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "k,000,001,010,011,100,101,110,111");
        assert_eq!(lines[1], "0,1,0,0,0,0,0,0,0");
        assert!(matrix_csv(32).is_err());
    }
}
