//! Exact binomial coefficients and helpers for taking logs and ratios of
//! big integers without overflowing `f64`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `[C(n, 0), C(n, 1), ..., C(n, n)]`.
pub fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for i in 0..n {
        c = c * (n - i) / (i + 1);
        row.push(c.clone());
    }
    row
}

/// `log2(x)` for a positive big integer; `-inf` for zero.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (x.to_u64().unwrap_or(u64::MAX) as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top.log2() + shift as f64
}

/// `num / den` as `f64`, accurate for operands far beyond `f64` range.
pub fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    (log2_big(num) - log2_big(den)).exp2()
}

/// Smallest integer `t` with `2^t >= x`, for `x >= 1`.
pub fn ceil_log2_big(x: &BigUint) -> u64 {
    if x.is_zero() || x.is_one() {
        return 0;
    }
    (x - 1u32).bits()
}

/// `log2 C(n, k)` evaluated in floating point as a sum of log ratios.
pub fn log2_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64 / (i + 1) as f64).log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(8, 2), BigUint::from(28u32));
        assert_eq!(binomial(8, 9), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        let row = binomial_row(16);
        for (k, c) in row.iter().enumerate() {
            assert_eq!(*c, binomial(16, k));
        }
    }

    #[test]
    fn huge_binomial_logs() {
        let c = binomial(1024, 512);
        let exact = log2_big(&c);
        let summed = log2_binomial(1024, 512);
        assert!((exact - summed).abs() < 1e-9, "{exact} vs {summed}");
        assert!((ratio(&c, &c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ceil_log2() {
        assert_eq!(ceil_log2_big(&BigUint::from(1u32)), 0);
        assert_eq!(ceil_log2_big(&BigUint::from(8u32)), 3);
        assert_eq!(ceil_log2_big(&BigUint::from(9u32)), 4);
        assert_eq!(ceil_log2_big(&binomial(16, 2)), 7);
    }
}
