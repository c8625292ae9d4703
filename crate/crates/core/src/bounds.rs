//! Closed-form VC-dimension quantities and hidden-width bounds.
//!
//! For a network with `n` inputs and `m` hidden sigmoid units the parameter
//! count is `W_T = nm + 2m + 1` and the unit count `C_p = m + 1`. Combining
//! the literature lower and upper VC bounds with a sample count `r` yields a
//! lower width `l_m` (root of a pair of quadratics) and an upper width
//! `L_m = min(k1, k2)` where
//!
//! ```text
//! k1 = 16 r / (n (n - 8)) - 1      (sample-driven)
//! k2 = 2^(n/2 - 2) - 1             (dimension-driven)
//! ```
//!
//! Everything here is a pure function of its arguments.

use serde::Serialize;

use crate::{Error, Result};

/// Offset above 1 used when picking `gamma`; any admissible value must be
/// strictly greater than both `beta` and 1.
pub const GAMMA_MARGIN: f64 = 1e-9;

/// Coefficient of `Q(m)^2` in the relaxed sample-count inequality
/// (`1 + 11 * 18`).
const QUAD_COEFF: f64 = 199.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetworkShape {
    pub n: usize,
    pub m: usize,
}

impl NetworkShape {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Domain(format!(
                "network shape needs n >= 1 and m >= 1 (got n={n}, m={m})"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn counts(&self) -> CapacityCounts {
        CapacityCounts {
            w_total: total_weights(*self),
            c_units: computational_units(*self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityCounts {
    /// Weights plus thresholds.
    pub w_total: u64,
    /// Hidden units plus the output unit.
    pub c_units: u64,
}

/// The computed width bracket for a given `(n, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthBounds {
    pub n: usize,
    pub r: u64,
    pub beta: f64,
    pub gamma: f64,
    /// Real-valued lower width bound.
    pub l_m: f64,
    pub k1: f64,
    pub k2: f64,
    /// Real-valued upper width bound, `min(k1, k2)`.
    pub upper: f64,
    /// Smallest usable integer width.
    pub lo: i64,
    /// Largest usable integer width; below `lo` when the bracket is empty.
    pub hi: i64,
    /// `(lower, upper)` VC bounds at some width, when attached.
    pub vc_bracket: Option<(f64, f64)>,
}

impl WidthBounds {
    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    /// Integer widths inside the bracket, or `None` for an empty bracket.
    pub fn widths(&self) -> Option<std::ops::RangeInclusive<usize>> {
        if self.is_empty() {
            None
        } else {
            Some(self.lo as usize..=self.hi as usize)
        }
    }

    pub fn contains(&self, width: usize) -> bool {
        !self.is_empty() && (self.lo..=self.hi).contains(&(width as i64))
    }

    /// Attach the VC bracket evaluated at hidden width `m`.
    pub fn with_vc_bracket(mut self, m: usize) -> Result<Self> {
        self.vc_bracket = Some(vc_bracket(NetworkShape::new(self.n, m)?));
        Ok(self)
    }

    /// Compact range notation: `[lo,hi]`, a single width when `lo == hi`,
    /// `0` when empty.
    pub fn range_label(&self) -> String {
        range_label(self.lo, self.hi)
    }
}

pub(crate) fn range_label(lo: i64, hi: i64) -> String {
    if hi < lo {
        "0".to_string()
    } else if hi == lo {
        lo.to_string()
    } else {
        format!("[{lo},{hi}]")
    }
}

pub fn total_weights(shape: NetworkShape) -> u64 {
    let (n, m) = (shape.n as u64, shape.m as u64);
    n * m + 2 * m + 1
}

pub fn computational_units(shape: NetworkShape) -> u64 {
    shape.m as u64 + 1
}

/// `Q(m) = (n+2) m^2 + (n+3) m + 1`, which equals `W_T * C_p` at integer `m`.
pub fn q_poly(n: usize, m: f64) -> f64 {
    let n = n as f64;
    (n + 2.0) * m * m + (n + 3.0) * m + 1.0
}

/// Lower VC bound `(n C_p / 8) log2(C_p / 4)`. Non-positive for `C_p <= 4`.
pub fn vc_lower_bound(shape: NetworkShape) -> f64 {
    let c = computational_units(shape) as f64;
    shape.n as f64 * c / 8.0 * (c / 4.0).log2()
}

/// Upper VC bound `(W_T C_p)^2 + 11 W_T C_p log2(18 W_T C_p^2)`.
pub fn vc_upper_bound(shape: NetworkShape) -> f64 {
    let w = total_weights(shape) as f64;
    let c = computational_units(shape) as f64;
    let wc = w * c;
    wc * wc + 11.0 * wc * (18.0 * w * c * c).log2()
}

pub fn vc_bracket(shape: NetworkShape) -> (f64, f64) {
    (vc_lower_bound(shape), vc_upper_bound(shape))
}

fn check_lower_domain(n: usize, r: u64) -> Result<()> {
    if n <= 4 {
        return Err(Error::Domain(format!("lower bound requires n > 4 (got n={n})")));
    }
    if r == 0 {
        return Err(Error::Domain("lower bound requires r > 0".into()));
    }
    Ok(())
}

fn check_upper_domain(n: usize) -> Result<()> {
    if n <= 8 {
        return Err(Error::Domain(format!("upper bound requires n > 8 (got n={n})")));
    }
    Ok(())
}

/// Positive root of `199 Q^2 + 11 (n/2 - 2) Q - r = 0`.
pub fn beta_root(n: usize, r: u64) -> Result<f64> {
    check_lower_domain(n, r)?;
    let b = 11.0 * (n as f64 / 2.0 - 2.0);
    let r = r as f64;
    let disc = b * b + 4.0 * QUAD_COEFF * r;
    // (-b + sqrt(D)) / 2a rewritten as 2c / (b + sqrt(D)); b > 0 here so no cancellation.
    Ok(2.0 * r / (b + disc.sqrt()))
}

/// `gamma = max(beta, 1 + GAMMA_MARGIN)`.
pub fn choose_gamma(beta: f64) -> f64 {
    beta.max(1.0 + GAMMA_MARGIN)
}

/// Positive root `l_m` of `(n+2) m^2 + (n+3) m + 1 - gamma = 0`.
pub fn lower_width_bound(n: usize, r: u64) -> Result<f64> {
    let gamma = choose_gamma(beta_root(n, r)?);
    Ok(q_root(n, gamma))
}

fn q_root(n: usize, gamma: f64) -> f64 {
    let a = n as f64 + 2.0;
    let b = n as f64 + 3.0;
    let c = gamma - 1.0;
    let d = b * b + 4.0 * a * c;
    2.0 * c / (b + d.sqrt())
}

pub fn k1(n: usize, r: u64) -> Result<f64> {
    check_upper_domain(n)?;
    if r == 0 {
        return Err(Error::Domain("k1 requires r > 0".into()));
    }
    let nf = n as f64;
    Ok(16.0 * r as f64 / (nf * (nf - 8.0)) - 1.0)
}

pub fn k2(n: usize) -> Result<f64> {
    check_upper_domain(n)?;
    Ok(2f64.powf(n as f64 / 2.0 - 2.0) - 1.0)
}

pub fn upper_width_bound(n: usize, r: u64) -> Result<f64> {
    Ok(k1(n, r)?.min(k2(n)?))
}

/// Full bracket for `(n, r)`. An empty bracket (`hi < lo`) is reported
/// through [`WidthBounds::is_empty`], not as an error.
pub fn width_range(n: usize, r: u64) -> Result<WidthBounds> {
    let k1 = k1(n, r)?;
    let k2 = k2(n)?;
    let beta = beta_root(n, r)?;
    let gamma = choose_gamma(beta);
    let l_m = q_root(n, gamma);
    let upper = k1.min(k2);
    let lo = (l_m.ceil() as i64).max(1);
    let hi = upper.floor() as i64;
    Ok(WidthBounds {
        n,
        r,
        beta,
        gamma,
        l_m,
        k1,
        k2,
        upper,
        lo,
        hi,
        vc_bracket: None,
    })
}

/// Largest `N > 8` such that `n 2^(n/2-2) (n/2 - 4) <= 8r` holds for every
/// `8 < n <= N`, i.e. the last attribute count at which `k2 <= k1`.
/// Returns `None` when the inequality already fails at `n = 9`.
pub fn crossover_attribute_size(r: u64) -> Result<Option<usize>> {
    if r == 0 {
        return Err(Error::Domain("crossover requires r > 0".into()));
    }
    let rhs = 8.0 * r as f64;
    let mut last = None;
    // the left side grows without bound, so the scan always terminates
    for n in 9usize.. {
        let nf = n as f64;
        let lhs = nf * 2f64.powf(nf / 2.0 - 2.0) * (nf / 2.0 - 4.0);
        if lhs <= rhs {
            last = Some(n);
        } else {
            break;
        }
    }
    Ok(last)
}

/// Sample count `r* = 2^(n/2-6) n (n-8)` at which `k1 == k2`.
pub fn lub_sample_size(n: usize) -> Result<f64> {
    check_upper_domain(n)?;
    let nf = n as f64;
    Ok(2f64.powf(nf / 2.0 - 6.0) * nf * (nf - 8.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub n: usize,
    pub k1: f64,
    pub k2: f64,
    pub upper: f64,
    pub lo: i64,
    pub hi: i64,
}

impl BoundsRow {
    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn range_label(&self) -> String {
        range_label(self.lo, self.hi)
    }
}

pub fn bounds_table(r: u64, n_from: usize, n_to: usize) -> Result<Vec<BoundsRow>> {
    check_upper_domain(n_from)?;
    if n_to < n_from {
        return Err(Error::Domain(format!(
            "empty attribute range {n_from}..={n_to}"
        )));
    }
    (n_from..=n_to)
        .map(|n| {
            let b = width_range(n, r)?;
            Ok(BoundsRow {
                n,
                k1: b.k1,
                k2: b.k2,
                upper: b.upper,
                lo: b.lo,
                hi: b.hi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn shape(n: usize, m: usize) -> NetworkShape {
        NetworkShape::new(n, m).unwrap()
    }

    /// Plain bisection on a sign change, independent of the closed forms above.
    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        assert!(f(a) * f(b) <= 0.0);
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if f(a) * f(c) <= 0.0 {
                b = c;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn weight_and_unit_counts() {
        assert_eq!(total_weights(shape(9, 4)), 45);
        assert_eq!(total_weights(shape(1, 1)), 4);
        assert_eq!(total_weights(shape(21, 1)), 24);
        assert_eq!(computational_units(shape(9, 4)), 5);
        assert_eq!(computational_units(shape(3, 1)), 2);
        assert_eq!(computational_units(shape(3, 31)), 32);
        assert!(NetworkShape::new(0, 3).is_err());
        assert!(NetworkShape::new(3, 0).is_err());
    }

    #[test]
    fn q_poly_values() {
        assert_eq!(q_poly(9, 0.0), 1.0);
        assert_eq!(q_poly(9, 1.0), 24.0);
        assert_eq!(q_poly(14, 2.0), 99.0);
        // Q(m) = W_T * C_p at integer widths
        for n in 1..20 {
            for m in 1..20 {
                let s = shape(n, m);
                assert_eq!(
                    q_poly(n, m as f64),
                    (total_weights(s) * computational_units(s)) as f64
                );
            }
        }
    }

    #[test]
    fn vc_lower_values() {
        assert_relative_eq!(vc_lower_bound(shape(8, 7)), 8.0);
        assert_eq!(vc_lower_bound(shape(8, 3)), 0.0);
        assert_relative_eq!(vc_lower_bound(shape(16, 15)), 64.0);
    }

    #[test]
    fn vc_upper_values() {
        // W_T=4, C_p=2: 64 + 88 log2(288)
        assert_relative_eq!(vc_upper_bound(shape(1, 1)), 782.953_400_126_9, epsilon = 1e-6);
        // W_T=12, C_p=2: 576 + 264 log2(864)
        assert_relative_eq!(vc_upper_bound(shape(9, 1)), 3_151.290_300_571_1, epsilon = 1e-6);
        assert!(vc_upper_bound(shape(9, 2)) > vc_upper_bound(shape(9, 1)));
    }

    #[test]
    fn vc_bracket_is_ordered() {
        let (lo, hi) = vc_bracket(shape(16, 15));
        assert_relative_eq!(lo, 64.0);
        assert!(lo < hi);
        let (lo, hi) = vc_bracket(shape(8, 3));
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
        for n in 1..=64 {
            for m in 1..=64 {
                let (lo, hi) = vc_bracket(shape(n, m));
                assert!(lo <= hi, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn beta_matches_bisection() {
        for &(n, r) in &[(14usize, 214u64), (22, 7200), (9, 214), (13, 178), (45, 7200), (5, 1)] {
            let c = 11.0 * (n as f64 / 2.0 - 2.0);
            let rr = r as f64;
            let oracle = bisect(|q| 199.0 * q * q + c * q - rr, 0.0, 1e3);
            let beta = beta_root(n, r).unwrap();
            assert_relative_eq!(beta, oracle, max_relative = 1e-9);
            assert!(beta > 0.0);
            assert!((199.0 * beta * beta + c * beta - rr).abs() < 1e-6 * rr);
        }
        assert_relative_eq!(beta_root(14, 214).unwrap(), 0.907_979_979_8, epsilon = 1e-9);
        assert_relative_eq!(beta_root(22, 7200).unwrap(), 5.771_453_783_2, epsilon = 1e-9);
    }

    #[test]
    fn beta_domain_errors() {
        assert!(matches!(beta_root(4, 100), Err(Error::Domain(_))));
        assert!(matches!(beta_root(10, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn lower_width_bound_is_the_q_root() {
        for &(n, r) in &[(14usize, 214u64), (22, 7200), (21, 7200), (45, 7200), (6, 1_000_000)] {
            let gamma = choose_gamma(beta_root(n, r).unwrap());
            let oracle = bisect(|m| q_poly(n, m) - gamma, 0.0, 1e3);
            let l = lower_width_bound(n, r).unwrap();
            assert!(l >= 0.0);
            assert!((l - oracle).abs() < 1e-9 * oracle.max(1.0));
            assert!((q_poly(n, l) - gamma).abs() < 1e-6);
            assert!(gamma > 1.0 && gamma >= beta_root(n, r).unwrap());
        }
        // beta < 1, so gamma sits just above 1 and the root is ~0
        assert!(lower_width_bound(14, 214).unwrap() < 1e-6);
    }

    #[test]
    fn k_values() {
        assert_relative_eq!(k1(9, 214).unwrap(), 379.444_444_4, epsilon = 1e-6);
        assert_relative_eq!(k1(22, 7200).unwrap(), 373.025_974, epsilon = 1e-5);
        assert_relative_eq!(k1(15, 178).unwrap(), 26.123_809_5, epsilon = 1e-6);
        assert_relative_eq!(k2(9).unwrap(), 4.656_854_249, epsilon = 1e-8);
        assert_eq!(k2(12).unwrap(), 15.0);
        assert_eq!(k2(14).unwrap(), 31.0);
        assert!(k1(8, 10).is_err());
        assert!(k2(8).is_err());
    }

    #[test]
    fn upper_bound_picks_minimum() {
        assert_eq!(upper_width_bound(14, 214).unwrap(), 31.0);
        assert_relative_eq!(upper_width_bound(15, 214).unwrap(), 31.609_523_8, epsilon = 1e-6);
        assert_relative_eq!(upper_width_bound(23, 7200).unwrap(), 332.913_043, epsilon = 1e-5);
    }

    #[test]
    fn width_range_examples() {
        let b = width_range(14, 214).unwrap();
        assert_eq!((b.lo, b.hi), (1, 31));
        let b = width_range(45, 7200).unwrap();
        assert_eq!((b.lo, b.hi), (1, 68));
        let b = width_range(20, 178).unwrap();
        assert_eq!((b.lo, b.hi), (1, 10));
        let b = width_range(9, 214).unwrap();
        assert_eq!(b.hi, 4);
        assert!(width_range(8, 100).is_err());
    }

    #[test]
    fn empty_and_negative_brackets() {
        let b = width_range(42, 178).unwrap();
        assert_relative_eq!(b.k1, 0.994_397_8, epsilon = 1e-6);
        assert_eq!((b.lo, b.hi), (1, 0));
        assert!(b.is_empty());
        assert_eq!(b.widths(), None);
        assert_eq!(b.range_label(), "0");
        // k1 < 0 is reported, never clamped
        let b = width_range(63, 214).unwrap();
        assert!(b.k1 < 0.0 && b.upper == b.k1);
        assert!(b.is_empty());
    }

    #[test]
    fn range_labels() {
        assert_eq!(width_range(14, 214).unwrap().range_label(), "[1,31]");
        assert_eq!(width_range(36, 178).unwrap().range_label(), "1");
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(crossover_attribute_size(214).unwrap(), Some(14));
        assert_eq!(crossover_attribute_size(178).unwrap(), Some(14));
        assert_eq!(crossover_attribute_size(7200).unwrap(), Some(21));
        // at n = 9 the left side is 9 * 2^2.5 * 0.5 ~ 25.5, so r = 1 (8r = 8) has no crossover
        assert_eq!(crossover_attribute_size(1).unwrap(), None);
        assert!(crossover_attribute_size(0).is_err());
    }

    #[test]
    fn crossover_agrees_with_min() {
        for &r in &[50u64, 178, 214, 1000, 7200, 100_000] {
            let big_n = crossover_attribute_size(r).unwrap().unwrap();
            for n in 9..=70 {
                let (a, b) = (k1(n, r).unwrap(), k2(n).unwrap());
                let l = upper_width_bound(n, r).unwrap();
                if n <= big_n {
                    assert_eq!(l, b, "r={r} n={n}");
                } else if a > 0.0 {
                    assert_eq!(l, a, "r={r} n={n}");
                }
            }
        }
    }

    #[test]
    fn lub_sample_size_values() {
        assert_relative_eq!(lub_sample_size(10).unwrap(), 10.0);
        assert_relative_eq!(lub_sample_size(16).unwrap(), 512.0);
        for n in (10..=24).step_by(2) {
            let r = lub_sample_size(n).unwrap().round() as u64;
            let (a, b) = (k1(n, r).unwrap(), k2(n).unwrap());
            assert!((a - b).abs() / b < 0.02, "n={n}");
        }
    }

    #[test]
    fn bounds_table_rows() {
        let rows = bounds_table(214, 9, 13).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].n, 9);
        assert_relative_eq!(rows[1].k1, 170.2, epsilon = 1e-9);
        assert_eq!(rows[1].upper, 7.0);
        let rows = bounds_table(178, 42, 42).unwrap();
        assert!(rows[0].is_empty());
        assert_eq!((rows[0].lo, rows[0].hi), (1, 0));
        assert!(bounds_table(214, 8, 12).is_err());
        assert!(bounds_table(214, 12, 10).is_err());
    }

    #[test]
    fn monotonicity() {
        for n in 9..40 {
            for r in 1..300u64 {
                assert!(k1(n, r + 1).unwrap() > k1(n, r).unwrap());
                assert!(upper_width_bound(n, r + 1).unwrap() >= upper_width_bound(n, r).unwrap());
            }
            assert!(k2(n + 1).unwrap() > k2(n).unwrap());
        }
    }
}
