//! Scalar special functions and one-dimensional solvers.
//!
//! Every entropy is in bits. `0 * log2(0)` is taken as zero by an explicit
//! branch rather than by trusting floating-point limits.

use crate::{Error, Result, Scalar};

/// Number of grid points used to seed golden-section searches.
pub const DEFAULT_GRID_POINTS: usize = 64;

/// `x * log2(x)` with the `0 * log2(0) = 0` convention.
#[inline]
pub fn xlog2x<S: Scalar>(x: S) -> S {
    if x <= S::zero() {
        S::zero()
    } else {
        x * x.log2()
    }
}

fn check_probability<S: Scalar>(name: &'static str, q: S, upper: S, domain: &'static str) -> Result<()> {
    if q.is_nan() || q < S::zero() || q > upper {
        return Err(Error::domain(name, q.as_f64(), domain));
    }
    Ok(())
}

/// Shannon entropy of a Bernoulli(q) variable, in bits.
pub fn binary_entropy<S: Scalar>(q: S) -> Result<S> {
    check_probability("q", q, S::one(), "[0, 1]")?;
    Ok(-xlog2x(q) - xlog2x(S::one() - q))
}

/// Eve's entropy term for the six-state protocol,
/// `-(1 - 3q/2) log2(1 - 3q/2) - (3q/2) log2(q/2)`.
pub fn six_state_f<S: Scalar>(q: S) -> Result<S> {
    let two_thirds = S::lit(2.0) / S::lit(3.0);
    check_probability("q", q, two_thirds, "[0, 2/3]")?;
    let bulk = (S::one() - S::lit(1.5) * q).max(S::zero());
    let half = q / S::lit(2.0);
    Ok(-xlog2x(bulk) - S::lit(3.0) * xlog2x(half))
}

/// Bosonic entropy `G(x) = (x+1) log2(x+1) - x log2(x)` of a thermal state
/// with mean photon number `x`.
pub fn bosonic_g<S: Scalar>(x: S) -> Result<S> {
    if x.is_nan() || x < S::zero() {
        return Err(Error::domain("x", x.as_f64(), "[0, inf)"));
    }
    if x == S::zero() {
        return Ok(S::zero());
    }
    let upper = (x + S::one()) * x.ln_1p() / S::LN_2();
    Ok(upper - xlog2x(x))
}

/// Lower real branch `W_{-1}` of the Lambert W function.
///
/// Returns `w <= -1` with `w * exp(w) = x` for `-1/e <= x < 0`. Seeded from
/// the branch-point series near `-1/e` and from the logarithmic asymptote
/// elsewhere, then polished with Halley steps.
pub fn lambert_w_minus1<S: Scalar>(x: S) -> Result<S> {
    let one = S::one();
    let branch = -S::E().recip();
    if x.is_nan() || x >= S::zero() || x < branch - S::epsilon() * S::lit(4.0) * branch.abs() {
        return Err(Error::domain("x", x.as_f64(), "[-1/e, 0)"));
    }
    // distance from the branch point, scaled so that 1 + e*x is in [0, 1)
    let eta = (one + S::E() * x).max(S::zero());
    if eta == S::zero() {
        return Ok(-one);
    }

    let mut w = if eta < S::lit(0.25) {
        let p = -(S::lit(2.0) * eta).sqrt();
        -one + p - p * p / S::lit(3.0) + S::lit(11.0 / 72.0) * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + one;
        if wp1 == S::zero() {
            break;
        }
        let denom = ew * wp1 - (w + S::lit(2.0)) * f / (S::lit(2.0) * wp1);
        if denom == S::zero() || !denom.is_finite() {
            break;
        }
        let next = (w - f / denom).min(-one);
        let step = (next - w).abs();
        w = next;
        if step <= S::epsilon() * S::lit(4.0) * w.abs() {
            break;
        }
    }
    Ok(w)
}

/// Real function of one real argument together with a bracket it is
/// evaluated on. The function must be total on `[lower, upper]`.
pub struct BracketedFunction<S, F> {
    f: F,
    lower: S,
    upper: S,
}

impl<S: Scalar, F: Fn(S) -> S> BracketedFunction<S, F> {
    pub fn new(f: F, lower: S, upper: S) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidBracket {
                lower: lower.as_f64(),
                upper: upper.as_f64(),
            });
        }
        Ok(Self { f, lower, upper })
    }

    #[inline]
    pub fn eval(&self, x: S) -> S {
        (self.f)(x)
    }

    pub fn lower(&self) -> S {
        self.lower
    }

    pub fn upper(&self) -> S {
        self.upper
    }
}

/// Termination rule shared by the bisection and golden-section solvers.
///
/// A bracket of width `w` around `x` is accepted once
/// `w <= tolerance + relative_tolerance * |x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S> {
    pub tolerance: S,
    pub relative_tolerance: S,
    pub max_iterations: usize,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        Self {
            tolerance: S::lit(1e-12),
            relative_tolerance: S::zero(),
            max_iterations: 200,
        }
    }
}

impl<S: Scalar> SolverConfig<S> {
    /// Default configuration for maximizations (argument tolerance 1e-10).
    pub fn optimization() -> Self {
        Self {
            tolerance: S::lit(1e-10),
            ..Self::default()
        }
    }

    /// Relative-tolerance configuration used by threshold solvers.
    pub fn relative(relative_tolerance: S) -> Self {
        Self {
            tolerance: S::zero(),
            relative_tolerance,
            max_iterations: 400,
        }
    }

    /// Same configuration with both tolerances halved.
    pub fn halved(self) -> Self {
        let half = S::lit(0.5);
        Self {
            tolerance: self.tolerance * half,
            relative_tolerance: self.relative_tolerance * half,
            max_iterations: self.max_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tol_ok = self.tolerance >= S::zero() && self.relative_tolerance >= S::zero();
        if !tol_ok || self.tolerance + self.relative_tolerance <= S::zero() {
            return Err(Error::InvalidConfig("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(())
    }

    #[inline]
    fn converged(&self, lower: S, upper: S) -> bool {
        let mid = (lower + upper) / S::lit(2.0);
        upper - lower <= self.tolerance + self.relative_tolerance * mid.abs()
    }
}

/// Bisection root finder. Requires `f(lower) * f(upper) <= 0`.
pub fn find_root<S: Scalar, F: Fn(S) -> S>(
    f: &BracketedFunction<S, F>,
    cfg: &SolverConfig<S>,
) -> Result<S> {
    cfg.validate()?;
    let (mut lo, mut hi) = (f.lower, f.upper);
    let f_lo = f.eval(lo);
    let f_hi = f.eval(hi);
    if f_lo == S::zero() {
        return Ok(lo);
    }
    if f_hi == S::zero() {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.is_sign_positive() == f_hi.is_sign_positive() {
        return Err(Error::NoSignChange {
            lower: lo.as_f64(),
            upper: hi.as_f64(),
        });
    }
    let lo_positive = f_lo.is_sign_positive();
    for _ in 0..cfg.max_iterations {
        let mid = (lo + hi) / S::lit(2.0);
        if cfg.converged(lo, hi) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f.eval(mid);
        if f_mid == S::zero() {
            return Ok(mid);
        }
        if f_mid.is_sign_positive() == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if cfg.converged(lo, hi) {
        return Ok((lo + hi) / S::lit(2.0));
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
    })
}

/// Bisection on a predicate that flips exactly once on `[lower, upper]`.
///
/// Returns the midpoint of the final bracket around the flip. Unlike
/// [`find_root`] this locates the edge of a region where a clamped
/// quantity (such as a key rate `max[0, ...]`) stops being positive.
pub fn find_transition<S: Scalar, P: Fn(S) -> bool>(
    predicate: P,
    lower: S,
    upper: S,
    cfg: &SolverConfig<S>,
) -> Result<S> {
    cfg.validate()?;
    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
        return Err(Error::InvalidBracket {
            lower: lower.as_f64(),
            upper: upper.as_f64(),
        });
    }
    let lo_value = predicate(lower);
    if lo_value == predicate(upper) {
        return Err(Error::NoSignChange {
            lower: lower.as_f64(),
            upper: upper.as_f64(),
        });
    }
    let (mut lo, mut hi) = (lower, upper);
    for _ in 0..cfg.max_iterations {
        let mid = (lo + hi) / S::lit(2.0);
        if cfg.converged(lo, hi) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if predicate(mid) == lo_value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if cfg.converged(lo, hi) {
        return Ok((lo + hi) / S::lit(2.0));
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
    })
}

/// Grid-seeded golden-section maximization with the default 64-point seed.
pub fn maximize_scalar<S: Scalar, F: Fn(S) -> S>(
    f: &BracketedFunction<S, F>,
    cfg: &SolverConfig<S>,
) -> Result<(S, S)> {
    maximize_scalar_with_grid(f, cfg, DEFAULT_GRID_POINTS)
}

/// Scans `grid_points` equally spaced points, then refines each grid-local
/// maximum by golden-section search and keeps the best. Peaks narrower than
/// the grid spacing can still be missed.
pub fn maximize_scalar_with_grid<S: Scalar, F: Fn(S) -> S>(
    f: &BracketedFunction<S, F>,
    cfg: &SolverConfig<S>,
    grid_points: usize,
) -> Result<(S, S)> {
    cfg.validate()?;
    let n = grid_points.max(3);
    let (lower, upper) = (f.lower, f.upper);
    let step = (upper - lower) / S::from_usize(n - 1).expect("grid size fits");
    let node = |i: usize| {
        if i == n - 1 {
            upper
        } else {
            lower + step * S::from_usize(i).expect("grid index fits")
        }
    };

    let values: Vec<(S, S)> = (0..n)
        .map(|i| {
            let x = node(i);
            (x, f.eval(x))
        })
        .collect();
    let mut best = values[0];
    for &(x, y) in &values[1..] {
        if y > best.1 || best.1.is_nan() {
            best = (x, y);
        }
    }

    for i in 0..n {
        let y = values[i].1;
        let left_ok = i == 0 || y >= values[i - 1].1;
        let right_ok = i == n - 1 || y >= values[i + 1].1;
        if !(left_ok && right_ok) {
            continue;
        }
        let a = values[i.saturating_sub(1)].0;
        let b = values[(i + 1).min(n - 1)].0;
        let refined = golden_section(f, a, b, cfg)?;
        if refined.1 > best.1 {
            best = refined;
        }
    }
    Ok(best)
}

fn golden_section<S: Scalar, F: Fn(S) -> S>(
    f: &BracketedFunction<S, F>,
    mut a: S,
    mut b: S,
    cfg: &SolverConfig<S>,
) -> Result<(S, S)> {
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) / S::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f.eval(c);
    let mut fd = f.eval(d);
    let mut iterations = 0;
    while !cfg.converged(a, b) {
        if iterations == cfg.max_iterations {
            return Err(Error::NotConverged {
                iterations: cfg.max_iterations,
            });
        }
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f.eval(d);
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// `n` logarithmically spaced points from `start` to `stop` inclusive.
pub fn log_space<S: Scalar>(start: S, stop: S, n: usize) -> Result<Vec<S>> {
    if !(start > S::zero() && stop > start) || n < 2 {
        return Err(Error::InvalidBracket {
            lower: start.as_f64(),
            upper: stop.as_f64(),
        });
    }
    let (a, b) = (start.ln(), stop.ln());
    let last = S::from_usize(n - 1).expect("grid size fits");
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                start
            } else if i == n - 1 {
                stop
            } else {
                (a + (b - a) * S::from_usize(i).expect("grid index fits") / last).exp()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(close(binary_entropy(0.5).unwrap(), 1.0, 1e-15));
        // -0.11 log2 0.11 - 0.89 log2 0.89
        assert!(close(binary_entropy(0.11).unwrap(), 0.499915958164528, 1e-12));
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn six_state_f_values() {
        assert_eq!(six_state_f(0.0).unwrap(), 0.0);
        let f = six_state_f(0.126).unwrap();
        assert!(close(f, 0.998933, 1e-6), "{f}");
        let end = six_state_f(2.0 / 3.0).unwrap();
        assert!(close(end, 3f64.log2(), 1e-12), "{end}");
        assert!(six_state_f(0.7).is_err());
        assert!(six_state_f(-1e-9).is_err());
    }

    #[test]
    fn bosonic_g_values() {
        assert_eq!(bosonic_g(0.0).unwrap(), 0.0);
        assert!(close(bosonic_g(1.0).unwrap(), 2.0, 1e-14));
        // 1.25 log2 1.25 - 0.25 log2 0.25
        assert!(close(bosonic_g(0.25).unwrap(), 0.902410118609203, 1e-12));
        assert!(bosonic_g(-1e-3).is_err());
    }

    fn lambert_bisection_oracle(x: f64) -> f64 {
        // w e^w decreases from 0 to -1/e on (-inf, -1]
        let (mut lo, mut hi) = (-800.0_f64, -1.0_f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambert_w_branch_point_and_values() {
        let branch = -(-1.0f64).exp();
        assert_eq!(lambert_w_minus1(branch).unwrap(), -1.0);

        let w = lambert_w_minus1(-0.1).unwrap();
        assert!(close(w, -3.577152063957297, 1e-12), "{w}");
        assert!(close(w, lambert_bisection_oracle(-0.1), 1e-10));

        let x = -1e-3 / std::f64::consts::E;
        let w = lambert_w_minus1(x).unwrap();
        assert!(close(w, lambert_bisection_oracle(x), 1e-9));
        let mu = (1.0 + w).exp();
        assert!((mu - 9.77e-5).abs() < 0.02e-5, "{mu}");
    }

    #[test]
    fn lambert_w_domain() {
        assert!(lambert_w_minus1(0.0).is_err());
        assert!(lambert_w_minus1(0.1).is_err());
        assert!(lambert_w_minus1(-0.5).is_err());
    }

    #[test]
    fn lambert_w_round_trip_on_log_grid() {
        let branch = -(-1.0f64).exp();
        let grid = log_space(1e-12, -branch * (1.0 - 1e-12), 400).unwrap();
        for g in grid {
            let x = -g;
            let w = lambert_w_minus1(x).unwrap();
            assert!(w <= -1.0);
            let rel = ((w * w.exp() - x) / x).abs();
            assert!(rel <= 1e-12, "x={x} w={w} rel={rel}");
        }
    }

    #[test]
    fn find_root_examples() {
        let cfg = SolverConfig::default();
        let f = BracketedFunction::new(|x: f64| x - 0.5, 0.0, 1.0).unwrap();
        assert!(close(find_root(&f, &cfg).unwrap(), 0.5, 1e-12));

        let bb84 = BracketedFunction::new(|q: f64| 1.0 - 2.0 * binary_entropy(q).unwrap(), 1e-6, 0.5 - 1e-6)
            .unwrap();
        let q = find_root(&bb84, &cfg).unwrap();
        assert!(close(q, 0.1100, 5e-5), "{q}");

        let six = BracketedFunction::new(|q: f64| 1.0 - six_state_f(q).unwrap(), 1e-6, 0.5).unwrap();
        let q = find_root(&six, &cfg).unwrap();
        assert!(close(q, 0.1262, 5e-5), "{q}");
    }

    #[test]
    fn find_root_errors() {
        let cfg = SolverConfig::default();
        let f = BracketedFunction::new(|x: f64| x * x + 1.0, -1.0, 1.0).unwrap();
        assert!(matches!(find_root(&f, &cfg), Err(Error::NoSignChange { .. })));

        let tight = SolverConfig {
            tolerance: 1e-15,
            relative_tolerance: 0.0,
            max_iterations: 3,
        };
        let g = BracketedFunction::new(|x: f64| x - 0.3, 0.0, 1.0).unwrap();
        assert!(matches!(find_root(&g, &tight), Err(Error::NotConverged { iterations: 3 })));

        assert!(BracketedFunction::new(|x: f64| x, 1.0, 1.0).is_err());
        let bad = SolverConfig {
            tolerance: 0.0,
            relative_tolerance: 0.0,
            max_iterations: 10,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn find_transition_locates_edge_of_clamped_function() {
        let cfg = SolverConfig::default();
        let clamped = |x: f64| (0.3 - x).max(0.0);
        let edge = find_transition(|x| clamped(x) > 0.0, 0.0, 1.0, &cfg).unwrap();
        assert!(close(edge, 0.3, 1e-12));
        assert!(find_transition(|_x: f64| true, 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn maximize_examples() {
        let cfg = SolverConfig::optimization();
        let f = BracketedFunction::new(|x: f64| -(x - 0.3) * (x - 0.3), 0.0, 1.0).unwrap();
        let (x, y) = maximize_scalar(&f, &cfg).unwrap();
        assert!(close(x, 0.3, 1e-8));
        assert!(close(y, 0.0, 1e-15));

        let mono = BracketedFunction::new(|x: f64| x, 0.0, 1.0).unwrap();
        let (x, y) = maximize_scalar(&mono, &cfg).unwrap();
        assert_eq!((x, y), (1.0, 1.0));
        let dec = BracketedFunction::new(|x: f64| -x, 0.0, 1.0).unwrap();
        assert_eq!(maximize_scalar(&dec, &cfg).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn works_in_single_precision() {
        let h = binary_entropy(0.5f32).unwrap();
        assert!((h - 1.0).abs() < 1e-6);
        let w = lambert_w_minus1(-0.1f32).unwrap();
        assert!((w + 3.577_152).abs() < 1e-4);
    }

    #[test]
    fn g_is_increasing_and_concave() {
        let h = 1e-3;
        let mut x = 0.0;
        while x < 20.0 {
            let (a, b, c) = (
                bosonic_g(x).unwrap(),
                bosonic_g(x + h).unwrap(),
                bosonic_g(x + 2.0 * h).unwrap(),
            );
            assert!(b > a);
            assert!(c - 2.0 * b + a <= 1e-12, "not concave at {x}");
            x += 0.037;
        }
    }

    proptest! {
        #[test]
        fn binary_entropy_is_symmetric(q in 0.0f64..=1.0) {
            let a = binary_entropy(q).unwrap();
            let b = binary_entropy(1.0 - q).unwrap();
            prop_assert!((a - b).abs() <= 1e-14);
        }

        #[test]
        fn find_root_recovers_polynomial_root(root in -5.0f64..5.0, scale in 0.1f64..10.0) {
            // cubic with a single real root at `root`
            let f = BracketedFunction::new(
                move |x: f64| scale * (x - root) * ((x - root) * (x - root) + 1.0),
                -10.0,
                10.0,
            ).unwrap();
            let x = find_root(&f, &SolverConfig::default()).unwrap();
            prop_assert!((x - root).abs() <= 1e-11);
        }

        #[test]
        fn grid_seeded_max_matches_dense_grid(
            a in proptest::collection::vec(-1.0f64..1.0, 3),
            freq in proptest::collection::vec(0.2f64..4.0, 3),
            phase in proptest::collection::vec(0.0f64..6.3, 3),
        ) {
            let f = move |x: f64| {
                (0..3).map(|i| a[i] * (std::f64::consts::TAU * freq[i] * x + phase[i]).sin()).sum::<f64>()
            };
            let g = BracketedFunction::new(&f, 0.0, 1.0).unwrap();
            let (_, best) = maximize_scalar(&g, &SolverConfig::optimization()).unwrap();
            let dense = (0..=10_000).map(|i| f(i as f64 / 10_000.0)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(best >= dense - 1e-9, "best {} dense {}", best, dense);
        }
    }
}
