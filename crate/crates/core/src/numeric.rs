//! Quadrature and root finding.

use crate::error::{Error, Result};

/// Eight-point Gauss–Legendre nodes on `[-1, 1]`.
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Vector-valued variant, used for the profile position integrals.
pub fn gauss_legendre2<F: FnMut(f64) -> (f64, f64)>(a: f64, b: f64, mut f: F) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        let (fx, fy) = f(mid + half * x);
        sx += w * fx;
        sy += w * fy;
    }
    (sx * half, sy * half)
}

/// Composite Gauss–Legendre over `n` equal panels.
pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let lo = a + h * i as f64;
            gauss_legendre(lo, lo + h, &mut f)
        })
        .sum()
}

/// Result of a bisection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// An endpoint where `f` vanishes exactly is returned immediately.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Root> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(Root { x: lo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Root { x: hi, iterations: 0 });
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Root { x: mid, iterations });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations,
    })
}

/// Euclidean remainder into `[0, period)`.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_15() {
        let got = gauss_legendre(-1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert!((got - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn composite_rule_integrates_smooth_functions() {
        let got = integrate(0.0, std::f64::consts::PI, 16, f64::sin);
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-11);
        assert!(r.iterations > 30);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9, 100),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn wrap_stays_in_range() {
        assert_eq!(wrap(-1e-20, 2.0), 0.0);
        assert!((wrap(-0.5, 2.0) - 1.5).abs() < 1e-15);
        assert!((wrap(4.25, 2.0) - 0.25).abs() < 1e-15);
    }
}
