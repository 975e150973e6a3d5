//! Linking numbers of closed polygons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{segment_segment, P3, V3};

/// Both linking-number computations for a pair of loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkingResult {
    pub gauss: f64,
    pub crossings: i64,
    pub agree: bool,
    pub hopf: bool,
    pub min_distance: f64,
}

fn segments(l: &[P3]) -> impl Iterator<Item = (&P3, &P3)> {
    l.windows(2).map(|w| (&w[0], &w[1]))
}

fn check_closed(l: &[P3], name: &str) -> Result<()> {
    if l.len() < 4 {
        return Err(Error::Degenerate(format!("loop {name} needs at least 3 distinct vertices")));
    }
    if l.first() != l.last() {
        return Err(Error::Degenerate(format!("loop {name} is not closed")));
    }
    Ok(())
}

/// Smallest distance between the two polygons.
pub fn min_loop_distance(f: &[P3], g: &[P3]) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in segments(f) {
        for (c, d) in segments(g) {
            best = best.min(segment_segment(a, b, c, d).0);
        }
    }
    best
}

/// Signed solid angle swept by a pair of segments, as a fraction of `4π`.
fn segment_pair(p1: &P3, p2: &P3, q1: &P3, q2: &P3) -> f64 {
    let r13 = q1 - p1;
    let r14 = q2 - p1;
    let r23 = q1 - p2;
    let r24 = q2 - p2;
    let unit = |v: V3| {
        let n = v.norm();
        if n > 0.0 {
            Some(v / n)
        } else {
            None
        }
    };
    let (Some(n1), Some(n2), Some(n3), Some(n4)) = (
        unit(r13.cross(&r14)),
        unit(r14.cross(&r24)),
        unit(r24.cross(&r23)),
        unit(r23.cross(&r13)),
    ) else {
        return 0.0;
    };
    let asin = |x: f64| x.clamp(-1.0, 1.0).asin();
    let omega = asin(n1.dot(&n2)) + asin(n2.dot(&n3)) + asin(n3.dot(&n4)) + asin(n4.dot(&n1));
    let s = (q2 - q1).cross(&(p2 - p1)).dot(&r13);
    if s == 0.0 {
        return 0.0;
    }
    // Sign chosen so that the sum equals the Gauss double integral of
    // (r1 - r2)·(dr1 × dr2) / |r1 - r2|³ over 4π.
    omega * s.signum() / (4.0 * std::f64::consts::PI)
}

/// Gauss linking integral, evaluated exactly segment by segment.
pub fn linking_number_gauss(f: &[P3], g: &[P3]) -> Result<f64> {
    check_closed(f, "F")?;
    check_closed(g, "G")?;
    let d = min_loop_distance(f, g);
    if d <= 1e-9 {
        return Err(Error::LoopsTouch(d));
    }
    let mut sum = 0.0;
    for (a, b) in segments(f) {
        for (c, e) in segments(g) {
            sum += segment_pair(a, b, c, e);
        }
    }
    Ok(sum)
}

/// Default projection direction, `(1, φ, φ²)` normalized.
pub fn generic_direction() -> V3 {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    V3::new(1.0, phi, phi * phi).normalize()
}

fn perturbed(base: &V3, k: usize) -> V3 {
    if k == 0 {
        return *base;
    }
    // Deterministic small tilts along two fixed irrational directions.
    let a = 1e-3 * k as f64;
    let e1 = base.cross(&V3::new(0.3, -0.7, 0.2)).normalize();
    let e2 = base.cross(&e1);
    (base + e1 * (a * 1.618_033_988_749_895).sin() + e2 * (a * 2.414_213_562_373_095).cos() * a).normalize()
}

enum Count {
    Value(i64),
    Degenerate,
}

fn count_crossings(f: &[P3], g: &[P3], d: &V3) -> Count {
    let helper = if d.x.abs() < 0.9 { V3::x() } else { V3::y() };
    let e1 = d.cross(&helper).normalize();
    let e2 = d.cross(&e1);
    let proj = |p: &P3| (p.coords.dot(&e1), p.coords.dot(&e2), p.coords.dot(d));
    let pf: Vec<_> = f.iter().map(proj).collect();
    let pg: Vec<_> = g.iter().map(proj).collect();
    let mut total = 0i64;
    for i in 0..pf.len() - 1 {
        let (a, b) = (pf[i], pf[i + 1]);
        let (ax0, ax1) = (a.0.min(b.0), a.0.max(b.0));
        let (ay0, ay1) = (a.1.min(b.1), a.1.max(b.1));
        for j in 0..pg.len() - 1 {
            let (c, e) = (pg[j], pg[j + 1]);
            if c.0.max(e.0) < ax0 || c.0.min(e.0) > ax1 || c.1.max(e.1) < ay0 || c.1.min(e.1) > ay1 {
                continue;
            }
            let r = (b.0 - a.0, b.1 - a.1);
            let s = (e.0 - c.0, e.1 - c.1);
            let den = r.0 * s.1 - r.1 * s.0;
            let qp = (c.0 - a.0, c.1 - a.1);
            let scale = (r.0.hypot(r.1)) * (s.0.hypot(s.1));
            if den.abs() <= 1e-14 * scale {
                if (qp.0 * r.1 - qp.1 * r.0).abs() <= 1e-14 * scale.max(1e-300) {
                    return Count::Degenerate;
                }
                continue;
            }
            let t = (qp.0 * s.1 - qp.1 * s.0) / den;
            let u = (qp.0 * r.1 - qp.1 * r.0) / den;
            let tol = 1e-10;
            if t < -tol || t > 1.0 + tol || u < -tol || u > 1.0 + tol {
                continue;
            }
            if t.abs() <= tol || (t - 1.0).abs() <= tol || u.abs() <= tol || (u - 1.0).abs() <= tol {
                return Count::Degenerate;
            }
            let hf = a.2 + t * (b.2 - a.2);
            let hg = c.2 + u * (e.2 - c.2);
            if (hf - hg).abs() <= 1e-12 {
                return Count::Degenerate;
            }
            if hf > hg {
                // F passes over G, seen from +d.
                total += if den > 0.0 { 1 } else { -1 };
            }
        }
    }
    Count::Value(total)
}

/// Sum of crossing signs where `F` passes over `G` in the projection along
/// `direction`; retries slightly tilted directions when the projection is
/// not generic.
pub fn linking_number_crossings(f: &[P3], g: &[P3], direction: &V3) -> Result<i64> {
    check_closed(f, "F")?;
    check_closed(g, "G")?;
    let base = direction.normalize();
    const TRIES: usize = 10;
    for k in 0..TRIES {
        if let Count::Value(v) = count_crossings(f, g, &perturbed(&base, k)) {
            return Ok(v);
        }
    }
    Err(Error::NonGenericProjection(TRIES))
}

/// Both linking numbers, with agreement and Hopf flags.
pub fn linking(f: &[P3], g: &[P3]) -> Result<LinkingResult> {
    let gauss = linking_number_gauss(f, g)?;
    let crossings = linking_number_crossings(f, g, &generic_direction())?;
    Ok(LinkingResult {
        gauss,
        crossings,
        agree: (gauss - crossings as f64).abs() <= 1e-6,
        hopf: crossings.abs() == 1,
        min_distance: min_loop_distance(f, g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle(n: usize, c: V3, e1: V3, e2: V3) -> Vec<P3> {
        let mut v: Vec<P3> = (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                P3::from(c + e1 * a.cos() + e2 * a.sin())
            })
            .collect();
        v.push(v[0]);
        v
    }

    fn hopf(n: usize) -> (Vec<P3>, Vec<P3>) {
        (
            circle(n, V3::zeros(), V3::x(), V3::y()),
            circle(n, V3::x(), V3::x(), V3::z()),
        )
    }

    /// Midpoint-rule Gauss double integral, independent of the exact formula.
    fn gauss_quadrature(f: &[P3], g: &[P3]) -> f64 {
        let mut s = 0.0;
        for a in f.windows(2) {
            for b in g.windows(2) {
                let r = nalgebra::center(&a[0], &a[1]) - nalgebra::center(&b[0], &b[1]);
                let d1 = a[1] - a[0];
                let d2 = b[1] - b[0];
                s += r.dot(&d1.cross(&d2)) / r.norm().powi(3);
            }
        }
        s / (4.0 * std::f64::consts::PI)
    }

    #[test]
    fn exact_formula_matches_quadrature_sign() {
        let (f, g) = hopf(200);
        let q = gauss_quadrature(&f, &g);
        let e = linking_number_gauss(&f, &g).unwrap();
        assert!((q - e).abs() < 0.02, "{q} vs {e}");
        assert!((e.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn methods_agree_on_hopf_and_its_mirror() {
        let (f, g) = hopf(64);
        let r = linking(&f, &g).unwrap();
        assert!(r.agree && r.hopf, "{r:?}");
        let mf: Vec<P3> = f.iter().map(|p| P3::new(p.x, p.y, -p.z)).collect();
        let mg: Vec<P3> = g.iter().map(|p| P3::new(p.x, p.y, -p.z)).collect();
        let m = linking(&mf, &mg).unwrap();
        assert!(m.agree && m.crossings == -r.crossings);
    }

    #[test]
    fn unlinked_circles_have_zero() {
        let f = circle(50, V3::zeros(), V3::x(), V3::y());
        let g = circle(50, V3::new(5.0, 0.0, 0.0), V3::x(), V3::z());
        let r = linking(&f, &g).unwrap();
        assert_eq!(r.crossings, 0);
        assert!(r.gauss.abs() < 1e-9);
    }

    #[test]
    fn reversing_a_loop_flips_the_sign() {
        let (f, mut g) = hopf(40);
        let a = linking(&f, &g).unwrap().crossings;
        g.reverse();
        assert_eq!(linking(&f, &g).unwrap().crossings, -a);
    }

    #[test]
    fn touching_loops_are_rejected() {
        let f = circle(40, V3::zeros(), V3::x(), V3::y());
        let g = circle(40, V3::new(2.0, 0.0, 0.0), V3::x(), V3::z());
        assert!(matches!(linking_number_gauss(&f, &g), Err(Error::LoopsTouch(_))));
    }

    #[test]
    fn axis_projection_needs_perturbation() {
        // Along z the two loops overlap edge-on; the tilted retries recover.
        let (f, g) = hopf(8);
        let v = linking_number_crossings(&f, &g, &V3::y()).unwrap();
        assert_eq!(v.abs(), 1);
    }
}
