//! Smooth U-shaped replacements for sharp folds.
//!
//! A profile is a unit-speed planar curve whose curvature is a normalized
//! bump supported on its whole length, so it turns by exactly `π` and its
//! end tangents are antiparallel. Ruled by straight lines orthogonal to the
//! profile plane, it bends a strip isometrically.

use std::io::Write;
use std::sync::Arc;

use nalgebra::Matrix3x2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{P3, V3};
use crate::numeric::{bisect, gauss_legendre, gauss_legendre2};

const TABLE_INTERVALS: usize = 2048;

/// Shape of the curvature density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bump {
    /// `exp(-1 / (1 - u²))` on `u ∈ (-1, 1)`: all derivatives vanish at the ends.
    Exponential,
    /// `(1 - u²)^k`.
    Polynomial(u32),
}

/// Differentiability class of the resulting surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Infinite,
    Finite(u32),
}

impl Bump {
    fn density(&self, t: f64) -> f64 {
        let u = 2.0 * t - 1.0;
        let q = 1.0 - u * u;
        if q <= 0.0 {
            return 0.0;
        }
        match self {
            Bump::Exponential => (-1.0 / q).exp(),
            Bump::Polynomial(k) => q.powi(*k as i32),
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            Bump::Exponential => Smoothness::Infinite,
            // Curvature is C^(k-1) at the ends, so the curve is C^(k+1).
            Bump::Polynomial(k) => Smoothness::Finite(k + 1),
        }
    }
}

/// Profile of unit length, tabulated on a fine grid.
#[derive(Debug)]
struct Shape {
    bump: Bump,
    norm: f64,
    /// Normalized turning `Φ(t_i)` and its slope at the nodes.
    phi: Vec<f64>,
    dphi: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Shape {
    fn new(bump: Bump) -> Self {
        let n = TABLE_INTERVALS;
        let h = 1.0 / n as f64;
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            let a = i as f64 * h;
            cum[i + 1] = cum[i] + gauss_legendre(a, a + h, |t| bump.density(t));
        }
        let norm = cum[n];
        let phi: Vec<f64> = cum.iter().map(|c| c / norm).collect();
        let dphi: Vec<f64> = (0..=n).map(|i| bump.density(i as f64 * h) / norm).collect();
        let mut shape = Shape {
            bump,
            norm,
            phi,
            dphi,
            x: vec![0.0; n + 1],
            y: vec![0.0; n + 1],
        };
        for i in 0..n {
            let a = i as f64 * h;
            let (dx, dy) = shape.segment(i, a, a + h);
            shape.x[i + 1] = shape.x[i] + dx;
            shape.y[i + 1] = shape.y[i] + dy;
        }
        shape
    }

    fn interval(t: f64) -> usize {
        ((t * TABLE_INTERVALS as f64).floor() as usize).min(TABLE_INTERVALS - 1)
    }

    /// Cubic Hermite interpolant of `Φ` on interval `i`.
    fn phi_in(&self, i: usize, t: f64) -> f64 {
        let h = 1.0 / TABLE_INTERVALS as f64;
        let s = (t - i as f64 * h) / h;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.dphi[i] * h, self.dphi[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1
    }

    fn phi_slope_in(&self, i: usize, t: f64) -> f64 {
        let h = 1.0 / TABLE_INTERVALS as f64;
        let s = (t - i as f64 * h) / h;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.dphi[i] * h, self.dphi[i + 1] * h);
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * p0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * p1 + (3.0 * s2 - 2.0 * s) * m1)
            / h
    }

    fn segment(&self, i: usize, a: f64, b: f64) -> (f64, f64) {
        gauss_legendre2(a, b, |t| {
            let ang = std::f64::consts::PI * self.phi_in(i, t);
            (ang.cos(), ang.sin())
        })
    }

    fn angle(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        std::f64::consts::PI * self.phi_in(Self::interval(t), t)
    }

    fn curvature(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        std::f64::consts::PI * self.phi_slope_in(Self::interval(t), t)
    }

    fn point(&self, t: f64) -> (f64, f64) {
        let t = t.clamp(0.0, 1.0);
        let i = Self::interval(t);
        let a = i as f64 / TABLE_INTERVALS as f64;
        let (dx, dy) = self.segment(i, a, t);
        (self.x[i] + dx, self.y[i] + dy)
    }

    /// Separation between the two straight legs per unit profile length.
    fn separation_ratio(&self) -> f64 {
        self.y[TABLE_INTERVALS]
    }
}

/// Output sample of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub angle: f64,
    pub curvature: f64,
}

/// U-shaped profile whose legs end a given distance apart.
#[derive(Debug, Clone)]
pub struct UProfile {
    separation: f64,
    length: f64,
    bisection_iterations: usize,
    shape: Arc<Shape>,
    samples: Vec<ProfileSample>,
}

/// Separation per unit length of a bump profile.
pub fn separation_ratio(bump: Bump) -> f64 {
    Shape::new(bump).separation_ratio()
}

impl UProfile {
    /// Builds the profile; its length is found by bisection on `[δ, 10δ + 1]`.
    pub fn new(separation: f64, bump: Bump, n_samples: usize) -> Result<Self> {
        if n_samples < 64 {
            return Err(Error::Precondition(format!("need at least 64 samples, got {n_samples}")));
        }
        if !(separation.is_finite() && separation > 0.0) {
            return Err(Error::OutOfRange(format!("layer separation {separation} must be positive")));
        }
        if let Bump::Polynomial(0) = bump {
            return Err(Error::OutOfRange("polynomial bump order must be at least 1".into()));
        }
        let shape = Arc::new(Shape::new(bump));
        let c = shape.separation_ratio();
        let root = bisect(|l| l * c - separation, separation, 10.0 * separation + 1.0, 1e-10 * separation.min(1.0), 200)?;
        let mut p = Self {
            separation,
            length: root.x,
            bisection_iterations: root.iterations,
            shape,
            samples: Vec::new(),
        };
        p.samples = (0..=n_samples)
            .map(|i| {
                let s = p.length * i as f64 / n_samples as f64;
                let (x, y) = p.point(s);
                ProfileSample {
                    s,
                    x,
                    y,
                    angle: p.angle(s),
                    curvature: p.curvature(s),
                }
            })
            .collect();
        Ok(p)
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn bump(&self) -> Bump {
        self.shape.bump
    }

    pub fn smoothness(&self) -> Smoothness {
        self.shape.bump.smoothness()
    }

    pub fn bisection_iterations(&self) -> usize {
        self.bisection_iterations
    }

    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    /// Tangent angle at arc length `s`.
    pub fn angle(&self, s: f64) -> f64 {
        self.shape.angle(s / self.length)
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.shape.curvature(s / self.length) / self.length
    }

    pub fn point(&self, s: f64) -> (f64, f64) {
        let (x, y) = self.shape.point(s / self.length);
        (x * self.length, y * self.length)
    }

    pub fn tangent(&self, s: f64) -> (f64, f64) {
        let a = self.angle(s);
        (a.cos(), a.sin())
    }

    /// Largest curvature, attained at the middle of the profile.
    pub fn max_curvature(&self) -> f64 {
        std::f64::consts::PI * self.shape.bump.density(0.5) / self.shape.norm / self.length
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,x,y,tangent_angle,curvature")?;
        for p in &self.samples {
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", p.s, p.x, p.y, p.angle, p.curvature)?;
        }
        Ok(())
    }
}

/// Cross-section of a fold band.
#[derive(Debug, Clone)]
pub enum BandProfile {
    /// Straight lead-in, U-turn, straight return.
    Smooth { profile: UProfile, lead: f64 },
    /// Zero layer gap: the band is folded flat in half.
    Sharp,
}

/// Chart of one fold band.
///
/// Band coordinates: `s ∈ [0, width]` across the band, `r` along the crease.
/// The image is `origin + r·ruling + X(s)·outward + Y(s)·lift`.
#[derive(Debug, Clone)]
pub struct PseudofoldChart {
    pub width: f64,
    pub profile: BandProfile,
    pub origin: P3,
    pub ruling: V3,
    pub outward: V3,
    pub lift: V3,
}

impl PseudofoldChart {
    /// Fits a U of the given separation into a band of the given width.
    pub fn new(
        crease: usize,
        width: f64,
        separation: f64,
        bump: Bump,
        n_samples: usize,
        origin: P3,
        ruling: V3,
        outward: V3,
        lift: V3,
    ) -> Result<Self> {
        let profile = if separation == 0.0 {
            BandProfile::Sharp
        } else {
            let p = UProfile::new(separation, bump, n_samples)?;
            if p.length() > width {
                return Err(Error::BudgetInsufficient {
                    crease,
                    layer_gap: separation,
                    needed: p.length(),
                    available: width,
                });
            }
            let lead = 0.5 * (width - p.length());
            BandProfile::Smooth { profile: p, lead }
        };
        Ok(Self {
            width,
            profile,
            origin,
            ruling,
            outward,
            lift,
        })
    }

    /// Profile position and unit tangent at band coordinate `s`.
    pub fn section(&self, s: f64) -> ((f64, f64), (f64, f64)) {
        match &self.profile {
            BandProfile::Sharp => {
                let half = 0.5 * self.width;
                if s <= half {
                    ((s, 0.0), (1.0, 0.0))
                } else {
                    ((self.width - s, 0.0), (-1.0, 0.0))
                }
            }
            BandProfile::Smooth { profile, lead } => {
                let l = profile.length();
                if s <= *lead {
                    ((s, 0.0), (1.0, 0.0))
                } else if s < lead + l {
                    let (x, y) = profile.point(s - lead);
                    ((lead + x, y), profile.tangent(s - lead))
                } else {
                    let (xe, _) = profile.point(l);
                    ((lead + xe - (s - lead - l), profile.separation()), (-1.0, 0.0))
                }
            }
        }
    }

    /// Point and differential with respect to `(s, r)`.
    pub fn eval(&self, s: f64, r: f64) -> (P3, Matrix3x2<f64>) {
        let ((x, y), (tx, ty)) = self.section(s);
        let p = self.origin + self.ruling * r + self.outward * x + self.lift * y;
        let t = self.outward * tx + self.lift * ty;
        (p, Matrix3x2::from_columns(&[t, self.ruling]))
    }

    pub fn separation(&self) -> f64 {
        match &self.profile {
            BandProfile::Sharp => 0.0,
            BandProfile::Smooth { profile, .. } => profile.separation(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_turns_by_pi_with_antiparallel_ends() {
        let p = UProfile::new(0.01, Bump::Exponential, 256).unwrap();
        assert!(p.angle(0.0).abs() < 1e-15);
        assert!((p.angle(p.length()) - PI).abs() < 1e-13);
        let (a, b) = (p.tangent(0.0), p.tangent(p.length()));
        assert!((a.0 + b.0).abs() < 1e-13 && (a.1 + b.1).abs() < 1e-13);
    }

    #[test]
    fn legs_end_at_requested_separation() {
        for sep in [1e-4, 0.01, 0.3] {
            let p = UProfile::new(sep, Bump::Exponential, 64).unwrap();
            let (x, y) = p.point(p.length());
            assert!((y - sep).abs() < 1e-9 * sep.max(1e-3), "{y} vs {sep}");
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn profile_is_mirror_symmetric() {
        let p = UProfile::new(0.02, Bump::Polynomial(3), 128).unwrap();
        let l = p.length();
        for i in 0..=20 {
            let s = l * i as f64 / 20.0;
            let (x0, y0) = p.point(s);
            let (x1, y1) = p.point(l - s);
            assert!((x0 - x1).abs() < 1e-12 && (y0 + y1 - 0.02).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_integrates_to_pi() {
        let p = UProfile::new(0.05, Bump::Exponential, 64).unwrap();
        let total = crate::numeric::integrate(0.0, p.length(), 256, |s| p.curvature(s));
        assert!((total - PI).abs() < 1e-9);
        assert!((p.curvature(0.5 * p.length()) - p.max_curvature()).abs() < 1e-8 * p.max_curvature());
    }

    #[test]
    fn too_few_samples_is_a_precondition_error() {
        assert!(matches!(
            UProfile::new(0.1, Bump::Exponential, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn chart_reports_insufficient_budget() {
        let e = PseudofoldChart::new(
            2,
            0.01,
            0.1,
            Bump::Exponential,
            64,
            P3::origin(),
            V3::y(),
            V3::x(),
            V3::z(),
        );
        assert!(matches!(e, Err(Error::BudgetInsufficient { crease: 2, .. })));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = UProfile::new(0.1, Bump::Exponential, 64).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 66);
        assert!(text.starts_with("s,x,y,tangent_angle,curvature"));
    }
}
