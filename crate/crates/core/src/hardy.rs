//! Interior extensions of boundary data (Poisson and Cauchy integrals), line
//! norms as functions of the height, and the pointwise subharmonic bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{one_plus_cos, x_of_theta, BoundarySamples, Domain};
use crate::error::{Error, Result};
use crate::quadrature::{line_norm_at_height, pairwise_sum, QuadOptions};

/// Heights below this are refused unless explicitly allowed.
pub const MIN_HEIGHT: f64 = 0.05;
const KERNEL_TOL: f64 = 1e-10;

/// `P_y(x) = y / (pi (x^2 + y^2))`.
pub fn poisson_kernel(x: f64, y: f64) -> f64 {
    y / (PI * (x * x + y * y))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtendOptions {
    /// Accept `0 < y < MIN_HEIGHT`.
    pub allow_near_boundary: bool,
}

fn check_point(f: &BoundarySamples, z: Complex64, opts: ExtendOptions) -> Result<()> {
    if f.domain() != Domain::Line {
        return Err(Error::InvalidParameter("extension expects line samples".into()));
    }
    if !(z.im > 0.0) {
        return Err(Error::InvalidParameter(format!("{z} is not in the upper half-plane")));
    }
    if z.im < MIN_HEIGHT && !opts.allow_near_boundary {
        return Err(Error::TooCloseToBoundary(z.im));
    }
    Ok(())
}

/// Periodic trapezoid rule for `int k(t) f(t) dt` after `t = tan(theta/2)`.
/// `at_infinity` is the limit of `k(t) f(t) (1 + t^2)/2` at node 0.
fn trapezoid<K>(f: &BoundarySamples, kernel: K, at_infinity: Complex64) -> Complex64
where
    K: Fn(f64) -> Complex64,
{
    let n = f.n();
    let terms: Vec<Complex64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if j == 0 {
                at_infinity
            } else {
                let theta = f.theta(j);
                v * kernel(x_of_theta(theta)) / one_plus_cos(theta)
            }
        })
        .collect();
    let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
    let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) * (2.0 * PI / n as f64)
}

/// `(P_y * f)(x)` at `z = x + iy`. Node 0 of the samples is read as the limit
/// of `f` at infinity, which the kernel weighs by `y / (2 pi)`.
pub fn poisson_extend(f: &BoundarySamples, z: Complex64, opts: ExtendOptions) -> Result<Complex64> {
    check_point(f, z, opts)?;
    let (x, y) = (z.re, z.im);
    let kernel = |t: f64| Complex64::new(poisson_kernel(x - t, y), 0.0);
    let ones = BoundarySamples::new(f.p(), Domain::Line, vec![Complex64::new(1.0, 0.0); f.n()])?;
    let mass = trapezoid(&ones, kernel, Complex64::new(y / (2.0 * PI), 0.0)).re;
    if (mass - 1.0).abs() > KERNEL_TOL {
        return Err(Error::NoConvergence { value: mass, est_error: (mass - 1.0).abs() });
    }
    Ok(trapezoid(f, kernel, f.values()[0] * (y / (2.0 * PI))))
}

/// `(1 / 2 pi i) int f(s) / (s - z) ds` for `Im z > 0`; `f` must vanish at
/// infinity. The kernel resolution on the grid is checked against the
/// reproducing identity for `(s + i)^{-2}`.
pub fn cauchy_integral(f: &BoundarySamples, z: Complex64, opts: ExtendOptions) -> Result<Complex64> {
    check_point(f, z, opts)?;
    if f.values()[0].norm() != 0.0 {
        return Err(Error::NonDecayingInput(f.values()[0].norm()));
    }
    let scale = Complex64::new(0.0, 2.0 * PI).inv();
    let kernel = |t: f64| scale / (t - z);
    let i = Complex64::new(0.0, 1.0);
    let probe = BoundarySamples::sample_line(|t| (t + i).powi(-2), f.p(), f.n())?;
    let got = trapezoid(&probe, kernel, Complex64::new(0.0, 0.0));
    let want = (z + i).powi(-2);
    if (got - want).norm() > KERNEL_TOL * want.norm().max(1.0) {
        return Err(Error::NoConvergence { value: got.norm(), est_error: (got - want).norm() });
    }
    Ok(trapezoid(f, kernel, Complex64::new(0.0, 0.0)))
}

/// `int |f(x + iy)|^p dx` over a set of heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProfile {
    pub p: f64,
    pub heights: Vec<f64>,
    /// `inf` where the quadrature diverges (a pole on the line).
    #[serde(serialize_with = "serialize_values", deserialize_with = "deserialize_values")]
    pub values: Vec<f64>,
    pub monotone: bool,
}

fn serialize_values<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element(&Option::<f64>::None)?;
        }
    }
    seq.end()
}

fn deserialize_values<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    let v: Vec<Option<f64>> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
}

/// Line norms at the given heights; `monotone` records whether they are
/// nonincreasing in `y`.
pub fn line_profile<F>(f: F, p: f64, heights: &[f64]) -> Result<LineProfile>
where
    F: Fn(Complex64) -> Complex64,
{
    if heights.is_empty() || heights.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::InvalidParameter("heights must be positive".into()));
    }
    if heights.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("heights must be strictly increasing".into()));
    }
    let mut values = Vec::with_capacity(heights.len());
    for &y in heights {
        match line_norm_at_height(&f, p, y, &QuadOptions::default()) {
            Ok(r) => values.push(r.value),
            Err(Error::NoConvergence { .. }) => values.push(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    let monotone = values.iter().all(|v| v.is_finite()) && values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    Ok(LineProfile { p, heights: heights.to_vec(), values, monotone })
}

/// `C_p = (2 / pi)^{1/p}`.
pub fn subharmonic_constant(p: f64) -> f64 {
    (2.0 / PI).powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubharmonicReport {
    /// `bound / |f|` per sample point (`inf` where `f` vanishes).
    pub margins: Vec<f64>,
    pub min_margin: f64,
}

/// Checks `|f(x+iy)| <= C_p ||f||_{H^p} y^{-1/p}` at every sample point.
pub fn subharmonic_bound_check<F>(f: F, p: f64, hp_norm: f64, points: &[Complex64]) -> Result<SubharmonicReport>
where
    F: Fn(Complex64) -> Complex64,
{
    let cp = subharmonic_constant(p);
    let mut margins = Vec::with_capacity(points.len());
    for &z in points {
        if !(z.im > 0.0) {
            return Err(Error::InvalidParameter(format!("{z} is not in the upper half-plane")));
        }
        let value = f(z).norm();
        let bound = cp * hp_norm * z.im.powf(-1.0 / p);
        if value > bound {
            return Err(Error::BoundViolated { point: format!("{z}"), value, bound });
        }
        margins.push(if value == 0.0 { f64::INFINITY } else { bound / value });
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SubharmonicReport { margins, min_margin })
}
