//! The Cayley pair between the unit disc and the upper half-plane.
//!
//! `alpha` sends the disc onto `Im z > 0` and the unit circle onto the real
//! line (plus the point at infinity, which is the image of `w = -1`). On the
//! boundary the two parametrizations are tied by `x = tan(theta / 2)`, so a
//! uniform grid in `theta` is a graded grid on the line with its last node
//! at infinity.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `alpha(w) = i(1 - w)/(1 + w)`.
pub fn alpha(w: Complex64) -> Result<Complex64> {
    let den = Complex64::new(1.0, 0.0) + w;
    if den.norm() == 0.0 {
        return Err(Error::PoleAtMinusOne);
    }
    Ok(I * (Complex64::new(1.0, 0.0) - w) / den)
}

/// `beta(z) = (i - z)/(z + i)`, the inverse of [`alpha`].
pub fn beta(z: Complex64) -> Result<Complex64> {
    let den = z + I;
    if den.norm() == 0.0 {
        return Err(Error::PoleAtMinusI);
    }
    Ok((I - z) / den)
}

/// `1 / beta(z) = (z + i)/(i - z)`; finite at `z = -i`.
pub fn beta_inv(z: Complex64) -> Result<Complex64> {
    let den = I - z;
    if den.norm() == 0.0 {
        return Err(Error::EvalAtPole("i".into()));
    }
    Ok((z + I) / den)
}

/// Angle with `beta(x) = e^{i theta}`; principal branch, strictly increasing in `x`.
pub fn theta_of_x(x: f64) -> f64 {
    2.0 * x.atan()
}

/// Inverse of [`theta_of_x`] on `(-pi, pi)`. Near `+-pi` the distance to the
/// floating-point `PI` is formed first, so the blow-up sits exactly there.
pub fn x_of_theta(theta: f64) -> f64 {
    if theta > FRAC_PI_2 {
        1.0 / (0.5 * (PI - theta)).tan()
    } else if theta < -FRAC_PI_2 {
        -1.0 / (0.5 * (PI + theta)).tan()
    } else {
        (0.5 * theta).tan()
    }
}

/// `1 + cos(theta)` with full relative accuracy next to `theta = +-pi`,
/// vanishing exactly at the floating-point `+-PI`.
pub fn one_plus_cos(theta: f64) -> f64 {
    let c = if theta.abs() > FRAC_PI_2 { (0.5 * (PI - theta.abs())).sin() } else { (0.5 * theta).cos() };
    2.0 * c * c
}

/// A point `e^{i theta}` on the unit circle with `theta` in `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePoint {
    theta: f64,
}

impl CirclePoint {
    pub fn new(theta: f64) -> Self {
        let mut t = (theta + PI).rem_euclid(2.0 * PI) - PI;
        if t >= PI {
            t -= 2.0 * PI;
        }
        CirclePoint { theta: t }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Image on the real line; `None` for the point at infinity (`theta = -pi`).
    pub fn to_line(&self) -> Option<f64> {
        if self.theta == -PI {
            None
        } else {
            Some(x_of_theta(self.theta))
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Circle,
    Line,
}

/// Node `j` of the uniform grid `theta_j = -pi + 2 pi j / n`.
pub fn grid_theta(n: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n as f64
}

/// Values on the uniform `theta` grid. For `Domain::Line` the value at node
/// `j` is `f(tan(theta_j / 2))`; node 0 is the point at infinity and holds the
/// declared limit. For `Domain::Circle` it is `g(theta_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SamplesWire", try_from = "SamplesWire")]
pub struct BoundarySamples {
    p: f64,
    domain: Domain,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SamplesWire {
    n: usize,
    p: f64,
    domain: Domain,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<BoundarySamples> for SamplesWire {
    fn from(s: BoundarySamples) -> Self {
        SamplesWire {
            n: s.values.len(),
            p: s.p,
            domain: s.domain,
            re: s.values.iter().map(|v| v.re).collect(),
            im: s.values.iter().map(|v| v.im).collect(),
        }
    }
}

impl TryFrom<SamplesWire> for BoundarySamples {
    type Error = Error;

    fn try_from(w: SamplesWire) -> Result<Self> {
        if w.re.len() != w.n || w.im.len() != w.n {
            return Err(Error::InvalidParameter(format!(
                "sample arrays have lengths {}/{} but n = {}",
                w.re.len(),
                w.im.len(),
                w.n
            )));
        }
        let values = w.re.into_iter().zip(w.im).map(|(re, im)| Complex64::new(re, im)).collect();
        BoundarySamples::new(w.p, w.domain, values)
    }
}

impl BoundarySamples {
    pub fn new(p: f64, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        let n = values.len();
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size {n} must be a power of two >= 16"
            )));
        }
        if !(p > 0.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("exponent p = {p} outside (0, 2]")));
        }
        if let Some(j) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter(format!("non-finite sample at node {j}")));
        }
        Ok(BoundarySamples { p, domain, values })
    }

    /// Samples `f` on the line grid; the node at infinity gets the value 0.
    pub fn sample_line<F>(f: F, p: f64, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let values = (0..n)
            .map(|j| if j == 0 { Complex64::new(0.0, 0.0) } else { f(x_of_theta(grid_theta(n, j))) })
            .collect();
        Self::new(p, Domain::Line, values)
    }

    /// Samples a function of `theta` on the circle grid.
    pub fn sample_circle<G>(g: G, p: f64, n: usize) -> Result<Self>
    where
        G: Fn(f64) -> Complex64,
    {
        let values = (0..n).map(|j| g(grid_theta(n, j))).collect();
        Self::new(p, Domain::Circle, values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn theta(&self, j: usize) -> f64 {
        grid_theta(self.n(), j)
    }

    /// Piecewise-linear interpolant in `theta`, periodic on the grid.
    pub fn interpolate(&self, theta: f64) -> Complex64 {
        let n = self.n();
        let s = (theta + PI).rem_euclid(2.0 * PI) * n as f64 / (2.0 * PI);
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        self.values[j] * (1.0 - t) + self.values[(j + 1) % n] * t
    }
}

/// The L^p-isometric pullback `g(theta) = f(tan(theta/2)) (1 + cos theta)^{-1/p}`
/// of a line function to the circle. The node at infinity must carry the
/// limit 0.
pub fn pullback(f: &BoundarySamples, p: f64) -> Result<BoundarySamples> {
    if f.domain() != Domain::Line {
        return Err(Error::InvalidParameter("pullback expects line samples".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("pullback exponent p = {p} outside (0, 1)")));
    }
    let limit = f.values()[0].norm();
    if limit != 0.0 {
        return Err(Error::NonDecayingInput(limit));
    }
    let n = f.n();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if j == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                v * one_plus_cos(grid_theta(n, j)).powf(-1.0 / p)
            }
        })
        .collect();
    BoundarySamples::new(p, Domain::Circle, values)
}

/// [`pullback`] applied directly to an evaluator on the line.
pub fn pullback_fn<F>(f: F, p: f64, n: usize) -> Result<BoundarySamples>
where
    F: Fn(f64) -> Complex64,
{
    pullback(&BoundarySamples::sample_line(f, p, n)?, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn alpha_and_beta_fixed_values() {
        assert!((alpha(c(0.0, 0.0)).unwrap() - I).norm() < 1e-15);
        assert!((alpha(I).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(beta(I).unwrap().norm() < 1e-15);
        assert!((beta(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(alpha(c(-1.0, 0.0)), Err(Error::PoleAtMinusOne)));
        assert!(matches!(beta(-I), Err(Error::PoleAtMinusI)));
    }

    #[test]
    fn alpha_maps_disc_into_upper_half_plane() {
        for a in 0..100 {
            for b in 0..100 {
                let r = 0.999 * a as f64 / 99.0;
                let t = 2.0 * PI * b as f64 / 100.0;
                let z = alpha(Complex64::from_polar(r, t)).unwrap();
                assert!(z.im > 0.0, "alpha({r}, {t}) = {z}");
            }
        }
    }

    #[test]
    fn round_trip_on_upper_grid() {
        for a in 0..100 {
            for b in 0..100 {
                let z = c(-10.0 + 20.0 * a as f64 / 99.0, 0.01 + (10.0 - 0.01) * b as f64 / 99.0);
                let back = alpha(beta(z).unwrap()).unwrap();
                assert!((back - z).norm() < 1e-12, "{z} -> {back}");
            }
        }
    }

    #[test]
    fn theta_of_x_matches_beta() {
        assert_eq!(theta_of_x(0.0), 0.0);
        assert!((theta_of_x(1.0) - PI / 2.0).abs() < 1e-15);
        let mut x = -1e6;
        let mut prev = theta_of_x(x) - 1.0;
        while x < 1e6 {
            let th = theta_of_x(x);
            assert!(th > prev);
            let b = beta(c(x, 0.0)).unwrap();
            assert!((b - Complex64::from_polar(1.0, th)).norm() < 1e-14, "x = {x}");
            assert!((b.norm() - 1.0).abs() < 1e-14);
            prev = th;
            x += 199.77;
        }
    }

    #[test]
    fn circle_point_normalizes() {
        assert!((CirclePoint::new(3.0 * PI).theta() + PI).abs() < 1e-12);
        assert_eq!(CirclePoint::new(-PI).to_line(), None);
        assert!((CirclePoint::new(PI / 2.0).to_line().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pullback_of_lorentzian_simplifies() {
        let p = 0.6;
        let g = pullback_fn(|x| c(1.0 / (1.0 + x * x), 0.0), p, 64).unwrap();
        for j in 1..64 {
            let th = grid_theta(64, j);
            let half = (0.5 * th).cos().powi(2);
            let expect = half * (2.0 * half).powf(-1.0 / p);
            assert!((g.values()[j].re - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
        let z = pullback_fn(|_| c(0.0, 0.0), p, 32).unwrap();
        assert!(z.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn pullback_rejects_nonzero_limit() {
        let mut v = vec![c(0.0, 0.0); 16];
        v[0] = c(1.0, 0.0);
        let s = BoundarySamples::new(0.5, Domain::Line, v).unwrap();
        assert!(matches!(pullback(&s, 0.5), Err(Error::NonDecayingInput(_))));
    }

    #[test]
    fn samples_json_field_order() {
        let s = BoundarySamples::sample_circle(|_| c(1.0, -1.0), 0.5, 16).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with(r#"{"n":16,"p":0.5,"domain":"circle","re":[1.0"#), "{text}");
        let back: BoundarySamples = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<BoundarySamples>(r#"{"n":3,"p":0.5,"domain":"line","re":[0,0,0],"im":[0,0,0]}"#).is_err());
    }
}
