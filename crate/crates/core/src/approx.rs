//! Constructive approximation: rational atoms with poles in `{i, -i}` for
//! L^p(R) functions, and single-pole approximants of upper Hardy functions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cayley::{grid_theta, one_plus_cos, pullback_fn, x_of_theta, BoundarySamples, Domain};
use crate::error::{Error, Result};
use crate::quadrature::{lp_quasinorm_line, pairwise_sum, QuadOptions};
use crate::rational::{poly_mul, GeneralRational, LaurentRational};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest Chebyshev degree tried by [`poly_approx_g2`].
pub const DEGREE_CAP: usize = 512;
/// Percentile of `|g|` at which samples are clipped before smoothing.
pub const CLIP_PERCENTILE: f64 = 0.999;

/// `sum_{j=-d}^{d} c_j e^{i j theta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidParameter("trig coefficient list must have odd length".into()));
        }
        Ok(TrigPolynomial { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeff(&self, j: i64) -> Complex64 {
        let idx = j + self.degree() as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * Complex64::from_polar(1.0, -(self.degree() as f64) * theta)
    }

    pub fn to_laurent(&self) -> LaurentRational {
        LaurentRational::from_powers(-(self.degree() as i64), &self.coeffs)
    }
}

/// `(l_p, m)` with `l_p` the smallest integer such that `p 2^{l_p} > 1`, and
/// `m = 2^{l_p - 1}`, so that `1 < 2pm <= 2`.
pub fn weierstrass_m(p: f64) -> Result<(u32, usize)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
    }
    let mut l = 1u32;
    while p * 2f64.powi(l as i32) <= 1.0 {
        l += 1;
    }
    Ok((l, 1usize << (l - 1)))
}

/// Chebyshev interpolant `q` of `x^{1/p - m}` on `[0, 2]` with a sampled sup
/// error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassPlan {
    pub p: f64,
    pub m: usize,
    pub l_p: u32,
    /// Coefficients in `T_j(x - 1)`.
    pub cheb: Vec<f64>,
    pub sup_err: f64,
}

const VERIFY_POINTS: usize = 10_000;
const SAFETY: f64 = 1.1;

impl WeierstrassPlan {
    /// Interpolant of fixed degree.
    pub fn with_degree(p: f64, m: usize, degree: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) || m == 0 {
            return Err(Error::InvalidParameter(format!("invalid plan parameters p = {p}, m = {m}")));
        }
        let l_p = m.trailing_zeros() + 1;
        let e = 1.0 / p - m as f64;
        if e == 0.0 {
            return Ok(WeierstrassPlan { p, m, l_p, cheb: vec![1.0], sup_err: 0.0 });
        }
        if e < 0.0 {
            return Err(Error::InvalidParameter(format!("exponent 1/p - m = {e} is negative")));
        }
        let np = degree + 1;
        let nodes: Vec<f64> = (0..np).map(|k| PI * (k as f64 + 0.5) / np as f64).collect();
        let vals: Vec<f64> = nodes.iter().map(|t| (t.cos() + 1.0).powf(e)).collect();
        let mut cheb: Vec<f64> = (0..=degree)
            .map(|j| {
                let terms: Vec<f64> = vals.iter().zip(&nodes).map(|(v, t)| v * (j as f64 * t).cos()).collect();
                2.0 / np as f64 * pairwise_sum(&terms)
            })
            .collect();
        cheb[0] *= 0.5;
        let mut plan = WeierstrassPlan { p, m, l_p, cheb, sup_err: 0.0 };
        let worst = (0..VERIFY_POINTS)
            .map(|k| {
                let x = 1.0 - (PI * k as f64 / (VERIFY_POINTS - 1) as f64).cos();
                (x.max(0.0).powf(e) - plan.eval(x)).abs()
            })
            .fold(0.0, f64::max);
        plan.sup_err = SAFETY * worst;
        Ok(plan)
    }

    pub fn degree(&self) -> usize {
        self.cheb.len() - 1
    }

    /// Clenshaw evaluation of `q(x)`, `x` in `[0, 2]`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &a in self.cheb.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + a;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.cheb[0]
    }

    /// `q(1 + cos theta)` as a Laurent polynomial in `w = e^{i theta}`.
    pub fn to_laurent(&self) -> LaurentRational {
        let d = self.degree();
        let mut c = vec![ZERO; 2 * d + 1];
        c[d] = Complex64::new(self.cheb[0], 0.0);
        for j in 1..=d {
            let half = Complex64::new(0.5 * self.cheb[j], 0.0);
            c[d + j] = half;
            c[d - j] = half;
        }
        LaurentRational::from_powers(-(d as i64), &c)
    }
}

/// Doubles the Chebyshev degree until the sup error drops to `tol`.
pub fn poly_approx_g2(p: f64, m: usize, tol: f64) -> Result<WeierstrassPlan> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut degree = 8;
    loop {
        let plan = WeierstrassPlan::with_degree(p, m, degree)?;
        if plan.sup_err <= tol {
            return Ok(plan);
        }
        if degree >= DEGREE_CAP {
            return Err(Error::DegreeOverflow { cap: DEGREE_CAP, sup_err: plan.sup_err, tol });
        }
        degree *= 2;
    }
}

/// `(1 + cos theta)^m = ((w + 1)^2 / (2w))^m`.
fn one_plus_cos_power(m: usize) -> LaurentRational {
    let u = LaurentRational::from_powers(-1, &[Complex64::new(0.5, 0.0), ONE, Complex64::new(0.5, 0.0)]);
    (0..m).fold(LaurentRational::constant(ONE), |acc, _| acc.mul(&u))
}

/// `s(w) = r(w) q(1 + cos theta) (1 + cos theta)^m` as a Laurent polynomial;
/// as a function of `beta(z)` it is a rational atom with poles in `{i, -i}`.
pub fn build_atom(r: &TrigPolynomial, plan: &WeierstrassPlan) -> LaurentRational {
    r.to_laurent().mul(&plan.to_laurent()).mul(&one_plus_cos_power(plan.m))
}

fn fft_forward(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Fejer mean of degree `d` of the clipped circle samples, with the L^p
/// residual `sum |g - r|^p dtheta` of the unclipped samples on the grid.
pub fn trig_approx(g: &BoundarySamples, d: usize) -> Result<(TrigPolynomial, f64)> {
    if g.domain() != Domain::Circle {
        return Err(Error::InvalidParameter("trig_approx expects circle samples".into()));
    }
    let n = g.n();
    if 2 * d >= n {
        return Err(Error::InvalidParameter(format!("degree {d} too large for {n} samples")));
    }
    let mut mags: Vec<f64> = g.values().iter().map(|v| v.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let level = mags[((CLIP_PERCENTILE * n as f64).ceil() as usize).clamp(1, n) - 1];
    let clipped: Vec<Complex64> =
        g.values().iter().map(|&v| if v.norm() > level { v * (level / v.norm()) } else { v }).collect();
    let spec = fft_forward(&clipped);
    let coeffs = (-(d as i64)..=d as i64)
        .map(|j| {
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let fejer = 1.0 - j.unsigned_abs() as f64 / (d + 1) as f64;
            spec[j.rem_euclid(n as i64) as usize] * (sign * fejer / n as f64)
        })
        .collect();
    let r = TrigPolynomial { coeffs };
    let on_grid = r.to_laurent().sample_grid(n, 0.0);
    let diffs: Vec<f64> = g.values().iter().zip(&on_grid).map(|(a, b)| (a - b).norm().powf(g.p())).collect();
    Ok((r, pairwise_sum(&diffs) * 2.0 * PI / n as f64))
}

/// A function on the real line, optionally with an exact Laurent form.
#[derive(Clone)]
pub struct LineFunction {
    eval: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    exact: Option<LaurentRational>,
}

impl std::fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineFunction").field("exact", &self.exact).finish_non_exhaustive()
    }
}

impl LineFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        LineFunction { eval: Arc::new(f), exact: None }
    }

    pub fn from_laurent(r: LaurentRational) -> Self {
        let e = r.clone();
        LineFunction { eval: Arc::new(move |x| e.eval_real(x)), exact: Some(r) }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    pub fn exact(&self) -> Option<&LaurentRational> {
        self.exact.as_ref()
    }
}

/// Stage degrees and grid sizes of the atom pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Circle samples of the pulled-back function.
    pub samples: usize,
    /// Midpoint grid for the residual and atom norms.
    pub norm_grid: usize,
    /// Trig degree per stage; the Chebyshev degree matches it.
    pub degrees: Vec<usize>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { samples: 4096, norm_grid: 1 << 17, degrees: (1..=5).map(|k| 1usize << (k + 3)).collect() }
    }
}

impl Schedule {
    pub fn with_stages(stages: usize) -> Self {
        Schedule { degrees: (1..=stages).map(|k| 1usize << (k + 3)).collect(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSequence {
    pub p: f64,
    pub eps: f64,
    pub budget_p: f64,
    pub fp_norm_p: f64,
    pub atoms: Vec<LaurentRational>,
    /// `||f - (R_1 + ... + R_k)||_p^p` after each stage.
    pub residuals: Vec<f64>,
}

impl AtomSequence {
    /// Stage targets `eps ||f||_p^p / 4^{k+1}`.
    pub fn targets(&self) -> Vec<f64> {
        (1..=self.residuals.len()).map(|k| self.eps * self.fp_norm_p / 4f64.powi(k as i32 + 1)).collect()
    }

    pub fn budget_ok(&self) -> bool {
        self.budget_p <= (1.0 + self.eps) * self.fp_norm_p
    }

    pub fn partial_sum(&self) -> LaurentRational {
        self.atoms.iter().fold(LaurentRational::zero(), |acc, a| acc.add(a))
    }
}

/// `a - b`, or zero when the difference is below the rounding level of
/// evaluating a Laurent polynomial with coefficient sum `scale`.
fn significant_diff(a: Complex64, b: Complex64, scale: f64) -> Complex64 {
    let d = a - b;
    if d.norm() <= 16.0 * f64::EPSILON * (a.norm() + scale) {
        ZERO
    } else {
        d
    }
}

/// Midpoint-rule line quasi-norm from values at `theta_j = -pi + 2 pi (j + 1/2)/N`.
fn midpoint_line_norm(values: &[Complex64], p: f64) -> f64 {
    let n = values.len();
    let terms: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| v.norm().powf(p) / one_plus_cos(-PI + 2.0 * PI * (j as f64 + 0.5) / n as f64))
        .collect();
    pairwise_sum(&terms) * 2.0 * PI / n as f64
}

fn line_norm_of_atom(r: &LaurentRational, grid: usize, p: f64) -> f64 {
    midpoint_line_norm(&r.sample_grid(grid, 0.5), p)
}

/// Rational atoms `R_1 = Q_1`, `R_k = Q_k - Q_{k-1}` with
/// `Q_k = build_atom(trig_approx(pullback(f), d_k), plan_k)`.
pub fn rational_sequence(f: &LineFunction, p: f64, eps: f64, schedule: &Schedule) -> Result<AtomSequence> {
    let (_, m) = weierstrass_m(p)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let grid = schedule.norm_grid;
    let f_mid: Vec<Complex64> =
        (0..grid).map(|j| f.eval(x_of_theta(-PI + 2.0 * PI * (j as f64 + 0.5) / grid as f64))).collect();
    if f_mid.iter().all(|v| v.norm() == 0.0) {
        return Ok(AtomSequence { p, eps, budget_p: 0.0, fp_norm_p: 0.0, atoms: Vec::new(), residuals: Vec::new() });
    }
    let fp_norm_p = match lp_quasinorm_line(|x| f.eval(x), p, &[], &QuadOptions::default()) {
        Ok(r) => r.value,
        Err(Error::NoConvergence { .. }) => midpoint_line_norm(&f_mid, p),
        Err(e) => return Err(e),
    };
    let residual_of = |q: &LaurentRational| {
        let s = q.sample_grid(grid, 0.5);
        let scale = q.l1_coeffs();
        let diff: Vec<Complex64> = f_mid.iter().zip(&s).map(|(a, b)| significant_diff(*a, *b, scale)).collect();
        midpoint_line_norm(&diff, p)
    };
    if let Some(r) = f.exact() {
        let residual = residual_of(r);
        let budget_p = line_norm_of_atom(r, grid, p);
        return Ok(AtomSequence { p, eps, budget_p, fp_norm_p, atoms: vec![r.clone()], residuals: vec![residual] });
    }
    let g = pullback_fn(|x| f.eval(x), p, schedule.samples)?;
    let mut atoms = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    let mut previous = LaurentRational::zero();
    for (k, &d) in schedule.degrees.iter().enumerate() {
        let (r, _) = trig_approx(&g, d)?;
        let plan = WeierstrassPlan::with_degree(p, m, d)?;
        let q = build_atom(&r, &plan);
        let residual = residual_of(&q);
        if k >= 3 && residual > residuals[k - 3] / 2.0 {
            return Err(Error::ScheduleStall { stage: k + 1, residual, earlier: residuals[k - 3] });
        }
        atoms.push(q.sub(&previous));
        residuals.push(residual);
        previous = q;
    }
    let norms: Vec<f64> = atoms.iter().map(|a| line_norm_of_atom(a, grid, p)).collect();
    Ok(AtomSequence { p, eps, budget_p: pairwise_sum(&norms), fp_norm_p, atoms, residuals })
}

/// Element of `R_N(i)`: `(2i/(i+z))^{N+1} P_N(2i/(i+z))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinglePoleFit {
    pub big_n: usize,
    /// Coefficients of `P_N` in powers of `v = 2i/(i+z) = 1 + beta(z)`.
    pub poly: Vec<Complex64>,
    pub laurent: LaurentRational,
    pub general: GeneralRational,
    /// Max deviation from the samples on the grid.
    pub sup_residual: f64,
    /// `sum |f - R|^p dx` on the grid.
    pub lp_residual: f64,
}

/// Fejer approximation of `h(w)/(1+w)^{N+1}`, `h(w) = f(alpha(w))`, from line
/// samples of an upper Hardy function.
pub fn single_pole_approx(f: &BoundarySamples, big_n: usize, d: usize) -> Result<SinglePoleFit> {
    if f.domain() != Domain::Line {
        return Err(Error::InvalidParameter("single_pole_approx expects line samples".into()));
    }
    let p = f.p();
    if big_n as f64 * p <= 1.0 {
        return Err(Error::InvalidParameter(format!("N p = {} must exceed 1", big_n as f64 * p)));
    }
    let n = f.n();
    if 2 * d >= n {
        return Err(Error::InvalidParameter(format!("degree {d} too large for {n} samples")));
    }
    let h = f.values();
    let mut ratio: Vec<Complex64> = (0..n)
        .map(|j| {
            if j == 0 {
                ZERO
            } else {
                h[j] / (Complex64::from_polar(1.0, grid_theta(n, j)) + 1.0).powu(big_n as u32 + 1)
            }
        })
        .collect();
    ratio[0] = 0.5 * (ratio[1] + ratio[n - 1]);
    let near = ratio[1].norm().max(ratio[n - 1].norm());
    let far = ratio[8].norm().max(ratio[n - 8].norm());
    let max = ratio.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !max.is_finite() || (near > 4.0 * far && near > 1e-12 * max) {
        return Err(Error::UnboundedRatio { max });
    }
    let spec = fft_forward(&ratio);
    let in_w: Vec<Complex64> = (0..=d)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            spec[j] * (sign * (1.0 - j as f64 / (d + 1) as f64) / n as f64)
        })
        .collect();
    let one_plus_w = [ONE, ONE];
    let lift = (0..=big_n).fold(vec![ONE], |acc, _| poly_mul(&acc, &one_plus_w));
    let laurent = LaurentRational::from_powers(0, &poly_mul(&lift, &in_w));
    let poly = taylor_shift(&in_w, -1.0);
    let fitted = laurent.sample_grid(n, 0.0);
    let scale = laurent.l1_coeffs();
    let mut sup_residual: f64 = 0.0;
    let mut terms = Vec::with_capacity(n);
    for j in 1..n {
        let diff = significant_diff(h[j], fitted[j], scale).norm();
        sup_residual = sup_residual.max(diff);
        terms.push(diff.powf(p) / one_plus_cos(grid_theta(n, j)));
    }
    let general = laurent.to_general();
    Ok(SinglePoleFit {
        big_n,
        poly,
        laurent,
        general,
        sup_residual,
        lp_residual: pairwise_sum(&terms) * 2.0 * PI / n as f64,
    })
}

/// Coefficients of `P(v + a)` in powers of `v`, given those of `P`: here
/// `P(w)` re-expressed in `v = 1 + w` uses `a = -1`.
fn taylor_shift(c: &[Complex64], a: f64) -> Vec<Complex64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = out[j + 1] * a;
            out[j] += t;
        }
    }
    out
}
