//! Rational functions whose poles sit at `+-i`, stored as Laurent polynomials
//! in `beta(z) = (i - z)/(z + i)`, plus the general `P(z)/Q(z)` form used for
//! pole reporting and the L^p / H^p certification of a pole structure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{beta, beta_inv};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size below which an outer Laurent coefficient is dropped.
pub const TRUNCATION: f64 = 1e-13;

/// `R(z) = sum_{k=-n}^{n} c_k beta(z)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "LaurentWire", try_from = "LaurentWire")]
pub struct LaurentRational {
    n: usize,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct LaurentWire {
    n: usize,
    coeffs_re: Vec<f64>,
    coeffs_im: Vec<f64>,
}

impl From<LaurentRational> for LaurentWire {
    fn from(r: LaurentRational) -> Self {
        LaurentWire {
            n: r.n,
            coeffs_re: r.coeffs.iter().map(|c| c.re).collect(),
            coeffs_im: r.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

impl TryFrom<LaurentWire> for LaurentRational {
    type Error = Error;

    fn try_from(w: LaurentWire) -> Result<Self> {
        let len = 2 * w.n + 1;
        if w.coeffs_re.len() != len || w.coeffs_im.len() != len {
            return Err(Error::InvalidParameter(format!(
                "Laurent degree {} needs {} coefficients, got {}/{}",
                w.n,
                len,
                w.coeffs_re.len(),
                w.coeffs_im.len()
            )));
        }
        let coeffs = w.coeffs_re.into_iter().zip(w.coeffs_im).map(|(a, b)| Complex64::new(a, b)).collect();
        LaurentRational::new(coeffs)
    }
}

impl LaurentRational {
    /// Coefficients ordered `k = -n..=n`; the length must be odd.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidParameter("Laurent coefficient list must have odd length".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite Laurent coefficient".into()));
        }
        let n = coeffs.len() / 2;
        let mut r = LaurentRational { n, coeffs };
        r.normalize();
        Ok(r)
    }

    /// Coefficients of the powers `lo, lo+1, ...`.
    pub fn from_powers(lo: i64, coeffs: &[Complex64]) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        let hi = lo + coeffs.len() as i64 - 1;
        let n = lo.abs().max(hi.abs()) as usize;
        let mut full = vec![ZERO; 2 * n + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            full[(lo + j as i64 + n as i64) as usize] = c;
        }
        let mut r = LaurentRational { n, coeffs: full };
        r.normalize();
        r
    }

    pub fn zero() -> Self {
        LaurentRational { n: 0, coeffs: vec![ZERO] }
    }

    pub fn constant(c: Complex64) -> Self {
        LaurentRational { n: 0, coeffs: vec![c] }
    }

    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::from_powers(k, &[c])
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.n as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// Sum of coefficient moduli; bounds `|R(x)|` on the real line.
    pub fn l1_coeffs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc + c.norm())
    }

    fn normalize(&mut self) {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            *self = Self::zero();
            return;
        }
        let cut = TRUNCATION * max;
        let len = self.coeffs.len();
        let mut lo = 0;
        while self.coeffs[lo].norm() <= cut {
            self.coeffs[lo] = ZERO;
            lo += 1;
        }
        let mut hi = len - 1;
        while self.coeffs[hi].norm() <= cut {
            self.coeffs[hi] = ZERO;
            hi -= 1;
        }
        let n = self.n as i64;
        let new_n = (lo as i64 - n).abs().max(hi as i64 - n) as usize;
        if new_n < self.n {
            let shift = self.n - new_n;
            self.coeffs = self.coeffs[shift..len - shift].to_vec();
            self.n = new_n;
        }
    }

    /// Order of the pole at `-i` (largest positive power present).
    pub fn order_at_minus_i(&self) -> usize {
        (1..=self.n).rev().find(|&k| self.coeff(k as i64).norm() != 0.0).unwrap_or(0)
    }

    /// Order of the pole at `i` (largest negative power present).
    pub fn order_at_i(&self) -> usize {
        (1..=self.n).rev().find(|&k| self.coeff(-(k as i64)).norm() != 0.0).unwrap_or(0)
    }

    /// Laurent value at `w`; requires `w != 0` unless the negative tail is empty.
    pub fn eval_w(&self, w: Complex64) -> Complex64 {
        let n = self.n;
        let mut pos = ZERO;
        for k in (0..=n).rev() {
            pos = pos * w + self.coeffs[n + k];
        }
        if self.order_at_i() == 0 {
            return pos;
        }
        let winv = w.inv();
        let mut neg = ZERO;
        for k in (1..=n).rev() {
            neg = neg * winv + self.coeffs[n - k];
        }
        pos + neg * winv
    }

    /// Value on the circle at `w = e^{i theta}` (a single Horner pass).
    pub fn eval_theta(&self, theta: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * Complex64::from_polar(1.0, -(self.n as f64) * theta)
    }

    /// Values at `theta_j = -pi + 2 pi (j + shift) / len`, `j = 0..len`, via one
    /// inverse FFT. `len` must exceed `2n`.
    pub fn sample_grid(&self, len: usize, shift: f64) -> Vec<Complex64> {
        assert!(len > 2 * self.n, "grid of {len} points too coarse for degree {}", self.n);
        let mut buf = vec![ZERO; len];
        for (idx, c) in self.coeffs.iter().enumerate() {
            let k = idx as i64 - self.n as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let phase = Complex64::from_polar(sign, 2.0 * std::f64::consts::PI * k as f64 * shift / len as f64);
            buf[k.rem_euclid(len as i64) as usize] += c * phase;
        }
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_inverse(len).process(&mut buf);
        buf
    }

    /// Boundary value at real `x`.
    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval_theta(crate::cayley::theta_of_x(x))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z == -I {
            if self.order_at_minus_i() > 0 {
                return Err(Error::EvalAtPole("-i".into()));
            }
            return Ok(self.coeff(0));
        }
        if z == I {
            if self.order_at_i() > 0 {
                return Err(Error::EvalAtPole("i".into()));
            }
            return Ok(self.coeff(0));
        }
        let w = beta(z)?;
        let n = self.n;
        let mut pos = ZERO;
        for k in (0..=n).rev() {
            pos = pos * w + self.coeffs[n + k];
        }
        if self.order_at_i() == 0 {
            return Ok(pos);
        }
        let winv = beta_inv(z)?;
        let mut neg = ZERO;
        for k in (1..=n).rev() {
            neg = neg * winv + self.coeffs[n - k];
        }
        Ok(pos + neg * winv)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut r = LaurentRational { n: self.n, coeffs: self.coeffs.iter().map(|c| c * s).collect() };
        r.normalize();
        r
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.n.max(other.n);
        let coeffs = (-(n as i64)..=n as i64).map(|k| self.coeff(k) + other.coeff(k)).collect();
        let mut r = LaurentRational { n, coeffs };
        r.normalize();
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let mut coeffs = vec![ZERO; 2 * n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut r = LaurentRational { n, coeffs };
        r.normalize();
        r
    }

    /// Order of the zero of `sum c_k w^k` at `w = -1`, i.e. the decay rate
    /// `|R(x)| ~ |x|^{-order}` at infinity.
    pub fn zero_order_at_infinity(&self) -> usize {
        zero_order_at_minus_one(&self.coeffs)
    }

    /// `R = (1 + w)^k S(w)` with `k` the zero order at `w = -1`, so that `|R|`
    /// keeps its relative accuracy next to the point at infinity.
    pub fn boundary_modulus(&self) -> BoundaryModulus {
        let order = self.zero_order_at_infinity();
        let mut cur = self.coeffs.clone();
        for _ in 0..order {
            // divide the ascending polynomial w^n R(w) by (w + 1)
            let deg = cur.len() - 1;
            let mut q = vec![ZERO; deg];
            let mut acc = ZERO;
            for j in (1..=deg).rev() {
                acc = cur[j] - acc;
                q[j - 1] = acc;
            }
            cur = q;
        }
        let quotient = LaurentRational { n: self.n, coeffs: cur };
        BoundaryModulus { order, quotient_lo: -(self.n as i64), quotient }
    }

    /// Pole data read off the Laurent structure: poles at `-i` and `i` only,
    /// and decay `|x|^{-order}` from the zero at `w = -1`.
    pub fn certificate(&self) -> PoleCertificate {
        let mut complex_poles = Vec::new();
        if self.order_at_minus_i() > 0 {
            complex_poles.push((-I, self.order_at_minus_i() as u32));
        }
        if self.order_at_i() > 0 {
            complex_poles.push((I, self.order_at_i() as u32));
        }
        let degree_gap = if self.is_zero() { i64::MIN / 2 } else { -(self.zero_order_at_infinity() as i64) };
        PoleCertificate { real_poles: Vec::new(), complex_poles, degree_gap }
    }

    /// Clears the `beta` powers into a rational function of `z`.
    pub fn to_general(&self) -> GeneralRational {
        if self.is_zero() {
            return GeneralRational::zero();
        }
        let a = self.order_at_minus_i();
        let b = self.order_at_i();
        // numerator = sum_k c_k (i - z)^{k+b} (z + i)^{a-k}
        let e: Vec<Complex64> = (0..=a + b).map(|j| self.coeff(j as i64 - b as i64)).collect();
        let mut numerator = mixed_horner(&e);
        let gap_order = self.zero_order_at_infinity();
        numerator.truncate(a + b + 1 - gap_order.min(a + b));
        let mut poles = Vec::new();
        if a > 0 {
            poles.push(Pole { location: -I, order: a as u32 });
        }
        if b > 0 {
            poles.push(Pole { location: I, order: b as u32 });
        }
        // (i - z)^b = (-1)^b (z - i)^b
        let lead = if b % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) };
        GeneralRational { numerator, lead, poles }
    }
}

/// `|R(e^{i theta})| = (2 |cos(theta/2)|)^k |S(e^{i theta})|`.
#[derive(Debug, Clone)]
pub struct BoundaryModulus {
    order: usize,
    quotient_lo: i64,
    quotient: LaurentRational,
}

impl BoundaryModulus {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `S(e^{i theta})`.
    pub fn quotient_at(&self, theta: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, theta);
        let mut acc = ZERO;
        for c in self.quotient.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * Complex64::from_polar(1.0, self.quotient_lo as f64 * theta)
    }

    /// `(2 |cos(theta/2)|)^k`.
    pub fn factor_at(&self, theta: f64) -> f64 {
        (2.0 * crate::cayley::one_plus_cos(theta)).sqrt().powi(self.order as i32)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.factor_at(theta) * self.quotient_at(theta).norm()
    }

    /// `|R(beta(x))|`, using `|1 + beta(x)| = 2 / sqrt(1 + x^2)` for the factor.
    pub fn eval_line(&self, x: f64) -> f64 {
        (2.0 / x.hypot(1.0)).powi(self.order as i32) * self.quotient_at(crate::cayley::theta_of_x(x)).norm()
    }

    /// `S` on the uniform grid `theta_j = -pi + 2 pi j / len`.
    pub fn quotient_grid(&self, len: usize) -> Vec<Complex64> {
        let mut buf = vec![ZERO; len];
        for (idx, c) in self.quotient.coeffs.iter().enumerate() {
            let k = self.quotient_lo + idx as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[k.rem_euclid(len as i64) as usize] += c * sign;
        }
        let mut planner = rustfft::FftPlanner::new();
        planner.plan_fft_inverse(len).process(&mut buf);
        buf
    }
}

/// `sum_j e_j (i - z)^j (z + i)^{J - j}` as ascending coefficients in `z`.
pub(crate) fn mixed_horner(e: &[Complex64]) -> Vec<Complex64> {
    let big_j = e.len() - 1;
    let u = [I, Complex64::new(-1.0, 0.0)]; // i - z
    let v = [I, Complex64::new(1.0, 0.0)]; // z + i
    let mut h = vec![e[big_j]];
    let mut vpow = vec![Complex64::new(1.0, 0.0)];
    for j in (0..big_j).rev() {
        h = poly_mul(&h, &u);
        vpow = poly_mul(&vpow, &v);
        for (t, c) in vpow.iter().enumerate() {
            if t < h.len() {
                h[t] += e[j] * c;
            } else {
                h.push(e[j] * c);
            }
        }
    }
    h.resize(big_j + 1, ZERO);
    h
}

pub(crate) fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Multiplicity of `w = -1` as a root of `sum_j a_j w^j` (ascending), with a
/// relative tolerance on the synthetic-division remainders.
pub(crate) fn zero_order_at_minus_one(a: &[Complex64]) -> usize {
    let scale: f64 = a.iter().map(|c| c.norm()).sum();
    if scale == 0.0 {
        return 0;
    }
    let mut cur: Vec<Complex64> = a.to_vec();
    let mut order = 0;
    while cur.len() > 1 {
        // divide by (w + 1)
        let deg = cur.len() - 1;
        let mut q = vec![ZERO; deg];
        let mut acc = ZERO;
        for j in (0..=deg).rev() {
            acc = cur[j] - acc;
            if j > 0 {
                q[j - 1] = acc;
            }
        }
        // remainder is the value at -1, accumulated with alternating signs
        let rem: Complex64 = cur.iter().enumerate().map(|(j, c)| if j % 2 == 0 { *c } else { -c }).sum();
        if rem.norm() > 1e-10 * scale {
            break;
        }
        order += 1;
        cur = q;
    }
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PoleWire", from = "PoleWire")]
pub struct Pole {
    pub location: Complex64,
    pub order: u32,
}

#[derive(Serialize, Deserialize)]
struct PoleWire {
    re: f64,
    im: f64,
    order: u32,
}

impl From<Pole> for PoleWire {
    fn from(p: Pole) -> Self {
        PoleWire { re: p.location.re, im: p.location.im, order: p.order }
    }
}

impl From<PoleWire> for Pole {
    fn from(w: PoleWire) -> Self {
        Pole { location: Complex64::new(w.re, w.im), order: w.order }
    }
}

/// `numerator(z) / (lead * prod (z - a)^l)`. Numerator and denominator are
/// co-prime by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GeneralWire", from = "GeneralWire")]
pub struct GeneralRational {
    numerator: Vec<Complex64>,
    lead: Complex64,
    poles: Vec<Pole>,
}

#[derive(Serialize, Deserialize)]
struct GeneralWire {
    numerator_re: Vec<f64>,
    numerator_im: Vec<f64>,
    lead_re: f64,
    lead_im: f64,
    poles: Vec<Pole>,
}

impl From<GeneralRational> for GeneralWire {
    fn from(g: GeneralRational) -> Self {
        GeneralWire {
            numerator_re: g.numerator.iter().map(|c| c.re).collect(),
            numerator_im: g.numerator.iter().map(|c| c.im).collect(),
            lead_re: g.lead.re,
            lead_im: g.lead.im,
            poles: g.poles,
        }
    }
}

impl From<GeneralWire> for GeneralRational {
    fn from(w: GeneralWire) -> Self {
        GeneralRational {
            numerator: w.numerator_re.into_iter().zip(w.numerator_im).map(|(a, b)| Complex64::new(a, b)).collect(),
            lead: Complex64::new(w.lead_re, w.lead_im),
            poles: w.poles,
        }
    }
}

impl GeneralRational {
    pub fn new(numerator: Vec<Complex64>, lead: Complex64, poles: Vec<Pole>) -> Self {
        GeneralRational { numerator, lead, poles }
    }

    pub fn zero() -> Self {
        GeneralRational { numerator: Vec::new(), lead: Complex64::new(1.0, 0.0), poles: Vec::new() }
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.numerator
    }

    pub fn lead(&self) -> Complex64 {
        self.lead
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut den = self.lead;
        for p in &self.poles {
            let d = z - p.location;
            if d.norm() == 0.0 {
                return Err(Error::EvalAtPole(format!("{}", p.location)));
            }
            den *= d.powu(p.order);
        }
        let mut num = ZERO;
        for c in self.numerator.iter().rev() {
            num = num * z + c;
        }
        Ok(num / den)
    }

    pub fn certificate(&self) -> PoleCertificate {
        let mut real_poles: Vec<(f64, u32)> = Vec::new();
        let mut complex_poles = Vec::new();
        for p in &self.poles {
            if p.location.im == 0.0 {
                real_poles.push((p.location.re, p.order));
            } else {
                complex_poles.push((p.location, p.order));
            }
        }
        real_poles.sort_by(|a, b| a.0.total_cmp(&b.0));
        let den_deg: i64 = self.poles.iter().map(|p| p.order as i64).sum();
        let num_deg = if self.numerator.is_empty() { 0 } else { self.numerator.len() as i64 - 1 };
        PoleCertificate { real_poles, complex_poles, degree_gap: num_deg - den_deg }
    }
}

/// Pole data from which L^p and H^p membership is decided.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleCertificate {
    /// Strictly increasing real pole locations with their orders.
    pub real_poles: Vec<(f64, u32)>,
    pub complex_poles: Vec<(Complex64, u32)>,
    /// Numerator degree minus denominator degree.
    pub degree_gap: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

impl HalfPlane {
    pub fn sign(self) -> f64 {
        match self {
            HalfPlane::Upper => 1.0,
            HalfPlane::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub reasons: Vec<String>,
}

impl PoleCertificate {
    pub fn new(real_poles: Vec<(f64, u32)>, complex_poles: Vec<(Complex64, u32)>, degree_gap: i64) -> Result<Self> {
        if real_poles.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidParameter("real poles must be strictly increasing".into()));
        }
        if real_poles.iter().any(|r| r.1 == 0) || complex_poles.iter().any(|c| c.1 == 0) {
            return Err(Error::InvalidParameter("pole orders must be positive".into()));
        }
        if complex_poles.iter().any(|c| c.0.im == 0.0) {
            return Err(Error::InvalidParameter("complex pole on the real axis".into()));
        }
        Ok(PoleCertificate { real_poles, complex_poles, degree_gap })
    }
}

/// Membership in L^p(R) for `0 < p < 1`: decay `p (m - n) < -1` at infinity
/// and `p l < 1` at every real pole.
pub fn certify_lp(cert: &PoleCertificate, p: f64) -> Membership {
    let mut reasons = Vec::new();
    if p * cert.degree_gap as f64 >= -1.0 {
        reasons.push(format!(
            "decay: p*(m-n) = {}*{} = {} is not < -1",
            p,
            cert.degree_gap,
            p * cert.degree_gap as f64
        ));
    }
    for &(a, l) in &cert.real_poles {
        if p * l as f64 >= 1.0 {
            reasons.push(format!("real pole at {a} of order {l}: p*l = {} is not < 1", p * l as f64));
        }
    }
    Membership { member: reasons.is_empty(), reasons }
}

/// Membership in H^p of a half-plane: L^p on the boundary and no pole inside.
pub fn certify_hardy(cert: &PoleCertificate, p: f64, half_plane: HalfPlane) -> Membership {
    let mut m = certify_lp(cert, p);
    for &(z, l) in &cert.complex_poles {
        if z.im * half_plane.sign() > 0.0 {
            m.reasons.push(format!("pole {z} of order {l} lies inside the {half_plane:?} half-plane"));
        }
    }
    m.member = m.reasons.is_empty();
    m
}
