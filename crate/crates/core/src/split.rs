//! Splitting of rational atoms into upper and lower Hardy pieces through the
//! family `P = beta^m R / (beta^m - e^{i phi})`, `Q = R - P`, the atom-wise
//! decomposition driver, and the real-pole blend of a conjugate pair.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::approx::{rational_sequence, AtomSequence, LineFunction, Schedule};
use crate::cayley::{beta, one_plus_cos};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_theta, QuadOptions, QuadratureResult, Singularity};
use crate::rational::{
    certify_lp, mixed_horner, zero_order_at_minus_one, BoundaryModulus, GeneralRational, LaurentRational, Pole,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default number of uniform phase candidates.
pub const DEFAULT_PHI_GRID: usize = 64;

/// `2 pi / (1 - p)`.
pub fn split_constant(p: f64) -> f64 {
    2.0 * PI / (1.0 - p)
}

/// `N(w) / (w^m - e^{i phi})` with `w = beta(z)` and `N` a Laurent polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFraction {
    num: LaurentRational,
    shifted: LaurentRational,
    m: usize,
    phi: f64,
}

impl PhiFraction {
    pub fn new(num: LaurentRational, m: usize, phi: f64) -> Self {
        let shifted = num.mul(&LaurentRational::monomial(-(m as i64), Complex64::new(1.0, 0.0)));
        PhiFraction { num, shifted, m, phi }
    }

    pub fn numerator(&self) -> &LaurentRational {
        &self.num
    }

    fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi)
    }

    /// Real poles `tan((phi + 2k pi)/(2m))`, increasing, excluding the one
    /// mapped to infinity.
    pub fn real_poles(&self) -> Vec<f64> {
        if self.num.is_zero() {
            return Vec::new();
        }
        let mut v: Vec<f64> = pole_thetas(self.m, self.phi).iter().map(|t| (0.5 * t).tan()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Value on the line at `x = tan(theta/2)`.
    pub fn eval_theta(&self, theta: f64) -> Complex64 {
        let den = Complex64::from_polar(1.0, self.m as f64 * theta) - self.phase();
        self.num.eval_theta(theta) / den
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval_theta(crate::cayley::theta_of_x(x))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.num.is_zero() {
            return Ok(ZERO);
        }
        if z == -I {
            if self.shifted.order_at_minus_i() > 0 {
                return Err(Error::EvalAtPole("-i".into()));
            }
            return Ok(self.shifted.coeff(0));
        }
        let w = beta(z)?;
        if w.norm() <= 1.0 {
            let den = w.powu(self.m as u32) - self.phase();
            if den.norm() == 0.0 {
                return Err(Error::EvalAtPole(format!("{z}")));
            }
            Ok(self.num.eval(z)? / den)
        } else {
            let winv = w.inv();
            let den = 1.0 - self.phase() * winv.powu(self.m as u32);
            Ok(self.shifted.eval_w(w) / den)
        }
    }

    /// The same function as `numerator(z) / (lead prod (z - a)^l)`.
    pub fn to_general(&self) -> GeneralRational {
        if self.num.is_zero() {
            return GeneralRational::zero();
        }
        let m = self.m;
        let big_b = self.num.order_at_i();
        let big_a = self.num.order_at_minus_i().max(m);
        let e: Vec<Complex64> = (0..=big_a + big_b).map(|j| self.num.coeff(j as i64 - big_b as i64)).collect();
        let mut numerator = mixed_horner(&e);
        let order = zero_order_at_minus_one(&e);
        numerator.truncate(big_a + big_b + 1 - order.min(big_a + big_b));
        let xs = self.real_poles();
        // (i - z)^m - c (z + i)^m = lead * prod (z - x_k); at z = i it is -c (2i)^m
        let mut lead = -self.phase();
        for _ in xs.len()..m {
            lead *= 2.0 * I;
        }
        for &x in &xs {
            lead *= 2.0 * I / (I - x);
        }
        if big_b % 2 == 1 {
            lead = -lead;
        }
        let mut poles: Vec<Pole> = xs.iter().map(|&x| Pole { location: Complex64::new(x, 0.0), order: 1 }).collect();
        if big_a > m {
            poles.push(Pole { location: -I, order: (big_a - m) as u32 });
        }
        if big_b > 0 {
            poles.push(Pole { location: I, order: big_b as u32 });
        }
        GeneralRational::new(numerator, lead, poles)
    }
}

/// Pole angles `(phi + 2k pi)/m` wrapped into `(-pi, pi)`; an angle at `+-pi`
/// (the point at infinity) is dropped.
fn pole_thetas(m: usize, phi: f64) -> Vec<f64> {
    (0..m)
        .filter_map(|k| {
            let t = (phi + 2.0 * PI * k as f64) / m as f64;
            let wrapped = (t + PI).rem_euclid(2.0 * PI) - PI;
            if (wrapped.abs() - PI).abs() < 1e-12 || wrapped == -PI {
                None
            } else {
                Some(wrapped)
            }
        })
        .collect()
}

fn has_pole_at_infinity(m: usize, phi: f64) -> bool {
    pole_thetas(m, phi).len() < m
}

/// `|R|` on the circle: the regular factor `S` of `R = (1+w)^k S` comes from
/// an oversampled FFT grid with 10-point local Lagrange interpolation.
struct CircleInterp {
    modulus: BoundaryModulus,
    values: Vec<Complex64>,
}

const LAGRANGE: usize = 10;

impl CircleInterp {
    fn new(r: &LaurentRational) -> Self {
        let len = (32 * (2 * r.degree() + 1)).next_power_of_two().max(1024);
        let modulus = r.boundary_modulus();
        let values = modulus.quotient_grid(len);
        CircleInterp { modulus, values }
    }

    fn abs(&self, theta: f64) -> f64 {
        self.modulus.factor_at(theta) * self.quotient(theta).norm()
    }

    fn quotient(&self, theta: f64) -> Complex64 {
        let n = self.values.len();
        let s = (theta + PI).rem_euclid(2.0 * PI) * n as f64 / (2.0 * PI);
        let base = s.floor() as i64 - (LAGRANGE as i64 / 2 - 1);
        let t = s - base as f64;
        let mut acc = ZERO;
        for i in 0..LAGRANGE {
            let mut w = 1.0;
            for k in 0..LAGRANGE {
                if k != i {
                    w *= (t - k as f64) / (i as f64 - k as f64);
                }
            }
            acc += self.values[(base + i as i64).rem_euclid(n as i64) as usize] * w;
        }
        acc
    }
}

fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("HARDY_SPLIT_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(0);
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
    })
}

/// `J(phi) = ||P(., phi)||_p^p` given `|R|` on the circle.
fn j_of_phi(
    abs_r: &(dyn Fn(f64) -> f64 + Sync),
    m: usize,
    phi: f64,
    p: f64,
    decay: usize,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if has_pole_at_infinity(m, phi) {
        return Ok(QuadratureResult { value: f64::INFINITY, est_error: 0.0, panels: 0 });
    }
    let mut poles = pole_thetas(m, phi);
    poles.sort_by(f64::total_cmp);
    let sing: Vec<Singularity> = poles.iter().map(|&theta| Singularity { theta, gamma: Some(p) }).collect();
    // |e^{i m t} - e^{i phi}| = 2 |sin(m (t - t_k) / 2)| for every pole t_k;
    // measuring from the nearest declared pole keeps the singularity exactly
    // where the mesh expects it
    let integrand = |t: f64| {
        let idx = poles.partition_point(|&a| a < t);
        let near = [idx.checked_sub(1), (idx < poles.len()).then_some(idx)]
            .into_iter()
            .flatten()
            .map(|i| poles[i])
            .min_by(|a, b| (t - a).abs().total_cmp(&(t - b).abs()))
            .unwrap_or(phi / m as f64);
        let den = 2.0 * (0.5 * m as f64 * (t - near)).sin().abs();
        (abs_r(t) / den).powf(p) / one_plus_cos(t)
    };
    let end = 2.0 - p * decay as f64;
    let end_gamma = if end > 0.0 { Some(end) } else { None };
    integrate_theta(&integrand, &sing, Some(end_gamma), opts)
}

/// Result of splitting one atom.
#[derive(Debug, Clone, Serialize)]
pub struct SplitResult {
    pub phi: f64,
    pub m: usize,
    pub real_poles: Vec<f64>,
    /// `||P||_p^p / ||R||_p^p`.
    pub bound_ratio: f64,
    #[serde(rename = "P")]
    pub p_general: GeneralRational,
    #[serde(rename = "Q")]
    pub q_general: GeneralRational,
    #[serde(skip)]
    pub plus: PhiFraction,
    #[serde(skip)]
    pub minus: PhiFraction,
    /// `||P||_p^p` (equal to `||Q||_p^p`, since `|P| = |Q|` on the line).
    #[serde(skip)]
    pub plus_norm_p: f64,
    #[serde(skip)]
    pub atom_norm_p: f64,
    /// Scanned `(phi, J(phi))`, `J = inf` where a pole sits at infinity.
    #[serde(skip)]
    pub scan: Vec<(f64, f64)>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl SplitResult {
    fn zero(p: f64) -> Self {
        let zero = PhiFraction::new(LaurentRational::zero(), 1, 0.0);
        let _ = p;
        SplitResult {
            phi: 0.0,
            m: 1,
            real_poles: Vec::new(),
            bound_ratio: 0.0,
            p_general: GeneralRational::zero(),
            q_general: GeneralRational::zero(),
            plus: zero.clone(),
            minus: zero,
            plus_norm_p: 0.0,
            atom_norm_p: 0.0,
            scan: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Mean of the finite scanned `J(phi)` values.
    pub fn scan_mean(&self) -> f64 {
        let finite: Vec<f64> = self.scan.iter().map(|s| s.1).filter(|v| v.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len().max(1) as f64
    }
}

/// Scans `phi` for the fraction `beta^m D / (beta^m - e^{i phi})`, refining the
/// best grid point by golden-section search; returns `(phi, J, scan)`.
fn select_phi(d: &LaurentRational, m: usize, p: f64, candidates: usize) -> Result<(f64, QuadratureResult, Vec<(f64, f64)>)> {
    let interp = CircleInterp::new(d);
    let abs_r = |t: f64| interp.abs(t);
    let decay = d.zero_order_at_infinity();
    let scan_opts = QuadOptions { rel_tol: 1e-6, ..Default::default() };
    let phis: Vec<f64> = (0..candidates).map(|j| -PI + 2.0 * PI * j as f64 / candidates as f64).collect();
    let values: Vec<Result<f64>> = thread_pool().install(|| {
        phis.par_iter().map(|&phi| j_of_phi(&abs_r, m, phi, p, decay, &scan_opts).map(|r| r.value)).collect()
    });
    let mut scan = Vec::with_capacity(candidates);
    for (phi, v) in phis.iter().zip(values) {
        scan.push((*phi, v?));
    }
    // lowest phi wins ties
    let (best_idx, _) = scan
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |acc, (i, s)| if s.1 < acc.1 { (i, s.1) } else { acc });
    let step = 2.0 * PI / candidates as f64;
    let j_at = |phi: f64| j_of_phi(&abs_r, m, phi, p, decay, &scan_opts).map(|r| r.value).unwrap_or(f64::INFINITY);
    let (mut a, mut b) = (scan[best_idx].0 - step, scan[best_idx].0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fe) = (j_at(c), j_at(e));
    for _ in 0..16 {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = j_at(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = j_at(e);
        }
    }
    let refined = if fc <= fe { (c, fc) } else { (e, fe) };
    let mut phi = if refined.1 < scan[best_idx].1 { refined.0 } else { scan[best_idx].0 };
    phi = (phi + PI).rem_euclid(2.0 * PI) - PI;
    let modulus = d.boundary_modulus();
    let exact_abs = |t: f64| modulus.eval(t);
    let exact = j_of_phi(&exact_abs, m, phi, p, decay, &QuadOptions::default())?;
    Ok((phi, exact, scan))
}

/// Splits `R` into `P` (analytic in the upper half-plane) and `Q` (analytic
/// in the lower one) with `||P||_p^p <= 2 pi / (1 - p) ||R||_p^p`.
pub fn split_atom(r: &LaurentRational, p: f64, candidates: usize) -> Result<SplitResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
    }
    if candidates < 16 {
        return Err(Error::InvalidParameter(format!("need at least 16 phase candidates, got {candidates}")));
    }
    if r.is_zero() {
        return Ok(SplitResult::zero(p));
    }
    let membership = certify_lp(&r.certificate(), p);
    if !membership.member {
        return Err(Error::NotInLp(membership.reasons.join("; ")));
    }
    let mut warnings = Vec::new();
    if p > 0.95 {
        warnings.push(format!("p = {p} > 0.95: the split constant 2pi/(1-p) = {:.1} is poorly conditioned", split_constant(p)));
    }
    let m = r.degree() + 1;
    let atom_norm_p = {
        let decay = r.zero_order_at_infinity();
        let end = 2.0 - p * decay as f64;
        let modulus = r.boundary_modulus();
        let integrand = |t: f64| modulus.eval(t).powf(p) / one_plus_cos(t);
        integrate_theta(&integrand, &[], Some(if end > 0.0 { Some(end) } else { None }), &QuadOptions::default())?.value
    };
    let (phi, j, scan) = select_phi(r, m, p, candidates)?;
    let bound = split_constant(p) * atom_norm_p;
    if !(j.value <= bound) {
        return Err(Error::BoundNotMet { best: j.value, bound });
    }
    let c = Complex64::from_polar(1.0, phi);
    let plus = PhiFraction::new(r.mul(&LaurentRational::monomial(m as i64, Complex64::new(1.0, 0.0))), m, phi);
    let minus = PhiFraction::new(r.scale(-c), m, phi);
    Ok(SplitResult {
        phi,
        m,
        real_poles: plus.real_poles(),
        bound_ratio: j.value / atom_norm_p,
        p_general: plus.to_general(),
        q_general: minus.to_general(),
        plus,
        minus,
        plus_norm_p: j.value,
        atom_norm_p,
        scan,
        warnings,
    })
}

/// `A_p = 2 (1 + 2 pi / (1 - p))`.
pub fn budget_constant(p: f64) -> f64 {
    2.0 * (1.0 + split_constant(p))
}

/// Atom-wise split of an L^p function into upper and lower Hardy parts.
#[derive(Debug, Clone, Serialize)]
pub struct AtomDecomposition {
    pub p: f64,
    pub eps: f64,
    pub f_norm_p: f64,
    /// `sum (||P_k||_p^p + ||Q_k||_p^p)`.
    pub budget: f64,
    pub budget_bound: f64,
    pub residuals: Vec<f64>,
    pub splits: Vec<SplitResult>,
    #[serde(skip)]
    pub sequence: AtomSequence,
}

impl AtomDecomposition {
    /// Upper pieces `P_k`.
    pub fn plus_atoms(&self) -> impl Iterator<Item = &PhiFraction> {
        self.splits.iter().map(|s| &s.plus)
    }

    /// Lower pieces `Q_k`.
    pub fn minus_atoms(&self) -> impl Iterator<Item = &PhiFraction> {
        self.splits.iter().map(|s| &s.minus)
    }
}

/// Runs the atom pipeline and splits every atom.
pub fn decompose(f: &LineFunction, p: f64, eps: f64, schedule: &Schedule, candidates: usize) -> Result<AtomDecomposition> {
    let sequence = rational_sequence(f, p, eps, schedule)?;
    let splits = sequence.atoms.iter().map(|a| split_atom(a, p, candidates)).collect::<Result<Vec<_>>>()?;
    let budget = splits.iter().fold(0.0, |acc, s| acc + 2.0 * s.plus_norm_p);
    let budget_bound = budget_constant(p) * sequence.fp_norm_p;
    if budget > budget_bound {
        return Err(Error::BoundNotMet { best: budget, bound: budget_bound });
    }
    Ok(AtomDecomposition {
        p,
        eps,
        f_norm_p: sequence.fp_norm_p,
        budget,
        budget_bound,
        residuals: sequence.residuals.clone(),
        splits,
        sequence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorValue {
    pub value: Complex64,
    /// Bound on the contribution of the atoms not yet computed.
    pub tail: f64,
}

/// `g(z) = sum P_k(z)` for `Im z > 0`, `h(z) = sum Q_k(z)` for `Im z < 0`.
pub fn interior_sum_eval(decomp: &AtomDecomposition, z: Complex64) -> Result<InteriorValue> {
    if z.im == 0.0 {
        return Err(Error::OnRealAxis);
    }
    let mut value = ZERO;
    for s in &decomp.splits {
        value += if z.im > 0.0 { s.plus.eval(z)? } else { s.minus.eval(z)? };
    }
    // the remainder f - sum R_k splits with mass at most 2pi/(1-p) times its
    // own, and an H^p function obeys |F(x+iy)|^p <= 2/(pi y) ||F||_p^p
    let tail = match decomp.residuals.last() {
        Some(r) => (2.0 / (PI * z.im.abs()) * split_constant(decomp.p) * r).powf(1.0 / decomp.p),
        None => 0.0,
    };
    Ok(InteriorValue { value, tail })
}

/// Result of blending an upper and a lower single-pole function into one
/// with real poles only.
#[derive(Debug, Clone, Serialize)]
pub struct BlendResult {
    pub phi: f64,
    pub m: usize,
    pub real_poles: Vec<f64>,
    /// `||R(., phi) - R1||_p^p`.
    pub distance_p: f64,
    /// `2 pi / (1 - p) ||R1 - R2||_p^p`.
    pub bound: f64,
    pub rational: GeneralRational,
    #[serde(skip)]
    pub fraction: PhiFraction,
}

/// `R(z, phi) = (beta^m R2 - e^{i phi} R1) / (beta^m - e^{i phi})`, which equals
/// `R1` minus the upper split piece of `R1 - R2`.
pub fn real_pole_blend(r1: &LaurentRational, r2: &LaurentRational, p: f64, candidates: usize) -> Result<BlendResult> {
    if r1.order_at_i() > 0 {
        return Err(Error::InvalidParameter("R1 must have its poles at -i only".into()));
    }
    if r2.order_at_minus_i() > 0 {
        return Err(Error::InvalidParameter("R2 must have its poles at i only".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
    }
    let diff = r1.sub(r2);
    if diff.is_zero() {
        let fraction = PhiFraction::new(LaurentRational::zero(), 1, 0.0);
        return Ok(BlendResult {
            phi: 0.0,
            m: 1,
            real_poles: Vec::new(),
            distance_p: 0.0,
            bound: 0.0,
            rational: r1.to_general(),
            fraction,
        });
    }
    let split = split_atom(&diff, p, candidates)?;
    let m = split.m;
    let c = Complex64::from_polar(1.0, split.phi);
    let num = r2.mul(&LaurentRational::monomial(m as i64, Complex64::new(1.0, 0.0))).sub(&r1.scale(c));
    let fraction = PhiFraction::new(num, m, split.phi);
    Ok(BlendResult {
        phi: split.phi,
        m,
        real_poles: fraction.real_poles(),
        distance_p: split.plus_norm_p,
        bound: split_constant(p) * split.atom_norm_p,
        rational: fraction.to_general(),
        fraction,
    })
}
