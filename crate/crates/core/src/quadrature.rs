//! L^p quasi-norms on the circle and on the line. Line integrals are mapped to
//! `[-pi, pi]` by `x = tan(theta/2)`; declared singular points get a graded
//! geometric mesh whose innermost tail is extrapolated from the cell ratios.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cayley::{one_plus_cos, theta_of_x, BoundarySamples, Domain};
use crate::error::{Error, Result};

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub est_error: f64,
    pub panels: usize,
}

impl QuadratureResult {
    pub fn relative_error(&self) -> f64 {
        self.est_error / self.value.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-8, abs_tol: 1e-14, max_depth: 24, max_panels: 200_000 }
    }
}

/// A point of `[-pi, pi]` where the integrand behaves like `|t - s|^{-gamma}`.
/// `gamma = None` means the exponent is unknown and is inferred from the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub theta: f64,
    pub gamma: Option<f64>,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

/// Deterministic pairwise sum.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
    cell: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

/// One graded side: cells `cells[j]` shrink geometrically toward `s`.
struct GradedSide {
    cells: Vec<usize>,
    gamma: Option<f64>,
}

/// Global-adaptive integration over a set of initial cells, with geometric
/// tail extrapolation at each graded side.
fn integrate_cells(
    f: &dyn Fn(f64) -> f64,
    cells: &[(f64, f64)],
    sides: &[GradedSide],
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    let mut panels = 0usize;
    for (id, &(a, b)) in cells.iter().enumerate() {
        let (value, error) = gk15(f, a, b);
        panels += 1;
        heap.push(Segment { a, b, value, error, depth: 0, cell: id });
    }
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let mut err: f64 = heap.iter().map(|s| s.error).sum();
    while err > (opts.rel_tol * total.abs()).max(opts.abs_tol) * 0.5 && panels < cells.len() + opts.max_panels {
        let Some(seg) = heap.pop() else { break };
        if seg.depth >= opts.max_depth || !(seg.error > 0.0) {
            done.push(seg);
            continue;
        }
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(f, seg.a, mid);
        let (v2, e2) = gk15(f, mid, seg.b);
        panels += 2;
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1, depth: seg.depth + 1, cell: seg.cell });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2, depth: seg.depth + 1, cell: seg.cell });
    }
    done.extend(heap);
    done.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut cell_value = vec![0.0; cells.len()];
    let mut cell_err = vec![0.0; cells.len()];
    for s in &done {
        cell_value[s.cell] += s.value;
        cell_err[s.cell] += s.error;
    }
    let values: Vec<f64> = done.iter().map(|s| s.value).collect();
    let mut errors: Vec<f64> = done.iter().map(|s| s.error).collect();
    let mut tails = Vec::new();
    for side in sides {
        let k = side.cells.len();
        if k < 3 {
            continue;
        }
        let last = cell_value[side.cells[k - 1]];
        let prev = cell_value[side.cells[k - 2]];
        let prev2 = cell_value[side.cells[k - 3]];
        if last == 0.0 {
            continue;
        }
        let r_obs = last / prev;
        let r_obs_prev = prev / prev2;
        let (tail, err) = match side.gamma {
            // cells of c u^{-gamma} (1 + a u) have ratio r (1 - a w); the
            // observed drift e = a w gives a first-order corrected tail
            Some(g) => {
                let r = 2f64.powf(-(1.0 - g));
                let e = 1.0 - r_obs / r;
                let tail = last / (1.0 + e) * (r / (1.0 - r) + e * (0.5 * r) / (1.0 - 0.5 * r));
                (tail, tail.abs() * e * e)
            }
            None => {
                if !(r_obs > 0.0 && r_obs < 1.0) {
                    return Err(Error::NoConvergence { value: total, est_error: f64::INFINITY });
                }
                let tail = last * r_obs / (1.0 - r_obs);
                (tail, tail.abs() * (r_obs / r_obs_prev - 1.0).abs())
            }
        };
        tails.push(tail);
        errors.push(err);
    }
    let value = (pairwise_sum(&values) + pairwise_sum(&tails)).abs();
    let est_error = pairwise_sum(&errors);
    if !value.is_finite() || !est_error.is_finite() || est_error > (opts.rel_tol * value).max(opts.abs_tol) {
        return Err(Error::NoConvergence { value, est_error });
    }
    Ok(QuadratureResult { value, est_error, panels })
}

/// Cells on `[a, b]` (`a < b`) with graded meshes toward the flagged ends.
fn graded_interval(
    a: f64,
    b: f64,
    left: Option<Option<f64>>,
    right: Option<Option<f64>>,
    cells: &mut Vec<(f64, f64)>,
    sides: &mut Vec<GradedSide>,
) {
    let mid = 0.5 * (a + b);
    let mut half = |s: f64, other: f64, gamma: Option<Option<f64>>| match gamma {
        None => cells.push(if s < other { (s, other) } else { (other, s) }),
        Some(g) => {
            // relative to |s|: float spacing there, and the scale of the integrand near a small s
            let stop = if s == 0.0 { 1e-9 } else { 1e-9 * s.abs() };
            let h = other - s;
            let mut ids = Vec::new();
            let mut w = h;
            while w.abs() > stop {
                let outer = s + w;
                let inner = s + 0.5 * w;
                ids.push(cells.len());
                cells.push(if inner < outer { (inner, outer) } else { (outer, inner) });
                w *= 0.5;
            }
            sides.push(GradedSide { cells: ids, gamma: g });
        }
    };
    half(a, mid, left);
    half(b, mid, right);
}

/// Integrates `integrand` over `[a, b]` with graded meshes at `singular`;
/// `end_a` and `end_b` mark the endpoints as singular.
pub fn integrate_interval(
    integrand: &dyn Fn(f64) -> f64,
    (a, b): (f64, f64),
    singular: &[Singularity],
    end_a: Option<Option<f64>>,
    end_b: Option<Option<f64>>,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let mut pts: Vec<Singularity> = singular.iter().copied().filter(|s| s.theta > a && s.theta < b).collect();
    pts.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    pts.dedup_by(|x, y| x.theta == y.theta);
    let mut breaks = vec![(a, end_a)];
    breaks.extend(pts.iter().map(|s| (s.theta, Some(s.gamma))));
    breaks.push((b, end_b));
    let mut cells = Vec::new();
    let mut sides = Vec::new();
    for w in breaks.windows(2) {
        graded_interval(w[0].0, w[1].0, w[0].1, w[1].1, &mut cells, &mut sides);
    }
    integrate_cells(integrand, &cells, &sides, opts)
}

/// Integrates `integrand` over `[-pi, pi]` with graded meshes at `singular`.
/// `end_gamma` marks `+-pi` as singular.
pub fn integrate_theta(
    integrand: &dyn Fn(f64) -> f64,
    singular: &[Singularity],
    end_gamma: Option<Option<f64>>,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    integrate_interval(integrand, (-PI, PI), singular, end_gamma, end_gamma, opts)
}

/// `int_R h(x) dx` for `h >= 0` with singular points `(x_k, gamma_k)`. The
/// part `|x| <= 1` uses `x = tan(t/2)` and the part `|x| >= 1` uses
/// `x = -cot(t/2)`, so the point at infinity sits at `t = 0` exactly.
pub fn integrate_line(h: &dyn Fn(f64) -> f64, singular: &[(f64, f64)], opts: &QuadOptions) -> Result<QuadratureResult> {
    let q = FRAC_PI_2;
    let inner = |t: f64| h((0.5 * t).tan()) / one_plus_cos(t);
    let outer = |t: f64| {
        let (s, c) = (0.5 * t).sin_cos();
        h(-c / s) / (2.0 * s * s)
    };
    let (mut sing_in, mut sing_out) = (Vec::new(), vec![Singularity { theta: 0.0, gamma: None }]);
    let (mut in_a, mut in_b, mut out_a, mut out_b) = (None, None, None, None);
    for &(x, g) in singular {
        match x {
            x if x == -1.0 => (in_a, out_b) = (Some(Some(g)), Some(Some(g))),
            x if x == 1.0 => (in_b, out_a) = (Some(Some(g)), Some(Some(g))),
            x if x.abs() < 1.0 => sing_in.push(Singularity { theta: theta_of_x(x), gamma: Some(g) }),
            x => sing_out.push(Singularity { theta: -2.0 * (1.0 / x).atan(), gamma: Some(g) }),
        }
    }
    let a = integrate_interval(&inner, (-q, q), &sing_in, in_a, in_b, opts)?;
    let b = integrate_interval(&outer, (-q, q), &sing_out, out_a, out_b, opts)?;
    Ok(QuadratureResult { value: a.value + b.value, est_error: a.est_error + b.est_error, panels: a.panels + b.panels })
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} outside (0, 2]")));
    }
    Ok(())
}

/// `int_{-pi}^{pi} |g(theta)|^p dtheta` for an evaluator on the circle.
pub fn lp_quasinorm_circle<G>(g: G, p: f64, singular: &[Singularity], opts: &QuadOptions) -> Result<QuadratureResult>
where
    G: Fn(f64) -> Complex64,
{
    check_p(p)?;
    let integrand = |t: f64| g(t).norm().powf(p);
    integrate_theta(&integrand, singular, None, opts)
}

/// Periodic trapezoid rule on circle samples; the error estimate compares
/// against the half-resolution rule.
pub fn lp_quasinorm_samples(g: &BoundarySamples, p: f64) -> Result<QuadratureResult> {
    check_p(p)?;
    if g.domain() != Domain::Circle {
        return Err(Error::InvalidParameter("samples must live on the circle".into()));
    }
    let n = g.n();
    let pw: Vec<f64> = g.values().iter().map(|v| v.norm().powf(p)).collect();
    let full = pairwise_sum(&pw) * 2.0 * PI / n as f64;
    let even: Vec<f64> = pw.iter().step_by(2).copied().collect();
    let half = pairwise_sum(&even) * 4.0 * PI / n as f64;
    Ok(QuadratureResult { value: full, est_error: (full - half).abs(), panels: n })
}

/// `int_R |f(x)|^p dx` with declared real singularities `(a_k, l_k)`.
pub fn lp_quasinorm_line<F>(f: F, p: f64, singularities: &[(f64, u32)], opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    check_p(p)?;
    for &(a, l) in singularities {
        if p * l as f64 >= 1.0 {
            return Err(Error::NonIntegrableSingularity { location: a, order: l, p });
        }
    }
    let sing: Vec<(f64, f64)> = singularities.iter().map(|&(a, l)| (a, p * l as f64)).collect();
    integrate_line(&|x| f(x).norm().powf(p), &sing, opts)
}

/// Line quasi-norm of a function already parametrised by `theta`:
/// `int |h(theta)|^p / (1 + cos theta) dtheta`.
pub fn lp_quasinorm_theta<H>(h: H, p: f64, singular: &[Singularity], opts: &QuadOptions) -> Result<QuadratureResult>
where
    H: Fn(f64) -> Complex64,
{
    check_p(p)?;
    let integrand = |t: f64| h(t).norm().powf(p) / one_plus_cos(t);
    integrate_theta(&integrand, singular, Some(None), opts)
}

/// `int_R |f(x + iy)|^p dx` for `y != 0`; `f` is evaluated off the axis.
pub fn line_norm_at_height<F>(f: F, p: f64, y: f64, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    check_p(p)?;
    if !(y.abs() > 0.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("height y = {y} must be nonzero")));
    }
    integrate_line(&|x| f(Complex64::new(x, y)).norm().powf(p), &[], opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::x_of_theta;
    use statrs::function::gamma::gamma;

    fn opts() -> QuadOptions {
        QuadOptions::default()
    }

    #[test]
    fn constant_and_unimodular_on_circle() {
        for p in [0.3, 0.75, 1.0, 2.0] {
            let r = lp_quasinorm_circle(|_| Complex64::new(1.0, 0.0), p, &[], &opts()).unwrap();
            assert!((r.value - 2.0 * PI).abs() < 1e-12);
        }
        let r = lp_quasinorm_circle(|t| Complex64::from_polar(1.0, t), 0.75, &[], &opts()).unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn fractional_cosine_power_matches_trapezoid_oracle() {
        let n = 1usize << 20;
        let h = 2.0 * PI / n as f64;
        let samples: Vec<f64> = (0..n).map(|j| one_plus_cos(-PI + h * j as f64).powf(0.25)).collect();
        let oracle = pairwise_sum(&samples) * h;
        let r = lp_quasinorm_circle(|t| Complex64::new(one_plus_cos(t).powf(0.25), 0.0), 1.0, &[], &opts()).unwrap();
        assert!((r.value - oracle).abs() < 1e-7 * oracle, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn lorentzian_line_norms() {
        let r = lp_quasinorm_line(|x| Complex64::new(1.0 / (1.0 + x * x), 0.0), 1.0, &[], &opts()).unwrap();
        assert!((r.value - PI).abs() < 1e-8 * PI);
        let oracle = PI.sqrt() * gamma(0.25) / gamma(0.75);
        let r = lp_quasinorm_line(|x| Complex64::new(1.0 / (1.0 + x * x), 0.0), 0.75, &[], &opts()).unwrap();
        assert!((r.value - oracle).abs() < 1e-8 * oracle, "{} vs {}", r.value, oracle);
        assert!((oracle - 5.2441).abs() < 1e-4);
    }

    #[test]
    fn real_pole_on_a_window() {
        // 1/|x| on [-1, 1], zero outside: int |x|^{-1/2} = 4
        let f = |x: f64| Complex64::new(if x.abs() <= 1.0 { 1.0 / x.abs() } else { 0.0 }, 0.0);
        // the window edges are jumps; they get breakpoints with a bounded profile
        let sing = [
            Singularity { theta: theta_of_x(-1.0), gamma: Some(0.0) },
            Singularity { theta: 0.0, gamma: Some(0.5) },
            Singularity { theta: theta_of_x(1.0), gamma: Some(0.0) },
        ];
        let direct = lp_quasinorm_theta(|t| f(x_of_theta(t)), 0.5, &sing, &opts()).unwrap();
        assert!((direct.value - 4.0).abs() < 1e-8, "{}", direct.value);
    }

    #[test]
    fn rejects_non_integrable_pole() {
        let r = lp_quasinorm_line(|x| Complex64::new(1.0 / x, 0.0), 0.75, &[(0.0, 2)], &opts());
        assert!(matches!(r, Err(Error::NonIntegrableSingularity { order: 2, .. })));
    }

    #[test]
    fn simple_pole_with_decay() {
        let f = |x: f64| Complex64::new(1.0 / (x * (x * x + 1.0)), 0.0);
        let r = lp_quasinorm_line(f, 0.5, &[(0.0, 1)], &opts()).unwrap();
        // int |x|^{-1/2} (1+x^2)^{-1/2} dx = 2 * (1/2) B(1/4, 1/4)
        let oracle = gamma(0.25).powi(2) / gamma(0.5);
        assert!((r.value - oracle).abs() < 1e-7 * oracle, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn height_norm() {
        let f = |z: Complex64| (z + Complex64::new(0.0, 1.0)).powi(-2);
        let r = line_norm_at_height(f, 1.0, 1.0, &opts()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-8);
        let z = line_norm_at_height(|_| Complex64::new(0.0, 0.0), 0.75, 1.0, &opts()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn samples_trapezoid() {
        let s = BoundarySamples::sample_circle(|t| Complex64::from_polar(2.0, t), 0.5, 64).unwrap();
        let r = lp_quasinorm_samples(&s, 0.5).unwrap();
        assert!((r.value - 2.0 * PI * 2f64.sqrt()).abs() < 1e-12);
    }
}
