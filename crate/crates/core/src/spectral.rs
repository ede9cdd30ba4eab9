//! Fourier analysis of boundary functions under the convention
//! `f^(t) = (1/sqrt(2 pi)) int f(x) e^{-ixt} dx`, the `delta`-invariant
//! function `F(t) = e^{delta t} (f_delta)^(t)`, and the inverse Laplace
//! representation of upper Hardy functions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

pub const CONVENTION: &str = "forward = (1/sqrt(2 pi)) int f(x) e^{-ixt} dx";
/// Edge values above this fraction of the peak are rejected.
pub const EDGE_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_HALF_WIDTH: f64 = 200.0;
pub const DEFAULT_POINTS: usize = 1 << 14;

const SQRT_FRAC_PI_2: f64 = 1.253_314_137_315_500_3;

/// Sampled spectrum on `t_k = pi k / L`, `|k| < n/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumProfile {
    pub convention: &'static str,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub freqs: Vec<f64>,
    #[serde(serialize_with = "ser_re")]
    pub values: Vec<Complex64>,
    /// `sum_{t<0} |f^|^2 / sum_{t != 0} |f^|^2`.
    pub neg_energy_ratio: f64,
}

fn ser_re<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &v.iter().map(|c| c.re).collect::<Vec<_>>())?;
    st.serialize_field("im", &v.iter().map(|c| c.im).collect::<Vec<_>>())?;
    st.end()
}

/// Far-field model: even part `sum a_k q^k`, odd part `sum b_k x q^k`,
/// `q = 1/(x^2+1)`, `k = 1..3`, matched to `f` at `+-L`, `+-2L`, `+-4L`.
#[derive(Debug, Clone, Copy, Default)]
struct TailModel {
    a: [Complex64; 3],
    b: [Complex64; 3],
}

fn solve3(m: [[f64; 3]; 3], r: [Complex64; 3]) -> [Complex64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (col, o) in out.iter_mut().enumerate() {
        // Cramer's rule, split into real and imaginary right-hand sides
        let mut re = m;
        let mut im = m;
        for row in 0..3 {
            re[row][col] = r[row].re;
            im[row][col] = r[row].im;
        }
        *o = Complex64::new(det(re), det(im)) / d;
    }
    out
}

impl TailModel {
    fn fit<F: Fn(f64) -> Complex64>(f: &F, l: f64) -> Self {
        let xs = [l, 2.0 * l, 4.0 * l];
        // columns scaled by L^{2k} to keep Cramer's rule well conditioned
        let s = l * l;
        let q = |x: f64| s / (x * x + 1.0);
        let even: [[f64; 3]; 3] = xs.map(|x| [q(x), q(x).powi(2), q(x).powi(3)]);
        let odd: [[f64; 3]; 3] = xs.map(|x| [x / l * q(x), x / l * q(x).powi(2), x / l * q(x).powi(3)]);
        let a = solve3(even, xs.map(|x| 0.5 * (f(x) + f(-x))));
        let b = solve3(odd, xs.map(|x| 0.5 * (f(x) - f(-x))));
        let mut model = TailModel::default();
        for k in 0..3 {
            let sk = s.powi(k as i32 + 1);
            model.a[k] = a[k] * sk;
            model.b[k] = b[k] * sk / l;
        }
        model
    }

    fn eval(&self, x: f64) -> Complex64 {
        let q = 1.0 / (x * x + 1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut qk = q;
        for k in 0..3 {
            acc += (self.a[k] + self.b[k] * x) * qk;
            qk *= q;
        }
        acc
    }

    /// Closed-form transform under the module convention.
    fn transform(&self, t: f64) -> Complex64 {
        let u = t.abs();
        let e = SQRT_FRAC_PI_2 * (-u).exp();
        let q = [e, e * (1.0 + u) / 2.0, e * (3.0 + 3.0 * u + u * u) / 8.0];
        let i = Complex64::new(0.0, 1.0);
        // x q = (x+i)^{-1} + i q; x q^{k+1} = -(q^k)' / (2k) and (g')^ = i t g^
        let xq = -i * t.signum() * e;
        let xq2 = -0.5 * i * t * q[0];
        let xq3 = -0.25 * i * t * q[1];
        self.a[0] * q[0] + self.a[1] * q[1] + self.a[2] * q[2] + self.b[0] * xq + self.b[1] * xq2 + self.b[2] * xq3
    }
}

/// FFT of `f` on `x_j = -L + j 2L/n` with the far field handled analytically.
pub fn dft_line<F>(f: F, l: f64, n: usize) -> Result<SpectrumProfile>
where
    F: Fn(f64) -> Complex64,
{
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("grid size {n} must be a power of two >= 16")));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidParameter(format!("half-width {l} must be positive")));
    }
    let dx = 2.0 * l / n as f64;
    let xs: Vec<f64> = (0..n).map(|j| -l + dx * j as f64).collect();
    let samples: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
    let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = f(-l).norm().max(f(l).norm());
    if peak > 0.0 && edge > EDGE_THRESHOLD * peak {
        return Err(Error::WindowTooSmall { edge: edge / peak, threshold: EDGE_THRESHOLD });
    }
    let tail = if peak > 0.0 { TailModel::fit(&f, l) } else { TailModel::default() };
    let mut buf: Vec<Complex64> = samples.iter().zip(&xs).map(|(v, &x)| v - tail.eval(x)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = dx / (2.0 * PI).sqrt();
    let half = n as i64 / 2;
    let mut freqs = Vec::with_capacity(n - 1);
    let mut values = Vec::with_capacity(n - 1);
    for k in (1 - half)..half {
        let t = PI * k as f64 / l;
        // e^{iLt_k} = (-1)^k
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let v = buf[k.rem_euclid(n as i64) as usize] * (scale * sign) + tail.transform(t);
        freqs.push(t);
        values.push(v);
    }
    let neg: f64 = freqs.iter().zip(&values).filter(|(t, _)| **t < 0.0).map(|(_, v)| v.norm_sqr()).sum();
    let pos: f64 = freqs.iter().zip(&values).filter(|(t, _)| **t > 0.0).map(|(_, v)| v.norm_sqr()).sum();
    let neg_energy_ratio = if neg + pos > 0.0 { neg / (neg + pos) } else { 0.0 };
    Ok(SpectrumProfile { convention: CONVENTION, l, n, freqs, values, neg_energy_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportTest {
    pub in_hplus: bool,
    pub ratio: f64,
}

/// Half-line support test: `ratio < tol` means the spectrum lives on `t >= 0`.
pub fn spectrum_support_test<F>(f: F, tol: f64, l: f64, n: usize) -> Result<SupportTest>
where
    F: Fn(f64) -> Complex64,
{
    let s = dft_line(f, l, n)?;
    Ok(SupportTest { in_hplus: s.neg_energy_ratio < tol, ratio: s.neg_energy_ratio })
}

/// `F(t) = e^{delta t} (f_delta)^(t)` on `t_k = pi k / L >= 0` for several
/// `delta`; each row stops where the exponential weight would lift FFT noise
/// (relative `1e-13`) above `1e-6`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FProfile {
    pub convention: &'static str,
    pub p: f64,
    pub deltas: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(serialize_with = "ser_rows")]
    pub values: Vec<Vec<Complex64>>,
    pub max_cross_delta_dev: f64,
    pub growth_exponent_target: f64,
}

fn ser_rows<S: serde::Serializer>(v: &[Vec<Complex64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Row {
        re: Vec<f64>,
        im: Vec<f64>,
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for row in v {
        seq.serialize_element(&Row { re: row.iter().map(|c| c.re).collect(), im: row.iter().map(|c| c.im).collect() })?;
    }
    seq.end()
}

/// Frequencies up to which the cross-`delta` spread is measured.
pub const DEVIATION_T_MAX: f64 = 8.0;
const FFT_NOISE: f64 = 1e-13;
const AMPLIFIED_NOISE: f64 = 1e-6;

pub fn build_f<F>(f: F, p: f64, deltas: &[f64], l: f64, n: usize) -> Result<FProfile>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1]")));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(0.1..=2.0).contains(d)) {
        return Err(Error::InvalidParameter("deltas must lie in [0.1, 2]".into()));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    let mut t_axis: Vec<f64> = Vec::new();
    for &delta in deltas {
        let s = dft_line(|x| f(Complex64::new(x, delta)), l, n)?;
        let start = s.freqs.iter().position(|&t| t >= 0.0).unwrap_or(s.freqs.len());
        let peak = s.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let row_all: Vec<(f64, Complex64)> =
            s.freqs[start..].iter().zip(&s.values[start..]).map(|(&t, &v)| (t, v * (delta * t).exp())).collect();
        let row: Vec<Complex64> = row_all
            .iter()
            .take_while(|(t, _)| peak == 0.0 || (delta * t).exp() * FFT_NOISE <= AMPLIFIED_NOISE)
            .map(|r| r.1)
            .collect();
        if t_axis.len() < row.len() {
            t_axis = row_all.iter().take(row.len()).map(|r| r.0).collect();
        }
        rows.push(row);
    }
    let sup = rows.iter().flat_map(|r| r.iter().map(|v| v.norm())).fold(0.0, f64::max);
    let mut dev: f64 = 0.0;
    if sup > 0.0 {
        for (k, &t) in t_axis.iter().enumerate() {
            if t > DEVIATION_T_MAX {
                break;
            }
            let vals: Vec<Complex64> = rows.iter().filter_map(|r| r.get(k).copied()).collect();
            for v in &vals[1..] {
                dev = dev.max((v - vals[0]).norm() / sup);
            }
        }
    }
    Ok(FProfile {
        convention: CONVENTION,
        p,
        deltas: deltas.to_vec(),
        t: t_axis,
        values: rows,
        max_cross_delta_dev: dev,
        growth_exponent_target: 1.0 / p - 1.0,
    })
}

impl FProfile {
    /// The row reaching furthest in `t` (the smallest `delta`).
    fn longest_row(&self) -> &[Complex64] {
        self.values.iter().max_by_key(|r| r.len()).map(|r| r.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCheck {
    pub ok: bool,
    /// Smallest `C` with `|F(t)| <= C ||f|| t^{1/p - 1}` on the grid.
    pub fitted_c: f64,
    /// The constant `C_p^{1-p} B^{-B} e^{B}` with `C_p^p = 2/pi`, `B = 1/p - 1`.
    pub proof_constant: f64,
}

pub fn proof_constant(p: f64) -> f64 {
    let cp = (2.0 / PI).powf(1.0 / p);
    let b = 1.0 / p - 1.0;
    let bb = if b == 0.0 { 1.0 } else { b.powf(-b) };
    cp.powf(1.0 - p) * bb * b.exp()
}

pub fn growth_bound_check(fp: &FProfile, hp_norm: f64) -> GrowthCheck {
    let b = fp.growth_exponent_target;
    let row = fp.longest_row();
    let mut fitted_c: f64 = 0.0;
    for (&t, v) in fp.t.iter().zip(row) {
        if t > 0.0 && v.norm() > 0.0 {
            fitted_c = fitted_c.max(v.norm() / (hp_norm * t.powf(b)));
        }
    }
    GrowthCheck { ok: fitted_c.is_finite(), fitted_c, proof_constant: proof_constant(fp.p) }
}

/// `(1/sqrt(2 pi)) int_0^inf F(t) e^{itz} dt` by composite Simpson on the
/// profile grid, cut where `e^{-t Im z} |F(t)|` falls below `1e-12` of its
/// maximum.
pub fn laplace_reconstruct(fp: &FProfile, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidParameter(format!("{z} is not in the upper half-plane")));
    }
    let row = fp.longest_row();
    if row.len() < 3 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let weighted: Vec<Complex64> = fp.t.iter().zip(row).map(|(&t, &v)| v * (Complex64::new(0.0, t) * z).exp()).collect();
    let peak = weighted.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut end = weighted.len();
    while end > 3 && weighted[end - 1].norm() < 1e-12 * peak {
        end -= 1;
    }
    if end == weighted.len() && weighted[end - 1].norm() > 1e-8 * peak {
        return Err(Error::NoConvergence { value: peak, est_error: weighted[end - 1].norm() });
    }
    if end % 2 == 0 {
        end += usize::from(end < weighted.len());
        if end % 2 == 0 {
            end -= 1;
        }
    }
    let h = fp.t[1] - fp.t[0];
    let mut acc = weighted[0] + weighted[end - 1];
    for (k, v) in weighted[1..end - 1].iter().enumerate() {
        acc += v * if k % 2 == 0 { 4.0 } else { 2.0 };
    }
    Ok(acc * (h / 3.0) / (2.0 * PI).sqrt())
}

/// `t,abs_F,bound` rows for plotting, with `bound = C ||f|| t^{1/p-1}`.
pub fn fprofile_csv(fp: &FProfile, hp_norm: f64, c: f64) -> String {
    let mut out = String::from("t,abs_F,bound\n");
    for (&t, v) in fp.t.iter().zip(fp.longest_row()) {
        let bound = c * hp_norm * t.powf(fp.growth_exponent_target);
        let _ = writeln!(out, "{t:.17e},{:.17e},{bound:.17e}", v.norm());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn upper(z: Complex64) -> Complex64 {
        -4.0 * (z + I).powi(-2)
    }

    fn lower(z: Complex64) -> Complex64 {
        -4.0 * (z - I).powi(-2)
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn simple_pole_calibration() {
        let s = dft_line(|x| (re(x) + I).inv(), 200.0, 1 << 14);
        // 1/x decays too slowly for the edge threshold
        assert!(matches!(s, Err(Error::WindowTooSmall { .. })));
        let s = dft_line(|x| (re(x) + I).inv(), 200.0 * 100.0, 1 << 20).unwrap();
        for (&t, v) in s.freqs.iter().zip(&s.values) {
            if (0.5..3.0).contains(&t) {
                let want = -I * (2.0 * PI).sqrt() * (-t).exp();
                assert!((v - want).norm() < 1e-4, "t = {t}: {v} vs {want}");
            } else if (-3.0..-0.5).contains(&t) {
                assert!(v.norm() < 1e-4);
            }
        }
    }

    #[test]
    fn double_pole_spectrum() {
        let s = dft_line(|x| upper(re(x)), DEFAULT_HALF_WIDTH, DEFAULT_POINTS).unwrap();
        assert!(s.neg_energy_ratio < 1e-6, "{}", s.neg_energy_ratio);
        for (&t, v) in s.freqs.iter().zip(&s.values) {
            let want = if t >= 0.0 { 4.0 * (2.0 * PI).sqrt() * t * (-t).exp() } else { 0.0 };
            assert!((v - want).norm() < 1e-8, "t = {t}");
        }
        assert_eq!(s.freqs.len(), DEFAULT_POINTS - 1);
        assert_eq!(s.freqs[0], -s.freqs[s.freqs.len() - 1]);
    }

    #[test]
    fn even_real_function() {
        let s = dft_line(|x| re(4.0 / (x * x + 1.0)), DEFAULT_HALF_WIDTH, DEFAULT_POINTS).unwrap();
        assert!((s.neg_energy_ratio - 0.5).abs() < 1e-12);
        let m = s.freqs.len();
        for k in 0..m {
            assert!(s.values[k].im.abs() < 1e-12);
            assert!((s.values[k] - s.values[m - 1 - k]).norm() < 1e-12);
        }
    }

    #[test]
    fn support_tests() {
        let up = spectrum_support_test(|x| upper(re(x)), 1e-5, DEFAULT_HALF_WIDTH, DEFAULT_POINTS).unwrap();
        assert!(up.in_hplus);
        let low = spectrum_support_test(|x| lower(re(x)), 1e-5, DEFAULT_HALF_WIDTH, DEFAULT_POINTS).unwrap();
        assert!(!low.in_hplus && low.ratio > 1.0 - 1e-6);
        let both = spectrum_support_test(|x| upper(re(x)) + lower(re(x)), 1e-5, DEFAULT_HALF_WIDTH, DEFAULT_POINTS).unwrap();
        assert!((both.ratio - 0.5).abs() < 1e-6);
    }

    #[test]
    fn plancherel() {
        let (l, n) = (20.0, 1 << 12);
        let g = |x: f64| Complex64::new((-x * x).exp(), 0.3 * x * (-x * x).exp());
        let s = dft_line(g, l, n).unwrap();
        let dt = PI / l;
        let dx = 2.0 * l / n as f64;
        let lhs: f64 = s.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt;
        let rhs: f64 = (0..n).map(|j| g(-l + dx * j as f64).norm_sqr()).sum::<f64>() * dx;
        assert!((lhs - rhs).abs() < 1e-8 * rhs);
    }

    #[test]
    fn conjugation_symmetry() {
        let f = |x: f64| upper(re(x)) * 0.7 + lower(re(x + 0.5)) * Complex64::new(0.2, 0.4);
        let a = dft_line(f, DEFAULT_HALF_WIDTH, 1 << 12).unwrap();
        let b = dft_line(|x| f(x).conj(), DEFAULT_HALF_WIDTH, 1 << 12).unwrap();
        let m = a.values.len();
        for k in 0..m {
            assert!((b.values[k] - a.values[m - 1 - k].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn f_function_of_double_pole() {
        let fp = build_f(upper, 0.75, &[0.5, 1.0], DEFAULT_HALF_WIDTH, DEFAULT_POINTS).unwrap();
        assert!(fp.max_cross_delta_dev < 1e-6, "{}", fp.max_cross_delta_dev);
        for (&t, v) in fp.t.iter().zip(&fp.values[0]).take(2000) {
            let want = 4.0 * (2.0 * PI).sqrt() * t * (-t).exp();
            assert!((v - want).norm() < 1e-6 * 4.0, "t = {t}");
        }
        assert!((fp.growth_exponent_target - 1.0 / 3.0).abs() < 1e-15);
        let z = laplace_reconstruct(&fp, I).unwrap();
        assert!((z - 1.0).norm() < 1e-5, "{z}");
        for k in 0..20 {
            let w = Complex64::new(-3.0 + 0.3 * k as f64, 0.3 + 0.1 * k as f64);
            assert!((laplace_reconstruct(&fp, w).unwrap() - upper(w)).norm() < 1e-5);
        }
    }

    #[test]
    fn zero_function() {
        let fp = build_f(|_| Complex64::new(0.0, 0.0), 0.75, &[0.5, 1.0], 50.0, 1024).unwrap();
        assert!(fp.values.iter().all(|r| r.iter().all(|v| v.norm() == 0.0)));
        let g = growth_bound_check(&fp, 0.0);
        assert!(g.ok && g.fitted_c == 0.0);
        assert_eq!(laplace_reconstruct(&fp, I).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn proof_constant_value() {
        assert!((proof_constant(0.75) - 1.731).abs() < 1e-3, "{}", proof_constant(0.75));
        assert!((proof_constant(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let fp = build_f(upper, 0.75, &[0.5], DEFAULT_HALF_WIDTH, 4096).unwrap();
        let csv = fprofile_csv(&fp, 1.0, 1.0);
        assert!(csv.starts_with("t,abs_F,bound\n"));
        assert_eq!(csv.lines().count(), fp.t.len() + 1);
    }
}
