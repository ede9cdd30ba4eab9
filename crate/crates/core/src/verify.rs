//! Invariant battery over the built-in corpus.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::cayley::{alpha, theta_of_x, BoundarySamples};
use crate::corpus::Member;
use crate::error::Result;
use crate::hardy::{cauchy_integral, line_profile, poisson_extend, subharmonic_bound_check, ExtendOptions, LineProfile};
use crate::quadrature::{integrate_line, lp_quasinorm_circle, lp_quasinorm_line, QuadOptions, QuadratureResult, Singularity};
use crate::rational::{certify_hardy, certify_lp, HalfPlane};
use crate::spectral::{spectrum_support_test, DEFAULT_HALF_WIDTH, DEFAULT_POINTS};

/// Heights of the line-profile check.
pub const PROFILE_HEIGHTS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
/// Spectral support tolerance.
pub const SUPPORT_TOL: f64 = 1e-5;
/// Agreement tolerance of the extension check.
pub const EXTENSION_TOL: f64 = 1e-6;
const EXTENSION_SAMPLES: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    All,
    Cayley,
    Certificate,
    Spectrum,
    Extension,
    Profile,
    Subharmonic,
}

impl Check {
    pub const BATTERY: [Check; 6] =
        [Check::Cayley, Check::Certificate, Check::Spectrum, Check::Extension, Check::Profile, Check::Subharmonic];
}

/// One verdict: `pass` iff the observation matches the expectation derived
/// from the pole certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: Check,
    pub expected: bool,
    pub observed: bool,
    pub pass: bool,
    pub skipped: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: Check, expected: bool, observed: bool, detail: String) -> Self {
        CheckOutcome { name, expected, observed, pass: expected == observed, skipped: false, detail }
    }

    fn skipped(name: Check, detail: &str) -> Self {
        CheckOutcome { name, expected: false, observed: false, pass: true, skipped: true, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub corpus: &'static str,
    pub formula: &'static str,
    pub p: f64,
    pub checks: Vec<CheckOutcome>,
    pub all_pass: bool,
}

fn is_upper(member: Member, p: f64) -> bool {
    certify_hardy(&member.certificate(), p, HalfPlane::Upper).member
}

fn real_poles(member: Member) -> Vec<(f64, u32)> {
    member.certificate().real_poles
}

/// `||f||_p^p` on the line.
pub fn line_norm(member: Member, p: f64) -> Result<QuadratureResult> {
    lp_quasinorm_line(|x| member.eval(Complex64::new(x, 0.0)), p, &real_poles(member), &QuadOptions::default())
}

/// `int |g|^p dtheta` for the pullback `g(w) = f(alpha(w)) (|1+w|^2/2)^{-1/p}`,
/// integrated on the circle rotated by `pi` so that `w = -1` sits at an
/// interior graded point.
pub fn circle_norm(member: Member, p: f64) -> Result<QuadratureResult> {
    let rotate = |t: f64| if t < 0.0 { t + PI } else { t - PI };
    let g = |t: f64| {
        let w = -Complex64::from_polar(1.0, t);
        // |1 + w|^2 / 2 = 1 - cos t
        let half_gap = 2.0 * (0.5 * t).sin().powi(2);
        match alpha(w) {
            Ok(z) => member.eval(Complex64::new(z.re, 0.0)) * half_gap.powf(-1.0 / p),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    };
    let cert = member.certificate();
    let end = 2.0 + p * cert.degree_gap as f64;
    let mut sing = vec![Singularity { theta: 0.0, gamma: Some(end.max(0.0)) }];
    sing.extend(real_poles(member).iter().map(|&(a, l)| Singularity { theta: rotate(theta_of_x(a)), gamma: Some(p * l as f64) }));
    lp_quasinorm_circle(g, p, &sing, &QuadOptions::default())
}

/// `int_{-W}^{W} |f|^p dx` for each window half-width.
pub fn windowed_norms(member: Member, p: f64, windows: &[f64]) -> Result<Vec<f64>> {
    let poles = real_poles(member);
    windows
        .iter()
        .map(|&w| {
            let h = |x: f64| if x.abs() > w { 0.0 } else { member.eval(Complex64::new(x, 0.0)).norm().powf(p) };
            let mut sing = vec![(-w, 0.0), (w, 0.0)];
            sing.extend(poles.iter().map(|&(a, l)| (a, p * l as f64)));
            integrate_line(&h, &sing, &QuadOptions::default()).map(|r| r.value)
        })
        .collect()
}

/// Ratio of successive window increments averaged over the last four
/// doublings; below one means the windowed integrals converge.
pub fn increment_ratio(values: &[f64]) -> f64 {
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &inc[inc.len().saturating_sub(5)..];
    let ratios: Vec<f64> = tail.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    }
}

fn cayley_check(member: Member, p: f64) -> CheckOutcome {
    let expected = certify_lp(&member.certificate(), p).member;
    if !expected {
        return CheckOutcome::skipped(Check::Cayley, "not in L^p");
    }
    match (line_norm(member, p), circle_norm(member, p)) {
        (Ok(a), Ok(b)) => {
            let slack = a.est_error + b.est_error + 1e-12 * a.value.abs();
            let diff = (a.value - b.value).abs();
            CheckOutcome::new(
                Check::Cayley,
                true,
                diff <= slack,
                format!("line {:.12e} circle {:.12e} |diff| {:.3e} slack {:.3e}", a.value, b.value, diff, slack),
            )
        }
        (a, b) => CheckOutcome::new(Check::Cayley, true, false, format!("line {a:?} circle {b:?}")),
    }
}

fn certificate_check(member: Member, p: f64) -> CheckOutcome {
    let m = certify_lp(&member.certificate(), p);
    let windows: Vec<f64> = (4..=24).map(|k| 2f64.powi(k)).collect();
    match windowed_norms(member, p, &windows) {
        Ok(v) => {
            let ratio = increment_ratio(&v);
            let growth = if v[0] > 0.0 { v[v.len() - 1] / v[0] } else { 1.0 };
            CheckOutcome::new(
                Check::Certificate,
                m.member,
                ratio < 0.99,
                format!("increment ratio {ratio:.4} growth x{growth:.3} over 20 doublings; {}", m.reasons.join("; ")),
            )
        }
        Err(e) => CheckOutcome::new(Check::Certificate, m.member, false, e.to_string()),
    }
}

fn spectrum_check(member: Member, p: f64) -> CheckOutcome {
    let expected = is_upper(member, p);
    match spectrum_support_test(|x| member.eval(Complex64::new(x, 0.0)), SUPPORT_TOL, DEFAULT_HALF_WIDTH, DEFAULT_POINTS) {
        Ok(s) => CheckOutcome::new(Check::Spectrum, expected, s.in_hplus, format!("neg_energy_ratio {:.6e}", s.ratio)),
        Err(e) => CheckOutcome::new(Check::Spectrum, expected, false, e.to_string()),
    }
}

/// Twenty interior points with `0.4 <= y <= 2.3`.
pub fn interior_points() -> Vec<Complex64> {
    (0..20).map(|k| Complex64::new(-3.0 + 0.3 * k as f64, 0.4 + 0.1 * k as f64)).collect()
}

/// Largest `|poisson - cauchy|` and largest deviation of either from the
/// exact value at [`interior_points`].
pub fn extension_errors(member: Member) -> Result<(f64, f64)> {
    let samples = BoundarySamples::sample_line(|x| member.eval(Complex64::new(x, 0.0)), 1.0, EXTENSION_SAMPLES)?;
    let (mut pc, mut exact) = (0.0f64, 0.0f64);
    for z in interior_points() {
        let a = poisson_extend(&samples, z, ExtendOptions::default())?;
        let b = cauchy_integral(&samples, z, ExtendOptions::default())?;
        let want = member.eval(z);
        pc = pc.max((a - b).norm());
        exact = exact.max((a - want).norm()).max((b - want).norm());
    }
    Ok((pc, exact))
}

fn extension_check(member: Member, p: f64) -> CheckOutcome {
    if !is_upper(member, p) {
        return CheckOutcome::skipped(Check::Extension, "not an upper Hardy member");
    }
    match extension_errors(member) {
        Ok((pc, exact)) => CheckOutcome::new(
            Check::Extension,
            true,
            pc < EXTENSION_TOL && exact < EXTENSION_TOL,
            format!("|poisson - cauchy| {pc:.3e}, |extension - exact| {exact:.3e}"),
        ),
        Err(e) => CheckOutcome::new(Check::Extension, true, false, e.to_string()),
    }
}

pub fn profile(member: Member, p: f64) -> Result<LineProfile> {
    line_profile(|z| member.eval(z), p, &PROFILE_HEIGHTS)
}

fn profile_check(member: Member, p: f64) -> CheckOutcome {
    let expected = is_upper(member, p);
    match profile(member, p) {
        Ok(lp) => CheckOutcome::new(Check::Profile, expected, lp.monotone, format!("{:?}", lp.values)),
        Err(e) => CheckOutcome::new(Check::Profile, expected, false, e.to_string()),
    }
}

fn subharmonic_check(member: Member, p: f64) -> CheckOutcome {
    if !is_upper(member, p) {
        return CheckOutcome::skipped(Check::Subharmonic, "not an upper Hardy member");
    }
    let norm = match line_norm(member, p) {
        Ok(r) => r.value.powf(1.0 / p),
        Err(e) => return CheckOutcome::new(Check::Subharmonic, true, false, e.to_string()),
    };
    let points: Vec<Complex64> =
        (0..200).map(|k| Complex64::new(-5.0 + 0.05 * k as f64, 0.05 * 1.3f64.powi(k % 17))).collect();
    match subharmonic_bound_check(|z| member.eval(z), p, norm, &points) {
        Ok(r) => CheckOutcome::new(Check::Subharmonic, true, true, format!("min margin {:.4}", r.min_margin)),
        Err(e) => CheckOutcome::new(Check::Subharmonic, true, false, e.to_string()),
    }
}

pub fn run_check(member: Member, p: f64, check: Check) -> Vec<CheckOutcome> {
    match check {
        Check::All => Check::BATTERY.iter().flat_map(|&c| run_check(member, p, c)).collect(),
        Check::Cayley => vec![cayley_check(member, p)],
        Check::Certificate => vec![certificate_check(member, p)],
        Check::Spectrum => vec![spectrum_check(member, p)],
        Check::Extension => vec![extension_check(member, p)],
        Check::Profile => vec![profile_check(member, p)],
        Check::Subharmonic => vec![subharmonic_check(member, p)],
    }
}

pub fn verify(member: Member, p: f64, check: Check) -> VerifyReport {
    let checks = run_check(member, p, check);
    let all_pass = checks.iter().all(|c| c.pass);
    VerifyReport { corpus: member.name(), formula: member.formula(), p, checks, all_pass }
}
