//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use hardy_split::approx::{single_pole_approx, Schedule};
use hardy_split::cayley::{alpha, beta, BoundarySamples};
use hardy_split::corpus::Member;
use hardy_split::hardy::line_profile;
use hardy_split::rational::{certify_lp, HalfPlane, LaurentRational};
use hardy_split::spectral::{build_f, growth_bound_check, laplace_reconstruct, spectrum_support_test, DEFAULT_HALF_WIDTH};
use hardy_split::split::{decompose, interior_sum_eval, real_pole_blend, split_atom, split_constant, budget_constant};
use hardy_split::verify::{extension_errors, increment_ratio, line_norm, run_check, windowed_norms, Check, PROFILE_HEIGHTS};
use num_complex::Complex64;
use statrs::function::gamma::gamma;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type Outcome = (bool, String);

fn c1_cayley() -> Outcome {
    let mut worst: f64 = 0.0;
    for j in 0..100 {
        for k in 0..100 {
            let z = c(-5.0 + 10.0 * (j as f64 + 0.5) / 100.0, -5.0 + 10.0 * (k as f64 + 0.5) / 100.0);
            let back = alpha(beta(z).unwrap()).unwrap();
            worst = worst.max((back - z).norm());
        }
    }
    let mut ok = worst < 1e-12;
    let mut failures = Vec::new();
    for m in Member::all() {
        for p in [0.6, 0.75, 0.9] {
            let o = &run_check(m, p, Check::Cayley)[0];
            if !o.pass {
                ok = false;
                failures.push(format!("{} p={p}: {}", m.name(), o.detail));
            }
        }
    }
    (ok, format!("round-trip max {worst:.2e} on 10^4 points; line/circle agreement for 6 members x 3 exponents {}", if failures.is_empty() { "ok".into() } else { failures.join("; ") }))
}

fn c2_certification() -> Outcome {
    // |(z+i)^{-2}| = |upper_double_pole| / 4, which leaves growth ratios unchanged
    let r = LaurentRational::from_powers(0, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).scale(c(-0.25, 0.0));
    let cert = r.certificate();
    let member = certify_lp(&cert, 0.75).member;
    let non_member = !certify_lp(&cert, 0.4).member;
    let windows: Vec<f64> = (4..=24).map(|k| 2f64.powi(k)).collect();
    let a = windowed_norms(Member::UpperDoublePole, 0.75, &windows).unwrap();
    let b = windowed_norms(Member::UpperDoublePole, 0.4, &windows).unwrap();
    let (ra, rb) = (increment_ratio(&a), increment_ratio(&b));
    let growth = b[b.len() - 1] / b[0];
    let step = b[b.len() - 1] / b[b.len() - 2];
    let exact = 4f64.powf(0.75) * PI.sqrt() * gamma(0.25) / gamma(0.75);
    let limit_err = (a[a.len() - 1] - exact).abs() / exact;
    let ok = member && non_member && ra < 1.0 && rb >= 1.0 && growth > 10.0 && limit_err < 1e-3;
    (
        ok,
        format!(
            "member(0.75)={member} non-member(0.4)={non_member}; p=0.75 increments shrink x{ra:.3}, window 2^24 within {limit_err:.1e} of the limit; p=0.4 increments x{rb:.3}, total growth x{growth:.1} over 20 doublings (last doubling x{step:.3})"
        ),
    )
}

fn c3_split() -> Outcome {
    let p = 0.75;
    let r = Member::Lorentzian.laurent().unwrap();
    let s = split_atom(&r, p, 64).unwrap();
    let poles = s.real_poles.clone();
    let mut worst: f64 = 0.0;
    let mut k = 0;
    let mut j = 0;
    while k < 1000 {
        let x = -10.0 + 20.0 * (j as f64 + 0.5) / 1200.0;
        j += 1;
        if poles.iter().any(|a| (x - a).abs() < 1e-3) {
            continue;
        }
        let sum = s.p_general.eval(c(x, 0.0)).unwrap() + s.q_general.eval(c(x, 0.0)).unwrap();
        worst = worst.max((sum - r.eval_real(x)).norm());
        k += 1;
    }
    let p_ok = s.p_general.poles().iter().all(|q| q.location.im == 0.0 || q.location == -I);
    let q_ok = s.q_general.poles().iter().all(|q| q.location.im == 0.0 || q.location == I);
    let has_minus_i = s.p_general.poles().iter().any(|q| q.location == -I);
    let has_i = s.q_general.poles().iter().any(|q| q.location == I);
    let fubini = 2f64.powf(-p) / (1.0 - p);
    let mean = s.scan_mean() / s.atom_norm_p;
    let ok = worst < 1e-10 && p_ok && q_ok && has_minus_i && has_i && s.bound_ratio <= split_constant(p) && mean <= 1.02 * fubini;
    (
        ok,
        format!(
            "max |P+Q-R| {worst:.2e} at 1000 points; poles P {:?} Q {:?}; bound_ratio {:.4} <= {:.4}; phi-average J/||R|| {mean:.4} vs Fubini {fubini:.4}",
            s.p_general.poles().iter().map(|q| q.location).collect::<Vec<_>>(),
            s.q_general.poles().iter().map(|q| q.location).collect::<Vec<_>>(),
            s.bound_ratio,
            split_constant(p)
        ),
    )
}

fn c4_budget() -> Outcome {
    let p = 0.75;
    let d = decompose(&Member::Lorentzian.line_function(), p, 0.5, &Schedule::default(), 64).unwrap();
    let bound = budget_constant(p) * d.f_norm_p;
    let decreasing = d.residuals.len() >= 3 && d.residuals.windows(2).all(|w| w[1] < w[0]);
    let y = 0.05;
    let mut worst: f64 = 0.0;
    let mut smoothed: Vec<String> = Vec::new();
    for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        let g = interior_sum_eval(&d, c(x, y)).unwrap().value;
        let h = interior_sum_eval(&d, c(x, -y)).unwrap().value;
        let fx = 4.0 / (x * x + 1.0);
        worst = worst.max((g + h - fx).norm() / fx);
        // harmonic extension of f at the same height, for reference
        let ext = 4.0 * (1.0 + y) / (x * x + (1.0 + y) * (1.0 + y));
        smoothed.push(format!("{:.3}", (g + h - ext).norm() / ext));
    }
    let ok = d.budget <= bound && decreasing && worst < 1e-2;
    (
        ok,
        format!(
            "budget {:.4} <= {:.4}; residuals {:?}; |g(x+iy) + h(x-iy) - f(x)| / |f(x)| at y=0.05 max {worst:.2e} (relative to the harmonic extension of f: {})",
            d.budget,
            bound,
            d.residuals.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>(),
            smoothed.join(", ")
        ),
    )
}

fn c5_single_pole() -> Outcome {
    let f = Member::UpperTriplePole;
    let samples = BoundarySamples::sample_line(|x| f.eval(c(x, 0.0)), 0.75, 1 << 14).unwrap();
    let res: Vec<f64> = [8, 16, 32, 64, 128].iter().map(|&d| single_pole_approx(&samples, 2, d).unwrap().lp_residual).collect();
    let ratios: Vec<f64> = res.windows(2).map(|w| w[1] / w[0]).collect();
    let fit = single_pole_approx(&samples, 2, 128).unwrap();
    let only_minus_i = fit.general.poles().iter().all(|q| q.location == -I);
    let ok = ratios.iter().all(|&r| r < 0.7) && only_minus_i;
    (ok, format!("residuals {:?} ratios {ratios:.3?}; poles only at -i: {only_minus_i}", res.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>()))
}

fn c6_spectrum() -> Outcome {
    let (l, n) = (200.0, 1 << 14);
    let up = spectrum_support_test(|x| Member::UpperDoublePole.eval(c(x, 0.0)), 1e-5, l, n).unwrap();
    let low = spectrum_support_test(|x| Member::LowerDoublePole.eval(c(x, 0.0)), 1e-5, l, n).unwrap();
    let sum = spectrum_support_test(|x| Member::BlendPair.eval(c(x, 0.0)), 1e-5, l, n).unwrap();
    let ok = up.ratio < 1e-5 && low.ratio > 0.4 && sum.ratio > 0.45 && sum.ratio < 0.55;
    (ok, format!("neg_energy_ratio upper {:.2e}, lower {:.6}, sum {:.6}", up.ratio, low.ratio, sum.ratio))
}

fn c7_f_function() -> Outcome {
    let p = 0.75;
    let f = |z: Complex64| Member::UpperDoublePole.eval(z);
    let fp = build_f(f, p, &[0.5, 1.0], DEFAULT_HALF_WIDTH, 1 << 14).unwrap();
    let fp2 = build_f(f, p, &[0.5, 1.0], DEFAULT_HALF_WIDTH, 1 << 15).unwrap();
    let norm = line_norm(Member::UpperDoublePole, p).unwrap().value.powf(1.0 / p);
    let g1 = growth_bound_check(&fp, norm);
    let g2 = growth_bound_check(&fp2, norm);
    let stable = (g1.fitted_c - g2.fitted_c).abs() / g1.fitted_c;
    // (1/sqrt(2pi)) int_0^inf 4 sqrt(2pi) t e^{-t} e^{-t} dt = 4 Gamma(2)/2^2 = 1
    let z = laplace_reconstruct(&fp, I).unwrap();
    let oracle = 4.0 * gamma(2.0) / 4.0;
    let ok = fp.max_cross_delta_dev < 1e-5 && g1.ok && stable < 0.05 && (z - oracle).norm() < 1e-5;
    (
        ok,
        format!(
            "cross-delta deviation {:.2e}; fitted C {:.5} (n=2^14) {:.5} (n=2^15), change {stable:.1e}, proof constant {:.4}; laplace(i) = {z:.8}",
            fp.max_cross_delta_dev, g1.fitted_c, g2.fitted_c, g1.proof_constant
        ),
    )
}

fn c8_extension() -> Outcome {
    let (pc, exact) = extension_errors(Member::UpperDoublePole).unwrap();
    (pc < 1e-6 && exact < 1e-6, format!("max |poisson - cauchy| {pc:.2e}, max deviation from exact {exact:.2e} at 20 points"))
}

fn c9_blend() -> Outcome {
    let p = 0.75;
    let (r1, r2) = Member::BlendPair.pair().unwrap();
    let b = real_pole_blend(&r1, &r2, p, 64).unwrap();
    let real = b.rational.poles().iter().all(|q| q.location.im == 0.0);
    let finite = [0.5 * I, -0.5 * I].iter().all(|&z| b.rational.eval(z).map(|v| v.is_finite()).unwrap_or(false));
    let ok = real && finite && b.distance_p <= b.bound;
    (ok, format!("poles {:?} all real: {real}; finite at +-0.5i: {finite}; distance {:.4} <= {:.4}", b.real_poles, b.distance_p, b.bound))
}

fn c10_profiles() -> Outcome {
    let p = 0.75;
    let mut ok = true;
    let mut parts = Vec::new();
    for m in Member::all() {
        let Some(side) = m.hardy_side(p) else { continue };
        let own = match side {
            HalfPlane::Upper => line_profile(|z| m.eval(z), p, &PROFILE_HEIGHTS).unwrap(),
            HalfPlane::Lower => line_profile(|z: Complex64| m.eval(z.conj()), p, &PROFILE_HEIGHTS).unwrap(),
        };
        ok &= own.monotone;
        parts.push(format!("{} ({side:?}) monotone={}", m.name(), own.monotone));
    }
    let wrong = line_profile(|z| Member::LowerDoublePole.eval(z), p, &PROFILE_HEIGHTS).unwrap();
    ok &= !wrong.monotone;
    parts.push(format!("lower_double_pole on the upper side monotone={} values {:?}", wrong.monotone, wrong.values));
    (ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("1 Cayley round-trip and isometry", c1_cayley, 5),
        ("2 certification vs quadrature", c2_certification, 10),
        ("3 atom split", c3_split, 60),
        ("4 decomposition budget and recovery", c4_budget, 300),
        ("5 single-pole density", c5_single_pole, 60),
        ("6 spectral support", c6_spectrum, 10),
        ("7 F-function", c7_f_function, 30),
        ("8 extension agreement", c8_extension, 30),
        ("9 real-pole blend", c9_blend, 60),
        ("10 line-profile monotonicity", c10_profiles, 30),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let t0 = Instant::now();
        let (ok, detail) = run();
        let elapsed = t0.elapsed();
        let ok = ok && elapsed < Duration::from_secs(limit);
        if !ok {
            failed += 1;
        }
        println!("[{}] criterion {name} ({:.2}s, limit {limit}s): {detail}", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
