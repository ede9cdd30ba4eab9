use hardy_split::approx::{build_atom, weierstrass_m, TrigPolynomial, WeierstrassPlan};
use hardy_split::cayley::{alpha, beta, one_plus_cos, theta_of_x};
use hardy_split::corpus::Member;
use hardy_split::hardy::{poisson_extend, ExtendOptions};
use hardy_split::quadrature::{lp_quasinorm_circle, lp_quasinorm_line, QuadOptions};
use hardy_split::rational::{certify_lp, LaurentRational, PoleCertificate};
use hardy_split::report::to_json;
use hardy_split::spectral::{build_f, laplace_reconstruct, DEFAULT_HALF_WIDTH};
use hardy_split::split::split_atom;
use hardy_split::cayley::BoundarySamples;
use num_complex::Complex64;
use proptest::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

/// Laurent polynomial with `lo..=hi` support.
fn laurent(max_half: usize) -> impl Strategy<Value = LaurentRational> {
    (0..=max_half, prop::collection::vec(complex(), 1..=2 * max_half + 1)).prop_map(|(shift, c)| {
        let lo = -(shift.min(c.len() - 1) as i64);
        LaurentRational::from_powers(lo, &c)
    })
}

/// Atom vanishing to order 4 at `w = -1`, so it decays like `x^{-4}`.
fn decaying_atom() -> impl Strategy<Value = LaurentRational> {
    laurent(2).prop_map(|r| {
        let lor = LaurentRational::from_powers(-1, &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
        r.mul(&lor).mul(&lor)
    })
}

fn quasinorm(r: &LaurentRational, p: f64) -> f64 {
    let m = r.boundary_modulus();
    lp_quasinorm_line(|x| Complex64::new(m.eval_line(x), 0.0), p, &[], &QuadOptions::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cayley_round_trip(x in -20.0..20.0f64, y in 0.0..20.0f64) {
        let z = Complex64::new(x, y);
        let back = alpha(beta(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() < 1e-12 * (1.0 + z.norm_sqr()));
        prop_assert!((beta(Complex64::new(x, 0.0)).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn theta_is_increasing(a in -1e6..1e6f64, d in 1e-6..1e3f64) {
        prop_assert!(theta_of_x(a + d) > theta_of_x(a));
    }

    #[test]
    fn general_form_agrees(r in laurent(4), x in -5.0..5.0f64, y in -3.0..3.0f64) {
        let z = Complex64::new(x, y);
        prop_assume!((z - I).norm() > 1e-3 && (z + I).norm() > 1e-3);
        let a = r.eval(z).unwrap();
        let b = r.to_general().eval(z).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn bounded_by_coefficients(r in laurent(5), x in -100.0..100.0f64) {
        prop_assert!(r.eval_real(x).norm() <= r.l1_coeffs() * (1.0 + 1e-12));
    }

    #[test]
    fn membership_set_is_an_interval(
        orders in prop::collection::vec(1u32..4, 0..3),
        gap in -8i64..0,
        complex_order in 1u32..3,
    ) {
        let real: Vec<(f64, u32)> = orders.iter().enumerate().map(|(k, &l)| (k as f64, l)).collect();
        let cert = PoleCertificate::new(real, vec![(-I, complex_order)], gap).unwrap();
        let accepted: Vec<bool> = (1..100).map(|k| certify_lp(&cert, k as f64 / 100.0).member).collect();
        let switches = accepted.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert!(switches <= 2);
        if let (Some(a), Some(b)) = (accepted.iter().position(|&m| m), accepted.iter().rposition(|&m| m)) {
            prop_assert!(accepted[a..=b].iter().all(|&m| m));
        }
    }

    #[test]
    fn build_atom_matches_boundary_product(
        coeffs in prop::collection::vec(complex(), 1..4),
        p in 0.3..0.95f64,
        x in -30.0..30.0f64,
    ) {
        let mut c = coeffs.clone();
        if c.len() % 2 == 0 {
            c.push(Complex64::new(0.0, 0.0));
        }
        let r = TrigPolynomial::new(c).unwrap();
        let (_, m) = weierstrass_m(p).unwrap();
        let plan = WeierstrassPlan::with_degree(p, m, 16).unwrap();
        let atom = build_atom(&r, &plan);
        let t = theta_of_x(x);
        let s = one_plus_cos(t);
        let want = r.eval(t) * plan.eval(s) * s.powi(m as i32);
        prop_assert!((atom.eval_real(x) - want).norm() < 1e-10 * (1.0 + want.norm()));
        prop_assert!(atom.to_general().poles().iter().all(|q| q.location == I || q.location == -I));
    }

    #[test]
    fn json_floats_round_trip(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20)) {
        let back: Vec<f64> = serde_json::from_str(&to_json(&v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quasi_triangle(a in decaying_atom(), b in decaying_atom(), p in 0.3..0.95f64) {
        let sum = a.add(&b);
        let lhs = quasinorm(&sum, p);
        let rhs = quasinorm(&a, p) + quasinorm(&b, p);
        prop_assert!(lhs <= rhs * (1.0 + 1e-7));
    }

    #[test]
    fn line_and_circle_agree(r in decaying_atom(), p in 0.5..0.95f64) {
        let opts = QuadOptions::default();
        let m = r.boundary_modulus();
        let line = lp_quasinorm_line(|x| Complex64::new(m.eval_line(x), 0.0), p, &[], &opts).unwrap();
        // decay x^{-4} keeps the pullback bounded for p >= 1/2
        let g = |t: f64| {
            let s = one_plus_cos(t);
            let k = m.order() as f64;
            Complex64::new(2f64.powf(0.5 * k) * s.powf(0.5 * k - 1.0 / p) * m.quotient_at(t).norm(), 0.0)
        };
        let circle = lp_quasinorm_circle(g, p, &[], &opts).unwrap();
        let slack = line.est_error + circle.est_error + 1e-12 * line.value;
        prop_assert!((line.value - circle.value).abs() <= slack.max(1e-9 * line.value), "{line:?} {circle:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn split_pieces_add_up(r in decaying_atom(), x in -4.0..4.0f64, y in 0.1..3.0f64) {
        prop_assume!(!r.is_zero());
        let s = split_atom(&r, 0.75, 16).unwrap();
        for z in [Complex64::new(x, y), Complex64::new(x, -y)] {
            let sum = s.plus.eval(z).unwrap() + s.minus.eval(z).unwrap();
            let want = r.eval(z).unwrap();
            prop_assert!((sum - want).norm() <= 1e-12 * want.norm().max(r.l1_coeffs()));
        }
        prop_assert!(s.p_general.poles().iter().all(|q| q.location.im <= 0.0));
        prop_assert!(s.q_general.poles().iter().all(|q| q.location.im >= 0.0));
        prop_assert!(s.bound_ratio <= 2.0 * std::f64::consts::PI / 0.25);
    }
}

#[test]
fn poisson_semigroup() {
    let m = Member::UpperDoublePole;
    for delta in [0.3, 1.0] {
        let b = BoundarySamples::sample_line(|x| m.eval(Complex64::new(x, delta)), 1.0, 1 << 13).unwrap();
        for (x, y) in [(-2.0, 0.4), (0.0, 1.0), (1.5, 2.0)] {
            let got = poisson_extend(&b, Complex64::new(x, y), ExtendOptions::default()).unwrap();
            assert!((got - m.eval(Complex64::new(x, y + delta))).norm() < 1e-6);
        }
    }
}

#[test]
fn laplace_poisson_and_formula_agree() {
    let m = Member::UpperDoublePole;
    let fp = build_f(|z| m.eval(z), 0.75, &[0.5, 1.0], DEFAULT_HALF_WIDTH, 1 << 14).unwrap();
    let b = BoundarySamples::sample_line(|x| m.eval(Complex64::new(x, 0.0)), 1.0, 1 << 13).unwrap();
    for z in [Complex64::new(0.0, 1.0), Complex64::new(-1.5, 0.5), Complex64::new(2.0, 2.0)] {
        let l = laplace_reconstruct(&fp, z).unwrap();
        let p = poisson_extend(&b, z, ExtendOptions::default()).unwrap();
        let f = m.eval(z);
        assert!((l - f).norm() < 1e-5 && (p - f).norm() < 1e-5 && (l - p).norm() < 1e-5, "{l} {p} {f}");
    }
}
