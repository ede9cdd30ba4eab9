//! Built-in test functions with exact formulas and pole certificates.

use num_complex::Complex64;

use crate::approx::LineFunction;
use crate::error::{Error, Result};
use crate::rational::{certify_hardy, HalfPlane, LaurentRational, PoleCertificate};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Names accepted by [`lookup`].
pub const NAMES: [&str; 6] =
    ["upper_double_pole", "lower_double_pole", "lorentzian", "blend_pair", "zero", "upper_triple_pole"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    UpperDoublePole,
    LowerDoublePole,
    Lorentzian,
    BlendPair,
    Zero,
    UpperTriplePole,
}

pub fn lookup(name: &str) -> Result<Member> {
    Ok(match name {
        "upper_double_pole" => Member::UpperDoublePole,
        "lower_double_pole" => Member::LowerDoublePole,
        "lorentzian" => Member::Lorentzian,
        "blend_pair" => Member::BlendPair,
        "zero" => Member::Zero,
        "upper_triple_pole" => Member::UpperTriplePole,
        _ => return Err(Error::InvalidParameter(format!("unknown corpus member '{name}' (known: {})", NAMES.join(", ")))),
    })
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl Member {
    pub fn all() -> [Member; 6] {
        NAMES.map(|n| lookup(n).expect("corpus names are valid"))
    }

    pub fn name(self) -> &'static str {
        match self {
            Member::UpperDoublePole => "upper_double_pole",
            Member::LowerDoublePole => "lower_double_pole",
            Member::Lorentzian => "lorentzian",
            Member::BlendPair => "blend_pair",
            Member::Zero => "zero",
            Member::UpperTriplePole => "upper_triple_pole",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            Member::UpperDoublePole => "-4/(z+i)^2",
            Member::LowerDoublePole => "-4/(z-i)^2",
            Member::Lorentzian => "4/(z^2+1)",
            Member::BlendPair => "-4/(z+i)^2 - 4/(z-i)^2",
            Member::Zero => "0",
            Member::UpperTriplePole => "1/((z+i)^2 (z+2i))",
        }
    }

    /// Exact value; poles give an infinite result.
    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            Member::UpperDoublePole => -4.0 * (z + I).powi(-2),
            Member::LowerDoublePole => -4.0 * (z - I).powi(-2),
            Member::Lorentzian => 4.0 / (z * z + 1.0),
            Member::BlendPair => -4.0 * (z + I).powi(-2) - 4.0 * (z - I).powi(-2),
            Member::Zero => Complex64::new(0.0, 0.0),
            Member::UpperTriplePole => ((z + I).powi(2) * (z + 2.0 * I)).inv(),
        }
    }

    /// Laurent form in `beta(z)`, for members with poles at `+-i` only.
    pub fn laurent(self) -> Option<LaurentRational> {
        let c = [one(), 2.0 * one(), one()];
        match self {
            Member::UpperDoublePole => Some(LaurentRational::from_powers(0, &c)),
            Member::LowerDoublePole => Some(LaurentRational::from_powers(-2, &c)),
            Member::Lorentzian => Some(LaurentRational::from_powers(-1, &c)),
            Member::BlendPair => {
                let (r1, r2) = self.pair()?;
                Some(r1.add(&r2))
            }
            Member::Zero => Some(LaurentRational::zero()),
            Member::UpperTriplePole => None,
        }
    }

    /// `(R1, R2)` with `R1` regular in the upper and `R2` in the lower half-plane.
    pub fn pair(self) -> Option<(LaurentRational, LaurentRational)> {
        match self {
            Member::BlendPair => Some((
                Member::UpperDoublePole.laurent()?,
                Member::LowerDoublePole.laurent()?,
            )),
            _ => None,
        }
    }

    pub fn certificate(self) -> PoleCertificate {
        match self.laurent() {
            Some(r) => r.certificate(),
            None => PoleCertificate::new(Vec::new(), vec![(-I, 2), (-2.0 * I, 1)], -3)
                .expect("static certificate is valid"),
        }
    }

    /// The half-plane whose Hardy space contains the member at exponent `p`.
    pub fn hardy_side(self, p: f64) -> Option<HalfPlane> {
        let cert = self.certificate();
        [HalfPlane::Upper, HalfPlane::Lower].into_iter().find(|&h| certify_hardy(&cert, p, h).member)
    }

    /// Boundary function without the exact shortcut, so the approximation
    /// pipeline runs in full.
    pub fn line_function(self) -> LineFunction {
        LineFunction::new(move |x| self.eval(Complex64::new(x, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_forms_match_formulas() {
        for m in Member::all() {
            let Some(r) = m.laurent() else { continue };
            for k in 0..50 {
                let z = Complex64::new(-5.0 + 0.2 * k as f64, 0.3 * (k % 7) as f64 - 1.2);
                if (z - I).norm() < 1e-3 || (z + I).norm() < 1e-3 {
                    continue;
                }
                assert!((r.eval(z).unwrap() - m.eval(z)).norm() < 1e-11 * (1.0 + m.eval(z).norm()), "{}", m.name());
            }
        }
    }

    #[test]
    fn sides() {
        assert_eq!(Member::UpperDoublePole.hardy_side(0.75), Some(HalfPlane::Upper));
        assert_eq!(Member::UpperTriplePole.hardy_side(0.75), Some(HalfPlane::Upper));
        assert_eq!(Member::LowerDoublePole.hardy_side(0.75), Some(HalfPlane::Lower));
        assert_eq!(Member::Lorentzian.hardy_side(0.75), None);
        assert_eq!(Member::BlendPair.hardy_side(0.75), None);
        assert!(Member::Zero.hardy_side(0.75).is_some());
    }

    #[test]
    fn names_round_trip() {
        for m in Member::all() {
            assert_eq!(lookup(m.name()).unwrap(), m);
        }
        assert!(lookup("nope").is_err());
    }
}
