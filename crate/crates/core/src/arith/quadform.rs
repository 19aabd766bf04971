//! Binary quadratic forms `p x^2 + 2 q x y + r y^2` with exact coefficients
//! and certified rational eigenvalue bounds.

use num_traits::{One, Signed, Zero};

use super::poly::{rational_to_f64, Atom, Monomial, Poly};
use crate::syntax::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadForm {
    pub vars: [String; 2],
    /// Symmetric matrix `[[p, q], [q, r]]`.
    pub p: Rational,
    pub q: Rational,
    pub r: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
    Zero,
}

fn two() -> Rational {
    Rational::from_integer(2.into())
}

fn mono(pairs: &[(&str, u32)]) -> Monomial {
    pairs
        .iter()
        .map(|(n, e)| (Atom::Var(n.to_string()), *e))
        .collect()
}

/// Rational `s` with `s >= sqrt(x)`, within about 1e-12 relative.
pub fn sqrt_upper(x: &Rational) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    let approx = rational_to_f64(x).sqrt();
    let mut s = Rational::from_float(approx * (1.0 + 1e-13)).unwrap_or_else(|| x + Rational::one());
    let mut bump = Rational::from_float(approx * 1e-12 + 1e-300).unwrap_or_else(Rational::one);
    while &(&s * &s) < x {
        s += &bump;
        bump *= two();
    }
    s
}

/// Rational `s` with `0 <= s <= sqrt(x)`, within about 1e-12 relative.
pub fn sqrt_lower(x: &Rational) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    let approx = rational_to_f64(x).sqrt();
    let mut s = Rational::from_float(approx * (1.0 - 1e-13)).unwrap_or_else(Rational::zero);
    while &(&s * &s) > x {
        s = &s * Rational::new(999.into(), 1000.into());
    }
    s
}

impl QuadForm {
    pub fn new(vars: [&str; 2], p: Rational, q: Rational, r: Rational) -> QuadForm {
        QuadForm {
            vars: [vars[0].to_string(), vars[1].to_string()],
            p,
            q,
            r,
        }
    }

    /// Reads a homogeneous quadratic polynomial in exactly the two variables.
    pub fn from_poly(poly: &Poly, vars: [&str; 2]) -> Option<QuadForm> {
        let [x, y] = vars;
        let xx = mono(&[(x, 2)]);
        let yy = mono(&[(y, 2)]);
        let xy = if x < y {
            mono(&[(x, 1), (y, 1)])
        } else {
            mono(&[(y, 1), (x, 1)])
        };
        for (m, _) in poly.terms() {
            if *m != xx && *m != yy && *m != xy {
                return None;
            }
        }
        Some(QuadForm::new(
            vars,
            poly.coefficient(&xx),
            poly.coefficient(&xy) / two(),
            poly.coefficient(&yy),
        ))
    }

    pub fn to_poly(&self) -> Poly {
        let (x, y) = (Poly::var(&self.vars[0]), Poly::var(&self.vars[1]));
        x.mul(&x)
            .scale(&self.p)
            .add(&x.mul(&y).scale(&(&self.q * two())))
            .add(&y.mul(&y).scale(&self.r))
    }

    pub fn trace(&self) -> Rational {
        &self.p + &self.r
    }

    pub fn det(&self) -> Rational {
        &self.p * &self.r - &self.q * &self.q
    }

    pub fn neg(&self) -> QuadForm {
        QuadForm {
            vars: self.vars.clone(),
            p: -&self.p,
            q: -&self.q,
            r: -&self.r,
        }
    }

    /// Sylvester's criterion and its semidefinite variant.
    pub fn definiteness(&self) -> Definiteness {
        let det = self.det();
        if self.p.is_zero() && self.q.is_zero() && self.r.is_zero() {
            return Definiteness::Zero;
        }
        if det.is_positive() {
            if self.p.is_positive() {
                Definiteness::PositiveDefinite
            } else {
                Definiteness::NegativeDefinite
            }
        } else if det.is_zero() {
            if self.p.is_positive() || (self.p.is_zero() && !self.r.is_negative()) {
                Definiteness::PositiveSemidefinite
            } else {
                Definiteness::NegativeSemidefinite
            }
        } else {
            Definiteness::Indefinite
        }
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        !self.p.is_negative() && !self.r.is_negative() && !self.det().is_negative()
    }

    fn shifted(&self, lambda: &Rational) -> QuadForm {
        QuadForm {
            vars: self.vars.clone(),
            p: &self.p - lambda,
            q: self.q.clone(),
            r: &self.r - lambda,
        }
    }

    fn discriminant(&self) -> Rational {
        let d = &self.p - &self.r;
        &d * &d + Rational::from_integer(4.into()) * &self.q * &self.q
    }

    /// Certified `lo <= lambda_min`: `form - lo*I` is checked PSD exactly.
    pub fn lambda_min_lower(&self) -> Rational {
        let s = sqrt_upper(&self.discriminant());
        let mut lo = (self.trace() - s) / two();
        let mut slack = Rational::new(1.into(), 1_000_000_000_000i64.into());
        while !self.shifted(&lo).is_positive_semidefinite() {
            lo -= &slack;
            slack *= two();
        }
        lo
    }

    /// Certified `hi >= lambda_max`: `hi*I - form` is checked PSD exactly.
    pub fn lambda_max_upper(&self) -> Rational {
        let s = sqrt_upper(&self.discriminant());
        let mut hi = (self.trace() + s) / two();
        let mut slack = Rational::new(1.into(), 1_000_000_000_000i64.into());
        while !self.shifted(&hi).neg().is_positive_semidefinite() {
            hi += &slack;
            slack *= two();
        }
        hi
    }

    /// Certified bounds `(lo, hi)` on the extrema of the form over the circle
    /// of radius `r`: `lo <= lambda_min r^2` and `hi >= lambda_max r^2`.
    pub fn extremal_on_sphere(&self, r: &Rational) -> (Rational, Rational) {
        let r2 = r * r;
        (self.lambda_min_lower() * &r2, self.lambda_max_upper() * r2)
    }

    /// Floating-point eigenvalues `(min, max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let t = rational_to_f64(&self.trace());
        let s = rational_to_f64(&self.discriminant()).sqrt();
        ((t - s) / 2.0, (t + s) / 2.0)
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let (p, q, r) = (
            rational_to_f64(&self.p),
            rational_to_f64(&self.q),
            rational_to_f64(&self.r),
        );
        p * x * x + 2.0 * q * x * y + r * y * y
    }
}
