//! Inverted pendulum models, fixed-step RK4 simulation, grid sampling of the
//! vector field and Lyapunov surfaces, and CSV export.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Signed;
use thiserror::Error;

use crate::arith::poly::{rational_to_f64, Poly};
use crate::lyapunov;
use crate::syntax::{HybridProgram, Rational, Term};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("parameter `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
    #[error("invalid simulation setup: {0}")]
    Setup(String),
    #[error("V is not a polynomial in the state: {0}")]
    Surface(String),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Physical parameters and the derived closed-loop coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumParams {
    pub m: Rational,
    pub l: Rational,
    pub f: Rational,
    pub g: Rational,
    pub k1: Rational,
    pub k2: Rational,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

/// `a = k1/(m l)`, `b = (f l + k2)/(m l)`, `c = -g/l`, `d = a + c`.
pub fn derive_coefficients(
    m: &Rational,
    l: &Rational,
    f: &Rational,
    g: &Rational,
    k1: &Rational,
    k2: &Rational,
) -> Result<(Rational, Rational, Rational, Rational), DynamicsError> {
    for (name, v) in [("m", m), ("l", l), ("g", g)] {
        if !v.is_positive() {
            return Err(DynamicsError::NonPositive(name));
        }
    }
    let ml = m * l;
    let a = k1 / &ml;
    let b = (f * l + k2) / &ml;
    let c = -(g / l);
    let d = &a + &c;
    Ok((a, b, c, d))
}

impl PendulumParams {
    pub fn new(
        m: Rational,
        l: Rational,
        f: Rational,
        g: Rational,
        k1: Rational,
        k2: Rational,
    ) -> Result<PendulumParams, DynamicsError> {
        let (a, b, c, d) = derive_coefficients(&m, &l, &f, &g, &k1, &k2)?;
        Ok(PendulumParams {
            m,
            l,
            f,
            g,
            k1,
            k2,
            a,
            b,
            c,
            d,
        })
    }

    /// Named values of all physical and derived parameters.
    pub fn values(&self) -> BTreeMap<String, Rational> {
        [
            ("m", &self.m),
            ("l", &self.l),
            ("f", &self.f),
            ("g", &self.g),
            ("k1", &self.k1),
            ("k2", &self.k2),
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `(w, a th + b w + c sin th)`
    Trig,
    /// `(w, d th + b w)`
    Linear,
}

/// The pendulum ODE with the coefficients as parameters.
pub fn program(variant: Variant) -> HybridProgram {
    let th = || Term::var("th");
    let w = || Term::var("w");
    let rhs = match variant {
        Variant::Linear => Term::add(
            Term::mul(Term::param("d"), th()),
            Term::mul(Term::param("b"), w()),
        ),
        Variant::Trig => Term::add(
            Term::add(
                Term::mul(Term::param("a"), th()),
                Term::mul(Term::param("b"), w()),
            ),
            Term::mul(Term::param("c"), Term::sin(th())),
        ),
    };
    HybridProgram::new(vec![("th", w()), ("w", rhs)])
}

#[derive(Debug, Clone, Copy)]
struct Coeffs {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Coeffs {
    fn of(p: &PendulumParams) -> Coeffs {
        Coeffs {
            a: rational_to_f64(&p.a),
            b: rational_to_f64(&p.b),
            c: rational_to_f64(&p.c),
            d: rational_to_f64(&p.d),
        }
    }

    fn field(&self, variant: Variant, (th, w): (f64, f64)) -> (f64, f64) {
        match variant {
            Variant::Trig => (w, self.a * th + self.b * w + self.c * th.sin()),
            Variant::Linear => (w, self.d * th + self.b * w),
        }
    }
}

pub fn vector_field(params: &PendulumParams, variant: Variant, state: (f64, f64)) -> (f64, f64) {
    Coeffs::of(params).field(variant, state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<(f64, f64)>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, f64) {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

/// Classic fixed-step fourth-order Runge-Kutta from `x0` over `[0, t_end]`.
pub fn simulate(
    params: &PendulumParams,
    variant: Variant,
    x0: (f64, f64),
    dt: f64,
    t_end: f64,
) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(DynamicsError::Setup(format!(
            "need dt > 0 and T >= dt, got dt={dt}, T={t_end}"
        )));
    }
    let k = Coeffs::of(params);
    let f = |x: (f64, f64)| k.field(variant, x);
    let steps = (t_end / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0;
    times.push(0.0);
    states.push(x);
    for i in 1..=steps {
        let k1 = f(x);
        let k2 = f((x.0 + 0.5 * dt * k1.0, x.1 + 0.5 * dt * k1.1));
        let k3 = f((x.0 + 0.5 * dt * k2.0, x.1 + 0.5 * dt * k2.1));
        let k4 = f((x.0 + dt * k3.0, x.1 + dt * k3.1));
        x = (
            x.0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            x.1 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        if !x.0.is_finite() || !x.1.is_finite() {
            return Err(DynamicsError::NonFinite { step: i });
        }
        times.push(i as f64 * dt);
        states.push(x);
    }
    Ok(Trajectory { dt, times, states })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub theta: (f64, f64),
    pub omega: (f64, f64),
    pub n_theta: usize,
    pub n_omega: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            theta: (-1.0, 1.0),
            omega: (-1.0, 1.0),
            n_theta: 41,
            n_omega: 41,
        }
    }
}

impl GridSpec {
    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (range.0 + range.1)];
        }
        (0..n)
            .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub theta: f64,
    pub omega: f64,
    pub dtheta: f64,
    pub domega: f64,
    pub v: f64,
    pub vdot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSample {
    pub spec: GridSpec,
    pub cells: Vec<GridCell>,
}

/// Polynomial evaluators for `V` and its total derivative along `variant`.
pub struct Surfaces {
    v: Poly,
    vdot: Poly,
    values: BTreeMap<String, f64>,
}

impl Surfaces {
    pub fn new(
        params: &PendulumParams,
        variant: Variant,
        v: &Term,
        extra: &BTreeMap<String, Rational>,
    ) -> Result<Surfaces, DynamicsError> {
        let vdot = lyapunov::total_derivative(v, &program(variant))
            .map_err(|e| DynamicsError::Surface(e.to_string()))?;
        let v = Poly::from_term(v).map_err(|e| DynamicsError::Surface(e.to_string()))?;
        let vdot = Poly::from_term(&vdot).map_err(|e| DynamicsError::Surface(e.to_string()))?;
        let mut values: BTreeMap<String, f64> = params
            .values()
            .iter()
            .map(|(k, v)| (k.clone(), rational_to_f64(v)))
            .collect();
        for (k, v) in extra {
            values.insert(k.clone(), rational_to_f64(v));
        }
        Ok(Surfaces { v, vdot, values })
    }

    fn eval(&self, p: &Poly, (th, w): (f64, f64)) -> f64 {
        let env = |n: &str| match n {
            "th" => Some(th),
            "w" => Some(w),
            other => self.values.get(other).copied(),
        };
        p.eval_f64(&env).unwrap_or(f64::NAN)
    }

    pub fn v(&self, x: (f64, f64)) -> f64 {
        self.eval(&self.v, x)
    }

    pub fn vdot(&self, x: (f64, f64)) -> f64 {
        self.eval(&self.vdot, x)
    }
}

/// Samples the vector field, `V` and `V'` on a rectangular grid; rows vary
/// `omega` fastest.
pub fn sample_surfaces(
    params: &PendulumParams,
    variant: Variant,
    surfaces: &Surfaces,
    spec: &GridSpec,
) -> GridSample {
    let mut cells = Vec::with_capacity(spec.n_theta * spec.n_omega);
    for &theta in &GridSpec::axis(spec.theta, spec.n_theta) {
        for &omega in &GridSpec::axis(spec.omega, spec.n_omega) {
            let (dtheta, domega) = vector_field(params, variant, (theta, omega));
            cells.push(GridCell {
                theta,
                omega,
                dtheta,
                domega,
                v: surfaces.v((theta, omega)),
                vdot: surfaces.vdot((theta, omega)),
            });
        }
    }
    GridSample {
        spec: spec.clone(),
        cells,
    }
}

/// Formats with 12 significant digits, shortest of fixed or exponent form.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed)
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_trajectory_csv(
    traj: &Trajectory,
    surfaces: &Surfaces,
    path: &Path,
) -> Result<(), DynamicsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "theta", "omega", "V", "Vdot"])?;
    for (t, &x) in traj.times.iter().zip(&traj.states) {
        w.write_record([
            format_sig12(*t),
            format_sig12(x.0),
            format_sig12(x.1),
            format_sig12(surfaces.v(x)),
            format_sig12(surfaces.vdot(x)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_csv(sample: &GridSample, path: &Path) -> Result<(), DynamicsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta", "omega", "dtheta", "domega", "V", "Vdot"])?;
    for c in &sample.cells {
        w.write_record([
            format_sig12(c.theta),
            format_sig12(c.omega),
            format_sig12(c.dtheta),
            format_sig12(c.domega),
            format_sig12(c.v),
            format_sig12(c.vdot),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.1), "0.1");
        assert_eq!(format_sig12(-13.8), "-13.8");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(1.5e-7), "1.5e-7");
        assert_eq!(format_sig12(20.0), "20");
    }
}
