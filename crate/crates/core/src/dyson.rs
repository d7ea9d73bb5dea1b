//! Time-dependent Dyson maps.
//!
//! With `iψ̇ = Hψ` and `φ = S(t)ψ`, the transformed evolution is `iφ̇ = hφ`
//! with `h = SHS⁻¹ + iṠS⁻¹`. Taking `S(t) = W(t)√η(0) e^{itH}` gives
//! `h = iẆW†`, so any Hermitian `h(t)` — including `h = 0` — is reached by
//! solving `iẆ = h(t)W`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{expm_oracle, herm_eig, psd_sqrt, CMat2, CVec2, LinalgError};
use crate::model::{build_h1, ModelError, ModelParams, Metric2};
use crate::tol::{H_FD, H_ODE, TAU_HERM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DysonError {
    #[error("generator is not Hermitian at t = {t} (defect {defect})")]
    NonHermitianGenerator { t: f64, defect: f64 },
    #[error("invalid step or horizon: h = {h}, t_end = {t_end}")]
    InvalidGrid { h: f64, t_end: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `η(t) = e^{−itH†} η(0) e^{itH}` for the `H₁` of `params`.
#[derive(Clone, Copy, Debug)]
pub struct MetricFlow {
    params: ModelParams,
    eta0: Metric2,
    h: CMat2,
    sqrt_eta0: CMat2,
}

impl MetricFlow {
    pub fn new(params: ModelParams, eta0: Metric2) -> Self {
        Self { params, eta0, h: build_h1(&params), sqrt_eta0: eta0.sqrt() }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn eta0(&self) -> &Metric2 {
        &self.eta0
    }

    pub fn hamiltonian(&self) -> &CMat2 {
        &self.h
    }

    pub fn eta_t(&self, t: f64) -> CMat2 {
        // e^{−itH†} η₀ e^{itH}
        expm_oracle(&self.h.adjoint(), t) * *self.eta0.matrix() * expm_oracle(&self.h, -t)
    }

    /// `‖i ∂_t η − (H†η − ηH)‖_max` with a central difference for `∂_t η`.
    pub fn flow_residual(&self, t: f64) -> f64 {
        let deriv = (self.eta_t(t + H_FD) - self.eta_t(t - H_FD)) * (0.5 / H_FD);
        let eta = self.eta_t(t);
        let rhs = self.h.adjoint() * eta - eta * self.h;
        (deriv.scale(C64::i()) - rhs).max_norm()
    }

    /// Smallest eigenvalue of `η(t)` over `samples + 1` points of `[0, t_max]`.
    pub fn min_eigenvalue(&self, t_max: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|k| {
                let eta = self.eta_t(t_max * k as f64 / samples as f64).hermitian_part();
                herm_eig(&eta).map(|e| e.values[0]).unwrap_or(f64::NEG_INFINITY)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Random positive 2×2 metric `GG†/tr(GG†) + ε·1` with Gaussian `G`.
pub fn random_positive_metric(rng: &mut impl Rng) -> Metric2 {
    let mut g = CMat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            g[(i, j)] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    let m = g * g.adjoint();
    let m = m.scale_re(1.0 / m.trace().re) + CMat2::identity().scale_re(0.05);
    Metric2::custom(m.hermitian_part()).expect("positive by construction")
}

/// `W(t)` solved on a uniform grid.
#[derive(Clone)]
pub struct SolvedPath {
    generator: Arc<dyn Fn(f64) -> CMat2 + Send + Sync>,
    step: f64,
    grid: Vec<CMat2>,
}

impl fmt::Debug for SolvedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolvedPath").field("step", &self.step).field("points", &self.grid.len()).finish()
    }
}

impl SolvedPath {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_end(&self) -> f64 {
        self.step * (self.grid.len() - 1) as f64
    }

    pub fn grid(&self) -> &[CMat2] {
        &self.grid
    }

    /// One RK4 step from the nearest grid point (backwards if needed).
    pub fn at(&self, t: f64) -> CMat2 {
        let n = self.grid.len() - 1;
        let i = ((t / self.step).round().max(0.0) as usize).min(n);
        let ti = i as f64 * self.step;
        let dt = t - ti;
        if dt == 0.0 {
            return self.grid[i];
        }
        reunitarize(&rk4_step(&*self.generator, ti, &self.grid[i], dt))
    }
}

/// A unitary path `W(t)` with `W(0) = 1`.
#[derive(Clone, Debug)]
pub enum UnitaryPath {
    Identity,
    /// `W(t) = e^{−itA}`
    Exponential(CMat2),
    Solved(SolvedPath),
}

impl UnitaryPath {
    pub fn at(&self, t: f64) -> CMat2 {
        match self {
            UnitaryPath::Identity => CMat2::identity(),
            UnitaryPath::Exponential(a) => expm_oracle(a, t),
            UnitaryPath::Solved(path) => path.at(t),
        }
    }

    /// Central difference of `W`.
    pub fn derivative(&self, t: f64) -> CMat2 {
        (self.at(t + H_FD) - self.at(t - H_FD)) * (0.5 / H_FD)
    }
}

/// `−i A(t) W`
fn rhs(a: &CMat2, w: &CMat2) -> CMat2 {
    (*a * *w).scale(-C64::i())
}

fn rk4_step(generator: &dyn Fn(f64) -> CMat2, t: f64, w: &CMat2, dt: f64) -> CMat2 {
    let a_mid = generator(t + 0.5 * dt);
    let k1 = rhs(&generator(t), w);
    let k2 = rhs(&a_mid, &(*w + k1 * (0.5 * dt)));
    let k3 = rhs(&a_mid, &(*w + k2 * (0.5 * dt)));
    let k4 = rhs(&generator(t + dt), &(*w + k3 * dt));
    *w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Unitary polar factor `W (W†W)^{−1/2}`.
fn reunitarize(w: &CMat2) -> CMat2 {
    let root = psd_sqrt(&(w.adjoint() * *w).hermitian_part()).expect("W†W is PSD");
    *w * root.inverse().expect("W is close to unitary")
}

/// Integrate `iẆ = A(t)W`, `W(0) = 1` on `[0, t_end]` with classical RK4
/// and a polar re-projection after every step.
pub fn solve_w_ode(
    generator: impl Fn(f64) -> CMat2 + Send + Sync + 'static,
    t_end: f64,
    h_ode: f64,
) -> Result<UnitaryPath, DysonError> {
    if !(h_ode > 0.0 && t_end >= 0.0 && t_end.is_finite()) {
        return Err(DysonError::InvalidGrid { h: h_ode, t_end });
    }
    let steps = ((t_end / h_ode).ceil() as usize).max(1);
    let step = t_end.max(h_ode) / steps as f64;
    let check = |t: f64| {
        let defect = generator(t).hermiticity_defect();
        if defect > TAU_HERM {
            Err(DysonError::NonHermitianGenerator { t, defect })
        } else {
            Ok(())
        }
    };
    let mut grid = Vec::with_capacity(steps + 1);
    let mut w = CMat2::identity();
    grid.push(w);
    for i in 0..steps {
        let t = i as f64 * step;
        check(t)?;
        check(t + 0.5 * step)?;
        w = reunitarize(&rk4_step(&generator, t, &w, step));
        grid.push(w);
    }
    check(steps as f64 * step)?;
    Ok(UnitaryPath::Solved(SolvedPath { generator: Arc::new(generator), step, grid }))
}

/// `S(t) = W(t) √η(0) e^{itH}`
pub fn s_of_t(flow: &MetricFlow, path: &UnitaryPath, t: f64) -> CMat2 {
    path.at(t) * flow.sqrt_eta0 * expm_oracle(&flow.h, -t)
}

/// `h(t) = S H S⁻¹ + iṠS⁻¹` with a central difference for `Ṡ`.
pub fn h_of_t(flow: &MetricFlow, path: &UnitaryPath, t: f64) -> Result<CMat2, DysonError> {
    let s = s_of_t(flow, path, t);
    let s_inv = s.inverse()?;
    let s_dot = (s_of_t(flow, path, t + H_FD) - s_of_t(flow, path, t - H_FD)) * (0.5 / H_FD);
    Ok(s * flow.h * s_inv + (s_dot * s_inv).scale(C64::i()))
}

/// `h(t) = iẆW†`
pub fn h_from_w(path: &UnitaryPath, t: f64) -> CMat2 {
    (path.derivative(t) * path.at(t).adjoint()).scale(C64::i())
}

/// Integrate `iφ̇ = h(t)φ` from `φ(0) = S(0)ψ₀` with RK4 and map back through
/// `S(t_end)⁻¹`; returns the distance to `e^{−i t_end H}ψ₀`.
pub fn round_trip_error(flow: &MetricFlow, path: &UnitaryPath, psi0: &CVec2, t_end: f64, h_ode: f64) -> Result<f64, DysonError> {
    let steps = ((t_end / h_ode).ceil() as usize).max(1);
    let dt = t_end / steps as f64;
    let f = |t: f64, phi: &CVec2| -> CVec2 { (h_from_w(path, t) * *phi).scale(-C64::i()) };
    let mut phi = s_of_t(flow, path, 0.0) * *psi0;
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = f(t, &phi);
        let k2 = f(t + 0.5 * dt, &(phi + k1.scale(C64::new(0.5 * dt, 0.0))));
        let k3 = f(t + 0.5 * dt, &(phi + k2.scale(C64::new(0.5 * dt, 0.0))));
        let k4 = f(t + dt, &(phi + k3.scale(C64::new(dt, 0.0))));
        let sum = k1 + k2.scale(C64::new(2.0, 0.0)) + k3.scale(C64::new(2.0, 0.0)) + k4;
        phi = phi + sum.scale(C64::new(dt / 6.0, 0.0));
    }
    let psi = s_of_t(flow, path, t_end).inverse()? * phi;
    Ok(psi.dist(&(expm_oracle(&flow.h, t_end) * *psi0)))
}

/// `|W_h − W_{h/2}| / |W_{h/2} − W_{h/4}|` at `t_end`; about 16 for a
/// fourth-order method.
pub fn step_halving_ratio(
    generator: impl Fn(f64) -> CMat2 + Clone + Send + Sync + 'static,
    t_end: f64,
    h: f64,
) -> Result<f64, DysonError> {
    let end = |step: f64| -> Result<CMat2, DysonError> { Ok(solve_w_ode(generator.clone(), t_end, step)?.at(t_end)) };
    let (w1, w2, w4) = (end(h)?, end(0.5 * h)?, end(0.25 * h)?);
    Ok(w1.dist(&w2) / w2.dist(&w4))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoChoice {
    HZero,
    ConstantA,
    TimeDepA,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub choice: DemoChoice,
    pub t_end: f64,
    pub samples: usize,
    /// `max_t ‖h(t) − target(t)‖_max` with `h` from `SHS⁻¹ + iṠS⁻¹`.
    pub max_deviation: f64,
    /// `max_t ‖h(t) − iẆW†‖_max`.
    pub max_w_form_mismatch: f64,
    pub max_hermiticity_defect: f64,
    /// `max_t ‖W(t)†W(t) − 1‖_max`.
    pub max_unitarity_defect: f64,
}

/// `diag(1, 2)`
pub fn demo_constant_generator() -> CMat2 {
    CMat2::real(1.0, 0.0, 0.0, 2.0)
}

/// `A₀ + A₁ cos t` with non-commuting Hermitian `A₀`, `A₁`.
pub fn demo_time_dependent_generator(t: f64) -> CMat2 {
    let a0 = CMat2::new(C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.3, 0.2), C64::new(-0.5, 0.0));
    let a1 = CMat2::new(C64::new(0.4, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5), C64::new(0.2, 0.0));
    a0 + a1 * t.cos()
}

/// Run one of the three constructions over `samples + 1` points of
/// `[0, t_end]`. `h_zero` uses `η(0) = 1`; the others use the model metric.
pub fn run_demo(choice: DemoChoice, params: &ModelParams, t_end: f64, samples: usize) -> Result<DemoReport, DysonError> {
    let (flow, path, target): (MetricFlow, UnitaryPath, Box<dyn Fn(f64) -> CMat2>) = match choice {
        DemoChoice::HZero => (
            MetricFlow::new(*params, Metric2::custom(CMat2::identity())?),
            UnitaryPath::Identity,
            Box::new(|_| CMat2::zeros()),
        ),
        DemoChoice::ConstantA => (
            MetricFlow::new(*params, crate::model::metric(params)),
            UnitaryPath::Exponential(demo_constant_generator()),
            Box::new(|_| demo_constant_generator()),
        ),
        DemoChoice::TimeDepA => (
            MetricFlow::new(*params, crate::model::metric(params)),
            solve_w_ode(demo_time_dependent_generator, t_end, H_ODE)?,
            Box::new(demo_time_dependent_generator),
        ),
    };
    let mut report = DemoReport {
        choice,
        t_end,
        samples,
        max_deviation: 0.0,
        max_w_form_mismatch: 0.0,
        max_hermiticity_defect: 0.0,
        max_unitarity_defect: 0.0,
    };
    for k in 0..=samples {
        let t = t_end * k as f64 / samples.max(1) as f64;
        let h = h_of_t(&flow, &path, t)?;
        report.max_deviation = report.max_deviation.max(h.dist(&target(t)));
        report.max_w_form_mismatch = report.max_w_form_mismatch.max(h.dist(&h_from_w(&path, t)));
        report.max_hermiticity_defect = report.max_hermiticity_defect.max(h.hermiticity_defect());
        report.max_unitarity_defect = report.max_unitarity_defect.max(path.at(t).unitarity_defect());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::metric;
    use crate::rng;
    use crate::tol::{TAU_EXP, TAU_FD, TAU_ODE};

    fn params() -> ModelParams {
        ModelParams::diagonal(1.0, 1.0, 0.6, 1, 1.0).unwrap()
    }

    fn identity_flow() -> MetricFlow {
        MetricFlow::new(params(), Metric2::custom(CMat2::identity()).unwrap())
    }

    #[test]
    fn flow_examples() {
        let flow = MetricFlow::new(params(), metric(&params()));
        assert!(flow.eta_t(0.0).dist(flow.eta0().matrix()) < 1e-15);
        for k in 0..20 {
            assert!(flow.eta_t(0.5 * k as f64).dist(flow.eta0().matrix()) < TAU_EXP);
        }
        let flow = identity_flow();
        assert!(flow.eta_t(1.0).dist(&CMat2::identity()) > 1e-2);
        assert!(flow.min_eigenvalue(10.0, 200) > 0.0);
        for k in 0..10 {
            assert!(flow.flow_residual(0.7 * k as f64) < TAU_FD);
        }
    }

    #[test]
    fn positivity_along_random_flows() {
        let mut rng = rng::seeded(1);
        for _ in 0..20 {
            let p = ModelParams::random_diagonal(&mut rng);
            let flow = MetricFlow::new(p, random_positive_metric(&mut rng));
            assert!(flow.min_eigenvalue(10.0, 100) > 0.0);
        }
    }

    #[test]
    fn s_of_t_examples() {
        let flow = MetricFlow::new(params(), metric(&params()));
        let s0 = s_of_t(&flow, &UnitaryPath::Identity, 0.0);
        assert!(s0.dist(&flow.eta0().sqrt()) < 1e-15);
        let path = UnitaryPath::Exponential(demo_constant_generator());
        for k in 0..10 {
            let t = 0.4 * k as f64;
            let s = s_of_t(&flow, &path, t);
            assert!((s.adjoint() * s).dist(&flow.eta_t(-t)) < TAU_EXP);
        }
    }

    #[test]
    fn h_zero_and_constant() {
        let flow = identity_flow();
        for k in 0..20 {
            let t = 0.3 * k as f64;
            assert!(h_of_t(&flow, &UnitaryPath::Identity, t).unwrap().max_norm() < TAU_FD);
        }
        // any η(0) with W ≡ 1 also gives h = 0
        let flow = MetricFlow::new(params(), metric(&params().with_metric(2.0, 1.0).unwrap()));
        assert!(h_of_t(&flow, &UnitaryPath::Identity, 1.3).unwrap().max_norm() < TAU_FD);
        let path = UnitaryPath::Exponential(demo_constant_generator());
        for k in 0..20 {
            let t = 0.3 * k as f64;
            let h = h_of_t(&flow, &path, t).unwrap();
            assert!(h.dist(&demo_constant_generator()) < TAU_FD);
            assert!(h.hermiticity_defect() < TAU_FD);
        }
    }

    #[test]
    fn ode_examples() {
        let path = solve_w_ode(|_| CMat2::zeros(), 2.0, H_ODE).unwrap();
        assert!(path.at(1.234).dist(&CMat2::identity()) < 1e-15);
        let a0 = CMat2::new(C64::new(0.3, 0.0), C64::new(0.1, 0.4), C64::new(0.1, -0.4), C64::new(-1.0, 0.0));
        let path = solve_w_ode(move |_| a0, 3.0, H_ODE).unwrap();
        for k in 0..=30 {
            let t = 0.1 * k as f64 + 0.00037;
            assert!(path.at(t).dist(&expm_oracle(&a0, t)) < TAU_ODE);
        }
        let bad = CMat2::real(0.0, 1.0, 0.0, 0.0);
        assert!(matches!(solve_w_ode(move |_| bad, 1.0, H_ODE), Err(DysonError::NonHermitianGenerator { .. })));
    }

    #[test]
    fn fourth_order_convergence() {
        let ratio = step_halving_ratio(demo_time_dependent_generator, 2.0, 0.05).unwrap();
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn time_dependent_recovery() {
        let flow = MetricFlow::new(params(), metric(&params()));
        let path = solve_w_ode(demo_time_dependent_generator, 5.0, H_ODE).unwrap();
        for k in 0..=50 {
            let t = 0.1 * k as f64;
            let h = h_of_t(&flow, &path, t).unwrap();
            assert!(h.dist(&demo_time_dependent_generator(t)) < 10.0 * TAU_ODE);
            assert!(path.at(t).unitarity_defect() < TAU_ODE);
        }
    }

    #[test]
    fn round_trip() {
        let flow = MetricFlow::new(params(), metric(&params()));
        let path = solve_w_ode(demo_time_dependent_generator, 2.0, H_ODE).unwrap();
        let psi0 = CVec2::new(C64::new(0.6, 0.1), C64::new(-0.2, 0.5));
        assert!(round_trip_error(&flow, &path, &psi0, 2.0, 1e-2).unwrap() < 10.0 * TAU_ODE);
    }

    #[test]
    fn demos() {
        let p = params();
        let r = run_demo(DemoChoice::HZero, &p, 5.0, 50).unwrap();
        assert!(r.max_deviation <= TAU_FD, "{r:?}");
        let r = run_demo(DemoChoice::ConstantA, &p, 5.0, 50).unwrap();
        assert!(r.max_deviation <= TAU_FD, "{r:?}");
        let r = run_demo(DemoChoice::TimeDepA, &p, 5.0, 50).unwrap();
        assert!(r.max_deviation <= 10.0 * TAU_ODE, "{r:?}");
        assert!(r.max_w_form_mismatch <= TAU_FD && r.max_unitarity_defect <= TAU_ODE);
    }
}
