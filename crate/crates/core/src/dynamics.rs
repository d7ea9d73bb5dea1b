//! Closed-form evolution in `H₁` on both sides of the Dyson map, and the
//! reduced single-oscillator states.
//!
//! Reduced states are written in the system basis `{|0_S⟩, |1_S⟩}`. Tracing
//! out the bath sends `|e_B⟩⟨e_B| ↦ |0_S⟩⟨0_S|`, `|e_S⟩⟨e_S| ↦ |1_S⟩⟨1_S|` and
//! kills the cross terms, so the populations `p(t)`, `q(t)` are the `e_B`
//! weights of `ρ_H(t)` and `ρ_{h_W}(t)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use thiserror::Error;

use crate::linalg::{herm_eig, CMat2, CVec2};
use crate::model::{metric, ModelError, ModelParams, Unitary2};
use crate::tol::{TAU_EIG, TAU_GEN, TAU_HERM, TAU_NORM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("operation needs a diagonal metric (x1 = x2), got x1 = {x1}, x2 = {x2}")]
    NonDiagonalMetric { x1: f64, x2: f64 },
    #[error("initial state is not eta-normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("initial state is zero or not finite")]
    ZeroState,
    #[error("alpha = {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("not a density matrix: {0}")]
    NotDensity(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Initial amplitudes `|ψ(0)⟩ = A|e_S⟩ + B|e_B⟩`, η-normalized for the metric
/// of the parameters they were built with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateH1 {
    a: C64,
    b: C64,
}

/// `‖A|e_S⟩ + B|e_B⟩‖²_η` for the metric of `p`.
pub fn eta_norm_sqr(p: &ModelParams, a: C64, b: C64) -> f64 {
    let r = p.ratio();
    0.5 * (p.x1() + p.x2()) * (a.norm_sqr() / r + b.norm_sqr() * r) + (p.x1() - p.x2()) * (a * b.conj()).re
}

impl StateH1 {
    /// Rescale `(a, b)` to unit η-norm.
    pub fn normalized(p: &ModelParams, a: C64, b: C64) -> Result<Self, DynamicsError> {
        let n = eta_norm_sqr(p, a, b);
        if !(n.is_finite() && n > 0.0) {
            return Err(DynamicsError::ZeroState);
        }
        let s = 1.0 / n.sqrt();
        Ok(Self { a: a * s, b: b * s })
    }

    /// Accept `(a, b)` only if it already has unit η-norm within `τ_norm`.
    pub fn strict(p: &ModelParams, a: C64, b: C64) -> Result<Self, DynamicsError> {
        let n = eta_norm_sqr(p, a, b);
        if !n.is_finite() || n == 0.0 {
            return Err(DynamicsError::ZeroState);
        }
        if (n - 1.0).abs() > TAU_NORM {
            return Err(DynamicsError::NotNormalized(n));
        }
        Ok(Self { a, b })
    }

    /// `A = √(α a₁/(x a₂)) e^{if₁}`, `B = √((1−α) a₂/(x a₁)) e^{if₂}`.
    pub fn from_alpha(p: &ModelParams, alpha: f64, f1: f64, f2: f64) -> Result<Self, DynamicsError> {
        require_diagonal(p)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(DynamicsError::AlphaOutOfRange(alpha));
        }
        let x = p.x1();
        let r = p.ratio();
        Ok(Self {
            a: C64::from_polar((alpha * r / x).sqrt(), f1),
            b: C64::from_polar(((1.0 - alpha) / (r * x)).sqrt(), f2),
        })
    }

    /// Random state with α uniform in `[0, 1]` and uniform phases.
    pub fn random(p: &ModelParams, rng: &mut impl Rng) -> Result<Self, DynamicsError> {
        let alpha = rng.random_range(0.0..=1.0);
        let f1 = rng.random_range(0.0..2.0 * PI);
        let f2 = rng.random_range(0.0..2.0 * PI);
        Self::from_alpha(p, alpha, f1, f2)
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// `A B*`
    pub fn ab(&self) -> C64 {
        self.a * self.b.conj()
    }

    pub fn vector(&self) -> CVec2 {
        CVec2::new(self.a, self.b)
    }
}

fn require_diagonal(p: &ModelParams) -> Result<(), DynamicsError> {
    if p.has_diagonal_metric() {
        Ok(())
    } else {
        Err(DynamicsError::NonDiagonalMetric { x1: p.x1(), x2: p.x2() })
    }
}

/// `(A(t), B(t))` with `|ψ(t)⟩ = e^{−itν}(A(t)|e_S⟩ + B(t)|e_B⟩)`.
pub fn evolve_amplitudes(p: &ModelParams, s: &StateH1, t: f64) -> (C64, C64) {
    let (sin, cos) = (p.omega() * t).sin_cos();
    let r = p.ratio();
    let i = C64::i();
    (s.a * cos - i * s.b * (r * sin), s.b * cos - i * s.a * (sin / r))
}

/// `e^{−itH₁} = e^{−itν} [[cos ωt, −i (a₁/a₂) sin ωt], [−i (a₂/a₁) sin ωt, cos ωt]]`
pub fn propagator(p: &ModelParams, t: f64) -> CMat2 {
    let (sin, cos) = (p.omega() * t).sin_cos();
    let r = p.ratio();
    let i = C64::i();
    CMat2::new(C64::new(cos, 0.0), -i * (r * sin), -i * (sin / r), C64::new(cos, 0.0)).scale(C64::cis(-p.nu() * t))
}

/// `|ψ(t)⟩` including the `e^{−itν}` phase.
pub fn psi(p: &ModelParams, s: &StateH1, t: f64) -> CVec2 {
    let (at, bt) = evolve_amplitudes(p, s, t);
    CVec2::new(at, bt).scale(C64::cis(-p.nu() * t))
}

/// Partial trace over the bath of an operator on `H₁`, as a 2×2 matrix in
/// `{|0_S⟩, |1_S⟩}`.
pub fn trace_out_bath(m: &CMat2) -> CMat2 {
    CMat2::new(m[(1, 1)], C64::new(0.0, 0.0), C64::new(0.0, 0.0), m[(0, 0)])
}

/// Hermitian, trace-one, positive 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Density2 {
    matrix: CMat2,
}

impl Density2 {
    pub fn new(matrix: CMat2) -> Result<Self, DynamicsError> {
        if !matrix.is_hermitian(TAU_HERM) {
            return Err(DynamicsError::NotDensity("not Hermitian"));
        }
        if (matrix.trace() - 1.0).norm() > TAU_NORM {
            return Err(DynamicsError::NotDensity("trace differs from 1"));
        }
        let eig = herm_eig(&matrix).map_err(|_| DynamicsError::NotDensity("not Hermitian"))?;
        if eig.values[0] < -TAU_EIG || eig.values[1] > 1.0 + TAU_EIG {
            return Err(DynamicsError::NotDensity("eigenvalues outside [0, 1]"));
        }
        Ok(Self { matrix })
    }

    fn diagonal(pop0: f64) -> Self {
        Self { matrix: CMat2::real(pop0, 0.0, 0.0, 1.0 - pop0) }
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.matrix
    }

    /// `⟨0_S|ρ|0_S⟩`
    pub fn population(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        herm_eig(&self.matrix).expect("density matrices are Hermitian").values
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }
}

/// The diagonal of the reduced operator `tr_B(|ψ(t)⟩⟨ψ(t)|η)` for a
/// non-product metric. Its entries are its eigenvalues and are complex in
/// general.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexSpectrumReport {
    pub t: f64,
    /// Entries at `|0_S⟩⟨0_S|` and `|1_S⟩⟨1_S|`.
    pub diagonal: [C64; 2],
    pub max_imag: f64,
    pub not_a_density_matrix: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReducedRhoH {
    Density(Density2),
    ComplexSpectrum(ComplexSpectrumReport),
}

/// `tr_B(|ψ(t)⟩⟨ψ(t)|η)` for any metric of the family.
///
/// With `x₁ = x₂` this is `diag(p(t), 1 − p(t))`. Otherwise the two diagonal
/// entries are `(x₁+x₂)/2·(a₁/a₂)|B(t)|² + (x₁−x₂)/2·A(t)*B(t)` and
/// `(x₁+x₂)/2·(a₂/a₁)|A(t)|² + (x₁−x₂)/2·A(t)B(t)*`, reported as they are.
pub fn reduced_rho_h(p: &ModelParams, s: &StateH1, t: f64) -> ReducedRhoH {
    let (at, bt) = evolve_amplitudes(p, s, t);
    let r = p.ratio();
    let half_sum = 0.5 * (p.x1() + p.x2());
    let half_diff = 0.5 * (p.x1() - p.x2());
    if half_diff == 0.0 {
        return ReducedRhoH::Density(Density2::diagonal(half_sum * r * bt.norm_sqr()));
    }
    let d0 = half_sum * r * bt.norm_sqr() + half_diff * (at.conj() * bt);
    let d1 = half_sum / r * at.norm_sqr() + half_diff * (at * bt.conj());
    let max_imag = d0.im.abs().max(d1.im.abs());
    ReducedRhoH::ComplexSpectrum(ComplexSpectrumReport {
        t,
        diagonal: [d0, d1],
        max_imag,
        not_a_density_matrix: max_imag > TAU_NORM,
    })
}

/// Evolution under a non-product metric (`x₁ ≠ x₂` allowed). Only the
/// quasi-Hermitian side is available; it exists to exhibit the complex
/// spectrum of the reduced operator.
#[derive(Clone, Copy, Debug)]
pub struct MetricDemo {
    params: ModelParams,
    initial: StateH1,
}

/// Worst case of the reduced operator over a set of sample times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumScan {
    pub max_imag: f64,
    pub t_at_max: f64,
    pub not_a_density_matrix: bool,
}

impl MetricDemo {
    pub fn new(params: ModelParams, initial: StateH1) -> Result<Self, DynamicsError> {
        StateH1::strict(&params, initial.a, initial.b)?;
        Ok(Self { params, initial })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn amplitudes(&self, t: f64) -> (C64, C64) {
        evolve_amplitudes(&self.params, &self.initial, t)
    }

    pub fn reduced_rho_h(&self, t: f64) -> ReducedRhoH {
        reduced_rho_h(&self.params, &self.initial, t)
    }

    pub fn scan(&self, times: impl IntoIterator<Item = f64>) -> SpectrumScan {
        let mut scan = SpectrumScan { max_imag: 0.0, t_at_max: 0.0, not_a_density_matrix: false };
        for t in times {
            if let ReducedRhoH::ComplexSpectrum(rep) = self.reduced_rho_h(t) {
                if rep.max_imag > scan.max_imag {
                    scan.max_imag = rep.max_imag;
                    scan.t_at_max = t;
                }
            }
        }
        scan.not_a_density_matrix = scan.max_imag > TAU_NORM;
        scan
    }
}

/// `(Im(AB*) ≠ 0, Im(cd*) ≠ 0)`
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Genericity {
    pub initial_generic: bool,
    pub unitary_generic: bool,
}

/// Initial state and Hermitian-side unitary under a product-form metric.
#[derive(Clone, Copy, Debug)]
pub struct Trajectory {
    params: ModelParams,
    initial: StateH1,
    w: Unitary2,
}

impl Trajectory {
    pub fn new(params: ModelParams, initial: StateH1, w: Unitary2) -> Result<Self, DynamicsError> {
        require_diagonal(&params)?;
        StateH1::strict(&params, initial.a, initial.b)?;
        Ok(Self { params, initial, w })
    }

    /// Random parameters, state and Haar unitary.
    pub fn random(rng: &mut impl Rng) -> Self {
        let params = ModelParams::random_diagonal(rng);
        let initial = StateH1::random(&params, rng).expect("diagonal metric");
        let w = Unitary2::haar(rng);
        Self { params, initial, w }
    }

    pub fn with_unitary(&self, w: Unitary2) -> Self {
        Self { w, ..*self }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn initial(&self) -> &StateH1 {
        &self.initial
    }

    pub fn w(&self) -> &Unitary2 {
        &self.w
    }

    pub fn x(&self) -> f64 {
        self.params.x1()
    }

    pub fn omega(&self) -> f64 {
        self.params.omega()
    }

    /// `α = x (a₂/a₁) |A|²`
    pub fn alpha(&self) -> f64 {
        self.x() / self.params.ratio() * self.initial.a.norm_sqr()
    }

    pub fn amplitudes(&self, t: f64) -> (C64, C64) {
        evolve_amplitudes(&self.params, &self.initial, t)
    }

    pub fn psi(&self, t: f64) -> CVec2 {
        psi(&self.params, &self.initial, t)
    }

    /// `‖ψ(t)‖²_η` from the evolved amplitudes.
    pub fn eta_norm_sqr(&self, t: f64) -> f64 {
        let (at, bt) = self.amplitudes(t);
        eta_norm_sqr(&self.params, at, bt)
    }

    pub fn reduced_rho_h(&self, t: f64) -> Density2 {
        Density2::diagonal(self.p(t))
    }

    /// `p(t) = ½ + (½ − α) cos 2ωt − x sin 2ωt Im(A*B)`
    pub fn p(&self, t: f64) -> f64 {
        let (s2, c2) = (2.0 * self.omega() * t).sin_cos();
        let im = (self.initial.a.conj() * self.initial.b).im;
        0.5 + (0.5 - self.alpha()) * c2 - self.x() * s2 * im
    }

    /// Period average of `p`, which is ½ for every trajectory.
    pub fn mean_p(&self) -> f64 {
        0.5
    }

    /// `(γ(t), δ(t)) = (√(x a₂/a₁) A(t), √(x a₁/a₂) B(t))`, the components of
    /// `√η|ψ(t)⟩` without the `e^{−itν}` phase.
    pub fn gamma_delta(&self, t: f64) -> (C64, C64) {
        let (at, bt) = self.amplitudes(t);
        let r = self.params.ratio();
        let x = self.x();
        (at * (x / r).sqrt(), bt * (x * r).sqrt())
    }

    /// `(Ã(t), B̃(t)) = T (A(t), B(t))` with
    /// `T = √(x a₂/a₁) [[a, b a₁/a₂], [c, d a₁/a₂]]`.
    pub fn hermitian_state(&self, t: f64) -> (C64, C64) {
        let (at, bt) = self.amplitudes(t);
        let r = self.params.ratio();
        let k = (self.x() / r).sqrt();
        let w = &self.w;
        ((w.a * at + w.b * bt * r) * k, (w.c * at + w.d * bt * r) * k)
    }

    /// `|φ(t)⟩ = W√η|ψ(t)⟩`, including the `e^{−itν}` phase.
    pub fn phi(&self, t: f64) -> CVec2 {
        let (at, bt) = self.hermitian_state(t);
        CVec2::new(at, bt).scale(C64::cis(-self.params.nu() * t))
    }

    /// `ρ_{h_W}(t) = |φ(t)⟩⟨φ(t)|` entry by entry from `(γ, δ)` and `W`.
    pub fn rho_hw(&self, t: f64) -> CMat2 {
        let (g, d) = self.gamma_delta(t);
        let w = &self.w;
        let top = w.a * g + w.b * d;
        let bottom = w.c * g + w.d * d;
        let off = w.a * w.c.conj() * g.norm_sqr()
            + w.b * w.c.conj() * g.conj() * d
            + w.a * w.d.conj() * g * d.conj()
            + w.b * w.d.conj() * d.norm_sqr();
        CMat2::new(C64::new(top.norm_sqr(), 0.0), off, off.conj(), C64::new(bottom.norm_sqr(), 0.0))
    }

    pub fn reduced_rho_hw(&self, t: f64) -> Density2 {
        Density2::diagonal(self.q(t))
    }

    /// Closed form of `q(t)` in terms of the initial data:
    ///
    /// `q = ½ + 2x Re(AB*) Re(cd*)
    ///    + cos 2ωt [(½ − α)(1 − 2|c|²) − 2x Im(AB*) Im(cd*)]
    ///    + sin 2ωt [(1 − 2α) Im(cd*) + x(1 − 2|c|²) Im(AB*)]`
    pub fn q(&self, t: f64) -> f64 {
        let (s2, c2) = (2.0 * self.omega() * t).sin_cos();
        let ab = self.initial.ab();
        let cd = self.w.cd();
        let x = self.x();
        let alpha = self.alpha();
        let c_sq = self.w.c.norm_sqr();
        0.5 + 2.0 * x * ab.re * cd.re
            + c2 * ((0.5 - alpha) * (1.0 - 2.0 * c_sq) - 2.0 * x * ab.im * cd.im)
            + s2 * ((1.0 - 2.0 * alpha) * cd.im + x * (1.0 - 2.0 * c_sq) * ab.im)
    }

    /// `q(t) = x |c √(a₂/a₁) A(t) + d √(a₁/a₂) B(t)|²`
    pub fn q_from_amplitudes(&self, t: f64) -> f64 {
        let (at, bt) = self.amplitudes(t);
        let r = self.params.ratio();
        self.x() * (self.w.c * at / r.sqrt() + self.w.d * bt * r.sqrt()).norm_sqr()
    }

    /// `q₀ = ½ + 2x Re(AB*) Re(cd*)`
    pub fn mean_q(&self) -> f64 {
        0.5 + 2.0 * self.x() * self.initial.ab().re * self.w.cd().re
    }

    pub fn is_generic(&self) -> Genericity {
        Genericity {
            initial_generic: self.initial.ab().im.abs() > TAU_GEN,
            unitary_generic: self.w.cd().im.abs() > TAU_GEN,
        }
    }

    /// `Re(AB*) Re(cd*) ≠ 0`, the condition for `q₀ ≠ ½`.
    pub fn period_generic(&self) -> bool {
        (self.initial.ab().re * self.w.cd().re).abs() > TAU_GEN
    }

    /// `p(t)` from the explicit reduced matrix `tr_B(|ψ⟩⟨ψ|η)`.
    pub fn p_from_matrix(&self, t: f64) -> f64 {
        let psi = self.psi(t);
        let rho = CMat2::outer(&psi, &psi) * *metric(&self.params).matrix();
        trace_out_bath(&rho)[(0, 0)].re
    }
}
