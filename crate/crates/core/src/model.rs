//! The single-excitation sector `H₁ = span{|e_S⟩, |e_B⟩}` of the oscillator-bath
//! Hamiltonian, its bi-orthonormal eigensystem, the metric family and the
//! Dyson maps `S = W√η`.
//!
//! Basis order is `{|e_S⟩, |e_B⟩}` everywhere: index 0 is the excitation on the
//! system oscillator, index 1 the symmetric collective bath excitation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{psd_sqrt, CMat2, CVec2, LinalgError};
use crate::rng;
use crate::tol::TAU_EIG;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameters outside the unbroken regime 0 <= |kappa| < g (g = {g}, kappa = {kappa})")]
    InvalidRegime { g: f64, kappa: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("not unitary: defect {0:e}")]
    NotUnitary(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Physical constants and metric weights.
///
/// Construction validates eagerly; the derived quantities `a₁ = √(g+κ)`,
/// `a₂ = √(g−κ)` and `ω = √N √(g²−κ²)` are computed once.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    nu: f64,
    g: f64,
    kappa: f64,
    n_bath: u32,
    x1: f64,
    x2: f64,
    a1: f64,
    a2: f64,
    omega: f64,
}

impl ModelParams {
    pub fn new(nu: f64, g: f64, kappa: f64, n_bath: u32, x1: f64, x2: f64) -> Result<Self, ModelError> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter { name, value, reason: "must be finite and > 0" })
            }
        };
        positive("nu", nu)?;
        positive("x1", x1)?;
        positive("x2", x2)?;
        if n_bath == 0 {
            return Err(ModelError::InvalidParameter { name: "n_bath", value: 0.0, reason: "must be >= 1" });
        }
        if !kappa.is_finite() {
            return Err(ModelError::InvalidParameter { name: "kappa", value: kappa, reason: "must be finite" });
        }
        if !(g.is_finite() && g > 0.0 && kappa.abs() < g) {
            return Err(ModelError::InvalidRegime { g, kappa });
        }
        let a1 = (g + kappa).sqrt();
        let a2 = (g - kappa).sqrt();
        let omega = (n_bath as f64).sqrt() * a1 * a2;
        if !(omega > 0.0) {
            return Err(ModelError::InvalidRegime { g, kappa });
        }
        Ok(Self { nu, g, kappa, n_bath, x1, x2, a1, a2, omega })
    }

    /// Diagonal (product-form) metric `x₁ = x₂ = x`.
    pub fn diagonal(nu: f64, g: f64, kappa: f64, n_bath: u32, x: f64) -> Result<Self, ModelError> {
        Self::new(nu, g, kappa, n_bath, x, x)
    }

    /// Same physics, different metric weights.
    pub fn with_metric(&self, x1: f64, x2: f64) -> Result<Self, ModelError> {
        Self::new(self.nu, self.g, self.kappa, self.n_bath, x1, x2)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn n_bath(&self) -> u32 {
        self.n_bath
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn x2(&self) -> f64 {
        self.x2
    }
    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    /// `a₁/a₂`
    pub fn ratio(&self) -> f64 {
        self.a1 / self.a2
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn omega_plus(&self) -> f64 {
        self.nu + self.omega
    }
    pub fn omega_minus(&self) -> f64 {
        self.nu - self.omega
    }
    /// Period `π/ω` of the populations and of `ρ_{h_W}(t)`.
    pub fn population_period(&self) -> f64 {
        PI / self.omega
    }
    pub fn has_diagonal_metric(&self) -> bool {
        self.x1 == self.x2
    }

    /// Random valid parameters with a diagonal metric, for property tests.
    pub fn random_diagonal(rng: &mut impl Rng) -> Self {
        let g = rng.random_range(0.5..2.0);
        let kappa = g * rng.random_range(-0.9..0.9);
        let nu = rng.random_range(0.2..3.0);
        let n_bath = rng.random_range(1..=16);
        let x = rng.random_range(0.25..4.0);
        Self::diagonal(nu, g, kappa, n_bath, x).expect("sampled inside the valid regime")
    }
}

/// `H₁` as a matrix: `ν` on the diagonal, `(g+κ)√N` at (S, B) and `(g−κ)√N` at
/// (B, S).
pub fn build_h1(p: &ModelParams) -> CMat2 {
    let sn = (p.n_bath as f64).sqrt();
    CMat2::real(p.nu, (p.g + p.kappa) * sn, (p.g - p.kappa) * sn, p.nu)
}

/// `(ω₊, ω₋)`
pub fn spectrum(p: &ModelParams) -> (f64, f64) {
    (p.omega_plus(), p.omega_minus())
}

/// Eigenvectors of `H₁` (`v±`) and of `H₁†` (`v*±`), normalized so that
/// `⟨v*ᵢ|vⱼ⟩ = δᵢⱼ`.
#[derive(Clone, Copy, Debug)]
pub struct BiSystem {
    pub v_plus: CVec2,
    pub v_minus: CVec2,
    pub vstar_plus: CVec2,
    pub vstar_minus: CVec2,
}

impl BiSystem {
    /// `ω₊|v₊⟩⟨v*₊| + ω₋|v₋⟩⟨v*₋|`
    pub fn spectral_sum(&self, p: &ModelParams) -> CMat2 {
        CMat2::outer(&self.v_plus, &self.vstar_plus).scale_re(p.omega_plus())
            + CMat2::outer(&self.v_minus, &self.vstar_minus).scale_re(p.omega_minus())
    }

    /// Largest deviation of `⟨v*ᵢ|vⱼ⟩` from `δᵢⱼ`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let one = C64::new(1.0, 0.0);
        [
            (self.vstar_plus.inner(&self.v_plus) - one).norm(),
            (self.vstar_minus.inner(&self.v_minus) - one).norm(),
            self.vstar_plus.inner(&self.v_minus).norm(),
            self.vstar_minus.inner(&self.v_plus).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn bi_system(p: &ModelParams) -> BiSystem {
    let r = (p.a1 / p.a2).sqrt();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |x: f64, y: f64| CVec2::new(C64::new(s * x, 0.0), C64::new(s * y, 0.0));
    BiSystem {
        v_plus: v(r, 1.0 / r),
        v_minus: v(r, -1.0 / r),
        vstar_plus: v(1.0 / r, r),
        vstar_minus: v(1.0 / r, -r),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricKind {
    /// `x₁ = x₂ = x`: diagonal in `{|e_S⟩, |e_B⟩}`, product form.
    Diagonal { x: f64 },
    /// `x₁ ≠ x₂`: admissible metric for `H₁` that is not of product form.
    General { x1: f64, x2: f64 },
    /// Arbitrary positive matrix, not necessarily a metric for `H₁`.
    Custom,
}

/// Positive 2×2 operator on `H₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric2 {
    matrix: CMat2,
    kind: MetricKind,
}

impl Metric2 {
    /// Wrap an arbitrary strictly positive Hermitian matrix.
    pub fn custom(matrix: CMat2) -> Result<Self, ModelError> {
        let eig = crate::linalg::herm_eig(&matrix)?;
        if eig.values[0] <= 0.0 {
            return Err(LinalgError::NotPsd(eig.values[0]).into());
        }
        Ok(Self { matrix: matrix.hermitian_part(), kind: MetricKind::Custom })
    }

    pub fn matrix(&self) -> &CMat2 {
        &self.matrix
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn sqrt(&self) -> CMat2 {
        psd_sqrt(&self.matrix).expect("metric is positive by construction")
    }
}

/// `½ [[(x₁+x₂)a₂/a₁, x₁−x₂], [x₁−x₂, (x₁+x₂)a₁/a₂]]`
pub fn metric(p: &ModelParams) -> Metric2 {
    let sum = p.x1 + p.x2;
    let diff = p.x1 - p.x2;
    let matrix = CMat2::real(
        0.5 * sum * p.a2 / p.a1,
        0.5 * diff,
        0.5 * diff,
        0.5 * sum * p.a1 / p.a2,
    );
    let kind = if p.x1 == p.x2 {
        MetricKind::Diagonal { x: p.x1 }
    } else {
        MetricKind::General { x1: p.x1, x2: p.x2 }
    };
    Metric2 { matrix, kind }
}

/// `x₁|v*₊⟩⟨v*₊| + x₂|v*₋⟩⟨v*₋|`, the spectral form of the metric.
pub fn metric_from_bi_system(p: &ModelParams) -> CMat2 {
    let bs = bi_system(p);
    CMat2::outer(&bs.vstar_plus, &bs.vstar_plus).scale_re(p.x1)
        + CMat2::outer(&bs.vstar_minus, &bs.vstar_minus).scale_re(p.x2)
}

/// `‖H₁†η − ηH₁‖_max`
pub fn quasi_hermiticity_residual(p: &ModelParams, eta: &Metric2) -> f64 {
    let h = build_h1(p);
    (h.adjoint() * eta.matrix - eta.matrix * h).max_norm()
}

/// Unitary `W = [[a, b], [c, d]]` on `H₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Unitary2 {
    /// Checks `ac* + bd* = 0`, `|a|²+|b|² = 1 = |c|²+|d|²` within `τ_eig`.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self, ModelError> {
        let w = Self { a, b, c, d };
        let defect = w.defect();
        if !defect.is_finite() || defect > TAU_EIG {
            return Err(ModelError::NotUnitary(defect));
        }
        Ok(w)
    }

    pub fn from_matrix(m: &CMat2) -> Result<Self, ModelError> {
        Self::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one }
    }

    /// `diag(e^{iΦ₁}, e^{iΦ₂})`
    pub fn diagonal(phi1: f64, phi2: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self { a: C64::cis(phi1), b: zero, c: zero, d: C64::cis(phi2) }
    }

    /// `[[0, e^{iΦ₁}], [e^{iΦ₂}, 0]]`
    pub fn anti_diagonal(phi1: f64, phi2: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self { a: zero, b: C64::cis(phi1), c: C64::cis(phi2), d: zero }
    }

    /// Real unitary with `c ∈ [0, 1]` and `d = √(1−c²) ≥ 0`:
    /// `[[d, −c], [c, d]]`.
    pub fn real_cd(c: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&c) {
            return Err(ModelError::InvalidParameter { name: "c", value: c, reason: "must lie in [0, 1]" });
        }
        let d = (1.0 - c * c).sqrt();
        Ok(Self {
            a: C64::new(d, 0.0),
            b: C64::new(-c, 0.0),
            c: C64::new(c, 0.0),
            d: C64::new(d, 0.0),
        })
    }

    /// Haar-random draw: a uniform phase times an SU(2) element built from a
    /// uniform point on the 3-sphere.
    pub fn haar(rng: &mut impl Rng) -> Self {
        let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = C64::new(g[0] / n, g[1] / n);
        let beta = C64::new(g[2] / n, g[3] / n);
        let phase = C64::cis(rng.random_range(0.0..2.0 * PI));
        Self {
            a: phase * alpha,
            b: phase * beta,
            c: -phase * beta.conj(),
            d: phase * alpha.conj(),
        }
    }

    pub fn matrix(&self) -> CMat2 {
        CMat2::new(self.a, self.b, self.c, self.d)
    }

    pub fn adjoint(&self) -> Self {
        Self { a: self.a.conj(), b: self.c.conj(), c: self.b.conj(), d: self.d.conj() }
    }

    /// Largest violation of the unitarity constraints.
    pub fn defect(&self) -> f64 {
        let row = (self.a * self.c.conj() + self.b * self.d.conj()).norm();
        let n1 = (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs();
        let n2 = (self.c.norm_sqr() + self.d.norm_sqr() - 1.0).abs();
        row.max(n1).max(n2)
    }

    /// `c d*`
    pub fn cd(&self) -> C64 {
        self.c * self.d.conj()
    }
}

/// Deterministic Haar-random unitary for `seed`.
pub fn random_unitary2(seed: u64) -> Unitary2 {
    Unitary2::haar(&mut rng::seeded(seed))
}

/// `S = W √η` for the metric of `p`.
pub fn dyson_s(p: &ModelParams, w: &Unitary2) -> CMat2 {
    w.matrix() * metric(p).sqrt()
}

/// `h_W = S H₁ S⁻¹`
pub fn hermitian_counterpart(p: &ModelParams, w: &Unitary2) -> CMat2 {
    let s = dyson_s(p, w);
    s * build_h1(p) * s.inverse().expect("S is invertible for a positive metric")
}
