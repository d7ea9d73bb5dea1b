//! Entropy of the reduced states, period estimation, system-bath
//! entanglement, the period-averaged state and its concurrence, and the
//! classifiers for unitaries and metrics.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::linalg::{herm_eig, psd_sqrt, CMat2, CMat4};
use crate::model::{Metric2, Unitary2};
use crate::quadrature::simpson_mean;
use crate::tol::{SIMPSON_PANELS, TAU_EIG, TAU_ENT, TAU_NORM, TAU_PER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("population {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("curve has {got} intervals, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("state is zero")]
    ZeroState,
    #[error("state is already a product state")]
    AlreadyProduct,
    #[error("metric is not diagonal (off-diagonal magnitude {0})")]
    NotDiagonal(f64),
}

/// Binary entropy `−q ln q − (1−q) ln(1−q)` in nats.
pub fn entropy(pop: f64) -> Result<f64, AnalyticsError> {
    if !(-TAU_NORM..=1.0 + TAU_NORM).contains(&pop) {
        return Err(AnalyticsError::OutOfRange(pop));
    }
    let q = pop.clamp(0.0, 1.0);
    let term = |v: f64| if v > 0.0 { -v * v.ln() } else { 0.0 };
    Ok(term(q) + term(1.0 - q))
}

/// Which reduced state: `ρ_H` (population `p`) or `ρ_{h_W}` (population `q`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    NonHermitian,
    Hermitian,
}

impl Side {
    pub fn population(self, traj: &Trajectory, t: f64) -> f64 {
        match self {
            Side::NonHermitian => traj.p(t),
            Side::Hermitian => traj.q(t),
        }
    }
}

/// A function sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EntropyCurve {
    /// `f` on `intervals + 1` uniform points over `[0, window]`.
    pub fn from_fn(window: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = window / intervals as f64;
        let times: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    /// Entropy of a population curve.
    pub fn from_population(window: f64, intervals: usize, pop: impl Fn(f64) -> f64) -> Result<Self, AnalyticsError> {
        let h = window / intervals as f64;
        let times: Vec<f64> = (0..=intervals).map(|i| i as f64 * h).collect();
        let values = times.iter().map(|&t| entropy(pop(t))).collect::<Result<_, _>>()?;
        Ok(Self { times, values })
    }

    pub fn intervals(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn window(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn step(&self) -> f64 {
        self.window() / self.intervals() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    /// Indices of local minima, treating the window as one period of the
    /// curve (the last sample duplicates the first and is skipped).
    pub fn periodic_local_minima(&self) -> Vec<usize> {
        let n = self.intervals();
        if n < 3 {
            return Vec::new();
        }
        let v = &self.values;
        let slack = 1e-14 * self.range().max(1e-300);
        (0..n)
            .filter(|&i| {
                let prev = v[(i + n - 1) % n];
                let next = v[(i + 1) % n];
                v[i] < prev - slack && v[i] <= next + slack
            })
            .collect()
    }

    /// Four-point Lagrange interpolation at `t` (clamped to the grid).
    fn interpolate(&self, t: f64) -> f64 {
        let n = self.intervals();
        let h = self.step();
        let s = ((t - self.times[0]) / h).clamp(0.0, n as f64);
        let j = (s.floor() as usize).clamp(1, n.saturating_sub(2).max(1));
        let x = s - j as f64;
        if n < 3 {
            let j = (s.floor() as usize).min(n - 1);
            let x = s - j as f64;
            return self.values[j] * (1.0 - x) + self.values[j + 1] * x;
        }
        let v = &self.values;
        let l0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
        let l1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        let l2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        let l3 = (x + 1.0) * x * (x - 1.0) / 6.0;
        l0 * v[j - 1] + l1 * v[j] + l2 * v[j + 1] + l3 * v[j + 2]
    }

    /// `(max, mean square)` of `f(t + shift) − f(t)` over the grid points
    /// with `t + shift` inside the window.
    fn shift_residual(&self, shift: f64) -> (f64, f64) {
        let n = self.intervals();
        let h = self.step();
        let k = shift / h;
        let exact = (k - k.round()).abs() < 1e-9;
        let mut max = 0.0f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..=n {
            let d = if exact {
                let j = i + k.round() as usize;
                if j > n {
                    break;
                }
                self.values[j] - self.values[i]
            } else {
                let t = self.times[i] + shift;
                if t > self.times[n] {
                    break;
                }
                self.interpolate(t) - self.values[i]
            };
            max = max.max(d.abs());
            sum += d * d;
            count += 1;
        }
        (max, if count > 0 { sum / count as f64 } else { 0.0 })
    }
}

/// `𝓔(p(t))` or `𝓔(q(t))` over two population periods `[0, 2π/ω]`.
pub fn entropy_curve(traj: &Trajectory, side: Side, intervals: usize) -> Result<EntropyCurve, AnalyticsError> {
    if intervals < MIN_CURVE_INTERVALS {
        return Err(AnalyticsError::InsufficientSamples { got: intervals, need: MIN_CURVE_INTERVALS });
    }
    EntropyCurve::from_population(2.0 * PI / traj.omega(), intervals, |t| side.population(traj, t))
}

pub const MIN_CURVE_INTERVALS: usize = 64;
/// Two periods at 256 points each.
pub const MIN_PERIOD_INTERVALS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Period {
    Stationary,
    Periodic(f64),
}

impl Period {
    /// The period, or 0 for a constant curve.
    pub fn value(self) -> f64 {
        match self {
            Period::Stationary => 0.0,
            Period::Periodic(p) => p,
        }
    }
}

/// Smallest `P > 0` with `max_t |f(t+P) − f(t)| ≤ τ_per · range(f)`.
///
/// Candidates are `window / k`. Shifts landing on the grid are compared
/// exactly; others use four-point interpolation. The accepted candidate is
/// refined by golden-section search on the mean-square shift residual.
pub fn estimate_period(curve: &EntropyCurve) -> Result<Period, AnalyticsError> {
    let n = curve.intervals();
    if n < MIN_PERIOD_INTERVALS {
        return Err(AnalyticsError::InsufficientSamples { got: n, need: MIN_PERIOD_INTERVALS });
    }
    let range = curve.range();
    if range <= TAU_PER {
        return Ok(Period::Stationary);
    }
    let window = curve.window();
    let h = curve.step();
    // at least eight samples per candidate period
    let k_max = n / 8;
    let threshold = TAU_PER * range;
    let found = (1..=k_max).rev().map(|k| window / k as f64).find(|&p| curve.shift_residual(p).0 <= threshold);
    let Some(p) = found else {
        return Ok(Period::Periodic(window));
    };

    let ms = |s: f64| curve.shift_residual(s).1;
    let (mut lo, mut hi) = (p - h, p + h);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (ms(x1), ms(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = ms(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = ms(x2);
        }
        if hi - lo < 1e-14 * p {
            break;
        }
    }
    let refined = 0.5 * (lo + hi);
    Ok(Period::Periodic(if ms(refined) < ms(p) { refined } else { p }))
}

/// `A B = 0` up to `τ_ent (|A|² + |B|²)`.
pub fn is_disentangled(a: C64, b: C64) -> Result<bool, AnalyticsError> {
    let scale = a.norm_sqr() + b.norm_sqr();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(AnalyticsError::ZeroState);
    }
    Ok((a * b).norm() <= TAU_ENT * scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntanglementClass {
    /// No component ever vanishes.
    AlwaysEntangled,
    /// A component vanishes at isolated, π/ω-periodic times.
    PeriodicTouch,
    /// A component vanishes identically.
    AlwaysProduct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Disentanglement {
    pub class: EntanglementClass,
    /// Times in `[0, horizon]` at which the state is a product state.
    pub times: Vec<f64>,
}

/// `(P, Q)` for each of the two components, written as `P cos ωt + Q sin ωt`.
pub fn component_coefficients(traj: &Trajectory, side: Side) -> [(C64, C64); 2] {
    let s = traj.initial();
    let (a, b) = (s.a(), s.b());
    let r = traj.params().ratio();
    let i = C64::i();
    let comps = [(a, -i * b * r), (b, -i * a / r)];
    match side {
        Side::NonHermitian => comps,
        Side::Hermitian => {
            let k = (traj.x() / r).sqrt();
            let w = traj.w();
            let mix = |u: C64, v: C64| {
                (
                    (u * comps[0].0 + v * r * comps[1].0) * k,
                    (u * comps[0].1 + v * r * comps[1].1) * k,
                )
            };
            [mix(w.a, w.b), mix(w.c, w.d)]
        }
    }
}

enum Zeros {
    Never,
    Identically,
    /// `ωt = θ + kπ`, `θ ∈ [0, π)`.
    At(f64),
}

fn zeros(p: C64, q: C64) -> Zeros {
    let scale = p.norm_sqr() + q.norm_sqr();
    if scale.sqrt() <= TAU_ENT {
        return Zeros::Identically;
    }
    let pq = p * q.conj();
    if pq.im.abs() > TAU_ENT * scale {
        return Zeros::Never;
    }
    let mut theta = (-pq.re).atan2(q.norm_sqr());
    if theta < 0.0 {
        theta += PI;
    }
    if theta >= PI {
        theta -= PI;
    }
    Zeros::At(theta)
}

/// Times in `[0, horizon]` at which the state on `side` is a product state.
///
/// A component `P cos ωt + Q sin ωt` vanishes iff `P Q*` is real, at
/// `tan ωt = −P/Q`. On the quasi-Hermitian side this happens iff
/// `Re(AB*) = 0`.
pub fn disentanglement_times(traj: &Trajectory, side: Side, horizon: f64) -> Disentanglement {
    let omega = traj.omega();
    let mut times = Vec::new();
    for (p, q) in component_coefficients(traj, side) {
        match zeros(p, q) {
            Zeros::Never => {}
            Zeros::Identically => {
                return Disentanglement { class: EntanglementClass::AlwaysProduct, times: Vec::new() };
            }
            Zeros::At(theta) => {
                let mut k = 0;
                loop {
                    let t = (theta + k as f64 * PI) / omega;
                    if t > horizon {
                        break;
                    }
                    times.push(t);
                    k += 1;
                }
            }
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * omega.recip());
    let class = if times.is_empty() && horizon * omega >= PI {
        EntanglementClass::AlwaysEntangled
    } else if times.is_empty() {
        // horizon shorter than the touching period: decide from the coefficients
        let touches = component_coefficients(traj, side).iter().any(|&(p, q)| matches!(zeros(p, q), Zeros::At(_)));
        if touches {
            EntanglementClass::PeriodicTouch
        } else {
            EntanglementClass::AlwaysEntangled
        }
    } else {
        EntanglementClass::PeriodicTouch
    };
    Disentanglement { class, times }
}

/// A unitary with `W√η|ψ(0)⟩ = |e_B⟩`, a product state.
///
/// With `(γ, δ) = √η (A, B)` this is `W = [[δ, −γ], [γ*, δ*]]`, so
/// `|a| = |d| = √(x a₁/a₂)|B|` and `|b| = |c| = √(x a₂/a₁)|A|`.
pub fn disentangling_w(traj: &Trajectory) -> Result<Unitary2, AnalyticsError> {
    let (g, d) = traj.gamma_delta(0.0);
    let s = traj.initial();
    if is_disentangled(s.a(), s.b())? {
        return Err(AnalyticsError::AlreadyProduct);
    }
    let norm = (g.norm_sqr() + d.norm_sqr()).sqrt();
    let (g, d) = (g / norm, d / norm);
    Unitary2::new(d, -g, g.conj(), d.conj()).map_err(|_| AnalyticsError::ZeroState)
}

/// Period average of `ρ_{h_W}(t)`:
/// `[[1 − q₀, z], [z*, q₀]]` in `{e_S, e_B}`, `z = (ad* + bc*) x Re(AB*)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AveragedState {
    pub q0: f64,
    pub z: C64,
}

impl AveragedState {
    pub fn matrix(&self) -> CMat2 {
        CMat2::new(C64::new(1.0 - self.q0, 0.0), self.z, self.z.conj(), C64::new(self.q0, 0.0))
    }

    /// Two-qubit embedding in `{|00⟩, |01⟩, |10⟩, |11⟩}` with `e_S = |10⟩`
    /// and `e_B = |01⟩`.
    pub fn embed(&self) -> CMat4 {
        let m = self.matrix();
        let mut out = CMat4::zeros();
        let idx = [2, 1];
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                out[(r, c)] = m[(i, j)];
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let rad = (self.q0 - 0.5).hypot(self.z.norm());
        [0.5 - rad, 0.5 + rad]
    }
}

pub fn averaged_state(traj: &Trajectory) -> AveragedState {
    let w = traj.w();
    let re_ab = traj.initial().ab().re;
    AveragedState {
        q0: traj.mean_q(),
        z: (w.a * w.d.conj() + w.b * w.c.conj()) * (traj.x() * re_ab),
    }
}

/// Simpson average of `ρ_{h_W}(t)` over one population period.
pub fn averaged_state_quadrature(traj: &Trajectory) -> CMat2 {
    simpson_mean(|t| traj.rho_hw(t), 0.0, traj.params().population_period(), SIMPSON_PANELS)
}

/// Concurrence of the averaged state: the gap between the eigenvalues of
/// `⟨ρ⟩`, which equals `2x|Re(AB*)|` for every `W`.
pub fn concurrence(avg: &AveragedState) -> f64 {
    let [lo, hi] = avg.eigenvalues();
    (hi - lo).clamp(0.0, 1.0)
}

/// `2x|Re(AB*)|`
pub fn concurrence_closed_form(traj: &Trajectory) -> f64 {
    2.0 * traj.x() * traj.initial().ab().re.abs()
}

/// Difference of the two nonzero eigenvalues of `⟨ρ⟩²`.
pub fn squared_state_gap(avg: &AveragedState) -> f64 {
    let [lo, hi] = avg.eigenvalues();
    hi * hi - lo * lo
}

/// Wootters concurrence of a two-qubit density matrix:
/// `max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λᵢ` the decreasing square roots of the
/// eigenvalues of `√ρ ρ̃ √ρ`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn wootters_concurrence(rho: &CMat4) -> f64 {
    let sy = CMat2::new(C64::new(0.0, 0.0), -C64::i(), C64::i(), C64::new(0.0, 0.0));
    let yy = sy.kron(&sy);
    let tilde = yy * rho.conj() * yy;
    let root = psd_sqrt(&rho.hermitian_part()).expect("density matrix is PSD");
    let r = (root * tilde * root).hermitian_part();
    let eig = herm_eig(&r).expect("Hermitian by construction");
    let mut l: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WClass {
    /// `W` diagonal: `ρ_{h_W}` and `ρ_H` have equal reduced states.
    EqualStates,
    /// `W` anti-diagonal: equal entropies, complementary populations.
    EqualEntropies,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WEquivalenceClass {
    pub variant: WClass,
    /// `(arg a, arg d)` for diagonal, `(arg b, arg c)` for anti-diagonal `W`.
    pub phases: Option<(f64, f64)>,
}

pub fn classify_w(w: &Unitary2) -> WEquivalenceClass {
    if w.b.norm() <= TAU_EIG && w.c.norm() <= TAU_EIG {
        WEquivalenceClass { variant: WClass::EqualStates, phases: Some((w.a.arg(), w.d.arg())) }
    } else if w.a.norm() <= TAU_EIG && w.d.norm() <= TAU_EIG {
        WEquivalenceClass { variant: WClass::EqualEntropies, phases: Some((w.b.arg(), w.c.arg())) }
    } else {
        WEquivalenceClass { variant: WClass::Generic, phases: None }
    }
}

pub fn is_product_metric(eta: &Metric2) -> bool {
    eta.matrix()[(0, 1)].norm() <= TAU_EIG
}

/// Witness that a diagonal metric on `𝓗₁` comes from a product metric.
///
/// `𝓗₁ = span{|v₁₁⟩, |v₂₂⟩}` inside `ℂ²⊗ℂ²` with `|v_ij⟩ = |e_i⟩⊗|f_j⟩`
/// (indices 0 and 3), `|v₁₁⟩ = e_S`, `|v₂₂⟩ = e_B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricFactorization {
    pub lambda_s: CMat2,
    pub lambda_b: CMat2,
    /// Largest entry of `Λ_S⊗Λ_B` coupling `𝓗₁` to its complement.
    pub leakage: f64,
    /// Distance between the restriction of `Λ_S⊗Λ_B` to `𝓗₁` and `η`.
    pub restriction_error: f64,
}

/// `Λ_S = 1`, `Λ_B = diag(η_SS, η_BB)`.
pub fn factor_metric(eta: &Metric2) -> Result<MetricFactorization, AnalyticsError> {
    let m = eta.matrix();
    let off = m[(0, 1)].norm().max(m[(1, 0)].norm());
    if off > TAU_EIG {
        return Err(AnalyticsError::NotDiagonal(off));
    }
    let lambda_s = CMat2::identity();
    let lambda_b = CMat2::from_real_diag([m[(0, 0)].re, m[(1, 1)].re]);
    let product = lambda_s.kron(&lambda_b);
    let inside = [0, 3];
    let outside = [1, 2];
    let mut leakage = 0.0f64;
    for &i in &inside {
        for &j in &outside {
            leakage = leakage.max(product[(i, j)].norm()).max(product[(j, i)].norm());
        }
    }
    let restricted = CMat2::new(product[(0, 0)], product[(0, 3)], product[(3, 0)], product[(3, 3)]);
    Ok(MetricFactorization { lambda_s, lambda_b, leakage, restriction_error: restricted.dist(m) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StateH1;
    use crate::model::{metric, ModelParams};
    use crate::rng;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn fig_params() -> ModelParams {
        ModelParams::diagonal(1.0, 1.0, 0.6, 1, 1.0).unwrap()
    }

    fn real_traj(alpha: f64, c: f64) -> Trajectory {
        let p = fig_params();
        Trajectory::new(p, StateH1::from_alpha(&p, alpha, 0.0, 0.0).unwrap(), Unitary2::real_cd(c).unwrap()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        let want = -0.3 * 0.3f64.ln() - 0.7 * 0.7f64.ln();
        assert!((entropy(0.3).unwrap() - want).abs() < 1e-15);
        assert!((entropy(0.3).unwrap() - 0.610864).abs() < 1e-6);
        assert_eq!(entropy(-1e-12).unwrap(), 0.0);
        assert!(matches!(entropy(1.01), Err(AnalyticsError::OutOfRange(_))));
        assert!(matches!(entropy(-0.1), Err(AnalyticsError::OutOfRange(_))));
    }

    #[test]
    fn stationary_curve_is_ln2() {
        let p = fig_params();
        let traj = Trajectory::new(p, StateH1::from_alpha(&p, 0.5, 0.0, 0.0).unwrap(), Unitary2::identity()).unwrap();
        let curve = entropy_curve(&traj, Side::NonHermitian, 256).unwrap();
        assert!(curve.values.iter().all(|v| (v - LN_2).abs() < 1e-15));
        assert_eq!(curve.values.len(), 257);
        assert!(matches!(entropy_curve(&traj, Side::NonHermitian, 32), Err(AnalyticsError::InsufficientSamples { .. })));
    }

    #[test]
    fn synthetic_curves_minima() {
        let omega = 1.3;
        let window = 2.0 * PI / omega;
        // Q₀ = 0.5, Δ = 0.2: four minima at 𝓔(0.3)
        let curve = EntropyCurve::from_population(window, 1024, |t| 0.5 + 0.2 * (2.0 * omega * t).cos()).unwrap();
        let minima = curve.periodic_local_minima();
        assert_eq!(minima.len(), 4);
        for &i in &minima {
            assert!((curve.values[i] - entropy(0.3).unwrap()).abs() < 1e-12);
        }
        // Q₀ = 0.8, Δ = 0.2: one per population period
        let curve = EntropyCurve::from_population(window, 1024, |t| 0.8 + 0.2 * (2.0 * omega * t).cos()).unwrap();
        assert_eq!(curve.periodic_local_minima().len(), 2);
    }

    #[test]
    fn period_of_p_and_q() {
        let traj = real_traj(0.3, 0.5);
        let w = traj.omega();
        let ep = estimate_period(&entropy_curve(&traj, Side::NonHermitian, 1024).unwrap()).unwrap();
        let eq = estimate_period(&entropy_curve(&traj, Side::Hermitian, 1024).unwrap()).unwrap();
        assert!((ep.value() / (0.5 * PI / w) - 1.0).abs() < 1e-6, "{ep:?}");
        assert!((eq.value() / (PI / w) - 1.0).abs() < 1e-6, "{eq:?}");
        // Re(cd*) = 0 gives no doubling
        let flat = traj.with_unitary(Unitary2::anti_diagonal(0.0, 0.0));
        let eq = estimate_period(&entropy_curve(&flat, Side::Hermitian, 1024).unwrap()).unwrap();
        assert!((eq.value() / (0.5 * PI / w) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn period_off_grid_samples() {
        // 1030 intervals: π/(2ω) is not a whole number of steps
        let traj = real_traj(0.3, 0.5);
        let curve = entropy_curve(&traj, Side::Hermitian, 1030).unwrap();
        let eq = estimate_period(&curve).unwrap();
        assert!((eq.value() / (PI / traj.omega()) - 1.0).abs() < 1e-6, "{eq:?}");
    }

    #[test]
    fn period_stationary_and_insufficient() {
        let traj = real_traj(0.5, 0.5);
        let c = entropy_curve(&traj, Side::NonHermitian, 512).unwrap();
        assert_eq!(estimate_period(&c).unwrap(), Period::Stationary);
        let c = entropy_curve(&traj, Side::NonHermitian, 256).unwrap();
        assert!(matches!(estimate_period(&c), Err(AnalyticsError::InsufficientSamples { .. })));
    }

    #[test]
    fn disentangled_examples() {
        assert!(is_disentangled(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap());
        assert!(!is_disentangled(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)).unwrap());
        assert!(matches!(is_disentangled(C64::new(0.0, 0.0), C64::new(0.0, 0.0)), Err(AnalyticsError::ZeroState)));
    }

    #[test]
    fn roots_for_a_zero_start() {
        let p = fig_params();
        let traj = Trajectory::new(p, StateH1::from_alpha(&p, 0.0, 0.0, 0.0).unwrap(), Unitary2::identity()).unwrap();
        let d = disentanglement_times(&traj, Side::NonHermitian, 3.0 * PI / p.omega() + 1e-9);
        assert_eq!(d.class, EntanglementClass::PeriodicTouch);
        assert_eq!(d.times.len(), 4);
        for (k, t) in d.times.iter().enumerate() {
            assert!((t * p.omega() - k as f64 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn real_amplitudes_always_entangled() {
        let traj = real_traj(0.3, 0.5);
        let d = disentanglement_times(&traj, Side::NonHermitian, 20.0);
        assert_eq!(d.class, EntanglementClass::AlwaysEntangled);
        assert!(d.times.is_empty());
    }

    #[test]
    fn eigenstate_mapped_to_basis_is_always_product() {
        let p = fig_params();
        let r = p.ratio();
        let s = StateH1::normalized(&p, C64::new(r.sqrt(), 0.0), C64::new(1.0 / r.sqrt(), 0.0)).unwrap();
        let traj = Trajectory::new(p, s, Unitary2::identity()).unwrap();
        let traj = traj.with_unitary(disentangling_w(&traj).unwrap());
        let d = disentanglement_times(&traj, Side::Hermitian, 10.0);
        assert_eq!(d.class, EntanglementClass::AlwaysProduct);
        assert_eq!(disentanglement_times(&traj, Side::NonHermitian, 10.0).class, EntanglementClass::AlwaysEntangled);
    }

    #[test]
    fn coefficients_reproduce_amplitudes() {
        let mut rng = rng::seeded(3);
        for _ in 0..20 {
            let traj = Trajectory::random(&mut rng);
            for side in [Side::NonHermitian, Side::Hermitian] {
                let [(p1, q1), (p2, q2)] = component_coefficients(&traj, side);
                for k in 0..10 {
                    let t = 0.3 * k as f64;
                    let (s, c) = (traj.omega() * t).sin_cos();
                    let (u, v) = match side {
                        Side::NonHermitian => traj.amplitudes(t),
                        Side::Hermitian => traj.hermitian_state(t),
                    };
                    assert!((p1 * c + q1 * s - u).norm() < 1e-13);
                    assert!((p2 * c + q2 * s - v).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn roots_have_small_residual() {
        let p = fig_params();
        let mut rng = rng::seeded(10);
        for _ in 0..50 {
            // Re(AB*) = 0: relative phase ±π/2
            let alpha = rand::Rng::random_range(&mut rng, 0.05..0.95);
            let f = rand::Rng::random_range(&mut rng, 0.0..2.0 * PI);
            let s = StateH1::from_alpha(&p, alpha, f + 0.5 * PI, f).unwrap();
            let traj = Trajectory::new(p, s, Unitary2::haar(&mut rng)).unwrap();
            let d = disentanglement_times(&traj, Side::NonHermitian, 10.0);
            assert_eq!(d.class, EntanglementClass::PeriodicTouch);
            assert!(!d.times.is_empty());
            for &t in &d.times {
                let (a, b) = traj.amplitudes(t);
                assert!((a * b).norm() < 1e-10);
            }
            for &t in &disentanglement_times(&traj, Side::Hermitian, 10.0).times {
                let (a, b) = traj.hermitian_state(t);
                assert!((a * b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn disentangling_w_examples() {
        let mut rng = rng::seeded(17);
        for _ in 0..50 {
            let traj = Trajectory::random(&mut rng);
            let w = disentangling_w(&traj).unwrap();
            assert!(w.defect() <= TAU_EIG);
            let t = traj.with_unitary(w);
            let (a, b) = t.hermitian_state(0.0);
            assert!(is_disentangled(a, b).unwrap());
            let s = traj.initial();
            let x = traj.x();
            let r = traj.params().ratio();
            assert!((w.a.norm() - (x * r).sqrt() * s.b().norm()).abs() < 1e-12);
            assert!((w.c.norm() - (x / r).sqrt() * s.a().norm()).abs() < 1e-12);
        }
        // |A| = (a₁/a₂)|B|: all entries 1/√2
        let p = fig_params();
        let traj = Trajectory::new(p, StateH1::from_alpha(&p, 0.5, 0.3, 1.0).unwrap(), Unitary2::identity()).unwrap();
        let w = disentangling_w(&traj).unwrap();
        for e in [w.a, w.b, w.c, w.d] {
            assert!((e.norm() - FRAC_1_SQRT_2).abs() < 1e-14);
        }
        let product = Trajectory::new(p, StateH1::from_alpha(&p, 0.0, 0.0, 0.0).unwrap(), Unitary2::identity()).unwrap();
        assert_eq!(disentangling_w(&product), Err(AnalyticsError::AlreadyProduct));
    }

    #[test]
    fn averaged_state_examples() {
        let p = fig_params();
        let s = StateH1::from_alpha(&p, 0.3, 0.5 * PI, 0.0).unwrap();
        let traj = Trajectory::new(p, s, Unitary2::real_cd(0.4).unwrap()).unwrap();
        let avg = averaged_state(&traj);
        assert!(avg.z.norm() < 1e-15 && (avg.q0 - 0.5).abs() < 1e-15);
        assert_eq!(concurrence(&avg), 0.0);
        // c = 0, d = 1, a = e^{iφ}
        let s = StateH1::from_alpha(&p, 0.3, 0.2, 0.0).unwrap();
        let w = Unitary2::new(C64::cis(0.7), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)).unwrap();
        let traj = Trajectory::new(p, s, w).unwrap();
        let avg = averaged_state(&traj);
        let xre = traj.x() * traj.initial().ab().re;
        assert!((avg.z - C64::cis(0.7) * xre).norm() < 1e-15);
    }

    #[test]
    fn averaged_state_matches_quadrature() {
        let mut rng = rng::seeded(44);
        for _ in 0..20 {
            let traj = Trajectory::random(&mut rng);
            let quad = averaged_state_quadrature(&traj);
            assert!(quad.dist(&averaged_state(&traj).matrix()) < 1e-8);
        }
    }

    #[test]
    fn concurrence_bounds() {
        let p = fig_params();
        // Im(AB*) = 0 and |A| = (a₁/a₂)|B| ⟺ α = ½ with real ratio
        let traj = Trajectory::new(p, StateH1::from_alpha(&p, 0.5, 0.0, 0.0).unwrap(), Unitary2::identity()).unwrap();
        assert!((concurrence(&averaged_state(&traj)) - 1.0).abs() < 1e-12);
        let mut rng = rng::seeded(71);
        for _ in 0..200 {
            let traj = Trajectory::random(&mut rng);
            let c = concurrence(&averaged_state(&traj));
            assert!((0.0..=1.0).contains(&c));
            assert!((c - concurrence_closed_form(&traj)).abs() < 1e-12);
        }
    }

    #[test]
    fn concurrence_gap_is_w_invariant() {
        let mut rng = rng::seeded(72);
        let traj = Trajectory::random(&mut rng);
        let want = concurrence_closed_form(&traj);
        for _ in 0..200 {
            let t = traj.with_unitary(Unitary2::haar(&mut rng));
            assert!((concurrence(&averaged_state(&t)) - want).abs() < 1e-12);
            assert!((squared_state_gap(&averaged_state(&t)) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn wootters_on_embedding() {
        // block [[u, w], [w*, v]] on span{|01⟩, |10⟩} has concurrence 2|w|
        let mut rng = rng::seeded(73);
        for _ in 0..100 {
            let traj = Trajectory::random(&mut rng);
            let avg = averaged_state(&traj);
            let rho = avg.embed();
            assert!((rho.trace() - 1.0).norm() < 1e-14);
            assert!((wootters_concurrence(&rho) - 2.0 * avg.z.norm()).abs() < 1e-8);
        }
        // Bell state
        let mut bell = CMat4::zeros();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            bell[(i, j)] = C64::new(0.5, 0.0);
        }
        assert!((wootters_concurrence(&bell) - 1.0).abs() < 1e-8);
        let mut product = CMat4::zeros();
        product[(1, 1)] = C64::new(1.0, 0.0);
        assert!(wootters_concurrence(&product) < 1e-8);
    }

    #[test]
    fn wootters_matches_gap_for_diagonal_w() {
        let mut rng = rng::seeded(74);
        for _ in 0..50 {
            let traj = Trajectory::random(&mut rng).with_unitary(Unitary2::diagonal(0.4, -0.2));
            let avg = averaged_state(&traj);
            assert!((wootters_concurrence(&avg.embed()) - concurrence(&avg)).abs() < 1e-8);
        }
    }

    #[test]
    fn classify_examples() {
        let id = classify_w(&Unitary2::identity());
        assert_eq!(id.variant, WClass::EqualStates);
        assert_eq!(id.phases, Some((0.0, 0.0)));
        let swap = Unitary2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(classify_w(&swap).variant, WClass::EqualEntropies);
        let w = Unitary2::real_cd(0.5).unwrap();
        assert_eq!(classify_w(&w).variant, WClass::Generic);
        // generic W separates the entropies at the reference parameters
        let traj = real_traj(0.3, 0.5);
        let gap = (0..400)
            .map(|k| {
                let t = k as f64 * 0.01;
                (entropy(traj.p(t)).unwrap() - entropy(traj.q(t)).unwrap()).abs()
            })
            .fold(0.0, f64::max);
        assert!(gap > 0.01);
        let (p1, p2) = classify_w(&Unitary2::diagonal(0.3, -1.2)).phases.unwrap();
        assert!((p1 - 0.3).abs() < 1e-15 && (p2 + 1.2).abs() < 1e-15);
    }

    #[test]
    fn equal_entropies_for_anti_diagonal_w() {
        let mut rng = rng::seeded(90);
        for _ in 0..30 {
            let traj = Trajectory::random(&mut rng).with_unitary(Unitary2::anti_diagonal(0.2, 1.7));
            for k in 0..100 {
                let t = 0.07 * k as f64;
                let d = entropy(traj.p(t)).unwrap() - entropy(traj.q(t)).unwrap();
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn entanglement_preserved_by_phase_unitaries() {
        let mut rng = rng::seeded(91);
        let p = fig_params();
        for _ in 0..30 {
            let f = rand::Rng::random_range(&mut rng, 0.0..2.0 * PI);
            for alpha in [0.0, 1.0, 0.4] {
                let s = StateH1::from_alpha(&p, alpha, f, 0.3).unwrap();
                for w in [Unitary2::diagonal(f, 1.0), Unitary2::anti_diagonal(0.5, f)] {
                    let traj = Trajectory::new(p, s, w).unwrap();
                    let (a, b) = traj.hermitian_state(0.0);
                    assert_eq!(is_disentangled(s.a(), s.b()).unwrap(), is_disentangled(a, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn metric_factorization() {
        let eta = Metric2::custom(CMat2::real(2.0, 0.0, 0.0, 3.0)).unwrap();
        assert!(is_product_metric(&eta));
        let f = factor_metric(&eta).unwrap();
        assert_eq!(f.lambda_s[(0, 0)].re * f.lambda_b[(0, 0)].re, 2.0);
        assert_eq!(f.lambda_s[(1, 1)].re * f.lambda_b[(1, 1)].re, 3.0);
        assert!(f.leakage <= 1e-12 && f.restriction_error <= TAU_EIG);

        let general = metric(&fig_params().with_metric(2.0, 1.0).unwrap());
        assert!(!is_product_metric(&general));
        assert!(matches!(factor_metric(&general), Err(AnalyticsError::NotDiagonal(_))));

        let mut rng = rng::seeded(92);
        for _ in 0..100 {
            let p = ModelParams::random_diagonal(&mut rng);
            let eta = metric(&p);
            assert!(is_product_metric(&eta));
            let f = factor_metric(&eta).unwrap();
            assert!(f.leakage <= 1e-12 && f.restriction_error <= TAU_EIG);
        }
    }
}
