//! Dense complex matrices at dimensions 2 and 4.
//!
//! These routines are the numerical reference for the closed-form expressions
//! elsewhere in the crate and share no code with them.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::tol::{TAU_EIG, TAU_HERM, TAU_SING};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |m - m^dag| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semi-definite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat<const N: usize>(pub [[C64; N]; N]);

/// Complex column vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec<const N: usize>(pub [C64; N]);

pub type CMat2 = CMat<2>;
pub type CMat4 = CMat<4>;
pub type CVec2 = CVec<2>;
pub type CVec4 = CVec<4>;

impl<const N: usize> CMat<N> {
    pub fn zeros() -> Self {
        Self([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_diag(d: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_real_diag(d: [f64; N]) -> Self {
        Self::from_diag(d.map(|x| C64::new(x, 0.0)))
    }

    /// `|v><w|`
    pub fn outer(v: &CVec<N>, w: &CVec<N>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = v.0[i] * w.0[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|row| row.map(|z| z.conj())))
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn diag(&self) -> [C64; N] {
        std::array::from_fn(|i| self.0[i][i])
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_1(&self) -> f64 {
        (0..N)
            .map(|j| (0..N).map(|i| self.0[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * s)))
    }

    /// `max |m - m^dag|`
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    /// Distance to the nearest unitary in the sense `max |m^dag m - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).max_norm()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).max_norm()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }
}

impl CMat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let det = self.det();
        if det.norm() <= TAU_SING {
            return Err(LinalgError::Singular(det.norm()));
        }
        let [[a, b], [c, d]] = self.0;
        Ok(Self::new(d, -b, -c, a).scale(det.inv()))
    }

    /// Kronecker product `self ⊗ other` in the ordered basis
    /// `{|00>, |01>, |10>, |11>}`.
    pub fn kron(&self, other: &CMat2) -> CMat4 {
        let mut m = CMat4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m.0[2 * i + k][2 * j + l] = self.0[i][j] * other.0[k][l];
                    }
                }
            }
        }
        m
    }
}

impl<const N: usize> CVec<N> {
    pub fn zeros() -> Self {
        Self([ZERO; N])
    }

    pub fn basis(k: usize) -> Self {
        let mut v = Self::zeros();
        v.0[k] = ONE;
        v
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).max_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Rotate the global phase so the largest-modulus entry is real positive.
    /// Ties go to the lowest index.
    fn fix_phase(self) -> Self {
        let mut k = 0;
        let mut best = -1.0;
        for (i, z) in self.0.iter().enumerate() {
            if z.norm() > best * (1.0 + 1e-12) {
                best = z.norm();
                k = i;
            }
        }
        if best <= 0.0 {
            return self;
        }
        let phase = self.0[k].conj() / best;
        self.scale(phase)
    }
}

impl CVec2 {
    pub fn new(a: C64, b: C64) -> Self {
        Self([a, b])
    }
}

impl<const N: usize> Index<(usize, usize)> for CMat<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for CMat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Index<usize> for CVec<N> {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl<const N: usize> Add for CMat<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] += rhs.0[i][j];
            }
        }
        m
    }
}

impl<const N: usize> Sub for CMat<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut m = self;
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] -= rhs.0[i][j];
            }
        }
        m
    }
}

impl<const N: usize> Neg for CMat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl<const N: usize> Mul for CMat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                for j in 0..N {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Mul<CVec<N>> for CMat<N> {
    type Output = CVec<N>;
    fn mul(self, v: CVec<N>) -> CVec<N> {
        CVec(std::array::from_fn(|i| (0..N).map(|j| self.0[i][j] * v.0[j]).sum()))
    }
}

impl<const N: usize> Mul<f64> for CMat<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale_re(s)
    }
}

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CVec(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CVec(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues with
/// orthonormal eigenvectors, each phase-fixed so that its largest-modulus
/// component is real positive.
#[derive(Clone, Debug)]
pub struct HermEig<const N: usize> {
    pub values: [f64; N],
    pub vectors: [CVec<N>; N],
}

impl<const N: usize> HermEig<N> {
    /// `sum_i f(λ_i) |v_i><v_i|`
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat<N> {
        self.values
            .iter()
            .zip(self.vectors.iter())
            .fold(CMat::zeros(), |acc, (&l, v)| {
                acc + CMat::outer(v, v).scale_re(f(l))
            })
    }

    pub fn reconstruct(&self) -> CMat<N> {
        self.apply(|l| l)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Dimension 2 uses the closed-form quadratic; larger dimensions use cyclic
/// complex Jacobi rotations.
pub fn herm_eig<const N: usize>(m: &CMat<N>) -> Result<HermEig<N>, LinalgError> {
    let defect = m.hermiticity_defect();
    if defect > TAU_HERM || !m.is_finite() {
        return Err(LinalgError::NotHermitian(defect));
    }
    let h = m.hermitian_part();
    let (values, vectors) = if N == 2 { eig2(&h) } else { jacobi(&h) };

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok(HermEig {
        values: order.map(|i| values[i]),
        vectors: order.map(|i| vectors[i].fix_phase()),
    })
}

fn eig2<const N: usize>(h: &CMat<N>) -> ([f64; N], [CVec<N>; N]) {
    let p = h.0[0][0].re;
    let r = h.0[1][1].re;
    let w = h.0[0][1];
    let mean = 0.5 * (p + r);
    let half_gap = 0.5 * (p - r);
    let rad = half_gap.hypot(w.norm());

    let mut values = [0.0; N];
    let mut vectors = [CVec::zeros(); N];
    // Larger-magnitude root first, the other from the determinant.
    let big = if mean >= 0.0 { mean + rad } else { mean - rad };
    let det = p * r - w.norm_sqr();
    let small = if big != 0.0 { det / big } else { 0.0 };
    let (lo, hi) = if big >= small { (small, big) } else { (big, small) };
    values[0] = lo;
    values[1] = hi;

    let scale = p.abs().max(r.abs()).max(w.norm());
    if w.norm() <= f64::EPSILON * scale || scale == 0.0 {
        let (i_lo, i_hi) = if p <= r { (0, 1) } else { (1, 0) };
        vectors[0] = CVec::basis(i_lo);
        vectors[1] = CVec::basis(i_hi);
        return (values, vectors);
    }
    // Half-angle form: exactly orthonormal even for nearly degenerate input,
    // where `λ − p` would cancel.
    let theta = w.norm().atan2(half_gap);
    let phase = w / w.norm();
    let (s, c) = (0.5 * theta).sin_cos();
    vectors[1].0[0] = C64::new(c, 0.0);
    vectors[1].0[1] = phase.conj() * s;
    vectors[0].0[0] = -phase * s;
    vectors[0].0[1] = C64::new(c, 0.0);
    (values, vectors)
}

fn jacobi<const N: usize>(h: &CMat<N>) -> ([f64; N], [CVec<N>; N]) {
    let mut a = *h;
    let mut v = CMat::<N>::identity();
    let total: f64 = a.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _sweep in 0..64 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.0[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || total == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a.0[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let theta = 0.5 * (2.0 * r).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // Columns of the rotation: u1 = (c, s e^{-iφ}), u2 = (-s e^{iφ}, c)
                // on coordinates (p, q).
                let up = [C64::new(c, 0.0), -phase * s];
                let uq = [phase.conj() * s, C64::new(c, 0.0)];
                // a <- a U
                for i in 0..N {
                    let aip = a.0[i][p];
                    let aiq = a.0[i][q];
                    a.0[i][p] = aip * up[0] + aiq * uq[0];
                    a.0[i][q] = aip * up[1] + aiq * uq[1];
                    let vip = v.0[i][p];
                    let viq = v.0[i][q];
                    v.0[i][p] = vip * up[0] + viq * uq[0];
                    v.0[i][q] = vip * up[1] + viq * uq[1];
                }
                // a <- U^dag a
                for j in 0..N {
                    let apj = a.0[p][j];
                    let aqj = a.0[q][j];
                    a.0[p][j] = up[0].conj() * apj + uq[0].conj() * aqj;
                    a.0[q][j] = up[1].conj() * apj + uq[1].conj() * aqj;
                }
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
            }
        }
    }
    let values = std::array::from_fn(|i| a.0[i][i].re);
    let vectors = std::array::from_fn(|k| CVec(std::array::from_fn(|i| v.0[i][k])));
    (values, vectors)
}

/// Unique positive semi-definite square root.
pub fn psd_sqrt<const N: usize>(m: &CMat<N>) -> Result<CMat<N>, LinalgError> {
    let eig = herm_eig(m)?;
    if let Some(&neg) = eig.values.iter().find(|&&l| l < -TAU_EIG) {
        return Err(LinalgError::NotPsd(neg));
    }
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}

/// `exp(x)` by scaling and squaring with a truncated Taylor series.
pub fn expm<const N: usize>(x: &CMat<N>) -> CMat<N> {
    let norm = x.norm_1();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let y = x.scale_re(0.5f64.powi(squarings));

    // ||y|| <= 1/2: the degree-18 remainder is below 1e-23.
    let mut term = CMat::<N>::identity();
    let mut sum = term;
    for k in 1..=18 {
        term = (term * y).scale_re(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `exp(-i t m)`; `m` need not be Hermitian.
pub fn expm_oracle<const N: usize>(m: &CMat<N>, t: f64) -> CMat<N> {
    expm(&m.scale(C64::new(0.0, -t)))
}
