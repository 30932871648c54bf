//! Fixed-size complex linear algebra for a single qubit.
//!
//! Density matrices are vectorized row-major, `(ρ00, ρ01, ρ10, ρ11)`, so that a
//! channel with Kraus operators `A_k` acts on the vector as `Σ_k A_k ⊗ conj(A_k)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);
pub(crate) const I: Complex = Complex::new(0.0, 1.0);

/// Tolerance used by the density-matrix invariants.
pub const DENSITY_TOL: f64 = 1e-12;

/// A general 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex; 2]; 2]);

impl Mat2 {
    pub const fn new(m00: Complex, m01: Complex, m10: Complex, m11: Complex) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2::new(
            m[0][0].into(),
            m[0][1].into(),
            m[1][0].into(),
            m[1][1].into(),
        )
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn diag(d0: Complex, d1: Complex) -> Self {
        Mat2::new(d0, ZERO, ZERO, d1)
    }

    pub const fn pauli_x() -> Self {
        Mat2::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Mat2::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Mat2::new(ONE, ZERO, ZERO, -ONE)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> Complex {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: Complex) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        let m = &self.0;
        Mat2::new(f(m[0][0]), f(m[0][1]), f(m[1][0]), f(m[1][1]))
    }

    /// Kronecker product `self ⊗ other` as a 4×4 matrix.
    pub fn kron(&self, other: &Mat2) -> Superop {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.0[i / 2][j / 2] * other.0[i % 2][j % 2];
            }
        }
        Superop(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-ONE)
    }
}

/// A vectorized 2×2 matrix, ordered `(m00, m01, m10, m11)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecState(pub [Complex; 4]);

impl VecState {
    /// The vectorization of `|+⟩⟨+|`, `½(1,1,1,1)`.
    pub fn plus() -> Self {
        VecState([Complex::new(0.5, 0.0); 4])
    }

    pub fn max_abs_diff(&self, other: &VecState) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Conjugate-linear in `self`: `Σ conj(self_i) · other_i`.
    pub fn dot(&self, other: &VecState) -> Complex {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// A linear map on vectorized 2×2 matrices (a Liouville-space superoperator).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superop(pub [[Complex; 4]; 4]);

impl Superop {
    pub fn identity() -> Self {
        Superop::diag([ONE; 4])
    }

    pub fn zero() -> Self {
        Superop([[ZERO; 4]; 4])
    }

    pub fn diag(d: [Complex; 4]) -> Self {
        let mut out = [[ZERO; 4]; 4];
        for (i, v) in d.into_iter().enumerate() {
            out[i][i] = v;
        }
        Superop(out)
    }

    pub fn from_real(m: [[f64; 4]; 4]) -> Self {
        Superop(m.map(|row| row.map(Complex::from)))
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.0[row][col]
    }

    pub fn apply(&self, v: &VecState) -> VecState {
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(self.0.iter()) {
            *o = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2] + row[3] * v.0[3];
        }
        VecState(out)
    }

    pub fn max_abs_diff(&self, other: &Superop) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// Trace preservation in row-major vectorization: rows 0 and 3 must sum to
    /// `(1, 0, 0, 1)`, rows 1 and 2 contribute nothing to the trace.
    pub fn trace_defect(&self) -> f64 {
        let m = &self.0;
        let mut worst = 0.0f64;
        for (col, want) in [ONE, ZERO, ZERO, ONE].into_iter().enumerate() {
            worst = worst.max((m[0][col] + m[3][col] - want).norm());
        }
        worst
    }
}

impl Mul for Superop {
    type Output = Superop;

    fn mul(self, rhs: Superop) -> Superop {
        let mut out = [[ZERO; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Superop(out)
    }
}

impl Mul<VecState> for Superop {
    type Output = VecState;

    fn mul(self, rhs: VecState) -> VecState {
        self.apply(&rhs)
    }
}

impl Add for Superop {
    type Output = Superop;

    fn add(self, rhs: Superop) -> Superop {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry += rhs.0[i][j];
            }
        }
        Superop(out)
    }
}

/// A validated one-qubit state: Hermitian, unit trace and positive semidefinite,
/// each within [`DENSITY_TOL`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        check_density(&m, DENSITY_TOL)?;
        Ok(DensityMatrix(m))
    }

    /// Wraps `m` without checking. Only for matrices produced by trace-preserving
    /// completely positive maps from valid states.
    pub(crate) fn new_unchecked(m: Mat2) -> Self {
        debug_assert!(check_density(&m, 1e-9).is_ok(), "{m:?}");
        DensityMatrix(m)
    }

    /// `|+⟩⟨+|`
    pub fn plus() -> Self {
        DensityMatrix(Mat2::from_real([[0.5, 0.5], [0.5, 0.5]]))
    }

    /// `|−⟩⟨−|`
    pub fn minus() -> Self {
        DensityMatrix(Mat2::from_real([[0.5, -0.5], [-0.5, 0.5]]))
    }

    pub fn zero() -> Self {
        DensityMatrix(Mat2::from_real([[1.0, 0.0], [0.0, 0.0]]))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::from_real([[0.5, 0.0], [0.0, 0.5]]))
    }

    /// Builds the state from a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let m = Mat2::new(
            Complex::new((1.0 + z) / 2.0, 0.0),
            Complex::new(x / 2.0, -y / 2.0),
            Complex::new(x / 2.0, y / 2.0),
            Complex::new((1.0 - z) / 2.0, 0.0),
        );
        DensityMatrix::new(m)
    }

    pub fn from_vec(v: &VecState) -> Result<Self> {
        DensityMatrix::new(devectorize(v))
    }

    pub fn as_mat(&self) -> &Mat2 {
        &self.0
    }

    pub fn into_mat(self) -> Mat2 {
        self.0
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.0)
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0 .0;
        write!(
            f,
            "[[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

fn hermitian_eigenvalues(m: &Mat2) -> [f64; 2] {
    let a = m.0[0][0].re;
    let d = m.0[1][1].re;
    // Off-diagonal of the Hermitian part ½(m + m†).
    let b = (m.0[0][1] + m.0[1][0].conj()) * 0.5;
    let mean = (a + d) / 2.0;
    let radius = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Checks the density-matrix invariants of `m` at tolerance `tol`.
pub fn check_density(m: &Mat2, tol: f64) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::InvalidDensityMatrix("non-finite entry"));
    }
    if !m.is_hermitian(tol) {
        return Err(Error::InvalidDensityMatrix("not Hermitian"));
    }
    if (m.trace() - ONE).norm() > tol {
        return Err(Error::InvalidDensityMatrix("trace differs from 1"));
    }
    if hermitian_eigenvalues(m)[0] < -tol {
        return Err(Error::InvalidDensityMatrix("negative eigenvalue"));
    }
    Ok(())
}

pub fn vectorize(m: &Mat2) -> VecState {
    let m = &m.0;
    VecState([m[0][0], m[0][1], m[1][0], m[1][1]])
}

pub fn devectorize(v: &VecState) -> Mat2 {
    let v = &v.0;
    Mat2::new(v[0], v[1], v[2], v[3])
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &Mat2, b: &Mat2) -> Complex {
    (a.adjoint() * *b).trace()
}

/// Probability of the `+` outcome of an X-basis measurement, `⟨+|ρ|+⟩`.
pub fn x_plus_prob(rho: &DensityMatrix) -> f64 {
    let m = &rho.0 .0;
    let p = 0.5 * (m[0][0] + m[0][1] + m[1][0] + m[1][1]).re;
    p.clamp(0.0, 1.0)
}

/// Probability of the `−` outcome, `⟨−|ρ|−⟩`.
pub fn x_minus_prob(rho: &DensityMatrix) -> f64 {
    let m = &rho.0 .0;
    let p = 0.5 * (m[0][0] - m[0][1] - m[1][0] + m[1][1]).re;
    p.clamp(0.0, 1.0)
}
