//! Dense complex matrices and the spectral routines built on them.
//!
//! `CMatrix` is a thin newtype over `nalgebra::DMatrix<Complex64>` that rejects
//! non-finite entries at its public constructors. The general eigensolver goes
//! through the complex Schur form and back-substitutes the triangular factor,
//! which is what `matrix_function` and `matrix_abs` need for non-Hermitian
//! inputs such as products of weight and covariance matrices.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::SizeMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        let m = Self(DMatrix::from_row_slice(rows, cols, &entries));
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::SizeMismatch {
                expected: format!("rows of length {m}"),
                found: "ragged rows".into(),
            });
        }
        Self::from_row_major(n, m, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::from(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::from(x)).collect();
        Self::from_diagonal(&d)
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Wraps an nalgebra matrix, rejecting non-finite entries.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        let m = Self(m);
        m.check_finite()?;
        Ok(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    fn check_finite(&self) -> Result<()> {
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                let z = self.0[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.check_finite().is_ok()
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NonSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Entry-wise real part.
    pub fn re(&self) -> Self {
        Self(self.0.map(|z| C64::from(z.re)))
    }

    /// Entry-wise imaginary part.
    pub fn im(&self) -> Self {
        Self(self.0.map(|z| C64::from(z.im)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖G − G†‖_F`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.0 - self.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative Hermiticity test `‖G − G†‖_F ≤ tol · max(1, ‖G‖_F)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.norm().max(1.0)
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        self.ensure_square()?;
        let deviation = self.hermitian_deviation();
        if deviation <= tol * self.norm().max(1.0) {
            Ok(())
        } else {
            Err(Error::NotHermitian { deviation })
        }
    }

    /// `(G + G†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::from(0.5))
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self(self.0.view((r0, c0), (nr, nc)).into_owned())
    }

    /// Assembles `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: &Self, tr: &Self, bl: &Self, br: &Self) -> Result<Self> {
        let (r1, c1) = tl.shape();
        let (r2, c2) = br.shape();
        if tr.shape() != (r1, c2) || bl.shape() != (r2, c1) {
            return Err(Error::SizeMismatch {
                expected: format!("blocks {r1}x{c1} | {r1}x{c2} / {r2}x{c1} | {r2}x{c2}"),
                found: format!("{:?} {:?} {:?} {:?}", tl.shape(), tr.shape(), bl.shape(), br.shape()),
            });
        }
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(&tl.0);
        m.view_mut((0, c1), (r1, c2)).copy_from(&tr.0);
        m.view_mut((r1, 0), (r2, c1)).copy_from(&bl.0);
        m.view_mut((r1, c1), (r2, c2)).copy_from(&br.0);
        Ok(Self(m))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn determinant(&self) -> Result<C64> {
        self.ensure_square()?;
        Ok(self.0.determinant())
    }

    /// Plain LU inverse; fails on exactly singular input.
    pub fn inverse(&self) -> Result<Self> {
        self.ensure_square()?;
        let inv = self
            .0
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("matrix is singular".into()))?;
        let inv = Self(inv);
        inv.check_finite()?;
        Ok(inv)
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F / max(1, ‖other‖_F)`.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        self.distance(other) / other.norm().max(1.0)
    }

    pub fn column(&self, j: usize) -> Ket {
        Ket(self.0.column(j).into_owned())
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        Ket(&self.0 * &v.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
        impl $trait<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(self.0 $op &rhs.0)
            }
        }
        impl $trait<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);

impl Mul<C64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: C64) -> CMatrix {
        CMatrix(&self.0 * s)
    }
}

impl Mul<C64> for CMatrix {
    type Output = CMatrix;
    fn mul(self, s: C64) -> CMatrix {
        CMatrix(self.0 * s)
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: f64) -> CMatrix {
        self.scale_real(s)
    }
}

impl Mul<f64> for CMatrix {
    type Output = CMatrix;
    fn mul(self, s: f64) -> CMatrix {
        self.scale_real(s)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-self.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Complex column vector (state vectors and tangent vectors).
#[derive(Clone, Debug, PartialEq)]
pub struct Ket(DVector<C64>);

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if let Some(i) = amplitudes.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self(DVector::from_vec(amplitudes)))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[index] = ONE;
        Self(v)
    }

    pub fn inner_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn amplitudes(&self) -> Vec<C64> {
        self.0.iter().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn scale(&self, s: C64) -> Ket {
        Ket(&self.0 * s)
    }

    pub fn add(&self, other: &Ket) -> Ket {
        Ket(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Ket) -> Ket {
        Ket(&self.0 - &other.0)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: C64, other: &Ket) -> Ket {
        Ket(&self.0 + &other.0 * s)
    }

    pub fn conj(&self) -> Ket {
        Ket(self.0.map(|z| z.conj()))
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        Ket(self.0.kronecker(&other.0))
    }

    /// `|self⟩⟨other|`.
    pub fn outer(&self, other: &Ket) -> CMatrix {
        CMatrix(&self.0 * other.0.adjoint())
    }

    /// Component orthogonal to the unit vector `psi`: `(I − |ψ⟩⟨ψ|)|self⟩`.
    pub fn project_out(&self, psi: &Ket) -> Ket {
        let overlap = psi.inner(self);
        self.axpy(-overlap, psi)
    }

    pub fn distance(&self, other: &Ket) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// Eigendecomposition `G = V Λ V⁻¹` with eigenvectors in the columns of `V`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<C64>,
    pub vectors: CMatrix,
    /// 2-norm condition number of `V`.
    pub condition: f64,
    /// `‖G − V Λ V⁻¹‖_F / ‖G‖_F` (infinite when `V` is numerically singular).
    pub residual: f64,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        v * &CMatrix::from_diagonal(&d) * v.adjoint()
    }
}

/// Hermitian eigensolver; the input is symmetrized first.
pub fn eigh(g: &CMatrix) -> Result<HermitianEigen> {
    let n = g.ensure_square()?;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let h = g.hermitian_part();
    let se = SymmetricEigen::try_new(h.0, f64::EPSILON, 10_000 * n)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        values,
        vectors: CMatrix(vectors),
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(g: &CMatrix) -> Result<f64> {
    Ok(eigh(g)?.min_value())
}

fn condition_number(v: &DMatrix<C64>) -> f64 {
    let sv = v.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// General complex eigendecomposition.
///
/// Hermitian inputs (to the default tolerance) go through the Hermitian solver
/// and get an orthonormal basis. Everything else is reduced to Schur form
/// `G = Q T Q†` and the eigenvectors of `T` are back-substituted.
pub fn eig(g: &CMatrix) -> Result<EigDecomposition> {
    let n = g.ensure_square()?;
    if n == 0 {
        return Ok(EigDecomposition {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
            condition: 1.0,
            residual: 0.0,
        });
    }
    if g.is_hermitian(NumericPolicy::default().hermitian_tol) {
        let he = eigh(g)?;
        let residual = residual_of(g, &he.vectors, &he.vectors.adjoint(), &he.values.iter().map(|&x| C64::from(x)).collect::<Vec<_>>());
        return Ok(EigDecomposition {
            values: he.values.into_iter().map(C64::from).collect(),
            vectors: he.vectors,
            condition: 1.0,
            residual,
        });
    }

    let schur = Schur::try_new(g.0.clone(), f64::EPSILON, 10_000 * n)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;

    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut num = ZERO;
            for j in (i + 1)..=k {
                num += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - t[(k, k)];
            if den.norm() < tiny {
                if num.norm() < tiny {
                    continue;
                }
                den = C64::from(tiny);
            }
            y[(i, k)] = -num / den;
        }
        let col_norm = y.column(k).norm();
        if col_norm > 0.0 {
            let mut col = y.column_mut(k);
            col /= C64::from(col_norm);
        }
    }
    let vectors = &q * y;
    let condition = condition_number(&vectors);
    let vectors = CMatrix(vectors);
    let residual = match vectors.0.clone().try_inverse() {
        Some(inv) if condition.is_finite() => residual_of(g, &vectors, &CMatrix(inv), &values),
        _ => f64::INFINITY,
    };
    Ok(EigDecomposition {
        values,
        vectors,
        condition,
        residual,
    })
}

fn residual_of(g: &CMatrix, v: &CMatrix, v_inv: &CMatrix, values: &[C64]) -> f64 {
    let recon = v * &CMatrix::from_diagonal(values) * v_inv;
    recon.distance(g) / g.norm().max(f64::MIN_POSITIVE)
}

/// `f(G) = V f(Λ) V⁻¹` for a diagonalizable `G`.
pub fn matrix_function(g: &CMatrix, f: impl Fn(C64) -> C64, policy: &NumericPolicy) -> Result<CMatrix> {
    let dec = eig(g)?;
    if !(dec.condition <= policy.defect_threshold) {
        return Err(Error::DefectiveMatrix {
            condition: dec.condition,
        });
    }
    let fvals: Vec<C64> = dec.values.iter().map(|&z| f(z)).collect();
    let v = &dec.vectors;
    let v_inv = if dec.condition == 1.0 {
        v.adjoint()
    } else {
        v.inverse()?
    };
    CMatrix::from_dmatrix((v * &CMatrix::from_diagonal(&fvals) * v_inv).0)
}

/// `Abs(G)`: replaces each eigenvalue by its modulus in the eigenbasis of `G`.
pub fn matrix_abs(g: &CMatrix, policy: &NumericPolicy) -> Result<CMatrix> {
    matrix_function(g, |z| C64::from(z.norm()), policy)
}

/// Outcome of a Loewner-order comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdVerdict {
    pub holds: bool,
    /// Smallest eigenvalue of the Hermitian part of `A − B`.
    pub min_eigenvalue: f64,
}

/// Tests `A ≥ B`: holds iff `λ_min(herm(A − B)) ≥ −tol`.
pub fn psd_order(a: &CMatrix, b: &CMatrix, tol: f64, policy: &NumericPolicy) -> Result<PsdVerdict> {
    if a.shape() != b.shape() {
        return Err(Error::SizeMismatch {
            expected: format!("{:?}", a.shape()),
            found: format!("{:?}", b.shape()),
        });
    }
    a.ensure_hermitian(policy.hermitian_tol)?;
    b.ensure_hermitian(policy.hermitian_tol)?;
    let min_eigenvalue = min_eigenvalue(&(a - b))?;
    Ok(PsdVerdict {
        holds: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankReport {
    pub dim: usize,
    pub rank: usize,
    pub max_singular: f64,
    pub min_singular: f64,
}

impl RankReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.dim
    }
}

/// Inverse when `G` is numerically full rank, Moore-Penrose pseudo-inverse otherwise.
///
/// Singular values below `rank_tol · σ_max` are treated as zero.
pub fn robust_inverse(g: &CMatrix, rank_tol: f64) -> Result<(CMatrix, RankReport)> {
    let n = g.ensure_square()?;
    let svd = g.0.clone().svd(true, true);
    let max_singular = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let min_singular = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = rank_tol * max_singular;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    let report = RankReport {
        dim: n,
        rank,
        max_singular,
        min_singular: if n == 0 { 0.0 } else { min_singular },
    };
    if rank == n {
        if let Some(inv) = g.0.clone().try_inverse() {
            let inv = CMatrix(inv);
            if inv.is_finite() {
                return Ok((inv, report));
            }
        }
    }
    let eps = if cutoff > 0.0 { cutoff } else { f64::MIN_POSITIVE };
    let pinv = svd
        .pseudo_inverse(eps)
        .map_err(|e| Error::NumericalFailure(e.into()))?;
    Ok((CMatrix(pinv), report))
}
