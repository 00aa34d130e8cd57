//! Dense complex matrix substrate.
//!
//! Every spectral verdict in the crate (gapped or not, invertible or not,
//! which sign an eigenvalue has) is taken relative to a threshold
//! `tau = factor * dim * eps * ||M||_2` supplied by a [`TolerancePolicy`].
//! Hermitian solves symmetrize their input first; residual asymmetry above
//! `tau` is rejected, below it is silently absorbed.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    /// Wraps an nalgebra matrix, rejecting empty shapes and non-finite entries.
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::InvalidArgument("matrix must be at least 1x1".into()));
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(CMatrix(inner))
    }

    /// Row-major constructor.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, &data))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|row| row.iter().map(|&v| C64::new(v, 0.0))).collect();
        Self::from_row_major(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be at least 1x1");
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity must be at least 1x1");
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) })
    }

    pub(crate) fn wrap(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        CMatrix(inner)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        assert!(value.re.is_finite() && value.im.is_finite());
        self.0[(i, j)] = value;
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> CMatrix {
        CMatrix(&self.0 * C64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: C64) -> CMatrix {
        CMatrix(&self.0 * factor)
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        CMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Row-major entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Copy of the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMatrix {
        CMatrix(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    /// Overwrites the block starting at `(r0, c0)` with `b`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMatrix) {
        self.0.view_mut((r0, c0), (b.rows(), b.cols())).copy_from(&b.0);
    }

    /// Assembles a matrix from a rectangular grid of blocks; `None` is a zero
    /// block. Row heights and column widths are taken from the first present
    /// block in each row/column.
    pub fn from_blocks(grid: &[Vec<Option<&CMatrix>>]) -> Result<CMatrix> {
        let nr = grid.len();
        let nc = grid.first().map_or(0, Vec::len);
        if nr == 0 || nc == 0 || grid.iter().any(|row| row.len() != nc) {
            return Err(Error::DimensionMismatch("block grid must be rectangular".into()));
        }
        let mut heights = vec![None; nr];
        let mut widths = vec![None; nc];
        for (i, row) in grid.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    for (slot, v) in [(&mut heights[i], b.rows()), (&mut widths[j], b.cols())] {
                        match slot {
                            None => *slot = Some(v),
                            Some(prev) if *prev != v => {
                                return Err(Error::DimensionMismatch(format!(
                                    "block ({i}, {j}) has incompatible shape {}x{}",
                                    b.rows(),
                                    b.cols()
                                )))
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| Error::DimensionMismatch("empty block row".into())))
            .collect::<Result<_>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| Error::DimensionMismatch("empty block column".into())))
            .collect::<Result<_>>()?;
        let mut out = CMatrix::zeros(heights.iter().sum(), widths.iter().sum());
        let mut r0 = 0;
        for (i, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    out.set_block(r0, c0, b);
                }
                c0 += widths[j];
            }
            r0 += heights[i];
        }
        Ok(out)
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    /// Parses the CSV form: one `re,im` pair per cell, one matrix row per
    /// line. Cells are separated by `;` or whitespace; a bare real number is
    /// accepted as a cell with zero imaginary part.
    pub fn from_csv(text: &str) -> Result<CMatrix> {
        let mut rows: Vec<Vec<C64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for cell in line.split(|c: char| c == ';' || c.is_whitespace()).filter(|c| !c.is_empty()) {
                let mut parts = cell.split(',');
                let parse = |s: Option<&str>| -> Result<f64> {
                    s.unwrap_or("0")
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
                };
                let re = parse(parts.next())?;
                let im = parse(parts.next())?;
                if parts.next().is_some() {
                    return Err(Error::Parse(format!("line {}: cell '{cell}' has too many parts", lineno + 1)));
                }
                row.push(C64::new(re, im));
            }
            rows.push(row);
        }
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged CSV matrix".into()));
        }
        CMatrix::from_row_major(r, c, rows.into_iter().flatten().collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows() {
            let cells: Vec<String> = (0..self.cols())
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{},{}", z.re, z.im)
                })
                .collect();
            out.push_str(&cells.join(";"));
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}x{}", self.rows(), self.cols())?;
        fmt::Display::fmt(&self.0, f)
    }
}

impl<'a> Add for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            data: self.to_row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let data = raw.data.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        CMatrix::from_row_major(raw.rows, raw.cols, data).map_err(D::Error::custom)
    }
}

/// Scale factor for all zero/nonzero decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub zero_threshold_factor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy { zero_threshold_factor: 16.0 }
    }
}

impl TolerancePolicy {
    pub fn new(zero_threshold_factor: f64) -> Result<Self> {
        if !(zero_threshold_factor.is_finite() && zero_threshold_factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance factor must be positive, got {zero_threshold_factor}"
            )));
        }
        Ok(TolerancePolicy { zero_threshold_factor })
    }

    /// `factor * dim * eps * norm`.
    pub fn threshold(&self, dim: usize, norm: f64) -> f64 {
        self.zero_threshold_factor * dim as f64 * f64::EPSILON * norm
    }

    /// Threshold for `m`, using its spectral norm.
    pub fn tau(&self, m: &CMatrix) -> f64 {
        self.threshold(m.rows().max(m.cols()), operator_norm(m))
    }
}

/// Eigenvalue counts split by sign at tolerance `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
}

impl Inertia {
    pub fn from_eigenvalues(eigs: &[f64], tau: f64) -> Self {
        let mut out = Inertia { n_plus: 0, n_zero: 0, n_minus: 0 };
        for &l in eigs {
            if l > tau {
                out.n_plus += 1;
            } else if l < -tau {
                out.n_minus += 1;
            } else {
                out.n_zero += 1;
            }
        }
        out
    }

    pub fn signature(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_zero + self.n_minus
    }
}

/// Ascending eigenvalues of a Hermitian matrix, with the threshold they were
/// judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub tau: f64,
}

impl HermitianSpectrum {
    pub fn inertia(&self) -> Inertia {
        Inertia::from_eigenvalues(&self.eigenvalues, self.tau)
    }

    pub fn min_abs(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// Symmetrizes, solves, sorts. The threshold is computed from the norm of the
/// symmetrized matrix.
pub fn hermitian_spectrum(m: &CMatrix, policy: &TolerancePolicy) -> Result<HermitianSpectrum> {
    let n = m.require_square()?;
    let sym = m.hermitian_part();
    let mut eigenvalues: Vec<f64> = sym.0.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let norm = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let tau = policy.threshold(n, norm);

    let skew = m - &m.adjoint();
    let frob = skew.frobenius_norm();
    // The Frobenius norm bounds the 2-norm from above, so the exact solve is
    // only needed when the cheap bound is inconclusive.
    if frob > tau {
        let asymmetry = operator_norm(&skew);
        if asymmetry > tau {
            return Err(Error::NotSelfAdjoint { asymmetry, tolerance: tau });
        }
    }
    Ok(HermitianSpectrum { eigenvalues, tau })
}

/// Ascending real eigenvalues of a (numerically) Hermitian matrix.
pub fn eig_hermitian(m: &CMatrix, policy: &TolerancePolicy) -> Result<Vec<f64>> {
    Ok(hermitian_spectrum(m, policy)?.eigenvalues)
}

/// Inertia and signature; with `require_invertible` any eigenvalue within
/// `tau` of zero is an error.
pub fn inertia_signature(
    m: &CMatrix,
    policy: &TolerancePolicy,
    require_invertible: bool,
) -> Result<(Inertia, i64)> {
    let decomp = hermitian_spectrum(m, policy)?;
    let inertia = decomp.inertia();
    if require_invertible && inertia.n_zero > 0 {
        return Err(Error::SingularAtTolerance { zeros: inertia.n_zero, tolerance: decomp.tau });
    }
    Ok((inertia, inertia.signature()))
}

/// Ascending singular values.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.0.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.0.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Smallest singular value; zero for rank-deficient input.
pub fn min_singular_value(m: &CMatrix) -> f64 {
    m.0.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a general square matrix (complex Schur form). Order follows
/// the Schur diagonal.
pub fn eig_general(m: &CMatrix) -> Result<Vec<C64>> {
    m.require_square()?;
    let schur = nalgebra::linalg::Schur::new(m.0.clone());
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn is_self_adjoint(m: &CMatrix, policy: &TolerancePolicy) -> bool {
    if !m.is_square() {
        return false;
    }
    let skew = m - &m.adjoint();
    let tau = policy.tau(m);
    skew.frobenius_norm() <= tau || operator_norm(&skew) <= tau
}

/// Block diagonal `diag(a, b)`.
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    out.set_block(0, 0, a);
    out.set_block(a.rows(), a.cols(), b);
    out
}

/// Kronecker product, `a` indexing the outer blocks.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix(a.0.kronecker(&b.0))
}

pub fn inverse(p: &CMatrix, policy: &TolerancePolicy) -> Result<CMatrix> {
    let n = p.require_square()?;
    let smin = min_singular_value(p);
    if smin <= policy.threshold(n, operator_norm(p)) {
        return Err(Error::SingularConjugator { min_singular: smin });
    }
    p.0.clone()
        .try_inverse()
        .map(CMatrix::wrap)
        .ok_or(Error::SingularConjugator { min_singular: smin })
}

/// True iff `||P A P^-1 - B||_2 <= tau * max(||A||, ||B||, 1)` with
/// `tau = factor * dim * eps`.
pub fn verify_similarity(a: &CMatrix, b: &CMatrix, p: &CMatrix, policy: &TolerancePolicy) -> Result<bool> {
    let n = a.require_square()?;
    b.require_square()?;
    p.require_square()?;
    if b.rows() != n || p.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {n}x{n}, B is {0}x{0}, P is {1}x{1}",
            b.rows(),
            p.rows()
        )));
    }
    let p_inv = inverse(p, policy)?;
    let conj = &(p * a) * &p_inv;
    let residual = operator_norm(&(&conj - b));
    let scale = operator_norm(a).max(operator_norm(b)).max(1.0);
    Ok(residual <= policy.threshold(n, 1.0) * scale)
}

/// Permutation matrix `P` with `P e_j = e_{perm[j]}`; `signs[j]` multiplies
/// the column.
pub fn signed_permutation(perm: &[usize], signs: &[f64]) -> Result<CMatrix> {
    let n = perm.len();
    if signs.len() != n {
        return Err(Error::DimensionMismatch("perm and signs differ in length".into()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        seen[p] = true;
    }
    let mut out = CMatrix::zeros(n, n);
    for (j, (&i, &s)) in perm.iter().zip(signs).enumerate() {
        out.set(i, j, C64::new(s, 0.0));
    }
    Ok(out)
}
