//! Complex Clifford algebras as matrices, odd-part embeddings and the
//! periodicity reductions.
//!
//! Tensor products `E (x) Cl` are laid out with the Clifford index outer,
//! i.e. `c (x) x` is `kron(c, x)`. An element of `M_n(E (x) Cl_q)` therefore
//! carries block size `rep_dim(q) * n` over the original ambient space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{self, OperatorElement};
use crate::linalg::{self, CMatrix, TolerancePolicy, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliffordRep {
    pub p: usize,
    pub rep_dim: usize,
    pub generators: Vec<CMatrix>,
    pub grading: CMatrix,
    /// Odd `p`: `grading` swaps two halves. Even `p`: `grading = diag(I, -I)`.
    pub odd: bool,
}

impl CliffordRep {
    /// `(I + Gamma)/2` for parity 0, `(I - Gamma)/2` for parity 1.
    pub fn parity_projector(&self, parity: u8) -> CMatrix {
        let id = CMatrix::identity(self.rep_dim);
        let g = if parity == 0 { &id + &self.grading } else { &id - &self.grading };
        g.scale(0.5)
    }
}

pub fn rep_dim(p: usize) -> usize {
    1usize << p.div_ceil(2)
}

fn pauli() -> [CMatrix; 4] {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    [
        CMatrix::identity(2),
        CMatrix::from_row_major(2, 2, vec![z, o, o, z]).unwrap(),
        CMatrix::from_row_major(2, 2, vec![z, -i, i, z]).unwrap(),
        CMatrix::from_real_diagonal(&[1.0, -1.0]),
    ]
}

fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| linalg::kron(&acc, f))
}

/// Jordan-Wigner generators of `Cl_{2m}` on `(C^2)^{(x) m}`, conjugated so
/// the chirality `Z^{(x) m}` becomes `diag(I, -I)`.
fn even_rep(m: usize) -> (Vec<CMatrix>, CMatrix) {
    if m == 0 {
        return (Vec::new(), CMatrix::identity(1));
    }
    let [id, x, y, z] = pauli();
    let mut gens = Vec::with_capacity(2 * m);
    for k in 0..m {
        for mid in [&x, &y] {
            let factors: Vec<&CMatrix> =
                (0..m).map(|site| if site < k { &z } else if site == k { mid } else { &id }).collect();
            gens.push(kron_all(&factors));
        }
    }
    let chirality = kron_all(&vec![&z; m]);
    let dim = 1usize << m;
    let plus: Vec<usize> = (0..dim).filter(|&i| chirality.get(i, i).re > 0.0).collect();
    let minus: Vec<usize> = (0..dim).filter(|&i| chirality.get(i, i).re < 0.0).collect();
    let mut perm = vec![0; dim];
    for (new, &old) in plus.iter().chain(&minus).enumerate() {
        perm[old] = new;
    }
    let p = linalg::signed_permutation(&perm, &vec![1.0; dim]).expect("valid permutation");
    let pt = p.adjoint();
    let gens = gens.iter().map(|g| &(&p * g) * &pt).collect();
    (gens, &(&p * &chirality) * &pt)
}

pub fn clifford_rep(p: usize) -> Result<CliffordRep> {
    if p == 0 {
        return Err(Error::InvalidArgument("Clifford algebra needs p >= 1".into()));
    }
    let m = p / 2;
    let (gens, grading, odd) = if p.is_multiple_of(2) {
        let (g, gamma) = even_rep(m);
        (g, gamma, false)
    } else {
        let (mut a, gamma) = even_rep(m);
        a.push(gamma);
        let h = 1usize << m;
        let sign = CMatrix::from_real_diagonal(&[1.0, -1.0]);
        let gens = a.iter().map(|ai| linalg::kron(&sign, ai)).collect();
        let swap = linalg::kron(&pauli()[1], &CMatrix::identity(h));
        (gens, swap, true)
    };
    Ok(CliffordRep { p, rep_dim: rep_dim(p), generators: gens, grading, odd })
}

/// Largest deviations from the defining relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationResiduals {
    pub anticommutation: f64,
    pub self_adjoint: f64,
    pub grading_anticommutes: f64,
    pub grading_involution: f64,
    pub grading_self_adjoint: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        [
            self.anticommutation,
            self.self_adjoint,
            self.grading_anticommutes,
            self.grading_involution,
            self.grading_self_adjoint,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn relation_residuals(rep: &CliffordRep) -> RelationResiduals {
    let n = rep.rep_dim;
    let id = CMatrix::identity(n);
    let g = &rep.grading;
    let mut r = RelationResiduals {
        anticommutation: 0.0,
        self_adjoint: 0.0,
        grading_anticommutes: 0.0,
        grading_involution: (&(g * g) - &id).max_abs(),
        grading_self_adjoint: (g - &g.adjoint()).max_abs(),
    };
    for (i, ei) in rep.generators.iter().enumerate() {
        r.self_adjoint = r.self_adjoint.max((ei - &ei.adjoint()).max_abs());
        r.grading_anticommutes = r.grading_anticommutes.max((&(g * ei) + &(ei * g)).max_abs());
        for (j, ej) in rep.generators.iter().enumerate() {
            let target = if i == j { id.scale(2.0) } else { CMatrix::zeros(n, n) };
            let ac = &(&(ei * ej) + &(ej * ei)) - &target;
            r.anticommutation = r.anticommutation.max(ac.max_abs());
        }
    }
    r
}

fn amplified_grading(rep: &CliffordRep, dim: usize) -> Result<CMatrix> {
    if !dim.is_multiple_of(rep.rep_dim) {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a multiple of the Clifford representation size {}",
            rep.rep_dim
        )));
    }
    Ok(linalg::kron(&rep.grading, &CMatrix::identity(dim / rep.rep_dim)))
}

/// `(a + Gamma a Gamma)/2` (parity 0) or `(a - Gamma a Gamma)/2` (parity 1),
/// with `Gamma` amplified as `Gamma (x) I`.
pub fn graded_part(a: &CMatrix, rep: &CliffordRep, parity: u8) -> Result<CMatrix> {
    let n = a.require_square()?;
    if parity > 1 {
        return Err(Error::InvalidArgument(format!("parity must be 0 or 1, got {parity}")));
    }
    let g = amplified_grading(rep, n)?;
    let conj = &(&g * a) * &g;
    Ok(if parity == 0 { a + &conj } else { a - &conj }.scale(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowTarget {
    V0,
    V1,
}

/// `V0`: `diag(x, -x)` (needs self-adjoint `x`). `V1`: `[[0, x], [x*, 0]]`.
pub fn embed_low(x: &OperatorElement, target: LowTarget) -> Result<OperatorElement> {
    let matrix = match target {
        LowTarget::V0 => {
            if !x.self_adjoint {
                return Err(Error::ModeMismatch("V0 embedding needs a self-adjoint element".into()));
            }
            linalg::direct_sum(&x.matrix, &x.matrix.scale(-1.0))
        }
        LowTarget::V1 => {
            let xa = x.matrix.adjoint();
            CMatrix::from_blocks(&[vec![None, Some(&x.matrix)], vec![Some(&xa), None]])?
        }
    };
    Ok(OperatorElement { matrix, block_size: 2 * x.block_size, ambient_dim: x.ambient_dim, self_adjoint: true })
}

/// `embed_low` for the target matching the parity of `p`.
pub fn embed_periodic(x: &OperatorElement, p: usize) -> Result<OperatorElement> {
    embed_low(x, if p.is_multiple_of(2) { LowTarget::V0 } else { LowTarget::V1 })
}

/// Maps a self-adjoint odd element of `M_n(E (x) Cl_{p+1})` to its
/// representative over `M_{2^{floor(p/2)}}(E)`: `V0` form for even `p`,
/// `V1` form for odd `p`. Block size halves.
pub fn reduce_periodic(y: &OperatorElement, p: usize, policy: &TolerancePolicy) -> Result<OperatorElement> {
    let rep = clifford_rep(p + 1)?;
    if !y.block_size.is_multiple_of(rep.rep_dim) {
        return Err(Error::DimensionMismatch(format!(
            "block size {} is not a multiple of the Clifford representation size {}",
            y.block_size, rep.rep_dim
        )));
    }
    let norm = linalg::operator_norm(&y.matrix);
    let tol = policy.threshold(y.dim(), norm.max(1.0));
    let asym = linalg::operator_norm(&(&y.matrix - &y.matrix.adjoint()));
    if asym > tol {
        return Err(Error::NotSelfAdjoint { asymmetry: asym, tolerance: tol });
    }
    let g = amplified_grading(&rep, y.dim())?;
    let residual = linalg::operator_norm(&(&(&g * &y.matrix) + &(&y.matrix * &g)));
    if residual > tol {
        return Err(Error::NotOdd { residual });
    }
    let h = y.dim() / 2;
    let (top, off, bottom) = (y.matrix.block(0, 0, h, h), y.matrix.block(0, h, h, h), y.matrix.block(h, h, h, h));
    let reduced = if p.is_multiple_of(2) {
        // Odd part of the block-diagonal image: diag(A, -A). Off-diagonal
        // content lies outside the algebra.
        let stray = linalg::operator_norm(&off).max(linalg::operator_norm(&(&top + &bottom)));
        if stray > tol {
            return Err(Error::NotOdd { residual: stray });
        }
        top.hermitian_part()
    } else {
        off
    };
    OperatorElement::new(reduced, y.block_size / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub v1: bool,
    /// Only checked for self-adjoint `x`.
    pub v0: Option<bool>,
}

impl DoublingCheck {
    pub fn holds(&self) -> bool {
        self.v1 && self.v0.unwrap_or(true)
    }
}

/// Checks that `bordered(embed_low(x), s)` is conjugate to
/// `bordered(x, s) (x) I_2` by an explicit signed permutation.
pub fn verify_doubling(x: &OperatorElement, s: f64, policy: &TolerancePolicy) -> Result<DoublingCheck> {
    let n = x.dim();
    let target = linalg::kron(&gap::bordered(x, s)?, &CMatrix::identity(2));
    // Index r of bordered(x, s) in copy c sits at 2r + c of the target.
    let build = |blocks: [[usize; 2]; 2], neg: [[bool; 2]; 2]| {
        let mut perm = vec![0; 4 * n];
        let mut signs = vec![1.0; 4 * n];
        for c in 0..2 {
            for half in 0..2 {
                for i in 0..n {
                    let from = blocks[c][half] * n + i;
                    perm[from] = 2 * (half * n + i) + c;
                    if neg[c][half] {
                        signs[from] = -1.0;
                    }
                }
            }
        }
        linalg::signed_permutation(&perm, &signs)
    };

    let m1 = gap::bordered(&embed_low(x, LowTarget::V1)?, s)?;
    let p1 = build([[0, 3], [2, 1]], [[false; 2]; 2])?;
    let v1 = linalg::verify_similarity(&m1, &target, &p1, policy)?;

    let v0 = if x.self_adjoint {
        let m0 = gap::bordered(&embed_low(x, LowTarget::V0)?, s)?;
        let p0 = build([[0, 2], [1, 3]], [[false, false], [false, true]])?;
        Some(linalg::verify_similarity(&m0, &target, &p0, policy)?)
    } else {
        None
    };
    Ok(DoublingCheck { v1, v0 })
}
