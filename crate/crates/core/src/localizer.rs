//! Spectral triples over represented operator systems and their spectral
//! localizers.
//!
//! Two localizers are assembled:
//!
//! * the generalized localizer, a `4nd x 4nd` block matrix
//!   `[[s, x, kD0, 0], [x*, s, 0, kD0], [kD0*, 0, -s, -x], [0, kD0*, -x*, -s]]`,
//!   which carries the gap bound `L^2 >= g_s^2 - k ||[D, x]||`;
//! * the reduced (odd or even) localizer,
//!   `[[kD, x], [x*, -kD]]` or `[[x, kD0], [kD0*, -x]]`.
//!
//! The generalized localizer is conjugated to its negative by the outer
//! `sigma_y (x) I` (odd case), so its signature is always zero. The integer
//! index is therefore read off the reduced localizer as half its signature,
//! and the generalized data is reported alongside.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{self, CheckMode, OperatorElement};
use crate::linalg::{self, CMatrix, HermitianSpectrum, Inertia, TolerancePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// Finite spectral triple. For odd parity `d0` is the self-adjoint Dirac
/// matrix itself; for even parity it is the off-diagonal block of
/// `D = [[0, d0], [d0*, 0]]` with grading `diag(I, -I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriple {
    pub parity: Parity,
    pub d0: CMatrix,
    pub grading: Option<CMatrix>,
    pub ambient_dim: usize,
}

impl SpectralTriple {
    pub fn odd(d: CMatrix, policy: &TolerancePolicy) -> Result<Self> {
        let n = d.require_square()?;
        if !linalg::is_self_adjoint(&d, policy) {
            let asymmetry = linalg::operator_norm(&(&d - &d.adjoint()));
            return Err(Error::NotSelfAdjoint { asymmetry, tolerance: policy.tau(&d) });
        }
        Ok(SpectralTriple { parity: Parity::Odd, d0: d.hermitian_part(), grading: None, ambient_dim: n })
    }

    pub fn even(d0: CMatrix) -> Result<Self> {
        let n = d0.require_square()?;
        let grading = linalg::direct_sum(&CMatrix::identity(n), &CMatrix::identity(n).scale(-1.0));
        Ok(SpectralTriple { parity: Parity::Even, d0, grading: Some(grading), ambient_dim: n })
    }

    /// `D0^{(+) n}` as `I_n (x) D0`.
    pub fn amplified_d0(&self, block_size: usize) -> CMatrix {
        linalg::kron(&CMatrix::identity(block_size), &self.d0)
    }

    /// The full Dirac matrix, amplified `n`-fold.
    pub fn assembled_dirac(&self, block_size: usize) -> CMatrix {
        let d0 = self.amplified_d0(block_size);
        match self.parity {
            Parity::Odd => d0,
            Parity::Even => {
                let adj = d0.adjoint();
                CMatrix::from_blocks(&[vec![None, Some(&d0)], vec![Some(&adj), None]])
                    .expect("square blocks of equal size")
            }
        }
    }

    fn check_element(&self, x: &OperatorElement) -> Result<()> {
        if x.ambient_dim != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "element ambient dimension {} but Dirac matrix is {}x{}",
                x.ambient_dim, self.ambient_dim, self.ambient_dim
            )));
        }
        Ok(())
    }
}

/// `||[D, x]||_2`. In the even case `x` acts diagonally on both graded halves.
pub fn commutator_norm(t: &SpectralTriple, x: &OperatorElement) -> Result<f64> {
    t.check_element(x)?;
    let d = t.assembled_dirac(x.block_size);
    let xm = match t.parity {
        Parity::Odd => x.matrix.clone(),
        Parity::Even => linalg::direct_sum(&x.matrix, &x.matrix),
    };
    Ok(linalg::operator_norm(&(&(&d * &xm) - &(&xm * &d))))
}

fn check_params(kappa: f64, s: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidArgument(format!("s must be finite and >= 0, got {s}")));
    }
    Ok(())
}

/// Generalized localizer `L_k(D, x, s)`.
pub fn build_generalized(t: &SpectralTriple, x: &OperatorElement, kappa: f64, s: f64) -> Result<CMatrix> {
    t.check_element(x)?;
    check_params(kappa, s)?;
    let n = x.dim();
    let sp = CMatrix::identity(n).scale(s);
    let sm = sp.scale(-1.0);
    let xm = &x.matrix;
    let xa = xm.adjoint();
    let neg_x = xm.scale(-1.0);
    let neg_xa = xa.scale(-1.0);
    let kd = t.amplified_d0(x.block_size).scale(kappa);
    let kda = kd.adjoint();
    CMatrix::from_blocks(&[
        vec![Some(&sp), Some(xm), Some(&kd), None],
        vec![Some(&xa), Some(&sp), None, Some(&kd)],
        vec![Some(&kda), None, Some(&sm), Some(&neg_x)],
        vec![None, Some(&kda), Some(&neg_xa), Some(&sm)],
    ])
}

/// Reduced localizer: odd `[[kD, x], [x*, -kD]]`, even `[[x, kD0], [kD0*, -x]]`.
pub fn build_reduced(t: &SpectralTriple, x: &OperatorElement, kappa: f64) -> Result<CMatrix> {
    t.check_element(x)?;
    check_params(kappa, 0.0)?;
    let kd = t.amplified_d0(x.block_size).scale(kappa);
    match t.parity {
        Parity::Odd => {
            let xa = x.matrix.adjoint();
            let neg = kd.scale(-1.0);
            CMatrix::from_blocks(&[vec![Some(&kd), Some(&x.matrix)], vec![Some(&xa), Some(&neg)]])
        }
        Parity::Even => {
            if !x.self_adjoint {
                return Err(Error::ModeMismatch("even localizer needs a self-adjoint element".into()));
            }
            let kda = kd.adjoint();
            let neg = x.matrix.scale(-1.0);
            CMatrix::from_blocks(&[vec![Some(&x.matrix), Some(&kd)], vec![Some(&kda), Some(&neg)]])
        }
    }
}

/// The `(kappa, s)` region `0 < s < delta`, `0 < kappa < min{s, delta-s}^2 / ||[D,x]||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidRegion {
    pub delta: f64,
    pub commutator_norm: f64,
    /// No upper bound on kappa (the commutator vanishes at tolerance).
    pub unbounded: bool,
    pub default_kappa: f64,
    pub default_s: f64,
}

impl ValidRegion {
    pub fn g(&self, s: f64) -> f64 {
        s.min(self.delta - s).max(0.0)
    }

    /// Upper end of the kappa interval at shift `s`.
    pub fn kappa_max(&self, s: f64) -> f64 {
        if self.unbounded {
            f64::INFINITY
        } else {
            self.g(s).powi(2) / self.commutator_norm
        }
    }

    pub fn contains(&self, kappa: f64, s: f64) -> bool {
        s > 0.0 && s < self.delta && kappa > 0.0 && kappa < self.kappa_max(s)
    }

    /// Default interior point followed by the four corners of the shrunken
    /// rectangle `s in {delta/4, 3 delta/4}`, `kappa in {1/4, 3/4} * kappa_max(delta/4)`.
    pub fn sample_points(&self) -> Vec<(f64, f64)> {
        let (s_lo, s_hi) = (0.25 * self.delta, 0.75 * self.delta);
        let k_ref = if self.unbounded { 1.0 } else { self.kappa_max(s_lo) };
        let (k_lo, k_hi) = (0.25 * k_ref, 0.75 * k_ref);
        vec![
            (self.default_kappa, self.default_s),
            (k_lo, s_lo),
            (k_hi, s_lo),
            (k_lo, s_hi),
            (k_hi, s_hi),
        ]
    }

    /// `n x n` grid of interior points, for constancy sweeps.
    pub fn grid(&self, n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n * n);
        for i in 1..=n {
            let s = self.delta * i as f64 / (n + 1) as f64;
            let k_ref = if self.unbounded { 1.0 } else { self.kappa_max(s) };
            for j in 1..=n {
                out.push((k_ref * j as f64 / (n + 1) as f64, s));
            }
        }
        out
    }
}

pub fn valid_region(
    t: &SpectralTriple,
    x: &OperatorElement,
    delta: f64,
    policy: &TolerancePolicy,
) -> Result<ValidRegion> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("region needs 0 < delta < inf, got {delta}")));
    }
    let cert = gap::delta_singular_check(x, delta, CheckMode::Spectrum, 0, policy)?;
    if !cert.verdict {
        return Err(Error::NotGapped { delta });
    }
    let c = commutator_norm(t, x)?;
    let scale = linalg::operator_norm(&t.d0).max(1.0) * linalg::operator_norm(&x.matrix).max(1.0);
    let unbounded = c <= policy.threshold(x.dim(), scale);
    let default_s = 0.5 * delta;
    let mut region = ValidRegion { delta, commutator_norm: c, unbounded, default_kappa: 0.0, default_s };
    region.default_kappa = if unbounded { 1.0 } else { 0.5 * region.kappa_max(default_s) };
    Ok(region)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBoundCheck {
    pub holds: bool,
    pub min_eig_squared: f64,
    pub bound: f64,
    pub margin: f64,
}

/// Checks `lambda_min(L^2) >= g^2 - kappa ||[D, x]||` for the generalized
/// localizer. With `delta`, `g = min{s, delta - s}`; without, `g` is the
/// measured smallest |eigenvalue| of the bordered matrix at `s`.
pub fn gap_bound_check(
    t: &SpectralTriple,
    x: &OperatorElement,
    kappa: f64,
    s: f64,
    delta: Option<f64>,
    policy: &TolerancePolicy,
) -> Result<GapBoundCheck> {
    let l = build_generalized(t, x, kappa, s)?;
    let decomp = linalg::hermitian_spectrum(&l, policy)?;
    let g = match delta {
        Some(d) => s.min(d - s).max(0.0),
        None => linalg::hermitian_spectrum(&gap::bordered(x, s)?, policy)?.min_abs(),
    };
    let bound = g * g - kappa * commutator_norm(t, x)?;
    let min_sq = decomp.min_abs().powi(2);
    let tau_sq = policy.threshold(l.rows(), decomp.max_abs().powi(2).max(1.0));
    Ok(GapBoundCheck { holds: min_sq >= bound - tau_sq, min_eig_squared: min_sq, bound, margin: min_sq - bound })
}

/// Both localizers evaluated at one `(kappa, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizerSnapshot {
    pub kappa: f64,
    pub s: f64,
    pub commutator_norm: f64,
    /// `g_s^2 - kappa ||[D,x]||` (with `g_s` measured when no delta is known).
    pub gap_bound: f64,
    pub eigenvalues: Vec<f64>,
    pub inertia: Inertia,
    pub signature: i64,
    pub min_abs_eig: f64,
    pub reduced_eigenvalues: Vec<f64>,
    pub reduced_inertia: Inertia,
    pub reduced_signature: i64,
    pub reduced_min_abs_eig: f64,
    pub tolerance: f64,
    pub reduced_tolerance: f64,
}

impl LocalizerSnapshot {
    pub fn reduced_invertible(&self) -> bool {
        self.reduced_inertia.n_zero == 0
    }

    pub fn generalized_invertible(&self) -> bool {
        self.inertia.n_zero == 0
    }
}

fn snapshot_inner(
    t: &SpectralTriple,
    x: &OperatorElement,
    kappa: f64,
    s: f64,
    g: f64,
    comm: f64,
    policy: &TolerancePolicy,
) -> Result<LocalizerSnapshot> {
    let gen: HermitianSpectrum = linalg::hermitian_spectrum(&build_generalized(t, x, kappa, s)?, policy)?;
    let red: HermitianSpectrum = linalg::hermitian_spectrum(&build_reduced(t, x, kappa)?, policy)?;
    let (inertia, reduced_inertia) = (gen.inertia(), red.inertia());
    Ok(LocalizerSnapshot {
        kappa,
        s,
        commutator_norm: comm,
        gap_bound: g * g - kappa * comm,
        inertia,
        signature: inertia.signature(),
        min_abs_eig: gen.min_abs(),
        tolerance: gen.tau,
        reduced_inertia,
        reduced_signature: reduced_inertia.signature(),
        reduced_min_abs_eig: red.min_abs(),
        reduced_tolerance: red.tau,
        eigenvalues: gen.eigenvalues,
        reduced_eigenvalues: red.eigenvalues,
    })
}

/// Evaluates both localizers at a single point without any region logic.
pub fn snapshot(
    t: &SpectralTriple,
    x: &OperatorElement,
    kappa: f64,
    s: f64,
    policy: &TolerancePolicy,
) -> Result<LocalizerSnapshot> {
    let comm = commutator_norm(t, x)?;
    let g = linalg::hermitian_spectrum(&gap::bordered(x, s)?, policy)?.min_abs();
    snapshot_inner(t, x, kappa, s, g, comm, policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub kappa: f64,
    pub s: f64,
    pub signature: i64,
    pub min_abs_eig: f64,
    pub reduced_signature: i64,
    pub reduced_min_abs_eig: f64,
    pub gap_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizerReport {
    pub parity: Parity,
    pub delta: f64,
    pub index: i64,
    #[serde(flatten)]
    pub primary: LocalizerSnapshot,
    pub samples: Vec<SampleSummary>,
    pub region: ValidRegion,
}

/// Integer index of the class of `x` against the triple.
///
/// Without an explicit `point`, the reduced localizer is evaluated at the
/// region's default point and the four corners of its shrunken rectangle;
/// all five signatures must agree. With a `point`, that single `(kappa, s)`
/// is used and only certified invertibility of the reduced localizer is
/// required, so points outside the sufficient region are accepted. The index
/// is half the reduced signature.
pub fn index(
    t: &SpectralTriple,
    x: &OperatorElement,
    delta: f64,
    point: Option<(f64, f64)>,
    policy: &TolerancePolicy,
) -> Result<LocalizerReport> {
    t.check_element(x)?;
    if t.parity == Parity::Even && !x.self_adjoint {
        return Err(Error::ModeMismatch("even pairing needs a self-adjoint element".into()));
    }
    let region = valid_region(t, x, delta, policy)?;
    let points = match point {
        Some(p) => vec![p],
        None => region.sample_points(),
    };
    let comm = region.commutator_norm;
    let snaps: Vec<LocalizerSnapshot> = points
        .par_iter()
        .map(|&(kappa, s)| snapshot_inner(t, x, kappa, s, region.g(s), comm, policy))
        .collect::<Result<_>>()?;

    for snap in &snaps {
        if !snap.reduced_invertible() {
            return Err(Error::SingularLocalizer {
                kappa: snap.kappa,
                s: snap.s,
                min_abs_eig: snap.reduced_min_abs_eig,
            });
        }
    }
    let sigs: Vec<i64> = snaps.iter().map(|s| s.reduced_signature).collect();
    if sigs.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InconsistentSignature(sigs));
    }
    let sig = sigs[0];
    if sig % 2 != 0 {
        return Err(Error::NotDivisible { signature: sig, divisor: 2 });
    }
    let samples = snaps
        .iter()
        .map(|s| SampleSummary {
            kappa: s.kappa,
            s: s.s,
            signature: s.signature,
            min_abs_eig: s.min_abs_eig,
            reduced_signature: s.reduced_signature,
            reduced_min_abs_eig: s.reduced_min_abs_eig,
            gap_bound: s.gap_bound,
        })
        .collect();
    let primary = snaps.into_iter().next().expect("at least one sample point");
    Ok(LocalizerReport { parity: t.parity, delta, index: sig / 2, primary, samples, region })
}
