//! Concrete model builders.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{self, OperatorElement};
use crate::linalg::{CMatrix, TolerancePolicy, C64};
use crate::localizer::{self, LocalizerReport, SpectralTriple};

/// Truncated circle: Fourier modes `-N..=N` and winding number `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleModel {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: i64,
}

impl CircleModel {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn triple(&self) -> Result<SpectralTriple> {
        circle_dirac(self.n)
    }

    pub fn element(&self) -> Result<OperatorElement> {
        circle_unitary_truncation(self.m, self.n)
    }
}

/// `D = diag(-N, ..., N)`, the truncation of `-i d/dt`.
pub fn circle_dirac(n: usize) -> Result<SpectralTriple> {
    if n == 0 {
        return Err(Error::InvalidArgument("circle truncation needs N >= 1".into()));
    }
    let diag: Vec<f64> = (-(n as i64)..=n as i64).map(|k| k as f64).collect();
    SpectralTriple::odd(CMatrix::from_real_diagonal(&diag), &TolerancePolicy::default())
}

/// Compression of `e^{imt}` to modes `-N..=N`: entry `(j, k)` is 1 iff `k = j + m`.
pub fn circle_unitary_truncation(m: i64, n: usize) -> Result<OperatorElement> {
    if n == 0 {
        return Err(Error::InvalidArgument("circle truncation needs N >= 1".into()));
    }
    if m.unsigned_abs() > 2 * n as u64 {
        return Err(Error::WindingTooLarge { m, n });
    }
    let dim = 2 * n + 1;
    let x = CMatrix::from_fn(dim, dim, |j, k| {
        if k as i64 == j as i64 + m {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    OperatorElement::single(x)
}

/// `n x n` upper shift, the compression of the bilateral shift.
pub fn bilateral_shift_truncation(n: usize) -> Result<OperatorElement> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("shift truncation needs n >= 2, got {n}")));
    }
    let x = CMatrix::from_fn(n, n, |j, k| if k == j + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    OperatorElement::single(x)
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<C64> {
    // Row-major draw order so the output is independent of storage layout.
    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        data.push(C64::new(re, im));
    }
    DMatrix::from_row_slice(dim, dim, &data)
}

/// Seeded random element over ambient dimension `d` with `n` blocks whose
/// singular values (or |eigenvalues| when `self_adjoint`) are clamped up to `delta`.
pub fn random_gapped(d: usize, n: usize, delta: f64, self_adjoint: bool, seed: u64) -> Result<OperatorElement> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadDelta(delta));
    }
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let dim = d * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian(&mut rng, dim);
    let matrix = if self_adjoint {
        let h = (&g + g.adjoint()).scale(0.5);
        let eig = h.symmetric_eigen();
        let clamped = eig.eigenvalues.map(|l| if l.abs() < delta { delta.copysign(l) } else { l });
        let v = &eig.eigenvectors;
        let diag = DMatrix::from_diagonal(&clamped.map(|l| C64::new(l, 0.0)));
        let m = v * diag * v.adjoint();
        (&m + m.adjoint()).scale(0.5)
    } else {
        let svd = g.svd(true, true);
        let u = svd.u.expect("requested U");
        let vt = svd.v_t.expect("requested V^T");
        let sv = svd.singular_values.map(|s| C64::new(s.max(delta), 0.0));
        u * DMatrix::from_diagonal(&sv) * vt
    };
    let mut out = OperatorElement::new(CMatrix::new(matrix)?, n)?;
    out.self_adjoint = self_adjoint;
    Ok(out)
}

/// Runs the index on the circle model. `delta` is taken as `max_delta(x)`;
/// `kappa` and `s` select a single evaluation point, either one defaulting
/// to the region's default point coordinate.
pub fn winding_demo(m: i64, n: usize, kappa: Option<f64>, s: Option<f64>, policy: &TolerancePolicy) -> Result<LocalizerReport> {
    let model = CircleModel { n, m };
    let t = model.triple()?;
    let x = model.element()?;
    let delta = gap::max_delta(&x, policy)?;
    let delta = if delta.is_finite() { delta } else { 1.0 };
    let point = match (kappa, s) {
        (None, None) => None,
        (k, s) => {
            let region = localizer::valid_region(&t, &x, delta, policy)?;
            Some((k.unwrap_or(region.default_kappa), s.unwrap_or(region.default_s)))
        }
    };
    localizer::index(&t, &x, delta, point, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap::{delta_singular_check, CheckMode};
    use crate::linalg;

    #[test]
    fn dirac_small() {
        let t = circle_dirac(1).unwrap();
        assert_eq!(t.d0, CMatrix::from_real_diagonal(&[-1.0, 0.0, 1.0]));
        assert!(circle_dirac(0).is_err());
    }

    #[test]
    fn toeplitz_pattern() {
        let x = circle_unitary_truncation(1, 1).unwrap().matrix;
        let one = C64::new(1.0, 0.0);
        // modes -1, 0, 1 at rows 0, 1, 2
        assert_eq!(x.get(0, 1), one);
        assert_eq!(x.get(1, 2), one);
        assert!((x.frobenius_norm().powi(2) - 2.0).abs() < 1e-12);
        assert!(matches!(circle_unitary_truncation(7, 3), Err(Error::WindingTooLarge { .. })));
        let minus = circle_unitary_truncation(-2, 3).unwrap().matrix;
        assert_eq!(minus, circle_unitary_truncation(2, 3).unwrap().matrix.adjoint());
    }

    #[test]
    fn circle_sigma() {
        let p = TolerancePolicy::default();
        let x = circle_unitary_truncation(1, 3).unwrap();
        let sigma = gap::sigma_spectrum(&x, &p).unwrap();
        let zeros = sigma.iter().filter(|l| l.abs() < 1e-12).count();
        let ones = sigma.iter().filter(|l| (l.abs() - 1.0).abs() < 1e-12).count();
        assert_eq!((zeros, ones), (2, 12));
        assert!((gap::max_delta(&x, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_gap() {
        let p = TolerancePolicy::default();
        let x = bilateral_shift_truncation(4).unwrap();
        assert!(delta_singular_check(&x, 0.99, CheckMode::Spectrum, 0, &p).unwrap().verdict);
        assert!(!delta_singular_check(&x, 1.01, CheckMode::Spectrum, 0, &p).unwrap().verdict);
        assert!(bilateral_shift_truncation(1).is_err());
    }

    #[test]
    fn random_gapped_contract() {
        let p = TolerancePolicy::default();
        for seed in 0..10 {
            for sa in [false, true] {
                let x = random_gapped(3, 2, 0.4, sa, seed).unwrap();
                assert_eq!((x.ambient_dim, x.block_size, x.self_adjoint), (3, 2, sa));
                assert!(delta_singular_check(&x, 0.4, CheckMode::Spectrum, 0, &p).unwrap().verdict);
                let again = random_gapped(3, 2, 0.4, sa, seed).unwrap();
                assert_eq!(x, again);
                if sa {
                    assert_eq!(x.matrix, x.matrix.adjoint());
                }
            }
        }
        assert!(matches!(random_gapped(2, 1, 1.0, false, 0), Err(Error::BadDelta(_))));
        assert!(matches!(random_gapped(2, 1, 0.0, false, 0), Err(Error::BadDelta(_))));
    }

    #[test]
    fn demo_points() {
        let p = TolerancePolicy::default();
        let r = winding_demo(1, 3, Some(1.0), Some(0.0), &p).unwrap();
        assert_eq!((r.index, r.primary.reduced_signature), (1, 2));
        let r = winding_demo(2, 3, Some(0.1), Some(0.0), &p).unwrap();
        assert_eq!(r.index, 2);
        let r = winding_demo(-2, 5, None, None, &p).unwrap();
        assert_eq!(r.index, -2);
        let sig = linalg::inertia_signature(
            &localizer::build_reduced(&circle_dirac(3).unwrap(), &circle_unitary_truncation(1, 3).unwrap(), 1.0).unwrap(),
            &p,
            true,
        )
        .unwrap()
        .1;
        assert_eq!(sig, 2);
    }
}
