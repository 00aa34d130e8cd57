//! Sampled homotopies, stabilization, direct sums, contraction of invertibles
//! and formal class witnesses.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{self, CheckMode, OperatorElement};
use crate::linalg::{self, CMatrix, TolerancePolicy, C64};
use crate::localizer::{self, SpectralTriple};

/// Samples `x(t_k)` of a path with `t_0 = 0 < t_1 < ... < t_last = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyPath {
    pub samples: Vec<OperatorElement>,
    pub parameters: Vec<f64>,
}

impl HomotopyPath {
    pub fn new(samples: Vec<OperatorElement>, parameters: Vec<f64>) -> Result<Self> {
        if samples.len() != parameters.len() || samples.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "path needs at least two samples with matching parameters, got {} samples and {} parameters",
                samples.len(),
                parameters.len()
            )));
        }
        if parameters[0] != 0.0 || *parameters.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("path parameters must start at 0 and end at 1".into()));
        }
        if parameters.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("path parameters must be strictly increasing".into()));
        }
        let first = &samples[0];
        for (k, x) in samples.iter().enumerate() {
            if (x.dim(), x.block_size, x.ambient_dim) != (first.dim(), first.block_size, first.ambient_dim) {
                return Err(Error::ShapeMismatch(format!(
                    "sample {k} has dimension {} with block size {}, sample 0 has {} with {}",
                    x.dim(),
                    x.block_size,
                    first.dim(),
                    first.block_size
                )));
            }
        }
        Ok(HomotopyPath { samples, parameters })
    }

    /// Samples `f` at `count` equally spaced parameters.
    pub fn sample(count: usize, f: impl Fn(f64) -> Result<OperatorElement>) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument("a path needs at least two samples".into()));
        }
        let ts: Vec<f64> = (0..count).map(|k| k as f64 / (count - 1) as f64).collect();
        let xs = ts.iter().map(|&t| f(t)).collect::<Result<_>>()?;
        Self::new(xs, ts)
    }

    pub fn constant(x: &OperatorElement, count: usize) -> Result<Self> {
        Self::sample(count, |_| Ok(x.clone()))
    }

    pub fn start(&self) -> &OperatorElement {
        &self.samples[0]
    }

    pub fn end(&self) -> &OperatorElement {
        self.samples.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Sa,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    #[serde(with = "crate::serde_inf")]
    pub delta_max: f64,
    /// s-gap at `s = delta / 2`.
    pub s_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCertificate {
    pub delta: f64,
    pub mode: PathMode,
    pub verdict: bool,
    pub guard: f64,
    pub max_step: f64,
    pub samples: Vec<PathSample>,
}

/// Certifies that a sampled path stays in the delta-gapped set: every sample
/// is gapped, and every step is shorter than half the smallest s-gap at
/// `s = delta/2`, so by Weyl's inequality no bordered matrix between two
/// samples can become singular.
pub fn verify_path(
    path: &HomotopyPath,
    delta: f64,
    mode: PathMode,
    policy: &TolerancePolicy,
) -> Result<PathCertificate> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("path certification needs delta > 0, got {delta}")));
    }
    let check_mode = match mode {
        PathMode::Sa => {
            if let Some(k) = path.samples.iter().position(|x| !x.self_adjoint) {
                return Err(Error::ModeMismatch(format!("sample {k} is not self-adjoint")));
            }
            CheckMode::SelfAdjoint
        }
        PathMode::General => CheckMode::Spectrum,
    };
    let per_sample: Vec<(bool, PathSample)> = path
        .samples
        .par_iter()
        .zip(&path.parameters)
        .map(|(x, &t)| {
            let cert = gap::delta_singular_check(x, delta, check_mode, 0, policy)?;
            let s_gap = gap::s_gap(x, 0.5 * delta, policy)?;
            Ok((cert.verdict, PathSample { t, delta_max: cert.delta_max, s_gap }))
        })
        .collect::<Result<_>>()?;
    if let Some(k) = per_sample.iter().position(|(ok, _)| !ok) {
        return Err(Error::GapViolation { sample: k, t: path.parameters[k] });
    }
    let samples: Vec<PathSample> = per_sample.into_iter().map(|(_, s)| s).collect();
    let guard = 0.5 * samples.iter().map(|s| s.s_gap).fold(f64::INFINITY, f64::min);
    let mut max_step: f64 = 0.0;
    for (k, w) in path.samples.windows(2).enumerate() {
        let step = linalg::operator_norm(&(&w[1].matrix - &w[0].matrix));
        if !(step < guard) {
            return Err(Error::StepTooLarge { step: k, step_norm: step, guard });
        }
        max_step = max_step.max(step);
    }
    Ok(PathCertificate { delta, mode, verdict: true, guard, max_step, samples })
}

/// `x (+) e_{m-n}`.
pub fn stabilize(x: &OperatorElement, level: usize) -> Result<OperatorElement> {
    if level < x.block_size {
        return Err(Error::LevelTooSmall { target: level, block_size: x.block_size });
    }
    let extra = (level - x.block_size) * x.ambient_dim;
    if extra == 0 {
        return Ok(x.clone());
    }
    Ok(OperatorElement {
        matrix: linalg::direct_sum(&x.matrix, &CMatrix::identity(extra)),
        block_size: level,
        ambient_dim: x.ambient_dim,
        self_adjoint: x.self_adjoint,
    })
}

/// `[x] + [x'] = [x (+) x']`.
pub fn direct_sum_class(x: &OperatorElement, y: &OperatorElement) -> Result<OperatorElement> {
    if x.ambient_dim != y.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            x.ambient_dim, y.ambient_dim
        )));
    }
    Ok(OperatorElement {
        matrix: linalg::direct_sum(&x.matrix, &y.matrix),
        block_size: x.block_size + y.block_size,
        ambient_dim: x.ambient_dim,
        self_adjoint: x.self_adjoint && y.self_adjoint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    pub z: C64,
    pub theta: f64,
    pub min_singular_values: Vec<f64>,
    pub path: HomotopyPath,
}

fn angle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Direction `z` for the straight path from `z I` to `x`: the line through
/// `+-z` bisects the widest gap between eigenvalue arguments taken mod pi;
/// of the two signs the one farther from the eigenvalues wins, `+` on ties.
pub fn contraction_direction(eigs: &[C64]) -> Result<f64> {
    let mut args: Vec<f64> = eigs.iter().map(|l| l.arg().rem_euclid(PI)).collect();
    args.sort_by(f64::total_cmp);
    let (mut best_gap, mut best_mid) = (-1.0, 0.0);
    for (i, &a) in args.iter().enumerate() {
        let next = if i + 1 < args.len() { args[i + 1] } else { args[0] + PI };
        let gap = next - a;
        if gap > best_gap + 1e-12 {
            best_gap = gap;
            best_mid = a + 0.5 * gap;
        }
    }
    if args.is_empty() {
        best_mid = 0.5 * PI;
        best_gap = PI;
    }
    if best_gap < 1e-12 {
        return Err(Error::NoGapFound { widest_gap: best_gap });
    }
    let full: Vec<f64> = eigs.iter().map(|l| l.arg()).collect();
    let score = |th: f64| full.iter().map(|&a| angle_dist(a, th)).fold(f64::INFINITY, f64::min);
    let (plus, minus) = (best_mid, best_mid + PI);
    let theta = if score(minus) > score(plus) + 1e-12 { minus } else { plus };
    Ok(theta.rem_euclid(2.0 * PI))
}

/// Straight path `t x + z (1 - t) I`, `t` in `[0, 1]`, sampled at `samples`
/// points, certified invertible at each sample.
pub fn contract_invertible(x: &OperatorElement, samples: usize, policy: &TolerancePolicy) -> Result<Contraction> {
    let n = x.dim();
    let tau = policy.threshold(n, linalg::operator_norm(&x.matrix).max(1.0));
    let smin = linalg::min_singular_value(&x.matrix);
    if !(smin > tau) {
        return Err(Error::NotInvertible { min_singular: smin });
    }
    let theta = contraction_direction(&linalg::eig_general(&x.matrix)?)?;
    let z = C64::from_polar(1.0, theta);
    let id = CMatrix::identity(n);
    let path = HomotopyPath::sample(samples, |t| {
        let m = &x.matrix.scale(t) + &id.scale_complex(z * (1.0 - t));
        OperatorElement::with_policy(m, x.block_size, policy)
    })?;
    let min_singular_values: Vec<f64> = path.samples.par_iter().map(|s| linalg::min_singular_value(&s.matrix)).collect();
    for (s, &v) in path.samples.iter().zip(&min_singular_values) {
        let tol = policy.threshold(n, linalg::operator_norm(&s.matrix).max(1.0));
        if !(v > tol) {
            return Err(Error::NotInvertible { min_singular: v });
        }
    }
    Ok(Contraction { z, theta, min_singular_values, path })
}

/// Formal difference `[plus] - [minus]` with `minus = e` at the same level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KClassWitness {
    pub plus: OperatorElement,
    pub minus: OperatorElement,
    pub level: usize,
    pub delta: f64,
    pub invariant_indices: BTreeMap<String, i64>,
}

impl KClassWitness {
    pub fn make(x: &OperatorElement, delta: f64, policy: &TolerancePolicy) -> Result<Self> {
        let cert = gap::delta_singular_check(x, delta, CheckMode::Spectrum, 0, policy)?;
        if !cert.verdict {
            return Err(Error::NotGapped { delta });
        }
        Ok(KClassWitness {
            plus: x.clone(),
            minus: OperatorElement::unit(x.ambient_dim, x.block_size),
            level: x.block_size,
            delta,
            invariant_indices: BTreeMap::new(),
        })
    }

    pub fn stabilized(&self, level: usize) -> Result<OperatorElement> {
        stabilize(&self.plus, level)
    }

    /// Stabilizes both witnesses to a common level and certifies `path`
    /// between them. A path whose endpoints do not match, or which fails
    /// certification, yields `false`.
    pub fn equal_certified(&self, other: &Self, path: &HomotopyPath, policy: &TolerancePolicy) -> Result<bool> {
        let level = self.level.max(other.level);
        let (a, b) = (self.stabilized(level)?, other.stabilized(level)?);
        let close = |x: &OperatorElement, y: &OperatorElement| {
            x.dim() == y.dim() && linalg::operator_norm(&(&x.matrix - &y.matrix)) <= policy.tau(&x.matrix).max(policy.threshold(x.dim(), 1.0))
        };
        if !close(path.start(), &a) || !close(path.end(), &b) {
            return Ok(false);
        }
        match verify_path(path, self.delta.min(other.delta), PathMode::General, policy) {
            Ok(_) => Ok(true),
            Err(e) if e.is_verdict() => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Index of the witness against `t` at the witness's delta.
    pub fn index(&self, t: &SpectralTriple, policy: &TolerancePolicy) -> Result<i64> {
        Ok(localizer::index(t, &self.plus, self.delta, None, policy)?.index)
    }

    pub fn record_index(&mut self, name: &str, t: &SpectralTriple, policy: &TolerancePolicy) -> Result<i64> {
        let i = self.index(t, policy)?;
        self.invariant_indices.insert(name.to_string(), i);
        Ok(i)
    }

    /// `true` when the indices differ, which refutes equality of the classes.
    pub fn distinct_by_index(&self, other: &Self, t: &SpectralTriple, policy: &TolerancePolicy) -> Result<bool> {
        Ok(self.index(t, policy)? != other.index(t, policy)?)
    }
}

/// Path file format: `{"delta", "mode", "samples": [{"t", "matrix"}], "block_size"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub delta: f64,
    pub mode: PathMode,
    #[serde(default = "one")]
    pub block_size: usize,
    pub samples: Vec<PathFileSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFileSample {
    pub t: f64,
    pub matrix: CMatrix,
}

fn one() -> usize {
    1
}

impl PathFile {
    pub fn into_path(self, policy: &TolerancePolicy) -> Result<(HomotopyPath, f64, PathMode)> {
        let mut xs = Vec::with_capacity(self.samples.len());
        let mut ts = Vec::with_capacity(self.samples.len());
        for s in self.samples {
            ts.push(s.t);
            xs.push(OperatorElement::with_policy(s.matrix, self.block_size, policy)?);
        }
        Ok((HomotopyPath::new(xs, ts)?, self.delta, self.mode))
    }
}
