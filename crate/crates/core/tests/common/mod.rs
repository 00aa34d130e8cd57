#![allow(dead_code)]

use deltak::gap::OperatorElement;
use deltak::homotopy::HomotopyPath;
use deltak::{CMatrix, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    gaussian(rng, n).hermitian_part()
}

pub fn random_diagonal(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
    CMatrix::from_real_diagonal(&d)
}

/// `exp(i t H)` for Hermitian `H`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.inner().clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, t * l));
    let u: DMatrix<C64> = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    CMatrix::new(u).unwrap()
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    unitary_exp(&hermitian(rng, n), 1.0)
}

/// `t -> U(t) x U(t)*` with `U(t) = exp(i t H)`, `count` samples.
pub fn conjugation_path(x: &OperatorElement, h: &CMatrix, count: usize) -> HomotopyPath {
    HomotopyPath::sample(count, |t| {
        let u = unitary_exp(h, t);
        x.with_matrix(&(&u * &x.matrix) * &u.adjoint())
    })
    .unwrap()
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn verdict_line(criterion: u32, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}
