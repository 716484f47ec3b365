//! Helpers shared by the integration test suites.
//!
//! Each test binary uses its own subset of these.
#![allow(dead_code)]

use ndarray::Array3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qso::BisexualModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random model with Dirichlet-distributed rows. `floor` is added to
/// every raw draw before normalization, so `floor > 0` keeps all
/// coefficients strictly positive.
pub fn random_model<R: Rng + ?Sized>(
    n: usize,
    nu: usize,
    floor: f64,
    rng: &mut R,
) -> BisexualModel {
    let mut female = Array3::zeros((n, nu, n));
    let mut male = Array3::zeros((n, nu, nu));
    for i in 0..n {
        for j in 0..nu {
            fill_row(&mut female, i, j, n, floor, rng);
            fill_row(&mut male, i, j, nu, floor, rng);
        }
    }
    BisexualModel::new(female, male).expect("normalized rows validate")
}

fn fill_row<R: Rng + ?Sized>(
    tensor: &mut Array3<f64>,
    i: usize,
    j: usize,
    len: usize,
    floor: f64,
    rng: &mut R,
) {
    let raw: Vec<f64> = (0..len)
        .map(|_| -f64::ln_1p(-rng.gen::<f64>()) + floor)
        .collect();
    let sum: f64 = raw.iter().sum();
    for (k, v) in raw.iter().enumerate() {
        tensor[[i, j, k]] = v / sum;
    }
}

/// A random model close to the constant operator: rows are a uniform
/// base plus a bounded perturbation, so the scatter bound stays small.
pub fn near_constant_model<R: Rng + ?Sized>(
    n: usize,
    nu: usize,
    spread: f64,
    rng: &mut R,
) -> BisexualModel {
    let mut female = Array3::zeros((n, nu, n));
    let mut male = Array3::zeros((n, nu, nu));
    for i in 0..n {
        for j in 0..nu {
            perturbed_row(&mut female, i, j, n, spread, rng);
            perturbed_row(&mut male, i, j, nu, spread, rng);
        }
    }
    BisexualModel::new(female, male).expect("normalized rows validate")
}

fn perturbed_row<R: Rng + ?Sized>(
    tensor: &mut Array3<f64>,
    i: usize,
    j: usize,
    len: usize,
    spread: f64,
    rng: &mut R,
) {
    let raw: Vec<f64> = (0..len)
        .map(|_| 1.0 / len as f64 + rng.gen_range(0.0..spread / len as f64))
        .collect();
    let sum: f64 = raw.iter().sum();
    for (k, v) in raw.iter().enumerate() {
        tensor[[i, j, k]] = v / sum;
    }
}
