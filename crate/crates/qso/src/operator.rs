//! The quadratic evolution operator, its bilinear algebra product, and
//! its Jacobian.
//!
//! The operator maps a state `(x, y)` to the offspring distribution
//!
//! ```text
//! x'_k = sum_{i,j} p_f(i,j,k) x_i y_j,    y'_l = sum_{i,j} p_m(i,j,l) x_i y_j.
//! ```
//!
//! The same coefficients are the structure constants of a commutative
//! bilinear product on `R^{n+nu}` under which `z * z = W(z)`; fixed
//! points of the operator are exactly the idempotents on the simplex.

use ndarray::{Array1, Array2};

use crate::error::{QsoError, Result};
use crate::model::{BisexualModel, PopulationState};

/// A general element of `R^{n+nu}`: first `n` coordinates are female,
/// the rest male. No simplex constraint; entries are expected finite.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub coords: Array1<f64>,
}

impl AlgebraElement {
    pub fn new(coords: Vec<f64>) -> Self {
        Self {
            coords: Array1::from(coords),
        }
    }

    /// Embed a population state into `R^{n+nu}`.
    pub fn from_state(z: &PopulationState) -> Self {
        Self {
            coords: Array1::from(z.coords()),
        }
    }

    /// Standard basis vector for a female type.
    pub fn female_unit(model: &BisexualModel, i: usize) -> Result<Self> {
        if i >= model.n() {
            return Err(QsoError::IndexOutOfRange {
                index: i,
                limit: model.n(),
            });
        }
        let mut coords = Array1::zeros(model.dim());
        coords[i] = 1.0;
        Ok(Self { coords })
    }

    /// Standard basis vector for a male type.
    pub fn male_unit(model: &BisexualModel, j: usize) -> Result<Self> {
        if j >= model.nu() {
            return Err(QsoError::IndexOutOfRange {
                index: j,
                limit: model.nu(),
            });
        }
        let mut coords = Array1::zeros(model.dim());
        coords[model.n() + j] = 1.0;
        Ok(Self { coords })
    }

    pub fn l1_norm(&self) -> f64 {
        self.coords.iter().map(|v| v.abs()).sum()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

fn check_dims(model: &BisexualModel, n: usize, nu: usize) -> Result<()> {
    if n != model.n() || nu != model.nu() {
        return Err(QsoError::DimensionMismatch {
            model_n: model.n(),
            model_nu: model.nu(),
            state_n: n,
            state_nu: nu,
        });
    }
    Ok(())
}

fn check_element(model: &BisexualModel, e: &AlgebraElement) -> Result<()> {
    if e.coords.len() != model.dim() {
        return Err(QsoError::LengthMismatch {
            expected: model.dim(),
            actual: e.coords.len(),
        });
    }
    Ok(())
}

/// Apply the evolution operator to a state.
///
/// The double sum is computed directly in `O(n * nu * (n + nu))`; the
/// dimensions of interest are small.
///
/// Analytically the operator maps the product simplex to itself, but
/// one step maps the pair of coordinate sums `(sx, sy)` to
/// `(sx*sy, sx*sy)`, so any floating-point deviation from unit sums
/// doubles per step and would blow past any drift limit within a few
/// dozen iterations. The largest coordinate of each image part is
/// therefore nudged until the part sum is exactly 1. The nudge is
/// bounded by the input-validation tolerance plus accumulation
/// rounding, so the image always passes state validation and iterates
/// stay on the simplex indefinitely.
pub fn evolve(model: &BisexualModel, z: &PopulationState) -> Result<PopulationState> {
    check_dims(model, z.n(), z.nu())?;
    let (n, nu) = (model.n(), model.nu());
    let mut xp = Array1::zeros(n);
    let mut yp = Array1::zeros(nu);
    for i in 0..n {
        for j in 0..nu {
            let w = z.x()[i] * z.y()[j];
            for k in 0..n {
                xp[k] += model.p_f(i, j, k) * w;
            }
            for l in 0..nu {
                yp[l] += model.p_m(i, j, l) * w;
            }
        }
    }
    compensate_sum(&mut xp, 1.0);
    compensate_sum(&mut yp, 1.0);
    Ok(PopulationState::new_unchecked(xp, yp))
}

/// Nudge the largest coordinate until the floating-point sum equals
/// `target` exactly. The adjustment stays within a few ulps of the sum;
/// the largest coordinate is at least `target / len`, so it cannot go
/// negative.
fn compensate_sum(part: &mut Array1<f64>, target: f64) {
    for _ in 0..4 {
        let err = part.sum() - target;
        if err == 0.0 {
            return;
        }
        let idx = part
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        part[idx] -= err;
    }
}

/// The bilinear product on `R^{n+nu}` with the inheritance coefficients
/// as structure constants. Commutative; for `z` on the simplex,
/// `algebra_product(m, z, z) = evolve(m, z)`.
pub fn algebra_product(
    model: &BisexualModel,
    z: &AlgebraElement,
    t: &AlgebraElement,
) -> Result<AlgebraElement> {
    check_element(model, z)?;
    check_element(model, t)?;
    let (n, nu) = (model.n(), model.nu());
    let mut out = Array1::zeros(n + nu);
    for i in 0..n {
        for j in 0..nu {
            let w = 0.5 * (z.coords[i] * t.coords[n + j] + t.coords[i] * z.coords[n + j]);
            for k in 0..n {
                out[k] += model.p_f(i, j, k) * w;
            }
            for l in 0..nu {
                out[n + l] += model.p_m(i, j, l) * w;
            }
        }
    }
    Ok(AlgebraElement { coords: out })
}

/// The derivative of [`evolve`] at a state, with the evaluation point
/// kept alongside the matrix.
///
/// Rows and columns are ordered female-then-male. On the simplex every
/// column sums to 2.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    entries: Array2<f64>,
    at: PopulationState,
}

impl JacobianMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn at(&self) -> &PopulationState {
        &self.at
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }
}

/// Differentiate the evolution operator at `z`.
///
/// Entry `(k, i)` of the female/female block is `sum_j p_f(i,j,k) y_j`,
/// entry `(k, n+j)` is `sum_i p_f(i,j,k) x_i`; male blocks analogous.
pub fn jacobian(model: &BisexualModel, z: &PopulationState) -> Result<JacobianMatrix> {
    check_dims(model, z.n(), z.nu())?;
    let (n, nu) = (model.n(), model.nu());
    let dim = n + nu;
    let mut entries = Array2::zeros((dim, dim));
    for k in 0..n {
        for i in 0..n {
            entries[[k, i]] = (0..nu).map(|j| model.p_f(i, j, k) * z.y()[j]).sum();
        }
        for j in 0..nu {
            entries[[k, n + j]] = (0..n).map(|i| model.p_f(i, j, k) * z.x()[i]).sum();
        }
    }
    for l in 0..nu {
        for i in 0..n {
            entries[[n + l, i]] = (0..nu).map(|j| model.p_m(i, j, l) * z.y()[j]).sum();
        }
        for j in 0..nu {
            entries[[n + l, n + j]] = (0..n).map(|i| model.p_m(i, j, l) * z.x()[i]).sum();
        }
    }
    Ok(JacobianMatrix {
        entries,
        at: z.clone(),
    })
}

/// A canonical basis direction, by sex and type index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Female(usize),
    Male(usize),
}

/// Matrix of the linear map `t -> e * t` in the canonical basis, where
/// `e` is the given basis vector.
///
/// The Jacobian decomposes over these maps:
/// `jacobian(m, z) = 2 * (sum_k x_k M_f(k) + sum_l y_l M_m(l))`.
pub fn multiplication_matrix(model: &BisexualModel, basis: Basis) -> Result<Array2<f64>> {
    let (n, nu) = (model.n(), model.nu());
    let dim = n + nu;
    let mut out = Array2::zeros((dim, dim));
    match basis {
        Basis::Female(i0) => {
            if i0 >= n {
                return Err(QsoError::IndexOutOfRange {
                    index: i0,
                    limit: n,
                });
            }
            // e_f(i0) * e_f(i) = 0, so female columns stay zero.
            for j in 0..nu {
                for k in 0..n {
                    out[[k, n + j]] = 0.5 * model.p_f(i0, j, k);
                }
                for l in 0..nu {
                    out[[n + l, n + j]] = 0.5 * model.p_m(i0, j, l);
                }
            }
        }
        Basis::Male(j0) => {
            if j0 >= nu {
                return Err(QsoError::IndexOutOfRange {
                    index: j0,
                    limit: nu,
                });
            }
            for i in 0..n {
                for k in 0..n {
                    out[[k, i]] = 0.5 * model.p_f(i, j0, k);
                }
                for l in 0..nu {
                    out[[n + l, i]] = 0.5 * model.p_m(i, j0, l);
                }
            }
        }
    }
    Ok(out)
}

/// Whether `z` is a fixed point of the operator within `tol` in l1,
/// equivalently an idempotent of the algebra product.
pub fn is_idempotent(model: &BisexualModel, z: &PopulationState, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(QsoError::InvalidParameters(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let image = evolve(model, z)?;
    Ok(image.l1_distance(z) <= tol)
}
