//! Contraction bounds for the evolution operator.
//!
//! The central quantity is `zeta`, the coefficient-scatter bound on the
//! operator's l1 Lipschitz constant: the maximal total variation of the
//! offspring distributions when one parent type is exchanged, maximized
//! separately over the female and the male parent and then summed. An
//! operator with `zeta < 1` is a strict contraction.
//!
//! For strictly positive coefficients there are coarser bounds built
//! from the multiplicative dispersion ratios `mu_f` and `mu_m` (the
//! maximal coefficient ratios within each sex's table when one parent
//! type is exchanged). They measure the distance from the constant
//! operator, which maps the whole simplex to one point.

use ndarray::ArrayView2;

use crate::error::{QsoError, Result};
use crate::model::BisexualModel;

/// Tolerance for the equal-column-sum hypothesis of [`tangent_block_norm`].
const COLUMN_SUM_TOL: f64 = 1e-9;

/// One of the two maxima making up `zeta`, with the maximizing index
/// tuple when the maximum ranges over at least one pair.
///
/// For the female term the tuple is `(i1, i2, j)` (two female parent
/// types and a male parent type); for the male term `(j1, j2, i)`.
/// `None` when the corresponding sex has a single type, in which case
/// the term is 0. Ties resolve to the lexicographically smallest tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaTerm {
    pub value: f64,
    pub argmax: Option<(usize, usize, usize)>,
}

/// The scatter bound `zeta` together with its two constituent maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaBound {
    pub value: f64,
    pub female_term: ZetaTerm,
    pub male_term: ZetaTerm,
}

/// Compute the scatter bound on the Lipschitz constant.
///
/// All maxima are found by exhaustive enumeration; dimensions are small
/// and exactness wins over pruning. The per-tuple variation sums are
/// accumulated in sorted order, which makes the result exactly
/// invariant under relabeling of types.
pub fn zeta(model: &BisexualModel) -> ZetaBound {
    let (n, nu) = (model.n(), model.nu());
    let mut diffs: Vec<f64> = Vec::with_capacity(n + nu);

    let mut female = ZetaTerm {
        value: 0.0,
        argmax: None,
    };
    for i1 in 0..n {
        for i2 in (i1 + 1)..n {
            for j in 0..nu {
                diffs.clear();
                for k in 0..n {
                    diffs.push((model.p_f(i1, j, k) - model.p_f(i2, j, k)).abs());
                }
                for l in 0..nu {
                    diffs.push((model.p_m(i1, j, l) - model.p_m(i2, j, l)).abs());
                }
                let s = sorted_sum(&mut diffs);
                if s > female.value || female.argmax.is_none() {
                    female = ZetaTerm {
                        value: s,
                        argmax: Some((i1, i2, j)),
                    };
                }
            }
        }
    }

    let mut male = ZetaTerm {
        value: 0.0,
        argmax: None,
    };
    for j1 in 0..nu {
        for j2 in (j1 + 1)..nu {
            for i in 0..n {
                diffs.clear();
                for k in 0..n {
                    diffs.push((model.p_f(i, j1, k) - model.p_f(i, j2, k)).abs());
                }
                for l in 0..nu {
                    diffs.push((model.p_m(i, j1, l) - model.p_m(i, j2, l)).abs());
                }
                let s = sorted_sum(&mut diffs);
                if s > male.value || male.argmax.is_none() {
                    male = ZetaTerm {
                        value: s,
                        argmax: Some((j1, j2, i)),
                    };
                }
            }
        }
    }

    ZetaBound {
        value: female.value + male.value,
        female_term: female,
        male_term: male,
    }
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Maximal coefficient ratios across single-parent exchanges.
///
/// `mu_f` maximizes `p_f(i1,j,k) / p_f(i2,j,k)` and `p_f(i,j1,k) /
/// p_f(i,j2,k)` — the ratio of female-offspring coefficients for parent
/// pairs differing in exactly one parent of either sex — and is only
/// defined when every female coefficient is strictly positive; `mu_m`
/// is the analogous maximum over the male table. Both exchange families
/// are needed for the dispersion bound on `zeta` to hold: the scatter
/// terms compare each table across both parents. Defined values are at
/// least 1. A zero coefficient makes the ratio undefined rather than
/// infinite.
pub fn mu_ratios(model: &BisexualModel) -> (Option<f64>, Option<f64>) {
    let (n, nu) = (model.n(), model.nu());

    let female = model.tensors().female();
    let mu_f = if female.iter().all(|&v| v > 0.0) {
        let mut mu = 1.0f64;
        for k in 0..n {
            for j in 0..nu {
                for i1 in 0..n {
                    for i2 in 0..n {
                        mu = mu.max(model.p_f(i1, j, k) / model.p_f(i2, j, k));
                    }
                }
            }
            for i in 0..n {
                for j1 in 0..nu {
                    for j2 in 0..nu {
                        mu = mu.max(model.p_f(i, j1, k) / model.p_f(i, j2, k));
                    }
                }
            }
        }
        Some(mu)
    } else {
        None
    };

    let male = model.tensors().male();
    let mu_m = if male.iter().all(|&v| v > 0.0) {
        let mut mu = 1.0f64;
        for l in 0..nu {
            for j in 0..nu {
                for i1 in 0..n {
                    for i2 in 0..n {
                        mu = mu.max(model.p_m(i1, j, l) / model.p_m(i2, j, l));
                    }
                }
            }
            for i in 0..n {
                for j1 in 0..nu {
                    for j2 in 0..nu {
                        mu = mu.max(model.p_m(i, j1, l) / model.p_m(i, j2, l));
                    }
                }
            }
        }
        Some(mu)
    } else {
        None
    };

    (mu_f, mu_m)
}

/// Bound on `zeta` from the dispersion ratios, summing a term per sex:
/// `4 (mu_f - 1) / (mu_f + 1) + 4 (mu_m - 1) / (mu_m + 1)`.
///
/// `None` when either ratio is undefined.
pub fn mu_sum_bound(model: &BisexualModel) -> Option<f64> {
    let (mu_f, mu_m) = mu_ratios(model);
    Some(mu_term(mu_f?) + mu_term(mu_m?))
}

fn mu_term(mu: f64) -> f64 {
    4.0 * (mu - 1.0) / (mu + 1.0)
}

/// Three-valued verdict for criteria that are undefined when a
/// dispersion ratio is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriState {
    Yes,
    No,
    Undefined,
}

impl std::fmt::Display for TriState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TriState::Yes => write!(f, "yes"),
            TriState::No => write!(f, "no"),
            TriState::Undefined => write!(f, "undefined"),
        }
    }
}

/// Product criterion for strict contraction:
/// `7 mu_f mu_m - (mu_f + mu_m) < 9`.
pub fn mu_product_criterion(model: &BisexualModel) -> TriState {
    match mu_ratios(model) {
        (Some(mu_f), Some(mu_m)) => {
            if 7.0 * mu_f * mu_m - (mu_f + mu_m) < 9.0 {
                TriState::Yes
            } else {
                TriState::No
            }
        }
        _ => TriState::Undefined,
    }
}

/// Single-ratio bound `8 (mu - 1) / (mu + 1)` with `mu = max(mu_f, mu_m)`,
/// and the verdict of the criterion `mu < 9/7`.
pub fn mu_max_bound(model: &BisexualModel) -> (Option<f64>, TriState) {
    match mu_ratios(model) {
        (Some(mu_f), Some(mu_m)) => {
            let mu = mu_f.max(mu_m);
            let verdict = if mu < 9.0 / 7.0 {
                TriState::Yes
            } else {
                TriState::No
            };
            (Some(8.0 * (mu - 1.0) / (mu + 1.0)), verdict)
        }
        _ => (None, TriState::Undefined),
    }
}

/// l1 operator norm of a matrix restricted to zero-sum inputs.
///
/// Requires all column sums equal (within `1e-9`); the norm is then
/// `max over column pairs of half the l1 distance between the columns`,
/// attained at inputs of the form `e_{j1} - e_{j2}`.
pub fn tangent_block_norm(a: ArrayView2<'_, f64>) -> Result<f64> {
    let cols = a.ncols();
    if cols < 2 {
        return Err(QsoError::TooFewColumns { found: cols });
    }
    let mut min_sum = f64::INFINITY;
    let mut max_sum = f64::NEG_INFINITY;
    for col in a.columns() {
        let s = col.sum();
        min_sum = min_sum.min(s);
        max_sum = max_sum.max(s);
    }
    if max_sum - min_sum > COLUMN_SUM_TOL {
        return Err(QsoError::UnequalColumnSums {
            min: min_sum,
            max: max_sum,
        });
    }

    let mut best = 0.0f64;
    for j1 in 0..cols {
        for j2 in (j1 + 1)..cols {
            let diff: f64 = a
                .column(j1)
                .iter()
                .zip(a.column(j2).iter())
                .map(|(p, q)| (p - q).abs())
                .sum();
            best = best.max(0.5 * diff);
        }
    }
    Ok(best)
}

/// Everything the contraction analysis produces for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub zeta: f64,
    pub female_term: ZetaTerm,
    pub male_term: ZetaTerm,
    pub mu_f: Option<f64>,
    pub mu_m: Option<f64>,
    /// Per-sex dispersion bound on zeta; `None` when a ratio is undefined.
    pub mu_sum_bound: Option<f64>,
    /// Verdict of `7 mu_f mu_m - (mu_f + mu_m) < 9`.
    pub mu_product_criterion: TriState,
    /// `8 (mu - 1) / (mu + 1)` with `mu = max(mu_f, mu_m)`.
    pub mu_max_bound: Option<f64>,
    /// Verdict of `mu < 9/7`.
    pub mu_max_criterion: TriState,
    /// Strict contraction by the scatter bound: `zeta < 1`.
    pub strict_by_zeta: bool,
}

/// Run the full contraction analysis.
pub fn analyze(model: &BisexualModel) -> ContractionReport {
    let bound = zeta(model);
    let (mu_f, mu_m) = mu_ratios(model);
    let (max_bound, max_verdict) = mu_max_bound(model);
    ContractionReport {
        zeta: bound.value,
        female_term: bound.female_term,
        male_term: bound.male_term,
        mu_f,
        mu_m,
        mu_sum_bound: mu_sum_bound(model),
        mu_product_criterion: mu_product_criterion(model),
        mu_max_bound: max_bound,
        mu_max_criterion: max_verdict,
        strict_by_zeta: bound.value < 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::builtin_model;
    use ndarray::{arr2, arr3, Array2, Array3};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn uniform(n: usize, nu: usize) -> BisexualModel {
        BisexualModel::new(
            Array3::from_elem((n, nu, n), 1.0 / n as f64),
            Array3::from_elem((n, nu, nu), 1.0 / nu as f64),
        )
        .unwrap()
    }

    /// Both ratios equal 2: rows are (2/3, 1/3) against (1/3, 2/3).
    fn mu_two_model() -> BisexualModel {
        let hi = 2.0 / 3.0;
        let lo = 1.0 / 3.0;
        let f = arr3(&[[[hi, lo], [hi, lo]], [[lo, hi], [hi, lo]]]);
        let m = arr3(&[[[hi, lo], [lo, hi]], [[hi, lo], [hi, lo]]]);
        BisexualModel::new(f, m).unwrap()
    }

    #[test]
    fn zeta_of_example1() {
        let bound = zeta(&builtin_model("example1").unwrap());
        assert!((bound.value - 4.0 / 7.0).abs() <= 1e-12);
        assert!((bound.female_term.value - 2.0 / 7.0).abs() <= 1e-12);
        assert!((bound.male_term.value - 2.0 / 7.0).abs() <= 1e-12);
        assert_eq!(bound.female_term.argmax, Some((0, 1, 0)));
        assert_eq!(bound.male_term.argmax, Some((0, 1, 0)));
    }

    #[test]
    fn zeta_of_example2() {
        // Frozen from exhaustive enumeration over the 0/1 tensors.
        let bound = zeta(&builtin_model("example2").unwrap());
        assert_eq!(bound.female_term.value, 2.0);
        assert_eq!(bound.male_term.value, 2.0);
        assert_eq!(bound.value, 4.0);
    }

    #[test]
    fn zeta_of_example3() {
        let bound = zeta(&builtin_model("example3").unwrap());
        assert!((bound.value - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn zeta_of_uniform_model_vanishes() {
        let bound = zeta(&uniform(3, 2));
        assert_eq!(bound.value, 0.0);
        assert_eq!(bound.female_term.argmax, Some((0, 1, 0)));
    }

    #[test]
    fn zeta_with_single_type_per_sex() {
        let model = uniform(1, 1);
        let bound = zeta(&model);
        assert_eq!(bound.value, 0.0);
        assert_eq!(bound.female_term.argmax, None);
        assert_eq!(bound.male_term.argmax, None);
    }

    #[test]
    fn mu_of_example1_is_seven_sixths() {
        // Frozen from brute-force enumeration of all ratio quadruples.
        let (mu_f, mu_m) = mu_ratios(&builtin_model("example1").unwrap());
        assert!((mu_f.unwrap() - 7.0 / 6.0).abs() <= 1e-12);
        assert!((mu_m.unwrap() - 7.0 / 6.0).abs() <= 1e-12);
    }

    #[test]
    fn mu_of_uniform_model_is_one() {
        assert_eq!(mu_ratios(&uniform(2, 2)), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn mu_undefined_with_zero_coefficients() {
        assert_eq!(mu_ratios(&builtin_model("example2").unwrap()), (None, None));
        assert_eq!(mu_ratios(&builtin_model("example3").unwrap()), (None, None));
    }

    #[test]
    fn mu_sum_bound_of_example1() {
        let b = mu_sum_bound(&builtin_model("example1").unwrap()).unwrap();
        assert!((b - 8.0 / 13.0).abs() <= 1e-12);
        // zeta <= bound
        assert!(zeta(&builtin_model("example1").unwrap()).value <= b + 1e-12);
    }

    #[test]
    fn mu_sum_bound_edge_cases() {
        assert_eq!(mu_sum_bound(&uniform(2, 3)), Some(0.0));
        assert_eq!(mu_sum_bound(&builtin_model("example2").unwrap()), None);
    }

    #[test]
    fn product_criterion_verdicts() {
        assert_eq!(
            mu_product_criterion(&builtin_model("example1").unwrap()),
            TriState::Yes
        );
        assert_eq!(mu_product_criterion(&uniform(2, 2)), TriState::Yes);
        assert_eq!(mu_product_criterion(&mu_two_model()), TriState::No);
        assert_eq!(
            mu_product_criterion(&builtin_model("example3").unwrap()),
            TriState::Undefined
        );
    }

    #[test]
    fn max_bound_verdicts() {
        let (b, v) = mu_max_bound(&builtin_model("example1").unwrap());
        assert!((b.unwrap() - 8.0 / 13.0).abs() <= 1e-12);
        assert_eq!(v, TriState::Yes);

        let (b, v) = mu_max_bound(&uniform(3, 3));
        assert_eq!(b.unwrap(), 0.0);
        assert_eq!(v, TriState::Yes);

        let (b, v) = mu_max_bound(&mu_two_model());
        assert!((b.unwrap() - 8.0 / 3.0).abs() <= 1e-12);
        assert_eq!(v, TriState::No);
    }

    #[test]
    fn tangent_norm_of_identity() {
        let a: Array2<f64> = Array2::eye(2);
        assert_eq!(tangent_block_norm(a.view()).unwrap(), 1.0);
    }

    #[test]
    fn tangent_norm_of_identical_columns() {
        let a = arr2(&[[0.3, 0.3], [0.7, 0.7], [1.1, 1.1]]);
        assert_eq!(tangent_block_norm(a.view()).unwrap(), 0.0);
    }

    #[test]
    fn tangent_norm_rejects_bad_inputs() {
        let a = arr2(&[[1.0], [2.0]]);
        assert!(matches!(
            tangent_block_norm(a.view()),
            Err(QsoError::TooFewColumns { found: 1 })
        ));
        let a = arr2(&[[1.0, 0.0], [0.0, 0.5]]);
        assert!(matches!(
            tangent_block_norm(a.view()),
            Err(QsoError::UnequalColumnSums { .. })
        ));
    }

    #[test]
    fn tangent_norm_dominates_sampled_rayleigh_ratios() {
        let mut rng = StdRng::seed_from_u64(29);
        // Random 4x4 matrix, columns shifted to a common sum.
        let mut a = Array2::zeros((4, 4));
        for v in a.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        for mut col in a.columns_mut() {
            let s = col.sum();
            let shift = (1.0 - s) / 4.0;
            col.iter_mut().for_each(|v| *v += shift);
        }
        let norm = tangent_block_norm(a.view()).unwrap();

        let mut sampled_max = 0.0f64;
        for _ in 0..100_000 {
            let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = v.iter().sum::<f64>() / 4.0;
            v.iter_mut().for_each(|e| *e -= mean);
            let vnorm: f64 = v.iter().map(|e| e.abs()).sum();
            if vnorm <= 1e-12 {
                continue;
            }
            let mut image = [0.0f64; 4];
            for (r, img) in image.iter_mut().enumerate() {
                *img = (0..4).map(|c| a[[r, c]] * v[c]).sum();
            }
            let inorm: f64 = image.iter().map(|e| e.abs()).sum();
            sampled_max = sampled_max.max(inorm / vnorm);
        }
        assert!(
            norm + 1e-6 >= sampled_max,
            "norm {norm} < sampled {sampled_max}"
        );

        // The supremum is attained exactly at a column-pair difference.
        let mut pair_max = 0.0f64;
        for j1 in 0..4 {
            for j2 in (j1 + 1)..4 {
                let mut image = [0.0f64; 4];
                for (r, img) in image.iter_mut().enumerate() {
                    *img = a[[r, j1]] - a[[r, j2]];
                }
                let inorm: f64 = image.iter().map(|e| e.abs()).sum();
                pair_max = pair_max.max(inorm / 2.0);
            }
        }
        assert!((pair_max - norm).abs() <= 1e-15);
    }

    #[test]
    fn zeta_is_invariant_under_type_relabeling() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..20 {
            let (n, nu) = (3, 2);
            let mut f = Array3::zeros((n, nu, n));
            let mut m = Array3::zeros((n, nu, nu));
            for i in 0..n {
                for j in 0..nu {
                    let row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
                    let s: f64 = row.iter().sum();
                    for k in 0..n {
                        f[[i, j, k]] = row[k] / s;
                    }
                    let row: Vec<f64> = (0..nu).map(|_| rng.gen_range(0.01..1.0)).collect();
                    let s: f64 = row.iter().sum();
                    for l in 0..nu {
                        m[[i, j, l]] = row[l] / s;
                    }
                }
            }
            let model = BisexualModel::new(f.clone(), m.clone()).unwrap();

            // Relabel female types with the cycle 0->1->2->0 (applied to
            // both the parent index i and the offspring index k).
            let perm = [1usize, 2, 0];
            let mut fp = Array3::zeros((n, nu, n));
            let mut mp = Array3::zeros((n, nu, nu));
            for i in 0..n {
                for j in 0..nu {
                    for k in 0..n {
                        fp[[perm[i], j, perm[k]]] = f[[i, j, k]];
                    }
                    for l in 0..nu {
                        mp[[perm[i], j, l]] = m[[i, j, l]];
                    }
                }
            }
            let relabeled = BisexualModel::new(fp, mp).unwrap();
            assert_eq!(zeta(&model).value, zeta(&relabeled).value);

            // Relabel male types by swapping 0 and 1.
            let mut fq = Array3::zeros((n, nu, n));
            let mut mq = Array3::zeros((n, nu, nu));
            for i in 0..n {
                for j in 0..nu {
                    for k in 0..n {
                        fq[[i, 1 - j, k]] = f[[i, j, k]];
                    }
                    for l in 0..nu {
                        mq[[i, 1 - j, 1 - l]] = m[[i, j, l]];
                    }
                }
            }
            let relabeled = BisexualModel::new(fq, mq).unwrap();
            assert_eq!(zeta(&model).value, zeta(&relabeled).value);
        }
    }

    #[test]
    fn zeta_vanishes_iff_coefficients_ignore_parents() {
        // Constant-operator direction: rows independent of (i, j).
        let rows_f = [0.2, 0.5, 0.3];
        let rows_m = [0.6, 0.4];
        let mut f = Array3::zeros((3, 2, 3));
        let mut m = Array3::zeros((3, 2, 2));
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..3 {
                    f[[i, j, k]] = rows_f[k];
                }
                for l in 0..2 {
                    m[[i, j, l]] = rows_m[l];
                }
            }
        }
        let constant = BisexualModel::new(f.clone(), m.clone()).unwrap();
        assert_eq!(zeta(&constant).value, 0.0);

        // Perturbing any single row makes zeta positive.
        f[[1, 0, 0]] = 0.25;
        f[[1, 0, 1]] = 0.45;
        let perturbed = BisexualModel::new(f, m).unwrap();
        assert!(zeta(&perturbed).value > 0.0);
    }

    #[test]
    fn analyze_example1() {
        let report = analyze(&builtin_model("example1").unwrap());
        assert!((report.zeta - 4.0 / 7.0).abs() <= 1e-12);
        assert!((report.mu_f.unwrap() - 7.0 / 6.0).abs() <= 1e-12);
        assert!((report.mu_sum_bound.unwrap() - 8.0 / 13.0).abs() <= 1e-12);
        assert_eq!(report.mu_product_criterion, TriState::Yes);
        assert_eq!(report.mu_max_criterion, TriState::Yes);
        assert!(report.strict_by_zeta);
        assert_eq!(
            report.zeta,
            report.female_term.value + report.male_term.value
        );
    }

    #[test]
    fn analyze_example3() {
        let report = analyze(&builtin_model("example3").unwrap());
        assert!((report.zeta - 2.0).abs() <= 1e-12);
        assert!(!report.strict_by_zeta);
        assert_eq!(report.mu_f, None);
        assert_eq!(report.mu_m, None);
        assert_eq!(report.mu_sum_bound, None);
        assert_eq!(report.mu_product_criterion, TriState::Undefined);
    }

    #[test]
    fn analyze_uniform_model() {
        let report = analyze(&uniform(2, 2));
        assert_eq!(report.zeta, 0.0);
        assert_eq!(report.mu_sum_bound, Some(0.0));
        assert_eq!(report.mu_max_bound, Some(0.0));
        assert_eq!(report.mu_product_criterion, TriState::Yes);
        assert_eq!(report.mu_max_criterion, TriState::Yes);
        assert!(report.strict_by_zeta);
    }
}
