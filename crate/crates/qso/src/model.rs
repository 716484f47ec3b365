//! Population model: inheritance tensors, states on the product simplex,
//! and the line-oriented model-file format.
//!
//! A bisexual population with `n` female and `nu` male types is described
//! by two coefficient tensors: `female[i][j][k]` is the probability that
//! the parent pair (female type `i`, male type `j`) produces a female
//! offspring of type `k`, and `male[i][j][l]` the analogous probability
//! for a male offspring of type `l`. Every row of each tensor is a
//! probability distribution over offspring types.
//!
//! All indices are 0-based.

use ndarray::{Array1, Array3};

use crate::error::{QsoError, Result, Sex};

/// Tolerance for simplex membership and row-sum checks.
///
/// Tight enough to catch modeling errors, loose enough to accept
/// probabilities that went through a decimal round trip.
pub const TAU_VALID: f64 = 1e-9;

/// The inheritance coefficient tensors of a bisexual population.
///
/// `female` has shape `(n, nu, n)` indexed `[i, j, k]`, `male` has shape
/// `(n, nu, nu)` indexed `[i, j, l]`. Rows (the last axis) are
/// probability distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct InheritanceTensors {
    female: Array3<f64>,
    male: Array3<f64>,
}

impl InheritanceTensors {
    pub fn female(&self) -> &Array3<f64> {
        &self.female
    }

    pub fn male(&self) -> &Array3<f64> {
        &self.male
    }
}

/// A validated population model: dimensions plus inheritance tensors.
///
/// Immutable after construction; all evaluation code can rely on the
/// row-sum and nonnegativity invariants established by [`BisexualModel::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct BisexualModel {
    n: usize,
    nu: usize,
    tensors: InheritanceTensors,
}

impl BisexualModel {
    /// Validate raw coefficient tensors and build a model.
    ///
    /// Accepts the tensors iff every entry is nonnegative and every row
    /// sums to 1 within [`TAU_VALID`]. Rows are taken at face value and
    /// never renormalized: silent repair would hide input bugs.
    pub fn new(female: Array3<f64>, male: Array3<f64>) -> Result<Self> {
        let (n, nu, fk) = female.dim();
        if n == 0 || nu == 0 {
            return Err(QsoError::ShapeMismatch(format!(
                "need at least one type per sex, got n={n}, nu={nu}"
            )));
        }
        if fk != n {
            return Err(QsoError::ShapeMismatch(format!(
                "female tensor is {n}x{nu}x{fk}, offspring axis must have length n={n}"
            )));
        }
        let (mn, mnu, ml) = male.dim();
        if mn != n || mnu != nu || ml != nu {
            return Err(QsoError::ShapeMismatch(format!(
                "male tensor is {mn}x{mnu}x{ml}, expected {n}x{nu}x{nu}"
            )));
        }

        for i in 0..n {
            for j in 0..nu {
                check_row(
                    Sex::Female,
                    i,
                    j,
                    female.slice(ndarray::s![i, j, ..]).iter().copied(),
                )?;
                check_row(
                    Sex::Male,
                    i,
                    j,
                    male.slice(ndarray::s![i, j, ..]).iter().copied(),
                )?;
            }
        }

        Ok(Self {
            n,
            nu,
            tensors: InheritanceTensors { female, male },
        })
    }

    /// Number of female types.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of male types.
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Dimension of the population, `n + nu`.
    pub fn dim(&self) -> usize {
        self.n + self.nu
    }

    /// Female inheritance coefficient for parent pair `(i, j)`, offspring type `k`.
    #[inline]
    pub fn p_f(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tensors.female[[i, j, k]]
    }

    /// Male inheritance coefficient for parent pair `(i, j)`, offspring type `l`.
    #[inline]
    pub fn p_m(&self, i: usize, j: usize, l: usize) -> f64 {
        self.tensors.male[[i, j, l]]
    }

    pub fn tensors(&self) -> &InheritanceTensors {
        &self.tensors
    }
}

fn check_row(sex: Sex, i: usize, j: usize, row: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for (idx, v) in row.enumerate() {
        if v.is_nan() || v < 0.0 {
            return Err(QsoError::NegativeCoefficient {
                sex,
                i,
                j,
                offspring: idx,
                value: v,
            });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > TAU_VALID {
        return Err(QsoError::RowSumViolation { sex, i, j, sum });
    }
    Ok(())
}

/// A point `z = (x, y)` on the product simplex: `x` is the female type
/// distribution, `y` the male one.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    x: Array1<f64>,
    y: Array1<f64>,
}

impl PopulationState {
    /// Validate raw distributions and build a state.
    ///
    /// Accepts iff all entries are nonnegative and each part sums to 1
    /// within [`TAU_VALID`]. An empty part fails the sum check.
    pub fn new(x: Array1<f64>, y: Array1<f64>) -> Result<Self> {
        validate_part(Sex::Female, &x)?;
        validate_part(Sex::Male, &y)?;
        Ok(Self { x, y })
    }

    /// Construct without validation. Reserved for results of operations
    /// that preserve the simplex analytically.
    pub(crate) fn new_unchecked(x: Array1<f64>, y: Array1<f64>) -> Self {
        Self { x, y }
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Result<Self> {
        Self::new(Array1::from(x.to_vec()), Array1::from(y.to_vec()))
    }

    pub fn x(&self) -> &Array1<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn nu(&self) -> usize {
        self.y.len()
    }

    /// Concatenated coordinates `(x_1..x_n, y_1..y_nu)`.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    /// l1 distance to another state of the same dimensions.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.x
            .iter()
            .zip(other.x.iter())
            .chain(self.y.iter().zip(other.y.iter()))
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

fn validate_part(sex: Sex, part: &Array1<f64>) -> Result<()> {
    for (index, &v) in part.iter().enumerate() {
        if v.is_nan() || v < 0.0 {
            return Err(QsoError::NegativeEntry {
                sex,
                index,
                value: v,
            });
        }
    }
    let sum: f64 = part.sum();
    if (sum - 1.0).abs() > TAU_VALID {
        return Err(QsoError::SumViolation { sex, sum });
    }
    Ok(())
}

/// A tangent vector to the product simplex: a pair of zero-sum vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    u: Array1<f64>,
    w: Array1<f64>,
}

impl TangentVector {
    /// Accepts iff both parts sum to 0 within [`TAU_VALID`].
    pub fn new(u: Array1<f64>, w: Array1<f64>) -> Result<Self> {
        for (sex, part) in [(Sex::Female, &u), (Sex::Male, &w)] {
            let sum: f64 = part.sum();
            if sum.abs() > TAU_VALID {
                return Err(QsoError::TangentSumViolation { sex, sum });
            }
        }
        Ok(Self { u, w })
    }

    pub fn u(&self) -> &Array1<f64> {
        &self.u
    }

    pub fn w(&self) -> &Array1<f64> {
        &self.w
    }
}

/// Location of a point relative to the two hyperplane sections that can
/// contain fixed points of the evolution operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locus {
    /// Both parts sum to 1 (the section containing the simplex).
    R1,
    /// Both parts sum to 0 (the tangent space).
    R0,
    Neither,
}

/// Classify a raw vector of length `n + nu` by its part sums.
pub fn fixed_point_locus(n: usize, nu: usize, z: &[f64]) -> Result<Locus> {
    if z.len() != n + nu {
        return Err(QsoError::LengthMismatch {
            expected: n + nu,
            actual: z.len(),
        });
    }
    let sx: f64 = z[..n].iter().sum();
    let sy: f64 = z[n..].iter().sum();
    if (sx - 1.0).abs() <= TAU_VALID && (sy - 1.0).abs() <= TAU_VALID {
        Ok(Locus::R1)
    } else if sx.abs() <= TAU_VALID && sy.abs() <= TAU_VALID {
        Ok(Locus::R0)
    } else {
        Ok(Locus::Neither)
    }
}

/// Parse the line-oriented model-file format.
///
/// ```text
/// # comment
/// dims <n> <nu>
/// f <i> <j> <p_1> ... <p_n>     one line per parent pair
/// m <i> <j> <p_1> ... <p_nu>    one line per parent pair
/// ```
///
/// Indices are 0-based, probabilities are decimal literals, row order
/// within each block is free, duplicates are an error.
pub fn parse_model(text: &str) -> Result<BisexualModel> {
    let mut dims: Option<(usize, usize)> = None;
    let mut female: Option<Array3<f64>> = None;
    let mut male: Option<Array3<f64>> = None;
    let mut seen_f: Vec<bool> = Vec::new();
    let mut seen_m: Vec<bool> = Vec::new();
    let mut line_count = 0usize;

    let syntax = |line: usize, message: String| QsoError::Syntax { line, message };

    for (zero_based, raw) in text.lines().enumerate() {
        let line_no = zero_based + 1;
        line_count = line_no;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = content.split_whitespace();
        let Some(head) = tokens.next() else { continue };

        match head {
            "dims" => {
                if dims.is_some() {
                    return Err(syntax(line_no, "duplicate dims line".into()));
                }
                let n = parse_index(tokens.next(), line_no, "n")?;
                let nu = parse_index(tokens.next(), line_no, "nu")?;
                if tokens.next().is_some() {
                    return Err(syntax(line_no, "trailing tokens after dims".into()));
                }
                if n == 0 || nu == 0 {
                    return Err(syntax(line_no, "dims must be at least 1".into()));
                }
                female = Some(Array3::zeros((n, nu, n)));
                male = Some(Array3::zeros((n, nu, nu)));
                seen_f = vec![false; n * nu];
                seen_m = vec![false; n * nu];
                dims = Some((n, nu));
            }
            "f" | "m" => {
                let Some((n, nu)) = dims else {
                    return Err(syntax(line_no, "dims line must come first".into()));
                };
                let i = parse_index(tokens.next(), line_no, "i")?;
                let j = parse_index(tokens.next(), line_no, "j")?;
                if i >= n || j >= nu {
                    return Err(syntax(
                        line_no,
                        format!("parent pair ({i},{j}) out of range for dims {n} {nu}"),
                    ));
                }
                let (row_len, tensor, seen) = if head == "f" {
                    (n, female.as_mut().unwrap(), &mut seen_f)
                } else {
                    (nu, male.as_mut().unwrap(), &mut seen_m)
                };
                if seen[i * nu + j] {
                    return Err(syntax(
                        line_no,
                        format!("duplicate {head} row for parent pair ({i},{j})"),
                    ));
                }
                seen[i * nu + j] = true;
                for k in 0..row_len {
                    let tok = tokens.next().ok_or_else(|| {
                        syntax(
                            line_no,
                            format!("expected {row_len} probabilities, got {k}"),
                        )
                    })?;
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| syntax(line_no, format!("invalid probability `{tok}`")))?;
                    tensor[[i, j, k]] = v;
                }
                if tokens.next().is_some() {
                    return Err(syntax(
                        line_no,
                        format!("expected exactly {row_len} probabilities"),
                    ));
                }
            }
            other => {
                return Err(syntax(line_no, format!("unexpected token `{other}`")));
            }
        }
    }

    let Some((n, nu)) = dims else {
        return Err(syntax(line_count.max(1), "missing dims line".into()));
    };
    for i in 0..n {
        for j in 0..nu {
            if !seen_f[i * nu + j] {
                return Err(syntax(
                    line_count,
                    format!("missing f row for pair ({i},{j})"),
                ));
            }
            if !seen_m[i * nu + j] {
                return Err(syntax(
                    line_count,
                    format!("missing m row for pair ({i},{j})"),
                ));
            }
        }
    }

    BisexualModel::new(female.unwrap(), male.unwrap())
}

/// Render a model in the file format accepted by [`parse_model`].
///
/// Probabilities are printed with shortest round-trip formatting, so
/// `parse_model(serialize_model(m))` reproduces `m` entry-wise.
pub fn serialize_model(model: &BisexualModel) -> String {
    let (n, nu) = (model.n(), model.nu());
    let mut out = String::new();
    out.push_str(&format!("dims {n} {nu}\n"));
    for i in 0..n {
        for j in 0..nu {
            out.push_str(&format!("f {i} {j}"));
            for k in 0..n {
                out.push_str(&format!(" {}", model.p_f(i, j, k)));
            }
            out.push('\n');
        }
    }
    for i in 0..n {
        for j in 0..nu {
            out.push_str(&format!("m {i} {j}"));
            for l in 0..nu {
                out.push_str(&format!(" {}", model.p_m(i, j, l)));
            }
            out.push('\n');
        }
    }
    out
}

fn parse_index(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = token.ok_or_else(|| QsoError::Syntax {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| QsoError::Syntax {
        line,
        message: format!("invalid {what} `{tok}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr3;

    fn example1_tensors() -> (Array3<f64>, Array3<f64>) {
        let f = arr3(&[
            [[3.0 / 7.0, 4.0 / 7.0], [0.5, 0.5]],
            [[0.5, 0.5], [4.0 / 7.0, 3.0 / 7.0]],
        ]);
        let m = arr3(&[
            [[4.0 / 7.0, 3.0 / 7.0], [0.5, 0.5]],
            [[0.5, 0.5], [3.0 / 7.0, 4.0 / 7.0]],
        ]);
        (f, m)
    }

    fn uniform_tensors(n: usize, nu: usize) -> (Array3<f64>, Array3<f64>) {
        (
            Array3::from_elem((n, nu, n), 1.0 / n as f64),
            Array3::from_elem((n, nu, nu), 1.0 / nu as f64),
        )
    }

    #[test]
    fn example1_coefficients_validate() {
        let (f, m) = example1_tensors();
        let model = BisexualModel::new(f, m).unwrap();
        assert_eq!(model.n(), 2);
        assert_eq!(model.nu(), 2);
        assert_eq!(model.p_f(0, 0, 0), 3.0 / 7.0);
    }

    #[test]
    fn uniform_tensors_validate() {
        let (f, m) = uniform_tensors(3, 2);
        assert!(BisexualModel::new(f, m).is_ok());
    }

    #[test]
    fn bad_row_sum_is_rejected() {
        let (mut f, m) = example1_tensors();
        f[[0, 0, 0]] = 0.5;
        f[[0, 0, 1]] = 0.6;
        match BisexualModel::new(f, m) {
            Err(QsoError::RowSumViolation {
                sex: Sex::Female,
                i: 0,
                j: 0,
                sum,
            }) => {
                assert!((sum - 1.1).abs() < 1e-12)
            }
            other => panic!("expected RowSumViolation, got {other:?}"),
        }
    }

    #[test]
    fn negative_coefficient_is_rejected() {
        let (mut f, m) = example1_tensors();
        f[[1, 0, 0]] = -0.25;
        f[[1, 0, 1]] = 1.25;
        assert!(matches!(
            BisexualModel::new(f, m),
            Err(QsoError::NegativeCoefficient {
                sex: Sex::Female,
                i: 1,
                j: 0,
                ..
            })
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let f = Array3::from_elem((2, 2, 3), 1.0 / 3.0);
        let m = Array3::from_elem((2, 2, 2), 0.5);
        assert!(matches!(
            BisexualModel::new(f, m),
            Err(QsoError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn row_sum_boundary_is_sharp() {
        // Largest representable deviation not exceeding TAU_VALID:
        // 4503599 ulps of 1.0. One more ulp crosses the threshold.
        let below = 4503599.0 * f64::EPSILON;
        let above = 1.01e-9;

        let build = |extra: f64| {
            let mut f = Array3::zeros((1, 1, 1));
            f[[0, 0, 0]] = 1.0 + extra;
            let m = Array3::from_elem((1, 1, 1), 1.0);
            BisexualModel::new(f, m)
        };
        assert!(build(below).is_ok(), "deviation {below:e} must be accepted");
        assert!(matches!(
            build(above),
            Err(QsoError::RowSumViolation { .. })
        ));
    }

    #[test]
    fn state_validation() {
        assert!(PopulationState::from_slices(&[0.5, 0.5], &[0.5, 0.5]).is_ok());
        assert!(PopulationState::from_slices(&[0.0, 1.0], &[0.5, 0.5]).is_ok());
        match PopulationState::from_slices(&[1.0, 0.0], &[0.3, 0.8]) {
            Err(QsoError::SumViolation {
                sex: Sex::Male,
                sum,
            }) => {
                assert!((sum - 1.1).abs() < 1e-12)
            }
            other => panic!("expected SumViolation, got {other:?}"),
        }
        assert!(matches!(
            PopulationState::from_slices(&[1.2, -0.2], &[0.5, 0.5]),
            Err(QsoError::NegativeEntry {
                sex: Sex::Female,
                index: 1,
                ..
            })
        ));
    }

    #[test]
    fn tangent_vector_requires_zero_sums() {
        let ok = TangentVector::new(
            Array1::from(vec![0.25, -0.25]),
            Array1::from(vec![0.0, 0.0]),
        );
        assert!(ok.is_ok());
        assert!(matches!(
            TangentVector::new(Array1::from(vec![0.25, 0.25]), Array1::from(vec![0.0, 0.0])),
            Err(QsoError::TangentSumViolation {
                sex: Sex::Female,
                ..
            })
        ));
    }

    #[test]
    fn locus_classification() {
        assert_eq!(
            fixed_point_locus(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap(),
            Locus::R1
        );
        assert_eq!(
            fixed_point_locus(2, 2, &[0.1, -0.1, 0.2, -0.2]).unwrap(),
            Locus::R0
        );
        assert_eq!(
            fixed_point_locus(2, 2, &[1.0, 0.0, 0.5, 0.0]).unwrap(),
            Locus::Neither
        );
        assert!(matches!(
            fixed_point_locus(2, 2, &[1.0, 0.0, 0.5]),
            Err(QsoError::LengthMismatch {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn every_valid_state_lies_in_r1() {
        let z = PopulationState::from_slices(&[0.2, 0.3, 0.5], &[0.9, 0.1]).unwrap();
        assert_eq!(fixed_point_locus(3, 2, &z.coords()).unwrap(), Locus::R1);
    }

    #[test]
    fn parse_rejects_empty_input() {
        assert!(matches!(parse_model(""), Err(QsoError::Syntax { .. })));
    }

    #[test]
    fn parse_rejects_duplicates_and_bad_rows() {
        let text = "dims 1 1\nf 0 0 1.0\nf 0 0 1.0\nm 0 0 1.0\n";
        match parse_model(text) {
            Err(QsoError::Syntax { line: 3, message }) => {
                assert!(message.contains("duplicate"), "{message}")
            }
            other => panic!("expected duplicate-row error, got {other:?}"),
        }

        let text = "dims 1 1\nf 0 0 0.5 0.5\nm 0 0 1.0\n";
        assert!(matches!(
            parse_model(text),
            Err(QsoError::Syntax { line: 2, .. })
        ));

        let text = "dims 1 1\nf 0 0 1.0\n";
        assert!(matches!(parse_model(text), Err(QsoError::Syntax { .. })));
    }

    #[test]
    fn parse_accepts_comments_and_free_row_order() {
        let text = "\
# tiny model
dims 1 2
m 0 1 0.25 0.75   # male row first is fine
f 0 1 1.0
f 0 0 1.0
m 0 0 1.0 0.0
";
        let model = parse_model(text).unwrap();
        assert_eq!((model.n(), model.nu()), (1, 2));
        assert_eq!(model.p_m(0, 1, 1), 0.75);
    }

    #[test]
    fn serialize_round_trips_example1() {
        let (f, m) = example1_tensors();
        let model = BisexualModel::new(f, m).unwrap();
        let reparsed = parse_model(&serialize_model(&model)).unwrap();
        assert_eq!(model, reparsed);
    }

    #[test]
    fn parse_dense_2x3_model() {
        let (f, m) = uniform_tensors(2, 3);
        let model = BisexualModel::new(f, m).unwrap();
        let reparsed = parse_model(&serialize_model(&model)).unwrap();
        assert_eq!((reparsed.n(), reparsed.nu()), (2, 3));
        assert_eq!(model, reparsed);
    }

    #[test]
    fn serialized_uniform_2x2_has_four_rows_per_sex() {
        let (f, m) = uniform_tensors(2, 2);
        let text = serialize_model(&BisexualModel::new(f, m).unwrap());
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("m ")).count(), 4);
    }
}
