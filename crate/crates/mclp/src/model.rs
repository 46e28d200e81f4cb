/*!
Problem data, boundary parameters, the parametric line L(θ), and
validation: non-degeneracy of (A, b, c), sign conventions on (λ, μ, T),
optional perturbation, and the finite feasibility tests for the M-CLP /
M-CLP* pair.
*/

use crate::exact::{rat, rank, zeros, RatMatrix, RatVector, Rational};
use crate::lpcore::{solve_lp, LpInstance, LpStatus, Relation, Sense, SignClass};
use num::Signed;
use thiserror::Error;

/// The constant problem data: A (K×J), state slope vector b, dual slope
/// vector c. Dimensions are validated at construction; non-degeneracy is
/// checked separately by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemData {
    pub k: usize,
    pub j: usize,
    pub a: RatMatrix,
    pub b: RatVector,
    pub c: RatVector,
}

/// Construction-time dimension error.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("dimension mismatch: {0}")]
pub struct DimensionError(pub String);

impl ProblemData {
    pub fn new(a: RatMatrix, b: RatVector, c: RatVector) -> Result<Self, DimensionError> {
        let (k, j) = (a.rows(), a.cols());
        if k == 0 || j == 0 {
            return Err(DimensionError("K and J must be positive".into()));
        }
        if b.len() != k {
            return Err(DimensionError(format!("b has length {}, want {}", b.len(), k)));
        }
        if c.len() != j {
            return Err(DimensionError(format!("c has length {}, want {}", c.len(), j)));
        }
        Ok(ProblemData { k, j, a, b, c })
    }
}

/// Boundary parameters ρ = (β, γ, T, λ, μ). This is a plain value type so
/// that parameter *differences* (line directions) are representable; the
/// sign invariants λ ≤ 0, μ ≥ 0, T > 0 are enforced by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryParams {
    pub beta: RatVector,
    pub gamma: RatVector,
    pub t: Rational,
    pub lambda: RatVector,
    pub mu: RatVector,
}

impl BoundaryParams {
    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        let v = |a: &RatVector, b: &RatVector| -> RatVector {
            a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
        };
        BoundaryParams {
            beta: v(&self.beta, &other.beta),
            gamma: v(&self.gamma, &other.gamma),
            t: f(&self.t, &other.t),
            lambda: v(&self.lambda, &other.lambda),
            mu: v(&self.mu, &other.mu),
        }
    }

    /// Componentwise difference `other - self`.
    pub fn direction_to(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| b - a)
    }
}

/// The parametric line L(θ) = (1-θ)·ρ₀ + θ·ρ₁ of boundary parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLine {
    pub start: BoundaryParams,
    pub goal: BoundaryParams,
}

impl ParamLine {
    pub fn at(&self, theta: &Rational) -> BoundaryParams {
        self.start
            .zip_with(&self.goal, |a, b| a + theta * (b - a))
    }

    /// The θ-derivative of L, a parameter difference.
    pub fn delta(&self) -> BoundaryParams {
        self.start.direction_to(&self.goal)
    }
}

/// Validation failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    /// Assumption of general position fails; names the offending columns of
    /// the augmented matrix ([A I] for b, [Aᵀ I] for c).
    #[error("degenerate data: {vector} lies in the span of columns {columns:?} of {matrix}")]
    Degeneracy {
        vector: String,
        matrix: String,
        columns: Vec<usize>,
    },
    /// A sign convention on ρ fails.
    #[error("sign violation: {0}")]
    Sign(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

fn augmented(a: &RatMatrix) -> RatMatrix {
    // [A I], K x (J+K).
    let k = a.rows();
    let j = a.cols();
    let mut m = RatMatrix::zeros(k, j + k);
    for r in 0..k {
        for c in 0..j {
            m[(r, c)] = a[(r, c)].clone();
        }
        m[(r, j + r)] = rat(1);
    }
    m
}

/// All `size`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    go(0, n, size, &mut cur, &mut out);
    out
}

/// True iff `v` lies in the span of the given columns of `m`.
fn in_span(m: &RatMatrix, cols: &[usize], v: &RatVector) -> bool {
    let nrows = m.rows();
    let sub = RatMatrix::from_columns(nrows, cols.iter().map(|&c| m.column(c)).collect());
    let mut aug_cols: Vec<RatVector> = cols.iter().map(|&c| m.column(c)).collect();
    aug_cols.push(v.clone());
    let aug = RatMatrix::from_columns(nrows, aug_cols);
    rank(&aug) == rank(&sub)
}

fn degeneracy_check(
    m: &RatMatrix,
    v: &RatVector,
    vector: &str,
    matrix: &str,
    dim: usize,
) -> Result<(), ValidationError> {
    // v must not be a combination of fewer than `dim` columns, i.e. of any
    // (dim-1)-subset (smaller subsets are contained in some such subset).
    for cols in subsets(m.cols(), dim - 1) {
        if in_span(m, &cols, v) {
            return Err(ValidationError::Degeneracy {
                vector: vector.to_string(),
                matrix: matrix.to_string(),
                columns: cols.iter().map(|c| c + 1).collect(),
            });
        }
    }
    Ok(())
}

/// Checks general position of (A, b, c) and the sign conventions of ρ.
pub fn validate(data: &ProblemData, rho: &BoundaryParams) -> Result<(), ValidationError> {
    if rho.beta.len() != data.k
        || rho.lambda.len() != data.k
        || rho.gamma.len() != data.j
        || rho.mu.len() != data.j
    {
        return Err(ValidationError::Dimension(
            "boundary parameter lengths do not match K, J".into(),
        ));
    }
    if !rho.t.is_positive() {
        return Err(ValidationError::Sign("T must be positive".into()));
    }
    for (i, l) in rho.lambda.iter().enumerate() {
        if l.is_positive() {
            return Err(ValidationError::Sign(format!(
                "lambda[{}] must be <= 0",
                i + 1
            )));
        }
    }
    for (i, m) in rho.mu.iter().enumerate() {
        if m.is_negative() {
            return Err(ValidationError::Sign(format!("mu[{}] must be >= 0", i + 1)));
        }
    }
    degeneracy_check(&augmented(&data.a), &data.b, "b", "[A I]", data.k)?;
    degeneracy_check(
        &augmented(&data.a.transpose()),
        &data.c,
        "c",
        "[A' I]",
        data.j,
    )?;
    Ok(())
}

/// Perturbation failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerturbError {
    #[error("perturbation magnitude must be positive")]
    NonPositiveEpsilon,
    #[error("perturbation failed to reach general position within the retry budget")]
    Exhausted,
}

/// Perturbs b and c by distinct powers of ε (b_k += ε^k, c_j += ε^(K+j))
/// so that the result is in general position, retrying with ε/2. The
/// perturbation magnitude never exceeds ε.
pub fn perturb(data: &ProblemData, eps: &Rational) -> Result<ProblemData, PerturbError> {
    if !eps.is_positive() {
        return Err(PerturbError::NonPositiveEpsilon);
    }
    // Sign conventions are irrelevant to the degeneracy part; use a benign ρ.
    let rho = BoundaryParams {
        beta: zeros(data.k),
        gamma: zeros(data.j),
        t: rat(1),
        lambda: zeros(data.k),
        mu: zeros(data.j),
    };
    if validate(data, &rho).is_ok() {
        return Ok(data.clone());
    }
    let mut e = eps.clone();
    for _ in 0..64 {
        let mut cand = data.clone();
        let mut pow = e.clone();
        for x in cand.b.iter_mut() {
            *x += &pow;
            pow = &pow * &e;
        }
        for x in cand.c.iter_mut() {
            *x += &pow;
            pow = &pow * &e;
        }
        if validate(&cand, &rho).is_ok() {
            return Ok(cand);
        }
        e = e / rat(2);
    }
    Err(PerturbError::Exhausted)
}

/// Joint feasibility classification of the M-CLP / M-CLP* pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    BothFeasible,
    PrimalInfeasible,
    DualInfeasible,
    BothInfeasible,
}

/// The finite Test-LP whose feasibility is equivalent to M-CLP feasibility
/// and whose unboundedness is equivalent to M-CLP unboundedness:
/// max (γ+cT+μ)'u + (γ+cT)'U  s.t.  A u ≤ β,  A u + A U ≤ β + bT + λ,
/// u, U ≥ 0.
pub fn test_lp(data: &ProblemData, rho: &BoundaryParams) -> LpInstance {
    let (k, j) = (data.k, data.j);
    let mut a = RatMatrix::zeros(2 * k, 2 * j);
    for r in 0..k {
        for c in 0..j {
            a[(r, c)] = data.a[(r, c)].clone();
            a[(k + r, c)] = data.a[(r, c)].clone();
            a[(k + r, j + c)] = data.a[(r, c)].clone();
        }
    }
    let mut rhs = rho.beta.clone();
    for r in 0..k {
        rhs.push(&rho.beta[r] + &data.b[r] * &rho.t + &rho.lambda[r]);
    }
    let gct: RatVector = (0..j)
        .map(|c| &rho.gamma[c] + &data.c[c] * &rho.t)
        .collect();
    let mut objective: RatVector = gct.iter().zip(&rho.mu).map(|(g, m)| g + m).collect();
    objective.extend(gct);
    LpInstance {
        sense: Sense::Max,
        objective,
        a,
        relations: vec![Relation::Le; 2 * k],
        rhs,
        classes: vec![SignClass::P; 2 * j],
    }
}

/// The symmetric Test-LP* whose feasibility is equivalent to M-CLP*
/// feasibility: min (β+bT+λ)'p + (β+bT)'P  s.t.  A'p ≥ γ,
/// A'(p+P) ≥ γ + cT + μ, p, P ≥ 0.
pub fn test_lp_star(data: &ProblemData, rho: &BoundaryParams) -> LpInstance {
    let (k, j) = (data.k, data.j);
    let at = data.a.transpose();
    let mut a = RatMatrix::zeros(2 * j, 2 * k);
    for r in 0..j {
        for c in 0..k {
            a[(r, c)] = at[(r, c)].clone();
            a[(j + r, c)] = at[(r, c)].clone();
            a[(j + r, k + c)] = at[(r, c)].clone();
        }
    }
    let mut rhs = rho.gamma.clone();
    for r in 0..j {
        rhs.push(&rho.gamma[r] + &data.c[r] * &rho.t + &rho.mu[r]);
    }
    let bbt: RatVector = (0..k)
        .map(|r| &rho.beta[r] + &data.b[r] * &rho.t)
        .collect();
    let mut objective: RatVector = bbt.iter().zip(&rho.lambda).map(|(b, l)| b + l).collect();
    objective.extend(bbt);
    LpInstance {
        sense: Sense::Min,
        objective,
        a,
        relations: vec![Relation::Ge; 2 * j],
        rhs,
        classes: vec![SignClass::P; 2 * k],
    }
}

/// Classifies joint feasibility of the dual pair via the finite tests.
pub fn feasibility_check(data: &ProblemData, rho: &BoundaryParams) -> Feasibility {
    let primal_ok = solve_lp(&test_lp(data, rho)).status != LpStatus::Infeasible;
    let dual_ok = solve_lp(&test_lp_star(data, rho)).status != LpStatus::Infeasible;
    match (primal_ok, dual_ok) {
        (true, true) => Feasibility::BothFeasible,
        (false, true) => Feasibility::PrimalInfeasible,
        (true, false) => Feasibility::DualInfeasible,
        (false, false) => Feasibility::BothInfeasible,
    }
}

/// The golden 2x2 data set used widely by the test suite.
#[cfg(test)]
pub fn golden_data() -> ProblemData {
    ProblemData::new(
        RatMatrix::from_i64(&[&[5, 2], &[3, 4]]),
        crate::exact::vec_i64(&[3, 1]),
        crate::exact::vec_i64(&[1, 2]),
    )
    .unwrap()
}

#[cfg(test)]
pub fn golden_goal() -> BoundaryParams {
    BoundaryParams {
        beta: crate::exact::vec_i64(&[8, 10]),
        gamma: crate::exact::vec_i64(&[5, 6]),
        t: rat(2),
        lambda: zeros(2),
        mu: zeros(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, vec_i64};

    #[test]
    fn golden_data_validates() {
        assert_eq!(validate(&golden_data(), &golden_goal()), Ok(()));
    }

    #[test]
    fn degenerate_b_is_rejected_and_named() {
        // b equal to the first column of A is a 1-column combination.
        let data = ProblemData::new(
            RatMatrix::from_i64(&[&[5, 2], &[3, 4]]),
            vec_i64(&[5, 3]),
            vec_i64(&[1, 2]),
        )
        .unwrap();
        match validate(&data, &golden_goal()) {
            Err(ValidationError::Degeneracy { vector, columns, .. }) => {
                assert_eq!(vector, "b");
                assert_eq!(columns, vec![1]);
            }
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn sign_violations_are_rejected() {
        let mut rho = golden_goal();
        rho.lambda = vec_i64(&[1, 0]);
        assert!(matches!(
            validate(&golden_data(), &rho),
            Err(ValidationError::Sign(_))
        ));
        let mut rho2 = golden_goal();
        rho2.t = rat(0);
        assert!(matches!(
            validate(&golden_data(), &rho2),
            Err(ValidationError::Sign(_))
        ));
        let mut rho3 = golden_goal();
        rho3.mu = vec_i64(&[0, -1]);
        assert!(matches!(
            validate(&golden_data(), &rho3),
            Err(ValidationError::Sign(_))
        ));
    }

    #[test]
    fn perturb_fixes_degenerate_b() {
        let data = ProblemData::new(
            RatMatrix::from_i64(&[&[5, 2], &[3, 4]]),
            vec_i64(&[5, 3]),
            vec_i64(&[1, 2]),
        )
        .unwrap();
        for eps in [frac(1, 10), frac(1, 100), frac(1, 1000)] {
            let fixed = perturb(&data, &eps).unwrap();
            let rho = BoundaryParams {
                beta: zeros(2),
                gamma: zeros(2),
                t: rat(1),
                lambda: zeros(2),
                mu: zeros(2),
            };
            assert_eq!(validate(&fixed, &rho), Ok(()));
            // Magnitude bounded by eps.
            for (orig, new) in data.b.iter().zip(&fixed.b) {
                assert!((new - orig).abs() <= eps);
            }
        }
        assert_eq!(
            perturb(&data, &rat(0)),
            Err(PerturbError::NonPositiveEpsilon)
        );
        // Already non-degenerate data comes back unchanged.
        assert_eq!(perturb(&golden_data(), &frac(1, 10)).unwrap(), golden_data());
    }

    #[test]
    fn line_is_affine() {
        let line = ParamLine {
            start: golden_goal(),
            goal: BoundaryParams {
                beta: vec_i64(&[1, 2]),
                gamma: vec_i64(&[-3, -4]),
                t: rat(5),
                lambda: vec_i64(&[-1, 0]),
                mu: vec_i64(&[2, 1]),
            },
        };
        assert_eq!(line.at(&rat(0)), line.start);
        assert_eq!(line.at(&rat(1)), line.goal);
        let th1 = frac(1, 3);
        let th2 = frac(3, 5);
        let mid = (&th1 + &th2) / rat(2);
        let lhs = line.at(&mid);
        let l1 = line.at(&th1);
        let l2 = line.at(&th2);
        let avg = l1.zip_with(&l2, |a, b| (a + b) / rat(2));
        assert_eq!(lhs, avg);
    }

    #[test]
    fn golden_problem_is_both_feasible() {
        assert_eq!(
            feasibility_check(&golden_data(), &golden_goal()),
            Feasibility::BothFeasible
        );
    }

    #[test]
    fn one_dimensional_primal_infeasible() {
        let data = ProblemData::new(
            RatMatrix::from_i64(&[&[1]]),
            vec_i64(&[1]),
            vec_i64(&[1]),
        )
        .unwrap();
        let rho = BoundaryParams {
            beta: vec_i64(&[-1]),
            gamma: vec_i64(&[-1]),
            t: rat(1),
            lambda: zeros(1),
            mu: zeros(1),
        };
        // A u <= beta = -1 with u >= 0 is impossible.
        let f = feasibility_check(&data, &rho);
        assert!(matches!(
            f,
            Feasibility::PrimalInfeasible | Feasibility::BothInfeasible
        ));
    }
}
