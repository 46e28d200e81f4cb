/*!
Top-level solver: initialization at a single-interval parameter point, the
iteration loop tracking the optimal base sequence along the parametric line
L(θ) from ρ₀ to the goal parameters, termination at θ = 1, and the restart
policy that perturbs the line when a multiple collision blocks a pivot.
*/

use crate::exact::{frac, rat, RatVector, Rational};
use crate::model::{
    feasibility_check, validate, BoundaryParams, Feasibility, ParamLine, ProblemData,
    ValidationError,
};
use crate::pivots::{
    classify_collision, mclp_pivot, BoundaryDictionary, CollisionKind, PivotError,
};
use crate::structural::{
    assemble, decompose, gradient, objectives, rhs_vector, sequence_rates, solve_structure,
    BaseSequence, HComp, SolutionH,
};
use crate::rates::RatesBasis;
use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

/// Maximum perturbed lines tried over a whole solve.
pub const MAX_RESTARTS: usize = 32;
/// Consecutive restarts that fail before their line's first pivot.
const FUTILE_RESTART_LIMIT: usize = 2;
/// Cap on numerator+denominator bits of θ̄ before giving up on restarts.
const RESTART_BIT_LIMIT: u64 = 1 << 12;
/// Directions tried per restart.
const RESTART_DIRECTIONS: usize = 8;
/// Halvings of ε per direction.
const RESTART_HALVINGS: usize = 64;

/// One record per validity region traversed.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 1-based iteration counter over the whole solve.
    pub iter: usize,
    /// 1-based index of the parametric line (increases on restart).
    pub line_index: usize,
    pub theta_l: Rational,
    /// Right endpoint of the validity region; None means unbounded.
    pub theta_bar: Option<Rational>,
    /// The sequence optimal on [θ_ℓ, θ̄].
    pub sequence: BaseSequence,
    /// Collision kind seen approaching θ̄ (None on the terminal record).
    pub v_kind: Option<CollisionKind>,
    /// Collision kind seen from the far side of θ̄.
    pub w_kind: Option<CollisionKind>,
    /// Pivot description, or "terminate" on the terminal record.
    pub pivot: String,
    /// H components shrinking to zero at θ̄.
    pub shrinking: Vec<HComp>,
    /// Primal (= dual) objective at min(θ̄, 1).
    pub objective: Rational,
    /// The boundary dictionary used by a boundary pivot, when any.
    pub dictionary: Option<BoundaryDictionary>,
    /// Ratio-test value of the entering variable (type II pivots).
    pub ratio: Option<Rational>,
}

/// Final status of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A pivot needed the recursive sub-problem procedure that this
    /// implementation does not provide, and restarts did not avoid it.
    SubproblemRequired,
}

/// Outcome of a completed solve.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub final_seq: Option<BaseSequence>,
    pub final_h: Option<SolutionH>,
    pub trace: Vec<IterationRecord>,
    pub restarts: usize,
    pub lines: usize,
}

/// Solve failure.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("supplied initial parameters violate the interior conditions: {0}")]
    BadInitial(String),
    #[error("restart budget exhausted after {restarts} restarts: {reason}")]
    RestartExhausted { reason: String, restarts: usize },
    #[error("iteration bound exceeded")]
    IterationBoundExceeded,
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// The strict interior conditions a starting point must satisfy so that
/// the single-interval solution with U = P ≡ 0 is optimal and interior:
/// β₀ > 0, γ₀ < 0, λ₀ < 0, μ₀ > 0, T₀ > 0, β₀ + bT₀ + λ₀ > 0,
/// γ₀ + cT₀ + μ₀ < 0.
pub fn interior_conditions(data: &ProblemData, rho: &BoundaryParams) -> Result<(), String> {
    if !rho.t.is_positive() {
        return Err("T0 must be positive".into());
    }
    for k in 0..data.k {
        if !rho.beta[k].is_positive() {
            return Err(format!("beta0[{}] must be positive", k + 1));
        }
        if !rho.lambda[k].is_negative() {
            return Err(format!("lambda0[{}] must be negative", k + 1));
        }
        let end = &rho.beta[k] + &data.b[k] * &rho.t + &rho.lambda[k];
        if !end.is_positive() {
            return Err(format!("beta0[{}] + b[{}] T0 + lambda0[{}] must be positive", k + 1, k + 1, k + 1));
        }
    }
    for j in 0..data.j {
        if !rho.gamma[j].is_negative() {
            return Err(format!("gamma0[{}] must be negative", j + 1));
        }
        if !rho.mu[j].is_positive() {
            return Err(format!("mu0[{}] must be positive", j + 1));
        }
        let end = &rho.gamma[j] + &data.c[j] * &rho.t + &rho.mu[j];
        if !end.is_negative() {
            return Err(format!("gamma0[{}] + c[{}] T0 + mu0[{}] must be negative", j + 1, j + 1, j + 1));
        }
    }
    Ok(())
}

/// Deterministic starting parameters satisfying the interior conditions:
/// T₀ = 1, β₀ₖ = max(β_goal,k, 2+|b_k|), γ₀ⱼ = min(γ_goal,j, −2−|c_j|),
/// λ₀ = −𝟙, μ₀ = 𝟙.
pub fn choose_initial(data: &ProblemData, rho_goal: &BoundaryParams) -> BoundaryParams {
    let beta: RatVector = (0..data.k)
        .map(|k| {
            let floor = rat(2) + data.b[k].abs();
            rho_goal.beta[k].clone().max(floor)
        })
        .collect();
    let gamma: RatVector = (0..data.j)
        .map(|j| {
            let cap = rat(-2) - data.c[j].abs();
            rho_goal.gamma[j].clone().min(cap)
        })
        .collect();
    let rho = BoundaryParams {
        beta,
        gamma,
        t: rat(1),
        lambda: vec![rat(-1); data.k],
        mu: vec![rat(1); data.j],
    };
    debug_assert!(interior_conditions(data, &rho).is_ok());
    rho
}

/// The full single-interval base sequence (all index sets full).
pub fn full_sequence(data: &ProblemData) -> BaseSequence {
    let kfull: BTreeSet<usize> = (0..data.k).collect();
    let jfull: BTreeSet<usize> = (0..data.j).collect();
    BaseSequence {
        k0: kfull.clone(),
        j0: jfull.clone(),
        bases: vec![RatesBasis {
            kset: kfull.clone(),
            jset: jfull.clone(),
        }],
        kn1: kfull,
        jn1: jfull,
    }
}

/// The optimal solution at a starting point satisfying the interior
/// conditions: one interval, all index sets full, U = P ≡ 0.
pub fn initial_solution(
    data: &ProblemData,
    rho0: &BoundaryParams,
) -> Result<(BaseSequence, SolutionH), SolveError> {
    let seq = full_sequence(data);
    let rates = sequence_rates(data, &seq).map_err(|e| SolveError::Internal(e.to_string()))?;
    let asm =
        assemble(data, &seq, &rates, rho0).map_err(|e| SolveError::Internal(e.to_string()))?;
    let h = solve_structure(&asm, &asm.r).map_err(|e| SolveError::Internal(e.to_string()))?;
    Ok((seq, h))
}

/// Combinatorial iteration bound C(4(K+J), 2(K+J)) · 2^C(K+J, K),
/// saturating in u128.
pub fn iteration_bound(k: usize, j: usize) -> u128 {
    fn binom(n: u128, r: u128) -> u128 {
        let r = r.min(n - r);
        let mut c: u128 = 1;
        for i in 1..=r {
            c = match c.checked_mul(n - r + i) {
                Some(v) => v / i,
                None => return u128::MAX,
            };
        }
        c
    }
    let s = (k + j) as u128;
    let regions = binom(4 * s, 2 * s);
    let exp = binom(s, k as u128);
    if exp >= 127 {
        return u128::MAX;
    }
    regions.saturating_mul(1u128 << exp)
}

/// FNV-1a hash of the canonical problem encoding; seeds the restart
/// direction generator deterministically.
fn problem_seed(data: &ProblemData, rho_goal: &BoundaryParams) -> u64 {
    use crate::exact::format_rational as fr;
    let mut parts: Vec<String> = vec![data.k.to_string(), data.j.to_string()];
    for r in 0..data.k {
        for c in 0..data.j {
            parts.push(fr(&data.a[(r, c)]));
        }
    }
    parts.extend(data.b.iter().map(fr));
    parts.extend(data.c.iter().map(fr));
    parts.extend(rho_goal.beta.iter().map(fr));
    parts.extend(rho_goal.gamma.iter().map(fr));
    parts.push(fr(&rho_goal.t));
    parts.extend(rho_goal.lambda.iter().map(fr));
    parts.extend(rho_goal.mu.iter().map(fr));
    let encoded = parts.join(";");
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in encoded.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Flattens the (β, γ, λ, μ) part of a parameter difference.
fn flat_direction(rho: &BoundaryParams) -> RatVector {
    let mut v = rho.beta.clone();
    v.extend(rho.gamma.iter().cloned());
    v.extend(rho.lambda.iter().cloned());
    v.extend(rho.mu.iter().cloned());
    v
}

fn apply_direction(base: &BoundaryParams, d: &[Rational], eps: &Rational) -> BoundaryParams {
    let (k, j) = (base.beta.len(), base.gamma.len());
    let at = |i: usize| eps * &d[i];
    BoundaryParams {
        beta: (0..k).map(|i| &base.beta[i] + at(i)).collect(),
        gamma: (0..j).map(|i| &base.gamma[i] + at(k + i)).collect(),
        t: base.t.clone(),
        lambda: (0..k).map(|i| &base.lambda[i] + at(k + j + i)).collect(),
        mu: (0..j).map(|i| &base.mu[i] + at(2 * k + j + i)).collect(),
    }
}

/// Builds a perturbed parametric line after a multiple collision: starts
/// from the midpoint of the failed region, moves it by ε·d for a
/// pseudo-random rational direction d orthogonal to the current line
/// direction, halving ε until the current sequence is interior (H_P > 0)
/// at the perturbed point and the sign constraints λ ≤ 0 ≤ μ still hold.
pub fn restart(
    data: &ProblemData,
    seq: &BaseSequence,
    line: &ParamLine,
    theta_l: &Rational,
    theta_bar: &Rational,
    rho_goal: &BoundaryParams,
    seed: u64,
) -> Option<ParamLine> {
    let rates = sequence_rates(data, seq).ok()?;
    let theta_mid = (theta_l + theta_bar) / rat(2);
    let rho_mid = line.at(&theta_mid);
    let delta = flat_direction(&line.delta());
    let delta_norm: Rational = delta.iter().map(|x| x * x).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = delta.len();

    for _ in 0..RESTART_DIRECTIONS {
        let mut d: RatVector = (0..dim).map(|_| rat(rng.gen_range(-8..=8))).collect();
        if !delta_norm.is_zero() {
            let dot: Rational = d.iter().zip(&delta).map(|(a, b)| a * b).sum();
            let coef = dot / &delta_norm;
            for (di, de) in d.iter_mut().zip(&delta) {
                *di -= &coef * de;
            }
        }
        if d.iter().all(Rational::is_zero) {
            continue;
        }
        let mut eps = frac(1, 2);
        for _ in 0..RESTART_HALVINGS {
            let rho = apply_direction(&rho_mid, &d, &eps);
            let signs_ok = rho.lambda.iter().all(|l| !l.is_positive())
                && rho.mu.iter().all(|m| !m.is_negative());
            if signs_ok {
                if let Ok(asm) = assemble(data, seq, &rates, &rho) {
                    if let Ok(h) = solve_structure(&asm, &asm.r) {
                        if asm.hp.iter().all(|&r| h.values[r].is_positive()) {
                            return Some(ParamLine {
                                start: rho,
                                goal: rho_goal.clone(),
                            });
                        }
                    }
                }
            }
            eps /= rat(2);
        }
    }
    None
}

/// Runs the full algorithm: feasibility check, initialization, iteration
/// along L(θ) with one M-CLP pivot per validity region, termination as
/// soon as θ_ℓ < 1 ≤ θ̄, and restarts on multiple collisions.
pub fn solve(
    data: &ProblemData,
    rho_goal: &BoundaryParams,
    rho0: Option<BoundaryParams>,
) -> Result<SolveResult, SolveError> {
    validate(data, rho_goal)?;
    match feasibility_check(data, rho_goal) {
        Feasibility::BothFeasible => {}
        Feasibility::PrimalInfeasible | Feasibility::BothInfeasible => {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                final_seq: None,
                final_h: None,
                trace: vec![],
                restarts: 0,
                lines: 0,
            });
        }
        Feasibility::DualInfeasible => {
            return Ok(SolveResult {
                status: SolveStatus::Unbounded,
                final_seq: None,
                final_h: None,
                trace: vec![],
                restarts: 0,
                lines: 0,
            });
        }
    }

    let rho0 = match rho0 {
        Some(r) => {
            interior_conditions(data, &r).map_err(SolveError::BadInitial)?;
            r
        }
        None => choose_initial(data, rho_goal),
    };
    let seed = problem_seed(data, rho_goal);
    let bound = iteration_bound(data.k, data.j);

    let mut line = ParamLine {
        start: rho0,
        goal: rho_goal.clone(),
    };
    let (mut seq, _) = initial_solution(data, &line.start)?;
    let mut theta_l = Rational::zero();
    let mut visited: BTreeSet<String> = [seq.display()].into();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut restarts = 0usize;
    let mut futile = 0usize;
    let mut lines = 1usize;
    let mut iters: u128 = 0;

    loop {
        iters += 1;
        if iters > bound {
            return Err(SolveError::IterationBoundExceeded);
        }
        let rates =
            sequence_rates(data, &seq).map_err(|e| SolveError::Internal(e.to_string()))?;
        let asm = assemble(data, &seq, &rates, &line.at(&theta_l))
            .map_err(|e| SolveError::Internal(e.to_string()))?;
        let h = solve_structure(&asm, &asm.r).map_err(|e| SolveError::Internal(e.to_string()))?;
        let dh = gradient(&asm, &rhs_vector(data, &seq, &line.delta()))
            .map_err(|e| SolveError::Internal(e.to_string()))?;
        let (step, mset) = crate::structural::ratio_step(&h, &dh, &asm.hp);
        let theta_bar = step.map(|d| &theta_l + d);

        // Terminate as soon as the goal point lies in the current region.
        let past_goal = match &theta_bar {
            None => true,
            Some(tb) => *tb >= Rational::one(),
        };
        if past_goal {
            let scale = Rational::one() - &theta_l;
            let values: RatVector = h
                .values
                .iter()
                .zip(&dh.values)
                .map(|(v, d)| v + &scale * d)
                .collect();
            let h_final = SolutionH {
                layout: h.layout,
                values,
            };
            let objective = objectives(data, &rates, &h_final, rho_goal).0;
            trace.push(IterationRecord {
                iter: trace.len() + 1,
                line_index: lines,
                theta_l,
                theta_bar,
                sequence: seq.clone(),
                v_kind: None,
                w_kind: None,
                pivot: "terminate".into(),
                shrinking: mset.iter().map(|&i| h.layout.comp(i)).collect(),
                objective,
                dictionary: None,
                ratio: None,
            });
            return Ok(SolveResult {
                status: SolveStatus::Optimal,
                final_seq: Some(seq),
                final_h: Some(h_final),
                trace,
                restarts,
                lines,
            });
        }

        let tb = theta_bar.unwrap();
        let rho_bar = line.at(&tb);
        let scale = &tb - &theta_l;
        let values: RatVector = h
            .values
            .iter()
            .zip(&dh.values)
            .map(|(v, d)| v + &scale * d)
            .collect();
        let h_bar = SolutionH {
            layout: h.layout,
            values,
        };
        let dec = decompose(&seq, &rates, &h_bar);
        let collision = classify_collision(data, &seq, &rates, &h_bar, &dec, &mset);
        let objective = objectives(data, &rates, &h_bar, &rho_bar).0;

        let pivoted = mclp_pivot(
            data,
            &seq,
            &rates,
            &h_bar,
            &dec,
            &collision,
            &rho_bar,
            &line.delta(),
        )
        .and_then(|step| {
            if visited.insert(step.new_seq.display()) {
                Ok(step)
            } else {
                Err(PivotError::NeedsRestart(format!(
                    "sequence {} repeated on one line",
                    step.new_seq.display()
                )))
            }
        });

        match pivoted {
            Ok(step) => {
                trace.push(IterationRecord {
                    iter: trace.len() + 1,
                    line_index: lines,
                    theta_l: theta_l.clone(),
                    theta_bar: Some(tb.clone()),
                    sequence: seq.clone(),
                    v_kind: Some(collision.kind),
                    w_kind: Some(step.w_kind),
                    pivot: step.description.clone(),
                    shrinking: collision.shrinking.clone(),
                    objective,
                    dictionary: step.dictionary.clone(),
                    ratio: step.ratio.clone(),
                });
                seq = step.new_seq;
                theta_l = tb;
            }
            Err(err) => {
                // A restart is futile when the perturbed line failed again
                // before completing a single pivot: the degeneracy sits in
                // the problem data, not in the boundary parameters, and no
                // perturbation of ρ can separate it. Give up after a few of
                // those in a row, and likewise when coefficient sizes blow
                // up across restarted lines, instead of grinding through
                // the whole restart budget on ever-larger rationals.
                if theta_l.is_zero() && restarts > 0 {
                    futile += 1;
                } else {
                    futile = 0;
                }
                let theta_bits = tb.numer().bits() + tb.denom().bits();
                if restarts >= MAX_RESTARTS
                    || futile >= FUTILE_RESTART_LIMIT
                    || theta_bits > RESTART_BIT_LIMIT
                {
                    return match err {
                        PivotError::SubproblemRequired => Ok(SolveResult {
                            status: SolveStatus::SubproblemRequired,
                            final_seq: Some(seq),
                            final_h: None,
                            trace,
                            restarts,
                            lines,
                        }),
                        e => Err(SolveError::RestartExhausted {
                            reason: e.to_string(),
                            restarts,
                        }),
                    };
                }
                let attempt_seed = seed.wrapping_add(restarts as u64 + 1);
                match restart(data, &seq, &line, &theta_l, &tb, rho_goal, attempt_seed) {
                    Some(new_line) => {
                        restarts += 1;
                        lines += 1;
                        line = new_line;
                        theta_l = Rational::zero();
                        visited = [seq.display()].into();
                    }
                    None => {
                        return match err {
                            PivotError::SubproblemRequired => Ok(SolveResult {
                                status: SolveStatus::SubproblemRequired,
                                final_seq: Some(seq),
                                final_h: None,
                                trace,
                                restarts,
                                lines,
                            }),
                            e => Err(SolveError::RestartExhausted {
                                reason: format!("no viable perturbation: {e}"),
                                restarts,
                            }),
                        };
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{vec_i64, RatMatrix};
    use crate::model::{golden_data, golden_goal};
    use crate::structural::{certify_optimal, golden_rho0};

    #[test]
    fn golden_run_matches_reference() {
        let data = golden_data();
        let res = solve(&data, &golden_goal(), Some(golden_rho0())).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.restarts, 0);
        assert_eq!(res.lines, 1);
        assert_eq!(res.trace.len(), 4);
        let bars: Vec<Rational> = res
            .trace
            .iter()
            .map(|r| r.theta_bar.clone().unwrap())
            .collect();
        assert_eq!(bars, vec![frac(2, 27), frac(9, 29), frac(2, 3), rat(1)]);
        let seqs: Vec<String> = res.trace.iter().map(|r| r.sequence.display()).collect();
        assert_eq!(
            seqs,
            vec![
                "({1,2},{1,2}),[({1,2},{1,2})],({1,2},{1,2})",
                "({1,2},{1}),[({1,2},{1,2})],({1},{1,2})",
                "({1},{1}),[({1},{1}),({1,2},{1,2})],({1},{1,2})",
                "({1},{1}),[({1},{1}),({1},{2}),({1,2},{1,2})],({1},{1,2})",
            ]
        );
        // Iteration-1 dictionary tableau and entering ratios.
        let d1 = res.trace[0].dictionary.as_ref().unwrap();
        let expect = [[5, 2, 0, 0], [3, 4, 0, 0], [5, 2, 5, 2], [3, 4, 3, 4]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d1.a_hat[(i, j)], rat(expect[i][j]));
            }
        }
        assert_eq!(res.trace[0].ratio, Some(frac(503, 216)));
        assert_eq!(res.trace[1].ratio, Some(frac(5, 29)));
        assert_eq!(res.trace[3].pivot, "terminate");
        // Final solution values at the goal point.
        let h = res.final_h.as_ref().unwrap();
        assert_eq!(h.tau(), vec![rat(1), rat(1), rat(0)]);
        assert_eq!(h.u0(), vec![rat(0), frac(5, 2)]);
        assert_eq!(h.pn(), vec![rat(0), frac(5, 3)]);
        assert_eq!(h.xt(), vec![frac(41, 6), rat(0)]);
        assert_eq!(h.qn(), vec![rat(0), frac(2, 3)]);
        assert_eq!(h.qt(), vec![frac(1, 2), rat(0)]);
        assert_eq!(h.x_bp(1), vec![frac(11, 2), rat(0)]);
        assert_eq!(res.trace[3].objective, frac(349, 12));
        // The final solution certifies optimal at θ = 1.
        let seq = res.final_seq.as_ref().unwrap();
        let rates = sequence_rates(&data, seq).unwrap();
        certify_optimal(&data, seq, &rates, h, &golden_goal()).unwrap();
        // θ_ℓ strictly increasing.
        for w in res.trace.windows(2) {
            assert!(w[0].theta_l < w[1].theta_l);
        }
    }

    #[test]
    fn golden_run_with_default_initialization() {
        let data = golden_data();
        let res = solve(&data, &golden_goal(), None).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        let last = res.trace.last().unwrap();
        assert_eq!(last.objective, frac(349, 12));
        let seq = res.final_seq.as_ref().unwrap();
        let rates = sequence_rates(&data, seq).unwrap();
        certify_optimal(&data, seq, &rates, res.final_h.as_ref().unwrap(), &golden_goal())
            .unwrap();
    }

    #[test]
    fn interior_goal_terminates_without_pivots() {
        let data = golden_data();
        let rho0 = golden_rho0();
        let res = solve(&data, &rho0, Some(rho0.clone())).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.trace.len(), 1);
        assert_eq!(res.trace[0].pivot, "terminate");
    }

    #[test]
    fn choose_initial_satisfies_interior_conditions() {
        let data = golden_data();
        let rho0 = choose_initial(&data, &golden_goal());
        assert!(interior_conditions(&data, &rho0).is_ok());
        assert_eq!(rho0.beta, vec_i64(&[8, 10]));
        assert_eq!(rho0.gamma, vec![rat(-3), rat(-4)]);
        assert_eq!(rho0.t, rat(1));
        // The initial solution is a certified interior point.
        let (seq, h) = initial_solution(&data, &rho0).unwrap();
        let rates = sequence_rates(&data, &seq).unwrap();
        certify_optimal(&data, &seq, &rates, &h, &rho0).unwrap();
        let asm = assemble(&data, &seq, &rates, &rho0).unwrap();
        assert!(asm.hp.iter().all(|&r| h.values[r].is_positive()));
        assert!(h.u0().iter().all(Rational::is_zero));
        assert!(h.pn().iter().all(Rational::is_zero));
    }

    #[test]
    fn infeasible_problem_reports_without_iterations() {
        // A u <= beta with A = [1], beta < 0 and u >= 0 is infeasible.
        let data = ProblemData::new(
            RatMatrix::from_i64(&[&[1]]),
            vec_i64(&[1]),
            vec_i64(&[1]),
        )
        .unwrap();
        let rho = BoundaryParams {
            beta: vec![rat(-5)],
            gamma: vec![rat(-1)],
            t: rat(1),
            lambda: vec![rat(0)],
            mu: vec![rat(0)],
        };
        let res = solve(&data, &rho, None).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
        assert!(res.trace.is_empty());

        // The mirrored data is dual infeasible, i.e. primal unbounded.
        let data2 = ProblemData::new(
            RatMatrix::from_i64(&[&[-1]]),
            vec_i64(&[1]),
            vec_i64(&[-1]),
        )
        .unwrap();
        let rho2 = BoundaryParams {
            beta: vec![rat(5)],
            gamma: vec![rat(1)],
            t: rat(1),
            lambda: vec![rat(0)],
            mu: vec![rat(0)],
        };
        let res2 = solve(&data2, &rho2, None).unwrap();
        assert_eq!(res2.status, SolveStatus::Unbounded);
    }

    #[test]
    fn iteration_bound_values() {
        // K = J = 1: C(8,4) * 2^C(2,1) = 70 * 4.
        assert_eq!(iteration_bound(1, 1), 280);
        // K = J = 2: C(16,8) * 2^C(4,2) = 12870 * 64.
        assert_eq!(iteration_bound(2, 2), 12870 * 64);
        assert_eq!(iteration_bound(30, 30), u128::MAX);
    }

    #[test]
    fn bad_initial_is_rejected() {
        let data = golden_data();
        let mut rho0 = golden_rho0();
        rho0.lambda[0] = rat(0); // must be strictly negative
        let err = solve(&data, &golden_goal(), Some(rho0)).unwrap_err();
        assert!(matches!(err, SolveError::BadInitial(_)));
    }

    #[test]
    fn restart_produces_interior_start() {
        let data = golden_data();
        let line = crate::structural::golden_line();
        let seq = full_sequence(&data);
        // Restart from the first region of the golden line.
        let new_line = restart(
            &data,
            &seq,
            &line,
            &rat(0),
            &frac(2, 27),
            &golden_goal(),
            12345,
        )
        .unwrap();
        assert_eq!(new_line.goal, golden_goal());
        // The perturbed start keeps the sequence interior.
        let rates = sequence_rates(&data, &seq).unwrap();
        let asm = assemble(&data, &seq, &rates, &new_line.start).unwrap();
        let h = solve_structure(&asm, &asm.r).unwrap();
        assert!(asm.hp.iter().all(|&r| h.values[r].is_positive()));
        // The perturbation moved off the original line.
        assert_ne!(new_line.start, line.at(&frac(1, 27)));
    }
}
