/*!
A generic exact simplex solver over variables with sign classes
zero / nonnegative / unrestricted.

Used for the feasibility Test-LP pair and as the engine of the
time-discretization oracle. Two-phase dense-tableau simplex with Bland's
anti-cycling rule; unrestricted variables enter the basis in either
direction with no ratio restriction from other unrestricted basics.
*/

use crate::exact::{
    dot, solve_linear, zeros, RatMatrix, RatVector, Rational, SingularError,
};
use num::{Signed, Zero};

/// Sign class of an LP variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignClass {
    /// Fixed at zero.
    Z,
    /// Nonnegative.
    P,
    /// Unrestricted.
    U,
}

/// Constraint row relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// Optimization sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

/// A finite LP instance with classed variables.
#[derive(Clone, Debug)]
pub struct LpInstance {
    pub sense: Sense,
    pub objective: RatVector,
    pub a: RatMatrix,
    pub relations: Vec<Relation>,
    pub rhs: RatVector,
    pub classes: Vec<SignClass>,
}

impl LpInstance {
    fn check(&self) {
        let (m, n) = (self.a.rows(), self.a.cols());
        assert_eq!(self.objective.len(), n, "objective length mismatch");
        assert_eq!(self.relations.len(), m, "relations length mismatch");
        assert_eq!(self.rhs.len(), m, "rhs length mismatch");
        assert_eq!(self.classes.len(), n, "classes length mismatch");
    }
}

/// Solver verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`]. `basis` indexes variables in an extended
/// numbering: `0..n` are the instance variables, `n..n+m` the slack /
/// surplus variables of the rows (row order). On Infeasible/Unbounded the
/// basis at the point of detection serves as the certificate.
#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub basis: Vec<usize>,
    pub primal: RatVector,
    pub dual: RatVector,
    pub objective: Rational,
}

/// Working tableau: `t = B⁻¹·W`, `rhs = B⁻¹·d`, with `basis[i]` the
/// variable occupying row `i`.
struct Tableau {
    t: Vec<RatVector>,
    rhs: RatVector,
    basis: Vec<usize>,
    classes: Vec<SignClass>,
    ncols: usize,
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.ncols
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut r = cost[j].clone();
        for (i, &bi) in self.basis.iter().enumerate() {
            if !cost[bi].is_zero() {
                r -= &cost[bi] * &self.t[i][j];
            }
        }
        r
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col].clone();
        assert!(!piv.is_zero(), "pivot on zero element");
        for x in self.t[row].iter_mut() {
            *x = &*x / &piv;
        }
        self.rhs[row] = &self.rhs[row] / &piv;
        for i in 0..self.t.len() {
            if i == row {
                continue;
            }
            let f = self.t[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.t[i].len() {
                let delta = &f * &self.t[row][j];
                self.t[i][j] -= delta;
            }
            let delta = &f * &self.rhs[row];
            self.rhs[i] -= delta;
        }
        self.basis[row] = col;
    }

    /// Bland-rule simplex maximization over the given cost vector.
    /// `allowed[j]` masks columns that may enter (artificials are excluded
    /// in phase 2). Returns false on unboundedness.
    fn maximize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        let safety_cap: u64 = 50_000_000;
        for _ in 0..safety_cap {
            // Entering variable: Bland's rule (lowest eligible index).
            let mut entering: Option<(usize, i8)> = None;
            for j in 0..self.ncols() {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let r = self.reduced_cost(cost, j);
                match self.classes[j] {
                    SignClass::P => {
                        if r.is_positive() {
                            entering = Some((j, 1));
                        }
                    }
                    SignClass::U => {
                        if r.is_positive() {
                            entering = Some((j, 1));
                        } else if r.is_negative() {
                            entering = Some((j, -1));
                        }
                    }
                    SignClass::Z => {}
                }
                if entering.is_some() {
                    break;
                }
            }
            let Some((col, dir)) = entering else {
                return true; // optimal
            };
            // Ratio test over nonnegative-class basics only.
            let mut best: Option<(Rational, usize)> = None;
            for i in 0..self.t.len() {
                if self.classes[self.basis[i]] == SignClass::U {
                    continue;
                }
                let step = if dir > 0 {
                    self.t[i][col].clone()
                } else {
                    -self.t[i][col].clone()
                };
                if !step.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &step;
                let better = match &best {
                    None => true,
                    Some((r, row)) => {
                        ratio < *r || (ratio == *r && self.basis[i] < self.basis[*row])
                    }
                };
                if better {
                    best = Some((ratio, i));
                }
            }
            let Some((_, row)) = best else {
                return false; // unbounded in the chosen direction
            };
            self.pivot(row, col);
        }
        unreachable!("simplex exceeded safety cap; Bland's rule should terminate");
    }
}

/// Solves a classed LP exactly.
pub fn solve_lp(inst: &LpInstance) -> LpOutcome {
    inst.check();
    let m = inst.a.rows();
    let n = inst.a.cols();

    // Equality standard form over extended variables:
    //   0..n        instance variables (Z columns kept but never eligible),
    //   n..n+m      slack (Le: +1) / surplus (Ge: -1) per row,
    //   n+m..n+2m   artificials.
    let ntot = n + 2 * m;
    let mut w = RatMatrix::zeros(m, ntot);
    let mut d = inst.rhs.clone();
    let mut flipped = vec![false; m];
    for i in 0..m {
        for j in 0..n {
            w[(i, j)] = inst.a[(i, j)].clone();
        }
        match inst.relations[i] {
            Relation::Le => w[(i, n + i)] = Rational::from_integer(1.into()),
            Relation::Ge => w[(i, n + i)] = Rational::from_integer((-1).into()),
            Relation::Eq => {}
        }
        if d[i].is_negative() {
            flipped[i] = true;
            d[i] = -d[i].clone();
            for j in 0..n + m {
                let v = -w[(i, j)].clone();
                w[(i, j)] = v;
            }
        }
        w[(i, n + m + i)] = Rational::from_integer(1.into());
    }

    let mut classes = inst.classes.clone();
    classes.extend(std::iter::repeat(SignClass::P).take(2 * m));

    let mut tab = Tableau {
        t: (0..m).map(|i| w.row(i)).collect(),
        rhs: d,
        basis: (n + m..n + 2 * m).collect(),
        classes,
        ncols: ntot,
    };

    // Phase 1: maximize -(sum of artificials).
    let mut cost1 = zeros(ntot);
    for j in n + m..n + 2 * m {
        cost1[j] = Rational::from_integer((-1).into());
    }
    let allowed1: Vec<bool> = (0..ntot)
        .map(|j| inst.classes.get(j).map_or(true, |c| *c != SignClass::Z))
        .collect();
    let ok = tab.maximize(&cost1, &allowed1);
    assert!(ok, "phase 1 cannot be unbounded");
    let phase1: Rational = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(b, _)| **b >= n + m)
        .map(|(_, v)| v.clone())
        .sum();
    if !phase1.is_zero() {
        return LpOutcome {
            status: LpStatus::Infeasible,
            basis: tab.basis.clone(),
            primal: zeros(n),
            dual: zeros(m),
            objective: Rational::zero(),
        };
    }

    // Drive remaining artificials out of the basis (their value is 0); a row
    // with no eligible pivot is redundant and is dropped.
    let mut kept_rows: Vec<usize> = (0..m).collect();
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n + m {
            let col = (0..n + m)
                .find(|&j| allowed1[j] && !tab.basis.contains(&j) && !tab.t[i][j].is_zero());
            match col {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    kept_rows.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 over the true objective (max form).
    let mut cost2 = zeros(ntot);
    for j in 0..n {
        cost2[j] = match inst.sense {
            Sense::Max => inst.objective[j].clone(),
            Sense::Min => -inst.objective[j].clone(),
        };
    }
    let allowed2: Vec<bool> = (0..ntot)
        .map(|j| j < n + m && inst.classes.get(j).map_or(true, |c| *c != SignClass::Z))
        .collect();
    let bounded = tab.maximize(&cost2, &allowed2);

    let mut primal = zeros(n);
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            primal[b] = tab.rhs[i].clone();
        }
    }
    if !bounded {
        return LpOutcome {
            status: LpStatus::Unbounded,
            basis: tab.basis.clone(),
            primal,
            dual: zeros(m),
            objective: Rational::zero(),
        };
    }

    // Duals: solve Bᵀ y = c_B over the kept equality rows, then undo row
    // flips; dropped redundant rows get dual value 0.
    let mut dual = zeros(m);
    let mb = tab.basis.len();
    if mb > 0 {
        let mut bt = RatMatrix::zeros(mb, mb);
        let mut cb = zeros(mb);
        for (pos, &bvar) in tab.basis.iter().enumerate() {
            for (rpos, &orig_row) in kept_rows.iter().enumerate() {
                bt[(pos, rpos)] = w[(orig_row, bvar)].clone();
            }
            cb[pos] = cost2[bvar].clone();
        }
        let y = solve_linear(&bt, &cb).expect("optimal basis must be nonsingular");
        for (rpos, &orig_row) in kept_rows.iter().enumerate() {
            dual[orig_row] = if flipped[orig_row] {
                -y[rpos].clone()
            } else {
                y[rpos].clone()
            };
        }
        if inst.sense == Sense::Min {
            for v in dual.iter_mut() {
                *v = -v.clone();
            }
        }
    }

    let objective = dot(&inst.objective, &primal);
    LpOutcome {
        status: LpStatus::Optimal,
        basis: tab.basis.clone(),
        primal,
        dual,
        objective,
    }
}

/// Basic primal and dual values for a prescribed basis, treating every
/// constraint as an equality; non-basic variables are zero and no sign
/// checks are performed.
pub fn solve_for_basis(
    inst: &LpInstance,
    basis: &[usize],
) -> Result<(RatVector, RatVector), SingularError> {
    inst.check();
    let m = inst.a.rows();
    let n = inst.a.cols();
    assert_eq!(basis.len(), m, "basis size must equal constraint count");
    let b = RatMatrix::from_columns(m, basis.iter().map(|&j| inst.a.column(j)).collect());
    let xb = solve_linear(&b, &inst.rhs)?;
    let cb: RatVector = basis.iter().map(|&j| inst.objective[j].clone()).collect();
    let y = solve_linear(&b.transpose(), &cb)?;
    let mut primal = zeros(n);
    for (pos, &j) in basis.iter().enumerate() {
        primal[j] = xb[pos].clone();
    }
    Ok((primal, y))
}
