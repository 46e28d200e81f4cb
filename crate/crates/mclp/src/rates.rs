/*!
Basic solutions of the Rates-LP / Rates-LP* pair for a prescribed basis,
plus admissibility and adjacency queries.

A rates basis is the pair (Kset, Jset) of indices of the basic state slopes
ẋ_k and basic dual slopes q̇_j. The primal Rates-LP has constraints
A·u + ẋ = b with u_j fixed at zero for j ∈ Jset and ẋ_k fixed at zero for
k ∉ Kset; the dual Rates-LP* has A'·p − q̇ = c with p_k fixed at zero for
k ∈ Kset and q̇_j fixed at zero for j ∉ Jset. Both reduce to square linear
systems because the basis is prescribed — no optimization is involved.
*/

use crate::exact::{solve_linear, zeros, RatMatrix, RatVector, SingularError};
use crate::model::ProblemData;
use num::Signed;
use std::collections::BTreeSet;
use std::fmt;

/// Identity of a rates-level variable (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RateVar {
    U(usize),
    Xdot(usize),
    P(usize),
    Qdot(usize),
}

impl fmt::Display for RateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateVar::U(j) => write!(f, "u{}", j + 1),
            RateVar::Xdot(k) => write!(f, "xdot{}", k + 1),
            RateVar::P(k) => write!(f, "p{}", k + 1),
            RateVar::Qdot(j) => write!(f, "qdot{}", j + 1),
        }
    }
}

/// A Rates-LP basis: indices (0-based) of the basic ẋ_k and q̇_j.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RatesBasis {
    pub kset: BTreeSet<usize>,
    pub jset: BTreeSet<usize>,
}

impl RatesBasis {
    pub fn new<I, II>(kset: I, jset: II) -> Self
    where
        I: IntoIterator<Item = usize>,
        II: IntoIterator<Item = usize>,
    {
        RatesBasis {
            kset: kset.into_iter().collect(),
            jset: jset.into_iter().collect(),
        }
    }

    /// Primal basis size invariant: |Kset| + (J − |Jset|) = K.
    pub fn size_ok(&self, k: usize, j: usize) -> bool {
        self.kset.iter().all(|&i| i < k)
            && self.jset.iter().all(|&i| i < j)
            && self.kset.len() + j - self.jset.len() == k
    }

    /// The primal basic variable set {ẋ_k : k ∈ Kset} ∪ {u_j : j ∉ Jset}.
    pub fn primal_basics(&self, j_total: usize) -> BTreeSet<RateVar> {
        let mut s: BTreeSet<RateVar> = self.kset.iter().map(|&k| RateVar::Xdot(k)).collect();
        for j in 0..j_total {
            if !self.jset.contains(&j) {
                s.insert(RateVar::U(j));
            }
        }
        s
    }

    /// Set notation like `({1,2},{1})` with 1-based indices.
    pub fn display(&self) -> String {
        let fmt_set = |s: &BTreeSet<usize>| {
            let items: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", items.join(","))
        };
        format!("({},{})", fmt_set(&self.kset), fmt_set(&self.jset))
    }
}

/// Exact basic solution of the Rates-LP / Rates-LP* pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatesSolution {
    pub u: RatVector,
    pub xdot: RatVector,
    pub p: RatVector,
    pub qdot: RatVector,
}

/// Solves the two square systems determined by the prescribed basis.
pub fn rates_for_basis(
    data: &ProblemData,
    basis: &RatesBasis,
) -> Result<RatesSolution, SingularError> {
    assert!(
        basis.size_ok(data.k, data.j),
        "rates basis size invariant violated"
    );
    let (k, j) = (data.k, data.j);

    // Primal: K equations A u + xdot = b; unknowns are xdot_k (k in Kset)
    // and u_j (j not in Jset), all other variables fixed at zero.
    let mut cols: Vec<RatVector> = Vec::with_capacity(k);
    let mut ids: Vec<RateVar> = Vec::with_capacity(k);
    for &kk in &basis.kset {
        let mut e = zeros(k);
        e[kk] = crate::exact::rat(1);
        cols.push(e);
        ids.push(RateVar::Xdot(kk));
    }
    for jj in 0..j {
        if !basis.jset.contains(&jj) {
            cols.push(data.a.column(jj));
            ids.push(RateVar::U(jj));
        }
    }
    let bmat = RatMatrix::from_columns(k, cols);
    let sol = solve_linear(&bmat, &data.b)?;
    let mut u = zeros(j);
    let mut xdot = zeros(k);
    for (val, id) in sol.into_iter().zip(&ids) {
        match id {
            RateVar::Xdot(kk) => xdot[*kk] = val,
            RateVar::U(jj) => u[*jj] = val,
            _ => unreachable!(),
        }
    }

    // Dual: J equations A'p - qdot = c; unknowns are p_k (k not in Kset)
    // and qdot_j (j in Jset).
    let at = data.a.transpose();
    let mut dcols: Vec<RatVector> = Vec::with_capacity(j);
    let mut dids: Vec<RateVar> = Vec::with_capacity(j);
    for kk in 0..k {
        if !basis.kset.contains(&kk) {
            dcols.push(at.column(kk));
            dids.push(RateVar::P(kk));
        }
    }
    for &jj in &basis.jset {
        let mut e = zeros(j);
        e[jj] = crate::exact::rat(-1);
        dcols.push(e);
        dids.push(RateVar::Qdot(jj));
    }
    let dmat = RatMatrix::from_columns(j, dcols);
    let dsol = solve_linear(&dmat, &data.c)?;
    let mut p = zeros(k);
    let mut qdot = zeros(j);
    for (val, id) in dsol.into_iter().zip(&dids) {
        match id {
            RateVar::P(kk) => p[*kk] = val,
            RateVar::Qdot(jj) => qdot[*jj] = val,
            _ => unreachable!(),
        }
    }

    Ok(RatesSolution { u, xdot, p, qdot })
}

/// Admissible means u ≥ 0 and p ≥ 0 componentwise.
pub fn is_admissible(sol: &RatesSolution) -> bool {
    sol.u.iter().all(|x| !x.is_negative()) && sol.p.iter().all(|x| !x.is_negative())
}

/// Result of the adjacency query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjacency {
    /// The bases differ by a single pivot exchanging these variables
    /// (`leaving` is primal-basic in the first basis only).
    Pivot { leaving: RateVar, entering: RateVar },
    NotAdjacent,
}

/// Two bases are adjacent iff their primal basic variable sets differ by
/// exactly one exchanged pair.
pub fn adjacency(b1: &RatesBasis, b2: &RatesBasis, j_total: usize) -> Adjacency {
    let p1 = b1.primal_basics(j_total);
    let p2 = b2.primal_basics(j_total);
    let only1: Vec<RateVar> = p1.difference(&p2).copied().collect();
    let only2: Vec<RateVar> = p2.difference(&p1).copied().collect();
    if only1.len() == 1 && only2.len() == 1 {
        Adjacency::Pivot {
            leaving: only1[0],
            entering: only2[0],
        }
    } else {
        Adjacency::NotAdjacent
    }
}

/// Enumerates every basis satisfying the size invariant (desk scale).
pub fn all_bases(k: usize, j: usize) -> Vec<RatesBasis> {
    fn subsets(n: usize) -> Vec<BTreeSet<usize>> {
        (0usize..1 << n)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
            .collect()
    }
    let mut out = Vec::new();
    for ks in subsets(k) {
        for js in subsets(j) {
            let b = RatesBasis {
                kset: ks.clone(),
                jset: js,
            };
            if b.size_ok(k, j) {
                out.push(b);
            }
        }
    }
    out
}
