/*!
Collision classification at validity-region boundaries and the pivots that
move the solver from one optimal base sequence to the next: pure internal
pivots (insert / replace / remove internal bases) and boundary pivots of
type I / type II performed on the boundary simplex dictionary.
*/

use crate::exact::{
    format_rational, solve_many, zeros, RatMatrix, RatVector, Rational,
};
use crate::model::{BoundaryParams, ProblemData};
use crate::rates::{
    adjacency, all_bases, is_admissible, rates_for_basis, Adjacency, RateVar, RatesBasis,
    RatesSolution,
};
use crate::structural::{
    assemble, decompose_from_parts, gradient, q_breakpoint_values, rhs_vector, sequence_rates,
    solve_structure, x_breakpoint_values, BaseSequence, Decomposition, HComp, SolutionH,
};
use num::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// A state variable identity (0-based) used for pinned/freed states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateVar {
    X(usize),
    Q(usize),
}

impl fmt::Display for StateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateVar::X(k) => write!(f, "x[{}]", k + 1),
            StateVar::Q(j) => write!(f, "q[{}]", j + 1),
        }
    }
}

/// Collision kinds at the right endpoint of a validity region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionKind {
    A,
    B,
    C,
    D,
    E,
    F,
    MultiplePre,
    MultipleAt,
    MultiplePost,
}

impl fmt::Display for CollisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CollisionKind::A => "a",
            CollisionKind::B => "b",
            CollisionKind::C => "c",
            CollisionKind::D => "d",
            CollisionKind::E => "e",
            CollisionKind::F => "f",
            CollisionKind::MultiplePre => "multiple-pre",
            CollisionKind::MultipleAt => "multiple-at",
            CollisionKind::MultiplePost => "multiple-post",
        };
        f.write_str(s)
    }
}

impl CollisionKind {
    /// Inverse of Display.
    pub fn parse(s: &str) -> Option<CollisionKind> {
        Some(match s {
            "a" => CollisionKind::A,
            "b" => CollisionKind::B,
            "c" => CollisionKind::C,
            "d" => CollisionKind::D,
            "e" => CollisionKind::E,
            "f" => CollisionKind::F,
            "multiple-pre" => CollisionKind::MultiplePre,
            "multiple-at" => CollisionKind::MultipleAt,
            "multiple-post" => CollisionKind::MultiplePost,
            _ => return None,
        })
    }
}

/// A classified collision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub kind: CollisionKind,
    /// The H components that shrink to zero (the ratio-test argmax set).
    pub shrinking: Vec<HComp>,
    /// Collapsing interval-index range (n*, n**), 1-based, when present.
    pub span: Option<(usize, usize)>,
    /// The pinned state that becomes free (kind D) or stays tied (kind C).
    pub becoming_free: Option<StateVar>,
}

/// Errors raised by pivot operations; all of them make the driver restart
/// on a perturbed parametric line.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PivotError {
    #[error("multiple collision before the region endpoint")]
    MultiplePre,
    #[error("multiple collision at the region endpoint (ratio-test tie)")]
    MultipleAt,
    #[error("multiple collision past the region endpoint (flat minimum)")]
    MultiplePost,
    #[error("no single inserted basis certifies past the region endpoint")]
    SubproblemRequired,
    #[error("dictionary counting conditions violated")]
    CountingViolation,
    #[error("pivot needs a restart: {0}")]
    NeedsRestart(String),
}

fn restart(msg: impl Into<String>) -> PivotError {
    PivotError::NeedsRestart(msg.into())
}

/// A boundary dictionary variable. Variant order doubles as the display
/// order: rows sort as x• < 𝐱ᴺ < 𝐮⁰ < 𝐮ᴺ, columns as 𝐪⁰ < 𝐩ᴺ < q• < 𝐩⁰.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BVar {
    /// x•_k, the free part of the initial state.
    XBul(usize),
    /// 𝐱ᴺ_k, the terminal state x(T).
    XT(usize),
    /// 𝐮⁰_j, the initial impulse.
    U0(usize),
    /// 𝐮ᴺ_j, the terminal impulse.
    UN(usize),
    /// 𝐪⁰_j, the dual terminal state q(T).
    QT(usize),
    /// 𝐩ᴺ_k, the dual initial impulse.
    PN(usize),
    /// q•_j, the free part of qᴺ.
    QBul(usize),
    /// 𝐩⁰_k, the dual terminal impulse.
    P0(usize),
}

impl fmt::Display for BVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BVar::XBul(k) => write!(f, "xb[{}]", k + 1),
            BVar::XT(k) => write!(f, "xT[{}]", k + 1),
            BVar::U0(j) => write!(f, "u0[{}]", j + 1),
            BVar::UN(j) => write!(f, "uN[{}]", j + 1),
            BVar::QT(j) => write!(f, "qT[{}]", j + 1),
            BVar::PN(k) => write!(f, "pN[{}]", k + 1),
            BVar::QBul(j) => write!(f, "qb[{}]", j + 1),
            BVar::P0(k) => write!(f, "p0[{}]", k + 1),
        }
    }
}

impl BVar {
    pub fn is_primal(&self) -> bool {
        matches!(self, BVar::XBul(_) | BVar::XT(_) | BVar::U0(_) | BVar::UN(_))
    }

    /// The complementary-slack partner on the other side.
    pub fn partner(&self) -> BVar {
        match *self {
            BVar::XBul(k) => BVar::P0(k),
            BVar::P0(k) => BVar::XBul(k),
            BVar::XT(k) => BVar::PN(k),
            BVar::PN(k) => BVar::XT(k),
            BVar::U0(j) => BVar::QT(j),
            BVar::QT(j) => BVar::U0(j),
            BVar::UN(j) => BVar::QBul(j),
            BVar::QBul(j) => BVar::UN(j),
        }
    }
}

/// The dictionary representative of a boundary H component (x⁰ and qᴺ map
/// to their free parts x• and q•).
pub fn dictionary_representative(c: HComp) -> Option<BVar> {
    match c {
        HComp::X0(k) => Some(BVar::XBul(k)),
        HComp::QN(j) => Some(BVar::QBul(j)),
        HComp::U0(j) => Some(BVar::U0(j)),
        HComp::UN(j) => Some(BVar::UN(j)),
        HComp::XT(k) => Some(BVar::XT(k)),
        HComp::QT(j) => Some(BVar::QT(j)),
        HComp::PN(k) => Some(BVar::PN(k)),
        HComp::P0(k) => Some(BVar::P0(k)),
        _ => None,
    }
}

/// Snapshot of all boundary values of a solution.
#[derive(Clone, Debug)]
pub struct BoundaryVals {
    pub u0: RatVector,
    pub x0: RatVector,
    pub pn: RatVector,
    pub qn: RatVector,
    pub un: RatVector,
    pub xt: RatVector,
    pub p0: RatVector,
    pub qt: RatVector,
}

impl BoundaryVals {
    pub fn from_h(h: &SolutionH) -> Self {
        BoundaryVals {
            u0: h.u0(),
            x0: h.x0(),
            pn: h.pn(),
            qn: h.qn(),
            un: h.un(),
            xt: h.xt(),
            p0: h.p0(),
            qt: h.qt(),
        }
    }

    /// Value of a dictionary variable (x•/q• come from the decomposition).
    pub fn value(&self, dec: &Decomposition, v: BVar) -> Rational {
        match v {
            BVar::XBul(k) => dec.xbul[k].clone(),
            BVar::QBul(j) => dec.qbul[j].clone(),
            BVar::U0(j) => self.u0[j].clone(),
            BVar::UN(j) => self.un[j].clone(),
            BVar::XT(k) => self.xt[k].clone(),
            BVar::QT(j) => self.qt[j].clone(),
            BVar::PN(k) => self.pn[k].clone(),
            BVar::P0(k) => self.p0[k].clone(),
        }
    }
}

/// Explicit resolution of the arbitrary-subset rule: which tied initial
/// states go to the dual side (𝐩⁰ basic) and which tied terminal dual
/// states go to the primal side (𝐮ᴺ basic).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DictChoice {
    pub keq_dual: BTreeSet<usize>,
    pub jeq_primal: BTreeSet<usize>,
}

/// The boundary simplex dictionary: compatible primal/dual bases with the
/// shared tableau Â = B⁻¹N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryDictionary {
    /// Primal basic variables in display order (2K of them).
    pub rows: Vec<BVar>,
    /// Dual basic variables in display order (2J of them).
    pub cols: Vec<BVar>,
    pub row_values: RatVector,
    pub col_values: RatVector,
    pub a_hat: RatMatrix,
}

impl BoundaryDictionary {
    pub fn row_of(&self, v: BVar) -> Option<usize> {
        self.rows.iter().position(|&x| x == v)
    }
    pub fn col_of(&self, v: BVar) -> Option<usize> {
        self.cols.iter().position(|&x| x == v)
    }
}

/// Column of a primal boundary variable in the Boundary-LP tableau
/// [[A,0,I,0],[A,A,0,I]] over (𝐮⁰, 𝐮ᴺ, x•, 𝐱ᴺ).
fn primal_column(data: &ProblemData, v: BVar) -> RatVector {
    let k = data.k;
    let mut col = zeros(2 * k);
    match v {
        BVar::U0(j) => {
            for kk in 0..k {
                col[kk] = data.a[(kk, j)].clone();
                col[k + kk] = data.a[(kk, j)].clone();
            }
        }
        BVar::UN(j) => {
            for kk in 0..k {
                col[k + kk] = data.a[(kk, j)].clone();
            }
        }
        BVar::XBul(kk) => col[kk] = Rational::from_integer(1.into()),
        BVar::XT(kk) => col[k + kk] = Rational::from_integer(1.into()),
        _ => unreachable!("dual variable in the primal tableau"),
    }
    col
}

/// Column of a dual boundary variable in the Boundary-LP* tableau
/// [[Aᵀ,0,−I,0],[Aᵀ,Aᵀ,0,−I]] over (𝐩ᴺ, 𝐩⁰, q•, 𝐪⁰).
fn dual_column(data: &ProblemData, v: BVar) -> RatVector {
    let j = data.j;
    let mut col = zeros(2 * j);
    match v {
        BVar::PN(k) => {
            for jj in 0..j {
                col[jj] = data.a[(k, jj)].clone();
                col[j + jj] = data.a[(k, jj)].clone();
            }
        }
        BVar::P0(k) => {
            for jj in 0..j {
                col[j + jj] = data.a[(k, jj)].clone();
            }
        }
        BVar::QBul(jj) => col[jj] = -Rational::from_integer(1.into()),
        BVar::QT(jj) => col[j + jj] = -Rational::from_integer(1.into()),
        _ => unreachable!("primal variable in the dual tableau"),
    }
    col
}

/// Enumerates every valid resolution of the arbitrary-subset rule for the
/// given tied sets and required number of extra primal basics.
pub fn enumerate_choices(
    keq_open: &BTreeSet<usize>,
    jeq_open: &BTreeSet<usize>,
    need_p: usize,
) -> Vec<DictChoice> {
    fn subsets_of_size(items: &[usize], size: usize) -> Vec<BTreeSet<usize>> {
        let mut out = Vec::new();
        let n = items.len();
        for mask in 0usize..1 << n {
            if mask.count_ones() as usize == size {
                out.push((0..n).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect());
            }
        }
        out
    }
    let ks: Vec<usize> = keq_open.iter().copied().collect();
    let js: Vec<usize> = jeq_open.iter().copied().collect();
    let mut out = Vec::new();
    for px in 0..=ks.len().min(need_p) {
        let py = need_p - px;
        if py > js.len() {
            continue;
        }
        for kd in subsets_of_size(&ks, ks.len() - px) {
            for jp in subsets_of_size(&js, py) {
                out.push(DictChoice {
                    keq_dual: kd.clone(),
                    jeq_primal: jp,
                });
            }
        }
    }
    out
}

struct DictPlan {
    primal: BTreeSet<BVar>,
    dual: BTreeSet<BVar>,
    keq_open: BTreeSet<usize>,
    jeq_open: BTreeSet<usize>,
    need_p: usize,
}

/// The fixed part of the basic sets plus the remaining open pairs, after
/// the counting-condition check and the freed-variable rule.
fn dictionary_plan(
    data: &ProblemData,
    seq: &BaseSequence,
    dec: &Decomposition,
    freed: Option<StateVar>,
) -> Result<DictPlan, PivotError> {
    let (k, j) = (data.k, data.j);
    let cnt_p = dec.kup.len() + (j - seq.j0.len()) + seq.kn1.len() + (j - seq.jn1.len());
    let cnt_d = seq.j0.len() + (k - seq.k0.len()) + dec.jup.len() + (k - seq.kn1.len());
    if cnt_p > 2 * k || cnt_d > 2 * j {
        return Err(PivotError::CountingViolation);
    }

    let mut primal: BTreeSet<BVar> = BTreeSet::new();
    let mut dual: BTreeSet<BVar> = BTreeSet::new();
    for &kk in &dec.kup {
        primal.insert(BVar::XBul(kk));
    }
    for jj in (0..j).filter(|jj| !seq.j0.contains(jj)) {
        primal.insert(BVar::U0(jj));
    }
    for &kk in &seq.kn1 {
        primal.insert(BVar::XT(kk));
    }
    for jj in (0..j).filter(|jj| !seq.jn1.contains(jj)) {
        primal.insert(BVar::UN(jj));
    }
    for &jj in &dec.jup {
        dual.insert(BVar::QBul(jj));
    }
    for kk in (0..k).filter(|kk| !seq.kn1.contains(kk)) {
        dual.insert(BVar::PN(kk));
    }
    for &jj in &seq.j0 {
        dual.insert(BVar::QT(jj));
    }
    for kk in (0..k).filter(|kk| !seq.k0.contains(kk)) {
        dual.insert(BVar::P0(kk));
    }

    let mut keq_open = dec.keq.clone();
    let mut jeq_open = dec.jeq.clone();
    // Freed-variable rule (kind D): the freed state's pair is decided by
    // the opposite side's fixed count, ahead of the subset resolution.
    match freed {
        Some(StateVar::X(kk)) => {
            primal.remove(&BVar::XBul(kk));
            keq_open.remove(&kk);
            if cnt_d < 2 * j {
                dual.insert(BVar::P0(kk));
            } else {
                primal.insert(BVar::XBul(kk));
            }
        }
        Some(StateVar::Q(jj)) => {
            dual.remove(&BVar::QBul(jj));
            jeq_open.remove(&jj);
            if cnt_p < 2 * k {
                primal.insert(BVar::UN(jj));
            } else {
                dual.insert(BVar::QBul(jj));
            }
        }
        None => {}
    }

    let need_p = (2 * k)
        .checked_sub(primal.len())
        .ok_or(PivotError::CountingViolation)?;
    if need_p > keq_open.len() + jeq_open.len() {
        return Err(PivotError::CountingViolation);
    }
    Ok(DictPlan {
        primal,
        dual,
        keq_open,
        jeq_open,
        need_p,
    })
}

/// The default subset resolution: as many tied initial states as possible
/// stay primal; ties broken by lexicographically smallest indices.
pub fn default_choice(plan_keq: &BTreeSet<usize>, plan_jeq: &BTreeSet<usize>, need_p: usize) -> DictChoice {
    let a = plan_keq.len();
    let px = a.min(need_p);
    let py = need_p - px;
    DictChoice {
        keq_dual: plan_keq.iter().copied().take(a - px).collect(),
        jeq_primal: plan_jeq.iter().copied().take(py).collect(),
    }
}

/// Builds the boundary simplex dictionary for a (possibly intermediate)
/// sequence. `freed` carries the kind-D freed state; `choice` overrides
/// the default subset resolution.
pub fn build_dictionary(
    data: &ProblemData,
    seq: &BaseSequence,
    dec: &Decomposition,
    vals: &BoundaryVals,
    freed: Option<StateVar>,
    choice: Option<&DictChoice>,
) -> Result<BoundaryDictionary, PivotError> {
    let (k, j) = (data.k, data.j);
    let mut plan = dictionary_plan(data, seq, dec, freed)?;
    let default = default_choice(&plan.keq_open, &plan.jeq_open, plan.need_p);
    let choice = choice.unwrap_or(&default);
    if !choice.keq_dual.is_subset(&plan.keq_open)
        || !choice.jeq_primal.is_subset(&plan.jeq_open)
        || (plan.keq_open.len() - choice.keq_dual.len()) + choice.jeq_primal.len() != plan.need_p
    {
        return Err(restart("invalid dictionary subset choice"));
    }
    for &kk in &plan.keq_open {
        if choice.keq_dual.contains(&kk) {
            plan.dual.insert(BVar::P0(kk));
        } else {
            plan.primal.insert(BVar::XBul(kk));
        }
    }
    for &jj in &plan.jeq_open {
        if choice.jeq_primal.contains(&jj) {
            plan.primal.insert(BVar::UN(jj));
        } else {
            plan.dual.insert(BVar::QBul(jj));
        }
    }
    if plan.primal.len() != 2 * k || plan.dual.len() != 2 * j {
        return Err(PivotError::CountingViolation);
    }
    for v in &plan.primal {
        if plan.dual.contains(&v.partner()) {
            return Err(restart(format!("pair {v} basic on both sides")));
        }
    }

    let rows: Vec<BVar> = plan.primal.iter().copied().collect();
    let cols: Vec<BVar> = plan.dual.iter().copied().collect();
    let b = RatMatrix::from_columns(2 * k, rows.iter().map(|&v| primal_column(data, v)).collect());
    let n_cols: Vec<RatVector> = cols
        .iter()
        .map(|&v| primal_column(data, v.partner()))
        .collect();
    let a_cols = solve_many(&b, &n_cols).map_err(|_| restart("singular boundary basis"))?;
    let mut a_hat = RatMatrix::zeros(2 * k, 2 * j);
    for (jc, col) in a_cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            a_hat[(i, jc)] = v.clone();
        }
    }
    // Compatibility identity: the dual dictionary is the negative
    // transpose of the primal one.
    let bs = RatMatrix::from_columns(2 * j, cols.iter().map(|&v| dual_column(data, v)).collect());
    let ns_cols: Vec<RatVector> = rows
        .iter()
        .map(|&v| dual_column(data, v.partner()))
        .collect();
    let ys = solve_many(&bs, &ns_cols).map_err(|_| restart("singular dual boundary basis"))?;
    for (i, y) in ys.iter().enumerate() {
        for (jc, v) in y.iter().enumerate() {
            if a_hat[(i, jc)] != -v {
                return Err(restart("boundary dictionary compatibility identity failed"));
            }
        }
    }

    let row_values: RatVector = rows.iter().map(|&v| vals.value(dec, v)).collect();
    let col_values: RatVector = cols.iter().map(|&v| vals.value(dec, v)).collect();
    Ok(BoundaryDictionary {
        rows,
        cols,
        row_values,
        col_values,
        a_hat,
    })
}

/// Outcome of a boundary pivot with the leaving variable v.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PivotOutcome {
    /// A zero-valued basic variable on the opposite side blocks the step;
    /// the dictionary is unchanged.
    TypeI,
    /// A standard ratio-test pivot: w* drops to 0 and leaves, its partner
    /// w enters at 0, and v's partner v* enters at the ratio value.
    TypeII {
        w_star: BVar,
        w: BVar,
        v_star: BVar,
        ratio: Rational,
        row_values: RatVector,
        col_values: RatVector,
    },
}

/// Performs the type I test and, failing that, the type II ratio test for
/// the leaving basic variable `v`.
pub fn boundary_pivot(dict: &BoundaryDictionary, v: BVar) -> Result<PivotOutcome, PivotError> {
    if let Some(i) = dict.row_of(v) {
        // v primal: opposite side = columns.
        if dict
            .cols
            .iter()
            .enumerate()
            .any(|(jc, _)| dict.col_values[jc].is_zero() && !dict.a_hat[(i, jc)].is_zero())
        {
            return Ok(PivotOutcome::TypeI);
        }
        let mut best: Option<(Rational, Vec<usize>)> = None;
        for jc in 0..dict.cols.len() {
            if dict.a_hat[(i, jc)].is_negative() {
                let ratio = &dict.col_values[jc] / -&dict.a_hat[(i, jc)];
                match &mut best {
                    Some((r, ties)) if ratio == *r => ties.push(jc),
                    Some((r, _)) if ratio < *r => best = Some((ratio, vec![jc])),
                    None => best = Some((ratio, vec![jc])),
                    _ => {}
                }
            }
        }
        let (ratio, ties) = best.ok_or_else(|| restart("no entering candidate in the ratio test"))?;
        if ties.len() > 1 {
            return Err(PivotError::MultipleAt);
        }
        let jc = ties[0];
        let w_star = dict.cols[jc];
        let mut col_values = dict.col_values.clone();
        for (jj, cv) in col_values.iter_mut().enumerate() {
            *cv += &ratio * &dict.a_hat[(i, jj)];
        }
        Ok(PivotOutcome::TypeII {
            w_star,
            w: w_star.partner(),
            v_star: v.partner(),
            ratio,
            row_values: dict.row_values.clone(),
            col_values,
        })
    } else if let Some(jc) = dict.col_of(v) {
        // v dual: opposite side = rows.
        if dict
            .rows
            .iter()
            .enumerate()
            .any(|(i, _)| dict.row_values[i].is_zero() && !dict.a_hat[(i, jc)].is_zero())
        {
            return Ok(PivotOutcome::TypeI);
        }
        let mut best: Option<(Rational, Vec<usize>)> = None;
        for i in 0..dict.rows.len() {
            if dict.a_hat[(i, jc)].is_positive() {
                let ratio = &dict.row_values[i] / &dict.a_hat[(i, jc)];
                match &mut best {
                    Some((r, ties)) if ratio == *r => ties.push(i),
                    Some((r, _)) if ratio < *r => best = Some((ratio, vec![i])),
                    None => best = Some((ratio, vec![i])),
                    _ => {}
                }
            }
        }
        let (ratio, ties) = best.ok_or_else(|| restart("no entering candidate in the ratio test"))?;
        if ties.len() > 1 {
            return Err(PivotError::MultipleAt);
        }
        let i = ties[0];
        let w_star = dict.rows[i];
        let mut row_values = dict.row_values.clone();
        for (ii, rv) in row_values.iter_mut().enumerate() {
            *rv -= &ratio * &dict.a_hat[(ii, jc)];
        }
        Ok(PivotOutcome::TypeII {
            w_star,
            w: w_star.partner(),
            v_star: v.partner(),
            ratio,
            row_values,
            col_values: dict.col_values.clone(),
        })
    } else {
        Err(restart(format!("leaving variable {v} is not basic")))
    }
}

/// Post-pivot values of every boundary dictionary variable (nonbasic
/// variables are zero; v leaves, v* enters at the ratio, w enters at 0).
pub fn post_values(
    dict: &BoundaryDictionary,
    outcome: &PivotOutcome,
    v: Option<BVar>,
) -> BTreeMap<BVar, Rational> {
    let mut m: BTreeMap<BVar, Rational> = BTreeMap::new();
    match outcome {
        PivotOutcome::TypeI => {
            for (i, &r) in dict.rows.iter().enumerate() {
                m.insert(r, dict.row_values[i].clone());
            }
            for (jc, &c) in dict.cols.iter().enumerate() {
                m.insert(c, dict.col_values[jc].clone());
            }
        }
        PivotOutcome::TypeII {
            w_star,
            w,
            v_star,
            ratio,
            row_values,
            col_values,
        } => {
            for (i, &r) in dict.rows.iter().enumerate() {
                m.insert(r, row_values[i].clone());
            }
            for (jc, &c) in dict.cols.iter().enumerate() {
                m.insert(c, col_values[jc].clone());
            }
            if let Some(v) = v {
                m.insert(v, Rational::zero());
            }
            m.insert(*w_star, Rational::zero());
            m.insert(*w, Rational::zero());
            m.insert(*v_star, ratio.clone());
        }
    }
    m
}

/// The single boundary variable v′ that shrinks to 0 as θ decreases to θ̄
/// from the far side, if any.
pub fn v_prime(
    kind: CollisionKind,
    outcome: &PivotOutcome,
    v: Option<BVar>,
    dec: &Decomposition,
) -> Option<BVar> {
    match outcome {
        PivotOutcome::TypeI => match kind {
            CollisionKind::D => None,
            _ => v.map(|v| v.partner()),
        },
        PivotOutcome::TypeII { w_star, w, .. } => match *w_star {
            BVar::XBul(k) if dec.xtilde[k].is_positive() => None,
            BVar::QBul(j) if dec.qtilde[j].is_positive() => None,
            _ => Some(*w),
        },
    }
}

/// New boundary index sets: all strictly positive boundary values plus v′
/// (x⁰ = x• + x̃ and qᴺ = q• + q̃ recomputed from the post-pivot values).
#[allow(clippy::type_complexity)]
pub fn new_boundary_sets(
    data: &ProblemData,
    post: &BTreeMap<BVar, Rational>,
    dec: &Decomposition,
    vp: Option<BVar>,
) -> (
    BTreeSet<usize>,
    BTreeSet<usize>,
    BTreeSet<usize>,
    BTreeSet<usize>,
) {
    let val = |v: BVar| post.get(&v).cloned().unwrap_or_else(Rational::zero);
    let k0 = (0..data.k)
        .filter(|&k| (val(BVar::XBul(k)) + &dec.xtilde[k]).is_positive() || vp == Some(BVar::XBul(k)))
        .collect();
    let j0 = (0..data.j)
        .filter(|&j| val(BVar::QT(j)).is_positive() || vp == Some(BVar::QT(j)))
        .collect();
    let kn1 = (0..data.k)
        .filter(|&k| val(BVar::XT(k)).is_positive() || vp == Some(BVar::XT(k)))
        .collect();
    let jn1 = (0..data.j)
        .filter(|&j| (val(BVar::QBul(j)) + &dec.qtilde[j]).is_positive() || vp == Some(BVar::QBul(j)))
        .collect();
    (k0, j0, kn1, jn1)
}

/// Classifies the collision at θ̄ from the ratio-test argmax set.
pub fn classify_collision(
    data: &ProblemData,
    seq: &BaseSequence,
    rates: &[RatesSolution],
    h: &SolutionH,
    dec: &Decomposition,
    mset: &[usize],
) -> Collision {
    let n = seq.n();
    let comps: Vec<HComp> = mset.iter().map(|&i| h.layout.comp(i)).collect();
    let multiple_pre = |comps: &[HComp]| Collision {
        kind: CollisionKind::MultiplePre,
        shrinking: comps.to_vec(),
        span: None,
        becoming_free: None,
    };

    let mut taus: Vec<usize> = Vec::new();
    let mut others: Vec<HComp> = Vec::new();
    for &c in &comps {
        match c {
            HComp::Tau(nn) => taus.push(nn),
            other => others.push(other),
        }
    }
    taus.sort_unstable();
    let consecutive = taus.windows(2).all(|w| w[1] == w[0] + 1);

    // Singleton non-τ collisions.
    if taus.is_empty() && others.len() == 1 {
        let kind = match others[0] {
            HComp::X(_, _) | HComp::Q(_, _) => CollisionKind::A,
            HComp::X0(k) => {
                if dec.keq.contains(&k) && rates[0].xdot[k].is_negative() {
                    // A tied initial state can only shrink jointly with
                    // leading intervals.
                    return multiple_pre(&comps);
                }
                CollisionKind::E
            }
            HComp::QN(j) => {
                if dec.jeq.contains(&j) && rates[n - 1].qdot[j].is_negative() {
                    return multiple_pre(&comps);
                }
                CollisionKind::E
            }
            HComp::U0(_) | HComp::UN(_) | HComp::PN(_) | HComp::P0(_) | HComp::XT(_)
            | HComp::QT(_) => CollisionKind::E,
            HComp::Tau(_) => unreachable!(),
        };
        return Collision {
            kind,
            shrinking: comps,
            span: None,
            becoming_free: None,
        };
    }

    // Joint collision (kind F): a tied boundary state plus the adjoining
    // run of intervals.
    if others.len() == 1 && !taus.is_empty() && consecutive {
        match others[0] {
            HComp::X0(k)
                if taus[0] == 1
                    && dec.keq.contains(&k)
                    && rates[0].xdot[k].is_negative() =>
            {
                return Collision {
                    kind: CollisionKind::F,
                    shrinking: comps,
                    span: Some((1, *taus.last().unwrap())),
                    becoming_free: None,
                };
            }
            HComp::QN(j)
                if *taus.last().unwrap() == n
                    && dec.jeq.contains(&j)
                    && rates[n - 1].qdot[j].is_negative() =>
            {
                return Collision {
                    kind: CollisionKind::F,
                    shrinking: comps,
                    span: Some((taus[0], n)),
                    becoming_free: None,
                };
            }
            _ => return multiple_pre(&comps),
        }
    }

    // Pure interval collision.
    if others.is_empty() && !taus.is_empty() && consecutive {
        let (ns, nss) = (taus[0], *taus.last().unwrap());
        if ns == 1 && nss == n {
            return multiple_pre(&comps);
        }
        // Identify the pinned state across the collapsing run.
        let pinned: Option<StateVar> = if ns == 1 {
            match adjacency(&seq.bases[nss - 1], &seq.bases[nss], data.j) {
                Adjacency::Pivot {
                    leaving: RateVar::U(j),
                    ..
                } => Some(StateVar::Q(j)),
                _ => None,
            }
        } else if nss == n {
            match adjacency(&seq.bases[ns - 2], &seq.bases[ns - 1], data.j) {
                Adjacency::Pivot {
                    leaving: RateVar::Xdot(k),
                    ..
                } => Some(StateVar::X(k)),
                _ => None,
            }
        } else {
            let before = seq.bases[ns - 2].primal_basics(data.j);
            let after = seq.bases[nss].primal_basics(data.j);
            let diff: Vec<RateVar> = before.difference(&after).copied().collect();
            match diff.as_slice() {
                [RateVar::Xdot(k)] => Some(StateVar::X(*k)),
                [RateVar::U(j)] => Some(StateVar::Q(*j)),
                [_, _] => {
                    return Collision {
                        kind: CollisionKind::B,
                        shrinking: comps,
                        span: Some((ns, nss)),
                        becoming_free: None,
                    };
                }
                _ => None,
            }
        };
        let Some(pinned) = pinned else {
            return multiple_pre(&comps);
        };
        // Kind D iff the pinned state has no other zero breakpoint value
        // outside the collapsing cluster [n*-1, n**]; otherwise kind C.
        let tau_vals = h.tau();
        let zero_outside = match pinned {
            StateVar::X(k) => x_breakpoint_values(&h.x0(), rates, &tau_vals)
                .iter()
                .enumerate()
                .any(|(m, xv)| (m + 1 < ns || m > nss) && xv[k].is_zero()),
            StateVar::Q(j) => q_breakpoint_values(&h.qn(), rates, &tau_vals)
                .iter()
                .enumerate()
                .any(|(m, qv)| (m + 1 < ns || m > nss) && qv[j].is_zero()),
        };
        return Collision {
            kind: if zero_outside {
                CollisionKind::C
            } else {
                CollisionKind::D
            },
            shrinking: comps,
            span: Some((ns, nss)),
            becoming_free: Some(pinned),
        };
    }

    multiple_pre(&comps)
}

/// Exact "certifies just past θ̄" test: the candidate sequence solves with
/// a nonsingular system and every free component is positive, or zero with
/// a positive θ-derivative (lexicographic sign on value, then derivative).
pub fn certifies_past(
    data: &ProblemData,
    seq: &BaseSequence,
    rho_bar: &BoundaryParams,
    d_rho: &BoundaryParams,
) -> bool {
    let Ok(rates) = sequence_rates(data, seq) else {
        return false;
    };
    let Ok(asm) = assemble(data, seq, &rates, rho_bar) else {
        return false;
    };
    let Ok(h) = solve_structure(&asm, &asm.r) else {
        return false;
    };
    let dr = rhs_vector(data, seq, d_rho);
    let Ok(dh) = gradient(&asm, &dr) else {
        return false;
    };
    asm.hp.iter().all(|&r| {
        h.values[r].is_positive() || (h.values[r].is_zero() && dh.values[r].is_positive())
    })
}

/// Finds the unique single basis whose insertion at `pos` (between
/// bases[pos-1] and bases[pos]) yields a proper sequence certifying past
/// θ̄. Candidates are enumerated deterministically; the first certifying
/// one is taken.
#[allow(clippy::too_many_arguments)]
fn insert_basis(
    data: &ProblemData,
    k0: &BTreeSet<usize>,
    j0: &BTreeSet<usize>,
    kn1: &BTreeSet<usize>,
    jn1: &BTreeSet<usize>,
    bases: &[RatesBasis],
    pos: usize,
    rho_bar: &BoundaryParams,
    d_rho: &BoundaryParams,
) -> Result<BaseSequence, PivotError> {
    let n = bases.len();
    assert!(pos <= n);
    for cand in all_bases(data.k, data.j) {
        let Ok(sol) = rates_for_basis(data, &cand) else {
            continue;
        };
        if !is_admissible(&sol) {
            continue;
        }
        if pos > 0 && adjacency(&bases[pos - 1], &cand, data.j) == Adjacency::NotAdjacent {
            continue;
        }
        if pos < n && adjacency(&cand, &bases[pos], data.j) == Adjacency::NotAdjacent {
            continue;
        }
        if pos == 0 && !k0.is_subset(&cand.kset) {
            continue;
        }
        if pos == n && !jn1.is_subset(&cand.jset) {
            continue;
        }
        let mut new_bases = bases.to_vec();
        new_bases.insert(pos, cand);
        let seq = BaseSequence {
            k0: k0.clone(),
            j0: j0.clone(),
            bases: new_bases,
            kn1: kn1.clone(),
            jn1: jn1.clone(),
        };
        if certifies_past(data, &seq, rho_bar, d_rho) {
            return Ok(seq);
        }
    }
    Err(PivotError::SubproblemRequired)
}

/// Insertion position of a kind-A state collision: x^n or q^n splits the
/// sequence between B_n and B_{n+1}.
fn kind_a_position(c: HComp) -> Option<usize> {
    match c {
        HComp::X(n, _) | HComp::Q(n, _) => Some(n),
        _ => None,
    }
}

/// One completed M-CLP pivot.
#[derive(Clone, Debug)]
pub struct PivotStep {
    pub new_seq: BaseSequence,
    /// Collision kind seen from the far side of θ̄.
    pub w_kind: CollisionKind,
    /// The boundary dictionary used, when the pivot was a boundary pivot.
    pub dictionary: Option<BoundaryDictionary>,
    /// Ratio-test value of the entering variable (type II only).
    pub ratio: Option<Rational>,
    pub description: String,
}

/// Performs the pivot for a classified collision of kind A..F, producing
/// the unique next optimal base sequence.
#[allow(clippy::too_many_arguments)]
pub fn mclp_pivot(
    data: &ProblemData,
    seq: &BaseSequence,
    rates: &[RatesSolution],
    h: &SolutionH,
    dec: &Decomposition,
    collision: &Collision,
    rho_bar: &BoundaryParams,
    d_rho: &BoundaryParams,
) -> Result<PivotStep, PivotError> {
    mclp_pivot_with_choice(data, seq, rates, h, dec, collision, rho_bar, d_rho, None)
}

/// [`mclp_pivot`] with an explicit resolution of the arbitrary-subset rule
/// for boundary-kind dictionaries. Every valid choice yields the same next
/// base sequence; this entry point exists to verify that.
#[allow(clippy::too_many_arguments)]
pub fn mclp_pivot_with_choice(
    data: &ProblemData,
    seq: &BaseSequence,
    _rates: &[RatesSolution],
    h: &SolutionH,
    _dec: &Decomposition,
    collision: &Collision,
    rho_bar: &BoundaryParams,
    d_rho: &BoundaryParams,
    choice: Option<&DictChoice>,
) -> Result<PivotStep, PivotError> {
    match collision.kind {
        CollisionKind::MultiplePre => return Err(PivotError::MultiplePre),
        CollisionKind::MultipleAt => return Err(PivotError::MultipleAt),
        CollisionKind::MultiplePost => return Err(PivotError::MultiplePost),
        _ => {}
    }
    match collision.kind {
        CollisionKind::A => {
            let pos = kind_a_position(collision.shrinking[0])
                .ok_or_else(|| restart("kind A without a breakpoint state"))?;
            let new_seq = insert_basis(
                data, &seq.k0, &seq.j0, &seq.kn1, &seq.jn1, &seq.bases, pos, rho_bar, d_rho,
            )?;
            let inserted = new_seq.bases[pos].display();
            Ok(PivotStep {
                new_seq,
                w_kind: CollisionKind::C,
                dictionary: None,
                ratio: None,
                description: format!("insert@{pos}:{inserted}"),
            })
        }
        CollisionKind::B => {
            let (ns, nss) = collision.span.unwrap();
            let mut keep = seq.bases.clone();
            keep.drain(ns - 1..nss);
            let pos = ns - 1;
            let new_seq = insert_basis(
                data, &seq.k0, &seq.j0, &seq.kn1, &seq.jn1, &keep, pos, rho_bar, d_rho,
            )?;
            let inserted = new_seq.bases[pos].display();
            Ok(PivotStep {
                new_seq,
                w_kind: CollisionKind::B,
                dictionary: None,
                ratio: None,
                description: format!("replace@{ns}-{nss}:{inserted}"),
            })
        }
        CollisionKind::C => {
            let (ns, nss) = collision.span.unwrap();
            let mut keep = seq.bases.clone();
            keep.drain(ns - 1..nss);
            let new_seq = BaseSequence {
                k0: seq.k0.clone(),
                j0: seq.j0.clone(),
                bases: keep,
                kn1: seq.kn1.clone(),
                jn1: seq.jn1.clone(),
            };
            sequence_rates(data, &new_seq).map_err(|e| restart(format!("removal: {e}")))?;
            Ok(PivotStep {
                new_seq,
                w_kind: CollisionKind::A,
                dictionary: None,
                ratio: None,
                description: format!("remove@{ns}-{nss}"),
            })
        }
        CollisionKind::D | CollisionKind::E | CollisionKind::F => {
            boundary_kind_pivot(data, seq, h, collision, rho_bar, d_rho, choice)
        }
        _ => unreachable!(),
    }
}

/// The intermediate state of a boundary-kind pivot after the pre-boundary
/// removal of collapsed intervals.
struct BoundarySetup {
    seq_int: BaseSequence,
    rates_int: Vec<RatesSolution>,
    tau_int: Vec<Rational>,
    vals: BoundaryVals,
    dec_int: Decomposition,
    freed: Option<StateVar>,
}

fn boundary_setup(
    data: &ProblemData,
    seq: &BaseSequence,
    h: &SolutionH,
    collision: &Collision,
) -> Result<BoundarySetup, PivotError> {
    // Pre-boundary step: remove the bases of the collapsing intervals.
    let mut keep = seq.bases.clone();
    let mut tau_int: Vec<Rational> = h.tau().clone();
    if let Some((ns, nss)) = collision.span {
        keep.drain(ns - 1..nss);
        tau_int.drain(ns - 1..nss);
    }
    if keep.is_empty() {
        return Err(restart("all intervals collapse"));
    }
    let seq_int = BaseSequence {
        k0: seq.k0.clone(),
        j0: seq.j0.clone(),
        bases: keep,
        kn1: seq.kn1.clone(),
        jn1: seq.jn1.clone(),
    };
    let rates_int =
        sequence_rates(data, &seq_int).map_err(|e| restart(format!("intermediate: {e}")))?;
    let vals = BoundaryVals::from_h(h);
    let dec_int = decompose_from_parts(&seq_int, &rates_int, &vals.x0, &vals.qn, &tau_int);
    let freed = if collision.kind == CollisionKind::D {
        collision.becoming_free
    } else {
        None
    };
    Ok(BoundarySetup {
        seq_int,
        rates_int,
        tau_int,
        vals,
        dec_int,
        freed,
    })
}

/// All valid resolutions of the arbitrary-subset rule for the dictionary
/// that a boundary-kind collision would build; empty for internal kinds.
pub fn collision_choices(
    data: &ProblemData,
    seq: &BaseSequence,
    h: &SolutionH,
    collision: &Collision,
) -> Result<Vec<DictChoice>, PivotError> {
    match collision.kind {
        CollisionKind::D | CollisionKind::E | CollisionKind::F => {}
        _ => return Ok(vec![]),
    }
    let setup = boundary_setup(data, seq, h, collision)?;
    let plan = dictionary_plan(data, &setup.seq_int, &setup.dec_int, setup.freed)?;
    Ok(enumerate_choices(
        &plan.keq_open,
        &plan.jeq_open,
        plan.need_p,
    ))
}

#[allow(clippy::too_many_arguments)]
fn boundary_kind_pivot(
    data: &ProblemData,
    seq: &BaseSequence,
    h: &SolutionH,
    collision: &Collision,
    rho_bar: &BoundaryParams,
    d_rho: &BoundaryParams,
    choice: Option<&DictChoice>,
) -> Result<PivotStep, PivotError> {
    let kind = collision.kind;
    let BoundarySetup {
        seq_int,
        rates_int,
        tau_int,
        vals,
        dec_int,
        freed,
    } = boundary_setup(data, seq, h, collision)?;
    let mut dict = build_dictionary(data, &seq_int, &dec_int, &vals, freed, choice)?;

    // Leaving variable.
    let (outcome, v_opt): (PivotOutcome, Option<BVar>) = match kind {
        CollisionKind::D => match freed.unwrap() {
            StateVar::X(kk) => {
                if dict.row_of(BVar::XBul(kk)).is_some() {
                    (PivotOutcome::TypeI, None)
                } else {
                    let v = BVar::P0(kk);
                    (boundary_pivot(&dict, v)?, Some(v))
                }
            }
            StateVar::Q(jj) => {
                if dict.col_of(BVar::QBul(jj)).is_some() {
                    (PivotOutcome::TypeI, None)
                } else {
                    let v = BVar::UN(jj);
                    (boundary_pivot(&dict, v)?, Some(v))
                }
            }
        },
        _ => {
            let comp = collision
                .shrinking
                .iter()
                .copied()
                .find(|c| dictionary_representative(*c).is_some())
                .ok_or_else(|| restart("no boundary variable in the shrinking set"))?;
            let v = dictionary_representative(comp).unwrap();
            if dict.row_of(v).is_none() && dict.col_of(v).is_none() {
                // The tied pair was resolved the other way by the subset
                // rule; attempt a degenerate complementary swap.
                dict = rebuild_with_basic(data, &seq_int, &dec_int, &vals, freed, v)?;
            }
            (boundary_pivot(&dict, v)?, Some(v))
        }
    };

    let vp = v_prime(kind, &outcome, v_opt, &dec_int);
    let post = post_values(&dict, &outcome, v_opt);
    let (k0n, j0n, kn1n, jn1n) = new_boundary_sets(data, &post, &dec_int, vp);

    // W-side classification and post-boundary insertion.
    let nii = seq_int.n();
    let (w_kind, insert_pos): (CollisionKind, Option<usize>) = match (&outcome, vp) {
        (PivotOutcome::TypeI, None) => (CollisionKind::A, None),
        (PivotOutcome::TypeII { w_star, .. }, None) => {
            // The tied free part hit zero: locate the new tied breakpoint.
            let pos = match *w_star {
                BVar::XBul(kk) => {
                    let mut x0n = vals.x0.clone();
                    x0n[kk] = dec_int.xtilde[kk].clone();
                    let traj = x_breakpoint_values(&x0n, &rates_int, &tau_int);
                    argmin_unique(traj.iter().map(|v| &v[kk]))
                }
                BVar::QBul(jj) => {
                    let mut qnn = vals.qn.clone();
                    qnn[jj] = dec_int.qtilde[jj].clone();
                    let traj = q_breakpoint_values(&qnn, &rates_int, &tau_int);
                    argmin_unique(traj.iter().map(|v| &v[jj]))
                }
                _ => return Err(restart("type II with no shrinking free part")),
            }
            .ok_or(PivotError::MultiplePost)?;
            (CollisionKind::D, Some(pos))
        }
        (_, Some(BVar::XBul(_))) if !k0n.is_subset(&seq_int.bases[0].kset) => {
            (CollisionKind::F, Some(0))
        }
        (_, Some(BVar::QBul(_))) if !jn1n.is_subset(&seq_int.bases[nii - 1].jset) => {
            (CollisionKind::F, Some(nii))
        }
        (_, Some(_)) => (CollisionKind::E, None),
    };

    let new_seq = match insert_pos {
        Some(pos) => insert_basis(
            data, &k0n, &j0n, &kn1n, &jn1n, &seq_int.bases, pos, rho_bar, d_rho,
        )?,
        None => {
            let s = BaseSequence {
                k0: k0n,
                j0: j0n,
                bases: seq_int.bases.clone(),
                kn1: kn1n,
                jn1: jn1n,
            };
            sequence_rates(data, &s).map_err(|e| restart(format!("post-pivot: {e}")))?;
            s
        }
    };

    let (ratio, description) = match &outcome {
        PivotOutcome::TypeI => (
            None,
            match v_opt {
                Some(v) => format!("typeI(v={v})"),
                None => format!("typeI(free={})", freed.unwrap()),
            },
        ),
        PivotOutcome::TypeII { w, ratio, .. } => (
            Some(ratio.clone()),
            format!(
                "typeII(v={},w={},t={})",
                v_opt.unwrap(),
                w,
                format_rational(ratio)
            ),
        ),
    };
    let description = match insert_pos {
        Some(pos) => format!(
            "{description}+insert@{pos}:{}",
            new_seq.bases[pos].display()
        ),
        None => description,
    };

    Ok(PivotStep {
        new_seq,
        w_kind,
        dictionary: Some(dict),
        ratio,
        description,
    })
}

/// Unique argmin index of an exact sequence, or None on a tie.
fn argmin_unique<'a>(vals: impl Iterator<Item = &'a Rational>) -> Option<usize> {
    let mut best: Option<(usize, &Rational, usize)> = None; // (idx, val, count)
    for (i, v) in vals.enumerate() {
        best = match best {
            None => Some((i, v, 1)),
            Some((bi, bv, c)) => {
                if v < bv {
                    Some((i, v, 1))
                } else if v == bv {
                    Some((bi, bv, c + 1))
                } else {
                    Some((bi, bv, c))
                }
            }
        };
    }
    match best {
        Some((i, _, 1)) => Some(i),
        _ => None,
    }
}

/// Rebuilds the dictionary with an explicit subset choice that makes `v`
/// basic; only safe when v's partner currently sits at value zero.
fn rebuild_with_basic(
    data: &ProblemData,
    seq: &BaseSequence,
    dec: &Decomposition,
    vals: &BoundaryVals,
    freed: Option<StateVar>,
    v: BVar,
) -> Result<BoundaryDictionary, PivotError> {
    if !vals.value(dec, v.partner()).is_zero() {
        return Err(restart(format!(
            "shrunk variable {v} displaced by a nonzero partner"
        )));
    }
    let plan = dictionary_plan(data, seq, dec, freed)?;
    for choice in enumerate_choices(&plan.keq_open, &plan.jeq_open, plan.need_p) {
        let wanted = match v {
            BVar::XBul(k) => !choice.keq_dual.contains(&k),
            BVar::UN(j) => choice.jeq_primal.contains(&j),
            BVar::P0(k) => choice.keq_dual.contains(&k),
            BVar::QBul(j) => !choice.jeq_primal.contains(&j),
            _ => true,
        };
        if !wanted {
            continue;
        }
        if let Ok(d) = build_dictionary(data, seq, dec, vals, freed, Some(&choice)) {
            if d.row_of(v).is_some() || d.col_of(v).is_some() {
                return Ok(d);
            }
        }
    }
    Err(restart(format!("no dictionary choice makes {v} basic")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, rat};
    use crate::model::golden_data;
    use crate::structural::{decompose, golden_line, ratio_step};

    fn seq_n(n: usize) -> BaseSequence {
        let b12 = RatesBasis::new([0, 1], [0, 1]);
        match n {
            1 => BaseSequence {
                k0: [0, 1].into(),
                j0: [0, 1].into(),
                bases: vec![b12],
                kn1: [0, 1].into(),
                jn1: [0, 1].into(),
            },
            2 => BaseSequence {
                k0: [0, 1].into(),
                j0: [0].into(),
                bases: vec![b12],
                kn1: [0].into(),
                jn1: [0, 1].into(),
            },
            3 => BaseSequence {
                k0: [0].into(),
                j0: [0].into(),
                bases: vec![RatesBasis::new([0], [0]), b12],
                kn1: [0].into(),
                jn1: [0, 1].into(),
            },
            4 => BaseSequence {
                k0: [0].into(),
                j0: [0].into(),
                bases: vec![
                    RatesBasis::new([0], [0]),
                    RatesBasis::new([0], [1]),
                    b12,
                ],
                kn1: [0].into(),
                jn1: [0, 1].into(),
            },
            _ => unreachable!(),
        }
    }

    struct Region {
        rates: Vec<RatesSolution>,
        h_bar: SolutionH,
        dec: Decomposition,
        collision: Collision,
        theta_bar: Rational,
    }

    /// Solves a sequence on [θ_ℓ, θ̄] of the reference line and classifies
    /// the collision at θ̄.
    fn region(seq: &BaseSequence, theta_l: Rational) -> Region {
        let data = golden_data();
        let line = golden_line();
        let rates = sequence_rates(&data, seq).unwrap();
        let asm = assemble(&data, seq, &rates, &line.at(&theta_l)).unwrap();
        let h = solve_structure(&asm, &asm.r).unwrap();
        let dh = gradient(&asm, &rhs_vector(&data, seq, &line.delta())).unwrap();
        let (step, mset) = ratio_step(&h, &dh, &asm.hp);
        let theta_bar = theta_l + step.expect("bounded step");
        let asm_bar = assemble(&data, seq, &rates, &line.at(&theta_bar)).unwrap();
        let h_bar = solve_structure(&asm_bar, &asm_bar.r).unwrap();
        let dec = decompose(seq, &rates, &h_bar);
        let collision = classify_collision(&data, seq, &rates, &h_bar, &dec, &mset);
        Region {
            rates,
            h_bar,
            dec,
            collision,
            theta_bar,
        }
    }

    #[test]
    fn golden_pivot_one() {
        let data = golden_data();
        let line = golden_line();
        let seq = seq_n(1);
        let r = region(&seq, rat(0));
        assert_eq!(r.theta_bar, frac(2, 27));
        assert_eq!(r.collision.kind, CollisionKind::E);
        assert_eq!(r.collision.shrinking, vec![HComp::QT(1)]);

        let step = mclp_pivot(
            &data,
            &seq,
            &r.rates,
            &r.h_bar,
            &r.dec,
            &r.collision,
            &line.at(&r.theta_bar),
            &line.delta(),
        )
        .unwrap();
        let dict = step.dictionary.as_ref().unwrap();
        assert_eq!(
            dict.rows,
            vec![BVar::XBul(0), BVar::XBul(1), BVar::XT(0), BVar::XT(1)]
        );
        assert_eq!(
            dict.cols,
            vec![BVar::QT(0), BVar::QT(1), BVar::QBul(0), BVar::QBul(1)]
        );
        assert_eq!(
            dict.row_values,
            vec![rat(8), rat(10), frac(421, 54), frac(503, 54)]
        );
        assert_eq!(
            dict.col_values,
            vec![frac(17, 54), rat(0), frac(67, 54), frac(25, 27)]
        );
        let expect = [[5, 2, 0, 0], [3, 4, 0, 0], [5, 2, 5, 2], [3, 4, 3, 4]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dict.a_hat[(i, j)], rat(expect[i][j]));
            }
        }
        assert_eq!(step.ratio, Some(frac(503, 216)));
        assert_eq!(step.w_kind, CollisionKind::E);
        assert_eq!(step.new_seq, seq_n(2));
    }

    #[test]
    fn golden_pivot_two() {
        let data = golden_data();
        let line = golden_line();
        let seq = seq_n(2);
        let r = region(&seq, frac(2, 27));
        assert_eq!(r.theta_bar, frac(9, 29));
        assert_eq!(r.collision.kind, CollisionKind::E);
        assert_eq!(r.collision.shrinking, vec![HComp::X0(1)]);
        assert_eq!(r.dec.qtilde, vec![frac(20, 29), frac(40, 29)]);

        let step = mclp_pivot(
            &data,
            &seq,
            &r.rates,
            &r.h_bar,
            &r.dec,
            &r.collision,
            &line.at(&r.theta_bar),
            &line.delta(),
        )
        .unwrap();
        let dict = step.dictionary.as_ref().unwrap();
        assert_eq!(
            dict.rows,
            vec![BVar::XBul(0), BVar::XBul(1), BVar::XT(0), BVar::U0(1)]
        );
        assert_eq!(
            dict.cols,
            vec![BVar::QT(0), BVar::PN(1), BVar::QBul(0), BVar::QBul(1)]
        );
        assert_eq!(
            dict.row_values,
            vec![rat(3), rat(0), frac(127, 29), frac(5, 2)]
        );
        let expect = [
            [frac(7, 2), frac(-1, 2), frac(-3, 2), rat(-2)],
            [rat(0), rat(-1), rat(-3), rat(-4)],
            [frac(7, 2), frac(-1, 2), frac(7, 2), rat(0)],
            [frac(3, 4), frac(1, 4), frac(3, 4), rat(1)],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dict.a_hat[(i, j)], expect[i][j]);
            }
        }
        assert_eq!(step.ratio, Some(frac(5, 29)));
        assert_eq!(step.w_kind, CollisionKind::D);
        assert_eq!(step.new_seq, seq_n(3));
        assert!(step.description.contains("insert@0:({1},{1})"));
    }

    #[test]
    fn golden_pivot_three_is_internal() {
        let data = golden_data();
        let line = golden_line();
        let seq = seq_n(3);
        let r = region(&seq, frac(9, 29));
        assert_eq!(r.theta_bar, frac(2, 3));
        assert_eq!(r.collision.kind, CollisionKind::A);
        assert_eq!(r.collision.shrinking, vec![HComp::Q(1, 0)]);

        let step = mclp_pivot(
            &data,
            &seq,
            &r.rates,
            &r.h_bar,
            &r.dec,
            &r.collision,
            &line.at(&r.theta_bar),
            &line.delta(),
        )
        .unwrap();
        assert_eq!(step.new_seq, seq_n(4));
        assert_eq!(step.w_kind, CollisionKind::C);
        assert!(step.description.contains("insert@1:({1},{2})"));
    }

    #[test]
    fn golden_final_collision_is_multiple() {
        let seq = seq_n(4);
        let r = region(&seq, frac(2, 3));
        assert_eq!(r.theta_bar, rat(1));
        assert_eq!(r.collision.kind, CollisionKind::MultiplePre);
        // The shrinking set mixes intervals, boundary, and interior states.
        assert!(r.collision.shrinking.contains(&HComp::Tau(3)));
        assert!(r.collision.shrinking.contains(&HComp::P0(1)));
        assert!(r.collision.shrinking.contains(&HComp::X(3, 1)));
        assert!(r.collision.shrinking.contains(&HComp::QN(0)));
    }

    #[test]
    fn partner_map_is_involutive() {
        let data = golden_data();
        for v in [
            BVar::XBul(0),
            BVar::XT(1),
            BVar::U0(0),
            BVar::UN(1),
            BVar::QT(0),
            BVar::PN(1),
            BVar::QBul(0),
            BVar::P0(1),
        ] {
            assert_eq!(v.partner().partner(), v);
            assert_ne!(v.partner().is_primal(), v.is_primal());
        }
        // Tableau columns have the right dimensions.
        assert_eq!(primal_column(&data, BVar::U0(0)).len(), 4);
        assert_eq!(dual_column(&data, BVar::PN(0)).len(), 4);
    }

    #[test]
    fn choice_enumeration_counts() {
        let keq: BTreeSet<usize> = [0, 1].into();
        let jeq: BTreeSet<usize> = [0].into();
        // need_p = 1: (px,py) in {(0,1),(1,0)} -> C(2,2)*C(1,1) + C(2,1)*C(1,0) = 1 + 2.
        assert_eq!(enumerate_choices(&keq, &jeq, 1).len(), 3);
        let d = default_choice(&keq, &jeq, 1);
        assert_eq!(d.keq_dual, [0].into());
        assert!(d.jeq_primal.is_empty());
    }

    #[test]
    fn trivially_unbounded_ratio_is_error() {
        // A dictionary where the leaving variable's line has no candidate.
        let data = golden_data();
        let line = golden_line();
        let seq = seq_n(1);
        let rates = sequence_rates(&data, &seq).unwrap();
        let theta = rat(0);
        let asm = assemble(&data, &seq, &rates, &line.at(&theta)).unwrap();
        let h = solve_structure(&asm, &asm.r).unwrap();
        let dec = decompose(&seq, &rates, &h);
        let vals = BoundaryVals::from_h(&h);
        let dict = build_dictionary(&data, &seq, &dec, &vals, None, None).unwrap();
        // x-bullet rows have only nonnegative entries -> no ratio candidate.
        assert!(matches!(
            boundary_pivot(&dict, BVar::XBul(0)),
            Err(PivotError::NeedsRestart(_))
        ));
        // A nonbasic leaving variable is rejected.
        assert!(matches!(
            boundary_pivot(&dict, BVar::PN(0)),
            Err(PivotError::NeedsRestart(_))
        ));
    }

    #[test]
    fn insert_rejects_when_nothing_certifies() {
        // Inserting into the single-interval golden sequence at its left
        // endpoint certifies for no candidate: the solution is interior.
        let data = golden_data();
        let line = golden_line();
        let seq = seq_n(1);
        let res = insert_basis(
            &data,
            &seq.k0,
            &seq.j0,
            &seq.kn1,
            &seq.jn1,
            &seq.bases,
            1,
            &line.at(&rat(0)),
            &line.delta(),
        );
        assert_eq!(res.unwrap_err(), PivotError::SubproblemRequired);
    }

    #[test]
    fn classification_edge_cases() {
        let data = golden_data();
        let seq = seq_n(3);
        let r = region(&seq, frac(9, 29));
        // A full-span interval collision is a multiple collision.
        let layout = r.h_bar.layout;
        let mset = vec![
            layout.index(HComp::Tau(1)),
            layout.index(HComp::Tau(2)),
        ];
        let c = classify_collision(&data, &seq, &r.rates, &r.h_bar, &r.dec, &mset);
        assert_eq!(c.kind, CollisionKind::MultiplePre);
        // Non-consecutive intervals are a multiple collision.
        let seq4 = seq_n(4);
        let r4 = region(&seq4, frac(2, 3));
        let l4 = r4.h_bar.layout;
        let mset = vec![l4.index(HComp::Tau(1)), l4.index(HComp::Tau(3))];
        let c = classify_collision(&data, &seq4, &r4.rates, &r4.h_bar, &r4.dec, &mset);
        assert_eq!(c.kind, CollisionKind::MultiplePre);
    }
}
