/*!
Base sequences, the structure equations M·H = R, the H_Z/H_P partition,
decomposition parameters, solution evaluation, objectives, and the
optimality certificate.

A base sequence fixes the combinatorial shape of a candidate solution:
boundary index sets (K₀, J₀) and (K_{N+1}, J_{N+1}) plus a chain of N
internal rates bases. Substituting the piecewise-constant rates into the
boundary, breakpoint, and complementary-slackness conditions yields a
square linear system M·H = R in the unknown vector H (impulses, boundary
states, interval lengths, breakpoint states). The sequence is optimal at
parameters ρ exactly when the solved H is nonnegative on its free part.
*/

use crate::exact::{
    dot, format_rational, is_nonsingular, rat, solve_linear, zeros, RatMatrix, RatVector,
    Rational, SingularError,
};
use crate::model::{BoundaryParams, ProblemData};
use crate::rates::{adjacency, is_admissible, rates_for_basis, Adjacency, RateVar, RatesBasis,
    RatesSolution};
use num::{Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// A base sequence: boundary index sets plus the internal rates bases.
/// Index sets are 0-based internally; display is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSequence {
    pub k0: BTreeSet<usize>,
    pub j0: BTreeSet<usize>,
    pub bases: Vec<RatesBasis>,
    pub kn1: BTreeSet<usize>,
    pub jn1: BTreeSet<usize>,
}

impl BaseSequence {
    pub fn n(&self) -> usize {
        self.bases.len()
    }

    /// `(K0,J0),[B1,...,BN],(KN1,JN1)` in 1-based set notation.
    pub fn display(&self) -> String {
        let fmt_set = |s: &BTreeSet<usize>| {
            let items: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", items.join(","))
        };
        let inner: Vec<String> = self.bases.iter().map(|b| b.display()).collect();
        format!(
            "({},{}),[{}],({},{})",
            fmt_set(&self.k0),
            fmt_set(&self.j0),
            inner.join(","),
            fmt_set(&self.kn1),
            fmt_set(&self.jn1)
        )
    }

    /// Parses the `display` notation back (lossless round-trip).
    pub fn parse(s: &str) -> Option<BaseSequence> {
        // Split into "(..,..)", "[...]", "(..,..)" at the top level.
        let s = s.trim();
        let open = s.find('[')?;
        let close = s.rfind(']')?;
        let head = s[..open].trim().trim_end_matches(',');
        let tail = s[close + 1..].trim().trim_start_matches(',');
        let inner = &s[open + 1..close];
        let (k0, j0) = parse_pair(head)?;
        let (kn1, jn1) = parse_pair(tail)?;
        let mut bases = Vec::new();
        for part in split_top_level(inner) {
            let (ks, js) = parse_pair(&part)?;
            bases.push(RatesBasis { kset: ks, jset: js });
        }
        Some(BaseSequence {
            k0,
            j0,
            bases,
            kn1,
            jn1,
        })
    }
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                if !cur.trim().is_empty() {
                    out.push(cur.trim().to_string());
                }
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_set(s: &str) -> Option<BTreeSet<usize>> {
    let body = s.trim().strip_prefix('{')?.strip_suffix('}')?;
    let mut out = BTreeSet::new();
    for tok in body.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let v: usize = tok.parse().ok()?;
        if v == 0 {
            return None;
        }
        out.insert(v - 1);
    }
    Some(out)
}

fn parse_pair(s: &str) -> Option<(BTreeSet<usize>, BTreeSet<usize>)> {
    let body = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let mid = body.find("},{")?;
    let a = parse_set(&body[..mid + 1])?;
    let b = parse_set(&body[mid + 2..])?;
    Some((a, b))
}

/// Identity of a component of the unknown vector H. Interval and
/// breakpoint indices follow the solution's numbering: `Tau(n)` and
/// `X(n, k)` with n ∈ 1..=N, `Q(n, j)` with n ∈ 0..=N-1; variable indices
/// k, j are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HComp {
    /// Impulse U(0).
    U0(usize),
    /// Initial state x(0).
    X0(usize),
    /// Dual impulse P(0).
    PN(usize),
    /// Dual boundary state q(0).
    QN(usize),
    /// Interval length τ_n, n ∈ 1..=N.
    Tau(usize),
    /// Breakpoint state x(t_n), n ∈ 1..=N (n = N is x(T-)).
    X(usize, usize),
    /// Dual breakpoint state q(T - t_n), n ∈ 0..=N-1 (n = 0 is q(T-)).
    Q(usize, usize),
    /// Impulse U(T) - U(T-).
    UN(usize),
    /// Terminal state x(T).
    XT(usize),
    /// Dual impulse P(T) - P(T-).
    P0(usize),
    /// Dual terminal state q(T).
    QT(usize),
}

impl fmt::Display for HComp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HComp::U0(j) => write!(f, "u0[{}]", j + 1),
            HComp::X0(k) => write!(f, "x0[{}]", k + 1),
            HComp::PN(k) => write!(f, "pN[{}]", k + 1),
            HComp::QN(j) => write!(f, "qN[{}]", j + 1),
            HComp::Tau(n) => write!(f, "tau[{n}]"),
            HComp::X(n, k) => write!(f, "x{}[{}]", n, k + 1),
            HComp::Q(n, j) => write!(f, "q{}[{}]", n, j + 1),
            HComp::UN(j) => write!(f, "uN[{}]", j + 1),
            HComp::XT(k) => write!(f, "xT[{}]", k + 1),
            HComp::P0(k) => write!(f, "p0[{}]", k + 1),
            HComp::QT(j) => write!(f, "qT[{}]", j + 1),
        }
    }
}

impl HComp {
    /// Parses the `Display` form back.
    pub fn parse(s: &str) -> Option<HComp> {
        let s = s.trim();
        let bracket = s.find('[')?;
        let name = &s[..bracket];
        let idx: usize = s[bracket + 1..].strip_suffix(']')?.parse().ok()?;
        match name {
            "u0" => Some(HComp::U0(idx.checked_sub(1)?)),
            "x0" => Some(HComp::X0(idx.checked_sub(1)?)),
            "pN" => Some(HComp::PN(idx.checked_sub(1)?)),
            "qN" => Some(HComp::QN(idx.checked_sub(1)?)),
            "tau" => Some(HComp::Tau(idx)),
            "uN" => Some(HComp::UN(idx.checked_sub(1)?)),
            "xT" => Some(HComp::XT(idx.checked_sub(1)?)),
            "p0" => Some(HComp::P0(idx.checked_sub(1)?)),
            "qT" => Some(HComp::QT(idx.checked_sub(1)?)),
            _ => {
                let n: usize = name.get(1..)?.parse().ok()?;
                match &name[..1] {
                    "x" => Some(HComp::X(n, idx.checked_sub(1)?)),
                    "q" => Some(HComp::Q(n, idx.checked_sub(1)?)),
                    _ => None,
                }
            }
        }
    }
}

/// Index layout of H for a problem of dimensions (K, J) and N intervals.
/// Component order: 𝐮⁰, x⁰, 𝐩ᴺ, qᴺ, τ, x¹..xᴺ, q⁰..q^{N-1}, 𝐮ᴺ, 𝐱ᴺ, 𝐩⁰, 𝐪⁰.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HLayout {
    pub k: usize,
    pub j: usize,
    pub n: usize,
}

impl HLayout {
    pub fn dim(&self) -> usize {
        (self.k + self.j) * (self.n + 4) + self.n
    }

    pub fn index(&self, c: HComp) -> usize {
        let (k, j, n) = (self.k, self.j, self.n);
        match c {
            HComp::U0(jj) => jj,
            HComp::X0(kk) => j + kk,
            HComp::PN(kk) => j + k + kk,
            HComp::QN(jj) => j + 2 * k + jj,
            HComp::Tau(nn) => {
                assert!((1..=n).contains(&nn));
                2 * j + 2 * k + (nn - 1)
            }
            HComp::X(nn, kk) => {
                assert!((1..=n).contains(&nn));
                2 * j + 2 * k + n + (nn - 1) * k + kk
            }
            HComp::Q(nn, jj) => {
                assert!(nn < n);
                2 * j + 2 * k + n + n * k + nn * j + jj
            }
            HComp::UN(jj) => 2 * j + 2 * k + n + n * (k + j) + jj,
            HComp::XT(kk) => 3 * j + 2 * k + n + n * (k + j) + kk,
            HComp::P0(kk) => 3 * j + 3 * k + n + n * (k + j) + kk,
            HComp::QT(jj) => 3 * j + 4 * k + n + n * (k + j) + jj,
        }
    }

    pub fn comp(&self, idx: usize) -> HComp {
        let (k, j, n) = (self.k, self.j, self.n);
        let mut i = idx;
        if i < j {
            return HComp::U0(i);
        }
        i -= j;
        if i < k {
            return HComp::X0(i);
        }
        i -= k;
        if i < k {
            return HComp::PN(i);
        }
        i -= k;
        if i < j {
            return HComp::QN(i);
        }
        i -= j;
        if i < n {
            return HComp::Tau(i + 1);
        }
        i -= n;
        if i < n * k {
            return HComp::X(i / k + 1, i % k);
        }
        i -= n * k;
        if i < n * j {
            return HComp::Q(i / j, i % j);
        }
        i -= n * j;
        if i < j {
            return HComp::UN(i);
        }
        i -= j;
        if i < k {
            return HComp::XT(i);
        }
        i -= k;
        if i < k {
            return HComp::P0(i);
        }
        i -= k;
        assert!(i < j, "component index out of range");
        HComp::QT(i)
    }
}

/// Why a sequence is not proper (or cannot be assembled).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImproperSequence {
    #[error("internal basis {n} violates the basis size invariant")]
    BadBasisSize { n: usize },
    #[error("internal basis {n} has a singular rates system")]
    SingularRates { n: usize },
    #[error("internal basis {n} is inadmissible")]
    Inadmissible { n: usize },
    #[error("internal bases {n} and {m} are not adjacent", m = n + 1)]
    NotAdjacent { n: usize },
    #[error("boundary sets are not compatible with the internal bases")]
    NotCompatible,
    #[error("empty internal sequence")]
    Empty,
}

/// Computes the rates of every internal basis and checks that the sequence
/// is proper: admissible, adjacent, and compatible (K₀ ⊆ K₁, J_{N+1} ⊆ J_N).
pub fn sequence_rates(
    data: &ProblemData,
    seq: &BaseSequence,
) -> Result<Vec<RatesSolution>, ImproperSequence> {
    if seq.bases.is_empty() {
        return Err(ImproperSequence::Empty);
    }
    let mut out = Vec::with_capacity(seq.n());
    for (i, b) in seq.bases.iter().enumerate() {
        if !b.size_ok(data.k, data.j) {
            return Err(ImproperSequence::BadBasisSize { n: i + 1 });
        }
        let sol =
            rates_for_basis(data, b).map_err(|_| ImproperSequence::SingularRates { n: i + 1 })?;
        if !is_admissible(&sol) {
            return Err(ImproperSequence::Inadmissible { n: i + 1 });
        }
        out.push(sol);
    }
    for i in 0..seq.n() - 1 {
        if adjacency(&seq.bases[i], &seq.bases[i + 1], data.j) == Adjacency::NotAdjacent {
            return Err(ImproperSequence::NotAdjacent { n: i + 1 });
        }
    }
    let first = &seq.bases[0];
    let last = &seq.bases[seq.n() - 1];
    if !seq.k0.is_subset(&first.kset) || !seq.jn1.is_subset(&last.jset) {
        return Err(ImproperSequence::NotCompatible);
    }
    Ok(out)
}

/// The leaving variable between consecutive bases B_n and B_{n+1}
/// (primal-basic in B_n only).
pub fn leaving_variable(seq: &BaseSequence, n: usize, j_total: usize) -> Option<RateVar> {
    match adjacency(&seq.bases[n - 1], &seq.bases[n], j_total) {
        Adjacency::Pivot { leaving, .. } => Some(leaving),
        Adjacency::NotAdjacent => None,
    }
}

/// The assembled structure system.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub m: RatMatrix,
    pub r: RatVector,
    pub layout: HLayout,
    /// Indices of H forced to zero by the sequence.
    pub hz: Vec<usize>,
    /// The complementary indices, required nonnegative.
    pub hp: Vec<usize>,
}

/// Builds the right-hand side R = (β, 0, 0, γ, 0, 0, 0, T, 0, 0, λ, 0, 0,
/// μ, 0, 0) for the given parameters. Linear in ρ, so it also produces the
/// gradient δR when handed a parameter difference.
pub fn rhs_vector(data: &ProblemData, seq: &BaseSequence, rho: &BoundaryParams) -> RatVector {
    let (k, j, n) = (data.k, data.j, seq.n());
    let mut r = Vec::with_capacity((k + j) * (n + 4) + n);
    r.extend(rho.beta.iter().cloned()); // (1)
    r.extend(zeros(seq.j0.len())); // (2)
    r.extend(zeros(k - seq.k0.len())); // (3)
    r.extend(rho.gamma.iter().cloned()); // (4)
    r.extend(zeros(seq.kn1.len())); // (5)
    r.extend(zeros(j - seq.jn1.len())); // (6)
    r.extend(zeros(n - 1)); // (7)
    r.push(rho.t.clone()); // (8)
    r.extend(zeros(n * k)); // (9)
    r.extend(zeros(n * j)); // (10)
    r.extend(rho.lambda.iter().cloned()); // (11)
    r.extend(zeros(seq.jn1.len())); // (12)
    r.extend(zeros(k - seq.kn1.len())); // (13)
    r.extend(rho.mu.iter().cloned()); // (14)
    r.extend(zeros(seq.k0.len())); // (15)
    r.extend(zeros(j - seq.j0.len())); // (16)
    r
}

/// Assembles M, R, and the H_Z/H_P partition for a proper sequence.
pub fn assemble(
    data: &ProblemData,
    seq: &BaseSequence,
    rates: &[RatesSolution],
    rho: &BoundaryParams,
) -> Result<Assembly, ImproperSequence> {
    let (k, j, n) = (data.k, data.j, seq.n());
    assert_eq!(rates.len(), n, "rates must match the internal bases");
    let layout = HLayout { k, j, n };
    let dim = layout.dim();
    let mut m = RatMatrix::zeros(dim, dim);
    let mut row = 0usize;
    let put = |m: &mut RatMatrix, row: usize, c: HComp, v: Rational| {
        m[(row, layout.index(c))] = v;
    };

    // (1) A·u0 + x0 = beta.
    for kk in 0..k {
        for jj in 0..j {
            put(&mut m, row, HComp::U0(jj), data.a[(kk, jj)].clone());
        }
        put(&mut m, row, HComp::X0(kk), rat(1));
        row += 1;
    }
    // (2) u0_j = 0 for j in J0.
    for &jj in &seq.j0 {
        put(&mut m, row, HComp::U0(jj), rat(1));
        row += 1;
    }
    // (3) x0_k = 0 for k not in K0.
    for kk in 0..k {
        if !seq.k0.contains(&kk) {
            put(&mut m, row, HComp::X0(kk), rat(1));
            row += 1;
        }
    }
    // (4) A'·pN - qN = gamma.
    for jj in 0..j {
        for kk in 0..k {
            put(&mut m, row, HComp::PN(kk), data.a[(kk, jj)].clone());
        }
        put(&mut m, row, HComp::QN(jj), rat(-1));
        row += 1;
    }
    // (5) pN_k = 0 for k in KN1.
    for &kk in &seq.kn1 {
        put(&mut m, row, HComp::PN(kk), rat(1));
        row += 1;
    }
    // (6) qN_j = 0 for j not in JN1.
    for jj in 0..j {
        if !seq.jn1.contains(&jj) {
            put(&mut m, row, HComp::QN(jj), rat(1));
            row += 1;
        }
    }
    // (7) Breakpoint equations keyed on the leaving variable v_n.
    for nn in 1..n {
        match leaving_variable(seq, nn, j).ok_or(ImproperSequence::NotAdjacent { n: nn })? {
            RateVar::Xdot(kk) => {
                // x0_k + sum_{m<=n} xdot^m_k tau_m = 0.
                put(&mut m, row, HComp::X0(kk), rat(1));
                for mm in 1..=nn {
                    put(&mut m, row, HComp::Tau(mm), rates[mm - 1].xdot[kk].clone());
                }
            }
            RateVar::U(jj) => {
                // qN_j + sum_{m>n} qdot^m_j tau_m = 0.
                put(&mut m, row, HComp::QN(jj), rat(1));
                for mm in nn + 1..=n {
                    put(&mut m, row, HComp::Tau(mm), rates[mm - 1].qdot[jj].clone());
                }
            }
            _ => unreachable!("leaving variable is primal-basic"),
        }
        row += 1;
    }
    // (8) sum tau = T.
    for nn in 1..=n {
        put(&mut m, row, HComp::Tau(nn), rat(1));
    }
    row += 1;
    // (9) x^n_k - x0_k - sum_{m<=n} xdot^m_k tau_m = 0.
    for nn in 1..=n {
        for kk in 0..k {
            put(&mut m, row, HComp::X(nn, kk), rat(1));
            put(&mut m, row, HComp::X0(kk), rat(-1));
            for mm in 1..=nn {
                put(&mut m, row, HComp::Tau(mm), -rates[mm - 1].xdot[kk].clone());
            }
            row += 1;
        }
    }
    // (10) q^n_j - qN_j - sum_{m>n} qdot^m_j tau_m = 0.
    for nn in 0..n {
        for jj in 0..j {
            put(&mut m, row, HComp::Q(nn, jj), rat(1));
            put(&mut m, row, HComp::QN(jj), rat(-1));
            for mm in nn + 1..=n {
                put(&mut m, row, HComp::Tau(mm), -rates[mm - 1].qdot[jj].clone());
            }
            row += 1;
        }
    }
    // (11) A·uN + xT - x^N = lambda.
    for kk in 0..k {
        for jj in 0..j {
            put(&mut m, row, HComp::UN(jj), data.a[(kk, jj)].clone());
        }
        put(&mut m, row, HComp::XT(kk), rat(1));
        put(&mut m, row, HComp::X(n, kk), rat(-1));
        row += 1;
    }
    // (12) uN_j = 0 for j in JN1.
    for &jj in &seq.jn1 {
        put(&mut m, row, HComp::UN(jj), rat(1));
        row += 1;
    }
    // (13) xT_k = 0 for k not in KN1.
    for kk in 0..k {
        if !seq.kn1.contains(&kk) {
            put(&mut m, row, HComp::XT(kk), rat(1));
            row += 1;
        }
    }
    // (14) A'·p0 - qT + q^0 = mu.
    for jj in 0..j {
        for kk in 0..k {
            put(&mut m, row, HComp::P0(kk), data.a[(kk, jj)].clone());
        }
        put(&mut m, row, HComp::QT(jj), rat(-1));
        put(&mut m, row, HComp::Q(0, jj), rat(1));
        row += 1;
    }
    // (15) p0_k = 0 for k in K0.
    for &kk in &seq.k0 {
        put(&mut m, row, HComp::P0(kk), rat(1));
        row += 1;
    }
    // (16) qT_j = 0 for j not in J0.
    for jj in 0..j {
        if !seq.j0.contains(&jj) {
            put(&mut m, row, HComp::QT(jj), rat(1));
            row += 1;
        }
    }
    assert_eq!(row, dim, "row count must equal the H dimension");

    // H_Z: the 2K+2J boundary zeros, the breakpoint-equation targets, and
    // the implied zero breakpoint states.
    let mut hz: BTreeSet<usize> = BTreeSet::new();
    for &jj in &seq.j0 {
        hz.insert(layout.index(HComp::U0(jj)));
    }
    for kk in (0..k).filter(|kk| !seq.k0.contains(kk)) {
        hz.insert(layout.index(HComp::X0(kk)));
    }
    for &kk in &seq.kn1 {
        hz.insert(layout.index(HComp::PN(kk)));
    }
    for jj in (0..j).filter(|jj| !seq.jn1.contains(jj)) {
        hz.insert(layout.index(HComp::QN(jj)));
    }
    for &jj in &seq.jn1 {
        hz.insert(layout.index(HComp::UN(jj)));
    }
    for kk in (0..k).filter(|kk| !seq.kn1.contains(kk)) {
        hz.insert(layout.index(HComp::XT(kk)));
    }
    for &kk in &seq.k0 {
        hz.insert(layout.index(HComp::P0(kk)));
    }
    for jj in (0..j).filter(|jj| !seq.j0.contains(jj)) {
        hz.insert(layout.index(HComp::QT(jj)));
    }
    for nn in 1..n {
        match leaving_variable(seq, nn, j).unwrap() {
            RateVar::Xdot(kk) => {
                hz.insert(layout.index(HComp::X(nn, kk)));
            }
            RateVar::U(jj) => {
                hz.insert(layout.index(HComp::Q(nn, jj)));
            }
            _ => unreachable!(),
        }
    }
    for nn in 1..=n {
        for kk in 0..k {
            if !seq.bases[nn - 1].kset.contains(&kk) {
                hz.insert(layout.index(HComp::X(nn, kk)));
            }
        }
    }
    for nn in 0..n {
        for jj in 0..j {
            if !seq.bases[nn].jset.contains(&jj) {
                hz.insert(layout.index(HComp::Q(nn, jj)));
            }
        }
    }
    let hp: Vec<usize> = (0..dim).filter(|i| !hz.contains(i)).collect();

    Ok(Assembly {
        m,
        r: rhs_vector(data, seq, rho),
        layout,
        hz: hz.into_iter().collect(),
        hp,
    })
}

/// The solved unknown vector with its layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionH {
    pub layout: HLayout,
    pub values: RatVector,
}

impl SolutionH {
    pub fn get(&self, c: HComp) -> &Rational {
        &self.values[self.layout.index(c)]
    }

    fn slice(&self, f: impl Fn(usize) -> HComp, len: usize) -> RatVector {
        (0..len).map(|i| self.get(f(i)).clone()).collect()
    }

    pub fn u0(&self) -> RatVector {
        self.slice(HComp::U0, self.layout.j)
    }
    pub fn x0(&self) -> RatVector {
        self.slice(HComp::X0, self.layout.k)
    }
    pub fn pn(&self) -> RatVector {
        self.slice(HComp::PN, self.layout.k)
    }
    pub fn qn(&self) -> RatVector {
        self.slice(HComp::QN, self.layout.j)
    }
    pub fn tau(&self) -> RatVector {
        (1..=self.layout.n)
            .map(|n| self.get(HComp::Tau(n)).clone())
            .collect()
    }
    pub fn x_bp(&self, n: usize) -> RatVector {
        self.slice(|k| HComp::X(n, k), self.layout.k)
    }
    pub fn q_bp(&self, n: usize) -> RatVector {
        self.slice(|j| HComp::Q(n, j), self.layout.j)
    }
    pub fn un(&self) -> RatVector {
        self.slice(HComp::UN, self.layout.j)
    }
    pub fn xt(&self) -> RatVector {
        self.slice(HComp::XT, self.layout.k)
    }
    pub fn p0(&self) -> RatVector {
        self.slice(HComp::P0, self.layout.k)
    }
    pub fn qt(&self) -> RatVector {
        self.slice(HComp::QT, self.layout.j)
    }

    /// Breakpoints t_0 = 0, t_1, ..., t_N (cumulative interval lengths).
    pub fn breakpoints(&self) -> RatVector {
        let mut out = vec![Rational::zero()];
        let mut acc = Rational::zero();
        for t in self.tau() {
            acc += t;
            out.push(acc.clone());
        }
        out
    }
}

/// Solves M·H = R exactly.
pub fn solve_structure(assembly: &Assembly, r: &RatVector) -> Result<SolutionH, SingularError> {
    Ok(SolutionH {
        layout: assembly.layout,
        values: solve_linear(&assembly.m, r)?,
    })
}

/// The θ-gradient δH solving M·δH = δR; structurally identical to
/// [`solve_structure`].
pub fn gradient(assembly: &Assembly, dr: &RatVector) -> Result<SolutionH, SingularError> {
    solve_structure(assembly, dr)
}

/// Right endpoint of the validity region: the largest step Δ̄ with
/// H + Δ·δH ≥ 0 on H_P. Returns `(None, ...)` for Δ̄ = +∞ and the argmax
/// set 𝓜 of components attaining the bound. Components with H_r = 0 and
/// δH_r ≥ 0 (left endpoints of regions) do not constrain; H_r = 0 with
/// δH_r < 0 yields Δ̄ = 0.
pub fn ratio_step(
    h: &SolutionH,
    dh: &SolutionH,
    hp: &[usize],
) -> (Option<Rational>, Vec<usize>) {
    let mut best: Option<Rational> = None;
    let mut argmax: Vec<usize> = Vec::new();
    for &r in hp {
        let hv = &h.values[r];
        let dv = &dh.values[r];
        if hv.is_zero() {
            if dv.is_negative() {
                // Immediately leaving the region.
                return (Some(Rational::zero()), vec![r]);
            }
            continue;
        }
        let ratio = -(dv / hv); // 1/Δ candidate
        if !ratio.is_positive() {
            continue;
        }
        match &best {
            Some(b) if ratio < *b => {}
            Some(b) if ratio == *b => argmax.push(r),
            _ => {
                best = Some(ratio);
                argmax = vec![r];
            }
        }
    }
    match best {
        Some(b) => (Some(rat(1) / b), argmax),
        None => (None, vec![]),
    }
}

/// Breakpoint values x^0..x^N generated by x0 and the interval slopes.
pub fn x_breakpoint_values(
    x0: &RatVector,
    rates: &[RatesSolution],
    tau: &[Rational],
) -> Vec<RatVector> {
    let mut out = vec![x0.clone()];
    let mut cur = x0.clone();
    for (sol, t) in rates.iter().zip(tau) {
        for (c, xd) in cur.iter_mut().zip(&sol.xdot) {
            *c += xd * t;
        }
        out.push(cur.clone());
    }
    out
}

/// Breakpoint values q^0..q^N generated backwards from q^N = qN.
pub fn q_breakpoint_values(
    qn: &RatVector,
    rates: &[RatesSolution],
    tau: &[Rational],
) -> Vec<RatVector> {
    let n = rates.len();
    let mut out = vec![qn.clone(); n + 1];
    let mut cur = qn.clone();
    for m in (0..n).rev() {
        for (c, qd) in cur.iter_mut().zip(&rates[m].qdot) {
            *c += qd * &tau[m];
        }
        out[m] = cur.clone();
    }
    out
}

/// Decomposition parameters splitting the solution into an interior part
/// and Boundary-LP parts, with the tied/free classification of boundary
/// states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Running-minimum deficit of the x trajectory.
    pub xtilde: RatVector,
    /// Running-minimum deficit of the q trajectory.
    pub qtilde: RatVector,
    /// Cumulative interior control Ũ = Σ u^n τ_n.
    pub ubar: RatVector,
    /// Cumulative interior dual control P̃ = Σ p^n τ_n.
    pub pbar: RatVector,
    /// x• = x0 - x̃.
    pub xbul: RatVector,
    /// q• = qN - q̃.
    pub qbul: RatVector,
    /// Tied initial states: k ∈ K₀ leaving the basis somewhere inside.
    pub keq: BTreeSet<usize>,
    /// Free initial states K₀ \ K⁼.
    pub kup: BTreeSet<usize>,
    /// Tied terminal dual states.
    pub jeq: BTreeSet<usize>,
    /// Free terminal dual states J_{N+1} \ J⁼.
    pub jup: BTreeSet<usize>,
}

/// Computes the decomposition from boundary values, rates, and interval
/// lengths (taken from `h`).
pub fn decompose(seq: &BaseSequence, rates: &[RatesSolution], h: &SolutionH) -> Decomposition {
    decompose_from_parts(seq, rates, &h.x0(), &h.qn(), &h.tau())
}

/// Decomposition from explicit parts; also used on intermediate sequences
/// during pivots, where no assembled H exists.
pub fn decompose_from_parts(
    seq: &BaseSequence,
    rates: &[RatesSolution],
    x0: &RatVector,
    qn: &RatVector,
    tau: &[Rational],
) -> Decomposition {
    let k = x0.len();
    let j = qn.len();
    let n = rates.len();

    // x̃_k = -min over 0<=m<=n of the partial slope sums.
    let mut xtilde = zeros(k);
    for kk in 0..k {
        let mut acc = Rational::zero();
        let mut min = Rational::zero();
        for (sol, t) in rates.iter().zip(tau) {
            acc += &sol.xdot[kk] * t;
            if acc < min {
                min = acc.clone();
            }
        }
        xtilde[kk] = -min;
    }
    // q̃_j = -min(0, suffix sums of qdot slopes).
    let mut qtilde = zeros(j);
    for jj in 0..j {
        let mut acc = Rational::zero();
        let mut min = Rational::zero();
        for m in (0..n).rev() {
            acc += &rates[m].qdot[jj] * &tau[m];
            if acc < min {
                min = acc.clone();
            }
        }
        qtilde[jj] = -min;
    }
    let mut ubar = zeros(j);
    let mut pbar = zeros(k);
    for (sol, t) in rates.iter().zip(tau) {
        for (acc, v) in ubar.iter_mut().zip(&sol.u) {
            *acc += v * t;
        }
        for (acc, v) in pbar.iter_mut().zip(&sol.p) {
            *acc += v * t;
        }
    }
    let xbul: RatVector = x0.iter().zip(&xtilde).map(|(a, b)| a - b).collect();
    let qbul: RatVector = qn.iter().zip(&qtilde).map(|(a, b)| a - b).collect();

    let keq: BTreeSet<usize> = seq
        .k0
        .iter()
        .copied()
        .filter(|kk| seq.bases.iter().any(|b| !b.kset.contains(kk)))
        .collect();
    let kup: BTreeSet<usize> = seq.k0.difference(&keq).copied().collect();
    let jeq: BTreeSet<usize> = seq
        .jn1
        .iter()
        .copied()
        .filter(|jj| seq.bases.iter().any(|b| !b.jset.contains(jj)))
        .collect();
    let jup: BTreeSet<usize> = seq.jn1.difference(&jeq).copied().collect();

    Decomposition {
        xtilde,
        qtilde,
        ubar,
        pbar,
        xbul,
        qbul,
        keq,
        kup,
        jeq,
        jup,
    }
}

/// Pointwise values of the solution at time t.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// x(t); at t = T this is the jump value x(T).
    pub x: RatVector,
    /// q(T-t); at t = 0 this is the jump value q(T).
    pub q: RatVector,
    /// Cumulative control U(t); at t = T it includes the terminal impulse.
    pub u_cum: RatVector,
    /// Cumulative dual control P(T-t); at t = 0 it includes P's terminal
    /// impulse.
    pub p_cum: RatVector,
}

/// Evaluation error: t outside [0, T].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("time {t} outside [0, {horizon}]")]
pub struct EvalError {
    pub t: String,
    pub horizon: String,
}

/// Evaluates states and cumulative controls at t ∈ [0, T]. States are
/// right-continuous; the dual pair is reported in reversed time (q(T-t),
/// P(T-t)) so that t = 0 carries the dual jump values.
pub fn evaluate(
    rates: &[RatesSolution],
    h: &SolutionH,
    t: &Rational,
) -> Result<Evaluation, EvalError> {
    let bps = h.breakpoints();
    let horizon = bps.last().unwrap().clone();
    if t.is_negative() || *t > horizon {
        return Err(EvalError {
            t: format_rational(t),
            horizon: format_rational(&horizon),
        });
    }
    let n = rates.len();

    // x(t).
    let x = if *t == horizon {
        h.xt()
    } else {
        // First interval with t < t_n.
        let nn = (1..=n).find(|&m| *t < bps[m]).expect("t < T");
        let base = if nn == 1 { h.x0() } else { h.x_bp(nn - 1) };
        base.iter()
            .zip(&rates[nn - 1].xdot)
            .map(|(b, s)| b + s * (t - &bps[nn - 1]))
            .collect()
    };

    // q(T-t).
    let q = if t.is_zero() {
        h.qt()
    } else {
        // First interval with t <= t_n.
        let nn = (1..=n).find(|&m| *t <= bps[m]).expect("t <= T");
        let end = if nn == n { h.qn() } else { h.q_bp(nn) };
        end.iter()
            .zip(&rates[nn - 1].qdot)
            .map(|(e, s)| e + s * (&bps[nn] - t))
            .collect()
    };

    // U(t) = u0 + integral of u over [0, t] (+ uN at t = T).
    let mut u_cum = h.u0();
    for m in 0..n {
        let lo = &bps[m];
        let hi = if *t < bps[m + 1] { t } else { &bps[m + 1] };
        if hi > lo {
            let span = hi - lo;
            for (acc, v) in u_cum.iter_mut().zip(&rates[m].u) {
                *acc += v * &span;
            }
        }
    }
    if *t == horizon {
        for (acc, v) in u_cum.iter_mut().zip(&h.un()) {
            *acc += v;
        }
    }

    // P(T-t) = pN + integral of p over dual time (+ p0 at t = 0).
    let mut p_cum = h.pn();
    for m in 0..n {
        let hi = &bps[m + 1];
        let lo = if *t > bps[m] { t } else { &bps[m] };
        if hi > lo {
            let span = hi - lo;
            for (acc, v) in p_cum.iter_mut().zip(&rates[m].p) {
                *acc += v * &span;
            }
        }
    }
    if t.is_zero() {
        for (acc, v) in p_cum.iter_mut().zip(&h.p0()) {
            *acc += v;
        }
    }
    Ok(Evaluation { x, q, u_cum, p_cum })
}

/// Both objective values, computed symbolically: the integrals reduce to
/// finite sums over intervals and the four impulse atoms.
pub fn objectives(
    data: &ProblemData,
    rates: &[RatesSolution],
    h: &SolutionH,
    rho: &BoundaryParams,
) -> (Rational, Rational) {
    let bps = h.breakpoints();
    let n = rates.len();
    let two = rat(2);

    // Primal: (mu + gamma + cT)'u0 + gamma'uN
    //         + sum_n u^n . (gamma + c(T - mid_n)) tau_n.
    let mut primal = Rational::zero();
    for jj in 0..data.j {
        let coef = &rho.mu[jj] + &rho.gamma[jj] + &data.c[jj] * &rho.t;
        primal += coef * h.get(HComp::U0(jj));
        primal += &rho.gamma[jj] * h.get(HComp::UN(jj));
    }
    for m in 0..n {
        let taum = &bps[m + 1] - &bps[m];
        if taum.is_zero() {
            continue;
        }
        let mid = (&bps[m] + &bps[m + 1]) / &two;
        for jj in 0..data.j {
            let coef = &rho.gamma[jj] + &data.c[jj] * (&rho.t - &mid);
            primal += coef * &rates[m].u[jj] * &taum;
        }
    }

    // Dual: (lambda + beta + bT)'pN + beta'p0
    //       + sum_n p^n . (beta + b·mid_n) tau_n.
    let mut dual = Rational::zero();
    for kk in 0..data.k {
        let coef = &rho.lambda[kk] + &rho.beta[kk] + &data.b[kk] * &rho.t;
        dual += coef * h.get(HComp::PN(kk));
        dual += &rho.beta[kk] * h.get(HComp::P0(kk));
    }
    for m in 0..n {
        let taum = &bps[m + 1] - &bps[m];
        if taum.is_zero() {
            continue;
        }
        let mid = (&bps[m] + &bps[m + 1]) / &two;
        for kk in 0..data.k {
            let coef = &rho.beta[kk] + &data.b[kk] * &mid;
            dual += coef * &rates[m].p[kk] * &taum;
        }
    }
    (primal, dual)
}

/// The exact complementary-slackness integrals ∫ x(T-s)'dP(s) and
/// ∫ q(T-t)'dU(t); both must vanish at optimality.
pub fn slackness_sums(rates: &[RatesSolution], h: &SolutionH) -> (Rational, Rational) {
    let n = rates.len();
    let tau = h.tau();
    let xs = x_breakpoint_values(&h.x0(), rates, &tau);
    let qs = q_breakpoint_values(&h.qn(), rates, &tau);
    let two = rat(2);

    // ∫ x(T-s)'dP = xT'pN + x0'p0 + sum_n p^n . (x^{n-1}+x^n)/2 tau_n.
    let mut xdp = dot(&h.xt(), &h.pn()) + dot(&h.x0(), &h.p0());
    for m in 0..n {
        for kk in 0..h.layout.k {
            let avg = (&xs[m][kk] + &xs[m + 1][kk]) / &two;
            xdp += avg * &rates[m].p[kk] * &tau[m];
        }
    }
    // ∫ q(T-t)'dU = qT'u0 + qN'uN + sum_n u^n . (q^{n-1}+q^n)/2 tau_n.
    let mut qdu = dot(&h.qt(), &h.u0()) + dot(&h.qn(), &h.un());
    for m in 0..n {
        for jj in 0..h.layout.j {
            let avg = (&qs[m][jj] + &qs[m + 1][jj]) / &two;
            qdu += avg * &rates[m].u[jj] * &tau[m];
        }
    }
    (xdp, qdu)
}

/// A verified optimality certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub primal_objective: Rational,
    pub dual_objective: Rational,
    /// Number of zero values among the 4(K+J) boundary components
    /// (2(K+J) exactly at interior points of validity regions).
    pub boundary_zero_count: usize,
}

/// A named certification failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("optimality violation at {component}: {detail}")]
pub struct Violation {
    pub component: String,
    pub detail: String,
}

fn violation(component: impl fmt::Display, detail: &str) -> Violation {
    Violation {
        component: component.to_string(),
        detail: detail.to_string(),
    }
}

/// Verifies optimality exactly: H_Z = 0, H_P ≥ 0, rates residuals,
/// boundary and state equations, Στ = T, complementary slackness sums = 0,
/// and primal objective = dual objective.
pub fn certify_optimal(
    data: &ProblemData,
    seq: &BaseSequence,
    rates: &[RatesSolution],
    h: &SolutionH,
    rho: &BoundaryParams,
) -> Result<Certificate, Violation> {
    let assembly = assemble(data, seq, rates, rho)
        .map_err(|e| violation("sequence", &format!("not proper: {e}")))?;
    for &i in &assembly.hz {
        if !h.values[i].is_zero() {
            return Err(violation(h.layout.comp(i), "forced-zero component is nonzero"));
        }
    }
    for &i in &assembly.hp {
        if h.values[i].is_negative() {
            return Err(violation(h.layout.comp(i), "negative free component"));
        }
    }
    // Rates residuals and admissibility.
    for (m, sol) in rates.iter().enumerate() {
        let mut lhs = data.a.mul_vec(&sol.u);
        for (l, x) in lhs.iter_mut().zip(&sol.xdot) {
            *l += x;
        }
        if lhs != data.b {
            return Err(violation(format!("rates[{}]", m + 1), "primal rates residual"));
        }
        let mut dl = data.a.transpose().mul_vec(&sol.p);
        for (l, q) in dl.iter_mut().zip(&sol.qdot) {
            *l -= q;
        }
        if dl != data.c {
            return Err(violation(format!("rates[{}]", m + 1), "dual rates residual"));
        }
        if !is_admissible(sol) {
            return Err(violation(format!("rates[{}]", m + 1), "inadmissible rates"));
        }
    }
    // Boundary equations.
    let mut r1 = data.a.mul_vec(&h.u0());
    for (l, x) in r1.iter_mut().zip(&h.x0()) {
        *l += x;
    }
    if r1 != rho.beta {
        return Err(violation("x0", "initial boundary equation residual"));
    }
    let mut r2 = data.a.transpose().mul_vec(&h.pn());
    for (l, q) in r2.iter_mut().zip(&h.qn()) {
        *l -= q;
    }
    if r2 != rho.gamma {
        return Err(violation("qN", "dual initial boundary equation residual"));
    }
    let xn = h.x_bp(h.layout.n);
    let mut r3 = data.a.mul_vec(&h.un());
    for ((l, x), last) in r3.iter_mut().zip(&h.xt()).zip(&xn) {
        *l += x;
        *l -= last;
    }
    if r3 != rho.lambda {
        return Err(violation("xT", "terminal boundary equation residual"));
    }
    let q0 = h.q_bp(0);
    let mut r4 = data.a.transpose().mul_vec(&h.p0());
    for ((l, q), first) in r4.iter_mut().zip(&h.qt()).zip(&q0) {
        *l -= q;
        *l += first;
    }
    if r4 != rho.mu {
        return Err(violation("qT", "dual terminal boundary equation residual"));
    }
    // State equations and horizon.
    let tau = h.tau();
    let xs = x_breakpoint_values(&h.x0(), rates, &tau);
    let qs = q_breakpoint_values(&h.qn(), rates, &tau);
    for nn in 1..=h.layout.n {
        if h.x_bp(nn) != xs[nn] {
            return Err(violation(format!("x{nn}"), "breakpoint state residual"));
        }
    }
    for nn in 0..h.layout.n {
        if h.q_bp(nn) != qs[nn] {
            return Err(violation(format!("q{nn}"), "dual breakpoint state residual"));
        }
    }
    let total: Rational = tau.iter().sum();
    if total != rho.t {
        return Err(violation("tau", "interval lengths do not sum to T"));
    }
    // Complementary slackness and strong duality.
    let (xdp, qdu) = slackness_sums(rates, h);
    if !xdp.is_zero() {
        return Err(violation("slackness", "x·dP integral is nonzero"));
    }
    if !qdu.is_zero() {
        return Err(violation("slackness", "q·dU integral is nonzero"));
    }
    let (primal, dual) = objectives(data, rates, h, rho);
    if primal != dual {
        return Err(violation("objective", "primal and dual objectives differ"));
    }
    // Boundary zero count (exactly 2(K+J) at interior points).
    let boundary_zero_count = [h.u0(), h.qn(), h.un(), h.qt()]
        .iter()
        .flatten()
        .chain([h.x0(), h.pn(), h.xt(), h.p0()].iter().flatten())
        .filter(|v| v.is_zero())
        .count();
    Ok(Certificate {
        primal_objective: primal,
        dual_objective: dual,
        boundary_zero_count,
    })
}

/// Nonsingularity probe for a sequence at given parameters.
pub fn nonsingular_at(assembly: &Assembly) -> bool {
    is_nonsingular(&assembly.m)
}

/// Initial parameter point of the worked reference run (test fixture).
#[cfg(test)]
pub fn golden_rho0() -> BoundaryParams {
    use crate::exact::{frac, vec_i64};
    BoundaryParams {
        beta: vec_i64(&[8, 10]),
        gamma: vec_i64(&[-2, -2]),
        t: frac(1, 10),
        lambda: vec_i64(&[-1, -1]),
        mu: vec_i64(&[1, 1]),
    }
}

/// Parameter line of the worked reference run (test fixture).
#[cfg(test)]
pub fn golden_line() -> crate::model::ParamLine {
    crate::model::ParamLine {
        start: golden_rho0(),
        goal: crate::model::golden_goal(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, vec_i64};
    use crate::model::{golden_data, golden_goal};

    fn seq1() -> BaseSequence {
        BaseSequence {
            k0: [0, 1].into(),
            j0: [0, 1].into(),
            bases: vec![RatesBasis::new([0, 1], [0, 1])],
            kn1: [0, 1].into(),
            jn1: [0, 1].into(),
        }
    }

    fn seq4() -> BaseSequence {
        BaseSequence {
            k0: [0].into(),
            j0: [0].into(),
            bases: vec![
                RatesBasis::new([0], [0]),
                RatesBasis::new([0], [1]),
                RatesBasis::new([0, 1], [0, 1]),
            ],
            kn1: [0].into(),
            jn1: [0, 1].into(),
        }
    }

    #[test]
    fn layout_round_trip() {
        let layout = HLayout { k: 2, j: 2, n: 3 };
        for i in 0..layout.dim() {
            let c = layout.comp(i);
            assert_eq!(layout.index(c), i);
            assert_eq!(HComp::parse(&c.to_string()), Some(c));
        }
    }

    #[test]
    fn sequence_display_round_trip() {
        for seq in [seq1(), seq4()] {
            let s = seq.display();
            assert_eq!(BaseSequence::parse(&s), Some(seq));
        }
        assert_eq!(
            seq4().display(),
            "({1},{1}),[({1},{1}),({1},{2}),({1,2},{1,2})],({1},{1,2})"
        );
    }

    #[test]
    fn golden_first_system_dimension_and_solution() {
        let data = golden_data();
        let seq = seq1();
        let rates = sequence_rates(&data, &seq).unwrap();
        let asm = assemble(&data, &seq, &rates, &golden_rho0()).unwrap();
        assert_eq!(asm.m.rows(), 21);
        assert_eq!(asm.m.cols(), 21);
        assert!(nonsingular_at(&asm));
        // R nonzero blocks sit at the transform positions.
        assert_eq!(&asm.r[0..2], &vec_i64(&[8, 10])[..]);
        assert_eq!(&asm.r[4..6], &vec_i64(&[-2, -2])[..]);
        assert_eq!(asm.r[8], frac(1, 10));
        assert_eq!(&asm.r[13..15], &vec_i64(&[-1, -1])[..]);
        assert_eq!(&asm.r[17..19], &vec_i64(&[1, 1])[..]);

        let h = solve_structure(&asm, &asm.r).unwrap();
        assert_eq!(h.tau(), vec![frac(1, 10)]);
        assert_eq!(h.x0(), vec_i64(&[8, 10]));
        assert_eq!(h.x_bp(1), vec![frac(83, 10), frac(101, 10)]);
        assert_eq!(h.xt(), vec![frac(73, 10), frac(91, 10)]);
        assert_eq!(h.qn(), vec_i64(&[2, 2]));
        assert_eq!(h.q_bp(0), vec![frac(19, 10), frac(9, 5)]);
        assert_eq!(h.qt(), vec![frac(9, 10), frac(4, 5)]);
        assert_eq!(h.u0(), vec_i64(&[0, 0]));
        assert_eq!(h.un(), vec_i64(&[0, 0]));
        assert_eq!(h.pn(), vec_i64(&[0, 0]));
        assert_eq!(h.p0(), vec_i64(&[0, 0]));

        let dr = rhs_vector(&data, &seq, &golden_line().delta());
        let dh = gradient(&asm, &dr).unwrap();
        assert_eq!(dh.tau(), vec![frac(19, 10)]);
        assert_eq!(dh.qn(), vec_i64(&[-7, -8]));
        assert_eq!(dh.qt(), vec![frac(-79, 10), frac(-54, 5)]);

        let (step, hits) = ratio_step(&h, &dh, &asm.hp);
        assert_eq!(step, Some(frac(2, 27)));
        assert_eq!(hits.len(), 1);
        assert_eq!(h.layout.comp(hits[0]), HComp::QT(1));

        // Certificate at the left endpoint.
        let cert = certify_optimal(&data, &seq, &rates, &h, &golden_rho0()).unwrap();
        assert_eq!(cert.primal_objective, cert.dual_objective);
        assert_eq!(cert.boundary_zero_count, 8);
    }

    #[test]
    fn golden_first_decomposition_at_theta_bar() {
        let data = golden_data();
        let seq = seq1();
        let rates = sequence_rates(&data, &seq).unwrap();
        let line = golden_line();
        let asm = assemble(&data, &seq, &rates, &line.at(&frac(2, 27))).unwrap();
        let h = solve_structure(&asm, &asm.r).unwrap();
        let dec = decompose(&seq, &rates, &h);
        assert_eq!(dec.xtilde, vec_i64(&[0, 0]));
        assert_eq!(dec.qtilde, vec![frac(13, 54), frac(13, 27)]);
        assert!(dec.keq.is_empty() && dec.jeq.is_empty());
    }

    #[test]
    fn golden_final_sequence_at_goal() {
        let data = golden_data();
        let seq = seq4();
        let rates = sequence_rates(&data, &seq).unwrap();
        let goal = golden_goal();
        let asm = assemble(&data, &seq, &rates, &goal).unwrap();
        let h = solve_structure(&asm, &asm.r).unwrap();
        assert_eq!(h.tau(), vec![rat(1), rat(1), rat(0)]);
        assert_eq!(h.u0(), vec![rat(0), frac(5, 2)]);
        assert_eq!(h.pn(), vec![rat(0), frac(5, 3)]);
        assert_eq!(h.x_bp(1), vec![frac(11, 2), rat(0)]);
        assert_eq!(h.xt(), vec![frac(41, 6), rat(0)]);
        assert_eq!(h.qn(), vec![rat(0), frac(2, 3)]);
        assert_eq!(h.qt(), vec![frac(1, 2), rat(0)]);

        let (primal, dual) = objectives(&data, &rates, &h, &goal);
        assert_eq!(primal, frac(349, 12));
        assert_eq!(dual, frac(349, 12));
        let cert = certify_optimal(&data, &seq, &rates, &h, &goal).unwrap();
        assert_eq!(cert.primal_objective, frac(349, 12));

        // Pointwise evaluation.
        let e = evaluate(&rates, &h, &rat(1)).unwrap();
        assert_eq!(e.x, vec![frac(11, 2), rat(0)]);
        let e0 = evaluate(&rates, &h, &rat(0)).unwrap();
        assert_eq!(e0.u_cum, h.u0());
        assert_eq!(e0.q, h.qt());
        let et = evaluate(&rates, &h, &rat(2)).unwrap();
        assert_eq!(et.x, vec![frac(41, 6), rat(0)]);
        assert_eq!(et.q, h.qn());
        assert!(evaluate(&rates, &h, &rat(3)).is_err());
    }

    #[test]
    fn ratio_step_edge_cases() {
        let layout = HLayout { k: 1, j: 1, n: 1 };
        let mk = |vals: &[Rational]| SolutionH {
            layout,
            values: vals.to_vec(),
        };
        let dim = layout.dim();
        // All-positive gradient: no constraint.
        let h = mk(&vec![rat(1); dim]);
        let dh = mk(&vec![rat(1); dim]);
        let hp: Vec<usize> = (0..dim).collect();
        assert_eq!(ratio_step(&h, &dh, &hp), (None, vec![]));
        // A zero component with positive gradient does not constrain.
        let mut hv = vec![rat(1); dim];
        hv[0] = rat(0);
        let mut dv = vec![rat(1); dim];
        dv[1] = rat(-2);
        let (step, hits) = ratio_step(&mk(&hv), &mk(&dv), &hp);
        assert_eq!(step, Some(frac(1, 2)));
        assert_eq!(hits, vec![1]);
        // A zero component with negative gradient pins the step at zero.
        dv[0] = rat(-1);
        let (step, hits) = ratio_step(&mk(&hv), &mk(&dv), &hp);
        assert_eq!(step, Some(rat(0)));
        assert_eq!(hits, vec![0]);
    }

    #[test]
    fn improper_sequences_are_rejected() {
        let data = golden_data();
        // Non-compatible boundary sets: K0 not a subset of K1.
        let mut bad = seq4();
        bad.k0 = [0, 1].into();
        assert_eq!(
            sequence_rates(&data, &bad),
            Err(ImproperSequence::NotCompatible)
        );
        // Non-adjacent internal bases.
        let nonadj = BaseSequence {
            k0: [0].into(),
            j0: [0].into(),
            bases: vec![RatesBasis::new([0], [1]), RatesBasis::new([1], [0])],
            kn1: [0].into(),
            jn1: [0].into(),
        };
        assert!(matches!(
            sequence_rates(&data, &nonadj),
            Err(ImproperSequence::NotAdjacent { .. }) | Err(ImproperSequence::Inadmissible { .. })
        ));
    }
}
