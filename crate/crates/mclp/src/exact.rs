/*!
Arbitrary-precision rational scalars and dense exact linear algebra.

Every quantity the solver manipulates is a [`Rational`]; all operations are
exact. Linear systems are solved by fraction-free (Bareiss-style)
elimination over big integers, which bounds intermediate coefficient growth
on the 20–100-dimensional systems assembled by the structural module.
*/

use num::bigint::BigInt;
use num::{One, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Canonical arbitrary-precision rational: gcd-reduced, positive denominator.
pub type Rational = num::BigRational;

/// A dense vector of rationals.
pub type RatVector = Vec<Rational>;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair. Panics if `den == 0`.
pub fn frac(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// A vector of zeros.
pub fn zeros(n: usize) -> RatVector {
    vec![Rational::zero(); n]
}

/// Exact dot product.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len(), "dot: dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Convenience constructor from machine integers.
pub fn vec_i64(entries: &[i64]) -> RatVector {
    entries.iter().map(|&n| rat(n)).collect()
}

/// Error parsing a rational literal.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal `{literal}`")]
pub struct ParseRationalError {
    pub literal: String,
}

/// Parses `"p/q"` or `"p"` (arbitrary-precision integers).
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        literal: s.to_string(),
    };
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| err())?;
        let den: BigInt = q.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        Ok(Rational::new(num, den))
    } else {
        let num: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rational::from_integer(num))
    }
}

/// Formats as `"p/q"`, or `"p"` when the value is an integer.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion for CSV/SVG emission only. Never used in solver paths.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A dense row-major matrix of rationals with immutable dimensions.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds from row vectors; panics unless all rows have equal length.
    pub fn from_rows(rows: Vec<RatVector>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "from_rows: ragged rows");
            data.extend(r);
        }
        RatMatrix {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    /// Builds from machine-integer rows (test/fixture convenience).
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        RatMatrix::from_rows(rows.iter().map(|r| vec_i64(r)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> RatVector {
        assert!(r < self.rows, "row index out of bounds");
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> RatVector {
        assert!(c < self.cols, "column index out of bounds");
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rational]) -> RatVector {
        assert_eq!(v.len(), self.cols, "mul_vec: dimension mismatch");
        (0..self.rows).map(|r| dot(&self.row(r), v)).collect()
    }

    /// Horizontal concatenation of column vectors into a matrix.
    pub fn from_columns(rows: usize, cols: Vec<RatVector>) -> Self {
        let ncols = cols.len();
        let mut m = RatMatrix::zeros(rows, ncols);
        for (c, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), rows, "from_columns: dimension mismatch");
            for (r, v) in col.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format_rational(&self[(r, c)]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// A square system has no unique solution; carries the rank found.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("singular system (rank {rank})")]
pub struct SingularError {
    pub rank: usize,
}

/// Integer echelon form produced by fraction-free elimination.
struct Echelon {
    /// Rows of the scaled augmented integer matrix after elimination.
    mat: Vec<Vec<BigInt>>,
    /// Pivot positions (row, column), column strictly increasing.
    pivots: Vec<(usize, usize)>,
}

/// Fraction-free (Bareiss) elimination with row pivoting and column
/// staircase over the first `m.cols()` columns; `rhs` columns are carried
/// along in the augmented part.
fn echelon_int(m: &RatMatrix, rhs: &[&RatVector]) -> Echelon {
    let nrows = m.rows();
    let ncoef = m.cols();
    let ntot = ncoef + rhs.len();
    // Scale each row by the lcm of its denominators to get integer rows.
    let mut a: Vec<Vec<BigInt>> = (0..nrows)
        .map(|i| {
            let mut rats: Vec<Rational> = m.row(i);
            for r in rhs {
                assert_eq!(r.len(), nrows, "rhs length mismatch");
                rats.push(r[i].clone());
            }
            let mut l = BigInt::one();
            for x in &rats {
                l = num::integer::lcm(l, x.denom().clone());
            }
            rats.iter()
                .map(|x| x.numer() * (&l / x.denom()))
                .collect()
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut prev = BigInt::one();
    let mut prow = 0usize;
    for col in 0..ncoef {
        if prow >= nrows {
            break;
        }
        let Some(sel) = (prow..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(prow, sel);
        for i in prow + 1..nrows {
            if a[i][col].is_zero() {
                // Still rescale so the Bareiss exact-division invariant holds.
                for j in col + 1..ntot {
                    let v = &a[prow][col] * &a[i][j];
                    a[i][j] = v / &prev;
                }
                continue;
            }
            for j in col + 1..ntot {
                let v = &a[prow][col] * &a[i][j] - &a[i][col] * &a[prow][j];
                a[i][j] = v / &prev;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[prow][col].clone();
        pivots.push((prow, col));
        prow += 1;
    }
    Echelon { mat: a, pivots }
}

/// Rank of an arbitrary (possibly rectangular) matrix.
pub fn rank(m: &RatMatrix) -> usize {
    echelon_int(m, &[]).pivots.len()
}

/// True iff the square matrix has nonzero determinant.
pub fn is_nonsingular(m: &RatMatrix) -> bool {
    assert_eq!(m.rows(), m.cols(), "is_nonsingular: matrix not square");
    rank(m) == m.rows()
}

/// Solves `M·h = r` exactly for square nonsingular `M`.
pub fn solve_linear(m: &RatMatrix, r: &RatVector) -> Result<RatVector, SingularError> {
    Ok(solve_many(m, std::slice::from_ref(r))?.pop().unwrap())
}

/// Solves `M·h = r` for several right-hand sides sharing one elimination.
pub fn solve_many(m: &RatMatrix, rhs: &[RatVector]) -> Result<Vec<RatVector>, SingularError> {
    assert_eq!(m.rows(), m.cols(), "solve: matrix not square");
    let n = m.rows();
    let refs: Vec<&RatVector> = rhs.iter().collect();
    let ech = echelon_int(m, &refs);
    if ech.pivots.len() < n {
        return Err(SingularError {
            rank: ech.pivots.len(),
        });
    }
    // Full rank and square: pivot i sits at (i, i). Back-substitute each rhs.
    let mut out = Vec::with_capacity(rhs.len());
    for (t, _) in rhs.iter().enumerate() {
        let mut x = zeros(n);
        for i in (0..n).rev() {
            let mut acc = Rational::from_integer(ech.mat[i][n + t].clone());
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                acc -= Rational::from_integer(ech.mat[i][j].clone()) * xj;
            }
            x[i] = acc / Rational::from_integer(ech.mat[i][i].clone());
        }
        out.push(x);
    }
    Ok(out)
}
