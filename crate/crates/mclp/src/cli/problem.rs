/*!
TOML problem-file ingestion: keys K, J, A (row-major), b, c, beta, gamma,
T, lambda, mu, and an optional [initial] block with the same boundary
parameter fields. Rationals are written as "p/q" strings or bare integers.
*/

use crate::exact::{parse_rational, RatMatrix, RatVector, Rational};
use crate::model::{BoundaryParams, ProblemData};
use thiserror::Error;
use toml::Value;

/// A parsed and dimension-checked problem file.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub data: ProblemData,
    pub goal: BoundaryParams,
    pub initial: Option<BoundaryParams>,
}

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("TOML parse error: {0}")]
    Toml(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {msg}")]
    Bad { key: String, msg: String },
}

fn bad(key: &str, msg: impl Into<String>) -> ProblemFileError {
    ProblemFileError::Bad {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn rational(v: &Value, key: &str) -> Result<Rational, ProblemFileError> {
    match v {
        Value::Integer(i) => Ok(Rational::from_integer((*i).into())),
        Value::String(s) => {
            parse_rational(s).map_err(|e| bad(key, format!("bad rational {s:?}: {e}")))
        }
        other => Err(bad(key, format!("expected integer or \"p/q\", got {other}"))),
    }
}

fn vector(table: &Value, key: &str, len: usize) -> Result<RatVector, ProblemFileError> {
    let v = table
        .get(key)
        .ok_or_else(|| ProblemFileError::Missing(key.to_string()))?;
    let arr = v
        .as_array()
        .ok_or_else(|| bad(key, "expected an array"))?;
    if arr.len() != len {
        return Err(bad(key, format!("expected {len} entries, got {}", arr.len())));
    }
    arr.iter().map(|e| rational(e, key)).collect()
}

fn usize_key(table: &Value, key: &str) -> Result<usize, ProblemFileError> {
    let v = table
        .get(key)
        .ok_or_else(|| ProblemFileError::Missing(key.to_string()))?;
    let i = v
        .as_integer()
        .ok_or_else(|| bad(key, "expected a positive integer"))?;
    if i <= 0 {
        return Err(bad(key, "must be positive"));
    }
    Ok(i as usize)
}

/// Accepts A as K row arrays of J rationals, or one flat row-major array
/// of K·J rationals.
fn matrix(table: &Value, k: usize, j: usize) -> Result<RatMatrix, ProblemFileError> {
    let v = table
        .get("A")
        .ok_or_else(|| ProblemFileError::Missing("A".to_string()))?;
    let arr = v.as_array().ok_or_else(|| bad("A", "expected an array"))?;
    let mut m = RatMatrix::zeros(k, j);
    if arr.len() == k && arr.iter().all(|e| e.is_array()) {
        for (r, row) in arr.iter().enumerate() {
            let row = row.as_array().unwrap();
            if row.len() != j {
                return Err(bad("A", format!("row {} has {} entries, expected {j}", r + 1, row.len())));
            }
            for (c, e) in row.iter().enumerate() {
                m[(r, c)] = rational(e, "A")?;
            }
        }
    } else if arr.len() == k * j {
        for (i, e) in arr.iter().enumerate() {
            m[(i / j, i % j)] = rational(e, "A")?;
        }
    } else {
        return Err(bad(
            "A",
            format!("expected {k} rows of {j} entries or a flat array of {}", k * j),
        ));
    }
    Ok(m)
}

fn boundary(table: &Value, k: usize, j: usize) -> Result<BoundaryParams, ProblemFileError> {
    let t = rational(
        table
            .get("T")
            .ok_or_else(|| ProblemFileError::Missing("T".to_string()))?,
        "T",
    )?;
    Ok(BoundaryParams {
        beta: vector(table, "beta", k)?,
        gamma: vector(table, "gamma", j)?,
        t,
        lambda: vector(table, "lambda", k)?,
        mu: vector(table, "mu", j)?,
    })
}

/// Parses a full problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemFileError> {
    let root: Value = text
        .parse()
        .map_err(|e: toml::de::Error| ProblemFileError::Toml(e.to_string()))?;
    let k = usize_key(&root, "K")?;
    let j = usize_key(&root, "J")?;
    let a = matrix(&root, k, j)?;
    let b = vector(&root, "b", k)?;
    let c = vector(&root, "c", j)?;
    let data = ProblemData::new(a, b, c).map_err(|e| bad("A", e.to_string()))?;
    let goal = boundary(&root, k, j)?;
    let initial = match root.get("initial") {
        Some(block) => Some(boundary(block, k, j)?),
        None => None,
    };
    Ok(ProblemFile {
        data,
        goal,
        initial,
    })
}

/// Parses a standalone initial-parameters file: boundary fields at top
/// level or inside an [initial] block.
pub fn parse_initial(text: &str, k: usize, j: usize) -> Result<BoundaryParams, ProblemFileError> {
    let root: Value = text
        .parse()
        .map_err(|e: toml::de::Error| ProblemFileError::Toml(e.to_string()))?;
    let table = root.get("initial").unwrap_or(&root);
    boundary(table, k, j)
}

/// Renders a problem (and optional initial block) back to TOML; used by
/// generators in the test suite.
pub fn render_problem(
    data: &ProblemData,
    goal: &BoundaryParams,
    initial: Option<&BoundaryParams>,
) -> String {
    use crate::exact::format_rational as fr;
    let vec = |v: &RatVector| -> String {
        let items: Vec<String> = v.iter().map(|x| format!("\"{}\"", fr(x))).collect();
        format!("[{}]", items.join(", "))
    };
    let mut out = String::new();
    out.push_str(&format!("K = {}\nJ = {}\n", data.k, data.j));
    let rows: Vec<String> = (0..data.k)
        .map(|r| {
            let items: Vec<String> = (0..data.j)
                .map(|c| format!("\"{}\"", fr(&data.a[(r, c)])))
                .collect();
            format!("[{}]", items.join(", "))
        })
        .collect();
    out.push_str(&format!("A = [{}]\n", rows.join(", ")));
    out.push_str(&format!("b = {}\nc = {}\n", vec(&data.b), vec(&data.c)));
    let block = |rho: &BoundaryParams| {
        format!(
            "beta = {}\ngamma = {}\nT = \"{}\"\nlambda = {}\nmu = {}\n",
            vec(&rho.beta),
            vec(&rho.gamma),
            fr(&rho.t),
            vec(&rho.lambda),
            vec(&rho.mu)
        )
    };
    out.push_str(&block(goal));
    if let Some(rho0) = initial {
        out.push_str("\n[initial]\n");
        out.push_str(&block(rho0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, rat};

    const GOLDEN: &str = r#"
K = 2
J = 2
A = [[5, 2], [3, 4]]
b = [3, 1]
c = [1, 2]
beta = [8, 10]
gamma = [5, 6]
T = 2
lambda = [0, 0]
mu = [0, 0]

[initial]
beta = [8, 10]
gamma = [-2, -2]
T = "1/10"
lambda = [-1, -1]
mu = [1, 1]
"#;

    #[test]
    fn parses_golden_file() {
        let pf = parse_problem(GOLDEN).unwrap();
        assert_eq!(pf.data.k, 2);
        assert_eq!(pf.data.a[(0, 1)], rat(2));
        assert_eq!(pf.goal.t, rat(2));
        let init = pf.initial.unwrap();
        assert_eq!(init.t, frac(1, 10));
        assert_eq!(init.gamma, vec![rat(-2), rat(-2)]);
    }

    #[test]
    fn flat_matrix_and_rational_strings() {
        let text = r#"
K = 1
J = 2
A = ["1/2", 3]
b = [1]
c = [1, 1]
beta = [2]
gamma = [-1, -1]
T = 1
lambda = [0, 0]
mu = [0, 0]
"#;
        // lambda/mu lengths are checked against K and J.
        assert!(parse_problem(text).is_err());
        let fixed = text.replace("lambda = [0, 0]", "lambda = [0]").replace(
            "mu = [0, 0]",
            "mu = [0, 0]",
        );
        let pf = parse_problem(&fixed).unwrap();
        assert_eq!(pf.data.a[(0, 0)], frac(1, 2));
        assert_eq!(pf.data.a[(0, 1)], rat(3));
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            parse_problem("K = 1"),
            Err(ProblemFileError::Missing(_))
        ));
        assert!(parse_problem("K = [this is not toml").is_err());
        let bad_rat = GOLDEN.replace("\"1/10\"", "\"1/0\"");
        assert!(matches!(
            parse_problem(&bad_rat),
            Err(ProblemFileError::Bad { .. })
        ));
    }

    #[test]
    fn render_round_trips() {
        let pf = parse_problem(GOLDEN).unwrap();
        let text = render_problem(&pf.data, &pf.goal, pf.initial.as_ref());
        let pf2 = parse_problem(&text).unwrap();
        assert_eq!(pf2.data.a, pf.data.a);
        assert_eq!(pf2.goal, pf.goal);
        assert_eq!(pf2.initial, pf.initial);
        let init = parse_initial(&text, 2, 2);
        assert!(init.is_ok());
    }
}
