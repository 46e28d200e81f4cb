/*!
CSV sampling of the optimal trajectories: states x(t) and q(T−t) and
cumulative controls U(t) and P(T−t) at N+1 uniform times plus all
breakpoints. Converting exact rationals to floats happens only here.
*/

use crate::exact::{frac, to_f64, Rational};
use crate::rates::RatesSolution;
use crate::structural::{evaluate, SolutionH};
use num::Zero;
use std::collections::BTreeSet;

/// Renders the CSV document. `samples = N` adds N+1 uniform sample times;
/// with `samples = 0` only the breakpoints are emitted. Rows at t = 0 and
/// t = T carry the jump (impulse-inclusive) values and are flagged.
pub fn render_csv(rates: &[RatesSolution], h: &SolutionH, samples: usize) -> String {
    let (k, j) = {
        let x0 = h.x0();
        let q = h.qn();
        (x0.len(), q.len())
    };
    let bps = h.breakpoints();
    let horizon = bps.last().unwrap().clone();

    let mut times: BTreeSet<Rational> = bps.iter().cloned().collect();
    if samples > 0 {
        for i in 0..=samples {
            times.insert(&horizon * frac(i as i64, samples as i64));
        }
    }

    let mut out = String::new();
    out.push('t');
    for kk in 1..=k {
        out.push_str(&format!(",x_{kk}"));
    }
    for jj in 1..=j {
        out.push_str(&format!(",q_{jj}"));
    }
    for jj in 1..=j {
        out.push_str(&format!(",u_{jj}"));
    }
    for kk in 1..=k {
        out.push_str(&format!(",p_{kk}"));
    }
    out.push_str(",impulse_flag\n");

    for t in &times {
        let ev = evaluate(rates, h, t).expect("sample time inside [0, T]");
        let flag = if t.is_zero() || *t == horizon { 1 } else { 0 };
        out.push_str(&format!("{}", to_f64(t)));
        for v in ev.x.iter().chain(&ev.q).chain(&ev.u_cum).chain(&ev.p_cum) {
            out.push_str(&format!(",{}", to_f64(v)));
        }
        out.push_str(&format!(",{flag}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::solve;
    use crate::model::{golden_data, golden_goal};
    use crate::structural::{golden_rho0, sequence_rates};

    #[test]
    fn golden_csv_layout() {
        let data = golden_data();
        let res = solve(&data, &golden_goal(), Some(golden_rho0())).unwrap();
        let seq = res.final_seq.as_ref().unwrap();
        let h = res.final_h.as_ref().unwrap();
        let rates = sequence_rates(&data, seq).unwrap();

        let csv = render_csv(&rates, h, 0);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x_1,x_2,q_1,q_2,u_1,u_2,p_1,p_2,impulse_flag"
        );
        // samples = 0: breakpoints only (0, 1, 2 with the zero interval).
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].starts_with("0,3,0,0.5,0,"));
        assert!(rows[0].ends_with(",1"));
        assert!(rows[1].starts_with("1,5.5,0,"));
        assert!(rows[1].ends_with(",0"));
        assert!(rows[2].starts_with("2,"));
        assert!(rows[2].ends_with(",1"));

        // samples = 4 adds interior uniform times (0.5, 1.5).
        let csv4 = render_csv(&rates, h, 4);
        assert_eq!(csv4.lines().count(), 1 + 5);
        assert!(csv4.lines().any(|l| l.starts_with("0.5,")));
        assert!(csv4.lines().any(|l| l.starts_with("1.5,")));
    }
}
