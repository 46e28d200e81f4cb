/*!
Human-readable solution report: base sequence, breakpoints, impulses,
per-interval rates, breakpoint states, and both exact objective values.
Zero-length intervals are dropped from the display only; the underlying
solution keeps them.
*/

use crate::exact::{format_rational, RatVector};
use crate::model::{BoundaryParams, ProblemData};
use crate::rates::RatesSolution;
use crate::structural::{objectives, BaseSequence, SolutionH};
use num::Zero;

fn vec_str(v: &RatVector) -> String {
    let items: Vec<String> = v.iter().map(format_rational).collect();
    format!("({})", items.join(","))
}

/// Renders the solve report for an optimal solution.
pub fn render_report(
    data: &ProblemData,
    seq: &BaseSequence,
    rates: &[RatesSolution],
    h: &SolutionH,
    rho: &BoundaryParams,
) -> String {
    let n = seq.n();
    let tau = h.tau();
    let bps = h.breakpoints();
    let (primal, dual) = objectives(data, rates, h, rho);

    let mut out = String::new();
    out.push_str("status: optimal\n");
    out.push_str(&format!("sequence: {}\n", seq.display()));
    let kept: Vec<usize> = (0..n).filter(|&m| !tau[m].is_zero()).collect();
    let shown_bps: Vec<String> = {
        let mut pts = vec![bps[0].clone()];
        for &m in &kept {
            pts.push(bps[m + 1].clone());
        }
        pts.iter().map(format_rational).collect()
    };
    out.push_str(&format!("breakpoints: {}\n", shown_bps.join(", ")));
    out.push_str(&format!(
        "tau: {}\n",
        vec_str(&kept.iter().map(|&m| tau[m].clone()).collect())
    ));
    out.push_str(&format!(
        "impulses: u0={} uN={} p0={} pN={}\n",
        vec_str(&h.u0()),
        vec_str(&h.un()),
        vec_str(&h.p0()),
        vec_str(&h.pn())
    ));
    for (shown, &m) in kept.iter().enumerate() {
        out.push_str(&format!(
            "interval {}: [{}, {}] basis={} u={} xdot={} p={} qdot={}\n",
            shown + 1,
            format_rational(&bps[m]),
            format_rational(&bps[m + 1]),
            seq.bases[m].display(),
            vec_str(&rates[m].u),
            vec_str(&rates[m].xdot),
            vec_str(&rates[m].p),
            vec_str(&rates[m].qdot)
        ));
    }
    out.push_str(&format!("x0={} xT={}\n", vec_str(&h.x0()), vec_str(&h.xt())));
    for &m in &kept {
        if m + 1 < n {
            out.push_str(&format!("x{}={}\n", m + 1, vec_str(&h.x_bp(m + 1))));
        }
    }
    out.push_str(&format!("qN={} qT={}\n", vec_str(&h.qn()), vec_str(&h.qt())));
    for &m in &kept {
        if m >= 1 {
            out.push_str(&format!("q{}={}\n", m, vec_str(&h.q_bp(m))));
        }
    }
    out.push_str(&format!(
        "objective(primal): {}\nobjective(dual): {}\n",
        format_rational(&primal),
        format_rational(&dual)
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::solve;
    use crate::model::{golden_data, golden_goal};
    use crate::structural::{golden_rho0, sequence_rates};

    #[test]
    fn golden_report_drops_zero_interval() {
        let data = golden_data();
        let goal = golden_goal();
        let res = solve(&data, &goal, Some(golden_rho0())).unwrap();
        let seq = res.final_seq.as_ref().unwrap();
        let h = res.final_h.as_ref().unwrap();
        let rates = sequence_rates(&data, seq).unwrap();
        let report = render_report(&data, seq, &rates, h, &goal);
        // tau = (1,1,0) displays as (1,1).
        assert!(report.contains("tau: (1,1)\n"));
        assert!(report.contains("breakpoints: 0, 1, 2\n"));
        assert!(report.contains("u0=(0,5/2)"));
        assert!(report.contains("pN=(0,5/3)"));
        assert!(report.contains("xT=(41/6,0)"));
        assert!(report.contains("qN=(0,2/3)"));
        assert!(report.contains("qT=(1/2,0)"));
        assert!(report.contains("x1=(11/2,0)"));
        assert!(report.contains("objective(primal): 349/12"));
        assert!(report.contains("objective(dual): 349/12"));
        assert!(report.contains("u=(0,1/4)"));
        assert!(report.contains("u=(1/3,0)"));
        // Two displayed intervals despite three in the sequence.
        assert_eq!(report.matches("interval ").count(), 2);
    }
}
