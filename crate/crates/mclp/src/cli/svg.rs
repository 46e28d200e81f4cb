/*!
Hand-rolled SVG rendering of the optimal trajectories: the primal states
x_k(t) are drawn above the time axis and the dual states q_j(T−t) are
drawn negated below it, each as a piecewise-linear polyline over the
breakpoints.
*/

use crate::exact::to_f64;
use crate::rates::RatesSolution;
use crate::structural::{evaluate, SolutionH};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

/// Renders the trajectory figure.
pub fn render_svg(rates: &[RatesSolution], h: &SolutionH) -> String {
    let bps = h.breakpoints();
    let horizon = to_f64(bps.last().unwrap()).max(f64::MIN_POSITIVE);
    let k = h.x0().len();
    let j = h.qn().len();

    // Sample both state families at the breakpoints (they are piecewise
    // linear in between); dual values are negated for the lower half.
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for kk in 0..k {
        let pts: Vec<(f64, f64)> = bps
            .iter()
            .map(|t| {
                let ev = evaluate(rates, h, t).expect("breakpoint inside [0, T]");
                (to_f64(t), to_f64(&ev.x[kk]))
            })
            .collect();
        series.push((format!("x{}", kk + 1), pts));
    }
    for jj in 0..j {
        let pts: Vec<(f64, f64)> = bps
            .iter()
            .map(|t| {
                let ev = evaluate(rates, h, t).expect("breakpoint inside [0, T]");
                (to_f64(t), -to_f64(&ev.q[jj]))
            })
            .collect();
        series.push((format!("q{}", jj + 1), pts));
    }

    let mut ymax: f64 = 1e-9;
    let mut ymin: f64 = -1e-9;
    for (_, pts) in &series {
        for &(_, y) in pts {
            ymax = ymax.max(y);
            ymin = ymin.min(y);
        }
    }
    let pad = 0.05 * (ymax - ymin);
    ymax += pad;
    ymin -= pad;

    let sx = |t: f64| MARGIN + t / horizon * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| MARGIN + (ymax - y) / (ymax - ymin) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // Time axis at y = 0 (primal above, dual below).
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        sx(0.0),
        sy(0.0),
        sx(horizon),
        sy(0.0)
    ));
    // Breakpoint ticks.
    for t in bps.iter() {
        let tf = to_f64(t);
        out.push_str(&format!(
            "  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#cccccc\" stroke-dasharray=\"4 4\"/>\n",
            sx(tf),
            MARGIN,
            HEIGHT - MARGIN
        ));
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(t, y)| format!("{:.3},{:.3}", sx(t), sy(y)))
            .collect();
        out.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" fill=\"{color}\" font-size=\"12\">{name}</text>\n",
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64
        ));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::solve;
    use crate::model::{golden_data, golden_goal};
    use crate::structural::{golden_rho0, sequence_rates};

    #[test]
    fn golden_svg_is_well_formed() {
        let data = golden_data();
        let res = solve(&data, &golden_goal(), Some(golden_rho0())).unwrap();
        let seq = res.final_seq.as_ref().unwrap();
        let h = res.final_h.as_ref().unwrap();
        let rates = sequence_rates(&data, seq).unwrap();
        let svg = render_svg(&rates, h);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        // One polyline per primal and dual state.
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains(">x1<") && svg.contains(">q2<"));
    }
}
