/*!
Exact-arithmetic solver for continuous linear programs with constant
coefficients (M-CLP and its symmetric dual M-CLP*).

The solver follows a finite simplex-type algorithm: it tracks the optimal
*base sequence* of a problem while the boundary parameters ρ = (β, γ, T, λ, μ)
move along a parametric line L(θ), performing combinatorial pivots at the
boundaries of validity regions, and terminates with a certified optimal
piecewise-linear solution at the goal parameters.

Modules, bottom up:

- [`exact`] — arbitrary-precision rationals and dense exact linear algebra.
- [`lpcore`] — a generic exact simplex solver with zero / nonnegative /
  unrestricted variable classes.
- [`model`] — problem data, boundary parameters, the parametric line, and
  validation (non-degeneracy, sign conventions, feasibility tests).
- [`rates`] — basic solutions of the Rates-LP/LP* pair for a prescribed
  basis, with admissibility and adjacency queries.
- [`structural`] — base sequences, assembly and solution of the structure
  equations M·H = R, decomposition parameters, solution evaluation,
  objectives, and the optimality certificate.
- [`pivots`] — collision classification at validity-region boundaries and
  the pivot kinds (internal, boundary type I/II, with pre/post-boundary
  steps).
- [`driver`] — initialization, the iteration loop along L(θ), termination,
  and the restart policy for multiple collisions.
- [`cli`] — problem file ingestion, trace/CSV/SVG emission, and an
  independent time-discretization oracle.

No floating-point arithmetic occurs anywhere in solver paths; floats appear
only when formatting CSV/SVG output.
*/

pub mod cli;
pub mod driver;
pub mod exact;
pub mod lpcore;
pub mod model;
pub mod pivots;
pub mod rates;
pub mod structural;
