//! Uncoupled density evolution for LDPC(λ, ρ, m) on the BEC: the DE
//! recursion, fixed points, BP threshold, potential function, directional
//! derivatives, energy gap, and potential threshold.

use crate::density::{
    poly_conv_signed, ConvKind, DegreePerspective, Density, DensityOrdering, SignedVector,
};
use crate::gf_coeffs::CoefficientTable;
use crate::tol;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Degree distributions
// ---------------------------------------------------------------------------

/// Edge-perspective degree distribution pair (λ, ρ) with the derived
/// node-perspective pair (L, R) and the derivative values L'(1), R'(1).
#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    lambda: Vec<(usize, f64)>,
    rho: Vec<(usize, f64)>,
    big_l: Vec<(usize, f64)>,
    big_r: Vec<(usize, f64)>,
    lp1: f64,
    rp1: f64,
}

impl DegreeDistribution {
    /// Validates and derives a degree distribution from edge-perspective
    /// coefficient lists.
    ///
    /// Rejected as degenerate: empty lists, duplicate or sub-2 degrees,
    /// nonpositive coefficients, coefficient sums off 1 by more than 1e-12,
    /// and ensembles whose design rate `1 - L'(1)/R'(1)` is not positive
    /// (e.g. the (2,2) cycle ensemble).
    pub fn new(lambda: Vec<(usize, f64)>, rho: Vec<(usize, f64)>) -> Result<Self> {
        let lambda = Self::validate_side("lambda", lambda)?;
        let rho = Self::validate_side("rho", rho)?;
        let (big_l, lp1) = node_perspective(&lambda);
        let (big_r, rp1) = node_perspective(&rho);
        let rate = 1.0 - lp1 / rp1;
        if rate <= 0.0 {
            return Err(Error::Validation(format!(
                "degenerate ensemble: design rate {rate:.4} is not positive \
                 (L'(1) = {lp1:.4}, R'(1) = {rp1:.4})"
            )));
        }
        Ok(DegreeDistribution {
            lambda,
            rho,
            big_l,
            big_r,
            lp1,
            rp1,
        })
    }

    /// The (d_v, d_c)-regular ensemble: λ(x) = x^{d_v - 1}, ρ(x) = x^{d_c - 1}.
    pub fn regular(dv: usize, dc: usize) -> Result<Self> {
        DegreeDistribution::new(vec![(dv, 1.0)], vec![(dc, 1.0)])
    }

    fn validate_side(name: &str, mut coeffs: Vec<(usize, f64)>) -> Result<Vec<(usize, f64)>> {
        if coeffs.is_empty() {
            return Err(Error::Validation(format!("{name}: empty degree list")));
        }
        coeffs.sort_by_key(|&(d, _)| d);
        let mut sum = 0.0;
        for window in coeffs.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::Validation(format!(
                    "{name}: duplicate degree {}",
                    window[0].0
                )));
            }
        }
        for &(d, c) in &coeffs {
            if d < 2 {
                return Err(Error::Validation(format!(
                    "{name}: degree {d} < 2 (degree-1 mass is degenerate)"
                )));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name}: degree {d} has nonpositive coefficient {c}"
                )));
            }
            sum += c;
        }
        if (sum - 1.0).abs() > tol::MASS_DRIFT_TOL {
            return Err(Error::Validation(format!(
                "{name}: coefficients sum to {sum}, expected 1"
            )));
        }
        for entry in &mut coeffs {
            entry.1 /= sum;
        }
        Ok(coeffs)
    }

    pub fn lambda(&self) -> &[(usize, f64)] {
        &self.lambda
    }

    pub fn rho(&self) -> &[(usize, f64)] {
        &self.rho
    }

    pub fn big_l(&self) -> &[(usize, f64)] {
        &self.big_l
    }

    pub fn big_r(&self) -> &[(usize, f64)] {
        &self.big_r
    }

    /// L'(1), the average variable-node degree.
    pub fn lp1(&self) -> f64 {
        self.lp1
    }

    /// R'(1), the average check-node degree.
    pub fn rp1(&self) -> f64 {
        self.rp1
    }

    pub fn design_rate(&self) -> f64 {
        1.0 - self.lp1 / self.rp1
    }
}

/// Node-perspective coefficients `P_d = (p_d / d) / sum_k (p_k / k)` and the
/// derivative `P'(1) = 1 / sum_k (p_k / k)` of the resulting polynomial.
fn node_perspective(edge: &[(usize, f64)]) -> (Vec<(usize, f64)>, f64) {
    let norm: f64 = edge.iter().map(|&(d, c)| c / d as f64).sum();
    let node = edge
        .iter()
        .map(|&(d, c)| (d, c / d as f64 / norm))
        .collect();
    (node, 1.0 / norm)
}

// ---------------------------------------------------------------------------
// DE recursion and fixed points
// ---------------------------------------------------------------------------

/// Convergence controls for fixed-point iteration and threshold searches.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// L-infinity step size below which the iteration is converged.
    pub fp_tol: f64,
    /// Iteration cap; exceeding it reports `converged = false`.
    pub max_iter: usize,
    /// Entropy below which a fixed point counts as decoded.
    pub h_zero_tol: f64,
    /// Final bracket width for threshold bisections.
    pub eps_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            fp_tol: tol::FP_TOL,
            max_iter: tol::MAX_ITER_UNCOUPLED,
            h_zero_tol: tol::H_ZERO_TOL,
            eps_tol: tol::EPS_TOL,
        }
    }
}

/// Result of running the DE recursion to (attempted) convergence.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub density: Density,
    pub iterations: usize,
    pub converged: bool,
    /// L-infinity gap of the last step taken.
    pub residual: f64,
}

/// One uncoupled DE update: `T_s(x, c) = c ⊡ λ^⊡(ρ^⊠(x))`.
pub fn de_step(
    x: &Density,
    c: &Density,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
) -> Density {
    let out = de_step_signed(&x.as_signed(), c, dd, table);
    Density::from_raw(x.m(), out.as_slice().to_vec())
}

/// The same update in the signed algebra, used by derivative formulas and
/// by the unstable-fixed-point refinement which evaluates slightly off the
/// simplex.
pub fn de_step_signed(
    x: &SignedVector,
    c: &Density,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
) -> SignedVector {
    let y = poly_conv_signed(ConvKind::Cn, dd.rho(), DegreePerspective::Edge, x, table);
    let z = poly_conv_signed(
        ConvKind::Vn,
        dd.lambda(),
        DegreePerspective::Edge,
        &y,
        table,
    );
    c.as_signed().conv(ConvKind::Vn, &z, table)
}

/// Iterates `de_step` from `x0` until the L-infinity step size drops below
/// `opts.fp_tol` or `opts.max_iter` is hit.
///
/// When the first step is comparable to `x0` (always the case from `Δ_m`),
/// the iterate sequence must stay monotone in the partial order; this is
/// asserted every step.
pub fn iterate_to_fp(
    x0: &Density,
    c: &Density,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    opts: &SolverOptions,
) -> FixedPointReport {
    let mut cur = x0.clone();
    let mut direction: Option<DensityOrdering> = None;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        let next = de_step(&cur, c, dd, table);
        iterations += 1;
        residual = next.dist_inf(&cur);
        let ord = next.compare(&cur);
        match direction {
            None => {
                if ord.is_comparable() {
                    direction = Some(ord);
                }
            }
            Some(DensityOrdering::Less) => assert!(
                ord.is_le(),
                "DE iterates from a comparable start must be nonincreasing (got {ord:?} \
                 at iteration {iterations})"
            ),
            Some(DensityOrdering::Greater) => assert!(
                ord.is_ge(),
                "DE iterates from a comparable start must be nondecreasing (got {ord:?} \
                 at iteration {iterations})"
            ),
            Some(_) => {}
        }
        cur = next;
        if residual <= opts.fp_tol {
            return FixedPointReport {
                density: cur,
                iterations,
                converged: true,
                residual,
            };
        }
    }
    FixedPointReport {
        density: cur,
        iterations,
        converged: false,
        residual,
    }
}

/// BP threshold by bisection on the erasure probability: success at ε means
/// the recursion started from `Δ_m` decodes to entropy below
/// `opts.h_zero_tol`. Returns the midpoint of the final bracket (width at
/// most `opts.eps_tol`).
pub fn bp_threshold(
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    opts: &SolverOptions,
) -> f64 {
    let m = table.m();
    let delta_m = Density::delta(m, m);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > opts.eps_tol {
        let mid = 0.5 * (lo + hi);
        let c = Density::channel(mid, m).expect("bisection stays in [0,1]");
        let report = iterate_to_fp(&delta_m, &c, dd, table, opts);
        if report.density.entropy() < opts.h_zero_tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Potential function
// ---------------------------------------------------------------------------

/// Potential function for LDPC(λ, ρ, m):
///
/// `U_s(x, ε) = (L'(1)/R'(1)) H(R^⊠(x)) + L'(1) H(ρ^⊠(x))
///            - L'(1) H(x ⊠ ρ^⊠(x)) - H(c_ε ⊡ L^⊡(ρ^⊠(x)))`.
pub fn potential_u_s(
    x: &Density,
    eps: f64,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
) -> f64 {
    potential_u_s_signed(&x.as_signed(), eps, dd, table)
}

/// The potential extended polynomially off the simplex; this is what the
/// finite-difference gradient oracle evaluates.
pub fn potential_u_s_signed(
    x: &SignedVector,
    eps: f64,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
) -> f64 {
    let m = table.m();
    let c = Density::channel(eps, m).expect("erasure probability validated by caller");
    let y = poly_conv_signed(ConvKind::Cn, dd.rho(), DegreePerspective::Edge, x, table);
    let r_node = poly_conv_signed(ConvKind::Cn, dd.big_r(), DegreePerspective::Node, x, table);
    let l_node = poly_conv_signed(ConvKind::Vn, dd.big_l(), DegreePerspective::Node, &y, table);
    let x_y = x.conv(ConvKind::Cn, &y, table);
    let c_term = c.as_signed().conv(ConvKind::Vn, &l_node, table);
    dd.lp1() / dd.rp1() * r_node.entropy() + dd.lp1() * y.entropy()
        - dd.lp1() * x_y.entropy()
        - c_term.entropy()
}

/// `ρ'^⊠(x) = sum_j (j - 1) ρ_j x^{⊠(j-2)}`, the CN-side derivative
/// polynomial appearing in the directional derivative of the potential.
pub fn rho_prime_conv(
    x: &SignedVector,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
) -> SignedVector {
    let m = x.m();
    let mut out = SignedVector::zero(m);
    let mut power = Density::delta(m, 0).as_signed(); // x^{⊠0}
    let max_exp = dd.rho().iter().map(|&(d, _)| d - 2).max().unwrap_or(0);
    for e in 0..=max_exp {
        if e > 0 {
            power = power.conv(ConvKind::Cn, x, table);
        }
        for &(d, coeff) in dd.rho() {
            if d - 2 == e {
                out = &out + &power.scale((d - 1) as f64 * coeff);
            }
        }
    }
    out
}

/// Directional derivative of the potential at `x` in the zero-sum
/// direction `dx`:
///
/// `d_x U_s(x, ε)[δx] = L'(1) H((T_s(x, c_ε) - x) ⊠ ρ'^⊠(x) ⊠ δx)`.
pub fn directional_derivative_u_s(
    x: &Density,
    eps: f64,
    dx: &SignedVector,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
) -> Result<f64> {
    let mass = dx.total_mass();
    if mass.abs() > 1e-9 * (1.0 + dx.linf()) {
        return Err(Error::Validation(format!(
            "direction entries must sum to zero, got {mass:e}"
        )));
    }
    let c = Density::channel(eps, table.m())?;
    let step = de_step_signed(&x.as_signed(), &c, dd, table);
    let diff = &step - &x.as_signed();
    let rp = rho_prime_conv(&x.as_signed(), dd, table);
    Ok(dd.lp1()
        * diff
            .conv(ConvKind::Cn, &rp, table)
            .conv(ConvKind::Cn, dx, table)
            .entropy())
}

// ---------------------------------------------------------------------------
// Fixed-point enumeration and the energy gap
// ---------------------------------------------------------------------------

/// Controls for the seeded fixed-point search.
///
/// Forward iteration can only find stable fixed points, so the search runs
/// from `Δ_m` and from channel-like seeds `c_t` on a grid of `t` values; in
/// between, basins of attraction are bracketed by bisection and the
/// crossing refined by a damped Newton solve to capture unstable fixed
/// points. The search is still an under-approximation of the full
/// fixed-point set, which is why callers report the seed configuration next
/// to every energy-gap value.
#[derive(Debug, Clone)]
pub struct UfpSearchOptions {
    pub solver: SolverOptions,
    /// Number of channel-like seeds `c_t` with `t` evenly spaced in [0, 1].
    pub seed_grid: usize,
    /// Bracket basin boundaries and Newton-refine unstable fixed points.
    pub bracket_unstable: bool,
}

impl Default for UfpSearchOptions {
    fn default() -> Self {
        UfpSearchOptions {
            solver: SolverOptions::default(),
            seed_grid: 32,
            bracket_unstable: true,
        }
    }
}

/// Seeded enumeration of uncoupled fixed points at erasure probability
/// `eps`. Always contains `Δ_0`; every returned density satisfies
/// `‖T_s(x) - x‖_∞ ≤ opts.solver.fp_tol`; results are deduplicated at
/// L-infinity distance [`tol::FP_DEDUP_TOL`].
pub fn enumerate_ufps(
    eps: f64,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    opts: &UfpSearchOptions,
) -> Vec<Density> {
    let m = table.m();
    let c = Density::channel(eps, m).expect("erasure probability must be in [0,1]");
    let mut found: Vec<Density> = vec![Density::delta(m, 0)];
    let push = |list: &mut Vec<Density>, cand: Density| {
        if list.iter().all(|x| x.dist_inf(&cand) >= tol::FP_DEDUP_TOL) {
            list.push(cand);
        }
    };

    let forward = |x0: &Density| -> Option<Density> {
        let report = iterate_to_fp(x0, &c, dd, table, &opts.solver);
        report.converged.then_some(report.density)
    };

    if let Some(fp) = forward(&Density::delta(m, m)) {
        push(&mut found, fp);
    }
    let grid = opts.seed_grid.max(2);
    let mut grid_limits: Vec<(f64, Option<Density>)> = Vec::with_capacity(grid);
    for g in 0..grid {
        let t = g as f64 / (grid - 1) as f64;
        let seed = Density::channel(t, m).expect("grid stays in [0,1]");
        let limit = forward(&seed);
        if let Some(fp) = limit.clone() {
            push(&mut found, fp);
        }
        grid_limits.push((t, limit));
    }

    if opts.bracket_unstable {
        for pair in grid_limits.windows(2) {
            if let ((t_lo, Some(fp_lo)), (t_hi, Some(fp_hi))) = (&pair[0], &pair[1]) {
                if fp_lo.dist_inf(fp_hi) < 1e-4 {
                    continue;
                }
                if let Some(fp) =
                    refine_basin_boundary(*t_lo, *t_hi, fp_lo, fp_hi, &c, dd, table, &opts.solver)
                {
                    push(&mut found, fp);
                }
            }
        }
    }
    found
}

/// Bisects the seed parameter across a basin boundary, rides the slow
/// trajectory near the boundary to its closest approach to the unstable
/// fixed point, and polishes with a damped Newton solve.
#[allow(clippy::too_many_arguments)]
fn refine_basin_boundary(
    mut t_lo: f64,
    mut t_hi: f64,
    fp_lo: &Density,
    fp_hi: &Density,
    c: &Density,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    solver: &SolverOptions,
) -> Option<Density> {
    let m = table.m();
    for _ in 0..50 {
        let mid = 0.5 * (t_lo + t_hi);
        let seed = Density::channel(mid, m).ok()?;
        let report = iterate_to_fp(&seed, c, dd, table, solver);
        if !report.converged {
            return None;
        }
        if report.density.dist_inf(fp_lo) < tol::FP_DEDUP_TOL {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    // Near the boundary the trajectory lingers close to the unstable fixed
    // point before committing to either attractor. Use the slowest iterate
    // away from both known limits as the Newton seed; the converging tail
    // near an attractor would otherwise always win the min-step contest.
    let seed = Density::channel(0.5 * (t_lo + t_hi), m).ok()?;
    let mut cur = seed.clone();
    let mut best = (f64::INFINITY, seed);
    for _ in 0..5_000 {
        let next = de_step(&cur, c, dd, table);
        let step = next.dist_inf(&cur);
        if step < best.0 && cur.dist_inf(fp_lo) > 1e-6 && cur.dist_inf(fp_hi) > 1e-6 {
            best = (step, cur.clone());
        }
        cur = next;
        if step <= solver.fp_tol {
            break;
        }
    }
    newton_fixed_point(&best.1, c, dd, table, solver)
}

/// Damped Newton iteration on the independent coordinates (x_1..x_m) of
/// the fixed-point equation, with finite-difference Jacobian. Converges to
/// unstable fixed points that forward iteration repels from.
fn newton_fixed_point(
    start: &Density,
    c: &Density,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    solver: &SolverOptions,
) -> Option<Density> {
    let m = table.m();
    let to_signed = |u: &[f64]| {
        let mut v = vec![0.0; m + 1];
        v[0] = 1.0 - u.iter().sum::<f64>();
        v[1..].copy_from_slice(u);
        SignedVector::new(m, v)
    };
    let residual = |u: &[f64]| -> Vec<f64> {
        let x = to_signed(u);
        let t = de_step_signed(&x, c, dd, table);
        (1..=m).map(|k| t.as_slice()[k] - x.as_slice()[k]).collect()
    };
    let norm = |f: &[f64]| f.iter().fold(0.0f64, |a, x| a.max(x.abs()));

    let mut u: Vec<f64> = start.as_slice()[1..].to_vec();
    let mut f = residual(&u);
    let h = 1e-7;
    for _ in 0..30 {
        if norm(&f) <= 0.1 * solver.fp_tol {
            let x = to_signed(&u);
            let mut p: Vec<f64> = x.as_slice().to_vec();
            if p.iter().any(|&v| v < -1e-9) {
                return None;
            }
            for v in &mut p {
                *v = v.max(0.0);
            }
            let sum: f64 = p.iter().sum();
            for v in &mut p {
                *v /= sum;
            }
            let density = Density::new(m, p).ok()?;
            let check = de_step(&density, c, dd, table).dist_inf(&density);
            return (check <= solver.fp_tol).then_some(density);
        }
        // finite-difference Jacobian of the residual
        let mut jac = vec![vec![0.0; m]; m];
        for b in 0..m {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[b] += h;
            dn[b] -= h;
            let fu = residual(&up);
            let fd = residual(&dn);
            for a in 0..m {
                jac[a][b] = (fu[a] - fd[a]) / (2.0 * h);
            }
        }
        let step = solve_linear(&mut jac, &f)?;
        // damping: backtrack until the residual shrinks
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&step)
                .map(|(ui, si)| ui - alpha * si)
                .collect();
            let ft = residual(&trial);
            if norm(&ft) < norm(&f) {
                u = trial;
                f = ft;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

/// Gaussian elimination with partial pivoting for the tiny Newton systems.
#[allow(clippy::needless_range_loop)]
fn solve_linear(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col]
                .abs()
                .partial_cmp(&a[s][col].abs())
                .expect("finite pivots")
        })?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= a[col][col];
        for row in 0..col {
            x[row] -= a[row][col] * x[col];
        }
    }
    Some(x)
}

/// Energy gap `ΔE(ε)`: the minimum potential over the discovered
/// nontrivial fixed points, `+∞` when there are none.
pub fn energy_gap(
    eps: f64,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    opts: &UfpSearchOptions,
) -> f64 {
    let delta0 = Density::delta(table.m(), 0);
    enumerate_ufps(eps, dd, table, opts)
        .iter()
        .filter(|fp| fp.dist_inf(&delta0) >= tol::FP_DEDUP_TOL)
        .map(|fp| potential_u_s(fp, eps, dd, table))
        .fold(f64::INFINITY, f64::min)
}

/// Potential threshold `ε^pot = sup { ε : ΔE(ε) > 0 }` by bisection on the
/// sign of the energy gap (`+∞` counts as positive).
pub fn potential_threshold(
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    opts: &UfpSearchOptions,
) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > opts.solver.eps_tol {
        let mid = 0.5 * (lo + hi);
        if energy_gap(mid, dd, table, opts) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central finite difference of the potential along a direction; the
/// independent oracle for [`directional_derivative_u_s`].
pub fn finite_difference_u_s(
    x: &Density,
    eps: f64,
    dx: &SignedVector,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    step: f64,
) -> f64 {
    let xs = x.as_signed();
    let plus = &xs + &dx.scale(step);
    let minus = &xs - &dx.scale(step);
    (potential_u_s_signed(&plus, eps, dd, table) - potential_u_s_signed(&minus, eps, dd, table))
        / (2.0 * step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::sample_direction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn table(m: usize) -> Arc<CoefficientTable> {
        CoefficientTable::shared(m).unwrap()
    }

    fn dd36() -> DegreeDistribution {
        DegreeDistribution::regular(3, 6).unwrap()
    }

    /// Scalar binary-BEC DE recursion for the (3,6) ensemble.
    fn scalar_step_36(x: f64, eps: f64) -> f64 {
        eps * (1.0 - (1.0 - x).powi(5)).powi(2)
    }

    #[test]
    fn degree_distribution_derived_quantities() {
        let dd = dd36();
        assert!((dd.lp1() - 3.0).abs() < 1e-12);
        assert!((dd.rp1() - 6.0).abs() < 1e-12);
        assert!((dd.design_rate() - 0.5).abs() < 1e-12);
        let irregular = DegreeDistribution::new(vec![(2, 0.5), (3, 0.5)], vec![(6, 1.0)]).unwrap();
        let l_sum: f64 = irregular.big_l().iter().map(|&(_, c)| c).sum();
        let r_sum: f64 = irregular.big_r().iter().map(|&(_, c)| c).sum();
        assert!((l_sum - 1.0).abs() < 1e-12);
        assert!((r_sum - 1.0).abs() < 1e-12);
        // L_i = (λ_i / i) / Σ λ_k / k with Σ = 0.25 + 1/6
        let norm = 0.25 + 0.5 / 3.0;
        assert!((irregular.big_l()[0].1 - 0.25 / norm).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ensembles_are_rejected() {
        assert!(DegreeDistribution::new(vec![(1, 1.0)], vec![(6, 1.0)]).is_err());
        assert!(DegreeDistribution::new(vec![(3, 1.0)], vec![(1, 1.0)]).is_err());
        assert!(DegreeDistribution::new(vec![(3, 0.5)], vec![(6, 1.0)]).is_err());
        // (2,2) cycle ensemble: zero design rate
        assert!(DegreeDistribution::regular(2, 2).is_err());
        // rate < 0
        assert!(DegreeDistribution::regular(6, 3).is_err());
    }

    #[test]
    fn de_step_fixes_delta0_and_absorbs_perfect_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in 1..=3 {
            let t = table(m);
            let dd = dd36();
            let d0 = Density::delta(m, 0);
            let c = Density::channel(0.7, m).unwrap();
            assert!(de_step(&d0, &c, &dd, &t).dist_inf(&d0) < 1e-15);
            let x = crate::density::sample_density(m, &mut rng);
            assert!(de_step(&x, &d0, &dd, &t).dist_inf(&d0) < 1e-15);
        }
    }

    #[test]
    fn de_step_matches_scalar_recursion_at_m1() {
        let t = table(1);
        let dd = dd36();
        let x = Density::new(1, vec![0.5, 0.5]).unwrap();
        let c = Density::channel(0.45, 1).unwrap();
        let stepped = de_step(&x, &c, &dd, &t);
        let expected = scalar_step_36(0.5, 0.45);
        assert!((stepped.as_slice()[1] - expected).abs() < 1e-14);
    }

    #[test]
    fn iterate_examples() {
        let t = table(1);
        let dd = dd36();
        let dm = Density::delta(1, 1);
        let opts = SolverOptions::default();

        let r0 = iterate_to_fp(&dm, &Density::channel(0.0, 1).unwrap(), &dd, &t, &opts);
        assert!(r0.converged && r0.iterations <= 2);
        assert!(r0.density.dist_inf(&Density::delta(1, 0)) < 1e-15);

        // Δ_m is a fixed point at ε = 1
        let r1 = iterate_to_fp(&dm, &Density::channel(1.0, 1).unwrap(), &dd, &t, &opts);
        assert!(r1.converged);
        assert!(r1.density.dist_inf(&dm) < 1e-15);

        // below threshold: decodes
        let r2 = iterate_to_fp(&dm, &Density::channel(0.40, 1).unwrap(), &dd, &t, &opts);
        assert!(r2.converged);
        assert!(r2.density.entropy() < 1e-7);

        // above threshold: nontrivial fixed point matching the scalar oracle
        let r3 = iterate_to_fp(&dm, &Density::channel(0.45, 1).unwrap(), &dd, &t, &opts);
        assert!(r3.converged);
        let mut x = 1.0;
        loop {
            let next = scalar_step_36(x, 0.45);
            if (next - x).abs() <= 1e-13 {
                break;
            }
            x = next;
        }
        assert!((r3.density.as_slice()[1] - x).abs() <= 1e-8);
    }

    #[test]
    fn bp_threshold_matches_scalar_bisection() {
        let t = table(1);
        let dd = dd36();
        let opts = SolverOptions::default();
        let ours = bp_threshold(&dd, &t, &opts);

        // independent scalar bisection
        let decodes = |eps: f64| {
            let mut x = 1.0;
            for _ in 0..opts.max_iter {
                let next = scalar_step_36(x, eps);
                if (x - next).abs() <= opts.fp_tol {
                    x = next;
                    break;
                }
                x = next;
            }
            x < opts.h_zero_tol
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > opts.eps_tol {
            let mid = 0.5 * (lo + hi);
            if decodes(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (ours - oracle).abs() <= 5e-4,
            "ours {ours} vs oracle {oracle}"
        );
        assert!((ours - 0.4294).abs() <= 5e-4);
    }

    #[test]
    fn potential_vanishes_at_delta0() {
        let dd = dd36();
        for m in 1..=3 {
            let t = table(m);
            let d0 = Density::delta(m, 0);
            for eps in [0.0, 0.3, 0.7, 1.0] {
                assert!(potential_u_s(&d0, eps, &dd, &t).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn potential_matches_scalar_formula_at_m1() {
        let t = table(1);
        let dd = dd36();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let x: f64 = rng.gen_range(0.0..1.0);
            let eps: f64 = rng.gen_range(0.0..1.0);
            let density = Density::new(1, vec![1.0 - x, x]).unwrap();
            let ours = potential_u_s(&density, eps, &dd, &t);
            // scalar potential from the same four entropy terms:
            // H(R^⊠(x)) = 1 - R(1-x), H(ρ^⊠(x)) = y, H(x ⊠ ρ^⊠) = x + y - xy,
            // H(c ⊡ L^⊡(y)) = ε L(y) with y = 1 - ρ(1-x)
            let y = 1.0 - (1.0 - x).powi(5);
            let r_node = 1.0 - (1.0 - x).powi(6);
            let l_node = y.powi(3);
            let scalar = 0.5 * r_node + 3.0 * y - 3.0 * (x + y - x * y) - eps * l_node;
            assert!((ours - scalar).abs() < 1e-10, "x={x} eps={eps}");
        }
    }

    #[test]
    fn potential_nonincreasing_along_trajectories() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for m in 1..=3 {
            let t = table(m);
            let dd = dd36();
            for _ in 0..5 {
                let eps: f64 = rng.gen_range(0.2..0.9);
                let c = Density::channel(eps, m).unwrap();
                let mut x = Density::delta(m, m);
                let mut u_prev = potential_u_s(&x, eps, &dd, &t);
                for _ in 0..200 {
                    x = de_step(&x, &c, &dd, &t);
                    let u = potential_u_s(&x, eps, &dd, &t);
                    assert!(u <= u_prev + 1e-10, "potential increased: {u} > {u_prev}");
                    u_prev = u;
                }
            }
        }
    }

    #[test]
    fn directional_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for m in 1..=3 {
            let t = table(m);
            let dd = dd36();
            for _ in 0..25 {
                let x = crate::density::sample_density(m, &mut rng);
                let eps: f64 = rng.gen_range(0.05..0.95);
                let dx = sample_direction(m, &mut rng);
                let formula = directional_derivative_u_s(&x, eps, &dx, &dd, &t).unwrap();
                let fd = finite_difference_u_s(&x, eps, &dx, &dd, &t, 1e-6);
                // absolute floor 1e-3 keeps the ratio well-posed against
                // the ~1e-10 noise of the centered difference itself
                let denom = formula.abs().max(fd.abs()).max(1e-3);
                assert!(
                    ((formula - fd) / denom).abs() <= 1e-5,
                    "m={m} formula={formula} fd={fd}"
                );
            }
        }
    }

    #[test]
    fn directional_derivative_rejects_nonzero_sum() {
        let t = table(2);
        let dd = dd36();
        let x = Density::delta(2, 2);
        let bad = SignedVector::new(2, vec![0.5, 0.5, 0.5]);
        assert!(directional_derivative_u_s(&x, 0.5, &bad, &dd, &t).is_err());
        let zero = SignedVector::zero(2);
        assert_eq!(
            directional_derivative_u_s(&x, 0.5, &zero, &dd, &t).unwrap(),
            0.0
        );
    }

    #[test]
    fn ufp_enumeration_below_and_above_threshold() {
        let t = table(1);
        let dd = dd36();
        let opts = UfpSearchOptions::default();
        let d0 = Density::delta(1, 0);

        // below BP threshold: only Δ_0 from forward seeds
        let below = enumerate_ufps(0.40, &dd, &t, &opts);
        let nontrivial: Vec<_> = below
            .iter()
            .filter(|fp| fp.dist_inf(&d0) >= tol::FP_DEDUP_TOL)
            .collect();
        assert!(
            nontrivial.is_empty(),
            "unexpected nontrivial FP below threshold"
        );

        // above BP threshold: Δ_0 plus a nontrivial fixed point
        let above = enumerate_ufps(0.46, &dd, &t, &opts);
        assert!(above.iter().any(|fp| fp.dist_inf(&d0) < 1e-12));
        assert!(above.iter().any(|fp| fp.dist_inf(&d0) >= tol::FP_DEDUP_TOL));

        // ε = 1: Δ_m is a fixed point
        let at_one = enumerate_ufps(1.0, &dd, &t, &opts);
        let dm = Density::delta(1, 1);
        assert!(at_one.iter().any(|fp| fp.dist_inf(&dm) < 1e-9));

        // every reported fixed point satisfies the fixed-point equation
        for eps in [0.40, 0.46, 1.0] {
            let c = Density::channel(eps, 1).unwrap();
            for fp in enumerate_ufps(eps, &dd, &t, &opts) {
                assert!(de_step(&fp, &c, &dd, &t).dist_inf(&fp) <= opts.solver.fp_tol);
            }
        }
    }

    #[test]
    fn unstable_fixed_point_is_found_between_basins() {
        // between ε_BP ≈ 0.4294 and ε^pot the scalar (3,6) recursion has an
        // unstable fixed point separating the two basins
        let t = table(1);
        let dd = dd36();
        let opts = UfpSearchOptions::default();
        let fps = enumerate_ufps(0.46, &dd, &t, &opts);
        // scalar oracle: roots of eps(1-(1-x)^5)^2 - x on a fine grid
        let g = |x: f64| scalar_step_36(x, 0.46) - x;
        let mut roots = Vec::new();
        let n = 20_000;
        for i in 0..n {
            let a = i as f64 / n as f64;
            let b = (i + 1) as f64 / n as f64;
            if g(a) == 0.0 {
                roots.push(a);
            } else if g(a) * g(b) < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if g(lo) * g(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        // nontrivial roots: unstable and stable
        let nontrivial: Vec<f64> = roots.into_iter().filter(|&r| r > 1e-6).collect();
        assert_eq!(nontrivial.len(), 2, "scalar oracle roots: {nontrivial:?}");
        for root in nontrivial {
            assert!(
                fps.iter().any(|fp| (fp.as_slice()[1] - root).abs() < 1e-7),
                "missing fixed point at x = {root}"
            );
        }
    }

    #[test]
    fn energy_gap_examples() {
        let t = table(1);
        let dd = dd36();
        let opts = UfpSearchOptions::default();
        assert!(energy_gap(0.40, &dd, &t, &opts).is_infinite());

        let gap = energy_gap(0.46, &dd, &t, &opts);
        // scalar oracle: potential at the stable forward fixed point
        let mut x = 1.0;
        loop {
            let next = scalar_step_36(x, 0.46);
            if (next - x).abs() <= 1e-13 {
                break;
            }
            x = next;
        }
        let y = 1.0 - (1.0 - x).powi(5);
        let scalar =
            0.5 * (1.0 - (1.0 - x).powi(6)) + 3.0 * y - 3.0 * (x + y - x * y) - 0.46 * y.powi(3);
        assert!(gap > 0.0);
        assert!((gap - scalar).abs() <= 1e-8, "gap {gap} vs scalar {scalar}");

        // strictly decreasing where finite
        let gaps: Vec<f64> = [0.44, 0.46, 0.48, 0.50]
            .iter()
            .map(|&e| energy_gap(e, &dd, &t, &opts))
            .collect();
        for pair in gaps.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn potential_threshold_examples() {
        let t = table(1);
        let dd = dd36();
        let opts = UfpSearchOptions::default();
        let eps_pot = potential_threshold(&dd, &t, &opts);
        assert!((eps_pot - 0.4881).abs() <= 1e-3, "eps_pot = {eps_pot}");
        let eps_bp = bp_threshold(&dd, &t, &opts.solver);
        assert!(eps_pot >= eps_bp);
    }

    #[test]
    fn energy_gap_sign_flips_exactly_once() {
        let t = table(1);
        let dd = dd36();
        let opts = UfpSearchOptions::default();
        let signs: Vec<bool> = (0..=16)
            .map(|i| 0.45 + 0.005 * i as f64)
            .map(|eps| energy_gap(eps, &dd, &t, &opts) > 0.0)
            .collect();
        let flips = signs.windows(2).filter(|p| p[0] != p[1]).count();
        assert_eq!(flips, 1, "sign pattern {signs:?}");
        assert!(signs[0], "gap should be positive at the low end");
    }

    #[test]
    fn potential_strictly_decreasing_in_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for m in 1..=3 {
            let t = table(m);
            let dd = dd36();
            for _ in 0..50 {
                let x = crate::density::sample_density(m, &mut rng);
                let eps_lo: f64 = rng.gen_range(0.0..0.9);
                let eps_hi: f64 = rng.gen_range(eps_lo + 0.05..1.0);
                let u_hi = potential_u_s(&x, eps_hi, &dd, &t);
                let u_lo = potential_u_s(&x, eps_lo, &dd, &t);
                assert!(
                    u_hi < u_lo - 1e-12,
                    "m={m}: U_s not strictly decreasing in eps"
                );
            }
        }
    }

    #[test]
    fn decode_holds_just_below_the_threshold() {
        let t = table(2);
        let dd = dd36();
        let opts = SolverOptions::default();
        let eps_bp = bp_threshold(&dd, &t, &opts);
        let c = Density::channel(eps_bp - 0.01, 2).unwrap();
        let report = iterate_to_fp(&Density::delta(2, 2), &c, &dd, &t, &opts);
        assert!(report.converged);
        assert!(report.density.entropy() < opts.h_zero_tol);
    }

    #[test]
    fn t_s_monotonicity_in_both_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for m in 1..=3 {
            let t = table(m);
            let dd = dd36();
            for _ in 0..50 {
                let (lo, hi) = crate::density::sample_comparable_pair(m, &mut rng, &t);
                let c = crate::density::sample_density(m, &mut rng);
                let out_lo = de_step(&lo, &c, &dd, &t);
                let out_hi = de_step(&hi, &c, &dd, &t);
                assert!(out_lo.compare(&out_hi).is_le());

                let x = crate::density::sample_density(m, &mut rng);
                let (c_lo, c_hi) = crate::density::sample_comparable_pair(m, &mut rng, &t);
                let y_lo = de_step(&x, &c_lo, &dd, &t);
                let y_hi = de_step(&x, &c_hi, &dd, &t);
                assert!(y_lo.compare(&y_hi).is_le());
            }
        }
    }
}
