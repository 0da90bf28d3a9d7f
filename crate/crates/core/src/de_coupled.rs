//! Coupled density evolution for SC-LDPC(λ, ρ, N, w, m): chain sweeps,
//! coupled fixed points, the coupled potential, the shift bound, and
//! middle-point analysis.
//!
//! Positions outside the chain carry `Δ_0` (the termination convention):
//! both the densities read beyond the CN index set and the channel
//! densities beyond the VN index set are perfect knowledge.

use crate::de_uncoupled::{de_step, DegreeDistribution};
use crate::density::{poly_conv_signed, ConvKind, DegreePerspective, Density, SignedVector};
use crate::gf_coeffs::CoefficientTable;
use crate::tol;
use crate::{Error, Result};

/// Chain geometry: coupling length `N` and coupling width `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingSpec {
    n: usize,
    w: usize,
}

impl CouplingSpec {
    /// Requires `1 <= w <= N` so that every mirrored read in the coupled
    /// potential stays inside the chain.
    pub fn new(n: usize, w: usize) -> Result<Self> {
        if n == 0 || w == 0 {
            return Err(Error::Validation(format!(
                "coupling length and width must be positive, got N = {n}, w = {w}"
            )));
        }
        if w > n {
            return Err(Error::Validation(format!(
                "coupling width w = {w} exceeds coupling length N = {n}"
            )));
        }
        Ok(CouplingSpec { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Number of CN positions, `N_w = N + w - 1`.
    pub fn n_w(&self) -> usize {
        self.n + self.w - 1
    }

    /// Index of the middle position, `floor(N_w / 2)`.
    pub fn n_mid(&self) -> usize {
        self.n_w() / 2
    }
}

/// A length-`N_w` vector of densities: the state of the coupled chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySequence {
    m: usize,
    entries: Vec<Density>,
}

impl DensitySequence {
    pub fn new(entries: Vec<Density>) -> Self {
        assert!(!entries.is_empty(), "empty density sequence");
        let m = entries[0].m();
        assert!(
            entries.iter().all(|d| d.m() == m),
            "density sequence mixes extension degrees"
        );
        DensitySequence { m, entries }
    }

    /// The all-`Δ_k` sequence of the given length.
    pub fn constant_delta(m: usize, k: usize, len: usize) -> Self {
        DensitySequence::new(vec![Density::delta(m, k); len])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> &Density {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[Density] {
        &self.entries
    }

    /// Per-position entropies.
    pub fn entropy_profile(&self) -> Vec<f64> {
        self.entries.iter().map(Density::entropy).collect()
    }

    pub fn max_entropy(&self) -> f64 {
        self.entries
            .iter()
            .map(Density::entropy)
            .fold(0.0, f64::max)
    }

    /// Largest per-entry deviation from the mirrored sequence.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| self.entries[i].dist_inf(&self.entries[n - 1 - i]))
            .fold(0.0, f64::max)
    }

    /// L-infinity distance over all positions and entries.
    pub fn dist_inf(&self, other: &DensitySequence) -> f64 {
        assert_eq!(self.len(), other.len(), "sequence length mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.dist_inf(b))
            .fold(0.0, f64::max)
    }

    /// True when every position of `self` is ⪯ the matching position.
    pub fn le_pointwise(&self, other: &DensitySequence) -> bool {
        self.entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| a.compare(b).is_le())
    }
}

/// Sweep scheduling for the coupled recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepMode {
    /// Synchronous update of all positions, exactly the written recursion.
    #[default]
    Jacobi,
    /// In-place ascending update using already-refreshed neighbours.
    /// Faster to converge but breaks the per-sweep symmetry and
    /// monotonicity guarantees, so the lemma checks skip it.
    GaussSeidel,
}

/// Controls for coupled fixed-point runs and threshold searches.
#[derive(Debug, Clone)]
pub struct CoupledOptions {
    pub fp_tol: f64,
    pub max_iter: usize,
    pub h_zero_tol: f64,
    pub eps_tol: f64,
    /// Stop sweeping as soon as every position has entropy below
    /// `h_zero_tol` (sound for threshold searches: iterates from `Δ_m`
    /// only descend).
    pub stop_when_decoded: bool,
    /// Assert pointwise monotonicity of the iterates (Jacobi only).
    pub check_monotone: bool,
    pub sweep: SweepMode,
}

impl Default for CoupledOptions {
    fn default() -> Self {
        CoupledOptions {
            fp_tol: tol::FP_TOL,
            max_iter: tol::MAX_ITER_COUPLED,
            h_zero_tol: tol::H_ZERO_TOL,
            eps_tol: tol::EPS_TOL,
            stop_when_decoded: false,
            check_monotone: true,
            sweep: SweepMode::Jacobi,
        }
    }
}

/// Convergence report for a coupled run.
#[derive(Debug, Clone)]
pub struct CoupledFpReport {
    pub iterations: usize,
    pub converged: bool,
    /// L-infinity gap of the last sweep.
    pub residual: f64,
    /// Whether the final sequence has every entropy below `h_zero_tol`.
    pub decoded: bool,
    /// Largest mirror-symmetry deviation seen over all sweeps.
    pub max_asymmetry: f64,
}

fn raw_zero(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[0] = 1.0; // Δ_0
    v
}

/// One synchronous coupled DE sweep with an arbitrary channel density:
///
/// `x_i' = (1/w) sum_k c_{i-k} ⊡ λ^⊡( (1/w) sum_j ρ^⊠(x_{i-k+j}) )`
///
/// with `c_n = c` for `n` in the VN range and `Δ_0` otherwise, and
/// `x_n = Δ_0` outside the CN range.
pub fn coupled_step_with_channel(
    seq: &DensitySequence,
    c: &Density,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
) -> DensitySequence {
    let m = table.m();
    assert_eq!(seq.m(), m, "sequence/table extension degree mismatch");
    assert_eq!(seq.len(), spec.n_w(), "sequence length != N_w");
    let (n, w, n_w) = (spec.n(), spec.w(), spec.n_w());
    let inv_w = 1.0 / w as f64;

    // ρ^⊠ of every position, reused across the averaging windows.
    let r: Vec<SignedVector> = seq
        .entries
        .iter()
        .map(|x| {
            poly_conv_signed(
                ConvKind::Cn,
                dd.rho(),
                DegreePerspective::Edge,
                &x.as_signed(),
                table,
            )
        })
        .collect();

    // u_v = c ⊡ λ^⊡((1/w) sum_j r_{v+j}) for VN positions; Δ_0 elsewhere.
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut avg = vec![0.0; m + 1];
        for j in 0..w {
            for (a, b) in avg.iter_mut().zip(r[v + j].as_slice()) {
                *a += b;
            }
        }
        for a in &mut avg {
            *a *= inv_w;
        }
        let s = SignedVector::new(m, avg);
        let z = poly_conv_signed(
            ConvKind::Vn,
            dd.lambda(),
            DegreePerspective::Edge,
            &s,
            table,
        );
        u.push(
            c.as_signed()
                .conv(ConvKind::Vn, &z, table)
                .as_slice()
                .to_vec(),
        );
    }

    let delta0 = raw_zero(m);
    let entries = (0..n_w)
        .map(|i| {
            let mut acc = vec![0.0; m + 1];
            for k in 0..w {
                let term = match i.checked_sub(k) {
                    Some(v) if v < n => &u[v],
                    _ => &delta0,
                };
                for (a, b) in acc.iter_mut().zip(term) {
                    *a += b;
                }
            }
            for a in &mut acc {
                *a *= inv_w;
            }
            Density::from_raw(m, acc)
        })
        .collect();
    DensitySequence::new(entries)
}

/// [`coupled_step_with_channel`] for the BEC channel density `c_ε`.
pub fn coupled_step(
    seq: &DensitySequence,
    eps: f64,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
) -> Result<DensitySequence> {
    let c = Density::channel(eps, table.m())?;
    Ok(coupled_step_with_channel(seq, &c, dd, spec, table))
}

/// One in-place Gauss-Seidel sweep (positions ascending, fresh values
/// visible immediately). Evaluates the recursion definition directly.
fn gauss_seidel_sweep(
    seq: &mut DensitySequence,
    c: &Density,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
) -> f64 {
    let m = table.m();
    let (n, w, n_w) = (spec.n(), spec.w(), spec.n_w());
    let inv_w = 1.0 / w as f64;
    let delta0 = Density::delta(m, 0);
    let mut residual = 0.0f64;
    for i in 0..n_w {
        let mut acc = vec![0.0; m + 1];
        for k in 0..w {
            let v = match i.checked_sub(k) {
                Some(v) if v < n => v,
                _ => {
                    acc[0] += 1.0; // Δ_0 channel term
                    continue;
                }
            };
            let mut avg = vec![0.0; m + 1];
            for j in 0..w {
                let idx = v + j;
                let x = if idx < n_w { seq.get(idx) } else { &delta0 };
                let r = poly_conv_signed(
                    ConvKind::Cn,
                    dd.rho(),
                    DegreePerspective::Edge,
                    &x.as_signed(),
                    table,
                );
                for (a, b) in avg.iter_mut().zip(r.as_slice()) {
                    *a += b;
                }
            }
            for a in &mut avg {
                *a *= inv_w;
            }
            let s = SignedVector::new(m, avg);
            let z = poly_conv_signed(
                ConvKind::Vn,
                dd.lambda(),
                DegreePerspective::Edge,
                &s,
                table,
            );
            let t = c.as_signed().conv(ConvKind::Vn, &z, table);
            for (a, b) in acc.iter_mut().zip(t.as_slice()) {
                *a += b;
            }
        }
        for a in &mut acc {
            *a *= inv_w;
        }
        let next = Density::from_raw(m, acc);
        residual = residual.max(next.dist_inf(seq.get(i)));
        seq.entries[i] = next;
    }
    residual
}

/// Runs the coupled recursion from `Δ_m` at every position until the sweep
/// residual drops below `opts.fp_tol` (or early exit / iteration cap).
///
/// Jacobi iterates from `Δ_m` are pointwise monotone nonincreasing and
/// mirror-symmetric; monotonicity is asserted when `opts.check_monotone`
/// and the worst symmetry deviation is reported.
pub fn coupled_fp(
    eps: f64,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
    opts: &CoupledOptions,
) -> Result<(DensitySequence, CoupledFpReport)> {
    let m = table.m();
    let c = Density::channel(eps, m)?;
    let mut cur = DensitySequence::constant_delta(m, m, spec.n_w());
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut max_asymmetry = 0.0f64;
    let mut converged = false;
    while iterations < opts.max_iter {
        let (next, step) = match opts.sweep {
            SweepMode::Jacobi => {
                let next = coupled_step_with_channel(&cur, &c, dd, spec, table);
                let step = next.dist_inf(&cur);
                if opts.check_monotone {
                    assert!(
                        next.le_pointwise(&cur),
                        "coupled iterates from Δ_m must be pointwise nonincreasing \
                         (sweep {iterations})"
                    );
                }
                (next, step)
            }
            SweepMode::GaussSeidel => {
                let mut next = cur.clone();
                let step = gauss_seidel_sweep(&mut next, &c, dd, spec, table);
                (next, step)
            }
        };
        iterations += 1;
        residual = step;
        if opts.sweep == SweepMode::Jacobi {
            max_asymmetry = max_asymmetry.max(next.symmetry_residual());
        }
        cur = next;
        if residual <= opts.fp_tol {
            converged = true;
            break;
        }
        if opts.stop_when_decoded && cur.max_entropy() < opts.h_zero_tol {
            break;
        }
    }
    let decoded = cur.max_entropy() < opts.h_zero_tol;
    Ok((
        cur,
        CoupledFpReport {
            iterations,
            converged,
            residual,
            decoded,
            max_asymmetry,
        },
    ))
}

// ---------------------------------------------------------------------------
// Coupled potential
// ---------------------------------------------------------------------------

/// Coupled potential for SC-LDPC(λ, ρ, N, w, m), summed over the
/// independent first half of the chain:
///
/// `U_c = sum_{i=0}^{N_mid} [ (L'(1)/R'(1)) H(R^⊠(x_i)) + L'(1) H(ρ^⊠(x_i))
///        - L'(1) H(x_i ⊠ ρ^⊠(x_i))
///        - H(c_ε ⊡ L^⊡((1/w) sum_j ρ^⊠(x_{i+j}))) ]`.
///
/// A constant sequence makes every summand collapse to the uncoupled
/// potential of its value. The averaging window reads entries up to
/// `N_mid + w - 1` as they stand: the first half carries the independent
/// variables and the few positions past the middle enter as parameters,
/// which is what makes the potential stationary at coupled fixed points
/// for directions supported on the first half.
pub fn coupled_potential_u_c(
    seq: &DensitySequence,
    eps: f64,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
) -> f64 {
    let signed: Vec<SignedVector> = seq.entries.iter().map(Density::as_signed).collect();
    coupled_potential_u_c_signed(&signed, eps, dd, spec, table)
}

/// The coupled potential on raw signed sequences, used by the
/// finite-difference stationarity checks.
pub fn coupled_potential_u_c_signed(
    entries: &[SignedVector],
    eps: f64,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
) -> f64 {
    let m = table.m();
    assert_eq!(entries.len(), spec.n_w(), "sequence length != N_w");
    let c = Density::channel(eps, m).expect("erasure probability validated by caller");
    let n_mid = spec.n_mid();
    let w = spec.w();
    // ρ^⊠ of every position the averaging window can touch (w <= N keeps
    // the window inside the chain).
    let r: Vec<SignedVector> = (0..=n_mid + w - 1)
        .map(|i| {
            poly_conv_signed(
                ConvKind::Cn,
                dd.rho(),
                DegreePerspective::Edge,
                &entries[i],
                table,
            )
        })
        .collect();
    let inv_w = 1.0 / w as f64;
    let mut total = 0.0;
    for i in 0..=n_mid {
        let x = &entries[i];
        let y = &r[i];
        let r_node = poly_conv_signed(ConvKind::Cn, dd.big_r(), DegreePerspective::Node, x, table);
        let x_y = x.conv(ConvKind::Cn, y, table);
        let mut avg = SignedVector::zero(m);
        for j in 0..w {
            avg = &avg + &r[i + j];
        }
        let avg = avg.scale(inv_w);
        let l_node = poly_conv_signed(
            ConvKind::Vn,
            dd.big_l(),
            DegreePerspective::Node,
            &avg,
            table,
        );
        let c_term = c.as_signed().conv(ConvKind::Vn, &l_node, table);
        total += dd.lp1() / dd.rp1() * r_node.entropy() + dd.lp1() * y.entropy()
            - dd.lp1() * x_y.entropy()
            - c_term.entropy();
    }
    total
}

/// Shift operator: injects `Δ_0` at the front and drops the last entry.
pub fn shift(seq: &DensitySequence) -> DensitySequence {
    let mut entries = Vec::with_capacity(seq.len());
    entries.push(Density::delta(seq.m(), 0));
    entries.extend_from_slice(&seq.entries[..seq.len() - 1]);
    DensitySequence::new(entries)
}

// ---------------------------------------------------------------------------
// Middle-point analysis and thresholds
// ---------------------------------------------------------------------------

/// Middle points of coupled fixed points across a family of coupling
/// lengths, plus the uncoupled fixed-point residual of the largest one.
#[derive(Debug, Clone)]
pub struct MiddlePointReport {
    /// `(N, CFP middle entry)` per requested coupling length.
    pub points: Vec<(usize, Density)>,
    /// Whether the middle points are ⪯-monotone nondecreasing in N.
    pub monotone_in_n: bool,
    /// `‖T_s(m) - m‖_∞` at the largest N.
    pub ufp_residual: f64,
    /// False when any coupled run failed to converge.
    pub all_converged: bool,
}

/// Computes the CFP middle entry for each coupling length in `n_list`
/// (which must be increasing).
pub fn middle_point(
    eps: f64,
    dd: &DegreeDistribution,
    w: usize,
    n_list: &[usize],
    table: &CoefficientTable,
    opts: &CoupledOptions,
) -> Result<MiddlePointReport> {
    if n_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Validation(
            "coupling lengths must be increasing".into(),
        ));
    }
    let mut points = Vec::with_capacity(n_list.len());
    let mut all_converged = true;
    let run_opts = CoupledOptions {
        stop_when_decoded: false,
        ..opts.clone()
    };
    for &n in n_list {
        let spec = CouplingSpec::new(n, w)?;
        let (seq, report) = coupled_fp(eps, dd, &spec, table, &run_opts)?;
        all_converged &= report.converged;
        points.push((n, seq.get(spec.n_mid()).clone()));
    }
    let monotone_in_n = points.windows(2).all(|p| p[0].1.compare(&p[1].1).is_le());
    let last = &points.last().expect("n_list validated nonempty").1;
    let c = Density::channel(eps, table.m())?;
    let ufp_residual = de_step(last, &c, dd, table).dist_inf(last);
    Ok(MiddlePointReport {
        points,
        monotone_in_n,
        ufp_residual,
        all_converged,
    })
}

/// Coupled BP threshold by bisection: success at ε means the chain run
/// from `Δ_m` decodes every position below `opts.h_zero_tol`.
pub fn coupled_bp_threshold(
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
    opts: &CoupledOptions,
) -> Result<f64> {
    let probe_opts = CoupledOptions {
        stop_when_decoded: true,
        ..opts.clone()
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > opts.eps_tol {
        let mid = 0.5 * (lo + hi);
        let (_, report) = coupled_fp(mid, dd, spec, table, &probe_opts)?;
        if report.decoded {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Entropy profiles `H(x_i)` sampled every `snapshot_every` sweeps while
/// the chain runs from `Δ_m`, for offline wave-propagation plots.
pub fn wave_profile(
    eps: f64,
    dd: &DegreeDistribution,
    spec: &CouplingSpec,
    table: &CoefficientTable,
    snapshot_every: usize,
    opts: &CoupledOptions,
) -> Result<Vec<(usize, Vec<f64>)>> {
    if snapshot_every == 0 {
        return Err(Error::Validation(
            "snapshot_every must be at least 1".into(),
        ));
    }
    let m = table.m();
    let c = Density::channel(eps, m)?;
    let mut cur = DensitySequence::constant_delta(m, m, spec.n_w());
    let mut snapshots = Vec::new();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = coupled_step_with_channel(&cur, &c, dd, spec, table);
        iterations += 1;
        let step = next.dist_inf(&cur);
        cur = next;
        if iterations % snapshot_every == 0 {
            snapshots.push((iterations, cur.entropy_profile()));
        }
        if step <= opts.fp_tol || (opts.stop_when_decoded && cur.max_entropy() < opts.h_zero_tol) {
            break;
        }
    }
    if snapshots.last().map(|(it, _)| *it) != Some(iterations) {
        snapshots.push((iterations, cur.entropy_profile()));
    }
    Ok(snapshots)
}
