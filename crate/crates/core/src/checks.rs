//! Runnable identity and monotonicity checks.
//!
//! Every algebraic fact the coefficient tensors and the density operators
//! must satisfy is packaged here as a function returning a [`CheckReport`],
//! so the same code backs the unit tests, the acceptance suite, and the
//! command-line `verify` run. Exact tensor identities are checked in
//! rational arithmetic with zero tolerance; sampled operator identities
//! use seeded generators so reruns are bit-identical.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::de_uncoupled::{directional_derivative_u_s, finite_difference_u_s, DegreeDistribution};
use crate::density::{
    sample_comparable_pair, sample_density, sample_direction, ConvKind, Density, DensityOrdering,
};
use crate::gf_coeffs::{gaussian_binomial, subspace_oracle, CoefficientTable, MAX_ORACLE_M};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// Worst violation observed (0 when everything held).
    pub max_error: f64,
    /// Number of sampled instances (0 for exhaustive exact checks).
    pub samples: usize,
    pub skipped: bool,
    pub detail: String,
}

impl CheckReport {
    fn exact(name: &'static str, violations: usize, detail: String) -> Self {
        CheckReport {
            name,
            passed: violations == 0,
            max_error: violations as f64,
            samples: 0,
            skipped: false,
            detail,
        }
    }

    fn sampled(name: &'static str, max_error: f64, tol: f64, samples: usize) -> Self {
        CheckReport {
            name,
            passed: max_error <= tol,
            max_error,
            samples,
            skipped: false,
            detail: format!("max error {max_error:.3e} vs tolerance {tol:.1e}"),
        }
    }

    fn skip(name: &'static str, why: &str) -> Self {
        CheckReport {
            name,
            passed: true,
            max_error: 0.0,
            samples: 0,
            skipped: true,
            detail: why.to_string(),
        }
    }
}

fn big(k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

// ---------------------------------------------------------------------------
// Exact tensor identities
// ---------------------------------------------------------------------------

/// Row sums of both tensors equal 1 exactly.
pub fn check_row_sums(table: &CoefficientTable) -> CheckReport {
    let m = table.m();
    let mut violations = 0;
    for i in 0..=m {
        for j in 0..=m {
            let v: BigRational = (0..=m).map(|k| table.v(i, j, k).clone()).sum();
            let c: BigRational = (0..=m).map(|k| table.c(i, j, k).clone()).sum();
            if !v.is_one() || !c.is_one() {
                violations += 1;
            }
        }
    }
    CheckReport::exact("row_sums", violations, format!("{violations} rows off 1"))
}

/// Both tensors are invariant under swapping i and j.
pub fn check_swap_symmetry(table: &CoefficientTable) -> CheckReport {
    let m = table.m();
    let mut violations = 0;
    for i in 0..=m {
        for j in 0..=m {
            for k in 0..=m {
                if table.v(i, j, k) != table.v(j, i, k) || table.c(i, j, k) != table.c(j, i, k) {
                    violations += 1;
                }
            }
        }
    }
    CheckReport::exact("swap_symmetry", violations, format!("{violations} entries"))
}

/// `C[i][j][k] = V[m-i][m-j][m-k]` exactly.
pub fn check_complement_duality(table: &CoefficientTable) -> CheckReport {
    let m = table.m();
    let mut violations = 0;
    for i in 0..=m {
        for j in 0..=m {
            for k in 0..=m {
                if table.c(i, j, k) != table.v(m - i, m - j, m - k) {
                    violations += 1;
                }
            }
        }
    }
    CheckReport::exact(
        "complement_duality",
        violations,
        format!("{violations} entries"),
    )
}

/// The conservation kernel `sum_k k (V + C) = i + j` exactly; this is the
/// identity behind the entropy duality rule.
pub fn check_duality_kernel(table: &CoefficientTable) -> CheckReport {
    let m = table.m();
    let mut violations = 0;
    for i in 0..=m {
        for j in 0..=m {
            let mut kernel = BigRational::zero();
            for k in 1..=m {
                kernel += (table.v(i, j, k) + table.c(i, j, k)) * big(k);
            }
            if kernel != big(i + j) {
                violations += 1;
            }
        }
    }
    CheckReport::exact(
        "duality_kernel",
        violations,
        format!("{violations} (i,j) pairs"),
    )
}

/// Strict growth of V in i (and the mirrored decay of C) on the feasible
/// index range `0 < k <= min(i, j)`, `i + j <= m + k`; feasibility keeps
/// both entries positive; outside it the inequality degenerates to 0 < 0.
/// Also checks the nonnegative tail sums
/// `sum_{k>=n} (V[i][j][k] - V[i-1][j][k]) >= 0` that order preservation
/// rests on (the C side follows from the complement duality, which is
/// checked separately).
pub fn check_strict_monotonicity(table: &CoefficientTable) -> CheckReport {
    let m = table.m();
    let mut violations = 0;
    for i in 1..=m {
        for j in 0..=m {
            for k in 0..=m {
                // strict entrywise growth on the feasible region
                if k >= 1
                    && k <= i
                    && k <= j
                    && i + j <= m + k
                    && table.v(i - 1, j, k) >= table.v(i, j, k)
                {
                    violations += 1;
                }
                // mirrored region for C: i in [1, k+1], j <= k, i+j >= k+1, k < m
                if i <= k + 1
                    && j <= k
                    && i + j > k
                    && k < m
                    && table.c(i - 1, j, k) <= table.c(i, j, k)
                {
                    violations += 1;
                }
            }
            // nonneg tail sums of the i-difference
            for n in 1..=m {
                let mut tail = BigRational::zero();
                for k in n..=m {
                    tail += table.v(i, j, k) - table.v(i - 1, j, k);
                }
                if tail.is_negative() {
                    violations += 1;
                }
            }
        }
    }
    CheckReport::exact(
        "strict_monotonicity",
        violations,
        format!("{violations} triples"),
    )
}

/// Gauss's binomial formula
/// `prod_{a=1}^m (1 + 2^(a-1) x) = sum_j 2^(j(j-1)/2) [m j] x^j`
/// at x in {1/2, 1, 2}, in exact rational arithmetic.
pub fn check_gauss_binomial_formula(m: usize) -> CheckReport {
    let mut violations = 0;
    for (num, den) in [(1i64, 2i64), (1, 1), (2, 1)] {
        let x = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mut product = BigRational::one();
        for alpha in 1..=m {
            product *=
                BigRational::one() + BigRational::from_integer(BigInt::one() << (alpha - 1)) * &x;
        }
        let mut sum = BigRational::zero();
        for j in 0..=m {
            let weight = BigRational::from_integer(
                (BigInt::one() << (j * j.saturating_sub(1) / 2)) * gaussian_binomial(m, j as i64),
            );
            let mut xj = BigRational::one();
            for _ in 0..j {
                xj *= &x;
            }
            sum += weight * xj;
        }
        if product != sum {
            violations += 1;
        }
    }
    CheckReport::exact(
        "gauss_binomial_formula",
        violations,
        format!("{violations} x values"),
    )
}

/// Brute-force subspace enumeration reproduces every V and C row exactly.
pub fn check_subspace_oracle(table: &CoefficientTable) -> CheckReport {
    let m = table.m();
    if m > MAX_ORACLE_M {
        return CheckReport::skip("subspace_oracle", "enumeration infeasible for this m");
    }
    let mut violations = 0;
    for i in 0..=m {
        for j in 0..=m {
            let (cap, sum) = subspace_oracle(m, i, j).expect("m validated above");
            for k in 0..=m {
                if &cap[k] != table.v(i, j, k) || &sum[k] != table.c(i, j, k) {
                    violations += 1;
                }
            }
        }
    }
    CheckReport::exact(
        "subspace_oracle",
        violations,
        format!("{violations} entries"),
    )
}

// ---------------------------------------------------------------------------
// Sampled operator identities
// ---------------------------------------------------------------------------

/// Duality rule for entropy: `H(a) + H(b) = H(a ⊡ b) + H(a ⊠ b)`.
pub fn check_duality_rule(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = sample_density(m, rng);
        let b = sample_density(m, rng);
        let gap = a.entropy() + b.entropy()
            - a.conv(ConvKind::Vn, &b, table).entropy()
            - a.conv(ConvKind::Cn, &b, table).entropy();
        worst = worst.max(gap.abs());
    }
    CheckReport::sampled("duality_rule", worst, tol, samples)
}

/// Difference extensions of the duality rule:
/// `H(a ⊡ (b - c)) + H(a ⊠ (b - c)) = H(b - c)` and
/// `H((a - b) ⊡ (c - d)) + H((a - b) ⊠ (c - d)) = 0`.
pub fn check_duality_corollaries(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = sample_density(m, rng);
        let b = sample_density(m, rng);
        let c = sample_density(m, rng);
        let d = sample_density(m, rng);
        let bc = &b - &c;
        let first = a.as_signed().conv(ConvKind::Vn, &bc, table).entropy()
            + a.as_signed().conv(ConvKind::Cn, &bc, table).entropy()
            - bc.entropy();
        let ab = &a - &b;
        let cd = &c - &d;
        let second = ab.conv(ConvKind::Vn, &cd, table).entropy()
            + ab.conv(ConvKind::Cn, &cd, table).entropy();
        worst = worst.max(first.abs()).max(second.abs());
    }
    CheckReport::sampled("duality_corollaries", worst, tol, samples)
}

/// Commutativity, distributivity over addition, and associativity of both
/// convolutions.
pub fn check_operator_laws(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = sample_density(m, rng).as_signed();
        let b = sample_density(m, rng).as_signed();
        let c = sample_density(m, rng).as_signed();
        for kind in [ConvKind::Vn, ConvKind::Cn] {
            let comm = &a.conv(kind, &b, table) - &b.conv(kind, &a, table);
            let dist = &a.conv(kind, &(&b + &c), table)
                - &(&a.conv(kind, &b, table) + &a.conv(kind, &c, table));
            let assoc = &a.conv(kind, &b, table).conv(kind, &c, table)
                - &a.conv(kind, &b.conv(kind, &c, table), table);
            worst = worst.max(comm.linf()).max(dist.linf()).max(assoc.linf());
        }
    }
    CheckReport::sampled("operator_laws", worst, tol, samples)
}

/// Both convolutions preserve the degradation order, strictly when the pair
/// is strict and the third density is not the absorbing identity.
pub fn check_order_preservation(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    let mut strict_failures = 0usize;
    for _ in 0..samples {
        let (lo, hi) = sample_comparable_pair(m, rng, table);
        let c = sample_density(m, rng);
        for kind in [ConvKind::Vn, ConvKind::Cn] {
            let out_lo = lo.conv(kind, &c, table);
            let out_hi = hi.conv(kind, &c, table);
            worst = worst.max(order_violation(&out_lo, &out_hi));
            // strict preservation (random interior c is never Δ_0 or Δ_m)
            if lo.compare(&hi) == DensityOrdering::Less
                && out_lo.compare(&out_hi) != DensityOrdering::Less
            {
                strict_failures += 1;
            }
        }
    }
    let mut report = CheckReport::sampled("order_preservation", worst, tol, samples);
    if strict_failures > 0 {
        report.passed = false;
        report.detail = format!(
            "{} strict-order failures; {}",
            strict_failures, report.detail
        );
    }
    report
}

/// How far `a ⪯ b` is from holding: the largest positive excess of a tail
/// sum of `a` over the matching tail sum of `b`.
fn order_violation(a: &Density, b: &Density) -> f64 {
    let m = a.m();
    let mut tail_a = 0.0;
    let mut tail_b = 0.0;
    let mut worst = 0.0f64;
    for k in (1..=m).rev() {
        tail_a += a.as_slice()[k];
        tail_b += b.as_slice()[k];
        worst = worst.max(tail_a - tail_b);
    }
    worst
}

/// Signs of entropies of convolved differences: for `a ⪯ b`, `c ⪯ d`,
/// `H((a-b) ⊡ (c-d)) >= 0` and `H((a-b) ⊠ (c-d)) <= 0`, plus the squared
/// variants `H((a-b)^{⊡2} ⊡ e) >= 0` and `H((a-b)^{⊠2} ⊠ e) <= 0`.
pub fn check_difference_signs(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (a, b) = sample_comparable_pair(m, rng, table);
        let (c, d) = sample_comparable_pair(m, rng, table);
        let ab = &a - &b;
        let cd = &c - &d;
        worst = worst.max(-ab.conv(ConvKind::Vn, &cd, table).entropy());
        worst = worst.max(ab.conv(ConvKind::Cn, &cd, table).entropy());

        let e = sample_density(m, rng).as_signed();
        let sq_vn = ab
            .conv(ConvKind::Vn, &ab, table)
            .conv(ConvKind::Vn, &e, table);
        let sq_cn = ab
            .conv(ConvKind::Cn, &ab, table)
            .conv(ConvKind::Cn, &e, table);
        worst = worst.max(-sq_vn.entropy()).max(sq_cn.entropy());
    }
    CheckReport::sampled("difference_signs", worst, tol, samples)
}

/// `|H((a-b) * (c-d))| <= H(a-b)` for `a ⪰ b` and arbitrary c, d.
pub fn check_entropy_bound(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (lo, hi) = sample_comparable_pair(m, rng, table);
        let diff = &hi - &lo; // hi ⪰ lo
        let c = sample_density(m, rng);
        let d = sample_density(m, rng);
        let cd = &c - &d;
        let bound = diff.entropy();
        for kind in [ConvKind::Vn, ConvKind::Cn] {
            let value = diff.conv(kind, &cd, table).entropy();
            worst = worst.max(value.abs() - bound);
        }
    }
    CheckReport::sampled("entropy_bound", worst, tol, samples)
}

/// Entropy preserves the partial order, strictly on strict pairs.
pub fn check_entropy_order(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    let mut strict_failures = 0usize;
    for _ in 0..samples {
        let (lo, hi) = sample_comparable_pair(m, rng, table);
        worst = worst.max(lo.entropy() - hi.entropy());
        if lo.compare(&hi) == DensityOrdering::Less && lo.entropy() >= hi.entropy() {
            strict_failures += 1;
        }
    }
    let mut report = CheckReport::sampled("entropy_order", worst, tol, samples);
    if strict_failures > 0 {
        report.passed = false;
        report.detail = format!("{} strict failures; {}", strict_failures, report.detail);
    }
    report
}

/// At m = 1 the algebra collapses to scalar binary-BEC DE:
/// `[a ⊡ b]_1 = a_1 b_1` and `[a ⊠ b]_1 = a_1 + b_1 - a_1 b_1`.
pub fn check_m1_reduction(
    table: &CoefficientTable,
    samples: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> CheckReport {
    if table.m() != 1 {
        return CheckReport::skip("m1_reduction", "only applies to m = 1");
    }
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = sample_density(1, rng);
        let b = sample_density(1, rng);
        let (x, y) = (a.as_slice()[1], b.as_slice()[1]);
        let vn = a.conv(ConvKind::Vn, &b, table).as_slice()[1];
        let cn = a.conv(ConvKind::Cn, &b, table).as_slice()[1];
        worst = worst.max((vn - x * y).abs());
        worst = worst.max((cn - (x + y - x * y)).abs());
    }
    CheckReport::sampled("m1_reduction", worst, tol, samples)
}

/// The closed-form directional derivative of the potential against a
/// central finite difference of the potential itself.
pub fn check_gradient(
    table: &CoefficientTable,
    dd: &DegreeDistribution,
    samples: usize,
    rng: &mut impl Rng,
    rel_tol: f64,
) -> CheckReport {
    let m = table.m();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_density(m, rng);
        let eps = rng.gen_range(0.02..0.98);
        let dx = sample_direction(m, rng);
        let formula = directional_derivative_u_s(&x, eps, &dx, dd, table)
            .expect("sampled directions sum to zero");
        let fd = finite_difference_u_s(&x, eps, &dx, dd, table, 1e-6);
        // The centered difference carries ~1e-10 of cancellation and
        // truncation noise of its own, so derivatives below 1e-3 are held
        // to the absolute tolerance 1e-8 instead of a pure ratio.
        let denom = formula.abs().max(fd.abs()).max(1e-3);
        worst = worst.max((formula - fd).abs() / denom);
    }
    CheckReport::sampled("gradient_check", worst, rel_tol, samples)
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

/// Tolerances and sample counts for [`run_verify_suite`].
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub identity_tol: f64,
    pub gradient_rel_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 2_000,
            seed: 0x6e62_6465,
            identity_tol: 1e-12,
            gradient_rel_tol: 1e-5,
        }
    }
}

/// Runs the full lemma and identity suite against one coefficient table.
///
/// `dd` powers the gradient check; when absent the (3,6)-regular ensemble
/// is used.
pub fn run_verify_suite(
    table: &CoefficientTable,
    dd: Option<&DegreeDistribution>,
    cfg: &VerifyConfig,
) -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fallback;
    let dd = match dd {
        Some(d) => d,
        None => {
            fallback = DegreeDistribution::regular(3, 6).expect("(3,6) is a valid ensemble");
            &fallback
        }
    };
    let t = cfg.identity_tol;
    let n = cfg.samples;
    vec![
        check_row_sums(table),
        check_swap_symmetry(table),
        check_complement_duality(table),
        check_duality_kernel(table),
        check_strict_monotonicity(table),
        check_gauss_binomial_formula(table.m()),
        check_subspace_oracle(table),
        check_duality_rule(table, n, &mut rng, t),
        check_duality_corollaries(table, n, &mut rng, t),
        check_operator_laws(table, n, &mut rng, t),
        check_order_preservation(table, n, &mut rng, t),
        check_difference_signs(table, n, &mut rng, t),
        check_entropy_bound(table, n, &mut rng, t),
        check_entropy_order(table, n, &mut rng, t),
        check_m1_reduction(table, n, &mut rng, 1e-14),
        check_gradient(table, dd, n.min(200), &mut rng, cfg.gradient_rel_tol),
    ]
}

/// Stationarity of the potential at a fixed point: the directional
/// derivative against `directions` random directions, reported as the
/// worst |derivative| / scale where the scale is the natural magnitude of
/// the trilinear form `L'(1) m (m+1) ρ'(1) ‖δx‖₁`.
pub fn ufp_stationarity_residual(
    fp: &Density,
    eps: f64,
    dd: &DegreeDistribution,
    table: &CoefficientTable,
    directions: usize,
    rng: &mut impl Rng,
) -> f64 {
    let m = table.m();
    let rho_p1: f64 = dd.rho().iter().map(|&(d, c)| (d - 1) as f64 * c).sum();
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let dx = sample_direction(m, rng);
        let value = directional_derivative_u_s(fp, eps, &dx, dd, table)
            .expect("sampled directions sum to zero");
        let scale = dd.lp1() * m as f64 * (m + 1) as f64 * rho_p1 * dx.l1();
        worst = worst.max(value.abs() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_for_small_m() {
        for m in 1..=3 {
            let table = CoefficientTable::shared(m).unwrap();
            let cfg = VerifyConfig {
                samples: 300,
                ..VerifyConfig::default()
            };
            let reports = run_verify_suite(&table, None, &cfg);
            for r in &reports {
                assert!(r.passed, "m={m}: check {} failed: {}", r.name, r.detail);
            }
        }
    }

    #[test]
    fn exact_checks_hold_through_m8() {
        for m in 4..=8 {
            let table = CoefficientTable::build(m).unwrap();
            for check in [
                check_row_sums(&table),
                check_swap_symmetry(&table),
                check_complement_duality(&table),
                check_duality_kernel(&table),
                check_strict_monotonicity(&table),
                check_gauss_binomial_formula(m),
            ] {
                assert!(
                    check.passed,
                    "m={m}: {} failed: {}",
                    check.name, check.detail
                );
            }
        }
    }

    #[test]
    fn corrupted_table_fails_exactly_the_kernel() {
        let table = CoefficientTable::shared(2).unwrap().corrupted();
        let cfg = VerifyConfig {
            samples: 200,
            ..VerifyConfig::default()
        };
        let reports = run_verify_suite(&table, None, &cfg);
        let kernel = reports.iter().find(|r| r.name == "duality_kernel").unwrap();
        assert!(!kernel.passed);
        for r in &reports {
            if [
                "row_sums",
                "swap_symmetry",
                "complement_duality",
                "strict_monotonicity",
            ]
            .contains(&r.name)
            {
                assert!(r.passed, "{} should survive the corruption", r.name);
            }
        }
    }

    #[test]
    fn stationarity_residual_is_small_at_delta0() {
        let table = CoefficientTable::shared(2).unwrap();
        let dd = DegreeDistribution::regular(3, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fp = Density::delta(2, 0);
        let worst = ufp_stationarity_residual(&fp, 0.4, &dd, &table, 20, &mut rng);
        assert!(worst <= 1e-9, "residual {worst}");
    }
}
