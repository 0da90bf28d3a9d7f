//! Exact computation of Gaussian binomial coefficients and the VN/CN
//! convolution coefficient tensors.
//!
//! The tensor entry `V[i][j][k]` is the probability that two independent
//! uniformly random subspaces of GF(2)^m with dimensions `i` and `j`
//! intersect in a subspace of dimension `k`; `C[i][j][k]` is the analogous
//! probability for the dimension of their sum. Everything here is computed
//! in arbitrary-precision rational arithmetic so that the algebraic
//! identities the tensors must satisfy can be verified with zero error;
//! double-precision mirrors are kept for the DE inner loops.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use crate::{Error, Result};

/// Largest supported field-extension degree. Tables are (m+1)^3 rationals,
/// so memory is negligible, but the integers inside grow like 2^O(m^2).
pub const MAX_M: usize = 16;

/// Largest `m` for which brute-force subspace enumeration is allowed.
pub const MAX_ORACLE_M: usize = 4;

/// Gaussian binomial coefficient `[m k]` for q = 2: the number of
/// k-dimensional subspaces of GF(2)^m.
///
/// Returns 1 for `k == 0` or `k == m` and 0 for `k < 0` or `k > m`, so
/// tensor formulas need no special-casing at the boundaries.
pub fn gaussian_binomial(m: usize, k: i64) -> BigInt {
    if k < 0 || k > m as i64 {
        return BigInt::zero();
    }
    let k = k as usize;
    if k == 0 || k == m {
        return BigInt::one();
    }
    // prod_{l=0}^{k-1} (2^m - 2^l) / (2^k - 2^l), exact in BigInt.
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for l in 0..k {
        num *= pow2(m) - pow2(l);
        den *= pow2(k) - pow2(l);
    }
    num / den
}

fn pow2(e: usize) -> BigInt {
    BigInt::one() << e
}

fn check_index(m: usize, name: &str, v: usize) -> Result<()> {
    if v > m {
        return Err(Error::Range(format!("{name} = {v} exceeds m = {m}")));
    }
    Ok(())
}

/// VN coefficient `V^m_{i,j,k} = 2^{(i-k)(j-k)} [i k][m-i j-k] / [m j]`.
///
/// Zero whenever a Gaussian binomial in the numerator vanishes; in every
/// nonzero case the exponent `(i-k)(j-k)` is nonnegative.
pub fn vn_coeff(m: usize, i: usize, j: usize, k: usize) -> Result<BigRational> {
    check_index(m, "i", i)?;
    check_index(m, "j", j)?;
    check_index(m, "k", k)?;
    let top1 = gaussian_binomial(i, k as i64);
    let top2 = gaussian_binomial(m - i, j as i64 - k as i64);
    if top1.is_zero() || top2.is_zero() {
        return Ok(BigRational::zero());
    }
    // Nonzero binomials force k <= i and k <= j.
    let exp = (i - k) * (j - k);
    let num = pow2(exp) * top1 * top2;
    let den = gaussian_binomial(m, j as i64);
    Ok(BigRational::new(num, den))
}

/// CN coefficient `C^m_{i,j,k} = 2^{(k-i)(k-j)} [m-i m-k][i k-j] / [m m-j]`.
pub fn cn_coeff(m: usize, i: usize, j: usize, k: usize) -> Result<BigRational> {
    check_index(m, "i", i)?;
    check_index(m, "j", j)?;
    check_index(m, "k", k)?;
    let top1 = gaussian_binomial(m - i, m as i64 - k as i64);
    let top2 = gaussian_binomial(i, k as i64 - j as i64);
    if top1.is_zero() || top2.is_zero() {
        return Ok(BigRational::zero());
    }
    // Nonzero binomials force k >= i and k >= j.
    let exp = (k - i) * (k - j);
    let num = pow2(exp) * top1 * top2;
    let den = gaussian_binomial(m, m as i64 - j as i64);
    Ok(BigRational::new(num, den))
}

/// Exact VN/CN coefficient tensors for a fixed `m`, plus double mirrors.
///
/// Immutable after construction; all invariants are verified in exact
/// arithmetic by [`CoefficientTable::build`].
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    m: usize,
    v: Vec<BigRational>,
    c: Vec<BigRational>,
    vf: Vec<f64>,
    cf: Vec<f64>,
}

impl CoefficientTable {
    /// Builds and verifies the tensors for `1 <= m <= MAX_M`.
    pub fn build(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_M {
            return Err(Error::Validation(format!(
                "m = {m} outside supported range 1..={MAX_M}"
            )));
        }
        let n = m + 1;
        let mut v = vec![BigRational::zero(); n * n * n];
        let mut c = vec![BigRational::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = (i * n + j) * n + k;
                    v[idx] = vn_coeff(m, i, j, k)?;
                    c[idx] = cn_coeff(m, i, j, k)?;
                }
            }
        }
        let vf = v.iter().map(rational_to_f64).collect();
        let cf = c.iter().map(rational_to_f64).collect();
        let table = CoefficientTable { m, v, c, vf, cf };
        table.assert_invariants();
        Ok(table)
    }

    /// Returns a process-wide shared table for `m`, building it on first use.
    pub fn shared(m: usize) -> Result<Arc<CoefficientTable>> {
        static CACHE: Lazy<Mutex<HashMap<usize, Arc<CoefficientTable>>>> =
            Lazy::new(|| Mutex::new(HashMap::new()));
        let mut cache = CACHE.lock().expect("coefficient cache poisoned");
        if let Some(t) = cache.get(&m) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(CoefficientTable::build(m)?);
        cache.insert(m, Arc::clone(&table));
        Ok(table)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.m + 1;
        (i * n + j) * n + k
    }

    /// Exact `V^m_{i,j,k}`.
    pub fn v(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.v[self.idx(i, j, k)]
    }

    /// Exact `C^m_{i,j,k}`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> &BigRational {
        &self.c[self.idx(i, j, k)]
    }

    /// Double mirror of `V^m_{i,j,k}`.
    #[inline]
    pub fn vf(&self, i: usize, j: usize, k: usize) -> f64 {
        self.vf[self.idx(i, j, k)]
    }

    /// Double mirror of `C^m_{i,j,k}`.
    #[inline]
    pub fn cf(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cf[self.idx(i, j, k)]
    }

    /// Contiguous k-row of the V mirror for fixed (i, j).
    #[inline]
    pub fn vf_row(&self, i: usize, j: usize) -> &[f64] {
        let base = self.idx(i, j, 0);
        &self.vf[base..base + self.m + 1]
    }

    /// Contiguous k-row of the C mirror for fixed (i, j).
    #[inline]
    pub fn cf_row(&self, i: usize, j: usize) -> &[f64] {
        let base = self.idx(i, j, 0);
        &self.cf[base..base + self.m + 1]
    }

    /// Verifies the exact-arithmetic invariants, panicking on violation.
    ///
    /// These are structural guarantees of the construction; a failure here
    /// is a bug, not a data error.
    fn assert_invariants(&self) {
        let m = self.m;
        for i in 0..=m {
            for j in 0..=m {
                let mut v_sum = BigRational::zero();
                let mut c_sum = BigRational::zero();
                let mut kernel = BigRational::zero();
                for k in 0..=m {
                    let v = self.v(i, j, k);
                    let c = self.c(i, j, k);
                    assert!(
                        !v.is_negative() && *v <= BigRational::one(),
                        "V[{i}][{j}][{k}] outside [0,1] for m={m}"
                    );
                    assert!(
                        !c.is_negative() && *c <= BigRational::one(),
                        "C[{i}][{j}][{k}] outside [0,1] for m={m}"
                    );
                    assert_eq!(v, self.v(j, i, k), "V swap symmetry broken at m={m}");
                    assert_eq!(c, self.c(j, i, k), "C swap symmetry broken at m={m}");
                    assert_eq!(
                        c,
                        self.v(m - i, m - j, m - k),
                        "C/V complement duality broken at m={m}"
                    );
                    v_sum += v;
                    c_sum += c;
                    kernel += (v + c) * BigRational::from_integer(BigInt::from(k));
                }
                assert!(v_sum.is_one(), "V row sum != 1 at m={m}, i={i}, j={j}");
                assert!(c_sum.is_one(), "C row sum != 1 at m={m}, i={i}, j={j}");
                assert_eq!(
                    kernel,
                    BigRational::from_integer(BigInt::from(i + j)),
                    "duality kernel sum_k k(V+C) != i+j at m={m}, i={i}, j={j}"
                );
            }
        }
    }

    /// Returns a copy with the V row (m,m) and its dual C row (0,0)
    /// perturbed so that row sums, swap symmetry, complement duality and
    /// the monotonicity inequalities still hold but the duality kernel
    /// fails. Negative control for the verification suite.
    #[doc(hidden)]
    pub fn corrupted(&self) -> Self {
        let mut t = self.clone();
        let m = t.m;
        let delta = BigRational::new(BigInt::from(1), BigInt::from(64));
        let deltaf = rational_to_f64(&delta);
        // V[m][m]: move mass from k=m to k=m-1; kernel at (m,m) loses delta.
        let i0 = t.idx(m, m, m);
        let i1 = t.idx(m, m, m - 1);
        t.v[i0] -= &delta;
        t.v[i1] += &delta;
        t.vf[i0] -= deltaf;
        t.vf[i1] += deltaf;
        // Dual entries C[0][0][m-k]; kernel at (0,0) gains delta, so the
        // two rows cannot cancel each other.
        let j0 = t.idx(0, 0, 0);
        let j1 = t.idx(0, 0, 1);
        t.c[j0] -= &delta;
        t.c[j1] += &delta;
        t.cf[j0] -= deltaf;
        t.cf[j1] += deltaf;
        t
    }
}

/// Nearest-double rounding of an exact rational in [0, 1].
fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Empirical distributions of `dim(S ∩ S')` and `dim(S + S')` over all
/// ordered pairs of subspaces of GF(2)^m with `dim S = i`, `dim S' = j`,
/// computed by exhaustive enumeration.
///
/// The intersection distribution must equal the row `V[i][j][.]` and the
/// sum distribution the row `C[i][j][.]`; this is the ground-truth oracle
/// for the tensor formulas.
pub fn subspace_oracle(
    m: usize,
    i: usize,
    j: usize,
) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    if m == 0 || m > MAX_ORACLE_M {
        return Err(Error::Infeasible(format!(
            "subspace enumeration supported for 1 <= m <= {MAX_ORACLE_M}, got {m}"
        )));
    }
    check_index(m, "i", i)?;
    check_index(m, "j", j)?;
    let by_dim = subspaces_by_dim(m);
    let lhs = &by_dim[i];
    let rhs = &by_dim[j];
    let mut cap_counts = vec![0u64; m + 1];
    let mut sum_counts = vec![0u64; m + 1];
    for &s in lhs {
        for &t in rhs {
            cap_counts[mask_dim(s & t)] += 1;
            sum_counts[mask_dim(mask_sum(s, t))] += 1;
        }
    }
    let total = BigInt::from(lhs.len() as u64 * rhs.len() as u64);
    let to_dist = |counts: Vec<u64>| {
        counts
            .into_iter()
            .map(|c| BigRational::new(BigInt::from(c), total.clone()))
            .collect()
    };
    Ok((to_dist(cap_counts), to_dist(sum_counts)))
}

/// All subspaces of GF(2)^m grouped by dimension. A subspace is encoded as
/// a bitmask over the 2^m vectors; bit `v` is set iff vector `v` belongs.
#[allow(clippy::needless_range_loop)]
fn subspaces_by_dim(m: usize) -> Vec<Vec<u32>> {
    let size = 1usize << m;
    let zero_space: u32 = 1; // only the zero vector
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); m + 1];
    by_dim[0].push(zero_space);
    let mut frontier = vec![zero_space];
    for d in 1..=m {
        let mut next: Vec<u32> = Vec::new();
        for &space in &frontier {
            for v in 1..size as u32 {
                if space & (1 << v) != 0 {
                    continue;
                }
                let extended = extend_span(space, v, size);
                if !next.contains(&extended) {
                    next.push(extended);
                }
            }
        }
        next.sort_unstable();
        by_dim[d] = next.clone();
        frontier = next;
    }
    by_dim
}

/// Span of `space ∪ {v}` for a subspace mask `space` and vector `v ∉ space`:
/// the union of `space` with its coset `space ⊕ v`.
fn extend_span(space: u32, v: u32, size: usize) -> u32 {
    let mut out = space;
    for u in 0..size as u32 {
        if space & (1 << u) != 0 {
            out |= 1 << (u ^ v);
        }
    }
    out
}

/// `{s ⊕ t : s ∈ S, t ∈ T}`, which is already the subspace S + T.
fn mask_sum(s: u32, t: u32) -> u32 {
    let mut out = 0u32;
    for a in 0..32 {
        if s & (1 << a) == 0 {
            continue;
        }
        for b in 0..32 {
            if t & (1 << b) != 0 {
                out |= 1 << (a ^ b);
            }
        }
    }
    out
}

fn mask_dim(mask: u32) -> usize {
    mask.count_ones().trailing_zeros() as usize
}
