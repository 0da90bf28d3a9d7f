//! The density algebra on the BEC with GL(2^m) edge labels.
//!
//! A [`Density`] is a probability vector over subspace dimensions 0..=m.
//! The two extremal densities are `Δ_0` (message pins the symbol down
//! perfectly) and `Δ_m` (message carries no information). [`SignedVector`]
//! extends the algebra to arbitrary real vectors so that differences of
//! densities can flow through the same convolutions; it is a distinct type
//! so that difference quantities never masquerade as probability vectors.

use rand::Rng;

use crate::gf_coeffs::CoefficientTable;
use crate::tol::{MASS_DRIFT_TOL, ORDER_TOL};
use crate::{Error, Result};

/// Which node's convolution coefficients to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    /// Variable-node combination: subspace intersection, coefficients V.
    Vn,
    /// Check-node combination: subspace sum, coefficients C.
    Cn,
}

impl ConvKind {
    /// The n = 0 convolution power: `Δ_m` at VNs, `Δ_0` at CNs.
    fn power_identity(self, m: usize) -> Vec<f64> {
        match self {
            ConvKind::Vn => delta_raw(m, m),
            ConvKind::Cn => delta_raw(m, 0),
        }
    }
}

/// Whether a degree-polynomial convolution uses edge-perspective
/// coefficients (exponent `degree - 1`) or node-perspective coefficients
/// (exponent `degree`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreePerspective {
    Edge,
    Node,
}

/// Outcome of comparing two densities in the degradation partial order
/// (tail-sum dominance).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityOrdering {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl DensityOrdering {
    /// Non-strict `self ⪯ other`.
    pub fn is_le(self) -> bool {
        matches!(self, DensityOrdering::Less | DensityOrdering::Equal)
    }

    /// Non-strict `self ⪰ other`.
    pub fn is_ge(self) -> bool {
        matches!(self, DensityOrdering::Greater | DensityOrdering::Equal)
    }

    /// Strict `self ≺ other`.
    pub fn is_lt(self) -> bool {
        matches!(self, DensityOrdering::Less)
    }

    /// Strict `self ≻ other`.
    pub fn is_gt(self) -> bool {
        matches!(self, DensityOrdering::Greater)
    }

    pub fn is_comparable(self) -> bool {
        !matches!(self, DensityOrdering::Incomparable)
    }
}

fn delta_raw(m: usize, k: usize) -> Vec<f64> {
    let mut p = vec![0.0; m + 1];
    p[k] = 1.0;
    p
}

#[inline]
fn assert_same_m(a: usize, b: usize, what: &str) {
    assert!(
        a == b,
        "{what}: mixed extension degrees m = {a} and m = {b}"
    );
}

/// Raw bilinear convolution against one of the coefficient mirrors.
fn conv_raw(kind: ConvKind, a: &[f64], b: &[f64], table: &CoefficientTable) -> Vec<f64> {
    let m = table.m();
    assert_same_m(a.len() - 1, m, "conv");
    assert_same_m(b.len() - 1, m, "conv");
    let mut out = vec![0.0; m + 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            let w = ai * bj;
            if w == 0.0 {
                continue;
            }
            let row = match kind {
                ConvKind::Vn => table.vf_row(i, j),
                ConvKind::Cn => table.cf_row(i, j),
            };
            for (o, &r) in out.iter_mut().zip(row) {
                *o += w * r;
            }
        }
    }
    out
}

fn entropy_raw(v: &[f64]) -> f64 {
    v.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &x)| k as f64 * x)
        .sum()
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// A probability vector over subspace dimensions 0..=m.
///
/// Normalized on construction; convolution results are renormalized only
/// when the accumulated drift exceeds [`MASS_DRIFT_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    m: usize,
    p: Vec<f64>,
}

impl Density {
    /// Validates and normalizes a user-supplied probability vector.
    pub fn new(m: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != m + 1 {
            return Err(Error::Validation(format!(
                "density for m = {m} needs {} entries, got {}",
                m + 1,
                p.len()
            )));
        }
        let mut p = p;
        let mut sum = 0.0;
        for x in &mut p {
            if !x.is_finite() || *x < -MASS_DRIFT_TOL {
                return Err(Error::Validation(format!(
                    "negative or non-finite entry {x}"
                )));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
            sum += *x;
        }
        if (sum - 1.0).abs() > MASS_DRIFT_TOL {
            return Err(Error::Validation(format!(
                "probability mass sums to {sum}, expected 1"
            )));
        }
        for x in &mut p {
            *x /= sum;
        }
        Ok(Density { m, p })
    }

    /// Wraps the result of an internal operation. Nonnegativity is an
    /// invariant of the algebra (convolutions of densities stay densities),
    /// so a materially negative entry is a bug.
    ///
    /// Mass is rescaled to 1 on every wrap: rounding drift compounds
    /// multiplicatively through degree polynomials (roughly a factor of
    /// the average degree per DE sweep), and letting it grow before
    /// rescaling produces jumps comparable to [`ORDER_TOL`] that break the
    /// monotonicity of long coupled runs. Drift beyond [`MASS_DRIFT_TOL`]
    /// still gets logged because it indicates a bug rather than roundoff.
    pub(crate) fn from_raw(m: usize, mut p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), m + 1);
        let mut sum = 0.0;
        for x in &mut p {
            assert!(
                *x >= -MASS_DRIFT_TOL,
                "convolution produced negative mass {x}"
            );
            if *x < 0.0 {
                *x = 0.0;
            }
            sum += *x;
        }
        if (sum - 1.0).abs() > MASS_DRIFT_TOL {
            log::debug!("unexpected density mass drift {:e}", sum - 1.0);
        }
        for x in &mut p {
            *x /= sum;
        }
        Density { m, p }
    }

    /// The point mass `Δ_k`.
    pub fn delta(m: usize, k: usize) -> Self {
        assert!(k <= m, "delta index {k} exceeds m = {m}");
        Density {
            m,
            p: delta_raw(m, k),
        }
    }

    /// Channel density of a BEC with erasure probability `eps`:
    /// `[c_eps]_k = binom(m, k) eps^k (1 - eps)^(m - k)`.
    pub fn channel(eps: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Range(format!(
                "erasure probability {eps} outside [0, 1]"
            )));
        }
        let p = (0..=m)
            .map(|k| binomial(m, k) * eps.powi(k as i32) * (1.0 - eps).powi((m - k) as i32))
            .collect();
        Ok(Density::from_raw(m, p))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Average uncertainty in bits: `H(a) = sum_k k a_k`.
    pub fn entropy(&self) -> f64 {
        entropy_raw(&self.p)
    }

    /// Convolution `a ⊡ b` (VN) or `a ⊠ b` (CN).
    pub fn conv(&self, kind: ConvKind, other: &Density, table: &CoefficientTable) -> Density {
        assert_same_m(self.m, other.m, "conv");
        Density::from_raw(self.m, conv_raw(kind, &self.p, &other.p, table))
    }

    /// n-fold convolution power, with `a^{⊡0} = Δ_m` and `a^{⊠0} = Δ_0`.
    pub fn conv_power(&self, kind: ConvKind, n: usize, table: &CoefficientTable) -> Density {
        let mut acc = kind.power_identity(self.m);
        for _ in 0..n {
            acc = conv_raw(kind, &acc, &self.p, table);
        }
        Density::from_raw(self.m, acc)
    }

    /// L-infinity distance between the probability vectors.
    pub fn dist_inf(&self, other: &Density) -> f64 {
        assert_same_m(self.m, other.m, "dist_inf");
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Compares in the degradation partial order with tolerance
    /// [`ORDER_TOL`] on tail sums.
    pub fn compare(&self, other: &Density) -> DensityOrdering {
        self.compare_with_tol(other, ORDER_TOL)
    }

    /// Tail-sum comparison: `self ⪯ other` iff every tail sum of `self` is
    /// at most the corresponding tail sum of `other`. Strictness requires a
    /// margin larger than `tol`; `Equal` means all tail sums agree within
    /// `tol`.
    pub fn compare_with_tol(&self, other: &Density, tol: f64) -> DensityOrdering {
        assert_same_m(self.m, other.m, "compare");
        let mut le_all = true;
        let mut ge_all = true;
        let mut tail_a = 0.0;
        let mut tail_b = 0.0;
        // accumulate tails from k = m down to k = 1
        let mut diffs = Vec::with_capacity(self.m);
        for k in (1..=self.m).rev() {
            tail_a += self.p[k];
            tail_b += other.p[k];
            let d = tail_a - tail_b;
            diffs.push(d);
            if d > tol {
                le_all = false;
            }
            if d < -tol {
                ge_all = false;
            }
        }
        match (le_all, ge_all) {
            (true, true) => DensityOrdering::Equal,
            (true, false) => {
                debug_assert!(diffs.iter().any(|d| *d < -tol));
                DensityOrdering::Less
            }
            (false, true) => DensityOrdering::Greater,
            (false, false) => DensityOrdering::Incomparable,
        }
    }

    /// View of this density in the signed algebra.
    pub fn as_signed(&self) -> SignedVector {
        SignedVector {
            m: self.m,
            v: self.p.clone(),
        }
    }
}

/// Exact binomial coefficient as f64 (fits exactly for m <= 16).
fn binomial(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let k = k.min(m - k);
    let mut num = 1u64;
    let mut den = 1u64;
    for l in 0..k {
        num *= (m - l) as u64;
        den *= (l + 1) as u64;
    }
    (num / den) as f64
}

// ---------------------------------------------------------------------------
// SignedVector
// ---------------------------------------------------------------------------

/// An arbitrary real vector of length m + 1 living in the same bilinear
/// algebra as [`Density`]. Used for differences of densities, directions,
/// and polynomial evaluation off the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedVector {
    m: usize,
    v: Vec<f64>,
}

impl SignedVector {
    pub fn new(m: usize, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), m + 1, "signed vector length mismatch");
        assert!(v.iter().all(|x| x.is_finite()), "non-finite entry");
        SignedVector { m, v }
    }

    pub fn zero(m: usize) -> Self {
        SignedVector {
            m,
            v: vec![0.0; m + 1],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }

    pub fn entropy(&self) -> f64 {
        entropy_raw(&self.v)
    }

    /// Sum of all entries (zero for directions and density differences).
    pub fn total_mass(&self) -> f64 {
        self.v.iter().sum()
    }

    pub fn linf(&self) -> f64 {
        self.v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn l1(&self) -> f64 {
        self.v.iter().map(|x| x.abs()).sum()
    }

    pub fn conv(
        &self,
        kind: ConvKind,
        other: &SignedVector,
        table: &CoefficientTable,
    ) -> SignedVector {
        assert_same_m(self.m, other.m, "conv");
        SignedVector {
            m: self.m,
            v: conv_raw(kind, &self.v, &other.v, table),
        }
    }

    pub fn conv_power(&self, kind: ConvKind, n: usize, table: &CoefficientTable) -> SignedVector {
        let mut acc = kind.power_identity(self.m);
        for _ in 0..n {
            acc = conv_raw(kind, &acc, &self.v, table);
        }
        SignedVector { m: self.m, v: acc }
    }

    pub fn scale(&self, t: f64) -> SignedVector {
        SignedVector {
            m: self.m,
            v: self.v.iter().map(|x| x * t).collect(),
        }
    }
}

impl std::ops::Add<&SignedVector> for &SignedVector {
    type Output = SignedVector;
    fn add(self, rhs: &SignedVector) -> SignedVector {
        assert_same_m(self.m, rhs.m, "add");
        SignedVector {
            m: self.m,
            v: self.v.iter().zip(&rhs.v).map(|(a, b)| a + b).collect(),
        }
    }
}

impl std::ops::Sub<&SignedVector> for &SignedVector {
    type Output = SignedVector;
    fn sub(self, rhs: &SignedVector) -> SignedVector {
        assert_same_m(self.m, rhs.m, "sub");
        SignedVector {
            m: self.m,
            v: self.v.iter().zip(&rhs.v).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Difference of two densities lands in the signed algebra.
impl std::ops::Sub<&Density> for &Density {
    type Output = SignedVector;
    fn sub(self, rhs: &Density) -> SignedVector {
        assert_same_m(self.m, rhs.m, "sub");
        SignedVector {
            m: self.m,
            v: self.p.iter().zip(&rhs.p).map(|(a, b)| a - b).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Degree-polynomial convolution
// ---------------------------------------------------------------------------

/// Evaluates a degree polynomial in the convolution algebra:
/// `sum_d coeff_d a^{*(d-1)}` for [`DegreePerspective::Edge`] and
/// `sum_d coeff_d a^{*d}` for [`DegreePerspective::Node`].
///
/// Coefficients must be nonnegative and sum to 1 within 1e-12; the result
/// is then again a density.
pub fn poly_conv(
    kind: ConvKind,
    coeffs: &[(usize, f64)],
    perspective: DegreePerspective,
    a: &Density,
    table: &CoefficientTable,
) -> Result<Density> {
    validate_degree_coeffs(coeffs, perspective)?;
    Ok(Density::from_raw(
        a.m,
        poly_conv_raw(kind, coeffs, perspective, &a.p, table),
    ))
}

/// Polynomial evaluation extended to the signed algebra (no coefficient
/// validation; used by the potential functions and derivative formulas).
pub fn poly_conv_signed(
    kind: ConvKind,
    coeffs: &[(usize, f64)],
    perspective: DegreePerspective,
    x: &SignedVector,
    table: &CoefficientTable,
) -> SignedVector {
    SignedVector {
        m: x.m,
        v: poly_conv_raw(kind, coeffs, perspective, &x.v, table),
    }
}

fn validate_degree_coeffs(coeffs: &[(usize, f64)], perspective: DegreePerspective) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::Validation("empty degree coefficient list".into()));
    }
    let mut sum = 0.0;
    for &(d, c) in coeffs {
        if c < 0.0 || !c.is_finite() {
            return Err(Error::Validation(format!(
                "degree {d} has invalid coefficient {c}"
            )));
        }
        if perspective == DegreePerspective::Edge && d == 0 {
            return Err(Error::Validation("edge-perspective degree 0".into()));
        }
        sum += c;
    }
    if (sum - 1.0).abs() > MASS_DRIFT_TOL {
        return Err(Error::Validation(format!(
            "degree coefficients sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

fn poly_conv_raw(
    kind: ConvKind,
    coeffs: &[(usize, f64)],
    perspective: DegreePerspective,
    x: &[f64],
    table: &CoefficientTable,
) -> Vec<f64> {
    let m = table.m();
    assert_same_m(x.len() - 1, m, "poly_conv");
    let exponent = |d: usize| match perspective {
        DegreePerspective::Edge => d - 1,
        DegreePerspective::Node => d,
    };
    let max_exp = coeffs.iter().map(|&(d, _)| exponent(d)).max().unwrap_or(0);
    let mut out = vec![0.0; m + 1];
    let mut power = kind.power_identity(m);
    for e in 0..=max_exp {
        if e > 0 {
            power = conv_raw(kind, &power, x, table);
        }
        for &(d, c) in coeffs {
            if exponent(d) == e && c != 0.0 {
                for (o, &p) in out.iter_mut().zip(&power) {
                    *o += c * p;
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Sampling (used by the verification suite and property tests)
// ---------------------------------------------------------------------------

/// Uniform sample from the probability simplex via normalized exponentials.
pub fn sample_density<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Density {
    let mut p: Vec<f64> = (0..=m)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -u.ln()
        })
        .collect();
    let sum: f64 = p.iter().sum();
    for x in &mut p {
        *x /= sum;
    }
    Density::from_raw(m, p)
}

/// Samples a comparable pair `(lower, upper)` with `lower ⪯ upper`:
/// the lower density is the upper one degraded by a random VN convolution
/// (`c ⪯ Δ_m` implies `a ⊡ c ⪯ a ⊡ Δ_m = a`).
pub fn sample_comparable_pair<R: Rng + ?Sized>(
    m: usize,
    rng: &mut R,
    table: &CoefficientTable,
) -> (Density, Density) {
    let upper = sample_density(m, rng);
    let degradation = sample_density(m, rng);
    let lower = upper.conv(ConvKind::Vn, &degradation, table);
    (lower, upper)
}

/// Samples a direction: a zero-sum vector with entries in [-1, 1].
pub fn sample_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SignedVector {
    let mut v = vec![0.0; m + 1];
    for entry in v.iter_mut().skip(1) {
        *entry = rng.gen_range(-1.0..1.0);
    }
    v[0] = -v.iter().skip(1).sum::<f64>();
    SignedVector::new(m, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(m: usize) -> std::sync::Arc<CoefficientTable> {
        CoefficientTable::shared(m).unwrap()
    }

    #[test]
    fn entropy_of_point_masses() {
        for m in 1..=4 {
            assert_eq!(Density::delta(m, m).entropy(), m as f64);
            assert_eq!(Density::delta(m, 0).entropy(), 0.0);
        }
        let c = Density::channel(0.3, 4).unwrap();
        assert!((c.entropy() - 1.2).abs() < 1e-14);
    }

    #[test]
    fn channel_density_edge_cases() {
        assert_eq!(Density::channel(0.0, 3).unwrap(), Density::delta(3, 0));
        assert_eq!(Density::channel(1.0, 3).unwrap(), Density::delta(3, 3));
        let c = Density::channel(0.5, 2).unwrap();
        assert_eq!(c.as_slice(), &[0.25, 0.5, 0.25]);
        assert!(Density::channel(-0.1, 2).is_err());
        assert!(Density::channel(1.1, 2).is_err());
        // binomial mean
        for eps in [0.1, 0.37, 0.9] {
            let c = Density::channel(eps, 4).unwrap();
            assert!((c.entropy() - 4.0 * eps).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_convolution_identities() {
        let t = table(1);
        let d1 = Density::delta(1, 1);
        assert_eq!(d1.conv(ConvKind::Vn, &d1, &t), d1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=4 {
            let t = table(m);
            let a = sample_density(m, &mut rng);
            let dm = Density::delta(m, m);
            let d0 = Density::delta(m, 0);
            // Δ_m is the VN identity, Δ_0 the CN identity
            assert!(a.conv(ConvKind::Vn, &dm, &t).dist_inf(&a) < 1e-15);
            assert!(a.conv(ConvKind::Cn, &d0, &t).dist_inf(&a) < 1e-15);
            // full space absorbs at CNs, perfect knowledge at VNs
            assert!(a.conv(ConvKind::Cn, &dm, &t).dist_inf(&dm) < 1e-15);
            assert!(a.conv(ConvKind::Vn, &d0, &t).dist_inf(&d0) < 1e-15);
        }
    }

    #[test]
    fn conv_power_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = 3;
        let t = table(m);
        let a = sample_density(m, &mut rng);
        assert_eq!(a.conv_power(ConvKind::Vn, 0, &t), Density::delta(m, m));
        assert_eq!(a.conv_power(ConvKind::Cn, 0, &t), Density::delta(m, 0));
        assert!(a.conv_power(ConvKind::Cn, 1, &t).dist_inf(&a) < 1e-15);
        let d0 = Density::delta(m, 0);
        assert!(d0.conv_power(ConvKind::Vn, 5, &t).dist_inf(&d0) < 1e-15);
    }

    #[test]
    fn poly_conv_matches_explicit_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 2;
        let t = table(m);
        let a = sample_density(m, &mut rng);
        // rho(x) = x^5, regular check degree 6
        let rho = [(6usize, 1.0)];
        let via_poly = poly_conv(ConvKind::Cn, &rho, DegreePerspective::Edge, &a, &t).unwrap();
        let direct = a.conv_power(ConvKind::Cn, 5, &t);
        assert!(via_poly.dist_inf(&direct) < 1e-15);
        // Δ_m absorbs under ⊡ with itself
        let dm = Density::delta(m, m);
        let lam = [(3usize, 1.0)];
        let out = poly_conv(ConvKind::Vn, &lam, DegreePerspective::Edge, &dm, &t).unwrap();
        assert!(out.dist_inf(&dm) < 1e-15);
    }

    #[test]
    fn poly_conv_scalar_reduction_at_m1() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let t = table(1);
        // irregular mix to exercise several powers
        let lam = [(2usize, 0.4), (3usize, 0.6)];
        for _ in 0..50 {
            let a = sample_density(1, &mut rng);
            let y = a.as_slice()[1];
            let out = poly_conv(ConvKind::Vn, &lam, DegreePerspective::Edge, &a, &t).unwrap();
            let scalar = 0.4 * y + 0.6 * y * y;
            assert!((out.as_slice()[1] - scalar).abs() < 1e-14);
        }
    }

    #[test]
    fn poly_conv_rejects_bad_coefficients() {
        let t = table(2);
        let a = Density::delta(2, 2);
        assert!(poly_conv(ConvKind::Vn, &[(3, 0.5)], DegreePerspective::Edge, &a, &t).is_err());
        assert!(poly_conv(
            ConvKind::Vn,
            &[(3, -1.0), (2, 2.0)],
            DegreePerspective::Edge,
            &a,
            &t
        )
        .is_err());
        assert!(poly_conv(ConvKind::Vn, &[], DegreePerspective::Edge, &a, &t).is_err());
    }

    #[test]
    fn compare_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=4 {
            let a = sample_density(m, &mut rng);
            assert!(Density::delta(m, 0).compare(&a).is_le());
            assert!(a.compare(&Density::delta(m, m)).is_le());
            assert_eq!(a.compare(&a), DensityOrdering::Equal);
        }
        let a = Density::new(2, vec![0.5, 0.5, 0.0]).unwrap();
        let b = Density::new(2, vec![0.0, 0.5, 0.5]).unwrap();
        assert_eq!(a.compare(&b), DensityOrdering::Less);
        assert_eq!(b.compare(&a), DensityOrdering::Greater);
        // crossing tail sums are incomparable
        let c = Density::new(2, vec![0.4, 0.0, 0.6]).unwrap();
        let d = Density::new(2, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(c.compare(&d), DensityOrdering::Incomparable);
    }

    #[test]
    fn signed_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = 3;
        let t = table(m);
        let a = sample_density(m, &mut rng);
        let b = sample_density(m, &mut rng);
        let c = sample_density(m, &mut rng);
        let zero = &a - &a;
        assert_eq!(zero.linf(), 0.0);
        let dm = Density::delta(m, m);
        let d0 = Density::delta(m, 0);
        assert_eq!((&dm - &d0).entropy(), m as f64);
        // bilinearity: H((a - b) ⊡ c) = H(a ⊡ c) - H(b ⊡ c)
        let lhs = (&a - &b).conv(ConvKind::Vn, &c.as_signed(), &t).entropy();
        let rhs = a.conv(ConvKind::Vn, &c, &t).entropy() - b.conv(ConvKind::Vn, &c, &t).entropy();
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn density_validation() {
        assert!(Density::new(2, vec![0.5, 0.5]).is_err());
        assert!(Density::new(1, vec![0.7, 0.7]).is_err());
        assert!(Density::new(1, vec![-0.1, 1.1]).is_err());
        let d = Density::new(1, vec![0.25, 0.75]).unwrap();
        assert!((d.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "mixed extension degrees")]
    fn mixed_m_panics() {
        let t = table(2);
        let a = Density::delta(2, 0);
        let b = Density::delta(3, 0);
        let _ = a.conv(ConvKind::Vn, &b, &t);
    }

    #[test]
    fn duality_rule_smoke() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for m in 1..=4 {
            let t = table(m);
            for _ in 0..100 {
                let a = sample_density(m, &mut rng);
                let b = sample_density(m, &mut rng);
                let lhs = a.entropy() + b.entropy();
                let rhs =
                    a.conv(ConvKind::Vn, &b, &t).entropy() + a.conv(ConvKind::Cn, &b, &t).entropy();
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn comparable_pair_sampler_is_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for m in 1..=4 {
            let t = table(m);
            for _ in 0..100 {
                let (lo, hi) = sample_comparable_pair(m, &mut rng, &t);
                assert!(lo.compare(&hi).is_le());
            }
        }
    }
}
