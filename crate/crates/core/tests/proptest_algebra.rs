//! Property tests for the density algebra.

use nbde::density::{ConvKind, Density};
use nbde::gf_coeffs::CoefficientTable;
use proptest::prelude::*;

fn density_strategy(m: usize) -> impl Strategy<Value = Density> {
    proptest::collection::vec(1e-3..1.0f64, m + 1).prop_map(move |raw| {
        let sum: f64 = raw.iter().sum();
        Density::new(m, raw.iter().map(|x| x / sum).collect()).expect("normalized input")
    })
}

fn m_and_densities(count: usize) -> impl Strategy<Value = (usize, Vec<Density>)> {
    (1usize..=4).prop_flat_map(move |m| {
        proptest::collection::vec(density_strategy(m), count).prop_map(move |ds| (m, ds))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Convolving two densities yields a density: nonnegative entries with
    /// unit mass, for both node types.
    #[test]
    fn convolution_closes_over_densities((m, ds) in m_and_densities(2)) {
        let table = CoefficientTable::shared(m).unwrap();
        for kind in [ConvKind::Vn, ConvKind::Cn] {
            let out = ds[0].conv(kind, &ds[1], &table);
            prop_assert!(out.as_slice().iter().all(|&p| p >= 0.0));
            let mass: f64 = out.as_slice().iter().sum();
            prop_assert!((mass - 1.0).abs() <= 1e-12);
        }
    }

    /// Entropy conservation: H(a) + H(b) = H(a ⊡ b) + H(a ⊠ b).
    #[test]
    fn entropy_duality_rule((m, ds) in m_and_densities(2)) {
        let table = CoefficientTable::shared(m).unwrap();
        let (a, b) = (&ds[0], &ds[1]);
        let gap = a.entropy() + b.entropy()
            - a.conv(ConvKind::Vn, b, &table).entropy()
            - a.conv(ConvKind::Cn, b, &table).entropy();
        prop_assert!(gap.abs() <= 1e-12, "gap {gap:e}");
    }

    /// Both convolutions are associative and commutative up to float noise.
    #[test]
    fn convolution_laws((m, ds) in m_and_densities(3)) {
        let table = CoefficientTable::shared(m).unwrap();
        let (a, b, c) = (&ds[0], &ds[1], &ds[2]);
        for kind in [ConvKind::Vn, ConvKind::Cn] {
            let ab = a.conv(kind, b, &table);
            let ba = b.conv(kind, a, &table);
            prop_assert!(ab.dist_inf(&ba) <= 1e-13);
            let left = ab.conv(kind, c, &table);
            let right = a.conv(kind, &b.conv(kind, c, &table), &table);
            prop_assert!(left.dist_inf(&right) <= 1e-13);
        }
    }

    /// The degradation order is antisymmetric up to tolerance and respects
    /// the extremal densities.
    #[test]
    fn partial_order_sanity((m, ds) in m_and_densities(1)) {
        let a = &ds[0];
        prop_assert!(Density::delta(m, 0).compare(a).is_le());
        prop_assert!(a.compare(&Density::delta(m, m)).is_le());
        let both = a.compare(a);
        prop_assert!(both.is_le() && both.is_ge());
    }

    /// Degrading through a VN convolution never raises entropy, and the
    /// CN convolution never lowers it below either input.
    #[test]
    fn convolution_entropy_bounds((m, ds) in m_and_densities(2)) {
        let table = CoefficientTable::shared(m).unwrap();
        let (a, b) = (&ds[0], &ds[1]);
        let vn = a.conv(ConvKind::Vn, b, &table).entropy();
        let cn = a.conv(ConvKind::Cn, b, &table).entropy();
        prop_assert!(vn <= a.entropy().min(b.entropy()) + 1e-12);
        prop_assert!(cn >= a.entropy().max(b.entropy()) - 1e-12);
    }
}
