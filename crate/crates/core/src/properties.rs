//! Randomized invariants across modules.

use proptest::prelude::*;

use crate::entropy::von_neumann_entropy;
use crate::experiment::{fmt_float, histogram};
use crate::measures::{evaluate, BipartiteCut, MeasureKind, MeasureSettings};
use crate::monogamy::{flag_tolerance, verify, PartitionSpec};
use crate::optimize::OptimizerSettings;
use crate::states::{
    ghz_w, haar_pure, haar_rank2, haar_unitary_2, largest_eig_analytic, reduced_qubit_analytic,
    GhzwParams, SeedSpec,
};
use crate::tensor::{
    eigvalsh, kron, partial_trace, partial_transpose, partial_transpose_matrix, trace_norm,
    ComplexMatrix, DensityMatrix, C64,
};

fn random_three_qubit(seed: u64, mixed: bool) -> DensityMatrix {
    let s = SeedSpec::new(seed, 0);
    if mixed {
        haar_rank2(3, s).unwrap()
    } else {
        haar_pure(&[2, 2, 2], s).unwrap().to_density()
    }
}

fn local_unitary(seed: u64, n: usize) -> ComplexMatrix {
    (0..n).fold(ComplexMatrix::identity(1), |acc, k| {
        kron(&acc, &haar_unitary_2(SeedSpec::new(seed, k as u64)))
    })
}

/// A coarser grid keeps the optimized measures cheap enough for many cases.
fn quick_settings() -> MeasureSettings {
    MeasureSettings {
        optimizer: OptimizerSettings {
            grid_theta: 24,
            grid_phi: 48,
            ..OptimizerSettings::default()
        },
        discord_pure_shortcut: false,
    }
}

prop_compose! {
    fn hermitian(max_dim: usize)(d in 1..=max_dim)
        (entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d), d in Just(d))
        -> ComplexMatrix
    {
        let m = ComplexMatrix::from_fn(d, d, |r, c| C64::new(entries[r * d + c].0, entries[r * d + c].1));
        (&m + &m.adjoint()).scale(C64::new(0.5, 0.0))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), mixed in any::<bool>(), mask in 1u8..8) {
        let rho = random_three_qubit(seed, mixed);
        let keep: Vec<usize> = (0..3).filter(|k| mask & (1 << k) != 0).collect();
        let red = partial_trace(&rho, &keep).unwrap();
        prop_assert!((red.matrix().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert_eq!(red.dims().len(), keep.len());
    }

    #[test]
    fn partial_transpose_is_involution(seed in any::<u64>(), party in 0usize..3) {
        let rho = random_three_qubit(seed, true);
        let once = partial_transpose(&rho, party).unwrap();
        prop_assert!(once.is_hermitian(1e-12));
        let twice = partial_transpose_matrix(&once, rho.dims(), party).unwrap();
        prop_assert_eq!(twice.as_slice(), rho.matrix().as_slice());
    }

    #[test]
    fn eigenvalues_reproduce_trace_and_square_trace(h in hermitian(6)) {
        let spec = eigvalsh(&h).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        let sq: f64 = spec.eigenvalues.iter().map(|l| l * l).sum();
        let tr_h2 = h.matmul(&h).unwrap().trace().re;
        prop_assert!((sum - h.trace().re).abs() < 1e-10);
        prop_assert!((sq - tr_h2).abs() < 1e-10);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn partial_transpose_trace_norm_at_least_one(seed in any::<u64>(), mixed in any::<bool>()) {
        let rho = random_three_qubit(seed, mixed);
        let n = trace_norm(&partial_transpose(&rho, 0).unwrap()).unwrap();
        prop_assert!(n >= 1.0 - 1e-12);
    }

    #[test]
    fn ghzw_reduction_matches_numeric(seed in any::<u64>(), n in 3usize..=7) {
        let p = GhzwParams::random(n, SeedSpec::new(seed, 1)).unwrap();
        let numeric = ghz_w(&p).unwrap().reduced(&[0]).unwrap();
        let analytic = reduced_qubit_analytic(&p).unwrap();
        prop_assert!(analytic.matrix().max_abs_diff(numeric.matrix()) < 1e-12);
        let e = numeric.spectrum().unwrap().largest();
        prop_assert!((largest_eig_analytic(&p).unwrap() - e).abs() < 1e-10);
    }

    #[test]
    fn histogram_conserves_counts(values in proptest::collection::vec(-1e3f64..1e3, 0..200), bins in 1usize..40) {
        let h = histogram(&values, bins, None).unwrap();
        prop_assert_eq!(h.len(), bins);
        prop_assert_eq!(h.iter().map(|b| b.frequency).sum::<usize>(), values.len());
    }

    #[test]
    fn float_format_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn closed_form_scores_respect_entropy_bound(seed in any::<u64>(), mixed in any::<bool>(), nodal in 0usize..3) {
        let rho = random_three_qubit(seed, mixed);
        let part = PartitionSpec::star(nodal, 3);
        let kinds = [MeasureKind::Negativity, MeasureKind::LogNegativity, MeasureKind::MutualInformation];
        for r in verify("p", &rho, &part, &kinds, &MeasureSettings::default()).unwrap() {
            prop_assert!(r.delta + r.entropy_a >= -flag_tolerance(r.measure));
            prop_assert!(r.flags.pass_entropy);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn measures_invariant_under_local_unitaries(seed in any::<u64>(), mixed in any::<bool>()) {
        let rho = random_three_qubit(seed, mixed);
        let rotated = rho.conjugate_by(&local_unitary(seed ^ 0x5eed, 3)).unwrap();
        let before = BipartiteCut::one_vs_rest(&rho, 0).unwrap();
        let after = BipartiteCut::one_vs_rest(&rotated, 0).unwrap();
        let settings = quick_settings();
        for kind in MeasureKind::HISTOGRAM_SET {
            let a = evaluate(kind, &before, &settings).unwrap().raw;
            let b = evaluate(kind, &after, &settings).unwrap().raw;
            let tol = if kind.is_optimized() { 5e-4 } else { 1e-9 };
            prop_assert!((a - b).abs() <= tol, "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn measures_vanish_on_product_states(seed in any::<u64>()) {
        let a = haar_rank2(1, SeedSpec::new(seed, 0)).unwrap();
        let bc = haar_rank2(2, SeedSpec::new(seed, 1)).unwrap();
        let cut = BipartiteCut::one_vs_rest(&a.tensor(&bc), 0).unwrap();
        let settings = quick_settings();
        for kind in MeasureKind::HISTOGRAM_SET {
            let v = evaluate(kind, &cut, &settings).unwrap().raw;
            let tol = if kind.is_optimized() { 5e-4 } else { 1e-9 };
            prop_assert!(v.abs() <= tol, "{kind}: {v}");
        }
    }

    #[test]
    fn pure_discord_equals_marginal_entropy(seed in any::<u64>()) {
        let rho = random_three_qubit(seed, false);
        let cut = BipartiteCut::one_vs_rest(&rho, 0).unwrap();
        let s = von_neumann_entropy(&cut.rho_a()).unwrap();
        let d = evaluate(MeasureKind::Discord, &cut, &MeasureSettings::numeric()).unwrap().raw;
        prop_assert!((d - s).abs() <= 5e-4, "D = {d}, S = {s}");
    }
}
