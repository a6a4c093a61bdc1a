//! Monogamy scores, the complementarity sum `x0`, and the chain of lower bounds on
//! the score that follows from `P_A + q_{AB} <= b`.

use serde::{Deserialize, Serialize};

use crate::entropy::{normalized_purity, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::measures::{
    evaluate, evaluate_many, mutual_information, BipartiteCut, MeasureKind, MeasureSettings,
};
use crate::optimize::OptimizerReport;
use crate::tensor::{check_index_set, partial_trace, DensityMatrix};

/// Slack for flags on closed-form measures.
pub const CLOSED_FORM_TOL: f64 = 1e-6;
/// Slack for flags on optimizer-backed measures.
pub const OPTIMIZED_TOL: f64 = 5e-4;

pub fn flag_tolerance(kind: MeasureKind) -> f64 {
    if kind.is_optimized() {
        OPTIMIZED_TOL
    } else {
        CLOSED_FORM_TOL
    }
}

/// Nodal party `A` and leaves `B_1..B_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub nodal: usize,
    pub leaves: Vec<usize>,
}

impl PartitionSpec {
    /// `nodal` against every other subsystem, in index order.
    pub fn star(nodal: usize, num_subsystems: usize) -> Self {
        Self {
            nodal,
            leaves: (0..num_subsystems).filter(|&k| k != nodal).collect(),
        }
    }

    pub fn validate(&self, num_subsystems: usize) -> Result<()> {
        if self.nodal >= num_subsystems {
            return Err(Error::IndexOutOfRange {
                index: self.nodal,
                count: num_subsystems,
            });
        }
        let leaves = check_index_set(&self.leaves, num_subsystems)?;
        if leaves.contains(&self.nodal) {
            return Err(Error::InvalidPartition(format!(
                "nodal party {} is also a leaf",
                self.nodal
            )));
        }
        if leaves.is_empty() || leaves.len() + 1 != num_subsystems {
            return Err(Error::InvalidPartition(format!(
                "nodal {} and leaves {:?} do not cover {num_subsystems} subsystems",
                self.nodal, self.leaves
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.leaves.len()
    }
}

/// `b` in `P(rho_X) + q(rho_XY) <= b`.
pub fn bound_b(d_x: usize, d_y: usize) -> f64 {
    if d_x <= d_y {
        1.0
    } else {
        2.0 - (d_y as f64).log2() / (d_x as f64).log2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    /// `-(m-1)`
    pub trivial: f64,
    /// `-(m-1)(1 - P_A) - (1 - x0)`
    pub improved: f64,
    /// `-(m-1)(1 - P_A)`, equal to `-(m-1) S(rho_A)` for a qubit `A`.
    pub entropy: f64,
}

/// Lower bounds on the normalized monogamy score for `m` leaves.
///
/// Only derived when every leaf is at least as large as `A` (all `b_k = 1`).
pub fn lower_bounds(
    purity_a: f64,
    x0: f64,
    m: usize,
    d_a: usize,
    leaf_dims: &[usize],
) -> Result<LowerBounds> {
    if let Some(&d_leaf) = leaf_dims.iter().find(|&&d| d < d_a) {
        return Err(Error::BoundChainUnavailable { d_a, d_leaf });
    }
    let m1 = m as f64 - 1.0;
    let entropy = -m1 * (1.0 - purity_a);
    Ok(LowerBounds {
        trivial: -m1,
        improved: entropy - (1.0 - x0),
        entropy,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundFlags {
    pub pass_entropy: bool,
    pub pass_improved: bool,
    pub pass_x0: bool,
}

impl BoundFlags {
    pub fn all(&self) -> bool {
        self.pass_entropy && self.pass_improved && self.pass_x0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutDiagnostics {
    /// `"A:rest"` or `"A:B<k>"`.
    pub cut: String,
    pub report: OptimizerReport,
}

/// One state scored under one measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonogamyRecord {
    pub state_id: String,
    pub measure: MeasureKind,
    /// Normalized correlation across `A : B_1..B_m`.
    pub q_whole: f64,
    /// Normalized correlation of each two-party marginal `A B_k`.
    pub q_pairs: Vec<f64>,
    pub delta: f64,
    pub q_whole_raw: f64,
    pub q_pairs_raw: Vec<f64>,
    pub delta_raw: f64,
    pub entropy_a: f64,
    pub purity_a: f64,
    pub x0: f64,
    pub xk: Vec<f64>,
    pub b0: f64,
    pub bk: Vec<f64>,
    pub bound_trivial: f64,
    pub bound_improved: f64,
    pub bound_entropy: f64,
    /// Whether `x0 >= 1`, where the entropy bound follows from the improved one.
    pub entropy_bound_applicable: bool,
    pub flags: BoundFlags,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<CutDiagnostics>,
}

impl MonogamyRecord {
    pub fn m(&self) -> usize {
        self.q_pairs.len()
    }
}

/// Scores `rho` under every measure in `measures`; one record per measure.
pub fn verify(
    state_id: &str,
    rho: &DensityMatrix,
    part: &PartitionSpec,
    measures: &[MeasureKind],
    settings: &MeasureSettings,
) -> Result<Vec<MonogamyRecord>> {
    part.validate(rho.num_subsystems())?;
    let dims = rho.dims();
    let d_a = dims[part.nodal];
    if d_a != 2 {
        return Err(Error::NotQubitSide(d_a));
    }
    let leaf_dims: Vec<usize> = part.leaves.iter().map(|&k| dims[k]).collect();
    let d_rest: usize = leaf_dims.iter().product();

    let whole = BipartiteCut::new(rho, &[part.nodal], &part.leaves)?;
    let whole_values = evaluate_many(measures, &whole, settings)?;

    let mut pair_values = Vec::with_capacity(part.m());
    for &leaf in &part.leaves {
        let pair = partial_trace(rho, &[part.nodal, leaf])?;
        let (ia, ib) = if part.nodal < leaf { (0, 1) } else { (1, 0) };
        let cut = BipartiteCut::new(&pair, &[ia], &[ib])?;
        pair_values.push(evaluate_many(measures, &cut, settings)?);
    }

    let rho_a = whole.rho_a();
    let entropy_a = von_neumann_entropy(&rho_a)?;
    let purity_a = normalized_purity(&rho_a)?;
    let b0 = bound_b(d_a, d_rest);
    let bk: Vec<f64> = leaf_dims.iter().map(|&d| bound_b(d_a, d)).collect();

    let mut records = Vec::with_capacity(measures.len());
    for (i, &measure) in measures.iter().enumerate() {
        let w = &whole_values[i];
        let pairs: Vec<_> = pair_values.iter().map(|v| &v[i]).collect();
        let q_pairs: Vec<f64> = pairs.iter().map(|v| v.normalized).collect();
        let q_pairs_raw: Vec<f64> = pairs.iter().map(|v| v.raw).collect();
        let delta = w.normalized - q_pairs.iter().sum::<f64>();
        let delta_raw = w.raw - q_pairs_raw.iter().sum::<f64>();
        let x0 = purity_a + w.normalized;
        let xk = q_pairs.iter().map(|q| purity_a + q).collect();
        let bounds = lower_bounds(purity_a, x0, part.m(), d_a, &leaf_dims)?;
        let tol = flag_tolerance(measure);
        let flags = BoundFlags {
            pass_entropy: delta >= bounds.entropy - tol,
            pass_improved: delta >= bounds.improved - tol,
            pass_x0: x0 <= b0 + tol,
        };
        let mut diagnostics = Vec::new();
        if let Some(report) = w.optimizer {
            diagnostics.push(CutDiagnostics {
                cut: "A:rest".into(),
                report,
            });
        }
        for (k, v) in pairs.iter().enumerate() {
            if let Some(report) = v.optimizer {
                diagnostics.push(CutDiagnostics {
                    cut: format!("A:B{}", k + 1),
                    report,
                });
            }
        }
        records.push(MonogamyRecord {
            state_id: state_id.to_string(),
            measure,
            q_whole: w.normalized,
            q_pairs,
            delta,
            q_whole_raw: w.raw,
            q_pairs_raw,
            delta_raw,
            entropy_a,
            purity_a,
            x0,
            xk,
            b0,
            bk: bk.clone(),
            bound_trivial: bounds.trivial,
            bound_improved: bounds.improved,
            bound_entropy: bounds.entropy,
            entropy_bound_applicable: x0 >= 1.0,
            flags,
            tolerance: tol,
            diagnostics,
        });
    }
    Ok(records)
}

pub fn monogamy_score(
    measure: MeasureKind,
    rho: &DensityMatrix,
    part: &PartitionSpec,
    settings: &MeasureSettings,
) -> Result<MonogamyRecord> {
    Ok(verify("", rho, part, &[measure], settings)?.remove(0))
}

/// `x0 = P(rho_A) + q(rho_AB)` on a cut whose side `A` is listed first.
pub fn complementarity_x0(
    measure: MeasureKind,
    cut: &BipartiteCut,
    settings: &MeasureSettings,
) -> Result<f64> {
    Ok(normalized_purity(&cut.rho_a())? + evaluate(measure, cut, settings)?.normalized)
}

/// `P(rho_AB) + I(AB:C) / (2 log2 d)` for three subsystems of equal dimension `d`;
/// never exceeds 3/2.
pub fn tripartite_complementarity(rho: &DensityMatrix) -> Result<f64> {
    let dims = rho.dims();
    if dims.len() != 3 || dims.iter().any(|&d| d != dims[0]) {
        return Err(Error::DimensionMismatch(format!(
            "three subsystems of equal dimension required, got {dims:?}"
        )));
    }
    let cut = BipartiteCut::new(rho, &[0, 1], &[2])?;
    let purity_ab = normalized_purity(&cut.rho_a())?;
    let q = mutual_information(&cut)?.normalized;
    Ok(purity_ab + q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ghz_w, haar_pure, GhzwParams, PureState, SeedSpec};
    use approx::assert_abs_diff_eq;

    const H_THIRD: f64 = 0.918_295_834_054_489_6;

    fn ghz3() -> DensityMatrix {
        ghz_w(&GhzwParams::ghz(3).unwrap()).unwrap().to_density()
    }

    fn w3() -> DensityMatrix {
        ghz_w(&GhzwParams::w(3).unwrap()).unwrap().to_density()
    }

    fn star3() -> PartitionSpec {
        PartitionSpec::star(0, 3)
    }

    #[test]
    fn bound_b_cases() {
        assert_eq!(bound_b(2, 4), 1.0);
        assert_eq!(bound_b(4, 2), 1.5);
        assert_eq!(bound_b(3, 3), 1.0);
        assert_abs_diff_eq!(bound_b(8, 2), 2.0 - 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn tangle_scores() {
        let s = MeasureSettings::default();
        let ghz = monogamy_score(MeasureKind::Tangle, &ghz3(), &star3(), &s).unwrap();
        assert_abs_diff_eq!(ghz.q_whole, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ghz.delta, 1.0, epsilon = 1e-9);
        let w = monogamy_score(MeasureKind::Tangle, &w3(), &star3(), &s).unwrap();
        assert_abs_diff_eq!(w.q_whole, 8.0 / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.q_pairs[0], 4.0 / 9.0, epsilon = 1e-7);
        assert_abs_diff_eq!(w.delta, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn half_mutual_information_on_ghz() {
        let r = monogamy_score(
            MeasureKind::MutualInformation,
            &ghz3(),
            &star3(),
            &MeasureSettings::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.q_whole, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.q_pairs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.q_pairs[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lower_bound_cases() {
        // three qubits: entropy bound is -S(rho_A)
        let s_a = 0.7;
        let b = lower_bounds(1.0 - s_a, 1.0, 2, 2, &[2, 2]).unwrap();
        assert_abs_diff_eq!(b.entropy, -s_a, epsilon = 1e-15);
        assert_eq!(b.trivial, -1.0);
        assert_abs_diff_eq!(b.improved, b.entropy, epsilon = 1e-15);

        // n-qubit GHZ+W: m = n - 1 leaves, bound -(n-2) h(e)
        let p = GhzwParams::real(5, 0.6, 0.0, 0.8).unwrap();
        let h = crate::states::reduced_entropy_analytic(&p).unwrap();
        let b = lower_bounds(1.0 - h, 1.0, 4, 2, &[2; 4]).unwrap();
        assert_abs_diff_eq!(b.entropy, -3.0 * h, epsilon = 1e-12);

        let b = lower_bounds(1.0, 1.0, 2, 2, &[2, 2]).unwrap();
        assert_eq!((b.improved, b.entropy), (0.0, 0.0));

        assert!(matches!(
            lower_bounds(0.5, 1.0, 2, 4, &[2, 4]),
            Err(Error::BoundChainUnavailable { d_a: 4, d_leaf: 2 })
        ));
    }

    #[test]
    fn x0_examples() {
        let s = MeasureSettings::default();
        let prod = PureState::zero_qubits(3).to_density();
        let cut = BipartiteCut::one_vs_rest(&prod, 0).unwrap();
        assert_abs_diff_eq!(
            complementarity_x0(MeasureKind::Discord, &cut, &s).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let ghz = ghz3();
        let cut = BipartiteCut::one_vs_rest(&ghz, 0).unwrap();
        assert_abs_diff_eq!(
            complementarity_x0(MeasureKind::Discord, &cut, &s).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tripartite_cases() {
        assert_abs_diff_eq!(
            tripartite_complementarity(&ghz3()).unwrap(),
            1.5,
            epsilon = 1e-9
        );
        let prod = PureState::zero_qubits(3).to_density();
        assert_abs_diff_eq!(
            tripartite_complementarity(&prod).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2, 2]);
        assert_abs_diff_eq!(
            tripartite_complementarity(&mixed).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(
            tripartite_complementarity(&DensityMatrix::maximally_mixed(vec![2, 3, 2])).is_err()
        );
    }

    #[test]
    fn verify_ghz_all_pass() {
        let recs = verify(
            "ghz",
            &ghz3(),
            &star3(),
            &MeasureKind::HISTOGRAM_SET,
            &MeasureSettings::default(),
        )
        .unwrap();
        assert_eq!(recs.len(), 6);
        for r in &recs {
            assert!(r.flags.all(), "{:?} failed: {:?}", r.measure, r);
            assert_abs_diff_eq!(
                r.delta,
                r.q_whole - r.q_pairs.iter().sum::<f64>(),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(r.x0, r.purity_a + r.q_whole, epsilon = 1e-12);
        }
    }

    #[test]
    fn w_discord_above_entropy_bound() {
        let r = monogamy_score(
            MeasureKind::Discord,
            &w3(),
            &star3(),
            &MeasureSettings::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.entropy_a, H_THIRD, epsilon = 1e-12);
        assert!(r.delta >= -H_THIRD - OPTIMIZED_TOL);
        assert!(r.flags.pass_entropy);
    }

    #[test]
    fn product_state_scores_zero() {
        let prod = PureState::zero_qubits(3).to_density();
        for r in verify(
            "p",
            &prod,
            &star3(),
            &MeasureKind::HISTOGRAM_SET,
            &MeasureSettings::default(),
        )
        .unwrap()
        {
            assert_abs_diff_eq!(r.delta, 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(r.bound_entropy, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(r.bound_improved, 0.0, epsilon = 1e-7);
            assert!(r.flags.all());
        }
    }

    #[test]
    fn leaf_relabeling_keeps_delta() {
        let rho = haar_pure(&[2, 2, 2], SeedSpec::new(11, 3))
            .unwrap()
            .to_density();
        let s = MeasureSettings::default();
        for kind in [
            MeasureKind::Negativity,
            MeasureKind::MutualInformation,
            MeasureKind::Tangle,
        ] {
            let a = monogamy_score(
                kind,
                &rho,
                &PartitionSpec {
                    nodal: 0,
                    leaves: vec![1, 2],
                },
                &s,
            )
            .unwrap();
            let b = monogamy_score(
                kind,
                &rho,
                &PartitionSpec {
                    nodal: 0,
                    leaves: vec![2, 1],
                },
                &s,
            )
            .unwrap();
            assert_abs_diff_eq!(a.delta, b.delta, epsilon = 1e-12);
        }
    }

    #[test]
    fn nodal_party_other_than_zero() {
        let s = MeasureSettings::default();
        let w = w3();
        for nodal in 0..3 {
            let r = monogamy_score(MeasureKind::Tangle, &w, &PartitionSpec::star(nodal, 3), &s)
                .unwrap();
            assert_abs_diff_eq!(r.delta, 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn partition_errors() {
        let s = MeasureSettings::default();
        let rho = ghz3();
        let bad = [
            PartitionSpec {
                nodal: 3,
                leaves: vec![1, 2],
            },
            PartitionSpec {
                nodal: 0,
                leaves: vec![0, 1, 2],
            },
            PartitionSpec {
                nodal: 0,
                leaves: vec![1],
            },
            PartitionSpec {
                nodal: 0,
                leaves: vec![],
            },
        ];
        for p in bad {
            assert!(
                monogamy_score(MeasureKind::Negativity, &rho, &p, &s).is_err(),
                "{p:?}"
            );
        }
        let qutrit = DensityMatrix::maximally_mixed(vec![3, 2, 2]);
        assert!(matches!(
            monogamy_score(MeasureKind::Negativity, &qutrit, &star3(), &s),
            Err(Error::NotQubitSide(3))
        ));
    }
}
