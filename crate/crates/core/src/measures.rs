//! Bipartite correlation measures.
//!
//! Discord, measured mutual information and work-deficit minimize over rank-1
//! projective measurements on a single-qubit side `A`. Work-deficit is restricted to
//! dephasing of `A` alone, so the computed value upper-bounds the closed-LOCC quantity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_of_spectrum, entropy_term_sum, von_neumann_entropy};
use crate::error::{Error, Result};
use crate::optimize::{
    optimize_qubit_measurement, OptimizerReport, OptimizerSettings, QubitMeasurementBasis,
};
use crate::states::PureState;
use crate::tensor::{
    check_index_set, eigh, eigvalsh, kron, partial_trace, partial_transpose, pauli, trace_norm,
    ComplexMatrix, DensityMatrix, C64,
};

/// Purity above which a state is treated as pure.
const PURE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    Negativity,
    LogNegativity,
    MutualInformation,
    MeasuredMutualInformation,
    Discord,
    WorkDeficit,
    Tangle,
    EntanglementOfFormation,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 8] = [
        Self::Negativity,
        Self::LogNegativity,
        Self::MutualInformation,
        Self::MeasuredMutualInformation,
        Self::Discord,
        Self::WorkDeficit,
        Self::Tangle,
        Self::EntanglementOfFormation,
    ];

    /// The six non-monogamous measures of the three-qubit histogram study.
    pub const HISTOGRAM_SET: [MeasureKind; 6] = [
        Self::Negativity,
        Self::LogNegativity,
        Self::Discord,
        Self::WorkDeficit,
        Self::MutualInformation,
        Self::MeasuredMutualInformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Negativity => "negativity",
            Self::LogNegativity => "log-negativity",
            Self::MutualInformation => "mutual-information",
            Self::MeasuredMutualInformation => "measured-mutual-information",
            Self::Discord => "discord",
            Self::WorkDeficit => "work-deficit",
            Self::Tangle => "tangle",
            Self::EntanglementOfFormation => "eof",
        }
    }

    /// Whether the value comes out of the measurement optimizer.
    pub fn is_optimized(self) -> bool {
        matches!(
            self,
            Self::MeasuredMutualInformation | Self::Discord | Self::WorkDeficit
        )
    }

    /// Denominator turning the raw value into the normalized correlation
    /// `Q / (k min(log2 d_A, log2 d_B))`, with `k = 2` for the mutual informations.
    pub fn normalizer(self, d_a: usize, d_b: usize) -> f64 {
        let base = (d_a.min(d_b) as f64).log2();
        match self {
            Self::MutualInformation | Self::MeasuredMutualInformation => 2.0 * base,
            _ => base,
        }
    }

    /// Parses a comma-separated list; `all` expands to [`Self::HISTOGRAM_SET`].
    pub fn parse_list(s: &str) -> Result<Vec<MeasureKind>> {
        let mut out = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if tok.eq_ignore_ascii_case("all") {
                out.extend(Self::HISTOGRAM_SET);
            } else {
                out.push(tok.parse()?);
            }
        }
        let mut seen = Vec::new();
        out.retain(|k| {
            let fresh = !seen.contains(k);
            seen.push(*k);
            fresh
        });
        if out.is_empty() {
            return Err(Error::UnknownMeasure(s.to_string()));
        }
        Ok(out)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.to_ascii_lowercase().as_str() {
            "negativity" | "n" | "neg" => Self::Negativity,
            "log-negativity" | "lognegativity" | "l" | "logneg" => Self::LogNegativity,
            "mutual-information" | "i" | "mi" => Self::MutualInformation,
            "measured-mutual-information" | "j" | "mmi" | "classical" => {
                Self::MeasuredMutualInformation
            }
            "discord" | "d" => Self::Discord,
            "work-deficit" | "wd" | "delta" => Self::WorkDeficit,
            "tangle" | "tau" => Self::Tangle,
            "eof" | "entanglement-of-formation" | "e" => Self::EntanglementOfFormation,
            _ => return Err(Error::UnknownMeasure(s.to_string())),
        };
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSettings {
    pub optimizer: OptimizerSettings,
    /// Use `D = S(rho_A)` when the cut's global state is pure.
    pub discord_pure_shortcut: bool,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        Self {
            optimizer: OptimizerSettings::default(),
            discord_pure_shortcut: true,
        }
    }
}

impl MeasureSettings {
    /// Always runs the optimizer, even where a closed form exists.
    pub fn numeric() -> Self {
        Self {
            discord_pure_shortcut: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub kind: MeasureKind,
    pub raw: f64,
    pub normalized: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerReport>,
}

/// A density matrix split into sides `A` and `B`, stored as a two-factor state
/// `[d_A, d_B]` with `A`'s subsystems first.
#[derive(Clone, Debug)]
pub struct BipartiteCut {
    joint: DensityMatrix,
    side_a: Vec<usize>,
    side_b: Vec<usize>,
}

impl BipartiteCut {
    pub fn new(rho: &DensityMatrix, side_a: &[usize], side_b: &[usize]) -> Result<Self> {
        let n = rho.num_subsystems();
        let a = check_index_set(side_a, n)?;
        let b = check_index_set(side_b, n)?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidPartition(
                "both sides must be nonempty".into(),
            ));
        }
        if a.iter().any(|k| b.contains(k)) {
            return Err(Error::InvalidPartition(format!(
                "sides {side_a:?} and {side_b:?} overlap"
            )));
        }
        if a.len() + b.len() != n {
            return Err(Error::InvalidPartition(format!(
                "sides {side_a:?} and {side_b:?} do not cover {n} subsystems"
            )));
        }
        let order: Vec<usize> = side_a.iter().chain(side_b).copied().collect();
        let joint = rho.permute(&order)?.regroup(&[a.len(), b.len()])?;
        Ok(Self {
            joint,
            side_a: side_a.to_vec(),
            side_b: side_b.to_vec(),
        })
    }

    /// Subsystem `a` against everything else.
    pub fn one_vs_rest(rho: &DensityMatrix, a: usize) -> Result<Self> {
        let rest: Vec<usize> = (0..rho.num_subsystems()).filter(|&k| k != a).collect();
        Self::new(rho, &[a], &rest)
    }

    pub fn joint(&self) -> &DensityMatrix {
        &self.joint
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.side_b
    }

    pub fn d_a(&self) -> usize {
        self.joint.dims()[0]
    }

    pub fn d_b(&self) -> usize {
        self.joint.dims()[1]
    }

    pub fn rho_a(&self) -> DensityMatrix {
        partial_trace(&self.joint, &[0]).expect("two-factor state")
    }

    pub fn rho_b(&self) -> DensityMatrix {
        partial_trace(&self.joint, &[1]).expect("two-factor state")
    }

    pub fn is_pure(&self) -> bool {
        self.joint.purity() > 1.0 - PURE_TOL
    }

    fn value(
        &self,
        kind: MeasureKind,
        raw: f64,
        optimizer: Option<OptimizerReport>,
    ) -> MeasureValue {
        MeasureValue {
            kind,
            raw,
            normalized: raw / kind.normalizer(self.d_a(), self.d_b()),
            optimizer,
        }
    }

    fn require_qubit_a(&self) -> Result<()> {
        if self.d_a() != 2 {
            return Err(Error::NotQubitSide(self.d_a()));
        }
        Ok(())
    }
}

/// Evaluates `kind` on the cut.
pub fn evaluate(
    kind: MeasureKind,
    cut: &BipartiteCut,
    settings: &MeasureSettings,
) -> Result<MeasureValue> {
    match kind {
        MeasureKind::Negativity => negativity(cut),
        MeasureKind::LogNegativity => log_negativity(cut),
        MeasureKind::MutualInformation => mutual_information(cut),
        MeasureKind::MeasuredMutualInformation => {
            measured_mutual_information(cut, &settings.optimizer)
        }
        MeasureKind::Discord => quantum_discord(cut, settings),
        MeasureKind::WorkDeficit => work_deficit(cut, &settings.optimizer),
        MeasureKind::Tangle => tangle(cut),
        MeasureKind::EntanglementOfFormation => entanglement_of_formation(cut),
    }
}

/// Evaluates several measures on one cut, sharing the conditional-entropy
/// minimization between measured mutual information and discord.
pub fn evaluate_many(
    kinds: &[MeasureKind],
    cut: &BipartiteCut,
    settings: &MeasureSettings,
) -> Result<Vec<MeasureValue>> {
    let needs_classical = kinds.iter().any(|k| {
        *k == MeasureKind::MeasuredMutualInformation
            || (*k == MeasureKind::Discord && !(settings.discord_pure_shortcut && cut.is_pure()))
    });
    let classical = if needs_classical {
        Some(measured_mutual_information(cut, &settings.optimizer)?)
    } else {
        None
    };
    kinds
        .iter()
        .map(|&kind| match (kind, &classical) {
            (MeasureKind::MeasuredMutualInformation, Some(j)) => Ok(j.clone()),
            (MeasureKind::Discord, Some(j)) => discord_from_classical(cut, j),
            _ => evaluate(kind, cut, settings),
        })
        .collect()
}

fn discord_from_classical(cut: &BipartiteCut, classical: &MeasureValue) -> Result<MeasureValue> {
    let total = mutual_information(cut)?.raw;
    Ok(cut.value(
        MeasureKind::Discord,
        (total - classical.raw).max(0.0),
        classical.optimizer,
    ))
}

fn pt_trace_norm(cut: &BipartiteCut) -> Result<f64> {
    trace_norm(&partial_transpose(cut.joint(), 0)?)
}

pub fn negativity(cut: &BipartiteCut) -> Result<MeasureValue> {
    let raw = ((pt_trace_norm(cut)? - 1.0) / 2.0).max(0.0);
    Ok(cut.value(MeasureKind::Negativity, raw, None))
}

pub fn log_negativity(cut: &BipartiteCut) -> Result<MeasureValue> {
    let raw = pt_trace_norm(cut)?.log2().max(0.0);
    Ok(cut.value(MeasureKind::LogNegativity, raw, None))
}

pub fn mutual_information(cut: &BipartiteCut) -> Result<MeasureValue> {
    let raw = von_neumann_entropy(&cut.rho_a())? + von_neumann_entropy(&cut.rho_b())?
        - von_neumann_entropy(cut.joint())?;
    Ok(cut.value(MeasureKind::MutualInformation, raw.max(0.0), None))
}

/// The unnormalized post-measurement blocks `<v_a| rho |v_a>` on side `B`.
struct ConditionalBlocks {
    d_b: usize,
    /// `blocks[i][i']` is the `d_B x d_B` block of rows `i`, columns `i'` on `A`.
    blocks: [[ComplexMatrix; 2]; 2],
}

struct ConditionalSplit {
    /// `-sum_a tr sigma_a log2 sigma_a`, the entropy of the dephased state.
    dephased_entropy: f64,
    probabilities: [f64; 2],
}

impl ConditionalBlocks {
    fn new(cut: &BipartiteCut) -> Result<Self> {
        cut.require_qubit_a()?;
        let d_b = cut.d_b();
        let m = cut.joint().matrix();
        let block = |i: usize, j: usize| {
            ComplexMatrix::from_fn(d_b, d_b, |r, c| m[(i * d_b + r, j * d_b + c)])
        };
        Ok(Self {
            d_b,
            blocks: [[block(0, 0), block(0, 1)], [block(1, 0), block(1, 1)]],
        })
    }

    fn split(&self, basis: QubitMeasurementBasis) -> ConditionalSplit {
        let mut dephased_entropy = 0.0;
        let mut probabilities = [0.0; 2];
        for (a, v) in basis.vectors().iter().enumerate() {
            let w = [
                [v[0].conj() * v[0], v[0].conj() * v[1]],
                [v[1].conj() * v[0], v[1].conj() * v[1]],
            ];
            let sigma = ComplexMatrix::from_fn(self.d_b, self.d_b, |r, c| {
                let mut z = C64::new(0.0, 0.0);
                for i in 0..2 {
                    for j in 0..2 {
                        z += w[i][j] * self.blocks[i][j][(r, c)];
                    }
                }
                z
            });
            probabilities[a] = sigma.trace().re;
            let spec = eigvalsh(&sigma).expect("conditional block is Hermitian");
            dephased_entropy += entropy_term_sum(&spec.eigenvalues);
        }
        ConditionalSplit {
            dephased_entropy,
            probabilities,
        }
    }

    /// `sum_a p_a S(rho_{B|a})`
    fn conditional_entropy(&self, basis: QubitMeasurementBasis) -> f64 {
        let s = self.split(basis);
        s.dephased_entropy - entropy_of_spectrum(&s.probabilities)
    }

    /// `S(sum_a (Pi_a ⊗ I) rho (Pi_a ⊗ I))`
    fn dephased_entropy(&self, basis: QubitMeasurementBasis) -> f64 {
        self.split(basis).dephased_entropy
    }
}

/// `min_basis sum_a p_a S(rho_{B|a})` with the optimizer outcome.
pub fn min_conditional_entropy(
    cut: &BipartiteCut,
    settings: &OptimizerSettings,
) -> Result<(f64, OptimizerReport)> {
    let blocks = ConditionalBlocks::new(cut)?;
    let out = optimize_qubit_measurement(|b| blocks.conditional_entropy(b), settings);
    Ok((out.value, out.report))
}

/// Conditional entropy for one fixed measurement on `A`.
pub fn conditional_entropy_for(cut: &BipartiteCut, basis: QubitMeasurementBasis) -> Result<f64> {
    Ok(ConditionalBlocks::new(cut)?.conditional_entropy(basis))
}

pub fn measured_mutual_information(
    cut: &BipartiteCut,
    settings: &OptimizerSettings,
) -> Result<MeasureValue> {
    let (min_cond, report) = min_conditional_entropy(cut, settings)?;
    let raw = (von_neumann_entropy(&cut.rho_b())? - min_cond).max(0.0);
    Ok(cut.value(MeasureKind::MeasuredMutualInformation, raw, Some(report)))
}

pub fn quantum_discord(cut: &BipartiteCut, settings: &MeasureSettings) -> Result<MeasureValue> {
    cut.require_qubit_a()?;
    if settings.discord_pure_shortcut && cut.is_pure() {
        let raw = von_neumann_entropy(&cut.rho_a())?;
        return Ok(cut.value(MeasureKind::Discord, raw, None));
    }
    discord_from_classical(cut, &measured_mutual_information(cut, &settings.optimizer)?)
}

pub fn work_deficit(cut: &BipartiteCut, settings: &OptimizerSettings) -> Result<MeasureValue> {
    let blocks = ConditionalBlocks::new(cut)?;
    let out = optimize_qubit_measurement(|b| blocks.dephased_entropy(b), settings);
    let raw = (out.value - von_neumann_entropy(cut.joint())?).max(0.0);
    Ok(cut.value(MeasureKind::WorkDeficit, raw, Some(out.report)))
}

fn two_qubit_check(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit state required, got dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit state, from the spectrum of the Hermitian
/// matrix `sqrt(rho) rho~ sqrt(rho)`, which shares its eigenvalues with `rho rho~`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    two_qubit_check(rho)?;
    let yy = kron(&pauli::y(), &pauli::y());
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    let spec = eigh(rho.matrix())?;
    let v = spec.eigenvectors.expect("requested eigenvectors");
    let sqrt_diag: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    let sqrt_rho = &(&v * &ComplexMatrix::from_real_diagonal(&sqrt_diag)) * &v.adjoint();
    let mut m = &(&sqrt_rho * &flipped) * &sqrt_rho;
    // Symmetrize away roundoff before the Hermitian solve.
    m = ComplexMatrix::from_fn(4, 4, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let mu = eigvalsh(&m)?.eigenvalues;
    let s: Vec<f64> = mu.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

pub fn tangle_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence(rho)?.powi(2))
}

fn qubit_reduction(psi: &PureState, nodal: usize) -> Result<DensityMatrix> {
    let d = *psi.dims().get(nodal).ok_or(Error::IndexOutOfRange {
        index: nodal,
        count: psi.dims().len(),
    })?;
    if d != 2 {
        return Err(Error::NotQubitSide(d));
    }
    psi.reduced(&[nodal])
}

fn det2(m: &ComplexMatrix) -> f64 {
    (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re
}

/// `tau(A:rest) = 4 det rho_A` for a pure state and qubit `A`.
pub fn tangle_pure_cut(psi: &PureState, nodal: usize) -> Result<f64> {
    let rho_a = qubit_reduction(psi, nodal)?;
    Ok((4.0 * det2(rho_a.matrix())).max(0.0))
}

pub fn eof_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence(rho)?.min(1.0);
    crate::entropy::binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

pub fn eof_pure_cut(psi: &PureState, nodal: usize) -> Result<f64> {
    von_neumann_entropy(&qubit_reduction(psi, nodal)?)
}

fn convex_roof_undefined(kind: MeasureKind) -> Error {
    Error::MeasureUndefined {
        measure: kind.name().into(),
        reason: "needs a two-qubit cut or a pure state with a qubit side A".into(),
    }
}

/// Tangle on a cut: concurrence squared for two qubits, `4 det rho_A` for pure cuts.
pub fn tangle(cut: &BipartiteCut) -> Result<MeasureValue> {
    let raw = if cut.joint().dims() == [2, 2] {
        tangle_two_qubit(cut.joint())?
    } else if cut.d_a() == 2 && cut.is_pure() {
        (4.0 * det2(cut.rho_a().matrix())).max(0.0)
    } else {
        return Err(convex_roof_undefined(MeasureKind::Tangle));
    };
    Ok(cut.value(MeasureKind::Tangle, raw, None))
}

pub fn entanglement_of_formation(cut: &BipartiteCut) -> Result<MeasureValue> {
    let raw = if cut.joint().dims() == [2, 2] {
        eof_two_qubit(cut.joint())?
    } else if cut.is_pure() {
        von_neumann_entropy(&cut.rho_a())?
    } else {
        return Err(convex_roof_undefined(MeasureKind::EntanglementOfFormation));
    };
    Ok(cut.value(MeasureKind::EntanglementOfFormation, raw, None))
}
