//! Named multiqubit state families, their closed-form single-qubit reductions,
//! and reproducible Haar-random sampling.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::entropy::binary_entropy;
use crate::error::{Error, Result};
use crate::tensor::{check_index_set, offsets, ComplexMatrix, DensityMatrix, C64};

const NORM_TOL: f64 = 1e-12;
const PARAM_TOL: f64 = 1e-10;

/// A normalized state vector on a tensor product space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidPureState(format!(
                "subsystem dimensions must all be >= 2, got {dims:?}"
            )));
        }
        if total != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} give {total}, got {} amplitudes",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidPureState(format!(
                "squared norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidPureState(
                "cannot normalize a zero vector".into(),
            ));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect(), dims)
    }

    /// `|0...0>` on `n` qubits.
    pub fn zero_qubits(n: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Self {
            amplitudes: amps,
            dims: vec![2; n],
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::new_unchecked(ComplexMatrix::outer(&self.amplitudes), self.dims.clone())
    }

    /// Reduced state on `keep`, computed directly from the amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let kept = check_index_set(keep, self.dims.len())?;
        if kept.is_empty() {
            return Err(Error::InvalidPartition("keep set is empty".into()));
        }
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !kept.contains(k)).collect();
        let ko = offsets(&self.dims, &kept);
        let to = offsets(&self.dims, &traced);
        let psi = &self.amplitudes;
        let m = ComplexMatrix::from_fn(ko.len(), ko.len(), |r, c| {
            to.iter()
                .map(|&t| psi[ko[r] + t] * psi[ko[c] + t].conj())
                .sum()
        });
        let dims = kept.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix::new_unchecked(m, dims))
    }
}

/// Coefficients of `alpha |0..0> + beta |1..1> + gamma |W_n>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhzwParams {
    pub n: usize,
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
}

impl GhzwParams {
    pub fn new(n: usize, alpha: C64, beta: C64, gamma: C64) -> Result<Self> {
        let p = Self {
            n,
            alpha,
            beta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn real(n: usize, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(
            n,
            C64::new(alpha, 0.0),
            C64::new(beta, 0.0),
            C64::new(gamma, 0.0),
        )
    }

    /// Balanced GHZ: `(|0..0> + |1..1>)/sqrt(2)`.
    pub fn ghz(n: usize) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::real(n, s, s, 0.0)
    }

    pub fn w(n: usize) -> Result<Self> {
        Self::real(n, 0.0, 0.0, 1.0)
    }

    /// Uniformly random point on the complex unit sphere in C^3.
    pub fn random(n: usize, seed: SeedSpec) -> Result<Self> {
        let mut rng = seed.rng();
        let mut z = [C64::new(0.0, 0.0); 3];
        for zi in &mut z {
            *zi = gaussian_complex(&mut rng);
        }
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Self::new(n, z[0] / norm, z[1] / norm, z[2] / norm)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!(
                "GHZ+W superposition needs n >= 3 qubits, got {}",
                self.n
            )));
        }
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr() + self.gamma.norm_sqr();
        if (norm - 1.0).abs() > PARAM_TOL {
            return Err(Error::InvalidParameter(format!(
                "|alpha|^2 + |beta|^2 + |gamma|^2 = {norm}, expected 1"
            )));
        }
        Ok(())
    }
}

pub fn ghz_w(p: &GhzwParams) -> Result<PureState> {
    p.validate()?;
    let n = p.n;
    let dim = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = p.alpha;
    amps[dim - 1] = p.beta;
    let w = p.gamma / (n as f64).sqrt();
    for k in 0..n {
        amps[1 << k] += w;
    }
    PureState::normalized(amps, vec![2; n])
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, k| acc * (n - k) as f64 / (k + 1) as f64)
}

/// Equal superposition of all `n`-qubit basis states of Hamming weight `r`.
pub fn dicke(n: usize, r: usize) -> Result<PureState> {
    if n < 2 || r == 0 || r >= n {
        return Err(Error::InvalidParameter(format!(
            "Dicke state needs 1 <= r <= n-1, got n = {n}, r = {r}"
        )));
    }
    let amp = C64::new(binomial(n, r).powf(-0.5), 0.0);
    let amps = (0..1usize << n)
        .map(|i| {
            if i.count_ones() as usize == r {
                amp
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    PureState::normalized(amps, vec![2; n])
}

/// Closed-form single-qubit reduction of the GHZ+W superposition.
pub fn reduced_qubit_analytic(p: &GhzwParams) -> Result<DensityMatrix> {
    p.validate()?;
    let n = p.n as f64;
    let a2 = p.alpha.norm_sqr();
    let b2 = p.beta.norm_sqr();
    let g2 = p.gamma.norm_sqr();
    let off = p.alpha * p.gamma.conj() / n.sqrt();
    let m = ComplexMatrix::from_vec(
        2,
        2,
        vec![
            C64::new(a2 + (n - 1.0) / n * g2, 0.0),
            off,
            off.conj(),
            C64::new(g2 / n + b2, 0.0),
        ],
    )?;
    Ok(DensityMatrix::new_unchecked(m, vec![2]))
}

/// Largest eigenvalue `e` of [`reduced_qubit_analytic`], in `[1/2, 1]`.
pub fn largest_eig_analytic(p: &GhzwParams) -> Result<f64> {
    p.validate()?;
    let n = p.n as f64;
    let a2 = p.alpha.norm_sqr();
    let b2 = p.beta.norm_sqr();
    let g2 = p.gamma.norm_sqr();
    let radicand = 1.0 - 4.0 * a2 * b2 - 4.0 * (n - 1.0) / n * g2 * (b2 + g2 / n);
    if radicand < -1e-12 {
        return Err(Error::InvalidParameter(format!(
            "negative radicand {radicand:e} in largest eigenvalue"
        )));
    }
    Ok(0.5 * (1.0 + radicand.max(0.0).sqrt()))
}

/// The single-qubit entropy `h(e)` of the GHZ+W family.
pub fn reduced_entropy_analytic(p: &GhzwParams) -> Result<f64> {
    binary_entropy(largest_eig_analytic(p)?.min(1.0))
}

/// Identifies one independent random stream: the base seed keys the generator and
/// the stream index selects the ChaCha stream, so distinct pairs never share output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        Self {
            base_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.base_seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

fn gaussian_complex<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-uniform pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_pure(dims: &[usize], seed: SeedSpec) -> Result<PureState> {
    let total: usize = dims.iter().product();
    if total < 2 {
        return Err(Error::InvalidParameter(format!(
            "Haar sampling needs total dimension >= 2, got {dims:?}"
        )));
    }
    let mut rng = seed.rng();
    let amps = (0..total).map(|_| gaussian_complex(&mut rng)).collect();
    PureState::normalized(amps, dims.to_vec())
}

/// Rank <= 2 state on `n` qubits: an `(n+1)`-qubit Haar pure state with its last
/// qubit traced out.
pub fn haar_rank2(n: usize, seed: SeedSpec) -> Result<DensityMatrix> {
    let purified = haar_pure(&vec![2; n + 1], seed)?;
    purified.reduced(&(0..n).collect::<Vec<_>>())
}

pub fn haar_rank2_threequbit(seed: SeedSpec) -> Result<DensityMatrix> {
    haar_rank2(3, seed)
}

/// Haar-random single-qubit unitary (QR of a Ginibre matrix, phases fixed).
pub fn haar_unitary_2(seed: SeedSpec) -> ComplexMatrix {
    let mut rng = seed.rng();
    let a = gaussian_complex(&mut rng);
    let b = gaussian_complex(&mut rng);
    let phi = rng.random::<f64>() * 2.0 * PI;
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / norm, b / norm);
    let ph = C64::from_polar(1.0, phi);
    ComplexMatrix::from_vec(2, 2, vec![a, -b.conj() * ph, b, a.conj() * ph]).unwrap()
}

/// Serialized form of a single state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub dims: Vec<usize>,
    pub kind: StateKind,
    /// `[re, im]` pairs; amplitudes for pure states, row-major entries for mixed ones.
    pub data: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dims(&self) -> &[usize] {
        match self {
            Self::Pure(p) => p.dims(),
            Self::Mixed(m) => m.dims(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            Self::Pure(p) => p.to_density(),
            Self::Mixed(m) => m.clone(),
        }
    }
}

fn to_pairs(z: &[C64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

impl StateRecord {
    pub fn from_state(state: &QuantumState) -> Self {
        match state {
            QuantumState::Pure(p) => Self {
                id: None,
                family: None,
                dims: p.dims().to_vec(),
                kind: StateKind::Pure,
                data: to_pairs(p.amplitudes()),
            },
            QuantumState::Mixed(m) => Self {
                id: None,
                family: None,
                dims: m.dims().to_vec(),
                kind: StateKind::Mixed,
                data: to_pairs(m.matrix().as_slice()),
            },
        }
    }

    pub fn with_labels(mut self, id: impl Into<String>, family: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self.family = Some(family.into());
        self
    }

    pub fn to_state(&self) -> Result<QuantumState> {
        let z = from_pairs(&self.data);
        match self.kind {
            StateKind::Pure => Ok(QuantumState::Pure(PureState::new(z, self.dims.clone())?)),
            StateKind::Mixed => {
                let d: usize = self.dims.iter().product();
                let m = ComplexMatrix::from_vec(d, d, z)?;
                Ok(QuantumState::Mixed(DensityMatrix::new(
                    m,
                    self.dims.clone(),
                )?))
            }
        }
    }
}

/// A state file holds one state object or an array of them.
#[derive(Deserialize)]
#[serde(untagged)]
enum StateFile {
    Many(Vec<StateRecord>),
    One(StateRecord),
}

pub fn parse_states(json: &str) -> Result<Vec<StateRecord>> {
    Ok(match serde_json::from_str::<StateFile>(json)? {
        StateFile::Many(v) => v,
        StateFile::One(r) => vec![r],
    })
}

pub fn read_states(path: &Path) -> Result<Vec<StateRecord>> {
    parse_states(&std::fs::read_to_string(path)?)
}

pub fn states_to_json(records: &[StateRecord]) -> Result<String> {
    Ok(serde_json::to_string(records)?)
}

pub fn write_states(path: &Path, records: &[StateRecord]) -> Result<()> {
    std::fs::write(path, states_to_json(records)?)?;
    Ok(())
}
