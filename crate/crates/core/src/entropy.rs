//! Entropies in bits.

use crate::error::{Error, Result};
use crate::tensor::{DensityMatrix, STATE_TOL};

/// `-sum p log2 p` over a spectrum, clamping eigenvalues in `[-tol, 0)` to zero.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.log2())
        .sum()
}

/// Like [`entropy_of_spectrum`] for an unnormalized nonnegative spectrum.
pub(crate) fn entropy_term_sum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spec = rho.spectrum()?;
    if spec.smallest() < -STATE_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "negative eigenvalue {:e}",
            spec.smallest()
        )));
    }
    Ok(entropy_of_spectrum(&spec.eigenvalues))
}

pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "binary entropy argument {x} outside [0, 1]"
        )));
    }
    Ok(entropy_of_spectrum(&[x, 1.0 - x]))
}

/// `(log2 d - S) / log2 d`: 1 for pure states, 0 for the maximally mixed state.
pub fn normalized_purity(rho_x: &DensityMatrix) -> Result<f64> {
    let log_d = (rho_x.dim() as f64).log2();
    Ok((log_d - von_neumann_entropy(rho_x)?) / log_d)
}
