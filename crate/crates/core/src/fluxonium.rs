//! Fluxonium circuit spectrum.
//!
//! The Hamiltonian `4 E_C n² + ½ E_L φ² − E_J cos(φ + 2π·flux)` is written in
//! the eigenbasis of its LC part, a harmonic oscillator of frequency
//! `√(8 E_C E_L)`. The phase operator is `φ = φ_zpf (a + a†)` with
//! `φ_zpf = (8 E_C / E_L)^¼ / √2`, and the charge operator is
//! `n = i (a† − a) / (2 φ_zpf)`, so `[φ, n] = i` without truncation.
//! The cosine term is evaluated exactly in the truncated space by
//! diagonalising `φ`, applying the scalar cosine to its eigenvalues and
//! rotating back.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BASIS_SIZE: usize = 10;
pub const DEFAULT_BASIS_SIZE: usize = 60;

/// Relative growth of the basis used by the automatic convergence check.
const CONVERGENCE_GROWTH: f64 = 1.5;
/// Largest tolerated shift (GHz) of the requested levels under basis growth.
const CONVERGENCE_TOL_GHZ: f64 = 1e-6;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_SWEEPS: usize = 10_000;

/// Circuit energies in GHz and external flux in units of Φ0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxoniumParams {
    pub e_j: f64,
    pub e_c: f64,
    pub e_l: f64,
    pub flux: f64,
    pub basis_size: usize,
}

impl FluxoniumParams {
    pub fn new(e_j: f64, e_c: f64, e_l: f64, flux: f64, basis_size: usize) -> Result<Self> {
        let params = Self {
            e_j,
            e_c,
            e_l,
            flux,
            basis_size,
        };
        params.validate()?;
        Ok(params)
    }

    /// Device energies fitted to the one-tone flux sweep, biased at 0.53 Φ0.
    pub fn fitted_device() -> Self {
        Self {
            e_j: 9.041,
            e_c: 0.995,
            e_l: 0.807,
            flux: 0.53,
            basis_size: DEFAULT_BASIS_SIZE,
        }
    }

    pub fn with_flux(self, flux: f64) -> Self {
        Self { flux, ..self }
    }

    pub fn with_basis(self, basis_size: usize) -> Self {
        Self { basis_size, ..self }
    }

    /// `E_J = 0` is accepted here so the harmonic limit stays reachable;
    /// [`FluxoniumParams::validate_strict`] enforces `E_J > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.e_j >= 0.0 && self.e_j.is_finite()) {
            return Err(Error::invalid("e_j", "must be finite and non-negative"));
        }
        for (name, v) in [("e_c", self.e_c), ("e_l", self.e_l)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and positive"));
            }
        }
        if !self.flux.is_finite() {
            return Err(Error::invalid("flux", "must be finite"));
        }
        if self.basis_size < MIN_BASIS_SIZE {
            return Err(Error::invalid(
                "basis_size",
                format!("must be at least {MIN_BASIS_SIZE}"),
            ));
        }
        Ok(())
    }

    pub fn validate_strict(&self) -> Result<()> {
        self.validate()?;
        if self.e_j <= 0.0 {
            return Err(Error::invalid("e_j", "must be positive"));
        }
        Ok(())
    }

    /// LC oscillator frequency `√(8 E_C E_L)` in GHz.
    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }

    /// Zero-point phase spread `(8 E_C / E_L)^¼ / √2`.
    pub fn phase_zpf(&self) -> f64 {
        (8.0 * self.e_c / self.e_l).powf(0.25) / SQRT_2
    }
}

/// `φ = φ_zpf (a + a†)` in the truncated oscillator basis.
pub fn phase_operator(params: &FluxoniumParams) -> DMatrix<f64> {
    let n = params.basis_size;
    let zpf = params.phase_zpf();
    let mut phi = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let v = zpf * ((k + 1) as f64).sqrt();
        phi[(k, k + 1)] = v;
        phi[(k + 1, k)] = v;
    }
    phi
}

/// Real antisymmetric `K` with `n = i K`, i.e. `K = (a† − a) / (2 φ_zpf)`.
///
/// Matrix elements of `n` between real eigenvectors satisfy
/// `|⟨i|n|j⟩| = |v_iᵀ K v_j|`.
pub fn charge_operator(params: &FluxoniumParams) -> DMatrix<f64> {
    let n = params.basis_size;
    let scale = 1.0 / (2.0 * params.phase_zpf());
    let mut k_op = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let v = scale * ((k + 1) as f64).sqrt();
        k_op[(k + 1, k)] = v;
        k_op[(k, k + 1)] = -v;
    }
    k_op
}

/// Applies `f` to the spectrum of a real symmetric matrix.
fn matrix_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_SWEEPS).ok_or(
        Error::EigenNonConvergence {
            dim,
            max_iterations: EIGEN_MAX_SWEEPS,
        },
    )?;
    let mapped = DVector::from_iterator(dim, eig.eigenvalues.iter().map(|&x| f(x)));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&mapped) * v.transpose())
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Fluxonium Hamiltonian in GHz, dimension `basis_size`, exactly symmetric.
pub fn build_fluxonium_hamiltonian(params: &FluxoniumParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = params.basis_size;
    let omega = params.plasma_frequency();
    // 4 E_C n² + ½ E_L φ² is diagonal in its own oscillator basis.
    let mut h = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        (0..n).map(|k| omega * (k as f64 + 0.5)),
    ));
    if params.e_j != 0.0 {
        let shift = 2.0 * PI * params.flux;
        let cos_term = matrix_function(&phase_operator(params), |x| (x + shift).cos())?;
        h -= cos_term * params.e_j;
    }
    symmetrize(&mut h);
    Ok(h)
}

/// Eigenenergies, transition frequencies and charge matrix elements.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending eigenenergies in GHz.
    pub levels: Vec<f64>,
    /// Eigenvectors as columns, in the order of `levels`.
    pub eigenvectors: DMatrix<f64>,
    /// `(i, j) → E_j − E_i` in GHz for `i < j`.
    pub transition_freqs: BTreeMap<(usize, usize), f64>,
    /// `(i, j) → |⟨i|n|j⟩|` for `i < j`.
    pub charge_elements: BTreeMap<(usize, usize), f64>,
}

impl SpectrumResult {
    /// Transition frequency `ν_ij` in GHz; order of the indices is irrelevant.
    pub fn nu(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        if a == b {
            return 0.0;
        }
        self.transition_freqs[&(a, b)]
    }

    pub fn charge_element(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        if a == b {
            // Diagonal elements of n vanish for real eigenvectors.
            return 0.0;
        }
        self.charge_elements[&(a, b)]
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Lowest `n_levels` eigenpairs of `h`.
///
/// Eigenvectors are sorted by eigenvalue with index order as the tie-break,
/// and each is signed so that its first non-negligible component is
/// positive. `charge` is the real antisymmetric part `K` of `n = iK`.
pub fn eigensolve(
    h: &DMatrix<f64>,
    charge: &DMatrix<f64>,
    n_levels: usize,
) -> Result<SpectrumResult> {
    let dim = h.nrows();
    if h.ncols() != dim || charge.nrows() != dim || charge.ncols() != dim {
        return Err(Error::invalid("h", "Hamiltonian and charge operator must be square and of equal size"));
    }
    if n_levels == 0 {
        return Err(Error::invalid("n_levels", "must be positive"));
    }
    if n_levels > dim / 2 {
        return Err(Error::Truncation {
            basis_size: dim,
            requested: n_levels,
            detail: "at most half the basis may be reported".into(),
        });
    }
    let eig = SymmetricEigen::try_new(h.clone(), EIGEN_EPS, EIGEN_MAX_SWEEPS).ok_or(
        Error::EigenNonConvergence {
            dim,
            max_iterations: EIGEN_MAX_SWEEPS,
        },
    )?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    order.truncate(n_levels);

    let levels: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(dim, n_levels);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(col, &v);
    }

    let kv = charge * &vectors;
    let mut transition_freqs = BTreeMap::new();
    let mut charge_elements = BTreeMap::new();
    for i in 0..n_levels {
        for j in (i + 1)..n_levels {
            transition_freqs.insert((i, j), levels[j] - levels[i]);
            charge_elements.insert((i, j), vectors.column(i).dot(&kv.column(j)).abs());
        }
    }
    Ok(SpectrumResult {
        levels,
        eigenvectors: vectors,
        transition_freqs,
        charge_elements,
    })
}

/// Builds and diagonalises the Hamiltonian, without a convergence check.
pub fn spectrum_unchecked(params: &FluxoniumParams, n_levels: usize) -> Result<SpectrumResult> {
    let h = build_fluxonium_hamiltonian(params)?;
    eigensolve(&h, &charge_operator(params), n_levels)
}

/// Spectrum with an automatic truncation check: the computation is repeated
/// in a basis 1.5× larger and the lowest `n_levels` energies must agree to
/// 1e-6 GHz.
pub fn spectrum(params: &FluxoniumParams, n_levels: usize) -> Result<SpectrumResult> {
    let result = spectrum_unchecked(params, n_levels)?;
    let larger = params.with_basis((params.basis_size as f64 * CONVERGENCE_GROWTH).ceil() as usize);
    let reference = spectrum_unchecked(&larger, n_levels)?;
    let shift = result
        .levels
        .iter()
        .zip(&reference.levels)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if shift > CONVERGENCE_TOL_GHZ {
        return Err(Error::Truncation {
            basis_size: params.basis_size,
            requested: n_levels,
            detail: format!(
                "levels move by {shift:.3e} GHz when the basis grows to {}",
                larger.basis_size
            ),
        });
    }
    Ok(result)
}

/// One row of a flux sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxPoint {
    pub flux: f64,
    pub spectrum: SpectrumResult,
}

/// Spectrum at every flux value of `flux_grid`, in grid order.
pub fn flux_sweep(
    base: &FluxoniumParams,
    flux_grid: &[f64],
    n_levels: usize,
) -> Result<Vec<FluxPoint>> {
    if flux_grid.is_empty() {
        return Err(Error::Grid("flux grid is empty".into()));
    }
    flux_grid
        .par_iter()
        .map(|&flux| {
            spectrum(&base.with_flux(flux), n_levels)
                .map(|spectrum| FluxPoint { flux, spectrum })
                .map_err(|e| Error::AtFlux {
                    flux,
                    source: Box::new(e),
                })
        })
        .collect()
}
