use nalgebra::SMatrix;

use super::density::{vec_index, DensityMatrix3, Matrix3c, Vec9};
use super::params::{DriveParams, LambdaParams};
use crate::units::angular;
use crate::C64;

pub type Superop = SMatrix<C64, 9, 9>;

/// `σ_ij = |i⟩⟨j|`.
pub fn sigma(i: usize, j: usize) -> Matrix3c {
    let mut m = Matrix3c::zeros();
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Rotating-frame Λ Hamiltonian in rad/µs:
/// `−(Ω_p/2)(σ_02+σ_20) − (Ω_c/2)(σ_12+σ_21) + (Δ_p−Δ_c)σ_11 + Δ_p σ_22`.
pub fn lambda_hamiltonian(drive: &DriveParams) -> Matrix3c {
    let half_p = C64::new(-0.5 * angular(drive.omega_p), 0.0);
    let half_c = C64::new(-0.5 * angular(drive.omega_c), 0.0);
    let mut h = Matrix3c::zeros();
    h[(0, 2)] = half_p;
    h[(2, 0)] = half_p;
    h[(1, 2)] = half_c;
    h[(2, 1)] = half_c;
    h[(1, 1)] = C64::new(angular(drive.delta_p - drive.delta_c), 0.0);
    h[(2, 2)] = C64::new(angular(drive.delta_p), 0.0);
    h
}

/// `vec(A X B) = (Bᵀ ⊗ A) vec(X)` for column stacking.
fn sandwich(a: &Matrix3c, b: &Matrix3c) -> Superop {
    let mut out = Superop::zeros();
    for col_b in 0..3 {
        for row_b in 0..3 {
            let coeff = b[(row_b, col_b)];
            if coeff == C64::new(0.0, 0.0) {
                continue;
            }
            for ca in 0..3 {
                for ra in 0..3 {
                    out[(ra + 3 * col_b, ca + 3 * row_b)] += coeff * a[(ra, ca)];
                }
            }
        }
    }
    out
}

fn commutator_superop(h: &Matrix3c) -> Superop {
    let id = Matrix3c::identity();
    // −i[H, ρ]
    (sandwich(h, &id) - sandwich(&id, h)) * C64::new(0.0, -1.0)
}

fn dissipator_superop(a: &Matrix3c) -> Superop {
    let id = Matrix3c::identity();
    let ad = a.adjoint();
    let ada = ad * a;
    let half = C64::new(0.5, 0.0);
    sandwich(a, &ad) - (sandwich(&ada, &id) + sandwich(&id, &ada)) * half
}

/// Dissipation channels `(rate MHz, jump operator)` in master-equation order.
pub fn channels(params: &LambdaParams) -> [(f64, Matrix3c); 6] {
    [
        (params.gamma_r_02, sigma(0, 2)),
        (params.gamma_r_12, sigma(1, 2)),
        (params.gamma_r_01, sigma(0, 1)),
        (params.gamma_r_10, sigma(1, 0)),
        (2.0 * params.gamma_phi_22, sigma(2, 2)),
        (2.0 * params.gamma_phi_11, sigma(1, 1)),
    ]
}

/// Generator of the master equation acting on column-stacked ρ, rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Liouvillian(Superop);

impl Liouvillian {
    /// `L vec(ρ) = vec(−i[H̃, ρ] + Σ r_k D[A_k]ρ)` with
    /// `D[A]ρ = AρA† − ½{A†A, ρ}`.
    pub fn build(params: &LambdaParams, drive: &DriveParams) -> Self {
        Self(Self::dissipative_part(params) + commutator_superop(&lambda_hamiltonian(drive)))
    }

    pub fn from_matrix(m: Superop) -> Self {
        Self(m)
    }

    pub(crate) fn dissipative_part(params: &LambdaParams) -> Superop {
        let mut l = Superop::zeros();
        for (rate, a) in channels(params) {
            if rate != 0.0 {
                l += dissipator_superop(&a) * C64::new(angular(rate), 0.0);
            }
        }
        l
    }

    /// Superoperator of the coherent part alone.
    pub(crate) fn coherent_part(drive: &DriveParams) -> Superop {
        commutator_superop(&lambda_hamiltonian(drive))
    }

    pub fn matrix(&self) -> &Superop {
        &self.0
    }

    pub fn apply(&self, rho: &DensityMatrix3) -> Vec9 {
        self.0 * rho.to_vec()
    }

    /// Largest entry of the trace functional applied from the left; zero
    /// for a trace-preserving generator.
    pub fn trace_row_residual(&self) -> f64 {
        (0..9)
            .map(|col| {
                (0..3)
                    .map(|k| self.0[(vec_index(k, k), col)])
                    .fold(C64::new(0.0, 0.0), |a, b| a + b)
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.0
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .copied()
            .collect()
    }
}
