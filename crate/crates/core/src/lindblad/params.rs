use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Level structure and dissipation of the Λ system.
///
/// Frequencies in GHz, rates as linear frequencies in MHz (Γ/2π), mismatch
/// phase in radians. Channel naming follows `σ_ij = |i⟩⟨j|`: `gamma_r_02`
/// drives |2⟩→|0⟩, `gamma_r_12` drives |2⟩→|1⟩, `gamma_r_01` drives |1⟩→|0⟩
/// and `gamma_r_10` drives |0⟩→|1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaParams {
    pub nu02: f64,
    pub nu12: f64,
    pub nu01: f64,
    pub gamma_r_02: f64,
    pub gamma_r_12: f64,
    pub gamma_r_01: f64,
    pub gamma_r_10: f64,
    pub gamma_phi_11: f64,
    pub gamma_phi_22: f64,
    pub mismatch_phase: f64,
}

impl Default for LambdaParams {
    fn default() -> Self {
        Self::canonical()
    }
}

impl LambdaParams {
    /// Parameters of the three lowest transitions at 0.53 Φ0.
    pub fn canonical() -> Self {
        Self {
            nu02: 7.329,
            nu12: 6.681,
            nu01: 0.648,
            gamma_r_02: 13.78,
            gamma_r_12: 2.08,
            gamma_r_01: 0.022,
            gamma_r_10: 0.0218,
            gamma_phi_11: 0.14,
            gamma_phi_22: 0.16,
            mismatch_phase: -0.299,
        }
    }

    /// All dissipation switched off; level structure kept.
    pub fn lossless(self) -> Self {
        Self {
            gamma_r_02: 0.0,
            gamma_r_12: 0.0,
            gamma_r_01: 0.0,
            gamma_r_10: 0.0,
            gamma_phi_11: 0.0,
            gamma_phi_22: 0.0,
            ..self
        }
    }

    /// Removes every channel acting on the |0⟩–|1⟩ coherence
    /// (Γ_01 = Γ_10 = γ_11 = 0), the ideal dark-state configuration.
    pub fn without_ground_decoherence(self) -> Self {
        Self {
            gamma_r_01: 0.0,
            gamma_r_10: 0.0,
            gamma_phi_11: 0.0,
            ..self
        }
    }

    pub fn with_mismatch(self, mismatch_phase: f64) -> Self {
        Self {
            mismatch_phase,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma_r_02", self.gamma_r_02),
            ("gamma_r_12", self.gamma_r_12),
            ("gamma_r_01", self.gamma_r_01),
            ("gamma_r_10", self.gamma_r_10),
            ("gamma_phi_11", self.gamma_phi_11),
            ("gamma_phi_22", self.gamma_phi_22),
        ];
        for (name, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("rate must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("nu02", self.nu02), ("nu12", self.nu12), ("nu01", self.nu01)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if (self.nu02 - self.nu01 - self.nu12).abs() > 1e-6 {
            return Err(Error::invalid(
                "nu02",
                format!(
                    "must equal nu01 + nu12 within 1e-6 GHz ({} vs {})",
                    self.nu02,
                    self.nu01 + self.nu12
                ),
            ));
        }
        if !self.mismatch_phase.is_finite() {
            return Err(Error::invalid("mismatch_phase", "must be finite"));
        }
        Ok(())
    }

    /// `γ_02 = Γ_02/2 + γ_22` in MHz.
    pub fn gamma_02(&self) -> f64 {
        self.gamma_r_02 / 2.0 + self.gamma_phi_22
    }

    /// `γ_01 = Γ_01/2 + γ_11` in MHz.
    pub fn gamma_01(&self) -> f64 {
        self.gamma_r_01 / 2.0 + self.gamma_phi_11
    }

    /// Exact free-decay rate (MHz) of ρ_02 under the full channel list:
    /// half the total depletion of |2⟩ and of |0⟩, plus dephasing of |2⟩.
    pub fn coherence_decay_02(&self) -> f64 {
        (self.gamma_r_02 + self.gamma_r_12 + self.gamma_r_10) / 2.0 + self.gamma_phi_22
    }

    /// Exact free-decay rate (MHz) of ρ_01.
    pub fn coherence_decay_01(&self) -> f64 {
        (self.gamma_r_01 + self.gamma_r_10) / 2.0 + self.gamma_phi_11
    }

    /// Exact free-decay rate (MHz) of ρ_12.
    pub fn coherence_decay_12(&self) -> f64 {
        (self.gamma_r_02 + self.gamma_r_12 + self.gamma_r_01) / 2.0
            + self.gamma_phi_11
            + self.gamma_phi_22
    }

    pub(crate) fn max_rate(&self) -> f64 {
        [
            self.gamma_r_02,
            self.gamma_r_12,
            self.gamma_r_01,
            self.gamma_r_10,
            2.0 * self.gamma_phi_11,
            2.0 * self.gamma_phi_22,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Constant drive: detunings and Rabi amplitudes as linear frequencies (MHz).
///
/// `delta_p` and `delta_c` enter the rotating-frame Hamiltonian as the
/// coefficients of σ_22 and σ_11 (see [`super::lambda_hamiltonian`]).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveParams {
    pub delta_p: f64,
    pub delta_c: f64,
    pub omega_p: f64,
    pub omega_c: f64,
}

impl DriveParams {
    pub fn new(delta_p: f64, delta_c: f64, omega_p: f64, omega_c: f64) -> Result<Self> {
        let d = Self {
            delta_p,
            delta_c,
            omega_p,
            omega_c,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega_p", self.omega_p), ("omega_c", self.omega_c)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "Rabi amplitude must be finite and >= 0"));
            }
        }
        for (name, v) in [("delta_p", self.delta_p), ("delta_c", self.delta_c)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "detuning must be finite"));
            }
        }
        Ok(())
    }

    pub fn with_delta_p(self, delta_p: f64) -> Self {
        Self { delta_p, ..self }
    }

    pub fn with_omega_c(self, omega_c: f64) -> Self {
        Self { omega_c, ..self }
    }

    pub fn with_omega_p(self, omega_p: f64) -> Self {
        Self { omega_p, ..self }
    }

    /// True when `Ω_p < 0.1·(Γ_02/2 + γ_22)`.
    pub fn is_weak_probe(&self, params: &LambdaParams) -> bool {
        self.omega_p < 0.1 * params.gamma_02()
    }
}
