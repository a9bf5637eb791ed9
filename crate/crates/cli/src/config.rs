//! JSON config schemas for the subcommands.

use serde::Deserialize;
use wavepar_core::design::DesignSpec;
use wavepar_core::families::{PotentialFamily, Sign};
use wavepar_core::profile::PhaseProfile;

fn default_psi_nodes() -> usize {
    4096
}

fn default_periods() -> usize {
    1
}

fn default_one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopbandConfig {
    pub profile: PhaseProfile<f64>,
    #[serde(default = "default_psi_nodes")]
    pub psi_nodes: usize,
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// Index scale: n = scale * q.
    #[serde(default = "default_one")]
    pub scale: f64,
    /// Integration constants of the curve: psi0 (grid start), x0, and the
    /// complex amplitude w0 as [re, im].
    #[serde(default)]
    pub psi0: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_w0")]
    pub w0: (f64, f64),
}

fn default_w0() -> (f64, f64) {
    (1.0, 0.0)
}

/// Which C(psi) the transmission pipeline runs on.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CSpec {
    /// Constant C = c0, paired with its linear modulation G.
    Constant {
        c0: f64,
        #[serde(default = "default_one")]
        q0: f64,
        #[serde(default)]
        psi0: f64,
    },
    /// The zero-energy manifold C = +-1/2 sin 2(psi - psi0); needs a profile.
    Harmonic {
        branch: Sign,
        #[serde(default)]
        psi0: f64,
    },
    /// Numeric trajectory of the C-equation from initial data; needs a profile.
    Ode { c_init: f64, cdot_init: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionConfig {
    pub c_spec: CSpec,
    /// Required for the harmonic and ode kinds.
    #[serde(default)]
    pub profile: Option<PhaseProfile<f64>>,
    #[serde(default)]
    pub psi_span: Option<(f64, f64)>,
    #[serde(default = "default_psi_nodes")]
    pub psi_nodes: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: PotentialFamily<f64>,
    #[serde(default = "default_one")]
    pub q0: f64,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_psi_nodes")]
    pub psi_nodes: usize,
}

fn default_tol_nu() -> f64 {
    1e-6
}

fn default_tol_eta() -> f64 {
    1e-5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub profile: Option<PhaseProfile<f64>>,
    #[serde(default)]
    pub family: Option<PotentialFamily<f64>>,
    #[serde(default = "default_one")]
    pub q0: f64,
    #[serde(default = "default_psi_nodes")]
    pub psi_nodes: usize,
    /// Relative tolerance on nu vs ln|lambda_max| (stop band).
    #[serde(default = "default_tol_nu")]
    pub tolerance_nu: f64,
    /// Absolute tolerance on eta vs arccos(trace/2) (transmission band).
    #[serde(default = "default_tol_eta")]
    pub tolerance_eta: f64,
    /// Self-test knob: multiplies the reconstructed q(x) by
    /// 1 + q_perturbation * sin(3x) before the oracle run, so a nonzero
    /// value must make verification fail.
    #[serde(default)]
    pub q_perturbation: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub design: DesignSpec<f64>,
}
