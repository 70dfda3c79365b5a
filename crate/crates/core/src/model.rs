//! Kerr coupler Hamiltonian and reservoir channels.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, lift, HilbertSpec, Mode, OperatorMatrix, C64};

/// How the reservoir occupation `n̄` enters the channel rates of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThermalRates {
    /// Decay at `2γ(n̄+1)`, excitation at `2γn̄`; the mode relaxes to `⟨n⟩ = n̄`.
    #[default]
    Standard,
    /// Decay at `2γ + γn̄`, excitation at `γn̄`: the zero-temperature channel
    /// `√(2γ)·a` plus a thermal pair with prefactor `√(γn̄)` on `a` and `a†`.
    /// The mode relaxes to `⟨n⟩ = n̄/2`.
    Additive,
}

impl ThermalRates {
    /// `(decay, excitation)` rates for one mode.
    pub fn rates(self, gamma: f64, nbar: f64) -> (f64, f64) {
        match self {
            ThermalRates::Standard => (2.0 * gamma * (nbar + 1.0), 2.0 * gamma * nbar),
            ThermalRates::Additive => (gamma * (2.0 + nbar), gamma * nbar),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThermalRates::Standard => "standard",
            ThermalRates::Additive => "additive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(ThermalRates::Standard),
            "additive" => Some(ThermalRates::Additive),
            _ => None,
        }
    }
}

/// Physical parameters of the coupler and its reservoirs (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerParams {
    pub chi_a: f64,
    pub chi_b: f64,
    pub epsilon: C64,
    pub alpha: C64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub nbar_a: f64,
    pub nbar_b: f64,
    pub thermal_rates: ThermalRates,
}

impl CouplerParams {
    /// Symmetric coupler with `χ_a = χ_b = chi`, `ε = π/χ`, no drive and a
    /// zero-temperature bath of rate `gamma` on both modes.
    pub fn symmetric(chi: f64, gamma: f64) -> Self {
        Self {
            chi_a: chi,
            chi_b: chi,
            epsilon: C64::new(PI / chi, 0.0),
            alpha: C64::new(0.0, 0.0),
            gamma_a: gamma,
            gamma_b: gamma,
            nbar_a: 0.0,
            nbar_b: 0.0,
            thermal_rates: ThermalRates::default(),
        }
    }

    pub fn with_thermal(mut self, nbar_a: f64, nbar_b: f64) -> Self {
        self.nbar_a = nbar_a;
        self.nbar_b = nbar_b;
        self
    }

    pub fn with_rates(mut self, rates: ThermalRates) -> Self {
        self.thermal_rates = rates;
        self
    }

    pub fn with_drive(mut self, alpha: f64) -> Self {
        self.alpha = C64::new(alpha, 0.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("chi_a", self.chi_a),
            ("chi_b", self.chi_b),
            ("epsilon.re", self.epsilon.re),
            ("epsilon.im", self.epsilon.im),
            ("alpha.re", self.alpha.re),
            ("alpha.im", self.alpha.im),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
            }
        }
        let rates = [
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("nbar_a", self.nbar_a),
            ("nbar_b", self.nbar_b),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for CouplerParams {
    fn default() -> Self {
        Self::symmetric(25.0, 0.001)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    DecayA,
    DecayB,
    ExcitationA,
    ExcitationB,
}

#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub op: OperatorMatrix,
    pub channel: Channel,
    /// Prefactor already folded into `op`.
    pub prefactor: f64,
}

#[derive(Debug, Clone)]
pub struct ModelOperators {
    pub spec: HilbertSpec,
    pub hamiltonian: OperatorMatrix,
    pub collapse_ops: Vec<CollapseOp>,
}

impl ModelOperators {
    pub fn new(params: &CouplerParams, spec: &HilbertSpec) -> Result<Self> {
        Ok(Self {
            spec: *spec,
            hamiltonian: build_hamiltonian(params, spec)?,
            collapse_ops: build_collapse_ops(params, spec)?,
        })
    }
}

/// `H = χ_a/2 a†²a² + χ_b/2 b†²b² + ε a†²b² + ε* b†²a² + α a† + α* a`.
pub fn build_hamiltonian(params: &CouplerParams, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    params.validate()?;
    let a = lift(&annihilation(spec.dim_a)?, Mode::A, spec)?.entries;
    let b = lift(&annihilation(spec.dim_b)?, Mode::B, spec)?.entries;
    let ad = a.adjoint();
    let bd = b.adjoint();
    let a2 = &a * &a;
    let b2 = &b * &b;
    let ad2 = &ad * &ad;
    let bd2 = &bd * &bd;

    let kerr = (&ad2 * &a2) * C64::from(params.chi_a / 2.0) + (&bd2 * &b2) * C64::from(params.chi_b / 2.0);
    let pair = (&ad2 * &b2) * params.epsilon;
    let pair = &pair + pair.adjoint();
    let drive = &ad * params.alpha;
    let drive = &drive + drive.adjoint();

    Ok(OperatorMatrix::new(kerr + pair + drive, "H"))
}

/// Reservoir channels: a decay channel `√Γ↓·a` and an excitation channel
/// `√Γ↑·a†` per mode, with rates from [`ThermalRates`]. Channels with zero
/// prefactor are dropped.
pub fn build_collapse_ops(params: &CouplerParams, spec: &HilbertSpec) -> Result<Vec<CollapseOp>> {
    params.validate()?;
    let a = lift(&annihilation(spec.dim_a)?, Mode::A, spec)?;
    let b = lift(&annihilation(spec.dim_b)?, Mode::B, spec)?;
    let (down_a, up_a) = params.thermal_rates.rates(params.gamma_a, params.nbar_a);
    let (down_b, up_b) = params.thermal_rates.rates(params.gamma_b, params.nbar_b);
    let channels = [
        (Channel::DecayA, down_a, &a, false),
        (Channel::DecayB, down_b, &b, false),
        (Channel::ExcitationA, up_a, &a, true),
        (Channel::ExcitationB, up_b, &b, true),
    ];
    Ok(channels
        .into_iter()
        .filter(|(_, rate, _, _)| *rate > 0.0)
        .map(|(channel, rate, op, raise)| {
            let prefactor = rate.sqrt();
            let base = if raise { op.entries.adjoint() } else { op.entries.clone() };
            CollapseOp {
                op: OperatorMatrix::new(base * C64::from(prefactor), format!("{channel:?}")),
                channel,
                prefactor,
            }
        })
        .collect())
}
