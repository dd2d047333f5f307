use crate::error::SolverError;

/// Scale factor on the `(p2 - p1) / 2` term of the crossover.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OmegaEta {
    /// `sum_i m / |x_p^i - w^i|`, each distance floored at `1e-10` times the
    /// variable's range.
    AsPrinted,
    /// `(1/m) sum_i |x_p^i - w^i|`.
    MeanAbsDistance,
    /// A fresh draw from `N(0, sigma^2)` for every child.
    Gaussian { sigma: f64 },
}

impl Default for OmegaEta {
    fn default() -> Self {
        OmegaEta::Gaussian { sigma: 1.0 }
    }
}

/// What happens to a crossover coordinate that leaves its interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundHandling {
    /// Snap to the nearest bound.
    Clamp,
    /// Uniform draw between the parent coordinate and the violated bound.
    #[default]
    Resample,
}

/// How per-variable variance ratios are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlphaMode {
    /// Mean of the ratios, so a fresh population has alpha = 1.
    #[default]
    Normalized,
    /// Plain sum of the ratios.
    RawSum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct GAConfig {
    pub upper_pop: usize,
    pub lower_pop: usize,
    pub mu: usize,
    pub lambda: usize,
    pub r_repl: usize,
    pub p_cross: f64,
    pub p_mut: f64,
    pub eta_m: f64,
    pub omega_xi: f64,
    pub omega_eta: OmegaEta,
    pub alpha_mode: AlphaMode,
    pub bounds: BoundHandling,
    pub alpha_stop_upper: f64,
    pub alpha_stop_lower: f64,
    pub max_ll_calls: u64,
    pub max_ll_evals: u64,
    pub max_ul_gens: u64,
    /// Generation cap for a single lower-level run.
    pub max_lower_gens: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            upper_pop: 30,
            lower_pop: 30,
            mu: 3,
            lambda: 3,
            r_repl: 2,
            p_cross: 0.9,
            p_mut: 0.1,
            eta_m: 20.0,
            omega_xi: 0.1,
            omega_eta: OmegaEta::default(),
            alpha_mode: AlphaMode::default(),
            bounds: BoundHandling::default(),
            alpha_stop_upper: 1e-4,
            alpha_stop_lower: 1e-5,
            max_ll_calls: 10_000,
            max_ll_evals: 25_000_000,
            max_ul_gens: 5_000,
            max_lower_gens: 5_000,
        }
    }
}

impl GAConfig {
    /// Default settings with both population sizes set to `pop`.
    pub fn with_population(pop: usize) -> Self {
        Self { upper_pop: pop, lower_pop: pop, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.mu < 3 {
            return Err(SolverError::Config("mu must be at least 3"));
        }
        if self.lambda == 0 {
            return Err(SolverError::Config("lambda must be positive"));
        }
        if 2 * self.mu > self.upper_pop || 2 * self.mu > self.lower_pop {
            return Err(SolverError::Config("populations must hold at least 2 mu members"));
        }
        if self.r_repl == 0 || self.r_repl > self.upper_pop || self.r_repl > self.lower_pop {
            return Err(SolverError::Config("r_repl must lie in 1..=population"));
        }
        if !(0.0..=1.0).contains(&self.p_cross) || !(0.0..=1.0).contains(&self.p_mut) {
            return Err(SolverError::Config("probabilities must lie in [0, 1]"));
        }
        if !(self.eta_m >= 0.0) {
            return Err(SolverError::Config("eta_m must be non-negative"));
        }
        if let OmegaEta::Gaussian { sigma } = self.omega_eta {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(SolverError::Config("sigma must be finite and non-negative"));
            }
        }
        if !self.omega_xi.is_finite() {
            return Err(SolverError::Config("omega_xi must be finite"));
        }
        if !(self.alpha_stop_upper > 0.0) || !(self.alpha_stop_lower > 0.0) {
            return Err(SolverError::Config("alpha thresholds must be positive"));
        }
        if self.max_lower_gens == 0 {
            return Err(SolverError::Config("max_lower_gens must be positive"));
        }
        Ok(())
    }
}
