use super::SolverError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mixing {
    Linear,
    Anderson { depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Wavefunction cutoff (hartree).
    pub ecutwfc: f64,
    /// Density cutoff (hartree).
    pub ecutrho: f64,
    /// Convergence threshold on the SCF accuracy (hartree).
    pub conv_thr: f64,
    pub max_iter: usize,
    pub mix_alpha: f64,
    pub mixing: Mixing,
    /// Slater exchange on/off.
    #[serde(default = "yes")]
    pub exchange: bool,
    /// Empty bands solved above the occupied manifold.
    #[serde(default = "one")]
    pub extra_bands: usize,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            ecutwfc: 8.0,
            ecutrho: 32.0,
            conv_thr: 1e-9,
            max_iter: 200,
            mix_alpha: 0.3,
            mixing: Mixing::Linear,
            exchange: true,
            extra_bands: 1,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: &str| Err(SolverError::InvalidParams(m.to_string()));
        if !(self.ecutwfc > 0.0) {
            return fail("ecutwfc must be positive");
        }
        if !(self.ecutrho >= 4.0 * self.ecutwfc) {
            return fail("ecutrho must be at least 4·ecutwfc");
        }
        if !(self.conv_thr > 0.0) {
            return fail("conv_thr must be positive");
        }
        if self.max_iter == 0 {
            return fail("max_iter must be at least 1");
        }
        if !(self.mix_alpha > 0.0 && self.mix_alpha <= 1.0) {
            return fail("mix_alpha must lie in (0, 1]");
        }
        if let Mixing::Anderson { depth } = self.mixing {
            if depth == 0 {
                return fail("anderson depth must be at least 1");
            }
        }
        Ok(())
    }
}
