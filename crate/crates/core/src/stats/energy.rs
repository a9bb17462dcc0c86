use crate::engine::SimResult;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Energy per command, nJ.
    pub e_act: f64,
    /// Charged once per PRE or PRE_ALL.
    pub e_pre: f64,
    pub e_rd: f64,
    pub e_wr: f64,
    pub e_sa_sel: f64,
    /// Static power per rank, mW.
    pub p_background: f64,
    /// Power of each activated subarray beyond the first in a bank, mW.
    pub p_extra_per_activated_subarray: f64,
    /// DRAM command clock period, ns.
    pub clock_period: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            e_act: 2.0,
            e_pre: 1.5,
            e_rd: 1.2,
            e_wr: 1.3,
            e_sa_sel: 0.1,
            p_background: 60.0,
            p_extra_per_activated_subarray: 0.56,
            clock_period: 1.25,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [
            ("e_act", self.e_act),
            ("e_pre", self.e_pre),
            ("e_rd", self.e_rd),
            ("e_wr", self.e_wr),
            ("e_sa_sel", self.e_sa_sel),
            ("p_background", self.p_background),
            ("p_extra_per_activated_subarray", self.p_extra_per_activated_subarray),
            ("clock_period", self.clock_period),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(key, format!("{v} is not a finite non-negative number")));
            }
        }
        Ok(())
    }
}

/// Energy of one run in nJ, split by source.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energy {
    pub act: f64,
    pub pre: f64,
    pub rd: f64,
    pub wr: f64,
    pub sa_sel: f64,
    pub static_nj: f64,
}

impl Energy {
    pub fn dynamic_nj(&self) -> f64 {
        self.act + self.pre + self.rd + self.wr + self.sa_sel
    }

    pub fn total_nj(&self) -> f64 {
        self.dynamic_nj() + self.static_nj
    }
}

/// mW × ns is pJ.
const PJ_PER_NJ: f64 = 1000.0;

pub fn energy_of(result: &SimResult, p: &EnergyParams) -> Energy {
    let c = &result.commands;
    let ranks = result.geometry.total_ranks() as f64;
    let background = p.p_background * ranks * result.dram_cycles as f64;
    let extra = p.p_extra_per_activated_subarray * result.extra_activation_cycles as f64;
    Energy {
        act: c.act as f64 * p.e_act,
        pre: c.precharges() as f64 * p.e_pre,
        rd: c.rd as f64 * p.e_rd,
        wr: c.wr as f64 * p.e_wr,
        sa_sel: c.sa_sel as f64 * p.e_sa_sel,
        static_nj: (background + extra) * p.clock_period / PJ_PER_NJ,
    }
}
