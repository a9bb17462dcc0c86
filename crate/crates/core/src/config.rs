//! Flat `key = value` configuration with `#` comments.

use crate::controller::{ControllerParams, MappingPolicy, RowPolicy};
use crate::dram::{Geometry, Mode, TimingParams};
use crate::engine::CoreParams;
use crate::error::ConfigError;
use crate::stats::EnergyParams;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub geometry: Geometry,
    pub timing: TimingParams,
    pub mode: Mode,
    pub mapping: MappingPolicy,
    pub row_policy: RowPolicy,
    pub controller: ControllerParams,
    pub core: CoreParams,
    pub energy: EnergyParams,
    /// Keep every issued command in the result.
    pub record_commands: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry::default(),
            timing: TimingParams::default(),
            mode: Mode::Baseline,
            mapping: MappingPolicy::default(),
            row_policy: RowPolicy::default(),
            controller: ControllerParams::default(),
            core: CoreParams::default(),
            energy: EnergyParams::default(),
            record_commands: false,
        }
    }
}

/// Every key accepted by [`SimConfig::set`].
pub const KEYS: &[&str] = &[
    "mode",
    "mapping",
    "row_policy",
    "channels",
    "ranks",
    "banks",
    "subarrays",
    "rows_per_subarray",
    "columns_per_row",
    "bytes_per_column",
    "tRCD",
    "tRP",
    "tRAS",
    "tCL",
    "tCWL",
    "tBL",
    "tRTP",
    "tWR",
    "tCCD",
    "tRRD",
    "tFAW",
    "tWTR",
    "tRTW",
    "tPA",
    "tSCD",
    "act_window_same_bank",
    "queue_depth",
    "hit_cap",
    "max_overlapped_acts",
    "window_size",
    "core_width",
    "max_outstanding_reads",
    "cpu_clock_ratio",
    "e_act",
    "e_pre",
    "e_rd",
    "e_wr",
    "e_sa_sel",
    "p_background",
    "p_extra_per_activated_subarray",
    "clock_period",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::invalid(key, format!("cannot parse `{value}`")))
}

/// `none`, `unlimited` or a count.
fn parse_limit(key: &str, value: &str) -> Result<Option<usize>, ConfigError> {
    match value {
        "none" | "unlimited" | "default" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl SimConfig {
    /// Sets one key. Geometry keys accept the long field names as aliases;
    /// timing keys are case-insensitive and may be written `t_rcd`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let canonical = key.trim().to_ascii_lowercase().replace('_', "");
        let g = &mut self.geometry;
        let t = &mut self.timing;
        let e = &mut self.energy;
        match canonical.as_str() {
            "mode" => self.mode = value.parse()?,
            "mapping" | "mappingpolicy" => self.mapping = value.parse()?,
            "rowpolicy" => self.row_policy = value.parse()?,
            "channels" => g.channels = parse(key, value)?,
            "ranks" | "rankspercchannel" | "ranksperchannel" => g.ranks_per_channel = parse(key, value)?,
            "banks" | "banksperrank" => g.banks_per_rank = parse(key, value)?,
            "subarrays" | "subarraysperbank" => g.subarrays_per_bank = parse(key, value)?,
            "rowspersubarray" => g.rows_per_subarray = parse(key, value)?,
            "columnsperrow" | "columns" => g.columns_per_row = parse(key, value)?,
            "bytespercolumn" => g.bytes_per_column = parse(key, value)?,
            "trcd" => t.t_rcd = parse(key, value)?,
            "trp" => t.t_rp = parse(key, value)?,
            "tras" => t.t_ras = parse(key, value)?,
            "tcl" => t.t_cl = parse(key, value)?,
            "tcwl" => t.t_cwl = parse(key, value)?,
            "tbl" => t.t_bl = parse(key, value)?,
            "trtp" => t.t_rtp = parse(key, value)?,
            "twr" => t.t_wr = parse(key, value)?,
            "tccd" => t.t_ccd = parse(key, value)?,
            "trrd" => t.t_rrd = parse(key, value)?,
            "tfaw" => t.t_faw = parse(key, value)?,
            "twtr" => t.t_wtr = parse(key, value)?,
            "trtw" => t.t_rtw = parse(key, value)?,
            "tpa" => t.t_pa = parse(key, value)?,
            "tscd" => t.t_scd = parse(key, value)?,
            "actwindowsamebank" => t.act_window_same_bank = parse(key, value)?,
            "queuedepth" => self.controller.queue_depth = parse(key, value)?,
            "hitcap" => self.controller.hit_cap = parse_limit(key, value)?,
            "maxoverlappedacts" => self.controller.max_overlapped_acts = parse_limit(key, value)?,
            "windowsize" => self.core.window_size = parse(key, value)?,
            "corewidth" => self.core.width = parse(key, value)?,
            "maxoutstandingreads" => self.core.max_outstanding_reads = parse(key, value)?,
            "cpuclockratio" => self.core.cpu_clock_ratio = parse(key, value)?,
            "eact" => e.e_act = parse(key, value)?,
            "epre" => e.e_pre = parse(key, value)?,
            "erd" => e.e_rd = parse(key, value)?,
            "ewr" => e.e_wr = parse(key, value)?,
            "esasel" => e.e_sa_sel = parse(key, value)?,
            "pbackground" => e.p_background = parse(key, value)?,
            "pextraperactivatedsubarray" | "pextra" => e.p_extra_per_activated_subarray = parse(key, value)?,
            "clockperiod" => e.clock_period = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.trim().to_string())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    reason: format!("expected `key = value`, found `{line}`"),
                });
            };
            self.set(key, value).map_err(|e| ConfigError::Syntax { line: i + 1, reason: e.to_string() })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.validate()?;
        self.timing.validate()?;
        self.controller.validate()?;
        self.core.validate()?;
        self.energy.validate()
    }
}
