use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;

use super::TraceEntry;
use crate::controller::{unmap_address, MappingPolicy};
use crate::dram::{Coord, Geometry};
use crate::error::ConfigError;

/// Knobs of the synthetic request generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub n_requests: usize,
    pub read_fraction: f64,
    /// Mean of the geometric instruction gap between requests.
    pub mean_inst_gap: f64,
    /// Probability that a request reuses the previous request's row.
    pub row_hit_prob: f64,
    /// Bank `k` (flat index) is drawn with weight `(k+1)^-(skew-1)`: 1 is
    /// uniform, infinity puts every request in bank 0.
    pub bank_skew: f64,
    /// A new row lands in a different subarray than the bank's previous one
    /// instead of the same subarray.
    pub subarray_spread: bool,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_requests: 10_000,
            read_fraction: 1.0,
            mean_inst_gap: 10.0,
            row_hit_prob: 0.0,
            bank_skew: 1.0,
            subarray_spread: true,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |key: &str, v: f64| match (0.0..=1.0).contains(&v) {
            true => Ok(()),
            false => Err(ConfigError::invalid(key, format!("{v} is not in [0, 1]"))),
        };
        if self.n_requests == 0 {
            return Err(ConfigError::invalid("n_requests", "must be at least 1"));
        }
        unit("read_fraction", self.read_fraction)?;
        unit("row_hit_prob", self.row_hit_prob)?;
        if !(self.mean_inst_gap.is_finite() && self.mean_inst_gap >= 0.0) {
            return Err(ConfigError::invalid("mean_inst_gap", "must be finite and non-negative"));
        }
        if self.bank_skew.is_nan() || self.bank_skew < 1.0 {
            return Err(ConfigError::invalid("bank_skew", "must be at least 1"));
        }
        Ok(())
    }

    /// One-line description recorded at the top of generated trace files.
    pub fn header(&self) -> String {
        format!(
            "synth n_requests={} read_fraction={} mean_inst_gap={} row_hit_prob={} bank_skew={} subarray_spread={} seed={}",
            self.n_requests,
            self.read_fraction,
            self.mean_inst_gap,
            self.row_hit_prob,
            self.bank_skew,
            self.subarray_spread,
            self.seed
        )
    }
}

fn bank_weights(banks: usize, skew: f64) -> Vec<f64> {
    if skew.is_infinite() {
        let mut w = vec![0.0; banks];
        w[0] = 1.0;
        return w;
    }
    (0..banks).map(|k| ((k + 1) as f64).powf(1.0 - skew)).collect()
}

/// Generates `p.n_requests` entries. Rows are picked in coordinate space and
/// encoded through the inverse address mapping, so bank and subarray
/// conflicts are exact.
pub fn synth_trace(
    p: &SynthParams,
    geometry: &Geometry,
    policy: MappingPolicy,
) -> Result<Vec<TraceEntry>, ConfigError> {
    p.validate()?;
    geometry.validate()?;
    let g = geometry;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let gap = Geometric::new(1.0 / (1.0 + p.mean_inst_gap)).expect("probability is in (0, 1]");
    let write = Bernoulli::new(1.0 - p.read_fraction).expect("validated");
    let reuse = Bernoulli::new(p.row_hit_prob).expect("validated");
    let bank_pick = WeightedIndex::new(bank_weights(g.total_banks(), p.bank_skew)).expect("weights are positive");

    let subarrays = g.subarrays_per_bank;
    let mut last_subarray: Vec<Option<usize>> = vec![None; g.total_banks()];
    let mut prev: Option<(usize, Coord)> = None;
    let mut out = Vec::with_capacity(p.n_requests);

    for _ in 0..p.n_requests {
        let inst_gap = gap.sample(&mut rng);
        let is_write = write.sample(&mut rng);
        let hit = reuse.sample(&mut rng);
        let (flat, mut coord) = match prev {
            Some((flat, c)) if hit => (flat, c),
            _ => {
                let flat = bank_pick.sample(&mut rng);
                let subarray = match last_subarray[flat] {
                    Some(s) if p.subarray_spread && subarrays > 1 => (s + rng.random_range(1..subarrays)) % subarrays,
                    Some(s) => s,
                    None => rng.random_range(0..subarrays),
                };
                let mut row = rng.random_range(0..g.rows_per_subarray);
                if let Some((pf, pc)) = prev {
                    if pf == flat && pc.subarray == subarray && pc.row == row && g.rows_per_subarray > 1 {
                        row = (row + rng.random_range(1..g.rows_per_subarray)) % g.rows_per_subarray;
                    }
                }
                let per_channel = g.banks_per_channel();
                let coord = Coord {
                    channel: flat / per_channel,
                    rank: flat % per_channel / g.banks_per_rank,
                    bank: flat % g.banks_per_rank,
                    subarray,
                    row,
                    column: 0,
                };
                (flat, coord)
            }
        };
        coord.column = rng.random_range(0..g.columns_per_row);
        last_subarray[flat] = Some(coord.subarray);
        prev = Some((flat, coord));
        out.push(TraceEntry { inst_gap, is_write, phys_addr: unmap_address(&coord, g, policy) });
    }
    Ok(out)
}
