use crate::dram::{Geometry, Mode};

/// Bits the controller spends tracking which rows are open.
///
/// MASA keeps, per subarray, an activated bit, a designated bit and the open
/// row tag; SALP-2 drops the designated bit. The subarray-oblivious modes
/// track one activated bit and a bank-wide row tag per bank.
pub fn controller_state_bits(geometry: &Geometry, mode: Mode) -> u64 {
    let g = geometry.for_mode(mode);
    let banks = g.total_banks() as u64;
    let subarrays = banks * g.subarrays_per_bank as u64;
    let local_tag = g.rows_per_subarray.trailing_zeros() as u64;
    let bank_tag = g.rows_per_bank().trailing_zeros() as u64;
    match mode {
        Mode::Masa => subarrays * (2 + local_tag),
        Mode::Salp2 => subarrays * (1 + local_tag),
        Mode::Baseline | Mode::Salp1 | Mode::Ideal => banks * (1 + bank_tag),
    }
}

pub fn controller_state_bytes(geometry: &Geometry, mode: Mode) -> u64 {
    controller_state_bits(geometry, mode).div_ceil(8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masa_at_eight_subarrays_fits_in_88_bytes() {
        let g = Geometry::default();
        assert_eq!(controller_state_bits(&g, Mode::Masa), 64 * 11);
        assert_eq!(controller_state_bytes(&g, Mode::Masa), 88);
    }

    #[test]
    fn baseline_tracks_banks_only() {
        let g = Geometry::default();
        assert_eq!(controller_state_bytes(&g, Mode::Baseline), 13);
        assert_eq!(controller_state_bytes(&g, Mode::Salp1), 13);
        assert_eq!(controller_state_bits(&g, Mode::Salp2), 64 * 10);
    }

    #[test]
    fn single_subarray_degenerates_to_per_bank_tracking() {
        let g = Geometry { subarrays_per_bank: 1, ..Geometry::default() };
        let banks = g.total_banks() as u64;
        let base = controller_state_bits(&g, Mode::Baseline);
        assert_eq!(controller_state_bits(&g, Mode::Salp2), base);
        assert_eq!(controller_state_bits(&g, Mode::Masa), base + banks);
        assert_eq!(controller_state_bits(&g, Mode::Ideal), base);
    }
}
