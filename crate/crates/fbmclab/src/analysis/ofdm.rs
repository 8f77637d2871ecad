//! CP-OFDM MIMO baseline.
//!
//! A block of M OFDM symbols shares the scenario's QAM grid shape, channel
//! draws, and one-tap ZF/MMSE equalizer, so FBMC and OFDM comparisons are
//! paired sample by sample. The cyclic prefix makes the per-subcarrier
//! model exact whenever it covers the delay spread; the energy spent on the
//! prefix is charged to OFDM by scaling its noise power by (N + CP)/N in
//! the BER harness.

use num_complex::Complex64;

use crate::channel::{apply_channel, MimoChannel};
use crate::config::FbmcConfig;
use crate::error::FbmcError;
use crate::fft::UnitaryDft;
use crate::qam::SymbolGrid;
use crate::transceiver::{build_equalizer, equalize};
use crate::Result;

#[derive(Debug, Clone, Copy)]
pub struct OfdmParams {
    pub cp_len: usize,
}

impl OfdmParams {
    /// Classic 1/8 guard fraction.
    pub fn default_for(n_subcarriers: usize) -> Self {
        Self {
            cp_len: (n_subcarriers / 8).max(1),
        }
    }
}

/// Run one CP-OFDM block through the channel and equalizer.
///
/// Returns the equalized symbol grid and a flag that is true when the CP was
/// shorter than the channel delay spread (inter-symbol interference present
/// by construction).
pub fn ofdm_block_chain(
    grid: &SymbolGrid,
    channel: &MimoChannel,
    params: OfdmParams,
    config: &FbmcConfig,
    noise_power: f64,
    noise_trial: u64,
) -> Result<(SymbolGrid, bool)> {
    let n = grid.n_subcarriers;
    let n_tx = grid.n_tx;
    let m_blocks = grid.block_len;
    if channel.n_tx != n_tx {
        return Err(FbmcError::DimensionMismatch(
            "channel/grid antenna mismatch".into(),
        ));
    }
    let cp = params.cp_len;
    let cp_short = cp < channel.delays.last().copied().unwrap_or(0);
    let dft = UnitaryDft::new(n);
    let sym_len = n + cp;

    // TX: per stream, per symbol: unitary IDFT then cyclic prefix
    let mut tx = vec![Vec::with_capacity(m_blocks * sym_len); n_tx];
    for m in 0..m_blocks {
        for (j, stream) in tx.iter_mut().enumerate() {
            let mut buf: Vec<Complex64> =
                (0..n).map(|nn| grid.entry(m, nn, j)).collect();
            dft.inverse(&mut buf);
            stream.extend_from_slice(&buf[n - cp..]);
            stream.extend_from_slice(&buf);
        }
    }
    let rx = apply_channel(&tx, channel, noise_power, config.seed, noise_trial)?;

    // RX: drop CP, unitary DFT, one-tap equalizer
    let eqs = build_equalizer(channel, noise_power, config.symbol_power, config.equalizer)?;
    let n_rx = channel.n_rx;
    let mut out = SymbolGrid::zeros(n, n_tx, m_blocks);
    let mut y = vec![Complex64::new(0.0, 0.0); n * n_rx];
    for m in 0..m_blocks {
        for (i, stream) in rx.iter().enumerate() {
            let start = m * sym_len + cp;
            let mut buf: Vec<Complex64> = stream[start..start + n].to_vec();
            dft.forward(&mut buf);
            for nn in 0..n {
                y[nn * n_rx + i] = buf[nn];
            }
        }
        let u = equalize(&y, &eqs);
        for nn in 0..n {
            for j in 0..n_tx {
                *out.entry_mut(m, nn, j) = u[nn * n_tx + j];
            }
        }
    }
    Ok((out, cp_short))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::TapProfile;
    use crate::config::Modulation;
    use crate::qam::random_grid;

    #[test]
    fn flat_channel_noiseless_is_exact() {
        let config = FbmcConfig {
            n_subcarriers: 16,
            block_len: 3,
            ..FbmcConfig::default()
        };
        let grid = random_grid(Modulation::Qam16, 16, 2, 3, 1.0, 7, 0);
        let ch = MimoChannel::identity(2, 16);
        let (out, short) =
            ofdm_block_chain(&grid, &ch, OfdmParams::default_for(16), &config, 0.0, 0).unwrap();
        assert!(!short);
        let worst = out
            .data
            .iter()
            .zip(&grid.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn multipath_with_cp_is_exact_under_zf() {
        let mut config = FbmcConfig {
            n_subcarriers: 16,
            block_len: 4,
            ..FbmcConfig::default()
        };
        config.equalizer = crate::config::Equalizer::Zf;
        let p = TapProfile {
            delays: vec![0, 1, 2],
            powers: vec![0.6, 0.3, 0.1],
            is_flat: false,
        };
        let ch = MimoChannel::draw(&p, 2, 2, 16, 13, 0).unwrap();
        let grid = random_grid(Modulation::Qpsk, 16, 2, 4, 1.0, 8, 0);
        let (out, short) =
            ofdm_block_chain(&grid, &ch, OfdmParams { cp_len: 4 }, &config, 0.0, 0).unwrap();
        assert!(!short);
        let worst = out
            .data
            .iter()
            .zip(&grid.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-9, "worst {worst}");
    }

    #[test]
    fn short_cp_flagged() {
        let config = FbmcConfig {
            n_subcarriers: 16,
            block_len: 2,
            ..FbmcConfig::default()
        };
        let p = TapProfile {
            delays: vec![0, 3],
            powers: vec![0.9, 0.1],
            is_flat: false,
        };
        let ch = MimoChannel::draw(&p, 2, 2, 16, 14, 0).unwrap();
        let grid = random_grid(Modulation::Qpsk, 16, 2, 2, 1.0, 9, 0);
        let (_, short) =
            ofdm_block_chain(&grid, &ch, OfdmParams { cp_len: 1 }, &config, 0.0, 0).unwrap();
        assert!(short);
    }
}
