//! Seeded Monte-Carlo BER harness.
//!
//! Every (SNR point, trial) pair derives its own channel, payload, and
//! noise streams from the scenario seed, so all schemes at a point consume
//! identical channel realizations and payload bits (paired comparison), the
//! error totals are independent of scheduling, and two runs with the same
//! configuration emit byte-identical results. Trials run in fixed-size
//! batches until the target error count or the trial cap is reached; the
//! batch size is a constant so the stopping point never depends on the
//! worker-thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::cases::{truncation_case, TruncationCase};
use crate::analysis::convcode;
use crate::analysis::ofdm::{ofdm_block_chain, OfdmParams};
use crate::channel::{MimoChannel, TapProfile};
use crate::compensation::{build_compensation, compensate_block, CompensationMode, CompensationSet};
use crate::config::FbmcConfig;
use crate::prototype::PrototypeFilter;
use crate::qam::{demap_qam, map_qam, random_bits, split_oqam};
use crate::transceiver::run_chain;
use crate::Result;

/// Fixed trial batch between convergence checks (thread-count independent).
const BATCH: u64 = 32;

/// One scheme of the BER study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Fbmc {
        case: TruncationCase,
        compensate: Option<CompensationMode>,
    },
    Ofdm,
}

impl Scheme {
    pub fn tag(&self) -> String {
        match self {
            Scheme::Fbmc { case, compensate } => match compensate {
                None => case.name().to_string(),
                Some(CompensationMode::Genie) => format!("{}_comp_genie", case.name()),
                Some(CompensationMode::DecisionDirected) => {
                    format!("{}_comp_dd", case.name())
                }
            },
            Scheme::Ofdm => "ofdm".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BerPoint {
    pub scheme: String,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// 95% Wilson interval.
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// False when the trial cap was hit before `min_errors`.
    pub converged: bool,
    /// True when the OFDM cyclic prefix was shorter than the delay spread.
    pub cp_warning: bool,
}

#[derive(Debug, Clone)]
pub struct BerOptions {
    pub min_errors: u64,
    pub max_trials: u64,
    /// Rate-1/2 convolutional coding with hard Viterbi decoding.
    pub coded: bool,
    /// OFDM cyclic-prefix length (default N/8).
    pub cp_len: Option<usize>,
}

impl Default for BerOptions {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_trials: 20_000,
            coded: false,
            cp_len: None,
        }
    }
}

/// Wilson 95% score interval for k errors in n bits.
pub fn wilson_interval(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = bits as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn noise_power_for(config: &FbmcConfig, ebn0_db: f64, code_rate: f64) -> f64 {
    let bps = config.modulation.bits_per_symbol() as f64;
    config.symbol_power / (10f64.powf(ebn0_db / 10.0) * bps * code_rate)
}

struct SchemeRuntime {
    scheme: Scheme,
    config: FbmcConfig,
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Run the BER study over an ascending Eb/N0 grid.
pub fn ber_curve(
    config: &FbmcConfig,
    filter: &PrototypeFilter,
    profile: &TapProfile,
    schemes: &[Scheme],
    snr_grid_db: &[f64],
    opts: &BerOptions,
) -> Result<Vec<BerPoint>> {
    config.validate()?;
    let cp = opts
        .cp_len
        .unwrap_or_else(|| OfdmParams::default_for(config.n_subcarriers).cp_len);
    let coded_bits = config.bits_per_block();
    let info_bits = if opts.coded {
        coded_bits / 2 - convcode::TAIL_BITS
    } else {
        coded_bits
    };
    let code_rate = info_bits as f64 / coded_bits as f64;

    let mut runtimes = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let rt = match scheme {
            Scheme::Fbmc { case, .. } => {
                let (cf, cr) = truncation_case(config.overlap, case)?;
                SchemeRuntime {
                    scheme,
                    config: config.with_truncation(cf, cr)?,
                }
            }
            Scheme::Ofdm => SchemeRuntime {
                scheme,
                config: config.clone(),
            },
        };
        runtimes.push(rt);
    }

    let mut out = Vec::new();
    for (p_idx, &ebn0) in snr_grid_db.iter().enumerate() {
        let sigma2 = noise_power_for(config, ebn0, code_rate);
        for rt in &runtimes {
            // compensation inverses are noise-aware, so build per point
            let comp: Option<(CompensationSet, CompensationMode)> = match rt.scheme {
                Scheme::Fbmc {
                    compensate: Some(mode),
                    ..
                } => {
                    let mut cfg = rt.config.clone();
                    cfg.noise_power = sigma2;
                    Some((build_compensation(filter, &cfg)?, mode))
                }
                _ => None,
            };
            let mut errors = 0u64;
            let mut bits = 0u64;
            let mut cp_warning = false;
            let mut trial = 0u64;
            while trial < opts.max_trials && errors < opts.min_errors {
                let batch_end = (trial + BATCH).min(opts.max_trials);
                let results: Vec<(u64, u64, bool)> = (trial..batch_end)
                    .into_par_iter()
                    .map(|t| {
                        run_trial(
                            config, filter, profile, rt, comp.as_ref(), sigma2, cp, info_bits,
                            opts.coded, p_idx as u64, t,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (e, b, warn) in results {
                    errors += e;
                    bits += b;
                    cp_warning |= warn;
                }
                trial = batch_end;
            }
            let ber = if bits > 0 {
                errors as f64 / bits as f64
            } else {
                0.0
            };
            let (lo, hi) = wilson_interval(errors, bits);
            out.push(BerPoint {
                scheme: rt.scheme.tag(),
                ebn0_db: ebn0,
                bits,
                errors,
                ber,
                wilson_low: lo,
                wilson_high: hi,
                converged: errors >= opts.min_errors,
                cp_warning,
            });
            eprintln!(
                "ber: {} @ {:.1} dB: {}/{} = {:.3e}{}",
                rt.scheme.tag(),
                ebn0,
                errors,
                bits,
                ber,
                if errors >= opts.min_errors { "" } else { " (under-converged)" }
            );
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    base: &FbmcConfig,
    filter: &PrototypeFilter,
    profile: &TapProfile,
    rt: &SchemeRuntime,
    comp: Option<&(CompensationSet, CompensationMode)>,
    sigma2: f64,
    cp: usize,
    info_bits: usize,
    coded: bool,
    point_idx: u64,
    trial: u64,
) -> Result<(u64, u64, bool)> {
    // one key per (point, trial); all schemes share it so channels and
    // payloads pair up
    let key = (point_idx << 40) | trial;
    let channel = MimoChannel::draw(
        profile,
        base.n_tx,
        base.n_rx,
        base.n_subcarriers,
        base.seed,
        key,
    )?;
    let payload = random_bits(info_bits, base.seed, key);
    let tx_bits = if coded {
        convcode::interleave(&convcode::encode(&payload))
    } else {
        payload.clone()
    };
    let grid = map_qam(
        &tx_bits,
        base.modulation,
        base.n_subcarriers,
        base.n_tx,
        base.block_len,
        base.symbol_power,
    )?;

    let (detected, cp_warning) = match rt.scheme {
        Scheme::Fbmc { .. } => {
            let mut cfg = rt.config.clone();
            cfg.noise_power = sigma2;
            let u = run_chain(&grid, filter, &cfg, &channel, key)?;
            let det = match comp {
                Some((set, mode)) => {
                    let truth = split_oqam(&grid);
                    compensate_block(
                        &u,
                        set,
                        *mode,
                        Some(&truth),
                        cfg.modulation,
                        cfg.symbol_power,
                    )?
                }
                None => u.detect(),
            };
            (det, false)
        }
        Scheme::Ofdm => {
            // cyclic-prefix energy is charged as an SNR penalty
            let scaled =
                sigma2 * (base.n_subcarriers + cp) as f64 / base.n_subcarriers as f64;
            let params = OfdmParams { cp_len: cp };
            let (det, warn) =
                ofdm_block_chain(&grid, &channel, params, &rt.config, scaled, key)?;
            (det, warn)
        }
    };
    let rx_coded = demap_qam(&detected, base.modulation, base.symbol_power);
    let rx_bits = if coded {
        convcode::decode(&convcode::deinterleave(&rx_coded))
    } else {
        rx_coded
    };
    Ok((
        count_errors(&payload, &rx_bits),
        info_bits as u64,
        cp_warning,
    ))
}

/// Log-linear interpolation of the Eb/N0 at which a scheme's curve crosses
/// `target` BER. Points must belong to one scheme, ascending in Eb/N0.
pub fn ebn0_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    let floor = |p: &BerPoint| {
        if p.errors == 0 {
            0.5 / p.bits.max(1) as f64
        } else {
            p.ber
        }
    };
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ba, bb) = (floor(a), floor(b));
        if ba >= target && target >= bb {
            if (ba - bb).abs() < f64::EPSILON {
                return Some(a.ebn0_db);
            }
            let f = (ba.log10() - target.log10()) / (ba.log10() - bb.log10());
            return Some(a.ebn0_db + f * (b.ebn0_db - a.ebn0_db));
        }
    }
    None
}
