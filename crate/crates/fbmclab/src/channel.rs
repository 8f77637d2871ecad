//! Quasi-static Rayleigh MIMO multipath channel.
//!
//! A channel is a short list of matrix-valued taps `H_l = rho_l * Z_l` at
//! integer sample delays, constant over one block. Applying it is an exact
//! per-stream linear convolution with zero-padded history; the receiver's
//! one-tap equalizer sees it through the per-subcarrier frequency response
//! `C_n = sum_l H_l e^{-j 2 pi n d_l / N}`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::FbmcError;
use crate::linalg::CMat;
use crate::rng::{rng_for, Domain};
use crate::Result;

/// 3GPP EPA power-delay profile, shipped with the crate.
pub const EPA_PROFILE_TEXT: &str = include_str!("../data/epa_profile.txt");

/// Default sampling rate used when quantizing named profiles (LTE 1.4 MHz
/// numerology).
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 1.92e6;

/// Tapped-delay-line profile: integer sample delays with linear powers
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    /// Ascending sample delays; first entry is 0.
    pub delays: Vec<usize>,
    /// Per-tap linear power rho_l^2, summing to 1.
    pub powers: Vec<f64>,
    /// True when quantization collapsed every tap onto sample 0.
    pub is_flat: bool,
}

impl TapProfile {
    /// Single unit-power tap at delay 0.
    pub fn flat() -> Self {
        Self {
            delays: vec![0],
            powers: vec![1.0],
            is_flat: true,
        }
    }

    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Largest delay in samples.
    pub fn delay_spread(&self) -> usize {
        *self.delays.last().unwrap_or(&0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays.is_empty() || self.delays.len() != self.powers.len() {
            return Err(FbmcError::InvalidConfig("empty or ragged tap profile".into()));
        }
        if self.delays[0] != 0 {
            return Err(FbmcError::InvalidConfig("first tap delay must be 0".into()));
        }
        if !self.delays.windows(2).all(|w| w[0] < w[1]) {
            return Err(FbmcError::InvalidConfig(
                "tap delays must be strictly ascending".into(),
            ));
        }
        let total: f64 = self.powers.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(FbmcError::InvalidConfig(format!(
                "tap powers sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    /// Quantize a (delay_ns, power_db) table to a sample grid: taps landing
    /// on the same sample are power-combined, then the result is normalized.
    pub fn from_delay_power(delay_ns: &[f64], power_db: &[f64], sample_rate_hz: f64) -> Result<Self> {
        if sample_rate_hz <= 0.0 {
            return Err(FbmcError::InvalidConfig("sample rate must be positive".into()));
        }
        if delay_ns.is_empty() || delay_ns.len() != power_db.len() {
            return Err(FbmcError::InvalidConfig("empty or ragged delay/power table".into()));
        }
        let mut combined: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for (&d, &p) in delay_ns.iter().zip(power_db) {
            let sample = (d * 1e-9 * sample_rate_hz).round() as usize;
            *combined.entry(sample).or_insert(0.0) += 10f64.powf(p / 10.0);
        }
        let total: f64 = combined.values().sum();
        let mut delays = Vec::with_capacity(combined.len());
        let mut powers = Vec::with_capacity(combined.len());
        for (d, p) in combined {
            delays.push(d);
            powers.push(p / total);
        }
        if delays[0] != 0 {
            // reference the earliest arrival as delay zero
            let d0 = delays[0];
            for d in delays.iter_mut() {
                *d -= d0;
            }
        }
        let is_flat = delays.len() == 1;
        let profile = Self {
            delays,
            powers,
            is_flat,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Parse a two-column text file: `delay_ns power_db` per line, `#`
    /// comments allowed.
    pub fn from_text(text: &str, sample_rate_hz: f64) -> Result<Self> {
        let mut delays = Vec::new();
        let mut powers = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (d, p) = match (it.next(), it.next()) {
                (Some(d), Some(p)) => (d, p),
                _ => {
                    return Err(FbmcError::Format(format!(
                        "tap profile line {}: expected 'delay_ns power_db'",
                        lineno + 1
                    )))
                }
            };
            let d: f64 = d.parse().map_err(|_| {
                FbmcError::Format(format!("tap profile line {}: bad delay '{d}'", lineno + 1))
            })?;
            let p: f64 = p.parse().map_err(|_| {
                FbmcError::Format(format!("tap profile line {}: bad power '{p}'", lineno + 1))
            })?;
            delays.push(d);
            powers.push(p);
        }
        Self::from_delay_power(&delays, &powers, sample_rate_hz)
    }
}

/// Standard EPA profile quantized to the given sample rate.
pub fn epa_profile(sample_rate_hz: f64) -> Result<TapProfile> {
    TapProfile::from_text(EPA_PROFILE_TEXT, sample_rate_hz)
}

/// A drawn channel realization: taps plus the derived per-subcarrier
/// frequency response. Immutable once drawn.
#[derive(Debug, Clone)]
pub struct MimoChannel {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Sample delay of each tap.
    pub delays: Vec<usize>,
    /// H_l = rho_l Z_l, each n_rx x n_tx.
    pub taps: Vec<CMat>,
    /// C_n for n = 0..N-1, each n_rx x n_tx.
    pub freq: Vec<CMat>,
}

impl MimoChannel {
    /// Draw i.i.d. unit complex Gaussian entries, scale by rho_l, and derive
    /// the frequency response. Deterministic in (seed, trial).
    pub fn draw(
        profile: &TapProfile,
        n_tx: usize,
        n_rx: usize,
        n_subcarriers: usize,
        seed: u64,
        trial: u64,
    ) -> Result<Self> {
        profile.validate()?;
        let mut rng = rng_for(seed, Domain::Channel, trial);
        let mut taps = Vec::with_capacity(profile.len());
        for &p in &profile.powers {
            let rho = p.sqrt();
            let t = CMat::from_fn(n_rx, n_tx, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2 * rho
            });
            taps.push(t);
        }
        Self::from_taps(taps, profile.delays.clone(), n_subcarriers)
    }

    /// Build from explicit taps (test hook: e.g. identity taps give a flat
    /// channel with C_n = I).
    pub fn from_taps(taps: Vec<CMat>, delays: Vec<usize>, n_subcarriers: usize) -> Result<Self> {
        if taps.is_empty() || taps.len() != delays.len() {
            return Err(FbmcError::DimensionMismatch(
                "taps and delays must be non-empty and equal length".into(),
            ));
        }
        let n_rx = taps[0].rows;
        let n_tx = taps[0].cols;
        if n_subcarriers < 2 * (delays.last().unwrap() + 1) {
            return Err(FbmcError::InvalidConfig(format!(
                "need N >= 2 * channel length, got N={} delay spread {}",
                n_subcarriers,
                delays.last().unwrap()
            )));
        }
        let mut freq = Vec::with_capacity(n_subcarriers);
        for n in 0..n_subcarriers {
            let mut c = CMat::zeros(n_rx, n_tx);
            for (tap, &d) in taps.iter().zip(&delays) {
                let ang = -2.0 * std::f64::consts::PI * (n as f64) * (d as f64)
                    / n_subcarriers as f64;
                let ph = Complex64::new(ang.cos(), ang.sin());
                for r in 0..n_rx {
                    for cc in 0..n_tx {
                        c[(r, cc)] += tap[(r, cc)] * ph;
                    }
                }
            }
            freq.push(c);
        }
        Ok(Self {
            n_tx,
            n_rx,
            delays,
            taps,
            freq,
        })
    }

    /// Identity single-tap channel (N_t = N_r), useful for back-to-back runs.
    pub fn identity(n_antennas: usize, n_subcarriers: usize) -> Self {
        Self::from_taps(vec![CMat::eye(n_antennas)], vec![0], n_subcarriers)
            .expect("identity channel is always valid")
    }
}

/// Convolve per-antenna transmit streams with the channel and add complex
/// AWGN of per-sample variance `noise_power`.
///
/// `r_i[t] = sum_l sum_j H_l[i,j] x_j[t - d_l] + n_i[t]`, zero history.
pub fn apply_channel(
    tx_streams: &[Vec<Complex64>],
    channel: &MimoChannel,
    noise_power: f64,
    seed: u64,
    trial: u64,
) -> Result<Vec<Vec<Complex64>>> {
    if tx_streams.len() != channel.n_tx {
        return Err(FbmcError::DimensionMismatch(format!(
            "expected {} tx streams, got {}",
            channel.n_tx,
            tx_streams.len()
        )));
    }
    let len = tx_streams.first().map(|s| s.len()).unwrap_or(0);
    if tx_streams.iter().any(|s| s.len() != len) {
        return Err(FbmcError::DimensionMismatch(
            "tx streams must share one length".into(),
        ));
    }
    let mut rx = vec![vec![Complex64::new(0.0, 0.0); len]; channel.n_rx];
    for (tap, &d) in channel.taps.iter().zip(&channel.delays) {
        for i in 0..channel.n_rx {
            for (j, x) in tx_streams.iter().enumerate() {
                let h = tap[(i, j)];
                if h.norm_sqr() == 0.0 {
                    continue;
                }
                for t in d..len {
                    rx[i][t] += h * x[t - d];
                }
            }
        }
    }
    if noise_power > 0.0 {
        let mut rng = rng_for(seed, Domain::Noise, trial);
        let s = (noise_power / 2.0).sqrt();
        for stream in rx.iter_mut() {
            for v in stream.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v += Complex64::new(re * s, im * s);
            }
        }
    }
    Ok(rx)
}
