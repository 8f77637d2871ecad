//! Scenario configuration.
//!
//! A scenario is fully described by `FbmcConfig`; the CLI loads it from a
//! TOML file (key = value entries grouped in sections, schema below) and
//! every library entry point takes it by reference.
//!
//! ```toml
//! [grid]
//! n_subcarriers = 64     # N, power of two
//! block_len     = 8      # M, FBMC symbols per block
//! overlap       = 6      # K, filter overlapping factor
//!
//! [antennas]
//! n_tx = 2
//! n_rx = 2
//!
//! [truncation]
//! cut_front = 3          # i_F, leading filter-tail symbols removed
//! cut_rear  = 2          # i_R, trailing filter-tail symbols removed
//!
//! [modulation]
//! order        = "qpsk"  # qpsk | 16qam | 64qam
//! symbol_power = 1.0     # delta^2
//!
//! [equalizer]
//! kind        = "mmse"   # zf | mmse
//! noise_power = 0.0      # sigma^2 per complex sample
//!
//! [run]
//! seed = 1
//! ```

use serde::{Deserialize, Serialize};

use crate::error::FbmcError;
use crate::Result;

/// Supported square-QAM constellations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "64qam")]
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
        }
    }
}

impl std::str::FromStr for Modulation {
    type Err = FbmcError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" => Ok(Modulation::Qpsk),
            "16qam" => Ok(Modulation::Qam16),
            "64qam" => Ok(Modulation::Qam64),
            other => Err(FbmcError::InvalidConfig(format!(
                "unknown modulation '{other}'"
            ))),
        }
    }
}

/// One-tap equalizer flavor (the `nu` switch: 0 = ZF, 1 = MMSE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equalizer {
    Zf,
    Mmse,
}

impl Equalizer {
    pub fn nu(self) -> f64 {
        match self {
            Equalizer::Zf => 0.0,
            Equalizer::Mmse => 1.0,
        }
    }
}

impl std::str::FromStr for Equalizer {
    type Err = FbmcError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(Equalizer::Zf),
            "mmse" => Ok(Equalizer::Mmse),
            other => Err(FbmcError::InvalidConfig(format!(
                "unknown equalizer '{other}'"
            ))),
        }
    }
}

/// All scenario parameters. Immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmcConfig {
    /// Subcarrier count N (power of two).
    pub n_subcarriers: usize,
    /// FBMC symbols per block, M.
    pub block_len: usize,
    /// Filter overlapping factor K (filter length is K*N).
    pub overlap: usize,
    /// Transmit antennas.
    pub n_tx: usize,
    /// Receive antennas (>= n_tx).
    pub n_rx: usize,
    /// Leading filter-tail symbols removed, i_F.
    pub cut_front: usize,
    /// Trailing filter-tail symbols removed, i_R.
    pub cut_rear: usize,
    pub modulation: Modulation,
    pub equalizer: Equalizer,
    /// Average QAM symbol power, delta^2.
    pub symbol_power: f64,
    /// Complex noise variance per received sample, sigma^2.
    pub noise_power: f64,
    pub seed: u64,
}

impl FbmcConfig {
    /// Validate the invariants the rest of the crate relies on.
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 2 || !self.n_subcarriers.is_power_of_two() {
            return Err(FbmcError::InvalidConfig(format!(
                "n_subcarriers must be a power of two >= 2, got {}",
                self.n_subcarriers
            )));
        }
        if self.block_len == 0 {
            return Err(FbmcError::InvalidConfig("block_len must be >= 1".into()));
        }
        if self.overlap < 2 {
            return Err(FbmcError::InvalidConfig(format!(
                "overlap must be >= 2, got {}",
                self.overlap
            )));
        }
        if self.n_tx == 0 || self.n_rx == 0 || self.n_tx > self.n_rx {
            return Err(FbmcError::InvalidConfig(format!(
                "need 1 <= n_tx <= n_rx, got n_tx={} n_rx={}",
                self.n_tx, self.n_rx
            )));
        }
        if self.cut_front + self.cut_rear > self.overlap - 1 {
            return Err(FbmcError::TruncationTooDeep {
                cut_front: self.cut_front,
                cut_rear: self.cut_rear,
                max: self.overlap - 1,
            });
        }
        if !(self.symbol_power > 0.0) {
            return Err(FbmcError::InvalidConfig(
                "symbol_power must be positive".into(),
            ));
        }
        if self.noise_power < 0.0 {
            return Err(FbmcError::InvalidConfig(
                "noise_power must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Block rows kept after truncation: K + M - 1 - i_F - i_R.
    pub fn output_symbols(&self) -> usize {
        self.overlap + self.block_len - 1 - self.cut_front - self.cut_rear
    }

    /// Time-domain samples per transmit stream.
    pub fn samples_per_stream(&self) -> usize {
        self.output_symbols() * self.n_subcarriers
    }

    /// QAM symbols per block (N * N_t * M).
    pub fn symbols_per_block(&self) -> usize {
        self.n_subcarriers * self.n_tx * self.block_len
    }

    /// Payload bits per block.
    pub fn bits_per_block(&self) -> usize {
        self.symbols_per_block() * self.modulation.bits_per_symbol()
    }

    /// Copy with a different truncation pair (validated).
    pub fn with_truncation(&self, cut_front: usize, cut_rear: usize) -> Result<Self> {
        let mut c = self.clone();
        c.cut_front = cut_front;
        c.cut_rear = cut_rear;
        c.validate()?;
        Ok(c)
    }

    /// Parse the TOML scenario file format.
    pub fn from_toml_str(text: &str, path: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(1);
            FbmcError::ConfigParse {
                path: path.to_string(),
                line,
                msg: e.message().to_string(),
            }
        })?;
        let cfg = raw.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Emit the TOML scenario file representation.
    pub fn to_toml_string(&self) -> String {
        format!(
            "[grid]\n\
             n_subcarriers = {}\n\
             block_len = {}\n\
             overlap = {}\n\n\
             [antennas]\n\
             n_tx = {}\n\
             n_rx = {}\n\n\
             [truncation]\n\
             cut_front = {}\n\
             cut_rear = {}\n\n\
             [modulation]\n\
             order = \"{}\"\n\
             symbol_power = {}\n\n\
             [equalizer]\n\
             kind = \"{}\"\n\
             noise_power = {}\n\n\
             [run]\n\
             seed = {}\n",
            self.n_subcarriers,
            self.block_len,
            self.overlap,
            self.n_tx,
            self.n_rx,
            self.cut_front,
            self.cut_rear,
            self.modulation.name(),
            self.symbol_power,
            match self.equalizer {
                Equalizer::Zf => "zf",
                Equalizer::Mmse => "mmse",
            },
            self.noise_power,
            self.seed,
        )
    }
}

impl Default for FbmcConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 64,
            block_len: 8,
            overlap: 6,
            n_tx: 2,
            n_rx: 2,
            cut_front: 0,
            cut_rear: 0,
            modulation: Modulation::Qpsk,
            equalizer: Equalizer::Mmse,
            symbol_power: 1.0,
            noise_power: 0.0,
            seed: 1,
        }
    }
}

#[derive(Deserialize)]
struct RawConfig {
    grid: RawGrid,
    antennas: Option<RawAntennas>,
    truncation: Option<RawTruncation>,
    modulation: Option<RawModulation>,
    equalizer: Option<RawEqualizer>,
    run: Option<RawRun>,
}

#[derive(Deserialize)]
struct RawGrid {
    n_subcarriers: usize,
    block_len: usize,
    overlap: usize,
}

#[derive(Deserialize)]
struct RawAntennas {
    n_tx: usize,
    n_rx: usize,
}

#[derive(Deserialize)]
struct RawTruncation {
    cut_front: usize,
    cut_rear: usize,
}

#[derive(Deserialize)]
struct RawModulation {
    order: String,
    symbol_power: Option<f64>,
}

#[derive(Deserialize)]
struct RawEqualizer {
    kind: String,
    noise_power: Option<f64>,
}

#[derive(Deserialize)]
struct RawRun {
    seed: Option<u64>,
}

impl RawConfig {
    fn into_config(self) -> Result<FbmcConfig> {
        let d = FbmcConfig::default();
        let ant = self.antennas.unwrap_or(RawAntennas { n_tx: d.n_tx, n_rx: d.n_rx });
        let tr = self
            .truncation
            .unwrap_or(RawTruncation { cut_front: d.cut_front, cut_rear: d.cut_rear });
        let (modulation, symbol_power) = match self.modulation {
            Some(m) => (m.order.parse()?, m.symbol_power.unwrap_or(d.symbol_power)),
            None => (d.modulation, d.symbol_power),
        };
        let (equalizer, noise_power) = match self.equalizer {
            Some(e) => (e.kind.parse()?, e.noise_power.unwrap_or(d.noise_power)),
            None => (d.equalizer, d.noise_power),
        };
        Ok(FbmcConfig {
            n_subcarriers: self.grid.n_subcarriers,
            block_len: self.grid.block_len,
            overlap: self.grid.overlap,
            n_tx: ant.n_tx,
            n_rx: ant.n_rx,
            cut_front: tr.cut_front,
            cut_rear: tr.cut_rear,
            modulation,
            equalizer,
            symbol_power,
            noise_power,
            seed: self.run.and_then(|r| r.seed).unwrap_or(d.seed),
        })
    }
}
