//! Transmit and receive chains with one-tap ZF/MMSE equalization.
//!
//! Transmit: each branch grid column is phase-rotated, passed through the
//! unitary N-point IDFT, and pushed through its branch's synthesis matrix;
//! the two branch signals add into one time signal per antenna stream.
//! Receive: matched filters per branch, segmentation into M symbols, unitary
//! DFT, conjugate phase, then a per-subcarrier equalizer applied to the
//! length-N_r subcarrier vectors.

use num_complex::Complex64;

use crate::channel::{apply_channel, MimoChannel};
use crate::config::{Equalizer, FbmcConfig};
use crate::error::FbmcError;
use crate::fft::{phase_vector, UnitaryDft};
use crate::filterbank::{Branch, SynthesisMatrix};
use crate::linalg::CMat;
use crate::prototype::PrototypeFilter;
use crate::qam::{BranchGrid, SymbolGrid};
use crate::Result;

/// Per-antenna complex baseband streams of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub streams: Vec<Vec<Complex64>>,
}

impl TimeSignal {
    pub fn samples_per_stream(&self) -> usize {
        self.streams.first().map(|s| s.len()).unwrap_or(0)
    }
}

/// Matched-filter outputs before equalization: per symbol m, both branches,
/// flattened with layout `n * n_rx + i`.
#[derive(Debug, Clone)]
pub struct MatchedOutput {
    pub n_subcarriers: usize,
    pub n_rx: usize,
    pub x_bar: Vec<Vec<Complex64>>,
    pub x_til: Vec<Vec<Complex64>>,
}

/// Equalized per-symbol vectors for both branches, layout `n * n_tx + j`.
#[derive(Debug, Clone)]
pub struct EqualizedGrid {
    pub n_subcarriers: usize,
    pub n_tx: usize,
    pub block_len: usize,
    pub u_bar: Vec<Vec<Complex64>>,
    pub u_til: Vec<Vec<Complex64>>,
}

impl EqualizedGrid {
    /// Stream-j entries of the real-branch symbol m.
    pub fn stream_bar(&self, m: usize, j: usize) -> Vec<Complex64> {
        (0..self.n_subcarriers)
            .map(|n| self.u_bar[m][n * self.n_tx + j])
            .collect()
    }

    pub fn stream_til(&self, m: usize, j: usize) -> Vec<Complex64> {
        (0..self.n_subcarriers)
            .map(|n| self.u_til[m][n * self.n_tx + j])
            .collect()
    }

    /// Uncompensated detection: Re of the real branch plus j Im of the
    /// imaginary branch.
    pub fn detect(&self) -> SymbolGrid {
        let mut grid = SymbolGrid::zeros(self.n_subcarriers, self.n_tx, self.block_len);
        for m in 0..self.block_len {
            for idx in 0..self.n_subcarriers * self.n_tx {
                let n = idx / self.n_tx;
                let j = idx % self.n_tx;
                *grid.entry_mut(m, n, j) =
                    Complex64::new(self.u_bar[m][idx].re, self.u_til[m][idx].im);
            }
        }
        grid
    }
}

/// Run both branch synthesis chains and sum into the transmit signal.
pub fn transmit(
    branches: &BranchGrid,
    filter: &PrototypeFilter,
    config: &FbmcConfig,
) -> Result<TimeSignal> {
    if branches.n_subcarriers != config.n_subcarriers
        || branches.n_tx != config.n_tx
        || branches.block_len != config.block_len
    {
        return Err(FbmcError::DimensionMismatch(
            "branch grid shape does not match config".into(),
        ));
    }
    let n = config.n_subcarriers;
    let dft = UnitaryDft::new(n);
    let p_bar = SynthesisMatrix::new(
        filter,
        Branch::I,
        config.block_len,
        config.cut_front,
        config.cut_rear,
    )?;
    let p_til = SynthesisMatrix::new(
        filter,
        Branch::Q,
        config.block_len,
        config.cut_front,
        config.cut_rear,
    )?;
    let mut streams = Vec::with_capacity(config.n_tx);
    for j in 0..config.n_tx {
        let mut blocks_bar = Vec::with_capacity(config.block_len);
        let mut blocks_til = Vec::with_capacity(config.block_len);
        for m in 0..config.block_len {
            let phase = phase_vector(n, m);
            let s_re = branches.stream_re(m, j);
            let s_im = branches.stream_im(m, j);
            let mut b_bar: Vec<Complex64> =
                phase.iter().zip(&s_re).map(|(p, &s)| p * s).collect();
            // Q-branch phase is j times the I-branch phase
            let mut b_til: Vec<Complex64> = phase
                .iter()
                .zip(&s_im)
                .map(|(p, &s)| p * Complex64::new(0.0, s))
                .collect();
            dft.inverse(&mut b_bar);
            dft.inverse(&mut b_til);
            blocks_bar.push(b_bar);
            blocks_til.push(b_til);
        }
        let o_bar = p_bar.synthesize(&blocks_bar)?;
        let o_til = p_til.synthesize(&blocks_til)?;
        streams.push(o_bar.iter().zip(&o_til).map(|(a, b)| a + b).collect());
    }
    Ok(TimeSignal { streams })
}

/// Matched-filter both branches over all receive antennas and segment into
/// M per-symbol vectors.
pub fn receive_front(
    rx_streams: &[Vec<Complex64>],
    filter: &PrototypeFilter,
    config: &FbmcConfig,
) -> Result<MatchedOutput> {
    let n = config.n_subcarriers;
    let n_rx = rx_streams.len();
    let p_bar = SynthesisMatrix::new(
        filter,
        Branch::I,
        config.block_len,
        config.cut_front,
        config.cut_rear,
    )?;
    let p_til = SynthesisMatrix::new(
        filter,
        Branch::Q,
        config.block_len,
        config.cut_front,
        config.cut_rear,
    )?;
    for s in rx_streams {
        if s.len() != p_bar.rows() {
            return Err(FbmcError::DimensionMismatch(format!(
                "rx stream length {} != {}",
                s.len(),
                p_bar.rows()
            )));
        }
    }
    let mut x_bar = vec![vec![Complex64::new(0.0, 0.0); n * n_rx]; config.block_len];
    let mut x_til = x_bar.clone();
    for (i, stream) in rx_streams.iter().enumerate() {
        let seg_bar = p_bar.analyze(stream)?;
        let seg_til = p_til.analyze(stream)?;
        for m in 0..config.block_len {
            for t in 0..n {
                x_bar[m][t * n_rx + i] = seg_bar[m][t];
                x_til[m][t * n_rx + i] = seg_til[m][t];
            }
        }
    }
    Ok(MatchedOutput {
        n_subcarriers: n,
        n_rx,
        x_bar,
        x_til,
    })
}

/// Per-symbol demodulation: unitary DFT per antenna then the conjugate
/// phase rotation. Both branches use the I-branch conjugate phase; the Q
/// branch's factor j stays with its kernels so imaginary-part detection
/// recovers the Q symbols.
pub fn demod(x_m: &[Complex64], m: usize, n_rx: usize, dft: &UnitaryDft) -> Vec<Complex64> {
    let n = dft.len();
    debug_assert_eq!(x_m.len(), n * n_rx);
    let phase = phase_vector(n, m);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n_rx];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n_rx {
        for t in 0..n {
            buf[t] = x_m[t * n_rx + i];
        }
        dft.forward(&mut buf);
        for t in 0..n {
            out[t * n_rx + i] = phase[t].conj() * buf[t];
        }
    }
    out
}

/// Per-subcarrier one-tap equalizers `E_n = (C^H C + nu sigma^2/delta^2 I)^-1 C^H`.
///
/// The ZF case (nu = 0) is the left pseudo-inverse, defined for full column
/// rank; a rank-deficient subcarrier reports which one failed.
pub fn build_equalizer(
    channel: &MimoChannel,
    noise_power: f64,
    symbol_power: f64,
    kind: Equalizer,
) -> Result<Vec<CMat>> {
    let reg = kind.nu() * noise_power / symbol_power;
    let mut eqs = Vec::with_capacity(channel.freq.len());
    for (n, c) in channel.freq.iter().enumerate() {
        let ch = c.hermitian();
        let mut a = ch.matmul(c);
        for d in 0..a.rows {
            a[(d, d)] += Complex64::new(reg, 0.0);
        }
        let inv = a
            .inverse()
            .map_err(|_| FbmcError::SingularChannel { subcarrier: n })?;
        eqs.push(inv.matmul(&ch));
    }
    Ok(eqs)
}

/// Apply the per-subcarrier equalizers to one demodulated symbol vector
/// (layout `n * n_rx + i`), producing the `n * n_tx + j` layout.
pub fn equalize(y_m: &[Complex64], equalizers: &[CMat]) -> Vec<Complex64> {
    let n = equalizers.len();
    let n_rx = y_m.len() / n;
    let n_tx = equalizers[0].rows;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n_tx];
    for nn in 0..n {
        let y = &y_m[nn * n_rx..(nn + 1) * n_rx];
        let u = equalizers[nn].matvec(y);
        out[nn * n_tx..(nn + 1) * n_tx].copy_from_slice(&u);
    }
    out
}

/// Full link: transmit, channel, matched filter, demod, equalize.
pub fn run_chain(
    grid: &SymbolGrid,
    filter: &PrototypeFilter,
    config: &FbmcConfig,
    channel: &MimoChannel,
    noise_trial: u64,
) -> Result<EqualizedGrid> {
    let branches = crate::qam::split_oqam(grid);
    let tx = transmit(&branches, filter, config)?;
    let rx = apply_channel(
        &tx.streams,
        channel,
        config.noise_power,
        config.seed,
        noise_trial,
    )?;
    let matched = receive_front(&rx, filter, config)?;
    let eqs = build_equalizer(channel, config.noise_power, config.symbol_power, config.equalizer)?;
    let dft = UnitaryDft::new(config.n_subcarriers);
    let mut u_bar = Vec::with_capacity(config.block_len);
    let mut u_til = Vec::with_capacity(config.block_len);
    for m in 0..config.block_len {
        let y_bar = demod(&matched.x_bar[m], m, matched.n_rx, &dft);
        let y_til = demod(&matched.x_til[m], m, matched.n_rx, &dft);
        u_bar.push(equalize(&y_bar, &eqs));
        u_til.push(equalize(&y_til, &eqs));
    }
    Ok(EqualizedGrid {
        n_subcarriers: config.n_subcarriers,
        n_tx: config.n_tx,
        block_len: config.block_len,
        u_bar,
        u_til,
    })
}

/// Debug dump of the per-stage vectors of one noiseless chain run to the
/// binary matrix container format (rows are re/im pairs).
pub fn debug_dump_stages(
    grid: &SymbolGrid,
    filter: &PrototypeFilter,
    config: &FbmcConfig,
    channel: &MimoChannel,
) -> Result<Vec<crate::io::MatrixEntry>> {
    let mut entries = Vec::new();
    let mut push = |name: String, data: &[Complex64]| {
        let mut rows = Vec::with_capacity(2 * data.len());
        rows.extend(data.iter().map(|z| z.re));
        rows.extend(data.iter().map(|z| z.im));
        entries.push(crate::io::MatrixEntry {
            name,
            rows: 2,
            cols: data.len(),
            data: rows,
        });
    };
    let branches = crate::qam::split_oqam(grid);
    let tx = transmit(&branches, filter, config)?;
    for (j, s) in tx.streams.iter().enumerate() {
        push(format!("tx_stream_{j}"), s);
    }
    let rx = apply_channel(&tx.streams, channel, 0.0, config.seed, 0)?;
    for (i, s) in rx.iter().enumerate() {
        push(format!("rx_stream_{i}"), s);
    }
    let matched = receive_front(&rx, filter, config)?;
    let eqs = build_equalizer(channel, config.noise_power, config.symbol_power, config.equalizer)?;
    let dft = UnitaryDft::new(config.n_subcarriers);
    for m in 0..config.block_len {
        push(format!("x_bar_{m}"), &matched.x_bar[m]);
        push(format!("x_til_{m}"), &matched.x_til[m]);
        let y_bar = demod(&matched.x_bar[m], m, matched.n_rx, &dft);
        let y_til = demod(&matched.x_til[m], m, matched.n_rx, &dft);
        push(format!("u_bar_{m}"), &equalize(&y_bar, &eqs));
        push(format!("u_til_{m}"), &equalize(&y_til, &eqs));
    }
    Ok(entries)
}
