//! Command-line front end: deterministic SIR tables, Monte-Carlo BER,
//! spectral efficiency, the CP-OFDM baseline, and kernel dumps.
//!
//! Results go to `--out` (or stdout) as CSV or JSON; progress goes to
//! stderr. `FBMCLAB_THREADS` caps the Monte-Carlo worker count without
//! affecting results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fbmclab::analysis::ber::{ber_curve, BerOptions, Scheme};
use fbmclab::analysis::cases::{truncation_case, TruncationCase};
use fbmclab::analysis::se::spectral_efficiency;
use fbmclab::analysis::sir::sir_table;
use fbmclab::channel::{epa_profile, TapProfile, DEFAULT_SAMPLE_RATE_HZ};
use fbmclab::compensation::{build_compensation, CompensationMode};
use fbmclab::filterbank::{delta_grid, BranchPair};
use fbmclab::io::{ber_csv, se_csv, sir_csv, write_matrix_container, MatrixEntry};
use fbmclab::prototype::PrototypeFilter;
use fbmclab::{FbmcConfig, FbmcError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CompensateArg {
    Off,
    Genie,
    Dd,
}

impl CompensateArg {
    fn mode(self) -> Option<CompensationMode> {
        match self {
            CompensateArg::Off => None,
            CompensateArg::Genie => Some(CompensationMode::Genie),
            CompensateArg::Dd => Some(CompensationMode::DecisionDirected),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fbmclab",
    version,
    about = "MIMO-FBMC link-level simulator: truncation analysis, compensation, BER and SE studies"
)]
struct Cli {
    /// Scenario file (TOML). Defaults to the built-in N=64, M=8, K=6, 2x2
    /// QPSK scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,

    /// Truncation case name.
    #[arg(long, global = true, default_value = "same_length")]
    case: String,

    /// Tap profile file (delay_ns power_db per line); EPA when omitted.
    #[arg(long, global = true)]
    profile: Option<PathBuf>,

    /// Sample rate for quantizing the tap profile.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
    sample_rate: f64,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Deterministic per-symbol SIR table for the selected case.
    Sir {
        /// Apply the compensation transform before power accounting.
        #[arg(long, value_enum, default_value_t = CompensateArg::Off)]
        compensate: CompensateArg,
    },
    /// Monte-Carlo BER over an Eb/N0 grid (use-it-all reference, the
    /// selected case plain and compensated).
    Ber {
        /// Comma-separated Eb/N0 grid in dB.
        #[arg(long, default_value = "0,4,8,12,16")]
        snr: String,
        #[arg(long, default_value_t = 200)]
        min_errors: u64,
        #[arg(long, default_value_t = 20_000)]
        max_trials: u64,
        #[arg(long, value_enum, default_value_t = CompensateArg::Dd)]
        compensate: CompensateArg,
        /// Rate-1/2 convolutional coding (hard Viterbi).
        #[arg(long)]
        coded: bool,
    },
    /// Spectral efficiency of use-it-all / one-front / compensate-all.
    Se {
        /// Comma-separated Es/N0 grid in dB.
        #[arg(long, default_value = "0,5,10,15,20,25,30")]
        snr: String,
    },
    /// Paired CP-OFDM baseline BER.
    Ofdm {
        #[arg(long, default_value = "0,4,8,12,16")]
        snr: String,
        #[arg(long, default_value_t = 200)]
        min_errors: u64,
        #[arg(long, default_value_t = 20_000)]
        max_trials: u64,
        /// Cyclic-prefix length in samples (default N/8).
        #[arg(long)]
        cp: Option<usize>,
        #[arg(long)]
        coded: bool,
    },
    /// Dump truncation-error blocks and compensation kernels to the binary
    /// matrix container.
    DumpKernels,
}

fn parse_snr(s: &str) -> Result<Vec<f64>, FbmcError> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        out.push(tok.parse::<f64>().map_err(|_| {
            FbmcError::InvalidConfig(format!("bad SNR value '{tok}' in grid"))
        })?);
    }
    if out.is_empty() {
        return Err(FbmcError::InvalidConfig("empty SNR grid".into()));
    }
    if !out.windows(2).all(|w| w[0] < w[1]) {
        return Err(FbmcError::InvalidConfig("SNR grid must be ascending".into()));
    }
    Ok(out)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), FbmcError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_profile(path: &Option<PathBuf>, sample_rate: f64) -> Result<TapProfile, FbmcError> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            TapProfile::from_text(&text, sample_rate)
        }
        None => epa_profile(sample_rate),
    }
}

fn run(cli: Cli) -> Result<(), FbmcError> {
    if let Ok(threads) = std::env::var("FBMCLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let mut config = match &cli.config {
        Some(path) => FbmcConfig::from_toml_file(path)?,
        None => FbmcConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let case: TruncationCase = cli.case.parse()?;
    let (cut_front, cut_rear) = truncation_case(config.overlap, case)?;
    let case_cfg = config.with_truncation(cut_front, cut_rear)?;
    eprintln!(
        "scenario: N={} M={} K={} {}x{} {} case={} (i_F={}, i_R={}) seed={}",
        config.n_subcarriers,
        config.block_len,
        config.overlap,
        config.n_tx,
        config.n_rx,
        config.modulation.name(),
        case.name(),
        cut_front,
        cut_rear,
        config.seed
    );
    let filter = PrototypeFilter::generate_iota(config.n_subcarriers, config.overlap)?;

    let cmd = cli.cmd;
    match cmd {
        Cmd::Sir { compensate } => {
            let report = sir_table(&filter, &case_cfg, compensate.mode().is_some())?;
            let text = match cli.format {
                OutFormat::Csv => sir_csv(&report, case.name()),
                OutFormat::Json => serde_json::to_string_pretty(&report)
                    .map_err(|e| FbmcError::Format(e.to_string()))?
                    + "\n",
            };
            emit(&cli.out, &text)?;
        }
        Cmd::Ber {
            snr,
            min_errors,
            max_trials,
            compensate,
            coded,
        } => {
            let grid = parse_snr(&snr)?;
            let profile = load_profile(&cli.profile, cli.sample_rate)?;
            let mut schemes = vec![
                Scheme::Fbmc {
                    case: TruncationCase::UseItAll,
                    compensate: None,
                },
                Scheme::Fbmc {
                    case,
                    compensate: None,
                },
            ];
            if let Some(mode) = compensate.mode() {
                schemes.push(Scheme::Fbmc {
                    case,
                    compensate: Some(mode),
                });
            }
            let opts = BerOptions {
                min_errors,
                max_trials,
                coded,
                cp_len: None,
            };
            let points = ber_curve(&config, &filter, &profile, &schemes, &grid, &opts)?;
            let text = match cli.format {
                OutFormat::Csv => ber_csv(&points),
                OutFormat::Json => serde_json::to_string_pretty(&points)
                    .map_err(|e| FbmcError::Format(e.to_string()))?
                    + "\n",
            };
            emit(&cli.out, &text)?;
        }
        Cmd::Se { snr } => {
            let grid = parse_snr(&snr)?;
            let points = spectral_efficiency(&filter, &config, &grid)?;
            let text = match cli.format {
                OutFormat::Csv => se_csv(&points),
                OutFormat::Json => serde_json::to_string_pretty(&points)
                    .map_err(|e| FbmcError::Format(e.to_string()))?
                    + "\n",
            };
            emit(&cli.out, &text)?;
        }
        Cmd::Ofdm {
            snr,
            min_errors,
            max_trials,
            cp,
            coded,
        } => {
            let grid = parse_snr(&snr)?;
            let profile = load_profile(&cli.profile, cli.sample_rate)?;
            let opts = BerOptions {
                min_errors,
                max_trials,
                coded,
                cp_len: cp,
            };
            let points = ber_curve(&config, &filter, &profile, &[Scheme::Ofdm], &grid, &opts)?;
            let text = match cli.format {
                OutFormat::Csv => ber_csv(&points),
                OutFormat::Json => serde_json::to_string_pretty(&points)
                    .map_err(|e| FbmcError::Format(e.to_string()))?
                    + "\n",
            };
            emit(&cli.out, &text)?;
        }
        Cmd::DumpKernels => {
            let mut entries = Vec::new();
            let m_blocks = case_cfg.block_len;
            for (pair, tag) in [
                (BranchPair::II, "ii"),
                (BranchPair::IQ, "iq"),
                (BranchPair::QQ, "qq"),
                (BranchPair::QI, "qi"),
            ] {
                let grid = delta_grid(&filter, pair, m_blocks, cut_front, cut_rear)?;
                for m in 0..m_blocks {
                    for i in 0..m_blocks {
                        if let Some(diag) = grid.block(m, i) {
                            entries.push(MatrixEntry {
                                name: format!("delta_{tag}_{m}_{i}"),
                                rows: 1,
                                cols: diag.len(),
                                data: diag.to_vec(),
                            });
                        }
                    }
                }
            }
            let set = build_compensation(&filter, &case_cfg)?;
            for m in 0..m_blocks {
                if let Some(a) = set.re_self_inv(m) {
                    entries.push(MatrixEntry {
                        name: format!("a_inv_re_{m}"),
                        rows: a.rows,
                        cols: a.cols,
                        data: a.data.clone(),
                    });
                }
                if let Some(a) = set.im_self_inv(m) {
                    entries.push(MatrixEntry {
                        name: format!("a_inv_im_{m}"),
                        rows: a.rows,
                        cols: a.cols,
                        data: a.data.clone(),
                    });
                }
            }
            eprintln!("dumping {} matrices", entries.len());
            match &cli.out {
                Some(path) => {
                    let file = std::fs::File::create(path)?;
                    write_matrix_container(std::io::BufWriter::new(file), &entries)?;
                }
                None => {
                    return Err(FbmcError::InvalidConfig(
                        "dump-kernels requires --out <path>".into(),
                    ))
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
