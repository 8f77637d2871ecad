//! Deterministic SIR accounting, Monte-Carlo BER, spectral efficiency, and
//! the CP-OFDM baseline.

pub mod ber;
pub mod cases;
pub mod convcode;
pub mod ofdm;
pub mod se;
pub mod sir;

pub use ber::{ber_curve, ebn0_at_ber, BerOptions, BerPoint, Scheme};
pub use cases::{truncation_case, TruncationCase};
pub use ofdm::{ofdm_block_chain, OfdmParams};
pub use se::{se_formula, spectral_efficiency, SePoint, SeScheme};
pub use sir::{sinr_per_symbol, sir_table, SirEntry, SirReport};
