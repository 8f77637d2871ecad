//! Dense-matrix oracle equivalence suite.
//!
//! Every banded/slice-wise production path is replayed against a dense
//! materialization at small sizes (N = 8, M = 3..4, K = 4, 2x2 antennas):
//! synthesis, analysis, correlation blocks, interference kernels, the full
//! receive chain, and the genie compensation algebra. Channel application
//! is checked against a naive triple-loop convolution.

use num_complex::Complex64;

use fbmclab::channel::{apply_channel, MimoChannel, TapProfile};
use fbmclab::compensation::{build_compensation, compensate_block, CompensationMode};
use fbmclab::config::{Equalizer, Modulation};
use fbmclab::fft::UnitaryDft;
use fbmclab::filterbank::{
    correlation_grid, delta_grid, interference_kernel, oracle, Branch, BranchPair,
    SynthesisMatrix,
};
use fbmclab::linalg::{CMat, RMat};
use fbmclab::prototype::PrototypeFilter;
use fbmclab::qam::{random_grid, split_oqam};
use fbmclab::rng::{rng_for, Domain};
use fbmclab::transceiver::run_chain;
use fbmclab::FbmcConfig;
use rand::Rng;

const TOL: f64 = 1e-10;

fn cfg(n: usize, m: usize, k: usize, cf: usize, cr: usize) -> FbmcConfig {
    FbmcConfig {
        n_subcarriers: n,
        block_len: m,
        overlap: k,
        n_tx: 2,
        n_rx: 2,
        cut_front: cf,
        cut_rear: cr,
        noise_power: 0.0,
        equalizer: Equalizer::Zf,
        ..FbmcConfig::default()
    }
}

fn rand_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

#[test]
fn synthesis_and_analysis_match_dense() {
    let f = PrototypeFilter::generate_iota(8, 4).unwrap();
    for m_blocks in [3usize, 4] {
        for (cf, cr) in [(0, 0), (2, 1), (1, 2)] {
            for branch in [Branch::I, Branch::Q] {
                let sm = SynthesisMatrix::new(&f, branch, m_blocks, cf, cr).unwrap();
                let dense = sm.to_dense();
                let mut rng = rng_for(1, Domain::SymbolGrid, (m_blocks + cf * 8 + cr) as u64);
                let blocks: Vec<Vec<Complex64>> = (0..m_blocks)
                    .map(|_| (0..8).map(|_| rand_complex(&mut rng)).collect())
                    .collect();
                let fast = sm.synthesize(&blocks).unwrap();
                // dense multiply on the stacked real/imag parts
                let stacked: Vec<Complex64> = blocks.concat();
                for r in 0..dense.rows {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..dense.cols {
                        acc += dense[(r, c)] * stacked[c];
                    }
                    assert!((acc - fast[r]).norm() < TOL, "synthesize row {r}");
                }
                let sig: Vec<Complex64> =
                    (0..sm.rows()).map(|_| rand_complex(&mut rng)).collect();
                let xs = sm.analyze(&sig).unwrap();
                for c in 0..dense.cols {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..dense.rows {
                        acc += dense[(r, c)] * sig[r];
                    }
                    assert!((acc - xs[c / 8][c % 8]).norm() < TOL, "analyze col {c}");
                }
            }
        }
    }
}

#[test]
fn correlations_and_deltas_match_dense() {
    let n = 8;
    let f = PrototypeFilter::generate_iota(n, 4).unwrap();
    let m_blocks = 4;
    for (cf, cr) in [(0, 0), (1, 1), (2, 1)] {
        for pair in [BranchPair::II, BranchPair::IQ, BranchPair::QQ, BranchPair::QI] {
            let a = SynthesisMatrix::new(&f, pair.analysis(), m_blocks, cf, cr).unwrap();
            let b = SynthesisMatrix::new(&f, pair.synthesis(), m_blocks, cf, cr).unwrap();
            let grid = correlation_grid(&a, &b).unwrap();
            let dense = oracle::dense_correlation(&a, &b);
            let a0 = SynthesisMatrix::new(&f, pair.analysis(), m_blocks, 0, 0).unwrap();
            let b0 = SynthesisMatrix::new(&f, pair.synthesis(), m_blocks, 0, 0).unwrap();
            let dense0 = oracle::dense_correlation(&a0, &b0);
            let delta = delta_grid(&f, pair, m_blocks, cf, cr).unwrap();
            for m in 0..m_blocks {
                for i in 0..m_blocks {
                    let blk = oracle::dense_block(&dense, m, i, n);
                    let fast = grid.block_or_zero(m, i);
                    for r in 0..n {
                        for c in 0..n {
                            let want = if r == c { fast[r] } else { 0.0 };
                            assert!((blk[(r, c)] - want).abs() < TOL);
                        }
                    }
                    // delta block equals G_orig - G_trunc from the dense route
                    let blk0 = oracle::dense_block(&dense0, m, i, n);
                    let d = delta.block_or_zero(m, i);
                    for r in 0..n {
                        assert!(
                            (blk0[(r, r)] - blk[(r, r)] - d[r]).abs() < TOL,
                            "delta ({m},{i}) diag {r} pair {pair:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn kernels_match_dense_at_spec_size() {
    let n = 8;
    let f = PrototypeFilter::generate_iota(n, 4).unwrap();
    let dft = UnitaryDft::new(n);
    let m_blocks = 4;
    for pair in [BranchPair::II, BranchPair::IQ, BranchPair::QQ, BranchPair::QI] {
        let a = SynthesisMatrix::new(&f, pair.analysis(), m_blocks, 1, 1).unwrap();
        let b = SynthesisMatrix::new(&f, pair.synthesis(), m_blocks, 1, 1).unwrap();
        let grid = correlation_grid(&a, &b).unwrap();
        for m in 0..m_blocks {
            for i in 0..m_blocks {
                let gamma = grid.block_or_zero(m, i);
                let fast = interference_kernel(&gamma, m, i, pair, &dft);
                let dense = oracle::dense_kernel(&RMat::diag(&gamma), m, i, pair);
                for p in 0..n {
                    for q in 0..n {
                        assert!(
                            (fast[(p, q)] - dense[(p, q)]).norm() < TOL,
                            "{pair:?} ({m},{i}) [{p},{q}]"
                        );
                    }
                }
            }
        }
    }
}

/// Dense per-stream replay of the whole receive chain: the equalized
/// symbol vectors must match `sum_i Q[m][i] s_i` built from dense kernels.
#[test]
fn full_chain_matches_dense_kernel_model() {
    let (n, m_blocks, k) = (8, 4, 4);
    let config = cfg(n, m_blocks, k, 1, 2);
    let f = PrototypeFilter::generate_iota(n, k).unwrap();
    let grid = random_grid(Modulation::Qam16, n, 2, m_blocks, 1.0, 3, 0);
    let ch = MimoChannel::identity(2, n);
    let u = run_chain(&grid, &f, &config, &ch, 0).unwrap();

    let mk = |pair: BranchPair| {
        let a = SynthesisMatrix::new(&f, pair.analysis(), m_blocks, 1, 2).unwrap();
        let b = SynthesisMatrix::new(&f, pair.synthesis(), m_blocks, 1, 2).unwrap();
        let g = correlation_grid(&a, &b).unwrap();
        let dense = oracle::dense_correlation(&a, &b);
        (g, dense)
    };
    let (_, d_ii) = mk(BranchPair::II);
    let (_, d_iq) = mk(BranchPair::IQ);
    let (_, d_qq) = mk(BranchPair::QQ);
    let (_, d_qi) = mk(BranchPair::QI);
    let branches = split_oqam(&grid);
    for j in 0..2 {
        for m in 0..m_blocks {
            let mut want_bar = vec![Complex64::new(0.0, 0.0); n];
            let mut want_til = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..m_blocks {
                let s_re = branches.stream_re(i, j);
                let s_im = branches.stream_im(i, j);
                let q_ii =
                    oracle::dense_kernel(&oracle::dense_block(&d_ii, m, i, n), m, i, BranchPair::II);
                let q_iq =
                    oracle::dense_kernel(&oracle::dense_block(&d_iq, m, i, n), m, i, BranchPair::IQ);
                let q_qq =
                    oracle::dense_kernel(&oracle::dense_block(&d_qq, m, i, n), m, i, BranchPair::QQ);
                let q_qi =
                    oracle::dense_kernel(&oracle::dense_block(&d_qi, m, i, n), m, i, BranchPair::QI);
                for p in 0..n {
                    for q in 0..n {
                        want_bar[p] += q_ii[(p, q)] * s_re[q] + q_iq[(p, q)] * s_im[q];
                        want_til[p] += q_qi[(p, q)] * s_re[q] + q_qq[(p, q)] * s_im[q];
                    }
                }
            }
            let got_bar = u.stream_bar(m, j);
            let got_til = u.stream_til(m, j);
            for p in 0..n {
                assert!((got_bar[p] - want_bar[p]).norm() < TOL, "bar m={m} j={j} p={p}");
                assert!((got_til[p] - want_til[p]).norm() < TOL, "til m={m} j={j} p={p}");
            }
        }
    }
}

/// Genie compensation must equal the dense linear-algebra route: subtract
/// dense delta-kernel products of the true symbols, then solve the dense
/// self-correction system.
#[test]
fn genie_compensation_matches_dense_solve() {
    let (n, m_blocks, k) = (8, 4, 4);
    let config = cfg(n, m_blocks, k, 2, 1);
    let f = PrototypeFilter::generate_iota(n, k).unwrap();
    let set = build_compensation(&f, &config).unwrap();
    let grid = random_grid(Modulation::Qpsk, n, 2, m_blocks, 1.0, 9, 0);
    let ch = MimoChannel::identity(2, n);
    let u = run_chain(&grid, &f, &config, &ch, 0).unwrap();
    let truth = split_oqam(&grid);
    let fast = compensate_block(
        &u,
        &set,
        CompensationMode::Genie,
        Some(&truth),
        Modulation::Qpsk,
        1.0,
    )
    .unwrap();

    // dense replay
    let dense_delta = |pair: BranchPair| {
        let a0 = SynthesisMatrix::new(&f, pair.analysis(), m_blocks, 0, 0).unwrap();
        let b0 = SynthesisMatrix::new(&f, pair.synthesis(), m_blocks, 0, 0).unwrap();
        let at = SynthesisMatrix::new(&f, pair.analysis(), m_blocks, 2, 1).unwrap();
        let bt = SynthesisMatrix::new(&f, pair.synthesis(), m_blocks, 2, 1).unwrap();
        oracle::dense_correlation(&a0, &b0).sub(&oracle::dense_correlation(&at, &bt))
    };
    let dd_ii = dense_delta(BranchPair::II);
    let dd_iq = dense_delta(BranchPair::IQ);
    let dd_qq = dense_delta(BranchPair::QQ);
    let dd_qi = dense_delta(BranchPair::QI);
    for j in 0..2 {
        for m in 0..m_blocks {
            let u_bar = u.stream_bar(m, j);
            let u_til = u.stream_til(m, j);
            let mut v_re: Vec<f64> = u_bar.iter().map(|z| z.re).collect();
            let mut v_im: Vec<f64> = u_til.iter().map(|z| z.im).collect();
            for i in 0..m_blocks {
                let s_re = truth.stream_re(i, j);
                let s_im = truth.stream_im(i, j);
                let q_iq = oracle::dense_kernel(
                    &oracle::dense_block(&dd_iq, m, i, n),
                    m,
                    i,
                    BranchPair::IQ,
                );
                let q_qi = oracle::dense_kernel(
                    &oracle::dense_block(&dd_qi, m, i, n),
                    m,
                    i,
                    BranchPair::QI,
                );
                for p in 0..n {
                    for q in 0..n {
                        v_im[p] += q_qi[(p, q)].im * s_re[q];
                        v_re[p] += q_iq[(p, q)].re * s_im[q];
                    }
                }
                if i != m {
                    let q_ii = oracle::dense_kernel(
                        &oracle::dense_block(&dd_ii, m, i, n),
                        m,
                        i,
                        BranchPair::II,
                    );
                    let q_qq = oracle::dense_kernel(
                        &oracle::dense_block(&dd_qq, m, i, n),
                        m,
                        i,
                        BranchPair::QQ,
                    );
                    for p in 0..n {
                        for q in 0..n {
                            v_re[p] += q_ii[(p, q)].re * s_re[q];
                            v_im[p] += q_qq[(p, q)].im * s_im[q];
                        }
                    }
                }
            }
            let solve = |a: RMat, rhs: &[f64]| -> Vec<f64> {
                let inv = a.inverse().unwrap();
                inv.matvec(rhs)
            };
            let q_ii_mm =
                oracle::dense_kernel(&oracle::dense_block(&dd_ii, m, m, n), m, m, BranchPair::II);
            let q_qq_mm =
                oracle::dense_kernel(&oracle::dense_block(&dd_qq, m, m, n), m, m, BranchPair::QQ);
            let want_re = solve(RMat::eye(n).sub(&q_ii_mm.re()), &v_re);
            let want_im = solve(RMat::eye(n).sub(&q_qq_mm.im()), &v_im);
            for p in 0..n {
                let got = fast.entry(m, p, j);
                assert!((got.re - want_re[p]).abs() < TOL, "re m={m} j={j} p={p}");
                assert!((got.im - want_im[p]).abs() < TOL, "im m={m} j={j} p={p}");
            }
        }
    }
}

#[test]
fn channel_matches_triple_loop_within_1e12() {
    let p = TapProfile {
        delays: vec![0, 1, 2],
        powers: vec![0.5, 0.3, 0.2],
        is_flat: false,
    };
    let ch = MimoChannel::draw(&p, 2, 2, 16, 5, 0).unwrap();
    let mut rng = rng_for(6, Domain::SymbolGrid, 0);
    let tx: Vec<Vec<Complex64>> = (0..2)
        .map(|_| (0..40).map(|_| rand_complex(&mut rng)).collect())
        .collect();
    let rx = apply_channel(&tx, &ch, 0.0, 0, 0).unwrap();
    for i in 0..2 {
        for t in 0..40 {
            let mut want = Complex64::new(0.0, 0.0);
            for (l, &d) in ch.delays.iter().enumerate() {
                if t >= d {
                    for j in 0..2 {
                        want += ch.taps[l][(i, j)] * tx[j][t - d];
                    }
                }
            }
            assert!((rx[i][t] - want).norm() < 1e-12);
        }
    }
    let _ = CMat::eye(1);
}
