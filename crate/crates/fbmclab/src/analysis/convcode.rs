//! Rate-1/2 convolutional code with hard-decision Viterbi decoding.
//!
//! Constraint length 7, generators 133/171 (octal), zero-tail terminated.
//! This is the documented default codec for coded BER runs; every BER
//! acceptance comparison also runs uncoded so nothing hinges on this
//! choice.

/// Generator polynomials, constraint length 7.
const G0: u32 = 0o133;
const G1: u32 = 0o171;
const K: usize = 7;
const STATES: usize = 1 << (K - 1);

/// Tail bits appended to flush the encoder.
pub const TAIL_BITS: usize = K - 1;

#[inline]
fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Encode info bits plus a zero tail; output length is
/// `2 * (bits.len() + TAIL_BITS)`.
pub fn encode(bits: &[u8]) -> Vec<u8> {
    let mut state: u32 = 0;
    let mut out = Vec::with_capacity(2 * (bits.len() + TAIL_BITS));
    for &b in bits.iter().chain(std::iter::repeat(&0u8).take(TAIL_BITS)) {
        let reg = ((b as u32) << (K - 1)) | state;
        out.push(parity(reg & G0));
        out.push(parity(reg & G1));
        state = reg >> 1;
    }
    out
}

/// Hard-decision Viterbi decode of a zero-tailed stream. Returns the info
/// bits (tail stripped). `coded.len()` must be even.
pub fn decode(coded: &[u8]) -> Vec<u8> {
    assert!(coded.len() % 2 == 0, "coded stream must be bit pairs");
    let steps = coded.len() / 2;
    if steps <= TAIL_BITS {
        return Vec::new();
    }
    // branch outputs per (state, input bit)
    let mut outputs = [[[0u8; 2]; 2]; STATES];
    for (s, out_s) in outputs.iter_mut().enumerate() {
        for (b, out_b) in out_s.iter_mut().enumerate() {
            let reg = ((b as u32) << (K - 1)) | s as u32;
            *out_b = [parity(reg & G0), parity(reg & G1)];
        }
    }
    const BIG: u32 = u32::MAX / 2;
    let mut metric = vec![BIG; STATES];
    metric[0] = 0; // encoder starts in the zero state
    let mut prev_state = vec![0u8; steps * STATES];
    let mut prev_input = vec![0u8; steps * STATES];
    let mut next = vec![BIG; STATES];
    for t in 0..steps {
        let r = [coded[2 * t], coded[2 * t + 1]];
        next.iter_mut().for_each(|m| *m = BIG);
        for s in 0..STATES {
            if metric[s] >= BIG {
                continue;
            }
            for b in 0..2usize {
                let o = outputs[s][b];
                let cost = (o[0] ^ r[0]) as u32 + (o[1] ^ r[1]) as u32;
                let ns = ((b << (K - 1)) | s) >> 1;
                let cand = metric[s] + cost;
                if cand < next[ns] {
                    next[ns] = cand;
                    prev_state[t * STATES + ns] = s as u8;
                    prev_input[t * STATES + ns] = b as u8;
                }
            }
        }
        metric.copy_from_slice(&next);
    }
    // traceback from the zero state (zero-tail termination)
    let mut state = 0usize;
    let mut bits_rev = Vec::with_capacity(steps);
    for t in (0..steps).rev() {
        bits_rev.push(prev_input[t * STATES + state]);
        state = prev_state[t * STATES + state] as usize;
    }
    bits_rev.reverse();
    bits_rev.truncate(steps - TAIL_BITS);
    bits_rev
}

/// Deterministic stride interleaver over a coded block.
///
/// Truncation errors concentrate on the edge symbols' subcarriers, which
/// map to contiguous coded bits; spreading them keeps the burst length
/// inside the Viterbi correction span. The stride is the smallest odd
/// number >= sqrt(len) coprime to len, so the permutation is a bijection.
fn stride_of(len: usize) -> usize {
    let mut s = (len as f64).sqrt().ceil() as usize | 1;
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    while gcd(s, len) != 1 {
        s += 2;
    }
    s
}

pub fn interleave(bits: &[u8]) -> Vec<u8> {
    let len = bits.len();
    if len < 4 {
        return bits.to_vec();
    }
    let s = stride_of(len);
    (0..len).map(|k| bits[(k * s) % len]).collect()
}

pub fn deinterleave(bits: &[u8]) -> Vec<u8> {
    let len = bits.len();
    if len < 4 {
        return bits.to_vec();
    }
    let s = stride_of(len);
    let mut out = vec![0u8; len];
    for (k, &b) in bits.iter().enumerate() {
        out[(k * s) % len] = b;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qam::random_bits;

    #[test]
    fn interleaver_is_a_bijection() {
        for len in [37usize, 64, 2048, 6144] {
            let bits = random_bits(len, 9, len as u64);
            let back = deinterleave(&interleave(&bits));
            assert_eq!(back, bits, "len {len}");
        }
    }

    #[test]
    fn noiseless_roundtrip() {
        let bits = random_bits(500, 3, 0);
        let coded = encode(&bits);
        assert_eq!(coded.len(), 2 * (bits.len() + TAIL_BITS));
        assert_eq!(decode(&coded), bits);
    }

    #[test]
    fn corrects_scattered_errors() {
        let bits = random_bits(400, 5, 1);
        let mut coded = encode(&bits);
        // flip well-separated bits; free distance 10 absorbs isolated errors
        for idx in (10..coded.len()).step_by(97) {
            coded[idx] ^= 1;
        }
        assert_eq!(decode(&coded), bits);
    }

    #[test]
    fn empty_input() {
        let coded = encode(&[]);
        assert_eq!(decode(&coded), Vec::<u8>::new());
    }
}
