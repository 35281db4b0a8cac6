//! Counter-based pseudo-random generation.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so overlapping
//! index ranges agree bit-exactly and replicates parallelize without shared
//! state. Not cryptographic.

/// Distinct substreams carved out of one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// The innovation stream itself.
    Main,
    /// Independent auxiliary stream serving filter demands outside the
    /// coupled range of a Brownian-coupled model.
    Auxiliary,
    /// Scratch stream for tests and synthetic data.
    Scratch,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Main => 0x243F_6A88_85A3_08D3,
            Stream::Auxiliary => 0x1319_8A2E_0370_7344,
            Stream::Scratch => 0xA409_3822_299F_31D0,
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed hash of two words; two mixing rounds give full avalanche.
#[inline]
fn hash2(key: u64, word: u64) -> u64 {
    mix(mix(key.wrapping_add(GOLDEN)).wrapping_add(word.wrapping_mul(GOLDEN)))
}

/// Raw 64 bits at `(seed, stream, index)`. Negative indices are valid.
#[inline]
pub fn bits_at(seed: u64, stream: Stream, index: i64) -> u64 {
    hash2(hash2(seed, stream.tag()), index as u64)
}

/// Second independent word at the same coordinates.
#[inline]
fn bits_at_partner(seed: u64, stream: Stream, index: i64) -> u64 {
    hash2(hash2(seed ^ 0x4528_21E6_38D0_1377, stream.tag()), index as u64)
}

/// Uniform in `[0, 1)` from 53 high bits.
#[inline]
pub fn uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `(0, 1]`; safe under `ln`.
#[inline]
fn uniform_positive(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal at `(seed, stream, index)` via Box-Muller (cosine branch).
pub fn standard_normal(seed: u64, stream: Stream, index: i64) -> f64 {
    let u1 = uniform_positive(bits_at(seed, stream, index));
    let u2 = uniform(bits_at_partner(seed, stream, index));
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Uniform in `[0, 1)` at `(seed, stream, index)`.
pub fn standard_uniform(seed: u64, stream: Stream, index: i64) -> f64 {
    uniform(bits_at(seed, stream, index))
}

/// Standard exponential (rate 1) at `(seed, stream, index)`.
pub fn standard_exponential(seed: u64, stream: Stream, index: i64) -> f64 {
    -uniform_positive(bits_at(seed, stream, index)).ln()
}

/// Seed for ensemble cell `(n, replicate)`, a pure function of the master.
pub fn derive_seed(master: u64, n: usize, replicate: usize) -> u64 {
    hash2(hash2(master ^ 0xC0AC_29B7_C97C_50DD, n as u64), replicate as u64)
}
