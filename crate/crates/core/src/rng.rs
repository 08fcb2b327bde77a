//! Seeded random streams.
//!
//! Every episode owns one ChaCha8 stream. Episodes of a sweep share the
//! master seed and differ in the 64-bit ChaCha stream id, which packs the
//! grid coordinates, so two distinct grid cells can never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::Mode;
use crate::error::{Error, Result};
use crate::schemes::SchemeKind;

pub type SimRng = ChaCha8Rng;

pub const MAX_STREAM_GAMMA: usize = (1 << 24) - 1;

/// Plain seeded stream, stream id 0.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream id for one (mode, scheme, gamma, replication) cell.
///
/// Layout: bit 63 mode, bits 56..63 scheme, bits 32..56 gamma, bits 0..32
/// replication.
pub fn stream_id(mode: Mode, scheme: SchemeKind, gamma: usize, replication: u32) -> Result<u64> {
    if gamma > MAX_STREAM_GAMMA {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} exceeds the stream-derivation limit {MAX_STREAM_GAMMA}"
        )));
    }
    let mode_bit = match mode {
        Mode::Unicast => 0u64,
        Mode::Broadcast => 1u64,
    };
    Ok((mode_bit << 63)
        | ((scheme.index() as u64) << 56)
        | ((gamma as u64) << 32)
        | replication as u64)
}

pub fn episode_stream(
    master_seed: u64,
    mode: Mode,
    scheme: SchemeKind,
    gamma: usize,
    replication: u32,
) -> Result<SimRng> {
    let mut rng = seeded(master_seed);
    rng.set_stream(stream_id(mode, scheme, gamma, replication)?);
    Ok(rng)
}
