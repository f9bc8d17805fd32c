//! Artifact provenance: every emitted file carries the tool version, a hash
//! of the generating configuration and the seed, so identical inputs can be
//! recognized byte-for-byte.

pub const TOOL_VERSION: &str = concat!("swheg-cli v", env!("CARGO_PKG_VERSION"));

/// FNV-1a over the canonical config string.
pub fn config_hash(canonical: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn line(config_canonical: &str, seed: u64) -> String {
    format!("tool={TOOL_VERSION} config_hash={:016x} seed={seed}", config_hash(config_canonical))
}
