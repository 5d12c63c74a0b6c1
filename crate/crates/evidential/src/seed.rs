//! Deterministic seed derivation.
//!
//! Everything stochastic in the crate (weight init, batch shuffling,
//! dropout, ensemble members, benchmark splits) draws from a ChaCha stream
//! seeded through this function, so a single master seed pins down an entire
//! run while independent consumers still get decorrelated streams.

/// Derives a per-stream seed from a master seed using a splitmix64-style
/// finalizer over `master + (stream + 1) * golden_gamma`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(
        stream
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
