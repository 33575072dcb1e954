//! Seed derivation so that independent components (weight init, dropout,
//! batch shuffling, data generation) get decorrelated deterministic streams
//! from one user-facing seed.

/// Mix a base seed with a salt (splitmix64 finalizer).
pub fn mix(base: u64, salt: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_mul(2)
        .wrapping_add(1)
        ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
