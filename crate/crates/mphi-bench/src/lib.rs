//! Shared helpers for the benchmark targets.

use mphi_core::algebra::{AlgebraElement, AlgebraSignature};
use mphi_core::dense::DenseOperator;

/// Deterministic pseudo-random dense operator without external RNG state,
/// so benchmark inputs are stable across runs.
pub fn seeded_operator(sig: &AlgebraSignature, dom: usize, cod: usize, seed: u64) -> DenseOperator {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let entries = (0..cod)
        .map(|_| {
            (0..dom)
                .map(|_| {
                    let blocks = sig
                        .blocks()
                        .iter()
                        .map(|&n| {
                            nalgebra::DMatrix::from_fn(n, n, |_, _| {
                                num_complex::Complex::new(next(), next())
                            })
                        })
                        .collect();
                    AlgebraElement::from_blocks(sig, blocks).unwrap()
                })
                .collect()
        })
        .collect();
    DenseOperator::from_entries(sig, dom, cod, entries).unwrap()
}
