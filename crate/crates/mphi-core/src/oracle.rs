//! Independent verification routes. Everything here works on the full
//! complex representation of `L_N(A)` and deliberately avoids the per-block
//! frame shortcuts used by the production paths, so the two can be compared.

use nalgebra::DMatrix;
use rand::Rng;

use crate::algebra::{algebra_basis, AlgebraSignature, DimensionVector};
use crate::error::Result;
use crate::linalg::{self, C64, Tolerances};
use crate::module::{ModuleVector, Submodule};

/// A-valued orthogonal complement computed by brute force: solve
/// `⟨x, y⟩ = 0` for every basis vector `x` of the submodule as a complex
/// linear system in the full coordinates of the ambient module. Returns an
/// orthonormal complex basis (rows) of the solution space.
pub fn a_valued_complement(sub: &Submodule, tol: &Tolerances) -> Result<DMatrix<C64>> {
    let sig = sub.signature().clone();
    let ambient = sub.ambient();
    let dim_a = sig.complex_dim();
    let n_full = ambient * dim_a;
    let basis = sub.complex_basis(); // rows are basis vectors
    let d = basis.nrows();
    // For y in full coordinates, the algebra element ⟨x, y⟩ has complex
    // coordinates linear in y: build one constraint row per (basis vector,
    // algebra coordinate) pair.
    let mut constraints = DMatrix::<C64>::zeros(d * dim_a, n_full);
    let coord = |entry: usize, block_off: usize, r: usize, c: usize, ni: usize| -> usize {
        entry * dim_a + block_off + r * ni + c
    };
    let mut block_offsets = Vec::with_capacity(sig.block_count());
    let mut off = 0;
    for &n in sig.blocks() {
        block_offsets.push(off);
        off += n * n;
    }
    for b in 0..d {
        // ⟨x, y⟩ block i entry (r, c) = Σ_s Σ_ρ conj(x_s[ρ, r]) y_s[ρ, c]
        for (i, &ni) in sig.blocks().iter().enumerate() {
            for r in 0..ni {
                for c in 0..ni {
                    let row = b * dim_a + block_offsets[i] + r * ni + c;
                    for s in 0..ambient {
                        for rho in 0..ni {
                            let x_coef = basis[(b, coord(s, block_offsets[i], rho, r, ni))].conj();
                            constraints[(row, coord(s, block_offsets[i], rho, c, ni))] = x_coef;
                        }
                    }
                }
            }
        }
    }
    let null = linalg::nullspace(&constraints, Some(1.0), tol)?;
    // rows are basis vectors; transpose without conjugating
    Ok(null.transpose())
}

/// Brute-force dimension vector: complex dimension of `S · p_i` divided by
/// the block size, computed from the span of `generator · basis element`
/// products in full coordinates.
pub fn dimension_vector_by_span(
    sig: &AlgebraSignature,
    ambient: usize,
    generators: &[ModuleVector],
    tol: &Tolerances,
) -> Result<DimensionVector> {
    let basis = algebra_basis(sig);
    let centrals = crate::algebra::central_basis(sig);
    let dim_a = sig.complex_dim();
    let n_full = ambient * dim_a;
    let coords = |x: &ModuleVector| -> Vec<C64> {
        let mut v = Vec::with_capacity(n_full);
        for e in x.entries() {
            for b in e.blocks() {
                for r in 0..b.nrows() {
                    for c in 0..b.ncols() {
                        v.push(b[(r, c)]);
                    }
                }
            }
        }
        v
    };
    let mut counts = Vec::with_capacity(sig.block_count());
    for (i, p) in centrals.iter().enumerate() {
        // span of { g · a · p_i : g generator, a basis element }
        let mut cols: Vec<Vec<C64>> = Vec::new();
        for g in generators {
            for a in &basis {
                let v = g.right_mul(&(a * p));
                cols.push(coords(&v));
            }
            let v = g.right_mul(p);
            cols.push(coords(&v));
        }
        let mut m = DMatrix::<C64>::zeros(n_full, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (r, val) in col.iter().enumerate() {
                m[(r, j)] = *val;
            }
        }
        let scale = linalg::operator_norm(&m).max(1.0);
        let rank = linalg::nominal_rank(&m, Some(scale), tol);
        let ni = sig.blocks()[i];
        debug_assert_eq!(rank % ni, 0, "complex dimension not divisible by block size");
        counts.push((rank / ni) as u64);
    }
    Ok(DimensionVector(counts))
}

/// Sampling estimate of the Dixmier angle: the supremum of `‖⟨x, y⟩‖` over
/// random pairs with module norm at most one. Never exceeds the projection
/// formula (up to roundoff) if the two suprema agree.
pub fn dixmier_angle_sampled(
    m: &Submodule,
    n: &Submodule,
    pairs: usize,
    rng: &mut impl Rng,
) -> f64 {
    let sig = m.signature().clone();
    let sample = |sub: &Submodule, rng: &mut dyn rand::RngCore| -> Option<ModuleVector> {
        // random coefficients against the frame bases
        let frames: Vec<DMatrix<C64>> = sub
            .frames()
            .iter()
            .zip(sig.blocks())
            .map(|(q, &ni)| {
                let ncols = q.ncols();
                let coeff = DMatrix::<C64>::from_fn(ncols, ni, |_, _| {
                    C64::new(
                        rand::Rng::gen::<f64>(rng) - 0.5,
                        rand::Rng::gen::<f64>(rng) - 0.5,
                    )
                });
                q * coeff
            })
            .collect();
        let x = ModuleVector::from_frames(&sig, sub.ambient(), &frames).ok()?;
        let norm = x.norm();
        if norm < 1e-9 {
            return None;
        }
        Some(x.scale(C64::new(1.0 / norm, 0.0)))
    };
    let mut best: f64 = 0.0;
    for _ in 0..pairs {
        let (Some(x), Some(y)) = (sample(m, rng), sample(n, rng)) else {
            continue;
        };
        best = best.max(x.inner(&y).norm());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::default_signature;
    use crate::module::span_submodule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vector(sig: &AlgebraSignature, len: usize, rng: &mut impl Rng) -> ModuleVector {
        let entries = (0..len)
            .map(|_| {
                let blocks = sig
                    .blocks()
                    .iter()
                    .map(|&n| {
                        DMatrix::from_fn(n, n, |_, _| {
                            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                        })
                    })
                    .collect();
                crate::algebra::AlgebraElement::from_blocks(sig, blocks).unwrap()
            })
            .collect();
        ModuleVector::new(sig, entries).unwrap()
    }

    #[test]
    fn brute_force_complement_matches_structural() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let gens: Vec<ModuleVector> = (0..2).map(|_| random_vector(&sig, 3, &mut rng)).collect();
            let s = span_submodule(&sig, 3, &gens).unwrap();
            let brute = a_valued_complement(&s, &tol).unwrap();
            let structural = s.orth_complement().complex_basis();
            assert_eq!(brute.nrows(), structural.nrows());
            let d = linalg::subspace_distance(&brute.transpose(), &structural.transpose());
            assert!(d < 1e-9, "complement mismatch {d}");
        }
    }

    #[test]
    fn brute_force_dimensions_match() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let gens: Vec<ModuleVector> = (0..2).map(|_| random_vector(&sig, 3, &mut rng)).collect();
            let s = span_submodule(&sig, 3, &gens).unwrap();
            let brute = dimension_vector_by_span(&sig, 3, &gens, &tol).unwrap();
            assert_eq!(s.dimension_vector(), brute);
        }
    }

    #[test]
    fn sampled_angle_below_formula() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let g1: Vec<ModuleVector> = (0..1).map(|_| random_vector(&sig, 2, &mut rng)).collect();
            let g2: Vec<ModuleVector> = (0..1).map(|_| random_vector(&sig, 2, &mut rng)).collect();
            let m = span_submodule(&sig, 2, &g1).unwrap();
            let n = span_submodule(&sig, 2, &g2).unwrap();
            let formula = crate::module::dixmier_angle(&m, &n).c0;
            let sampled = dixmier_angle_sampled(&m, &n, 2000, &mut rng);
            assert!(sampled <= formula + 1e-6, "sampled {sampled} > formula {formula}");
        }
    }
}
