//! Arithmetic of the finite-dimensional C*-algebra `A = ⊕_i M_{n_i}(C)`,
//! its center, projections, and the K0 bookkeeping as dimension vectors.
//!
//! The simple right A-modules are the row spaces of the blocks; a finitely
//! generated module is classified up to isomorphism by its multiplicity
//! vector in `Z^k`, which is what [`DimensionVector`] records.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MphiError, Result};
use crate::linalg::{self, C64, Tolerances};

/// Block sizes `(n_1, ..., n_k)` of `A = ⊕ M_{n_i}(C)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraSignature(Vec<usize>);

/// The default desk algebra `M_2(C) ⊕ C`: the smallest signature with a
/// genuine matrix block and a center of dimension greater than one.
pub fn default_signature() -> AlgebraSignature {
    AlgebraSignature::new(vec![2, 1]).unwrap()
}

impl AlgebraSignature {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(MphiError::InvalidSignature("no blocks".into()));
        }
        if blocks.iter().any(|&n| n == 0) {
            return Err(MphiError::InvalidSignature("zero-sized block".into()));
        }
        Ok(AlgebraSignature(blocks))
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    /// Number of simple blocks `k`.
    pub fn block_count(&self) -> usize {
        self.0.len()
    }

    /// Complex dimension `Σ n_i^2` of the algebra.
    pub fn complex_dim(&self) -> usize {
        self.0.iter().map(|n| n * n).sum()
    }

    /// Commutative signatures have all blocks of size one.
    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&n| n == 1)
    }
}

impl fmt::Display for AlgebraSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Multiplicities of the simple right modules inside a finitely generated
/// module; two such modules are isomorphic iff their vectors agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionVector(pub Vec<u64>);

impl DimensionVector {
    pub fn zeros(k: usize) -> Self {
        DimensionVector(vec![0; k])
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn le(&self, other: &DimensionVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Total complex dimension `Σ counts_i * n_i` inside modules over `sig`.
    pub fn complex_dim(&self, sig: &AlgebraSignature) -> usize {
        self.0
            .iter()
            .zip(sig.blocks())
            .map(|(&c, &n)| c as usize * n)
            .sum()
    }

    pub fn scaled(&self, m: u64) -> DimensionVector {
        DimensionVector(self.0.iter().map(|c| c * m).collect())
    }
}

impl Add<&DimensionVector> for &DimensionVector {
    type Output = DimensionVector;
    fn add(self, rhs: &DimensionVector) -> DimensionVector {
        assert_eq!(self.0.len(), rhs.0.len());
        DimensionVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A K0 class `[N1] - [N2]` as a (possibly negative) integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexValue(pub Vec<i64>);

impl IndexValue {
    pub fn zero(k: usize) -> Self {
        IndexValue(vec![0; k])
    }

    pub fn from_difference(n1: &DimensionVector, n2: &DimensionVector) -> Self {
        assert_eq!(n1.0.len(), n2.0.len());
        IndexValue(n1.0.iter().zip(&n2.0).map(|(a, b)| *a as i64 - *b as i64).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    pub fn is_nonpositive(&self) -> bool {
        self.0.iter().all(|&d| d <= 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&d| d >= 0)
    }
}

impl Add<&IndexValue> for &IndexValue {
    type Output = IndexValue;
    fn add(self, rhs: &IndexValue) -> IndexValue {
        assert_eq!(self.0.len(), rhs.0.len());
        IndexValue(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Neg for &IndexValue {
    type Output = IndexValue;
    fn neg(self) -> IndexValue {
        IndexValue(self.0.iter().map(|d| -d).collect())
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c:+}")?;
        }
        write!(f, ")")
    }
}

/// An element of `A`, stored as one complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    sig: AlgebraSignature,
    blocks: Vec<DMatrix<C64>>,
}

impl AlgebraElement {
    pub fn from_blocks(sig: &AlgebraSignature, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != sig.block_count() {
            return Err(MphiError::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                sig.block_count(),
                blocks.len()
            )));
        }
        for (i, (b, &n)) in blocks.iter().zip(sig.blocks()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(MphiError::ShapeMismatch(format!(
                    "block {i} is {}x{}, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(AlgebraElement { sig: sig.clone(), blocks })
    }

    pub fn zero(sig: &AlgebraSignature) -> Self {
        let blocks = sig.blocks().iter().map(|&n| DMatrix::zeros(n, n)).collect();
        AlgebraElement { sig: sig.clone(), blocks }
    }

    pub fn identity(sig: &AlgebraSignature) -> Self {
        let blocks = sig.blocks().iter().map(|&n| DMatrix::identity(n, n)).collect();
        AlgebraElement { sig: sig.clone(), blocks }
    }

    /// Central element `Σ c_i p_i` with one complex coefficient per block.
    pub fn central(sig: &AlgebraSignature, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() != sig.block_count() {
            return Err(MphiError::ShapeMismatch(format!(
                "expected {} central coefficients, got {}",
                sig.block_count(),
                coeffs.len()
            )));
        }
        let blocks = sig
            .blocks()
            .iter()
            .zip(coeffs)
            .map(|(&n, &c)| DMatrix::identity(n, n) * c)
            .collect();
        Ok(AlgebraElement { sig: sig.clone(), blocks })
    }

    pub fn scalar(sig: &AlgebraSignature, c: C64) -> Self {
        let coeffs = vec![c; sig.block_count()];
        AlgebraElement::central(sig, &coeffs).unwrap()
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.sig
    }

    pub fn block(&self, i: usize) -> &DMatrix<C64> {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    /// Adjoint: conjugate transpose in every block.
    pub fn star(&self) -> AlgebraElement {
        AlgebraElement {
            sig: self.sig.clone(),
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::operator_norm).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Inverse; fails with `Singular` when some block has a singular value
    /// at or below `tol.inv` relative to the element norm.
    pub fn invert(&self, tol: &Tolerances) -> Result<AlgebraElement> {
        let scale = self.norm().max(f64::MIN_POSITIVE);
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let sv = linalg::singular_values(b);
            let smallest = sv.last().cloned().unwrap_or(0.0);
            if smallest <= tol.inv * scale {
                return Err(MphiError::Singular { smallest, threshold: tol.inv * scale });
            }
            blocks.push(linalg::pseudo_inverse(b, Some(scale), tol)?);
        }
        Ok(AlgebraElement { sig: self.sig.clone(), blocks })
    }

    /// Smallest block singular value relative to the norm; 0 for the zero
    /// element. Invertibility margin used by catalog constructors.
    pub fn invertibility_margin(&self) -> f64 {
        let scale = self.norm();
        if scale == 0.0 {
            return 0.0;
        }
        self.blocks
            .iter()
            .map(|b| linalg::singular_values(b).last().cloned().unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
            / scale
    }

    pub fn is_central(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            let n = b.nrows();
            let c = b[(0, 0)];
            let diff = b - DMatrix::identity(n, n) * c;
            linalg::operator_norm(&diff) <= tol
        })
    }

    /// Per-block scalar coefficients, valid when `is_central`.
    pub fn central_coefficients(&self) -> Vec<C64> {
        self.blocks.iter().map(|b| b[(0, 0)]).collect()
    }

    /// Self-adjoint idempotent test.
    pub fn is_projection(&self, tol: f64) -> bool {
        let sq = self * self;
        let h = self.star();
        (&sq - self).norm() <= tol && (&h - self).norm() <= tol
    }

    pub fn scale(&self, c: C64) -> AlgebraElement {
        AlgebraElement {
            sig: self.sig.clone(),
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }
}

impl Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.sig, rhs.sig, "algebra signature mismatch");
        AlgebraElement {
            sig: self.sig.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.sig, rhs.sig, "algebra signature mismatch");
        AlgebraElement {
            sig: self.sig.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.sig, rhs.sig, "algebra signature mismatch");
        AlgebraElement {
            sig: self.sig.clone(),
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a * b).collect(),
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement {
            sig: self.sig.clone(),
            blocks: self.blocks.iter().map(|b| -b).collect(),
        }
    }
}

/// The `k` central projections `p_i` (identity on block `i`, zero elsewhere);
/// their complex span is the center `Z(A)`.
pub fn central_basis(sig: &AlgebraSignature) -> Vec<AlgebraElement> {
    (0..sig.block_count())
        .map(|i| {
            let mut coeffs = vec![C64::new(0.0, 0.0); sig.block_count()];
            coeffs[i] = C64::new(1.0, 0.0);
            AlgebraElement::central(sig, &coeffs).unwrap()
        })
        .collect()
}

/// Multiplicity of each simple module inside `A` as a right module over
/// itself: `(n_1, ..., n_k)`. This is the unit of index bookkeeping.
pub fn regular_representation_dim(sig: &AlgebraSignature) -> DimensionVector {
    DimensionVector(sig.blocks().iter().map(|&n| n as u64).collect())
}

/// Matrix units and central projections: a complex basis of `A`, used by
/// invariance certificates.
pub fn algebra_basis(sig: &AlgebraSignature) -> Vec<AlgebraElement> {
    let mut out = Vec::with_capacity(sig.complex_dim());
    for (i, &n) in sig.blocks().iter().enumerate() {
        for r in 0..n {
            for c in 0..n {
                let mut blocks: Vec<DMatrix<C64>> =
                    sig.blocks().iter().map(|&m| DMatrix::zeros(m, m)).collect();
                blocks[i][(r, c)] = C64::new(1.0, 0.0);
                out.push(AlgebraElement { sig: sig.clone(), blocks });
            }
        }
    }
    out
}

// --- serde ---

#[derive(Serialize, Deserialize)]
struct AlgebraElementRepr {
    signature: AlgebraSignature,
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlgebraElementRepr {
            signature: self.sig.clone(),
            blocks: self.blocks.iter().map(linalg::matrix_to_rows).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = AlgebraElementRepr::deserialize(d)?;
        let blocks = repr
            .blocks
            .iter()
            .map(|rows| linalg::matrix_from_rows(rows))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        AlgebraElement::from_blocks(&repr.signature, blocks).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_element(sig: &AlgebraSignature, rng: &mut impl Rng) -> AlgebraElement {
        let blocks = sig
            .blocks()
            .iter()
            .map(|&n| DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)))
            .collect();
        AlgebraElement::from_blocks(sig, blocks).unwrap()
    }

    #[test]
    fn star_is_conjugate_transpose() {
        let sig = AlgebraSignature::new(vec![2]).unwrap();
        let a = AlgebraElement::from_blocks(
            &sig,
            vec![DMatrix::from_row_slice(2, 2, &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ])],
        )
        .unwrap();
        let s = a.star();
        assert_eq!(s.block(0)[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(s.block(0)[(0, 1)], C64::new(0.0, 0.0));
        // identity is self-adjoint
        let id = AlgebraElement::identity(&sig);
        assert_eq!(id.star(), id);
    }

    #[test]
    fn star_antimultiplicative_and_norm_preserving() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_element(&sig, &mut rng);
            let b = random_element(&sig, &mut rng);
            let lhs = (&a * &b).star();
            let rhs = &b.star() * &a.star();
            assert!((&lhs - &rhs).norm() < 1e-12);
            // norm(star a) = norm(a), each side its own SVD
            assert!((a.star().norm() - a.norm()).abs() < 1e-10);
            assert!((&a.star().star() - &a).norm() < 1e-14);
        }
    }

    #[test]
    fn cstar_identity_and_submultiplicativity() {
        let sig = AlgebraSignature::new(vec![2, 1, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_element(&sig, &mut rng);
            let b = random_element(&sig, &mut rng);
            assert!((&a * &b).norm() <= a.norm() * b.norm() + 1e-10);
            let aa = &a.star() * &a;
            assert!((aa.norm() - a.norm() * a.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn invert_identity_and_diagonal() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let id = AlgebraElement::identity(&sig);
        assert!((&id.invert(&tol).unwrap() - &id).norm() < 1e-12);

        // diag-block(2 I_2) ⊕ (0.5) inverts to diag-block(0.5 I_2) ⊕ (2)
        let a = AlgebraElement::central(&sig, &[C64::new(2.0, 0.0), C64::new(0.5, 0.0)]).unwrap();
        let inv = a.invert(&tol).unwrap();
        let expect =
            AlgebraElement::central(&sig, &[C64::new(0.5, 0.0), C64::new(2.0, 0.0)]).unwrap();
        assert!((&inv - &expect).norm() < 1e-12);
    }

    #[test]
    fn invert_random_residual() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id = AlgebraElement::identity(&sig);
        for _ in 0..50 {
            // shift towards identity to stay well-conditioned
            let r = random_element(&sig, &mut rng);
            let a = &id.scale(C64::new(2.0, 0.0)) + &r;
            if a.invertibility_margin() < 1e-3 {
                continue;
            }
            let inv = a.invert(&tol).unwrap();
            assert!((&(&a * &inv) - &id).norm() <= 1e-10);
        }
    }

    #[test]
    fn invert_rejects_singular() {
        let sig = default_signature();
        let a = AlgebraElement::central(&sig, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(
            a.invert(&Tolerances::default()),
            Err(MphiError::Singular { .. })
        ));
    }

    #[test]
    fn central_basis_shape_and_commutation() {
        let sig = AlgebraSignature::new(vec![1]).unwrap();
        let basis = central_basis(&sig);
        assert_eq!(basis.len(), 1);
        assert!((&basis[0] - &AlgebraElement::identity(&sig)).norm() < 1e-15);

        let sig = default_signature();
        let basis = central_basis(&sig);
        assert_eq!(basis.len(), 2);
        for p in &basis {
            assert!(p.is_projection(1e-14));
        }
        // p_1 = I_2 ⊕ 0, p_2 = 0 ⊕ 1
        assert!((basis[0].block(0) - DMatrix::<C64>::identity(2, 2)).norm() < 1e-15);
        assert!(basis[0].block(1)[(0, 0)].norm() < 1e-15);
        assert!(basis[1].block(1)[(0, 0)].re == 1.0);

        // central elements commute with everything
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let a = random_element(&sig, &mut rng);
            let c = AlgebraElement::central(
                &sig,
                &[
                    C64::new(rng.gen::<f64>(), rng.gen::<f64>()),
                    C64::new(rng.gen::<f64>(), rng.gen::<f64>()),
                ],
            )
            .unwrap();
            assert!((&(&c * &a) - &(&a * &c)).norm() < 1e-13);
        }
    }

    /// Brute-force oracle: the multiplicity of simple module `i` inside the
    /// regular module is `rank(R_{p_i}) / n_i`, where `R_b` is right
    /// multiplication by `b` acting on `A` as a complex vector space.
    fn regular_dim_oracle(sig: &AlgebraSignature) -> DimensionVector {
        let basis = algebra_basis(sig);
        let dim = sig.complex_dim();
        let coords = |a: &AlgebraElement| -> Vec<C64> {
            let mut v = Vec::with_capacity(dim);
            for b in a.blocks() {
                for r in 0..b.nrows() {
                    for c in 0..b.ncols() {
                        v.push(b[(r, c)]);
                    }
                }
            }
            v
        };
        let centrals = central_basis(sig);
        let mut counts = Vec::new();
        for (i, p) in centrals.iter().enumerate() {
            // assemble right multiplication by p_i in the basis coordinates
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for (j, e) in basis.iter().enumerate() {
                let col = coords(&(e * p));
                for (r, v) in col.into_iter().enumerate() {
                    m[(r, j)] = v;
                }
            }
            let rank = linalg::nominal_rank(&m, Some(1.0), &Tolerances::default());
            assert_eq!(rank % sig.blocks()[i], 0);
            counts.push((rank / sig.blocks()[i]) as u64);
        }
        DimensionVector(counts)
    }

    #[test]
    fn regular_representation_dims() {
        for blocks in [vec![1], vec![2, 1], vec![3, 2, 1]] {
            let sig = AlgebraSignature::new(blocks.clone()).unwrap();
            let expect = DimensionVector(blocks.iter().map(|&n| n as u64).collect());
            assert_eq!(regular_representation_dim(&sig), expect);
            assert_eq!(regular_dim_oracle(&sig), expect);
        }
    }

    #[test]
    fn dimension_vector_cancellation() {
        let a = DimensionVector(vec![3, 1]);
        let b = DimensionVector(vec![0, 2]);
        let d = DimensionVector(vec![5, 7]);
        assert_ne!(&a + &d, &b + &d);
        let c = DimensionVector(vec![3, 1]);
        assert_eq!(&a + &d, &c + &d);
        assert_eq!(a, c);
    }

    #[test]
    fn element_json_round_trip() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_element(&sig, &mut rng);
        let text = serde_json::to_string(&a).unwrap();
        let back: AlgebraElement = serde_json::from_str(&text).unwrap();
        assert_eq!(a, back);
    }
}
