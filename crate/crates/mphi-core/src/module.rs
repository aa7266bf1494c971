//! Vectors and finitely generated submodules of `L_N(A) = A^N`: the
//! A-valued inner product, orthogonal complements, dimension vectors, the
//! embeddability order and Dixmier angles.
//!
//! A submodule is stored as one orthonormal complex "frame" per block: the
//! block-`i` frame spans the column positions that the module occupies in
//! `C^{N n_i}`. Right A-invariance is built into this representation, so the
//! per-block frame rank *is* the multiplicity of the `i`-th simple module.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    algebra_basis, AlgebraElement, AlgebraSignature, DimensionVector,
};
use crate::error::{MphiError, Result};
use crate::linalg::{self, C64, Tolerances};

/// An element of `L_N(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleVector {
    sig: AlgebraSignature,
    entries: Vec<AlgebraElement>,
}

impl ModuleVector {
    pub fn new(sig: &AlgebraSignature, entries: Vec<AlgebraElement>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.signature() != sig {
                return Err(MphiError::ShapeMismatch(format!(
                    "entry {i} has signature {}, expected {}",
                    e.signature(),
                    sig
                )));
            }
        }
        Ok(ModuleVector { sig: sig.clone(), entries })
    }

    pub fn zero(sig: &AlgebraSignature, len: usize) -> Self {
        ModuleVector {
            sig: sig.clone(),
            entries: (0..len).map(|_| AlgebraElement::zero(sig)).collect(),
        }
    }

    /// Standard basis vector `e_j` (0-based coordinate).
    pub fn standard_basis(sig: &AlgebraSignature, len: usize, j: usize) -> Self {
        let mut v = ModuleVector::zero(sig, len);
        v.entries[j] = AlgebraElement::identity(sig);
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.sig
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &AlgebraElement {
        &self.entries[j]
    }

    /// Right action `x · a`.
    pub fn right_mul(&self, a: &AlgebraElement) -> ModuleVector {
        ModuleVector {
            sig: self.sig.clone(),
            entries: self.entries.iter().map(|e| e * a).collect(),
        }
    }

    pub fn add(&self, other: &ModuleVector) -> ModuleVector {
        assert_eq!(self.len(), other.len());
        ModuleVector {
            sig: self.sig.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> ModuleVector {
        ModuleVector {
            sig: self.sig.clone(),
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    /// A-valued inner product `⟨x, y⟩ = Σ_s x_s^* y_s`; per block this is the
    /// Gram matrix of the frames.
    pub fn inner(&self, other: &ModuleVector) -> AlgebraElement {
        assert_eq!(self.len(), other.len(), "module length mismatch");
        let blocks = self
            .frames()
            .iter()
            .zip(other.frames())
            .map(|(vx, vy)| vx.adjoint() * vy)
            .collect();
        AlgebraElement::from_blocks(&self.sig, blocks).unwrap()
    }

    /// Module norm `||x|| = ||⟨x,x⟩||^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.frames()
            .iter()
            .map(linalg::operator_norm)
            .fold(0.0, f64::max)
    }

    /// Per-block frame: the `(N n_i) x n_i` matrix whose column `c` stacks
    /// column `c` of every entry's block `i`.
    pub fn frames(&self) -> Vec<DMatrix<C64>> {
        let n = self.len();
        self.sig
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, &ni)| {
                let mut m = DMatrix::zeros(n * ni, ni);
                for (s, e) in self.entries.iter().enumerate() {
                    let b = e.block(i);
                    for r in 0..ni {
                        for c in 0..ni {
                            m[(s * ni + r, c)] = b[(r, c)];
                        }
                    }
                }
                m
            })
            .collect()
    }

    /// Rebuild a vector from per-block frames (inverse of [`frames`]).
    pub fn from_frames(sig: &AlgebraSignature, len: usize, frames: &[DMatrix<C64>]) -> Result<Self> {
        if frames.len() != sig.block_count() {
            return Err(MphiError::ShapeMismatch("frame count mismatch".into()));
        }
        let mut entries = vec![AlgebraElement::zero(sig); len];
        for (i, &ni) in sig.blocks().iter().enumerate() {
            let f = &frames[i];
            if f.nrows() != len * ni || f.ncols() != ni {
                return Err(MphiError::ShapeMismatch(format!(
                    "frame {i} is {}x{}, expected {}x{}",
                    f.nrows(),
                    f.ncols(),
                    len * ni,
                    ni
                )));
            }
            for s in 0..len {
                let mut blocks: Vec<DMatrix<C64>> =
                    sig.blocks().iter().map(|&m| DMatrix::zeros(m, m)).collect();
                for r in 0..ni {
                    for c in 0..ni {
                        blocks[i][(r, c)] = f[(s * ni + r, c)];
                    }
                }
                let piece = AlgebraElement::from_blocks(sig, blocks)?;
                entries[s] = &entries[s] + &piece;
            }
        }
        Ok(ModuleVector { sig: sig.clone(), entries })
    }
}

/// A finitely generated (hence closed and orthogonally complementable)
/// submodule of `L_N(A)`, with one orthonormal frame per block.
#[derive(Debug, Clone)]
pub struct Submodule {
    sig: AlgebraSignature,
    ambient: usize,
    frames: Vec<DMatrix<C64>>,
}

impl Submodule {
    pub fn from_frames(sig: &AlgebraSignature, ambient: usize, frames: Vec<DMatrix<C64>>) -> Self {
        debug_assert_eq!(frames.len(), sig.block_count());
        for (i, f) in frames.iter().enumerate() {
            debug_assert_eq!(f.nrows(), ambient * sig.blocks()[i]);
        }
        Submodule { sig: sig.clone(), ambient, frames }
    }

    pub fn zero(sig: &AlgebraSignature, ambient: usize) -> Self {
        let frames = sig
            .blocks()
            .iter()
            .map(|&n| DMatrix::zeros(ambient * n, 0))
            .collect();
        Submodule { sig: sig.clone(), ambient, frames }
    }

    pub fn full(sig: &AlgebraSignature, ambient: usize) -> Self {
        let frames = sig
            .blocks()
            .iter()
            .map(|&n| DMatrix::identity(ambient * n, ambient * n))
            .collect();
        Submodule { sig: sig.clone(), ambient, frames }
    }

    /// Span of the standard basis vectors at the given (0-based) coordinates,
    /// e.g. `L_1` inside `L_2` for `coords = [0]`.
    pub fn coordinate_span(sig: &AlgebraSignature, ambient: usize, coords: &[usize]) -> Self {
        let frames = sig
            .blocks()
            .iter()
            .map(|&n| {
                let mut m = DMatrix::zeros(ambient * n, coords.len() * n);
                for (k, &s) in coords.iter().enumerate() {
                    for r in 0..n {
                        m[(s * n + r, k * n + r)] = C64::new(1.0, 0.0);
                    }
                }
                m
            })
            .collect();
        Submodule { sig: sig.clone(), ambient, frames }
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.sig
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn frame(&self, i: usize) -> &DMatrix<C64> {
        &self.frames[i]
    }

    pub fn frames(&self) -> &[DMatrix<C64>] {
        &self.frames
    }

    /// Multiplicity of each simple module: the per-block frame rank.
    pub fn dimension_vector(&self) -> DimensionVector {
        DimensionVector(self.frames.iter().map(|f| f.ncols() as u64).collect())
    }

    /// Complex dimension `D = Σ counts_i n_i`.
    pub fn complex_dim(&self) -> usize {
        self.dimension_vector().complex_dim(&self.sig)
    }

    pub fn is_zero(&self) -> bool {
        self.frames.iter().all(|f| f.ncols() == 0)
    }

    /// A-valued orthogonal complement; per block the complex complement of
    /// the frame span. Dimension vectors of the two parts add to the ambient.
    pub fn orth_complement(&self) -> Submodule {
        let frames = self
            .frames
            .iter()
            .map(linalg::complement_of_orthonormal)
            .collect();
        Submodule { sig: self.sig.clone(), ambient: self.ambient, frames }
    }

    /// `true` iff this module embeds into `other` as a closed submodule,
    /// decided componentwise on dimension vectors.
    pub fn is_embeddable(&self, other: &Submodule) -> bool {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        self.dimension_vector().le(&other.dimension_vector())
    }

    /// Projection of a vector onto the submodule.
    pub fn project(&self, x: &ModuleVector) -> ModuleVector {
        let frames = x
            .frames()
            .iter()
            .zip(&self.frames)
            .map(|(v, q)| q * (q.adjoint() * v))
            .collect::<Vec<_>>();
        ModuleVector::from_frames(&self.sig, self.ambient, &frames).unwrap()
    }

    pub fn contains_vector(&self, x: &ModuleVector, tol: f64) -> bool {
        let proj = self.project(x);
        x.frames()
            .iter()
            .zip(proj.frames())
            .all(|(v, p)| linalg::operator_norm(&(v - p)) <= tol)
    }

    pub fn contains(&self, other: &Submodule, tol: f64) -> bool {
        other
            .frames
            .iter()
            .zip(&self.frames)
            .all(|(f, q)| linalg::operator_norm(&(f - q * (q.adjoint() * f))) <= tol)
    }

    /// `max_i || P_self - P_other ||_2` over the block frames.
    pub fn distance(&self, other: &Submodule) -> f64 {
        assert_eq!(self.ambient, other.ambient);
        self.frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| linalg::subspace_distance(a, b))
            .fold(0.0, f64::max)
    }

    /// Zero-pad the frames into a larger ambient module.
    pub fn embed(&self, new_ambient: usize) -> Submodule {
        assert!(new_ambient >= self.ambient);
        let frames = self
            .frames
            .iter()
            .zip(self.sig.blocks())
            .map(|(f, &n)| {
                let mut m = DMatrix::zeros(new_ambient * n, f.ncols());
                m.view_mut((0, 0), (f.nrows(), f.ncols())).copy_from(f);
                m
            })
            .collect();
        Submodule { sig: self.sig.clone(), ambient: new_ambient, frames }
    }

    /// A-module generators: one per frame column, placed in the first
    /// algebra column of its block.
    pub fn generators(&self) -> Vec<ModuleVector> {
        let mut out = Vec::new();
        for (i, f) in self.frames.iter().enumerate() {
            let ni = self.sig.blocks()[i];
            for c in 0..f.ncols() {
                let mut frames: Vec<DMatrix<C64>> = self
                    .sig
                    .blocks()
                    .iter()
                    .map(|&n| DMatrix::zeros(self.ambient * n, n))
                    .collect();
                let _ = ni;
                frames[i].set_column(0, &f.column(c));
                out.push(ModuleVector::from_frames(&self.sig, self.ambient, &frames).unwrap());
            }
        }
        out
    }
}

/// Smallest right-A-invariant subspace containing the generators; the frame
/// of block `i` spans the block-`i` frame columns of all generators.
pub fn span_submodule(sig: &AlgebraSignature, ambient: usize, generators: &[ModuleVector]) -> Result<Submodule> {
    let tol = Tolerances::default();
    for g in generators {
        if g.signature() != sig || g.len() != ambient {
            return Err(MphiError::ShapeMismatch(
                "generators must share ambient length and signature".into(),
            ));
        }
    }
    let frames = sig
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let cols: usize = generators.len() * n;
            let mut m = DMatrix::zeros(ambient * n, cols);
            for (g_idx, g) in generators.iter().enumerate() {
                let f = &g.frames()[i];
                m.view_mut((0, g_idx * n), (ambient * n, n)).copy_from(f);
            }
            let scale = linalg::operator_norm(&m).max(1.0);
            linalg::colspace_nominal(&m, Some(scale), &tol)
        })
        .collect();
    Ok(Submodule { sig: sig.clone(), ambient, frames })
}

/// Dixmier angle `c0(M, N)`: the largest singular value of `P_M P_N`,
/// equivalently the largest principal-angle cosine across the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DixmierAngleValue {
    pub c0: f64,
}

pub fn dixmier_angle(m: &Submodule, n: &Submodule) -> DixmierAngleValue {
    assert_eq!(m.ambient, n.ambient, "ambient mismatch");
    assert_eq!(m.sig, n.sig, "signature mismatch");
    let c0 = m
        .frames
        .iter()
        .zip(&n.frames)
        .map(|(a, b)| linalg::largest_cosine(a, b))
        .fold(0.0, f64::max);
    DixmierAngleValue { c0 }
}

/// Sum and intersection of two submodules. Near-threshold singular values of
/// the stacked frames raise `RankAmbiguous` instead of guessing.
pub fn sum_and_intersection(
    m: &Submodule,
    n: &Submodule,
    tol: &Tolerances,
) -> Result<(Submodule, Submodule)> {
    assert_eq!(m.ambient, n.ambient, "ambient mismatch");
    assert_eq!(m.sig, n.sig, "signature mismatch");
    let mut sum_frames = Vec::new();
    let mut int_frames = Vec::new();
    for (qm, qn) in m.frames.iter().zip(&n.frames) {
        let rows = qm.nrows();
        let dm = qm.ncols();
        let dn = qn.ncols();
        let mut stacked = DMatrix::zeros(rows, dm + dn);
        stacked.view_mut((0, 0), (rows, dm)).copy_from(qm);
        stacked.view_mut((0, dm), (rows, dn)).copy_from(qn);
        let sum = linalg::colspace(&stacked, Some(1.0), tol)?;
        // intersection vectors come from null combinations Q_m a = -Q_n b
        let null = linalg::nullspace(&stacked, Some(1.0), tol)?;
        let int_dim = dm + dn - sum.ncols();
        debug_assert_eq!(null.ncols(), int_dim);
        let mut raw = DMatrix::zeros(rows, int_dim);
        for c in 0..int_dim {
            let a = null.view((0, c), (dm, 1)).into_owned();
            let v = qm * DVector::from_column_slice(a.as_slice());
            raw.set_column(c, &v);
        }
        let inter = if int_dim == 0 {
            DMatrix::zeros(rows, 0)
        } else {
            let q = linalg::colspace_nominal(&raw, None, tol);
            debug_assert_eq!(q.ncols(), int_dim);
            q
        };
        sum_frames.push(sum);
        int_frames.push(inter);
    }
    Ok((
        Submodule { sig: m.sig.clone(), ambient: m.ambient, frames: sum_frames },
        Submodule { sig: m.sig.clone(), ambient: m.ambient, frames: int_frames },
    ))
}

/// A-linear map between two submodules, stored per block in the frame
/// coordinates of its source and target.
#[derive(Debug, Clone)]
pub struct SubmoduleMap {
    pub source_dims: DimensionVector,
    pub target_dims: DimensionVector,
    pub blocks: Vec<DMatrix<C64>>,
}

impl SubmoduleMap {
    pub fn identity(dims: &DimensionVector) -> Self {
        SubmoduleMap {
            source_dims: dims.clone(),
            target_dims: dims.clone(),
            blocks: dims.counts().iter().map(|&d| DMatrix::identity(d as usize, d as usize)).collect(),
        }
    }

    pub fn zero(source: &DimensionVector, target: &DimensionVector) -> Self {
        SubmoduleMap {
            source_dims: source.clone(),
            target_dims: target.clone(),
            blocks: source
                .counts()
                .iter()
                .zip(target.counts())
                .map(|(&s, &t)| DMatrix::zeros(t as usize, s as usize))
                .collect(),
        }
    }
}

// --- full-space complex coordinates and the serialized form ---

/// Coordinate layout of `L_N(A)` as `C^{N * dim A}`: entry-major, then block,
/// then row-major inside the block.
fn full_coords(x: &ModuleVector) -> DVector<C64> {
    let sig = x.signature();
    let dim_a = sig.complex_dim();
    let mut v = DVector::zeros(x.len() * dim_a);
    let mut off = 0;
    for e in x.entries() {
        for b in e.blocks() {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    v[off] = b[(r, c)];
                    off += 1;
                }
            }
        }
    }
    v
}

fn vector_from_full_coords(sig: &AlgebraSignature, ambient: usize, v: &DVector<C64>) -> ModuleVector {
    let mut entries = Vec::with_capacity(ambient);
    let mut off = 0;
    for _ in 0..ambient {
        let mut blocks = Vec::with_capacity(sig.block_count());
        for &n in sig.blocks() {
            let mut b = DMatrix::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    b[(r, c)] = v[off];
                    off += 1;
                }
            }
            blocks.push(b);
        }
        entries.push(AlgebraElement::from_blocks(sig, blocks).unwrap());
    }
    ModuleVector::new(sig, entries).unwrap()
}

impl Submodule {
    /// Orthonormal basis of the underlying complex subspace, one basis
    /// vector per row, in the canonical full coordinates.
    pub fn complex_basis(&self) -> DMatrix<C64> {
        let dim_a = self.sig.complex_dim();
        let d = self.complex_dim();
        let mut basis = DMatrix::zeros(d, self.ambient * dim_a);
        let mut row = 0;
        for (i, f) in self.frames.iter().enumerate() {
            let ni = self.sig.blocks()[i];
            for fc in 0..f.ncols() {
                for ac in 0..ni {
                    // frame column fc placed in algebra column ac of block i
                    let mut frames: Vec<DMatrix<C64>> = self
                        .sig
                        .blocks()
                        .iter()
                        .map(|&n| DMatrix::zeros(self.ambient * n, n))
                        .collect();
                    frames[i].set_column(ac, &f.column(fc));
                    let x = ModuleVector::from_frames(&self.sig, self.ambient, &frames).unwrap();
                    basis.set_row(row, &full_coords(&x).transpose());
                    row += 1;
                }
            }
        }
        debug_assert_eq!(row, d);
        basis
    }

    /// Rebuild a submodule from a raw complex basis (rows are vectors in
    /// the canonical full coordinates). Certifies right-A-invariance within
    /// `tol.sub` and per-block integrality of the dimensions.
    pub fn from_complex_basis(
        sig: &AlgebraSignature,
        ambient: usize,
        basis: &DMatrix<C64>,
        tol: &Tolerances,
    ) -> Result<Submodule> {
        let dim_a = sig.complex_dim();
        if basis.ncols() != ambient * dim_a {
            return Err(MphiError::ShapeMismatch(format!(
                "basis has {} columns, ambient needs {}",
                basis.ncols(),
                ambient * dim_a
            )));
        }
        let vectors: Vec<ModuleVector> = (0..basis.nrows())
            .map(|r| vector_from_full_coords(sig, ambient, &basis.row(r).transpose()))
            .collect();
        // invariance certificate: v * a stays inside the span
        let span_q = basis.transpose(); // columns = basis vectors, unconjugated
        let proj = &span_q * (span_q.adjoint() * &span_q).try_inverse().ok_or_else(|| {
            MphiError::Parse("basis rows are not linearly independent".into())
        })? * span_q.adjoint();
        let mut worst: f64 = 0.0;
        for v in &vectors {
            for a in algebra_basis(sig) {
                let va = full_coords(&v.right_mul(&a));
                let res = &va - &proj * &va;
                worst = worst.max(res.norm() / va.norm().max(1e-300));
            }
        }
        if worst > tol.sub {
            return Err(MphiError::NotInvariant { residual: worst, tol: tol.sub });
        }
        let sub = span_submodule(sig, ambient, &vectors)?;
        // integrality: the span over A must not have gained dimensions
        let d_span = sub.complex_dim();
        if d_span != basis.nrows() {
            // complex dims disagree with an invariant subspace of this size
            for (i, f) in sub.frames.iter().enumerate() {
                let ni = sig.blocks()[i];
                let got = f.ncols() * ni;
                if got % ni != 0 {
                    return Err(MphiError::NonIntegralBlock { block: i, dim: got, unit: ni });
                }
            }
            return Err(MphiError::NotInvariant {
                residual: (d_span as f64 - basis.nrows() as f64).abs(),
                tol: 0.0,
            });
        }
        Ok(sub)
    }
}

#[derive(Serialize, Deserialize)]
struct SubmoduleRepr {
    ambient: usize,
    signature: AlgebraSignature,
    basis: Vec<Vec<[f64; 2]>>,
    dim_vector: DimensionVector,
}

impl Serialize for Submodule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubmoduleRepr {
            ambient: self.ambient,
            signature: self.sig.clone(),
            basis: linalg::matrix_to_rows(&self.complex_basis()),
            dim_vector: self.dimension_vector(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Submodule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SubmoduleRepr::deserialize(d)?;
        let basis = linalg::matrix_from_rows(&repr.basis).map_err(serde::de::Error::custom)?;
        let sub = Submodule::from_complex_basis(
            &repr.signature,
            repr.ambient,
            &basis,
            &Tolerances::default(),
        )
        .map_err(serde::de::Error::custom)?;
        if sub.dimension_vector() != repr.dim_vector {
            return Err(serde::de::Error::custom("dim_vector does not match basis"));
        }
        Ok(sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::default_signature;
    use rand::Rng;
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
                AlgebraElement::from_blocks(sig, blocks).unwrap()
            })
            .collect();
        ModuleVector::new(sig, entries).unwrap()
    }

    fn e11_element(sig: &AlgebraSignature) -> AlgebraElement {
        // e_11 in the first block, zero elsewhere
        let mut blocks: Vec<DMatrix<C64>> =
            sig.blocks().iter().map(|&n| DMatrix::zeros(n, n)).collect();
        blocks[0][(0, 0)] = C64::new(1.0, 0.0);
        AlgebraElement::from_blocks(sig, blocks).unwrap()
    }

    #[test]
    fn span_of_free_generator() {
        let sig = default_signature();
        let e1 = ModuleVector::standard_basis(&sig, 2, 0);
        let s = span_submodule(&sig, 2, &[e1]).unwrap();
        assert_eq!(s.dimension_vector(), DimensionVector(vec![2, 1]));
    }

    #[test]
    fn span_of_projection_generator() {
        let sig = default_signature();
        let mut v = ModuleVector::zero(&sig, 2);
        v = v.add(&ModuleVector::new(&sig, vec![e11_element(&sig), AlgebraElement::zero(&sig)]).unwrap());
        let s = span_submodule(&sig, 2, &[v]).unwrap();
        assert_eq!(s.dimension_vector(), DimensionVector(vec![1, 0]));
    }

    #[test]
    fn span_absorbs_right_multiples() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e1 = ModuleVector::standard_basis(&sig, 2, 0);
        let a = crate::testsupport::random_element(&sig, &mut rng);
        let s1 = span_submodule(&sig, 2, &[e1.clone()]).unwrap();
        let s2 = span_submodule(&sig, 2, &[e1.clone(), e1.right_mul(&a)]).unwrap();
        assert!(s1.distance(&s2) < 1e-10);
    }

    #[test]
    fn dimension_vector_of_full_module() {
        let sig = default_signature();
        let full = Submodule::full(&sig, 3);
        assert_eq!(full.dimension_vector(), DimensionVector(vec![6, 3]));
        let zero = Submodule::zero(&sig, 3);
        assert_eq!(zero.dimension_vector(), DimensionVector(vec![0, 0]));
    }

    #[test]
    fn complement_dimensions_and_orthogonality() {
        let sig = default_signature();
        // L_1 inside L_2 has complement spanned by e_2
        let l1 = Submodule::coordinate_span(&sig, 2, &[0]);
        let c = l1.orth_complement();
        let e2 = Submodule::coordinate_span(&sig, 2, &[1]);
        assert!(c.distance(&e2) < 1e-12);

        // zero complements to full
        let z = Submodule::zero(&sig, 2);
        assert!(z.orth_complement().distance(&Submodule::full(&sig, 2)) < 1e-12);

        // span{(p,0)} with p = e11: complement dims (4,2)-(1,0)
        let v = ModuleVector::new(&sig, vec![e11_element(&sig), AlgebraElement::zero(&sig)]).unwrap();
        let s = span_submodule(&sig, 2, &[v]).unwrap();
        assert_eq!(s.orth_complement().dimension_vector(), DimensionVector(vec![3, 2]));
    }

    #[test]
    fn embeddable_partial_order() {
        let sig = default_signature();
        let s1 = Submodule::coordinate_span(&sig, 3, &[0]);
        let s2 = Submodule::coordinate_span(&sig, 3, &[0, 1]);
        assert!(s1.is_embeddable(&s1));
        assert!(s1.is_embeddable(&s2));
        assert!(!s2.is_embeddable(&s1));

        // incomparable dimension vectors
        assert!(!DimensionVector(vec![1, 0]).le(&DimensionVector(vec![0, 2])));
        assert!(!DimensionVector(vec![0, 2]).le(&DimensionVector(vec![1, 0])));
    }

    #[test]
    fn embeddable_transitive_on_random_triples() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let gens = |n: usize, rng: &mut ChaCha8Rng| {
                (0..n).map(|_| random_vector(&sig, 3, rng)).collect::<Vec<_>>()
            };
            let a = span_submodule(&sig, 3, &gens(1, &mut rng)).unwrap();
            let b = span_submodule(&sig, 3, &gens(2, &mut rng)).unwrap();
            let c = span_submodule(&sig, 3, &gens(3, &mut rng)).unwrap();
            if a.is_embeddable(&b) && b.is_embeddable(&c) {
                assert!(a.is_embeddable(&c));
            }
        }
    }

    #[test]
    fn dixmier_basics() {
        let sig = default_signature();
        let l1 = Submodule::coordinate_span(&sig, 2, &[0]);
        let e2 = Submodule::coordinate_span(&sig, 2, &[1]);
        assert!((dixmier_angle(&l1, &l1).c0 - 1.0).abs() < 1e-12);
        assert!(dixmier_angle(&l1, &e2).c0 < 1e-12);
        assert!((dixmier_angle(&l1, &e2).c0 - dixmier_angle(&e2, &l1).c0).abs() < 1e-14);
    }

    #[test]
    fn dixmier_two_lines_analytic() {
        // lines in A^2 over the commutative signature (1): frames are plain
        // 2-vectors, so the angle is classical planar geometry.
        let sig = AlgebraSignature::new(vec![1]).unwrap();
        for &theta in &[0.3_f64, 0.912, 1.2, 0.02] {
            let u = ModuleVector::new(
                &sig,
                vec![
                    AlgebraElement::scalar(&sig, C64::new(1.0, 0.0)),
                    AlgebraElement::scalar(&sig, C64::new(0.0, 0.0)),
                ],
            )
            .unwrap();
            let v = ModuleVector::new(
                &sig,
                vec![
                    AlgebraElement::scalar(&sig, C64::new(theta.cos(), 0.0)),
                    AlgebraElement::scalar(&sig, C64::new(theta.sin(), 0.0)),
                ],
            )
            .unwrap();
            let m = span_submodule(&sig, 2, &[u]).unwrap();
            let n = span_submodule(&sig, 2, &[v]).unwrap();
            assert!((dixmier_angle(&m, &n).c0 - theta.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn sum_and_intersection_with_complement() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tol = Tolerances::default();
        for _ in 0..20 {
            let g: Vec<ModuleVector> = (0..2).map(|_| random_vector(&sig, 3, &mut rng)).collect();
            let m = span_submodule(&sig, 3, &g).unwrap();
            let mc = m.orth_complement();
            let (sum, int) = sum_and_intersection(&m, &mc, &tol).unwrap();
            assert!(sum.distance(&Submodule::full(&sig, 3)) < 1e-9);
            assert!(int.is_zero());
            // modular dimension identity
            let lhs = &sum.dimension_vector() + &int.dimension_vector();
            let rhs = &m.dimension_vector() + &mc.dimension_vector();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sum_of_l1_and_e2_is_ambient() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let l1 = Submodule::coordinate_span(&sig, 2, &[0]);
        let e2 = Submodule::coordinate_span(&sig, 2, &[1]);
        let (sum, int) = sum_and_intersection(&l1, &e2, &tol).unwrap();
        assert!(sum.distance(&Submodule::full(&sig, 2)) < 1e-12);
        assert!(int.is_zero());
    }

    #[test]
    fn dimension_additive_and_iso_invariant() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // invariance under the coordinate permutation and the invertible
        // right multiplier isomorphisms applied to generators
        for _ in 0..20 {
            let g = random_vector(&sig, 3, &mut rng);
            let s = span_submodule(&sig, 3, &[g.clone()]).unwrap();
            // permute coordinates
            let perm = ModuleVector::new(
                &sig,
                vec![g.entry(2).clone(), g.entry(0).clone(), g.entry(1).clone()],
            )
            .unwrap();
            let sp = span_submodule(&sig, 3, &[perm]).unwrap();
            assert_eq!(s.dimension_vector(), sp.dimension_vector());
            // right-multiply by a well-conditioned invertible element
            let a = &AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0))
                + &crate::testsupport::random_element(&sig, &mut rng);
            if a.invertibility_margin() > 1e-3 {
                let sm = span_submodule(&sig, 3, &[g.right_mul(&a)]).unwrap();
                assert_eq!(s.dimension_vector(), sm.dimension_vector());
            }
        }
    }

    #[test]
    fn complex_basis_round_trip() {
        let sig = default_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g: Vec<ModuleVector> = (0..2).map(|_| random_vector(&sig, 2, &mut rng)).collect();
        let s = span_submodule(&sig, 2, &g).unwrap();
        let basis = s.complex_basis();
        // orthonormal rows
        let gram = &basis * basis.adjoint();
        assert!(
            linalg::operator_norm(&(gram - DMatrix::identity(basis.nrows(), basis.nrows()))) < 1e-10
        );
        let back =
            Submodule::from_complex_basis(&sig, 2, &basis, &Tolerances::default()).unwrap();
        assert!(s.distance(&back) < 1e-9);

        let json = serde_json::to_string(&s).unwrap();
        let parsed: Submodule = serde_json::from_str(&json).unwrap();
        assert!(s.distance(&parsed) < 1e-9);
    }

    #[test]
    fn non_invariant_basis_rejected() {
        let sig = default_signature();
        // single complex vector that is not an A-submodule: a lone frame
        // column in the matrix block spans 1 complex dim, but the A-span
        // needs 2.
        let dim_a = sig.complex_dim();
        let mut basis = DMatrix::<C64>::zeros(1, 2 * dim_a);
        basis[(0, 0)] = C64::new(1.0, 0.0); // e11 component only
        let err = Submodule::from_complex_basis(&sig, 2, &basis, &Tolerances::default());
        assert!(err.is_err());
    }
}
