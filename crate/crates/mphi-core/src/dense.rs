//! Rectangular A-linear operators `L_M(A) -> L_N(A)` as matrices over `A`:
//! composition, adjoint, kernel and image, closed-range margin,
//! block-diagonal decompositions, the K0-valued index, generalized inverses,
//! the generalized Weyl flags, and the six-term exact-sequence check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraSignature, DimensionVector, IndexValue};
use crate::error::{MphiError, Result};
use crate::linalg::{self, C64, Tolerances};
use crate::module::{sum_and_intersection, ModuleVector, Submodule};

/// An A-linear operator given by a `codomain x domain` matrix of algebra
/// elements acting by left multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    sig: AlgebraSignature,
    domain: usize,
    codomain: usize,
    entries: Vec<Vec<AlgebraElement>>, // entries[row][col]
}

impl DenseOperator {
    pub fn from_entries(
        sig: &AlgebraSignature,
        domain: usize,
        codomain: usize,
        entries: Vec<Vec<AlgebraElement>>,
    ) -> Result<Self> {
        if entries.len() != codomain || entries.iter().any(|r| r.len() != domain) {
            return Err(MphiError::ShapeMismatch(format!(
                "entry grid must be {codomain} x {domain}"
            )));
        }
        for row in &entries {
            for e in row {
                if e.signature() != sig {
                    return Err(MphiError::ShapeMismatch("entry signature mismatch".into()));
                }
            }
        }
        Ok(DenseOperator { sig: sig.clone(), domain, codomain, entries })
    }

    pub fn zero(sig: &AlgebraSignature, domain: usize, codomain: usize) -> Self {
        let entries = (0..codomain)
            .map(|_| (0..domain).map(|_| AlgebraElement::zero(sig)).collect())
            .collect();
        DenseOperator { sig: sig.clone(), domain, codomain, entries }
    }

    pub fn identity(sig: &AlgebraSignature, n: usize) -> Self {
        let mut op = DenseOperator::zero(sig, n, n);
        for i in 0..n {
            op.entries[i][i] = AlgebraElement::identity(sig);
        }
        op
    }

    /// Diagonal operator from the given entries.
    pub fn diagonal(sig: &AlgebraSignature, diag: &[AlgebraElement]) -> Self {
        let n = diag.len();
        let mut op = DenseOperator::zero(sig, n, n);
        for (i, d) in diag.iter().enumerate() {
            op.entries[i][i] = d.clone();
        }
        op
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.sig
    }

    pub fn domain_len(&self) -> usize {
        self.domain
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain
    }

    pub fn entry(&self, row: usize, col: usize) -> &AlgebraElement {
        &self.entries[row][col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: AlgebraElement) {
        self.entries[row][col] = value;
    }

    /// Per-block complex representation: block `i` is the
    /// `(codomain n_i) x (domain n_i)` matrix assembled from the entries.
    pub fn frames(&self) -> Vec<DMatrix<C64>> {
        self.sig
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut m = DMatrix::zeros(self.codomain * n, self.domain * n);
                for (r, row) in self.entries.iter().enumerate() {
                    for (c, e) in row.iter().enumerate() {
                        let b = e.block(i);
                        m.view_mut((r * n, c * n), (n, n)).copy_from(b);
                    }
                }
                m
            })
            .collect()
    }

    pub fn from_frames(
        sig: &AlgebraSignature,
        domain: usize,
        codomain: usize,
        frames: &[DMatrix<C64>],
    ) -> Result<Self> {
        if frames.len() != sig.block_count() {
            return Err(MphiError::ShapeMismatch("frame count mismatch".into()));
        }
        let mut op = DenseOperator::zero(sig, domain, codomain);
        for (i, &n) in sig.blocks().iter().enumerate() {
            let f = &frames[i];
            if f.nrows() != codomain * n || f.ncols() != domain * n {
                return Err(MphiError::ShapeMismatch(format!(
                    "frame {i} is {}x{}, expected {}x{}",
                    f.nrows(),
                    f.ncols(),
                    codomain * n,
                    domain * n
                )));
            }
            for r in 0..codomain {
                for c in 0..domain {
                    let mut blocks: Vec<DMatrix<C64>> = op.entries[r][c].blocks().to_vec();
                    blocks[i] = f.view((r * n, c * n), (n, n)).into_owned();
                    op.entries[r][c] = AlgebraElement::from_blocks(sig, blocks)?;
                }
            }
        }
        Ok(op)
    }

    pub fn apply(&self, x: &ModuleVector) -> Result<ModuleVector> {
        if x.len() != self.domain {
            return Err(MphiError::ShapeMismatch("vector length != domain".into()));
        }
        let frames: Vec<DMatrix<C64>> = self
            .frames()
            .iter()
            .zip(x.frames())
            .map(|(b, v)| b * v)
            .collect();
        ModuleVector::from_frames(&self.sig, self.codomain, &frames)
    }

    /// Adjoint: starred transpose of the entry grid.
    pub fn adjoint(&self) -> DenseOperator {
        let entries = (0..self.domain)
            .map(|r| (0..self.codomain).map(|c| self.entries[c][r].star()).collect())
            .collect();
        DenseOperator {
            sig: self.sig.clone(),
            domain: self.codomain,
            codomain: self.domain,
            entries,
        }
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(MphiError::ShapeMismatch("operator shapes differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a + b).collect())
            .collect();
        Ok(DenseOperator {
            sig: self.sig.clone(),
            domain: self.domain,
            codomain: self.codomain,
            entries,
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> DenseOperator {
        DenseOperator {
            sig: self.sig.clone(),
            domain: self.domain,
            codomain: self.codomain,
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|e| e.scale(c)).collect())
                .collect(),
        }
    }

    /// Operator norm: the largest singular value over the block frames.
    pub fn operator_norm(&self) -> f64 {
        self.frames().iter().map(linalg::operator_norm).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.operator_norm() <= tol
    }
}

/// `G ∘ F`; matrix product over `A`.
pub fn compose(g: &DenseOperator, f: &DenseOperator) -> Result<DenseOperator> {
    if g.domain != f.codomain {
        return Err(MphiError::ShapeMismatch(format!(
            "compose: G domain {} != F codomain {}",
            g.domain, f.codomain
        )));
    }
    if g.sig != f.sig {
        return Err(MphiError::ShapeMismatch("signature mismatch".into()));
    }
    let frames: Vec<DMatrix<C64>> = g
        .frames()
        .iter()
        .zip(f.frames())
        .map(|(bg, bf)| bg * bf)
        .collect();
    DenseOperator::from_frames(&g.sig, f.domain, g.codomain, &frames)
}

impl DenseOperator {
    /// Kernel as a certified submodule; per block the complex nullspace of
    /// the frame, which is automatically right-A-invariant.
    pub fn kernel(&self, tol: &Tolerances) -> Result<Submodule> {
        let scale = self.operator_norm();
        let frames = self
            .frames()
            .iter()
            .map(|b| linalg::nullspace(b, Some(scale.max(1e-300)), tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Submodule::from_frames(&self.sig, self.domain, frames))
    }

    /// Image (column space) as a certified submodule.
    pub fn image(&self, tol: &Tolerances) -> Result<Submodule> {
        let scale = self.operator_norm();
        let frames = self
            .frames()
            .iter()
            .map(|b| linalg::colspace(b, Some(scale.max(1e-300)), tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Submodule::from_frames(&self.sig, self.codomain, frames))
    }

    /// Smallest nonzero singular value of the complex representation,
    /// relative rank decided with the ambiguity band. At finite dimension
    /// every range is closed; families whose margin decays to zero under
    /// refinement are the stand-in for non-closed ranges.
    pub fn closed_range_margin(&self, tol: &Tolerances) -> Result<f64> {
        let scale = self.operator_norm();
        if scale == 0.0 {
            return Err(MphiError::ZeroOperator);
        }
        let mut margin = f64::INFINITY;
        for b in self.frames() {
            let sv = linalg::singular_values(&b);
            let rank = linalg::decide_rank_from_sv(&sv, scale, tol)?;
            if rank > 0 {
                margin = margin.min(sv[rank - 1]);
            }
        }
        if margin.is_infinite() {
            return Err(MphiError::ZeroOperator);
        }
        Ok(margin)
    }

    /// K0-valued index `[ker] - [coker]`.
    pub fn index(&self, tol: &Tolerances) -> Result<IndexValue> {
        let ker = self.kernel(tol)?;
        let coker = self.image(tol)?.orth_complement();
        Ok(IndexValue::from_difference(
            &ker.dimension_vector(),
            &coker.dimension_vector(),
        ))
    }
}

/// Canonical block-diagonal decomposition witness
/// `ker^⊥ ⊕ ker -> Im ⊕ Im^⊥` with an isomorphism in the leading corner.
#[derive(Debug, Clone)]
pub struct DecompositionWitness {
    pub m1: Submodule,
    pub n1: Submodule,
    pub m2: Submodule,
    pub n2: Submodule,
    pub iso_margin: f64,
    pub offdiag_residual: f64,
}

impl DenseOperator {
    pub fn mphi_decomposition(&self, tol: &Tolerances) -> Result<DecompositionWitness> {
        let margin = self.closed_range_margin(tol)?;
        let n1 = self.kernel(tol)?;
        let m1 = n1.orth_complement();
        let m2 = self.image(tol)?;
        let n2 = m2.orth_complement();
        // off-diagonal residual: P_{N2} F P_{M1} plus F P_{N1}
        let mut off: f64 = 0.0;
        for ((bf, qm1), (qn1, qn2)) in self
            .frames()
            .iter()
            .zip(m1.frames())
            .zip(n1.frames().iter().zip(n2.frames()))
        {
            let f_m1 = bf * qm1;
            off = off.max(linalg::operator_norm(&(qn2.adjoint() * &f_m1)));
            off = off.max(linalg::operator_norm(&(bf * qn1)));
        }
        Ok(DecompositionWitness {
            m1,
            n1,
            m2,
            n2,
            iso_margin: margin,
            offdiag_residual: off,
        })
    }
}

/// Generalized-inverse certificate.
#[derive(Debug, Clone)]
pub struct RegularityWitness {
    pub pseudo_inverse: DenseOperator,
    pub residual_fgf: f64,
    pub residual_gfg: f64,
    /// Residual of the right-action commutation certificate.
    pub right_action_residual: f64,
}

impl DenseOperator {
    /// Moore-Penrose inverse of the complex representation, certified
    /// A-linear by construction and re-checked against the right action.
    pub fn pseudo_inverse(&self, tol: &Tolerances) -> Result<RegularityWitness> {
        let scale = self.operator_norm().max(1e-300);
        let frames: Vec<DMatrix<C64>> = self
            .frames()
            .iter()
            .map(|b| linalg::pseudo_inverse(b, Some(scale), tol))
            .collect::<Result<Vec<_>>>()?;
        let g = DenseOperator::from_frames(&self.sig, self.codomain, self.domain, &frames)?;
        let fgf = compose(self, &compose(&g, self)?)?;
        let gfg = compose(&g, &compose(self, &g)?)?;
        let residual_fgf = fgf.sub(self)?.operator_norm();
        let residual_gfg = gfg.sub(&g)?.operator_norm();
        // right-action certificate: G(x a) = (G x) a on a basis probe
        let mut right_action_residual: f64 = 0.0;
        if self.codomain > 0 {
            let x = ModuleVector::standard_basis(&self.sig, self.codomain, 0);
            for a in crate::algebra::algebra_basis(&self.sig) {
                let lhs = g.apply(&x.right_mul(&a))?;
                let rhs = g.apply(&x)?.right_mul(&a);
                let d = lhs
                    .frames()
                    .iter()
                    .zip(rhs.frames())
                    .map(|(u, v)| linalg::operator_norm(&(u - v)))
                    .fold(0.0, f64::max);
                right_action_residual = right_action_residual.max(d);
            }
        }
        Ok(RegularityWitness { pseudo_inverse: g, residual_fgf, residual_gfg, right_action_residual })
    }
}

/// Flags for the generalized Weyl classes of an operator with decided range:
/// `gc_weyl` iff `ker F ≅ Im F^⊥`, the semi-Weyl flags use embeddability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeylFlags {
    pub gc_weyl: bool,
    pub upper_semi_weyl: bool,
    pub lower_semi_weyl: bool,
}

impl DenseOperator {
    pub fn weyl_gc_flags(&self, tol: &Tolerances) -> Result<WeylFlags> {
        let ker = self.kernel(tol)?.dimension_vector();
        let coker = self.image(tol)?.orth_complement().dimension_vector();
        Ok(WeylFlags {
            gc_weyl: ker == coker,
            upper_semi_weyl: ker.le(&coker),
            lower_semi_weyl: coker.le(&ker),
        })
    }
}

/// Per-node report of the six-term kernel/cokernel sequence of a composition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactSequenceReport {
    pub dims: ExactSequenceDims,
    /// d(ker F) - d(ker GF) + d(ker G) - d(cok F) + d(cok GF) - d(cok G)
    pub alternating_sum: Vec<i64>,
    /// Worst subspace distance over the five interior exactness conditions.
    pub max_residual: f64,
    pub node_residuals: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactSequenceDims {
    pub ker_f: DimensionVector,
    pub ker_gf: DimensionVector,
    pub ker_g: DimensionVector,
    pub cok_f: DimensionVector,
    pub cok_gf: DimensionVector,
    pub cok_g: DimensionVector,
}

/// Verify exactness of
/// `0 -> ker F -> ker GF -> ker G -> cok F -> cok GF -> cok G -> 0`
/// for regular composable `F`, `G`.
pub fn exact_sequence_check(
    f: &DenseOperator,
    g: &DenseOperator,
    tol: &Tolerances,
) -> Result<ExactSequenceReport> {
    let gf = compose(g, f)?;
    for (name, op) in [("F", f), ("G", g), ("GF", &gf)] {
        if !op.is_zero(0.0) {
            op.pseudo_inverse(tol)
                .map_err(|e| MphiError::NotRegular(format!("{name}: {e}")))?;
        }
    }

    let ker_f = f.kernel(tol)?;
    let ker_gf = gf.kernel(tol)?;
    let ker_g = g.kernel(tol)?;
    let im_f = f.image(tol)?;
    let im_gf = gf.image(tol)?;
    let im_g = g.image(tol)?;
    let cok_f = im_f.orth_complement();
    let cok_gf = im_gf.orth_complement();
    let cok_g = im_g.orth_complement();

    let mut node_residuals = Vec::with_capacity(6);

    // node ker F: inclusion into ker GF injective, i.e. ker F ⊆ ker GF
    node_residuals.push(containment_residual(&ker_f, &ker_gf));

    // node ker GF: kernel of F|_{ker GF} equals ker F
    let f_on_kergf = restrict_map(f, &ker_gf, None)?;
    let ker_of_restriction = frames_nullspace(&f_on_kergf, tol)?;
    let ker_f_in_coords = coords_of(&ker_f, &ker_gf);
    node_residuals.push(frame_distance(&ker_of_restriction, &ker_f_in_coords));

    // node ker G: image of F|_{ker GF} equals ker G ∩ Im F
    let im_of_restriction = map_image_in_ambient(&f_on_kergf, &ker_gf, f.codomain, tol)?;
    let (_, kerg_cap_imf) = sum_and_intersection(&ker_g, &im_f, tol)?;
    node_residuals.push(im_of_restriction.distance(&kerg_cap_imf).max(0.0));

    // node cok F: image of P_{cokF}|_{ker G} equals kernel of the induced map
    // cok F -> cok GF
    let delta_image = project_into(&ker_g, &cok_f, tol)?;
    let g_bar = induced_map(g, &cok_f, &cok_gf)?;
    let ker_gbar = frames_nullspace_in_ambient(&g_bar, &cok_f, tol)?;
    node_residuals.push(delta_image.distance(&ker_gbar));

    // node cok GF: image of the induced map equals kernel of the projection
    // cok GF -> cok G
    let gbar_image = map_image_in_ambient_frames(&g_bar, &cok_gf, tol)?;
    let pi_bar = induced_projection(&cok_gf, &cok_g)?;
    let ker_pibar = frames_nullspace_in_ambient_frames(&pi_bar, &cok_gf, tol)?;
    node_residuals.push(gbar_image.distance(&ker_pibar));

    // node cok G: the projection cok GF -> cok G is surjective
    let pi_rank: u64 = pi_bar
        .iter()
        .map(|b| linalg::nominal_rank(b, Some(1.0), tol) as u64)
        .sum();
    let cokg_total: u64 = cok_g.dimension_vector().counts().iter().sum();
    node_residuals.push(if pi_rank == cokg_total { 0.0 } else { 1.0 });

    let dims = ExactSequenceDims {
        ker_f: ker_f.dimension_vector(),
        ker_gf: ker_gf.dimension_vector(),
        ker_g: ker_g.dimension_vector(),
        cok_f: cok_f.dimension_vector(),
        cok_gf: cok_gf.dimension_vector(),
        cok_g: cok_g.dimension_vector(),
    };
    let k = f.sig.block_count();
    let mut alternating_sum = vec![0i64; k];
    for i in 0..k {
        alternating_sum[i] = dims.ker_f.0[i] as i64 - dims.ker_gf.0[i] as i64
            + dims.ker_g.0[i] as i64
            - dims.cok_f.0[i] as i64
            + dims.cok_gf.0[i] as i64
            - dims.cok_g.0[i] as i64;
    }
    let max_residual = node_residuals.iter().cloned().fold(0.0, f64::max);
    Ok(ExactSequenceReport { dims, alternating_sum, max_residual, node_residuals })
}

fn containment_residual(inner: &Submodule, outer: &Submodule) -> f64 {
    inner
        .frames()
        .iter()
        .zip(outer.frames())
        .map(|(f, q)| linalg::operator_norm(&(f - q * (q.adjoint() * f))))
        .fold(0.0, f64::max)
}

/// Frames of `op` restricted to a source submodule (and optionally
/// compressed to a target submodule).
fn restrict_map(
    op: &DenseOperator,
    source: &Submodule,
    target: Option<&Submodule>,
) -> Result<Vec<DMatrix<C64>>> {
    Ok(op
        .frames()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let m = b * source.frame(i);
            match target {
                Some(t) => t.frame(i).adjoint() * m,
                None => m,
            }
        })
        .collect())
}

fn frames_nullspace(frames: &[DMatrix<C64>], tol: &Tolerances) -> Result<Vec<DMatrix<C64>>> {
    let scale = frames.iter().map(linalg::operator_norm).fold(0.0, f64::max);
    frames
        .iter()
        .map(|b| linalg::nullspace(b, Some(scale.max(1e-300)), tol))
        .collect()
}

/// Coordinates of submodule `inner` inside the frame basis of `outer`.
fn coords_of(inner: &Submodule, outer: &Submodule) -> Vec<DMatrix<C64>> {
    inner
        .frames()
        .iter()
        .zip(outer.frames())
        .map(|(f, q)| q.adjoint() * f)
        .collect()
}

fn frame_distance(a: &[DMatrix<C64>], b: &[DMatrix<C64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            if x.ncols() == 0 && y.ncols() == 0 {
                0.0
            } else if x.nrows() == 0 {
                0.0
            } else {
                linalg::subspace_distance(
                    &linalg::colspace_nominal(x, None, &Tolerances::default()),
                    &linalg::colspace_nominal(y, None, &Tolerances::default()),
                )
            }
        })
        .fold(0.0, f64::max)
}

/// Image of restricted frames, as a submodule of the ambient codomain.
fn map_image_in_ambient(
    frames: &[DMatrix<C64>],
    _source: &Submodule,
    codomain: usize,
    tol: &Tolerances,
) -> Result<Submodule> {
    let sig = _source.signature().clone();
    let scale = frames.iter().map(linalg::operator_norm).fold(0.0, f64::max);
    let cols = frames
        .iter()
        .map(|b| linalg::colspace(b, Some(scale.max(1e-300)), tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(Submodule::from_frames(&sig, codomain, cols))
}

/// Orthogonal projection of a submodule into another, as a submodule.
fn project_into(source: &Submodule, target: &Submodule, tol: &Tolerances) -> Result<Submodule> {
    let frames = source
        .frames()
        .iter()
        .zip(target.frames())
        .map(|(f, q)| {
            let proj = q * (q.adjoint() * f);
            linalg::colspace_nominal(&proj, None, tol)
        })
        .collect();
    Ok(Submodule::from_frames(
        source.signature(),
        target.ambient(),
        frames,
    ))
}

/// The induced map `cok F -> cok GF`: compress `G` between the two
/// complements (frame coordinates target x source).
fn induced_map(
    g: &DenseOperator,
    cok_f: &Submodule,
    cok_gf: &Submodule,
) -> Result<Vec<DMatrix<C64>>> {
    Ok(g.frames()
        .iter()
        .enumerate()
        .map(|(i, b)| cok_gf.frame(i).adjoint() * b * cok_f.frame(i))
        .collect())
}

/// The induced projection `cok GF -> cok G` in frame coordinates.
fn induced_projection(cok_gf: &Submodule, cok_g: &Submodule) -> Result<Vec<DMatrix<C64>>> {
    Ok(cok_gf
        .frames()
        .iter()
        .zip(cok_g.frames())
        .map(|(qgf, qg)| qg.adjoint() * qgf)
        .collect())
}

/// Nullspace of a frame-coordinate map, pushed back to the ambient of the
/// source submodule.
fn frames_nullspace_in_ambient(
    frames: &[DMatrix<C64>],
    source: &Submodule,
    tol: &Tolerances,
) -> Result<Submodule> {
    let null = frames_nullspace(frames, tol)?;
    let ambient_frames = null
        .iter()
        .zip(source.frames())
        .map(|(n, q)| q * n)
        .collect();
    Ok(Submodule::from_frames(
        source.signature(),
        source.ambient(),
        ambient_frames,
    ))
}

fn frames_nullspace_in_ambient_frames(
    frames: &[DMatrix<C64>],
    source: &Submodule,
    tol: &Tolerances,
) -> Result<Submodule> {
    frames_nullspace_in_ambient(frames, source, tol)
}

fn map_image_in_ambient_frames(
    frames: &[DMatrix<C64>],
    target: &Submodule,
    tol: &Tolerances,
) -> Result<Submodule> {
    let scale = frames.iter().map(linalg::operator_norm).fold(0.0, f64::max);
    let ambient_frames = frames
        .iter()
        .zip(target.frames())
        .map(|(b, q)| {
            let cols = linalg::colspace_nominal(b, Some(scale.max(1e-300)), tol);
            q * cols
        })
        .collect();
    Ok(Submodule::from_frames(
        target.signature(),
        target.ambient(),
        ambient_frames,
    ))
}

// --- serde: spec operator file format ---

#[derive(Serialize, Deserialize)]
struct DenseOperatorRepr {
    signature: AlgebraSignature,
    domain: usize,
    codomain: usize,
    /// entries[row][col][block] = row-major complex matrix
    entries: Vec<Vec<Vec<Vec<Vec<[f64; 2]>>>>>,
}

impl Serialize for DenseOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DenseOperatorRepr {
            signature: self.sig.clone(),
            domain: self.domain,
            codomain: self.codomain,
            entries: self
                .entries
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| e.blocks().iter().map(linalg::matrix_to_rows).collect())
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = DenseOperatorRepr::deserialize(d)?;
        let mut entries = Vec::with_capacity(repr.codomain);
        for row in &repr.entries {
            let mut out_row = Vec::with_capacity(repr.domain);
            for blocks in row {
                let mats = blocks
                    .iter()
                    .map(|rows| linalg::matrix_from_rows(rows))
                    .collect::<Result<Vec<_>>>()
                    .map_err(D::Error::custom)?;
                out_row.push(
                    AlgebraElement::from_blocks(&repr.signature, mats).map_err(D::Error::custom)?,
                );
            }
            entries.push(out_row);
        }
        DenseOperator::from_entries(&repr.signature, repr.domain, repr.codomain, entries)
            .map_err(D::Error::custom)
    }
}
