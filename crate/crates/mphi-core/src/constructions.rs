//! Executable construction recipes: Fredholm operators with a prescribed
//! block-diagonal decomposition, two-complement decompositions with distinct
//! finite corners, special-class operators driven by such decompositions,
//! power-stabilization families, and the refinement families whose margins
//! decay to zero (the finite stand-in for non-closed ranges).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraSignature, DimensionVector, IndexValue};
use crate::dense::DenseOperator;
use crate::error::{MphiError, Result};
use crate::linalg::{self, C64, Tolerances};
use crate::module::{
    dixmier_angle, span_submodule, sum_and_intersection, ModuleVector, Submodule, SubmoduleMap,
};
use crate::symbolic::{compose_symbolic, SymbolicOperator};

/// Two complements of the same submodule: `ambient = N ⊕ N1 = N ⊕ N2` with
/// `N1 ≅ N2` finitely generated.
#[derive(Debug, Clone)]
pub struct PairedDecomposition {
    pub ambient: usize,
    pub n: Submodule,
    pub n1: Submodule,
    pub n2: Submodule,
}

impl PairedDecomposition {
    /// Certify both direct-sum identities and the equality of the corner
    /// dimension vectors.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if self.n1.dimension_vector() != self.n2.dimension_vector() {
            return Err(MphiError::NotDirect(format!(
                "corner dimensions differ: {} vs {}",
                self.n1.dimension_vector(),
                self.n2.dimension_vector()
            )));
        }
        let sig = self.n.signature();
        let full = Submodule::full(sig, self.ambient);
        for (label, corner) in [("N1", &self.n1), ("N2", &self.n2)] {
            let (sum, int) = sum_and_intersection(&self.n, corner, tol)?;
            if !int.is_zero() {
                return Err(MphiError::NotDirect(format!(
                    "N ∩ {label} has dimension {}",
                    int.dimension_vector()
                )));
            }
            if sum.distance(&full) > tol.sub {
                return Err(MphiError::NotDirect(format!("N + {label} is not the ambient module")));
            }
        }
        Ok(())
    }
}

/// Oblique projection onto `onto` along `along`, as per-block frame maps of
/// the ambient module. Errors when the pair is not a direct decomposition.
fn oblique_projection_frames(
    onto: &Submodule,
    along: &Submodule,
    tol: &Tolerances,
) -> Result<Vec<DMatrix<C64>>> {
    let mut frames = Vec::new();
    for (q_on, q_al) in onto.frames().iter().zip(along.frames()) {
        let n = q_on.nrows();
        let d1 = q_on.ncols();
        let d2 = q_al.ncols();
        if d1 + d2 != n {
            return Err(MphiError::NotDirect(format!(
                "dimensions {d1} + {d2} do not fill the ambient block of size {n}"
            )));
        }
        let mut basis = DMatrix::<C64>::zeros(n, n);
        basis.view_mut((0, 0), (n, d1)).copy_from(q_on);
        basis.view_mut((0, d1), (n, d2)).copy_from(q_al);
        let sv = linalg::singular_values(&basis);
        let smallest = sv.last().cloned().unwrap_or(0.0);
        if smallest <= tol.rank_lo {
            return Err(MphiError::NotDirect(format!(
                "decomposition is numerically dependent (margin {smallest:.3e})"
            )));
        }
        let inv = basis.clone().try_inverse().ok_or_else(|| {
            MphiError::NotDirect("stacked basis is singular".into())
        })?;
        let mut selector = DMatrix::<C64>::zeros(n, n);
        for i in 0..d1 {
            selector[(i, i)] = C64::new(1.0, 0.0);
        }
        frames.push(basis * selector * inv);
    }
    Ok(frames)
}

/// Build an operator with the prescribed decomposition: zero on `n1`, and
/// `V^{-1} ∘ iso ∘ U` from `m1` onto `m2`, where `U`, `V` identify the
/// corners with the free module carrying `iso`. Fails when the sums are not
/// direct or the corner dimensions do not match the shape of `iso`.
pub fn fredholm_from_decomposition(
    m1: &Submodule,
    n1: &Submodule,
    m2: &Submodule,
    n2: &Submodule,
    iso: &DenseOperator,
    tol: &Tolerances,
) -> Result<DenseOperator> {
    let sig = m1.signature().clone();
    if iso.domain_len() != iso.codomain_len() {
        return Err(MphiError::ShapeMismatch("iso must be square".into()));
    }
    let free_dims = crate::algebra::regular_representation_dim(&sig).scaled(iso.domain_len() as u64);
    if m1.dimension_vector() != free_dims || m2.dimension_vector() != free_dims {
        return Err(MphiError::ShapeMismatch(format!(
            "corner dimensions {} and {} must both equal the free module {}",
            m1.dimension_vector(),
            m2.dimension_vector(),
            free_dims
        )));
    }
    // directness of both decompositions
    let proj = oblique_projection_frames(m1, n1, tol)?;
    {
        let _ = oblique_projection_frames(m2, n2, tol)?;
    }
    let iso_margin = iso
        .frames()
        .iter()
        .flat_map(|b| linalg::singular_values(b))
        .fold(f64::INFINITY, f64::min);
    if iso_margin <= tol.rank_hi * iso.operator_norm().max(1.0) {
        return Err(MphiError::Singular { smallest: iso_margin, threshold: tol.rank_hi });
    }
    let frames: Vec<DMatrix<C64>> = iso
        .frames()
        .iter()
        .enumerate()
        .map(|(i, b_iso)| {
            // codomain frame: Q_m2 * iso * Q_m1^H * P_{m1 along n1}
            m2.frame(i) * b_iso * m1.frame(i).adjoint() * &proj[i]
        })
        .collect();
    DenseOperator::from_frames(&sig, m1.ambient(), m2.ambient(), &frames)
}

/// Decomposition from a generating vector with invertible head:
/// `N1 = span{x} ≅ L_1`, `N2 = L_1`, `N = L_1^⊥`.
pub fn paired_decomposition_invertible_head(x: &ModuleVector, tol: &Tolerances) -> Result<PairedDecomposition> {
    let sig = x.signature().clone();
    let ambient = x.len();
    if ambient == 0 {
        return Err(MphiError::ShapeMismatch("empty vector".into()));
    }
    if x.entry(0).invertibility_margin() <= tol.inv.max(1e-8) {
        return Err(MphiError::HeadNotInvertible);
    }
    let n1 = span_submodule(&sig, ambient, &[x.clone()])?;
    let n2 = Submodule::coordinate_span(&sig, ambient, &[0]);
    let n = Submodule::coordinate_span(&sig, ambient, &(1..ambient).collect::<Vec<_>>());
    let pd = PairedDecomposition { ambient, n, n1, n2 };
    pd.validate(tol)?;
    Ok(pd)
}

/// Decomposition from a generating vector with nested kernels: the entries
/// `T_k` must satisfy `ker T_1 ⊆ ker T_k` blockwise. Then `N1 = span{x}`,
/// `N2 = span{(P_{Im T_1}, 0, ...)}` and
/// `N = L_1^⊥ ⊕ span{(1 - P_{Im T_1}, 0, ...)}`.
pub fn paired_decomposition_kernel_nested(x: &ModuleVector, tol: &Tolerances) -> Result<PairedDecomposition> {
    let sig = x.signature().clone();
    let ambient = x.len();
    if ambient == 0 {
        return Err(MphiError::ShapeMismatch("empty vector".into()));
    }
    let t1 = x.entry(0);
    // nestedness: rank([T1; Tk]) == rank(T1) per block
    for k in 1..ambient {
        let tk = x.entry(k);
        for (i, &n) in sig.blocks().iter().enumerate() {
            let mut stacked = DMatrix::<C64>::zeros(2 * n, n);
            stacked.view_mut((0, 0), (n, n)).copy_from(t1.block(i));
            stacked.view_mut((n, 0), (n, n)).copy_from(tk.block(i));
            let r1 = linalg::nominal_rank(t1.block(i), Some(1.0), tol);
            let rs = linalg::nominal_rank(&stacked, Some(1.0), tol);
            if rs != r1 {
                return Err(MphiError::KernelNotNested { entry: k });
            }
        }
    }
    // orthogonal projection onto Im T1 per block
    let p_blocks: Vec<DMatrix<C64>> = sig
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let q = linalg::colspace_nominal(t1.block(i), Some(1.0), tol);
            &q * q.adjoint()
        })
        .collect();
    let p_im = AlgebraElement::from_blocks(&sig, p_blocks)?;
    let one_minus = &AlgebraElement::identity(&sig) - &p_im;

    let head = |a: &AlgebraElement| -> ModuleVector {
        let mut entries = vec![AlgebraElement::zero(&sig); ambient];
        entries[0] = a.clone();
        ModuleVector::new(&sig, entries).unwrap()
    };

    let n1 = span_submodule(&sig, ambient, &[x.clone()])?;
    let n2 = span_submodule(&sig, ambient, &[head(&p_im)])?;
    let mut n_gens: Vec<ModuleVector> = (1..ambient)
        .map(|j| ModuleVector::standard_basis(&sig, ambient, j))
        .collect();
    if one_minus.norm() > 1e-12 {
        n_gens.push(head(&one_minus));
    }
    let n = span_submodule(&sig, ambient, &n_gens)?;
    let pd = PairedDecomposition { ambient, n, n1, n2 };
    pd.validate(tol)?;
    // the coordinate projection restricted to N1 must reach N2 with margin
    let mut margin = f64::INFINITY;
    for (i, q1) in pd.n1.frames().iter().enumerate() {
        let q2 = pd.n2.frame(i);
        if q2.ncols() == 0 {
            continue;
        }
        let m = q2.adjoint() * Submodule::coordinate_span(&sig, ambient, &[0]).frame(i)
            * Submodule::coordinate_span(&sig, ambient, &[0]).frame(i).adjoint()
            * q1;
        let sv = linalg::singular_values(&m);
        margin = margin.min(sv.last().cloned().unwrap_or(0.0));
    }
    if margin <= tol.rank_hi {
        return Err(MphiError::NotDirect(format!(
            "head projection does not carry N1 onto N2 (margin {margin:.3e})"
        )));
    }
    Ok(pd)
}

/// Which special class the composite should land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialKind {
    /// Kernel `N1`, image `N`, corners isomorphic: index-zero witness.
    Tilde0,
    /// Adds a corner map `N1 -> N2`; upper-class witness.
    HatPlus,
    /// Mirror composite with kernel `N2`; lower-class witness.
    HatMinus,
}

/// Certificate attached to a special-class composite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecialClassWitness {
    pub kind: SpecialKind,
    pub kernel_dims: DimensionVector,
    pub cokernel_dims: DimensionVector,
    pub index: IndexValue,
    /// Both decompositions re-validated on the produced operator.
    pub decomposition_valid: bool,
    /// At finite dimension every A-linear projection is adjointable.
    pub projection_adjointable: bool,
}

/// Build the composite `W^{-1} U W Π₁ (+ φ ι ψ (I - Π₁))` of the given kind
/// from a paired decomposition: `Π₁` projects onto `N` along the kernel
/// corner, `U` acts invertibly on the coordinates of `N`, and the optional
/// corner maps act in the frame coordinates of the corners.
pub fn special_class_operator(
    pd: &PairedDecomposition,
    kind: SpecialKind,
    u: Option<&SubmoduleMap>,
    phi: Option<&SubmoduleMap>,
    psi: Option<&SubmoduleMap>,
    tol: &Tolerances,
) -> Result<(DenseOperator, SpecialClassWitness)> {
    pd.validate(tol)?;
    let sig = pd.n.signature().clone();
    let ambient = pd.ambient;
    let (kernel_corner, image_corner) = match kind {
        SpecialKind::Tilde0 | SpecialKind::HatPlus => (&pd.n1, &pd.n2),
        SpecialKind::HatMinus => (&pd.n2, &pd.n1),
    };
    let proj = oblique_projection_frames(&pd.n, kernel_corner, tol)?;
    let n_dims = pd.n.dimension_vector();
    let u_map = match u {
        Some(m) => {
            if m.source_dims != n_dims || m.target_dims != n_dims {
                return Err(MphiError::ShapeMismatch("U must act on the coordinates of N".into()));
            }
            m.clone()
        }
        None => SubmoduleMap::identity(&n_dims),
    };
    for b in &u_map.blocks {
        if b.ncols() > 0 {
            let sv = linalg::singular_values(b);
            if sv.last().cloned().unwrap_or(0.0) <= tol.rank_hi {
                return Err(MphiError::Singular {
                    smallest: sv.last().cloned().unwrap_or(0.0),
                    threshold: tol.rank_hi,
                });
            }
        }
    }

    let mut frames: Vec<DMatrix<C64>> = pd
        .n
        .frames()
        .iter()
        .enumerate()
        .map(|(i, qn)| qn * &u_map.blocks[i] * qn.adjoint() * &proj[i])
        .collect();

    if kind != SpecialKind::Tilde0 {
        let corner_dims = kernel_corner.dimension_vector();
        let phi_map = phi.cloned().unwrap_or_else(|| SubmoduleMap::zero(&corner_dims, &corner_dims));
        let psi_map = psi.cloned().unwrap_or_else(|| SubmoduleMap::zero(&corner_dims, &corner_dims));
        if phi_map.source_dims != corner_dims || psi_map.source_dims != corner_dims {
            return Err(MphiError::ShapeMismatch("corner maps must act on the corner coordinates".into()));
        }
        let id = DMatrix::<C64>::identity(0, 0);
        let _ = id;
        for (i, f) in frames.iter_mut().enumerate() {
            let n = f.nrows();
            let q_ker = kernel_corner.frame(i);
            let q_im = image_corner.frame(i);
            let complement = DMatrix::<C64>::identity(n, n) - &proj[i];
            // φ ∘ ι ∘ ψ in frame coordinates; ι matches frame columns
            let corner = q_im * &phi_map.blocks[i] * &psi_map.blocks[i] * q_ker.adjoint() * complement;
            *f += corner;
        }
    }

    let op = DenseOperator::from_frames(&sig, ambient, ambient, &frames)?;
    let kernel_dims = op.kernel(tol)?.dimension_vector();
    let cokernel_dims = op.image(tol)?.orth_complement().dimension_vector();
    let index = IndexValue::from_difference(&kernel_dims, &cokernel_dims);
    let witness = SpecialClassWitness {
        kind,
        kernel_dims,
        cokernel_dims,
        index,
        decomposition_valid: pd.validate(tol).is_ok(),
        projection_adjointable: true,
    };
    Ok((op, witness))
}

/// One step of a power-stabilization study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerStep {
    pub m: u64,
    /// Kernel of the m-th power (window part plus nilpotent head).
    pub kernel_dims: DimensionVector,
    /// Image of the nilpotent head block after m steps.
    pub head_image_dims: DimensionVector,
    /// Kernel, cokernel and index of the restriction to the m-th image.
    pub restricted_kernel: DimensionVector,
    pub restricted_coker: DimensionVector,
    pub restricted_index: IndexValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerStudy {
    pub q: u64,
    pub n_head: u64,
    pub window: u64,
    pub steps: Vec<PowerStep>,
}

/// Build `T = F ⊕ C` with `C` the nilpotent Jordan shift of order `q` on an
/// `L_{n_head}` block, and study the powers `T^m` for `m = 1..=q+2` on the
/// given window: images of the head stabilize at `m = q`, and the
/// classification of `T` restricted to `Im T^m` is constant from there on.
pub fn bfredholm_recipe(
    fplus: &SymbolicOperator,
    q: u64,
    n_head: u64,
    window: u64,
    tol: &Tolerances,
) -> Result<PowerStudy> {
    if q == 0 || n_head < q {
        return Err(MphiError::Parse("need q >= 1 and n_head >= q".into()));
    }
    let sig = fplus.signature().clone();
    let rep = fplus.classify(tol);
    let decided_upper = rep
        .flags
        .map(|f| f.in_mphi_plus || f.in_mphi_minus)
        .unwrap_or(false);
    if !decided_upper {
        return Err(MphiError::UndecidedInput(
            "head operator must be a decided semi-Fredholm member".into(),
        ));
    }

    // nilpotent Jordan shift of order q padded to n_head
    let mut c = DenseOperator::zero(&sig, n_head as usize, n_head as usize);
    for k in 1..q as usize {
        c.set_entry(k - 1, k, AlgebraElement::identity(&sig));
    }

    let m_max = q + 2;
    // symbolic powers
    let mut powers: Vec<SymbolicOperator> = vec![fplus.clone()];
    for _ in 1..m_max {
        let next = compose_symbolic(fplus, powers.last().unwrap())?;
        powers.push(next);
    }

    let mut c_power = DenseOperator::identity(&sig, n_head as usize);
    let mut steps = Vec::new();
    for m in 1..=m_max {
        c_power = crate::dense::compose(&c, &c_power)?;
        let fm = &powers[(m - 1) as usize];
        let dm = fm.windowed_truncate(window)?;
        let f_kernel = dm.kernel(tol)?.dimension_vector();
        let c_kernel = c_power.kernel(tol)?.dimension_vector();
        let kernel_dims = &f_kernel + &c_kernel;
        let head_image = c_power.image(tol)?;
        let head_image_dims = head_image.dimension_vector();

        // restriction of F to the windowed image of F^m
        let image_m = dm.image(tol)?; // inside L_{out_m}
        let out_m = image_m.ambient() as u64;
        let step_op = fplus.windowed_truncate(out_m)?;
        let out_next = step_op.codomain_len();
        let big = out_m.max(out_next as u64) as usize;
        let source = image_m.embed(big);
        // map frames under the one-step operator
        let mut mapped_frames = Vec::new();
        for (i, b) in step_op.frames().iter().enumerate() {
            let ni = sig.blocks()[i];
            let mut wide = DMatrix::<C64>::zeros(big * ni, big * ni);
            wide.view_mut((0, 0), (b.nrows(), b.ncols())).copy_from(b);
            mapped_frames.push(wide * source.frame(i));
        }
        let mapped_cols: Vec<DMatrix<C64>> = mapped_frames
            .iter()
            .map(|m| linalg::colspace_nominal(m, None, tol))
            .collect();
        let mapped = Submodule::from_frames(&sig, big, mapped_cols);
        let (target, _) = sum_and_intersection(&source, &mapped, tol)?;
        // restriction in frame coordinates: target^H * mapped_frames
        let mut r_kernel = DimensionVector::zeros(sig.block_count());
        let mut r_coker = DimensionVector::zeros(sig.block_count());
        for (i, mf) in mapped_frames.iter().enumerate() {
            let r = target.frame(i).adjoint() * mf;
            let scale = linalg::operator_norm(&r).max(1e-300);
            let rank = linalg::decide_rank(&r, Some(scale), tol)?;
            r_kernel.0[i] = (r.ncols() - rank) as u64;
            r_coker.0[i] = (r.nrows() - rank) as u64;
        }
        // head block restriction: C on Im C^m
        let head_source = head_image;
        for (i, b) in c.frames().iter().enumerate() {
            let r = b * head_source.frame(i);
            // image of C^{m+1} stays inside Im C^m, so coker counts against
            // the source dimensions
            let scale = linalg::operator_norm(&r).max(1e-300);
            let rank = if r.ncols() == 0 { 0 } else { linalg::decide_rank(&r, Some(scale), tol)? };
            r_kernel.0[i] += (r.ncols() - rank) as u64;
            r_coker.0[i] += (r.ncols() - rank) as u64;
        }
        let restricted_index = IndexValue::from_difference(&r_kernel, &r_coker);
        steps.push(PowerStep {
            m,
            kernel_dims,
            head_image_dims,
            restricted_kernel: r_kernel,
            restricted_coker: r_coker,
            restricted_index,
        });
    }
    Ok(PowerStudy { q, n_head, window, steps })
}

/// One member of the multiplier refinement family: right multiplication by
/// `diag(1/d, 2/d, ..., 1)` over the commutative algebra with `d` cells.
#[derive(Debug, Clone)]
pub struct RangeFamilyMember {
    pub d: u64,
    pub signature: AlgebraSignature,
    pub operator: DenseOperator,
}

pub fn range17_member(d: u64) -> Result<RangeFamilyMember> {
    if d == 0 {
        return Err(MphiError::Parse("family parameter must be positive".into()));
    }
    let sig = AlgebraSignature::new(vec![1; d as usize])?;
    let coeffs: Vec<C64> = (1..=d).map(|i| C64::new(i as f64 / d as f64, 0.0)).collect();
    let a = AlgebraElement::central(&sig, &coeffs)?;
    let operator = DenseOperator::diagonal(&sig, &[a]);
    Ok(RangeFamilyMember { d, signature: sig, operator })
}

/// One member of the two-line angle family: two rank-one corners of `L_2`
/// over a single matrix block at angle `1/d`, and the operator with kernel
/// the tilted corner and image `L_1^⊥ ⊕ (straight corner)`. The squared
/// operator has margin exactly `sin(1/d)`.
#[derive(Debug, Clone)]
pub struct SumFamilyMember {
    pub d: u64,
    pub signature: AlgebraSignature,
    pub m_tilde: Submodule,
    pub n_tilde: Submodule,
    pub operator: DenseOperator,
}

pub fn sum18_member(d: u64) -> Result<SumFamilyMember> {
    if d == 0 {
        return Err(MphiError::Parse("family parameter must be positive".into()));
    }
    let sig = AlgebraSignature::new(vec![2])?;
    let theta = 1.0 / d as f64;
    let (c, s) = (theta.cos(), theta.sin());
    let ambient = 2usize;
    // frame space of the single block has dimension 4
    let frame = |coords: [f64; 4]| {
        DMatrix::<C64>::from_fn(4, 1, |r, _| C64::new(coords[r], 0.0))
    };
    let m_tilde = Submodule::from_frames(&sig, ambient, vec![frame([1.0, 0.0, 0.0, 0.0])]);
    let n_tilde = Submodule::from_frames(&sig, ambient, vec![frame([c, s, 0.0, 0.0])]);
    // orthonormal basis of the complement of n_tilde
    let u1 = frame([-s, c, 0.0, 0.0]);
    let u2 = frame([0.0, 0.0, 1.0, 0.0]);
    let u3 = frame([0.0, 0.0, 0.0, 1.0]);
    // targets: u1 -> m_tilde, u2 -> first tail coordinate, u3 -> second
    let w3 = frame([1.0, 0.0, 0.0, 0.0]);
    let w1 = frame([0.0, 0.0, 1.0, 0.0]);
    let w2 = frame([0.0, 0.0, 0.0, 1.0]);
    let b = &w3 * u1.adjoint() + &w1 * u2.adjoint() + &w2 * u3.adjoint();
    let operator = DenseOperator::from_frames(&sig, ambient, ambient, &[b])?;
    Ok(SumFamilyMember { d, signature: sig, m_tilde, n_tilde, operator })
}

/// Diagnostics row of a refinement family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementRow {
    pub d: u64,
    pub margin: f64,
    pub angle: f64,
}

/// Margins `1/d` of the multiplier family.
pub fn range17_rows(params: &[u64], tol: &Tolerances) -> Result<Vec<RefinementRow>> {
    params
        .iter()
        .map(|&d| {
            let member = range17_member(d)?;
            let margin = member.operator.closed_range_margin(tol)?;
            Ok(RefinementRow { d, margin, angle: 0.0 })
        })
        .collect()
}

/// Angles `cos(1/d)` and squared-operator margins of the two-line family.
pub fn sum18_rows(params: &[u64], tol: &Tolerances) -> Result<Vec<RefinementRow>> {
    params
        .iter()
        .map(|&d| {
            let member = sum18_member(d)?;
            let angle = dixmier_angle(&member.m_tilde, &member.n_tilde).c0;
            let f2 = crate::dense::compose(&member.operator, &member.operator)?;
            let margin = f2.closed_range_margin(tol)?;
            Ok(RefinementRow { d, margin, angle })
        })
        .collect()
}

pub const DEFAULT_FAMILY_PARAMS: [u64; 5] = [4, 8, 16, 32, 64];
