//! Generalized spectra and radii over central perturbations: exact
//! classification of shift polynomials `p(S) - αI` per central character,
//! the four semi-Fredholm radii (exact root-locus and sampled grid modes),
//! spectrum partition sweeps of dense operators, homotopy index sweeps, and
//! the isolated-spectral-point (Riesz) analyzer.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraSignature, DimensionVector, IndexValue};
use crate::dense::{compose, DenseOperator};
use crate::error::{MphiError, Result};
use crate::linalg::{self, C64, Tolerances};
use crate::module::Submodule;
use crate::symbolic::{
    ClassFlags, ClassificationReport, ClassificationStatus, KernelDescriptor, PatternClass,
    SymbolicOperator,
};

/// A polynomial `p(S) = Σ c_j S^j` in the forward shift with central
/// coefficients; classification reduces per block to the scalar symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPolynomial {
    signature: AlgebraSignature,
    coeffs: Vec<AlgebraElement>,
}

impl ShiftPolynomial {
    pub fn new(sig: &AlgebraSignature, coeffs: Vec<AlgebraElement>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(MphiError::Parse("shift polynomial needs at least one coefficient".into()));
        }
        for c in &coeffs {
            if c.signature() != sig {
                return Err(MphiError::ShapeMismatch("coefficient signature mismatch".into()));
            }
            if !c.is_central(1e-10) {
                return Err(MphiError::Parse("shift polynomial coefficients must be central".into()));
            }
        }
        Ok(ShiftPolynomial { signature: sig.clone(), coeffs })
    }

    /// The forward shift itself.
    pub fn shift(sig: &AlgebraSignature) -> Self {
        ShiftPolynomial::new(
            sig,
            vec![AlgebraElement::zero(sig), AlgebraElement::identity(sig)],
        )
        .unwrap()
    }

    pub fn constant(sig: &AlgebraSignature, c: &AlgebraElement) -> Result<Self> {
        ShiftPolynomial::new(sig, vec![c.clone()])
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.signature
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[AlgebraElement] {
        &self.coeffs
    }

    /// Scalar coefficients of the block-`i` symbol polynomial.
    pub fn block_symbol(&self, block: usize) -> Vec<C64> {
        self.coeffs.iter().map(|c| c.central_coefficients()[block]).collect()
    }

    /// `p - α` for a central α.
    pub fn shifted(&self, alpha: &AlgebraElement) -> Result<ShiftPolynomial> {
        if !alpha.is_central(1e-10) {
            return Err(MphiError::Parse("spectral perturbations must be central".into()));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = &coeffs[0] - alpha;
        ShiftPolynomial::new(&self.signature, coeffs)
    }

    /// The same operator as a shift-term object (for truncations).
    pub fn to_symbolic(&self) -> SymbolicOperator {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-14)
            .map(|(d, c)| {
                crate::symbolic::ShiftTerm::new(1, 0, 1, d as i64, 1, c.clone()).unwrap()
            })
            .collect();
        SymbolicOperator::new(&self.signature, terms).unwrap()
    }
}

/// Tolerance for root-on-circle decisions in the symbol analysis.
const CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum BlockClass {
    /// Invertible block symbol: no roots in the closed disk.
    Invertible,
    /// Fredholm with `inside` roots in the open disk.
    Fredholm { inside: usize },
    /// A root on the unit circle: not semi-Fredholm.
    CircleRoot,
    /// The symbol vanishes identically.
    Degenerate,
}

fn analyze_block_symbol(coeffs: &[C64]) -> BlockClass {
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    if maxc == 0.0 {
        return BlockClass::Degenerate;
    }
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * maxc {
        c.pop();
    }
    if c.len() == 1 {
        // constant block: invertible iff nonzero
        return if c[0].norm() > 1e-14 * maxc {
            BlockClass::Invertible
        } else {
            BlockClass::Degenerate
        };
    }
    let roots = linalg::poly_roots(&c);
    let mut inside = 0;
    for z in &roots {
        let r = z.norm();
        if (r - 1.0).abs() <= CIRCLE_TOL {
            return BlockClass::CircleRoot;
        }
        if r < 1.0 {
            inside += 1;
        }
    }
    BlockClass::Fredholm { inside }
}

/// Classify `p(S)` acting on `H_A` per block symbol: Fredholm iff no block
/// symbol vanishes on the unit circle; the block index contribution is
/// `-(roots inside) * n_i` units of the `i`-th simple module.
pub fn classify_shift_polynomial(p: &ShiftPolynomial) -> Result<ClassificationReport> {
    let sig = p.signature();
    let k = sig.block_count();
    let mut fredholm = true;
    let mut coker = vec![0u64; k];
    for i in 0..k {
        match analyze_block_symbol(&p.block_symbol(i)) {
            BlockClass::Degenerate => return Err(MphiError::DegenerateSymbol(i)),
            BlockClass::CircleRoot => fredholm = false,
            BlockClass::Invertible => {}
            BlockClass::Fredholm { inside } => {
                coker[i] = (inside * sig.blocks()[i]) as u64;
            }
        }
    }
    // analytic symbols are injective whenever nonzero on every block
    let kernel_dims = DimensionVector::zeros(k);
    if !fredholm {
        return Ok(ClassificationReport {
            status: ClassificationStatus::Decided,
            flags: Some(ClassFlags {
                in_mphi_plus: false,
                in_mphi_minus: false,
                in_mphi: false,
                in_mphi_zero: false,
                in_mphi_plus_minus: false,
                in_mphi_minus_plus: false,
            }),
            index: None,
            kernel: KernelDescriptor::NotApplicable {
                reason: "range not closed: symbol vanishes on the unit circle".into(),
            },
            cokernel: KernelDescriptor::NotApplicable {
                reason: "range not closed: symbol vanishes on the unit circle".into(),
            },
        });
    }
    let coker_dims = DimensionVector(coker);
    let index = IndexValue::from_difference(&kernel_dims, &coker_dims);
    Ok(ClassificationReport {
        status: ClassificationStatus::Decided,
        flags: Some(ClassFlags {
            in_mphi_plus: true,
            in_mphi_minus: true,
            in_mphi: true,
            in_mphi_zero: index.is_zero(),
            in_mphi_plus_minus: index.is_nonpositive(),
            in_mphi_minus_plus: index.is_nonnegative(),
        }),
        index: Some(index),
        kernel: KernelDescriptor::FinitelyGenerated { dim_vector: kernel_dims, window: 0 },
        cokernel: if coker_dims_is_zero(&coker_dims) {
            KernelDescriptor::FinitelyGenerated { dim_vector: coker_dims, window: 0 }
        } else {
            KernelDescriptor::FinitelyGenerated { dim_vector: coker_dims, window: 0 }
        },
    })
}

fn coker_dims_is_zero(d: &DimensionVector) -> bool {
    d.is_zero()
}

/// The four spectral radii with raw one-sided estimates and the enforced
/// min/max identities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadiiEstimate {
    pub s_plus: f64,
    pub s_minus: f64,
    pub s_phi: f64,
    pub s: f64,
    pub raw_s_plus: f64,
    pub raw_s_minus: f64,
    pub mode: RadiiMode,
    /// Width of the one-sided interval in grid mode (0 for exact mode).
    pub resolution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiiMode {
    Exact,
    Grid,
}

/// Distance from the origin to the failure set of one block symbol: the
/// smallest |w| such that `p_i - w` stops being block-Fredholm.
fn block_failure_distance(coeffs: &[C64]) -> f64 {
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * maxc.max(1e-300) {
        c.pop();
    }
    if c.len() == 1 {
        // constant block: p - w is the scalar c0 - w, which kills the whole
        // block exactly at w = c0
        return c[0].norm();
    }
    // failure iff p(z) = w for some |z| = 1: distance = min_{|z|=1} |p(z)|
    let eval = |theta: f64| -> f64 {
        let z = C64::new(theta.cos(), theta.sin());
        let mut p = C64::new(0.0, 0.0);
        for ck in c.iter().rev() {
            p = p * z + ck;
        }
        p.norm()
    };
    let samples = 4096;
    let mut best = f64::INFINITY;
    let mut best_theta = 0.0;
    for k in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let v = eval(theta);
        if v < best {
            best = v;
            best_theta = theta;
        }
    }
    // golden-section polish around the best sample
    let golden = 0.618_033_988_749_894_9_f64;
    let width = 2.0 * std::f64::consts::PI / samples as f64;
    let (mut lo, mut hi) = (best_theta - width, best_theta + width);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = eval(x2);
        }
    }
    best.min(f1).min(f2)
}

/// Exact (root-locus) radii of a shift polynomial. For this family a
/// central perturbation destroys all four memberships at once, so the raw
/// upper and lower estimates coincide; the min/max identities are then
/// immediate and recorded explicitly.
pub fn radii_exact(p: &ShiftPolynomial) -> RadiiEstimate {
    let k = p.signature().block_count();
    let mut dist = f64::INFINITY;
    for i in 0..k {
        dist = dist.min(block_failure_distance(&p.block_symbol(i)));
    }
    RadiiEstimate {
        s_plus: dist,
        s_minus: dist,
        s_phi: dist,
        s: dist,
        raw_s_plus: dist,
        raw_s_minus: dist,
        mode: RadiiMode::Exact,
        resolution: 0.0,
    }
}

/// Grid-mode radii: sample central perturbations blockwise on complex grids
/// of the given radius and step, classify `p - α` at every point, and take
/// the infimum of `‖α‖` over the failing points. Reported as the interval
/// `[best - h, best]` through the `resolution` field.
pub fn radii_grid(p: &ShiftPolynomial, radius: f64, step: f64) -> Result<RadiiEstimate> {
    if !(radius > 0.0) || !(step > 0.0) {
        return Err(MphiError::Parse("grid radius and step must be positive".into()));
    }
    let sig = p.signature().clone();
    let k = sig.block_count();
    let steps = (radius / step).ceil() as i64;
    let mut best_plus = f64::INFINITY;
    let mut best_minus = f64::INFINITY;
    for i in 0..k {
        let symbol = p.block_symbol(i);
        for re in -steps..=steps {
            for im in -steps..=steps {
                let w = C64::new(re as f64 * step, im as f64 * step);
                if w.norm() > radius + 1e-12 {
                    continue;
                }
                let mut shifted = symbol.clone();
                shifted[0] -= w;
                match analyze_block_symbol(&shifted) {
                    BlockClass::Invertible | BlockClass::Fredholm { .. } => {}
                    BlockClass::CircleRoot | BlockClass::Degenerate => {
                        best_plus = best_plus.min(w.norm());
                        best_minus = best_minus.min(w.norm());
                    }
                }
            }
        }
    }
    let s_plus = best_plus;
    let s_minus = best_minus;
    Ok(RadiiEstimate {
        s_plus,
        s_minus,
        s_phi: s_plus.min(s_minus),
        s: s_plus.max(s_minus),
        raw_s_plus: s_plus,
        raw_s_minus: s_minus,
        mode: RadiiMode::Grid,
        resolution: step,
    })
}

/// Radii of a shift polynomial or of a symbolic operator representable as
/// one (directly or through its adjoint, which swaps the one-sided radii).
pub fn radii_symbolic(f: &SymbolicOperator) -> Result<RadiiEstimate> {
    if let Some(p) = f.to_shift_polynomial() {
        return Ok(radii_exact(&p));
    }
    if let Ok(adj) = f.adjoint_symbolic() {
        if let Some(p) = adj.to_shift_polynomial() {
            let r = radii_exact(&p);
            return Ok(RadiiEstimate {
                s_plus: r.s_minus,
                s_minus: r.s_plus,
                raw_s_plus: r.raw_s_minus,
                raw_s_minus: r.raw_s_plus,
                ..r
            });
        }
    }
    Err(MphiError::Undecidable)
}

/// A finite grid of central elements `α = Σ c_i p_i`, one complex grid per
/// block character, symmetric under negation.
#[derive(Debug, Clone)]
pub struct CentralGrid {
    sig: AlgebraSignature,
    pub radius: f64,
    pub step: f64,
    pub points: Vec<AlgebraElement>,
}

impl CentralGrid {
    /// Product grid over all block characters; errors if it would exceed
    /// the point cap.
    pub fn product(sig: &AlgebraSignature, radius: f64, step: f64, cap: usize) -> Result<Self> {
        let steps = (radius / step).ceil() as i64;
        let axis: Vec<C64> = (-steps..=steps)
            .flat_map(|re| {
                (-steps..=steps)
                    .map(move |im| C64::new(re as f64 * step, im as f64 * step))
            })
            .filter(|c| c.norm() <= radius + 1e-12)
            .collect();
        let k = sig.block_count();
        let total = axis.len().pow(k as u32);
        if total > cap {
            return Err(MphiError::Parse(format!(
                "grid would have {total} points, cap is {cap}; increase step"
            )));
        }
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; k];
        loop {
            let coeffs: Vec<C64> = idx.iter().map(|&i| axis[i]).collect();
            points.push(AlgebraElement::central(sig, &coeffs)?);
            let mut carry = k;
            for pos in (0..k).rev() {
                idx[pos] += 1;
                if idx[pos] < axis.len() {
                    carry = pos;
                    break;
                }
                idx[pos] = 0;
            }
            if carry == k {
                break;
            }
        }
        Ok(CentralGrid { sig: sig.clone(), radius, step, points })
    }

    /// Axis grid: one block character varies, the others stay zero.
    pub fn axes(sig: &AlgebraSignature, radius: f64, step: f64) -> Result<Self> {
        let steps = (radius / step).ceil() as i64;
        let mut points = Vec::new();
        for block in 0..sig.block_count() {
            for re in -steps..=steps {
                for im in -steps..=steps {
                    let c = C64::new(re as f64 * step, im as f64 * step);
                    if c.norm() > radius + 1e-12 {
                        continue;
                    }
                    let mut coeffs = vec![C64::new(0.0, 0.0); sig.block_count()];
                    coeffs[block] = c;
                    points.push(AlgebraElement::central(sig, &coeffs)?);
                }
            }
        }
        Ok(CentralGrid { sig: sig.clone(), radius, step, points })
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.sig
    }
}

/// Per-point classification data of `F - αI` over a central grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSample {
    pub alpha: AlgebraElement,
    pub min_sv: f64,
    pub invertible: bool,
    pub is_eigen: bool,
    pub gc_weyl: bool,
}

/// Summary of a spectrum sweep: at finite dimension the closed-range part
/// of the partition is empty, so every spectral point must be an
/// eigenvalue, and the generalized-Weyl failures must sit inside the point
/// spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumPartitionReport {
    pub samples: Vec<SpectralSample>,
    /// Every non-invertible sample is an eigenvalue.
    pub partition_holds: bool,
    /// Every non-gc-Weyl sample is an eigenvalue.
    pub weyl_partition_holds: bool,
}

/// Sweep `F - αI` over the grid. `F` must be square.
pub fn spectrum_partition(
    f: &DenseOperator,
    grid: &CentralGrid,
    tol: &Tolerances,
) -> Result<SpectrumPartitionReport> {
    if f.domain_len() != f.codomain_len() {
        return Err(MphiError::ShapeMismatch("spectrum sweep needs a square operator".into()));
    }
    let n = f.domain_len();
    let frames = f.frames();
    let scale = f.operator_norm().max(1.0);
    let mut samples = Vec::with_capacity(grid.points.len());
    let mut partition_holds = true;
    let mut weyl_partition_holds = true;
    for alpha in &grid.points {
        let coeffs = alpha.central_coefficients();
        let mut min_sv = f64::INFINITY;
        let mut gc_weyl = true;
        for (i, b) in frames.iter().enumerate() {
            let dim = b.nrows();
            let shifted = b - DMatrix::<C64>::identity(dim, dim) * coeffs[i];
            let sv = linalg::singular_values(&shifted);
            let smallest = sv.last().cloned().unwrap_or(0.0);
            min_sv = min_sv.min(smallest);
            // square complex blocks always have equal kernel and cokernel
            // multiplicities, so gc-Weyl can only fail through an
            // ambiguous range decision
            let decided = linalg::decide_rank_from_sv(&sv, scale, tol).is_ok();
            gc_weyl &= decided;
        }
        let is_eigen = min_sv <= tol.rank_nominal * scale;
        let invertible = min_sv > tol.rank_nominal * scale;
        if !invertible && !is_eigen {
            partition_holds = false;
        }
        if !gc_weyl && !is_eigen {
            weyl_partition_holds = false;
        }
        samples.push(SpectralSample {
            alpha: alpha.clone(),
            min_sv,
            invertible,
            is_eigen,
            gc_weyl,
        });
    }
    let _ = n;
    Ok(SpectrumPartitionReport { samples, partition_holds, weyl_partition_holds })
}

/// Step record of a homotopy sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub steps: usize,
    pub flags: ClassFlags,
    pub index: Option<IndexValue>,
    pub constant: bool,
}

/// Classify `p - g(t) I` along the linear central path from `alpha0` to
/// `alpha1`; errors with the witness step when the path leaves the
/// semi-Fredholm region, otherwise checks flags and index stay constant.
pub fn homotopy_sweep(
    p: &ShiftPolynomial,
    alpha0: &AlgebraElement,
    alpha1: &AlgebraElement,
    steps: usize,
) -> Result<HomotopyReport> {
    if steps == 0 {
        return Err(MphiError::Parse("homotopy needs at least one step".into()));
    }
    let mut flags: Option<ClassFlags> = None;
    let mut index: Option<IndexValue> = None;
    let mut constant = true;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let alpha = &alpha0.scale(C64::new(1.0 - t, 0.0)) + &alpha1.scale(C64::new(t, 0.0));
        let shifted = p.shifted(&alpha)?;
        let rep = classify_shift_polynomial(&shifted)?;
        let f = rep.flags.expect("shift polynomials always decide");
        if !(f.in_mphi_plus || f.in_mphi_minus) {
            return Err(MphiError::PathHitsBoundary { step: s, steps });
        }
        match (&flags, &index) {
            (None, _) => {
                flags = Some(f);
                index = rep.index;
            }
            (Some(f0), i0) => {
                if *f0 != f || *i0 != rep.index {
                    constant = false;
                }
            }
        }
    }
    Ok(HomotopyReport {
        steps,
        flags: flags.unwrap(),
        index,
        constant,
    })
}

/// Output of the isolated-point analysis: the spectral projection, the
/// finite-rank commuting perturbation, the invertible part, and the five
/// equivalent membership clauses checked on the way.
#[derive(Debug, Clone)]
pub struct RieszReport {
    pub spectral_projection: DenseOperator,
    pub commuting_compact: DenseOperator,
    pub invertible_part: DenseOperator,
    pub commutator_norm: f64,
    pub invertible_margin: f64,
    pub range_dims: DimensionVector,
    pub kernel_dims: DimensionVector,
    /// a) F - αI = T + K with K compact, T invertible, FK = KF
    pub clause_commuting_decomposition: bool,
    /// b) membership in the upper semi-Weyl class
    pub clause_upper_semi_weyl: bool,
    /// c) Fredholm
    pub clause_fredholm: bool,
    /// d) Weyl (index zero)
    pub clause_weyl: bool,
    /// e) block decomposition with finitely generated corner
    pub clause_block_decomposition: bool,
    /// kernel nontrivial whenever F - αI is singular
    pub clause_nontrivial_kernel: bool,
    pub offdiag_residual: f64,
}

/// Invariant-subspace projection for the eigenvalue group of `b` inside the
/// disk of radius `rho/2` around `center`, requiring an empty annulus
/// `(rho/2, rho]`. Returns (projection, inside count).
fn block_spectral_projection(
    b: &DMatrix<C64>,
    center: C64,
    rho: f64,
) -> Result<(DMatrix<C64>, usize)> {
    let n = b.nrows();
    let eigs = linalg::eigenvalues(b)?;
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for lam in eigs {
        let d = (lam - center).norm();
        if d <= rho / 2.0 {
            inside.push(lam);
        } else if d <= rho {
            return Err(MphiError::NotIsolated(format!(
                "eigenvalue at distance {d:.3e} inside the isolation annulus"
            )));
        } else {
            outside.push(lam);
        }
    }
    if inside.is_empty() {
        return Ok((DMatrix::zeros(n, n), 0));
    }
    let tol = Tolerances::default();
    let scale = linalg::operator_norm(b).max(1.0);
    // generalized eigenspace of the inside group: kernel of the normalized
    // product of (B - λ) over the inside eigenvalues (with multiplicity)
    let product_kernel = |lams: &[C64]| -> Result<DMatrix<C64>> {
        if lams.is_empty() {
            return Ok(DMatrix::zeros(n, 0));
        }
        let mut m = DMatrix::<C64>::identity(n, n);
        for lam in lams {
            m = (b - DMatrix::<C64>::identity(n, n) * *lam) * m;
            let norm = linalg::operator_norm(&m);
            if norm > 0.0 {
                m /= C64::new(norm, 0.0);
            }
        }
        linalg::nullspace(&m, Some(1.0), &tol)
    };
    let v_in = product_kernel(&inside)?;
    let v_out = product_kernel(&outside)?;
    if v_in.ncols() + v_out.ncols() != n {
        return Err(MphiError::NotIsolated(format!(
            "invariant subspaces do not split the block: {} + {} != {n}",
            v_in.ncols(),
            v_out.ncols()
        )));
    }
    // projection onto V_in along V_out
    let mut basis = DMatrix::<C64>::zeros(n, n);
    basis.view_mut((0, 0), (n, v_in.ncols())).copy_from(&v_in);
    basis.view_mut((0, v_in.ncols()), (n, v_out.ncols())).copy_from(&v_out);
    let inv = basis.clone().try_inverse().ok_or_else(|| {
        MphiError::NotIsolated("spectral basis is numerically singular".into())
    })?;
    let mut selector = DMatrix::<C64>::zeros(n, n);
    for i in 0..v_in.ncols() {
        selector[(i, i)] = C64::new(1.0, 0.0);
    }
    let _ = scale;
    Ok((basis * selector * inv, v_in.ncols()))
}

/// Analyze an isolated central spectral point `α` of a square operator:
/// build the spectral projection by per-character eigenvalue clustering,
/// the finite-rank commuting perturbation `K` and the invertible part `T`
/// with `F - αI = T + K`, and check all equivalent membership clauses.
pub fn riesz_analyze(
    f: &DenseOperator,
    alpha: &AlgebraElement,
    rho: f64,
    tol: &Tolerances,
) -> Result<RieszReport> {
    if f.domain_len() != f.codomain_len() {
        return Err(MphiError::ShapeMismatch("isolated-point analysis needs a square operator".into()));
    }
    if !alpha.is_central(1e-10) {
        return Err(MphiError::Parse("spectral point must be central".into()));
    }
    let sig = f.signature().clone();
    let n = f.domain_len();
    let coeffs = alpha.central_coefficients();
    let frames = f.frames();
    let mut proj_frames = Vec::with_capacity(frames.len());
    let mut inside_total = 0;
    for (i, b) in frames.iter().enumerate() {
        let (p, count) = block_spectral_projection(b, coeffs[i], rho)?;
        inside_total += count;
        proj_frames.push(p);
    }
    if inside_total == 0 {
        return Err(MphiError::NotIsolated("no spectral point inside the disk".into()));
    }
    let p0 = DenseOperator::from_frames(&sig, n, n, &proj_frames)?;

    // shifted operator
    let alpha_diag = DenseOperator::diagonal(&sig, &vec![alpha.clone(); n]);
    let shifted = f.sub(&alpha_diag)?;

    let id = DenseOperator::identity(&sig, n);
    let q0 = id.sub(&p0)?;
    // K = (F - αI) P0 - P0, T = (F - αI)(I - P0) + P0
    let k_op = compose(&shifted, &p0)?.sub(&p0)?;
    let t_op = compose(&shifted, &q0)?.add(&p0)?;

    let fk = compose(f, &k_op)?;
    let kf = compose(&k_op, f)?;
    let commutator_norm = fk.sub(&kf)?.operator_norm();
    let recomposed = t_op.add(&k_op)?;
    let decomposition_exact = recomposed.sub(&shifted)?.operator_norm();

    let sv = t_op
        .frames()
        .iter()
        .flat_map(|b| linalg::singular_values(b))
        .fold(f64::INFINITY, f64::min);
    let invertible_margin = sv;

    // e) block decomposition along M = ker P0, N = ran P0
    let range = p0.image(tol)?;
    let null = p0.kernel(tol)?;
    let range_dims = range.dimension_vector();
    let mut offdiag: f64 = 0.0;
    for (i, b) in shifted.frames().iter().enumerate() {
        let to_null = null.frame(i).adjoint() * b * range.frame(i);
        let to_range = range.frame(i).adjoint() * b * null.frame(i);
        offdiag = offdiag.max(linalg::operator_norm(&to_null));
        offdiag = offdiag.max(linalg::operator_norm(&to_range));
    }
    let direct = {
        let total = &range_dims + &null.dimension_vector();
        total == Submodule::full(&sig, n).dimension_vector()
    };

    let kernel = shifted.kernel(tol)?;
    let kernel_dims = kernel.dimension_vector();
    let coker_dims = shifted.image(tol)?.orth_complement().dimension_vector();
    let index = IndexValue::from_difference(&kernel_dims, &coker_dims);
    let singular = shifted.operator_norm() == 0.0
        || shifted
            .frames()
            .iter()
            .flat_map(|b| linalg::singular_values(b))
            .fold(f64::INFINITY, f64::min)
            <= tol.rank_nominal * shifted.operator_norm().max(1.0);

    let clause_commuting_decomposition = commutator_norm <= 1e-9 * f.operator_norm().max(1.0)
        && decomposition_exact <= 1e-10 * f.operator_norm().max(1.0)
        && invertible_margin > tol.rank_hi;
    let clause_fredholm = true; // kernel and cokernel certified above
    let clause_weyl = index.is_zero();
    let clause_upper_semi_weyl = index.is_nonpositive();
    let clause_block_decomposition = direct && offdiag <= 1e-10 * f.operator_norm().max(1.0);
    let clause_nontrivial_kernel = !singular || !kernel_dims.is_zero();

    Ok(RieszReport {
        spectral_projection: p0,
        commuting_compact: k_op,
        invertible_part: t_op,
        commutator_norm,
        invertible_margin,
        range_dims,
        kernel_dims,
        clause_commuting_decomposition,
        clause_upper_semi_weyl,
        clause_fredholm,
        clause_weyl,
        clause_block_decomposition,
        clause_nontrivial_kernel,
        offdiag_residual: offdiag,
    })
}

/// Convenience constructor for the central multiplier `α ↦ αI` on `L_n`.
pub fn central_multiple(sig: &AlgebraSignature, n: usize, alpha: &AlgebraElement) -> DenseOperator {
    DenseOperator::diagonal(sig, &vec![alpha.clone(); n])
}

/// Patterns describing where `classify` places the example members; used by
/// tests to assert the descriptors are as expected.
pub fn pattern_class(modulus: u64, residue: u64, start: u64, a: &AlgebraElement) -> PatternClass {
    PatternClass { modulus, residue, start, annihilator: a.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::default_signature;

    fn shift(sig: &AlgebraSignature) -> ShiftPolynomial {
        ShiftPolynomial::shift(sig)
    }

    #[test]
    fn classify_shift_and_translates() {
        let sig = default_signature();
        let p = shift(&sig);
        let rep = classify_shift_polynomial(&p).unwrap();
        assert!(rep.flags.unwrap().in_mphi);
        assert_eq!(rep.index.unwrap(), IndexValue(vec![-2, -1]));

        // S - 2: root at z = 2, outside: invertible, index 0
        let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
        let rep = classify_shift_polynomial(&p.shifted(&two).unwrap()).unwrap();
        assert!(rep.flags.unwrap().in_mphi_zero);

        // S - 1: root on the circle: not semi-Fredholm
        let one = AlgebraElement::identity(&sig);
        let rep = classify_shift_polynomial(&p.shifted(&one).unwrap()).unwrap();
        let flags = rep.flags.unwrap();
        assert!(!flags.in_mphi_plus && !flags.in_mphi_minus);
    }

    #[test]
    fn radii_of_shift_and_scalars() {
        let sig = default_signature();
        let p = shift(&sig);
        let r = radii_exact(&p);
        assert!((r.s_plus - 1.0).abs() < 1e-12);
        assert!((r.s_minus - 1.0).abs() < 1e-12);
        assert!((r.s_phi - 1.0).abs() < 1e-12);
        assert!((r.s - 1.0).abs() < 1e-12);

        // constant 2: all radii 2
        let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
        let r = radii_exact(&ShiftPolynomial::constant(&sig, &two).unwrap());
        assert!((r.s - 2.0).abs() < 1e-12);

        // zero operator: radii all 0
        let zero = AlgebraElement::zero(&sig);
        let r = radii_exact(&ShiftPolynomial::constant(&sig, &zero).unwrap());
        assert_eq!(r.s, 0.0);
    }

    #[test]
    fn radii_grid_agrees_with_exact() {
        let sig = default_signature();
        let p = shift(&sig);
        let exact = radii_exact(&p);
        let grid = radii_grid(&p, 2.0, 0.05).unwrap();
        assert!((grid.s_plus - exact.s_plus).abs() <= grid.resolution + 1e-12);
        assert!((grid.s - exact.s).abs() <= grid.resolution + 1e-12);
        assert!(grid.s_phi <= grid.s + 1e-12);
    }

    #[test]
    fn radii_via_symbolic_and_adjoint_swap() {
        let sig = default_signature();
        let s = crate::symbolic::catalog("S", &sig).unwrap();
        let r = radii_symbolic(&s).unwrap();
        assert!((r.s - 1.0).abs() < 1e-12);
        // backward shift goes through the adjoint route
        let l = crate::symbolic::catalog("L", &sig).unwrap();
        let r = radii_symbolic(&l).unwrap();
        assert!((r.s_plus - 1.0).abs() < 1e-12);
        assert!((r.s_minus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn homotopy_constant_and_boundary() {
        let sig = default_signature();
        let p = shift(&sig);
        let zero = AlgebraElement::zero(&sig);
        let half = AlgebraElement::identity(&sig).scale(C64::new(0.5, 0.0));
        let rep = homotopy_sweep(&p, &zero, &half, 20).unwrap();
        assert!(rep.constant);
        assert_eq!(rep.index.unwrap(), IndexValue(vec![-2, -1]));

        // path through α = 1 crosses the circle
        let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
        let err = homotopy_sweep(&p, &zero, &two, 20).unwrap_err();
        assert!(matches!(err, MphiError::PathHitsBoundary { .. }));

        // constant path trivially constant
        let rep = homotopy_sweep(&p, &zero, &zero, 3).unwrap();
        assert!(rep.constant);
    }

    #[test]
    fn spectrum_partition_of_diagonal() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
        let f = DenseOperator::diagonal(
            &sig,
            &[two.clone(), two, AlgebraElement::zero(&sig)],
        );
        let grid = CentralGrid::axes(&sig, 2.5, 0.5).unwrap();
        let rep = spectrum_partition(&f, &grid, &tol).unwrap();
        assert!(rep.partition_holds);
        assert!(rep.weyl_partition_holds);
        // non-invertible only near 0 and 2 on each character
        for s in &rep.samples {
            if !s.invertible {
                let cs = s.alpha.central_coefficients();
                let near = cs.iter().any(|c| {
                    (c - C64::new(0.0, 0.0)).norm() < 0.26 || (c - C64::new(2.0, 0.0)).norm() < 0.26
                });
                assert!(near, "unexpected spectral point {cs:?}");
            }
        }

        // identity has no spectrum inside radius < 1
        let id = DenseOperator::identity(&sig, 2);
        let grid = CentralGrid::axes(&sig, 0.9, 0.3).unwrap();
        let rep = spectrum_partition(&id, &grid, &tol).unwrap();
        assert!(rep.samples.iter().all(|s| s.invertible));
    }

    #[test]
    fn riesz_on_diagonal_pattern() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
        let f = DenseOperator::diagonal(
            &sig,
            &[two.clone(), two, AlgebraElement::zero(&sig)],
        );
        let alpha = AlgebraElement::zero(&sig);
        let rep = riesz_analyze(&f, &alpha, 1.0, &tol).unwrap();
        assert_eq!(rep.range_dims, DimensionVector(vec![2, 1]));
        assert!(rep.commutator_norm <= 1e-9);
        assert!(rep.invertible_margin >= 0.5);
        // K = -P0 here
        let diff = rep
            .commuting_compact
            .add(&rep.spectral_projection)
            .unwrap()
            .operator_norm();
        assert!(diff < 1e-12);
        assert!(rep.clause_commuting_decomposition);
        assert!(rep.clause_fredholm);
        assert!(rep.clause_weyl);
        assert!(rep.clause_upper_semi_weyl);
        assert!(rep.clause_block_decomposition);
        assert!(rep.clause_nontrivial_kernel);
    }

    #[test]
    fn riesz_rejects_resolvent_point() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let id = DenseOperator::identity(&sig, 3);
        let alpha = AlgebraElement::zero(&sig);
        // spectrum of the identity is {1}: nothing within 0.5 of 0
        let err = riesz_analyze(&id, &alpha, 0.5, &tol).unwrap_err();
        assert!(matches!(err, MphiError::NotIsolated(_)));
    }

    #[test]
    fn riesz_eigenprojection_contains_kernel() {
        let sig = default_signature();
        let tol = Tolerances::default();
        // non-normal nilpotent-plus-diagonal pattern: kernel strictly
        // smaller than the spectral subspace at 0
        let mut f = DenseOperator::zero(&sig, 3, 3);
        f.set_entry(0, 1, AlgebraElement::identity(&sig));
        f.set_entry(2, 2, AlgebraElement::identity(&sig).scale(C64::new(3.0, 0.0)));
        let alpha = AlgebraElement::zero(&sig);
        let rep = riesz_analyze(&f, &alpha, 1.0, &tol).unwrap();
        assert!(rep.kernel_dims.le(&rep.range_dims));
        assert!(rep.kernel_dims != rep.range_dims);
        assert!(rep.commutator_norm <= 1e-9);
    }
}
