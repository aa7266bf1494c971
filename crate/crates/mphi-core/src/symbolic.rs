//! Shift-type operators on the infinite standard module `H_A`, with exact
//! semi-Fredholm classification and truncation to dense operators.
//!
//! An operator is a finite list of residue-class affine shift terms
//! (`e_j ↦ e_{t(j)} · γ` for `j ≡ r (mod m)`, `t(j) = a (j-r)/m + b`), a
//! finite table of exceptional columns, and a finite additive correction.
//! The decidable family keeps every coefficient either invertible or a
//! scaled Hermitian projection, and requires mutually orthogonal supports
//! wherever two terms feed the same coordinate. Within that family kernels
//! and cokernels decouple per residue class: each is either finitely
//! generated (computed exactly on a stabilized window) or an explicit
//! infinite pattern. Everything else reports `undecided` rather than a
//! guess.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraSignature, DimensionVector, IndexValue};
use crate::dense::DenseOperator;
use crate::error::{MphiError, Result};
use crate::linalg::{self, C64, Tolerances};
use crate::module::Submodule;

/// One residue-class affine shift term: sources `j ≡ residue (mod modulus)`
/// with `j ≥ start` map to `t(j) = stride * (j - residue)/modulus + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTerm {
    #[serde(rename = "m")]
    pub modulus: u64,
    #[serde(rename = "r")]
    pub residue: u64,
    #[serde(rename = "a")]
    pub stride: u64,
    #[serde(rename = "b")]
    pub offset: i64,
    #[serde(rename = "j0")]
    pub start: u64,
    pub coeff: AlgebraElement,
}

fn ceil_div(n: i64, d: i64) -> i64 {
    debug_assert!(d > 0);
    if n >= 0 {
        (n + d - 1) / d
    } else {
        -((-n) / d)
    }
}

impl ShiftTerm {
    pub fn new(
        modulus: u64,
        residue: u64,
        stride: u64,
        offset: i64,
        start: u64,
        coeff: AlgebraElement,
    ) -> Result<Self> {
        if modulus == 0 || stride == 0 {
            return Err(MphiError::Parse("term modulus and stride must be >= 1".into()));
        }
        if residue >= modulus {
            return Err(MphiError::Parse("term residue must satisfy r < m".into()));
        }
        Ok(ShiftTerm { modulus, residue, stride, offset, start: start.max(1), coeff })
    }

    /// Smallest parameter `q` with `j = r + m q >= start` and `t = a q + b >= 1`.
    fn q_start(&self) -> u64 {
        let m = self.modulus as i64;
        let r = self.residue as i64;
        let a = self.stride as i64;
        let q_src = ceil_div(self.start.max(1) as i64 - r, m);
        let q_tgt = ceil_div(1 - self.offset, a);
        q_src.max(q_tgt).max(i64::from(r == 0)) as u64
    }

    pub fn first_source(&self) -> u64 {
        self.residue + self.modulus * self.q_start()
    }

    pub fn first_target(&self) -> u64 {
        (self.stride as i64 * self.q_start() as i64 + self.offset) as u64
    }

    pub fn applies(&self, j: u64) -> bool {
        j >= self.first_source() && (j - self.residue) % self.modulus == 0
    }

    pub fn target(&self, j: u64) -> u64 {
        debug_assert!(self.applies(j));
        let q = (j - self.residue) / self.modulus;
        (self.stride as i64 * q as i64 + self.offset) as u64
    }

    /// Source mapping onto target `t`, when it exists.
    pub fn source_of_target(&self, t: u64) -> Option<u64> {
        let num = t as i64 - self.offset;
        if num < 0 || num % self.stride as i64 != 0 {
            return None;
        }
        let q = (num / self.stride as i64) as u64;
        if q < self.q_start() {
            return None;
        }
        Some(self.residue + self.modulus * q)
    }

    /// Refine to a larger modulus `l` (a multiple of `modulus`), splitting
    /// this term into `l / modulus` sub-terms with the same action.
    fn refine(&self, l: u64) -> Vec<ShiftTerm> {
        debug_assert_eq!(l % self.modulus, 0);
        let factor = l / self.modulus;
        (0..factor)
            .map(|s| {
                // sources j = r + m (s + factor q') = (r + m s) + l q'
                let residue = (self.residue + self.modulus * s) % l;
                let stride = self.stride * factor;
                let offset = self.offset + self.stride as i64 * s as i64;
                ShiftTerm {
                    modulus: l,
                    residue,
                    stride,
                    offset,
                    start: self.start,
                    coeff: self.coeff.clone(),
                }
            })
            .collect()
    }
}

/// A shift-type operator on `H_A`. Exceptions override the terms at their
/// source; the correction is additive on top of both.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicOperator {
    sig: AlgebraSignature,
    terms: Vec<ShiftTerm>,
    exceptions: BTreeMap<u64, Vec<(u64, AlgebraElement)>>,
    correction: BTreeMap<(u64, u64), AlgebraElement>, // (target, source) -> value
}

impl SymbolicOperator {
    pub fn new(sig: &AlgebraSignature, terms: Vec<ShiftTerm>) -> Result<Self> {
        for t in &terms {
            if t.coeff.signature() != sig {
                return Err(MphiError::ShapeMismatch("term coefficient signature mismatch".into()));
            }
        }
        Ok(SymbolicOperator {
            sig: sig.clone(),
            terms,
            exceptions: BTreeMap::new(),
            correction: BTreeMap::new(),
        })
    }

    pub fn identity(sig: &AlgebraSignature) -> Self {
        SymbolicOperator::new(
            sig,
            vec![ShiftTerm::new(1, 0, 1, 0, 1, AlgebraElement::identity(sig)).unwrap()],
        )
        .unwrap()
    }

    pub fn zero(sig: &AlgebraSignature) -> Self {
        SymbolicOperator::new(sig, Vec::new()).unwrap()
    }

    pub fn signature(&self) -> &AlgebraSignature {
        &self.sig
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    pub fn with_exception(mut self, source: u64, pattern: Vec<(u64, AlgebraElement)>) -> Self {
        self.exceptions.insert(source, pattern);
        self
    }

    /// Add a finite additive correction entry at `(target, source)`.
    pub fn with_correction(mut self, target: u64, source: u64, value: AlgebraElement) -> Self {
        let entry = self
            .correction
            .remove(&(target, source))
            .map(|old| &old + &value)
            .unwrap_or(value);
        if entry.norm() > 0.0 {
            self.correction.insert((target, source), entry);
        }
        self
    }

    pub fn correction_entries(&self) -> impl Iterator<Item = (&(u64, u64), &AlgebraElement)> {
        self.correction.iter()
    }

    pub fn exception_sources(&self) -> impl Iterator<Item = u64> + '_ {
        self.exceptions.keys().cloned()
    }

    /// Defining action on the basis vector `e_j` (1-based): a finite formal
    /// sum of `(target, coefficient)` pairs, merged and pruned.
    pub fn eval_basis(&self, j: u64) -> Vec<(u64, AlgebraElement)> {
        let mut acc: BTreeMap<u64, AlgebraElement> = BTreeMap::new();
        let mut add = |t: u64, c: &AlgebraElement| {
            let cur = acc.remove(&t).map(|old| &old + c).unwrap_or_else(|| c.clone());
            acc.insert(t, cur);
        };
        if let Some(pattern) = self.exceptions.get(&j) {
            for (t, c) in pattern {
                add(*t, c);
            }
        } else {
            for term in &self.terms {
                if term.applies(j) {
                    add(term.target(j), &term.coeff);
                }
            }
        }
        for ((t, s), c) in &self.correction {
            if *s == j {
                add(*t, c);
            }
        }
        acc.into_iter().filter(|(_, c)| c.norm() > 1e-14).collect()
    }

    /// Largest index carrying irregular data (exceptions or corrections).
    pub fn max_exception_index(&self) -> u64 {
        let mut m = 0;
        for (j, pat) in &self.exceptions {
            m = m.max(*j);
            for (t, _) in pat {
                m = m.max(*t);
            }
        }
        for (t, s) in self.correction.keys() {
            m = m.max(*t).max(*s);
        }
        m
    }

    /// Square compression to `L_n`: rows with targets beyond `n` are clipped.
    pub fn truncate(&self, n: u64) -> Result<DenseOperator> {
        let needed = self.max_exception_index();
        if n < needed {
            return Err(MphiError::WindowTooSmall { window: n, needed });
        }
        let mut op = DenseOperator::zero(&self.sig, n as usize, n as usize);
        for j in 1..=n {
            for (t, c) in self.eval_basis(j) {
                if t <= n {
                    let cur = op.entry(t as usize - 1, j as usize - 1) + &c;
                    op.set_entry(t as usize - 1, j as usize - 1, cur);
                }
            }
        }
        Ok(op)
    }

    /// Rectangular compression with domain at least `L_{n_in}` and codomain
    /// chosen so no target of a window source is clipped. The domain then
    /// absorbs every later source whose column lands entirely inside the
    /// codomain, so that for single-valued shift maps neither the kernel nor
    /// the cokernel carries boundary artifacts.
    pub fn windowed_truncate(&self, n_in: u64) -> Result<DenseOperator> {
        let needed = self.max_exception_index();
        if n_in < needed {
            return Err(MphiError::WindowTooSmall { window: n_in, needed });
        }
        let mut n_out = 1;
        let mut columns = Vec::with_capacity(n_in as usize);
        for j in 1..=n_in {
            let col = self.eval_basis(j);
            for (t, _) in &col {
                n_out = n_out.max(*t);
            }
            columns.push(col);
        }
        // absorb outside sources that reach into the codomain
        let mut domain_end = n_in;
        let mut probe = {
            // largest source any term can map to a target <= n_out
            let mut bound = domain_end;
            for t in &self.terms {
                if t.coeff.norm() <= 1e-14 {
                    continue;
                }
                let q_max = (n_out as i64 - t.offset).div_euclid(t.stride as i64);
                if q_max >= t.q_start() as i64 {
                    bound = bound.max(t.residue + t.modulus * q_max as u64);
                }
            }
            bound
        };
        while domain_end < probe {
            let j = domain_end + 1;
            let col = self.eval_basis(j);
            if col.iter().all(|(t, _)| *t <= n_out) {
                columns.push(col);
                domain_end = j;
            } else {
                // a mixed column would have to be clipped; stop expanding
                probe = domain_end;
            }
        }
        let mut op = DenseOperator::zero(&self.sig, domain_end as usize, n_out as usize);
        for (j, col) in columns.into_iter().enumerate() {
            for (t, c) in col {
                let cur = op.entry(t as usize - 1, j) + &c;
                op.set_entry(t as usize - 1, j, cur);
            }
        }
        Ok(op)
    }

    /// Starred transpose of the (target, source) graph.
    pub fn adjoint_symbolic(&self) -> Result<SymbolicOperator> {
        let mut adj_terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            // targets form the progression a q + b for q >= q0; the adjoint
            // term has modulus a, residue b mod a, stride m and an offset
            // shifted by the euclidean quotient of b by a.
            let a = t.stride as i64;
            let b = t.offset;
            let b_mod = b.rem_euclid(a);
            let k = (b - b_mod) / a;
            let adj = ShiftTerm {
                modulus: t.stride,
                residue: b_mod as u64,
                stride: t.modulus,
                offset: t.residue as i64 - t.modulus as i64 * k,
                start: t.first_target(),
                coeff: t.coeff.star(),
            };
            adj_terms.push(adj);
        }

        // columns of the adjoint are wrong wherever the original graph had
        // irregular entries; fix those finitely many sources by exceptions.
        let mut zone: BTreeSet<u64> = BTreeSet::new();
        for (j, pattern) in &self.exceptions {
            for term in &self.terms {
                if term.applies(*j) {
                    zone.insert(term.target(*j));
                }
            }
            for (t, _) in pattern {
                zone.insert(*t);
            }
        }
        for (t, _s) in self.correction.keys() {
            zone.insert(*t);
        }

        let mut result = SymbolicOperator {
            sig: self.sig.clone(),
            terms: adj_terms,
            exceptions: BTreeMap::new(),
            correction: BTreeMap::new(),
        };
        for t in zone {
            let mut row: BTreeMap<u64, AlgebraElement> = BTreeMap::new();
            let mut add = |j: u64, c: AlgebraElement| {
                let cur = row.remove(&j).map(|old| &old + &c).unwrap_or(c);
                row.insert(j, cur);
            };
            for term in &self.terms {
                if let Some(j) = term.source_of_target(t) {
                    if !self.exceptions.contains_key(&j) {
                        add(j, term.coeff.clone());
                    }
                }
            }
            for (j, pattern) in &self.exceptions {
                for (pt, c) in pattern {
                    if *pt == t {
                        add(*j, c.clone());
                    }
                }
            }
            for ((ct, cs), c) in &self.correction {
                if *ct == t {
                    add(*cs, c.clone());
                }
            }
            let pattern: Vec<(u64, AlgebraElement)> = row
                .into_iter()
                .filter(|(_, c)| c.norm() > 1e-14)
                .map(|(j, c)| (j, c.star()))
                .collect();
            result.exceptions.insert(t, pattern);
        }
        Ok(result)
    }
}

const MAX_PERIOD: u64 = 1 << 20;
const MAX_TERMS: usize = 4096;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Extended gcd: returns (g, x, y) with a x + b y = g.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Composite `G ∘ F` within the shift-term family; affine maps compose to
/// affine maps on refined residue classes, irregular columns become
/// exceptions.
pub fn compose_symbolic(g: &SymbolicOperator, f: &SymbolicOperator) -> Result<SymbolicOperator> {
    if g.sig != f.sig {
        return Err(MphiError::ShapeMismatch("signature mismatch".into()));
    }
    let mut out_terms: Vec<ShiftTerm> = Vec::new();
    for ft in &f.terms {
        for gt in &g.terms {
            // targets of ft must land in gt's source class:
            // a_f q + b_f ≡ r_g (mod m_g), q >= q0f, and a_f q + b_f >= start_g
            let af = ft.stride as i64;
            let bf = ft.offset;
            let mg = gt.modulus as i64;
            let rg = gt.residue as i64;
            let (gname, x, _) = egcd(af, mg);
            let gg = gname.abs();
            if (rg - bf).rem_euclid(mg) % gg != 0 {
                continue;
            }
            let m_red = mg / gg;
            // q ≡ q0 (mod m_red)
            let mut q0 = if m_red == 1 {
                0
            } else {
                let rhs = ((rg - bf).div_euclid(gg)).rem_euclid(m_red);
                let xm = x.rem_euclid(m_red);
                (xm * rhs).rem_euclid(m_red)
            };
            // shift q0 up to meet both starts
            let gt_q_needed = ceil_div(gt.first_source() as i64 - bf, af);
            let bound = (ft.q_start() as i64).max(gt_q_needed);
            if q0 < bound {
                let steps = ceil_div(bound - q0, m_red);
                q0 += steps * m_red;
            }
            // composite: j = r_f + m_f (q0 + m_red u)
            let modulus = ft.modulus * m_red as u64;
            if modulus > MAX_PERIOD {
                return Err(MphiError::NotRepresentable("composite modulus too large".into()));
            }
            let j0 = ft.residue as i64 + ft.modulus as i64 * q0;
            let residue = (j0 as u64) % modulus;
            // t1 at u: a_f (q0 + m_red u) + b_f; g parameter q_g = (t1 - r_g)/m_g
            let qg0 = (af * q0 + bf - rg) / mg;
            let stride_g_step = af * m_red / mg; // integer by construction
            let stride = (gt.stride as i64 * stride_g_step) as u64;
            // the term parameter runs from the residue, not from u = 0:
            // shift the offset so that stride*q + offset hits the right
            // targets for q = (j - residue)/modulus
            let q_offset = (j0 as u64 - residue) / modulus;
            let offset = gt.stride as i64 * qg0 + gt.offset - stride as i64 * q_offset as i64;
            let coeff = &gt.coeff * &ft.coeff;
            if coeff.norm() <= 1e-14 {
                continue;
            }
            out_terms.push(ShiftTerm {
                modulus,
                residue,
                stride,
                offset,
                start: j0 as u64,
                coeff,
            });
            if out_terms.len() > MAX_TERMS {
                return Err(MphiError::NotRepresentable("composite term count too large".into()));
            }
        }
    }

    // sources whose composite column cannot come from the pure term pairs
    let mut irregular: BTreeSet<u64> = BTreeSet::new();
    for j in f.exceptions.keys() {
        irregular.insert(*j);
    }
    for (_, s) in f.correction.keys() {
        irregular.insert(*s);
    }
    let mut g_irregular_targets: BTreeSet<u64> = g.exceptions.keys().cloned().collect();
    for (_, s) in g.correction.keys() {
        g_irregular_targets.insert(*s);
    }
    for ft in &f.terms {
        for t in &g_irregular_targets {
            if let Some(j) = ft.source_of_target(*t) {
                irregular.insert(j);
            }
        }
    }

    let mut result = SymbolicOperator {
        sig: f.sig.clone(),
        terms: out_terms,
        exceptions: BTreeMap::new(),
        correction: BTreeMap::new(),
    };
    for j in irregular {
        let mut acc: BTreeMap<u64, AlgebraElement> = BTreeMap::new();
        for (t, c1) in f.eval_basis(j) {
            for (u, c2) in g.eval_basis(t) {
                let prod = &c2 * &c1;
                let cur = acc.remove(&u).map(|old| &old + &prod).unwrap_or(prod);
                acc.insert(u, cur);
            }
        }
        let pattern = acc.into_iter().filter(|(_, c)| c.norm() > 1e-14).collect();
        result.exceptions.insert(j, pattern);
    }
    Ok(result)
}

// --- classification ---

/// Support certificate of a coefficient: a Hermitian projection per block
/// describing both the row and the column ideal of the coefficient.
#[derive(Debug, Clone)]
struct CoeffSupport {
    projection: AlgebraElement,
}

fn coeff_support(coeff: &AlgebraElement) -> Option<CoeffSupport> {
    let sig = coeff.signature().clone();
    let scale = coeff.norm();
    let mut blocks = Vec::with_capacity(sig.block_count());
    for (i, &n) in sig.blocks().iter().enumerate() {
        let b = coeff.block(i);
        let bnorm = linalg::operator_norm(b);
        if bnorm <= 1e-12 * scale.max(1.0) {
            blocks.push(DMatrix::<C64>::zeros(n, n));
            continue;
        }
        let sv = linalg::singular_values(b);
        let smallest = sv.last().cloned().unwrap_or(0.0);
        if smallest >= 1e-8 * bnorm {
            blocks.push(DMatrix::identity(n, n));
            continue;
        }
        // scaled Hermitian projection: b = c p with p^2 = p = p^*
        let h = b * b.adjoint();
        let lambda = linalg::operator_norm(&h);
        if lambda <= 0.0 {
            return None;
        }
        let p = &h / C64::new(lambda, 0.0);
        let idem = linalg::operator_norm(&(&p * &p - &p));
        let herm = linalg::operator_norm(&(p.adjoint() - &p));
        if idem > 1e-8 || herm > 1e-8 {
            return None;
        }
        let trp: C64 = (0..n).map(|k| p[(k, k)]).sum();
        if trp.norm() < 1e-12 {
            return None;
        }
        let c: C64 = (0..n).map(|k| (&p * b)[(k, k)]).sum::<C64>() / trp;
        let residual = linalg::operator_norm(&(b - &p * c));
        if residual > 1e-8 * bnorm {
            return None;
        }
        blocks.push(p);
    }
    AlgebraElement::from_blocks(&sig, blocks)
        .ok()
        .map(|projection| CoeffSupport { projection })
}

/// Orthogonal projection onto the sum of the support images.
fn support_join(sig: &AlgebraSignature, supports: &[&CoeffSupport]) -> AlgebraElement {
    let tol = Tolerances::default();
    let blocks = sig
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if supports.is_empty() {
                return DMatrix::<C64>::zeros(n, n);
            }
            let mut stacked = DMatrix::<C64>::zeros(n, n * supports.len());
            for (k, s) in supports.iter().enumerate() {
                stacked.view_mut((0, k * n), (n, n)).copy_from(s.projection.block(i));
            }
            let q = linalg::colspace_nominal(&stacked, Some(1.0), &tol);
            &q * q.adjoint()
        })
        .collect();
    AlgebraElement::from_blocks(sig, blocks).unwrap()
}

fn projection_rank_dims(p: &AlgebraElement) -> DimensionVector {
    let tol = Tolerances::default();
    DimensionVector(
        p.blocks()
            .iter()
            .map(|b| linalg::nominal_rank(b, Some(1.0), &tol) as u64)
            .collect(),
    )
}

/// An infinite kernel-side pattern: for every source `j ≡ residue (mod
/// modulus)` with `j ≥ start`, the column `e_j · annihilator · A` lies in
/// the kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternClass {
    pub modulus: u64,
    pub residue: u64,
    pub start: u64,
    pub annihilator: AlgebraElement,
}

impl PatternClass {
    pub fn annihilator_dims(&self) -> DimensionVector {
        projection_rank_dims(&self.annihilator)
    }

    /// Number of pattern sources inside `1..=window`.
    pub fn count_in_window(&self, window: u64) -> u64 {
        if window < self.start {
            return 0;
        }
        (window - self.start) / self.modulus + 1
    }
}

/// Kernel or cokernel description of a shift-type operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelDescriptor {
    FinitelyGenerated {
        dim_vector: DimensionVector,
        /// Window on which the generators were computed.
        window: u64,
    },
    InfinitePattern { classes: Vec<PatternClass> },
    /// Not determined; carries no data.
    NotApplicable { reason: String },
}

impl KernelDescriptor {
    pub fn is_finitely_generated(&self) -> bool {
        matches!(self, KernelDescriptor::FinitelyGenerated { .. })
    }

    pub fn dim_vector(&self) -> Option<&DimensionVector> {
        match self {
            KernelDescriptor::FinitelyGenerated { dim_vector, .. } => Some(dim_vector),
            _ => None,
        }
    }
}

/// Membership flags for the semi-Fredholm and semi-Weyl classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub in_mphi_plus: bool,
    pub in_mphi_minus: bool,
    pub in_mphi: bool,
    pub in_mphi_zero: bool,
    pub in_mphi_plus_minus: bool,
    pub in_mphi_minus_plus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClassificationStatus {
    Decided,
    Undecided { reason: String },
}

/// Full classification report: flags, index when Fredholm, and the kernel
/// and cokernel descriptors. Undecided reports carry no flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(flatten)]
    pub status: ClassificationStatus,
    pub flags: Option<ClassFlags>,
    pub index: Option<IndexValue>,
    pub kernel: KernelDescriptor,
    pub cokernel: KernelDescriptor,
}

impl ClassificationReport {
    pub fn undecided(reason: impl Into<String>) -> Self {
        let reason = reason.into();
        ClassificationReport {
            status: ClassificationStatus::Undecided { reason: reason.clone() },
            flags: None,
            index: None,
            kernel: KernelDescriptor::NotApplicable { reason: reason.clone() },
            cokernel: KernelDescriptor::NotApplicable { reason },
        }
    }

    pub fn is_decided(&self) -> bool {
        matches!(self.status, ClassificationStatus::Decided)
    }
}

/// Result of the one-sided (kernel) analysis.
struct KernelAnalysis {
    descriptor: KernelDescriptor,
    /// Exact kernel submodule on the window, in the finitely generated case.
    submodule: Option<Submodule>,
}

impl SymbolicOperator {
    /// Kernel-side analysis; the cokernel is the kernel of the adjoint.
    fn kernel_analysis(&self, tol: &Tolerances) -> std::result::Result<KernelAnalysis, String> {
        if self.terms.len() > MAX_TERMS {
            return Err("too many terms".into());
        }
        // common source period
        let mut period: u64 = 1;
        for t in &self.terms {
            period = lcm(period, t.modulus);
            if period > MAX_PERIOD {
                return Err("source period too large".into());
            }
        }
        let mut refined: Vec<ShiftTerm> = Vec::new();
        for t in self.terms.iter().flat_map(|t| t.refine(period)) {
            if t.coeff.norm() <= 1e-14 {
                continue;
            }
            // merge terms with identical affine maps by summing coefficients
            if let Some(existing) = refined.iter_mut().find(|e| {
                e.residue == t.residue
                    && e.stride == t.stride
                    && e.offset == t.offset
                    && e.start == t.start
            }) {
                existing.coeff = &existing.coeff + &t.coeff;
            } else {
                refined.push(t);
            }
        }
        refined.retain(|t| t.coeff.norm() > 1e-14);
        if refined.len() > MAX_TERMS {
            return Err("too many refined terms".into());
        }
        let supports: Vec<CoeffSupport> = refined
            .iter()
            .map(|t| coeff_support(&t.coeff))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                "coefficient outside the invertible / scaled-projection family".to_string()
            })?;

        // Pairwise interactions. Two distinct refined terms collide whenever
        // their target progressions intersect; since their sources agree in
        // at most one parameter value, every shared target couples distinct
        // sources and the equations only decouple when the coefficient
        // supports are orthogonal. The lone same-source touch points go
        // into the irregular window instead.
        let mut coincidence_sources: BTreeSet<u64> = BTreeSet::new();
        for i in 0..refined.len() {
            for j in (i + 1)..refined.len() {
                let ti = &refined[i];
                let tj = &refined[j];
                let g = gcd(ti.stride, tj.stride) as i64;
                if (tj.offset - ti.offset) % g == 0 {
                    let cross = (&supports[i].projection * &supports[j].projection).norm();
                    if cross > 1e-9 {
                        return Err(format!(
                            "target collision with non-orthogonal coefficient supports (norm {cross:.2e})"
                        ));
                    }
                }
                if ti.residue == tj.residue && ti.stride != tj.stride {
                    // same source hits both terms' targets at one parameter
                    let num = tj.offset - ti.offset;
                    let den = ti.stride as i64 - tj.stride as i64;
                    if num % den == 0 {
                        let q = num / den;
                        if q >= ti.q_start().max(tj.q_start()) as i64 && q >= 0 {
                            coincidence_sources.insert(ti.residue + period * q as u64);
                        }
                    }
                }
            }
        }

        // per-class tail annihilators
        let identity = AlgebraElement::identity(&self.sig);
        let mut patterns: Vec<PatternClass> = Vec::new();
        for r in 0..period {
            let members: Vec<usize> = refined
                .iter()
                .enumerate()
                .filter(|(_, t)| t.residue == r)
                .map(|(k, _)| k)
                .collect();
            let class_start = members
                .iter()
                .map(|&k| refined[k].first_source())
                .max()
                .unwrap_or(if r == 0 { period } else { r });
            let join = support_join(
                &self.sig,
                &members.iter().map(|&k| &supports[k]).collect::<Vec<_>>(),
            );
            let annihilator = &identity - &join;
            let ann_norm = annihilator.norm();
            if ann_norm <= 1e-9 {
                continue; // fully covered class
            }
            if ann_norm < 0.5 {
                return Err("tail annihilator neither zero nor a projection".into());
            }
            patterns.push(PatternClass {
                modulus: period,
                residue: r,
                start: class_start.max(1),
                annihilator,
            });
        }

        if !patterns.is_empty() {
            return Ok(KernelAnalysis {
                descriptor: KernelDescriptor::InfinitePattern { classes: patterns },
                submodule: None,
            });
        }

        // finitely generated: the kernel is supported on the irregular
        // window. Collect every source whose equations are not pure-tail.
        let mut bound: u64 = period.max(2);
        for j in self.exceptions.keys() {
            bound = bound.max(*j);
        }
        let mut irregular_targets: BTreeSet<u64> = BTreeSet::new();
        for pattern in self.exceptions.values() {
            for (t, _) in pattern {
                irregular_targets.insert(*t);
            }
        }
        for ((t, s), _) in &self.correction {
            irregular_targets.insert(*t);
            bound = bound.max(*s);
        }
        for t in &refined {
            bound = bound.max(t.first_source());
            irregular_targets.insert(t.first_target());
        }
        for t in &refined {
            for tgt in &irregular_targets {
                if let Some(j) = t.source_of_target(*tgt) {
                    bound = bound.max(j);
                }
            }
        }
        for j in &coincidence_sources {
            bound = bound.max(*j);
        }
        // round the window up to whole periods past the bound
        let window = ((bound / period) + 2) * period;
        let truncated = self
            .windowed_truncate(window)
            .map_err(|e| format!("window truncation failed: {e}"))?;
        let kernel = truncated
            .kernel(tol)
            .map_err(|e| format!("window kernel ambiguous: {e}"))?;
        // stabilization certificate: one more period must not change dims
        let check = self
            .windowed_truncate(window + period)
            .map_err(|e| format!("window truncation failed: {e}"))?
            .kernel(tol)
            .map_err(|e| format!("window kernel ambiguous: {e}"))?;
        if kernel.dimension_vector() != check.dimension_vector() {
            return Err("kernel dimension did not stabilize across windows".into());
        }
        Ok(KernelAnalysis {
            descriptor: KernelDescriptor::FinitelyGenerated {
                dim_vector: kernel.dimension_vector(),
                window,
            },
            submodule: Some(kernel),
        })
    }

    /// Exact kernel submodule (on its stabilization window) when finitely
    /// generated.
    pub fn kernel_submodule(&self, tol: &Tolerances) -> Result<(Submodule, u64)> {
        match self.kernel_analysis(tol) {
            Ok(KernelAnalysis {
                descriptor: KernelDescriptor::FinitelyGenerated { window, .. },
                submodule: Some(sub),
            }) => Ok((sub, window)),
            Ok(_) => Err(MphiError::Undecided("kernel is not finitely generated".into())),
            Err(reason) => Err(MphiError::Undecided(reason)),
        }
    }

    /// Full classification into the semi-Fredholm / semi-Weyl classes.
    pub fn classify(&self, tol: &Tolerances) -> ClassificationReport {
        let kernel = match self.kernel_analysis(tol) {
            Ok(k) => k,
            Err(reason) => return ClassificationReport::undecided(reason),
        };
        let adjoint = match self.adjoint_symbolic() {
            Ok(a) => a,
            Err(e) => return ClassificationReport::undecided(format!("adjoint: {e}")),
        };
        let cokernel = match adjoint.kernel_analysis(tol) {
            Ok(k) => k,
            Err(reason) => return ClassificationReport::undecided(format!("cokernel: {reason}")),
        };

        let upper = kernel.descriptor.is_finitely_generated();
        let lower = cokernel.descriptor.is_finitely_generated();
        let fredholm = upper && lower;
        let index = if fredholm {
            Some(IndexValue::from_difference(
                kernel.descriptor.dim_vector().unwrap(),
                cokernel.descriptor.dim_vector().unwrap(),
            ))
        } else {
            None
        };
        let in_mphi_zero = index.as_ref().map(|i| i.is_zero()).unwrap_or(false);
        let in_mphi_plus_minus =
            (fredholm && index.as_ref().map(|i| i.is_nonpositive()).unwrap_or(false))
                || (upper && !fredholm);
        let in_mphi_minus_plus =
            (fredholm && index.as_ref().map(|i| i.is_nonnegative()).unwrap_or(false))
                || (lower && !fredholm);
        ClassificationReport {
            status: ClassificationStatus::Decided,
            flags: Some(ClassFlags {
                in_mphi_plus: upper,
                in_mphi_minus: lower,
                in_mphi: fredholm,
                in_mphi_zero,
                in_mphi_plus_minus,
                in_mphi_minus_plus,
            }),
            index,
            kernel: kernel.descriptor,
            cokernel: cokernel.descriptor,
        }
    }

    /// View as a polynomial in the forward shift when representable: all
    /// terms must be total forward shifts with central coefficients.
    pub fn to_shift_polynomial(&self) -> Option<crate::spectra::ShiftPolynomial> {
        if !self.exceptions.is_empty() || !self.correction.is_empty() {
            return None;
        }
        let mut coeffs: BTreeMap<u64, AlgebraElement> = BTreeMap::new();
        for t in &self.terms {
            if t.modulus != 1 || t.residue != 0 || t.stride != 1 || t.offset < 0 {
                return None;
            }
            if t.start > 1 || !t.coeff.is_central(1e-12) {
                return None;
            }
            let d = t.offset as u64;
            let cur = coeffs
                .remove(&d)
                .map(|old| &old + &t.coeff)
                .unwrap_or_else(|| t.coeff.clone());
            coeffs.insert(d, cur);
        }
        let deg = coeffs.keys().max().cloned().unwrap_or(0);
        let list = (0..=deg)
            .map(|d| coeffs.remove(&d).unwrap_or_else(|| AlgebraElement::zero(&self.sig)))
            .collect();
        crate::spectra::ShiftPolynomial::new(&self.sig, list).ok()
    }
}

// --- catalog ---

/// Catalog of shift-type example operators, by their conventional names.
///
/// * `I` identity; `S` forward shift `e_k ↦ e_{k+1}`; `L` backward shift.
/// * `ex1` doubling isometry `e_k ↦ e_{2k}`.
/// * `ex2` halving co-isometry `e_{2k} ↦ e_k`, odd sources to zero.
/// * `ex3` spreading isometry `e_k ↦ e_{3k}`; `ex3d` its one-sided inverse.
/// * `ex4`/`ex5` two-cell splitting and averaging pair over a commutative
///   signature (adjoints of each other).
/// * `ex6`/`ex6d` the same pair driven by a rank-one projection inside a
///   matrix block.
/// * `ex7`/`ex7d` the k-cell splitting pair over a commutative signature.
/// * `ex8` the odd/even transposition permutation.
/// * `ex9` the diagonal multiplier `e_k ↦ e_k · α` (α = 2 by default).
/// * `ex15` re-indexing isometry fixing a finite set; `ex15g` its
///   co-isometric mirror with infinite kernel.
pub fn catalog(name: &str, sig: &AlgebraSignature) -> Result<SymbolicOperator> {
    let id = AlgebraElement::identity(sig);
    let make = |terms: Vec<ShiftTerm>| SymbolicOperator::new(sig, terms);
    match name {
        "I" | "identity" => Ok(SymbolicOperator::identity(sig)),
        "S" => make(vec![ShiftTerm::new(1, 0, 1, 1, 1, id)?]),
        "L" => make(vec![ShiftTerm::new(1, 0, 1, -1, 2, id)?]),
        "ex1" => make(vec![ShiftTerm::new(1, 0, 2, 0, 1, id)?]),
        "ex2" => make(vec![ShiftTerm::new(2, 0, 1, 0, 2, id)?]),
        "ex3" => make(vec![ShiftTerm::new(1, 0, 3, 0, 1, id)?]),
        "ex3d" => make(vec![ShiftTerm::new(3, 0, 1, 0, 3, id)?]),
        "ex4" | "ex5" | "ex6" | "ex6d" => {
            let (p, q) = splitting_pair(sig, name)?;
            if name == "ex4" || name == "ex6" {
                make(vec![
                    ShiftTerm::new(1, 0, 2, -1, 1, p)?,
                    ShiftTerm::new(1, 0, 2, 0, 1, q)?,
                ])
            } else {
                make(vec![
                    ShiftTerm::new(2, 1, 1, 1, 1, p)?,
                    ShiftTerm::new(2, 0, 1, 0, 2, q)?,
                ])
            }
        }
        "ex7" => {
            let ps = cell_partition(sig)?;
            let k = ps.len() as u64;
            let terms = ps
                .into_iter()
                .enumerate()
                .map(|(j, p)| ShiftTerm::new(1, 0, k, j as i64 + 1 - k as i64, 1, p))
                .collect::<Result<Vec<_>>>()?;
            make(terms)
        }
        "ex7d" => {
            let ps = cell_partition(sig)?;
            let k = ps.len() as u64;
            let terms = ps
                .into_iter()
                .enumerate()
                .map(|(idx, p)| {
                    let i = idx as u64 + 1; // 1-based cell
                    if i < k {
                        ShiftTerm::new(k, i, 1, 1, i, p)
                    } else {
                        ShiftTerm::new(k, 0, 1, 0, k, p)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            make(terms)
        }
        "ex8" => make(vec![
            ShiftTerm::new(2, 1, 2, 2, 1, id.clone())?,
            ShiftTerm::new(2, 0, 2, -1, 2, id)?,
        ]),
        "ex9" => {
            let alpha = id.scale(C64::new(2.0, 0.0));
            multiplier(sig, &alpha)
        }
        "ex15" => Ok(make(vec![ShiftTerm::new(1, 0, 2, -1, 2, id.clone())?])?
            .with_exception(1, vec![(1, id)])),
        "ex15g" => Ok(make(vec![ShiftTerm::new(2, 0, 1, 1, 2, id.clone())?])?
            .with_exception(1, vec![(1, id)])),
        other => Err(MphiError::UnknownName(other.into())),
    }
}

/// Diagonal multiplier `e_k ↦ e_k · α` for an invertible α.
pub fn multiplier(sig: &AlgebraSignature, alpha: &AlgebraElement) -> Result<SymbolicOperator> {
    if alpha.invertibility_margin() <= 1e-10 {
        return Err(MphiError::Singular {
            smallest: alpha.invertibility_margin(),
            threshold: 1e-10,
        });
    }
    SymbolicOperator::new(sig, vec![ShiftTerm::new(1, 0, 1, 0, 1, alpha.clone())?])
}

/// Two orthogonal projections summing to the identity, either from the
/// central cells of a commutative signature or from a rank-one corner of a
/// matrix block.
fn splitting_pair(sig: &AlgebraSignature, name: &str) -> Result<(AlgebraElement, AlgebraElement)> {
    let id = AlgebraElement::identity(sig);
    if name == "ex4" || name == "ex5" {
        if !sig.is_commutative() || sig.block_count() < 2 {
            return Err(MphiError::InvalidSignature(
                "ex4/ex5 need a commutative signature with at least two cells".into(),
            ));
        }
        let half = sig.block_count().div_ceil(2);
        let coeffs: Vec<C64> = (0..sig.block_count())
            .map(|i| C64::new(if i < half { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let p = AlgebraElement::central(sig, &coeffs)?;
        let q = &id - &p;
        Ok((p, q))
    } else {
        let block = sig.blocks().iter().position(|&n| n >= 2).ok_or_else(|| {
            MphiError::InvalidSignature("ex6 needs a matrix block of size >= 2".into())
        })?;
        let mut blocks: Vec<DMatrix<C64>> =
            sig.blocks().iter().map(|&n| DMatrix::zeros(n, n)).collect();
        blocks[block][(0, 0)] = C64::new(1.0, 0.0);
        let p = AlgebraElement::from_blocks(sig, blocks)?;
        let q = &id - &p;
        Ok((p, q))
    }
}

/// The full family of central cell projections of a commutative signature.
fn cell_partition(sig: &AlgebraSignature) -> Result<Vec<AlgebraElement>> {
    if !sig.is_commutative() || sig.block_count() < 2 {
        return Err(MphiError::InvalidSignature(
            "cell partition needs a commutative signature with at least two cells".into(),
        ));
    }
    Ok(crate::algebra::central_basis(sig))
}

// --- serde ---

#[derive(Serialize, Deserialize)]
struct ExceptionRepr {
    source: u64,
    pattern: Vec<(u64, AlgebraElement)>,
}

#[derive(Serialize, Deserialize)]
struct CorrectionRepr {
    row: u64,
    col: u64,
    value: AlgebraElement,
}

#[derive(Serialize, Deserialize)]
struct SymbolicOperatorRepr {
    signature: AlgebraSignature,
    terms: Vec<ShiftTerm>,
    exceptions: Vec<ExceptionRepr>,
    correction: Vec<CorrectionRepr>,
}

impl Serialize for SymbolicOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymbolicOperatorRepr {
            signature: self.sig.clone(),
            terms: self.terms.clone(),
            exceptions: self
                .exceptions
                .iter()
                .map(|(source, pattern)| ExceptionRepr {
                    source: *source,
                    pattern: pattern.clone(),
                })
                .collect(),
            correction: self
                .correction
                .iter()
                .map(|((row, col), value)| CorrectionRepr {
                    row: *row,
                    col: *col,
                    value: value.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymbolicOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SymbolicOperatorRepr::deserialize(d)?;
        let mut op =
            SymbolicOperator::new(&repr.signature, repr.terms).map_err(serde::de::Error::custom)?;
        for e in repr.exceptions {
            op = op.with_exception(e.source, e.pattern);
        }
        for c in repr.correction {
            op = op.with_correction(c.row, c.col, c.value);
        }
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::default_signature;

    fn sig_c2() -> AlgebraSignature {
        AlgebraSignature::new(vec![1, 1]).unwrap()
    }

    fn eval_map(op: &SymbolicOperator, j: u64) -> Vec<(u64, AlgebraElement)> {
        op.eval_basis(j)
    }

    fn ops_agree_on_window(a: &SymbolicOperator, b: &SymbolicOperator, window: u64) -> bool {
        for j in 1..=window {
            let ea = eval_map(a, j);
            let eb = eval_map(b, j);
            if ea.len() != eb.len() {
                return false;
            }
            for ((t1, c1), (t2, c2)) in ea.iter().zip(&eb) {
                if t1 != t2 || (c1 - c2).norm() > 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn catalog_defining_actions() {
        let sig = default_signature();
        let id = AlgebraElement::identity(&sig);

        let ex1 = catalog("ex1", &sig).unwrap();
        assert_eq!(eval_map(&ex1, 3), vec![(6, id.clone())]);

        let ex2 = catalog("ex2", &sig).unwrap();
        assert_eq!(eval_map(&ex2, 4), vec![(2, id.clone())]);
        assert!(eval_map(&ex2, 3).is_empty());

        let ex9 = catalog("ex9", &sig).unwrap();
        let two = id.scale(C64::new(2.0, 0.0));
        assert_eq!(eval_map(&ex9, 5), vec![(5, two)]);

        let identity = catalog("I", &sig).unwrap();
        assert_eq!(eval_map(&identity, 7), vec![(7, id.clone())]);

        let s = catalog("S", &sig).unwrap();
        assert_eq!(eval_map(&s, 4), vec![(5, id.clone())]);
        let l = catalog("L", &sig).unwrap();
        assert_eq!(eval_map(&l, 4), vec![(3, id.clone())]);
        assert!(eval_map(&l, 1).is_empty());
    }

    #[test]
    fn ex4_layout_and_partition() {
        let sig = sig_c2();
        let ex4 = catalog("ex4", &sig).unwrap();
        let out = eval_map(&ex4, 2);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, 3);
        assert_eq!(out[1].0, 4);
        let chi1 = &out[0].1;
        let chi2 = &out[1].1;
        assert!(chi1.is_projection(1e-12));
        assert!(chi2.is_projection(1e-12));
        assert!((&(chi1 + chi2) - &AlgebraElement::identity(&sig)).norm() < 1e-12);
        assert!((chi1 * chi2).norm() < 1e-12);
    }

    #[test]
    fn adjoint_of_ex4_is_ex5() {
        let sig = sig_c2();
        let ex4 = catalog("ex4", &sig).unwrap();
        let ex5 = catalog("ex5", &sig).unwrap();
        let adj = ex4.adjoint_symbolic().unwrap();
        assert!(ops_agree_on_window(&adj, &ex5, 40));
    }

    #[test]
    fn adjoint_is_involutive() {
        let sig = default_signature();
        for name in ["ex1", "ex2", "ex8", "S", "L", "ex15", "ex15g"] {
            let f = catalog(name, &sig).unwrap();
            let back = f.adjoint_symbolic().unwrap().adjoint_symbolic().unwrap();
            assert!(ops_agree_on_window(&f, &back, 50), "involution failed for {name}");
        }
    }

    #[test]
    fn adjoint_of_permutation_is_inverse() {
        let sig = default_signature();
        let u = catalog("ex8", &sig).unwrap();
        let adj = u.adjoint_symbolic().unwrap();
        let prod = compose_symbolic(&adj, &u).unwrap();
        assert!(ops_agree_on_window(&prod, &SymbolicOperator::identity(&sig), 40));
    }

    #[test]
    fn compose_halving_after_doubling_is_identity() {
        let sig = default_signature();
        let ex1 = catalog("ex1", &sig).unwrap();
        let ex2 = catalog("ex2", &sig).unwrap();
        let prod = compose_symbolic(&ex2, &ex1).unwrap();
        assert!(ops_agree_on_window(&prod, &SymbolicOperator::identity(&sig), 40));
    }

    #[test]
    fn compose_doubling_twice() {
        let sig = default_signature();
        let ex1 = catalog("ex1", &sig).unwrap();
        let prod = compose_symbolic(&ex1, &ex1).unwrap();
        for k in 1..10 {
            let out = eval_map(&prod, k);
            assert_eq!(out.len(), 1);
            assert_eq!(out[0].0, 4 * k);
        }
    }

    #[test]
    fn compose_averaging_after_splitting_is_identity() {
        let sig = sig_c2();
        let ex4 = catalog("ex4", &sig).unwrap();
        let ex5 = catalog("ex5", &sig).unwrap();
        let prod = compose_symbolic(&ex5, &ex4).unwrap();
        assert!(ops_agree_on_window(&prod, &SymbolicOperator::identity(&sig), 40));
    }

    #[test]
    fn compose_permutation_with_multiplier() {
        let sig = default_signature();
        let u = catalog("ex8", &sig).unwrap();
        let v = catalog("ex9", &sig).unwrap();
        let prod = compose_symbolic(&u, &v).unwrap();
        let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
        assert_eq!(eval_map(&prod, 1), vec![(2, two.clone())]);
        assert_eq!(eval_map(&prod, 2), vec![(1, two)]);
    }

    #[test]
    fn classify_catalog_members() {
        let sig = default_signature();
        let tol = Tolerances::default();

        let rep = catalog("ex1", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_plus && !flags.in_mphi && !flags.in_mphi_minus);
        assert!(flags.in_mphi_plus_minus);
        assert!(matches!(rep.cokernel, KernelDescriptor::InfinitePattern { .. }));

        let rep = catalog("ex2", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_minus && !flags.in_mphi && !flags.in_mphi_plus);
        assert!(flags.in_mphi_minus_plus);
        assert!(matches!(rep.kernel, KernelDescriptor::InfinitePattern { .. }));

        let rep = catalog("L", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi);
        assert_eq!(rep.index.unwrap(), IndexValue(vec![2, 1]));

        let rep = catalog("S", &sig).unwrap().classify(&tol);
        assert_eq!(rep.index.unwrap(), IndexValue(vec![-2, -1]));

        let rep = catalog("I", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_zero);
        assert_eq!(rep.index.unwrap(), IndexValue(vec![0, 0]));

        let rep = catalog("ex8", &sig).unwrap().classify(&tol);
        assert!(rep.flags.unwrap().in_mphi_zero);

        let rep = catalog("ex9", &sig).unwrap().classify(&tol);
        assert!(rep.flags.unwrap().in_mphi_zero);
    }

    #[test]
    fn classify_splitting_pairs() {
        let sig = sig_c2();
        let tol = Tolerances::default();

        let rep = catalog("ex4", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_plus && !flags.in_mphi);
        assert_eq!(rep.kernel.dim_vector().unwrap(), &DimensionVector(vec![0, 0]));

        let rep = catalog("ex5", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_minus && !flags.in_mphi);
        assert!(matches!(rep.kernel, KernelDescriptor::InfinitePattern { .. }));
        assert_eq!(rep.cokernel.dim_vector().unwrap(), &DimensionVector(vec![0, 0]));

        let sig = default_signature();
        let rep = catalog("ex6", &sig).unwrap().classify(&tol);
        assert!(rep.flags.unwrap().in_mphi_plus);
        let rep = catalog("ex6d", &sig).unwrap().classify(&tol);
        assert!(rep.flags.unwrap().in_mphi_minus);

        let sig3 = AlgebraSignature::new(vec![1, 1, 1]).unwrap();
        let rep = catalog("ex7", &sig3).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_plus && !flags.in_mphi);
        let rep = catalog("ex7d", &sig3).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_minus && !flags.in_mphi);
    }

    #[test]
    fn classify_ex15_pair() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let rep = catalog("ex15", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_plus && !flags.in_mphi);
        assert!(flags.in_mphi_plus_minus);

        let rep = catalog("ex15g", &sig).unwrap().classify(&tol);
        let flags = rep.flags.unwrap();
        assert!(flags.in_mphi_minus && !flags.in_mphi);
        assert!(flags.in_mphi_minus_plus);
    }

    #[test]
    fn kernel_pattern_of_averaging_matches_cokernel_of_splitting() {
        let sig = sig_c2();
        let tol = Tolerances::default();
        let ex4 = catalog("ex4", &sig).unwrap();
        let ex5 = catalog("ex5", &sig).unwrap();
        let ker5 = ex5.classify(&tol).kernel;
        let cok4 = ex4.classify(&tol).cokernel;
        assert_eq!(ker5, cok4);
    }

    #[test]
    fn truncation_shapes_and_kernel() {
        let sig = default_signature();
        let tol = Tolerances::default();

        let id = catalog("I", &sig).unwrap();
        let t = id.truncate(4).unwrap();
        assert!(t.sub(&DenseOperator::identity(&sig, 4)).unwrap().operator_norm() < 1e-14);

        // square truncation of ex1 on L_4 clips targets 6 and 8: kernel e3, e4
        let ex1 = catalog("ex1", &sig).unwrap();
        let t = ex1.truncate(4).unwrap();
        let ker = t.kernel(&tol).unwrap();
        let expected = Submodule::coordinate_span(&sig, 4, &[2, 3]);
        assert!(ker.distance(&expected) < 1e-10);

        // windowed truncation of the forward shift: domain 4, codomain 5
        let s = catalog("S", &sig).unwrap();
        let w = s.windowed_truncate(4).unwrap();
        assert_eq!(w.domain_len(), 4);
        assert_eq!(w.codomain_len(), 5);
        assert_eq!(w.index(&tol).unwrap(), IndexValue(vec![-2, -1]));

        let l = catalog("L", &sig).unwrap();
        let w = l.windowed_truncate(5).unwrap();
        assert_eq!(w.domain_len(), 5);
        assert_eq!(w.codomain_len(), 4);
        assert_eq!(w.index(&tol).unwrap(), IndexValue(vec![2, 1]));
    }

    #[test]
    fn truncation_naturality_on_interior() {
        let sig = default_signature();
        let ex1 = catalog("ex1", &sig).unwrap();
        let ex2 = catalog("ex2", &sig).unwrap();
        let composite = compose_symbolic(&ex2, &ex1).unwrap();
        let n = 8;
        let f = ex1.windowed_truncate(n).unwrap();
        let g = ex2.windowed_truncate(f.codomain_len() as u64).unwrap();
        let dense = crate::dense::compose(&g, &f).unwrap();
        let direct = composite.windowed_truncate(n).unwrap();
        for j in 0..n as usize {
            for t in 0..direct.codomain_len().min(dense.codomain_len()) {
                let d = dense.entry(t, j) - direct.entry(t, j);
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn classification_truncation_window_counts() {
        // infinite kernel pattern of ex2: odd sources; counts in windows
        let sig = default_signature();
        let tol = Tolerances::default();
        let ex2 = catalog("ex2", &sig).unwrap();
        let rep = ex2.classify(&tol);
        let classes = match &rep.kernel {
            KernelDescriptor::InfinitePattern { classes } => classes,
            _ => panic!("expected pattern"),
        };
        for n in [8u64, 16, 32] {
            let expected: u64 = classes
                .iter()
                .map(|c| c.count_in_window(n) * c.annihilator_dims().counts()[0])
                .sum();
            let t = ex2.truncate(n).unwrap();
            let ker = t.kernel(&tol).unwrap();
            assert_eq!(ker.dimension_vector().counts()[0], expected);
        }
    }

    #[test]
    fn index_additive_on_symbolic_compositions() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let l = catalog("L", &sig).unwrap();
        let s = catalog("S", &sig).unwrap();
        for (g, f) in [(&l, &s), (&s, &l), (&l, &l), (&s, &s)] {
            let prod = compose_symbolic(g, f).unwrap();
            let ig = g.classify(&tol).index.unwrap();
            let if_ = f.classify(&tol).index.unwrap();
            let ip = prod.classify(&tol).index.unwrap();
            assert_eq!(ip, &ig + &if_);
        }
    }

    #[test]
    fn finite_rank_correction_changes_kernel_not_index() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let l = catalog("L", &sig).unwrap();
        let id = AlgebraElement::identity(&sig);
        let perturbed = l.clone().with_correction(1, 1, id);
        let rep0 = l.classify(&tol);
        let rep1 = perturbed.classify(&tol);
        assert_eq!(rep0.index, rep1.index);
        assert_eq!(rep0.flags, rep1.flags);
    }

    #[test]
    fn undecided_for_non_projection_collision() {
        let sig = default_signature();
        let tol = Tolerances::default();
        let id = AlgebraElement::identity(&sig);
        // two terms feeding the same targets with invertible coefficients
        let op = SymbolicOperator::new(
            &sig,
            vec![
                ShiftTerm::new(1, 0, 1, 0, 1, id.clone()).unwrap(),
                ShiftTerm::new(1, 0, 1, -1, 2, id).unwrap(),
            ],
        )
        .unwrap();
        let rep = op.classify(&tol);
        assert!(!rep.is_decided());
        assert!(rep.flags.is_none());
    }

    #[test]
    fn adjoint_swaps_upper_and_lower_on_catalog() {
        let sig = default_signature();
        let tol = Tolerances::default();
        for name in ["ex1", "ex2", "S", "L", "ex8", "ex15", "ex15g"] {
            let f = catalog(name, &sig).unwrap();
            let rf = f.classify(&tol);
            let ra = f.adjoint_symbolic().unwrap().classify(&tol);
            let ff = rf.flags.unwrap();
            let fa = ra.flags.unwrap();
            assert_eq!(ff.in_mphi_plus, fa.in_mphi_minus, "duality failed for {name}");
            assert_eq!(ff.in_mphi_minus, fa.in_mphi_plus, "duality failed for {name}");
        }
    }

    #[test]
    fn shift_polynomial_view() {
        let sig = default_signature();
        let s = catalog("S", &sig).unwrap();
        let p = s.to_shift_polynomial().unwrap();
        assert_eq!(p.degree(), 1);
        let l = catalog("L", &sig).unwrap();
        assert!(l.to_shift_polynomial().is_none());
    }

    #[test]
    fn symbolic_json_round_trip() {
        let sig = default_signature();
        let op = catalog("ex15", &sig)
            .unwrap()
            .with_correction(2, 3, AlgebraElement::identity(&sig));
        let text = serde_json::to_string(&op).unwrap();
        let back: SymbolicOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(op, back);
        assert_eq!(text, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn windowed_index_stability() {
        let sig = default_signature();
        let tol = Tolerances::default();
        for name in ["L", "S", "ex8", "ex9"] {
            let f = catalog(name, &sig).unwrap();
            let sym_index = f.classify(&tol).index.unwrap();
            for n in [8u64, 16, 32] {
                let w = f.windowed_truncate(n).unwrap();
                assert_eq!(w.index(&tol).unwrap(), sym_index, "window {n} for {name}");
            }
        }
    }
}
