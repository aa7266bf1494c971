//! Complex linear-algebra kernels: rank decisions with an explicit ambiguity
//! band, orthonormal spans, pseudo-inverses, subspace geometry and polynomial
//! root finding.
//!
//! Every rank-like decision in the crate funnels through [`decide_rank`] so
//! that near-threshold singular values surface as [`MphiError::RankAmbiguous`]
//! instead of being silently resolved.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{MphiError, Result};

pub type C64 = Complex<f64>;

/// Numerical tolerances used by rank and invertibility decisions.
///
/// `rank_lo`/`rank_hi` bound the relative ambiguity band: singular values
/// below `rank_lo * scale` are zero, above `rank_hi * scale` are nonzero, and
/// anything in between is an error. `rank_nominal` is the single-threshold
/// cut used where no error channel exists (spans, eigen flags).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank_lo: f64,
    pub rank_hi: f64,
    pub rank_nominal: f64,
    pub inv: f64,
    pub sub: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_lo: 1e-10,
            rank_hi: 1e-6,
            rank_nominal: 1e-8,
            inv: 1e-10,
            sub: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn with_rank_nominal(nominal: f64) -> Self {
        Tolerances {
            rank_lo: nominal * 1e-2,
            rank_hi: nominal * 1e2,
            rank_nominal: nominal,
            ..Tolerances::default()
        }
    }
}

/// Sorted singular values of `m` (descending, as returned by nalgebra).
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Decide the rank of a matrix whose singular values are `sv`, relative to
/// `scale`. Values inside the band `(rank_lo, rank_hi) * scale` raise
/// `RankAmbiguous`.
pub fn decide_rank_from_sv(sv: &[f64], scale: f64, tol: &Tolerances) -> Result<usize> {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut rank = 0;
    for &s in sv {
        if s > tol.rank_hi * scale {
            rank += 1;
        } else if s >= tol.rank_lo * scale {
            return Err(MphiError::RankAmbiguous {
                value: s,
                lo: tol.rank_lo * scale,
                hi: tol.rank_hi * scale,
                scale,
            });
        }
    }
    Ok(rank)
}

/// Rank with the ambiguity band; `scale` defaults to the largest singular
/// value when not supplied by the caller.
pub fn decide_rank(m: &DMatrix<C64>, scale: Option<f64>, tol: &Tolerances) -> Result<usize> {
    let sv = singular_values(m);
    let scale = scale.unwrap_or_else(|| sv.first().cloned().unwrap_or(1.0));
    decide_rank_from_sv(&sv, scale, tol)
}

/// Rank using the nominal single threshold (no error channel).
pub fn nominal_rank(m: &DMatrix<C64>, scale: Option<f64>, tol: &Tolerances) -> usize {
    let sv = singular_values(m);
    let scale = scale.unwrap_or_else(|| sv.first().cloned().unwrap_or(1.0));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    sv.iter().filter(|&&s| s > tol.rank_nominal * scale).count()
}

/// Orthonormal basis of the column space, rank decided with the band.
pub fn colspace(m: &DMatrix<C64>, scale: Option<f64>, tol: &Tolerances) -> Result<DMatrix<C64>> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(DMatrix::zeros(m.nrows(), 0));
    }
    let svd = m.clone().svd(true, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = scale.unwrap_or_else(|| sv.first().cloned().unwrap_or(1.0));
    let rank = decide_rank_from_sv(&sv, scale, tol)?;
    let u = svd.u.expect("svd u requested");
    // nalgebra returns singular values unsorted only in pathological cases;
    // re-derive the kept columns by value to stay safe.
    Ok(select_columns_by_sv(&u, &svd.singular_values.as_slice().to_vec(), rank))
}

/// Orthonormal basis of the column space with the nominal threshold.
pub fn colspace_nominal(m: &DMatrix<C64>, scale: Option<f64>, tol: &Tolerances) -> DMatrix<C64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let sv: Vec<f64> = svd.singular_values.as_slice().to_vec();
    let mut sorted = sv.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = scale.unwrap_or_else(|| sorted.first().cloned().unwrap_or(1.0));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let rank = sorted.iter().filter(|&&s| s > tol.rank_nominal * scale).count();
    let u = svd.u.expect("svd u requested");
    select_columns_by_sv(&u, &sv, rank)
}

fn select_columns_by_sv(u: &DMatrix<C64>, sv: &[f64], rank: usize) -> DMatrix<C64> {
    let mut order: Vec<usize> = (0..sv.len().min(u.ncols())).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let mut out = DMatrix::zeros(u.nrows(), rank);
    for (k, &idx) in order.iter().take(rank).enumerate() {
        out.set_column(k, &u.column(idx));
    }
    out
}

/// Orthonormal basis of the (right) nullspace, rank decided with the band.
pub fn nullspace(m: &DMatrix<C64>, scale: Option<f64>, tol: &Tolerances) -> Result<DMatrix<C64>> {
    let n = m.ncols();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if m.nrows() == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let svd = m.clone().svd(false, true);
    let sv: Vec<f64> = svd.singular_values.as_slice().to_vec();
    let mut sorted = sv.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = scale.unwrap_or_else(|| sorted.first().cloned().unwrap_or(1.0));
    let rank = decide_rank_from_sv(&sorted, scale, tol)?;
    let v_t = svd.v_t.expect("svd v_t requested");
    // Null vectors are the rows of v_t whose singular value is dropped
    // (including columns beyond the sv count for wide matrices).
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let kept: Vec<usize> = order.into_iter().skip(rank).collect();
    let mut out = DMatrix::zeros(n, n - rank);
    let mut col = 0;
    for &idx in &kept {
        out.set_column(col, &v_t.row(idx).adjoint());
        col += 1;
    }
    // v_t has min(nrows, ncols) rows; a wide matrix has extra null directions
    // orthogonal to every row of v_t.
    if col < n - rank {
        let extra = complement_of_orthonormal(&v_t.adjoint());
        for c in 0..extra.ncols() {
            if col >= n - rank {
                break;
            }
            out.set_column(col, &extra.column(c));
            col += 1;
        }
    }
    debug_assert_eq!(col, n - rank);
    Ok(out)
}

/// Orthonormal complement of the column span of an orthonormal matrix `q`
/// inside the ambient coordinate space.
pub fn complement_of_orthonormal(q: &DMatrix<C64>) -> DMatrix<C64> {
    let n = q.nrows();
    let d = q.ncols();
    if d == 0 {
        return DMatrix::identity(n, n);
    }
    // Nullspace of q^H, computed from a full SVD of q.
    let svd = q.clone().svd(true, false);
    let u = svd.u.expect("svd u");
    // u is n x d; complete to an orthonormal basis of C^n by projecting the
    // standard basis and re-orthonormalizing.
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(n - d);
    let mut have: Vec<DVector<C64>> = (0..u.ncols()).map(|c| u.column(c).into_owned()).collect();
    for j in 0..n {
        if cols.len() == n - d {
            break;
        }
        let mut v = DVector::<C64>::zeros(n);
        v[j] = C64::new(1.0, 0.0);
        for w in have.iter().chain(cols.iter()) {
            let coef = w.dotc(&v);
            v -= w * coef;
        }
        // re-orthogonalize once for stability
        for w in have.iter().chain(cols.iter()) {
            let coef = w.dotc(&v);
            v -= w * coef;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / C64::new(norm, 0.0));
        }
    }
    debug_assert_eq!(cols.len(), n - d);
    let mut out = DMatrix::zeros(n, n - d);
    for (k, v) in cols.into_iter().enumerate() {
        out.set_column(k, &v);
    }
    let _ = have.drain(..);
    out
}

/// Moore-Penrose pseudo-inverse with the band rank decision.
pub fn pseudo_inverse(m: &DMatrix<C64>, scale: Option<f64>, tol: &Tolerances) -> Result<DMatrix<C64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(DMatrix::zeros(m.ncols(), m.nrows()));
    }
    let svd = m.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.as_slice().to_vec();
    let mut sorted = sv.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = scale.unwrap_or_else(|| sorted.first().cloned().unwrap_or(1.0));
    let rank = decide_rank_from_sv(&sorted, scale, tol)?;
    let cut = if rank == 0 { f64::INFINITY } else { sorted[rank - 1] };
    let u = svd.u.expect("u");
    let v_t = svd.v_t.expect("v_t");
    let mut sigma_inv = DMatrix::<C64>::zeros(v_t.nrows(), u.ncols());
    for i in 0..sv.len() {
        if sv[i] >= cut && sv[i] > 0.0 {
            sigma_inv[(i, i)] = C64::new(1.0 / sv[i], 0.0);
        }
    }
    Ok(v_t.adjoint() * sigma_inv * u.adjoint())
}

/// Largest singular value (operator 2-norm); 0 for empty matrices.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    match (m.nrows(), m.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, 1) => m[(0, 0)].norm(),
        _ => singular_values(m).first().cloned().unwrap_or(0.0),
    }
}

/// Distance between subspaces given by orthonormal bases: `|| P1 - P2 ||_2`.
pub fn subspace_distance(q1: &DMatrix<C64>, q2: &DMatrix<C64>) -> f64 {
    assert_eq!(q1.nrows(), q2.nrows(), "subspace ambient mismatch");
    let p1 = q1 * q1.adjoint();
    let p2 = q2 * q2.adjoint();
    operator_norm(&(p1 - p2))
}

/// Largest principal-angle cosine between two spans, i.e. the largest
/// singular value of `Q1^H Q2`; equals `|| P1 P2 ||_2`.
pub fn largest_cosine(q1: &DMatrix<C64>, q2: &DMatrix<C64>) -> f64 {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        return 0.0;
    }
    operator_norm(&(q1.adjoint() * q2))
}

/// Eigenvalues of a square complex matrix via the Schur decomposition.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigenvalues of a non-square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| MphiError::NotRegular("Schur iteration did not converge".into()))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| MphiError::NotRegular("Schur eigenvalue extraction failed".into()))?;
    Ok(ev.iter().cloned().collect())
}

/// Roots of the complex polynomial `c0 + c1 z + ... + cd z^d` by the
/// Aberth-Ehrlich iteration. Leading coefficients below `1e-14 * max|c|`
/// are stripped first. Returns an empty list for constants.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    if maxc == 0.0 {
        return Vec::new();
    }
    let mut c: Vec<C64> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() <= 1e-14 * maxc {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    // strip roots at the origin exactly
    let mut zero_roots = 0;
    while zero_roots < d && c[zero_roots].norm() <= 1e-300 {
        zero_roots += 1;
    }
    let c = &c[zero_roots..];
    let d_eff = c.len() - 1;
    let mut roots = vec![C64::new(0.0, 0.0); zero_roots];
    if d_eff == 0 {
        return roots;
    }

    // Cauchy bound for the initial circle.
    let lead = c[d_eff].norm();
    let radius = 1.0 + c.iter().take(d_eff).map(|x| x.norm()).fold(0.0_f64, f64::max) / lead;
    let mut z: Vec<C64> = (0..d_eff)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.35) / d_eff as f64;
            C64::new(radius * 0.7 * theta.cos(), radius * 0.7 * theta.sin())
        })
        .collect();

    let eval = |x: C64| -> (C64, C64) {
        // Horner for p and p'
        let mut p = c[d_eff];
        let mut dp = C64::new(0.0, 0.0);
        for k in (0..d_eff).rev() {
            dp = dp * x + p;
            p = p * x + c[k];
        }
        (p, dp)
    };

    for _ in 0..200 {
        let mut done = true;
        let zs = z.clone();
        for i in 0..d_eff {
            let (p, dp) = eval(zs[i]);
            if p.norm() <= 1e-15 * maxc {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { C64::new(1e-8, 0.0) };
            let mut s = C64::new(0.0, 0.0);
            for j in 0..d_eff {
                if j != i {
                    let diff = zs[i] - zs[j];
                    if diff.norm() > 1e-300 {
                        s += C64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - newton * s;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= step;
            if step.norm() > 1e-13 * (1.0 + z[i].norm()) {
                done = false;
            }
        }
        if done {
            break;
        }
    }
    roots.extend(z);
    roots
}

/// Serde adapter: `Complex<f64>` as a `[re, im]` pair of doubles.
pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&c.re)?;
        t.serialize_element(&c.im)?;
        t.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im]: [f64; 2] = Deserialize::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Row-major `[re, im]` encoding of a complex matrix, used by every JSON
/// surface of the crate.
pub fn matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(MphiError::Parse("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> DMatrix<C64> {
        DMatrix::from_fn(rows, cols, f)
    }

    #[test]
    fn rank_band_flags_ambiguity() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(1e-8, 0.0),
            C64::new(0.0, 0.0),
        ]));
        let err = decide_rank(&m, Some(1.0), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, MphiError::RankAmbiguous { .. }));
    }

    #[test]
    fn nullspace_dimensions() {
        // rank-1 3x4 matrix
        let m = mat(3, 4, |r, c| C64::new(((r + 1) * (c + 2)) as f64, 0.0));
        let ns = nullspace(&m, None, &Tolerances::default()).unwrap();
        assert_eq!(ns.ncols(), 3);
        assert!(operator_norm(&(&m * &ns)) < 1e-10);
        // orthonormal
        let g = ns.adjoint() * &ns;
        assert!(operator_norm(&(g - DMatrix::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn wide_nullspace_includes_missing_directions() {
        let m = mat(1, 5, |_, c| C64::new((c == 0) as u8 as f64, 0.0));
        let ns = nullspace(&m, None, &Tolerances::default()).unwrap();
        assert_eq!(ns.ncols(), 4);
        assert!(operator_norm(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn pinv_residuals() {
        let m = mat(4, 3, |r, c| C64::new((r * 3 + c) as f64 * 0.31 - 1.0, (r + c) as f64 * 0.21));
        let g = pseudo_inverse(&m, None, &Tolerances::default()).unwrap();
        assert!(operator_norm(&(&m * &g * &m - &m)) < 1e-10);
        assert!(operator_norm(&(&g * &m * &g - &g)) < 1e-10);
    }

    #[test]
    fn poly_roots_recover_factors() {
        // (z - 0.5)(z - 2i)(z + 3)
        let r1 = C64::new(0.5, 0.0);
        let r2 = C64::new(0.0, 2.0);
        let r3 = C64::new(-3.0, 0.0);
        // z^3 - (r1+r2+r3) z^2 + (r1 r2 + r1 r3 + r2 r3) z - r1 r2 r3
        let coeffs = vec![
            -(r1 * r2 * r3),
            r1 * r2 + r1 * r3 + r2 * r3,
            -(r1 + r2 + r3),
            C64::new(1.0, 0.0),
        ];
        let mut roots = poly_roots(&coeffs);
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut expect = [r3, r2, r1];
        expect.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (z, e) in roots.iter().zip(expect.iter()) {
            assert!((z - e).norm() < 1e-9, "{z} vs {e}");
        }
    }

    #[test]
    fn poly_roots_origin_multiplicity() {
        // z^2 * (z - 1)
        let coeffs = vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ];
        let roots = poly_roots(&coeffs);
        assert_eq!(roots.len(), 3);
        let zeros = roots.iter().filter(|z| z.norm() < 1e-12).count();
        assert_eq!(zeros, 2);
    }

    #[test]
    fn subspace_distance_complement() {
        let q1 = mat(4, 2, |r, c| C64::new((r == c) as u8 as f64, 0.0));
        let q2 = mat(4, 2, |r, c| C64::new((r == c + 2) as u8 as f64, 0.0));
        assert!((subspace_distance(&q1, &q1)).abs() < 1e-14);
        assert!((subspace_distance(&q1, &q2) - 1.0).abs() < 1e-14);
        assert!((largest_cosine(&q1, &q2)).abs() < 1e-14);
    }
}
