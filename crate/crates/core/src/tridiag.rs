//! Real symmetric tridiagonal eigensolvers and complex tridiagonal solves.
//!
//! Two independent routes are provided for the eigenproblem:
//!
//! * [`full_eigen`] is the implicit QL algorithm with Wilkinson shifts
//!   (EISPACK `tql2` lineage); it returns every eigenpair in O(n³).
//! * [`lowest_eigenpairs`] / [`eigenpairs_below`] use Sturm-sequence
//!   bisection for eigenvalues followed by inverse iteration for the
//!   vectors, costing O(n) per requested pair. The transport loop only
//!   ever needs the bound modes, so this is the hot path.
//!
//! A matrix is given as `diag` (length n) and `off` (length n − 1), where
//! `off[i]` couples rows `i` and `i + 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;
const INVERSE_ITERATIONS: usize = 3;

fn check_shape(diag: &[f64], off: &[f64]) -> Result<()> {
    if diag.is_empty() {
        return Err(Error::InvalidInput("empty tridiagonal matrix".into()));
    }
    if off.len() + 1 != diag.len() {
        return Err(Error::InvalidInput(format!(
            "off-diagonal has {} entries, expected {}",
            off.len(),
            diag.len() - 1
        )));
    }
    Ok(())
}

/// Gershgorin interval containing the whole spectrum.
pub fn gershgorin_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// Infinity norm, an upper bound for the spectral norm.
pub fn norm_inf(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { off[i].abs() } else { 0.0 };
            diag[i].abs() + left + right
        })
        .fold(0.0, f64::max)
}

/// Number of eigenvalues strictly less than `x` (Sturm sequence count).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Bisect for the `k`-th smallest eigenvalue (0-based) inside `[lo, hi]`.
fn bisect(diag: &[f64], off: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The `k`-th smallest eigenvalue (0-based).
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> Result<f64> {
    check_shape(diag, off)?;
    if k >= diag.len() {
        return Err(Error::InvalidInput(format!(
            "eigenvalue index {k} out of range for dimension {}",
            diag.len()
        )));
    }
    let (lo, hi) = gershgorin_bounds(diag, off);
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    Ok(bisect(diag, off, k, lo - pad, hi + pad))
}

/// LU factorization with partial pivoting of a shifted tridiagonal matrix,
/// laid out as LAPACK `dgttrf` does.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut dl = off.to_vec();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Fix the sign gauge: the first component that is not negligible is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Eigenvector for an (accurate) eigenvalue by inverse iteration.
///
/// `cluster` holds already computed eigenvectors whose eigenvalues are close
/// to `lambda`; the result is kept orthogonal to them.
pub fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    cluster: &[&[f64]],
) -> Result<Vec<f64>> {
    check_shape(diag, off)?;
    let n = diag.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let scale = norm_inf(diag, off).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;
    let lu = ShiftedLu::factor(diag, off, lambda, tiny);

    // Deterministic, generic starting vector.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    normalize(&mut v);
    for _ in 0..INVERSE_ITERATIONS {
        lu.solve(&mut v);
        for u in cluster {
            let p: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u.iter()).for_each(|(x, a)| *x -= p * a);
        }
        if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "inverse iteration collapsed at eigenvalue {lambda}"
            )));
        }
    }
    fix_sign(&mut v);
    Ok(v)
}

/// Eigenvalues with indices `0..count`, ascending, by bisection.
pub fn lowest_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Result<Vec<f64>> {
    check_shape(diag, off)?;
    let count = count.min(diag.len());
    let (lo, hi) = gershgorin_bounds(diag, off);
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let mut out = Vec::with_capacity(count);
    let mut floor = lo - pad;
    for k in 0..count {
        let value = bisect(diag, off, k, floor, hi + pad);
        out.push(value);
        floor = value - pad;
    }
    Ok(out)
}

fn vectors_for(diag: &[f64], off: &[f64], values: &[f64]) -> Result<Vec<Vec<f64>>> {
    let scale = norm_inf(diag, off).max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-3 * scale;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (k, &lambda) in values.iter().enumerate() {
        let cluster: Vec<&[f64]> = (0..k)
            .rev()
            .take_while(|&j| (lambda - values[j]).abs() < cluster_tol)
            .map(|j| vectors[j].as_slice())
            .collect();
        vectors.push(inverse_iteration(diag, off, lambda, &cluster)?);
    }
    Ok(vectors)
}

/// The `count` lowest eigenpairs, ascending.
pub fn lowest_eigenpairs(
    diag: &[f64],
    off: &[f64],
    count: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let values = lowest_eigenvalues(diag, off, count)?;
    let vectors = vectors_for(diag, off, &values)?;
    Ok((values, vectors))
}

/// All eigenpairs with eigenvalue strictly below `threshold`, ascending.
pub fn eigenpairs_below(
    diag: &[f64],
    off: &[f64],
    threshold: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    check_shape(diag, off)?;
    lowest_eigenpairs(diag, off, sturm_count(diag, off, threshold))
}

/// Complete eigendecomposition by the implicit QL method.
///
/// Returns ascending eigenvalues and the matching orthonormal eigenvectors.
pub fn full_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    check_shape(diag, off)?;
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    // z[i * n + k]: component k of eigenvector i
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Numerical(format!(
                    "QL iteration did not converge for eigenvalue {l} of {n} \
                     (residual off-diagonal {:e})",
                    e[l]
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lower, upper) = z.split_at_mut((i + 1) * n);
                let zi = &mut lower[i * n..];
                let zi1 = &mut upper[..n];
                for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let f = *b;
                    *b = s * *a + c * f;
                    *a = c * *a - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = z[i * n..(i + 1) * n].to_vec();
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok((values, vectors))
}

/// Solve `A x = rhs` for a complex symmetric tridiagonal `A` by the Thomas
/// algorithm. `scratch` must have the length of `diag`.
///
/// No pivoting is done; callers use it on matrices of the form I + iK with
/// K Hermitian, whose real part keeps every pivot away from zero.
pub fn solve_complex_tridiagonal(
    diag: &[Complex64],
    off: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    debug_assert_eq!(scratch.len(), n);
    let mut pivot = diag[0];
    if pivot.norm_sqr() == 0.0 {
        return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i - 1] = off[i - 1] / pivot;
        pivot = diag[i] - off[i - 1] * scratch[i - 1];
        if pivot.norm_sqr() == 0.0 {
            return Err(Error::Numerical(format!(
                "zero pivot at row {i} in tridiagonal solve"
            )));
        }
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i] * next;
    }
    Ok(())
}
