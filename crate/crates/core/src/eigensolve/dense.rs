//! Householder tridiagonalization followed by implicit QL iteration.
//!
//! Eigenvectors are kept as rows of a row-major matrix so each Givens
//! rotation touches two contiguous rows.

use super::EigenError;
use crate::scalar::{dot, Real};

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Row `m` (`vectors[m * n .. (m + 1) * n]`) is the eigenvector of `values[m]`.
    pub vectors: Vec<T>,
    pub n: usize,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn vector(&self, m: usize) -> &[T] {
        &self.vectors[m * self.n..(m + 1) * self.n]
    }
}

/// Diagonalizes the symmetric row-major `n x n` matrix `a` (consumed).
///
/// Only symmetry up to roundoff is assumed; the strictly upper triangle is
/// what the reduction reads.
pub fn symmetric_eigen<T: Real>(mut a: Vec<T>, n: usize) -> Result<SymmetricEigen<T>, EigenError> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    if n == 0 {
        return Ok(SymmetricEigen {
            values: vec![],
            vectors: vec![],
            n,
        });
    }
    let (mut d, mut e, q) = tridiagonalize(&mut a, n);
    drop(a);
    // Rows of `z` are columns of Q; QL rotations then act on rows.
    let mut z = transpose(&q, n);
    drop(q);
    tridiagonal_ql(&mut d, &mut e, &mut z, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&z[src * n..(src + 1) * n]);
    }
    Ok(SymmetricEigen { values, vectors, n })
}

fn transpose<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let mut t = vec![T::zero(); n * n];
    const B: usize = 64;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    t[j * n + i] = a[i * n + j];
                }
            }
        }
    }
    t
}

/// Householder reflector that zeroes row `k` of `a` beyond column `k + 1`.
///
/// On return `a[k][k+1..]` holds the reflector vector `v`, `e[k]` the new
/// sub-diagonal entry, and the result is `beta = 2 / |v|^2` (zero when the
/// row is already reduced).
fn make_reflector<T: Real>(a: &mut [T], e: &mut [T], k: usize, n: usize) -> T {
    let m = n - k - 1;
    let start = k * n + k + 1;
    let x0 = a[start];
    let alpha = a[start..start + m].iter().map(|&v| v * v).sum::<T>().sqrt();
    let tail = alpha * alpha - x0 * x0;
    if alpha == T::zero() || tail <= T::epsilon() * T::epsilon() * alpha * alpha {
        e[k] = x0;
        return T::zero();
    }
    let sign = if x0 >= T::zero() { T::one() } else { -T::one() };
    a[start] = x0 + sign * alpha;
    e[k] = -sign * alpha;
    T::lit(2.0) / a[start..start + m].iter().map(|&x| x * x).sum::<T>()
}

/// Reduces `a` to tridiagonal form `Q^T a Q`. Returns the diagonal, the
/// sub-diagonal (`e[i]` couples `i` and `i + 1`, `e[n - 1] = 0`) and `Q`.
fn tridiagonalize<T: Real>(a: &mut [T], n: usize) -> (Vec<T>, Vec<T>, Vec<T>) {
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    let mut betas = vec![T::zero(); n];
    let half = T::lit(0.5);
    let steps = n.saturating_sub(2);
    let mut p = vec![T::zero(); n];
    // `p_next` is `beta' A22' v'` for the following step, accumulated while
    // the current rank-two update streams over the same rows.
    let mut p_next = vec![T::zero(); n];
    let mut prepared: Option<T> = None;
    let mut have_p = false;

    for k in 0..steps {
        d[k] = a[k * n + k];
        let beta = match prepared.take() {
            Some(b) => b,
            None => make_reflector(a, &mut e, k, n),
        };
        betas[k] = beta;
        if beta == T::zero() {
            have_p = false;
            continue;
        }
        let m = n - k - 1;
        let off = k + 1;
        let v: Vec<T> = a[k * n + off..k * n + n].to_vec();
        if have_p {
            p[..m].copy_from_slice(&p_next[..m]);
        } else {
            for i in 0..m {
                let row = &a[(off + i) * n + off..(off + i) * n + n];
                p[i] = beta * dot(row, &v);
            }
        }
        have_p = false;
        let kk = half * beta * p[..m].iter().zip(&v).map(|(&x, &y)| x * y).sum::<T>();
        for i in 0..m {
            p[i] -= kk * v[i];
        }
        // A22 -= v w^T + w v^T, row by row.
        let update_row = |a: &mut [T], i: usize| {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for ((r, &vj), &wj) in row.iter_mut().zip(&v).zip(&p[..m]) {
                *r -= vi * wj + wi * vj;
            }
        };
        update_row(a, 0);
        if k + 1 < steps {
            let beta2 = make_reflector(a, &mut e, k + 1, n);
            prepared = Some(beta2);
            if beta2 != T::zero() {
                let v2: Vec<T> = a[off * n + off + 1..off * n + n].to_vec();
                for i in 1..m {
                    update_row(a, i);
                    let row = &a[(off + i) * n + off + 1..(off + i) * n + n];
                    p_next[i - 1] = beta2 * dot(row, &v2);
                }
                have_p = true;
                continue;
            }
        }
        for i in 1..m {
            update_row(a, i);
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 2) * n + n - 1];
    }
    d[n - 1] = a[(n - 1) * n + n - 1];
    e[n - 1] = T::zero();

    let q = accumulate_reflectors(a, &betas, n, steps);
    (d, e, q)
}

const REFLECTOR_BLOCK: usize = 32;

/// `Q = H_0 H_1 ... H_{steps-1}` with `H_k = I - beta_k v_k v_k^T`, built
/// backwards in blocks so the bulk of the work is matrix multiplication.
/// `v_k` is stored in row `k` of `a` right of column `k`.
fn accumulate_reflectors<T: Real>(a: &[T], betas: &[T], n: usize, steps: usize) -> Vec<T> {
    let mut q = vec![T::zero(); n * n];
    for i in 0..n {
        q[i * n + i] = T::one();
    }
    let blocks: Vec<usize> = (0..steps).step_by(REFLECTOR_BLOCK).collect();
    for &k0 in blocks.iter().rev() {
        let k1 = (k0 + REFLECTOR_BLOCK).min(steps);
        let nb = k1 - k0;
        // Q differs from the identity only in rows and columns >= k0 + 1.
        let r0 = k0 + 1;
        let mm = n - r0;
        let mut vt = vec![T::zero(); nb * mm];
        for b in 0..nb {
            let k = k0 + b;
            let row = &mut vt[b * mm..(b + 1) * mm];
            row[k + 1 - r0..].copy_from_slice(&a[k * n + k + 1..k * n + n]);
        }
        // Forward block reflector H_k0 ... H_k1-1 = I - V T V^T.
        let mut gram = vec![T::zero(); nb * nb];
        T::gemm(
            nb,
            mm,
            nb,
            T::one(),
            &vt,
            mm as isize,
            1,
            &vt,
            1,
            mm as isize,
            T::zero(),
            &mut gram,
            nb as isize,
            1,
        );
        let mut t = vec![T::zero(); nb * nb];
        for i in 0..nb {
            let beta = betas[k0 + i];
            t[i * nb + i] = beta;
            for r in 0..i {
                let mut acc = T::zero();
                for c in r..i {
                    acc += t[r * nb + c] * gram[c * nb + i];
                }
                t[r * nb + i] = -beta * acc;
            }
        }
        // Qsub -= V (T (V^T Qsub)), Qsub = q[r0.., r0..].
        let qsub_off = r0 * n + r0;
        let mut x = vec![T::zero(); nb * mm];
        T::gemm(
            nb,
            mm,
            mm,
            T::one(),
            &vt,
            mm as isize,
            1,
            &q[qsub_off..],
            n as isize,
            1,
            T::zero(),
            &mut x,
            mm as isize,
            1,
        );
        let mut y = vec![T::zero(); nb * mm];
        T::gemm(
            nb,
            nb,
            mm,
            T::one(),
            &t,
            nb as isize,
            1,
            &x,
            mm as isize,
            1,
            T::zero(),
            &mut y,
            mm as isize,
            1,
        );
        T::gemm(
            mm,
            nb,
            mm,
            -T::one(),
            &vt,
            1,
            mm as isize,
            &y,
            mm as isize,
            1,
            T::one(),
            &mut q[qsub_off..],
            n as isize,
            1,
        );
    }
    q
}

/// Applies the plane rotation `(c, s)` to rows `i` and `i + 1` of `z`.
#[inline]
fn rotate_rows<T: Real>(z: &mut [T], n: usize, i: usize, c: T, s: T) {
    let (lo, hi) = z.split_at_mut((i + 1) * n);
    let zi = &mut lo[i * n..];
    let zj = &mut hi[..n];
    for (a, b) in zi.iter_mut().zip(zj.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

/// Implicit QL with Wilkinson-type shifts on the symmetric tridiagonal
/// `(d, e)`; rotations are applied to the rows of `z`.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize) -> Result<(), EigenError> {
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let two = T::lit(2.0);
    let max_iter = 60;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        let m = m.min(n - 1);
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(EigenError::NoConvergence {
                        iterations: iter,
                        residuals: vec![e[l].abs().to_f64().unwrap_or(f64::NAN)],
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(z, n, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
