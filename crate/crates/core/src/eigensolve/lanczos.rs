//! Thick-restart Lanczos with full reorthogonalization.
//!
//! The basis `V` and its image `W = A V` are stored as row-major blocks, the
//! projected matrix `V W^T` is formed explicitly at every Rayleigh–Ritz step,
//! and a restart keeps the lowest Ritz vectors plus the pending Lanczos
//! direction. Exactly degenerate partners, which a single starting vector
//! cannot reach, are searched for afterwards in the orthogonal complement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{symmetric_eigen, BathSpectrum, EigenError, EigenPair, SolverMethod};
use crate::hilbert::SymmetricOperator;
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct LanczosOptions<T> {
    /// Bound on `||A x - theta x||`. Values below the attainable floor
    /// `1000 eps max|theta|` are raised to it.
    pub tol: T,
    /// Operator applications allowed per solve; `None` means `200 * M`.
    pub max_applications: Option<usize>,
    /// Krylov basis size before a restart; `None` picks `max(5M, M + 30)`.
    pub basis_size: Option<usize>,
    pub seed: u64,
    /// Probe the complement of the converged vectors for missed levels.
    pub verify_multiplets: bool,
    pub multiplet_gap: T,
}

impl<T: Real> LanczosOptions<T> {
    pub fn new(seed: u64) -> Self {
        Self {
            tol: T::lit(1e-10),
            max_applications: None,
            basis_size: None,
            seed,
            verify_multiplets: true,
            multiplet_gap: T::lit(super::DEFAULT_MULTIPLET_GAP),
        }
    }
}

struct Ritz<T> {
    values: Vec<T>,
    /// `values.len()` rows of length `n`.
    vectors: Vec<T>,
    residuals: Vec<T>,
    converged: bool,
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Removes from `v` its components along the rows of `rows` (`count x n`).
fn project_out<T: Real>(v: &mut [T], rows: &[T], n: usize) {
    let count = rows.len() / n;
    if count == 0 {
        return;
    }
    let mut coeffs = vec![T::zero(); count];
    T::gemm(
        count,
        n,
        1,
        T::one(),
        rows,
        n as isize,
        1,
        v,
        1,
        1,
        T::zero(),
        &mut coeffs,
        1,
        1,
    );
    // v -= rows^T coeffs
    T::gemm(
        n,
        count,
        1,
        -T::one(),
        rows,
        1,
        n as isize,
        &coeffs,
        1,
        1,
        T::one(),
        v,
        1,
        1,
    );
}

fn orthogonalize<T: Real>(v: &mut [T], locked: &[T], basis: &[T], n: usize) {
    for _ in 0..2 {
        project_out(v, locked, n);
        project_out(v, basis, n);
    }
}

fn random_direction<T: Real>(rng: &mut ChaCha8Rng, locked: &[T], basis: &[T], n: usize) -> Option<Vec<T>> {
    for _ in 0..4 {
        let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect();
        orthogonalize(&mut v, locked, basis, n);
        let nv = norm(&v);
        if nv > T::lit(1e-8) {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

struct Cycle<'a, T, O: ?Sized> {
    op: &'a O,
    n: usize,
    locked: &'a [T],
    want: usize,
    tol: T,
    basis_size: usize,
    cap: usize,
    single_pass: bool,
}

impl<T: Real, O: SymmetricOperator<T> + ?Sized> Cycle<'_, T, O> {
    fn run(&self, rng: &mut ChaCha8Rng, apps: &mut usize) -> Result<Ritz<T>, EigenError> {
        let n = self.n;
        let avail = n - self.locked.len() / n;
        let kmax = self.basis_size.min(avail).max(self.want.min(avail));
        let keep = (self.want + (kmax - self.want) / 4)
            .min(kmax.saturating_sub(1))
            .max(self.want);
        let mut v_rows: Vec<T> = Vec::with_capacity(kmax * n);
        let mut w_rows: Vec<T> = Vec::with_capacity(kmax * n);
        let mut k = 0usize;
        let mut next = random_direction(rng, self.locked, &v_rows, n);
        let mut last_residuals: Vec<f64> = vec![];

        loop {
            let mut exhausted = next.is_none();
            let mut out_of_budget = false;
            while k < kmax && !exhausted {
                if *apps >= self.cap {
                    out_of_budget = true;
                    break;
                }
                let v = next.take().expect("pending Lanczos direction");
                let mut w = vec![T::zero(); n];
                self.op.apply_real(&v, &mut w);
                *apps += 1;
                v_rows.extend_from_slice(&v);
                w_rows.extend_from_slice(&w);
                k += 1;
                if k == avail {
                    exhausted = true;
                    break;
                }
                let mut r = w;
                let wn = norm(&r);
                orthogonalize(&mut r, self.locked, &v_rows, n);
                let rn = norm(&r);
                if rn > T::epsilon().sqrt() * wn && rn > T::zero() {
                    r.iter_mut().for_each(|x| *x /= rn);
                    next = Some(r);
                } else {
                    next = random_direction(rng, self.locked, &v_rows, n);
                    exhausted = next.is_none();
                }
            }
            if k == 0 {
                return Err(EigenError::NoConvergence {
                    iterations: *apps,
                    residuals: last_residuals,
                });
            }

            // Rayleigh–Ritz on span(V).
            let mut proj = vec![T::zero(); k * k];
            T::gemm(
                k,
                n,
                k,
                T::one(),
                &v_rows,
                n as isize,
                1,
                &w_rows,
                1,
                n as isize,
                T::zero(),
                &mut proj,
                k as isize,
                1,
            );
            for a in 0..k {
                for b in a + 1..k {
                    let s = (proj[a * k + b] + proj[b * k + a]) * T::lit(0.5);
                    proj[a * k + b] = s;
                    proj[b * k + a] = s;
                }
            }
            let eig = symmetric_eigen(proj, k)?;
            let nr = if exhausted { k } else { keep.max(self.want).min(k) };
            let mut x_rows = vec![T::zero(); nr * n];
            let mut wx_rows = vec![T::zero(); nr * n];
            T::gemm(
                nr,
                k,
                n,
                T::one(),
                &eig.vectors,
                k as isize,
                1,
                &v_rows,
                n as isize,
                1,
                T::zero(),
                &mut x_rows,
                n as isize,
                1,
            );
            T::gemm(
                nr,
                k,
                n,
                T::one(),
                &eig.vectors,
                k as isize,
                1,
                &w_rows,
                n as isize,
                1,
                T::zero(),
                &mut wx_rows,
                n as isize,
                1,
            );
            let want = self.want.min(nr);
            let scale = eig.values[0]
                .abs()
                .max(eig.values[k - 1].abs())
                .max(T::min_positive_value().sqrt());
            let residuals: Vec<T> = (0..want)
                .map(|j| {
                    let theta = eig.values[j];
                    x_rows[j * n..(j + 1) * n]
                        .iter()
                        .zip(&wx_rows[j * n..(j + 1) * n])
                        .map(|(&x, &w)| {
                            let r = w - theta * x;
                            r * r
                        })
                        .sum::<T>()
                        .sqrt()
                })
                .collect();
            let bound = self.tol.max(T::lit(1e3) * T::epsilon() * scale);
            let converged = residuals.iter().all(|&r| r <= bound);
            last_residuals = residuals.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();

            if converged || exhausted || self.single_pass {
                x_rows.truncate(want * n);
                return Ok(Ritz {
                    values: eig.values[..want].to_vec(),
                    vectors: x_rows,
                    residuals,
                    converged: converged || exhausted,
                });
            }
            if out_of_budget {
                return Err(EigenError::NoConvergence {
                    iterations: *apps,
                    residuals: last_residuals,
                });
            }
            x_rows.truncate(keep * n);
            wx_rows.truncate(keep * n);
            v_rows = x_rows;
            w_rows = wx_rows;
            k = keep;
        }
    }
}

/// The `m` lowest eigenpairs of the symmetric operator `op`.
pub fn lanczos_lowest<T: Real, O: SymmetricOperator<T> + ?Sized>(
    op: &O,
    m: usize,
    opts: &LanczosOptions<T>,
) -> Result<BathSpectrum<T>, EigenError> {
    let n = op.dim();
    if m > n {
        return Err(EigenError::TooManyStates { requested: m, dim: n });
    }
    if m == 0 {
        return Ok(BathSpectrum::new(vec![], vec![], SolverMethod::Lanczos, n));
    }
    let basis_size = opts.basis_size.unwrap_or((5 * m).max(m + 30));
    let cap = opts.max_applications.unwrap_or(200 * m);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut apps = 0usize;

    let main = Cycle {
        op,
        n,
        locked: &[],
        want: m,
        tol: opts.tol,
        basis_size,
        cap,
        single_pass: false,
    }
    .run(&mut rng, &mut apps)?;
    if !main.converged {
        return Err(EigenError::NoConvergence {
            iterations: apps,
            residuals: main.residuals.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    let mut found: Vec<(T, Vec<T>, T)> = (0..m)
        .map(|j| {
            (
                main.values[j],
                main.vectors[j * n..(j + 1) * n].to_vec(),
                main.residuals[j],
            )
        })
        .collect();

    if opts.verify_multiplets {
        // Each probe gets its own budget; a hit replaces the top level.
        for _ in 0..n {
            if found.len() >= n {
                break;
            }
            let locked: Vec<T> = found.iter().flat_map(|(_, v, _)| v.iter().copied()).collect();
            let top = found.last().map(|f| f.0).expect("m > 0");
            let mut probe_apps = 0usize;
            let probe = Cycle {
                op,
                n,
                locked: &locked,
                want: 1,
                tol: opts.tol,
                basis_size: basis_size.max(40),
                cap: usize::MAX,
                single_pass: true,
            }
            .run(&mut rng, &mut probe_apps)?;
            if probe.values[0] >= top - opts.multiplet_gap {
                break;
            }
            let mut extra_apps = 0usize;
            let extra = Cycle {
                op,
                n,
                locked: &locked,
                want: 1,
                tol: opts.tol,
                basis_size,
                cap,
                single_pass: false,
            }
            .run(&mut rng, &mut extra_apps)?;
            if !extra.converged || extra.values[0] >= top - opts.multiplet_gap {
                break;
            }
            found.push((extra.values[0], extra.vectors[..n].to_vec(), extra.residuals[0]));
            found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            found.truncate(m);
        }
    }

    let residuals = found.iter().map(|f| f.2).collect();
    let pairs = found
        .into_iter()
        .map(|(energy, vector, _)| EigenPair { energy, vector })
        .collect();
    Ok(BathSpectrum::new(pairs, residuals, SolverMethod::Lanczos, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::dense_spectrum;
    use crate::hilbert::{FlipOperator, FnOperator, ModelParams};
    use rand::Rng;

    fn model(n: usize, lambda: f64, seed: u64) -> crate::hilbert::SpinBathModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ModelParams::with_frequencies((0..n).map(|_| rng.gen_range(0.05..1.0)).collect(), lambda)
            .build()
            .unwrap()
    }

    #[test]
    fn full_space_on_tiny_instance() {
        let m = model(3, 1.3, 2);
        let op = FlipOperator::bath_hamiltonian(&m);
        let dense = dense_spectrum(&op).unwrap();
        let lz = lanczos_lowest(&op, 8, &LanczosOptions::new(1)).unwrap();
        for (a, b) in lz.energies().iter().zip(dense.energies()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_degeneracy_is_recovered() {
        // diag(0, 0, 0, 1, 2, ...) has a triply degenerate ground level.
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|i| if i < 3 { 0.0 } else { (i - 2) as f64 }).collect();
        let op = FnOperator::new(n, move |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = diag[i] * x[i];
            }
        });
        let lz = lanczos_lowest(&op, 4, &LanczosOptions::new(3)).unwrap();
        let e = lz.energies();
        assert!(e[..3].iter().all(|x| x.abs() < 1e-10), "{e:?}");
        assert!((e[3] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn too_many_states() {
        let op = FnOperator::new(4, |x: &[f64], y: &mut [f64]| y.copy_from_slice(x));
        assert!(matches!(
            lanczos_lowest(&op, 5, &LanczosOptions::new(0)),
            Err(EigenError::TooManyStates { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_residuals() {
        let m = model(8, 0.5, 5);
        let op = FlipOperator::bath_hamiltonian(&m);
        let mut opts = LanczosOptions::new(0);
        opts.max_applications = Some(12);
        opts.basis_size = Some(10);
        match lanczos_lowest(&op, 5, &opts) {
            Err(EigenError::NoConvergence { residuals, .. }) => assert_eq!(residuals.len(), 5),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
