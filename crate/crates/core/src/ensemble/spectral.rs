use num_complex::Complex;

use super::observables::{ObservableSeries, SeriesMetadata};
use super::{EnsembleError, ReducedDensity, ThermalEnsemble};
use crate::hilbert::{FlipOperator, ModelParams, SpinBathModel, SymmetricOperator};
use crate::propagate::SpectralPropagator;
use crate::scalar::Real;

const TIME_CHUNK: usize = 128;

/// Ensemble observables evaluated in the eigenbasis of the full Hamiltonian.
///
/// With `H = V^T diag(E) V` and the ensemble density `D = C W C^T` in that
/// basis, every observable is `sum_{mm'} (D o X)_{mm'} exp(-i (E_m - E_m') t)`
/// for a fixed matrix `X`. The `X` matrices depend only on the model and are
/// cached, so scanning temperatures costs one `D` per temperature.
#[derive(Debug, Clone)]
pub struct SpectralObservables<T> {
    params: ModelParams<T>,
    dim: usize,
    energies: Vec<T>,
    vectors: Vec<T>,
    /// `2 V1 V1^T - I`, the eigenbasis form of `sigma_z(0)`.
    z: Vec<T>,
    /// `V1 V0^T`, the eigenbasis form of `|1><0|` on the central spin.
    s10: Vec<T>,
    /// `V HI V^T`.
    interaction: Vec<T>,
}

impl<T: Real> SpectralObservables<T> {
    pub fn new(model: &SpinBathModel<T>, prop: &SpectralPropagator<T>) -> Result<Self, EnsembleError> {
        let d = prop.dim();
        if d != model.full_dim() {
            return Err(EnsembleError::DimensionMismatch {
                expected: model.full_dim(),
                found: d,
            });
        }
        let v = prop.vectors();
        let b = d / 2;
        let di = d as isize;

        // V1[m][j] = V[m][2j+1], V0[m][j] = V[m][2j]: strided views of V.
        let mut z = vec![T::zero(); d * d];
        T::gemm(
            d,
            b,
            d,
            T::lit(2.0),
            &v[1..],
            di,
            2,
            &v[1..],
            2,
            di,
            T::zero(),
            &mut z,
            di,
            1,
        );
        for m in 0..d {
            z[m * d + m] -= T::one();
        }
        let mut s10 = vec![T::zero(); d * d];
        T::gemm(d, b, d, T::one(), &v[1..], di, 2, v, 2, di, T::zero(), &mut s10, di, 1);

        let hi = FlipOperator::interaction(model);
        let mut w = vec![T::zero(); d * d];
        for (row, out) in v.chunks_exact(d).zip(w.chunks_exact_mut(d)) {
            hi.apply_real(row, out);
        }
        let mut interaction = vec![T::zero(); d * d];
        T::gemm(
            d,
            d,
            d,
            T::one(),
            v,
            di,
            1,
            &w,
            1,
            di,
            T::zero(),
            &mut interaction,
            di,
            1,
        );

        Ok(Self {
            params: model.params(),
            dim: d,
            energies: prop.energies().to_vec(),
            vectors: v.to_vec(),
            z,
            s10,
            interaction,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `D = C W C^T` with `C = V1 Phi_B`.
    fn ensemble_density(&self, ensemble: &ThermalEnsemble<T>) -> Result<Vec<T>, EnsembleError> {
        let d = self.dim;
        let b = d / 2;
        let spec = ensemble.spectrum();
        if spec.dim() != b {
            return Err(EnsembleError::DimensionMismatch {
                expected: b,
                found: spec.dim(),
            });
        }
        let m = ensemble.len();
        let mut phi = vec![T::zero(); b * m];
        for (n, p) in spec.pairs().iter().enumerate() {
            for (j, &x) in p.vector.iter().enumerate() {
                phi[j * m + n] = x;
            }
        }
        let di = d as isize;
        let mi = m as isize;
        let mut c = vec![T::zero(); d * m];
        T::gemm(
            d,
            b,
            m,
            T::one(),
            &self.vectors[1..],
            di,
            2,
            &phi,
            mi,
            1,
            T::zero(),
            &mut c,
            mi,
            1,
        );
        let mut cw = c.clone();
        for row in cw.chunks_exact_mut(m) {
            for (x, &w) in row.iter_mut().zip(ensemble.weights()) {
                *x *= w;
            }
        }
        let mut dens = vec![T::zero(); d * d];
        T::gemm(d, m, d, T::one(), &cw, mi, 1, &c, 1, mi, T::zero(), &mut dens, di, 1);
        Ok(dens)
    }

    /// Evaluates `sum G cos(w t)` (symmetric `G`) or `sum G sin(w t)`
    /// (antisymmetric `G`) on every time.
    fn oscillating_sum(&self, g: &[T], times: &[T], sine: bool) -> Vec<T> {
        let d = self.dim;
        let mut out = Vec::with_capacity(times.len());
        let mut phases = vec![T::zero(); d * 2 * TIME_CHUNK];
        let mut y = vec![T::zero(); d * 2 * TIME_CHUNK];
        for chunk in times.chunks(TIME_CHUNK) {
            let l = chunk.len();
            let w = 2 * l;
            for (m, &e) in self.energies.iter().enumerate() {
                let row = &mut phases[m * w..(m + 1) * w];
                for (k, &t) in chunk.iter().enumerate() {
                    let (s, c) = (e * t).sin_cos();
                    row[k] = c;
                    row[l + k] = s;
                }
            }
            let wi = w as isize;
            T::gemm(
                d,
                d,
                w,
                T::one(),
                g,
                d as isize,
                1,
                &phases[..d * w],
                wi,
                1,
                T::zero(),
                &mut y[..d * w],
                wi,
                1,
            );
            let mut acc = vec![T::zero(); l];
            for m in 0..d {
                let p = &phases[m * w..(m + 1) * w];
                let q = &y[m * w..(m + 1) * w];
                for k in 0..l {
                    acc[k] += if sine {
                        p[l + k] * q[k] - p[k] * q[l + k]
                    } else {
                        p[k] * q[k] + p[l + k] * q[l + k]
                    };
                }
            }
            out.extend(acc);
        }
        out
    }

    fn masked(&self, dens: &[T], x: &[T], g: &mut [T]) {
        for ((gi, &a), &b) in g.iter_mut().zip(dens).zip(x) {
            *gi = a * b;
        }
    }

    /// Reduced density and `<HI>` of the ensemble on `times`.
    pub fn series(&self, ensemble: &ThermalEnsemble<T>, times: &[T]) -> Result<ObservableSeries<T>, EnsembleError> {
        let d = self.dim;
        let dens = self.ensemble_density(ensemble)?;
        let mut g = vec![T::zero(); d * d];

        self.masked(&dens, &self.z, &mut g);
        let pz = self.oscillating_sum(&g, times, false);
        self.masked(&dens, &self.interaction, &mut g);
        let hi = self.oscillating_sum(&g, times, false);

        // D is symmetric, so D o (S10 +- S10^T) = G10 +- G10^T.
        for r in 0..d {
            for c in 0..d {
                g[r * d + c] = dens[r * d + c] * (self.s10[r * d + c] + self.s10[c * d + r]);
            }
        }
        let px = self.oscillating_sum(&g, times, false);
        for r in 0..d {
            for c in 0..d {
                g[r * d + c] = dens[r * d + c] * (self.s10[r * d + c] - self.s10[c * d + r]);
            }
        }
        let py = self.oscillating_sum(&g, times, true);

        let half = T::lit(0.5);
        let densities = (0..times.len())
            .map(|k| {
                if times[k] == T::zero() {
                    // The initial state is known exactly: central spin up.
                    return ReducedDensity::from_polarization([T::zero(), T::zero(), T::one()]);
                }
                let r10 = Complex::new(px[k] * half, -py[k] * half);
                let matrix = [
                    [Complex::new((T::one() - pz[k]) * half, T::zero()), r10.conj()],
                    [r10, Complex::new((T::one() + pz[k]) * half, T::zero())],
                ];
                ReducedDensity::from_matrix(matrix)
            })
            .collect();
        let interaction = times
            .iter()
            .zip(hi)
            .map(|(&t, h)| if t == T::zero() { T::zero() } else { h })
            .collect();
        Ok(ObservableSeries {
            times: times.to_vec(),
            densities,
            interaction,
            metadata: SeriesMetadata {
                model: self.params.clone(),
                seed: None,
                kt: ensemble.kt(),
                m: ensemble.len(),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::dense_spectrum;
    use crate::ensemble::observe_trajectories;
    use crate::propagate::PropagationSettings;

    #[test]
    fn agrees_with_streamed_trajectories() {
        let model = ModelParams::with_frequencies(vec![0.31f64, 0.74, 0.52, 0.18], -1.3)
            .build()
            .unwrap();
        let spec = dense_spectrum(&FlipOperator::bath_hamiltonian(&model)).unwrap();
        let ens = ThermalEnsemble::build(&spec, 16, 0.7, 1.0).unwrap();
        let settings = PropagationSettings::uniform(30.0, 0.5);
        let (rk, _) = observe_trajectories(&model, &ens, &settings).unwrap();
        let prop = SpectralPropagator::new(&model).unwrap();
        let sp = SpectralObservables::new(&model, &prop)
            .unwrap()
            .series(&ens, &settings.output_grid)
            .unwrap();
        assert_eq!(sp.len(), rk.len());
        for k in 0..rk.len() {
            for c in 0..3 {
                let (a, b) = (sp.densities[k].polarization[c], rk.densities[k].polarization[c]);
                assert!((a - b).abs() < 1e-8, "t={} c={c}: {a} vs {b}", rk.times[k]);
            }
            assert!((sp.interaction[k] - rk.interaction[k]).abs() < 1e-8);
        }
    }
}
