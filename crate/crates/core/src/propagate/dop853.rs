//! Dormand–Prince 8(5,3) with step-to-grid landing for `dy/dt = -i A y`.

use num_complex::Complex;

use super::{IntegrationStats, PropagateError, PropagationSettings};
use crate::hilbert::LinearOperator;
use crate::scalar::Real;

const STAGES: usize = 12;

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0; 12],
    [5.260015195876773e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.97250569845379e-2, 5.91751709536137e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.958758547680685e-2, 0.0, 8.876275643042054e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.413651341592667e-1, 0.0, -8.845494793282861e-1, 9.24834003261792e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.7037037037037035e-2, 0.0, 0.0, 1.7082860872947386e-1, 1.2546768756682242e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.7109375e-2, 0.0, 0.0, 1.7025221101954405e-1, 6.021653898045596e-2, -1.7578125e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.709200011850479e-2, 0.0, 0.0, 1.7038392571223998e-1, 1.0726203044637328e-1, -1.5319437748624402e-2, 8.273789163814023e-3, 0.0, 0.0, 0.0, 0.0, 0.0],
    [6.241109587160757e-1, 0.0, 0.0, -3.3608926294469414, -8.68219346841726e-1, 2.759209969944671e1, 2.0154067550477894e1, -4.348988418106996e1, 0.0, 0.0, 0.0, 0.0],
    [4.7766253643826434e-1, 0.0, 0.0, -2.4881146199716677, -5.90290826836843e-1, 2.1230051448181193e1, 1.5279233632882423e1, -3.328821096898486e1, -2.0331201708508627e-2, 0.0, 0.0, 0.0],
    [-9.371424300859873e-1, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -1.852006565999696e1, 2.2739487099350505e1, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -1.053449546673725e1, -2.0008720582248625, -1.79589318631188e1, 2.794888452941996e1, -2.8589982771350235, -8.87285693353063, 1.2360567175794303e1, 6.433927460157636e-1, 0.0],
];

#[rustfmt::skip]
const B: [f64; STAGES] = [
    5.4293734116568765e-2, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003,
    -5.801203960010585, 3.111643669578199e-1, -1.521609496625161e-1, 2.0136540080403034e-1,
    4.471061572777259e-2,
];

/// Fifth-order error weights (the `B` difference).
#[rustfmt::skip]
const ER: [f64; STAGES] = [
    1.312004499419488e-2, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -4.957589496572502e-1,
    1.6643771824549864, -3.5032884874997366e-1, 3.341791187130175e-1, 8.192320648511571e-2,
    -2.2355307863886294e-2,
];

/// Third-order error weights on stages 1, 9 and 12.
const BHH: [f64; 3] = [2.440944881889764e-1, 7.338466882816118e-1, 2.2058823529411766e-2];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const INITIAL_STEP: f64 = 1e-4;
/// Bounds on `h_new / h`.
const GROW_MAX: f64 = 6.0;
const SHRINK_MAX: f64 = 1.0 / 3.0;

/// `out = -i A x`.
fn derivative<T: Real, O: LinearOperator<T> + ?Sized>(op: &O, x: &[Complex<T>], out: &mut [Complex<T>]) {
    op.apply_complex(x, out);
    for z in out.iter_mut() {
        *z = Complex::new(z.im, -z.re);
    }
}

/// Integrates from `grid[0]` through every grid time, calling `at_grid` with
/// the state exactly at each one (including the initial time).
pub(crate) fn integrate<T, O, F>(
    op: &O,
    y0: &[Complex<T>],
    settings: &PropagationSettings<T>,
    mut at_grid: F,
) -> Result<IntegrationStats, PropagateError>
where
    T: Real,
    O: LinearOperator<T> + ?Sized,
    F: FnMut(usize, T, &[Complex<T>]) -> Result<(), PropagateError>,
{
    let n = y0.len();
    if op.dim() != n {
        return Err(PropagateError::DimensionMismatch {
            expected: op.dim(),
            found: n,
        });
    }
    let grid = &settings.output_grid;
    let a: Vec<[T; STAGES]> = A.iter().map(|row| row.map(T::lit)).collect();
    let b = B.map(T::lit);
    let er = ER.map(T::lit);
    let bhh = BHH.map(T::lit);
    let (rtol, atol) = (settings.rel_tol, settings.abs_tol);
    let safety = T::lit(SAFETY);
    let beta = T::lit(BETA);
    let expo = T::lit(1.0 / 8.0 - BETA * 0.2);
    let zero = Complex::new(T::zero(), T::zero());

    let mut stats = IntegrationStats::default();
    let mut y = y0.to_vec();
    let mut t = grid[0];
    at_grid(0, t, &y)?;

    let mut k: Vec<Vec<Complex<T>>> = vec![vec![zero; n]; STAGES];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    derivative(op, &y, &mut k[0]);
    stats.applications += 1;
    let mut h = T::lit(INITIAL_STEP).min(settings.max_step);
    let mut facold = T::lit(1e-4);

    for (gi, &target) in grid.iter().enumerate().skip(1) {
        let mut rejected_last = false;
        while t < target {
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step <= T::epsilon() * t.abs().max(T::one()) * T::lit(16.0) {
                return Err(PropagateError::StepUnderflow {
                    time: t.to_f64().unwrap_or(f64::NAN),
                    step: step.to_f64().unwrap_or(f64::NAN),
                });
            }

            for s in 1..STAGES {
                tmp.copy_from_slice(&y);
                for j in 0..s {
                    let c = a[s][j];
                    if c == T::zero() {
                        continue;
                    }
                    let hc = c * step;
                    for (o, &kj) in tmp.iter_mut().zip(&k[j]) {
                        *o += kj * hc;
                    }
                }
                derivative(op, &tmp, &mut k[s]);
            }
            stats.applications += STAGES - 1;

            let mut err = T::zero();
            let mut err2 = T::zero();
            for i in 0..n {
                let mut incr = zero;
                let mut e5 = zero;
                for s in 0..STAGES {
                    if b[s] != T::zero() {
                        incr += k[s][i] * b[s];
                    }
                    if er[s] != T::zero() {
                        e5 += k[s][i] * er[s];
                    }
                }
                y_new[i] = y[i] + incr * step;
                let sk = atol + rtol * y[i].norm().max(y_new[i].norm());
                let e3 = incr - k[0][i] * bhh[0] - k[8][i] * bhh[1] - k[11][i] * bhh[2];
                err2 += (e3 / sk).norm_sqr();
                err += (e5 / sk).norm_sqr();
            }
            let mut deno = err + T::lit(0.01) * err2;
            if deno <= T::zero() {
                deno = T::one();
            }
            let err = step.abs() * err * (T::one() / (deno * T::from_usize_lossy(n))).sqrt();

            let fac11 = err.powf(expo);
            if err <= T::one() {
                let fac = (fac11 / facold.powf(beta) / safety)
                    .min(T::one() / T::lit(SHRINK_MAX))
                    .max(T::one() / T::lit(GROW_MAX));
                let mut proposal = step / fac;
                if rejected_last {
                    proposal = proposal.min(step);
                }
                facold = err.max(T::lit(1e-4));
                t = if landing { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                derivative(op, &y, &mut k[0]);
                stats.applications += 1;
                stats.accepted += 1;
                // A step clipped to land on the grid says nothing about the
                // step the error would otherwise allow.
                h = if landing { proposal.max(h) } else { proposal };
                h = h.min(settings.max_step);
                rejected_last = false;
            } else {
                h = step / (T::one() / T::lit(SHRINK_MAX)).min(fac11 / safety);
                stats.rejected += 1;
                rejected_last = true;
            }
        }
        at_grid(gi, t, &y)?;
    }
    Ok(stats)
}
