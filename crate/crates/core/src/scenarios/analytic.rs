use crate::scalar::Real;

/// Free precession of the central spin under `w0/2 sz + b sx`, starting
/// from `P = (0, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticReference<T> {
    pub beta_tilde: T,
    pub omega0: T,
    /// `sqrt(w0^2 + 4 b^2)`.
    pub omega: T,
}

impl<T: Real> AnalyticReference<T> {
    pub fn new(beta_tilde: T, omega0: T) -> Self {
        let four = T::lit(4.0);
        Self {
            beta_tilde,
            omega0,
            omega: (omega0 * omega0 + four * beta_tilde * beta_tilde).sqrt(),
        }
    }

    pub fn polarization(&self, t: T) -> [T; 3] {
        analytic_polarization(self, t)
    }
}

pub fn analytic_polarization<T: Real>(r: &AnalyticReference<T>, t: T) -> [T; 3] {
    let two = T::lit(2.0);
    if r.omega == T::zero() {
        return [T::zero(), T::zero(), T::one()];
    }
    let (s, c) = (r.omega * t).sin_cos();
    let o2 = r.omega * r.omega;
    let b = r.beta_tilde;
    [
        two * b * r.omega0 * (T::one() - c) / o2,
        -two * b * s / r.omega,
        T::one() - two * two * b * b * (T::one() - c) / o2,
    ]
}

/// Root-mean-square difference per component between `p` and the reference
/// on the samples with `t <= t_end`.
pub fn reference_rms<T: Real>(r: &AnalyticReference<T>, times: &[T], p: &[[T; 3]], t_end: T) -> [T; 3] {
    let mut acc = [T::zero(); 3];
    let mut count = 0usize;
    for (&t, pt) in times.iter().zip(p) {
        if t > t_end {
            break;
        }
        let q = r.polarization(t);
        for k in 0..3 {
            acc[k] += (pt[k] - q[k]) * (pt[k] - q[k]);
        }
        count += 1;
    }
    let n = T::from_usize_lossy(count.max(1));
    acc.map(|a| (a / n).sqrt())
}
