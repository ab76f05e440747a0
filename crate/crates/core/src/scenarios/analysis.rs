use super::ScenarioError;
use crate::ensemble::ObservableSeries;
use crate::scalar::Real;

/// Mask threshold of the ratio fit, relative to `max |Px|` on the window.
pub const FIT_MASK_FRACTION: f64 = 0.05;
/// End of the ratio-fit window `[0, t]`.
pub const FIT_WINDOW_END: f64 = 20.0;

fn lerp<T: Real>(times: &[T], values: &[T], t: T) -> T {
    let k = times.partition_point(|&x| x <= t);
    if k == 0 {
        return values[0];
    }
    if k == times.len() {
        return values[k - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let a = (t - t0) / (t1 - t0);
    values[k - 1] + a * (values[k] - values[k - 1])
}

/// Trapezoidal mean of `values` over `[t1, t2]`; samples are linearly
/// interpolated at window ends that fall between grid points.
pub fn time_average<T: Real>(times: &[T], values: &[T], t1: T, t2: T) -> Result<T, ScenarioError> {
    let as_f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let empty = || ScenarioError::EmptyWindow {
        start: as_f(t1),
        end: as_f(t2),
    };
    if times.len() != values.len() || times.len() < 2 || !(t2 > t1) {
        return Err(empty());
    }
    let slack = T::lit(1e-9) * (T::one() + t2.abs());
    if t1 < times[0] - slack || t2 > times[times.len() - 1] + slack {
        return Err(empty());
    }
    let mut pts: Vec<(T, T)> = vec![(t1, lerp(times, values, t1))];
    for (&t, &v) in times.iter().zip(values) {
        if t > t1 && t < t2 {
            pts.push((t, v));
        }
    }
    pts.push((t2, lerp(times, values, t2)));
    let half = T::lit(0.5);
    let area: T = pts
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * half)
        .sum();
    Ok(area / (t2 - t1))
}

/// Result of fitting a constant ratio `numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioFit<T> {
    /// Median ratio over the unmasked samples.
    pub value: T,
    /// Interquartile range divided by `|value|`.
    pub flatness: T,
    pub points: usize,
}

fn quantile<T: Real>(sorted: &[T], q: f64) -> T {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let a = T::lit(pos - lo as f64);
    sorted[lo] + a * (sorted[hi] - sorted[lo])
}

/// Fits `numerator = c * denominator` on `t <= t_end`, ignoring samples with
/// `|denominator| < mask * max |denominator|`.
pub fn fit_ratio<T: Real>(
    times: &[T],
    numerator: &[T],
    denominator: &[T],
    t_end: T,
    mask: T,
) -> Result<RatioFit<T>, ScenarioError> {
    let window: Vec<usize> = (0..times.len()).take_while(|&k| times[k] <= t_end).collect();
    let peak = window.iter().map(|&k| denominator[k].abs()).fold(T::zero(), T::max);
    let mut ratios: Vec<T> = window
        .iter()
        .filter(|&&k| peak > T::zero() && denominator[k].abs() >= mask * peak)
        .map(|&k| numerator[k] / denominator[k])
        .collect();
    const MIN_POINTS: usize = 4;
    if ratios.len() < MIN_POINTS || ratios.iter().any(|r| !r.is_finite()) {
        return Err(ScenarioError::InsufficientPoints {
            found: ratios.len(),
            needed: MIN_POINTS,
        });
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let value = quantile(&ratios, 0.5);
    let iqr = quantile(&ratios, 0.75) - quantile(&ratios, 0.25);
    Ok(RatioFit {
        value,
        flatness: iqr / value.abs(),
        points: ratios.len(),
    })
}

/// `beta' = <HI> / Px` on the window `[0, 20]`.
pub fn fit_beta_prime<T: Real>(series: &ObservableSeries<T>) -> Result<RatioFit<T>, ScenarioError> {
    fit_ratio(
        &series.times,
        &series.interaction,
        &series.px(),
        T::lit(FIT_WINDOW_END),
        T::lit(FIT_MASK_FRACTION),
    )
}
