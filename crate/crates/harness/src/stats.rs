//! Medians, log-log slope fits and seed-bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaps at or below this are excluded from slope fits.
pub const GAP_FLOOR: f64 = 1e-12;

/// Bootstrap resamples used for intervals and the monotonicity test.
pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Median of the finite values, averaging the middle pair; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Least-squares slope of `ys` on `xs`; `None` with fewer than two distinct `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

/// Slope of `log(median gap)` against `log(1 / (1 - gamma))`.
///
/// `gaps[g][s]` is the gap at discount `gammas[g]` for seed `s`. Gaps at or
/// below [`GAP_FLOOR`] or non-finite are dropped before the median; a discount
/// with nothing left is dropped from the fit.
pub fn log_log_slope(gammas: &[f64], gaps: &[Vec<f64>]) -> Option<f64> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&g, row) in gammas.iter().zip(gaps) {
        let kept: Vec<f64> = row.iter().copied().filter(|&x| x.is_finite() && x > GAP_FLOOR).collect();
        if let Some(m) = median(&kept) {
            xs.push((1.0 / (1.0 - g)).ln());
            ys.push(m.ln());
        }
    }
    ols_slope(&xs, &ys)
}

/// Percentile interval `[lo, hi]` of `statistic` over seed resamples drawn
/// with replacement; the same resampled seed indices are used at every grid
/// point so that paired structure is kept.
pub fn seed_bootstrap<F>(n_seeds: usize, resamples: usize, seed: u64, mut statistic: F) -> Vec<f64>
where
    F: FnMut(&[usize]) -> Option<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0; n_seeds];
    let mut out = Vec::with_capacity(resamples);
    if n_seeds == 0 {
        return out;
    }
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n_seeds);
        }
        if let Some(v) = statistic(&idx) {
            out.push(v);
        }
    }
    out
}

/// Picks columns `idx` out of every row.
pub fn resample_rows(rows: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_parity_and_nan() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[f64::NAN, 5.0]), Some(5.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn slope_recovers_power_law() {
        let gammas = [0.9, 0.99, 0.999];
        let gaps: Vec<Vec<f64>> = gammas.iter().map(|g: &f64| vec![3.0 * (1.0 / (1.0 - g)).powi(2); 3]).collect();
        assert!((log_log_slope(&gammas, &gaps).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(log_log_slope(&gammas[..1], &gaps[..1]), None);
        let zeros = vec![vec![0.0; 3]; 3];
        assert_eq!(log_log_slope(&gammas, &zeros), None);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), Some(2.0));
        assert_eq!(quantile(&v, 0.125), Some(0.5));
        assert_eq!(quantile(&v, 1.0), Some(4.0));
    }

    #[test]
    fn bootstrap_is_deterministic_and_constant_on_constant_data() {
        let rows = vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]];
        let stat = |idx: &[usize]| median(&resample_rows(&rows, idx)[1]);
        let a = seed_bootstrap(3, 50, 9, stat);
        let b = seed_bootstrap(3, 50, 9, stat);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x == 2.0));
    }
}
