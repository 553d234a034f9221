//! Small numerical helpers shared across modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream for item `index` under `seed`. Results assembled from
/// such streams do not depend on how the items are partitioned.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes two words into a seed (splitmix64 finaliser).
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Largest `x` in `[lo, hi]` with `ok(x)`, assuming `ok` is true on a prefix
/// of the interval and `ok(lo)` holds. Returns the feasible end of the final
/// bracket.
pub fn bisect_last_true(mut lo: f64, mut hi: f64, tol: f64, mut ok: impl FnMut(f64) -> bool) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of a monotone function by bisection on `[lo, hi]` to relative width `rel_tol`.
pub fn bisect_root(mut lo: f64, mut hi: f64, rel_tol: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Ordinary least squares for `y = c0 + c1 x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let c1 = sxy / sxx;
    Some((my - c1 * mx, c1))
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn bisect_last_true_finds_threshold() {
        let x = bisect_last_true(0.0, 10.0, 1e-9, |v| v * v <= 2.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-8);
        assert!(x * x <= 2.0);
    }

    #[test]
    fn bisect_root_relative() {
        let r = bisect_root(0.0, 1e6, 1e-12, |v| v - 1234.5);
        assert!((r - 1234.5).abs() / 1234.5 < 1e-10);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let (c0, c1) = linear_fit(&x, &y).unwrap();
        assert!((c0 - 0.5).abs() < 1e-12 && (c1 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn streams_are_independent_of_creation_order() {
        let a: f64 = stream_rng(7, 3).random();
        let _ = stream_rng(7, 2).random::<f64>();
        let b: f64 = stream_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, stream_rng(7, 4).random::<f64>());
    }
}
