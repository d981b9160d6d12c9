use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{cycle_graph, maximal_packing, path_graph, MetricGraph, RngSeed, ScalarField};
use crate::{Error, Result};

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
fn fgn_autocov(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Fractional Brownian motion on `[0, 1]` sampled at `n` equispaced points,
/// by exact circulant embedding of the increment covariance.
pub fn gen_fbm(n: usize, hurst: f64, seed: RngSeed) -> Result<ScalarField> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::invalid("hurst must lie in (0, 1)"));
    }
    if n < 2 {
        return Err(Error::invalid("fbm needs n >= 2"));
    }
    let m = n - 1;
    let size = 2 * m;
    let mut row: Vec<Complex64> = (0..size)
        .map(|j| {
            let lag = if j <= m { j } else { size - j };
            Complex64::new(fgn_autocov(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);

    let peak = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let mut scale = Vec::with_capacity(size);
    for c in &row {
        let lambda = if c.re < 0.0 {
            if c.re < -1e-10 * peak.max(1.0) {
                return Err(Error::NumericalFailure(format!(
                    "circulant embedding has negative eigenvalue {}",
                    c.re
                )));
            }
            0.0
        } else {
            c.re
        };
        scale.push((lambda / size as f64).sqrt());
    }

    let mut rng = seed.rng();
    let mut w: Vec<Complex64> = scale
        .iter()
        .map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
        .collect();
    fft.process(&mut w);

    let step = (1.0 / m as f64).powf(hurst);
    let mut values = Vec::with_capacity(n);
    let mut acc = 0.0;
    values.push(0.0);
    for c in &w[..m] {
        acc += c.re * step;
        values.push(acc);
    }
    let graph = path_graph(n, 1.0 / m as f64)?;
    ScalarField::new(Arc::new(graph), values)
}

/// Random Fourier series with Gaussian coefficients on a cycle of `n` vertices.
pub fn gen_random_fourier(
    n: usize,
    mode_count: usize,
    decay: f64,
    seed: RngSeed,
) -> Result<ScalarField> {
    let mut rng = seed.rng();
    let coeffs: Vec<(f64, f64)> = (0..mode_count)
        .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    fourier_from_coefficients(n, decay, &coeffs)
}

/// Deterministic variant of [`gen_random_fourier`] taking `(a_k, b_k)` for
/// `k = 1..=coeffs.len()`.
pub fn fourier_from_coefficients(n: usize, decay: f64, coeffs: &[(f64, f64)]) -> Result<ScalarField> {
    if n < 4 {
        return Err(Error::invalid("fourier field needs n >= 4"));
    }
    if coeffs.is_empty() {
        return Err(Error::invalid("mode_count must be >= 1"));
    }
    if !(decay > 1.0 && decay.is_finite()) {
        return Err(Error::invalid("decay must be > 1"));
    }
    let values = (0..n)
        .map(|j| {
            let x = j as f64 / n as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let k = (i + 1) as f64;
                    let t = 2.0 * PI * k * x;
                    k.powf(-decay) * (a * t.cos() + b * t.sin())
                })
                .sum()
        })
        .collect();
    let graph = cycle_graph(n, 1.0 / n as f64)?;
    ScalarField::new(Arc::new(graph), values)
}

/// `x ↦ d(x, P)^alpha` where `P` is the greedy maximal `eps`-packing.
pub fn gen_distance_to_net(g: &Arc<MetricGraph>, eps: f64, alpha: f64) -> Result<ScalarField> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid("eps must be positive"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1]"));
    }
    let centres = maximal_packing(g, eps);
    let values = g
        .multi_source_distances(&centres)
        .into_iter()
        .map(|d| d.powf(alpha))
        .collect();
    ScalarField::new(g.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fbm_pinned_and_deterministic() {
        for s in 0..5 {
            let f = gen_fbm(65, 0.3, RngSeed(s)).unwrap();
            assert_eq!(f.values()[0], 0.0);
            assert_eq!(f.len(), 65);
            assert_eq!(f.values(), gen_fbm(65, 0.3, RngSeed(s)).unwrap().values());
        }
        assert_ne!(
            gen_fbm(17, 0.5, RngSeed(1)).unwrap().values(),
            gen_fbm(17, 0.5, RngSeed(2)).unwrap().values()
        );
    }

    #[test]
    fn fbm_rejects_bad_hurst() {
        for h in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(gen_fbm(9, h, RngSeed(0)), Err(Error::InvalidInput(_))));
        }
        assert!(gen_fbm(2, 0.5, RngSeed(0)).is_ok());
    }

    #[test]
    fn fgn_autocov_at_half_is_white() {
        assert_eq!(fgn_autocov(0, 0.5), 1.0);
        assert!(fgn_autocov(3, 0.5).abs() < 1e-15);
        assert!(fgn_autocov(1, 0.8) > 0.0);
        assert!(fgn_autocov(1, 0.2) < 0.0);
    }

    #[test]
    fn single_cosine_mode() {
        let f = fourier_from_coefficients(8, 2.0, &[(1.0, 0.0)]).unwrap();
        for (j, v) in f.values().iter().enumerate() {
            let want = (2.0 * PI * j as f64 / 8.0).cos();
            assert!((v - want).abs() < 1e-12);
        }
        assert!(fourier_from_coefficients(8, 1.0, &[(1.0, 0.0)]).is_err());
        assert!(gen_random_fourier(8, 3, 0.5, RngSeed(0)).is_err());
    }

    #[test]
    fn fourier_lives_on_cycle() {
        let f = gen_random_fourier(32, 5, 1.5, RngSeed(4)).unwrap();
        assert_eq!(f.graph().edges().len(), 32);
        assert!(f.graph().neighbors(0).iter().any(|&(w, _)| w == 31));
    }

    #[test]
    fn distance_to_net_sawtooth() {
        let g = Arc::new(path_graph(9, 1.0).unwrap());
        let f = gen_distance_to_net(&g, 0.9, 1.0).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert!(gen_distance_to_net(&g, 0.9, 1.5).is_err());
    }
}
