//! Pre/post-change density models.
//!
//! All likelihood work downstream happens in natural-log domain;
//! densities are never multiplied raw. Only the Gaussian family ships
//! for now — the enum leaves room for other parametric families.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::Result;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// A univariate parametric density with exact log-pdf evaluation and
/// seeded sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityModel {
    Gaussian { mean: f64, variance: f64 },
}

impl DensityModel {
    /// Gaussian with the given mean and (strictly positive) variance.
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
            return Err(Error::config(format!(
                "gaussian requires finite mean and variance > 0, got mean={mean}, variance={variance}"
            )));
        }
        Ok(DensityModel::Gaussian { mean, variance })
    }

    /// Natural-log density at `x`; finite for all finite `x`.
    #[inline]
    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            DensityModel::Gaussian { mean, variance } => {
                let d = x - mean;
                -d * d / (2.0 * variance) - 0.5 * variance.ln() - LN_SQRT_2PI
            }
        }
    }

    /// Draw one value; deterministic given the rng state.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DensityModel::Gaussian { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
        }
    }
}

/// Pre-change density `g` and post-change density `f`, homogeneous
/// across sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPair {
    pre: DensityModel,
    post: DensityModel,
}

impl DensityPair {
    /// A zero-KL pair makes every delay quantity degenerate, so equal
    /// parameter tuples are rejected at construction.
    pub fn new(pre: DensityModel, post: DensityModel) -> Result<Self> {
        if pre == post {
            return Err(Error::config(
                "pre- and post-change densities are identical (zero KL divergence)",
            ));
        }
        Ok(DensityPair { pre, post })
    }

    /// Bypasses the zero-KL guard; only tests have a reason to call this.
    pub fn new_unchecked(pre: DensityModel, post: DensityModel) -> Self {
        DensityPair { pre, post }
    }

    /// The standard pair used throughout the experiments: g = N(0,1),
    /// f = N(1,1).
    pub fn standard_gaussian_shift() -> Self {
        DensityPair {
            pre: DensityModel::Gaussian {
                mean: 0.0,
                variance: 1.0,
            },
            post: DensityModel::Gaussian {
                mean: 1.0,
                variance: 1.0,
            },
        }
    }

    pub fn pre(&self) -> &DensityModel {
        &self.pre
    }

    pub fn post(&self) -> &DensityModel {
        &self.post
    }

    /// `log f(x) - log g(x)` for a single observation.
    #[inline]
    pub fn llr(&self, x: f64) -> f64 {
        self.post.log_pdf(x) - self.pre.log_pdf(x)
    }

    /// Componentwise log-likelihood ratio of an observation vector.
    pub fn per_sensor_llr(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.llr(v)).collect()
    }

    /// In-place variant for hot loops.
    pub fn per_sensor_llr_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(x.iter().map(|&v| self.llr(v)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::mean_stderr;
    use crate::seed::derive_rng;

    #[test]
    fn standard_normal_at_mode() {
        let g = DensityModel::gaussian(0.0, 1.0).unwrap();
        assert!((g.log_pdf(0.0) - (-0.9189385)).abs() < 1e-7);
    }

    #[test]
    fn shift_symmetry_at_mode() {
        let f = DensityModel::gaussian(1.0, 1.0).unwrap();
        assert!((f.log_pdf(1.0) - (-0.9189385)).abs() < 1e-7);
    }

    #[test]
    fn standard_normal_two_sigma() {
        // -x^2/2 - ln sqrt(2 pi) at x = 2
        let g = DensityModel::gaussian(0.0, 1.0).unwrap();
        assert!((g.log_pdf(2.0) - (-2.9189385)).abs() < 1e-7);
    }

    #[test]
    fn log_pdf_integrates_to_one() {
        // trapezoid over [-12, 12], well past any mass for unit variance
        let g = DensityModel::gaussian(0.3, 1.7).unwrap();
        let steps = 200_000;
        let (a, b) = (-12.0, 12.0);
        let h = (b - a) / steps as f64;
        let mut total = 0.0;
        for i in 0..=steps {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            total += w * g.log_pdf(x).exp();
        }
        total *= h;
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn variance_guard() {
        assert!(DensityModel::gaussian(0.0, 0.0).is_err());
        assert!(DensityModel::gaussian(0.0, -1.0).is_err());
        assert!(DensityModel::gaussian(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn zero_kl_pair_rejected() {
        let g = DensityModel::gaussian(0.0, 1.0).unwrap();
        assert!(DensityPair::new(g, g).is_err());
    }

    #[test]
    fn sampling_moments() {
        let g = DensityModel::gaussian(0.0, 1.0).unwrap();
        let f = DensityModel::gaussian(1.0, 1.0).unwrap();
        let mut rng = derive_rng(11, &[1]);
        let n = 1_000_000;
        let draws_g: Vec<f64> = (0..n).map(|_| g.sample(&mut rng)).collect();
        let (mean_g, _) = mean_stderr(&draws_g);
        assert!(mean_g.abs() < 0.005, "sample mean {mean_g}");

        let draws_f: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
        let (mean_f, _) = mean_stderr(&draws_f);
        let var_f = draws_f.iter().map(|v| (v - mean_f).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var_f - 1.0).abs() < 0.01, "sample variance {var_f}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = DensityModel::gaussian(0.0, 1.0).unwrap();
        let mut a = derive_rng(5, &[2]);
        let mut b = derive_rng(5, &[2]);
        for _ in 0..100 {
            assert_eq!(g.sample(&mut a), g.sample(&mut b));
        }
    }

    #[test]
    fn gaussian_unit_shift_llr_is_affine() {
        // log f/g for N(1,1) vs N(0,1) collapses to x - 1/2
        let pair = DensityPair::standard_gaussian_shift();
        for &x in &[-3.0, -0.7, 0.0, 0.5, 1.0, 2.0, 10.0] {
            assert!((pair.llr(x) - (x - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn per_sensor_llr_matches_log_pdf_difference() {
        let pair = DensityPair::new(
            DensityModel::gaussian(-0.3, 0.8).unwrap(),
            DensityModel::gaussian(1.2, 2.5).unwrap(),
        )
        .unwrap();
        let x = [0.0, 1.0, 2.0, -4.5];
        let llrs = pair.per_sensor_llr(&x);
        for (l, &v) in llrs.iter().zip(x.iter()) {
            let direct = pair.post().log_pdf(v) - pair.pre().log_pdf(v);
            assert!((l - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn per_sensor_llr_examples() {
        let pair = DensityPair::standard_gaussian_shift();
        let one = pair.per_sensor_llr(&[0.5]);
        assert!((one[0] - 0.0).abs() < 1e-12);
        let three = pair.per_sensor_llr(&[0.0, 1.0, 2.0]);
        for (got, want) in three.iter().zip([-0.5, 0.5, 1.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_pair_gives_zero_llr() {
        let g = DensityModel::gaussian(0.0, 1.0).unwrap();
        let pair = DensityPair::new_unchecked(g, g);
        for l in pair.per_sensor_llr(&[0.1, -2.0, 5.0]) {
            assert_eq!(l, 0.0);
        }
    }

    #[test]
    fn likelihood_ratio_has_unit_mean_under_pre_change() {
        let pair = DensityPair::standard_gaussian_shift();
        let mut rng = derive_rng(23, &[3]);
        let n = 1_000_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| pair.llr(pair.pre().sample(&mut rng)).exp())
            .collect();
        let (mean, se) = mean_stderr(&vals);
        assert!(
            (mean - 1.0).abs() <= 3.0 * se,
            "E_g[exp(llr)] = {mean} +- {se}"
        );
    }
}
