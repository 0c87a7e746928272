//! Randomized-smoothing certification: Monte Carlo prediction under
//! Gaussian input noise, exact binomial lower confidence bounds, certified
//! radii and certified accuracy, for any pluggable classifier.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixation::{aggregate_scores, Scanpath};
use crate::foveate::{add_gaussian_noise, RBlur, RBlurConfig};
use crate::image::Image;
use crate::rng;
use crate::stats::std_normal_quantile;

/// Deterministic mapping from images to per-class scores. All stochasticity
/// lives in the certifier's noise, so implementations must be pure and
/// callable from multiple threads.
pub trait Classifier: Sync {
    fn num_classes(&self) -> usize;
    fn scores(&self, img: &Image) -> Vec<f64>;
    fn predict(&self, img: &Image) -> usize {
        argmax_lowest(&self.scores(img))
    }
}

impl<T: Classifier + ?Sized> Classifier for Box<T> {
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }

    fn scores(&self, img: &Image) -> Vec<f64> {
        (**self).scores(img)
    }
}

/// Index of the largest score, ties broken toward the lowest class index.
pub fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Ignores its input entirely; certifies at the attainable ceiling.
#[derive(Debug, Clone)]
pub struct ConstantClassifier {
    class: usize,
    num_classes: usize,
}

impl ConstantClassifier {
    pub fn new(class: usize, num_classes: usize) -> Result<Self> {
        if num_classes == 0 || class >= num_classes {
            return Err(Error::domain(
                "constant classifier",
                "class index must be below the class count",
            ));
        }
        Ok(ConstantClassifier { class, num_classes })
    }
}

impl Classifier for ConstantClassifier {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn scores(&self, _img: &Image) -> Vec<f64> {
        let mut s = vec![0.0; self.num_classes];
        s[self.class] = 1.0;
        s
    }
}

/// One weight vector and bias per class over the flattened planar samples.
#[derive(Debug, Clone)]
pub struct LinearClassifier {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    channels: usize,
    height: usize,
    width: usize,
}

impl LinearClassifier {
    pub fn new(
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
        channels: usize,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        let dim = channels * height * width;
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::domain(
                "linear classifier",
                "need one weight vector and bias per class",
            ));
        }
        if weights.iter().any(|w| w.len() != dim) {
            return Err(Error::domain(
                "linear classifier",
                format!("every weight vector must have {dim} entries"),
            ));
        }
        Ok(LinearClassifier {
            weights,
            biases,
            channels,
            height,
            width,
        })
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    /// Signed L2 margin of the two-class decision boundary at `x`:
    /// `((w0 - w1) . x + (b0 - b1)) / |w0 - w1|`. Positive means class 0.
    pub fn two_class_margin(&self, img: &Image) -> Result<f64> {
        if self.weights.len() != 2 {
            return Err(Error::domain(
                "two_class_margin",
                "margin is defined for exactly two classes",
            ));
        }
        let diff: Vec<f64> = self.weights[0]
            .iter()
            .zip(&self.weights[1])
            .map(|(a, b)| a - b)
            .collect();
        let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("two_class_margin", "degenerate weights"));
        }
        let dot: f64 = diff
            .iter()
            .zip(img.as_slice())
            .map(|(w, &v)| w * f64::from(v))
            .sum();
        Ok((dot + self.biases[0] - self.biases[1]) / norm)
    }
}

impl Classifier for LinearClassifier {
    fn num_classes(&self) -> usize {
        self.weights.len()
    }

    fn scores(&self, img: &Image) -> Vec<f64> {
        assert_eq!(
            (img.channels(), img.height(), img.width()),
            (self.channels, self.height, self.width),
            "input shape does not match the classifier"
        );
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| {
                w.iter()
                    .zip(img.as_slice())
                    .map(|(wi, &xi)| wi * f64::from(xi))
                    .sum::<f64>()
                    + b
            })
            .collect()
    }
}

/// Classifies by (negated squared) distance to per-class centroids.
#[derive(Debug, Clone)]
pub struct NearestCentroidClassifier {
    centroids: Vec<Vec<f64>>,
    channels: usize,
    height: usize,
    width: usize,
}

impl NearestCentroidClassifier {
    pub fn new(
        centroids: Vec<Vec<f64>>,
        channels: usize,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        let dim = channels * height * width;
        if centroids.is_empty() || centroids.iter().any(|c| c.len() != dim) {
            return Err(Error::domain(
                "nearest centroid classifier",
                format!("need non-empty centroids of {dim} entries"),
            ));
        }
        Ok(NearestCentroidClassifier {
            centroids,
            channels,
            height,
            width,
        })
    }
}

impl Classifier for NearestCentroidClassifier {
    fn num_classes(&self) -> usize {
        self.centroids.len()
    }

    fn scores(&self, img: &Image) -> Vec<f64> {
        assert_eq!(
            (img.channels(), img.height(), img.width()),
            (self.channels, self.height, self.width),
            "input shape does not match the classifier"
        );
        self.centroids
            .iter()
            .map(|c| {
                -c.iter()
                    .zip(img.as_slice())
                    .map(|(ci, &xi)| {
                        let d = ci - f64::from(xi);
                        d * d
                    })
                    .sum::<f64>()
            })
            .collect()
    }
}

/// Base classifier behind the foveation pipeline, averaging scores over a
/// scanpath (center-only and corners+center are the common choices).
///
/// The pipeline's own photoreceptor noise is disabled so the wrapper stays
/// deterministic — during certification all noise must come from the
/// certifier. For inference-style runs, [`RBlurClassifier::with_frozen_noise`]
/// re-enables it as a single noise field drawn once from a fixed stream and
/// reused for every input.
pub struct RBlurClassifier<C: Classifier> {
    base: C,
    pipeline: RBlur,
    scanpath: Scanpath,
    frozen_noise_seed: Option<u64>,
    noise_scale: f64,
}

impl<C: Classifier> RBlurClassifier<C> {
    pub fn new(base: C, config: RBlurConfig, scanpath: Scanpath) -> Result<Self> {
        let noise_scale = config.noise_scale;
        let quiet = RBlurConfig {
            noise_scale: 0.0,
            ..config
        };
        Ok(RBlurClassifier {
            base,
            pipeline: RBlur::new(quiet)?,
            scanpath,
            frozen_noise_seed: None,
            noise_scale,
        })
    }

    /// Apply the configured noise scale as one frozen field shared by every
    /// input (sampled from `seed`), keeping the classifier deterministic.
    pub fn with_frozen_noise(mut self, seed: u64) -> Self {
        self.frozen_noise_seed = Some(seed);
        self
    }

    pub fn scanpath(&self) -> &Scanpath {
        &self.scanpath
    }
}

impl<C: Classifier> Classifier for RBlurClassifier<C> {
    fn num_classes(&self) -> usize {
        self.base.num_classes()
    }

    fn scores(&self, img: &Image) -> Vec<f64> {
        let input = match self.frozen_noise_seed {
            Some(seed) if self.noise_scale > 0.0 => {
                let mut noise_rng = rng::frozen_noise_rng(seed);
                add_gaussian_noise(img, self.noise_scale, &mut noise_rng)
                    .expect("validated noise scale")
            }
            _ => img.clone(),
        };
        let mut dummy = rng::image_rng(0, 0); // pipeline noise is zero
        let per_fixation: Vec<Vec<f64>> = self
            .scanpath
            .points()
            .iter()
            .map(|&f| {
                let transformed = self
                    .pipeline
                    .apply(&input, f, &mut dummy)
                    .expect("fixation and image validated against the field");
                self.base.scores(&transformed)
            })
            .collect();
        aggregate_scores(&per_fixation).expect("equal-length score vectors")
    }
}

/// Monte Carlo budget and confidence for certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyParams {
    /// Smoothing noise scale.
    pub sigma_c: f64,
    /// Samples used to select the candidate class.
    pub n0: u32,
    /// Samples used to estimate the candidate's success probability.
    pub n: u32,
    /// Per-input failure probability of the bound.
    pub alpha: f64,
}

impl CertifyParams {
    pub fn new(sigma_c: f64) -> Self {
        CertifyParams {
            sigma_c,
            n0: 100,
            n: 100_000,
            alpha: 0.001,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma_c.is_finite() || self.sigma_c <= 0.0 {
            return Err(Error::config("sigma_c must be finite and > 0"));
        }
        if self.n0 == 0 || self.n == 0 {
            return Err(Error::config("n0 and n must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Largest `p` whose binomial upper tail `P(Bin(n, p) >= k)` stays within
/// `alpha` — the exact (Clopper-Pearson) lower confidence bound for `k`
/// successes in `n` trials.
///
/// Closed forms at the edges (`k=0 -> 0`, `k=n -> alpha^(1/n)`); otherwise a
/// bisection on the regularized incomplete beta identity
/// `P(Bin(n,p) >= k) = I_p(k, n-k+1)` to absolute tolerance 1e-10.
pub fn clopper_pearson_lower(k: u64, n: u64, alpha: f64) -> Result<f64> {
    if n == 0 || k > n {
        return Err(Error::domain(
            "clopper_pearson_lower",
            format!("need 0 <= k <= n with n >= 1, got k={k}, n={n}"),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(
            "clopper_pearson_lower",
            format!("alpha must lie in (0, 1), got {alpha}"),
        ));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if k == n {
        return Ok((alpha.ln() / n as f64).exp());
    }
    let a = k as f64;
    let b = (n - k + 1) as f64;
    let tail = |p: f64| statrs::function::beta::beta_reg(a, b, p);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) <= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Certification verdict for one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertifyOutcome {
    Certified { class: usize, radius: f64 },
    Abstain,
}

/// Verdict plus the statistics that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificationResult {
    pub outcome: CertifyOutcome,
    /// Candidate class chosen by the selection round.
    pub candidate: usize,
    /// Votes the candidate received among the `n0` selection samples.
    pub selection_votes: u32,
    /// Successes `k` among the `n` estimation samples.
    pub estimation_successes: u32,
    /// Clopper-Pearson lower bound on the candidate's success probability.
    pub p_lower: f64,
    pub n0: u32,
    pub n: u32,
    pub sigma_c: f64,
}

impl CertificationResult {
    pub fn certified_class(&self) -> Option<usize> {
        match self.outcome {
            CertifyOutcome::Certified { class, .. } => Some(class),
            CertifyOutcome::Abstain => None,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self.outcome {
            CertifyOutcome::Certified { radius, .. } => Some(radius),
            CertifyOutcome::Abstain => None,
        }
    }
}

/// Seed material for one certification run; per-sample RNG streams derive
/// from `(master_seed, input_index, sample index)` so parallel evaluation is
/// reproducible regardless of scheduling.
#[derive(Debug, Clone, Copy)]
pub struct CertifySeed {
    pub master_seed: u64,
    pub input_index: u64,
}

fn count_votes<C: Classifier + ?Sized>(
    clf: &C,
    x: &Image,
    sigma: f64,
    samples: u32,
    rng_for: impl Fn(u64) -> rand_chacha::ChaCha12Rng + Sync + Send,
    num_classes: usize,
) -> Vec<u64> {
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(u64::from(i));
            let noisy = add_gaussian_noise(x, sigma, &mut rng).expect("validated sigma");
            clf.predict(&noisy)
        })
        .fold(
            || vec![0u64; num_classes],
            |mut acc, class| {
                acc[class] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; num_classes],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Two-round Monte Carlo certification: `n0` noisy predictions pick the
/// candidate class, `n` fresh ones bound its success probability, and the
/// certified L2 radius is `sigma_c * Phi^-1(p_lower)` when `p_lower > 1/2`
/// (ABSTAIN otherwise — a result, not an error). Deterministic per seed.
pub fn certify<C: Classifier + ?Sized>(
    clf: &C,
    x: &Image,
    params: &CertifyParams,
    seed: CertifySeed,
) -> Result<CertificationResult> {
    params.validate()?;
    let classes = clf.num_classes();
    if classes == 0 {
        return Err(Error::domain("certify", "classifier reports zero classes"));
    }

    let master = seed.master_seed;
    let input = seed.input_index;
    let selection = count_votes(
        clf,
        x,
        params.sigma_c,
        params.n0,
        move |i| rng::cert_selection_rng(master, input, i),
        classes,
    );
    let candidate = selection
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let selection_votes = selection[candidate] as u32;

    let estimation = count_votes(
        clf,
        x,
        params.sigma_c,
        params.n,
        move |i| rng::cert_estimation_rng(master, input, i),
        classes,
    );
    let k = estimation[candidate];
    let p_lower = clopper_pearson_lower(k, u64::from(params.n), params.alpha)?;

    let outcome = if p_lower > 0.5 {
        CertifyOutcome::Certified {
            class: candidate,
            radius: params.sigma_c * std_normal_quantile(p_lower)?,
        }
    } else {
        CertifyOutcome::Abstain
    };
    Ok(CertificationResult {
        outcome,
        candidate,
        selection_votes,
        estimation_successes: k as u32,
        p_lower,
        n0: params.n0,
        n: params.n,
        sigma_c: params.sigma_c,
    })
}

/// Certify every input of a dataset; input `i` uses `(master_seed, i)` as
/// its seed.
pub fn certify_dataset<C: Classifier + ?Sized>(
    clf: &C,
    dataset: &[(Image, usize)],
    params: &CertifyParams,
    master_seed: u64,
) -> Result<Vec<CertificationResult>> {
    dataset
        .iter()
        .enumerate()
        .map(|(i, (x, _))| {
            certify(
                clf,
                x,
                params,
                CertifySeed {
                    master_seed,
                    input_index: i as u64,
                },
            )
        })
        .collect()
}

/// Fraction of records that certified the true label with radius at least
/// `radius`.
pub fn certified_accuracy_from(
    results: &[CertificationResult],
    labels: &[usize],
    radius: f64,
) -> f64 {
    let hits = results
        .iter()
        .zip(labels)
        .filter(|(r, &label)| match r.outcome {
            CertifyOutcome::Certified { class, radius: rr } => class == label && rr >= radius,
            CertifyOutcome::Abstain => false,
        })
        .count();
    hits as f64 / results.len().max(1) as f64
}

/// Certified accuracy at `radius`: the fraction of the dataset whose
/// certified class equals the label with certified radius >= `radius`.
pub fn certified_accuracy<C: Classifier + ?Sized>(
    clf: &C,
    dataset: &[(Image, usize)],
    radius: f64,
    params: &CertifyParams,
    master_seed: u64,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::domain("certified_accuracy", "dataset is empty"));
    }
    let results = certify_dataset(clf, dataset, params, master_seed)?;
    let labels: Vec<usize> = dataset.iter().map(|(_, l)| *l).collect();
    Ok(certified_accuracy_from(&results, &labels, radius))
}

/// Results of certifying the same classifier under matched
/// (`sigma_c = sigma_t`) and unmatched (`sigma_c = 2 sigma_t`) noise.
#[derive(Debug, Clone)]
pub struct MatchedUnmatched {
    pub sigma_matched: f64,
    pub sigma_unmatched: f64,
    pub matched: Vec<CertificationResult>,
    pub unmatched: Vec<CertificationResult>,
}

/// One-call matched/unmatched comparison over a dataset.
pub fn matched_unmatched_certification<C: Classifier + ?Sized>(
    clf: &C,
    dataset: &[(Image, usize)],
    sigma_t: f64,
    n0: u32,
    n: u32,
    alpha: f64,
    master_seed: u64,
) -> Result<MatchedUnmatched> {
    if !sigma_t.is_finite() || sigma_t <= 0.0 {
        return Err(Error::config("sigma_t must be finite and > 0"));
    }
    let run = |sigma_c: f64| -> Result<Vec<CertificationResult>> {
        let params = CertifyParams {
            sigma_c,
            n0,
            n,
            alpha,
        };
        certify_dataset(clf, dataset, &params, master_seed)
    };
    Ok(MatchedUnmatched {
        sigma_matched: sigma_t,
        sigma_unmatched: 2.0 * sigma_t,
        matched: run(sigma_t)?,
        unmatched: run(2.0 * sigma_t)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::std_normal_cdf;

    // ---- Clopper-Pearson ----

    /// Brute-force oracle: bisection on the exact binomial tail computed by
    /// direct summation of log-pmf terms.
    fn cp_oracle(k: u64, n: u64, alpha: f64) -> f64 {
        let ln_choose = |n: u64, k: u64| -> f64 {
            let mut s = 0.0;
            for i in 0..k {
                s += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
            }
            s
        };
        let tail = |p: f64| -> f64 {
            if p <= 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            if p >= 1.0 {
                return 1.0;
            }
            (k..=n)
                .map(|i| {
                    (ln_choose(n, i) + i as f64 * p.ln() + (n - i) as f64 * (1.0 - p).ln()).exp()
                })
                .sum()
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if tail(mid) <= alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn cp_edge_cases() {
        assert_eq!(clopper_pearson_lower(0, 100, 0.05).unwrap(), 0.0);
        // all successes: alpha^(1/n)
        let p = clopper_pearson_lower(100_000, 100_000, 0.001).unwrap();
        assert!((p - 0.999_930_924_833_009_4).abs() < 1e-12);
    }

    #[test]
    fn cp_matches_binomial_tail_oracle() {
        for (k, n, alpha) in [
            (50u64, 100u64, 0.05),
            (1, 10, 0.05),
            (9, 10, 0.001),
            (73, 200, 0.01),
            (199, 200, 0.5),
        ] {
            let got = clopper_pearson_lower(k, n, alpha).unwrap();
            let want = cp_oracle(k, n, alpha);
            assert!(
                (got - want).abs() < 1e-8,
                "k={k} n={n} alpha={alpha}: {got} vs {want}"
            );
        }
        // the spec example value, frozen from the oracle
        let got = clopper_pearson_lower(50, 100, 0.05).unwrap();
        assert!((got - 0.413_621_714_630_911_74).abs() < 1e-8);
    }

    #[test]
    fn cp_monotonicity_and_bound() {
        let mut prev = -1.0;
        for k in 0..=20u64 {
            let p = clopper_pearson_lower(k, 20, 0.05).unwrap();
            assert!(p >= prev);
            assert!(p <= k as f64 / 20.0 + 1e-12);
            prev = p;
        }
        // looser alpha gives a larger bound
        let tight = clopper_pearson_lower(15, 20, 0.001).unwrap();
        let loose = clopper_pearson_lower(15, 20, 0.1).unwrap();
        assert!(loose > tight);
    }

    #[test]
    fn cp_rejects_bad_arguments() {
        assert!(clopper_pearson_lower(5, 4, 0.05).is_err());
        assert!(clopper_pearson_lower(0, 0, 0.05).is_err());
        assert!(clopper_pearson_lower(1, 4, 0.0).is_err());
        assert!(clopper_pearson_lower(1, 4, 1.0).is_err());
    }

    // ---- certify ----

    fn flat_image(dim: usize, value: f32) -> Image {
        Image::constant(1, dim, dim, value).unwrap()
    }

    #[test]
    fn constant_classifier_certifies_at_ceiling() {
        let clf = ConstantClassifier::new(1, 3).unwrap();
        let params = CertifyParams {
            sigma_c: 0.25,
            n0: 20,
            n: 500,
            alpha: 0.001,
        };
        let seed = CertifySeed {
            master_seed: 1,
            input_index: 0,
        };
        let r = certify(&clf, &flat_image(4, 0.5), &params, seed).unwrap();
        assert_eq!(r.candidate, 1);
        assert_eq!(r.estimation_successes, 500);
        let expect_p = (0.001f64.ln() / 500.0).exp();
        assert!((r.p_lower - expect_p).abs() < 1e-12);
        let radius = r.radius().unwrap();
        let expect_r = 0.25 * std_normal_quantile(expect_p).unwrap();
        assert!((radius - expect_r).abs() < 1e-12);
    }

    #[test]
    fn certify_is_deterministic_and_parallel_safe() {
        let clf = two_class_linear(8);
        let x = offset_image(8, 0.3);
        let params = CertifyParams {
            sigma_c: 0.25,
            n0: 50,
            n: 2_000,
            alpha: 0.01,
        };
        let seed = CertifySeed {
            master_seed: 5,
            input_index: 3,
        };
        let a = certify(&clf, &x, &params, seed).unwrap();
        let b = certify(&clf, &x, &params, seed).unwrap();
        assert_eq!(a, b);
    }

    /// Two-class linear classifier with unit-norm weight difference along a
    /// single direction, so the margin equals the mean offset directly.
    fn two_class_linear(dim: usize) -> LinearClassifier {
        let n = dim * dim;
        let w0: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
        let w1: Vec<f64> = vec![-1.0 / (n as f64).sqrt(); n];
        LinearClassifier::new(vec![w0, w1], vec![0.0, 0.0], 1, dim, dim).unwrap()
    }

    fn offset_image(dim: usize, margin: f64) -> Image {
        // x = t * w_hat where w_hat = 1/sqrt(n); margin of two_class_linear
        // at x is then exactly t (since |w0 - w1| = 2 and the dot doubles)
        let n = dim * dim;
        let t = margin / (n as f64).sqrt();
        Image::constant(1, dim, dim, t as f32).unwrap()
    }

    #[test]
    fn margin_helper_matches_construction() {
        let clf = two_class_linear(8);
        let x = offset_image(8, 0.4);
        let m = clf.two_class_margin(&x).unwrap();
        assert!((m - 0.4).abs() < 1e-5, "margin {m}");
    }

    #[test]
    fn linear_classifier_radius_approaches_margin() {
        let clf = two_class_linear(8);
        let sigma = 0.25;
        let margin = 0.3; // margin / sigma = 1.2, comfortably certifiable
        let x = offset_image(8, margin);
        let m = clf.two_class_margin(&x).unwrap();
        let params = CertifyParams {
            sigma_c: sigma,
            n0: 100,
            n: 20_000,
            alpha: 0.001,
        };
        let seed = CertifySeed {
            master_seed: 11,
            input_index: 0,
        };
        let r = certify(&clf, &x, &params, seed).unwrap();
        let radius = r.radius().expect("should certify");
        assert!(radius <= m + 1e-9, "radius {radius} exceeds margin {m}");
        assert!(radius > 0.9 * m, "radius {radius} far below margin {m}");
        // analytic success probability for the linear case
        let p_true = std_normal_cdf(m / sigma);
        assert!(r.p_lower <= p_true + 1e-6);
    }

    #[test]
    fn boundary_input_abstains() {
        let clf = two_class_linear(8);
        let x = offset_image(8, 0.0);
        let params = CertifyParams {
            sigma_c: 0.25,
            n0: 100,
            n: 5_000,
            alpha: 0.001,
        };
        let seed = CertifySeed {
            master_seed: 17,
            input_index: 0,
        };
        let r = certify(&clf, &x, &params, seed).unwrap();
        assert_eq!(r.outcome, CertifyOutcome::Abstain);
    }

    #[test]
    fn radius_never_exceeds_ceiling() {
        let clf = two_class_linear(4);
        let params = CertifyParams {
            sigma_c: 0.5,
            n0: 20,
            n: 300,
            alpha: 0.01,
        };
        let ceiling = params.sigma_c
            * std_normal_quantile((params.alpha.ln() / f64::from(params.n)).exp()).unwrap();
        for i in 0..10u64 {
            let x = offset_image(4, 0.1 * i as f64);
            let seed = CertifySeed {
                master_seed: 23,
                input_index: i,
            };
            let r = certify(&clf, &x, &params, seed).unwrap();
            if let Some(radius) = r.radius() {
                assert!(radius <= ceiling + 1e-12);
            }
        }
    }

    #[test]
    fn certified_accuracy_constant_and_ceiling() {
        let clf = ConstantClassifier::new(0, 1).unwrap();
        let dataset: Vec<(Image, usize)> = (0..5).map(|_| (flat_image(4, 0.2), 0usize)).collect();
        let params = CertifyParams {
            sigma_c: 0.25,
            n0: 10,
            n: 200,
            alpha: 0.001,
        };
        let acc = certified_accuracy(&clf, &dataset, 0.0, &params, 3).unwrap();
        assert_eq!(acc, 1.0);
        // past the attainable ceiling nothing can certify
        let ceiling = params.sigma_c
            * std_normal_quantile((params.alpha.ln() / f64::from(params.n)).exp()).unwrap();
        let acc = certified_accuracy(&clf, &dataset, ceiling + 1e-6, &params, 3).unwrap();
        assert_eq!(acc, 0.0);
    }

    #[test]
    fn soundness_over_many_runs() {
        // the CP bound holds at any sample count, so keep n modest and run
        // 1000 certifications; the fraction of radii exceeding the true
        // margin must stay within 3 alpha
        let clf = two_class_linear(4);
        let sigma = 0.25;
        let alpha = 0.001;
        let params = CertifyParams {
            sigma_c: sigma,
            n0: 30,
            n: 2_000,
            alpha,
        };
        let mut violations = 0usize;
        for i in 0..1000u64 {
            let margin = sigma * (0.5 + 1.5 * (i as f64 / 999.0));
            let x = offset_image(4, margin);
            let r = certify(
                &clf,
                &x,
                &params,
                CertifySeed {
                    master_seed: 31,
                    input_index: i,
                },
            )
            .unwrap();
            if let Some(radius) = r.radius() {
                if radius > margin {
                    violations += 1;
                }
            }
        }
        assert!(
            violations as f64 / 1000.0 <= 3.0 * alpha,
            "{violations} of 1000 radii exceeded the margin"
        );
    }

    #[test]
    fn certified_accuracy_matches_margin_analysis() {
        // margins spread around the query radius: the analytic certified
        // accuracy is the fraction with margin >= r (up to the CP penalty,
        // which only shrinks radii slightly)
        let clf = two_class_linear(4);
        let sigma = 0.25;
        let margins: Vec<f64> = (0..20).map(|i| sigma * (0.2 + 0.2 * i as f64)).collect();
        let dataset: Vec<(Image, usize)> = margins
            .iter()
            .map(|&m| (offset_image(4, m), 0usize))
            .collect();
        let params = CertifyParams {
            sigma_c: sigma,
            n0: 50,
            n: 10_000,
            alpha: 0.001,
        };
        let r_query = sigma * 1.5;
        let acc = certified_accuracy(&clf, &dataset, r_query, &params, 77).unwrap();
        // analytic: margins strictly above r certify past it, margins well
        // below it cannot; the single margin within the Monte Carlo band
        // around r decides the +/- 1/20 tolerance
        let analytic = margins.iter().filter(|&&m| m >= r_query).count() as f64 / 20.0;
        assert!(
            (acc - analytic).abs() <= 0.05 + 1e-12,
            "certified accuracy {acc} vs analytic {analytic}"
        );
    }

    #[test]
    fn matched_unmatched_runs_both_scales() {
        let clf = ConstantClassifier::new(0, 2).unwrap();
        let dataset: Vec<(Image, usize)> = (0..2).map(|_| (flat_image(4, 0.5), 0usize)).collect();
        let cmp = matched_unmatched_certification(&clf, &dataset, 0.125, 10, 100, 0.01, 7).unwrap();
        assert_eq!(cmp.sigma_matched, 0.125);
        assert_eq!(cmp.sigma_unmatched, 0.25);
        // constant classifier certifies everywhere; the unmatched radius is
        // exactly twice the matched radius (same p_lower, doubled sigma)
        for (m, u) in cmp.matched.iter().zip(&cmp.unmatched) {
            let (rm, ru) = (m.radius().unwrap(), u.radius().unwrap());
            assert!((ru - 2.0 * rm).abs() < 1e-12);
        }
    }

    // ---- rblur-wrapped classifier ----

    #[test]
    fn rblur_wrapper_aggregates_fixation_scores() {
        use crate::fixation::five_fixations;
        use crate::geometry::VisualField;

        let dim = 16usize;
        let cfg = RBlurConfig {
            field_width: dim as u32,
            bins: 8,
            merge_threshold: 1,
            viewing_distance: 1,
            ..RBlurConfig::default()
        };
        let field = VisualField::square(dim as u32).unwrap();
        let scanpath = five_fixations(&field);
        let base = two_class_linear(dim);
        let wrapped = RBlurClassifier::new(two_class_linear(dim), cfg, scanpath.clone()).unwrap();

        let x = offset_image(dim, 0.5);
        let got = wrapped.scores(&x);
        // manual reference: transform per fixation, score, average
        let quiet = RBlur::new(RBlurConfig {
            noise_scale: 0.0,
            ..cfg
        })
        .unwrap();
        let mut dummy = crate::rng::image_rng(0, 0);
        let per_fix: Vec<Vec<f64>> = scanpath
            .points()
            .iter()
            .map(|&f| base.scores(&quiet.apply(&x, f, &mut dummy).unwrap()))
            .collect();
        let want = aggregate_scores(&per_fix).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        // deterministic across calls
        assert_eq!(wrapped.scores(&x), got);
    }

    #[test]
    fn frozen_noise_is_shared_across_inputs() {
        use crate::fixation::five_fixations;
        use crate::geometry::VisualField;

        let dim = 8usize;
        let cfg = RBlurConfig {
            field_width: dim as u32,
            bins: 8,
            merge_threshold: 1,
            viewing_distance: 0,
            ..RBlurConfig::default()
        };
        let field = VisualField::square(dim as u32).unwrap();
        let wrapped = RBlurClassifier::new(two_class_linear(dim), cfg, five_fixations(&field))
            .unwrap()
            .with_frozen_noise(99);
        let x = offset_image(dim, 0.4);
        // same input, same scores: the noise field is frozen, not resampled
        assert_eq!(wrapped.scores(&x), wrapped.scores(&x));
    }
}
