//! Monte Carlo estimation primitives: tail estimators with Wilson
//! confidence intervals, log–log exponent regression, and
//! goodness-of-fit distances (KS, chi-square).
//!
//! Two conventions hold throughout:
//!
//! * **Censoring is explicit.** A tail estimator accounts every replica as
//!   exceeding, below, or censored (indicator undetermined at the cap);
//!   censored replicas count in `n_samples` but never in `n_exceed`, so a
//!   censored `p_hat` is a conservative lower bound and the caller can see
//!   exactly how conservative.
//! * **Distances, not p-values, decide tests.** Samples from conditioned
//!   finite-`n` ensembles carry bias that a p-value would dress up as
//!   precision; fixed distance thresholds per test are honest. The
//!   asymptotic p-value (or bound) is still reported for orientation.

use serde::Serialize;

/// Two-sided 95% normal quantile, `Φ⁻¹(0.975)`.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Errors from the estimation layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("counts ({counts}) and probs ({probs}) differ in length")]
    LengthMismatch { counts: usize, probs: usize },
    #[error("cell probabilities must be positive and sum to ~1 (sum = {0})")]
    BadProbabilities(f64),
    #[error("log–log fit requires positive coordinates, got ({x}, {y})")]
    NonPositive { x: f64, y: f64 },
    #[error("contingency rows differ in length ({first} vs {other})")]
    RaggedTable { first: usize, other: usize },
}

// ─── compensated summation ──────────────────────────────────────────────────

/// Kahan compensated accumulator, so reduction results do not depend on
/// how a parallel driver chunks its replicas.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.s + y;
        self.c = (t - self.s) - y;
        self.s = t;
    }

    pub fn value(self) -> f64 {
        self.s
    }
}

/// Compensated sum of an iterator.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = KahanSum::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Compensated mean; errors on an empty slice.
pub fn mean(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    Ok(kahan_sum(xs.iter().copied()) / xs.len() as f64)
}

/// Median (average of the middle pair for even lengths).
pub fn median(xs: &[f64]) -> Result<f64, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

// ─── tail estimation ────────────────────────────────────────────────────────

/// A Monte Carlo tail probability with uncertainty and explicit censoring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    /// The level the tail is measured at (e.g. the `n` of `P(L > n)`).
    pub threshold: f64,
    pub n_samples: u64,
    pub n_exceed: u64,
    /// Replicas whose exceed/below status the cap left undetermined.
    pub n_censored: u64,
    /// `n_exceed / n_samples`.
    pub p_hat: f64,
    /// Binomial standard error `√(p̂(1−p̂)/n)`.
    pub stderr: f64,
    /// 95% Wilson score interval.
    pub ci95: (f64, f64),
}

impl TailEstimate {
    /// Builds the estimate from exceed/below/censored counts;
    /// `n_samples = n_exceed + n_below + n_censored` always.
    pub fn from_counts(threshold: f64, n_exceed: u64, n_below: u64, n_censored: u64) -> Self {
        let n_samples = n_exceed + n_below + n_censored;
        let n = n_samples.max(1) as f64;
        let p_hat = n_exceed as f64 / n;
        TailEstimate {
            threshold,
            n_samples,
            n_exceed,
            n_censored,
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / n).sqrt(),
            ci95: wilson_ci(n_exceed as f64, n),
        }
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_ci(k: f64, n: f64) -> (f64, f64) {
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Degenerate boundaries are exact: no rounding residue above 0 or below 1.
    let lo = if k == 0.0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

// ─── exponent regression ────────────────────────────────────────────────────

/// Ordinary least squares fit, reported with the filter that selected its
/// points so an exponent estimate is never quoted without its conditioning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
    /// The lower cutoff applied to the *response* scale (e.g. `L ≥ min_L`).
    #[serde(rename = "min_L")]
    pub min_l: f64,
}

/// Least squares of `y` on `x` over raw pairs. Requires ≥ 10 points.
pub fn linear_fit(pairs: &[(f64, f64)], min_l: f64) -> Result<RegressionFit, StatsError> {
    let n = pairs.len();
    if n < 10 {
        return Err(StatsError::TooFewPoints { need: 10, got: n });
    }
    let nf = n as f64;
    let mx = kahan_sum(pairs.iter().map(|p| p.0)) / nf;
    let my = kahan_sum(pairs.iter().map(|p| p.1)) / nf;
    let sxx = kahan_sum(pairs.iter().map(|p| (p.0 - mx) * (p.0 - mx)));
    let sxy = kahan_sum(pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    let syy = kahan_sum(pairs.iter().map(|p| (p.1 - my) * (p.1 - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let slope_stderr = if n > 2 { (ssr / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RegressionFit { slope, slope_stderr, intercept, r2, n_points: n, min_l })
}

/// Least squares of `log y` on `log x`; the slope estimates
/// `d log y / d log x`. All coordinates must be positive.
pub fn log_log_fit(pairs: &[(f64, f64)], min_l: f64) -> Result<RegressionFit, StatsError> {
    let mut logs = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        if x <= 0.0 || y <= 0.0 {
            return Err(StatsError::NonPositive { x, y });
        }
        logs.push((x.ln(), y.ln()));
    }
    linear_fit(&logs, min_l)
}

// ─── goodness of fit ────────────────────────────────────────────────────────

/// Which distance a [`GofResult`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StatisticKind {
    #[serde(rename = "KS")]
    Ks,
    #[serde(rename = "chi_square")]
    ChiSquare,
}

/// A goodness-of-fit distance. Tests gate on `statistic` against fixed
/// thresholds; `p_value_or_bound` is the asymptotic tail (Kolmogorov for
/// KS, chi-square upper tail) reported for orientation only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub statistic_kind: StatisticKind,
    /// Sample size behind the statistic.
    pub n: u64,
    /// Degrees of freedom (chi-square only, after pooling).
    pub dof: Option<u64>,
    pub p_value_or_bound: f64,
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF:
/// `sup_x |F̂(x) − F(x)|`, with both one-sided limits at every jump.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GofResult, StatsError> {
    let n = samples.len();
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    Ok(GofResult {
        statistic: d,
        statistic_kind: StatisticKind::Ks,
        n: n as u64,
        dof: None,
        p_value_or_bound: kolmogorov_sf(nf.sqrt() * d),
    })
}

/// Asymptotic Kolmogorov survival function
/// `Q(t) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²t²}`, clamped to [0, 1].
fn kolmogorov_sf(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut q = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        q += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    q.clamp(0.0, 1.0)
}

/// Pearson chi-square test of observed `counts` against cell
/// probabilities `probs` (normalized internally; cells with expected
/// count below 5 are pooled left-to-right before the statistic is
/// formed, the standard validity repair). Degrees of freedom are the
/// pooled cell count minus one.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> Result<GofResult, StatsError> {
    if counts.len() != probs.len() {
        return Err(StatsError::LengthMismatch { counts: counts.len(), probs: probs.len() });
    }
    if counts.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let psum = kahan_sum(probs.iter().copied());
    if !(psum.is_finite() && psum > 0.0 && probs.iter().all(|&p| p >= 0.0)) {
        return Err(StatsError::BadProbabilities(psum));
    }
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    // Pool adjacent cells until each pooled cell has expected count ≥ 5;
    // a deficient tail cell is merged into its predecessor.
    let mut pooled: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&c, &p) in counts.iter().zip(probs) {
        acc_o += c as f64;
        acc_e += nf * p / psum;
        if acc_e >= 5.0 {
            pooled.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc_o;
                last.1 += acc_e;
            }
            None => pooled.push((acc_o, acc_e)),
        }
    }
    if pooled.len() < 2 {
        return Err(StatsError::TooFewPoints { need: 2, got: pooled.len() });
    }
    let stat = kahan_sum(pooled.iter().map(|&(o, e)| (o - e) * (o - e) / e));
    let dof = (pooled.len() - 1) as u64;
    let p_value = chi_square_sf(stat, dof as f64);
    Ok(GofResult {
        statistic: stat,
        statistic_kind: StatisticKind::ChiSquare,
        n,
        dof: Some(dof),
        p_value_or_bound: p_value,
    })
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    match ChiSquared::new(dof) {
        Ok(d) => (1.0 - d.cdf(stat)).clamp(0.0, 1.0),
        Err(_) => 1.0,
    }
}

/// Pearson chi-square test of homogeneity on an `R × C` contingency table
/// (each row one sample, each column one category). Adjacent columns are
/// pooled left-to-right until every cell's expected count reaches 5, the
/// same validity repair as in [`chi_square`]; degrees of freedom are
/// `(R − 1)·(C' − 1)` with `C'` the pooled column count.
pub fn chi_square_contingency(rows: &[&[u64]]) -> Result<GofResult, StatsError> {
    if rows.len() < 2 {
        return Err(StatsError::TooFewPoints { need: 2, got: rows.len() });
    }
    let c = rows[0].len();
    for r in rows {
        if r.len() != c {
            return Err(StatsError::RaggedTable { first: c, other: r.len() });
        }
    }
    if c == 0 {
        return Err(StatsError::EmptySample);
    }
    let row_tot: Vec<f64> = rows.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    if row_tot.iter().any(|&t| t == 0.0) {
        return Err(StatsError::EmptySample);
    }
    let n: f64 = kahan_sum(row_tot.iter().copied());
    let min_row = row_tot.iter().fold(f64::INFINITY, |a, &b| a.min(b));

    // Pool columns; the smallest row fixes the binding expected count.
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut acc = vec![0.0f64; rows.len()];
    let mut acc_tot = 0.0f64;
    for j in 0..c {
        for (i, r) in rows.iter().enumerate() {
            acc[i] += r[j] as f64;
            acc_tot += r[j] as f64;
        }
        if acc_tot * min_row / n >= 5.0 {
            groups.push(std::mem::replace(&mut acc, vec![0.0; rows.len()]));
            acc_tot = 0.0;
        }
    }
    if acc_tot > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                for (l, a) in last.iter_mut().zip(&acc) {
                    *l += a;
                }
            }
            None => groups.push(acc),
        }
    }
    if groups.len() < 2 {
        return Err(StatsError::TooFewPoints { need: 2, got: groups.len() });
    }

    let col_tot: Vec<f64> = groups.iter().map(|g| kahan_sum(g.iter().copied())).collect();
    let mut stat = KahanSum::default();
    for (g, &ct) in groups.iter().zip(&col_tot) {
        for (i, &o) in g.iter().enumerate() {
            let e = row_tot[i] * ct / n;
            stat.add((o - e) * (o - e) / e);
        }
    }
    let stat = stat.value();
    let dof = (rows.len() as u64 - 1) * (groups.len() as u64 - 1);
    Ok(GofResult {
        statistic: stat,
        statistic_kind: StatisticKind::ChiSquare,
        n: n as u64,
        dof: Some(dof),
        p_value_or_bound: chi_square_sf(stat, dof as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        // 1 + 2^-60 added 2^20 times: naive summation loses every tiny term.
        let xs: Vec<f64> = std::iter::once(1.0)
            .chain(std::iter::repeat(f64::powi(2.0, -60)).take(1 << 20))
            .collect();
        let exact = 1.0 + f64::powi(2.0, -40);
        assert_eq!(kahan_sum(xs.iter().copied()), exact);
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert_eq!(median(&[]).unwrap_err(), StatsError::EmptySample);
    }

    #[test]
    fn tail_estimate_accounts_every_sample() {
        let t = TailEstimate::from_counts(256.0, 30, 960, 10);
        assert_eq!(t.n_samples, 1000);
        assert_eq!(t.p_hat, 0.03);
        assert!(t.ci95.0 < 0.03 && 0.03 < t.ci95.1);
        assert!((t.stderr - (0.03f64 * 0.97 / 1000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tail_estimate_all_censored_still_valid() {
        let t = TailEstimate::from_counts(64.0, 0, 0, 500);
        assert_eq!(t.p_hat, 0.0);
        assert!(t.ci95.0 == 0.0 && t.ci95.1 > 0.0 && t.ci95.1 < 0.02);
    }

    #[test]
    fn wilson_ci_covers_at_nominal_rate() {
        // 10³ synthetic Bernoulli(0.3) experiments of 200 draws each; the
        // 95% interval must cover the truth in at least 93% of them.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = 0.3;
        let mut covered = 0;
        for _ in 0..1000 {
            let k = (0..200).filter(|_| rng.gen::<f64>() < p).count() as f64;
            let (lo, hi) = wilson_ci(k, 200.0);
            if lo <= p && p <= hi {
                covered += 1;
            }
        }
        assert!(covered >= 930, "coverage {covered}/1000");
    }

    #[test]
    fn exact_power_law_recovered_to_machine_precision() {
        // y = 2.5 · x^{2/3} exactly → slope 2/3, r² = 1, stderr ~ 0.
        let pairs: Vec<(f64, f64)> =
            (10..60).map(|i| (i as f64, 2.5 * (i as f64).powf(2.0 / 3.0))).collect();
        let fit = log_log_fit(&pairs, 0.0).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 1e-12, "slope {}", fit.slope);
        assert!((fit.intercept - 2.5f64.ln()).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert_eq!(fit.n_points, 50);
    }

    #[test]
    fn synthetic_sqrt_law_slope_two_on_stated_axes() {
        // D_max = L^{1/2} exactly, regressed as (log D_max, log L) → slope 2.
        let pairs: Vec<(f64, f64)> = (32..200).map(|l| ((l as f64).sqrt(), l as f64)).collect();
        let fit = log_log_fit(&pairs, 32.0).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert_eq!(fit.min_l, 32.0);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let pairs: Vec<(f64, f64)> = (0..9).map(|i| (i as f64 + 1.0, 1.0)).collect();
        assert!(matches!(
            linear_fit(&pairs, 0.0),
            Err(StatsError::TooFewPoints { need: 10, got: 9 })
        ));
    }

    #[test]
    fn ks_matches_quadratic_oracle() {
        // Brute force: evaluate |F̂ − F| from both sides at every sample.
        fn brute<F: Fn(f64) -> f64>(samples: &[f64], cdf: &F) -> f64 {
            let n = samples.len() as f64;
            let mut d: f64 = 0.0;
            for &x in samples {
                let below = samples.iter().filter(|&&y| y < x).count() as f64 / n;
                let at_or_below = samples.iter().filter(|&&y| y <= x).count() as f64 / n;
                let f = cdf(x);
                d = d.max((f - below).abs()).max((at_or_below - f).abs());
            }
            d
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..100).map(|_| rng.gen::<f64>().powf(0.8)).collect();
        let cdf = |x: f64| x.clamp(0.0, 1.0);
        let fast = ks_distance(&samples, cdf).unwrap().statistic;
        assert_eq!(fast, brute(&samples, &cdf));
    }

    #[test]
    fn ks_null_scale_and_shift_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let null = ks_distance(&samples, |x| x.clamp(0.0, 1.0)).unwrap();
        // Null KS scale is ~ 1/√n ≈ 0.016; allow 3×.
        assert!(null.statistic < 0.05, "null KS {}", null.statistic);
        assert!(null.statistic >= 0.0 && null.statistic <= 1.0);
        let shifted = ks_distance(&samples, |x| (x - 0.25).clamp(0.0, 1.0)).unwrap();
        assert!(shifted.statistic > 0.2, "shift KS {}", shifted.statistic);
        assert!(shifted.p_value_or_bound < 1e-10);
    }

    #[test]
    fn chi_square_null_and_alternative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let probs = [0.1, 0.2, 0.3, 0.4];
        let mut counts = [0u64; 4];
        for _ in 0..10_000 {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    counts[i] += 1;
                    break;
                }
            }
        }
        let null = chi_square(&counts, &probs).unwrap();
        assert_eq!(null.dof, Some(3));
        assert!(null.p_value_or_bound > 1e-3, "null p {}", null.p_value_or_bound);
        // Grossly wrong cell probabilities must be rejected.
        let alt = chi_square(&counts, &[0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!(alt.statistic > null.statistic * 10.0);
        assert!(alt.p_value_or_bound < 1e-10);
    }

    #[test]
    fn chi_square_pools_thin_cells() {
        // 12 cells with tiny tail probabilities: expected counts below 5
        // must be pooled, shrinking the recorded dof.
        let probs = [0.5, 0.3, 0.1, 0.05, 0.02, 0.01, 0.005, 0.005, 0.004, 0.003, 0.002, 0.001];
        let counts = [50u64, 28, 12, 5, 2, 1, 1, 1, 0, 0, 0, 0];
        let g = chi_square(&counts, &probs).unwrap();
        let dof = g.dof.unwrap();
        assert!(dof < 11, "pooling must reduce dof, got {dof}");
        assert!(g.statistic.is_finite());
    }

    #[test]
    fn chi_square_rejects_malformed_input() {
        assert!(matches!(
            chi_square(&[1, 2], &[0.5]),
            Err(StatsError::LengthMismatch { .. })
        ));
        assert!(matches!(
            chi_square(&[1, 2], &[0.5, -0.5]),
            Err(StatsError::BadProbabilities(_))
        ));
    }

    #[test]
    fn contingency_matches_classic_two_by_two() {
        // (ad − bc)²·N / (r₁r₂c₁c₂) for [[10,20],[20,10]] is 6.666…
        let g = chi_square_contingency(&[&[10, 20], &[20, 10]]).unwrap();
        assert_eq!(g.dof, Some(1));
        assert!((g.statistic - 20.0 / 3.0).abs() < 1e-12);
        assert!((g.p_value_or_bound - 0.00982).abs() < 1e-4);
    }

    #[test]
    fn contingency_null_and_alternative() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let probs = [0.1, 0.2, 0.3, 0.4];
        let mut draw = |shift: f64, n: usize| -> Vec<u64> {
            let mut counts = vec![0u64; 4];
            for _ in 0..n {
                let u: f64 = rng.gen::<f64>().powf(1.0 + shift);
                let mut acc = 0.0;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        counts[i] += 1;
                        break;
                    }
                }
            }
            counts
        };
        let a = draw(0.0, 20_000);
        let b = draw(0.0, 20_000);
        let null = chi_square_contingency(&[&a, &b]).unwrap();
        assert_eq!(null.dof, Some(3));
        assert!(null.p_value_or_bound > 1e-3, "null p {}", null.p_value_or_bound);

        let c = draw(0.3, 20_000);
        let alt = chi_square_contingency(&[&a, &c]).unwrap();
        assert!(alt.p_value_or_bound < 1e-6, "alt p {}", alt.p_value_or_bound);
    }

    #[test]
    fn contingency_pools_thin_columns() {
        let a = [4000u64, 900, 80, 15, 3, 1, 1, 0, 0, 0];
        let b = [3900u64, 980, 90, 20, 5, 3, 1, 1, 0, 0];
        let g = chi_square_contingency(&[&a, &b]).unwrap();
        let dof = g.dof.unwrap();
        assert!(dof < 9, "pooling must reduce dof, got {dof}");
        assert!(g.statistic.is_finite());
        assert!(g.p_value_or_bound > 1e-3);
    }

    #[test]
    fn contingency_rejects_malformed_tables() {
        assert!(matches!(
            chi_square_contingency(&[&[1, 2, 3]]),
            Err(StatsError::TooFewPoints { .. })
        ));
        assert!(matches!(
            chi_square_contingency(&[&[1, 2, 3], &[1, 2]]),
            Err(StatsError::RaggedTable { first: 3, other: 2 })
        ));
        assert!(matches!(
            chi_square_contingency(&[&[1, 2], &[0, 0]]),
            Err(StatsError::EmptySample)
        ));
    }
}
