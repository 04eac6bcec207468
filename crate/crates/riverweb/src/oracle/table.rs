//! Monte Carlo tail tables and the limit-constant quadratures.
//!
//! The excursion-area law has no usable closed form, so its tail enters the
//! cluster-statistic limit constants through a table: a large sample of the
//! scaled functional is reduced to a uniform quantile grid (plus a kernel
//! density estimate on a fixed abscissa grid), cached to disk together with
//! the seed and sample count that produced it, and interrogated through an
//! interpolating survival function. Adaptive Simpson quadrature then turns
//! tail functions — tabulated or exact series — into the constants that the
//! lattice scaling experiments must reproduce:
//!
//! * `hack_limit_integral(u, Area| Max, p)` evaluates
//!   `(2√π γ₀)⁻¹ ∫₀^∞ t^{−3/2} F̄(u·t^{−3/2} or u·t^{−1/2}) dt`
//!   after the substitution `v = t^{−1/2}`, which maps it to the finite
//!   integral `(√π γ₀)⁻¹ ∫₀^∞ F̄(uv³ or uv) dv`;
//! * `shifted_area_integral(τ, λ)` evaluates the tail mixture
//!   `(√τ/2) ∫_τ^∞ t^{−3/2} F̄(λ t^{−3/2}) dt = √τ ∫₀^{1/√τ} F̄(λv³) dv`,
//!   whose agreement with the direct sampler is a structural identity of
//!   the shifted/killed process.
//!
//! Both quadratures have exact-moment cross-checks: the area kind collapses
//! to `E[I^{1/3}]/(√π γ₀ u^{1/3})` and the max kind to `1/(√2 γ₀ u)`, so
//! the whole pipeline (sampling → quantile grid → interpolated tail →
//! quadrature) is verified against plain sample moments and against the
//! theta series.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;

use super::pwl::shifted_area_exceeds;
use super::refs::ref_excursion_max_cdf;
use super::{FunctionalKind, OracleError};
use crate::scaling::gamma0;
use crate::stats::KahanSum;

/// Number of quantile cells; the grid stores `TABLE_QUANTILES + 1` knots.
pub const TABLE_QUANTILES: usize = 4096;

/// Number of density cells; the KDE is evaluated on `DENSITY_CELLS + 1`
/// equally spaced abscissas.
pub const DENSITY_CELLS: usize = 512;

/// Minimum sample count accepted by [`FunctionalTable::build`].
pub const MIN_TABLE_SAMPLES: u64 = 100_000;

/// An empirical distribution reduced to a quantile grid plus a kernel
/// density estimate, with provenance (seed, sample count) carried along so
/// cached tables are reproducible artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalTable {
    pub kind: FunctionalKind,
    pub seed: u64,
    pub n_samples: u64,
    /// Sample mean of the functional.
    pub mean: f64,
    /// Sample mean of the cube root of the functional (the moment the
    /// area-kind limit integral collapses to).
    pub mean_cbrt: f64,
    /// `quantiles[i] = Q(i / TABLE_QUANTILES)`, `i = 0..=TABLE_QUANTILES`.
    pub quantiles: Vec<f64>,
    /// `(x, f̂(x))` pairs of the Gaussian KDE with Silverman bandwidth.
    pub density: Vec<(f64, f64)>,
}

impl FunctionalTable {
    /// Reduce `samples` of the given functional to a table. Requires at
    /// least [`MIN_TABLE_SAMPLES`] values; `seed` records how the samples
    /// were generated.
    pub fn build(kind: FunctionalKind, samples: &[f64], seed: u64) -> Result<Self, OracleError> {
        let n = samples.len() as u64;
        if n < MIN_TABLE_SAMPLES {
            return Err(OracleError::InsufficientSamples { need: MIN_TABLE_SAMPLES, got: n });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);

        let last = (sorted.len() - 1) as u64;
        let quantiles: Vec<f64> = (0..=TABLE_QUANTILES as u64)
            .map(|i| {
                let idx = (i * last + TABLE_QUANTILES as u64 / 2) / TABLE_QUANTILES as u64;
                sorted[idx as usize]
            })
            .collect();

        let mut mean = KahanSum::default();
        let mut mean_cbrt = KahanSum::default();
        for &x in samples {
            mean.add(x);
            mean_cbrt.add(x.cbrt());
        }
        let nf = samples.len() as f64;

        let density = silverman_kde(&sorted, *quantiles.last().unwrap());

        Ok(FunctionalTable {
            kind,
            seed,
            n_samples: n,
            mean: mean.value() / nf,
            mean_cbrt: mean_cbrt.value() / nf,
            quantiles,
            density,
        })
    }

    /// Interpolated survival function `F̄(x) = 1 − F(x)`: 1 left of the
    /// smallest sample, 0 from the largest on, linear between quantile
    /// knots. Monotone by construction of the sorted grid.
    pub fn sf(&self, x: f64) -> f64 {
        let q = &self.quantiles;
        if x < q[0] {
            return 1.0;
        }
        if x >= *q.last().unwrap() {
            return 0.0;
        }
        // Last knot index with q[i] <= x; the guards above ensure 0 <= i < last.
        let i = q.partition_point(|&v| v <= x) - 1;
        let frac = if q[i + 1] > q[i] { (x - q[i]) / (q[i + 1] - q[i]) } else { 0.0 };
        1.0 - (i as f64 + frac) / TABLE_QUANTILES as f64
    }

    /// KDE density, linearly interpolated on the abscissa grid; zero
    /// outside it.
    pub fn density_at(&self, x: f64) -> f64 {
        let d = &self.density;
        if x < d[0].0 || x > d[d.len() - 1].0 {
            return 0.0;
        }
        let step = d[1].0 - d[0].0;
        let pos = (x - d[0].0) / step;
        let k = (pos.floor() as usize).min(d.len() - 2);
        let w = pos - k as f64;
        d[k].1 * (1.0 - w) + d[k + 1].1 * w
    }

    /// Write the table as a small self-describing CSV. Floats are printed
    /// with the shortest round-tripping representation, so
    /// [`FunctionalTable::load`] reproduces the table bit for bit.
    pub fn save(&self, path: &Path) -> Result<(), OracleError> {
        let io = |e: std::io::Error| OracleError::Io(e.to_string());
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        let mut go = || -> std::io::Result<()> {
            writeln!(w, "riverweb_functional_table,v1")?;
            writeln!(w, "kind,{}", self.kind.tag())?;
            writeln!(w, "seed,{}", self.seed)?;
            writeln!(w, "n_samples,{}", self.n_samples)?;
            writeln!(w, "mean,{}", self.mean)?;
            writeln!(w, "mean_cbrt,{}", self.mean_cbrt)?;
            writeln!(w, "quantiles,{}", self.quantiles.len())?;
            for q in &self.quantiles {
                writeln!(w, "{q}")?;
            }
            writeln!(w, "density,{}", self.density.len())?;
            for (x, f) in &self.density {
                writeln!(w, "{x},{f}")?;
            }
            w.flush()
        };
        go().map_err(io)
    }

    /// Parse a table written by [`FunctionalTable::save`].
    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let io = |e: std::io::Error| OracleError::Io(e.to_string());
        let bad = |msg: &str| OracleError::TableFormat(msg.to_string());
        let file = std::fs::File::open(path).map_err(io)?;
        let mut lines = std::io::BufReader::new(file).lines();
        let mut next = || -> Result<String, OracleError> {
            lines
                .next()
                .ok_or_else(|| bad("truncated file"))?
                .map_err(|e| OracleError::Io(e.to_string()))
        };
        let field = |line: String, key: &str| -> Result<String, OracleError> {
            let (k, v) = line
                .split_once(',')
                .ok_or_else(|| bad(&format!("expected `{key},...`")))?;
            if k != key {
                return Err(bad(&format!("expected key `{key}`, found `{k}`")));
            }
            Ok(v.to_string())
        };

        if next()? != "riverweb_functional_table,v1" {
            return Err(bad("missing table header"));
        }
        let kind_tag = field(next()?, "kind")?;
        let kind = FunctionalKind::from_tag(&kind_tag)
            .ok_or_else(|| bad(&format!("unknown kind `{kind_tag}`")))?;
        let seed: u64 = field(next()?, "seed")?.parse().map_err(|_| bad("bad seed"))?;
        let n_samples: u64 =
            field(next()?, "n_samples")?.parse().map_err(|_| bad("bad n_samples"))?;
        let mean: f64 = field(next()?, "mean")?.parse().map_err(|_| bad("bad mean"))?;
        let mean_cbrt: f64 =
            field(next()?, "mean_cbrt")?.parse().map_err(|_| bad("bad mean_cbrt"))?;

        let n_q: usize = field(next()?, "quantiles")?.parse().map_err(|_| bad("bad count"))?;
        let mut quantiles = Vec::with_capacity(n_q);
        for _ in 0..n_q {
            quantiles.push(next()?.parse().map_err(|_| bad("bad quantile"))?);
        }
        let n_d: usize = field(next()?, "density")?.parse().map_err(|_| bad("bad count"))?;
        let mut density = Vec::with_capacity(n_d);
        for _ in 0..n_d {
            let line = next()?;
            let (x, f) = line.split_once(',').ok_or_else(|| bad("bad density row"))?;
            density.push((
                x.parse().map_err(|_| bad("bad density x"))?,
                f.parse().map_err(|_| bad("bad density value"))?,
            ));
        }
        Ok(FunctionalTable { kind, seed, n_samples, mean, mean_cbrt, quantiles, density })
    }
}

/// Gaussian KDE with the Silverman rule-of-thumb bandwidth
/// `h = 0.9·min(σ̂, IQR/1.34)·n^{−1/5}`, evaluated on a uniform grid over
/// `[0, hi]`. Samples are pre-binned (the bin width is far below any
/// plausible bandwidth), which keeps the cost independent of `n`.
fn silverman_kde(sorted: &[f64], hi: f64) -> Vec<(f64, f64)> {
    let n = sorted.len();
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    let iqr = sorted[(3 * (n - 1)) / 4] - sorted[(n - 1) / 4];
    let spread = var.sqrt().min(iqr / 1.34).max(1e-12);
    let h = 0.9 * spread * nf.powf(-0.2);

    let lo = 0.0f64.min(sorted[0]);
    let hi = hi.max(lo + 1e-9);
    let bins = 8192usize;
    let bw = (hi - lo) / bins as f64;
    let mut weights = vec![0u64; bins + 1];
    for &x in sorted {
        let b = (((x - lo) / bw).floor() as usize).min(bins);
        weights[b] += 1;
    }

    (0..=DENSITY_CELLS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / DENSITY_CELLS as f64;
            let mut acc = 0.0f64;
            for (b, &cnt) in weights.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                let c = lo + (b as f64 + 0.5) * bw;
                let z = (x - c) / h;
                if z.abs() < 8.0 {
                    acc += cnt as f64 * (-z * z / 2.0).exp();
                }
            }
            let f = acc / (nf * h * (2.0 * std::f64::consts::PI).sqrt());
            (x, f)
        })
        .collect()
}

/// Build the excursion-area tail table from pre-sampled scaled areas.
pub fn tabulate_excursion_area_dist(
    samples: &[f64],
    seed: u64,
) -> Result<FunctionalTable, OracleError> {
    FunctionalTable::build(FunctionalKind::ExcursionArea, samples, seed)
}

/// Which cluster statistic's limit constant is being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    /// Tail of total cluster size: argument `u·t^{−3/2}` against the
    /// excursion-area law.
    Area,
    /// Tail of maximum generation width: argument `u·t^{−1/2}` against the
    /// excursion-maximum law.
    Max,
}

/// Adaptive Simpson quadrature with a relative tolerance (converted to an
/// absolute budget from a coarse first pass).
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = (a + m) / 2.0;
        let rm = (m + b) / 2.0;
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }

    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / 2.0;
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs().max(1e-12);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

fn check_table<'t>(
    table: Option<&'t FunctionalTable>,
    kind: FunctionalKind,
) -> Result<&'t FunctionalTable, OracleError> {
    match table {
        Some(t) if t.kind == kind => Ok(t),
        _ => Err(OracleError::TableMissing(kind.tag().to_string())),
    }
}

/// The limit constant `(2√π γ₀(p))⁻¹ ∫₀^∞ t^{−3/2} F̄(u·t^{−e}) dt` with
/// `e = 3/2` (Area) or `1/2` (Max), computed to relative tolerance `1e−3`
/// via the substitution `v = t^{−1/2}`.
///
/// The Area kind requires an excursion-area table; the Max kind uses the
/// exact theta series when `table` is `None`, or an excursion-max table
/// when one is supplied (which is how table and series are cross-checked).
pub fn hack_limit_integral(
    u: f64,
    kind: IntegralKind,
    p: f64,
    table: Option<&FunctionalTable>,
) -> Result<f64, OracleError> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(OracleError::DomainError(u));
    }
    let g = gamma0(p).map_err(|_| OracleError::DomainError(p))?;
    let c = 1.0 / (std::f64::consts::PI.sqrt() * g);

    let integral = match kind {
        IntegralKind::Area => {
            let t = check_table(table, FunctionalKind::ExcursionArea)?;
            let v_max = (t.quantiles.last().unwrap() / u).cbrt();
            adaptive_simpson(&|v: f64| t.sf(u * v * v * v), 0.0, v_max, 1e-4)
        }
        IntegralKind::Max => match table {
            Some(t) => {
                let t = check_table(Some(t), FunctionalKind::ExcursionMax)?;
                let v_max = t.quantiles.last().unwrap() / u;
                adaptive_simpson(&|v: f64| t.sf(u * v), 0.0, v_max, 1e-4)
            }
            None => {
                // F̄_M drops below 1e−12 well before its argument reaches 6.
                let v_max = 6.0 / u;
                let sf = |v: f64| {
                    if u * v <= 0.0 {
                        1.0
                    } else {
                        1.0 - ref_excursion_max_cdf(u * v).expect("positive argument")
                    }
                };
                adaptive_simpson(&sf, 0.0, v_max, 1e-4)
            }
        },
    };
    Ok(c * integral)
}

/// The tail-mixture side of the shifted-area identity,
/// `(√τ/2) ∫_τ^∞ t^{−3/2} F̄_I(λ t^{−3/2}) dt = √τ ∫₀^{1/√τ} F̄_I(λv³) dv`.
pub fn shifted_area_integral(
    tau: f64,
    lambda: f64,
    table: &FunctionalTable,
) -> Result<f64, OracleError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(OracleError::DomainError(tau));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(OracleError::DomainError(lambda));
    }
    let t = check_table(Some(table), FunctionalKind::ExcursionArea)?;
    let v_hi = 1.0 / tau.sqrt();
    Ok(tau.sqrt() * adaptive_simpson(&|v: f64| t.sf(lambda * v * v * v), 0.0, v_hi, 1e-4))
}

/// Both sides of the shifted-area identity: `lhs` is the direct Monte Carlo
/// probability `P(∫₀^∞ H(T^{τ+}W) > λ)` from `n_samples` walk samples at
/// resolution `m`, `rhs` is [`shifted_area_integral`]. Attempts whose
/// τ-rise search exceeds its domain cap (≈ 0.7%) are resampled.
pub fn shifted_area_law_check<R: Rng>(
    tau: f64,
    lambda: f64,
    table: &FunctionalTable,
    m: usize,
    n_samples: u64,
    rng: &mut R,
) -> Result<(f64, f64), OracleError> {
    let rhs = shifted_area_integral(tau, lambda, table)?;
    let mut hits = 0u64;
    let mut done = 0u64;
    let mut consecutive_failures = 0u32;
    while done < n_samples {
        match shifted_area_exceeds(tau, m, lambda, rng) {
            Ok(b) => {
                hits += b as u64;
                done += 1;
                consecutive_failures = 0;
            }
            Err(OracleError::WalkTooShort { domain }) => {
                consecutive_failures += 1;
                if consecutive_failures > 1000 {
                    return Err(OracleError::WalkTooShort { domain });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok((hits as f64 / n_samples as f64, rhs))
}
