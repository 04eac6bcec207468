//! Lazily evaluated random environment on the integer lattice.
//!
//! Each site `(x, t)` carries an *openness* bit (Bernoulli with parameter
//! `p`) and a fair `±1` *tie-break* bit, mutually independent and
//! independent across sites. The environment is never materialized: a
//! counter-based keyed hash turns `(seed, x, t)` into 64 random bits on
//! demand, so clusters and dual paths can expand over arbitrarily large,
//! reproducible windows.
//!
//! The only non-trivial query is [`nearest_open_offset`]: the signed
//! horizontal offset of the open site nearest to a given position on a
//! given row, with equidistant ties broken by the tie bit of the site one
//! row below (the site that is asking where to drain).

use std::collections::HashMap;

/// Default search cap for open-site scans: a row with no open site within
/// `±2^16` of the query has probability below `(1−p)^{2^17}` — negligible
/// for any `p ≥ 0.05` — so hitting the cap signals a broken field rather
/// than bad luck, and is reported as a hard error instead of being
/// silently truncated.
pub const DEFAULT_SEARCH_CAP: i64 = 1 << 16;

/// A lattice site. The drainage map increases `t` by one per step; ancestor
/// generations therefore live on rows *below* their apex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Site {
    /// Horizontal coordinate.
    pub x: i64,
    /// Generation (time) coordinate.
    pub t: i64,
}

impl Site {
    /// Convenience constructor.
    pub fn new(x: i64, t: i64) -> Self {
        Site { x, t }
    }
}

/// The random marks attached to one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    /// Openness bit: `true` with probability `p`.
    pub open: bool,
    /// Tie-break bit: `+1` or `−1`, each with probability `1/2`.
    pub tie: i8,
}

/// Errors from the environment layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    /// No open site within `±cap` of the query — astronomically unlikely
    /// under a healthy field.
    #[error("no open site within ±{cap} of x = {x} on row t = {t}")]
    SearchCapExceeded { x: i64, t: i64, cap: i64 },
    /// Openness probability outside the open interval (0, 1).
    #[error("p must lie strictly inside (0, 1), got {0}")]
    DomainError(f64),
}

/// Anything that can answer "what are the marks of site `s`?".
///
/// The production implementation is [`FieldConfig`] (a pure keyed hash);
/// [`TableField`] provides hand-built deterministic fixtures for tests and
/// examples.
pub trait Field {
    /// Openness probability of the field.
    fn p(&self) -> f64;
    /// The marks of site `s`. Must be a pure function of `s`.
    fn cell(&self, s: Site) -> Cell;
    /// Cap for open-site scans (see [`DEFAULT_SEARCH_CAP`]).
    fn search_cap(&self) -> i64 {
        DEFAULT_SEARCH_CAP
    }
    /// Shorthand for `self.cell(s).open`.
    fn is_open(&self, s: Site) -> bool {
        self.cell(s).open
    }
}

// ─── the hash-backed production field ───────────────────────────────────────

/// Configuration of the i.i.d. random environment: openness probability and
/// a 64-bit seed. The marks of a site are a pure function of
/// `(seed, x, t)`, so two runs with equal configuration see byte-identical
/// environments regardless of evaluation order or thread count.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FieldConfig {
    /// Openness probability, strictly inside (0, 1).
    pub p: f64,
    /// Seed of the keyed site hash.
    pub seed: u64,
}

impl FieldConfig {
    /// Validates `0 < p < 1` and builds the configuration.
    pub fn new(p: f64, seed: u64) -> Result<Self, LatticeError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(LatticeError::DomainError(p));
        }
        Ok(FieldConfig { p, seed })
    }
}

impl Field for FieldConfig {
    fn p(&self) -> f64 {
        self.p
    }

    fn cell(&self, s: Site) -> Cell {
        let bits = site_bits(self.seed, s.x, s.t);
        // Top 53 bits give a uniform double in [0, 1); bit 0 is untouched by
        // that draw and supplies the independent tie-break.
        let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        Cell {
            open: u < self.p,
            tie: if bits & 1 == 1 { 1 } else { -1 },
        }
    }
}

/// 64-bit finalizer with full avalanche (the splitmix64 output stage).
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed hash of a site: the seed and both coordinates are absorbed through
/// chained finalizer rounds, so nearby sites decorrelate completely.
#[inline]
fn site_bits(seed: u64, x: i64, t: i64) -> u64 {
    let mut h = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    h = mix64(h ^ (x as u64));
    mix64(h ^ (t as u64) ^ 0xd1b5_4a32_d192_ed03)
}

// ─── the table-backed fixture field ─────────────────────────────────────────

/// A finite, hand-built field: open sites are listed explicitly and every
/// other site is closed; tie bits default to `+1` unless overridden. Meant
/// for deterministic fixtures in tests, docs and examples.
#[derive(Debug, Clone)]
pub struct TableField {
    p: f64,
    open: std::collections::HashSet<(i64, i64)>,
    ties: HashMap<(i64, i64), i8>,
    search_cap: i64,
}

impl TableField {
    /// An empty (all-closed) field with nominal openness probability `p`.
    /// `p` only matters to consumers that scale by it; the table itself is
    /// deterministic.
    pub fn new(p: f64) -> Self {
        TableField {
            p,
            open: Default::default(),
            ties: Default::default(),
            // Scanning an all-closed fixture row should fail fast.
            search_cap: 1 << 12,
        }
    }

    /// Marks `(x, t)` open.
    pub fn open(mut self, x: i64, t: i64) -> Self {
        self.open.insert((x, t));
        self
    }

    /// Sets the tie bit of `(x, t)` (must be `±1`).
    pub fn tie(mut self, x: i64, t: i64, tie: i8) -> Self {
        assert!(tie == 1 || tie == -1, "tie bits are ±1");
        self.ties.insert((x, t), tie);
        self
    }

    /// Builds rows from strings: `'X'` marks an open site, anything else is
    /// closed. `rows[0]` is the row at `t = t_top` and subsequent strings
    /// descend one row each; column 0 sits at `x = x_left`.
    pub fn from_rows(p: f64, x_left: i64, t_top: i64, rows: &[&str]) -> Self {
        let mut f = TableField::new(p);
        for (dy, row) in rows.iter().enumerate() {
            for (dx, ch) in row.chars().enumerate() {
                if ch == 'X' {
                    f.open.insert((x_left + dx as i64, t_top - dy as i64));
                }
            }
        }
        f
    }
}

impl Field for TableField {
    fn p(&self) -> f64 {
        self.p
    }

    fn cell(&self, s: Site) -> Cell {
        Cell {
            open: self.open.contains(&(s.x, s.t)),
            tie: *self.ties.get(&(s.x, s.t)).unwrap_or(&1),
        }
    }

    fn search_cap(&self) -> i64 {
        self.search_cap
    }
}

// ─── open-site queries ──────────────────────────────────────────────────────

/// Signed offset of the open site on row `s.t` nearest to `s.x`, with the
/// equidistant tie broken by the tie bit of `(s.x, s.t − 1)` — the site one
/// row below, which is the site doing the asking when the drainage map
/// evaluates `h(s.x, s.t − 1)`.
///
/// Returns `0` when `s` itself is open. Errors with
/// [`LatticeError::SearchCapExceeded`] if no open site exists within the
/// field's search cap.
pub fn nearest_open_offset<F: Field>(f: &F, s: Site) -> Result<i64, LatticeError> {
    if f.is_open(s) {
        return Ok(0);
    }
    let cap = f.search_cap();
    for k in 1..=cap {
        let right = f.is_open(Site::new(s.x + k, s.t));
        let left = f.is_open(Site::new(s.x - k, s.t));
        match (left, right) {
            (false, false) => continue,
            (false, true) => return Ok(k),
            (true, false) => return Ok(-k),
            (true, true) => {
                let tie = f.cell(Site::new(s.x, s.t - 1)).tie;
                return Ok(if tie > 0 { k } else { -k });
            }
        }
    }
    Err(LatticeError::SearchCapExceeded { x: s.x, t: s.t, cap })
}

/// First open `x' ≥ x` on row `t`.
pub(crate) fn next_open_at_or_after<F: Field>(f: &F, t: i64, x: i64) -> Result<i64, LatticeError> {
    let cap = f.search_cap();
    for k in 0..=cap {
        if f.is_open(Site::new(x + k, t)) {
            return Ok(x + k);
        }
    }
    Err(LatticeError::SearchCapExceeded { x, t, cap })
}

/// First open `x' ≤ x` on row `t`.
pub(crate) fn prev_open_at_or_before<F: Field>(f: &F, t: i64, x: i64) -> Result<i64, LatticeError> {
    let cap = f.search_cap();
    for k in 0..=cap {
        if f.is_open(Site::new(x - k, t)) {
            return Ok(x - k);
        }
    }
    Err(LatticeError::SearchCapExceeded { x, t, cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: f64, seed: u64) -> FieldConfig {
        FieldConfig::new(p, seed).unwrap()
    }

    #[test]
    fn config_rejects_degenerate_p() {
        assert!(FieldConfig::new(0.0, 1).is_err());
        assert!(FieldConfig::new(1.0, 1).is_err());
        assert!(FieldConfig::new(-0.2, 1).is_err());
        assert!(FieldConfig::new(f64::NAN, 1).is_err());
        assert!(FieldConfig::new(0.5, 1).is_ok());
    }

    #[test]
    fn sample_cell_is_pure() {
        let f = cfg(0.37, 0xfeed);
        for x in -50..50 {
            for t in -50..50 {
                let s = Site::new(x * 977, t * 3001);
                assert_eq!(f.cell(s), f.cell(s));
            }
        }
    }

    #[test]
    fn sample_cell_marginals_match_p() {
        // 10^5 distinct sites; binomial 3σ ≈ 0.0047 for the open bit and
        // 0.0047 for the tie bit, so a ±0.01 box is a > 6σ pass band.
        let f = cfg(0.5, 2024);
        let n = 100_000;
        let mut opens = 0u64;
        let mut plus = 0u64;
        for i in 0..n {
            let c = f.cell(Site::new(i as i64, -(i as i64) * 7 + 13));
            opens += c.open as u64;
            plus += (c.tie == 1) as u64;
        }
        let open_freq = opens as f64 / n as f64;
        let plus_freq = plus as f64 / n as f64;
        assert!((open_freq - 0.5).abs() < 0.01, "open freq {open_freq}");
        assert!((plus_freq - 0.5).abs() < 0.01, "tie freq {plus_freq}");
    }

    #[test]
    fn sample_cell_marginal_at_skewed_p() {
        let f = cfg(0.8, 77);
        let n = 100_000;
        let opens: u64 = (0..n)
            .filter(|&i| f.is_open(Site::new(i as i64 * 31, i as i64)))
            .count() as u64;
        let freq = opens as f64 / n as f64;
        assert!((freq - 0.8).abs() < 0.01, "open freq {freq}");
    }

    #[test]
    fn open_and_tie_bits_are_uncorrelated() {
        let f = cfg(0.5, 5150);
        let n = 100_000;
        let mut open_plus = 0u64;
        let mut opens = 0u64;
        for i in 0..n {
            let c = f.cell(Site::new(i, 2 * i + 1));
            if c.open {
                opens += 1;
                open_plus += (c.tie == 1) as u64;
            }
        }
        let cond = open_plus as f64 / opens as f64;
        assert!((cond - 0.5).abs() < 0.02, "P(tie=+1 | open) = {cond}");
    }

    #[test]
    fn nearest_offset_zero_when_site_open() {
        let f = TableField::new(0.5).open(4, 9);
        assert_eq!(nearest_open_offset(&f, Site::new(4, 9)), Ok(0));
    }

    #[test]
    fn nearest_offset_tie_follows_tie_bit_of_querying_site() {
        // Offsets ±1 both open on row 3; the querying site is (0, 2).
        let base = || TableField::new(0.5).open(-1, 3).open(1, 3);
        let f = base().tie(0, 2, 1);
        assert_eq!(nearest_open_offset(&f, Site::new(0, 3)), Ok(1));
        let f = base().tie(0, 2, -1);
        assert_eq!(nearest_open_offset(&f, Site::new(0, 3)), Ok(-1));
    }

    #[test]
    fn nearest_offset_unique_minimizer() {
        // Only offset −3 open among |k| ≤ 3.
        let f = TableField::new(0.5).open(-3, 0).open(5, 0);
        assert_eq!(nearest_open_offset(&f, Site::new(0, 0)), Ok(-3));
    }

    #[test]
    fn nearest_offset_cap_errors_on_empty_row() {
        let f = TableField::new(0.5); // all closed
        match nearest_open_offset(&f, Site::new(0, 0)) {
            Err(LatticeError::SearchCapExceeded { .. }) => {}
            other => panic!("expected SearchCapExceeded, got {other:?}"),
        }
    }

    /// Exact law of the signed offset κ for an i.i.d. row:
    /// P(κ = 0) = p and, for j ≥ 1,
    /// P(κ = ±j) = (1−p)^{2j−1} (p(1−p) + p²/2),
    /// because the 2j−1 central sites must be closed, and at distance j either
    /// exactly one side is open (probability p(1−p) each way) or both are and
    /// the fair tie sends it to the chosen side (probability p²/2).
    fn offset_pmf(p: f64, j: i64) -> f64 {
        let q = 1.0 - p;
        if j == 0 {
            p
        } else {
            q.powi((2 * j.abs() - 1) as i32) * (p * q + p * p / 2.0)
        }
    }

    #[test]
    fn offset_distribution_matches_exact_law() {
        // Chi-square of the empirical offset distribution against the exact
        // pmf, pooling |j| > 10 into tail bins, at three values of p.
        for (p, seed) in [(0.3, 11u64), (0.5, 22), (0.8, 33)] {
            let f = cfg(p, seed);
            let trials = 200_000i64;
            let jmax = 10i64;
            // bins: κ = −jmax..=jmax plus two overflow bins at the ends
            let mut counts = vec![0u64; (2 * jmax + 3) as usize];
            for i in 0..trials {
                // Distinct query sites: rows far apart so draws are i.i.d.
                let k = nearest_open_offset(&f, Site::new(0, 3 * i)).unwrap();
                let idx = (k.clamp(-jmax - 1, jmax + 1) + jmax + 1) as usize;
                counts[idx] += 1;
            }
            let mut probs = vec![0.0f64; counts.len()];
            for j in -jmax..=jmax {
                probs[(j + jmax + 1) as usize] = offset_pmf(p, j);
            }
            let body: f64 = probs.iter().sum();
            probs[0] = (1.0 - body) / 2.0;
            let last = probs.len() - 1;
            probs[last] = probs[0];
            let expected: Vec<f64> = probs.iter().map(|q| q * trials as f64).collect();
            let gof = crate::stats::chi_square(&counts, &expected).unwrap();
            let pv = gof.p_value_or_bound;
            assert!(pv > 1e-3, "p = {p}: chi-square p-value {pv}");
        }
    }

    #[test]
    fn table_field_from_rows_layout() {
        // t_top = 1:   row 1  = ".X."  → open at (1, 1)
        //              row 0  = "X.X"  → open at (0, 0), (2, 0)
        let f = TableField::from_rows(0.5, 0, 1, &[".X.", "X.X"]);
        assert!(f.is_open(Site::new(1, 1)));
        assert!(!f.is_open(Site::new(0, 1)));
        assert!(f.is_open(Site::new(0, 0)));
        assert!(f.is_open(Site::new(2, 0)));
        assert!(!f.is_open(Site::new(1, 0)));
    }
}
