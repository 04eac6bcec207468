//! The dual graph: vertices at midpoints of consecutive open sites, the
//! backward map `ĥ` that threads between forward edges, its closed-form
//! increment kernel, and the enclosure of forward clusters by dual paths.
//!
//! A dual vertex sits at the midpoint of two consecutive open sites of a
//! row and steps *down* one row per application of `ĥ`: the image is the
//! midpoint of `a^l`, the rightmost open site below whose forward image
//! lies left of the vertex, and `a^r`, the leftmost whose image lies right.
//! Dual coordinates are half-integers, stored doubled (`x2`) so midpoint
//! and crossing predicates stay exact integer arithmetic.
//!
//! Because a valid dual vertex `u` is the *exact* midpoint of its
//! straddling opens `w_l < w_r`, every open site `z` of the row below with
//! `z < u` has its forward image at `w_l` or further left (both strictly
//! left of `u`), and symmetrically for `z > u`; only an open site exactly
//! at an integer `u` can map to either side, resolved by one forward-map
//! evaluation there (an exact tie, so by its tie bit). Hence `a^l` and
//! `a^r` are adjacent open sites, found by two flank scans plus at most
//! one `h` evaluation — no per-candidate image computation is needed, and
//! `ĥ(u)` is again a midpoint of consecutive opens. The definitional
//! outward scan survives as a test oracle.
//!
//! The increment law of the induced dual walk is closed-form. With `G`
//! geometric(p) on {1, 2, …} and `q = 1 − p`,
//!
//! `P(G₁ − G₂ = m) = p·qᐧ|m| / (2 − p)`,
//!
//! a half-integer state steps by `v = (G₁−G₂)/2`, while an integer state
//! steps by `v` with probability `(1−p)·P(G₁−G₂ = 2v) + p·P(G = 2v)/2 +
//! p·P(G = −2v)/2`. Both kernels are symmetric, so the dual walk is a
//! martingale.

use crate::forward::Cluster;
use crate::lattice::{
    nearest_open_offset, next_open_at_or_after, prev_open_at_or_before, Field, LatticeError, Site,
};

/// Errors from the dual layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DualError {
    #[error("site ({x}, {t}) is not open")]
    NotOpen { x: i64, t: i64 },
    #[error("dual paths too short for cluster: length {l}, left {left}, right {right}")]
    LengthMismatch { l: usize, left: usize, right: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A dual vertex: the midpoint of two consecutive open sites of row `t`,
/// with the x-coordinate stored doubled so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct DualSite {
    /// Doubled x-coordinate; the true coordinate is `x2 / 2`.
    pub x2: i64,
    pub t: i64,
}

impl DualSite {
    /// The true (possibly half-integer) x-coordinate.
    pub fn coordinate(&self) -> f64 {
        self.x2 as f64 / 2.0
    }

    /// Whether the vertex sits at an integer x-coordinate.
    pub fn state_is_integer(&self) -> bool {
        self.x2.rem_euclid(2) == 0
    }
}

/// The two dual vertices flanking an open site: `left` at distance `J⁻/2`
/// and `right` at `J⁺/2`, where `J±` are the gaps to the first open sites
/// on either side in the same row.
pub fn dual_neighbours<F: Field>(f: &F, s: Site) -> Result<(DualSite, DualSite), DualError> {
    if !f.is_open(s) {
        return Err(DualError::NotOpen { x: s.x, t: s.t });
    }
    let wl = prev_open_at_or_before(f, s.t, s.x - 1)?;
    let wr = next_open_at_or_after(f, s.t, s.x + 1)?;
    Ok((
        DualSite { x2: s.x + wl, t: s.t },
        DualSite { x2: s.x + wr, t: s.t },
    ))
}

/// One dual step `ĥ(d)`: the midpoint of `(a^l, a^r)` on row `d.t − 1`.
///
/// `d` must be a valid dual vertex (midpoint of consecutive opens of its
/// row, as produced by [`dual_neighbours`] or a previous `dual_step`);
/// validity is what lets the flank scans stop at the adjacent open sites.
pub fn dual_step<F: Field>(f: &F, d: DualSite) -> Result<DualSite, DualError> {
    let below = d.t - 1;
    let (a_l, a_r);
    if d.x2.rem_euclid(2) == 0 {
        let u = d.x2 / 2;
        if f.is_open(Site::new(u, below)) {
            // The one genuinely ambiguous candidate: (u, below) is exactly
            // equidistant from the opens straddling d, so a single forward
            // evaluation (its tie bit) decides which side it drains to.
            let img = u + nearest_open_offset(f, Site::new(u, d.t))?;
            if 2 * img < d.x2 {
                a_l = u;
                a_r = next_open_at_or_after(f, below, u + 1)?;
            } else {
                a_l = prev_open_at_or_before(f, below, u - 1)?;
                a_r = u;
            }
        } else {
            a_l = prev_open_at_or_before(f, below, u - 1)?;
            a_r = next_open_at_or_after(f, below, u + 1)?;
        }
    } else {
        // Half-integer state: the largest integer strictly left of d.
        let lo = (d.x2 - 1).div_euclid(2);
        a_l = prev_open_at_or_before(f, below, lo)?;
        a_r = next_open_at_or_after(f, below, lo + 1)?;
    }
    Ok(DualSite { x2: a_l + a_r, t: below })
}

/// Definitional `ĥ`: scan outward on the row below, evaluating the forward
/// image of every open candidate, and take the rightmost left-mapper and
/// leftmost right-mapper. Slower than [`dual_step`] but assumption-free;
/// kept as the oracle the fast path is audited against.
pub(crate) fn dual_step_scanned<F: Field>(f: &F, d: DualSite) -> Result<DualSite, DualError> {
    let below = d.t - 1;
    let img2 = |y: i64| -> Result<i64, DualError> {
        Ok(2 * (y + nearest_open_offset(f, Site::new(y, d.t))?))
    };
    // Rightmost open whose image is strictly left of d; the scan starts a
    // margin *past* the vertex so it does not presuppose which side the
    // near-center candidates drain to.
    let mut y = (d.x2 + 1).div_euclid(2) + 8;
    let a_l = loop {
        y = prev_open_at_or_before(f, below, y)?;
        if img2(y)? < d.x2 {
            break y;
        }
        y -= 1;
    };
    // Leftmost open whose image is strictly right of d, from a margin below.
    let mut y = (d.x2 - 1).div_euclid(2) + 1 - 8;
    let a_r = loop {
        y = next_open_at_or_after(f, below, y)?;
        if img2(y)? > d.x2 {
            break y;
        }
        y += 1;
    };
    Ok(DualSite { x2: a_l + a_r, t: below })
}

/// Iterates `ĥ` for `steps` steps; the trace has `steps + 1` vertices with
/// `t` decreasing by one per entry.
pub fn dual_path<F: Field>(
    f: &F,
    d: DualSite,
    steps: usize,
) -> Result<Vec<DualSite>, DualError> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(d);
    let mut cur = d;
    for _ in 0..steps {
        cur = dual_step(f, cur)?;
        out.push(cur);
    }
    Ok(out)
}

// ─── the increment kernel ───────────────────────────────────────────────────

/// A point query of the dual increment law: the probability that a dual
/// state of the given integrality steps by `v = v2/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    /// Whether the current dual x-coordinate is an integer.
    pub state_is_integer: bool,
    /// Doubled increment; the walk moves by `v2 / 2`.
    pub v2: i64,
    pub p: f64,
}

/// `P(G₁ − G₂ = m)` for independent geometric(p) variables on {1, 2, …}:
/// the closed form `p(1−p)^{|m|}/(2−p)`.
pub fn geometric_diff_pmf(p: f64, m: i64) -> f64 {
    p * (1.0 - p).powi(m.unsigned_abs() as i32) / (2.0 - p)
}

/// `P(G = k)` for a geometric(p) on {1, 2, …}.
fn geometric_pmf(p: f64, k: i64) -> f64 {
    if k >= 1 {
        p * (1.0 - p).powi((k - 1) as i32)
    } else {
        0.0
    }
}

/// The dual increment kernel. From a half-integer state the increment is
/// `(G₁−G₂)/2`; from an integer state the straddling opens regenerate on
/// one side with probability p each, mixing in one-sided geometric jumps.
pub fn kernel(q: KernelQuery) -> f64 {
    let diff = geometric_diff_pmf(q.p, q.v2);
    if q.state_is_integer {
        (1.0 - q.p) * diff
            + q.p * geometric_pmf(q.p, q.v2) / 2.0
            + q.p * geometric_pmf(q.p, -q.v2) / 2.0
    } else {
        diff
    }
}

/// Series evaluation of `P(G₁ − G₂ = m)` by direct convolution, truncated
/// when terms drop below 1e−16; the cross-check for the closed form.
#[cfg(test)]
fn geometric_diff_series(p: f64, m: i64) -> f64 {
    let mut total = 0.0;
    for k in 1..10_000 {
        let term = geometric_pmf(p, k + m) * geometric_pmf(p, k);
        total += term;
        if k > m.abs().max(1) && term < 1e-16 {
            break;
        }
    }
    total
}

/// Half-width of the increment window that carries all but < 1e−12 of the
/// kernel mass for every p ≥ 0.1 (the two-sided geometric tail beyond
/// `|v2| = 400` is ≤ 2·0.9⁴⁰¹/1.1 ≈ 5·10⁻²⁰).
pub const KERNEL_MASS_WINDOW: i64 = 400;

/// Total kernel mass over `v2 ∈ [−KERNEL_MASS_WINDOW, KERNEL_MASS_WINDOW]`.
pub fn kernel_mass(p: f64, state_is_integer: bool) -> f64 {
    crate::stats::kahan_sum(
        (-KERNEL_MASS_WINDOW..=KERNEL_MASS_WINDOW)
            .map(|v2| kernel(KernelQuery { state_is_integer, v2, p })),
    )
}

// ─── geometry: enclosure and non-crossing ───────────────────────────────────

/// Whether a dual edge `(u2, s) → (v2, s−1)` meets (touches or crosses) the
/// forward edge `(child_x, s−1) → (parent_x, s)`. Both segments span the
/// same row strip, so they meet iff their horizontal order differs (or
/// vanishes) at the two rows — an exact integer sign test.
pub fn crosses_forward_edge(
    dual_from: DualSite,
    dual_to: DualSite,
    child_x: i64,
    parent_x: i64,
) -> bool {
    let at_below = (dual_to.x2 - 2 * child_x) as i128;
    let at_above = (dual_from.x2 - 2 * parent_x) as i128;
    at_below * at_above <= 0
}

/// Whether the dual paths flanking a cluster's apex strictly enclose every
/// generation: for all `k < L`, `left[k] < l_k` and `r_k < right[k]` (in
/// true coordinates). `left[k]`/`right[k]` must sit on row `apex.t − k`;
/// paths shorter than the cluster are a [`DualError::LengthMismatch`].
pub fn encloses(
    cluster: &Cluster,
    left: &[DualSite],
    right: &[DualSite],
) -> Result<bool, DualError> {
    let l = cluster.rows.len();
    if left.len() < l || right.len() < l {
        return Err(DualError::LengthMismatch { l, left: left.len(), right: right.len() });
    }
    Ok(cluster
        .rows
        .iter()
        .zip(left.iter().zip(right))
        .all(|(row, (dl, dr))| dl.x2 < 2 * row.l && 2 * row.r < dr.x2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{cluster, ForwardError};
    use crate::lattice::{FieldConfig, TableField};
    use crate::stats::chi_square;

    fn cfg(p: f64, seed: u64) -> FieldConfig {
        FieldConfig::new(p, seed).unwrap()
    }

    #[test]
    fn dual_neighbours_adjacent_opens() {
        let f = TableField::new(0.5).open(4, 2).open(3, 2).open(5, 2);
        let (l, r) = dual_neighbours(&f, Site::new(4, 2)).unwrap();
        assert_eq!(l, DualSite { x2: 7, t: 2 });
        assert_eq!(r, DualSite { x2: 9, t: 2 });
        assert!(!l.state_is_integer());
        assert_eq!(l.coordinate(), 3.5);
    }

    #[test]
    fn dual_neighbours_gap_three() {
        let f = TableField::new(0.5).open(0, 0).open(3, 0).open(-2, 0);
        let (l, r) = dual_neighbours(&f, Site::new(0, 0)).unwrap();
        assert_eq!(r.x2, 3, "right dual neighbour at x + J⁺/2 with J⁺ = 3");
        assert_eq!(l.x2, -2);
    }

    #[test]
    fn dual_neighbours_requires_open_site() {
        let f = TableField::new(0.5).open(1, 0);
        assert_eq!(
            dual_neighbours(&f, Site::new(0, 0)),
            Err(DualError::NotOpen { x: 0, t: 0 })
        );
    }

    #[test]
    fn gap_to_next_open_is_geometric() {
        // J⁺ over 10⁶ independent draws at p = 0.5 vs geometric(0.5).
        let mut counts = vec![0u64; 21];
        let mut draws = 0u64;
        let mut seed = 0u64;
        while draws < 1_000_000 {
            seed += 1;
            let f = cfg(0.5, 5_000_000 + seed);
            let s = Site::new(0, 0);
            if !f.is_open(s) {
                continue;
            }
            let (_, r) = dual_neighbours(&f, s).unwrap();
            let j = (r.x2 - 2 * s.x) as usize;
            counts[j.min(20)] += 1;
            draws += 1;
        }
        // Cells 1..19 exact geometric, cell 20 pools the tail.
        let mut probs = vec![0.0; 21];
        for j in 1..20 {
            probs[j] = 0.5f64.powi(j as i32);
        }
        probs[20] = 0.5f64.powi(19);
        let g = chi_square(&counts[1..], &probs[1..]).unwrap();
        assert!(g.p_value_or_bound > 1e-3, "J⁺ not geometric: {g:?}");
    }

    /// 7×4 hand window. Rows t = 3..0, x ∈ 0..6:
    ///   t=3  .X...X.
    ///   t=2  ..X.X..
    ///   t=1  X..X..X
    ///   t=0  X.X..X.
    fn figure_window() -> TableField {
        TableField::from_rows(
            0.5,
            0,
            3,
            &[".X...X.", "..X.X..", "X..X..X", "X.X..X."],
        )
    }

    #[test]
    fn dual_path_matches_hand_iteration_tie_right() {
        // Start between (1,3) and (5,3). Row 2: 2 and 4 map to 1 and 5
        // respectively → midpoint (3, 2). Row 1: (3,1) is open and exactly
        // equidistant; tie +1 sends it right, so a^l = 0, a^r = 3. Row 0:
        // half-integer state 3/2 → a^l = 0, a^r = 2.
        let f = figure_window().tie(3, 1, 1);
        let d0 = DualSite { x2: 6, t: 3 };
        let trace = dual_path(&f, d0, 3).unwrap();
        assert_eq!(
            trace,
            vec![
                DualSite { x2: 6, t: 3 },
                DualSite { x2: 6, t: 2 },
                DualSite { x2: 3, t: 1 },
                DualSite { x2: 2, t: 0 },
            ]
        );
    }

    #[test]
    fn dual_path_matches_hand_iteration_tie_left() {
        // Same window, tie −1 at (3,1): now (3,1) drains left, so a^l = 3,
        // a^r = 6 → (9/2, 1); then a^l = 2, a^r = 5 → (7/2, 0).
        let f = figure_window().tie(3, 1, -1);
        let trace = dual_path(&f, DualSite { x2: 6, t: 3 }, 3).unwrap();
        assert_eq!(
            trace,
            vec![
                DualSite { x2: 6, t: 3 },
                DualSite { x2: 6, t: 2 },
                DualSite { x2: 9, t: 1 },
                DualSite { x2: 7, t: 0 },
            ]
        );
    }

    #[test]
    fn zero_step_dual_path_is_identity() {
        let f = figure_window();
        let d = DualSite { x2: 6, t: 3 };
        assert_eq!(dual_path(&f, d, 0).unwrap(), vec![d]);
    }

    #[test]
    fn dual_step_lands_between_consecutive_opens() {
        // ĥ(d) must again be the midpoint of two consecutive opens.
        for seed in 0..30u64 {
            for p in [0.3, 0.5, 0.8] {
                let f = cfg(p, 40_000 + seed);
                let s = match (0..).map(|x| Site::new(x, 0)).find(|&s| f.is_open(s)) {
                    Some(s) => s,
                    None => unreachable!(),
                };
                let (mut d, _) = dual_neighbours(&f, s).unwrap();
                for _ in 0..20 {
                    d = dual_step(&f, d).unwrap();
                    let wl = prev_open_at_or_before(&f, d.t, (d.x2 - 1).div_euclid(2)).unwrap();
                    let wr = next_open_at_or_after(&f, d.t, (d.x2 - 1).div_euclid(2) + 1).unwrap();
                    assert_eq!(wl + wr, d.x2, "not a midpoint of consecutive opens");
                    assert!(wl < wr);
                }
            }
        }
    }

    #[test]
    fn fast_dual_step_matches_definitional_scan() {
        for seed in 0..40u64 {
            for p in [0.3, 0.5, 0.8] {
                let f = cfg(p, 77_000 + seed);
                let s = (0..).map(|x| Site::new(x, 0)).find(|&s| f.is_open(s)).unwrap();
                let (mut l, mut r) = dual_neighbours(&f, s).unwrap();
                for _ in 0..25 {
                    assert_eq!(dual_step(&f, l).unwrap(), dual_step_scanned(&f, l).unwrap());
                    assert_eq!(dual_step(&f, r).unwrap(), dual_step_scanned(&f, r).unwrap());
                    l = dual_step(&f, l).unwrap();
                    r = dual_step(&f, r).unwrap();
                }
            }
        }
    }

    #[test]
    fn kernel_frozen_values_at_half() {
        let q = |i, v2| KernelQuery { state_is_integer: i, v2, p: 0.5 };
        assert!((kernel(q(false, 0)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((kernel(q(false, 1)) - 1.0 / 6.0).abs() < 1e-15);
        assert!((kernel(q(true, 1)) - 5.0 / 24.0).abs() < 1e-15);
        assert!((kernel(q(true, 0)) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_series() {
        for p in [0.1, 0.3, 0.5, 0.8, 0.95] {
            for m in -40..=40 {
                let closed = geometric_diff_pmf(p, m);
                let series = geometric_diff_series(p, m);
                assert!(
                    (closed - series).abs() < 1e-14,
                    "p={p} m={m}: {closed} vs {series}"
                );
            }
        }
    }

    #[test]
    fn kernel_mass_and_symmetry() {
        for p in [0.1, 0.3, 0.5, 0.8] {
            for integer in [false, true] {
                let mass = kernel_mass(p, integer);
                assert!(mass > 1.0 - 1e-12, "p={p} int={integer} mass={mass:.15}");
                assert!(mass <= 1.0 + 1e-12);
                for v2 in 0..=50 {
                    let a = kernel(KernelQuery { state_is_integer: integer, v2, p });
                    let b = kernel(KernelQuery { state_is_integer: integer, v2: -v2, p });
                    assert_eq!(a, b, "kernel asymmetric at v2={v2}");
                }
            }
        }
    }

    #[test]
    fn kernel_mean_is_zero_analytically() {
        for p in [0.1, 0.3, 0.5, 0.8] {
            for integer in [false, true] {
                let mean: f64 = (-KERNEL_MASS_WINDOW..=KERNEL_MASS_WINDOW)
                    .map(|v2| {
                        (v2 as f64 / 2.0) * kernel(KernelQuery { state_is_integer: integer, v2, p })
                    })
                    .sum();
                assert!(mean.abs() < 1e-12, "p={p} int={integer} mean={mean:e}");
            }
        }
    }

    /// Marches one long dual path, returning (increments v2, state types).
    fn harvest_increments(p: f64, seed: u64, steps: usize) -> Vec<(bool, i64)> {
        let f = cfg(p, seed);
        let s = (0..).map(|x| Site::new(x, 0)).find(|&s| f.is_open(s)).unwrap();
        let (mut d, _) = dual_neighbours(&f, s).unwrap();
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            let e = dual_step(&f, d).unwrap();
            out.push((d.state_is_integer(), e.x2 - d.x2));
            d = e;
        }
        out
    }

    #[test]
    fn empirical_increments_match_kernel() {
        // 2·10⁵ steps on one path; increments from half-integer states vs
        // the closed-form kernel, and likewise from integer states.
        let incs = harvest_increments(0.5, 424_242, 200_000);
        for integer in [false, true] {
            let w = 12i64;
            let mut counts = vec![0u64; (2 * w + 2) as usize]; // last cell = |v2| > w
            for &(_, v2) in incs.iter().filter(|(i, _)| *i == integer) {
                if v2.abs() <= w {
                    counts[(v2 + w) as usize] += 1;
                } else {
                    counts[(2 * w + 1) as usize] += 1;
                }
            }
            let mut probs: Vec<f64> = (-w..=w)
                .map(|v2| kernel(KernelQuery { state_is_integer: integer, v2, p: 0.5 }))
                .collect();
            probs.push(1.0 - probs.iter().sum::<f64>());
            let g = chi_square(&counts, &probs).unwrap();
            assert!(
                g.p_value_or_bound > 1e-3,
                "increment law (integer={integer}) rejected: {g:?}"
            );
        }
    }

    #[test]
    fn empirical_mean_increment_is_zero() {
        // Martingale check: mean of 2·10⁵ increments within 4σ of zero,
        // with σ² bounded by the larger of the two kernel variances.
        let incs = harvest_increments(0.5, 898_989, 200_000);
        let n = incs.len() as f64;
        let mean_v = incs.iter().map(|&(_, v2)| v2 as f64 / 2.0).sum::<f64>() / n;
        let var = |integer: bool| -> f64 {
            (-KERNEL_MASS_WINDOW..=KERNEL_MASS_WINDOW)
                .map(|v2| {
                    let v = v2 as f64 / 2.0;
                    v * v * kernel(KernelQuery { state_is_integer: integer, v2, p: 0.5 })
                })
                .sum()
        };
        let sigma = (var(false).max(var(true)) / n).sqrt();
        assert!(mean_v.abs() < 4.0 * sigma, "mean {mean_v} vs 4σ = {}", 4.0 * sigma);
    }

    #[test]
    fn dual_paths_preserve_order() {
        // Two dual paths started on one row never cross (they may merge).
        for seed in 0..15u64 {
            let f = cfg(0.5, 60_000 + seed);
            let s = (0..).map(|x| Site::new(x, 0)).find(|&s| f.is_open(s)).unwrap();
            let (l0, r0) = dual_neighbours(&f, s).unwrap();
            let (mut a, mut b) = (l0, r0);
            for _ in 0..60 {
                assert!(a.x2 <= b.x2, "dual paths crossed");
                a = dual_step(&f, a).unwrap();
                b = dual_step(&f, b).unwrap();
            }
        }
    }

    #[test]
    fn crossing_predicate_hand_cases() {
        let d = |x2, t| DualSite { x2, t };
        // Dual (0.5,1)→(1.5,0) vs forward (2,0)→(1,1): same side both rows.
        assert!(!crosses_forward_edge(d(1, 1), d(3, 0), 2, 1));
        // Dual (1,1)→(2,0) vs forward (2,0)→(1,1): touch at the lower row.
        assert!(crosses_forward_edge(d(2, 1), d(4, 0), 2, 1));
        // Genuine transversal crossing: dual 3.5→0.5 vs forward 1→3.
        assert!(crosses_forward_edge(d(7, 1), d(1, 0), 1, 3));
    }

    #[test]
    fn dual_steps_never_cross_forward_edges() {
        // Exact predicate audit: every forward edge in a window around the
        // dual step must stay strictly on one side.
        for seed in 0..10u64 {
            for p in [0.3, 0.5, 0.8] {
                let f = cfg(p, 91_000 + seed);
                let s = (0..).map(|x| Site::new(x, 0)).find(|&s| f.is_open(s)).unwrap();
                let (mut d, _) = dual_neighbours(&f, s).unwrap();
                for _ in 0..40 {
                    let e = dual_step(&f, d).unwrap();
                    let center = (d.x2 as f64 / 2.0).round() as i64;
                    for z in (center - 30)..=(center + 30) {
                        let site = Site::new(z, e.t);
                        if !f.is_open(site) {
                            continue;
                        }
                        let w = z + nearest_open_offset(&f, Site::new(z, d.t)).unwrap();
                        assert!(
                            !crosses_forward_edge(d, e, z, w),
                            "dual edge {d:?}→{e:?} crosses forward ({z},{})→({w},{})",
                            e.t,
                            d.t
                        );
                    }
                    d = e;
                }
            }
        }
    }

    /// Enclosure fixture. Rows t = 2..0, x ∈ 0..7:
    ///   t=2  .X.X.X..   apex (3,2), dual flanks at 2 and 4 (x2 4, 8)
    ///   t=1  X.X.X.X.   C₁ = {2,4} via ties
    ///   t=0  XX.X.X.X   C₂ = {1,3,5}
    #[test]
    fn encloses_fixture_with_strict_inequalities() {
        let f = TableField::from_rows(
            0.5,
            0,
            2,
            &[".X.X.X..", "X.X.X.X.", "XX.X.X.X"],
        )
        .tie(2, 1, 1)
        .tie(4, 1, -1)
        .tie(1, 0, 1)
        .tie(3, 0, 1)
        .tie(5, 0, -1);
        let apex = Site::new(3, 2);
        let c = cluster(&f, apex, 16).unwrap();
        assert_eq!(c.length(), 3);
        assert_eq!((c.rows[1].l, c.rows[1].r), (2, 4));
        assert_eq!((c.rows[2].l, c.rows[2].r), (1, 5));
        let (l0, r0) = dual_neighbours(&f, apex).unwrap();
        assert_eq!((l0.x2, r0.x2), (4, 8));
        let left = dual_path(&f, l0, 2).unwrap();
        let right = dual_path(&f, r0, 2).unwrap();
        assert_eq!(left[1], DualSite { x2: 2, t: 1 });
        assert_eq!(right[1], DualSite { x2: 10, t: 1 });
        assert_eq!(left[2], DualSite { x2: 1, t: 0 });
        assert_eq!(right[2], DualSite { x2: 12, t: 0 });
        assert_eq!(encloses(&c, &left, &right), Ok(true));
        // Short paths are rejected, not silently accepted.
        assert_eq!(
            encloses(&c, &left[..2], &right),
            Err(DualError::LengthMismatch { l: 3, left: 2, right: 3 })
        );
    }

    #[test]
    fn single_site_cluster_trivially_enclosed() {
        // L = 1: the apex alone, enclosed by its own dual neighbours.
        let f = TableField::new(0.5).open(0, 0).open(-2, 0).open(3, 0);
        let c = cluster(&f, Site::new(0, 0), 8).unwrap();
        assert_eq!(c.length(), 1);
        let (l, r) = dual_neighbours(&f, Site::new(0, 0)).unwrap();
        assert_eq!(encloses(&c, &[l], &[r]), Ok(true));
    }

    #[test]
    fn random_clusters_always_enclosed() {
        // Dual flanking paths enclose the cluster, across p values.
        let mut checked = 0;
        for seed in 0..400u64 {
            for p in [0.3, 0.5, 0.8] {
                let f = cfg(p, 123_000 + seed);
                let apex = Site::new(0, 0);
                if !f.is_open(apex) {
                    continue;
                }
                let c = match cluster(&f, apex, 256) {
                    Ok(c) => c,
                    Err(ForwardError::CapExceeded { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let steps = c.rows.len().saturating_sub(1);
                let (l0, r0) = dual_neighbours(&f, apex).unwrap();
                let left = dual_path(&f, l0, steps).unwrap();
                let right = dual_path(&f, r0, steps).unwrap();
                assert_eq!(encloses(&c, &left, &right), Ok(true), "p={p} seed={seed}");
                checked += 1;
            }
        }
        assert!(checked > 300, "too few clusters exercised: {checked}");
    }
}
