//! The forward drainage graph: the map `h`, forward paths, ancestor sets
//! and cluster statistics.
//!
//! From an open site `(x, t)`, water drains to `h(x, t)` — the open site on
//! row `t + 1` nearest to `x`, equidistant ties resolved by the tie bit of
//! `(x, t)`. Because two drainage channels never cross (the nearest-open
//! rule preserves horizontal order), the map `x ↦ h(x, t).x` is monotone
//! over the open sites of a row. That monotonicity is what makes *exact*
//! ancestor enumeration cheap: the k-th generation ancestor set
//!
//! `C_k(v) = { open y on row v.t − k : h^k(y) = v }`
//!
//! always fills an interval-bounded range `[l_k, r_k]`, and scanning one
//! site past each end of the previous generation's span provably finds
//! every member.
//!
//! Cluster statistics follow the ancestor sets: `L` (stream length) is the
//! first empty generation, `D_k = r_k − l_k` the width, `#C_k` the
//! generation count, `#C` the basin area, and `D_max` the maximal width.

use crate::lattice::{
    nearest_open_offset, next_open_at_or_after, prev_open_at_or_before, Field, LatticeError, Site,
};

/// Errors from the forward-graph layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForwardError {
    /// The drainage map is traversed from open sites only.
    #[error("site ({x}, {t}) is not open")]
    NotOpen { x: i64, t: i64 },
    /// A cluster was still alive at the generation cap; the caller must
    /// treat the sample as right-censored, never as a finished cluster.
    #[error("cluster still alive at generation cap {cap}")]
    CapExceeded { cap: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

// ─── the map h and forward paths ────────────────────────────────────────────

/// One drainage step: `h(s)` for an open site `s`.
pub fn step<F: Field>(f: &F, s: Site) -> Result<Site, ForwardError> {
    if !f.is_open(s) {
        return Err(ForwardError::NotOpen { x: s.x, t: s.t });
    }
    // The offset query on row t+1 reads its tie from (s.x, s.t) — exactly
    // the walker's own tie bit.
    let k = nearest_open_offset(f, Site::new(s.x, s.t + 1))?;
    Ok(Site::new(s.x + k, s.t + 1))
}

/// A forward path: the x-coordinates of `h⁰(origin), h¹(origin), …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTrace {
    /// The open starting site, `h⁰`.
    pub origin: Site,
    /// `positions[k]` is the x-coordinate of `h^k(origin)`; row `origin.t + k`.
    pub positions: Vec<i64>,
}

impl PathTrace {
    /// The site at step `k` of the trace.
    pub fn site_at(&self, k: usize) -> Site {
        Site::new(self.positions[k], self.origin.t + k as i64)
    }
}

/// Iterates `h` for `steps` steps from the open site `s`; the trace has
/// `steps + 1` positions, beginning with `s.x` itself.
pub fn path<F: Field>(f: &F, s: Site, steps: usize) -> Result<PathTrace, ForwardError> {
    if !f.is_open(s) {
        return Err(ForwardError::NotOpen { x: s.x, t: s.t });
    }
    let mut positions = Vec::with_capacity(steps + 1);
    positions.push(s.x);
    let mut cur = s;
    for _ in 0..steps {
        cur = step(f, cur)?;
        positions.push(cur.x);
    }
    Ok(PathTrace { origin: s, positions })
}

// ─── ancestor sets ──────────────────────────────────────────────────────────

/// Computes the next generation down: all open sites on the row below
/// `parent_t` whose image under `h` lies in `parents` (sorted ascending).
/// Exactness rests on monotonicity of `y ↦ h(y).x` over open `y`: scanning
/// left of the parents' span may stop at the first open site whose image
/// falls left of the span, and symmetrically on the right.
fn next_generation<F: Field>(
    f: &F,
    parent_t: i64,
    parents: &[i64],
    out: &mut Vec<i64>,
) -> Result<(), LatticeError> {
    out.clear();
    if parents.is_empty() {
        return Ok(());
    }
    let child_t = parent_t - 1;
    let (l, r) = (parents[0], *parents.last().unwrap());
    // A candidate scan that runs out of open sites within the search cap is
    // finished, not failed: an open beyond the cap either maps within its
    // own cap-neighbourhood (strictly outside the parents' span, hence a
    // nonmember) or lies outside the modeled window altogether.
    let exhausted = |e: &LatticeError| matches!(e, LatticeError::SearchCapExceeded { .. });
    // Left flank: descending from l, images are nonincreasing; the first
    // image strictly left of l ends the scan.
    let mut y = l;
    loop {
        y = match prev_open_at_or_before(f, child_t, y - 1) {
            Ok(y) => y,
            Err(e) if exhausted(&e) => break,
            Err(e) => return Err(e),
        };
        let img = y + nearest_open_offset(f, Site::new(y, parent_t))?;
        if img < l {
            break;
        }
        if parents.binary_search(&img).is_ok() {
            out.push(y);
        }
    }
    out.reverse();
    // Body and right flank: ascending from l, images are nondecreasing, so
    // one forward pointer into `parents` matches them; the first image
    // strictly right of r ends the scan.
    let mut idx = 0usize;
    let mut y = l - 1;
    loop {
        y = match next_open_at_or_after(f, child_t, y + 1) {
            Ok(y) => y,
            Err(e) if exhausted(&e) => break,
            Err(e) => return Err(e),
        };
        let img = y + nearest_open_offset(f, Site::new(y, parent_t))?;
        if img > r {
            break;
        }
        while idx < parents.len() && parents[idx] < img {
            idx += 1;
        }
        if idx < parents.len() && parents[idx] == img {
            out.push(y);
        }
    }
    Ok(())
}

/// The exact k-th generation ancestor set of `apex`, as sorted
/// x-coordinates on row `apex.t − k`. Empty whenever the apex is closed.
pub fn ancestors<F: Field>(f: &F, apex: Site, k: usize) -> Result<Vec<i64>, ForwardError> {
    if !f.is_open(apex) {
        return Ok(Vec::new());
    }
    let mut cur = vec![apex.x];
    let mut nxt = Vec::new();
    for j in 0..k {
        next_generation(f, apex.t - j as i64, &cur, &mut nxt)?;
        std::mem::swap(&mut cur, &mut nxt);
        if cur.is_empty() {
            break;
        }
    }
    Ok(cur)
}

// ─── cluster growth ─────────────────────────────────────────────────────────

/// Extremes and count of one ancestor generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GenRow {
    /// Leftmost member `l_k`.
    pub l: i64,
    /// Rightmost member `r_k`.
    pub r: i64,
    /// Generation count `#C_k` (≥ 1 for every stored row).
    pub count: u64,
}

impl GenRow {
    /// Width `D_k = r_k − l_k`.
    pub fn width(&self) -> u64 {
        (self.r - self.l) as u64
    }
}

/// Reusable cluster-growth state. `rows` holds every nonempty generation
/// computed so far; `alive` reports whether the generation at the limit was
/// still nonempty. Internal member buffers are reused across calls, so one
/// `Growth` per worker thread amortizes all allocation.
#[derive(Debug, Clone, Default)]
pub struct Growth {
    /// Rows `0 ‥ rows.len()`, all nonempty.
    pub rows: Vec<GenRow>,
    /// `true` ⟺ the generation at `gen_limit` was reached and was nonempty
    /// (equivalently `L > gen_limit`).
    pub alive: bool,
    cur: Vec<i64>,
    nxt: Vec<i64>,
}

/// Grows ancestor generations `0 ‥= gen_limit` of `apex` into `g`.
///
/// On return either `g.alive` is false and `g.rows.len() = L` (the cluster
/// died at its true stream length `L ≤ gen_limit`), or `g.alive` is true,
/// `g.rows.len() = gen_limit + 1`, and the true `L` exceeds `gen_limit`.
pub fn grow_into<F: Field>(
    f: &F,
    apex: Site,
    gen_limit: usize,
    g: &mut Growth,
) -> Result<(), LatticeError> {
    g.rows.clear();
    g.alive = false;
    if !f.is_open(apex) {
        return Ok(()); // L = 0
    }
    g.cur.clear();
    g.cur.push(apex.x);
    g.rows.push(GenRow { l: apex.x, r: apex.x, count: 1 });
    for k in 1..=gen_limit {
        next_generation(f, apex.t - (k as i64 - 1), &g.cur, &mut g.nxt)?;
        std::mem::swap(&mut g.cur, &mut g.nxt);
        if g.cur.is_empty() {
            return Ok(()); // died: L = k = rows.len()
        }
        g.rows.push(GenRow {
            l: g.cur[0],
            r: *g.cur.last().unwrap(),
            count: g.cur.len() as u64,
        });
    }
    g.alive = true;
    Ok(())
}

/// A fully grown watershed.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Cluster {
    /// The open apex the generations drain into (or a closed site, in which
    /// case everything below is empty).
    pub apex: Site,
    /// Per-generation extremes and counts for `k = 0 ‥ L`.
    pub rows: Vec<GenRow>,
    /// Basin area `#C = Σ_k #C_k`.
    pub total: u64,
    /// Maximal width `max{D_k : 0 ≤ k < L}` (0 for an empty cluster).
    pub d_max: u64,
}

impl Cluster {
    /// Stream length `L`: the first empty generation.
    pub fn length(&self) -> u64 {
        self.rows.len() as u64
    }

    /// Width `D_k`, with the convention `D_k = 0` for `k ≥ L`.
    pub fn width(&self, k: usize) -> u64 {
        self.rows.get(k).map_or(0, GenRow::width)
    }

    /// Generation count `#C_k`, 0 for `k ≥ L`.
    pub fn count(&self, k: usize) -> u64 {
        self.rows.get(k).map_or(0, |row| row.count)
    }

    fn from_growth(apex: Site, g: &Growth) -> Cluster {
        Cluster {
            apex,
            rows: g.rows.clone(),
            total: g.rows.iter().map(|row| row.count).sum(),
            d_max: g.rows.iter().map(GenRow::width).max().unwrap_or(0),
        }
    }
}

/// Grows the full cluster of `apex`. A closed apex yields the degenerate
/// cluster with `L = 0`. If the cluster is still alive at generation
/// `cap_l` (so `L > cap_l`), returns [`ForwardError::CapExceeded`]; the
/// caller must account for the sample as right-censored.
pub fn cluster<F: Field>(f: &F, apex: Site, cap_l: usize) -> Result<Cluster, ForwardError> {
    let mut g = Growth::default();
    grow_into(f, apex, cap_l, &mut g)?;
    if g.alive {
        return Err(ForwardError::CapExceeded { cap: cap_l as u64 });
    }
    Ok(Cluster::from_growth(apex, &g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{FieldConfig, TableField};

    fn cfg(p: f64, seed: u64) -> FieldConfig {
        FieldConfig::new(p, seed).unwrap()
    }

    #[test]
    fn step_straight_up_when_site_above_open() {
        let f = TableField::new(0.5).open(3, 0).open(3, 1);
        assert_eq!(step(&f, Site::new(3, 0)), Ok(Site::new(3, 1)));
    }

    #[test]
    fn step_tie_uses_walkers_tie_bit() {
        let base = || TableField::new(0.5).open(0, 0).open(-1, 1).open(1, 1);
        let f = base().tie(0, 0, -1);
        assert_eq!(step(&f, Site::new(0, 0)), Ok(Site::new(-1, 1)));
        let f = base().tie(0, 0, 1);
        assert_eq!(step(&f, Site::new(0, 0)), Ok(Site::new(1, 1)));
    }

    #[test]
    fn step_unique_nearest() {
        let f = TableField::new(0.5).open(0, 0).open(2, 1);
        assert_eq!(step(&f, Site::new(0, 0)), Ok(Site::new(2, 1)));
    }

    #[test]
    fn step_from_closed_site_is_an_error() {
        let f = TableField::new(0.5).open(1, 1);
        assert_eq!(
            step(&f, Site::new(0, 0)),
            Err(ForwardError::NotOpen { x: 0, t: 0 })
        );
    }

    #[test]
    fn zero_step_path_is_identity() {
        let f = TableField::new(0.5).open(7, -2);
        let tr = path(&f, Site::new(7, -2), 0).unwrap();
        assert_eq!(tr.positions, vec![7]);
        assert_eq!(tr.site_at(0), Site::new(7, -2));
    }

    #[test]
    fn hand_built_field_path_matches_hand_computation() {
        // Rows t = 0..4 (listed top row first, t_top = 4):
        //   t=4:  X....
        //   t=3:  .X..X
        //   t=2:  ..X..
        //   t=1:  .X.X.
        //   t=0:  ..X..
        // From (2, 0): row 1 has opens at 1 and 3, equidistant; tie of (2,0)
        // is −1 → (1, 1). Row 2 open at 2 → (2, 2). Row 3 opens at 1, 4 →
        // nearest is 1 → (1, 3). Row 4 open at 0 → (0, 4).
        let f = TableField::from_rows(
            0.5,
            0,
            4,
            &["X....", ".X..X", "..X..", ".X.X.", "..X.."],
        )
        .tie(2, 0, -1);
        let tr = path(&f, Site::new(2, 0), 4).unwrap();
        assert_eq!(tr.positions, vec![2, 1, 2, 1, 0]);
    }

    #[test]
    fn coalescence_is_absorbing() {
        // Two forward paths that meet share every later position: h is a
        // function of its site, so traces are equal from the meeting point.
        let f = cfg(0.5, 404);
        let n = 40;
        let mut a = None;
        for x in -20..20 {
            let s = Site::new(x, 0);
            if !f.is_open(s) {
                continue;
            }
            let tr = path(&f, s, n).unwrap();
            if let Some((_, prev)) = &a {
                let prev: &Vec<i64> = prev;
                if let Some(j) = (0..=n).find(|&j| prev[j] == tr.positions[j]) {
                    for k in j..=n {
                        assert_eq!(prev[k], tr.positions[k], "diverged after meeting");
                    }
                    return;
                }
            }
            a = Some((s, tr.positions));
        }
        panic!("no coalescing pair found in window (seed too unlucky)");
    }

    #[test]
    fn forward_paths_never_cross() {
        // Monotonicity: for open a, b on one row with a.x < b.x, the paths
        // stay ordered at every generation.
        for seed in 0..20u64 {
            for p in [0.3, 0.5, 0.8] {
                let f = cfg(p, 1000 + seed);
                let n = 25;
                let mut prev: Option<Vec<i64>> = None;
                for x in -15..15 {
                    let s = Site::new(x, 0);
                    if !f.is_open(s) {
                        continue;
                    }
                    let tr = path(&f, s, n).unwrap();
                    if let Some(prev) = &prev {
                        for k in 0..=n {
                            assert!(
                                prev[k] <= tr.positions[k],
                                "paths crossed at p={p} seed={seed} gen {k}"
                            );
                        }
                    }
                    prev = Some(tr.positions);
                }
            }
        }
    }

    #[test]
    fn ancestors_of_closed_apex_is_empty() {
        let f = TableField::new(0.5).open(0, -1);
        assert_eq!(ancestors(&f, Site::new(0, 0), 3).unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn ancestors_generation_zero_is_the_apex() {
        let f = TableField::new(0.5).open(5, 2);
        assert_eq!(ancestors(&f, Site::new(5, 2), 0).unwrap(), vec![5]);
    }

    /// Brute-force C_k over a window: every open site within `w` columns of
    /// the apex on row `apex.t − k`, kept iff `h^k` maps it to the apex.
    fn brute_ancestors<F: Field>(f: &F, apex: Site, k: usize, w: i64) -> Vec<i64> {
        let row = apex.t - k as i64;
        let mut out = Vec::new();
        'site: for y in (apex.x - w)..=(apex.x + w) {
            let mut s = Site::new(y, row);
            if !f.is_open(s) {
                continue;
            }
            for _ in 0..k {
                s = step(f, s).unwrap();
                if (s.x - apex.x).abs() > 4 * w {
                    continue 'site; // wandered far outside; cannot return
                }
            }
            if s == apex {
                out.push(y);
            }
        }
        out
    }

    #[test]
    fn ancestors_match_brute_force_on_windows() {
        // 21-column windows, every open apex on the centre row, k ≤ 5.
        // The brute force enumerates candidates within the window only, so
        // compare the window portion of the exact set (members further out
        // are possible but have vanishing probability at this depth; the
        // wide margin in brute_ancestors keeps the comparison honest).
        for (p, seed) in [(0.3, 1u64), (0.5, 2), (0.8, 3)] {
            let f = cfg(p, seed);
            for ax in -10..=10 {
                let apex = Site::new(ax, 0);
                if !f.is_open(apex) {
                    continue;
                }
                for k in 0..=5usize {
                    let exact = ancestors(&f, apex, k).unwrap();
                    let brute = brute_ancestors(&f, apex, k, 40);
                    let window: Vec<i64> = exact
                        .iter()
                        .copied()
                        .filter(|y| (y - ax).abs() <= 40)
                        .collect();
                    assert_eq!(window, brute, "p={p} apex={apex:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn cluster_of_closed_apex_is_degenerate() {
        let f = TableField::new(0.5).open(1, 0);
        let c = cluster(&f, Site::new(0, 0), 64).unwrap();
        assert_eq!(c.length(), 0);
        assert_eq!(c.total, 0);
        assert_eq!(c.d_max, 0);
        assert!(c.rows.is_empty());
    }

    #[test]
    fn cluster_dies_at_one_when_no_row_below_maps_in() {
        // Apex (0, 1) open; row 0 has an open site at 3 whose image is the
        // open site (4, 1), not the apex → C_1 = ∅, L = 1, #C = 1.
        let f = TableField::new(0.5).open(0, 1).open(4, 1).open(3, 0);
        let c = cluster(&f, Site::new(0, 1), 64).unwrap();
        assert_eq!(c.length(), 1);
        assert_eq!(c.total, 1);
        assert_eq!(c.rows, vec![GenRow { l: 0, r: 0, count: 1 }]);
    }

    #[test]
    fn cluster_rows_agree_with_ancestors_everywhere() {
        // Row-by-row agreement between the incremental growth and the
        // one-shot exact ancestor sets, across random windows.
        for (p, seed) in [(0.3, 7u64), (0.5, 8), (0.8, 9)] {
            let f = cfg(p, seed);
            for ax in -15..=15 {
                let apex = Site::new(ax, 0);
                if !f.is_open(apex) {
                    continue;
                }
                let c = match cluster(&f, apex, 64) {
                    Ok(c) => c,
                    Err(ForwardError::CapExceeded { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                // Consistency of aggregates.
                assert_eq!(c.total, c.rows.iter().map(|r| r.count).sum::<u64>());
                assert_eq!(c.d_max, c.rows.iter().map(GenRow::width).max().unwrap_or(0));
                for (k, row) in c.rows.iter().enumerate() {
                    let anc = ancestors(&f, apex, k).unwrap();
                    assert!(!anc.is_empty());
                    assert_eq!(row.l, anc[0], "l_{k}");
                    assert_eq!(row.r, *anc.last().unwrap(), "r_{k}");
                    assert_eq!(row.count, anc.len() as u64, "#C_{k}");
                    assert!(row.count >= 1);
                    // Interval-hitting: every member inside [l_k, r_k].
                    assert!(anc.iter().all(|&y| row.l <= y && y <= row.r));
                }
                // The generation after death is empty.
                let dead = ancestors(&f, apex, c.rows.len()).unwrap();
                assert!(dead.is_empty());
            }
        }
    }

    #[test]
    fn cluster_cap_is_a_hard_error() {
        let f = cfg(0.5, 99);
        // Find an apex that survives at least 8 generations, then cap below.
        for ax in 0.. {
            let apex = Site::new(ax, 0);
            if !f.is_open(apex) {
                continue;
            }
            if let Ok(c) = cluster(&f, apex, 512) {
                if c.length() > 8 {
                    match cluster(&f, apex, 8) {
                        Err(ForwardError::CapExceeded { cap: 8 }) => return,
                        other => panic!("expected CapExceeded, got {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn grow_alive_semantics_match_survival() {
        // alive after gen_limit = n ⟺ L > n, checked against full growth.
        let f = cfg(0.5, 2222);
        let mut g = Growth::default();
        for ax in -30..30 {
            let apex = Site::new(ax, 0);
            let full = match cluster(&f, apex, 4096) {
                Ok(c) => c.length(),
                Err(_) => continue,
            };
            for n in [0usize, 1, 2, 5, 11] {
                grow_into(&f, apex, n, &mut g).unwrap();
                assert_eq!(g.alive, full > n as u64, "apex {apex:?} n {n}");
                if g.alive {
                    assert_eq!(g.rows.len(), n + 1);
                } else {
                    assert_eq!(g.rows.len() as u64, full.min(n as u64 + 1));
                }
            }
        }
    }
}
