//! The graph primitives, drawn: one watershed and its dual fence.
//!
//! Everything else in this crate is statistics over the objects this
//! example prints. A cluster is the set of ancestors of an open apex under
//! the child-to-parent map `h`; its generations stack downward one row per
//! step. The two dual paths launched from the apex's flanking vertices
//! thread between forward edges and fence the cluster in for its whole
//! life. Run with:
//!
//! ```bash
//! cargo run --release --example draw_cluster
//! ```

use riverweb::dual::{dual_neighbours, dual_path, encloses};
use riverweb::forward::{self, cluster};
use riverweb::{Field, FieldConfig, Site};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = 0.55;

    // Deterministic hunt for a cluster that draws well: the first seed
    // whose origin-adjacent cluster lives for 8..=13 generations.
    let (f, apex, web) = (1u64..)
        .find_map(|seed| {
            let f = FieldConfig::new(p, seed).ok()?;
            let apex = (0..32).map(|x| Site::new(x, 0)).find(|&s| f.is_open(s))?;
            let web = cluster(&f, apex, 64).ok()?;
            (8..=13).contains(&web.length()).then(|| (f, apex, web))
        })
        .expect("some seed yields a mid-sized cluster");

    println!(
        "p = {p}: cluster at apex ({}, {}): L = {}, #C = {}, D_max = {}",
        apex.x,
        apex.t,
        web.length(),
        web.total,
        web.d_max
    );
    println!();

    let steps = web.rows.len() - 1;
    let (left0, right0) = dual_neighbours(&f, apex)?;
    let fence_left = dual_path(&f, left0, steps)?;
    let fence_right = dual_path(&f, right0, steps)?;

    // One text row per generation: '#' cluster member, 'o' open non-member,
    // '.' closed, '|' dual fence. The line carries one slot per doubled
    // coordinate, so half-integer fence vertices land between sites and
    // integer ones land on (necessarily closed) sites.
    let lo = web.rows.iter().map(|r| r.l).min().unwrap() - 3;
    let hi = web.rows.iter().map(|r| r.r).max().unwrap() + 3;
    for (k, row) in web.rows.iter().enumerate() {
        let t = apex.t - k as i64;
        let mut line: Vec<char> = Vec::with_capacity((2 * (hi - lo) + 1) as usize);
        for x2 in 2 * lo..=2 * hi {
            if x2 % 2 != 0 {
                line.push(' ');
                continue;
            }
            let s = Site::new(x2 / 2, t);
            line.push(if !f.is_open(s) {
                '.'
            } else if k == 0 {
                if s.x == apex.x { '#' } else { 'o' }
            } else if forward::path(&f, s, k)?.site_at(k) == apex {
                '#'
            } else {
                'o'
            });
        }
        for fence in [&fence_left, &fence_right] {
            let d = fence[k];
            let slot = d.x2 - 2 * lo;
            if d.t == t && (0..line.len() as i64).contains(&slot) {
                line[slot as usize] = '|';
            }
        }
        println!(
            "{:>4}  {}  [{:>3}, {:>3}] x{:<2}",
            k,
            line.iter().collect::<String>(),
            row.l,
            row.r,
            row.count
        );
    }

    println!();
    println!(
        "fence encloses every generation: {}",
        encloses(&web, &fence_left, &fence_right)?
    );
    Ok(())
}
