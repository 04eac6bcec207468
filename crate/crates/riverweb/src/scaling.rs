//! Diffusive rescaling: the variance constant γ₀(p), piecewise-linear
//! scaled width/count processes, and the path-counting functional ξ_n.
//!
//! All limit statements in this crate share one normalization. With
//!
//! `γ₀²(p) = (1−p)(2−2p+p²) / (p²(2−p)²)`
//!
//! the width process `s ↦ D_{⌊ns⌋}/(γ₀√n)` (linearly interpolated between
//! the breakpoints `k/n`) converges, conditioned on survival to depth `n`,
//! to `√2·W⁺` for a Brownian meander `W⁺`, and the count process
//! `s ↦ #C_{⌊ns⌋}/(γ₀√n)` tracks `p` times the width uniformly.
//!
//! ξ_n counts the distinct sites of row `n` inside `[0, √nγ₀]` that are hit
//! by forward paths started from *every* open site of row 0. Counting hits
//! site by site gives the exact identity `E[ξ_n] = (⌊√nγ₀⌋+1)·P(L > n)`,
//! which is the bridge between the path-family picture and the
//! stream-length tail.

use crate::dual::DualSite;
use crate::forward::Cluster;
use crate::lattice::{nearest_open_offset, Field, LatticeError, Site};

/// Errors from the scaling layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("p = {0} outside (0, 1)")]
    Domain(f64),
    #[error("dual paths differ in length: left {left}, right {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The diffusive constant γ₀ together with the `p` it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Gamma0 {
    pub p: f64,
    /// Positive root of `γ₀² = (1−p)(2−2p+p²)/(p²(2−p)²)`.
    pub value: f64,
}

impl Gamma0 {
    pub fn new(p: f64) -> Result<Self, ScalingError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ScalingError::Domain(p));
        }
        let num = (1.0 - p) * (2.0 - 2.0 * p + p * p);
        let den = p * p * (2.0 - p) * (2.0 - p);
        Ok(Gamma0 { p, value: (num / den).sqrt() })
    }
}

/// The diffusive constant `γ₀(p)` for `0 < p < 1`.
pub fn gamma0(p: f64) -> Result<f64, ScalingError> {
    Ok(Gamma0::new(p)?.value)
}

// ─── piecewise-linear scaled processes ──────────────────────────────────────

/// A function on `[0, (values.len()−1)/n]`: exact values at the breakpoints
/// `k/n`, affine in between with interpolation weight `ns − ⌊ns⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProcess {
    /// Scale parameter: breakpoints sit at `k/n`.
    pub n: usize,
    /// `values[k]` is the exact value at `s = k/n`.
    pub values: Vec<f64>,
}

impl ScaledProcess {
    /// Exact value at breakpoint `k` (i.e. at `s = k/n`), 0 beyond the end.
    pub fn value_at(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// Evaluates at `s` by linear interpolation; `s` is clamped to the
    /// process domain. When `s·n` is exactly an integer `k` this returns
    /// `values[k]` with no rounding.
    pub fn eval(&self, s: f64) -> f64 {
        let last = (self.values.len() - 1) as f64;
        let x = (s * self.n as f64).clamp(0.0, last);
        let k = x.floor() as usize;
        let w = x - k as f64;
        if w == 0.0 {
            self.values[k]
        } else {
            self.values[k] + w * (self.values[k + 1] - self.values[k])
        }
    }

    /// Largest breakpoint value over `s ∈ [0, 1]` (piecewise-linear sup).
    pub fn sup_unit(&self) -> f64 {
        self.values[..=self.n.min(self.values.len() - 1)]
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// The scaled width process `D_n`: `values[k] = D_k/(γ₀√n)` for
/// `k = 0 ‥= n`, with `D_k = 0` for generations at or beyond `L`.
pub fn width_process(cluster: &Cluster, n: usize, gamma0: f64) -> ScaledProcess {
    let norm = gamma0 * (n as f64).sqrt();
    ScaledProcess {
        n,
        values: (0..=n).map(|k| cluster.width(k) as f64 / norm).collect(),
    }
}

/// The scaled generation-count process `K_n`: `values[k] = #C_k/(γ₀√n)`,
/// zero at and beyond `L`.
pub fn cluster_process(cluster: &Cluster, n: usize, gamma0: f64) -> ScaledProcess {
    let norm = gamma0 * (n as f64).sqrt();
    ScaledProcess {
        n,
        values: (0..=n).map(|k| cluster.count(k) as f64 / norm).collect(),
    }
}

/// The scaled dual-width process `D̂_n` from the flanking dual paths of an
/// apex: `values[k] = (right[k].x2 − left[k].x2)/(2γ₀√n)` (the dual lattice
/// carries doubled x-coordinates). Strictly positive until the paths
/// coalesce and 0 afterwards.
pub fn dual_width_process(
    left: &[DualSite],
    right: &[DualSite],
    n: usize,
    gamma0: f64,
) -> Result<ScaledProcess, ScalingError> {
    if left.len() != right.len() {
        return Err(ScalingError::LengthMismatch { left: left.len(), right: right.len() });
    }
    let norm = 2.0 * gamma0 * (n as f64).sqrt();
    Ok(ScaledProcess {
        n,
        values: left
            .iter()
            .zip(right)
            .map(|(l, r)| (r.x2 - l.x2) as f64 / norm)
            .collect(),
    })
}

/// Uniform gap `sup_{s∈[0,1]} |p·D_n(s) − K_n(s)|` between the rescaled
/// width and count processes. Both sides are piecewise linear on the same
/// breakpoints, so the sup is attained at a breakpoint.
pub fn coupling_gap(
    width: &ScaledProcess,
    counts: &ScaledProcess,
    p: f64,
) -> Result<f64, ScalingError> {
    if width.values.len() != counts.values.len() {
        return Err(ScalingError::LengthMismatch {
            left: width.values.len(),
            right: counts.values.len(),
        });
    }
    Ok(width
        .values
        .iter()
        .zip(&counts.values)
        .map(|(&d, &c)| (p * d - c).abs())
        .fold(0.0, f64::max))
}

// ─── the path-counting functional ξ_n ───────────────────────────────────────

/// ξ_n: the number of distinct sites of row `n` in `[0, √nγ₀]` hit by the
/// forward paths of all open sites of row 0.
///
/// Only finitely many starting sites can contribute: paths cannot cross, so
/// once the path of some open site left of the window lands strictly left
/// of 0, no site further left can land in the window (and symmetrically on
/// the right). The scan therefore starts from the window
/// `[−4√nγ₀, (1+4)√nγ₀]` and widens until both flanking paths land strictly
/// outside `[0, √nγ₀]`; each widening event has vanishing probability.
///
/// Coalescence makes the march cheap: paths that meet stay together, so the
/// advancing front is deduplicated row by row.
pub fn xi_n<F: Field>(f: &F, n: usize) -> Result<u64, ScalingError> {
    assert!(n >= 1, "xi_n requires n >= 1");
    let b = (n as f64).sqrt() * gamma0(f.p())?;
    let margin = (4.0 * b).ceil().max(2.0) as i64;
    let (mut lo, mut hi) = (-margin, b.ceil() as i64 + margin);
    loop {
        if (hi - lo) > 4 * f.search_cap() {
            return Err(ScalingError::Lattice(LatticeError::SearchCapExceeded {
                x: lo,
                t: 0,
                cap: f.search_cap(),
            }));
        }
        // Gather the open sites of row 0 inside the window, then march the
        // (deduplicated) front up n rows.
        let mut front: Vec<i64> = (lo..=hi).filter(|&x| f.is_open(Site::new(x, 0))).collect();
        for t in 0..n as i64 {
            for x in front.iter_mut() {
                *x += nearest_open_offset(f, Site::new(*x, t + 1))
                    .map_err(LatticeError::from)?;
            }
            front.dedup(); // coalesced paths stay coalesced
        }
        // Flank rule: the outermost landings must fall strictly outside
        // [0, √nγ₀] or the window may have cut off a contributor.
        let left_ok = front.first().is_some_and(|&x| (x as f64) < 0.0);
        let right_ok = front.last().is_some_and(|&x| (x as f64) > b);
        if left_ok && right_ok {
            return Ok(front
                .iter()
                .filter(|&&x| x >= 0 && (x as f64) <= b)
                .count() as u64);
        }
        if !left_ok {
            lo -= margin;
        }
        if !right_ok {
            hi += margin;
        }
    }
}
