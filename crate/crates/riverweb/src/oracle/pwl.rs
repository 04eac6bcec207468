//! Piecewise-linear path functions and the shift/kill operators.
//!
//! The composite object of interest is `H ∘ T^{τ+}` applied to a diffusively
//! scaled random walk: `T^{τ+}` rebases the path at the first time from
//! which it stays strictly above its current value for at least `τ` units
//! (the "τ-rise" time `S^{τ+}`), and `H` kills the result at its first
//! strictly-positive-time zero. For piecewise-linear inputs both operators
//! are computed *exactly*: a τ-rise at any interior point of a segment
//! implies one at the segment's left breakpoint (on a rising segment the
//! left endpoint is lower, with more of the window already verified; on a
//! falling or flat segment no interior point qualifies at all), so the
//! infimum is always attained on the breakpoint grid and a sliding-window
//! minimum finds it in linear time.
//!
//! `S^{τ+}` has infinite expectation (its tail follows the arcsine law:
//! the rise index sits past `D` with probability `≈ (2/π)·√(w/D)` for a
//! window of `w` steps), so the samplers bound the search by
//! [`W_PLUS_TAU_DOMAIN_FACTOR`]`·w` and report [`OracleError::WalkTooShort`]
//! beyond it — about 0.7% of attempts, which callers resample. The area
//! indicator needs no horizon at all: while the killed path is alive its
//! integer walk sits at height ≥ 1, so the running area grows by at least
//! one half-unit per step and every query terminates.

use rand::Rng;

use super::walk::StepSource;
use super::OracleError;

/// Search-domain bound for the τ-rise time, in units of the rise window
/// `w = τm`: scanning stops at `k = 8192·w`, which is exceeded with
/// probability ≈ `(2/π)/√8192` ≈ 0.7%.
pub const W_PLUS_TAU_DOMAIN_FACTOR: usize = 8192;

/// A continuous function on `[0, (len−1)·dt]` given by values on a uniform
/// breakpoint grid, linear in between, and extended by its last value to the
/// right (and first value to the left).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    /// Right end of the breakpoint grid.
    pub fn end_time(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Evaluate at `t`, clamping outside the grid.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        let pos = t / self.dt;
        let k = pos.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let w = pos - k as f64;
        if w == 0.0 {
            self.values[k]
        } else {
            self.values[k] * (1.0 - w) + self.values[k + 1] * w
        }
    }

    /// Exact trapezoid integral over the whole grid.
    pub fn area(&self) -> f64 {
        self.area_to(self.end_time())
    }

    /// Exact integral over `[0, t]`, with `t` clamped to the grid.
    pub fn area_to(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.end_time());
        let pos = t / self.dt;
        let full = (pos.floor() as usize).min(self.values.len() - 1);
        let mut acc = crate::stats::KahanSum::default();
        for k in 0..full {
            acc.add((self.values[k] + self.values[k + 1]) * self.dt / 2.0);
        }
        let t_full = full as f64 * self.dt;
        if t > t_full {
            acc.add((self.values[full] + self.eval(t)) * (t - t_full) / 2.0);
        }
        acc.value()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Relative slack used when deciding whether `τ` is a whole number of grid
/// steps; keeps `0.3 * 10.0` style float noise from flipping the branch.
const GRID_EPS: f64 = 1e-9;

/// The τ-rise shift `T^{τ+}`: find `S^{τ+} = inf{t ≥ 0 : f(t+s) > f(t) for
/// all 0 < s ≤ τ}` and return `s ↦ f(S^{τ+} + s) − f(S^{τ+})`. If no point
/// of the grid domain satisfies the condition, the input is returned
/// unchanged (the `S^{τ+} = ∞` convention).
pub fn t_tau_plus(f: &PiecewiseLinear, tau: f64) -> Result<PiecewiseLinear, OracleError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(OracleError::DomainError(tau));
    }
    let v = &f.values;
    let ratio = tau / f.dt;
    let w_floor = ratio.floor() as usize;
    let fractional = ratio - w_floor as f64 > GRID_EPS * ratio.max(1.0);
    // Candidates must see the full window inside the domain.
    let last_k = ((v.len() - 1) as f64 - ratio + GRID_EPS).floor();
    if last_k < 0.0 {
        return Ok(f.clone());
    }
    let last_k = last_k as usize;

    // Sliding minimum of v over [k+1, k+w_floor] via a monotone deque of
    // indices with increasing values.
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let push = |deque: &mut std::collections::VecDeque<usize>, i: usize| {
        if i < v.len() {
            while deque.back().is_some_and(|&b| v[b] >= v[i]) {
                deque.pop_back();
            }
            deque.push_back(i);
        }
    };
    for i in 1..=w_floor.min(v.len() - 1) {
        push(&mut deque, i);
    }

    for k in 0..=last_k {
        while deque.front().is_some_and(|&front| front <= k) {
            deque.pop_front();
        }
        let grid_ok = w_floor == 0 || deque.front().is_some_and(|&front| v[front] > v[k]);
        let tip_ok = !fractional || f.eval(k as f64 * f.dt + tau) > v[k];
        if grid_ok && tip_ok {
            let base = v[k];
            let values = v[k..].iter().map(|x| x - base).collect();
            return Ok(PiecewiseLinear { dt: f.dt, values });
        }
        push(&mut deque, k + 1 + w_floor);
    }
    Ok(f.clone())
}

/// A path killed at its first strictly-positive-time zero: evaluates to the
/// underlying path before `t_f` and to zero from `t_f` on. `t_f == None`
/// means no zero occurs on the represented domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Killed {
    pub path: PiecewiseLinear,
    pub t_f: Option<f64>,
}

impl Killed {
    pub fn eval(&self, t: f64) -> f64 {
        match self.t_f {
            Some(tf) if t >= tf => 0.0,
            _ => self.path.eval(t),
        }
    }

    /// Exact integral of the killed path over its whole life.
    pub fn area(&self) -> f64 {
        match self.t_f {
            Some(tf) => self.path.area_to(tf),
            None => self.path.area(),
        }
    }
}

/// The killing operator `H`: locate `t_f = inf{s > 0 : f(s) = 0}` exactly —
/// a breakpoint hitting zero or an interpolated sign change inside a
/// segment — and zero the function from there on.
pub fn kill_at_zero(f: &PiecewiseLinear) -> Killed {
    let v = &f.values;
    if v[0] == 0.0 && (v.len() == 1 || v[1] == 0.0) {
        // Flat at zero from the start: zeros accumulate at 0+.
        return Killed { path: f.clone(), t_f: Some(0.0) };
    }
    let mut t_f = None;
    for j in 1..v.len() {
        if v[j] == 0.0 {
            t_f = Some(j as f64 * f.dt);
            break;
        }
        let (a, b) = (v[j - 1], v[j]);
        if a != 0.0 && (a > 0.0) != (b > 0.0) {
            t_f = Some((j - 1) as f64 * f.dt + f.dt * a / (a - b));
            break;
        }
    }
    Killed { path: f.clone(), t_f }
}

/// Streaming τ-rise search over a ±1 step source. Returns the rebased
/// window `v_j = S_{k*+j} − S_{k*}`, `j = 0..=w` (so `v_0 = 0` and
/// `v_1..=v_w > 0`), or `None` if no rise index `k ≤ d_cap` exists.
/// Memory is `O(w)` regardless of how far the scan runs.
pub(crate) fn find_tau_rise(
    w: usize,
    d_cap: usize,
    next: &mut impl FnMut() -> i8,
) -> Option<Vec<i64>> {
    assert!(w >= 1, "rise window must be nonempty");
    let modn = w + 1;
    let mut ring = vec![0i64; modn]; // ring[i % modn] = S_i for i in [k, k+w]
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();

    let mut s = 0i64;
    for i in 1..=w {
        s += i64::from(next());
        ring[i % modn] = s;
        while deque.back().is_some_and(|&b| ring[b % modn] >= s) {
            deque.pop_back();
        }
        deque.push_back(i);
    }

    for k in 0..=d_cap {
        while deque.front().is_some_and(|&front| front <= k) {
            deque.pop_front();
        }
        let s_k = ring[k % modn];
        let front = *deque.front().expect("window is never empty");
        if ring[front % modn] > s_k {
            let out = (0..=w).map(|j| ring[(k + j) % modn] - s_k).collect();
            return Some(out);
        }
        // Advance: generate S_{k+w+1}, overwriting the slot of S_k.
        let i = k + w + 1;
        let s_new = ring[(i - 1) % modn] + i64::from(next());
        ring[i % modn] = s_new;
        while deque.back().is_some_and(|&b| ring[b % modn] >= s_new) {
            deque.pop_back();
        }
        deque.push_back(i);
    }
    None
}

/// Validate `(τ, m)` and return the integral rise window `w = τm`.
fn rise_window(tau: f64, m: usize) -> Result<usize, OracleError> {
    if !(tau > 0.0) || !tau.is_finite() || m == 0 {
        return Err(OracleError::DomainError(tau));
    }
    let wf = tau * m as f64;
    let w = wf.round();
    if (wf - w).abs() > GRID_EPS * wf.max(1.0) || w < 1.0 {
        // The exact breakpoint search needs the window to be a whole number
        // of lattice steps.
        return Err(OracleError::DomainError(tau));
    }
    Ok(w as usize)
}

/// Sample the killed, shifted, diffusively scaled walk `H(T^{τ+}(Y_m))`.
///
/// The walk is generated lazily: a sliding-window scan locates the rise
/// index `k*` (resolution `m` steps per time unit, search capped at
/// [`W_PLUS_TAU_DOMAIN_FACTOR`]`·τm` steps, [`OracleError::WalkTooShort`]
/// past the cap — resample on that error), then the path is materialized
/// from `k*` until it returns to its start level or `horizon` steps have
/// been emitted, whichever is first. By construction the sample is strictly
/// positive on `(0, τ]`, so the kill time always satisfies `t_f > τ`;
/// `t_f == None` means the return lies beyond the horizon.
pub fn sample_w_plus_tau<R: Rng>(
    tau: f64,
    m: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<Killed, OracleError> {
    let w = rise_window(tau, m)?;
    assert!(horizon >= w, "horizon must cover the rise window");
    let d_cap = W_PLUS_TAU_DOMAIN_FACTOR * w;
    let mut src = StepSource::new(rng);
    let mut next = || src.step();
    let mut vals = find_tau_rise(w, d_cap, &mut next).ok_or(OracleError::WalkTooShort { domain: d_cap })?;

    let mut cur = *vals.last().unwrap();
    while cur > 0 && vals.len() - 1 < horizon {
        cur += i64::from(next());
        vals.push(cur);
    }

    let dt = 1.0 / m as f64;
    let sqrt_m = (m as f64).sqrt();
    let t_f = (cur == 0).then(|| (vals.len() - 1) as f64 * dt);
    let values = vals.into_iter().map(|v| v as f64 / sqrt_m).collect();
    Ok(Killed { path: PiecewiseLinear { dt, values }, t_f })
}

/// Streaming indicator `∫₀^∞ H(T^{τ+}(Y_m)) > λ`, computed in exact integer
/// area units with early exit. Needs no horizon: the alive path sits at
/// integer height ≥ 1, so the doubled area grows by ≥ 1 per step and the
/// query decides itself within `O(λ·m^{3/2})` steps.
pub fn shifted_area_exceeds<R: Rng>(
    tau: f64,
    m: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<bool, OracleError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(OracleError::DomainError(lambda));
    }
    let w = rise_window(tau, m)?;
    let d_cap = W_PLUS_TAU_DOMAIN_FACTOR * w;
    let mut src = StepSource::new(rng);
    let mut next = || src.step();
    let window = find_tau_rise(w, d_cap, &mut next).ok_or(OracleError::WalkTooShort { domain: d_cap })?;
    Ok(shifted_area_exceeds_core(&window, lambda, m, &mut next))
}

/// Area-indicator loop, split out so tests can replay recorded steps.
/// `window` is the rebased rise window from [`find_tau_rise`]; `next`
/// continues the same walk.
pub(crate) fn shifted_area_exceeds_core(
    window: &[i64],
    lambda: f64,
    m: usize,
    next: &mut impl FnMut() -> i8,
) -> bool {
    // Scaled area = A2 / (2 m^{3/2}) where A2 = Σ (v_j + v_{j+1}) exactly.
    let thresh = 2.0 * lambda * (m as f64) * (m as f64).sqrt();
    let mut a2 = 0i64;
    for j in 0..window.len() - 1 {
        a2 += window[j] + window[j + 1];
        if a2 as f64 > thresh {
            return true;
        }
    }
    let mut cur = *window.last().unwrap();
    while cur > 0 {
        let nxt = cur + i64::from(next());
        a2 += cur + nxt;
        cur = nxt;
        if a2 as f64 > thresh {
            return true;
        }
    }
    false
}
