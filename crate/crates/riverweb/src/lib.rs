//! # riverweb
//!
//! A Monte Carlo laboratory for a random drainage-network model (Howard's
//! model) on the two-dimensional integer lattice, together with its dual
//! graph and the Brownian limit objects that govern its large-scale
//! behaviour.
//!
//! ## The model
//!
//! Every lattice site `(x, t)` carries two independent random marks: an
//! *openness* bit `B` (Bernoulli with parameter `p`) and a fair `±1`
//! *tie-break* bit `U`. Water at an open site `(x, t)` drains to the open
//! site on row `t + 1` nearest to `x`; when the nearest open sites left and
//! right are equidistant, the tie-break bit of `(x, t)` decides. Iterating
//! this map `h` produces a forest of coalescing channels — a caricature of a
//! river network.
//!
//! For an open site `v` the *k-th generation ancestor set* `C_k(v)` collects
//! the open sites `k` rows below that drain into `v` after exactly `k`
//! steps. Its basic statistics are
//!
//! * `L` — the stream length: the first `k` with `C_k = ∅`,
//! * `D_k = r_k − l_k` — the watershed width at generation `k`,
//! * `#C_k` — the generation count, and `#C = Σ_k #C_k` — the basin area,
//! * `D_max = max{D_k : 0 ≤ k < L}` — the maximal width.
//!
//! ## What the laboratory verifies
//!
//! Under diffusive scaling with the model constant
//! `γ₀²(p) = (1−p)(2−2p+p²) / (p²(2−p)²)` the following limit laws hold,
//! and every one of them is checked here against independent Monte Carlo
//! estimates and conditioned-random-walk oracles:
//!
//! * **Stream-length tail** — `√n · P(L > n) → 1/(γ₀√π)`.
//! * **Width law** — conditionally on `{L > n}`, the scaled width process
//!   `D_k/(γ₀√n)` at time `k/n` converges to `√2 W⁺`, a rescaled Brownian
//!   meander; in particular the terminal width is Rayleigh after dividing
//!   by `√2`.
//! * **Width–area coupling** — `sup_{s ≤ 1} |p·D_n(s) − K_n(s)| → 0`, where
//!   `K_n` is the scaled generation-count process.
//! * **Hack's law** — `log L` against `log #C` has slope `2/3`, and
//!   `log D_max` against `log L` has slope `1/2`.
//! * **Dual increments** — the dual graph's midpoint walk is a martingale
//!   whose increment kernel has the closed form implemented in [`dual`].
//!
//! The reference side lives in [`oracle`]: exact-in-law samplers for the
//! Brownian meander and excursion built from conditioned simple random
//! walks, closed-form reference distributions (Rayleigh, the excursion-max
//! series, the excursion-area tail asymptote), and quadrature for the limit
//! integrals that price cluster tails.
//!
//! ## Layout
//!
//! * [`lattice`] — the lazily evaluated random environment (pure hash of
//!   `(seed, site)`), plus a table-backed field for deterministic fixtures.
//! * [`forward`] — the drainage map `h`, forward paths, ancestor sets and
//!   cluster growth.
//! * [`dual`] — dual vertices at midpoints between consecutive open sites,
//!   the backward map `ĥ`, the increment kernel, and enclosure predicates.
//! * [`scaling`] — `γ₀(p)`, piecewise-linear scaled processes, and the
//!   path-counting functional `ξ_n`.
//! * [`oracle`] — conditioned-walk samplers, reference laws, tabulated
//!   functionals and limit-integral quadrature.
//! * [`stats`] — tail estimators with Wilson intervals, log–log regression,
//!   KS and chi-square comparisons.
//! * [`experiments`] — seeded, replica-parallel experiment drivers with
//!   CSV/JSON artifact emission; everything the `riverweb` binary and the
//!   `examples/` directory run.
//!
//! ## Reproducibility
//!
//! Every estimator is a deterministic function of `(configuration, seed)`.
//! Per-replica seeds are derived by hashing `(master seed, experiment id,
//! replica index)`, reductions are performed in fixed order, and thread
//! count (`RIVERWEB_THREADS`) never changes results — re-runs are
//! byte-identical.

pub mod dual;
pub mod experiments;
pub mod forward;
pub mod lattice;
pub mod oracle;
pub mod scaling;
pub mod stats;

pub use dual::DualSite;
pub use forward::{Cluster, PathTrace};
pub use lattice::{Cell, Field, FieldConfig, Site};
pub use scaling::{gamma0, ScaledProcess};
