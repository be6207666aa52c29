//! Numerical function-space analysis on discretized metric measure spaces.
//!
//! A space is a weighted point cloud split into an interior region (carrying
//! the measure `mu`) and a boundary region (carrying the measure `H`). On top
//! of that this crate provides:
//!
//! * geometric/mass primitives: ball queries, doubling and codimension
//!   exponent estimation, shell masses, a greedy codimension Hausdorff
//!   measure ([`space`]);
//! * generators for the example domains and John/uniform geometry checks
//!   with chain/carrot constructions ([`domains`]);
//! * Besov functionals in both the modulus-of-smoothness and the pair-integral
//!   form, Hajlasz and Poincare gradients, maximal operators and an
//!   inequality verification suite ([`functionals`]);
//! * boundary traces by ball averaging with convergence diagnostics
//!   ([`trace`]);
//! * Whitney covers with a Lipschitz partition of unity ([`whitney`]) and the
//!   two extension operators built on them ([`extension`]);
//! * end-to-end experiments and the frozen-constants protocol
//!   ([`experiments`], [`constants`]).
//!
//! Quadrature contract, used consistently everywhere: an integral over a
//! region is the weighted sum `sum_i w_i f(x_i)` over that region's points,
//! and an average over `B cap region` is the weight-weighted mean over
//! [`space::ball_members`]. Balls are open (strict inequality).

pub mod constants;
pub mod corpus;
pub mod domains;
mod error;
pub mod experiments;
pub mod extension;
pub mod functionals;
pub mod report;
pub mod space;
pub mod trace;
pub mod whitney;

pub use error::{Error, Result};
