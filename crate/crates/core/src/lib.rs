//! Globally optimal steady-state mean-variance policies for finite unichain
//! Markov decision processes.
//!
//! The combined objective `β σ^d − μ^d` (long-run variance against long-run
//! mean) is not amenable to dynamic programming. Replacing the mean inside the
//! variance by a free pseudo mean `y` yields, for each `y`, a standard
//! average-cost MDP `M(y)`; the optimum of the original problem is the minimum
//! over `y` of the optimal value of `M(y)`. [`global::solve_global`] searches
//! the `y` axis by repeatedly solving `M(y)` and discarding intervals of means
//! whose policies are provably dominated.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision instantiation.
//!
//! ```
//! use mvmdp::{inventory, global};
//!
//! let mdp = inventory::build_inventory_mdp::<f64>(&inventory::InventoryParams::default()).unwrap();
//! let report = global::solve_global(&mdp, &global::SolveOptions::default()).unwrap();
//! assert!((report.objective - 4.5).abs() < 1e-3);
//! ```

pub mod avg;
pub mod error;
pub mod global;
pub mod interval;
pub mod inventory;
pub mod linalg;
pub mod mdp;
pub mod pseudo;
pub mod scalar;
pub mod sensitivity;

pub use error::{MdpError, Result};
pub use global::{Algorithm, SolveOptions, SolveReport};
pub use interval::{Interval, IntervalSet};
pub use mdp::{EvaluatedPolicy, Mdp, ObjectiveMode, Policy, RewardBounds};
pub use scalar::Scalar;

pub type Mdp64 = Mdp<f64>;
pub type Mdp32 = Mdp<f32>;
pub type EvaluatedPolicy64 = EvaluatedPolicy<f64>;
pub type SolveOptions64 = SolveOptions<f64>;
pub type SolveReport64 = SolveReport<f64>;
pub type IntervalSet64 = IntervalSet<f64>;
pub type CurveSegment64 = sensitivity::CurveSegment<f64>;
