//! Budgeted defense allocation on graphs with neighbor resource sharing and
//! two-level defense thresholds.
//!
//! An instance is an undirected weighted graph where each node carries two
//! thresholds and two attack values, plus a divisible budget. [`model`]
//! defines the attacker best-response semantics; [`solvers`] provides exact
//! polynomial algorithms for the single-threshold and isolated classes, a
//! 2-approximate resource-augmentation solver for the general case, a greedy
//! baseline, and an exponential brute force used as the exactness oracle.
//! [`instances`] has the adversarial fixtures, a hardness-reduction encoder
//! from DNF formulas, a seeded random generator, and the file formats;
//! [`cli`] wires everything into the `netdefend` binary.

pub mod cli;
pub mod instances;
pub mod lp;
pub mod maxflow;
pub mod model;
pub mod solvers;

pub use instances::{DnfFormula, GeneratorParams, InstanceError};
pub use model::{AttackReport, DefenseNetwork, DefendingStrategy, ModelError, PowerProfile};
pub use solvers::{Algorithm, SolveReport, SolverError};
