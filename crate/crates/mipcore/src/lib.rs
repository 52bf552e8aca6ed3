//! Exact solver substrate for small and medium binary MIPs. A bounded
//! two-phase primal simplex drives a branch-and-bound search over the
//! binary variables; models travel in and out as fixed-format MPS.

pub mod bnb;
pub mod config;
pub mod error;
pub mod lp;
pub mod model;
pub mod mps;

pub use bnb::{solve_mip, solve_mip_with_start, BnbResult, BnbStatus, BoundSample};
pub use config::SolveConfig;
pub use error::{ModelError, MpsError};
pub use lp::{solve_lp, LpResult, LpSolver, LpStatus};
pub use model::{Constraint, MipModel, Sense, VarKind, Variable};
pub use mps::{export_mps, import_mps, read_mps, write_mps};
