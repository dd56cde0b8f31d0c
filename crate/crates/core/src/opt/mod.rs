//! Small dense solvers for the dilation and purification subproblems.

pub mod lmi;
pub mod lp;

use serde::{Deserialize, Serialize};

pub use lmi::{lmi_feasible, solve_lmi_max, KktResiduals, LmiProgram, LmiSettings, LmiSolution};
pub use lp::{solve_lp, LinearProgram, LpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}
