use std::time::Duration;

/// Tolerances and limits shared by the LP and branch-and-bound solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Absolute tolerance on constraint residuals.
    pub feasibility_tol: f64,
    /// Distance from {0, 1} below which a binary counts as integral.
    pub integrality_tol: f64,
    /// Relative gap at which a node is pruned against the incumbent.
    pub relative_gap: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Number of LP workers used by branch-and-bound.
    pub threads: usize,
    /// When set with `threads > 1`, nodes are still processed in a fixed
    /// batch order so repeated runs agree.
    pub deterministic: bool,
    /// Rounds of Gomory cuts added at the root before branching.
    pub cut_rounds: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-6,
            integrality_tol: 1e-6,
            relative_gap: 1e-9,
            node_limit: None,
            time_limit: None,
            threads: 1,
            deterministic: true,
            cut_rounds: 20,
        }
    }
}

impl SolveConfig {
    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = Some(limit);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }
}
