//! Exact solution of the full model by branch-and-bound.

use std::time::Duration;

use mipcore::{solve_mip_with_start, BnbResult, BnbStatus, MipModel, SolveConfig};
use thiserror::Error;

use crate::formulation::{add_strengthening_rows, build_for_network, decode_for_network, encode_design, DecodeError, VarIndex};
use crate::instance::{Frequency, Instance, Violation};
use crate::network::Network;
use crate::solution::{Design, NetworkSolution};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid instance: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("solver returned an undecodable vector: {0}")]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Clone)]
pub struct ExactOutcome {
    /// Best design found; `None` when the model is infeasible or no
    /// incumbent was found before a limit.
    pub solution: Option<NetworkSolution>,
    pub status: BnbStatus,
    pub best_bound: f64,
    pub nodes: usize,
    pub wall_time: Duration,
    pub binaries: usize,
}

impl ExactOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == BnbStatus::Optimal
    }
}

/// The model handed to the branch-and-bound: the full formulation plus
/// rows implied by it (see [`add_strengthening_rows`]).
pub fn solver_model(net: &Network) -> (MipModel, VarIndex) {
    let (model, idx) = build_for_network(net);
    (add_strengthening_rows(net, &model, &idx), idx)
}

/// Every clinic served straight from the store by its cheapest adequate
/// mode. `None` when some clinic has no such arc.
pub fn direct_design(net: &Network) -> Option<Design> {
    let clinics = (0..net.n_clinics)
        .map(|c| {
            let arc = net.arc(0, net.clinic_node(c))?;
            let mode = (0..net.n_modes())
                .filter(|&m| net.vehicle_capacity[m] * Frequency::Monthly.trips() >= net.demand[c])
                .min_by(|&a, &b| net.arcs[arc].cost[a].total_cmp(&net.arcs[arc].cost[b]))?;
            Some((arc, mode))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Design { hubs: vec![None; net.n_hubs], clinics })
}

pub fn solve_exact(inst: &Instance, cfg: &SolveConfig) -> Result<ExactOutcome, SolveError> {
    let net = Network::new(inst).map_err(SolveError::InvalidInstance)?;
    let (model, idx) = solver_model(&net);
    let start = direct_design(&net).and_then(|d| Some(encode_design(&idx, &d, &d.flows(&net)?)));
    let r = solve_mip_with_start(&model, cfg, start.as_deref());
    outcome(&net, &idx, r)
}

fn outcome(net: &Network, idx: &VarIndex, r: BnbResult) -> Result<ExactOutcome, SolveError> {
    let solution = match &r.x {
        Some(x) => Some(decode_for_network(net, idx, x)?),
        None => None,
    };
    Ok(ExactOutcome {
        solution,
        status: r.status,
        best_bound: r.best_bound,
        nodes: r.nodes,
        wall_time: r.wall_time,
        binaries: idx.binary_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny_1;

    #[test]
    fn tiny_1_exact() {
        let out = solve_exact(&tiny_1(), &SolveConfig::default()).unwrap();
        assert!(out.is_optimal());
        let sol = out.solution.unwrap();
        assert!((sol.objective - 114.0).abs() < 1e-9);
        assert_eq!(sol.assignments["h1"].frequency, Frequency::Monthly);
    }

    #[test]
    fn tiny_1_with_costly_hub() {
        let mut inst = tiny_1();
        inst.facility_cost.insert("h1,d1".into(), 40.0);
        let sol = solve_exact(&inst, &SolveConfig::default()).unwrap().solution.unwrap();
        assert!((sol.objective - 120.0).abs() < 1e-9);
        assert!(!sol.assignments.contains_key("h1"));
    }
}
