//! Decoded network designs and their JSON file format.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{arc_key, Frequency};
use crate::network::Network;

/// Supplier of one node. Clinics carry no device and are always monthly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub source: String,
    pub mode: String,
    pub frequency: Frequency,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBreakdown {
    pub facility: f64,
    pub transport: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.facility + self.transport
    }
}

/// A network design with its cost. Every clinic and every open hub has one
/// assignment (closed hubs are absent); annual arc flows are keyed `"i,j"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSolution {
    pub assignments: BTreeMap<String, Assignment>,
    pub flows: BTreeMap<String, f64>,
    pub objective: f64,
    pub breakdown: CostBreakdown,
}

#[derive(Debug, Error)]
pub enum SolutionFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

impl NetworkSolution {
    pub fn open_hubs<'a>(&'a self, hubs: &'a [String]) -> impl Iterator<Item = &'a String> + 'a {
        hubs.iter().filter(move |h| self.assignments.contains_key(*h))
    }

    pub fn closed_hubs(&self, hubs: &[String]) -> Vec<String> {
        hubs.iter().filter(|h| !self.assignments.contains_key(*h)).cloned().collect()
    }

    pub fn flow(&self, from: &str, to: &str) -> f64 {
        self.flows.get(&arc_key(from, to)).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionFileError> {
        serde_json::from_str(text).map_err(|e| SolutionFileError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), SolutionFileError> {
        let path = path.as_ref();
        fs::write(path, self.to_json())
            .map_err(|source| SolutionFileError::Io { path: path.display().to_string(), source })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, SolutionFileError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| SolutionFileError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

/// Index-level design used to assemble a [`NetworkSolution`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Design {
    /// Per hub position: `(device, frequency, supplier arc, mode)` when open.
    pub hubs: Vec<Option<(usize, Frequency, usize, usize)>>,
    /// Per clinic position: `(supplier arc, mode)`.
    pub clinics: Vec<(usize, usize)>,
}

impl Design {
    /// Cost of the design from instance parameters.
    pub fn cost(&self, net: &Network) -> CostBreakdown {
        let mut b = CostBreakdown::default();
        for (h, status) in self.hubs.iter().enumerate() {
            if let Some((d, f, arc, mode)) = *status {
                b.facility += net.facility_cost[h][d];
                b.transport += f.trips() * net.arcs[arc].cost[mode];
            }
        }
        for &(arc, mode) in &self.clinics {
            b.transport += Frequency::Monthly.trips() * net.arcs[arc].cost[mode];
        }
        b
    }

    /// Annual volume per arc id obtained by pushing each clinic's demand
    /// up its supplier chain. `None` if the chain of some clinic revisits
    /// a hub or runs through a closed one.
    pub fn flows(&self, net: &Network) -> Option<Vec<f64>> {
        let mut flows = vec![0.0; net.arcs.len()];
        for (c, &(arc, _)) in self.clinics.iter().enumerate() {
            let a_c = net.demand[c];
            let mut arc = arc;
            let mut steps = 0;
            loop {
                flows[arc] += a_c;
                let from = net.arcs[arc].from;
                if from == 0 {
                    break;
                }
                steps += 1;
                if steps > net.n_hubs {
                    return None;
                }
                arc = self.hubs[net.hub_pos(from)]?.2;
            }
        }
        Some(flows)
    }

    /// Builds the solution record. `flows` holds annual volume per arc id.
    pub fn to_solution(&self, net: &Network, flows: &[f64]) -> NetworkSolution {
        let mut assignments = BTreeMap::new();
        for (h, status) in self.hubs.iter().enumerate() {
            if let Some((d, f, arc, mode)) = *status {
                assignments.insert(
                    net.names[net.hub_node(h)].clone(),
                    Assignment {
                        source: net.names[net.arcs[arc].from].clone(),
                        mode: net.modes[mode].clone(),
                        frequency: f,
                        device: Some(net.devices[d].clone()),
                    },
                );
            }
        }
        for (c, &(arc, mode)) in self.clinics.iter().enumerate() {
            assignments.insert(
                net.names[net.clinic_node(c)].clone(),
                Assignment {
                    source: net.names[net.arcs[arc].from].clone(),
                    mode: net.modes[mode].clone(),
                    frequency: Frequency::Monthly,
                    device: None,
                },
            );
        }
        let flows = flows
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-9)
            .map(|(a, &v)| (net.arc_name(a), v))
            .collect();
        let breakdown = self.cost(net);
        NetworkSolution { assignments, flows, objective: breakdown.total(), breakdown }
    }
}
