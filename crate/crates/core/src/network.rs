//! Index-based view of a validated [`Instance`] used by the solvers.
//!
//! Node 0 is the store, nodes `1..=H` are hubs in instance order and
//! `H+1..=H+C` are clinics.

use std::collections::HashMap;

use crate::instance::{arc_key, facility_key, transport_key, validate_instance, Instance, Violation, STORE};

#[derive(Debug, Clone)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    /// Round-trip cost per mode.
    pub cost: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub names: Vec<String>,
    pub modes: Vec<String>,
    pub devices: Vec<String>,
    pub n_hubs: usize,
    pub n_clinics: usize,
    pub arcs: Vec<Arc>,
    /// Arc ids entering each node.
    pub inbound: Vec<Vec<usize>>,
    /// Annual demand per clinic (clinic order, not node order).
    pub demand: Vec<f64>,
    pub vehicle_capacity: Vec<f64>,
    pub device_capacity: Vec<f64>,
    /// `facility_cost[h][d]` for hub position `h` (0-based).
    pub facility_cost: Vec<Vec<f64>>,
    pub buffer_factor: f64,
    node_of: HashMap<String, usize>,
    arc_of: HashMap<(usize, usize), usize>,
}

impl Network {
    pub fn new(inst: &Instance) -> Result<Self, Vec<Violation>> {
        let violations = validate_instance(inst);
        if !violations.is_empty() {
            return Err(violations);
        }
        let mut names = vec![STORE.to_string()];
        names.extend(inst.hubs.iter().cloned());
        names.extend(inst.clinics.iter().cloned());
        let node_of: HashMap<String, usize> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

        let mut arcs = Vec::with_capacity(inst.arcs.len());
        let mut inbound = vec![Vec::new(); names.len()];
        let mut arc_of = HashMap::new();
        for (i, j) in &inst.arcs {
            let (from, to) = (node_of[i], node_of[j]);
            let cost = inst.modes.iter().map(|m| inst.transport_cost[&transport_key(i, j, m)]).collect();
            inbound[to].push(arcs.len());
            arc_of.insert((from, to), arcs.len());
            arcs.push(Arc { from, to, cost });
        }
        Ok(Self {
            n_hubs: inst.hubs.len(),
            n_clinics: inst.clinics.len(),
            modes: inst.modes.clone(),
            devices: inst.devices.clone(),
            demand: inst.clinics.iter().map(|c| inst.demand[c]).collect(),
            vehicle_capacity: inst.modes.iter().map(|m| inst.vehicle_capacity[m]).collect(),
            device_capacity: inst.devices.iter().map(|d| inst.device_capacity[d]).collect(),
            facility_cost: inst
                .hubs
                .iter()
                .map(|h| inst.devices.iter().map(|d| inst.facility_cost[&facility_key(h, d)]).collect())
                .collect(),
            buffer_factor: inst.buffer_factor,
            names,
            arcs,
            inbound,
            node_of,
            arc_of,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_devices(&self) -> usize {
        self.devices.len()
    }

    pub fn is_hub(&self, node: usize) -> bool {
        (1..=self.n_hubs).contains(&node)
    }

    pub fn is_clinic(&self, node: usize) -> bool {
        node > self.n_hubs && node < self.names.len()
    }

    /// Node index of hub position `h`.
    pub fn hub_node(&self, h: usize) -> usize {
        1 + h
    }

    pub fn clinic_node(&self, c: usize) -> usize {
        1 + self.n_hubs + c
    }

    pub fn hub_pos(&self, node: usize) -> usize {
        node - 1
    }

    pub fn clinic_pos(&self, node: usize) -> usize {
        node - 1 - self.n_hubs
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.node_of.get(name).copied()
    }

    pub fn arc(&self, from: usize, to: usize) -> Option<usize> {
        self.arc_of.get(&(from, to)).copied()
    }

    pub fn mode(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m == name)
    }

    pub fn device(&self, name: &str) -> Option<usize> {
        self.devices.iter().position(|d| d == name)
    }

    pub fn arc_name(&self, a: usize) -> String {
        arc_key(&self.names[self.arcs[a].from], &self.names[self.arcs[a].to])
    }

    pub fn hub_inbound_arcs(&self) -> usize {
        (1..=self.n_hubs).map(|n| self.inbound[n].len()).sum()
    }

    pub fn clinic_inbound_arcs(&self) -> usize {
        (self.n_hubs + 1..self.n_nodes()).map(|n| self.inbound[n].len()).sum()
    }
}
