//! Ground truth for small instances: exhaustive enumeration of supply
//! forests, and a standalone validator for any [`NetworkSolution`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{arc_key, Frequency, Instance, Violation, STORE};
use crate::network::Network;
use crate::solution::{CostBreakdown, Design, NetworkSolution};

pub const DEFAULT_GUARD: f64 = 1e7;

/// Absolute slack on capacity rows, in annual litres.
const CAPACITY_TOL: f64 = 1e-6;

/// A fully specified network: devices, frequencies, suppliers and modes
/// for every node, plus the implied arc flows.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub design: Design,
    /// Annual volume per arc id.
    pub flows: Vec<f64>,
    pub cost: CostBreakdown,
}

impl Configuration {
    pub fn to_solution(&self, net: &Network) -> NetworkSolution {
        self.design.to_solution(net, &self.flows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    pub configuration: Configuration,
    pub solution: NetworkSolution,
    /// Supply forests examined.
    pub examined: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid instance: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("enumeration size {size:.3e} exceeds the guard {guard:.3e}")]
    GuardExceeded { size: f64, guard: f64 },
    #[error("instance has no feasible configuration")]
    Infeasible,
}

/// Number of supply forests the enumerator may visit: every hub takes one
/// of three states (closed, monthly, quarterly) and picks a supplier among
/// its inbound arcs; every clinic picks a supplier. Device and mode choices
/// are resolved in closed form once flows are known.
pub fn enumeration_size(net: &Network) -> f64 {
    let hubs: f64 = (0..net.n_hubs).map(|h| 3.0_f64.min(1.0 + 2.0 * net.inbound[net.hub_node(h)].len() as f64)).product();
    let sources: f64 = (0..net.n_hubs)
        .map(|h| net.inbound[net.hub_node(h)].len().max(1) as f64)
        .chain((0..net.n_clinics).map(|c| net.inbound[net.clinic_node(c)].len() as f64))
        .product();
    hubs * sources
}

/// Cheapest device able to hold `inflow` at frequency `f` (lowest index on
/// cost ties).
fn best_device(net: &Network, h: usize, f: Frequency, inflow: f64) -> Option<usize> {
    let need = net.buffer_factor * inflow;
    (0..net.n_devices())
        .filter(|&d| net.device_capacity[d] * f.trips() + CAPACITY_TOL >= need)
        .min_by(|&a, &b| net.facility_cost[h][a].total_cmp(&net.facility_cost[h][b]).then(a.cmp(&b)))
}

/// Cheapest mode able to carry `flow` on `arc` at frequency `f`.
fn best_mode(net: &Network, arc: usize, f: Frequency, flow: f64) -> Option<usize> {
    (0..net.n_modes())
        .filter(|&m| net.vehicle_capacity[m] * f.trips() + CAPACITY_TOL >= flow)
        .min_by(|&a, &b| net.arcs[arc].cost[a].total_cmp(&net.arcs[arc].cost[b]).then(a.cmp(&b)))
}

fn better(cost: f64, design: &Design, best: &Option<(f64, Design, Vec<f64>)>) -> bool {
    match best {
        None => true,
        Some((b, bd, _)) => {
            let tie = 1e-9 * b.abs().max(1.0);
            cost < b - tie || (cost <= b + tie && design < bd)
        }
    }
}

/// Exhaustive minimum over all acyclic supply forests rooted at the store.
/// Ties are broken towards the lexicographically smallest design.
pub fn oracle_enumerate(inst: &Instance) -> Result<OracleResult, OracleError> {
    oracle_enumerate_with_guard(inst, DEFAULT_GUARD)
}

pub fn oracle_enumerate_with_guard(inst: &Instance, guard: f64) -> Result<OracleResult, OracleError> {
    let net = Network::new(inst).map_err(OracleError::InvalidInstance)?;
    let size = enumeration_size(&net);
    if size > guard {
        return Err(OracleError::GuardExceeded { size, guard });
    }
    let (h_n, c_n) = (net.n_hubs, net.n_clinics);
    let mut best: Option<(f64, Design, Vec<f64>)> = None;
    let mut examined = 0u64;

    // Hub states: 0 closed, 1 monthly, 2 quarterly.
    let mut status = vec![0u8; h_n];
    loop {
        let open = |node: usize| node == 0 || (net.is_hub(node) && status[net.hub_pos(node)] > 0);
        let hub_choices: Vec<Vec<usize>> = (0..h_n)
            .map(|h| {
                if status[h] == 0 {
                    vec![usize::MAX]
                } else {
                    net.inbound[net.hub_node(h)].iter().copied().filter(|&a| open(net.arcs[a].from)).collect()
                }
            })
            .collect();
        let clinic_choices: Vec<Vec<usize>> = (0..c_n)
            .map(|c| net.inbound[net.clinic_node(c)].iter().copied().filter(|&a| open(net.arcs[a].from)).collect())
            .collect();

        if hub_choices.iter().chain(&clinic_choices).all(|v| !v.is_empty()) {
            let mut hub_pick = vec![0usize; h_n];
            loop {
                let hub_arc: Vec<usize> = (0..h_n).map(|h| hub_choices[h][hub_pick[h]]).collect();
                if hub_forest_is_acyclic(&net, &hub_arc) {
                    let mut clinic_pick = vec![0usize; c_n];
                    loop {
                        examined += 1;
                        let clinic_arc: Vec<usize> = (0..c_n).map(|c| clinic_choices[c][clinic_pick[c]]).collect();
                        if let Some((cost, design, flows)) = price_forest(&net, &status, &hub_arc, &clinic_arc) {
                            if better(cost, &design, &best) {
                                best = Some((cost, design, flows));
                            }
                        }
                        if !advance(&mut clinic_pick, |c| clinic_choices[c].len()) {
                            break;
                        }
                    }
                }
                if !advance(&mut hub_pick, |h| hub_choices[h].len()) {
                    break;
                }
            }
        }
        if !advance_status(&mut status) {
            break;
        }
    }

    let (objective, design, flows) = best.ok_or(OracleError::Infeasible)?;
    let cost = design.cost(&net);
    let configuration = Configuration { design, flows, cost };
    let solution = configuration.to_solution(&net);
    Ok(OracleResult { objective, configuration, solution, examined })
}

/// Odometer step over mixed radices; false once it wraps around.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn advance_status(status: &mut [u8]) -> bool {
    for s in status.iter_mut().rev() {
        *s += 1;
        if *s < 3 {
            return true;
        }
        *s = 0;
    }
    false
}

/// `hub_arc[h]` is `usize::MAX` for closed hubs.
fn hub_forest_is_acyclic(net: &Network, hub_arc: &[usize]) -> bool {
    (0..net.n_hubs).all(|start| {
        let mut node = net.hub_node(start);
        for _ in 0..=net.n_hubs {
            if node == 0 {
                return true;
            }
            let arc = hub_arc[net.hub_pos(node)];
            if arc == usize::MAX {
                return true;
            }
            node = net.arcs[arc].from;
        }
        false
    })
}

fn price_forest(
    net: &Network,
    status: &[u8],
    hub_arc: &[usize],
    clinic_arc: &[usize],
) -> Option<(f64, Design, Vec<f64>)> {
    let mut flows = vec![0.0; net.arcs.len()];
    let mut clinics = Vec::with_capacity(net.n_clinics);
    let mut cost = 0.0;
    for (c, &arc) in clinic_arc.iter().enumerate() {
        let a_c = net.demand[c];
        let mode = best_mode(net, arc, Frequency::Monthly, a_c)?;
        cost += Frequency::Monthly.trips() * net.arcs[arc].cost[mode];
        clinics.push((arc, mode));
        let mut arc = arc;
        loop {
            flows[arc] += a_c;
            let from = net.arcs[arc].from;
            if from == 0 {
                break;
            }
            arc = hub_arc[net.hub_pos(from)];
        }
    }
    let mut hubs = vec![None; net.n_hubs];
    for h in 0..net.n_hubs {
        if status[h] == 0 {
            continue;
        }
        let f = Frequency::from_code(status[h]).expect("status is 1 or 2");
        let arc = hub_arc[h];
        let inflow = flows[arc];
        let device = best_device(net, h, f, inflow)?;
        let mode = best_mode(net, arc, f, inflow)?;
        cost += net.facility_cost[h][device] + f.trips() * net.arcs[arc].cost[mode];
        hubs[h] = Some((device, f, arc, mode));
    }
    Some((cost, Design { hubs, clinics }, flows))
}

/// Why a raw configuration falls outside the oracle's feasible set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    ClosedSupplier,
    Cycle,
    Storage(usize),
    Vehicle(usize),
}

/// Feasibility check used by the enumerator, applied to an arbitrary
/// design: every supplier is the store or an open hub, the hub supply
/// graph is acyclic, and capacities hold for the propagated flows.
pub fn check_configuration(net: &Network, design: &Design) -> Result<Vec<f64>, Infeasibility> {
    let open = |node: usize| node == 0 || (net.is_hub(node) && design.hubs[net.hub_pos(node)].is_some());
    let hub_arc: Vec<usize> = design.hubs.iter().map(|s| s.map_or(usize::MAX, |s| s.2)).collect();
    if hub_arc.iter().filter(|&&a| a != usize::MAX).any(|&a| !open(net.arcs[a].from))
        || design.clinics.iter().any(|&(a, _)| !open(net.arcs[a].from))
    {
        return Err(Infeasibility::ClosedSupplier);
    }
    if !hub_forest_is_acyclic(net, &hub_arc) {
        return Err(Infeasibility::Cycle);
    }
    let flows = design.flows(net).ok_or(Infeasibility::Cycle)?;
    for (c, &(arc, mode)) in design.clinics.iter().enumerate() {
        if net.vehicle_capacity[mode] * Frequency::Monthly.trips() + CAPACITY_TOL < net.demand[c] {
            return Err(Infeasibility::Vehicle(arc));
        }
    }
    for (h, status) in design.hubs.iter().enumerate() {
        if let Some((d, f, arc, mode)) = *status {
            if net.device_capacity[d] * f.trips() + CAPACITY_TOL < net.buffer_factor * flows[arc] {
                return Err(Infeasibility::Storage(h));
            }
            if net.vehicle_capacity[mode] * f.trips() + CAPACITY_TOL < flows[arc] {
                return Err(Infeasibility::Vehicle(arc));
            }
        }
    }
    Ok(flows)
}

/// Every raw configuration of `net`: each hub closed or open with any
/// device, frequency, inbound arc and mode; each clinic with any inbound
/// arc and mode. Cyclic and disconnected designs are included, labelled by
/// [`check_configuration`].
pub fn enumerate_configurations(net: &Network) -> Vec<(Design, Result<Vec<f64>, Infeasibility>)> {
    let hub_options: Vec<Vec<Option<(usize, Frequency, usize, usize)>>> = (0..net.n_hubs)
        .map(|h| {
            let mut v = vec![None];
            for d in 0..net.n_devices() {
                for f in Frequency::ALL {
                    for &a in &net.inbound[net.hub_node(h)] {
                        for m in 0..net.n_modes() {
                            v.push(Some((d, f, a, m)));
                        }
                    }
                }
            }
            v
        })
        .collect();
    let clinic_options: Vec<Vec<(usize, usize)>> = (0..net.n_clinics)
        .map(|c| {
            net.inbound[net.clinic_node(c)].iter().flat_map(|&a| (0..net.n_modes()).map(move |m| (a, m))).collect()
        })
        .collect();
    let mut out = Vec::new();
    if clinic_options.iter().any(|o| o.is_empty()) {
        return out;
    }
    let mut hp = vec![0usize; net.n_hubs];
    loop {
        let mut cp = vec![0usize; net.n_clinics];
        loop {
            let design = Design {
                hubs: (0..net.n_hubs).map(|h| hub_options[h][hp[h]]).collect(),
                clinics: (0..net.n_clinics).map(|c| clinic_options[c][cp[c]]).collect(),
            };
            let label = check_configuration(net, &design);
            out.push((design, label));
            if !advance(&mut cp, |c| clinic_options[c].len()) {
                break;
            }
        }
        if !advance(&mut hp, |h| hub_options[h].len()) {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One finding of [`validate_solution`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub code: &'static str,
    pub subject: String,
    pub detail: String,
    pub severity: Severity,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.code, self.subject)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

/// Formats a quantity with at most six decimals and no trailing zeros.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Checks `sol` against the instance from its assignments alone: flows are
/// re-derived from demands, every constraint family is checked with named
/// residuals, and the cost is recomputed. Zero-flow supply cycles among
/// hubs are reported as warnings.
pub fn validate_solution(inst: &Instance, sol: &NetworkSolution) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut error = |code: &'static str, subject: String, detail: String| {
        issues.push(Issue { code, subject, detail, severity: Severity::Error });
    };
    let arcs: BTreeSet<(&str, &str)> = inst.arcs.iter().map(|(i, j)| (i.as_str(), j.as_str())).collect();
    let is_node = |id: &str| id == STORE || inst.is_hub(id) || inst.is_clinic(id);

    // Supplier pointers for usable assignments.
    let mut supplier: BTreeMap<&str, &str> = BTreeMap::new();
    for (node, a) in &sol.assignments {
        if !inst.is_hub(node) && !inst.is_clinic(node) {
            error("UnknownNode", node.clone(), String::new());
            continue;
        }
        if !is_node(&a.source) {
            error("UnknownNode", a.source.clone(), format!("source of {node}"));
            continue;
        }
        if inst.vehicle_capacity.get(&a.mode).is_none() {
            error("UnknownMode", node.clone(), a.mode.clone());
            continue;
        }
        if !arcs.contains(&(a.source.as_str(), node.as_str())) {
            error("MissingArc", arc_key(&a.source, node), String::new());
            continue;
        }
        if inst.is_clinic(node) {
            if a.frequency != Frequency::Monthly {
                error("ClinicFrequency", node.clone(), format!("{} != 1", a.frequency.code()));
            }
            if a.device.is_some() {
                error("ClinicDevice", node.clone(), String::new());
            }
        } else {
            match &a.device {
                None => error("MissingDevice", node.clone(), String::new()),
                Some(d) if !inst.device_capacity.contains_key(d) => error("UnknownDevice", node.clone(), d.clone()),
                _ => {}
            }
        }
        supplier.insert(node.as_str(), a.source.as_str());
    }
    for c in &inst.clinics {
        if !sol.assignments.contains_key(c) {
            error("ClinicUnassigned", c.clone(), String::new());
        }
    }
    for (node, src) in &supplier {
        if inst.is_hub(src) && !supplier.contains_key(src) {
            error("SourceNotOpen", node.to_string(), format!("supplier {src} is closed"));
        }
    }

    // Derived flows: each clinic's demand travels up its supplier chain.
    let mut derived: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut hub_flow: BTreeMap<&str, f64> = BTreeMap::new();
    for c in &inst.clinics {
        let Some(&first) = supplier.get(c.as_str()) else { continue };
        let a_c = inst.demand.get(c).copied().unwrap_or(0.0);
        let (mut node, mut src) = (c.as_str(), first);
        let mut seen = BTreeSet::new();
        loop {
            *derived.entry((src.to_string(), node.to_string())).or_default() += a_c;
            if src == STORE {
                break;
            }
            *hub_flow.entry(src).or_default() += a_c;
            if !seen.insert(src) {
                error("Disconnected", c.clone(), format!("supply chain revisits {src}"));
                break;
            }
            match supplier.get(src) {
                Some(&next) => {
                    node = src;
                    src = next;
                }
                None => break,
            }
        }
    }

    // Hubs that never reach the store and carry no flow form zero-flow cycles.
    let mut cyclic_hubs = BTreeSet::new();
    for h in inst.hubs.iter().filter(|h| supplier.contains_key(h.as_str())) {
        let mut node = h.as_str();
        let mut seen = BTreeSet::new();
        while let Some(&src) = supplier.get(node) {
            if src == STORE || !seen.insert(node) {
                break;
            }
            node = src;
        }
        if seen.contains(node) && hub_flow.get(h.as_str()).copied().unwrap_or(0.0) <= 0.0 {
            cyclic_hubs.insert(h.clone());
        }
    }
    if !cyclic_hubs.is_empty() {
        issues.push(Issue {
            code: "ZeroFlowCycle",
            subject: cyclic_hubs.into_iter().collect::<Vec<_>>().join("-"),
            detail: "hubs supply each other with no flow".into(),
            severity: Severity::Warning,
        });
    }

    let mut error = |code: &'static str, subject: String, detail: String| {
        issues.push(Issue { code, subject, detail, severity: Severity::Error });
    };
    for ((i, j), &x) in &derived {
        let claimed = sol.flow(i, j);
        if !close(claimed, x, 1e-6) {
            error("FlowMismatch", arc_key(i, j), format!("{} != {}", num(claimed), num(x)));
        }
    }
    for (key, &x) in &sol.flows {
        let pair = key.split_once(',').map(|(i, j)| (i.to_string(), j.to_string()));
        match pair {
            Some(p) if derived.contains_key(&p) => {}
            _ if x.abs() <= 1e-6 => {}
            _ => error("FlowMismatch", key.clone(), format!("{} != 0", num(x))),
        }
    }

    // Capacities per arc and hub, and the recomputed cost.
    let mut facility = 0.0;
    let mut transport = 0.0;
    for (node, a) in &sol.assignments {
        if !supplier.contains_key(node.as_str()) {
            continue;
        }
        let x = derived.get(&(a.source.clone(), node.clone())).copied().unwrap_or(0.0);
        let n = a.frequency.trips();
        let v = inst.vehicle_capacity[&a.mode];
        if x > v * n + CAPACITY_TOL {
            error("VehicleCapacity", arc_key(&a.source, node), format!("{} > {}", num(x / n), num(v)));
        }
        if let Some(t) = inst.transport_cost.get(&format!("{},{},{}", a.source, node, a.mode)) {
            transport += n * t;
        }
        if inst.is_hub(node) {
            if let Some(d) = a.device.as_ref().filter(|d| inst.device_capacity.contains_key(*d)) {
                let s = inst.device_capacity[d];
                let need = inst.buffer_factor * x;
                if need > s * n + CAPACITY_TOL {
                    error("StorageCapacity", node.clone(), format!("{} > {}", num(need / n), num(s)));
                }
                facility += inst.facility_cost.get(&format!("{node},{d}")).copied().unwrap_or(0.0);
            }
        }
    }
    let total = facility + transport;
    if !close(sol.objective, total, 1e-6)
        || !close(sol.breakdown.facility, facility, 1e-6)
        || !close(sol.breakdown.transport, transport, 1e-6)
    {
        error("CostMismatch", "objective".into(), format!("{} != {}", num(sol.objective), num(total)));
    }
    issues
}

pub fn has_errors(issues: &[Issue]) -> bool {
    issues.iter().any(|i| i.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny_1;

    #[test]
    fn tiny_1_optimum_is_hub_monthly() {
        let r = oracle_enumerate(&tiny_1()).unwrap();
        assert_eq!(r.objective, 114.0);
        let h1 = &r.solution.assignments["h1"];
        assert_eq!((h1.frequency, h1.device.as_deref()), (Frequency::Monthly, Some("d1")));
        assert_eq!(r.solution.assignments["c1"].source, "h1");
        assert!(validate_solution(&tiny_1(), &r.solution).is_empty());
    }

    #[test]
    fn larger_storage_makes_quarterly_hub_optimal() {
        let mut inst = tiny_1();
        inst.device_capacity.insert("d1".into(), 32.0);
        let r = oracle_enumerate(&inst).unwrap();
        assert_eq!(r.objective, 82.0);
        assert_eq!(r.solution.assignments["h1"].frequency, Frequency::Quarterly);
        assert_eq!(r.solution.assignments["c1"].frequency, Frequency::Monthly);
    }

    #[test]
    fn costly_hub_leaves_direct_service() {
        let mut inst = tiny_1();
        inst.facility_cost.insert("h1,d1".into(), 40.0);
        let r = oracle_enumerate(&inst).unwrap();
        assert_eq!(r.objective, 120.0);
        assert!(!r.solution.assignments.contains_key("h1"));
    }

    #[test]
    fn single_clinic_without_hubs() {
        let mut inst = tiny_1();
        inst.hubs.clear();
        inst.arcs = vec![("0".into(), "c1".into())];
        inst.transport_cost.retain(|k, _| k == "0,c1,m1");
        inst.facility_cost.clear();
        let r = oracle_enumerate(&inst).unwrap();
        assert_eq!(r.objective, 120.0);
        assert_eq!(r.examined, 1);
    }

    #[test]
    fn infeasible_and_guard_are_distinct() {
        let mut inst = tiny_1();
        inst.demand.insert("c1".into(), 1e6);
        assert_eq!(oracle_enumerate(&inst).unwrap_err(), OracleError::Infeasible);
        assert!(matches!(
            oracle_enumerate_with_guard(&tiny_1(), 1.0),
            Err(OracleError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn quarterly_claim_breaks_storage() {
        let inst = tiny_1();
        let mut sol = oracle_enumerate(&inst).unwrap().solution;
        sol.assignments.get_mut("h1").unwrap().frequency = Frequency::Quarterly;
        sol.breakdown.transport = 4.0 * 4.0 + 12.0 * 3.0;
        sol.objective = 30.0 + sol.breakdown.transport;
        let issues = validate_solution(&inst, &sol);
        assert_eq!(issues.len(), 1, "{issues:?}");
        assert_eq!(issues[0].to_string(), "StorageCapacity(h1): 31.25 > 30");
    }

    #[test]
    fn missing_clinic_supplier() {
        let inst = tiny_1();
        let mut sol = oracle_enumerate(&inst).unwrap().solution;
        sol.assignments.remove("c1");
        sol.flows.clear();
        sol.breakdown = CostBreakdown { facility: 30.0, transport: 48.0 };
        sol.objective = 78.0;
        let issues = validate_solution(&inst, &sol);
        assert_eq!(issues.iter().map(|i| i.to_string()).collect::<Vec<_>>(), vec!["ClinicUnassigned(c1)"]);
    }

    #[test]
    fn cost_mismatch_is_reported() {
        let inst = tiny_1();
        let mut sol = oracle_enumerate(&inst).unwrap().solution;
        sol.objective = 113.0;
        let issues = validate_solution(&inst, &sol);
        assert_eq!(issues[0].code, "CostMismatch");
    }

    #[test]
    fn tiny_1_raw_configurations() {
        let net = Network::new(&tiny_1()).unwrap();
        let all = enumerate_configurations(&net);
        assert_eq!(all.len(), 6);
        assert_eq!(all.iter().filter(|(_, l)| l.is_ok()).count(), 4);
    }
}
