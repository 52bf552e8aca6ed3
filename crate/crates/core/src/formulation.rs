//! The network design MIP: variables, constraint families, restriction
//! rows for the cyclic heuristic, and decoding of solver vectors.
//!
//! Variables:
//! - `Z_i_d_f` hub `i` open with device `d` at frequency `f`;
//! - `Y_i_j_m_f` supply of `j` from `i` by mode `m` (clinic arcs only carry
//!   `f = 1`, clinics being replenished monthly);
//! - `X_i_j` annual volume on arc `i -> j`.
//!
//! Rows `C2_j` .. `C9_j` follow the numbering of the constraint families;
//! restriction rows are `RF_i` (frequencies) and `RL_i` (locations).

use mipcore::{MipModel, Sense, VarKind};
use serde::Serialize;
use thiserror::Error;

use crate::instance::{Frequency, Instance, Violation};
use crate::network::Network;
use crate::solution::{Design, NetworkSolution};

pub const FREQUENCY_GROUP: &str = "RF";
pub const LOCATION_GROUP: &str = "RL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    X { arc: usize },
    Y { arc: usize, mode: usize, freq: Frequency },
    Z { hub: usize, device: usize, freq: Frequency },
}

/// Bidirectional map between model variable ids and `X`/`Y`/`Z` indices.
#[derive(Debug, Clone)]
pub struct VarIndex {
    x: Vec<usize>,
    y: Vec<Vec<[Option<usize>; 2]>>,
    z: Vec<Vec<[usize; 2]>>,
    refs: Vec<VarRef>,
    hub_names: Vec<String>,
    binaries: usize,
}

impl VarIndex {
    pub fn x(&self, arc: usize) -> usize {
        self.x[arc]
    }

    pub fn y(&self, arc: usize, mode: usize, freq: Frequency) -> Option<usize> {
        self.y[arc][mode][freq.index()]
    }

    pub fn z(&self, hub: usize, device: usize, freq: Frequency) -> usize {
        self.z[hub][device][freq.index()]
    }

    pub fn var(&self, id: usize) -> VarRef {
        self.refs[id]
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn binary_count(&self) -> usize {
        self.binaries
    }

    pub fn continuous_count(&self) -> usize {
        self.x.len()
    }

    pub fn n_hubs(&self) -> usize {
        self.z.len()
    }

    /// `Z` ids of `hub` at frequency `freq`, one per device.
    pub fn hub_vars(&self, hub: usize, freq: Frequency) -> Vec<usize> {
        self.z[hub].iter().map(|z| z[freq.index()]).collect()
    }

    /// Open/closed vector `l` and frequency vector `f` read off the `Z`
    /// values of `x` (entries of `f` are 0 for closed hubs).
    pub fn hub_status(&self, x: &[f64]) -> (Vec<u8>, Vec<u8>) {
        let mut l = vec![0u8; self.n_hubs()];
        let mut f = vec![0u8; self.n_hubs()];
        for (h, devices) in self.z.iter().enumerate() {
            for freq in Frequency::ALL {
                if devices.iter().any(|z| x[z[freq.index()]] > 0.5) {
                    l[h] = 1;
                    f[h] = freq.code();
                }
            }
        }
        (l, f)
    }
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("invalid instance: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("restriction vector has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("entry {value} for hub {hub} is out of range")]
    EntryOutOfRange { hub: String, value: u8 },
}

/// Closed-form variable and row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Program1Size {
    pub binaries: usize,
    pub continuous: usize,
    /// Rows per family `(2)..(9)`.
    pub rows: [usize; 8],
}

impl Program1Size {
    pub fn of(net: &Network) -> Self {
        let (h, c, m, d) = (net.n_hubs, net.n_clinics, net.n_modes(), net.n_devices());
        let a = net.arcs.len();
        Self {
            binaries: h * d * 2 + net.hub_inbound_arcs() * m * 2 + net.clinic_inbound_arcs() * m,
            continuous: a,
            rows: [c, h, h, 2 * h, c, h, a, h],
        }
    }
}

pub fn build_program1(inst: &Instance) -> Result<(MipModel, VarIndex), FormulationError> {
    let net = Network::new(inst).map_err(FormulationError::InvalidInstance)?;
    Ok(build_for_network(&net))
}

pub fn build_for_network(net: &Network) -> (MipModel, VarIndex) {
    let mut model = MipModel::new("program1");
    let mut refs = Vec::new();
    let name = |n: usize| net.names[n].as_str();

    let mut z = vec![vec![[0usize; 2]; net.n_devices()]; net.n_hubs];
    for h in 0..net.n_hubs {
        for d in 0..net.n_devices() {
            for f in Frequency::ALL {
                let id = model.add_var(
                    format!("Z_{}_{}_{}", name(net.hub_node(h)), net.devices[d], f.code()),
                    VarKind::Binary,
                    net.facility_cost[h][d],
                );
                z[h][d][f.index()] = id;
                refs.push(VarRef::Z { hub: h, device: d, freq: f });
            }
        }
    }

    let mut y = vec![vec![[None; 2]; net.n_modes()]; net.arcs.len()];
    for (a, arc) in net.arcs.iter().enumerate() {
        let freqs: &[Frequency] =
            if net.is_hub(arc.to) { &Frequency::ALL } else { &[Frequency::Monthly] };
        for m in 0..net.n_modes() {
            for &f in freqs {
                let id = model.add_var(
                    format!("Y_{}_{}_{}_{}", name(arc.from), name(arc.to), net.modes[m], f.code()),
                    VarKind::Binary,
                    f.trips() * arc.cost[m],
                );
                y[a][m][f.index()] = Some(id);
                refs.push(VarRef::Y { arc: a, mode: m, freq: f });
            }
        }
    }
    let binaries = refs.len();

    let mut x = Vec::with_capacity(net.arcs.len());
    for (a, arc) in net.arcs.iter().enumerate() {
        x.push(model.add_var(format!("X_{}_{}", name(arc.from), name(arc.to)), VarKind::Continuous, 0.0));
        refs.push(VarRef::X { arc: a });
    }

    let y_in = |node: usize, freq: Option<Frequency>| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for &a in &net.inbound[node] {
            for ym in &y[a] {
                for f in Frequency::ALL {
                    if freq.map_or(true, |g| g == f) {
                        if let Some(id) = ym[f.index()] {
                            out.push((id, 1.0));
                        }
                    }
                }
            }
        }
        out
    };
    let clinics = || (0..net.n_clinics).map(|c| net.clinic_node(c));
    let hubs = || (0..net.n_hubs).map(|h| net.hub_node(h));

    for j in clinics() {
        model.add_constraint(format!("C2_{}", name(j)), y_in(j, None), Sense::Eq, 1.0);
    }
    for j in hubs() {
        model.add_constraint(format!("C3_{}", name(j)), y_in(j, None), Sense::Le, 1.0);
    }
    for h in 0..net.n_hubs {
        let row = z[h].iter().flat_map(|zd| zd.iter().map(|&id| (id, 1.0)));
        model.add_constraint(format!("C4_{}", name(net.hub_node(h))), row, Sense::Le, 1.0);
    }
    for h in 0..net.n_hubs {
        let j = net.hub_node(h);
        for f in Frequency::ALL {
            let mut row: Vec<(usize, f64)> = z[h].iter().map(|zd| (zd[f.index()], 1.0)).collect();
            row.extend(y_in(j, Some(f)).into_iter().map(|(id, _)| (id, -1.0)));
            model.add_constraint(format!("C5_{}_{}", name(j), f.code()), row, Sense::Eq, 0.0);
        }
    }
    for (c, j) in clinics().enumerate() {
        let row = net.inbound[j].iter().map(|&a| (x[a], 1.0));
        model.add_constraint(format!("C6_{}", name(j)), row, Sense::Eq, net.demand[c]);
    }
    for j in hubs() {
        let mut row: Vec<(usize, f64)> = net.inbound[j].iter().map(|&a| (x[a], 1.0)).collect();
        row.extend(net.arcs.iter().enumerate().filter(|(_, arc)| arc.from == j).map(|(a, _)| (x[a], -1.0)));
        model.add_constraint(format!("C7_{}", name(j)), row, Sense::Eq, 0.0);
    }
    for (a, arc) in net.arcs.iter().enumerate() {
        let mut row = Vec::new();
        for (m, ym) in y[a].iter().enumerate() {
            for f in Frequency::ALL {
                if let Some(id) = ym[f.index()] {
                    row.push((id, net.vehicle_capacity[m] * f.trips()));
                }
            }
        }
        row.push((x[a], -1.0));
        model.add_constraint(format!("C8_{}_{}", name(arc.from), name(arc.to)), row, Sense::Ge, 0.0);
    }
    for h in 0..net.n_hubs {
        let j = net.hub_node(h);
        let mut row = Vec::new();
        for (d, zd) in z[h].iter().enumerate() {
            for f in Frequency::ALL {
                row.push((zd[f.index()], net.device_capacity[d] * f.trips()));
            }
        }
        row.extend(net.inbound[j].iter().map(|&a| (x[a], -net.buffer_factor)));
        model.add_constraint(format!("C9_{}", name(j)), row, Sense::Ge, 0.0);
    }

    let hub_names = (0..net.n_hubs).map(|h| net.names[net.hub_node(h)].clone()).collect();
    (model, VarIndex { x, y, z, refs, hub_names, binaries })
}

/// What an `f`-vector entry of 0 (closed hub) means in a frequency
/// restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClosedHubs {
    /// Add `sum_d sum_f Z = 0`.
    #[default]
    ForceClosed,
    /// Add nothing; the hub may reopen at either frequency.
    Free,
}

/// Adds one `RF_i` row per hub: entry 1 forbids quarterly (`sum_d Z_i_d_2 =
/// 0`), entry 2 forbids monthly (`sum_d Z_i_d_1 = 0`), entry 0 closes the
/// hub. The input model is left untouched.
pub fn restrict_frequencies(model: &MipModel, idx: &VarIndex, f: &[u8]) -> Result<MipModel, FormulationError> {
    restrict_frequencies_with(model, idx, f, ClosedHubs::ForceClosed)
}

pub fn restrict_frequencies_with(
    model: &MipModel,
    idx: &VarIndex,
    f: &[u8],
    closed: ClosedHubs,
) -> Result<MipModel, FormulationError> {
    check_vector(idx, f, 2)?;
    let mut out = model.clone();
    for (h, &entry) in f.iter().enumerate() {
        let vars: Vec<usize> = match entry {
            1 => idx.hub_vars(h, Frequency::Quarterly),
            2 => idx.hub_vars(h, Frequency::Monthly),
            _ if closed == ClosedHubs::Free => continue,
            _ => Frequency::ALL.iter().flat_map(|&g| idx.hub_vars(h, g)).collect(),
        };
        out.add_grouped_constraint(
            FREQUENCY_GROUP,
            format!("RF_{}", idx.hub_names[h]),
            vars.into_iter().map(|v| (v, 1.0)),
            Sense::Eq,
            0.0,
        );
    }
    Ok(out)
}

/// Adds one `RL_i` row per hub: `sum_d sum_f Z_i_d_f = l_i`.
pub fn restrict_locations(model: &MipModel, idx: &VarIndex, l: &[u8]) -> Result<MipModel, FormulationError> {
    check_vector(idx, l, 1)?;
    let mut out = model.clone();
    for (h, &entry) in l.iter().enumerate() {
        let vars = Frequency::ALL.iter().flat_map(|&g| idx.hub_vars(h, g));
        out.add_grouped_constraint(
            LOCATION_GROUP,
            format!("RL_{}", idx.hub_names[h]),
            vars.map(|v| (v, 1.0)),
            Sense::Eq,
            entry as f64,
        );
    }
    Ok(out)
}

fn check_vector(idx: &VarIndex, v: &[u8], max: u8) -> Result<(), FormulationError> {
    if v.len() != idx.n_hubs() {
        return Err(FormulationError::LengthMismatch { expected: idx.n_hubs(), got: v.len() });
    }
    if let Some((h, &value)) = v.iter().enumerate().find(|(_, &e)| e > max) {
        return Err(FormulationError::EntryOutOfRange { hub: idx.hub_names[h].clone(), value });
    }
    Ok(())
}

/// Model vector of `design` with the given arc flows.
pub fn encode_design(idx: &VarIndex, design: &Design, flows: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; idx.len()];
    for (h, status) in design.hubs.iter().enumerate() {
        if let Some((d, f, arc, mode)) = *status {
            x[idx.z(h, d, f)] = 1.0;
            x[idx.y(arc, mode, f).expect("hub arcs carry both frequencies")] = 1.0;
        }
    }
    for &(arc, mode) in &design.clinics {
        x[idx.y(arc, mode, Frequency::Monthly).expect("clinic arcs carry the monthly frequency")] = 1.0;
    }
    for (a, &v) in flows.iter().enumerate() {
        x[idx.x(a)] = v;
    }
    x
}

pub const STRENGTHENING_GROUP: &str = "VI";

/// Adds rows satisfied by every integer-feasible point of the model but
/// cutting off fractional points of its relaxation:
/// - `VO_h_c`: a clinic with positive demand is served from hub `h` only
///   if `h` is open;
/// - `VX_i_c`: flow on a clinic arc is at most the clinic demand and only
///   when that arc is chosen.
pub fn add_strengthening_rows(net: &Network, model: &MipModel, idx: &VarIndex) -> MipModel {
    let mut out = model.clone();
    for c in 0..net.n_clinics {
        let j = net.clinic_node(c);
        let a_j = net.demand[c];
        for &arc in &net.inbound[j] {
            let from = net.arcs[arc].from;
            let y: Vec<usize> = (0..net.n_modes()).filter_map(|m| idx.y(arc, m, Frequency::Monthly)).collect();
            if net.is_hub(from) && a_j > 0.0 {
                let h = net.hub_pos(from);
                let mut row: Vec<(usize, f64)> = y.iter().map(|&v| (v, 1.0)).collect();
                row.extend(Frequency::ALL.iter().flat_map(|&f| idx.hub_vars(h, f)).map(|v| (v, -1.0)));
                out.add_grouped_constraint(
                    STRENGTHENING_GROUP,
                    format!("VO_{}_{}", net.names[from], net.names[j]),
                    row,
                    Sense::Le,
                    0.0,
                );
            }
            let mut row: Vec<(usize, f64)> = y.iter().map(|&v| (v, -a_j)).collect();
            row.push((idx.x(arc), 1.0));
            out.add_grouped_constraint(
                STRENGTHENING_GROUP,
                format!("VX_{}_{}", net.names[from], net.names[j]),
                row,
                Sense::Le,
                0.0,
            );
        }
    }
    out
}

/// A model row left unsatisfied by a decoded vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    /// Constraint family number, 2..=9.
    pub family: u8,
    pub row: String,
    /// Node or arc the row belongs to.
    pub subject: String,
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("invalid instance: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("vector has {got} entries, model has {expected} variables")]
    Length { expected: usize, got: usize },
    #[error("binary {var} has fractional value {value}")]
    NotIntegral { var: String, value: f64 },
    #[error("vector violates {} rows: {}", .0.len(), summarize(.0))]
    Infeasible(Vec<RowViolation>),
}

fn summarize(v: &[RowViolation]) -> String {
    v.iter().take(5).map(|r| format!("{} ({:.3e})", r.row, r.residual)).collect::<Vec<_>>().join(", ")
}

pub const DECODE_FEAS_TOL: f64 = 1e-6;
pub const DECODE_INT_TOL: f64 = 1e-6;

/// Rounds binaries, checks every row of families (2)-(9) and turns the
/// vector into a [`NetworkSolution`] whose cost is recomputed from the
/// instance parameters.
pub fn decode_solution(inst: &Instance, idx: &VarIndex, x: &[f64]) -> Result<NetworkSolution, DecodeError> {
    let net = Network::new(inst).map_err(DecodeError::InvalidInstance)?;
    decode_for_network(&net, idx, x)
}

pub fn decode_for_network(net: &Network, idx: &VarIndex, x: &[f64]) -> Result<NetworkSolution, DecodeError> {
    let (model, fresh) = build_for_network(net);
    if fresh.len() != idx.len() || x.len() != model.num_vars() {
        return Err(DecodeError::Length { expected: model.num_vars(), got: x.len() });
    }
    let mut v = x.to_vec();
    for (j, var) in model.variables().iter().enumerate() {
        if var.kind == VarKind::Binary {
            let r = v[j].round();
            if (v[j] - r).abs() > DECODE_INT_TOL || !(r == 0.0 || r == 1.0) {
                return Err(DecodeError::NotIntegral { var: var.name.clone(), value: v[j] });
            }
            v[j] = r;
        }
    }

    let mut violations = Vec::new();
    for c in model.constraints() {
        let residual = c.violation(&v);
        if residual > DECODE_FEAS_TOL {
            let (fam, subject) = c.name.split_once('_').unwrap_or((&c.name, ""));
            violations.push(RowViolation {
                family: fam.trim_start_matches('C').parse().unwrap_or(0),
                row: c.name.clone(),
                subject: subject.replace('_', ","),
                residual,
            });
        }
    }
    for a in 0..net.arcs.len() {
        if v[idx.x(a)] < -DECODE_FEAS_TOL {
            violations.push(RowViolation {
                family: 6,
                row: model.variables()[idx.x(a)].name.clone(),
                subject: net.arc_name(a),
                residual: -v[idx.x(a)],
            });
        }
    }
    if !violations.is_empty() {
        return Err(DecodeError::Infeasible(violations));
    }

    let mut design = Design { hubs: vec![None; net.n_hubs], clinics: Vec::with_capacity(net.n_clinics) };
    for (h, slot) in design.hubs.iter_mut().enumerate() {
        let node = net.hub_node(h);
        for d in 0..net.n_devices() {
            for f in Frequency::ALL {
                if v[idx.z(h, d, f)] == 1.0 {
                    let supply = net.inbound[node].iter().find_map(|&a| {
                        (0..net.n_modes()).find(|&m| idx.y(a, m, f).is_some_and(|id| v[id] == 1.0)).map(|m| (a, m))
                    });
                    // (5) guarantees the supplier exists once rows are satisfied.
                    let (a, m) = supply.expect("open hub without supplier passed row checks");
                    *slot = Some((d, f, a, m));
                }
            }
        }
    }
    for c in 0..net.n_clinics {
        let node = net.clinic_node(c);
        let supply = net.inbound[node].iter().find_map(|&a| {
            (0..net.n_modes())
                .find(|&m| idx.y(a, m, Frequency::Monthly).is_some_and(|id| v[id] == 1.0))
                .map(|m| (a, m))
        });
        design.clinics.push(supply.expect("clinic without supplier passed row checks"));
    }
    let flows: Vec<f64> = (0..net.arcs.len()).map(|a| v[idx.x(a)].max(0.0)).collect();
    Ok(design.to_solution(net, &flows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny_1;

    fn family_counts(model: &MipModel) -> [usize; 8] {
        let mut counts = [0; 8];
        for c in model.constraints() {
            let fam: usize = c.name[1..2].parse().unwrap();
            counts[fam - 2] += 1;
        }
        counts
    }

    #[test]
    fn tiny_1_counts() {
        let (model, idx) = build_program1(&tiny_1()).unwrap();
        assert_eq!(idx.binary_count(), 6);
        assert_eq!(model.num_binaries(), 6);
        assert_eq!(idx.continuous_count(), 3);
        assert_eq!(family_counts(&model), [1, 1, 1, 2, 1, 1, 3, 1]);
    }

    #[test]
    fn tiny_1_objective_coefficients() {
        let (model, _) = build_program1(&tiny_1()).unwrap();
        let obj = |name: &str| model.variables().iter().find(|v| v.name == name).unwrap().obj;
        assert_eq!(obj("Z_h1_d1_1"), 30.0);
        assert_eq!(obj("Z_h1_d1_2"), 30.0);
        assert_eq!(obj("Y_0_h1_m1_1"), 48.0);
        assert_eq!(obj("Y_0_h1_m1_2"), 16.0);
        assert_eq!(obj("Y_0_c1_m1_1"), 120.0);
        assert_eq!(obj("Y_h1_c1_m1_1"), 36.0);
        assert_eq!(obj("X_h1_c1"), 0.0);
    }

    #[test]
    fn capacity_rows_use_trip_multipliers() {
        let (model, _) = build_program1(&tiny_1()).unwrap();
        let row = |name: &str| model.constraints().iter().find(|c| c.name == name).unwrap().clone();
        let c8 = row("C8_0_h1");
        assert_eq!(c8.sense, Sense::Ge);
        let coeffs: Vec<f64> = c8.coeffs.iter().map(|c| c.1).collect();
        assert_eq!(coeffs, vec![600.0, 200.0, -1.0]);
        let c9 = row("C9_h1");
        let coeffs: Vec<f64> = c9.coeffs.iter().map(|c| c.1).collect();
        assert_eq!(coeffs, vec![360.0, 120.0, -1.25]);
    }

    #[test]
    fn zero_demand_clinic_row() {
        let mut inst = tiny_1();
        inst.demand.insert("c1".into(), 0.0);
        let (model, _) = build_program1(&inst).unwrap();
        let c6 = model.constraints().iter().find(|c| c.name == "C6_c1").unwrap();
        assert_eq!(c6.rhs, 0.0);
        let c2 = model.constraints().iter().find(|c| c.name == "C2_c1").unwrap();
        assert_eq!((c2.sense, c2.rhs), (Sense::Eq, 1.0));
    }

    #[test]
    fn frequency_restriction_rows() {
        let (model, idx) = build_program1(&tiny_1()).unwrap();
        let r = restrict_frequencies(&model, &idx, &[1]).unwrap();
        let added = &r.constraints()[model.num_constraints()..];
        assert_eq!(added.len(), 1);
        assert_eq!(added[0].name, "RF_h1");
        assert_eq!(added[0].coeffs, vec![(idx.z(0, 0, Frequency::Quarterly), 1.0)]);
        assert_eq!(added[0].rhs, 0.0);

        let r = restrict_frequencies(&model, &idx, &[0]).unwrap();
        let added = &r.constraints()[model.num_constraints()..];
        assert_eq!(added[0].coeffs.len(), 2);

        let r = restrict_frequencies_with(&model, &idx, &[0], ClosedHubs::Free).unwrap();
        assert_eq!(r.num_constraints(), model.num_constraints());

        assert!(matches!(
            restrict_frequencies(&model, &idx, &[3]),
            Err(FormulationError::EntryOutOfRange { .. })
        ));
        assert!(matches!(
            restrict_frequencies(&model, &idx, &[1, 1]),
            Err(FormulationError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn location_restriction_rows() {
        let (model, idx) = build_program1(&tiny_1()).unwrap();
        for (l, rhs) in [(1u8, 1.0), (0, 0.0)] {
            let r = restrict_locations(&model, &idx, &[l]).unwrap();
            let added = &r.constraints()[model.num_constraints()..];
            assert_eq!(added.len(), 1);
            assert_eq!(added[0].name, "RL_h1");
            assert_eq!(added[0].coeffs.len(), 2);
            assert_eq!(added[0].rhs, rhs);
        }
        assert!(restrict_locations(&model, &idx, &[2]).is_err());
    }

    #[test]
    fn removing_restriction_group_restores_model() {
        let (model, idx) = build_program1(&tiny_1()).unwrap();
        let mut r = restrict_frequencies(&model, &idx, &[2]).unwrap();
        r.remove_group(FREQUENCY_GROUP);
        assert_eq!(r, model);
    }

    fn vector_for(model: &MipModel, ones: &[&str], flows: &[(&str, f64)]) -> Vec<f64> {
        model
            .variables()
            .iter()
            .map(|v| {
                if ones.contains(&v.name.as_str()) {
                    1.0
                } else {
                    flows.iter().find(|(n, _)| *n == v.name).map_or(0.0, |f| f.1)
                }
            })
            .collect()
    }

    #[test]
    fn decode_hub_monthly_design() {
        let inst = tiny_1();
        let (model, idx) = build_program1(&inst).unwrap();
        let x = vector_for(
            &model,
            &["Z_h1_d1_1", "Y_0_h1_m1_1", "Y_h1_c1_m1_1"],
            &[("X_0_h1", 100.0), ("X_h1_c1", 100.0)],
        );
        let sol = decode_solution(&inst, &idx, &x).unwrap();
        assert_eq!(sol.objective, 114.0);
        assert!((model.objective_value(&x) - sol.objective).abs() < 1e-9);
        assert_eq!(sol.breakdown.facility, 30.0);
        let h1 = &sol.assignments["h1"];
        assert_eq!((h1.frequency, h1.device.as_deref()), (Frequency::Monthly, Some("d1")));
        assert_eq!(sol.assignments["c1"].source, "h1");
    }

    #[test]
    fn decode_reports_double_supply() {
        let inst = tiny_1();
        let (model, idx) = build_program1(&inst).unwrap();
        let x = vector_for(
            &model,
            &["Z_h1_d1_1", "Y_0_h1_m1_1", "Y_h1_c1_m1_1", "Y_0_c1_m1_1"],
            &[("X_0_h1", 100.0), ("X_h1_c1", 100.0)],
        );
        match decode_solution(&inst, &idx, &x) {
            Err(DecodeError::Infeasible(v)) => {
                assert!(v.iter().any(|r| r.family == 2 && r.subject == "c1"), "{v:?}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decode_all_zero_vector() {
        let inst = tiny_1();
        let (model, idx) = build_program1(&inst).unwrap();
        match decode_solution(&inst, &idx, &vec![0.0; model.num_vars()]) {
            Err(DecodeError::Infeasible(v)) => {
                let fam2: Vec<_> = v.iter().filter(|r| r.family == 2).collect();
                assert_eq!(fam2.len(), 1);
                assert_eq!(fam2[0].subject, "c1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decode_rejects_fractional_and_short_vectors() {
        let inst = tiny_1();
        let (model, idx) = build_program1(&inst).unwrap();
        let mut x = vec![0.0; model.num_vars()];
        x[0] = 0.5;
        assert!(matches!(decode_solution(&inst, &idx, &x), Err(DecodeError::NotIntegral { .. })));
        assert!(matches!(decode_solution(&inst, &idx, &[0.0]), Err(DecodeError::Length { .. })));
    }
}
