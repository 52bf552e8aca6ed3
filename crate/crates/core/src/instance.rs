//! Network-design instance: node sets, demands, capacities and costs, plus
//! validation and JSON I/O.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of the national store.
pub const STORE: &str = "0";

pub const DEFAULT_BUFFER_FACTOR: f64 = 1.25;

fn default_buffer() -> f64 {
    DEFAULT_BUFFER_FACTOR
}

/// Replenishment frequency of a facility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Frequency {
    Monthly,
    Quarterly,
}

impl Frequency {
    pub const ALL: [Frequency; 2] = [Frequency::Monthly, Frequency::Quarterly];

    /// Replenishments per year.
    pub fn trips(self) -> f64 {
        match self {
            Frequency::Monthly => 12.0,
            Frequency::Quarterly => 4.0,
        }
    }

    /// 1 for monthly, 2 for quarterly.
    pub fn code(self) -> u8 {
        match self {
            Frequency::Monthly => 1,
            Frequency::Quarterly => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Frequency::Monthly),
            2 => Some(Frequency::Quarterly),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self.code() as usize - 1
    }
}

impl From<Frequency> for u8 {
    fn from(f: Frequency) -> u8 {
        f.code()
    }
}

impl TryFrom<u8> for Frequency {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        Frequency::from_code(v).ok_or_else(|| format!("frequency must be 1 or 2, got {v}"))
    }
}

/// Instance data exactly as stored on disk. Maps are keyed by identifier;
/// transport costs by `"i,j,m"` and facility costs by `"i,d"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub hubs: Vec<String>,
    pub clinics: Vec<String>,
    pub modes: Vec<String>,
    pub devices: Vec<String>,
    pub arcs: Vec<(String, String)>,
    /// Annual volume (litres/year) per clinic.
    pub demand: BTreeMap<String, f64>,
    /// Litres per trip per transport mode.
    pub vehicle_capacity: BTreeMap<String, f64>,
    /// Litres per storage device.
    pub device_capacity: BTreeMap<String, f64>,
    /// Cost per round trip, keyed `"i,j,m"`.
    pub transport_cost: BTreeMap<String, f64>,
    /// Annual operating cost, keyed `"i,d"`.
    pub facility_cost: BTreeMap<String, f64>,
    #[serde(default = "default_buffer")]
    pub buffer_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<BTreeMap<String, (f64, f64)>>,
}

pub fn transport_key(from: &str, to: &str, mode: &str) -> String {
    format!("{from},{to},{mode}")
}

pub fn facility_key(hub: &str, device: &str) -> String {
    format!("{hub},{device}")
}

pub fn arc_key(from: &str, to: &str) -> String {
    format!("{from},{to}")
}

/// One breach of the instance invariants. `code()` is the stable
/// machine-readable tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", content = "subject")]
pub enum Violation {
    DuplicateId(String),
    ReservedId(String),
    InvalidId(String),
    NoModes,
    UnknownNode(String),
    ArcFromClinic(String),
    ArcIntoStore(String),
    SelfArc(String),
    DuplicateArc(String),
    NonpositiveCapacity(String),
    NegativeDemand(String),
    NegativeCost(String),
    NonFiniteValue(String),
    MissingDemand(String),
    MissingCapacity(String),
    MissingTransportCost(String),
    MissingFacilityCost(String),
    UnknownKey(String),
    BufferFactorBelowOne(String),
    UnreachableClinic(String),
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::DuplicateId(_) => "DuplicateId",
            Violation::ReservedId(_) => "ReservedId",
            Violation::InvalidId(_) => "InvalidId",
            Violation::NoModes => "NoModes",
            Violation::UnknownNode(_) => "UnknownNode",
            Violation::ArcFromClinic(_) => "ArcFromClinic",
            Violation::ArcIntoStore(_) => "ArcIntoStore",
            Violation::SelfArc(_) => "SelfArc",
            Violation::DuplicateArc(_) => "DuplicateArc",
            Violation::NonpositiveCapacity(_) => "NonpositiveCapacity",
            Violation::NegativeDemand(_) => "NegativeDemand",
            Violation::NegativeCost(_) => "NegativeCost",
            Violation::NonFiniteValue(_) => "NonFiniteValue",
            Violation::MissingDemand(_) => "MissingDemand",
            Violation::MissingCapacity(_) => "MissingCapacity",
            Violation::MissingTransportCost(_) => "MissingTransportCost",
            Violation::MissingFacilityCost(_) => "MissingFacilityCost",
            Violation::UnknownKey(_) => "UnknownKey",
            Violation::BufferFactorBelowOne(_) => "BufferFactorBelowOne",
            Violation::UnreachableClinic(_) => "UnreachableClinic",
        }
    }

    pub fn subject(&self) -> &str {
        match self {
            Violation::NoModes => "",
            Violation::DuplicateId(s)
            | Violation::ReservedId(s)
            | Violation::InvalidId(s)
            | Violation::UnknownNode(s)
            | Violation::ArcFromClinic(s)
            | Violation::ArcIntoStore(s)
            | Violation::SelfArc(s)
            | Violation::DuplicateArc(s)
            | Violation::NonpositiveCapacity(s)
            | Violation::NegativeDemand(s)
            | Violation::NegativeCost(s)
            | Violation::NonFiniteValue(s)
            | Violation::MissingDemand(s)
            | Violation::MissingCapacity(s)
            | Violation::MissingTransportCost(s)
            | Violation::MissingFacilityCost(s)
            | Violation::UnknownKey(s)
            | Violation::BufferFactorBelowOne(s)
            | Violation::UnreachableClinic(s) => s,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.code(), self.subject())
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid instance: {}", list(.0))]
    Invalid(Vec<Violation>),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '.')
}

/// Returns every invariant violation; empty means the instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    let node_sets = [&inst.hubs, &inst.clinics];
    for id in node_sets.iter().flat_map(|s| s.iter()) {
        if id == STORE {
            out.push(Violation::ReservedId(id.clone()));
        } else if !valid_id(id) {
            out.push(Violation::InvalidId(id.clone()));
        }
        if !seen.insert(id.as_str()) {
            out.push(Violation::DuplicateId(id.clone()));
        }
    }
    for set in [&inst.modes, &inst.devices] {
        let mut seen = HashSet::new();
        for id in set.iter() {
            if !valid_id(id) {
                out.push(Violation::InvalidId(id.clone()));
            }
            if !seen.insert(id.as_str()) {
                out.push(Violation::DuplicateId(id.clone()));
            }
        }
    }
    if inst.modes.is_empty() {
        out.push(Violation::NoModes);
    }

    let hubs: HashSet<&str> = inst.hubs.iter().map(String::as_str).collect();
    let clinics: HashSet<&str> = inst.clinics.iter().map(String::as_str).collect();
    let modes: HashSet<&str> = inst.modes.iter().map(String::as_str).collect();
    let devices: HashSet<&str> = inst.devices.iter().map(String::as_str).collect();

    let mut arcs = HashSet::new();
    let mut good_arcs = Vec::new();
    for (i, j) in &inst.arcs {
        let key = arc_key(i, j);
        let mut ok = true;
        for end in [i, j] {
            if end != STORE && !hubs.contains(end.as_str()) && !clinics.contains(end.as_str()) {
                out.push(Violation::UnknownNode(end.clone()));
                ok = false;
            }
        }
        if clinics.contains(i.as_str()) {
            out.push(Violation::ArcFromClinic(key.clone()));
            ok = false;
        }
        if j == STORE {
            out.push(Violation::ArcIntoStore(key.clone()));
            ok = false;
        }
        if i == j {
            out.push(Violation::SelfArc(key.clone()));
            ok = false;
        }
        if !arcs.insert(key.clone()) {
            out.push(Violation::DuplicateArc(key));
            ok = false;
        }
        if ok {
            good_arcs.push((i.as_str(), j.as_str()));
        }
    }

    let check_value = |out: &mut Vec<Violation>, key: &str, v: f64, positive: bool| {
        if !v.is_finite() {
            out.push(Violation::NonFiniteValue(key.to_string()));
        } else if positive && v <= 0.0 {
            out.push(Violation::NonpositiveCapacity(key.to_string()));
        } else if !positive && v < 0.0 {
            out.push(Violation::NegativeCost(key.to_string()));
        }
    };

    for c in &inst.clinics {
        match inst.demand.get(c) {
            None => out.push(Violation::MissingDemand(c.clone())),
            Some(v) if !v.is_finite() => out.push(Violation::NonFiniteValue(c.clone())),
            Some(v) if *v < 0.0 => out.push(Violation::NegativeDemand(c.clone())),
            _ => {}
        }
    }
    for k in inst.demand.keys().filter(|k| !clinics.contains(k.as_str())) {
        out.push(Violation::UnknownKey(format!("demand.{k}")));
    }

    for (field, map, ids) in [
        ("vehicle_capacity", &inst.vehicle_capacity, &inst.modes),
        ("device_capacity", &inst.device_capacity, &inst.devices),
    ] {
        for id in ids.iter() {
            match map.get(id) {
                None => out.push(Violation::MissingCapacity(id.clone())),
                Some(&v) => check_value(&mut out, id, v, true),
            }
        }
        let known: HashSet<&str> = ids.iter().map(String::as_str).collect();
        for k in map.keys().filter(|k| !known.contains(k.as_str())) {
            out.push(Violation::UnknownKey(format!("{field}.{k}")));
        }
    }

    let mut expected_t = HashSet::new();
    for &(i, j) in &good_arcs {
        for m in &inst.modes {
            let key = transport_key(i, j, m);
            match inst.transport_cost.get(&key) {
                None => out.push(Violation::MissingTransportCost(key.clone())),
                Some(&v) => check_value(&mut out, &key, v, false),
            }
            expected_t.insert(key);
        }
    }
    for k in inst.transport_cost.keys() {
        if !expected_t.contains(k) {
            let parts: Vec<&str> = k.split(',').collect();
            let arc_listed = parts.len() == 3 && arcs.contains(&arc_key(parts[0], parts[1]));
            // Costs of rejected arcs are already reported through the arc itself.
            if !(arc_listed && modes.contains(parts[2])) {
                out.push(Violation::UnknownKey(format!("transport_cost.{k}")));
            }
        }
    }

    let mut expected_f = HashSet::new();
    for h in &inst.hubs {
        for d in &inst.devices {
            let key = facility_key(h, d);
            match inst.facility_cost.get(&key) {
                None => out.push(Violation::MissingFacilityCost(key.clone())),
                Some(&v) => check_value(&mut out, &key, v, false),
            }
            expected_f.insert(key);
        }
    }
    for k in inst.facility_cost.keys().filter(|k| !expected_f.contains(*k)) {
        let parts: Vec<&str> = k.split(',').collect();
        if !(parts.len() == 2 && hubs.contains(parts[0]) && devices.contains(parts[1])) {
            out.push(Violation::UnknownKey(format!("facility_cost.{k}")));
        }
    }

    if !inst.buffer_factor.is_finite() || inst.buffer_factor < 1.0 {
        out.push(Violation::BufferFactorBelowOne(inst.buffer_factor.to_string()));
    }

    if let Some(coords) = &inst.coordinates {
        for (k, &(x, y)) in coords {
            if k != STORE && !hubs.contains(k.as_str()) && !clinics.contains(k.as_str()) {
                out.push(Violation::UnknownKey(format!("coordinates.{k}")));
            } else if !x.is_finite() || !y.is_finite() {
                out.push(Violation::NonFiniteValue(format!("coordinates.{k}")));
            }
        }
    }

    let has_inbound: HashSet<&str> = good_arcs.iter().map(|&(_, j)| j).collect();
    for c in &inst.clinics {
        if !has_inbound.contains(c.as_str()) {
            out.push(Violation::UnreachableClinic(c.clone()));
        }
    }
    out
}

/// Clinics with no directed path from the store along the arc set.
pub fn unreachable_clinics(inst: &Instance) -> Vec<String> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (i, j) in &inst.arcs {
        succ.entry(i.as_str()).or_default().push(j.as_str());
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue = VecDeque::from([STORE]);
    seen.insert(STORE);
    while let Some(v) = queue.pop_front() {
        for &w in succ.get(v).map(Vec::as_slice).unwrap_or_default() {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    inst.clinics.iter().filter(|c| !seen.contains(c.as_str())).cloned().collect()
}

/// Parses an instance from JSON text and validates it.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(InstanceError::Invalid(violations))
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| InstanceError::Io { path: path.display().to_string(), source })?;
    parse_instance(&text)
}

pub fn instance_to_json(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serialization cannot fail");
    s.push('\n');
    s
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, instance_to_json(inst))
        .map_err(|source| InstanceError::Io { path: path.display().to_string(), source })
}

impl Instance {
    pub fn num_nodes(&self) -> usize {
        1 + self.hubs.len() + self.clinics.len()
    }

    pub fn is_hub(&self, id: &str) -> bool {
        self.hubs.iter().any(|h| h == id)
    }

    pub fn is_clinic(&self, id: &str) -> bool {
        self.clinics.iter().any(|c| c == id)
    }
}

/// The smallest non-trivial instance: one hub, one clinic, one mode, one
/// device. Optimum 114 (hub open monthly).
pub fn tiny_1() -> Instance {
    let s = |v: &str| v.to_string();
    Instance {
        hubs: vec![s("h1")],
        clinics: vec![s("c1")],
        modes: vec![s("m1")],
        devices: vec![s("d1")],
        arcs: vec![(s("0"), s("h1")), (s("0"), s("c1")), (s("h1"), s("c1"))],
        demand: BTreeMap::from([(s("c1"), 100.0)]),
        vehicle_capacity: BTreeMap::from([(s("m1"), 50.0)]),
        device_capacity: BTreeMap::from([(s("d1"), 30.0)]),
        transport_cost: BTreeMap::from([
            (s("0,c1,m1"), 10.0),
            (s("0,h1,m1"), 4.0),
            (s("h1,c1,m1"), 3.0),
        ]),
        facility_cost: BTreeMap::from([(s("h1,d1"), 30.0)]),
        buffer_factor: DEFAULT_BUFFER_FACTOR,
        coordinates: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_1_is_valid() {
        assert_eq!(validate_instance(&tiny_1()), vec![]);
    }

    #[test]
    fn clinic_without_inbound_arc() {
        let mut inst = tiny_1();
        inst.arcs.retain(|(_, j)| j != "c1");
        inst.transport_cost.retain(|k, _| !k.contains(",c1,"));
        assert_eq!(validate_instance(&inst), vec![Violation::UnreachableClinic("c1".into())]);
    }

    #[test]
    fn zero_vehicle_capacity() {
        let mut inst = tiny_1();
        inst.vehicle_capacity.insert("m1".into(), 0.0);
        assert_eq!(validate_instance(&inst), vec![Violation::NonpositiveCapacity("m1".into())]);
    }

    #[test]
    fn duplicate_hub_and_reserved_store_id() {
        let mut inst = tiny_1();
        inst.hubs.push("h1".into());
        inst.clinics.push("0".into());
        inst.demand.insert("0".into(), 1.0);
        let v = validate_instance(&inst);
        assert!(v.contains(&Violation::DuplicateId("h1".into())));
        assert!(v.contains(&Violation::ReservedId("0".into())));
    }

    #[test]
    fn bad_arcs() {
        let mut inst = tiny_1();
        inst.arcs.push(("c1".into(), "h1".into()));
        inst.arcs.push(("h1".into(), "0".into()));
        inst.arcs.push(("h1".into(), "h1".into()));
        inst.arcs.push(("h1".into(), "c9".into()));
        let codes: Vec<&str> = validate_instance(&inst).iter().map(|v| v.code()).collect();
        for c in ["ArcFromClinic", "ArcIntoStore", "SelfArc", "UnknownNode"] {
            assert!(codes.contains(&c), "{c} missing from {codes:?}");
        }
    }

    #[test]
    fn missing_costs_and_buffer() {
        let mut inst = tiny_1();
        inst.transport_cost.remove("h1,c1,m1");
        inst.facility_cost.clear();
        inst.buffer_factor = 0.9;
        let v = validate_instance(&inst);
        assert!(v.contains(&Violation::MissingTransportCost("h1,c1,m1".into())));
        assert!(v.contains(&Violation::MissingFacilityCost("h1,d1".into())));
        assert!(v.contains(&Violation::BufferFactorBelowOne("0.9".into())));
    }

    #[test]
    fn missing_demand_field_is_a_parse_error() {
        let mut value = serde_json::to_value(tiny_1()).unwrap();
        value.as_object_mut().unwrap().remove("demand");
        let text = serde_json::to_string_pretty(&value).unwrap();
        match parse_instance(&text) {
            Err(InstanceError::Parse { message, .. }) => assert!(message.contains("demand")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let mut value = serde_json::to_value(tiny_1()).unwrap();
        value.as_object_mut().unwrap().insert("colour".into(), serde_json::json!(1));
        let text = serde_json::to_string(&value).unwrap();
        assert!(matches!(parse_instance(&text), Err(InstanceError::Parse { .. })));
    }

    #[test]
    fn duplicate_hub_in_file_is_a_violation() {
        let mut inst = tiny_1();
        inst.hubs.push("h1".into());
        let text = instance_to_json(&inst);
        match parse_instance(&text) {
            Err(InstanceError::Invalid(v)) => assert!(v.contains(&Violation::DuplicateId("h1".into()))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.json");
        write_instance(&tiny_1(), &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), tiny_1());
    }

    #[test]
    fn frequency_codes() {
        assert_eq!(Frequency::Monthly.trips(), 12.0);
        assert_eq!(Frequency::Quarterly.trips(), 4.0);
        assert_eq!(Frequency::from_code(2), Some(Frequency::Quarterly));
        assert_eq!(Frequency::from_code(3), None);
    }
}
