//! Seeded synthetic instances by population-density class.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{
    facility_key, transport_key, unreachable_clinics, Instance, DEFAULT_BUFFER_FACTOR, STORE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    Sparse,
    Moderate,
    Dense,
}

impl Density {
    pub const ALL: [Density; 3] = [Density::Sparse, Density::Moderate, Density::Dense];

    pub fn label(self) -> &'static str {
        match self {
            Density::Sparse => "sparse",
            Density::Moderate => "moderate",
            Density::Dense => "dense",
        }
    }

    /// Share of clinics drawn around a hub site and the spread of those
    /// clusters relative to the region side.
    fn clustering(self) -> (f64, f64) {
        match self {
            Density::Sparse => (0.0, 0.0),
            Density::Moderate => (0.5, 0.15),
            Density::Dense => (0.85, 0.08),
        }
    }

    fn demand_range(self) -> (f64, f64) {
        match self {
            Density::Sparse => (20.0, 80.0),
            Density::Moderate => (40.0, 160.0),
            Density::Dense => (80.0, 320.0),
        }
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Density {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Density::ALL
            .into_iter()
            .find(|d| d.label() == s)
            .ok_or_else(|| format!("unknown density class {s:?} (expected sparse, moderate or dense)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcPolicy {
    Complete,
    DistanceCutoff(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_hubs: usize,
    pub n_clinics: usize,
    pub density: Density,
    pub n_modes: usize,
    pub n_devices: usize,
    pub region_side: f64,
    /// Multiplier on per-clinic annual demand.
    pub volume_scale: f64,
    /// Per-km cost of the cheapest mode; mode `m` costs `(1 + m)` times this.
    pub per_km_cost: f64,
    /// Fixed cost per trip of the cheapest mode, scaled like `per_km_cost`.
    pub fixed_trip_cost: f64,
    /// Facility cost is `device_cost_scale * S_d^0.8` times a site factor.
    pub device_cost_scale: f64,
    pub arc_policy: ArcPolicy,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_hubs: 3,
            n_clinics: 10,
            density: Density::Moderate,
            n_modes: 2,
            n_devices: 2,
            region_side: 100.0,
            volume_scale: 1.0,
            per_km_cost: 0.4,
            fixed_trip_cost: 3.0,
            device_cost_scale: 4.0,
            arc_policy: ArcPolicy::Complete,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("clinic {0} has no inbound arc under the distance cutoff")]
    UnreachableClinic(String),
}

impl GeneratorConfig {
    pub fn check(&self) -> Result<(), GeneratorError> {
        let bad = |msg: &str| Err(GeneratorError::InvalidConfig(msg.to_string()));
        if self.n_clinics == 0 {
            return bad("n_clinics must be at least 1");
        }
        if self.n_modes == 0 || self.n_devices == 0 {
            return bad("n_modes and n_devices must be at least 1");
        }
        let positive = [self.region_side, self.volume_scale, self.per_km_cost, self.device_cost_scale];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("region_side, volume_scale, per_km_cost and device_cost_scale must be positive");
        }
        if !(self.fixed_trip_cost.is_finite() && self.fixed_trip_cost >= 0.0) {
            return bad("fixed_trip_cost must be nonnegative");
        }
        if let ArcPolicy::DistanceCutoff(r) = self.arc_policy {
            if !(r.is_finite() && r > 0.0) {
                return bad("distance cutoff radius must be positive");
            }
        }
        Ok(())
    }
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() / (1.0 / step)
}

fn cents(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub fn vehicle_capacity(mode: usize) -> f64 {
    25.0 * 4f64.powi(mode as i32)
}

pub fn device_capacity(device: usize) -> f64 {
    60.0 * 3f64.powi(device as i32)
}

/// Round-trip cost of one trip of mode `mode` over distance `dist`.
pub fn trip_cost(cfg: &GeneratorConfig, mode: usize, dist: f64) -> f64 {
    let scale = 1.0 + mode as f64;
    cents(2.0 * dist * cfg.per_km_cost * scale + cfg.fixed_trip_cost * scale)
}

pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance, GeneratorError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let side = cfg.region_side;
    let clamp = |v: f64| v.clamp(0.0, side);
    let point = |rng: &mut ChaCha8Rng| (cents(rng.gen_range(0.0..side)), cents(rng.gen_range(0.0..side)));

    let store = match cfg.density {
        Density::Sparse => (cents(0.05 * side), cents(0.05 * side)),
        _ => (cents(0.5 * side), cents(0.5 * side)),
    };
    let hubs: Vec<String> = (1..=cfg.n_hubs).map(|i| format!("h{i}")).collect();
    let clinics: Vec<String> = (1..=cfg.n_clinics).map(|i| format!("c{i}")).collect();
    let modes: Vec<String> = (1..=cfg.n_modes).map(|i| format!("m{i}")).collect();
    let devices: Vec<String> = (1..=cfg.n_devices).map(|i| format!("d{i}")).collect();

    let mut coords = BTreeMap::new();
    coords.insert(STORE.to_string(), store);
    let hub_sites: Vec<(f64, f64)> = hubs.iter().map(|_| point(&mut rng)).collect();
    for (h, &p) in hubs.iter().zip(&hub_sites) {
        coords.insert(h.clone(), p);
    }
    let (share, spread) = cfg.density.clustering();
    let normal = Normal::new(0.0, (spread * side).max(f64::MIN_POSITIVE)).expect("finite spread");
    let (lo, hi) = cfg.density.demand_range();
    let mut demand = BTreeMap::new();
    for c in &clinics {
        let p = if !hub_sites.is_empty() && rng.gen_bool(share) {
            let centre = hub_sites[rng.gen_range(0..hub_sites.len())];
            (cents(clamp(centre.0 + normal.sample(&mut rng))), cents(clamp(centre.1 + normal.sample(&mut rng))))
        } else {
            point(&mut rng)
        };
        coords.insert(c.clone(), p);
        demand.insert(c.clone(), round_to(rng.gen_range(lo..hi) * cfg.volume_scale, 0.1));
    }

    let keep = |a: &str, b: &str| match cfg.arc_policy {
        ArcPolicy::Complete => true,
        ArcPolicy::DistanceCutoff(r) => distance(coords[a], coords[b]) <= r,
    };
    let mut arcs = Vec::new();
    let sources = std::iter::once(STORE.to_string()).chain(hubs.iter().cloned());
    for i in sources {
        for j in hubs.iter().chain(&clinics) {
            if i != *j && keep(&i, j) {
                arcs.push((i.clone(), j.clone()));
            }
        }
    }

    let mut transport_cost = BTreeMap::new();
    for (i, j) in &arcs {
        let dist = distance(coords[i], coords[j]);
        for (m, mode) in modes.iter().enumerate() {
            transport_cost.insert(transport_key(i, j, mode), trip_cost(cfg, m, dist));
        }
    }
    let mut facility_cost = BTreeMap::new();
    for h in &hubs {
        let site = rng.gen_range(0.85..1.15);
        for (d, dev) in devices.iter().enumerate() {
            let f = cfg.device_cost_scale * device_capacity(d).powf(0.8) * site;
            facility_cost.insert(facility_key(h, dev), cents(f));
        }
    }

    let inst = Instance {
        vehicle_capacity: modes.iter().enumerate().map(|(m, id)| (id.clone(), vehicle_capacity(m))).collect(),
        device_capacity: devices.iter().enumerate().map(|(d, id)| (id.clone(), device_capacity(d))).collect(),
        hubs,
        clinics,
        modes,
        devices,
        arcs,
        demand,
        transport_cost,
        facility_cost,
        buffer_factor: DEFAULT_BUFFER_FACTOR,
        coordinates: Some(coords),
    };
    if let Some(c) = unreachable_clinics(&inst).into_iter().next() {
        return Err(GeneratorError::UnreachableClinic(c));
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{instance_to_json, parse_instance, validate_instance};

    fn cfg(seed: u64, hubs: usize, clinics: usize, density: Density) -> GeneratorConfig {
        GeneratorConfig { seed, n_hubs: hubs, n_clinics: clinics, density, ..Default::default() }
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let c = cfg(7, 2, 8, Density::Moderate);
        let a = instance_to_json(&generate_instance(&c).unwrap());
        let b = instance_to_json(&generate_instance(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn seed_changes_demand() {
        let a = generate_instance(&cfg(7, 2, 8, Density::Moderate)).unwrap();
        let b = generate_instance(&cfg(8, 2, 8, Density::Moderate)).unwrap();
        assert_ne!(a.demand, b.demand);
    }

    #[test]
    fn dense_instance_is_valid() {
        let inst = generate_instance(&cfg(1, 3, 20, Density::Dense)).unwrap();
        assert_eq!(validate_instance(&inst), vec![]);
        assert_eq!(inst.arcs.len(), 3 + 3 * 2 + 20 + 3 * 20);
    }

    #[test]
    fn every_class_round_trips() {
        for density in Density::ALL {
            for seed in 0..5 {
                let inst = generate_instance(&cfg(seed, 4, 12, density)).unwrap();
                assert!(validate_instance(&inst).is_empty());
                assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
            }
        }
    }

    #[test]
    fn transport_cost_is_monotone_in_distance() {
        let c = cfg(3, 4, 30, Density::Sparse);
        let inst = generate_instance(&c).unwrap();
        let coords = inst.coordinates.as_ref().unwrap();
        for mode in &inst.modes {
            let mut pairs: Vec<(f64, f64)> = inst
                .arcs
                .iter()
                .map(|(i, j)| (distance(coords[i], coords[j]), inst.transport_cost[&transport_key(i, j, mode)]))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        }
    }

    #[test]
    fn sparse_store_sits_in_a_corner() {
        let inst = generate_instance(&cfg(2, 2, 5, Density::Sparse)).unwrap();
        assert_eq!(inst.coordinates.unwrap()[STORE], (5.0, 5.0));
        let inst = generate_instance(&cfg(2, 2, 5, Density::Dense)).unwrap();
        assert_eq!(inst.coordinates.unwrap()[STORE], (50.0, 50.0));
    }

    #[test]
    fn distance_cutoff_reports_unreachable_clinic() {
        let mut c = cfg(5, 1, 20, Density::Sparse);
        c.arc_policy = ArcPolicy::DistanceCutoff(1.0);
        assert!(matches!(generate_instance(&c), Err(GeneratorError::UnreachableClinic(_))));
        c.arc_policy = ArcPolicy::DistanceCutoff(1000.0);
        assert_eq!(generate_instance(&c).unwrap().arcs.len(), 1 + 20 + 20);
    }

    #[test]
    fn zero_clinics_is_rejected() {
        assert!(matches!(generate_instance(&cfg(1, 1, 0, Density::Dense)), Err(GeneratorError::InvalidConfig(_))));
    }
}
