//! Exact-versus-cyclic benchmark rows, CSV reports and summaries.

use std::fmt::Write as _;
use std::time::Duration;

use mipcore::SolveConfig;
use serde::Serialize;
use thiserror::Error;

use crate::cyclic::{cyclic_solve, CyclicError, CyclicOptions, DEFAULT_EPSILON};
use crate::exact::{solve_exact, SolveError};
use crate::formulation::Program1Size;
use crate::instance::Instance;
use crate::network::Network;
use crate::oracle::{oracle_enumerate, OracleError};

pub const CSV_HEADER: &str = "instance,hubs,nodes,binvars,density,exact_obj,exact_ms,cyclic_obj,cyclic_ms,gap_pct,status";

/// 64-bit FNV-1a; seeds the cyclic run of each instance from its id.
pub fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub hubs: usize,
    pub nodes: usize,
    pub binvars: usize,
    pub density: String,
    pub exact_obj: Option<f64>,
    pub exact_ms: f64,
    pub cyclic_obj: f64,
    pub cyclic_ms: f64,
    pub gap_pct: Option<f64>,
    pub status: Vec<String>,
    /// Interleaved cyclic objectives, kept for descent checks.
    #[serde(skip)]
    pub cyclic_trace: Vec<f64>,
}

impl BenchRow {
    /// Row counts towards gap statistics only with a proven exact optimum.
    pub fn counted(&self) -> bool {
        self.gap_pct.is_some()
    }

    fn csv(&self) -> String {
        let opt = |v: Option<f64>, digits: usize| v.map_or(String::new(), |v| format!("{v:.digits$}"));
        format!(
            "{},{},{},{},{},{},{:.1},{:.4},{:.1},{},{}",
            self.instance,
            self.hubs,
            self.nodes,
            self.binvars,
            self.density,
            opt(self.exact_obj, 4),
            self.exact_ms,
            self.cyclic_obj,
            self.cyclic_ms,
            opt(self.gap_pct, 6),
            self.status.join("|"),
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Exact solve settings; its time limit flags rows as `exact-timeout`.
    pub exact: SolveConfig,
    /// Settings for each restricted solve of the heuristic.
    pub cyclic: SolveConfig,
    pub epsilon: f64,
    pub multistart: usize,
    pub allow_reopen: bool,
    /// Cross-check the exact optimum with the oracle when it fits the guard.
    pub oracle_check: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            exact: SolveConfig::default().with_time_limit(Duration::from_secs(600)),
            cyclic: SolveConfig::default(),
            epsilon: DEFAULT_EPSILON,
            multistart: 1,
            allow_reopen: false,
            oracle_check: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no instances to benchmark")]
    Empty,
    #[error("{instance}: {source}")]
    Exact {
        instance: String,
        #[source]
        source: SolveError,
    },
    #[error("{instance}: {source}")]
    Cyclic {
        instance: String,
        #[source]
        source: CyclicError,
    },
}

pub fn bench_instance(id: &str, inst: &Instance, density: &str, opts: &BenchOptions) -> Result<BenchRow, BenchError> {
    let exact = solve_exact(inst, &opts.exact).map_err(|source| BenchError::Exact { instance: id.into(), source })?;
    let cyc_opts = CyclicOptions {
        seed: fnv1a(id),
        epsilon: opts.epsilon,
        multistart: opts.multistart,
        allow_reopen: opts.allow_reopen,
        initial_frequencies: None,
        solve: opts.cyclic.clone(),
    };
    let (cyc, state) =
        cyclic_solve(inst, &cyc_opts).map_err(|source| BenchError::Cyclic { instance: id.into(), source })?;

    let mut status = Vec::new();
    let exact_obj = exact.solution.as_ref().map(|s| s.objective);
    let gap_pct = match exact_obj {
        Some(e) if exact.is_optimal() => Some(100.0 * (cyc.objective - e) / e.abs().max(f64::MIN_POSITIVE)),
        _ => None,
    };
    if !exact.is_optimal() {
        status.push(if exact_obj.is_none() && exact.status == mipcore::BnbStatus::Infeasible {
            "exact-infeasible".to_string()
        } else {
            "exact-timeout".to_string()
        });
    }
    if !state.complete {
        status.push("cyclic-incomplete".into());
    }
    if opts.oracle_check && exact.is_optimal() {
        match oracle_enumerate(inst) {
            Ok(r) if (r.objective - exact_obj.unwrap_or(f64::NAN)).abs() <= 1e-6 => status.push("oracle-ok".into()),
            Ok(_) => status.push("oracle-mismatch".into()),
            Err(OracleError::GuardExceeded { .. }) => {}
            Err(_) => status.push("oracle-mismatch".into()),
        }
    }
    if status.is_empty() || status.iter().all(|s| s == "oracle-ok") {
        status.insert(0, "ok".into());
    }

    let net = Network::new(inst).expect("validated by the solvers");
    Ok(BenchRow {
        instance: id.to_string(),
        hubs: inst.hubs.len(),
        nodes: inst.num_nodes(),
        binvars: Program1Size::of(&net).binaries,
        density: density.to_string(),
        exact_obj,
        exact_ms: exact.wall_time.as_secs_f64() * 1e3,
        cyclic_obj: cyc.objective,
        cyclic_ms: state.wall_time.as_secs_f64() * 1e3,
        gap_pct,
        status,
        cyclic_trace: state.interleaved(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub rows: usize,
    /// Rows with a proven exact optimum.
    pub counted: usize,
    pub max_gap_pct: f64,
    pub mean_gap_pct: f64,
    pub cyclic_faster: usize,
}

/// Benchmarks `(id, instance, density label)` triples in order.
pub fn run_bench(instances: &[(String, Instance, String)], opts: &BenchOptions) -> Result<BenchReport, BenchError> {
    if instances.is_empty() {
        return Err(BenchError::Empty);
    }
    let rows = instances
        .iter()
        .map(|(id, inst, density)| bench_instance(id, inst, density, opts))
        .collect::<Result<_, _>>()?;
    Ok(BenchReport { rows })
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> BenchSummary {
        let gaps: Vec<f64> = self.rows.iter().filter_map(|r| r.gap_pct).collect();
        BenchSummary {
            rows: self.rows.len(),
            counted: gaps.len(),
            max_gap_pct: gaps.iter().copied().fold(0.0, f64::max),
            mean_gap_pct: if gaps.is_empty() { 0.0 } else { gaps.iter().sum::<f64>() / gaps.len() as f64 },
            cyclic_faster: self.rows.iter().filter(|r| r.cyclic_ms < r.exact_ms).count(),
        }
    }

    /// Aligned table in the column order of the CSV.
    pub fn pretty(&self) -> String {
        let csv = self.to_csv();
        let cells: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
        let cols = cells[0].len();
        let widths: Vec<usize> = (0..cols).map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
            }
        }
        out
    }
}

impl std::fmt::Display for BenchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rows {} (gap counted on {}), max gap {:.4}%, mean gap {:.4}%, cyclic faster on {}",
            self.rows, self.counted, self.max_gap_pct, self.mean_gap_pct, self.cyclic_faster
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny_1;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn empty_bench_is_an_error() {
        assert!(matches!(run_bench(&[], &BenchOptions::default()), Err(BenchError::Empty)));
    }

    #[test]
    fn csv_header_and_row_shape() {
        let report = BenchReport {
            rows: vec![BenchRow {
                instance: "x".into(),
                hubs: 1,
                nodes: 3,
                binvars: 6,
                density: "-".into(),
                exact_obj: None,
                exact_ms: 1.0,
                cyclic_obj: 120.0,
                cyclic_ms: 2.0,
                gap_pct: None,
                status: vec!["exact-timeout".into()],
                cyclic_trace: vec![],
            }],
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 11);
        assert!(lines[1].ends_with(",,exact-timeout"));
        assert_eq!(report.summary().counted, 0);
    }

    #[test]
    fn tiny_1_row() {
        let inst = tiny_1();
        let row = bench_instance("tiny-1", &inst, "-", &BenchOptions::default()).unwrap();
        assert_eq!(row.binvars, 6);
        assert_eq!(row.exact_obj, Some(114.0));
        assert_eq!(row.gap_pct, Some(0.0));
        assert!(row.status.contains(&"oracle-ok".to_string()));
    }
}
