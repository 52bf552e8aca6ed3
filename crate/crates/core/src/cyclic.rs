//! Cyclic restriction heuristic: alternate between solving the model with
//! hub frequencies fixed and with hub locations fixed until neither step
//! improves the objective by more than `epsilon`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use mipcore::{solve_mip_with_start, BnbStatus, MipModel, SolveConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{direct_design, solver_model};
use crate::formulation::{
    decode_for_network, encode_design, restrict_frequencies_with, restrict_locations, ClosedHubs, DecodeError,
    FormulationError,
    VarIndex,
};
use crate::instance::{Instance, Violation};
use crate::network::Network;
use crate::solution::NetworkSolution;

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CyclicOptions {
    pub seed: u64,
    /// Absolute improvement below which the loop stops.
    pub epsilon: f64,
    /// Independent replicas with seeds `seed, seed + 1, ...`.
    pub multistart: usize,
    /// Let hubs closed in an earlier step reopen in the next frequency step.
    pub allow_reopen: bool,
    /// Replaces the random first frequency vector of the first replica.
    pub initial_frequencies: Option<Vec<u8>>,
    /// Applied to every restricted solve. `threads` also bounds how many
    /// replicas run at once.
    pub solve: SolveConfig,
}

impl Default for CyclicOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            epsilon: DEFAULT_EPSILON,
            multistart: 1,
            allow_reopen: false,
            initial_frequencies: None,
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Freq,
    Loc,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Freq => "freq",
            Phase::Loc => "loc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub phase: Phase,
    pub objective: f64,
    pub open_hubs: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct CyclicState {
    pub k: usize,
    /// Frequency vector used by the latest frequency step (0 = closed).
    pub f: Vec<u8>,
    /// Location vector used by the latest location step.
    pub l: Vec<u8>,
    pub w_f: Vec<f64>,
    pub w_l: Vec<f64>,
    pub epsilon: f64,
    pub seed: u64,
    pub initial_f: Vec<u8>,
    pub best: Option<NetworkSolution>,
    pub trace: Vec<StepRecord>,
    /// False when a restricted solve stopped at a limit.
    pub complete: bool,
    pub wall_time: Duration,
}

impl CyclicState {
    /// Objectives in solve order: `W_f^1, W_l^1, W_f^2, ...`.
    pub fn interleaved(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.objective).collect()
    }

    /// Completed iterations, counting a final lone frequency step.
    pub fn iterations(&self) -> usize {
        self.k
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("k,phase,objective,open_hubs,wall_ms\n");
        for r in &self.trace {
            let _ = writeln!(out, "{},{},{},{},{:.3}", r.k, r.phase.label(), r.objective, r.open_hubs, r.wall_ms);
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CyclicError {
    #[error("invalid instance: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error(transparent)]
    Restriction(#[from] FormulationError),
    #[error("restricted model at k = {k} ({phase}) has no feasible solution")]
    RestrictedInfeasible { k: usize, phase: &'static str },
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

pub fn random_frequencies(seed: u64, hubs: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..hubs).map(|_| rng.gen_range(1..=2u8)).collect()
}

struct Run<'a> {
    net: &'a Network,
    model: &'a MipModel,
    idx: &'a VarIndex,
    opts: &'a CyclicOptions,
}

impl Run<'_> {
    fn solve(
        &self,
        model: &MipModel,
        start: Option<&[f64]>,
        state: &mut CyclicState,
        k: usize,
        phase: Phase,
        t0: Instant,
    ) -> Result<Option<Vec<f64>>, CyclicError> {
        let r = solve_mip_with_start(model, &self.opts.solve, start);
        if r.status != BnbStatus::Optimal {
            state.complete = false;
        }
        match (r.status, r.x) {
            (_, Some(x)) => {
                let (l, _) = self.idx.hub_status(&x);
                state.trace.push(StepRecord {
                    k,
                    phase,
                    objective: r.objective,
                    open_hubs: l.iter().filter(|&&v| v == 1).count(),
                    wall_ms: t0.elapsed().as_secs_f64() * 1e3,
                });
                match phase {
                    Phase::Freq => state.w_f.push(r.objective),
                    Phase::Loc => state.w_l.push(r.objective),
                }
                Ok(Some(x))
            }
            (BnbStatus::Infeasible, None) => Err(CyclicError::RestrictedInfeasible { k, phase: phase.label() }),
            (_, None) => Ok(None),
        }
    }

    fn replica(&self, seed: u64, initial: Option<Vec<u8>>) -> Result<CyclicState, CyclicError> {
        let t0 = Instant::now();
        let closed = if self.opts.allow_reopen { ClosedHubs::Free } else { ClosedHubs::ForceClosed };
        let mut f = initial.unwrap_or_else(|| random_frequencies(seed, self.net.n_hubs));
        let mut state = CyclicState {
            k: 1,
            f: f.clone(),
            l: vec![0; self.net.n_hubs],
            w_f: Vec::new(),
            w_l: Vec::new(),
            epsilon: self.opts.epsilon,
            seed,
            initial_f: f.clone(),
            best: None,
            trace: Vec::new(),
            complete: true,
            wall_time: Duration::ZERO,
        };
        // All hubs closed satisfies any frequency restriction.
        let direct = direct_design(self.net).and_then(|d| Some(encode_design(self.idx, &d, &d.flows(self.net)?)));
        let mut best_x: Option<Vec<f64>> = None;
        let mut k = 1;
        loop {
            state.k = k;
            state.f = f.clone();
            let restricted = restrict_frequencies_with(self.model, self.idx, &f, closed)?;
            let start = best_x.as_deref().or(direct.as_deref());
            let Some(x) = self.solve(&restricted, start, &mut state, k, Phase::Freq, t0)? else {
                break;
            };
            let w_f = *state.w_f.last().expect("just recorded");
            best_x = Some(x);
            if k > 1 && state.w_l[k - 2] - w_f <= self.opts.epsilon {
                break;
            }
            if !state.complete {
                break;
            }

            let (l, _) = self.idx.hub_status(best_x.as_deref().expect("set above"));
            state.l = l.clone();
            let restricted = restrict_locations(self.model, self.idx, &l)?;
            let Some(x) = self.solve(&restricted, best_x.as_deref(), &mut state, k, Phase::Loc, t0)? else {
                break;
            };
            let w_l = *state.w_l.last().expect("just recorded");
            let (_, next_f) = self.idx.hub_status(&x);
            best_x = Some(x);
            if w_f - w_l <= self.opts.epsilon || !state.complete {
                break;
            }
            f = next_f;
            k += 1;
        }
        if let Some(x) = &best_x {
            state.best = Some(decode_for_network(self.net, self.idx, x)?);
        }
        state.wall_time = t0.elapsed();
        Ok(state)
    }
}

/// Runs the heuristic and returns the best solution over all replicas
/// (lowest objective, ties to the lowest seed) with that replica's state.
pub fn cyclic_solve(inst: &Instance, opts: &CyclicOptions) -> Result<(NetworkSolution, CyclicState), CyclicError> {
    let states = cyclic_replicas(inst, opts)?;
    let best = states
        .into_iter()
        .filter(|s| s.best.is_some())
        .min_by(|a, b| {
            let (va, vb) = (a.best.as_ref().unwrap().objective, b.best.as_ref().unwrap().objective);
            va.total_cmp(&vb).then(a.seed.cmp(&b.seed))
        });
    match best {
        Some(state) => Ok((state.best.clone().expect("filtered"), state)),
        None => Err(CyclicError::RestrictedInfeasible { k: 1, phase: Phase::Freq.label() }),
    }
}

/// Every replica's final state, in seed order.
pub fn cyclic_replicas(inst: &Instance, opts: &CyclicOptions) -> Result<Vec<CyclicState>, CyclicError> {
    if !(opts.epsilon > 0.0) {
        return Err(CyclicError::BadEpsilon);
    }
    let net = Network::new(inst).map_err(CyclicError::InvalidInstance)?;
    let (model, idx) = solver_model(&net);
    let run = Run { net: &net, model: &model, idx: &idx, opts };
    let replicas = opts.multistart.max(1);
    let seeds: Vec<u64> = (0..replicas as u64).map(|i| opts.seed.wrapping_add(i)).collect();
    let initial = |i: usize| if i == 0 { opts.initial_frequencies.clone() } else { None };
    let workers = opts.solve.threads.max(1).min(replicas);

    let mut states = Vec::with_capacity(replicas);
    if workers == 1 {
        for (i, &seed) in seeds.iter().enumerate() {
            states.push(run.replica(seed, initial(i))?);
        }
        return Ok(states);
    }
    // Each replica owns its models; the solver inside runs single-threaded.
    let mut serial = opts.clone();
    serial.solve.threads = 1;
    let run = Run { opts: &serial, ..run };
    for chunk in seeds.chunks(workers).enumerate() {
        let (c, chunk) = chunk;
        let results: Vec<Result<CyclicState, CyclicError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(j, &seed)| {
                    let run = &run;
                    let init = initial(c * workers + j);
                    scope.spawn(move || run.replica(seed, init))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("replica panicked")).collect()
        });
        for r in results {
            states.push(r?);
        }
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny_1;

    fn opts(f: u8) -> CyclicOptions {
        CyclicOptions { initial_frequencies: Some(vec![f]), ..Default::default() }
    }

    #[test]
    fn monthly_start_reaches_optimum() {
        let (sol, state) = cyclic_solve(&tiny_1(), &opts(1)).unwrap();
        assert!((sol.objective - 114.0).abs() < 1e-9);
        assert_eq!(state.w_f, vec![114.0]);
        assert_eq!(state.w_l, vec![114.0]);
        assert_eq!(state.iterations(), 1);
        assert!(state.complete);
    }

    #[test]
    fn quarterly_start_stalls_at_direct_service() {
        let (sol, state) = cyclic_solve(&tiny_1(), &opts(2)).unwrap();
        assert!((sol.objective - 120.0).abs() < 1e-9);
        assert_eq!(state.l, vec![0]);
        assert_eq!(state.interleaved(), vec![120.0, 120.0]);
    }

    #[test]
    fn infinite_epsilon_runs_one_round() {
        let mut o = opts(1);
        o.epsilon = f64::INFINITY;
        let (_, state) = cyclic_solve(&tiny_1(), &o).unwrap();
        assert_eq!((state.w_f.len(), state.w_l.len()), (1, 1));
    }

    #[test]
    fn multistart_picks_the_better_replica() {
        let o = CyclicOptions { multistart: 2, initial_frequencies: Some(vec![2]), ..Default::default() };
        let states = cyclic_replicas(&tiny_1(), &o).unwrap();
        assert_eq!(states.len(), 2);
        let (sol, _) = cyclic_solve(&tiny_1(), &o).unwrap();
        let best = states.iter().map(|s| s.best.as_ref().unwrap().objective).fold(f64::INFINITY, f64::min);
        assert_eq!(sol.objective, best);
    }

    #[test]
    fn trace_csv_has_one_row_per_step() {
        let (_, state) = cyclic_solve(&tiny_1(), &opts(1)).unwrap();
        let csv = state.trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,phase,objective,open_hubs,wall_ms");
        assert!(lines[1].starts_with("1,freq,114,1,"));
        assert!(lines[2].starts_with("1,loc,114,1,"));
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let mut o = opts(1);
        o.epsilon = 0.0;
        assert!(matches!(cyclic_solve(&tiny_1(), &o), Err(CyclicError::BadEpsilon)));
    }
}
