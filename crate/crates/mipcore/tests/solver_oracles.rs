//! Cross-checks of the simplex and branch-and-bound against brute-force
//! oracles on small random models.

use mipcore::{solve_lp, solve_mip, BnbStatus, LpSolver, LpStatus, MipModel, Sense, SolveConfig, VarKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum of `c·x` over `{x >= 0, rows}` by enumerating every vertex.
/// Rows are `(coeffs, sense, rhs)` over `n` continuous variables.
fn vertex_oracle(c: &[f64], rows: &[(Vec<f64>, Sense, f64)]) -> Option<f64> {
    let n = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let feasible = |x: &[f64]| {
        x.iter().all(|&v| v >= -1e-7)
            && rows.iter().all(|(a, s, b)| {
                let lhs: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
                match s {
                    Sense::Le => lhs <= b + 1e-7,
                    Sense::Ge => lhs >= b - 1e-7,
                    Sense::Eq => (lhs - b).abs() <= 1e-7,
                }
            })
    };
    let mut best: Option<f64> = None;
    let k = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                best = Some(best.map_or(v, |bv: f64| bv.min(v)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for t in i + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(Vec<f64>, Sense, f64)> {
    let mut rows = Vec::new();
    for _ in 0..count {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let sense = match rng.gen_range(0..3) {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        rows.push((a, sense, rng.gen_range(-4..=6) as f64));
    }
    // Box keeps every instance bounded.
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, Sense::Le, 10.0));
    }
    rows
}

fn to_model(c: &[f64], rows: &[(Vec<f64>, Sense, f64)], kinds: &[VarKind]) -> MipModel {
    let mut m = MipModel::new("rand");
    for (j, (&cj, &k)) in c.iter().zip(kinds).enumerate() {
        m.add_var(format!("x{j}"), k, cj);
    }
    for (i, (a, s, b)) in rows.iter().enumerate() {
        m.add_constraint(format!("r{i}"), a.iter().copied().enumerate(), *s, *b);
    }
    m
}

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut feasible = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..=3);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let count = rng.gen_range(1..=3);
        let rows = random_rows(&mut rng, n, count);
        let model = to_model(&c, &rows, &vec![VarKind::Continuous; n]);
        let lp = solve_lp(&model, &SolveConfig::default());
        match vertex_oracle(&c, &rows) {
            Some(v) => {
                feasible += 1;
                assert_eq!(lp.status, LpStatus::Optimal, "{rows:?}");
                assert!((lp.objective - v).abs() < 1e-6, "lp {} oracle {v}", lp.objective);
                assert!(model.max_violation(&lp.x) < 1e-6);
            }
            None => assert_eq!(lp.status, LpStatus::Infeasible, "{rows:?} gave {lp:?}"),
        }
    }
    assert!(feasible > 50);
}

#[test]
fn phase_one_finds_planted_points() {
    // Feasible by construction: rows are built around a sampled point.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let point: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
        let mut m = MipModel::new("planted");
        for j in 0..n {
            m.add_var(format!("x{j}"), VarKind::Continuous, rng.gen_range(0.0..3.0));
        }
        for i in 0..rng.gen_range(1..=6) {
            let a: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-2.0..2.0))).collect();
            let lhs: f64 = a.iter().map(|&(j, v)| v * point[j]).sum();
            let (sense, rhs) = match rng.gen_range(0..3) {
                0 => (Sense::Le, lhs + rng.gen_range(0.0..1.0)),
                1 => (Sense::Ge, lhs - rng.gen_range(0.0..1.0)),
                _ => (Sense::Eq, lhs),
            };
            m.add_constraint(format!("r{i}"), a, sense, rhs);
        }
        let r = solve_lp(&m, &SolveConfig::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!(m.max_violation(&r.x) < 1e-6);
        assert!(r.objective <= m.objective_value(&point) + 1e-7);
    }
}

#[test]
fn optimal_basis_is_dual_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let rows = random_rows(&mut rng, n, 3);
        let kinds: Vec<VarKind> =
            (0..n).map(|_| if rng.gen_bool(0.5) { VarKind::Binary } else { VarKind::Continuous }).collect();
        let model = to_model(&c, &rows, &kinds);
        let mut s = LpSolver::new(&model);
        if s.solve().status != LpStatus::Optimal {
            continue;
        }
        assert!(s.max_bound_violation() < 1e-6);
        for (d, tag) in s.reduced_costs() {
            match tag {
                -1 => assert!(d >= -1e-7, "reduced cost {d} at lower bound"),
                1 => assert!(d <= 1e-7, "reduced cost {d} at upper bound"),
                _ => assert!(d.abs() <= 1e-7),
            }
        }
    }
}

/// Brute force over all binary assignments; continuous parts (at most two
/// variables) go through the vertex oracle.
fn mip_oracle(c: &[f64], rows: &[(Vec<f64>, Sense, f64)], kinds: &[VarKind]) -> Option<f64> {
    let bins: Vec<usize> = (0..c.len()).filter(|&j| kinds[j] == VarKind::Binary).collect();
    let conts: Vec<usize> = (0..c.len()).filter(|&j| kinds[j] == VarKind::Continuous).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let fixed: f64 = bins.iter().enumerate().map(|(k, &j)| if mask >> k & 1 == 1 { c[j] } else { 0.0 }).sum();
        let sub_rows: Vec<(Vec<f64>, Sense, f64)> = rows
            .iter()
            .map(|(a, s, b)| {
                let shift: f64 = bins.iter().enumerate().map(|(k, &j)| if mask >> k & 1 == 1 { a[j] } else { 0.0 }).sum();
                (conts.iter().map(|&j| a[j]).collect(), *s, b - shift)
            })
            .collect();
        let value = if conts.is_empty() {
            let ok = sub_rows.iter().all(|(_, s, b)| match s {
                Sense::Le => 0.0 <= b + 1e-9,
                Sense::Ge => 0.0 >= b - 1e-9,
                Sense::Eq => b.abs() <= 1e-9,
            });
            ok.then_some(0.0)
        } else {
            let cc: Vec<f64> = conts.iter().map(|&j| c[j]).collect();
            vertex_oracle(&cc, &sub_rows)
        };
        if let Some(v) = value {
            let total = fixed + v;
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
    }
    best
}

#[test]
fn branch_and_bound_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for round in 0..150 {
        let nb = rng.gen_range(1..=7);
        let nc = rng.gen_range(0..=2);
        let n = nb + nc;
        let mut kinds = vec![VarKind::Binary; nb];
        kinds.extend(vec![VarKind::Continuous; nc]);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..=6) as f64).collect();
        let count = rng.gen_range(1..=4);
        let rows = random_rows(&mut rng, n, count);
        let model = to_model(&c, &rows, &kinds);
        let cfg = SolveConfig::default();
        let r = solve_mip(&model, &cfg);
        match mip_oracle(&c, &rows, &kinds) {
            Some(v) => {
                assert_eq!(r.status, BnbStatus::Optimal, "round {round}");
                assert!((r.objective - v).abs() < 1e-6, "round {round}: bnb {} oracle {v}", r.objective);
                let x = r.x.as_ref().unwrap();
                assert!(model.is_feasible(x, 1e-6, 1e-6));
                assert!(r.objective >= r.best_bound - 1e-9 * r.objective.abs().max(1.0));
            }
            None => assert_eq!(r.status, BnbStatus::Infeasible, "round {round}"),
        }
        // Bound and incumbent move monotonically over the node sequence.
        for w in r.trace.windows(2) {
            assert!(w[1].best_bound >= w[0].best_bound - 1e-9);
            assert!(w[1].incumbent <= w[0].incumbent);
        }
        // Root relaxation never exceeds the integer optimum.
        if r.status == BnbStatus::Optimal {
            assert!(r.root_bound <= r.objective + 1e-9);
        }
    }
}

#[test]
fn gomory_cuts_keep_every_integer_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    for _ in 0..300 {
        let n = rng.gen_range(2..=8);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..=6) as f64).collect();
        let count = rng.gen_range(1..=4);
        let rows = random_rows(&mut rng, n, count);
        let model = to_model(&c, &rows, &vec![VarKind::Binary; n]);
        let mut lp = LpSolver::new(&model);
        if lp.solve().status != LpStatus::Optimal {
            continue;
        }
        for (terms, rhs) in lp.gomory_cuts(&vec![true; n], 50) {
            for mask in 0u32..(1 << n) {
                let x: Vec<f64> = (0..n).map(|j| f64::from(mask >> j & 1)).collect();
                if model.is_feasible(&x, 1e-9, 1e-9) {
                    let lhs: f64 = terms.iter().map(|&(j, a)| a * x[j]).sum();
                    assert!(lhs >= rhs - 1e-9, "cut {terms:?} >= {rhs} removes {x:?}");
                }
            }
            checked += 1;
        }
    }
    assert!(checked > 50, "only {checked} cuts generated");
}

#[test]
fn cuts_and_starts_keep_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4048);
    for round in 0..200 {
        let nb = rng.gen_range(3..=9);
        let nc = rng.gen_range(0..=2);
        let n = nb + nc;
        let mut kinds = vec![VarKind::Binary; nb];
        kinds.extend(vec![VarKind::Continuous; nc]);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..=6) as f64).collect();
        let count = rng.gen_range(2..=6);
        let rows = random_rows(&mut rng, n, count);
        let model = to_model(&c, &rows, &kinds);
        let Some(best) = mip_oracle(&c, &rows, &kinds) else { continue };
        let plain = SolveConfig { cut_rounds: 0, ..SolveConfig::default() };
        let cut = SolveConfig::default();
        let r = solve_mip(&model, &plain);
        assert!((r.objective - best).abs() < 1e-6, "round {round}: no cuts {} oracle {best}", r.objective);
        let r = solve_mip(&model, &cut);
        assert!((r.objective - best).abs() < 1e-6, "round {round}: cuts {} oracle {best}", r.objective);
        // An optimal start makes reduced-cost fixing act from the root.
        let started = mipcore::solve_mip_with_start(&model, &cut, r.x.as_deref());
        assert!((started.objective - best).abs() < 1e-6, "round {round}: started {}", started.objective);
        assert!(model.is_feasible(started.x.as_ref().unwrap(), 1e-6, 1e-6));
    }
}

#[test]
fn deterministic_and_parallel_runs_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..30 {
        let n = 10;
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-9..=9) as f64).collect();
        let rows = random_rows(&mut rng, n, 5);
        let model = to_model(&c, &rows, &vec![VarKind::Binary; n]);
        let a = solve_mip(&model, &SolveConfig::default());
        let b = solve_mip(&model, &SolveConfig::default());
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.x, b.x);
        let p = solve_mip(&model, &SolveConfig::default().with_threads(3));
        assert_eq!(a.status, p.status);
        if a.status == BnbStatus::Optimal {
            assert!((a.objective - p.objective).abs() <= 1e-9 * a.objective.abs().max(1.0));
        }
    }
}
