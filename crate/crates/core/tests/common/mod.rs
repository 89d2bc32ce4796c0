//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num::{BigRational, One, Signed, ToPrimitive, Zero};
use sparsegame::generators::{gen_random, gen_random_alternating};
use sparsegame::lp::LpProblem;
use sparsegame::{Owner, RngSeed, SafetyGame};

/// Winning region by repeated full sweeps: drop any player-0 position with no
/// edge into the current set and any player-1 position with an edge out of it.
pub fn naive_winning(game: &SafetyGame) -> Vec<bool> {
    let mut w = vec![true; game.num_positions()];
    loop {
        let mut changed = false;
        for v in game.positions() {
            if !w[v.index()] {
                continue;
            }
            let edges = game.edges(v);
            let keep = match game.owner(v) {
                Owner::Zero => edges.iter().any(|&(_, t)| w[t.index()]),
                Owner::One => edges.iter().all(|&(_, t)| w[t.index()]),
            };
            if !keep {
                w[v.index()] = false;
                changed = true;
            }
        }
        if !changed {
            return w;
        }
    }
}

/// Seeded small games, half of them alternating. `i` indexes the corpus.
pub fn small_random_game(i: u64) -> SafetyGame {
    let n0 = 4 + (i % 9) as usize;
    let n1 = 4 + ((i / 9) % 7) as usize;
    let k = 2 + (i % 3) as usize;
    if i.is_multiple_of(2) {
        gen_random(RngSeed(i), n0, n1, k)
    } else {
        gen_random_alternating(RngSeed(i), n0, n1, k)
    }
}

/// Satisfiability by enumerating every assignment.
pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<i32>]) -> bool {
    assert!(num_vars <= 24);
    let masks: Vec<(u32, u32)> = clauses
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, n), &l| {
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect();
    (0..1u32 << num_vars).any(|a| masks.iter().all(|&(p, n)| a & p != 0 || !a & n != 0))
}

/// Plain recursive DPLL with unit propagation.
pub fn dpll(num_vars: usize, clauses: &[Vec<i32>]) -> bool {
    fn go(assign: &mut Vec<i8>, clauses: &[Vec<i32>]) -> bool {
        let val = |a: &Vec<i8>, l: i32| {
            let v = a[l.unsigned_abs() as usize - 1];
            if l > 0 {
                v
            } else {
                -v
            }
        };
        let mut trail = Vec::new();
        loop {
            let mut unit = None;
            for c in clauses {
                if c.iter().any(|&l| val(assign, l) == 1) {
                    continue;
                }
                let open: Vec<i32> = c.iter().copied().filter(|&l| val(assign, l) == 0).collect();
                match open.len() {
                    0 => {
                        for v in trail {
                            assign[v] = 0;
                        }
                        return false;
                    }
                    1 => {
                        unit = Some(open[0]);
                        break;
                    }
                    _ => {}
                }
            }
            let Some(l) = unit else { break };
            let v = l.unsigned_abs() as usize - 1;
            assign[v] = if l > 0 { 1 } else { -1 };
            trail.push(v);
        }
        let Some(v) = assign.iter().position(|&x| x == 0) else {
            return true;
        };
        for val in [1, -1] {
            assign[v] = val;
            if go(assign, clauses) {
                return true;
            }
        }
        assign[v] = 0;
        for v in trail {
            assign[v] = 0;
        }
        false
    }
    if clauses.iter().any(|c| c.is_empty()) {
        return false;
    }
    go(&mut vec![0; num_vars], clauses)
}

/// Exact two-phase tableau simplex over rationals (Bland's rule), used only
/// as a reference for the floating point solver. Every bound `lo ≤ x ≤ hi` is
/// written with `y = x − lo ≥ 0` plus an explicit row `y ≤ hi − lo`.
/// Returns `None` when infeasible.
pub fn reference_lp(p: &LpProblem) -> Option<f64> {
    let q = |x: f64| BigRational::from_float(x).expect("finite");
    let n = p.num_vars();
    // Rows as (coefficients over y, sense ≥ / ≤, rhs).
    let mut rows: Vec<(Vec<BigRational>, bool, BigRational)> = Vec::new();
    for c in &p.constraints {
        let mut a = vec![BigRational::zero(); n];
        let mut rhs = q(c.rhs);
        for &(j, v) in &c.terms {
            a[j] += q(v);
            rhs -= q(v) * q(p.bounds[j].0);
        }
        rows.push((a, true, rhs));
    }
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        let mut a = vec![BigRational::zero(); n];
        a[j] = BigRational::one();
        rows.push((a, false, q(hi) - q(lo)));
    }
    let m = rows.len();
    // Columns: y (n), slack/surplus (m), artificial (m), rhs.
    let width = n + 2 * m + 1;
    let mut t = vec![vec![BigRational::zero(); width]; m];
    let mut basis = vec![0; m];
    for (i, (a, ge, rhs)) in rows.into_iter().enumerate() {
        let sign = if rhs.is_negative() { -BigRational::one() } else { BigRational::one() };
        for j in 0..n {
            t[i][j] = &a[j] * &sign;
        }
        t[i][n + i] = if ge { -sign.clone() } else { sign.clone() };
        t[i][n + m + i] = BigRational::one();
        t[i][width - 1] = rhs * sign;
        basis[i] = n + m + i;
    }

    let pivot = |t: &mut Vec<Vec<BigRational>>, r: usize, c: usize| {
        let inv = BigRational::one() / &t[r][c];
        for x in t[r].iter_mut() {
            *x *= &inv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, pv) in row.iter_mut().zip(&prow) {
                    *x -= &f * pv;
                }
            }
        }
    };
    let run = |t: &mut Vec<Vec<BigRational>>, basis: &mut Vec<usize>, cost: &[BigRational], allowed: usize| loop {
        // Reduced costs d_j = c_j − c_B · column_j.
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut d = cost[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                d -= &cost[b] * &t[i][j];
            }
            d.is_negative()
        });
        let Some(c) = entering else { return };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..t.len() {
            if t[i][c].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][c];
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave.expect("bounded problem");
        pivot(t, r, c);
        basis[r] = c;
    };

    let mut phase1 = vec![BigRational::zero(); width - 1];
    for c in &mut phase1[n + m..n + 2 * m] {
        *c = BigRational::one();
    }
    run(&mut t, &mut basis, &phase1, width - 1);
    let infeas: BigRational = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n + m)
        .map(|(i, _)| t[i][width - 1].clone())
        .sum();
    if infeas.is_positive() {
        return None;
    }
    // Drive remaining zero-level artificials out of the basis.
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n + m {
            match (0..n + m).find(|&j| !t[i][j].is_zero()) {
                Some(c) => {
                    pivot(&mut t, i, c);
                    basis[i] = c;
                }
                None => {
                    t.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut phase2 = vec![BigRational::zero(); width - 1];
    for (c, &o) in phase2.iter_mut().zip(&p.objective) {
        *c = q(o);
    }
    run(&mut t, &mut basis, &phase2, n + m);
    let mut obj: BigRational = (0..n).map(|j| q(p.objective[j]) * q(p.bounds[j].0)).sum();
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            obj += q(p.objective[b]) * &t[i][width - 1];
        }
    }
    Some(obj.to_f64().expect("representable"))
}

/// Wilson score interval at 99% (z = 2.576).
pub fn wilson_99(successes: usize, n: usize) -> (f64, f64) {
    let z = 2.576f64;
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let denom = 1.0 + z * z / n_f;
    let centre = (p + z * z / (2.0 * n_f)) / denom;
    let half = z * ((p * (1.0 - p) / n_f + z * z / (4.0 * n_f * n_f)).sqrt()) / denom;
    (centre - half, centre + half)
}
