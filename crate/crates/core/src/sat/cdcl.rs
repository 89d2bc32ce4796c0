//! Conflict-driven clause learning.
//!
//! Two watched literals per clause with blocker literals, first-UIP learning
//! with local clause minimization, VSIDS activities kept in a binary heap
//! (ties broken by the smaller variable index), phase saving, Luby restarts
//! and activity-based deletion of learnt clauses. Nothing is randomized, so a
//! given formula is always solved along the same search path.

use std::time::Instant;

use super::{Cnf, SatError, SatOutcome, SatStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverLimits {
    pub max_conflicts: u64,
    pub deadline: Option<Instant>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self { max_conflicts: 10_000_000, deadline: None }
    }
}

pub fn sat_solve(cnf: &Cnf) -> Result<SatOutcome, SatError> {
    sat_solve_with(cnf, &SolverLimits::default())
}

pub fn sat_solve_with(cnf: &Cnf, limits: &SolverLimits) -> Result<SatOutcome, SatError> {
    let mut solver = Solver::new(cnf.num_vars);
    for c in &cnf.clauses {
        let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
        if !solver.add_clause(lits) {
            return Ok(SatOutcome { status: SatStatus::Unsat, model: None });
        }
    }
    solver.solve(limits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, negative: bool) -> Self {
        Lit(((var as u32) << 1) | negative as u32)
    }

    fn from_dimacs(l: i32) -> Self {
        Lit::new(l.unsigned_abs() as usize - 1, l < 0)
    }

    #[inline]
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    fn negative(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

/// Max-heap over variables keyed by activity.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<usize>,
    slot: Vec<Option<usize>>,
}

impl VarHeap {
    fn above(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.slot[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.slot[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.slot[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.slot[last] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.slot[v] {
            self.sift_up(i, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if !Self::above(act, v, self.heap[p]) {
                break;
            }
            self.heap[i] = self.heap[p];
            self.slot[self.heap[i]] = Some(i);
            i = p;
        }
        self.heap[i] = v;
        self.slot[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::above(act, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::above(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.slot[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.slot[v] = Some(i);
    }
}

/// `luby(i)` for `i ≥ 1`: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 …
fn luby(mut i: u64) -> u64 {
    loop {
        let mut k = 1;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    num_learnts: usize,
    max_learnts: f64,
}

const RESTART_UNIT: u64 = 100;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

impl Solver {
    fn new(num_vars: usize) -> Self {
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            phase: vec![false; num_vars],
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            clause_inc: 1.0,
            heap: VarHeap { heap: Vec::new(), slot: vec![None; num_vars] },
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; num_vars],
            num_learnts: 0,
            max_learnts: 0.0,
        };
        for v in 0..num_vars {
            s.heap.insert(v, &s.activity);
        }
        s
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let v = self.assigns[l.var()];
        if l.negative() {
            -v
        } else {
            v
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var();
        self.assigns[v] = if l.negative() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds an input clause at level 0. Returns false once the formula is
    /// known to be unsatisfiable.
    fn add_clause(&mut self, mut lits: Vec<Lit>) -> bool {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        lits.retain(|&l| self.value(l) != FALSE);
        if lits.iter().any(|&l| self.value(l) == TRUE) {
            return true;
        }
        match lits.len() {
            0 => false,
            1 => {
                self.enqueue(lits[0], None);
                self.propagate().is_none()
            }
            _ => {
                self.attach(lits, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watch { clause: cref, blocker: lits[1] });
        self.watches[lits[1].code()].push(Watch { clause: cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.num_learnts += 1;
        }
        cref
    }

    /// Unit propagation; returns a conflicting clause if one arises.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.clause as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = Watch { clause: w.clause, blocker: first };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l.code()].push(Watch { clause: w.clause, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watch { clause: w.clause, blocker: first };
                j += 1;
                if self.value(first) == FALSE {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.clause));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal
    /// first, a literal of the backjump level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut implied: Option<Lit> = None;
        loop {
            self.bump_clause(confl as usize);
            let lits = self.clauses[confl as usize].lits.clone();
            let skip = usize::from(implied.is_some());
            for &q in &lits[skip..] {
                let v = q.var();
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.bump_var(v);
                if self.level[v] == self.decision_level() {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var()] = false;
            pending -= 1;
            implied = Some(p);
            if pending == 0 {
                break;
            }
            confl = self.reason[p.var()].expect("implied literal has a reason");
        }
        learnt[0] = !implied.expect("conflict above level 0");

        // Drop literals implied by the rest of the clause.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                i == 0
                    || match self.reason[l.var()] {
                        None => true,
                        Some(r) => self.clauses[r as usize].lits[1..].iter().any(|&q| {
                            !self.seen[q.var()] && self.level[q.var()] > 0
                        }),
                    }
            })
            .collect();
        for &l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut learnt: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter_map(|(l, k)| k.then_some(l))
            .collect();

        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1].var()];
        }
        (learnt, back)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.phase[v] = !l.negative();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = start;
    }

    fn locked(&self, cref: usize) -> bool {
        let l = self.clauses[cref].lits[0];
        self.value(l) == TRUE && self.reason[l.var()] == Some(cref as u32)
    }

    fn reduce_learnts(&mut self) {
        let mut learnts: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| self.clauses[i].learnt && !self.clauses[i].deleted)
            .collect();
        learnts.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
                .then(a.cmp(&b))
        });
        let half = learnts.len() / 2;
        for &i in &learnts[..half] {
            if self.clauses[i].lits.len() > 2 && !self.locked(i) {
                self.clauses[i].deleted = true;
                self.clauses[i].lits.shrink_to_fit();
                self.num_learnts -= 1;
            }
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Lit::new(v, !self.phase[v]));
            }
        }
        None
    }

    fn solve(&mut self, limits: &SolverLimits) -> Result<SatOutcome, SatError> {
        if self.propagate().is_some() {
            return Ok(SatOutcome { status: SatStatus::Unsat, model: None });
        }
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(1000.0);
        let mut conflicts: u64 = 0;
        let mut restart_round: u64 = 1;
        let mut restart_budget = luby(restart_round) * RESTART_UNIT;
        let mut since_restart: u64 = 0;
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    return Ok(SatOutcome { status: SatStatus::Unsat, model: None });
                }
                if conflicts > limits.max_conflicts {
                    return Err(SatError::ConflictBudget);
                }
                if conflicts.is_multiple_of(256) && limits.deadline.is_some_and(|d| Instant::now() >= d) {
                    return Err(SatError::Deadline);
                }
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref as usize);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;
            } else {
                if since_restart >= restart_budget {
                    since_restart = 0;
                    restart_round += 1;
                    restart_budget = luby(restart_round) * RESTART_UNIT;
                    self.cancel_until(0);
                    continue;
                }
                if self.num_learnts as f64 >= self.max_learnts + self.trail.len() as f64 {
                    self.reduce_learnts();
                    self.max_learnts *= 1.1;
                }
                match self.pick_branch() {
                    None => {
                        let model = self.assigns.iter().map(|&a| a == TRUE).collect();
                        return Ok(SatOutcome { status: SatStatus::Sat, model: Some(model) });
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }
}
