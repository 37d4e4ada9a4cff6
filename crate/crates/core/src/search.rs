//! Exact minimum-`|B|` (and minimum `|A| + |B|`) search over a finite grid,
//! independent of the certification pipeline.
//!
//! The search branches on targets: it picks the uncovered `e_i + e_j` with
//! the fewest usable decompositions `(a, b)` and tries each one. States
//! `(A, B)` already explored are skipped, and nodes whose lower bound reaches
//! the incumbent are pruned. The incumbent starts from the extremal
//! construction whenever that fits inside the universe.

use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Rational, RatVec};
use crate::model::{all_pairs, extremal_construction, theorem_bound, verify_cover, Instance, Pair};

pub const DEFAULT_CAP: u64 = 1_000_000;

/// Vectors in `(1/denom) Z^n` with every coordinate in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    pub n: usize,
    pub lo: i64,
    pub hi: i64,
    #[serde(rename = "denominator")]
    pub denom: u64,
}

impl Universe {
    pub fn new(n: usize, lo: i64, hi: i64, denom: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if lo > hi {
            return Err(Error::InvalidParams(format!("lo = {lo} exceeds hi = {hi}")));
        }
        if denom == 0 {
            return Err(Error::InvalidParams("denominator must be positive".into()));
        }
        Ok(Universe { n, lo, hi, denom })
    }

    /// Number of grid values per coordinate.
    pub fn width(&self) -> u128 {
        (self.hi - self.lo) as u128 * self.denom as u128 + 1
    }

    pub fn size(&self) -> u128 {
        self.width().checked_pow(self.n as u32).unwrap_or(u128::MAX)
    }

    pub fn check_cap(&self, cap: u64) -> Result<()> {
        let size = self.size();
        if size > cap as u128 {
            Err(Error::UniverseTooLarge { size, cap })
        } else {
            Ok(())
        }
    }

    fn scaled_lo(&self) -> i64 {
        self.lo * self.denom as i64
    }

    fn scaled_hi(&self) -> i64 {
        self.hi * self.denom as i64
    }

    /// Index of a scaled integer vector, coordinate 0 most significant so
    /// that index order is lexicographic order.
    fn index_of(&self, scaled: &[i64]) -> Option<usize> {
        let width = self.width() as usize;
        let mut idx = 0usize;
        for &k in scaled {
            if k < self.scaled_lo() || k > self.scaled_hi() {
                return None;
            }
            idx = idx * width + (k - self.scaled_lo()) as usize;
        }
        Some(idx)
    }

    fn scaled_of(&self, mut idx: usize) -> Vec<i64> {
        let width = self.width() as usize;
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = (idx % width) as i64 + self.scaled_lo();
            idx /= width;
        }
        out
    }

    pub fn element(&self, idx: usize) -> RatVec {
        let d = BigInt::from(self.denom);
        RatVec(
            self.scaled_of(idx)
                .into_iter()
                .map(|k| Rational::new(BigInt::from(k), d.clone()))
                .collect(),
        )
    }

    pub fn contains(&self, v: &RatVec) -> bool {
        self.index_from_vec(v).is_some()
    }

    fn index_from_vec(&self, v: &RatVec) -> Option<usize> {
        if v.dim() != self.n {
            return None;
        }
        let d = Rational::from_integer(BigInt::from(self.denom));
        let mut scaled = Vec::with_capacity(self.n);
        for c in v.coords() {
            let s = c * &d;
            if !s.is_integer() {
                return None;
            }
            scaled.push(i64::try_from(s.to_integer()).ok()?);
        }
        self.index_of(&scaled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Objective {
    /// Minimise `|B|` subject to `|A| <= n - t`.
    MinB { t: usize },
    /// Minimise `|A| + |B|`.
    MinSum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    pub universe: Universe,
    pub objective: Objective,
    /// `None` when no feasible pair exists inside the universe; serialized
    /// as the string `"Infeasible"`.
    #[serde(rename = "minB", with = "infeasible")]
    pub minimum: Option<usize>,
    /// The proven lower bound for this objective: `n + C(t+1, 2)` for
    /// minimum `|B|`, `2n` for minimum `|A| + |B|`.
    pub bound: usize,
    #[serde(rename = "witnessA")]
    pub witness_a: BTreeSet<RatVec>,
    #[serde(rename = "witnessB")]
    pub witness_b: BTreeSet<RatVec>,
    #[serde(rename = "nodesExplored")]
    pub nodes_explored: u64,
}

mod infeasible {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    const TAG: &str = "Infeasible";

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(usize),
        Tag(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(k) => s.serialize_u64(*k as u64),
            None => s.serialize_str(TAG),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Value(k) => Ok(Some(k)),
            Repr::Tag(t) if t == TAG => Ok(None),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("expected an integer or \"{TAG}\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub cap: u64,
    pub workers: usize,
    /// Start from the extremal construction when it fits the universe.
    pub seed_incumbent: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { cap: DEFAULT_CAP, workers: 1, seed_incumbent: true }
    }
}

struct Problem {
    targets: Vec<Pair>,
    /// Per target, every `(a, b)` with `a + b = target`, ascending in `a`.
    decomps: Vec<Vec<(u32, u32)>>,
    objective: Objective,
    a_cap: usize,
    universe_size: usize,
}

impl Problem {
    fn build(universe: &Universe, objective: Objective) -> Result<Problem> {
        let n = universe.n;
        let targets: Vec<Pair> = all_pairs(n).collect();
        let d = universe.denom as i64;
        let size = universe.size() as usize;
        let mut decomps = Vec::with_capacity(targets.len());
        for pair in &targets {
            let mut target = vec![0i64; n];
            target[pair.i - 1] += d;
            target[pair.j - 1] += d;
            let mut list = Vec::new();
            let mut diff = vec![0i64; n];
            for a in 0..size {
                let av = universe.scaled_of(a);
                for k in 0..n {
                    diff[k] = target[k] - av[k];
                }
                if let Some(b) = universe.index_of(&diff) {
                    list.push((a as u32, b as u32));
                }
            }
            if list.is_empty() {
                return Err(Error::InfeasibleUniverse(*pair));
            }
            decomps.push(list);
        }
        let a_cap = match objective {
            Objective::MinB { t } => n - t,
            Objective::MinSum => usize::MAX,
        };
        Ok(Problem { targets, decomps, objective, a_cap, universe_size: size })
    }
}

#[derive(Clone)]
struct State {
    in_a: Vec<bool>,
    in_b: Vec<bool>,
    a: Vec<u32>,
    b: Vec<u32>,
}

impl State {
    fn new(size: usize) -> Self {
        State { in_a: vec![false; size], in_b: vec![false; size], a: Vec::new(), b: Vec::new() }
    }

    fn key(&self) -> (Vec<u32>, Vec<u32>) {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.sort_unstable();
        b.sort_unstable();
        (a, b)
    }
}

struct Searcher<'p> {
    problem: &'p Problem,
    best: &'p AtomicUsize,
    state: State,
    visited: HashSet<(Vec<u32>, Vec<u32>)>,
    witness: Option<(usize, Vec<u32>, Vec<u32>)>,
    nodes: u64,
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

impl<'p> Searcher<'p> {
    fn new(problem: &'p Problem, best: &'p AtomicUsize) -> Self {
        Searcher {
            problem,
            best,
            state: State::new(problem.universe_size),
            visited: HashSet::new(),
            witness: None,
            nodes: 0,
        }
    }

    fn value(&self) -> usize {
        match self.problem.objective {
            Objective::MinB { .. } => self.state.b.len(),
            Objective::MinSum => self.state.a.len() + self.state.b.len(),
        }
    }

    fn covered(&self, target: usize) -> bool {
        self.problem.decomps[target]
            .iter()
            .any(|&(a, b)| self.state.in_a[a as usize] && self.state.in_b[b as usize])
    }

    fn a_room(&self) -> bool {
        self.state.a.len() < self.problem.a_cap
    }

    fn usable(&self, a: u32) -> bool {
        self.state.in_a[a as usize] || self.a_room()
    }

    /// Lower bound on the objective of any completion of the current state.
    /// Uses only counting: `|A_f| |B_f| >= #targets`, and targets that cannot
    /// reuse an existing `b` each need a new one.
    fn lower_bound(&self, uncovered: &[usize]) -> usize {
        let total = self.problem.targets.len();
        let (na, nb) = (self.state.a.len(), self.state.b.len());
        match self.problem.objective {
            Objective::MinB { .. } => {
                let cap = self.problem.a_cap;
                let needy = uncovered
                    .iter()
                    .filter(|&&t| {
                        !self.problem.decomps[t]
                            .iter()
                            .any(|&(a, b)| self.state.in_b[b as usize] && self.usable(a))
                    })
                    .count();
                ceil_div(total, cap).max(nb + ceil_div(needy, cap))
            }
            Objective::MinSum => {
                let step = usize::from(!uncovered.is_empty());
                let product = (na.max(1)..=total.max(na))
                    .map(|fa| fa + nb.max(ceil_div(total, fa)))
                    .min()
                    .unwrap_or(na + nb);
                product.max(na + nb + step)
            }
        }
    }

    fn dfs(&mut self) {
        self.nodes += 1;
        let uncovered: Vec<usize> = (0..self.problem.targets.len()).filter(|&t| !self.covered(t)).collect();
        if uncovered.is_empty() {
            let value = self.value();
            if self.best.fetch_min(value, Ordering::SeqCst) > value {
                self.witness = Some((value, self.state.a.clone(), self.state.b.clone()));
            }
            return;
        }
        if self.lower_bound(&uncovered) >= self.best.load(Ordering::SeqCst) {
            return;
        }
        let Some(target) = self.pick_target(&uncovered) else {
            return;
        };
        let options: Vec<(u32, u32)> = self.problem.decomps[target]
            .iter()
            .copied()
            .filter(|&(a, _)| self.usable(a))
            .collect();
        for (a, b) in options {
            self.branch(a, b);
        }
    }

    /// Most constrained uncovered target; `None` if one has no usable
    /// decomposition left.
    fn pick_target(&self, uncovered: &[usize]) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for &t in uncovered {
            let count = self.problem.decomps[t].iter().filter(|&&(a, _)| self.usable(a)).count();
            if count == 0 {
                return None;
            }
            if best.is_none_or(|(c, _)| count < c) {
                best = Some((count, t));
            }
        }
        best.map(|(_, t)| t)
    }

    fn branch(&mut self, a: u32, b: u32) {
        let new_a = !self.state.in_a[a as usize];
        let new_b = !self.state.in_b[b as usize];
        if new_a {
            self.state.in_a[a as usize] = true;
            self.state.a.push(a);
        }
        if new_b {
            self.state.in_b[b as usize] = true;
            self.state.b.push(b);
        }
        if self.visited.insert(self.state.key()) {
            self.dfs();
        }
        if new_b {
            self.state.in_b[b as usize] = false;
            self.state.b.pop();
        }
        if new_a {
            self.state.in_a[a as usize] = false;
            self.state.a.pop();
        }
    }
}

/// Best known feasible pair from the extremal constructions that fit.
fn initial_incumbent(universe: &Universe, objective: Objective) -> Result<Option<(usize, Instance)>> {
    let n = universe.n;
    let ts: Vec<usize> = match objective {
        Objective::MinB { t } => vec![t],
        Objective::MinSum => (0..n).collect(),
    };
    let mut best: Option<(usize, Instance)> = None;
    for t in ts {
        let inst = extremal_construction(n, t, None)?;
        if !inst.a.iter().chain(&inst.b).all(|v| universe.contains(v)) {
            continue;
        }
        let value = match objective {
            Objective::MinB { .. } => inst.b.len(),
            Objective::MinSum => inst.a.len() + inst.b.len(),
        };
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, inst));
        }
    }
    Ok(best)
}

fn run_search(universe: &Universe, objective: Objective, opts: SearchOptions) -> Result<SearchResult> {
    universe.check_cap(opts.cap)?;
    let problem = Problem::build(universe, objective)?;
    let incumbent = if opts.seed_incumbent { initial_incumbent(universe, objective)? } else { None };
    let explore = |limit: usize| {
        let best = AtomicUsize::new(limit);
        if opts.workers <= 1 {
            let mut s = Searcher::new(&problem, &best);
            s.dfs();
            (s.nodes, s.witness)
        } else {
            parallel_search(&problem, &best, opts.workers)
        }
    };

    let (nodes, witness) = match &incumbent {
        Some((value, _)) => explore(*value),
        None => {
            // iterative deepening: look for a solution of value <= k for k = 1, 2, ...
            let most = match objective {
                Objective::MinB { .. } => problem.targets.len(),
                Objective::MinSum => 2 * problem.targets.len(),
            };
            let mut total = 0;
            let mut found = None;
            for k in 1..=most {
                let (nodes, witness) = explore(k + 1);
                total += nodes;
                if witness.is_some() {
                    found = witness;
                    break;
                }
            }
            (total, found)
        }
    };

    let n = universe.n;
    let (minimum, witness_a, witness_b) = match (witness, incumbent) {
        (Some((value, a, b)), _) => (
            Some(value),
            a.iter().map(|&i| universe.element(i as usize)).collect(),
            b.iter().map(|&i| universe.element(i as usize)).collect(),
        ),
        (None, Some((value, inst))) => (Some(value), inst.a, inst.b),
        (None, None) => (None, BTreeSet::new(), BTreeSet::new()),
    };

    if minimum.is_some() {
        let t = match objective {
            Objective::MinB { t } => t,
            Objective::MinSum => 0,
        };
        let check = Instance::new(n, t, Instance::standard_basis(n), witness_a.clone(), witness_b.clone())?;
        if !verify_cover(&check)?.covered {
            return Err(Error::AssertionFailed("search witness does not cover every target".into()));
        }
    }

    let bound = match objective {
        Objective::MinB { t } => theorem_bound(n, t),
        Objective::MinSum => 2 * n,
    };
    Ok(SearchResult { n, universe: *universe, objective, minimum, bound, witness_a, witness_b, nodes_explored: nodes })
}

/// Objective value with the chosen `A` and `B` indices.
type Found = (usize, Vec<u32>, Vec<u32>);

/// Splits the branches of the root across workers sharing one incumbent.
fn parallel_search(problem: &Problem, best: &AtomicUsize, workers: usize) -> (u64, Option<Found>) {
    let mut root = Searcher::new(problem, best);
    root.nodes = 1;
    let uncovered: Vec<usize> = (0..problem.targets.len()).collect();
    let Some(target) = root.pick_target(&uncovered) else {
        return (1, None);
    };
    let options: Vec<(u32, u32)> = problem.decomps[target].clone();
    let results: Vec<(u64, Option<Found>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let mine: Vec<(u32, u32)> = options.iter().copied().skip(w).step_by(workers).collect();
                scope.spawn(move || {
                    let mut s = Searcher::new(problem, best);
                    for (a, b) in mine {
                        s.branch(a, b);
                    }
                    (s.nodes, s.witness)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    let nodes = 1 + results.iter().map(|(n, _)| n).sum::<u64>();
    let witness = results.into_iter().filter_map(|(_, w)| w).min_by_key(|(v, _, _)| *v);
    (nodes, witness)
}

/// Exact minimum of `|B|` over `A, B` inside the universe with
/// `|A| <= n - t` and every `e_i + e_j` in `A + B`.
pub fn min_b_search(n: usize, t: usize, universe: &Universe, opts: SearchOptions) -> Result<SearchResult> {
    if universe.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: universe.n });
    }
    if t >= n {
        return Err(Error::InvalidParams(format!("t = {t} must satisfy 0 <= t <= n-1")));
    }
    run_search(universe, Objective::MinB { t }, opts)
}

/// Exact minimum of `|A| + |B|` over covering pairs inside the universe.
pub fn min_sum_search(n: usize, universe: &Universe, opts: SearchOptions) -> Result<SearchResult> {
    if universe.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: universe.n });
    }
    run_search(universe, Objective::MinSum, opts)
}
