//! Instances `(S, A, B, n, t)`, the covering check `S+S ⊆ A+B`, fixed
//! representations of each target, and the sharp extremal construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply_map, basis_inverse, RatVec};

/// Target index pair `(i, j)` with `1 <= i <= j <= n`. Serialized as `[i, j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Pair {
    pub i: usize,
    pub j: usize,
}

impl Pair {
    pub fn new(i: usize, j: usize) -> Self {
        debug_assert!(1 <= i && i <= j);
        Pair { i, j }
    }

    pub fn is_diagonal(&self) -> bool {
        self.i == self.j
    }

    /// `e_i + e_j` in dimension `n`.
    pub fn target(&self, n: usize) -> RatVec {
        &RatVec::unit(n, self.i - 1) + &RatVec::unit(n, self.j - 1)
    }
}

impl From<(usize, usize)> for Pair {
    fn from((i, j): (usize, usize)) -> Self {
        Pair { i, j }
    }
}

impl From<Pair> for (usize, usize) {
    fn from(p: Pair) -> Self {
        (p.i, p.j)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// All pairs `1 <= i <= j <= n` in lexicographic order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = Pair> {
    (1..=n).flat_map(move |i| (i..=n).map(move |j| Pair::new(i, j)))
}

/// Pairs with `i < j`, the off-diagonal targets.
pub fn off_diagonal_pairs(n: usize) -> impl Iterator<Item = Pair> {
    all_pairs(n).filter(|p| !p.is_diagonal())
}

pub fn binom2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// `n + C(t+1, 2)`, the lower bound for `|B|` when `|A| <= n - t`.
pub fn theorem_bound(n: usize, t: usize) -> usize {
    n + binom2(t + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub n: usize,
    pub t: usize,
    #[serde(rename = "S")]
    pub s: Vec<RatVec>,
    #[serde(rename = "A")]
    pub a: BTreeSet<RatVec>,
    #[serde(rename = "B")]
    pub b: BTreeSet<RatVec>,
}

impl Instance {
    pub fn standard_basis(n: usize) -> Vec<RatVec> {
        (0..n).map(|k| RatVec::unit(n, k)).collect()
    }

    pub fn new(n: usize, t: usize, s: Vec<RatVec>, a: BTreeSet<RatVec>, b: BTreeSet<RatVec>) -> Result<Self> {
        let inst = Instance { n, t, s, a, b };
        inst.validate()?;
        Ok(inst)
    }

    /// Dimension checks. `t` is only range-checked at certification time.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if self.s.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "S has {} vectors, expected n = {}",
                self.s.len(),
                self.n
            )));
        }
        for v in self.s.iter().chain(&self.a).chain(&self.b) {
            if v.dim() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: v.dim() });
            }
        }
        Ok(())
    }

    pub fn is_standard(&self) -> bool {
        self.s == Self::standard_basis(self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub covered: bool,
    pub missing: Vec<Pair>,
}

/// Maps `S` to the standard basis and `A`, `B` through the same linear map.
pub fn normalize_to_standard(inst: &Instance) -> Result<Instance> {
    inst.validate()?;
    if inst.is_standard() {
        return Ok(inst.clone());
    }
    let m = basis_inverse(&inst.s)?;
    let map_set = |set: &BTreeSet<RatVec>| -> Result<BTreeSet<RatVec>> { set.iter().map(|v| apply_map(&m, v)).collect() };
    let out = Instance {
        n: inst.n,
        t: inst.t,
        s: Instance::standard_basis(inst.n),
        a: map_set(&inst.a)?,
        b: map_set(&inst.b)?,
    };
    debug_assert_eq!(out.a.len(), inst.a.len());
    debug_assert_eq!(out.b.len(), inst.b.len());
    Ok(out)
}

/// Every `a` in `A` (ascending) with `target - a` in `B`.
fn decompositions<'a>(inst: &'a Instance, target: &'a RatVec) -> impl Iterator<Item = (&'a RatVec, RatVec)> + 'a {
    inst.a.iter().filter_map(move |a| {
        let b = target - a;
        inst.b.contains(&b).then_some((a, b))
    })
}

pub fn verify_cover(inst: &Instance) -> Result<CoverReport> {
    let norm = normalize_to_standard(inst)?;
    Ok(cover_report_normalized(&norm))
}

fn cover_report_normalized(norm: &Instance) -> CoverReport {
    let missing: Vec<Pair> = all_pairs(norm.n)
        .filter(|p| {
            let target = p.target(norm.n);
            let mut options = decompositions(norm, &target);
            options.next().is_none()
        })
        .collect();
    CoverReport { covered: missing.is_empty(), missing }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Lexicographic,
    SeededRandom(u64),
}

/// One fixed decomposition `e_i + e_j = a_ij + b_ij` per pair, stored in the
/// standard-basis coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub n: usize,
    #[serde(with = "entry_list")]
    pub entries: BTreeMap<Pair, (RatVec, RatVec)>,
}

/// JSON has no tuple keys; entries go over the wire as `[{pair, a, b}, ...]`.
mod entry_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        pair: Pair,
        a: RatVec,
        b: RatVec,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<Pair, (RatVec, RatVec)>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.iter().map(|(pair, (a, b))| Entry { pair: *pair, a: a.clone(), b: b.clone() }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Pair, (RatVec, RatVec)>, D::Error> {
        let list = Vec::<Entry>::deserialize(d)?;
        Ok(list.into_iter().map(|e| (e.pair, (e.a, e.b))).collect())
    }
}

impl Representation {
    /// Checks totality and `a + b = e_i + e_j` for every entry.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != binom2(self.n + 1) {
            return Err(Error::InvalidParams(format!(
                "representation has {} entries, expected {}",
                self.entries.len(),
                binom2(self.n + 1)
            )));
        }
        for pair in all_pairs(self.n) {
            let (a, b) = self.entries.get(&pair).ok_or(Error::InvalidRepresentation { pair })?;
            if a.dim() != self.n || b.dim() != self.n || a + b != pair.target(self.n) {
                return Err(Error::InvalidRepresentation { pair });
            }
        }
        Ok(())
    }
}

pub fn choose_representations(inst: &Instance, strategy: Strategy) -> Result<Representation> {
    let norm = normalize_to_standard(inst)?;
    let report = cover_report_normalized(&norm);
    if !report.covered {
        return Err(Error::NotCovered(report.missing));
    }
    let mut rng = match strategy {
        Strategy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::Lexicographic => None,
    };
    let mut entries = BTreeMap::new();
    for pair in all_pairs(norm.n) {
        let target = pair.target(norm.n);
        let mut options = decompositions(&norm, &target);
        let (a, b) = match rng.as_mut() {
            // b is determined by a, so the smallest a is also the (a, b) tie-break
            None => options.next(),
            Some(rng) => options.collect::<Vec<_>>().choose(rng).cloned(),
        }
        .expect("covered target has a decomposition");
        entries.insert(pair, (a.clone(), b));
    }
    let rep = Representation { n: norm.n, entries };
    rep.validate()?;
    Ok(rep)
}

/// `A = {s_1..s_{n-t}}`, `B = S ∪ {s_i + s_j - s_1 : n-t < i <= j <= n}`.
pub fn extremal_construction(n: usize, t: usize, basis: Option<Vec<RatVec>>) -> Result<Instance> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if t >= n {
        return Err(Error::InvalidParams(format!("t = {t} must satisfy 0 <= t <= n-1 = {}", n - 1)));
    }
    let s = match basis {
        Some(s) => {
            if s.len() != n {
                return Err(Error::InvalidParams(format!("basis has {} vectors, expected {n}", s.len())));
            }
            basis_inverse(&s)?;
            s
        }
        None => Instance::standard_basis(n),
    };
    let a: BTreeSet<RatVec> = s[..n - t].iter().cloned().collect();
    let mut b: BTreeSet<RatVec> = s.iter().cloned().collect();
    for i in (n - t)..n {
        for j in i..n {
            b.insert(&(&s[i] + &s[j]) - &s[0]);
        }
    }
    if a.len() != n - t || b.len() != theorem_bound(n, t) {
        return Err(Error::AssertionFailed(format!(
            "construction sizes |A| = {}, |B| = {} (expected {}, {})",
            a.len(),
            b.len(),
            n - t,
            theorem_bound(n, t)
        )));
    }
    Instance::new(n, t, s, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, rat};

    fn v(c: &[i64]) -> RatVec {
        RatVec::from_ints(c)
    }

    fn set(vs: &[&[i64]]) -> BTreeSet<RatVec> {
        vs.iter().map(|c| v(c)).collect()
    }

    fn n2_construction() -> Instance {
        Instance::new(2, 1, Instance::standard_basis(2), set(&[&[1, 0]]), set(&[&[1, 0], &[0, 1], &[-1, 2]])).unwrap()
    }

    #[test]
    fn pairs_in_lexicographic_order() {
        let pairs: Vec<_> = all_pairs(3).map(|p| (p.i, p.j)).collect();
        assert_eq!(pairs, vec![(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]);
        assert_eq!(off_diagonal_pairs(3).count(), 3);
        assert_eq!(Pair::new(1, 2).target(3), v(&[1, 1, 0]));
    }

    #[test]
    fn normalize_standard_is_identity() {
        let inst = n2_construction();
        assert_eq!(normalize_to_standard(&inst).unwrap(), inst);
    }

    #[test]
    fn normalize_sheared_construction() {
        let inst = Instance::new(
            2,
            1,
            vec![v(&[1, 1]), v(&[0, 1])],
            set(&[&[1, 1]]),
            set(&[&[1, 1], &[0, 1], &[-1, 1]]),
        )
        .unwrap();
        let norm = normalize_to_standard(&inst).unwrap();
        assert!(norm.is_standard());
        assert_eq!(norm.a, set(&[&[1, 0]]));
        assert_eq!(norm.b, set(&[&[1, 0], &[0, 1], &[-1, 2]]));
        assert_eq!(norm.a.len(), inst.a.len());
        assert_eq!(norm.b.len(), inst.b.len());
    }

    #[test]
    fn normalize_rejects_dependent_basis() {
        let inst = Instance::new(2, 0, vec![v(&[1, 0]), v(&[2, 0])], set(&[]), set(&[])).unwrap();
        assert_eq!(normalize_to_standard(&inst), Err(Error::SingularBasis));
    }

    #[test]
    fn cover_examples() {
        assert!(verify_cover(&n2_construction()).unwrap().covered);

        let partial = Instance::new(2, 1, Instance::standard_basis(2), set(&[&[1, 0]]), set(&[&[1, 0], &[0, 1]])).unwrap();
        let report = verify_cover(&partial).unwrap();
        assert!(!report.covered);
        assert_eq!(report.missing, vec![Pair::new(2, 2)]);

        let trivial = Instance::new(1, 0, Instance::standard_basis(1), set(&[&[1]]), set(&[&[1]])).unwrap();
        assert!(verify_cover(&trivial).unwrap().covered);
    }

    #[test]
    fn lexicographic_representation_of_construction() {
        let rep = choose_representations(&n2_construction(), Strategy::Lexicographic).unwrap();
        assert_eq!(rep.entries[&Pair::new(1, 1)], (v(&[1, 0]), v(&[1, 0])));
        assert_eq!(rep.entries[&Pair::new(1, 2)], (v(&[1, 0]), v(&[0, 1])));
        assert_eq!(rep.entries[&Pair::new(2, 2)], (v(&[1, 0]), v(&[-1, 2])));
        for seed in [0, 1, 99] {
            assert_eq!(choose_representations(&n2_construction(), Strategy::SeededRandom(seed)).unwrap(), rep);
        }
    }

    #[test]
    fn lexicographic_prefers_smallest_a() {
        // e1+e2 = (0,1)+(1,0) = (1,0)+(0,1); smallest a = (0,1)
        let inst = Instance::new(
            2,
            0,
            Instance::standard_basis(2),
            set(&[&[1, 0], &[0, 1]]),
            set(&[&[1, 0], &[0, 1]]),
        )
        .unwrap();
        let rep = choose_representations(&inst, Strategy::Lexicographic).unwrap();
        assert_eq!(rep.entries[&Pair::new(1, 2)], (v(&[0, 1]), v(&[1, 0])));
    }

    #[test]
    fn representation_requires_cover() {
        let partial = Instance::new(2, 1, Instance::standard_basis(2), set(&[&[1, 0]]), set(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(
            choose_representations(&partial, Strategy::Lexicographic),
            Err(Error::NotCovered(vec![Pair::new(2, 2)]))
        );
    }

    #[test]
    fn construction_examples() {
        assert_eq!(extremal_construction(2, 1, None).unwrap(), n2_construction());
        let c = extremal_construction(3, 2, None).unwrap();
        assert_eq!((c.a.len(), c.b.len()), (1, 6));
        let c = extremal_construction(4, 0, None).unwrap();
        assert_eq!(c.a, c.b);
        assert_eq!(c.b.len(), 4);
        assert!(matches!(extremal_construction(3, 3, None), Err(Error::InvalidParams(_))));
        assert_eq!(
            extremal_construction(2, 1, Some(vec![v(&[1, 0]), v(&[2, 0])])),
            Err(Error::SingularBasis)
        );
    }

    #[test]
    fn construction_over_rational_basis_is_covered() {
        let basis = vec![
            RatVec(vec![rat(1, 2), int(0), int(1)]),
            RatVec(vec![int(0), rat(-1, 3), int(0)]),
            RatVec(vec![int(1), int(1), int(1)]),
        ];
        for t in 0..3 {
            let inst = extremal_construction(3, t, Some(basis.clone())).unwrap();
            assert!(verify_cover(&inst).unwrap().covered);
        }
    }

    #[test]
    fn instance_json_is_canonical() {
        let inst = n2_construction();
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(text, r#"{"n":2,"t":1,"S":[[1,0],[0,1]],"A":[[1,0]],"B":[[-1,2],[0,1],[1,0]]}"#);
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn representation_json_round_trip() {
        let rep = choose_representations(&n2_construction(), Strategy::Lexicographic).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.starts_with(r#"{"n":2,"entries":[{"pair":[1,1],"a":[1,0],"b":[1,0]}"#), "{text}");
        let back: Representation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        back.validate().unwrap();
    }
}
