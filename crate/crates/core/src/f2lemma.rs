//! The coset lemma over `F_2^n`: if `X ⊆ C`, `|X| <= n - u` and
//! `D_n ⊆ X - C`, then `|C| >= n + C(u, 2)`.
//!
//! Three routes are provided. [`fold_to_f2`] moves colour sets from
//! `Q^n / 2Z^n` into `K = Z^n / 2Z^n`; [`lemma_bound`] evaluates the
//! span/quotient counting argument link by link; [`exhaustive_lemma_check`]
//! and [`random_lemma_check`] test the statement itself without going
//! through the counting argument.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{color_sub, Color};
use crate::model::{binom2, off_diagonal_pairs};

pub const MAX_WIDTH: usize = 64;

/// Element of `F_2^n`; coordinate `k` (zero-based) is bit `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct F2Vec {
    bits: u64,
    width: u8,
}

impl F2Vec {
    pub fn new(bits: u64, width: usize) -> Self {
        assert!(width <= MAX_WIDTH, "F2Vec width {width} exceeds {MAX_WIDTH}");
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        assert_eq!(bits & !mask, 0, "bits outside width");
        F2Vec { bits, width: width as u8 }
    }

    pub fn zero(width: usize) -> Self {
        Self::new(0, width)
    }

    /// `e_k` for zero-based `k`.
    pub fn unit(width: usize, k: usize) -> Self {
        Self::new(1 << k, width)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    /// Sum in `F_2^n`, which is also the difference.
    pub fn add(&self, other: &F2Vec) -> F2Vec {
        debug_assert_eq!(self.width, other.width);
        F2Vec { bits: self.bits ^ other.bits, width: self.width }
    }
}

impl fmt::Display for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for k in 0..self.width() {
            f.write_str(if self.bit(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for F2Vec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.len() > MAX_WIDTH {
            return Err(format!("bit string longer than {MAX_WIDTH}"));
        }
        let mut bits = 0;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << k,
                _ => return Err(format!("invalid bit {ch:?} in {s:?}")),
            }
        }
        Ok(F2Vec::new(bits, s.len()))
    }
}

impl Serialize for F2Vec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for F2Vec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `D_n = {e_i + e_j : i < j}` in `F_2^n`.
pub fn dn(n: usize) -> Vec<F2Vec> {
    off_diagonal_pairs(n)
        .map(|p| F2Vec::new((1 << (p.i - 1)) | (1 << (p.j - 1)), n))
        .collect()
}

/// `{pi(e_i + e_j) : i < j}` as colours.
pub fn dn_colors(n: usize) -> Vec<Color> {
    off_diagonal_pairs(n).map(|p| crate::linalg::reduce_mod2(&p.target(n))).collect()
}

/// `D_n ⊆ X + C` over `F_2^n`.
pub fn covers_dn(x: &BTreeSet<F2Vec>, c: &BTreeSet<F2Vec>, n: usize) -> bool {
    dn(n).iter().all(|d| x.iter().any(|xv| c.contains(&xv.add(d))))
}

/// `D_n ⊆ X - C` in `Q^n / 2Z^n`.
pub fn colors_cover_dn(x: &BTreeSet<Color>, c: &BTreeSet<Color>, n: usize) -> Result<bool> {
    for d in dn_colors(n) {
        let mut hit = false;
        for xv in x {
            // x - c = d  <=>  c = x - d
            if c.contains(&color_sub(xv, &d)?) {
                hit = true;
                break;
            }
        }
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub coset: Color,
    pub anchor: Color,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldedInstance {
    pub n: usize,
    #[serde(rename = "Xp")]
    pub xp: BTreeSet<F2Vec>,
    #[serde(rename = "Cp")]
    pub cp: BTreeSet<F2Vec>,
    pub anchors: Vec<Anchor>,
}

/// Folds every coset of `K` that meets `X` back onto `K` by subtracting the
/// lexicographically smallest element of `X` in that coset. Cosets of `C`
/// that miss `X` are dropped.
pub fn fold_to_f2(x: &BTreeSet<Color>, c: &BTreeSet<Color>, n: usize) -> Result<FoldedInstance> {
    fold_with_anchors(x, c, n, |members| members[0].clone())
}

/// As [`fold_to_f2`], with the anchor of each coset chosen by `pick` from the
/// (sorted, nonempty) members of `X` in it.
pub fn fold_with_anchors(
    x: &BTreeSet<Color>,
    c: &BTreeSet<Color>,
    n: usize,
    mut pick: impl FnMut(&[Color]) -> Color,
) -> Result<FoldedInstance> {
    if n > MAX_WIDTH {
        return Err(Error::InvalidParams(format!("n = {n} exceeds {MAX_WIDTH}")));
    }
    for v in x.iter().chain(c) {
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.dim() });
        }
    }
    if !x.is_subset(c) {
        return Err(Error::NotNested);
    }
    if x.is_empty() && n >= 2 {
        return Err(Error::EmptyX);
    }

    let mut cosets: BTreeMap<Color, Vec<Color>> = BTreeMap::new();
    for xv in x {
        cosets.entry(xv.fractional_part()).or_default().push(xv.clone());
    }
    let anchors: BTreeMap<Color, Color> = cosets.into_iter().map(|(key, members)| (key, pick(&members))).collect();

    let fold = |v: &Color| -> Result<Option<F2Vec>> {
        let Some(anchor) = anchors.get(&v.fractional_part()) else {
            return Ok(None);
        };
        let bits = color_sub(v, anchor)?
            .to_bits()
            .ok_or_else(|| Error::AssertionFailed("folded element is not in K".into()))?;
        Ok(Some(F2Vec::new(bits, n)))
    };
    let mut xp = BTreeSet::new();
    for xv in x {
        xp.extend(fold(xv)?);
    }
    let mut cp = BTreeSet::new();
    for cv in c {
        cp.extend(fold(cv)?);
    }

    if !xp.is_subset(&cp) {
        return Err(Error::AssertionFailed("X' ⊄ C'".into()));
    }
    if xp.len() > x.len() || cp.len() > c.len() {
        return Err(Error::AssertionFailed("folding increased a set size".into()));
    }
    if colors_cover_dn(x, c, n)? && !covers_dn(&xp, &cp, n) {
        return Err(Error::AssertionFailed("D_n ⊆ X - C but D_n ⊄ X' - C'".into()));
    }

    Ok(FoldedInstance {
        n,
        xp,
        cp,
        anchors: anchors.into_iter().map(|(coset, anchor)| Anchor { coset, anchor }).collect(),
    })
}

/// Reduced row echelon basis of a subspace of `F_2^n`. Each basis vector's
/// pivot is its lowest set bit, and no other basis vector has that bit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    width: usize,
    rows: Vec<F2Vec>,
}

impl Span {
    pub fn empty(width: usize) -> Self {
        Span { width, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Basis vectors sorted by pivot.
    pub fn basis(&self) -> &[F2Vec] {
        &self.rows
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.bits().trailing_zeros() as usize).collect()
    }

    /// Canonical representative of `v + W`: zero in every pivot column.
    pub fn reduce(&self, v: &F2Vec) -> F2Vec {
        let mut out = *v;
        for row in &self.rows {
            if out.bit(row.bits().trailing_zeros() as usize) {
                out = out.add(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &F2Vec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the spanning set; returns whether the dimension grew.
    pub fn insert(&mut self, v: &F2Vec) -> bool {
        let r = self.reduce(v);
        if r.is_zero() {
            return false;
        }
        let pivot = r.bits().trailing_zeros() as usize;
        for row in self.rows.iter_mut() {
            if row.bit(pivot) {
                *row = row.add(&r);
            }
        }
        let at = self.rows.partition_point(|row| row.bits().trailing_zeros() < pivot as u32);
        self.rows.insert(at, r);
        true
    }
}

pub fn f2_span<'a>(vectors: impl IntoIterator<Item = &'a F2Vec>, width: usize) -> Span {
    let mut span = Span::empty(width);
    for v in vectors {
        span.insert(v);
    }
    span
}

/// `F_2^n / W` realised in coordinates: project onto the non-pivot columns of
/// the reduced basis of `W`.
#[derive(Debug, Clone)]
pub struct Quotient {
    span: Span,
    free: Vec<usize>,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// `rho(v)`, a vector of width `s = n - dim W`.
    pub fn project(&self, v: &F2Vec) -> F2Vec {
        let r = self.span.reduce(v);
        let bits = self
            .free
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &col)| if r.bit(col) { acc | 1 << k } else { acc });
        F2Vec::new(bits, self.free.len())
    }
}

#[derive(Debug, Clone)]
pub struct QuotientData {
    pub rho: Quotient,
    /// Zero-based indices `i_1 < ... < i_s` with `rho(e_{i_k})` a basis of
    /// the quotient, chosen greedily in increasing order.
    pub indices: Vec<usize>,
}

pub fn quotient_data(w: &Span, n: usize) -> QuotientData {
    let pivots = w.pivots();
    let free: Vec<usize> = (0..n).filter(|k| !pivots.contains(k)).collect();
    let rho = Quotient { span: w.clone(), free };
    let mut images = Span::empty(rho.dim());
    let mut indices = Vec::new();
    for k in 0..n {
        if images.dim() == rho.dim() {
            break;
        }
        if images.insert(&rho.project(&F2Vec::unit(n, k))) {
            indices.push(k);
        }
    }
    QuotientData { rho, indices }
}

/// Each inequality of the counting argument with its own verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaLinks {
    pub zero_in_x: bool,
    pub dim_w_le_m_minus_1: bool,
    pub s_ge_n_minus_m_plus_1: bool,
    pub rho_d_in_rho_c: bool,
    pub c_ge_m_plus_rho_d: bool,
    pub pair_sums_distinct_nonzero: bool,
    pub rho_d_ge_binom_s: bool,
    pub binom_s_ge_binom_n_minus_m_plus_1: bool,
    pub n_minus_m_ge_u: bool,
    pub c_ge_bound: bool,
}

impl LemmaLinks {
    fn named(&self) -> [(&'static str, bool); 10] {
        [
            ("0 ∈ X'", self.zero_in_x),
            ("dim W <= m - 1", self.dim_w_le_m_minus_1),
            ("s >= n - m + 1", self.s_ge_n_minus_m_plus_1),
            ("rho(D_n) ⊆ rho(C')", self.rho_d_in_rho_c),
            ("|C'| >= m + |rho(D_n) \\ {0}|", self.c_ge_m_plus_rho_d),
            ("pairwise sums of quotient basis are distinct and nonzero", self.pair_sums_distinct_nonzero),
            ("|rho(D_n) \\ {0}| >= C(s,2)", self.rho_d_ge_binom_s),
            ("m + C(s,2) >= m + C(n-m+1,2) = n + C(n-m,2)", self.binom_s_ge_binom_n_minus_m_plus_1),
            ("n + C(n-m,2) >= n + C(u,2)", self.n_minus_m_ge_u),
            ("|C'| >= n + C(u,2)", self.c_ge_bound),
        ]
    }

    pub fn all(&self) -> bool {
        self.named().iter().all(|(_, ok)| *ok)
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.named().iter().find(|(_, ok)| !ok).map(|(name, _)| *name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    pub u: usize,
    pub m: usize,
    #[serde(rename = "dimW")]
    pub dim_w: usize,
    pub s: usize,
    #[serde(rename = "rhoD_nonzero")]
    pub rho_d_nonzero: usize,
    pub bound: usize,
    #[serde(rename = "cSize")]
    pub c_size: usize,
    /// One-based, matching `e_{i_1}, ..., e_{i_s}`.
    pub indices: Vec<usize>,
    pub links: LemmaLinks,
    pub pass: bool,
}

impl LemmaReport {
    pub fn check(&self) -> Result<()> {
        match self.links.first_failure() {
            None => Ok(()),
            Some(link) => Err(Error::AssertionFailed(link.to_string())),
        }
    }
}

/// Runs the counting argument on `(X', C')` with parameter `u`. Every link of
/// the chain is evaluated separately; `pass` is their conjunction and
/// [`LemmaReport::check`] names the first one that broke.
pub fn lemma_bound(f: &FoldedInstance, u: usize) -> Result<LemmaReport> {
    lemma_bound_sets(&f.xp, &f.cp, f.n, u)
}

pub fn lemma_bound_sets(x: &BTreeSet<F2Vec>, c: &BTreeSet<F2Vec>, n: usize, u: usize) -> Result<LemmaReport> {
    if n < 2 {
        return Err(Error::HypothesisViolated(format!("lemma needs n >= 2, got {n}")));
    }
    if u > n {
        return Err(Error::HypothesisViolated(format!("u = {u} exceeds n = {n}")));
    }
    if x.len() + u > n {
        return Err(Error::HypothesisViolated(format!("|X'| = {} > n - u = {}", x.len(), n - u)));
    }
    if !x.is_subset(c) {
        return Err(Error::NotNested);
    }
    let Some(&x0) = x.iter().next() else {
        return Err(Error::EmptyX);
    };

    // translate so that 0 ∈ X'; folding already arranges this
    let (x, c): (BTreeSet<F2Vec>, BTreeSet<F2Vec>) = if x.contains(&F2Vec::zero(n)) {
        (x.clone(), c.clone())
    } else {
        (x.iter().map(|v| v.add(&x0)).collect(), c.iter().map(|v| v.add(&x0)).collect())
    };

    let m = x.len();
    let w = f2_span(&x, n);
    let dim_w = w.dim();
    let q = quotient_data(&w, n);
    let s = q.rho.dim();

    let d = dn(n);
    let rho_d: BTreeSet<F2Vec> = d.iter().map(|v| q.rho.project(v)).collect();
    let rho_c: BTreeSet<F2Vec> = c.iter().map(|v| q.rho.project(v)).collect();
    let rho_d_nonzero = rho_d.iter().filter(|v| !v.is_zero()).count();

    let images: Vec<F2Vec> = q.indices.iter().map(|&k| q.rho.project(&F2Vec::unit(n, k))).collect();
    let mut sums = BTreeSet::new();
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            sums.insert(images[a].add(&images[b]));
        }
    }
    let pair_sums_ok = q.indices.len() == s
        && sums.len() == binom2(s)
        && sums.iter().all(|v| !v.is_zero() && rho_d.contains(v));

    let c_size = c.len();
    let bound = n + binom2(u);
    let links = LemmaLinks {
        zero_in_x: x.contains(&F2Vec::zero(n)),
        dim_w_le_m_minus_1: dim_w < m,
        s_ge_n_minus_m_plus_1: s + m > n && s == n - dim_w,
        rho_d_in_rho_c: rho_d.is_subset(&rho_c),
        c_ge_m_plus_rho_d: c_size >= m + rho_d_nonzero,
        pair_sums_distinct_nonzero: pair_sums_ok,
        rho_d_ge_binom_s: rho_d_nonzero >= binom2(s),
        binom_s_ge_binom_n_minus_m_plus_1: binom2(s) >= binom2(n + 1 - m)
            && m + binom2(n + 1 - m) == n + binom2(n - m),
        n_minus_m_ge_u: binom2(n - m) >= binom2(u),
        c_ge_bound: c_size >= bound,
    };

    Ok(LemmaReport {
        n,
        u,
        m,
        dim_w,
        s,
        rho_d_nonzero,
        bound,
        c_size,
        indices: q.indices.iter().map(|k| k + 1).collect(),
        pass: links.all(),
        links,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    #[serde(rename = "X")]
    pub x: Vec<F2Vec>,
    #[serde(rename = "C")]
    pub c: Vec<F2Vec>,
    pub u: usize,
}

/// Smallest `|C|` over all covering pairs admissible for a given `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UMinimum {
    pub u: usize,
    pub bound: usize,
    pub min_c: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub n: usize,
    pub pairs_enumerated: u64,
    pub covering_pairs: u64,
    pub counterexample: Option<Counterexample>,
    pub minima: Vec<UMinimum>,
}

pub const EXHAUSTIVE_MAX_N: usize = 4;

#[derive(Default)]
struct ChunkResult {
    pairs: u64,
    covering: u64,
    first: Option<(u32, u32, usize)>,
    min_c: Vec<Option<usize>>,
}

fn scan_chunk(n: usize, lo: u32, hi: u32) -> ChunkResult {
    let elems = 1usize << n;
    let d_mask: u32 = dn(n).iter().fold(0, |acc, d| acc | 1 << d.bits());
    let mut out = ChunkResult { min_c: vec![None; n + 1], ..Default::default() };
    let mut shifted = [0u32; 16];
    for c_mask in lo..hi {
        let c_size = c_mask.count_ones() as usize;
        // shifted[x] = {c ^ x : c ∈ C}
        for (x, slot) in shifted.iter_mut().enumerate().take(elems) {
            let mut m = 0u32;
            let mut rest = c_mask;
            while rest != 0 {
                let cbit = rest.trailing_zeros() as usize;
                m |= 1 << (cbit ^ x);
                rest &= rest - 1;
            }
            *slot = m;
        }
        let mut x_mask = c_mask;
        loop {
            out.pairs += 1;
            let k = x_mask.count_ones() as usize;
            if k <= n && k > 0 {
                let mut sums = 0u32;
                let mut rest = x_mask;
                while rest != 0 {
                    sums |= shifted[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                if sums & d_mask == d_mask {
                    out.covering += 1;
                    for u in 0..=n - k {
                        let slot = &mut out.min_c[u];
                        *slot = Some(slot.map_or(c_size, |v: usize| v.min(c_size)));
                        if c_size < n + binom2(u) && out.first.is_none() {
                            out.first = Some((c_mask, x_mask, u));
                        }
                    }
                }
            }
            if x_mask == 0 {
                break;
            }
            x_mask = (x_mask - 1) & c_mask;
        }
    }
    out
}

fn mask_to_vecs(mask: u32, n: usize) -> Vec<F2Vec> {
    (0..1u64 << n).filter(|v| mask >> v & 1 == 1).map(|v| F2Vec::new(v, n)).collect()
}

/// Enumerates every pair `X ⊆ C ⊆ F_2^n` (`C` by bitmask, `X` by submask
/// of `C`) and checks `|C| >= n + C(u,2)` for every admissible `u`. The
/// reported counterexample, if any, is the first in enumeration order
/// regardless of `workers`.
pub fn exhaustive_lemma_check(n: usize, workers: usize) -> Result<ExhaustiveReport> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge { n, max: EXHAUSTIVE_MAX_N });
    }
    if n < 2 {
        return Err(Error::InvalidParams(format!("exhaustive check needs n >= 2, got {n}")));
    }
    let total: u64 = 1u64 << (1usize << n);
    let workers = workers.max(1) as u64;
    let bounds: Vec<(u32, u32)> = (0..workers)
        .map(|w| ((total * w / workers) as u32, (total * (w + 1) / workers) as u32))
        .filter(|(lo, hi)| lo < hi)
        .collect();
    let chunks: Vec<ChunkResult> = if bounds.len() == 1 {
        vec![scan_chunk(n, bounds[0].0, bounds[0].1)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = bounds.iter().map(|&(lo, hi)| scope.spawn(move || scan_chunk(n, lo, hi))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };

    let mut report = ExhaustiveReport {
        n,
        pairs_enumerated: 0,
        covering_pairs: 0,
        counterexample: None,
        minima: (0..=n).map(|u| UMinimum { u, bound: n + binom2(u), min_c: None }).collect(),
    };
    for chunk in chunks {
        report.pairs_enumerated += chunk.pairs;
        report.covering_pairs += chunk.covering;
        if report.counterexample.is_none() {
            if let Some((c_mask, x_mask, u)) = chunk.first {
                report.counterexample = Some(Counterexample { x: mask_to_vecs(x_mask, n), c: mask_to_vecs(c_mask, n), u });
            }
        }
        for (entry, m) in report.minima.iter_mut().zip(chunk.min_c) {
            entry.min_c = match (entry.min_c, m) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    }
    if report.pairs_enumerated != 3u64.pow(1 << n) {
        return Err(Error::AssertionFailed(format!(
            "enumerated {} pairs, expected 3^(2^{n})",
            report.pairs_enumerated
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomReport {
    pub n: usize,
    pub samples: u64,
    pub violations: u64,
    pub lemma_mismatches: u64,
    pub counterexample: Option<Counterexample>,
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> F2Vec {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    F2Vec::new(rng.gen::<u64>() & mask, n)
}

/// Draws one pair satisfying the lemma's hypotheses together with an
/// admissible `u`. `X` is either random or inside a random low-dimensional
/// subspace; `C` is grown greedily so that it stays small.
pub fn sample_lemma_instance(rng: &mut ChaCha8Rng, n: usize) -> (BTreeSet<F2Vec>, BTreeSet<F2Vec>, usize) {
    let k = rng.gen_range(1..=n);
    let mut x = BTreeSet::new();
    if rng.gen_bool(0.5) {
        let gens: Vec<F2Vec> = (0..rng.gen_range(0..=k.min(4))).map(|_| random_vec(rng, n)).collect();
        let offset = random_vec(rng, n);
        let target = k.min(1 << f2_span(&gens, n).dim());
        while x.len() < target {
            let v = gens.iter().filter(|_| rng.gen_bool(0.5)).fold(offset, |acc, g| acc.add(g));
            x.insert(v);
        }
    } else {
        while x.len() < k {
            x.insert(random_vec(rng, n));
        }
    }
    let mut c = x.clone();
    let xs: Vec<F2Vec> = x.iter().copied().collect();
    for d in dn(n) {
        if rng.gen_bool(0.7) && xs.iter().any(|xv| c.contains(&xv.add(&d))) {
            continue;
        }
        let xv = xs[rng.gen_range(0..xs.len())];
        c.insert(xv.add(&d));
    }
    for _ in 0..rng.gen_range(0..3) {
        c.insert(random_vec(rng, n));
    }
    let u = rng.gen_range(0..=n - x.len());
    (x, c, u)
}

/// Direct check of the statement on random hypothesis-satisfying pairs, with
/// the counting argument run alongside as a second opinion.
pub fn random_lemma_check(n: usize, samples: u64, seed: u64) -> Result<RandomReport> {
    if !(2..=MAX_WIDTH).contains(&n) {
        return Err(Error::InvalidParams(format!("random check needs 2 <= n <= {MAX_WIDTH}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RandomReport { n, samples, violations: 0, lemma_mismatches: 0, counterexample: None };
    for _ in 0..samples {
        let (x, c, u) = sample_lemma_instance(&mut rng, n);
        debug_assert!(covers_dn(&x, &c, n));
        let direct = c.len() >= n + binom2(u);
        if !direct {
            report.violations += 1;
            if report.counterexample.is_none() {
                report.counterexample =
                    Some(Counterexample { x: x.iter().copied().collect(), c: c.iter().copied().collect(), u });
            }
        }
        if lemma_bound_sets(&x, &c, n, u)?.pass != direct {
            report.lemma_mismatches += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, rat, Rational};

    fn col(coords: &[Rational]) -> Color {
        Color::from_coords(coords.to_vec())
    }

    fn bits(words: &[&str]) -> BTreeSet<F2Vec> {
        words.iter().map(|w| w.parse().unwrap()).collect()
    }

    #[test]
    fn bit_strings() {
        let v: F2Vec = "0110".parse().unwrap();
        assert_eq!(v.bits(), 0b0110);
        assert_eq!(v.to_string(), "0110");
        let w: F2Vec = "1000".parse().unwrap();
        assert_eq!(w.bits(), 1);
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"1000\"");
        assert!("012".parse::<F2Vec>().is_err());
    }

    #[test]
    fn dn_elements() {
        assert_eq!(dn(3).iter().map(|v| v.to_string()).collect::<Vec<_>>(), ["110", "101", "011"]);
        assert!(dn(1).is_empty());
    }

    #[test]
    fn fold_integer_coset() {
        let x = BTreeSet::from([col(&[int(1), int(0)])]);
        let c = BTreeSet::from([col(&[int(1), int(0)]), col(&[int(0), int(1)])]);
        let f = fold_to_f2(&x, &c, 2).unwrap();
        assert_eq!(f.xp, bits(&["00"]));
        assert_eq!(f.cp, bits(&["00", "11"]));
        assert_eq!(f.anchors.len(), 1);
    }

    #[test]
    fn fold_half_integer_coset() {
        let x = BTreeSet::from([col(&[rat(1, 2), int(0)])]);
        let c = BTreeSet::from([col(&[rat(1, 2), int(0)]), col(&[rat(3, 2), int(1)])]);
        let f = fold_to_f2(&x, &c, 2).unwrap();
        assert_eq!(f.xp, bits(&["00"]));
        assert_eq!(f.cp, bits(&["00", "11"]));
        assert_eq!(f.anchors[0].coset, col(&[rat(1, 2), int(0)]));
    }

    #[test]
    fn fold_zero() {
        let x = BTreeSet::from([Color::zero(2)]);
        let f = fold_to_f2(&x, &x, 2).unwrap();
        assert_eq!(f.xp, bits(&["00"]));
        assert_eq!(f.cp, bits(&["00"]));
    }

    #[test]
    fn fold_drops_cosets_missing_x() {
        let x = BTreeSet::from([Color::zero(2)]);
        let c = BTreeSet::from([Color::zero(2), col(&[rat(1, 3), int(0)])]);
        let f = fold_to_f2(&x, &c, 2).unwrap();
        assert_eq!(f.cp, bits(&["00"]));
    }

    #[test]
    fn fold_errors() {
        let x = BTreeSet::from([col(&[int(1), int(0)])]);
        let c = BTreeSet::from([Color::zero(2)]);
        assert_eq!(fold_to_f2(&x, &c, 2), Err(Error::NotNested));
        assert_eq!(fold_to_f2(&BTreeSet::new(), &c, 2), Err(Error::EmptyX));
        assert!(fold_to_f2(&BTreeSet::new(), &BTreeSet::new(), 1).is_ok());
    }

    #[test]
    fn span_examples() {
        assert_eq!(f2_span(&bits(&["00"]), 2).dim(), 0);
        let w = f2_span(&bits(&["00", "11"]), 2);
        assert_eq!(w.dim(), 1);
        assert_eq!(w.basis(), &["11".parse::<F2Vec>().unwrap()]);
        assert_eq!(f2_span(&bits(&["00", "10", "01"]), 2).dim(), 2);
        let w = f2_span(&bits(&["110", "011", "101"]), 3);
        assert_eq!(w.dim(), 2);
        assert!(w.contains(&"101".parse().unwrap()));
        assert!(!w.contains(&"100".parse().unwrap()));
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_data(&Span::empty(2), 2);
        assert_eq!(q.indices, vec![0, 1]);
        assert_eq!(q.rho.dim(), 2);
        assert_eq!(q.rho.project(&"10".parse().unwrap()), "10".parse().unwrap());

        let q = quotient_data(&f2_span(&bits(&["11"]), 2), 2);
        assert_eq!(q.rho.dim(), 1);
        assert_eq!(q.indices.len(), 1);
        let e1 = q.rho.project(&F2Vec::unit(2, 0));
        assert_eq!(e1, q.rho.project(&F2Vec::unit(2, 1)));
        assert!(!e1.is_zero());

        let q = quotient_data(&f2_span(&bits(&["10", "01"]), 2), 2);
        assert_eq!(q.rho.dim(), 0);
        assert!(q.indices.is_empty());
    }

    #[test]
    fn lemma_examples() {
        let r = lemma_bound_sets(&bits(&["00"]), &bits(&["00", "11"]), 2, 1).unwrap();
        assert_eq!((r.m, r.dim_w, r.s, r.rho_d_nonzero, r.bound, r.c_size), (1, 0, 2, 1, 2, 2));
        assert!(r.pass);

        let r = lemma_bound_sets(&bits(&["000"]), &bits(&["000", "110", "101", "011"]), 3, 2).unwrap();
        assert_eq!((r.bound, r.c_size), (4, 4));
        assert!(r.pass);

        let x = bits(&["000", "110", "101", "011"]);
        assert!(lemma_bound_sets(&x, &x, 3, 0).is_err()); // |X'| = 4 > n - u
        let x3 = bits(&["000", "110", "101"]);
        let c3 = bits(&["000", "110", "101", "011"]);
        let r = lemma_bound_sets(&x3, &c3, 3, 0).unwrap();
        assert_eq!((r.bound, r.c_size), (3, 4));
        assert!(r.pass);
    }

    #[test]
    fn lemma_hypotheses() {
        let x = bits(&["00"]);
        assert!(matches!(lemma_bound_sets(&x, &x, 2, 3), Err(Error::HypothesisViolated(_))));
        let one = bits(&["0"]);
        assert!(matches!(lemma_bound_sets(&one, &one, 1, 0), Err(Error::HypothesisViolated(_))));
        assert_eq!(lemma_bound_sets(&bits(&["01"]), &bits(&["00"]), 2, 0), Err(Error::NotNested));
    }

    #[test]
    fn lemma_translates_when_zero_missing() {
        let r = lemma_bound_sets(&bits(&["10"]), &bits(&["10", "01"]), 2, 1).unwrap();
        assert!(r.links.zero_in_x);
        assert!(r.pass);
    }

    #[test]
    fn failing_link_is_named() {
        // C' too small to cover D_3: the chain must break somewhere
        let r = lemma_bound_sets(&bits(&["000"]), &bits(&["000", "110"]), 3, 2).unwrap();
        assert!(!r.pass);
        assert!(matches!(r.check(), Err(Error::AssertionFailed(_))));
    }

    #[test]
    fn exhaustive_small() {
        assert!(exhaustive_lemma_check(2, 1).unwrap().counterexample.is_none());
        let r = exhaustive_lemma_check(3, 2).unwrap();
        assert_eq!(r.pairs_enumerated, 6561);
        assert!(r.counterexample.is_none());
        assert!(matches!(exhaustive_lemma_check(5, 1), Err(Error::TooLarge { .. })));
        assert!(exhaustive_lemma_check(1, 1).is_err());
    }
}
