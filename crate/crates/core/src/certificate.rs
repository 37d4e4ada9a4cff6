//! The certification pipeline.
//!
//! A fixed representation becomes a bipartite multigraph `G` with left side
//! `A_0`, right side `B_0` and one edge per target. The diagonal edges form a
//! forest; contracting them leaves `p + q - n` blocks. Each block gets the
//! colour `pi(phi(x))` of any of its vertices, where `phi(a) = a` on the left
//! and `phi(b) = -b` on the right. The colour sets `X ⊆ C` then feed the
//! coset lemma, and the resulting inequalities are chained into
//! `|B| >= n + C(t+1, 2)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2lemma::{colors_cover_dn, fold_to_f2, lemma_bound, FoldedInstance, LemmaReport};
use crate::linalg::{reduce_mod2, Color, RatVec};
use crate::model::{
    binom2, choose_representations, theorem_bound, verify_cover, Instance, Pair, Representation, Strategy,
};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub pair: Pair,
    pub left: usize,
    pub right: usize,
}

/// Vertex ids: left vertex `k` is `k`, right vertex `k` is `p + k`, so a
/// vector present on both sides still yields two vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepGraph {
    pub n: usize,
    pub left: Vec<RatVec>,
    pub right: Vec<RatVec>,
    pub edges: Vec<Edge>,
    pub phi: Vec<RatVec>,
}

impl RepGraph {
    pub fn p(&self) -> usize {
        self.left.len()
    }

    pub fn q(&self) -> usize {
        self.right.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.p() + self.q()
    }

    pub fn right_id(&self, k: usize) -> usize {
        self.p() + k
    }

    pub fn is_left(&self, vertex: usize) -> bool {
        vertex < self.p()
    }

    pub fn diagonal_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.pair.is_diagonal())
    }
}

pub fn build_graph(rep: &Representation) -> Result<RepGraph> {
    rep.validate()?;
    let n = rep.n;
    let left_set: BTreeSet<&RatVec> = rep.entries.values().map(|(a, _)| a).collect();
    let right_set: BTreeSet<&RatVec> = rep.entries.values().map(|(_, b)| b).collect();
    let left_idx: BTreeMap<&RatVec, usize> = left_set.iter().enumerate().map(|(k, v)| (*v, k)).collect();
    let right_idx: BTreeMap<&RatVec, usize> = right_set.iter().enumerate().map(|(k, v)| (*v, k)).collect();

    let edges = rep
        .entries
        .iter()
        .map(|(pair, (a, b))| Edge { pair: *pair, left: left_idx[a], right: right_idx[b] })
        .collect();
    let left: Vec<RatVec> = left_set.into_iter().cloned().collect();
    let right: Vec<RatVec> = right_set.into_iter().cloned().collect();
    let phi = left.iter().cloned().chain(right.iter().map(|b| -b)).collect();
    let g = RepGraph { n, left, right, edges, phi };

    for e in &g.edges {
        if &g.phi[e.left] - &g.phi[g.right_id(e.right)] != e.pair.target(n) {
            return Err(Error::InvalidRepresentation { pair: e.pair });
        }
    }
    Ok(g)
}

/// True iff the diagonal edges `eps_11, ..., eps_nn` span a forest. Two
/// distinct diagonal edges joining the same pair of vertices form a cycle.
pub fn check_diagonal_forest(g: &RepGraph) -> bool {
    let mut uf = UnionFind::new(g.vertex_count());
    g.diagonal_edges().all(|e| uf.union(e.left, g.right_id(e.right)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEdge {
    pub pair: Pair,
    pub from: usize,
    pub to: usize,
}

/// `H`: blocks of the diagonal-edge components, with the off-diagonal edges
/// re-attached between blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractedGraph {
    pub blocks: Vec<Vec<usize>>,
    pub block_of: Vec<usize>,
    pub edges: Vec<BlockEdge>,
}

pub fn contract_diagonals(g: &RepGraph) -> Result<ContractedGraph> {
    if !check_diagonal_forest(g) {
        return Err(Error::ForestViolation);
    }
    let mut uf = UnionFind::new(g.vertex_count());
    for e in g.diagonal_edges() {
        uf.union(e.left, g.right_id(e.right));
    }

    let mut root_block: BTreeMap<usize, usize> = BTreeMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_of = vec![0; g.vertex_count()];
    for (v, slot) in block_of.iter_mut().enumerate() {
        let root = uf.find(v);
        let b = *root_block.entry(root).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[b].push(v);
        *slot = b;
    }

    let expected = g.vertex_count() - g.n;
    if blocks.len() != expected {
        return Err(Error::ContractionCount { expected, found: blocks.len() });
    }
    let edges = g
        .edges
        .iter()
        .filter(|e| !e.pair.is_diagonal())
        .map(|e| BlockEdge { pair: e.pair, from: block_of[e.left], to: block_of[g.right_id(e.right)] })
        .collect();
    Ok(ContractedGraph { blocks, block_of, edges })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors_c: BTreeSet<Color>,
    pub colors_x: BTreeSet<Color>,
    pub block_color: Vec<Color>,
}

/// Colours every block, checking that all of its vertices agree.
pub fn color_components(h: &ContractedGraph, g: &RepGraph) -> Result<Coloring> {
    let mut block_color = Vec::with_capacity(h.blocks.len());
    let mut colors_x = BTreeSet::new();
    for (k, block) in h.blocks.iter().enumerate() {
        let color = reduce_mod2(&g.phi[block[0]]);
        if block.iter().any(|&v| reduce_mod2(&g.phi[v]) != color) {
            return Err(Error::ColorMismatch { block: k });
        }
        if block.iter().any(|&v| g.is_left(v)) {
            colors_x.insert(color.clone());
        }
        block_color.push(color);
    }
    if colors_x.len() > g.p() {
        return Err(Error::AssertionFailed(format!("|X| = {} > p = {}", colors_x.len(), g.p())));
    }
    let colors_c = block_color.iter().cloned().collect();
    Ok(Coloring { colors_c, colors_x, block_color })
}

/// `{pi(e_i + e_j) : i < j} ⊆ X - C`.
pub fn check_cover_in_colors(colors_x: &BTreeSet<Color>, colors_c: &BTreeSet<Color>, n: usize) -> bool {
    colors_cover_dn(colors_x, colors_c, n).unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFlags {
    pub cover: bool,
    pub forest: bool,
    pub contraction_count: bool,
    pub color_well_defined: bool,
    pub x_size: bool,
    pub cover_in_colors: bool,
    pub lemma: bool,
    pub final_chain: bool,
}

impl StepFlags {
    pub fn all(&self) -> bool {
        self.cover
            && self.forest
            && self.contraction_count
            && self.color_well_defined
            && self.x_size
            && self.cover_in_colors
            && self.lemma
            && self.final_chain
    }
}

/// The individual inequalities of the closing argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLinks {
    pub x_le_p: bool,
    pub p_le_n_minus_t: bool,
    pub q_le_b: bool,
    pub c_le_v_h: bool,
    pub v_h_eq_p_plus_q_minus_n: bool,
    pub c_ge_lemma_bound: bool,
    pub q_ge_2n_plus_binom_t_minus_p: bool,
    pub q_ge_final_bound: bool,
    pub b_ge_final_bound: bool,
}

impl ChainLinks {
    pub fn all(&self) -> bool {
        self.x_le_p
            && self.p_le_n_minus_t
            && self.q_le_b
            && self.c_le_v_h
            && self.v_h_eq_p_plus_q_minus_n
            && self.c_ge_lemma_bound
            && self.q_ge_2n_plus_binom_t_minus_p
            && self.q_ge_final_bound
            && self.b_ge_final_bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: usize,
    pub t: usize,
    pub strategy: String,
    pub seed: Option<u64>,
    pub a_size: usize,
    pub b_size: usize,
    pub p: usize,
    pub q: usize,
    #[serde(rename = "vH")]
    pub v_h: usize,
    #[serde(rename = "colorsX")]
    pub colors_x: BTreeSet<Color>,
    #[serde(rename = "colorsC")]
    pub colors_c: BTreeSet<Color>,
    pub folded: Option<FoldedInstance>,
    pub lemma: Option<LemmaReport>,
    /// `n + C(t, 2)`, the lower bound the lemma gives for `|C|`.
    pub lemma_bound_value: usize,
    pub final_bound: usize,
    pub step_flags: StepFlags,
    pub chain: ChainLinks,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.step_flags.all() && self.chain.all()
    }
}

/// Runs the whole pipeline on one instance and records every intermediate
/// quantity together with a verdict per step.
pub fn certify(inst: &Instance, strategy: Strategy) -> Result<Certificate> {
    inst.validate()?;
    let (n, t) = (inst.n, inst.t);
    if t >= n {
        return Err(Error::HypothesisViolated(format!("t = {t} not in [0, n-1 = {}]", n - 1)));
    }
    if inst.a.len() > n - t {
        return Err(Error::HypothesisViolated(format!("|A| = {} > n - t = {}", inst.a.len(), n - t)));
    }
    let report = verify_cover(inst)?;
    if !report.covered {
        return Err(Error::NotCovered(report.missing));
    }

    let rep = choose_representations(inst, strategy)?;
    let g = build_graph(&rep)?;
    let forest = check_diagonal_forest(&g);
    let h = contract_diagonals(&g)?;
    let coloring = color_components(&h, &g)?;
    let (p, q, v_h) = (g.p(), g.q(), h.blocks.len());
    let x_count = coloring.colors_x.len();
    let c_count = coloring.colors_c.len();
    let cover_in_colors = check_cover_in_colors(&coloring.colors_x, &coloring.colors_c, n);

    let (folded, lemma, lemma_ok) = if n == 1 {
        // t = 0 and B is nonempty, which is the whole bound
        (None, None, !inst.b.is_empty())
    } else {
        let folded = fold_to_f2(&coloring.colors_x, &coloring.colors_c, n)?;
        let lemma = lemma_bound(&folded, t)?;
        let ok = lemma.pass && c_count >= folded.cp.len();
        (Some(folded), Some(lemma), ok)
    };

    let lemma_bound_value = n + binom2(t);
    let final_bound = theorem_bound(n, t);
    let b_size = inst.b.len();
    let chain = ChainLinks {
        x_le_p: x_count <= p,
        p_le_n_minus_t: p <= n - t,
        q_le_b: q <= b_size,
        c_le_v_h: c_count <= v_h,
        v_h_eq_p_plus_q_minus_n: v_h + n == p + q,
        c_ge_lemma_bound: c_count >= lemma_bound_value,
        q_ge_2n_plus_binom_t_minus_p: q + p >= 2 * n + binom2(t),
        q_ge_final_bound: q >= final_bound,
        b_ge_final_bound: b_size >= final_bound,
    };
    let step_flags = StepFlags {
        cover: report.covered,
        forest,
        contraction_count: v_h + n == p + q,
        color_well_defined: coloring.block_color.len() == v_h,
        x_size: chain.x_le_p && chain.p_le_n_minus_t,
        cover_in_colors,
        lemma: lemma_ok,
        final_chain: chain.all(),
    };
    let (strategy_name, seed) = match strategy {
        Strategy::Lexicographic => ("lexicographic".to_string(), None),
        Strategy::SeededRandom(seed) => ("seeded-random".to_string(), Some(seed)),
    };

    Ok(Certificate {
        n,
        t,
        strategy: strategy_name,
        seed,
        a_size: inst.a.len(),
        b_size,
        p,
        q,
        v_h,
        colors_x: coloring.colors_x,
        colors_c: coloring.colors_c,
        folded,
        lemma,
        lemma_bound_value,
        final_bound,
        step_flags,
        chain,
    })
}
