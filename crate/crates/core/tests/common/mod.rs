#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sumset_lab::f2lemma::dn_colors;
use sumset_lab::linalg::{basis_inverse, color_sub, rat, Color, RatVec, Rational};
use sumset_lab::model::{all_pairs, extremal_construction, Instance};

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

pub fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> Vec<RatVec> {
    loop {
        let s: Vec<RatVec> = (0..n).map(|_| RatVec((0..n).map(|_| small_rational(rng)).collect())).collect();
        if basis_inverse(&s).is_ok() {
            return s;
        }
    }
}

fn combination(rng: &mut ChaCha8Rng, s: &[RatVec]) -> RatVec {
    let n = s.len();
    s.iter().fold(RatVec::zero(n), |acc, v| &acc + &v.scale(&small_rational(rng)))
}

/// A covered instance built from the extremal construction for some
/// `t_c >= t` and a random basis, padded with decoys in `A` (up to the
/// budget) and `B`, some of which give alternative decompositions.
pub fn random_covered_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let t_c = rng.gen_range(0..n);
    let t = rng.gen_range(0..=t_c);
    let s = random_basis(rng, n);
    let base = extremal_construction(n, t_c, Some(s.clone())).expect("construction");
    let mut a = base.a.clone();
    let mut b = base.b.clone();
    let targets: Vec<RatVec> = all_pairs(n).map(|p| &s[p.i - 1] + &s[p.j - 1]).collect();
    let extra_a = rng.gen_range(0..=t_c - t);
    while a.len() < base.a.len() + extra_a {
        let decoy = if rng.gen_bool(0.5) {
            combination(rng, &s)
        } else {
            targets.choose(rng).unwrap() - base.b.iter().collect::<Vec<_>>().choose(rng).unwrap()
        };
        if a.insert(decoy.clone()) {
            for target in targets.iter().filter(|_| rng.gen_bool(0.5)) {
                b.insert(target - &decoy);
            }
        }
    }
    for existing in a.iter().cloned().collect::<Vec<_>>() {
        if rng.gen_bool(0.3) {
            b.insert(targets.choose(rng).unwrap() - &existing);
        }
    }
    for _ in 0..rng.gen_range(0..=3) {
        b.insert(combination(rng, &s));
    }
    Instance::new(n, t, s, a, b).expect("valid instance")
}

pub fn set(vs: impl IntoIterator<Item = RatVec>) -> BTreeSet<RatVec> {
    vs.into_iter().collect()
}

fn random_color(rng: &mut ChaCha8Rng, cosets: &[Vec<Rational>]) -> Color {
    let base = &cosets[rng.gen_range(0..cosets.len())];
    Color::from_coords(base.iter().map(|f| f + Rational::from_integer(rng.gen_range(0..2).into())).collect())
}

/// Random `X ⊆ C` in `(Q/2Z)^n` spread over a few cosets of `K`, with
/// `D_n ⊆ X - C` forced by adding `x - d` for a random `x` per `d`.
pub fn random_covering_colors(rng: &mut ChaCha8Rng, n: usize) -> (BTreeSet<Color>, BTreeSet<Color>) {
    let denom = rng.gen_range(2..=4);
    let cosets: Vec<Vec<Rational>> = (0..rng.gen_range(1..=3))
        .map(|k| (0..n).map(|_| if k == 0 { rat(0, 1) } else { rat(rng.gen_range(0..denom), denom) }).collect())
        .collect();
    let x: BTreeSet<Color> = (0..rng.gen_range(1..=n)).map(|_| random_color(rng, &cosets)).collect();
    let xs: Vec<Color> = x.iter().cloned().collect();
    let mut c = x.clone();
    for d in dn_colors(n) {
        let anchor = xs.choose(rng).unwrap();
        c.insert(color_sub(anchor, &d).expect("same dimension"));
    }
    for _ in 0..rng.gen_range(0..4) {
        c.insert(random_color(rng, &cosets));
    }
    (x, c)
}
