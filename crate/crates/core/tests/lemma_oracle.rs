use std::collections::BTreeSet;

use sumset_lab::f2lemma::{covers_dn, exhaustive_lemma_check, lemma_bound_sets, random_lemma_check, F2Vec};
use sumset_lab::model::binom2;

fn subsets(universe: &[F2Vec]) -> Vec<BTreeSet<F2Vec>> {
    (0..1u32 << universe.len())
        .map(|mask| universe.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, v)| *v).collect())
        .collect()
}

/// Set-based enumeration sharing no code with the bitmask scan.
fn brute_force(n: usize) -> (u64, u64, Vec<Option<usize>>) {
    let all: Vec<F2Vec> = (0..1u64 << n).map(|b| F2Vec::new(b, n)).collect();
    let mut pairs = 0;
    let mut covering = 0;
    let mut minima: Vec<Option<usize>> = vec![None; n + 1];
    for c in subsets(&all) {
        let members: Vec<F2Vec> = c.iter().copied().collect();
        for x in subsets(&members) {
            pairs += 1;
            if x.is_empty() || x.len() > n {
                continue;
            }
            let mut diffs = BTreeSet::new();
            for a in &x {
                for b in &c {
                    diffs.insert(a.add(b));
                }
            }
            let target_ok = (0..n).all(|i| (i + 1..n).all(|j| diffs.contains(&F2Vec::new(1 << i | 1 << j, n))));
            assert_eq!(target_ok, covers_dn(&x, &c, n));
            if !target_ok {
                continue;
            }
            covering += 1;
            for (u, slot) in minima.iter_mut().enumerate().take(n - x.len() + 1) {
                *slot = Some(slot.map_or(c.len(), |m| m.min(c.len())));
                let report = lemma_bound_sets(&x, &c, n, u).unwrap();
                assert!(report.pass, "X={x:?} C={c:?} u={u}: {:?}", report.check());
            }
        }
    }
    (pairs, covering, minima)
}

#[test]
fn exhaustive_scan_agrees_with_brute_force() {
    for n in 2..=3 {
        let (pairs, covering, minima) = brute_force(n);
        let report = exhaustive_lemma_check(n, 3).unwrap();
        assert_eq!(report.pairs_enumerated, pairs);
        assert_eq!(pairs, 3u64.pow(1 << n));
        assert_eq!(report.covering_pairs, covering);
        assert!(report.counterexample.is_none());
        for (entry, expected) in report.minima.iter().zip(&minima) {
            assert_eq!(entry.min_c, *expected, "n={n} u={}", entry.u);
            if let Some(m) = expected {
                assert!(*m >= n + binom2(entry.u));
            }
        }
    }
}

#[test]
fn minima_are_tight_in_small_dimensions() {
    // |X| = 1 forces C ⊇ x + D_n ∪ {x}, so the least |C| at u = n-1 is n + C(n-1,2)
    for n in 2..=4 {
        let report = exhaustive_lemma_check(n, 4).unwrap();
        let top = &report.minima[n - 1];
        assert_eq!(top.min_c, Some(1 + binom2(n)));
        assert_eq!(1 + binom2(n), n + binom2(n - 1));
        assert_eq!(report.minima[n].min_c, None);
    }
}

#[test]
fn worker_count_does_not_change_the_result() {
    let one = exhaustive_lemma_check(3, 1).unwrap();
    let many = exhaustive_lemma_check(3, 7).unwrap();
    assert_eq!(one, many);
}

#[test]
fn random_lemma_five() {
    let report = random_lemma_check(5, 1_000_000, 2024).unwrap();
    assert_eq!(report.violations, 0, "{:?}", report.counterexample);
    assert_eq!(report.lemma_mismatches, 0);
}

#[test]
fn random_lemma_six() {
    let report = random_lemma_check(6, 1_000_000, 2025).unwrap();
    assert_eq!(report.violations, 0, "{:?}", report.counterexample);
    assert_eq!(report.lemma_mismatches, 0);
}
