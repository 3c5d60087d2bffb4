//! Random finite lattices, posets and mixed monotone tables.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{FinitePoset, TableOperator};
use crate::algebra::{check_mixed_monotone, Strategy};
use std::sync::Arc;

pub const MIN_GENERATED_SIZE: usize = 2;
pub const MAX_GENERATED_SIZE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("size {0} outside 2..=64")]
    Size(usize),
    #[error("poset is not a lattice")]
    NotALattice,
}

fn check_size(size: usize) -> Result<(), GenerateError> {
    if (MIN_GENERATED_SIZE..=MAX_GENERATED_SIZE).contains(&size) {
        Ok(())
    } else {
        Err(GenerateError::Size(size))
    }
}

/// Relabel a relation matrix through a random permutation.
fn shuffled(leq: &[Vec<bool>], rng: &mut ChaCha8Rng) -> FinitePoset {
    let n = leq.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut out = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            out[perm[a]][perm[b]] = leq[a][b];
        }
    }
    FinitePoset::from_matrix(out).expect("relabelling preserves the axioms")
}

fn factorizations(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            if cur.len() > 1 {
                out.push(cur.clone());
            }
            return;
        }
        for f in min..=n {
            if n % f == 0 {
                cur.push(f);
                go(n / f, f, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, 2, &mut Vec::new(), &mut out);
    out
}

/// Random lattice with `size` elements.
///
/// Either a product of chains (when `size` factors) or a lattice grown from
/// the 2-chain by inserting new elements. An element inserted strictly between
/// `a < b` sits above exactly `↓a` and below exactly `↑b`; this keeps every
/// join and meet in place, so the result is always a lattice. Elements are
/// relabelled at random so indices carry no order information.
pub fn generate_random_lattice(seed: u64, size: usize) -> Result<FinitePoset, GenerateError> {
    check_size(size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let products = factorizations(size);
    if !products.is_empty() && rng.gen_bool(0.25) {
        let mut lengths = products[rng.gen_range(0..products.len())].clone();
        lengths.shuffle(&mut rng);
        return Ok(shuffled(&FinitePoset::product_of_chains(&lengths).matrix(), &mut rng));
    }
    let mut leq = vec![vec![true, true], vec![false, true]];
    while leq.len() < size {
        let n = leq.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && leq[a][b])
            .collect();
        let extend_end = rng.gen_bool(0.1);
        let (below, above): (Vec<bool>, Vec<bool>) = if extend_end {
            // new top or new bottom
            if rng.gen_bool(0.5) {
                (vec![true; n], vec![false; n])
            } else {
                (vec![false; n], vec![true; n])
            }
        } else {
            let (a, b) = pairs[rng.gen_range(0..pairs.len())];
            (
                (0..n).map(|x| leq[x][a]).collect(),
                (0..n).map(|x| leq[b][x]).collect(),
            )
        };
        for (x, row) in leq.iter_mut().enumerate() {
            row.push(below[x]);
        }
        let mut new_row = above;
        new_row.push(true);
        leq.push(new_row);
    }
    Ok(shuffled(&leq, &mut rng))
}

/// Random poset (not necessarily a lattice): a random DAG, transitively closed.
pub fn generate_random_poset(seed: u64, size: usize) -> Result<FinitePoset, GenerateError> {
    check_size(size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.gen_range(0.15..0.6);
    let mut leq = vec![vec![false; size]; size];
    for a in 0..size {
        leq[a][a] = true;
        for b in a + 1..size {
            leq[a][b] = rng.gen_bool(p);
        }
    }
    for k in 0..size {
        for a in 0..size {
            if leq[a][k] {
                for b in 0..size {
                    if leq[k][b] {
                        leq[a][b] = true;
                    }
                }
            }
        }
    }
    Ok(shuffled(&leq, &mut rng))
}

/// Random nondecreasing self-map: each value is drawn from the up-set of the
/// join of the values already assigned below it.
fn random_monotone(p: &FinitePoset, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut f = vec![usize::MAX; p.size()];
    for x in p.linear_extension() {
        let floor = (0..p.size())
            .filter(|&z| z != x && p.le(z, x))
            .map(|z| f[z])
            .reduce(|a, b| p.join(a, b).expect("lattice join"));
        let choices = match floor {
            Some(c) => p.up_set(c),
            None => (0..p.size()).collect(),
        };
        f[x] = pick_low(&choices, p, rng);
    }
    f
}

/// Random nonincreasing self-map.
fn random_antitone(p: &FinitePoset, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut g = vec![usize::MAX; p.size()];
    for x in p.linear_extension().into_iter().rev() {
        let floor = (0..p.size())
            .filter(|&z| z != x && p.le(x, z))
            .map(|z| g[z])
            .reduce(|a, b| p.join(a, b).expect("lattice join"));
        let choices = match floor {
            Some(c) => p.up_set(c),
            None => (0..p.size()).collect(),
        };
        g[x] = pick_low(&choices, p, rng);
    }
    g
}

/// Uniform pick, biased toward small down-sets half of the time so maps do
/// not all collapse onto the top.
fn pick_low(choices: &[usize], p: &FinitePoset, rng: &mut ChaCha8Rng) -> usize {
    if rng.gen_bool(0.5) {
        let lowest = choices
            .iter()
            .map(|&c| p.down_set(c).len())
            .min()
            .expect("nonempty choices");
        let low: Vec<usize> = choices
            .iter()
            .copied()
            .filter(|&c| p.down_set(c).len() == lowest)
            .collect();
        low[rng.gen_range(0..low.len())]
    } else {
        choices[rng.gen_range(0..choices.len())]
    }
}

/// Random mixed monotone table on a lattice, built from random monotone `f`
/// and antitone `g` combined by joins and meets. The result is re-verified
/// by the exhaustive check.
pub fn generate_random_mixed_monotone(seed: u64, p: &FinitePoset) -> Result<TableOperator, GenerateError> {
    if !p.is_lattice() {
        return Err(GenerateError::NotALattice);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.size();
    let join = |a: usize, b: usize| p.join(a, b).expect("lattice join");
    let meet = |a: usize, b: usize| p.meet(a, b).expect("lattice meet");
    let (f, g) = (random_monotone(p, &mut rng), random_antitone(p, &mut rng));
    let (f2, g2) = (random_monotone(p, &mut rng), random_antitone(p, &mut rng));
    let c = rng.gen_range(0..n);
    let form = rng.gen_range(0..20);
    let t = TableOperator::from_fn(n, |x, y| match form {
        0..=5 => join(f[x], g[y]),
        6..=10 => meet(f[x], g[y]),
        11..=14 => join(meet(f[x], g[y]), meet(f2[x], g2[y])),
        15..=16 => meet(join(f[x], g[y]), join(f2[x], g2[y])),
        17 => f[x],
        18 => g[y],
        _ => {
            if c % 2 == 0 {
                x
            } else {
                c
            }
        }
    });
    assert!(verify_mixed_monotone(p, &t), "generated table must be mixed monotone");
    Ok(t)
}

/// Mixed monotone table on an arbitrary poset.
///
/// Elements are mapped monotonically onto a maximal chain via the size of
/// their down-sets, and the table is `c[max(h(x), m − h'(y))]`.
pub fn generate_mixed_monotone_on_poset(seed: u64, p: &FinitePoset) -> TableOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = Vec::new();
    let mut cur = p.linear_extension()[0];
    while let Some(&z) = p.down_set(cur).iter().find(|&&z| z != cur) {
        cur = z;
    }
    chain.push(cur);
    loop {
        let next = (0..p.size())
            .filter(|&z| z != cur && p.le(cur, z))
            .filter(|&z| !(0..p.size()).any(|w| w != cur && w != z && p.le(cur, w) && p.le(w, z)))
            .collect::<Vec<_>>();
        match next.as_slice() {
            [] => break,
            many => {
                cur = many[rng.gen_range(0..many.len())];
                chain.push(cur);
            }
        }
    }
    let m = chain.len() - 1;
    let n = p.size();
    let s1 = rng.gen_range(1..=n);
    let s2 = rng.gen_range(1..=n);
    let h = |x: usize, s: usize| (p.down_set(x).len() * (m + 1) / (n + s)).min(m);
    let off = rng.gen_range(0..=m);
    TableOperator::from_fn(n, |x, y| {
        let a = h(x, s1);
        let b = m.saturating_sub(h(y, s2) + off.min(m));
        chain[a.max(b)]
    })
}

pub fn verify_mixed_monotone(p: &FinitePoset, t: &TableOperator) -> bool {
    let op = t.to_operator(Arc::new(p.clone()), "table");
    check_mixed_monotone(&op, Strategy::Exhaustive).is_ok_and(|v| v.passed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_bounds_enforced() {
        assert_eq!(generate_random_lattice(0, 1), Err(GenerateError::Size(1)));
        assert_eq!(generate_random_lattice(0, 65), Err(GenerateError::Size(65)));
    }

    #[test]
    fn two_element_lattice_is_a_chain() {
        for seed in 0..10 {
            let p = generate_random_lattice(seed, 2).unwrap();
            let (lo, hi) = (p.bottom().unwrap(), p.top().unwrap());
            assert_ne!(lo, hi);
            assert!(p.le(lo, hi));
        }
    }

    #[test]
    fn generated_lattices_are_lattices() {
        for seed in 0..200 {
            let size = 2 + (seed as usize % 20);
            let p = generate_random_lattice(seed, size).unwrap();
            assert_eq!(p.size(), size);
            assert!(p.is_lattice(), "seed {seed}");
        }
        assert!(generate_random_lattice(3, 64).unwrap().is_lattice());
    }

    #[test]
    fn both_constructions_occur() {
        let grids = (0..200)
            .map(|s| generate_random_lattice(s, 4).unwrap())
            .filter(|p| {
                // the 2×2 grid has exactly two incomparable middle elements
                (0..4).filter(|&a| (0..4).filter(|&b| !p.le(a, b) && !p.le(b, a)).count() == 1).count() == 2
            })
            .count();
        assert!(grids > 0 && grids < 200);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_random_lattice(9, 12), generate_random_lattice(9, 12));
        let p = generate_random_lattice(9, 12).unwrap();
        assert_eq!(
            generate_random_mixed_monotone(4, &p),
            generate_random_mixed_monotone(4, &p)
        );
    }

    #[test]
    fn generated_tables_are_mixed_monotone() {
        for seed in 0..300 {
            let p = generate_random_lattice(seed, 2 + seed as usize % 9).unwrap();
            let t = generate_random_mixed_monotone(seed ^ 0xabc, &p).unwrap();
            assert!(verify_mixed_monotone(&p, &t), "seed {seed}");
        }
    }

    #[test]
    fn poset_mode_tables_are_mixed_monotone() {
        let mut non_lattices = 0;
        for seed in 0..200 {
            let p = generate_random_poset(seed, 2 + seed as usize % 7).unwrap();
            non_lattices += usize::from(!p.is_lattice());
            let t = generate_mixed_monotone_on_poset(seed, &p);
            assert!(verify_mixed_monotone(&p, &t), "seed {seed}");
        }
        assert!(non_lattices > 0);
    }

    #[test]
    fn non_lattice_rejected() {
        let v = FinitePoset::from_fn(3, |a, b| a == b || b == 2).unwrap();
        let antichain = FinitePoset::from_fn(2, |a, b| a == b).unwrap();
        assert_eq!(generate_random_mixed_monotone(0, &v), Err(GenerateError::NotALattice));
        assert_eq!(
            generate_random_mixed_monotone(0, &antichain),
            Err(GenerateError::NotALattice)
        );
    }

    #[test]
    fn join_of_identity_and_complement_on_two_chain() {
        let p = FinitePoset::chain(2);
        let t = TableOperator::from_fn(2, |x, y| p.join(x, 1 - y).unwrap());
        assert_eq!(t.table, vec![vec![1, 0], vec![1, 1]]);
        assert!(verify_mixed_monotone(&p, &t));
        let c = TableOperator::from_fn(2, |_, _| 1);
        assert!(verify_mixed_monotone(&p, &c));
        let x = TableOperator::from_fn(2, |x, _| p.join(x, p.bottom().unwrap()).unwrap());
        assert!(verify_mixed_monotone(&p, &x));
    }
}
