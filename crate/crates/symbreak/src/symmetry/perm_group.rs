//! Deterministic Schreier–Sims stabilizer chain for small permutation groups.
//!
//! Used to compute exact orders of subgroups generated by detected isotropy
//! generators (e.g. to decide whether a factor acting on a block is the full
//! symmetric group). Point counts here are small (≤ a few dozen), so a
//! fixpoint formulation that recomputes orbits each pass is plenty fast and
//! avoids the bookkeeping pitfalls of incremental variants.

use super::Permutation;

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // a ∘ b: apply b first.
    b.iter().map(|&x| a[x]).collect()
}

fn inverse(a: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn is_identity(a: &[usize]) -> bool {
    a.iter().enumerate().all(|(i, &x)| i == x)
}

fn first_moved(a: &[usize]) -> usize {
    (0..a.len()).find(|&i| a[i] != i).expect("non-identity")
}

/// transversal[p] = element mapping `base` to p, for p in the orbit of
/// `base` under `gens`; None outside the orbit.
fn orbit_transversal(n: usize, base: usize, gens: &[Vec<usize>]) -> Vec<Option<Vec<usize>>> {
    let mut trans: Vec<Option<Vec<usize>>> = vec![None; n];
    trans[base] = Some((0..n).collect());
    let mut queue = vec![base];
    while let Some(p) = queue.pop() {
        let t_p = trans[p].clone().unwrap();
        for s in gens {
            let q = s[p];
            if trans[q].is_none() {
                trans[q] = Some(compose(s, &t_p));
                queue.push(q);
            }
        }
    }
    trans
}

/// Exact order of ⟨gens⟩ via a stabilizer chain. Saturates at `u128::MAX`
/// (unreachable for the point counts used here). Empty input → 1.
///
/// Invariants maintained until fixpoint: level m holds only elements fixing
/// all bases above it, and every Schreier generator of level l sifts to the
/// identity through the chain below. Each pass that adds a residue strictly
/// grows some orbit or opens a new level, so the loop terminates; at the
/// fixpoint Schreier's lemma gives |G| = Π orbit sizes.
pub fn perm_group_order(gens: &[Permutation]) -> u128 {
    let external: Vec<Vec<usize>> = gens
        .iter()
        .filter(|g| !g.is_identity())
        .map(|g| g.images().to_vec())
        .collect();
    let Some(first) = external.first() else {
        return 1;
    };
    let n = first.len();
    for g in &external {
        assert_eq!(g.len(), n, "generators must act on the same points");
    }

    let mut levels: Vec<Vec<Vec<usize>>> = vec![external.clone()];
    let mut bases: Vec<usize> = vec![first_moved(&external[0])];

    loop {
        // Snapshot: Schreier generators below are formed against exactly the
        // generator sets these transversals were built from; additions made
        // during the pass are picked up by the next pass.
        let snapshot = levels.clone();
        let trans: Vec<Vec<Option<Vec<usize>>>> = snapshot
            .iter()
            .zip(&bases)
            .map(|(gens, &b)| orbit_transversal(n, b, gens))
            .collect();
        let mut changed = false;

        for l in 0..trans.len() {
            let orbit: Vec<usize> = (0..n).filter(|&p| trans[l][p].is_some()).collect();
            let level_gens = &snapshot[l];
            for &p in &orbit {
                let t_p = trans[l][p].as_ref().unwrap();
                for s in level_gens {
                    let q = s[p];
                    let t_q = trans[l][q].as_ref().unwrap();
                    let mut h = compose(&inverse(t_q), &compose(s, t_p));
                    if is_identity(&h) {
                        continue;
                    }
                    // Sift through deeper levels; on a miss the residue
                    // belongs exactly at the level that rejected it. Levels
                    // created earlier this pass have no transversal yet;
                    // defer those residues to the next pass.
                    let mut stuck: Option<usize> = None;
                    let mut deferred = false;
                    for m in l + 1..levels.len() {
                        if m >= trans.len() {
                            deferred = true;
                            break;
                        }
                        match &trans[m][h[bases[m]]] {
                            Some(t) => {
                                h = compose(&inverse(t), &h);
                                if is_identity(&h) {
                                    break;
                                }
                            }
                            None => {
                                stuck = Some(m);
                                break;
                            }
                        }
                    }
                    if deferred || is_identity(&h) {
                        continue;
                    }
                    match stuck {
                        Some(m) => {
                            if !levels[m].contains(&h) {
                                levels[m].push(h);
                                changed = true;
                            }
                        }
                        None => {
                            bases.push(first_moved(&h));
                            levels.push(vec![h]);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            let mut order: u128 = 1;
            for t in &trans {
                let size = t.iter().filter(|x| x.is_some()).count();
                order = order.saturating_mul(size as u128);
            }
            return order;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(img: &[usize]) -> Permutation {
        Permutation::from_images(img.to_vec()).unwrap()
    }

    #[test]
    fn trivial_group() {
        assert_eq!(perm_group_order(&[]), 1);
        assert_eq!(perm_group_order(&[Permutation::identity(5)]), 1);
    }

    #[test]
    fn symmetric_group_from_coxeter_generators() {
        // (0 1) and the n-cycle generate S_n.
        for n in 2..=8usize {
            let mut gens = vec![Permutation::transposition(n, 0, 1)];
            gens.push(Permutation::cyclic_shift(n));
            let expect: u128 = (1..=n as u128).product();
            assert_eq!(perm_group_order(&gens), expect, "S_{n}");
        }
    }

    #[test]
    fn adjacent_transpositions_generate_young_product() {
        // S_3×S_2 inside S_5: order 12.
        let gens = vec![
            Permutation::transposition(5, 0, 1),
            Permutation::transposition(5, 1, 2),
            Permutation::transposition(5, 3, 4),
        ];
        assert_eq!(perm_group_order(&gens), 12);
    }

    #[test]
    fn double_transposition_has_order_two() {
        let g = perm(&[1, 0, 3, 2]);
        assert_eq!(perm_group_order(&[g]), 2);
    }

    #[test]
    fn klein_four_group() {
        let a = perm(&[1, 0, 3, 2]);
        let b = perm(&[2, 3, 0, 1]);
        assert_eq!(perm_group_order(&[a, b]), 4);
    }

    #[test]
    fn cyclic_and_dihedral() {
        let shift = Permutation::cyclic_shift(20);
        assert_eq!(perm_group_order(&[shift.clone()]), 20);
        // Add the reversal i ↦ −i (mod 20): dihedral of order 40.
        let rev = Permutation::from_images((0..20).map(|i| (20 - i) % 20).collect()).unwrap();
        assert_eq!(perm_group_order(&[shift, rev]), 40);
    }

    #[test]
    fn s8_order() {
        let gens = vec![
            Permutation::transposition(8, 0, 1),
            Permutation::cyclic_shift(8),
        ];
        assert_eq!(perm_group_order(&gens), 40_320);
    }

    #[test]
    fn alternating_group_from_three_cycles() {
        // 3-cycles (0 1 2) and (1 2 3) generate A_4, order 12.
        let a = perm(&[1, 2, 0, 3]);
        let b = perm(&[0, 2, 3, 1]);
        assert_eq!(perm_group_order(&[a, b]), 12);
    }

    #[test]
    fn redundant_generators_do_not_change_order() {
        let gens = vec![
            Permutation::transposition(4, 0, 1),
            Permutation::transposition(4, 1, 2),
            Permutation::transposition(4, 2, 3),
            Permutation::transposition(4, 0, 3),
            perm(&[3, 2, 1, 0]),
        ];
        assert_eq!(perm_group_order(&gens), 24);
    }

    #[test]
    fn full_symmetric_group_on_twelve_points() {
        let gens = vec![
            Permutation::transposition(12, 0, 1),
            Permutation::cyclic_shift(12),
        ];
        assert_eq!(perm_group_order(&gens), 479_001_600);
    }
}
