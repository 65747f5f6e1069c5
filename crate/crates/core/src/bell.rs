//! Distilling A-C Bell pairs by measuring B.
//!
//! If two group elements u, v have anticommuting A-parts, anticommuting
//! C-parts and commuting B-parts, measuring u^B and v^B leaves u^A u^C and
//! v^A v^C in the group: a Bell pair between A and C up to local Cliffords.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::{xor_words, Gf2Basis, Gf2Matrix, PauliString};
use crate::region::Region;
use crate::symplectic::SymplecticMatrix;
use crate::tableau::StabilizerTableau;

pub const DEFAULT_CANDIDATE_BUDGET: usize = 512;

/// A group element found by the search, with the generator indices whose
/// product it is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub rows: Vec<usize>,
    pub element: PauliString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellPairPlan {
    pub pairs: Vec<(Candidate, Candidate)>,
    /// B-restrictions to measure, embedded in the full system. Identity
    /// restrictions are left out.
    pub observables: Vec<PauliString>,
}

impl BellPairPlan {
    pub fn n_bell(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

struct Parts {
    a: PauliString,
    b: PauliString,
    c: PauliString,
}

fn check_cover(n: usize, a: &Region, b: &Region, c: &Region) -> Result<()> {
    Region::check_disjoint(&[a, b, c])?;
    for r in [a, b, c] {
        r.check(n)?;
    }
    if a.len() + b.len() + c.len() != n {
        return Err(Error::InvalidConfig("regions must cover every qubit".into()));
    }
    Ok(())
}

/// Greedy search for compatible pairs among the generators and then their
/// pairwise products, looking at no more than `budget` candidates.
pub fn find_bell_candidates(
    tab: &StabilizerTableau,
    a: &Region,
    b: &Region,
    c: &Region,
    budget: usize,
) -> Result<BellPairPlan> {
    check_cover(tab.n(), a, b, c)?;
    let rows = tab.rows();
    let k = rows.len();
    let mut cands: Vec<Candidate> = rows
        .iter()
        .enumerate()
        .take(budget)
        .map(|(i, r)| Candidate {
            rows: vec![i],
            element: r.clone(),
        })
        .collect();
    'products: for i in 0..k {
        for j in i + 1..k {
            if cands.len() >= budget {
                break 'products;
            }
            let mut e = rows[i].clone();
            e.mul_assign(&rows[j]);
            cands.push(Candidate {
                rows: vec![i, j],
                element: e,
            });
        }
    }
    let parts: Vec<Parts> = cands
        .iter()
        .map(|cand| Parts {
            a: cand.element.restrict(a.qubits()),
            b: cand.element.restrict(b.qubits()),
            c: cand.element.restrict(c.qubits()),
        })
        .collect();

    let mut accepted: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; cands.len()];
    // Candidates whose A-parts and B-parts must commute with any newcomer.
    let compatible = |u: usize, acc: &[(usize, usize)]| {
        acc.iter().all(|&(s, t)| {
            [s, t].iter().all(|&w| {
                !parts[u].a.anticommutes(&parts[w].a) && !parts[u].b.anticommutes(&parts[w].b)
            })
        })
    };
    for u in 0..cands.len() {
        if used[u] || parts[u].a.is_identity() || !compatible(u, &accepted) {
            continue;
        }
        for v in u + 1..cands.len() {
            if used[v]
                || !parts[u].a.anticommutes(&parts[v].a)
                || !parts[u].c.anticommutes(&parts[v].c)
                || parts[u].b.anticommutes(&parts[v].b)
                || !compatible(v, &accepted)
            {
                continue;
            }
            // A pair built from elements already spanned by earlier pairs
            // would not add a new symplectic pair; the A-commutation
            // checks above exclude that.
            accepted.push((u, v));
            used[u] = true;
            used[v] = true;
            break;
        }
    }

    let mut observables = Vec::new();
    for &(u, v) in &accepted {
        for w in [u, v] {
            if !parts[w].b.is_identity() {
                observables.push(parts[w].b.embed(tab.n(), b.qubits()));
            }
        }
    }
    let plan = BellPairPlan {
        pairs: accepted
            .iter()
            .map(|&(u, v)| (cands[u].clone(), cands[v].clone()))
            .collect(),
        observables,
    };
    debug_assert!(plan_is_consistent(&plan, a, b, c));
    Ok(plan)
}

fn plan_is_consistent(plan: &BellPairPlan, a: &Region, b: &Region, c: &Region) -> bool {
    let restrict = |p: &PauliString, r: &Region| p.restrict(r.qubits());
    for (i, (u, v)) in plan.pairs.iter().enumerate() {
        let (u, v) = (&u.element, &v.element);
        if !restrict(u, a).anticommutes(&restrict(v, a))
            || !restrict(u, c).anticommutes(&restrict(v, c))
            || restrict(u, b).anticommutes(&restrict(v, b))
        {
            return false;
        }
        for (s, t) in &plan.pairs[i + 1..] {
            for x in [u, v] {
                for y in [&s.element, &t.element] {
                    if restrict(x, a).anticommutes(&restrict(y, a)) {
                        return false;
                    }
                }
            }
        }
    }
    observables_commute(&plan.observables)
}

fn observables_commute(obs: &[PauliString]) -> bool {
    obs.iter()
        .enumerate()
        .all(|(i, o)| obs[i + 1..].iter().all(|p| !o.anticommutes(p)))
}

/// Measures every observable of `plan`; returns the post-measurement state
/// and the number of pairs.
pub fn distill<R: Rng + ?Sized>(
    tab: &StabilizerTableau,
    plan: &BellPairPlan,
    rng: &mut R,
) -> Result<(StabilizerTableau, usize)> {
    if !observables_commute(&plan.observables) {
        return Err(Error::Invariant("plan observables do not commute".into()));
    }
    let mut post = tab.clone();
    for o in &plan.observables {
        post.measure_pauli(o, rng)?;
    }
    Ok((post, plan.n_bell()))
}

/// Applies local Cliffords on A and C so that pair `i` of `plan` becomes
/// `X X` and `Z Z` on the `i`-th qubits of `a` and `c`. The certificate
/// does not need this; it makes the distilled pairs explicit.
pub fn bell_normal_form(
    post: &StabilizerTableau,
    plan: &BellPairPlan,
    a: &Region,
    c: &Region,
) -> Result<StabilizerTableau> {
    let local = |r: &Region| -> Result<SymplecticMatrix> {
        let pairs: Vec<(PauliString, PauliString)> = plan
            .pairs
            .iter()
            .map(|(u, v)| (u.element.restrict(r.qubits()), v.element.restrict(r.qubits())))
            .collect();
        Ok(SymplecticMatrix::extend_pairs(r.len(), &pairs)?.inverse())
    };
    let mut out = post.clone();
    out.apply_clifford(&local(a)?, a.qubits())?;
    out.apply_clifford(&local(c)?, c.qubits())?;
    Ok(out)
}

/// Basis of the elements of `tab`'s group that act trivially on `b`.
pub fn subgroup_outside(tab: &StabilizerTableau, b: &Region) -> Vec<PauliString> {
    let mut rows: Vec<(PauliString, PauliString)> = tab
        .rows()
        .iter()
        .map(|r| (r.restrict(b.qubits()), r.clone()))
        .collect();
    let nb = b.len();
    let mut free: Vec<usize> = (0..rows.len()).collect();
    for q in 0..nb {
        for is_x in [true, false] {
            let bit = |p: &PauliString| if is_x { p.x(q) } else { p.z(q) };
            let Some(pos) = free.iter().position(|&i| bit(&rows[i].0)) else {
                continue;
            };
            let p = free.remove(pos);
            let (pb, pf) = rows[p].clone();
            for &i in &free {
                if bit(&rows[i].0) {
                    xor_words(rows[i].0.words_mut(), pb.words());
                    xor_words(rows[i].1.words_mut(), pf.words());
                }
            }
        }
    }
    free.into_iter().map(|i| rows[i].1.clone()).collect()
}

/// Number of symplectic pairs in the span of `v`: half the rank of their
/// commutation matrix.
pub fn symplectic_pairs(v: &[PauliString]) -> usize {
    let rows: Vec<Vec<bool>> = v
        .iter()
        .map(|x| v.iter().map(|y| x.anticommutes(y)).collect())
        .collect();
    Gf2Matrix::from_bool_rows(v.len(), &rows)
        .expect("square matrix")
        .into_rank()
        / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clauses {
    /// I(A:C) after measurement is at least 2 n_bell.
    pub mutual_information: bool,
    /// The A∪C-supported subgroup after measurement holds n_bell
    /// symplectic pairs on A.
    pub witness: bool,
    /// n_bell <= floor(I(A:C|B) / 2) before measurement.
    pub cmi_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub n_bell: usize,
    pub cmi_pre: usize,
    pub mi_ac_post: usize,
    pub witness_pairs: usize,
    pub clauses: Clauses,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.clauses.mutual_information && self.clauses.witness && self.clauses.cmi_bound
    }

    pub fn failing(&self) -> Vec<&'static str> {
        let c = &self.clauses;
        [
            (c.mutual_information, "mutual_information"),
            (c.witness, "witness"),
            (c.cmi_bound, "cmi_bound"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

pub fn verify_distillation(
    pre: &StabilizerTableau,
    post: &StabilizerTableau,
    a: &Region,
    b: &Region,
    c: &Region,
    n_bell: usize,
) -> Result<Certificate> {
    check_cover(pre.n(), a, b, c)?;
    let cmi_pre = pre.cmi(a, b, c)?;
    let mi_ac_post = post.mutual_information(a, c)?;
    let outside: Vec<PauliString> = subgroup_outside(post, b)
        .iter()
        .map(|g| g.restrict(a.qubits()))
        .collect();
    let witness_pairs = symplectic_pairs(&outside);
    Ok(Certificate {
        n_bell,
        cmi_pre,
        mi_ac_post,
        witness_pairs,
        clauses: Clauses {
            mutual_information: mi_ac_post >= 2 * n_bell,
            witness: witness_pairs >= n_bell,
            cmi_bound: n_bell <= cmi_pre / 2,
        },
    })
}

/// Whether every element of `sub` lies in the group of `tab`.
pub fn contains_all(tab: &StabilizerTableau, sub: &[PauliString]) -> bool {
    let mut basis = Gf2Basis::new();
    for r in tab.rows() {
        basis.insert_pauli(r);
    }
    sub.iter().all(|g| basis.contains_pauli(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clipped::sample_random_stabilizer_state;
    use crate::pauli::Letter;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tab(n: usize, rows: &[&str]) -> StabilizerTableau {
        StabilizerTableau::from_rows(n, rows.iter().map(|r| r.parse().unwrap()).collect()).unwrap()
    }

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn abc(a: &[usize], b: &[usize], c: &[usize]) -> (Region, Region, Region) {
        (Region::new(a.to_vec()), Region::new(b.to_vec()), Region::new(c.to_vec()))
    }

    #[test]
    fn four_qubit_worked_example() {
        let t = tab(4, &["XXIX", "ZIXZ"]);
        let (a, b, c) = abc(&[0], &[1, 2], &[3]);
        let plan = find_bell_candidates(&t, &a, &b, &c, DEFAULT_CANDIDATE_BUDGET).unwrap();
        assert_eq!(plan.n_bell(), 1);
        assert_eq!(plan.pairs[0].0.rows, [0]);
        assert_eq!(plan.pairs[0].1.rows, [1]);
        assert_eq!(plan.observables, [p("IXII"), p("IIXI")]);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (post, n) = distill(&t, &plan, &mut rng).unwrap();
        assert_eq!(n, 1);
        assert!(contains_all(&post, &[p("XIIX"), p("ZIIZ")]));
        let cert = verify_distillation(&t, &post, &a, &b, &c, n).unwrap();
        assert!(cert.passed(), "{cert:?}");
        assert_eq!(cert.mi_ac_post, 2);
        assert_eq!(cert.cmi_pre, 2);
        let nf = bell_normal_form(&post, &plan, &a, &c).unwrap();
        assert!(contains_all(&nf, &[p("XIIX"), p("ZIIZ")]));
    }

    #[test]
    fn product_state_has_no_plan() {
        let t = StabilizerTableau::from_product_state(6);
        let (a, b, c) = abc(&[0, 1], &[2, 3], &[4, 5]);
        let plan = find_bell_candidates(&t, &a, &b, &c, DEFAULT_CANDIDATE_BUDGET).unwrap();
        assert!(plan.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (post, n) = distill(&t, &plan, &mut rng).unwrap();
        assert_eq!(n, 0);
        assert_eq!(post, t);
        assert!(verify_distillation(&t, &post, &a, &b, &c, 0).unwrap().passed());
    }

    /// GHZ on three qubits has I(A:C|B) = 1, yet measuring X on the middle
    /// qubit leaves a Bell pair on the outer two: the pair (XXX, ZIZ) is a
    /// valid plan, so the CMI bound clause fails here.
    #[test]
    fn ghz_distills_a_pair_despite_unit_cmi() {
        let t = tab(3, &["XXX", "ZZI", "IZZ"]);
        let (a, b, c) = abc(&[0], &[1], &[2]);
        let plan = find_bell_candidates(&t, &a, &b, &c, DEFAULT_CANDIDATE_BUDGET).unwrap();
        assert_eq!(plan.n_bell(), 1);
        let (u, v) = &plan.pairs[0];
        assert_eq!(u.element, p("XXX"));
        assert_eq!(v.element, p("ZIZ"));
        assert_eq!(v.rows, [1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (post, n) = distill(&t, &plan, &mut rng).unwrap();
        assert!(contains_all(&post, &[p("XIX"), p("ZIZ")]));
        let cert = verify_distillation(&t, &post, &a, &b, &c, n).unwrap();
        assert_eq!(cert.cmi_pre, 1);
        assert_eq!(cert.mi_ac_post, 2);
        assert!(cert.clauses.mutual_information && cert.clauses.witness);
        assert_eq!(cert.failing(), ["cmi_bound"]);
    }

    /// Entanglement swapping: two Bell pairs (0,1) and (2,3) with B = {1,2}
    /// have zero CMI, but a Bell measurement on B links 0 and 3.
    #[test]
    fn swapping_beats_the_cmi_bound() {
        let t = tab(4, &["XXII", "ZZII", "IIXX", "IIZZ"]);
        let (a, b, c) = abc(&[0], &[1, 2], &[3]);
        assert_eq!(t.cmi(&a, &b, &c).unwrap(), 0);
        let plan = find_bell_candidates(&t, &a, &b, &c, DEFAULT_CANDIDATE_BUDGET).unwrap();
        assert_eq!(plan.n_bell(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (post, n) = distill(&t, &plan, &mut rng).unwrap();
        let cert = verify_distillation(&t, &post, &a, &b, &c, n).unwrap();
        assert_eq!(cert.mi_ac_post, 2);
        assert_eq!(cert.failing(), ["cmi_bound"]);
    }

    #[test]
    fn regions_must_cover() {
        let t = StabilizerTableau::from_product_state(4);
        let (a, b, c) = abc(&[0], &[1], &[3]);
        assert!(find_bell_candidates(&t, &a, &b, &c, 10).is_err());
        let (a, b, c) = abc(&[0, 1], &[1, 2], &[3]);
        assert!(find_bell_candidates(&t, &a, &b, &c, 10).is_err());
    }

    #[test]
    fn noncommuting_plan_is_refused() {
        let t = StabilizerTableau::from_product_state(2);
        let plan = BellPairPlan {
            pairs: vec![],
            observables: vec![p("XI"), p("ZI")],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(distill(&t, &plan, &mut rng), Err(Error::Invariant(_))));
    }

    #[test]
    fn subgroup_outside_examples() {
        let t = tab(3, &["XXX", "ZZI", "IZZ"]);
        let sub = subgroup_outside(&t, &Region::from([1]));
        assert_eq!(sub.len(), 1);
        assert_eq!(sub[0], p("ZIZ"));
        assert_eq!(symplectic_pairs(&[p("X"), p("Z"), p("Y")]), 1);
        assert_eq!(symplectic_pairs(&[p("XI"), p("ZI"), p("IX"), p("IZ")]), 2);
        assert_eq!(symplectic_pairs(&[]), 0);
    }

    fn random_mixed(seed: u64, n: usize) -> StabilizerTableau {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=n);
        sample_random_stabilizer_state(n, k, &mut rng).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn distillation_is_sound(seed in any::<u64>()) {
            let n = 9;
            let t = random_mixed(seed, n);
            let (a, b, c) = abc(&[0, 1, 2], &[3, 4, 5], &[6, 7, 8]);
            let plan = find_bell_candidates(&t, &a, &b, &c, DEFAULT_CANDIDATE_BUDGET).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            let (post, n_bell) = distill(&t, &plan, &mut rng).unwrap();
            let cert = verify_distillation(&t, &post, &a, &b, &c, n_bell).unwrap();
            prop_assert!(cert.clauses.mutual_information, "{:?}", cert);
            prop_assert!(cert.clauses.witness, "{:?}", cert);
            for (u, v) in &plan.pairs {
                for e in [&u.element, &v.element] {
                    let mut w = e.clone();
                    w.mul_assign(&e.restrict(b.qubits()).embed(n, b.qubits()));
                    prop_assert!(post.contains(&w));
                }
            }
            let nf = bell_normal_form(&post, &plan, &a, &c).unwrap();
            for i in 0..n_bell {
                let (qa, qc) = (a.qubits()[i], c.qubits()[i]);
                for l in [Letter::X, Letter::Z] {
                    let mut g = PauliString::single(n, qa, l);
                    g.mul_assign(&PauliString::single(n, qc, l));
                    prop_assert!(nf.contains(&g), "pair {} letter {:?}", i, l);
                }
            }
        }

        #[test]
        fn measuring_b_only_grows_the_outside_subgroup(seed in any::<u64>()) {
            let n = 8;
            let t = random_mixed(seed, n);
            let b = Region::from([2, 3, 4, 5]);
            let before = subgroup_outside(&t, &b);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
            let obs = PauliString::random(4, &mut rng);
            prop_assume!(!obs.is_identity());
            let mut post = t.clone();
            post.measure_pauli(&obs.embed(n, b.qubits()), &mut rng).unwrap();
            prop_assert!(contains_all(&post, &before));
            prop_assert!(subgroup_outside(&post, &b).len() >= before.len());
        }
    }
}
