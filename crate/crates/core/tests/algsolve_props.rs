use std::collections::BTreeMap;

use proptest::prelude::*;

use fexpand_core::algsolve::{pair_sign_mirrors, solve_system, subsumes, Budget};
use fexpand_core::collect::AlgSystem;
use fexpand_core::symcore::{rat, Poly, Rational, Sym, SymKind};

fn unknowns() -> [Sym; 3] {
    ["sa", "sb", "sc"].map(|n| Sym::intern(n, SymKind::AnsatzCoeff))
}

fn system(equations: Vec<Poly>, n: usize) -> AlgSystem {
    AlgSystem {
        equations,
        unknowns: unknowns()[..n].to_vec(),
        side_conditions: vec![],
    }
}

prop_compose! {
    fn root()(n in -6i64..=6, d in 1i64..=3) -> Rational {
        rat(n, d)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A triangular system with planted roots: `a` takes its planted roots
    /// and `b` is `shift * a` plus one of its own. The solution set is
    /// exactly the product of the planted choices.
    #[test]
    fn planted_triangular_roots_are_all_found(
        xs in prop::collection::btree_set(root(), 1..=3),
        ys in prop::collection::btree_set(root(), 1..=2),
        shift in root(),
    ) {
        let [a, b, _] = unknowns();
        let mut e1 = Poly::one();
        for r in &xs {
            e1 = &e1 * &(Poly::var(a) - Poly::constant(r.clone()));
        }
        // (b - shift*a - y1)(b - shift*a - y2)
        let mut e2 = Poly::one();
        for r in &ys {
            e2 = &e2 * &(Poly::var(b) - Poly::var(a).scale(&shift) - Poly::constant(r.clone()));
        }
        // a combination keeps the variety but hides the triangular shape
        let e2 = &e2 + &e1.scale(&rat(2, 1));
        let out = solve_system(&system(vec![e1.clone(), e2.clone()], 2), &Budget::default()).unwrap();
        prop_assert!(out.complete);
        for f in &out.families {
            prop_assert!(f.residual(&e1).is_zero() && f.residual(&e2).is_zero());
        }
        let mut found = 0;
        for x in &xs {
            for y in &ys {
                let by = &shift * x + y;
                let hit = out.families.iter().any(|f| {
                    f.instantiate(&BTreeMap::new())
                        .map(|v| v.get(&a) == Some(x) && v.get(&b) == Some(&by))
                        .unwrap_or(false)
                });
                prop_assert!(hit, "missing a = {}, b = {}", x, by);
                found += 1;
            }
        }
        prop_assert_eq!(out.families.len(), found);
    }

    /// `x*y = 0, y*(y - r) = 0` has the line `y = 0` and the point `(0, r)`.
    #[test]
    fn positive_dimensional_components(r in root().prop_filter("nonzero", |r| *r != rat(0, 1)), x0 in root()) {
        let [a, b, _] = unknowns();
        let e1 = &Poly::var(a) * &Poly::var(b);
        let e2 = &Poly::var(b) * &(Poly::var(b) - Poly::constant(r.clone()));
        let out = solve_system(&system(vec![e1, e2], 2), &Budget::default()).unwrap();
        prop_assert!(out.complete);
        let on_line = out.families.iter().any(|f| {
            let free: BTreeMap<Sym, Rational> = f.free.iter().map(|s| (*s, x0.clone())).collect();
            f.instantiate(&free).map(|v| v.get(&a) == Some(&x0) && v.get(&b) == Some(&rat(0, 1))).unwrap_or(false)
        });
        let point = out.families.iter().any(|f| {
            f.instantiate(&BTreeMap::new()).map(|v| v.get(&a) == Some(&rat(0, 1)) && v.get(&b) == Some(&r)).unwrap_or(false)
        });
        prop_assert!(on_line && point);
    }
}

#[test]
fn inconsistent_system_has_no_families() {
    let [a, _, _] = unknowns();
    let e1 = Poly::var(a) - Poly::one();
    let e2 = Poly::var(a) - Poly::int(2);
    let out = solve_system(&system(vec![e1, e2], 1), &Budget::default()).unwrap();
    assert!(out.families.is_empty());
    assert!(out.complete);
}

#[test]
fn irrational_roots_are_certified_not_dropped_silently() {
    let [a, _, _] = unknowns();
    let e = Poly::var(a).pow(2) - Poly::int(13);
    let out = solve_system(&system(vec![e], 1), &Budget::default()).unwrap();
    assert!(out.families.is_empty());
    assert!(!out.certificates.is_empty());
}

#[test]
fn sign_mirrors_pair_up() {
    let [a, b, _] = unknowns();
    // a^2 = 1/4, b = a
    let e1 = Poly::var(a).pow(2) - Poly::constant(rat(1, 4));
    let e2 = Poly::var(b) - Poly::var(a);
    let out = solve_system(&system(vec![e1, e2], 2), &Budget::default()).unwrap();
    assert_eq!(out.families.len(), 2);
    let pairs = pair_sign_mirrors(&out.families);
    assert_eq!(pairs.len(), 1);
    assert!(!subsumes(&out.families[0], &out.families[1]));
}

#[test]
fn branch_budget_marks_the_outcome_incomplete() {
    let [a, b, c] = unknowns();
    let mut eqs = Vec::new();
    for s in [a, b, c] {
        eqs.push(&(&Poly::var(s) * &(Poly::var(s) - Poly::one())) * &(Poly::var(s) + Poly::one()));
    }
    let budget = Budget {
        max_branches: 2,
        ..Budget::default()
    };
    let out = solve_system(&system(eqs, 3), &budget).unwrap();
    assert!(!out.complete && out.budget_exhausted);
}

#[test]
fn depth_counts_nonzero_hypotheses() {
    // a*b = 0 splits into a = 0 and (a != 0, b = 0); only the second is deeper
    let [a, b, _] = unknowns();
    let eqs = vec![&Poly::var(a) * &Poly::var(b)];
    let shallow = Budget {
        max_depth: 0,
        ..Budget::default()
    };
    let out = solve_system(&system(eqs.clone(), 2), &shallow).unwrap();
    assert!(out.budget_exhausted);
    let out = solve_system(&system(eqs, 2), &Budget::default()).unwrap();
    assert!(out.complete && out.families.len() == 2);
}
