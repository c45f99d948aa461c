use std::collections::BTreeMap;

use proptest::prelude::*;

use fexpand_core::auxreg::Derivation;
use fexpand_core::pdeparse::parse_value;
use fexpand_core::symcore::{rat, Expr, Monomial, Poly, Rational, Sym, SymKind};

fn vars() -> [Sym; 3] {
    ["px", "py", "pz"].map(|n| Sym::intern(n, SymKind::FreeConstant))
}

prop_compose! {
    fn small_rational()(n in -20i64..=20, d in 1i64..=6) -> Rational {
        rat(n, d)
    }
}

prop_compose! {
    /// Up to five terms with exponents in -2..=3, so Laurent monomials occur.
    fn laurent_poly()(terms in prop::collection::vec((small_rational(), -2i32..=3, -2i32..=3, 0i32..=2), 0..5)) -> Poly {
        let [x, y, z] = vars();
        let mut p = Poly::zero();
        for (c, a, b, e) in terms {
            p.add_term(Monomial::from_pairs([(x, a), (y, b), (z, e)]), c);
        }
        p
    }
}

prop_compose! {
    fn poly()(terms in prop::collection::vec((small_rational(), 0i32..=3, 0i32..=3, 0i32..=2), 0..5)) -> Poly {
        let [x, y, z] = vars();
        let mut p = Poly::zero();
        for (c, a, b, e) in terms {
            p.add_term(Monomial::from_pairs([(x, a), (y, b), (z, e)]), c);
        }
        p
    }
}

fn point() -> BTreeMap<Sym, Rational> {
    let [x, y, z] = vars();
    [(x, rat(3, 7)), (y, rat(-5, 2)), (z, rat(11, 3))].into_iter().collect()
}

proptest! {
    #[test]
    fn ring_axioms(a in laurent_poly(), b in laurent_poly(), c in laurent_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &Poly::zero(), a.clone());
        prop_assert_eq!(&a * &Poly::one(), a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in laurent_poly(), b in laurent_poly()) {
        let v = point();
        let (ea, eb) = (a.eval_rational(&v).unwrap(), b.eval_rational(&v).unwrap());
        prop_assert_eq!((&a * &b).eval_rational(&v).unwrap(), &ea * &eb);
        prop_assert_eq!((&a - &b).eval_rational(&v).unwrap(), ea - eb);
    }

    #[test]
    fn derivation_obeys_leibniz(a in laurent_poly(), b in laurent_poly(), ix in poly(), iy in poly()) {
        // an arbitrary derivation: x -> ix, y -> iy, z -> 0
        let [x, y, _] = vars();
        let mut d = Derivation::new();
        d.set(x, ix);
        d.set(y, iy);
        let lhs = d.apply(&(&a * &b));
        let rhs = &(&d.apply(&a) * &b) + &(&a * &d.apply(&b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn printed_polynomials_parse_back(a in poly()) {
        let text = Expr::from_poly(&a).to_string();
        let back = parse_value(&text, SymKind::FreeConstant).unwrap().to_poly().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn derivative_matches_formal_expression_derivative(a in poly()) {
        let [x, _, _] = vars();
        let via_expr = Expr::from_poly(&a).differentiate(x).to_poly().unwrap();
        prop_assert_eq!(a.diff(x), via_expr);
    }
}

/// A thousand random operations on polynomials, shadowed by the same
/// operations on their values at a fixed point.
#[test]
fn thousand_operation_rational_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000);
    let [x, y, z] = vars();
    let v = point();
    let atoms = [Poly::var(x), Poly::var(y), Poly::var(z)];
    let mut p = Poly::one();
    let mut shadow = rat(1, 1);
    for step in 0..1000 {
        let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
        let a = &atoms[rng.gen_range(0..3)];
        let av = a.eval_rational(&v).unwrap();
        let op = if p.len() > 40 { 4 } else { rng.gen_range(0..5) };
        match op {
            0 => {
                p = &p + &a.scale(&c);
                shadow += &av * &c;
            }
            1 => {
                p = &p - &Poly::constant(c.clone());
                shadow -= c;
            }
            2 => {
                p = &p * a;
                shadow *= av;
            }
            3 if c != rat(0, 1) => {
                p = p.scale(&c.recip());
                shadow /= c;
            }
            3 => {}
            _ => {
                // specializing one variable keeps the polynomial small
                let s = [x, y, z][rng.gen_range(0..3)];
                p = p.substitute(s, &Poly::constant(v[&s].clone()));
            }
        }
        assert_eq!(p.eval_rational(&v).unwrap(), shadow, "step {step}");
    }
}
