use std::collections::HashMap;

use proptest::prelude::*;

use fexpand_core::auxreg::{builtin, Realization, RuleKind, BUILTIN_NAMES};
use fexpand_core::symcore::{rat, Expr, Poly, Sym, SymKind};

fn params_for(name: &str, values: &[i64]) -> Vec<(String, Expr)> {
    let keys: &[&str] = match name {
        "gprime-over-g" => &["alpha", "beta"],
        "hprime-invh" => &["lambda", "mu"],
        "riccati" => &["alpha", "beta", "mu"],
        "jacobi-sn-cn-dn" => &["k"],
        _ => &[],
    };
    keys.iter()
        .zip(values)
        .map(|(k, v)| (k.to_string(), Expr::num(rat(*v, 3))))
        .collect()
}

proptest! {
    #[test]
    fn identities_differentiate_to_zero(values in prop::collection::vec(prop_oneof![-9i64..=-1, 1i64..=9], 3)) {
        for name in BUILTIN_NAMES {
            let aux = builtin(name, &params_for(name, &values)).unwrap();
            for r in aux.consistency_residuals() {
                prop_assert!(r.is_zero(), "{}: {}", name, r);
            }
        }
    }
}

#[test]
fn symbolic_parameters_are_consistent() {
    for name in BUILTIN_NAMES {
        let ps: Vec<(String, Expr)> = params_for(name, &[1, 1, 1])
            .into_iter()
            .map(|(k, _)| {
                let s = Sym::intern(&format!("q_{k}"), SymKind::Modulus);
                (k, Expr::Sym(s))
            })
            .collect();
        let aux = builtin(name, &ps).unwrap();
        assert!(aux.consistency_residuals().iter().all(Poly::is_zero), "{name}");
    }
}

/// Each explicit rule of a named realization agrees with a central
/// difference of the realizing function.
#[test]
fn named_realizations_satisfy_their_rules() {
    for name in BUILTIN_NAMES {
        // modulus 2/3 for the Jacobi system
        let aux = builtin(name, &params_for(name, &[2, 2, 2])).unwrap();
        let Realization::Named { funcs, .. } = aux.realize().clone() else { continue };
        let xi = Sym::intern("xi_probe", SymKind::FreeConstant);
        let value = |f: &fexpand_core::symcore::Func, at: f64| -> f64 {
            let mut args = vec![Expr::Sym(xi)];
            if f.arity() == 2 {
                args.push(Expr::num(rat(2, 3)));
            }
            let env: HashMap<Sym, f64> = [(xi, at)].into_iter().collect();
            Expr::apply(*f, args).eval_f64(&env).unwrap()
        };
        for at in [0.3, 0.7, 1.1] {
            let env: HashMap<Sym, f64> = aux.kernels.iter().zip(&funcs).map(|(s, f)| (*s, value(f, at))).collect();
            for (rule, f) in aux.rules.iter().zip(&funcs) {
                let h = 1e-5;
                let numeric = (value(f, at + h) - value(f, at - h)) / (2.0 * h);
                let symbolic = rule.rhs.eval_f64(&env).unwrap();
                let symbolic = match rule.kind {
                    RuleKind::Explicit => symbolic,
                    RuleKind::Quadratic => symbolic.sqrt().copysign(numeric),
                };
                assert!((numeric - symbolic).abs() < 1e-6, "{name} at {at}: {numeric} vs {symbolic}");
            }
        }
    }
}

#[test]
fn higher_derivatives_reduce_to_canonical_forms() {
    // tanh: F'' = 2F^3 - 2F, F''' = -6F^4 + 8F^2 - 2
    let aux = builtin("tanh", &[]).unwrap();
    let f = Poly::var(aux.kernels[0]);
    let two = rat(2, 1);
    assert_eq!(aux.kernel_derivative(0, 2), f.pow(3).scale(&two) - f.scale(&two));
    assert_eq!(
        aux.kernel_derivative(0, 3),
        f.pow(4).scale(&rat(-6, 1)) + f.pow(2).scale(&rat(8, 1)) - Poly::constant(two)
    );
}
