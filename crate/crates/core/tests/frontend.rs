use proptest::prelude::*;

use fexpand_core::auxreg::builtin;
use fexpand_core::ansatz::balance;
use fexpand_core::pdeparse::{parse_pde, print_pde, Style};
use fexpand_core::reduce::{reduce_pde, v_derivative, WaveSub};
use fexpand_core::symcore::{rat, Poly};

/// A derivative atom `u_{t^a x^b}`, written with its letters in order.
fn atom(a: u32, b: u32) -> String {
    if a + b == 0 {
        "u".into()
    } else {
        format!("u_{}{}", "t".repeat(a as usize), "x".repeat(b as usize))
    }
}

fn term() -> impl Strategy<Value = (i64, Vec<(u32, u32)>)> {
    (
        prop_oneof![-5i64..=-1, 1i64..=5],
        prop::collection::vec((0u32..=2, 0u32..=3), 1..=3),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Each atom `u_{t^a x^b}` maps to `alpha^a beta^b v^(a+b)`; the expected
    /// ODE is built from the generated terms without going through the parser.
    #[test]
    fn reduction_matches_termwise_chain_rule(terms in prop::collection::vec(term(), 1..=4)) {
        // a fixed term with a non-integer coefficient keeps both variables present
        let mut text = String::from("7/13*u*u_t*u_x");
        for (c, atoms) in &terms {
            let factors: Vec<String> = atoms.iter().map(|&(a, b)| atom(a, b)).collect();
            text.push_str(&format!(" + ({c})*{}", factors.join("*")));
        }
        text.push_str(" = 0");
        let p = parse_pde(&text, &[]).unwrap();
        let w = WaveSub::for_pde(&p);
        let t = p.independents.iter().copied().find(|s| s.name() == "t").unwrap();
        let x = p.independents.iter().copied().find(|s| s.name() == "x").unwrap();
        let (alpha, beta) = (Poly::var(w.param_for(&p, t).unwrap()), Poly::var(w.param_for(&p, x).unwrap()));

        let image = |a: u32, b: u32| &(&alpha.pow(a) * &beta.pow(b)) * &Poly::var(v_derivative(a + b));
        let mut expected = (&(&image(0, 0) * &image(1, 0)) * &image(0, 1)).scale(&rat(7, 13));
        for (c, atoms) in &terms {
            let mut m = Poly::int(*c);
            for &(a, b) in atoms {
                m = &m * &image(a, b);
            }
            expected = &expected + &m;
        }
        prop_assert_eq!(reduce_pde(&p, &w).lhs, expected);
    }

    /// Printing and reparsing a PDE gives back the same left-hand side.
    #[test]
    fn printed_equations_parse_back(terms in prop::collection::vec(term(), 1..=4)) {
        let mut text = String::from("u_t + u_x");
        for (c, atoms) in &terms {
            let factors: Vec<String> = atoms.iter().map(|&(a, b)| atom(a, b)).collect();
            text.push_str(&format!(" + ({c})*{}", factors.join("*")));
        }
        text.push_str(" = 0");
        let p = parse_pde(&text, &[]).unwrap();
        let again = parse_pde(&print_pde(&p, Style::Ascii), &[]).unwrap();
        prop_assert_eq!(again.lhs.to_poly().unwrap(), p.lhs.to_poly().unwrap());
    }
}

fn tanh_order(eq: &str, params: &[&str]) -> Vec<u32> {
    let p = parse_pde(eq, params).unwrap();
    let o = reduce_pde(&p, &WaveSub::for_pde(&p));
    let aux = builtin("tanh", &[]).unwrap();
    balance(&o, &aux, 1, 12).unwrap().base
}

#[test]
fn balance_orders_follow_the_leading_terms() {
    // u^2 against u'' gives 2m = m + 2
    assert_eq!(tanh_order("u_t + u*u_x + u_xxx = 0", &[]), vec![2]);
    assert_eq!(tanh_order("u_xx + u*u_x - u_t + u - u^2 = 0", &[]), vec![1]);
    // u*u' against the fifth derivative: 2m + 1 = m + 5
    assert_eq!(tanh_order("u_t + u*u_x + u_xxxxx = 0", &[]), vec![4]);
    // u^2*u' against the fifth derivative: 3m + 1 = m + 5
    assert_eq!(tanh_order("u_t + 5*u^2*u_x + 5*u_x*u_xx + 5*u*u_xxx + u_xxxxx = 0", &[]), vec![2]);
}

#[test]
fn symbolic_coefficients_survive_reduction() {
    let p = parse_pde("u_t + sigma*u*u_x + delta*u_xxx = 0", &["sigma", "delta"]).unwrap();
    let o = reduce_pde(&p, &WaveSub::for_pde(&p));
    assert_eq!(o.order(), 3);
    let text = o.render_text();
    assert!(text.contains("sigma") && text.contains("delta"), "{text}");
}

#[test]
fn malformed_equations_are_rejected() {
    for bad in ["u_t + ", "u_t + u_x", "u_t + sin(u) = 0", "u_t + u_q*k = 0"] {
        assert!(parse_pde(bad, &[]).is_err(), "{bad}");
    }
}
