use num_traits::{One, Signed};

use crate::symcore::{Expr, Func, Sym};

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa", "lambda", "mu", "nu", "xi", "rho",
    "sigma", "tau", "phi", "chi", "psi", "omega",
];

/// LaTeX rendering of a symbol name: greek letters become macros, trailing
/// digits become subscripts, derivative atoms use `u_{3x}`-style orders.
pub fn latex_name(s: Sym) -> String {
    if let Some(d) = s.deriv_info() {
        let mut sub = String::new();
        for (v, n) in &d.orders {
            let v = plain_name(&v.name());
            match n {
                1 => sub.push_str(&v),
                2 => {
                    sub.push_str(&v);
                    sub.push_str(&v);
                }
                _ => sub.push_str(&format!("{n}{v}")),
            }
        }
        let base = plain_name(&d.base.name());
        return if sub.chars().count() == 1 {
            format!("{base}_{sub}")
        } else {
            format!("{base}_{{{sub}}}")
        };
    }
    plain_name(&s.name())
}

fn plain_name(name: &str) -> String {
    if name == "eps" {
        return "\\epsilon".into();
    }
    if GREEK.contains(&name) {
        return format!("\\{name}");
    }
    let stem = name.trim_end_matches(|c: char| c.is_ascii_digit());
    if stem.len() < name.len() && !stem.is_empty() {
        let digits = &name[stem.len()..];
        let stem = plain_name(stem);
        return if digits.len() == 1 {
            format!("{stem}_{digits}")
        } else {
            format!("{stem}_{{{digits}}}")
        };
    }
    name.to_string()
}

fn is_negative_term(e: &Expr) -> bool {
    match e {
        Expr::Num(r) => r.is_negative(),
        Expr::Mul(v) => matches!(v.first(), Some(Expr::Num(r)) if r.is_negative()),
        _ => false,
    }
}

pub fn latex_expr(e: &Expr) -> String {
    match e {
        Expr::Num(r) => {
            if r.is_integer() {
                r.numer().to_string()
            } else if r.is_negative() {
                format!("-\\frac{{{}}}{{{}}}", -r.numer(), r.denom())
            } else {
                format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
            }
        }
        Expr::Sym(s) => latex_name(*s),
        Expr::Add(v) => {
            let mut out = String::new();
            for (i, t) in v.iter().enumerate() {
                if i == 0 {
                    out.push_str(&latex_expr(t));
                } else if is_negative_term(t) {
                    out.push('-');
                    out.push_str(&latex_expr(&Expr::neg(t.clone())));
                } else {
                    out.push('+');
                    out.push_str(&latex_expr(t));
                }
            }
            out
        }
        Expr::Mul(v) => {
            let mut out = String::new();
            let mut prev_macro = false;
            for (i, t) in v.iter().enumerate() {
                if i == 0 {
                    if let Expr::Num(r) = t {
                        if (-r).is_one() {
                            out.push('-');
                            continue;
                        }
                    }
                }
                let piece = match t {
                    Expr::Add(_) => format!("\\left({}\\right)", latex_expr(t)),
                    _ => latex_expr(t),
                };
                if prev_macro && piece.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    out.push(' ');
                }
                prev_macro = piece.starts_with('\\') && !piece.ends_with('}') && !piece.ends_with(')');
                out.push_str(&piece);
            }
            out
        }
        Expr::Pow(b, k) => {
            let base = match &**b {
                Expr::Sym(_) => latex_expr(b),
                Expr::Apply(..) => {
                    // tanh^2(x) style
                    if let Expr::Apply(f, args) = &**b {
                        return format!("{}^{{{k}}}\\left({}\\right)", func_macro(*f), args_latex(args));
                    }
                    unreachable!()
                }
                _ => format!("\\left({}\\right)", latex_expr(b)),
            };
            if (0..10).contains(k) {
                format!("{base}^{k}")
            } else {
                format!("{base}^{{{k}}}")
            }
        }
        Expr::Apply(f, args) => format!("{}\\left({}\\right)", func_macro(*f), args_latex(args)),
    }
}

fn func_macro(f: Func) -> String {
    match f {
        Func::Tanh | Func::Tan | Func::Exp | Func::Sinh | Func::Cosh | Func::Sin | Func::Cos => format!("\\{}", f.name()),
        Func::Sn | Func::Cn | Func::Dn => format!("\\mathrm{{{}}}", f.name()),
        Func::Kernel(s) => latex_name(s),
    }
}

fn args_latex(args: &[Expr]) -> String {
    args.iter().map(latex_expr).collect::<Vec<_>>().join(",")
}
