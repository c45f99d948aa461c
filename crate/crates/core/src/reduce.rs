//! Travelling-wave reduction `u(x) = v(xi)`, `xi = sum alpha_i x_i`.

use std::collections::BTreeMap;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::pdeparse::{latex_name, PdeSpec};
use crate::symcore::{fmt_rational, Expr, Monomial, Poly, Rational, Sym, SymKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("the reduced equation is a single monomial and is solvable by successive integration")]
    SolvableByQuadrature,
    #[error("the reduced equation vanishes identically")]
    Trivial,
}

/// One wave parameter per independent variable, plus the wave variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveSub {
    pub params: Vec<Sym>,
    pub wave_var: Sym,
}

impl WaveSub {
    /// `alpha, beta` for two variables (in the order t, x), `alpha` for one,
    /// `alpha1..alphan` otherwise.
    pub fn for_pde(p: &PdeSpec) -> WaveSub {
        let n = p.independents.len();
        let names: Vec<String> = match n {
            1 => vec!["alpha".into()],
            2 => vec!["alpha".into(), "beta".into()],
            _ => (1..=n).map(|i| format!("alpha{i}")).collect(),
        };
        WaveSub {
            params: names.iter().map(|s| Sym::intern(s, SymKind::WaveParam)).collect(),
            wave_var: wave_var(),
        }
    }

    pub fn param_for(&self, p: &PdeSpec, var: Sym) -> Option<Sym> {
        p.independents.iter().position(|&v| v == var).map(|i| self.params[i])
    }
}

pub fn wave_var() -> Sym {
    Sym::intern("xi", SymKind::IndependentVar)
}

pub fn ode_dependent() -> Sym {
    Sym::intern("v", SymKind::DependentVar)
}

/// `d^k v / dxi^k` as an atom (`v` itself for k = 0).
pub fn v_derivative(k: u32) -> Sym {
    if k == 0 {
        ode_dependent()
    } else {
        Sym::derivative(ode_dependent(), &[(wave_var(), k)])
    }
}

/// A polynomial ODE `lhs = 0` in `v` and its `xi`-derivatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSpec {
    pub dependent: Sym,
    pub variable: Sym,
    pub lhs: Poly,
    pub params: Vec<Sym>,
}

impl OdeSpec {
    pub fn lhs_expr(&self) -> Expr {
        Expr::from_poly(&self.lhs)
    }

    /// Order of the highest derivative present.
    pub fn order(&self) -> u32 {
        self.lhs
            .vars()
            .into_iter()
            .filter_map(|s| atom_order(self.dependent, s))
            .max()
            .unwrap_or(0)
    }

    /// Parses an ODE written with `D[v,xi,...]` atoms, as produced by `Display`.
    pub fn from_poly(lhs: Poly, params: Vec<Sym>) -> OdeSpec {
        OdeSpec {
            dependent: ode_dependent(),
            variable: wave_var(),
            lhs,
            params,
        }
    }

    /// `beta^2*v'' + ...` with primes up to third order and `v^(k)` beyond.
    pub fn render_text(&self) -> String {
        render(&self.lhs, self.dependent, false)
    }

    pub fn render_latex(&self) -> String {
        render(&self.lhs, self.dependent, true)
    }
}

impl std::fmt::Display for OdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = 0", self.lhs)
    }
}

/// Derivative order of `s` if it is `dep` or one of its derivative atoms.
pub fn atom_order(dep: Sym, s: Sym) -> Option<u32> {
    if s == dep {
        return Some(0);
    }
    s.deriv_info().filter(|d| d.base == dep).map(|d| d.total_order())
}

fn render(p: &Poly, dep: Sym, latex: bool) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        out.push_str(match (i, neg, latex) {
            (0, true, _) => "-",
            (0, false, _) => "",
            (_, true, false) => " - ",
            (_, false, false) => " + ",
            (_, true, true) => "-",
            (_, false, true) => "+",
        });
        let mut factors: Vec<String> = Vec::new();
        if !a.is_one() || m.is_one() {
            factors.push(if latex && !a.is_integer() {
                format!("\\frac{{{}}}{{{}}}", a.numer(), a.denom())
            } else {
                fmt_rational(&a)
            });
        }
        // parameters first, then v-atoms by increasing order
        let mut pairs: Vec<(Sym, i32)> = m.pairs().to_vec();
        pairs.sort_by_key(|(s, _)| (atom_order(dep, *s).map(|k| k + 1).unwrap_or(0), s.index()));
        for (s, e) in pairs {
            let name = match atom_order(dep, s) {
                Some(k) if latex => match k {
                    0 => "v".to_string(),
                    1 => "v_\\xi".to_string(),
                    2 => "v_{\\xi\\xi}".to_string(),
                    _ => format!("v_{{{k}\\xi}}"),
                },
                Some(k) => match k {
                    0..=3 => format!("v{}", "'".repeat(k as usize)),
                    _ => format!("v^({k})"),
                },
                None if latex => latex_name(s),
                None => s.name(),
            };
            let piece = match (e, latex) {
                (1, _) => name,
                (_, false) => format!("{name}^{e}"),
                (_, true) => format!("{name}^{{{e}}}"),
            };
            factors.push(piece);
        }
        out.push_str(&factors.join(if latex { " " } else { "*" }));
    }
    out
}

/// Applies the travelling-wave substitution to every derivative atom.
pub fn reduce_pde(p: &PdeSpec, w: &WaveSub) -> OdeSpec {
    let lhs = p.lhs.to_poly().expect("pde lhs is polynomial");
    let mut images: BTreeMap<Sym, Poly> = BTreeMap::new();
    for s in lhs.vars() {
        if s == p.dependent {
            images.insert(s, Poly::var(ode_dependent()));
            continue;
        }
        if let Some(d) = s.deriv_info().filter(|d| d.base == p.dependent) {
            let mut factor = Monomial::var(v_derivative(d.total_order()));
            for (var, n) in &d.orders {
                let alpha = w.param_for(p, *var).expect("derivative in a declared variable");
                factor = factor.mul(&Monomial::power(alpha, *n as i32));
            }
            images.insert(s, Poly::term(factor, Rational::one()));
        }
    }
    let mut out = Poly::zero();
    for (m, c) in lhs.terms() {
        let mut t = Poly::constant(c.clone());
        for &(s, e) in m.pairs() {
            let img = images.get(&s).cloned().unwrap_or_else(|| Poly::var(s));
            t = &t * &img.pow(e as u32);
        }
        out = out + t;
    }
    let mut params = p.params.clone();
    params.extend(w.params.iter().copied());
    OdeSpec::from_poly(out, params)
}

fn v_degree(dep: Sym, m: &Monomial) -> i32 {
    m.pairs()
        .iter()
        .filter(|(s, _)| atom_order(dep, *s).is_some())
        .map(|(_, e)| *e)
        .sum()
}

fn max_order(dep: Sym, m: &Monomial) -> Option<u32> {
    m.pairs().iter().filter_map(|(s, _)| atom_order(dep, *s)).max()
}

/// Orders the ODE monomials as `[M1, M2, rest...]`: `M1` carries the highest
/// derivative (lowest degree among those), `M2` is the strongest nonlinearity.
pub fn monomial_split(o: &OdeSpec) -> Result<Vec<Poly>, ReduceError> {
    let dep = o.dependent;
    let mut terms: Vec<(Monomial, Rational)> = o.lhs.terms().rev().map(|(m, c)| (m.clone(), c.clone())).collect();
    match terms.len() {
        0 => return Err(ReduceError::Trivial),
        1 => return Err(ReduceError::SolvableByQuadrature),
        _ => {}
    }
    let top = terms.iter().filter_map(|(m, _)| max_order(dep, m)).max().unwrap_or(0);
    let i1 = terms
        .iter()
        .enumerate()
        .filter(|(_, (m, _))| max_order(dep, m) == Some(top))
        .min_by_key(|(i, (m, _))| (v_degree(dep, m), *i))
        .map(|(i, _)| i)
        .unwrap();
    let m1 = terms.remove(i1);
    let key = |(i, (m, _)): &(usize, &(Monomial, Rational))| {
        (v_degree(dep, m), max_order(dep, m).map(|k| k as i64).unwrap_or(-1), -(*i as i64))
    };
    let nonlinear = terms.iter().enumerate().filter(|(_, (m, _))| v_degree(dep, m) >= 2).max_by_key(key);
    let i2 = match nonlinear {
        Some((i, _)) => i,
        None => terms.iter().enumerate().max_by_key(key).map(|(i, _)| i).unwrap(),
    };
    let m2 = terms.remove(i2);
    let mut out = vec![Poly::term(m1.0, m1.1), Poly::term(m2.0, m2.1)];
    out.extend(terms.into_iter().map(|(m, c)| Poly::term(m, c)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdeparse::parse_pde;

    fn ode_of(text: &str, params: &[&str]) -> OdeSpec {
        let p = parse_pde(text, params).unwrap();
        reduce_pde(&p, &WaveSub::for_pde(&p))
    }

    /// Expected ODE written in the ODE's own grammar (`xi` as the variable).
    fn expected(text: &str, params: &[&str]) -> Poly {
        let mut all: Vec<&str> = params.to_vec();
        all.extend(["alpha", "beta"]);
        parse_pde(&format!("{text} = 0"), &all).unwrap().lhs.to_poly().unwrap()
    }

    #[test]
    fn burgers_fisher() {
        let o = ode_of("u_xx + u*u_x - u_t + u - u^2 = 0", &[]);
        let e = expected("beta^2*D[v,xi,xi] + beta*v*D[v,xi] - alpha*D[v,xi] + v - v^2", &[]);
        assert_eq!(o.lhs, e);
    }

    #[test]
    fn linear_advection() {
        let o = ode_of("u_t + u_x = 0", &[]);
        assert_eq!(o.lhs, expected("(alpha + beta)*D[v,xi]", &[]));
        assert_eq!(o.render_text(), "alpha*v' + beta*v'");
    }

    #[test]
    fn split_burgers_fisher() {
        let o = ode_of("u_xx + u*u_x - u_t + u - u^2 = 0", &[]);
        let s = monomial_split(&o).unwrap();
        assert_eq!(s[0], expected("beta^2*D[v,xi,xi]", &[]));
        assert_eq!(s[1], expected("beta*v*D[v,xi]", &[]));
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn split_needs_two_monomials() {
        let o = ode_of("u_xx = 0", &[]);
        assert_eq!(monomial_split(&o), Err(ReduceError::SolvableByQuadrature));
    }

    #[test]
    fn three_variables_get_numbered_parameters() {
        let p = parse_pde("u_t + u_x + u_y = 0", &[]).unwrap();
        let w = WaveSub::for_pde(&p);
        assert_eq!(w.params.iter().map(|s| s.name()).collect::<Vec<_>>(), vec!["alpha1", "alpha2", "alpha3"]);
    }
}
