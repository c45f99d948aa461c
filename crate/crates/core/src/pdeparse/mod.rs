//! Text grammar for equations and closed-form solutions.
//!
//! ```text
//! equation := expr "=" "0"
//! expr     := term (("+" | "-") term)*
//! term     := factor (("*" | "/") factor)*
//! factor   := "-" factor | base ("^" ["-"] integer)?
//! base     := number | ident | deriv | call | "(" expr ")"
//! deriv    := ident "_" letters | "D[" ident ("," ident)+ "]"
//! call     := fname "(" expr ("," expr)* ")"
//! ```

mod lexer;
mod print;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::symcore::{Expr, Func, Rational, Sym, SymError, SymKind};
use lexer::{lex, Spanned, Tok};

pub use print::{latex_expr, latex_name};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {expected}, found {found}")]
    Syntax { pos: usize, expected: String, found: String },
    #[error("undeclared identifier '{name}' at {pos}")]
    Undeclared { name: String, pos: usize },
    #[error("unsupported equation: {0}")]
    Unsupported(String),
    #[error("non-autonomous equation: explicit occurrence of '{0}'")]
    NonAutonomous(String),
}

impl From<SymError> for ParseError {
    fn from(e: SymError) -> Self {
        ParseError::Unsupported(e.to_string())
    }
}

/// A polynomial autonomous PDE `lhs = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdeSpec {
    pub dependent: Sym,
    pub independents: Vec<Sym>,
    pub lhs: Expr,
    pub params: Vec<Sym>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Style {
    Ascii,
    Latex,
}

/// How identifiers resolve while parsing.
struct Scope {
    dependent: Option<(String, Sym)>,
    independents: Vec<(String, Sym)>,
    /// Independent variables may appear bare (solutions) or not (equations).
    bare_independents: bool,
    params: Vec<(String, Sym)>,
    allow_calls: bool,
    /// Undeclared identifiers become fresh symbols of this kind.
    auto_declare: Option<SymKind>,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    scope: &'a Scope,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == &Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.here(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Punct('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Punct('-') => {
                    self.bump();
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Punct('*') => {
                    self.bump();
                    let f = self.factor()?;
                    acc = Expr::mul(acc, f);
                }
                Tok::Punct('/') => {
                    let at = self.here();
                    self.bump();
                    let f = self.factor()?;
                    acc = Expr::div(acc, f).map_err(|_| ParseError::Syntax {
                        pos: at,
                        expected: "a nonzero divisor".into(),
                        found: "0".into(),
                    })?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Punct('-') {
            self.bump();
            return Ok(Expr::neg(self.factor()?));
        }
        let base = self.base()?;
        if self.peek() == &Tok::Punct('^') {
            self.bump();
            let e = self.exponent()?;
            return Expr::pow(base, e).map_err(ParseError::from);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.peek() == &Tok::Punct('(');
        if paren {
            self.bump();
        }
        let neg = if self.peek() == &Tok::Punct('-') {
            self.bump();
            true
        } else {
            false
        };
        let value = match self.peek().clone() {
            Tok::Num(r) if r.is_integer() => {
                self.bump();
                let v: i64 = r
                    .to_integer()
                    .try_into()
                    .map_err(|_| ParseError::Unsupported("exponent too large".into()))?;
                if neg {
                    -v
                } else {
                    v
                }
            }
            Tok::Num(_) => return Err(ParseError::Unsupported("rational exponents are not supported".into())),
            _ => return Err(self.error("an integer exponent")),
        };
        if paren {
            self.expect(')')?;
        }
        Ok(value)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Expr::Num(r))
            }
            Tok::Punct('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Deriv(base, letters) => {
                self.bump();
                let vars: Vec<String> = letters.chars().map(|c| c.to_string()).collect();
                self.derivative(&base, &vars, at)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "D" && self.peek() == &Tok::Punct('[') {
                    self.bump();
                    let base = self.ident_token("identifier")?;
                    let mut vars = Vec::new();
                    while self.peek() == &Tok::Punct(',') {
                        self.bump();
                        vars.push(self.ident_token("variable name")?);
                    }
                    if vars.is_empty() {
                        return Err(self.error("','"));
                    }
                    self.expect(']')?;
                    self.derivative(&base, &vars, at)
                } else if self.peek() == &Tok::Punct('(') {
                    self.call(&name, at)
                } else {
                    self.identifier(&name, at)
                }
            }
            _ => Err(self.error("a number, identifier or '('")),
        }
    }

    fn ident_token(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error(what)),
        }
    }

    fn identifier(&self, name: &str, at: usize) -> Result<Expr, ParseError> {
        let s = self.scope;
        if let Some((_, sym)) = s.dependent.as_ref().filter(|(n, _)| n == name) {
            return Ok(Expr::Sym(*sym));
        }
        if let Some((_, sym)) = s.params.iter().find(|(n, _)| n == name) {
            return Ok(Expr::Sym(*sym));
        }
        if let Some((_, sym)) = s.independents.iter().find(|(n, _)| n == name) {
            if s.bare_independents {
                return Ok(Expr::Sym(*sym));
            }
            return Err(ParseError::NonAutonomous(name.to_string()));
        }
        if let Some(kind) = s.auto_declare {
            return Ok(Expr::Sym(Sym::intern(name, kind)));
        }
        Err(ParseError::Undeclared {
            name: name.to_string(),
            pos: at,
        })
    }

    fn derivative(&self, base: &str, vars: &[String], at: usize) -> Result<Expr, ParseError> {
        let s = self.scope;
        let dep = match &s.dependent {
            Some((n, sym)) if n == base => *sym,
            _ => {
                return Err(ParseError::Undeclared {
                    name: format!("{base} (as a differentiated variable)"),
                    pos: at,
                })
            }
        };
        let mut orders: Vec<(Sym, u32)> = Vec::new();
        for v in vars {
            let sym = s
                .independents
                .iter()
                .find(|(n, _)| n == v)
                .map(|(_, sym)| *sym)
                .ok_or_else(|| ParseError::Undeclared { name: v.clone(), pos: at })?;
            match orders.iter_mut().find(|(w, _)| *w == sym) {
                Some(slot) => slot.1 += 1,
                None => orders.push((sym, 1)),
            }
        }
        Ok(Expr::Sym(Sym::derivative(dep, &orders)))
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        let func = Func::from_name(name);
        if !self.scope.allow_calls || func.is_none() {
            return Err(ParseError::Unsupported(format!("function call '{name}(...)' at {at}")));
        }
        let func = func.unwrap();
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.peek() == &Tok::Punct(',') {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(')')?;
        if args.len() != func.arity() {
            return Err(ParseError::Unsupported(format!(
                "{name} takes {} argument(s), got {}",
                func.arity(),
                args.len()
            )));
        }
        Ok(Expr::Apply(func, args))
    }
}

fn parse_with(src: &str, scope: &Scope, equation: bool) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, scope };
    let e = p.expr()?;
    if equation {
        p.expect('=')?;
        match p.peek().clone() {
            Tok::Num(r) if r == Rational::from_integer(0.into()) => {
                p.bump();
            }
            _ => return Err(p.error("'0' on the right-hand side")),
        }
    }
    if p.peek() != &Tok::End {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

/// Independent variables ordered with `t` first, then alphabetically.
fn order_independents(names: BTreeSet<String>) -> Vec<String> {
    let mut v: Vec<String> = names.into_iter().collect();
    v.sort_by(|a, b| (a != "t", a).cmp(&(b != "t", b)));
    v
}

/// Parses `expr = 0` into a validated autonomous polynomial PDE.
pub fn parse_pde(text: &str, declared_params: &[&str]) -> Result<PdeSpec, ParseError> {
    let toks = lex(text)?;
    let mut bases = BTreeSet::new();
    let mut vars = BTreeSet::new();
    let mut i = 0;
    while i < toks.len() {
        match &toks[i].0 {
            Tok::Deriv(b, letters) => {
                bases.insert(b.clone());
                vars.extend(letters.chars().map(|c| c.to_string()));
            }
            Tok::Ident(d) if d == "D" && toks.get(i + 1).map(|t| &t.0) == Some(&Tok::Punct('[')) => {
                let mut j = i + 2;
                if let Some((Tok::Ident(b), _)) = toks.get(j) {
                    bases.insert(b.clone());
                }
                j += 1;
                while let (Some((Tok::Punct(','), _)), Some((Tok::Ident(v), _))) = (toks.get(j), toks.get(j + 1)) {
                    vars.insert(v.clone());
                    j += 2;
                }
            }
            _ => {}
        }
        i += 1;
    }
    if bases.is_empty() {
        return Err(ParseError::Unsupported("no derivative of the dependent variable".into()));
    }
    if bases.len() > 1 {
        return Err(ParseError::Unsupported(format!(
            "systems are not supported (dependent variables {})",
            bases.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let dep_name = bases.into_iter().next().unwrap();
    if declared_params.contains(&dep_name.as_str()) {
        return Err(ParseError::Unsupported(format!("'{dep_name}' is both a parameter and the dependent variable")));
    }
    let indep_names = order_independents(vars);
    for v in &indep_names {
        if declared_params.contains(&v.as_str()) || *v == dep_name {
            return Err(ParseError::Unsupported(format!("'{v}' is used both as a variable and a symbol")));
        }
    }
    let dependent = Sym::intern(&dep_name, SymKind::DependentVar);
    let independents: Vec<(String, Sym)> = indep_names
        .iter()
        .map(|n| (n.clone(), Sym::intern(n, SymKind::IndependentVar)))
        .collect();
    let params: Vec<(String, Sym)> = declared_params
        .iter()
        .map(|n| (n.to_string(), Sym::intern(n, SymKind::FreeConstant)))
        .collect();
    let scope = Scope {
        dependent: Some((dep_name.clone(), dependent)),
        independents: independents.clone(),
        bare_independents: false,
        params: params.clone(),
        allow_calls: false,
        auto_declare: None,
    };
    let lhs = parse_with(text, &scope, true)?;
    check_polynomial(&lhs)?;
    Ok(PdeSpec {
        dependent,
        independents: independents.into_iter().map(|(_, s)| s).collect(),
        lhs,
        params: params.into_iter().map(|(_, s)| s).collect(),
    })
}

fn check_polynomial(e: &Expr) -> Result<(), ParseError> {
    let mut bad = None;
    e.walk(&mut |node| {
        if let Expr::Pow(b, k) = node {
            if *k < 0 && bad.is_none() {
                bad = Some(format!("negative power of {b}"));
            }
        }
    });
    match bad {
        Some(msg) => Err(ParseError::Unsupported(msg)),
        None => Ok(()),
    }
}

/// Parses a closed-form solution over the given independent variables,
/// with kernel calls allowed.
pub fn parse_solution(text: &str, independents: &[Sym], params: &[&str]) -> Result<Expr, ParseError> {
    let scope = Scope {
        dependent: None,
        independents: independents.iter().map(|s| (s.name(), *s)).collect(),
        bare_independents: true,
        params: params
            .iter()
            .map(|n| (n.to_string(), Sym::intern(n, SymKind::FreeConstant)))
            .collect(),
        allow_calls: true,
        auto_declare: None,
    };
    parse_with(text, &scope, false)
}

/// Parses a free-standing expression; unknown identifiers are created with
/// `kind`. Used for registry parameter values and side relations.
pub fn parse_value(text: &str, kind: SymKind) -> Result<Expr, ParseError> {
    let scope = Scope {
        dependent: None,
        independents: Vec::new(),
        bare_independents: true,
        params: Vec::new(),
        allow_calls: false,
        auto_declare: Some(kind),
    };
    parse_with(text, &scope, false)
}

/// Parses a side relation `name^2 = value` such as `s^2=13`.
pub fn parse_relation(text: &str, params: &[&str]) -> Result<(Sym, Expr), ParseError> {
    let (lhs, rhs) = text.split_once('=').ok_or_else(|| ParseError::Syntax {
        pos: text.len(),
        expected: "'='".into(),
        found: "end of input".into(),
    })?;
    let scope = Scope {
        dependent: None,
        independents: Vec::new(),
        bare_independents: true,
        params: params
            .iter()
            .map(|n| (n.to_string(), Sym::intern(n, SymKind::FreeConstant)))
            .collect(),
        allow_calls: false,
        auto_declare: Some(SymKind::FreeConstant),
    };
    let l = parse_with(lhs, &scope, false)?;
    let r = parse_with(rhs, &scope, false)?;
    match l {
        Expr::Pow(b, 2) => match *b {
            Expr::Sym(s) => Ok((s, r)),
            _ => Err(ParseError::Unsupported(format!("relation must have the form name^2 = value: {text}"))),
        },
        _ => Err(ParseError::Unsupported(format!("relation must have the form name^2 = value: {text}"))),
    }
}

/// Renders a PDE; the ascii form parses back to the same spec.
pub fn print_pde(p: &PdeSpec, style: Style) -> String {
    match style {
        Style::Ascii => format!("{} = 0", p.lhs),
        Style::Latex => format!("{}=0", latex_expr(&p.lhs)),
    }
}

impl PdeSpec {
    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|s| s.name()).collect()
    }

    pub fn derivative_atoms(&self) -> Vec<Sym> {
        let mut out: Vec<Sym> = self
            .lhs
            .syms()
            .into_iter()
            .filter(|s| s.deriv_info().is_some_and(|d| d.base == self.dependent))
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BF: &str = "u_xx + u*u_x - u_t + u - u^2 = 0";

    #[test]
    fn burgers_fisher_round_trip() {
        let p = parse_pde(BF, &[]).unwrap();
        assert_eq!(p.independents.iter().map(|s| s.name()).collect::<Vec<_>>(), vec!["t", "x"]);
        assert_eq!(print_pde(&p, Style::Ascii), BF);
        assert_eq!(parse_pde(&print_pde(&p, Style::Ascii), &[]).unwrap(), p);
    }

    #[test]
    fn kawahara_latex() {
        let p = parse_pde("u_t + 6*u*u_x + u_xxx - u_xxxxx = 0", &[]).unwrap();
        assert_eq!(print_pde(&p, Style::Latex), "u_t+6uu_x+u_{3x}-u_{5x}=0");
    }

    #[test]
    fn fkdv_with_params() {
        let p = parse_pde(
            "u_t + sigma*u^2*u_x + delta*u_x*u_xx + rho*u*u_xxx + u_xxxxx = 0",
            &["sigma", "delta", "rho"],
        )
        .unwrap();
        assert_eq!(p.params.len(), 3);
        assert_eq!(p.derivative_atoms().len(), 5);
    }

    #[test]
    fn rejects_explicit_independent() {
        assert_eq!(
            parse_pde("u_t + x*u_x = 0", &[]).unwrap_err(),
            ParseError::NonAutonomous("x".into())
        );
    }

    #[test]
    fn rejects_function_calls_and_unknown_names() {
        assert!(matches!(parse_pde("u_t + sin(u) = 0", &[]), Err(ParseError::Unsupported(_))));
        assert!(matches!(parse_pde("u_t + c*u_x = 0", &[]), Err(ParseError::Undeclared { .. })));
        assert!(matches!(parse_pde("u_t + u_x", &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_pde("u_t + u_x = 1", &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_pde("u*u_t^-1 = 0", &[]), Err(ParseError::Unsupported(_))));
    }

    #[test]
    fn bracket_alias_matches_subscripts() {
        let a = parse_pde("D[u,x,x,t] + u = 0", &[]).unwrap();
        let b = parse_pde("u_xxt + u = 0", &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn solution_and_relation() {
        let t = Sym::intern("t", SymKind::IndependentVar);
        let x = Sym::intern("x", SymKind::IndependentVar);
        let e = parse_solution("1/2 + eps/2*tanh(eps/2*t)", &[t, x], &["eps"]).unwrap();
        assert!(e.has_apply());
        let (s, v) = parse_relation("s^2=13", &[]).unwrap();
        assert_eq!(s.name(), "s");
        assert_eq!(v, Expr::int(13));
        assert!(parse_solution("sn(x)", &[t, x], &[]).is_err());
    }
}
