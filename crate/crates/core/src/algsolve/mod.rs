//! Exact solver for the polynomial systems produced by coefficient
//! collection: linear elimination, rational root isolation, case splits on
//! factors, and a lex Groebner fallback for small residual systems.

mod groebner;
mod ratfn;
mod roots;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::collect::AlgSystem;
use crate::symcore::{fmt_rational, Expr, Poly, Rational, Sym, SymKind};

pub use groebner::{groebner_lex, GbOutcome};
pub use ratfn::{homogenize, substitute_cleared, RatFn};
pub use roots::{from_coeffs, rational_roots};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("the system has no equations")]
    EmptySystem,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_depth: usize,
    pub max_branches: usize,
    pub timeout: Option<Duration>,
    /// Groebner fallback applies to at most this many unknowns.
    pub groebner_vars: usize,
    pub groebner_pairs: usize,
    /// Branches whose equations grow past this many terms are abandoned.
    pub max_terms: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_depth: 10,
            max_branches: 4096,
            timeout: None,
            groebner_vars: 6,
            groebner_pairs: 2000,
            max_terms: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFamily {
    /// Solved unknowns as rational functions of the free symbols.
    pub assignment: BTreeMap<Sym, RatFn>,
    pub free: Vec<Sym>,
    /// Polynomials in the free symbols assumed nonzero.
    pub side_conditions: Vec<Poly>,
    /// Case-split hypotheses along the branch, outermost first.
    pub provenance: Vec<String>,
}

impl SolutionFamily {
    pub fn value(&self, s: Sym) -> Expr {
        match self.assignment.get(&s) {
            Some(v) => v.to_expr(),
            None => Expr::Sym(s),
        }
    }

    /// Zero iff the family satisfies `eq` identically.
    pub fn residual(&self, eq: &Poly) -> RatFn {
        RatFn::poly(eq.clone()).substitute_all(&self.assignment)
    }

    /// `name = value` pairs sorted by name.
    pub fn key(&self) -> String {
        let mut parts: Vec<(String, String)> =
            self.assignment.iter().map(|(s, v)| (s.name(), v.to_string())).collect();
        parts.sort();
        let body: Vec<String> = parts.into_iter().map(|(a, b)| format!("{a} = {b}")).collect();
        body.join(", ")
    }

    /// Values at a point of the free symbols; `None` when a side condition or
    /// denominator vanishes there.
    pub fn instantiate(&self, free_values: &BTreeMap<Sym, Rational>) -> Option<BTreeMap<Sym, Rational>> {
        for c in &self.side_conditions {
            if c.eval_rational(free_values)?.is_zero() {
                return None;
            }
        }
        let mut out = free_values.clone();
        for (s, v) in &self.assignment {
            out.insert(*s, v.eval(free_values)?);
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// A branch reduced to this nonzero constant equation.
    Inconsistent { constant: Rational, provenance: Vec<String> },
    /// A univariate factor with no rational root.
    Irrational { factor: Poly, provenance: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unresolved {
    pub equations: Vec<Poly>,
    pub reason: String,
    pub provenance: Vec<String>,
}

/// Two families that differ only by the sign of some values, merged with a
/// symbol `eps` standing for `+1` (first family) or `-1` (second).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsPair {
    pub plus: usize,
    pub minus: usize,
    pub assignment: BTreeMap<Sym, Expr>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveOutcome {
    pub families: Vec<SolutionFamily>,
    /// False when the budget cut the search or some branch was unresolved.
    pub complete: bool,
    pub budget_exhausted: bool,
    pub unresolved: Vec<Unresolved>,
    pub certificates: Vec<Certificate>,
    pub eps_pairs: Vec<EpsPair>,
    pub branches: usize,
}

const MAX_CERTIFICATES: usize = 64;

#[derive(Clone, Debug)]
struct Node {
    eqs: Vec<Poly>,
    subs: Vec<(Sym, RatFn)>,
    nonzero: Vec<Poly>,
    depth: usize,
    gb_done: bool,
    trace: Vec<String>,
}

struct Solver<'a> {
    side_conditions: Vec<Poly>,
    rank: BTreeMap<Sym, usize>,
    unknowns: Vec<Sym>,
    budget: &'a Budget,
    start: Instant,
    out: SolveOutcome,
    stack: Vec<Node>,
}

enum Step {
    Continue,
    Branch(Vec<Node>),
    Dead(Certificate),
    Leaf,
    Stuck(String),
}

fn is_const_nonzero(p: &Poly) -> bool {
    p.as_constant().map(|c| !c.is_zero()).unwrap_or(false)
}

/// Splits a polynomial into its monomial variables and primitive rest.
fn nonzero_parts(p: &Poly) -> Vec<Poly> {
    let content = p.monomial_content();
    let mut out: Vec<Poly> = content.pairs().iter().filter(|(_, e)| *e > 0).map(|(s, _)| Poly::var(*s)).collect();
    let rest = p.mul_monomial(&content.inv()).primitive();
    if !rest.is_constant() {
        out.push(rest);
    }
    out
}

fn is_homogeneous(p: &Poly) -> bool {
    let mut degs = p.terms().map(|(m, _)| m.degree());
    match degs.next() {
        Some(d) => degs.all(|e| e == d),
        None => false,
    }
}

/// Remainder of `p` on division by `d` in the ring's monomial order: no
/// term of the result is a multiple of the leading term of `d`.
fn remainder(p: &Poly, d: &Poly) -> Poly {
    let Some((dm, dc)) = d.leading().map(|(m, c)| (m.clone(), c.clone())) else {
        return p.clone();
    };
    let mut rem = p.clone();
    let mut out = Poly::zero();
    while let Some((m, c)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
        let q = m.div(&dm);
        if q.has_negative() {
            rem = rem - Poly::term(m.clone(), c.clone());
            out.add_term(m, c);
        } else {
            rem = rem - d.mul_monomial(&q).scale(&(c / &dc));
        }
    }
    out
}

/// For a sum of even monomials with coefficients of one sign: `Err` if it
/// cannot vanish over the reals, otherwise the monomials that must vanish.
fn definite_split(p: &Poly, nonzero: &[Poly]) -> Option<Result<Vec<Poly>, ()>> {
    if p.len() < 2 {
        return None;
    }
    let sign = p.terms().next()?.1.is_positive();
    let definite = p
        .terms()
        .all(|(m, c)| c.is_positive() == sign && m.pairs().iter().all(|(_, e)| e % 2 == 0 && *e >= 0));
    if !definite {
        return None;
    }
    let mut parts = Vec::new();
    for (m, _) in p.terms() {
        if m.pairs().iter().all(|(s, _)| nonzero.contains(&Poly::var(*s))) {
            return Some(Err(()));
        }
        parts.push(Poly::term(m.clone(), Rational::one()));
    }
    Some(Ok(parts))
}

fn fmt_hyp(lhs: &str, op: &str, rhs: &str) -> String {
    format!("{lhs} {op} {rhs}")
}

impl<'a> Solver<'a> {
    fn rank_of(&self, s: Sym) -> (usize, u32) {
        (self.rank.get(&s).copied().unwrap_or(usize::MAX), s.index())
    }

    fn known_nonzero(&self, c: &Poly, nonzero: &[Poly]) -> bool {
        let mut r = c.clone();
        for _ in 0..64 {
            if is_const_nonzero(&r) {
                return true;
            }
            let mut progressed = false;
            for d in nonzero {
                if let Some(q) = r.exact_div(d) {
                    r = q;
                    progressed = true;
                    break;
                }
            }
            if !progressed {
                return false;
            }
        }
        false
    }

    fn strip_nonzero(&self, e: &Poly, nonzero: &[Poly]) -> Poly {
        let mut r = e.clone();
        for d in nonzero {
            while !r.is_zero() {
                match r.exact_div(d) {
                    Some(q) => r = q,
                    None => break,
                }
            }
        }
        r
    }

    fn normalize(&self, n: &mut Node) -> Result<(), Certificate> {
        let mut seen = BTreeSet::new();
        let mut eqs = Vec::new();
        for e in &n.eqs {
            let mut e = self.strip_nonzero(e, &n.nonzero).primitive();
            while e.len() > 1 {
                match e.sqrt() {
                    Some(r) => e = r.primitive(),
                    None => break,
                }
            }
            if e.is_zero() {
                continue;
            }
            if let Some(c) = e.as_constant() {
                return Err(Certificate::Inconsistent {
                    constant: c,
                    provenance: n.trace.clone(),
                });
            }
            match definite_split(&e, &n.nonzero) {
                Some(Err(())) => {
                    return Err(Certificate::Inconsistent {
                        constant: Rational::one(),
                        provenance: n.trace.clone(),
                    })
                }
                Some(Ok(parts)) => {
                    for q in parts {
                        if seen.insert(q.clone()) {
                            eqs.push(q);
                        }
                    }
                }
                None => {
                    if seen.insert(e.clone()) {
                        eqs.push(e);
                    }
                }
            }
        }
        eqs.sort_by(|a, b| (a.len(), a.total_degree(), a).cmp(&(b.len(), b.total_degree(), b)));
        n.eqs = eqs;
        Ok(())
    }

    /// Applies `x = v` to every part of the node; `None` when an assumed
    /// nonzero polynomial vanishes.
    fn assign(&self, n: &Node, x: Sym, v: &RatFn, hyp: Option<String>) -> Option<Node> {
        let mut nonzero = Vec::new();
        for p in &n.nonzero {
            let q = substitute_cleared(p, x, v);
            if q.is_zero() {
                return None;
            }
            for part in nonzero_parts(&q) {
                if !nonzero.contains(&part) {
                    nonzero.push(part);
                }
            }
        }
        // denominators of earlier values are products of nonzero entries
        if n.subs.iter().any(|(_, r)| substitute_cleared(&r.den, x, v).is_zero()) {
            return None;
        }
        let eqs = n.eqs.iter().map(|e| substitute_cleared(e, x, v)).collect();
        let mut subs: Vec<(Sym, RatFn)> = n.subs.iter().map(|(s, r)| (*s, r.substitute(x, v))).collect();
        subs.push((x, v.clone()));
        let mut trace = n.trace.clone();
        if let Some(h) = hyp {
            trace.push(h);
        }
        Some(Node {
            eqs,
            subs,
            nonzero,
            depth: n.depth,
            gb_done: false,
            trace,
        })
    }

    fn with_nonzero(&self, n: &Node, p: &Poly, hyp: String) -> Node {
        let mut m = n.clone();
        for part in nonzero_parts(p) {
            if !m.nonzero.contains(&part) {
                m.nonzero.push(part);
            }
        }
        m.trace.push(hyp);
        // only nonzero hypotheses count: every other branch removes an unknown
        // or adds an equation
        m.depth += 1;
        m
    }

    /// Adds `p = 0` and rewrites every equation to its remainder modulo `p`,
    /// so `p` no longer occurs as a coefficient.
    fn with_equation(&self, n: &Node, p: &Poly, hyp: String) -> Node {
        let mut m = n.clone();
        m.eqs = m.eqs.iter().map(|e| remainder(e, p)).collect();
        m.eqs.push(p.clone());
        m.trace.push(hyp);
        m.gb_done = false;
        m
    }

    /// Linear occurrences `c*x + r` with `c, r` free of `x`.
    fn linear_candidates(&self, n: &Node) -> Vec<(usize, Sym, Poly, Poly)> {
        let mut out = Vec::new();
        for (i, e) in n.eqs.iter().enumerate() {
            for x in e.vars() {
                if e.degree_in(x) == 1 && e.min_degree_in(x) >= 0 {
                    let by = e.coefficients_in(x);
                    let c = by.get(&1).cloned().unwrap_or_default();
                    let r = by.get(&0).cloned().unwrap_or_default();
                    out.push((i, x, c, r));
                }
            }
        }
        out
    }

    fn step(&mut self, n: &mut Node) -> Step {
        if let Err(c) = self.normalize(n) {
            return Step::Dead(c);
        }
        if n.eqs.is_empty() {
            return Step::Leaf;
        }
        if n.eqs.iter().any(|e| e.len() > self.budget.max_terms) {
            return Step::Stuck(format!("equations exceed {} terms", self.budget.max_terms));
        }
        let lin = self.linear_candidates(n);
        // constant pivot, then pivots made of known-nonzero factors
        let best = lin
            .iter()
            .filter(|(_, _, c, _)| is_const_nonzero(c))
            .min_by_key(|(i, x, _, _)| (self.rank_of(*x), n.eqs[*i].len()))
            .or_else(|| {
                lin.iter()
                    .filter(|(_, _, c, _)| self.known_nonzero(c, &n.nonzero))
                    .min_by_key(|(i, x, c, _)| (self.rank_of(*x), c.len(), n.eqs[*i].len()))
            });
        if let Some((_, x, c, r)) = best {
            let v = RatFn::new(-r.clone(), c.clone());
            return match self.assign(n, *x, &v, None) {
                Some(m) => {
                    *n = m;
                    Step::Continue
                }
                None => Step::Dead(Certificate::Inconsistent {
                    constant: Rational::zero(),
                    provenance: n.trace.clone(),
                }),
            };
        }
        // univariate equations
        if let Some(e) = n.eqs.iter().find(|e| e.vars().len() == 1).cloned() {
            let x = *e.vars().iter().next().unwrap();
            let (roots, cof) = rational_roots(&e, x);
            let mut children = Vec::new();
            for r in &roots {
                let v = RatFn::constant(r.clone());
                if let Some(m) = self.assign(n, x, &v, Some(fmt_hyp(&x.name(), "=", &fmt_rational(r)))) {
                    children.push(m);
                }
            }
            if cof.len() > 1 {
                let factor = from_coeffs(&cof, x).primitive();
                self.push_certificate(Certificate::Irrational {
                    factor: factor.clone(),
                    provenance: n.trace.clone(),
                });
                let mut rest = n.eqs.clone();
                rest.retain(|q| q != &e);
                rest.insert(0, factor);
                self.out.unresolved.push(Unresolved {
                    equations: rest,
                    reason: format!("no rational root for {x}"),
                    provenance: n.trace.clone(),
                });
                self.out.complete = false;
            }
            if children.len() == 1 && cof.len() <= 1 {
                let mut only = children.pop().unwrap();
                only.depth = n.depth;
                *n = only;
                return Step::Continue;
            }
            return Step::Branch(children);
        }
        // monomial factor x with x not yet known nonzero
        for e in &n.eqs {
            let content = e.monomial_content();
            let mut cands: Vec<Sym> = content
                .pairs()
                .iter()
                .filter(|(s, k)| *k > 0 && !n.nonzero.contains(&Poly::var(*s)))
                .map(|(s, _)| *s)
                .collect();
            cands.sort_by_key(|s| self.rank_of(*s));
            if let Some(&x) = cands.first() {
                let mut zero: Vec<Node> =
                    self.assign(n, x, &RatFn::poly(Poly::zero()), Some(fmt_hyp(&x.name(), "=", "0"))).into_iter().collect();
                zero.push(self.with_nonzero(n, &Poly::var(x), fmt_hyp(&x.name(), "!=", "0")));
                return Step::Branch(zero);
            }
        }
        // homogeneous in two unknowns: y = 0 or x = r*y for a rational r
        if let Some(e) = n.eqs.iter().find(|e| e.vars().len() == 2 && is_homogeneous(e)).cloned() {
            let mut xy: Vec<Sym> = e.vars().into_iter().collect();
            xy.sort_by_key(|s| self.rank_of(*s));
            let (x, y) = (xy[0], xy[1]);
            let (roots, _) = rational_roots(&e.substitute(y, &Poly::one()), x);
            let mut children = Vec::new();
            for r in &roots {
                let v = RatFn::poly(Poly::var(y).scale(r));
                if let Some(m) = self.assign(n, x, &v, Some(fmt_hyp(&x.name(), "=", &v.to_string()))) {
                    children.push(m);
                }
            }
            if let Some(m) = self.assign(n, y, &RatFn::poly(Poly::zero()), Some(fmt_hyp(&y.name(), "=", "0"))) {
                children.push(m);
            }
            return Step::Branch(children);
        }
        // quadratic with a perfect-square discriminant
        for e in n.eqs.clone() {
            let mut xs: Vec<Sym> = e.vars().into_iter().filter(|x| e.degree_in(*x) == 2 && e.min_degree_in(*x) >= 0).collect();
            xs.sort_by_key(|s| self.rank_of(*s));
            for x in xs {
                let by = e.coefficients_in(x);
                let a = by.get(&2).cloned().unwrap_or_default();
                let b = by.get(&1).cloned().unwrap_or_default();
                let c = by.get(&0).cloned().unwrap_or_default();
                if !self.known_nonzero(&a, &n.nonzero) {
                    continue;
                }
                let disc = &(&b * &b) - &(&a * &c).scale(&crate::symcore::int(4));
                let Some(s) = disc.sqrt() else { continue };
                let two_a = a.scale(&crate::symcore::int(2));
                let mut children = Vec::new();
                let mut vals = vec![RatFn::new(&-b.clone() + &s, two_a.clone())];
                if !s.is_zero() {
                    vals.push(RatFn::new(&-b.clone() - &s, two_a.clone()));
                }
                for v in vals {
                    if let Some(m) = self.assign(n, x, &v, Some(fmt_hyp(&x.name(), "=", &v.to_string()))) {
                            children.push(m);
                    }
                }
                return Step::Branch(children);
            }
        }
        // linear with an undetermined pivot: c != 0 or c = 0
        if let Some((_, x, c, _)) = lin
            .iter()
            .filter(|(_, _, c, _)| !c.is_zero())
            .min_by_key(|(i, x, c, _)| (c.len(), c.total_degree(), self.rank_of(*x), n.eqs[*i].len()))
        {
            let _ = x;
            let cs = c.primitive().to_string();
            return Step::Branch(vec![
                self.with_nonzero(n, c, fmt_hyp(&cs, "!=", "0")),
                self.with_equation(n, c, fmt_hyp(&cs, "=", "0")),
            ]);
        }
        // Groebner fallback
        if !n.gb_done {
            let mut vars: BTreeSet<Sym> = BTreeSet::new();
            for e in &n.eqs {
                vars.extend(e.vars());
            }
            if vars.len() <= self.budget.groebner_vars {
                let mut order: Vec<Sym> = vars.into_iter().collect();
                order.sort_by_key(|s| self.rank_of(*s));
                n.gb_done = true;
                match groebner_lex(&n.eqs, &order, self.budget.groebner_pairs) {
                    GbOutcome::Inconsistent => {
                        return Step::Dead(Certificate::Inconsistent {
                            constant: crate::symcore::int(1),
                            provenance: n.trace.clone(),
                        })
                    }
                    GbOutcome::Basis(b) => {
                        if b != n.eqs {
                            n.eqs = b;
                            let gb_done = true;
                            n.gb_done = gb_done;
                            return Step::Continue;
                        }
                    }
                    GbOutcome::Aborted => {}
                }
            }
        }
        Step::Stuck("no applicable elimination or split".into())
    }

    fn push_certificate(&mut self, c: Certificate) {
        if self.out.certificates.len() < MAX_CERTIFICATES {
            self.out.certificates.push(c);
        }
    }

    fn emit(&mut self, n: &Node, original: &[Poly]) {
        let assignment: BTreeMap<Sym, RatFn> = n.subs.iter().cloned().collect();
        let mut used: BTreeSet<Sym> = BTreeSet::new();
        for v in assignment.values() {
            used.extend(v.vars());
        }
        let mut free: Vec<Sym> = self.unknowns.iter().copied().filter(|s| !assignment.contains_key(s)).collect();
        for s in used {
            if !free.contains(&s) && !assignment.contains_key(&s) {
                free.push(s);
            }
        }
        // branch hypotheses are not kept: the assignment solves the system
        // identically, so it is valid wherever its denominators and the
        // system's own side conditions do not vanish
        let mut side_conditions: Vec<Poly> = Vec::new();
        let mut add = |p: &Poly| {
            for part in nonzero_parts(p) {
                if !side_conditions.contains(&part) {
                    side_conditions.push(part);
                }
            }
        };
        for v in assignment.values() {
            add(&v.den);
        }
        for c in &self.side_conditions {
            add(&RatFn::poly(c.clone()).substitute_all(&assignment).num);
        }
        side_conditions.sort();
        let fam = SolutionFamily {
            assignment,
            free,
            side_conditions,
            provenance: n.trace.clone(),
        };
        if original.iter().all(|e| fam.residual(e).is_zero()) {
            self.out.families.push(fam);
        } else {
            self.out.unresolved.push(Unresolved {
                equations: original.to_vec(),
                reason: "resubstitution check failed".into(),
                provenance: n.trace.clone(),
            });
            self.out.complete = false;
        }
    }

    fn run(&mut self, original: &[Poly]) {
        while let Some(mut n) = self.stack.pop() {
            if let Some(t) = self.budget.timeout {
                if self.start.elapsed() > t {
                    self.out.budget_exhausted = true;
                    self.out.complete = false;
                    self.out.unresolved.push(Unresolved {
                        equations: n.eqs.clone(),
                        reason: "timeout".into(),
                        provenance: n.trace.clone(),
                    });
                    continue;
                }
            }
            loop {
                match self.step(&mut n) {
                    Step::Continue => continue,
                    Step::Leaf => {
                        self.emit(&n, original);
                        break;
                    }
                    Step::Dead(c) => {
                        self.push_certificate(c);
                        break;
                    }
                    Step::Stuck(reason) => {
                        self.out.complete = false;
                        self.out.unresolved.push(Unresolved {
                            equations: n.eqs.clone(),
                            reason,
                            provenance: n.trace.clone(),
                        });
                        break;
                    }
                    Step::Branch(children) => {
                        let over_depth = children.iter().any(|c| c.depth > self.budget.max_depth);
                        let over_count = self.out.branches + children.len() > self.budget.max_branches;
                        if over_depth || over_count {
                            self.out.budget_exhausted = true;
                            self.out.complete = false;
                            self.out.unresolved.push(Unresolved {
                                equations: n.eqs.clone(),
                                reason: if over_depth { "depth limit" } else { "branch limit" }.into(),
                                provenance: n.trace.clone(),
                            });
                        } else {
                            self.out.branches += children.len();
                            for c in children.into_iter().rev() {
                                self.stack.push(c);
                            }
                        }
                        break;
                    }
                }
            }
        }
    }
}

/// Solves `s` within `budget`. Unknowns earlier in `s.unknowns` are
/// eliminated first; symbols not listed are solved for last.
pub fn solve_system(s: &AlgSystem, budget: &Budget) -> Result<SolveOutcome, SolveError> {
    if s.equations.is_empty() {
        return Err(SolveError::EmptySystem);
    }
    let mut unknowns = s.unknowns.clone();
    let mut extra: BTreeSet<Sym> = BTreeSet::new();
    for e in &s.equations {
        extra.extend(e.vars());
    }
    for x in extra {
        if !unknowns.contains(&x) {
            unknowns.push(x);
        }
    }
    let rank = unknowns.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut nonzero = Vec::new();
    for p in &s.side_conditions {
        for part in nonzero_parts(p) {
            if !nonzero.contains(&part) {
                nonzero.push(part);
            }
        }
    }
    let root = Node {
        eqs: s.equations.clone(),
        subs: Vec::new(),
        nonzero,
        depth: 0,
        gb_done: false,
        trace: Vec::new(),
    };
    let mut solver = Solver {
        side_conditions: s.side_conditions.clone(),
        rank,
        unknowns: s.unknowns.clone(),
        budget,
        start: Instant::now(),
        out: SolveOutcome {
            complete: true,
            ..Default::default()
        },
        stack: vec![root],
    };
    solver.run(&s.equations);
    let mut out = solver.out;
    let mut seen = BTreeSet::new();
    let mut fams: Vec<(String, SolutionFamily)> = Vec::new();
    for f in out.families {
        let k = f.key();
        if seen.insert(k.clone()) {
            fams.push((k, f));
        }
    }
    fams.sort_by(|a, b| a.0.cmp(&b.0));
    let fams: Vec<SolutionFamily> = fams.into_iter().map(|(_, f)| f).collect();
    out.families = fams
        .iter()
        .enumerate()
        .filter(|(i, b)| !fams.iter().enumerate().any(|(j, a)| j != *i && subsumes(a, b) && !(subsumes(b, a) && j > *i)))
        .map(|(_, f)| f.clone())
        .collect();
    out.eps_pairs = pair_sign_mirrors(&out.families);
    Ok(out)
}

/// True when every member of `b` is a member of `a`: `a` specialized at
/// `b`'s values reproduces `b`, with `a`'s denominators nonzero there.
pub fn subsumes(a: &SolutionFamily, b: &SolutionFamily) -> bool {
    if !b.free.iter().all(|s| a.free.contains(s)) {
        return false;
    }
    let point: BTreeMap<Sym, RatFn> = a
        .free
        .iter()
        .filter(|s| !b.free.contains(s))
        .map(|s| (*s, b.assignment.get(s).cloned().unwrap_or_else(|| RatFn::poly(Poly::var(*s)))))
        .collect();
    for (x, v) in &a.assignment {
        let Some(bv) = b.assignment.get(x) else {
            return false;
        };
        match v.try_substitute_all(&point) {
            Some(w) if &w == bv => {}
            _ => return false,
        }
    }
    b.assignment.keys().all(|x| a.assignment.contains_key(x) || a.free.contains(x))
}

pub fn eps_symbol() -> Sym {
    Sym::intern("eps", SymKind::FreeConstant)
}

/// Pairs families whose values agree up to sign in some entries.
pub fn pair_sign_mirrors(fams: &[SolutionFamily]) -> Vec<EpsPair> {
    let mut used = vec![false; fams.len()];
    let mut out = Vec::new();
    let eps = Expr::Sym(eps_symbol());
    for i in 0..fams.len() {
        if used[i] {
            continue;
        }
        for j in i + 1..fams.len() {
            if used[j] || fams[i].free != fams[j].free {
                continue;
            }
            let (f, g) = (&fams[i].assignment, &fams[j].assignment);
            if f.keys().ne(g.keys()) {
                continue;
            }
            let mut flips = 0;
            let mut ok = true;
            for (s, v) in f {
                let w = &g[s];
                if v == w {
                    continue;
                }
                if *w == v.neg() {
                    flips += 1;
                } else {
                    ok = false;
                    break;
                }
            }
            if ok && flips > 0 {
                let assignment = f
                    .iter()
                    .map(|(s, v)| {
                        let e = if g[s] == *v { v.to_expr() } else { Expr::mul(eps.clone(), v.to_expr()) };
                        (*s, e)
                    })
                    .collect();
                used[i] = true;
                used[j] = true;
                out.push(EpsPair {
                    plus: i,
                    minus: j,
                    assignment,
                });
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, rat};
    use num_traits::Signed;

    fn sym(n: &str) -> Sym {
        Sym::intern(n, SymKind::AnsatzCoeff)
    }

    fn system(eqs: Vec<Poly>, unknowns: &[Sym]) -> AlgSystem {
        AlgSystem {
            equations: eqs,
            unknowns: unknowns.to_vec(),
            side_conditions: vec![],
        }
    }

    #[test]
    fn logistic_constant() {
        let a = sym("sa0");
        let s = system(vec![Poly::var(a) - Poly::var(a).pow(2)], &[a]);
        let out = solve_system(&s, &Budget::default()).unwrap();
        let vals: Vec<Rational> = out.families.iter().map(|f| f.assignment[&a].as_constant().unwrap()).collect();
        assert_eq!(vals, vec![int(0), int(1)]);
        assert!(out.complete);
    }

    #[test]
    fn irrational_root_is_reported() {
        let x = sym("sx");
        let s = system(vec![Poly::var(x).pow(2) - Poly::int(2)], &[x]);
        let out = solve_system(&s, &Budget::default()).unwrap();
        assert!(out.families.is_empty());
        assert!(!out.complete);
        assert!(out.certificates.iter().any(|c| matches!(c, Certificate::Irrational { .. })));
    }

    #[test]
    fn inconsistent_system_gives_certificate() {
        let x = sym("sx");
        let s = system(vec![Poly::var(x) - Poly::one(), Poly::var(x) - Poly::int(2)], &[x]);
        let out = solve_system(&s, &Budget::default()).unwrap();
        assert!(out.families.is_empty());
        assert!(out.complete);
        assert!(matches!(out.certificates[0], Certificate::Inconsistent { .. }));
    }

    #[test]
    fn parametric_family_with_side_condition() {
        // b*x - 1 = 0 -> x = 1/b with b != 0
        let (x, b) = (sym("sx"), sym("sb"));
        let s = system(vec![&Poly::var(b) * &Poly::var(x) - Poly::one()], &[x, b]);
        let out = solve_system(&s, &Budget::default()).unwrap();
        assert_eq!(out.families.len(), 1);
        let f = &out.families[0];
        assert_eq!(f.assignment[&x], RatFn::new(Poly::one(), Poly::var(b)));
        assert_eq!(f.side_conditions, vec![Poly::var(b)]);
    }

    #[test]
    fn sign_mirrored_families_pair() {
        let (x, y) = (sym("sx"), sym("sy"));
        let s = system(
            vec![
                Poly::var(x).pow(2).scale(&int(16)) - Poly::one(),
                Poly::var(y) - Poly::var(x).scale(&int(2)),
            ],
            &[y, x],
        );
        let out = solve_system(&s, &Budget::default()).unwrap();
        assert_eq!(out.families.len(), 2);
        assert_eq!(out.eps_pairs.len(), 1);
        let e = &out.eps_pairs[0].assignment[&x];
        assert!(e.contains_sym(eps_symbol()));
        assert_eq!(out.families[0].assignment[&x].as_constant().unwrap().abs(), rat(1, 4));
    }

    #[test]
    fn empty_system_is_an_error() {
        assert_eq!(solve_system(&system(vec![], &[]), &Budget::default()), Err(SolveError::EmptySystem));
    }
}
