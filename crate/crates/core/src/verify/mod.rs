//! Exact certification of closed-form solutions by substitution into the PDE.
//!
//! Every kernel application `f(phase)` becomes a generator symbol whose
//! derivative along each independent variable is the phase slope times the
//! kernel rule. Sine/cosine, sinh/cosh and Jacobi triples share one phase and
//! are reduced modulo their quadratic identities; side relations such as
//! `s^2 = 13` are adjoined the same way.

mod corpus;
mod numeric;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::auxreg::{Derivation, SquareRules};
use crate::pdeparse::{parse_pde, parse_relation, parse_solution, ParseError, PdeSpec};
use crate::symcore::{Expr, Func, LaurentForm, Monomial, Poly, Sym, SymError, SymKind};

pub use corpus::{bundled, verify_corpus, CorpusSummary, Expect, Fixture, FixtureOutcome};
pub use numeric::{spot_check, SpotCheck, TERM_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("unsupported kernel '{0}'")]
    UnsupportedKernel(String),
    #[error("phase is not affine in the independent variables: {0}")]
    PhaseNotAffine(String),
    #[error("solution is not Laurent in its generators: {0}")]
    NotLaurent(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl From<SymError> for VerifyError {
    fn from(e: SymError) -> Self {
        VerifyError::NotLaurent(e.to_string())
    }
}

/// A candidate `u = expression` with kernels applied to affine phases.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormSolution {
    pub expression: Expr,
    pub independents: Vec<Sym>,
    pub free_params: Vec<Sym>,
    /// `sym^2 = value`, adjoined exactly.
    pub relations: Vec<(Sym, Poly)>,
    pub side_conditions: Vec<Poly>,
}

impl ClosedFormSolution {
    /// Parses solution text in the PDE grammar extended with kernel calls.
    pub fn parse(text: &str, pde: &PdeSpec, params: &[&str], relations: &[&str]) -> Result<Self, VerifyError> {
        let expression = parse_solution(text, &pde.independents, params)?;
        let mut rels = Vec::new();
        for r in relations {
            let (s, v) = parse_relation(r, params)?;
            rels.push((s, v.to_poly()?));
        }
        let free_params = params.iter().map(|n| Sym::intern(n, SymKind::FreeConstant)).collect();
        Ok(ClosedFormSolution {
            expression,
            independents: pde.independents.clone(),
            free_params,
            relations: rels,
            side_conditions: Vec::new(),
        })
    }
}

impl fmt::Display for ClosedFormSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expression)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Zero,
    Nonzero,
}

/// What one generator symbol stands for.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub sym: Sym,
    pub func: Func,
    pub phase: Poly,
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub verdict: Verdict,
    /// Cleared and reduced residual; empty iff the verdict is zero.
    pub residual: LaurentForm,
    /// Generator monomial the raw residual was multiplied by.
    pub cleared_by: Monomial,
    pub generators: Vec<Generator>,
    pub spot_check: SpotCheck,
}

impl ResidualReport {
    pub fn residual_poly(&self) -> Poly {
        self.residual.to_poly()
    }
}

/// Kernel families that share generators for one phase.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Family {
    Tanh,
    Tan,
    Exp,
    Hyperbolic,
    Circular,
    Jacobi,
}

fn family_of(f: Func) -> Result<Family, VerifyError> {
    Ok(match f {
        Func::Tanh => Family::Tanh,
        Func::Tan => Family::Tan,
        Func::Exp => Family::Exp,
        Func::Sinh | Func::Cosh => Family::Hyperbolic,
        Func::Sin | Func::Cos => Family::Circular,
        Func::Sn | Func::Cn | Func::Dn => Family::Jacobi,
        Func::Kernel(s) => return Err(VerifyError::UnsupportedKernel(s.name())),
    })
}

fn members(fam: Family) -> &'static [Func] {
    match fam {
        Family::Tanh => &[Func::Tanh],
        Family::Tan => &[Func::Tan],
        Family::Exp => &[Func::Exp],
        Family::Hyperbolic => &[Func::Cosh, Func::Sinh],
        Family::Circular => &[Func::Sin, Func::Cos],
        Family::Jacobi => &[Func::Sn, Func::Cn, Func::Dn],
    }
}

/// Generator table: one group per (family, phase, modulus).
struct Generators {
    groups: BTreeMap<(Family, Poly, Poly), Vec<Sym>>,
    list: Vec<Generator>,
}

impl Generators {
    fn new() -> Self {
        Generators {
            groups: BTreeMap::new(),
            list: Vec::new(),
        }
    }

    fn lookup(&mut self, f: Func, phase: Poly, modulus: Poly) -> Result<Sym, VerifyError> {
        let fam = family_of(f)?;
        let key = (fam, phase.clone(), modulus);
        if !self.groups.contains_key(&key) {
            let idx = self.groups.len();
            let syms: Vec<Sym> = members(fam)
                .iter()
                .map(|g| {
                    let s = Sym::intern(&format!("{}#{idx}", g.name()), SymKind::Kernel);
                    self.list.push(Generator {
                        sym: s,
                        func: *g,
                        phase: phase.clone(),
                    });
                    s
                })
                .collect();
            self.groups.insert(key.clone(), syms);
        }
        let pos = members(fam).iter().position(|g| *g == f).expect("member of its family");
        Ok(self.groups[&key][pos])
    }

    fn syms(&self) -> Vec<Sym> {
        self.list.iter().map(|g| g.sym).collect()
    }

    /// Derivative of each generator along `var`.
    fn derivation(&self, var: Sym) -> Derivation {
        let mut d = Derivation::new();
        d.set(var, Poly::one());
        for ((fam, phase, modulus), syms) in &self.groups {
            let slope = phase.diff(var);
            if slope.is_zero() {
                continue;
            }
            let v = |i: usize| Poly::var(syms[i]);
            let images: Vec<Poly> = match fam {
                Family::Tanh => vec![Poly::one() - v(0).pow(2)],
                Family::Tan => vec![Poly::one() + v(0).pow(2)],
                Family::Exp => vec![v(0)],
                Family::Hyperbolic => vec![v(1), v(0)],
                Family::Circular => vec![v(1), -v(0)],
                Family::Jacobi => vec![
                    &v(1) * &v(2),
                    -(&v(0) * &v(2)),
                    -(&(&modulus.pow(2) * &v(0)) * &v(1)),
                ],
            };
            for (s, img) in syms.iter().zip(images) {
                d.set(*s, &slope * &img);
            }
        }
        d
    }

    /// Quadratic identities among generators of one phase.
    fn identities(&self) -> SquareRules {
        let mut r = SquareRules::new();
        for ((fam, _, modulus), syms) in &self.groups {
            let v = |i: usize| Poly::var(syms[i]);
            match fam {
                // sinh^2 = cosh^2 - 1
                Family::Hyperbolic => r.insert(syms[1], v(0).pow(2) - Poly::one()),
                // cos^2 = 1 - sin^2
                Family::Circular => r.insert(syms[1], Poly::one() - v(0).pow(2)),
                Family::Jacobi => {
                    r.insert(syms[1], Poly::one() - v(0).pow(2));
                    r.insert(syms[2], Poly::one() - &modulus.pow(2) * &v(0).pow(2));
                }
                _ => {}
            }
        }
        r
    }
}

fn check_affine(phase: &Poly, independents: &[Sym]) -> Result<(), VerifyError> {
    for (m, _) in phase.terms() {
        let d: i32 = m
            .pairs()
            .iter()
            .filter(|(s, _)| independents.contains(s))
            .map(|(_, e)| *e)
            .sum();
        let negative = m.pairs().iter().any(|(s, e)| independents.contains(s) && *e < 0);
        if d > 1 || negative {
            return Err(VerifyError::PhaseNotAffine(phase.to_string()));
        }
    }
    Ok(())
}

/// `num / den` with `den` free of generators, so that derivatives act on
/// `num` alone.
struct Frac {
    num: Poly,
    den: Poly,
}

impl Frac {
    fn poly(p: Poly) -> Frac {
        Frac { num: p, den: Poly::one() }
    }
}

/// Replaces kernel applications by generators; the numerator is Laurent in
/// the generators.
fn to_generators(e: &Expr, independents: &[Sym], gens: &mut Generators) -> Result<Frac, VerifyError> {
    Ok(match e {
        Expr::Num(r) => Frac::poly(Poly::constant(r.clone())),
        Expr::Sym(s) => Frac::poly(Poly::var(*s)),
        Expr::Add(v) => {
            let mut acc = Frac::poly(Poly::zero());
            for t in v {
                let f = to_generators(t, independents, gens)?;
                if f.den == acc.den {
                    acc.num = acc.num + f.num;
                } else {
                    acc = Frac {
                        num: &acc.num * &f.den + &f.num * &acc.den,
                        den: &acc.den * &f.den,
                    };
                }
            }
            acc
        }
        Expr::Mul(v) => {
            let mut acc = Frac::poly(Poly::one());
            for t in v {
                let f = to_generators(t, independents, gens)?;
                acc = Frac {
                    num: &acc.num * &f.num,
                    den: &acc.den * &f.den,
                };
            }
            acc
        }
        Expr::Pow(b, k) => {
            let f = to_generators(b, independents, gens)?;
            let k = *k as i32;
            if k >= 0 {
                Frac {
                    num: f.num.pow(k as u32),
                    den: f.den.pow(k as u32),
                }
            } else if f.num.is_free_of(&gens.syms()) {
                Frac {
                    num: f.den.pow((-k) as u32),
                    den: f.num.pow((-k) as u32),
                }
            } else {
                let inv = f
                    .num
                    .pow_signed(k)
                    .ok_or_else(|| VerifyError::NotLaurent(format!("negative power of a sum: {e}")))?;
                Frac {
                    num: &inv * &f.den.pow((-k) as u32),
                    den: Poly::one(),
                }
            }
        }
        Expr::Apply(f, args) => {
            let phase = args[0].to_poly().map_err(|_| VerifyError::PhaseNotAffine(args[0].to_string()))?;
            check_affine(&phase, independents)?;
            let modulus = match args.get(1) {
                Some(k) => k.to_poly()?,
                None => Poly::zero(),
            };
            Frac::poly(Poly::var(gens.lookup(*f, phase, modulus)?))
        }
    })
}

/// All partial derivatives of `u` needed by the PDE, keyed by multi-index.
fn derivative_images(
    u: &Poly,
    pde: &PdeSpec,
    derivs: &BTreeMap<Sym, Derivation>,
    rules: &SquareRules,
) -> BTreeMap<Sym, Poly> {
    let mut memo: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
    memo.insert(vec![0; pde.independents.len()], u.clone());
    let mut out = BTreeMap::new();
    out.insert(pde.dependent, u.clone());
    for atom in pde.derivative_atoms() {
        let info = atom.deriv_info().expect("derivative atom");
        let target: Vec<u32> = pde.independents.iter().map(|&v| info.order_in(v)).collect();
        // walk from the zero index, one variable at a time
        let mut idx = vec![0u32; target.len()];
        for (i, &var) in pde.independents.iter().enumerate() {
            while idx[i] < target[i] {
                let prev = memo[&idx].clone();
                idx[i] += 1;
                if !memo.contains_key(&idx) {
                    let next = rules.reduce(&derivs[&var].apply(&prev));
                    memo.insert(idx.clone(), next);
                }
            }
        }
        out.insert(atom, memo[&target].clone());
    }
    out
}

/// `lhs` at the atom images, times `den^d` with `d` the largest degree in
/// the atoms, so that every term is polynomial in `den`.
fn homogenized_lhs(lhs: &Poly, images: &BTreeMap<Sym, Poly>, den: &Poly) -> Poly {
    let degree = |m: &Monomial| -> i32 { m.pairs().iter().filter(|(s, _)| images.contains_key(s)).map(|(_, e)| *e).sum() };
    let top = lhs.terms().map(|(m, _)| degree(m)).max().unwrap_or(0);
    let mut out = Poly::zero();
    for (m, c) in lhs.terms() {
        let mut t = Poly::constant(c.clone());
        for &(s, e) in m.pairs() {
            t = match images.get(&s) {
                Some(img) => &t * &img.pow(e as u32),
                None => t.mul_monomial(&Monomial::power(s, e)),
            };
        }
        out = out + &t * &den.pow((top - degree(m)) as u32);
    }
    out
}

/// Multiplies by the smallest monomial in `syms` that removes every
/// negative exponent of those symbols.
fn clear(p: &Poly, syms: &[Sym]) -> (Poly, Monomial) {
    let t = Monomial::from_pairs(syms.iter().filter_map(|&s| {
        let lo = p.min_degree_in(s);
        (lo < 0).then_some((s, -lo))
    }));
    (p.mul_monomial(&t), t)
}

/// Exact residual of `pde.lhs` at `u = sol`, treating free parameters as
/// indeterminates.
pub fn verify_solution(sol: &ClosedFormSolution, pde: &PdeSpec) -> Result<ResidualReport, VerifyError> {
    let mut gens = Generators::new();
    let u = to_generators(&sol.expression, &sol.independents, &mut gens)?;
    if u.den.is_zero() {
        return Err(VerifyError::NotLaurent("zero denominator".into()));
    }
    let mut rules = gens.identities();
    for (s, v) in &sol.relations {
        rules.insert(*s, v.clone());
    }
    let derivs: BTreeMap<Sym, Derivation> = pde.independents.iter().map(|&v| (v, gens.derivation(v))).collect();
    let images = derivative_images(&u.num, pde, &derivs, &rules);
    let raw = homogenized_lhs(&pde.lhs.to_poly()?, &images, &u.den);
    let mut clearing = gens.syms();
    clearing.extend(sol.relations.iter().map(|(s, _)| *s));
    let (cleared, t) = clear(&raw, &clearing);
    let reduced = rules.reduce(&cleared);
    let verdict = if reduced.is_zero() { Verdict::Zero } else { Verdict::Nonzero };
    let residual = LaurentForm::from_poly(&reduced, &gens.syms(), &[])?;
    let spot = spot_check(sol, pde, 32, 0x5eed);
    Ok(ResidualReport {
        verdict,
        residual,
        cleared_by: t,
        generators: gens.list,
        spot_check: spot,
    })
}

/// Parses an equation and a solution and verifies in one step.
pub fn verify_text(
    equation: &str,
    solution: &str,
    params: &[&str],
    relations: &[&str],
) -> Result<ResidualReport, VerifyError> {
    let eq_params: Vec<&str> = params.to_vec();
    let pde = parse_pde(equation, &declared_in(equation, &eq_params))?;
    let sol = ClosedFormSolution::parse(solution, &pde, params, relations)?;
    verify_solution(&sol, &pde)
}

/// The subset of `params` that occur as identifiers in `text`.
pub(crate) fn declared_in<'a>(text: &str, params: &[&'a str]) -> Vec<&'a str> {
    let words: Vec<&str> = text
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    params.iter().copied().filter(|p| words.contains(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BF: &str = "u_xx + u*u_x - u_t + u - u^2 = 0";

    fn verdict(eq: &str, sol: &str, params: &[&str], rels: &[&str]) -> Verdict {
        verify_text(eq, sol, params, rels).unwrap().verdict
    }

    #[test]
    fn constant_one_solves_burgers_fisher() {
        assert_eq!(verdict(BF, "1", &[], &[]), Verdict::Zero);
    }

    #[test]
    fn symbolic_sign_branch() {
        let sol = "1/2 + eps/2*tanh(eps/2*t)";
        assert_eq!(verdict(BF, sol, &["eps"], &["eps^2=1"]), Verdict::Zero);
        assert_eq!(verdict(BF, "1/2 + 1/2*tanh(1/2*t)", &[], &[]), Verdict::Zero);
    }

    #[test]
    fn tanh_of_x_is_not_a_solution() {
        let r = verify_text(BF, "tanh(x)", &[], &[]).unwrap();
        assert_eq!(r.verdict, Verdict::Nonzero);
        // direct substitution: u = T, u_x = 1 - T^2, u_xx = -2T + 2T^3, u_t = 0
        // -> -2T + 2T^3 + T - T^3 + T - T^2 = T^3 - T^2
        let t = r.generators[0].sym;
        assert_eq!(r.residual_poly(), Poly::var(t).pow(3) - Poly::var(t).pow(2));
    }

    #[test]
    fn hyperbolic_pair_with_free_amplitude() {
        assert_eq!(verdict(BF, "a*(sinh(2*t + x) + cosh(2*t + x))", &["a"], &[]), Verdict::Zero);
    }

    #[test]
    fn quadratic_extension() {
        let eq = "u_t - u_xx = 0";
        // u_t = 13u and u_xx = s^2 u = 13u
        assert_eq!(verdict(eq, "exp(s*x + 13*t)", &["s"], &["s^2=13"]), Verdict::Zero);
        assert_eq!(verdict(eq, "exp(s*x + 12*t)", &["s"], &["s^2=13"]), Verdict::Nonzero);
    }

    #[test]
    fn parameter_denominators() {
        // u = 1/(2*a) * tanh(x) + ... is not a solution, but 1/(1 + a) - ... cancels
        let eq = "u_t - u_x = 0";
        assert_eq!(verdict(eq, "tanh(t + x)/(1 + a)", &["a"], &[]), Verdict::Zero);
        assert_eq!(verdict(eq, "tanh(t + a*x)/(1 + a)", &["a"], &[]), Verdict::Nonzero);
    }

    #[test]
    fn nonaffine_phase_is_rejected() {
        let e = verify_text(BF, "tanh(x^2)", &[], &[]).unwrap_err();
        assert!(matches!(e, VerifyError::PhaseNotAffine(_)));
    }

    #[test]
    fn jacobi_triple_reduces() {
        // u = sn(x, k): u_xx = -(1 + k^2) u + 2 k^2 u^3
        let eq = "u_xx + (1 + k^2)*u - 2*k^2*u^3 = 0";
        assert_eq!(verdict(eq, "sn(x, k)", &["k"], &[]), Verdict::Zero);
        assert_eq!(verdict(eq, "cn(x, k)", &["k"], &[]), Verdict::Nonzero);
    }
}
