//! End-to-end derivation: reduction, balancing, ansatz, collection, solving,
//! assembly of closed forms and their verification.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algsolve::{eps_symbol, pair_sign_mirrors, solve_system, Budget, EpsPair, SolutionFamily, SolveError, SolveOutcome};
use crate::ansatz::{balance, build, AnsatzError, AnsatzShape, Balance};
use crate::auxreg::{parse_aux_spec, AuxError, AuxSystem, Realization};
use crate::collect::{extract_system, substitute_poly, AlgSystem, Reparam};
use crate::pdeparse::{parse_pde, ParseError, PdeSpec};
use crate::reduce::{reduce_pde, OdeSpec, WaveSub};
use crate::symcore::{Expr, Func, Poly, Sym, SymError};
use crate::verify::{verify_solution, ClosedFormSolution, Verdict, VerifyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// `name[:k=v,...]`.
    pub aux: String,
    /// Defaults to the number of kernels of the auxiliary system.
    pub arity: Option<usize>,
    /// Per-kernel orders; balancing is skipped when given.
    pub orders: Option<Vec<u32>>,
    pub max_order: u32,
    pub params: Vec<String>,
    pub budget: Budget,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            aux: "tanh".into(),
            arity: None,
            orders: None,
            max_order: 12,
            params: Vec::new(),
            budget: Budget::default(),
        }
    }
}

/// The parsed, reduced and auxiliary-resolved problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub pde: PdeSpec,
    pub wave: WaveSub,
    pub ode: OdeSpec,
    pub aux: AuxSystem,
    pub arity: usize,
}

impl Problem {
    pub fn new(equation: &str, cfg: &PipelineConfig) -> Result<Problem, PipelineError> {
        let declared: Vec<&str> = cfg.params.iter().map(String::as_str).collect();
        let pde = parse_pde(equation, &declared)?;
        let wave = WaveSub::for_pde(&pde);
        let ode = reduce_pde(&pde, &wave);
        let aux = parse_aux_spec(&cfg.aux)?;
        let arity = cfg.arity.unwrap_or_else(|| aux.arity());
        if arity != aux.arity() {
            return Err(AnsatzError::ArityMismatch { shape: arity, aux: aux.arity() }.into());
        }
        Ok(Problem { pde, wave, ode, aux, arity })
    }

    pub fn balance(&self, max_order: u32) -> Result<Balance, PipelineError> {
        Ok(balance(&self.ode, &self.aux, self.arity, max_order)?)
    }
}

/// A family with its closed form and verification result.
#[derive(Clone, Debug)]
pub struct AssembledFamily {
    pub family: SolutionFamily,
    pub solution: Expr,
    /// `None` when the kernels have no named realization.
    pub verdict: Option<Verdict>,
    pub verify_error: Option<String>,
}

/// Two families merged by `eps`, with `eps^2 = 1` adjoined when verifying.
#[derive(Clone, Debug)]
pub struct AssembledPair {
    pub pair: EpsPair,
    pub solution: Expr,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub problem: Problem,
    pub balance: Option<Balance>,
    pub shape: AnsatzShape,
    pub reparam: Reparam,
    pub system: AlgSystem,
    pub outcome: SolveOutcome,
    /// Families with every wave parameter zero, removed from `families`.
    pub static_dropped: usize,
    pub families: Vec<AssembledFamily>,
    pub pairs: Vec<AssembledPair>,
}

impl Derivation {
    pub fn complete(&self) -> bool {
        self.outcome.complete
    }

    pub fn budget_exhausted(&self) -> bool {
        self.outcome.budget_exhausted
    }
}

pub fn derive(equation: &str, cfg: &PipelineConfig) -> Result<Derivation, PipelineError> {
    let problem = Problem::new(equation, cfg)?;
    let (balance, shape) = match &cfg.orders {
        Some(orders) => (None, AnsatzShape::from_orders(problem.arity, orders)?),
        None => {
            let b = problem.balance(cfg.max_order)?;
            let s = b.shape.clone();
            (Some(b), s)
        }
    };
    let inst = build(&shape, &problem.aux)?;
    let reparam = Reparam::new(&inst, &problem.aux)?;
    let residual = substitute_poly(&problem.ode, &reparam.body, &problem.aux)?;
    let mut unknowns = reparam.effective.clone();
    unknowns.extend(problem.wave.params.iter().copied());
    let system = extract_system(&residual, &unknowns, &problem.aux);
    let outcome = if system.is_empty() {
        SolveOutcome {
            complete: true,
            ..SolveOutcome::default()
        }
    } else {
        solve_system(&system, &cfg.budget)?
    };

    let mut kept: Vec<SolutionFamily> = Vec::new();
    let mut static_dropped = 0;
    for f in &outcome.families {
        if is_static(f, &problem.wave) || is_unconstrained(f, &reparam) {
            static_dropped += 1;
        } else {
            kept.push(f.clone());
        }
    }
    kept.sort_by_key(|f| f.key());
    let eps_pairs = pair_sign_mirrors(&kept);

    let families = kept
        .iter()
        .map(|f| {
            let value = |s: Sym| f.value(s);
            let solution = assemble(&reparam.body, &problem, &value);
            let (verdict, verify_error) = check(&solution, &problem, side_conditions(f), &[]);
            AssembledFamily {
                family: f.clone(),
                solution,
                verdict,
                verify_error,
            }
        })
        .collect();
    let eps = eps_symbol();
    let pairs = eps_pairs
        .into_iter()
        .map(|pair| {
            let value = |s: Sym| pair.assignment.get(&s).cloned().unwrap_or(Expr::Sym(s));
            let solution = assemble(&reparam.body, &problem, &value);
            let rel = [(eps, Poly::one())];
            let (verdict, _) = check(&solution, &problem, side_conditions(&kept[pair.plus]), &rel);
            AssembledPair { pair, solution, verdict }
        })
        .collect();

    Ok(Derivation {
        problem,
        balance,
        shape,
        reparam,
        system,
        outcome,
        static_dropped,
        families,
        pairs,
    })
}

/// Every wave parameter is pinned to zero: the reduction collapses to a
/// constant-in-space-and-time equation and the "solution" is an artifact.
fn is_static(f: &SolutionFamily, w: &WaveSub) -> bool {
    w.params.iter().all(|p| f.assignment.get(p).map(|v| v.is_zero()).unwrap_or(false))
}

/// No ansatz coefficient is constrained, so the reduced equation vanished.
fn is_unconstrained(f: &SolutionFamily, rp: &Reparam) -> bool {
    rp.effective.iter().all(|w| f.free.contains(w))
}

fn side_conditions(f: &SolutionFamily) -> Vec<Poly> {
    let mut out: BTreeSet<Poly> = f.side_conditions.iter().cloned().collect();
    for v in f.assignment.values() {
        if v.den.as_constant().is_none() {
            out.insert(v.den.clone());
        }
    }
    out.into_iter().collect()
}

/// `u = sum over kernel monomials m of value(coefficient) * m(phase)`, in
/// descending kernel degree. Markers never survive in named realizations.
pub fn assemble(body: &Poly, p: &Problem, value: &dyn Fn(Sym) -> Expr) -> Expr {
    let phase = Expr::sum(
        p.wave
            .params
            .iter()
            .zip(&p.pde.independents)
            .map(|(a, x)| Expr::mul(value(*a), Expr::Sym(*x)))
            .collect(),
    );
    let (funcs, modulus) = match p.aux.realize() {
        Realization::Named { funcs, modulus } => (funcs.clone(), modulus.clone()),
        Realization::Opaque => (p.aux.kernels.iter().map(|k| Func::Kernel(*k)).collect(), None),
    };
    let kernel_of: BTreeMap<Sym, Expr> = p
        .aux
        .kernels
        .iter()
        .zip(&funcs)
        .map(|(k, f)| {
            let mut args = vec![phase.clone()];
            if f.arity() == 2 {
                args.push(modulus.clone().unwrap_or_else(Expr::one));
            }
            (*k, Expr::apply(*f, args))
        })
        .collect();
    let kernels: BTreeSet<Sym> = p.aux.kernels.iter().chain(&p.aux.markers).copied().collect();
    let mut grouped: BTreeMap<crate::symcore::Monomial, Poly> = BTreeMap::new();
    for (m, c) in body.terms() {
        let (k, rest) = m.split(|s| kernels.contains(&s));
        let e = grouped.entry(k).or_insert_with(Poly::zero);
        *e = e.clone() + Poly::term(rest, c.clone());
    }
    let mut items = Vec::new();
    for (m, c) in grouped.iter().rev() {
        let coeff = Expr::from_poly(c).rewrite(&|e| match e {
            Expr::Sym(s) => Some(value(*s)),
            _ => None,
        });
        let coeff = coeff.expand().unwrap_or(coeff);
        if coeff.is_zero() {
            continue;
        }
        let mut factors = vec![coeff];
        for &(s, e) in m.pairs() {
            let base = kernel_of.get(&s).cloned().unwrap_or(Expr::Sym(s));
            factors.push(Expr::pow(base, e as i64).expect("kernel powers are well defined"));
        }
        items.push(Expr::product(factors));
    }
    Expr::sum(items)
}

fn check(
    solution: &Expr,
    p: &Problem,
    side_conditions: Vec<Poly>,
    relations: &[(Sym, Poly)],
) -> (Option<Verdict>, Option<String>) {
    if matches!(p.aux.realize(), Realization::Opaque) {
        return (None, None);
    }
    let free_params = solution
        .syms()
        .into_iter()
        .filter(|s| !p.pde.independents.contains(s))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sol = ClosedFormSolution {
        expression: solution.clone(),
        independents: p.pde.independents.clone(),
        free_params,
        relations: relations.to_vec(),
        side_conditions,
    };
    match verify_solution(&sol, &p.pde) {
        Ok(r) => (Some(r.verdict), None),
        Err(e @ VerifyError::UnsupportedKernel(_)) => (None, Some(e.to_string())),
        Err(e) => (Some(Verdict::Nonzero), Some(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_equation_keeps_only_moving_families() {
        let cfg = PipelineConfig {
            orders: Some(vec![1]),
            ..PipelineConfig::default()
        };
        let d = derive("u_t + u_x = 0", &cfg).unwrap();
        assert!(d.complete());
        for f in &d.families {
            assert_eq!(f.verdict, Some(Verdict::Zero), "{}", f.solution);
        }
    }

    #[test]
    fn burgers_fisher_tanh_families_all_verify() {
        let d = derive("u_xx + u*u_x - u_t + u - u^2 = 0", &PipelineConfig::default()).unwrap();
        assert_eq!(d.balance.as_ref().unwrap().base, vec![1]);
        assert!(!d.families.is_empty());
        for f in &d.families {
            assert_eq!(f.verdict, Some(Verdict::Zero), "{}", f.solution);
        }
        for p in &d.pairs {
            assert_eq!(p.verdict, Some(Verdict::Zero), "{}", p.solution);
        }
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let cfg = PipelineConfig {
            arity: Some(2),
            ..PipelineConfig::default()
        };
        assert!(matches!(
            derive("u_t + u_x = 0", &cfg),
            Err(PipelineError::Ansatz(AnsatzError::ArityMismatch { .. }))
        ));
    }
}
