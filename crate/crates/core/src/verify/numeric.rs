use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClosedFormSolution;
use crate::pdeparse::PdeSpec;
use crate::symcore::{Expr, Poly, Sym};

/// Double-precision samples of `|lhs|`; diagnostic only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpotCheck {
    pub samples: Vec<f64>,
    /// Points skipped near kernel zeros, with vanishing side conditions, or
    /// where a single PDE term exceeds [`TERM_CAP`].
    pub rejected: usize,
}

impl SpotCheck {
    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

/// Largest admissible magnitude of one PDE term at a sample. Above it,
/// cancellation between terms leaves more than 1e-11 of rounding noise.
pub const TERM_CAP: f64 = 1e5;

fn applications(e: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    e.walk(&mut |n| {
        if matches!(n, Expr::Apply(..)) && !out.contains(n) {
            out.push(n.clone());
        }
    });
    out
}

/// Evaluates the PDE at `u = sol` through formal expression derivatives,
/// independent of the generator rewriting used by the exact check.
pub fn spot_check(sol: &ClosedFormSolution, pde: &PdeSpec, n: usize, seed: u64) -> SpotCheck {
    let mut derivs: BTreeMap<Vec<u32>, Expr> = BTreeMap::new();
    derivs.insert(vec![0; pde.independents.len()], sol.expression.clone());
    let mut atoms: Vec<(Sym, Vec<u32>)> = vec![(pde.dependent, vec![0; pde.independents.len()])];
    for atom in pde.derivative_atoms() {
        let info = atom.deriv_info().expect("derivative atom");
        let target: Vec<u32> = pde.independents.iter().map(|&v| info.order_in(v)).collect();
        let mut idx = vec![0u32; target.len()];
        for (i, &var) in pde.independents.iter().enumerate() {
            while idx[i] < target[i] {
                let prev = derivs[&idx].clone();
                idx[i] += 1;
                derivs.entry(idx.clone()).or_insert_with(|| prev.differentiate(var));
            }
        }
        atoms.push((atom, target));
    }
    let relation_syms: Vec<Sym> = sol.relations.iter().map(|(s, _)| *s).collect();
    let mut constants: Vec<Sym> = Vec::new();
    for s in sol.expression.syms().into_iter().chain(pde.lhs.syms()).chain(sol.free_params.iter().copied()) {
        let skip = pde.independents.contains(&s)
            || s == pde.dependent
            || s.deriv_info().is_some_and(|d| d.base == pde.dependent)
            || relation_syms.contains(&s);
        if !skip && !constants.contains(&s) {
            constants.push(s);
        }
    }
    let apps = applications(&sol.expression);
    let lhs_terms: Vec<Poly> = match pde.lhs.to_poly() {
        Ok(p) => p.terms().map(|(m, c)| Poly::term(m.clone(), c.clone())).collect(),
        Err(_) => return SpotCheck::default(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SpotCheck::default();
    let mut attempts = 0;
    while out.samples.len() < n && attempts < n * 50 {
        attempts += 1;
        let mut env: HashMap<Sym, f64> = HashMap::new();
        for &v in &pde.independents {
            env.insert(v, rng.gen_range(-2.0..2.0));
        }
        for &c in &constants {
            env.insert(c, rng.gen_range(0.25..0.75));
        }
        let mut ok = true;
        for (s, v) in &sol.relations {
            match v.eval_f64(&env) {
                Some(r) if r >= 0.0 => {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    env.insert(*s, sign * r.sqrt());
                }
                _ => ok = false,
            }
        }
        ok &= sol.side_conditions.iter().all(|c| c.eval_f64(&env).is_some_and(|v| v.abs() > 1e-6));
        ok &= apps.iter().all(|a| a.eval_f64(&env).is_some_and(|v| v.is_finite() && v.abs() >= 1e-3));
        if !ok {
            out.rejected += 1;
            continue;
        }
        for (atom, idx) in &atoms {
            match derivs[idx].eval_f64(&env) {
                Some(v) => {
                    env.insert(*atom, v);
                }
                None => ok = false,
            }
        }
        let mut sum = 0.0;
        for term in &lhs_terms {
            match term.eval_f64(&env) {
                Some(v) if v.is_finite() && v.abs() <= TERM_CAP => sum += v,
                _ => ok = false,
            }
        }
        if ok {
            out.samples.push(sum.abs());
        } else {
            out.rejected += 1;
        }
    }
    out
}
