//! Substitution of an ansatz into a reduced ODE, canonicalization modulo the
//! auxiliary rules, denominator clearing and coefficient extraction.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::ansatz::AnsatzInstance;
use crate::auxreg::AuxSystem;
use crate::reduce::{atom_order, OdeSpec};
use crate::symcore::{LaurentForm, LaurentKey, Monomial, Poly, Rational, Sym, SymError};

/// `Q = (1/T) * sum over marker subsets of (marker product) * component`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualDecomposition {
    /// Cleared numerator: all kernel exponents are nonnegative.
    pub form: LaurentForm,
    /// Per-kernel exponent of `T`.
    pub t_exps: Vec<i32>,
}

impl ResidualDecomposition {
    pub fn is_zero(&self) -> bool {
        self.form.is_zero()
    }

    /// Components grouped by marker mask.
    pub fn components(&self) -> BTreeMap<u8, Vec<(&LaurentKey, &Poly)>> {
        let mut out: BTreeMap<u8, Vec<(&LaurentKey, &Poly)>> = BTreeMap::new();
        for (k, c) in &self.form.terms {
            out.entry(k.markers).or_default().push((k, c));
        }
        out
    }

    /// `T` as a kernel monomial.
    pub fn t_monomial(&self) -> Monomial {
        Monomial::from_pairs(self.form.kernels.iter().copied().zip(self.t_exps.iter().copied()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgSystem {
    pub equations: Vec<Poly>,
    pub unknowns: Vec<Sym>,
    pub side_conditions: Vec<Poly>,
}

impl AlgSystem {
    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }
}

/// `v, v', ..., v^(order)`, each reduced to canonical form.
pub fn derivative_tower(v: &Poly, aux: &AuxSystem, order: u32) -> Vec<Poly> {
    let d = aux.derivation();
    let mut out = vec![aux.reduce_poly(v)];
    for k in 1..=order as usize {
        let next = aux.canonical(&d.apply(&out[k - 1]));
        out.push(next);
    }
    out
}

/// One ODE monomial evaluated on a derivative tower, before clearing `T`.
pub fn expand_monomial(m: &Monomial, c: &Rational, dep: Sym, tower: &[Poly], aux: &AuxSystem) -> Poly {
    let mut acc = Poly::constant(c.clone());
    let mut factors: Vec<(u32, i32)> = Vec::new();
    let mut rest = Vec::new();
    for &(s, e) in m.pairs() {
        match atom_order(dep, s) {
            Some(k) => factors.push((k, e)),
            None => rest.push((s, e)),
        }
    }
    acc = acc.mul_monomial(&Monomial::from_pairs(rest));
    // higher derivatives first: they have fewer terms per unit of degree
    factors.sort_by(|a, b| b.cmp(a));
    for (k, e) in factors {
        for _ in 0..e {
            acc = aux.canonical(&(&acc * &tower[k as usize]));
        }
    }
    acc
}

/// Full ODE left-hand side on the tower, summed over monomials in parallel.
pub fn expand_ode(o: &OdeSpec, tower: &[Poly], aux: &AuxSystem) -> Poly {
    let terms: Vec<(&Monomial, &Rational)> = o.lhs.terms().collect();
    terms
        .par_iter()
        .map(|(m, c)| expand_monomial(m, c, o.dependent, tower, aux))
        .reduce(Poly::zero, |a, b| a + b)
}

/// Multiplies through by the minimal kernel monomial making every exponent
/// nonnegative, then canonicalizes again. Without negative exponents the
/// canonical form is unique, so coefficient extraction is exact.
pub fn clear_denominators(p: &Poly, aux: &AuxSystem) -> Result<ResidualDecomposition, SymError> {
    let form = LaurentForm::from_poly(p, &aux.kernels, &aux.markers)?;
    let t_exps: Vec<i32> = form.min_exponents().iter().map(|&e| (-e).max(0)).collect();
    let t = Monomial::from_pairs(aux.kernels.iter().copied().zip(t_exps.iter().copied()));
    let cleared = aux.canonical(&p.mul_monomial(&t));
    let form = LaurentForm::from_poly(&cleared, &aux.kernels, &aux.markers)?;
    Ok(ResidualDecomposition { form, t_exps })
}

/// Substitutes the ansatz body into the ODE.
pub fn substitute(o: &OdeSpec, a: &AnsatzInstance, aux: &AuxSystem) -> Result<ResidualDecomposition, SymError> {
    substitute_poly(o, &a.body_poly()?, aux)
}

pub fn substitute_poly(o: &OdeSpec, body: &Poly, aux: &AuxSystem) -> Result<ResidualDecomposition, SymError> {
    let tower = derivative_tower(body, aux, o.order());
    clear_denominators(&expand_ode(o, &tower, aux), aux)
}

/// One primitive equation per stored coefficient, deduplicated, in key order.
pub fn extract_system(r: &ResidualDecomposition, unknowns: &[Sym], aux: &AuxSystem) -> AlgSystem {
    let mut seen: BTreeSet<Poly> = BTreeSet::new();
    let mut equations = Vec::new();
    for c in r.form.terms.values() {
        let e = c.primitive();
        if !e.is_zero() && seen.insert(e.clone()) {
            equations.push(e);
        }
    }
    AlgSystem {
        equations,
        unknowns: unknowns.to_vec(),
        side_conditions: aux.nonzero.clone(),
    }
}

/// A linear change of unknowns that removes the redundancy of the raw
/// ansatz: marker blocks substituted by explicit rules overlap the
/// marker-free block, and identities relate Laurent monomials. With `T`
/// clearing every negative exponent, `T * body` has a unique canonical
/// form `sum_j w_j * m_j`, and each `w_j` is a linear form in the raw
/// coefficients. Names spell the exponents of `m_j / T`, e.g. `wm1`, `wp1m2`.
#[derive(Clone, Debug)]
pub struct Reparam {
    pub effective: Vec<Sym>,
    /// `w_j = forms[j]` (linear in the raw coefficients).
    pub forms: Vec<Poly>,
    /// Body in the effective unknowns.
    pub body: Poly,
    pub raw: Vec<Sym>,
}

impl Reparam {
    pub fn new(a: &AnsatzInstance, aux: &AuxSystem) -> Result<Reparam, SymError> {
        let cleared = clear_denominators(&aux.reduce_poly(&a.body_poly()?), aux)?;
        let t_inv = cleared.t_monomial().inv();
        let compact = aux.arity() == 1;
        let mut effective = Vec::new();
        let mut forms = Vec::new();
        let mut body = Poly::zero();
        for (key, form) in cleared.form.terms.iter().rev() {
            let mut name = String::from("w");
            if key.markers != 0 {
                name.push_str(a.shape.block_name(key.markers as usize));
            }
            for (e, t) in key.exps.iter().zip(&cleared.t_exps) {
                name.push_str(&crate::ansatz::index_label(e - t, compact));
            }
            let w = Sym::intern(&name, crate::symcore::SymKind::AnsatzCoeff);
            let mono = cleared.form.monomial_of(key).mul(&t_inv);
            effective.push(w);
            forms.push(form.clone());
            body = body + Poly::var(w).mul_monomial(&mono);
        }
        Ok(Reparam {
            effective,
            forms,
            body,
            raw: a.coeffs.clone(),
        })
    }

    /// Number of raw directions that leave the body unchanged.
    pub fn redundancy(&self) -> usize {
        self.raw.len().saturating_sub(self.effective.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build, AnsatzShape};
    use crate::auxreg::builtin;
    use crate::pdeparse::parse_pde;
    use crate::reduce::{reduce_pde, WaveSub};
    use crate::symcore::{int, rat, SymKind};

    fn bf() -> OdeSpec {
        let p = parse_pde("u_xx + u*u_x - u_t + u - u^2 = 0", &[]).unwrap();
        reduce_pde(&p, &WaveSub::for_pde(&p))
    }

    #[test]
    fn constant_ansatz_gives_logistic_residual() {
        let aux = builtin("tanh", &[]).unwrap();
        let a0 = Sym::intern("a0", SymKind::AnsatzCoeff);
        let r = substitute_poly(&bf(), &Poly::var(a0), &aux).unwrap();
        assert_eq!(r.t_exps, vec![0]);
        assert_eq!(r.form.terms.len(), 1);
        let c = r.form.terms.values().next().unwrap();
        assert_eq!(*c, Poly::var(a0) - Poly::var(a0).pow(2));
    }

    #[test]
    fn tanh_solves_riccati_micro_ode() {
        // v' + v^2 - 1 = 0 with v = F
        let aux = builtin("tanh", &[]).unwrap();
        let p = parse_pde("u_x + u^2 - 1 = 0", &[]).unwrap();
        let o = reduce_pde(&p, &WaveSub::for_pde(&p));
        let alpha = Sym::lookup("alpha").unwrap();
        let o = OdeSpec::from_poly(o.lhs.substitute(alpha, &Poly::one()), vec![]);
        let r = substitute_poly(&o, &Poly::var(aux.kernels[0]), &aux).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn burgers_fisher_tanh_decomposition_shape() {
        let aux = builtin("tanh", &[]).unwrap();
        let a = build(&AnsatzShape::single(1, 1), &aux).unwrap();
        let r = substitute(&bf(), &a, &aux).unwrap();
        // body spans F^-1..F^3; v'' spans F^-3..F^5 and v*v' spans F^-3..F^7
        assert_eq!(r.t_exps, vec![3]);
        let exps: Vec<i32> = r.form.terms.keys().map(|k| k.exps[0]).collect();
        assert_eq!(*exps.first().unwrap(), 0);
        assert_eq!(*exps.last().unwrap(), 10);
    }

    #[test]
    fn reparam_of_single_tanh_shape() {
        let aux = builtin("tanh", &[]).unwrap();
        let a = build(&AnsatzShape::single(1, 1), &aux).unwrap();
        let rp = Reparam::new(&a, &aux).unwrap();
        // -b1 F^3 - b0 F^2 + (a1 + b1 - bm1) F + (a0 + b0) + (am1 + bm1)/F
        assert_eq!(rp.effective.len(), 5);
        assert_eq!(rp.redundancy(), 1);
        let b1 = Sym::lookup("b1").unwrap();
        assert!(rp.forms.contains(&-Poly::var(b1)));
    }

    #[test]
    fn extraction_normalizes_and_deduplicates() {
        let aux = builtin("tanh", &[]).unwrap();
        let x = Sym::intern("cx", SymKind::AnsatzCoeff);
        let f = aux.kernels[0];
        let p = Poly::var(x).scale(&int(2)).mul_monomial(&Monomial::var(f))
            + Poly::var(x).scale(&rat(-1, 3)).mul_monomial(&Monomial::power(f, 2));
        let r = clear_denominators(&p, &aux).unwrap();
        let s = extract_system(&r, &[x], &aux);
        assert_eq!(s.equations, vec![Poly::var(x)]);
    }

    #[test]
    fn zero_residual_gives_empty_system() {
        let aux = builtin("tanh", &[]).unwrap();
        let r = clear_denominators(&Poly::zero(), &aux).unwrap();
        assert!(extract_system(&r, &[], &aux).is_empty());
    }
}
