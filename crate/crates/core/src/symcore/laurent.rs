use std::collections::BTreeMap;
use std::fmt;

use super::expr::Expr;
use super::poly::{Monomial, Poly};
use super::sym::Sym;
use super::SymError;

/// Kernel exponent vector (aligned with the form's kernel list) and the
/// bitmask of first-order markers present.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LaurentKey {
    pub exps: Vec<i32>,
    pub markers: u8,
}

/// Laurent polynomial in kernel symbols with parameter-polynomial
/// coefficients, split by marker subset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentForm {
    pub kernels: Vec<Sym>,
    pub markers: Vec<Sym>,
    pub terms: BTreeMap<LaurentKey, Poly>,
}

impl LaurentForm {
    pub fn empty(kernels: &[Sym], markers: &[Sym]) -> Self {
        LaurentForm {
            kernels: kernels.to_vec(),
            markers: markers.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Projects a polynomial; `markers[i]` is the first-order marker of
    /// `kernels[i]` (pass an empty slice when there are none).
    pub fn from_poly(p: &Poly, kernels: &[Sym], markers: &[Sym]) -> Result<Self, SymError> {
        let mut out = LaurentForm::empty(kernels, markers);
        for (m, c) in p.terms() {
            let mut exps = vec![0i32; kernels.len()];
            let mut mask = 0u8;
            let mut rest = Vec::new();
            for &(s, e) in m.pairs() {
                if let Some(i) = kernels.iter().position(|&k| k == s) {
                    exps[i] = e;
                } else if let Some(i) = markers.iter().position(|&k| k == s) {
                    if e != 1 {
                        return Err(SymError::MarkerPower(s.name(), e));
                    }
                    mask |= 1 << i;
                } else if let Some(d) = s.deriv_info() {
                    if kernels.contains(&d.base) {
                        return Err(SymError::UnreducedMarker(s.name()));
                    }
                    rest.push((s, e));
                } else {
                    rest.push((s, e));
                }
            }
            out.terms
                .entry(LaurentKey { exps, markers: mask })
                .or_default()
                .add_term(Monomial::from_pairs(rest), c.clone());
        }
        out.terms.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Kernel and marker monomial of a key.
    pub fn monomial_of(&self, k: &LaurentKey) -> Monomial {
        let mut pairs: Vec<(Sym, i32)> = self.kernels.iter().copied().zip(k.exps.iter().copied()).collect();
        for (i, m) in self.markers.iter().enumerate() {
            if k.markers & (1 << i) != 0 {
                pairs.push((*m, 1));
            }
        }
        Monomial::from_pairs(pairs)
    }

    pub fn to_poly(&self) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &self.terms {
            out = out + c.mul_monomial(&self.monomial_of(k));
        }
        out
    }

    pub fn to_expr(&self) -> Expr {
        Expr::from_poly(&self.to_poly())
    }

    /// Minimum exponent of each kernel over all terms.
    pub fn min_exponents(&self) -> Vec<i32> {
        let mut mins = vec![0i32; self.kernels.len()];
        for k in self.terms.keys() {
            for (m, e) in mins.iter_mut().zip(&k.exps) {
                *m = (*m).min(*e);
            }
        }
        mins
    }
}

/// Projects an expression onto kernel monomials and first-order markers.
/// Any kernel derivative atom of order two or more is rejected.
pub fn to_laurent(e: &Expr, kernels: &[Sym]) -> Result<LaurentForm, SymError> {
    let p = e.to_poly()?;
    let mut markers = Vec::new();
    for s in p.vars() {
        if let Some(d) = s.deriv_info() {
            if kernels.contains(&d.base) && d.total_order() >= 2 {
                return Err(SymError::UnreducedMarker(s.name()));
            }
        }
    }
    for &k in kernels {
        let m = p
            .vars()
            .into_iter()
            .find(|s| s.deriv_info().map(|d| d.base == k && d.total_order() == 1).unwrap_or(false));
        markers.push(m);
    }
    // kernels without a marker in the input still get a slot so masks align
    let wave = super::sym::Sym::intern("xi", super::sym::SymKind::IndependentVar);
    let markers: Vec<Sym> = kernels
        .iter()
        .zip(markers)
        .map(|(&k, m)| m.unwrap_or_else(|| Sym::derivative(k, &[(wave, 1)])))
        .collect();
    LaurentForm::from_poly(&p, kernels, &markers)
}

impl fmt::Display for LaurentForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

#[cfg(test)]
mod tests {
    use super::super::sym::SymKind;
    use super::*;

    #[test]
    fn two_terms_no_marker() {
        let f = Sym::intern("F", SymKind::Kernel);
        let a1 = Sym::intern("a1", SymKind::AnsatzCoeff);
        let am1 = Sym::intern("am1", SymKind::AnsatzCoeff);
        let e = Expr::add(
            Expr::mul(Expr::Sym(a1), Expr::Sym(f)),
            Expr::mul(Expr::Sym(am1), Expr::pow(Expr::Sym(f), -1).unwrap()),
        );
        let l = to_laurent(&e, &[f]).unwrap();
        assert_eq!(l.len(), 2);
        assert!(l.terms.keys().all(|k| k.markers == 0));
        assert_eq!(l.to_poly(), e.to_poly().unwrap());
    }

    #[test]
    fn marker_component() {
        let xi = Sym::intern("xi", SymKind::IndependentVar);
        let f = Sym::intern("F", SymKind::Kernel);
        let b1 = Sym::intern("b1", SymKind::AnsatzCoeff);
        let df = Sym::derivative(f, &[(xi, 1)]);
        let e = Expr::product(vec![Expr::Sym(df), Expr::Sym(b1), Expr::Sym(f)]);
        let l = to_laurent(&e, &[f]).unwrap();
        assert_eq!(l.len(), 1);
        let (k, c) = l.terms.iter().next().unwrap();
        assert_eq!(k.exps, vec![1]);
        assert_eq!(k.markers, 1);
        assert_eq!(c, &Poly::var(b1));
    }

    #[test]
    fn higher_marker_is_rejected() {
        let xi = Sym::intern("xi", SymKind::IndependentVar);
        let f = Sym::intern("F", SymKind::Kernel);
        let d2 = Sym::derivative(f, &[(xi, 2)]);
        let err = to_laurent(&Expr::Sym(d2), &[f]).unwrap_err();
        assert_eq!(err, SymError::UnreducedMarker("D[F,xi,xi]".into()));
    }
}
