use std::collections::BTreeMap;

use crate::symcore::{int, Monomial, Poly, Rational, Sym};

/// Rewrites `s^2 -> rhs` for each registered symbol, applied to every
/// exponent of at least two. Right-hand sides must not reintroduce squares
/// of registered symbols indefinitely.
#[derive(Clone, Debug, Default)]
pub struct SquareRules {
    rules: BTreeMap<Sym, Poly>,
}

impl SquareRules {
    pub fn new() -> Self {
        SquareRules::default()
    }

    pub fn insert(&mut self, s: Sym, rhs: Poly) {
        self.rules.insert(s, rhs);
    }

    pub fn extend(&mut self, other: &SquareRules) {
        for (s, r) in &other.rules {
            self.rules.insert(*s, r.clone());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn syms(&self) -> impl Iterator<Item = Sym> + '_ {
        self.rules.keys().copied()
    }

    pub fn get(&self, s: Sym) -> Option<&Poly> {
        self.rules.get(&s)
    }

    fn needs(&self, m: &Monomial) -> Option<(Sym, i32)> {
        m.pairs()
            .iter()
            .find(|(s, e)| *e >= 2 && self.rules.contains_key(s))
            .copied()
    }

    /// Canonical representative: no registered symbol to a power above one.
    pub fn reduce(&self, p: &Poly) -> Poly {
        if self.rules.is_empty() || !p.terms().any(|(m, _)| self.needs(m).is_some()) {
            return p.clone();
        }
        let mut cache: BTreeMap<(Sym, i32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        let mut work: Vec<(Monomial, Rational)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        let mut guard = 0usize;
        while let Some((m, c)) = work.pop() {
            match self.needs(&m) {
                None => out.add_term(m, c),
                Some((s, e)) => {
                    let half = e / 2;
                    let rest = m.without(s).mul(&Monomial::power(s, e % 2));
                    let expansion = cache
                        .entry((s, half))
                        .or_insert_with(|| self.rules[&s].pow(half as u32));
                    for (m2, c2) in expansion.terms() {
                        work.push((rest.mul(m2), &c * c2));
                    }
                    guard += 1;
                    assert!(guard < 50_000_000, "square-rule rewriting does not terminate");
                }
            }
        }
        out
    }
}

/// A derivation on the polynomial ring given by the images of generators.
#[derive(Clone, Debug, Default)]
pub struct Derivation {
    images: BTreeMap<Sym, Poly>,
}

impl Derivation {
    pub fn new() -> Self {
        Derivation::default()
    }

    pub fn set(&mut self, s: Sym, image: Poly) {
        self.images.insert(s, image);
    }

    pub fn image(&self, s: Sym) -> Option<&Poly> {
        self.images.get(&s)
    }

    /// Leibniz extension; symbols without an image are constants.
    pub fn apply(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.terms() {
            for &(s, e) in m.pairs() {
                if let Some(img) = self.images.get(&s) {
                    let lowered = m.mul(&Monomial::power(s, -1));
                    let coef = c * int(e as i64);
                    for (m2, c2) in img.terms() {
                        out.add_term(lowered.mul(m2), &coef * c2);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::SymKind;

    #[test]
    fn square_rule_reduces_all_powers() {
        let s = Sym::intern("s", SymKind::FreeConstant);
        let mut r = SquareRules::new();
        r.insert(s, Poly::int(13));
        let p = Poly::var(s).pow(5);
        assert_eq!(r.reduce(&p), Poly::var(s).scale(&int(169)));
    }

    #[test]
    fn derivation_on_laurent_terms() {
        let f = Sym::intern("F", SymKind::Kernel);
        let mut d = Derivation::new();
        d.set(f, Poly::one() - Poly::var(f).pow(2));
        let inv = Poly::var(f).pow_signed(-1).unwrap();
        // d(1/F) = -(1 - F^2)/F^2 = 1 - F^-2
        let expected = Poly::one() - Poly::var(f).pow_signed(-2).unwrap();
        assert_eq!(d.apply(&inv), expected);
    }
}
