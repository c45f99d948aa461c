use std::collections::BTreeMap;
use std::fmt;

use num_traits::Signed;

use crate::symcore::{Expr, Poly, Rational, Sym};

/// `num / den` with `den` never zero. Kept lightly normalized: monomial and
/// rational content cancelled, exact quotients taken, `den` primitive with a
/// positive leading coefficient.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn poly(p: Poly) -> RatFn {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn constant(c: Rational) -> RatFn {
        RatFn::poly(Poly::constant(c))
    }

    pub fn new(num: Poly, den: Poly) -> RatFn {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn::poly(Poly::zero());
        }
        if let Some(c) = den.as_constant() {
            return RatFn::poly(num.scale(&c.recip()));
        }
        if let Some(q) = num.exact_div(&den) {
            return RatFn::poly(q);
        }
        // common monomial factor
        let g = num.monomial_content().gcd(&den.monomial_content());
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            let inv = g.inv();
            (num.mul_monomial(&inv), den.mul_monomial(&inv))
        };
        let mut c = den.content();
        if den.leading().map(|(_, v)| v.is_negative()).unwrap_or(false) {
            c = -c;
        }
        num = num.scale(&c.recip());
        den = den.scale(&c.recip());
        RatFn { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.den.as_constant().map(|_| &self.num)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        Some(self.num.as_constant()? / self.den.as_constant()?)
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Sym> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: -self.num.clone(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &Rational) -> RatFn {
        RatFn::new(self.num.scale(c), self.den.clone())
    }

    /// Replaces `x` by `v` throughout.
    pub fn substitute(&self, x: Sym, v: &RatFn) -> RatFn {
        if !self.num.contains(x) && !self.den.contains(x) {
            return self.clone();
        }
        let k = self.num.degree_in(x).max(self.den.degree_in(x));
        let num = homogenize(&self.num, x, v, k);
        let den = homogenize(&self.den, x, v, k);
        RatFn::new(num, den)
    }

    /// `None` when the denominator vanishes under the substitution.
    pub fn try_substitute(&self, x: Sym, v: &RatFn) -> Option<RatFn> {
        if !self.num.contains(x) && !self.den.contains(x) {
            return Some(self.clone());
        }
        let k = self.num.degree_in(x).max(self.den.degree_in(x));
        let den = homogenize(&self.den, x, v, k);
        if den.is_zero() {
            return None;
        }
        Some(RatFn::new(homogenize(&self.num, x, v, k), den))
    }

    pub fn try_substitute_all(&self, map: &BTreeMap<Sym, RatFn>) -> Option<RatFn> {
        let mut cur = self.clone();
        for (s, v) in map {
            cur = cur.try_substitute(*s, v)?;
        }
        Some(cur)
    }

    pub fn substitute_all(&self, map: &BTreeMap<Sym, RatFn>) -> RatFn {
        let mut cur = self.clone();
        for (s, v) in map {
            cur = cur.substitute(*s, v);
        }
        cur
    }

    pub fn eval(&self, values: &BTreeMap<Sym, Rational>) -> Option<Rational> {
        let d = self.den.eval_rational(values)?;
        if num_traits::Zero::is_zero(&d) {
            return None;
        }
        Some(self.num.eval_rational(values)? / d)
    }

    pub fn to_expr(&self) -> Expr {
        let n = Expr::from_poly(&self.num);
        match self.den.as_constant() {
            Some(c) => Expr::mul(Expr::num(c.recip()), n),
            None => Expr::div(n, Expr::from_poly(&self.den)).expect("nonzero denominator"),
        }
    }
}

/// `p(x = v.num / v.den) * v.den^k` for `k >= deg_x p`.
pub fn homogenize(p: &Poly, x: Sym, v: &RatFn, k: i32) -> Poly {
    if !p.contains(x) && v.den.as_constant().is_some() && k == 0 {
        return p.clone();
    }
    let by_power = p.coefficients_in(x);
    let mut num_pows: Vec<Poly> = vec![Poly::one()];
    let mut den_pows: Vec<Poly> = vec![Poly::one()];
    for i in 1..=k.max(0) as usize {
        num_pows.push(&num_pows[i - 1] * &v.num);
        den_pows.push(&den_pows[i - 1] * &v.den);
    }
    let mut out = Poly::zero();
    for (e, c) in by_power {
        assert!(e >= 0 && e <= k, "homogenize needs nonnegative exponents");
        let t = &(&c * &num_pows[e as usize]) * &den_pows[(k - e) as usize];
        out = out + t;
    }
    out
}

/// Polynomial image of `p` under `x -> v`, up to the nonzero factor `v.den^deg`.
pub fn substitute_cleared(p: &Poly, x: Sym, v: &RatFn) -> Poly {
    if !p.contains(x) {
        return p.clone();
    }
    if let Some(c) = v.den.as_constant() {
        return p.substitute(x, &v.num.scale(&c.recip()));
    }
    homogenize(p, x, v, p.degree_in(x))
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, SymKind};

    #[test]
    fn substitution_composes() {
        let x = Sym::intern("rx", SymKind::AnsatzCoeff);
        let y = Sym::intern("ry", SymKind::AnsatzCoeff);
        // f = 1/x, x = y/(y+1) -> (y+1)/y
        let f = RatFn::new(Poly::one(), Poly::var(x));
        let v = RatFn::new(Poly::var(y), Poly::var(y) + Poly::one());
        let g = f.substitute(x, &v);
        assert_eq!(g, RatFn::new(Poly::var(y) + Poly::one(), Poly::var(y)));
    }

    #[test]
    fn cleared_substitution_is_polynomial() {
        let x = Sym::intern("rx", SymKind::AnsatzCoeff);
        let y = Sym::intern("ry", SymKind::AnsatzCoeff);
        // x^2 - 1 at x = 1/y  ->  1 - y^2
        let p = Poly::var(x).pow(2) - Poly::one();
        let v = RatFn::new(Poly::one(), Poly::var(y));
        assert_eq!(substitute_cleared(&p, x, &v), Poly::one() - Poly::var(y).pow(2));
    }

    #[test]
    fn normalization_takes_exact_quotients() {
        let y = Sym::intern("ry", SymKind::AnsatzCoeff);
        let n = Poly::var(y).pow(2) - Poly::one();
        let d = (Poly::var(y) - Poly::one()).scale(&int(2));
        let r = RatFn::new(n, d);
        assert_eq!(r.as_poly().unwrap(), &(Poly::var(y) + Poly::one()).scale(&crate::symcore::rat(1, 2)));
    }
}
