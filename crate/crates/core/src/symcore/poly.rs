use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::rational::{fmt_rational, rat_pow, rational_content, Rational};
use super::sym::Sym;

/// Sparse power product; pairs sorted by symbol index, no zero exponents.
/// Exponents may be negative (Laurent monomials).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(Sym, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(s: Sym) -> Self {
        Self::power(s, 1)
    }

    pub fn power(s: Sym, e: i32) -> Self {
        let mut v = SmallVec::new();
        if e != 0 {
            v.push((s, e));
        }
        Monomial(v)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Sym, i32)>) -> Self {
        let mut m = Monomial::one();
        for (s, e) in pairs {
            m = m.mul(&Monomial::power(s, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Sym, i32)] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&(_, e)| e as i64).sum()
    }

    pub fn exp(&self, s: Sym) -> i32 {
        self.0
            .iter()
            .find(|(v, _)| *v == s)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out: SmallVec<[(Sym, i32); 4]> = SmallVec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            let (a, ea) = self.0[i];
            let (b, eb) = o.0[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    out.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    if ea + eb != 0 {
                        out.push((a, ea + eb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&o.0[j..]);
        Monomial(out)
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|&(s, e)| (s, -e)).collect())
    }

    pub fn div(&self, o: &Monomial) -> Monomial {
        self.mul(&o.inv())
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(s, e)| (s, e * k)).collect())
    }

    /// True when every exponent of `self` is at most the matching one in `o`.
    pub fn divides(&self, o: &Monomial) -> bool {
        self.0.iter().all(|&(s, e)| o.exp(s) >= e) && o.0.iter().all(|&(s, e)| e >= 0 || self.exp(s) <= e)
    }

    pub fn without(&self, s: Sym) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(v, _)| *v != s).collect())
    }

    /// Splits into (part over syms selected by `pred`, rest).
    pub fn split(&self, pred: impl Fn(Sym) -> bool) -> (Monomial, Monomial) {
        let mut a = SmallVec::new();
        let mut b = SmallVec::new();
        for &(s, e) in &self.0 {
            if pred(s) {
                a.push((s, e));
            } else {
                b.push((s, e));
            }
        }
        (Monomial(a), Monomial(b))
    }

    pub fn gcd(&self, o: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|&(s, e)| {
                    let f = e.min(o.exp(s));
                    (f != 0 && o.exp(s) != 0).then_some((s, f))
                })
                .collect(),
        )
    }

    pub fn syms(&self) -> impl Iterator<Item = Sym> + '_ {
        self.0.iter().map(|&(s, _)| s)
    }

    pub fn has_negative(&self) -> bool {
        self.0.iter().any(|&(_, e)| e < 0)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the exponent of the
    /// earliest-created symbol decides.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            let a = self.0.get(i);
            let b = other.0.get(j);
            match (a, b) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, ea)), None) => return ea.cmp(&0),
                (None, Some(&(_, eb))) => return 0.cmp(&eb),
                (Some(&(sa, ea)), Some(&(sb, eb))) => match sa.cmp(&sb) {
                    Ordering::Less => return ea.cmp(&0),
                    Ordering::Greater => return 0.cmp(&eb),
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, &(s, e)) in self.0.iter().rev().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Sparse multivariate Laurent polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(super::rational::int(n))
    }

    pub fn var(s: Sym) -> Self {
        Poly::term(Monomial::var(s), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
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

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest term under the monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.terms.keys().flat_map(|m| m.syms()).collect()
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.terms.keys().any(|m| m.exp(s) != 0)
    }

    pub fn degree_in(&self, s: Sym) -> i32 {
        self.terms.keys().map(|m| m.exp(s)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, s: Sym) -> i32 {
        self.terms.keys().map(|m| m.exp(s)).min().unwrap_or(0)
    }

    pub fn total_degree(&self) -> i64 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Coefficients with respect to powers of `s`.
    pub fn coefficients_in(&self, s: Sym) -> BTreeMap<i32, Poly> {
        let mut out: BTreeMap<i32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            out.entry(e).or_default().add_term(m.without(s), c.clone());
        }
        out
    }

    /// Groups terms by the part of each monomial over the syms selected by
    /// `pred`; the values are polynomials in the remaining syms.
    pub fn group_by(&self, pred: impl Fn(Sym) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (a, b) = m.split(&pred);
            out.entry(a).or_default().add_term(b, c.clone());
        }
        out
    }

    /// Largest monomial dividing every term (componentwise minimum exponent).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut mins: BTreeMap<Sym, i32> = first.pairs().iter().copied().collect();
        for m in it {
            for (s, e) in mins.iter_mut() {
                *e = (*e).min(m.exp(*s));
            }
            for &(s, e) in m.pairs() {
                if e < 0 && !mins.contains_key(&s) {
                    mins.insert(s, e);
                }
            }
        }
        Monomial::from_pairs(mins)
    }

    /// Replaces `s` by `value`. Negative powers of `s` require `value` to be a
    /// single term.
    pub fn substitute(&self, s: Sym, value: &Poly) -> Poly {
        if !self.contains(s) {
            return self.clone();
        }
        let mut powers: HashMap<i32, Poly> = HashMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let pw = powers
                .entry(e)
                .or_insert_with(|| value.pow_signed(e).expect("negative power of a non-monomial"));
            let rest = Poly::term(m.without(s), c.clone());
            out = out + &rest * pw;
        }
        out
    }

    pub fn substitute_many(&self, map: &BTreeMap<Sym, Poly>) -> Poly {
        let mut cur = self.clone();
        for (s, v) in map {
            cur = cur.substitute(*s, v);
        }
        cur
    }

    /// Integer power; negative exponents only for single-term polynomials.
    pub fn pow_signed(&self, e: i32) -> Option<Poly> {
        if e >= 0 {
            return Some(self.pow(e as u32));
        }
        let (m, c) = self.terms.iter().next()?;
        if self.terms.len() != 1 {
            return None;
        }
        Some(Poly::term(m.pow(e), rat_pow(c, e as i64)))
    }

    /// Substitutes rational values for some syms.
    pub fn evaluate(&self, values: &BTreeMap<Sym, Rational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest: SmallVec<[(Sym, i32); 4]> = SmallVec::new();
            for &(s, e) in m.pairs() {
                match values.get(&s) {
                    Some(v) => {
                        if v.is_zero() && e < 0 {
                            panic!("division by zero evaluating {s}^{e}");
                        }
                        coef *= rat_pow(v, e as i64);
                    }
                    None => rest.push((s, e)),
                }
            }
            out.add_term(Monomial(rest), coef);
        }
        out
    }

    /// Full evaluation; `None` if some sym has no value or a pole is hit.
    pub fn eval_rational(&self, values: &BTreeMap<Sym, Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(s, e) in m.pairs() {
                let v = values.get(&s)?;
                if v.is_zero() && e < 0 {
                    return None;
                }
                t *= rat_pow(v, e as i64);
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, values: &HashMap<Sym, f64>) -> Option<f64> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = super::rational::to_f64(c);
            for &(s, e) in m.pairs() {
                t *= values.get(&s)?.powi(e);
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Rational) -> Rational) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Positive rational content of the coefficients.
    pub fn content(&self) -> Rational {
        rational_content(self.terms.values())
    }

    /// Divides out the content and fixes the sign so the leading coefficient
    /// is positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.content();
        if self.leading().map(|(_, v)| v.is_negative()).unwrap_or(false) {
            c = -c;
        }
        self.scale(&c.recip())
    }

    /// Exact division of polynomials (no negative exponents); `None` if the
    /// division leaves a remainder.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        if d.is_monomial() {
            let mut out = Poly::zero();
            for (m, c) in &self.terms {
                let q = m.div(&dm);
                if q.has_negative() && !m.has_negative() {
                    return None;
                }
                out.add_term(q, c / &dc);
            }
            return Some(out);
        }
        for s in d.vars() {
            if d.degree_in(s) > self.degree_in(s) || d.min_degree_in(s) < self.min_degree_in(s).min(0) {
                return None;
            }
        }
        let dt = d.terms.keys().next().cloned()?;
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        let mut guard = 0usize;
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let q = rm.div(&dm);
            if q.has_negative() {
                return None;
            }
            // the smallest term of a multiple of d is a multiple of d's smallest term
            let low = rem.terms.keys().next().expect("nonzero").div(&dt);
            if low.has_negative() {
                return None;
            }
            let qc = rc / &dc;
            let t = Poly::term(q.clone(), qc.clone());
            rem = rem - &t * d;
            quo.add_term(q, qc);
            guard += 1;
            if guard > 1_000_000 {
                return None;
            }
        }
        Some(quo)
    }

    /// Multivariate square root under the monomial order, if one exists.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = self.leading()?;
        if lm.pairs().iter().any(|&(_, e)| e % 2 != 0) {
            return None;
        }
        let root_c = super::rational::rat_sqrt(lc)?;
        let root_m = Monomial(lm.pairs().iter().map(|&(s, e)| (s, e / 2)).collect());
        let mut root = Poly::term(root_m.clone(), root_c.clone());
        let two_lead = (root_m, root_c * super::rational::int(2));
        let mut rem = self - &(&root * &root);
        let mut guard = 0;
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let q = rm.div(&two_lead.0);
            if q.has_negative() || q.degree() < 0 {
                return None;
            }
            if q >= two_lead.0 {
                return None;
            }
            let t = Poly::term(q, rc / &two_lead.1);
            rem = rem - &(&(&root + &root) * &t) - &(&t * &t);
            root = root + t;
            guard += 1;
            if guard > 10_000 {
                return None;
            }
        }
        Some(root)
    }

    /// Partial derivative with respect to `s`.
    pub fn diff(&self, s: Sym) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            if e == 0 {
                continue;
            }
            out.add_term(m.mul(&Monomial::power(s, -1)), c * super::rational::int(e as i64));
        }
        out
    }

    pub fn is_free_of(&self, syms: &[Sym]) -> bool {
        !self.terms.keys().any(|m| m.syms().any(|s| syms.contains(&s)))
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|m| m.has_negative())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                f.write_str(&fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, o: &'a Poly) -> Poly {
        let (big, small) = if self.len() >= o.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add<Poly> for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() { (self, o) } else { (o, self) };
        for (m, c) in small.terms {
            big.add_term(m, c);
        }
        big
    }
}

impl<'a> Add<&'a Poly> for Poly {
    type Output = Poly;
    fn add(mut self, o: &'a Poly) -> Poly {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
        self
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, o: &'a Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Sub<Poly> for Poly {
    type Output = Poly;
    fn sub(mut self, o: Poly) -> Poly {
        for (m, c) in o.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl<'a> Sub<&'a Poly> for Poly {
    type Output = Poly;
    fn sub(mut self, o: &'a Poly) -> Poly {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), -c.clone());
        }
        self
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, o: &'a Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul<Poly> for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        &self * &o
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::super::rational::{int, rat};
    use super::super::sym::SymKind;
    use super::*;

    fn v(n: &str) -> Poly {
        Poly::var(Sym::intern(n, SymKind::FreeConstant))
    }

    #[test]
    fn square_of_one_minus_f_squared() {
        let f = v("F");
        let one_minus = Poly::one() - &f * &f;
        let sq = &one_minus * &one_minus;
        let expected = Poly::one() - (&f * &f).scale(&int(2)) + f.pow(4);
        assert_eq!(sq, expected);
    }

    #[test]
    fn grlex_order_prefers_degree_then_first_symbol() {
        let a = Sym::intern("polyord_a", SymKind::FreeConstant);
        let b = Sym::intern("polyord_b", SymKind::FreeConstant);
        let ma = Monomial::var(a);
        let mb = Monomial::var(b);
        let mb2 = Monomial::power(b, 2);
        assert!(ma > mb);
        assert!(mb2 > ma);
        assert!(Monomial::one() < mb);
    }

    #[test]
    fn exact_division_and_remainder() {
        let x = v("x");
        let y = v("y");
        let p = &(&x - &y) * &(&x + &y);
        assert_eq!(p.exact_div(&(&x + &y)), Some(&x - &y));
        assert_eq!(p.exact_div(&(&x + &Poly::one())), None);
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let a = v("a");
        let b = v("b");
        let r = &a.scale(&rat(3, 2)) - &b;
        let sq = &r * &r;
        let s = sq.sqrt().unwrap();
        assert!(s == r || s == -&r);
        assert_eq!((&sq + &Poly::one()).sqrt(), None);
    }

    #[test]
    fn laurent_substitution_of_monomials() {
        let f = Sym::intern("F", SymKind::Kernel);
        let p = Poly::term(Monomial::power(f, -2), int(3));
        let g = v("g");
        let q = p.substitute(f, &g.scale(&int(2)));
        assert_eq!(q, Poly::term(Monomial::power(Sym::lookup("g").unwrap(), -2), rat(3, 4)));
    }
}
