use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::symcore::{Monomial, Poly, Rational, Sym};

/// Dense exponent vectors under lex order: `vars[0]` is the largest variable.
type Lex = BTreeMap<Vec<u32>, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GbOutcome {
    /// Reduced lex basis, monic, sorted by leading term (largest first).
    Basis(Vec<Poly>),
    /// The ideal contains 1.
    Inconsistent,
    /// A pair, size or work cap was reached.
    Aborted,
}

fn to_lex(p: &Poly, vars: &[Sym]) -> Option<Lex> {
    let mut out = Lex::new();
    for (m, c) in p.terms() {
        let mut e = vec![0u32; vars.len()];
        for &(s, k) in m.pairs() {
            let i = vars.iter().position(|&v| v == s)?;
            if k < 0 {
                return None;
            }
            e[i] = k as u32;
        }
        out.insert(e, c.clone());
    }
    Some(out)
}

fn from_lex(p: &Lex, vars: &[Sym]) -> Poly {
    Poly::from_terms(p.iter().map(|(e, c)| {
        (
            Monomial::from_pairs(vars.iter().copied().zip(e.iter().map(|&k| k as i32))),
            c.clone(),
        )
    }))
}

fn lead(p: &Lex) -> Option<(&Vec<u32>, &Rational)> {
    p.iter().next_back()
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn sub_scaled(p: &mut Lex, g: &Lex, shift: &[u32], c: &Rational) {
    for (e, gc) in g {
        let k: Vec<u32> = e.iter().zip(shift).map(|(a, b)| a + b).collect();
        let v = p.entry(k.clone()).or_insert_with(Rational::zero);
        *v -= c * gc;
        if v.is_zero() {
            p.remove(&k);
        }
    }
}

/// Caps on reduction steps and coefficient height; lex bases can swell far
/// past anything useful to the caller.
struct Work {
    steps: usize,
}

const STEP_CAP: usize = 200_000;
const SIZE_CAP: usize = 4000;
const BITS_CAP: u64 = 2048;

fn normal_form(f: &Lex, basis: &[Lex], work: &mut Work) -> Option<Lex> {
    let mut p = f.clone();
    let mut r = Lex::new();
    while let Some((lt, lc)) = lead(&p).map(|(e, c)| (e.clone(), c.clone())) {
        work.steps += 1;
        if p.len() > SIZE_CAP || work.steps > STEP_CAP || lc.numer().bits() + lc.denom().bits() > BITS_CAP {
            return None;
        }
        match basis.iter().find(|g| divides(lead(g).unwrap().0, &lt)) {
            Some(g) => {
                let (gl, gc) = lead(g).unwrap();
                let shift: Vec<u32> = lt.iter().zip(gl).map(|(a, b)| a - b).collect();
                sub_scaled(&mut p, g, &shift, &(&lc / gc));
            }
            None => {
                p.remove(&lt);
                r.insert(lt, lc);
            }
        }
    }
    Some(r)
}

fn monic(mut p: Lex) -> Lex {
    if let Some((_, c)) = lead(&p) {
        let inv = c.recip();
        for v in p.values_mut() {
            *v *= &inv;
        }
    }
    p
}

fn s_poly(f: &Lex, g: &Lex) -> Lex {
    let (fl, fc) = lead(f).unwrap();
    let (gl, gc) = lead(g).unwrap();
    let l = lcm(fl, gl);
    let sf: Vec<u32> = l.iter().zip(fl).map(|(a, b)| a - b).collect();
    let sg: Vec<u32> = l.iter().zip(gl).map(|(a, b)| a - b).collect();
    let mut out = Lex::new();
    sub_scaled(&mut out, f, &sf, &-fc.recip());
    sub_scaled(&mut out, g, &sg, &gc.recip());
    out
}

/// Buchberger's algorithm with the coprime-leading-term criterion.
pub fn groebner_lex(polys: &[Poly], vars: &[Sym], max_pairs: usize) -> GbOutcome {
    let mut work = Work { steps: 0 };
    let mut basis: Vec<Lex> = Vec::new();
    for p in polys {
        let Some(l) = to_lex(p, vars) else {
            return GbOutcome::Aborted;
        };
        if !l.is_empty() {
            basis.push(monic(l));
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let mut processed = 0usize;
    while let Some((i, j)) = pairs.pop() {
        processed += 1;
        if processed > max_pairs {
            return GbOutcome::Aborted;
        }
        let (li, lj) = (lead(&basis[i]).unwrap().0, lead(&basis[j]).unwrap().0);
        if li.iter().zip(lj).all(|(a, b)| *a == 0 || *b == 0) {
            continue;
        }
        let s = s_poly(&basis[i], &basis[j]);
        let Some(r) = normal_form(&s, &basis, &mut work) else {
            return GbOutcome::Aborted;
        };
        if r.is_empty() {
            continue;
        }
        let r = monic(r);
        if lead(&r).unwrap().0.iter().all(|&e| e == 0) {
            return GbOutcome::Inconsistent;
        }
        let k = basis.len();
        basis.push(r);
        for i in 0..k {
            pairs.insert(0, (i, k));
        }
    }
    // minimal then reduced
    let mut minimal: Vec<Lex> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let gl = lead(g).unwrap().0;
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            let hl = lead(h).unwrap().0;
            j != i && divides(hl, gl) && (hl != gl || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut reduced = Vec::new();
    for i in 0..minimal.len() {
        let others: Vec<Lex> = minimal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        let (lt, lc) = lead(&minimal[i]).map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let mut tail = minimal[i].clone();
        tail.remove(&lt);
        let Some(mut r) = normal_form(&tail, &others, &mut work) else {
            return GbOutcome::Aborted;
        };
        r.insert(lt, lc);
        reduced.push(monic(r));
    }
    reduced.sort_by(|a, b| lead(b).unwrap().0.cmp(lead(a).unwrap().0));
    if reduced.iter().any(|g| g.len() == 1 && g.contains_key(&vec![0u32; vars.len()]) && g.values().all(|c| c.is_one())) {
        return GbOutcome::Inconsistent;
    }
    GbOutcome::Basis(reduced.iter().map(|g| from_lex(g, vars)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::SymKind;

    fn v(n: &str) -> Poly {
        Poly::var(Sym::intern(n, SymKind::AnsatzCoeff))
    }

    #[test]
    fn triangularizes_two_circles() {
        let (x, y) = (v("gbx"), v("gby"));
        let vars = [Sym::lookup("gbx").unwrap(), Sym::lookup("gby").unwrap()];
        // x^2 + y^2 - 1, x - y
        let f = &(&x * &x + &y * &y) - &Poly::one();
        let g = &x - &y;
        match groebner_lex(&[f, g], &vars, 1000) {
            GbOutcome::Basis(b) => {
                assert_eq!(b.len(), 2);
                assert_eq!(b[1], (&y * &y) - Poly::constant(crate::symcore::rat(1, 2)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_inconsistency() {
        let x = v("gbx");
        let vars = [Sym::lookup("gbx").unwrap()];
        let r = groebner_lex(&[&x * &x - Poly::one(), x.clone() - Poly::int(2)], &vars, 100);
        assert_eq!(r, GbOutcome::Inconsistent);
    }
}
