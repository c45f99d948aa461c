use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::symcore::{Poly, Rational, Sym};

/// Integer coefficient vector (index = degree) proportional to `p`, which
/// must be a polynomial in `x` alone.
fn integer_coeffs(p: &Poly, x: Sym) -> Vec<BigInt> {
    let by = p.coefficients_in(x);
    let n = by.keys().max().copied().unwrap_or(0).max(0) as usize;
    let mut rat = vec![Rational::zero(); n + 1];
    for (e, c) in by {
        rat[e as usize] = c.as_constant().expect("univariate");
    }
    let mut l = BigInt::one();
    for r in &rat {
        l = l.lcm(r.denom());
    }
    let ints: Vec<BigInt> = rat.iter().map(|r| (r * Rational::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|i| i / &g).collect()
}

fn eval(c: &[BigInt], r: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for a in c.iter().rev() {
        acc = acc * r + Rational::from_integer(a.clone());
    }
    acc
}

/// Synthetic division by `(q x - p)` for a root `p/q`; exact by assumption.
fn deflate(c: &[BigInt], root: &Rational) -> Vec<BigInt> {
    let n = c.len() - 1;
    let mut out = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (1..=n).rev() {
        carry = carry * root + Rational::from_integer(c[i].clone());
        out[i - 1] = carry.clone();
    }
    let mut l = BigInt::one();
    for r in &out {
        l = l.lcm(r.denom());
    }
    let ints: Vec<BigInt> = out.iter().map(|r| (r * Rational::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    ints.into_iter().map(|i| if g.is_zero() { i } else { i / &g }).collect()
}

fn small_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > 1_000_000_000_000 {
        return None;
    }
    let mut primes: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        let mut k = 0;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        if k > 0 {
            primes.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        primes.push((m, 1));
    }
    let mut divs = vec![1u64];
    for (p, k) in primes {
        let mut next = Vec::new();
        for d in &divs {
            let mut pk = 1u64;
            for _ in 0..=k {
                next.push(d * pk);
                pk *= p;
            }
        }
        divs = next;
        if divs.len() > 4096 {
            return None;
        }
    }
    divs.sort_unstable();
    Some(divs)
}

fn to_f64(b: &BigInt) -> f64 {
    b.to_f64().unwrap_or(if b.is_negative() { f64::MIN } else { f64::MAX })
}

/// Durand-Kerner iteration on the monic normalization.
fn numeric_roots(c: &[BigInt]) -> Vec<(f64, f64)> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = to_f64(&c[n]);
    let a: Vec<f64> = c.iter().map(|v| to_f64(v) / lead).collect();
    if a.iter().any(|v| !v.is_finite()) {
        return Vec::new();
    }
    let radius = 1.0 + a[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            (radius * 0.5 * t.cos(), radius * 0.5 * t.sin())
        })
        .collect();
    let mul = |x: (f64, f64), y: (f64, f64)| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
    let div = |x: (f64, f64), y: (f64, f64)| {
        let d = y.0 * y.0 + y.1 * y.1;
        ((x.0 * y.0 + x.1 * y.1) / d, (x.1 * y.0 - x.0 * y.1) / d)
    };
    for _ in 0..800 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut pv = (1.0, 0.0);
            for k in (0..n).rev() {
                pv = mul(pv, z[i]);
                pv.0 += a[k];
            }
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den = mul(den, (z[i].0 - z[j].0, z[i].1 - z[j].1));
                }
            }
            if den.0 == 0.0 && den.1 == 0.0 {
                den = (1e-12, 0.0);
            }
            let step = div(pv, den);
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            delta = delta.max(step.0.abs() + step.1.abs());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Continued-fraction convergents of `x` with denominators up to `limit`.
fn convergents(x: f64, limit: i64) -> Vec<Rational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x;
    for _ in 0..40 {
        if !r.is_finite() || r.abs() > 1e15 {
            break;
        }
        let a = r.floor();
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > BigInt::from(limit) {
            break;
        }
        out.push(Rational::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-14 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// Distinct rational roots of a univariate polynomial, and the cofactor left
/// after dividing every root out (with multiplicity).
pub fn rational_roots(p: &Poly, x: Sym) -> (Vec<Rational>, Vec<Rational>) {
    let mut c = integer_coeffs(p, x);
    let mut roots: Vec<Rational> = Vec::new();
    let push_root = |c: &mut Vec<BigInt>, r: Rational, roots: &mut Vec<Rational>| {
        while c.len() > 1 && eval(c, &r).is_zero() {
            *c = deflate(c, &r);
        }
        if !roots.contains(&r) {
            roots.push(r);
        }
    };
    if c.len() > 1 && c[0].is_zero() {
        push_root(&mut c, Rational::zero(), &mut roots);
    }
    if c.len() > 1 {
        let lead = c.last().cloned().unwrap();
        if let (Some(ps), Some(qs)) = (small_divisors(&c[0]), small_divisors(&lead)) {
            if ps.len() * qs.len() <= 200_000 {
                for p in &ps {
                    for q in &qs {
                        for s in [1i64, -1] {
                            if c.len() <= 1 {
                                break;
                            }
                            let r = Rational::new(BigInt::from(*p) * s, BigInt::from(*q));
                            if eval(&c, &r).is_zero() {
                                push_root(&mut c, r, &mut roots);
                            }
                        }
                    }
                }
            }
        }
    }
    if c.len() > 1 {
        for (re, im) in numeric_roots(&c) {
            if im.abs() > 1e-6 * (1.0 + re.abs()) {
                continue;
            }
            for r in convergents(re, 1_000_000_000_000) {
                if c.len() > 1 && eval(&c, &r).is_zero() {
                    push_root(&mut c, r, &mut roots);
                    break;
                }
            }
        }
    }
    roots.sort();
    let cof = c.into_iter().map(Rational::from_integer).collect();
    (roots, cof)
}

/// Rebuilds a polynomial in `x` from a coefficient vector.
pub fn from_coeffs(c: &[Rational], x: Sym) -> Poly {
    let mut p = Poly::zero();
    for (e, v) in c.iter().enumerate() {
        p = p + Poly::var(x).pow(e as u32).scale(v);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, rat, SymKind};

    fn x() -> Sym {
        Sym::intern("rootx", SymKind::AnsatzCoeff)
    }

    #[test]
    fn finds_simple_and_repeated_roots() {
        // (x - 1/2)^2 (x + 3) x
        let xp = Poly::var(x());
        let p = &(&(&xp - &Poly::constant(rat(1, 2))).pow(2) * &(&xp + &Poly::int(3))) * &xp;
        let (r, cof) = rational_roots(&p, x());
        assert_eq!(r, vec![int(-3), int(0), rat(1, 2)]);
        assert_eq!(cof.len(), 1);
    }

    #[test]
    fn irrational_roots_remain() {
        let p = Poly::var(x()).pow(2) - Poly::int(2);
        let (r, cof) = rational_roots(&p, x());
        assert!(r.is_empty());
        assert_eq!(cof.len(), 3);
    }

    #[test]
    fn large_coefficients_use_numeric_candidates() {
        // (4394 x - 69 * 1000003) (x^2 + 1)
        let xp = Poly::var(x());
        let lin = &xp.scale(&int(4394)) - &Poly::int(69 * 1_000_003);
        let p = &lin * &(&xp.pow(2) + &Poly::one());
        let (r, _) = rational_roots(&p, x());
        assert_eq!(r, vec![rat(69 * 1_000_003, 4394)]);
    }
}
