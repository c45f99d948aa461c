use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, Poly};
use super::rational::{fmt_rational, int, rat_pow, Rational};
use super::sym::{Sym, SymKind};
use super::SymError;

/// Named special functions and opaque kernel applications.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Func {
    Tanh,
    Tan,
    Exp,
    Sinh,
    Cosh,
    Sin,
    Cos,
    Sn,
    Cn,
    Dn,
    /// A registry kernel with no named realization, printed as `F(arg)`.
    Kernel(Sym),
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "tanh" => Func::Tanh,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sn" => Func::Sn,
            "cn" => Func::Cn,
            "dn" => Func::Dn,
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Func::Tanh => "tanh".into(),
            Func::Tan => "tan".into(),
            Func::Exp => "exp".into(),
            Func::Sinh => "sinh".into(),
            Func::Cosh => "cosh".into(),
            Func::Sin => "sin".into(),
            Func::Cos => "cos".into(),
            Func::Sn => "sn".into(),
            Func::Cn => "cn".into(),
            Func::Dn => "dn".into(),
            Func::Kernel(s) => s.name(),
        }
    }

    /// Number of arguments: Jacobi functions also take the modulus.
    pub fn arity(&self) -> usize {
        match self {
            Func::Sn | Func::Cn | Func::Dn => 2,
            _ => 1,
        }
    }
}

/// Immutable expression tree. Constructors keep sums and products flat with
/// at most one numeric factor; sums keep their input order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Num(Rational),
    Sym(Sym),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i64),
    Apply(Func, Vec<Expr>),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ArithOp {
    Add,
    Mul,
    Pow,
}

/// Combines two expressions; `Pow` needs an integer constant exponent.
pub fn expr_arith(a: &Expr, b: &Expr, op: ArithOp) -> Result<Expr, SymError> {
    match op {
        ArithOp::Add => Ok(Expr::add(a.clone(), b.clone())),
        ArithOp::Mul => Ok(Expr::mul(a.clone(), b.clone())),
        ArithOp::Pow => match b {
            Expr::Num(r) if r.is_integer() => {
                let e: i64 = r
                    .to_integer()
                    .try_into()
                    .map_err(|_| SymError::NonIntegerExponent(fmt_rational(r)))?;
                Expr::pow(a.clone(), e)
            }
            other => Err(SymError::NonIntegerExponent(other.to_string())),
        },
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Num(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(int(n))
    }

    pub fn num(r: Rational) -> Expr {
        Expr::Num(r)
    }

    pub fn sym(s: Sym) -> Expr {
        Expr::Sym(s)
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum(vec![a, Expr::neg(b)])
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::mul(Expr::int(-1), a)
    }

    /// Flattened sum; numeric terms merge at the position of the first one
    /// and zero terms vanish.
    pub fn sum(items: Vec<Expr>) -> Expr {
        let mut out: Vec<Expr> = Vec::with_capacity(items.len());
        let mut constant: Option<(usize, Rational)> = None;
        let push = |e: Expr, out: &mut Vec<Expr>, constant: &mut Option<(usize, Rational)>| match e {
            Expr::Num(r) => match constant {
                Some((_, c)) => *c += r,
                None => {
                    *constant = Some((out.len(), r.clone()));
                    out.push(Expr::Num(r));
                }
            },
            other => out.push(other),
        };
        for e in items {
            match e {
                Expr::Add(inner) => {
                    for i in inner {
                        push(i, &mut out, &mut constant);
                    }
                }
                other => push(other, &mut out, &mut constant),
            }
        }
        if let Some((pos, c)) = constant {
            if c.is_zero() {
                out.remove(pos);
            } else {
                out[pos] = Expr::Num(c);
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::product(vec![a, b])
    }

    /// Flattened product with a single leading numeric factor.
    pub fn product(items: Vec<Expr>) -> Expr {
        let mut c = Rational::one();
        let mut out = Vec::with_capacity(items.len());
        for e in items {
            match e {
                Expr::Num(r) => c *= r,
                Expr::Mul(inner) => {
                    for i in inner {
                        match i {
                            Expr::Num(r) => c *= r,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::Num(c);
        }
        if !c.is_one() {
            out.insert(0, Expr::Num(c));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Mul(out)
        }
    }

    pub fn pow(base: Expr, e: i64) -> Result<Expr, SymError> {
        if e == 0 {
            return Ok(Expr::one());
        }
        if e == 1 {
            return Ok(base);
        }
        Ok(match base {
            Expr::Num(r) => {
                if r.is_zero() && e < 0 {
                    return Err(SymError::DivisionByZero);
                }
                Expr::Num(rat_pow(&r, e))
            }
            Expr::Pow(b, k) => Expr::pow(*b, k * e)?,
            other => Expr::Pow(Box::new(other), e),
        })
    }

    /// `a / b` as `a * b^-1`.
    pub fn div(a: Expr, b: Expr) -> Result<Expr, SymError> {
        Ok(Expr::mul(a, Expr::pow(b, -1)?))
    }

    pub fn apply(f: Func, args: Vec<Expr>) -> Expr {
        Expr::Apply(f, args)
    }

    /// Visits every node in pre-order.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(v) | Expr::Mul(v) | Expr::Apply(_, v) => v.iter().for_each(|e| e.walk(f)),
            Expr::Pow(b, _) => b.walk(f),
            _ => {}
        }
    }

    pub fn syms(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Sym(s) = e {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
        });
        out
    }

    pub fn contains_sym(&self, s: Sym) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Sym(t) if *t == s) {
                found = true;
            }
        });
        found
    }

    pub fn has_apply(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Apply(..)) {
                found = true;
            }
        });
        found
    }

    /// Rebuilds bottom-up, letting `f` replace any node.
    pub fn rewrite(&self, f: &impl Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(r) = f(self) {
            return r;
        }
        match self {
            Expr::Num(_) | Expr::Sym(_) => self.clone(),
            Expr::Add(v) => Expr::sum(v.iter().map(|e| e.rewrite(f)).collect()),
            Expr::Mul(v) => Expr::product(v.iter().map(|e| e.rewrite(f)).collect()),
            Expr::Pow(b, e) => Expr::pow(b.rewrite(f), *e).unwrap_or_else(|_| Expr::Pow(Box::new(b.rewrite(f)), *e)),
            Expr::Apply(func, args) => Expr::Apply(*func, args.iter().map(|e| e.rewrite(f)).collect()),
        }
    }

    pub fn substitute(&self, s: Sym, value: &Expr) -> Expr {
        self.rewrite(&|e| match e {
            Expr::Sym(t) if *t == s => Some(value.clone()),
            _ => None,
        })
    }

    /// Formal derivative. Dependent variables and kernels are functions of
    /// every independent variable, producing derivative atoms; all other
    /// symbols are constants.
    pub fn differentiate(&self, s: Sym) -> Expr {
        match self {
            Expr::Num(_) => Expr::zero(),
            Expr::Sym(t) => {
                if *t == s {
                    Expr::one()
                } else if matches!(t.kind(), SymKind::DependentVar | SymKind::Kernel) {
                    Expr::Sym(Sym::derivative(*t, &[(s, 1)]))
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(v) => Expr::sum(v.iter().map(|e| e.differentiate(s)).collect()),
            Expr::Mul(v) => {
                let mut terms = Vec::new();
                for i in 0..v.len() {
                    let d = v[i].differentiate(s);
                    if d.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = v.clone();
                    factors[i] = d;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Expr::Pow(b, e) => {
                let d = b.differentiate(s);
                if d.is_zero() {
                    return Expr::zero();
                }
                let lowered = Expr::pow((**b).clone(), e - 1).expect("nonzero base");
                Expr::product(vec![Expr::int(*e), lowered, d])
            }
            Expr::Apply(f, args) => {
                let inner = args[0].differentiate(s);
                if inner.is_zero() {
                    return Expr::zero();
                }
                let outer = func_derivative(*f, args);
                Expr::mul(outer, inner)
            }
        }
    }

    /// Converts to a Laurent polynomial; fails on function applications and
    /// on negative powers of sums.
    pub fn to_poly(&self) -> Result<Poly, SymError> {
        Ok(match self {
            Expr::Num(r) => Poly::constant(r.clone()),
            Expr::Sym(s) => Poly::var(*s),
            Expr::Add(v) => {
                let mut acc = Poly::zero();
                for e in v {
                    acc = acc + e.to_poly()?;
                }
                acc
            }
            Expr::Mul(v) => {
                let mut acc = Poly::one();
                for e in v {
                    acc = &acc * &e.to_poly()?;
                }
                acc
            }
            Expr::Pow(b, e) => {
                let p = b.to_poly()?;
                if *e < 0 && p.is_zero() {
                    return Err(SymError::DivisionByZero);
                }
                p.pow_signed(*e as i32)
                    .ok_or_else(|| SymError::NotPolynomial(self.to_string()))?
            }
            Expr::Apply(..) => return Err(SymError::NotPolynomial(self.to_string())),
        })
    }

    /// Canonical expanded form.
    pub fn expand(&self) -> Result<Expr, SymError> {
        Ok(Expr::from_poly(&self.to_poly()?))
    }

    /// Terms in descending monomial order.
    pub fn from_poly(p: &Poly) -> Expr {
        let terms: Vec<Expr> = p
            .terms()
            .rev()
            .map(|(m, c)| {
                let mut factors = vec![Expr::Num(c.clone())];
                for &(s, e) in m.pairs().iter().rev() {
                    factors.push(if e == 1 { Expr::Sym(s) } else { Expr::Pow(Box::new(Expr::Sym(s)), e as i64) });
                }
                Expr::product(factors)
            })
            .collect();
        Expr::sum(terms)
    }

    /// Floating-point evaluation for diagnostics; `None` on missing values.
    pub fn eval_f64(&self, env: &HashMap<Sym, f64>) -> Option<f64> {
        Some(match self {
            Expr::Num(r) => super::rational::to_f64(r),
            Expr::Sym(s) => *env.get(s)?,
            Expr::Add(v) => {
                let mut acc = 0.0;
                for e in v {
                    acc += e.eval_f64(env)?;
                }
                acc
            }
            Expr::Mul(v) => {
                let mut acc = 1.0;
                for e in v {
                    acc *= e.eval_f64(env)?;
                }
                acc
            }
            Expr::Pow(b, e) => b.eval_f64(env)?.powi(*e as i32),
            Expr::Apply(f, args) => {
                let x = args[0].eval_f64(env)?;
                match f {
                    Func::Tanh => x.tanh(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sn | Func::Cn | Func::Dn => {
                        let k = args.get(1)?.eval_f64(env)?;
                        let (sn, cn, dn) = jacobi_f64(x, k);
                        match f {
                            Func::Sn => sn,
                            Func::Cn => cn,
                            _ => dn,
                        }
                    }
                    Func::Kernel(_) => return None,
                }
            }
        })
    }

    fn is_negative_term(&self) -> bool {
        match self {
            Expr::Num(r) => r.is_negative(),
            Expr::Mul(v) => matches!(v.first(), Some(Expr::Num(r)) if r.is_negative()),
            _ => false,
        }
    }
}

fn func_derivative(f: Func, args: &[Expr]) -> Expr {
    let a = |g: Func| Expr::Apply(g, args.to_vec());
    let sq = |g: Func| Expr::Pow(Box::new(a(g)), 2);
    match f {
        Func::Tanh => Expr::sub(Expr::one(), sq(Func::Tanh)),
        Func::Tan => Expr::add(Expr::one(), sq(Func::Tan)),
        Func::Exp => a(Func::Exp),
        Func::Sinh => a(Func::Cosh),
        Func::Cosh => a(Func::Sinh),
        Func::Sin => a(Func::Cos),
        Func::Cos => Expr::neg(a(Func::Sin)),
        Func::Sn => Expr::mul(a(Func::Cn), a(Func::Dn)),
        Func::Cn => Expr::neg(Expr::mul(a(Func::Sn), a(Func::Dn))),
        Func::Dn => {
            let k = args[1].clone();
            Expr::product(vec![Expr::int(-1), Expr::Pow(Box::new(k), 2), a(Func::Sn), a(Func::Cn)])
        }
        Func::Kernel(s) => {
            let wave = Sym::intern("xi", SymKind::IndependentVar);
            Expr::Apply(Func::Kernel(Sym::derivative(s, &[(wave, 1)])), args.to_vec())
        }
    }
}

/// Jacobi elliptic functions by the descending Landen (AGM) scheme.
pub fn jacobi_f64(u: f64, k: f64) -> (f64, f64, f64) {
    let m = k * k;
    if m < 1e-15 {
        return (u.sin(), u.cos(), 1.0);
    }
    if (m - 1.0).abs() < 1e-15 {
        let s = 1.0 / u.cosh();
        return (u.tanh(), s, s);
    }
    let mut a = vec![1.0f64];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    let mut n = 0;
    while c[n].abs() > 1e-16 && n < 30 {
        let an = a[n];
        a.push((an + b) / 2.0);
        c.push((an - b) / 2.0);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        phi = (phi + (c[i] / a[i] * phi.sin()).asin()) / 2.0;
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(r) => f.write_str(&fmt_rational(r)),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Add(v) => {
                for (i, t) in v.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{t}")?;
                    } else if t.is_negative_term() {
                        write!(f, " - {}", Expr::neg(t.clone()))?;
                    } else {
                        write!(f, " + {t}")?;
                    }
                }
                Ok(())
            }
            Expr::Mul(v) => {
                let mut first = true;
                for (i, t) in v.iter().enumerate() {
                    if i == 0 {
                        if let Expr::Num(r) = t {
                            if (-r).is_one() {
                                f.write_str("-")?;
                                continue;
                            }
                        }
                    }
                    if !first {
                        f.write_str("*")?;
                    }
                    first = false;
                    match t {
                        Expr::Add(_) => write!(f, "({t})")?,
                        Expr::Num(r) if i > 0 && (r.is_negative() || !r.is_integer()) => write!(f, "({t})")?,
                        _ => write!(f, "{t}")?,
                    }
                }
                Ok(())
            }
            Expr::Pow(b, e) => {
                match &**b {
                    Expr::Sym(_) | Expr::Apply(..) => write!(f, "{b}")?,
                    Expr::Num(r) if r.is_integer() && !r.is_negative() => write!(f, "{b}")?,
                    _ => write!(f, "({b})")?,
                }
                write!(f, "^{e}")
            }
            Expr::Apply(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Monomial helper used by tests and callers building expected forms.
pub fn monomial_expr(c: Rational, pairs: &[(Sym, i32)]) -> Expr {
    Expr::from_poly(&Poly::term(Monomial::from_pairs(pairs.iter().copied()), c))
}

#[cfg(test)]
mod tests {
    use super::super::rational::rat;
    use super::*;

    fn s(n: &str, k: SymKind) -> Expr {
        Expr::Sym(Sym::intern(n, k))
    }

    #[test]
    fn additive_identity() {
        let x = s("x", SymKind::IndependentVar);
        assert_eq!(expr_arith(&Expr::add(x.clone(), Expr::zero()), &Expr::zero(), ArithOp::Add).unwrap(), x);
    }

    #[test]
    fn reciprocal_product() {
        let r = expr_arith(&Expr::num(rat(2, 3)), &Expr::num(rat(3, 2)), ArithOp::Mul).unwrap();
        assert_eq!(r, Expr::one());
    }

    #[test]
    fn non_integer_exponent_rejected() {
        let x = s("x", SymKind::IndependentVar);
        assert!(expr_arith(&x, &Expr::num(rat(1, 2)), ArithOp::Pow).is_err());
    }

    #[test]
    fn square_expansion_matches_independent_multiply() {
        let f = s("F", SymKind::Kernel);
        let one_minus = Expr::sub(Expr::one(), Expr::pow(f.clone(), 2).unwrap());
        let prod = expr_arith(&one_minus, &one_minus, ArithOp::Mul).unwrap().expand().unwrap();
        // coefficient list of 1 - 2F^2 + F^4 computed by convolution
        let c = [1i64, 0, -1];
        let mut conv = [0i64; 5];
        for i in 0..3 {
            for j in 0..3 {
                conv[i + j] += c[i] * c[j];
            }
        }
        let fs = Sym::lookup("F").unwrap();
        let expected = Poly::from_terms(conv.iter().enumerate().map(|(k, v)| (Monomial::power(fs, k as i32), int(*v))));
        assert_eq!(prod.to_poly().unwrap(), expected);
    }

    #[test]
    fn power_and_product_rules() {
        let xi = Sym::intern("xi", SymKind::IndependentVar);
        let fsym = Sym::intern("F", SymKind::Kernel);
        let gsym = Sym::intern("G", SymKind::Kernel);
        let f = Expr::Sym(fsym);
        let g = Expr::Sym(gsym);
        let df = Expr::Sym(Sym::derivative(fsym, &[(xi, 1)]));
        let dg = Expr::Sym(Sym::derivative(gsym, &[(xi, 1)]));
        let cube = Expr::pow(f.clone(), 3).unwrap().differentiate(xi);
        let expected = Expr::product(vec![Expr::int(3), Expr::pow(f.clone(), 2).unwrap(), df.clone()]);
        assert_eq!(cube.to_poly().unwrap(), expected.to_poly().unwrap());
        let c = s("c", SymKind::FreeConstant);
        assert!(c.differentiate(xi).is_zero());
        let fg = Expr::mul(f.clone(), g.clone()).differentiate(xi);
        let expected = Expr::add(Expr::mul(df, g), Expr::mul(f, dg));
        assert_eq!(fg.to_poly().unwrap(), expected.to_poly().unwrap());
    }

    #[test]
    fn jacobi_limits_and_identities() {
        let (sn, cn, dn) = jacobi_f64(0.7, 0.6);
        assert!((sn * sn + cn * cn - 1.0).abs() < 1e-14);
        assert!((0.36 * sn * sn + dn * dn - 1.0).abs() < 1e-14);
        // derivative check by central difference
        let h = 1e-5;
        let (sp, _, _) = jacobi_f64(0.7 + h, 0.6);
        let (sm, _, _) = jacobi_f64(0.7 - h, 0.6);
        assert!(((sp - sm) / (2.0 * h) - cn * dn).abs() < 1e-8);
    }

    #[test]
    fn display_signs() {
        let u = s("u", SymKind::DependentVar);
        let e = Expr::sum(vec![u.clone(), Expr::neg(Expr::pow(u.clone(), 2).unwrap()), Expr::mul(Expr::num(rat(-3, 4)), u)]);
        assert_eq!(e.to_string(), "u - u^2 - 3/4*u");
    }
}
