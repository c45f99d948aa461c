//! Expansion ansatze and order selection by degree balancing.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::auxreg::AuxSystem;
use crate::collect::{derivative_tower, expand_monomial};
use crate::reduce::{monomial_split, OdeSpec, ReduceError};
use crate::symcore::{int, Expr, LaurentForm, Monomial, Poly, Rational, Sym, SymError, SymKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnsatzError {
    #[error("shape has arity {shape} but the auxiliary system has {aux} kernels")]
    ArityMismatch { shape: usize, aux: usize },
    #[error("shape must have 2^arity blocks of arity orders each")]
    MalformedShape,
    #[error("no balancing shape with orders up to {0}; raise --max-order or try another auxiliary system")]
    NoBalance(u32),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Per-kernel Laurent orders for each marker block. Block `mask` multiplies
/// the product of the markers whose bits are set; block 0 is the marker-free
/// part. A block with orders `n` spans exponents `-n_i..=n_i` in kernel `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AnsatzShape {
    pub arity: usize,
    pub blocks: Vec<Vec<u32>>,
}

impl AnsatzShape {
    pub fn new(arity: usize, blocks: Vec<Vec<u32>>) -> Result<AnsatzShape, AnsatzError> {
        if !(1..=3).contains(&arity) || blocks.len() != 1 << arity || blocks.iter().any(|b| b.len() != arity) {
            return Err(AnsatzError::MalformedShape);
        }
        Ok(AnsatzShape { arity, blocks })
    }

    /// `m` for the marker-free part and `m̂` for the marker block.
    pub fn single(m: u32, mhat: u32) -> AnsatzShape {
        AnsatzShape {
            arity: 1,
            blocks: vec![vec![m], vec![mhat]],
        }
    }

    /// Every block gets the same per-kernel orders.
    pub fn uniform(base: &[u32]) -> AnsatzShape {
        let arity = base.len();
        AnsatzShape {
            arity,
            blocks: vec![base.to_vec(); 1 << arity],
        }
    }

    /// Flattened orders, block by block.
    pub fn orders(&self) -> Vec<u32> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn from_orders(arity: usize, orders: &[u32]) -> Result<AnsatzShape, AnsatzError> {
        if orders.len() == arity {
            return Ok(AnsatzShape::uniform(orders));
        }
        if orders.len() != arity << arity {
            return Err(AnsatzError::MalformedShape);
        }
        AnsatzShape::new(arity, orders.chunks(arity).map(|c| c.to_vec()).collect())
    }

    pub fn coefficient_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&n| 2 * n as usize + 1).product::<usize>())
            .sum()
    }

    pub fn block_name(&self, mask: usize) -> &'static str {
        match (self.arity, mask) {
            (_, 0) => "a",
            (1, 1) | (2, 1) => "b",
            (2, 2) => "c",
            (2, 3) => "d",
            (3, 1) => "b1",
            (3, 2) => "b2",
            (3, 4) => "b3",
            (3, 3) => "c1",
            (3, 5) => "c2",
            (3, 6) => "c3",
            (3, 7) => "d",
            _ => "x",
        }
    }
}

impl fmt::Display for AnsatzShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arity == 1 {
            return write!(f, "m={} mhat={}", self.blocks[0][0], self.blocks[1][0]);
        }
        let parts: Vec<String> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(mask, b)| {
                let o: Vec<String> = b.iter().map(|n| n.to_string()).collect();
                format!("{}({})", self.block_name(mask).to_uppercase(), o.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A concrete ansatz with fresh coefficient symbols.
#[derive(Clone, Debug)]
pub struct AnsatzInstance {
    pub shape: AnsatzShape,
    pub kernels: Vec<Sym>,
    pub markers: Vec<Sym>,
    /// All coefficients in block order.
    pub coeffs: Vec<Sym>,
    /// Per block: (kernel exponents, coefficient).
    pub terms: Vec<Vec<(Vec<i32>, Sym)>>,
    pub body: Expr,
}

impl AnsatzInstance {
    pub fn body_poly(&self) -> Result<Poly, SymError> {
        self.body.to_poly()
    }
}

pub(crate) fn index_label(i: i32, compact: bool) -> String {
    match (compact, i) {
        (true, i) if i < 0 => format!("m{}", -i),
        (true, i) => i.to_string(),
        (false, i) if i < 0 => format!("m{}", -i),
        (false, i) => format!("p{i}"),
    }
}

fn exponent_grid(orders: &[u32]) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for &n in orders {
        let n = n as i32;
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i32>| {
                (-n..=n).map(move |e| {
                    let mut p = prefix.clone();
                    p.push(e);
                    p
                })
            })
            .collect();
    }
    out
}

/// Builds the ansatz body `sum over blocks of (marker product) * block(F,..)`.
/// Single-arity names are `a1, a0, am1, b1, ...`; higher arities spell each
/// index as `p<n>` or `m<n>`, e.g. `ap1m2`.
pub fn build(shape: &AnsatzShape, aux: &AuxSystem) -> Result<AnsatzInstance, AnsatzError> {
    if shape.arity != aux.arity() {
        return Err(AnsatzError::ArityMismatch {
            shape: shape.arity,
            aux: aux.arity(),
        });
    }
    let compact = shape.arity == 1;
    let mut coeffs = Vec::new();
    let mut terms = Vec::new();
    let mut summands = Vec::new();
    for (mask, orders) in shape.blocks.iter().enumerate() {
        let mut block = Vec::new();
        let mut block_terms = Vec::new();
        for exps in exponent_grid(orders) {
            let label: String = exps.iter().map(|&e| index_label(e, compact)).collect();
            let c = Sym::intern(&format!("{}{}", shape.block_name(mask), label), SymKind::AnsatzCoeff);
            coeffs.push(c);
            block.push((exps.clone(), c));
            let mut factors = vec![Expr::Sym(c)];
            for (k, &e) in aux.kernels.iter().zip(&exps) {
                if e != 0 {
                    factors.push(Expr::pow(Expr::Sym(*k), e as i64)?);
                }
            }
            block_terms.push(Expr::product(factors));
        }
        let inner = Expr::sum(block_terms);
        let mut factors: Vec<Expr> = (0..shape.arity)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| Expr::Sym(aux.markers[i]))
            .collect();
        factors.push(inner);
        summands.push(Expr::product(factors));
        terms.push(block);
    }
    Ok(AnsatzInstance {
        shape: shape.clone(),
        kernels: aux.kernels.clone(),
        markers: aux.markers.clone(),
        coeffs,
        terms,
        body: Expr::sum(summands),
    })
}

/// Top and bottom kernel exponents of each marker component.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DegreeRecord {
    /// mask -> per kernel (top, bottom)
    pub components: BTreeMap<u8, Vec<(i32, i32)>>,
}

impl DegreeRecord {
    pub fn of(p: &Poly, aux: &AuxSystem) -> Result<DegreeRecord, SymError> {
        let form = LaurentForm::from_poly(p, &aux.kernels, &aux.markers)?;
        let mut components: BTreeMap<u8, Vec<(i32, i32)>> = BTreeMap::new();
        for k in form.terms.keys() {
            let slot = components
                .entry(k.markers)
                .or_insert_with(|| vec![(i32::MIN, i32::MAX); aux.arity()]);
            for (d, &e) in slot.iter_mut().zip(&k.exps) {
                d.0 = d.0.max(e);
                d.1 = d.1.min(e);
            }
        }
        Ok(DegreeRecord { components })
    }

    /// Componentwise union of extents.
    pub fn envelope(&mut self, other: &DegreeRecord) {
        for (mask, ds) in &other.components {
            match self.components.get_mut(mask) {
                Some(mine) => {
                    for (a, b) in mine.iter_mut().zip(ds) {
                        a.0 = a.0.max(b.0);
                        a.1 = a.1.min(b.1);
                    }
                }
                None => {
                    self.components.insert(*mask, ds.clone());
                }
            }
        }
    }

    pub fn top(&self, mask: u8) -> Option<Vec<i32>> {
        self.components.get(&mask).map(|v| v.iter().map(|d| d.0).collect())
    }
}

const SPECIALIZATION_SEEDS: [u64; 2] = [0x5eed_0001, 0x5eed_0002];

fn random_value(rng: &mut ChaCha8Rng) -> Rational {
    let n: i64 = rng.gen_range(2..=60);
    if rng.gen_bool(0.5) {
        int(n)
    } else {
        int(-n)
    }
}

/// Replaces every symbol outside `keep` by a random small integer.
fn specialize(p: &Poly, keep: &[Sym], rng: &mut ChaCha8Rng, cache: &mut BTreeMap<Sym, Rational>) -> Poly {
    for s in p.vars() {
        if !keep.contains(&s) && !cache.contains_key(&s) {
            cache.insert(s, random_value(rng));
        }
    }
    p.evaluate(cache)
}

fn kernel_atoms(aux: &AuxSystem) -> Vec<Sym> {
    aux.kernels.iter().chain(aux.markers.iter()).copied().collect()
}

/// Degrees of the monomial `mono` of `o` after substituting the ansatz of
/// `shape`. Coefficients and parameters are specialized to random integers,
/// then the monomial is expanded exactly; the extents are the union over two
/// independent specializations, so an accidental cancellation would have to
/// occur twice.
pub fn formal_degree(mono: &Poly, shape: &AnsatzShape, aux: &AuxSystem) -> Result<DegreeRecord, AnsatzError> {
    let a = build(shape, aux)?;
    let body = a.body_poly()?;
    degree_of_body(mono, &body, aux)
}

fn degree_of_body(mono: &Poly, body: &Poly, aux: &AuxSystem) -> Result<DegreeRecord, AnsatzError> {
    let dep = crate::reduce::ode_dependent();
    let order = mono
        .vars()
        .into_iter()
        .filter_map(|s| crate::reduce::atom_order(dep, s))
        .max()
        .unwrap_or(0);
    let keep = kernel_atoms(aux);
    let mut rec = DegreeRecord::default();
    for seed in SPECIALIZATION_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = BTreeMap::new();
        let v = specialize(body, &keep, &mut rng, &mut values);
        let tower = derivative_tower(&v, aux, order);
        let mut total = Poly::zero();
        for (m, c) in mono.terms() {
            let mut cvals = values.clone();
            let (params, atoms) = m.split(|s| crate::reduce::atom_order(dep, s).is_none());
            let pc = specialize(&Poly::term(params, c.clone()), &keep, &mut rng, &mut cvals);
            let c = pc.as_constant().unwrap_or_else(|| int(1));
            total = total + expand_monomial(&atoms, &c, dep, &tower, aux);
        }
        rec.envelope(&DegreeRecord::of(&total, aux)?);
    }
    Ok(rec)
}

/// Generic Laurent polynomial in the kernels with random coefficients.
fn generic_body(base: &[u32], aux: &AuxSystem, seed: u64) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Poly::zero();
    for exps in exponent_grid(base) {
        let m = Monomial::from_pairs(aux.kernels.iter().copied().zip(exps));
        p.add_term(m, random_value(&mut rng));
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Balance {
    pub shape: AnsatzShape,
    /// Per-kernel order shared by every block.
    pub base: Vec<u32>,
    /// Balance also holds with every order raised by one, so the chosen
    /// shape is only the smallest of a family.
    pub degenerate: bool,
}

fn records_for(o: &OdeSpec, split: &[Poly], base: &[u32], aux: &AuxSystem) -> Result<Vec<DegreeRecord>, AnsatzError> {
    let mut out = vec![DegreeRecord::default(); split.len()];
    for seed in SPECIALIZATION_SEEDS {
        let body = generic_body(base, aux, seed);
        let tower = derivative_tower(&body, aux, o.order());
        for (rec, mono) in out.iter_mut().zip(split) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ef);
            let mut vals = BTreeMap::new();
            let (m, c) = mono.terms().next().expect("split yields single terms");
            let (params, atoms) = m.split(|s| crate::reduce::atom_order(o.dependent, s).is_none());
            let pc = specialize(&Poly::term(params, c.clone()), &kernel_atoms(aux), &mut rng, &mut vals);
            let c = pc.as_constant().unwrap_or_else(|| int(1));
            let p = expand_monomial(&atoms, &c, o.dependent, &tower, aux);
            rec.envelope(&DegreeRecord::of(&p, aux)?);
        }
    }
    Ok(out)
}

/// Top and bottom extents of `M1` and `M2` agree in every component either
/// carries; a component carried by only one of them is compared with the
/// envelope of all the other monomials.
fn balanced(recs: &[DegreeRecord]) -> bool {
    let (r1, r2) = (&recs[0], &recs[1]);
    let masks: std::collections::BTreeSet<u8> = r1.components.keys().chain(r2.components.keys()).copied().collect();
    for mask in masks {
        let (a, b) = match (r1.components.get(&mask), r2.components.get(&mask)) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            (Some(a), None) | (None, Some(a)) => {
                let lone = if r1.components.contains_key(&mask) { 0 } else { 1 };
                let mut env = DegreeRecord::default();
                for (i, r) in recs.iter().enumerate() {
                    if i != lone {
                        if let Some(d) = r.components.get(&mask) {
                            let mut one = DegreeRecord::default();
                            one.components.insert(mask, d.clone());
                            env.envelope(&one);
                        }
                    }
                }
                match env.components.get(&mask) {
                    Some(e) => (a.clone(), e.clone()),
                    None => continue,
                }
            }
            (None, None) => continue,
        };
        if a != b {
            return false;
        }
    }
    true
}

fn shapes_by_size(arity: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut all = exponent_grid(&vec![max_order; arity])
        .into_iter()
        .filter(|v| v.iter().all(|&e| e >= 0))
        .map(|v| v.into_iter().map(|e| e as u32).collect::<Vec<u32>>())
        .filter(|v| v.iter().any(|&e| e > 0))
        .collect::<Vec<_>>();
    all.sort_by_key(|v| (v.iter().sum::<u32>(), v.clone()));
    all
}

/// Smallest per-kernel orders (by total, then lexicographically) at which
/// the highest-derivative monomial balances the designated nonlinear one.
/// Every block of the returned shape uses these orders.
pub fn balance(o: &OdeSpec, aux: &AuxSystem, arity: usize, max_order: u32) -> Result<Balance, AnsatzError> {
    if arity != aux.arity() {
        return Err(AnsatzError::ArityMismatch { shape: arity, aux: aux.arity() });
    }
    let split = monomial_split(o)?;
    for base in shapes_by_size(arity, max_order) {
        let recs = records_for(o, &split, &base, aux)?;
        if balanced(&recs) {
            let up: Vec<u32> = base.iter().map(|n| n + 1).collect();
            let degenerate = balanced(&records_for(o, &split, &up, aux)?);
            return Ok(Balance {
                shape: AnsatzShape::uniform(&base),
                base,
                degenerate,
            });
        }
    }
    Err(AnsatzError::NoBalance(max_order))
}
