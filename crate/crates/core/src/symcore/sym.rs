use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Serialize};

/// Interned symbol. The numeric index is the creation order, which is also the
/// monomial order used everywhere.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(u32);

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymKind {
    IndependentVar,
    DependentVar,
    WaveParam,
    AnsatzCoeff,
    Kernel,
    Modulus,
    FreeConstant,
}

/// Derivative atom data: `base` differentiated `n` times in each listed variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DerivInfo {
    pub base: Sym,
    pub orders: Vec<(Sym, u32)>,
}

impl DerivInfo {
    pub fn total_order(&self) -> u32 {
        self.orders.iter().map(|(_, n)| n).sum()
    }

    pub fn order_in(&self, var: Sym) -> u32 {
        self.orders
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }
}

struct Entry {
    name: String,
    kind: SymKind,
    deriv: Option<DerivInfo>,
}

#[derive(Default)]
struct Table {
    entries: Vec<Entry>,
    by_name: HashMap<String, Sym>,
}

fn table() -> &'static RwLock<Table> {
    static TABLE: OnceLock<RwLock<Table>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Table::default()))
}

impl Sym {
    /// Returns the symbol with this name, creating it with `kind` if absent.
    /// An existing symbol keeps the kind it was created with.
    pub fn intern(name: &str, kind: SymKind) -> Sym {
        if let Some(s) = Sym::lookup(name) {
            return s;
        }
        let mut t = table().write().expect("symbol table poisoned");
        if let Some(&s) = t.by_name.get(name) {
            return s;
        }
        let s = Sym(t.entries.len() as u32);
        t.entries.push(Entry {
            name: name.to_string(),
            kind,
            deriv: None,
        });
        t.by_name.insert(name.to_string(), s);
        s
    }

    pub fn lookup(name: &str) -> Option<Sym> {
        table()
            .read()
            .expect("symbol table poisoned")
            .by_name
            .get(name)
            .copied()
    }

    /// Canonical derivative atom of `base`. Orders of an existing derivative
    /// atom are merged, so `derivative(u_x, x)` is `u_xx`.
    pub fn derivative(base: Sym, orders: &[(Sym, u32)]) -> Sym {
        let (root, mut merged) = match base.deriv_info() {
            Some(d) => (d.base, d.orders),
            None => (base, Vec::new()),
        };
        for &(v, n) in orders {
            if n == 0 {
                continue;
            }
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += n,
                None => merged.push((v, n)),
            }
        }
        if merged.is_empty() {
            return root;
        }
        merged.sort_by_key(|(v, _)| v.name());
        let name = derivative_name(root, &merged);
        if let Some(s) = Sym::lookup(&name) {
            return s;
        }
        let kind = root.kind();
        let mut t = table().write().expect("symbol table poisoned");
        if let Some(&s) = t.by_name.get(&name) {
            return s;
        }
        let s = Sym(t.entries.len() as u32);
        t.entries.push(Entry {
            name: name.clone(),
            kind,
            deriv: Some(DerivInfo {
                base: root,
                orders: merged,
            }),
        });
        t.by_name.insert(name, s);
        s
    }

    pub fn name(self) -> String {
        table().read().expect("symbol table poisoned").entries[self.0 as usize]
            .name
            .clone()
    }

    pub fn kind(self) -> SymKind {
        table().read().expect("symbol table poisoned").entries[self.0 as usize].kind
    }

    pub fn deriv_info(self) -> Option<DerivInfo> {
        table().read().expect("symbol table poisoned").entries[self.0 as usize]
            .deriv
            .clone()
    }

    pub fn is_derivative(self) -> bool {
        self.deriv_info().is_some()
    }

    /// The underived symbol (itself unless a derivative atom).
    pub fn root(self) -> Sym {
        self.deriv_info().map(|d| d.base).unwrap_or(self)
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

fn derivative_name(root: Sym, orders: &[(Sym, u32)]) -> String {
    let base = root.name();
    let vars: Vec<String> = orders.iter().map(|(v, _)| v.name()).collect();
    let simple = vars.iter().all(|v| v.len() == 1) && !base.contains(['[', '_']);
    if simple {
        let mut s = base;
        s.push('_');
        for ((_, n), v) in orders.iter().zip(&vars) {
            for _ in 0..*n {
                s.push_str(v);
            }
        }
        s
    } else {
        let mut s = format!("D[{base}");
        for ((_, n), v) in orders.iter().zip(&vars) {
            for _ in 0..*n {
                s.push(',');
                s.push_str(v);
            }
        }
        s.push(']');
        s
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_idempotent() {
        let a = Sym::intern("symtest_a", SymKind::FreeConstant);
        let b = Sym::intern("symtest_a", SymKind::WaveParam);
        assert_eq!(a, b);
        assert_eq!(b.kind(), SymKind::FreeConstant);
    }

    #[test]
    fn derivative_atoms_merge_and_commute() {
        let u = Sym::intern("u", SymKind::DependentVar);
        let t = Sym::intern("t", SymKind::IndependentVar);
        let x = Sym::intern("x", SymKind::IndependentVar);
        let uxt = Sym::derivative(u, &[(x, 1), (t, 1)]);
        let utx = Sym::derivative(Sym::derivative(u, &[(t, 1)]), &[(x, 1)]);
        assert_eq!(uxt, utx);
        assert_eq!(uxt.name(), "u_tx");
        let d = uxt.deriv_info().unwrap();
        assert_eq!(d.base, u);
        assert_eq!(d.total_order(), 2);
    }

    #[test]
    fn long_variable_names_use_bracket_form() {
        let v = Sym::intern("v", SymKind::DependentVar);
        let xi = Sym::intern("xi", SymKind::IndependentVar);
        let vpp = Sym::derivative(v, &[(xi, 2)]);
        assert_eq!(vpp.name(), "D[v,xi,xi]");
    }
}
