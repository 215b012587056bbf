//! Formal products of Milnor symbols `{a_1, ..., a_d}` over a standard
//! higher local field.
//!
//! Symbols are kept as formal products; relations (Steinberg, `{a, -a}`,
//! antisymmetry) are detected but never used to canonicalize beyond sorting
//! entries and merging equal factors.

use std::fmt;

use crate::error::{Error, Result};
use crate::laurent_tower::{Tower, TowerElement};

/// One factor `{entries}^exp`.
#[derive(Clone, Debug)]
pub struct SymbolFactor {
    pub entries: Vec<TowerElement>,
    pub exp: i64,
}

#[derive(Clone, Debug)]
pub struct MilnorSymbol {
    tower: Tower,
    factors: Vec<SymbolFactor>,
}

/// Which trivial relation a single factor visibly satisfies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Triviality {
    /// `a_i + a_j = 1` for some `i != j`.
    pub steinberg: bool,
    /// `a_i + a_j = 0` for some `i != j`.
    pub skew: bool,
}

impl Triviality {
    pub fn any(&self) -> bool {
        self.steinberg || self.skew
    }
}

fn same_ambient(a: &Tower, b: &Tower) -> bool {
    a.vars() == b.vars() && a.base() == b.base()
}

fn entries_equal(a: &TowerElement, b: &TowerElement) -> bool {
    a.sub(b).is_zero()
}

impl SymbolFactor {
    pub fn triviality(&self) -> Triviality {
        let mut t = Triviality::default();
        let one = self.entries.first().map(|e| TowerElement::one(e.tower()));
        for i in 0..self.entries.len() {
            for j in i + 1..self.entries.len() {
                let s = self.entries[i].add(&self.entries[j]);
                if s.is_zero() {
                    t.skew = true;
                }
                if let Some(one) = &one {
                    if s.sub(one).is_zero() {
                        t.steinberg = true;
                    }
                }
            }
        }
        t
    }

    fn same_entries(&self, o: &Self) -> bool {
        self.entries.len() == o.entries.len() && self.entries.iter().zip(&o.entries).all(|(a, b)| entries_equal(a, b))
    }
}

impl MilnorSymbol {
    /// The single symbol `{a_1, ..., a_d}`.
    pub fn new(tower: &Tower, entries: Vec<TowerElement>) -> Result<Self> {
        if entries.len() != tower.dim() {
            return Err(Error::Config(format!("a symbol needs {} entries, got {}", tower.dim(), entries.len())));
        }
        for (i, e) in entries.iter().enumerate() {
            if !same_ambient(e.tower(), tower) {
                return Err(Error::AmbientMismatch);
            }
            if e.is_zero() {
                return Err(Error::ZeroEntry(i));
            }
        }
        Ok(MilnorSymbol { tower: tower.clone(), factors: vec![SymbolFactor { entries, exp: 1 }] })
    }

    /// The empty product.
    pub fn identity(tower: &Tower) -> Self {
        MilnorSymbol { tower: tower.clone(), factors: Vec::new() }
    }

    /// Assemble from factors, pruning zero exponents.
    pub fn from_factors(tower: &Tower, factors: Vec<SymbolFactor>) -> Result<Self> {
        let mut s = Self::identity(tower);
        for f in factors {
            if f.exp == 0 {
                continue;
            }
            let mut single = Self::new(tower, f.entries)?;
            single.factors[0].exp = f.exp;
            s.factors.extend(single.factors);
        }
        Ok(s)
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }
    pub fn factors(&self) -> &[SymbolFactor] {
        &self.factors
    }
    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Relations visible on a single-factor symbol.
    pub fn triviality(&self) -> Triviality {
        self.factors.iter().fold(Triviality::default(), |acc, f| {
            let t = f.triviality();
            Triviality { steinberg: acc.steinberg || t.steinberg, skew: acc.skew || t.skew }
        })
    }

    /// True when every factor is visibly trivial.
    pub fn is_visibly_trivial(&self) -> bool {
        self.normalized().factors.iter().all(|f| f.triviality().any())
    }

    pub fn product(&self, o: &Self) -> Result<Self> {
        if !same_ambient(&self.tower, &o.tower) {
            return Err(Error::AmbientMismatch);
        }
        let mut s = self.clone();
        s.factors.extend(o.factors.iter().cloned());
        Ok(s.merged())
    }

    pub fn inverse(&self) -> Self {
        self.pow(-1)
    }

    pub fn pow(&self, k: i64) -> Self {
        let factors = if k == 0 {
            Vec::new()
        } else {
            self.factors.iter().map(|f| SymbolFactor { entries: f.entries.clone(), exp: f.exp * k }).collect()
        };
        MilnorSymbol { tower: self.tower.clone(), factors }
    }

    /// Combine factors with equal entry lists.
    fn merged(mut self) -> Self {
        let mut out: Vec<SymbolFactor> = Vec::new();
        for f in self.factors.drain(..) {
            match out.iter_mut().find(|g| g.same_entries(&f)) {
                Some(g) => g.exp += f.exp,
                None => out.push(f),
            }
        }
        out.retain(|f| f.exp != 0);
        self.factors = out;
        self
    }

    /// Sort the entries of every factor by a fixed key, flipping the exponent
    /// for odd permutations, then merge equal factors.
    pub fn normalized(&self) -> Self {
        let factors = self
            .factors
            .iter()
            .map(|f| {
                let keys: Vec<String> = f.entries.iter().map(|e| e.to_string()).collect();
                let mut order: Vec<usize> = (0..keys.len()).collect();
                order.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
                let mut seen = vec![false; order.len()];
                let mut odd = false;
                for start in 0..order.len() {
                    let mut len = 0;
                    let mut i = start;
                    while !seen[i] {
                        seen[i] = true;
                        i = order[i];
                        len += 1;
                    }
                    if len > 0 && len % 2 == 0 {
                        odd = !odd;
                    }
                }
                SymbolFactor {
                    entries: order.iter().map(|&i| f.entries[i].clone()).collect(),
                    exp: if odd { -f.exp } else { f.exp },
                }
            })
            .collect();
        MilnorSymbol { tower: self.tower.clone(), factors }.merged()
    }

    /// Image under the inclusion into a tower over a larger coefficient field.
    pub fn embed(&self, to: &Tower) -> Result<Self> {
        let factors = self
            .factors
            .iter()
            .map(|f| {
                Ok(SymbolFactor {
                    entries: f.entries.iter().map(|e| e.embed(to)).collect::<Result<Vec<_>>>()?,
                    exp: f.exp,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MilnorSymbol { tower: to.clone(), factors })
    }

    /// Norm to a tower over a member field, for factors in which at most one
    /// entry lies outside the smaller field.
    pub fn norm_special(&self, down_to: &Tower) -> Result<Self> {
        if down_to.vars() != self.tower.vars() {
            return Err(Error::AmbientMismatch);
        }
        let deg = self.tower.base().degree_over(down_to.base())? as i64;
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let restricted: Vec<Option<TowerElement>> = f.entries.iter().map(|e| e.restrict(down_to).ok()).collect();
            let outside: Vec<usize> = (0..restricted.len()).filter(|&i| restricted[i].is_none()).collect();
            let (entries, exp) = match outside.as_slice() {
                [] => (restricted.into_iter().map(|e| e.expect("restricted")).collect(), f.exp * deg),
                [_] => {
                    let mut entries = Vec::with_capacity(restricted.len());
                    for (i, e) in restricted.into_iter().enumerate() {
                        entries.push(match e {
                            Some(e) => e,
                            None => f.entries[i].norm(down_to)?,
                        });
                    }
                    (entries, f.exp)
                }
                _ => {
                    return Err(Error::ShapeNotSupported(format!(
                        "{} entries lie outside the target field",
                        outside.len()
                    )))
                }
            };
            factors.push(SymbolFactor { entries, exp });
        }
        Self::from_factors(down_to, factors)
    }
}

impl fmt::Display for MilnorSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|g| {
                let e: Vec<String> = g.entries.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}^{}", e.join(", "), g.exp)
            })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// `{a_1, ..., a_d}`.
pub fn symbol_new(tower: &Tower, entries: Vec<TowerElement>) -> Result<MilnorSymbol> {
    MilnorSymbol::new(tower, entries)
}

pub fn symbol_product(s: &MilnorSymbol, t: &MilnorSymbol) -> Result<MilnorSymbol> {
    s.product(t)
}

pub fn norm_special(s: &MilnorSymbol, down_to: &Tower) -> Result<MilnorSymbol> {
    s.norm_special(down_to)
}
