//! JSON forms of fields, elements, laws, symbols, plans and pairing values.
//!
//! Numbers that carry p-adic content are written as little-endian base-`p`
//! digit lists, never as floats. Exact elements have `"precision": null`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_groups::{FglSource, FormalGroupLaw};
use crate::laurent_tower::{Tower, TowerDesc, TowerElement};
use crate::local_field::{is_exact as is_exact_prec, BaseElement, Field, FieldDesc, Step, StepKind, EXACT};
use crate::pairing::{PairingPlan, PairingValue};
use crate::series::{MSeries, Series, Tail};
use crate::symbols::{MilnorSymbol, SymbolFactor};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKindJson {
    Eisenstein,
    Unramified,
}

/// A polynomial coefficient: an integer, or coordinates over the previous level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffJson {
    Int(i64),
    Coords(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepJson {
    pub poly: Vec<CoeffJson>,
    pub kind: StepKindJson,
}

/// Field descriptor. `cyclotomic` / `cyclotomic_tower` are shortcuts that
/// take precedence over `tower` when present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldJson {
    pub p: u64,
    #[serde(default)]
    pub tower: Vec<StepJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclotomic: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclotomic_tower: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub coords: Vec<Vec<u64>>,
    pub precision: Option<i64>,
    #[serde(default, skip_serializing_if = "is_zero_i64")]
    pub shift: i64,
    /// Indices of negative coordinates (exact elements only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negative: Vec<usize>,
}

fn is_zero_i64(x: &i64) -> bool {
    *x == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub idx: Vec<i64>,
    pub value: ElementJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerElementJson {
    pub coeffs: Vec<TermJson>,
    pub window: Vec<[i64; 2]>,
    pub precision: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorJson {
    pub entries: Vec<TowerElementJson>,
    pub exp: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub factors: Vec<FactorJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FglBody {
    pub source: FglSource,
    pub coeffs: Vec<(u32, u32, ElementJson)>,
    pub dmax: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isogeny: Option<Vec<ElementJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<ElementJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FglJson {
    pub fgl: FglBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueJson {
    pub p: u64,
    pub level: u32,
    pub coords: Vec<Vec<u64>>,
}

/// Plan with rationals written as `"a/b"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanJson {
    pub n: u32,
    pub m: i64,
    pub k: i64,
    pub t: i64,
    pub rho: i64,
    pub c1: String,
    pub c2: String,
    pub different: String,
    pub kappa: i64,
    pub certified: bool,
    pub aux_level: Option<u32>,
    pub aux_degree: Option<String>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn render<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).expect("serializable")
}

fn digits(c: &BigInt, p: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = c.abs();
    let pb = BigInt::from(p);
    while !x.is_zero() {
        let r = &x % &pb;
        out.push(u64::try_from(r).expect("digit"));
        x /= &pb;
    }
    out
}

fn undigits(d: &[u64], p: u64) -> Result<BigInt> {
    let mut x = BigInt::zero();
    for &c in d.iter().rev() {
        if c >= p {
            return Err(Error::Parse(format!("digit {c} is not below {p}")));
        }
        x = x * p + c;
    }
    Ok(x)
}

pub fn field_to_json(f: &Field) -> FieldJson {
    let tower = f
        .steps()
        .iter()
        .map(|s| StepJson {
            poly: s
                .poly
                .iter()
                .map(|c| {
                    let v: Vec<i64> = c.iter().map(|x| i64::try_from(x).expect("small coefficient")).collect();
                    if v.len() == 1 {
                        CoeffJson::Int(v[0])
                    } else {
                        CoeffJson::Coords(v)
                    }
                })
                .collect(),
            kind: match s.kind {
                StepKind::Eisenstein => StepKindJson::Eisenstein,
                StepKind::Unramified => StepKindJson::Unramified,
            },
        })
        .collect();
    let (mut cyclotomic, mut cyclotomic_tower) = (None, None);
    if let Some(n) = f.cyclotomic_level() {
        if f.levels() == 1 {
            cyclotomic = Some(n);
        } else {
            cyclotomic_tower = Some(n);
        }
    }
    FieldJson { p: f.p(), tower, cyclotomic, cyclotomic_tower }
}

pub fn field_from_json(j: &FieldJson) -> Result<Field> {
    if let Some(n) = j.cyclotomic_tower {
        return FieldDesc::cyclotomic_tower(j.p, n);
    }
    if let Some(n) = j.cyclotomic {
        return FieldDesc::cyclotomic(j.p, n);
    }
    let mut steps = Vec::with_capacity(j.tower.len());
    let mut dim = 1usize;
    for s in &j.tower {
        let poly = s
            .poly
            .iter()
            .map(|c| {
                let mut v: Vec<BigInt> = match c {
                    CoeffJson::Int(x) => vec![BigInt::from(*x)],
                    CoeffJson::Coords(xs) => xs.iter().map(|&x| BigInt::from(x)).collect(),
                };
                if v.len() > dim {
                    return Err(Error::Parse(format!("coefficient has {} coordinates, level degree is {dim}", v.len())));
                }
                v.resize(dim, BigInt::zero());
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let kind = match s.kind {
            StepKindJson::Eisenstein => StepKind::Eisenstein,
            StepKindJson::Unramified => StepKind::Unramified,
        };
        let step = Step { kind, poly };
        dim *= step.degree().max(1);
        steps.push(step);
    }
    FieldDesc::new(j.p, steps)
}

pub fn element_to_json(x: &BaseElement) -> ElementJson {
    let p = x.field().p();
    let exact = is_exact_prec(x.prec());
    ElementJson {
        coords: x.coords().iter().map(|c| digits(c, p)).collect(),
        precision: (!exact).then_some(x.prec()),
        shift: x.shift(),
        negative: x.coords().iter().enumerate().filter(|(_, c)| c.is_negative()).map(|(i, _)| i).collect(),
    }
}

pub fn element_from_json(j: &ElementJson, field: &Field) -> Result<BaseElement> {
    if j.coords.len() != field.degree() {
        return Err(Error::Parse(format!("expected {} coordinates, got {}", field.degree(), j.coords.len())));
    }
    let p = field.p();
    let mut coords = j.coords.iter().map(|d| undigits(d, p)).collect::<Result<Vec<_>>>()?;
    for &i in &j.negative {
        let c = coords.get_mut(i).ok_or_else(|| Error::Parse(format!("negative index {i} out of range")))?;
        *c = -c.clone();
    }
    Ok(BaseElement::from_coords(field, coords, j.shift, j.precision.unwrap_or(EXACT)))
}

pub fn tower_element_to_json(x: &TowerElement) -> TowerElementJson {
    let w = x.tower().window();
    TowerElementJson {
        coeffs: x.terms().iter().map(|(i, c)| TermJson { idx: i.clone(), value: element_to_json(c) }).collect(),
        window: vec![[-w, w]; x.tower().vars()],
        precision: (!is_exact_prec(x.prec())).then_some(x.prec()),
    }
}

/// The tower described by a JSON element's window.
pub fn tower_of(j: &TowerElementJson, base: &Field) -> Result<Tower> {
    let w = j.window.iter().map(|[lo, hi]| lo.abs().max(hi.abs())).max().unwrap_or(0);
    TowerDesc::new(base, j.window.len(), w)
}

pub fn tower_element_from_json(j: &TowerElementJson, tower: &Tower) -> Result<TowerElement> {
    let terms = j
        .coeffs
        .iter()
        .map(|t| Ok((t.idx.clone(), element_from_json(&t.value, tower.base())?)))
        .collect::<Result<Vec<_>>>()?;
    TowerElement::new(tower, terms, j.precision.unwrap_or(EXACT))
}

pub fn symbol_to_json(s: &MilnorSymbol) -> SymbolJson {
    SymbolJson {
        factors: s
            .factors()
            .iter()
            .map(|f| FactorJson { entries: f.entries.iter().map(tower_element_to_json).collect(), exp: f.exp })
            .collect(),
    }
}

/// Reads a symbol; the tower comes from the first entry's window.
pub fn symbol_from_json(j: &SymbolJson, base: &Field) -> Result<MilnorSymbol> {
    let first = j
        .factors
        .first()
        .and_then(|f| f.entries.first())
        .ok_or_else(|| Error::Parse("a symbol needs at least one entry".into()))?;
    let tower = tower_of(first, base)?;
    symbol_from_json_in(j, &tower)
}

pub fn symbol_from_json_in(j: &SymbolJson, tower: &Tower) -> Result<MilnorSymbol> {
    let factors = j
        .factors
        .iter()
        .map(|f| {
            Ok(SymbolFactor {
                entries: f.entries.iter().map(|e| tower_element_from_json(e, tower)).collect::<Result<Vec<_>>>()?,
                exp: f.exp,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MilnorSymbol::from_factors(tower, factors)
}

pub fn fgl_to_json(f: &FormalGroupLaw) -> FglJson {
    let coeffs = f
        .law()
        .terms()
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e[0], e[1], element_to_json(c)))
        .collect();
    FglJson {
        fgl: FglBody {
            source: f.source(),
            coeffs,
            dmax: f.dmax(),
            isogeny: f.isogeny().map(|s| s.coeffs().iter().map(element_to_json).collect()),
            pi: f.pi().map(element_to_json),
            precision: Some(f.prec()),
        },
    }
}

/// Rebuilds a law. Named laws are reconstructed from their source; custom
/// laws from their coefficients.
pub fn fgl_from_json(j: &FglJson, field: &Field, default_prec: i64) -> Result<FormalGroupLaw> {
    let b = &j.fgl;
    let prec = b.precision.unwrap_or(default_prec);
    match b.source {
        FglSource::Multiplicative => Ok(FormalGroupLaw::multiplicative(field, b.dmax, prec)),
        FglSource::Additive => Ok(FormalGroupLaw::additive(field, b.dmax, prec)),
        FglSource::LubinTate => {
            let iso = b.isogeny.as_ref().ok_or_else(|| Error::Parse("lubin-tate law needs an isogeny".into()))?;
            let coeffs = iso.iter().map(|c| element_from_json(c, field)).collect::<Result<Vec<_>>>()?;
            let f = Series::new(field, coeffs, Tail::Zero);
            let pi = match &b.pi {
                Some(pi) => element_from_json(pi, field)?,
                None => BaseElement::uniformizer(field, EXACT),
            };
            FormalGroupLaw::lubin_tate(&f, &pi, b.dmax, prec)
        }
        FglSource::Custom => {
            let mut law = MSeries::zero(field, 2, b.dmax);
            for (i, k, c) in &b.coeffs {
                law.insert(vec![*i, *k], element_from_json(c, field)?);
            }
            FormalGroupLaw::custom(law, prec)
        }
    }
}

pub fn value_to_json(v: &PairingValue) -> ValueJson {
    ValueJson { p: v.p(), level: v.level(), coords: v.coords().iter().map(|c| digits(c, v.p())).collect() }
}

pub fn value_from_json(j: &ValueJson) -> Result<PairingValue> {
    let coords = j.coords.iter().map(|d| undigits(d, j.p)).collect::<Result<Vec<_>>>()?;
    Ok(PairingValue::new(j.p, j.level, coords))
}

pub fn plan_to_json(p: &PairingPlan) -> PlanJson {
    PlanJson {
        n: p.n,
        m: p.m,
        k: p.k,
        t: p.t,
        rho: p.rho,
        c1: p.c1.to_string(),
        c2: p.c2.to_string(),
        different: p.different.to_string(),
        kappa: p.kappa,
        certified: p.certified,
        aux_level: p.aux_level,
        aux_degree: p.aux_degree.as_ref().map(|d| d.to_string()),
    }
}
