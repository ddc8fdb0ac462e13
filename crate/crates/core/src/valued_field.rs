//! Coefficient arithmetic for the ground field k in two concrete backends.
//!
//! `EqualChar`: truncated Puiseux sums Σ a_e s^e with a_e ∈ F_q and rational
//! exponents. `MixedChar`: Σ a_i π^i with digits a_i mod p and π an Eisenstein
//! uniformizer satisfying π^e = p exactly, so v(π) = 1/e and v(p) = 1.
//!
//! Precision is absolute: an element is exact modulo terms of valuation ≥ N,
//! where N is the declared cap. Internally everything is carried at a slightly
//! larger working cap so that inverses and roots (which shift valuations) still
//! honour the public contract; iterative routines run until their defect
//! vanishes at the working cap, which makes results structurally stable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf::{Fq, GfField};
use crate::rational::{rat, Rat, Val};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    EqualChar { q: u32, denom_bound: i64 },
    MixedChar { q: u32, e: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldConfig {
    pub p: u32,
    pub backend: Backend,
    /// precision cap N: elements are exact modulo valuation >= N
    pub precision: Rat,
}

/// A field configuration together with the finite-field tables it needs.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    pub cfg: FieldConfig,
    pub gf: GfField,
}

impl FieldCtx {
    pub fn new(cfg: FieldConfig) -> Result<FieldCtx> {
        if cfg.precision <= Rat::from_integer(0) {
            return Err(Error::InvalidInput("precision cap must be positive".into()));
        }
        let p = cfg.p;
        let gf = match cfg.backend {
            Backend::EqualChar { q, denom_bound } => {
                if denom_bound < 1 {
                    return Err(Error::InvalidInput("denominator bound must be >= 1".into()));
                }
                let m = power_of(p, q).ok_or_else(|| {
                    Error::InvalidInput(format!("q = {q} is not a power of p = {p}"))
                })?;
                GfField::new(p, m)?
            }
            Backend::MixedChar { q, e } => {
                if e < 1 {
                    return Err(Error::InvalidInput("ramification index must be >= 1".into()));
                }
                if q != p {
                    // digits live in Z/p, so only the residue field F_p is representable
                    return Err(Error::UnsupportedModel(format!(
                        "mixed-characteristic backend supports residue field F_p only (q = {q}, p = {p})"
                    )));
                }
                GfField::new(p, 1)?
            }
        };
        Ok(FieldCtx { cfg, gf })
    }

    pub fn equal_char(p: u32, q: u32, precision: Rat) -> Result<FieldCtx> {
        FieldCtx::new(FieldConfig {
            p,
            backend: Backend::EqualChar { q, denom_bound: 60 },
            precision,
        })
    }

    pub fn mixed_char(p: u32, e: i64, precision: Rat) -> Result<FieldCtx> {
        FieldCtx::new(FieldConfig { p, backend: Backend::MixedChar { q: p, e }, precision })
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self.cfg.backend, Backend::MixedChar { .. })
    }

    pub fn ram_index(&self) -> i64 {
        match self.cfg.backend {
            Backend::MixedChar { e, .. } => e,
            Backend::EqualChar { .. } => 1,
        }
    }

    /// v(p): 1 in mixed characteristic, ∞ in equal characteristic.
    pub fn v_p(&self) -> Val {
        if self.is_mixed() {
            Val::from_int(1)
        } else {
            Val::Inf
        }
    }

    pub fn precision(&self) -> Rat {
        self.cfg.precision
    }

    /// Internal truncation bound: public precision plus headroom for the
    /// valuation shifts introduced by inversion and root extraction.
    pub fn work_cap(&self) -> Rat {
        self.cfg.precision + Rat::from_integer(8)
    }

    fn work_icap(&self) -> i64 {
        idx_cap(self, self.work_cap())
    }
}

fn power_of(p: u32, q: u32) -> Option<u32> {
    let mut m = 0;
    let mut acc = 1u64;
    while acc < q as u64 {
        acc *= p as u64;
        m += 1;
    }
    (acc == q as u64 && m >= 1).then_some(m)
}

fn idx_cap(ctx: &FieldCtx, cap: Rat) -> i64 {
    // smallest integer i with i/e >= cap
    (cap * Rat::from_integer(ctx.ram_index())).ceil().to_integer()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// exponent -> nonzero F_q coefficient
    Eq(BTreeMap<Rat, Fq>),
    /// π-power -> digit in 1..p
    Mixed(BTreeMap<i64, u32>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientElem {
    repr: Repr,
}

impl CoefficientElem {
    pub fn zero(ctx: &FieldCtx) -> Self {
        if ctx.is_mixed() {
            CoefficientElem { repr: Repr::Mixed(BTreeMap::new()) }
        } else {
            CoefficientElem { repr: Repr::Eq(BTreeMap::new()) }
        }
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Self::from_int(ctx, 1)
    }

    pub fn from_int(ctx: &FieldCtx, n: i64) -> Self {
        match &ctx.cfg.backend {
            Backend::EqualChar { .. } => {
                let c = ctx.gf.from_int(n);
                let mut m = BTreeMap::new();
                if c != 0 {
                    m.insert(Rat::from_integer(0), c);
                }
                CoefficientElem { repr: Repr::Eq(m) }
            }
            Backend::MixedChar { .. } => {
                let mut work = BTreeMap::new();
                if n != 0 {
                    work.insert(0i64, n as i128);
                }
                CoefficientElem { repr: Repr::Mixed(normalize_digits(ctx, work)) }
            }
        }
    }

    /// Single term a·s^e in the equal-characteristic backend.
    pub fn s_term(ctx: &FieldCtx, a: Fq, e: Rat) -> Result<Self> {
        match ctx.cfg.backend {
            Backend::EqualChar { .. } => {
                if a >= ctx.gf.q {
                    return Err(Error::InvalidInput(format!(
                        "coefficient code {a} out of range for F_{}",
                        ctx.gf.q
                    )));
                }
                let mut m = BTreeMap::new();
                if a != 0 && e < ctx.work_cap() {
                    m.insert(e, a);
                }
                Ok(CoefficientElem { repr: Repr::Eq(m) })
            }
            Backend::MixedChar { .. } => Err(Error::InvalidInput(
                "s-terms belong to the equal-characteristic backend".into(),
            )),
        }
    }

    /// Single term d·π^i in the mixed backend (d taken mod p).
    pub fn pi_term(ctx: &FieldCtx, d: i64, i: i64) -> Result<Self> {
        match ctx.cfg.backend {
            Backend::MixedChar { .. } => {
                let mut work = BTreeMap::new();
                if d != 0 && i < ctx.work_icap() {
                    work.insert(i, d as i128);
                }
                Ok(CoefficientElem { repr: Repr::Mixed(normalize_digits(ctx, work)) })
            }
            Backend::EqualChar { .. } => Err(Error::InvalidInput(
                "pi-terms belong to the mixed-characteristic backend".into(),
            )),
        }
    }

    /// The canonical element of a given valuation: s^v resp. π^(e·v).
    pub fn of_valuation(ctx: &FieldCtx, v: Rat) -> Result<Self> {
        match ctx.cfg.backend {
            Backend::EqualChar { .. } => Self::s_term(ctx, 1, v),
            Backend::MixedChar { e, .. } => {
                let idx = v * Rat::from_integer(e);
                if idx.denom() != &1 {
                    return Err(Error::RootNotRepresentable(format!(
                        "valuation {v} needs ramification beyond pi^{e} = p"
                    )));
                }
                Self::pi_term(ctx, 1, *idx.numer())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Eq(m) => m.is_empty(),
            Repr::Mixed(m) => m.is_empty(),
        }
    }

    /// Least exponent with a nonzero coefficient; ∞ for (truncated) zero.
    pub fn valuation(&self, ctx: &FieldCtx) -> Val {
        match &self.repr {
            Repr::Eq(m) => m.keys().next().map_or(Val::Inf, |e| Val::Finite(*e)),
            Repr::Mixed(m) => m
                .keys()
                .next()
                .map_or(Val::Inf, |i| Val::Finite(rat(*i, ctx.ram_index()))),
        }
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Eq(a), Repr::Eq(b)) => {
                let mut out = a.clone();
                for (e, c) in b {
                    let v = ctx.gf.add(*out.get(e).unwrap_or(&0), *c);
                    if v == 0 {
                        out.remove(e);
                    } else {
                        out.insert(*e, v);
                    }
                }
                CoefficientElem { repr: Repr::Eq(out) }
            }
            (Repr::Mixed(a), Repr::Mixed(b)) => {
                let mut work: BTreeMap<i64, i128> =
                    a.iter().map(|(i, d)| (*i, *d as i128)).collect();
                for (i, d) in b {
                    *work.entry(*i).or_insert(0) += *d as i128;
                }
                CoefficientElem { repr: Repr::Mixed(normalize_digits(ctx, work)) }
            }
            _ => unreachable!("mismatched coefficient backends"),
        }
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Self {
        match &self.repr {
            Repr::Eq(m) => CoefficientElem {
                repr: Repr::Eq(m.iter().map(|(e, c)| (*e, ctx.gf.neg(*c))).collect()),
            },
            Repr::Mixed(m) => {
                let work: BTreeMap<i64, i128> =
                    m.iter().map(|(i, d)| (*i, -(*d as i128))).collect();
                CoefficientElem { repr: Repr::Mixed(normalize_digits(ctx, work)) }
            }
        }
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Self) -> Self {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Eq(a), Repr::Eq(b)) => {
                let cap = ctx.work_cap();
                if a.is_empty() || b.is_empty() {
                    return CoefficientElem { repr: Repr::Eq(BTreeMap::new()) };
                }
                // put all exponents on a common denominator and convolve over
                // a dense integer-indexed buffer; fall back to map-based
                // accumulation when the index range would be too large
                let d = a
                    .keys()
                    .chain(b.keys())
                    .fold(1i64, |acc, e| num_integer::lcm(acc, *e.denom()));
                let base = (*a.keys().next().unwrap() + *b.keys().next().unwrap())
                    * Rat::from_integer(d);
                let cap_idx = (cap * Rat::from_integer(d)).ceil();
                let len = (cap_idx - base).to_integer();
                if d <= 64 && len > 0 && len <= 1 << 16 {
                    let len = len as usize;
                    let base = base.to_integer();
                    let ia: Vec<(i64, Fq)> = a
                        .iter()
                        .map(|(e, c)| ((*e * Rat::from_integer(d)).to_integer(), *c))
                        .collect();
                    let ib: Vec<(i64, Fq)> = b
                        .iter()
                        .map(|(e, c)| ((*e * Rat::from_integer(d)).to_integer(), *c))
                        .collect();
                    let mut dense = vec![0 as Fq; len];
                    for (ea, ca) in &ia {
                        for (eb, cb) in &ib {
                            let idx = ea + eb - base;
                            if idx < len as i64 {
                                let slot = &mut dense[idx as usize];
                                *slot = ctx.gf.add(*slot, ctx.gf.mul(*ca, *cb));
                            }
                        }
                    }
                    let mut out: BTreeMap<Rat, Fq> = BTreeMap::new();
                    for (i, c) in dense.into_iter().enumerate() {
                        if c != 0 {
                            out.insert(Rat::new(base + i as i64, d), c);
                        }
                    }
                    return CoefficientElem { repr: Repr::Eq(out) };
                }
                let mut out: BTreeMap<Rat, Fq> = BTreeMap::new();
                for (ea, ca) in a {
                    for (eb, cb) in b {
                        let e = *ea + *eb;
                        if e >= cap {
                            continue;
                        }
                        let c = ctx.gf.mul(*ca, *cb);
                        let v = ctx.gf.add(*out.get(&e).unwrap_or(&0), c);
                        if v == 0 {
                            out.remove(&e);
                        } else {
                            out.insert(e, v);
                        }
                    }
                }
                CoefficientElem { repr: Repr::Eq(out) }
            }
            (Repr::Mixed(a), Repr::Mixed(b)) => {
                let mut work: BTreeMap<i64, i128> = BTreeMap::new();
                for (ia, da) in a {
                    for (ib, db) in b {
                        *work.entry(ia + ib).or_insert(0) += (*da as i128) * (*db as i128);
                    }
                }
                CoefficientElem { repr: Repr::Mixed(normalize_digits(ctx, work)) }
            }
            _ => unreachable!("mismatched coefficient backends"),
        }
    }

    pub fn mul_int(&self, ctx: &FieldCtx, n: i64) -> Self {
        self.mul(ctx, &Self::from_int(ctx, n))
    }

    pub fn pow(&self, ctx: &FieldCtx, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv(ctx)?.pow(ctx, -n);
        }
        let mut acc = Self::one(ctx);
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(ctx, &base);
            }
            base = base.mul(ctx, &base);
            n >>= 1;
        }
        Ok(acc)
    }

    /// Factor off the leading term: self = monomial · unit where the unit has
    /// valuation 0 (equal char: residue 1; mixed char: some leading digit).
    fn split_lead(&self, ctx: &FieldCtx) -> Option<(Self, Self)> {
        match &self.repr {
            Repr::Eq(m) => {
                let (&e0, &c0) = m.iter().next()?;
                let inv0 = ctx.gf.inv(c0).ok()?;
                let unit: BTreeMap<Rat, Fq> =
                    m.iter().map(|(e, c)| (*e - e0, ctx.gf.mul(*c, inv0))).collect();
                let mut lead = BTreeMap::new();
                lead.insert(e0, c0);
                Some((
                    CoefficientElem { repr: Repr::Eq(lead) },
                    CoefficientElem { repr: Repr::Eq(unit) },
                ))
            }
            Repr::Mixed(m) => {
                let (&i0, _) = m.iter().next()?;
                let shifted: BTreeMap<i64, u32> = m.iter().map(|(i, d)| (i - i0, *d)).collect();
                let mut lead = BTreeMap::new();
                lead.insert(i0, 1u32);
                Some((
                    CoefficientElem { repr: Repr::Mixed(lead) },
                    CoefficientElem { repr: Repr::Mixed(shifted) },
                ))
            }
        }
    }

    pub fn inv(&self, ctx: &FieldCtx) -> Result<Self> {
        if self.valuation(ctx) >= Val::Finite(ctx.precision()) {
            return Err(Error::InsufficientPrecision(
                "inverse of an element indistinguishable from 0".into(),
            ));
        }
        let (lead, unit) = self.split_lead(ctx).expect("nonzero");
        let mut z = match &unit.repr {
            Repr::Eq(_) => Self::one(ctx),
            Repr::Mixed(m) => {
                let d0 = *m.get(&0).unwrap() as i64;
                Self::pi_term(ctx, inv_mod_p(d0, ctx.cfg.p as i64), 0)?
            }
        };
        let two = Self::from_int(ctx, 2);
        let one = Self::one(ctx);
        for _ in 0..64 {
            let err = unit.mul(ctx, &z).sub(ctx, &one);
            if err.is_zero() {
                break;
            }
            z = z.mul(ctx, &two.sub(ctx, &unit.mul(ctx, &z)));
        }
        let lead_inv = match &lead.repr {
            Repr::Eq(m) => {
                let (&e0, &c0) = m.iter().next().unwrap();
                let mut t = BTreeMap::new();
                t.insert(-e0, ctx.gf.inv(c0)?);
                CoefficientElem { repr: Repr::Eq(t) }
            }
            Repr::Mixed(m) => {
                let (&i0, _) = m.iter().next().unwrap();
                let mut t = BTreeMap::new();
                t.insert(-i0, 1u32);
                CoefficientElem { repr: Repr::Mixed(t) }
            }
        };
        Ok(z.mul(ctx, &lead_inv))
    }

    /// n-th root. Total in the equal-characteristic backend; in mixed
    /// characteristic requires a representable valuation and, for p-parts, a
    /// Hensel-liftable unit.
    pub fn nth_root(&self, ctx: &FieldCtx, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("0th root".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let p = ctx.cfg.p;
        let mut k = 0u32;
        let mut n1 = n;
        while n1.is_multiple_of(p) {
            n1 /= p;
            k += 1;
        }
        let mut x = self.clone();
        if n1 > 1 {
            x = x.coprime_root(ctx, n1)?;
        }
        for _ in 0..k {
            x = x.p_root(ctx)?;
        }
        Ok(x)
    }

    fn coprime_root(&self, ctx: &FieldCtx, n: u32) -> Result<Self> {
        debug_assert!(!n.is_multiple_of(ctx.cfg.p));
        match &self.repr {
            Repr::Eq(m) => {
                let (&e0, &c0) = m.iter().next().unwrap();
                let e_root = e0 / Rat::from_integer(n as i64);
                let c_root = ctx.gf.nth_root(c0, n)?;
                let (_, unit) = self.split_lead(ctx).unwrap();
                let unit_root = newton_root(ctx, &unit, n, Self::one(ctx))?;
                let mut lead = BTreeMap::new();
                lead.insert(e_root, c_root);
                Ok(CoefficientElem { repr: Repr::Eq(lead) }.mul(ctx, &unit_root))
            }
            Repr::Mixed(m) => {
                let (&i0, _) = m.iter().next().unwrap();
                if i0.rem_euclid(n as i64) != 0 {
                    return Err(Error::RootNotRepresentable(format!(
                        "pi-valuation {i0} is not divisible by {n}"
                    )));
                }
                let (_, unit) = self.split_lead(ctx).unwrap();
                let d0 = match &unit.repr {
                    Repr::Mixed(mm) => *mm.get(&0).unwrap() as i64,
                    _ => unreachable!(),
                };
                let p = ctx.cfg.p as i64;
                let b = (1..p).find(|b| pow_mod(*b, n as i64, p) == d0).ok_or_else(|| {
                    Error::RootNotRepresentable(format!(
                        "leading digit {d0} has no {n}-th root mod {p}"
                    ))
                })?;
                let start = Self::pi_term(ctx, b, 0)?;
                let unit_root = newton_root(ctx, &unit, n, start)?;
                let lead_root = Self::pi_term(ctx, 1, i0 / n as i64)?;
                Ok(lead_root.mul(ctx, &unit_root))
            }
        }
    }

    fn p_root(&self, ctx: &FieldCtx) -> Result<Self> {
        let p = ctx.cfg.p;
        match &self.repr {
            Repr::Eq(m) => {
                // inverse Frobenius, exact and total over a perfect field
                let out: BTreeMap<Rat, Fq> = m
                    .iter()
                    .map(|(e, c)| (*e / Rat::from_integer(p as i64), ctx.gf.pth_root(*c)))
                    .collect();
                Ok(CoefficientElem { repr: Repr::Eq(out) })
            }
            Repr::Mixed(m) => {
                let (&i0, _) = m.iter().next().unwrap();
                if i0.rem_euclid(p as i64) != 0 {
                    return Err(Error::RootNotRepresentable(format!(
                        "p-th root needs pi-valuation divisible by p (got pi^{i0})"
                    )));
                }
                let (_, unit) = self.split_lead(ctx).unwrap();
                let root_unit = hensel_p_root(ctx, &unit)?;
                let lead_root = Self::pi_term(ctx, 1, i0 / p as i64)?;
                Ok(lead_root.mul(ctx, &root_unit))
            }
        }
    }

    /// True when the element is a unit whose residue is exactly 1.
    pub fn residue_is_one(&self) -> bool {
        match &self.repr {
            Repr::Eq(m) => m.get(&Rat::from_integer(0)) == Some(&1),
            Repr::Mixed(m) => m.get(&0) == Some(&1),
        }
    }

    /// (exponent-as-valuation, coefficient code) pairs, for printers/parsers.
    pub fn terms(&self, ctx: &FieldCtx) -> Vec<(Rat, u32)> {
        match &self.repr {
            Repr::Eq(m) => m.iter().map(|(e, c)| (*e, *c)).collect(),
            Repr::Mixed(m) => m.iter().map(|(i, d)| (rat(*i, ctx.ram_index()), *d)).collect(),
        }
    }

    pub fn truncate(&self, ctx: &FieldCtx, cap: Rat) -> Self {
        match &self.repr {
            Repr::Eq(m) => CoefficientElem {
                repr: Repr::Eq(
                    m.iter().filter(|(e, _)| **e < cap).map(|(e, c)| (*e, *c)).collect(),
                ),
            },
            Repr::Mixed(m) => {
                let icap = idx_cap(ctx, cap);
                CoefficientElem {
                    repr: Repr::Mixed(
                        m.iter().filter(|(i, _)| **i < icap).map(|(i, d)| (*i, *d)).collect(),
                    ),
                }
            }
        }
    }

    /// Equality modulo the public precision cap.
    pub fn eq_mod_cap(&self, ctx: &FieldCtx, other: &Self) -> bool {
        self.sub(ctx, other).valuation(ctx) >= Val::Finite(ctx.precision())
    }
}

fn normalize_digits(ctx: &FieldCtx, work: BTreeMap<i64, i128>) -> BTreeMap<i64, u32> {
    // reduce digits to 0..p with carries travelling e places up (pi^e = p)
    let p = ctx.cfg.p as i128;
    let e = ctx.ram_index();
    let icap = ctx.work_icap();
    let mut work = work;
    let mut out = BTreeMap::new();
    while let Some((&i, _)) = work.iter().next() {
        let d = work.remove(&i).unwrap();
        if i >= icap {
            continue;
        }
        let r = d.rem_euclid(p);
        let carry = (d - r) / p;
        if r != 0 {
            out.insert(i, r as u32);
        }
        if carry != 0 {
            *work.entry(i + e).or_insert(0) += carry;
        }
    }
    out
}

fn inv_mod_p(a: i64, p: i64) -> i64 {
    pow_mod(a.rem_euclid(p), p - 2, p)
}

fn pow_mod(mut b: i64, mut e: i64, p: i64) -> i64 {
    let mut acc = 1i64;
    b = b.rem_euclid(p);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Newton iteration for r^n = u on units, (n, p) = 1; the starting point must
/// already solve the equation on residues.
fn newton_root(
    ctx: &FieldCtx,
    u: &CoefficientElem,
    n: u32,
    start: CoefficientElem,
) -> Result<CoefficientElem> {
    let mut r = start;
    for _ in 0..64 {
        let err = r.pow(ctx, n as i64)?.sub(ctx, u);
        if err.is_zero() {
            return Ok(r);
        }
        let deriv = r.pow(ctx, n as i64 - 1)?.mul_int(ctx, n as i64);
        r = r.sub(ctx, &err.mul(ctx, &deriv.inv(ctx)?));
    }
    Err(Error::ConvergenceFailure(format!("{n}-th root iteration stalled")))
}

/// Dense bivariate convolution of two equal-characteristic series given as
/// maps from y-exponent to coefficient. Both the y-exponents and the (scaled)
/// s-exponents are laid out on integer-indexed buffers, so the inner loop is
/// pure array arithmetic. Returns None when the backend is mixed, a common
/// exponent denominator would be too large, or the buffer would be oversized;
/// callers then fall back to the generic path.
pub(crate) fn mul_series_eq(
    ctx: &FieldCtx,
    a: &BTreeMap<i64, CoefficientElem>,
    b: &BTreeMap<i64, CoefficientElem>,
) -> Option<BTreeMap<i64, CoefficientElem>> {
    if ctx.is_mixed() || a.is_empty() || b.is_empty() {
        return None;
    }
    let mut d = 1i64;
    for c in a.values().chain(b.values()) {
        let Repr::Eq(m) = &c.repr else { return None };
        for e in m.keys() {
            d = num_integer::lcm(d, *e.denom());
            if d > 64 {
                return None;
            }
        }
    }
    let dq = Rat::from_integer(d);
    let cap_idx = (ctx.work_cap() * dq).ceil().to_integer();
    type Row = (i64, Vec<(i64, Fq)>);
    let flatten = |s: &BTreeMap<i64, CoefficientElem>| -> (Vec<Row>, i64) {
        let mut smin = i64::MAX;
        let mut rows = Vec::with_capacity(s.len());
        for (y, c) in s {
            let Repr::Eq(m) = &c.repr else { unreachable!() };
            let row: Vec<(i64, Fq)> =
                m.iter().map(|(e, v)| ((*e * dq).to_integer(), *v)).collect();
            if let Some((s0, _)) = row.first() {
                smin = smin.min(*s0);
                rows.push((*y, row));
            }
        }
        (rows, smin)
    };
    let (ra, samin) = flatten(a);
    let (rb, sbmin) = flatten(b);
    if ra.is_empty() || rb.is_empty() {
        return Some(BTreeMap::new());
    }
    let ymin = ra.first().unwrap().0 + rb.first().unwrap().0;
    let ymax = ra.last().unwrap().0 + rb.last().unwrap().0;
    let sbase = samin + sbmin;
    let scols = (cap_idx - sbase).max(0) as usize;
    if scols == 0 {
        return Some(BTreeMap::new());
    }
    let yrows = (ymax - ymin + 1) as usize;
    if yrows.saturating_mul(scols) > 1 << 22 {
        return None;
    }
    let mut dense = vec![0 as Fq; yrows * scols];
    for (ya, rowa) in &ra {
        for (yb, rowb) in &rb {
            let yo = ((ya + yb) - ymin) as usize * scols;
            for (sa, va) in rowa {
                for (sb, vb) in rowb {
                    let si = sa + sb - sbase;
                    if si < scols as i64 {
                        let slot = &mut dense[yo + si as usize];
                        *slot = ctx.gf.add(*slot, ctx.gf.mul(*va, *vb));
                    }
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (row, chunk) in dense.chunks(scols).enumerate() {
        let mut m: BTreeMap<Rat, Fq> = BTreeMap::new();
        for (i, v) in chunk.iter().enumerate() {
            if *v != 0 {
                m.insert(Rat::new(sbase + i as i64, d), *v);
            }
        }
        if !m.is_empty() {
            out.insert(ymin + row as i64, CoefficientElem { repr: Repr::Eq(m) });
        }
    }
    Some(out)
}

/// Mixed-characteristic companion to `mul_series_eq`: the same dense layout
/// over (y-exponent, π-index) with i128 digit accumulation, normalized rowwise.
pub(crate) fn mul_series_mixed(
    ctx: &FieldCtx,
    a: &BTreeMap<i64, CoefficientElem>,
    b: &BTreeMap<i64, CoefficientElem>,
) -> Option<BTreeMap<i64, CoefficientElem>> {
    if !ctx.is_mixed() || a.is_empty() || b.is_empty() {
        return None;
    }
    let icap = ctx.work_icap();
    type Row = (i64, Vec<(i64, u32)>);
    let flatten = |s: &BTreeMap<i64, CoefficientElem>| -> (Vec<Row>, i64) {
        let mut smin = i64::MAX;
        let mut rows = Vec::with_capacity(s.len());
        for (y, c) in s {
            let Repr::Mixed(m) = &c.repr else { unreachable!() };
            let row: Vec<(i64, u32)> = m.iter().map(|(i, v)| (*i, *v)).collect();
            if let Some((s0, _)) = row.first() {
                smin = smin.min(*s0);
                rows.push((*y, row));
            }
        }
        (rows, smin)
    };
    let (ra, samin) = flatten(a);
    let (rb, sbmin) = flatten(b);
    if ra.is_empty() || rb.is_empty() {
        return Some(BTreeMap::new());
    }
    let ymin = ra.first().unwrap().0 + rb.first().unwrap().0;
    let ymax = ra.last().unwrap().0 + rb.last().unwrap().0;
    let sbase = samin + sbmin;
    let scols = (icap - sbase).max(0) as usize;
    if scols == 0 {
        return Some(BTreeMap::new());
    }
    let yrows = (ymax - ymin + 1) as usize;
    if yrows.saturating_mul(scols) > 1 << 22 {
        return None;
    }
    let mut dense = vec![0i128; yrows * scols];
    for (ya, rowa) in &ra {
        for (yb, rowb) in &rb {
            let yo = ((ya + yb) - ymin) as usize * scols;
            for (sa, va) in rowa {
                for (sb, vb) in rowb {
                    let si = sa + sb - sbase;
                    if si < scols as i64 {
                        dense[yo + si as usize] += (*va as i128) * (*vb as i128);
                    }
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (row, chunk) in dense.chunks(scols).enumerate() {
        let mut work: BTreeMap<i64, i128> = BTreeMap::new();
        for (i, v) in chunk.iter().enumerate() {
            if *v != 0 {
                work.insert(sbase + i as i64, *v);
            }
        }
        if work.is_empty() {
            continue;
        }
        let m = normalize_digits(ctx, work);
        if !m.is_empty() {
            out.insert(ymin + row as i64, CoefficientElem { repr: Repr::Mixed(m) });
        }
    }
    Some(out)
}

/// Digit-greedy Hensel lifting for p-th roots of mixed-characteristic units.
/// Fails with RootNotRepresentable when no digit improves the defect, which is
/// exactly the case where the unit is not a p-th power in the fixed extension.
fn hensel_p_root(ctx: &FieldCtx, u: &CoefficientElem) -> Result<CoefficientElem> {
    let p = ctx.cfg.p as i64;
    let d0 = match &u.repr {
        Repr::Mixed(m) => *m.get(&0).unwrap() as i64,
        _ => unreachable!(),
    };
    // a^p = a mod p, so the residue root is the leading digit itself
    let mut r = CoefficientElem::pi_term(ctx, d0, 0)?;
    loop {
        let err = r.pow(ctx, p)?.sub(ctx, u);
        let lvl = match err.valuation(ctx) {
            Val::Inf => return Ok(r),
            Val::Finite(v) => (v * Rat::from_integer(ctx.ram_index())).to_integer(),
        };
        let mut improved = false;
        'search: for j in 1..=lvl.max(1) {
            for d in 1..p {
                let cand = r.add(ctx, &CoefficientElem::pi_term(ctx, d, j)?);
                let cand_err = cand.pow(ctx, p)?.sub(ctx, u);
                if cand_err.valuation(ctx) > err.valuation(ctx) {
                    r = cand;
                    improved = true;
                    break 'search;
                }
            }
        }
        if !improved {
            return Err(Error::RootNotRepresentable(
                "unit is not a p-th power in the fixed Eisenstein extension".into(),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq2() -> FieldCtx {
        FieldCtx::equal_char(2, 2, Rat::from_integer(24)).unwrap()
    }

    fn mx2(e: i64) -> FieldCtx {
        FieldCtx::mixed_char(2, e, Rat::from_integer(24)).unwrap()
    }

    #[test]
    fn sqrt_s_times_sqrt_s() {
        let ctx = eq2();
        let h = CoefficientElem::s_term(&ctx, 1, rat(1, 2)).unwrap();
        let s = CoefficientElem::s_term(&ctx, 1, rat(1, 1)).unwrap();
        assert_eq!(h.mul(&ctx, &h), s);
    }

    #[test]
    fn geometric_inverse_of_one_plus_p() {
        let ctx = mx2(1);
        let x = CoefficientElem::from_int(&ctx, 3); // 1 + p for p = 2
        let y = x.inv(&ctx).unwrap();
        assert_eq!(x.mul(&ctx, &y), CoefficientElem::one(&ctx));
        assert_eq!(y.valuation(&ctx), Val::zero());
    }

    #[test]
    fn additive_inverse_cancels() {
        for ctx in [eq2(), mx2(2)] {
            let x = CoefficientElem::of_valuation(&ctx, rat(3, 1)).unwrap();
            let y = CoefficientElem::from_int(&ctx, 1).add(&ctx, &x);
            assert!(y.sub(&ctx, &y).is_zero());
        }
    }

    #[test]
    fn inv_of_truncated_zero_fails() {
        let ctx = eq2();
        let tiny = CoefficientElem::s_term(&ctx, 1, Rat::from_integer(25)).unwrap();
        assert!(matches!(tiny.inv(&ctx), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn monomial_roots() {
        let ctx = eq2();
        let s = CoefficientElem::s_term(&ctx, 1, rat(1, 1)).unwrap();
        let r = s.nth_root(&ctx, 3).unwrap();
        assert_eq!(r, CoefficientElem::s_term(&ctx, 1, rat(1, 3)).unwrap());
        let s2 = CoefficientElem::s_term(&ctx, 1, rat(2, 1)).unwrap();
        assert_eq!(s2.nth_root(&ctx, 2).unwrap(), s);
    }

    #[test]
    fn eisenstein_root_of_p() {
        let ctx = mx2(2);
        let p = CoefficientElem::from_int(&ctx, 2);
        let root = p.nth_root(&ctx, 2).unwrap();
        assert_eq!(root, CoefficientElem::pi_term(&ctx, 1, 1).unwrap());
    }

    #[test]
    fn unit_roots_round_trip() {
        let ctx = mx2(1);
        let x = CoefficientElem::from_int(&ctx, 3);
        let cube = x.pow(&ctx, 3).unwrap();
        assert_eq!(cube.nth_root(&ctx, 3).unwrap(), x);
    }

    #[test]
    fn hensel_p_root_cases() {
        let ctx = mx2(1);
        // 9 = 3^2 is a square unit in Z_2, 3 is not
        let nine = CoefficientElem::from_int(&ctx, 9);
        let r = nine.nth_root(&ctx, 2).unwrap();
        assert_eq!(r.mul(&ctx, &r), nine);
        let three = CoefficientElem::from_int(&ctx, 3);
        assert!(matches!(three.nth_root(&ctx, 2), Err(Error::RootNotRepresentable(_))));
    }

    #[test]
    fn frobenius_additivity() {
        let ctx = FieldCtx::equal_char(3, 3, Rat::from_integer(20)).unwrap();
        let x = CoefficientElem::s_term(&ctx, 2, rat(1, 3))
            .unwrap()
            .add(&ctx, &CoefficientElem::from_int(&ctx, 1));
        let y = CoefficientElem::s_term(&ctx, 2, rat(2, 1))
            .unwrap()
            .add(&ctx, &CoefficientElem::s_term(&ctx, 1, rat(1, 2)).unwrap());
        let lhs = x.add(&ctx, &y).pow(&ctx, 3).unwrap();
        let rhs = x.pow(&ctx, 3).unwrap().add(&ctx, &y.pow(&ctx, 3).unwrap());
        assert_eq!(lhs, rhs);
    }
}
