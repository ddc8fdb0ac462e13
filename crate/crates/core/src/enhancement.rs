//! Per-component different values and reduced bivariant forms attached to a
//! finite morphism of log curves, with their compatibility validators,
//! Riemann-Hurwitz balancing, slope bounds, and the reduction/realization
//! round trip for degree-p local models.

use crate::bivariant::{BivariantFormFp, Extension, FormClass, Point};
use crate::error::{Error, Result};
use crate::gf::{Fq, GfField};
use crate::log_curve::{LogMorphism, MapKind, PointRef, Report};
use crate::poly::{Poly, RationalFn};
#[cfg(test)]
use crate::rational::rat;
use crate::rational::{Rat, Val};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentForm {
    /// the canonical form of a separable map; stored as a tag so equality
    /// with the recomputed trace form is checkable
    Trace,
    Form(BivariantFormFp),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PEnhancement {
    /// v(delta) per source component, in [0, v(p)]
    pub deltas: BTreeMap<String, Val>,
    pub forms: BTreeMap<String, ComponentForm>,
    /// replaces computed s values at chosen points; used to probe how the
    /// validators react to corrupted data
    pub s_overrides: BTreeMap<PointRef, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Literal,
    Relaxed,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// violations of conditions 1-4, indexed by condition minus one
    pub conditions: [Vec<String>; 4],
    /// computed s values at located special points
    pub s_values: BTreeMap<PointRef, i64>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.conditions.iter().all(|c| c.is_empty())
    }

    pub fn all_violations(&self) -> Vec<String> {
        self.conditions
            .iter()
            .enumerate()
            .flat_map(|(i, v)| v.iter().map(move |m| format!("condition {}: {m}", i + 1)))
            .collect()
    }
}

impl PEnhancement {
    pub fn delta(&self, comp: &str) -> Result<Val> {
        self.deltas
            .get(comp)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("component {comp} has no delta value")))
    }

    /// The bivariant form on a component, with the trace tag resolved
    /// against the morphism's map.
    pub fn form_of(&self, gf: &GfField, lam: &LogMorphism, comp: &str) -> Result<BivariantFormFp> {
        let c = lam
            .source
            .component(comp)
            .ok_or_else(|| Error::InvalidInput(format!("unknown component {comp}")))?;
        if c.genus > 0 {
            return Err(Error::UnsupportedModel(format!(
                "component {comp} has genus {} and no rational model for forms",
                c.genus
            )));
        }
        match self.forms.get(comp) {
            None => Err(Error::InvalidInput(format!("component {comp} has no form"))),
            Some(ComponentForm::Form(f)) => Ok(f.clone()),
            Some(ComponentForm::Trace) => match &lam.component_map(comp)?.kind {
                MapKind::Separable(map) => BivariantFormFp::trace_form(gf, map),
                MapKind::Radicial => Err(Error::InvalidInput(format!(
                    "component {comp} is radicial; its form must be given explicitly"
                ))),
            },
        }
    }

    /// s value at a located special point: the negated log order of the
    /// component's form, unless overridden.
    pub fn s_at(&self, gf: &GfField, lam: &LogMorphism, p: &PointRef) -> Result<i64> {
        if let Some(&s) = self.s_overrides.get(p) {
            return Ok(s);
        }
        let form = self.form_of(gf, lam, &p.0)?;
        let loc = lam.source.location(p)?;
        Ok(-form.logord_at(gf, loc)?)
    }
}

/// Valuation of an integer in the residue characteristic: the p-part counts
/// v(p) apiece in mixed characteristic, and is infinite in equal
/// characteristic.
pub fn v_of_int(n: i64, p: u32, v_p: Val) -> Val {
    if n == 0 {
        return Val::Inf;
    }
    let mut k = 0i64;
    let mut m = n.unsigned_abs();
    while m.is_multiple_of(p as u64) {
        m /= p as u64;
        k += 1;
    }
    if k == 0 {
        return Val::zero();
    }
    match v_p {
        Val::Inf => Val::Inf,
        Val::Finite(v) => Val::Finite(v * Rat::from_integer(k)),
    }
}

/// Check the four compatibility conditions of an enhancement against a
/// validated morphism. `v_p` is the valuation of p in the lifting field
/// (finite in mixed characteristic, infinite in equal characteristic).
pub fn validate(
    gf: &GfField,
    lam: &LogMorphism,
    enh: &PEnhancement,
    strictness: Strictness,
    v_p: Val,
) -> Result<ValidationReport> {
    let mut rep = ValidationReport::default();

    for c in &lam.source.components {
        let cmap = lam.component_map(&c.id)?;
        let v_delta = enh.delta(&c.id)?;
        match &cmap.kind {
            MapKind::Separable(map) => {
                // condition 1: separable components carry the trace form
                // with trivial delta
                if v_delta != Val::zero() {
                    rep.conditions[0].push(format!(
                        "separable component {} has v(delta) = {v_delta}, expected 0",
                        c.id
                    ));
                }
                let tau = BivariantFormFp::trace_form(gf, map)?;
                let matches = match enh.forms.get(&c.id) {
                    Some(ComponentForm::Trace) => true,
                    Some(ComponentForm::Form(f)) => *f == tau,
                    None => false,
                };
                if !matches {
                    rep.conditions[0].push(format!(
                        "separable component {} does not carry its trace form",
                        c.id
                    ));
                }
            }
            MapKind::Radicial => {
                // condition 2: exact with 0 < v(delta) < v(p), or mixed at
                // the boundary v(delta) = v(p)
                let form = enh.form_of(gf, lam, &c.id)?;
                if !matches!(form.extension, Extension::Radicial) {
                    rep.conditions[1].push(format!(
                        "radicial component {} carries a form over a separable extension",
                        c.id
                    ));
                    continue;
                }
                let class = form.classify(gf)?;
                let in_open = Val::zero() < v_delta && v_delta < v_p;
                let at_boundary = v_delta == v_p && !v_p.is_inf();
                match class {
                    FormClass::Exact if in_open => {}
                    FormClass::Mixed if at_boundary => {}
                    _ => rep.conditions[1].push(format!(
                        "radicial component {}: {class} form with v(delta) = {v_delta} \
                         (v(p) = {v_p})",
                        c.id
                    )),
                }
            }
        }
    }

    // record s at every located special point on a form-carrying component
    for p in lam.source.special_points() {
        if lam.source.location(&p).is_err() {
            continue;
        }
        match enh.s_at(gf, lam, &p) {
            Ok(s) => {
                rep.s_values.insert(p, s);
            }
            Err(Error::UnsupportedModel(_)) => {}
            Err(e) => return Err(e),
        }
    }

    // condition 3 at nodes: antisymmetry and the edge monomial relation
    for z in &lam.source.nodes {
        let (Some(&s1), Some(&s2)) =
            (rep.s_values.get(&z.branch1), rep.s_values.get(&z.branch2))
        else {
            rep.conditions[2].push(format!(
                "node {}: s values not computable on both branches",
                z.id
            ));
            continue;
        };
        if s1 != -s2 {
            rep.conditions[2].push(format!(
                "node {}: s values {s1} and {s2} are not opposite",
                z.id
            ));
        }
        let d1 = enh.delta(&z.branch1.0)?;
        let d2 = enh.delta(&z.branch2.0)?;
        let expected = d1 + Rat::from_integer(s1) * z.modulus;
        if expected != d2 {
            rep.conditions[2].push(format!(
                "node {}: v(delta) {d1} + {s1} * {} = {expected} does not reach {d2}",
                z.id, z.modulus
            ));
        }
    }

    // condition 3 at marked points
    for p in &lam.source.marked {
        let Some(&s) = rep.s_values.get(p) else { continue };
        let n = lam.multiplicity(p)?;
        if n % gf.p as i64 == 0 {
            if s >= 0 {
                rep.conditions[2].push(format!(
                    "wild marked point {}:{} has s = {s}, expected s < 0",
                    p.0, p.1
                ));
            }
        } else {
            if s != 0 {
                rep.conditions[2].push(format!(
                    "tame marked point {}:{} has s = {s}, expected 0",
                    p.0, p.1
                ));
            }
            let v_delta = enh.delta(&p.0)?;
            let v_n = v_of_int(n, gf.p, v_p);
            if v_delta != v_n {
                rep.conditions[2].push(format!(
                    "tame marked point {}:{}: v(delta) = {v_delta}, expected v({n}) = {v_n}",
                    p.0, p.1
                ));
            }
        }
    }

    // condition 4 at ordinary points: the form is trivial there
    let special: BTreeSet<PointRef> = lam.source.special_points().into_iter().collect();
    for c in &lam.source.components {
        let Ok(form) = enh.form_of(gf, lam, &c.id) else { continue };
        let located: BTreeSet<&Point> = special
            .iter()
            .filter(|p| p.0 == c.id)
            .filter_map(|p| lam.source.locations.get(p))
            .collect();
        for q in form.support(gf)? {
            if located.contains(&q) {
                continue;
            }
            match strictness {
                Strictness::Literal => {
                    let s = -form.logord_at(gf, &q)?;
                    if s != 0 {
                        rep.conditions[3].push(format!(
                            "component {}: ordinary point {q} has s = {s}, expected 0",
                            c.id
                        ));
                    }
                }
                Strictness::Relaxed => {
                    let ord = form.ord_at(gf, &q)?;
                    if ord != 0 {
                        rep.conditions[3].push(format!(
                            "component {}: ordinary point {q} has form order {ord}, expected 0",
                            c.id
                        ));
                    }
                }
            }
        }
    }

    Ok(rep)
}

/// Riemann-Hurwitz residual at a component vertex:
/// 2g_src - 2 - n(2g_tgt - 2) minus the sum over closed points of
/// deg(q) * (-s_q + n_q - 1). Zero for valid enhancements.
pub fn rh_balance(
    gf: &GfField,
    lam: &LogMorphism,
    enh: &PEnhancement,
    comp: &str,
) -> Result<i64> {
    let c = lam
        .source
        .component(comp)
        .ok_or_else(|| Error::InvalidInput(format!("unknown component {comp}")))?;
    let cmap = lam.component_map(comp)?;
    let tgt = lam
        .target
        .component(&cmap.target)
        .ok_or_else(|| Error::InvalidInput(format!("unknown target component {}", cmap.target)))?;
    if c.genus > 0 || tgt.genus > 0 {
        return Err(Error::UnsupportedModel(
            "balancing requires rational models on both sides".into(),
        ));
    }
    let form = enh.form_of(gf, lam, comp)?;
    let n_y = cmap.degree(gf);
    let lhs = -2 - n_y * (-2);

    // closed points that can contribute: the form's support plus the located
    // special points of the component
    let mut points: BTreeMap<Point, Option<PointRef>> =
        form.support(gf)?.into_iter().map(|q| (q, None)).collect();
    for p in lam.source.special_points() {
        if p.0 != comp {
            continue;
        }
        let loc = lam.source.location(&p)?.clone();
        points.insert(loc, Some(p));
    }

    let mut total = 0;
    for (q, named) in points {
        let (s, n_q) = match named {
            Some(p) => (enh.s_at(gf, lam, &p)?, lam.multiplicity(&p)?),
            None => (-form.logord_at(gf, &q)?, form.ram_index(gf, &q)?),
        };
        total += q.degree() * (-s + n_q - 1);
    }
    Ok(lhs - total)
}

/// Slope bounds at located special points: v(n) >= v(delta) >= v(n + s),
/// plus the mixed-characteristic exclusion of s in pZ minus zero.
pub fn slope_bounds_check(
    gf: &GfField,
    lam: &LogMorphism,
    enh: &PEnhancement,
    v_p: Val,
) -> Result<Report> {
    let mut rep = Report::default();
    let mixed = !v_p.is_inf();
    for p in lam.source.special_points() {
        if lam.source.location(&p).is_err() {
            continue;
        }
        let s = match enh.s_at(gf, lam, &p) {
            Ok(s) => s,
            Err(Error::UnsupportedModel(_)) => continue,
            Err(e) => return Err(e),
        };
        let n = lam.multiplicity(&p)?;
        let v_delta = enh.delta(&p.0)?;
        let upper = v_of_int(n, gf.p, v_p);
        let lower = v_of_int(n + s, gf.p, v_p);
        if !(lower <= v_delta && v_delta <= upper) {
            rep.push(format!(
                "point {}:{}: v(delta) = {v_delta} outside [v({} + {s}), v({})] = [{lower}, {upper}]",
                p.0, p.1, n, n
            ));
        }
        if mixed && s != 0 && s % gf.p as i64 == 0 {
            rep.push(format!(
                "point {}:{}: slope {s} is a nonzero multiple of p in mixed characteristic",
                p.0, p.1
            ));
        }
    }
    Ok(rep)
}

/// Input data for reducing the trace form of a degree-p local extension
/// z = w^p + c*t: the reduced tame parameter and the size of c.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regime {
    /// separable reduction: the extension reduces to a rational map
    Separable { map: RationalFn },
    /// radicial reduction with v(c) strictly between 0 and v(p)
    Pure { t_tilde: RationalFn, v_c: Val },
    /// radicial reduction at the boundary v(c) = v(p); the spike scalar is
    /// the residue of c/p against the canonical tame reduction
    MixedBoundary { t_tilde: RationalFn, spike: Fq },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub form: BivariantFormFp,
    pub v_delta: Val,
}

pub fn reduce_trace_form(gf: &GfField, regime: &Regime, v_p: Val) -> Result<Reduction> {
    match regime {
        Regime::Separable { map } => Ok(Reduction {
            form: BivariantFormFp::trace_form(gf, map)?,
            v_delta: Val::zero(),
        }),
        Regime::Pure { t_tilde, v_c } => {
            if !(Val::zero() < *v_c && *v_c < v_p) {
                return Err(Error::IncompatibleRegime(format!(
                    "pure regime needs 0 < v(c) < v(p), got v(c) = {v_c}"
                )));
            }
            let payload = t_tilde.derivative(gf)?;
            if payload.is_zero() {
                return Err(Error::InvalidInput(
                    "tame parameter is a p-th power; its differential vanishes".into(),
                ));
            }
            Ok(Reduction { form: BivariantFormFp::radicial(payload)?, v_delta: *v_c })
        }
        Regime::MixedBoundary { t_tilde, spike } => {
            if v_p.is_inf() {
                return Err(Error::IncompatibleRegime(
                    "the boundary v(c) = v(p) is empty in equal characteristic".into(),
                ));
            }
            if *spike == 0 {
                return Err(Error::InvalidInput("mixed reduction with zero spike".into()));
            }
            let spike_term =
                RationalFn::from_poly(Poly::monomial(*spike, gf.p as usize - 1));
            let payload = t_tilde.derivative(gf)?.add(gf, &spike_term)?;
            Ok(Reduction { form: BivariantFormFp::radicial(payload)?, v_delta: v_p })
        }
    }
}

/// The local extension data produced by realizing a form: z = w^p + c*t with
/// t lifting t_tilde and v(c) = v_delta (c = p exactly at the boundary).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionRecipe {
    pub t_tilde: RationalFn,
    pub v_c: Val,
    pub c_is_p: bool,
    pub spike: Fq,
}

impl ExtensionRecipe {
    pub fn regime(&self) -> Regime {
        if self.c_is_p {
            Regime::MixedBoundary { t_tilde: self.t_tilde.clone(), spike: self.spike }
        } else {
            Regime::Pure { t_tilde: self.t_tilde.clone(), v_c: self.v_c }
        }
    }
}

pub fn realize_form(
    gf: &GfField,
    form: &BivariantFormFp,
    v_delta: Val,
    v_p: Val,
) -> Result<ExtensionRecipe> {
    let class = form.classify(gf)?;
    match class {
        FormClass::Exact => {
            if !(Val::zero() < v_delta && v_delta < v_p) {
                return Err(Error::IncompatibleRegime(format!(
                    "exact form needs 0 < v(delta) < v(p), got {v_delta}"
                )));
            }
            Ok(ExtensionRecipe {
                t_tilde: form.payload.antiderivative(gf)?,
                v_c: v_delta,
                c_is_p: false,
                spike: 0,
            })
        }
        FormClass::Mixed => {
            if v_delta != v_p || v_p.is_inf() {
                return Err(Error::IncompatibleRegime(format!(
                    "mixed form needs v(delta) = v(p) finite, got {v_delta} with v(p) = {v_p}"
                )));
            }
            let c = form.payload.cartier(gf)?;
            let spike = gf.pow(c.num().coeff(0), gf.p as i64);
            let spike_term =
                RationalFn::from_poly(Poly::monomial(spike, gf.p as usize - 1));
            let exact_part = form.payload.sub(gf, &spike_term)?;
            Ok(ExtensionRecipe {
                t_tilde: exact_part.antiderivative(gf)?,
                v_c: v_p,
                c_is_p: true,
                spike,
            })
        }
        FormClass::Neither => Err(Error::IncompatibleRegime(
            "a form that is neither exact nor mixed is not a reduced trace form".into(),
        )),
    }
}
