//! Assembly of a symbolic gluing plan from a validated enhancement, and its
//! verification by recomputing every local invariant with exact arithmetic.
//!
//! A plan does not build analytic spaces: it records, per component star,
//! marked-point disc and node annulus, a local model (Kummer or binomial)
//! plus the interface radii. Verification recomputes the different monomial
//! of each local model on its skeleton and matches it against the edge data
//! derived from the enhancement.

use crate::annulus::{AnnulusSeries, Geom};
use crate::enhancement::{
    reduce_trace_form, realize_form, validate, ExtensionRecipe, PEnhancement, Strictness,
};
use crate::error::{Error, Result};
use crate::log_curve::{LogMorphism, MapKind, PointRef};
use crate::normalize::{different_on_skeleton, CoverPresentation, MonomialFn};
use crate::rational::{rat, Rat, Val};
use crate::valued_field::{CoefficientElem, FieldCtx};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Local model of a disc or annulus piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalPiece {
    /// x = y^n
    Kummer { n: i64 },
    /// x = y^p + c·y^(p+l): slope-l wild model with v(c) = v_c
    Binomial { l: i64, v_c: Val },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StarPiece {
    /// separable component; its star lifts along the tame structure
    Tame,
    /// radicial component realized by z = w^p + c·t
    Wild(ExtensionRecipe),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingPlan {
    /// v(r): half-width guard of the star collars; 2 v(r) < every node modulus
    pub v_r: Rat,
    /// v(s): inner interface radius, 0 < v(s) < v(r)
    pub v_s: Rat,
    pub star_pieces: BTreeMap<String, StarPiece>,
    pub disc_pieces: BTreeMap<PointRef, LocalPiece>,
    pub annulus_pieces: BTreeMap<String, LocalPiece>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct LiftReport {
    /// recomputed different monomial per disc/annulus piece key
    pub edge_monomials: BTreeMap<String, MonomialFn>,
    pub violations: Vec<String>,
}

impl LiftReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn point_key(p: &PointRef) -> String {
    format!("{}/{}", p.0, p.1)
}

/// Build the gluing plan for a minimally wild morphism with a validated
/// enhancement (Relaxed reading).
pub fn build_plan(
    ctx: &FieldCtx,
    lam: &LogMorphism,
    enh: &PEnhancement,
) -> Result<GluingPlan> {
    let gf = &ctx.gf;
    if !lam.validate(gf).ok() || !lam.minimally_wild_check(gf).ok() {
        return Err(Error::ValidationRequired(
            "the morphism must pass finiteness and wildness checks first".into(),
        ));
    }
    let rep = validate(gf, lam, enh, Strictness::Relaxed, ctx.v_p())?;
    if !rep.ok() {
        return Err(Error::ValidationRequired(format!(
            "the enhancement is invalid: {}",
            rep.all_violations().join("; ")
        )));
    }

    let p = gf.p as i64;
    let mut warnings = vec![];

    // interface radii: 2 v(r) strictly below every node modulus, with a 5/4
    // guard for the derived collar annuli; v(s) = v(r)/2
    let min_mod = lam
        .source
        .nodes
        .iter()
        .map(|z| z.modulus)
        .min()
        .unwrap_or_else(|| rat(1, 1));
    let v_r = min_mod * rat(2, 5);
    let v_s = v_r * rat(1, 2);

    let mut star_pieces = BTreeMap::new();
    for c in &lam.source.components {
        let piece = match &lam.component_map(&c.id)?.kind {
            MapKind::Separable(_) => StarPiece::Tame,
            MapKind::Radicial => {
                let form = enh.form_of(gf, lam, &c.id)?;
                let recipe = realize_form(gf, &form, enh.delta(&c.id)?, ctx.v_p())?;
                StarPiece::Wild(recipe)
            }
        };
        star_pieces.insert(c.id.clone(), piece);
    }

    let mut disc_pieces = BTreeMap::new();
    for q in &lam.source.marked {
        let n = lam.multiplicity(q)?;
        let piece = if n % p != 0 {
            LocalPiece::Kummer { n }
        } else {
            let l = -enh.s_at(gf, lam, q)?;
            if l <= 0 {
                warnings.push(format!(
                    "disc piece at {} has non-positive slope {l}",
                    point_key(q)
                ));
            }
            LocalPiece::Binomial { l, v_c: enh.delta(&q.0)? }
        };
        disc_pieces.insert(q.clone(), piece);
    }

    let mut annulus_pieces = BTreeMap::new();
    for z in &lam.source.nodes {
        let n = lam.multiplicity(&z.branch1)?;
        let piece = if n % p != 0 {
            LocalPiece::Kummer { n }
        } else {
            // oriented from branch 1: the coefficient valuation is the delta
            // of the first side and the slope carries it to the second
            let l = enh.s_at(gf, lam, &z.branch1)?;
            LocalPiece::Binomial { l, v_c: enh.delta(&z.branch1.0)? }
        };
        annulus_pieces.insert(z.id.clone(), piece);
    }

    Ok(GluingPlan { v_r, v_s, star_pieces, disc_pieces, annulus_pieces, warnings })
}

/// The different monomial of a local model on an annulus of the given width:
/// slope l and value v(c) at the near end for the wild binomial model,
/// constant v(n) for Kummer.
fn piece_monomial(ctx: &FieldCtx, piece: &LocalPiece, width: Rat) -> Result<MonomialFn> {
    let p = ctx.gf.p as i64;
    let geom = Geom::annulus(width);
    let phi = match piece {
        LocalPiece::Kummer { n } => {
            AnnulusSeries::monomial(ctx, geom, CoefficientElem::one(ctx), *n)
        }
        LocalPiece::Binomial { l, v_c } => {
            let v = v_c
                .finite()
                .ok_or_else(|| Error::InvalidInput("binomial piece with v(c) = inf".into()))?;
            let c = CoefficientElem::of_valuation(ctx, v)?;
            AnnulusSeries::monomial(ctx, geom, CoefficientElem::one(ctx), p)
                .add(ctx, &AnnulusSeries::monomial(ctx, geom, c, p + l))
        }
    };
    let degree = match piece {
        LocalPiece::Kummer { n } => *n,
        LocalPiece::Binomial { .. } => p,
    };
    let pres = CoverPresentation::new(ctx, phi, degree)?;
    Ok(different_on_skeleton(ctx, &pres)?.monomial)
}

/// Recompute every local invariant of the plan and compare with the
/// enhancement. Failures are report entries, not errors.
pub fn verify_plan(
    ctx: &FieldCtx,
    plan: &GluingPlan,
    lam: &LogMorphism,
    enh: &PEnhancement,
) -> Result<LiftReport> {
    let gf = &ctx.gf;
    let p = gf.p as i64;
    let mut rep = LiftReport::default();

    // radii feasibility
    if !(Rat::zero() < plan.v_s && plan.v_s < plan.v_r) {
        rep.violations.push(format!(
            "radii must satisfy 0 < v(s) < v(r), got v(s) = {}, v(r) = {}",
            plan.v_s, plan.v_r
        ));
    }
    for z in &lam.source.nodes {
        if rat(2, 1) * plan.v_r >= z.modulus {
            rep.violations.push(format!(
                "2 v(r) = {} reaches the modulus {} of node {}",
                rat(2, 1) * plan.v_r,
                z.modulus,
                z.id
            ));
        }
    }

    // star pieces: reducing the recipe must reproduce the enhancement data
    for c in &lam.source.components {
        let Some(piece) = plan.star_pieces.get(&c.id) else {
            rep.violations.push(format!("component {} has no star piece", c.id));
            continue;
        };
        match (&lam.component_map(&c.id)?.kind, piece) {
            (MapKind::Separable(_), StarPiece::Tame) => {}
            (MapKind::Separable(_), StarPiece::Wild(_)) => {
                rep.violations
                    .push(format!("separable component {} has a wild star piece", c.id));
            }
            (MapKind::Radicial, StarPiece::Tame) => {
                rep.violations
                    .push(format!("radicial component {} has a tame star piece", c.id));
            }
            (MapKind::Radicial, StarPiece::Wild(recipe)) => {
                let red = reduce_trace_form(gf, &recipe.regime(), ctx.v_p())?;
                let form = enh.form_of(gf, lam, &c.id)?;
                if red.form.payload != form.payload {
                    rep.violations.push(format!(
                        "star piece of {} reduces to payload {}, expected {}",
                        c.id, red.form.payload, form.payload
                    ));
                }
                if red.v_delta != enh.delta(&c.id)? {
                    rep.violations.push(format!(
                        "star piece of {} reduces to v(delta) = {}, expected {}",
                        c.id,
                        red.v_delta,
                        enh.delta(&c.id)?
                    ));
                }
            }
        }
    }

    // disc pieces at marked points: collar monomial must match the edge data
    for q in &lam.source.marked {
        let Some(piece) = plan.disc_pieces.get(q) else {
            rep.violations.push(format!("marked point {} has no disc piece", point_key(q)));
            continue;
        };
        let n = lam.multiplicity(q)?;
        let expected = if n % p != 0 {
            if *piece != (LocalPiece::Kummer { n }) {
                rep.violations.push(format!(
                    "tame marked point {} needs the Kummer piece of degree {n}",
                    point_key(q)
                ));
                continue;
            }
            MonomialFn { base: Val::zero(), slope: 0 }
        } else {
            MonomialFn { base: enh.delta(&q.0)?, slope: -enh.s_at(gf, lam, q)? }
        };
        match piece_monomial(ctx, piece, plan.v_r) {
            Ok(m) => {
                if m != expected {
                    rep.violations.push(format!(
                        "disc piece at {}: different is {} + {}t, expected {} + {}t",
                        point_key(q),
                        m.base,
                        m.slope,
                        expected.base,
                        expected.slope
                    ));
                }
                rep.edge_monomials.insert(point_key(q), m);
            }
            Err(e) => rep
                .violations
                .push(format!("disc piece at {}: {e}", point_key(q))),
        }
    }

    // annulus pieces at nodes: both endpoint values and the slope must match
    for z in &lam.source.nodes {
        let Some(piece) = plan.annulus_pieces.get(&z.id) else {
            rep.violations.push(format!("node {} has no annulus piece", z.id));
            continue;
        };
        let n = lam.multiplicity(&z.branch1)?;
        if n % p != 0 {
            if *piece != (LocalPiece::Kummer { n }) {
                rep.violations.push(format!(
                    "tame node {} needs the Kummer piece of degree {n}",
                    z.id
                ));
            }
            continue;
        }
        let d1 = enh.delta(&z.branch1.0)?;
        let d2 = enh.delta(&z.branch2.0)?;
        match piece_monomial(ctx, piece, z.modulus) {
            Ok(m) => {
                if m.base != d1 {
                    rep.violations.push(format!(
                        "node {}: piece boundary value {} does not match v(delta) = {d1}",
                        z.id, m.base
                    ));
                }
                if m.eval(z.modulus) != d2 {
                    rep.violations.push(format!(
                        "node {}: piece far value {} does not match v(delta) = {d2}",
                        z.id,
                        m.eval(z.modulus)
                    ));
                }
                rep.edge_monomials.insert(format!("node {}", z.id), m);
            }
            Err(e) => rep.violations.push(format!("annulus piece at node {}: {e}", z.id)),
        }
    }

    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bivariant::{BivariantFormFp, Point};
    use crate::enhancement::ComponentForm;
    use crate::log_curve::{Component, ComponentMap, LogCurve, Node};
    use crate::poly::RationalFn;

    fn curve_one_marked() -> LogCurve {
        LogCurve {
            components: vec![Component { id: "c".into(), genus: 0 }],
            nodes: vec![],
            marked: vec![("c".into(), "inf".into())],
            locations: [(("c".into(), "inf".into()), Point::Infinity)].into(),
        }
    }

    fn canonical() -> (LogMorphism, PEnhancement) {
        let lam = LogMorphism {
            source: curve_one_marked(),
            target: curve_one_marked(),
            component_maps: [(
                "c".into(),
                ComponentMap { target: "c".into(), kind: MapKind::Radicial },
            )]
            .into(),
            point_maps: [(
                ("c".into(), "inf".into()),
                (("c".into(), "inf".into()), 2),
            )]
            .into(),
        };
        let enh = PEnhancement {
            deltas: [("c".into(), Val::Finite(rat(1, 2)))].into(),
            forms: [(
                "c".into(),
                ComponentForm::Form(BivariantFormFp::radicial(RationalFn::one()).unwrap()),
            )]
            .into(),
            s_overrides: BTreeMap::new(),
        };
        (lam, enh)
    }

    #[test]
    fn canonical_plan_round_trip() {
        let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
        let (lam, enh) = canonical();
        let plan = build_plan(&ctx, &lam, &enh).unwrap();
        assert_eq!(
            plan.disc_pieces[&("c".into(), "inf".into())],
            LocalPiece::Binomial { l: 1, v_c: Val::Finite(rat(1, 2)) }
        );
        assert!(matches!(plan.star_pieces["c"], StarPiece::Wild(_)));
        assert!(plan.warnings.is_empty());
        let report = verify_plan(&ctx, &plan, &lam, &enh).unwrap();
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn corrupted_plans_fail() {
        let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
        let (lam, enh) = canonical();
        let plan = build_plan(&ctx, &lam, &enh).unwrap();

        // slope perturbed on the disc piece
        let mut bad = plan.clone();
        bad.disc_pieces
            .insert(("c".into(), "inf".into()), LocalPiece::Binomial {
                l: 2,
                v_c: Val::Finite(rat(1, 2)),
            });
        assert!(!verify_plan(&ctx, &bad, &lam, &enh).unwrap().ok());

        // coefficient valuation off by 1/2
        let mut bad = plan.clone();
        bad.disc_pieces
            .insert(("c".into(), "inf".into()), LocalPiece::Binomial {
                l: 1,
                v_c: Val::Finite(rat(1, 1)),
            });
        assert!(!verify_plan(&ctx, &bad, &lam, &enh).unwrap().ok());

        // radii out of order
        let mut bad = plan.clone();
        bad.v_s = bad.v_r + rat(1, 1);
        assert!(!verify_plan(&ctx, &bad, &lam, &enh).unwrap().ok());
    }

    #[test]
    fn unvalidated_enhancement_is_rejected() {
        let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
        let (lam, mut enh) = canonical();
        enh.deltas.insert("c".into(), Val::zero());
        assert!(matches!(
            build_plan(&ctx, &lam, &enh),
            Err(Error::ValidationRequired(_))
        ));
    }

    #[test]
    fn two_component_wild_node() {
        // two radicial components joined at a wild node; the node edge
        // carries the delta difference and one side also has a wild marked
        // point
        let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
        let gf = &ctx.gf;
        let mk_curve = |modulus: Rat| LogCurve {
            components: vec![
                Component { id: "a".into(), genus: 0 },
                Component { id: "b".into(), genus: 0 },
            ],
            nodes: vec![Node {
                id: "z".into(),
                branch1: ("a".into(), "q1".into()),
                branch2: ("b".into(), "q2".into()),
                modulus,
            }],
            marked: vec![("a".into(), "inf".into())],
            locations: [
                (("a".into(), "q1".into()), Point::origin()),
                (("a".into(), "inf".into()), Point::Infinity),
                (("b".into(), "q2".into()), Point::origin()),
            ]
            .into(),
        };
        let lam = LogMorphism {
            source: mk_curve(rat(1, 4)),
            target: mk_curve(rat(1, 2)),
            component_maps: [
                ("a".into(), ComponentMap { target: "a".into(), kind: MapKind::Radicial }),
                ("b".into(), ComponentMap { target: "b".into(), kind: MapKind::Radicial }),
            ]
            .into(),
            point_maps: [
                (("a".into(), "q1".into()), (("a".into(), "q1".into()), 2)),
                (("a".into(), "inf".into()), (("a".into(), "inf".into()), 2)),
                (("b".into(), "q2".into()), (("b".into(), "q2".into()), 2)),
            ]
            .into(),
        };
        assert!(lam.validate(gf).ok(), "{:?}", lam.validate(gf).violations);
        assert!(lam.minimally_wild_check(gf).ok());

        // side a: payload dw, logord -1 at the node branch, so s1 = 1 and
        // the marked point at infinity absorbs the degree law
        let form_a = BivariantFormFp::radicial(RationalFn::one()).unwrap();
        // side b: payload w^2 dw, logord +1 at its branch, so s2 = -1
        let form_b =
            BivariantFormFp::radicial(RationalFn::var().pow(gf, 2).unwrap()).unwrap();
        let d1 = Val::Finite(rat(1, 2));
        let d2 = d1 + rat(1, 4); // d1 + s1 * modulus
        let enh = PEnhancement {
            deltas: [("a".into(), d1), ("b".into(), d2)].into(),
            forms: [
                ("a".into(), ComponentForm::Form(form_a)),
                ("b".into(), ComponentForm::Form(form_b)),
            ]
            .into(),
            s_overrides: BTreeMap::new(),
        };
        let rep = validate(gf, &lam, &enh, Strictness::Relaxed, ctx.v_p()).unwrap();
        assert!(rep.ok(), "{:?}", rep.all_violations());
        assert_eq!(crate::enhancement::rh_balance(gf, &lam, &enh, "a").unwrap(), 0);
        assert_eq!(crate::enhancement::rh_balance(gf, &lam, &enh, "b").unwrap(), 0);

        let plan = build_plan(&ctx, &lam, &enh).unwrap();
        assert_eq!(plan.annulus_pieces["z"], LocalPiece::Binomial { l: 1, v_c: d1 });
        assert_eq!(
            plan.disc_pieces[&("a".into(), "inf".into())],
            LocalPiece::Binomial { l: 1, v_c: d1 }
        );
        let report = verify_plan(&ctx, &plan, &lam, &enh).unwrap();
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn fully_tame_plan() {
        let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
        let gf = &ctx.gf;
        let mut lam = canonical().0;
        let cubic = RationalFn::var().pow(gf, 3).unwrap();
        lam.component_maps.get_mut("c").unwrap().kind = MapKind::Separable(cubic);
        lam.point_maps.insert(("c".into(), "inf".into()), (("c".into(), "inf".into()), 3));
        // the cubic also ramifies at the origin, which must be marked
        for curve in [&mut lam.source, &mut lam.target] {
            curve.marked.push(("c".into(), "orig".into()));
            curve.locations.insert(("c".into(), "orig".into()), Point::origin());
        }
        lam.point_maps.insert(("c".into(), "orig".into()), (("c".into(), "orig".into()), 3));
        let enh = PEnhancement {
            deltas: [("c".into(), Val::zero())].into(),
            forms: [("c".into(), ComponentForm::Trace)].into(),
            s_overrides: BTreeMap::new(),
        };
        let plan = build_plan(&ctx, &lam, &enh).unwrap();
        assert_eq!(plan.disc_pieces[&("c".into(), "inf".into())], LocalPiece::Kummer { n: 3 });
        assert!(matches!(plan.star_pieces["c"], StarPiece::Tame));
        let report = verify_plan(&ctx, &plan, &lam, &enh).unwrap();
        assert!(report.ok(), "{:?}", report.violations);
    }
}
