//! Versioned interchange documents.
//!
//! Every input the CLI accepts is a JSON document `{kind, version, payload}`
//! with a per-kind payload schema. Unknown fields are rejected so that typos
//! fail loudly instead of being ignored. Rationals travel as `"a/b"` strings
//! (and valuations additionally as `"inf"`), never as floats; expressions
//! (coefficients, polynomials, rational functions) travel as mini-language
//! strings parsed by [`crate::parse`].

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::annulus::{AnnulusSeries, Geom};
use crate::bivariant::{BivariantFormFp, Point};
use crate::enhancement::{ComponentForm, ExtensionRecipe, PEnhancement};
use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::lifting::{GluingPlan, LocalPiece, StarPiece};
use crate::log_curve::{
    Component, ComponentMap, LogCurve, LogMorphism, MapKind, Node, PointRef,
};
use crate::normalize::CoverPresentation;
use crate::parse::{parse_coefficient, parse_poly, parse_rational_fn};
use crate::rational::{parse_rat, parse_val, Rat, Val};
use crate::valued_field::FieldCtx;

pub const DOC_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Document {
    Cover { version: u32, payload: CoverDoc },
    Curve { version: u32, payload: CurveDoc },
    Morphism { version: u32, payload: MorphismDoc },
    Enhancement { version: u32, payload: EnhancementDoc },
    Plan { version: u32, payload: PlanDoc },
}

impl Document {
    pub fn from_json(text: &str) -> Result<Document> {
        let doc: Document = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("document schema: {e}")))?;
        let version = match &doc {
            Document::Cover { version, .. }
            | Document::Curve { version, .. }
            | Document::Morphism { version, .. }
            | Document::Enhancement { version, .. }
            | Document::Plan { version, .. } => *version,
        };
        if version != DOC_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported document version {version}, expected {DOC_VERSION}"
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("document serialization");
        text.push('\n');
        text
    }
}

/// The base valued field of a cover document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldDoc {
    EqualChar { p: u32, q: u32, precision: String },
    MixedChar { p: u32, e: i64, precision: String },
}

impl FieldDoc {
    pub fn ctx(&self) -> Result<FieldCtx> {
        match self {
            FieldDoc::EqualChar { p, q, precision } => {
                FieldCtx::equal_char(*p, *q, parse_rat(precision)?)
            }
            FieldDoc::MixedChar { p, e, precision } => {
                FieldCtx::mixed_char(*p, *e, parse_rat(precision)?)
            }
        }
    }
}

/// The residue field of curve/morphism/enhancement/plan documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueFieldDoc {
    pub p: u32,
    pub m: u32,
}

impl ResidueFieldDoc {
    pub fn field(&self) -> Result<GfField> {
        GfField::new(self.p, self.m)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeomDoc {
    Annulus { r: String },
    Disc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub exp: i64,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub field: FieldDoc,
    pub geometry: GeomDoc,
    pub degree: i64,
    pub terms: Vec<TermDoc>,
}

impl CoverDoc {
    pub fn build(&self) -> Result<(FieldCtx, CoverPresentation)> {
        let ctx = self.field.ctx()?;
        let geom = match &self.geometry {
            GeomDoc::Annulus { r } => Geom::annulus(parse_rat(r)?),
            GeomDoc::Disc => Geom::Disc,
        };
        let mut terms = Vec::new();
        for t in &self.terms {
            terms.push((t.exp, parse_coefficient(&ctx, &t.coeff)?));
        }
        let phi = AnnulusSeries::from_terms(&ctx, geom, terms);
        let pres = CoverPresentation::new(&ctx, phi, self.degree)?;
        Ok((ctx, pres))
    }
}

/// Point references are written `"component/point"`.
pub fn parse_ref(s: &str) -> Result<PointRef> {
    match s.split_once('/') {
        Some((c, q)) if !c.is_empty() && !q.is_empty() => Ok((c.to_string(), q.to_string())),
        _ => Err(Error::InvalidInput(format!(
            "point reference {s:?} is not of the form component/point"
        ))),
    }
}

pub fn fmt_ref((c, q): &PointRef) -> String {
    format!("{c}/{q}")
}

fn parse_location(gf: &GfField, s: &str) -> Result<Point> {
    if s.trim() == "inf" {
        return Ok(Point::Infinity);
    }
    let f = parse_poly(gf, s)?.monic(gf)?;
    if f.deg() < 1 || f.factor(gf)? != vec![(f.clone(), 1)] {
        return Err(Error::InvalidInput(format!("location {s:?} is not irreducible")));
    }
    Ok(Point::Finite(f))
}

fn fmt_location(point: &Point) -> String {
    match point {
        Point::Finite(f) => f.to_string(),
        Point::Infinity => "inf".to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub id: String,
    pub genus: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub branch1: String,
    pub branch2: String,
    pub modulus: String,
}

/// A log curve without its residue field (shared by curve and morphism
/// documents).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveBody {
    pub components: Vec<ComponentDoc>,
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub marked: Vec<String>,
    #[serde(default)]
    pub locations: BTreeMap<String, String>,
}

impl CurveBody {
    pub fn build(&self, gf: &GfField) -> Result<LogCurve> {
        let components = self
            .components
            .iter()
            .map(|c| Component { id: c.id.clone(), genus: c.genus })
            .collect();
        let mut nodes = Vec::new();
        for n in &self.nodes {
            nodes.push(Node {
                id: n.id.clone(),
                branch1: parse_ref(&n.branch1)?,
                branch2: parse_ref(&n.branch2)?,
                modulus: parse_rat(&n.modulus)?,
            });
        }
        let marked = self.marked.iter().map(|m| parse_ref(m)).collect::<Result<Vec<_>>>()?;
        let mut locations = BTreeMap::new();
        for (key, loc) in &self.locations {
            locations.insert(parse_ref(key)?, parse_location(gf, loc)?);
        }
        Ok(LogCurve { components, nodes, marked, locations })
    }

    pub fn of(curve: &LogCurve) -> CurveBody {
        CurveBody {
            components: curve
                .components
                .iter()
                .map(|c| ComponentDoc { id: c.id.clone(), genus: c.genus })
                .collect(),
            nodes: curve
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    branch1: fmt_ref(&n.branch1),
                    branch2: fmt_ref(&n.branch2),
                    modulus: n.modulus.to_string(),
                })
                .collect(),
            marked: curve.marked.iter().map(fmt_ref).collect(),
            locations: curve
                .locations
                .iter()
                .map(|(k, v)| (fmt_ref(k), fmt_location(v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub field: ResidueFieldDoc,
    pub curve: CurveBody,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentMapDoc {
    pub target: String,
    /// `"radicial"` or a rational function in `w`
    pub map: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMapDoc {
    pub image: String,
    pub multiplicity: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub field: ResidueFieldDoc,
    pub source: CurveBody,
    pub target: CurveBody,
    pub component_maps: BTreeMap<String, ComponentMapDoc>,
    pub point_maps: BTreeMap<String, PointMapDoc>,
}

impl MorphismDoc {
    pub fn build(&self) -> Result<(GfField, LogMorphism)> {
        let gf = self.field.field()?;
        let source = self.source.build(&gf)?;
        let target = self.target.build(&gf)?;
        let mut component_maps = BTreeMap::new();
        for (id, m) in &self.component_maps {
            let kind = if m.map.trim() == "radicial" {
                MapKind::Radicial
            } else {
                MapKind::Separable(parse_rational_fn(&gf, &m.map)?)
            };
            component_maps.insert(id.clone(), ComponentMap { target: m.target.clone(), kind });
        }
        let mut point_maps = BTreeMap::new();
        for (key, m) in &self.point_maps {
            point_maps.insert(parse_ref(key)?, (parse_ref(&m.image)?, m.multiplicity));
        }
        let lam = LogMorphism { source, target, component_maps, point_maps };
        Ok((gf, lam))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnhancementDoc {
    /// per-component v(δ): `"a/b"` or `"inf"`
    pub deltas: BTreeMap<String, String>,
    /// per-component form: `"trace"` or a payload rational function in `w`
    pub forms: BTreeMap<String, String>,
    #[serde(default)]
    pub s_overrides: BTreeMap<String, i64>,
}

impl EnhancementDoc {
    pub fn build(&self, gf: &GfField) -> Result<PEnhancement> {
        let mut deltas = BTreeMap::new();
        for (id, v) in &self.deltas {
            deltas.insert(id.clone(), parse_val(v)?);
        }
        let mut forms = BTreeMap::new();
        for (id, f) in &self.forms {
            let form = if f.trim() == "trace" {
                ComponentForm::Trace
            } else {
                ComponentForm::Form(BivariantFormFp::radicial(parse_rational_fn(gf, f)?)?)
            };
            forms.insert(id.clone(), form);
        }
        let mut s_overrides = BTreeMap::new();
        for (key, s) in &self.s_overrides {
            s_overrides.insert(parse_ref(key)?, *s);
        }
        Ok(PEnhancement { deltas, forms, s_overrides })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PieceDoc {
    Kummer { n: i64 },
    Binomial { l: i64, v_c: Val },
}

impl PieceDoc {
    fn build(&self) -> LocalPiece {
        match self {
            PieceDoc::Kummer { n } => LocalPiece::Kummer { n: *n },
            PieceDoc::Binomial { l, v_c } => LocalPiece::Binomial { l: *l, v_c: *v_c },
        }
    }

    fn of(piece: &LocalPiece) -> PieceDoc {
        match piece {
            LocalPiece::Kummer { n } => PieceDoc::Kummer { n: *n },
            LocalPiece::Binomial { l, v_c } => PieceDoc::Binomial { l: *l, v_c: *v_c },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeDoc {
    pub t_tilde: String,
    pub v_c: Val,
    pub c_is_p: bool,
    /// residue-field element code
    pub spike: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StarDoc {
    Tame,
    Wild(RecipeDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDoc {
    pub field: ResidueFieldDoc,
    pub v_r: String,
    pub v_s: String,
    pub star_pieces: BTreeMap<String, StarDoc>,
    pub disc_pieces: BTreeMap<String, PieceDoc>,
    pub annulus_pieces: BTreeMap<String, PieceDoc>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl PlanDoc {
    pub fn build(&self) -> Result<(GfField, GluingPlan)> {
        let gf = self.field.field()?;
        let q = gf.q;
        let mut star_pieces = BTreeMap::new();
        for (id, s) in &self.star_pieces {
            let piece = match s {
                StarDoc::Tame => StarPiece::Tame,
                StarDoc::Wild(r) => {
                    if r.spike >= q {
                        return Err(Error::InvalidInput(format!(
                            "spike code {} out of range for q = {q}",
                            r.spike
                        )));
                    }
                    StarPiece::Wild(ExtensionRecipe {
                        t_tilde: parse_rational_fn(&gf, &r.t_tilde)?,
                        v_c: r.v_c,
                        c_is_p: r.c_is_p,
                        spike: r.spike,
                    })
                }
            };
            star_pieces.insert(id.clone(), piece);
        }
        let mut disc_pieces = BTreeMap::new();
        for (key, piece) in &self.disc_pieces {
            disc_pieces.insert(parse_ref(key)?, piece.build());
        }
        let annulus_pieces =
            self.annulus_pieces.iter().map(|(k, v)| (k.clone(), v.build())).collect();
        let plan = GluingPlan {
            v_r: parse_rat(&self.v_r)?,
            v_s: parse_rat(&self.v_s)?,
            star_pieces,
            disc_pieces,
            annulus_pieces,
            warnings: self.warnings.clone(),
        };
        Ok((gf, plan))
    }

    pub fn of(gf: &GfField, plan: &GluingPlan) -> PlanDoc {
        PlanDoc {
            field: ResidueFieldDoc { p: gf.p, m: gf.m },
            v_r: plan.v_r.to_string(),
            v_s: plan.v_s.to_string(),
            star_pieces: plan
                .star_pieces
                .iter()
                .map(|(id, s)| {
                    let doc = match s {
                        StarPiece::Tame => StarDoc::Tame,
                        StarPiece::Wild(r) => StarDoc::Wild(RecipeDoc {
                            t_tilde: r.t_tilde.to_string(),
                            v_c: r.v_c,
                            c_is_p: r.c_is_p,
                            spike: r.spike,
                        }),
                    };
                    (id.clone(), doc)
                })
                .collect(),
            disc_pieces: plan
                .disc_pieces
                .iter()
                .map(|(k, v)| (fmt_ref(k), PieceDoc::of(v)))
                .collect(),
            annulus_pieces: plan
                .annulus_pieces
                .iter()
                .map(|(k, v)| (k.clone(), PieceDoc::of(v)))
                .collect(),
            warnings: plan.warnings.clone(),
        }
    }
}

/// The affine function v(δ)(t) = base + slope·t reported by cover commands.
pub fn monomial_json(m: &crate::normalize::MonomialFn) -> serde_json::Value {
    serde_json::json!({ "base": m.base.to_string(), "slope": m.slope })
}

pub fn parse_precision(s: &str) -> Result<Rat> {
    let r = parse_rat(s)?;
    if r <= Rat::from_integer(0) {
        return Err(Error::InvalidInput("precision must be positive".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn canonical_morphism_doc() -> Document {
        Document::from_json(
            r#"{
              "kind": "morphism",
              "version": 1,
              "payload": {
                "field": {"p": 2, "m": 1},
                "source": {
                  "components": [{"id": "c", "genus": 0}],
                  "marked": ["c/inf"],
                  "locations": {"c/inf": "inf"}
                },
                "target": {
                  "components": [{"id": "c", "genus": 0}],
                  "marked": ["c/inf"],
                  "locations": {"c/inf": "inf"}
                },
                "component_maps": {"c": {"target": "c", "map": "radicial"}},
                "point_maps": {"c/inf": {"image": "c/inf", "multiplicity": 2}}
              }
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn cover_document_round_trip() {
        let text = r#"{
          "kind": "cover",
          "version": 1,
          "payload": {
            "field": {"regime": "equal-char", "p": 2, "q": 2, "precision": "30"},
            "geometry": {"annulus": {"r": "1/2"}},
            "degree": 2,
            "terms": [
              {"exp": 2, "coeff": "1"},
              {"exp": 3, "coeff": "s^(1/2)"}
            ]
          }
        }"#;
        let doc = Document::from_json(text).unwrap();
        let Document::Cover { payload, .. } = &doc else { panic!() };
        let (ctx, pres) = payload.build().unwrap();
        assert_eq!(pres.degree, 2);
        assert_eq!(pres.phi.coeff(&ctx, 3).valuation(&ctx), Val::Finite(rat(1, 2)));
        // serialization is byte-deterministic
        assert_eq!(doc.to_json(), Document::from_json(&doc.to_json()).unwrap().to_json());
    }

    #[test]
    fn unknown_fields_and_bad_versions_are_rejected() {
        let bad = r#"{"kind": "curve", "version": 1, "payload": {
          "field": {"p": 2, "m": 1},
          "curve": {"components": [], "extra": 3}
        }}"#;
        assert!(Document::from_json(bad).is_err());
        let vers = r#"{"kind": "curve", "version": 7, "payload": {
          "field": {"p": 2, "m": 1},
          "curve": {"components": []}
        }}"#;
        assert!(matches!(Document::from_json(vers), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn morphism_document_builds() {
        let Document::Morphism { payload, .. } = canonical_morphism_doc() else { panic!() };
        let (gf, lam) = payload.build().unwrap();
        assert!(lam.validate(&gf).ok());
        assert!(lam.minimally_wild_check(&gf).ok());
    }

    #[test]
    fn locations_must_be_irreducible() {
        let gf = GfField::new(2, 1).unwrap();
        assert!(parse_location(&gf, "w^2 + w").is_err()); // w(w+1)
        assert!(parse_location(&gf, "w^2 + w + 1").is_ok());
        assert!(parse_location(&gf, "inf").is_ok());
    }

    #[test]
    fn plan_document_round_trip() {
        let gf = GfField::new(2, 1).unwrap();
        let plan = GluingPlan {
            v_r: rat(2, 5),
            v_s: rat(1, 5),
            star_pieces: [(
                "c".to_string(),
                StarPiece::Wild(ExtensionRecipe {
                    t_tilde: crate::poly::RationalFn::var(),
                    v_c: Val::Finite(rat(1, 2)),
                    c_is_p: false,
                    spike: 0,
                }),
            )]
            .into(),
            disc_pieces: [(
                ("c".to_string(), "inf".to_string()),
                LocalPiece::Binomial { l: 1, v_c: Val::Finite(rat(1, 2)) },
            )]
            .into(),
            annulus_pieces: BTreeMap::new(),
            warnings: vec![],
        };
        let doc = Document::Plan {
            version: DOC_VERSION,
            payload: PlanDoc::of(&gf, &plan),
        };
        let text = doc.to_json();
        let Document::Plan { payload, .. } = Document::from_json(&text).unwrap() else {
            panic!()
        };
        let (_, rebuilt) = payload.build().unwrap();
        assert_eq!(rebuilt, plan);
    }
}
