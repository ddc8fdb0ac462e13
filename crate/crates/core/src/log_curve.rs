//! Nodal curves over the residue field with marked points and node moduli,
//! finite morphisms between them, and the induced metric skeletons.
//!
//! Components are combinatorial records; only genus-0 components carry a
//! rational function-field model, and named special points on them may be
//! pinned to closed points of the line so the form computations downstream
//! can find them.

use crate::bivariant::Point;
use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::poly::RationalFn;
use crate::rational::{Rat, Val};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: String,
    pub genus: u32,
}

/// A point of a component, referenced by name.
pub type PointRef = (String, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub branch1: PointRef,
    pub branch2: PointRef,
    /// v(r) of the node modulus; must be positive.
    pub modulus: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogCurve {
    pub components: Vec<Component>,
    pub nodes: Vec<Node>,
    pub marked: Vec<PointRef>,
    /// coordinates of named points on genus-0 components
    pub locations: BTreeMap<PointRef, Point>,
}

/// Flat list of violations; empty means the check passed.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub violations: Vec<String>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, msg: String) {
        self.violations.push(msg);
    }
}

impl LogCurve {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// All special points: node branch points and marked points, in order.
    pub fn special_points(&self) -> Vec<PointRef> {
        let mut out = vec![];
        for n in &self.nodes {
            out.push(n.branch1.clone());
            out.push(n.branch2.clone());
        }
        out.extend(self.marked.iter().cloned());
        out
    }

    pub fn is_marked(&self, p: &PointRef) -> bool {
        self.marked.contains(p)
    }

    /// The node carrying this branch point, if any.
    pub fn node_at(&self, p: &PointRef) -> Option<&Node> {
        self.nodes.iter().find(|n| &n.branch1 == p || &n.branch2 == p)
    }

    pub fn validate(&self) -> Report {
        let mut rep = Report::default();
        let mut ids = BTreeSet::new();
        for c in &self.components {
            if !ids.insert(&c.id) {
                rep.push(format!("duplicate component id {}", c.id));
            }
        }
        let mut seen = BTreeSet::new();
        for p in self.special_points() {
            if self.component(&p.0).is_none() {
                rep.push(format!("point {}:{} references a missing component", p.0, p.1));
            }
            if !seen.insert(p.clone()) {
                rep.push(format!(
                    "point {}:{} is used by more than one node branch or marking",
                    p.0, p.1
                ));
            }
        }
        for n in &self.nodes {
            if n.modulus <= Rat::zero() {
                rep.push(format!("node {} has non-positive modulus {}", n.id, n.modulus));
            }
        }
        for p in self.locations.keys() {
            match self.component(&p.0) {
                None => rep.push(format!("location for {}:{} on a missing component", p.0, p.1)),
                Some(c) if c.genus > 0 => rep.push(format!(
                    "location for {}:{} on a component without a rational model",
                    p.0, p.1
                )),
                _ => {}
            }
        }
        rep
    }

    pub fn location(&self, p: &PointRef) -> Result<&Point> {
        self.locations.get(p).ok_or_else(|| {
            Error::InvalidInput(format!("point {}:{} has no coordinate on its component", p.0, p.1))
        })
    }

    pub fn skeleton(&self) -> MetricSkeleton {
        MetricSkeleton {
            vertices: self
                .components
                .iter()
                .map(|c| SkeletonVertex { id: c.id.clone(), genus: c.genus })
                .collect(),
            finite_edges: self
                .nodes
                .iter()
                .map(|n| FiniteEdge {
                    id: n.id.clone(),
                    from: n.branch1.0.clone(),
                    to: n.branch2.0.clone(),
                    length: n.modulus,
                })
                .collect(),
            infinite_edges: self.marked.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonVertex {
    pub id: String,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: Rat,
}

/// Metric skeleton: one finite vertex per component, an infinite ray per
/// marked point, finite edge lengths equal to node moduli.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSkeleton {
    pub vertices: Vec<SkeletonVertex>,
    pub finite_edges: Vec<FiniteEdge>,
    /// rays to marked points, carried as (component, point name)
    pub infinite_edges: Vec<PointRef>,
}

impl MetricSkeleton {
    pub fn edge_length(&self, id: &str) -> Option<Val> {
        self.finite_edges
            .iter()
            .find(|e| e.id == id)
            .map(|e| Val::Finite(e.length))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapKind {
    /// the p-power map onto the subfield of p-th powers
    Radicial,
    /// z = map(w) for a separable rational map
    Separable(RationalFn),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    pub target: String,
    pub kind: MapKind,
}

impl ComponentMap {
    pub fn degree(&self, gf: &GfField) -> i64 {
        match &self.kind {
            MapKind::Radicial => gf.p as i64,
            MapKind::Separable(f) => f.num().deg().max(f.den().deg()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogMorphism {
    pub source: LogCurve,
    pub target: LogCurve,
    pub component_maps: BTreeMap<String, ComponentMap>,
    /// source special point -> (target special point, multiplicity)
    pub point_maps: BTreeMap<PointRef, (PointRef, i64)>,
}

impl LogMorphism {
    pub fn component_map(&self, id: &str) -> Result<&ComponentMap> {
        self.component_maps
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("component {id} has no map assigned")))
    }

    pub fn point_image(&self, p: &PointRef) -> Result<&(PointRef, i64)> {
        self.point_maps
            .get(p)
            .ok_or_else(|| Error::InvalidInput(format!("point {}:{} has no image data", p.0, p.1)))
    }

    pub fn multiplicity(&self, p: &PointRef) -> Result<i64> {
        Ok(self.point_image(p)?.1)
    }

    /// Finiteness checks: images of special points are special of the right
    /// kind, node branch multiplicities agree, node moduli transform by the
    /// branch multiplicity, and multiplicities over each special target point
    /// sum to the component degree.
    pub fn validate(&self, gf: &GfField) -> Report {
        let mut rep = Report::default();
        for r in [self.source.validate(), self.target.validate()] {
            rep.violations.extend(r.violations);
        }

        for c in &self.source.components {
            match self.component_maps.get(&c.id) {
                None => rep.push(format!("component {} has no map assigned", c.id)),
                Some(m) => {
                    if self.target.component(&m.target).is_none() {
                        rep.push(format!(
                            "component {} maps to a missing target component {}",
                            c.id, m.target
                        ));
                    }
                }
            }
        }

        // point-level checks
        for p in self.source.special_points() {
            let Ok(((img, n), cmap)) =
                self.point_image(&p).and_then(|i| Ok((i, self.component_map(&p.0)?)))
            else {
                rep.push(format!("point {}:{} lacks image or component map data", p.0, p.1));
                continue;
            };
            if *n < 1 {
                rep.push(format!("point {}:{} has multiplicity {n} < 1", p.0, p.1));
            }
            if img.0 != cmap.target {
                rep.push(format!(
                    "point {}:{} maps onto component {} but its component maps to {}",
                    p.0, p.1, img.0, cmap.target
                ));
            }
            let src_marked = self.source.is_marked(&p);
            let img_marked = self.target.is_marked(img);
            let img_nodal = self.target.node_at(img).is_some();
            if src_marked && !img_marked {
                rep.push(format!("marked point {}:{} maps to an unmarked point", p.0, p.1));
            }
            if !src_marked && !img_nodal {
                rep.push(format!(
                    "node branch {}:{} maps to a point that is not a node branch",
                    p.0, p.1
                ));
            }
        }

        // node-level checks
        for z in &self.source.nodes {
            let (Ok((img1, n1)), Ok((img2, n2))) =
                (self.point_image(&z.branch1), self.point_image(&z.branch2))
            else {
                continue;
            };
            if n1 != n2 {
                rep.push(format!(
                    "node {}: branch multiplicities {n1} and {n2} differ",
                    z.id
                ));
                continue;
            }
            let (Some(t1), Some(t2)) = (self.target.node_at(img1), self.target.node_at(img2))
            else {
                continue;
            };
            if t1.id != t2.id {
                rep.push(format!(
                    "node {}: branches map to different target nodes {} and {}",
                    z.id, t1.id, t2.id
                ));
                continue;
            }
            if Rat::from_integer(*n1) * z.modulus != t1.modulus {
                rep.push(format!(
                    "node {}: modulus {} times multiplicity {n1} is not the target modulus {}",
                    z.id, z.modulus, t1.modulus
                ));
            }
        }

        // degree balance over each special target point, per source component
        for c in &self.source.components {
            let Some(cmap) = self.component_maps.get(&c.id) else { continue };
            let deg = cmap.degree(gf);
            for q in self.target.special_points() {
                if q.0 != cmap.target {
                    continue;
                }
                let total: i64 = self
                    .point_maps
                    .iter()
                    .filter(|(p, (img, _))| p.0 == c.id && *img == q)
                    .map(|(_, (_, n))| *n)
                    .sum();
                if total != deg {
                    rep.push(format!(
                        "component {}: multiplicities over {}:{} sum to {total}, expected the \
                         degree {deg}",
                        c.id, q.0, q.1
                    ));
                }
            }
        }

        rep
    }

    /// Wildness bounds: every multiplicity divisible by p equals p, each
    /// target-point fiber holds at most one such point, and radicial
    /// components carry multiplicity p everywhere.
    pub fn minimally_wild_check(&self, gf: &GfField) -> Report {
        let p = gf.p as i64;
        let mut rep = Report::default();
        let mut wild_per_fiber: BTreeMap<PointRef, Vec<PointRef>> = BTreeMap::new();
        for (q, (img, n)) in &self.point_maps {
            if n % p == 0 {
                if *n != p {
                    rep.push(format!(
                        "point {}:{} has multiplicity {n} divisible by p = {p} but not equal to it",
                        q.0, q.1
                    ));
                }
                wild_per_fiber.entry(img.clone()).or_default().push(q.clone());
            }
            if let Ok(cmap) = self.component_map(&q.0) {
                if matches!(cmap.kind, MapKind::Radicial) && *n != p {
                    rep.push(format!(
                        "point {}:{} on a radicial component has multiplicity {n}, expected {p}",
                        q.0, q.1
                    ));
                }
            }
        }
        for (img, pts) in wild_per_fiber {
            if pts.len() > 1 {
                let list: Vec<String> =
                    pts.iter().map(|q| format!("{}:{}", q.0, q.1)).collect();
                rep.push(format!(
                    "fiber over {}:{} contains {} wild points ({})",
                    img.0,
                    img.1,
                    pts.len(),
                    list.join(", ")
                ));
            }
        }
        rep
    }
}
