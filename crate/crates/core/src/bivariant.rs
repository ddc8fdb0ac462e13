//! Bivariant forms on degree-p extensions of rational function fields over
//! F_q: order and log-order at closed points of the projective line, the
//! exact/mixed classification, and trace forms of separable maps.
//!
//! Closed points are represented by their monic irreducible minimal
//! polynomials over F_q (plus the point at infinity), so all computations
//! stay inside F_q[w].

use crate::error::{Error, Result};
use crate::gf::GfField;
use crate::poly::{Poly, RationalFn};

/// A closed point of the projective line over F_q.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    /// The vanishing locus of a monic irreducible polynomial.
    Finite(Poly),
    Infinity,
}

impl Point {
    pub fn origin() -> Point {
        Point::Finite(Poly::var())
    }

    /// The point w = a for a rational value a.
    pub fn rational(gf: &GfField, a: u32) -> Point {
        Point::Finite(Poly::from_coeffs(vec![gf.neg(a), 1]))
    }

    /// Residue degree over F_q.
    pub fn degree(&self) -> i64 {
        match self {
            Point::Finite(pi) => pi.deg(),
            Point::Infinity => 1,
        }
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Finite(pi) => write!(f, "({} = 0)", pi),
            Point::Infinity => write!(f, "(w = inf)"),
        }
    }
}

/// How the upstairs field F = F_q(w) sits over the downstairs field E.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extension {
    /// E = F^p, the inclusion of p-th powers; purely inseparable of degree p.
    Radicial,
    /// E = F_q(z) embedded by z = map(w); must be separable.
    Separable { map: RationalFn },
}

/// A homomorphism Omega_E -> Omega_F written as dz |-> payload * dw, where z
/// is the downstairs coordinate. The payload determines everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariantFormFp {
    pub extension: Extension,
    pub payload: RationalFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormClass {
    Exact,
    Mixed,
    Neither,
}

impl std::fmt::Display for FormClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormClass::Exact => write!(f, "exact"),
            FormClass::Mixed => write!(f, "mixed"),
            FormClass::Neither => write!(f, "neither"),
        }
    }
}

impl BivariantFormFp {
    pub fn radicial(payload: RationalFn) -> Result<BivariantFormFp> {
        if payload.is_zero() {
            return Err(Error::InvalidInput("bivariant form with zero payload".into()));
        }
        Ok(BivariantFormFp { extension: Extension::Radicial, payload })
    }

    /// Where the point goes downstairs under a separable map, as a minimal
    /// polynomial in the z coordinate (None = infinity). Found by searching
    /// monic irreducibles mu with deg mu | deg pi for pi | num(mu(map)).
    fn image_point(gf: &GfField, map: &RationalFn, q: &Point) -> Result<Option<Poly>> {
        match q {
            Point::Infinity => {
                if map.deg() > 0 {
                    return Ok(None);
                }
                // the value at infinity is the ratio of top coefficients
                // (or zero when the numerator has smaller degree)
                let c = if map.deg() == 0 {
                    gf.mul(map.num().leading(), gf.inv(map.den().leading())?)
                } else {
                    0
                };
                Ok(Some(Poly::from_coeffs(vec![gf.neg(c), 1])))
            }
            Point::Finite(pi) => {
                if map.den().multiplicity(gf, pi)? > 0 {
                    return Ok(None);
                }
                let dq = pi.deg();
                for d in 1..=dq {
                    if dq % d != 0 {
                        continue;
                    }
                    for mu in monic_irreducibles(gf, d as usize)? {
                        if map.compose_num(gf, &mu).multiplicity(gf, pi)? > 0 {
                            return Ok(Some(mu));
                        }
                    }
                }
                Err(Error::InvalidInput(format!(
                    "no image point found for {q} (map may be constant)"
                )))
            }
        }
    }

    /// Ramification index of the extension at a point of the upstairs line.
    pub fn ram_index(&self, gf: &GfField, q: &Point) -> Result<i64> {
        match &self.extension {
            Extension::Radicial => Ok(gf.p as i64),
            Extension::Separable { map } => match q {
                Point::Finite(pi) => match Self::image_point(gf, map, q)? {
                    // mu has a simple zero at the image, so ord_q of the
                    // pulled back uniformizer is the ramification index
                    Some(mu) => {
                        Ok(map.compose_num(gf, &mu).multiplicity(gf, pi)? as i64
                            - mu.deg() * map.den().multiplicity(gf, pi)? as i64)
                    }
                    None => Ok(map.den().multiplicity(gf, pi)? as i64),
                },
                Point::Infinity => {
                    if map.deg() > 0 {
                        Ok(map.deg())
                    } else {
                        let chart = map.at_infinity_chart(gf)?;
                        let c = chart.eval(gf, 0)?;
                        let shifted = chart.sub(gf, &RationalFn::from_poly(Poly::constant(c)))?;
                        shifted.ord_at(gf, &Poly::var())
                    }
                }
            },
        }
    }

    /// Order of the form at a point, as a section of Hom(Omega_E, Omega_F).
    /// Computed as ord_q(payload * dw) - e_q * ord_image(dz).
    pub fn ord_at(&self, gf: &GfField, q: &Point) -> Result<i64> {
        if self.payload.is_zero() {
            return Err(Error::InvalidInput("order of a zero form".into()));
        }
        let e = self.ram_index(gf, q)?;
        let omega_ord = match q {
            Point::Finite(pi) => self.payload.ord_at(gf, pi)?,
            Point::Infinity => -self.payload.deg() - 2,
        };
        let dz_ord = match &self.extension {
            Extension::Radicial => match q {
                Point::Finite(_) => 0,
                Point::Infinity => -2,
            },
            Extension::Separable { map } => match Self::image_point(gf, map, q)? {
                Some(_) => 0,
                None => -2,
            },
        };
        Ok(omega_ord - e * dz_ord)
    }

    /// Logarithmic order: ord - e + 1, against the dlog lattices on both sides.
    pub fn logord_at(&self, gf: &GfField, q: &Point) -> Result<i64> {
        Ok(self.ord_at(gf, q)? - self.ram_index(gf, q)? + 1)
    }

    /// Closed points where the order can be nonzero: zeros and poles of the
    /// payload, poles of the map, and infinity. Sorted deterministically.
    pub fn support(&self, gf: &GfField) -> Result<Vec<Point>> {
        let mut pts = std::collections::BTreeSet::new();
        for poly in [self.payload.num(), self.payload.den()] {
            if poly.deg() > 0 {
                for (pi, _) in poly.factor(gf)? {
                    pts.insert(Point::Finite(pi));
                }
            }
        }
        if let Extension::Separable { map } = &self.extension {
            if map.den().deg() > 0 {
                for (pi, _) in map.den().factor(gf)? {
                    pts.insert(Point::Finite(pi));
                }
            }
        }
        let mut out: Vec<Point> = pts.into_iter().collect();
        out.push(Point::Infinity);
        Ok(out)
    }

    /// Sum over all closed points of deg(q) * ord_q(form). Equals
    /// 2g_F - 2 - n (2g_E - 2) = 2 deg - 2 for covers of the rational line.
    pub fn degree_sum(&self, gf: &GfField) -> Result<i64> {
        let mut sum = 0;
        for q in self.support(gf)? {
            sum += q.degree() * self.ord_at(gf, &q)?;
        }
        Ok(sum)
    }

    /// Exact/mixed classification of a form on the radicial extension.
    ///
    /// The payload g dw is exact iff its Cartier image vanishes; it is mixed
    /// iff the Cartier image is a nonzero constant c (so that subtracting
    /// c^p w^(p-1) dw leaves a nonzero exact part). The constant scaling is
    /// absorbed by the equivalence on tame reductions.
    pub fn classify(&self, gf: &GfField) -> Result<FormClass> {
        if !matches!(self.extension, Extension::Radicial) {
            return Err(Error::NotRadicial(
                "exact/mixed classification applies to the p-th power extension only".into(),
            ));
        }
        let cartier = self.payload.cartier(gf)?;
        if cartier.is_zero() {
            return Ok(FormClass::Exact);
        }
        if cartier.deg() != 0 || !cartier.is_polynomial() {
            return Ok(FormClass::Neither);
        }
        let c = cartier.num().coeff(0);
        let spike = Poly::monomial(gf.pow(c, gf.p as i64), gf.p as usize - 1);
        let exact_part = self.payload.sub(gf, &RationalFn::from_poly(spike))?;
        if exact_part.is_zero() {
            // a pure w^(p-1) dw spike has no tame-parameter part
            Ok(FormClass::Neither)
        } else {
            Ok(FormClass::Mixed)
        }
    }

    /// The canonical form of a separable map: dz |-> d(z o map) = map' dw.
    pub fn trace_form(gf: &GfField, map: &RationalFn) -> Result<BivariantFormFp> {
        let payload = map.derivative(gf)?;
        if payload.is_zero() {
            return Err(Error::InseparableMap(
                "the map has zero derivative, so its trace form vanishes".into(),
            ));
        }
        Ok(BivariantFormFp { extension: Extension::Separable { map: map.clone() }, payload })
    }
}

/// Monic irreducible polynomials of exact degree d, in coefficient order.
fn monic_irreducibles(gf: &GfField, d: usize) -> Result<Vec<Poly>> {
    let q = gf.q as u64;
    let mut out = vec![];
    for code in 0..q.pow(d as u32) {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut c = code;
        for _ in 0..d {
            coeffs.push((c % q) as u32);
            c /= q;
        }
        coeffs.push(1);
        let f = Poly::from_coeffs(coeffs);
        if f.factor(gf)? == vec![(f.clone(), 1)] {
            out.push(f);
        }
    }
    Ok(out)
}
