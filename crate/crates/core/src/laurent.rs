//! Laurent series over F_q with a tail bound, and the ramification
//! invariants of degree-p extensions k((y)) / k((x)) read off from them.
//!
//! The tail bound records how far the stored coefficients are trustworthy:
//! exponents at or beyond the bound are unknown. A series with no bound is
//! exact (a Laurent polynomial).

use crate::error::{Error, Result};
use crate::gf::{Fq, GfField};
use crate::rational::Val;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentSeriesFp {
    terms: BTreeMap<i64, Fq>,
    /// exponents >= this are not stored and not known; None = exact series
    tail: Option<i64>,
}

impl LaurentSeriesFp {
    pub fn new(terms: BTreeMap<i64, Fq>, tail: Option<i64>) -> Result<LaurentSeriesFp> {
        if let Some(t) = tail {
            if terms.keys().any(|&e| e >= t) {
                return Err(Error::InvalidInput(format!(
                    "series stores an exponent at or beyond its tail bound {t}"
                )));
            }
        }
        let terms = terms.into_iter().filter(|&(_, c)| c != 0).collect();
        Ok(LaurentSeriesFp { terms, tail })
    }

    pub fn zero() -> LaurentSeriesFp {
        LaurentSeriesFp { terms: BTreeMap::new(), tail: None }
    }

    /// c * t^e as an exact series.
    pub fn monomial(c: Fq, e: i64) -> LaurentSeriesFp {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(e, c);
        }
        LaurentSeriesFp { terms, tail: None }
    }

    pub fn from_exponents(exps: &[(i64, Fq)]) -> LaurentSeriesFp {
        let terms = exps.iter().copied().filter(|&(_, c)| c != 0).collect();
        LaurentSeriesFp { terms, tail: None }
    }

    pub fn terms(&self) -> &BTreeMap<i64, Fq> {
        &self.terms
    }

    pub fn tail(&self) -> Option<i64> {
        self.tail
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> Fq {
        self.terms.get(&e).copied().unwrap_or(0)
    }

    /// Least stored exponent with a nonzero coefficient.
    pub fn ord(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn add(&self, gf: &GfField, other: &LaurentSeriesFp) -> LaurentSeriesFp {
        let tail = match (self.tail, other.tail) {
            (None, t) | (t, None) => t,
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let mut terms = self.terms.clone();
        for (&e, &c) in &other.terms {
            let s = gf.add(terms.get(&e).copied().unwrap_or(0), c);
            if s == 0 {
                terms.remove(&e);
            } else {
                terms.insert(e, s);
            }
        }
        if let Some(t) = tail {
            terms.retain(|&e, _| e < t);
        }
        LaurentSeriesFp { terms, tail }
    }

    pub fn mul(&self, gf: &GfField, other: &LaurentSeriesFp) -> LaurentSeriesFp {
        let lo = |s: &LaurentSeriesFp| s.ord().unwrap_or(0);
        let tail = match (self.tail, other.tail) {
            (None, None) => None,
            (Some(a), None) => Some(a + lo(other)),
            (None, Some(b)) => Some(b + lo(self)),
            (Some(a), Some(b)) => Some((a + lo(other)).min(b + lo(self))),
        };
        let mut terms: BTreeMap<i64, Fq> = BTreeMap::new();
        for (&e1, &c1) in &self.terms {
            for (&e2, &c2) in &other.terms {
                let e = e1 + e2;
                if tail.is_some_and(|t| e >= t) {
                    continue;
                }
                let s = gf.add(terms.get(&e).copied().unwrap_or(0), gf.mul(c1, c2));
                if s == 0 {
                    terms.remove(&e);
                } else {
                    terms.insert(e, s);
                }
            }
        }
        LaurentSeriesFp { terms, tail }
    }

    /// Least exponent coprime to p carrying a nonzero coefficient; infinite
    /// when the series is a p-th power. With a finite tail bound and no such
    /// exponent stored, membership in the p-th powers cannot be certified.
    pub fn pord(&self, p: u32) -> Result<Val> {
        let p = p as i64;
        if let Some(&e) = self.terms.keys().find(|&&e| e.rem_euclid(p) != 0) {
            return Ok(Val::from_int(e));
        }
        match self.tail {
            None => Ok(Val::Inf),
            Some(t) => Err(Error::InsufficientTail(format!(
                "all exponents below the tail bound {t} are multiples of {p}"
            ))),
        }
    }

    /// Formal derivative times t: sum of n c_n t^n over the stored terms.
    pub fn t_dlog_num(&self, gf: &GfField) -> LaurentSeriesFp {
        let terms = self
            .terms
            .iter()
            .map(|(&e, &c)| (e, gf.mul(gf.from_int(e), c)))
            .filter(|&(_, c)| c != 0)
            .collect();
        LaurentSeriesFp { terms, tail: self.tail }
    }

    /// Order of the differential d(self) against the dt/t lattice: the order
    /// of sum n c_n t^n. Agrees with pord term by term, and the agreement is
    /// asserted.
    pub fn logord_dx(&self, gf: &GfField) -> Result<Val> {
        let p = self.pord(gf.p)?;
        let d = self.t_dlog_num(gf);
        let direct = match d.ord() {
            Some(e) => Val::from_int(e),
            None => {
                if d.tail.is_some() {
                    return Err(Error::InsufficientTail(
                        "derivative vanishes on all certified terms".into(),
                    ));
                }
                Val::Inf
            }
        };
        assert_eq!(p, direct, "the p-order must match the differential order");
        Ok(direct)
    }
}

/// The different of the degree-p extension presented by x = phi(y), together
/// with its logarithmic normalization delta - p + 1. Infinite when the
/// presentation is inseparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Different {
    pub delta: Val,
    pub delta_log: Val,
}

pub fn different_of_extension(gf: &GfField, phi: &LaurentSeriesFp) -> Result<Different> {
    let p = gf.p as i64;
    if phi.ord() != Some(p) {
        return Err(Error::InvalidInput(format!(
            "presentation must have order {p} to define a degree-{p} extension"
        )));
    }
    let pord = phi.pord(gf.p)?;
    let delta = match pord {
        Val::Inf => Val::Inf,
        v => v + crate::rational::rat(-1, 1),
    };
    let delta_log = match delta {
        Val::Inf => Val::Inf,
        v => v + crate::rational::rat(1 - p, 1),
    };
    Ok(Different { delta, delta_log })
}

/// Write x = c^p + t with t supported on exponents coprime to p. Exact on
/// the stored terms; the tail bound of t is inherited, the tail of c is the
/// input bound divided by p (rounded up).
pub fn best_p_power_approx(
    gf: &GfField,
    x: &LaurentSeriesFp,
) -> Result<(LaurentSeriesFp, LaurentSeriesFp)> {
    let p = gf.p as i64;
    let mut root = BTreeMap::new();
    let mut tame = BTreeMap::new();
    for (&e, &c) in x.terms() {
        if e.rem_euclid(p) == 0 {
            root.insert(e.div_euclid(p), gf.pth_root(c));
        } else {
            tame.insert(e, c);
        }
    }
    let root_tail = x.tail().map(|t| t.div_euclid(p) + i64::from(t.rem_euclid(p) != 0));
    Ok((
        LaurentSeriesFp::new(root, root_tail)?,
        LaurentSeriesFp::new(tame, x.tail())?,
    ))
}
