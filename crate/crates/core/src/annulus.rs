//! Laurent series on closed annuli and power series on closed discs, with the
//! valuation geometry written additively: the annulus of radii (|p|^R, 1] is
//! the v-interval [0, R], a disc is [0, ∞).
//!
//! A series carries an explicit tail bound: terms of spectral valuation >= tail
//! have been discarded, so any query whose answer could be affected by the tail
//! reports `InsufficientPrecision` instead of guessing.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rational::{Rat, Val};
use crate::valued_field::{CoefficientElem, FieldCtx};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geom {
    /// v(y) ranges over [0, r], r > 0
    Annulus { r: Rat },
    /// v(y) ranges over [0, ∞); exponents are >= 0
    Disc,
}

/// Exponent cap for disc series: the open disc admits honest units like
/// (1 - y)^(-1) whose coefficients never gain valuation, so power series are
/// additionally truncated in degree.
pub fn disc_exp_cap(ctx: &FieldCtx) -> i64 {
    ctx.precision().ceil().to_integer() * 4 + 16
}

impl Geom {
    pub fn annulus(r: Rat) -> Geom {
        Geom::Annulus { r }
    }

    /// Spectral valuation of the single term c·y^i on this geometry.
    fn term_spectral(&self, v: Val, i: i64) -> Val {
        match self {
            Geom::Annulus { r } => Val::min(v, v + Val::Finite(Rat::from_integer(i) * *r)),
            Geom::Disc => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnulusSeries {
    pub geom: Geom,
    terms: BTreeMap<i64, CoefficientElem>,
    /// discarded content has spectral valuation >= tail
    pub tail: Val,
}

impl AnnulusSeries {
    pub fn zero(geom: Geom) -> Self {
        AnnulusSeries { geom, terms: BTreeMap::new(), tail: Val::Inf }
    }

    pub fn constant(ctx: &FieldCtx, geom: Geom, c: CoefficientElem) -> Self {
        Self::monomial(ctx, geom, c, 0)
    }

    pub fn monomial(ctx: &FieldCtx, geom: Geom, c: CoefficientElem, i: i64) -> Self {
        let mut s = Self::zero(geom);
        s.insert_term(ctx, i, c);
        s
    }

    /// The coordinate itself, y.
    pub fn identity(ctx: &FieldCtx, geom: Geom) -> Self {
        Self::monomial(ctx, geom, CoefficientElem::one(ctx), 1)
    }

    pub fn from_terms(
        ctx: &FieldCtx,
        geom: Geom,
        terms: impl IntoIterator<Item = (i64, CoefficientElem)>,
    ) -> Self {
        let mut s = Self::zero(geom);
        for (i, c) in terms {
            let prev = s.terms.remove(&i).unwrap_or_else(|| CoefficientElem::zero(ctx));
            s.insert_term(ctx, i, prev.add(ctx, &c));
        }
        s
    }

    fn insert_term(&mut self, ctx: &FieldCtx, i: i64, c: CoefficientElem) {
        if c.is_zero() {
            self.terms.remove(&i);
            return;
        }
        let spec = self.geom.term_spectral(c.valuation(ctx), i);
        if spec >= Val::Finite(ctx.work_cap()) {
            self.terms.remove(&i);
            return;
        }
        if matches!(self.geom, Geom::Disc) && i >= disc_exp_cap(ctx) {
            self.terms.remove(&i);
            return;
        }
        self.terms.insert(i, c);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &CoefficientElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, ctx: &FieldCtx, i: i64) -> CoefficientElem {
        self.terms.get(&i).cloned().unwrap_or_else(|| CoefficientElem::zero(ctx))
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// min_i of v(c_i) + i·t: the valuation of the function on the circle
    /// where v(y) = t.
    pub fn boundary_val(&self, ctx: &FieldCtx, t: Rat) -> Val {
        self.terms
            .iter()
            .map(|(i, c)| c.valuation(ctx) + Val::Finite(Rat::from_integer(*i) * t))
            .min()
            .unwrap_or(Val::Inf)
    }

    /// Infimum of the boundary valuation over the whole geometry. By convexity
    /// this is attained at an endpoint; on a disc the infimum is at v(y) = 0.
    pub fn spectral_val(&self, ctx: &FieldCtx) -> Val {
        match self.geom {
            Geom::Annulus { r } => {
                Val::min(self.boundary_val(ctx, Rat::from_integer(0)), self.boundary_val(ctx, r))
            }
            Geom::Disc => self.boundary_val(ctx, Rat::from_integer(0)),
        }
    }

    /// The unique term strictly below every other term across the whole
    /// geometry, if there is one. A tie at either endpoint disqualifies all
    /// candidates. Errors when the tail bound could interfere.
    pub fn dominant_term(&self, ctx: &FieldCtx) -> Result<Option<(i64, CoefficientElem)>> {
        if self.terms.is_empty() {
            return Ok(None);
        }
        let cand = match self.geom {
            Geom::Annulus { r } => {
                let at = |t: Rat| -> Option<i64> {
                    let mut best: Option<(Val, i64, bool)> = None;
                    for (i, c) in &self.terms {
                        let v = c.valuation(ctx) + Val::Finite(Rat::from_integer(*i) * t);
                        best = match best {
                            None => Some((v, *i, true)),
                            Some((bv, _, _)) if v < bv => Some((v, *i, true)),
                            Some((bv, bi, uniq)) => Some((bv, bi, uniq && v != bv)),
                        };
                    }
                    best.and_then(|(_, i, uniq)| uniq.then_some(i))
                };
                let lo = at(Rat::from_integer(0));
                let hi = at(r);
                match (lo, hi) {
                    (Some(a), Some(b)) if a == b => Some(a),
                    _ => None,
                }
            }
            Geom::Disc => {
                // dominance is over the open disc v(y) > 0: the least exponent
                // term wins everywhere iff no other coefficient has strictly
                // smaller valuation (ties are strict for v(y) > 0)
                let (&i0, c0) = self.terms.iter().next().unwrap();
                let v0 = c0.valuation(ctx);
                self.terms
                    .iter()
                    .all(|(i, c)| *i == i0 || c.valuation(ctx) >= v0)
                    .then_some(i0)
            }
        };
        let Some(i) = cand else { return Ok(None) };
        let c = &self.terms[&i];
        // dominance must hold against whatever was truncated away
        let worst = self.geom.term_spectral(c.valuation(ctx), i);
        if self.tail <= worst {
            return Err(Error::InsufficientPrecision(format!(
                "dominant term y^{i} has spectral valuation {worst:?} but tail bound is {:?}",
                self.tail
            )));
        }
        Ok(Some((i, c.clone())))
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Self {
        let mut out = Self::zero(self.geom);
        out.tail = self.tail;
        for (i, c) in &self.terms {
            out.insert_term(ctx, *i, c.neg(ctx));
        }
        out
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Self) -> Self {
        debug_assert_eq!(self.geom, other.geom, "geometry mismatch in add");
        let mut out = self.clone();
        out.tail = Val::min(self.tail, other.tail);
        for (i, c) in &other.terms {
            let prev = out.terms.remove(i).unwrap_or_else(|| CoefficientElem::zero(ctx));
            out.insert_term(ctx, *i, prev.add(ctx, c));
        }
        out
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Self) -> Self {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Self) -> Self {
        debug_assert_eq!(self.geom, other.geom, "geometry mismatch in mul");
        let fast = crate::valued_field::mul_series_eq(ctx, &self.terms, &other.terms)
            .or_else(|| crate::valued_field::mul_series_mixed(ctx, &self.terms, &other.terms));
        if let Some(prod) = fast {
            let mut out = Self::zero(self.geom);
            out.tail = Val::min(
                self.tail + other.spectral_val(ctx).min(Val::zero()),
                other.tail + self.spectral_val(ctx).min(Val::zero()),
            );
            for (i, c) in prod {
                out.insert_term(ctx, i, c);
            }
            return out;
        }
        let mut acc: BTreeMap<i64, CoefficientElem> = BTreeMap::new();
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                let i = ia + ib;
                let prod = ca.mul(ctx, cb);
                match acc.remove(&i) {
                    Some(prev) => {
                        let s = prev.add(ctx, &prod);
                        acc.insert(i, s);
                    }
                    None => {
                        acc.insert(i, prod);
                    }
                }
            }
        }
        let mut out = Self::zero(self.geom);
        out.tail = Val::min(
            self.tail + other.spectral_val(ctx).min(Val::zero()),
            other.tail + self.spectral_val(ctx).min(Val::zero()),
        );
        for (i, c) in acc {
            out.insert_term(ctx, i, c);
        }
        out
    }

    pub fn mul_coeff(&self, ctx: &FieldCtx, c: &CoefficientElem) -> Self {
        let mut out = Self::zero(self.geom);
        out.tail = self.tail + c.valuation(ctx).min(Val::zero());
        for (i, a) in &self.terms {
            out.insert_term(ctx, *i, a.mul(ctx, c));
        }
        out
    }

    pub fn mul_int(&self, ctx: &FieldCtx, n: i64) -> Self {
        self.mul_coeff(ctx, &CoefficientElem::from_int(ctx, n))
    }

    /// Multiply by y^k.
    pub fn shift(&self, ctx: &FieldCtx, k: i64) -> Self {
        let mut out = Self::zero(self.geom);
        out.tail = match (self.tail, self.geom) {
            (Val::Inf, _) => Val::Inf,
            (t, Geom::Disc) => t,
            (t, Geom::Annulus { r }) => {
                t + Val::Finite((Rat::from_integer(k) * r).min(Rat::from_integer(0)))
            }
        };
        for (i, c) in &self.terms {
            out.insert_term(ctx, i + k, c.clone());
        }
        out
    }

    /// Drop all content of spectral valuation >= cap without recording it in
    /// the tail marker. Used by Newton loops to keep intermediates small:
    /// pruned digits are regenerated by later iterations.
    fn prune_spectral(&self, ctx: &FieldCtx, cap: Val) -> Self {
        // disc series converge by degree (capped elsewhere), not by spectral
        // valuation, so pruning only applies on annuli
        if matches!(self.geom, Geom::Disc) {
            return self.clone();
        }
        let cr = match cap {
            Val::Inf => return self.clone(),
            Val::Finite(c) => c,
        };
        let mut out = Self::zero(self.geom);
        out.tail = self.tail;
        for (i, c) in &self.terms {
            // spectral value of c·y^i is v(c) + min(0, i·R) on an annulus
            let thr = match self.geom {
                Geom::Annulus { r } if *i < 0 => cr - Rat::from_integer(*i) * r,
                _ => cr,
            };
            out.insert_term(ctx, *i, c.truncate(ctx, thr));
        }
        out
    }

    pub fn truncate(&self, ctx: &FieldCtx, cap: Rat) -> Self {
        let mut out = Self::zero(self.geom);
        out.tail = Val::min(self.tail, Val::Finite(cap));
        for (i, c) in &self.terms {
            if self.geom.term_spectral(c.valuation(ctx), *i) < Val::Finite(cap) {
                out.insert_term(ctx, *i, c.clone());
            }
        }
        out
    }

    /// Formal derivative d/dy.
    pub fn derivative(&self, ctx: &FieldCtx) -> Self {
        let mut out = Self::zero(self.geom);
        out.tail = self.tail; // crude but safe on the scales we use
        for (i, c) in &self.terms {
            out.insert_term(ctx, i - 1, c.mul_int(ctx, *i));
        }
        out
    }

    pub fn map_coeffs(
        &self,
        ctx: &FieldCtx,
        f: impl Fn(&CoefficientElem) -> Result<CoefficientElem>,
    ) -> Result<Self> {
        let mut out = Self::zero(self.geom);
        out.tail = self.tail;
        for (i, c) in &self.terms {
            out.insert_term(ctx, *i, f(c)?);
        }
        Ok(out)
    }

    pub fn pow(&self, ctx: &FieldCtx, n: i64) -> Result<Self> {
        if n < 0 {
            return self.invert_unit(ctx)?.pow(ctx, -n);
        }
        let mut acc = Self::constant(ctx, self.geom, CoefficientElem::one(ctx));
        let mut base = self.clone();
        base.tail = Val::min(base.tail, acc.tail);
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

    /// Multiplicative inverse; requires a dominant term (and, on a disc,
    /// dominant exponent 0 so the inverse stays a power series).
    pub fn invert_unit(&self, ctx: &FieldCtx) -> Result<Self> {
        let (k, d) = self.dominant_term(ctx)?.ok_or_else(|| {
            Error::InvalidInput("inversion needs a dominant term".into())
        })?;
        if matches!(self.geom, Geom::Disc) && k != 0 {
            return Err(Error::InvalidInput(format!(
                "y^{k}·(unit) is not invertible on a disc"
            )));
        }
        let lead_inv = Self::monomial(ctx, self.geom, d.inv(ctx)?, -k);
        let mut z = lead_inv;
        let two = Self::constant(ctx, self.geom, CoefficientElem::from_int(ctx, 2));
        let one = Self::constant(ctx, self.geom, CoefficientElem::one(ctx));
        let full = Val::Finite(ctx.work_cap());
        // a change of z at spectral level w moves self·z at level w + v(lead),
        // so prune relative to the dominant term's spectral value
        let pad = Val::min(
            self.geom.term_spectral(d.valuation(ctx), k),
            Val::zero(),
        )
        .scale_int(-1);
        for _ in 0..64 {
            let prod = self.mul(ctx, &z);
            let err = prod.sub(ctx, &one);
            if err.is_zero() {
                z.tail = Val::min(z.tail, self.tail + d.valuation(ctx).scale_int(-2));
                return Ok(z);
            }
            let acc = err.spectral_val(ctx);
            z = z.mul(ctx, &two.sub(ctx, &prod));
            z = z.prune_spectral(ctx, Val::min(acc.scale_int(2), full) + pad);
        }
        Err(Error::ConvergenceFailure("unit inversion stalled".into()))
    }

    /// n-th root of a series whose dominant term d·y^k has n | k, with
    /// (n, p) = 1. The unit part is handled by Newton iteration.
    pub fn nth_root_unit(&self, ctx: &FieldCtx, n: u32) -> Result<Self> {
        if n == 0 || n.is_multiple_of(ctx.cfg.p) {
            return Err(Error::InvalidInput(format!(
                "root order {n} must be nonzero and coprime to p = {}",
                ctx.cfg.p
            )));
        }
        let (k, d) = self.dominant_term(ctx)?.ok_or_else(|| {
            Error::InvalidInput("root extraction needs a dominant term".into())
        })?;
        if k.rem_euclid(n as i64) != 0 {
            return Err(Error::RootNotRepresentable(format!(
                "dominant exponent {k} is not divisible by {n}"
            )));
        }
        let d_root = d.nth_root(ctx, n)?;
        let lead = Self::monomial(ctx, self.geom, d, k);
        let unit = self.mul(ctx, &lead.invert_unit(ctx)?);
        // unit = 1 + (small); Newton r <- r - (r^n - unit)/(n r^(n-1))
        let mut r = Self::constant(ctx, self.geom, CoefficientElem::one(ctx));
        r.tail = unit.tail;
        let n_inv = CoefficientElem::from_int(ctx, n as i64).inv(ctx)?;
        let full = Val::Finite(ctx.work_cap());
        for _ in 0..64 {
            let err = r.pow(ctx, n as i64)?.sub(ctx, &unit);
            if err.is_zero() {
                let root = Self::monomial(ctx, self.geom, d_root, k / n as i64).mul(ctx, &r);
                return Ok(root);
            }
            // r is 1 + (small), so the defect doubles each round; prune
            // beyond the next round's accuracy to keep iterates small
            let acc = err.spectral_val(ctx);
            let corr = err.mul(ctx, &r.pow(ctx, n as i64 - 1)?.invert_unit(ctx)?)
                .mul_coeff(ctx, &n_inv);
            r = r.sub(ctx, &corr);
            r = r.prune_spectral(ctx, Val::min(acc.scale_int(2), full));
        }
        Err(Error::ConvergenceFailure(format!("{n}-th root iteration stalled")))
    }

    /// Substitute y <- g. g must map its geometry onto self's geometry: with
    /// dominant term c·y^n of g, the v-interval image {v(c), v(c) + n·R_g}
    /// must equal [0, R_f] (for discs: g fixes the origin chart, n >= 1,
    /// v(c·y^n) = 0 on the unit circle).
    pub fn compose(&self, ctx: &FieldCtx, g: &Self) -> Result<Self> {
        let (n, c) = g.dominant_term(ctx)?.ok_or_else(|| {
            Error::DomainMismatch("substituted series has no dominant term".into())
        })?;
        let vc = c.valuation(ctx).expect_finite();
        let zero = Rat::from_integer(0);
        match (self.geom, g.geom) {
            (Geom::Annulus { r: rf }, Geom::Annulus { r: rg }) => {
                let a = vc;
                let b = vc + Rat::from_integer(n) * rg;
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                if lo != zero || hi != rf {
                    return Err(Error::DomainMismatch(format!(
                        "substitution maps [0, {rg}] to [{lo}, {hi}], expected [0, {rf}]"
                    )));
                }
            }
            (Geom::Disc, Geom::Disc) => {
                if n < 1 || vc != zero {
                    return Err(Error::DomainMismatch(
                        "disc substitution needs dominant c·y^n with n >= 1, v(c) = 0".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::DomainMismatch(
                    "cannot substitute between a disc and an annulus".into(),
                ))
            }
        }
        let mut out = Self::zero(g.geom);
        out.tail = Val::min(self.tail, g.tail);
        if self.terms.is_empty() {
            return Ok(out);
        }
        let one = Self::constant(ctx, g.geom, CoefficientElem::one(ctx));
        let n_pos = self.terms.range(0..).count();
        if n_pos >= 16 {
            // dense positive part: block (Paterson-Stockmeyer) evaluation,
            // ~2·sqrt(E) full multiplications instead of E
            let emax = *self.terms.range(0..).next_back().unwrap().0;
            let b = (1i64..).find(|x| x * x > emax).unwrap();
            let mut pows = Vec::with_capacity(b as usize + 1);
            pows.push(one.clone());
            for i in 1..=b as usize {
                let next = pows[i - 1].mul(ctx, g);
                pows.push(next);
            }
            let mut acc = Self::zero(g.geom);
            for j in (0..=emax / b).rev() {
                if !acc.is_zero() {
                    acc = acc.mul(ctx, &pows[b as usize]);
                }
                for t in 0..b {
                    if let Some(c) = self.terms.get(&(j * b + t)) {
                        acc = acc.add(ctx, &pows[t as usize].mul_coeff(ctx, c));
                    }
                }
            }
            out = out.add(ctx, &acc);
        } else if n_pos > 0 {
            // sparse positive part: walk the exponents actually present,
            // crossing gaps with a square-and-multiply chain of powers of g
            let mut sq: Vec<Self> = vec![g.clone()];
            let mut pw = one.clone();
            let mut cur: i64 = 0;
            for (&i, ci) in self.terms.range(0..) {
                let mut gap = (i - cur) as u64;
                let mut k = 0usize;
                while gap > 0 {
                    if k >= sq.len() {
                        let last = sq.last().unwrap();
                        sq.push(last.mul(ctx, last));
                    }
                    if gap & 1 == 1 {
                        pw = pw.mul(ctx, &sq[k]);
                    }
                    gap >>= 1;
                    k += 1;
                }
                out = out.add(ctx, &pw.mul_coeff(ctx, ci));
                cur = i;
            }
        }
        // negative powers, walked the same way on g^(-1)
        if self.min_exponent().unwrap_or(0) < 0 {
            let g_inv = g.invert_unit(ctx)?;
            let mut sq: Vec<Self> = vec![g_inv.clone()];
            let mut pw = one.clone();
            let mut cur: i64 = 0;
            for (&i, ci) in self.terms.range(..0).rev() {
                let mut gap = (cur - i) as u64;
                let mut k = 0usize;
                while gap > 0 {
                    if k >= sq.len() {
                        let last = sq.last().unwrap();
                        sq.push(last.mul(ctx, last));
                    }
                    if gap & 1 == 1 {
                        pw = pw.mul(ctx, &sq[k]);
                    }
                    gap >>= 1;
                    k += 1;
                }
                out = out.add(ctx, &pw.mul_coeff(ctx, ci));
                cur = i;
            }
        }
        out.tail = Val::min(out.tail, Val::min(self.tail, g.tail));
        Ok(out)
    }

    /// Distance of an automorphism from the identity: spectral valuation of
    /// y^(-1)·φ - 1 for orientation-preserving φ (∞ for the identity itself),
    /// 0 for orientation-reversing φ. Anything else is not an automorphism.
    pub fn aut_norm(&self, ctx: &FieldCtx) -> Result<Val> {
        let r = match self.geom {
            Geom::Annulus { r } => r,
            Geom::Disc => {
                return Err(Error::InvalidInput(
                    "the automorphism metric is defined on annuli".into(),
                ))
            }
        };
        let (n, c) = self
            .dominant_term(ctx)?
            .ok_or_else(|| Error::NotAutomorphism("no dominant term".into()))?;
        let vc = c.valuation(ctx);
        match n {
            1 if vc == Val::zero() => {
                let dev = self.shift(ctx, -1).sub(
                    ctx,
                    &Self::constant(ctx, self.geom, CoefficientElem::one(ctx)),
                );
                if dev.is_zero() {
                    Ok(dev.tail)
                } else {
                    Ok(dev.spectral_val(ctx))
                }
            }
            -1 if vc == Val::Finite(r) => Ok(Val::zero()),
            _ => Err(Error::NotAutomorphism(format!(
                "dominant term c·y^{n} with v(c) = {vc:?} on [0, {r}]"
            ))),
        }
    }

    /// Compositional inverse of an automorphism, by Newton reversion:
    /// ψ <- ψ - (φ(ψ) - y)·(φ'(ψ))^(-1). On a disc the automorphism must fix
    /// the origin (no constant term, dominant c·y with v(c) = 0).
    pub fn invert_automorphism(&self, ctx: &FieldCtx) -> Result<Self> {
        match self.geom {
            Geom::Annulus { .. } => {
                self.aut_norm(ctx)?;
            }
            Geom::Disc => {
                let ok = match self.dominant_term(ctx)? {
                    Some((1, c)) => {
                        c.valuation(ctx) == Val::zero() && self.min_exponent() == Some(1)
                    }
                    _ => false,
                };
                if !ok {
                    return Err(Error::NotAutomorphism(
                        "disc automorphisms must fix the origin with unit slope".into(),
                    ));
                }
            }
        }
        let (n, c) = self.dominant_term(ctx)?.unwrap();
        let start = match n {
            1 => Self::monomial(ctx, self.geom, c.inv(ctx)?, 1),
            _ => Self::monomial(ctx, self.geom, c, -1),
        };
        let y = Self::identity(ctx, self.geom);
        let dphi = self.derivative(ctx);
        let mut psi = start;
        psi.tail = Val::min(psi.tail, self.tail);
        let full = Val::Finite(ctx.work_cap());
        for _ in 0..64 {
            let err = self.compose(ctx, &psi)?.sub(ctx, &y);
            if err.is_zero() {
                return Ok(psi);
            }
            // the defect doubles each round; prune beyond the next round's
            // accuracy (padded by the slope's spectral value when negative)
            // to keep iterates small
            let acc = err.spectral_val(ctx);
            let slope = dphi.compose(ctx, &psi)?;
            let pad = Val::min(slope.spectral_val(ctx), Val::zero()).scale_int(-1);
            let slope_inv = slope.invert_unit(ctx)?;
            psi = psi.sub(ctx, &err.mul(ctx, &slope_inv));
            psi = psi.prune_spectral(ctx, Val::min(acc.scale_int(2), full) + pad);
        }
        Err(Error::ConvergenceFailure("automorphism reversion stalled".into()))
    }

    /// Write α^p = α₁ + p·α₂ where α₁ = Σ c_i^p y^(p·i) collects the Frobenius
    /// part. In equal characteristic α₂ = 0 exactly; in mixed characteristic
    /// α₂ = (α^p - α₁)/p.
    pub fn p_power_split(&self, ctx: &FieldCtx) -> Result<(Self, Self)> {
        let p = ctx.cfg.p;
        let mut a1 = Self::zero(self.geom);
        a1.tail = self.tail.scale_int(p as i64);
        for (i, c) in &self.terms {
            a1.insert_term(ctx, p as i64 * i, c.pow(ctx, p as i64)?);
        }
        if !ctx.is_mixed() {
            return Ok((a1, Self::zero(self.geom)));
        }
        let ap = self.pow(ctx, p as i64)?;
        let p_inv = CoefficientElem::from_int(ctx, p as i64).inv(ctx)?;
        let a2 = ap.sub(ctx, &a1).mul_coeff(ctx, &p_inv);
        Ok((a1, a2))
    }

    /// Split into the part supported on exponents ≡ 0 mod n and the rest.
    pub fn split_exponents_mod(&self, n: i64) -> (Self, Self) {
        let mut hit = Self::zero(self.geom);
        let mut miss = Self::zero(self.geom);
        hit.tail = self.tail;
        miss.tail = self.tail;
        for (i, c) in &self.terms {
            if i.rem_euclid(n) == 0 {
                hit.terms.insert(*i, c.clone());
            } else {
                miss.terms.insert(*i, c.clone());
            }
        }
        (hit, miss)
    }

    /// Reinterpret a series supported on exponents divisible by n as a series
    /// in y^n: divide exponents by n, scale the annulus radius by n.
    pub fn compress_exponents(&self, n: i64) -> Result<Self> {
        let geom = match self.geom {
            Geom::Annulus { r } => Geom::Annulus { r: r * Rat::from_integer(n) },
            Geom::Disc => Geom::Disc,
        };
        let mut terms = BTreeMap::new();
        for (i, c) in &self.terms {
            if i.rem_euclid(n) != 0 {
                return Err(Error::InvalidInput(format!(
                    "exponent {i} is not divisible by {n}"
                )));
            }
            terms.insert(i / n, c.clone());
        }
        Ok(AnnulusSeries { geom, terms, tail: self.tail })
    }

    /// Inverse of `compress_exponents`: substitute y -> y^n.
    pub fn expand_exponents(&self, n: i64) -> Result<Self> {
        let geom = match self.geom {
            Geom::Annulus { r } => {
                let rn = r / Rat::from_integer(n);
                Geom::Annulus { r: rn }
            }
            Geom::Disc => Geom::Disc,
        };
        let terms = self.terms.iter().map(|(i, c)| (i * n, c.clone())).collect();
        Ok(AnnulusSeries { geom, terms, tail: self.tail })
    }

    pub fn eq_mod_cap(&self, ctx: &FieldCtx, other: &Self) -> bool {
        let d = self.sub(ctx, other);
        d.spectral_val(ctx) >= Val::Finite(ctx.precision())
    }
}
