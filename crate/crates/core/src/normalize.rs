//! Normalization of étale degree-p covers of annuli and pointed discs to
//! Kummer (x = y^p) or binomial (x = y^p + c·y^n, (n, p) = 1) form, together
//! with the different function on the skeleton, which is the invariant the
//! whole procedure must preserve.
//!
//! The loop alternates source-side substitutions that push the prime-to-p
//! deviation λ onto its dominant shape and target-side substitutions that
//! straighten the p-divisible part back to y^p, working with "simple"
//! decompositions φ = y^p + λ where λ is everything except the exact y^p
//! monomial.

use num_integer::Integer;

use crate::annulus::{AnnulusSeries, Geom};
use crate::error::{Error, Result};
use crate::rational::{Rat, Val};
use crate::valued_field::{CoefficientElem, FieldCtx};

/// An affine function t -> base + slope·t of the skeleton coordinate
/// t = v(y), used for the different and for edge data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialFn {
    pub base: Val,
    pub slope: i64,
}

impl MonomialFn {
    pub fn eval(&self, t: Rat) -> Val {
        self.base + Val::Finite(Rat::from_integer(self.slope) * t)
    }
}

/// A cover x = φ(y) of annuli [0, R] -> [0, m·R] (or of pointed discs),
/// with dominant term c·y^m for a unit c.
#[derive(Debug, Clone)]
pub struct CoverPresentation {
    pub phi: AnnulusSeries,
    pub degree: i64,
}

impl CoverPresentation {
    pub fn new(ctx: &FieldCtx, phi: AnnulusSeries, degree: i64) -> Result<Self> {
        match phi.dominant_term(ctx)? {
            Some((m, c)) if m == degree && c.valuation(ctx) == Val::zero() => {
                Ok(CoverPresentation { phi, degree })
            }
            Some((m, c)) => Err(Error::InvalidInput(format!(
                "dominant term c·y^{m} with v(c) = {} does not present a monic degree-{degree} cover",
                c.valuation(ctx)
            ))),
            None => Err(Error::InvalidInput(
                "cover presentation has no dominant term".into(),
            )),
        }
    }

    pub fn source_geom(&self) -> Geom {
        self.phi.geom
    }

    pub fn target_geom(&self) -> Geom {
        match self.phi.geom {
            Geom::Annulus { r } => Geom::Annulus { r: r * Rat::from_integer(self.degree) },
            Geom::Disc => Geom::Disc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinomialForm {
    /// x = y^m
    Kummer { m: i64 },
    /// x = y^p + c·y^n with (n, p) = 1
    Binomial { n: i64, c: CoefficientElem },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentSkeleton {
    pub monomial: MonomialFn,
}

/// The valuation of the different as a function on the skeleton: the dominant
/// term of y^(1-m)·φ'(y), additively.
pub fn different_on_skeleton(
    ctx: &FieldCtx,
    pres: &CoverPresentation,
) -> Result<DifferentSkeleton> {
    let d = pres.phi.derivative(ctx).shift(ctx, 1 - pres.degree);
    match d.dominant_term(ctx)? {
        Some((slope, c)) => Ok(DifferentSkeleton {
            monomial: MonomialFn { base: c.valuation(ctx), slope },
        }),
        None => Err(Error::NotEtale(
            "derivative has no dominant term on the skeleton".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Case {
    /// mixed characteristic, every prime-to-p term is strictly below p·y^p
    Case1,
    /// a dominant prime-to-p term c·y^n with 0 < v(c) + (n-p)t < v(p)
    Case2 { n: i64, c: CoefficientElem },
}

fn skeleton_points(geom: Geom) -> Vec<Rat> {
    match geom {
        Geom::Annulus { r } => vec![Rat::from_integer(0), r],
        Geom::Disc => vec![Rat::from_integer(0)],
    }
}

/// Decide which normalization regime an étale degree-p cover is in.
pub fn classify_case(ctx: &FieldCtx, pres: &CoverPresentation) -> Result<Case> {
    let p = ctx.cfg.p as i64;
    if pres.degree != p {
        return Err(Error::UnsupportedModel(format!(
            "classification applies to degree-p covers only (degree {}, p {p})",
            pres.degree
        )));
    }
    let (_, lam) = pres.phi.split_exponents_mod(p);
    if let Some((n, c)) = lam.dominant_term(ctx)? {
        let vc = c.valuation(ctx);
        let relevant = match pres.phi.geom {
            Geom::Annulus { .. } => skeleton_points(pres.phi.geom).into_iter().all(|t| {
                let v = vc + Val::Finite(Rat::from_integer(n - p) * t);
                v > Val::zero() && v < ctx.v_p()
            }),
            Geom::Disc => !ctx.is_mixed() && n > p && vc >= Val::zero(),
        };
        if relevant {
            return Ok(Case::Case2 { n, c });
        }
    }
    if !ctx.is_mixed() {
        return Err(Error::NotEtale(
            "no relevant prime-to-p term in equal characteristic".into(),
        ));
    }
    // Case1: λ must sit below p·y^p (strictly on annuli; on the open disc the
    // inequality is strict in the interior when it is non-strict at t = 0)
    let p_inv = CoefficientElem::from_int(ctx, p).inv(ctx)?;
    let ratio = lam.shift(ctx, -p).mul_coeff(ctx, &p_inv);
    let ok = match pres.phi.geom {
        Geom::Annulus { .. } => ratio.spectral_val(ctx) > Val::zero(),
        Geom::Disc => ratio.spectral_val(ctx) >= Val::zero(),
    };
    if ok {
        Ok(Case::Case1)
    } else {
        Err(Error::NotEtale(
            "prime-to-p terms are neither relevant nor dominated by p·y^p".into(),
        ))
    }
}

/// Is the affine monomial a possible different of an étale p-cover on this
/// geometry: either constantly v(p) (mixed characteristic), or sloped with
/// slope coprime to p and values inside (0, v(p)) on the interior.
pub fn is_relevant_monomial(ctx: &FieldCtx, m: &MonomialFn, geom: Geom) -> bool {
    let p = ctx.cfg.p as i64;
    if m.slope == 0 {
        return ctx.is_mixed() && m.base == ctx.v_p();
    }
    if m.slope.gcd(&p) != 1 {
        return false;
    }
    match geom {
        Geom::Annulus { r } => [Rat::from_integer(0), r].into_iter().all(|t| {
            let v = m.eval(t);
            v > Val::zero() && v < ctx.v_p()
        }),
        Geom::Disc => !ctx.is_mixed() && m.slope > 0 && m.base >= Val::zero(),
    }
}

#[derive(Debug, Clone)]
pub struct NormalizeOutcome {
    pub form: BinomialForm,
    /// reparametrization of the source: h ∘ φ_in ∘ g = normalized φ
    pub g: AnnulusSeries,
    /// reparametrization of the target
    pub h: AnnulusSeries,
    pub iterations: u32,
    /// (s, s_p of the intermediate decomposition) per round
    pub s_trace: Vec<(Val, Val)>,
    /// contraction-bound violations; expected empty
    pub violations: Vec<String>,
    pub delta: MonomialFn,
}

/// λ of the simple decomposition: φ minus the exact monomial y^p.
fn simple_lambda(ctx: &FieldCtx, phi: &AnnulusSeries, p: i64) -> AnnulusSeries {
    let yp = AnnulusSeries::monomial(ctx, phi.geom, CoefficientElem::one(ctx), p);
    phi.sub(ctx, &yp)
}

/// The deviation measure s of a simple decomposition, and the dominant
/// prime-to-p term when in Case2.
fn measure_s(
    ctx: &FieldCtx,
    lam: &AnnulusSeries,
    case: &Case,
) -> Result<(Val, Option<(i64, CoefficientElem)>)> {
    let p = ctx.cfg.p as i64;
    match case {
        Case::Case1 => {
            let p_inv = CoefficientElem::from_int(ctx, p).inv(ctx)?;
            let ratio = lam.shift(ctx, -p).mul_coeff(ctx, &p_inv);
            let s = if ratio.is_zero() { ratio.tail } else { ratio.spectral_val(ctx) };
            Ok((s, None))
        }
        Case::Case2 { n, .. } => {
            let (nn, cn) = lam.dominant_term(ctx)?.ok_or_else(|| {
                Error::InsufficientPrecision("deviation lost its dominant term".into())
            })?;
            if nn != *n {
                return Err(Error::ConvergenceFailure(format!(
                    "tame exponent drifted from {n} to {nn}"
                )));
            }
            let t_inv = AnnulusSeries::monomial(ctx, lam.geom, cn.inv(ctx)?, -nn);
            let one = AnnulusSeries::constant(ctx, lam.geom, CoefficientElem::one(ctx));
            let dev = lam.mul(ctx, &t_inv).sub(ctx, &one);
            let s = if dev.is_zero() { dev.tail } else { dev.spectral_val(ctx) };
            Ok((s, Some((nn, cn))))
        }
    }
}

/// ψ of the natural decomposition (exponents divisible by p), compressed to
/// the target coordinate, with its deviation from the identity.
fn natural_psi(ctx: &FieldCtx, phi: &AnnulusSeries, p: i64) -> Result<(AnnulusSeries, Val)> {
    let (psi, _) = phi.split_exponents_mod(p);
    let packed = psi.compress_exponents(p)?;
    let one = AnnulusSeries::constant(ctx, packed.geom, CoefficientElem::one(ctx));
    let dev = packed.shift(ctx, -1).sub(ctx, &one);
    let s_p = if dev.is_zero() { dev.tail } else { dev.spectral_val(ctx) };
    Ok((packed, s_p))
}

/// n-th root of 1 + u (spectrally small u), allowing negative n.
fn unit_root(ctx: &FieldCtx, series: &AnnulusSeries, n: i64) -> Result<AnnulusSeries> {
    let w = series.nth_root_unit(ctx, n.unsigned_abs() as u32)?;
    if n < 0 {
        w.invert_unit(ctx)
    } else {
        Ok(w)
    }
}

const MAX_ROUNDS: u32 = 200;

/// Drive an étale degree-p cover to Kummer or binomial form. Tame covers
/// (degree coprime to p) are straightened to Kummer form directly.
pub fn normalize(ctx: &FieldCtx, pres: &CoverPresentation) -> Result<NormalizeOutcome> {
    let p = ctx.cfg.p as i64;
    let delta0 = different_on_skeleton(ctx, pres)?;
    let src = pres.source_geom();
    let tgt = pres.target_geom();

    if pres.degree.gcd(&p) == 1 {
        // tame: φ = (φ^{1/m})^m, so pulling back along the inverse root gives y^m
        let rho = pres.phi.nth_root_unit(ctx, pres.degree as u32)?;
        let g = rho.invert_automorphism(ctx)?;
        return Ok(NormalizeOutcome {
            form: BinomialForm::Kummer { m: pres.degree },
            g,
            h: AnnulusSeries::identity(ctx, tgt),
            iterations: 0,
            s_trace: vec![],
            violations: vec![],
            delta: delta0.monomial,
        });
    }
    if pres.degree != p {
        return Err(Error::UnsupportedModel(format!(
            "normalization handles degree-p and tame covers only (degree {})",
            pres.degree
        )));
    }

    let case = classify_case(ctx, pres)?;
    let cap = Val::Finite(ctx.precision());
    let mut phi = pres.phi.clone();
    let mut g_acc = AnnulusSeries::identity(ctx, src);
    let mut h_acc = AnnulusSeries::identity(ctx, tgt);

    // γ in Case2: the gap v(p·y^p / c_n·y^n) across the skeleton
    let gamma = match &case {
        Case::Case2 { n, c } => skeleton_points(src)
            .into_iter()
            .map(|t| ctx.v_p() + Val::Finite(Rat::from_integer(p - n) * t) - c.valuation(ctx))
            .min()
            .unwrap(),
        Case::Case1 => Val::Inf,
    };
    // ψ-content is measured in λ relative to p·y^p (Case1) or to the tame term
    // (Case2), both smaller than y^p; straighten ψ past cap plus that gap
    let cap_psi = match &case {
        Case::Case1 => cap + ctx.v_p(),
        Case::Case2 { n, c } => {
            let tau = skeleton_points(src)
                .into_iter()
                .map(|t| c.valuation(ctx) + Val::Finite(Rat::from_integer(n - p) * t))
                .max()
                .unwrap();
            cap + tau
        }
    };

    // make the decomposition simple once up front
    let (psi0, s_p0) = natural_psi(ctx, &phi, p)?;
    if s_p0 < cap_psi {
        let h = psi0.invert_automorphism(ctx)?;
        phi = h.compose(ctx, &phi)?;
        h_acc = h.compose(ctx, &h_acc)?;
    }

    let mut s_trace = Vec::new();
    let mut violations = Vec::new();
    let mut s_prev: Option<Val> = None;
    let mut rounds = 0u32;
    loop {
        let lam = simple_lambda(ctx, &phi, p);
        let (s, tame) = measure_s(ctx, &lam, &case)?;
        if let Some(sp) = s_prev {
            let bound = match &case {
                Case::Case1 => sp.scale_int(2),
                Case::Case2 { .. } => Val::min(sp.scale_int(p), sp + gamma),
            };
            if s < Val::min(bound, cap) {
                violations.push(format!(
                    "round {rounds}: s went from {sp} to {s}, expected >= {bound}"
                ));
            }
        }
        if s >= cap {
            let form = match &case {
                Case::Case1 => BinomialForm::Kummer { m: p },
                Case::Case2 { .. } => {
                    let (n, c) = tame.unwrap();
                    BinomialForm::Binomial { n, c: c.truncate(ctx, ctx.precision()) }
                }
            };
            let delta1 = different_on_skeleton(
                ctx,
                &CoverPresentation { phi: phi.clone(), degree: p },
            )?;
            if delta1.monomial != delta0.monomial {
                violations.push(format!(
                    "different changed: {:?} -> {:?}",
                    delta0.monomial, delta1.monomial
                ));
            }
            return Ok(NormalizeOutcome {
                form,
                g: g_acc,
                h: h_acc,
                iterations: rounds,
                s_trace,
                violations,
                delta: delta0.monomial,
            });
        }
        if rounds >= MAX_ROUNDS {
            return Err(Error::ConvergenceFailure(format!(
                "normalization did not reach the precision cap in {MAX_ROUNDS} rounds"
            )));
        }
        rounds += 1;
        if s <= Val::zero() {
            return Err(Error::NotEtale(format!(
                "deviation measure must be positive (s = {s})"
            )));
        }

        // source-side improvement: push λ onto its dominant shape
        let g = match &case {
            Case::Case1 => {
                let p_inv = CoefficientElem::from_int(ctx, p).inv(ctx)?;
                let alpha = lam.shift(ctx, -p).mul_coeff(ctx, &p_inv).neg(ctx);
                let y = AnnulusSeries::identity(ctx, src);
                let one = AnnulusSeries::constant(ctx, src, CoefficientElem::one(ctx));
                y.mul(ctx, &one.add(ctx, &alpha))
            }
            Case::Case2 { .. } => {
                let (n, cn) = tame.clone().unwrap();
                let t_inv = AnnulusSeries::monomial(ctx, src, cn.inv(ctx)?, -n);
                let unit = lam.mul(ctx, &t_inv);
                let w = unit_root(ctx, &unit, n)?;
                let y = AnnulusSeries::identity(ctx, src);
                y.mul(ctx, &w).invert_automorphism(ctx)?
            }
        };
        phi = phi.compose(ctx, &g)?;
        g_acc = g_acc.compose(ctx, &g)?;

        // target-side improvement: straighten ψ back to y^p
        let (psi, s_p) = natural_psi(ctx, &phi, p)?;
        s_trace.push((s, s_p));
        // Straightening multiplies the defect order by p, except in mixed
        // characteristic where the p-th power map only gains v(p) once the
        // defect is large; the guaranteed floor is min(p*s, s + v(p)).
        let psi_floor = Val::min(s.scale_int(p), s + ctx.v_p());
        if s_p < Val::min(psi_floor, cap) {
            violations.push(format!(
                "round {rounds}: intermediate s_p is {s_p}, expected >= {psi_floor}"
            ));
        }
        if s_p < cap_psi {
            let h = psi.invert_automorphism(ctx)?;
            phi = h.compose(ctx, &phi)?;
            h_acc = h.compose(ctx, &h_acc)?;
        }
        s_prev = Some(s);
    }
}

/// a^(-m)·φ(a·y) on the requested geometry.
fn conjugate_scale(
    ctx: &FieldCtx,
    phi: &AnnulusSeries,
    degree: i64,
    a: &CoefficientElem,
    geom: Geom,
) -> Result<AnnulusSeries> {
    let a_deg_inv = a.pow(ctx, degree)?.inv(ctx)?;
    let mut out = AnnulusSeries::zero(geom);
    for (i, ci) in phi.terms() {
        let scaled = ci.mul(ctx, &a.pow(ctx, *i)?).mul(ctx, &a_deg_inv);
        out = out.add(ctx, &AnnulusSeries::monomial(ctx, geom, scaled, *i));
    }
    out.tail = phi.tail;
    Ok(out)
}

/// Normalization of a pointed-disc cover φ = y^p + Σ_{i>p} c_i y^i that is
/// étale away from the origin: Kummer in mixed characteristic, binomial with
/// n > p in equal characteristic.
///
/// The open disc has no inner skeleton endpoint, so the loop is run on the
/// subannulus v(y) ∈ [ε, 1+ε] after substituting y -> a·y with v(a) = ε;
/// the binomial coefficient is then rescaled back to the disc coordinate.
pub fn normalize_disc_cover(ctx: &FieldCtx, pres: &CoverPresentation) -> Result<NormalizeOutcome> {
    if pres.phi.geom != Geom::Disc {
        return Err(Error::InvalidInput("expected a disc presentation".into()));
    }
    let p = ctx.cfg.p as i64;
    if pres.degree != p {
        return Err(Error::UnsupportedModel(format!(
            "disc normalization handles degree-p covers only (degree {})",
            pres.degree
        )));
    }
    let delta_disc = different_on_skeleton(ctx, pres).map_err(|e| match e {
        Error::NotEtale(m) => Error::NotEtaleOffOrigin(m),
        other => other,
    })?;
    let eps = if ctx.is_mixed() {
        Rat::new(1, ctx.ram_index())
    } else {
        Rat::new(1, 8)
    };
    let a = CoefficientElem::of_valuation(ctx, eps)?;
    let geom = Geom::annulus(Rat::from_integer(1));
    let phi_shift = conjugate_scale(ctx, &pres.phi, p, &a, geom)?;
    let pres_shift = CoverPresentation::new(ctx, phi_shift, p)?;
    let mut out = normalize(ctx, &pres_shift).map_err(|e| match e {
        Error::NotEtale(m) => Error::NotEtaleOffOrigin(m),
        other => other,
    })?;
    if let BinomialForm::Binomial { n, c } = &out.form {
        let back = c.mul(ctx, &a.pow(ctx, p - n)?);
        out.form = BinomialForm::Binomial { n: *n, c: back };
    }
    out.delta = delta_disc.monomial;
    Ok(out)
}

/// The substitution x' = a^(-p)·x, y' = a·y with a = c^(1/(n-p)) multiplies
/// the prime-to-p dominant coefficient by the unit c.
pub fn rescale_tame_term(
    ctx: &FieldCtx,
    pres: &CoverPresentation,
    n: i64,
    c: &CoefficientElem,
) -> Result<CoverPresentation> {
    if c.valuation(ctx) != Val::zero() {
        return Err(Error::InvalidInput("rescaling coefficient must be a unit".into()));
    }
    let p = ctx.cfg.p as i64;
    let order = n - p;
    let a = if order >= 0 {
        c.nth_root(ctx, order as u32)?
    } else {
        c.inv(ctx)?.nth_root(ctx, (-order) as u32)?
    };
    let phi = conjugate_scale(ctx, &pres.phi, p, &a, pres.phi.geom)?;
    CoverPresentation::new(ctx, phi, pres.degree)
}
