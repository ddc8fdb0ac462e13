//! End-to-end acceptance checks. Each criterion prints one pass/fail line;
//! run with `--nocapture` to see the lines for passing criteria.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wildcover::annulus::{AnnulusSeries, Geom};
use wildcover::bivariant::{BivariantFormFp, Point};
use wildcover::enhancement::{
    self, ComponentForm, PEnhancement, Reduction, Regime, Strictness,
};
use wildcover::gf::GfField;
use wildcover::laurent::{different_of_extension, LaurentSeriesFp};
use wildcover::lifting::{self, GluingPlan, LocalPiece};
use wildcover::log_curve::{
    Component, ComponentMap, LogCurve, LogMorphism, MapKind, Node,
};
use wildcover::normalize::{
    different_on_skeleton, normalize, normalize_disc_cover, BinomialForm,
    CoverPresentation, MonomialFn,
};
use wildcover::poly::{Poly, RationalFn};
use wildcover::rational::{rat, Rat, Val};
use wildcover::valued_field::{CoefficientElem, FieldCtx};

fn check(label: &str, run: impl FnOnce() -> Result<(), String>) {
    match run() {
        Ok(()) => println!("acceptance {label}: pass"),
        Err(msg) => {
            println!("acceptance {label}: FAIL ({msg})");
            panic!("acceptance {label} failed: {msg}");
        }
    }
}

fn sv(ctx: &FieldCtx, v: Rat) -> CoefficientElem {
    CoefficientElem::of_valuation(ctx, v).expect("representable valuation")
}

/// Round v up to the coefficient-valuation grid of the field (multiples of
/// 1/e in mixed characteristic).
fn grid_up(ctx: &FieldCtx, v: Rat) -> Rat {
    if !ctx.is_mixed() {
        return v;
    }
    let e = ctx.ram_index();
    rat((v * Rat::from_integer(e)).ceil().to_integer(), e)
}

/// A random annulus automorphism at distance >= 1/10 from the identity.
fn random_aut(ctx: &FieldCtx, rng: &mut ChaCha8Rng, geom: Geom) -> AnnulusSeries {
    let r = match geom {
        Geom::Annulus { r } => r,
        Geom::Disc => unreachable!(),
    };
    let mut terms = vec![(1, CoefficientElem::one(ctx))];
    let mut perturbed = false;
    for exp in [0i64, 2, 3] {
        if perturbed && !rng.gen_bool(0.6) {
            continue;
        }
        // keep v(a) + exp·t > t + 1/10 on the whole interval [0, r]
        let floor = if exp >= 1 {
            rat(1, 10)
        } else {
            rat(1, 10) + Rat::from_integer(1 - exp) * r
        };
        // snap up to the half-integer grid so exact coefficient arithmetic stays cheap
        let raw = floor + rat(rng.gen_range(0..=3), 2);
        let halves = (raw * Rat::from_integer(2)).ceil().to_integer();
        let v = grid_up(ctx, rat(halves, 2));
        terms.push((exp, sv(ctx, v)));
        perturbed = true;
    }
    AnnulusSeries::from_terms(ctx, geom, terms)
}

struct Trial {
    ctx: FieldCtx,
    pres_in: CoverPresentation,
    expected: BinomialForm,
}

/// An étale annular p-cover in binomial or Kummer form, before disguise.
fn random_cover(rng: &mut ChaCha8Rng, regime: u32) -> Trial {
    let precision = rat(8, 1);
    let (ctx, radii): (FieldCtx, &[Rat]) = match regime {
        0 => (
            FieldCtx::equal_char(2, 2, precision).unwrap(),
            &[rat(1, 3), rat(1, 4), rat(1, 5), rat(1, 6)],
        ),
        1 => (
            FieldCtx::equal_char(3, 3, precision).unwrap(),
            &[rat(1, 3), rat(1, 4), rat(1, 5), rat(1, 6)],
        ),
        _ => (
            FieldCtx::mixed_char(2, 2, precision).unwrap(),
            &[rat(1, 4), rat(1, 5), rat(1, 6)],
        ),
    };
    let p = ctx.cfg.p as i64;
    let r = radii[rng.gen_range(0..radii.len())];
    let geom = Geom::annulus(r);
    if ctx.is_mixed() && rng.gen_bool(0.5) {
        // Kummer disguised by a p-divisible perturbation
        let phi = AnnulusSeries::from_terms(
            &ctx,
            geom,
            [(p, CoefficientElem::one(&ctx)), (2 * p, sv(&ctx, rat(2, 1)))],
        );
        let pres_in = CoverPresentation::new(&ctx, phi, p).unwrap();
        return Trial { ctx, pres_in, expected: BinomialForm::Kummer { m: p } };
    }
    let (n, v_c) = if ctx.is_mixed() {
        // v(c) + (n-p)t must stay inside (0, v(p)) on [0, r]
        (3, rat(1, 2))
    } else {
        let n = loop {
            let n = rng.gen_range(p + 1..=p + 4);
            if n % p != 0 {
                break n;
            }
        };
        // half-integer valuations keep the exact coefficient arithmetic cheap
        (n, rat(rng.gen_range(1..=3), 2))
    };
    let c = sv(&ctx, v_c);
    let phi = AnnulusSeries::from_terms(
        &ctx,
        geom,
        [(p, CoefficientElem::one(&ctx)), (n, c.clone())],
    );
    let pres_in = CoverPresentation::new(&ctx, phi, p).unwrap();
    Trial { ctx, pres_in, expected: BinomialForm::Binomial { n, c } }
}

#[test]
fn criterion_1_and_2_normalization_and_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut contraction_violations = Vec::new();
    let started = Instant::now();
    let mut normalization = || -> Result<(), String> {
        for trial in 0..50u32 {
            let Trial { ctx, pres_in, expected } = random_cover(&mut rng, trial % 3);
            let delta_in = different_on_skeleton(&ctx, &pres_in)
                .map_err(|e| format!("trial {trial}: input different: {e}"))?
                .monomial;
            let g = random_aut(&ctx, &mut rng, pres_in.source_geom());
            let h = random_aut(&ctx, &mut rng, pres_in.target_geom());
            let chained = h
                .compose(&ctx, &pres_in.phi)
                .and_then(|s| s.compose(&ctx, &g))
                .map_err(|e| format!("trial {trial}: composition: {e}"))?;
            let pres = CoverPresentation::new(&ctx, chained, pres_in.degree)
                .map_err(|e| format!("trial {trial}: disguised cover: {e}"))?;
            let out =
                normalize(&ctx, &pres).map_err(|e| format!("trial {trial}: normalize: {e}"))?;
            if out.delta != delta_in {
                return Err(format!(
                    "trial {trial}: different mismatch: {:?} vs {:?}",
                    out.delta, delta_in
                ));
            }
            let matches = match (&out.form, &expected) {
                (BinomialForm::Kummer { m }, BinomialForm::Kummer { m: m0 }) => m == m0,
                (BinomialForm::Binomial { n, c }, BinomialForm::Binomial { n: n0, c: c0 }) => {
                    n == n0 && c.valuation(&ctx) == c0.valuation(&ctx)
                }
                _ => false,
            };
            if !matches {
                return Err(format!(
                    "trial {trial}: classification mismatch: {:?} vs {:?}",
                    out.form, expected
                ));
            }
            contraction_violations.extend(out.violations);
        }
        let elapsed = started.elapsed();
        if elapsed.as_secs() >= 10 {
            return Err(format!("corpus took {elapsed:?}, budget 10s"));
        }
        Ok(())
    };
    check("1 normalization-round-trips", &mut normalization);
    check("2 contraction-bounds", || {
        if contraction_violations.is_empty() {
            Ok(())
        } else {
            Err(format!("{} violations: {:?}", contraction_violations.len(), contraction_violations))
        }
    });
}

#[test]
fn criterion_3_automorphism_metric_laws() {
    check("3 automorphism-metric-laws", || {
        // Valuations in this criterion never exceed ~4, so a small precision
        // keeps the exact arithmetic cheap without losing any information.
        let ctx = FieldCtx::equal_char(2, 2, rat(4, 1)).unwrap();
        let geom = Geom::annulus(rat(1, 4));
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let alpha = |s: &AnnulusSeries| {
            s.shift(&ctx, -1)
                .sub(&ctx, &AnnulusSeries::constant(&ctx, geom, CoefficientElem::one(&ctx)))
        };
        for pair in 0..200u32 {
            let f = random_aut(&ctx, &mut rng, geom);
            let g = random_aut(&ctx, &mut rng, geom);
            let nf = f.aut_norm(&ctx).map_err(|e| format!("pair {pair}: {e}"))?;
            let ng = g.aut_norm(&ctx).map_err(|e| format!("pair {pair}: {e}"))?;
            let fg = f.compose(&ctx, &g).map_err(|e| format!("pair {pair}: {e}"))?;
            let nfg = fg.aut_norm(&ctx).map_err(|e| format!("pair {pair}: {e}"))?;
            if nfg < nf.min(ng) {
                return Err(format!("pair {pair}: |f∘g| = {nfg:?} < min({nf:?}, {ng:?})"));
            }
            let finv =
                f.invert_automorphism(&ctx).map_err(|e| format!("pair {pair}: {e}"))?;
            let ninv = finv.aut_norm(&ctx).map_err(|e| format!("pair {pair}: {e}"))?;
            if ninv != nf {
                return Err(format!("pair {pair}: |f⁻¹| = {ninv:?} ≠ |f| = {nf:?}"));
            }
            // quadratic bound: α(f∘g) − α(f) − α(g) is small of order |f|·|g|
            let dev = alpha(&fg).sub(&ctx, &alpha(&f)).sub(&ctx, &alpha(&g));
            let dv = if dev.is_zero() { dev.tail } else { dev.spectral_val(&ctx) };
            if dv < nf + ng {
                return Err(format!(
                    "pair {pair}: α-deviation {dv:?} below {:?}",
                    nf + ng
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_4_different_oracle() {
    check("4 different-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for trial in 0..30u32 {
            let p: u32 = if trial % 2 == 0 { 2 } else { 3 };
            let gf = GfField::new(p, 1).unwrap();
            let pi = p as i64;
            let mut terms: BTreeMap<i64, u32> = [(pi, 1u32)].into();
            for _ in 0..rng.gen_range(1..5) {
                let e = rng.gen_range(pi + 1..=4 * pi);
                terms.insert(e, rng.gen_range(1..gf.q));
            }
            let phi = LaurentSeriesFp::new(terms.clone(), None).unwrap();
            // oracle 1: least prime-to-p exponent, straight off the term list
            let oracle_pord = terms
                .iter()
                .filter(|(e, c)| *e % pi != 0 && **c != 0)
                .map(|(e, _)| *e)
                .min();
            // oracle 2: order of dx, also off the raw terms (the p-divisible
            // ones vanish under d/dt)
            let dx_ord = terms
                .iter()
                .filter(|(e, c)| *e % pi != 0 && **c != 0)
                .map(|(e, _)| *e - 1)
                .min();
            let d = different_of_extension(&gf, &phi)
                .map_err(|e| format!("trial {trial}: {e}"))?;
            let expected = match oracle_pord {
                Some(o) => Val::from_int(o - 1),
                None => Val::Inf,
            };
            if d.delta != expected {
                return Err(format!("trial {trial}: δ = {:?}, oracle {expected:?}", d.delta));
            }
            let from_dx = match dx_ord {
                Some(o) => Val::from_int(o),
                None => Val::Inf,
            };
            if d.delta != from_dx {
                return Err(format!("trial {trial}: δ = {:?}, ord(dx) = {from_dx:?}", d.delta));
            }
        }
        // the binomial family x = y^p + y^n has δ = n − 1 exactly
        for (p, ns) in [(2u32, [3i64, 5, 7, 9]), (3, [4, 5, 7, 8])] {
            let gf = GfField::new(p, 1).unwrap();
            for n in ns {
                let phi = LaurentSeriesFp::from_exponents(&[(p as i64, 1), (n, 1)]);
                let d = different_of_extension(&gf, &phi).map_err(|e| e.to_string())?;
                if d.delta != Val::from_int(n - 1) {
                    return Err(format!("y^{p} + y^{n}: δ = {:?}, expected {}", d.delta, n - 1));
                }
            }
        }
        Ok(())
    });
}

/// Frobenius on P¹ with one wild marked point at infinity, the smallest
/// validating wild fixture.
fn frobenius_fixture(p: u32, v_delta: Rat) -> (GfField, LogMorphism, PEnhancement) {
    let gf = GfField::new(p, 1).unwrap();
    let mk = || LogCurve {
        components: vec![Component { id: "c".into(), genus: 0 }],
        nodes: vec![],
        marked: vec![("c".into(), "inf".into())],
        locations: [(("c".into(), "inf".into()), Point::Infinity)].into(),
    };
    let lam = LogMorphism {
        source: mk(),
        target: mk(),
        component_maps: [(
            "c".into(),
            ComponentMap { target: "c".into(), kind: MapKind::Radicial },
        )]
        .into(),
        point_maps: [(("c".into(), "inf".into()), (("c".into(), "inf".into()), p as i64))]
            .into(),
    };
    let enh = PEnhancement {
        deltas: [("c".into(), Val::Finite(v_delta))].into(),
        forms: [(
            "c".into(),
            ComponentForm::Form(BivariantFormFp::radicial(RationalFn::one()).unwrap()),
        )]
        .into(),
        s_overrides: BTreeMap::new(),
    };
    (gf, lam, enh)
}

#[test]
fn criterion_5_degree_law_and_rh_balance() {
    check("5 degree-law-and-balancing", || {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        for trial in 0..20u32 {
            let p: u32 = if trial % 2 == 0 { 2 } else { 3 };
            let gf = GfField::new(p, 1).unwrap();
            let random_poly = |rng: &mut ChaCha8Rng, max_deg: usize| loop {
                let coeffs: Vec<u32> =
                    (0..=max_deg).map(|_| rng.gen_range(0..gf.q)).collect();
                let f = Poly::from_coeffs(coeffs);
                if !f.is_zero() {
                    return f;
                }
            };
            let num = random_poly(&mut rng, 4);
            let den = random_poly(&mut rng, 3);
            let payload = RationalFn::new(&gf, num, den).map_err(|e| e.to_string())?;
            if payload.is_zero() {
                continue;
            }
            let form = BivariantFormFp::radicial(payload).unwrap();
            let total = form.degree_sum(&gf).map_err(|e| format!("trial {trial}: {e}"))?;
            if total != 2 * p as i64 - 2 {
                return Err(format!("trial {trial}: Σ ord = {total}, expected {}", 2 * p - 2));
            }
        }
        // balanced enhancements have residual 0; perturbing s breaks it
        for p in [2u32, 3] {
            let (gf, lam, mut enh) = frobenius_fixture(p, rat(1, 2));
            let rep =
                enhancement::validate(&gf, &lam, &enh, Strictness::Relaxed, Val::Inf)
                    .map_err(|e| e.to_string())?;
            if !rep.ok() {
                return Err(format!("p = {p}: fixture invalid: {:?}", rep.all_violations()));
            }
            let residual = enhancement::rh_balance(&gf, &lam, &enh, "c")
                .map_err(|e| e.to_string())?;
            if residual != 0 {
                return Err(format!("p = {p}: residual {residual} on a valid enhancement"));
            }
            enh.s_overrides.insert(("c".into(), "inf".into()), -(p as i64));
            let perturbed = enhancement::rh_balance(&gf, &lam, &enh, "c")
                .map_err(|e| e.to_string())?;
            if perturbed == 0 {
                return Err(format!("p = {p}: perturbed s left the residual at zero"));
            }
        }
        Ok(())
    });
}

#[test]
fn criterion_6_realize_reduce_grid() {
    check("6 realize-reduce-grid", || {
        let gf = GfField::new(2, 1).unwrap();
        let v_p = Val::from_int(1);
        let t_tildes = [
            RationalFn::var(),
            RationalFn::var().pow(&gf, 3).unwrap(),
            RationalFn::var()
                .pow(&gf, 3)
                .unwrap()
                .add(&gf, &RationalFn::var())
                .unwrap(),
        ];
        for (i, t_tilde) in t_tildes.iter().enumerate() {
            for v in [rat(1, 4), rat(1, 2), rat(3, 4)] {
                let regime = Regime::Pure { t_tilde: t_tilde.clone(), v_c: Val::Finite(v) };
                let red = enhancement::reduce_trace_form(&gf, &regime, v_p)
                    .map_err(|e| format!("grid ({i}, {v}): {e}"))?;
                let recipe = enhancement::realize_form(&gf, &red.form, red.v_delta, v_p)
                    .map_err(|e| format!("grid ({i}, {v}): realize: {e}"))?;
                let again = enhancement::reduce_trace_form(&gf, &recipe.regime(), v_p)
                    .map_err(|e| format!("grid ({i}, {v}): re-reduce: {e}"))?;
                let Reduction { form, v_delta } = again;
                if form != red.form || v_delta != red.v_delta {
                    return Err(format!("grid ({i}, {v}): round trip changed the reduction"));
                }
            }
            // boundary v(δ) = v(p): mixed forms
            for spike in 1..gf.q {
                let regime =
                    Regime::MixedBoundary { t_tilde: t_tilde.clone(), spike };
                let red = enhancement::reduce_trace_form(&gf, &regime, v_p)
                    .map_err(|e| format!("boundary {i}: {e}"))?;
                if red.v_delta != v_p {
                    return Err(format!("boundary {i}: v(δ) = {:?}", red.v_delta));
                }
                let recipe = enhancement::realize_form(&gf, &red.form, red.v_delta, v_p)
                    .map_err(|e| format!("boundary {i}: realize: {e}"))?;
                let again = enhancement::reduce_trace_form(&gf, &recipe.regime(), v_p)
                    .map_err(|e| format!("boundary {i}: re-reduce: {e}"))?;
                if again.form != red.form || again.v_delta != red.v_delta {
                    return Err(format!("boundary {i}: round trip changed the reduction"));
                }
            }
        }
        Ok(())
    });
}

/// Two radicial components joined at a wild node, with a wild marked point
/// on one side.
fn wild_node_fixture() -> (FieldCtx, LogMorphism, PEnhancement) {
    let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
    let mk = |modulus: Rat| LogCurve {
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
        source: mk(rat(1, 4)),
        target: mk(rat(1, 2)),
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
    let gf = &ctx.gf;
    let enh = PEnhancement {
        deltas: [
            ("a".into(), Val::Finite(rat(1, 2))),
            ("b".into(), Val::Finite(rat(3, 4))),
        ]
        .into(),
        forms: [
            (
                "a".into(),
                ComponentForm::Form(BivariantFormFp::radicial(RationalFn::one()).unwrap()),
            ),
            (
                "b".into(),
                ComponentForm::Form(
                    BivariantFormFp::radicial(RationalFn::var().pow(gf, 2).unwrap()).unwrap(),
                ),
            ),
        ]
        .into(),
        s_overrides: BTreeMap::new(),
    };
    (ctx, lam, enh)
}

/// A tame Kummer cover: z = w³ on P¹, ramified at 0 and ∞.
fn tame_fixture() -> (FieldCtx, LogMorphism, PEnhancement) {
    let ctx = FieldCtx::equal_char(2, 2, rat(30, 1)).unwrap();
    let gf = &ctx.gf;
    let mk = || LogCurve {
        components: vec![Component { id: "c".into(), genus: 0 }],
        nodes: vec![],
        marked: vec![("c".into(), "orig".into()), ("c".into(), "inf".into())],
        locations: [
            (("c".into(), "orig".into()), Point::origin()),
            (("c".into(), "inf".into()), Point::Infinity),
        ]
        .into(),
    };
    let cubic = RationalFn::var().pow(gf, 3).unwrap();
    let lam = LogMorphism {
        source: mk(),
        target: mk(),
        component_maps: [(
            "c".into(),
            ComponentMap { target: "c".into(), kind: MapKind::Separable(cubic) },
        )]
        .into(),
        point_maps: [
            (("c".into(), "orig".into()), (("c".into(), "orig".into()), 3)),
            (("c".into(), "inf".into()), (("c".into(), "inf".into()), 3)),
        ]
        .into(),
    };
    let enh = PEnhancement {
        deltas: [("c".into(), Val::zero())].into(),
        forms: [("c".into(), ComponentForm::Trace)].into(),
        s_overrides: BTreeMap::new(),
    };
    (ctx, lam, enh)
}

fn plan_for(
    fixture: &(FieldCtx, LogMorphism, PEnhancement),
) -> Result<GluingPlan, String> {
    let (ctx, lam, enh) = fixture;
    lifting::build_plan(ctx, lam, enh).map_err(|e| e.to_string())
}

fn verify_ok(
    fixture: &(FieldCtx, LogMorphism, PEnhancement),
    plan: &GluingPlan,
) -> Result<bool, String> {
    let (ctx, lam, enh) = fixture;
    let rep = lifting::verify_plan(ctx, plan, lam, enh).map_err(|e| e.to_string())?;
    Ok(rep.ok())
}

#[test]
fn criterion_7_lifting_round_trip() {
    check("7 lifting-round-trips", || {
        let frob = {
            let (gf, lam, enh) = frobenius_fixture(2, rat(1, 2));
            let ctx = FieldCtx::equal_char(gf.p, gf.q, rat(30, 1)).unwrap();
            (ctx, lam, enh)
        };
        let fixtures = [
            ("frobenius", frob),
            ("wild-node", wild_node_fixture()),
            ("fully-tame", tame_fixture()),
        ];
        for (name, fixture) in &fixtures {
            let plan = plan_for(fixture)?;
            if !verify_ok(fixture, &plan)? {
                return Err(format!("{name}: verify(build(·)) failed"));
            }
        }
        // three corruptions of the canonical plan must each be caught
        let fixture = &fixtures[0].1;
        let good = plan_for(fixture)?;
        let key = ("c".to_string(), "inf".to_string());

        let mut slope = good.clone();
        slope.disc_pieces.insert(key.clone(), LocalPiece::Binomial {
            l: 2,
            v_c: Val::Finite(rat(1, 2)),
        });
        if verify_ok(fixture, &slope)? {
            return Err("perturbed slope not caught".into());
        }

        let mut coeff = good.clone();
        coeff.disc_pieces.insert(key, LocalPiece::Binomial {
            l: 1,
            v_c: Val::Finite(rat(1, 1)),
        });
        if verify_ok(fixture, &coeff)? {
            return Err("perturbed coefficient valuation not caught".into());
        }

        let mut radii = good.clone();
        radii.v_s = radii.v_r + rat(1, 10);
        if verify_ok(fixture, &radii)? {
            return Err("perturbed radii not caught".into());
        }
        Ok(())
    });
}

#[test]
fn criterion_8_disc_cover_classification() {
    check("8 disc-cover-classification", || {
        let mut rng = ChaCha8Rng::seed_from_u64(808);
        // mixed characteristic: étale pointed-disc 2-covers are Kummer
        let ctx = FieldCtx::mixed_char(2, 2, rat(40, 1)).unwrap();
        for trial in 0..10u32 {
            let mut terms = vec![(2i64, CoefficientElem::one(&ctx))];
            for e in 3..=6i64 {
                if rng.gen_bool(0.5) {
                    terms.push((e, sv(&ctx, rat(rng.gen_range(3..=6), 2))));
                }
            }
            let phi = AnnulusSeries::from_terms(&ctx, Geom::Disc, terms);
            let pres = CoverPresentation::new(&ctx, phi, 2).unwrap();
            let out = normalize_disc_cover(&ctx, &pres)
                .map_err(|e| format!("mixed trial {trial}: {e}"))?;
            if out.form != (BinomialForm::Kummer { m: 2 }) {
                return Err(format!("mixed trial {trial}: got {:?}", out.form));
            }
            if out.delta != (MonomialFn { base: Val::from_int(1), slope: 0 }) {
                return Err(format!("mixed trial {trial}: δ = {:?}", out.delta));
            }
        }
        // equal characteristic: binomial with the input's different
        let ctx = FieldCtx::equal_char(2, 2, rat(40, 1)).unwrap();
        for trial in 0..10u32 {
            let v_c = rat(rng.gen_range(1..=6), 10);
            let mut terms = vec![(2i64, CoefficientElem::one(&ctx)), (3, sv(&ctx, v_c))];
            for e in 4..=6i64 {
                if rng.gen_bool(0.5) {
                    terms.push((e, sv(&ctx, v_c + rat(rng.gen_range(1..=4), 2))));
                }
            }
            let phi = AnnulusSeries::from_terms(&ctx, Geom::Disc, terms);
            let pres = CoverPresentation::new(&ctx, phi, 2).unwrap();
            let delta_in = different_on_skeleton(&ctx, &pres)
                .map_err(|e| format!("equal trial {trial}: {e}"))?
                .monomial;
            let out = normalize_disc_cover(&ctx, &pres)
                .map_err(|e| format!("equal trial {trial}: {e}"))?;
            match &out.form {
                BinomialForm::Binomial { .. } => {}
                other => return Err(format!("equal trial {trial}: got {other:?}")),
            }
            if out.delta != delta_in {
                return Err(format!(
                    "equal trial {trial}: δ = {:?}, input δ = {delta_in:?}",
                    out.delta
                ));
            }
        }
        Ok(())
    });
}
