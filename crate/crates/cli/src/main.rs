//! Batch front end: reads JSON documents, dispatches library computations,
//! and prints machine-readable JSON reports.
//!
//! Exit status: 0 on success/pass, 1 on validation failure (a report is
//! still printed), 2 on input errors (malformed documents, parse errors,
//! unusable flags).

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wildcover::doc::{monomial_json, parse_precision, Document, PlanDoc, DOC_VERSION};
use wildcover::enhancement::{self, PEnhancement, Strictness};
use wildcover::error::Error;
use wildcover::gf::GfField;
use wildcover::lifting;
use wildcover::log_curve::LogMorphism;
use wildcover::normalize::{self, BinomialForm};
use wildcover::parse::parse_laurent;
use wildcover::valued_field::FieldCtx;

#[derive(Parser)]
#[command(name = "wildcover", version, about = "Exact arithmetic for wild degree-p covers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrictnessArg {
    Literal,
    Relaxed,
}

impl From<StrictnessArg> for Strictness {
    fn from(s: StrictnessArg) -> Strictness {
        match s {
            StrictnessArg::Literal => Strictness::Literal,
            StrictnessArg::Relaxed => Strictness::Relaxed,
        }
    }
}

#[derive(clap::Args)]
struct LiftFlags {
    /// lifting field: "equal" or "mixed:<e>" (ramification index over Q_p)
    #[arg(long, default_value = "equal")]
    field: String,
    /// precision cap for series arithmetic, a positive rational
    #[arg(long, default_value = "40")]
    precision: String,
}

impl LiftFlags {
    fn ctx(&self, gf: &GfField) -> Result<FieldCtx, Error> {
        let precision = parse_precision(&self.precision)?;
        match self.field.as_str() {
            "equal" => FieldCtx::equal_char(gf.p, gf.q, precision),
            other => match other.strip_prefix("mixed:").and_then(|e| e.parse::<i64>().ok()) {
                Some(e) => FieldCtx::mixed_char(gf.p, e, precision),
                None => Err(Error::InvalidInput(format!(
                    "--field must be \"equal\" or \"mixed:<e>\", got {other:?}"
                ))),
            },
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize an annular or disc cover document to binomial/Kummer form
    Normalize { input: PathBuf },
    /// Print the different of a cover as an affine function of v(y)
    Different { input: PathBuf },
    /// Least prime-to-p order of a Laurent series literal
    Pord {
        /// residue characteristic
        #[arg(long)]
        p: u32,
        /// field degree over the prime field
        #[arg(long, default_value_t = 1)]
        m: u32,
        expr: String,
    },
    /// Structural checks for a log curve document
    ValidateCurve { input: PathBuf },
    /// Structural and minimal-wildness checks for a log morphism document
    ValidateMorphism { input: PathBuf },
    /// Check the four enhancement conditions against a morphism
    ValidateEnhancement {
        morphism: PathBuf,
        enhancement: PathBuf,
        #[arg(long, value_enum, default_value = "literal")]
        strictness: StrictnessArg,
        #[command(flatten)]
        flags: LiftFlags,
    },
    /// Construct a gluing plan from a validated morphism + enhancement
    BuildPlan {
        morphism: PathBuf,
        enhancement: PathBuf,
        #[command(flatten)]
        flags: LiftFlags,
    },
    /// Re-derive the invariants of a plan and compare against the enhancement
    VerifyPlan {
        plan: PathBuf,
        morphism: PathBuf,
        enhancement: PathBuf,
        #[command(flatten)]
        flags: LiftFlags,
    },
    /// build-plan followed by verify-plan on the result
    Roundtrip {
        morphism: PathBuf,
        enhancement: PathBuf,
        #[command(flatten)]
        flags: LiftFlags,
    },
}

fn read_input(path: &PathBuf) -> Result<String, Error> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::InvalidInput(format!("reading stdin: {e}")))?;
        return Ok(buf);
    }
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("reading {}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<Document, Error> {
    Document::from_json(&read_input(path)?)
}

fn load_cover(path: &PathBuf) -> Result<(FieldCtx, normalize::CoverPresentation), Error> {
    match load(path)? {
        Document::Cover { payload, .. } => payload.build(),
        _ => Err(Error::InvalidInput(format!("{}: expected a cover document", path.display()))),
    }
}

fn load_morphism(path: &PathBuf) -> Result<(GfField, LogMorphism), Error> {
    match load(path)? {
        Document::Morphism { payload, .. } => payload.build(),
        _ => Err(Error::InvalidInput(format!(
            "{}: expected a morphism document",
            path.display()
        ))),
    }
}

fn load_enhancement(path: &PathBuf, gf: &GfField) -> Result<PEnhancement, Error> {
    match load(path)? {
        Document::Enhancement { payload, .. } => payload.build(gf),
        _ => Err(Error::InvalidInput(format!(
            "{}: expected an enhancement document",
            path.display()
        ))),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serialization"));
}

/// Print a pass/fail report; failure is exit status 1.
fn report(ok: bool, body: serde_json::Value) -> ExitCode {
    let mut obj = json!({ "ok": ok });
    if let (Some(o), Some(b)) = (obj.as_object_mut(), body.as_object()) {
        for (k, v) in b {
            o.insert(k.clone(), v.clone());
        }
    }
    print_json(&obj);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Normalize { input } => {
            let (ctx, pres) = load_cover(&input)?;
            let outcome = match pres.source_geom() {
                wildcover::annulus::Geom::Disc => normalize::normalize_disc_cover(&ctx, &pres)?,
                _ => normalize::normalize(&ctx, &pres)?,
            };
            let form = match &outcome.form {
                BinomialForm::Kummer { m } => json!({ "kind": "kummer", "n": m }),
                BinomialForm::Binomial { n, c } => json!({
                    "kind": "binomial",
                    "n": n,
                    "v_c": c.valuation(&ctx).to_string(),
                }),
            };
            print_json(&json!({
                "form": form,
                "delta": monomial_json(&outcome.delta),
                "iterations": outcome.iterations,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Different { input } => {
            let (ctx, pres) = load_cover(&input)?;
            let skel = normalize::different_on_skeleton(&ctx, &pres)?;
            print_json(&json!({ "delta": monomial_json(&skel.monomial) }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Pord { p, m, expr } => {
            let gf = GfField::new(p, m)?;
            let series = parse_laurent(&gf, &expr)?;
            let ord = series.pord(p)?;
            print_json(&json!({ "pord": ord.to_string() }));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ValidateCurve { input } => {
            let Document::Curve { payload, .. } = load(&input)? else {
                return Err(Error::InvalidInput(format!(
                    "{}: expected a curve document",
                    input.display()
                )));
            };
            let gf = payload.field.field()?;
            let curve = payload.curve.build(&gf)?;
            let rep = curve.validate();
            Ok(report(rep.ok(), json!({ "violations": rep.violations })))
        }
        Cmd::ValidateMorphism { input } => {
            let (gf, lam) = load_morphism(&input)?;
            let rep = lam.validate(&gf);
            if !rep.ok() {
                return Ok(report(false, json!({ "violations": rep.violations })));
            }
            let wild = lam.minimally_wild_check(&gf);
            Ok(report(
                wild.ok(),
                json!({ "violations": [], "wildness_violations": wild.violations }),
            ))
        }
        Cmd::ValidateEnhancement { morphism, enhancement, strictness, flags } => {
            let (gf, lam) = load_morphism(&morphism)?;
            let enh = load_enhancement(&enhancement, &gf)?;
            let structural = lam.validate(&gf);
            if !structural.ok() {
                return Ok(report(false, json!({ "violations": structural.violations })));
            }
            let ctx = flags.ctx(&gf)?;
            let rep =
                enhancement::validate(&gf, &lam, &enh, strictness.into(), ctx.v_p())?;
            let conditions: Vec<_> = rep.conditions.to_vec();
            let s_values: serde_json::Map<String, serde_json::Value> = rep
                .s_values
                .iter()
                .map(|(k, v)| (wildcover::doc::fmt_ref(k), json!(v)))
                .collect();
            let mut balance = serde_json::Map::new();
            for c in &lam.source.components {
                if let Ok(r) = enhancement::rh_balance(&gf, &lam, &enh, &c.id) {
                    balance.insert(c.id.clone(), json!(r));
                }
            }
            Ok(report(
                rep.ok(),
                json!({
                    "conditions": conditions,
                    "s_values": s_values,
                    "degree_residuals": balance,
                }),
            ))
        }
        Cmd::BuildPlan { morphism, enhancement, flags } => {
            let (gf, lam) = load_morphism(&morphism)?;
            let enh = load_enhancement(&enhancement, &gf)?;
            let ctx = flags.ctx(&gf)?;
            let plan = lifting::build_plan(&ctx, &lam, &enh)?;
            let doc = Document::Plan {
                version: DOC_VERSION,
                payload: PlanDoc::of(&gf, &plan),
            };
            print!("{}", doc.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::VerifyPlan { plan, morphism, enhancement, flags } => {
            let (gf, lam) = load_morphism(&morphism)?;
            let enh = load_enhancement(&enhancement, &gf)?;
            let Document::Plan { payload, .. } = load(&plan)? else {
                return Err(Error::InvalidInput(format!(
                    "{}: expected a plan document",
                    plan.display()
                )));
            };
            let (_, glue) = payload.build()?;
            let ctx = flags.ctx(&gf)?;
            let rep = lifting::verify_plan(&ctx, &glue, &lam, &enh)?;
            Ok(report(rep.ok(), lift_report_json(&rep)))
        }
        Cmd::Roundtrip { morphism, enhancement, flags } => {
            let (gf, lam) = load_morphism(&morphism)?;
            let enh = load_enhancement(&enhancement, &gf)?;
            let ctx = flags.ctx(&gf)?;
            let plan = lifting::build_plan(&ctx, &lam, &enh)?;
            let rep = lifting::verify_plan(&ctx, &plan, &lam, &enh)?;
            Ok(report(rep.ok(), lift_report_json(&rep)))
        }
    }
}

fn lift_report_json(rep: &lifting::LiftReport) -> serde_json::Value {
    let edges: serde_json::Map<String, serde_json::Value> = rep
        .edge_monomials
        .iter()
        .map(|(k, m)| (k.clone(), monomial_json(m)))
        .collect();
    json!({ "violations": rep.violations, "edge_monomials": edges })
}

/// ValidationRequired means the inputs were readable but fail their own
/// validation: that is a checked failure (1), not an input error (2).
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Error::ValidationRequired(msg)) => {
            print_json(&json!({ "ok": false, "violations": [msg] }));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
