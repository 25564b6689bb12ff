//! Batch front-end: load field definitions, run verifier suites, write
//! reports. Exit codes: 0 all checks pass, 1 a property fails or an
//! operation refuses its input, 2 malformed input.

mod input;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use exform::calculus::fit_structural_constant;
use exform::chart::build_adapted_chart;
use exform::field::BoundaryTag;
use exform::jet::infinite_order_probe;
use exform::order::{compare_orders_under_reflection, estimate_order_1mean};
use exform::quad::QuadConfig;
use exform::reflect::{
    mirrored_pairs, reflect_form, reflect_form_via_star, reflect_metric,
    verify_derivative_identities, verify_det_and_inverse_identities, verify_integral_doubling,
    verify_metric_positive_definite, verify_norm_and_inequality_transfer,
};
use exform::zeros::{box_dimension, catalogue, zero_cloud, CatalogueEntry};
use exform::Error;

use input::InputSpec;

#[derive(Parser)]
#[command(name = "exform", version, about = "verify reflection, charts, orders, zeros, and jets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Input definition file (JSON).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use a bundled catalogue entry instead of an input file.
    #[arg(long)]
    catalogue: Option<String>,
    /// Seed for all randomized sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature node budget.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Reflect a half-ball metric and form, verifying every identity of the
    /// extension in construction order.
    VerifyReflection {
        #[command(flatten)]
        common: CommonArgs,
        /// Run a single named stage.
        #[arg(long)]
        stage: Option<String>,
        /// Tolerance for the derivative and norm-transfer identities.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Build a boundary-adapted chart and check its defining properties.
    AdaptChart {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Boundary sample points per tangential axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Estimate the vanishing order in 1-mean at a point.
    Order {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluation point, comma-separated.
        #[arg(long)]
        point: Option<String>,
        /// Radii grid, comma-separated and strictly decreasing.
        #[arg(long)]
        radii: Option<String>,
        /// Also reflect the form and verify order transfer at the origin.
        #[arg(long)]
        reflect: bool,
    },
    /// Extract the zero set and estimate its box dimension.
    Zeros {
        #[command(flatten)]
        common: CommonArgs,
        /// Coarse scan grid points per axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Fiber-norm acceptance tolerance for zero points.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Box-counting scales, comma-separated.
        #[arg(long)]
        scales: Option<String>,
    },
    /// Recover the boundary jet table and probe the vanishing order.
    Jets {
        #[command(flatten)]
        common: CommonArgs,
        /// Boundary base point, comma-separated.
        #[arg(long)]
        point: Option<String>,
        /// Maximum total derivative order.
        #[arg(long, default_value_t = 4)]
        max_order: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::VerifyReflection { common, stage, tol } => {
            cmd_verify_reflection(&common, stage.as_deref(), tol)
        }
        Command::AdaptChart { common, tol, grid } => cmd_adapt_chart(&common, tol, grid),
        Command::Order {
            common,
            point,
            radii,
            reflect,
        } => cmd_order(&common, point.as_deref(), radii.as_deref(), reflect),
        Command::Zeros {
            common,
            grid,
            tol,
            scales,
        } => cmd_zeros(&common, grid, tol, scales.as_deref()),
        Command::Jets {
            common,
            point,
            max_order,
        } => cmd_jets(&common, point.as_deref(), max_order),
    };
    std::process::exit(code);
}

/// 1 for failed properties and refused operations, 2 for bad input.
fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::IndexOutOfRange { .. }
        | Error::DegreeOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonPolynomial { .. }
        | Error::BadScaleGrid { .. } => 2,
        _ => 1,
    }
}

fn fail(msg: &str, code: i32) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn write_report(common: &CommonArgs, text: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad {what} {s:?}: {e}"))
        })
        .collect()
}

fn load_spec(common: &CommonArgs) -> Result<InputSpec, String> {
    let path = common
        .input
        .as_ref()
        .ok_or("this invocation needs --input (or --catalogue where supported)")?;
    InputSpec::load(path)
}

/// Catalogue entry lookup. Unknown names are input errors; a bundled entry
/// failing its own residual check is a property failure.
fn load_catalogue_entry(name: &str) -> Result<CatalogueEntry, (String, i32)> {
    let entries = catalogue().map_err(|e| (e.to_string(), 1))?;
    entries
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| (format!("no catalogue entry named {name:?}"), 2))
}

#[derive(Serialize)]
struct StageReport {
    stage: String,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct ReflectionReport {
    command: &'static str,
    seed: u64,
    stages: Vec<StageReport>,
    pass: bool,
}

const REFLECTION_STAGES: [&str; 7] = [
    "adaptedness",
    "trace-matching",
    "positive-definite",
    "det-inverse",
    "derivative-identities",
    "norm-transfer",
    "integral-doubling",
];

fn cmd_verify_reflection(common: &CommonArgs, stage_filter: Option<&str>, tol: f64) -> i32 {
    if let Some(s) = stage_filter {
        if !REFLECTION_STAGES.contains(&s) {
            return fail(
                &format!("unknown stage {s:?}; expected one of {REFLECTION_STAGES:?}"),
                2,
            );
        }
    }
    let spec = match load_spec(common) {
        Ok(s) => s,
        Err(e) => return fail(&e, 2),
    };
    let (g, omega) = match (spec.metric(), spec.form()) {
        (Ok(g), Ok(f)) => (g, f),
        (Err(e), _) | (_, Err(e)) => return fail(&e, 2),
    };

    let mut stages: Vec<StageReport> = Vec::new();
    let mut pass = true;
    let wants = |name: &str| stage_filter.map_or(true, |s| s == name);

    // construction stages run unconditionally: every verifier needs their
    // outputs, and their refusals are the first two failure modes
    let rm = match reflect_metric(&g) {
        Ok(rm) => {
            stages.push(StageReport {
                stage: "adaptedness".into(),
                pass: true,
                error: None,
                detail: None,
            });
            rm
        }
        Err(e) => {
            stages.push(StageReport {
                stage: "adaptedness".into(),
                pass: false,
                error: Some(e.to_string()),
                detail: None,
            });
            let report = ReflectionReport {
                command: "verify-reflection",
                seed: common.seed,
                stages,
                pass: false,
            };
            return finish_reflection(common, report, exit_code_for(&e));
        }
    };
    let rf = match omega.tag {
        BoundaryTag::TangentialPartZero => reflect_form_via_star(&omega, &g),
        _ => reflect_form(&omega),
    };
    let rf = match rf {
        Ok(rf) => {
            stages.push(StageReport {
                stage: "trace-matching".into(),
                pass: true,
                error: None,
                detail: None,
            });
            rf
        }
        Err(e) => {
            stages.push(StageReport {
                stage: "trace-matching".into(),
                pass: false,
                error: Some(e.to_string()),
                detail: None,
            });
            let report = ReflectionReport {
                command: "verify-reflection",
                seed: common.seed,
                stages,
                pass: false,
            };
            return finish_reflection(common, report, exit_code_for(&e));
        }
    };

    let run = |name: &str,
                   stages: &mut Vec<StageReport>,
                   pass: &mut bool,
                   result: exform::Result<serde_json::Value>,
                   ok: bool| {
        if let Err(e) = &result {
            stages.push(StageReport {
                stage: name.into(),
                pass: false,
                error: Some(e.to_string()),
                detail: None,
            });
            *pass = false;
            return;
        }
        stages.push(StageReport {
            stage: name.into(),
            pass: ok,
            error: None,
            detail: result.ok(),
        });
        if !ok {
            *pass = false;
        }
    };

    if wants("positive-definite") {
        let r = verify_metric_positive_definite(&rm, 200, common.seed);
        let ok = r.as_ref().map_or(false, |v| v.iter().all(|i| i.pass));
        run(
            "positive-definite",
            &mut stages,
            &mut pass,
            r.map(|v| serde_json::to_value(v).unwrap()),
            ok,
        );
    }
    if wants("det-inverse") {
        let r = verify_det_and_inverse_identities(&rm, 100, common.seed.wrapping_add(1));
        let ok = r.as_ref().map_or(false, |v| v.iter().all(|i| i.pass));
        run(
            "det-inverse",
            &mut stages,
            &mut pass,
            r.map(|v| serde_json::to_value(v).unwrap()),
            ok,
        );
    }
    if wants("derivative-identities") {
        let r = verify_derivative_identities(&rf, &rm, 50, common.seed.wrapping_add(2)).map(
            |mut v| {
                for i in &mut v {
                    i.tolerance = tol;
                    i.pass = i.worst_error <= tol;
                }
                v
            },
        );
        let ok = r.as_ref().map_or(false, |v| v.iter().all(|i| i.pass));
        run(
            "derivative-identities",
            &mut stages,
            &mut pass,
            r.map(|v| serde_json::to_value(v).unwrap()),
            ok,
        );
    }
    if wants("norm-transfer") {
        let r = (|| {
            let samples: Vec<Vec<f64>> =
                mirrored_pairs(g.n(), g.domain().r, 150, common.seed.wrapping_add(3), 1e-3)
                    .into_iter()
                    .map(|(up, _)| up)
                    .collect();
            let c = fit_structural_constant(&rf.source, &rm.source, &samples, 1e-9)?;
            verify_norm_and_inequality_transfer(&rf, &rm, c, 30, common.seed.wrapping_add(4))
        })();
        let ok = r.as_ref().map_or(false, |v| v.iter().all(|i| i.pass));
        run(
            "norm-transfer",
            &mut stages,
            &mut pass,
            r.map(|v| serde_json::to_value(v).unwrap()),
            ok,
        );
    }
    if wants("integral-doubling") {
        let cfg = QuadConfig {
            nodes: common.samples,
            seed: common.seed,
            replicates: 8,
        };
        let r = verify_integral_doubling(&rf, &cfg);
        let ok = r.as_ref().map_or(false, |v| v.pass);
        run(
            "integral-doubling",
            &mut stages,
            &mut pass,
            r.map(|v| serde_json::to_value(v).unwrap()),
            ok,
        );
    }

    let code = if pass { 0 } else { 1 };
    let report = ReflectionReport {
        command: "verify-reflection",
        seed: common.seed,
        stages,
        pass,
    };
    finish_reflection(common, report, code)
}

fn finish_reflection(common: &CommonArgs, report: ReflectionReport, code: i32) -> i32 {
    if common.format != "json" {
        return fail("verify-reflection only supports --format json", 2);
    }
    match write_report(common, &to_json(&report)) {
        Ok(()) => code,
        Err(e) => fail(&e, 2),
    }
}

fn cmd_adapt_chart(common: &CommonArgs, tol: f64, grid: usize) -> i32 {
    if common.format != "json" {
        return fail("adapt-chart only supports --format json", 2);
    }
    let spec = match load_spec(common) {
        Ok(s) => s,
        Err(e) => return fail(&e, 2),
    };
    let g = match spec.metric() {
        Ok(g) => g,
        Err(e) => return fail(&e, 2),
    };
    let patch = match spec.patch() {
        Ok(p) => p,
        Err(e) => return fail(&e, 2),
    };
    let radius = spec.radius.unwrap_or(0.4 * spec.domain.r);

    #[derive(Serialize)]
    struct ChartReport {
        command: &'static str,
        radius: f64,
        base_point: Option<Vec<f64>>,
        properties: Vec<exform::report::IdentityReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<String>,
        pass: bool,
    }

    let (report, code) = match build_adapted_chart(&g, &patch, radius)
        .and_then(|chart| Ok((chart.base_point.clone(), chart.verify_properties(grid, tol)?)))
    {
        Ok((base_point, properties)) => {
            let pass = properties.iter().all(|p| p.pass);
            (
                ChartReport {
                    command: "adapt-chart",
                    radius,
                    base_point: Some(base_point),
                    properties,
                    error: None,
                    pass,
                },
                if pass { 0 } else { 1 },
            )
        }
        Err(e) => (
            ChartReport {
                command: "adapt-chart",
                radius,
                base_point: None,
                properties: vec![],
                error: Some(e.to_string()),
                pass: false,
            },
            exit_code_for(&e),
        ),
    };
    match write_report(common, &to_json(&report)) {
        Ok(()) => code,
        Err(e) => fail(&e, 2),
    }
}

/// Form + metric either from --catalogue or from --input.
fn load_form(common: &CommonArgs) -> Result<(exform::field::FormField, exform::field::MetricField), (String, i32)> {
    if let Some(name) = &common.catalogue {
        let e = load_catalogue_entry(name)?;
        return Ok((e.gamma, e.metric));
    }
    let spec = load_spec(common).map_err(|e| (e, 2))?;
    let g = spec.metric().map_err(|e| (e, 2))?;
    let f = spec.form().map_err(|e| (e, 2))?;
    Ok((f, g))
}

fn cmd_order(
    common: &CommonArgs,
    point: Option<&str>,
    radii: Option<&str>,
    reflect: bool,
) -> i32 {
    let (omega, _g) = match load_form(common) {
        Ok(v) => v,
        Err((e, code)) => return fail(&e, code),
    };
    let n = omega.n();
    let point = match point {
        Some(t) => match parse_floats(t, "point coordinate") {
            Ok(p) => p,
            Err(e) => return fail(&e, 2),
        },
        None => vec![0.0; n],
    };
    let r = omega.domain().r;
    let radii = match radii {
        Some(t) => match parse_floats(t, "radius") {
            Ok(v) => v,
            Err(e) => return fail(&e, 2),
        },
        None => [0.4, 0.2, 0.1, 0.05, 0.025].iter().map(|s| s * r).collect(),
    };
    let cfg = QuadConfig {
        nodes: common.samples,
        seed: common.seed,
        replicates: 8,
    };

    if reflect {
        if common.format != "json" {
            return fail("order --reflect only supports --format json", 2);
        }
        let rf = match reflect_form(&omega) {
            Ok(rf) => rf,
            Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
        };
        return match compare_orders_under_reflection(&rf.source, &rf.extended, &radii, &cfg, 0.1) {
            Ok(rep) => {
                let code = if rep.pass { 0 } else { 1 };
                match write_report(common, &to_json(&rep)) {
                    Ok(()) => code,
                    Err(e) => fail(&e, 2),
                }
            }
            Err(e) => fail(&e.to_string(), exit_code_for(&e)),
        };
    }

    match estimate_order_1mean(&omega, &point, &radii, &cfg) {
        Ok(rep) => {
            let text = match common.format.as_str() {
                "json" => to_json(&rep),
                "csv" => rep.to_csv(),
                other => return fail(&format!("unknown format {other:?}"), 2),
            };
            match write_report(common, &text) {
                Ok(()) => 0,
                Err(e) => fail(&e, 2),
            }
        }
        Err(e) => fail(&e.to_string(), exit_code_for(&e)),
    }
}

fn cmd_zeros(common: &CommonArgs, grid: usize, tol: f64, scales: Option<&str>) -> i32 {
    let (omega, g) = match load_form(common) {
        Ok(v) => v,
        Err((e, code)) => return fail(&e, code),
    };
    let span = 2.0 * omega.domain().r;
    let scales = match scales {
        Some(t) => match parse_floats(t, "scale") {
            Ok(v) => v,
            Err(e) => return fail(&e, 2),
        },
        None => [1.0, 0.5, 0.25, 0.125, 0.0625, 0.025]
            .iter()
            .map(|s| s * span / 4.0)
            .collect(),
    };
    let cloud = match zero_cloud(&omega, &g, grid, tol) {
        Ok(c) => c,
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };
    let reverified = match cloud.reverify(&omega, &g) {
        Ok(v) => v,
        Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
    };
    let dimension = if cloud.is_empty() {
        None
    } else {
        match box_dimension(&cloud, &scales) {
            Ok(rep) => Some(rep),
            Err(e) => return fail(&e.to_string(), exit_code_for(&e)),
        }
    };

    #[derive(Serialize)]
    struct ZerosReport {
        command: &'static str,
        zero_free: bool,
        reverified: bool,
        cloud: exform::zeros::ZeroCloud,
        dimension: Option<exform::zeros::BoxCountReport>,
    }

    let text = match common.format.as_str() {
        "json" => to_json(&ZerosReport {
            command: "zeros",
            zero_free: cloud.is_empty(),
            reverified,
            cloud,
            dimension,
        }),
        "csv" => cloud.to_csv(),
        other => return fail(&format!("unknown format {other:?}"), 2),
    };
    match write_report(common, &text) {
        Ok(()) => {
            if reverified {
                0
            } else {
                1
            }
        }
        Err(e) => fail(&e, 2),
    }
}

fn cmd_jets(common: &CommonArgs, point: Option<&str>, max_order: usize) -> i32 {
    if common.format != "json" {
        return fail("jets only supports --format json", 2);
    }
    let (omega, g) = match load_form(common) {
        Ok(v) => v,
        Err((e, code)) => return fail(&e, code),
    };
    let n = omega.n();
    let point = match point {
        Some(t) => match parse_floats(t, "point coordinate") {
            Ok(p) => p,
            Err(e) => return fail(&e, 2),
        },
        None => vec![0.0; n],
    };

    #[derive(Serialize)]
    struct JetsReport {
        command: &'static str,
        verdict: exform::jet::OrderVerdict,
        table: exform::jet::JetTable,
    }

    match infinite_order_probe(&omega, &g, &point, max_order) {
        Ok((table, verdict)) => {
            let text = to_json(&JetsReport {
                command: "jets",
                verdict,
                table,
            });
            match write_report(common, &text) {
                Ok(()) => 0,
                Err(e) => fail(&e, 2),
            }
        }
        Err(e) => fail(&e.to_string(), exit_code_for(&e)),
    }
}
