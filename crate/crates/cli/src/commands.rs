//! One function per subcommand. Each returns the rendered artifact and
//! whether any stability verdict came out uncertified.

use std::fmt::Write as _;

use clap::ValueEnum;
use cstab_core::charpoly::{analyze_stability, Verdict};
use cstab_core::conditioning::condition_report;
use cstab_core::constantcase::{stability_certificate, ConstantCertificate, ConstantProblem};
use cstab_core::discretization::{
    build_stencil, GridSpec, ProblemSpec, StencilCoefficients, Theta,
};
use cstab_core::expr::Expr;
use cstab_core::tables::{condition_table, norm_table, root_table, ConditionRow, NormRow, RootRow};
use cstab_core::timestepper::{assemble_matrices, march, observed_orders};
use serde::Serialize;

use crate::error::CliError;
use crate::options::{Format, Options};
use crate::render::{optional, scientific, Table};

pub struct Artifact {
    pub body: String,
    pub certified: bool,
}

impl Artifact {
    fn plain(body: String) -> Artifact {
        Artifact {
            body,
            certified: true,
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot encode JSON: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn stencil_with_warning(
    spec: &ProblemSpec,
    grid: &GridSpec,
) -> Result<StencilCoefficients, CliError> {
    let st = build_stencil(spec, grid)?;
    if let Some(warning) = st.dominance_warning() {
        eprintln!("warning: {warning}");
    }
    Ok(st)
}

#[derive(Serialize)]
struct Profile {
    n: usize,
    m: usize,
    theta: Theta,
    level: usize,
    v: f64,
    z: Vec<f64>,
    u: Vec<f64>,
}

pub fn solve(
    options: &Options,
    level: Option<usize>,
    format: Format,
) -> Result<Artifact, CliError> {
    let mut spec = options.problem()?;
    let theta = options.theta_or(Theta::BackwardEuler);
    let grid = options.grid(&mut spec, theta, true)?;
    let level = level.unwrap_or(grid.m);
    if level > grid.m {
        return Err(CliError::Config(format!(
            "--level {level} exceeds M = {}",
            grid.m
        )));
    }
    spec.validate()?;
    stencil_with_warning(&spec, &grid)?;
    let mut interior = Vec::new();
    march(&spec, &grid, |m, u| {
        if m == level {
            interior = u.to_vec();
        }
    })?;
    let v = grid.time(level);
    let mut u = vec![spec.h1.eval(v).map_err(cstab_core::Error::from)?];
    u.extend(interior);
    u.push(spec.h2.eval(v).map_err(cstab_core::Error::from)?);
    let z: Vec<f64> = (0..=grid.n).map(|i| grid.node(i)).collect();
    let body = match format {
        Format::Json => json(&Profile {
            n: grid.n,
            m: grid.m,
            theta,
            level,
            v,
            z,
            u,
        })?,
        _ => {
            let mut table = Table::new(&["z", "u"]);
            for (z, u) in z.iter().zip(&u) {
                table.push(vec![z.to_string(), u.to_string()]);
            }
            table.render(format)
        }
    };
    Ok(Artifact::plain(body))
}

pub fn stability(options: &Options, oracle: bool, format: Format) -> Result<Artifact, CliError> {
    let mut spec = options.problem()?;
    let theta = options.theta_or(Theta::BackwardEuler);
    let grid = options.grid(&mut spec, theta, false)?;
    let st = stencil_with_warning(&spec, &grid)?;
    let report = analyze_stability(&st, theta, oracle)?;
    let certified = report.verdict == Verdict::Stable;
    let body = match format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut table = Table::new(&["k", "re", "im", "amplification_modulus"]);
            for (k, (root, modulus)) in report
                .roots
                .iter()
                .zip(&report.amplification_moduli)
                .enumerate()
            {
                table.push(vec![
                    (k + 1).to_string(),
                    root.re.to_string(),
                    root.im.to_string(),
                    modulus.to_string(),
                ]);
            }
            eprintln!("verdict: {}", report.verdict);
            table.render(format)
        }
        Format::Text => {
            let mut out = format!(
                "N = {}, delta_v = {}, theta = {} ({})\n",
                grid.n,
                grid.delta_v,
                theta.value(),
                theta.name()
            );
            let mut table = Table::new(&["k", "re", "im", "|amplification|"]);
            for (k, (root, modulus)) in report
                .roots
                .iter()
                .zip(&report.amplification_moduli)
                .enumerate()
            {
                table.push(vec![
                    (k + 1).to_string(),
                    format!("{:.4}", root.re),
                    format!("{:.4}", root.im),
                    format!("{modulus:.6}"),
                ]);
            }
            out.push_str(&table.render(format));
            let _ = writeln!(out, "min real part: {:.4}", report.min_real_part);
            let _ = writeln!(out, "spectral radius: {:.6}", report.spectral_radius);
            if report.degree_deficiency > 0 {
                let _ = writeln!(out, "degree deficiency: {}", report.degree_deficiency);
            }
            if oracle {
                let _ = writeln!(
                    out,
                    "roots without a matching eigenvalue: {}",
                    report.unmatched_roots.len()
                );
            }
            let _ = writeln!(out, "verdict: {}", report.verdict);
            out
        }
    };
    Ok(Artifact { body, certified })
}

pub fn condition(options: &Options, format: Format) -> Result<Artifact, CliError> {
    let mut spec = options.problem()?;
    let theta = options.theta_or(Theta::BackwardEuler);
    let grid = options.grid(&mut spec, theta, false)?;
    let st = stencil_with_warning(&spec, &grid)?;
    let sm = assemble_matrices(&st, theta)?;
    let row = ConditionRow {
        n: grid.n,
        m: grid.m,
        report: condition_report(&sm.x, &sm.y, theta)?,
    };
    let body = match format {
        Format::Json => json(&row)?,
        _ => condition_rows(&[row], format),
    };
    Ok(Artifact::plain(body))
}

fn condition_rows(rows: &[ConditionRow], format: Format) -> String {
    let show = |x: f64| {
        if format == Format::Text {
            format!("{x:.6e}")
        } else {
            x.to_string()
        }
    };
    let mut table = Table::new(&[
        "N",
        "M",
        "theta",
        "xinv_bound",
        "xinv_exact",
        "y_inf",
        "y_one",
        "y2_bound",
        "y2_exact",
        "kappa_bound",
        "kappa_exact",
    ]);
    for row in rows {
        let r = &row.report;
        table.push(vec![
            row.n.to_string(),
            row.m.to_string(),
            r.theta.value().to_string(),
            optional(r.norm.xinv_bound, show),
            show(r.norm.xinv_exact),
            show(r.norm.y_inf),
            show(r.norm.y_one),
            show(r.norm.y2_bound),
            show(r.norm.y2_exact),
            optional(r.kappa_bound, show),
            show(r.kappa_exact),
        ]);
    }
    table.render(format)
}

fn root_rows(rows: &[RootRow], format: Format) -> String {
    let mut table = Table::new(&["N", "k", "re", "im", "expression"]);
    for row in rows {
        for (k, root) in row.roots.iter().enumerate() {
            table.push(vec![
                row.n.to_string(),
                (k + 1).to_string(),
                format!("{:.4}", root.re),
                format!("{:.4}", root.im),
                row.expression.clone(),
            ]);
        }
    }
    table.render(format)
}

fn xinv_rows(rows: &[NormRow], format: Format) -> String {
    let mut table = Table::new(&["N", "M", "xinv_bound", "xinv_exact"]);
    for row in rows {
        table.push(vec![
            row.n.to_string(),
            row.m.to_string(),
            optional(row.report.xinv_bound, |x| scientific(x, format)),
            scientific(row.report.xinv_exact, format),
        ]);
    }
    table.render(format)
}

fn y_rows(rows: &[NormRow], format: Format) -> String {
    let mut table = Table::new(&["N", "y_inf", "y_one", "y2_bound", "y2_exact"]);
    for row in rows {
        let r = &row.report;
        table.push(vec![
            row.n.to_string(),
            format!("{:.2}", r.y_inf),
            format!("{:.2}", r.y_one),
            format!("{:.2}", r.y2_bound),
            format!("{:.2}", r.y2_exact),
        ]);
    }
    table.render(format)
}

fn kappa_rows(rows: &[ConditionRow], format: Format) -> String {
    let mut table = Table::new(&["N", "M", "kappa_bound", "kappa_exact"]);
    for row in rows {
        table.push(vec![
            row.n.to_string(),
            row.m.to_string(),
            optional(row.report.kappa_bound, |x| format!("{x:.2}")),
            format!("{:.2}", row.report.kappa_exact),
        ]);
    }
    table.render(format)
}

#[derive(Serialize, Default)]
struct Tables {
    #[serde(skip_serializing_if = "Option::is_none")]
    table1: Option<Vec<RootRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table2: Option<Vec<NormRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table3: Option<Vec<NormRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    table4: Option<Vec<ConditionRow>>,
}

/// The demonstration tables. They always use their own parameter sets; only
/// `--theta` (table 4) and the output flags are honored.
pub fn tables(options: &Options, format: Format) -> Result<Artifact, CliError> {
    let selected: Vec<u8> = match options.table {
        Some(t) => vec![t],
        None if format == Format::Csv => {
            return Err(CliError::Config(
                "CSV output needs a single --table (1 to 4)".into(),
            ))
        }
        None => vec![1, 2, 3, 4],
    };
    let mut out = Tables::default();
    let norms = if selected.iter().any(|t| *t == 2 || *t == 3) {
        Some(norm_table()?)
    } else {
        None
    };
    for t in &selected {
        match t {
            1 => out.table1 = Some(root_table()?),
            2 => out.table2 = norms.clone(),
            3 => out.table3 = norms.clone(),
            _ => out.table4 = Some(condition_table(options.theta_or(Theta::BackwardEuler))?),
        }
    }
    let body = match format {
        Format::Json => json(&out)?,
        _ => {
            let mut parts = Vec::new();
            let titled = |t: u8, body: String| {
                if format == Format::Text && selected.len() > 1 {
                    format!("table {t}\n{body}")
                } else {
                    body
                }
            };
            if let Some(rows) = &out.table1 {
                parts.push(titled(1, root_rows(rows, format)));
            }
            if let Some(rows) = &out.table2 {
                parts.push(titled(2, xinv_rows(rows, format)));
            }
            if let Some(rows) = &out.table3 {
                parts.push(titled(3, y_rows(rows, format)));
            }
            if let Some(rows) = &out.table4 {
                parts.push(titled(4, kappa_rows(rows, format)));
            }
            parts.join("\n")
        }
    };
    Ok(Artifact::plain(body))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ladder {
    /// Halve δz with δv / δz² held fixed
    Space,
    /// Halve δv at fixed N
    Time,
}

pub struct ConvergenceArgs {
    pub ladder: Ladder,
    pub exact_expr: Option<String>,
    pub rungs: usize,
    pub mesh_ratio: f64,
}

#[derive(Serialize)]
struct Rung {
    n: usize,
    m: usize,
    delta_z: f64,
    delta_v: f64,
    error: f64,
    order: Option<f64>,
}

/// Built-in manufactured problems: `exp(1.3 z + 0.39 v)` with `a = b = 1`
/// for the space ladder and `(z + 1) e^{-v}` with `a = z + 1`,
/// `b = (z + 1)^2` for the time ladder.
fn builtin(ladder: Ladder, t_final: f64) -> (ProblemSpec, Expr) {
    let parse = |s: &str| Expr::parse(s).expect("valid literal");
    let (a, b, k, h1, h2, exact) = match ladder {
        Ladder::Space => (
            "1".to_string(),
            "1".to_string(),
            "exp(1.3*z)",
            "exp(0.39*v)",
            "exp(1.3 + 0.39*v)",
            format!("exp(1.3*z + {})", 0.39 * t_final),
        ),
        Ladder::Time => (
            "z+1".to_string(),
            "(z+1)^2".to_string(),
            "z+1",
            "exp(-v)",
            "2*exp(-v)",
            format!("(z+1)*{}", (-t_final).exp()),
        ),
    };
    let mut spec = ProblemSpec::homogeneous(parse(&a), parse(&b), 0.0, 1.0, t_final);
    spec.k = parse(k);
    spec.h1 = parse(h1);
    spec.h2 = parse(h2);
    (spec, parse(&exact))
}

pub fn convergence(
    options: &Options,
    args: &ConvergenceArgs,
    format: Format,
) -> Result<Artifact, CliError> {
    if args.rungs < 2 {
        return Err(CliError::Config("--rungs must be at least 2".into()));
    }
    let theta = options.theta_or(match args.ladder {
        Ladder::Space => Theta::CrankNicolson,
        Ladder::Time => Theta::BackwardEuler,
    });
    let (spec, exact) = match &args.exact_expr {
        Some(text) => {
            let mut spec = options.problem()?;
            spec.t_final = options.t_final.unwrap_or(1.0);
            let exact =
                Expr::parse(text).map_err(|e| CliError::Config(format!("--exact-expr: {e}")))?;
            (spec, exact)
        }
        None => builtin(
            args.ladder,
            options.t_final.unwrap_or(match args.ladder {
                Ladder::Space => 0.25,
                Ladder::Time => 1.0,
            }),
        ),
    };
    let length = spec.z_r - spec.z_l;
    let mut rungs = Vec::with_capacity(args.rungs);
    for j in 0..args.rungs {
        let scale = 1usize << j;
        let (n, m) = match args.ladder {
            Ladder::Space => {
                let n = options.n.unwrap_or(8) * scale;
                let delta_z = length / n as f64;
                let m = (spec.t_final / (args.mesh_ratio * delta_z * delta_z))
                    .round()
                    .max(1.0) as usize;
                (n, m)
            }
            Ladder::Time => (options.n.unwrap_or(64), options.m.unwrap_or(10) * scale),
        };
        let grid = GridSpec::for_problem(&spec, n, m, theta)?;
        let u = march(&spec, &grid, |_, _| {})?;
        let exact_values = (1..n)
            .map(|i| exact.eval(grid.node(i)))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(cstab_core::Error::from)?;
        let error = u
            .iter()
            .zip(&exact_values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        rungs.push(Rung {
            n,
            m,
            delta_z: grid.delta_z,
            delta_v: grid.delta_v,
            error,
            order: None,
        });
    }
    let errors: Vec<f64> = rungs.iter().map(|r| r.error).collect();
    for (rung, order) in rungs.iter_mut().skip(1).zip(observed_orders(&errors)) {
        rung.order = Some(order);
    }
    let body = match format {
        Format::Json => json(&rungs)?,
        _ => {
            let mut table = Table::new(&["N", "M", "delta_z", "delta_v", "error", "order"]);
            for r in &rungs {
                let (error, order) = match format {
                    Format::Text => (
                        format!("{:.4e}", r.error),
                        r.order.map(|o| format!("{o:.3}")),
                    ),
                    _ => (r.error.to_string(), r.order.map(|o| o.to_string())),
                };
                table.push(vec![
                    r.n.to_string(),
                    r.m.to_string(),
                    r.delta_z.to_string(),
                    r.delta_v.to_string(),
                    error,
                    order.unwrap_or_default(),
                ]);
            }
            table.render(format)
        }
    };
    Ok(Artifact::plain(body))
}

pub struct SweepArgs {
    pub c_values: Vec<f64>,
    pub d_values: Vec<f64>,
    pub n_values: Vec<usize>,
}

pub fn constant_check(args: &SweepArgs, format: Format) -> Result<Artifact, CliError> {
    let mut cells = Vec::new();
    let mut certificates: Vec<ConstantCertificate> = Vec::new();
    for &c in &args.c_values {
        for &d in &args.d_values {
            for &n in &args.n_values {
                let cp = ConstantProblem::with_mesh_ratio(c, n, d)?;
                cells.push((c, d, n));
                certificates.push(stability_certificate(&cp)?);
            }
        }
    }
    let certified = certificates.iter().all(|c| c.certified);
    let body = match format {
        Format::Json => json(&certificates)?,
        _ => {
            let text = format == Format::Text;
            let show = |x: f64| {
                if text {
                    format!("{x:.6}")
                } else {
                    x.to_string()
                }
            };
            let mut table = Table::new(&[
                "c",
                "d",
                "N",
                "certified",
                "min_re",
                "radius_be",
                "radius_cn",
                "failed_k",
                "charpoly_mismatch",
            ]);
            for ((c, d, n), cert) in cells.iter().zip(&certificates) {
                table.push(vec![
                    c.to_string(),
                    d.to_string(),
                    n.to_string(),
                    cert.certified.to_string(),
                    show(cert.backward_euler.min_real_part),
                    show(cert.backward_euler.spectral_radius),
                    show(cert.crank_nicolson.spectral_radius),
                    cert.failed_k.map(|k| k.to_string()).unwrap_or_default(),
                    cert.charpoly_mismatch
                        .map(|x| format!("{x:.1e}"))
                        .unwrap_or_default(),
                ]);
            }
            table.render(format)
        }
    };
    Ok(Artifact { body, certified })
}
