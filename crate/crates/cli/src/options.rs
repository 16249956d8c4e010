//! Shared problem and grid flags, the key=value config file and the rules
//! that turn them into a problem and a grid.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use cstab_core::discretization::{GridSpec, ProblemSpec, Theta, DEFAULT_EPSILON};
use cstab_core::expr::Expr;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Convection coefficient a(z)
    #[arg(long = "a-expr", global = true, allow_hyphen_values = true)]
    pub a_expr: Option<String>,
    /// Diffusion coefficient b(z), positive on the domain
    #[arg(long = "b-expr", global = true, allow_hyphen_values = true)]
    pub b_expr: Option<String>,
    /// Initial datum k(z)
    #[arg(long = "k-expr", global = true, allow_hyphen_values = true)]
    pub k_expr: Option<String>,
    /// Left boundary datum h1(v)
    #[arg(long = "h1-expr", global = true, allow_hyphen_values = true)]
    pub h1_expr: Option<String>,
    /// Right boundary datum h2(v)
    #[arg(long = "h2-expr", global = true, allow_hyphen_values = true)]
    pub h2_expr: Option<String>,
    #[arg(long = "zl", global = true, allow_negative_numbers = true)]
    pub z_l: Option<f64>,
    #[arg(long = "zr", global = true, allow_negative_numbers = true)]
    pub z_r: Option<f64>,
    /// Time horizon
    #[arg(long = "T", global = true)]
    pub t_final: Option<f64>,
    /// Number of space intervals
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Number of time steps
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    /// Time step; with --M and --T all three must agree
    #[arg(long = "dv", global = true)]
    pub delta_v: Option<f64>,
    /// 1 (backward Euler) or 0.5 (Crank-Nicolson)
    #[arg(long = "theta", global = true, value_parser = parse_theta)]
    pub theta: Option<Theta>,
    /// Table to reproduce, 1 to 4
    #[arg(long = "table", global = true, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub table: Option<u8>,
    /// Write the result here instead of standard output
    #[arg(long = "output", global = true)]
    pub output: Option<PathBuf>,
    #[arg(long = "format", global = true, value_enum)]
    pub format: Option<Format>,
    /// File of key=value lines using the flag names; flags take precedence
    #[arg(long = "config", global = true)]
    pub config: Option<PathBuf>,
}

pub fn parse_theta(text: &str) -> Result<Theta, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "1" | "1.0" | "be" | "backward-euler" => Ok(Theta::BackwardEuler),
        "0.5" | ".5" | "1/2" | "cn" | "crank-nicolson" => Ok(Theta::CrankNicolson),
        other => Err(format!(
            "theta must be 1 (backward Euler) or 0.5 (Crank-Nicolson), got {other}"
        )),
    }
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct ConfigFile {
    #[command(flatten)]
    options: Options,
}

impl Options {
    /// Fills unset flags from the config file, if one was named.
    pub fn with_config(self) -> Result<Options, CliError> {
        match &self.config {
            Some(path) => {
                let file = read_config(path)?;
                Ok(self.or(file))
            }
            None => Ok(self),
        }
    }

    fn or(self, other: Options) -> Options {
        Options {
            a_expr: self.a_expr.or(other.a_expr),
            b_expr: self.b_expr.or(other.b_expr),
            k_expr: self.k_expr.or(other.k_expr),
            h1_expr: self.h1_expr.or(other.h1_expr),
            h2_expr: self.h2_expr.or(other.h2_expr),
            z_l: self.z_l.or(other.z_l),
            z_r: self.z_r.or(other.z_r),
            t_final: self.t_final.or(other.t_final),
            n: self.n.or(other.n),
            m: self.m.or(other.m),
            delta_v: self.delta_v.or(other.delta_v),
            theta: self.theta.or(other.theta),
            table: self.table.or(other.table),
            output: self.output.or(other.output),
            format: self.format.or(other.format),
            config: self.config,
        }
    }

    pub fn theta_or(&self, default: Theta) -> Theta {
        self.theta.unwrap_or(default)
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n
            .ok_or_else(|| CliError::Config("missing --N (number of space intervals)".into()))
    }

    /// The problem from the expression flags; unset coefficients default to
    /// `a = z + 1`, `b = (z + 1)^2` on `[0, 1]` and unset data to zero.
    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let expr = |flag: &str, value: &Option<String>, default: &str| {
            Expr::parse(value.as_deref().unwrap_or(default))
                .map_err(|e| CliError::Config(format!("--{flag}: {e}")))
        };
        Ok(ProblemSpec {
            a: expr("a-expr", &self.a_expr, "z+1")?,
            b: expr("b-expr", &self.b_expr, "(z+1)^2")?,
            k: expr("k-expr", &self.k_expr, "0")?,
            h1: expr("h1-expr", &self.h1_expr, "0")?,
            h2: expr("h2-expr", &self.h2_expr, "0")?,
            z_l: self.z_l.unwrap_or(0.0),
            z_r: self.z_r.unwrap_or(1.0),
            t_final: self.t_final.unwrap_or(1.0),
            epsilon: DEFAULT_EPSILON,
            derivatives: None,
        })
    }

    /// Time step and step count from `--dv`, `--M` and `--T`. When `steps`
    /// is false only the time step matters and `M` may stay unknown.
    pub fn time_grid(&self, steps: bool) -> Result<(f64, usize, f64), CliError> {
        let inconsistent = |dv: f64, m: usize, t: f64| {
            CliError::Config(format!(
                "--dv {dv} is inconsistent with --M {m} and --T {t} (T/M = {})",
                t / m as f64
            ))
        };
        let agree = |dv: f64, m: usize, t: f64| (dv * m as f64 - t).abs() <= 1e-9 * t;
        match (self.delta_v, self.m, self.t_final) {
            (Some(dv), Some(m), Some(t)) => {
                if agree(dv, m, t) {
                    Ok((t / m as f64, m, t))
                } else {
                    Err(inconsistent(dv, m, t))
                }
            }
            (Some(dv), Some(m), None) => Ok((dv, m, dv * m as f64)),
            (Some(dv), None, t) => {
                if !steps {
                    return Ok((dv, 0, t.unwrap_or(dv)));
                }
                let t = t.unwrap_or(1.0);
                let m = (t / dv).round().max(1.0) as usize;
                if agree(dv, m, t) {
                    Ok((t / m as f64, m, t))
                } else {
                    Err(CliError::Config(format!(
                        "--dv {dv} does not divide --T {t}; give --M instead"
                    )))
                }
            }
            (None, Some(m), t) => {
                let t = t.unwrap_or(1.0);
                Ok((t / m as f64, m, t))
            }
            (None, None, _) => Err(CliError::Config(
                "give the time step with --dv, or --M (with --T, default 1)".into(),
            )),
        }
    }

    pub fn grid(
        &self,
        spec: &mut ProblemSpec,
        theta: Theta,
        steps: bool,
    ) -> Result<GridSpec, CliError> {
        let n = self.require_n()?;
        let (dv, m, t) = self.time_grid(steps)?;
        spec.t_final = t;
        Ok(GridSpec::with_delta_v(spec.z_l, spec.z_r, n, dv, m, theta)?)
    }
}

fn read_config(path: &Path) -> Result<Options, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("--config {}: {e}", path.display())))?;
    let mut args = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                number + 1
            ))
        })?;
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            return Err(CliError::Config(format!(
                "{}:{}: config files cannot include other config files",
                path.display(),
                number + 1
            )));
        }
        args.push(format!("--{key}"));
        args.push(value.trim().to_string());
    }
    ConfigFile::try_parse_from(&args)
        .map(|c| c.options)
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.kind_message())))
}

trait KindMessage {
    fn kind_message(&self) -> String;
}

impl KindMessage for clap::Error {
    fn kind_message(&self) -> String {
        let rendered = self.to_string();
        rendered
            .lines()
            .next()
            .unwrap_or_default()
            .trim_start_matches("error: ")
            .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn options() -> Options {
        Options::default()
    }

    #[test]
    fn theta_spellings() {
        assert_eq!(parse_theta("1").unwrap(), Theta::BackwardEuler);
        assert_eq!(parse_theta("1/2").unwrap(), Theta::CrankNicolson);
        assert_eq!(parse_theta("CN").unwrap(), Theta::CrankNicolson);
        assert!(parse_theta("0.7").is_err());
    }

    #[test]
    fn time_step_resolution() {
        let mut o = options();
        o.delta_v = Some(0.1);
        let (dv, m, t) = o.time_grid(true).unwrap();
        assert_eq!((m, t), (10, 1.0));
        assert!((dv - 0.1).abs() < 1e-15);
        o.m = Some(20);
        o.t_final = Some(1.0);
        assert!(matches!(o.time_grid(true), Err(CliError::Config(_))));
        o.m = Some(10);
        assert!(o.time_grid(true).is_ok());
        let mut o = options();
        o.delta_v = Some(0.3);
        assert!(o.time_grid(true).is_err());
        assert_eq!(o.time_grid(false).unwrap().1, 0);
        assert!(options().time_grid(false).is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join(format!("cstab-options-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "# comment\nN = 6\na-expr = 2*z + 1\ndv=0.1\n").unwrap();
        let mut o = options();
        o.n = Some(9);
        o.config = Some(path.clone());
        let merged = o.with_config().unwrap();
        assert_eq!(merged.n, Some(9));
        assert_eq!(merged.a_expr.as_deref(), Some("2*z + 1"));
        assert_eq!(merged.delta_v, Some(0.1));
        std::fs::write(&path, "bogus = 1\n").unwrap();
        let mut o = options();
        o.config = Some(path.clone());
        assert!(matches!(o.with_config(), Err(CliError::Config(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bad_expression_names_the_flag() {
        let mut o = options();
        o.b_expr = Some("z+".into());
        match o.problem() {
            Err(CliError::Config(message)) => assert!(message.starts_with("--b-expr")),
            other => panic!("{other:?}"),
        }
    }
}
