//! Command-line driver. Every subcommand emits one table whose rows start
//! with `subcommand,model_hash,seed,schedule`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::definetti;
use crate::error::{Error, Result};
use crate::fock::{dimension_cap, set_dimension_cap};
use crate::gibbs;
use crate::hartree::{self, HartreeOptions};
use crate::localize::{self, LocalizingOperator};
use crate::model::{load_model, ModelSpec};
use crate::output::{Cell, Table};
use crate::spectra::{self, Solver};
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "bmfl", about = "Mean-field limits of lattice boson models", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest symmetric-space dimension; BMFL_DIM_CAP also sets it.
    #[arg(long, global = true)]
    pub dim_cap: Option<usize>,
    /// Iteration budget of the Hartree descent.
    #[arg(long, global = true, default_value_t = 50_000)]
    pub max_iterations: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ground energy E(N). Columns: n, energy, energy_per_particle, residual, spectral_gap.
    Ground {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SolverArg::Auto)]
        solver: SolverArg,
    },
    /// E(N)/N against the Hartree energy with condensate overlaps. Columns:
    /// n, energy, energy_per_particle, hartree_energy, gap, k, overlap, mixture_fidelity,
    /// orbit_size, symmetry_expectation, residual.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        n_schedule: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
    /// Hartree minimum on the mass shell. Columns: mass, energy, gradient_norm, iterations,
    /// converged, best_start, mode, re, im.
    Hartree {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Binding curve. Columns: lambda, trapped, free, margin, strict_binding, free_sign_condition.
    Curve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
    },
    /// Localization of the ground state onto a set of sites (0-based). Columns:
    /// k, mass, statistic, duality_defect.
    Localize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        sites: Vec<usize>,
        /// lambda, lambda2 or indicator:a,b
        #[arg(long, default_value = "lambda")]
        f: String,
    },
    /// Hierarchy of an atomic measure. Columns: k, trace, sphere_supported, match_n,
    /// match_defect, consistency_gap.
    Definetti {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        match_n: Option<usize>,
    },
    /// Free energies. Columns: n, beta, free_energy, ground_energy, per_particle, hartree_energy,
    /// gap, variational.
    Gibbs {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_delimiter = ',')]
        n_schedule: Vec<usize>,
    },
    /// Scaled-interaction energies b_k(λ) for k = 2..=K. Columns: k, lambda, b_k, precondition,
    /// lipschitz_constant, uniform_limit_defect.
    Byk {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        lambda_grid: usize,
    },
    /// Identity suite on random states; prints PASS/FAIL per identity. Columns:
    /// check, value, tolerance, pass.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::NoConvergence(_) => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn model_hash(model: &ModelSpec) -> String {
    format!("{:016x}", model.fingerprint())
}

fn join(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn check_schedule(name: &str, values: &[usize]) -> Result<()> {
    if values.is_empty() || values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, "must be non-empty and strictly increasing"));
    }
    Ok(())
}

fn parse_statistic(spec: &str) -> Result<Box<dyn Fn(f64) -> f64>> {
    match spec {
        "lambda" => Ok(Box::new(|x| x)),
        "lambda2" => Ok(Box::new(|x| x * x)),
        other => {
            let range = other
                .strip_prefix("indicator:")
                .ok_or_else(|| Error::invalid("--f", format!("unknown statistic {other:?}")))?;
            let (a, b) = range
                .split_once(',')
                .ok_or_else(|| Error::invalid("--f", "indicator needs a,b"))?;
            let a: f64 = a.trim().parse().map_err(|_| Error::invalid("--f", "bad lower bound"))?;
            let b: f64 = b.trim().parse().map_err(|_| Error::invalid("--f", "bad upper bound"))?;
            Ok(Box::new(move |x| if x >= a && x <= b { 1.0 } else { 0.0 }))
        }
    }
}

struct Prefix {
    subcommand: &'static str,
    hash: String,
    seed: u64,
    schedule: String,
}

impl Prefix {
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.subcommand.into(),
            self.hash.clone().into(),
            Cell::Int(self.seed as i64),
            self.schedule.clone().into(),
        ]
    }
}

fn table(columns: &[&str]) -> Table {
    let mut header = vec!["subcommand", "model_hash", "seed", "schedule"];
    header.extend_from_slice(columns);
    Table::new(&header)
}

fn row(prefix: &Prefix, cells: Vec<Cell>) -> Vec<Cell> {
    let mut r = prefix.cells();
    r.extend(cells);
    r
}

fn hartree_options(common: &Common, restarts: usize) -> HartreeOptions {
    HartreeOptions {
        restarts,
        max_iterations: common.max_iterations,
        seed: common.seed,
        ..HartreeOptions::default()
    }
}

/// Executes a parsed command; returns the table and any lines meant for the
/// terminal (verify's PASS/FAIL report).
pub fn execute(command: &Command, common: &Common) -> Result<(Table, Vec<String>, bool)> {
    let seed = common.seed;
    let mut notes = Vec::new();
    let mut ok = true;
    let table = match command {
        Command::Ground { model, n, solver } => {
            let m = load_model(model)?;
            let solver = match solver {
                SolverArg::Auto => Solver::Auto,
                SolverArg::Dense => Solver::Dense,
                SolverArg::Lanczos => Solver::Lanczos,
            };
            let g = spectra::ground_energy_with(&m, *n, solver)?;
            let p = Prefix {
                subcommand: "ground",
                hash: model_hash(&m),
                seed,
                schedule: format!("n={n}"),
            };
            let mut t = table(&["n", "energy", "energy_per_particle", "residual", "spectral_gap"]);
            t.push(row(
                &p,
                vec![
                    (*n).into(),
                    g.energy.into(),
                    (g.energy / *n as f64).into(),
                    g.residual.into(),
                    g.spectral_gap().into(),
                ],
            ));
            t
        }
        Command::Sweep {
            model,
            n_schedule,
            k,
            restarts,
        } => {
            check_schedule("--n-schedule", n_schedule)?;
            let m = load_model(model)?;
            let s = spectra::mean_field_sweep(&m, n_schedule, k, &hartree_options(common, *restarts))?;
            ok = s.monotone(1e-9);
            let p = Prefix {
                subcommand: "sweep",
                hash: model_hash(&m),
                seed,
                schedule: format!("n={}", join(n_schedule)),
            };
            let mut t = table(&[
                "n",
                "energy",
                "energy_per_particle",
                "hartree_energy",
                "gap",
                "k",
                "overlap",
                "mixture_fidelity",
                "orbit_size",
                "symmetry_expectation",
                "residual",
            ]);
            for r in &s.records {
                for o in &r.overlaps {
                    t.push(row(
                        &p,
                        vec![
                            r.particles.into(),
                            r.energy.into(),
                            r.energy_per_particle.into(),
                            s.hartree_energy.into(),
                            r.gap.into(),
                            o.k.into(),
                            o.pure.into(),
                            o.mixture.into(),
                            o.orbit_size.into(),
                            r.symmetry_expectation.into(),
                            r.residual.into(),
                        ],
                    ));
                }
            }
            t
        }
        Command::Hartree {
            model,
            mass,
            restarts,
            tolerance,
        } => {
            let m = load_model(model)?;
            let options = HartreeOptions {
                tolerance: *tolerance,
                ..hartree_options(common, *restarts)
            };
            let r = hartree::minimize(&m, *mass, &options)?;
            if !r.converged {
                return Err(Error::NoConvergence(format!(
                    "tangent gradient {:.3e} above tolerance {:.1e} after {} iterations",
                    r.gradient_norm, tolerance, r.iterations
                )));
            }
            let p = Prefix {
                subcommand: "hartree",
                hash: model_hash(&m),
                seed,
                schedule: format!("mass={}", crate::output::format_g17(*mass)),
            };
            let mut t = table(&[
                "mass",
                "energy",
                "gradient_norm",
                "iterations",
                "converged",
                "best_start",
                "mode",
                "re",
                "im",
            ]);
            for (j, c) in r.minimizer.0.iter().enumerate() {
                t.push(row(
                    &p,
                    vec![
                        r.mass.into(),
                        r.energy.into(),
                        r.gradient_norm.into(),
                        r.iterations.into(),
                        r.converged.into(),
                        r.best_start.into(),
                        j.into(),
                        c.re.into(),
                        c.im.into(),
                    ],
                ));
            }
            t
        }
        Command::Curve { model, grid, restarts } => {
            let m = load_model(model)?;
            let c = hartree::energy_curve(&m, *grid, &hartree_options(common, *restarts))?;
            ok = c.inequality_holds(1e-9);
            let p = Prefix {
                subcommand: "curve",
                hash: model_hash(&m),
                seed,
                schedule: format!("grid={grid}"),
            };
            let mut t = table(&[
                "lambda",
                "trapped",
                "free",
                "margin",
                "strict_binding",
                "free_sign_condition",
            ]);
            for i in 0..c.lambdas.len() {
                t.push(row(
                    &p,
                    vec![
                        c.lambdas[i].into(),
                        c.trapped[i].into(),
                        c.free[i].into(),
                        c.margins[i].into(),
                        c.strict_binding.into(),
                        c.free_sign_condition.into(),
                    ],
                ));
            }
            t
        }
        Command::Localize { model, n, sites, f } => {
            let m = load_model(model)?;
            let statistic = parse_statistic(f)?;
            let g = spectra::ground_energy(&m, *n)?;
            let a = LocalizingOperator::site_projector(m.modes(), sites)?;
            let masses = localize::localized_masses(&g.state, &a)?;
            let value = localize::mass_statistic(&g.state, &a, &statistic)?;
            let duality = localize::duality_defect(&g.state, &a)?;
            let p = Prefix {
                subcommand: "localize",
                hash: model_hash(&m),
                seed,
                schedule: format!("n={n};sites={}", join(sites)),
            };
            let mut t = table(&["k", "mass", "statistic", "duality_defect"]);
            for (k, mass) in masses.iter().enumerate() {
                t.push(row(&p, vec![k.into(), (*mass).into(), value.into(), duality.into()]));
            }
            t
        }
        Command::Definetti { measure, k, match_n } => {
            let bytes = std::fs::read(measure)?;
            let mu = definetti::DeFinettiMeasure::from_json_str(&String::from_utf8_lossy(&bytes))?;
            let hash = format!(
                "{:016x}",
                u64::from_le_bytes(Sha256::digest(&bytes)[..8].try_into().expect("8 bytes"))
            );
            let p = Prefix {
                subcommand: "definetti",
                hash,
                seed,
                schedule: format!("k={k}"),
            };
            let mut t = table(&[
                "k",
                "trace",
                "sphere_supported",
                "match_n",
                "match_defect",
                "consistency_gap",
            ]);
            for order in 0..=*k {
                let h = definetti::hierarchy(&mu, order)?;
                let (mn, md): (Cell, Cell) = match match_n {
                    Some(n) if mu.is_sphere_supported() && order <= *n => {
                        ((*n).into(), definetti::finite_n_match(&mu, *n, order)?.into())
                    }
                    _ => (Cell::Text(String::new()), Cell::Text(String::new())),
                };
                let gap = definetti::consistency_gap(&mu, order, 1)?.trace();
                t.push(row(
                    &p,
                    vec![
                        order.into(),
                        h.trace().into(),
                        mu.is_sphere_supported().into(),
                        mn,
                        md,
                        gap.into(),
                    ],
                ));
            }
            t
        }
        Command::Gibbs {
            model,
            beta,
            n_schedule,
        } => {
            check_schedule("--n-schedule", n_schedule)?;
            let m = load_model(model)?;
            let s = gibbs::finite_temperature_sweep(&m, n_schedule, *beta, &hartree_options(common, 16))?;
            ok = s.variational(1e-9);
            let p = Prefix {
                subcommand: "gibbs",
                hash: model_hash(&m),
                seed,
                schedule: format!("n={};beta={}", join(n_schedule), crate::output::format_g17(*beta)),
            };
            let mut t = table(&[
                "n",
                "beta",
                "free_energy",
                "ground_energy",
                "per_particle",
                "hartree_energy",
                "gap",
                "variational",
            ]);
            for r in &s.records {
                t.push(row(
                    &p,
                    vec![
                        r.particles.into(),
                        (*beta).into(),
                        r.free_energy.into(),
                        r.ground_energy.into(),
                        r.per_particle.into(),
                        s.hartree_energy.into(),
                        r.gap.into(),
                        (r.free_energy <= r.ground_energy + 1e-9).into(),
                    ],
                ));
            }
            t
        }
        Command::Byk { model, k, lambda_grid } => {
            if *k < 2 {
                return Err(Error::invalid("--k", "need K ≥ 2"));
            }
            let m = load_model(model)?;
            let ks: Vec<usize> = (2..=*k).collect();
            let r = spectra::byk_analysis(&m, &ks, *lambda_grid, &hartree_options(common, 16))?;
            ok = r.monotone && r.lipschitz_holds;
            let p = Prefix {
                subcommand: "byk",
                hash: model_hash(&m),
                seed,
                schedule: format!("k=2..{k};grid={lambda_grid}"),
            };
            let mut t = table(&[
                "k",
                "lambda",
                "b_k",
                "precondition",
                "lipschitz_constant",
                "uniform_limit_defect",
            ]);
            for row_ in &r.rows {
                let ul = r.uniform_limit.iter().find(|u| u.0 == row_.k).map(|u| u.2);
                t.push(row(
                    &p,
                    vec![
                        row_.k.into(),
                        row_.lambda.into(),
                        row_.value.into(),
                        row_.precondition.into(),
                        r.lipschitz_constant.into(),
                        ul.into(),
                    ],
                ));
            }
            t
        }
        Command::Verify { model, n, samples } => {
            let m = load_model(model)?;
            let checks = verify::identity_suite(&m, *n, seed, *samples)?;
            let p = Prefix {
                subcommand: "verify",
                hash: model_hash(&m),
                seed,
                schedule: format!("n={n}"),
            };
            let mut t = table(&["check", "value", "tolerance", "pass"]);
            for c in &checks {
                notes.push(format!(
                    "{} {} value={} tolerance={}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    crate::output::format_g17(c.value),
                    crate::output::format_g17(c.tolerance)
                ));
                ok &= c.pass;
                t.push(row(
                    &p,
                    vec![c.name.into(), c.value.into(), c.tolerance.into(), c.pass.into()],
                ));
            }
            t
        }
    };
    Ok((table, notes, ok))
}

fn emit(table: &Table, common: &Common, out: &mut dyn Write) -> Result<()> {
    match &common.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_table(table, common.format, &mut w)?;
            w.flush()?;
        }
        None => write_table(table, common.format, out)?,
    }
    Ok(())
}

fn write_table(table: &Table, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
    let mut out = out;
    match format {
        Format::Csv => table.write_csv(&mut out),
        Format::Json => table.write_json(&mut out),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let previous_cap = dimension_cap();
    if let Ok(value) = std::env::var("BMFL_DIM_CAP") {
        match value.parse::<usize>() {
            Ok(cap) if cap > 0 => set_dimension_cap(cap),
            _ => {
                let _ = writeln!(
                    err,
                    "error: invalid input at BMFL_DIM_CAP: expected a positive integer, got {value:?}"
                );
                return EXIT_VALIDATION;
            }
        }
    }
    if let Some(cap) = cli.common.dim_cap {
        if cap == 0 {
            let _ = writeln!(err, "error: invalid input at --dim-cap: must be positive");
            return EXIT_VALIDATION;
        }
        set_dimension_cap(cap);
    }
    let result = execute(&cli.command, &cli.common).and_then(|(table, notes, ok)| {
        for line in &notes {
            writeln!(out, "{line}")?;
        }
        if matches!(cli.command, Command::Verify { .. }) && cli.common.output.is_none() {
            return Ok(ok);
        }
        emit(&table, &cli.common, out)?;
        Ok(ok)
    });
    set_dimension_cap(previous_cap);
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(err, "error: an invariant check failed; see the output table");
            EXIT_NUMERICAL
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
