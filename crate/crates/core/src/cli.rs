//! Command-line front end. [`run`] takes the argument list and an output
//! stream so it can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::fit::{fit_pdcg, is_accepted, FitOptions, SampleMoments};
use crate::io::{self, Report, RunManifest};
use crate::lattice::{count_models, hasse_fragment_dot, neighbour_submodels, Layer};
use crate::search::{backward_search, Procedure, SearchConfig};
use crate::sim::{self, BenchOptions, ScenarioSpec};

#[derive(Debug, Parser)]
#[command(name = "pdrcon", version, about = "Structure learning for Gaussian graphical models of paired data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of models on p variables
    Count {
        #[arg(short)]
        p: u32,
    },
    /// Rewrite a model file in another format
    Convert {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Quadruplet)]
        to: Format,
    },
    /// Neighbouring submodels of a model
    Neighbours {
        model: PathBuf,
        #[arg(long, value_enum)]
        layer: Option<LayerArg>,
        /// Write a two-layer Hasse fragment in DOT here
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Fit a model and test it against the saturated model
    Fit {
        model: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, env = "PDRCON_ALPHA", default_value_t = 0.05)]
        alpha: f64,
        /// Write the fit report (JSON) here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select a model by backward elimination
    Select {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = ProcedureArg::Coherent)]
        procedure: ProcedureArg,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long, env = "PDRCON_ALPHA", default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, env = "PDRCON_JOBS")]
        jobs: Option<usize>,
        /// Write the selected model here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the search trace (JSON) here
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the selected coloured graph in DOT here
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Draw Gaussian data from a model, or from a random model of a scenario
    Simulate {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        model: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Replicate of the scenario to reproduce
        #[arg(long, default_value_t = 0, requires = "spec")]
        replicate: usize,
        #[arg(short, long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Data CSV
        #[arg(long)]
        out: PathBuf,
        /// Write the true model here
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the concentration matrix CSV here
        #[arg(long)]
        theta: Option<PathBuf>,
    },
    /// Run the coherent and baseline searches on a simulation scenario
    Bench {
        spec: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ProcedureArg::Coherent, ProcedureArg::Naive])]
        procedures: Vec<ProcedureArg>,
        /// Overrides the scenario seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "PDRCON_ALPHA", default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, env = "PDRCON_JOBS")]
        jobs: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Leave timing columns empty so reruns are byte-identical
        #[arg(long)]
        omit_timing: bool,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Covariance matrix CSV (needs --n)
    #[arg(long, conflicts_with = "data", required_unless_present = "data", requires = "n")]
    pub cov: Option<PathBuf>,
    /// Data CSV, one observation per row
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Sample size behind --cov
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Divide by n-1 rather than n when forming S from --data
    #[arg(long)]
    pub unbiased: bool,
}

impl InputArgs {
    fn load(&self, manifest: &mut RunManifest) -> anyhow::Result<SampleMoments> {
        if let Some(path) = &self.cov {
            manifest.add_input(path)?;
            let n = self.n.context("--cov needs --n")?;
            return Ok(io::moments_from_covariance(path, n)?);
        }
        let path = self.data.as_ref().context("one of --cov or --data is required")?;
        manifest.add_input(path)?;
        Ok(io::moments_from_data(path, self.unbiased)?)
    }

    fn describe(&self) -> serde_json::Value {
        json!({"cov": self.cov, "data": self.data, "n": self.n, "unbiased": self.unbiased})
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Quadruplet,
    Classes,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LayerArg {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    Coherent,
    Naive,
}

impl From<ProcedureArg> for Procedure {
    fn from(p: ProcedureArg) -> Procedure {
        match p {
            ProcedureArg::Coherent => Procedure::Coherent,
            ProcedureArg::Naive => Procedure::Naive,
        }
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(cli.command, out)
}

pub fn execute(command: Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match command {
        Command::Count { p } => {
            writeln!(out, "{}", count_models(p)?)?;
        }
        Command::Convert { model, to } => {
            let g = io::read_model(&model)?;
            match to {
                Format::Quadruplet => write!(out, "{}", g.to_json())?,
                Format::Classes => write!(out, "{}", io::to_json_pretty(&g.to_colour_classes())?)?,
                Format::Dot => write!(out, "{}", g.to_dot())?,
            }
        }
        Command::Neighbours { model, layer, dot } => {
            let g = io::read_model(&model)?;
            let want = layer.map(|l| match l {
                LayerArg::Upper => Layer::Upper,
                LayerArg::Lower => Layer::Lower,
            });
            let records: Vec<_> =
                neighbour_submodels(&g).into_iter().filter(|r| want.is_none_or(|l| r.layer == l)).collect();
            writeln!(out, "rule\tlayer\tprovenance\tgraph")?;
            for r in &records {
                writeln!(out, "{}\t{}\t{}\t{}", r.rule, r.layer, r.provenance, r.graph)?;
            }
            if let Some(path) = dot {
                write_file(&path, &hasse_fragment_dot(&g, &records))?;
            }
        }
        Command::Fit { model, input, alpha, out: report } => {
            check_alpha(alpha)?;
            let mut manifest = RunManifest::start(
                "fit",
                json!({"model": model, "input": input.describe(), "alpha": alpha}),
                None,
            );
            manifest.add_input(&model)?;
            let g = io::read_model(&model)?;
            let moments = input.load(&mut manifest)?;
            let fit = fit_pdcg(&g, &moments, &FitOptions::default())?;
            let accepted = is_accepted(&fit, alpha);
            writeln!(out, "df\t{}", fit.df)?;
            writeln!(out, "deviance\t{:.6}", fit.deviance)?;
            writeln!(out, "p_value\t{:.6}", fit.p_value)?;
            writeln!(out, "converged\t{}", fit.converged)?;
            writeln!(out, "accepted\t{accepted}")?;
            if let Some(path) = report {
                manifest.finish();
                let result = json!({"fit": fit, "accepted": accepted});
                write_file(&path, &io::to_json_pretty(&Report { manifest: &manifest, result: &result })?)?;
            }
        }
        Command::Select { input, procedure, max_steps, alpha, jobs, out: model_out, trace, dot } => {
            let config = SearchConfig {
                alpha,
                max_steps,
                parallel_fits: jobs.unwrap_or_else(default_jobs).max(1),
                fit: FitOptions::default(),
            };
            config.validate()?;
            let procedure = Procedure::from(procedure);
            let mut manifest = RunManifest::start(
                "select",
                json!({"input": input.describe(), "procedure": procedure, "search": config}),
                None,
            );
            let moments = input.load(&mut manifest)?;
            if moments.p() % 2 != 0 {
                bail!("p must be even, got {}", moments.p());
            }
            let (g, tr) = backward_search(procedure, &moments, &config)?;
            writeln!(out, "selected\t{g}")?;
            writeln!(out, "classes\t{}", g.num_classes())?;
            writeln!(out, "steps\t{}", tr.steps.len())?;
            writeln!(out, "fitted_models\t{}", tr.fitted_models)?;
            writeln!(out, "seconds\t{:.3}", tr.wall_seconds)?;
            if let Some(path) = model_out {
                write_file(&path, &g.to_json())?;
            }
            if let Some(path) = trace {
                manifest.finish();
                write_file(&path, &io::to_json_pretty(&Report { manifest: &manifest, result: &tr })?)?;
            }
            if let Some(path) = dot {
                write_file(&path, &g.to_dot())?;
            }
        }
        Command::Simulate { model, spec, replicate, n, seed, out: data_out, truth, theta } => {
            let seed = seed.unwrap_or_else(|| rand::rng().random());
            let (g, th, data) = if let Some(path) = model {
                let g = io::read_model(&path)?;
                let th = sim::concentration_for(&g)?;
                let data = sim::sample_gaussian_with(&th, n, &mut ChaCha8Rng::seed_from_u64(seed))?;
                (g, th, data)
            } else {
                let path = spec.expect("clap requires --model or --spec");
                let mut sc = ScenarioSpec::from_json(&fs::read_to_string(&path)?)
                    .with_context(|| format!("scenario {}", path.display()))?;
                sc.seed = seed;
                let mut rng = sim::replicate_rng(sc.seed, replicate);
                let g = sim::random_pdcg(&sc, &mut rng)?;
                let th = sim::concentration_for(&g)?;
                let data = sim::sample_gaussian_with(&th, n, &mut rng)?;
                (g, th, data)
            };
            let header: Vec<String> = (1..=g.p()).map(|i| format!("X{i}")).collect();
            write_file(&data_out, &io::write_matrix_csv(&data, Some(&header))?)?;
            if let Some(path) = truth {
                write_file(&path, &g.to_json())?;
            }
            if let Some(path) = theta {
                write_file(&path, &io::write_matrix_csv(&th, None)?)?;
            }
            writeln!(out, "seed\t{seed}")?;
            writeln!(out, "rows\t{n}")?;
            writeln!(out, "model\t{g}")?;
        }
        Command::Bench { spec, procedures, seed, alpha, jobs, csv, json: json_out, omit_timing } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut sc = ScenarioSpec::from_json(&text).with_context(|| format!("scenario {}", spec.display()))?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let procs: Vec<Procedure> = procedures.into_iter().map(Procedure::from).collect();
            let opts = BenchOptions {
                search: SearchConfig { alpha, ..Default::default() },
                jobs: jobs.unwrap_or_else(default_jobs).max(1),
                unbiased: false,
            };
            let mut manifest = RunManifest::start(
                "bench",
                json!({"scenario": sc, "procedures": procs, "search": opts.search, "omit_timing": omit_timing}),
                Some(sc.seed),
            );
            manifest.add_input(&spec)?;
            let report = sim::run_benchmark(&sc, &procs, &opts)?;
            sim::write_csv(&report.rows, !omit_timing, &mut *out)?;
            if let Some(path) = csv {
                let mut buf = Vec::new();
                sim::write_csv(&report.rows, !omit_timing, &mut buf)?;
                fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = json_out {
                manifest.finish();
                write_file(&path, &io::to_json_pretty(&Report { manifest: &manifest, result: &report })?)?;
            }
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> anyhow::Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("alpha must be in (0,1), got {alpha}");
    }
    Ok(())
}
