use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use monogamy_core::experiment::{
    analytic_table, generate_states, records_csv_string, scatter_export, score_states,
    write_analytic_csv, write_histogram_csv, write_scatter_csv, AnalyticFamily, CampaignConfig,
    Family, HistogramSpec, RecordTable, Report, Sweep,
};
use monogamy_core::measures::{MeasureKind, MeasureSettings};
use monogamy_core::optimize::OptimizerSettings;
use monogamy_core::states::{read_states, write_states};
use monogamy_core::Result;

#[derive(Parser)]
#[command(
    name = "monogamy",
    version,
    about = "Monogamy scores and complementarity bounds for multiqubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a seeded family of states into a JSON file.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Excitation number for Dicke states.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Score states under a list of measures and write one CSV row per (state, measure).
    Score {
        #[command(flatten)]
        common: ScoreArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Like `score`, writing the JSON report; exits with status 1 if any bound flag fails.
    Verify {
        #[command(flatten)]
        common: ScoreArgs,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Histogram one (possibly derived) column of a records CSV.
    Hist {
        #[arg(long = "in")]
        input: PathBuf,
        /// A stored column, `neg_entropy`, or `delta+entropy_a`.
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, allow_hyphen_values = true)]
        min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        max: Option<f64>,
        /// Restrict to rows of one measure.
        #[arg(long)]
        measure: Option<MeasureKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export two columns of a records CSV as (x, y) pairs.
    Scatter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "delta")]
        x: String,
        #[arg(long, default_value = "neg_entropy")]
        y: String,
        #[arg(long)]
        measure: Option<MeasureKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form reduced-qubit eigenvalue and entropy bound for a state family.
    Analytic {
        #[arg(long)]
        family: AnalyticFamily,
        #[arg(long)]
        n: usize,
        /// e.g. `alpha2=0:1:11,gamma2=0.2` or `r=1:4:4`
        #[arg(long, default_value = "")]
        sweep: Sweep,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Comma-separated measure names, or `all`.
    #[arg(long, default_value = "all")]
    measures: String,
    #[arg(long, default_value_t = 0)]
    nodal: usize,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 64)]
    grid_theta: usize,
    #[arg(long, default_value_t = 128)]
    grid_phi: usize,
    /// Run the optimizer even for pure-state discord.
    #[arg(long)]
    no_shortcut: bool,
}

impl ScoreArgs {
    fn run(&self) -> Result<Report> {
        let states = read_states(&self.input)?;
        let measures = MeasureKind::parse_list(&self.measures)?;
        let settings = MeasureSettings {
            optimizer: OptimizerSettings {
                grid_theta: self.grid_theta,
                grid_phi: self.grid_phi,
                ..OptimizerSettings::default()
            },
            discord_pure_shortcut: !self.no_shortcut,
        };
        let rows = score_states(&states, &measures, self.nodal, &settings, self.workers)?;
        Ok(Report::new(rows))
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen {
            family,
            n,
            count,
            seed,
            r,
            out,
            workers,
        } => {
            let mut cfg = CampaignConfig::new(family, n, count, seed);
            cfg.dicke_r = r;
            cfg.workers = workers;
            write_states(&out, &generate_states(&cfg)?)?;
        }
        Command::Score { common, out, json } => {
            let report = common.run()?;
            std::fs::write(&out, records_csv_string(&report.rows)?)?;
            if let Some(json) = json {
                std::fs::write(json, report.to_json()?)?;
            }
        }
        Command::Verify {
            common,
            report: path,
            csv,
        } => {
            let report = common.run()?;
            std::fs::write(&path, report.to_json()?)?;
            if let Some(csv) = csv {
                std::fs::write(csv, records_csv_string(&report.rows)?)?;
            }
            let s = &report.summary;
            eprintln!(
                "{} states, {} records; failing flags: entropy {}, improved {}, x0 {}",
                s.states,
                s.records,
                s.failures.pass_entropy,
                s.failures.pass_improved,
                s.failures.pass_x0
            );
            return Ok(s.all_passed);
        }
        Command::Hist {
            input,
            column,
            bins,
            min,
            max,
            measure,
            out,
        } => {
            let range = match (min, max) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                (None, None) => None,
                _ => {
                    return Err(monogamy_core::Error::InvalidConfig(
                        "--min and --max must be given together".into(),
                    ))
                }
            };
            let spec = HistogramSpec {
                column,
                bins,
                range,
            };
            let h = spec.apply(&RecordTable::read(&input)?, measure)?;
            write_file(&out, |w| write_histogram_csv(&h, w))?;
        }
        Command::Scatter {
            input,
            x,
            y,
            measure,
            out,
        } => {
            let points = scatter_export(&RecordTable::read(&input)?, &x, &y, measure)?;
            write_file(&out, |w| write_scatter_csv(&points, &x, &y, w))?;
        }
        Command::Analytic {
            family,
            n,
            sweep,
            out,
        } => {
            let rows = analytic_table(family, n, &sweep)?;
            write_file(&out, |w| write_analytic_csv(&rows, w))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
