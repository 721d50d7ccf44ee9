use betadt::model::{cumulant, log_volume_moment, ModelParams, MAX_CUMULANT_ORDER};
use betadt::sampler::{write_samples_csv, CellSampler, RngStream};
use betadt::tessellation::{
    build_triangulation, render_svg, sample_poisson, suggested_h_max, window_for_cells, write_cells_csv, RunManifest,
    Window,
};
use betadt_harness::report::ReportFormat;
use betadt_harness::*;
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "betadt", version, about = "Typical cells of beta-Delaunay tessellations: moments, sampling, experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Model dimension d; the tessellation lives in R^{d−1}.
    #[arg(long, global = true, default_value_t = 3)]
    d: u32,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    nu: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample budget; each subcommand has its own default.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Directory for reports and other output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
}

#[derive(Subcommand)]
enum Command {
    /// E Vol^s from the closed form.
    Moments {
        #[arg(long, value_delimiter = ',', default_value = "1", allow_negative_numbers = true)]
        s: Vec<f64>,
    },
    /// Cumulants of log Vol with the fixed-parameter bound where it applies.
    Cumulants {
        #[arg(long, default_value_t = 4)]
        max_order: u32,
    },
    /// Draw typical cells and write them as CSV.
    Sample,
    /// Build a planar tessellation; writes a manifest, cell CSV and optional SVG.
    Tessellate {
        /// Side length of the square window (default: about 1000 cells).
        #[arg(long)]
        window: Option<f64>,
        /// Height cap of the input process.
        #[arg(long)]
        hmax: Option<f64>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Conditional shape of large cells.
    Kendall {
        #[arg(long, value_delimiter = ',')]
        a_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Upper volume tail.
    TailUpper {
        #[arg(long, value_delimiter = ',')]
        a_grid: Vec<f64>,
    },
    /// Lower volume tail.
    TailLower {
        #[arg(long, value_delimiter = ',')]
        a_grid: Vec<f64>,
    },
    /// KS distance of the standardized log-volume to the normal law.
    Clt {
        #[arg(long, value_delimiter = ',')]
        d_grid: Vec<u32>,
    },
    /// Mod-Gaussian residual table.
    Modphi {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        d_grid: Vec<u32>,
    },
    /// Scaled cumulant generating function table.
    Ldp {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        d_grid: Vec<u32>,
    },
    /// Cumulant bounds and asymptotics over a parameter grid.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        d_grid: Vec<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

/// Ok(false) means a verdict failed.
fn run(cli: &Cli) -> Result<bool> {
    let params = ModelParams::new(cli.d, cli.beta, cli.nu, cli.gamma)?;
    let config = |default_budget: u64| {
        let mut c = ExperimentConfig::new(params, cli.seed, cli.budget.unwrap_or(default_budget));
        c.out_dir = cli.out.clone();
        c
    };
    let report = match &cli.command {
        Command::Moments { s } => return moments(cli, &params, s),
        Command::Cumulants { max_order } => return cumulants(cli, &params, *max_order),
        Command::Sample => return sample(cli, &params),
        Command::Tessellate { window, hmax, svg } => return tessellate(cli, &params, *window, *hmax, svg.as_ref()),
        Command::Kendall { a_grid, eps } => {
            run_kendall(&config(1_000_000).with_a_grid(a_grid.clone()).with_eps_grid(eps.clone()))?
        }
        Command::TailUpper { a_grid } => run_upper_tail(&config(100_000_000).with_a_grid(a_grid.clone()))?,
        Command::TailLower { a_grid } => run_lower_tail(&config(40_000_000).with_a_grid(a_grid.clone()))?,
        Command::Clt { d_grid } => run_clt(&config(200_000).with_d_grid(d_grid.clone()))?,
        Command::Modphi { t_grid, d_grid } => {
            run_modphi(&config(1).with_t_grid(t_grid.clone()).with_d_grid(d_grid.clone()))?
        }
        Command::Ldp { t_grid, d_grid } => run_ldp(&config(1).with_t_grid(t_grid.clone()).with_d_grid(d_grid.clone()))?,
        Command::Sweep { d_grid } => run_cumulant_sweep(&config(1).with_d_grid(d_grid.clone()))?,
    };
    match &cli.out {
        Some(dir) => {
            for path in report.write_to_dir(dir, cli.format)? {
                eprintln!("wrote {}", path.display());
            }
            print!("{}", report.summary());
        }
        None => match cli.format {
            ReportFormat::Json => println!("{}", report.to_json()?),
            ReportFormat::Csv => {
                report.write_tables_csv(std::io::stdout().lock())?;
                report.write_summary_csv(std::io::stdout().lock())?;
            }
        },
    }
    Ok(report.passed())
}

fn emit(cli: &Cli, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let text = match cli.format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?)
                .expect("csv is utf-8")
        }
        ReportFormat::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| {
                            let value = v.parse::<f64>().map_or(serde_json::Value::String(v.clone()), |x| {
                                serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
                            });
                            (h.to_string(), value)
                        })
                        .collect()
                })
                .collect();
            serde_json::to_string_pretty(&objs)? + "\n"
        }
    };
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let ext = if cli.format == ReportFormat::Csv { "csv" } else { "json" };
            let path = dir.join(format!("{name}.{ext}"));
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn moments(cli: &Cli, params: &ModelParams, s: &[f64]) -> Result<bool> {
    let rows = s
        .iter()
        .map(|&s| {
            let lm = log_volume_moment(params, s)?;
            Ok(vec![s.to_string(), format!("{:e}", lm.exp()), format!("{lm:e}")])
        })
        .collect::<Result<Vec<_>>>()?;
    emit(cli, "moments", &["s", "moment", "log_moment"], &rows)?;
    Ok(true)
}

fn cumulants(cli: &Cli, params: &ModelParams, max_order: u32) -> Result<bool> {
    if max_order == 0 || max_order > MAX_CUMULANT_ORDER {
        return Err(Error::config(format!("--max-order must lie in 1..={MAX_CUMULANT_ORDER}")));
    }
    let rows = (1..=max_order)
        .map(|m| {
            let c = cumulant(params, m)?;
            let bound = c.bound.map_or(String::new(), |b| format!("{b:e}"));
            Ok(vec![m.to_string(), format!("{:e}", c.value), bound])
        })
        .collect::<Result<Vec<_>>>()?;
    emit(cli, "cumulants", &["order", "value", "bound"], &rows)?;
    Ok(true)
}

fn sample(cli: &Cli, params: &ModelParams) -> Result<bool> {
    let sampler = CellSampler::new(params)?;
    let mut rng = RngStream::new(cli.seed, 0);
    let count = cli.budget.unwrap_or(1000);
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join("samples.csv");
            write_samples_csv(&sampler, &mut rng, count, std::fs::File::create(&path)?)?;
            eprintln!("wrote {}", path.display());
        }
        None => write_samples_csv(&sampler, &mut rng, count, std::io::stdout().lock())?,
    }
    Ok(true)
}

fn tessellate(
    cli: &Cli,
    params: &ModelParams,
    side: Option<f64>,
    hmax: Option<f64>,
    svg: Option<&PathBuf>,
) -> Result<bool> {
    if params.d != 3 {
        return Err(Error::config(format!("tessellate builds planar tessellations, d = 3 (got {})", params.d)));
    }
    let window = match side {
        Some(s) => Window::cube(2, s)?,
        None => window_for_cells(params, 1000.0)?,
    };
    let h_max = hmax.unwrap_or_else(|| {
        let mean = betadt::tessellation::mean_cell_volume(params).unwrap_or(1.0);
        suggested_h_max(params, 10.0 * window.volume() / mean)
    });
    let set = sample_poisson(params, &window, h_max, &mut RngStream::new(cli.seed, 0))?;
    let tri = build_triangulation(set)?;
    let manifest = RunManifest::new(&tri, cli.seed, 0);
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("manifest.json"), manifest.to_json() + "\n")?;
            write_cells_csv(&tri, std::fs::File::create(dir.join("cells.csv"))?)?;
            eprintln!("wrote {} and {}", dir.join("manifest.json").display(), dir.join("cells.csv").display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", manifest.to_json())?;
        }
    }
    if let Some(path) = svg {
        render_svg(&tri, &window, path)?;
        eprintln!("wrote {}", path.display());
    }
    if !manifest.height_cap_certified {
        eprintln!("warning: some window cells exceed the height cap; raise --hmax");
        return Ok(false);
    }
    Ok(true)
}
