//! Command-line front end for the recovery pipeline.

use anyhow::{bail, Context, Result};
use chebycross::bases::{design_matrix, Basis, DesignMatrix};
use chebycross::experiments::{
    fit_decay_rate_points, margin_tolerance, median_points, read_records, run_error_sweep,
    run_frame_bound_demo, write_records, ExperimentConfig,
};
use chebycross::index_sets::MultiIndexSet;
use chebycross::recovery::{
    l2_error_montecarlo, l2_error_parseval, least_squares_fit, ErrorMeasure, ErrorMethod,
    DEFAULT_TAIL_CUTOFF,
};
use chebycross::reference_problems::{b2_cheb_coeff, b2_hpc_coeff, test_function, CoefficientOracle};
use chebycross::sampling::{draw_chebyshev, draw_uniform, Measure, NodeSet};
use chebycross::subsampling::{bss_subsample, frame_bounds};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "chebycross",
    version,
    about = "Least-squares recovery of non-periodic functions from subsampled random nodes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Cheb,
    Hpc,
}

impl From<BasisArg> for Basis {
    fn from(value: BasisArg) -> Self {
        match value {
            BasisArg::Cheb => Basis::Chebyshev,
            BasisArg::Hpc => Basis::HalfPeriodCosine,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Cheb,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum ErrorArg {
    Parseval,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cardinality of the hyperbolic cross Λ_{d,R}
    Cross {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: u64,
        /// Also print the index list, one comma-separated multi-index per row
        #[arg(long)]
        list: bool,
    },
    /// Draw a seeded random node set and write it as CSV
    Sample {
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subsample a node set, preserving the lower frame bound
    Subsample(SubsampleArgs),
    /// Fit the reference function on a node set and report the L2 error
    Recover(RecoverArgs),
    /// Print exact 1-d expansion coefficients of the reference function
    Coeffs {
        #[arg(long, value_enum)]
        basis: BasisArg,
        #[arg(long)]
        kmax: u32,
    },
    /// Frame-bound demonstration: both arms at d=2, R=20, M=2000
    Fig2 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.1)]
        b: f64,
        /// Directory for node/subset CSVs and the JSON summary
        #[arg(long)]
        out: PathBuf,
    },
    /// Error-decay sweep with the Chebyshev basis on Chebyshev nodes
    Fig3(SweepArgs),
    /// Error-decay sweep with the half-period cosine basis on uniform nodes
    Fig4(SweepArgs),
    /// Log-log decay rate of a results CSV (median over repeats per radius)
    Rate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        nmin: f64,
        #[arg(long)]
        nmax: f64,
    },
}

#[derive(Args)]
struct SubsampleArgs {
    /// Node CSV (one point per row)
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    radius: u64,
    #[arg(long, value_enum)]
    basis: BasisArg,
    #[arg(long, default_value_t = 1.1)]
    b: f64,
    /// Output CSV with the selected node rows
    #[arg(long)]
    out: PathBuf,
    /// Optionally dump the full design matrix as CSV
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    radius: u64,
    #[arg(long, value_enum)]
    basis: BasisArg,
    /// Function to sample (only the tensor B-spline is built in)
    #[arg(long, default_value = "b2tensor")]
    function: String,
    #[arg(long, value_enum, default_value_t = ErrorArg::Parseval)]
    error: ErrorArg,
    /// Monte Carlo sample count (only with --error mc)
    #[arg(long, default_value_t = 1_000_000)]
    mc_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the coefficient vector in the JSON output
    #[arg(long)]
    coefficients: bool,
    #[arg(long)]
    out: PathBuf,
    /// Optionally dump the design matrix used for the fit as CSV
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dim: usize,
    /// Comma-separated radius ladder; a documented default per dimension
    /// when omitted
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<u64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 1.1)]
    b: f64,
    #[arg(long)]
    out: PathBuf,
}

fn write_nodes(path: &Path, nodes: &NodeSet) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for point in nodes.points() {
        let fields: Vec<String> = point.iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn read_nodes(path: &Path, dim: usize, measure: Measure) -> Result<NodeSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("reading nodes from {}", path.display()))?;
    let mut coords = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != dim {
            bail!("node row has {} coordinates, expected {dim}", record.len());
        }
        for field in record.iter() {
            coords.push(field.trim().parse::<f64>()?);
        }
    }
    Ok(NodeSet::from_coords(dim, coords, measure)?)
}

fn dump_design(path: &Path, design: &DesignMatrix, cross: &MultiIndexSet) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let header: Vec<String> = cross
        .iter()
        .map(|k| {
            k.entries()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for row in design.values().rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Cross { dim, radius, list } => {
            let cross = MultiIndexSet::hyperbolic_cross(dim, radius)?;
            println!("{}", cross.len());
            if list {
                for k in cross.iter() {
                    let fields: Vec<String> =
                        k.entries().iter().map(|c| c.to_string()).collect();
                    println!("{}", fields.join(","));
                }
            }
        }
        Command::Sample {
            measure,
            dim,
            count,
            seed,
            out,
        } => {
            let nodes = match measure {
                MeasureArg::Cheb => draw_chebyshev(dim, count, seed)?,
                MeasureArg::Uniform => draw_uniform(dim, count, seed)?,
            };
            write_nodes(&out, &nodes)?;
            eprintln!(
                "wrote {} {}-distributed points to {}",
                count,
                nodes.measure().as_str(),
                out.display()
            );
        }
        Command::Subsample(args) => run_subsample(args)?,
        Command::Recover(args) => run_recover(args)?,
        Command::Coeffs { basis, kmax } => {
            let basis: Basis = basis.into();
            println!("k,coefficient");
            for k in 0..=kmax {
                let c = match basis {
                    Basis::Chebyshev => b2_cheb_coeff(k),
                    Basis::HalfPeriodCosine => b2_hpc_coeff(k),
                };
                println!("{k},{c:.16e}");
            }
        }
        Command::Fig2 { seed, b, out } => run_fig2(seed, b, &out)?,
        Command::Fig3(args) => run_sweep(args, Basis::Chebyshev)?,
        Command::Fig4(args) => run_sweep(args, Basis::HalfPeriodCosine)?,
        Command::Rate { input, nmin, nmax } => {
            let records = read_records(BufReader::new(File::open(&input)?))?;
            let points = median_points(&records);
            let slope = fit_decay_rate_points(&points, nmin, nmax)?;
            eprintln!(
                "{} median points, {} in n range [{nmin}, {nmax}]",
                points.len(),
                points
                    .iter()
                    .filter(|(n, _)| *n >= nmin && *n <= nmax)
                    .count()
            );
            println!("{slope:.6}");
        }
    }
    Ok(())
}

fn run_subsample(args: SubsampleArgs) -> Result<()> {
    let basis: Basis = args.basis.into();
    let measure = match basis {
        Basis::Chebyshev => Measure::Chebyshev,
        Basis::HalfPeriodCosine => Measure::Uniform,
    };
    let nodes = read_nodes(&args.nodes, args.dim, measure)?;
    let cross = MultiIndexSet::hyperbolic_cross(args.dim, args.radius)?;
    let raw = design_matrix(&nodes, &cross, basis, false)?;
    if let Some(path) = &args.dump_matrix {
        dump_design(path, &raw, &cross)?;
    }
    let big_m = nodes.len();
    let before = frame_bounds(&DesignMatrix::from_parts(
        raw.values() / (big_m as f64).sqrt(),
        basis,
        true,
    ))?;
    let result = bss_subsample(&raw, args.b)?;
    let subset = nodes.subset(&result.indices)?;
    let sub_raw = design_matrix(&subset, &cross, basis, false)?;
    let after = frame_bounds(&DesignMatrix::from_parts(
        sub_raw.values() / (subset.len() as f64).sqrt(),
        basis,
        true,
    ))?;
    write_nodes(&args.out, &subset)?;

    let metadata = serde_json::json!({
        "m": cross.len(),
        "M": big_m,
        "n": subset.len(),
        "b": result.oversampling,
        "guarantee_constant": result.guarantee_constant,
        "margin": result.margin,
        "a_min_before": before.a_min,
        "a_min_after": after.a_min,
        "b_max_before": before.b_max,
        "b_max_after": after.b_max,
    });
    println!("{metadata}");

    if result.margin < -margin_tolerance(&before) {
        bail!(
            "subsample guarantee violated: margin {:.3e} below tolerance",
            result.margin
        );
    }
    Ok(())
}

fn run_recover(args: RecoverArgs) -> Result<()> {
    if args.function != "b2tensor" {
        bail!("unknown function `{}`; available: b2tensor", args.function);
    }
    let basis: Basis = args.basis.into();
    let measure = match basis {
        Basis::Chebyshev => Measure::Chebyshev,
        Basis::HalfPeriodCosine => Measure::Uniform,
    };
    let nodes = read_nodes(&args.nodes, args.dim, measure)?;
    let cross = MultiIndexSet::hyperbolic_cross(args.dim, args.radius)?;
    let samples: chebycross::Result<Vec<f64>> = nodes.points().map(test_function).collect();
    let fit = least_squares_fit(&nodes, &samples?, &cross, basis)?;
    if let Some(path) = &args.dump_matrix {
        let design = design_matrix(&nodes, &cross, basis, false)?;
        dump_design(path, &design, &cross)?;
    }

    let report = match args.error {
        ErrorArg::Parseval => {
            let oracle = CoefficientOracle::b2_tensor(basis);
            l2_error_parseval(&oracle, &fit.approximant, DEFAULT_TAIL_CUTOFF)?
        }
        ErrorArg::Mc => l2_error_montecarlo(
            |x| test_function(x).expect("nodes come from the domain"),
            &fit.approximant,
            ErrorMeasure::for_basis(basis),
            args.mc_points,
            args.seed,
        )?,
    };

    let method_details = match report.method {
        ErrorMethod::Parseval {
            tail_cutoff,
            truncation_bound,
        } => serde_json::json!({
            "method": "parseval",
            "tail_cutoff": tail_cutoff,
            "truncation_bound": truncation_bound,
        }),
        ErrorMethod::MonteCarlo {
            points,
            seed,
            standard_error,
        } => serde_json::json!({
            "method": "montecarlo",
            "points": points,
            "seed": seed,
            "standard_error": standard_error,
        }),
    };
    let mut result = serde_json::json!({
        "dim": args.dim,
        "radius": args.radius,
        "basis": basis.code(),
        "m": cross.len(),
        "n": nodes.len(),
        "residual_norm": fit.residual_norm,
        "min_singular_value": fit.min_singular_value,
        "error": {
            "value": report.value,
            "measure": report.measure.as_str(),
            "details": method_details,
        },
    });
    if args.coefficients {
        result["coefficients"] = serde_json::json!(fit.approximant.coefficients());
    }
    let mut out = BufWriter::new(File::create(&args.out)?);
    serde_json::to_writer_pretty(&mut out, &result)?;
    out.write_all(b"\n")?;
    eprintln!(
        "n = {}, error = {:.6e} ({})",
        nodes.len(),
        report.value,
        report.measure.as_str()
    );
    Ok(())
}

fn run_fig2(seed: u64, b: f64, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let arms = run_frame_bound_demo(seed, b)?;
    let mut summaries = Vec::new();
    let mut violated = false;
    for arm in &arms {
        let code = arm.basis.code();
        write_nodes(&out.join(format!("fig2-{code}-nodes.csv")), &arm.nodes)?;
        write_nodes(&out.join(format!("fig2-{code}-subset.csv")), &arm.subset)?;
        let tolerance = margin_tolerance(&arm.before);
        if arm.subsample.margin < -tolerance {
            violated = true;
        }
        println!(
            "{code}: m={} M={} n={} bounds {:.3}/{:.3} -> {:.3}/{:.3} margin {:.3e}",
            arm.m,
            arm.big_m,
            arm.subset.len(),
            arm.before.a_min,
            arm.before.b_max,
            arm.after.a_min,
            arm.after.b_max,
            arm.subsample.margin
        );
        summaries.push(serde_json::json!({
            "basis": code,
            "measure": arm.nodes.measure().as_str(),
            "m": arm.m,
            "M": arm.big_m,
            "n": arm.subset.len(),
            "b": b,
            "seed": seed,
            "guarantee_constant": arm.subsample.guarantee_constant,
            "margin": arm.subsample.margin,
            "a_min_before": arm.before.a_min,
            "b_max_before": arm.before.b_max,
            "a_min_after": arm.after.a_min,
            "b_max_after": arm.after.b_max,
        }));
    }
    let mut file = BufWriter::new(File::create(out.join("fig2-summary.json"))?);
    serde_json::to_writer_pretty(&mut file, &serde_json::json!(summaries))?;
    file.write_all(b"\n")?;
    if violated {
        bail!("subsample guarantee violated in at least one arm");
    }
    Ok(())
}

fn run_sweep(args: SweepArgs, basis: Basis) -> Result<()> {
    let mut config = ExperimentConfig::new(args.dim, basis, args.seed)?
        .with_oversampling(args.b)
        .with_repeats(args.repeats);
    if let Some(radii) = args.radii {
        config = config.with_radii(radii);
    }
    config.validate()?;
    eprintln!(
        "sweep d={} basis={} radii={:?} repeats={} b={}",
        config.dim,
        config.basis.code(),
        config.radii,
        config.repeats,
        config.oversampling
    );
    let outcome = run_error_sweep(&config)?;
    for r in &outcome.records {
        eprintln!(
            "  R={:3} m={:5} n={:5} error={:.4e} ({} ms)",
            r.radius, r.m, r.n, r.error, r.millis
        );
    }
    let mut out = BufWriter::new(File::create(&args.out)?);
    write_records(&mut out, &outcome.records)?;
    for failure in &outcome.failures {
        eprintln!("{failure}");
    }
    if !outcome.failures.is_empty() {
        bail!("{} subsample guarantee failure(s)", outcome.failures.len());
    }
    Ok(())
}
