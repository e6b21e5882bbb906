use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use shiftorth::bench::{run_bench, BenchConfig};
use shiftorth::cpw::{solve_cpw_mode, CpwConfig, CpwInit, CpwModeSet};
use shiftorth::io;
use shiftorth::plot::{render_panels, Panel};
use shiftorth::projection::{FallbackVector, ModeSpectrum, ProjectionConfig, Projector};
use shiftorth::sopw::{verify_variational_certificate, SopwBasis1D, SopwGrid};
use shiftorth::{CoeffTensor, Error, MultiIndex, Parallelism};

const EXIT_USAGE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "shiftorth", version, about = "Shift-orthogonal bases, projections and compressed plane waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a coefficient file onto the shift-orthogonal set.
    Project(ProjectArgs),
    /// Tabulate or plot the SOPW basis.
    Sopw(SopwArgs),
    /// Solve 1D compressed plane waves.
    Cpw(CpwArgs),
    /// Measure how projection time scales with problem size.
    Bench(BenchArgs),
    /// Check the variational optimality certificate of the depth-1 SOPW.
    Certify(CertifyArgs),
}

#[derive(Args)]
struct ProjectArgs {
    input: PathBuf,
    output: PathBuf,
    /// Zero-column threshold (default 1e-14·√ΠN).
    #[arg(long)]
    eps: Option<f64>,
    /// Unit vector used for zero columns: uniform or first.
    #[arg(long, default_value = "uniform")]
    fallback: FallbackVector,
    /// Earlier modes to deflate against.
    #[arg(long, num_args = 1..)]
    modes: Vec<PathBuf>,
}

#[derive(Args)]
struct SopwArgs {
    #[arg(long = "L")]
    shifts: usize,
    #[arg(long = "N", default_value_t = 1)]
    depth: usize,
    /// Write the Fourier coefficient table.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Write an SVG with one panel per depth.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Depths to plot: `3`, `1..6` or `1,2,5`.
    #[arg(long, default_value = "1..6")]
    depths: String,
    /// Shift index to plot (default L/2).
    #[arg(long)]
    shift: Option<usize>,
    /// Grid points for the plot (default 2NL).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct CpwArgs {
    #[arg(long = "L", default_value_t = 16)]
    shifts: usize,
    #[arg(long = "N", default_value_t = 8)]
    depth: usize,
    /// L1 weight; `inf` disables the L1 term.
    #[arg(long, default_value_t = 0.3)]
    mu: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 4)]
    modes: usize,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Start from seeded noise instead of a Gaussian bump.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "cpw_out")]
    outdir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 14)]
    min_exp: u32,
    #[arg(long, default_value_t = 20)]
    max_exp: u32,
    #[arg(long, default_value_t = 7)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the projection on a single thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long = "L")]
    shifts: usize,
    /// Number of periods of the dual tail to check.
    #[arg(long, default_value_t = 10)]
    tail: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Project(a) => cmd_project(a),
        Command::Sopw(a) => cmd_sopw(a),
        Command::Cpw(a) => cmd_cpw(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Certify(a) => cmd_certify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Io(_) | Error::Config(_)) | None => EXIT_USAGE,
        Some(_) => EXIT_PRECONDITION,
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_project(a: ProjectArgs) -> anyhow::Result<u8> {
    let input = io::read_coeff_file(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let cfg = ProjectionConfig {
        zero_norm_eps: a.eps,
        fallback: a.fallback,
        validate_modes: true,
    };
    let projector = Projector::new(input.domain(), cfg)?;
    let mut spectra = Vec::new();
    for path in &a.modes {
        let mode =
            io::read_coeff_file(path).with_context(|| format!("reading {}", path.display()))?;
        spectra.push(ModeSpectrum::with_transform(&mode, projector.transform()));
    }
    let out = projector.project_sso_orth(&input, &spectra)?;
    io::write_coeff_file(&a.output, &out)
        .with_context(|| format!("writing {}", a.output.display()))?;
    let report = projector.is_shift_orthogonal(&out, 1e-10)?;
    let norms = &report.per_frequency_norms;
    let line = json!({
        "command": "project",
        "M": out.domain().len(),
        "modes": spectra.len(),
        "max_constraint_violation": report.max_constraint_violation,
        "min_frequency_norm": norms.iter().copied().fold(f64::INFINITY, f64::min),
        "max_frequency_norm": norms.iter().copied().fold(0.0, f64::max),
        "max_norm_deviation": report.max_norm_deviation,
        "is_member": report.is_member,
        "criteria_agree": report.criteria_agree,
    });
    println!("{line}");
    Ok(0)
}

fn parse_depths(spec: &str) -> anyhow::Result<Vec<usize>> {
    let spec = spec.trim();
    let depths: Vec<usize> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().context("depth range start")?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().context("depth range end")?;
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<usize>().context("depth list"))
            .collect::<anyhow::Result<_>>()?
    };
    if depths.is_empty() || depths.contains(&0) {
        bail!(Error::Config(format!("depths {spec:?} must be a non-empty list of positive integers")));
    }
    Ok(depths)
}

fn cmd_sopw(a: SopwArgs) -> anyhow::Result<u8> {
    let basis = SopwBasis1D::new(a.shifts, a.depth)?;
    if let Some(path) = &a.table {
        let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        io::write_sopw_table(&mut f, &basis)?;
        f.flush()?;
    }
    if let Some(path) = &a.plot {
        let depths = parse_depths(&a.depths)?;
        let cap = depths.iter().copied().max().unwrap_or(1).max(a.depth);
        let plot_basis = SopwBasis1D::new(a.shifts, cap)?;
        let shift = a.shift.unwrap_or(a.shifts / 2);
        let grid = match a.grid {
            Some(g) => SopwGrid::new(&plot_basis, g)?,
            None => SopwGrid::with_default_size(&plot_basis),
        };
        let x = grid.points();
        let mut panels = Vec::new();
        for &k in &depths {
            let t = CoeffTensor::delta(plot_basis.domain(), &MultiIndex::new([k], [shift]), 1.0)?;
            panels.push(Panel {
                title: format!("θ^{k}_{shift}"),
                x: x.clone(),
                y: grid.synthesize_real(&t)?,
            });
        }
        write_file(path, &render_panels(&panels, 2))?;
    }
    let line = json!({
        "command": "sopw",
        "L": basis.shifts(),
        "N": basis.depth(),
        "table": a.table,
        "plot": a.plot,
    });
    println!("{line}");
    Ok(0)
}

fn cmd_cpw(a: CpwArgs) -> anyhow::Result<u8> {
    let basis = SopwBasis1D::new(a.shifts, a.depth)?;
    let mut cfg = CpwConfig::for_basis(&basis);
    cfg.mu = a.mu;
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if let Some(r) = a.r {
        cfg.r = r;
    }
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    cfg.grid_size = a.grid;
    if let Some(seed) = a.seed {
        cfg.init = CpwInit::RandomSeeded(seed);
    }
    cfg.validate(&basis)?;
    fs::create_dir_all(&a.outdir).with_context(|| format!("creating {}", a.outdir.display()))?;

    let grid = SopwGrid::new(&basis, cfg.grid_size)?;
    let x = grid.points();
    let mut set = CpwModeSet::new(&basis);
    let mut diags = Vec::new();
    for m in 1..=a.modes {
        let (mode, diag) = solve_cpw_mode(&set, &cfg)?;
        for w in &diag.warnings {
            eprintln!("mode {m}: {w}");
        }
        let mut csv = Vec::new();
        io::write_columns(&mut csv, &[("x", &x), ("psi", &mode.samples)])?;
        fs::write(a.outdir.join(format!("mode{m}_samples.csv")), csv)?;
        io::write_coeff_file(a.outdir.join(format!("mode{m}_coeffs.csv")), &mode.coeffs)?;
        set.insert(mode.coeffs, mode.samples)?;
        diags.push(diag);
    }

    let panels: Vec<Panel> = set
        .modes()
        .iter()
        .enumerate()
        .map(|(i, m)| Panel {
            title: format!("mode {}", i + 1),
            x: x.clone(),
            y: m.samples.clone(),
        })
        .collect();
    write_file(&a.outdir.join("modes.svg"), &render_panels(&panels, 2))?;

    let mut timing = String::from("mode,iterations,seconds\n");
    for (i, d) in diags.iter().enumerate() {
        timing.push_str(&format!("{},{},{:.6}\n", i + 1, d.iterations, d.seconds));
    }
    let total_iter: usize = diags.iter().map(|d| d.iterations).sum();
    let total_sec: f64 = diags.iter().map(|d| d.seconds).sum();
    timing.push_str(&format!("total,{total_iter},{total_sec:.6}\n"));
    write_file(&a.outdir.join("timing.csv"), &timing)?;

    let projector = Projector::new(&basis.domain(), ProjectionConfig::default())?;
    let mut max_pairwise: f64 = 0.0;
    let mut max_membership: f64 = 0.0;
    for (i, mi) in set.modes().iter().enumerate() {
        max_membership = max_membership.max(
            projector
                .is_shift_orthogonal(&mi.coeffs, 1e-7)?
                .max_constraint_violation,
        );
        for mj in &set.modes()[..i] {
            max_pairwise = max_pairwise.max(
                projector
                    .check_shift_perpendicular(&mj.coeffs, &mi.coeffs, 1e-7)?
                    .max_gram,
            );
        }
    }
    let all_converged = diags.iter().all(|d| d.converged);
    let modes: Vec<_> = diags
        .iter()
        .enumerate()
        .map(|(i, d)| {
            json!({
                "mode": i + 1,
                "converged": d.converged,
                "iterations": d.iterations,
                "seconds": d.seconds,
                "energy": d.energy,
                "support_fraction": d.support_fraction,
                "constraint_violation": d.constraint_violation,
                "perpendicular_violations": d.perpendicular_violations,
                "max_out_of_band": d.max_out_of_band,
                "max_imag": d.max_imag,
                "warnings": d.warnings,
            })
        })
        .collect();
    let status = json!({
        "command": "cpw",
        "config": {
            "L": basis.shifts(),
            "N": basis.depth(),
            "mu": if cfg.mu.is_infinite() { json!("inf") } else { json!(cfg.mu) },
            "lambda": cfg.lambda,
            "r": cfg.r,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "grid": cfg.grid_size,
            "init": cfg.init,
        },
        "all_converged": all_converged,
        "max_membership_violation": max_membership,
        "max_pairwise_violation": max_pairwise,
        "modes": modes,
    });
    write_file(&a.outdir.join("status.json"), &format!("{status}\n"))?;
    println!("{status}");
    Ok(if all_converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_bench(a: BenchArgs) -> anyhow::Result<u8> {
    let cfg = BenchConfig {
        min_exp: a.min_exp,
        max_exp: a.max_exp,
        repeats: a.repeats,
        seed: a.seed,
        parallelism: if a.sequential {
            Parallelism::Sequential
        } else {
            Parallelism::default()
        },
        ..Default::default()
    };
    let report = run_bench(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for s in &report.sections {
        eprintln!("[{}] c = {:.3e} s, rms model residual {:.3}", s.name, s.fitted_c, s.rms_model_residual);
        for (row, ratio) in s.rows.iter().zip(std::iter::once(None).chain(s.ratios.iter().map(Some))) {
            let ratio = ratio.map_or(String::from("-"), |q| format!("{q:.3}"));
            eprintln!(
                "  M={:>8} L={:>6} N={:>6} t={:.3e}s ratio={ratio}",
                row.m, row.shifts, row.depths, row.median_seconds
            );
        }
    }
    let line = serde_json::to_string(&report)?;
    if let Some(path) = &a.out {
        write_file(path, &format!("{line}\n"))?;
    }
    println!("{line}");
    Ok(0)
}

fn cmd_certify(a: CertifyArgs) -> anyhow::Result<u8> {
    let basis = SopwBasis1D::new(a.shifts, 1)?;
    let report = verify_variational_certificate(&basis, a.tail)?;
    let mut value = serde_json::to_value(&report)?;
    value["passed"] = json!(report.passed());
    if let Some(obj) = value.as_object_mut() {
        obj.remove("slack");
    }
    println!("{value}");
    Ok(if report.passed() { 0 } else { EXIT_PRECONDITION })
}
