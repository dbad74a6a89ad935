//! Thin command-line front end over the library: catalogue listing,
//! method verification, order checks, long-time runs with CSV output,
//! convergence studies, and stability scans.
//!
//! Exit codes: 0 = all checks pass / run complete, 1 = numeric failure,
//! 2 = usage error.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use symglm::analysis;
use symglm::bseries;
use symglm::integrator::{self, RunConfig};
use symglm::manifest::ExperimentManifest;
use symglm::problems;
use symglm::tableau::{registry, MethodEntry};

#[derive(Parser)]
#[command(
    name = "symglm",
    version,
    about = "Symmetric general linear methods: algebraic verification, order checks, and long-time Hamiltonian experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the method catalogue
    List,
    /// Run every algebraic and spectral check on one method
    Verify {
        method: String,
        /// Emit one JSON object per check instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Verify the order of a method against its registered start
    Order {
        method: String,
        /// Print the full B-series verification grid
        #[arg(long)]
        table: bool,
    },
    /// Integrate a problem and write the invariant-error trace as CSV
    Run {
        /// Manifest file (`key = value`); flags override its entries
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        method: Option<String>,
        /// Problem name or alias: hh, dp, kepler, tlv
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long = "T")]
        t_final: Option<f64>,
        /// Record a sample every this many steps
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        newton_tol: Option<f64>,
        /// Disable compensated summation
        #[arg(long)]
        no_compensation: bool,
        /// Use the problem's full-length step size and horizon
        #[arg(long)]
        full_scale: bool,
    },
    /// Global-error convergence study against a fine reference
    Convergence {
        #[arg(long)]
        method: String,
        #[arg(long)]
        problem: String,
        /// Comma-separated step sizes, e.g. 0.02,0.01,0.005
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
        #[arg(long = "T")]
        t_final: f64,
    },
    /// Imaginary-axis stability scan
    Stability {
        method: String,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        out: Option<String>,
    },
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("run `symglm list` to see the method catalogue");
    ExitCode::from(2)
}

fn lookup_method(name: &str) -> Result<&'static MethodEntry, ExitCode> {
    registry()
        .lookup(name)
        .ok_or_else(|| usage_error(&format!("unknown method `{name}`")))
}

fn out_path(raw: &str) -> PathBuf {
    let p = Path::new(raw);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    match std::env::var_os("SYMGLM_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(p),
        None => p.to_path_buf(),
    }
}

fn cmd_list() -> ExitCode {
    let fmt_l = |m: &symglm::tableau::GlmTableau| -> String {
        let l = &m.floats().l;
        let entries: Vec<String> = (0..m.r).map(|i| format!("{:+.0}", l[i][i])).collect();
        format!("diag({})", entries.join(","))
    };
    println!(
        "{:<11} {:>2} {:>2} {:>2} {:>2}  {:<12} {:<14} {:<5} {}",
        "name", "p", "q", "r", "s", "L", "parasitism", "gsym", "notes"
    );
    for e in registry().entries() {
        let m = &e.tableau;
        let parasitism = match analysis::parasitism_factors(m) {
            Ok(f) if f.is_empty() => "-".to_string(),
            Ok(f) => {
                let v: Vec<String> = f.iter().map(|c| c.to_string()).collect();
                format!("[{}]", v.join(", "))
            }
            Err(_) => "n/a".to_string(),
        };
        let gsym = if e.gsym.is_some() { "yes" } else { "no" };
        let mut notes = Vec::new();
        if !m.is_lower_triangular() {
            notes.push("catalogue-only (A not lower triangular)");
        }
        if m.r == 1 {
            notes.push("RK");
        }
        println!(
            "{:<11} {:>2} {:>2} {:>2} {:>2}  {:<12} {:<14} {:<5} {}",
            e.name,
            m.declared_order,
            m.declared_stage_order,
            m.r,
            m.s,
            fmt_l(m),
            parasitism,
            gsym,
            notes.join("; ")
        );
    }
    ExitCode::SUCCESS
}

fn cmd_verify(name: &str, json: bool) -> ExitCode {
    let entry = match lookup_method(name) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let reports = analysis::all_checks(entry);
    if json {
        for r in &reports {
            println!("{}", serde_json::to_string(r).expect("report serializes"));
        }
    } else {
        println!("method {}", entry.name);
        for r in &reports {
            println!("  {r}");
        }
    }
    let all_ok = reports.iter().all(|r| !r.applicable || r.pass);
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_order(name: &str, table: bool) -> ExitCode {
    let entry = match lookup_method(name) {
        Ok(e) => e,
        Err(code) => return code,
    };
    if entry.tableau.is_exact() {
        let p = entry.tableau.declared_order.min(4);
        match bseries::verify_order(entry, &entry.start_series, p) {
            Ok(report) => {
                print!("{report}");
                if table {
                    println!();
                    print!("{}", bseries::series_grid(entry, &entry.start_series));
                }
                if report.verified_order == p {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        }
    } else if let Some(rk) = &entry.rk_form {
        // Irrational tableau: classical order conditions in binary64.
        let table_ref = symglm::trees::tree_table();
        let mut order = 0;
        'outer: for p in 1..=5 {
            for id in table_ref.of_order(p) {
                let w = bseries::rk_elementary_weight(rk, id).to_f64();
                let target = 1.0 / table_ref.trees[id].gamma as f64;
                if (w - target).abs() > 1e-13 {
                    break 'outer;
                }
            }
            order = p;
        }
        println!(
            "method {}: verified order {} (order conditions checked in binary64 at 1e-13; tableau has irrational entries)",
            entry.name, order
        );
        if order >= entry.tableau.declared_order {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    } else {
        eprintln!("error: no exact tableau or Runge-Kutta form to verify");
        ExitCode::from(1)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    config: Option<PathBuf>,
    method: Option<String>,
    problem: Option<String>,
    h: Option<f64>,
    t_final: Option<f64>,
    stride: Option<usize>,
    out: Option<String>,
    seed: Option<u64>,
    newton_tol: Option<f64>,
    no_compensation: bool,
    full_scale: bool,
) -> ExitCode {
    // Manifest from file, then flag overrides.
    let mut manifest = match config {
        Some(path) => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => return usage_error(&format!("cannot read {}: {e}", path.display())),
            };
            match ExperimentManifest::parse(&text) {
                Ok(m) => m,
                Err(e) => return usage_error(&format!("{}: {e}", path.display())),
            }
        }
        None => {
            let (Some(method), Some(problem)) = (method.clone(), problem.clone()) else {
                return usage_error("--method and --problem are required without --config");
            };
            let mut m = ExperimentManifest::new(&method, &problem, 0.0, 0.0);
            m.h = f64::NAN;
            m.t_final = f64::NAN;
            m
        }
    };
    if let Some(v) = method {
        manifest.method = v;
    }
    if let Some(v) = problem {
        manifest.problem = v;
    }
    if let Some(v) = h {
        manifest.h = v;
    }
    if let Some(v) = t_final {
        manifest.t_final = v;
    }
    if let Some(v) = stride {
        manifest.stride = v;
    }
    if let Some(v) = out {
        manifest.output = v;
    }
    if let Some(v) = seed {
        manifest.seed = v;
    }
    if let Some(v) = newton_tol {
        manifest.newton_tol = v;
    }
    if no_compensation {
        manifest.compensated = false;
    }

    let entry = match lookup_method(&manifest.method) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let Some(spec) = problems::problem_by_name(&manifest.problem) else {
        return usage_error(&format!(
            "unknown problem `{}` (use hh, dp, kepler or tlv)",
            manifest.problem
        ));
    };
    if full_scale {
        manifest.h = spec.h_ref;
        manifest.t_final = spec.t_ref;
    }
    if !manifest.h.is_finite() || !manifest.t_final.is_finite() {
        return usage_error("--h and --T are required (or use --full-scale / --config)");
    }
    if manifest.output.is_empty() {
        manifest.output = format!("{}_{}.csv", manifest.method, manifest.problem);
    }

    let prob = spec.ode_problem();
    let cfg: RunConfig = manifest.run_config();
    if let Err(e) = cfg.validate() {
        return usage_error(&e.to_string());
    }
    let path = out_path(&manifest.output);
    match integrator::run(entry, &prob, &cfg) {
        Ok(traj) => {
            if let Err(e) = std::fs::write(&path, traj.to_csv()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
            println!("wrote {} ({} samples)", path.display(), traj.samples.len());
            println!(
                "wall time {:.3} s; Newton iterations: {} total, {} max per solve",
                traj.wall_time,
                traj.newton_stats.total_iterations,
                traj.newton_stats.max_iterations
            );
            ExitCode::SUCCESS
        }
        Err(failure) => {
            // Keep whatever was computed before the abort.
            let _ = std::fs::write(&path, failure.partial.to_csv());
            eprintln!("error: {}", failure.error);
            eprintln!(
                "partial trace with {} samples written to {}",
                failure.partial.samples.len(),
                path.display()
            );
            ExitCode::from(1)
        }
    }
}

fn cmd_convergence(method: &str, problem: &str, h_list: &[f64], t_final: f64) -> ExitCode {
    let entry = match lookup_method(method) {
        Ok(e) => e,
        Err(code) => return code,
    };
    let Some(spec) = problems::problem_by_name(problem) else {
        return usage_error(&format!("unknown problem `{problem}`"));
    };
    if h_list.is_empty() {
        return usage_error("--h needs at least one step size");
    }
    let prob = spec.ode_problem();
    match integrator::convergence_study(entry, &prob, h_list, t_final) {
        Ok(points) => {
            println!("{:>12} {:>14} {:>10}", "h", "global error", "order");
            for p in points {
                match p.observed_order {
                    Some(o) => println!("{:>12.6} {:>14.6e} {:>10.3}", p.h, p.global_error, o),
                    None => println!("{:>12.6} {:>14.6e} {:>10}", p.h, p.global_error, "-"),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_stability(method: &str, x_max: f64, n: usize, out: Option<String>) -> ExitCode {
    let entry = match lookup_method(method) {
        Ok(e) => e,
        Err(code) => return code,
    };
    if !(x_max > 0.0) || n == 0 {
        return usage_error("--x-max must be positive and --n at least 1");
    }
    let scan = analysis::imaginary_axis_scan(&entry.tableau, x_max, n);
    let csv = scan.to_csv();
    match out {
        Some(raw) => {
            let path = out_path(&raw);
            if let Err(e) = std::fs::write(&path, csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
            println!("wrote {}", path.display());
            println!("k0_estimate = {:.6} (stop: {:?})", scan.k0_estimate, scan.stop);
        }
        None => {
            print!("{csv}");
            eprintln!("k0_estimate = {:.6} (stop: {:?})", scan.k0_estimate, scan.stop);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::List => cmd_list(),
        Cmd::Verify { method, json } => cmd_verify(&method, json),
        Cmd::Order { method, table } => cmd_order(&method, table),
        Cmd::Run {
            config,
            method,
            problem,
            h,
            t_final,
            stride,
            out,
            seed,
            newton_tol,
            no_compensation,
            full_scale,
        } => cmd_run(
            config,
            method,
            problem,
            h,
            t_final,
            stride,
            out,
            seed,
            newton_tol,
            no_compensation,
            full_scale,
        ),
        Cmd::Convergence {
            method,
            problem,
            h,
            t_final,
        } => cmd_convergence(&method, &problem, &h, t_final),
        Cmd::Stability {
            method,
            x_max,
            n,
            out,
        } => cmd_stability(&method, x_max, n, out),
    }
}
