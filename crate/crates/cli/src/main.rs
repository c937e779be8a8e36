//! `bailey`: run registry identities, Bailey-tree paths, the kernel suite and
//! the cubic-lift probe, printing text or JSON-lines reports.

use std::process::ExitCode;

use bailey_core::harness::{
    default_candidates, enumerate_paths, exponent_probe, registry, resolve, run_cases, run_paths, Candidate, RunConfig, KERNEL_KEYS,
};
use bailey_core::report::{sort_reports, IdentityReport, Status};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bailey", version, about = "Exact verification of WP and elliptic WP Bailey pair identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Output {
    /// Emit one JSON object per line.
    #[arg(long)]
    json: bool,
    /// Report `ms = 0` so identical runs give byte-identical output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Verify registry identities (`all` selects the whole registry).
    Verify {
        #[arg(required = true)]
        keys: Vec<String>,
        /// Truncation order in the half-nome w (default: per identity).
        #[arg(long)]
        order: Option<i64>,
        /// Largest size parameter n (default: per identity).
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the perturbed variants instead; success means every one fails.
        #[arg(long)]
        control: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Build and verify Bailey-tree paths from the unit pair.
    Tree {
        /// Comma-separated tags in application order, e.g. `T1e,T3e`.
        #[arg(long, value_delimiter = ',', required_unless_present = "depth_all")]
        path: Vec<String>,
        /// Instead of one path, run every single-mode path up to this depth.
        #[arg(long)]
        depth_all: Option<usize>,
        #[arg(long, default_value_t = 16)]
        order: i64,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Inverse relations and the matrix identities behind the transforms.
    Kernels {
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long, default_value_t = 3)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Find the alpha prefactor law of the cubic lift.
    ProbeLift3 {
        /// Candidate family; only `default` is defined.
        #[arg(long, default_value = "default")]
        candidates: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 12)]
        order: i64,
        #[arg(long)]
        json: bool,
    },
    /// Print the registry.
    List,
}

fn print_reports(reports: &[IdentityReport], output: Output) {
    for r in reports {
        println!("{}", if output.json { r.to_json() } else { r.to_text() });
    }
}

fn summary(reports: &[IdentityReport], expect: Status, output: Output) -> ExitCode {
    let good = reports.iter().filter(|r| r.status == expect).count();
    if !output.json {
        println!("{good}/{} reports {}", reports.len(), if expect == Status::Pass { "passed" } else { "failed as expected" });
    }
    if good == reports.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Verify { keys, order, max_n, points, seed, control, output } => {
            let keys: Vec<String> =
                if keys.iter().any(|k| k == "all") { registry().iter().map(|c| c.key.to_string()).collect() } else { keys };
            let cases = resolve(&keys).map_err(|e| e.to_string())?;
            let cfg = RunConfig { seed, order, max_n, points, perturbed: control, timing: !output.no_timing };
            let reports = run_cases(&cases, &cfg);
            print_reports(&reports, output);
            Ok(summary(&reports, if control { Status::Fail } else { Status::Pass }, output))
        }
        Command::Tree { path, depth_all, order, max_n, seed, output } => {
            let paths: Vec<Vec<&str>> = match depth_all {
                Some(d) => enumerate_paths(d),
                None => vec![path.iter().map(String::as_str).collect()],
            };
            let mut reports = run_paths(&paths, seed, max_n, order, !output.no_timing);
            sort_reports(&mut reports);
            print_reports(&reports, output);
            Ok(summary(&reports, Status::Pass, output))
        }
        Command::Kernels { max_n, points, seed, output } => {
            let keys: Vec<String> = KERNEL_KEYS.iter().map(|k| k.to_string()).collect();
            let cases = resolve(&keys).map_err(|e| e.to_string())?;
            let cfg = RunConfig { seed, max_n, points, timing: !output.no_timing, ..RunConfig::default() };
            let reports = run_cases(&cases, &cfg);
            print_reports(&reports, output);
            Ok(summary(&reports, Status::Pass, output))
        }
        Command::ProbeLift3 { candidates, seed, max_n, order, json } => {
            if candidates != "default" {
                return Err(format!("unknown candidate family `{candidates}` (only `default` exists)"));
            }
            let family: Vec<Candidate> = default_candidates();
            let report = exponent_probe(&family, seed, max_n, order);
            if json {
                println!("{}", serde_json::to_string(&report).map_err(|e| e.to_string())?);
            } else {
                println!("points: {}", report.points.join(", "));
                for o in report.outcomes.iter().filter(|o| o.status != "pruned") {
                    println!("{:<10} {}", o.status, o.candidate);
                }
                let pruned = report.outcomes.iter().filter(|o| o.status == "pruned").count();
                let at_one = report.outcomes.iter().filter(|o| matches!(o.failed_at, Some((_, 1)))).count();
                println!("pruned: {pruned} ({at_one} at n = 1)");
                match &report.unique {
                    Some(law) => println!("unique law: {law}"),
                    None => println!("no unique law ({} survivors)", report.survivors.len()),
                }
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::List => {
            for c in registry() {
                println!("{:<22} order={:<3} max_n={}  {}", c.key, c.order, c.max_n, c.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
