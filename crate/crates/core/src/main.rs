use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringclass::bound_pipeline::{
    default_eps_grid, heegner_c1_with_grid, andre_oort_c11_with_grid, AndreOortParams, BoundReport,
    HeegnerParams,
};
use ringclass::dirichlet::{class_number_formula_check, l_one, RealCharacter};
use ringclass::hilbert::hilbert_class_poly;
use ringclass::quadform::{class_group, Discriminant};
use ringclass::sieve::{bound_report_json, derive_c9, load_curve, sieve, strip_degenerate, CurveSpec};
use ringclass::{Error, Result};

/// Thresholds with more decimal digits than this are summarized on the terminal.
const PRINT_DIGITS: u64 = 2000;

#[derive(Parser)]
#[command(name = "ringclass", version, about = "Class groups, singular moduli and effective special point bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structure of the class group of the order of discriminant D < 0.
    #[command(allow_negative_numbers = true)]
    Classgroup { d: i64 },
    /// The Hilbert class polynomial H_D.
    #[command(allow_negative_numbers = true)]
    Hilbert { d: i64 },
    /// L(1, chi_D) for a fundamental discriminant D < 0.
    #[command(allow_negative_numbers = true)]
    Lvalue {
        d: i64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Discriminant bound c1 for Heegner point configurations.
    BoundHeegner {
        /// Number of CM points.
        #[arg(long)]
        r: u32,
        /// Effective Serre constant of the elliptic curve.
        #[arg(long)]
        c5: f64,
        /// Degree of the modular parametrization.
        #[arg(long = "deg-pi")]
        deg_pi: u64,
        #[command(flatten)]
        grid: GridArgs,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Discriminant bound c11 for special points on a plane curve.
    BoundAo {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Strip degenerate fibres, bound, and scan a plane curve for special points.
    Sieve {
        #[command(flatten)]
        curve: CurveArgs,
        /// Largest |D| to enumerate (default 200, never above the c11 bound).
        #[arg(long)]
        cap: Option<u64>,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CurveArgs {
    /// A file holding the polynomial, or the polynomial itself, e.g. "x + y - 1728".
    #[arg(long)]
    curve: String,
    /// Degree of the field of definition.
    #[arg(long = "field-degree", default_value_t = 1)]
    field_degree: u32,
}

#[derive(Args)]
struct GridArgs {
    /// Epsilon values tried for both eps1 and eps2, comma separated.
    #[arg(long = "eps-grid", value_delimiter = ',', num_args = 1..)]
    eps_grid: Option<Vec<f64>>,
}

impl GridArgs {
    fn grid(&self) -> Vec<(f64, f64)> {
        match &self.eps_grid {
            Some(v) => v.iter().flat_map(|&a| v.iter().map(move |&b| (a, b))).collect(),
            None => default_eps_grid(),
        }
    }
}

fn disc(d: i64) -> Result<Discriminant> {
    Discriminant::new(d)
}

fn load(args: &CurveArgs) -> Result<CurveSpec> {
    let curve = load_curve(&args.curve)?.with_field_degree(args.field_degree)?;
    if let Some(c) = curve.removed_content() {
        eprintln!("warning: divided the polynomial by its content {c}");
    }
    Ok(curve)
}

fn write_json(path: &PathBuf, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))
}

fn print_bound(report: &BoundReport) {
    let bits = report.threshold.bits();
    // log10(2) < 0.30103
    if bits * 30103 / 100_000 <= PRINT_DIGITS {
        println!("threshold: {}", report.threshold);
    } else {
        println!(
            "threshold: a {bits}-bit integer, about e^{:.6} (use --json for every digit)",
            report.log_threshold
        );
    }
    println!("epsilon1: {}  epsilon2: {}", report.epsilon1, report.epsilon2);
    println!("audit:");
    for a in &report.audit {
        if a.name == "threshold" {
            continue;
        }
        println!("  {:<20} {:<24} {}", a.name, a.value, a.formula);
    }
    println!("caveat: one exceptional imaginary quadratic field may violate the lower class number bound");
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classgroup { d } => {
            let g = class_group(&disc(d)?)?;
            let dd = g.discriminant;
            println!("D = {} = {}^2 * {}", dd.value(), dd.conductor(), dd.fundamental_part());
            println!("h(D) = {}", g.order);
            let divisors: Vec<String> = g.elementary_divisors.iter().map(|n| format!("Z/{n}")).collect();
            println!(
                "structure: {}",
                if divisors.is_empty() { "trivial".to_string() } else { divisors.join(" x ") }
            );
            println!("#Pic[2] = {}", g.two_torsion_size);
            let forms: Vec<String> = g.reduced_forms.iter().map(ToString::to_string).collect();
            println!("reduced forms: {}", forms.join(" "));
        }
        Command::Hilbert { d } => {
            let h = hilbert_class_poly(&disc(d)?)?;
            println!("{h}");
        }
        Command::Lvalue { d, tol } => {
            let dd = disc(d)?;
            let chi = RealCharacter::new(dd)?;
            let value = l_one(&chi, tol)?;
            println!("L(1, chi_{d}) = {value:.15}");
            let ok = class_number_formula_check(&dd)?;
            println!("class number formula: {}", if ok { "consistent" } else { "MISMATCH" });
        }
        Command::BoundHeegner { r, c5, deg_pi, grid, json } => {
            let report = heegner_c1_with_grid(&HeegnerParams::new(r, c5, deg_pi)?, &grid.grid())?;
            print_bound(&report);
            if let Some(path) = json {
                write_json(&path, &bound_report_json(&report))?;
            }
        }
        Command::BoundAo { curve, grid, json } => {
            let spec = load(&curve)?;
            let (stripped, z_prime) = strip_degenerate(&spec)?;
            let c9 = derive_c9(&stripped);
            println!("curve: {stripped}");
            for comp in &z_prime {
                println!("removed fibre: {comp}");
            }
            println!("c9 = {c9} = max(deg_x, deg_y) * field_degree");
            let report = andre_oort_c11_with_grid(&AndreOortParams::new(2, c9)?, &grid.grid())?;
            print_bound(&report);
            if let Some(path) = json {
                write_json(&path, &bound_report_json(&report))?;
            }
        }
        Command::Sieve { curve, cap, json } => {
            let spec = load(&curve)?;
            let report = sieve(&spec, cap)?;
            println!("curve: {}", report.curve);
            println!("stripped: {}", report.stripped);
            for comp in &report.z_prime {
                println!("Z' component: {comp}");
            }
            println!("c9 = {}", report.c9);
            println!(
                "c11: a {}-bit integer, about e^{:.6}",
                report.c11.threshold.bits(),
                report.c11.log_threshold
            );
            println!("enumerated |D| <= {} ({})", report.enumeration_cap, report.cap_vs_bound);
            println!("hits: {}", report.hits.len());
            for h in &report.hits {
                println!(
                    "  D1 = {:>6}  D2 = {:>6}  same_cm_field = {:<5}  witness: {}",
                    h.d1.value(),
                    h.d2.value(),
                    h.same_cm_field,
                    h.witness
                );
            }
            if let Some(path) = json {
                write_json(&path, &report.to_json())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
