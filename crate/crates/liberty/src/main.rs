//! Command-line front end: spectral densities, convolutions, cumulant
//! tables, the order-7 obstruction, symbolic mixed moments, and the
//! random-matrix simulator, with CSV and JSON emitters.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::json;

use liberty::convolutions;
use liberty::cumulants::{order7_obstruction, solve_cumulant};
use liberty::exp_poly::{ExpPoly, Rat, Time};
use liberty::fubm::{self, SupportAngle};
use liberty::matrix_model::{simulate_tfree_sum, summarize_moments, SimulationConfig};
use liberty::moment_engine::MomentEngine;
use liberty::word::{Family, Letter, Word};

#[derive(Parser)]
#[command(
    name = "liberty",
    version,
    about = "Interpolated-independence calculator: densities, convolutions, \
             cumulant tables and a random-matrix simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Additive convolution of two symmetric Bernoulli laws (density on the line)
    Add,
    /// Multiplicative convolution of two symmetric Bernoulli laws (density on the circle)
    Mult,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the circle density of the unitary-Brownian-motion law at time t
    Density {
        /// Time, a decimal number or "inf"
        #[arg(long)]
        t: String,
        /// Number of uniform angular sample points in (-pi, pi]
        #[arg(long)]
        grid: usize,
        /// Emit JSON instead of CSV
        #[arg(long)]
        json: bool,
    },
    /// Density of the interpolated convolution of two symmetric Bernoulli laws
    Convolve {
        /// add: density on the line; mult: density on the circle
        #[arg(long, value_enum)]
        kind: Kind,
        /// Time, a decimal number or "inf"
        #[arg(long)]
        t: String,
        /// Number of sample points
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Emit JSON instead of CSV
        #[arg(long)]
        json: bool,
    },
    /// Print the interpolated cumulant coefficient table of order n (2..=6)
    Cumulants {
        /// Order of the table
        #[arg(long)]
        n: usize,
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Print the order-7 obstruction: the two c_322 candidates and their difference
    Obstruction {
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Exact mixed moment of an alternating word, as an exp-polynomial in t
    Moments {
        /// Word spec: space-separated letters like "a1 b1 a2 b1" (family a or b,
        /// then a generator index); adjacent same-family letters merge
        #[arg(long)]
        word: String,
        /// Optional time (decimal or "inf"); evaluates every coefficient
        #[arg(long)]
        t: Option<String>,
        /// Emit JSON instead of text
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo spectra of diag(a) + U S diag(b) S^-1 U* with Bernoulli inputs
    Simulate {
        /// Matrix size
        #[arg(long)]
        n: usize,
        /// Time, a decimal number or "inf"
        #[arg(long)]
        t: String,
        /// Number of replicas
        #[arg(long)]
        samples: usize,
        /// RNG seed (fixed seed gives bit-identical output)
        #[arg(long)]
        seed: u64,
        /// Step size of the unitary path (default min(0.01, t/100))
        #[arg(long)]
        dt: Option<f64>,
        /// Emit a JSON moment summary instead of the eigenvalue CSV
        #[arg(long)]
        json: bool,
    },
}

/// 17 significant digits, enough to round-trip any f64.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parse a time flag as f64: "inf" or a non-negative decimal.
fn parse_time_f64(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!(
            "invalid time {s:?}: expected a non-negative decimal or \"inf\""
        )),
    }
}

/// Parse a time flag exactly: "inf", a decimal, or a fraction "p/q".
fn parse_time_exact(s: &str) -> Result<Time, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Time::Infinity);
    }
    let bad = || format!("invalid time {s:?}: expected a non-negative decimal or \"inf\"");
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(bad());
        }
        let r = BigRational::new(p, q);
        if r < BigRational::from_integer(0.into()) {
            return Err(bad());
        }
        return Ok(Time::Finite(r));
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    if numer < BigInt::from(0) {
        return Err(bad());
    }
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Time::Finite(BigRational::new(numer, denom)))
}

/// Parse a word spec like "a1 b1 a2 b1" into a cyclically reduced word.
fn parse_word(spec: &str) -> Result<Word, String> {
    let mut letters = Vec::new();
    for token in spec.split_whitespace() {
        let mut chars = token.chars();
        let family = match chars.next().map(|c| c.to_ascii_lowercase()) {
            Some('a') => Family::A,
            Some('b') => Family::B,
            _ => {
                return Err(format!(
                    "invalid letter {token:?}: expected a<index> or b<index>"
                ))
            }
        };
        let index: u32 = chars
            .as_str()
            .parse()
            .map_err(|_| format!("invalid letter {token:?}: expected a<index> or b<index>"))?;
        letters.push(Letter::single(family, index));
    }
    if letters.is_empty() {
        return Err("empty word spec".into());
    }
    Ok(Word::new(letters))
}

fn support_angle_json(a: SupportAngle) -> serde_json::Value {
    match a {
        SupportAngle::Full => json!("full"),
        SupportAngle::Angle(v) => json!(v),
    }
}

/// Exit code 2: bad flags. Exit code 1: numerical failure.
fn flag_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run_density(t: &str, grid: usize, json: bool) -> ExitCode {
    let t = match parse_time_f64(t) {
        Ok(t) => t,
        Err(e) => return flag_error(&e),
    };
    if t == 0.0 {
        return flag_error("the density is defined for t > 0 (t = 0 is the point mass at 1)");
    }
    if grid == 0 {
        return flag_error("--grid must be at least 1");
    }
    let density = fubm::density(t, grid);
    if json {
        let samples: Vec<_> = density.samples.iter().map(|(x, y)| json!([x, y])).collect();
        let out = json!({
            "samples": samples,
            "support_half_angle": support_angle_json(density.support_angle),
            "t": density.t,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("theta,rho");
        for (theta, rho) in &density.samples {
            println!("{},{}", fmt17(*theta), fmt17(*rho));
        }
    }
    ExitCode::SUCCESS
}

fn run_convolve(kind: Kind, t: &str, grid: usize, json: bool) -> ExitCode {
    let t = match parse_time_f64(t) {
        Ok(t) => t,
        Err(e) => return flag_error(&e),
    };
    if grid == 0 {
        return flag_error("--grid must be at least 1");
    }
    match kind {
        Kind::Mult => {
            let density = convolutions::bernoulli_mult_density(t, grid);
            if json {
                let samples: Vec<_> =
                    density.samples.iter().map(|(x, y)| json!([x, y])).collect();
                let out = json!({
                    "kind": "mult",
                    "samples": samples,
                    "support_half_angle": support_angle_json(density.support_angle),
                    "t": t,
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!("theta,density");
                for (theta, d) in &density.samples {
                    println!("{},{}", fmt17(*theta), fmt17(*d));
                }
            }
        }
        Kind::Add => {
            let density = convolutions::bernoulli_add_density(t, grid);
            if json {
                let samples: Vec<_> =
                    density.samples.iter().map(|(x, y)| json!([x, y])).collect();
                let support: Vec<_> =
                    density.support.iter().map(|(a, b)| json!([a, b])).collect();
                let out = json!({
                    "kind": "add",
                    "samples": samples,
                    "support": support,
                    "t": t,
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!("x,density");
                for (x, d) in &density.samples {
                    println!("{},{}", fmt17(*x), fmt17(*d));
                }
            }
        }
    }
    ExitCode::SUCCESS
}

fn run_cumulants(n: usize, json: bool) -> ExitCode {
    if !(2..=6).contains(&n) {
        return flag_error("--n must be between 2 and 6 (no table exists at order 7)");
    }
    let engine = MomentEngine::new();
    match solve_cumulant(&engine, n) {
        Ok(table) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&table.to_json()).unwrap());
            } else {
                print!("{table}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run_obstruction(json: bool) -> ExitCode {
    let engine = MomentEngine::new();
    let obstruction = match order7_obstruction(&engine) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    // 24 e^{-3t} (1 - e^{-t})^2, expanded
    let factored = ExpPoly::from_term(Rat::from_integer((-3).into()), vec![Rat::from_integer(24.into())])
        .add(&ExpPoly::from_term(
            Rat::from_integer((-4).into()),
            vec![Rat::from_integer((-48).into())],
        ))
        .add(&ExpPoly::from_term(
            Rat::from_integer((-5).into()),
            vec![Rat::from_integer(24.into())],
        ));
    let is_factored_form = obstruction.difference == factored;
    if json {
        let mut out = json!({
            "c_322_from_25_split": obstruction.c322_from_25_split.to_json(),
            "c_322_from_34_split": obstruction.c322_from_34_split.to_json(),
            "c_43": obstruction.c43.to_json(),
            "c_52": obstruction.c52.to_json(),
            "difference": obstruction.difference.to_json(),
        });
        if is_factored_form {
            out["difference_factored"] = json!("24*e^{-3t}*(1-e^{-t})^2");
        }
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("c_52                : {}", obstruction.c52);
        println!("c_43                : {}", obstruction.c43);
        println!("c_322 (2|5 split)   : {}", obstruction.c322_from_25_split);
        println!("c_322 (3|4 split)   : {}", obstruction.c322_from_34_split);
        println!("difference          : {}", obstruction.difference);
        if is_factored_form {
            println!("difference factored : 24*e^{{-3t}}*(1-e^{{-t}})^2");
        }
    }
    ExitCode::SUCCESS
}

fn run_moments(word: &str, t: Option<&str>, json: bool) -> ExitCode {
    let w = match parse_word(word) {
        Ok(w) => w,
        Err(e) => return flag_error(&e),
    };
    let time = match t.map(parse_time_exact) {
        Some(Ok(time)) => Some(time),
        Some(Err(e)) => return flag_error(&e),
        None => None,
    };
    let engine = MomentEngine::new();
    let moment = engine.mixed_moment(&w);
    let evaluated: Option<Vec<(String, f64)>> = time.as_ref().map(|time| {
        moment
            .terms()
            .map(|(key, coeff)| {
                let value = coeff.eval(time).expect("moment exponents are non-positive");
                (key.to_string(), value)
            })
            .collect()
    });
    if json {
        let mut out = json!({
            "moment": moment.to_json(),
            "word": format!("{w}"),
        });
        if let Some(values) = &evaluated {
            let entries: Vec<_> = values
                .iter()
                .map(|(key, value)| json!({"term": key, "value": value}))
                .collect();
            out["evaluated"] = json!(entries);
            out["t"] = json!(t.unwrap());
        }
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("word   : {w}");
        println!("moment : {moment}");
        if let Some(values) = &evaluated {
            println!("at t = {}:", t.unwrap());
            for (key, value) in values {
                println!("  {} * {}", fmt17(*value), key);
            }
            let total: f64 = values.iter().map(|(_, v)| v).sum();
            println!("  (sum of coefficients: {})", fmt17(total));
        }
    }
    ExitCode::SUCCESS
}

fn run_simulate(
    n: usize,
    t: &str,
    samples: usize,
    seed: u64,
    dt: Option<f64>,
    json: bool,
) -> ExitCode {
    let t = match parse_time_f64(t) {
        Ok(t) => t,
        Err(e) => return flag_error(&e),
    };
    if t.is_infinite() {
        return flag_error("simulate requires a finite time (use a large t such as 16)");
    }
    if n == 0 || samples == 0 {
        return flag_error("--n and --samples must be at least 1");
    }
    if let Some(dt) = dt {
        if !(dt > 0.0) {
            return flag_error("--dt must be positive");
        }
    }
    let mut config = SimulationConfig::bernoulli(n, t, samples, seed);
    if let Some(dt) = dt {
        config.dt = dt;
    }
    let measures = match simulate_tfree_sum(&config) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if json {
        let stats = summarize_moments(&measures, 4);
        let mut moments = serde_json::Map::new();
        for (k, s) in stats.iter().enumerate() {
            moments.insert(
                format!("moment_{}", k + 1),
                json!({"mean": s.mean, "stderr": s.stderr}),
            );
        }
        let out = json!({
            "moments": moments,
            "n": n,
            "samples": samples,
            "seed": seed,
            "t": t,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("replica,eigenvalue");
        for (replica, measure) in measures.iter().enumerate() {
            for lambda in &measure.eigenvalues {
                println!("{replica},{}", fmt17(*lambda));
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("LIBERTY_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .ok();
            }
            _ => return flag_error("LIBERTY_THREADS must be a positive integer"),
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Density { t, grid, json } => run_density(&t, grid, json),
        Command::Convolve {
            kind,
            t,
            grid,
            json,
        } => run_convolve(kind, &t, grid, json),
        Command::Cumulants { n, json } => run_cumulants(n, json),
        Command::Obstruction { json } => run_obstruction(json),
        Command::Moments { word, t, json } => run_moments(&word, t.as_deref(), json),
        Command::Simulate {
            n,
            t,
            samples,
            seed,
            dt,
            json,
        } => run_simulate(n, &t, samples, seed, dt, json),
    }
}
