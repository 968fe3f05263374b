//! Command-line front end. Every command writes JSON by default or CSV with
//! `--csv`; exit codes are 0 (success), 1 (usage) and 2 (violated property).

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::convergence::{self, cauchy_modulus, limit_supports, limit_vector, PeriodicOmega};
use crate::measure;
use crate::numberfield::FieldElement;
use crate::oracle;
use crate::par::{configure_threads, Exec};
use crate::parry::{self, BinaryWord};
use crate::semigroup::states::{core_states, reachable_graph, AbstractState};
use crate::semigroup::code::initial_state;
use crate::semigroup::TernaryWord;
use crate::spectrum::{self, MassTable, QGrid};
use crate::verify::{self, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "betagibbs", version, about = "Exact Bernoulli convolution for the Pisot root of x³ = 2x² − x + 1")]
pub struct Cli {
    /// Write CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Worker threads (also BETAGIBBS_THREADS); 1 runs sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Greedy β-expansion of x = a + bβ + cβ² given as "a,b,c" or a rational.
    Expand {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
    /// Admissible binary words of length n.
    Admissible {
        #[arg(long)]
        n: usize,
        /// List the words instead of just counting them.
        #[arg(long)]
        list: bool,
    },
    /// Exact μ and μ′ of the β-adic interval of a binary word.
    Measure { word: String },
    /// Gibbs bound for one word, or the Δ(n) scan.
    Gibbs(GibbsArgs),
    /// Exact Cauchy modulus over the cylinder of a ternary prefix.
    Converge {
        #[arg(long, default_value = "")]
        prefix: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = convergence::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Limit vector and support along pre · period^∞.
    Support {
        #[arg(long)]
        period: String,
        #[arg(long, default_value = "")]
        pre: String,
        #[arg(long, default_value_t = convergence::DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long, default_value_t = convergence::DEFAULT_TOL)]
        tol: f64,
    },
    /// τ(q) and its Legendre conjugate.
    Spectrum(SpectrumArgs),
    /// Brackets every μ(I_w), |w| = n, with the depth-N atom cloud.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long = "N", default_value_t = 20)]
        depth: usize,
    },
    /// The twelve-check identity suite.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 7)]
        kappa: usize,
        #[arg(long, default_value_t = 20)]
        seed: u64,
        /// Run only this check (1..=12).
        #[arg(long)]
        only: Option<usize>,
    },
    /// Column-pattern graph reachable from the pattern of E₁+E₃+E₅.
    Graph {
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
        /// Restrict to states whose support contains {1,3,5}.
        #[arg(long)]
        core: bool,
    },
}

#[derive(Args, Debug)]
pub struct GibbsArgs {
    /// Δ(n) for n = 1..=N.
    #[arg(long, conflicts_with = "word")]
    pub scan: Option<usize>,
    #[arg(long)]
    pub word: Option<String>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub qmin: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub qmax: f64,
    #[arg(long, default_value_t = 0.25)]
    pub qstep: f64,
    /// Defaults to nhi − 6.
    #[arg(long)]
    pub nlo: Option<usize>,
    #[arg(long, default_value_t = 14)]
    pub nhi: usize,
    #[arg(long, value_parser = ["csv", "json"])]
    pub out: Option<String>,
}

struct Ctx<'a> {
    csv: bool,
    exec: Exec,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

type Outcome = Result<i32, String>;

impl Ctx<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> std::io::Result<()> {
        let text = serde_json::to_string(value).map_err(std::io::Error::other)?;
        writeln!(self.out, "{text}")
    }

    fn table(&mut self, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(std::io::Error::other)?;
        for r in rows {
            w.write_record(r).map_err(std::io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.out.write_all(&bytes)
    }

    fn emit<T: Serialize>(&mut self, value: &T, header: &[&str], rows: impl FnOnce() -> Vec<Vec<String>>) -> Result<(), String> {
        let r = if self.csv { self.table(header, &rows()) } else { self.json(value) };
        r.map_err(|e| format!("write failed: {e}"))
    }
}

fn round(x: f64) -> String {
    crate::serial::round12(x).to_string()
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let threads = cli.threads.or_else(|| std::env::var("BETAGIBBS_THREADS").ok().and_then(|s| s.parse().ok()));
    let exec = match threads {
        Some(0) => {
            let _ = writeln!(err, "error: thread count must be positive");
            return EXIT_USAGE;
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            configure_threads(n);
            Exec::Parallel
        }
        None => Exec::default(),
    };
    let mut ctx = Ctx { csv: cli.csv, exec, out, err };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx<'_>) -> Outcome {
    match cmd {
        Command::Expand { x, n } => expand(ctx, &x, n),
        Command::Admissible { n, list } => admissible(ctx, n, list),
        Command::Measure { word } => measure_word(ctx, &word),
        Command::Gibbs(a) => gibbs(ctx, a),
        Command::Converge { prefix, depth, budget } => converge(ctx, &prefix, depth, budget),
        Command::Support { period, pre, n_max, tol } => support(ctx, &pre, &period, n_max, tol),
        Command::Spectrum(a) => spectrum_cmd(ctx, a),
        Command::Oracle { n, depth } => oracle_cmd(ctx, n, depth),
        Command::Verify { quick, kappa, seed, only } => verify_cmd(ctx, quick, kappa, seed, only),
        Command::Graph { dot, core } => graph(ctx, dot, core),
    }
}

fn expand(ctx: &mut Ctx<'_>, x: &str, n: usize) -> Outcome {
    let value: FieldElement = x.parse().map_err(|e| format!("{e}"))?;
    let word = parry::expand(&value, n).map_err(|e| e.to_string())?;
    let approx = value.to_f64();
    ctx.emit(&json!({ "x": x, "approx": crate::serial::round12(approx), "n": n, "word": word }), &["x", "n", "word"], || {
        vec![vec![x.to_string(), n.to_string(), word.to_string()]]
    })?;
    Ok(EXIT_OK)
}

fn admissible(ctx: &mut Ctx<'_>, n: usize, list: bool) -> Outcome {
    let count = parry::admissible_count(n);
    if list {
        let words = parry::enumerate_admissible_with(n, ctx.exec);
        ctx.emit(&json!({ "n": n, "count": count.to_string(), "words": words }), &["word"], || {
            words.iter().map(|w| vec![w.to_string()]).collect()
        })?;
    } else {
        ctx.emit(&json!({ "n": n, "count": count.to_string() }), &["n", "count"], || {
            vec![vec![n.to_string(), count.to_string()]]
        })?;
    }
    Ok(EXIT_OK)
}

fn binary(word: &str) -> Result<BinaryWord, String> {
    word.parse().map_err(|e: parry::ParryError| e.to_string())
}

fn ternary(word: &str) -> Result<TernaryWord, String> {
    word.parse().map_err(|e: crate::semigroup::SemigroupError| e.to_string())
}

#[derive(Serialize)]
struct MeasureRow {
    word: BinaryWord,
    #[serde(serialize_with = "crate::serial::rational")]
    mu: num_rational::BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    mu_prime: num_rational::BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    ratio: num_rational::BigRational,
}

fn measure_word(ctx: &mut Ctx<'_>, word: &str) -> Outcome {
    let w = binary(word)?;
    let mu = measure::mu_interval(&w).map_err(|e| e.to_string())?;
    let mu_prime = measure::mu_prime_interval(&w).map_err(|e| e.to_string())?;
    let ratio = measure::gibbs_ratio(&w).map_err(|e| e.to_string())?;
    let row = MeasureRow { word: w, mu, mu_prime, ratio };
    ctx.emit(&row, &["word", "mu", "mu_prime", "ratio"], || {
        vec![vec![row.word.to_string(), row.mu.to_string(), row.mu_prime.to_string(), row.ratio.to_string()]]
    })?;
    Ok(EXIT_OK)
}

fn gibbs(ctx: &mut Ctx<'_>, a: GibbsArgs) -> Outcome {
    if let Some(word) = a.word {
        let w = binary(&word)?;
        let b = measure::gibbs_bound(&w).map_err(|e| e.to_string())?;
        ctx.emit(&b, &["word", "shape", "nu", "ratio", "m_plus", "m_minus", "bound", "holds"], || {
            let shape = serde_json::to_value(b.decomposition.shape).ok().and_then(|v| v.as_str().map(str::to_string));
            vec![vec![
                b.word.to_string(),
                shape.unwrap_or_default(),
                b.decomposition.nu.to_string(),
                b.ratio.to_string(),
                b.m_plus.to_string(),
                b.m_minus.to_string(),
                b.bound.to_string(),
                b.holds.to_string(),
            ]]
        })?;
        return Ok(if b.holds { EXIT_OK } else { EXIT_VIOLATION });
    }
    let n = a.scan.ok_or("give --scan N or --word W")?;
    if n == 0 {
        return Err("--scan needs N ≥ 1".into());
    }
    let rows = measure::weak_gibbs_scan(n, ctx.exec);
    ctx.emit(&rows, &["n", "delta", "argmax", "min_ratio"], || {
        rows.iter()
            .map(|r| vec![r.n.to_string(), round(r.delta), r.argmax.to_string(), r.min_ratio.to_string()])
            .collect()
    })?;
    let ok = rows.iter().all(|r| r.min_ratio >= num_rational::BigRational::from_integer(1.into()));
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn converge(ctx: &mut Ctx<'_>, prefix: &str, depth: usize, budget: u128) -> Outcome {
    let p = ternary(prefix)?;
    let m = cauchy_modulus(&p, depth, budget, ctx.exec).map_err(|e| e.to_string())?;
    ctx.emit(&m, &["prefix", "depth", "modulus", "approx", "witness", "r", "s"], || {
        vec![vec![
            m.prefix.to_string(),
            m.depth.to_string(),
            m.modulus.to_string(),
            round(m.approx),
            m.witness.to_string(),
            m.r.to_string(),
            m.s.to_string(),
        ]]
    })?;
    Ok(EXIT_OK)
}

fn support(ctx: &mut Ctx<'_>, pre: &str, period: &str, n_max: usize, tol: f64) -> Outcome {
    let omega = PeriodicOmega::new(ternary(pre)?, ternary(period)?).map_err(|e| e.to_string())?;
    let r = limit_vector(&omega, n_max, tol);
    let listed = limit_supports().contains(&r.support);
    ctx.emit(&json!({
        "omega": r.omega,
        "support": r.support,
        "limit": r.limit,
        "method": r.method,
        "converged": r.converged,
        "steps": r.steps,
        "listed": listed,
    }), &["omega", "support", "limit", "method", "converged", "listed"], || {
        let method = serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(str::to_string));
        vec![vec![
            r.omega.to_string(),
            r.support.to_string(),
            r.limit.to_string(),
            method.unwrap_or_default(),
            r.converged.to_string(),
            listed.to_string(),
        ]]
    })?;
    Ok(if listed && r.converged { EXIT_OK } else { EXIT_VIOLATION })
}

fn spectrum_cmd(ctx: &mut Ctx<'_>, a: SpectrumArgs) -> Outcome {
    if let Some(o) = &a.out {
        ctx.csv = o == "csv";
    }
    let grid = QGrid::range(a.qmin, a.qmax, a.qstep).map_err(|e| e.to_string())?;
    let (lo, hi) = match a.nlo {
        Some(lo) => (lo, a.nhi),
        None => spectrum::default_window(a.nhi),
    };
    let table = MassTable::build(a.nhi, ctx.exec).map_err(|e| e.to_string())?;
    let rep = spectrum::spectrum_report(&table, &grid, lo, hi, ctx.exec).map_err(|e| e.to_string())?;
    ctx.emit(&rep, &["q", "tau", "residual", "alpha", "f"], || {
        rep.samples
            .iter()
            .zip(&rep.legendre)
            .map(|(s, l)| vec![round(s.q), round(s.tau), round(s.residual), round(l.alpha), round(l.f)])
            .collect()
    })?;
    Ok(EXIT_OK)
}

fn oracle_cmd(ctx: &mut Ctx<'_>, n: usize, depth: usize) -> Outcome {
    let cloud = oracle::build_atoms(depth, ctx.exec).map_err(|e| e.to_string())?;
    let rep = oracle::compare_all(&cloud, n, ctx.exec).map_err(|e| e.to_string())?;
    ctx.emit(&rep, &["word", "mu_exact", "lower", "upper", "pass"], || {
        rep.rows
            .iter()
            .map(|r| {
                vec![
                    r.word.clone(),
                    r.mu_exact.to_string(),
                    r.bounds.lower.to_string(),
                    r.bounds.upper.to_string(),
                    r.pass.to_string(),
                ]
            })
            .collect()
    })?;
    Ok(if rep.passed() { EXIT_OK } else { EXIT_VIOLATION })
}

fn verify_cmd(ctx: &mut Ctx<'_>, quick: bool, kappa: usize, seed: u64, only: Option<usize>) -> Outcome {
    let opts = VerifyOptions { quick, kappa, seed, exec: ctx.exec };
    let results = match only {
        Some(id) if (1..=verify::COUNT).contains(&id) => vec![verify::check(id, &opts)],
        Some(id) => return Err(format!("no check {id}; expected 1..={}", verify::COUNT)),
        None => {
            let rep = verify::run_all(&opts);
            let _ = write!(ctx.err, "{}", rep.table());
            ctx.emit(&rep, &["id", "name", "result", "detail"], || {
                rep.results
                    .iter()
                    .map(|r| vec![r.id.to_string(), r.name.to_string(), pass_word(r.passed), r.detail.clone()])
                    .collect()
            })?;
            return Ok(if rep.passed() { EXIT_OK } else { EXIT_VIOLATION });
        }
    };
    for r in &results {
        let _ = writeln!(ctx.err, "{}", r.line());
    }
    ctx.emit(&results, &["id", "name", "result", "detail"], || {
        results
            .iter()
            .map(|r| vec![r.id.to_string(), r.name.to_string(), pass_word(r.passed), r.detail.clone()])
            .collect()
    })?;
    Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_VIOLATION })
}

fn pass_word(p: bool) -> String {
    if p { "PASS" } else { "FAIL" }.to_string()
}

fn graph(ctx: &mut Ctx<'_>, dot: bool, core: bool) -> Outcome {
    let starts: Vec<AbstractState> = if core { core_states().to_vec() } else { vec![initial_state()] };
    let g = reachable_graph(&starts);
    if dot {
        ctx.out.write_all(g.to_dot().as_bytes()).map_err(|e| e.to_string())?;
        return Ok(EXIT_OK);
    }
    ctx.emit(&g, &["from", "label", "to"], || {
        g.edges
            .iter()
            .map(|(a, l, b)| vec![g.nodes[*a].to_string(), l.to_string(), g.nodes[*b].to_string()])
            .collect()
    })?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("betagibbs").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn measure_json() {
        let (code, out, _) = call(&["measure", "1100"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), r#"{"word":"1100","mu":"3/40","mu_prime":"9/40","ratio":"3"}"#);
    }

    #[test]
    fn measure_csv() {
        let (code, out, _) = call(&["--csv", "measure", "1100"]);
        assert_eq!(code, 0);
        assert_eq!(out, "word,mu,mu_prime,ratio\n1100,3/40,9/40,3\n");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["frobnicate"]).0, 1);
        assert_eq!(call(&["measure", "111"]).0, 1);
        assert_eq!(call(&["measure", "12"]).0, 1);
        assert_eq!(call(&["spectrum", "--qmin", "1", "--qmax", "0"]).0, 1);
        assert_eq!(call(&["--threads", "0", "admissible", "--n", "3"]).0, 1);
        assert_eq!(call(&["verify", "--only", "13"]).0, 1);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("Usage"));
    }

    #[test]
    fn support_of_zero_tail() {
        let (code, out, _) = call(&["support", "--period", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains(r#""support":[2,3,5,6,7]"#), "{out}");
    }

    #[test]
    fn admissible_counts() {
        let (_, out, _) = call(&["admissible", "--n", "3"]);
        assert_eq!(out.trim(), r#"{"count":"7","n":3}"#);
        let (_, out, _) = call(&["--csv", "admissible", "--n", "2", "--list"]);
        assert_eq!(out, "word\n00\n01\n10\n11\n");
    }

    #[test]
    fn expand_and_graph() {
        let (code, out, _) = call(&["expand", "-1,1,0", "--n", "5"]);
        assert_eq!(code, 0);
        assert!(out.contains(r#""word":"10100""#));
        let (code, out, _) = call(&["graph", "--dot"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("digraph"));
    }

    #[test]
    fn output_is_deterministic() {
        let a = call(&["--threads", "1", "gibbs", "--scan", "6"]);
        let b = call(&["gibbs", "--scan", "6"]);
        assert_eq!(a.1, b.1);
        assert_eq!(a.0, 0);
    }
}
