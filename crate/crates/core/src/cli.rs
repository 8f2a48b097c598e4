//! The `minset` command line.
//!
//! Exit status is 0 for decided results, 2 when the answer is Undecided (or
//! a membership query is only conditional), and 1 for any error, usage
//! errors included.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::automata::{
    analyze_residual, build_avoidance_dfa, intersect, valid_numeral_dfa, ResidualAnalysis,
};
use crate::engine::{
    minimal_set_automatic, minimal_set_bounded, set_algebra_experiment, verify_completeness,
    EngineConfig, ExperimentKind, MinimalSetReport,
};
use crate::error::{Error, Result};
use crate::numerals::{Antichain, Numeral};
use crate::oracles::{is_member, necessary_conditions, FactorPolicy, OracleContext, OracleSpec};
use crate::provers::{lucas_ending_check, pow2_digit_check, POW2_BASE_CASE};

/// Environment variable consulted when `--data-dir` is absent.
pub const DATA_DIR_ENV: &str = "MINSET_DATA_DIR";
/// Used when neither the flag nor the variable is set.
pub const DEFAULT_DATA_DIR: &str = "data";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "minset",
    version,
    about = "Minimal elements of integer sets under the digit-subsequence order"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// write here instead of stdout (atomically)
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// tables directory [default: $MINSET_DATA_DIR, then ./data]
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = FactorPolicy::default().trial_bound)]
    trial_bound: u64,
    #[arg(long, global = true, default_value_t = FactorPolicy::default().rho_rounds)]
    rho_rounds: u64,
    /// seed for Pollard rho starting points
    #[arg(long, global = true, default_value_t = FactorPolicy::default().seed)]
    seed: u64,
    #[arg(long, global = true, default_value_t = EngineConfig::default().family_cap)]
    family_cap: usize,
    #[arg(long, global = true, default_value_t = EngineConfig::default().iteration_cap)]
    iteration_cap: usize,
    /// members tried per residual family before giving up
    #[arg(long, global = true, default_value_t = EngineConfig::default().family_expansions)]
    family_expansions: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimal set, bounded scan or exact automaton fixpoint
    #[command(group = clap::ArgGroup::new("how").required(true).args(["bound", "exact"]))]
    Compute {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 10)]
        base: u32,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        exact: bool,
    },
    /// Check that a candidate is the whole minimal set
    #[command(group = clap::ArgGroup::new("cand").required(true).args(["candidate", "candidate_bound"]))]
    Verify {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 10)]
        base: u32,
        /// comma separated numerals in the base, or @file
        #[arg(long)]
        candidate: Option<String>,
        /// take the candidate from a bounded run to this value
        #[arg(long)]
        candidate_bound: Option<u64>,
    },
    /// Membership query with witness
    Oracle {
        #[arg(long)]
        kind: String,
        /// decimal value
        #[arg(long)]
        n: String,
    },
    /// Residual language of numerals avoiding a candidate
    Families {
        #[arg(long)]
        candidate: String,
        /// also impose this set's necessary conditions
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 10)]
        base: u32,
    },
    /// Digit conjectures
    Conjecture {
        #[command(subcommand)]
        which: Conjecture,
    },
    /// Ending check and conditional minimal sets of even perfect numbers
    Perfect {
        #[arg(long, default_value_t = 12)]
        count: usize,
        #[arg(long, value_delimiter = ',', default_value = "10,2")]
        bases: Vec<u32>,
    },
    /// Bounded test of a set-algebra identity for M
    Experiment {
        #[arg(long, value_parser = ["union", "intersection", "monotonicity"])]
        kind: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 10)]
        base: u32,
        #[arg(long, default_value_t = 100_000)]
        bound: u64,
    },
    /// Re-run the configuration stored in a JSON report
    Replay { report: PathBuf },
}

#[derive(Subcommand, Debug)]
enum Conjecture {
    /// Every 16^m past 16^4 has one of the digits 1, 2, 4, 8
    Pow2 {
        #[arg(long, default_value_t = 5)]
        min_exp: u64,
        #[arg(long)]
        max_exp: u64,
    },
}

/// Everything needed to reproduce a compute or verify run; embedded in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub set: String,
    pub base: u32,
    pub bound: Option<u64>,
    pub exact: bool,
    pub candidate: Option<String>,
    pub candidate_bound: Option<u64>,
    pub format: Format,
    pub data_dir: PathBuf,
    pub trial_bound: u64,
    pub rho_rounds: u64,
    pub seed: u64,
    pub family_cap: usize,
    pub iteration_cap: usize,
    pub family_expansions: usize,
}

impl RunConfig {
    fn context(&self) -> Result<OracleContext> {
        let policy = FactorPolicy {
            trial_bound: self.trial_bound,
            rho_rounds: self.rho_rounds,
            seed: self.seed,
        };
        OracleContext::with_data_dir(policy, &self.data_dir)
    }

    fn engine(&self) -> EngineConfig {
        EngineConfig {
            family_cap: self.family_cap,
            iteration_cap: self.iteration_cap,
            family_expansions: self.family_expansions,
            ..Default::default()
        }
    }
}

fn resolve_data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR))
}

impl Global {
    fn config(&self, command: &str, set: &str, base: u32) -> RunConfig {
        RunConfig {
            command: command.into(),
            set: set.into(),
            base,
            bound: None,
            exact: false,
            candidate: None,
            candidate_bound: None,
            format: self.format,
            data_dir: resolve_data_dir(self.data_dir.clone()),
            trial_bound: self.trial_bound,
            rho_rounds: self.rho_rounds,
            seed: self.seed,
            family_cap: self.family_cap,
            iteration_cap: self.iteration_cap,
            family_expansions: self.family_expansions,
        }
    }
}

/// Rendered command result.
struct Output {
    text: String,
    json: serde_json::Value,
    csv: String,
    undecided: bool,
}

impl Output {
    fn render(&self, format: Format) -> String {
        let mut s = match format {
            Format::Text => self.text.clone(),
            Format::Json => {
                serde_json::to_string_pretty(&self.json).expect("json values serialize")
            }
            Format::Csv => self.csv.clone(),
        };
        if !s.ends_with('\n') {
            s.push('\n');
        }
        s
    }
}

fn parse_spec(text: &str) -> Result<OracleSpec> {
    OracleSpec::parse(text)
}

fn parse_candidate(text: &str, base: u32) -> Result<Antichain> {
    let owned;
    let list = match text.strip_prefix('@') {
        Some(path) => {
            owned = std::fs::read_to_string(path)?;
            owned.as_str()
        }
        None => text,
    };
    let nums = list
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| Numeral::parse(t, base))
        .collect::<Result<Vec<_>>>()?;
    Antichain::try_from_numerals(base, nums)
}

fn report_output(mut report: MinimalSetReport, config: &RunConfig) -> Result<Output> {
    report.config = Some(serde_json::to_value(config)?);
    Ok(Output {
        text: report.to_string(),
        json: serde_json::to_value(&report)?,
        csv: report.to_csv(),
        undecided: report.mode.is_undecided(),
    })
}

/// Runs a compute or verify configuration.
pub fn run_config(config: &RunConfig) -> Result<MinimalSetReport> {
    let ctx = config.context()?;
    let spec = parse_spec(&config.set)?;
    let engine = config.engine();
    match config.command.as_str() {
        "compute" if config.exact => minimal_set_automatic(&ctx, &spec, config.base, &engine),
        "compute" => {
            let bound = config
                .bound
                .ok_or_else(|| Error::domain("compute needs a bound or exact mode"))?;
            minimal_set_bounded(&ctx, &spec, config.base, bound, &engine)
        }
        "verify" => {
            let candidate = match (&config.candidate, config.candidate_bound) {
                (Some(c), _) => parse_candidate(c, config.base)?,
                (None, Some(b)) => {
                    minimal_set_bounded(&ctx, &spec, config.base, b, &engine)?.elements
                }
                (None, None) => return Err(Error::domain("verify needs a candidate")),
            };
            verify_completeness(&ctx, &spec, &candidate, &engine)
        }
        other => Err(Error::domain(format!("'{other}' cannot be replayed"))),
    }
}

fn families_output(analysis: &ResidualAnalysis) -> Output {
    let mut text = format!("residual: {:?}\n", analysis.tag);
    let mut csv = String::from("kind,pattern,value\n");
    for m in &analysis.finite_members {
        text.push_str(&format!("  member {m}\n"));
        csv.push_str(&format!("member,{m},{}\n", m.value()));
    }
    for f in &analysis.families {
        text.push_str(&format!("  family {f}\n"));
        csv.push_str(&format!("family,{f},\n"));
    }
    if let Some(r) = &analysis.reason {
        text.push_str(&format!("  reason: {r}\n"));
    }
    Output {
        text,
        json: serde_json::to_value(analysis).expect("analysis serializes"),
        csv,
        undecided: analysis.tag == crate::automata::ResidualTag::Undecided,
    }
}

fn execute(global: &Global, command: Command) -> Result<Output> {
    let ctx_for = |g: &Global| g.config("", "", 10).context();
    match command {
        Command::Compute {
            set,
            base,
            bound,
            exact,
        } => {
            let mut c = global.config("compute", &set, base);
            c.bound = bound;
            c.exact = exact;
            report_output(run_config(&c)?, &c)
        }
        Command::Verify {
            set,
            base,
            candidate,
            candidate_bound,
        } => {
            let mut c = global.config("verify", &set, base);
            c.candidate = candidate;
            c.candidate_bound = candidate_bound;
            report_output(run_config(&c)?, &c)
        }
        Command::Replay { report } => {
            let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report)?)?;
            let block = v.get("config").cloned().unwrap_or(v);
            let c: RunConfig = serde_json::from_value(block)?;
            report_output(run_config(&c)?, &c)
        }
        Command::Oracle { kind, n } => {
            let spec = parse_spec(&kind)?;
            let value: BigUint = n
                .trim()
                .parse()
                .map_err(|_| Error::parse(0, format!("'{n}' is not a decimal integer")))?;
            let m = is_member(&ctx_for(global)?, &spec, &value)?;
            let answer = match m.decided() {
                Some(true) => "yes",
                Some(false) => "no",
                None => "conditional",
            };
            let witness = m.witness().map(|w| w.to_string());
            let assumptions: Vec<String> = m.assumptions().iter().map(|a| a.to_string()).collect();
            Ok(Output {
                text: format!("{value} in {spec}: {m}"),
                json: json!({
                    "set": spec.to_string(),
                    "n": value.to_string(),
                    "member": answer,
                    "witness": witness,
                    "assumptions": assumptions,
                }),
                csv: format!(
                    "set,n,member,witness\n\"{spec}\",{value},{answer},{}\n",
                    witness.clone().unwrap_or_default()
                ),
                undecided: m.decided().is_none(),
            })
        }
        Command::Families {
            candidate,
            set,
            base,
        } => {
            let cand = parse_candidate(&candidate, base)?;
            let mut dfa = intersect(&build_avoidance_dfa(&cand), &valid_numeral_dfa(base)?)?;
            if let Some(s) = &set {
                for c in necessary_conditions(&parse_spec(s)?) {
                    dfa = intersect(&dfa, &c.dfa(base)?)?.trimmed();
                }
            }
            Ok(families_output(&analyze_residual(
                &dfa.trimmed(),
                global.family_cap,
            )))
        }
        Command::Conjecture {
            which: Conjecture::Pow2 { min_exp, max_exp },
        } => {
            let lo = min_exp.max(POW2_BASE_CASE);
            let r = pow2_digit_check(lo, max_exp)?;
            let verdict = match r.first_violation {
                None => "conjecture holds up to bound".to_string(),
                Some(m) => format!("counterexample at m = {m}"),
            };
            let mut text = format!(
                "16^m for {} <= m <= {}: {verdict} ({} checked)",
                r.m_min, r.m_max, r.checked
            );
            if let Some(b) = &r.base_case {
                text.push_str(&format!("\nbase case: {b}"));
            }
            Ok(Output {
                text,
                json: json!({ "report": r, "holds": r.holds(), "verdict": verdict }),
                csv: format!(
                    "m_min,m_max,checked,holds\n{},{},{},{}\n",
                    r.m_min,
                    r.m_max,
                    r.checked,
                    r.holds()
                ),
                undecided: false,
            })
        }
        Command::Perfect { count, bases } => {
            let ctx = ctx_for(global)?;
            let r = lucas_ending_check(count, &bases, &ctx.tables)?;
            let mut text = format!(
                "first {count} even perfect numbers: endings {}\n",
                if r.holds { "ok" } else { "VIOLATED" }
            );
            let mut csv = String::from("value,ending,ok\n");
            for row in &r.rows {
                let v = row.value.to_string();
                let short = if v.len() > 24 {
                    format!("{}...{} ({} digits)", &v[..8], &v[v.len() - 8..], v.len())
                } else {
                    v.clone()
                };
                text.push_str(&format!(
                    "  {short:<36} {:02} {}\n",
                    row.ending,
                    if row.ok { "ok" } else { "BAD" }
                ));
                csv.push_str(&format!("{v},{},{}\n", row.ending, row.ok));
            }
            for (b, m) in bases.iter().zip(&r.minimal_sets) {
                text.push_str(&format!("M base {b}: {m}\n"));
            }
            for a in &r.assumptions {
                text.push_str(&format!("assuming: {a}\n"));
            }
            Ok(Output {
                text,
                json: serde_json::to_value(&r)?,
                csv,
                undecided: false,
            })
        }
        Command::Experiment {
            kind,
            s,
            t,
            base,
            bound,
        } => {
            let k: ExperimentKind = kind.parse()?;
            let v = set_algebra_experiment(
                &ctx_for(global)?,
                k,
                &parse_spec(&s)?,
                &parse_spec(&t)?,
                base,
                bound,
            )?;
            Ok(Output {
                text: v.to_string(),
                json: serde_json::to_value(&v)?,
                csv: format!(
                    "side,elements\nlhs,{}\nrhs,{}\n",
                    v.lhs.join(" "),
                    v.rhs.join(" ")
                ),
                undecided: false,
            })
        }
    }
}

fn write_atomic(path: &Path, data: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(data.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn describe(err: &Error, args: &[OsString]) -> String {
    let mut msg = format!("error: {err}");
    // point at the offending character of a set expression
    if let Error::Parse { position, .. } = err {
        let texts: Vec<String> = args
            .iter()
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        let spec = texts
            .windows(2)
            .find(|w| matches!(w[0].as_str(), "--set" | "--kind" | "--s" | "--t"))
            .map(|w| w[1].clone());
        if let Some(s) = spec {
            msg.push_str(&format!(
                "\n  {s}\n  {}^",
                " ".repeat((*position).min(s.len()))
            ));
        }
    }
    msg
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn run_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    1
                }
            };
        }
    };
    let global = cli.global.clone();
    let result = execute(&global, cli.command).and_then(|out| {
        let text = out.render(global.format);
        match &global.output {
            Some(p) => write_atomic(p, &text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(out.undecided)
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 2,
        Err(e) => {
            let _ = writeln!(stderr, "{}", describe(&e, &args));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        let mut full = vec![
            "minset".to_string(),
            "--data-dir".into(),
            data.display().to_string(),
        ];
        full.extend(args.iter().map(|s| s.to_string()));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_from(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn compute_examples() {
        let (code, out, _) = run(&["compute", "--set", "qr:6", "--exact"]);
        assert_eq!(code, 0);
        assert!(out.contains("elements (15)"), "{out}");
        assert!(out.contains("mode: ExactAutomatic"));
        let (code, out, _) = run(&[
            "compute", "--set", "primes", "--base", "2", "--bound", "100", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "digits,value,base\n10,2,2\n11,3,2\n");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&["compute", "--set", "primes"]).0, 1);
        assert_eq!(run(&["frobnicate"]).0, 1);
        let (code, _, err) = run(&["compute", "--set", "primes & qr:", "--bound", "10"]);
        assert_eq!(code, 1);
        assert!(err.contains('^'), "{err}");
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn oracle_and_conjecture() {
        let (code, out, _) = run(&["oracle", "--kind", "totient", "--n", "990"]);
        assert_eq!(code, 0);
        assert!(out.contains("yes (x=991)"), "{out}");
        let (code, out, _) = run(&["conjecture", "pow2", "--max-exp", "200"]);
        assert_eq!(code, 0);
        assert!(out.contains("conjecture holds up to bound"));
    }

    #[test]
    fn undecided_exits_two() {
        let (code, out, _) = run(&[
            "verify",
            "--set",
            "totient",
            "--candidate",
            "1,2,4,6,8,30,70,500,900,990,5590,9550",
            "--family-expansions",
            "4",
        ]);
        assert_eq!(code, 2, "{out}");
        assert!(out.contains("Undecided"));
    }

    #[test]
    fn candidate_parsing() {
        let a = parse_candidate("1, 2 3,70", 10).unwrap();
        assert_eq!(a.len(), 4);
        assert!(parse_candidate("1,11", 10).is_err());
    }
}
