//! Command-line front end.
//!
//! Exit codes: 0 success (or not applicable), 1 a checked property or
//! theorem failed, 2 unreadable or malformed input, 3 input inconsistent
//! with the domain, 4 an enumeration budget was exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::characters::{AnonVector, CharError, CharKind, CharValue, Image};
use crate::guard::{Guard, GuardError};
use crate::io::{self, IoError, ScfFile};
use crate::oracle::theorems::{check_theorem, Theorem, TheoremError, TheoremReport, Verdict};
use crate::oracle::{Oracle, OracleError, Property};
use crate::order::OrderError;
use crate::prefs::Domain;
use crate::rules::{enumerate_rules, extract_rule, quota_rule, CanonicalRule, RuleError, ScfTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "charrule", version, about = "Non-manipulable two-valued social choice rules")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// The two alternatives playing (a, b), e.g. `--pair a,b`.
    #[arg(long, global = true, value_parser = parse_pair_arg)]
    pub pair: Option<PairArg>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PairArg(pub [String; 2]);

fn parse_pair_arg(s: &str) -> Result<PairArg, String> {
    match s.split(',').map(str::trim).collect::<Vec<_>>().as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok(PairArg([a.to_string(), b.to_string()])),
        _ => Err(format!("expected two labels `a,b`, got `{s}`")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a rule on profiles or character values.
    Eval {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        rule: PathBuf,
        /// File with a list of profiles (default: every domain profile).
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// A character value as JSON, e.g. `[3,3,1,4]`. Repeatable.
        #[arg(long = "value")]
        values: Vec<String>,
    },
    /// Check properties of a rule or table.
    Check {
        #[arg(long)]
        domain: PathBuf,
        /// Rule file or table file.
        #[arg(long)]
        scf: PathBuf,
        /// wgsp, sgsp, apr, isp, almost-monotone, anonymous (default wgsp).
        #[arg(long = "property", value_delimiter = ',')]
        properties: Vec<String>,
    },
    /// List every rule of a class.
    Enumerate {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_enum)]
        class: RuleClass,
    },
    /// Dump a character image poset.
    Poset {
        #[arg(long)]
        domain: PathBuf,
        /// general, anon, bi, strict or strong.
        #[arg(long = "char")]
        kind: String,
        /// Also list every antichain.
        #[arg(long)]
        antichains: bool,
    },
    /// Run theorem checks from a suite file or a single instance.
    VerifyTheorems {
        /// Suite file listing theorem/domain checks.
        #[arg(long, conflicts_with_all = ["theorem", "domain"])]
        suite: Option<PathBuf>,
        /// Theorem id, e.g. `soc-bijection`.
        #[arg(long, requires = "domain")]
        theorem: Option<String>,
        /// Domain file for a single `--theorem` check.
        #[arg(long, requires = "theorem")]
        domain: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleClass {
    Wgsp,
    WgspAnon,
    Sgsp,
    Quota,
    Committee,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match &e {
            IoError::Read { .. } | IoError::Schema(_) => EXIT_SCHEMA,
            IoError::Validation(_) => EXIT_VALIDATION,
            IoError::Guard(_) => EXIT_GUARD,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn guard_failure(g: &GuardError) -> Failure {
    Failure {
        code: EXIT_GUARD,
        message: format!("{g} (raise the budget with {})", crate::guard::GUARD_ENV),
    }
}

impl From<GuardError> for Failure {
    fn from(g: GuardError) -> Self {
        guard_failure(&g)
    }
}

impl From<RuleError> for Failure {
    fn from(e: RuleError) -> Self {
        match &e {
            RuleError::Guard(g)
            | RuleError::Char(CharError::Guard(g))
            | RuleError::Order(OrderError::Guard(g)) => guard_failure(g),
            _ => Failure {
                code: EXIT_VALIDATION,
                message: e.to_string(),
            },
        }
    }
}

impl From<CharError> for Failure {
    fn from(e: CharError) -> Self {
        RuleError::from(e).into()
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match &e {
            OracleError::Guard(g) => guard_failure(g),
            _ => Failure {
                code: EXIT_VALIDATION,
                message: e.to_string(),
            },
        }
    }
}

impl From<TheoremError> for Failure {
    fn from(e: TheoremError) -> Self {
        match e {
            TheoremError::Oracle(o) => o.into(),
            TheoremError::Rule(r) => r.into(),
            TheoremError::Unknown(_) => Failure {
                code: EXIT_SCHEMA,
                message: e.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_SCHEMA,
            message: e.to_string(),
        }
    }
}

struct Ctx {
    json: bool,
    pair: Option<[String; 2]>,
    guard: Guard,
    out: Vec<u8>,
}

impl Ctx {
    fn line(&mut self, s: impl AsRef<str>) {
        self.out.extend_from_slice(s.as_ref().as_bytes());
        self.out.push(b'\n');
    }

    fn record(&mut self, v: &Value) {
        let s = v.to_string();
        self.line(s);
    }

    fn domain(&self, path: &Path) -> Result<Arc<Domain>, Failure> {
        Ok(Arc::new(io::load_domain(path, self.pair.as_ref())?))
    }
}

/// Parses `args` and runs the command, writing results to `stdout` (or the
/// `--out` file) and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    let pair = cli.global.pair.clone().map(|p| p.0);
    let mut ctx = Ctx {
        json: cli.global.json,
        pair,
        guard: Guard::from_env(),
        out: Vec::new(),
    };
    let mut notices: Vec<u8> = Vec::new();
    let result = match cli.global.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut ctx, &mut notices)),
            Err(e) => Err(Failure {
                code: EXIT_SCHEMA,
                message: e.to_string(),
            }),
        },
        None => dispatch(&cli.command, &mut ctx, &mut notices),
    };
    let _ = stderr.write_all(&notices);
    let code = match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &ctx.out),
        None => stdout.write_all(&ctx.out),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return code.max(EXIT_SCHEMA);
    }
    code
}

/// Entry point of the `charrule` binary.
pub fn main() -> ! {
    let code = run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code)
}

fn dispatch(cmd: &Command, ctx: &mut Ctx, stderr: &mut Vec<u8>) -> Result<i32, Failure> {
    match cmd {
        Command::Eval {
            domain,
            rule,
            profiles,
            values,
        } => cmd_eval(ctx, domain, rule, profiles.as_deref(), values),
        Command::Check {
            domain,
            scf,
            properties,
        } => cmd_check(ctx, domain, scf, properties, stderr),
        Command::Enumerate { domain, class } => cmd_enumerate(ctx, domain, *class),
        Command::Poset {
            domain,
            kind,
            antichains,
        } => cmd_poset(ctx, domain, kind, *antichains),
        Command::VerifyTheorems {
            suite,
            theorem,
            domain,
        } => cmd_verify(ctx, suite.as_deref(), theorem.as_deref(), domain.as_deref(), stderr),
    }
}

fn load_rule(ctx: &Ctx, domain: &Arc<Domain>, path: &Path) -> Result<CanonicalRule, Failure> {
    Ok(io::parse_rule(&io::read_file(path)?, Arc::clone(domain), &ctx.guard)?)
}

fn cmd_eval(
    ctx: &mut Ctx,
    domain_path: &Path,
    rule_path: &Path,
    profiles: Option<&Path>,
    values: &[String],
) -> Result<i32, Failure> {
    let domain = ctx.domain(domain_path)?;
    let rule = load_rule(ctx, &domain, rule_path)?;
    let character = rule.image().character().clone();
    let label = |x| domain.alternative_label(x).to_string();
    if !values.is_empty() {
        for (k, text) in values.iter().enumerate() {
            let v: Value = serde_json::from_str(text)
                .map_err(|e| Failure::from(IoError::Schema(format!("value {k}: {e}"))))?;
            let x = io::parse_char_value(&domain, character.kind(), &v)?;
            if let CharValue::Anon(AnonVector(k)) = &x {
                let want = character.indiff_prefs().len() + 1;
                if k.len() != want {
                    return Err(IoError::Validation(format!(
                        "count vector has {} entries, expected {want}",
                        k.len()
                    ))
                    .into());
                }
            }
            let a = rule.minimal_values().any(|m| character.leq(m, &x));
            let choice = if a { rule.pair().a } else { rule.pair().b };
            if ctx.json {
                let rec = json!({
                    "value": io::char_value_json(&domain, &x),
                    "choice": label(choice),
                });
                ctx.record(&rec);
            } else {
                let shown = io::format_char_value(&domain, &x);
                ctx.line(format!("{shown}\t{}", label(choice)));
            }
        }
        return Ok(EXIT_OK);
    }
    let list: Vec<(Option<u64>, crate::prefs::Profile)> = match profiles {
        Some(p) => io::parse_profiles(&domain, &io::read_file(p)?)?
            .into_iter()
            .map(|p| (domain.index_of(&p), p))
            .collect(),
        None => domain
            .materialize(&ctx.guard)?
            .into_iter()
            .enumerate()
            .map(|(i, p)| (Some(i as u64), p))
            .collect(),
    };
    for (k, (idx, p)) in list.iter().enumerate() {
        if idx.is_none() {
            return Err(IoError::Validation(format!(
                "profile {k} [{}] is not in the domain",
                io::format_profile(&domain, p)
            ))
            .into());
        }
        let x = character.of(p)?;
        let choice = rule.eval(p)?;
        let id = idx.map(|i| format!("#{i}")).unwrap_or_default();
        if ctx.json {
            let rec = json!({
                "profile": io::profile_json(&domain, p),
                "index": idx,
                "value": io::char_value_json(&domain, &x),
                "choice": label(choice),
            });
            ctx.record(&rec);
        } else {
            ctx.line(format!(
                "{id}\t{}\t{}\t{}",
                io::format_profile(&domain, p),
                io::format_char_value(&domain, &x),
                label(choice)
            ));
        }
    }
    Ok(EXIT_OK)
}

fn to_table(ctx: &Ctx, scf: ScfFile) -> Result<ScfTable, Failure> {
    match scf {
        ScfFile::Rule(r) => Ok(r.to_table(&ctx.guard)?),
        ScfFile::Table(t) => Ok(t),
    }
}

fn cmd_check(
    ctx: &mut Ctx,
    domain_path: &Path,
    scf_path: &Path,
    properties: &[String],
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let domain = ctx.domain(domain_path)?;
    let props: Vec<Property> = if properties.is_empty() {
        vec![Property::Wgsp]
    } else {
        properties
            .iter()
            .map(|s| {
                s.parse::<Property>().map_err(|e| Failure {
                    code: EXIT_SCHEMA,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?
    };
    let scf = io::parse_scf(&io::read_file(scf_path)?, Arc::clone(&domain), &ctx.guard)?;
    let table = to_table(ctx, scf)?;
    let oracle = Oracle::new(Arc::clone(&domain), &ctx.guard)?;
    let mut code = EXIT_OK;
    for p in props {
        if p == Property::Anonymous && !domain.is_permutation_closed() {
            let _ = writeln!(stderr, "notice: anonymous is not applicable, the domain is not closed under permutations");
            if ctx.json {
                ctx.record(&json!({ "property": p, "verdict": "not-applicable" }));
            } else {
                ctx.line(format!("{:<16}not applicable", p.name()));
            }
            continue;
        }
        let w = oracle.check(p, &table)?;
        if w.is_some() {
            code = EXIT_FAILED;
        }
        if ctx.json {
            let rec = json!({
                "property": p,
                "verdict": if w.is_some() { "fail" } else { "pass" },
                "witness": w.map(|w| io::witness_json(&domain, &w)),
            });
            ctx.record(&rec);
        } else {
            match w {
                None => ctx.line(format!("{:<16}pass", p.name())),
                Some(w) => ctx.line(format!(
                    "{:<16}fail: {}",
                    p.name(),
                    io::describe_witness(&domain, &w)
                )),
            }
        }
    }
    // the table as a canonical rule, when it is one
    let image = Arc::new(Image::of_domain(&domain, CharKind::General, &ctx.guard)?);
    match extract_rule(&table, image) {
        Ok(r) => {
            if ctx.json {
                ctx.record(&json!({ "canonical": io::rule_json(&r) }));
            } else {
                ctx.line(format!(
                    "{:<16}{}",
                    "canonical",
                    Value::Array(io::rule_json(&r)["minimals"].as_array().cloned().unwrap_or_default())
                ));
            }
        }
        Err(RuleError::NotMonotone { stronger, weaker }) => {
            let w = crate::oracle::Witness::Monotonicity { stronger, weaker };
            if ctx.json {
                ctx.record(&json!({ "canonical": null, "witness": io::witness_json(&domain, &w) }));
            } else {
                ctx.line(format!("{:<16}none: {}", "canonical", io::describe_witness(&domain, &w)));
            }
        }
        Err(e) => return Err(e.into()),
    }
    Ok(code)
}

fn cmd_enumerate(ctx: &mut Ctx, domain_path: &Path, class: RuleClass) -> Result<i32, Failure> {
    let domain = ctx.domain(domain_path)?;
    let rules: Vec<CanonicalRule> = match class {
        RuleClass::Quota => (0..=domain.num_agents() + 1)
            .map(|q| quota_rule(q, Arc::clone(&domain), &ctx.guard))
            .collect::<Result<_, _>>()?,
        _ => {
            let kind = match class {
                RuleClass::Wgsp => CharKind::General,
                RuleClass::WgspAnon => {
                    if !(domain.is_cartesian() && domain.is_permutation_closed()) {
                        return Err(IoError::Validation(
                            "anonymous enumeration needs an identical product domain".into(),
                        )
                        .into());
                    }
                    CharKind::Anon
                }
                RuleClass::Sgsp => {
                    if !domain.satisfies_minimal_assumption(domain.pair()) {
                        return Err(IoError::Validation(
                            "the domain fails the minimal assumption".into(),
                        )
                        .into());
                    }
                    CharKind::Strong
                }
                RuleClass::Committee => CharKind::Strict,
                RuleClass::Quota => unreachable!(),
            };
            let image = Arc::new(Image::of_domain(&domain, kind, &ctx.guard)?);
            enumerate_rules(&image, &domain, &ctx.guard)?
        }
    };
    for r in &rules {
        let v = io::rule_json(r);
        if ctx.json {
            ctx.record(&v);
        } else {
            ctx.line(v["minimals"].to_string());
        }
    }
    if ctx.json {
        ctx.record(&json!({ "count": rules.len() }));
    } else {
        ctx.line(format!("count {}", rules.len()));
    }
    Ok(EXIT_OK)
}

fn cmd_poset(ctx: &mut Ctx, domain_path: &Path, kind: &str, antichains: bool) -> Result<i32, Failure> {
    let domain = ctx.domain(domain_path)?;
    let kind: CharKind = kind.parse().map_err(|e: CharError| Failure {
        code: EXIT_SCHEMA,
        message: e.to_string(),
    })?;
    let image = Image::of_domain(&domain, kind, &ctx.guard)?;
    let poset = image.poset();
    let edges = poset.hasse_edges();
    let listed = if antichains {
        Some(
            poset
                .enumerate_antichains(ctx.guard.max_antichains)
                .map_err(RuleError::from)?,
        )
    } else {
        None
    };
    if ctx.json {
        let rec = json!({
            "char": kind.name(),
            "elements": image.values().iter().map(|x| io::char_value_json(&domain, x)).collect::<Vec<_>>(),
            "hasse": edges,
            "antichains": listed.as_ref().map(|l| l.iter().map(|a| a.members().to_vec()).collect::<Vec<_>>()),
        });
        ctx.record(&rec);
        return Ok(EXIT_OK);
    }
    for (i, x) in image.values().iter().enumerate() {
        ctx.line(format!("{i}\t{}", io::char_value_json(&domain, x)));
    }
    ctx.line(format!("hasse {}", edges.len()));
    for (i, j) in &edges {
        ctx.line(format!("{i} < {j}"));
    }
    if let Some(list) = listed {
        ctx.line(format!("antichains {}", list.len()));
        for a in &list {
            let parts: Vec<String> = a.members().iter().map(usize::to_string).collect();
            ctx.line(format!("[{}]", parts.join(",")));
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(
    ctx: &mut Ctx,
    suite: Option<&Path>,
    theorem: Option<&str>,
    domain: Option<&Path>,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let checks: Vec<(String, PathBuf, Option<[String; 2]>)> = match (suite, theorem, domain) {
        (Some(s), _, _) => io::load_suite(s)?
            .checks
            .into_iter()
            .map(|e| (e.theorem, e.domain, e.pair))
            .collect(),
        (None, Some(t), Some(d)) => vec![(t.to_string(), d.to_path_buf(), None)],
        _ => {
            return Err(Failure {
                code: EXIT_SCHEMA,
                message: "give --suite or both --theorem and --domain".into(),
            })
        }
    };
    let mut reports: Vec<TheoremReport> = Vec::with_capacity(checks.len());
    for (id, path, pair) in &checks {
        let theorem: Theorem = id.parse()?;
        let pair = pair.as_ref().or(ctx.pair.as_ref());
        let domain = Arc::new(io::load_domain(path, pair)?);
        reports.push(check_theorem(theorem, domain, &ctx.guard)?);
    }
    let failed = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let skipped = reports
        .iter()
        .filter(|r| r.verdict == Verdict::NotApplicable)
        .count();
    if ctx.json {
        for r in &reports {
            ctx.record(&serde_json::to_value(r).expect("report serializes"));
        }
        ctx.record(&json!({ "checks": reports.len(), "failed": failed, "not_applicable": skipped }));
    } else {
        let width = reports.iter().map(|r| r.theorem.id().len()).max().unwrap_or(0);
        for r in &reports {
            let verdict = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::NotApplicable => "n/a",
            };
            ctx.line(format!(
                "{:<width$}  {:<4}  {}  |  {}",
                r.theorem.id(),
                verdict,
                r.instance,
                r.observed
            ));
            for w in &r.witnesses {
                ctx.line(format!("    witness: {w}"));
            }
        }
        ctx.line(format!(
            "{} checks, {failed} failed, {skipped} not applicable",
            reports.len()
        ));
    }
    for r in reports.iter().filter(|r| r.verdict == Verdict::NotApplicable) {
        let _ = writeln!(stderr, "notice: {} not applicable: {}", r.theorem, r.observed);
    }
    Ok(if failed > 0 { EXIT_FAILED } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn missing_subcommand_is_a_schema_error() {
        let (code, _, _) = run_str(&["charrule"]);
        assert_eq!(code, EXIT_SCHEMA);
    }

    #[test]
    fn missing_file_is_a_schema_error() {
        let (code, _, err) = run_str(&["charrule", "enumerate", "--domain", "/nonexistent.json", "--class", "wgsp"]);
        assert_eq!(code, EXIT_SCHEMA);
        assert!(err.contains("nonexistent"));
    }
}
