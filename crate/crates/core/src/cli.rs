//! Command-line surface: `deal`, `reconstruct`, `analyze`, `audit`.
//!
//! Exit codes:
//!
//! | code | meaning                                                   |
//! |------|-----------------------------------------------------------|
//! | 0    | success (shares written, secret recovered, audit passed)  |
//! | 1    | audit found a violation                                   |
//! | 2    | bad input: parse failure, invalid parameters, collisions  |
//! | 3    | reconstruction denied: coalition not qualified           |
//! | 4    | reconstruction denied: authentication failure            |
//! | 5    | reconstruction denied: inconsistent points               |
//!
//! Input errors are reported on stderr as a single JSON object with an
//! `error` code and a `message`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::combiner::{
    authenticate_packet, bruteforce_cost, reconstruct, Outcome, ReconstructionReport,
    SubmissionBundle,
};
use crate::dealer::{build_polynomial, deal, split_secret, DealError, SecretVector};
use crate::field::{parse_decimal, FieldError, Modulus};
use crate::io::{
    emit_report, emit_roster, emit_share, hex_id, parse_chart, parse_config, parse_share,
    FormatError, ReportDocument, RngMode, RosterDocument, SchemeConfig, ShareDocument,
};
use crate::orgchart::{
    average_information_rate, enumerate_minimal_with, information_rate, level_cap, ChartError,
    OrgChart, DEFAULT_ENUMERATION_LIMIT,
};
use crate::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNQUALIFIED: i32 = 3;
pub const EXIT_AUTHENTICATION: i32 = 4;
pub const EXIT_INCONSISTENT: i32 = 5;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "HSSS_CONFIG";

pub const SEEDED_BANNER: &str =
    "WARNING: seeded randomness in use. Shares are reproducible. NOT FOR PRODUCTION.";

#[derive(Debug, Parser)]
#[command(
    name = "hsss",
    version,
    about = "Hierarchical secret sharing over prime fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a secret and write one share file per participant plus a roster.
    Deal(DealArgs),
    /// Rebuild the secret from a coalition's share files.
    Reconstruct(ReconstructArgs),
    /// List minimal qualified coalitions and efficiency metrics for a chart.
    Analyze(AnalyzeArgs),
    /// Check share files against the roster without reconstructing.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct DealArgs {
    #[arg(long, env = CONFIG_ENV)]
    pub config: PathBuf,
    #[arg(long)]
    pub chart: PathBuf,
    /// Scalar secret K < 2^secret_bits, split into components whose XOR is K.
    #[arg(long, conflicts_with = "secret_vector")]
    pub secret: Option<String>,
    /// Explicit components k1,...,kh (comma separated, decimal).
    #[arg(long, value_delimiter = ',')]
    pub secret_vector: Option<Vec<String>>,
    /// Explicit blinding constant a0; drawn at random when omitted.
    #[arg(long)]
    pub blinding: Option<String>,
    /// Deterministic ChaCha20 seed. Overrides the config's rng mode.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long, env = CONFIG_ENV)]
    pub config: PathBuf,
    #[arg(long)]
    pub chart: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub shares: Vec<PathBuf>,
    /// Print the JSON report document instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub chart: PathBuf,
    /// Modulus for the brute-force estimate (decimal).
    #[arg(long)]
    pub q: Option<String>,
    /// Exhaustive-search ceiling on the participant count.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    pub limit: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub chart: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub shares: Vec<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Deal(#[from] DealError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Stable machine-readable reason.
    pub fn code(&self) -> &'static str {
        fn field_code(e: &FieldError) -> &'static str {
            match e {
                FieldError::NotPrime(_) => "bad-prime",
                FieldError::ModulusTooSmall(_) => "modulus-too-small",
                FieldError::ModulusMismatch => "modulus-mismatch",
                _ => "invalid-number",
            }
        }
        match self {
            CliError::Read { .. } | CliError::Write { .. } => "io",
            CliError::Format { source, .. } => match source {
                FormatError::Json(_) => "parse",
                FormatError::Field(e) => field_code(e),
                FormatError::Chart(_) => "invalid-chart",
                FormatError::Invalid(_) => "invalid-parameters",
            },
            CliError::Deal(e) => match e {
                DealError::Collision(_) => "coordinate-collision",
                DealError::ModulusFloor { .. } => "modulus-floor",
                DealError::Field(e) => field_code(e),
                _ => "invalid-secret",
            },
            CliError::Chart(ChartError::EnumerationLimit { .. }) => "enumeration-limit",
            CliError::Chart(_) => "invalid-chart",
            CliError::Field(e) => field_code(e),
            CliError::Usage(_) => "usage",
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_chart(path: &Path) -> Result<OrgChart, CliError> {
    with_path(path, parse_chart(&read(path)?))
}

pub fn load_config(path: &Path) -> Result<SchemeConfig, CliError> {
    with_path(path, parse_config(&read(path)?))
}

pub fn load_share(path: &Path) -> Result<ShareDocument, CliError> {
    with_path(path, parse_share(&read(path)?))
}

fn check_heights(config: &SchemeConfig, chart: &OrgChart) -> Result<(), CliError> {
    if config.height != chart.height() {
        return Err(CliError::Usage(format!(
            "config height {} differs from chart height {}",
            config.height,
            chart.height()
        )));
    }
    Ok(())
}

/// How the dealer obtains `k_1..k_h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecretInput {
    Scalar(BigUint),
    Vector {
        components: Vec<BigUint>,
        blinding: Option<BigUint>,
    },
}

/// Everything `deal` produces, before anything touches the disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DealOutput {
    pub scheme_id: String,
    pub secret: BigUint,
    pub shares: Vec<ShareDocument>,
    pub roster: RosterDocument,
}

fn deal_with_rng<R: RngCore + ?Sized>(
    config: &SchemeConfig,
    chart: &OrgChart,
    secret: &SecretInput,
    rng: &mut R,
) -> Result<DealOutput, CliError> {
    check_heights(config, chart)?;
    let q = &config.modulus;
    let vector = match secret {
        SecretInput::Scalar(k) => split_secret(k, config.height, q, config.secret_bits, rng)?,
        SecretInput::Vector {
            components,
            blinding,
        } => {
            if components.len() != config.height as usize {
                return Err(CliError::Usage(format!(
                    "expected {} secret components, got {}",
                    config.height,
                    components.len()
                )));
            }
            let components = components
                .iter()
                .map(|k| q.residue(k.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            let blinding = match blinding {
                Some(a0) => q.residue(a0.clone())?,
                None => q.random_element(rng),
            };
            SecretVector::new(components, blinding)?
        }
    };
    let mut id = [0u8; 16];
    rng.fill_bytes(&mut id);
    let scheme_id = hex_id(&id);

    let packets = deal(chart, &build_polynomial(&vector))?;
    let shares = packets
        .iter()
        .map(|p| ShareDocument::from_packet(&scheme_id, config.height, p))
        .collect();
    Ok(DealOutput {
        roster: RosterDocument {
            scheme_id: scheme_id.clone(),
            q: q.to_string(),
            h: config.height,
            participants: chart.participants().to_vec(),
        },
        scheme_id,
        secret: vector.xor_secret().clone(),
        shares,
    })
}

/// Runs the dealer with the configured randomness source.
pub fn cmd_deal(
    config: &SchemeConfig,
    chart: &OrgChart,
    secret: &SecretInput,
) -> Result<DealOutput, CliError> {
    match config.rng {
        RngMode::Secure => deal_with_rng(config, chart, secret, &mut rand::rngs::OsRng),
        RngMode::Seeded { seed } => {
            deal_with_rng(config, chart, secret, &mut ChaCha20Rng::seed_from_u64(seed))
        }
    }
}

pub fn share_file_name(login: u64) -> String {
    format!("share-{login}.json")
}

/// Writes `share-<login>.json` for every participant and `roster.json`.
pub fn write_deal(output: &DealOutput, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for share in &output.shares {
        let path = out_dir.join(share_file_name(share.login));
        write(&path, &emit_share(share))?;
        written.push(path);
    }
    let roster = out_dir.join("roster.json");
    write(&roster, &emit_roster(&output.roster))?;
    written.push(roster);
    Ok(written)
}

/// Authenticates and reconstructs from decoded share documents.
pub fn cmd_reconstruct(
    config: &SchemeConfig,
    chart: &OrgChart,
    shares: &[ShareDocument],
) -> Result<ReconstructionReport, CliError> {
    check_heights(config, chart)?;
    let mut packets = Vec::with_capacity(shares.len());
    for doc in shares {
        let packet = if doc.q == config.modulus.to_string() {
            doc.to_packet_under(&config.modulus)
        } else {
            doc.to_packet()
        };
        packets.push(packet.map_err(|source| CliError::Format {
            path: PathBuf::from(share_file_name(doc.login)),
            source,
        })?);
    }
    let bundle = SubmissionBundle::new(packets).map_err(|e| CliError::Usage(e.to_string()))?;

    let report = reconstruct(&bundle, chart, &config.modulus);
    if report.outcome == Outcome::DeniedAuthentication {
        return Ok(report);
    }
    let mut ids: Vec<&str> = shares.iter().map(|s| s.scheme_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > 1 || shares.iter().any(|s| s.h != config.height) {
        return Ok(ReconstructionReport {
            outcome: Outcome::DeniedInconsistent,
            secret: None,
            coefficients: None,
            diagnostics: report.diagnostics,
            detail: format!("shares come from different schemes: {}", ids.join(", ")),
        });
    }
    Ok(report)
}

pub fn outcome_exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Recovered => EXIT_OK,
        Outcome::DeniedUnqualified => EXIT_UNQUALIFIED,
        Outcome::DeniedAuthentication => EXIT_AUTHENTICATION,
        Outcome::DeniedInconsistent => EXIT_INCONSISTENT,
    }
}

pub fn render_report(report: &ReconstructionReport) -> String {
    let mut out = format!("outcome: {}\n", report.outcome);
    if report.outcome == Outcome::DeniedAuthentication {
        out.push_str("ATTACK ATTEMPT: authentication error, reconstruction not attempted\n");
    }
    out.push_str(&format!("detail: {}\n", report.detail));
    if let Some(k) = &report.secret {
        out.push_str(&format!("secret K (decimal): {k}\n"));
        out.push_str(&format!("secret K (binary):  {k:b}\n"));
    }
    if let Some(cs) = &report.coefficients {
        let names = cs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("a0 = {c}")
                } else {
                    format!("k{i} = {c}")
                }
            })
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!("coefficients: {names}\n"));
    }
    for v in &report.diagnostics {
        let status = if v.passed() { "ok" } else { "FAILED" };
        out.push_str(&format!("share ({}, {}): {status}\n", v.login, v.level));
        for violation in &v.violations {
            out.push_str(&format!("  {violation}\n"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostSummary {
    pub q: String,
    pub exponent: u32,
    pub combinations: String,
    pub bits: u64,
}

/// Chart analysis: level caps, minimal coalitions, rates, outsider cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub height: u32,
    pub participants: usize,
    /// `(level, members at that level, cap)`.
    pub level_caps: Vec<(u32, usize, u32)>,
    /// Logins of each minimal qualified coalition, highest level first.
    pub minimal_coalitions: Vec<Vec<u64>>,
    pub information_rate: String,
    pub average_information_rate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bruteforce: Option<CostSummary>,
}

pub fn cmd_analyze(
    chart: &OrgChart,
    modulus: Option<&Modulus>,
    limit: usize,
) -> Result<Analysis, CliError> {
    let h = chart.height();
    let minimal = enumerate_minimal_with(chart, limit, Execution::default())?;
    Ok(Analysis {
        height: h,
        participants: chart.len(),
        level_caps: (1..=h)
            .map(|j| {
                let cap = level_cap(j, h).expect("1 <= j <= h");
                (j, chart.level_members(j).len(), cap)
            })
            .collect(),
        minimal_coalitions: minimal.iter().map(|c| c.logins()).collect(),
        information_rate: information_rate(chart).to_string(),
        average_information_rate: average_information_rate(chart).to_string(),
        bruteforce: modulus.map(|q| {
            let cost = bruteforce_cost(h, q);
            CostSummary {
                q: q.to_string(),
                exponent: h + 1,
                combinations: cost.combinations.to_string(),
                bits: cost.bits,
            }
        }),
    })
}

pub fn render_analysis(a: &Analysis, chart: &OrgChart) -> String {
    let mut out = format!(
        "height h = {}, participants n = {}\n",
        a.height, a.participants
    );
    out.push_str("level caps:\n");
    for (j, members, cap) in &a.level_caps {
        out.push_str(&format!(
            "  level {j}: {members} member(s), at most {cap} per coalition\n"
        ));
    }
    out.push_str(&format!(
        "minimal qualified coalitions ({}):\n",
        a.minimal_coalitions.len()
    ));
    for logins in &a.minimal_coalitions {
        let members: Vec<String> = logins
            .iter()
            .map(|&l| {
                let p = chart
                    .participant(l)
                    .expect("listed logins are on the roster");
                p.to_string()
            })
            .collect();
        out.push_str(&format!("  {{{}}}\n", members.join(", ")));
    }
    out.push_str(&format!("information rate: {}\n", a.information_rate));
    out.push_str(&format!(
        "average information rate: {}\n",
        a.average_information_rate
    ));
    if let Some(c) = &a.bruteforce {
        out.push_str(&format!(
            "brute-force cost: {}^{} = {} ({} bits)\n",
            c.q, c.exponent, c.combinations, c.bits
        ));
    }
    out
}

/// Verdict on one pair of an audited share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairAudit {
    pub index: usize,
    pub x: String,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShareAudit {
    pub login: u64,
    pub level: u32,
    /// Condition (iii).
    pub roster_passed: bool,
    pub roster_message: String,
    /// Condition (iv), one entry per pair.
    pub pairs: Vec<PairAudit>,
}

impl ShareAudit {
    pub fn passed(&self) -> bool {
        self.roster_passed && self.pairs.iter().all(|p| p.passed)
    }
}

pub fn cmd_audit(chart: &OrgChart, share: &ShareDocument) -> Result<ShareAudit, CliError> {
    use crate::combiner::Violation;

    let packet = share.to_packet().map_err(|source| CliError::Format {
        path: PathBuf::from(share_file_name(share.login)),
        source,
    })?;
    let verdict = authenticate_packet(&packet, chart);
    let roster_violation = verdict.violations.iter().find(|v| v.condition() == "iii");
    let divisor = BigUint::from(packet.login()) * BigUint::from(chart.height());
    let pairs = packet
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let failure = verdict.violations.iter().find(
                |v| matches!(v, Violation::Coordinate { index, .. } if *index == i + 1),
            );
            let message = match failure {
                Some(v) => v.to_string(),
                None => format!(
                    "condition (iv), pair {}: x = {} = 1 (mod {divisor}), floor(x/{divisor}) = {} <= {}",
                    i + 1,
                    p.x,
                    p.x.value() / &divisor,
                    packet.level()
                ),
            };
            PairAudit {
                index: i + 1,
                x: p.x.to_string(),
                passed: failure.is_none(),
                message,
            }
        })
        .collect();
    Ok(ShareAudit {
        login: packet.login(),
        level: packet.level(),
        roster_passed: roster_violation.is_none(),
        roster_message: match roster_violation {
            Some(v) => v.to_string(),
            None => format!(
                "condition (iii): login {} sits at level {}",
                packet.login(),
                packet.level()
            ),
        },
        pairs,
    })
}

pub fn render_audit(audit: &ShareAudit) -> String {
    let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
    let mut out = format!(
        "share ({}, {}): {}\n  [{}] {}\n",
        audit.login,
        audit.level,
        mark(audit.passed()),
        mark(audit.roster_passed),
        audit.roster_message
    );
    for p in &audit.pairs {
        out.push_str(&format!("  [{}] {}\n", mark(p.passed), p.message));
    }
    out
}

fn parse_number(s: &str) -> Result<BigUint, CliError> {
    Ok(parse_decimal(s.trim())?)
}

fn run_deal(args: &DealArgs) -> Result<i32, CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.rng = RngMode::Seeded { seed };
    }
    let chart = load_chart(&args.chart)?;
    let secret = match (&args.secret, &args.secret_vector) {
        (Some(k), None) => {
            if args.blinding.is_some() {
                return Err(CliError::Usage(
                    "--blinding only applies with --secret-vector".into(),
                ));
            }
            SecretInput::Scalar(parse_number(k)?)
        }
        (None, Some(ks)) => SecretInput::Vector {
            components: ks
                .iter()
                .map(|k| parse_number(k))
                .collect::<Result<_, _>>()?,
            blinding: args.blinding.as_deref().map(parse_number).transpose()?,
        },
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --secret or --secret-vector".into(),
            ))
        }
    };
    if matches!(config.rng, RngMode::Seeded { .. }) {
        eprintln!("{SEEDED_BANNER}");
    }
    let output = cmd_deal(&config, &chart, &secret)?;
    let written = write_deal(&output, &args.out_dir)?;
    println!("scheme {}", output.scheme_id);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn run_reconstruct(args: &ReconstructArgs) -> Result<i32, CliError> {
    let config = load_config(&args.config)?;
    let chart = load_chart(&args.chart)?;
    let shares = args
        .shares
        .iter()
        .map(|p| load_share(p))
        .collect::<Result<Vec<_>, _>>()?;
    let report = cmd_reconstruct(&config, &chart, &shares)?;
    if args.json {
        print!("{}", emit_report(&ReportDocument::from_report(&report)));
    } else {
        print!("{}", render_report(&report));
    }
    Ok(outcome_exit_code(report.outcome))
}

fn run_analyze(args: &AnalyzeArgs) -> Result<i32, CliError> {
    let chart = load_chart(&args.chart)?;
    let modulus = args.q.as_deref().map(Modulus::from_decimal).transpose()?;
    let analysis = cmd_analyze(&chart, modulus.as_ref(), args.limit)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&analysis).expect("analysis serializes")
        );
    } else {
        print!("{}", render_analysis(&analysis, &chart));
    }
    Ok(EXIT_OK)
}

fn run_audit(args: &AuditArgs) -> Result<i32, CliError> {
    let chart = load_chart(&args.chart)?;
    let mut all_passed = true;
    let mut audits = Vec::new();
    for path in &args.shares {
        let audit = cmd_audit(&chart, &load_share(path)?)?;
        all_passed &= audit.passed();
        audits.push(audit);
    }
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&audits).expect("audit serializes")
        );
    } else {
        for audit in &audits {
            print!("{}", render_audit(audit));
        }
    }
    Ok(if all_passed {
        EXIT_OK
    } else {
        EXIT_AUDIT_FAILED
    })
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Deal(args) => run_deal(args),
        Command::Reconstruct(args) => run_reconstruct(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Audit(args) => run_audit(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let reason = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{reason}");
            EXIT_INPUT
        }
    }
}
