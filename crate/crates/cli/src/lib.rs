//! Command-line front end for `stirval`.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 resource cap.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use stirval::cases::{classify, CaseReport};
use stirval::poles::{kimura_chain, KimuraChain};
use stirval::scan::{
    scan_conjecture_a2, scan_conjecture_stat, scan_open_question, verify, Grid, ScanReport,
    ScanSpec, ScanTarget, DEFAULT_BUDGET,
};
use stirval::stirling::stirling_valuation;
use stirval::theorems::{predict, Params, TheoremId, TheoremPrediction};
use stirval::{Error, Prime, StirlingKind, Valuation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "stirval",
    version,
    about = "p-adic valuations of Stirling numbers"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Entry {
    /// Kind of Stirling number: 1 (first, unsigned) or 2 (second).
    #[arg(long, default_value = "2")]
    pub kind: StirlingKind,
    #[arg(short)]
    pub p: u64,
    #[arg(short)]
    pub n: u64,
    #[arg(short)]
    pub k: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ScanOpts {
    /// Grid, e.g. `c=1..5,2;h=0..8` (ranges are inclusive).
    #[arg(long)]
    pub grid: String,
    /// Largest n handed to the exact oracle.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Valuation of one Stirling number.
    Val(Entry),
    /// Estimates, criteria and sharpness for one Stirling number.
    Classify(Entry),
    /// Maximum pole of B_degree^(order)(x) via the Kimura chain.
    Maxpole {
        #[arg(short)]
        p: u64,
        #[arg(long)]
        degree: u64,
        #[arg(long, allow_hyphen_values = true)]
        order: i64,
    },
    /// Closed-form prediction from the theorem registry.
    Predict {
        #[arg(long)]
        theorem: TheoremId,
        #[arg(short)]
        n: Option<u64>,
        #[arg(short)]
        k: Option<u64>,
        #[arg(short)]
        p: Option<u64>,
        #[arg(short)]
        a: Option<u64>,
        /// b, or the bottom segment B for arnieplus/arniex.
        #[arg(short)]
        b: Option<u64>,
        #[arg(short)]
        c: Option<u64>,
        #[arg(long = "h")]
        h: Option<u64>,
        #[arg(long = "L")]
        l: Option<u64>,
        #[arg(long = "u")]
        u: Option<u64>,
    },
    /// Check a theorem (or `cases`) against the oracle over a grid.
    Verify {
        #[arg(long)]
        theorem: ScanTarget,
        #[command(flatten)]
        scan: ScanOpts,
    },
    /// Fraction of k matching the statistical conjecture, per h.
    ScanStat {
        #[arg(short)]
        c: u64,
        #[command(flatten)]
        scan: ScanOpts,
    },
    /// Counterexample search for the a = 3 mod 4 conjecture.
    ScanA2 {
        #[command(flatten)]
        scan: ScanOpts,
    },
    /// Counterexample search for the congruence question on AMZ cases.
    ScanOpen {
        #[command(flatten)]
        scan: ScanOpts,
    },
}

/// Output of `val`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValRecord {
    pub kind: StirlingKind,
    pub p: Prime,
    pub n: u64,
    pub k: u64,
    pub valuation: Valuation,
}

/// Output of `maxpole`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxPoleRecord {
    pub degree: u64,
    pub order: i64,
    pub max_pole: u64,
    pub first_pole_degree: u64,
    pub chain: KimuraChain,
}

#[derive(Serialize)]
struct CaseCsvRow<'a> {
    kind: StirlingKind,
    p: Prime,
    n: u64,
    k: u64,
    actual: Valuation,
    mz: &'a str,
    smz: &'a str,
    amz: i64,
    samz: i64,
    mzc: bool,
    smzc: bool,
    amzc: bool,
    samzc: bool,
    mzc_criterion: String,
    smzc_criterion: String,
    amzc_criterion: String,
    samzc_criterion: String,
    agree: bool,
}

#[derive(Serialize)]
struct MaxPoleCsvRow {
    p: Prime,
    degree: u64,
    order: i64,
    max_pole: u64,
    first_pole_degree: u64,
    links: String,
}

#[derive(Serialize)]
struct ClaimCsvRow {
    theorem: TheoremId,
    applicable: bool,
    reason: String,
    target: String,
    predicted: String,
}

enum Failure {
    Lib(Error),
    Usage(String),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

/// Parse `args` (program name first) and run. Results go to `out`, errors
/// to `err`; the return value is the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Resource { .. } => EXIT_RESOURCE,
                _ => EXIT_DOMAIN,
            }
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn csv_rows<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn grid(text: &str) -> Result<Grid, Failure> {
    text.parse::<Grid>()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Val(e) => {
            let p = Prime::new(e.p)?;
            let v = stirling_valuation(e.n, e.k, p, e.kind)?;
            let rec = ValRecord {
                kind: e.kind,
                p,
                n: e.n,
                k: e.k,
                valuation: v,
            };
            match fmt {
                Format::Text => writeln!(out, "{v}")?,
                Format::Json => json(out, &rec)?,
                Format::Csv => csv_rows(out, &[rec])?,
            }
        }
        Command::Classify(e) => {
            let p = Prime::new(e.p)?;
            let rep = classify(e.n, e.k, p, e.kind)?;
            match fmt {
                Format::Text => write_case_text(out, &rep)?,
                Format::Json => json(out, &rep)?,
                Format::Csv => {
                    let (mz, smz) = (
                        rep.estimates.mz_raw.to_string(),
                        rep.estimates.smz_raw.to_string(),
                    );
                    let c = rep.criteria;
                    let row = CaseCsvRow {
                        kind: rep.kind,
                        p: rep.p,
                        n: rep.n,
                        k: rep.k,
                        actual: rep.actual,
                        mz: &mz,
                        smz: &smz,
                        amz: rep.estimates.amz,
                        samz: rep.estimates.samz,
                        mzc: rep.flags.mzc,
                        smzc: rep.flags.smzc,
                        amzc: rep.flags.amzc,
                        samzc: rep.flags.samzc,
                        mzc_criterion: c.mzc.to_string(),
                        smzc_criterion: c.smzc.to_string(),
                        amzc_criterion: c.amzc.to_string(),
                        samzc_criterion: c.samzc.to_string(),
                        agree: rep.agree,
                    };
                    csv_rows(out, &[row])?
                }
            }
        }
        Command::Maxpole { p, degree, order } => {
            let p = Prime::new(*p)?;
            let chain = kimura_chain(*degree, *order, p);
            let rec = MaxPoleRecord {
                degree: *degree,
                order: *order,
                max_pole: chain.max_pole(),
                first_pole_degree: chain.first_pole_degree(),
                chain,
            };
            match fmt {
                Format::Text => writeln!(out, "{}", rec.max_pole)?,
                Format::Json => json(out, &rec)?,
                Format::Csv => {
                    let links: Vec<String> = rec.chain.links.iter().map(u64::to_string).collect();
                    let row = MaxPoleCsvRow {
                        p,
                        degree: rec.degree,
                        order: rec.order,
                        max_pole: rec.max_pole,
                        first_pole_degree: rec.first_pole_degree,
                        links: links.join(" "),
                    };
                    csv_rows(out, &[row])?
                }
            }
        }
        Command::Predict {
            theorem,
            n,
            k,
            p,
            a,
            b,
            c,
            h,
            l,
            u,
        } => {
            let params = Params {
                n: *n,
                k: *k,
                p: *p,
                a: *a,
                b: *b,
                c: *c,
                h: *h,
                l: *l,
                u: *u,
            };
            let missing: Vec<String> = theorem
                .params()
                .iter()
                .filter(|name| params.get(name).is_err())
                .map(|name| match *name {
                    "h" | "L" | "u" => format!("--{name}"),
                    _ => format!("-{name}"),
                })
                .collect();
            if !missing.is_empty() {
                return Err(Failure::Usage(format!(
                    "theorem {theorem} needs {}",
                    missing.join(", ")
                )));
            }
            let pred = predict(*theorem, &params)?;
            match fmt {
                Format::Text => write_prediction_text(out, &pred)?,
                Format::Json => json(out, &pred)?,
                Format::Csv => {
                    let rows: Vec<ClaimCsvRow> = if pred.claims.is_empty() {
                        vec![ClaimCsvRow {
                            theorem: pred.theorem,
                            applicable: pred.applicable,
                            reason: pred.reason.clone(),
                            target: String::new(),
                            predicted: "none".into(),
                        }]
                    } else {
                        pred.claims
                            .iter()
                            .map(|c| ClaimCsvRow {
                                theorem: pred.theorem,
                                applicable: pred.applicable,
                                reason: pred.reason.clone(),
                                target: c.target.to_string(),
                                predicted: c.predicted.to_string(),
                            })
                            .collect()
                    };
                    csv_rows(out, &rows)?
                }
            }
        }
        Command::Verify { theorem, scan } => {
            let spec = ScanSpec {
                target: *theorem,
                grid: grid(&scan.grid)?,
                oracle_budget: scan.budget,
                jobs: scan.jobs,
            };
            emit_report(out, fmt, &verify(&spec)?)?
        }
        Command::ScanStat { c, scan } => {
            let g = grid(&scan.grid)?;
            let hs = match (g.get("h"), g.axes.len()) {
                (Some(r), 1) => r,
                _ => return Err(Failure::Usage("scan-stat takes a grid over h only".into())),
            };
            emit_report(
                out,
                fmt,
                &scan_conjecture_stat(*c, hs, scan.budget, scan.jobs)?,
            )?
        }
        Command::ScanA2 { scan } => {
            let g = grid(&scan.grid)?;
            emit_report(out, fmt, &scan_conjecture_a2(&g, scan.budget, scan.jobs)?)?
        }
        Command::ScanOpen { scan } => {
            let g = grid(&scan.grid)?;
            emit_report(out, fmt, &scan_open_question(&g, scan.budget, scan.jobs)?)?
        }
    }
    Ok(())
}

fn write_case_text(out: &mut dyn Write, rep: &CaseReport) -> Result<(), Failure> {
    let e = &rep.estimates;
    let name = match rep.kind {
        StirlingKind::First => "s",
        StirlingKind::Second => "S",
    };
    writeln!(
        out,
        "nu_{}({}({},{})) = {}",
        rep.p, name, rep.n, rep.k, rep.actual
    )?;
    match rep.r {
        Some(r) => writeln!(out, "r = (n-k)/(p-1) = {r}")?,
        None => writeln!(out, "p-1 does not divide n-k")?,
    }
    writeln!(
        out,
        "{:<6} {:>10} {:>6} {:>14}",
        "case", "estimate", "sharp", "criterion"
    )?;
    let rows = [
        ("mz", e.mz_raw.to_string(), rep.flags.mzc, rep.criteria.mzc),
        (
            "smz",
            e.smz_raw.to_string(),
            rep.flags.smzc,
            rep.criteria.smzc,
        ),
        ("amz", e.amz.to_string(), rep.flags.amzc, rep.criteria.amzc),
        (
            "samz",
            e.samz.to_string(),
            rep.flags.samzc,
            rep.criteria.samzc,
        ),
    ];
    for (case, est, sharp, crit) in rows {
        writeln!(
            out,
            "{case:<6} {est:>10} {sharp:>6} {:>14}",
            crit.to_string()
        )?;
    }
    writeln!(out, "max poles: M = {}, M' = {}", e.m, e.m_shifted)?;
    writeln!(out, "criteria agree with oracle: {}", rep.agree)?;
    Ok(())
}

fn write_prediction_text(out: &mut dyn Write, pred: &TheoremPrediction) -> Result<(), Failure> {
    if !pred.applicable {
        writeln!(out, "inapplicable: {}", pred.reason)?;
        return Ok(());
    }
    let mut claims = pred.claims.iter();
    if let Some(first) = claims.next() {
        writeln!(out, "{} (applicable)", first.predicted)?;
        writeln!(out, "  {}", first.target)?;
    }
    for c in claims {
        writeln!(out, "  also {} : {}", c.target, c.predicted)?;
    }
    if let Some(m) = pred.max_pole {
        writeln!(out, "  max pole {m}")?;
    }
    if let Some(d) = pred.first_pole_degree {
        writeln!(out, "  first pole in degree {d}")?;
    }
    Ok(())
}

fn emit_report(out: &mut dyn Write, fmt: Format, rep: &ScanReport) -> Result<(), Failure> {
    match fmt {
        Format::Json => json(out, rep),
        Format::Csv => {
            rep.write_csv(out)?;
            Ok(())
        }
        Format::Text => {
            let c = &rep.counts;
            writeln!(
                out,
                "target {}  grid {}  budget {}",
                rep.target, rep.grid, rep.oracle_budget
            )?;
            writeln!(
                out,
                "checked {}  agree {}  disagree {}  inapplicable {}  unknown {}  unclaimed {}",
                c.checked, c.agree, c.disagree, c.inapplicable, c.unknown, c.unclaimed
            )?;
            if let Some(stats) = &rep.statistics {
                writeln!(
                    out,
                    "{:>4} {:>10} {:>10} {:>12} {:>9}",
                    "h", "matches", "total", "fraction", "decimal"
                )?;
                for s in stats {
                    let frac = format!("{}/{}", s.numerator, s.denominator);
                    writeln!(
                        out,
                        "{:>4} {:>10} {:>10} {:>12} {:>9.6}",
                        s.h, s.matches, s.total, frac, s.fraction
                    )?;
                }
            }
            for m in &rep.mismatches {
                writeln!(
                    out,
                    "mismatch {}: {} predicted {} actual {}",
                    m.inputs, m.target, m.predicted, m.actual
                )?;
            }
            if rep.mismatch_overflow > 0 {
                writeln!(out, "... {} more mismatches", rep.mismatch_overflow)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("stirval").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn headline_outputs() {
        assert_eq!(
            call(&["val", "--kind", "2", "-p", "3", "-n", "4131", "-k", "241"]).1,
            "4\n"
        );
        assert_eq!(
            call(&["maxpole", "-p", "5", "--degree", "2552", "--order", "-348"]).1,
            "1\n"
        );
        let (code, out, _) = call(&[
            "predict",
            "--theorem",
            "gc",
            "-c",
            "3",
            "-b",
            "1",
            "-a",
            "1",
            "--h",
            "3",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("2 (applicable)"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            call(&["val", "-p", "4", "-n", "5", "-k", "2"]).0,
            EXIT_DOMAIN
        );
        assert_eq!(call(&["val", "-p", "3", "-n", "5"]).0, EXIT_USAGE);
        assert_eq!(call(&["val", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(
            call(&["predict", "--theorem", "gc", "-c", "3"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            call(&["verify", "--theorem", "sdw", "--grid", "h=1..x"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            call(&["scan-open", "--grid", "p=3;n=1..100000000"]).0,
            EXIT_RESOURCE
        );
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn infinity_prints_as_inf() {
        assert_eq!(call(&["val", "-p", "2", "-n", "3", "-k", "5"]).1, "inf\n");
        let out = call(&["val", "-p", "2", "-n", "3", "-k", "5", "--format", "json"]).1;
        assert!(out.contains("\"inf\""));
        let out = call(&["val", "-p", "2", "-n", "3", "-k", "5", "--format", "csv"]).1;
        assert_eq!(out, "kind,p,n,k,valuation\nsecond,2,3,5,inf\n");
    }
}
