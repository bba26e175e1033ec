//! Grid scans: theorem verification, case-criteria agreement, and the
//! conjecture explorers.
//!
//! Oracle values are fetched in batches, one Stirling triangle per
//! `(kind, p)`, and grid points are evaluated in parallel. Reports list every
//! grid point in grid order, so output does not depend on the worker count.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basep::{binom_valuation, digit_sum, int_valuation, is_prime, Prime, Valuation};
use crate::cases::classify_with_actual;
use crate::error::{Error, Result};
use crate::stirling::{row_valuations, StirlingKind};
use crate::theorems::{f_bc, pow2_ge, predict, Params, Target, TheoremId};

/// Cap on the mismatch list of a report.
pub const MISMATCH_CAP: usize = 1000;
/// Cap on the number of grid points in one scan.
pub const POINT_CAP: u64 = 20_000_000;
/// Default largest `n` handed to the oracle.
pub const DEFAULT_BUDGET: u64 = 100_000;

const AXES: [&str; 10] = ["kind", "n", "k", "p", "a", "b", "c", "h", "L", "u"];

/// Inclusive range `start..=end` with a positive step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisRange {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

impl AxisRange {
    pub fn new(start: u64, end: u64) -> Self {
        AxisRange {
            start,
            end,
            step: 1,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = u64> {
        (self.start..=self.end).step_by(self.step as usize)
    }

    fn len(&self) -> u64 {
        if self.end < self.start {
            0
        } else {
            (self.end - self.start) / self.step + 1
        }
    }
}

/// A parameter grid, written `axis=start..end[,step]` joined by `;`.
/// Ranges are inclusive; `axis=v` is a single value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: BTreeMap<String, AxisRange>,
}

impl Grid {
    pub fn with(mut self, axis: &str, start: u64, end: u64) -> Self {
        self.axes
            .insert(axis.to_string(), AxisRange::new(start, end));
        self
    }

    pub fn get(&self, axis: &str) -> Option<AxisRange> {
        self.axes.get(axis).copied()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |part: &str| Error::domain(format!("bad grid component '{part}'"));
        let mut axes = BTreeMap::new();
        for part in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (name, range) = part.split_once('=').ok_or_else(|| bad(part))?;
            let name = name.trim();
            if !AXES.contains(&name) {
                return Err(Error::domain(format!("unknown grid axis '{name}'")));
            }
            let (range, step) = match range.split_once(',') {
                Some((r, st)) => (r, st.trim().parse::<u64>().map_err(|_| bad(part))?),
                None => (range, 1),
            };
            let (start, end) = match range.split_once("..") {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (range.trim(), range.trim()),
            };
            let start = start.parse::<u64>().map_err(|_| bad(part))?;
            let end = end.parse::<u64>().map_err(|_| bad(part))?;
            if step == 0 || end < start {
                return Err(bad(part));
            }
            if axes
                .insert(name.to_string(), AxisRange { start, end, step })
                .is_some()
            {
                return Err(Error::domain(format!("axis '{name}' given twice")));
            }
        }
        if axes.is_empty() {
            return Err(Error::domain("empty grid"));
        }
        Ok(Grid { axes })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .axes
            .iter()
            .map(|(name, r)| {
                let mut s = format!("{name}={}..{}", r.start, r.end);
                if r.step != 1 {
                    s += &format!(",{}", r.step);
                }
                s
            })
            .collect();
        f.write_str(&parts.join(";"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "id")]
pub enum ScanTarget {
    Theorem(TheoremId),
    CaseAgreement,
}

impl fmt::Display for ScanTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanTarget::Theorem(id) => write!(f, "{id}"),
            ScanTarget::CaseAgreement => f.write_str("cases"),
        }
    }
}

impl FromStr for ScanTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cases" | "case-agreement" => Ok(ScanTarget::CaseAgreement),
            _ => s.parse().map(ScanTarget::Theorem),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub target: ScanTarget,
    pub grid: Grid,
    /// Largest `n` handed to the oracle; larger points are `unknown`.
    pub oracle_budget: u64,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
}

impl ScanSpec {
    pub fn new(target: ScanTarget, grid: Grid) -> Self {
        ScanSpec {
            target,
            grid,
            oracle_budget: DEFAULT_BUDGET,
            jobs: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Agree,
    Disagree,
    Inapplicable,
    Unknown,
    /// In guard, but only a limit is claimed and its bound is not met.
    Unclaimed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Agree => "agree",
            Status::Disagree => "disagree",
            Status::Inapplicable => "inapplicable",
            Status::Unknown => "unknown",
            Status::Unclaimed => "unclaimed",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// agree + disagree + unknown.
    pub checked: u64,
    pub agree: u64,
    pub disagree: u64,
    pub inapplicable: u64,
    pub unknown: u64,
    pub unclaimed: u64,
}

impl Counts {
    fn add(&mut self, s: Status) {
        match s {
            Status::Agree => self.agree += 1,
            Status::Disagree => self.disagree += 1,
            Status::Inapplicable => self.inapplicable += 1,
            Status::Unknown => self.unknown += 1,
            Status::Unclaimed => self.unclaimed += 1,
        }
        if matches!(s, Status::Agree | Status::Disagree | Status::Unknown) {
            self.checked += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.checked + self.inapplicable + self.unclaimed
    }
}

/// One grid point. `target`, `predicted` and `actual` are rendered text so
/// every scan kind shares one row shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub inputs: String,
    pub target: String,
    pub predicted: String,
    pub actual: String,
    pub status: Status,
}

/// Exact fraction with its decimal value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub h: u64,
    pub matches: u64,
    pub total: u64,
    pub numerator: u64,
    pub denominator: u64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub target: String,
    pub grid: String,
    pub oracle_budget: u64,
    pub counts: Counts,
    /// First disagreements, in grid order, capped at [`MISMATCH_CAP`].
    pub mismatches: Vec<Row>,
    /// Disagreements beyond the cap.
    pub mismatch_overflow: u64,
    pub rows: Vec<Row>,
    pub statistics: Option<Vec<StatRow>>,
}

impl ScanReport {
    fn from_rows(target: String, grid: String, oracle_budget: u64, rows: Vec<Row>) -> Self {
        let mut counts = Counts::default();
        let mut mismatches = Vec::new();
        let mut mismatch_overflow = 0;
        for row in &rows {
            counts.add(row.status);
            if row.status == Status::Disagree {
                if mismatches.len() < MISMATCH_CAP {
                    mismatches.push(row.clone());
                } else {
                    mismatch_overflow += 1;
                }
            }
        }
        ScanReport {
            target,
            grid,
            oracle_budget,
            counts,
            mismatches,
            mismatch_overflow,
            rows,
            statistics: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row per grid point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::domain(format!("csv output failed: {e}"));
        for row in &self.rows {
            wr.serialize(row).map_err(io)?;
        }
        wr.flush()
            .map_err(|e| Error::domain(format!("csv output failed: {e}")))
    }
}

/// Run `f` on a pool of `jobs` threads (0 for the default pool).
fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Oracle valuations for a batch of targets; `None` past the budget or on a
/// resource error.
pub fn oracle_batch(targets: &[Target], budget: u64) -> HashMap<Target, Option<Valuation>> {
    let mut groups: BTreeMap<(u8, u64), BTreeMap<u64, u64>> = BTreeMap::new();
    for t in targets {
        if t.n <= budget && t.k <= t.n {
            let key = (t.kind as u8, t.p.get());
            let e = groups.entry(key).or_default().entry(t.n).or_insert(0);
            *e = (*e).max(t.k);
        }
    }
    let tables: Vec<((u8, u64), Option<BTreeMap<u64, Vec<Valuation>>>)> = groups
        .into_par_iter()
        .map(|((kind, p), rows)| {
            let kind = if kind == StirlingKind::First as u8 {
                StirlingKind::First
            } else {
                StirlingKind::Second
            };
            let req: Vec<(u64, u64)> = rows.into_iter().collect();
            let p = Prime::new(p).expect("prime");
            ((kind as u8, p.get()), row_valuations(kind, p, &req).ok())
        })
        .collect();
    let tables: HashMap<_, _> = tables.into_iter().collect();
    targets
        .iter()
        .map(|t| {
            let v = if t.k > t.n {
                Some(Valuation::Infinite)
            } else if t.n > budget {
                None
            } else {
                tables[&(t.kind as u8, t.p.get())]
                    .as_ref()
                    .map(|rows| rows[&t.n][t.k as usize])
            };
            (*t, v)
        })
        .collect()
}

type DefaultRange = fn(&Params) -> Option<(u64, u64)>;

fn p_of(ps: &Params) -> u64 {
    ps.p.unwrap_or(2)
}

fn pow_sat(b: u64, e: u64) -> u64 {
    u32::try_from(e)
        .ok()
        .and_then(|e| b.checked_pow(e))
        .unwrap_or(u64::MAX)
}

/// Enumeration order and default ranges for each theorem's axes.
fn axis_plan(id: TheoremId) -> Vec<(&'static str, Option<DefaultRange>)> {
    let h2: DefaultRange = |ps| Some((1, pow_sat(2, ps.h?)));
    let half: DefaultRange = |ps| Some((1, pow_sat(2, ps.h?.checked_sub(1)?)));
    let below_c: DefaultRange = |ps| Some((0, ps.c?.checked_sub(1)?));
    let one_below_c: DefaultRange = |ps| Some((1, ps.c?.checked_sub(1)?));
    let up_to_c: DefaultRange = |ps| Some((1, ps.c?));
    let shift: DefaultRange = |ps| Some((0, pow_sat(2, ps.h?) - 1));
    let up_to_n: DefaultRange = |ps| Some((1, ps.n?));
    let up_to_b: DefaultRange = |ps| Some((1, ps.b?));
    use TheoremId::*;
    match id {
        Sdw | S12h => vec![("h", None), ("k", Some(h2))],
        Tlc => vec![("c", None), ("h", None), ("k", Some(h2))],
        UpperRange => vec![("c", None), ("h", None), ("a", Some(h2))],
        Gc => vec![
            ("c", None),
            ("h", None),
            ("b", Some(below_c)),
            ("a", Some(half)),
        ],
        Plus12 => vec![
            ("c", None),
            ("h", None),
            ("b", Some(one_below_c)),
            ("a", Some(half)),
        ],
        Th26a | Th26b => vec![("c", None), ("h", None), ("b", Some(up_to_c))],
        PadicL => vec![("c", None), ("h", None), ("L", Some(shift))],
        PadicL2 => vec![
            ("c", None),
            ("h", None),
            ("b", Some(up_to_c)),
            ("L", Some(shift)),
        ],
        Snkp2 => vec![
            ("p", None),
            ("c", None),
            ("h", None),
            (
                "k",
                Some(|ps| {
                    Some((
                        1,
                        (ps.c? % p_of(ps)).saturating_mul(pow_sat(p_of(ps), ps.h?)),
                    ))
                }),
            ),
        ],
        A22 => vec![
            ("p", None),
            ("c", Some(|ps| Some((1, p_of(ps) - 1)))),
            ("h", None),
            (
                "k",
                Some(|ps| Some((1, ps.c?.saturating_mul(pow_sat(p_of(ps), ps.h?))))),
            ),
        ],
        Arnieplus | Arniex => vec![
            ("p", None),
            ("n", None),
            ("b", Some(up_to_n)),
            ("k", Some(up_to_b)),
        ],
        S1Mzc => vec![("p", None), ("n", None), ("k", Some(up_to_n))],
        Th321 => vec![
            ("c", None),
            ("h", None),
            ("u", Some(|ps| Some((1, pow_sat(2, ps.h?) - 1)))),
        ],
    }
}

/// Values of one axis; composite entries of a `p` range are skipped.
fn axis_values(name: &str, range: AxisRange) -> Result<Vec<u64>> {
    if name != "p" {
        return Ok(range.values().collect());
    }
    let ps: Vec<u64> = range.values().filter(|&p| is_prime(p)).collect();
    if ps.is_empty() {
        return Err(Error::NotPrime(range.start));
    }
    Ok(ps)
}

fn enumerate(plan: &[(&str, Option<DefaultRange>)], grid: &Grid) -> Result<Vec<Params>> {
    for name in grid.axes.keys() {
        if !plan.iter().any(|(a, _)| a == name) {
            return Err(Error::domain(format!(
                "axis '{name}' is not used by this scan"
            )));
        }
    }
    let mut out = Vec::new();
    let mut cur = Params::default();
    fn rec(
        plan: &[(&str, Option<DefaultRange>)],
        grid: &Grid,
        cur: &mut Params,
        out: &mut Vec<Params>,
    ) -> Result<()> {
        let Some(((name, default), rest)) = plan.split_first() else {
            out.push(*cur);
            if out.len() as u64 > POINT_CAP {
                return Err(Error::resource("grid points", POINT_CAP));
            }
            return Ok(());
        };
        let range = match grid.get(name) {
            Some(r) => r,
            None => match default.and_then(|d| d(cur)) {
                Some((a, b)) => AxisRange::new(a, b),
                None => return Err(Error::domain(format!("grid needs axis '{name}'"))),
            },
        };
        if range.len() > POINT_CAP {
            return Err(Error::resource("grid points", POINT_CAP));
        }
        for v in axis_values(name, range)? {
            cur.set(name, v)?;
            rec(rest, grid, cur, out)?;
        }
        Ok(())
    }
    rec(plan, grid, &mut cur, &mut out)?;
    Ok(out)
}

fn render_inputs(ps: &Params) -> String {
    let fields = [
        ("n", ps.n),
        ("k", ps.k),
        ("p", ps.p),
        ("a", ps.a),
        ("b", ps.b),
        ("c", ps.c),
        ("h", ps.h),
        ("L", ps.l),
        ("u", ps.u),
    ];
    fields
        .iter()
        .filter_map(|(name, v)| v.map(|v| format!("{name}={v}")))
        .collect::<Vec<_>>()
        .join(";")
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Compare every in-guard grid point against the oracle.
pub fn verify(spec: &ScanSpec) -> Result<ScanReport> {
    with_jobs(spec.jobs, || match spec.target {
        ScanTarget::Theorem(id) => verify_theorem(id, spec),
        ScanTarget::CaseAgreement => verify_cases(spec),
    })?
}

fn verify_theorem(id: TheoremId, spec: &ScanSpec) -> Result<ScanReport> {
    let mut points = enumerate(&axis_plan(id), &spec.grid)?;
    if let Some(p) = id.fixed_prime() {
        for ps in &mut points {
            ps.p = Some(p.get());
        }
    }
    let preds = points
        .par_iter()
        .map(|ps| predict(id, ps))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<Target> = preds
        .iter()
        .flat_map(|p| p.claims.iter())
        .filter(|c| c.predicted.check(Valuation::Infinite).is_some())
        .map(|c| c.target)
        .collect();
    let oracle = oracle_batch(&targets, spec.oracle_budget);
    let rows = points
        .par_iter()
        .zip(preds.par_iter())
        .map(|(ps, pred)| {
            let mut inputs = render_inputs(ps);
            if id.fixed_prime().is_some() {
                inputs = inputs.replace("p=2;", "").replace(";p=2", "");
            }
            if !pred.applicable {
                return Row {
                    inputs,
                    target: String::new(),
                    predicted: pred.reason.clone(),
                    actual: String::new(),
                    status: Status::Inapplicable,
                };
            }
            let mut status = Status::Unclaimed;
            let mut actuals = Vec::new();
            for c in &pred.claims {
                if c.predicted.check(Valuation::Infinite).is_none() {
                    actuals.push("-".to_string());
                    continue;
                }
                let claim_status = match oracle[&c.target] {
                    None => {
                        actuals.push("?".to_string());
                        Status::Unknown
                    }
                    Some(v) => {
                        actuals.push(v.to_string());
                        if c.predicted.check(v) == Some(true) {
                            Status::Agree
                        } else {
                            Status::Disagree
                        }
                    }
                };
                status = merge(status, claim_status);
            }
            Row {
                inputs,
                target: join(pred.claims.iter().map(|c| c.target)),
                predicted: join(pred.claims.iter().map(|c| c.predicted)),
                actual: actuals.join(" | "),
                status,
            }
        })
        .collect();
    Ok(ScanReport::from_rows(
        id.to_string(),
        spec.grid.to_string(),
        spec.oracle_budget,
        rows,
    ))
}

/// Combine claim outcomes at one point: any disagreement wins, then unknown.
fn merge(a: Status, b: Status) -> Status {
    use Status::*;
    match (a, b) {
        (Disagree, _) | (_, Disagree) => Disagree,
        (Unknown, _) | (_, Unknown) => Unknown,
        (Agree, _) | (_, Agree) => Agree,
        _ => a,
    }
}

fn kinds_of(grid: &Grid) -> Result<Vec<StirlingKind>> {
    match grid.get("kind") {
        None => Ok(vec![StirlingKind::First, StirlingKind::Second]),
        Some(r) => r
            .values()
            .map(|v| v.to_string().parse::<StirlingKind>())
            .collect(),
    }
}

fn nk_points(grid: &Grid, needs_p: bool) -> Result<Vec<(Prime, u64, u64)>> {
    let ps = match grid.get("p") {
        Some(r) => axis_values("p", r)?,
        None if needs_p => return Err(Error::domain("grid needs axis 'p'")),
        None => vec![2],
    };
    let ns = grid
        .get("n")
        .ok_or_else(|| Error::domain("grid needs axis 'n'"))?;
    // Count before allocating so oversized grids fail fast.
    let k_count = |n: u64| -> u64 {
        let ks = grid.get("k").unwrap_or(AxisRange::new(1, n));
        let first = if ks.start >= 1 {
            ks.start
        } else {
            ks.start + Integer::div_ceil(&(1 - ks.start), &ks.step) * ks.step
        };
        let last = ks.end.min(n);
        if first > last {
            0
        } else {
            (last - first) / ks.step + 1
        }
    };
    let mut total = 0u64;
    for n in ns.values() {
        total = total.saturating_add(k_count(n).saturating_mul(ps.len() as u64));
        if total > POINT_CAP {
            return Err(Error::resource("grid points", POINT_CAP));
        }
    }
    let mut out = Vec::with_capacity(total as usize);
    for p in ps {
        let p = Prime::new(p)?;
        for n in ns.values() {
            let ks = grid.get("k").unwrap_or(AxisRange::new(1, n));
            for k in ks.values().filter(|&k| 1 <= k && k <= n) {
                out.push((p, n, k));
                if out.len() as u64 > POINT_CAP {
                    return Err(Error::resource("grid points", POINT_CAP));
                }
            }
        }
    }
    Ok(out)
}

fn check_axes(grid: &Grid, allowed: &[&str]) -> Result<()> {
    match grid.axes.keys().find(|a| !allowed.contains(&a.as_str())) {
        Some(a) => Err(Error::domain(format!(
            "axis '{a}' is not used by this scan"
        ))),
        None => Ok(()),
    }
}

fn verify_cases(spec: &ScanSpec) -> Result<ScanReport> {
    check_axes(&spec.grid, &["kind", "p", "n", "k"])?;
    let kinds = kinds_of(&spec.grid)?;
    let pts = nk_points(&spec.grid, true)?;
    let mut all = Vec::new();
    for &kind in &kinds {
        for &(p, n, k) in &pts {
            all.push(Target { kind, p, n, k });
        }
    }
    let oracle = oracle_batch(&all, spec.oracle_budget);
    let rows = all
        .par_iter()
        .map(|t| {
            let inputs = format!("kind={};p={};n={};k={}", t.kind, t.p, t.n, t.k);
            let Some(actual) = oracle[t] else {
                return Ok(Row {
                    inputs,
                    target: t.to_string(),
                    predicted: String::new(),
                    actual: "?".into(),
                    status: Status::Unknown,
                });
            };
            let rep = classify_with_actual(t.n, t.k, t.p, t.kind, actual)?;
            let c = rep.criteria;
            let f = rep.flags;
            Ok(Row {
                inputs,
                target: t.to_string(),
                predicted: format!(
                    "mzc={} smzc={} amzc={} samzc={}",
                    c.mzc, c.smzc, c.amzc, c.samzc
                ),
                actual: format!(
                    "v={} mzc={} smzc={} amzc={} samzc={}",
                    actual, f.mzc, f.smzc, f.amzc, f.samzc
                ),
                status: if rep.agree {
                    Status::Agree
                } else {
                    Status::Disagree
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport::from_rows(
        "cases".into(),
        spec.grid.to_string(),
        spec.oracle_budget,
        rows,
    ))
}

fn s2(n: u64) -> i64 {
    digit_sum(n, Prime::TWO) as i64
}

fn bv2(m: u64, j: u64) -> i64 {
    binom_valuation(m, j, Prime::TWO).expect("j <= m") as i64
}

/// For each `h`, the fraction of `k` in `1..=c 2^h` with
/// ν_2(S(c 2^h, k)) = σ(k) − σ(c) + ν_2(C(c 2^{h+1} − k, c 2^h)).
/// `k = 0` never matches since S(n, 0) = 0.
pub fn scan_conjecture_stat(c: u64, hs: AxisRange, budget: u64, jobs: usize) -> Result<ScanReport> {
    if c == 0 {
        return Err(Error::domain("need c >= 1"));
    }
    with_jobs(jobs, || {
        let two = Prime::TWO;
        let mut targets = Vec::new();
        for h in hs.values() {
            let n = (h < 62)
                .then(|| c.checked_mul(1 << h))
                .flatten()
                .ok_or_else(|| Error::domain("c * 2^h overflows"))?;
            for k in 1..=n {
                let t = Target {
                    kind: StirlingKind::Second,
                    p: two,
                    n,
                    k,
                };
                targets.push((h, t));
            }
        }
        let plain: Vec<Target> = targets.iter().map(|&(_, t)| t).collect();
        let oracle = oracle_batch(&plain, budget);
        let rows: Vec<Row> = targets
            .par_iter()
            .map(|(h, t)| {
                let predicted = s2(t.k) - s2(c) + bv2(2 * t.n - t.k, t.n);
                let (actual, status) = match oracle[t] {
                    None => ("?".into(), Status::Unknown),
                    Some(v) if v.equals(predicted) => (v.to_string(), Status::Agree),
                    Some(v) => (v.to_string(), Status::Disagree),
                };
                Row {
                    inputs: format!("c={c};h={h};k={}", t.k),
                    target: t.to_string(),
                    predicted: predicted.to_string(),
                    actual,
                    status,
                }
            })
            .collect();
        let mut stats = Vec::new();
        let mut offset = 0usize;
        for h in hs.values() {
            let n = c << h;
            let slice = &rows[offset..offset + n as usize];
            offset += n as usize;
            if slice.iter().any(|r| r.status == Status::Unknown) {
                continue;
            }
            let matches = slice.iter().filter(|r| r.status == Status::Agree).count() as u64;
            let g = matches.gcd(&n).max(1);
            stats.push(StatRow {
                h,
                matches,
                total: n,
                numerator: matches / g,
                denominator: n / g,
                fraction: matches as f64 / n as f64,
            });
        }
        let mut report = ScanReport::from_rows(
            "conjecture-stat".into(),
            format!("c={c};h={}..{}", hs.start, hs.end),
            budget,
            rows,
        );
        report.statistics = Some(stats);
        Ok(report)
    })?
}

/// Points with a ≡ 3 (mod 4), 3 ≤ a ≤ 2^{h−1}, inside the `gc` guard, where
/// ν_2(S(c 2^h + 2, b 2^h + a)) differs from σ(a) + f(b,c) + ν_2(C(a+1,2)) − 1.
/// Grid axes: `c`, `h`, optional `b` (default 1..c−1) and `a`.
pub fn scan_conjecture_a2(grid: &Grid, budget: u64, jobs: usize) -> Result<ScanReport> {
    check_axes(grid, &["a", "b", "c", "h"])?;
    let cs = grid
        .get("c")
        .ok_or_else(|| Error::domain("grid needs axis 'c'"))?;
    let hs = grid
        .get("h")
        .ok_or_else(|| Error::domain("grid needs axis 'h'"))?;
    with_jobs(jobs, || {
        let two = Prime::TWO;
        let mut pts = Vec::new();
        for c in cs.values() {
            for h in hs.values().filter(|&h| (2..62).contains(&h)) {
                let bs = grid
                    .get("b")
                    .unwrap_or(AxisRange::new(1, c.saturating_sub(1)));
                for b in bs.values().filter(|&b| 1 <= b && b < c) {
                    if !pow2_ge(h as i64 - 2, bv2(2 * c - b - 1, c) as u64) {
                        continue;
                    }
                    let half = 1u64 << (h - 1);
                    let as_ = grid.get("a").unwrap_or(AxisRange::new(3, half));
                    for a in as_.values().filter(|&a| a % 4 == 3 && 3 <= a && a <= half) {
                        pts.push((a, b, c, h));
                    }
                }
            }
        }
        let targets: Vec<Target> = pts
            .iter()
            .map(|&(a, b, c, h)| Target {
                kind: StirlingKind::Second,
                p: two,
                n: (c << h) + 2,
                k: (b << h) + a,
            })
            .collect();
        let oracle = oracle_batch(&targets, budget);
        let rows = pts
            .par_iter()
            .zip(targets.par_iter())
            .map(|(&(a, b, c, h), t)| {
                let predicted = s2(a) + f_bc(b, c) + bv2(a + 1, 2) - 1;
                let (actual, status) = match oracle[t] {
                    None => ("?".into(), Status::Unknown),
                    Some(v) if v.equals(predicted) => (v.to_string(), Status::Agree),
                    Some(v) => (v.to_string(), Status::Disagree),
                };
                Row {
                    inputs: format!("a={a};b={b};c={c};h={h}"),
                    target: t.to_string(),
                    predicted: predicted.to_string(),
                    actual,
                    status,
                }
            })
            .collect();
        Ok(ScanReport::from_rows(
            "conjecture-a2".into(),
            grid.to_string(),
            budget,
            rows,
        ))
    })?
}

/// Second-kind points with ν_p(k) < ν_p(n) whose almost minimum zero
/// estimate is sharp; `disagree` marks those with n ≢ k (mod p − 1).
/// Other points are `inapplicable`. Grid axes: `p`, `n`, optional `k`.
pub fn scan_open_question(grid: &Grid, budget: u64, jobs: usize) -> Result<ScanReport> {
    check_axes(grid, &["p", "n", "k"])?;
    let pts = nk_points(grid, true)?;
    with_jobs(jobs, || {
        let targets: Vec<Target> = pts
            .iter()
            .map(|&(p, n, k)| Target {
                kind: StirlingKind::Second,
                p,
                n,
                k,
            })
            .collect();
        let filtered: Vec<Target> = targets
            .iter()
            .copied()
            .filter(|t| int_valuation(t.k, t.p) < int_valuation(t.n, t.p))
            .collect();
        let oracle = oracle_batch(&filtered, budget);
        let rows = targets
            .par_iter()
            .map(|t| {
                let inputs = format!("p={};n={};k={}", t.p, t.n, t.k);
                let mut row = Row {
                    inputs,
                    target: t.to_string(),
                    predicted: String::new(),
                    actual: String::new(),
                    status: Status::Inapplicable,
                };
                let Some(v) = oracle.get(t) else {
                    return Ok(row);
                };
                let Some(v) = *v else {
                    row.status = Status::Unknown;
                    return Ok(row);
                };
                let rep = classify_with_actual(t.n, t.k, t.p, StirlingKind::Second, v)?;
                if !rep.flags.amzc {
                    return Ok(row);
                }
                let congruent = (t.n - t.k) % t.p.pm1() == 0;
                row.predicted = "n = k mod p-1".into();
                row.actual = format!("v={v} n-k mod p-1 = {}", (t.n - t.k) % t.p.pm1());
                row.status = if congruent {
                    Status::Agree
                } else {
                    Status::Disagree
                };
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScanReport::from_rows(
            "open-question".into(),
            grid.to_string(),
            budget,
            rows,
        ))
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "c=1..5,2; h=3".parse().unwrap();
        assert_eq!(
            g.get("c"),
            Some(AxisRange {
                start: 1,
                end: 5,
                step: 2
            })
        );
        assert_eq!(g.get("h"), Some(AxisRange::new(3, 3)));
        assert_eq!(
            g.get("c").unwrap().values().collect::<Vec<_>>(),
            vec![1, 3, 5]
        );
        assert_eq!(g.to_string(), "c=1..5,2;h=3..3");
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
        for bad in ["", "c", "c=5..1", "c=1..2,0", "zz=1", "c=1;c=2", "c=x..3"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn verify_small_theorems() {
        let spec = ScanSpec::new(
            ScanTarget::Theorem(TheoremId::Sdw),
            "h=0..6".parse().unwrap(),
        );
        let rep = verify(&spec).unwrap();
        assert_eq!(rep.counts.disagree, 0);
        assert_eq!(rep.counts.agree, (0..=6).map(|h| 1u64 << h).sum::<u64>());
        let spec = ScanSpec::new(
            ScanTarget::Theorem(TheoremId::Gc),
            "c=2..5;h=1..5".parse().unwrap(),
        );
        let rep = verify(&spec).unwrap();
        assert_eq!(rep.counts.disagree, 0);
        assert!(rep.counts.agree > 0 && rep.counts.inapplicable > 0);
        assert_eq!(rep.counts.total(), rep.rows.len() as u64);
    }

    #[test]
    fn budget_marks_unknown() {
        let mut spec = ScanSpec::new(
            ScanTarget::Theorem(TheoremId::Sdw),
            "h=3..4".parse().unwrap(),
        );
        spec.oracle_budget = 8;
        let rep = verify(&spec).unwrap();
        assert_eq!(rep.counts.agree, 8);
        assert_eq!(rep.counts.unknown, 16);
        assert_eq!(rep.counts.checked, 24);
    }

    #[test]
    fn deterministic_across_jobs() {
        let mut spec = ScanSpec::new(ScanTarget::CaseAgreement, "p=2..3;n=1..30".parse().unwrap());
        spec.jobs = 1;
        let a = verify(&spec).unwrap();
        spec.jobs = 3;
        let b = verify(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.disagree, 0);
    }

    #[test]
    fn missing_axis() {
        let spec = ScanSpec::new(
            ScanTarget::Theorem(TheoremId::Tlc),
            "h=1..3".parse().unwrap(),
        );
        assert!(verify(&spec).is_err());
        let spec = ScanSpec::new(
            ScanTarget::Theorem(TheoremId::Sdw),
            "h=1..3;c=2".parse().unwrap(),
        );
        assert!(verify(&spec).is_err());
    }

    #[test]
    fn conjecture_stat_small() {
        let rep = scan_conjecture_stat(1, AxisRange::new(1, 4), DEFAULT_BUDGET, 0).unwrap();
        let stats = rep.statistics.unwrap();
        assert_eq!(stats.len(), 4);
        for s in stats {
            assert_eq!((s.numerator, s.denominator), (1, 1));
        }
    }

    #[test]
    fn conjecture_a2_small() {
        let rep = scan_conjecture_a2(&"c=2..5;h=3..5".parse().unwrap(), DEFAULT_BUDGET, 0).unwrap();
        assert!(rep.counts.checked > 0);
        assert_eq!(rep.counts.disagree, 0);
    }

    #[test]
    fn open_question_excludes_samzc_example() {
        let rep =
            scan_open_question(&"p=3;n=100;k=45".parse().unwrap(), DEFAULT_BUDGET, 0).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].status, Status::Inapplicable);
        let rep = scan_open_question(&"p=3;n=1..60".parse().unwrap(), DEFAULT_BUDGET, 0).unwrap();
        assert_eq!(rep.counts.total(), rep.rows.len() as u64);
    }

    #[test]
    fn csv_has_one_line_per_point() {
        let spec = ScanSpec::new(ScanTarget::Theorem(TheoremId::Sdw), "h=2".parse().unwrap());
        let rep = verify(&spec).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 4);
        assert!(text.starts_with("inputs,target,predicted,actual,status"));
        let back: ScanReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }
}
