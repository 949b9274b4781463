//! The `uclab` batch driver.
//!
//! Every command reads families in the text format of [`crate::format`],
//! fans the work out over a worker pool and collects one JSON line per
//! result in input order. A run yields a [`RunReport`]: the lines go to
//! stdout, an optional JSONL report file gets a header, the lines and a
//! summary, and the exit code follows the tally.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | everything holds |
//! | 1 | usage or input error |
//! | 2 | counterexample to an open statement, or a failed replay |
//! | 3 | a proven statement failed: implementation bug |

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::checks::{
    check_conj21_all, check_conj21_at, check_conj41, check_doubleton_implication, check_frankl, check_reimer,
    Conj41Variant, ConjectureId, Failure, Verdict, Witness,
};
use crate::enumeration::{enumerate_union_closed, random_union_closed, run_checkpointed, EnumerationSpec};
use crate::error::{Error, Result};
use crate::family::{FamilyFingerprint, MultiFamily, SetFamily, SetMask};
use crate::format::{parse_families, parse_multi_families, render_family, Located};
use crate::partition::{
    build_partition, check_conj35_on_family, mu_bound, verify_block_unions, BlockCheck, SizeSequence, TieBreak,
    TiePolicy,
};
use crate::witness::{
    construct_witness_chain_with, extend_chain_via_q23, solve_q23_with_limit, verify_certificate, verify_chain,
    Q23_DEFAULT_MAX_MEMBERS, WitnessCertificate,
};

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "uclab", version, about = "Union-closed family verification toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CommonArgs {
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true, env = "UCLAB_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,

    /// Also write a JSONL report (header, lines, summary) to this file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Run conjecture checks on every family in a file.
    Check {
        #[arg(long, value_enum)]
        conjecture: ConjectureChoice,
        #[arg(long)]
        input: PathBuf,
        /// Check a single `x` instead of all `x ∈ [n]` (c21 only).
        #[arg(long)]
        x: Option<u32>,
        /// Check non-separating families through their separating quotient (c41a/c41b).
        #[arg(long)]
        quotient: bool,
        #[arg(long, value_enum, default_value = "both")]
        tie_policy: TiePolicy,
    },
    /// Enumerate all union-closed families with base set [n].
    Enumerate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        no_empty_member: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        count_only: bool,
        /// Resumable progress file holding the last completed candidate index.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Build the max-frequency partition of each family and test its block sizes.
    Partition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "min")]
        tie_break: TieBreak,
        #[arg(long, value_enum, default_value = "exhaustive")]
        verify: VerifyChoice,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit the witness chain certificates of each family.
    Witness {
        #[arg(long)]
        input: PathBuf,
        /// Attach the intermediate families of each construction step.
        #[arg(long)]
        trace: bool,
        /// Continue past the proven range with the sub-multiset solver.
        #[arg(long)]
        extend: bool,
    },
    /// Search each multiset of sets for a sub-multiset matching its union size.
    Q23 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = Q23_DEFAULT_MAX_MEMBERS)]
        max_members: usize,
    },
    /// Check seeded random union-closed families.
    Random {
        #[arg(long)]
        n: u32,
        /// Draw `n` uniformly from `n..=n_max` per family.
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value = "all")]
        conjecture: ConjectureChoice,
        /// Also write the generated families here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify certificates and verdicts against their families.
    Replay {
        #[arg(long)]
        certificates: PathBuf,
        #[arg(long)]
        families: PathBuf,
    },
    /// Evaluate block-size sequences such as `100,50,25,12,5`.
    Sequence {
        sequences: Vec<String>,
        /// File with one comma-separated sequence per line.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureChoice {
    Frankl,
    C21,
    Doubleton,
    Reimer,
    C41a,
    C41b,
    C35,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyChoice {
    Exhaustive,
    Sampled,
}

/// A parsed command plus resolved settings.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub workers: u32,
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        let workers = cli
            .common
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get() as u32));
        RunConfig { command: cli.command, workers, report: cli.common.report }
    }

    pub fn new(command: Command) -> Self {
        RunConfig { command, workers: 1, report: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub header: Value,
    pub lines: Vec<String>,
    pub summary: Value,
    pub exit_code: i32,
}

impl RunReport {
    /// The full JSONL report: header, lines, summary.
    pub fn to_jsonl(&self) -> String {
        format!("{}\n{}", self.header, self.body())
    }

    /// Everything except the header, which carries the timestamp.
    pub fn body(&self) -> String {
        let mut s = String::new();
        for line in &self.lines {
            s.push_str(line);
            s.push('\n');
        }
        s.push_str(&format!("{}\n", self.summary));
        s
    }

    /// Short human-readable summary for stderr.
    pub fn human_summary(&self) -> String {
        let mut s = String::new();
        let get = |k: &str| self.summary.get(k).cloned().unwrap_or(Value::Null);
        s.push_str(&format!(
            "{} lines, {} families; {} counterexamples, {} internal failures; exit {}\n",
            get("lines"),
            get("families"),
            get("counterexamples"),
            get("internal_failures"),
            self.exit_code
        ));
        if let Some(Value::Object(checks)) = self.summary.get("checks") {
            for (name, counts) in checks {
                s.push_str(&format!("  {name}: {} hold, {} fail\n", counts["holds"], counts["fails"]));
            }
        }
        s
    }
}

#[derive(Default)]
struct Tally {
    families: usize,
    checks: BTreeMap<String, (usize, usize)>,
    counterexamples: usize,
    internal: usize,
    lines: Vec<String>,
}

impl Tally {
    fn record(&mut self, name: &str, holds: bool, failure: Option<Failure>) {
        let entry = self.checks.entry(name.to_string()).or_default();
        if holds {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
        match failure {
            Some(Failure::Counterexample) => self.counterexamples += 1,
            Some(Failure::Internal) => self.internal += 1,
            None => {}
        }
    }

    fn verdict(&mut self, v: &Verdict) {
        self.record(v.conjecture.as_str(), v.holds, v.failure());
        self.lines.push(v.to_json_line());
    }

    fn line<T: Serialize>(&mut self, value: &T) {
        self.lines.push(serde_json::to_string(value).expect("report lines serialize"));
    }

    fn exit_code(&self) -> i32 {
        if self.internal > 0 {
            3
        } else if self.counterexamples > 0 {
            2
        } else {
            0
        }
    }

    fn finish(self, header: Value) -> RunReport {
        let exit_code = self.exit_code();
        let checks: Map<String, Value> = self
            .checks
            .iter()
            .map(|(k, &(h, f))| (k.clone(), json!({ "holds": h, "fails": f })))
            .collect();
        let summary = json!({
            "summary": true,
            "lines": self.lines.len(),
            "families": self.families,
            "checks": checks,
            "counterexamples": self.counterexamples,
            "internal_failures": self.internal,
            "exit_code": exit_code,
        });
        RunReport { header, lines: self.lines, summary, exit_code }
    }
}

fn header(config: &RunConfig) -> Value {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    json!({
        "tool": "uclab",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "timestamp": timestamp,
    })
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("line {line}: {m}")),
        Error::Internal(m) => Error::Internal(format!("line {line}: {m}")),
        other => other,
    })
}

/// Runs one command on a dedicated worker pool.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1) as usize)
        .build()
        .map_err(|e| Error::internal(format!("worker pool: {e}")))?;
    let mut tally = Tally::default();
    pool.install(|| dispatch(&config.command, &mut tally))?;
    let report = tally.finish(header(config));
    if let Some(path) = &config.report {
        fs::write(path, report.to_jsonl())?;
    }
    Ok(report)
}

fn dispatch(command: &Command, tally: &mut Tally) -> Result<()> {
    match command {
        Command::Check { conjecture, input, x, quotient, tie_policy } => {
            let families = parse_families(&read(input)?)?;
            let choice = Selection { conjecture: *conjecture, x: *x, quotient: *quotient, tie_policy: *tie_policy };
            check_all(&families, &choice, tally)
        }
        Command::Enumerate { n, no_empty_member, out, count_only, checkpoint } => {
            enumerate(*n, *no_empty_member, out.as_ref(), *count_only, checkpoint.as_ref(), tally)
        }
        Command::Partition { input, tie_break, verify, samples, seed } => {
            let mode = match verify {
                VerifyChoice::Exhaustive => BlockCheck::Exhaustive,
                VerifyChoice::Sampled => BlockCheck::Sampled { samples: *samples, seed: *seed },
            };
            partition(&parse_families(&read(input)?)?, *tie_break, mode, tally)
        }
        Command::Witness { input, trace, extend } => witness(&parse_families(&read(input)?)?, *trace, *extend, tally),
        Command::Q23 { input, max_members } => q23(&parse_multi_families(&read(input)?)?, *max_members, tally),
        Command::Random { n, n_max, density, seed, count, conjecture, out } => {
            let families = random_batch(*n, n_max.unwrap_or(*n), *density, *seed, *count)?;
            if let Some(path) = out {
                let mut w = BufWriter::new(File::create(path)?);
                for f in &families {
                    writeln!(w, "#universe {}", f.value.universe().len())?;
                    writeln!(w, "{}", render_family(&f.value))?;
                }
                w.flush()?;
            }
            let choice = Selection { conjecture: *conjecture, x: None, quotient: true, tie_policy: TiePolicy::Both };
            check_all(&families, &choice, tally)
        }
        Command::Replay { certificates, families } => replay(&read(certificates)?, &read(families)?, tally),
        Command::Sequence { sequences, input } => {
            let mut texts: Vec<(usize, String)> = sequences.iter().enumerate().map(|(i, s)| (i + 1, s.clone())).collect();
            if let Some(path) = input {
                for (i, l) in read(path)?.lines().enumerate() {
                    let l = l.trim();
                    if !l.is_empty() && !l.starts_with('#') {
                        texts.push((i + 1, l.to_string()));
                    }
                }
            }
            sequence(&texts, tally)
        }
    }
}

struct Selection {
    conjecture: ConjectureChoice,
    x: Option<u32>,
    quotient: bool,
    tie_policy: TiePolicy,
}

fn conj41(family: &SetFamily, variant: Conj41Variant, quotient: bool) -> Result<Verdict> {
    if quotient && !family.is_separating() {
        let mut v = check_conj41(&family.separating_quotient(), variant)?;
        v.detail.insert("quotient".into(), Value::Bool(true));
        Ok(v)
    } else {
        check_conj41(family, variant)
    }
}

fn evaluate(family: &SetFamily, s: &Selection) -> Result<Vec<Verdict>> {
    Ok(match s.conjecture {
        ConjectureChoice::Frankl => vec![check_frankl(family)?],
        ConjectureChoice::C21 => match s.x {
            Some(x) => vec![check_conj21_at(family, x)?],
            None => check_conj21_all(family)?,
        },
        ConjectureChoice::Doubleton => vec![check_doubleton_implication(family)],
        ConjectureChoice::Reimer => vec![check_reimer(family)?],
        ConjectureChoice::C41a => vec![conj41(family, Conj41Variant::A, s.quotient)?],
        ConjectureChoice::C41b => vec![conj41(family, Conj41Variant::B, s.quotient)?],
        ConjectureChoice::C35 => check_conj35_on_family(family, s.tie_policy)?,
        ConjectureChoice::All => {
            let mut out = vec![check_frankl(family)?];
            out.extend(check_conj21_all(family)?);
            out.push(check_doubleton_implication(family));
            out.push(check_reimer(family)?);
            out.push(conj41(family, Conj41Variant::A, true)?);
            out.push(conj41(family, Conj41Variant::B, true)?);
            if !family.contains(SetMask::EMPTY) {
                out.extend(check_conj35_on_family(family, s.tie_policy)?);
            }
            out
        }
    })
}

fn check_all(families: &[Located<SetFamily>], s: &Selection, tally: &mut Tally) -> Result<()> {
    let results: Vec<Result<Vec<Verdict>>> =
        families.par_iter().map(|f| at_line(f.line, evaluate(&f.value, s))).collect();
    for r in results {
        tally.families += 1;
        for v in r? {
            tally.verdict(&v);
        }
    }
    Ok(())
}

fn random_batch(n: u32, n_max: u32, density: f64, seed: u64, count: usize) -> Result<Vec<Located<SetFamily>>> {
    if n_max < n {
        return Err(Error::input(format!("--n-max {n_max} is below --n {n}")));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(u32, u64)> = (0..count).map(|_| (master.random_range(n..=n_max), master.random())).collect();
    draws
        .into_par_iter()
        .enumerate()
        .map(|(i, (n, s))| random_union_closed(n, density, s).map(|value| Located { line: i + 1, value }))
        .collect()
}

fn enumerate(
    n: u32,
    no_empty: bool,
    out: Option<&PathBuf>,
    count_only: bool,
    checkpoint: Option<&PathBuf>,
    tally: &mut Tally,
) -> Result<()> {
    let mut spec = EnumerationSpec::new(n)?;
    if no_empty {
        spec = spec.without_empty_member();
    }
    let count = match (checkpoint, out) {
        (Some(ck), _) => {
            let resuming = ck.exists();
            let mut writer = match out {
                Some(path) => {
                    let file = OpenOptions::new().create(true).append(resuming).write(true).truncate(!resuming).open(path)?;
                    let mut w = BufWriter::new(file);
                    if !resuming {
                        writeln!(w, "#universe {n}")?;
                    }
                    Some(w)
                }
                None => None,
            };
            let count = run_checkpointed(spec, ck, |f| {
                if let Some(w) = writer.as_mut() {
                    writeln!(w, "{}", render_family(&f))?;
                }
                Ok(())
            })?;
            if let Some(mut w) = writer {
                w.flush()?;
            }
            count
        }
        (None, Some(path)) => {
            let mut w = BufWriter::new(File::create(path)?);
            let mut count = 0u64;
            writeln!(w, "#universe {n}")?;
            for f in enumerate_union_closed(spec)? {
                writeln!(w, "{}", render_family(&f))?;
                count += 1;
            }
            w.flush()?;
            count
        }
        (None, None) if count_only => enumerate_union_closed(spec)?.count() as u64,
        (None, None) => {
            if n > 4 {
                return Err(Error::input("n = 5 output is too large for stdout; use --out or --count-only"));
            }
            let mut count = 0u64;
            for f in enumerate_union_closed(spec)? {
                tally.lines.push(render_family(&f));
                count += 1;
            }
            tally.families = count as usize;
            return Ok(());
        }
    };
    tally.families = count as usize;
    tally.line(&json!({ "n": n, "exclude_empty_member": no_empty, "count": count }));
    Ok(())
}

#[derive(Serialize)]
struct PartitionLine {
    fingerprint: FamilyFingerprint,
    labels: Vec<Option<crate::family::ElementId>>,
    sizes: SizeSequence,
    frankl_ok: bool,
    conj35_ok: bool,
    corollary34_ok: bool,
    tie_break: TieBreak,
    corollary34_violations: Vec<crate::partition::SuffixViolation>,
    block_unions: bool,
    blocks_checked: Value,
}

fn partition(families: &[Located<SetFamily>], tie_break: TieBreak, mode: BlockCheck, tally: &mut Tally) -> Result<()> {
    let results: Vec<Result<(PartitionLine, bool)>> = families
        .par_iter()
        .map(|f| {
            at_line(f.line, {
                let family = &f.value;
                build_partition(family, tie_break).and_then(|p| {
                    let unions = verify_block_unions(family, &p, mode)?;
                    let sizes = p.sizes();
                    let line = PartitionLine {
                        fingerprint: family.fingerprint(),
                        labels: p.labels().to_vec(),
                        frankl_ok: sizes.frankl_ok(),
                        conj35_ok: sizes.conj35_ok(),
                        corollary34_ok: sizes.corollary34_ok(),
                        tie_break,
                        corollary34_violations: sizes.corollary34_violations(),
                        block_unions: unions.holds,
                        blocks_checked: unions.detail["subsets_checked"].clone(),
                        sizes,
                    };
                    Ok((line, !family.contains(SetMask::EMPTY)))
                })
            })
        })
        .collect();
    for r in results {
        let (line, empty_free) = r?;
        tally.families += 1;
        let ce = Some(Failure::Counterexample);
        tally.record("block_unions", line.block_unions, (!line.block_unions).then_some(Failure::Internal));
        tally.record("frankl", line.frankl_ok, (!line.frankl_ok).then_some(Failure::Counterexample));
        tally.record("corollary34", line.corollary34_ok, if line.corollary34_ok { None } else { ce });
        if empty_free {
            tally.record("conj35", line.conj35_ok, if line.conj35_ok { None } else { ce });
        }
        tally.line(&line);
    }
    Ok(())
}

fn witness(families: &[Located<SetFamily>], trace: bool, extend: bool, tally: &mut Tally) -> Result<()> {
    let results: Vec<Result<(Vec<WitnessCertificate>, Option<Verdict>)>> = families
        .par_iter()
        .map(|f| {
            let family = &f.value;
            at_line(f.line, (|| {
                let chain = construct_witness_chain_with(family, trace)?;
                verify_chain(family, &chain)
                    .map_err(|(i, r)| Error::internal(format!("certificate {} rejected: {r}", i + 1)))?;
                if !extend {
                    return Ok((chain, None));
                }
                let ext = extend_chain_via_q23(family, chain)?;
                verify_chain(family, &ext.certificates)
                    .map_err(|(i, r)| Error::internal(format!("certificate {} rejected: {r}", i + 1)))?;
                let stall = ext.stalled_at.map(|x| {
                    let c = ext.certificates.last().expect("chain starts with the base certificate").c_set;
                    Verdict::new(
                        ConjectureId::Q23,
                        family,
                        false,
                        None,
                        json!({ "stalled_at": x, "c_set": c.to_string() }),
                    )
                });
                Ok((ext.certificates, stall))
            })())
        })
        .collect();
    for r in results {
        let (chain, stall) = r?;
        tally.families += 1;
        tally.record(ConjectureId::WitnessChain.as_str(), true, None);
        for cert in &chain {
            tally.line(cert);
        }
        if let Some(v) = stall {
            tally.verdict(&v);
        }
    }
    Ok(())
}

fn q23_verdict(family: &MultiFamily, max_members: usize) -> Result<Verdict> {
    let found = solve_q23_with_limit(family, max_members)?;
    let (holds, witness, detail) = match found {
        Some(sol) => (
            true,
            Some(Witness::Sets(sol.sub_family.members().to_vec())),
            json!({ "indices": sol.indices, "union_size": sol.union_size, "members": family.len() }),
        ),
        None => (false, None, json!({ "members": family.len(), "union_size": family.union().len() })),
    };
    Ok(Verdict {
        conjecture: ConjectureId::Q23,
        fingerprint: family.fingerprint(),
        holds,
        witness,
        detail: match detail {
            Value::Object(m) => m,
            _ => Map::new(),
        },
        proven: false,
    })
}

fn q23(families: &[Located<MultiFamily>], max_members: usize, tally: &mut Tally) -> Result<()> {
    let results: Vec<Result<Verdict>> =
        families.par_iter().map(|f| at_line(f.line, q23_verdict(&f.value, max_members))).collect();
    for r in results {
        tally.families += 1;
        tally.verdict(&r?);
    }
    Ok(())
}

#[derive(Serialize)]
struct SequenceLine {
    sizes: SizeSequence,
    frankl_ok: bool,
    conj35_ok: bool,
    corollary34_ok: bool,
    corollary34_violations: Vec<crate::partition::SuffixViolation>,
    tail_sum: u64,
    mu_bound: u64,
}

fn sequence(texts: &[(usize, String)], tally: &mut Tally) -> Result<()> {
    for (line, text) in texts {
        let sizes: Vec<u64> = text
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse { line: *line, message: format!("bad size list `{text}`") })?;
        let seq = at_line(*line, SizeSequence::new(sizes))?;
        let out = SequenceLine {
            frankl_ok: seq.frankl_ok(),
            conj35_ok: seq.conj35_ok(),
            corollary34_ok: seq.corollary34_ok(),
            corollary34_violations: seq.corollary34_violations(),
            tail_sum: seq.tail_sum(),
            mu_bound: mu_bound(seq.sizes()[0], seq.width()),
            sizes: seq,
        };
        // raw sequences are not families, so nothing here is a counterexample
        tally.record("sequence_frankl", out.frankl_ok, None);
        tally.record("sequence_conj35", out.conj35_ok, None);
        tally.record("sequence_corollary34", out.corollary34_ok, None);
        tally.line(&out);
    }
    Ok(())
}

#[derive(Serialize)]
struct ReplayLine {
    line: usize,
    kind: &'static str,
    fingerprint: Option<String>,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

struct FamilyIndex {
    sets: HashMap<FamilyFingerprint, SetFamily>,
    multis: HashMap<FamilyFingerprint, MultiFamily>,
    known: Vec<FamilyFingerprint>,
}

impl FamilyIndex {
    fn new(text: &str) -> Result<Self> {
        let mut sets = HashMap::new();
        let mut known = Vec::new();
        for f in parse_families(text)? {
            let fp = f.value.fingerprint();
            known.push(fp);
            if !f.value.is_empty() && !f.value.is_separating() {
                let q = f.value.separating_quotient();
                sets.entry(q.fingerprint()).or_insert(q);
            }
            sets.insert(fp, f.value);
        }
        let multis = parse_multi_families(text)?.into_iter().map(|f| (f.value.fingerprint(), f.value)).collect();
        Ok(FamilyIndex { sets, multis, known })
    }

    fn mismatch(&self, wanted: FamilyFingerprint) -> String {
        let have: Vec<String> = self.known.iter().map(|f| f.to_string()).collect();
        format!("fingerprint mismatch: record has {wanted}, families file has [{}]", have.join(", "))
    }
}

fn recompute(record: &Value, index: &FamilyIndex) -> std::result::Result<(), String> {
    let fp: FamilyFingerprint = record["fingerprint"]
        .as_str()
        .and_then(|s| s.parse().ok())
        .ok_or("missing or malformed fingerprint")?;
    let id = record["conjecture"].as_str().ok_or("missing conjecture")?;
    let detail = &record["detail"];
    let fresh = if id == ConjectureId::Q23.as_str() && detail.get("stalled_at").is_none() {
        let family = index.multis.get(&fp).ok_or_else(|| index.mismatch(fp))?;
        let max = family.len().max(Q23_DEFAULT_MAX_MEMBERS);
        q23_verdict(family, max).map_err(|e| e.to_string())?
    } else {
        let family = index.sets.get(&fp).ok_or_else(|| index.mismatch(fp))?;
        let err = |e: Error| e.to_string();
        match id {
            "frankl" => check_frankl(family).map_err(err)?,
            "conj21" => {
                let x = detail["x"].as_u64().ok_or("conj21 record lacks x")? as u32;
                check_conj21_at(family, x).map_err(err)?
            }
            "doubleton_implication" => check_doubleton_implication(family),
            "reimer" => check_reimer(family).map_err(err)?,
            "conj41a" | "conj41b" => {
                let variant = if id == "conj41a" { Conj41Variant::A } else { Conj41Variant::B };
                let mut v = check_conj41(family, variant).map_err(err)?;
                if detail.get("quotient").is_some() {
                    v.detail.insert("quotient".into(), Value::Bool(true));
                }
                v
            }
            "conj35" => {
                let policy = match detail["tie_break"].as_str() {
                    Some("min") => TiePolicy::AllMin,
                    Some("max") => TiePolicy::AllMax,
                    _ => return Err("conj35 record lacks tie_break".into()),
                };
                check_conj35_on_family(family, policy).map_err(err)?.remove(0)
            }
            other => return Err(format!("cannot replay `{other}` records")),
        }
    };
    let fresh = serde_json::to_value(&fresh).expect("verdicts serialize");
    if &fresh == record {
        Ok(())
    } else {
        Err(format!("recomputed verdict differs: {fresh}"))
    }
}

fn replay(certificates: &str, families: &str, tally: &mut Tally) -> Result<()> {
    let index = FamilyIndex::new(families)?;
    tally.families = index.known.len();
    for (i, raw) in certificates.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(raw).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        // report files carry a header and a summary around the records
        if value.get("summary").is_some() || value.get("tool").is_some() {
            continue;
        }
        let fingerprint = value.get("fingerprint").and_then(Value::as_str).map(str::to_string);
        let (kind, outcome) = if value.get("branch").is_some() {
            let cert: WitnessCertificate =
                serde_json::from_value(value).map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let outcome = match index.sets.get(&cert.fingerprint) {
                Some(family) => verify_certificate(family, &cert).map_err(|r| r.to_string()),
                None => Err(index.mismatch(cert.fingerprint)),
            };
            ("certificate", outcome)
        } else if value.get("conjecture").is_some() {
            ("verdict", recompute(&value, &index))
        } else {
            return Err(Error::Parse { line, message: "neither a certificate nor a verdict".into() });
        };
        let ok = outcome.is_ok();
        tally.record(&format!("replay_{kind}"), ok, (!ok).then_some(Failure::Counterexample));
        tally.line(&ReplayLine { line, kind, fingerprint, ok, reason: outcome.err() });
    }
    Ok(())
}

/// Binary entry point: parse, run, print, exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = RunConfig::from_cli(cli);
    match run(&config) {
        Ok(report) => {
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            for line in &report.lines {
                if writeln!(out, "{line}").is_err() {
                    break;
                }
            }
            let _ = out.flush();
            eprint!("{}", report.human_summary());
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn run_cmd(args: &[&str]) -> Result<RunReport> {
        let mut full = vec!["uclab", "--workers", "2"];
        full.extend_from_slice(args);
        run(&RunConfig::from_cli(Cli::try_parse_from(full).unwrap()))
    }

    #[test]
    fn check_frankl_file() {
        let f = file("1 1,2\n0 1\n#universe 3\n0 1 2 3 1,2 1,3 2,3 1,2,3\n");
        let r = run_cmd(&["check", "--conjecture", "frankl", "--input", f.path().to_str().unwrap()]).unwrap();
        assert_eq!(r.exit_code, 0);
        assert_eq!(r.lines.len(), 3);
        assert_eq!(r.summary["checks"]["frankl"]["holds"], 3);
    }

    #[test]
    fn c21_on_cube_gives_three_lines() {
        let f = file("0 1 2 3 1,2 1,3 2,3 1,2,3\n");
        let r = run_cmd(&["check", "--conjecture", "c21", "--input", f.path().to_str().unwrap()]).unwrap();
        assert_eq!(r.exit_code, 0);
        assert_eq!(r.lines.len(), 3);
    }

    #[test]
    fn parse_error_has_line() {
        let f = file("1\n1,,2\n");
        let e = run_cmd(&["check", "--conjecture", "frankl", "--input", f.path().to_str().unwrap()]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn non_separating_c41_needs_quotient() {
        let f = file("0 1,2\n");
        let path = f.path().to_str().unwrap();
        assert!(run_cmd(&["check", "--conjecture", "c41b", "--input", path]).is_err());
        let r = run_cmd(&["check", "--conjecture", "c41b", "--quotient", "--input", path]).unwrap();
        assert_eq!(r.exit_code, 0);
        assert!(r.lines[0].contains("\"quotient\":true"));
    }

    #[test]
    fn sequence_rows() {
        let r = run_cmd(&["sequence", "100,50,25,12,5", "60,30,20,10,5"]).unwrap();
        assert_eq!(r.exit_code, 0);
        let row4: Value = serde_json::from_str(&r.lines[1]).unwrap();
        assert_eq!(row4["frankl_ok"], false);
        assert_eq!(row4["corollary34_violations"][1]["k"], 2);
    }

    #[test]
    fn witness_then_replay() {
        let fams = file("0 1 2 3 1,2 1,3 2,3 1,2,3\n");
        let r = run_cmd(&["witness", "--input", fams.path().to_str().unwrap()]).unwrap();
        assert_eq!(r.lines.len(), 2);
        let certs = file(&r.lines.join("\n"));
        let args = ["replay", "--certificates", certs.path().to_str().unwrap(), "--families", fams.path().to_str().unwrap()];
        assert_eq!(run_cmd(&args).unwrap().exit_code, 0);

        let flipped = r.lines[1].replace("\"counts\":[2,2]", "\"counts\":[2,3]");
        assert_ne!(flipped, r.lines[1]);
        let certs = file(&flipped);
        let args = ["replay", "--certificates", certs.path().to_str().unwrap(), "--families", fams.path().to_str().unwrap()];
        assert_eq!(run_cmd(&args).unwrap().exit_code, 2);

        let empty = file("");
        let args = ["replay", "--certificates", empty.path().to_str().unwrap(), "--families", fams.path().to_str().unwrap()];
        let r = run_cmd(&args).unwrap();
        assert_eq!((r.exit_code, r.lines.len()), (0, 0));
    }

    #[test]
    fn verdicts_replay() {
        let fams = file("0 1 2 3 1,2 1,3 2,3 1,2,3\n1 1,2 1,2,3\n0 1,2\n");
        let r = run_cmd(&["check", "--conjecture", "all", "--input", fams.path().to_str().unwrap()]).unwrap();
        assert_eq!(r.exit_code, 0);
        let verdicts = file(&r.to_jsonl());
        let args = ["replay", "--certificates", verdicts.path().to_str().unwrap(), "--families", fams.path().to_str().unwrap()];
        let replayed = run_cmd(&args).unwrap();
        assert_eq!(replayed.exit_code, 0, "{:?}", replayed.lines);
        assert_eq!(replayed.lines.len(), r.lines.len());
    }

    #[test]
    fn exit_codes_follow_the_worst_failure() {
        let f = SetFamily::power_set(2);
        let mut t = Tally::default();
        t.verdict(&Verdict::new(ConjectureId::Frankl, &f, true, None, Value::Null));
        assert_eq!(t.exit_code(), 0);
        t.verdict(&Verdict::new(ConjectureId::Conj41b, &f, false, None, Value::Null));
        assert_eq!(t.exit_code(), 2);
        t.verdict(&Verdict::new(ConjectureId::Reimer, &f, false, None, Value::Null).proven(true));
        assert_eq!(t.exit_code(), 3);
        let r = t.finish(Value::Null);
        assert_eq!(r.summary["counterexamples"], 1);
        assert_eq!(r.summary["internal_failures"], 1);
        assert_eq!(r.summary["lines"], 3);
    }

    #[test]
    fn report_body_is_deterministic() {
        let a = run_cmd(&["random", "--n", "5", "--n-max", "7", "--count", "20", "--seed", "9"]).unwrap();
        let b = run(&RunConfig {
            workers: 1,
            ..RunConfig::from_cli(Cli::try_parse_from(["uclab", "random", "--n", "5", "--n-max", "7", "--count", "20", "--seed", "9"]).unwrap())
        })
        .unwrap();
        assert_eq!(a.body(), b.body());
        assert_eq!(a.exit_code, 0);
    }
}
