//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::{HashSet, VecDeque};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use uclab::checks::proven_range;
use uclab::witness::solve_q23;
use uclab::{
    build_partition, check_conj21_all, check_conj21_at, check_doubleton_implication, check_reimer,
    construct_witness_chain, enumerate_union_closed, mix_lower_bound, mu_bound, random_family, random_union_closed,
    reimer_bound, reimer_sum, render_family, verify_block_unions, verify_chain, BlockCheck, Branch,
    EnumerationSpec, MultiFamily, SetFamily, SetMask, SizeSequence, TieBreak, Verdict,
};

/// Slack on the real-valued side of integer-vs-real comparisons.
const BOUND_SLACK: f64 = 1e-9;
/// Relative tolerance for equalities between real expressions.
const REL_TOL: f64 = 1e-9;

const TABLE_BUDGET: Duration = Duration::from_secs(1);
const DOUBLETON_BUDGET: Duration = Duration::from_secs(60);

const RANDOM_CLOSED_TRIALS: u64 = 10_000;
const RANDOM_FAMILY_TRIALS: u64 = 100_000;
const JOIN_PAIRS: u64 = 10_000;
const EXTENSIONS: u64 = 1_000;
const MU_TRIALS: u64 = 10_000;
const DENSITIES: [f64; 4] = [0.05, 0.15, 0.3, 0.5];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden"))
}

fn uclab(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_uclab")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn small_families() -> Vec<SetFamily> {
    (1..=4).flat_map(|n| enumerate_union_closed(EnumerationSpec::new(n).unwrap()).unwrap()).collect()
}

fn table_rows() -> Outcome {
    let start = Instant::now();
    let rows = ["100,50,25,12,5", "100,40,10,5,2", "100,40,18,10,7", "60,30,20,10,5"];
    let expected = [(true, true), (true, true), (true, false), (false, false)];
    let (code, out) = uclab(&["sequence", rows[0], rows[1], rows[2], rows[3]])?;
    ensure(code == 0, || format!("exit {code}"))?;
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    ensure(lines.len() == 4, || format!("{} lines", lines.len()))?;
    for (i, (line, &(frankl, doubling))) in lines.iter().zip(&expected).enumerate() {
        let got = (line["frankl_ok"].as_bool(), line["conj35_ok"].as_bool());
        ensure(got == (Some(frankl), Some(doubling)), || format!("row {}: {got:?}", i + 1))?;
    }
    let flagged = lines[3]["corollary34_violations"]
        .as_array()
        .is_some_and(|v| v.iter().any(|x| x["k"] == 2 && x["size"] == 30 && x["suffix_sum"] == 35));
    ensure(flagged, || "row 4 lacks the k=2 (30 < 35) flag".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < TABLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok("rows (Y,Y) (Y,Y) (Y,N) (N,N), row 4 flagged at k=2".into())
}

fn witness_chains(families: &[SetFamily]) -> Outcome {
    let certificates: usize = families
        .par_iter()
        .map(|f| -> Result<usize, String> {
            let chain = construct_witness_chain(f).map_err(|e| format!("{}: {e}", render_family(f)))?;
            let n = f.base_set().len();
            ensure(chain.len() as u32 == proven_range(n), || format!("{}: short chain", render_family(f)))?;
            verify_chain(f, &chain).map_err(|(i, r)| format!("{} cert {i}: {r}", render_family(f)))?;
            for cert in chain.iter().filter(|c| c.branch == Branch::Construction) {
                // the step from hypothesis level x to x + 1
                let x = cert.x - 1;
                let z = cert.z_union.expect("construction carries Z").len();
                let d = cert.d_set.expect("construction carries D");
                ensure(z <= 2 * (x - 1), || format!("|Z| = {z} > 2x - 2 at x = {x}"))?;
                ensure(n >= x + z, || format!("n - x - |Z| < 0 at x = {x}"))?;
                ensure(f.contains(d), || format!("D = {d} not a member"))?;
                ensure(d.len() == n - x, || format!("|D| = {} != n - x", d.len()))?;
            }
            Ok(chain.len())
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(format!("{} families, {certificates} certificates verified", families.len()))
}

/// A failing verdict counts only if recomputing it gives the same record.
fn replayable(family: &SetFamily, v: &Verdict) -> bool {
    let x = v.detail["x"].as_u64().unwrap_or(0) as u32;
    check_conj21_at(family, x).is_ok_and(|again| again.to_json_line() == v.to_json_line())
}

fn conj21_sweep(families: &[SetFamily]) -> Outcome {
    let sweep = |f: &SetFamily| -> Result<Vec<String>, String> {
        let verdicts = check_conj21_all(f).map_err(|e| e.to_string())?;
        let mut counterexamples = Vec::new();
        for v in verdicts.iter().filter(|v| !v.holds) {
            ensure(replayable(f, v), || format!("non-replayable failure {}", v.to_json_line()))?;
            ensure(!v.proven, || format!("proven range violated: {}", v.to_json_line()))?;
            counterexamples.push(v.to_json_line());
        }
        Ok(counterexamples)
    };
    let mut found: Vec<String> = Vec::new();
    for f in families {
        found.extend(sweep(f)?);
    }
    let random: Vec<Result<Vec<String>, String>> = (0..RANDOM_CLOSED_TRIALS)
        .into_par_iter()
        .map(|seed| {
            let n = 5 + (seed % 4) as u32;
            let f = random_union_closed(n, DENSITIES[(seed / 4 % 4) as usize], seed).map_err(|e| e.to_string())?;
            sweep(&f)
        })
        .collect();
    for r in random {
        found.extend(r?);
    }
    for line in &found {
        println!("    counterexample: {line}");
    }
    Ok(format!(
        "{} enumerated + {RANDOM_CLOSED_TRIALS} random families, {} replayable counterexamples",
        families.len(),
        found.len()
    ))
}

fn doubleton_property() -> Outcome {
    let start = Instant::now();
    let violations: Vec<u64> = (0..RANDOM_FAMILY_TRIALS)
        .into_par_iter()
        .filter(|&seed| {
            let n = 2 + (seed % 7) as u32;
            let f = random_family(n, DENSITIES[(seed / 7 % 4) as usize], seed).unwrap();
            !check_doubleton_implication(&f).holds
        })
        .collect();
    ensure(violations.is_empty(), || format!("violations at seeds {:?}", &violations[..violations.len().min(5)]))?;
    let elapsed = start.elapsed();
    ensure(elapsed < DOUBLETON_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{RANDOM_FAMILY_TRIALS} random families, 0 violations in {:.1}s", elapsed.as_secs_f64()))
}

fn reimer(families: &[SetFamily]) -> Outcome {
    for f in families {
        let sum = reimer_sum(f) as f64;
        let bound = reimer_bound(f.len());
        ensure(sum >= bound - BOUND_SLACK * bound.max(1.0), || format!("{}: {sum} < {bound}", render_family(f)))?;
        ensure(check_reimer(f).map_err(|e| e.to_string())?.holds, || "check_reimer disagrees".into())?;
    }
    let cube = SetFamily::power_set(3);
    let (sum, bound) = (reimer_sum(&cube), reimer_bound(cube.len()));
    ensure(sum == 12 && (bound - 12.0).abs() <= REL_TOL * 12.0, || format!("cube: {sum} vs {bound}"))?;
    Ok(format!("{} families, cube equality 12 = {bound}", families.len()))
}

fn block_unions(families: &[SetFamily]) -> Outcome {
    let partitions: usize = families
        .par_iter()
        .map(|f| -> Result<usize, String> {
            for tb in [TieBreak::Min, TieBreak::Max] {
                let p = build_partition(f, tb).map_err(|e| e.to_string())?;
                p.validate(f)?;
                let v = verify_block_unions(f, &p, BlockCheck::Exhaustive).map_err(|e| e.to_string())?;
                ensure(v.holds, || format!("{} ({tb:?}): {}", render_family(f), v.to_json_line()))?;
            }
            Ok(2)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(format!("{partitions} partitions, every block union closed"))
}

fn join_and_extension() -> Outcome {
    let bad_joins = (0..JOIN_PAIRS)
        .into_par_iter()
        .filter(|&seed| {
            let n = 2 + (seed % 5) as u32;
            let d = DENSITIES[(seed % 4) as usize];
            let a = random_union_closed(n, d, 2 * seed).unwrap();
            let b = random_union_closed(n, d, 2 * seed + 1).unwrap();
            !a.join(&b).unwrap().is_union_closed()
        })
        .count();
    ensure(bad_joins == 0, || format!("{bad_joins} joins not closed"))?;

    let extensions: Vec<Result<(), String>> = (0..EXTENSIONS)
        .into_par_iter()
        .map(|seed| {
            let n = 1 + (seed % 6) as u32;
            let f = random_union_closed(n, DENSITIES[(seed % 4) as usize], seed).unwrap().separating_quotient();
            let (g, z) = f.extend_with_new_element().map_err(|e| e.to_string())?;
            let (old, new) = (f.frequency_profile(), g.frequency_profile());
            ensure(g.len() == 2 * f.len(), || format!("|A'| = {} for |A| = {}", g.len(), f.len()))?;
            ensure(new.count(z) == f.len(), || "freq(z) != |A|".into())?;
            ensure(g.is_separating() && g.is_union_closed(), || "separation or closure lost".into())?;
            ensure(f.base_set().elements().all(|k| new.count(k) == 2 * old.count(k)), || "frequency not doubled".into())
        })
        .collect();
    for r in extensions {
        r?;
    }
    Ok(format!("{JOIN_PAIRS} joins closed, {EXTENSIONS} extensions checked"))
}

fn numerics(families: &[SetFamily]) -> Outcome {
    for p in 1..=10 {
        let m = 1u64 << p;
        let got = mix_lower_bound(0.5, m).map_err(|e| e.to_string())?;
        let want = m as f64 / 2.0 * (m as f64).log2();
        ensure((got - want).abs() <= REL_TOL * want.max(1.0), || format!("I(1/2) at m = {m}: {got} vs {want}"))?;
    }
    for m in 2..=1024u64 {
        let grid: Vec<f64> = (50..100).map(|c| mix_lower_bound(c as f64 / 100.0, m).unwrap()).collect();
        ensure(grid.windows(2).all(|w| w[0] < w[1]), || format!("I not increasing at m = {m}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let mut doubling_checked = 0;
    for _ in 0..MU_TRIALS {
        let s = rng.random_range(1..=1_000_000u64);
        let w = rng.random_range(1..=40usize);
        ensure(mu_bound(s, w) < s, || format!("mu({s}, {w}) >= {s}"))?;

        let mut seq = vec![s];
        while seq.len() < w {
            let next = seq.last().unwrap() / rng.random_range(2..=4u64);
            if next == 0 {
                break;
            }
            seq.push(next);
        }
        let seq = SizeSequence::new(seq).unwrap();
        if seq.conj35_ok() {
            doubling_checked += 1;
            let mu = mu_bound(s, seq.width());
            ensure(seq.tail_sum() <= mu, || format!("{:?}: tail {} > mu {mu}", seq.sizes(), seq.tail_sum()))?;
        }
    }
    for f in families.iter().filter(|f| !f.contains(SetMask::EMPTY)) {
        let seq = build_partition(f, TieBreak::Min).unwrap().sizes();
        if seq.conj35_ok() {
            doubling_checked += 1;
            ensure(seq.tail_sum() <= mu_bound(seq.sizes()[0], seq.width()), || format!("{:?}", seq.sizes()))?;
        }
    }
    Ok(format!("I(1/2) exact for m = 2,4,..,1024, grid increasing, {doubling_checked} doubling sequences under mu"))
}

fn goldens() -> Outcome {
    let dir = golden_dir();
    let cube = dir.join("cube.txt");
    let cube = cube.to_str().unwrap();
    for (args, file) in [
        (vec!["partition", "--input", cube], "partition_cube.jsonl"),
        (vec!["witness", "--input", cube], "witness_cube.jsonl"),
        (vec!["q23", "--input", dir.join("q23.txt").to_str().unwrap()], "q23.jsonl"),
    ] {
        let (code, out) = uclab(&args)?;
        let want = fs::read_to_string(dir.join(file)).map_err(|e| e.to_string())?;
        ensure(code == 0 && out == want, || format!("{file} differs (exit {code})"))?;
    }

    let p3 = SetFamily::power_set(3);
    let p = build_partition(&p3, TieBreak::Min).map_err(|e| e.to_string())?;
    let labels: Vec<Option<u8>> = p.labels().iter().map(|l| l.map(|e| e.get())).collect();
    ensure(p.sizes().sizes() == [4, 2, 1, 1], || format!("sizes {:?}", p.sizes().sizes()))?;
    ensure(labels == [Some(1), Some(2), Some(3), None], || format!("labels {labels:?}"))?;

    let chain = construct_witness_chain(&p3).map_err(|e| e.to_string())?;
    let step = &chain[1];
    let one_two = SetMask::from_elements([1, 2]).unwrap();
    ensure(
        step.branch == Branch::Construction
            && step.z_union == Some(SetMask::EMPTY)
            && step.v_set == Some(one_two)
            && step.d_set == Some(one_two),
        || format!("x = 2 step {step:?}"),
    )?;

    let one = SetMask::from_elements([1]).unwrap();
    let two = SetMask::from_elements([2]).unwrap();
    let q = MultiFamily::new(vec![one, one, two, SetMask::EMPTY], SetMask::full(2)).unwrap();
    let sol = solve_q23(&q).map_err(|e| e.to_string())?.ok_or("no Q23 solution")?;
    ensure(sol.sub_family.members() == [one, one], || format!("{:?}", sol.sub_family.members()))?;
    Ok("partition [4,2,1,1]/[1,2,3,null], Z=∅ V=D={1,2}, Q23 {{1},{1}}".into())
}

fn closure_oracle(n: u32) -> usize {
    let close = |mut f: u64| loop {
        let mut g = f;
        for a in (0..64).filter(|a| f >> a & 1 == 1) {
            for b in (0..64).filter(|b| f >> b & 1 == 1) {
                g |= 1u64 << (a | b);
            }
        }
        if g == f {
            return f;
        }
        f = g;
    };
    let mut seen = HashSet::from([0u64]);
    let mut queue = VecDeque::from([0u64]);
    while let Some(f) = queue.pop_front() {
        for s in (0..1u64 << n).filter(|s| f >> s & 1 == 0) {
            let g = close(f | 1 << s);
            if seen.insert(g) {
                queue.push_back(g);
            }
        }
    }
    let top = (1u64 << n) - 1;
    seen.into_iter().filter(|&f| f > 1 && f >> top & 1 == 1).count()
}

fn render_all(n: u32) -> String {
    enumerate_union_closed(EnumerationSpec::new(n).unwrap()).unwrap().map(|f| render_family(&f) + "\n").collect()
}

fn enumeration() -> Outcome {
    let counts: Vec<usize> =
        (1..=4).map(|n| enumerate_union_closed(EnumerationSpec::new(n).unwrap()).unwrap().count()).collect();
    ensure(counts[0] == 2 && counts[1] == 8, || format!("n=1,2 counts {:?}", &counts[..2]))?;
    for n in 3..=4 {
        let oracle = closure_oracle(n);
        ensure(counts[n as usize - 1] == oracle, || format!("n={n}: {} vs oracle {oracle}", counts[n as usize - 1]))?;
    }
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| render_all(4));
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| render_all(4));
    ensure(single == many && single == render_all(4), || "runs differ".into())?;
    Ok(format!("counts {counts:?}, oracle agrees for n=3,4, repeated runs identical"))
}

fn main() {
    let families = small_families();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("permissibility table", Box::new(table_rows)),
        ("witness chain n <= 4", Box::new(|| witness_chains(&families))),
        ("balanced subset sweep", Box::new(|| conj21_sweep(&families))),
        ("doubleton implication", Box::new(doubleton_property)),
        ("reimer bound", Box::new(|| reimer(&families))),
        ("block unions", Box::new(|| block_unions(&families))),
        ("join and extension", Box::new(join_and_extension)),
        ("numerics", Box::new(|| numerics(&families))),
        ("worked-example goldens", Box::new(goldens)),
        ("enumeration oracle", Box::new(enumeration)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("PASS {:>2} {name} ({secs:.2}s): {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
