//! Emit certificates and verdicts through the batch driver, then replay
//! them, once untouched and once with a tampered count.

use std::fs;

use uclab::cli::{run, Command, ConjectureChoice, RunConfig};
use uclab::partition::TiePolicy;

fn main() -> uclab::Result<()> {
    let dir = std::env::temp_dir().join(format!("uclab-replay-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let families = dir.join("families.txt");
    fs::write(&families, "#universe 3\n0 1 2 3 1,2 1,3 2,3 1,2,3\n1 1,2 1,2,3\n")?;

    let witness = run(&RunConfig::new(Command::Witness { input: families.clone(), trace: true, extend: false }))?;
    let checks = run(&RunConfig::new(Command::Check {
        conjecture: ConjectureChoice::All,
        input: families.clone(),
        x: None,
        quotient: false,
        tie_policy: TiePolicy::Both,
    }))?;
    let records = dir.join("records.jsonl");
    fs::write(&records, format!("{}{}", witness.body(), checks.body()))?;

    let replay = |path: &std::path::Path| {
        run(&RunConfig::new(Command::Replay { certificates: path.to_path_buf(), families: families.clone() }))
    };
    let clean = replay(&records)?;
    println!("clean replay: {} records, exit {}", clean.lines.len(), clean.exit_code);

    let tampered = dir.join("tampered.jsonl");
    fs::write(&tampered, fs::read_to_string(&records)?.replacen("\"counts\":[2,2]", "\"counts\":[2,1]", 1))?;
    let bad = replay(&tampered)?;
    println!("tampered replay: exit {}", bad.exit_code);
    for line in bad.lines.iter().filter(|l| l.contains("\"ok\":false")) {
        println!("  {line}");
    }
    fs::remove_dir_all(&dir)?;
    Ok(())
}
