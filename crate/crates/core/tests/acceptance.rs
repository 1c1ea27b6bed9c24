//! Runs every acceptance criterion at its registered setting and prints one
//! PASS/FAIL line per criterion. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 1 5 12`.

use std::process::ExitCode;
use std::time::Instant;

use intermap_core::acceptance::{verdict, Criterion};
use intermap_core::lab::run_criterion;

const SEED: u64 = 20_240_601;

/// Numeric arguments pick criteria. Any other name filter that does not
/// match this target, and `--list`, select nothing, as libtest would.
fn selected() -> Vec<Criterion> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return Vec::new();
    }
    let words: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let picks: Vec<usize> = words.iter().filter_map(|a| a.parse().ok()).collect();
    let foreign = words.iter().any(|a| a.parse::<usize>().is_err() && !"acceptance criterion".contains(a.as_str()));
    if foreign && picks.is_empty() {
        return Vec::new();
    }
    Criterion::ALL
        .into_iter()
        .filter(|c| picks.is_empty() || picks.contains(&c.number()))
        .collect()
}

fn main() -> ExitCode {
    let criteria = selected();
    if criteria.is_empty() {
        return ExitCode::SUCCESS;
    }
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let pass = match run_criterion(*c, SEED) {
            Ok(out) => {
                for r in out.rows.iter().filter(|r| r.criterion == Some(*c)) {
                    println!(
                        "    {:<26} {:>14.6e}  {:<14} {}  [{}]",
                        r.metric,
                        r.value,
                        r.tolerance.as_deref().unwrap_or(""),
                        if r.pass { "ok" } else { "out of bounds" },
                        r.params
                    );
                }
                verdict(*c, &out.rows)
            }
            Err(e) => {
                println!("    error: {e}");
                false
            }
        };
        println!(
            "criterion {} ({}): {}  ({:.1} s)",
            c.number(),
            c.title(),
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(c.number());
        }
    }
    println!(
        "\nacceptance: {} of {} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
