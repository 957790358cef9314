use std::fs::{self, File};
use std::io::BufWriter;

use ellhyp::identities::{aggregate, run_suite, write_csv, write_jsonl, IdentityId, Status, VerificationReport};

use crate::config::{resolve, VerifyArgs, SEED_ENV};
use crate::{Failure, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC};

const SHOWN_FAILURES: usize = 20;

fn io_failure(what: &str, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_FAILED, format!("{what}: {e}"))
}

fn summarize(reports: &[VerificationReport]) {
    println!("{:<20} {:>9} {:>6} {:>6} {:>12}", "identity", "passed", "failed", "inconc", "max_rel_err");
    for id in IdentityId::ALL {
        let rs: Vec<_> = reports.iter().filter(|r| r.id == id).collect();
        if rs.is_empty() {
            continue;
        }
        let count = |s: Status| rs.iter().filter(|r| r.status == s).count();
        let worst = rs.iter().filter_map(|r| r.rel_err).fold(0.0, f64::max);
        println!(
            "{:<20} {:>9} {:>6} {:>6} {:>12.3e}",
            id.name(),
            format!("{}/{}", count(Status::Pass), rs.len()),
            count(Status::Fail),
            count(Status::Inconclusive),
            worst
        );
        let mut notes: Vec<&str> = rs.iter().filter_map(|r| r.note.as_deref()).collect();
        notes.sort_unstable();
        notes.dedup();
        for note in notes {
            println!("    note: {note}");
        }
    }
}

pub fn run(args: VerifyArgs) -> Result<u8, Failure> {
    let cfg = resolve(args, std::env::var(SEED_ENV).ok())?;
    let reports = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure::new(EXIT_INPUT, format!("jobs: {e}")))?
            .install(|| run_suite(&cfg.suite)),
        None => run_suite(&cfg.suite),
    };

    fs::create_dir_all(&cfg.out).map_err(|e| io_failure(&cfg.out.display().to_string(), e))?;
    let jsonl = cfg.out.join("reports.jsonl");
    let file = File::create(&jsonl).map_err(|e| io_failure(&jsonl.display().to_string(), e))?;
    write_jsonl(&reports, BufWriter::new(file)).map_err(|e| io_failure(&jsonl.display().to_string(), e))?;
    let csv = cfg.out.join("summary.csv");
    let file = File::create(&csv).map_err(|e| io_failure(&csv.display().to_string(), e))?;
    write_csv(&aggregate(&reports), BufWriter::new(file)).map_err(|e| io_failure(&csv.display().to_string(), e))?;

    summarize(&reports);
    let failed: Vec<_> = reports.iter().filter(|r| r.status == Status::Fail).collect();
    let inconclusive = reports.iter().filter(|r| r.status == Status::Inconclusive).count();
    for r in failed.iter().take(SHOWN_FAILURES) {
        let detail = match (&r.error, r.rel_err) {
            (Some(e), _) => e.clone(),
            (None, Some(e)) => format!("rel_err {e:.3e} ≥ {:.1e}", r.tolerance),
            (None, None) => "no result".into(),
        };
        eprintln!("FAIL {} {} {} seed {}: {detail}", r.id, r.kernel, r.sizes, r.seed);
    }
    println!(
        "{} cases: {} passed, {} failed, {} inconclusive (seed {}); reports in {}",
        reports.len(),
        reports.iter().filter(|r| r.pass).count(),
        failed.len(),
        inconclusive,
        cfg.suite.seed,
        cfg.out.display()
    );
    if reports.is_empty() {
        return Err(Failure::new(EXIT_INPUT, "no cases match the selection"));
    }
    if !failed.is_empty() {
        Ok(EXIT_FAILED)
    } else if 2 * inconclusive > reports.len() {
        Ok(EXIT_NUMERIC)
    } else {
        Ok(0)
    }
}
