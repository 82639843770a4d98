//! End-to-end acceptance run at the default configuration: one line per
//! criterion, then a determinism check and a golden-report comparison.

use std::time::{Duration, Instant};

use pseudoconvex::pipeline::{
    assemble, run_claim, run_pipeline, ClaimOutput, ClaimStatus, Context, GramCache, Pipeline, PipelineConfig,
    VerificationReport,
};

const GOLDEN: &str = include_str!("golden/verify-all.json");
const GOLDEN_REL_TOL: f64 = 1e-9;

fn budget(id: u32) -> Duration {
    Duration::from_secs(match id {
        1 => 3, // three solves, under a second each
        2 | 5 => 10,
        3 => 30,
        4 => 120,
        6 | 9 => 60,
        8 => 5,
        _ => 300,
    })
}

#[test]
fn acceptance_criteria() {
    let cfg = PipelineConfig::default();
    let cache_dir = tempfile::tempdir().unwrap();
    let cache = GramCache::new(cache_dir.path()).unwrap();
    let ctx = Context {
        config: &cfg,
        cache: Some(&cache),
        artifacts: false,
    };
    let mut outputs: Vec<ClaimOutput> = Vec::new();
    let mut failed = Vec::new();
    for id in Pipeline::VerifyAll.claims() {
        let start = Instant::now();
        let out = run_claim(&ctx, *id);
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget(*id);
        let ok = out.record.status == ClaimStatus::Pass && in_time;
        println!(
            "criterion {id:>2} {}: {} ({:.2?}, budget {:?}){}",
            out.record.title,
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            budget(*id),
            if out.record.note.is_empty() { String::new() } else { format!(" - {}", out.record.note) }
        );
        if !ok {
            failed.push(*id);
        }
        outputs.push(out);
    }
    let assembled = assemble(Pipeline::VerifyAll, &cfg, &outputs).unwrap();

    // criterion 11: two full runs, one cold and one through the warm cache
    let cold = run_pipeline(&cfg, Pipeline::VerifyAll, None, None).unwrap().to_json().unwrap();
    let warm = run_pipeline(&cfg, Pipeline::VerifyAll, None, Some(&cache)).unwrap().to_json().unwrap();
    let same = cold == warm && warm == assembled.to_json().unwrap();
    println!("criterion 11 determinism: {}", if same { "PASS" } else { "FAIL" });
    if !same {
        failed.push(11);
    }

    let golden = VerificationReport::from_json(GOLDEN).unwrap();
    let diffs = assembled.compare(&golden, GOLDEN_REL_TOL);
    println!("golden report: {}", if diffs.is_empty() { "match" } else { "MISMATCH" });
    for d in &diffs {
        println!("  {d}");
    }
    assert!(failed.is_empty(), "failed criteria {failed:?}\n{}", assembled.to_text());
    assert!(diffs.is_empty(), "report drifted from the golden file");
}
