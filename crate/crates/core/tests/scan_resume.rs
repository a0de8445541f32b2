use std::fs::{self, OpenOptions};
use std::io::Write;
use std::ops::ControlFlow;
use std::path::Path;

use lonely_spectrum::census::merge_census;
use lonely_spectrum::scan::{run_scan_with, ScanOutcome};
use lonely_spectrum::{run_scan, Error, ScanConfig, ScanParams, Shard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn config(dir: &Path, name: &str, params: ScanParams) -> ScanConfig {
    let mut cfg = ScanConfig::new(params, dir.join(format!("{name}.jsonl")));
    cfg.workers = 2;
    cfg
}

/// Runs a scan, killing it after `stops` checkpoints (in order) and resuming
/// each time, with a torn partial line appended after every kill.
fn interrupted_run(cfg: &mut ScanConfig, stops: &[u64]) -> lonely_spectrum::CensusSummary {
    cfg.resume = false;
    for &stop in stops {
        let mut seen = 0u64;
        let outcome = run_scan_with(cfg, |_| {
            seen += 1;
            if seen == stop { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
        })
        .unwrap();
        assert!(matches!(outcome, ScanOutcome::Interrupted(_)), "scan finished before stop {stop}");
        let mut f = OpenOptions::new().append(true).open(&cfg.output_path).unwrap();
        f.write_all(b"{\"speeds\":[1,2").unwrap();
        cfg.resume = true;
    }
    run_scan(cfg).unwrap()
}

#[test]
fn resume_reproduces_uninterrupted_output() {
    let dir = TempDir::new().unwrap();
    let params = ScanParams::new(4, 24).unwrap();
    let reference_cfg = config(dir.path(), "reference", params.clone());
    let reference = run_scan(&reference_cfg).unwrap();
    let reference_bytes = fs::read(&reference_cfg.output_path).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..3 {
        // Each resumed leg restarts the checkpoint count, so stops are small.
        let stops: Vec<u64> = (0..3).map(|_| rng.gen_range(1..40)).collect();
        let mut cfg = config(dir.path(), &format!("trial{trial}"), params.clone());
        let census = interrupted_run(&mut cfg, &stops);
        assert_eq!(census, reference, "census differs for stops {stops:?}");
        assert_eq!(fs::read(&cfg.output_path).unwrap(), reference_bytes, "output differs for stops {stops:?}");
        assert_eq!(fs::read(cfg.summary_path()).unwrap(), fs::read(reference_cfg.summary_path()).unwrap());
    }
}

#[test]
fn resume_after_completion_is_a_no_op() {
    let dir = TempDir::new().unwrap();
    let mut cfg = config(dir.path(), "done", ScanParams::new(3, 20).unwrap());
    let first = run_scan(&cfg).unwrap();
    let bytes = fs::read(&cfg.output_path).unwrap();
    cfg.resume = true;
    assert_eq!(run_scan(&cfg).unwrap(), first);
    assert_eq!(fs::read(&cfg.output_path).unwrap(), bytes);
}

#[test]
fn checkpoint_from_other_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let mut cfg = config(dir.path(), "scan", ScanParams::new(4, 14).unwrap());
    run_scan_with(&cfg, |_| ControlFlow::Break(())).unwrap();
    cfg.params = ScanParams::new(4, 15).unwrap();
    cfg.resume = true;
    assert!(matches!(run_scan(&cfg), Err(Error::CheckpointMismatch { .. })));
}

#[test]
fn output_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let params = ScanParams::new(4, 20).unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 3] {
        let mut cfg = config(dir.path(), &format!("w{workers}"), params.clone());
        cfg.workers = workers;
        run_scan(&cfg).unwrap();
        outputs.push(fs::read(&cfg.output_path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn sharded_scans_merge_to_whole() {
    let dir = TempDir::new().unwrap();
    let whole = run_scan(&config(dir.path(), "whole", ScanParams::new(4, 22).unwrap())).unwrap();
    let mut merged = None;
    let mut lines = 0;
    for i in 0..3 {
        let params = ScanParams { shard: Some(Shard::new(i, 3).unwrap()), ..ScanParams::new(4, 22).unwrap() };
        let cfg = config(dir.path(), &format!("shard{i}"), params);
        let part = run_scan(&cfg).unwrap();
        lines += fs::read_to_string(&cfg.output_path).unwrap().lines().count() as u64;
        merged = Some(match merged {
            None => part,
            Some(acc) => merge_census(&acc, &part).unwrap(),
        });
    }
    assert_eq!(merged.unwrap(), whole);
    assert_eq!(lines, whole.total);
}
