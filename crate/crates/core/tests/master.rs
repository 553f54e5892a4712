mod common;

use std::time::Duration;

use common::*;
use mts::node::NodeRecord;
use mts::scheduler::{Checkpoint, Outcome, Params, Start};
use mts_oracles::fixture::{FixtureTree, EXAMPLE_TREE};
use mts_oracles::parse_output;

fn all_labels() -> Vec<Vec<u32>> {
    (0..25).map(|v| vec![v]).collect()
}

fn once_each(run: &Run) {
    let m = run.nodes();
    assert_eq!(m.keys().cloned().collect::<Vec<_>>(), all_labels(), "{}", run.out);
    assert!(m.values().all(|&c| c == 1), "duplicates: {m:?}");
}

#[test]
fn one_worker_default_parameters() {
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 1, &Params::default(), 0, Start::Fresh);
    once_each(&r);
    assert_eq!(r.summary.total_nodes, 25);
    assert_eq!(r.summary.outcome, Outcome::Complete);
    assert!(r.out.ends_with("number of nodes=25\n"));
}

#[test]
fn four_workers_tiny_jobs() {
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 4, &params(None, 2), 7, Start::Fresh);
    once_each(&r);
    assert_eq!(r.summary.total_nodes, 25);
    assert!(r.summary.jobs > 1);
}

#[test]
fn depths_are_absolute() {
    let t = FixtureTree::parse(EXAMPLE_TREE).unwrap();
    let want = t.depths();
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 3, &params(Some(1), 1), 3, Start::Fresh);
    for l in parse_output(&r.out) {
        assert_eq!(l.depth, want[l.labels[0] as usize], "node {:?}", l.labels);
    }
}

fn freq_lines(params: &mut Params, workers: usize) -> Vec<u64> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("freq");
    params.freq_path = Some(path.clone());
    run_det::<FixtureTree>(EXAMPLE_TREE, &[], workers, params, 0, Start::Fresh);
    std::fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

#[test]
fn frequency_file_single_job() {
    assert_eq!(freq_lines(&mut params(None, u64::MAX), 1), vec![24]);
}

#[test]
fn frequency_file_after_budget_split() {
    let lines = freq_lines(&mut params(Some(2), 13), 1);
    assert_eq!(lines[0], 17);
    assert_eq!(lines.len(), 6);
    assert_eq!(lines.iter().sum::<u64>(), 24);
}

#[test]
fn frequency_file_ignores_countonly() {
    use mts::app::topsort::TopSorts;
    let text = mts_oracles::instances::to_text(&mts_oracles::instances::matching(3));
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for args in [&[][..], &["-countonly"][..]] {
        let path = dir.path().join(format!("f{}", args.len()));
        let mut p = params(Some(1), 3);
        p.freq_path = Some(path.clone());
        let r = run_det::<TopSorts>(&text, args, 1, &p, 5, Start::Fresh);
        assert_eq!(r.summary.total_nodes, 15);
        files.push(std::fs::read_to_string(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0].lines().map(|l| l.parse::<u64>().unwrap()).sum::<u64>(), 14);
}

#[test]
fn clean_stop_then_restart() {
    let dir = tempfile::tempdir().unwrap();
    let ck_path = dir.path().join("ck");
    let mut p = params(None, u64::MAX);
    p.checkp_path = Some(ck_path.clone());
    let first = run_det::<FixtureTree>(EXAMPLE_TREE, &["-stopat", "12"], 1, &p, 0, Start::Fresh);
    assert_eq!(first.summary.outcome, Outcome::Stopped);
    assert!(first.summary.checkpoint_written);
    // 0..=12 plus the five nodes flagged while winding down
    let before: Vec<u32> = parse_output(&first.out).iter().map(|l| l.labels[0]).collect();
    let mut sorted = before.clone();
    sorted.sort();
    let mut want: Vec<u32> = (0..=13).collect();
    want.extend([15, 16, 18, 22]);
    assert_eq!(sorted, want);

    let ck = Checkpoint::read(&ck_path).unwrap();
    assert_eq!(ck.nodes, 18);
    assert_eq!(ck.jobs.len(), 5);
    let second = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 1, &params(None, u64::MAX), 0, Start::Restart(ck));
    assert_eq!(second.summary.outcome, Outcome::Complete);
    assert_eq!(second.summary.total_nodes, 25);
    let mut after: Vec<u32> = parse_output(&second.out).iter().map(|l| l.labels[0]).collect();
    after.sort();
    // set difference against an uninterrupted run
    let rest: Vec<u32> = (0..25).filter(|v| !before.contains(v)).collect();
    assert_eq!(after, rest);
}

#[test]
fn stop_file_present_at_start() {
    let dir = tempfile::tempdir().unwrap();
    let stop = dir.path().join("stop");
    std::fs::write(&stop, "").unwrap();
    let ck_path = dir.path().join("ck");
    let p = Params {
        stop_path: Some(stop),
        checkp_path: Some(ck_path.clone()),
        ..Params::default()
    };
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 2, &p, 0, Start::Fresh);
    assert_eq!(r.summary.outcome, Outcome::Stopped);
    assert_eq!(r.summary.total_nodes, 1);
    let ck = Checkpoint::read(&ck_path).unwrap();
    assert_eq!(ck.jobs, vec![NodeRecord::from_longs(vec![0])]);
    assert_eq!((ck.nodes, ck.jobs_created), (1, 1));
    assert_eq!(ck.app, "fixture");
    assert_eq!(ck.input, EXAMPLE_TREE.as_bytes());

    let r2 = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 2, &Params::default(), 0, Start::Restart(ck));
    assert_eq!(r2.summary.total_nodes, 25);
    assert_eq!(r2.node_count(), 24);
}

#[test]
fn restart_with_empty_job_list() {
    let ck = Checkpoint {
        params: Params::default(),
        app: "fixture".into(),
        args: vec![],
        input: EXAMPLE_TREE.as_bytes().to_vec(),
        nodes: 25,
        jobs_created: 9,
        shared: vec![],
        jobs: vec![],
    };
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 2, &Params::default(), 0, Start::Restart(ck));
    assert_eq!(r.summary.nodes_this_run, 0);
    assert_eq!(r.summary.total_nodes, 25);
    assert_eq!(r.summary.outcome, Outcome::Complete);
    assert_eq!(r.node_count(), 0);
}

#[test]
fn emergency_stop_aborts_without_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck_path = dir.path().join("ck");
    let mut p = params(None, 3);
    p.checkp_path = Some(ck_path.clone());
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &["-emergencyat", "9"], 2, &p, 0, Start::Fresh);
    assert!(matches!(&r.summary.outcome, Outcome::Aborted(m) if m.contains("node 9")));
    assert_eq!(r.summary.outcome.exit_code(), 2);
    assert!(!ck_path.exists());
    assert!(r.err.contains("aborted"));
}

#[test]
fn undecodable_job_fails_the_run() {
    let ck = Checkpoint {
        params: Params::default(),
        app: "fixture".into(),
        args: vec![],
        input: EXAMPLE_TREE.as_bytes().to_vec(),
        nodes: 1,
        jobs_created: 1,
        shared: vec![],
        jobs: vec![NodeRecord::from_longs(vec![99])],
    };
    let r = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 1, &Params::default(), 0, Start::Restart(ck));
    assert!(matches!(r.summary.outcome, Outcome::Aborted(_)));
}

#[test]
fn blocks_stay_contiguous_across_threads() {
    let r = run_threads::<FixtureTree>(EXAMPLE_TREE, &["-block"], 4, &params(Some(1), 1));
    let lines: Vec<&str> = r.out.lines().collect();
    let mut nodes = 0;
    for (i, l) in lines.iter().enumerate() {
        if let Some(rest) = l.strip_prefix(' ') {
            let v = rest.split(' ').next().unwrap();
            assert_eq!(lines[i + 1], format!("# end {v}"), "block split at line {i}");
            nodes += 1;
        }
    }
    assert_eq!(nodes, 25);
}

#[test]
fn seeded_runs_replay_exactly() {
    let p = params(Some(1), 2);
    let a = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 4, &p, 42, Start::Fresh);
    let b = run_det::<FixtureTree>(EXAMPLE_TREE, &[], 4, &p, 42, Start::Fresh);
    assert_eq!(a.out, b.out);
    let outs: std::collections::BTreeSet<String> = (0..20)
        .map(|s| run_det::<FixtureTree>(EXAMPLE_TREE, &[], 4, &p, s, Start::Fresh).out)
        .collect();
    assert!(outs.len() > 1, "different seeds should interleave differently");
}

#[test]
fn histogram_format_under_threads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist");
    let text = mts_oracles::instances::to_text(&mts_oracles::instances::antichain(8));
    let mut p = params(Some(2), 50);
    p.hist_path = Some(path.clone());
    p.hist_interval = Duration::from_millis(2);
    let r = run_threads::<mts::app::topsort::TopSorts>(&text, &["-countonly"], 3, &p);
    assert_eq!(r.summary.total_nodes, 40320);
    let hist = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = hist
        .lines()
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][6] >= w[0][6]);
    }
    for r in &rows {
        assert_eq!(r.len(), 7);
        assert!(r[3] >= r[1] && r[1] <= 3.0);
        assert_eq!((r[4], r[5]), (0.0, 0.0));
    }
    let last = rows.last().unwrap();
    assert_eq!((last[1], last[2], last[3]), (0.0, 0.0, 0.0));
}
