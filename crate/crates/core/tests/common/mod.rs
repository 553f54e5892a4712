#![allow(dead_code)]

use mts::app::Application;
use mts::options::AppArgs;
use mts::scheduler::{run_master, Params, RunContext, RunSummary, Start};
use mts::transport::deterministic::Deterministic;
use mts::transport::threads::Threads;
use mts::transport::{Transport, DEFAULT_INFLIGHT_CAP};
use mts_oracles::{multiset, parse_output};
use std::collections::BTreeMap;

pub struct Run {
    pub out: String,
    pub err: String,
    pub summary: RunSummary,
}

impl Run {
    /// Node multiset of everything printed, root included.
    pub fn nodes(&self) -> BTreeMap<Vec<u32>, usize> {
        multiset(parse_output(&self.out).into_iter().map(|l| l.labels))
    }

    pub fn node_count(&self) -> usize {
        parse_output(&self.out).len()
    }
}

pub fn apps<A: Application>(input: &str, args: &[&str], n: usize) -> Vec<A> {
    let args = AppArgs::parse(args, A::OPTIONS).unwrap();
    (0..n).map(|_| A::init(input, &args).unwrap()).collect()
}

pub fn context<A: Application>(input: &str, args: &[&str]) -> RunContext {
    RunContext {
        app: A::NAME.into(),
        args: args.iter().map(|s| s.to_string()).collect(),
        input: input.as_bytes().to_vec(),
    }
}

pub fn run_with<A: Application>(
    input: &str,
    args: &[&str],
    params: &Params,
    start: Start,
    transport: &mut dyn Transport,
) -> Run {
    let master = apps::<A>(input, args, 1).pop().unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let summary = run_master(
        &master,
        params,
        start,
        &context::<A>(input, args),
        transport,
        &mut out,
        &mut err,
    )
    .unwrap();
    Run {
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
        summary,
    }
}

pub fn run_det<A: Application>(
    input: &str,
    args: &[&str],
    workers: usize,
    params: &Params,
    seed: u64,
    start: Start,
) -> Run {
    let mut t = Deterministic::new(apps::<A>(input, args, workers), params.maxbuf, seed);
    run_with::<A>(input, args, params, start, &mut t)
}

pub fn run_threads<A: Application>(input: &str, args: &[&str], workers: usize, params: &Params) -> Run {
    let mut t = Threads::spawn(apps::<A>(input, args, workers), params.maxbuf, DEFAULT_INFLIGHT_CAP);
    run_with::<A>(input, args, params, Start::Fresh, &mut t)
}

pub fn params(max_depth: Option<u64>, max_nodes: u64) -> Params {
    Params {
        max_depth,
        max_nodes,
        ..Params::default()
    }
}
