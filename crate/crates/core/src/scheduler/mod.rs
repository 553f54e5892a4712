//! The master: job list, budget policy, instrumentation and
//! checkpoint/stop/restart.

pub mod checkpoint;
mod master;

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::engine::Budget;
use crate::node::NodeRecord;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use master::{run_master, MasterError, Outcome, RunContext, RunSummary, Start};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("lmin ({lmin}) must not exceed lmax ({lmax})")]
    LminAboveLmax { lmin: u64, lmax: u64 },
}

/// Scheduler parameters. `max_depth = None` means unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub max_depth: Option<u64>,
    pub max_nodes: u64,
    pub scale: u64,
    pub lmin: u64,
    pub lmax: u64,
    pub maxbuf: usize,
    pub hist_path: Option<PathBuf>,
    pub freq_path: Option<PathBuf>,
    pub checkp_path: Option<PathBuf>,
    pub stop_path: Option<PathBuf>,
    pub restart_path: Option<PathBuf>,
    /// Wall-clock spacing of histogram samples.
    pub hist_interval: Duration,
    /// Minimum spacing of stop-file checks.
    pub stop_poll_interval: Duration,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            max_depth: Some(2),
            max_nodes: 5000,
            scale: 40,
            lmin: 1,
            lmax: 3,
            maxbuf: 1_048_576,
            hist_path: None,
            freq_path: None,
            checkp_path: None,
            stop_path: None,
            restart_path: None,
            hist_interval: Duration::from_secs(1),
            stop_poll_interval: Duration::from_millis(20),
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.max_depth == Some(0) {
            return Err(ParamError::NotPositive("maxd"));
        }
        for (name, v) in [
            ("maxnodes", self.max_nodes),
            ("scale", self.scale),
            ("lmin", self.lmin),
            ("lmax", self.lmax),
            ("maxbuf", self.maxbuf as u64),
        ] {
            if v == 0 {
                return Err(ParamError::NotPositive(name));
            }
        }
        if self.lmin > self.lmax {
            return Err(ParamError::LminAboveLmax {
                lmin: self.lmin,
                lmax: self.lmax,
            });
        }
        Ok(())
    }

    /// Copy with every file path cleared, as stored in checkpoints.
    pub fn numeric_only(&self) -> Params {
        Params {
            max_depth: self.max_depth,
            max_nodes: self.max_nodes,
            scale: self.scale,
            lmin: self.lmin,
            lmax: self.lmax,
            maxbuf: self.maxbuf,
            ..Params::default()
        }
    }
}

/// Budget for the next job given the current job list size and worker
/// count: tight while work is scarce, scaled up while it is plentiful.
pub fn next_budget(joblist_size: usize, workers: usize, p: &Params) -> Budget {
    let l = joblist_size as u64;
    let w = workers as u64;
    let (depth, nodes) = if l < p.lmin.saturating_mul(w) {
        (p.max_depth, p.max_nodes)
    } else if l > p.lmax.saturating_mul(w) {
        (None, p.max_nodes.saturating_mul(p.scale))
    } else {
        (None, p.max_nodes)
    };
    Budget::new(depth, Some(nodes)).expect("validated parameters")
}

/// Job list `L` and its counters.
#[derive(Debug, Clone, Default)]
pub struct JobList {
    pub jobs: Vec<NodeRecord>,
    pub total_jobs_created: u64,
    pub jobs_running: u64,
    pub jobs_done: u64,
}

impl JobList {
    pub fn balanced(&self) -> bool {
        self.total_jobs_created == self.jobs.len() as u64 + self.jobs_running + self.jobs_done
    }
}

/// One histogram line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSample {
    pub t: f64,
    pub busy: u64,
    pub joblist: u64,
    pub owing: u64,
    pub reserved1: u64,
    pub reserved2: u64,
    pub total_jobs: u64,
}

impl fmt::Display for HistogramSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.6} {} {} {} {} {} {}",
            self.t, self.busy, self.joblist, self.owing, self.reserved1, self.reserved2, self.total_jobs
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_examples() {
        let p = Params::default();
        assert_eq!(next_budget(5, 12, &p), Budget::new(Some(2), Some(5000)).unwrap());
        assert_eq!(next_budget(20, 12, &p), Budget::new(None, Some(5000)).unwrap());
        assert_eq!(next_budget(100, 12, &p), Budget::new(None, Some(200_000)).unwrap());
        // boundaries belong to the middle branch
        assert_eq!(next_budget(12, 12, &p), Budget::new(None, Some(5000)).unwrap());
        assert_eq!(next_budget(36, 12, &p), Budget::new(None, Some(5000)).unwrap());
        assert_eq!(next_budget(37, 12, &p), Budget::new(None, Some(200_000)).unwrap());
    }

    #[test]
    fn scaled_budget_saturates() {
        let p = Params {
            max_nodes: u64::MAX / 2,
            ..Params::default()
        };
        assert_eq!(next_budget(100, 1, &p).max_nodes(), Some(u64::MAX));
    }

    #[test]
    fn validation() {
        assert!(Params::default().validate().is_ok());
        let bad = Params {
            max_nodes: 0,
            ..Params::default()
        };
        assert_eq!(bad.validate(), Err(ParamError::NotPositive("maxnodes")));
        let bad = Params {
            lmin: 4,
            ..Params::default()
        };
        assert!(matches!(bad.validate(), Err(ParamError::LminAboveLmax { .. })));
    }

    #[test]
    fn histogram_line() {
        let s = HistogramSample {
            t: 1.003161,
            busy: 114,
            joblist: 1780,
            owing: 114,
            reserved1: 0,
            reserved2: 0,
            total_jobs: 6297,
        };
        assert_eq!(s.to_string(), "1.003161 114 1780 114 0 0 6297");
    }
}
