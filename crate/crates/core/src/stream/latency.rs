//! Latency harness: replays a stream against the shared immutable snapshot
//! at each worker count in the ladder, each worker owning its shard's window
//! and agent pool exclusively, and reports per-record latency percentiles
//! plus the MCDM overhead percentage.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::StreamConfig;
use crate::error::{Error, Result};
use crate::stream::{synthetic_stream, ModelSnapshot, SpeedLayer, StreamRecord};

/// Published reference value for the MCDM overhead share, emitted next to
/// the measured figure for comparison; hardware-dependent, never asserted.
pub const PAPER_REFERENCE_OVERHEAD_PCT: f64 = 4.9;

/// Anything that can score a stream record and split its time into
/// (processing, mcdm) nanoseconds. A cold-window error counts the record as
/// warm-up rather than failing the run.
pub trait RecordScorer {
    fn score_record(&mut self, record: &StreamRecord) -> Result<(u64, u64)>;
}

impl RecordScorer for SpeedLayer {
    fn score_record(&mut self, record: &StreamRecord) -> Result<(u64, u64)> {
        self.score(record).map(|s| (s.processing_ns, s.mcdm_ns))
    }
}

/// One worker-count row of the latency experiment. Fields are medians over
/// the repetitions; all latency fields are wall-clock measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub workers: usize,
    pub records: usize,
    /// Records actually scored (records minus per-shard warm-up).
    pub scored: usize,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    /// Mean per-record time in the normalize/route/forward phase.
    pub processing_us_mean: f64,
    /// Mean per-record time in the benefit-update/re-rank phase.
    pub mcdm_us_mean: f64,
    /// mcdm / (processing + mcdm) * 100.
    pub overhead_pct: f64,
    /// Wall clock of the whole replay divided by the record count; the
    /// throughput-normalized per-record latency used for the scaling trend.
    pub wall_us_per_record: f64,
    pub paper_reference_overhead_pct: f64,
}

/// Fixed CSV rendering: `workers,p50_us,p95_us,p99_us,overhead_pct`.
pub fn reports_to_csv(reports: &[LatencyReport]) -> String {
    let mut out = String::from("workers,p50_us,p95_us,p99_us,overhead_pct\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.workers, r.p50_us, r.p95_us, r.p99_us, r.overhead_pct
        ));
    }
    out
}

fn percentile_us(sorted_ns: &[u64], q: f64) -> f64 {
    if sorted_ns.is_empty() {
        return 0.0;
    }
    let n = sorted_ns.len();
    let rank = ((q / 100.0) * n as f64).ceil() as usize;
    sorted_ns[rank.clamp(1, n) - 1] as f64 / 1000.0
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// (total, processing, mcdm) nanoseconds per scored record.
type WorkerTimings = (Vec<u64>, Vec<u64>, Vec<u64>);

struct RunOutcome {
    totals_ns: Vec<u64>,
    processing_ns: Vec<u64>,
    mcdm_ns: Vec<u64>,
    wall_ns: u64,
}

fn one_run<S, F>(workers: usize, records: &[StreamRecord], mut make_scorer: F) -> Result<RunOutcome>
where
    S: RecordScorer + Send,
    F: FnMut(usize) -> Result<S>,
{
    let scorers: Vec<S> = (0..workers).map(&mut make_scorer).collect::<Result<_>>()?;
    let shard_size = records.len().div_ceil(workers);

    let started = Instant::now();
    let worker_results: Vec<Result<WorkerTimings>> = std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for (scorer, shard) in scorers.into_iter().zip(records.chunks(shard_size)) {
            handles.push(scope.spawn(move || {
                let mut scorer = scorer;
                let mut totals = Vec::with_capacity(shard.len());
                let mut procs = Vec::with_capacity(shard.len());
                let mut mcdms = Vec::with_capacity(shard.len());
                for record in shard {
                    match scorer.score_record(record) {
                        Ok((p, m)) => {
                            totals.push(p + m);
                            procs.push(p);
                            mcdms.push(m);
                        }
                        Err(Error::ColdWindow { .. }) => {} // warm-up
                        Err(e) => return Err(e),
                    }
                }
                Ok((totals, procs, mcdms))
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("latency worker panicked"))
            .collect()
    });

    let wall_ns = started.elapsed().as_nanos() as u64;
    let mut totals_ns = Vec::new();
    let mut processing_ns = Vec::new();
    let mut mcdm_ns = Vec::new();
    for r in worker_results {
        let (t, p, m) = r?;
        totals_ns.extend(t);
        processing_ns.extend(p);
        mcdm_ns.extend(m);
    }
    Ok(RunOutcome {
        totals_ns,
        processing_ns,
        mcdm_ns,
        wall_ns,
    })
}

fn report_of_run(workers: usize, records: usize, mut run: RunOutcome) -> LatencyReport {
    run.totals_ns.sort_unstable();
    let scored = run.totals_ns.len();
    let proc_sum: u64 = run.processing_ns.iter().sum();
    let mcdm_sum: u64 = run.mcdm_ns.iter().sum();
    let denom = (proc_sum + mcdm_sum) as f64;
    LatencyReport {
        workers,
        records,
        scored,
        p50_us: percentile_us(&run.totals_ns, 50.0),
        p95_us: percentile_us(&run.totals_ns, 95.0),
        p99_us: percentile_us(&run.totals_ns, 99.0),
        processing_us_mean: proc_sum as f64 / scored.max(1) as f64 / 1000.0,
        mcdm_us_mean: mcdm_sum as f64 / scored.max(1) as f64 / 1000.0,
        overhead_pct: if denom > 0.0 {
            mcdm_sum as f64 / denom * 100.0
        } else {
            0.0
        },
        wall_us_per_record: run.wall_ns as f64 / 1000.0 / records.max(1) as f64,
        paper_reference_overhead_pct: PAPER_REFERENCE_OVERHEAD_PCT,
    }
}

fn median_report(mut reps: Vec<LatencyReport>) -> LatencyReport {
    let field = |f: fn(&LatencyReport) -> f64, reps: &[LatencyReport]| {
        let mut v: Vec<f64> = reps.iter().map(f).collect();
        median(&mut v)
    };
    let last = reps.pop().expect("at least one repetition");
    let mut all = reps;
    all.push(last.clone());
    LatencyReport {
        workers: last.workers,
        records: last.records,
        scored: last.scored,
        p50_us: field(|r| r.p50_us, &all),
        p95_us: field(|r| r.p95_us, &all),
        p99_us: field(|r| r.p99_us, &all),
        processing_us_mean: field(|r| r.processing_us_mean, &all),
        mcdm_us_mean: field(|r| r.mcdm_us_mean, &all),
        overhead_pct: field(|r| r.overhead_pct, &all),
        wall_us_per_record: field(|r| r.wall_us_per_record, &all),
        paper_reference_overhead_pct: PAPER_REFERENCE_OVERHEAD_PCT,
    }
}

/// Replay `records` at every worker count in `ladder`, `repetitions` times
/// each, with a fresh scorer per worker per run. Workers score disjoint
/// contiguous shards; the reported row per worker count is the per-field
/// median over the repetitions.
pub fn run_latency_experiment_with<S, F>(
    ladder: &[usize],
    records: &[StreamRecord],
    repetitions: usize,
    mut make_scorer: F,
) -> Result<Vec<LatencyReport>>
where
    S: RecordScorer + Send,
    F: FnMut(usize) -> Result<S>,
{
    if ladder.is_empty() || ladder.contains(&0) || repetitions < 1 {
        return Err(Error::InvalidArgument(
            "latency experiment needs a nonempty ladder of nonzero worker counts and repetitions >= 1"
                .into(),
        ));
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset("no records to replay".into()));
    }
    let mut reports = Vec::with_capacity(ladder.len());
    for &workers in ladder {
        let workers = workers.min(records.len());
        let mut reps = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let run = one_run(workers, records, &mut make_scorer)?;
            reps.push(report_of_run(workers, records.len(), run));
        }
        reports.push(median_report(reps));
    }
    Ok(reports)
}

/// The production experiment: a seeded synthetic stream scored by
/// [`SpeedLayer`] workers over the shared snapshot.
pub fn run_latency_experiment(
    snapshot: &Arc<ModelSnapshot>,
    stream_cfg: &StreamConfig,
    seed: u64,
) -> Result<Vec<LatencyReport>> {
    let records = synthetic_stream(&snapshot.model, stream_cfg.records, seed);
    run_latency_experiment_with(
        &stream_cfg.workers,
        &records,
        stream_cfg.repetitions,
        |_| SpeedLayer::new(snapshot.clone()),
    )
}
