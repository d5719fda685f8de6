//! Speed layer: scores one arriving record against the current snapshot
//! using sliding-window statistics, then folds the record into a bounded
//! agent pool and re-ranks only the affected agents. Per-record time is
//! decomposed into processing (normalize, route, forward) and MCDM latency
//! (benefit updates and the incremental re-rank).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use crate::cluster::dist2;
use crate::error::{Error, Result};
use crate::mcdm::{mu, mutual_mu, Agent, AgentGraph, RankedEntry, Ranking, Weighting};
use crate::stream::{ModelSnapshot, SlidingWindow, StreamRecord};

#[derive(Debug, Clone, PartialEq)]
struct PoolAgent {
    criteria: Vec<f64>,
    benefit: f64,
    neighbors: BTreeSet<usize>,
    score: f64,
}

/// What changed in the ranking when a record arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingDelta {
    pub agent_id: usize,
    /// 1-based position of the new agent in the current ranking.
    pub rank_position: usize,
    /// Agents whose overall assessment was recomputed, with their new
    /// scores, ascending by id.
    pub affected: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedScore {
    pub decision_value: f64,
    pub delta: RankingDelta,
    pub processing_ns: u64,
    pub mcdm_ns: u64,
}

pub struct SpeedLayer {
    snapshot: Arc<ModelSnapshot>,
    window: SlidingWindow,
    min_fill: usize,
    pool_capacity: usize,
    neighborhood_k: usize,
    normalization: f64,
    weighting: Weighting,
    pool: HashMap<usize, PoolAgent>,
    arrival_order: VecDeque<usize>,
    last_sequence: Option<u64>,
}

impl SpeedLayer {
    /// Build a speed layer over a published snapshot, taking window, pool,
    /// and MCDM parameters from the snapshot's config echo.
    pub fn new(snapshot: Arc<ModelSnapshot>) -> Result<SpeedLayer> {
        let cfg = &snapshot.model.config;
        let window = SlidingWindow::new(cfg.stream.window, snapshot.model.dim())?;
        let neighborhood_k = cfg.mcdm.neighborhood_k;
        let normalization = cfg.mcdm.normalization.unwrap_or(neighborhood_k as f64);
        Ok(SpeedLayer {
            min_fill: cfg.stream.min_fill,
            pool_capacity: cfg.stream.agent_pool,
            neighborhood_k,
            normalization,
            weighting: cfg.mcdm.weighting,
            window,
            snapshot,
            pool: HashMap::new(),
            arrival_order: VecDeque::new(),
            last_sequence: None,
        })
    }

    pub fn window(&self) -> &SlidingWindow {
        &self.window
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    /// Score one record. The record is absorbed into the window either way;
    /// scoring starts once the window holds `min_fill` records.
    pub fn score(&mut self, record: &StreamRecord) -> Result<SpeedScore> {
        let started = Instant::now();
        if let Some(last) = self.last_sequence {
            if record.sequence_id <= last {
                return Err(Error::InvalidArgument(format!(
                    "sequence id {} not greater than {last}",
                    record.sequence_id
                )));
            }
        }
        self.window.push(&record.features)?;
        self.last_sequence = Some(record.sequence_id);
        if !self.window.is_warm(self.min_fill) {
            return Err(Error::ColdWindow {
                have: self.window.len(),
                need: self.min_fill,
            });
        }

        // Normalize against the window statistics; window-constant features
        // pass through like the offline z-score does.
        let mean = self.window.mean();
        let delta = self.window.delta();
        let mut x = record.features.clone();
        for (j, v) in x.iter_mut().enumerate() {
            if delta[j] != 0.0 {
                *v = (*v - mean[j]) / delta[j];
            }
        }
        let decision_value = self.snapshot.model.decision_value_normalized(&x)?;
        let processing_ns = started.elapsed().as_nanos() as u64;

        let mcdm_started = Instant::now();
        let agent_id = record.sequence_id as usize;
        let affected = self.insert_agent(agent_id, vec![decision_value]);
        for &id in &affected {
            let score = self.compute_score(id);
            self.pool.get_mut(&id).expect("affected agent exists").score = score;
        }
        let rank_position = self.position_of(agent_id);
        let affected: Vec<(usize, f64)> = affected
            .iter()
            .map(|&id| (id, self.pool[&id].score))
            .collect();
        let mcdm_ns = mcdm_started.elapsed().as_nanos() as u64;

        Ok(SpeedScore {
            decision_value,
            delta: RankingDelta {
                agent_id,
                rank_position,
                affected,
            },
            processing_ns,
            mcdm_ns,
        })
    }

    /// Insert the record as an agent: evict the oldest when the pool is
    /// full, connect to the `neighborhood_k` nearest agents in criteria
    /// space (union symmetrization), and return every agent whose overall
    /// assessment needs recomputation.
    fn insert_agent(&mut self, id: usize, criteria: Vec<f64>) -> BTreeSet<usize> {
        let mut affected = BTreeSet::new();

        if self.pool.len() == self.pool_capacity {
            let evicted = self
                .arrival_order
                .pop_front()
                .expect("pool is full, order is nonempty");
            let old = self.pool.remove(&evicted).expect("ordered agent exists");
            for n in old.neighbors {
                if let Some(agent) = self.pool.get_mut(&n) {
                    agent.neighbors.remove(&evicted);
                    affected.insert(n);
                }
            }
        }

        let benefit = criteria.iter().sum::<f64>() / criteria.len() as f64;
        let mut candidates: Vec<usize> = self.pool.keys().copied().collect();
        candidates.sort_by(|&a, &b| {
            dist2(&criteria, &self.pool[&a].criteria)
                .total_cmp(&dist2(&criteria, &self.pool[&b].criteria))
                .then(a.cmp(&b))
        });
        let neighbors: BTreeSet<usize> = candidates.into_iter().take(self.neighborhood_k).collect();
        for &n in &neighbors {
            self.pool
                .get_mut(&n)
                .expect("neighbor exists")
                .neighbors
                .insert(id);
            affected.insert(n);
        }

        self.pool.insert(
            id,
            PoolAgent {
                criteria,
                benefit,
                neighbors,
                score: 0.0,
            },
        );
        self.arrival_order.push_back(id);
        affected.insert(id);
        affected
    }

    /// Overall assessment of one pool agent, summing neighbors in ascending
    /// id order exactly like the offline graph scorer.
    fn compute_score(&self, id: usize) -> f64 {
        let agent = &self.pool[&id];
        let mut total = 0.0;
        for j in &agent.neighbors {
            let other = &self.pool[j];
            let w = match self.weighting {
                Weighting::Plain => mu(agent.benefit, other.benefit, self.normalization),
                Weighting::Mutual => {
                    let shared = agent.neighbors.intersection(&other.neighbors).count();
                    mutual_mu(agent.benefit, other.benefit, self.normalization, shared)
                }
            }
            .expect("normalization validated at construction");
            total += w * other.benefit;
        }
        agent.benefit + total
    }

    fn position_of(&self, id: usize) -> usize {
        let mine = self.pool[&id].score;
        1 + self
            .pool
            .iter()
            .filter(|(&j, a)| j != id && (a.score > mine || (a.score == mine && j < id)))
            .count()
    }

    /// Current ranking over the agent pool from the cached scores.
    pub fn current_ranking(&self) -> Ranking {
        let mut entries: Vec<RankedEntry> = self
            .pool
            .iter()
            .map(|(&id, a)| RankedEntry {
                agent_id: id,
                score: a.score,
            })
            .collect();
        entries.sort_by(|x, y| {
            y.score
                .total_cmp(&x.score)
                .then(x.agent_id.cmp(&y.agent_id))
        });
        Ranking { entries }
    }

    /// The pool as a full agent graph, for the full-recompute oracle.
    pub fn graph_view(&self) -> Result<AgentGraph> {
        let mut ids: Vec<usize> = self.pool.keys().copied().collect();
        ids.sort_unstable();
        let agents: Vec<Agent> = ids
            .into_iter()
            .map(|id| {
                let a = &self.pool[&id];
                Agent {
                    id,
                    benefit: a.benefit,
                    criteria: a.criteria.clone(),
                    neighbors: a.neighbors.clone(),
                }
            })
            .collect();
        AgentGraph::new(agents, self.normalization)
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }
}
