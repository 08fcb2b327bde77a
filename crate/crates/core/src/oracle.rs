//! Brute-force cross-check of the ideal semantic selector.
//!
//! Every subset of at most `gamma` eligible local objects is enumerated and
//! the one with the largest total true score wins; equal totals go to the
//! lexicographically smallest id list. The score is recomputed here from the
//! raw relevance values and receiver knowledge, not taken from the selector.

use rand::Rng;

use crate::object_set::{ObjectId, ObjectSet};
use crate::relevance::RelevanceFunction;
use crate::rng::seeded;
use crate::schemes::{select_ideal_semantic, SelectionContext};

/// Universe size of generated instances.
const UNIVERSE: usize = 16;
const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct OracleInstance {
    pub local: ObjectSet,
    pub receivers: Vec<usize>,
    pub receiver_known: Vec<ObjectSet>,
    pub relevance: Vec<RelevanceFunction>,
    pub gamma: usize,
    pub s_min: f64,
    no_estimate: ObjectSet,
}

impl OracleInstance {
    /// Local set of at most 10 objects, at most 4 slots of budget, one to
    /// three receivers. Values are drawn on a coarse grid part of the time so
    /// that ties actually occur.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let local_len = rng.random_range(0..=10);
        let local = ObjectSet::from_ids(
            UNIVERSE,
            rand::seq::index::sample(rng, UNIVERSE, local_len),
        );
        let receiver_count = rng.random_range(1..=3);
        let coarse = rng.random_bool(0.5);
        let relevance = (0..=receiver_count)
            .map(|owner| {
                let values = (0..UNIVERSE)
                    .map(|_| match rng.random_range(0..4) {
                        0 => 0.0,
                        1 => rng.random_range(0.0..0.1),
                        _ if coarse => rng.random_range(1..=10) as f64 / 10.0,
                        _ => rng.random_range(0.5..1.0),
                    })
                    .collect();
                RelevanceFunction::from_values(owner, values)
            })
            .collect();
        let receiver_known = (0..receiver_count)
            .map(|_| {
                ObjectSet::from_ids(UNIVERSE, (0..UNIVERSE).filter(|_| rng.random_bool(0.3)))
            })
            .collect();
        OracleInstance {
            local,
            receivers: (1..=receiver_count).collect(),
            receiver_known,
            relevance,
            gamma: rng.random_range(1..=4),
            s_min: 0.05,
            no_estimate: ObjectSet::empty(UNIVERSE),
        }
    }

    fn score(&self, k: ObjectId) -> f64 {
        let mut best = 0.0f64;
        for (&r, known) in self.receivers.iter().zip(&self.receiver_known) {
            if !known.contains(k) {
                best = best.max(self.relevance[r].value(k));
            }
        }
        best
    }

    pub fn context(&self) -> SelectionContext<'_> {
        SelectionContext {
            transmitter: 0,
            local_set: &self.local,
            known_set_size: 0,
            estimated_receiver_known: &self.no_estimate,
            true_receiver_known: &self.receiver_known,
            receivers: &self.receivers,
            gamma: self.gamma,
            s_min: self.s_min,
            relevance: &self.relevance,
        }
    }
}

/// Exhaustive maximum-total-score subset.
pub fn brute_force_best(instance: &OracleInstance) -> Vec<ObjectId> {
    let eligible: Vec<(ObjectId, f64)> = instance
        .local
        .iter()
        .map(|k| (k, instance.score(k)))
        .filter(|&(_, s)| s > instance.s_min)
        .collect();
    let mut best: Vec<ObjectId> = Vec::new();
    let mut best_sum = 0.0;
    for mask in 0u32..(1 << eligible.len()) {
        if mask.count_ones() as usize > instance.gamma {
            continue;
        }
        let mut ids = Vec::new();
        let mut sum = 0.0;
        for (i, &(k, s)) in eligible.iter().enumerate() {
            if mask & (1 << i) != 0 {
                ids.push(k);
                sum += s;
            }
        }
        let better = sum > best_sum + SUM_TOLERANCE;
        let tied = (sum - best_sum).abs() <= SUM_TOLERANCE;
        if better || (tied && ids < best) {
            best = ids;
            best_sum = sum;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct Mismatch {
    pub instance_index: usize,
    pub selector: Vec<ObjectId>,
    pub oracle: Vec<ObjectId>,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub instances: usize,
    pub mismatches: Vec<Mismatch>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn run_oracle_suite(instances: usize, seed: u64) -> OracleReport {
    let mut rng = seeded(seed);
    let mismatches = (0..instances)
        .filter_map(|i| {
            let inst = OracleInstance::random(&mut rng);
            let selector = select_ideal_semantic(&inst.context()).to_vec();
            let oracle = brute_force_best(&inst);
            (selector != oracle).then_some(Mismatch {
                instance_index: i,
                selector,
                oracle,
            })
        })
        .collect();
    OracleReport {
        instances,
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_small_case() {
        let mut values = vec![0.0; UNIVERSE];
        values[1] = 0.8;
        values[2] = 0.9;
        values[3] = 0.6;
        values[4] = 0.03;
        let inst = OracleInstance {
            local: ObjectSet::from_ids(UNIVERSE, [1, 2, 3, 4]),
            receivers: vec![1],
            receiver_known: vec![ObjectSet::from_ids(UNIVERSE, [2])],
            relevance: vec![
                RelevanceFunction::from_values(0, vec![0.0; UNIVERSE]),
                RelevanceFunction::from_values(1, values),
            ],
            gamma: 2,
            s_min: 0.05,
            no_estimate: ObjectSet::empty(UNIVERSE),
        };
        assert_eq!(brute_force_best(&inst), vec![1, 3]);
    }

    #[test]
    fn suite_is_clean() {
        let report = run_oracle_suite(300, 5);
        assert!(report.passed(), "{:?}", report.mismatches);
    }
}
