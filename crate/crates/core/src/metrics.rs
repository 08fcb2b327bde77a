//! Evaluation metrics computed from slot telemetry.
//!
//! The accumulator only holds sums and counts, so accumulators of separate
//! episodes merge by field-wise addition.

use crate::engine::SlotTelemetry;
use crate::error::{Error, Result};
use crate::object_set::ObjectSet;
use crate::relevance::{semantic_value, RelevanceFunction};

/// How per-receiver semantic values of one variable are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SvAggregation {
    Max,
    Mean,
}

impl SvAggregation {
    pub fn as_str(&self) -> &'static str {
        match self {
            SvAggregation::Max => "max",
            SvAggregation::Mean => "mean",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max" => Some(SvAggregation::Max),
            "mean" => Some(SvAggregation::Mean),
            _ => None,
        }
    }
}

/// Finalized metrics. `None` marks a metric without data (for example LRR
/// when nothing was transmitted) and is never replaced by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// Mean fraction of its own high-relevance objects a vehicle knows.
    pub hrr: Option<f64>,
    /// Mean semantic value per message.
    pub mean_sv: f64,
    /// Fraction of transmitted variables irrelevant to every receiver.
    pub lrr: Option<f64>,
    /// Mean message size over the budget.
    pub usage: f64,
    /// Semantic value per transmitted variable.
    pub se: Option<f64>,
    pub mean_eps: Option<f64>,
    /// Mean number of transmissions of a variable within a communication cycle.
    pub tx_multiplicity: Option<f64>,
    pub messages: u64,
    pub variables: u64,
    pub slots: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsAccumulator {
    gamma: usize,
    s_min: f64,
    aggregation: SvAggregation,
    messages: u64,
    variables: u64,
    low_relevance: u64,
    slots: u64,
    total_sv: f64,
    usage_sum: f64,
    hrr_sum: f64,
    hrr_samples: u64,
    eps_sum: f64,
    eps_samples: u64,
    multiplicity_sum: f64,
    multiplicity_cycles: u64,
}

impl MetricsAccumulator {
    pub fn new(gamma: usize, s_min: f64, aggregation: SvAggregation) -> Self {
        MetricsAccumulator {
            gamma,
            s_min,
            aggregation,
            messages: 0,
            variables: 0,
            low_relevance: 0,
            slots: 0,
            total_sv: 0.0,
            usage_sum: 0.0,
            hrr_sum: 0.0,
            hrr_samples: 0,
            eps_sum: 0.0,
            eps_samples: 0,
            multiplicity_sum: 0.0,
            multiplicity_cycles: 0,
        }
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn variables(&self) -> u64 {
        self.variables
    }

    pub fn total_sv(&self) -> f64 {
        self.total_sv
    }

    pub fn record_slot(&mut self) {
        self.slots += 1;
    }

    /// Adds one message; returns its semantic value.
    pub fn record_transmission(&mut self, telemetry: &SlotTelemetry) -> f64 {
        let mut message_sv = 0.0;
        let mut size = 0u64;
        for var in telemetry.selected() {
            size += 1;
            let values = var
                .receivers
                .iter()
                .map(|v| semantic_value(v.value, v.redundant));
            message_sv += match self.aggregation {
                SvAggregation::Max => values.fold(0.0, f64::max),
                SvAggregation::Mean => values.sum::<f64>() / var.receivers.len().max(1) as f64,
            };
            if var.receivers.iter().all(|v| v.value < self.s_min) {
                self.low_relevance += 1;
            }
        }
        self.messages += 1;
        self.variables += size;
        self.total_sv += message_sv;
        self.usage_sum += size as f64 / self.gamma as f64;
        if let Some(eps) = telemetry.eps {
            self.eps_sum += eps;
            self.eps_samples += 1;
        }
        message_sv
    }

    /// One HRR sample against the vehicle's own relevance function; vehicles
    /// without high-relevance objects contribute nothing.
    pub fn record_awareness_snapshot(&mut self, known: &ObjectSet, relevance: &RelevanceFunction) {
        if let Some(sample) = hrr_sample(known, relevance) {
            self.hrr_sum += sample;
            self.hrr_samples += 1;
        }
    }

    pub fn record_cycle_multiplicity(&mut self, transmissions: u64, distinct: u64) {
        if distinct > 0 {
            self.multiplicity_sum += transmissions as f64 / distinct as f64;
            self.multiplicity_cycles += 1;
        }
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        self.messages += other.messages;
        self.variables += other.variables;
        self.low_relevance += other.low_relevance;
        self.slots += other.slots;
        self.total_sv += other.total_sv;
        self.usage_sum += other.usage_sum;
        self.hrr_sum += other.hrr_sum;
        self.hrr_samples += other.hrr_samples;
        self.eps_sum += other.eps_sum;
        self.eps_samples += other.eps_samples;
        self.multiplicity_sum += other.multiplicity_sum;
        self.multiplicity_cycles += other.multiplicity_cycles;
    }

    pub fn finalize(&self) -> Result<MetricsRecord> {
        if self.messages == 0 {
            return Err(Error::NoData);
        }
        let ratio = |num: f64, den: u64| (den > 0).then(|| num / den as f64);
        Ok(MetricsRecord {
            hrr: ratio(self.hrr_sum, self.hrr_samples),
            mean_sv: self.total_sv / self.messages as f64,
            lrr: ratio(self.low_relevance as f64, self.variables),
            usage: self.usage_sum / self.messages as f64,
            se: ratio(self.total_sv, self.variables),
            mean_eps: ratio(self.eps_sum, self.eps_samples),
            tx_multiplicity: ratio(self.multiplicity_sum, self.multiplicity_cycles),
            messages: self.messages,
            variables: self.variables,
            slots: self.slots,
        })
    }
}

pub fn hrr_sample(known: &ObjectSet, relevance: &RelevanceFunction) -> Option<f64> {
    let high = relevance.high_set();
    if high.is_empty() {
        return None;
    }
    Some(known.intersection_count(high) as f64 / high.len() as f64)
}

/// Counts transmissions inside one communication cycle.
#[derive(Debug, Clone)]
pub struct MultiplicityTracker {
    transmissions: u64,
    distinct: ObjectSet,
}

impl MultiplicityTracker {
    pub fn new(object_count: usize) -> Self {
        MultiplicityTracker {
            transmissions: 0,
            distinct: ObjectSet::empty(object_count),
        }
    }

    pub fn record(&mut self, variables: &ObjectSet) {
        self.transmissions += variables.len() as u64;
        self.distinct.union_with(variables);
    }

    pub fn close(&mut self, acc: &mut MetricsAccumulator) {
        acc.record_cycle_multiplicity(self.transmissions, self.distinct.len() as u64);
        self.transmissions = 0;
        self.distinct = ObjectSet::empty(self.distinct.capacity());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Message, ReceiverView, VariableRecord};
    use crate::rng::seeded;
    use crate::scenario::Point;
    use crate::schemes::SchemeKind;
    use rand::Rng;

    fn telemetry(gamma: usize, vars: &[(usize, &[(f64, bool)])], eps: Option<f64>) -> SlotTelemetry {
        let variables: Vec<VariableRecord> = vars
            .iter()
            .map(|(k, views)| VariableRecord {
                object: *k,
                selected: true,
                receivers: views
                    .iter()
                    .enumerate()
                    .map(|(r, &(value, redundant))| ReceiverView {
                        receiver: r + 1,
                        value,
                        redundant,
                    })
                    .collect(),
            })
            .collect();
        SlotTelemetry {
            slot: 0,
            scheme: SchemeKind::Baseline,
            transmitter: 0,
            gamma,
            message: Message {
                sender: 0,
                sender_position: Point::default(),
                sender_speed: 0.0,
                variables: ObjectSet::from_ids(64, vars.iter().map(|(k, _)| *k)),
                slot: 0,
            },
            local_set_size: vars.len(),
            known_set_size: vars.len(),
            eps,
            variables,
        }
    }

    #[test]
    fn redundant_variable_carries_no_value() {
        let mut acc = MetricsAccumulator::new(5, 0.05, SvAggregation::Max);
        let sv = acc.record_transmission(&telemetry(5, &[(1, &[(0.7, false)]), (2, &[(0.9, true)])], None));
        assert_eq!(sv, 0.7);
    }

    #[test]
    fn lrr_fraction() {
        let mut acc = MetricsAccumulator::new(4, 0.05, SvAggregation::Max);
        acc.record_transmission(&telemetry(
            4,
            &[
                (1, &[(0.0, false), (0.0, true)]),
                (2, &[(0.0, false), (0.6, false)]),
                (3, &[(0.7, true), (0.0, false)]),
                (4, &[(0.8, false), (0.9, false)]),
            ],
            None,
        ));
        assert_eq!(acc.finalize().unwrap().lrr, Some(0.25));
    }

    #[test]
    fn empty_message_policy() {
        let mut acc = MetricsAccumulator::new(4, 0.05, SvAggregation::Max);
        assert_eq!(acc.record_transmission(&telemetry(4, &[], None)), 0.0);
        let r = acc.finalize().unwrap();
        assert_eq!(r.usage, 0.0);
        assert_eq!(r.mean_sv, 0.0);
        assert_eq!(r.lrr, None);
        assert_eq!(r.se, None);
    }

    #[test]
    fn no_messages_is_no_data() {
        let acc = MetricsAccumulator::new(4, 0.05, SvAggregation::Max);
        assert!(matches!(acc.finalize(), Err(Error::NoData)));
    }

    #[test]
    fn se_and_usage_definitions() {
        let mut acc = MetricsAccumulator::new(2, 0.05, SvAggregation::Max);
        for _ in 0..10 {
            acc.record_transmission(&telemetry(2, &[(1, &[(0.5, false)]), (2, &[(0.5, true)])], Some(0.25)));
        }
        let r = acc.finalize().unwrap();
        assert_eq!(r.variables, 20);
        assert!((acc.total_sv() - 5.0).abs() < 1e-12);
        assert!((r.se.unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(r.usage, 1.0);
        assert_eq!(r.mean_eps, Some(0.25));
    }

    #[test]
    fn mean_aggregation_switch() {
        let mut acc = MetricsAccumulator::new(2, 0.05, SvAggregation::Mean);
        let sv = acc.record_transmission(&telemetry(2, &[(1, &[(0.8, false), (0.4, false)])], None));
        assert!((sv - 0.6).abs() < 1e-12);
    }

    #[test]
    fn hrr_samples() {
        let mut values = vec![0.0; 8];
        values[1] = 0.6;
        values[2] = 0.9;
        let f = RelevanceFunction::from_values(0, values);
        assert_eq!(hrr_sample(&ObjectSet::from_ids(8, [1, 3]), &f), Some(0.5));
        assert_eq!(hrr_sample(&ObjectSet::from_ids(8, [1, 2, 3]), &f), Some(1.0));
        let none = RelevanceFunction::from_values(0, vec![0.0; 8]);
        assert_eq!(hrr_sample(&ObjectSet::from_ids(8, [1]), &none), None);
        let mut acc = MetricsAccumulator::new(2, 0.05, SvAggregation::Max);
        acc.record_awareness_snapshot(&ObjectSet::from_ids(8, [1]), &none);
        acc.record_transmission(&telemetry(2, &[], None));
        assert_eq!(acc.finalize().unwrap().hrr, None);
    }

    fn random_telemetry(rng: &mut impl Rng) -> SlotTelemetry {
        let n: usize = rng.random_range(0..5);
        let mut views = Vec::new();
        for _ in 0..n {
            views.push(vec![
                (rng.random::<f64>(), rng.random_bool(0.3)),
                (if rng.random_bool(0.5) { 0.0 } else { rng.random() }, rng.random_bool(0.3)),
            ]);
        }
        let vars: Vec<(usize, &[(f64, bool)])> = views.iter().enumerate().map(|(i, v)| (i, v.as_slice())).collect();
        let eps = rng.random_bool(0.5).then(|| rng.random());
        telemetry(5, &vars, eps)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    fn records_close(a: &MetricsRecord, b: &MetricsRecord) -> bool {
        let opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => close(x, y),
            (None, None) => true,
            _ => false,
        };
        opt(a.hrr, b.hrr)
            && close(a.mean_sv, b.mean_sv)
            && opt(a.lrr, b.lrr)
            && close(a.usage, b.usage)
            && opt(a.se, b.se)
            && opt(a.mean_eps, b.mean_eps)
            && a.messages == b.messages
            && a.variables == b.variables
    }

    #[test]
    fn merge_equals_concatenation() {
        let mut rng = seeded(42);
        for _ in 0..50 {
            let parts: Vec<Vec<SlotTelemetry>> = (0..3)
                .map(|_| (0..rng.random_range(1..20)).map(|_| random_telemetry(&mut rng)).collect())
                .collect();
            let mut whole = MetricsAccumulator::new(5, 0.05, SvAggregation::Max);
            let mut accs = Vec::new();
            for part in &parts {
                let mut acc = MetricsAccumulator::new(5, 0.05, SvAggregation::Max);
                for t in part {
                    whole.record_transmission(t);
                    acc.record_transmission(t);
                }
                accs.push(acc);
            }
            let (a, b, c) = (&accs[0], &accs[1], &accs[2]);
            let mut left = a.clone();
            left.merge(b);
            left.merge(c);
            let mut bc = b.clone();
            bc.merge(c);
            let mut right = a.clone();
            right.merge(&bc);
            let mut swapped = c.clone();
            swapped.merge(a);
            swapped.merge(b);
            let w = whole.finalize().unwrap();
            assert!(records_close(&left.finalize().unwrap(), &w));
            assert!(records_close(&right.finalize().unwrap(), &w));
            assert!(records_close(&swapped.finalize().unwrap(), &w));
        }
    }
}
