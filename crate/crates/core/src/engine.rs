//! Time-slotted round-robin communication loop.
//!
//! In slot `t` vehicle `t mod N` transmits: it refreshes its local snapshot,
//! lets the active scheme pick the message content and delivers the message
//! losslessly to every other vehicle. A received set stays valid for `N`
//! slots, i.e. until the same sender transmits again.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::metrics::{MetricsAccumulator, MetricsRecord, MultiplicityTracker, SvAggregation};
use crate::object_set::{ObjectId, ObjectSet};
use crate::relevance::{build_relevance_functions, RelevanceFunction, RelevanceParams};
use crate::scenario::{sample_with_probabilities, MobilityMode, Point, SceneConfig, Scenario};
use crate::schemes::{
    estimate_receiver_known, select, EstimationModel, SchemeKind, SelectionContext,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Two vehicles; each message has one intended receiver.
    Unicast,
    /// Three or more vehicles; every other vehicle is an intended receiver.
    Broadcast,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Unicast => "unicast",
            Mode::Broadcast => "broadcast",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "unicast" => Some(Mode::Unicast),
            "broadcast" => Some(Mode::Broadcast),
            _ => None,
        }
    }

    pub fn for_vehicle_count(n: usize) -> Mode {
        if n <= 2 {
            Mode::Unicast
        } else {
            Mode::Broadcast
        }
    }

    pub fn check_vehicle_count(self, n: usize) -> Result<()> {
        match self {
            Mode::Unicast if n != 2 => Err(Error::InvalidParameter(format!(
                "unicast needs exactly 2 vehicles, got {n}"
            ))),
            Mode::Broadcast if n < 3 => Err(Error::InvalidParameter(format!(
                "broadcast needs at least 3 vehicles, got {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A set of objects heard from one sender, stamped with the slot it arrived.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSet {
    pub variables: ObjectSet,
    pub slot: usize,
}

impl ReceivedSet {
    fn is_valid(&self, current_slot: usize, validity: usize) -> bool {
        current_slot.saturating_sub(self.slot) < validity
    }
}

/// Objects known to one vehicle: its latest perception snapshot plus at most
/// one received set per other sender.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub owner: usize,
    pub local_snapshot: ObjectSet,
    pub snapshot_slot: Option<usize>,
    v2x: BTreeMap<usize, ReceivedSet>,
}

impl KnowledgeBase {
    pub fn new(owner: usize, object_count: usize) -> Self {
        KnowledgeBase {
            owner,
            local_snapshot: ObjectSet::empty(object_count),
            snapshot_slot: None,
            v2x: BTreeMap::new(),
        }
    }

    pub fn set_local_snapshot(&mut self, snapshot: ObjectSet, slot: usize) {
        self.local_snapshot = snapshot;
        self.snapshot_slot = Some(slot);
    }

    /// Replaces the entry for `sender`.
    pub fn receive(&mut self, sender: usize, variables: ObjectSet, slot: usize) {
        assert_ne!(sender, self.owner, "a vehicle never receives its own message");
        self.v2x.insert(sender, ReceivedSet { variables, slot });
    }

    pub fn entry(&self, sender: usize) -> Option<&ReceivedSet> {
        self.v2x.get(&sender)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &ReceivedSet)> {
        self.v2x.iter().map(|(&s, e)| (s, e))
    }

    /// Union of every received entry.
    pub fn received_set(&self) -> ObjectSet {
        let mut set = ObjectSet::empty(self.local_snapshot.capacity());
        for entry in self.v2x.values() {
            set.union_with(&entry.variables);
        }
        set
    }

    /// Local snapshot united with every received entry.
    pub fn known_set(&self) -> ObjectSet {
        let mut set = self.local_snapshot.clone();
        for entry in self.v2x.values() {
            set.union_with(&entry.variables);
        }
        set
    }

    pub fn knows(&self, object: ObjectId) -> bool {
        self.local_snapshot.contains(object) || self.v2x.values().any(|e| e.variables.contains(object))
    }

    fn expire(&mut self, current_slot: usize, validity: usize) {
        self.v2x.retain(|_, e| e.is_valid(current_slot, validity));
    }
}

/// Drops every received entry that is `n_vehicles` or more slots old.
pub fn expire_entries(mut kb: KnowledgeBase, current_slot: usize, n_vehicles: usize) -> KnowledgeBase {
    kb.expire(current_slot, n_vehicles);
    kb
}

/// Latest transmission of every sender as seen by a channel monitor. The
/// channel is lossless, so every vehicle observes the same history.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelHistory {
    object_count: usize,
    validity: usize,
    entries: BTreeMap<usize, ReceivedSet>,
}

impl ChannelHistory {
    pub fn new(object_count: usize, validity: usize) -> Self {
        ChannelHistory {
            object_count,
            validity,
            entries: BTreeMap::new(),
        }
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn record(&mut self, sender: usize, variables: ObjectSet, slot: usize) {
        self.entries.insert(sender, ReceivedSet { variables, slot });
    }

    pub fn entry(&self, sender: usize) -> Option<&ReceivedSet> {
        self.entries.get(&sender)
    }

    pub fn valid_entries(&self, current_slot: usize) -> impl Iterator<Item = &ReceivedSet> {
        let validity = self.validity;
        self.entries
            .values()
            .filter(move |e| e.is_valid(current_slot, validity))
    }

    fn expire(&mut self, current_slot: usize) {
        let validity = self.validity;
        self.entries.retain(|_, e| e.is_valid(current_slot, validity));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: usize,
    pub sender_position: Point,
    pub sender_speed: f64,
    pub variables: ObjectSet,
    pub slot: usize,
}

/// Ground truth of one local object for one intended receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverView {
    pub receiver: usize,
    /// Receiver's relevance value for the object.
    pub value: f64,
    /// Whether the receiver knew the object right before the message.
    pub redundant: bool,
}

/// One telemetry row per object of the transmitter's local snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableRecord {
    pub object: ObjectId,
    pub selected: bool,
    pub receivers: Vec<ReceiverView>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotTelemetry {
    pub slot: usize,
    pub scheme: SchemeKind,
    pub transmitter: usize,
    pub gamma: usize,
    pub message: Message,
    pub local_set_size: usize,
    pub known_set_size: usize,
    pub eps: Option<f64>,
    pub variables: Vec<VariableRecord>,
}

impl SlotTelemetry {
    pub fn selected(&self) -> impl Iterator<Item = &VariableRecord> {
        self.variables.iter().filter(|v| v.selected)
    }
}

/// Full mutable state of one episode.
#[derive(Debug, Clone)]
pub struct SimState {
    pub slot: usize,
    pub scenario: Scenario,
    pub relevance: Vec<RelevanceFunction>,
    pub knowledge: Vec<KnowledgeBase>,
    pub channel: ChannelHistory,
    pub scheme: SchemeKind,
    pub gamma: usize,
    pub mode: Mode,
    pub estimation: EstimationModel,
    pub s_min: f64,
    detection: Vec<Vec<f64>>,
}

impl SimState {
    pub fn new(
        scenario: Scenario,
        relevance: Vec<RelevanceFunction>,
        scheme: SchemeKind,
        gamma: usize,
        mode: Mode,
        estimation: EstimationModel,
        s_min: f64,
    ) -> Result<SimState> {
        let n = scenario.vehicle_count();
        mode.check_vehicle_count(n)?;
        if gamma == 0 {
            return Err(Error::InvalidParameter("gamma must be at least 1".into()));
        }
        if relevance.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} relevance functions for {n} vehicles",
                relevance.len()
            )));
        }
        let k = scenario.object_count();
        let knowledge = (0..n).map(|id| KnowledgeBase::new(id, k)).collect();
        let detection = detection_tables(&scenario);
        Ok(SimState {
            slot: 0,
            channel: ChannelHistory::new(k, n),
            scenario,
            relevance,
            knowledge,
            scheme,
            gamma,
            mode,
            estimation,
            s_min,
            detection,
        })
    }

    pub fn vehicle_count(&self) -> usize {
        self.scenario.vehicle_count()
    }

    pub fn transmitter_at(&self, slot: usize) -> usize {
        slot % self.vehicle_count()
    }

    /// Intended receivers of `transmitter`: everyone else, in both modes.
    pub fn receivers_of(&self, transmitter: usize) -> Vec<usize> {
        (0..self.vehicle_count()).filter(|&r| r != transmitter).collect()
    }

    pub fn run_slot<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SlotTelemetry {
        let slot = self.slot;
        let n = self.vehicle_count();
        for kb in &mut self.knowledge {
            kb.expire(slot, n);
        }
        self.channel.expire(slot);

        let transmitter = self.transmitter_at(slot);
        let receivers = self.receivers_of(transmitter);

        let local = sample_with_probabilities(&self.detection[transmitter], rng);
        self.knowledge[transmitter].set_local_snapshot(local.clone(), slot);
        let known_set_size = self.knowledge[transmitter].known_set().len();
        let estimated = estimate_receiver_known(&self.channel, slot);
        let truth: Vec<ObjectSet> = receivers
            .iter()
            .map(|&r| self.knowledge[r].known_set())
            .collect();

        let ctx = SelectionContext {
            transmitter,
            local_set: &local,
            known_set_size,
            estimated_receiver_known: &estimated,
            true_receiver_known: &truth,
            receivers: &receivers,
            gamma: self.gamma,
            s_min: self.s_min,
            relevance: &self.relevance,
        };
        let selection = select(self.scheme, &ctx, &self.estimation, rng);
        assert!(
            selection.variables.len() <= self.gamma && selection.variables.is_subset(&local),
            "scheme {} violated the message contract",
            self.scheme
        );

        let variables = local
            .iter()
            .map(|k| VariableRecord {
                object: k,
                selected: selection.variables.contains(k),
                receivers: receivers
                    .iter()
                    .zip(&truth)
                    .map(|(&r, known)| ReceiverView {
                        receiver: r,
                        value: self.relevance[r].value(k),
                        redundant: known.contains(k),
                    })
                    .collect(),
            })
            .collect();

        let vehicle = &self.scenario.vehicles[transmitter];
        let message = Message {
            sender: transmitter,
            sender_position: vehicle.position,
            sender_speed: vehicle.speed,
            variables: selection.variables,
            slot,
        };
        for &r in &receivers {
            self.knowledge[r].receive(transmitter, message.variables.clone(), slot);
        }
        self.channel
            .record(transmitter, message.variables.clone(), slot);

        if self.scenario.config.mobility == MobilityMode::ConstantVelocity {
            self.scenario.advance(1);
            self.detection = detection_tables(&self.scenario);
        }
        self.slot += 1;

        SlotTelemetry {
            slot,
            scheme: self.scheme,
            transmitter,
            gamma: self.gamma,
            message,
            local_set_size: local.len(),
            known_set_size,
            eps: selection.eps,
            variables,
        }
    }
}

fn detection_tables(scenario: &Scenario) -> Vec<Vec<f64>> {
    scenario
        .vehicles
        .iter()
        .map(|v| v.detection_table(&scenario.objects))
        .collect()
}

/// Everything one episode needs besides its random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub scene: SceneConfig,
    pub relevance: RelevanceParams,
    pub estimation: EstimationModel,
    pub scheme: SchemeKind,
    pub gamma: usize,
    pub mode: Mode,
    pub slots: usize,
    pub sv_aggregation: SvAggregation,
}

impl EpisodeConfig {
    /// Slots of the warm-up cycle excluded from metrics.
    pub fn warmup_slots(&self) -> usize {
        self.scene.vehicle_count
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.relevance.validate()?;
        self.estimation.validate()?;
        self.mode.check_vehicle_count(self.scene.vehicle_count)?;
        if self.gamma == 0 {
            return Err(Error::InvalidParameter("gamma must be at least 1".into()));
        }
        let min = 2 * self.scene.vehicle_count;
        if self.slots < min {
            return Err(Error::EpisodeTooShort {
                min,
                got: self.slots,
            });
        }
        Ok(())
    }

    /// Scenario and relevance functions drawn from the head of the stream.
    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimState> {
        self.validate()?;
        let scenario = Scenario::generate(&self.scene, rng)?;
        let relevance = build_relevance_functions(&scenario, &self.relevance, rng);
        SimState::new(
            scenario,
            relevance,
            self.scheme,
            self.gamma,
            self.mode,
            self.estimation.clone(),
            self.relevance.s_min,
        )
    }
}

/// Runs one episode, handing every slot's telemetry and the post-slot state
/// to `observe` (warm-up included), and returns the metric accumulator.
pub fn run_episode_observed<R, F>(
    config: &EpisodeConfig,
    rng: &mut R,
    mut observe: F,
) -> Result<MetricsAccumulator>
where
    R: Rng + ?Sized,
    F: FnMut(&SlotTelemetry, &SimState),
{
    let mut state = config.initial_state(rng)?;
    let n = state.vehicle_count();
    let warmup = config.warmup_slots();
    let mut acc = MetricsAccumulator::new(config.gamma, config.relevance.s_min, config.sv_aggregation);
    let mut cycle = MultiplicityTracker::new(state.scenario.object_count());

    for _ in 0..config.slots {
        let telemetry = state.run_slot(rng);
        observe(&telemetry, &state);
        if telemetry.slot < warmup {
            continue;
        }
        acc.record_slot();
        acc.record_transmission(&telemetry);
        cycle.record(&telemetry.message.variables);
        if (telemetry.slot - warmup + 1).is_multiple_of(n) {
            cycle.close(&mut acc);
        }
        for (kb, f) in state.knowledge.iter().zip(&state.relevance) {
            acc.record_awareness_snapshot(&kb.known_set(), f);
        }
    }
    Ok(acc)
}

pub fn run_episode_accumulated<R: Rng + ?Sized>(
    config: &EpisodeConfig,
    rng: &mut R,
) -> Result<MetricsAccumulator> {
    run_episode_observed(config, rng, |_, _| {})
}

pub fn run_episode<R: Rng + ?Sized>(config: &EpisodeConfig, rng: &mut R) -> Result<MetricsRecord> {
    run_episode_accumulated(config, rng)?.finalize()
}
