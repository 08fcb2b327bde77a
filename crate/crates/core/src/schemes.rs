//! Content-selection schemes.
//!
//! Every scheme picks a subset of the transmitter's fresh local snapshot of
//! at most `gamma` objects. The agnostic schemes (Baseline, IRC, RM) only look
//! at the estimated receiver knowledge; Semantic scores candidates with noisy
//! estimates of the receivers' relevance functions; IdealSemantic scores them
//! with the true values and the true receiver knowledge.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::index;
use rand::Rng;

use crate::engine::ChannelHistory;
use crate::error::{Error, Result};
use crate::object_set::{ObjectId, ObjectSet};
use crate::relevance::{semantic_value, RelevanceFunction};
use crate::scenario::Logistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Baseline,
    Irc,
    Rm,
    Semantic,
    IdealSemantic,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Baseline,
        SchemeKind::Irc,
        SchemeKind::Rm,
        SchemeKind::Semantic,
        SchemeKind::IdealSemantic,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Baseline => "Baseline",
            SchemeKind::Irc => "IRC",
            SchemeKind::Rm => "RM",
            SchemeKind::Semantic => "Semantic",
            SchemeKind::IdealSemantic => "IdealSemantic",
        }
    }

    /// Case-insensitive; accepts `ideal_semantic` and `ideal-semantic` too.
    pub fn parse(s: &str) -> Option<SchemeKind> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "baseline" => Some(SchemeKind::Baseline),
            "irc" => Some(SchemeKind::Irc),
            "rm" => Some(SchemeKind::Rm),
            "semantic" => Some(SchemeKind::Semantic),
            "idealsemantic" => Some(SchemeKind::IdealSemantic),
            _ => None,
        }
    }

    /// Whether the scheme consults the noisy estimation model.
    pub fn uses_estimation(self) -> bool {
        self == SchemeKind::Semantic
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the estimation interval is reconciled with the valid value range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalClipping {
    /// Sample uniformly on the interval intersected with `[0, 1]`.
    Truncate,
    /// Sample uniformly on the full interval, then clamp into `[0, 1]`.
    Clamp,
}

impl IntervalClipping {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalClipping::Truncate => "truncate",
            IntervalClipping::Clamp => "clamp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "truncate" => Some(IntervalClipping::Truncate),
            "clamp" => Some(IntervalClipping::Clamp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationModel {
    /// Error against the transmitter's known-set size.
    pub error_curve: Logistic,
    /// `max(w) - min(w)` of the relevance values.
    pub value_range_width: f64,
    pub clipping: IntervalClipping,
}

impl Default for EstimationModel {
    fn default() -> Self {
        EstimationModel {
            error_curve: Logistic::new(1.0, -0.5, 26.0),
            value_range_width: 1.0,
            clipping: IntervalClipping::Clamp,
        }
    }
}

impl EstimationModel {
    pub fn validate(&self) -> Result<()> {
        let c = &self.error_curve;
        if !(c.scale.is_finite() && c.rate.is_finite() && c.midpoint.is_finite()) || c.scale < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid estimation-error coefficients {c:?}"
            )));
        }
        if !(self.value_range_width.is_finite() && self.value_range_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "value range width must be positive, got {}",
                self.value_range_width
            )));
        }
        Ok(())
    }
}

pub fn estimation_error(known_count: usize, model: &EstimationModel) -> f64 {
    model.error_curve.evaluate(known_count as f64)
}

/// Draws an estimate from an interval of width `value_range_width * eps`
/// centred on the true value.
pub fn sample_estimated_value<R: Rng + ?Sized>(
    true_w: f64,
    eps: f64,
    model: &EstimationModel,
    rng: &mut R,
) -> f64 {
    let width = model.value_range_width * eps;
    let u: f64 = rng.random();
    match model.clipping {
        IntervalClipping::Clamp => (true_w + width * (u - 0.5)).clamp(0.0, 1.0),
        IntervalClipping::Truncate => {
            let lo = (true_w - width / 2.0).max(0.0);
            let hi = (true_w + width / 2.0).min(1.0);
            lo + (hi - lo) * u
        }
    }
}

/// Objects the channel monitor believes every vehicle already holds: the
/// union of every still-valid transmission heard on the channel.
pub fn estimate_receiver_known(history: &ChannelHistory, current_slot: usize) -> ObjectSet {
    let mut known = ObjectSet::empty(history.object_count());
    for entry in history.valid_entries(current_slot) {
        known.union_with(&entry.variables);
    }
    known
}

/// Read-only inputs for one selection event.
#[derive(Debug, Clone, Copy)]
pub struct SelectionContext<'a> {
    pub transmitter: usize,
    pub local_set: &'a ObjectSet,
    /// Size of the transmitter's full known set (local plus valid received).
    pub known_set_size: usize,
    pub estimated_receiver_known: &'a ObjectSet,
    /// Actual known set of each receiver, aligned with `receivers`.
    pub true_receiver_known: &'a [ObjectSet],
    pub receivers: &'a [usize],
    pub gamma: usize,
    pub s_min: f64,
    /// Relevance functions indexed by vehicle id.
    pub relevance: &'a [RelevanceFunction],
}

impl SelectionContext<'_> {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 {
            return Err(Error::InvalidParameter("gamma must be at least 1".into()));
        }
        if self.receivers.is_empty() {
            return Err(Error::InvalidParameter("no intended receivers".into()));
        }
        if self.receivers.contains(&self.transmitter) {
            return Err(Error::InvalidParameter(format!(
                "transmitter {} listed as its own receiver",
                self.transmitter
            )));
        }
        if self.true_receiver_known.len() != self.receivers.len() {
            return Err(Error::InvalidParameter(
                "true receiver knowledge not aligned with receivers".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a selection event.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub variables: ObjectSet,
    /// Estimation error used, for schemes that estimate relevance.
    pub eps: Option<f64>,
}

pub fn select<R: Rng + ?Sized>(
    kind: SchemeKind,
    ctx: &SelectionContext<'_>,
    model: &EstimationModel,
    rng: &mut R,
) -> Selection {
    match kind {
        SchemeKind::Baseline => Selection {
            variables: select_baseline(ctx, rng),
            eps: None,
        },
        SchemeKind::Irc => Selection {
            variables: select_irc(ctx, rng),
            eps: None,
        },
        SchemeKind::Rm => Selection {
            variables: select_rm(ctx, rng),
            eps: None,
        },
        SchemeKind::Semantic => Selection {
            variables: select_semantic(ctx, model, rng),
            eps: Some(estimation_error(ctx.known_set_size, model)),
        },
        SchemeKind::IdealSemantic => Selection {
            variables: select_ideal_semantic(ctx),
            eps: None,
        },
    }
}

fn random_subset<R: Rng + ?Sized>(
    capacity: usize,
    candidates: &[ObjectId],
    amount: usize,
    rng: &mut R,
) -> ObjectSet {
    if candidates.len() <= amount {
        return ObjectSet::from_ids(capacity, candidates.iter().copied());
    }
    ObjectSet::from_ids(
        capacity,
        index::sample(rng, candidates.len(), amount)
            .into_iter()
            .map(|i| candidates[i]),
    )
}

pub fn select_baseline<R: Rng + ?Sized>(ctx: &SelectionContext<'_>, rng: &mut R) -> ObjectSet {
    let local = ctx.local_set;
    if local.len() <= ctx.gamma {
        return local.clone();
    }
    random_subset(local.capacity(), &local.to_vec(), ctx.gamma, rng)
}

pub fn select_irc<R: Rng + ?Sized>(ctx: &SelectionContext<'_>, rng: &mut R) -> ObjectSet {
    let local = ctx.local_set;
    if local.len() <= ctx.gamma {
        return local.clone();
    }
    let redundant = local.intersection(ctx.estimated_receiver_known);
    let fresh = local.difference(ctx.estimated_receiver_known);
    if fresh.len() > ctx.gamma {
        return random_subset(local.capacity(), &fresh.to_vec(), ctx.gamma, rng);
    }
    // Removing a random subset of redundant objects is the same as removing
    // them one at a time in random order.
    let excess = local.len() - ctx.gamma;
    let redundant_ids = redundant.to_vec();
    let mut out = local.clone();
    for i in index::sample(rng, redundant_ids.len(), excess) {
        out.remove(redundant_ids[i]);
    }
    out
}

pub fn select_rm<R: Rng + ?Sized>(ctx: &SelectionContext<'_>, rng: &mut R) -> ObjectSet {
    let candidates = ctx.local_set.difference(ctx.estimated_receiver_known);
    if candidates.len() <= ctx.gamma {
        return candidates;
    }
    random_subset(candidates.capacity(), &candidates.to_vec(), ctx.gamma, rng)
}

pub fn select_semantic<R: Rng + ?Sized>(
    ctx: &SelectionContext<'_>,
    model: &EstimationModel,
    rng: &mut R,
) -> ObjectSet {
    let scored = semantic_scores(ctx, model, rng);
    top_scored(ctx.local_set.capacity(), scored, ctx.gamma, ctx.s_min)
}

/// Estimated score of every local object: zero when the channel monitor
/// believes the receivers already hold it, otherwise the max over receivers
/// of one fresh estimate each.
pub fn semantic_scores<R: Rng + ?Sized>(
    ctx: &SelectionContext<'_>,
    model: &EstimationModel,
    rng: &mut R,
) -> Vec<(ObjectId, f64)> {
    let eps = estimation_error(ctx.known_set_size, model);
    ctx.local_set
        .iter()
        .map(|k| {
            if ctx.estimated_receiver_known.contains(k) {
                return (k, 0.0);
            }
            let score = ctx
                .receivers
                .iter()
                .map(|&r| sample_estimated_value(ctx.relevance[r].value(k), eps, model, rng))
                .fold(0.0, f64::max);
            (k, score)
        })
        .collect()
}

pub fn select_ideal_semantic(ctx: &SelectionContext<'_>) -> ObjectSet {
    let scored = ctx
        .local_set
        .iter()
        .map(|k| (k, true_score(ctx, k)))
        .collect();
    top_scored(ctx.local_set.capacity(), scored, ctx.gamma, ctx.s_min)
}

/// Max over receivers of the true semantic value of object `k`.
pub fn true_score(ctx: &SelectionContext<'_>, k: ObjectId) -> f64 {
    ctx.receivers
        .iter()
        .zip(ctx.true_receiver_known)
        .map(|(&r, known)| semantic_value(ctx.relevance[r].value(k), known.contains(k)))
        .fold(0.0, f64::max)
}

/// Keeps scores strictly above `s_min`, ranks them descending with ties to
/// the lower id, and returns the first `gamma`.
fn top_scored(
    capacity: usize,
    mut scored: Vec<(ObjectId, f64)>,
    gamma: usize,
    s_min: f64,
) -> ObjectSet {
    scored.retain(|&(_, s)| s > s_min);
    scored.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    ObjectSet::from_ids(capacity, scored.into_iter().take(gamma).map(|(k, _)| k))
}
