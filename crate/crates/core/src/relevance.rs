//! Contextual relevance functions.
//!
//! Each vehicle assigns every object either to the low class (value exactly
//! 0) or to the high class (value uniform in `high_range`). Vehicle 0 is the
//! reference; every other vehicle either draws its classes independently
//! (probability `randomization_p`) or copies each reference class with a
//! distance-dependent probability and otherwise redraws it from the marginal.
//! Both branches keep `P(high) = 1 - delta_l` for every vehicle.

use rand::Rng;

use crate::error::{Error, Result};
use crate::object_set::{ObjectId, ObjectSet};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceParams {
    /// Fraction of objects in the low class.
    pub delta_l: f64,
    pub high_min: f64,
    pub high_max: f64,
    /// Probability that a vehicle's function ignores the reference entirely.
    pub randomization_p: f64,
    pub rho_near: f64,
    pub d_near: f64,
    pub d_far: f64,
    /// Values must exceed this to count as relevant.
    pub s_min: f64,
}

impl Default for RelevanceParams {
    fn default() -> Self {
        RelevanceParams {
            delta_l: 0.7,
            high_min: 0.5,
            high_max: 1.0,
            randomization_p: 0.5,
            rho_near: 0.9,
            d_near: 100.0,
            d_far: 400.0,
            s_min: 0.05,
        }
    }
}

impl RelevanceParams {
    /// Value of low-class objects.
    pub const LOW_VALUE: f64 = 0.0;

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("delta_L", self.delta_l)?;
        unit("randomization_p", self.randomization_p)?;
        unit("rho_near", self.rho_near)?;
        unit("s_min", self.s_min)?;
        if !(self.high_min > 0.0 && self.high_min <= self.high_max && self.high_max <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "high range must satisfy 0 < min <= max <= 1, got [{}, {}]",
                self.high_min, self.high_max
            )));
        }
        if !(self.d_near > 0.0 && self.d_near < self.d_far && self.d_far.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "correlation distances must satisfy 0 < d_near < d_far, got {} and {}",
                self.d_near, self.d_far
            )));
        }
        Ok(())
    }

    fn high_probability(&self) -> f64 {
        1.0 - self.delta_l
    }

    fn sample_high_value<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.high_min + (self.high_max - self.high_min) * rng.random::<f64>()
    }
}

/// Per-vehicle semantic values `w[k]`, one per object.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceFunction {
    pub owner: usize,
    values: Vec<f64>,
    high: ObjectSet,
}

impl RelevanceFunction {
    pub fn from_values(owner: usize, values: Vec<f64>) -> Self {
        let high = ObjectSet::from_ids(
            values.len(),
            values
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > RelevanceParams::LOW_VALUE)
                .map(|(k, _)| k),
        );
        RelevanceFunction {
            owner,
            values,
            high,
        }
    }

    pub fn value(&self, object: ObjectId) -> f64 {
        self.values[object]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_high(&self, object: ObjectId) -> bool {
        self.high.contains(object)
    }

    pub fn high_set(&self) -> &ObjectSet {
        &self.high
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `rho_near` up to `d_near`, linear down to 0 at `d_far`, 0 beyond.
pub fn correlation_coefficient(distance: f64, params: &RelevanceParams) -> f64 {
    if distance <= params.d_near {
        params.rho_near
    } else if distance >= params.d_far {
        0.0
    } else {
        params.rho_near * (params.d_far - distance) / (params.d_far - params.d_near)
    }
}

pub fn build_relevance_functions<R: Rng + ?Sized>(
    scenario: &Scenario,
    params: &RelevanceParams,
    rng: &mut R,
) -> Vec<RelevanceFunction> {
    let k = scenario.object_count();
    let p_high = params.high_probability();
    let Some(reference) = scenario.vehicles.first() else {
        return Vec::new();
    };

    let reference_classes: Vec<bool> = (0..k).map(|_| rng.random::<f64>() < p_high).collect();
    let mut functions = Vec::with_capacity(scenario.vehicle_count());
    functions.push(materialize(reference.id, &reference_classes, params, rng));

    for vehicle in &scenario.vehicles[1..] {
        let independent = rng.random::<f64>() < params.randomization_p;
        let classes: Vec<bool> = if independent {
            (0..k).map(|_| rng.random::<f64>() < p_high).collect()
        } else {
            let rho = correlation_coefficient(vehicle.position.distance(&reference.position), params);
            reference_classes
                .iter()
                .map(|&reference_high| {
                    if rng.random::<f64>() < rho {
                        reference_high
                    } else {
                        rng.random::<f64>() < p_high
                    }
                })
                .collect()
        };
        functions.push(materialize(vehicle.id, &classes, params, rng));
    }
    functions
}

fn materialize<R: Rng + ?Sized>(
    owner: usize,
    classes: &[bool],
    params: &RelevanceParams,
    rng: &mut R,
) -> RelevanceFunction {
    let values = classes
        .iter()
        .map(|&high| {
            if high {
                params.sample_high_value(rng)
            } else {
                RelevanceParams::LOW_VALUE
            }
        })
        .collect();
    RelevanceFunction::from_values(owner, values)
}

/// True semantic value for a receiver: zero when the receiver already knows
/// the object.
pub fn semantic_value(w: f64, redundant: bool) -> f64 {
    if redundant {
        0.0
    } else {
        w
    }
}
