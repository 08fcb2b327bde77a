//! Driving scenario: object placement, vehicle spawning, mobility and the
//! onboard perception model.

use rand::Rng;

use crate::error::{Error, Result};
use crate::object_set::{ObjectId, ObjectSet};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Logistic curve `1 / (1 + scale * exp(-rate * (x - midpoint)))`.
///
/// Used both for the detection probability against distance and for the
/// estimation error against known-set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    pub scale: f64,
    pub rate: f64,
    pub midpoint: f64,
}

impl Logistic {
    pub const fn new(scale: f64, rate: f64, midpoint: f64) -> Self {
        Logistic {
            scale,
            rate,
            midpoint,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        1.0 / (1.0 + self.scale * (-self.rate * (x - self.midpoint)).exp())
    }
}

/// Sensor coefficients giving a 150 m perception range.
pub const DEFAULT_DETECTION: Logistic = Logistic::new(0.08, -0.08, 60.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MobilityMode {
    /// Vehicles stay at their origin for the whole episode.
    StaticEpisode,
    /// Vehicles drive towards their destination and stop there.
    ConstantVelocity,
}

impl MobilityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MobilityMode::StaticEpisode => "static",
            MobilityMode::ConstantVelocity => "constant_velocity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "static" | "static_episode" => Some(MobilityMode::StaticEpisode),
            "constant_velocity" => Some(MobilityMode::ConstantVelocity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub width: f64,
    pub height: f64,
    pub object_count: usize,
    pub vehicle_count: usize,
    pub mobility: MobilityMode,
    pub vehicle_speed: f64,
    pub slot_duration: f64,
    pub detection: Logistic,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            width: 800.0,
            height: 200.0,
            object_count: 110,
            vehicle_count: 2,
            mobility: MobilityMode::StaticEpisode,
            vehicle_speed: 14.0,
            slot_duration: 0.1,
            detection: DEFAULT_DETECTION,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScene(msg));
        if !(self.width.is_finite() && self.width > 0.0) {
            return bad(format!("width must be positive, got {}", self.width));
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return bad(format!("height must be positive, got {}", self.height));
        }
        if self.vehicle_count < 2 {
            return bad(format!(
                "at least 2 vehicles are needed (one transmitter, one receiver), got {}",
                self.vehicle_count
            ));
        }
        if !(self.slot_duration.is_finite() && self.slot_duration > 0.0) {
            return bad(format!(
                "slot duration must be positive, got {}",
                self.slot_duration
            ));
        }
        if !(self.vehicle_speed.is_finite() && self.vehicle_speed >= 0.0) {
            return bad(format!(
                "vehicle speed must be non-negative, got {}",
                self.vehicle_speed
            ));
        }
        let d = &self.detection;
        if !(d.scale.is_finite() && d.rate.is_finite() && d.midpoint.is_finite()) || d.scale < 0.0 {
            return bad(format!("invalid detection coefficients {d:?}"));
        }
        Ok(())
    }

    fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            rng.random::<f64>() * self.width,
            rng.random::<f64>() * self.height,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectPoint {
    pub id: ObjectId,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleKinematics {
    pub id: usize,
    pub origin: Point,
    pub destination: Point,
    pub position: Point,
    pub speed: f64,
    pub perception: Logistic,
}

impl VehicleKinematics {
    pub fn path_length(&self) -> f64 {
        self.origin.distance(&self.destination)
    }

    /// Detection probability for every object, indexed by object id.
    pub fn detection_table(&self, objects: &[ObjectPoint]) -> Vec<f64> {
        objects
            .iter()
            .map(|o| detection_probability(self.position.distance(&o.position), &self.perception))
            .collect()
    }

    fn advance(&mut self, meters: f64) {
        let length = self.path_length();
        let travelled = self.origin.distance(&self.position) + meters;
        if travelled >= length {
            self.position = self.destination;
        } else {
            let t = travelled / length;
            self.position = Point::new(
                self.origin.x + (self.destination.x - self.origin.x) * t,
                self.origin.y + (self.destination.y - self.origin.y) * t,
            );
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SceneConfig,
    pub objects: Vec<ObjectPoint>,
    pub vehicles: Vec<VehicleKinematics>,
}

impl Scenario {
    /// Objects first, then vehicles, from one stream.
    pub fn generate<R: Rng + ?Sized>(config: &SceneConfig, rng: &mut R) -> Result<Scenario> {
        config.validate()?;
        let objects = place_objects(config, rng);
        let vehicles = spawn_vehicles(config, rng)?;
        Ok(Scenario {
            config: config.clone(),
            objects,
            vehicles,
        })
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn vehicle_count(&self) -> usize {
        self.vehicles.len()
    }

    pub fn advance(&mut self, slots: usize) {
        if self.config.mobility == MobilityMode::StaticEpisode || slots == 0 {
            return;
        }
        let dt = self.config.slot_duration * slots as f64;
        for v in &mut self.vehicles {
            v.advance(v.speed * dt);
        }
    }
}

/// Places exactly `object_count` objects uniformly in the rectangle, i.e. a
/// Poisson point process conditioned on its count.
pub fn place_objects<R: Rng + ?Sized>(config: &SceneConfig, rng: &mut R) -> Vec<ObjectPoint> {
    (0..config.object_count)
        .map(|id| ObjectPoint {
            id,
            position: config.sample_point(rng),
        })
        .collect()
}

pub fn spawn_vehicles<R: Rng + ?Sized>(
    config: &SceneConfig,
    rng: &mut R,
) -> Result<Vec<VehicleKinematics>> {
    if config.vehicle_count < 2 {
        return Err(Error::InvalidScene(format!(
            "at least 2 vehicles are needed, got {}",
            config.vehicle_count
        )));
    }
    let vehicles = (0..config.vehicle_count)
        .map(|id| {
            let origin = config.sample_point(rng);
            let mut destination = config.sample_point(rng);
            while destination == origin {
                destination = config.sample_point(rng);
            }
            VehicleKinematics {
                id,
                origin,
                destination,
                position: origin,
                speed: config.vehicle_speed,
                perception: config.detection,
            }
        })
        .collect();
    Ok(vehicles)
}

pub fn advance_mobility(mut scenario: Scenario, slots: usize) -> Scenario {
    scenario.advance(slots);
    scenario
}

pub fn detection_probability(distance: f64, coeffs: &Logistic) -> f64 {
    coeffs.evaluate(distance)
}

/// Fresh perception snapshot: one Bernoulli trial per object.
pub fn sample_local_set<R: Rng + ?Sized>(
    vehicle: &VehicleKinematics,
    objects: &[ObjectPoint],
    rng: &mut R,
) -> ObjectSet {
    sample_with_probabilities(&vehicle.detection_table(objects), rng)
}

/// Same draws as [`sample_local_set`] from a precomputed detection table.
pub fn sample_with_probabilities<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> ObjectSet {
    let mut set = ObjectSet::empty(probabilities.len());
    for (id, &p) in probabilities.iter().enumerate() {
        if rng.random::<f64>() < p {
            set.insert(id);
        }
    }
    set
}
