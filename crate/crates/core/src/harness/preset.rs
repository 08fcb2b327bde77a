use std::fmt;

use crate::engine::Mode;
use crate::error::{Error, Result};

use super::ExperimentSpec;

/// Metric columns a figure is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Hrr,
    MeanSv,
    Lrr,
    Usage,
    Se,
    MeanEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
        Preset::Fig9,
        Preset::Fig10,
    ];

    pub fn parse(name: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig10 => "fig10",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Preset::Fig5 | Preset::Fig6 | Preset::Fig7 => Mode::Unicast,
            Preset::Fig8 | Preset::Fig9 | Preset::Fig10 => Mode::Broadcast,
        }
    }

    pub fn focus(self) -> &'static [Metric] {
        match self {
            Preset::Fig5 => &[Metric::Hrr],
            Preset::Fig6 | Preset::Fig9 => &[Metric::MeanSv, Metric::Lrr],
            Preset::Fig7 | Preset::Fig10 => &[Metric::Usage, Metric::Se],
            Preset::Fig8 => &[Metric::Hrr, Metric::MeanEps],
        }
    }

    /// Default parameters with two vehicles for unicast figures and four for
    /// broadcast figures.
    pub fn spec(self) -> ExperimentSpec {
        let mut spec = ExperimentSpec {
            mode: self.mode(),
            ..ExperimentSpec::default()
        };
        spec.scene.vehicle_count = match self.mode() {
            Mode::Unicast => 2,
            Mode::Broadcast => 4,
        };
        spec
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
