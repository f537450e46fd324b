//! Sweep axes and the mapping from axis values onto model parameters.

use std::fmt;
use std::str::FromStr;

use crate::effective::{DriveParams, SystemParams};
use crate::error::{invalid, Result};

/// The mutable model fields a sweep may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    G1,
    G2,
    Amplitude,
    Frequency,
    Cavity1,
    Cavity2,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::G1 => "g1",
            Field::G2 => "g2",
            Field::Amplitude => "A_D",
            Field::Frequency => "omega_D",
            Field::Cavity1 => "Omega1",
            Field::Cavity2 => "Omega2",
        }
    }
}

/// What an axis value means. Each quantity writes exactly one [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisQuantity {
    G1,
    G1OverCavity1,
    G2,
    G2OverCavity2,
    Amplitude,
    Theta,
    TwoTheta,
    Frequency,
    Cavity1,
    Cavity2,
    Delta1OverCavity1,
    Delta2OverCavity2,
}

impl AxisQuantity {
    pub const ALL: [AxisQuantity; 12] = [
        AxisQuantity::G1,
        AxisQuantity::G1OverCavity1,
        AxisQuantity::G2,
        AxisQuantity::G2OverCavity2,
        AxisQuantity::Amplitude,
        AxisQuantity::Theta,
        AxisQuantity::TwoTheta,
        AxisQuantity::Frequency,
        AxisQuantity::Cavity1,
        AxisQuantity::Cavity2,
        AxisQuantity::Delta1OverCavity1,
        AxisQuantity::Delta2OverCavity2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxisQuantity::G1 => "g1",
            AxisQuantity::G1OverCavity1 => "g1/Omega1",
            AxisQuantity::G2 => "g2",
            AxisQuantity::G2OverCavity2 => "g2/Omega2",
            AxisQuantity::Amplitude => "A_D",
            AxisQuantity::Theta => "theta",
            AxisQuantity::TwoTheta => "2theta",
            AxisQuantity::Frequency => "omega_D",
            AxisQuantity::Cavity1 => "Omega1",
            AxisQuantity::Cavity2 => "Omega2",
            AxisQuantity::Delta1OverCavity1 => "delta1/Omega1",
            AxisQuantity::Delta2OverCavity2 => "delta2/Omega2",
        }
    }

    pub fn field(self) -> Field {
        match self {
            AxisQuantity::G1 | AxisQuantity::G1OverCavity1 => Field::G1,
            AxisQuantity::G2 | AxisQuantity::G2OverCavity2 => Field::G2,
            AxisQuantity::Amplitude | AxisQuantity::Theta | AxisQuantity::TwoTheta => Field::Amplitude,
            AxisQuantity::Frequency => Field::Frequency,
            AxisQuantity::Cavity1 | AxisQuantity::Delta1OverCavity1 => Field::Cavity1,
            AxisQuantity::Cavity2 | AxisQuantity::Delta2OverCavity2 => Field::Cavity2,
        }
    }

    pub fn needs_drive(self) -> bool {
        matches!(self.field(), Field::Amplitude | Field::Frequency)
    }

    // Fields others depend on are resolved first: cavities before coupling
    // ratios, drive frequency before the modulation index.
    fn priority(self) -> u8 {
        match self {
            AxisQuantity::Cavity1 | AxisQuantity::Cavity2 => 0,
            AxisQuantity::Delta1OverCavity1 | AxisQuantity::Delta2OverCavity2 => 0,
            AxisQuantity::Frequency => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for AxisQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisQuantity {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|q| q.as_str()).collect();
                invalid(format!("unknown sweep parameter `{s}`, expected one of {}", known.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub quantity: AxisQuantity,
    pub values: Vec<f64>,
}

impl Axis {
    /// `points` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(quantity: AxisQuantity, start: f64, stop: f64, points: usize) -> Self {
        let values = match points {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..points)
                .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
                .collect(),
        };
        Self { name: quantity.as_str().to_string(), quantity, values }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid(format!("axis `{}` has no points", self.name)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("axis `{}` has non-finite values", self.name)));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(format!("axis `{}` must be strictly increasing", self.name)));
        }
        Ok(())
    }
}

/// Applies axis assignments to a template and validates the result.
pub fn resolve_point(
    sys: &SystemParams,
    drive: Option<&DriveParams>,
    assignments: &[(AxisQuantity, f64)],
) -> Result<(SystemParams, Option<DriveParams>)> {
    let mut sys = *sys;
    let mut drive = drive.copied();
    let mut ordered: Vec<_> = assignments.to_vec();
    ordered.sort_by_key(|(q, _)| q.priority());
    for (q, v) in ordered {
        if q.needs_drive() && drive.is_none() {
            return Err(invalid(format!("sweep parameter `{q}` needs a drive block")));
        }
        match q {
            AxisQuantity::G1 => sys.g1 = v,
            AxisQuantity::G1OverCavity1 => sys.g1 = v * sys.cavity1,
            AxisQuantity::G2 => sys.g2 = v,
            AxisQuantity::G2OverCavity2 => sys.g2 = v * sys.cavity2,
            AxisQuantity::Cavity1 => sys.cavity1 = v,
            AxisQuantity::Cavity2 => sys.cavity2 = v,
            AxisQuantity::Delta1OverCavity1 => sys.cavity1 = (2.0 * sys.omega1 + sys.omega2) / (1.0 + v),
            AxisQuantity::Delta2OverCavity2 => sys.cavity2 = (2.0 * sys.omega2 + sys.omega1) / (1.0 + v),
            AxisQuantity::Amplitude => drive.as_mut().unwrap().amplitude = v,
            AxisQuantity::Frequency => drive.as_mut().unwrap().frequency = v,
            AxisQuantity::Theta => {
                let d = drive.as_mut().unwrap();
                d.amplitude = v * d.frequency;
            }
            AxisQuantity::TwoTheta => {
                let d = drive.as_mut().unwrap();
                d.amplitude = 0.5 * v * d.frequency;
            }
        }
    }
    sys.validate()?;
    if let Some(d) = &drive {
        d.validate()?;
    }
    Ok((sys, drive))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for q in AxisQuantity::ALL {
            assert_eq!(q.as_str().parse::<AxisQuantity>().unwrap(), q);
        }
        assert!("omega3".parse::<AxisQuantity>().is_err());
    }

    #[test]
    fn each_quantity_maps_to_one_field() {
        let sys = SystemParams::resonant(0.05, 0.05);
        let drive = DriveParams::new(0.09, 0.18).unwrap();
        for q in AxisQuantity::ALL {
            let v = match q {
                AxisQuantity::Cavity1 | AxisQuantity::Cavity2 => 0.77,
                _ => 0.0123,
            };
            let (s, d) = resolve_point(&sys, Some(&drive), &[(q, v)]).unwrap();
            let d = d.unwrap();
            let changed: Vec<Field> = [
                (Field::G1, s.g1 != sys.g1),
                (Field::G2, s.g2 != sys.g2),
                (Field::Amplitude, d.amplitude != drive.amplitude),
                (Field::Frequency, d.frequency != drive.frequency),
                (Field::Cavity1, s.cavity1 != sys.cavity1),
                (Field::Cavity2, s.cavity2 != sys.cavity2),
            ]
            .into_iter()
            .filter(|(_, c)| *c)
            .map(|(f, _)| f)
            .collect();
            assert_eq!(changed, vec![q.field()], "{q}");
        }
    }

    #[test]
    fn theta_axis_is_order_independent() {
        let sys = SystemParams::resonant(0.05, 0.05);
        let drive = DriveParams::new(0.09, 0.18).unwrap();
        let a = resolve_point(&sys, Some(&drive), &[(AxisQuantity::Theta, 1.5), (AxisQuantity::Frequency, 0.3)]).unwrap();
        let b = resolve_point(&sys, Some(&drive), &[(AxisQuantity::Frequency, 0.3), (AxisQuantity::Theta, 1.5)]).unwrap();
        assert_eq!(a, b);
        assert!((a.1.unwrap().theta() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn detuning_ratio_axis() {
        let sys = SystemParams::resonant(0.05, 0.05);
        let (s, _) = resolve_point(&sys, None, &[(AxisQuantity::Delta2OverCavity2, 0.015)]).unwrap();
        let (_, d2) = crate::effective::detunings(&s);
        assert!((d2 / s.cavity2 - 0.015).abs() < 1e-14);
    }

    #[test]
    fn drive_axis_without_drive() {
        let sys = SystemParams::resonant(0.05, 0.05);
        assert!(resolve_point(&sys, None, &[(AxisQuantity::Theta, 1.0)]).is_err());
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::linspace(AxisQuantity::G1, 0.0, 1.0, 0).validate().is_err());
        assert!(Axis::linspace(AxisQuantity::G1, 1.0, 0.0, 3).validate().is_err());
        assert!(Axis::linspace(AxisQuantity::G1, 0.0, 1.0, 1).validate().is_ok());
    }
}
