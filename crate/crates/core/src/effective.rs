//! Drive-renormalised parameters of the effective three-level JC model.

use crate::error::{invalid, Error, Result};
use crate::specfun::bessel_j_unchecked;

/// Static model: atomic level frequencies, cavity mode frequencies and
/// the two atom-cavity couplings (units with hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub cavity1: f64,
    pub cavity2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl SystemParams {
    pub fn new(omega1: f64, omega2: f64, cavity1: f64, cavity2: f64, g1: f64, g2: f64) -> Result<Self> {
        let p = Self { omega1, omega2, cavity1, cavity2, g1, g2 };
        p.validate()?;
        Ok(p)
    }

    /// Resonant reference point: `omega1 = 0.5`, `omega2 = 0.25`,
    /// `Omega1 = 1.25`, `Omega2 = 1`, so both detunings vanish.
    pub fn resonant(g1: f64, g2: f64) -> Self {
        Self { omega1: 0.5, omega2: 0.25, cavity1: 1.25, cavity2: 1.0, g1, g2 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega1, self.omega2, self.cavity1, self.cavity2, self.g1, self.g2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("system parameters must be finite"));
        }
        if !(self.cavity1 > 0.0) {
            return Err(Error::Constraint { field: "Omega1", constraint: "Omega1 > 0" });
        }
        if !(self.cavity2 > 0.0) {
            return Err(Error::Constraint { field: "Omega2", constraint: "Omega2 > 0" });
        }
        if !(self.g1 >= 0.0) {
            return Err(Error::Constraint { field: "g1", constraint: "g1 >= 0" });
        }
        if !(self.g2 >= 0.0) {
            return Err(Error::Constraint { field: "g2", constraint: "g2 >= 0" });
        }
        Ok(())
    }

    /// `2*omega1 + omega2 + Omega1`: the mode-1 counter-rotating phase rate
    /// before any sideband shift.
    pub fn counter_rate1(&self) -> f64 {
        2.0 * self.omega1 + self.omega2 + self.cavity1
    }

    pub fn counter_rate2(&self) -> f64 {
        2.0 * self.omega2 + self.omega1 + self.cavity2
    }
}

/// Sinusoidal modulation `A_D cos(omega_D t)` of the 3-2 transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub amplitude: f64,
    pub frequency: f64,
}

impl DriveParams {
    pub fn new(amplitude: f64, frequency: f64) -> Result<Self> {
        let d = Self { amplitude, frequency };
        d.validate()?;
        Ok(d)
    }

    pub fn from_theta(theta: f64, frequency: f64) -> Result<Self> {
        Self::new(theta * frequency, frequency)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.frequency.is_finite() {
            return Err(invalid("drive parameters must be finite"));
        }
        if !(self.amplitude >= 0.0) {
            return Err(Error::Constraint { field: "A_D", constraint: "A_D >= 0" });
        }
        if !(self.frequency > 0.0) {
            return Err(Error::Constraint { field: "omega_D", constraint: "omega_D > 0" });
        }
        Ok(())
    }

    /// Modulation index `A_D / omega_D`.
    pub fn theta(&self) -> f64 {
        self.amplitude / self.frequency
    }
}

/// Resolved sideband orders and the signed residual phase rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandInfo {
    pub n0: i64,
    pub m0: i64,
    pub delta_n0: f64,
    pub delta_m0: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// How the residual counter-rotating rates enter the effective frequencies.
///
/// `Magnitude` uses `|Delta_n0|`, `|Delta_m0|`, which gives continuous
/// V-shaped valleys of the effective cavity frequency versus `omega_D`.
/// `Signed` uses the signed rates, which is what makes every phase of the
/// second frame vanish but leaves a sawtooth with jumps at the valley edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetuningConvention {
    #[default]
    Magnitude,
    Signed,
}

impl DetuningConvention {
    fn apply(self, delta: f64) -> f64 {
        match self {
            DetuningConvention::Magnitude => delta.abs(),
            DetuningConvention::Signed => delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub cavity1: f64,
    pub cavity2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub gr1: f64,
    pub gr2: f64,
    pub gc1: f64,
    pub gc2: f64,
    /// Residual rates actually used for the frequencies above.
    pub delta_n0: f64,
    pub delta_m0: f64,
}

impl EffectiveParams {
    pub fn has_non_positive_cavity(&self) -> bool {
        self.cavity1 <= 0.0 || self.cavity2 <= 0.0
    }
}

/// Cavity detunings `(delta1, delta2)`.
pub fn detunings(sys: &SystemParams) -> (f64, f64) {
    (
        2.0 * sys.omega1 + sys.omega2 - sys.cavity1,
        2.0 * sys.omega2 + sys.omega1 - sys.cavity2,
    )
}

const ORDER_LIMIT: i64 = 1_000_000;

/// Integer `n` minimising `|rate + n * step|`; ties go to the more negative `n`.
fn nearest_order(rate: f64, step: f64) -> i64 {
    let x = -rate / step;
    let lo = (x.floor() as i64).clamp(-ORDER_LIMIT, ORDER_LIMIT);
    let hi = (lo + 1).min(ORDER_LIMIT);
    let r_lo = (rate + lo as f64 * step).abs();
    let r_hi = (rate + hi as f64 * step).abs();
    if r_hi < r_lo {
        hi
    } else {
        lo
    }
}

pub fn find_sidebands(sys: &SystemParams, drive: &DriveParams) -> Result<SidebandInfo> {
    if !(drive.frequency > 0.0) || !drive.frequency.is_finite() {
        return Err(invalid(format!("drive frequency must be positive, got {}", drive.frequency)));
    }
    let wd = drive.frequency;
    let (delta1, delta2) = detunings(sys);
    let c1 = sys.counter_rate1();
    let c2 = sys.counter_rate2();
    let n0 = nearest_order(c1, wd);
    let m0 = nearest_order(c2, wd);
    Ok(SidebandInfo {
        n0,
        m0,
        delta_n0: c1 + n0 as f64 * wd,
        delta_m0: c2 + m0 as f64 * wd,
        delta1,
        delta2,
    })
}

pub fn effective_parameters(
    sys: &SystemParams,
    drive: &DriveParams,
    sb: &SidebandInfo,
    convention: DetuningConvention,
) -> EffectiveParams {
    let dn = convention.apply(sb.delta_n0);
    let dm = convention.apply(sb.delta_m0);
    let (d1, d2) = (sb.delta1, sb.delta2);
    let theta = drive.theta();
    EffectiveParams {
        cavity1: (dn - d1) / 2.0,
        cavity2: (dm - d2) / 2.0,
        omega1: ((2.0 * d1 - d2) + (2.0 * dn - dm)) / 6.0,
        omega2: ((2.0 * d2 - d1) + (2.0 * dm - dn)) / 6.0,
        gr1: sys.g1 * bessel_j_unchecked(0, theta),
        gr2: sys.g2 * bessel_j_unchecked(0, 2.0 * theta),
        gc1: sys.g1 * bessel_j_unchecked(clamp_order(sb.n0), theta),
        gc2: sys.g2 * bessel_j_unchecked(clamp_order(sb.m0), 2.0 * theta),
        delta_n0: dn,
        delta_m0: dm,
    }
}

fn clamp_order(n: i64) -> i32 {
    n.clamp(i32::MIN as i64 + 1, i32::MAX as i64) as i32
}

/// Which cavity mode an effective-frequency zero refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

/// Drive frequencies where the effective cavity frequency of each mode
/// vanishes, `omega_D = -2 Omega_i / order`, positive roots only.
pub fn omega_zero_frequencies(
    sys: &SystemParams,
    orders: std::ops::RangeInclusive<i64>,
) -> Result<Vec<(Mode, i64, f64)>> {
    if orders.contains(&0) {
        return Err(invalid("order range must exclude 0"));
    }
    let mut out = Vec::new();
    for (mode, cavity) in [(Mode::One, sys.cavity1), (Mode::Two, sys.cavity2)] {
        for order in orders.clone() {
            let wd = -2.0 * cavity / order as f64;
            if wd > 0.0 {
                out.push((mode, order, wd));
            }
        }
    }
    Ok(out)
}

pub const DEFAULT_HIERARCHY_THRESHOLD: f64 = 0.4;
pub const RWA_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityRatios {
    pub delta1: f64,
    pub delta2: f64,
    pub delta_n0: f64,
    pub delta_m0: f64,
    pub g1: f64,
    pub g2: f64,
    pub gc1: f64,
    pub gc2: f64,
}

impl ValidityRatios {
    pub const NAMES: [&'static str; 8] = [
        "|delta1|/omega_D",
        "|delta2|/omega_D",
        "|Delta_n0|/omega_D",
        "|Delta_m0|/omega_D",
        "g1/omega_D",
        "g2/omega_D",
        "|gc1/Delta_n0|",
        "|gc2/Delta_m0|",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.delta1, self.delta2, self.delta_n0, self.delta_m0,
            self.g1, self.g2, self.gc1, self.gc2,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> {
        Self::NAMES.into_iter().zip(self.values())
    }

    /// The ratios the fast-oscillation hierarchy compares against `omega_D`.
    pub fn hierarchy(&self) -> [f64; 6] {
        [self.delta1, self.delta2, self.delta_n0, self.delta_m0, self.g1, self.g2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub ratios: ValidityRatios,
    pub hierarchy_ok: bool,
    pub rwa_ok: bool,
}

fn counter_ratio(gc: f64, delta: f64) -> f64 {
    if gc == 0.0 {
        0.0
    } else if delta == 0.0 {
        f64::INFINITY
    } else {
        (gc / delta).abs()
    }
}

pub fn validity_report(
    sys: &SystemParams,
    drive: &DriveParams,
    sb: &SidebandInfo,
    eff: &EffectiveParams,
) -> ValidityReport {
    validity_report_with(sys, drive, sb, eff, DEFAULT_HIERARCHY_THRESHOLD)
}

pub fn validity_report_with(
    sys: &SystemParams,
    drive: &DriveParams,
    sb: &SidebandInfo,
    eff: &EffectiveParams,
    hierarchy_threshold: f64,
) -> ValidityReport {
    let wd = drive.frequency;
    let mut ratios = ValidityRatios {
        delta1: sb.delta1.abs() / wd,
        delta2: sb.delta2.abs() / wd,
        delta_n0: sb.delta_n0.abs() / wd,
        delta_m0: sb.delta_m0.abs() / wd,
        g1: sys.g1 / wd,
        g2: sys.g2 / wd,
        gc1: counter_ratio(eff.gc1, sb.delta_n0),
        gc2: counter_ratio(eff.gc2, sb.delta_m0),
    };
    // A vanishing residual rate is a resonant counter-rotating term.
    if sb.delta_n0 == 0.0 {
        ratios.gc1 = f64::INFINITY;
    }
    if sb.delta_m0 == 0.0 {
        ratios.gc2 = f64::INFINITY;
    }
    ValidityReport {
        ratios,
        hierarchy_ok: ratios.hierarchy().iter().all(|r| *r < hierarchy_threshold),
        rwa_ok: ratios.gc1 < RWA_THRESHOLD && ratios.gc2 < RWA_THRESHOLD,
    }
}

/// Everything derived from one drive setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveAnalysis {
    pub sidebands: SidebandInfo,
    pub effective: EffectiveParams,
    pub validity: ValidityReport,
}

pub fn analyze_drive(
    sys: &SystemParams,
    drive: &DriveParams,
    convention: DetuningConvention,
) -> Result<DriveAnalysis> {
    let sidebands = find_sidebands(sys, drive)?;
    let effective = effective_parameters(sys, drive, &sidebands, convention);
    let validity = validity_report(sys, drive, &sidebands, &effective);
    Ok(DriveAnalysis { sidebands, effective, validity })
}

/// Smallest modulation index at which `|gc/Delta|` of the given mode
/// reaches the 0.01 level, searched on `(0, theta_max]`.
pub fn rwa_crossing_theta(
    sys: &SystemParams,
    frequency: f64,
    mode: Mode,
    theta_max: f64,
) -> Result<Option<f64>> {
    let ratio = |theta: f64| -> Result<f64> {
        let drive = DriveParams::from_theta(theta, frequency)?;
        let sb = find_sidebands(sys, &drive)?;
        let eff = effective_parameters(sys, &drive, &sb, DetuningConvention::Magnitude);
        let r = validity_report(sys, &drive, &sb, &eff).ratios;
        Ok(match mode {
            Mode::One => r.gc1,
            Mode::Two => r.gc2,
        })
    };
    let steps = 2000;
    let mut prev = 0.0;
    for i in 1..=steps {
        let theta = theta_max * i as f64 / steps as f64;
        if ratio(theta)? >= RWA_THRESHOLD {
            let (mut lo, mut hi) = (prev, theta);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if ratio(mid)? >= RWA_THRESHOLD {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = theta;
    }
    Ok(None)
}
