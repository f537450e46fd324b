use crate::error::{Error, Result};

use super::evolve::{evolve_terms, uniform_times, Trajectory};
use super::hamiltonian::{assemble_terms, HamiltonianSpec};
use super::space::HilbertSpace;
use super::state::{inner, StateVector};

pub const DEFAULT_ECHO_T_MAX: f64 = 200.0;
pub const DEFAULT_ECHO_SAMPLES: usize = 2000;
pub const DEFAULT_ECHO_CUTOFF: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoOptions {
    pub t_max: f64,
    pub samples: usize,
    /// Step cap; `None` uses the tighter of the two branches' step bounds.
    pub dt_max: Option<f64>,
}

impl Default for EchoOptions {
    fn default() -> Self {
        Self { t_max: DEFAULT_ECHO_T_MAX, samples: DEFAULT_ECHO_SAMPLES, dt_max: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoResult {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub norm_a: Vec<f64>,
    pub norm_b: Vec<f64>,
    /// Top-Fock-level population per sample, larger of the two branches.
    pub leakage: Vec<f64>,
    pub norm_drift: f64,
    pub max_leakage: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl EchoResult {
    pub fn min_fidelity(&self) -> f64 {
        self.fidelity.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn norm(v: &[num_complex::Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `F(t) = |<psi_a(t)|psi_b(t)>|^2` for two Hamiltonians in the same frame,
/// both branches propagated from `psi0` with a common step.
pub fn loschmidt_echo(
    spec_a: &HamiltonianSpec,
    spec_b: &HamiltonianSpec,
    space: &HilbertSpace,
    psi0: &StateVector,
    options: &EchoOptions,
) -> Result<EchoResult> {
    let (fa, fb) = (spec_a.variant.frame(), spec_b.variant.frame());
    if fa != fb {
        return Err(Error::FrameMismatch(fa.as_str(), fb.as_str()));
    }
    if psi0.space != *space {
        return Err(crate::error::invalid("initial state belongs to a different truncated space"));
    }
    if !(options.t_max >= 0.0) || !options.t_max.is_finite() {
        return Err(crate::error::invalid(format!("t_max must be finite and non-negative, got {}", options.t_max)));
    }
    if options.samples == 0 {
        return Err(crate::error::invalid("echo needs at least one sample"));
    }
    let list_a = assemble_terms(spec_a, space)?;
    let list_b = assemble_terms(spec_b, space)?;
    let bound = list_a.step_bound().min(list_b.step_bound());
    let dt = match options.dt_max {
        Some(dt) => Some(dt),
        None if bound.is_finite() => Some(bound),
        None => None,
    };
    let times = uniform_times(options.t_max, options.samples);
    let (a, b) = rayon::join(
        || evolve_terms(&list_a, psi0, &times, dt),
        || evolve_terms(&list_b, psi0, &times, dt),
    );
    Ok(combine(a?, b?))
}

fn combine(a: Trajectory, b: Trajectory) -> EchoResult {
    let fidelity = a.states.iter().zip(&b.states).map(|(x, y)| inner(x, y).norm_sqr()).collect();
    let mut warnings = a.warnings;
    for w in b.warnings {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    EchoResult {
        fidelity,
        norm_a: a.states.iter().map(|s| norm(s)).collect(),
        norm_b: b.states.iter().map(|s| norm(s)).collect(),
        leakage: a.leakage.iter().zip(&b.leakage).map(|(x, y)| x.max(*y)).collect(),
        norm_drift: a.norm_drift.max(b.norm_drift),
        max_leakage: a.max_leakage.max(b.max_leakage),
        steps: a.steps.max(b.steps),
        times: a.times,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::hamiltonian::Variant;
    use crate::dynamics::state::{coherent_state, AtomicState};
    use crate::effective::{DriveParams, SystemParams};
    use num_complex::Complex64 as C64;

    fn setup() -> (HilbertSpace, StateVector, SystemParams, DriveParams) {
        let space = HilbertSpace::new(3, 3).unwrap();
        let psi = coherent_state(space, C64::new(0.01, 0.0), C64::new(0.01, 0.0), AtomicState::Two).unwrap();
        (space, psi, SystemParams::resonant(0.05, 0.05), DriveParams::from_theta(0.5, 0.49).unwrap())
    }

    #[test]
    fn identical_branches_give_unit_fidelity() {
        let (space, psi, sys, drive) = setup();
        let spec = HamiltonianSpec::driven(Variant::Effective, sys, drive);
        let opts = EchoOptions { t_max: 20.0, samples: 50, dt_max: None };
        let r = loschmidt_echo(&spec, &spec, &space, &psi, &opts).unwrap();
        assert!(r.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-10));
        assert!((r.fidelity[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frames_must_agree() {
        let (space, psi, sys, drive) = setup();
        let a = HamiltonianSpec::driven(Variant::Rotating, sys, drive);
        let b = HamiltonianSpec::driven(Variant::ThreeLevelJcTilde, sys, drive);
        let opts = EchoOptions { t_max: 1.0, samples: 3, dt_max: None };
        assert!(matches!(
            loschmidt_echo(&a, &b, &space, &psi, &opts),
            Err(Error::FrameMismatch(_, _))
        ));
    }
}
