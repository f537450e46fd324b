//! Norm-preserving propagation of `i d/dt psi = H(t) psi`.
//!
//! Each step uses the fourth-order commutator-free Magnus scheme with two
//! exponentials built from Gauss-Legendre samples of the coefficients.
//! Exponentials act on vectors through a Taylor series run to convergence.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};

use super::hamiltonian::{assemble_terms, HamiltonianSpec, TermList};
use super::space::HilbertSpace;
use super::state::StateVector;

/// Top-Fock-level population above which a truncation warning is attached.
pub const LEAKAGE_WARNING: f64 = 1e-6;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const NODE1: f64 = 0.5 - SQRT3 / 6.0;
const NODE2: f64 = 0.5 + SQRT3 / 6.0;
const ALPHA1: f64 = (3.0 - 2.0 * SQRT3) / 12.0;
const ALPHA2: f64 = (3.0 + 2.0 * SQRT3) / 12.0;

/// Largest norm of `-i dt H` handed to one Taylor series.
const TAYLOR_CHUNK: f64 = 1.0;
const TAYLOR_TOL: f64 = 1e-17;
const TAYLOR_MAX_TERMS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    /// Largest `|1 - ||psi|||` over all steps.
    pub norm_drift: f64,
    /// Top-Fock-level population at each sample.
    pub leakage: Vec<f64>,
    /// Largest top-level population over all steps.
    pub max_leakage: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

struct Propagator<'a> {
    list: &'a TermList,
    coeffs: Vec<C64>,
    k1: Vec<C64>,
    k2: Vec<C64>,
    term: Vec<C64>,
    next: Vec<C64>,
}

impl<'a> Propagator<'a> {
    fn new(list: &'a TermList) -> Self {
        let n_ops = list.operators().len();
        let dim = list.dim();
        let zero = C64::new(0.0, 0.0);
        Self {
            list,
            coeffs: vec![zero; n_ops],
            k1: vec![zero; n_ops],
            k2: vec![zero; n_ops],
            term: vec![zero; dim],
            next: vec![zero; dim],
        }
    }

    /// `psi <- exp(-i h sum_j coeffs[j] O_j) psi`, coefficients already set.
    fn exp_apply(&mut self, h: f64, psi: &mut [C64]) {
        let nu = h.abs() * self.list.norm_bound(&self.coeffs);
        if nu == 0.0 {
            return;
        }
        let chunks = (nu / TAYLOR_CHUNK).ceil().max(1.0) as usize;
        let scale = C64::new(0.0, -h / chunks as f64);
        self.coeffs.iter_mut().for_each(|c| *c *= scale);
        for _ in 0..chunks {
            self.term.copy_from_slice(psi);
            for k in 1..=TAYLOR_MAX_TERMS {
                self.list.apply_combined(&self.coeffs, &self.term, &mut self.next);
                let inv = 1.0 / k as f64;
                let mut size = 0.0;
                for ((t, n), p) in self.term.iter_mut().zip(&self.next).zip(psi.iter_mut()) {
                    *t = n * inv;
                    *p += *t;
                    size += t.norm_sqr();
                }
                if size.sqrt() < TAYLOR_TOL {
                    break;
                }
            }
        }
    }

    fn step(&mut self, t: f64, h: f64, psi: &mut [C64]) {
        if self.list.is_time_independent() {
            self.list.coefficients(t, &mut self.coeffs);
            self.exp_apply(h, psi);
            return;
        }
        self.list.coefficients(t + NODE1 * h, &mut self.k1);
        self.list.coefficients(t + NODE2 * h, &mut self.k2);
        for ((c, a), b) in self.coeffs.iter_mut().zip(&self.k1).zip(&self.k2) {
            *c = ALPHA2 * a + ALPHA1 * b;
        }
        self.exp_apply(h, psi);
        for ((c, a), b) in self.coeffs.iter_mut().zip(&self.k1).zip(&self.k2) {
            *c = ALPHA1 * a + ALPHA2 * b;
        }
        self.exp_apply(h, psi);
    }
}

fn check_samples(sample_times: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in sample_times {
        if !t.is_finite() || t < prev {
            return Err(invalid("sample times must be finite, non-negative and non-decreasing"));
        }
        prev = t;
    }
    Ok(())
}

/// Propagates `psi0` from `t = 0`, recording the state at each sample time.
///
/// Steps never exceed `dt_max`; `None` uses the list's step bound. A
/// time-independent list takes one exact exponential per sample interval.
pub fn evolve_terms(list: &TermList, psi0: &StateVector, sample_times: &[f64], dt_max: Option<f64>) -> Result<Trajectory> {
    if psi0.amplitudes.len() != list.dim() {
        return Err(invalid(format!(
            "initial state has dimension {} but the Hamiltonian acts on {}",
            psi0.amplitudes.len(),
            list.dim()
        )));
    }
    check_samples(sample_times)?;
    let bound = list.step_bound();
    let dt = match dt_max {
        Some(dt) if !(dt > 0.0) || !dt.is_finite() => {
            return Err(invalid(format!("dt_max must be positive and finite, got {dt}")))
        }
        Some(dt) if dt > bound => {
            return Err(invalid(format!(
                "dt_max = {dt} exceeds the step bound {bound} set by the fastest retained frequency {}",
                list.max_frequency()
            )))
        }
        Some(dt) => dt,
        None => bound,
    };

    let space = psi0.space;
    let mut prop = Propagator::new(list);
    let mut psi = psi0.amplitudes.clone();
    let mut t = 0.0;
    let mut traj = Trajectory {
        times: sample_times.to_vec(),
        states: Vec::with_capacity(sample_times.len()),
        norm_drift: (1.0 - norm(&psi)).abs(),
        leakage: Vec::with_capacity(sample_times.len()),
        max_leakage: space.top_level_population(&psi),
        steps: 0,
        warnings: Vec::new(),
    };
    for &target in sample_times {
        let span = target - t;
        if span > 0.0 {
            let n = if dt.is_finite() { (span / dt).ceil().max(1.0) as usize } else { 1 };
            let h = span / n as f64;
            for k in 0..n {
                prop.step(t + k as f64 * h, h, &mut psi);
                traj.norm_drift = traj.norm_drift.max((1.0 - norm(&psi)).abs());
                traj.max_leakage = traj.max_leakage.max(space.top_level_population(&psi));
            }
            traj.steps += n;
            t = target;
        }
        traj.leakage.push(space.top_level_population(&psi));
        traj.states.push(psi.clone());
    }
    if traj.max_leakage > LEAKAGE_WARNING {
        let (c1, c2) = space.cutoffs();
        traj.warnings.push(format!(
            "truncation: top Fock level population reached {:.3e} with cutoffs ({c1}, {c2})",
            traj.max_leakage
        ));
    }
    Ok(traj)
}

/// Assembles `spec` on `space` and propagates `psi0` up to `t_max`.
pub fn evolve(
    spec: &HamiltonianSpec,
    space: &HilbertSpace,
    psi0: &StateVector,
    t_max: f64,
    dt_max: Option<f64>,
    sample_times: &[f64],
) -> Result<Trajectory> {
    if psi0.space != *space {
        return Err(invalid("initial state belongs to a different truncated space"));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(invalid(format!("t_max must be finite and non-negative, got {t_max}")));
    }
    if sample_times.iter().any(|&s| s > t_max) {
        return Err(invalid("sample times must not exceed t_max"));
    }
    let list = assemble_terms(spec, space)?;
    evolve_terms(&list, psi0, sample_times, dt_max)
}

/// `n` uniformly spaced times covering `[0, t_max]`.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}
