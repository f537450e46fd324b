use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

use super::space::{BasisState, CavityMode, HilbertSpace, Level};

/// Largest probability a coherent factor may lose to the Fock cutoff.
pub const COHERENT_LEAKAGE_LIMIT: f64 = 1e-12;

/// Atomic part of an initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomicState {
    One,
    Two,
    Three,
    /// `(|1> - |2>)/sqrt 2`
    OneMinusTwo,
    /// `(|1> + |3>)/sqrt 2`
    OnePlusThree,
    /// `(|2> + |3>)/sqrt 2`
    TwoPlusThree,
}

impl AtomicState {
    pub const ALL: [AtomicState; 6] = [
        AtomicState::One,
        AtomicState::Two,
        AtomicState::Three,
        AtomicState::OneMinusTwo,
        AtomicState::OnePlusThree,
        AtomicState::TwoPlusThree,
    ];

    pub const SUPERPOSITIONS: [AtomicState; 3] =
        [AtomicState::OneMinusTwo, AtomicState::OnePlusThree, AtomicState::TwoPlusThree];

    pub fn as_str(self) -> &'static str {
        match self {
            AtomicState::One => "1",
            AtomicState::Two => "2",
            AtomicState::Three => "3",
            AtomicState::OneMinusTwo => "1-2",
            AtomicState::OnePlusThree => "1+3",
            AtomicState::TwoPlusThree => "2+3",
        }
    }

    /// Amplitudes on `(|1>, |2>, |3>)`.
    pub fn amplitudes(self) -> [f64; 3] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            AtomicState::One => [1.0, 0.0, 0.0],
            AtomicState::Two => [0.0, 1.0, 0.0],
            AtomicState::Three => [0.0, 0.0, 1.0],
            AtomicState::OneMinusTwo => [h, -h, 0.0],
            AtomicState::OnePlusThree => [h, 0.0, h],
            AtomicState::TwoPlusThree => [0.0, h, h],
        }
    }
}

impl fmt::Display for AtomicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AtomicState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AtomicState::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown atomic state {s:?}; expected one of 1, 2, 3, 1-2, 1+3, 2+3")))
    }
}

/// Fock amplitudes of a coherent state, `p_n = e^{-|a|^2} |a|^{2n} / n!`.
fn coherent_weights(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=cutoff {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Probability of a coherent state above Fock level `cutoff`.
pub fn coherent_tail(alpha: C64, cutoff: usize) -> f64 {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return 0.0;
    }
    let mut term = (-x).exp();
    for n in 1..=cutoff + 1 {
        term *= x / n as f64;
    }
    // Sum the tail directly; subtracting from 1 would lose it in rounding.
    let mut sum = 0.0;
    let mut n = cutoff + 1;
    while term > sum * 1e-17 && term > 0.0 {
        sum += term;
        n += 1;
        term *= x / n as f64;
    }
    sum
}

/// Smallest cutoff whose coherent tail is below `limit`.
pub fn required_cutoff(alpha: C64, limit: f64) -> usize {
    let mut c = 1;
    while coherent_tail(alpha, c) >= limit {
        c += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vec<C64>,
    pub space: HilbertSpace,
}

impl StateVector {
    pub fn new(space: HilbertSpace, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(invalid(format!(
                "state has {} amplitudes but the space has dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        Ok(Self { amplitudes, space })
    }

    pub fn basis(space: HilbertSpace, s: BasisState) -> Result<Self> {
        let idx = space.index(s).ok_or_else(|| invalid(format!("{s:?} lies outside the truncated space")))?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); space.dim()];
        amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, space })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(invalid("states live in different truncated spaces"));
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn atomic_populations(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (i, a) in self.amplitudes.iter().enumerate() {
            p[self.space.state(i).level.index()] += a.norm_sqr();
        }
        p
    }

    pub fn mean_photons(&self, mode: CavityMode) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = self.space.state(i);
                let n = match mode {
                    CavityMode::One => s.n1,
                    CavityMode::Two => s.n2,
                };
                n as f64 * a.norm_sqr()
            })
            .sum()
    }

    pub fn top_level_population(&self) -> f64 {
        self.space.top_level_population(&self.amplitudes)
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `atom (x) |alpha1> (x) |alpha2>`, truncated and renormalized.
pub fn coherent_state(space: HilbertSpace, alpha1: C64, alpha2: C64, atom: AtomicState) -> Result<StateVector> {
    if !(alpha1.re.is_finite() && alpha1.im.is_finite() && alpha2.re.is_finite() && alpha2.im.is_finite()) {
        return Err(invalid("coherent amplitudes must be finite"));
    }
    let (c1, c2) = space.cutoffs();
    for (mode, alpha, cutoff) in [(1, alpha1, c1), (2, alpha2, c2)] {
        let tail = coherent_tail(alpha, cutoff);
        if tail >= COHERENT_LEAKAGE_LIMIT {
            return Err(Error::Truncation {
                message: format!(
                    "coherent state with |alpha| = {} in mode {mode} loses {tail:.3e} beyond cutoff {cutoff}",
                    alpha.norm()
                ),
                required_cutoff: required_cutoff(alpha, COHERENT_LEAKAGE_LIMIT),
            });
        }
    }
    let w1 = coherent_weights(alpha1, c1);
    let w2 = coherent_weights(alpha2, c2);
    let atom = atom.amplitudes();
    let mut amplitudes = vec![C64::new(0.0, 0.0); space.dim()];
    for level in Level::ALL {
        let a = atom[level.index()];
        if a == 0.0 {
            continue;
        }
        for (n1, x1) in w1.iter().enumerate() {
            for (n2, x2) in w2.iter().enumerate() {
                let idx = space.index(BasisState { level, n1, n2 }).expect("within cutoffs");
                amplitudes[idx] = x1 * x2 * a;
            }
        }
    }
    let mut psi = StateVector { amplitudes, space };
    psi.normalize();
    Ok(psi)
}
