//! Hamiltonian variants as lists of constant operators with harmonic
//! scalar coefficients, `H(t) = sum_k A_k exp(i phi_k t) O_k`.

use num_complex::Complex64 as C64;

use crate::effective::{analyze_drive, detunings, DetuningConvention, DriveParams, SystemParams};
use crate::error::{invalid, Result};
use crate::specfun::{bessel_j_table, sideband_cutoff, DEFAULT_SIDEBAND_EPS};

use super::operator::SparseOperator;
use super::space::{CavityMode, HilbertSpace, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Undriven three-level JC Hamiltonian.
    StaticJc,
    /// Interaction picture of the modulated model with every sideband kept.
    Rotating,
    /// Rotating-frame model keeping only the resonant and `(n0, m0)` sidebands.
    Effective,
    /// Time-independent model in the second frame, counter-rotating couplings kept.
    EffectiveTilde1,
    /// Time-independent effective three-level JC model.
    ThreeLevelJcTilde,
}

/// Frame a variant lives in. Overlaps are only meaningful within one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Lab,
    Drive,
    Effective,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Drive => "drive-rotating",
            Frame::Effective => "effective-rotating",
        }
    }
}

impl Variant {
    pub fn frame(self) -> Frame {
        match self {
            Variant::StaticJc => Frame::Lab,
            Variant::Rotating | Variant::Effective => Frame::Drive,
            Variant::EffectiveTilde1 | Variant::ThreeLevelJcTilde => Frame::Effective,
        }
    }

    pub fn needs_drive(self) -> bool {
        self != Variant::StaticJc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub variant: Variant,
    pub sys: SystemParams,
    pub drive: Option<DriveParams>,
    pub sideband_eps: f64,
    pub convention: DetuningConvention,
}

impl HamiltonianSpec {
    pub fn new(variant: Variant, sys: SystemParams, drive: Option<DriveParams>) -> Self {
        Self { variant, sys, drive, sideband_eps: DEFAULT_SIDEBAND_EPS, convention: DetuningConvention::default() }
    }

    pub fn static_jc(sys: SystemParams) -> Self {
        Self::new(Variant::StaticJc, sys, None)
    }

    pub fn driven(variant: Variant, sys: SystemParams, drive: DriveParams) -> Self {
        Self::new(variant, sys, Some(drive))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub operator: usize,
    pub amplitude: C64,
    pub frequency: f64,
    /// Index of the Hermitian-conjugate term; `None` for self-adjoint terms.
    pub partner: Option<usize>,
}

impl Term {
    #[inline]
    pub fn coefficient(&self, t: f64) -> C64 {
        if self.frequency == 0.0 {
            self.amplitude
        } else {
            self.amplitude * C64::from_polar(1.0, self.frequency * t)
        }
    }
}

#[derive(Debug, Clone)]
pub struct TermList {
    dim: usize,
    operators: Vec<SparseOperator>,
    norms: Vec<f64>,
    terms: Vec<Term>,
    /// Retained sideband orders `(P1, P2)` for the all-sideband variant.
    pub retained_orders: Option<(usize, usize)>,
}

impl TermList {
    pub fn new(dim: usize) -> Self {
        Self { dim, operators: Vec::new(), norms: Vec::new(), terms: Vec::new(), retained_orders: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn operators(&self) -> &[SparseOperator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_operator(&mut self, op: SparseOperator) -> usize {
        self.norms.push(op.norm_bound());
        self.operators.push(op);
        self.operators.len() - 1
    }

    /// Adds `op` together with its adjoint, returning both indices.
    pub fn add_operator_pair(&mut self, op: SparseOperator) -> (usize, usize) {
        let adj = op.adjoint();
        (self.add_operator(op), self.add_operator(adj))
    }

    /// `amplitude e^{i phi t} O + h.c.`, with `ops = (O, O^+)`.
    pub fn push_pair(&mut self, ops: (usize, usize), amplitude: C64, frequency: f64) {
        let k = self.terms.len();
        self.terms.push(Term { operator: ops.0, amplitude, frequency, partner: Some(k + 1) });
        self.terms.push(Term { operator: ops.1, amplitude: amplitude.conj(), frequency: -frequency, partner: Some(k) });
    }

    /// Real multiple of a symmetric operator.
    pub fn push_hermitian(&mut self, op: usize, amplitude: f64) {
        debug_assert!(self.operators[op].is_symmetric());
        self.terms.push(Term { operator: op, amplitude: C64::new(amplitude, 0.0), frequency: 0.0, partner: None });
    }

    pub fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max)
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.iter().all(|t| t.frequency == 0.0)
    }

    /// Largest step allowed for propagation: 20 steps per fastest period.
    pub fn step_bound(&self) -> f64 {
        let f = self.max_frequency();
        if f == 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::TAU / (20.0 * f)
        }
    }

    /// Per-operator coefficients at time `t`.
    pub fn coefficients(&self, t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
        for term in &self.terms {
            out[term.operator] += term.coefficient(t);
        }
    }

    /// `y = sum_j coeffs[j] O_j x`
    pub fn apply_combined(&self, coeffs: &[C64], x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (op, c) in self.operators.iter().zip(coeffs) {
            if *c != C64::new(0.0, 0.0) {
                op.apply_add(*c, x, y);
            }
        }
    }

    pub fn norm_bound(&self, coeffs: &[C64]) -> f64 {
        self.norms.iter().zip(coeffs).map(|(n, c)| n * c.norm()).sum()
    }

    /// `y = H(t) x`
    pub fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.operators.len()];
        self.coefficients(t, &mut coeffs);
        self.apply_combined(&coeffs, x, y);
    }

    /// Dense `H(t)` restricted to `indices` (rows and columns).
    pub fn submatrix(&self, t: f64, indices: &[usize]) -> Vec<Vec<C64>> {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.operators.len()];
        self.coefficients(t, &mut coeffs);
        indices
            .iter()
            .map(|&r| {
                indices
                    .iter()
                    .map(|&c| {
                        self.operators
                            .iter()
                            .zip(&coeffs)
                            .map(|(op, k)| k * op.entry(r, c))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn dense(&self, t: f64) -> Vec<Vec<C64>> {
        let all: Vec<usize> = (0..self.dim).collect();
        self.submatrix(t, &all)
    }
}

struct Ladder {
    /// `sigma_31 a1`, `sigma_31 a1^+`, `sigma_32 a2`, `sigma_32 a2^+` with adjoints.
    rot1: (usize, usize),
    counter1: (usize, usize),
    rot2: (usize, usize),
    counter2: (usize, usize),
}

fn ladder(space: &HilbertSpace, list: &mut TermList, counter: bool) -> Ladder {
    let s31 = space.transition(Level::Three, Level::One);
    let s32 = space.transition(Level::Three, Level::Two);
    let a1 = space.lower(CavityMode::One);
    let a2 = space.lower(CavityMode::Two);
    let rot1 = list.add_operator_pair(s31.mul(&a1));
    let rot2 = list.add_operator_pair(s32.mul(&a2));
    let (counter1, counter2) = if counter {
        (
            list.add_operator_pair(s31.mul(&space.raise(CavityMode::One))),
            list.add_operator_pair(s32.mul(&space.raise(CavityMode::Two))),
        )
    } else {
        ((usize::MAX, usize::MAX), (usize::MAX, usize::MAX))
    };
    Ladder { rot1, counter1, rot2, counter2 }
}

/// `w1 (s33 - s11) + w2 (s33 - s22) + c1 n1 + c2 n2` as one diagonal operator.
fn bare_energy(space: &HilbertSpace, w1: f64, w2: f64, c1: f64, c2: f64) -> SparseOperator {
    space.diagonal(|s| {
        let atom = match s.level {
            Level::One => -w1,
            Level::Two => -w2,
            Level::Three => w1 + w2,
        };
        atom + c1 * s.n1 as f64 + c2 * s.n2 as f64
    })
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Signed Bessel values `J_{-P..=P}(z)`, indexed by `p + P`.
fn signed_table(order: usize, z: f64) -> Result<Vec<f64>> {
    let pos = bessel_j_table(order, z)?;
    let mut out = vec![0.0; 2 * order + 1];
    for p in 0..=order {
        out[order + p] = pos[p];
        out[order - p] = if p % 2 == 1 { -pos[p] } else { pos[p] };
    }
    Ok(out)
}

pub fn assemble_terms(spec: &HamiltonianSpec, space: &HilbertSpace) -> Result<TermList> {
    spec.sys.validate()?;
    if !(spec.sideband_eps > 0.0) {
        return Err(invalid(format!("sideband tolerance must be positive, got {}", spec.sideband_eps)));
    }
    let drive = match (spec.variant.needs_drive(), spec.drive) {
        (true, None) => return Err(invalid(format!("{:?} needs drive parameters", spec.variant))),
        (true, Some(d)) => {
            d.validate()?;
            Some(d)
        }
        (false, _) => None,
    };
    let sys = &spec.sys;
    let mut list = TermList::new(space.dim());
    match spec.variant {
        Variant::StaticJc => {
            let diag = list.add_operator(bare_energy(space, sys.omega1, sys.omega2, sys.cavity1, sys.cavity2));
            list.push_hermitian(diag, 1.0);
            let l = ladder(space, &mut list, false);
            list.push_pair(l.rot1, real(sys.g1), 0.0);
            list.push_pair(l.rot2, real(sys.g2), 0.0);
        }
        Variant::Rotating => {
            let drive = drive.unwrap();
            let theta = drive.theta();
            let wd = drive.frequency;
            let (d1, d2) = detunings(sys);
            let (c1, c2) = (sys.counter_rate1(), sys.counter_rate2());
            let p1 = sideband_cutoff(theta, spec.sideband_eps)?;
            let p2 = sideband_cutoff(2.0 * theta, spec.sideband_eps)?;
            let j1 = signed_table(p1, theta)?;
            let j2 = signed_table(p2, 2.0 * theta)?;
            let l = ladder(space, &mut list, true);
            for p in -(p1 as i64)..=(p1 as i64) {
                let amp = real(sys.g1 * j1[(p + p1 as i64) as usize]);
                list.push_pair(l.rot1, amp, p as f64 * wd + d1);
                list.push_pair(l.counter1, amp, c1 + p as f64 * wd);
            }
            for q in -(p2 as i64)..=(p2 as i64) {
                let amp = real(sys.g2 * j2[(q + p2 as i64) as usize]);
                list.push_pair(l.rot2, amp, q as f64 * wd + d2);
                list.push_pair(l.counter2, amp, c2 + q as f64 * wd);
            }
            list.retained_orders = Some((p1, p2));
        }
        Variant::Effective => {
            let a = analyze_drive(sys, &drive.unwrap(), spec.convention)?;
            let (sb, eff) = (a.sidebands, a.effective);
            let l = ladder(space, &mut list, true);
            list.push_pair(l.rot1, real(eff.gr1), sb.delta1);
            list.push_pair(l.counter1, real(eff.gc1), sb.delta_n0);
            list.push_pair(l.rot2, real(eff.gr2), sb.delta2);
            list.push_pair(l.counter2, real(eff.gc2), sb.delta_m0);
        }
        Variant::EffectiveTilde1 | Variant::ThreeLevelJcTilde => {
            let eff = analyze_drive(sys, &drive.unwrap(), spec.convention)?.effective;
            let diag = list.add_operator(bare_energy(space, eff.omega1, eff.omega2, eff.cavity1, eff.cavity2));
            list.push_hermitian(diag, 1.0);
            let with_counter = spec.variant == Variant::EffectiveTilde1;
            let l = ladder(space, &mut list, with_counter);
            list.push_pair(l.rot1, real(eff.gr1), 0.0);
            list.push_pair(l.rot2, real(eff.gr2), 0.0);
            if with_counter {
                list.push_pair(l.counter1, real(eff.gc1), 0.0);
                list.push_pair(l.counter2, real(eff.gc2), 0.0);
            }
        }
    }
    Ok(list)
}
