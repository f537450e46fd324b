use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};

use super::operator::SparseOperator;

/// Atomic level of the Lambda system; `Three` is the shared upper level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    One,
    Two,
    Three,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Two, Level::Three];

    pub fn index(self) -> usize {
        match self {
            Level::One => 0,
            Level::Two => 1,
            Level::Three => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CavityMode {
    One,
    Two,
}

/// Basis label `|k; n1, n2>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub level: Level,
    pub n1: usize,
    pub n2: usize,
}

/// Atom (x) mode 1 Fock (x) mode 2 Fock, truncated at `n_c1`, `n_c2`.
/// Flat indices run atom outermost, mode-2 photon number innermost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_c1: usize,
    n_c2: usize,
}

impl HilbertSpace {
    pub fn new(n_c1: usize, n_c2: usize) -> Result<Self> {
        if n_c1 < 1 || n_c2 < 1 {
            return Err(invalid(format!("Fock cutoffs must be at least 1, got ({n_c1}, {n_c2})")));
        }
        Ok(Self { n_c1, n_c2 })
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.n_c1, self.n_c2)
    }

    pub fn dim(&self) -> usize {
        3 * (self.n_c1 + 1) * (self.n_c2 + 1)
    }

    pub fn index(&self, s: BasisState) -> Option<usize> {
        if s.n1 > self.n_c1 || s.n2 > self.n_c2 {
            return None;
        }
        Some((s.level.index() * (self.n_c1 + 1) + s.n1) * (self.n_c2 + 1) + s.n2)
    }

    pub fn state(&self, index: usize) -> BasisState {
        let n2 = index % (self.n_c2 + 1);
        let rest = index / (self.n_c2 + 1);
        let n1 = rest % (self.n_c1 + 1);
        let level = Level::ALL[rest / (self.n_c1 + 1)];
        BasisState { level, n1, n2 }
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        (0..self.dim()).map(|i| self.state(i))
    }

    fn build<F>(&self, action: F) -> SparseOperator
    where
        F: Fn(BasisState) -> Option<(BasisState, f64)>,
    {
        let mut triplets = Vec::new();
        for (col, s) in self.states().enumerate() {
            if let Some((t, amp)) = action(s) {
                if let Some(row) = self.index(t) {
                    triplets.push((row, col, amp));
                }
            }
        }
        SparseOperator::from_triplets(self.dim(), triplets)
    }

    /// `sigma_{to,from} = |to><from|` on the atom.
    pub fn transition(&self, to: Level, from: Level) -> SparseOperator {
        self.build(|s| (s.level == from).then_some((BasisState { level: to, ..s }, 1.0)))
    }

    pub fn lower(&self, mode: CavityMode) -> SparseOperator {
        self.build(|s| match mode {
            CavityMode::One if s.n1 > 0 => Some((BasisState { n1: s.n1 - 1, ..s }, (s.n1 as f64).sqrt())),
            CavityMode::Two if s.n2 > 0 => Some((BasisState { n2: s.n2 - 1, ..s }, (s.n2 as f64).sqrt())),
            _ => None,
        })
    }

    /// Creation operator; the top Fock state is mapped out of the space.
    pub fn raise(&self, mode: CavityMode) -> SparseOperator {
        self.build(|s| match mode {
            CavityMode::One => Some((BasisState { n1: s.n1 + 1, ..s }, ((s.n1 + 1) as f64).sqrt())),
            CavityMode::Two => Some((BasisState { n2: s.n2 + 1, ..s }, ((s.n2 + 1) as f64).sqrt())),
        })
    }

    pub fn number(&self, mode: CavityMode) -> SparseOperator {
        self.build(|s| {
            let n = match mode {
                CavityMode::One => s.n1,
                CavityMode::Two => s.n2,
            };
            (n > 0).then_some((s, n as f64))
        })
    }

    pub fn diagonal<F: Fn(BasisState) -> f64>(&self, f: F) -> SparseOperator {
        self.build(|s| {
            let v = f(s);
            (v != 0.0).then_some((s, v))
        })
    }

    /// Excitation charges `(a1^+ a1 - sigma_11, a2^+ a2 - sigma_22)`.
    pub fn charges(&self, s: BasisState) -> (i64, i64) {
        (
            s.n1 as i64 - i64::from(s.level == Level::One),
            s.n2 as i64 - i64::from(s.level == Level::Two),
        )
    }

    /// Indices of basis states carrying the given charges.
    pub fn sector(&self, q1: i64, q2: i64) -> Vec<usize> {
        self.states()
            .enumerate()
            .filter(|(_, s)| self.charges(*s) == (q1, q2))
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest population in the top Fock level of either mode.
    pub fn top_level_population(&self, amplitudes: &[C64]) -> f64 {
        let (mut p1, mut p2) = (0.0, 0.0);
        for (i, a) in amplitudes.iter().enumerate() {
            let s = self.state(i);
            if s.n1 == self.n_c1 {
                p1 += a.norm_sqr();
            }
            if s.n2 == self.n_c2 {
                p2 += a.norm_sqr();
            }
        }
        f64::max(p1, p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_and_round_trip() {
        let space = HilbertSpace::new(2, 2).unwrap();
        assert_eq!(space.dim(), 27);
        for i in 0..space.dim() {
            assert_eq!(space.index(space.state(i)), Some(i));
        }
        assert_eq!(space.state(0), BasisState { level: Level::One, n1: 0, n2: 0 });
        assert_eq!(space.state(1), BasisState { level: Level::One, n1: 0, n2: 1 });
    }

    #[test]
    fn zero_cutoff_is_rejected() {
        assert!(HilbertSpace::new(0, 3).is_err());
        assert!(HilbertSpace::new(3, 0).is_err());
    }

    #[test]
    fn lowering_matrix_element() {
        let space = HilbertSpace::new(2, 2).unwrap();
        let a1 = space.lower(CavityMode::One);
        let from = space.index(BasisState { level: Level::Two, n1: 1, n2: 0 }).unwrap();
        let to = space.index(BasisState { level: Level::Two, n1: 0, n2: 0 }).unwrap();
        assert_eq!(a1.entry(to, from), 1.0);
        let from = space.index(BasisState { level: Level::Two, n1: 2, n2: 1 }).unwrap();
        let to = space.index(BasisState { level: Level::Two, n1: 1, n2: 1 }).unwrap();
        assert!((a1.entry(to, from) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn generic_sector_has_three_states() {
        let space = HilbertSpace::new(4, 4).unwrap();
        assert_eq!(space.sector(1, 1).len(), 3);
        // |2; n, 0> is alone in its sector
        assert_eq!(space.sector(2, -1).len(), 1);
    }
}
