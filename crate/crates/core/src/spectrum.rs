//! Dressed-state blocks of the static three-level JC Hamiltonian and the
//! ground-state phase diagram built from them.
//!
//! Block `(n, m)` couples `|3; n, m-1>`, `|1; n+1, m-1>` and `|2; n, m>`.
//! The `m = 0` blocks are evaluated with the same matrix elements, including
//! the `Omega2 (m - 1)` offset on the first two diagonal entries; the physical
//! one-photon-poorer edge sectors are not part of the search.

use rayon::prelude::*;

use crate::effective::{analyze_drive, DetuningConvention, DriveParams, EffectiveParams, SidebandInfo, SystemParams, ValidityReport};
use crate::eigen3::{eigenvector, lowest_eigenvalue, Sym3};
use crate::error::{invalid, Result};
use crate::sweep::{resolve_point, Axis};

/// Frequencies and couplings fed to the block engine. Unlike
/// [`SystemParams`] nothing is validated: drive-renormalised cavity
/// frequencies may be zero or negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub omega1: f64,
    pub omega2: f64,
    pub cavity1: f64,
    pub cavity2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl From<&SystemParams> for BlockParams {
    fn from(s: &SystemParams) -> Self {
        Self { omega1: s.omega1, omega2: s.omega2, cavity1: s.cavity1, cavity2: s.cavity2, g1: s.g1, g2: s.g2 }
    }
}

impl From<&EffectiveParams> for BlockParams {
    fn from(e: &EffectiveParams) -> Self {
        Self { omega1: e.omega1, omega2: e.omega2, cavity1: e.cavity1, cavity2: e.cavity2, g1: e.gr1, g2: e.gr2 }
    }
}

pub type Label = (u32, u32);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBlock {
    pub n_ph: u32,
    pub m_ph: u32,
    pub matrix: Sym3,
}

pub fn block_matrix(params: &BlockParams, n_ph: i64, m_ph: i64) -> Result<DressedBlock> {
    if n_ph < 0 || m_ph < 0 {
        return Err(invalid(format!("block indices must be non-negative, got ({n_ph}, {m_ph})")));
    }
    let (n, m) = (u32::try_from(n_ph).map_err(|_| invalid("n_ph too large"))?, u32::try_from(m_ph).map_err(|_| invalid("m_ph too large"))?);
    Ok(DressedBlock { n_ph: n, m_ph: m, matrix: block_entries(params, n, m) })
}

#[inline]
fn block_entries(p: &BlockParams, n: u32, m: u32) -> Sym3 {
    let (nf, mf) = (n as f64, m as f64);
    let h11 = p.omega1 + p.omega2 + p.cavity1 * nf + p.cavity2 * (mf - 1.0);
    let h22 = -p.omega1 + p.cavity1 * (nf + 1.0) + p.cavity2 * (mf - 1.0);
    let h33 = -p.omega2 + p.cavity1 * nf + p.cavity2 * mf;
    let h12 = p.g1 * (nf + 1.0).sqrt();
    let h13 = p.g2 * mf.sqrt();
    [[h11, h12, h13], [h12, h22, 0.0], [h13, 0.0, h33]]
}

pub fn block_ground_energy(block: &DressedBlock) -> f64 {
    lowest_eigenvalue(&block.matrix)
}

#[inline]
fn energy_of(p: &BlockParams, label: Label) -> f64 {
    lowest_eigenvalue(&block_entries(p, label.0, label.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Normal,
    Y1,
    Y2,
    Mixed,
}

impl Category {
    pub fn of(label: Label) -> Self {
        match label {
            (0, 0) => Category::Normal,
            (_, 0) => Category::Y1,
            (0, _) => Category::Y2,
            _ => Category::Mixed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Normal => "normal",
            Category::Y1 => "y1",
            Category::Y2 => "y2",
            Category::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub label: Label,
    pub category: Category,
    pub energy: f64,
    /// Distance to the best competing block minimum.
    pub gap: f64,
    /// Mean photon numbers of the block ground eigenvector.
    pub photons: (f64, f64),
}

impl PhasePoint {
    pub fn on_window_edge(&self, window: u32) -> bool {
        self.label.0 == window || self.label.1 == window
    }
}

pub fn ground_search(params: &BlockParams, block_window: u32) -> Result<PhasePoint> {
    if block_window < 1 {
        return Err(invalid("block window must be at least 1"));
    }
    Ok(search(params, block_window))
}

fn search(params: &BlockParams, window: u32) -> PhasePoint {
    let mut best = (f64::INFINITY, (0, 0));
    let mut second = f64::INFINITY;
    for n in 0..=window {
        for m in 0..=window {
            let e = energy_of(params, (n, m));
            if e < best.0 {
                second = best.0;
                best = (e, (n, m));
            } else if e < second {
                second = e;
            }
        }
    }
    let (energy, label) = best;
    let matrix = block_entries(params, label.0, label.1);
    let v = eigenvector(&matrix, energy);
    let (n, m) = (label.0 as f64, label.1 as f64);
    let photons = (
        n + v[1] * v[1],
        m - v[0] * v[0] - v[1] * v[1],
    );
    PhasePoint { label, category: Category::of(label), energy, gap: second - energy, photons }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub point: PhasePoint,
    pub window_capped: bool,
    pub validity: Option<ValidityReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    /// Row-major, `axis1` outermost.
    pub cells: Vec<GridCell>,
    pub block_window: u32,
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.axis2.values.len() + j]
    }

    /// Cells whose argmin sits on the window edge without a capped flag.
    pub fn edge_cells(&self) -> Vec<(usize, usize)> {
        let cols = self.axis2.values.len();
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.window_capped && c.point.on_window_edge(self.block_window))
            .map(|(k, _)| (k / cols, k % cols))
            .collect()
    }
}

fn assignments(axis1: &Axis, axis2: &Axis, k: usize, cols: usize) -> [(crate::sweep::AxisQuantity, f64); 2] {
    [(axis1.quantity, axis1.values[k / cols]), (axis2.quantity, axis2.values[k % cols])]
}

fn check_axes(axis1: &Axis, axis2: &Axis) -> Result<()> {
    axis1.validate()?;
    axis2.validate()
}

pub fn phase_grid(template: &SystemParams, axis1: &Axis, axis2: &Axis, block_window: u32) -> Result<PhaseGrid> {
    check_axes(axis1, axis2)?;
    if block_window < 1 {
        return Err(invalid("block window must be at least 1"));
    }
    let cols = axis2.values.len();
    let total = axis1.values.len() * cols;
    let cells = (0..total)
        .into_par_iter()
        .map(|k| {
            let (sys, _) = resolve_point(template, None, &assignments(axis1, axis2, k, cols))?;
            let point = search(&BlockParams::from(&sys), block_window);
            Ok(GridCell { point, window_capped: false, validity: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseGrid { axis1: axis1.clone(), axis2: axis2.clone(), cells, block_window })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenPoint {
    pub point: PhasePoint,
    pub sidebands: SidebandInfo,
    pub effective: EffectiveParams,
    pub validity: ValidityReport,
    /// Set when an effective cavity frequency is not positive; the argmin
    /// then runs to the window edge.
    pub window_capped: bool,
}

pub fn driven_phase_point(
    sys: &SystemParams,
    drive: &DriveParams,
    block_window: u32,
    convention: DetuningConvention,
) -> Result<DrivenPoint> {
    if block_window < 1 {
        return Err(invalid("block window must be at least 1"));
    }
    let a = analyze_drive(sys, drive, convention)?;
    let point = search(&BlockParams::from(&a.effective), block_window);
    Ok(DrivenPoint {
        point,
        sidebands: a.sidebands,
        effective: a.effective,
        validity: a.validity,
        window_capped: a.effective.has_non_positive_cavity(),
    })
}

pub fn driven_phase_grid(
    sys_template: &SystemParams,
    drive_template: &DriveParams,
    axis1: &Axis,
    axis2: &Axis,
    block_window: u32,
    convention: DetuningConvention,
) -> Result<PhaseGrid> {
    check_axes(axis1, axis2)?;
    let cols = axis2.values.len();
    let total = axis1.values.len() * cols;
    let cells = (0..total)
        .into_par_iter()
        .map(|k| {
            let (sys, drive) = resolve_point(sys_template, Some(drive_template), &assignments(axis1, axis2, k, cols))?;
            let drive = drive.expect("driven sweep keeps its drive");
            let d = driven_phase_point(&sys, &drive, block_window, convention)?;
            Ok(GridCell { point: d.point, window_capped: d.window_capped, validity: Some(d.validity) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseGrid { axis1: axis1.clone(), axis2: axis2.clone(), cells, block_window })
}

/// Ordered list of distinct consecutive labels.
pub fn label_sequence<I: IntoIterator<Item = Label>>(labels: I) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::new();
    for l in labels {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

/// Bisection on the sign of `E_a - E_b` along a one-parameter family.
/// The bracket must contain a sign change.
pub fn refine_boundary<F>(family: F, lo: f64, hi: f64, a: Label, b: Label, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> BlockParams,
{
    let diff = |x: f64| {
        let p = family(x);
        energy_of(&p, a) - energy_of(&p, b)
    };
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = diff(lo);
    let f_hi = diff(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(invalid(format!("no crossing of {a:?} and {b:?} inside [{lo}, {hi}]")));
    }
    let positive_at_lo = f_lo > 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = diff(mid);
        if f == 0.0 {
            return Ok(mid);
        }
        if (f > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// First label change along `values`, refined by bisection.
pub fn locate_boundary<F>(family: F, values: &[f64], block_window: u32, tol: f64) -> Result<Option<(f64, Label, Label)>>
where
    F: Fn(f64) -> BlockParams,
{
    let mut prev: Option<(f64, Label)> = None;
    for &x in values {
        let label = ground_search(&family(x), block_window)?.label;
        if let Some((px, pl)) = prev {
            if pl != label {
                let at = refine_boundary(&family, px, x, pl, label, tol)?;
                return Ok(Some((at, pl, label)));
            }
        }
        prev = Some((x, label));
    }
    Ok(None)
}

/// Point in a two-parameter family where blocks `a`, `b` and `c` are
/// degenerate. `family(x, y)`; for each `y` the `a`/`b` crossing is found
/// in `x_bracket`, then `y` is bisected on the `a`/`c` difference there.
pub fn triple_point<F>(
    family: F,
    labels: [Label; 3],
    x_bracket: (f64, f64),
    y_bracket: (f64, f64),
    tol: f64,
) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> BlockParams,
{
    let [a, b, c] = labels;
    let x_at = |y: f64| refine_boundary(|x| family(x, y), x_bracket.0, x_bracket.1, a, b, tol * 1e-2);
    let y = refine_boundary(
        |y| {
            let x = x_at(y).unwrap_or(f64::NAN);
            family(x, y)
        },
        y_bracket.0,
        y_bracket.1,
        a,
        c,
        tol,
    )?;
    Ok((x_at(y)?, y))
}
