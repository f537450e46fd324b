use bimodal_core::dynamics::{assemble_terms, BasisState, HamiltonianSpec, HilbertSpace, Level};
use bimodal_core::effective::{DetuningConvention, DriveParams, SystemParams};
use bimodal_core::eigen3::{eigenvalues, Sym3};
use bimodal_core::spectrum::*;
use bimodal_core::sweep::{Axis, AxisQuantity};
use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use proptest::prelude::*;

fn oracle_eigenvalues(a: &Sym3) -> [f64; 3] {
    let m = Matrix3::from_fn(|i, j| a[i][j]);
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(|x, y| x.partial_cmp(y).unwrap());
    [e[0], e[1], e[2]]
}

fn dense_lowest(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn params() -> impl Strategy<Value = BlockParams> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.1f64..3.0, 0.1f64..3.0, 0.0f64..4.0, 0.0f64..4.0).prop_map(
        |(omega1, omega2, cavity1, cavity2, g1, g2)| BlockParams { omega1, omega2, cavity1, cavity2, g1, g2 },
    )
}

fn resonant(g1: f64, g2: f64) -> BlockParams {
    BlockParams::from(&SystemParams::resonant(g1, g2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_eigensolver_matches_oracle(p in params(), n in 0i64..12, m in 0i64..12) {
        let b = block_matrix(&p, n, m).unwrap();
        let ours = eigenvalues(&b.matrix);
        let oracle = oracle_eigenvalues(&b.matrix);
        let scale = b.matrix.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
        for k in 0..3 {
            prop_assert!((ours[k] - oracle[k]).abs() <= 1e-12 * scale, "{:?} vs {:?}", ours, oracle);
        }
        prop_assert_eq!(block_ground_energy(&b), ours[0]);
    }

    #[test]
    fn degenerate_and_near_degenerate_blocks(d in -3.0f64..3.0, eps in -1e-7f64..1e-7, g in 0.0f64..1e-6) {
        let a: Sym3 = [[d, g, 0.0], [g, d + eps, 0.0], [0.0, 0.0, d - eps]];
        let ours = eigenvalues(&a);
        let oracle = oracle_eigenvalues(&a);
        for k in 0..3 {
            prop_assert!((ours[k] - oracle[k]).abs() <= 1e-12 * d.abs().max(1.0));
        }
    }

    #[test]
    fn resonant_blocks_have_closed_form(g1 in 0.0f64..5.0, g2 in 0.0f64..5.0, n in 0i64..10, m in 1i64..10) {
        let b = block_matrix(&resonant(g1, g2), n, m).unwrap();
        let d = b.matrix[0][0];
        let r = (g1 * g1 * (n + 1) as f64 + g2 * g2 * m as f64).sqrt();
        let e = eigenvalues(&b.matrix);
        for (got, want) in e.iter().zip([d - r, d, d + r]) {
            prop_assert!((got - want).abs() <= 1e-12 * (1.0 + d.abs() + r));
        }
    }

    #[test]
    fn diagonal_differences_are_detunings(p in params(), n in 0i64..20, m in 0i64..20) {
        let b = block_matrix(&p, n, m).unwrap().matrix;
        let d1 = 2.0 * p.omega1 + p.omega2 - p.cavity1;
        let d2 = 2.0 * p.omega2 + p.omega1 - p.cavity2;
        prop_assert!((b[0][0] - b[1][1] - d1).abs() <= 1e-14 * (1.0 + b[0][0].abs()) * 4.0);
        prop_assert!((b[0][0] - b[2][2] - d2).abs() <= 1e-14 * (1.0 + b[0][0].abs()) * 4.0);
        prop_assert_eq!(b[1][2], 0.0);
    }

    #[test]
    fn ground_energy_decreases_with_coupling(p in params(), n in 0i64..8, m in 0i64..8, dg in 0.0f64..1.0) {
        let e0 = block_ground_energy(&block_matrix(&p, n, m).unwrap());
        let mut q = p;
        q.g1 += dg;
        prop_assert!(block_ground_energy(&block_matrix(&q, n, m).unwrap()) <= e0 + 1e-12);
        let mut q = p;
        q.g2 += dg;
        prop_assert!(block_ground_energy(&block_matrix(&q, n, m).unwrap()) <= e0 + 1e-12);
    }

    #[test]
    fn search_returns_global_minimum(p in params(), window in 1u32..7) {
        let point = ground_search(&p, window).unwrap();
        let mut all = Vec::new();
        for n in 0..=window {
            for m in 0..=window {
                all.push(((n, m), block_ground_energy(&block_matrix(&p, n as i64, m as i64).unwrap())));
            }
        }
        let min = all.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let first = all.iter().find(|x| x.1 == min).unwrap().0;
        prop_assert_eq!(point.label, first);
        prop_assert_eq!(point.energy, min);
        prop_assert!(point.gap >= 0.0);
        prop_assert!(point.label.0 <= window && point.label.1 <= window);
        prop_assert_eq!(point.category, Category::of(point.label));
    }
}

/// Lowest eigenvalue of the assembled static Hamiltonian on a conserved
/// sector against the block engine.
fn check_sectors(sys: &SystemParams, space: &HilbertSpace) {
    let list = assemble_terms(&HamiltonianSpec::static_jc(*sys), space).unwrap();
    let p = BlockParams::from(sys);
    let (c1, c2) = space.cutoffs();
    let real = |idx: &[usize]| -> Vec<Vec<f64>> {
        list.submatrix(0.0, idx).into_iter().map(|r| r.into_iter().map(|z| z.re).collect()).collect()
    };
    for n in 0..c1 {
        for m in 1..=c2 {
            let sector = space.sector(n as i64, m as i64 - 1);
            assert_eq!(sector.len(), 3, "sector ({n},{m})");
            let block = block_ground_energy(&block_matrix(&p, n as i64, m as i64).unwrap());
            let full = dense_lowest(&real(&sector));
            assert!((block - full).abs() <= 1e-10, "({n},{m}): {block} vs {full}");
        }
        // m = 0: the block is the {|3;n,0>, |1;n+1,0>} pair shifted by -Omega2,
        // plus the lone |2;n,0> state.
        let pair = [
            space.index(BasisState { level: Level::Three, n1: n, n2: 0 }).unwrap(),
            space.index(BasisState { level: Level::One, n1: n + 1, n2: 0 }).unwrap(),
        ];
        let lone = space.sector(n as i64, -1);
        assert_eq!(lone.len(), 1);
        let pair_low = dense_lowest(&real(&pair)) - sys.cavity2;
        let lone_e = real(&lone)[0][0];
        let block = block_ground_energy(&block_matrix(&p, n as i64, 0).unwrap());
        assert!((block - pair_low.min(lone_e)).abs() <= 1e-10, "({n},0)");
    }
}

#[test]
fn sector_spectrum_matches_blocks() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let space = HilbertSpace::new(4, 3).unwrap();
    for _ in 0..20 {
        let sys = SystemParams::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        )
        .unwrap();
        check_sectors(&sys, &space);
    }
    check_sectors(&SystemParams::resonant(0.05, 0.05), &space);
}

#[test]
fn spec_examples() {
    let mut p = resonant(0.0, 0.0);
    p.cavity1 = 1.22;
    let b = block_matrix(&p, 3, 2).unwrap().matrix;
    assert!((b[0][0] - b[1][1] - 0.03).abs() < 1e-14);
    let b = block_matrix(&resonant(0.3, 0.4), 0, 1).unwrap();
    assert!((block_ground_energy(&b) - 0.25).abs() < 1e-12);
    let b = block_matrix(&resonant(1.0, 9.0), 0, 0).unwrap();
    assert!((block_ground_energy(&b) + 1.25).abs() < 1e-12);
    let p = ground_search(&resonant(3.2, 0.05), 8).unwrap();
    assert_eq!(p.label, (1, 0));
}

#[test]
fn closed_form_boundaries() {
    let y1 = |g1r: f64| resonant(g1r * 1.25, 0.05);
    let (at, a, b) = locate_boundary(y1, &(0..=40).map(|k| 0.1 * k as f64).collect::<Vec<_>>(), 8, 1e-10)
        .unwrap()
        .unwrap();
    assert_eq!((a, b), ((0, 0), (1, 0)));
    assert!((at - 1.0 / (2f64.sqrt() - 1.0)).abs() < 1e-8);

    for g1 in [0.0, 0.3, 1.0] {
        let fam = |g2r: f64| resonant(g1, g2r);
        let xs: Vec<f64> = (0..=60).map(|k| 0.05 * k as f64).collect();
        let (at, a, b) = locate_boundary(fam, &xs, 8, 1e-10).unwrap().unwrap();
        assert_eq!((a, b), ((0, 0), (0, 1)));
        assert!((at - (1.0 + 2.0 * g1).sqrt()).abs() < 1e-8, "g1={g1}: {at}");
    }
}

#[test]
fn grid_is_independent_of_worker_count() {
    let template = SystemParams::resonant(0.05, 0.05);
    let a1 = Axis::linspace(AxisQuantity::G1OverCavity1, 0.0, 5.0, 41);
    let a2 = Axis::linspace(AxisQuantity::G2OverCavity2, 0.0, 5.0, 37);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| phase_grid(&template, &a1, &a2, 8).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
    assert_eq!(one.cells.len(), 41 * 37);
    assert!(one.cells.iter().all(|c| c.point.label.0 <= 8 && c.point.label.1 <= 8));
    assert!(one.edge_cells().is_empty());

    // energy stays continuous across label changes
    for i in 0..41 {
        for j in 1..37 {
            let (x, y) = (one.cell(i, j - 1), one.cell(i, j));
            assert!((x.point.energy - y.point.energy).abs() < 1.0);
        }
    }
}

#[test]
fn single_cell_grid() {
    let template = SystemParams::resonant(0.05, 0.05);
    let a1 = Axis::linspace(AxisQuantity::G1, 0.05, 0.05, 1);
    let a2 = Axis::linspace(AxisQuantity::G2, 0.05, 0.05, 1);
    let g = phase_grid(&template, &a1, &a2, 8).unwrap();
    assert_eq!(g.cells.len(), 1);
    assert_eq!(g.cells[0].point.label, (0, 0));
    let empty = Axis { name: "g1".into(), quantity: AxisQuantity::G1, values: vec![] };
    assert!(phase_grid(&template, &empty, &a2, 8).is_err());
}

#[test]
fn driven_point_examples() {
    let sys = SystemParams::resonant(0.05, 0.05);
    let bare = ground_search(&BlockParams::from(&sys), 8).unwrap();
    let d = driven_phase_point(&sys, &DriveParams::new(1e-12, 6.0).unwrap(), 8, DetuningConvention::default()).unwrap();
    assert_eq!(d.point.label, (0, 0));
    assert!((d.point.energy - bare.energy).abs() < 1e-12);
    assert!(!d.window_capped);

    let d = driven_phase_point(&sys, &DriveParams::from_theta(0.01, 0.18).unwrap(), 5, DetuningConvention::Signed).unwrap();
    assert!((d.effective.cavity1 + 0.01).abs() < 1e-12);
    assert!(d.window_capped);

    let d = driven_phase_point(&sys, &DriveParams::from_theta(2.404_825_557_695_773, 0.18).unwrap(), 5, DetuningConvention::default()).unwrap();
    assert!(d.effective.gr1.abs() < 1e-15);
}
