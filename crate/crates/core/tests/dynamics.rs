use bimodal_core::dynamics::*;
use bimodal_core::effective::{DriveParams, SystemParams};
use bimodal_core::Error;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};

const VARIANTS: [Variant; 5] = [
    Variant::StaticJc,
    Variant::Rotating,
    Variant::Effective,
    Variant::EffectiveTilde1,
    Variant::ThreeLevelJcTilde,
];

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn spec(v: Variant, sys: SystemParams, drive: DriveParams) -> HamiltonianSpec {
    if v == Variant::StaticJc {
        HamiltonianSpec::static_jc(sys)
    } else {
        HamiltonianSpec::driven(v, sys, drive)
    }
}

fn weak_state(space: HilbertSpace, atom: AtomicState) -> StateVector {
    coherent_state(space, c(0.01), c(0.01), atom).unwrap()
}

type Dense = Vec<Vec<C64>>;

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![c(0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// `exp(-i t H)` by scaling and squaring of a dense Taylor series.
fn dense_propagator(h: &Dense, t: f64) -> Dense {
    let n = h.len();
    let norm: f64 = h.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let scale = t / 2f64.powi(squarings as i32);
    let a: Dense = h.iter().map(|r| r.iter().map(|z| z * C64::new(0.0, -scale)).collect()).collect();
    let mut result: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { c(1.0) } else { c(0.0) }).collect()).collect();
    let mut term = result.clone();
    for k in 1..40 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

fn apply_dense(m: &Dense, x: &[C64]) -> Vec<C64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn space_examples() {
    let s = HilbertSpace::new(2, 2).unwrap();
    assert_eq!(s.dim(), 27);
    for i in 0..s.dim() {
        assert_eq!(s.index(s.state(i)), Some(i));
    }
    let a1 = s.lower(CavityMode::One);
    let from = s.index(BasisState { level: Level::Two, n1: 1, n2: 0 }).unwrap();
    let to = s.index(BasisState { level: Level::Two, n1: 0, n2: 0 }).unwrap();
    assert_eq!(a1.entry(to, from), 1.0);
    assert!(HilbertSpace::new(0, 3).is_err());
    assert!(HilbertSpace::new(2, 0).is_err());
}

#[test]
fn coherent_examples() {
    let s = HilbertSpace::new(6, 6).unwrap();
    let psi = weak_state(s, AtomicState::Two);
    assert!((psi.mean_photons(CavityMode::One) - 1e-4).abs() < 1e-12);
    let p = weak_state(s, AtomicState::OneMinusTwo).atomic_populations();
    assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14 && p[2] == 0.0);
    let psi = coherent_state(s, c(0.0), c(0.0), AtomicState::Three).unwrap();
    let vac = s.index(BasisState { level: Level::Three, n1: 0, n2: 0 }).unwrap();
    assert_eq!(psi.amplitudes[vac], c(1.0));
}

#[test]
fn every_variant_is_hermitian() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let space = HilbertSpace::new(3, 3).unwrap();
    for _ in 0..5 {
        let sys = SystemParams::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.3..2.0),
            rng.gen_range(0.3..2.0),
            rng.gen_range(0.0..0.3),
            rng.gen_range(0.0..0.3),
        )
        .unwrap();
        let drive = DriveParams::from_theta(rng.gen_range(0.0..6.0), rng.gen_range(0.1..1.0)).unwrap();
        for v in VARIANTS {
            let list = assemble_terms(&spec(v, sys, drive), &space).unwrap();
            for _ in 0..20 {
                let t = rng.gen_range(-500.0..500.0);
                let h = list.dense(t);
                let n = h.len();
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((h[i][j] - h[j][i].conj()).norm());
                    }
                }
                assert!(worst < 1e-12, "{v:?} at t={t}: {worst}");
            }
        }
    }
}

#[test]
fn jc_forms_conserve_excitations() {
    let space = HilbertSpace::new(4, 4).unwrap();
    let sys = SystemParams::new(0.3, -0.2, 1.1, 0.9, 0.4, 0.7).unwrap();
    let drive = DriveParams::from_theta(1.3, 0.33).unwrap();
    let charges: Vec<(i64, i64)> = space.states().map(|s| space.charges(s)).collect();
    let worst = |v: Variant| {
        let h = assemble_terms(&spec(v, sys, drive), &space).unwrap().dense(0.7);
        let mut w: f64 = 0.0;
        for i in 0..h.len() {
            for j in 0..h.len() {
                let (qi, qj) = (charges[i], charges[j]);
                let d = ((qj.0 - qi.0) as f64).abs() + ((qj.1 - qi.1) as f64).abs();
                w = w.max(h[i][j].norm() * d);
            }
        }
        w
    };
    assert!(worst(Variant::StaticJc) < 1e-12);
    assert!(worst(Variant::ThreeLevelJcTilde) < 1e-12);
    // counter-rotating terms connect different sectors
    assert!(worst(Variant::EffectiveTilde1) > 1e-6);
    assert!(worst(Variant::Rotating) > 1e-6);
}

#[test]
fn static_evolution_matches_dense_exponential() {
    let space = HilbertSpace::new(2, 2).unwrap();
    let sys = SystemParams::resonant(0.05, 0.05);
    let drive = DriveParams::from_theta(0.7, 0.18).unwrap();
    for v in [Variant::ThreeLevelJcTilde, Variant::EffectiveTilde1, Variant::StaticJc] {
        let list = assemble_terms(&spec(v, sys, drive), &space).unwrap();
        let h = list.dense(0.0);
        for atom in [AtomicState::Two, AtomicState::OnePlusThree, AtomicState::TwoPlusThree] {
            let psi = coherent_state(space, c(0.01), c(0.01), atom).unwrap();
            let times = [0.0, 0.5, 3.0, 17.0, 60.0];
            let traj = evolve_terms(&list, &psi, &times, None).unwrap();
            for (t, got) in times.iter().zip(&traj.states) {
                let want = apply_dense(&dense_propagator(&h, *t), &psi.amplitudes);
                assert!(max_diff(got, &want) < 1e-8, "{v:?} {atom} t={t}");
            }
        }
    }
}

#[test]
fn eigenvector_only_acquires_a_phase() {
    let space = HilbertSpace::new(3, 3).unwrap();
    let sys = SystemParams::resonant(0.2, 0.3);
    let drive = DriveParams::from_theta(0.4, 0.49).unwrap();
    let list = assemble_terms(&HamiltonianSpec::driven(Variant::ThreeLevelJcTilde, sys, drive), &space).unwrap();
    let h = list.dense(0.0);
    let n = h.len();
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| h[i][j].re));
    for k in [0, n / 2, n - 1] {
        let v: Vec<C64> = eig.eigenvectors.column(k).iter().map(|x| c(*x)).collect();
        let psi = StateVector::new(space, v).unwrap();
        let traj = evolve_terms(&list, &psi, &[1.0, 10.0, 100.0], None).unwrap();
        for s in &traj.states {
            let overlap: C64 = psi.amplitudes.iter().zip(s).map(|(a, b)| a.conj() * b).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-10);
        }
    }
}

/// Classical RK4 on a very fine grid as a reference for the driven case.
fn rk4(list: &TermList, psi: &[C64], t_end: f64, steps: usize) -> Vec<C64> {
    let h = t_end / steps as f64;
    let mut y = psi.to_vec();
    let deriv = |t: f64, y: &[C64]| -> Vec<C64> {
        let mut out = vec![c(0.0); y.len()];
        list.apply(t, y, &mut out);
        out.iter().map(|z| z * C64::new(0.0, -1.0)).collect()
    };
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = deriv(t, &y);
        let y2: Vec<C64> = y.iter().zip(&k1).map(|(a, b)| a + b * (0.5 * h)).collect();
        let k2 = deriv(t + 0.5 * h, &y2);
        let y3: Vec<C64> = y.iter().zip(&k2).map(|(a, b)| a + b * (0.5 * h)).collect();
        let k3 = deriv(t + 0.5 * h, &y3);
        let y4: Vec<C64> = y.iter().zip(&k3).map(|(a, b)| a + b * h).collect();
        let k4 = deriv(t + h, &y4);
        for i in 0..y.len() {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}

#[test]
fn driven_evolution_matches_fine_rk4() {
    let space = HilbertSpace::new(2, 2).unwrap();
    let sys = SystemParams::resonant(0.05, 0.05);
    let drive = DriveParams::from_theta(1.2, 0.33).unwrap();
    let list = assemble_terms(&HamiltonianSpec::driven(Variant::Rotating, sys, drive), &space).unwrap();
    let psi = weak_state(space, AtomicState::TwoPlusThree);
    let traj = evolve_terms(&list, &psi, &[20.0], None).unwrap();
    let reference = rk4(&list, &psi.amplitudes, 20.0, 40_000);
    assert!(max_diff(&traj.states[0], &reference) < 1e-8);
}

#[test]
fn halving_the_step_changes_little() {
    let space = HilbertSpace::new(6, 6).unwrap();
    let sys = SystemParams::resonant(0.05, 0.05);
    for wd in [0.14, 0.49] {
        let drive = DriveParams::from_theta(0.6, wd).unwrap();
        let list = assemble_terms(&HamiltonianSpec::driven(Variant::Rotating, sys, drive), &space).unwrap();
        let psi = weak_state(space, AtomicState::OnePlusThree);
        let times = uniform_times(100.0, 201);
        let dt = list.step_bound();
        let a = evolve_terms(&list, &psi, &times, Some(dt)).unwrap();
        let b = evolve_terms(&list, &psi, &times, Some(0.5 * dt)).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(max_diff(x, y) < 1e-6);
        }
        assert!(a.norm_drift <= 1e-8 && b.norm_drift <= 1e-8);
    }
}

#[test]
fn step_bound_violation_is_an_error() {
    let space = HilbertSpace::new(2, 2).unwrap();
    let sys = SystemParams::resonant(0.05, 0.05);
    let drive = DriveParams::from_theta(0.5, 0.18).unwrap();
    let spec = HamiltonianSpec::driven(Variant::Effective, sys, drive);
    let list = assemble_terms(&spec, &space).unwrap();
    let psi = weak_state(space, AtomicState::Two);
    assert!(matches!(
        evolve(&spec, &space, &psi, 5.0, Some(2.0 * list.step_bound()), &[5.0]),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn leakage_warning_for_tight_cutoff() {
    let space = HilbertSpace::new(1, 1).unwrap();
    let sys = SystemParams::resonant(0.3, 0.3);
    let drive = DriveParams::from_theta(0.2, 0.49).unwrap();
    let spec = HamiltonianSpec::driven(Variant::ThreeLevelJcTilde, sys, drive);
    let psi = StateVector::basis(space, BasisState { level: Level::Three, n1: 0, n2: 0 }).unwrap();
    let traj = evolve(&spec, &space, &psi, 50.0, None, &uniform_times(50.0, 51)).unwrap();
    assert!(traj.max_leakage > 1e-6);
    assert!(traj.warnings.iter().any(|w| w.contains("truncation")));
}

#[test]
fn echo_is_symmetric_and_bounded() {
    let space = HilbertSpace::new(4, 4).unwrap();
    let sys = SystemParams::resonant(0.05, 0.05);
    let drive = DriveParams::from_theta(0.8, 0.33).unwrap();
    let a = HamiltonianSpec::driven(Variant::Rotating, sys, drive);
    let b = HamiltonianSpec::driven(Variant::Effective, sys, drive);
    let psi = weak_state(space, AtomicState::OnePlusThree);
    let opts = EchoOptions { t_max: 60.0, samples: 301, dt_max: None };
    let ab = loschmidt_echo(&a, &b, &space, &psi, &opts).unwrap();
    let ba = loschmidt_echo(&b, &a, &space, &psi, &opts).unwrap();
    assert_eq!(ab.times.len(), 301);
    for (x, y) in ab.fidelity.iter().zip(&ba.fidelity) {
        assert!((x - y).abs() <= 1e-12);
    }
    assert!((ab.fidelity[0] - 1.0).abs() <= 1e-12);
    assert!(ab.fidelity.iter().all(|f| *f >= 0.0 && *f <= 1.0 + 1e-12));
    assert!(ab.norm_drift <= 1e-8);
    assert!(ab.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn echo_rejects_cross_frame_pairs() {
    let space = HilbertSpace::new(2, 2).unwrap();
    let sys = SystemParams::resonant(0.05, 0.05);
    let drive = DriveParams::from_theta(0.8, 0.33).unwrap();
    let psi = weak_state(space, AtomicState::Two);
    let opts = EchoOptions { t_max: 1.0, samples: 3, dt_max: None };
    let pairs = [
        (Variant::Rotating, Variant::EffectiveTilde1),
        (Variant::StaticJc, Variant::Effective),
        (Variant::ThreeLevelJcTilde, Variant::StaticJc),
    ];
    for (x, y) in pairs {
        let r = loschmidt_echo(&spec(x, sys, drive), &spec(y, sys, drive), &space, &psi, &opts);
        assert!(matches!(r, Err(Error::FrameMismatch(_, _))), "{x:?}/{y:?}");
    }
}
