use nalgebra::{DMatrix, SymmetricEigen, Vector3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rfterm::analysis::{analytic_flux, dark_bright_decomposition, reduced_hamiltonian, sweep, ReducedParams, SweepAxis};
use rfterm::exec::Exec;
use rfterm::gate::{Encoding, GateOptions, LevelScheme, LogicalState, PulseSchedule};
use rfterm::swap::{project_bell, swap, BellOutcome, BipartitePair, Register};
use rfterm::units::mhz_to_rad_us;

fn density(n: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec(-1.0..1.0f64, 2 * n * n).prop_map(move |xs| {
        let a = DMatrix::from_fn(n, n, |i, j| C64::new(xs[2 * (i * n + j)], xs[2 * (i * n + j) + 1]));
        let rho = &a * a.adjoint() + DMatrix::identity(n, n) * C64::new(1e-6, 0.0);
        let tr: C64 = rho.diagonal().iter().sum();
        rho / tr
    })
}

fn unitary2() -> impl Strategy<Value = DMatrix<C64>> {
    (0.0..std::f64::consts::PI, 0.0..6.3f64, 0.0..6.3f64, 0.0..6.3f64).prop_map(|(t, a, b, c)| {
        let e = |x: f64| C64::from_polar(1.0, x);
        let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
        DMatrix::from_row_slice(2, 2, &[e(a) * co, -e(a + c) * si, e(a + b) * si, e(a + b + c) * co])
    })
}

fn logical_pair() -> [Register; 2] {
    [Register::logical(), Register::logical()]
}

fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
    (a - b).iter().all(|x| x.norm() < tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_outcomes_are_a_distribution(a in density(4), b in density(4)) {
        let pair = BipartitePair::product(logical_pair(), [&a, &b]).unwrap();
        let r = swap(&pair);
        prop_assert!((r.total_probability - 1.0).abs() < 1e-12);
        for o in &r.outcomes {
            prop_assert!(o.probability >= -1e-14 && o.probability <= 1.0 + 1e-12);
            if let Some(f) = o.fidelity {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
            }
        }
        prop_assert!(r.mean_fidelity <= 1.0 + 1e-12);
    }

    #[test]
    fn projection_is_linear_in_the_state(a in density(16), b in density(16), p in 0.0..1.0f64) {
        let mix = &a * C64::new(p, 0.0) + &b * C64::new(1.0 - p, 0.0);
        let pa = BipartitePair::new(logical_pair(), a).unwrap();
        let pb = BipartitePair::new(logical_pair(), b).unwrap();
        let pm = BipartitePair::new(logical_pair(), mix).unwrap();
        for o in BellOutcome::ALL {
            let (x, y, z) = (project_bell(&pa, o), project_bell(&pb, o), project_bell(&pm, o));
            let expect = &x.unnormalized * C64::new(p, 0.0) + &y.unnormalized * C64::new(1.0 - p, 0.0);
            prop_assert!(close(&z.unnormalized, &expect, 1e-12));
        }
    }

    #[test]
    fn projection_commutes_with_register_unitaries(rho in density(16), u in unitary2(), v in unitary2()) {
        let i2 = DMatrix::<C64>::identity(2, 2);
        // Index order register₁ ⊗ photon₁ ⊗ register₂ ⊗ photon₂.
        let full = u.kronecker(&i2).kronecker(&v.kronecker(&i2));
        let pair = BipartitePair::new(logical_pair(), rho.clone()).unwrap();
        let rotated = BipartitePair::new(logical_pair(), &full * rho * full.adjoint()).unwrap();
        let local = u.kronecker(&v);
        for o in BellOutcome::ALL {
            let before = project_bell(&pair, o).unnormalized;
            let after = project_bell(&rotated, o).unnormalized;
            prop_assert!(close(&after, &(&local * before * local.adjoint()), 1e-12));
        }
    }

    #[test]
    fn reduced_flux_is_a_nonnegative_rate(
        om in 0.01..3.0f64, d in -2.0..2.0f64, gc in 0.01..3.0f64, t in 0.0..20.0f64,
    ) {
        let p = params(om, d, gc);
        let f = analytic_flux(&p, t);
        prop_assert!(f.is_finite() && f >= 0.0);
        prop_assert!(f <= 2.0 * mhz_to_rad_us(gc) * (1.0 + 1e-9));
    }

    #[test]
    fn resonant_flux_matches_closed_form(om in 0.05..3.0f64, gc in 0.01..3.0f64, t in 0.01..5.0f64) {
        prop_assume!((om * om - gc * gc / 4.0).abs() > 1e-3);
        let p = params(om, 0.0, gc);
        let (w, g) = (mhz_to_rad_us(om), mhz_to_rad_us(gc));
        let disc = w * w - g * g / 4.0;
        let wt = disc.abs().sqrt();
        let s = if disc > 0.0 { (wt * t).sin() } else { (wt * t).sinh() };
        let expect = 2.0 * g * (w * w / (wt * wt)) * (-g * t).exp() * s * s;
        let got = analytic_flux(&p, t);
        prop_assert!((got - expect).abs() <= 1e-8 * expect.abs().max(1e-12), "{} vs {}", got, expect);
    }

    #[test]
    fn dark_bright_matches_direct_eigensolve(lambda in 0.0..2.0f64, delta in -3.0..3.0f64) {
        let h = reduced_hamiltonian(lambda, delta);
        let db = dark_bright_decomposition(lambda, delta);
        let mut got = [db.dark_energy, db.lower_bright_energy, db.upper_bright_energy];
        let mut want: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-12);
        }
        prop_assert!(db.dark_energy.abs() < 1e-14);
        prop_assert!((db.dark[1].abs() - 1.0).abs() < 1e-12);
        for (e, v) in [(db.lower_bright_energy, db.lower_bright), (db.upper_bright_energy, db.upper_bright)] {
            let x = Vector3::from(v);
            prop_assert!((h * x - x * e).norm() < 1e-12);
            prop_assert!((x.norm() - 1.0).abs() < 1e-12);
        }
    }
}

fn params(om: f64, d: f64, gc: f64) -> ReducedParams {
    ReducedParams {
        lambda: 0.0,
        delta: 0.0,
        epsilon: 0.0,
        omega_eff: om,
        omega_tilde: (om * om - gc * gc / 4.0).abs().sqrt(),
        overdamped: om * om < gc * gc / 4.0,
        effective_detuning: d,
        gamma_c: gc,
    }
}

#[test]
fn sweep_does_not_depend_on_scheduling() {
    let scheme = LevelScheme::implementation();
    let schedule = PulseSchedule::gaussian(3.5);
    let input = LogicalState::plus(Encoding::FourQubit);
    let axis = SweepAxis::parse("sigma").unwrap();
    let values = [1.0, 2.0, 3.0, 4.0];
    let run = |exec| sweep(&input, &scheme, &schedule, &GateOptions::default(), &axis, &values, exec).unwrap();
    let (a, b) = (run(Exec::Sequential), run(Exec::Parallel));
    assert_eq!(a.to_csv(), b.to_csv());
}
