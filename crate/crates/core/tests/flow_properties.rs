use std::sync::Arc;

use proptest::prelude::*;

use supflow::cli::{run_experiment, ExperimentConfig};
use supflow::curvature::CurvatureSpec;
use supflow::flow::{rhs, run, step, FlowParams, Mode, RunOptions, Status};
use supflow::sphere::initial::ellipsoid_support;
use supflow::sphere::{make_initial, radii_matrix, InitialKind, SphereGrid, SupportField, DEFAULT_SEED};

const THEOREM_RANGE: [(f64, f64); 6] = [(-1.0, 1.0), (0.0, 1.0), (-0.5, 0.5), (0.0, 0.5), (-1.0, 2.0), (-2.0, 1.0)];

fn grid2(nt: usize) -> Arc<SphereGrid> {
    SphereGrid::lat_long(nt, 2 * nt).unwrap().into_shared()
}

fn spec_by_index(i: usize, n: usize) -> CurvatureSpec {
    match i {
        0 => CurvatureSpec::sigma(1, n).unwrap(),
        1 => CurvatureSpec::sigma(n, n).unwrap(),
        _ => CurvatureSpec::power_mean(2.0, n).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_sphere_is_a_fixed_point(pair in 0usize..6, spec in 0usize..3, n in 1usize..=2) {
        let (a, b) = THEOREM_RANGE[pair];
        let grid = if n == 1 { SphereGrid::circle(64).unwrap().into_shared() } else { grid2(16) };
        let p = FlowParams::normalized(spec_by_index(spec, n), a, b).unwrap();
        let u = SupportField::constant(grid, 1.0).unwrap();
        let next = step(&u, &p, 1e-3).unwrap();
        prop_assert!(next.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn constant_fields_follow_the_radial_ode(
        pair in 0usize..6, spec in 0usize..3, r in 0.3f64..3.0, unnormalized in any::<bool>()
    ) {
        let (a, b) = THEOREM_RANGE[pair];
        let mut p = FlowParams::normalized(spec_by_index(spec, 2), a, b).unwrap();
        if unnormalized {
            p = p.with_mode(Mode::Unnormalized);
        }
        let u = SupportField::constant(grid2(16), r).unwrap();
        let g = p.gamma();
        let expect = g * r.powf(a + b) - if unnormalized { 0.0 } else { g * r };
        for v in rhs(&u, &p).unwrap() {
            prop_assert!((v - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn round_radii_are_exact(r in 0.1f64..10.0, nt in 16usize..40) {
        let u = SupportField::constant(grid2(nt), r).unwrap();
        let b = radii_matrix(&u).unwrap();
        for i in 0..b.len() {
            let m = b.matrix(i);
            prop_assert!((m[0] - r).abs() <= 1e-12 * r && m[1].abs() <= 1e-12 * r && (m[2] - r).abs() <= 1e-12 * r);
        }
    }
}

#[test]
fn quarter_turn_permutes_the_radii_field() {
    // (a, b, c) and (b, a, c) differ by φ → φ + π/2, which maps the grid to itself
    let nt = 24;
    let np = 2 * nt;
    let g = grid2(nt);
    let field = |axes: [f64; 3]| {
        let v = (0..g.len()).map(|i| ellipsoid_support(&axes, g.direction(i))).collect();
        radii_matrix(&SupportField::new(g.clone(), v).unwrap()).unwrap()
    };
    let a = field([1.3, 1.0, 0.8]);
    let b = field([1.0, 1.3, 0.8]);
    let mut worst: f64 = 0.0;
    for j in 0..nt {
        for k in 0..np {
            let ea = a.eigenvalues(j * np + k);
            let eb = b.eigenvalues(j * np + (k + np / 4) % np);
            for (x, y) in ea.iter().zip(eb) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn theorem_range_runs_pass_their_checks() {
    let kind = InitialKind::parse("perturbed:1:2=0.05,3=0.03", DEFAULT_SEED).unwrap();
    let u0 = make_initial(&kind, grid2(16)).unwrap();
    for (a, b) in THEOREM_RANGE {
        let p = FlowParams::normalized(CurvatureSpec::sigma(2, 2).unwrap(), a, b).unwrap();
        let res = run(&u0, &p, &RunOptions::new(0.5, 0.05).unwrap()).unwrap();
        assert!(res.summary.completed, "{a} {b}: {:?}", res.summary.failure);
        assert!(res.summary.all_claimed_pass(), "{a} {b}: {:?}", res.summary.invariants);
    }
}

#[test]
fn out_of_range_checks_are_not_claimed() {
    let kind = InitialKind::parse("perturbed:1:2=0.05", DEFAULT_SEED).unwrap();
    let u0 = make_initial(&kind, grid2(16)).unwrap();
    // α > 0 lies outside the theorem
    let p = FlowParams::normalized(CurvatureSpec::sigma(1, 2).unwrap(), 0.5, 0.5).unwrap();
    assert!(!p.in_theorem_range());
    let res = run(&u0, &p, &RunOptions::new(0.2, 0.05).unwrap()).unwrap();
    assert!(res.summary.invariants.values().all(|v| v.status == Status::NotClaimed));
}

#[test]
fn identical_configs_give_identical_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for name in ["a", "b"] {
        let mut cfg = ExperimentConfig::default();
        cfg.n_theta = 16;
        cfg.n_phi = 32;
        cfg.t_end = 0.3;
        cfg.snapshot_every = 0.05;
        cfg.write_snapshots = false;
        cfg.output_dir = dir.path().join(name);
        let out = run_experiment(&cfg).unwrap();
        texts.push(std::fs::read(out.output_dir.join("diagnostics.csv")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}
