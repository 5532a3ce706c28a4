use epr_optomech::adiabatic::{closed_form_entries, optimum_d, transfer_functions};
use epr_optomech::model::PhysicalParams;
use epr_optomech::oracle::covariance::{assemble_covariance, standard_form_reduce};
use epr_optomech::oracle::{
    adiabatic_response, compare_models, full6_solve, intracavity_occupation, rwa3_solve, Model,
};
use epr_optomech::steady::{
    baseline_defaults, baseline_device, baseline_operating_point, derive_at, solve_steady_state, DerivedParams,
};
use epr_optomech::sweep::linear_grid;

fn defaults() -> DerivedParams {
    solve_steady_state(&baseline_defaults()).unwrap()
}

fn at_optimum() -> DerivedParams {
    let mut op = baseline_operating_point();
    op.d = optimum_d(&defaults()).d_o;
    derive_at(&baseline_device(), &op).unwrap()
}

#[test]
fn rwa3_is_symmetric_at_the_optimum() {
    let d = at_optimum();
    let v = assemble_covariance(&rwa3_solve(&d, 0.0).unwrap(), d.n_m);
    let sf = standard_form_reduce(&v).unwrap();
    assert!(sf.residual < 0.01 * sf.n, "{sf:?}");
    assert!((sf.k_p + sf.k_x).abs() < 0.02 * sf.k_x, "{sf:?}");
}

#[test]
fn assembled_covariances_are_physical() {
    let d = defaults();
    for w in linear_grid(-2.0 * d.gamma, 2.0 * d.gamma, 41) {
        for resp in [rwa3_solve(&d, w).unwrap(), full6_solve(&d, w).unwrap()] {
            let v = assemble_covariance(&resp, d.n_m);
            assert!(v.symmetry_error() < 1e-12);
            assert!(v.is_physical(1e-8), "w = {w}: {}", v.uncertainty_min_eigenvalue());
            assert!((0..4).all(|k| v.entries[(k, k)] >= 1.0 - 1e-6));
        }
    }
}

#[test]
fn closed_form_entries_match_assembly_without_mechanical_noise() {
    let d = defaults().with_gamma_m(0.0);
    for w in linear_grid(-d.gamma, d.gamma, 21) {
        let tp = transfer_functions(&d, w).unwrap();
        let e = closed_form_entries(&tp, d.n_m, &d);
        let v = assemble_covariance(&adiabatic_response(&d, w).unwrap(), d.n_m).entries;
        assert!((v[(0, 0)] - e.n).abs() < 1e-10 * e.n);
        assert!((v[(1, 2)] - e.v14).abs() < 1e-10 * e.n);
        assert!((v[(1, 3)] - e.v24).abs() < 1e-10 * e.n);
    }
}

#[test]
fn mechanical_noise_enters_linearly() {
    let d = defaults();
    let w = 0.13 * d.gamma;
    for resp in [rwa3_solve(&d, w).unwrap(), full6_solve(&d, w).unwrap()] {
        let v0 = assemble_covariance(&resp, 0.0).entries;
        let v1 = assemble_covariance(&resp, 1.0).entries;
        let vn = assemble_covariance(&resp, d.n_m).entries;
        let predicted = v0 + (v1 - v0) * d.n_m;
        assert!((vn - predicted).abs().max() < 1e-9 * vn.abs().max());

        // masking the mechanical columns removes the n_m dependence
        let mut masked = resp.clone();
        for map in &mut masked.channels {
            map.column_mut(4).fill(num_complex::Complex64::new(0.0, 0.0));
            map.column_mut(5).fill(num_complex::Complex64::new(0.0, 0.0));
        }
        assert_eq!(
            assemble_covariance(&masked, 0.0).entries,
            assemble_covariance(&masked, d.n_m).entries
        );
    }
}

#[test]
fn full6_degrades_as_omega_m_approaches_delta() {
    // coupling eta omega_m, damping and bath occupancy held fixed
    let op = baseline_operating_point();
    let device = baseline_device();
    let n_m = device.thermal_occupancy();
    let deviation = |ratio: f64| {
        let omega_m = ratio * op.delta;
        let base = PhysicalParams {
            omega_m,
            eta: device.eta * device.omega_m / omega_m,
            ..device
        };
        let d = derive_at(&base, &op).unwrap().with_occupancy(n_m);
        let band = 0.1 * d.delta;
        compare_models(&d, &linear_grid(-band, band, 11), &[Model::Full6])
            .max_deviation_within(Model::Full6, band)
            .unwrap()
    };
    let devs: Vec<f64> = [7.35, 5.0, 3.0, 2.0].iter().map(|&r| deviation(r)).collect();
    assert!(devs.windows(2).all(|w| w[1] > w[0]), "{devs:?}");
}

#[test]
fn elimination_degrades_with_smaller_delta() {
    let deviation = |delta_scale: f64| {
        let mut op = baseline_operating_point();
        op.delta *= delta_scale;
        let d = derive_at(&baseline_device(), &op).unwrap().with_occupancy(0.0);
        let band = 0.1 * baseline_operating_point().delta;
        compare_models(&d, &linear_grid(-band, band, 11), &[Model::AdiabaticAssembled])
            .max_deviation_within(Model::AdiabaticAssembled, band)
            .unwrap()
    };
    let wide = deviation(1.0);
    let narrow = deviation(0.1);
    assert!(narrow > wide, "{narrow} vs {wide}");
}

#[test]
fn rwa3_and_full6_agree_in_the_baseline_band() {
    let d = defaults();
    let band = 0.1 * d.delta;
    let report = compare_models(&d, &linear_grid(-band, band, 21), &[Model::Full6]);
    assert!(report.max_deviation_within(Model::Full6, band).unwrap() < 0.10);
}

#[test]
fn occupation_is_small_against_the_coherent_amplitude() {
    let d = defaults();
    let occ = intracavity_occupation(&d).unwrap();
    assert!((1e2..1e4).contains(&occ), "{occ}");
    assert!(occ < 1e-2 * d.alpha_1.norm_sqr());
}

#[test]
fn occupation_vanishes_without_squeezing_or_heat() {
    let mut d = defaults().with_occupancy(0.0);
    d.eta = 0.0;
    d.g = 0.0;
    assert_eq!(intracavity_occupation(&d).unwrap(), 0.0);
}
