//! Independent reference computations: finer-step reruns, long-time
//! integration against the null-space solver, steady-state anchors.

use enantio::dynamics::{evolve_master, evolve_unitary, TimeGrid, DEFAULT_DT};
use enantio::hilbert::swap_chirality;
use enantio::model::build_hamiltonian;
use enantio::steadystate::{steady_epsilon, steady_state};
use enantio::{mhz, BasisDim, DecoherenceParams, DensityMatrix, ModelParams, StateLabel};

fn racemic() -> DensityMatrix {
    DensityMatrix::racemic(BasisDim::Five)
}

#[test]
fn fig2_populations_match_tenfold_finer_step() {
    let h = build_hamiltonian(&ModelParams::reference()).unwrap();
    let coarse = evolve_unitary(
        &racemic(),
        &h,
        &TimeGrid::new(0.0, 50.0, DEFAULT_DT).unwrap(),
    )
    .unwrap();
    let fine = evolve_unitary(
        &racemic(),
        &h,
        &TimeGrid::new(0.0, 50.0, DEFAULT_DT / 10.0).unwrap(),
    )
    .unwrap();
    assert_eq!(coarse.len(), fine.len());
    for (a, b) in coarse.times.iter().zip(&fine.times) {
        assert!((a - b).abs() < 1e-9);
    }
    let worst = coarse
        .populations
        .iter()
        .flatten()
        .zip(fine.populations.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("fig2 dt vs dt/10 worst population difference {worst:.3e}");
    assert!(worst <= 1e-5, "{worst}");

    let min = |ts: &enantio::dynamics::TimeSeries, s| {
        ts.population(s)
            .unwrap()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    };
    assert!(min(&fine, StateLabel::GL) >= 0.45);
    assert!(min(&fine, StateLabel::GR) <= 0.20);
}

#[test]
fn halving_dt_changes_final_populations_below_1e_7() {
    let h = build_hamiltonian(&ModelParams::reference()).unwrap();
    let d = DecoherenceParams::reference();
    let a = evolve_master(
        &racemic(),
        &h,
        &d,
        &TimeGrid::new(0.0, 140.0, DEFAULT_DT).unwrap(),
    )
    .unwrap();
    let b = evolve_master(
        &racemic(),
        &h,
        &d,
        &TimeGrid::new(0.0, 140.0, DEFAULT_DT / 2.0).unwrap(),
    )
    .unwrap();
    let worst = a
        .populations
        .iter()
        .zip(&b.populations)
        .map(|(x, y)| (x.last().unwrap() - y.last().unwrap()).abs())
        .fold(0.0, f64::max);
    println!("fig3 final populations dt vs dt/2: {worst:.3e}");
    assert!(worst <= 1e-7, "{worst}");
}

#[test]
fn steady_state_matches_long_integration() {
    let p = ModelParams::reference();
    let d = DecoherenceParams::reference();
    let h = build_hamiltonian(&p).unwrap();
    let ss = steady_state(&h, &d).unwrap();
    let ts = evolve_master(
        &racemic(),
        &h,
        &d,
        &TimeGrid::new(0.0, 200.0, DEFAULT_DT).unwrap(),
    )
    .unwrap();
    let dist = (ss.rho.operator() - ts.final_state.as_ref().unwrap()).max_abs();
    println!("fig3 |rho_ss - rho(200 us)|_max = {dist:.3e}");
    assert!(dist <= 1e-4, "{dist}");
}

#[test]
fn steady_state_mirrors_under_phase_pi() {
    let d = DecoherenceParams::reference();
    let p = ModelParams::reference();
    let a = steady_state(&build_hamiltonian(&p).unwrap(), &d).unwrap();
    let b = steady_state(
        &build_hamiltonian(&p.with_phi(std::f64::consts::PI)).unwrap(),
        &d,
    )
    .unwrap();
    let diff = (&swap_chirality(a.rho.operator()) - b.rho.operator()).max_abs();
    assert!(diff <= 1e-9, "{diff}");
}

fn fig4a_point(gamma_mhz: f64, dephase_mhz: f64) -> f64 {
    let d = DecoherenceParams::uniform(mhz(gamma_mhz), mhz(dephase_mhz));
    steady_epsilon(&ModelParams::reference(), &d).unwrap()
}

#[test]
fn weak_dephasing_is_highly_efficient_at_gamma0() {
    let eps = fig4a_point(1.0, 0.01);
    assert!(eps >= 0.99, "{eps}");
}

#[test]
fn strong_dephasing_never_reaches_99_percent() {
    let best = enantio::sweep::log_grid(1e-3, 1e2, 25)
        .into_iter()
        .map(|g| fig4a_point(g, 1.0))
        .fold(0.0, f64::max);
    assert!(best < 0.99, "{best}");
}

#[test]
fn excess_rises_with_gamma_on_the_slow_branch() {
    let low = fig4a_point(1e-4, 0.01);
    let high = fig4a_point(1e-2, 0.01);
    assert!(low < high, "{low} vs {high}");
}
