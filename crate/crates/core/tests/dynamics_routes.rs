use cds_core::dynamics::{closed_form_cavity, slaved_cavity, AmplitudeState, ReducedGenerator};
use cds_core::{
    dark_state, emission_probabilities_analytic, integrate_full, reduced_propagate, StepControl,
    SystemParams,
};

fn cs(g_q: f64, g_a: f64) -> SystemParams {
    SystemParams::cesium(g_q, g_a).unwrap()
}

/// Largest `|Q_full - Q_reduced|` along a trajectory, skipping the initial
/// cavity transient.
fn reduced_gap(params: &SystemParams) -> f64 {
    let horizon = 3000.0;
    let traj = integrate_full(
        params,
        &AmplitudeState::excited_qd(),
        horizon,
        &StepControl::adaptive(1e-11).recording_every(10.0),
    )
    .unwrap();
    let gen = ReducedGenerator::new(params);
    traj.samples
        .iter()
        .filter(|s| s.t > 20.0)
        .map(|s| {
            let r = gen.propagate(cds_core::EmitterAmplitudes::new(1.0, 0.0, 0.0), s.t);
            (s.q.re - r.q)
                .abs()
                .max((s.a.re - r.a).abs())
                .max((s.b.re - r.b).abs())
                .max(s.q.im.abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn full_dynamics_converge_to_reduced_as_couplings_shrink() {
    let gaps: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|s| reduced_gap(&cs(0.04 * s, 0.12 * s)))
        .collect();
    assert!(gaps[0] < 0.05, "{gaps:?}");
    assert!(
        gaps[1] < 0.5 * gaps[0] && gaps[2] < 0.5 * gaps[1],
        "{gaps:?}"
    );
}

#[test]
fn norm_loss_equals_emitted_probability() {
    let p = cs(0.02, 0.08);
    for control in [StepControl::fixed(0.01), StepControl::adaptive(1e-10)] {
        let traj = integrate_full(&p, &AmplitudeState::excited_qd(), 2000.0, &control).unwrap();
        for (s, e) in traj.samples.iter().zip(&traj.emitted).step_by(97) {
            assert!((1.0 - s.norm2() - e.a - e.b).abs() < 1e-8, "t = {}", s.t);
        }
    }
}

#[test]
fn emitter_decay_removes_probability_from_both_channels() {
    let ideal = cs(0.02, 0.08);
    let leaky = ideal.with_decay(1e-3, 1e-3, 1e-3).unwrap();
    let run = |p: &SystemParams| {
        integrate_full(
            p,
            &AmplitudeState::excited_qd(),
            2000.0,
            &StepControl::adaptive(1e-10),
        )
        .unwrap()
    };
    let (a, b) = (run(&ideal), run(&leaky));
    let (ea, eb) = (a.final_emission(), b.final_emission());
    assert!(eb.a < ea.a && eb.b < ea.b);
    assert!(b.last().norm2() + eb.a + eb.b < 1.0 - 1e-3);
}

#[test]
fn dark_state_overlap_is_conserved_with_fixed_steps() {
    let p = cs(0.01, 0.05);
    let cd = dark_state(&p).unwrap().amplitudes();
    let traj = integrate_full(
        &p,
        &AmplitudeState::excited_qd(),
        5000.0,
        &StepControl::fixed(0.01),
    )
    .unwrap();
    let o0 = traj.samples[0].overlap(&cd);
    for s in &traj.samples {
        assert!((s.overlap(&cd) - o0).norm() < 1e-11);
    }
}

#[test]
fn cavity_closed_form_equals_slaved_reduced_solution() {
    for (g_q, g_a, g_b) in [
        (0.01, 0.05, 0.05 / 45f64.sqrt()),
        (0.03, 0.02, 0.01),
        (0.05, 0.05, 0.05),
    ] {
        let p = SystemParams::new(g_q, g_a, g_b).unwrap();
        for t in [0.0, 10.0, 300.0, 1e4] {
            let (a, b) = closed_form_cavity(&p, t).unwrap();
            let (sa, sb) = slaved_cavity(&p, &reduced_propagate(&p, t).unwrap());
            assert!(
                (a - sa).norm() < 1e-14 && (b - sb).norm() < 1e-14,
                "t = {t}"
            );
        }
    }
}

#[test]
fn integrated_emission_matches_analytic_route() {
    let p = cs(0.005, 0.02);
    let analytic = emission_probabilities_analytic(&p).unwrap();
    let traj = integrate_full(
        &p,
        &AmplitudeState::excited_qd(),
        3e5,
        &StepControl::adaptive(1e-10),
    )
    .unwrap();
    let e = traj.final_emission();
    assert!(((e.a - analytic.p_a) / analytic.p_a).abs() < 2e-3);
    assert!(((e.b - analytic.p_b) / analytic.p_b).abs() < 2e-3);
    // what is left behind is the dark component
    assert!((traj.last().norm2() - analytic.p_dark).abs() < 2e-3);
}
