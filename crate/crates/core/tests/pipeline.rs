use nvk_core::config::RunConfig;
use nvk_core::diagnostics::Monitor;
use nvk_core::io::snapshot::{decode, encode};
use nvk_core::kinetic::Simulation;

const SMALL: &str = "x_min = -8
x_max = 8
nx = 161
t_final = 0.5
sample_np = 8
profile = gaussian-bump
profile.phi0_amplitude = -0.05
";

fn run(text: &str) -> (Simulation, Monitor) {
    let rc = RunConfig::parse(text).unwrap();
    let data = rc.profile.build().unwrap();
    let mut sim = Simulation::new(&rc.sim, &data, 1).unwrap();
    let mut monitor = Monitor::new(sim.config(), sim.dt(), data.kinetic_radius, 1);
    loop {
        monitor.record(sim.state()).unwrap();
        if sim.is_done() {
            break;
        }
        sim.advance().unwrap();
    }
    (sim, monitor)
}

#[test]
fn small_run_passes_every_monitor() {
    let (sim, monitor) = run(SMALL);
    let summary = monitor.summary();
    for c in &summary.checks {
        assert!(c.pass, "{}: {}", c.name, c.detail);
    }
    let rows = monitor.rows();
    assert_eq!(rows.len(), sim.steps() + 1);
    let m0 = rows[0].mass_particle;
    assert!(rows
        .iter()
        .all(|r| r.mass_particle.to_bits() == m0.to_bits()));
    assert!(sim.state().slice.psi.iter().all(|&v| v <= 0.0));
}

#[test]
fn final_state_survives_a_snapshot_round_trip() {
    let (sim, _) = run(SMALL);
    let bytes = encode(sim.state(), sim.grid()).unwrap();
    let (grid, state) = decode(&bytes).unwrap();
    assert_eq!(grid, *sim.grid());
    assert_eq!(encode(&state, &grid).unwrap(), bytes);
}

#[test]
fn vacuum_stays_empty() {
    let (sim, monitor) = run("x_min = -6\nx_max = 6\nnx = 121\nt_final = 0.5\nprofile = vacuum\n");
    assert!(sim.state().ensemble.particles.is_empty());
    assert!(sim.state().slice.phi.iter().all(|&v| v == 0.0));
    assert!(monitor.rows().iter().all(|r| r.mass_particle == 0.0));
}
