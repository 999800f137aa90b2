mod common;

use common::{instance, mask_of};
use qama_core::anneal::{
    brute_force, brute_force_ising, default_tolerance, simulated_anneal, time_to_solution,
    BackendConfig, SaConfig, SolverBackend, DEFAULT_BRUTE_CAP,
};
use qama_core::hamiltonian::{assemble_qubo, energy_breakdown, DynamicCoefficients};
use qama_core::{mask_to_spins, Objective};

#[test]
fn annealer_finds_ground_state_on_twelve_spin_instances() {
    let sa = BackendConfig::default();
    let mut hits = 0;
    for seed in 0..100u64 {
        let ising = instance(2, 6, 4, seed).ising();
        let ground = brute_force_ising(&ising, DEFAULT_BRUTE_CAP)
            .unwrap()
            .best_energy;
        let found = sa.solve(&ising, seed).unwrap().best_energy;
        assert!(found >= ground - default_tolerance(ground));
        if found <= ground + default_tolerance(ground) {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn annealer_best_matches_its_state() {
    let ising = instance(2, 5, 3, 4).ising();
    let cfg = SaConfig {
        record_trace: true,
        ..SaConfig::default()
    };
    let r = simulated_anneal(&ising, &cfg, 1);
    let e = ising.energy(&mask_to_spins(&r.best_state)).unwrap();
    assert!((e - r.best_energy).abs() < 1e-9);
    let trace = r.energy_trace.unwrap();
    assert_eq!(trace.len(), cfg.schedule.sweeps);
    assert!(trace.iter().all(|&t| r.best_energy <= t + 1e-9));
}

#[test]
fn ground_state_survives_single_bit_mutation() {
    for seed in 0..30u64 {
        let inst = instance(2, 5, 4, seed);
        let best = brute_force(&inst.qubo).unwrap();
        let n = inst.qubo.n();
        for k in 0..n {
            let e = inst
                .qubo
                .energy_of_mask(&best.best_state.flipped(k))
                .unwrap();
            assert!(e - best.best_energy >= -1e-9);
        }
    }
}

#[test]
fn heavy_penalty_forces_disjoint_heads() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let seq_len = 2 + seed as usize % 4;
        let inst = instance(2, seq_len, 3, seed);
        let n = inst.qubo.n();
        let free = DynamicCoefficients {
            penalty_disabled: true,
            ..inst.coeff
        };
        let free_qubo = assemble_qubo(&inst.j, &inst.h, &free, &inst.shape).unwrap();
        let optimum = brute_force(&free_qubo).unwrap().best_energy;
        let disjoint_best = (0..1usize << n)
            .map(|c| mask_of(c, n))
            .filter(|m| {
                energy_breakdown(m, &inst.j, &inst.h, &free)
                    .unwrap()
                    .h_gamma
                    == 0.0
            })
            .map(|m| free_qubo.energy_of_mask(&m).unwrap())
            .fold(f64::INFINITY, f64::min);
        if disjoint_best > optimum + default_tolerance(optimum) {
            continue;
        }
        let heavy = DynamicCoefficients {
            lambda: 1e3 * inst.j.max_abs(),
            penalty_disabled: false,
            ..inst.coeff
        };
        let qubo = assemble_qubo(&inst.j, &inst.h, &heavy, &inst.shape).unwrap();
        let ground = brute_force(&qubo).unwrap().best_energy;
        let tol = default_tolerance(ground);
        for c in 0..1usize << n {
            let m = mask_of(c, n);
            if qubo.energy_of_mask(&m).unwrap() <= ground + tol {
                let br = energy_breakdown(&m, &inst.j, &inst.h, &heavy).unwrap();
                assert_eq!(br.h_gamma, 0.0, "seed {seed} mask {c:b}");
            }
        }
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} qualifying instances");
}

#[test]
fn glauber_and_softspin_reach_low_energies() {
    let glauber = BackendConfig::Anneal(SaConfig {
        acceptance: qama_core::anneal::Acceptance::Glauber,
        ..SaConfig::default()
    });
    let soft = BackendConfig::SoftSpin(Default::default());
    let mut glauber_hits = 0;
    for seed in 0..20u64 {
        let ising = instance(2, 4, 4, seed).ising();
        let ground = brute_force_ising(&ising, DEFAULT_BRUTE_CAP)
            .unwrap()
            .best_energy;
        let g = glauber.solve(&ising, seed).unwrap().best_energy;
        let s = soft.solve(&ising, seed).unwrap().best_energy;
        assert!(g >= ground - 1e-9 && s >= ground - 1e-9);
        if g <= ground + default_tolerance(ground) {
            glauber_hits += 1;
        }
    }
    assert!(glauber_hits >= 18, "{glauber_hits}/20");
}

#[test]
fn tts_from_measured_probability() {
    let r = time_to_solution(0.5, 1.0).unwrap();
    assert_eq!(r.runs, Some(7));
    let ising = instance(2, 6, 4, 0).ising();
    let ground = brute_force_ising(&ising, DEFAULT_BRUTE_CAP)
        .unwrap()
        .best_energy;
    let p = qama_core::anneal::estimate_success_probability(
        &ising,
        &BackendConfig::default(),
        100,
        0,
        ground,
        None,
    )
    .unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(p >= 0.95);
}
