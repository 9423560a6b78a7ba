use everett_core::dh::*;
use everett_core::eprb::{ScenarioKind, ScenarioSpec};
use everett_core::evolution::FrameMode;
use everett_core::fock::{FockMatrix, OperatorTerm, ParityRule};
use everett_core::C64;

fn tiny(kind: ScenarioKind, sites: usize, alpha: f64) -> ScenarioSpec {
    let mut s = match kind {
        ScenarioKind::Eprb => ScenarioSpec::default_eprb(),
        ScenarioKind::SingleObserver => ScenarioSpec::default_single(),
    };
    s.spin = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    s.static_window(sites, alpha).unwrap()
}

#[test]
fn single_observer_maps_to_vacuum() {
    let spec = tiny(ScenarioKind::SingleObserver, 3, 1.0);
    for shape in [FictitiousShape::Uniform, FictitiousShape::Random { seed: 7 }] {
        let r = vacuum_report(&DhScenario::from_scenario(&spec, shape).unwrap()).unwrap();
        assert!(r.fidelity >= 1.0 - 1e-9, "{r:?}");
        assert!(r.roundtrip < 1e-10, "{r:?}");
    }
}

#[test]
fn eprb_maps_to_vacuum_on_three_cells() {
    let spec = tiny(ScenarioKind::Eprb, 3, 1.0);
    let r = vacuum_report(&DhScenario::from_scenario(&spec, FictitiousShape::Random { seed: 3 }).unwrap()).unwrap();
    assert!(r.fidelity >= 1.0 - 1e-8, "{r:?}");
}

#[test]
fn creator_block_reproduces_packet_factor() {
    let spec = tiny(ScenarioKind::SingleObserver, 2, 1.0);
    let dh = DhScenario::from_scenario(&spec, FictitiousShape::Random { seed: 1 }).unwrap();
    let gens = dh.generators().unwrap();
    let vac = everett_core::fock::SectorState::vacuum(dh.space.total());
    // W_O|0⟩ then W_S: A_O A_S|0⟩ equals ψ′ up to the commuting order
    let a_s = everett_core::fock::apply_terms(&vac, &gens[0].creator);
    let both = everett_core::fock::apply_terms(&a_s, &gens[1].creator);
    assert!(both.distance(&dh.modified_state().unwrap()) < 1e-12);
}

#[test]
fn generators_are_skew_and_commute() {
    for kind in [ScenarioKind::SingleObserver] {
        let dh = DhScenario::from_scenario(&tiny(kind, 2, 1.0), FictitiousShape::Random { seed: 5 }).unwrap();
        let c = generator_checks(&dh).unwrap();
        assert_eq!(c.skew_residual, 0.0);
        assert!(c.commutator < 1e-15, "{c:?}");
    }
}

#[test]
fn transformed_observer_field_matches_closed_form() {
    let spec = tiny(ScenarioKind::SingleObserver, 2, 1.0);
    let dh = DhScenario::from_scenario(&spec, FictitiousShape::Random { seed: 11 }).unwrap();
    assert!(dh.space.total() <= 14);
    let v = dense_v(&dh).unwrap();
    let n = dh.space.total();
    let gens = dh.generators().unwrap();
    for cell in 0..2 {
        for label in [0u8, 1] {
            let r = dh.space.mode(1, label, cell).unwrap().rank;
            let chi = FockMatrix::annihilation(n, r, ParityRule::Canonical).unwrap();
            let got = dh_transform_operator(&chi, &v);
            let want = closed_form_observer_field(&dh, 1, label, cell).unwrap();
            let diff = frobenius(&got.add_scaled(&want, C64::new(-1.0, 0.0)));
            assert!(diff < 1e-9, "cell {cell} label {label}: {diff}");
            if label == 1 {
                // the unaware branch commutes with every generator, so V cancels up to V†V roundoff
                for g in &gens {
                    assert!(dense_generator(g, n).unwrap().commutator(&chi).is_zero());
                }
                assert!(frobenius(&got.add_scaled(&chi, C64::new(-1.0, 0.0))) < 1e-13);
            }
        }
    }
}

#[test]
fn footprint_far_from_packet_is_negligible() {
    // narrow observer packet on cell 0 of a two-cell window
    let mut spec = tiny(ScenarioKind::SingleObserver, 2, 60.0);
    spec.entities.o1.center = [0.5, 0.0, 0.0];
    let gauss = FictitiousShape::Gaussian { center: [0.5, 0.0, 0.0], alpha: 60.0 };
    let dh = DhScenario::from_scenario(&spec, gauss).unwrap();
    let v = dense_v(&dh).unwrap();
    let far = locality_footprint(&dh, &v, 1, 0, 1, 1e-6).unwrap();
    assert!(far.total_physical + far.fictitious.iter().sum::<f64>() < 1e-8, "{far:?}");
    let near = locality_footprint(&dh, &v, 1, 0, 0, 1e-6).unwrap();
    assert!(near.support_radius <= 0.0, "{near:?}");
    // a uniform fictitious field spreads only the fictitious weight
    let dh_u = DhScenario::from_scenario(&spec, FictitiousShape::Uniform).unwrap();
    let near_u = locality_footprint(&dh_u, &dense_v(&dh_u).unwrap(), 1, 0, 0, 1e-6).unwrap();
    for (a, b) in near.physical.iter().zip(&near_u.physical) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(near_u.fictitious[1] > 0.1);
}

#[test]
fn physical_expectations_ignore_fictitious_draws() {
    let spec = tiny(ScenarioKind::Eprb, 2, 1.0);
    let dh = DhScenario::from_scenario(&spec, FictitiousShape::Uniform).unwrap();
    let obs: Vec<OperatorTerm> = (0..dh.physical_modes()).map(OperatorTerm::number).collect();
    let r = expectation_equivalence(&spec, &obs, &[1, 2, 3]).unwrap();
    assert!((r.reference - 5.0).abs() < 1e-12);
    assert!(r.max_deviation < 1e-10, "{r:?}");
    let hop = vec![OperatorTerm::hop(C64::new(1.0, 0.0), 0, 1), OperatorTerm::hop(C64::new(1.0, 0.0), 1, 0)];
    let r = expectation_equivalence(&spec, &hop, &[4, 5, 6]).unwrap();
    assert!(r.max_deviation < 1e-10);
    let bad = vec![OperatorTerm::number(dh.physical_modes())];
    assert!(expectation_equivalence(&spec, &bad, &[1]).is_err());
}

#[test]
fn schedule_on_modified_state_matches() {
    let mut spec = tiny(ScenarioKind::Eprb, 2, 1.0);
    spec.frame = FrameMode::Comoving;
    for seed in [1, 2, 3] {
        let dh = DhScenario::from_scenario(&spec, FictitiousShape::Random { seed }).unwrap();
        assert!(pipeline_equivalence(&dh, spec.query_45).unwrap() < 1e-10);
    }
}

#[test]
fn sparse_probe_agrees_with_dense_checks() {
    let dh = DhScenario::from_scenario(&tiny(ScenarioKind::SingleObserver, 2, 1.0), FictitiousShape::Random { seed: 9 }).unwrap();
    let gens = dh.generators().unwrap();
    let psi = dh.modified_state().unwrap();
    let vac = everett_core::fock::SectorState::vacuum(dh.space.total());
    let p = generator_probe(&gens, &[psi, vac]);
    assert!(p.skew_residual < 1e-13 && p.commutator < 1e-13, "{p:?}");
    // a Hermitian stand-in for W is caught
    let mut bad = gens.clone();
    bad[0].terms = bad[0].creator.iter().chain(&everett_core::fock::ops::adjoint_terms(&bad[0].creator)).cloned().collect();
    let vac = everett_core::fock::SectorState::vacuum(dh.space.total());
    let a_vac = everett_core::fock::apply_terms(&vac, &gens[0].creator);
    let q = generator_probe(&bad, &[vac, a_vac]);
    assert!(q.skew_residual > 0.1, "{q:?}");
}
