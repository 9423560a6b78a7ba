use everett_core::eprb::{
    default_grid, lattice_fields, run_eprb, scan_correlation, Backend, LatticeEngine, PacketPolicy, ScenarioSpec,
};
use everett_core::model::SpinAxis;
use everett_core::Lattice;

fn tiny(sites: usize) -> ScenarioSpec {
    let mut s = ScenarioSpec::default_eprb();
    s.lattice = Lattice::chain(sites, 1.0).unwrap();
    s.packet_policy = PacketPolicy::Renormalize;
    for e in [&mut s.entities.s1, &mut s.entities.s2, &mut s.entities.o1, &mut s.entities.o2, &mut s.entities.c] {
        e.alpha = 1.0;
    }
    s.apertures = [1.2, 1.2];
    s.aperture_c = 1.2;
    s.axes = [SpinAxis::new(0.3, 0.2), SpinAxis::new(2.1, -0.7)];
    s.theta = 1.1;
    s.beta = 0.7;
    s
}

#[test]
fn factorized_matches_sparse_on_tiny_lattices() {
    for sites in [3, 4] {
        let spec = tiny(sites);
        for (tq, species) in [(0.3, vec![2, 3, 4]), (0.75, vec![2, 3]), (1.0, vec![4]), (1.25, vec![4])] {
            let a = lattice_fields(&spec, LatticeEngine::Factorized, tq, &species).unwrap();
            let b = lattice_fields(&spec, LatticeEngine::Sparse, tq, &species).unwrap();
            assert_eq!(a.len(), b.len());
            for (fa, fb) in a.iter().zip(&b) {
                assert_eq!((fa.species.as_str(), fa.label), (fb.species.as_str(), fb.label));
                for (x, y) in fa.values.iter().zip(&fb.values) {
                    assert!((x - y).abs() < 1e-9, "L={sites} t={tq} {} {}: {x} vs {y}", fa.species, fa.label);
                }
            }
        }
    }
}

#[test]
fn single_observer_factorized_matches_sparse() {
    let mut spec = tiny(4);
    spec.kind = everett_core::eprb::ScenarioKind::SingleObserver;
    spec.spin = [everett_core::C64::new(0.6, 0.0), everett_core::C64::new(0.0, 0.8)];
    let a = lattice_fields(&spec, LatticeEngine::Factorized, 0.75, &[1]).unwrap();
    let b = lattice_fields(&spec, LatticeEngine::Sparse, 0.75, &[1]).unwrap();
    for (fa, fb) in a.iter().zip(&b) {
        for (x, y) in fa.values.iter().zip(&fb.values) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn default_run_halves_and_tracks() {
    let spec = ScenarioSpec::default_eprb();
    let run = run_eprb(&spec, Backend::Both, LatticeEngine::Factorized).unwrap();
    let l = run.lattice.as_ref().unwrap();
    let a = run.analytic.as_ref().unwrap();
    for id in ["O1", "O2"] {
        assert!((a.probability("t23", id, 1).unwrap() - 0.5).abs() < 1e-12);
        let p1 = l.probability("t23", id, 1).unwrap();
        let p0 = l.probability("t23", id, 0).unwrap();
        assert!((p1 - 0.5).abs() < 1e-2, "{id}: {p1}");
        assert!((p0 + p1 - 1.0).abs() < 1e-9);
    }
    for c in &l.locations {
        assert!(c.error <= 0.5 * spec.lattice.spacing(), "{c:?}");
    }
}

#[test]
fn scan_matches_cosine_law() {
    let spec = ScenarioSpec::default_eprb();
    let rows = scan_correlation(&spec, &default_grid(), Backend::Both).unwrap();
    for r in &rows {
        let want = 0.5 * (1.0 - r.theta12_rad.cos());
        let tol = if r.backend == "analytic" { 1e-6 } else { 1e-2 };
        assert!((r.p_c1_normalized - want).abs() < tol, "{r:?}");
    }
}
