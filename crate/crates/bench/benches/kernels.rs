use criterion::{black_box, criterion_group, criterion_main, Criterion};
use everett_core::analytic::{tail_integral, TailIntegralSpec};
use everett_core::dh::{vacuum_report, DhScenario, FictitiousShape};
use everett_core::eprb::{run_eprb, Backend, LatticeEngine, ScenarioSpec};
use everett_core::fock::{apply_creation, check_car_with, evolve_exp, ModeSpace, OperatorTerm, ParityRule, SectorState, SpeciesSpec};
use everett_core::C64;

fn car(c: &mut Criterion) {
    let space = ModeSpace::new(vec![SpeciesSpec::system("S", 1.0), SpeciesSpec::observer("O", 1.0)], 3).unwrap();
    c.bench_function("car_12_modes", |b| {
        b.iter(|| check_car_with(black_box(&space), 16, ParityRule::Canonical, 1).unwrap())
    });
}

fn exp(c: &mut Criterion) {
    let space = ModeSpace::new(vec![SpeciesSpec::system("S", 1.0)], 8).unwrap();
    let n = space.total();
    let psi = apply_creation(&SectorState::vacuum(n), 0);
    let gen: Vec<OperatorTerm> = (0..n - 1)
        .flat_map(|k| [OperatorTerm::hop(C64::new(1.0, 0.0), k + 1, k), OperatorTerm::hop(C64::new(1.0, 0.0), k, k + 1)])
        .collect();
    c.bench_function("evolve_exp_hop_chain", |b| {
        b.iter(|| evolve_exp(black_box(&psi), &gen, C64::new(0.0, -0.7)).unwrap())
    });
}

fn lattice_run(c: &mut Criterion) {
    let spec = ScenarioSpec::default_eprb();
    let mut g = c.benchmark_group("eprb");
    g.sample_size(10);
    g.bench_function("factorized_L48", |b| {
        b.iter(|| run_eprb(black_box(&spec), Backend::Lattice, LatticeEngine::Factorized).unwrap())
    });
    g.bench_function("analytic", |b| {
        b.iter(|| run_eprb(black_box(&spec), Backend::Analytic, LatticeEngine::Factorized).unwrap())
    });
    g.finish();
}

fn dh(c: &mut Criterion) {
    let mut spec = ScenarioSpec::default_single();
    spec.spin = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let window = spec.static_window(3, 1.0).unwrap();
    let dh = DhScenario::from_scenario(&window, FictitiousShape::Random { seed: 3 }).unwrap();
    let mut g = c.benchmark_group("dh");
    g.sample_size(10);
    g.bench_function("vacuum_single_3", |b| b.iter(|| vacuum_report(black_box(&dh)).unwrap()));
    g.finish();
}

fn tail(c: &mut Criterion) {
    let spec = TailIntegralSpec { alpha: 1.0, mass: 1.0, hbar: 1.0, spread_time: 0.5, after_time: 0.25, aperture: 0.0, dim: 3 };
    let s = spec.with_scaled_aperture(16.0);
    c.bench_function("tail_integral_3d", |b| b.iter(|| tail_integral(black_box(&s), 0.0).unwrap()));
}

criterion_group!(benches, car, exp, lattice_run, dh, tail);
criterion_main!(benches);
