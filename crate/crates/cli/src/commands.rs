//! Command implementations. Each returns the lines of its human-readable
//! report or a `Failure` carrying the exit code.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use everett_core::analytic::{fit_tail_slope, tail_scan, TailRow};
use everett_core::dh::{
    closed_form_observer_field, dense_v, dh_transform_operator, expectation_equivalence, frobenius, generator_checks,
    generator_probe, vacuum_report, DhScenario, FictitiousShape, GeneratorChecks,
};
use everett_core::eprb::{run_eprb, scan_correlation, ScanRow, ScenarioKind, ScenarioSpec};
use everett_core::evolution::{dense_propagator, reachable_basis, FreeKernel, InteractionKind};
use everett_core::fock::dense::MAX_FULL_FOCK_MODES;
use everett_core::fock::{check_car_with, CarViolation, FockMatrix, ModeSpace, OperatorTerm, ParityRule, SectorBasis, SpeciesSpec};
use everett_core::model::{build_free_hamiltonian, number_operator};
use everett_core::tolerances as tol;
use everett_core::{Error, C64};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{ConfigError, DhShape, RunConfig};
use crate::record::{num, write_densities, ResultRecord};

#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or scenario: exit 2.
    Config(String),
    /// A check failed or a computation did not succeed: exit 1.
    Check(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Check(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Check(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn core(e: Error) -> Failure {
    match e {
        Error::Audit { .. } | Error::Lattice(_) | Error::Species(_) | Error::Unresolved { .. } => {
            Failure::Config(e.to_string())
        }
        other => Failure::Check(other.to_string()),
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Check(format!("cannot write {}: {e}", path.display()))
}

pub struct Context {
    pub config: RunConfig,
    /// True when the configuration came from a file rather than defaults.
    pub from_file: bool,
    pub out: Option<PathBuf>,
}

impl Context {
    fn out_file(&self, name: &str) -> Result<Option<PathBuf>, Failure> {
        match &self.out {
            None => Ok(None),
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
                Ok(Some(dir.join(name)))
            }
        }
    }

    fn seed(&self) -> u64 {
        self.config.run.seed
    }
}

pub type Report = Vec<String>;

// ---------------------------------------------------------------- algebra

fn describe_mode(space: &ModeSpace, r: usize) -> String {
    let m = space.decode(r);
    format!("{} label {} cell {}", space.species()[m.species].id, m.internal, m.cell)
}

fn describe_violation(space: &ModeSpace, v: &CarViolation) -> String {
    format!(
        "{:?} identity fails for pair ({}, {}) on configuration {:#b}",
        v.identity,
        describe_mode(space, v.r),
        describe_mode(space, v.s),
        v.config
    )
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Mini EPRB on one cell: every entity fits in 10 modes.
pub fn mini_eprb(base: &ScenarioSpec) -> Result<ScenarioSpec, Failure> {
    let mut s = base.clone();
    if s.kind != ScenarioKind::Eprb {
        s = ScenarioSpec::default_eprb();
    }
    s.lattice = everett_core::Lattice::chain(1, 1.0).map_err(core)?;
    s.packet_policy = everett_core::eprb::PacketPolicy::Renormalize;
    Ok(s)
}

pub fn algebra_check(ctx: &Context) -> Result<Report, Failure> {
    let a = &ctx.config.algebra;
    let rule = if a.fault { ParityRule::IgnoreMode(0) } else { ParityRule::Canonical };
    let mut report = Vec::new();
    let single = vec![
        SpeciesSpec::system("S", 1.0),
        SpeciesSpec::observer("O", 1.0),
        SpeciesSpec::fictitious("Z_S"),
        SpeciesSpec::fictitious("Z_O"),
    ];
    let mut eprb: Vec<SpeciesSpec> = ctx.config.scenario.species_list().into_iter().map(|e| e.0).collect();
    if ctx.config.scenario.kind == ScenarioKind::Eprb {
        eprb.extend(["Z_S1", "Z_S2", "Z_O1", "Z_O2", "Z_C"].map(SpeciesSpec::fictitious));
    }
    for (species, cells) in [(single, a.sites), (eprb, 1)] {
        let space = ModeSpace::new(species, cells).map_err(core)?;
        if space.total() > MAX_FULL_FOCK_MODES {
            let key = if cells == 1 { "scenario.kind" } else { "algebra.sites" };
            return Err(ConfigError {
                key: key.into(),
                message: format!("{} modes exceed the dense limit of {MAX_FULL_FOCK_MODES}", space.total()),
            }
            .into());
        }
        let r = check_car_with(&space, a.trials, rule, ctx.seed()).map_err(core)?;
        if let Some(v) = r.violations.first() {
            return Err(Failure::Check(format!("CAR: {}", describe_violation(&space, v))));
        }
        report.push(format!(
            "CAR: {} modes, {} ordered pairs exact on all {} configurations, {} adjoint trials",
            r.modes,
            r.pairs_checked,
            1u64 << r.modes,
            r.adjoint_trials
        ));
    }

    let spec = mini_eprb(&ctx.config.scenario)?;
    let sch = spec.schedule().map_err(core)?;
    let n = sch.space.total();
    let full = SectorBasis::from_configs(n, (0..(1u128 << n)).collect());
    let mut herm: f64 = 0.0;
    for s in 0..sch.space.species().len() {
        let h = full.matrix(&build_free_hamiltonian(&sch.space, s, &sch.lattice, sch.hbar).map_err(core)?).map_err(core)?;
        herm = herm.max(max_abs(&(&h - h.adjoint())));
    }
    for kind in [InteractionKind::Measurement, InteractionKind::Comparator] {
        let h = full.matrix(&sch.generator(kind).map_err(core)?).map_err(core)? * C64::new(0.0, 1.0);
        herm = herm.max(max_abs(&(&h - h.adjoint())));
    }
    if herm > tol::HERMITICITY {
        return Err(Failure::Check(format!("Hamiltonian not Hermitian: max |H - H†| = {herm:e}")));
    }
    report.push(format!("Hermiticity: free, measurement and comparator Hamiltonians on {n} modes, max |H - H†| = {herm:.1e}"));

    let psi = spec.initial_state().map_err(core)?;
    let sector = reachable_basis(&psi, &sch, &[]).map_err(core)?;
    let mut unit: f64 = 0.0;
    for tq in [spec.query_23, spec.query_45] {
        let u = dense_propagator(&sch, &sector, tq).map_err(core)?;
        unit = unit.max(max_abs(&(u.adjoint() * &u - DMatrix::identity(u.nrows(), u.ncols()))));
    }
    let lat = &ctx.config.scenario.lattice;
    let k = FreeKernel::new(lat, 1.0, ctx.config.scenario.hbar).propagator(spec.query_45);
    unit = unit.max(max_abs(&(k.adjoint() * &k - DMatrix::identity(k.nrows(), k.ncols()))));
    if unit > tol::UNITARITY {
        return Err(Failure::Check(format!("propagator not unitary: max |U†U - 1| = {unit:e}")));
    }
    report.push(format!(
        "Unitarity: staged propagator on {} sector states and {}-cell free kernel, max |U†U - 1| = {unit:.1e}",
        sector.dim(),
        lat.cell_count()
    ));
    Ok(report)
}

// ---------------------------------------------------------------- run-eprb

pub fn run_eprb_cmd(ctx: &Context) -> Result<Report, Failure> {
    let c = &ctx.config;
    if ctx.from_file {
        let mut keys = vec!["scenario.axes.n1.theta", "scenario.axes.n1.phi"];
        if c.scenario.kind == ScenarioKind::Eprb {
            keys.extend(["scenario.axes.n2.theta", "scenario.axes.n2.phi"]);
        }
        c.require(&keys)?;
    }
    let run = run_eprb(&c.scenario, c.run.backend, c.run.engine).map_err(core)?;
    let record = ResultRecord::from_run(&run, c, "run-eprb", ctx.seed());
    record.validate().map_err(Failure::Check)?;
    let mut report = Vec::new();
    for p in record.probabilities.iter().filter(|p| p.label == 1) {
        report.push(format!("{:<8} {} {:<3} P1 = {}", p.backend, p.window, p.species, num(p.probability)));
    }
    for d in &run.deviations {
        report.push(format!("deviation {} {} label {}: {:.3e}", d.window, d.species, d.label, d.abs));
    }
    match ctx.out_file("record.json")? {
        Some(path) => {
            record.write_json(&path).map_err(|e| io(&path, e))?;
            let dens = path.with_file_name("densities.csv");
            write_densities(&dens, &run.fields).map_err(|e| io(&dens, e))?;
            report.push(format!("wrote {} and {}", path.display(), dens.display()));
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&record).expect("record serializes"));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------- scan

pub fn grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| PI * k as f64 / (points - 1) as f64).collect()
}

fn scan_csv<W: std::io::Write>(w: W, rows: &[ScanRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["theta12_rad", "p_c1", "p_c1_normalized", "backend", "beta", "p_c1_normalized_beta2"])?;
    for r in rows {
        w.write_record([
            num(r.theta12_rad),
            num(r.p_c1),
            num(r.p_c1_normalized),
            r.backend.clone(),
            num(r.beta),
            num(r.p_c1_normalized_beta2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn scan_cmd(ctx: &Context) -> Result<Report, Failure> {
    let c = &ctx.config;
    if ctx.from_file {
        c.require(&["scenario.axes.n1.theta", "scenario.axes.n1.phi"])?;
    }
    if c.scenario.kind != ScenarioKind::Eprb {
        return Err(ConfigError { key: "scenario.kind".into(), message: "scan needs an eprb scenario".into() }.into());
    }
    let rows = scan_correlation(&c.scenario, &grid(c.scan.points), c.run.backend).map_err(core)?;
    let mut report = Vec::new();
    for backend in ["analytic", "lattice"] {
        let dev = rows
            .iter()
            .filter(|r| r.backend == backend)
            .map(|r| (r.p_c1_normalized - 0.5 * (1.0 - r.theta12_rad.cos())).abs())
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        if let Some(d) = dev {
            report.push(format!("{backend}: max |normalized - (1 - cos)/2| = {d:.3e} over {} points", c.scan.points));
        }
    }
    match ctx.out_file("scan.csv")? {
        Some(path) => {
            let f = std::fs::File::create(&path).map_err(|e| io(&path, e))?;
            scan_csv(f, &rows).map_err(|e| io(&path, e))?;
            report.push(format!("wrote {}", path.display()));
        }
        None => scan_csv(std::io::stdout().lock(), &rows).map_err(|e| io(Path::new("stdout"), e))?,
    }
    Ok(report)
}

// ---------------------------------------------------------------- dh-check

#[derive(Clone, Debug, Serialize)]
pub struct DhCheckReport {
    pub scenario: String,
    pub sites: usize,
    pub modes: usize,
    pub seeds: Vec<u64>,
    pub vacuum_infidelity: Vec<f64>,
    pub fidelity_bound: f64,
    pub generators: GeneratorChecks,
    pub generator_method: String,
    pub closed_form_modes: usize,
    pub closed_form_error: f64,
    pub expectation_deviation: f64,
    pub passed: bool,
    pub failure: Option<String>,
}

fn dh_window(c: &RunConfig, kind: ScenarioKind, sites: usize) -> Result<ScenarioSpec, Failure> {
    let mut base = if c.scenario.kind == kind {
        c.scenario.clone()
    } else {
        match kind {
            ScenarioKind::Eprb => ScenarioSpec::default_eprb(),
            ScenarioKind::SingleObserver => ScenarioSpec::default_single(),
        }
    };
    base.kind = kind;
    base.static_window(sites, c.dh.alpha).map_err(core)
}

pub fn dh_check(ctx: &Context) -> Result<Report, Failure> {
    let c = &ctx.config;
    let kind = c.dh.kind;
    let spec = dh_window(c, kind, c.dh.sites)?;
    let seeds: Vec<u64> = (0..c.dh.draws.max(1) as u64).map(|k| ctx.seed() + k).collect();
    let shape = |seed| match c.dh.shape {
        DhShape::Random => FictitiousShape::Random { seed },
        DhShape::Uniform => FictitiousShape::Uniform,
    };
    let bound = match kind {
        ScenarioKind::Eprb => tol::DH_EPRB_FIDELITY,
        ScenarioKind::SingleObserver => tol::DH_SINGLE_FIDELITY,
    };

    let mut infidelity = Vec::new();
    let mut modes = 0;
    for &seed in &seeds {
        let dh = DhScenario::from_scenario(&spec, shape(seed)).map_err(core)?;
        modes = dh.space.total();
        infidelity.push(1.0 - vacuum_report(&dh).map_err(core)?.fidelity);
    }

    let dh = DhScenario::from_scenario(&spec, shape(seeds[0])).map_err(core)?;
    let (generators, method) = if dh.space.total() <= MAX_FULL_FOCK_MODES {
        (generator_checks(&dh).map_err(core)?, "dense")
    } else {
        let gens = dh.generators().map_err(core)?;
        let probes = [dh.modified_state().map_err(core)?, everett_core::fock::SectorState::vacuum(dh.space.total())];
        (generator_probe(&gens, &probes), "sparse probe")
    };

    // closed form on the smallest observer window that stays dense
    let small = dh_window(c, ScenarioKind::SingleObserver, 2)?;
    let sdh = DhScenario::from_scenario(&small, shape(seeds[0])).map_err(core)?;
    let n = sdh.space.total();
    let v = dense_v(&sdh).map_err(core)?;
    let mut closed: f64 = 0.0;
    for cell in 0..small.lattice.cell_count() {
        for label in [0u8, 1] {
            let r = sdh.space.mode(1, label, cell).map_err(core)?.rank;
            let chi = FockMatrix::annihilation(n, r, ParityRule::Canonical).map_err(core)?;
            let want = closed_form_observer_field(&sdh, 1, label, cell).map_err(core)?;
            closed = closed.max(frobenius(&dh_transform_operator(&chi, &v).add_scaled(&want, C64::new(-1.0, 0.0))));
        }
    }

    let mut observables: Vec<Vec<OperatorTerm>> = vec![(0..dh.physical_modes()).map(OperatorTerm::number).collect()];
    for s in 0..dh.n_physical() {
        for &label in &dh.space.species()[s].labels {
            observables.push(number_operator(&dh.space, s, label).map_err(core)?);
        }
    }
    let mut deviation: f64 = 0.0;
    for o in &observables {
        deviation = deviation.max(expectation_equivalence(&spec, o, &seeds).map_err(core)?.max_deviation);
    }

    let worst = infidelity.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let failure = if worst > bound {
        Some(format!("vacuum fidelity: 1 - F = {worst:e} exceeds {bound:e}"))
    } else if generators.skew_residual > tol::DH_COMMUTATOR {
        Some(format!("generator skewness: residual {:e}", generators.skew_residual))
    } else if generators.commutator > tol::DH_COMMUTATOR {
        Some(format!("generator commutation: max |[W_a, W_b]| = {:e}", generators.commutator))
    } else if closed > tol::DH_CLOSED_FORM {
        Some(format!("closed form: Frobenius distance {closed:e}"))
    } else if deviation > tol::DH_FICTITIOUS || seeds.len() < 3 {
        Some(format!("expectation equivalence: deviation {deviation:e} over {} draws", seeds.len()))
    } else {
        None
    };
    let rep = DhCheckReport {
        scenario: format!("{kind:?}").to_lowercase(),
        sites: c.dh.sites,
        modes,
        seeds: seeds.clone(),
        vacuum_infidelity: infidelity,
        fidelity_bound: bound,
        generators,
        generator_method: method.into(),
        closed_form_modes: n,
        closed_form_error: closed,
        expectation_deviation: deviation,
        passed: failure.is_none(),
        failure: failure.clone(),
    };
    let mut report = vec![
        format!("{} window, {} cells, {modes} modes, seeds {:?}", rep.scenario, c.dh.sites, seeds),
        format!("vacuum: max 1 - F = {worst:.2e} (bound {bound:.0e})"),
        format!(
            "generators ({method}): skew {:.1e}, commutator {:.1e}",
            rep.generators.skew_residual, rep.generators.commutator
        ),
        format!("closed form on {n} modes: {closed:.2e}"),
        format!("physical expectations across draws: {deviation:.1e}"),
    ];
    if let Some(path) = ctx.out_file("dh_check.json")? {
        let text = serde_json::to_string_pretty(&rep).expect("report serializes");
        std::fs::write(&path, text + "\n").map_err(|e| io(&path, e))?;
        report.push(format!("wrote {}", path.display()));
    }
    match failure {
        Some(f) => Err(Failure::Check(f)),
        None => Ok(report),
    }
}

// ---------------------------------------------------------------- tail

/// Lower end of the α̃a² range used for the slope fit.
pub const TAIL_FIT_MIN: f64 = 4.0;

fn tail_csv<W: std::io::Write>(w: W, rows: &[TailRow], apertures: &[f64], slope: f64) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["alpha_tilde_a2", "aperture", "abs_i_tilde", "fitted_slope"])?;
    for (r, a) in rows.iter().zip(apertures) {
        w.write_record([num(r.alpha_tilde_a2), num(*a), num(r.abs_i_tilde), num(slope)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn tail_cmd(ctx: &Context) -> Result<Report, Failure> {
    let t = &ctx.config.tail;
    if t.grid.iter().any(|x| !(*x >= 0.0)) {
        return Err(ConfigError { key: "tail.grid".into(), message: "values must be non-negative".into() }.into());
    }
    let fit_points = t.grid.iter().filter(|x| **x >= TAIL_FIT_MIN).count();
    if fit_points < 2 {
        return Err(ConfigError {
            key: "tail.grid".into(),
            message: format!("need at least two values >= {TAIL_FIT_MIN} for the slope fit"),
        }
        .into());
    }
    let rows = tail_scan(&t.spec, &t.grid).map_err(|e| Failure::Check(e.to_string()))?;
    let fit: Vec<TailRow> = rows.iter().filter(|r| r.alpha_tilde_a2 >= TAIL_FIT_MIN).cloned().collect();
    let slope = fit_tail_slope(&fit);
    let apertures: Vec<f64> = t.grid.iter().map(|x| t.spec.with_scaled_aperture(*x).aperture).collect();
    let mut report = vec![format!(
        "fitted slope {slope:.4} over {fit_points} points with alpha~a^2 >= {TAIL_FIT_MIN} (target {} +/- {:.0}%)",
        tol::TAIL_SLOPE,
        100.0 * tol::TAIL_SLOPE_REL
    )];
    match ctx.out_file("tail.csv")? {
        Some(path) => {
            let f = std::fs::File::create(&path).map_err(|e| io(&path, e))?;
            tail_csv(f, &rows, &apertures, slope).map_err(|e| io(&path, e))?;
            report.push(format!("wrote {}", path.display()));
        }
        None => tail_csv(std::io::stdout().lock(), &rows, &apertures, slope).map_err(|e| io(Path::new("stdout"), e))?,
    }
    if ((slope - tol::TAIL_SLOPE) / tol::TAIL_SLOPE).abs() > tol::TAIL_SLOPE_REL {
        return Err(Failure::Check(format!("tail slope {slope} outside {} +/- 10%", tol::TAIL_SLOPE)));
    }
    Ok(report)
}
