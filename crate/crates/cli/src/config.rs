//! Flat dotted-key run configuration (`scenario.axes.n1.theta = 0.0`).
//!
//! Files are parsed as TOML, flattened to dotted keys and read against a
//! fixed key set; anything left over is rejected by name. `to_text` writes
//! every key back out in a fixed order and is the echo stored in records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use everett_core::analytic::TailIntegralSpec;
use everett_core::eprb::{Backend, CouplingMode, LatticeEngine, PacketPolicy, ScenarioKind, ScenarioSpec};
use everett_core::evolution::{FrameMode, StageTimes};
use everett_core::model::{SpinAxis, WavepacketSpec};
use everett_core::{Boundary, Lattice, C64};
use toml::Value;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at {}: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DhShape {
    Random,
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub backend: Backend,
    pub engine: LatticeEngine,
    pub seed: u64,
    pub quiet: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSettings {
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DhSettings {
    pub kind: ScenarioKind,
    pub sites: usize,
    pub alpha: f64,
    pub shape: DhShape,
    /// Number of fictitious draws compared, starting at the run seed.
    pub draws: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailSettings {
    pub spec: TailIntegralSpec,
    pub grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraSettings {
    pub sites: usize,
    pub trials: usize,
    /// Swap in a parity rule that skips one mode; the check must fail.
    pub fault: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub run: RunSettings,
    pub scan: ScanSettings,
    pub dh: DhSettings,
    pub tail: TailSettings,
    pub algebra: AlgebraSettings,
    /// Keys present in the parsed text.
    present: BTreeSet<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSpec::default_eprb(),
            run: RunSettings { backend: Backend::Both, engine: LatticeEngine::Factorized, seed: 0, quiet: false },
            scan: ScanSettings { points: 13 },
            dh: DhSettings { kind: ScenarioKind::Eprb, sites: 3, alpha: 1.0, shape: DhShape::Random, draws: 3 },
            tail: TailSettings {
                spec: TailIntegralSpec {
                    alpha: 1.0,
                    mass: 1.0,
                    hbar: 1.0,
                    spread_time: 0.5,
                    after_time: 0.25,
                    aperture: 0.0,
                    dim: 3,
                },
                grid: vec![0.0, 4.0, 9.0, 16.0, 25.0],
            },
            algebra: AlgebraSettings { sites: 2, trials: 64, fault: false },
            present: BTreeSet::new(),
        }
    }
}

const ENTITIES: [&str; 5] = ["s1", "s2", "o1", "o2", "c"];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

struct Reader {
    values: BTreeMap<String, Value>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.values.remove(key)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Float(x)) => Ok(x),
            Some(Value::Integer(i)) => Ok(i as f64),
            Some(v) => Err(ConfigError::new(key, format!("expected a number, got {v}"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if i >= 0 => Ok(i as usize),
            Some(v) => Err(ConfigError::new(key, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        self.usize(key, default as usize).map(|v| v as u64)
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(b),
            Some(v) => Err(ConfigError::new(key, format!("expected true or false, got {v}"))),
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some(Value::String(s)) => options.iter().find(|o| o.0 == s).map(|o| o.1).ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                ConfigError::new(key, format!("'{s}' is not one of {}", names.join("|")))
            }),
            Some(v) => Err(ConfigError::new(key, format!("expected a string, got {v}"))),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(ConfigError::new(key, format!("expected numbers, got {other}"))),
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
            Some(v) => Err(ConfigError::new(key, format!("expected an array, got {v}"))),
        }
    }

    fn vec3(&mut self, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        match self.floats(key)? {
            None => Ok(default),
            Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
            Some(v) => Err(ConfigError::new(key, format!("expected 3 components, got {}", v.len()))),
        }
    }
}

const KINDS: [(&str, ScenarioKind); 2] = [("eprb", ScenarioKind::Eprb), ("single_observer", ScenarioKind::SingleObserver)];
const BACKENDS: [(&str, Backend); 3] =
    [("lattice", Backend::Lattice), ("analytic", Backend::Analytic), ("both", Backend::Both)];
const ENGINES: [(&str, LatticeEngine); 2] = [("factorized", LatticeEngine::Factorized), ("sparse", LatticeEngine::Sparse)];
const FRAMES: [(&str, FrameMode); 2] = [("comoving", FrameMode::Comoving), ("lab", FrameMode::Lab)];
const POLICIES: [(&str, PacketPolicy); 2] = [("strict", PacketPolicy::Strict), ("renormalize", PacketPolicy::Renormalize)];
const BOUNDARIES: [(&str, Boundary); 2] = [("open", Boundary::Open), ("periodic", Boundary::Periodic)];
const SHAPES: [(&str, DhShape); 2] = [("random", DhShape::Random), ("uniform", DhShape::Uniform)];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], v: T) -> &'static str {
    options.iter().find(|o| o.1 == v).map(|o| o.0).expect("value listed in options")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::new("", e.message().to_string()))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        let present: BTreeSet<String> = values.keys().cloned().collect();
        let mut r = Reader { values };
        let d = RunConfig::default();

        let kind = r.choice("scenario.kind", ScenarioKind::Eprb, &KINDS)?;
        let mut s = match kind {
            ScenarioKind::Eprb => ScenarioSpec::default_eprb(),
            ScenarioKind::SingleObserver => ScenarioSpec::default_single(),
        };
        for (p, key) in ["n1", "n2"].iter().enumerate() {
            let base = format!("scenario.axes.{key}");
            let has_t = present.contains(&format!("{base}.theta"));
            let has_p = present.contains(&format!("{base}.phi"));
            if has_t != has_p {
                let missing = if has_t { "phi" } else { "theta" };
                return Err(ConfigError::new(format!("{base}.{missing}"), "axis needs both theta and phi"));
            }
            s.axes[p] = SpinAxis::new(
                r.f64(&format!("{base}.theta"), s.axes[p].theta)?,
                r.f64(&format!("{base}.phi"), s.axes[p].phi)?,
            );
        }
        s.theta = r.f64("scenario.theta", s.theta)?;
        s.beta = r.f64("scenario.beta", s.beta)?;
        let finite = r.choice("scenario.coupling", false, &[("sudden", false), ("finite", true)])?;
        if finite {
            s.coupling = CouplingMode::Finite {
                kappa: r.f64("scenario.kappa", s.theta)?,
                kappa_c: r.f64("scenario.kappa_c", s.beta)?,
            };
        } else {
            for key in ["scenario.kappa", "scenario.kappa_c"] {
                if present.contains(key) {
                    return Err(ConfigError::new(key, "only valid with scenario.coupling = \"finite\""));
                }
            }
        }
        s.apertures = [r.f64("scenario.apertures.o1", s.apertures[0])?, r.f64("scenario.apertures.o2", s.apertures[1])?];
        s.aperture_c = r.f64("scenario.aperture_c", s.aperture_c)?;
        let t = s.times;
        s.times = StageTimes {
            t0: r.f64("scenario.times.t0", t.t0)?,
            t1: r.f64("scenario.times.t1", t.t1)?,
            t2: r.f64("scenario.times.t2", t.t2)?,
            t3: r.f64("scenario.times.t3", t.t3)?,
            t4: r.f64("scenario.times.t4", t.t4)?,
        };
        s.times.validate().map_err(|e| ConfigError::new("scenario.times", e.to_string()))?;
        s.query_23 = r.f64("scenario.query.t23", s.query_23)?;
        s.query_45 = r.f64("scenario.query.t45", s.query_45)?;
        s.hbar = r.f64("scenario.hbar", s.hbar)?;
        s.frame = r.choice("scenario.frame", s.frame, &FRAMES)?;
        s.packet_policy = r.choice("scenario.packet_policy", s.packet_policy, &POLICIES)?;
        s.epsilon = r.f64("scenario.epsilon", s.epsilon)?;
        s.spin = [
            C64::new(r.f64("scenario.spin.b1.re", s.spin[0].re)?, r.f64("scenario.spin.b1.im", s.spin[0].im)?),
            C64::new(r.f64("scenario.spin.b2.re", s.spin[1].re)?, r.f64("scenario.spin.b2.im", s.spin[1].im)?),
        ];
        let lat = &s.lattice;
        s.lattice = Lattice::new(
            r.usize("lattice.dim", lat.dim())?,
            r.usize("lattice.sites", lat.sites_per_axis())?,
            r.f64("lattice.spacing", lat.spacing())?,
            r.choice("lattice.boundary", lat.boundary(), &BOUNDARIES)?,
        )
        .map_err(|e| ConfigError::new("lattice", e.to_string()))?;
        let e = &mut s.entities;
        for (name, p) in ENTITIES.iter().zip([&mut e.s1, &mut e.s2, &mut e.o1, &mut e.o2, &mut e.c]) {
            let base = format!("entity.{name}");
            *p = WavepacketSpec {
                center: r.vec3(&format!("{base}.center"), p.center)?,
                velocity: r.vec3(&format!("{base}.velocity"), p.velocity)?,
                alpha: r.f64(&format!("{base}.alpha"), p.alpha)?,
                mass: r.f64(&format!("{base}.mass"), p.mass)?,
            };
        }

        let run = RunSettings {
            backend: r.choice("run.backend", d.run.backend, &BACKENDS)?,
            engine: r.choice("run.engine", d.run.engine, &ENGINES)?,
            seed: r.u64("run.seed", d.run.seed)?,
            quiet: r.bool("run.quiet", d.run.quiet)?,
        };
        let scan = ScanSettings { points: r.usize("scan.points", d.scan.points)? };
        if scan.points < 2 {
            return Err(ConfigError::new("scan.points", "need at least 2 grid points"));
        }
        let dh = DhSettings {
            kind: r.choice("dh.scenario", d.dh.kind, &KINDS)?,
            sites: r.usize("dh.sites", d.dh.sites)?,
            alpha: r.f64("dh.alpha", d.dh.alpha)?,
            shape: r.choice("dh.shape", d.dh.shape, &SHAPES)?,
            draws: r.usize("dh.draws", d.dh.draws)?,
        };
        if dh.sites == 0 {
            return Err(ConfigError::new("dh.sites", "must be positive"));
        }
        let ts = d.tail.spec;
        let tail = TailSettings {
            spec: TailIntegralSpec {
                alpha: r.f64("tail.alpha", ts.alpha)?,
                mass: r.f64("tail.mass", ts.mass)?,
                hbar: r.f64("tail.hbar", ts.hbar)?,
                spread_time: r.f64("tail.spread_time", ts.spread_time)?,
                after_time: r.f64("tail.after_time", ts.after_time)?,
                aperture: 0.0,
                dim: r.usize("tail.dim", ts.dim)?,
            },
            grid: r.floats("tail.grid")?.unwrap_or(d.tail.grid),
        };
        let algebra = AlgebraSettings {
            sites: r.usize("algebra.sites", d.algebra.sites)?,
            trials: r.usize("algebra.trials", d.algebra.trials)?,
            fault: r.bool("algebra.fault", d.algebra.fault)?,
        };
        if let Some(key) = r.values.keys().next() {
            return Err(ConfigError::new(key.clone(), "unknown key"));
        }
        Ok(Self { scenario: s, run, scan, dh, tail, algebra, present })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn is_present(&self, key: &str) -> bool {
        self.present.contains(key)
    }

    /// First key of `keys` missing from the parsed text.
    pub fn require(&self, keys: &[&str]) -> Result<()> {
        match keys.iter().find(|k| !self.is_present(k)) {
            Some(k) => Err(ConfigError::new(*k, "required key missing")),
            None => Ok(()),
        }
    }

    /// Every key with its value, one `key = value` line each, in a fixed
    /// order. Parsing the output reproduces this configuration.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(String, String)> = Vec::new();
        let mut f = |k: &str, v: f64| lines.push((k.into(), fmt_f64(v)));
        let s = &self.scenario;
        for (p, key) in ["n1", "n2"].iter().enumerate() {
            f(&format!("scenario.axes.{key}.theta"), s.axes[p].theta);
            f(&format!("scenario.axes.{key}.phi"), s.axes[p].phi);
        }
        f("scenario.theta", s.theta);
        f("scenario.beta", s.beta);
        if let CouplingMode::Finite { kappa, kappa_c } = s.coupling {
            f("scenario.kappa", kappa);
            f("scenario.kappa_c", kappa_c);
        }
        f("scenario.apertures.o1", s.apertures[0]);
        f("scenario.apertures.o2", s.apertures[1]);
        f("scenario.aperture_c", s.aperture_c);
        let t = s.times;
        for (k, v) in [("t0", t.t0), ("t1", t.t1), ("t2", t.t2), ("t3", t.t3), ("t4", t.t4)] {
            f(&format!("scenario.times.{k}"), v);
        }
        f("scenario.query.t23", s.query_23);
        f("scenario.query.t45", s.query_45);
        f("scenario.hbar", s.hbar);
        f("scenario.epsilon", s.epsilon);
        f("scenario.spin.b1.re", s.spin[0].re);
        f("scenario.spin.b1.im", s.spin[0].im);
        f("scenario.spin.b2.re", s.spin[1].re);
        f("scenario.spin.b2.im", s.spin[1].im);
        f("lattice.spacing", s.lattice.spacing());
        let e = &s.entities;
        for (name, p) in ENTITIES.iter().zip([&e.s1, &e.s2, &e.o1, &e.o2, &e.c]) {
            f(&format!("entity.{name}.alpha"), p.alpha);
            f(&format!("entity.{name}.mass"), p.mass);
        }
        f("dh.alpha", self.dh.alpha);
        let ts = &self.tail.spec;
        for (k, v) in [
            ("alpha", ts.alpha),
            ("mass", ts.mass),
            ("hbar", ts.hbar),
            ("spread_time", ts.spread_time),
            ("after_time", ts.after_time),
        ] {
            f(&format!("tail.{k}"), v);
        }

        let mut put = |k: &str, v: String| lines.push((k.into(), v));
        let q = |x: &str| format!("\"{x}\"");
        put("scenario.kind", q(name_of(&KINDS, s.kind)));
        put(
            "scenario.coupling",
            q(if matches!(s.coupling, CouplingMode::Finite { .. }) { "finite" } else { "sudden" }),
        );
        put("scenario.frame", q(name_of(&FRAMES, s.frame)));
        put("scenario.packet_policy", q(name_of(&POLICIES, s.packet_policy)));
        put("lattice.dim", s.lattice.dim().to_string());
        put("lattice.sites", s.lattice.sites_per_axis().to_string());
        put("lattice.boundary", q(name_of(&BOUNDARIES, s.lattice.boundary())));
        for (name, p) in ENTITIES.iter().zip([&e.s1, &e.s2, &e.o1, &e.o2, &e.c]) {
            put(&format!("entity.{name}.center"), fmt_vec(&p.center));
            put(&format!("entity.{name}.velocity"), fmt_vec(&p.velocity));
        }
        put("run.backend", q(name_of(&BACKENDS, self.run.backend)));
        put("run.engine", q(name_of(&ENGINES, self.run.engine)));
        put("run.seed", self.run.seed.to_string());
        put("run.quiet", self.run.quiet.to_string());
        put("scan.points", self.scan.points.to_string());
        put("dh.scenario", q(name_of(&KINDS, self.dh.kind)));
        put("dh.sites", self.dh.sites.to_string());
        put("dh.shape", q(name_of(&SHAPES, self.dh.shape)));
        put("dh.draws", self.dh.draws.to_string());
        put("tail.dim", self.tail.spec.dim.to_string());
        put("tail.grid", fmt_vec(&self.tail.grid));
        put("algebra.sites", self.algebra.sites.to_string());
        put("algebra.trials", self.algebra.trials.to_string());
        put("algebra.fault", self.algebra.fault.to_string());

        lines.sort_by(|a, b| a.0.cmp(&b.0));
        lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Shortest representation that parses back to the same bits, always in
/// TOML float syntax.
fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", parts.join(", "))
}
