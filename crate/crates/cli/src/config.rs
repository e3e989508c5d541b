//! Run configuration: TOML parsing and up-front validation.
//!
//! Every key is checked before any compute starts. Problems are collected
//! rather than returned one at a time, so a single invocation reports every
//! unknown, missing, mistyped or out-of-range key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound;

use serde_json::Value;
use spinguide::disorder::{DisorderSpec, SigmaGsSweep, ThresholdSearch};
use spinguide::dynamics::{PhaseDiagramSpec, DEFAULT_SAMPLE_STRIDE, DEFAULT_STEP_PRODUCT};
use spinguide::materials::{HydrogenicSystem, DEFAULT_MAP_DEPTH_RY, P_SI_BOHR_RADIUS_NM, P_SI_RYDBERG_MEV};
use spinguide::{ChainSpec, PotentialKind, PotentialSpec, Trajectory, TransportConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    SpectrumSweep,
    Transport,
    PhaseDiagram,
    DisorderSweep,
    ThresholdSearch,
    Materials,
    HydrogenicMap,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SpectrumSweep => "spectrum-sweep",
            Experiment::Transport => "transport",
            Experiment::PhaseDiagram => "phase-diagram",
            Experiment::DisorderSweep => "disorder-sweep",
            Experiment::ThresholdSearch => "threshold-search",
            Experiment::Materials => "materials",
            Experiment::HydrogenicMap => "hydrogenic-map",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    /// CSV plus an aligned-text copy of every table.
    Table,
}

/// Admissible interval for a numeric key.
#[derive(Debug, Clone, Copy)]
pub struct Range {
    lo: Bound<f64>,
    hi: Bound<f64>,
}

impl Range {
    pub const ANY: Range = Range { lo: Bound::Unbounded, hi: Bound::Unbounded };

    pub fn positive() -> Self {
        Range { lo: Bound::Excluded(0.0), hi: Bound::Unbounded }
    }

    pub fn non_negative() -> Self {
        Range { lo: Bound::Included(0.0), hi: Bound::Unbounded }
    }

    pub fn at_least(lo: f64) -> Self {
        Range { lo: Bound::Included(lo), hi: Bound::Unbounded }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Range { lo: Bound::Included(lo), hi: Bound::Included(hi) }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        Range { lo: Bound::Included(lo), hi: Bound::Excluded(hi) }
    }

    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Range { lo: Bound::Excluded(lo), hi: Bound::Included(hi) }
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let lo = match self.lo {
            Bound::Included(l) => x >= l,
            Bound::Excluded(l) => x > l,
            Bound::Unbounded => true,
        };
        let hi = match self.hi {
            Bound::Included(h) => x <= h,
            Bound::Excluded(h) => x < h,
            Bound::Unbounded => true,
        };
        lo && hi
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lo, self.hi) {
            (Bound::Unbounded, Bound::Unbounded) => write!(f, "finite"),
            (Bound::Included(l), Bound::Unbounded) => write!(f, ">= {l}"),
            (Bound::Excluded(l), Bound::Unbounded) => write!(f, "> {l}"),
            (lo, hi) => {
                let (open, l) = match lo {
                    Bound::Included(l) => ('[', l.to_string()),
                    Bound::Excluded(l) => ('(', l.to_string()),
                    Bound::Unbounded => ('(', "-inf".into()),
                };
                let (close, h) = match hi {
                    Bound::Included(h) => (']', h.to_string()),
                    Bound::Excluded(h) => (')', h.to_string()),
                    Bound::Unbounded => (')', "inf".into()),
                };
                write!(f, "in {open}{l}, {h}{close}")
            }
        }
    }
}

/// Key reader that records problems instead of stopping at the first one.
#[derive(Debug)]
pub struct Params {
    table: toml::Table,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, Value>,
    errors: Vec<String>,
}

impl Params {
    pub fn new(table: toml::Table) -> Self {
        Self {
            table,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
            errors: Vec::new(),
        }
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn has_errors(&self) -> bool {
        !self.errors.is_empty()
    }

    /// Store a derived value so it shows up in the manifest.
    pub fn record(&mut self, key: &str, value: impl Into<Value>) {
        self.resolved.insert(key.to_string(), value.into());
    }

    fn take(&mut self, key: &str) -> Option<toml::Value> {
        self.used.insert(key.to_string());
        self.table.get(key).cloned()
    }

    fn missing(&mut self, key: &str) {
        self.error(format!("{key}: missing required key"));
    }

    fn to_f64(v: &toml::Value) -> Option<f64> {
        match v {
            toml::Value::Float(x) => Some(*x),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn optional_number(&mut self, key: &str, range: Range) -> Option<f64> {
        let value = self.take(key)?;
        let Some(x) = Self::to_f64(&value) else {
            self.error(format!("{key}: expected a number, got {}", value.type_str()));
            return None;
        };
        if !range.contains(x) {
            self.error(format!("{key}: must be {range}, got {x}"));
            return None;
        }
        self.record(key, x);
        Some(x)
    }

    /// Numeric key; a `None` default makes it required. Failures yield NaN.
    pub fn number(&mut self, key: &str, default: Option<f64>, range: Range) -> f64 {
        let present = self.table.contains_key(key);
        match (self.optional_number(key, range), default) {
            (Some(x), _) => x,
            (None, Some(d)) if !present => {
                self.record(key, d);
                d
            }
            (None, None) if !present => {
                self.missing(key);
                f64::NAN
            }
            _ => f64::NAN,
        }
    }

    pub fn integer(&mut self, key: &str, default: Option<u64>, min: u64) -> u64 {
        let Some(value) = self.take(key) else {
            return match default {
                Some(d) => {
                    self.record(key, d);
                    d
                }
                None => {
                    self.missing(key);
                    0
                }
            };
        };
        match value.as_integer() {
            Some(i) if i >= 0 && i as u64 >= min => {
                self.record(key, i);
                i as u64
            }
            Some(i) => {
                self.error(format!("{key}: must be >= {min}, got {i}"));
                0
            }
            None => {
                self.error(format!("{key}: expected an integer, got {}", value.type_str()));
                0
            }
        }
    }

    pub fn boolean(&mut self, key: &str, default: bool) -> bool {
        let Some(value) = self.take(key) else {
            self.record(key, default);
            return default;
        };
        match value.as_bool() {
            Some(b) => {
                self.record(key, b);
                b
            }
            None => {
                self.error(format!("{key}: expected true or false, got {}", value.type_str()));
                default
            }
        }
    }

    pub fn string(&mut self, key: &str, default: Option<&str>) -> Option<String> {
        let Some(value) = self.take(key) else {
            if default.is_none() {
                self.missing(key);
            }
            return default.map(str::to_string);
        };
        match value.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.error(format!("{key}: expected a string, got {}", value.type_str()));
                None
            }
        }
    }

    pub fn kind(&mut self, key: &str) -> PotentialKind {
        let Some(s) = self.string(key, None) else {
            return PotentialKind::PoschlTeller;
        };
        match s.parse::<PotentialKind>() {
            Ok(kind) => {
                self.record(key, kind.label());
                kind
            }
            Err(_) => {
                self.error(format!("{key}: expected \"PT\" or \"SW\", got \"{s}\""));
                PotentialKind::PoschlTeller
            }
        }
    }

    /// A list of numbers, given either literally or as an inclusive
    /// `{ start, stop, step }` table.
    pub fn grid(&mut self, key: &str, default: Option<Vec<f64>>, range: Range) -> Vec<f64> {
        let Some(value) = self.take(key) else {
            match default {
                Some(d) => {
                    self.record(key, d.clone());
                    return d;
                }
                None => {
                    self.missing(key);
                    return Vec::new();
                }
            }
        };
        let values = match &value {
            toml::Value::Array(items) => {
                let parsed: Option<Vec<f64>> = items.iter().map(Self::to_f64).collect();
                match parsed {
                    Some(v) => v,
                    None => {
                        self.error(format!("{key}: every entry must be a number"));
                        return Vec::new();
                    }
                }
            }
            toml::Value::Table(t) => match self.stepped(key, t) {
                Some(v) => v,
                None => return Vec::new(),
            },
            other => {
                self.error(format!(
                    "{key}: expected an array or a {{ start, stop, step }} table, got {}",
                    other.type_str()
                ));
                return Vec::new();
            }
        };
        if values.is_empty() {
            self.error(format!("{key}: must not be empty"));
            return values;
        }
        let mut ok = true;
        for (i, x) in values.iter().enumerate() {
            if !range.contains(*x) {
                self.error(format!("{key}[{i}]: must be {range}, got {x}"));
                ok = false;
            }
        }
        if ok {
            self.record(key, values.clone());
        }
        values
    }

    fn stepped(&mut self, key: &str, t: &toml::Table) -> Option<Vec<f64>> {
        for k in t.keys() {
            if !matches!(k.as_str(), "start" | "stop" | "step") {
                self.error(format!("{key}.{k}: unknown key"));
            }
        }
        let mut field = |name: &str| match t.get(name).and_then(Self::to_f64) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.error(format!("{key}.{name}: missing or not a number"));
                None
            }
        };
        let (start, stop, step) = (field("start"), field("stop"), field("step"));
        let (start, stop, step) = (start?, stop?, step?);
        if !(step > 0.0) || stop < start {
            self.error(format!("{key}: need step > 0 and stop >= start"));
            return None;
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            self.error(format!("{key}: {count} points is too many"));
            return None;
        }
        Some((0..count).map(|i| start + step * i as f64).collect())
    }

    /// Report unknown keys and hand back the resolved parameters.
    pub fn finish(mut self) -> Result<BTreeMap<String, Value>, Vec<String>> {
        let unknown: Vec<String> = self
            .table
            .keys()
            .filter(|k| !self.used.contains(*k))
            .cloned()
            .collect();
        for key in unknown {
            self.error(format!("{key}: unknown key"));
        }
        if self.errors.is_empty() {
            Ok(self.resolved)
        } else {
            Err(self.errors)
        }
    }
}

/// A fully validated experiment, ready to run.
#[derive(Debug, Clone)]
pub enum Plan {
    SpectrumSweep {
        chain: ChainSpec,
        kind: PotentialKind,
        smoothing: f64,
        widths: Vec<f64>,
        depths: Vec<f64>,
    },
    Transport(TransportConfig),
    PhaseDiagram {
        spec: PhaseDiagramSpec,
        speed_mismatches: Vec<f64>,
        offsets: Vec<f64>,
    },
    DisorderSweep(SigmaGsSweep),
    ThresholdSearch(ThresholdSearch),
    Materials {
        system: HydrogenicSystem,
        separations_nm: Vec<f64>,
    },
    HydrogenicMap {
        kinds: Vec<PotentialKind>,
        separations: Vec<f64>,
        widths: Vec<f64>,
        depth_ry: f64,
        system: HydrogenicSystem,
    },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub plan: Plan,
    pub seed: u64,
    pub jobs: usize,
    pub format: Format,
    /// Every parameter after defaults were applied.
    pub params: BTreeMap<String, Value>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

pub fn parse_config(experiment: Experiment, text: &str, overrides: Overrides) -> Result<RunConfig, Vec<String>> {
    // toml rejects duplicate keys while parsing, naming the key
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| vec![format!("config: {}", e.message().trim())])?;
    let mut p = Params::new(table);

    if let Some(name) = p.string("experiment", Some(experiment.name())) {
        if name != experiment.name() {
            p.error(format!("experiment: config is for \"{name}\" but \"{experiment}\" was requested"));
        }
    }
    let file_seed = p.integer("seed", Some(0), 0);
    let seed = overrides.seed.unwrap_or(file_seed);
    p.record("seed", seed);
    let default_jobs = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    let file_jobs = p.integer("jobs", Some(default_jobs), 1) as usize;
    let jobs = overrides.jobs.unwrap_or(file_jobs);
    if jobs == 0 {
        p.error("jobs: must be >= 1, got 0");
    }
    // the thread count never changes results, so it stays out of the data
    p.resolved.remove("jobs");
    let format = match p.string("format", Some("csv")).as_deref() {
        Some("csv") | None => Format::Csv,
        Some("table") => Format::Table,
        Some(other) => {
            p.error(format!("format: expected \"csv\" or \"table\", got \"{other}\""));
            Format::Csv
        }
    };

    let plan = match experiment {
        Experiment::SpectrumSweep => spectrum_sweep(&mut p),
        Experiment::Transport => transport(&mut p),
        Experiment::PhaseDiagram => phase_diagram(&mut p),
        Experiment::DisorderSweep => disorder_sweep(&mut p, seed),
        Experiment::ThresholdSearch => threshold_search(&mut p, seed),
        Experiment::Materials => materials(&mut p),
        Experiment::HydrogenicMap => hydrogenic_map(&mut p),
    };
    let params = p.finish()?;
    let plan = plan.ok_or_else(|| vec!["config: could not build the experiment".to_string()])?;
    Ok(RunConfig {
        experiment,
        plan,
        seed,
        jobs,
        format,
        params,
    })
}

/// Turn a module precondition failure into a validation error.
fn check<T>(p: &mut Params, what: &str, r: spinguide::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            p.error(format!("{what}: {e}"));
            None
        }
    }
}

struct ChainKeys {
    n_sites: u64,
    coupling: f64,
    zz: bool,
}

fn chain_keys(p: &mut Params, default_sites: Option<u64>) -> ChainKeys {
    ChainKeys {
        n_sites: p.integer("n_sites", default_sites, 3),
        coupling: p.number("coupling", Some(1.0), Range::positive()),
        zz: p.boolean("zz_diagonal", false),
    }
}

fn build_chain(p: &mut Params, keys: &ChainKeys) -> Option<ChainSpec> {
    let chain = ChainSpec::uniform(keys.n_sites as usize, keys.coupling);
    check(p, "n_sites", chain).map(|c| c.with_zz_diagonal(keys.zz))
}

fn spectrum_sweep(p: &mut Params) -> Option<Plan> {
    let kind = p.kind("kind");
    let keys = chain_keys(p, Some(200));
    let smoothing = p.number("smoothing", Some(1.0), Range::positive());
    let widths = p.grid("widths", None, Range::positive());
    let depths = p.grid("depths", None, Range::non_negative());
    if p.has_errors() {
        return None;
    }
    let chain = build_chain(p, &keys)?;
    Some(Plan::SpectrumSweep {
        chain,
        kind,
        smoothing,
        widths,
        depths,
    })
}

fn transport(p: &mut Params) -> Option<Plan> {
    let kind = p.kind("kind");
    let width = p.number("width", None, Range::positive());
    let depth = p.number("depth", None, Range::non_negative());
    let smoothing = p.number("smoothing", Some(1.0), Range::positive());
    let keys = chain_keys(p, None);
    let speed = p.number("speed", None, Range::non_negative());
    let mismatch = p.number("mismatch", Some(0.0), Range::ANY);
    let launch_offset = p.number("launch_offset", Some(0.0), Range::ANY);
    let start = p.optional_number("start", Range::ANY);
    let duration = p.optional_number("duration", Range::positive());
    let dt = p.optional_number("dt", Range::positive());
    let stride = p.integer("sample_stride", Some(DEFAULT_SAMPLE_STRIDE as u64), 1) as usize;
    if p.has_errors() {
        return None;
    }
    let chain = build_chain(p, &keys)?;
    let potential = check(p, "potential", PotentialSpec::new(kind, depth, width, smoothing))?;
    let (lo, hi) = chain.extent();
    let start = start.unwrap_or(lo + potential.safe_margin());
    p.record("start", start);
    let duration = match duration {
        Some(d) => d,
        None if speed > 0.0 => {
            let travel = hi - potential.safe_margin() - start;
            if travel <= 0.0 {
                p.error(format!(
                    "n_sites: chain too short to guide a width-{width} well from {start} with a 3w margin"
                ));
                return None;
            }
            travel / speed
        }
        None => {
            p.error("duration: required when speed is 0");
            return None;
        }
    };
    p.record("duration", duration);
    let trajectory = check(p, "trajectory", Trajectory::new(start, speed, duration))?;
    for (name, x) in [("start", start), ("end", trajectory.end_center())] {
        if !(lo..=hi).contains(&x) {
            p.error(format!("{name}: well centre {x} lies outside the chain [{lo}, {hi}]"));
        }
    }
    let dt = dt.unwrap_or(DEFAULT_STEP_PRODUCT / (2.0 * keys.coupling));
    p.record("dt", dt);
    let mut config = TransportConfig::matched(chain, potential, trajectory)
        .with_mismatch(mismatch)
        .with_dt(dt)
        .with_stride(stride);
    config.launch_offset = launch_offset;
    p.record("launch_speed", config.launch_speed);
    check(p, "transport", config.validate())?;
    (!p.has_errors()).then_some(Plan::Transport(config))
}

fn phase_diagram(p: &mut Params) -> Option<Plan> {
    let kind = p.kind("kind");
    let width = p.number("width", None, Range::positive());
    let depth = p.number("depth", None, Range::non_negative());
    let smoothing = p.number("smoothing", Some(1.0), Range::positive());
    let keys = chain_keys(p, None);
    let center = p.optional_number("center", Range::ANY);
    let duration = p.number("duration", None, Range::positive());
    let dt = p.optional_number("dt", Range::positive());
    let stride = p.integer("sample_stride", Some(DEFAULT_SAMPLE_STRIDE as u64), 1) as usize;
    let speed_mismatches = p.grid("speed_mismatches", None, Range::non_negative());
    let offsets = p.grid("offsets", Some(vec![0.0]), Range::ANY);
    if p.has_errors() {
        return None;
    }
    let chain = build_chain(p, &keys)?;
    let potential = check(p, "potential", PotentialSpec::new(kind, depth, width, smoothing))?;
    let (lo, hi) = chain.extent();
    let center = center.unwrap_or(0.5 * (lo + hi));
    p.record("center", center);
    if !(lo..=hi).contains(&center) {
        p.error(format!("center: {center} lies outside the chain [{lo}, {hi}]"));
    }
    let limit = chain.speed_limit();
    for (i, dv) in speed_mismatches.iter().enumerate() {
        if *dv > limit {
            p.error(format!("speed_mismatches[{i}]: {dv} exceeds the magnon speed limit {limit}"));
        }
    }
    let dt = dt.unwrap_or(DEFAULT_STEP_PRODUCT / (2.0 * keys.coupling));
    p.record("dt", dt);
    let probe = TransportConfig::matched(chain.clone(), potential, Trajectory::stationary(center, duration).ok()?)
        .with_dt(dt)
        .with_stride(stride);
    check(p, "dt", probe.validate())?;
    (!p.has_errors()).then_some(Plan::PhaseDiagram {
        spec: PhaseDiagramSpec {
            chain,
            potential,
            center,
            duration,
            dt,
            sample_stride: stride,
        },
        speed_mismatches,
        offsets,
    })
}

fn disorder_sweep(p: &mut Params, seed: u64) -> Option<Plan> {
    let kind = p.kind("kind");
    let depth = p.number("depth", None, Range::non_negative());
    let smoothing = p.number("smoothing", Some(1.0), Range::positive());
    let widths = p.grid("widths", None, Range::positive());
    let sigmas = p.grid("sigmas", None, Range::half_open(0.0, 1.0));
    let n_seeds = p.integer("n_seeds", Some(20), 1);
    let scan_length = p.number("scan_length", Some(200.0), Range::positive());
    let n_centers = p.integer("n_centers", Some(101), 2) as usize;
    if p.has_errors() {
        return None;
    }
    // realizations use consecutive seeds starting from the run seed
    let seeds: Vec<u64> = (0..n_seeds).map(|i| seed.wrapping_add(i)).collect();
    p.record("seeds", seeds.clone());
    for &w in &widths {
        check(p, "potential", PotentialSpec::new(kind, depth, w, smoothing))?;
    }
    (!p.has_errors()).then_some(Plan::DisorderSweep(SigmaGsSweep {
        kind,
        depth,
        smoothing,
        widths,
        sigmas,
        seeds,
        scan_length,
        n_centers,
    }))
}

fn threshold_search(p: &mut Params, seed: u64) -> Option<Plan> {
    let kind = p.kind("kind");
    let width = p.number("width", None, Range::positive());
    let depth = p.number("depth", None, Range::positive());
    let smoothing = p.number("smoothing", Some(1.0), Range::positive());
    let sigma = p.number("sigma", None, Range::half_open(0.0, 1.0));
    let sites = p.integer("disordered_sites", Some(100), 2) as usize;
    let realizations = p.integer("realizations", Some(20), 1) as usize;
    let min_speed = p.number("min_speed", Some(0.01), Range::positive());
    let max_speed = p.number("max_speed", Some(1.0), Range::open_closed(0.0, 2.0));
    let bisections = p.integer("bisections", Some(6), 0) as usize;
    let dt = p.number("dt", Some(0.05), Range::open_closed(0.0, 0.05));
    let target = p.number("target_fidelity", Some(0.99), Range::open_closed(0.0, 1.0));
    if p.has_errors() {
        return None;
    }
    if min_speed >= max_speed {
        p.error(format!("min_speed: must be below max_speed ({max_speed}), got {min_speed}"));
        return None;
    }
    let potential = check(p, "potential", PotentialSpec::new(kind, depth, width, smoothing))?;
    check(p, "sigma", DisorderSpec::whole_chain(sites, 1.0, sigma, seed))?;
    let mut search = ThresholdSearch::new(potential, sigma, seed, sites);
    search.realizations = realizations;
    search.min_speed = min_speed;
    search.max_speed = max_speed;
    search.bisections = bisections;
    search.dt = dt;
    search.target_fidelity = target;
    Some(Plan::ThresholdSearch(search))
}

fn hydrogenic_system(p: &mut Params) -> Option<HydrogenicSystem> {
    let bohr = p.number("bohr_radius_nm", Some(P_SI_BOHR_RADIUS_NM), Range::positive());
    let rydberg = p.number("rydberg_mev", Some(P_SI_RYDBERG_MEV), Range::positive());
    if !(bohr.is_finite() && rydberg.is_finite()) {
        return None;
    }
    check(p, "hydrogenic system", HydrogenicSystem::new(bohr, rydberg))
}

fn materials(p: &mut Params) -> Option<Plan> {
    let system = hydrogenic_system(p);
    let default: Vec<f64> = (0..7).map(|i| 6.0 + 1.5 * i as f64).collect();
    let separations_nm = p.grid("separations_nm", Some(default), Range::positive());
    if p.has_errors() {
        return None;
    }
    Some(Plan::Materials {
        system: system?,
        separations_nm,
    })
}

fn hydrogenic_map(p: &mut Params) -> Option<Plan> {
    let kinds = match p.string("kind", Some("both")).as_deref() {
        Some("both") => vec![PotentialKind::PoschlTeller, PotentialKind::SquareWell],
        Some(s) => match s.parse::<PotentialKind>() {
            Ok(k) => vec![k],
            Err(_) => {
                p.error(format!("kind: expected \"PT\", \"SW\" or \"both\", got \"{s}\""));
                Vec::new()
            }
        },
        None => Vec::new(),
    };
    p.record("kind", kinds.iter().map(|k| k.label()).collect::<Vec<_>>());
    let separations = p.grid("separations", None, Range::positive());
    let widths = p.grid("widths", None, Range::positive());
    let depth_ry = p.number("depth_ry", Some(DEFAULT_MAP_DEPTH_RY), Range::non_negative());
    let system = hydrogenic_system(p);
    if p.has_errors() {
        return None;
    }
    Some(Plan::HydrogenicMap {
        kinds,
        separations,
        widths,
        depth_ry,
        system: system?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_TRANSPORT: &str = "kind = \"PT\"\nwidth = 40\ndepth = 1.0\nspeed = 0.5\nn_sites = 600\n";

    fn parse(exp: Experiment, text: &str) -> Result<RunConfig, Vec<String>> {
        parse_config(exp, text, Overrides::default())
    }

    #[test]
    fn minimal_transport_is_valid() {
        let cfg = parse(Experiment::Transport, MINIMAL_TRANSPORT).unwrap();
        let Plan::Transport(t) = cfg.plan else { panic!("wrong plan") };
        assert_eq!(t.launch_speed, 0.5);
        assert_eq!(t.trajectory.start_center, 121.0);
        assert_eq!(t.trajectory.end_center(), 480.0);
        assert_eq!(cfg.params["width"], Value::from(40.0));
    }

    #[test]
    fn negative_width_names_width() {
        let text = MINIMAL_TRANSPORT.replace("width = 40", "width = -1");
        let errs = parse(Experiment::Transport, &text).unwrap_err();
        assert_eq!(errs.len(), 1, "{errs:?}");
        assert!(errs[0].starts_with("width:"), "{errs:?}");
    }

    #[test]
    fn all_problems_reported_together() {
        let text = "kind = \"XX\"\nwidth = -1\nspeed = \"fast\"\nn_sites = 600\ncolour = 3\n";
        let errs = parse(Experiment::Transport, text).unwrap_err();
        let joined = errs.join("\n");
        for key in ["kind:", "width:", "depth: missing", "speed:", "colour: unknown"] {
            assert!(joined.contains(key), "no '{key}' in {joined}");
        }
    }

    #[test]
    fn duplicate_key_is_named() {
        let text = format!("{MINIMAL_TRANSPORT}width = 30\n");
        let errs = parse(Experiment::Transport, &text).unwrap_err();
        assert!(errs[0].contains("duplicate key") && errs[0].contains("width"), "{errs:?}");
    }

    #[test]
    fn stepped_grid_is_inclusive() {
        let text = "kind = \"SW\"\nwidths = { start = 0.5, stop = 2.0, step = 0.5 }\ndepths = [1]\n";
        let cfg = parse(Experiment::SpectrumSweep, text).unwrap();
        let Plan::SpectrumSweep { widths, .. } = cfg.plan else { panic!() };
        assert_eq!(widths, vec![0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn overrides_win_over_file() {
        let text = "seed = 5\nkind = \"PT\"\ndepth = 1\nwidths = [3]\nsigmas = [0.1]\nn_seeds = 2\n";
        let cfg = parse_config(Experiment::DisorderSweep, text, Overrides { seed: Some(9), jobs: Some(1) }).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.jobs, 1);
        let Plan::DisorderSweep(s) = cfg.plan else { panic!() };
        assert_eq!(s.seeds, vec![9, 10]);
    }

    #[test]
    fn speed_above_band_limit_rejected_before_running() {
        let text = MINIMAL_TRANSPORT.replace("speed = 0.5", "speed = 2.5");
        let errs = parse(Experiment::Transport, &text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("speed limit")), "{errs:?}");
    }

    #[test]
    fn experiment_key_must_match() {
        let text = format!("experiment = \"materials\"\n{MINIMAL_TRANSPORT}");
        let errs = parse(Experiment::Transport, &text).unwrap_err();
        assert!(errs[0].starts_with("experiment:"));
    }

    #[test]
    fn range_display() {
        assert_eq!(Range::positive().to_string(), "> 0");
        assert_eq!(Range::half_open(0.0, 1.0).to_string(), "in [0, 1)");
    }
}
