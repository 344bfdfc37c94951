//! Experiment files.
//!
//! ```toml
//! command = "sweep"          # solve-mdp | simulate | sweep | allocate
//! output = "snr_sweep.csv"   # optional, stdout when absent
//! weights = [0.5, 0.5]       # optional, equal weights by default
//!
//! [channel]
//! distances = [2.0, 4.0]     # omit for a client-count sweep
//! path_loss_exponent = 2.0
//! target_rate = 1.0          # bits/s/Hz
//! snr_db = 18.0              # omit for an SNR sweep
//!
//! [policy]
//! names = ["mdp-optimal", "maxweight2", "mdp-oma", "mdp-noma"]
//! levels = 10
//! delta_max = 100
//!
//! [simulation]
//! horizon = 1000000
//! seed = 1
//!
//! [sweep]
//! snr_db = [10, 15, 20, 25, 30, 35, 40]   # or clients = [2, 3, 4, 5, 6]
//! ```

use std::path::PathBuf;

use toml::{Table, Value};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::scheduler::{check_weights, PolicySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveMdp,
    Simulate,
    Sweep,
    Allocate,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "solve-mdp" => Command::SolveMdp,
            "simulate" => Command::Simulate,
            "sweep" => Command::Sweep,
            "allocate" => Command::Allocate,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Command::SolveMdp => "solve-mdp",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Allocate => "allocate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub distances: Option<Vec<f64>>,
    pub path_loss_exp: f64,
    pub target_rate: f64,
    pub snr_db: Option<f64>,
    pub power_budget: f64,
}

impl ChannelSpec {
    /// Channel at a given SNR; distances default to `d_i = N + 1 - i`.
    pub fn build(&self, snr_db: Option<f64>, clients: Option<usize>) -> Result<ChannelParams> {
        let distances = match clients {
            Some(n) => (0..n).map(|i| (n - i) as f64).collect(),
            None => self
                .distances
                .clone()
                .ok_or_else(|| Error::invalid("distances", "missing"))?,
        };
        let snr_db = snr_db
            .or(self.snr_db)
            .ok_or_else(|| Error::invalid("snr_db", "missing"))?;
        let noise = self.power_budget / crate::channel::db_to_linear(snr_db);
        ChannelParams::new(
            distances,
            self.path_loss_exp,
            noise,
            self.power_budget,
            self.target_rate,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub horizon: u64,
    pub warmup: Option<u64>,
    pub replications: usize,
    pub seed: u64,
    /// Also write the first replication's per-slot trace.
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    SnrDb(Vec<f64>),
    Clients(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub weights: Option<Vec<f64>>,
    pub channel: ChannelSpec,
    pub policies: Vec<PolicySpec>,
    pub simulation: Option<SimulationSpec>,
    pub sweep: Option<SweepSpec>,
    /// Ages for `allocate`, all ones by default.
    pub ages: Option<Vec<u32>>,
}

impl ExperimentSpec {
    /// Weights for `n` clients: the configured ones, or equal.
    pub fn weights_for(&self, n: usize) -> Vec<f64> {
        match &self.weights {
            Some(w) if w.len() == n => w.clone(),
            _ => vec![1.0 / n as f64; n],
        }
    }
}

/// Collects every problem found while reading a document.
struct Reader {
    errors: Vec<String>,
}

fn describe(v: &Value) -> &'static str {
    v.type_str()
}

impl Reader {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn check_keys(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let full = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                self.err(format!(
                    "unknown key `{full}` (allowed: {})",
                    allowed.join(", ")
                ));
            }
        }
    }

    fn missing(&mut self, path: &str) {
        self.err(format!("missing required field `{path}`"));
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Float(_) => {
                self.err(format!("`{path}` must be finite"));
                None
            }
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.err(format!(
                    "`{path}` must be a number, got {}",
                    describe(other)
                ));
                None
            }
        }
    }

    fn float(&mut self, t: &Table, key: &str, path: &str, required: bool) -> Option<f64> {
        match t.get(key) {
            Some(v) => self.number(v, path),
            None => {
                if required {
                    self.missing(path);
                }
                None
            }
        }
    }

    fn uint(&mut self, t: &Table, key: &str, path: &str, required: bool) -> Option<u64> {
        match t.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as u64),
            Some(Value::Integer(_)) => {
                self.err(format!("`{path}` must be nonnegative"));
                None
            }
            Some(other) => {
                self.err(format!(
                    "`{path}` must be an integer, got {}",
                    describe(other)
                ));
                None
            }
            None => {
                if required {
                    self.missing(path);
                }
                None
            }
        }
    }

    fn string(&mut self, t: &Table, key: &str, path: &str, required: bool) -> Option<String> {
        match t.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.err(format!(
                    "`{path}` must be a string, got {}",
                    describe(other)
                ));
                None
            }
            None => {
                if required {
                    self.missing(path);
                }
                None
            }
        }
    }

    fn boolean(&mut self, t: &Table, key: &str, path: &str) -> Option<bool> {
        match t.get(key) {
            Some(Value::Boolean(b)) => Some(*b),
            Some(other) => {
                self.err(format!(
                    "`{path}` must be a boolean, got {}",
                    describe(other)
                ));
                None
            }
            None => None,
        }
    }

    fn array<'v>(&mut self, t: &'v Table, key: &str, path: &str) -> Option<&'v Vec<Value>> {
        match t.get(key) {
            Some(Value::Array(a)) if !a.is_empty() => Some(a),
            Some(Value::Array(_)) => {
                self.err(format!("`{path}` must not be empty"));
                None
            }
            Some(other) => {
                self.err(format!(
                    "`{path}` must be an array, got {}",
                    describe(other)
                ));
                None
            }
            None => None,
        }
    }

    fn floats(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<f64>> {
        let arr = self.array(t, key, path)?;
        let vals: Vec<Option<f64>> = arr
            .iter()
            .enumerate()
            .map(|(i, v)| self.number(v, &format!("{path}[{i}]")))
            .collect();
        vals.into_iter().collect()
    }

    fn uints(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<u64>> {
        let arr = self.array(t, key, path)?;
        let mut out = Vec::with_capacity(arr.len());
        let mut ok = true;
        for (i, v) in arr.iter().enumerate() {
            match v {
                Value::Integer(x) if *x >= 0 => out.push(*x as u64),
                other => {
                    self.err(format!(
                        "`{path}[{i}]` must be a nonnegative integer, got {}",
                        describe(other)
                    ));
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn strings(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<String>> {
        let arr = self.array(t, key, path)?;
        let mut out = Vec::with_capacity(arr.len());
        let mut ok = true;
        for (i, v) in arr.iter().enumerate() {
            match v {
                Value::String(s) => out.push(s.clone()),
                other => {
                    self.err(format!(
                        "`{path}[{i}]` must be a string, got {}",
                        describe(other)
                    ));
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn table<'v>(&mut self, t: &'v Table, key: &str, required: bool) -> Option<&'v Table> {
        match t.get(key) {
            Some(Value::Table(inner)) => Some(inner),
            Some(other) => {
                self.err(format!("`{key}` must be a table, got {}", describe(other)));
                None
            }
            None => {
                if required {
                    self.err(format!("missing required table `[{key}]`"));
                }
                None
            }
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "command",
    "output",
    "weights",
    "ages",
    "channel",
    "policy",
    "simulation",
    "sweep",
];
const CHANNEL_KEYS: &[&str] = &[
    "distances",
    "path_loss_exponent",
    "target_rate",
    "snr_db",
    "power_budget",
];
const POLICY_KEYS: &[&str] = &["names", "levels", "delta_max", "k", "grid_levels"];
const SIM_KEYS: &[&str] = &["horizon", "warmup", "replications", "seed", "trace"];
const SWEEP_KEYS: &[&str] = &["snr_db", "clients"];

/// Parses and validates an experiment file, reporting every problem found.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Validation(vec![format!("not valid TOML: {}", e.message())])
    })?;
    let mut r = Reader { errors: vec![] };
    r.check_keys(&doc, "", TOP_KEYS);

    let command = match r.string(&doc, "command", "command", true) {
        Some(s) => match Command::parse(&s) {
            Some(c) => Some(c),
            None => {
                r.err(format!(
                    "`command` must be one of solve-mdp, simulate, sweep, allocate; got `{s}`"
                ));
                None
            }
        },
        None => None,
    };
    let output = r.string(&doc, "output", "output", false).map(PathBuf::from);
    let weights = r.floats(&doc, "weights", "weights");
    let ages = r.uints(&doc, "ages", "ages");

    // sweep first: it decides which channel fields are required
    let sweep = match r.table(&doc, "sweep", command == Some(Command::Sweep)) {
        Some(t) => {
            r.check_keys(t, "sweep", SWEEP_KEYS);
            let snr = r.floats(t, "snr_db", "sweep.snr_db");
            let clients = r.uints(t, "clients", "sweep.clients");
            match (
                snr,
                clients,
                t.contains_key("snr_db") && t.contains_key("clients"),
            ) {
                (_, _, true) => {
                    r.err("`[sweep]` takes either `snr_db` or `clients`, not both");
                    None
                }
                (Some(s), None, _) => Some(SweepSpec::SnrDb(s)),
                (None, Some(c), _) => {
                    if c.contains(&0) {
                        r.err("`sweep.clients` entries must be at least 1");
                    }
                    Some(SweepSpec::Clients(
                        c.into_iter().map(|n| n as usize).collect(),
                    ))
                }
                _ => {
                    if !t.contains_key("snr_db") && !t.contains_key("clients") {
                        r.err("`[sweep]` needs `snr_db` or `clients`");
                    }
                    None
                }
            }
        }
        None => None,
    };
    let sweeps_snr = matches!(sweep, Some(SweepSpec::SnrDb(_)));
    let sweeps_clients = matches!(sweep, Some(SweepSpec::Clients(_)));
    if command.is_some() && command != Some(Command::Sweep) && doc.contains_key("sweep") {
        r.err("`[sweep]` is only valid with command = \"sweep\"");
    }

    let channel = match r.table(&doc, "channel", true) {
        Some(t) => {
            r.check_keys(t, "channel", CHANNEL_KEYS);
            let distances = r.floats(t, "distances", "channel.distances");
            if distances.is_none() && !t.contains_key("distances") && !sweeps_clients {
                r.missing("channel.distances");
            }
            if let Some(d) = &distances {
                if d.iter().any(|&x| x <= 0.0) {
                    r.err("`channel.distances` must all be positive");
                }
                if sweeps_clients {
                    r.err("`channel.distances` conflicts with a `sweep.clients` axis (distances are N+1-i)");
                }
            }
            let ple = r.float(t, "path_loss_exponent", "channel.path_loss_exponent", true);
            let rate = r.float(t, "target_rate", "channel.target_rate", true);
            let snr_db = r.float(t, "snr_db", "channel.snr_db", !sweeps_snr);
            if sweeps_snr && t.contains_key("snr_db") {
                r.err("`channel.snr_db` conflicts with a `sweep.snr_db` axis");
            }
            let budget = r
                .float(t, "power_budget", "channel.power_budget", false)
                .unwrap_or(1.0);
            if ple.is_some_and(|v| v <= 0.0) {
                r.err("`channel.path_loss_exponent` must be positive");
            }
            if rate.is_some_and(|v| v <= 0.0) {
                r.err("`channel.target_rate` must be positive");
            }
            if budget <= 0.0 {
                r.err("`channel.power_budget` must be positive");
            }
            match (ple, rate) {
                (Some(path_loss_exp), Some(target_rate)) => Some(ChannelSpec {
                    distances,
                    path_loss_exp,
                    target_rate,
                    snr_db,
                    power_budget: budget,
                }),
                _ => None,
            }
        }
        None => None,
    };

    let needs_policy = matches!(command, Some(Command::Simulate | Command::Sweep));
    let policies = match r.table(&doc, "policy", needs_policy) {
        Some(t) => {
            r.check_keys(t, "policy", POLICY_KEYS);
            let names = r.strings(t, "names", "policy.names");
            if names.is_none() && !t.contains_key("names") && needs_policy {
                r.missing("policy.names");
            }
            let levels = r.uint(t, "levels", "policy.levels", false).unwrap_or(10);
            let delta_max = r
                .uint(t, "delta_max", "policy.delta_max", false)
                .unwrap_or(100);
            let k = r.uint(t, "k", "policy.k", false).unwrap_or(1);
            let grid_levels = r
                .uint(t, "grid_levels", "policy.grid_levels", false)
                .unwrap_or(200);
            if levels < 2 || levels > u64::from(u32::MAX) {
                r.err("`policy.levels` must be at least 2");
            }
            if !(2..=100_000).contains(&delta_max) {
                r.err("`policy.delta_max` must lie in 2..=100000");
            }
            let mut specs = vec![];
            for name in names.unwrap_or_default() {
                match PolicySpec::from_name(
                    &name,
                    levels as u32,
                    delta_max as u32,
                    k as usize,
                    grid_levels as u32,
                ) {
                    Ok(s) => specs.push(s),
                    Err(e) => r.err(e.to_string()),
                }
            }
            if command == Some(Command::SolveMdp) && specs.is_empty() {
                specs.push(PolicySpec::from_name(
                    "mdp-optimal",
                    levels as u32,
                    delta_max as u32,
                    1,
                    0,
                )?);
            }
            specs
        }
        None if command == Some(Command::SolveMdp) => {
            vec![PolicySpec::from_name("mdp-optimal", 10, 100, 1, 0)?]
        }
        None => vec![],
    };
    if command == Some(Command::SolveMdp)
        && (policies.len() != 1 || !matches!(policies[0], PolicySpec::Mdp { .. }))
    {
        r.err("solve-mdp takes exactly one of mdp-optimal, mdp-oma, mdp-noma in `policy.names`");
    }

    let simulation = match r.table(&doc, "simulation", needs_policy) {
        Some(t) => {
            r.check_keys(t, "simulation", SIM_KEYS);
            let horizon = r.uint(t, "horizon", "simulation.horizon", true);
            let warmup = r.uint(t, "warmup", "simulation.warmup", false);
            let replications = r
                .uint(t, "replications", "simulation.replications", false)
                .unwrap_or(1);
            let seed = r.uint(t, "seed", "simulation.seed", false).unwrap_or(0);
            let trace = r.boolean(t, "trace", "simulation.trace").unwrap_or(false);
            if replications == 0 {
                r.err("`simulation.replications` must be at least 1");
            }
            match horizon {
                Some(h) if h <= warmup.unwrap_or(h / 100) => {
                    r.err("`simulation.horizon` must exceed the warmup");
                    None
                }
                Some(horizon) => Some(SimulationSpec {
                    horizon,
                    warmup,
                    replications: replications as usize,
                    seed,
                    trace,
                }),
                None => None,
            }
        }
        None => None,
    };

    // cross-field checks
    let n_clients = channel
        .as_ref()
        .and_then(|c| c.distances.as_ref())
        .map(Vec::len);
    if let Some(w) = &weights {
        if let Err(e) = check_weights(w) {
            r.err(e.to_string().replace("invalid parameter ", ""));
        }
        if let Some(n) = n_clients {
            if w.len() != n {
                r.err(format!(
                    "`weights` has {} entries but there are {n} clients",
                    w.len()
                ));
            }
        }
        if sweeps_clients {
            r.err("`weights` cannot be set with a `sweep.clients` axis (weights are 1/N)");
        }
    }
    if let Some(a) = &ages {
        if command != Some(Command::Allocate) {
            r.err("`ages` is only used by command = \"allocate\"");
        }
        if a.contains(&0) || a.iter().any(|&x| x > u64::from(u32::MAX)) {
            r.err("`ages` entries must be positive 32-bit integers");
        }
        if let Some(n) = n_clients {
            if a.len() != n {
                r.err(format!(
                    "`ages` has {} entries but there are {n} clients",
                    a.len()
                ));
            }
        }
    }

    if !r.errors.is_empty() {
        return Err(Error::Validation(r.errors));
    }
    Ok(ExperimentSpec {
        command: command.expect("checked"),
        output,
        weights,
        channel: channel.expect("checked"),
        policies,
        simulation,
        sweep,
        ages: ages.map(|a| a.into_iter().map(|x| x as u32).collect()),
    })
}
