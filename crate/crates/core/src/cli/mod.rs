//! Command-line front end: experiment files in, CSV and policy files out.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a solver or
//! simulation fails. Failures print one line to stderr of the form
//! `error: code=<n> kind=<validation|runtime> message=<text>`.

mod spec;

pub use spec::{parse_spec, ChannelSpec, Command, ExperimentSpec, SimulationSpec, SweepSpec};

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use crate::allocator::enumerate_allocate;
use crate::error::{Error, Result};
use crate::mdp2::{extract_boundaries, verify_switching};
use crate::scheduler::{AoIState, PolicySpec};
use crate::sim::{sweep, SimConfig, SimResult, SweepAxis, SweepPoint, SweepRow};

#[derive(Debug, Parser)]
#[command(
    name = "aoi-noma",
    version,
    about = "Age-of-information scheduling experiments"
)]
pub struct Args {
    /// Experiment file (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output path; overrides the file's `output`. Stdout when neither is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `simulation.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `simulation.replications`.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Run on a single thread.
    #[arg(long)]
    pub deterministic: bool,
    /// Leave out the `# generated_at_unix=` header line.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub no_timestamp: bool,
}

/// Exit code for an error: 2 for bad input, 3 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation(_)
        | Error::InvalidParameter { .. }
        | Error::Parse(_)
        | Error::LengthMismatch { .. } => 2,
        _ => 3,
    }
}

fn report(err: &Error) -> i32 {
    let code = exit_code(err);
    let kind = if code == 2 { "validation" } else { "runtime" };
    let message = err.to_string().replace('\n', "; ");
    eprintln!("error: code={code} kind={kind} message={message}");
    code
}

/// Parses arguments, runs the experiment, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let text = match fs::read_to_string(&args.spec) {
        Ok(t) => t,
        Err(e) => {
            return report(&Error::Validation(vec![format!(
                "cannot read spec {}: {e}",
                args.spec.display()
            )]))
        }
    };
    let mut spec = match parse_spec(&text) {
        Ok(s) => s,
        Err(e) => return report(&e),
    };
    if let Some(sim) = spec.simulation.as_mut() {
        if let Some(seed) = args.seed {
            sim.seed = seed;
        }
        if let Some(reps) = args.replications {
            if reps == 0 {
                return report(&Error::Validation(vec![
                    "--replications must be at least 1".into(),
                ]));
            }
            sim.replications = reps;
        }
    }
    let opts = RunOptions {
        out: args.out.clone(),
        no_timestamp: args.no_timestamp,
    };
    let result = if args.deterministic {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(|| execute(&spec, &opts)),
            Err(e) => Err(Error::Io(e.to_string())),
        }
    } else {
        execute(&spec, &opts)
    };
    match result {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            0
        }
        Err(e) => report(&e),
    }
}

/// Runs a validated experiment and writes its artifacts. Returns the
/// files written (empty when everything went to stdout).
pub fn execute(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let out = opts.out.clone().or_else(|| spec.output.clone());
    if let Some(path) = &out {
        check_writable(path)?;
    }
    let header = (!opts.no_timestamp).then(|| {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("# generated_at_unix={secs}\n")
    });
    let mut artifacts = Artifacts {
        out,
        header,
        written: vec![],
    };
    match spec.command {
        Command::SolveMdp => solve_mdp(spec, &mut artifacts)?,
        Command::Simulate | Command::Sweep => simulate(spec, &mut artifacts)?,
        Command::Allocate => allocate(spec, &mut artifacts)?,
    }
    Ok(artifacts.written)
}

fn check_writable(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(Error::Validation(vec![format!(
            "output directory {} does not exist",
            parent.display()
        )]));
    }
    Ok(())
}

struct Artifacts {
    out: Option<PathBuf>,
    header: Option<String>,
    written: Vec<PathBuf>,
}

impl Artifacts {
    /// Writes the main artifact, or a sibling named `<out>.<suffix>`.
    fn write(&mut self, suffix: Option<&str>, body: &str) -> Result<()> {
        let mut text = self.header.clone().unwrap_or_default();
        text.push_str(body);
        match &self.out {
            Some(path) => {
                let target = match suffix {
                    Some(s) => {
                        let mut name = path.as_os_str().to_owned();
                        name.push(format!(".{s}"));
                        PathBuf::from(name)
                    }
                    None => path.clone(),
                };
                fs::write(&target, text)?;
                self.written.push(target);
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                if let Some(s) = suffix {
                    writeln!(stdout, "# --- {s} ---")?;
                }
                stdout.write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }
}

fn solve_mdp(spec: &ExperimentSpec, artifacts: &mut Artifacts) -> Result<()> {
    let params = spec.channel.build(None, None)?;
    let weights = spec.weights_for(params.num_clients());
    let prepared = spec.policies[0].prepare(&params, &weights)?;
    let table = prepared.table().expect("mdp policy");
    artifacts.write(None, &table.to_text())?;
    let report = verify_switching(table.grid());
    let boundaries = if report.passes() {
        extract_boundaries(table.grid())?.to_text()
    } else {
        format!(
            "# not switching-type: {} violating state pairs\n",
            report.violations.len()
        )
    };
    artifacts.write(Some("boundaries"), &boundaries)
}

fn simulate(spec: &ExperimentSpec, artifacts: &mut Artifacts) -> Result<()> {
    let sim = spec.simulation.as_ref().expect("validated");
    let axes: Vec<SweepAxis> = match (&spec.sweep, spec.command) {
        (Some(SweepSpec::SnrDb(v)), Command::Sweep) => {
            v.iter().map(|&s| SweepAxis::SnrDb(s)).collect()
        }
        (Some(SweepSpec::Clients(v)), Command::Sweep) => {
            v.iter().map(|&n| SweepAxis::Clients(n)).collect()
        }
        _ => vec![SweepAxis::SnrDb(spec.channel.snr_db.expect("validated"))],
    };
    if sim.trace && artifacts.out.is_none() {
        return Err(Error::Validation(vec![
            "`simulation.trace` needs an output path".into(),
        ]));
    }

    let mut points = vec![];
    for policy in &spec.policies {
        for &axis in &axes {
            let params = match axis {
                SweepAxis::SnrDb(s) => spec.channel.build(Some(s), None)?,
                SweepAxis::Clients(n) => spec.channel.build(None, Some(n))?,
            };
            let weights = spec.weights_for(params.num_clients());
            let mut config = SimConfig::new(params, policy.clone(), sim.horizon, sim.seed)
                .with_weights(weights)
                .with_replications(sim.replications)
                .with_trace(sim.trace);
            if let Some(w) = sim.warmup {
                config = config.with_warmup(w);
            }
            points.push(SweepPoint { axis, config });
        }
    }
    let rows = sweep(points);
    for row in &rows {
        if let Err(e) = &row.result {
            eprintln!("warning: {} at {}: {e}", row.policy, axis_value(row.axis));
        }
    }
    if spec.command == Command::Simulate && rows.iter().all(|r| r.result.is_err()) {
        if let Some(Err(e)) = rows.into_iter().next().map(|r| r.result) {
            return Err(e);
        }
        return Ok(());
    }
    let axis_name = match axes.first() {
        Some(SweepAxis::Clients(_)) => "n",
        _ => "snr_db",
    };
    artifacts.write(None, &sweep_csv(&rows, axis_name)?)?;
    if sim.trace {
        for row in &rows {
            if let Ok(SimResult { trace: Some(t), .. }) = &row.result {
                let mut body = String::from("# t,ages...,decision,success_mask\n");
                for line in t {
                    body.push_str(&line.to_line());
                    body.push('\n');
                }
                let suffix = format!("{}.{}.trace", row.policy, axis_value(row.axis));
                artifacts.write(Some(&suffix), &body)?;
            }
        }
    }
    Ok(())
}

fn axis_value(axis: SweepAxis) -> String {
    match axis {
        SweepAxis::SnrDb(s) => s.to_string(),
        SweepAxis::Clients(n) => n.to_string(),
    }
}

/// Sweep rows as CSV: `policy, snr_db|n, weighted_avg_aoi, stderr, slots,
/// seed, error`. Failed rows leave the numeric columns empty.
pub fn sweep_csv(rows: &[SweepRow], axis_name: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record([
        "policy",
        axis_name,
        "weighted_avg_aoi",
        "stderr",
        "slots",
        "seed",
        "error",
    ])?;
    for row in rows {
        let axis = axis_value(row.axis);
        let seed = row.seed.to_string();
        match &row.result {
            Ok(r) => w.write_record([
                row.policy.as_str(),
                &axis,
                &r.weighted_avg_aoi.to_string(),
                &r.stderr.to_string(),
                &r.slots.to_string(),
                &seed,
                "",
            ])?,
            Err(e) => w.write_record([
                row.policy.as_str(),
                &axis,
                "",
                "",
                "",
                &seed,
                &e.to_string(),
            ])?,
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn allocate(spec: &ExperimentSpec, artifacts: &mut Artifacts) -> Result<()> {
    let params = spec.channel.build(None, None)?;
    let n = params.num_clients();
    let ages = spec.ages.clone().unwrap_or_else(|| vec![1; n]);
    let state = AoIState::new(ages, spec.weights_for(n))?;
    let best = enumerate_allocate(&state, &params)?;
    let join = |v: Vec<String>| v.join(" ");
    let alloc = &best.allocation;
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record([
        "served",
        "raw_powers",
        "hat_powers",
        "k",
        "expected_drop",
        "true_value",
        "envelope_value",
        "gap_bound",
    ])?;
    w.write_record([
        join(alloc.served().iter().map(|c| (c + 1).to_string()).collect()),
        join(alloc.raw_powers().iter().map(f64::to_string).collect()),
        join(alloc.hat_powers().iter().map(f64::to_string).collect()),
        best.k.to_string(),
        best.expected_drop().to_string(),
        best.solution.true_value.to_string(),
        best.solution.envelope_value.to_string(),
        best.solution.gap_certificate.to_string(),
    ])?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    artifacts.write(
        None,
        &String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?,
    )
}

/// Policy names accepted in `policy.names`.
pub fn policy_names() -> &'static [&'static str] {
    &PolicySpec::NAMES
}
