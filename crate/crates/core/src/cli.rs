//! Command-line front end. [`run`] parses arguments, dispatches to one
//! analysis and renders the result as JSON or CSV.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cavity::{cavity_sweep, nd_asymptotic, sweep_csv, Ensemble};
use crate::collective::{
    coupling_matrix, coupling_matrix_directed, msf_eigenratio, pinning_eigenratio, pinning_nodes, pinning_sync_simulate,
    vicsek_leader_run, vicsek_order_parameter, vicsek_step, PinningConfig, PinningStrategy, VicsekParams, VicsekState,
};
use crate::energy::{energy_bounds, energy_spectrum, gramian, min_energy_input, spectrum_csv, trace_csv};
use crate::error::Error;
use crate::exact::{eigen_table, kalman_rank, parse_dense_csv, pbh_min_drivers, self_loop_sweep, DenseSystem};
use crate::graph::generate::{barabasi_albert, chain, complete, erdos_renyi_undirected, ring, rng, star};
use crate::graph::{parse_digraph, parse_ungraph, DiGraph, UnGraph};
use crate::observability::{
    inference_diagram, inference_from_sparsity, luenberger_observe, mds_solve, min_sensors, observability_threshold,
    observability_transition, parse_reactions, sensors_via_duality, target_sensor,
};
use crate::ode::{integrate, time_grid, toy_system, OdeSystem, Tolerances};
use crate::steering::{
    compensatory_perturbation, fvs_clamp, fvs_find, hubler_input, ogy_stabilize_henon, pyragas_feedback, rossler_upo,
    ClampTarget, CompensationSpec, FvsMode, HenonParams,
};
use crate::structural::{
    classify_links, classify_nodes, classify_nodes_deletion, control_centrality, control_profile, min_actuators,
    min_driver_set, structural_controllability_check, switchboard_drivers, Controllability,
};

/// Version tag written at the top level of every JSON report.
pub const SCHEMA: &str = "netctl/1";

/// Subcommand name and the library operations it exposes. Each analysis
/// operation appears under exactly one subcommand.
pub const DISPATCH: &[(&str, &[&str])] = &[
    ("drivers", &["min_driver_set"]),
    ("check", &["structural_controllability_check"]),
    ("classify-links", &["classify_links"]),
    ("classify-nodes", &["classify_nodes", "classify_nodes_deletion"]),
    ("profile", &["control_profile"]),
    ("centrality", &["control_centrality"]),
    ("actuators", &["min_actuators"]),
    ("switchboard", &["switchboard_drivers"]),
    ("cavity", &["solve_cavity", "nd_asymptotic"]),
    ("exact-nd", &["kalman_rank", "pbh_min_drivers", "eigen_table", "self_loop_sweep"]),
    ("energy", &["gramian", "min_energy_input", "energy_bounds"]),
    ("spectrum", &["energy_spectrum"]),
    ("sensors", &["inference_diagram", "min_sensors", "sensors_via_duality"]),
    ("target-sensor", &["target_sensor"]),
    ("mds", &["mds_solve"]),
    ("obs-transition", &["observability_transition"]),
    ("observer", &["luenberger_observe"]),
    ("hubler", &["hubler_input"]),
    ("ogy", &["ogy_stabilize_henon"]),
    ("pyragas", &["pyragas_feedback"]),
    ("compensate", &["compensatory_perturbation"]),
    ("fvs", &["fvs_find"]),
    ("clamp", &["fvs_clamp"]),
    ("msf", &["msf_eigenratio"]),
    ("pinning", &["pinning_eigenratio"]),
    ("pinning-sim", &["pinning_sync_simulate"]),
    ("vicsek", &["vicsek_step", "vicsek_order_parameter"]),
    ("vicsek-leader", &["vicsek_leader_run"]),
];

#[derive(Debug, Parser)]
#[command(name = "netctl", version, about = "Controllability and observability analysis of complex networks")]
pub struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, env = "NETCTL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum driver set from a maximum matching.
    Drivers(GraphIn),
    /// Structural controllability of a given driver set.
    Check(CheckArgs),
    /// Critical, redundant and ordinary links.
    ClassifyLinks(GraphIn),
    /// Critical, intermittent and redundant nodes.
    ClassifyNodes(ClassifyNodesArgs),
    /// Source, external and internal dilation shares of the drivers.
    Profile(GraphIn),
    /// Control centrality of a node set.
    Centrality(CentralityArgs),
    /// Minimum actuator placement.
    Actuators(GraphIn),
    /// Drivers under switchboard dynamics.
    Switchboard(GraphIn),
    /// Cavity prediction of the driver fraction, optionally with simulation.
    Cavity(CavityArgs),
    /// Exact driver count from eigenvalue multiplicities.
    #[command(name = "exact-nd")]
    ExactNd(ExactArgs),
    /// Gramian, energy bounds and the minimum-energy input.
    Energy(EnergyArgs),
    /// Spectrum of control energies over eigen-directions.
    Spectrum(SpectrumArgs),
    /// Minimum sensors from root strongly connected components.
    Sensors(InferenceIn),
    /// Cheapest single sensor that observes a target set.
    #[command(name = "target-sensor")]
    TargetSensor(TargetSensorArgs),
    /// Minimum dominating set of an undirected graph.
    Mds(UnGraphIn),
    /// Largest observable component against the share of measured nodes.
    #[command(name = "obs-transition")]
    ObsTransition(ObsTransitionArgs),
    /// Luenberger observer error trace.
    Observer(ObserverArgs),
    /// Open-loop entrainment onto a goal trajectory.
    Hubler(HublerArgs),
    /// OGY stabilisation of the Henon fixed point.
    Ogy(OgyArgs),
    /// Delayed feedback control of an unstable periodic orbit.
    Pyragas(PyragasArgs),
    /// Shift of an initial state into the basin of a target.
    Compensate(CompensateArgs),
    /// Feedback vertex set of a directed graph.
    Fvs(FvsArgs),
    /// Steering to a target attractor by clamping a node set.
    Clamp(ClampArgs),
    /// Master-stability eigenratio of the coupling matrix.
    Msf(MsfArgs),
    /// Eigenratio of the pinned coupling matrix.
    Pinning(PinningArgs),
    /// Simulated pinning synchronisation of coupled oscillators.
    #[command(name = "pinning-sim")]
    PinningSim(PinningSimArgs),
    /// Vicsek order parameter.
    Vicsek(VicsekArgs),
    /// Vicsek followers aligning with a fixed-heading leader.
    #[command(name = "vicsek-leader")]
    VicsekLeader(LeaderArgs),
}

/// Directed edge list `src dst [weight]`; `-` reads standard input.
#[derive(Debug, Args)]
pub struct GraphIn {
    #[arg(long)]
    pub input: PathBuf,
}

/// Undirected edge list or a generated graph.
#[derive(Debug, Args)]
pub struct UnGraphIn {
    #[arg(long, required_unless_present = "generate", conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// One of `ba:N:m`, `er:N:k`, `ring:N`, `chain:N`, `star:N`, `complete:N`.
    #[arg(long)]
    pub generate: Option<String>,
}

/// State matrix from a weighted edge list (`a_ij` is the weight of `j -> i`)
/// or a dense CSV whose rows and columns are labelled `0..N-1`.
#[derive(Debug, Args)]
pub struct MatrixIn {
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

/// Built-in dynamical system with `name=value` parameter overrides.
#[derive(Debug, Args)]
pub struct SystemIn {
    /// rossler, toggle or bistable.
    #[arg(long)]
    pub system: String,
    #[arg(long = "param", value_parser = parse_kv)]
    pub params: Vec<(String, f64)>,
}

/// Inference diagram source: a reaction file, a Jacobian sparsity CSV, or a
/// state digraph whose edges point from influencing to influenced node.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InferenceIn {
    #[arg(long)]
    pub reactions: Option<PathBuf>,
    #[arg(long)]
    pub jacobian: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub graph: GraphIn,
    /// Driver labels.
    #[arg(long, value_delimiter = ',', required = true)]
    pub drivers: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ClassifyNodesArgs {
    #[command(flatten)]
    pub graph: GraphIn,
    /// Also tag nodes by the effect of their removal on the driver count.
    #[arg(long)]
    pub deletion: bool,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    #[command(flatten)]
    pub graph: GraphIn,
    /// Labels of the nodes receiving the input.
    #[arg(long, value_delimiter = ',', required = true)]
    pub nodes: Vec<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Dist {
    Er,
    Sf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CavityArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// Mean degrees, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub kmean: Vec<f64>,
    /// Degree exponent of the scale-free ensemble.
    #[arg(long, default_value_t = 3.0)]
    pub gamma: f64,
    /// Network size for simulated samples; 0 skips simulation.
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Simulated networks per mean degree.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ExactArgs {
    #[command(flatten)]
    pub matrix: MatrixIn,
    /// Self-loop weights for a randomised self-loop experiment.
    #[arg(long, value_delimiter = ',', requires = "densities")]
    pub loop_weights: Vec<f64>,
    /// Share of nodes carrying each self-loop weight.
    #[arg(long, value_delimiter = ',', requires = "loop_weights")]
    pub densities: Vec<f64>,
    /// Random placements in the self-loop experiment.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub matrix: MatrixIn,
    #[arg(long, value_delimiter = ',', required = true)]
    pub drivers: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Initial state; zero when omitted.
    #[arg(long, value_delimiter = ',')]
    pub from: Vec<f64>,
    /// Final state; enables the control trace.
    #[arg(long, value_delimiter = ',')]
    pub to: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub matrix: MatrixIn,
    #[arg(long, value_delimiter = ',', required = true)]
    pub drivers: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct TargetSensorArgs {
    #[command(flatten)]
    pub source: InferenceIn,
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ObsTransitionArgs {
    #[command(flatten)]
    pub graph: UnGraphIn,
    /// Shares of measured nodes at which to sample the curve.
    #[arg(long, value_delimiter = ',')]
    pub phi: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ObserverArgs {
    /// Dense CSV of A.
    #[arg(long)]
    pub a: PathBuf,
    /// Dense CSV of the output matrix C.
    #[arg(long)]
    pub c: PathBuf,
    /// Dense CSV of the observer gain L.
    #[arg(long)]
    pub gain: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub x0: Vec<f64>,
    /// Observer start; zero when omitted.
    #[arg(long, value_delimiter = ',')]
    pub z0: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct HublerArgs {
    #[command(flatten)]
    pub system: SystemIn,
    /// Dense CSV of the input matrix; identity when omitted.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Goal `g(t) = center + amplitude sin(omega t)`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub center: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub amplitude: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Initial state; the goal at time zero when omitted.
    #[arg(long, value_delimiter = ',')]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct OgyArgs {
    #[arg(long, default_value_t = 1.4)]
    pub p0: f64,
    #[arg(long, default_value_t = 0.3)]
    pub b: f64,
    /// Radius of the control region.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Largest admissible parameter kick; 1% of p0 by default.
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Start `x,y`; a random attractor point when omitted.
    #[arg(long, value_delimiter = ',')]
    pub x0: Vec<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PyragasArgs {
    #[command(flatten)]
    pub system: SystemIn,
    /// Index of the observed and controlled coordinate.
    #[arg(long, default_value_t = 1)]
    pub output_index: usize,
    /// Feedback gain K in `u = K [y(t) - y(t - tau)]`.
    #[arg(long, default_value_t = -0.2)]
    pub gain: f64,
    /// Delay; the period-one orbit of a three-dimensional flow when omitted.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 400.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,1,0")]
    pub x0: Vec<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompensateArgs {
    #[command(flatten)]
    pub system: SystemIn,
    #[arg(long, value_delimiter = ',', required = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub target: Vec<f64>,
    /// Perturbable coordinates; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub control: Vec<usize>,
    /// Lower bounds on the cumulative shift, one per control coordinate.
    #[arg(long, value_delimiter = ',')]
    pub lower: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub upper: Vec<f64>,
    #[arg(long, default_value_t = 1e-2)]
    pub kappa: f64,
    #[arg(long, default_value_t = 20.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FvsChoice {
    Exact,
    Heuristic,
    /// Exact up to the exhaustive-search limit, heuristic beyond.
    Auto,
}

#[derive(Debug, Args)]
pub struct FvsArgs {
    #[command(flatten)]
    pub graph: GraphIn,
    #[arg(long, value_enum, default_value_t = FvsChoice::Auto)]
    pub mode: FvsChoice,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ClampArgs {
    #[command(flatten)]
    pub system: SystemIn,
    /// Indices of the clamped coordinates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub clamp: Vec<usize>,
    /// Start state, relaxed onto its attractor first.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x0: Vec<f64>,
    /// A state in the target basin, relaxed onto the target attractor.
    #[arg(long, value_delimiter = ',', required = true)]
    pub target_start: Vec<f64>,
    /// Relaxation time for both starts.
    #[arg(long, default_value_t = 80.0)]
    pub settle: f64,
    #[arg(long, default_value_t = 30.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 300)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct MsfArgs {
    #[command(flatten)]
    pub graph: UnGraphIn,
    /// Read the input as a weighted directed edge list.
    #[arg(long)]
    pub directed: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Strategy {
    Degree,
    Random,
}

impl From<Strategy> for PinningStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Degree => PinningStrategy::Degree,
            Strategy::Random => PinningStrategy::Random,
        }
    }
}

/// Which nodes are pinned: explicit labels, or a share chosen by strategy.
#[derive(Debug, Args)]
pub struct PinIn {
    #[arg(long, value_delimiter = ',')]
    pub pinned: Vec<String>,
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    #[arg(long, value_enum, default_value_t = Strategy::Degree)]
    pub strategy: Strategy,
}

#[derive(Debug, Args)]
pub struct PinningArgs {
    #[command(flatten)]
    pub graph: UnGraphIn,
    #[command(flatten)]
    pub pin: PinIn,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Pinning gains, comma separated for a sweep.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub kappa: Vec<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct PinningSimArgs {
    #[command(flatten)]
    pub graph: UnGraphIn,
    #[command(flatten)]
    pub system: SystemIn,
    #[command(flatten)]
    pub pin: PinIn,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Adaptation rate of the pinned gains; fixed gains when omitted.
    #[arg(long)]
    pub adaptive: Option<f64>,
    /// Diagonal of the inner coupling map; all ones when omitted.
    #[arg(long, value_delimiter = ',')]
    pub coupling_dims: Vec<f64>,
    /// Half-width of the uniform spread of initial states around the reference.
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct VicsekArgs {
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 7.0)]
    pub l: f64,
    #[arg(long, default_value_t = 0.03)]
    pub v0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Steps excluded from the average; half the run by default.
    #[arg(long)]
    pub transient: Option<usize>,
    /// Write agent snapshots `t,i,x,y,theta` to this CSV.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub snapshot_every: usize,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LeaderArgs {
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub l: f64,
    #[arg(long, default_value_t = 0.03)]
    pub v0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta0: f64,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
}

/// Why a run failed: usage errors exit with 2, analysis errors with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Analysis(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Analysis(e)
    }
}

type Outcome = std::result::Result<Report, Failure>;

/// A rendered-on-demand result: JSON fields plus an optional CSV view.
#[derive(Debug)]
pub struct Report {
    fields: Map<String, Value>,
    csv: Option<String>,
    csv_default: bool,
}

impl Report {
    fn new(fields: Value) -> Self {
        match fields {
            Value::Object(fields) => Self { fields, csv: None, csv_default: false },
            _ => unreachable!("reports are JSON objects"),
        }
    }

    fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn csv_by_default(mut self) -> Self {
        self.csv_default = true;
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad number in {s:?}"))?;
    Ok((k.trim().to_string(), v))
}

fn read(path: &Path) -> Result<String, Error> {
    if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Error::Io(e.to_string()))
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn labels_of(labels: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| labels[i].clone()).collect()
}

fn column(header: &str, rows: &[String]) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn resolve(labels: &[String], names: &[String]) -> Result<Vec<usize>, Error> {
    names
        .iter()
        .map(|n| labels.iter().position(|l| l == n).ok_or_else(|| Error::UnknownNode(n.clone())))
        .collect()
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl GraphIn {
    fn load(&self) -> Result<DiGraph, Error> {
        parse_digraph(&read(&self.input)?)
    }
}

impl UnGraphIn {
    fn load(&self, seed: u64) -> std::result::Result<UnGraph, Failure> {
        if let Some(p) = &self.input {
            return Ok(parse_ungraph(&read(p)?)?);
        }
        let spec = self.generate.as_deref().expect("clap requires one source");
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || usage(format!("bad --generate spec {spec:?}"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        Ok(match parts.as_slice() {
            ["ba", n, m] => barabasi_albert(int(n)?, int(m)?, seed),
            ["er", n, k] => erdos_renyi_undirected(int(n)?, k.parse().map_err(|_| bad())?, seed),
            ["ring", n] => ring(int(n)?),
            ["chain", n] => chain(int(n)?),
            ["star", n] => star(int(n)?),
            ["complete", n] => complete(int(n)?),
            _ => return Err(bad()),
        })
    }
}

impl MatrixIn {
    fn load(&self) -> Result<(DMatrix<f64>, Vec<String>), Error> {
        if let Some(p) = &self.matrix {
            let a = parse_dense_csv(&read(p)?)?;
            let labels = index_labels(a.nrows());
            Ok((a, labels))
        } else {
            let g = parse_digraph(&read(self.input.as_ref().expect("clap requires one source"))?)?;
            Ok((g.to_state_matrix(), g.labels().to_vec()))
        }
    }

    fn system(&self, drivers: &[String]) -> Result<(DenseSystem, Vec<String>), Error> {
        let (a, labels) = self.load()?;
        let idx = resolve(&labels, drivers)?;
        Ok((DenseSystem::with_drivers(a, &idx)?, labels))
    }
}

impl SystemIn {
    fn load(&self) -> Result<OdeSystem, Error> {
        toy_system(&self.system, &self.params)
    }
}

impl InferenceIn {
    /// Inference diagram plus, for state-digraph input, the digraph itself.
    fn load(&self) -> Result<(DiGraph, Option<DiGraph>), Error> {
        if let Some(p) = &self.reactions {
            Ok((inference_diagram(&parse_reactions(&read(p)?)?), None))
        } else if let Some(p) = &self.jacobian {
            Ok((inference_from_sparsity(&parse_dense_csv(&read(p)?)?)?, None))
        } else {
            let g = parse_digraph(&read(self.input.as_ref().expect("clap requires one source"))?)?;
            Ok((g.transpose(), Some(g)))
        }
    }
}

impl PinIn {
    fn nodes(&self, g: &UnGraph, seed: u64) -> Result<Vec<usize>, Error> {
        if self.pinned.is_empty() {
            Ok(pinning_nodes(g, self.fraction, self.strategy.into(), seed))
        } else {
            let mut p = resolve(g.labels(), &self.pinned)?;
            p.sort_unstable();
            p.dedup();
            Ok(p)
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Drivers(_) => "drivers",
            Command::Check(_) => "check",
            Command::ClassifyLinks(_) => "classify-links",
            Command::ClassifyNodes(_) => "classify-nodes",
            Command::Profile(_) => "profile",
            Command::Centrality(_) => "centrality",
            Command::Actuators(_) => "actuators",
            Command::Switchboard(_) => "switchboard",
            Command::Cavity(_) => "cavity",
            Command::ExactNd(_) => "exact-nd",
            Command::Energy(_) => "energy",
            Command::Spectrum(_) => "spectrum",
            Command::Sensors(_) => "sensors",
            Command::TargetSensor(_) => "target-sensor",
            Command::Mds(_) => "mds",
            Command::ObsTransition(_) => "obs-transition",
            Command::Observer(_) => "observer",
            Command::Hubler(_) => "hubler",
            Command::Ogy(_) => "ogy",
            Command::Pyragas(_) => "pyragas",
            Command::Compensate(_) => "compensate",
            Command::Fvs(_) => "fvs",
            Command::Clamp(_) => "clamp",
            Command::Msf(_) => "msf",
            Command::Pinning(_) => "pinning",
            Command::PinningSim(_) => "pinning-sim",
            Command::Vicsek(_) => "vicsek",
            Command::VicsekLeader(_) => "vicsek-leader",
        }
    }
}

fn dispatch(cmd: &Command, seed: u64) -> Outcome {
    match cmd {
        Command::Drivers(a) => drivers(a),
        Command::Check(a) => check(a),
        Command::ClassifyLinks(a) => links(a),
        Command::ClassifyNodes(a) => nodes(a),
        Command::Profile(a) => Ok(Report::new(to_value(&control_profile(&a.load()?)))),
        Command::Centrality(a) => centrality(a),
        Command::Actuators(a) => actuators(a),
        Command::Switchboard(a) => switchboard(a),
        Command::Cavity(a) => cavity(a, seed),
        Command::ExactNd(a) => exact(a, seed),
        Command::Energy(a) => energy(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Sensors(a) => sensors(a),
        Command::TargetSensor(a) => target(a),
        Command::Mds(a) => mds(a, seed),
        Command::ObsTransition(a) => transition(a, seed),
        Command::Observer(a) => observer(a),
        Command::Hubler(a) => hubler(a),
        Command::Ogy(a) => ogy(a, seed),
        Command::Pyragas(a) => pyragas(a),
        Command::Compensate(a) => compensate(a),
        Command::Fvs(a) => fvs(a),
        Command::Clamp(a) => clamp(a),
        Command::Msf(a) => msf(a, seed),
        Command::Pinning(a) => pinning(a, seed),
        Command::PinningSim(a) => pinning_sim(a, seed),
        Command::Vicsek(a) => vicsek(a, seed),
        Command::VicsekLeader(a) => leader(a, seed),
    }
}

fn drivers(a: &GraphIn) -> Outcome {
    let g = a.load()?;
    let r = min_driver_set(&g);
    let labels = labels_of(g.labels(), &r.drivers);
    let n_d = if r.n_nodes == 0 { 0.0 } else { r.n_drivers as f64 / r.n_nodes as f64 };
    Ok(Report::new(json!({
        "n_nodes": r.n_nodes,
        "n_edges": g.n_edges(),
        "matching_size": r.matching_size,
        "n_drivers": r.n_drivers,
        "n_d": n_d,
        "drivers": labels,
    }))
    .csv(column("driver", &labels)))
}

fn check(a: &CheckArgs) -> Outcome {
    let g = a.graph.load()?;
    let d = g.indices_of(&a.drivers)?;
    let l = g.labels();
    let v = structural_controllability_check(&g, &d)?;
    let detail = match &v {
        Controllability::Controllable => json!({"verdict": "controllable"}),
        Controllability::Inaccessible { node } => json!({"verdict": "inaccessible", "node": l[*node]}),
        Controllability::Dilation { set, in_neighbors, inputs } => json!({
            "verdict": "dilation",
            "set": labels_of(l, set),
            "in_neighbors": labels_of(l, in_neighbors),
            "inputs": inputs,
        }),
    };
    Ok(Report::new(json!({
        "drivers": labels_of(l, &d),
        "controllable": v.is_controllable(),
        "witness": detail,
    })))
}

fn links(a: &GraphIn) -> Outcome {
    let g = a.load()?;
    let c = classify_links(&g);
    let l = g.labels();
    let rows: Vec<Value> = g
        .edges()
        .iter()
        .zip(&c.tags)
        .map(|(e, t)| json!({"src": l[e.src], "dst": l[e.dst], "tag": to_value(t)}))
        .collect();
    let mut csv = String::from("src,dst,tag\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{}", r["src"].as_str().unwrap_or(""), r["dst"].as_str().unwrap_or(""), r["tag"].as_str().unwrap_or(""));
    }
    Ok(Report::new(json!({
        "n_edges": g.n_edges(),
        "critical": c.critical,
        "redundant": c.redundant,
        "ordinary": c.ordinary,
        "links": rows,
    }))
    .csv(csv))
}

fn nodes(a: &ClassifyNodesArgs) -> Outcome {
    let g = a.graph.load()?;
    let c = classify_nodes(&g);
    let l = g.labels();
    let roles: Map<String, Value> = l.iter().cloned().zip(c.roles.iter().map(to_value)).collect();
    let mut fields = json!({
        "critical": c.critical,
        "intermittent": c.intermittent,
        "redundant": c.redundant,
        "roles": roles,
    });
    let deletion = a.deletion.then(|| classify_nodes_deletion(&g));
    let mut csv = String::from(if deletion.is_some() { "node,role,deletion\n" } else { "node,role\n" });
    for (i, label) in l.iter().enumerate() {
        let role = to_value(&c.roles[i]);
        let _ = write!(csv, "{label},{}", role.as_str().unwrap_or(""));
        if let Some(d) = &deletion {
            let _ = write!(csv, ",{}", to_value(&d[i]).as_str().unwrap_or(""));
        }
        csv.push('\n');
    }
    if let Some(d) = deletion {
        let tags: Map<String, Value> = l.iter().cloned().zip(d.iter().map(to_value)).collect();
        fields["deletion"] = Value::Object(tags);
    }
    Ok(Report::new(fields).csv(csv))
}

fn centrality(a: &CentralityArgs) -> Outcome {
    let g = a.graph.load()?;
    let idx = g.indices_of(&a.nodes)?;
    let c = control_centrality(&g, &idx)?;
    Ok(Report::new(json!({"nodes": labels_of(g.labels(), &idx), "centrality": c})))
}

fn actuators(a: &GraphIn) -> Outcome {
    let g = a.load()?;
    let r = min_actuators(&g);
    let l = g.labels();
    Ok(Report::new(json!({
        "n_drivers": r.n_drivers,
        "beta": r.beta,
        "alpha": r.alpha,
        "n_actuators": r.n_actuators,
        "drivers": labels_of(l, &r.drivers),
        "actuators": labels_of(l, &r.actuators),
    }))
    .csv(column("actuator", &labels_of(l, &r.actuators))))
}

fn switchboard(a: &GraphIn) -> Outcome {
    let g = a.load()?;
    let d = labels_of(g.labels(), &switchboard_drivers(&g));
    Ok(Report::new(json!({"n_drivers": d.len(), "drivers": d})).csv(column("driver", &d)))
}

fn cavity(a: &CavityArgs, seed: u64) -> Outcome {
    let ens = match a.dist {
        Dist::Er => Ensemble::ErdosRenyi,
        Dist::Sf => Ensemble::StaticScaleFree { gamma: a.gamma },
    };
    let seeds: Vec<u64> = (0..a.trials as u64).map(|t| seed.wrapping_add(t)).collect();
    let rows = cavity_sweep(ens, &a.kmean, a.n, &seeds)?;
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut v = to_value(r);
            v["n_d_asymptotic"] = json!(nd_asymptotic(ens, r.k_mean));
            v
        })
        .collect();
    Ok(Report::new(json!({"rows": json_rows})).csv(sweep_csv(&rows)).csv_by_default())
}

fn exact(a: &ExactArgs, seed: u64) -> Outcome {
    let (m, labels) = a.matrix.load()?;
    let n = m.nrows();
    let p = pbh_min_drivers(&m)?;
    let table = eigen_table(&m)?;
    let sys = DenseSystem::with_drivers(m.clone(), &p.unit_input_drivers)?;
    let k = kalman_rank(&sys);
    let mut fields = json!({
        "n_nodes": n,
        "n_drivers": p.n_drivers,
        "n_d": if n == 0 { 0.0 } else { p.n_drivers as f64 / n as f64 },
        "lambda": {"re": p.lambda_re, "im": p.lambda_im},
        "multiplicity": p.multiplicity,
        "drivers": labels_of(&labels, &p.drivers),
        "unit_input_drivers": labels_of(&labels, &p.unit_input_drivers),
        "kalman_rank": k.rank,
        "controllable": k.controllable,
        "symmetric": table.symmetric,
        "eigenvalues": to_value(&table.clusters),
    });
    if !a.loop_weights.is_empty() {
        let seeds: Vec<u64> = (0..a.trials as u64).map(|t| seed.wrapping_add(t)).collect();
        let s = self_loop_sweep(&m, &a.loop_weights, &a.densities, &seeds)?;
        fields["self_loops"] = to_value(&s);
    }
    let mut csv = String::from("re,im,algebraic,geometric\n");
    for c in &table.clusters {
        let _ = writeln!(csv, "{},{},{},{}", c.re, c.im, c.algebraic, c.geometric);
    }
    Ok(Report::new(fields).csv(csv))
}

fn energy(a: &EnergyArgs) -> Outcome {
    let (sys, labels) = a.matrix.system(&a.drivers)?;
    let n = sys.n();
    let g = gramian(&sys, a.horizon)?;
    let bounds = energy_bounds(&sys, a.horizon)?;
    let mut fields = json!({
        "drivers": a.drivers,
        "horizon": a.horizon,
        "bounds": to_value(&bounds),
        "gramian_eigenvalues": g.eta,
        "labels": labels,
    });
    if a.to.is_empty() {
        if !a.from.is_empty() {
            return Err(usage("--from needs --to"));
        }
        return Ok(Report::new(fields));
    }
    let from = if a.from.is_empty() { vec![0.0; n] } else { a.from.clone() };
    if from.len() != n || a.to.len() != n {
        return Err(Error::DimensionMismatch(format!("states must have {n} entries")).into());
    }
    let tr = min_energy_input(&sys, &DVector::from_vec(from), &DVector::from_vec(a.to.clone()), a.horizon, a.steps)?;
    fields["energy"] = json!(tr.energy);
    fields["energy_quadrature"] = json!(tr.energy_quadrature);
    fields["terminal_error"] = json!(tr.terminal_error);
    fields["ill_conditioned"] = json!(tr.ill_conditioned);
    Ok(Report::new(fields).csv(trace_csv(&tr)))
}

fn spectrum(a: &SpectrumArgs) -> Outcome {
    let (sys, labels) = a.matrix.system(&a.drivers)?;
    let s = energy_spectrum(&sys, a.horizon, a.bins)?;
    let energies: Vec<Value> =
        s.energies.iter().map(|e| json!({"energy": e.energy, "dominant_node": labels[e.dominant_node]})).collect();
    let density: Vec<Value> = s.density.iter().map(|(e, d)| json!({"energy": e, "density": d})).collect();
    Ok(Report::new(json!({"energies": energies, "density": density})).csv(spectrum_csv(&s)).csv_by_default())
}

fn sensors(a: &InferenceIn) -> Outcome {
    let (inf, state) = a.load()?;
    let r = min_sensors(&inf);
    let l = inf.labels();
    let sccs: Vec<Vec<String>> = r.root_sccs.iter().map(|m| labels_of(l, m)).collect();
    let mut fields = json!({
        "n_nodes": inf.n_nodes(),
        "n_sensors": r.n_sensors,
        "sensors": labels_of(l, &r.sensors),
        "root_sccs": sccs,
        "pure_products": labels_of(l, &r.pure_products),
        "multiplicity": r.multiplicity,
    });
    if let Some(g) = state {
        let d = sensors_via_duality(&g);
        fields["duality"] = json!({"n_sensors": d.n_drivers, "sensors": labels_of(g.labels(), &d.drivers)});
    }
    Ok(Report::new(fields).csv(column("sensor", &labels_of(l, &r.sensors))))
}

fn target(a: &TargetSensorArgs) -> Outcome {
    let (inf, _) = a.source.load()?;
    let t = inf.indices_of(&a.targets)?;
    let r = target_sensor(&inf, &t)?;
    Ok(Report::new(json!({"targets": a.targets, "sensor": inf.label(r.sensor), "cost": r.cost})))
}

fn mds(a: &UnGraphIn, seed: u64) -> Outcome {
    let g = a.load(seed)?;
    let d = mds_solve(&g);
    let n = g.n_nodes();
    let labels = labels_of(g.labels(), &d.nodes);
    Ok(Report::new(json!({
        "n_nodes": n,
        "size": d.nodes.len(),
        "fraction": if n == 0 { 0.0 } else { d.nodes.len() as f64 / n as f64 },
        "exact": d.exact,
        "nodes": labels,
    }))
    .csv(column("node", &labels)))
}

fn transition(a: &ObsTransitionArgs, seed: u64) -> Outcome {
    let g = a.graph.load(seed)?;
    let threshold = observability_threshold(&g, a.trials, seed)?;
    let mut rows = Vec::new();
    let mut csv = String::from("phi,fraction\n");
    for &phi in &a.phi {
        let f = observability_transition(&g, phi, a.trials, seed)?;
        let _ = writeln!(csv, "{phi},{f}");
        rows.push(json!({"phi": phi, "fraction": f}));
    }
    Ok(Report::new(json!({"n_nodes": g.n_nodes(), "threshold": threshold, "curve": rows})).csv(csv))
}

fn observer(a: &ObserverArgs) -> Outcome {
    let am = parse_dense_csv(&read(&a.a)?)?;
    let c = parse_dense_csv(&read(&a.c)?)?;
    let l = parse_dense_csv(&read(&a.gain)?)?;
    let n = am.nrows();
    let sys = DenseSystem::new(am, DMatrix::zeros(n, 1), Some(c))?;
    let z0 = if a.z0.is_empty() { vec![0.0; n] } else { a.z0.clone() };
    let tr = luenberger_observe(
        &sys,
        &l,
        &DVector::from_vec(a.x0.clone()),
        &DVector::from_vec(z0),
        |_| DVector::zeros(1),
        a.horizon,
        a.steps,
    )?;
    let mut csv = String::from("t,error\n");
    for (t, e) in tr.t.iter().zip(&tr.error) {
        let _ = writeln!(csv, "{t},{e}");
    }
    Ok(Report::new(json!({
        "final_error": tr.error.last(),
        "initial_error": tr.error.first(),
        "t": tr.t,
        "error": tr.error,
    }))
    .csv(csv))
}

fn hubler(a: &HublerArgs) -> Outcome {
    let sys = a.system.load()?;
    let d = sys.dim;
    let b = match &a.b {
        Some(p) => parse_dense_csv(&read(p)?)?,
        None => DMatrix::identity(d, d),
    };
    let amp = if a.amplitude.is_empty() { vec![0.0; a.center.len()] } else { a.amplitude.clone() };
    if a.center.len() != d || amp.len() != d {
        return Err(Error::DimensionMismatch(format!("goal needs {d} entries")).into());
    }
    let w = a.omega;
    let (c2, a2) = (a.center.clone(), amp.clone());
    let goal = move |t: f64| c2.iter().zip(&a2).map(|(c, a)| c + a * (w * t).sin()).collect::<Vec<_>>();
    let rate = move |t: f64| amp.iter().map(|a| a * w * (w * t).cos()).collect::<Vec<_>>();
    let x0 = if a.x0.is_empty() { goal(0.0) } else { a.x0.clone() };
    let tr = hubler_input(&sys, &b, &goal, rate, &x0, a.horizon, a.samples)?;
    let mut csv = String::from("t,error");
    for i in 0..d {
        let _ = write!(csv, ",x{i}");
    }
    for i in 0..d {
        let _ = write!(csv, ",u{i}");
    }
    csv.push('\n');
    for k in 0..tr.t.len() {
        let _ = writeln!(csv, "{},{},{},{}", tr.t[k], tr.error[k], join(&tr.x[k]), join(&tr.u[k]));
    }
    Ok(Report::new(json!({
        "final_error": tr.error.last(),
        "max_error": tr.error.iter().copied().fold(0.0, f64::max),
        "final_state": tr.x.last(),
    }))
    .csv(csv))
}

fn ogy(a: &OgyArgs, seed: u64) -> Outcome {
    let mut hp = HenonParams::new(a.p0, a.b);
    if let Some(d) = a.delta {
        hp.delta = d;
    }
    if let Some(c) = a.cap {
        hp.cap = c;
    }
    let x0 = match a.x0.as_slice() {
        [] => None,
        [x, y] => Some([*x, *y]),
        _ => return Err(usage("--x0 takes two values")),
    };
    let tr = ogy_stabilize_henon(&hp, x0, a.steps, seed)?;
    let mut csv = String::from("step,x,y,dp\n");
    for k in 0..tr.x.len() {
        let dp = tr.dp.get(k).map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{k},{},{},{dp}", tr.x[k], tr.y[k]);
    }
    Ok(Report::new(json!({
        "fixed_point": tr.fixed_point,
        "gain": hp.gain,
        "delta": hp.delta,
        "cap": hp.cap,
        "capture_step": tr.capture_step,
        "post_capture_deviation": tr.post_capture_deviation,
        "max_kick": tr.max_kick,
    }))
    .csv(csv))
}

fn pyragas(a: &PyragasArgs) -> Outcome {
    let sys = a.system.load()?;
    let (tau, period) = match a.tau {
        Some(t) => (t, None),
        None => {
            let upo = rossler_upo(&sys, &a.x0)?;
            (upo.period, Some(upo))
        }
    };
    let tr = pyragas_feedback(&sys, a.output_index, a.gain, tau, a.horizon, &a.x0, a.dt)?;
    let mut csv = String::from("t,y,u\n");
    for k in 0..tr.t.len() {
        let _ = writeln!(csv, "{},{},{}", tr.t[k], tr.y[k], tr.u[k]);
    }
    Ok(Report::new(json!({
        "tau": tau,
        "gain": a.gain,
        "mismatch": tr.mismatch,
        "final_state": tr.final_state,
        "orbit": period.map(|u| to_value(&u)),
    }))
    .csv(csv))
}

fn compensate(a: &CompensateArgs) -> Outcome {
    let sys = a.system.load()?;
    let control = if a.control.is_empty() { (0..sys.dim).collect() } else { a.control.clone() };
    let k = control.len();
    let fill = |v: &[f64], d: f64| if v.is_empty() { vec![d; k] } else { v.to_vec() };
    let spec = CompensationSpec {
        lower: fill(&a.lower, f64::NEG_INFINITY),
        upper: fill(&a.upper, f64::INFINITY),
        control_set: control,
        kappa: a.kappa,
        horizon: a.horizon,
        budget: a.budget,
    };
    let r = compensatory_perturbation(&sys, &a.x0, &a.target, &spec)?;
    Ok(Report::new(to_value(&r)))
}

fn fvs(a: &FvsArgs) -> Outcome {
    let g = a.graph.load()?;
    let mode = match a.mode {
        FvsChoice::Exact => FvsMode::Exact,
        FvsChoice::Heuristic => FvsMode::Heuristic,
        FvsChoice::Auto if g.n_nodes() <= crate::steering::EXACT_MAX => FvsMode::Exact,
        FvsChoice::Auto => FvsMode::Heuristic,
    };
    let r = fvs_find(&g, mode)?;
    let l = g.labels();
    Ok(Report::new(json!({
        "size": r.nodes.len(),
        "nodes": labels_of(l, &r.nodes),
        "order": labels_of(l, &r.order),
        "minimal": r.minimal,
        "exact": r.exact,
    }))
    .csv(column("node", &labels_of(l, &r.nodes))))
}

fn settle(sys: &OdeSystem, x: &[f64], t: f64) -> Result<Vec<f64>, Error> {
    if t <= 0.0 {
        return Ok(x.to_vec());
    }
    Ok(integrate(|t, x, d| sys.eval_into(t, x, &[], d), 0.0, x, &[t], Tolerances::default())?.remove(0))
}

fn clamp(a: &ClampArgs) -> Outcome {
    let sys = a.system.load()?;
    if a.x0.len() != sys.dim || a.target_start.len() != sys.dim {
        return Err(Error::DimensionMismatch(format!("states must have {} entries", sys.dim)).into());
    }
    let x0 = settle(&sys, &a.x0, a.settle)?;
    let start = settle(&sys, &a.target_start, a.settle)?;
    let t = time_grid(a.horizon, a.samples);
    let target = ClampTarget::from_orbit(&sys, &start, &t, &a.clamp)?;
    let tr = fvs_clamp(&sys, &a.clamp, &target, &x0)?;
    let mut csv = String::from("t");
    for i in 0..sys.dim {
        let _ = write!(csv, ",x{i}");
    }
    csv.push('\n');
    for (t, x) in tr.t.iter().zip(&tr.x) {
        let _ = writeln!(csv, "{t},{}", join(x));
    }
    Ok(Report::new(json!({
        "start": x0,
        "target_attractor": target.attractor,
        "final_state": tr.x.last(),
        "terminal_distance": tr.terminal_distance,
    }))
    .csv(csv))
}

fn msf(a: &MsfArgs, seed: u64) -> Outcome {
    let (m, n) = if a.directed {
        let p = a.graph.input.as_ref().ok_or_else(|| usage("--directed needs --input"))?;
        let g = parse_digraph(&read(p)?)?;
        (coupling_matrix_directed(&g), g.n_nodes())
    } else {
        let g = a.graph.load(seed)?;
        (coupling_matrix(&g), g.n_nodes())
    };
    let r = msf_eigenratio(&m)?;
    Ok(Report::new(json!({"n_nodes": n, "lambda2": r.lambda2, "lambda_max": r.lambda_max, "ratio": r.ratio})))
}

fn pinning(a: &PinningArgs, seed: u64) -> Outcome {
    let g = a.graph.load(seed)?;
    let pinned = a.pin.nodes(&g, seed)?;
    let coupling = coupling_matrix(&g);
    let mut rows = Vec::new();
    let mut csv = String::from("kappa,lambda2,lambda_max,ratio\n");
    for &k in &a.kappa {
        let r = pinning_eigenratio(&PinningConfig::uniform(coupling.clone(), a.sigma, k, pinned.clone()))?;
        let _ = writeln!(csv, "{k},{},{},{}", r.lambda2, r.lambda_max, r.ratio);
        rows.push(json!({"kappa": k, "lambda2": r.lambda2, "lambda_max": r.lambda_max, "ratio": r.ratio}));
    }
    Ok(Report::new(json!({
        "n_nodes": g.n_nodes(),
        "pinned": labels_of(g.labels(), &pinned),
        "sigma": a.sigma,
        "rows": rows,
    }))
    .csv(csv))
}

fn pinning_sim(a: &PinningSimArgs, seed: u64) -> Outcome {
    use rand::Rng;
    let g = a.graph.load(seed)?;
    let osc = a.system.load()?;
    let (n, d) = (g.n_nodes(), osc.dim);
    let pinned = a.pin.nodes(&g, seed)?;
    let cfg = PinningConfig::uniform(coupling_matrix(&g), a.sigma, a.kappa, pinned.clone());
    let dims = if a.coupling_dims.is_empty() { vec![1.0; d] } else { a.coupling_dims.clone() };
    let s0 = settle(&osc, &vec![1.0; d], 100.0)?;
    let mut r = rng(seed);
    let x0: Vec<Vec<f64>> =
        (0..n).map(|_| s0.iter().map(|s| s + a.spread * (2.0 * r.random::<f64>() - 1.0)).collect()).collect();
    let q = a.adaptive.map(|q| vec![q; n]);
    let tr = pinning_sync_simulate(&cfg, &osc, &dims, &s0, &x0, a.horizon, a.samples, q.as_deref())?;
    let mut csv = String::from("t,error\n");
    for (t, e) in tr.t.iter().zip(&tr.error) {
        let _ = writeln!(csv, "{t},{e}");
    }
    Ok(Report::new(json!({
        "pinned": labels_of(g.labels(), &pinned),
        "initial_error": tr.error.first(),
        "final_error": tr.error.last(),
        "final_gains": tr.gains.last(),
    }))
    .csv(csv))
}

fn vicsek(a: &VicsekArgs, seed: u64) -> Outcome {
    let params = VicsekParams { n: a.n, l: a.l, v0: a.v0, r: a.r, eta: a.eta, seed };
    let stats = vicsek_order_parameter(params, a.steps, a.transient);
    if let Some(path) = &a.snapshots {
        let every = a.snapshot_every.max(1);
        let mut out = String::from("t,i,x,y,theta\n");
        let mut s = VicsekState::random(params);
        for t in 0..=a.steps {
            if t % every == 0 {
                for (i, (p, th)) in s.pos.iter().zip(&s.theta).enumerate() {
                    let _ = writeln!(out, "{t},{i},{},{},{th}", p[0], p[1]);
                }
            }
            if t < a.steps {
                s = vicsek_step(&s);
            }
        }
        std::fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let mut csv = String::from("t,phi\n");
    for (k, p) in stats.trace.iter().enumerate() {
        let _ = writeln!(csv, "{},{p}", k + 1);
    }
    Ok(Report::new(json!({
        "params": to_value(&params),
        "mean": stats.mean,
        "stderr": stats.stderr,
        "transient": stats.transient,
    }))
    .csv(csv))
}

fn leader(a: &LeaderArgs, seed: u64) -> Outcome {
    let params = VicsekParams { n: a.n, l: a.l, v0: a.v0, r: a.r, eta: a.eta, seed };
    let tr = vicsek_leader_run(params, a.theta0, a.steps);
    let mut csv = String::from("t,max_deviation\n");
    for (k, d) in tr.max_deviation.iter().enumerate() {
        let _ = writeln!(csv, "{k},{d}");
    }
    Ok(Report::new(json!({
        "params": to_value(&params),
        "theta0": tr.theta0,
        "final_deviation": tr.max_deviation.last(),
    }))
    .csv(csv))
}

/// Runs a parsed command line and renders its report.
pub fn execute(cli: &Cli) -> std::result::Result<String, Failure> {
    let work = || dispatch(&cli.command, cli.seed);
    let report = match cli.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| usage(format!("cannot start {j} threads: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let csv = match cli.format {
        Some(Format::Csv) => true,
        Some(Format::Json) => false,
        None => report.csv_default,
    };
    if csv {
        return report.csv.ok_or_else(|| usage(format!("{} has no CSV output", cli.command.name())));
    }
    let mut fields = report.fields;
    fields.insert("schema".into(), json!(SCHEMA));
    fields.insert("command".into(), json!(cli.command.name()));
    let mut s = serde_json::to_string_pretty(&Value::Object(fields)).expect("JSON values serialise");
    s.push('\n');
    Ok(s)
}

/// Parses `args` (program name first), runs the analysis and writes the
/// report. Returns the process exit code: 0 on success, 2 on usage errors
/// and 1 on analysis errors, whose variant name goes to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let text = match execute(&cli) {
        Ok(t) => t,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\nFor more information, try '--help'.");
            return 2;
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("error: {}: {e}", e.variant());
            return 1;
        }
    };
    let written = match &cli.output {
        Some(p) => std::fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => 0,
        Err(m) => {
            eprintln!("error: Io: {m}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use std::collections::BTreeMap;

    /// Every analysis operation the library offers.
    const OPERATIONS: &[&str] = &[
        "min_driver_set",
        "structural_controllability_check",
        "classify_links",
        "classify_nodes",
        "classify_nodes_deletion",
        "control_profile",
        "control_centrality",
        "min_actuators",
        "switchboard_drivers",
        "solve_cavity",
        "nd_asymptotic",
        "kalman_rank",
        "pbh_min_drivers",
        "eigen_table",
        "self_loop_sweep",
        "gramian",
        "min_energy_input",
        "energy_bounds",
        "energy_spectrum",
        "inference_diagram",
        "min_sensors",
        "sensors_via_duality",
        "target_sensor",
        "mds_solve",
        "observability_transition",
        "luenberger_observe",
        "hubler_input",
        "ogy_stabilize_henon",
        "pyragas_feedback",
        "compensatory_perturbation",
        "fvs_find",
        "fvs_clamp",
        "msf_eigenratio",
        "pinning_eigenratio",
        "pinning_sync_simulate",
        "vicsek_step",
        "vicsek_order_parameter",
        "vicsek_leader_run",
    ];

    #[test]
    fn dispatch_table_matches_parser() {
        let parsed: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
        let table: Vec<String> = DISPATCH.iter().map(|(n, _)| n.to_string()).collect();
        assert_eq!(parsed, table);
        assert_eq!(table.len(), 28);
    }

    #[test]
    fn every_operation_has_exactly_one_subcommand() {
        let mut seen: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (cmd, ops) in DISPATCH {
            for op in *ops {
                seen.entry(op).or_default().push(cmd);
            }
        }
        for op in OPERATIONS {
            assert_eq!(seen.get(op).map(Vec::len), Some(1), "{op}: {:?}", seen.get(op));
        }
        assert_eq!(seen.len(), OPERATIONS.len(), "table lists unknown operations");
    }

    #[test]
    fn parser_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let e = Cli::try_parse_from(["netctl", "drivers", "--bogus"]).unwrap_err();
        assert!(e.use_stderr());
    }

    #[test]
    fn kv_parser() {
        assert_eq!(parse_kv("c=5.7").unwrap(), ("c".to_string(), 5.7));
        assert!(parse_kv("c").is_err());
        assert!(parse_kv("c=x").is_err());
    }

    #[test]
    fn cavity_defaults_to_csv() {
        let cli = Cli::try_parse_from(["netctl", "cavity", "--dist", "er", "--kmean", "8"]).unwrap();
        let out = execute(&cli).unwrap();
        assert!(out.starts_with("k_mean,gamma,n_d_cavity,n_d_simulated,stderr\n8,,"), "{out}");
    }

    #[test]
    fn json_carries_schema_and_command() {
        let cli = Cli::try_parse_from(["netctl", "ogy", "--steps", "2000"]).unwrap();
        let v: Value = serde_json::from_str(&execute(&cli).unwrap()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["command"], "ogy");
    }

    #[test]
    fn csv_is_refused_where_absent() {
        let cli = Cli::try_parse_from(["netctl", "msf", "--generate", "ring:5", "--format", "csv"]).unwrap();
        assert!(matches!(execute(&cli), Err(Failure::Usage(_))));
    }

    #[test]
    fn generated_graph_specs() {
        let cli = Cli::try_parse_from(["netctl", "mds", "--generate", "star:6"]).unwrap();
        let v: Value = serde_json::from_str(&execute(&cli).unwrap()).unwrap();
        assert_eq!(v["size"], 1);
        let bad = Cli::try_parse_from(["netctl", "mds", "--generate", "wheel:6"]).unwrap();
        assert!(matches!(execute(&bad), Err(Failure::Usage(_))));
    }
}
