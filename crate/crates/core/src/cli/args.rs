//! Subcommand arguments. Each struct doubles as the `[run]` table of a TOML config.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use super::output::Format;

/// Every argument has a default, so a struct parsed from no arguments is the serde default.
macro_rules! defaults {
    ($($t:ident),* $(,)?) => {$(
        impl Default for $t {
            fn default() -> Self {
                #[derive(Parser)]
                struct Wrap {
                    #[command(flatten)]
                    inner: $t,
                }
                Wrap::parse_from(["cplab"]).inner
            }
        }
    )*};
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JthetaArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta: f64,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    /// Absolute error target.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JconvArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    /// Convolution powers.
    #[arg(long = "j", value_delimiter = ',', default_value = "1,2,3")]
    pub powers: Vec<u32>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResumCheckArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Number of terms `J`.
    #[arg(long = "J", default_value_t = 40)]
    pub max_terms: u32,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Pass threshold on the relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoParticleArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// `x1,y1,x2,y2` of the starting pair.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.3,0,-0.2,0.1")]
    pub x: Vec<f64>,
    /// `x1,y1,x2,y2` of the ending pair.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.4,0.1,-0.3")]
    pub xp: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagramsArgs {
    /// Particle count.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub max_len: usize,
    /// List the diagrams instead of counting them.
    #[arg(long)]
    pub list: bool,
    /// Mark the first pair of each diagram.
    #[arg(long)]
    pub starred: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceIdArgs {
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Test profile `g` as `amplitude,cx,cy,sigma` bumps separated by `;`.
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0,1")]
    pub g: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0,1")]
    pub gp: String,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleWalksArgs {
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Lattice window `s,t`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,64")]
    pub window: Vec<i64>,
    /// Lattice horizon `N`.
    #[arg(long = "horizon", default_value_t = 64)]
    pub horizon: u64,
    /// Half-width of the uniform start box, diffusive units.
    #[arg(long, default_value_t = 0.0)]
    pub box_half: f64,
    /// Write the binary ensemble format; needs `--out`.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolymerSimArgs {
    #[arg(long = "horizon", default_value_t = 256)]
    pub horizon: u64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub t: f64,
    /// Polymer paths to sample; needs a single θ and `--paths-out`.
    #[arg(long, default_value_t = 0)]
    pub paths: usize,
    #[arg(long)]
    pub paths_out: Option<PathBuf>,
    /// `erdos-taylor` or `renewal`.
    #[arg(long, default_value = "erdos-taylor")]
    pub window: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0,0.5")]
    pub g: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0,0.5")]
    pub gp: String,
}

/// Ensemble input shared by the GMC and coupling commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleArgs {
    /// Path CSV (or binary ensemble with `--binary-in`).
    #[arg(long)]
    pub paths: Option<PathBuf>,
    #[arg(long)]
    pub binary_in: bool,
    /// `erdos-taylor`, `continuum`, `renewal` or `epsilon:<ε>`.
    #[arg(long, default_value = "erdos-taylor")]
    pub kernel: String,
    /// Inner product: `uniform` or `localized`.
    #[arg(long, default_value = "localized")]
    pub weights: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntersectionsArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    /// Sub-window `s,t`; defaults to the ensemble window.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmcSimArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmcFlowArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    pub a_grid: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub flows: usize,
    /// `one` or a battery name.
    #[arg(long, default_value = "one")]
    pub test: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmcMomentArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Moment order, at most 4.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "one")]
    pub test: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsometryCheckArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    /// Strength for the moment comparison.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingCheckArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    /// Dyadic level of the coarse partition; the fine one has one more.
    #[arg(long, default_value_t = 1)]
    pub levels: u32,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaimarkCheckArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    /// Interior cut points of the partition.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cuts: Vec<i64>,
    /// Union of consecutive pieces, `s,t`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub subwindow: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcatCheckArgs {
    #[arg(long)]
    pub left: Option<PathBuf>,
    #[arg(long)]
    pub right: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub gap: i64,
    #[arg(long, default_value = "erdos-taylor")]
    pub kernel: String,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialPositivityArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// `all`, `one` or a battery name.
    #[arg(long, default_value = "all")]
    pub test: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialStrongDisorderArgs {
    #[command(flatten)]
    pub input: EnsembleArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9")]
    pub a_grid: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub flows: usize,
    #[arg(long, default_value = "all")]
    pub test: String,
}

/// Polymer parameters shared by the simulation trials.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolymerTrialArgs {
    #[arg(long = "horizon", default_value_t = 1024)]
    pub horizon: u64,
    #[arg(long, default_value_t = 0.25)]
    pub t: f64,
    /// Width of the Gaussian test profiles `g = g'`.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub replicas: usize,
    /// `erdos-taylor` or `renewal`.
    #[arg(long, default_value = "renewal")]
    pub window: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialMomentMatchArgs {
    #[command(flatten)]
    pub polymer: PolymerTrialArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0")]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub a: Vec<f64>,
    /// Polymer paths per replica for the GMC tilt.
    #[arg(long, default_value_t = 64)]
    pub paths: usize,
    /// `erdos-taylor`, `continuum` or `renewal`.
    #[arg(long, default_value = "renewal")]
    pub scale: String,
    /// `planted` or `direct`.
    #[arg(long, default_value = "planted")]
    pub estimator: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialVarianceRatioArgs {
    #[command(flatten)]
    pub polymer: PolymerTrialArgs,
    /// Strictly decreasing θ grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,-2,-4")]
    pub theta: Vec<f64>,
    /// Reuse one disorder field for every replica.
    #[arg(long)]
    pub frozen: bool,
}

defaults!(
    JthetaArgs,
    JconvArgs,
    ResumCheckArgs,
    TwoParticleArgs,
    DiagramsArgs,
    VarianceIdArgs,
    SampleWalksArgs,
    PolymerSimArgs,
    EnsembleArgs,
    IntersectionsArgs,
    GmcSimArgs,
    GmcFlowArgs,
    GmcMomentArgs,
    IsometryCheckArgs,
    CouplingCheckArgs,
    NaimarkCheckArgs,
    ConcatCheckArgs,
    TrialPositivityArgs,
    TrialStrongDisorderArgs,
    PolymerTrialArgs,
    TrialMomentMatchArgs,
    TrialVarianceRatioArgs,
);

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// `j^θ(t)`.
    Jtheta(JthetaArgs),
    /// Convolution powers `j^{θ,*k}(t)`.
    Jconv(JconvArgs),
    /// Resummed series at `θ` and `a` against `j^{θ+a}`.
    ResumCheck(ResumCheckArgs),
    /// Two-particle kernel.
    Semigroup2(TwoParticleArgs),
    /// Two-particle kernel minus the heat product.
    Centered2(TwoParticleArgs),
    /// Count or list diagrams.
    Diagrams(DiagramsArgs),
    /// Variance functionals `U` and `V` and the identity `V = U²`.
    VarianceId(VarianceIdArgs),
    /// Reference lazy walks.
    SampleWalks(SampleWalksArgs),
    /// Quenched polymer partition functions on one disorder field.
    PolymerSim(PolymerSimArgs),
    /// Pairwise intersection local times.
    Intersections(IntersectionsArgs),
    /// Kahane GMC draws over an ensemble.
    GmcSim(GmcSimArgs),
    /// GMC flows in the strength parameter.
    GmcFlow(GmcFlowArgs),
    /// Exact GMC moments.
    GmcMoment(GmcMomentArgs),
    /// Partial isometry between two factors of one kernel.
    IsometryCheck(IsometryCheckArgs),
    /// Dyadic interval coupling errors.
    CouplingCheck(CouplingCheckArgs),
    /// Projection identity on a union of partition pieces.
    NaimarkCheck(NaimarkCheckArgs),
    /// Conditional big-window GMC against bridge concatenation.
    ConcatCheck(ConcatCheckArgs),
    TrialPositivity(TrialPositivityArgs),
    TrialStrongDisorder(TrialStrongDisorderArgs),
    TrialMomentMatch(TrialMomentMatchArgs),
    TrialVarianceRatio(TrialVarianceRatioArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Jtheta(_) => "jtheta",
            Command::Jconv(_) => "jconv",
            Command::ResumCheck(_) => "resum-check",
            Command::Semigroup2(_) => "semigroup2",
            Command::Centered2(_) => "centered2",
            Command::Diagrams(_) => "diagrams",
            Command::VarianceId(_) => "variance-id",
            Command::SampleWalks(_) => "sample-walks",
            Command::PolymerSim(_) => "polymer-sim",
            Command::Intersections(_) => "intersections",
            Command::GmcSim(_) => "gmc-sim",
            Command::GmcFlow(_) => "gmc-flow",
            Command::GmcMoment(_) => "gmc-moment",
            Command::IsometryCheck(_) => "isometry-check",
            Command::CouplingCheck(_) => "coupling-check",
            Command::NaimarkCheck(_) => "naimark-check",
            Command::ConcatCheck(_) => "concat-check",
            Command::TrialPositivity(_) => "trial-positivity",
            Command::TrialStrongDisorder(_) => "trial-strong-disorder",
            Command::TrialMomentMatch(_) => "trial-moment-match",
            Command::TrialVarianceRatio(_) => "trial-variance-ratio",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cplab", version, about = "Delta-Bose, conditional GMC and interval-coupling laboratory")]
pub struct Cli {
    /// Master seed; expanded into named sub-streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; the manifest goes next to it as `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to `CPLAB_THREADS`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Lattice horizon assumed when reading path CSVs.
    #[arg(long, global = true)]
    pub lattice_n: Option<u64>,
    /// TOML run configuration; replaces the subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}
