use clap::{Args, Parser, Subcommand};
use oracount_core::profile::ProfileKind;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "oracount", version, about = "Cost-accounted oracle edge estimation for k-uniform hypergraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// RNG seed; every output record echoes it.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Constant profile: the analysed constants or desk-scale ones.
    #[arg(long, global = true, default_value = "fast")]
    pub profile: String,

    /// Worker threads for trial fan-out (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Output path for commands that write a file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn profile_kind(&self) -> Result<ProfileKind, String> {
        self.profile.parse()
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate instances or instance pairs in .hg format.
    Gen(GenArgs),
    /// Exact edge counts of an .hg file (and of its class-induced subgraph).
    Exact {
        #[arg(long)]
        input: PathBuf,
    },
    /// Approximate e(G) through the uncoloured independence oracle.
    CountUncol(CountArgs),
    /// Approximate e(G) through the colourful independence oracle.
    CountCol(CountArgs),
    /// Coarse colourful approximation (dispatcher or a forced subroutine).
    CoarseCol(CoarseArgs),
    /// CSV table of the overhead exponent g(k, beta).
    Gtable {
        #[arg(long)]
        k: u32,
        /// Step of the beta grid, e.g. 1/4.
        #[arg(long, default_value = "1/2")]
        beta_step: String,
    },
    /// Distinguishing-game harness over generated hard pairs.
    LbExperiment(LbArgs),
    /// Accuracy suite: estimator vs exact counts over instance families.
    Accuracy(AccuracyArgs),
    /// Cost-scaling experiment: median ledger cost vs n with fitted slopes.
    Scaling(ScalingArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Family: er | er-partite | star | uncol-lb | col-lb.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Per-class size for partite families.
    #[arg(long)]
    pub t: Option<u64>,
    /// Edge probability for the er families (rational or decimal).
    #[arg(long)]
    pub p: Option<String>,
    /// Root size for star / uncol-lb.
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    /// Gap parameter of uncol-lb.
    #[arg(long)]
    pub eps: Option<String>,
    /// Cost index of col-lb.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// p1 override for uncol-lb.
    #[arg(long)]
    pub p1: Option<String>,
    /// p2 override for uncol-lb.
    #[arg(long)]
    pub p2: Option<String>,
    /// beta override for col-lb.
    #[arg(long)]
    pub beta: Option<u64>,
    /// B override for col-lb.
    #[arg(long)]
    pub cap_b: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long, default_value = "1/10")]
    pub delta: String,
    /// Cost index alpha of the session's cost model.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Also compute the exact count and report it.
    #[arg(long)]
    pub verify: bool,
    /// Independent estimator trials to run.
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
}

#[derive(Args, Debug)]
pub struct CoarseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Force the root-class set I (bitmask) and exercise one helper directly.
    #[arg(long)]
    pub force_i: Option<u32>,
    /// zeta for the forced large-core helper, e.g. 1/33.
    #[arg(long)]
    pub zeta: Option<String>,
    /// Block size t for the forced small-core helper.
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long, default_value = "1/64")]
    pub delta: String,
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 1)]
    pub trials: u32,
}

#[derive(Args, Debug)]
pub struct LbArgs {
    /// uncol-lb | col-lb.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long)]
    pub beta: Option<u64>,
    #[arg(long)]
    pub cap_b: Option<u64>,
    /// none | full-query | uncol | count-col | coarse-col | custom-script.
    #[arg(long)]
    pub strategy: String,
    /// Command line run per trial by custom-script (gets the two .hg paths).
    #[arg(long)]
    pub script: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub trials: u32,
    /// Cost index for the pair sessions.
    #[arg(long, default_value_t = 1.0)]
    pub session_alpha: f64,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Args, Debug)]
pub struct AccuracyArgs {
    /// Comma-separated family specs, e.g. `er:n=64,k=2,p=3/10`.
    #[arg(long, default_value = "")]
    pub families: String,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long, default_value = "1/20")]
    pub delta: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// uncol | col.
    #[arg(long, default_value = "uncol")]
    pub algo: String,
    #[arg(long, default_value_t = 50)]
    pub trials: u32,
    #[arg(long)]
    pub csv: PathBuf,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Comma-separated cost indices.
    #[arg(long, default_value = "0,1")]
    pub alphas: String,
    /// Comma-separated powers-of-two vertex counts.
    #[arg(long, default_value = "64,128,256,512,1024,2048")]
    pub n_list: String,
    /// Edge density: fixed:<p> or linear:<edges per vertex>.
    #[arg(long, default_value = "linear:1")]
    pub density: String,
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long, default_value_t = 50)]
    pub trials: u32,
    #[arg(long)]
    pub csv: PathBuf,
}
