//! The `vibex` command line: `doktorov`, `sample`, `marginals`, `dynamics`
//! and `prob`.
//!
//! Mode numbers on the command line and in output files are 1-based.
//! Outputs are written atomically, each with a `<output>.manifest.json`
//! provenance record. Setting `VIBEX_CACHE_DIR` caches exact marginals
//! across runs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{evolve, LocalizationMap};
use crate::error::{Error, Result};
use crate::excitation::{drive_displacement, pre_excite};
use crate::gaussian::{apply_doktorov, GaussianState};
use crate::io::{self, InputRecord, RunManifest, SCHEMA_VERSION};
use crate::lhaf::PreparedState;
use crate::sampler::{sample, single_mode_marginals, Distribution, SamplerConfig};
use crate::vibronic::DoktorovParams;

/// Environment variable naming the marginals cache directory.
pub const CACHE_ENV: &str = "VIBEX_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "vibex", version, about = "Vibrational excitations in vibronic transitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute Doktorov parameters from a molecule file.
    Doktorov(DoktorovArgs),
    /// Draw photon-number samples of the post-transition state.
    Sample(SampleArgs),
    /// Exact single-mode marginal distributions.
    Marginals(MarginalsArgs),
    /// Time series of a localized-mode distribution.
    Dynamics(DynamicsArgs),
    /// Probability of one photon-number pattern.
    Prob(ProbArgs),
}

#[derive(Debug, Args)]
pub struct DoktorovArgs {
    pub molecule: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
}

/// Displacement applied to a ground-state mode before the transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreExcite {
    /// 1-based mode number.
    pub mode: usize,
    pub beta: C64,
}

impl std::str::FromStr for PreExcite {
    type Err = String;

    /// `MODE=RE` or `MODE=RE:IM`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (mode, beta) = s
            .split_once('=')
            .ok_or_else(|| format!("expected MODE=BETA, got `{s}`"))?;
        let mode: usize = mode.trim().parse().map_err(|e| format!("bad mode `{mode}`: {e}"))?;
        if mode == 0 {
            return Err("mode numbers start at 1".into());
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad amplitude `{x}`: {e}"));
        let beta = match beta.split_once(':') {
            Some((re, im)) => C64::new(num(re)?, num(im)?),
            None => C64::new(num(beta)?, 0.0),
        };
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err("amplitude must be finite".into());
        }
        Ok(PreExcite { mode, beta })
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct ExciteArgs {
    /// Displace a ground-state mode first, `MODE=RE` or `MODE=RE:IM`
    /// (repeatable).
    #[arg(long = "pre-excite", value_name = "MODE=BETA")]
    pub pre_excite: Vec<PreExcite>,
    /// Drive description file; its displacement is added to the target mode.
    #[arg(long)]
    pub drive: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub params: PathBuf,
    /// Samples CSV.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Summary JSON [default: OUTPUT with extension `summary.json`].
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 40)]
    pub max_total_photons: usize,
    /// Modes of the co-excitation table (1-based) [default: all].
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<usize>,
    /// Draw samples on one thread.
    #[arg(long)]
    pub serial: bool,
    #[command(flatten)]
    pub excite: ExciteArgs,
}

#[derive(Debug, Args)]
pub struct MarginalsArgs {
    pub params: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub cutoff: usize,
    #[command(flatten)]
    pub excite: ExciteArgs,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    pub params: PathBuf,
    pub localization: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Times in femtoseconds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    /// Localized mode (1-based).
    #[arg(long)]
    pub mode: usize,
    #[arg(long, default_value_t = 10)]
    pub cutoff: usize,
    #[command(flatten)]
    pub excite: ExciteArgs,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    pub params: PathBuf,
    /// Photon counts, one per mode.
    #[arg(long, value_delimiter = ',', required = true)]
    pub pattern: Vec<usize>,
    /// Output JSON [default: stdout].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub excite: ExciteArgs,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PreExciteRecord {
    pub mode: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModeMarginal {
    pub mode: usize,
    pub probabilities: Vec<f64>,
    pub coverage: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MarginalsFile {
    pub schema_version: u32,
    pub kind: String,
    pub cutoff: usize,
    pub pre_excite: Vec<PreExciteRecord>,
    pub marginals: Vec<ModeMarginal>,
    pub manifest: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TimePoint {
    pub time_fs: f64,
    pub probabilities: Vec<f64>,
    pub coverage: f64,
    /// Exact mean photon number of the localized mode.
    pub mean_photons: f64,
    /// Exact mean photon number summed over all modes.
    pub total_mean_photons: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DynamicsFile {
    pub schema_version: u32,
    pub kind: String,
    pub mode: usize,
    pub cutoff: usize,
    pub pre_excite: Vec<PreExciteRecord>,
    pub series: Vec<TimePoint>,
    pub manifest: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbabilityFile {
    pub schema_version: u32,
    pub kind: String,
    pub pattern: Vec<usize>,
    pub probability: f64,
    pub pre_excite: Vec<PreExciteRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PatternCount {
    pub pattern: Vec<usize>,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoExcitation {
    pub modes: Vec<usize>,
    /// Fraction of samples with every listed mode excited.
    pub all_excited_fraction: f64,
    pub counts: Vec<PatternCount>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TruncationReport {
    pub max_truncated_mass: f64,
    pub mean_truncated_mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SampleSummary {
    pub schema_version: u32,
    pub kind: String,
    pub samples_file: String,
    pub num_samples: usize,
    pub num_modes: usize,
    pub seed: u64,
    pub cutoff: usize,
    pub max_total_photons: usize,
    pub pre_excite: Vec<PreExciteRecord>,
    pub mode_means: Vec<f64>,
    pub mode_mean_std_errors: Vec<f64>,
    pub co_excitation: CoExcitation,
    pub truncation: TruncationReport,
    pub manifest: String,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 for I/O failures, 2 for invalid
/// input and 3 for numerical breakdown.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::CutoffTooSmall { .. } = e {
                eprintln!("hint: rerun with a larger --cutoff");
            }
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Doktorov(a) => run_doktorov(a),
        Command::Sample(a) => run_sample(a),
        Command::Marginals(a) => run_marginals(a),
        Command::Dynamics(a) => run_dynamics(a),
        Command::Prob(a) => run_prob(a),
    }
}

struct Provenance {
    command: &'static str,
    start: Instant,
    inputs: Vec<PathBuf>,
}

impl Provenance {
    fn new(command: &'static str) -> Self {
        Provenance {
            command,
            start: Instant::now(),
            inputs: Vec::new(),
        }
    }

    fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    fn write(&self, primary: &Path, outputs: &[&Path], config: Value, seed: Option<u64>) -> Result<()> {
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            kind: "manifest".into(),
            command: self.command.into(),
            inputs: self.inputs.iter().map(|p| InputRecord::of(p)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            duration_seconds: self.start.elapsed().as_secs_f64(),
        };
        io::write_json(&io::manifest_path(primary), &manifest)
    }
}

pub fn run_doktorov(a: &DoktorovArgs) -> Result<()> {
    let mut prov = Provenance::new("doktorov");
    prov.input(&a.molecule);
    let params = io::read_molecule(&a.molecule)?.doktorov_params()?;
    let manifest = io::manifest_name(&a.output);
    io::write_atomic(&a.output, &io::params_to_json(&params, Some(&manifest))?)?;
    prov.write(&a.output, &[&a.output], json!({}), None)
}

/// Resolved displacements (0-based mode, amplitude), in application order.
fn resolve_excitations(excite: &ExciteArgs, num_modes: usize) -> Result<Vec<(usize, C64)>> {
    let mut out = Vec::new();
    for p in &excite.pre_excite {
        if p.mode > num_modes {
            return Err(Error::ModeOutOfRange {
                index: p.mode,
                num_modes,
            });
        }
        out.push((p.mode - 1, p.beta));
    }
    if let Some(path) = &excite.drive {
        let spec = io::read_drive(path)?;
        if spec.target_mode >= num_modes {
            return Err(Error::ModeOutOfRange {
                index: spec.target_mode + 1,
                num_modes,
            });
        }
        out.push((spec.target_mode, drive_displacement(&spec)?));
    }
    Ok(out)
}

fn excitation_records(excitations: &[(usize, C64)]) -> Vec<PreExciteRecord> {
    excitations
        .iter()
        .map(|&(mode, b)| PreExciteRecord {
            mode: mode + 1,
            re: b.re,
            im: b.im,
        })
        .collect()
}

/// Vacuum, then the pre-excitations, then the Doktorov operator.
pub fn prepare_state(params: &DoktorovParams, excitations: &[(usize, C64)]) -> Result<GaussianState> {
    let mut state = GaussianState::vacuum(params.num_modes())?;
    for &(mode, beta) in excitations {
        state = pre_excite(&state, mode, beta)?;
    }
    apply_doktorov(&state, params)
}

fn load(params: &Path, excite: &ExciteArgs, prov: &mut Provenance) -> Result<(DoktorovParams, Vec<(usize, C64)>)> {
    prov.input(params);
    if let Some(d) = &excite.drive {
        prov.input(d);
    }
    let p = io::read_params(params)?;
    let ex = resolve_excitations(excite, p.num_modes())?;
    Ok((p, ex))
}

fn default_summary_path(output: &Path) -> PathBuf {
    output.with_extension("summary.json")
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn run_sample(a: &SampleArgs) -> Result<()> {
    let mut prov = Provenance::new("sample");
    let (params, excitations) = load(&a.params, &a.excite, &mut prov)?;
    let m = params.num_modes();
    let modes: Vec<usize> = if a.modes.is_empty() {
        (1..=m).collect()
    } else {
        a.modes.clone()
    };
    for (k, &mode) in modes.iter().enumerate() {
        if mode == 0 || mode > m {
            return Err(Error::ModeOutOfRange { index: mode, num_modes: m });
        }
        if modes[..k].contains(&mode) {
            return Err(Error::DuplicateMode { index: mode });
        }
    }
    let cfg = SamplerConfig {
        cutoff: a.cutoff,
        seed: a.seed,
        max_total_photons: a.max_total_photons,
        num_samples: a.samples,
        parallel: !a.serial,
    };
    let state = prepare_state(&params, &excitations)?;
    let run = sample(&state, &cfg)?;

    let n = run.samples.len() as f64;
    let mut mode_means = vec![0.0; m];
    let mut squares = vec![0.0; m];
    for s in &run.samples {
        for k in 0..m {
            mode_means[k] += s[k] as f64;
            squares[k] += (s[k] * s[k]) as f64;
        }
    }
    let mut mode_mean_std_errors = vec![0.0; m];
    for k in 0..m {
        mode_means[k] /= n;
        let var = (squares[k] / n - mode_means[k] * mode_means[k]).max(0.0);
        mode_mean_std_errors[k] = if n > 1.0 { (var / (n - 1.0)).sqrt() } else { 0.0 };
    }
    let mut table: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut all_excited = 0usize;
    for s in &run.samples {
        let sub: Vec<usize> = modes.iter().map(|&k| s[k - 1]).collect();
        if sub.iter().all(|&c| c > 0) {
            all_excited += 1;
        }
        *table.entry(sub).or_default() += 1;
    }

    let summary_path = a.summary.clone().unwrap_or_else(|| default_summary_path(&a.output));
    let summary = SampleSummary {
        schema_version: SCHEMA_VERSION,
        kind: "sample_summary".into(),
        samples_file: file_name(&a.output),
        num_samples: a.samples,
        num_modes: m,
        seed: a.seed,
        cutoff: a.cutoff,
        max_total_photons: a.max_total_photons,
        pre_excite: excitation_records(&excitations),
        mode_means,
        mode_mean_std_errors,
        co_excitation: CoExcitation {
            modes,
            all_excited_fraction: all_excited as f64 / n,
            counts: table
                .into_iter()
                .map(|(pattern, count)| PatternCount { pattern, count })
                .collect(),
        },
        truncation: TruncationReport {
            max_truncated_mass: run.max_truncated_mass,
            mean_truncated_mass: run.mean_truncated_mass,
        },
        manifest: io::manifest_name(&a.output),
    };
    io::write_atomic(&a.output, &io::samples_to_csv(m, &run.samples)?)?;
    io::write_json(&summary_path, &summary)?;
    prov.write(
        &a.output,
        &[&a.output, &summary_path],
        json!({
            "samples": a.samples,
            "cutoff": a.cutoff,
            "max_total_photons": a.max_total_photons,
            "serial": a.serial,
            "modes": summary.co_excitation.modes,
            "pre_excite": summary.pre_excite,
        }),
        Some(a.seed),
    )
}

fn cache_key(params: &DoktorovParams, excitations: &[(usize, C64)], cutoff: usize) -> Result<String> {
    let mut bytes = io::params_to_json(params, None)?;
    bytes.extend_from_slice(format!("cutoff={cutoff}").as_bytes());
    for (mode, b) in excitations {
        bytes.extend_from_slice(format!(";{mode}={:016x}:{:016x}", b.re.to_bits(), b.im.to_bits()).as_bytes());
    }
    Ok(io::sha256_hex(&bytes))
}

#[derive(Serialize, Deserialize)]
struct CachedMarginals {
    schema_version: u32,
    kind: String,
    cutoff: usize,
    probabilities: Vec<Vec<f64>>,
}

/// Exact marginals of every mode, through the cache directory when
/// `VIBEX_CACHE_DIR` is set.
pub fn cached_marginals(
    params: &DoktorovParams,
    excitations: &[(usize, C64)],
    cutoff: usize,
) -> Result<Vec<Vec<f64>>> {
    let dir = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()).map(PathBuf::from);
    let path = match &dir {
        Some(d) => Some(d.join(format!("marginals-{}.json", cache_key(params, excitations, cutoff)?))),
        None => None,
    };
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            if let Ok(c) = serde_json::from_str::<CachedMarginals>(&text) {
                if c.schema_version == SCHEMA_VERSION && c.cutoff == cutoff && c.probabilities.len() == params.num_modes() {
                    return Ok(c.probabilities);
                }
            }
        }
    }
    let state = prepare_state(params, excitations)?;
    let probabilities: Vec<Vec<f64>> = single_mode_marginals(&state, cutoff)?
        .into_iter()
        .map(|d| d.probabilities)
        .collect();
    if let (Some(d), Some(p)) = (&dir, &path) {
        std::fs::create_dir_all(d)?;
        io::write_json(
            p,
            &CachedMarginals {
                schema_version: SCHEMA_VERSION,
                kind: "marginals_cache".into(),
                cutoff,
                probabilities: probabilities.clone(),
            },
        )?;
    }
    Ok(probabilities)
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 1 {
        return Err(Error::Config("cutoff must be at least 1".into()));
    }
    Ok(())
}

pub fn run_marginals(a: &MarginalsArgs) -> Result<()> {
    let mut prov = Provenance::new("marginals");
    check_cutoff(a.cutoff)?;
    let (params, excitations) = load(&a.params, &a.excite, &mut prov)?;
    let probabilities = cached_marginals(&params, &excitations, a.cutoff)?;
    let file = MarginalsFile {
        schema_version: SCHEMA_VERSION,
        kind: "marginals".into(),
        cutoff: a.cutoff,
        pre_excite: excitation_records(&excitations),
        marginals: probabilities
            .into_iter()
            .enumerate()
            .map(|(k, p)| ModeMarginal {
                mode: k + 1,
                coverage: p.iter().sum(),
                probabilities: p,
            })
            .collect(),
        manifest: io::manifest_name(&a.output),
    };
    io::write_json(&a.output, &file)?;
    prov.write(
        &a.output,
        &[&a.output],
        json!({ "cutoff": a.cutoff, "pre_excite": file.pre_excite }),
        None,
    )
}

pub fn run_dynamics(a: &DynamicsArgs) -> Result<()> {
    let mut prov = Provenance::new("dynamics");
    check_cutoff(a.cutoff)?;
    let (params, excitations) = load(&a.params, &a.excite, &mut prov)?;
    prov.input(&a.localization);
    let loc: LocalizationMap = io::read_localization(&a.localization, params.freq_final.clone())?;
    let m = params.num_modes();
    if a.mode == 0 || a.mode > m {
        return Err(Error::ModeOutOfRange { index: a.mode, num_modes: m });
    }
    let state = prepare_state(&params, &excitations)?;
    let series = a
        .times
        .iter()
        .map(|&t| {
            let s = evolve(&state, &loc, t)?;
            let d: Distribution = crate::sampler::joint_probability_table(&s, &[a.mode - 1], a.cutoff)?;
            Ok(TimePoint {
                time_fs: t,
                coverage: d.coverage(),
                probabilities: d.probabilities,
                mean_photons: s.mean_photon_numbers()[a.mode - 1],
                total_mean_photons: s.total_mean_photons(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let file = DynamicsFile {
        schema_version: SCHEMA_VERSION,
        kind: "dynamics".into(),
        mode: a.mode,
        cutoff: a.cutoff,
        pre_excite: excitation_records(&excitations),
        series,
        manifest: io::manifest_name(&a.output),
    };
    io::write_json(&a.output, &file)?;
    prov.write(
        &a.output,
        &[&a.output],
        json!({ "cutoff": a.cutoff, "mode": a.mode, "times_fs": a.times, "pre_excite": file.pre_excite }),
        None,
    )
}

pub fn run_prob(a: &ProbArgs) -> Result<()> {
    let mut prov = Provenance::new("prob");
    let (params, excitations) = load(&a.params, &a.excite, &mut prov)?;
    let state = prepare_state(&params, &excitations)?;
    let probability = PreparedState::new(&state)?.probability(&a.pattern)?;
    let file = ProbabilityFile {
        schema_version: SCHEMA_VERSION,
        kind: "probability".into(),
        pattern: a.pattern.clone(),
        probability,
        pre_excite: excitation_records(&excitations),
        manifest: a.output.as_deref().map(io::manifest_name),
    };
    match &a.output {
        Some(out) => {
            io::write_json(out, &file)?;
            prov.write(
                out,
                &[out],
                json!({ "pattern": a.pattern, "pre_excite": file.pre_excite }),
                None,
            )
        }
        None => {
            print!("{}", String::from_utf8_lossy(&io::to_json_bytes(&file)?));
            Ok(())
        }
    }
}
