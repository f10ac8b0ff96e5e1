//! Reproducible batch experiments: a config (experiment name, seed,
//! parameter table, output directory) in, a manifest and CSV/JSON files out.
//!
//! Every random draw derives from the config seed. Reruns with the same
//! config write byte-identical files; in `manifest.json` only `timestamp`
//! and `wall_time_s` differ.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::channel::{
    additivity_experiment, random_channel, read_channel, AdditivityReport, OptimizerConfig, QuantumChannel,
};
use crate::codec::{
    decode, encode, fidelity, run_codec, stopping_check, tessellate, Descriptor, GeometricObject,
    IntensityProfile, RunConfig, StoppingConfig,
};
use crate::error::{Error, Result};
use crate::linalg::read_matrix;
use crate::poisson::{
    poisson_semigroup_of, poisson_series, projection_poisson_path, sigma_additivity_test, PoissonConfig,
};
use crate::random;
use crate::sde::{convergence_study, euler_maruyama, gbm_exact, SDEConfig};
use crate::spectral::{
    cayley_transform, eig_hermitian, eig_unitary, idempotence_defect, inverse_cayley, resolution_of_identity_of,
    BorelArc, HermitianOperator,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectral,
    Poisson,
    HolevoAdditivity,
    SdeConvergence,
    CodecStudy,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectral => "spectral",
            Experiment::Poisson => "poisson",
            Experiment::HolevoAdditivity => "holevo-additivity",
            Experiment::SdeConvergence => "sde-convergence",
            Experiment::CodecStudy => "codec-study",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "spectral" => Ok(Experiment::Spectral),
            "poisson" => Ok(Experiment::Poisson),
            "holevo-additivity" | "holevo" => Ok(Experiment::HolevoAdditivity),
            "sde-convergence" | "sde" => Ok(Experiment::SdeConvergence),
            "codec-study" | "codec" => Ok(Experiment::CodecStudy),
            other => Err(Error::validation(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Experiment-specific table; missing keys take defaults.
    pub parameters: Map<String, Value>,
    pub output_dir: PathBuf,
}

/// Partially specified config as read from a file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    /// JSON when the extension is `.json`, TOML otherwise.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        Self::parse(&text, is_json, &path.display().to_string())
    }

    pub fn parse(text: &str, is_json: bool, context: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            context: context.to_string(),
            message,
        };
        if is_json {
            serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| parse_err(e.to_string()))
        }
    }
}

impl ExperimentConfig {
    /// Resolves a file config against flag overrides; flags win. The seed
    /// defaults to 0 and the output directory to `out/<experiment>`.
    pub fn resolve(
        file: ConfigFile,
        experiment: Option<Experiment>,
        seed: Option<u64>,
        output_dir: Option<PathBuf>,
        overrides: Map<String, Value>,
    ) -> Result<Self> {
        let from_file = file.experiment.as_deref().map(Experiment::parse).transpose()?;
        let experiment = match (experiment, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::validation(format!(
                    "config names experiment `{}` but `{}` was requested",
                    b.name(),
                    a.name()
                )))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::validation("no experiment given")),
        };
        let mut parameters = file.parameters;
        parameters.extend(overrides);
        Ok(ExperimentConfig {
            experiment,
            seed: seed.or(file.seed).unwrap_or(0),
            parameters,
            output_dir: output_dir
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from("out").join(experiment.name())),
        })
    }

    pub fn new(experiment: Experiment, seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            seed,
            parameters: Map::new(),
            output_dir: output_dir.into(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("plain data"));
        self
    }
}

fn params<T: DeserializeOwned>(table: &Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(table.clone())).map_err(|e| Error::Parse {
        context: "parameters".into(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralParams {
    /// JSON matrix file; a random Hermitian matrix when absent.
    pub matrix: Option<PathBuf>,
    pub dim: usize,
    /// Spectral norm of the random matrix.
    pub norm: f64,
    /// Number of equal arcs.
    pub partition: usize,
    /// Explicit cut points in `[0, 2π)`; overrides `partition`.
    pub cuts: Option<Vec<f64>>,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            matrix: None,
            dim: 4,
            norm: 2.0,
            partition: 8,
            cuts: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonParams {
    pub dim: usize,
    pub rate: f64,
    pub horizon: f64,
    pub partition: usize,
    pub trials: usize,
    pub series_terms: usize,
}

impl Default for PoissonParams {
    fn default() -> Self {
        PoissonParams {
            dim: 4,
            rate: 2.0,
            horizon: 1.0,
            partition: 8,
            trials: 200,
            series_terms: 40,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolevoParams {
    /// `random`, `identity`, `depolarizing`, `dephasing`, `amplitude-damping` or `file`.
    pub channels: String,
    pub dim: usize,
    pub kraus: usize,
    pub pairs: usize,
    /// Parameter of the named noisy channels.
    pub p: f64,
    /// Kraus files for `channels = "file"`.
    pub channel_a: Option<PathBuf>,
    pub channel_b: Option<PathBuf>,
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for HolevoParams {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        HolevoParams {
            channels: "random".into(),
            dim: 2,
            kraus: 2,
            pairs: 20,
            p: 0.5,
            channel_a: None,
            channel_b: None,
            restarts: opt.restarts,
            max_iters: opt.max_iters,
            tolerance: opt.tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdeParams {
    pub x0: f64,
    pub drift_coeff: f64,
    pub omega: f64,
    pub t_end: f64,
    pub steps: Vec<usize>,
    pub paths: usize,
    /// Steps of the single sample path written to `path.csv`.
    pub path_steps: usize,
}

impl Default for SdeParams {
    fn default() -> Self {
        SdeParams {
            x0: 1.0,
            drift_coeff: 1.5,
            omega: 0.5,
            t_end: 1.0,
            steps: vec![32, 64, 128, 256, 512],
            paths: 1000,
            path_steps: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecParams {
    pub object: Descriptor,
    /// Intensities of the single-round fidelity study.
    pub intensities: Vec<f64>,
    /// Seeds per intensity in the study.
    pub seeds: usize,
    pub resolution: usize,
    /// Multi-round run checked against the stopping conditions.
    pub rounds: usize,
    pub round_intensity: f64,
    pub run_resolution: usize,
    pub profile: IntensityProfile,
    pub resample: bool,
    pub stopping: StoppingConfig,
}

impl Default for CodecParams {
    fn default() -> Self {
        CodecParams {
            object: Descriptor::Disk {
                cx: 0.5,
                cy: 0.5,
                r: 0.25,
            },
            intensities: vec![250.0, 500.0, 1000.0, 2000.0],
            seeds: 10,
            resolution: 1000,
            rounds: 5,
            round_intensity: 2000.0,
            run_resolution: 1000,
            profile: IntensityProfile::Constant,
            resample: false,
            stopping: StoppingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub seed: u64,
    /// Fully resolved parameters, defaults included.
    pub parameters: Value,
    pub output_dir: PathBuf,
    pub outputs: Vec<String>,
    pub versions: Map<String, Value>,
    /// Unix seconds; excluded from determinism comparisons.
    pub timestamp: u64,
    /// Excluded from determinism comparisons.
    pub wall_time_s: f64,
}

struct Outputs<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.names.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("plain data");
        text.push('\n');
        self.write(name, &text)
    }
}

/// Runs the experiment and writes `manifest.json` plus its outputs.
pub fn run(config: &ExperimentConfig) -> Result<Manifest> {
    let started = Instant::now();
    fs::create_dir_all(&config.output_dir).map_err(|source| Error::Io {
        path: config.output_dir.display().to_string(),
        source,
    })?;
    let mut out = Outputs {
        dir: &config.output_dir,
        names: Vec::new(),
    };
    let seed = config.seed;
    let resolved = match config.experiment {
        Experiment::Spectral => {
            let mut p: SpectralParams = params(&config.parameters)?;
            p.dim = run_spectral(&p, seed, &mut out)?;
            serde_json::to_value(p)
        }
        Experiment::Poisson => {
            let p: PoissonParams = params(&config.parameters)?;
            run_poisson(&p, seed, &mut out)?;
            serde_json::to_value(p)
        }
        Experiment::HolevoAdditivity => {
            let p: HolevoParams = params(&config.parameters)?;
            run_holevo(&p, seed, &mut out)?;
            serde_json::to_value(p)
        }
        Experiment::SdeConvergence => {
            let p: SdeParams = params(&config.parameters)?;
            run_sde(&p, seed, &mut out)?;
            serde_json::to_value(p)
        }
        Experiment::CodecStudy => {
            let p: CodecParams = params(&config.parameters)?;
            run_codec_study(&p, seed, &mut out)?;
            serde_json::to_value(p)
        }
    }
    .expect("plain data");

    let mut versions = Map::new();
    versions.insert("opstat".into(), Value::from(env!("CARGO_PKG_VERSION")));
    versions.insert("manifest_schema".into(), Value::from(1));
    let mut outputs = out.names.clone();
    outputs.sort();
    let manifest = Manifest {
        experiment: config.experiment,
        seed,
        parameters: resolved,
        output_dir: config.output_dir.clone(),
        outputs,
        versions,
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(manifest)
}

fn partition_for(cuts: &Option<Vec<f64>>, count: usize) -> Result<Vec<BorelArc>> {
    match cuts {
        Some(c) => BorelArc::partition_from_cuts(c),
        None if count == 0 => Err(Error::validation("partition must be >= 1")),
        None => Ok(BorelArc::equal_partition(count)),
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(1..=64).contains(&dim) {
        return Err(Error::validation(format!("dim must be in 1..=64, got {dim}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectralReport {
    dim: usize,
    hermitian_eigenvalues: Vec<f64>,
    eigenphases: Vec<f64>,
    arcs: Vec<[f64; 2]>,
    ranks: Vec<usize>,
    max_idempotence_defect: f64,
    max_self_adjoint_defect: f64,
    completeness_defect: f64,
    eigen_reconstruction_defect: f64,
    cayley_roundtrip_error: f64,
}

/// Returns the dimension actually used.
fn run_spectral(p: &SpectralParams, seed: u64, out: &mut Outputs) -> Result<usize> {
    let h = match &p.matrix {
        Some(path) => HermitianOperator::new(read_matrix(path)?)?,
        None => {
            check_dim(p.dim)?;
            random::hermitian(p.dim, p.norm, &mut random::stream(seed, 0))
        }
    };
    let arcs = partition_for(&p.cuts, p.partition)?;
    let hdec = eig_hermitian(&h)?;
    let u = cayley_transform(&h)?;
    let dec = eig_unitary(&u)?;
    let projectors = resolution_of_identity_of(&dec, &arcs)?;
    let dim = h.dim();
    let mut sum = crate::linalg::ComplexMatrix::zeros(dim);
    for q in &projectors {
        sum = &sum + q.matrix();
    }
    let back = inverse_cayley(&u)?;
    let report = SpectralReport {
        dim,
        hermitian_eigenvalues: hdec.real_eigenvalues(),
        eigenphases: dec.eigenphases(),
        arcs: arcs.iter().map(|a| [a.lo(), a.hi()]).collect(),
        ranks: projectors.iter().map(|q| q.rank()).collect(),
        max_idempotence_defect: projectors.iter().map(|q| idempotence_defect(q.matrix())).fold(0.0, f64::max),
        max_self_adjoint_defect: projectors.iter().map(|q| q.matrix().hermitian_defect()).fold(0.0, f64::max),
        completeness_defect: sum.max_abs_diff(&crate::linalg::ComplexMatrix::identity(dim)),
        eigen_reconstruction_defect: dec.reconstruction_defect(u.matrix()),
        cayley_roundtrip_error: back.matrix().max_abs_diff(h.matrix()),
    };
    out.json("spectral.json", &report)?;
    Ok(dim)
}

#[derive(Serialize)]
struct PoissonReport {
    dim: usize,
    rate_times_horizon: f64,
    closed_form_vs_series: f64,
    semigroup_law_defect: f64,
    contraction_norm: f64,
    jumps: usize,
    sigma_additivity: crate::poisson::SigmaAdditivityReport,
}

fn run_poisson(p: &PoissonParams, seed: u64, out: &mut Outputs) -> Result<()> {
    check_dim(p.dim)?;
    let cfg = PoissonConfig::new(p.rate, p.horizon, random::derive_seed(seed, 1))?;
    let arcs = partition_for(&None, p.partition)?;
    let u = random::haar_unitary(p.dim, &mut random::stream(seed, 0));
    let dec = eig_unitary(&u)?;
    let t = p.horizon;
    let closed = poisson_semigroup_of(&dec, p.rate, t)?;
    let series = poisson_series(&u, p.rate, t, p.series_terms);
    let half = poisson_semigroup_of(&dec, p.rate, t / 2.0)?;
    let law = (&half * &half).max_abs_diff(&closed);
    let marks = projection_poisson_path(&u, &arcs, &cfg)?;
    let sigma = sigma_additivity_test(&u, &arcs, p.trials, &cfg)?;

    let mut csv = String::from("t,rank\n");
    for (time, proj) in &marks {
        let _ = writeln!(csv, "{time},{}", proj.rank());
    }
    out.write("jumps.csv", &csv)?;
    out.json(
        "poisson.json",
        &PoissonReport {
            dim: p.dim,
            rate_times_horizon: p.rate * t,
            closed_form_vs_series: closed.max_abs_diff(&series),
            semigroup_law_defect: law,
            contraction_norm: closed.spectral_norm(),
            jumps: marks.len(),
            sigma_additivity: sigma,
        },
    )
}

fn named_channel(name: &str, dim: usize, p: f64) -> Result<QuantumChannel> {
    match name {
        "identity" => Ok(QuantumChannel::identity(dim)),
        "depolarizing" => QuantumChannel::depolarizing(p),
        "dephasing" => QuantumChannel::dephasing(p),
        "amplitude-damping" => QuantumChannel::amplitude_damping(p),
        other => Err(Error::validation(format!("unknown channel family `{other}`"))),
    }
}

fn run_holevo(p: &HolevoParams, seed: u64, out: &mut Outputs) -> Result<()> {
    check_dim(p.dim)?;
    if p.pairs == 0 {
        return Err(Error::validation("pairs must be >= 1"));
    }
    let opt_seeds = random::derive_seed(seed, u64::MAX);
    let mut reports: Vec<AdditivityReport> = Vec::with_capacity(p.pairs);
    for k in 0..p.pairs as u64 {
        let (a, b) = match p.channels.as_str() {
            "random" => (
                random_channel(p.dim, p.kraus, random::derive_seed(seed, 2 * k))?,
                random_channel(p.dim, p.kraus, random::derive_seed(seed, 2 * k + 1))?,
            ),
            "file" => {
                let need = |f: &Option<PathBuf>, key: &str| {
                    f.as_deref()
                        .ok_or_else(|| Error::validation(format!("channels = \"file\" needs `{key}`")))
                        .and_then(read_channel)
                };
                (need(&p.channel_a, "channel_a")?, need(&p.channel_b, "channel_b")?)
            }
            name => (named_channel(name, p.dim, p.p)?, named_channel(name, p.dim, p.p)?),
        };
        let opt = OptimizerConfig {
            restarts: p.restarts,
            max_iters: p.max_iters,
            tolerance: p.tolerance,
            seed: random::derive_seed(opt_seeds, k),
            ..OptimizerConfig::default()
        };
        reports.push(additivity_experiment(&a, &b, &opt)?);
    }
    let mut csv = String::from("pair,chi_1,chi_2,chi_joint,defect,optimizer_tolerance,verdict,converged\n");
    for (k, r) in reports.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{k},{},{},{},{},{},{},{}",
            r.chi_1,
            r.chi_2,
            r.chi_joint,
            r.defect,
            r.optimizer_tolerance,
            r.verdict.as_str(),
            r.converged
        );
    }
    out.write("additivity.csv", &csv)?;
    out.json("additivity.json", &reports)
}

fn run_sde(p: &SdeParams, seed: u64, out: &mut Outputs) -> Result<()> {
    let base = SDEConfig {
        x0: p.x0,
        drift_coeff: p.drift_coeff,
        omega: p.omega,
        t_end: p.t_end,
        n_steps: p.path_steps,
        seed: random::derive_seed(seed, 1),
    };
    let path = euler_maruyama(&base)?;
    let exact = gbm_exact(&base, &path.brownian_increments)?;
    let mut csv = String::from("t,x_em,x_exact\n");
    for ((t, x), y) in path.times.iter().zip(&path.values).zip(&exact.values) {
        let _ = writeln!(csv, "{t},{x},{y}");
    }
    out.write("path.csv", &csv)?;

    let study = convergence_study(
        &SDEConfig {
            seed: random::derive_seed(seed, 0),
            ..base
        },
        &p.steps,
        p.paths,
    )?;
    out.write("convergence.csv", &study.to_csv())?;
    out.json("convergence.json", &study)
}

#[derive(Serialize)]
struct CodecRunSummary {
    rounds: Vec<crate::codec::RoundRecord>,
    reconstruction_area: f64,
    reference_area: f64,
    stopping: Option<crate::codec::StoppingReport>,
}

fn run_codec_study(p: &CodecParams, seed: u64, out: &mut Outputs) -> Result<()> {
    let obj = GeometricObject::new(p.object.clone())?;
    let study_seed = random::derive_seed(seed, 0);
    let mut csv = String::from("intensity,seed,iou\n");
    for &lambda in &p.intensities {
        for s in 0..p.seeds as u64 {
            let hits = encode(&obj, lambda, random::derive_seed(study_seed, s))?;
            let rec = decode(&tessellate(&hits)?, &hits);
            let _ = writeln!(csv, "{lambda},{s},{}", fidelity(&obj, &rec, p.resolution)?);
        }
    }
    out.write("study.csv", &csv)?;

    let run = run_codec(
        &obj,
        &RunConfig {
            intensity: p.round_intensity,
            rounds: p.rounds,
            seed: random::derive_seed(seed, 1),
            resolution: p.run_resolution,
            profile: p.profile,
            resample: p.resample,
        },
    )?;
    let stopping = match stopping_check(&run, &p.stopping) {
        Ok(r) => Some(r),
        Err(Error::NotEnoughRounds(_)) => None,
        Err(e) => return Err(e),
    };
    out.write("hits.csv", &run.hits.to_csv())?;
    out.write("cells.json", &run.tessellation.cells_json())?;
    out.json("reconstruction.json", &run.reconstruction)?;
    out.json(
        "run.json",
        &CodecRunSummary {
            rounds: run.rounds.clone(),
            reconstruction_area: run.reconstruction.reference_area(),
            reference_area: obj.reference_area(),
            stopping,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names_round_trip() {
        for e in [
            Experiment::Spectral,
            Experiment::Poisson,
            Experiment::HolevoAdditivity,
            Experiment::SdeConvergence,
            Experiment::CodecStudy,
        ] {
            assert_eq!(Experiment::parse(e.name()).unwrap(), e);
        }
        assert!(Experiment::parse("nope").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse(
            "experiment = \"poisson\"\nseed = 3\n[parameters]\nrate = 1.5\ndim = 3\n",
            false,
            "cfg.toml",
        )
        .unwrap();
        let mut over = Map::new();
        over.insert("dim".into(), Value::from(5));
        let cfg = ExperimentConfig::resolve(file, None, Some(9), None, over).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.parameters["dim"], Value::from(5));
        assert_eq!(cfg.parameters["rate"], Value::from(1.5));
        assert_eq!(cfg.output_dir, PathBuf::from("out/poisson"));
    }

    #[test]
    fn conflicting_experiment_is_rejected() {
        let file = ConfigFile::parse("{\"experiment\": \"spectral\"}", true, "c.json").unwrap();
        assert!(ExperimentConfig::resolve(file, Some(Experiment::Poisson), None, None, Map::new()).is_err());
    }

    #[test]
    fn toml_errors_carry_line() {
        let err = ConfigFile::parse("seed = 1\nseed = = 2\n", false, "bad.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("bad.toml"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_parameter_is_named() {
        let mut table = Map::new();
        table.insert("bogus".into(), Value::from(1));
        let err = params::<SpectralParams>(&table).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("bogus"));
    }
}
