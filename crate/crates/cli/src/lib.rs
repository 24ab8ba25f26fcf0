//! Verification commands behind the `hiddenobs` binary.
//!
//! Every command takes already-read inputs and a [`RunConfig`] and returns
//! either a [`Report`] or CSV text, so the same code paths are exercised by
//! the binary and by tests. Reports serialize with lexicographically ordered
//! keys and carry no timestamps, which makes them byte-identical across runs
//! and worker counts for a fixed seed.

use hiddenobs::contexts::{nogo_witness, Context, NogoBranch, SHARED_U_CAVEAT};
use hiddenobs::hidden::{haar_ray, Eta};
use hiddenobs::json::{parse_matrix, vector_to_json};
use hiddenobs::rng::{streams, KeyedRng};
use hiddenobs::{
    BorelExpr, DensityMatrix, Error, GammaModel, HermitianOperator, HiddenMixedState, HiddenObservable,
    HiddenPoint,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const FINITE_DIMENSION_CAVEAT: &str =
    "finite-dimensional substitution: operators are d x d complex matrices";
const Z_BOUND: f64 = 4.0;
const SOUNDNESS_TOL: f64 = 1e-8;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Pass = 0,
    VerificationFailed = 1,
    InputError = 2,
    NumericFailure = 3,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: ExitCode::InputError,
            message: message.into(),
        }
    }

    fn context(what: &str, e: Error) -> Self {
        Self {
            code: classify(&e),
            message: format!("{what}: {e}"),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn classify(e: &Error) -> ExitCode {
    match e {
        Error::EigensolverFailure
        | Error::InvalidDecomposition(_)
        | Error::DegeneracyResolutionFailure { .. }
        | Error::NonQuadraticFirstMoment { .. }
        | Error::Evaluation(_) => ExitCode::NumericFailure,
        _ => ExitCode::InputError,
    }
}

trait WithContext<T> {
    fn ctx(self, what: &str) -> Result<T, CliError>;
}

impl<T> WithContext<T> for hiddenobs::Result<T> {
    fn ctx(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::context(what, e))
    }
}

/// A named input file's raw bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Input {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }

    fn text(&self) -> Result<&str, CliError> {
        std::str::from_utf8(&self.bytes).map_err(|_| CliError::input(format!("{}: not UTF-8", self.name)))
    }

    fn operator(&self) -> Result<HermitianOperator, CliError> {
        let m = parse_matrix(self.text()?).ctx(&self.name)?;
        HermitianOperator::new(m).ctx(&self.name)
    }

    fn density(&self) -> Result<DensityMatrix, CliError> {
        let m = parse_matrix(self.text()?).ctx(&self.name)?;
        DensityMatrix::new(m).ctx(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaKind {
    Uniform,
    Arg,
}

impl GammaKind {
    pub fn model(self) -> GammaModel {
        match self {
            GammaKind::Uniform => GammaModel::DirectUniform,
            GammaKind::Arg => GammaModel::ComplexArg { eta: Eta::Gaussian },
        }
    }

    fn name(self) -> &'static str {
        match self {
            GammaKind::Uniform => "uniform",
            GammaKind::Arg => "arg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub gamma: GammaKind,
    /// Random rays for `support`.
    pub rays: usize,
    /// Random rays tried by `nogo` before refinement.
    pub search: usize,
    /// Random trials for `context`.
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 100_000,
            tol: 1e-10,
            gamma: GammaKind::Uniform,
            rays: 100,
            search: hiddenobs::contexts::DEFAULT_WITNESS_SEARCH,
            trials: 100,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::input(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn keyed(&self) -> KeyedRng {
        KeyedRng::new(self.seed)
    }

    fn canonical(&self) -> String {
        format!(
            "seed={};samples={};tol={:e};gamma={};rays={};search={};trials={}",
            self.seed,
            self.samples,
            self.tol,
            self.gamma.name(),
            self.rays,
            self.search,
            self.trials
        )
    }

    fn describe(&self) -> Value {
        json!({
            "gamma": self.gamma.name(),
            "samples": self.samples,
            "seed": self.seed,
            "tol": self.tol,
        })
    }

    fn gamma_caveat(&self) -> String {
        match self.gamma {
            GammaKind::Uniform => "hidden parameter model: u drawn uniformly on (0, 1)".into(),
            GammaKind::Arg => {
                "hidden parameter model: u = arg(z) / 2 pi for standard complex Gaussian z".into()
            }
        }
    }
}

/// SHA-256 over the command, every input's name and bytes, extra strings and the config.
pub fn inputs_digest(command: &str, inputs: &[&Input], extra: &[&str], config: &RunConfig) -> String {
    let mut h = Sha256::new();
    let mut field = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    field(command.as_bytes());
    for i in inputs {
        field(i.name.as_bytes());
        field(&i.bytes);
    }
    for e in extra {
        field(e.as_bytes());
    }
    field(config.canonical().as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub results: Value,
    pub pass: bool,
    pub caveats: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> ExitCode {
        if self.pass {
            ExitCode::Pass
        } else {
            ExitCode::VerificationFailed
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "caveats": self.caveats,
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "pass": self.pass,
            "results": self.results,
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report values serialize");
        s.push('\n');
        s
    }
}

fn spectrum_json(op: &HiddenObservable) -> Value {
    json!(op.spectrum().eigenvalues())
}

/// `Trace[b(T) D]` against the exact classical mean and a Monte Carlo estimate.
pub fn verify_trace(t: &Input, d: &Input, expr: &str, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    if config.samples < 2 {
        return Err(CliError::input(format!("verify-trace needs at least 2 samples, got {}", config.samples)));
    }
    let b = BorelExpr::parse(expr).map_err(|e| CliError::input(format!("expression: {e}")))?;
    let op = t.operator()?;
    let dm = d.density()?;
    if op.dim() != dm.dim() {
        return Err(CliError::context(
            "operator and density",
            Error::DimensionMismatch {
                expected: op.dim(),
                found: dm.dim(),
            },
        ));
    }
    let gamma = config.gamma.model();
    let f = HiddenObservable::build(&op, gamma).ctx("operator")?;
    let mu = HiddenMixedState::from_density(&dm, gamma).ctx("density")?;
    let bt = f.spectrum().apply_borel(&b).ctx("b(T)")?;
    let trace = bt.trace_with(&dm).ctx("trace")?;
    let ensemble_trace = mu.ensemble().trace_expectation(&bt).ctx("ensemble trace")?;
    let exact = mu.exact_classical_mean(&f, &b).ctx("exact mean")?;
    let mc = mu.mc_estimate(&f, &b, &config.keyed(), config.samples).ctx("monte carlo")?;
    let gap = (trace - exact).abs();
    let z = mc.z_score(trace);
    let threshold = config.tol * trace.abs().max(1.0);
    let pass = gap <= threshold && z <= Z_BOUND;
    Ok(Report {
        command: "verify-trace".into(),
        inputs_digest: inputs_digest("verify-trace", &[t, d], &[expr], config),
        results: json!({
            "config": config.describe(),
            "dimension": op.dim(),
            "eigenvalues": spectrum_json(&f),
            "ensemble_components": mu.ensemble().components().len(),
            "ensemble_trace": ensemble_trace,
            "exact_gap": gap,
            "exact_gap_threshold": threshold,
            "exact_mean": exact,
            "expression": b.to_string(),
            "hermiticity_correction": op.correction(),
            "mc_mean": mc.mean,
            "mc_std_error": mc.std_error,
            "samples": mc.samples,
            "trace": trace,
            "z_bound": Z_BOUND,
            "z_score": if z.is_finite() { json!(z) } else { json!("inf") },
        }),
        pass,
        caveats: vec![
            FINITE_DIMENSION_CAVEAT.into(),
            config.gamma_caveat(),
            "mu is built from the eigen-ensemble of D; any ensemble with the same density gives the same means".into(),
        ],
    })
}

/// Samples hidden points on random rays and checks every value is an eigenvalue.
pub fn support(t: &Input, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    if config.samples == 0 || config.rays == 0 {
        return Err(CliError::input("support needs at least one ray and one sample"));
    }
    let op = t.operator()?;
    let gamma = config.gamma.model();
    let f = HiddenObservable::build(&op, gamma).ctx("operator")?;
    let keyed = config.keyed();
    let eigenvalues = f.spectrum().eigenvalues();
    let tol = f.spectrum().merge_tolerance();
    let rays = config.rays;
    let per_ray = |r: usize| -> Result<(usize, usize, Vec<f64>), CliError> {
        let psi = haar_ray(&mut keyed.at(streams::SUPPORT_RAYS, r as u64), op.dim());
        let line = f.distribution(&psi).ctx("ray")?;
        let count = config.samples / rays + usize::from(r < config.samples % rays);
        let (mut exact_misses, mut tol_misses) = (0, 0);
        let mut seen = Vec::new();
        for k in 0..count {
            let mut rng = keyed.at(streams::HIDDEN_SAMPLES, (k * rays + r) as u64);
            let u = gamma.sample_u(&mut rng);
            let v = f.evaluate(&HiddenPoint::new(psi.clone(), u).ctx("hidden point")?).ctx("evaluate")?;
            debug_assert_eq!(v, line.quantile(u));
            if !eigenvalues.contains(&v) {
                exact_misses += 1;
            }
            if !eigenvalues.iter().any(|l| (l - v).abs() <= tol) {
                tol_misses += 1;
            }
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        Ok((exact_misses, tol_misses, seen))
    };
    let outcomes = (0..rays).into_par_iter().map(per_ray).collect::<Result<Vec<_>, _>>()?;
    let exact_exceptions: usize = outcomes.iter().map(|o| o.0).sum();
    let exceptions: usize = outcomes.iter().map(|o| o.1).sum();
    let mut observed: Vec<f64> = outcomes.into_iter().flat_map(|o| o.2).collect();
    observed.sort_by(f64::total_cmp);
    observed.dedup();
    Ok(Report {
        command: "support".into(),
        inputs_digest: inputs_digest("support", &[t], &[], config),
        results: json!({
            "config": config.describe(),
            "dimension": op.dim(),
            "eigenvalues": eigenvalues,
            "evaluations": config.samples,
            "exact_exceptions": exact_exceptions,
            "exceptions": exceptions,
            "merge_tolerance": tol,
            "observed_values": observed,
            "rays": rays,
        }),
        pass: exceptions == 0,
        caveats: vec![FINITE_DIMENSION_CAVEAT.into(), config.gamma_caveat()],
    })
}

/// Joint diagonalization and homomorphism checks for a commuting family.
pub fn context(files: &[Input], config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    if files.is_empty() {
        return Err(CliError::input("context needs at least one operator file"));
    }
    let family = files.iter().map(Input::operator).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Input> = files.iter().collect();
    let digest = inputs_digest("context", &refs, &[], config);
    let caveats = vec![FINITE_DIMENSION_CAVEAT.into(), config.gamma_caveat()];
    let ctx = match Context::new(&family, config.gamma.model()) {
        Ok(ctx) => ctx,
        Err(Error::NotCommuting { first, second, norm }) => {
            return Ok(Report {
                command: "context".into(),
                inputs_digest: digest,
                results: json!({
                    "commutator_norm": norm,
                    "files": [files[first].name, files[second].name],
                    "pair": [first, second],
                    "status": "not_commuting",
                }),
                pass: false,
                caveats,
            })
        }
        Err(e) => return Err(CliError::context("context", e)),
    };
    let check = ctx.homomorphism_check(config.trials, &config.keyed()).ctx("homomorphism check")?;
    let reconstruction = ctx.reconstruction_error();
    let transfers: Vec<Value> = (0..ctx.len())
        .map(|i| {
            json!({
                "file": files[i].name,
                "values": ctx.transfer(i).expect("member index in range"),
            })
        })
        .collect();
    Ok(Report {
        command: "context".into(),
        inputs_digest: digest,
        results: json!({
            "config": config.describe(),
            "labels": ctx.labels(),
            "max_operator_error": check.max_operator_error,
            "pointwise_failures": check.pointwise_failures,
            "reconstruction_error": reconstruction,
            "status": "commuting",
            "transfers": transfers,
            "trials": check.trials,
        }),
        pass: check.pass && reconstruction <= SOUNDNESS_TOL,
        caveats,
    })
}

/// Context for a commuting pair, or a second-moment witness for a non-commuting one.
pub fn nogo(a: &Input, b: &Input, config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let (opa, opb) = (a.operator()?, b.operator()?);
    let report = nogo_witness(&opa, &opb, config.gamma.model(), config.search, &config.keyed(), config.tol)
        .ctx("nogo")?;
    let mut results = json!({
        "commutator_norm": report.commutator_norm,
        "config": config.describe(),
        "search": config.search,
        "sum_reconstruction_error": report.sum_reconstruction_error,
    });
    let fields = results.as_object_mut().expect("object literal");
    let pass = match &report.branch {
        NogoBranch::Commuting { context } => {
            fields.insert("branch".into(), json!("context"));
            fields.insert("labels".into(), json!(context.labels()));
            let transfers: Vec<Value> = (0..2).map(|i| json!(context.transfer(i).expect("pair member"))).collect();
            fields.insert("transfers".into(), json!(transfers));
            true
        }
        NogoBranch::Witness { ray, gap, seed_index } => {
            fields.insert("branch".into(), json!("witness"));
            fields.insert("gap".into(), json!(gap));
            fields.insert("seed_index".into(), json!(seed_index));
            let ray_json: Value =
                serde_json::from_str(&vector_to_json(ray.components())).expect("vector JSON reparses");
            fields.insert("witness_ray".into(), ray_json);
            true
        }
        NogoBranch::Inconclusive { best_gap } => {
            fields.insert("branch".into(), json!("inconclusive"));
            fields.insert("gap".into(), json!(best_gap));
            false
        }
    };
    Ok(Report {
        command: "nogo".into(),
        inputs_digest: inputs_digest("nogo", &[a, b], &[], config),
        results,
        pass,
        caveats: vec![SHARED_U_CAVEAT.into(), FINITE_DIMENSION_CAVEAT.into(), config.gamma_caveat()],
    })
}

/// CSV of `(component_index, u, value)` for hidden samples of `mu_D` evaluated by `f_T`.
///
/// Without `observable` the density itself is the observable; without
/// `density` the maximally mixed state is used.
pub fn sample(observable: Option<&Input>, density: Option<&Input>, config: &RunConfig) -> Result<String, CliError> {
    config.validate()?;
    if config.samples == 0 {
        return Err(CliError::input("sample count must be positive"));
    }
    let (op, dm) = match (observable, density) {
        (None, None) => return Err(CliError::input("sample needs an observable or a density file")),
        (Some(t), None) => {
            let op = t.operator()?;
            let d = op.dim();
            (op, DensityMatrix::maximally_mixed(d))
        }
        (None, Some(d)) => {
            let dm = d.density()?;
            (dm.as_operator().clone(), dm)
        }
        (Some(t), Some(d)) => (t.operator()?, d.density()?),
    };
    if op.dim() != dm.dim() {
        return Err(CliError::context(
            "operator and density",
            Error::DimensionMismatch {
                expected: op.dim(),
                found: dm.dim(),
            },
        ));
    }
    let gamma = config.gamma.model();
    let f = HiddenObservable::build(&op, gamma).ctx("operator")?;
    let mu = HiddenMixedState::from_density(&dm, gamma).ctx("density")?;
    let rows = mu.sample_values(&f, &config.keyed(), config.samples).ctx("sample")?;
    let mut out = String::with_capacity(48 * (rows.len() + 1));
    out.push_str("component_index,u,value\n");
    for (k, u, v) in rows {
        use std::fmt::Write;
        writeln!(out, "{k},{u:.16e},{v:.16e}").expect("writing to a String");
    }
    Ok(out)
}
