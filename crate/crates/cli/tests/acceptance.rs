//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use hiddenobs::contexts::{nogo_witness, Context, NogoBranch};
use hiddenobs::hidden::{haar_ray, statistical_equivalence_check};
use hiddenobs::json::matrix_to_json;
use hiddenobs::mixed::Ensemble;
use hiddenobs::rng::KeyedRng;
use hiddenobs::{
    random, BorelExpr, DensityMatrix, GammaModel, HermitianOperator, HiddenMixedState,
    HiddenObservable, HiddenProposition, StateVector,
};
use hiddenobs_cli::{support, Input, RunConfig};
use rand::Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Instance {
    t: HermitianOperator,
    d: DensityMatrix,
    b: BorelExpr,
    gamma: GammaModel,
}

fn instances(n: usize) -> Vec<Instance> {
    let keyed = KeyedRng::new(SEED);
    (0..n)
        .map(|i| {
            let mut rng = keyed.at(100, i as u64);
            let dim = rng.random_range(2..=16);
            Instance {
                t: random::hermitian(&mut rng, dim),
                d: random::density(&mut rng, dim),
                b: random::expression(&mut rng, 4),
                gamma: if i % 2 == 0 { GammaModel::DirectUniform } else { GammaModel::ARG },
            }
        })
        .collect()
}

fn central_identity_exact() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for inst in instances(200) {
        let f = HiddenObservable::build(&inst.t, inst.gamma).unwrap();
        let mu = HiddenMixedState::from_density(&inst.d, inst.gamma).unwrap();
        let trace = f.spectrum().apply_borel(&inst.b).unwrap().trace_with(&inst.d).unwrap();
        let exact = mu.exact_classical_mean(&f, &inst.b).unwrap();
        let rel = (trace - exact).abs() / trace.abs().max(1.0);
        worst = worst.max(rel);
        if rel > 1e-10 {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs <= 10.0,
        format!("200 instances, {failures} failures, max scaled error {worst:.2e}, {secs:.2} s"),
    )
}

fn central_identity_monte_carlo() -> Outcome {
    let start = Instant::now();
    let keyed = KeyedRng::new(SEED);
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for inst in instances(50) {
        let f = HiddenObservable::build(&inst.t, inst.gamma).unwrap();
        let mu = HiddenMixedState::from_density(&inst.d, inst.gamma).unwrap();
        let trace = f.spectrum().apply_borel(&inst.b).unwrap().trace_with(&inst.d).unwrap();
        let z = mu.mc_estimate(&f, &inst.b, &keyed, 1_000_000).unwrap().z_score(trace);
        worst = worst.max(z);
        if z <= 4.0 {
            within += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        within >= 49 && secs <= 60.0,
        format!("{within}/50 with |z| <= 4 at n = 1e6, max |z| {worst:.2}, {secs:.2} s"),
    )
}

fn moment_identity() -> Outcome {
    let keyed = KeyedRng::new(SEED);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let mut rng = keyed.at(101, i);
        let dim = rng.random_range(1..=12);
        let t = random::hermitian(&mut rng, dim);
        let f = HiddenObservable::build(&t, GammaModel::DirectUniform).unwrap();
        let report = f.moments_check(&haar_ray(&mut rng, dim), 8, 1e-10).unwrap();
        if !report.pass {
            failures += 1;
        }
        for row in &report.rows {
            worst = worst.max(row.error);
        }
    }
    outcome(failures == 0, format!("100 pairs, n <= 8, {failures} failures, max error {worst:.2e}"))
}

fn spectral_support() -> Outcome {
    let mut rng = KeyedRng::new(SEED).at(102, 0);
    let t = random::hermitian(&mut rng, 8);
    let config = RunConfig {
        seed: SEED,
        samples: 100_000,
        rays: 100,
        ..RunConfig::default()
    };
    let r = support(&Input::new("t.json", matrix_to_json(t.matrix())), &config).unwrap();
    let exact = r.results["exact_exceptions"].as_u64().unwrap();
    let observed = r.results["observed_values"].as_array().unwrap().len();
    outcome(
        r.pass && exact == 0,
        format!("1e5 evaluations on 100 rays, {exact} exceptions, {observed} distinct values"),
    )
}

fn gamma_pushforward() -> Outcome {
    let n = 100_000usize;
    let keyed = KeyedRng::new(SEED);
    let mut us: Vec<f64> = (0..n)
        .map(|i| GammaModel::ARG.sample_u(&mut keyed.at(103, i as u64)))
        .collect();
    us.sort_by(f64::total_cmp);
    let ks = us
        .iter()
        .enumerate()
        .map(|(i, &u)| ((i + 1) as f64 / n as f64 - u).max(u - i as f64 / n as f64))
        .fold(0.0, f64::max);
    let alpha: f64 = 1e-3;
    let critical = ((2.0 / alpha).ln() / 2.0).sqrt() / (n as f64).sqrt();
    outcome(ks < critical, format!("KS distance {ks:.5} vs critical {critical:.5}"))
}

/// A second decomposition of `d`: `phi_k = sqrt(D) U e_k` for a random unitary `U`.
fn rotated_ensemble<R: Rng>(rng: &mut R, d: &DensityMatrix) -> Ensemble {
    let root = d.as_operator().decompose().unwrap().apply_fn(|l| l.max(0.0).sqrt());
    let u = random::unitary(rng, d.dim());
    let phis = root.matrix() * u;
    let comps = phis
        .column_iter()
        .filter_map(|c| {
            let w = c.norm_squared();
            (w > 1e-14).then(|| (w, StateVector::new(c.into_owned()).unwrap()))
        })
        .collect::<Vec<_>>();
    let total: f64 = comps.iter().map(|c| c.0).sum();
    Ensemble::new(comps.into_iter().map(|(w, s)| (w / total, s)).collect()).unwrap()
}

fn proposition_consistency() -> Outcome {
    let keyed = KeyedRng::new(SEED);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let mut rng = keyed.at(104, i);
        let dim = rng.random_range(2..=8);
        let rank = rng.random_range(0..=dim);
        let e = random::projector(&mut rng, dim, rank);
        let prop = HiddenProposition::from_projector(&e, GammaModel::DirectUniform).unwrap();
        let d = random::density(&mut rng, dim);
        let mu = HiddenMixedState::from_density(&d, GammaModel::DirectUniform).unwrap();
        let measure = mu.exact_mean_of(prop.observable(), &|v| v).unwrap();
        worst = worst.max((measure - prop.projector().trace_with(&d).unwrap()).abs());
    }
    let mut worst_pair: f64 = 0.0;
    for i in 0..20u64 {
        let mut rng = keyed.at(105, i);
        let dim = rng.random_range(2..=6);
        let d = random::density(&mut rng, dim);
        let a = HiddenMixedState::new(Ensemble::from_density(&d).unwrap(), GammaModel::DirectUniform);
        let b = HiddenMixedState::new(rotated_ensemble(&mut rng, &d), GammaModel::DirectUniform);
        let f = HiddenObservable::build(&random::hermitian(&mut rng, dim), GammaModel::DirectUniform).unwrap();
        let expr = random::expression(&mut rng, 3);
        let (ma, mb) = (a.exact_classical_mean(&f, &expr).unwrap(), b.exact_classical_mean(&f, &expr).unwrap());
        worst_pair = worst_pair.max((ma - mb).abs());
    }
    outcome(
        worst <= 1e-10 && worst_pair <= 1e-10,
        format!("100 projectors max error {worst:.2e}; 20 ensemble pairs max difference {worst_pair:.2e}"),
    )
}

fn context_homomorphism() -> Outcome {
    let keyed = KeyedRng::new(SEED);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = keyed.at(106, i);
        let dim = rng.random_range(2..=12);
        let size = rng.random_range(2..=4);
        let t0 = random::hermitian(&mut rng, dim);
        let powers = [HermitianOperator::identity(dim), t0.clone(), t0.powi(2), t0.powi(3)];
        let family: Vec<HermitianOperator> = (0..size)
            .map(|_| {
                powers.iter().fold(HermitianOperator::identity(dim).scaled(0.0), |acc, p| {
                    acc.combine(1.0, p, rng.random_range(-1.0..1.0)).unwrap()
                })
            })
            .collect();
        let ok = Context::new(&family, GammaModel::DirectUniform)
            .and_then(|ctx| ctx.homomorphism_check(20, &keyed.clone()))
            .map(|r| {
                worst = worst.max(r.max_operator_error);
                r.pass
            })
            .unwrap_or(false);
        if !ok {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("50 families, {failures} failures, max operator error {worst:.2e}"))
}

fn nogo() -> Outcome {
    let keyed = KeyedRng::new(SEED);
    let pauli = nogo_witness(
        &HermitianOperator::pauli_z(),
        &HermitianOperator::pauli_x(),
        GammaModel::DirectUniform,
        hiddenobs::contexts::DEFAULT_WITNESS_SEARCH,
        &keyed,
        1e-10,
    )
    .unwrap();
    let pauli_gap = match pauli.branch {
        NogoBranch::Witness { gap, .. } => gap,
        _ => f64::NAN,
    };
    let mut witnessed = 0;
    let mut smallest = f64::INFINITY;
    for i in 0..20u64 {
        let mut rng = keyed.at(107, i);
        let dim = if i < 10 { 2 } else { 3 };
        let a = random::hermitian(&mut rng, dim);
        let b = random::hermitian(&mut rng, dim);
        let r = nogo_witness(&a, &b, GammaModel::DirectUniform, 1024, &keyed, 1e-10).unwrap();
        if let NogoBranch::Witness { gap, .. } = r.branch {
            witnessed += 1;
            smallest = smallest.min(gap);
        }
    }
    outcome(
        pauli_gap >= 2.0 - 1e-6 && witnessed == 20,
        format!("Pauli gap {pauli_gap:.12}; {witnessed}/20 random pairs witnessed, smallest gap {smallest:.3e}"),
    )
}

fn statistical_equivalence() -> Outcome {
    let keyed = KeyedRng::new(SEED);
    let mut rng = keyed.at(108, 0);
    let t = random::hermitian(&mut rng, 6);
    let f1 = HiddenObservable::build(&t, GammaModel::DirectUniform).unwrap();
    let f2 = HiddenObservable::build(&t, GammaModel::ARG).unwrap();
    let rays: Vec<StateVector> = (0..50).map(|_| haar_ray(&mut rng, 6)).collect();
    let r = statistical_equivalence_check(&f1, &f2, &rays, 1e-12).unwrap();
    outcome(
        r.pass,
        format!("50 rays, {} support mismatches, max weight error {:.2e}", r.support_mismatches, r.max_weight_error),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = KeyedRng::new(SEED).at(109, 0);
    let t = random::hermitian(&mut rng, 5);
    let d = random::density(&mut rng, 5);
    let tp = dir.path().join("t.json");
    let dp = dir.path().join("d.json");
    std::fs::write(&tp, matrix_to_json(t.matrix())).unwrap();
    std::fs::write(&dp, matrix_to_json(d.matrix())).unwrap();
    let run = |args: &[&str], workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_hiddenobs"))
            .args(args)
            .args(["--seed", "7", "--workers", workers])
            .output()
            .unwrap();
        (o.status.code(), o.stdout)
    };
    let (t, d) = (tp.to_str().unwrap(), dp.to_str().unwrap());
    let commands: [&[&str]; 3] = [
        &["sample", "--observable", t, "--density", d, "--samples", "50000"],
        &["sample", "--density", d, "--samples", "50000", "--gamma", "arg"],
        &["verify-trace", t, d, "--expr", "clamp(-1, 1) * x^2 + step(0.5)", "--samples", "200000"],
    ];
    let mut identical = 0;
    for args in commands {
        let first = run(args, "1");
        let again = run(args, "1");
        let wide = run(args, "4");
        if first.0 == Some(0) && !first.1.is_empty() && first == again && first == wide {
            identical += 1;
        }
    }
    outcome(identical == commands.len(), format!("{identical}/{} commands byte-identical over 2 runs and workers 1, 4", commands.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("central identity, exact path", central_identity_exact),
        ("central identity, Monte Carlo path", central_identity_monte_carlo),
        ("moment identity", moment_identity),
        ("spectral support", spectral_support),
        ("gamma pushforward", gamma_pushforward),
        ("proposition and ensemble consistency", proposition_consistency),
        ("context homomorphism", context_homomorphism),
        ("no-go witness", nogo),
        ("statistical equivalence", statistical_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
