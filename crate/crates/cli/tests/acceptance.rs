//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Duration;

use rayon::prelude::*;
use sandwich::divergence::{
    closed_form_optimizer, integral_representation_check, optimizer_distance, petz_renyi, relative_entropy,
    sandwiched_renyi, variational_value, OptimizerConfig, RenyiOrder,
};
use sandwich::equality::{
    alpha_recover, alpha_recover_min_eig, build_recoverable_triple, default_beta_grid, full_report,
    geometric_mean, petz_recover, t3_residual, t3_residual_dilated, RecoverableKind,
    ResidualReport, COMPRESSED_POWER_TS,
};
use sandwich::linalg::{real, trace, trace_norm, Subsystem};
use sandwich::modular::{build_compression, compression_identity_residual};
use sandwich::quadrature::QuadratureConfig;
use sandwich::random::{random_channel, random_density, random_operator, random_positive, trial_rng};
use sandwich::{DensityMatrix, KrausChannel};
use sandwich_cli::config::ChannelChoice;
use sandwich_cli::{run, ExperimentConfig, Scenario};
use support::{classical_renyi, fro, lu_inverse, random_simplex, schur_power, timed, Verdict, Worst, M};

const ALPHAS: [f64; 10] = [-0.9, -0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9];
const SEED: u64 = 20_240_601;

fn ord(a: f64) -> RenyiOrder {
    RenyiOrder::new(a).unwrap()
}

fn pair(seed: u64, trial: u64, d: usize) -> (DensityMatrix, DensityMatrix) {
    let mut r = trial_rng(seed, trial);
    (random_density(d, &mut r).unwrap(), random_density(d, &mut r).unwrap())
}

fn dpi_nonnegativity() -> Verdict {
    let cfg = ExperimentConfig {
        scenario: Scenario::DpiScan,
        seed: SEED,
        trials: 200,
        alpha_grid: ALPHAS.to_vec(),
        channel: ChannelChoice::Mixed,
        ..Default::default()
    };
    let (out, took) = timed(|| run(&cfg).unwrap());
    let worst = out.rows.iter().filter_map(|r| r.dpi_gap).fold(f64::INFINITY, f64::min);
    let all_ok = out.rows.len() == 2000 && out.rows.iter().all(|r| r.error.is_none() && r.dpi_ok);
    Verdict::check(
        all_ok && worst >= -1e-9 && took <= Duration::from_secs(120),
        format!("{} rows, min gap {worst:.3e}, {:.1} s", out.rows.len(), took.as_secs_f64()),
    )
}

fn classical_oracle() -> Verdict {
    let mut worst = Worst::default();
    for trial in 0..50 {
        let mut r = trial_rng(SEED + 2, trial);
        let d = 2 + (trial as usize % 3);
        let (p, q) = (random_simplex(d, &mut r), random_simplex(d, &mut r));
        let (rho, sigma) = (DensityMatrix::diagonal(&p).unwrap(), DensityMatrix::diagonal(&q).unwrap());
        for a in ALPHAS {
            let sand = sandwiched_renyi(&rho, &sigma, ord(a)).unwrap() - classical_renyi(&p, &q, 1.0 / (1.0 - a));
            let petz = petz_renyi(&rho, &sigma, ord(a)).unwrap() - classical_renyi(&p, &q, 1.0 + a);
            worst.see(sand.abs().max(petz.abs()), || format!("trial {trial}, alpha {a}"));
        }
    }
    Verdict::check(worst.value <= 1e-10, format!("max |diff| {:.3e} ({})", worst.value, worst.at))
}

fn optimizer_correctness() -> Verdict {
    let jobs: Vec<(f64, u64)> = [-0.6, -0.3, 0.3, 0.6].iter().flat_map(|&a| (0..20).map(move |t| (a, t))).collect();
    let results: Vec<(f64, f64, f64)> = jobs
        .par_iter()
        .map(|&(a, trial)| {
            let d = 2 + (trial as usize % 2);
            let (rho, sigma) = pair(SEED + 3, trial, d);
            let closed = closed_form_optimizer(&rho, &sigma, ord(a)).unwrap();
            let cfg = OptimizerConfig { seed: trial, ..Default::default() };
            let var = variational_value(&rho, &sigma, ord(a), &cfg).unwrap();
            let mut r = trial_rng(SEED + 33, trial);
            let mut beat = 0.0f64;
            for _ in 0..100 {
                let omega = random_density(d, &mut r).unwrap();
                let q = sandwich::modular::quadratic_form(&rho, &sigma, &omega, a).unwrap();
                let excess = if a > 0.0 { q - closed.value } else { closed.value - q };
                beat = beat.max(excess);
            }
            ((var.value - closed.value).abs(), optimizer_distance(&var.omega_hat, &closed), beat)
        })
        .collect();
    let gap = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let dist = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let beat = results.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Verdict::check(
        gap <= 1e-6 && dist <= 1e-4 && beat <= 1e-9,
        format!("max value gap {gap:.3e}, max trace distance {dist:.3e}, best probe excess {beat:.3e}"),
    )
}

fn compression_identity() -> Verdict {
    let mut worst = Worst::default();
    for trial in 0..50 {
        let mut r = trial_rng(SEED + 4, trial);
        let rho = random_density(4, &mut r).unwrap();
        let sigma = random_density(4, &mut r).unwrap();
        let a = random_operator(2, &mut r);
        let ci = build_compression(&rho, 2, 2).unwrap();
        worst.see(compression_identity_residual(&ci, &sigma, &a).unwrap(), || format!("trial {trial}"));
    }
    Verdict::check(worst.value <= 1e-9, format!("max residual {:.3e} ({})", worst.value, worst.at))
}

fn saturation_equivalence() -> Verdict {
    let dims = [(2, 2), (3, 2), (2, 3)];
    let jobs: Vec<(RecoverableKind, u64)> =
        RecoverableKind::ALL.iter().flat_map(|&k| (0..10).map(move |t| (k, t))).collect();
    let reports: Vec<(String, ResidualReport)> = jobs
        .par_iter()
        .flat_map_iter(|&(kind, trial)| {
            let d = dims[trial as usize % 3];
            let mut r = trial_rng(SEED + 5, trial * 3 + kind as u64);
            let triple = build_recoverable_triple(kind, d, &mut r).unwrap();
            let ch = triple.channel();
            ALPHAS.iter().map(move |&a| {
                let rep = full_report(&triple.rho_ab, &triple.sigma_ab, &ch, ord(a), &default_beta_grid(a)).unwrap();
                (format!("{kind} {d:?} trial {trial} alpha {a}"), rep)
            })
        })
        .collect();
    let (mut gap, mut resid) = (Worst::default(), Worst::default());
    let mut complete = true;
    for (at, rep) in &reports {
        complete &= rep.t3.len() == 9 && rep.t1_geo.is_some() && rep.petz_beta.is_some() && rep.compressed_power.is_some();
        gap.see(rep.dpi_gap.abs(), || at.clone());
        resid.see(rep.max_equality_residual().max(rep.recovery_err), || at.clone());
    }
    Verdict::check(
        complete && gap.value <= 1e-9 && resid.value <= 1e-8,
        format!(
            "{} reports ({} compressed-power exponents): max |gap| {:.3e}, max residual {:.3e} ({})",
            reports.len(),
            COMPRESSED_POWER_TS.len(),
            gap.value,
            resid.value,
            resid.at
        ),
    )
}

fn converse_copositivity() -> Verdict {
    let ch = KrausChannel::partial_trace(2, 2);
    let rows: Vec<(u64, f64, f64, f64)> = (0..100u64)
        .into_par_iter()
        .flat_map_iter(|trial| {
            let (rho, sigma) = pair(SEED + 6, trial, 4);
            let ch = ch.clone();
            ALPHAS.iter().map(move |&a| {
                let rep = full_report(&rho, &sigma, &ch, ord(a), &default_beta_grid(a)).unwrap();
                (trial, a, rep.dpi_gap, rep.t3_max())
            })
        })
        .collect();
    let bad: Vec<_> = rows.iter().filter(|r| (r.2 > 1e-4) != (r.3 > 1e-6)).collect();
    let min_gap = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let min_t3 = rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    Verdict::check(
        bad.is_empty(),
        format!(
            "{} rows, {} counterexamples, min gap {min_gap:.3e}, min t3 {min_t3:.3e}",
            rows.len(),
            bad.len()
        ),
    )
}

/// `C` in `D̃_{±h} ≈ D + C h`, from the values at `h`, `2h` and `4h`.
fn richardson_slope(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let (f1, f2, f4) = (f(h), f(2.0 * h), f(4.0 * h));
    (2.0 * (f2 - f1) - 0.5 * (f4 - f2)) / h
}

fn alpha_zero_limit() -> Verdict {
    let h = 1e-4;
    let mut worst = Worst::default();
    for trial in 0..20 {
        let (rho, sigma) = pair(SEED + 7, trial, 2 + (trial as usize % 3));
        let d_kl = relative_entropy(&rho, &sigma).unwrap();
        for s in [1.0, -1.0] {
            let f = |x: f64| sandwiched_renyi(&rho, &sigma, ord(s * x)).unwrap();
            let c = richardson_slope(f, h);
            let err = (f(h) - d_kl).abs();
            // ratio to the allowed 2|C|h
            worst.see(err / (2.0 * c.abs() * h).max(1e-14), || format!("trial {trial}, sign {s}, C {c:.3e}"));
        }
    }
    Verdict::check(worst.value <= 1.0, format!("max |D - D_KL| / (2|C|h) = {:.3} ({})", worst.value, worst.at))
}

fn geometric_mean_lemma() -> Verdict {
    let rel = |a: &M, b: &M| fro(&(a - b)) / fro(b).max(1.0);
    let mut worst = Worst::default();
    for trial in 0..50 {
        let mut r = trial_rng(SEED + 8, trial);
        let d = 2 + (trial as usize % 3);
        let (a, b) = (random_positive(d, &mut r), random_positive(d, &mut r));
        let (ai, bi) = (lu_inverse(&a), lu_inverse(&b));
        for lam in [-1.0, -0.5, 0.0, 1.0 / 3.0, 0.5, 1.0, 2.0] {
            let m = geometric_mean(&a, &b, lam).unwrap();
            let swap = rel(&m, &geometric_mean(&b, &a, 1.0 - lam).unwrap());
            let inv = rel(&lu_inverse(&m), &geometric_mean(&ai, &bi, lam).unwrap());
            let left = rel(&(&a * schur_power(&(&ai * &b), real(lam))), &m);
            let right = rel(&(schur_power(&(&a * &bi), real(1.0 - lam)) * &b), &m);
            worst.see(swap.max(inv).max(left).max(right), || format!("trial {trial}, lambda {lam}"));
        }
    }
    Verdict::check(worst.value <= 1e-9, format!("max residual {:.3e} ({})", worst.value, worst.at))
}

fn integral_representations() -> Verdict {
    let cfg = QuadratureConfig::default();
    let mut worst = Worst::default();
    for trial in 0..20 {
        let m = random_positive(2 + (trial as usize % 3), &mut trial_rng(SEED + 9, trial));
        for a in [-0.75, -0.25, 0.25, 0.75] {
            worst.see(integral_representation_check(&m, a, &cfg).unwrap(), || format!("trial {trial}, alpha {a}"));
        }
    }
    Verdict::check(worst.value <= 1e-6, format!("max |diff|_F {:.3e} ({})", worst.value, worst.at))
}

fn appendix_recovery() -> Verdict {
    let pt = KrausChannel::partial_trace(2, 2);
    let (mut petz, mut tp, mut rec) = (Worst::default(), Worst::default(), Worst::default());
    for trial in 0..20 {
        let mut r = trial_rng(SEED + 10, trial);
        let sigma = random_density(4, &mut r).unwrap();
        let x = random_operator(2, &mut r);
        let ours = alpha_recover(&sigma, (2, 2), ord(0.5), &x).unwrap();
        petz.see(fro(&(ours - petz_recover(&sigma, &pt, &x).unwrap())), || format!("trial {trial}"));
        for a in [0.2, 0.5, 0.8, -0.5] {
            let out = alpha_recover(&sigma, (2, 2), ord(a), &x).unwrap();
            tp.see((trace(&out) - trace(&x)).norm(), || format!("trial {trial}, alpha {a}"));
        }
    }
    for trial in 0..15 {
        let kind = RecoverableKind::ALL[trial as usize % 3];
        let triple = build_recoverable_triple(kind, (2, 2), &mut trial_rng(SEED + 11, trial)).unwrap();
        let rho_a = triple.rho_ab.reduced((2, 2), Subsystem::B).unwrap();
        for a in [0.2, 0.5, 0.8] {
            let out = alpha_recover(&triple.sigma_ab, (2, 2), ord(a), rho_a.matrix()).unwrap();
            rec.see(trace_norm(&(out - triple.rho_ab.matrix())), || format!("{kind} trial {trial}, alpha {a}"));
        }
    }
    let mut minima = [f64::INFINITY; 3];
    for trial in 0..100 {
        let mut r = trial_rng(SEED + 12, trial);
        let sigma = random_density(4, &mut r).unwrap();
        let x = random_positive(2, &mut r);
        for (k, a) in [0.5, 0.2, 0.8].into_iter().enumerate() {
            minima[k] = minima[k].min(alpha_recover_min_eig(&sigma, (2, 2), ord(a), &x).unwrap());
        }
    }
    let pass = petz.value <= 1e-10 && tp.value <= 1e-11 && rec.value <= 1e-8 && minima[0] >= -1e-10;
    Verdict::check(
        pass,
        format!(
            "Petz diff {:.3e}, trace defect {:.3e}, recovery {:.3e}; min eig at 1/2 {:.3e}, \
             recorded min eig at 0.2 {:.3e}, at 0.8 {:.3e}",
            petz.value, tp.value, rec.value, minima[0], minima[1], minima[2]
        ),
    )
}

fn stinespring_equivalence() -> Verdict {
    let mut worst = Worst::default();
    for trial in 0..20 {
        let mut r = trial_rng(SEED + 13, trial);
        let din = 3 + (trial as usize % 2);
        let rho = random_density(din, &mut r).unwrap();
        let sigma = random_density(din, &mut r).unwrap();
        let ch = random_channel(din, 2, din.div_ceil(2) + 1, &mut r).unwrap();
        let a = ALPHAS[trial as usize % ALPHAS.len()];
        for beta in default_beta_grid(a) {
            let direct = t3_residual(&rho, &sigma, &ch, ord(a), beta).unwrap();
            let dilated = t3_residual_dilated(&rho, &sigma, &ch, ord(a), beta).unwrap();
            worst.see((direct - dilated).abs(), || format!("trial {trial}, alpha {a}, beta {beta}"));
        }
    }
    Verdict::check(worst.value <= 1e-9, format!("max |diff| {:.3e} ({})", worst.value, worst.at))
}

fn cli_determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_sandwich");
    let runs = |args: &[&str]| -> Vec<u8> {
        let out = Command::new(bin).args(args).output().expect("binary runs");
        assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let cases: [&[&str]; 3] = [
        &["dpi-scan", "--seed", "7", "--trials", "30", "--channel", "mixed"],
        &["equality-scan", "--seed", "7", "--trials", "6"],
        &["recovery-test", "--seed", "7", "--trials", "4", "--kind", "blocked"],
    ];
    let mut bytes = 0;
    for args in cases {
        let (a, b) = (runs(args), runs(args));
        if a != b || a.is_empty() {
            return Verdict::check(false, format!("output differs for {}", args.join(" ")));
        }
        bytes += a.len();
    }
    Verdict::check(true, format!("{} subcommands byte-identical ({bytes} bytes)", cases.len()))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("dpi non-negativity", dpi_nonnegativity),
        ("classical oracle", classical_oracle),
        ("optimizer correctness", optimizer_correctness),
        ("compression identity", compression_identity),
        ("saturation equivalence", saturation_equivalence),
        ("converse co-positivity", converse_copositivity),
        ("alpha -> 0 limit", alpha_zero_limit),
        ("geometric-mean lemma", geometric_mean_lemma),
        ("integral representations", integral_representations),
        ("alpha recovery map", appendix_recovery),
        ("stinespring equivalence", stinespring_equivalence),
        ("cli determinism", cli_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let (verdict, took) = timed(|| {
            catch_unwind(AssertUnwindSafe(f))
                .unwrap_or_else(|e| {
                    let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                    Verdict::check(false, format!("panicked: {}", msg.unwrap_or_default()))
                })
        });
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{:>2}] {name}: {} ({:.1} s)", i + 1, verdict.detail, took.as_secs_f64());
        failed += !verdict.pass as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
