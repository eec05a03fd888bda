use rayon::prelude::*;
use sandwich::divergence::{
    closed_form_optimizer, integral_representation_check, optimizer_distance, petz_renyi,
    relative_entropy, sandwiched_renyi, variational_value, OptimizerConfig, RenyiOrder,
};
use sandwich::equality::{build_recoverable_triple, default_beta_grid, full_report, ResidualReport};
use sandwich::linalg::{ComplexMatrix, MatrixJson};
use sandwich::quadrature::QuadratureConfig;
use sandwich::random::{random_channel, random_density, random_positive, trial_rng};
use sandwich::{DensityMatrix, KrausChannel, C64};
use serde::{Deserialize, Serialize};

use crate::config::{ChannelChoice, ExperimentConfig, Scenario, Tolerances};
use crate::error::CliError;
use crate::output::ScanRow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: Scenario,
    pub seed: u64,
    pub rows: usize,
    pub errors: usize,
    /// Rows that violate a tolerance of their scenario.
    pub violations: usize,
    /// `max(0, −dpi_gap)` over all rows.
    pub max_dpi_violation: f64,
    /// Largest residual on rows expected to saturate.
    pub max_saturation_residual: Option<f64>,
    pub max_variational_gap: Option<f64>,
    pub max_integral_err: Option<f64>,
    pub tolerances: Tolerances,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
    pub summary: Summary,
}

/// Runs the configured scenario. Trials run in parallel, each with its own
/// random stream derived from `(seed, trial)`; rows come back ordered by
/// trial and then by `α`.
pub fn run(cfg: &ExperimentConfig) -> Result<ScanOutcome, CliError> {
    cfg.validate()?;
    let fixed = fixed_states(cfg)?;
    let trials = if fixed.is_some() { 1 } else { cfg.trials };
    let rows: Vec<ScanRow> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial, fixed.as_ref()))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summary = summarize(cfg, &rows);
    Ok(ScanOutcome { rows, summary })
}

fn fixed_states(cfg: &ExperimentConfig) -> Result<Option<(DensityMatrix, DensityMatrix)>, CliError> {
    let (Some(r), Some(s)) = (&cfg.rho, &cfg.sigma) else { return Ok(None) };
    if cfg.scenario != Scenario::Divergence {
        return Err(CliError::Config("rho/sigma are only used by the divergence scenario".into()));
    }
    let load = |m: &MatrixJson, name: &str| -> Result<DensityMatrix, CliError> {
        let mat = ComplexMatrix::try_from(m).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        DensityMatrix::new(mat).map_err(|e| CliError::Config(format!("{name}: {e}")))
    };
    let (rho, sigma) = (load(r, "rho")?, load(s, "sigma")?);
    if rho.dim() != sigma.dim() {
        return Err(CliError::Config("rho and sigma have different dimensions".into()));
    }
    Ok(Some((rho, sigma)))
}

fn run_trial(cfg: &ExperimentConfig, trial: u64, fixed: Option<&(DensityMatrix, DensityMatrix)>) -> Vec<ScanRow> {
    let result = match cfg.scenario {
        Scenario::Divergence => divergence_trial(cfg, trial, fixed),
        Scenario::DpiScan => dpi_trial(cfg, trial),
        Scenario::EqualityScan => equality_trial(cfg, trial),
        Scenario::RecoveryTest => recovery_trial(cfg, trial),
        Scenario::VariationalCheck => variational_trial(cfg, trial),
        Scenario::IntegralCheck => integral_trial(cfg, trial),
    };
    // a failure before any α was reached is reported on every α
    result.unwrap_or_else(|e| cfg.alpha_grid.iter().map(|&a| ScanRow::failed(trial, a, &e)).collect())
}

/// Evaluates `f` at each `α` of the grid, turning errors into flagged rows.
fn per_alpha<F>(cfg: &ExperimentConfig, trial: u64, f: F) -> Vec<ScanRow>
where
    F: Fn(RenyiOrder) -> sandwich::Result<ScanRow>,
{
    cfg.alpha_grid
        .iter()
        .map(|&a| {
            RenyiOrder::new(a)
                .and_then(&f)
                .map(|row| ScanRow { trial, alpha: a, ..row })
                .unwrap_or_else(|e| ScanRow::failed(trial, a, e))
        })
        .collect()
}

fn divergence_trial(
    cfg: &ExperimentConfig,
    trial: u64,
    fixed: Option<&(DensityMatrix, DensityMatrix)>,
) -> sandwich::Result<Vec<ScanRow>> {
    let (rho, sigma) = match fixed {
        Some((r, s)) => (r.clone(), s.clone()),
        None => {
            let mut rng = trial_rng(cfg.seed, trial);
            (random_density(cfg.dims.0, &mut rng)?, random_density(cfg.dims.0, &mut rng)?)
        }
    };
    let d_rel = relative_entropy(&rho, &sigma)?;
    Ok(per_alpha(cfg, trial, |ord| {
        Ok(ScanRow {
            d_sand: Some(sandwiched_renyi(&rho, &sigma, ord)?),
            d_petz: Some(petz_renyi(&rho, &sigma, ord)?),
            d_rel: Some(d_rel),
            dpi_ok: true,
            ..Default::default()
        })
    }))
}

fn channel_for(cfg: &ExperimentConfig, trial: u64, rng: &mut impl rand::Rng) -> sandwich::Result<KrausChannel> {
    let (d_a, d_b) = cfg.dims;
    let random = match cfg.channel {
        ChannelChoice::PartialTrace => false,
        ChannelChoice::RandomKraus => true,
        ChannelChoice::Mixed => trial % 2 == 1,
    };
    if random {
        random_channel(d_a * d_b, d_a, d_b, rng)
    } else {
        Ok(KrausChannel::partial_trace(d_a, d_b))
    }
}

fn generic_triple(cfg: &ExperimentConfig, trial: u64) -> sandwich::Result<(DensityMatrix, DensityMatrix, KrausChannel)> {
    let mut rng = trial_rng(cfg.seed, trial);
    let n = cfg.dims.0 * cfg.dims.1;
    let rho = random_density(n, &mut rng)?;
    let sigma = random_density(n, &mut rng)?;
    let ch = channel_for(cfg, trial, &mut rng)?;
    Ok((rho, sigma, ch))
}

fn dpi_trial(cfg: &ExperimentConfig, trial: u64) -> sandwich::Result<Vec<ScanRow>> {
    let (rho, sigma, ch) = generic_triple(cfg, trial)?;
    let (lr, ls) = (ch.apply_state(&rho)?, ch.apply_state(&sigma)?);
    let d_rel = relative_entropy(&rho, &sigma)?;
    let tol = cfg.tolerances.dpi;
    Ok(per_alpha(cfg, trial, |ord| {
        let d_sand = sandwiched_renyi(&rho, &sigma, ord)?;
        let gap = d_sand - sandwiched_renyi(&lr, &ls, ord)?;
        Ok(ScanRow {
            d_sand: Some(d_sand),
            d_petz: Some(petz_renyi(&rho, &sigma, ord)?),
            d_rel: Some(d_rel),
            dpi_gap: Some(gap),
            dpi_ok: gap >= -tol,
            saturated: gap.abs() <= tol,
            ..Default::default()
        })
    }))
}

fn beta_grid(cfg: &ExperimentConfig, alpha: f64) -> Vec<C64> {
    if cfg.beta_grid.is_empty() {
        default_beta_grid(alpha)
    } else {
        cfg.beta_grid.clone()
    }
}

fn report_row(rep: &ResidualReport, d_sand: f64, tol: &Tolerances) -> ScanRow {
    let beta = rep.t3_argmax();
    ScanRow {
        beta_re: beta.map(|b| b.re),
        beta_im: beta.map(|b| b.im),
        d_sand: Some(d_sand),
        dpi_gap: Some(rep.dpi_gap),
        t1: Some(rep.t1),
        t1_geo: rep.t1_geo,
        t3: Some(rep.t3_max()),
        petz_beta: rep.petz_beta_max(),
        necessary2: Some(rep.necessary2),
        commutator: rep.commutator,
        recovery_err: Some(rep.recovery_err),
        dpi_ok: rep.dpi_gap >= -tol.dpi,
        saturated: rep.dpi_gap <= tol.dpi
            && rep.recovery_err <= tol.saturation
            && rep.max_equality_residual() <= tol.saturation,
        ..Default::default()
    }
}

fn equality_trial(cfg: &ExperimentConfig, trial: u64) -> sandwich::Result<Vec<ScanRow>> {
    let (rho, sigma, ch) = generic_triple(cfg, trial)?;
    Ok(per_alpha(cfg, trial, |ord| {
        let rep = full_report(&rho, &sigma, &ch, ord, &beta_grid(cfg, ord.alpha()))?;
        Ok(report_row(&rep, sandwiched_renyi(&rho, &sigma, ord)?, &cfg.tolerances))
    }))
}

fn recovery_trial(cfg: &ExperimentConfig, trial: u64) -> sandwich::Result<Vec<ScanRow>> {
    let mut rng = trial_rng(cfg.seed, trial);
    let triple = build_recoverable_triple(cfg.triple_kind, cfg.dims, &mut rng)?;
    let ch = triple.channel();
    Ok(per_alpha(cfg, trial, |ord| {
        let rep = full_report(&triple.rho_ab, &triple.sigma_ab, &ch, ord, &beta_grid(cfg, ord.alpha()))?;
        Ok(report_row(&rep, sandwiched_renyi(&triple.rho_ab, &triple.sigma_ab, ord)?, &cfg.tolerances))
    }))
}

fn variational_trial(cfg: &ExperimentConfig, trial: u64) -> sandwich::Result<Vec<ScanRow>> {
    let mut rng = trial_rng(cfg.seed, trial);
    let d = cfg.dims.0;
    let rho = random_density(d, &mut rng)?;
    let sigma = random_density(d, &mut rng)?;
    let opt_cfg = OptimizerConfig { seed: cfg.seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15), ..cfg.optimizer };
    Ok(per_alpha(cfg, trial, |ord| {
        let closed = closed_form_optimizer(&rho, &sigma, ord)?;
        let var = variational_value(&rho, &sigma, ord, &opt_cfg)?;
        let gap = (var.value - closed.value).abs();
        let dist = optimizer_distance(&var.omega_hat, &closed);
        Ok(ScanRow {
            d_sand: Some(sandwiched_renyi(&rho, &sigma, ord)?),
            variational_gap: Some(gap),
            omega_trace_dist: Some(dist),
            dpi_ok: true,
            saturated: gap <= cfg.tolerances.variational_value && dist <= cfg.tolerances.variational_distance,
            ..Default::default()
        })
    }))
}

fn integral_trial(cfg: &ExperimentConfig, trial: u64) -> sandwich::Result<Vec<ScanRow>> {
    let mut rng = trial_rng(cfg.seed, trial);
    let m = random_positive(cfg.dims.0, &mut rng);
    let quad = QuadratureConfig { nodes: cfg.quadrature_nodes };
    Ok(per_alpha(cfg, trial, |ord| {
        let err = integral_representation_check(&m, ord.alpha(), &quad)?;
        Ok(ScanRow {
            integral_err: Some(err),
            dpi_ok: true,
            saturated: err <= cfg.tolerances.integral,
            ..Default::default()
        })
    }))
}

/// Whether a successful row meets the tolerances of its scenario.
fn row_passes(cfg: &ExperimentConfig, row: &ScanRow) -> bool {
    let tol = &cfg.tolerances;
    match cfg.scenario {
        Scenario::Divergence => true,
        Scenario::DpiScan => row.dpi_ok,
        Scenario::EqualityScan => {
            let gap = row.dpi_gap.unwrap_or(0.0);
            let t3 = row.t3.unwrap_or(0.0);
            // co-positivity: a clear gap and a clear residual come together
            row.dpi_ok && (gap > tol.copositivity_gap) == (t3 > tol.copositivity_residual)
        }
        Scenario::RecoveryTest | Scenario::VariationalCheck | Scenario::IntegralCheck => row.saturated,
    }
}

fn fold_max(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, v| Some(acc.map_or(v, |m: f64| m.max(v))))
}

pub fn summarize(cfg: &ExperimentConfig, rows: &[ScanRow]) -> Summary {
    let ok_rows = || rows.iter().filter(|r| r.error.is_none());
    let errors = rows.len() - ok_rows().count();
    let violations = ok_rows().filter(|r| !row_passes(cfg, r)).count();
    let max_dpi_violation = ok_rows().filter_map(|r| r.dpi_gap).fold(0.0_f64, |m, g| m.max(-g));
    let max_saturation_residual = if cfg.scenario == Scenario::RecoveryTest {
        fold_max(ok_rows().flat_map(|r| {
            [r.dpi_gap, r.t1, r.t1_geo, r.t3, r.petz_beta, r.necessary2, r.commutator, r.recovery_err]
                .into_iter()
                .flatten()
                .map(f64::abs)
        }))
    } else {
        None
    };
    Summary {
        scenario: cfg.scenario,
        seed: cfg.seed,
        rows: rows.len(),
        errors,
        violations,
        max_dpi_violation,
        max_saturation_residual,
        max_variational_gap: fold_max(ok_rows().filter_map(|r| r.variational_gap)),
        max_integral_err: fold_max(ok_rows().filter_map(|r| r.integral_err)),
        tolerances: cfg.tolerances,
        pass: errors == 0 && violations == 0,
    }
}
