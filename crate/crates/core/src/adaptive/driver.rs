use std::path::PathBuf;

use super::{adam_step, estimator_rules, functional_rule, Event, GoalEvaluator, OptimizerState, Sampling, Trace, TraceRow, TrainConfig};
use crate::estimator::{interior_indicators, PreparedEstimator};
use crate::geometry::{augment_points, resample_from_indicator, PointBatch};
use crate::nn::{checkpoint, Network};
use crate::problem::{adjoint_problem, CaseConfig, TrainingLoss};
use crate::rng::{stream, substream};
use crate::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Where event and final checkpoints go; nothing is written if `None`.
    pub checkpoint_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunNets {
    pub u: Network,
    pub z: Option<Network>,
    pub z_prime: Option<Network>,
    /// Adjoint and `z′` epochs spent outside the primal budget.
    pub adjoint_epochs: usize,
    pub z_prime_epochs: usize,
    pub final_interior: PointBatch,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub nets: RunNets,
    pub trace: Trace,
}

/// Full-batch Adam on a fixed loss. Returns the loss entering each epoch.
pub fn train_epochs(net: &mut Network, loss: &TrainingLoss, opt: &mut OptimizerState, epochs: usize) -> Result<Vec<f64>> {
    let mut history = Vec::with_capacity(epochs);
    for e in 0..epochs {
        let (value, grad) = loss.value_and_gradient(net).map_err(|err| err.at_epoch(e))?;
        let mask = net.freeze_mask().to_vec();
        adam_step(net.params_mut(), &grad, opt, &mask).map_err(|err| err.at_epoch(e))?;
        history.push(value);
    }
    Ok(history)
}

fn save(options: &RunOptions, name: &str, net: &Network) -> Result<()> {
    if let Some(dir) = &options.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
        checkpoint::save(net, &dir.join(name))?;
    }
    Ok(())
}

/// Runs any sampling strategy, appending rows to `trace` as it goes so a
/// numerical abort still leaves the rows computed so far.
pub fn run_into(case: &CaseConfig, cfg: &TrainConfig, options: &RunOptions, trace: &mut Trace) -> Result<RunNets> {
    cfg.validate()?;
    let problem = &case.problem;
    let domain = &problem.domain;
    let spec = cfg.net.clone().unwrap_or_else(|| case.net.clone());
    if spec.input_dim != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: spec.input_dim,
        });
    }
    let seed = cfg.seed;

    let mut u = Network::init(spec.clone(), &mut substream(seed, stream::PRIMAL_INIT))?;
    let mut point_rng = substream(seed, stream::PRIMAL_POINTS);
    let mut interior = domain.sample_interior_uniform(cfg.n_interior, &mut point_rng)?;
    let boundary = domain.sample_boundary_uniform(cfg.m_boundary, &mut point_rng)?;

    let adj_problem = adjoint_problem(problem, &case.goal);
    let adj_kind = cfg.adjoint_loss();
    let mut adjoint = None;
    let mut adjoint_epochs = 0;
    if cfg.needs_adjoint() {
        let mut rng = substream(seed, stream::ADJOINT_POINTS);
        let a_in = domain.sample_interior_uniform(cfg.adjoint_n_interior, &mut rng)?;
        let a_bd = domain.sample_boundary_uniform(cfg.adjoint_m_boundary, &mut rng)?;
        let a_loss = TrainingLoss::new(adj_kind, &adj_problem, a_in, a_bd, cfg.lambda, false)?;
        let mut z = Network::init(spec.clone(), &mut substream(seed, stream::ADJOINT_INIT))?;
        let mut opt = OptimizerState::new(z.param_count(), cfg.adam);
        train_epochs(&mut z, &a_loss, &mut opt, cfg.adjoint_pretrain_epochs)?;
        adjoint_epochs = cfg.adjoint_pretrain_epochs;
        log::info!("adjoint trained for {adjoint_epochs} epochs");
        save(options, "z.json", &z)?;
        adjoint = Some((z, a_loss));
    }

    let goal = GoalEvaluator::new(
        problem,
        &case.goal,
        Some(case.j_reference),
        functional_rule(problem, &case.goal, &cfg.quadrature, seed)?,
    );
    let rules = estimator_rules(problem, &cfg.quadrature, seed)?;
    let mut prepared = match &adjoint {
        Some((z, _)) => Some(PreparedEstimator::new(z, None, cfg.lambda, problem, rules.clone())?),
        None => None,
    };

    let weighted = |batch: &PointBatch| cfg.weighted_quadrature && batch.weights().is_some();
    let mut loss = TrainingLoss::new(cfg.mode, problem, interior.clone(), boundary.clone(), cfg.lambda, false)?;
    let mut opt = OptimizerState::new(u.param_count(), cfg.adam);
    let events = cfg.event_epochs();
    let mut z_prime: Option<Network> = None;
    let mut z_prime_epochs = 0;

    for e in 0..cfg.epochs {
        let mut event = Event::None;
        if let Some(k) = events.iter().position(|&ev| ev == e) {
            event = match cfg.sampling {
                Sampling::DwrRefine => Event::Refine,
                _ => Event::Resample,
            };
            let count = match cfg.sampling {
                Sampling::DwrRefine => cfg.refine_count.unwrap_or(0),
                _ => cfg.n_interior,
            };
            if count > 0 {
                let (z, a_loss) = adjoint.as_ref().expect("adaptive runs train an adjoint");
                let mut zp = u.derive_frozen_adjoint();
                let mut zopt = OptimizerState::new(zp.param_count(), cfg.adam);
                train_epochs(&mut zp, a_loss, &mut zopt, cfg.z_prime_train_epochs).map_err(|err| err.at_epoch(e))?;
                z_prime_epochs += cfg.z_prime_train_epochs;

                let mut rng = substream(seed, stream::EVENT_BASE + k as u64);
                let pool = domain.sample_interior_uniform(cfg.pool_factor * count, &mut rng)?;
                let mu = interior_indicators(&u, z, Some(&zp), problem, &pool).map_err(|err| err.at_epoch(e))?;
                let fresh = match resample_from_indicator(&pool, &mu, count, &mut rng) {
                    Ok(batch) => batch,
                    Err(Error::DegenerateDensity) => {
                        log::warn!("epoch {e}: degenerate indicator density, sampling uniformly instead");
                        domain.sample_interior_uniform(count, &mut rng)?
                    }
                    Err(other) => return Err(other),
                };
                interior = match cfg.sampling {
                    Sampling::DwrRefine => augment_points(&interior, &fresh)?,
                    _ => fresh,
                };
                loss = TrainingLoss::new(
                    cfg.mode,
                    problem,
                    interior.clone(),
                    boundary.clone(),
                    cfg.lambda,
                    weighted(&interior),
                )?;
                prepared = Some(PreparedEstimator::new(z, Some(&zp), cfg.lambda, problem, rules.clone())?);
                save(options, &format!("u_epoch{e}.json"), &u)?;
                save(options, &format!("zprime_epoch{e}.json"), &zp)?;
                log::info!("epoch {e}: {event} event, {} interior points", interior.len());
                z_prime = Some(zp);
            }
        }

        let (value, grad) = loss.value_and_gradient(&u).map_err(|err| err.at_epoch(e))?;
        let j_estimate = goal.evaluate(&u).map_err(|err| err.at_epoch(e))?;
        let (mut eta_simple, mut eta_localized) = (None, None);
        if let Some(est) = &prepared {
            if e % cfg.estimator_stride == 0 || event != Event::None || e + 1 == cfg.epochs {
                let report = est.evaluate(&u).map_err(|err| err.at_epoch(e))?;
                eta_simple = Some(report.eta_simple);
                eta_localized = est.has_localized().then_some(report.eta_localized);
            }
        }
        trace.rows.push(TraceRow {
            epoch: e,
            loss: value,
            j_estimate,
            j_error: case.j_reference - j_estimate,
            eta_simple,
            eta_localized,
            points: interior.len(),
            event,
        });
        if e % 500 == 0 {
            log::debug!("epoch {e}: loss {value:e}, J error {:e}", case.j_reference - j_estimate);
        }
        let mask = u.freeze_mask().to_vec();
        adam_step(u.params_mut(), &grad, &mut opt, &mask).map_err(|err| err.at_epoch(e))?;
    }

    save(options, "u_final.json", &u)?;
    if let Some(zp) = &z_prime {
        save(options, "zprime_final.json", zp)?;
    }
    Ok(RunNets {
        u,
        z: adjoint.map(|(z, _)| z),
        z_prime,
        adjoint_epochs,
        z_prime_epochs,
        final_interior: interior,
    })
}

pub fn run(case: &CaseConfig, cfg: &TrainConfig, options: &RunOptions) -> Result<RunOutput> {
    let mut trace = Trace::default();
    let nets = run_into(case, cfg, options, &mut trace)?;
    Ok(RunOutput { nets, trace })
}

fn expect_sampling(cfg: &TrainConfig, want: Sampling) -> Result<()> {
    if cfg.sampling != want {
        return Err(Error::Config(format!("expected sampling {want:?}, got {:?}", cfg.sampling)));
    }
    Ok(())
}

/// Adaptive resampling: replace the interior points at each resample epoch.
pub fn algorithm1_run(case: &CaseConfig, cfg: &TrainConfig, options: &RunOptions) -> Result<RunOutput> {
    expect_sampling(cfg, Sampling::DwrResample)?;
    run(case, cfg, options)
}

/// Adaptive refinement: append indicator-sampled points at fixed intervals.
pub fn refine_run(case: &CaseConfig, cfg: &TrainConfig, options: &RunOptions) -> Result<RunOutput> {
    expect_sampling(cfg, Sampling::DwrRefine)?;
    run(case, cfg, options)
}

/// One uniform point set for the whole budget.
pub fn baseline_run(case: &CaseConfig, cfg: &TrainConfig, options: &RunOptions) -> Result<RunOutput> {
    expect_sampling(cfg, Sampling::Uniform)?;
    run(case, cfg, options)
}
