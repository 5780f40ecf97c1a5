//! Single Metropolis–Hastings updates of the parameter chain.
//!
//! Every step proposes `theta'`, rejects immediately when the prior vanishes
//! there (no exact sample is drawn), otherwise draws the auxiliary variables
//! and accepts with probability `min(1, a)`. A uniform is consumed only when
//! `log a < 0`.

use rand::Rng;

use super::proposal::Proposal;
use super::{AcceptanceRecord, Counters};
use crate::error::Result;
use crate::model::{bridge_log_f, BridgeSchedule, LogNormalizer, Model, ParamPoint, Work};

pub(crate) fn accept<R: Rng + ?Sized>(log_a: f64, rng: &mut R) -> bool {
    if log_a >= 0.0 {
        return true;
    }
    // u in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    u.ln() < log_a
}

/// `[log f(y; theta') + log p(theta')] - [log f(y; theta) + log p(theta)]`.
fn target_term<M: Model + ?Sized>(model: &M, theta: &ParamPoint, proposed: &ParamPoint) -> f64 {
    let y = model.observed();
    (model.log_f(y, proposed) + model.log_prior(proposed))
        - (model.log_f(y, theta) + model.log_prior(theta))
}

fn prior_rejection(proposed: ParamPoint, counters: &mut Counters) -> AcceptanceRecord {
    counters.prior_rejections += 1;
    AcceptanceRecord {
        proposed,
        log_accept_ratio: f64::NEG_INFINITY,
        accepted: false,
        prior_rejected: true,
        target_term: f64::NEG_INFINITY,
        proposal_term: 0.0,
        auxiliary_term: 0.0,
    }
}

fn finish<R: Rng + ?Sized>(
    proposed: ParamPoint,
    target: f64,
    proposal: f64,
    aux: f64,
    rng: &mut R,
) -> AcceptanceRecord {
    let log_a = (target + proposal) + aux;
    let accepted = accept(log_a, rng);
    AcceptanceRecord {
        proposed,
        log_accept_ratio: log_a,
        accepted,
        prior_rejected: false,
        target_term: target,
        proposal_term: proposal,
        auxiliary_term: aux,
    }
}

fn exact_draw<M: Model + ?Sized, R: Rng + ?Sized>(
    model: &M,
    theta: &ParamPoint,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<M::State> {
    let mut work = Work::default();
    let draw = model.exact_sample(theta, rng, &mut work);
    counters.gibbs_updates += work.gibbs_updates;
    counters.exact_samples += 1;
    draw
}

fn bridge<M: Model + ?Sized, R: Rng + ?Sized>(
    model: &M,
    x: &M::State,
    theta_a: &ParamPoint,
    theta_b: &ParamPoint,
    beta: f64,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<M::State> {
    let mut work = Work::default();
    let next = model.bridge_transition(x, theta_a, theta_b, beta, rng, &mut work);
    counters.gibbs_updates += work.gibbs_updates;
    counters.bridge_steps += 1;
    next
}

/// Metropolis–Hastings with the true normalizer. Only for models that
/// expose `log Z`.
pub fn exact_z_mh_step<M, P, R>(
    model: &M,
    theta: &mut ParamPoint,
    proposal: &P,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<AcceptanceRecord>
where
    M: LogNormalizer + ?Sized,
    P: Proposal + ?Sized,
    R: Rng + ?Sized,
{
    exact_z_step_with(
        model,
        &|t: &ParamPoint| model.true_log_z(t),
        theta,
        proposal,
        rng,
        counters,
    )
}

pub(crate) fn exact_z_step_with<M, P, R>(
    model: &M,
    log_z: &dyn Fn(&ParamPoint) -> Result<f64>,
    theta: &mut ParamPoint,
    proposal: &P,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<AcceptanceRecord>
where
    M: Model + ?Sized,
    P: Proposal + ?Sized,
    R: Rng + ?Sized,
{
    let proposed = proposal.propose(theta, rng);
    if model.log_prior(&proposed) == f64::NEG_INFINITY {
        return Ok(prior_rejection(proposed, counters));
    }
    let target = target_term(model, theta, &proposed);
    let q = proposal.log_ratio(theta, &proposed);
    let aux = log_z(theta)? - log_z(&proposed)?;
    let record = finish(proposed, target, q, aux, rng);
    if record.accepted {
        *theta = record.proposed.clone();
    }
    Ok(record)
}

/// SAVM chain state: the parameter and the single auxiliary configuration.
#[derive(Clone, Debug)]
pub struct SavmState<S> {
    pub theta: ParamPoint,
    pub aux: S,
}

impl<S> SavmState<S> {
    /// Starts at `theta` with `aux` drawn exactly from `f(.; theta_hat)`.
    pub fn initialize<M, R>(
        model: &M,
        theta: ParamPoint,
        theta_hat: &ParamPoint,
        rng: &mut R,
        counters: &mut Counters,
    ) -> Result<Self>
    where
        M: Model<State = S> + ?Sized,
        R: Rng + ?Sized,
    {
        let mut work = Work::default();
        let aux = model.exact_sample(theta_hat, rng, &mut work)?;
        counters.gibbs_updates += work.gibbs_updates;
        counters.init_exact_samples += 1;
        Ok(SavmState { theta, aux })
    }
}

/// Single auxiliary variable method with `p(x | theta, y) = f(x; theta_hat) / Z(theta_hat)`.
pub fn savm_step<M, P, R>(
    model: &M,
    state: &mut SavmState<M::State>,
    theta_hat: &ParamPoint,
    proposal: &P,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<AcceptanceRecord>
where
    M: Model + ?Sized,
    P: Proposal + ?Sized,
    R: Rng + ?Sized,
{
    let theta = &state.theta;
    let proposed = proposal.propose(theta, rng);
    if model.log_prior(&proposed) == f64::NEG_INFINITY {
        return Ok(prior_rejection(proposed, counters));
    }
    let target = target_term(model, theta, &proposed);
    let q = proposal.log_ratio(theta, &proposed);
    let x_new = exact_draw(model, &proposed, rng, counters)?;
    let aux = savm_auxiliary_term(model, theta, &proposed, theta_hat, &state.aux, &x_new);
    let record = finish(proposed, target, q, aux, rng);
    if record.accepted {
        state.theta = record.proposed.clone();
        state.aux = x_new;
    }
    Ok(record)
}

/// `log [f(x'; theta_hat) f(x; theta)] / [f(x; theta_hat) f(x'; theta')]`.
pub fn savm_auxiliary_term<M: Model + ?Sized>(
    model: &M,
    theta: &ParamPoint,
    proposed: &ParamPoint,
    theta_hat: &ParamPoint,
    x: &M::State,
    x_new: &M::State,
) -> f64 {
    (model.log_f(x_new, theta_hat) - model.log_f(x_new, proposed))
        - (model.log_f(x, theta_hat) - model.log_f(x, theta))
}

/// MAVM chain state: the parameter and the ensemble `x_1 .. x_{K+1}`
/// (`ensemble[k]` holds `x_{k+1}`).
#[derive(Clone, Debug)]
pub struct MavmState<S> {
    pub theta: ParamPoint,
    pub ensemble: Vec<S>,
}

impl<S> MavmState<S> {
    /// Draws `x_1` exactly from `f(.; theta_hat)` and moves it forward through
    /// bridging transitions toward `theta`.
    pub fn initialize<M, R>(
        model: &M,
        theta: ParamPoint,
        theta_hat: &ParamPoint,
        schedule: &BridgeSchedule,
        rng: &mut R,
        counters: &mut Counters,
    ) -> Result<Self>
    where
        M: Model<State = S> + ?Sized,
        R: Rng + ?Sized,
    {
        let levels = schedule.levels();
        let mut work = Work::default();
        let mut ensemble = Vec::with_capacity(levels + 1);
        ensemble.push(model.exact_sample(theta_hat, rng, &mut work)?);
        counters.init_exact_samples += 1;
        for k in 1..=levels {
            let next = model.bridge_transition(
                &ensemble[k - 1],
                theta_hat,
                &theta,
                schedule.beta(k),
                rng,
                &mut work,
            )?;
            ensemble.push(next);
        }
        counters.gibbs_updates += work.gibbs_updates;
        Ok(MavmState { theta, ensemble })
    }
}

/// Multiple auxiliary variable method. The proposed ensemble is generated in
/// reverse: `x'_{K+1}` exactly at `theta'`, then `x'_K .. x'_1` by bridging
/// transitions toward `theta_hat`.
pub fn mavm_step<M, P, R>(
    model: &M,
    state: &mut MavmState<M::State>,
    theta_hat: &ParamPoint,
    proposal: &P,
    schedule: &BridgeSchedule,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<AcceptanceRecord>
where
    M: Model + ?Sized,
    P: Proposal + ?Sized,
    R: Rng + ?Sized,
{
    let levels = schedule.levels();
    assert_eq!(
        state.ensemble.len(),
        levels + 1,
        "MAVM ensemble does not match the bridge schedule"
    );
    let theta = &state.theta;
    let proposed = proposal.propose(theta, rng);
    if model.log_prior(&proposed) == f64::NEG_INFINITY {
        return Ok(prior_rejection(proposed, counters));
    }
    let target = target_term(model, theta, &proposed);
    let q = proposal.log_ratio(theta, &proposed);

    // f_k(x; theta', theta_hat) = f(x; theta_hat)^beta_k f(x; theta')^(1 - beta_k)
    let mut slots: Vec<Option<M::State>> = (0..=levels).map(|_| None).collect();
    slots[levels] = Some(exact_draw(model, &proposed, rng, counters)?);
    let mut aux_proposed = 0.0;
    for k in (0..=levels).rev() {
        let x = slots[k].as_ref().expect("generated in reverse order");
        aux_proposed += bridge_log_f(model, x, theta_hat, &proposed, schedule.beta(k))
            - bridge_log_f(model, x, theta_hat, &proposed, schedule.beta(k + 1));
        if k > 0 {
            let next = bridge(
                model,
                x,
                theta_hat,
                &proposed,
                schedule.beta(k),
                rng,
                counters,
            )?;
            slots[k - 1] = Some(next);
        }
    }
    let mut aux_current = 0.0;
    for (k, x) in state.ensemble.iter().enumerate() {
        aux_current += bridge_log_f(model, x, theta_hat, theta, schedule.beta(k + 1))
            - bridge_log_f(model, x, theta_hat, theta, schedule.beta(k));
    }
    let aux = aux_proposed + aux_current;

    let record = finish(proposed, target, q, aux, rng);
    if record.accepted {
        state.theta = record.proposed.clone();
        state.ensemble = slots.into_iter().map(|s| s.expect("filled")).collect();
    }
    Ok(record)
}

/// The exchange algorithm: one exact draw `w` at `theta'` offered to
/// `theta` in exchange for the data.
pub fn exchange_step<M, P, R>(
    model: &M,
    theta: &mut ParamPoint,
    proposal: &P,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<AcceptanceRecord>
where
    M: Model + ?Sized,
    P: Proposal + ?Sized,
    R: Rng + ?Sized,
{
    let proposed = proposal.propose(theta, rng);
    if model.log_prior(&proposed) == f64::NEG_INFINITY {
        return Ok(prior_rejection(proposed, counters));
    }
    let target = target_term(model, theta, &proposed);
    let q = proposal.log_ratio(theta, &proposed);
    let w = exact_draw(model, &proposed, rng, counters)?;
    let aux = model.log_f(&w, theta) - model.log_f(&w, &proposed);
    let record = finish(proposed, target, q, aux, rng);
    check_self_transition(theta, &record);
    if record.accepted {
        *theta = record.proposed.clone();
    }
    Ok(record)
}

/// Exchange with bridging: `x_0` is drawn exactly at `theta'` and moved
/// through `K` reversible transitions toward `theta` before the swap.
pub fn exchange_bridged_step<M, P, R>(
    model: &M,
    theta: &mut ParamPoint,
    proposal: &P,
    schedule: &BridgeSchedule,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<AcceptanceRecord>
where
    M: Model + ?Sized,
    P: Proposal + ?Sized,
    R: Rng + ?Sized,
{
    let levels = schedule.levels();
    let proposed = proposal.propose(theta, rng);
    if model.log_prior(&proposed) == f64::NEG_INFINITY {
        return Ok(prior_rejection(proposed, counters));
    }
    let target = target_term(model, theta, &proposed);
    let q = proposal.log_ratio(theta, &proposed);

    // f_k(x; theta, theta') = f(x; theta')^beta_k f(x; theta)^(1 - beta_k)
    let mut x = exact_draw(model, &proposed, rng, counters)?;
    let mut aux = 0.0;
    for k in 0..=levels {
        aux += bridge_log_f(model, &x, &proposed, theta, schedule.beta(k + 1))
            - bridge_log_f(model, &x, &proposed, theta, schedule.beta(k));
        if k < levels {
            x = bridge(
                model,
                &x,
                &proposed,
                theta,
                schedule.beta(k + 1),
                rng,
                counters,
            )?;
        }
    }
    let record = finish(proposed, target, q, aux, rng);
    check_self_transition(theta, &record);
    if record.accepted {
        *theta = record.proposed.clone();
    }
    Ok(record)
}

/// Every factor of the exchange ratio cancels when `theta' = theta`.
fn check_self_transition(theta: &ParamPoint, record: &AcceptanceRecord) {
    if record.proposed == *theta {
        assert!(
            record.log_accept_ratio == 0.0,
            "exchange self-transition has log a = {}",
            record.log_accept_ratio
        );
    }
}
