//! Group decisions and their error against full participation.

use crate::delegation::WeightVector;
use crate::network::{ActiveSet, TrustNetwork};
use crate::Error;

/// Allowed gap between the weight total and the population size.
pub const CONSERVATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionReport {
    pub group_decision: f64,
    pub expected_decision: f64,
    pub weighted_group_decision: Option<f64>,
    pub error_traditional: f64,
    pub error_weighted: Option<f64>,
}

/// Plain mean of the active members' opinions.
pub fn group_decision(network: &TrustNetwork, active: &ActiveSet) -> Result<f64, Error> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let sum: f64 = active.members().iter().map(|&m| network.opinion(m)).sum();
    Ok(sum / active.len() as f64)
}

/// Mean opinion of the whole population.
pub fn expected_decision(network: &TrustNetwork) -> f64 {
    let sum: f64 = network.opinions().iter().sum();
    sum / network.len() as f64
}

/// `(1/N) * sum_p weight(p) * opinion(p)` over the active members.
///
/// Divides by the population size, not the weight total, so the weights
/// must cover exactly the active set and sum to `N` within
/// [`CONSERVATION_TOLERANCE`].
pub fn weighted_group_decision(
    network: &TrustNetwork,
    active: &ActiveSet,
    weights: &WeightVector,
) -> Result<f64, Error> {
    if weights.len() != active.len()
        || weights.iter().zip(active.members()).any(|((id, _), m)| id != *m)
    {
        return Err(Error::WeightMismatch);
    }
    let n = network.len() as f64;
    let total = weights.total();
    if !((total - n).abs() <= CONSERVATION_TOLERANCE) {
        return Err(Error::ConservationViolated { total, expected: n });
    }
    let sum: f64 = weights.iter().map(|(id, w)| w * network.opinion(id)).sum();
    Ok(sum / n)
}

pub fn decision_error(outcome: f64, expected: f64) -> f64 {
    (outcome - expected).abs()
}

/// Evaluates both decision methods; the weighted fields are filled only
/// when `weights` is given.
pub fn evaluate(
    network: &TrustNetwork,
    active: &ActiveSet,
    weights: Option<&WeightVector>,
) -> Result<DecisionReport, Error> {
    let group = group_decision(network, active)?;
    let expected = expected_decision(network);
    let weighted = weights.map(|w| weighted_group_decision(network, active, w)).transpose()?;
    Ok(DecisionReport {
        group_decision: group,
        expected_decision: expected,
        weighted_group_decision: weighted,
        error_traditional: decision_error(group, expected),
        error_weighted: weighted.map(|w| decision_error(w, expected)),
    })
}
