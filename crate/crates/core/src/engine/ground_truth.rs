//! The "true" next serving cell, read off the UE's actual future trajectory.

use crate::mobility::Trajectory;
use crate::radio::RadioEnvironment;
use crate::topology::{Deployment, EnbId};

/// Follows `trajectory` from `decision_index` until the UE first leaves the
/// coverage circle of `serving` (or the trajectory ends) and returns the
/// strongest other eNB at that point, ties to the lowest id.
///
/// Returns `None` when the deployment has no other eNB or the index is past
/// the end of the trajectory.
pub fn ground_truth_next_cell(
    deployment: &Deployment,
    radio: &RadioEnvironment,
    trajectory: &Trajectory,
    decision_index: usize,
    serving: EnbId,
) -> Option<EnbId> {
    let enb = deployment.enbs().get(serving.index())?;
    let future = trajectory.points.get(decision_index..)?;
    let exit = future
        .iter()
        .find(|p| p.distance(enb.center) > enb.coverage_radius)
        .or(future.last())?;
    let others = deployment.enbs().iter().map(|e| e.id).filter(|&id| id != serving);
    radio.strongest_of(deployment, others, *exit)
}
