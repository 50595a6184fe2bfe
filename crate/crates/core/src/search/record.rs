use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::SearchError;
use crate::exposure::ExposureField;

use super::{obj_acc, obj_bin, path_counts, Algorithm, Plan, PlannerSpec, DEFAULT_P_SUCCESS};

/// Serializable summary of one planner run.
///
/// `obj_acc` is evaluated with the run's own `tau` and `p_success`; planners
/// without those parameters are scored at `tau = 1` and the default
/// `p_success`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub algorithm: Algorithm,
    pub tau: Option<u32>,
    pub p_success: Option<f64>,
    pub m: Option<f64>,
    pub start: usize,
    pub goal: usize,
    pub path: Vec<usize>,
    pub obj_bin: usize,
    pub obj_acc: f64,
    pub expanded: usize,
    pub duration_ns: u64,
}

impl PlanRecord {
    pub fn new(
        field: &ExposureField,
        spec: &PlannerSpec,
        plan: &Plan,
        duration: Duration,
    ) -> Result<Self, SearchError> {
        let (tau, p_success, m) = match spec {
            PlannerSpec::Saturation(p) => (Some(p.tau), Some(p.p_success), None),
            PlannerSpec::Binary(p) => (None, None, Some(p.resolve(field.len())?)),
            _ => (None, None, None),
        };
        let regions = plan.path.regions();
        let counts = path_counts(field, regions, tau.unwrap_or(1))?;
        Ok(Self {
            algorithm: spec.algorithm(),
            tau,
            p_success,
            m,
            start: plan.path.start(),
            goal: plan.path.goal(),
            path: regions.to_vec(),
            obj_bin: obj_bin(field, regions)?,
            obj_acc: obj_acc(&counts, p_success.unwrap_or(DEFAULT_P_SUCCESS), tau.unwrap_or(1))?,
            expanded: plan.expanded,
            duration_ns: u64::try_from(duration.as_nanos()).unwrap_or(u64::MAX),
        })
    }
}
