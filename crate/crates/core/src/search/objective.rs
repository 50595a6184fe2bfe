use crate::bitset::RegionSet;
use crate::error::SearchError;
use crate::exposure::ExposureField;

/// Binary exposure: the number of regions that see any step of the path.
pub fn obj_bin(field: &ExposureField, regions: &[usize]) -> Result<usize, SearchError> {
    if regions.is_empty() {
        return Err(SearchError::EmptyPath);
    }
    check_regions(field, regions)?;
    Ok(field.exposed_by(regions.iter().copied()).count())
}

pub(crate) fn check_saturation(tau: u32, p_success: f64) -> Result<(), SearchError> {
    if !(p_success > 0.0 && p_success < 1.0) {
        return Err(SearchError::Parameter(format!(
            "p_success must lie strictly between 0 and 1, got {p_success}"
        )));
    }
    if tau == 0 || tau > u32::from(u16::MAX) {
        return Err(SearchError::Parameter(format!(
            "saturation threshold must be in 1..={}, got {tau}",
            u16::MAX
        )));
    }
    Ok(())
}

/// `−log10(max(p^c, p^τ))`, evaluated in the log domain.
#[inline]
pub(crate) fn risk_term(count: u64, tau: u32, log_p: f64) -> f64 {
    -(count as f64 * log_p).max(f64::from(tau) * log_p)
}

/// Accumulative exposure: summed log-probability of failure over every
/// region, where each region stops contributing after `tau` sightings.
pub fn obj_acc<C: Copy + Into<u64>>(counts: &[C], p_success: f64, tau: u32) -> Result<f64, SearchError> {
    if !(p_success > 0.0 && p_success < 1.0) {
        return Err(SearchError::Parameter(format!(
            "p_success must lie strictly between 0 and 1, got {p_success}"
        )));
    }
    if tau == 0 {
        return Err(SearchError::Parameter("saturation threshold must be at least 1".into()));
    }
    let log_p = p_success.log10();
    Ok(counts.iter().map(|&c| risk_term(c.into(), tau, log_p)).sum())
}

/// Exposure counts accumulated along a path. The first region seeds a count
/// of one for everything it sees; each occupied region is set to `tau`
/// sightings instead of one.
pub fn path_counts(field: &ExposureField, regions: &[usize], tau: u32) -> Result<Vec<u32>, SearchError> {
    if regions.is_empty() {
        return Err(SearchError::EmptyPath);
    }
    check_regions(field, regions)?;
    let mut counts = vec![0u32; field.len()];
    for &r in regions {
        for i in field.row(r).iter() {
            counts[i] = counts[i].saturating_add(if i == r { tau } else { 1 });
        }
    }
    Ok(counts)
}

/// Counts of the saturation search root at `start`.
pub fn saturation_root_counts(field: &ExposureField, start: usize, tau: u32) -> Vec<u16> {
    let mut counts = vec![0u16; field.len()];
    add_sightings(field, &mut counts, start, tau);
    counts
}

/// Counts after moving from a node with `parent` counts into `region`.
pub fn saturation_child_counts(field: &ExposureField, parent: &[u16], region: usize, tau: u32) -> Vec<u16> {
    let mut counts = parent.to_vec();
    add_sightings(field, &mut counts, region, tau);
    counts
}

fn add_sightings(field: &ExposureField, counts: &mut [u16], region: usize, tau: u32) {
    let tau = u16::try_from(tau).unwrap_or(u16::MAX);
    for i in field.row(region).iter() {
        let inc = if i == region { tau } else { 1 };
        counts[i] = counts[i].saturating_add(inc);
    }
}

/// `obj_acc(child) − obj_acc(parent)` for a move into `region`, summed over
/// the regions whose counts change.
pub fn saturation_transition_cost(
    field: &ExposureField,
    parent: &[u16],
    region: usize,
    tau: u32,
    p_success: f64,
) -> f64 {
    let log_p = p_success.log10();
    let tau16 = u16::try_from(tau).unwrap_or(u16::MAX);
    field
        .row(region)
        .iter()
        .map(|i| {
            let before = parent[i];
            let after = before.saturating_add(if i == region { tau16 } else { 1 });
            risk_term(after.into(), tau, log_p) - risk_term(before.into(), tau, log_p)
        })
        .sum()
}

/// New regions exposed by moving into `region`, plus the movement cost `m`.
pub fn binary_transition_cost(field: &ExposureField, exposed: &RegionSet, region: usize, m: f64) -> f64 {
    field.row(region).difference_count(exposed) as f64 + m
}

fn check_regions(field: &ExposureField, regions: &[usize]) -> Result<(), SearchError> {
    match regions.iter().find(|&&r| r >= field.len()) {
        Some(&index) => Err(SearchError::RegionOutOfRange { index, n: field.len() }),
        None => Ok(()),
    }
}
