use serde::{Deserialize, Serialize};

use super::emd::transport_cost;
use crate::error::{Error, Result};
use crate::trace_model::{LocalClock, Trace};

/// Number of bins per day for an interval width; `dt_hours` must divide 24.
pub fn bins_for(dt_hours: f64) -> Result<u32> {
    if dt_hours.is_nan() || dt_hours <= 0.0 || dt_hours > 24.0 {
        return Err(Error::param(format!(
            "time interval must be in (0, 24] hours, got {dt_hours}"
        )));
    }
    let bins = 24.0 / dt_hours;
    if (bins - bins.round()).abs() > 1e-9 {
        return Err(Error::param(format!(
            "time interval {dt_hours}h does not divide 24 hours"
        )));
    }
    Ok(bins.round() as u32)
}

/// Half-open bin index of a time of day.
pub(crate) fn bin_of(seconds_of_day: i64, dt_hours: f64) -> u32 {
    let width = (dt_hours * 3600.0).round() as i64;
    (seconds_of_day / width) as u32
}

/// Time-of-day histogram with equal-width bins covering one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalHistogram {
    pub bins: Vec<f64>,
    pub dt_hours: f64,
    pub normalized: bool,
}

impl TemporalHistogram {
    /// L1-normalized histogram from raw masses.
    pub fn from_masses(masses: Vec<f64>, dt_hours: f64) -> Result<Self> {
        let d = bins_for(dt_hours)?;
        if masses.len() != d as usize {
            return Err(Error::HistogramMismatch(format!(
                "{} masses for {d} bins",
                masses.len()
            )));
        }
        if masses.iter().any(|&m| m.is_nan() || m < 0.0) {
            return Err(Error::param("histogram masses must be non-negative"));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyTrace);
        }
        Ok(TemporalHistogram {
            bins: masses.into_iter().map(|m| m / total).collect(),
            dt_hours,
            normalized: true,
        })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

pub fn build_temporal_histogram(
    trace: &Trace,
    dt_hours: f64,
    clock: LocalClock,
) -> Result<TemporalHistogram> {
    let d = bins_for(dt_hours)?;
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut masses = vec![0.0; d as usize];
    for p in &trace.points {
        masses[bin_of(clock.seconds_of_day(p.t), dt_hours) as usize] += 1.0;
    }
    TemporalHistogram::from_masses(masses, dt_hours)
}

/// Circular time-of-day transport cost between bins, scaled to `[0, 1]`.
pub fn temporal_cost(i: usize, j: usize, dt_hours: f64) -> f64 {
    let gap = i.abs_diff(j) as f64 * dt_hours;
    if gap <= 12.0 {
        gap / 12.0
    } else {
        (24.0 - gap) / 12.0
    }
}

pub fn cost_matrix(d: usize, dt_hours: f64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| temporal_cost(i, j, dt_hours)).collect())
        .collect()
}

/// Earth mover's distance under the circular cost.
pub fn emd(a: &TemporalHistogram, b: &TemporalHistogram) -> Result<f64> {
    if a.bins.len() != b.bins.len() || (a.dt_hours - b.dt_hours).abs() > 1e-12 {
        return Err(Error::HistogramMismatch(format!(
            "{} bins of {}h vs {} bins of {}h",
            a.bins.len(),
            a.dt_hours,
            b.bins.len(),
            b.dt_hours
        )));
    }
    for h in [a, b] {
        let s: f64 = h.bins.iter().sum();
        if !h.normalized || (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized);
        }
    }
    let cost = cost_matrix(a.bins.len(), a.dt_hours);
    Ok(transport_cost(&a.bins, &b.bins, &cost).clamp(0.0, 1.0))
}

/// `1 - emd`, in `[0, 1]`.
pub fn emd_similarity(a: &TemporalHistogram, b: &TemporalHistogram) -> Result<f64> {
    Ok(1.0 - emd(a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(hms: &[(i64, i64)]) -> Trace {
        let pairs: Vec<(u32, i64)> = hms
            .iter()
            .enumerate()
            .map(|(i, &(h, m))| (i as u32, h * 3600 + m * 60))
            .collect();
        Trace::from_pairs("a", &pairs)
    }

    fn one_hot(i: usize, d: usize, dt: f64) -> TemporalHistogram {
        let mut m = vec![0.0; d];
        m[i] = 1.0;
        TemporalHistogram::from_masses(m, dt).unwrap()
    }

    #[test]
    fn all_at_half_past_midnight() {
        let h = build_temporal_histogram(&at(&[(0, 30), (0, 30)]), 1.0, LocalClock::new(0.0)).unwrap();
        assert_eq!(h.bins[0], 1.0);
        assert!(h.bins[1..].iter().all(|&b| b == 0.0));
        assert_eq!(h.len(), 24);
    }

    #[test]
    fn two_halves_of_day() {
        let t = at(&[(1, 30), (1, 30), (13, 30), (13, 30)]);
        let h = build_temporal_histogram(&t, 12.0, LocalClock::new(0.0)).unwrap();
        assert_eq!(h.bins, vec![0.5, 0.5]);
    }

    #[test]
    fn noon_lands_in_second_bin() {
        let h = build_temporal_histogram(&at(&[(12, 0)]), 12.0, LocalClock::new(0.0)).unwrap();
        assert_eq!(h.bins, vec![0.0, 1.0]);
    }

    #[test]
    fn local_offset_shifts_bins() {
        // 16:30 UTC is 00:30 at UTC+8.
        let h = build_temporal_histogram(&at(&[(16, 30)]), 1.0, LocalClock::new(8.0)).unwrap();
        assert_eq!(h.bins[0], 1.0);
    }

    #[test]
    fn dt_must_divide_day() {
        assert!(bins_for(5.0).is_err());
        assert!(bins_for(0.0).is_err());
        assert_eq!(bins_for(0.5).unwrap(), 48);
        assert!(build_temporal_histogram(&at(&[(1, 0)]), 7.0, LocalClock::default()).is_err());
    }

    #[test]
    fn cost_values() {
        assert_eq!(temporal_cost(3, 3, 1.0), 0.0);
        assert_eq!(temporal_cost(0, 12, 1.0), 1.0);
        assert!((temporal_cost(0, 23, 1.0) - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(temporal_cost(23, 0, 1.0), temporal_cost(0, 23, 1.0));
    }

    #[test]
    fn emd_examples() {
        let a = one_hot(0, 24, 1.0);
        assert_eq!(emd_similarity(&a, &a).unwrap(), 1.0);
        let b = one_hot(12, 24, 1.0);
        assert!(emd_similarity(&a, &b).unwrap().abs() < 1e-12);
        let c = one_hot(23, 24, 1.0);
        assert!((emd_similarity(&a, &c).unwrap() - (1.0 - 1.0 / 12.0)).abs() < 1e-12);
    }

    #[test]
    fn emd_rejects_mismatch() {
        let a = one_hot(0, 24, 1.0);
        let b = one_hot(0, 12, 2.0);
        assert!(matches!(emd(&a, &b), Err(Error::HistogramMismatch(_))));
        let mut c = one_hot(0, 24, 1.0);
        c.bins[1] = 0.5;
        assert!(matches!(emd(&a, &c), Err(Error::NotNormalized)));
    }
}
