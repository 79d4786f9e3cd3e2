use std::collections::{BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geo::LocalClock;
use super::trace::Trace;
use crate::error::{Error, Result};

/// How day groups are divided between the query half and the reference half.
///
/// Days are the distinct local calendar days present in the dataset, numbered
/// from 1 in chronological order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SplitStrategy {
    /// Odd days to Q, even days to D.
    Interleaved,
    /// `q_days` days sampled with `seed` go to Q.
    Random { seed: u64, q_days: usize },
    /// The first `q_days` days go to Q.
    Serial { q_days: usize },
    /// Saturdays and Sundays go to Q.
    WeekdayWeekend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitWarning {
    pub object_id: String,
    pub empty_query: bool,
    pub empty_reference: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SplitOutput {
    pub query: Vec<Trace>,
    pub reference: Vec<Trace>,
    /// Objects left with an empty half; they stay in both lists.
    pub warnings: Vec<SplitWarning>,
}

impl SplitOutput {
    pub fn flagged_ids(&self) -> HashSet<&str> {
        self.warnings.iter().map(|w| w.object_id.as_str()).collect()
    }

    /// Halves as used for linking: flagged objects are not queried, and
    /// empty reference traces are dropped.
    pub fn for_linking(&self) -> (Vec<Trace>, Vec<Trace>) {
        let flagged = self.flagged_ids();
        let query = self
            .query
            .iter()
            .filter(|t| !flagged.contains(t.object_id.as_str()))
            .cloned()
            .collect();
        let reference = self.reference.iter().filter(|t| !t.is_empty()).cloned().collect();
        (query, reference)
    }
}

pub fn split_dataset(
    traces: &[Trace],
    strategy: SplitStrategy,
    clock: LocalClock,
) -> Result<SplitOutput> {
    let days: Vec<i64> = traces
        .iter()
        .flat_map(|t| t.points.iter().map(|p| clock.day(p.t)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let query_days: HashSet<i64> = match strategy {
        SplitStrategy::Interleaved => days.iter().copied().step_by(2).collect(),
        SplitStrategy::Serial { q_days } => {
            check_q_days(q_days, days.len())?;
            days[..q_days].iter().copied().collect()
        }
        SplitStrategy::Random { seed, q_days } => {
            check_q_days(q_days, days.len())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::index::sample(&mut rng, days.len(), q_days)
                .into_iter()
                .map(|i| days[i])
                .collect()
        }
        SplitStrategy::WeekdayWeekend => HashSet::new(),
    };

    let to_query = |t: i64| match strategy {
        SplitStrategy::WeekdayWeekend => clock.is_weekend(t),
        _ => query_days.contains(&clock.day(t)),
    };

    let mut out = SplitOutput::default();
    for trace in traces {
        let (q, d): (Vec<_>, Vec<_>) = trace.points.iter().partition(|p| to_query(p.t));
        if q.is_empty() || d.is_empty() {
            out.warnings.push(SplitWarning {
                object_id: trace.object_id.clone(),
                empty_query: q.is_empty(),
                empty_reference: d.is_empty(),
            });
        }
        out.query.push(Trace::new(trace.object_id.clone(), q));
        out.reference.push(Trace::new(trace.object_id.clone(), d));
    }
    Ok(out)
}

fn check_q_days(q_days: usize, total: usize) -> Result<()> {
    if q_days < 1 || q_days >= total {
        return Err(Error::param(format!(
            "q_days must be in [1, {total}) for a dataset with {total} distinct days, got {q_days}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_model::geo::SECONDS_PER_DAY;

    // Local midnight (UTC+8) of 2008-02-04, a Monday.
    const MONDAY: i64 = 1_202_054_400;

    fn daily_trace(id: &str, days: std::ops::Range<i64>) -> Trace {
        let pairs: Vec<(u32, i64)> = days
            .map(|d| ((d % 5) as u32, MONDAY + d * SECONDS_PER_DAY + 3600))
            .collect();
        Trace::from_pairs(id, &pairs)
    }

    fn days_of(t: &Trace, clock: LocalClock) -> Vec<i64> {
        let base = clock.day(MONDAY);
        t.points.iter().map(|p| clock.day(p.t) - base + 1).collect()
    }

    #[test]
    fn monday_constant_is_monday() {
        let clock = LocalClock::default();
        assert_eq!(clock.seconds_of_day(MONDAY), 0);
        assert_eq!(clock.weekday(MONDAY), 0);
    }

    #[test]
    fn interleaved_odd_even() {
        let clock = LocalClock::default();
        let out = split_dataset(&[daily_trace("a", 0..4)], SplitStrategy::Interleaved, clock).unwrap();
        assert_eq!(days_of(&out.query[0], clock), vec![1, 3]);
        assert_eq!(days_of(&out.reference[0], clock), vec![2, 4]);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn serial_first_days() {
        let clock = LocalClock::default();
        let out = split_dataset(
            &[daily_trace("a", 0..30)],
            SplitStrategy::Serial { q_days: 15 },
            clock,
        )
        .unwrap();
        assert_eq!(days_of(&out.query[0], clock), (1..=15).collect::<Vec<_>>());
        assert_eq!(days_of(&out.reference[0], clock), (16..=30).collect::<Vec<_>>());
    }

    #[test]
    fn random_is_deterministic() {
        let clock = LocalClock::default();
        let traces = vec![daily_trace("a", 0..30), daily_trace("b", 3..20)];
        let s = SplitStrategy::Random { seed: 42, q_days: 15 };
        let a = split_dataset(&traces, s, clock).unwrap();
        let b = split_dataset(&traces, s, clock).unwrap();
        assert_eq!(a.query, b.query);
        assert_eq!(a.reference, b.reference);
        assert_eq!(a.query[0].len(), 15);
    }

    #[test]
    fn weekend_goes_to_query() {
        let clock = LocalClock::default();
        let out = split_dataset(&[daily_trace("a", 0..14)], SplitStrategy::WeekdayWeekend, clock).unwrap();
        assert_eq!(days_of(&out.query[0], clock), vec![6, 7, 13, 14]);
        assert_eq!(out.reference[0].len(), 10);
    }

    #[test]
    fn q_days_bounds() {
        let clock = LocalClock::default();
        let traces = [daily_trace("a", 0..4)];
        assert!(split_dataset(&traces, SplitStrategy::Serial { q_days: 0 }, clock).is_err());
        assert!(split_dataset(&traces, SplitStrategy::Serial { q_days: 4 }, clock).is_err());
        assert!(split_dataset(&traces, SplitStrategy::Random { seed: 1, q_days: 4 }, clock).is_err());
    }

    #[test]
    fn flagged_objects_are_not_queried() {
        let traces = vec![
            Trace::from_pairs("a", &[(0, 0), (1, SECONDS_PER_DAY)]),
            Trace::from_pairs("b", &[(0, 0), (1, 10)]),
        ];
        let s = split_dataset(&traces, SplitStrategy::Interleaved, LocalClock::new(0.0)).unwrap();
        let (q, d) = s.for_linking();
        assert_eq!(q.iter().map(|t| t.object_id.as_str()).collect::<Vec<_>>(), ["a"]);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn single_day_object_is_flagged() {
        let clock = LocalClock::default();
        let traces = vec![daily_trace("a", 0..4), daily_trace("b", 1..2)];
        let out = split_dataset(&traces, SplitStrategy::Interleaved, clock).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert_eq!(out.warnings[0].object_id, "b");
        assert!(out.warnings[0].empty_query);
        assert_eq!(out.query.len(), 2);
    }
}
