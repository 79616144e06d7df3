//! Brute-force reference implementations for the test suite.
//!
//! `brute_force_si` enumerates the interval definition directly instead of
//! taking the greedy pass, so agreement between the two is evidence rather
//! than tautology. `check_episode_set` validates episode output against the
//! window, confidence and structure rules without re-deriving the episodes.

use std::collections::BTreeSet;

use crate::fed::{Episode, FedInput, Semantics};
use crate::folding::FoldedSeries;
use crate::sid::{MinConf, SignificantInterval};

/// Enumerate every window over folded points, keep those meeting the
/// threshold and the span cap (`None` for no cap), then discard any kept
/// window that strictly contains another kept window.
pub fn brute_force_si(
    series: &FoldedSeries,
    min_conf: MinConf,
    max_len: Option<u32>,
) -> Vec<SignificantInterval> {
    let points = series.points();
    let n = series.period_count();
    let mut kept = Vec::new();
    for (i, start) in points.iter().enumerate() {
        let mut access_count = 0u64;
        for (j, end) in points.iter().enumerate().skip(i) {
            access_count += u64::from(end.access_count);
            let span = end.time_point - start.time_point;
            let fits = max_len.is_none_or(|cap| span <= cap);
            if fits && min_conf.met(access_count, n) {
                kept.push(SignificantInterval {
                    entity: series.entity().to_string(),
                    start: start.time_point,
                    end: end.time_point,
                    access_count,
                    point_count: (j - i + 1) as u32,
                    period_count: n,
                });
            }
        }
    }
    let minimal: Vec<bool> = kept
        .iter()
        .map(|outer| {
            !kept.iter().any(|inner| {
                inner.start >= outer.start
                    && inner.end <= outer.end
                    && (inner.start, inner.end) != (outer.start, outer.end)
            })
        })
        .collect();
    kept.into_iter()
        .zip(minimal)
        .filter_map(|(interval, keep)| keep.then_some(interval))
        .collect()
}

/// True iff every episode satisfies the window rule of the semantics, the
/// Pattern Confidence rule, the end-point rule, entity distinctness, and
/// the level cap from the input's distinct entity count.
pub fn check_episode_set(
    input: &FedInput,
    window: u32,
    semantics: Semantics,
    episodes: &[Episode],
) -> bool {
    episodes.iter().all(|episode| check_episode(input, window, semantics, episode))
}

fn check_episode(input: &FedInput, window: u32, semantics: Semantics, episode: &Episode) -> bool {
    let members = &episode.members;
    if members.len() < 2 || members.len() > input.distinct_entity_count() {
        return false;
    }
    let mut entities = BTreeSet::new();
    if !members.iter().all(|member| entities.insert(member.entity.as_str())) {
        return false;
    }
    if members.iter().any(|member| member.start > member.end) {
        return false;
    }
    let base = &members[0];
    if episode.start != base.start {
        return false;
    }
    if Some(episode.end) != members.iter().map(|member| member.end).max() {
        return false;
    }
    if Some(episode.pattern_confidence) != members.iter().map(|member| member.confidence).min() {
        return false;
    }
    members[1..].iter().all(|member| {
        let within = |point: u32| {
            point.checked_sub(base.start).is_some_and(|distance| distance <= window)
        };
        within(member.start) && (semantics == Semantics::S || within(member.end))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fed::{one_pass_fed, FedInterval};
    use crate::sid::{one_pass_allsi, one_pass_si};
    use crate::time::{Granularity, Periodicity};
    use num_rational::Ratio;

    fn series(pairs: &[(u32, u32)], n: u32) -> FoldedSeries {
        FoldedSeries::from_pairs("A", Periodicity::Daily, Granularity::Minute, pairs, n).unwrap()
    }

    fn minconf(text: &str) -> MinConf {
        text.parse().unwrap()
    }

    fn bounds(intervals: &[SignificantInterval]) -> Vec<(u32, u32, u64)> {
        intervals.iter().map(|i| (i.start, i.end, i.access_count)).collect()
    }

    #[test]
    fn enumerates_the_sample_series() {
        let citeseer = series(&[(845, 3), (850, 3), (880, 2)], 7);
        let capped = brute_force_si(&citeseer, minconf("60"), Some(20));
        assert_eq!(bounds(&capped), vec![(845, 850, 6)]);
        let uncapped = brute_force_si(&citeseer, minconf("60"), None);
        assert_eq!(bounds(&uncapped), vec![(845, 850, 6), (850, 880, 5)]);
    }

    #[test]
    fn keeps_only_minimal_windows() {
        let skewed = series(&[(120, 1), (125, 5)], 7);
        let found = brute_force_si(&skewed, minconf("60"), Some(20));
        assert_eq!(bounds(&found), vec![(125, 125, 5)]);
    }

    #[test]
    fn agrees_with_the_single_pass_procedures_on_samples() {
        let fixtures = [
            series(&[(845, 3), (850, 3), (880, 2)], 7),
            series(&[(845, 2), (850, 3), (860, 2)], 7),
            series(&[(120, 1), (125, 5)], 7),
            series(&[(0, 1), (1, 3), (2, 1)], 10),
        ];
        for fixture in &fixtures {
            for threshold in ["30", "40", "60", "85"] {
                let min_conf = minconf(threshold);
                for cap in [0, 5, 20, 2000] {
                    assert_eq!(
                        bounds(&one_pass_si(fixture, min_conf, cap)),
                        bounds(&brute_force_si(fixture, min_conf, Some(cap)))
                    );
                }
                assert_eq!(
                    bounds(&one_pass_allsi(fixture, min_conf)),
                    bounds(&brute_force_si(fixture, min_conf, None))
                );
            }
        }
    }

    fn interval(entity: &str, start: u32, end: u32, confidence: u64) -> FedInterval {
        FedInterval { entity: entity.into(), start, end, confidence: Ratio::from_integer(confidence) }
    }

    fn sample_input() -> FedInput {
        FedInput::from_sorted(vec![
            interval("Citeseer.com", 60, 75, 70),
            interval("Rgtu.net", 70, 80, 80),
            interval("Newsworld.com", 120, 130, 75),
            interval("Citeseer.com", 120, 130, 80),
            interval("Rgtu.net", 125, 135, 70),
        ])
        .unwrap()
    }

    #[test]
    fn validates_the_sample_episode_set() {
        let input = sample_input();
        let episodes = one_pass_fed(&input, 30, Semantics::S);
        assert_eq!(episodes.len(), 4);
        assert!(check_episode_set(&input, 30, Semantics::S, &episodes));
    }

    #[test]
    fn rejects_a_tampered_pattern_confidence() {
        let input = sample_input();
        let mut episodes = one_pass_fed(&input, 30, Semantics::S);
        episodes[0].pattern_confidence = Ratio::from_integer(99);
        assert!(!check_episode_set(&input, 30, Semantics::S, &episodes));
    }

    #[test]
    fn rejects_a_repeated_entity() {
        let input = sample_input();
        let mut episodes = one_pass_fed(&input, 30, Semantics::S);
        let twin = episodes[0].members[0].clone();
        episodes[0].members[1] = twin;
        assert!(!check_episode_set(&input, 30, Semantics::S, &episodes));
    }

    #[test]
    fn rejects_a_wrong_end_point() {
        let input = sample_input();
        let mut episodes = one_pass_fed(&input, 30, Semantics::S);
        episodes[0].end += 1;
        assert!(!check_episode_set(&input, 30, Semantics::S, &episodes));
    }

    #[test]
    fn rejects_a_window_violation() {
        let input = sample_input();
        let episodes = one_pass_fed(&input, 30, Semantics::S);
        // The same episodes under a tighter window: the 1:00 base chain breaks it.
        assert!(!check_episode_set(&input, 5, Semantics::S, &episodes));
    }

    #[test]
    fn rejects_an_end_outside_an_e_window() {
        let input = FedInput::from_sorted(vec![
            interval("A", 0, 0, 50),
            interval("B", 5, 100, 60),
        ])
        .unwrap();
        let episodes = one_pass_fed(&input, 30, Semantics::S);
        assert_eq!(episodes.len(), 1);
        assert!(check_episode_set(&input, 30, Semantics::S, &episodes));
        assert!(!check_episode_set(&input, 30, Semantics::E, &episodes));
    }

    #[test]
    fn rejects_a_level_above_the_entity_count() {
        let input = sample_input();
        let mut episodes = one_pass_fed(&input, 30, Semantics::S);
        let extra = interval("Extra.org", 125, 135, 60);
        let last = episodes.last_mut().unwrap();
        last.members.push(extra);
        last.pattern_confidence = Ratio::from_integer(60);
        assert!(!check_episode_set(&input, 30, Semantics::S, &episodes));
    }
}
