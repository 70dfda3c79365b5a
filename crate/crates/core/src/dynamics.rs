//! Sudden death and birth detection on sampled concurrence.

use crate::error::{Error, Result};
use crate::master_eq::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeathInterval {
    pub t_start: f64,
    pub t_end: f64,
}

impl DeathInterval {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Concurrence at or below this counts as zero.
    pub eps: f64,
    /// Shortest zero run reported as a death interval.
    pub min_duration: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            min_duration: 0.2,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !(self.min_duration >= 0.0) {
            return Err(Error::Parameter(format!(
                "detector needs eps > 0 and min_duration >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Maximal runs of samples with `C ≤ eps` lasting at least `min_duration`.
/// Interval bounds are the first and last sample times of each run.
pub fn detect_death_intervals(
    times: &[f64],
    conc: &[f64],
    cfg: &DetectorConfig,
) -> Result<Vec<DeathInterval>> {
    cfg.validate()?;
    if times.is_empty() || times.len() != conc.len() {
        return Err(Error::EmptyTrajectory);
    }
    let mut out = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=times.len() {
        let dead = i < times.len() && conc[i] <= cfg.eps;
        match (dead, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                let interval = DeathInterval {
                    t_start: times[s],
                    t_end: times[i - 1],
                };
                if interval.duration() >= cfg.min_duration {
                    out.push(interval);
                }
                run_start = None;
            }
            _ => {}
        }
    }
    Ok(out)
}

/// First sample time with `C > eps` after each interval; intervals running to
/// the end of the record have no birth.
pub fn detect_birth_events(
    intervals: &[DeathInterval],
    times: &[f64],
    conc: &[f64],
    eps: f64,
) -> Vec<Option<f64>> {
    intervals
        .iter()
        .map(|iv| {
            times
                .iter()
                .zip(conc)
                .find(|(&t, &c)| t > iv.t_end && c > eps)
                .map(|(&t, _)| t)
        })
        .collect()
}

/// Sliding-window peaks: the record is cut into consecutive windows of length
/// `window` and each full window contributes `(t_peak, C_peak)`.
pub fn envelope(times: &[f64], conc: &[f64], window: f64) -> Result<Vec<(f64, f64)>> {
    if times.len() < 2 || times.len() != conc.len() {
        return Err(Error::EmptyTrajectory);
    }
    let spacing = times[1] - times[0];
    if !(window > spacing) {
        return Err(Error::Parameter(format!(
            "envelope window {window} must exceed the sampling interval {spacing}"
        )));
    }
    let t0 = times[0];
    let t_end = *times.last().unwrap();
    let n_windows = ((t_end - t0) / window + 1e-9).floor() as usize;
    let mut peaks: Vec<Option<(f64, f64)>> = vec![None; n_windows];
    for (&t, &c) in times.iter().zip(conc) {
        let w = ((t - t0) / window).floor() as usize;
        if w >= n_windows {
            break;
        }
        match peaks[w] {
            Some((_, best)) if best >= c => {}
            _ => peaks[w] = Some((t, c)),
        }
    }
    Ok(peaks.into_iter().flatten().collect())
}

/// Death intervals paired with their birth events.
#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    pub intervals: Vec<DeathInterval>,
    pub births: Vec<Option<f64>>,
}

impl EventReport {
    pub fn analyze(times: &[f64], conc: &[f64], cfg: &DetectorConfig) -> Result<Self> {
        let intervals = detect_death_intervals(times, conc, cfg)?;
        let births = detect_birth_events(&intervals, times, conc, cfg.eps);
        Ok(Self { intervals, births })
    }

    pub fn from_trajectory(traj: &Trajectory, cfg: &DetectorConfig) -> Result<Self> {
        Self::analyze(&traj.times, &traj.concurrence(), cfg)
    }

    pub fn total_death(&self) -> f64 {
        self.intervals.iter().map(DeathInterval::duration).fold(0.0, |a, d| a + d)
    }

    pub fn longest(&self) -> Option<DeathInterval> {
        self.intervals
            .iter()
            .copied()
            .max_by(|a, b| a.duration().total_cmp(&b.duration()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(t_end: f64, dt: f64) -> Vec<f64> {
        let n = (t_end / dt).round() as usize;
        (0..=n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn all_zero_is_one_interval() {
        let t = grid(10.0, 0.01);
        let c = vec![0.0; t.len()];
        let iv = detect_death_intervals(&t, &c, &DetectorConfig::default()).unwrap();
        assert_eq!(iv, vec![DeathInterval { t_start: 0.0, t_end: 10.0 }]);
        assert_eq!(detect_birth_events(&iv, &t, &c, 1e-4), vec![None]);
    }

    #[test]
    fn isolated_zeros_do_not_count() {
        let t = grid(20.0, 0.01);
        let c: Vec<f64> = t.iter().map(|t| t.sin().abs()).collect();
        let iv = detect_death_intervals(&t, &c, &DetectorConfig::default()).unwrap();
        assert!(iv.is_empty());
        assert!(detect_birth_events(&iv, &t, &c, 1e-4).is_empty());
    }

    #[test]
    fn step_fixture() {
        let t = grid(10.0, 0.01);
        let c: Vec<f64> = t
            .iter()
            .map(|&t| if t < 5.0 - 1e-9 { 1.0 } else if t <= 8.0 + 1e-9 { 0.0 } else { 0.3 })
            .collect();
        let report = EventReport::analyze(&t, &c, &DetectorConfig::default()).unwrap();
        assert_eq!(report.intervals.len(), 1);
        let iv = report.intervals[0];
        assert!((iv.t_start - 5.0).abs() < 1e-9 && (iv.t_end - 8.0).abs() < 1e-9);
        let birth = report.births[0].unwrap();
        assert!((birth - 8.01).abs() < 1e-9);
        assert!((report.total_death() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(detect_death_intervals(&[], &[], &DetectorConfig::default()).is_err());
        assert!(envelope(&[], &[], 1.0).is_err());
    }

    #[test]
    fn constant_envelope() {
        let t = grid(10.0, 0.01);
        let c = vec![0.7; t.len()];
        let env = envelope(&t, &c, 1.0).unwrap();
        assert_eq!(env.len(), 10);
        assert!(env.iter().all(|&(_, v)| v == 0.7));
        assert!(envelope(&t, &c, 0.005).is_err());
    }

    #[test]
    fn decaying_sinusoid_envelope() {
        let t = grid(4.0, 1e-3);
        let c: Vec<f64> = t.iter().map(|&t| (-t).exp() * (10.0 * t).sin().abs()).collect();
        let env = envelope(&t, &c, std::f64::consts::PI / 5.0).unwrap();
        assert!(env.len() >= 6);
        for (tp, v) in env {
            assert!((v / (-tp).exp() - 1.0).abs() < 0.05, "t = {tp}");
        }
    }

    proptest! {
        #[test]
        fn intervals_ordered_and_monotone_in_eps(
            values in proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1e-3, 0.0f64..1.0], 10..400),
            eps_hi in 1e-4f64..1e-3,
            shrink in 0.01f64..1.0,
        ) {
            let t: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.05).collect();
            let hi = DetectorConfig { eps: eps_hi, min_duration: 0.2 };
            let lo = DetectorConfig { eps: eps_hi * shrink, min_duration: 0.2 };
            let wide = detect_death_intervals(&t, &values, &hi).unwrap();
            let narrow = detect_death_intervals(&t, &values, &lo).unwrap();
            for w in wide.windows(2) {
                prop_assert!(w[0].t_end < w[1].t_start);
            }
            for iv in &narrow {
                prop_assert!(wide.iter().any(|w| w.t_start <= iv.t_start && iv.t_end <= w.t_end));
            }
            prop_assert!(narrow.iter().map(|i| i.duration()).sum::<f64>()
                <= wide.iter().map(|i| i.duration()).sum::<f64>() + 1e-12);
            let t_max = *t.last().unwrap();
            for (iv, b) in wide.iter().zip(detect_birth_events(&wide, &t, &values, hi.eps)) {
                if let Some(b) = b {
                    prop_assert!(b > iv.t_end && b <= t_max);
                }
            }
        }
    }
}
