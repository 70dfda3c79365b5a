//! CSV formats: trajectories, death/birth event reports, and sweep maps.
//!
//! All files are UTF-8, comma separated, `.` decimal point. Numbers are
//! written with 17 significant digits so they parse back bit-exactly.

use std::io::{BufRead, Write};

use crate::dynamics::EventReport;
use crate::error::{Error, Result};
use crate::master_eq::Trajectory;

pub const TRAJECTORY_HEADER: &str = "t,concurrence,fid_B1,fid_B2,fid_B3,trace,purity,mean_na,mean_nb";
pub const EVENT_HEADER: &str = "t_start,t_end,duration,birth_time";
pub const SWEEP_HEADER: &str = "param_value,t,concurrence";

const TRAJECTORY_COLUMNS: usize = 9;

pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_echo<W: Write>(w: &mut W, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Writes the trajectory with times multiplied by `time_factor`.
pub fn write_trajectory<W: Write>(
    w: &mut W,
    echo: &[(String, String)],
    traj: &Trajectory,
    time_factor: f64,
) -> Result<()> {
    write_echo(w, echo)?;
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (t, r) in traj.times.iter().zip(&traj.records) {
        let row = [
            t * time_factor,
            r.concurrence,
            r.fid_b1,
            r.fid_b2,
            r.fid_b3,
            r.trace,
            r.purity,
            r.mean_na,
            r.mean_nb,
        ];
        let line: Vec<String> = row.iter().map(|&x| fmt_value(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Trajectory file contents in column order of [`TRAJECTORY_HEADER`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub rows: Vec<[f64; TRAJECTORY_COLUMNS]>,
}

impl TrajectoryTable {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn concurrence(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[1]).collect()
    }
}

pub fn read_trajectory<R: BufRead>(reader: R) -> Result<TrajectoryTable> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != TRAJECTORY_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header '{TRAJECTORY_HEADER}'"),
                });
            }
            seen_header = true;
            continue;
        }
        let mut row = [0.0; TRAJECTORY_COLUMNS];
        let mut n = 0;
        for field in line.split(',') {
            if n == TRAJECTORY_COLUMNS {
                n += 1;
                break;
            }
            row[n] = field.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("cannot parse '{field}' as a number"),
            })?;
            n += 1;
        }
        if n != TRAJECTORY_COLUMNS {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {TRAJECTORY_COLUMNS} fields"),
            });
        }
        if let Some(prev) = rows.last().map(|r: &[f64; TRAJECTORY_COLUMNS]| r[0]) {
            if !(row[0] > prev) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "times must be strictly increasing".into(),
                });
            }
        }
        rows.push(row);
    }
    if !seen_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing trajectory header".into(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(TrajectoryTable { rows })
}

pub fn write_events<W: Write>(w: &mut W, echo: &[(String, String)], report: &EventReport) -> Result<()> {
    write_echo(w, echo)?;
    writeln!(w, "{EVENT_HEADER}")?;
    for (iv, birth) in report.intervals.iter().zip(&report.births) {
        let birth = birth.map(fmt_value).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            fmt_value(iv.t_start),
            fmt_value(iv.t_end),
            fmt_value(iv.duration()),
            birth
        )?;
    }
    Ok(())
}

/// One sweep grid point: the swept value and its sampled concurrence.
pub trait SweepRows {
    fn value(&self) -> f64;
    fn samples(&self) -> (&[f64], &[f64]);
}

pub fn write_sweep<W: Write, P: SweepRows>(
    w: &mut W,
    echo: &[(String, String)],
    points: &[P],
    time_factor: f64,
) -> Result<()> {
    write_echo(w, echo)?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in points {
        let v = fmt_value(p.value());
        let (times, conc) = p.samples();
        for (t, c) in times.iter().zip(conc) {
            writeln!(w, "{v},{},{}", fmt_value(t * time_factor), fmt_value(*c))?;
        }
    }
    Ok(())
}
