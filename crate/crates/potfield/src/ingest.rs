//! Trajectory text files: whitespace-separated `frame_id agent_id x y` rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use potfield_core::trajectory::{segment, TimedPoint, Trajectory, TrajectorySample};
use potfield_core::Vec2;

use crate::error::{Error, Result};
use crate::io;

pub fn parse_trajectory_file(path: &Path, dt: f64) -> Result<Vec<Trajectory>> {
    parse_trajectories(&io::read_to_string(path)?, &path.display().to_string(), dt)
}

fn integral(s: &str) -> Option<i64> {
    if let Ok(i) = s.parse::<i64>() {
        return Some(i);
    }
    let f = s.parse::<f64>().ok()?;
    (f.is_finite() && f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
}

/// Parses file contents; `name` labels error messages.
///
/// Blank lines and lines starting with `#` are skipped. The frame stride is
/// the most common gap between consecutive frames of the same agent (ties:
/// smallest); frames map to `(frame - first_frame) / stride`. Agents with a
/// single row are dropped.
pub fn parse_trajectories(text: &str, name: &str, dt: f64) -> Result<Vec<Trajectory>> {
    let mut rows: BTreeMap<i64, Vec<(i64, usize, Vec2)>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::Parse {
            path: name.to_string(),
            line: line_no,
            msg,
        };
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(bad(format!(
                "expected 4 columns (frame agent x y), found {}",
                cols.len()
            )));
        }
        let frame = integral(cols[0])
            .ok_or_else(|| bad(format!("frame id {:?} is not an integer", cols[0])))?;
        let agent = integral(cols[1])
            .ok_or_else(|| bad(format!("agent id {:?} is not an integer", cols[1])))?;
        let coord = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(x), Some(y)) = (coord(cols[2]), coord(cols[3])) else {
            return Err(bad(format!("bad coordinates {:?} {:?}", cols[2], cols[3])));
        };
        rows.entry(agent)
            .or_default()
            .push((frame, line_no, Vec2::new(x, y)));
    }

    let mut gaps: BTreeMap<i64, usize> = BTreeMap::new();
    let mut first = i64::MAX;
    for pts in rows.values_mut() {
        pts.sort_by_key(|p| p.0);
        first = first.min(pts[0].0);
        for w in pts.windows(2) {
            *gaps.entry(w[1].0 - w[0].0).or_default() += 1;
        }
    }
    let stride = gaps
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map_or(1, |(g, _)| *g);
    if stride <= 0 {
        let (agent, line) = rows
            .iter()
            .find_map(|(a, pts)| {
                pts.windows(2)
                    .find(|w| w[0].0 == w[1].0)
                    .map(|w| (*a, w[1].1))
            })
            .expect("a zero gap exists");
        return Err(Error::Stride {
            path: name.to_string(),
            agent,
            msg: format!("duplicate frame (line {line})"),
        });
    }

    let mut out = Vec::new();
    for (agent, pts) in rows {
        if pts.len() < 2 {
            log::debug!("{name}: dropping agent {agent} with a single row");
            continue;
        }
        let stride_err = |msg: String| Error::Stride {
            path: name.to_string(),
            agent,
            msg,
        };
        for w in pts.windows(2) {
            let gap = w[1].0 - w[0].0;
            if gap != stride {
                return Err(stride_err(format!(
                    "frame gap {gap} at line {} differs from the file stride {stride}",
                    w[1].1
                )));
            }
        }
        if (pts[0].0 - first) % stride != 0 {
            return Err(stride_err(format!(
                "frames start at {} which is off the file stride {stride} (first frame {first})",
                pts[0].0
            )));
        }
        let points = pts
            .iter()
            .map(|&(frame, _, pos)| TimedPoint {
                time_index: (frame - first) / stride,
                pos,
            })
            .collect();
        out.push(Trajectory::new(agent, points, dt)?);
    }
    Ok(out)
}

/// Rows `time_index agent_id x y`, agents in order; parsing the output
/// reproduces the point lists.
pub fn format_trajectories(trajs: &[Trajectory]) -> String {
    let mut s = String::new();
    for t in trajs {
        for p in &t.points {
            writeln!(
                s,
                "{} {} {:?} {:?}",
                p.time_index, t.agent_id, p.pos.x, p.pos.y
            )
            .expect("write to string");
        }
    }
    s
}

/// Samples of every trajectory, in agent order then time.
pub fn segment_all(
    trajs: &[Trajectory],
    scene_id: &str,
    obs_len: usize,
    pred_len: usize,
    stride: usize,
) -> Result<Vec<TrajectorySample>> {
    let mut out = Vec::new();
    for t in trajs {
        out.extend(segment(t, scene_id, obs_len, obs_len + pred_len, stride)?);
    }
    Ok(out)
}

/// One observation window per agent and time: the candidates for
/// `find_neighbors` (each needs `obs_len` points plus one step).
pub fn neighbor_candidates(
    trajs: &[Trajectory],
    scene_id: &str,
    obs_len: usize,
) -> Result<Vec<TrajectorySample>> {
    segment_all(trajs, scene_id, obs_len, 1, 1)
}
