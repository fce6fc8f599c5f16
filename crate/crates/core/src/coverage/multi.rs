//! Dividing coverage work between several robots.

use super::sweep::{serpentine, sweep_lanes};
use super::{positive, CoverageError, CoveragePlan, LakeRegion, Lane, Pattern, RobotRoute};
use crate::geo::LocalPoint;

/// Robot counts up to this size get an exhaustive band assignment.
pub const EXHAUSTIVE_ASSIGNMENT_LIMIT: usize = 6;

fn reduce_robots(k: usize, available: usize, what: &str, warnings: &mut Vec<String>) -> usize {
    if k > available {
        let msg = format!("{k} robots requested but only {available} {what}; using {available}");
        log::warn!("{msg}");
        warnings.push(msg);
        available
    } else {
        k
    }
}

/// Cost of flying `lanes` in order: lane lengths plus connectors.
pub fn split_cost(lanes: &[Lane]) -> f64 {
    let connectors: f64 = lanes.windows(2).map(|w| w[0].end().distance(w[1].start())).sum();
    lanes.iter().map(Lane::length).sum::<f64>() + connectors
}

/// Cuts a single-robot plan into `k` contiguous runs minimizing the longest run.
///
/// Exact dynamic program over cut positions; among equally good splits the
/// earliest cut wins. More robots than lanes are reduced to one lane each.
pub fn split_path(plan: &CoveragePlan, k: usize) -> Result<CoveragePlan, CoverageError> {
    if k == 0 {
        return Err(CoverageError::NoRobots);
    }
    if plan.routes.len() != 1 {
        return Err(CoverageError::NotSingleRobot(plan.routes.len()));
    }
    let lanes = &plan.routes[0].lanes;
    if lanes.is_empty() {
        return Err(CoverageError::NoLanes);
    }
    let mut warnings = plan.warnings.clone();
    let k = reduce_robots(k, lanes.len(), "lanes", &mut warnings);
    let n = lanes.len();

    let mut len_prefix = vec![0.0; n + 1];
    let mut gap_prefix = vec![0.0; n];
    for i in 0..n {
        len_prefix[i + 1] = len_prefix[i] + lanes[i].length();
        if i + 1 < n {
            gap_prefix[i + 1] = gap_prefix[i] + lanes[i].end().distance(lanes[i + 1].start());
        }
    }
    // lanes i..j (exclusive j) as one run
    let run = |i: usize, j: usize| (len_prefix[j] - len_prefix[i]) + (gap_prefix[j - 1] - gap_prefix[i]);

    // best[c][j]: optimal max load covering the first j lanes with c runs
    let mut best = vec![vec![f64::INFINITY; n + 1]; k + 1];
    let mut cut = vec![vec![0usize; n + 1]; k + 1];
    best[0][0] = 0.0;
    for c in 1..=k {
        for j in c..=n {
            for i in (c - 1)..j {
                let v = best[c - 1][i].max(run(i, j));
                if v < best[c][j] {
                    best[c][j] = v;
                    cut[c][j] = i;
                }
            }
        }
    }
    let mut bounds = vec![n];
    let mut j = n;
    for c in (1..=k).rev() {
        j = cut[c][j];
        bounds.push(j);
    }
    bounds.reverse();
    let routes = bounds
        .windows(2)
        .enumerate()
        .map(|(robot, w)| RobotRoute {
            robot,
            lanes: lanes[w[0]..w[1]].to_vec(),
        })
        .collect();
    Ok(CoveragePlan {
        pattern: plan.pattern,
        lane_spacing: plan.lane_spacing,
        speed: plan.speed,
        routes,
        warnings,
    })
}

/// Splits row weights into `k` contiguous bands closest to equal shares,
/// minimizing the summed squared deviation. Returns band boundaries.
fn balanced_bands(weights: &[f64], k: usize) -> Vec<usize> {
    let n = weights.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + weights[i];
    }
    let target = prefix[n] / k as f64;
    let dev = |i: usize, j: usize| {
        let d = prefix[j] - prefix[i] - target;
        d * d
    };
    let mut best = vec![vec![f64::INFINITY; n + 1]; k + 1];
    let mut cut = vec![vec![0usize; n + 1]; k + 1];
    best[0][0] = 0.0;
    for c in 1..=k {
        for j in c..=n {
            for i in (c - 1)..j {
                let v = best[c - 1][i] + dev(i, j);
                if v < best[c][j] {
                    best[c][j] = v;
                    cut[c][j] = i;
                }
            }
        }
    }
    let mut bounds = vec![n];
    let mut j = n;
    for c in (1..=k).rev() {
        j = cut[c][j];
        bounds.push(j);
    }
    bounds.reverse();
    bounds
}

/// A band's four possible entry points: (first row, last row) × (left, right).
fn band_corners(rows: &[Vec<Lane>]) -> [(LocalPoint, bool, bool); 4] {
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let left = |r: &Vec<Lane>| r[0].start();
    let right = |r: &Vec<Lane>| r[r.len() - 1].end();
    // (point, enter at last row, enter at right end)
    [
        (left(first), false, false),
        (right(first), false, true),
        (left(last), true, false),
        (right(last), true, true),
    ]
}

fn entry(rows: &[Vec<Lane>], from: LocalPoint) -> (f64, bool, bool) {
    let mut best = (f64::INFINITY, false, false);
    for (p, from_last, from_right) in band_corners(rows) {
        let d = from.distance(p);
        if d < best.0 {
            best = (d, from_last, from_right);
        }
    }
    best
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Band index for each robot.
fn assign_bands(dist: &[Vec<f64>]) -> Vec<usize> {
    let k = dist.len();
    if k <= EXHAUSTIVE_ASSIGNMENT_LIMIT {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = perm.clone();
        let mut best_cost = f64::INFINITY;
        loop {
            let c: f64 = perm.iter().enumerate().map(|(r, &b)| dist[r][b]).sum();
            if c < best_cost {
                best_cost = c;
                best = perm.clone();
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best
    } else {
        let mut taken = vec![false; k];
        (0..k)
            .map(|r| {
                let b = (0..k)
                    .filter(|&b| !taken[b])
                    .min_by(|&a, &b| dist[r][a].total_cmp(&dist[r][b]))
                    .expect("a free band remains");
                taken[b] = true;
                b
            })
            .collect()
    }
}

/// Multi-robot sweep of a lake.
///
/// Scanlines are grouped into contiguous bands of near-equal lane length, one
/// per robot. Bands go to robots so the summed distance from each start to its
/// band's nearest corner is minimal (exhaustively for up to
/// [`EXHAUSTIVE_ASSIGNMENT_LIMIT`] robots, greedily in robot order above), and
/// each robot sweeps its band serpentine from that corner.
pub fn partition_area(
    region: &LakeRegion,
    starts: &[LocalPoint],
    spacing: f64,
    orientation: f64,
    speed: f64,
) -> Result<CoveragePlan, CoverageError> {
    if starts.is_empty() {
        return Err(CoverageError::NoRobots);
    }
    positive("speed", speed)?;
    let rows = sweep_lanes(region, spacing, orientation)?;
    let mut warnings = Vec::new();
    let k = reduce_robots(starts.len(), rows.len(), "scanlines", &mut warnings);

    let weights: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().map(Lane::length).sum())
        .collect();
    let bounds = balanced_bands(&weights, k);
    let bands: Vec<&[Vec<Lane>]> = bounds.windows(2).map(|w| &rows[w[0]..w[1]]).collect();

    let dist: Vec<Vec<f64>> = starts[..k]
        .iter()
        .map(|&s| bands.iter().map(|b| entry(b, s).0).collect())
        .collect();
    let assignment = assign_bands(&dist);

    let routes = assignment
        .iter()
        .enumerate()
        .map(|(robot, &b)| {
            let (_, from_last, from_right) = entry(bands[b], starts[robot]);
            let mut band_rows = bands[b].to_vec();
            if from_last {
                band_rows.reverse();
            }
            RobotRoute {
                robot,
                lanes: serpentine(&band_rows, !from_right),
            }
        })
        .collect();
    Ok(CoveragePlan {
        pattern: Pattern::Boustrophedon,
        lane_spacing: spacing,
        speed,
        routes,
        warnings,
    })
}
