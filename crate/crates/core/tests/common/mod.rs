//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use leeway::coverage::{CoveragePlan, Lane, LakeRegion, RiverCorridor};
use leeway::geo::{LocalPoint, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Least squares through the normal equations AᵀA w = Aᵀb, solved by Gaussian
/// elimination with partial pivoting.
pub fn normal_equations<const N: usize>(rows: &[[f64; N]], targets: &[f64]) -> [f64; N] {
    let mut m = [[0.0; N]; N];
    let mut rhs = [0.0; N];
    for (r, &b) in rows.iter().zip(targets) {
        for i in 0..N {
            rhs[i] += r[i] * b;
            for j in 0..N {
                m[i][j] += r[i] * r[j];
            }
        }
    }
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..N {
            let f = m[row][col] / m[col][col];
            for k in col..N {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut w = [0.0; N];
    for i in (0..N).rev() {
        let s: f64 = (i + 1..N).map(|j| m[i][j] * w[j]).sum();
        w[i] = (rhs[i] - s) / m[i][i];
    }
    w
}

fn seg_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let l2 = ab.x * ab.x + ab.y * ab.y;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / l2).clamp(0.0, 1.0)
    };
    let q = Vec2::new(a.x + t * ab.x, a.y + t * ab.y);
    ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
}

/// Fraction of `cell`-sized raster cells inside the region (by center) that
/// lie within `swath / 2` of some lane.
pub fn raster_coverage(
    inside: impl Fn(Vec2) -> bool,
    min: Vec2,
    max: Vec2,
    cell: f64,
    lanes: &[Lane],
    swath: f64,
) -> f64 {
    let half = 0.5 * swath + 1e-9;
    let segs: Vec<(Vec2, Vec2)> = lanes
        .iter()
        .flat_map(|l| l.points.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>())
        .collect();
    let nx = ((max.x - min.x) / cell).round() as usize;
    let ny = ((max.y - min.y) / cell).round() as usize;
    let (mut total, mut covered) = (0usize, 0usize);
    for i in 0..nx {
        for j in 0..ny {
            let p = Vec2::new(min.x + (i as f64 + 0.5) * cell, min.y + (j as f64 + 0.5) * cell);
            if !inside(p) {
                continue;
            }
            total += 1;
            if segs.iter().any(|&(a, b)| seg_dist(p, a, b) <= half) {
                covered += 1;
            }
        }
    }
    covered as f64 / total as f64
}

pub fn lake_coverage(region: &LakeRegion, plan: &CoveragePlan, cell: f64) -> f64 {
    let b = region.boundary();
    let min = Vec2::new(
        b.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
        b.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
    );
    let max = Vec2::new(
        b.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
        b.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
    );
    let lanes: Vec<Lane> = plan.lanes().cloned().collect();
    raster_coverage(|p| point_in_polygon(b, p), min, max, cell, &lanes, plan.lane_spacing)
}

/// Coverage of a corridor whose centerline runs along +x from the origin.
pub fn straight_corridor_coverage(corridor: &RiverCorridor, plan: &CoveragePlan, cell: f64) -> f64 {
    let half = 0.5 * corridor.width();
    let len = corridor.length();
    let lanes: Vec<Lane> = plan.lanes().cloned().collect();
    raster_coverage(
        |p| p.x >= 0.0 && p.x <= len && p.y.abs() <= half,
        Vec2::new(0.0, -half),
        Vec2::new(len, half),
        cell,
        &lanes,
        plan.lane_spacing,
    )
}

/// Even-odd ray casting.
pub fn point_in_polygon(poly: &[LocalPoint], p: Vec2) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Path length of a contiguous run: lane lengths plus the hops between them.
pub fn run_cost(lanes: &[Lane]) -> f64 {
    let mut c = 0.0;
    for (i, l) in lanes.iter().enumerate() {
        c += l.points.windows(2).map(|w| w[0].distance(w[1])).sum::<f64>();
        if i + 1 < lanes.len() {
            c += l.points[l.points.len() - 1].distance(lanes[i + 1].points[0]);
        }
    }
    c
}

/// Minimum over all contiguous k-partitions of the largest run cost.
pub fn brute_force_split(lanes: &[Lane], k: usize) -> f64 {
    fn rec(lanes: &[Lane], k: usize, worst: f64, best: &mut f64) {
        if k == 1 {
            *best = best.min(worst.max(run_cost(lanes)));
            return;
        }
        for cut in 1..=lanes.len() - (k - 1) {
            rec(&lanes[cut..], k - 1, worst.max(run_cost(&lanes[..cut])), best);
        }
    }
    let mut best = f64::INFINITY;
    rec(lanes, k, 0.0, &mut best);
    best
}

/// Cheapest sequence over every lane order and direction, from `start`.
pub fn brute_force_order(lanes: &[Lane], start: LocalPoint) -> f64 {
    fn rec(lanes: &[Lane], used: &mut Vec<bool>, pos: LocalPoint, acc: f64, best: &mut f64) {
        if used.iter().all(|&u| u) {
            *best = best.min(acc);
            return;
        }
        for i in 0..lanes.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let l = &lanes[i];
            let (a, b) = (l.points[0], l.points[l.points.len() - 1]);
            rec(lanes, used, b, acc + pos.distance(a), best);
            rec(lanes, used, a, acc + pos.distance(b), best);
            used[i] = false;
        }
    }
    let mut best = f64::INFINITY;
    rec(lanes, &mut vec![false; lanes.len()], start, 0.0, &mut best);
    best
}

/// Transit cost of a fixed lane sequence from `start`.
pub fn sequence_cost(lanes: &[Lane], start: LocalPoint) -> f64 {
    let mut pos = start;
    let mut c = 0.0;
    for l in lanes {
        c += pos.distance(l.points[0]);
        pos = l.points[l.points.len() - 1];
    }
    c
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// `n` random straight lanes inside a `size` square.
pub fn random_lanes(rng: &mut ChaCha8Rng, n: usize, size: f64) -> Vec<Lane> {
    (0..n)
        .map(|_| {
            let a = Vec2::new(rng.random_range(0.0..size), rng.random_range(0.0..size));
            let b = Vec2::new(rng.random_range(0.0..size), rng.random_range(0.0..size));
            Lane::segment(a, b)
        })
        .collect()
}

/// Checks a partition against the balance bound and an exhaustive search over
/// robot-to-band assignments. Each band is reached at its nearest corner.
pub fn check_partition(plan: &CoveragePlan, starts: &[Vec2]) -> Result<(), String> {
    let k = starts.len();
    if plan.routes.len() != k {
        return Err(format!("{} routes for {k} robots", plan.routes.len()));
    }
    let loads: Vec<f64> = plan
        .routes
        .iter()
        .map(|rt| rt.lanes.iter().map(|l| l.length()).sum())
        .collect();
    let longest = plan.lanes().map(|l| l.length()).fold(0.0, f64::max);
    let spread = loads.iter().cloned().fold(f64::MIN, f64::max) - loads.iter().cloned().fold(f64::MAX, f64::min);
    if spread > longest + 1e-9 {
        return Err(format!("load spread {spread} exceeds lane length {longest}"));
    }
    let corners = |lanes: &[Lane]| -> Vec<Vec2> {
        let lo = lanes.iter().min_by(|a, b| a.points[0].y.total_cmp(&b.points[0].y)).unwrap();
        let hi = lanes.iter().max_by(|a, b| a.points[0].y.total_cmp(&b.points[0].y)).unwrap();
        vec![lo.start(), lo.end(), hi.start(), hi.end()]
    };
    let dist = |s: Vec2, lanes: &[Lane]| corners(lanes).iter().map(|c| s.distance(*c)).fold(f64::INFINITY, f64::min);
    let got: f64 = plan.routes.iter().map(|rt| dist(starts[rt.robot], &rt.lanes)).sum();
    let best = permutations(k)
        .iter()
        .map(|p| (0..k).map(|robot| dist(starts[robot], &plan.routes[p[robot]].lanes)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if (got - best).abs() >= 1e-9 {
        return Err(format!("assignment cost {got}, exhaustive {best}"));
    }
    for rt in &plan.routes {
        let d = starts[rt.robot].distance(rt.lanes[0].start());
        if (d - dist(starts[rt.robot], &rt.lanes)).abs() >= 1e-9 {
            return Err(format!("robot {} does not enter its band at the nearest corner", rt.robot));
        }
    }
    Ok(())
}

/// Known weights of the regression benchmark: rows predict (e_along, e_cross)
/// from (f_along, f_cross, v_cmd, bias).
pub const W0: [[f64; 4]; 2] = [[4.2, -0.3, 0.15, -0.4], [0.25, 3.8, -0.05, 0.2]];

/// `n` feature rows with targets W0·f plus Gaussian noise of `noise_std`.
pub fn regression_benchmark(
    seed: u64,
    n: usize,
    noise_std: f64,
) -> Vec<(leeway::displacement::FeatureVector, leeway::displacement::PathVec)> {
    use leeway::displacement::{FeatureVector, PathVec};
    use rand_distr::{Distribution, Normal};
    let mut r = rng(seed);
    let noise = Normal::new(0.0, noise_std).unwrap();
    (0..n)
        .map(|_| {
            let f = FeatureVector::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(0.5..4.0));
            let row = f.as_row();
            let dot = |w: &[f64; 4]| w.iter().zip(row.iter()).map(|(a, b)| a * b).sum::<f64>();
            let e = PathVec::new(dot(&W0[0]) + noise.sample(&mut r), dot(&W0[1]) + noise.sample(&mut r));
            (f, e)
        })
        .collect()
}

/// Normal-equations weights for feature rows.
pub fn oracle_weights(rows: &[(leeway::displacement::FeatureVector, leeway::displacement::PathVec)]) -> [[f64; 4]; 2] {
    let a: Vec<[f64; 4]> = rows.iter().map(|(f, _)| f.as_row()).collect();
    let along: Vec<f64> = rows.iter().map(|(_, e)| e.along).collect();
    let cross: Vec<f64> = rows.iter().map(|(_, e)| e.cross).collect();
    [normal_equations(&a, &along), normal_equations(&a, &cross)]
}

pub fn max_abs_diff(w: &[Vec<f64>; 2], v: &[[f64; 4]; 2]) -> f64 {
    (0..2)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .map(|(r, c)| (w[r][c] - v[r][c]).abs())
        .fold(0.0, f64::max)
}
