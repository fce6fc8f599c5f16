//! Lane visiting order: which lane next, and which way along it.

use super::Lane;
use crate::geo::LocalPoint;

/// Largest lane count solved exactly by dynamic programming.
pub const EXACT_ORDER_LIMIT: usize = 8;

/// Transition distance of flying `lanes` in order from `start`, excluding the
/// lanes themselves.
pub fn lane_sequence_cost(lanes: &[Lane], start: LocalPoint) -> f64 {
    let mut pos = start;
    let mut cost = 0.0;
    for l in lanes {
        cost += pos.distance(l.start());
        pos = l.end();
    }
    cost
}

/// Greedy construction: repeatedly fly to the nearest free lane end.
///
/// Ties go to the lower lane index, then to the lane's own direction.
pub fn nearest_neighbor_order(lanes: &[Lane], start: LocalPoint) -> Vec<Lane> {
    let mut used = vec![false; lanes.len()];
    let mut pos = start;
    let mut out = Vec::with_capacity(lanes.len());
    for _ in 0..lanes.len() {
        let mut best: Option<(f64, usize, bool)> = None;
        for (i, l) in lanes.iter().enumerate().filter(|(i, _)| !used[*i]) {
            for (rev, entry) in [(false, l.start()), (true, l.end())] {
                let d = pos.distance(entry);
                if best.is_none_or(|(b, _, _)| d < b) {
                    best = Some((d, i, rev));
                }
            }
        }
        let (_, i, rev) = best.expect("a free lane remains");
        used[i] = true;
        let lane = if rev { lanes[i].reversed() } else { lanes[i].clone() };
        pos = lane.end();
        out.push(lane);
    }
    out
}

/// Improves `lanes` in place with segment reversals until no reversal helps.
///
/// Reversing a run of lanes also flips each lane's direction, so a run of
/// length one is a plain direction flip. Each accepted move strictly lowers
/// the cost.
pub fn two_opt(lanes: &mut [Lane], start: LocalPoint) {
    let n = lanes.len();
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i..n {
                let prev = if i == 0 { start } else { lanes[i - 1].end() };
                let before_in = prev.distance(lanes[i].start());
                let after_in = prev.distance(lanes[j].end());
                let (before_out, after_out) = if j + 1 < n {
                    let next = lanes[j + 1].start();
                    (lanes[j].end().distance(next), lanes[i].start().distance(next))
                } else {
                    (0.0, 0.0)
                };
                if after_in + after_out < before_in + before_out - 1e-9 {
                    lanes[i..=j].reverse();
                    for l in &mut lanes[i..=j] {
                        *l = l.reversed();
                    }
                    improved = true;
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// Optimal order and directions by Held–Karp dynamic programming.
pub fn exact_order(lanes: &[Lane], start: LocalPoint) -> Vec<Lane> {
    let n = lanes.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(n <= 16, "exact lane ordering is exponential; got {n} lanes");
    let entry = |i: usize, rev: usize| if rev == 1 { lanes[i].end() } else { lanes[i].start() };
    let exit = |i: usize, rev: usize| if rev == 1 { lanes[i].start() } else { lanes[i].end() };
    let states = 1usize << n;
    let idx = |mask: usize, i: usize, r: usize| (mask * n + i) * 2 + r;
    let mut cost = vec![f64::INFINITY; states * n * 2];
    let mut parent = vec![usize::MAX; states * n * 2];
    for i in 0..n {
        for r in 0..2 {
            cost[idx(1 << i, i, r)] = start.distance(entry(i, r));
        }
    }
    for mask in 1..states {
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            for r in 0..2 {
                let c = cost[idx(mask, i, r)];
                if !c.is_finite() {
                    continue;
                }
                for j in (0..n).filter(|j| mask & (1 << j) == 0) {
                    for s in 0..2 {
                        let next = mask | (1 << j);
                        let cand = c + exit(i, r).distance(entry(j, s));
                        let k = idx(next, j, s);
                        if cand < cost[k] {
                            cost[k] = cand;
                            parent[k] = idx(mask, i, r);
                        }
                    }
                }
            }
        }
    }
    let full = states - 1;
    let mut best = idx(full, 0, 0);
    for i in 0..n {
        for r in 0..2 {
            if cost[idx(full, i, r)] < cost[best] {
                best = idx(full, i, r);
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut k = best;
    while k != usize::MAX {
        let r = k % 2;
        let i = (k / 2) % n;
        out.push(if r == 1 { lanes[i].reversed() } else { lanes[i].clone() });
        k = parent[k];
    }
    out.reverse();
    out
}

/// Lane order and directions with low transition distance from `start`.
///
/// Up to [`EXACT_ORDER_LIMIT`] lanes are solved exactly. Larger sets run
/// 2-opt from both the nearest-neighbor tour and the input order and keep the
/// cheaper result, so the answer is never worse than either starting tour.
pub fn order_lanes(lanes: &[Lane], start: LocalPoint) -> Vec<Lane> {
    if lanes.len() <= EXACT_ORDER_LIMIT {
        return exact_order(lanes, start);
    }
    let mut nn = nearest_neighbor_order(lanes, start);
    two_opt(&mut nn, start);
    let mut given = lanes.to_vec();
    two_opt(&mut given, start);
    if lane_sequence_cost(&given, start) < lane_sequence_cost(&nn, start) {
        given
    } else {
        nn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Vec2;

    fn lane(ax: f64, ay: f64, bx: f64, by: f64) -> Lane {
        Lane::segment(Vec2::new(ax, ay), Vec2::new(bx, by))
    }

    #[test]
    fn single_lane_picks_near_end() {
        let l = lane(0.0, 0.0, 10.0, 0.0);
        let out = order_lanes(std::slice::from_ref(&l), Vec2::new(12.0, 0.0));
        assert_eq!(out, vec![l.reversed()]);
    }

    #[test]
    fn serpentine_is_kept() {
        let lanes: Vec<Lane> = (0..12)
            .map(|i| {
                let y = i as f64 * 5.0;
                if i % 2 == 0 {
                    lane(0.0, y, 50.0, y)
                } else {
                    lane(50.0, y, 0.0, y)
                }
            })
            .collect();
        let start = Vec2::ZERO;
        let before = lane_sequence_cost(&lanes, start);
        let out = order_lanes(&lanes, start);
        assert!(lane_sequence_cost(&out, start) <= before + 1e-9);
    }

    #[test]
    fn two_opt_untangles() {
        // crossing connectors: 0 → 2 → 1 → 3 along a line
        let lanes = vec![
            lane(0.0, 0.0, 1.0, 0.0),
            lane(20.0, 0.0, 21.0, 0.0),
            lane(10.0, 0.0, 11.0, 0.0),
            lane(30.0, 0.0, 31.0, 0.0),
        ];
        let mut seq = lanes.clone();
        let before = lane_sequence_cost(&seq, Vec2::ZERO);
        two_opt(&mut seq, Vec2::ZERO);
        assert!(lane_sequence_cost(&seq, Vec2::ZERO) < before);
    }

    #[test]
    fn empty_input() {
        assert!(order_lanes(&[], Vec2::ZERO).is_empty());
    }
}
