//! Parallel-lane sweeps over a lake polygon.

use super::{positive, CoverageError, CoveragePlan, LakeRegion, Lane, Pattern};
use crate::geo::Vec2;

/// Sweep lanes grouped by scanline, in sweep order.
///
/// Lanes run parallel to `orientation` (radians, CCW from east). Scanlines sit
/// `spacing` apart, centered across the region's extent so the outermost
/// lanes are inset by half a spacing when the extent is a whole number of
/// spacings. Each scanline is clipped against the polygon and may yield
/// several segments on a non-convex outline; every segment is returned
/// pointing along `orientation`.
pub fn sweep_lanes(
    region: &LakeRegion,
    spacing: f64,
    orientation: f64,
) -> Result<Vec<Vec<Lane>>, CoverageError> {
    positive("spacing", spacing)?;
    if !orientation.is_finite() {
        return Err(CoverageError::NonPositive {
            name: "orientation",
            value: orientation,
        });
    }
    let local = region.rotated(-orientation);
    let b = local.boundary();
    let (lo, hi) = b
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let extent = hi - lo;
    let count = ((extent / spacing) - 1e-9).ceil().max(1.0) as usize;
    let first = lo + 0.5 * (extent - (count - 1) as f64 * spacing);

    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let y = first + i as f64 * spacing;
        let mut xs: Vec<f64> = Vec::new();
        for k in 0..b.len() {
            let (p, q) = (b[k], b[(k + 1) % b.len()]);
            // half-open rule so a vertex on the scanline is counted once
            if (p.y <= y && y < q.y) || (q.y <= y && y < p.y) {
                xs.push(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
            }
        }
        xs.sort_by(f64::total_cmp);
        let row: Vec<Lane> = xs
            .chunks_exact(2)
            .filter(|c| c[1] - c[0] > 1e-9)
            .map(|c| {
                Lane::segment(
                    Vec2::new(c[0], y).rotate(orientation),
                    Vec2::new(c[1], y).rotate(orientation),
                )
            })
            .collect();
        if !row.is_empty() {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        return Err(CoverageError::NoLanes);
    }
    Ok(rows)
}

/// Serpentine order over scanlines: even rows forward, odd rows reversed.
pub(crate) fn serpentine(rows: &[Vec<Lane>], start_forward: bool) -> Vec<Lane> {
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let forward = (i % 2 == 0) == start_forward;
        if forward {
            out.extend(row.iter().cloned());
        } else {
            out.extend(row.iter().rev().map(Lane::reversed));
        }
    }
    out
}

/// Single-robot back-and-forth sweep of a lake.
pub fn boustrophedon(
    region: &LakeRegion,
    spacing: f64,
    orientation: f64,
    speed: f64,
) -> Result<CoveragePlan, CoverageError> {
    positive("speed", speed)?;
    let rows = sweep_lanes(region, spacing, orientation)?;
    Ok(CoveragePlan::single(
        Pattern::Boustrophedon,
        spacing,
        speed,
        serpentine(&rows, true),
    ))
}
