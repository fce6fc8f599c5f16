//! River survey patterns over a constant-width corridor.

use super::{positive, CoverageError, CoveragePlan, Lane, Pattern, RiverCorridor};

/// Lanes parallel to the centerline, joined serpentine at the corridor ends.
///
/// `⌈width/spacing⌉` lanes at offsets centered about the centerline, starting
/// from the right bank. A spacing of at least the width gives the centerline
/// alone.
pub fn l_cover(corridor: &RiverCorridor, spacing: f64, speed: f64) -> Result<CoveragePlan, CoverageError> {
    positive("spacing", spacing)?;
    positive("speed", speed)?;
    let count = ((corridor.width() / spacing) - 1e-9).ceil().max(1.0) as usize;
    let lanes = (0..count)
        .map(|i| {
            let offset = (i as f64 - 0.5 * (count - 1) as f64) * spacing;
            let lane = Lane::new(corridor.offset_polyline(offset));
            if i % 2 == 0 {
                lane
            } else {
                lane.reversed()
            }
        })
        .collect();
    Ok(CoveragePlan::single(Pattern::L, spacing, speed, lanes))
}

/// Arclength stations `0, s, 2s, …` plus the far end when it is off the grid.
fn stations(length: f64, spacing: f64) -> Vec<f64> {
    let steps = ((length / spacing) + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=steps).map(|k| k as f64 * spacing).collect();
    let last = *out.last().expect("at least station 0");
    if length - last > 1e-9 {
        out.push(length);
    }
    out
}

/// Bank-to-bank transects every `spacing` meters of centerline, serpentine.
pub fn t_cover(corridor: &RiverCorridor, spacing: f64, speed: f64) -> Result<CoveragePlan, CoverageError> {
    positive("spacing", spacing)?;
    positive("speed", speed)?;
    let half = 0.5 * corridor.width();
    let lanes = stations(corridor.length(), spacing)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let (p, t) = corridor.station(s);
            let n = t.perp();
            let (right, left) = (p - n * half, p + n * half);
            if i % 2 == 0 {
                Lane::segment(right, left)
            } else {
                Lane::segment(left, right)
            }
        })
        .collect();
    Ok(CoveragePlan::single(Pattern::T, spacing, speed, lanes))
}

/// One downstream pass alternating between the banks, starting on the right.
pub fn z_cover(corridor: &RiverCorridor, along_spacing: f64, speed: f64) -> Result<CoveragePlan, CoverageError> {
    positive("along_spacing", along_spacing)?;
    positive("speed", speed)?;
    let half = 0.5 * corridor.width();
    let points = stations(corridor.length(), along_spacing)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let (p, t) = corridor.station(s);
            let side = if i % 2 == 0 { -half } else { half };
            p + t.perp() * side
        })
        .collect();
    Ok(CoveragePlan::single(Pattern::Z, along_spacing, speed, vec![Lane::new(points)]))
}
