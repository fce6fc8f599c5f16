//! Wind and current as queryable 2-D vector fields.
//!
//! Two implementations sit behind [`ForceField`]: closed-form synthetic fields
//! used as test oracles, and [`GpForceMap`], a Gaussian-process map fitted to
//! scattered measurements. The map models the east and north components as
//! two independent zero-mean scalar GPs sharing one Matérn 3/2 kernel, so
//! speed and direction are derived at query time and never wrap around.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{LocalPoint, Vec2};

/// Largest training set accepted by [`fit_gp`].
pub const MAX_TRAINING_POINTS: usize = 2000;

/// Sanity bound on any measured force vector, m/s.
pub const MAX_FORCE_SPEED: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("negative distance passed to kernel: {0}")]
    NegativeDistance(f64),
    #[error("invalid hyperparameter {name}: {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("invalid sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },
    #[error("no training samples")]
    Empty,
    #[error("{0} training samples exceed the limit of {MAX_TRAINING_POINTS}")]
    TooManySamples(usize),
    #[error("samples mix wind and current measurements")]
    MixedSources,
    #[error("kernel matrix is not positive definite; increase noise_std (currently {noise_std})")]
    Factorization { noise_std: f64 },
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("hyperparameter selection needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("every hyperparameter candidate failed to factorize")]
    AllCandidatesFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceSource {
    Wind,
    Current,
}

impl ForceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ForceSource::Wind => "wind",
            ForceSource::Current => "current",
        }
    }
}

impl std::fmt::Display for ForceSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ForceSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wind" => Ok(ForceSource::Wind),
            "current" => Ok(ForceSource::Current),
            other => Err(format!("unknown force source `{other}` (expected wind|current)")),
        }
    }
}

/// One world-frame measurement of wind or current velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub position: LocalPoint,
    pub vector: Vec2,
    pub source: ForceSource,
    pub time: f64,
}

impl ForceSample {
    pub fn validate(&self) -> Result<(), String> {
        if !self.position.is_finite() {
            return Err("position is not finite".into());
        }
        if !self.vector.is_finite() {
            return Err("vector is not finite".into());
        }
        if self.vector.norm() > MAX_FORCE_SPEED {
            return Err(format!(
                "speed {:.2} m/s exceeds the {MAX_FORCE_SPEED} m/s sanity bound",
                self.vector.norm()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    /// Prior standard deviation of each component, m/s.
    pub signal_std: f64,
    /// Matérn length scale, meters.
    pub length_scale: f64,
    /// Observation noise standard deviation, m/s.
    pub noise_std: f64,
}

impl GpHyperparams {
    pub fn new(signal_std: f64, length_scale: f64, noise_std: f64) -> Result<Self, FieldError> {
        let h = Self {
            signal_std,
            length_scale,
            noise_std,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let bad = |name, value: f64| FieldError::InvalidHyperparameter { name, value };
        if !(self.signal_std > 0.0 && self.signal_std.is_finite()) {
            return Err(bad("signal_std", self.signal_std));
        }
        if !(1.0..=1.0e5).contains(&self.length_scale) {
            return Err(bad("length_scale", self.length_scale));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(bad("noise_std", self.noise_std));
        }
        Ok(())
    }

    /// Data-driven defaults: signal std from the sample values, length scale a
    /// quarter of the bounding-box diagonal, noise a tenth of the signal.
    ///
    /// The prior mean is zero, so the signal std is taken about zero (the RMS
    /// of the component values); a constant field then still gets a usable
    /// prior instead of a zero one.
    pub fn from_samples(samples: &[ForceSample]) -> Result<Self, FieldError> {
        if samples.is_empty() {
            return Err(FieldError::Empty);
        }
        let n = samples.len() as f64;
        let mean_sq = samples.iter().map(|s| s.vector.norm_sq()).sum::<f64>() / (2.0 * n);
        let signal_std = mean_sq.sqrt().max(1e-3);

        let (mut lo, mut hi) = (samples[0].position, samples[0].position);
        for s in samples {
            lo = Vec2::new(lo.x.min(s.position.x), lo.y.min(s.position.y));
            hi = Vec2::new(hi.x.max(s.position.x), hi.y.max(s.position.y));
        }
        let length_scale = ((hi - lo).norm() / 4.0).clamp(1.0, 1.0e5);
        Self::new(signal_std, length_scale, 0.1 * signal_std)
    }
}

/// Matérn ν=3/2 covariance: σ²(1 + √3 r/ℓ)·exp(−√3 r/ℓ).
pub fn matern32(r: f64, h: &GpHyperparams) -> Result<f64, FieldError> {
    if r < 0.0 || r.is_nan() {
        return Err(FieldError::NegativeDistance(r));
    }
    Ok(matern32_unchecked(r, h))
}

#[inline]
fn matern32_unchecked(r: f64, h: &GpHyperparams) -> f64 {
    let s = 3f64.sqrt() * r / h.length_scale;
    h.signal_std * h.signal_std * (1.0 + s) * (-s).exp()
}

/// A queryable world-frame velocity field.
pub trait ForceField: Send + Sync {
    /// Field velocity at `p`, m/s.
    fn query(&self, p: LocalPoint) -> Vec2;

    /// Per-component variance, when the field carries uncertainty.
    fn variance(&self, _p: LocalPoint) -> Option<Vec2> {
        None
    }
}

impl<F: ForceField + ?Sized> ForceField for &F {
    fn query(&self, p: LocalPoint) -> Vec2 {
        (**self).query(p)
    }
    fn variance(&self, p: LocalPoint) -> Option<Vec2> {
        (**self).variance(p)
    }
}

impl<F: ForceField + ?Sized> ForceField for std::sync::Arc<F> {
    fn query(&self, p: LocalPoint) -> Vec2 {
        (**self).query(p)
    }
    fn variance(&self, p: LocalPoint) -> Option<Vec2> {
        (**self).variance(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Closed-form fields for tests and desk experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SyntheticField {
    /// The same vector everywhere.
    Uniform { v: Vec2 },
    /// Flow along `axis` whose speed grows linearly with the other coordinate:
    /// for `axis = X`, v = base + (rate·y, 0).
    Shear { axis: Axis, rate: f64, base: Vec2 },
    /// Counter-clockwise swirl with speed strength/r, capped at `strength` inside r < 1.
    Vortex { center: LocalPoint, strength: f64 },
}

impl SyntheticField {
    pub fn uniform(v: Vec2) -> Self {
        SyntheticField::Uniform { v }
    }

    pub fn zero() -> Self {
        SyntheticField::Uniform { v: Vec2::ZERO }
    }
}

impl ForceField for SyntheticField {
    fn query(&self, p: LocalPoint) -> Vec2 {
        match *self {
            SyntheticField::Uniform { v } => v,
            SyntheticField::Shear { axis, rate, base } => match axis {
                Axis::X => base + Vec2::new(rate * p.y, 0.0),
                Axis::Y => base + Vec2::new(0.0, rate * p.x),
            },
            SyntheticField::Vortex { center, strength } => {
                let d = p - center;
                let r = d.norm();
                if r == 0.0 {
                    return Vec2::ZERO;
                }
                let speed = if r < 1.0 { strength } else { strength / r };
                d.perp() * (speed / r)
            }
        }
    }
}

/// Fitted Gaussian-process force map.
#[derive(Debug, Clone)]
pub struct GpForceMap {
    hyper: GpHyperparams,
    source: ForceSource,
    training_points: Vec<LocalPoint>,
    training_values: Vec<Vec2>,
    chol: Cholesky<f64, Dyn>,
    alpha_x: DVector<f64>,
    alpha_y: DVector<f64>,
}

fn kernel_matrix(points: &[LocalPoint], h: &GpHyperparams) -> DMatrix<f64> {
    let n = points.len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    let noise = h.noise_std * h.noise_std;
    for i in 0..n {
        k[(i, i)] = matern32_unchecked(0.0, h) + noise;
        for j in 0..i {
            let v = matern32_unchecked(points[i].distance(points[j]), h);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn check_samples(samples: &[ForceSample]) -> Result<ForceSource, FieldError> {
    let first = samples.first().ok_or(FieldError::Empty)?;
    if samples.len() > MAX_TRAINING_POINTS {
        return Err(FieldError::TooManySamples(samples.len()));
    }
    for (index, s) in samples.iter().enumerate() {
        s.validate()
            .map_err(|reason| FieldError::InvalidSample { index, reason })?;
        if s.source != first.source {
            return Err(FieldError::MixedSources);
        }
    }
    Ok(first.source)
}

/// Fits one scalar GP per velocity component on the given samples.
pub fn fit_gp(samples: &[ForceSample], h: GpHyperparams) -> Result<GpForceMap, FieldError> {
    h.validate()?;
    let source = check_samples(samples)?;
    let points: Vec<LocalPoint> = samples.iter().map(|s| s.position).collect();
    let values: Vec<Vec2> = samples.iter().map(|s| s.vector).collect();

    let chol = Cholesky::new(kernel_matrix(&points, &h)).ok_or(FieldError::Factorization {
        noise_std: h.noise_std,
    })?;
    let alpha_x = chol.solve(&DVector::from_iterator(values.len(), values.iter().map(|v| v.x)));
    let alpha_y = chol.solve(&DVector::from_iterator(values.len(), values.iter().map(|v| v.y)));
    Ok(GpForceMap {
        hyper: h,
        source,
        training_points: points,
        training_values: values,
        chol,
        alpha_x,
        alpha_y,
    })
}

impl GpForceMap {
    pub fn hyper(&self) -> &GpHyperparams {
        &self.hyper
    }

    pub fn source(&self) -> ForceSource {
        self.source
    }

    pub fn training_points(&self) -> &[LocalPoint] {
        &self.training_points
    }

    pub fn training_values(&self) -> &[Vec2] {
        &self.training_values
    }

    fn cross_covariance(&self, p: LocalPoint) -> DVector<f64> {
        DVector::from_iterator(
            self.training_points.len(),
            self.training_points
                .iter()
                .map(|q| matern32_unchecked(p.distance(*q), &self.hyper)),
        )
    }

    /// Posterior mean and per-component variance of the latent field at `p`.
    pub fn predict(&self, p: LocalPoint) -> (Vec2, Vec2) {
        let ks = self.cross_covariance(p);
        let mean = Vec2::new(ks.dot(&self.alpha_x), ks.dot(&self.alpha_y));
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&ks)
            .expect("cholesky factor has a non-zero diagonal");
        let var = (matern32_unchecked(0.0, &self.hyper) - v.norm_squared()).max(0.0);
        (mean, Vec2::new(var, var))
    }

    /// Posterior mean only; skips the triangular solve.
    pub fn predict_mean(&self, p: LocalPoint) -> Vec2 {
        let ks = self.cross_covariance(p);
        Vec2::new(ks.dot(&self.alpha_x), ks.dot(&self.alpha_y))
    }

    /// Summed (x and y) log marginal likelihood of the training data.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.training_points.len() as f64;
        let log_det_half: f64 = self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        let fit_x: f64 = self
            .training_values
            .iter()
            .zip(self.alpha_x.iter())
            .map(|(v, a)| v.x * a)
            .sum();
        let fit_y: f64 = self
            .training_values
            .iter()
            .zip(self.alpha_y.iter())
            .map(|(v, a)| v.y * a)
            .sum();
        let per_component_const = -log_det_half - 0.5 * n * (2.0 * PI).ln();
        -0.5 * (fit_x + fit_y) + 2.0 * per_component_const
    }

    /// Speed (m/s) and direction (radians CCW from east) of the posterior mean.
    pub fn speed_direction(&self, p: LocalPoint) -> (f64, f64) {
        let m = self.predict_mean(p);
        (m.norm(), m.angle())
    }
}

impl ForceField for GpForceMap {
    fn query(&self, p: LocalPoint) -> Vec2 {
        self.predict_mean(p)
    }

    fn variance(&self, p: LocalPoint) -> Option<Vec2> {
        Some(self.predict(p).1)
    }
}

/// Picks the grid entry with the largest summed log marginal likelihood.
///
/// Ties go to the smaller length scale, then to the earlier entry. Candidates
/// that fail to factorize are skipped.
pub fn fit_hyperparams(
    samples: &[ForceSample],
    grid: &[GpHyperparams],
) -> Result<GpHyperparams, FieldError> {
    if grid.is_empty() {
        return Err(FieldError::EmptyGrid);
    }
    if samples.len() < 3 {
        return Err(FieldError::TooFewSamples(samples.len()));
    }
    check_samples(samples)?;

    let mut best: Option<(f64, GpHyperparams)> = None;
    for h in grid {
        let lml = match fit_gp(samples, *h) {
            Ok(map) => map.log_marginal_likelihood(),
            Err(FieldError::Factorization { .. }) => continue,
            Err(e) => return Err(e),
        };
        let better = match &best {
            None => true,
            Some((b, bh)) => lml > *b || (lml == *b && h.length_scale < bh.length_scale),
        };
        if better {
            best = Some((lml, *h));
        }
    }
    best.map(|(_, h)| h).ok_or(FieldError::AllCandidatesFailed)
}

/// One cell of a rasterized force map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub position: LocalPoint,
    pub mean: Vec2,
    pub variance: Vec2,
}

/// Evaluates the map on a regular grid covering `[min, max]` with spacing `step`.
/// Rows advance in y, columns in x.
pub fn rasterize(map: &GpForceMap, min: LocalPoint, max: LocalPoint, step: f64) -> Vec<GridCell> {
    assert!(step > 0.0, "grid step must be positive");
    let nx = ((max.x - min.x) / step).floor().max(0.0) as usize + 1;
    let ny = ((max.y - min.y) / step).floor().max(0.0) as usize + 1;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(min.x + i as f64 * step, min.y + j as f64 * step);
            let (mean, variance) = map.predict(p);
            cells.push(GridCell {
                position: p,
                mean,
                variance,
            });
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(sigma: f64, ell: f64, noise: f64) -> GpHyperparams {
        GpHyperparams::new(sigma, ell, noise).unwrap()
    }

    fn sample(x: f64, y: f64, v: Vec2) -> ForceSample {
        ForceSample {
            position: Vec2::new(x, y),
            vector: v,
            source: ForceSource::Wind,
            time: 0.0,
        }
    }

    #[test]
    fn kernel_values() {
        assert_eq!(matern32(0.0, &hp(2.0, 5.0, 0.1)).unwrap(), 4.0);
        // (1+√3)e^{−√3}, evaluated independently
        let k = matern32(5.0, &hp(1.0, 5.0, 0.1)).unwrap();
        assert!((k - 0.483_357_724_596_507_7).abs() < 1e-12, "{k}");
        assert!(matern32(50.0, &hp(1.0, 5.0, 0.1)).unwrap() < 1e-6);
        assert!(matches!(
            matern32(-1.0, &hp(1.0, 5.0, 0.1)),
            Err(FieldError::NegativeDistance(_))
        ));
    }

    #[test]
    fn kernel_monotone_decreasing() {
        let h = hp(1.3, 7.0, 0.1);
        let mut prev = matern32(0.0, &h).unwrap();
        for i in 1..200 {
            let k = matern32(i as f64 * 0.5, &h).unwrap();
            assert!(k < prev);
            prev = k;
        }
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(GpHyperparams::new(0.0, 10.0, 0.1).is_err());
        assert!(GpHyperparams::new(1.0, 0.5, 0.1).is_err());
        assert!(GpHyperparams::new(1.0, 2.0e5, 0.1).is_err());
        assert!(GpHyperparams::new(1.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn single_sample_interpolates() {
        let map = fit_gp(&[sample(0.0, 0.0, Vec2::new(1.0, 0.0))], hp(1.0, 10.0, 1e-6)).unwrap();
        let (m, _) = map.predict(Vec2::ZERO);
        assert!((m.x - 1.0).abs() < 1e-4 && m.y.abs() < 1e-4, "{m}");
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let map = fit_gp(&[sample(0.0, 0.0, Vec2::new(1.0, -2.0))], hp(0.7, 10.0, 0.05)).unwrap();
        let (m, v) = map.predict(Vec2::new(1000.0, 0.0));
        assert!(m.norm() < 1e-9);
        assert!((v.x - 0.49).abs() < 1e-9 && (v.y - 0.49).abs() < 1e-9);
    }

    #[test]
    fn symmetric_midpoint() {
        let v = Vec2::new(0.3, 0.8);
        let map = fit_gp(
            &[sample(-5.0, 0.0, v), sample(5.0, 0.0, v)],
            hp(1.0, 10.0, 0.01),
        )
        .unwrap();
        let left = map.predict_mean(Vec2::new(-1.0, 0.0));
        let right = map.predict_mean(Vec2::new(1.0, 0.0));
        assert!((left - right).norm() < 1e-12);
        let mid = map.predict_mean(Vec2::ZERO);
        // between the training values and the zero prior, same direction as v
        assert!(mid.cross(v).abs() < 1e-12 && mid.dot(v) > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(fit_gp(&[], hp(1.0, 10.0, 0.1)).unwrap_err(), FieldError::Empty);
        let mut s = sample(0.0, 0.0, Vec2::ZERO);
        s.source = ForceSource::Current;
        let mixed = [sample(0.0, 0.0, Vec2::ZERO), s];
        assert_eq!(fit_gp(&mixed, hp(1.0, 10.0, 0.1)).unwrap_err(), FieldError::MixedSources);
        let fast = [sample(0.0, 0.0, Vec2::new(70.0, 0.0))];
        assert!(matches!(
            fit_gp(&fast, hp(1.0, 10.0, 0.1)),
            Err(FieldError::InvalidSample { index: 0, .. })
        ));
        let many: Vec<_> = (0..2001).map(|i| sample(i as f64, 0.0, Vec2::ZERO)).collect();
        assert_eq!(fit_gp(&many, hp(1.0, 10.0, 0.1)).unwrap_err(), FieldError::TooManySamples(2001));
    }

    #[test]
    fn duplicate_positions_are_regularized() {
        let s = [sample(1.0, 1.0, Vec2::new(1.0, 0.0)), sample(1.0, 1.0, Vec2::new(1.2, 0.0))];
        let map = fit_gp(&s, hp(1.0, 10.0, 0.1)).unwrap();
        let m = map.predict_mean(Vec2::new(1.0, 1.0));
        assert!(m.x > 1.0 && m.x < 1.2);
    }

    #[test]
    fn synthetic_fields() {
        let u = SyntheticField::uniform(Vec2::new(1.0, 0.0));
        assert_eq!(u.query(Vec2::new(123.0, -4.0)), Vec2::new(1.0, 0.0));
        let shear = SyntheticField::Shear {
            axis: Axis::X,
            rate: 0.1,
            base: Vec2::ZERO,
        };
        let v = shear.query(Vec2::new(-3.0, 10.0));
        assert!((v.x - 1.0).abs() < 1e-12 && v.y == 0.0);
        let vortex = SyntheticField::Vortex {
            center: Vec2::ZERO,
            strength: 2.0,
        };
        let v = vortex.query(Vec2::new(1.0, 0.0));
        assert!(v.x.abs() < 1e-12 && (v.y - 2.0).abs() < 1e-12);
        let v = vortex.query(Vec2::new(0.0, 4.0));
        assert!((v.x + 0.5).abs() < 1e-12 && v.y.abs() < 1e-12);
        let v = vortex.query(Vec2::new(0.5, 0.0));
        assert!((v.norm() - 2.0).abs() < 1e-12);
        assert_eq!(vortex.query(Vec2::ZERO), Vec2::ZERO);
    }

    #[test]
    fn selection_tie_break() {
        let s = [
            sample(0.0, 0.0, Vec2::new(1.0, 0.0)),
            sample(10.0, 0.0, Vec2::new(1.1, 0.0)),
            sample(0.0, 10.0, Vec2::new(0.9, 0.0)),
        ];
        let a = hp(1.0, 20.0, 0.1);
        assert_eq!(fit_hyperparams(&s, &[a]).unwrap(), a);
        let b = hp(1.0, 20.0, 0.1);
        let picked = fit_hyperparams(&s, &[a, b]).unwrap();
        assert_eq!(picked, a);
        assert_eq!(fit_hyperparams(&s, &[]).unwrap_err(), FieldError::EmptyGrid);
        assert_eq!(fit_hyperparams(&s[..2], &[a]).unwrap_err(), FieldError::TooFewSamples(2));
    }

    #[test]
    fn default_hyperparams() {
        let s = [
            sample(0.0, 0.0, Vec2::new(0.5, -0.5)),
            sample(40.0, 30.0, Vec2::new(0.5, -0.5)),
        ];
        let h = GpHyperparams::from_samples(&s).unwrap();
        assert!((h.signal_std - 0.5).abs() < 1e-12);
        assert!((h.length_scale - 12.5).abs() < 1e-12);
        assert!((h.noise_std - 0.05).abs() < 1e-12);
    }
}
