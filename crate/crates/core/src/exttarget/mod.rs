//! Extended-target localization: bistatic angle/time measurements of an
//! elliptical target, closed-form reflection-point recovery, and
//! Gaussian-process contour regression.
//!
//! The geometry is planar: the ring of terminals and the target share one
//! altitude, and every operation here works in that plane. The ground
//! truth scattering point of a transmitter/receiver pair is the bistatic
//! specular (Fermat) point — the contour point minimizing the two-hop
//! path — found on a coarse contour grid and refined by golden-section
//! search.

mod gp;

pub use gp::{periodic_kernel, ContourGp, GpParams};

use serde::{Deserialize, Serialize};

use crate::channel::SPEED_OF_LIGHT_M_S;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scenario::{Node, NodeFeatures, NodeId, NodeRole, Position3};

/// Coarse contour samples scanned before golden-section refinement.
const COARSE_SAMPLES: usize = 3600;
/// Golden-section parameter tolerance (radians).
const REFINE_TOL: f64 = 1e-10;
/// Angular jitter applied to the ring placement.
pub const DEFAULT_RING_JITTER_DEG: f64 = 5.0;

fn default_aod_sigma() -> f64 {
    0.5f64.to_radians()
}
fn default_toa_sigma() -> f64 {
    // one meter of bistatic range error
    3.336e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    #[serde(default = "default_aod_sigma")]
    pub aod_sigma_rad: f64,
    #[serde(default = "default_toa_sigma")]
    pub toa_sigma_s: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self { aod_sigma_rad: default_aod_sigma(), toa_sigma_s: default_toa_sigma() }
    }
}

impl NoiseParams {
    pub fn zero() -> Self {
        Self { aod_sigma_rad: 0.0, toa_sigma_s: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.aod_sigma_rad < 0.0 || self.toa_sigma_s < 0.0 {
            return Err(Error::InvalidConfig("noise sigmas must be >= 0".into()));
        }
        Ok(())
    }
}

/// Elliptical extended target in the shared-altitude plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseTarget {
    pub center: Position3,
    pub semi_major_m: f64,
    pub semi_minor_m: f64,
    pub orientation_rad: f64,
}

impl EllipseTarget {
    pub fn new(center: Position3, a: f64, b: f64, orientation_rad: f64) -> Result<Self> {
        let t = Self { center, semi_major_m: a, semi_minor_m: b, orientation_rad };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.semi_minor_m > 0.0 && self.semi_major_m >= self.semi_minor_m) {
            return Err(Error::InvalidConfig(format!(
                "ellipse axes must satisfy a >= b > 0, got a={} b={}",
                self.semi_major_m, self.semi_minor_m
            )));
        }
        Ok(())
    }

    /// Contour point at ellipse parameter `t` (not the polar angle).
    pub fn contour_point(&self, t: f64) -> Position3 {
        let (sin_o, cos_o) = self.orientation_rad.sin_cos();
        let ex = self.semi_major_m * t.cos();
        let ey = self.semi_minor_m * t.sin();
        Position3::new(
            self.center.x + ex * cos_o - ey * sin_o,
            self.center.y + ex * sin_o + ey * cos_o,
            self.center.z,
        )
    }

    /// Quadratic form value; < 1 strictly inside, 1 on the contour.
    fn level(&self, p: &Position3) -> f64 {
        let (sin_o, cos_o) = self.orientation_rad.sin_cos();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let u = dx * cos_o + dy * sin_o;
        let v = -dx * sin_o + dy * cos_o;
        (u / self.semi_major_m).powi(2) + (v / self.semi_minor_m).powi(2)
    }

    pub fn contains(&self, p: &Position3) -> bool {
        self.level(p) < 1.0
    }

    /// Radius of the contour measured from the true center at polar
    /// angle `phi` (in world coordinates).
    pub fn radius_toward(&self, phi: f64) -> f64 {
        let (sin_p, cos_p) = (phi - self.orientation_rad).sin_cos();
        let a = self.semi_major_m;
        let b = self.semi_minor_m;
        a * b / ((b * cos_p).powi(2) + (a * sin_p).powi(2)).sqrt()
    }
}

/// One bistatic observation: departure angle at the transmitter and
/// two-hop propagation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub tx_id: NodeId,
    pub rx_id: NodeId,
    pub aod_rad: f64,
    pub toa_s: f64,
}

/// Terminals placed on a ring around the target; the first
/// `n_transmitters` ids probe, the rest listen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingDeployment {
    pub nodes: Vec<Node>,
    pub n_transmitters: usize,
}

impl RingDeployment {
    pub fn transmitters(&self) -> &[Node] {
        &self.nodes[..self.n_transmitters]
    }

    pub fn receivers(&self) -> &[Node] {
        &self.nodes[self.n_transmitters..]
    }
}

/// Place `n` terminals at the target's altitude, equally spaced on a ring
/// of `ring_radius_m` around the center with a seeded angular jitter of
/// up to ±5 degrees. The first `ceil(n/2)` ids are transmitters.
///
/// Transmitters take the even ring slots and receivers the odd ones, so
/// probing and listening viewpoints alternate around the target; a
/// contiguous transmitter arc would make most pairs near-forward-scatter
/// and ruin the reflection geometry.
pub fn place_emts_ring(
    n: usize,
    target: &EllipseTarget,
    ring_radius_m: f64,
    seed: u64,
) -> Result<RingDeployment> {
    place_emts_ring_with_jitter(n, target, ring_radius_m, DEFAULT_RING_JITTER_DEG, seed)
}

/// [`place_emts_ring`] with an explicit jitter amplitude in degrees
/// (zero gives exact equal spacing).
pub fn place_emts_ring_with_jitter(
    n: usize,
    target: &EllipseTarget,
    ring_radius_m: f64,
    jitter_deg: f64,
    seed: u64,
) -> Result<RingDeployment> {
    if n < 2 {
        return Err(Error::ContractViolation(format!("ring needs at least 2 terminals, got {n}")));
    }
    if ring_radius_m <= target.semi_major_m {
        return Err(Error::ContractViolation(
            "ring radius must exceed the target's semi-major axis".into(),
        ));
    }
    target.validate()?;
    let n_transmitters = n.div_ceil(2);
    let mut rng = SplitMix64::new(seed);
    let jitter = jitter_deg.to_radians();
    let nodes = (0..n)
        .map(|i| {
            // interleave: transmitter i -> slot 2i, receiver j -> slot 2j+1
            let slot = if i < n_transmitters { 2 * i } else { 2 * (i - n_transmitters) + 1 };
            let angle = std::f64::consts::TAU * slot as f64 / n as f64
                + if jitter > 0.0 { rng.uniform(-jitter, jitter) } else { 0.0 };
            Node {
                id: NodeId(i as u32),
                role: NodeRole::EmtUav,
                pos: Position3::new(
                    target.center.x + ring_radius_m * angle.cos(),
                    target.center.y + ring_radius_m * angle.sin(),
                    target.center.z,
                ),
                features: NodeFeatures::default(),
            }
        })
        .collect();
    Ok(RingDeployment { nodes, n_transmitters })
}

fn require_plane(points: &[&Position3], z: f64) -> Result<()> {
    for p in points {
        if (p.z - z).abs() > 1e-9 {
            return Err(Error::ContractViolation(format!(
                "all geometry must share the target altitude {z}, found z = {}",
                p.z
            )));
        }
    }
    Ok(())
}

fn planar(p: &Position3) -> (f64, f64) {
    (p.x, p.y)
}

fn path_length(tx: (f64, f64), p: &Position3, rx: (f64, f64)) -> f64 {
    let d1 = ((p.x - tx.0).powi(2) + (p.y - tx.1).powi(2)).sqrt();
    let d2 = ((p.x - rx.0).powi(2) + (p.y - rx.1).powi(2)).sqrt();
    d1 + d2
}

/// Contour point minimizing `|tx - p| + |p - rx|`: the bistatic specular
/// point. Found by scanning 3600 uniformly spaced contour parameters and
/// refining the best bracket with golden-section search to 1e-10. Both
/// endpoints must lie outside the ellipse (and at its altitude).
///
/// When the baseline segment crosses the ellipse the minimizer sits on
/// the chord and the bistatic path collapses onto the baseline (forward
/// scatter); [`bistatic_path_excess`] measures how far a pair is from
/// that degeneracy.
pub fn specular_point(tx: &Position3, rx: &Position3, target: &EllipseTarget) -> Result<Position3> {
    target.validate()?;
    require_plane(&[tx, rx], target.center.z)?;
    if target.contains(tx) || target.contains(rx) {
        return Err(Error::DegenerateGeometry(
            "transmitter and receiver must lie outside the target contour".into(),
        ));
    }
    let txp = planar(tx);
    let rxp = planar(rx);
    let f = |t: f64| path_length(txp, &target.contour_point(t), rxp);

    let step = std::f64::consts::TAU / COARSE_SAMPLES as f64;
    let mut best_t = 0.0;
    let mut best_v = f64::INFINITY;
    for i in 0..COARSE_SAMPLES {
        let t = i as f64 * step;
        let v = f(t);
        if v < best_v {
            best_v = v;
            best_t = t;
        }
    }

    // golden-section refinement inside the bracketing grid cell
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > REFINE_TOL {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    Ok(target.contour_point(0.5 * (lo + hi)))
}

/// Bistatic path length at the specular point minus the direct baseline.
///
/// Zero means forward scatter: the angle/time pair carries no resolvable
/// reflection point, and inversion degenerates into 0/0. Pairs are only
/// informative when this excess clearly exceeds the range-noise scale.
pub fn bistatic_path_excess(
    tx: &Position3,
    rx: &Position3,
    target: &EllipseTarget,
) -> Result<f64> {
    let p = specular_point(tx, rx, target)?;
    Ok(path_length(planar(tx), &p, planar(rx)) - tx.planar_distance_to(rx))
}

/// Simulate one bistatic observation: specular ground truth plus Gaussian
/// noise (the departure-angle draw first, then the propagation-time draw),
/// with the time clamped to the direct-path feasibility bound.
pub fn simulate_measurement(
    tx: &Node,
    rx: &Node,
    target: &EllipseTarget,
    noise: &NoiseParams,
    rng: &mut SplitMix64,
) -> Result<Measurement> {
    noise.validate()?;
    let p = specular_point(&tx.pos, &rx.pos, target)?;
    let aod_true = (p.y - tx.pos.y).atan2(p.x - tx.pos.x);
    let toa_true = path_length(planar(&tx.pos), &p, planar(&rx.pos)) / SPEED_OF_LIGHT_M_S;
    let aod = aod_true + rng.normal(0.0, noise.aod_sigma_rad);
    let toa = toa_true + rng.normal(0.0, noise.toa_sigma_s);
    let direct = tx.pos.planar_distance_to(&rx.pos) / SPEED_OF_LIGHT_M_S;
    Ok(Measurement { tx_id: tx.id, rx_id: rx.id, aod_rad: aod, toa_s: toa.max(direct) })
}

/// Invert one measurement to a reflection point in closed form.
///
/// With bistatic range `R = c * toa`, baseline `d = rx - tx`, and unit
/// departure direction `u`, the range along the ray is
/// `r1 = (R^2 - |d|^2) / (2 (R - u . d))`, positive whenever `R > |d|`
/// since `u . d <= |d| < R`.
pub fn estimate_reflection_point(
    tx: &Position3,
    rx: &Position3,
    meas: &Measurement,
) -> Result<Position3> {
    let range = SPEED_OF_LIGHT_M_S * meas.toa_s;
    let dx = rx.x - tx.x;
    let dy = rx.y - tx.y;
    let baseline = (dx * dx + dy * dy).sqrt();
    if range <= baseline {
        return Err(Error::InfeasibleMeasurement(format!(
            "bistatic range {range:.6} m does not exceed the {baseline:.6} m baseline"
        )));
    }
    let (uy, ux) = meas.aod_rad.sin_cos();
    let denom = 2.0 * (range - (ux * dx + uy * dy));
    if denom <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "non-positive range denominator {denom:.6}"
        )));
    }
    let r1 = (range * range - baseline * baseline) / denom;
    if r1 <= 0.0 {
        return Err(Error::DegenerateGeometry(format!("non-positive ray range {r1:.6}")));
    }
    Ok(Position3::new(tx.x + r1 * ux, tx.y + r1 * uy, tx.z))
}

/// Component-wise mean of the collected reflection points.
pub fn estimate_center(points: &[Position3]) -> Result<Position3> {
    if points.is_empty() {
        return Err(Error::ContractViolation("estimate_center needs at least one point".into()));
    }
    let n = points.len() as f64;
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for p in points {
        x += p.x;
        y += p.y;
        z += p.z;
    }
    Ok(Position3::new(x / n, y / n, z / n))
}

/// Radial contour estimate around the estimated center: a strictly
/// increasing angle grid over `[0, 2pi)` and the posterior-mean radius at
/// each grid angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourEstimate {
    pub center_hat: Position3,
    pub theta_grid: Vec<f64>,
    pub radius_hat_m: Vec<f64>,
}

/// Polar coordinates of the points about a center; errors when a point
/// coincides with the center (its angle would be undefined).
pub fn polar_about(points: &[Position3], center: &Position3) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut thetas = Vec::with_capacity(points.len());
    let mut radii = Vec::with_capacity(points.len());
    for p in points {
        let dx = p.x - center.x;
        let dy = p.y - center.y;
        let r = (dx * dx + dy * dy).sqrt();
        if r == 0.0 {
            return Err(Error::ContractViolation(
                "training points must be distinct from the center estimate".into(),
            ));
        }
        thetas.push(dy.atan2(dx));
        radii.push(r);
    }
    Ok((thetas, radii))
}

/// Fit the contour radius over angle with a periodic-kernel GP.
///
/// Points are converted to polar form about `center_hat`; the prior mean
/// is the mean training radius, and the posterior mean is evaluated on a
/// uniform grid of `grid_points` angles. Radii are clamped at zero.
pub fn gp_fit_contour(
    points: &[Position3],
    center_hat: &Position3,
    params: &GpParams,
) -> Result<ContourEstimate> {
    params.validate()?;
    if points.len() < 2 {
        return Err(Error::ContractViolation(format!(
            "contour fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    let (thetas, radii) = polar_about(points, center_hat)?;
    let model = ContourGp::fit(thetas, &radii, *params)?;

    let grid: Vec<f64> = (0..params.grid_points)
        .map(|j| std::f64::consts::TAU * j as f64 / params.grid_points as f64)
        .collect();
    let radius_hat = grid.iter().map(|&t| model.predict(t).max(0.0)).collect();
    Ok(ContourEstimate { center_hat: *center_hat, theta_grid: grid, radius_hat_m: radius_hat })
}

/// Radial contour error of an estimate against the true ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourErrorStats {
    pub mean_radial_err_m: f64,
    pub max_radial_err_m: f64,
    /// Mean of the true radii seen along the evaluated rays.
    pub mean_true_radius_m: f64,
    pub included: usize,
    pub excluded: usize,
}

/// For each grid angle, intersect the ray from the *estimated* center
/// with the *true* ellipse (nearest positive root) and compare against
/// the estimated radius. Rays that miss the ellipse are excluded and
/// counted; more than half excluded is an error.
pub fn contour_error(estimate: &ContourEstimate, truth: &EllipseTarget) -> Result<ContourErrorStats> {
    let per_theta = contour_error_rays(estimate, truth);
    let mut errs = Vec::with_capacity(per_theta.len());
    let mut true_radii = Vec::with_capacity(per_theta.len());
    let mut excluded = 0usize;
    for (j, r_true) in per_theta.iter().enumerate() {
        match r_true {
            Some(rt) => {
                errs.push((estimate.radius_hat_m[j] - rt).abs());
                true_radii.push(*rt);
            }
            None => excluded += 1,
        }
    }
    if excluded * 2 > per_theta.len() {
        return Err(Error::DegenerateGeometry(format!(
            "{excluded} of {} rays miss the true contour",
            per_theta.len()
        )));
    }
    let n = errs.len() as f64;
    Ok(ContourErrorStats {
        mean_radial_err_m: errs.iter().sum::<f64>() / n,
        max_radial_err_m: errs.iter().fold(0.0, |a: f64, &b| a.max(b)),
        mean_true_radius_m: true_radii.iter().sum::<f64>() / n,
        included: errs.len(),
        excluded,
    })
}

/// True-ellipse radius along each grid ray from the estimated center;
/// `None` where the ray misses.
pub fn contour_error_rays(estimate: &ContourEstimate, truth: &EllipseTarget) -> Vec<Option<f64>> {
    let (sin_o, cos_o) = truth.orientation_rad.sin_cos();
    let wx = estimate.center_hat.x - truth.center.x;
    let wy = estimate.center_hat.y - truth.center.y;
    // offset of the estimated center in the ellipse frame
    let ox = wx * cos_o + wy * sin_o;
    let oy = -wx * sin_o + wy * cos_o;
    let (a, b) = (truth.semi_major_m, truth.semi_minor_m);

    estimate
        .theta_grid
        .iter()
        .map(|&theta| {
            let (dy_w, dx_w) = theta.sin_cos();
            let dx = dx_w * cos_o + dy_w * sin_o;
            let dy = -dx_w * sin_o + dy_w * cos_o;
            // ((ox + t dx)/a)^2 + ((oy + t dy)/b)^2 = 1
            let qa = (dx / a).powi(2) + (dy / b).powi(2);
            let qb = 2.0 * (ox * dx / (a * a) + oy * dy / (b * b));
            let qc = (ox / a).powi(2) + (oy / b).powi(2) - 1.0;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            let t1 = (-qb - sq) / (2.0 * qa);
            let t2 = (-qb + sq) / (2.0 * qa);
            [t1, t2].into_iter().filter(|&t| t > 0.0).fold(None, |acc: Option<f64>, t| {
                Some(acc.map_or(t, |cur| cur.min(t)))
            })
        })
        .collect()
}

fn default_min_path_excess() -> f64 {
    // Inversion error scales like baseline * clearance * noise / excess.
    // On the default ring the usable pair family sits above ~180 m of
    // excess and the shallow family below ~35 m; 50 m splits them.
    50.0
}

/// Deployment and processing knobs for one localization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub n_emts: usize,
    pub ring_radius_m: f64,
    pub jitter_deg: f64,
    /// Transmitter/receiver pairs whose bistatic path exceeds the direct
    /// baseline by less than this are forward-scatter geometries and are
    /// skipped (they consume no noise draws).
    pub min_path_excess_m: f64,
    pub noise: NoiseParams,
    pub gp: GpParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_emts: 8,
            ring_radius_m: 100.0,
            jitter_deg: DEFAULT_RING_JITTER_DEG,
            min_path_excess_m: default_min_path_excess(),
            noise: NoiseParams::default(),
            gp: GpParams::default(),
        }
    }
}

/// Everything one seed of the localization pipeline produces.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub reflection_points: Vec<Position3>,
    pub center_hat: Position3,
    pub center_err_m: f64,
    pub estimate: ContourEstimate,
    pub stats: ContourErrorStats,
    /// Forward-scatter pairs skipped before measuring.
    pub skipped_pairs: usize,
    /// Measurements whose inversion failed (clamped or degenerate draws).
    pub dropped_measurements: usize,
}

/// Ring placement, all transmitter/receiver pair measurements, inversion,
/// center averaging, and the GP contour fit, end to end for one seed.
/// Ring jitter draws from sub-stream `(seed, 0)`, measurement noise from
/// sub-stream `(seed, 1)`; pairs are visited transmitter-major in id
/// order.
pub fn run_pipeline(
    target: &EllipseTarget,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<PipelineOutcome> {
    let ring_seed = SplitMix64::substream(seed, 0).next_u64();
    let ring =
        place_emts_ring_with_jitter(cfg.n_emts, target, cfg.ring_radius_m, cfg.jitter_deg, ring_seed)?;
    let mut rng = SplitMix64::substream(seed, 1);

    let mut points = Vec::new();
    let mut skipped = 0usize;
    let mut dropped = 0usize;
    for tx in ring.transmitters() {
        for rx in ring.receivers() {
            if bistatic_path_excess(&tx.pos, &rx.pos, target)? < cfg.min_path_excess_m {
                skipped += 1;
                continue;
            }
            let meas = simulate_measurement(tx, rx, target, &cfg.noise, &mut rng)?;
            match estimate_reflection_point(&tx.pos, &rx.pos, &meas) {
                Ok(p) => points.push(p),
                Err(_) => dropped += 1,
            }
        }
    }
    let center_hat = estimate_center(&points)?;
    let estimate = gp_fit_contour(&points, &center_hat, &cfg.gp)?;
    let stats = contour_error(&estimate, target)?;
    let center_err_m = center_hat.planar_distance_to(&target.center);
    Ok(PipelineOutcome {
        reflection_points: points,
        center_hat,
        center_err_m,
        estimate,
        stats,
        skipped_pairs: skipped,
        dropped_measurements: dropped,
    })
}
