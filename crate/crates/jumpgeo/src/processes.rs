//! Process constructors: Poisson clocks, exactly-verifiable jump
//! martingales, truncated α-stable drivers, pushforwards, and the tail
//! convergence classifier.
//!
//! The two martingale constructors share one design: at each jump time the
//! target is exp_x(s·r_k·V) with V uniform on the unit tangent sphere at x
//! and s = ±1 equiprobable, so every jump mark is conditionally mean-zero in
//! T_xM and the discrete integral of any covector field is a mean-zero
//! martingale by construction — no asymptotics involved. They differ only in
//! the marks they record: geodesic marks Δ = s·r_k·V (so exp_x Δ reaches the
//! target exactly), or tangent-projection marks Δ = Π_x(y − x), which on the
//! unit sphere have length sin(r_k).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{levy_constant, MapIntoManifold};
use crate::geometry::{ManifoldModel, TangentVector};
use crate::linalg::{norm, scale, sub};
use crate::paths::{DeltaPath, Interpolation, PathEvent};
use crate::rng::rng_from_seed;

/// Hard cap on simulated jump events per path.
pub const MAX_STABLE_EVENTS: usize = 10_000_000;
/// Grid cells used when Gaussian small-jump compensation is enabled.
pub const COMPENSATION_GRID_CELLS: usize = 256;

/// When the k-th jump happens.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ScheduleMode {
    /// Poisson clock with the given rate.
    PoissonTimes { rate: f64 },
    /// Explicit strictly-increasing times in (0, horizon].
    FixedTimes(Vec<f64>),
}

/// Jump schedule: a clock plus the radius family r_k = c·k^{−β}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpSchedule {
    pub mode: ScheduleMode,
    /// c in r_k = c·k^{−β}.
    pub radius_scale: f64,
    /// β in r_k = c·k^{−β}; β > ½ iff Σ r_k² < ∞.
    pub radius_decay: f64,
}

impl JumpSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.radius_scale <= 0.0 {
            return Err(Error::InvalidParameter("radius scale c must be positive".into()));
        }
        match &self.mode {
            ScheduleMode::PoissonTimes { rate } if *rate <= 0.0 => {
                Err(Error::InvalidParameter("Poisson rate must be positive".into()))
            }
            ScheduleMode::FixedTimes(times) => {
                for w in times.windows(2) {
                    if w[1] <= w[0] {
                        return Err(Error::InvalidParameter(
                            "fixed jump times must be strictly increasing".into(),
                        ));
                    }
                }
                if times.first().is_some_and(|t| *t <= 0.0) {
                    return Err(Error::InvalidParameter("jump times must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// r_k for k = 1, 2, …
    pub fn radius(&self, k: usize) -> f64 {
        self.radius_scale * (k as f64).powf(-self.radius_decay)
    }

    /// Σ r_k² < ∞ exactly when β > ½.
    pub fn square_summable(&self) -> bool {
        self.radius_decay > 0.5
    }

    fn times<R: Rng>(&self, horizon: f64, rng: &mut R) -> Result<Vec<f64>> {
        match &self.mode {
            ScheduleMode::PoissonTimes { rate } => Ok(poisson_times(*rate, horizon, rng)),
            ScheduleMode::FixedTimes(times) => {
                if times.last().is_some_and(|t| *t > horizon) {
                    return Err(Error::InvalidParameter(
                        "fixed jump times exceed the horizon".into(),
                    ));
                }
                Ok(times.clone())
            }
        }
    }
}

fn poisson_times<R: Rng>(rate: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    let exp = rand_distr::Exp::new(rate).expect("positive rate");
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng.sample::<f64, _>(exp);
        if t > horizon {
            break;
        }
        times.push(t);
    }
    times
}

/// Poisson event times on [0, horizon]: i.i.d. exponential gaps,
/// deterministic given the seed.
pub fn simulate_poisson(rate: f64, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    if rate <= 0.0 || horizon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Poisson needs rate > 0 and horizon ≥ 0, got rate {rate}, horizon {horizon}"
        )));
    }
    Ok(poisson_times(rate, horizon, &mut rng_from_seed(seed)))
}

/// The circle path e^{iπN_t} for a Poisson N: it alternates between (1, 0)
/// and (−1, 0), and every jump mark is the zero projection mark
/// Π_x(−x − x) = 0. Its Riemannian quadratic variation vanishes identically
/// and every discrete integral of a covector field is identically zero,
/// yet with at least one tail event the path keeps oscillating forever.
pub fn antipodal_poisson_circle(rate: f64, horizon: f64, seed: u64) -> Result<DeltaPath> {
    let times = simulate_poisson(rate, horizon, seed)?;
    let circle = ManifoldModel::circle();
    let mut events = vec![PathEvent { t: 0.0, point: vec![1.0, 0.0], mark: None }];
    let mut sign = 1.0;
    for t in times {
        sign = -sign;
        events.push(PathEvent {
            t,
            point: vec![sign, 0.0],
            mark: Some(vec![0.0, 0.0]),
        });
    }
    DeltaPath::new(circle, events, horizon, Interpolation::PiecewiseConstant)
}

fn signed_direction<R: Rng>(m: &ManifoldModel, x: &[f64], rng: &mut R) -> TangentVector {
    let dir = m.random_unit_tangent(x, rng);
    // sign symmetrization: mean-zero even conditionally on the direction
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    TangentVector { base: dir.base, vec: scale(&dir.vec, sign) }
}

/// Pure-jump martingale whose jumps are geodesic: the k-th jump goes to
/// exp_x(Δ_k) with Δ_k = ±r_k·V_k recorded as the mark, so
/// exp_{X_{s−}} ΔX_s = X_s holds exactly. Radii must stay below the
/// injectivity radius.
pub fn geodesic_jump_martingale(
    m: &ManifoldModel,
    schedule: &JumpSchedule,
    horizon: f64,
    seed: u64,
) -> Result<DeltaPath> {
    jump_martingale(m, schedule, horizon, seed, MarkKind::Geodesic)
}

/// Pure-jump martingale with tangent-projection marks Δ_k = Π_x(x_k − x_{k−1});
/// on the unit sphere ‖Δ_k‖ = sin(r_k), and the ± sign symmetrization keeps
/// the marks conditionally mean-zero.
pub fn projection_martingale(
    m: &ManifoldModel,
    schedule: &JumpSchedule,
    horizon: f64,
    seed: u64,
) -> Result<DeltaPath> {
    jump_martingale(m, schedule, horizon, seed, MarkKind::Projection)
}

enum MarkKind {
    Geodesic,
    Projection,
}

fn jump_martingale(
    m: &ManifoldModel,
    schedule: &JumpSchedule,
    horizon: f64,
    seed: u64,
    marks: MarkKind,
) -> Result<DeltaPath> {
    schedule.validate()?;
    let mut rng = rng_from_seed(seed);
    let times = schedule.times(horizon, &mut rng)?;
    let mut x = m.base_point();
    let mut events = Vec::with_capacity(times.len() + 1);
    events.push(PathEvent { t: 0.0, point: x.clone(), mark: None });
    for (idx, t) in times.iter().enumerate() {
        let r = schedule.radius(idx + 1);
        if r >= m.injectivity_radius() {
            return Err(Error::InvalidParameter(format!(
                "jump radius r_{} = {r} reaches the injectivity radius {}",
                idx + 1,
                m.injectivity_radius()
            )));
        }
        let dir = signed_direction(m, &x, &mut rng);
        let step = TangentVector { base: x.clone(), vec: scale(&dir.vec, r) };
        let y = m.exp_map(&step)?;
        let mark = match marks {
            MarkKind::Geodesic => step.vec,
            MarkKind::Projection => {
                let rule = crate::connection::ConnectionRule::new(
                    crate::connection::RuleKind::Projection,
                    m.clone(),
                )?;
                rule.evaluate(&x, &y)?.vec
            }
        };
        events.push(PathEvent { t: *t, point: y.clone(), mark: Some(mark) });
        x = y;
    }
    DeltaPath::new(m.clone(), events, horizon, Interpolation::PiecewiseConstant)
}

/// Which replacement (if any) stands in for the sub-threshold jumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmallJumpMode {
    /// Drop jumps below the truncation radius (default).
    Drop,
    /// Replace them with Brownian increments of matched covariance,
    /// recorded on a uniform grid. Bias is O(ε^{(2−α)/2}) per unit time.
    GaussianCompensate,
}

/// Truncated α-stable simulation parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StableProcessConfig {
    /// Stability index α ∈ (0, 2).
    pub alpha: f64,
    /// State dimension m.
    pub dim: usize,
    /// Small-jump cutoff ε > 0: only jumps with |x| > ε are realized.
    pub truncation: f64,
    pub horizon: f64,
    pub small_jump_mode: SmallJumpMode,
}

impl StableProcessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.alpha && self.alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 2), got {}",
                self.alpha
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if self.truncation <= 0.0 {
            return Err(Error::InvalidParameter("truncation ε must be positive".into()));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        Ok(())
    }
}

/// Surface area of the unit sphere S^{m−1} ⊂ ℝ^m.
pub fn sphere_surface_area(m: usize) -> f64 {
    let m = m as f64;
    2.0 * std::f64::consts::PI.powf(m / 2.0)
        / statrs::function::gamma::gamma(m / 2.0)
}

/// Intensity of realized jumps: ∫_{|x|>ε} c_{m,α}|x|^{−(m+α)} dx
/// = c_{m,α} · |S^{m−1}| · ε^{−α}/α.
pub fn stable_jump_intensity(cfg: &StableProcessConfig) -> Result<f64> {
    cfg.validate()?;
    let c = levy_constant(cfg.dim, cfg.alpha)?;
    Ok(c * sphere_surface_area(cfg.dim) * cfg.truncation.powf(-cfg.alpha) / cfg.alpha)
}

/// Per-coordinate variance rate matching the dropped small jumps:
/// (1/m)∫_{|x|≤ε}|x|² n(dx) = c_{m,α}|S^{m−1}| ε^{2−α} / (m(2−α)).
pub fn small_jump_variance_rate(cfg: &StableProcessConfig) -> Result<f64> {
    cfg.validate()?;
    let c = levy_constant(cfg.dim, cfg.alpha)?;
    Ok(c * sphere_surface_area(cfg.dim) * cfg.truncation.powf(2.0 - cfg.alpha)
        / (cfg.dim as f64 * (2.0 - cfg.alpha)))
}

/// CDF of realized jump magnitudes: the Pareto law truncated below at ε,
/// F(r) = 1 − (ε/r)^α.
pub fn truncated_pareto_cdf(truncation: f64, alpha: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| {
        if r <= truncation {
            0.0
        } else {
            1.0 - (truncation / r).powf(alpha)
        }
    }
}

/// Compound-Poisson approximation of the α-symmetric stable process:
/// jumps with |x| > ε arrive at rate [`stable_jump_intensity`], with
/// isotropic directions and magnitudes R = ε·U^{−1/α}. Small jumps are
/// dropped or replaced by grid-recorded Brownian increments.
pub fn simulate_stable(cfg: &StableProcessConfig, seed: u64) -> Result<DeltaPath> {
    cfg.validate()?;
    let intensity = stable_jump_intensity(cfg)?;
    let expected = intensity * cfg.horizon;
    if !(expected.is_finite()) || expected > MAX_STABLE_EVENTS as f64 {
        return Err(Error::Resource(format!(
            "expected jump count {expected:.3e} exceeds cap {MAX_STABLE_EVENTS}; \
             increase the truncation ε"
        )));
    }
    let m = ManifoldModel::euclidean(cfg.dim)?;
    let mut rng = rng_from_seed(seed);
    let jump_times = poisson_times(intensity, cfg.horizon, &mut rng);

    let mut events = vec![PathEvent { t: 0.0, point: vec![0.0; cfg.dim], mark: None }];
    match cfg.small_jump_mode {
        SmallJumpMode::Drop => {
            let mut x = vec![0.0; cfg.dim];
            for t in jump_times {
                let jump = stable_jump(cfg, &m, &x, &mut rng);
                x = crate::linalg::add(&x, &jump);
                events.push(PathEvent { t, point: x.clone(), mark: Some(jump) });
            }
            DeltaPath::new(m, events, cfg.horizon, Interpolation::PiecewiseConstant)
        }
        SmallJumpMode::GaussianCompensate => {
            let sigma_sq = small_jump_variance_rate(cfg)?;
            let mut x = vec![0.0; cfg.dim];
            let mut jumps = jump_times.into_iter().peekable();
            let mut last_grid_t = 0.0;
            for g in 1..=COMPENSATION_GRID_CELLS {
                let t_grid = cfg.horizon * g as f64 / COMPENSATION_GRID_CELLS as f64;
                while jumps.peek().is_some_and(|t| *t < t_grid) {
                    let t = jumps.next().unwrap();
                    if (t - t_grid).abs() <= crate::paths::TIME_DEDUP_TOL {
                        continue;
                    }
                    let jump = stable_jump(cfg, &m, &x, &mut rng);
                    x = crate::linalg::add(&x, &jump);
                    events.push(PathEvent { t, point: x.clone(), mark: Some(jump) });
                }
                let sd = (sigma_sq * (t_grid - last_grid_t)).sqrt();
                for c in &mut x {
                    *c += sd * rng.sample::<f64, _>(StandardNormal);
                }
                events.push(PathEvent { t: t_grid, point: x.clone(), mark: None });
                last_grid_t = t_grid;
            }
            DeltaPath::new(m, events, cfg.horizon, Interpolation::RecordedDiffusionGrid)
        }
    }
}

fn stable_jump<R: Rng>(
    cfg: &StableProcessConfig,
    m: &ManifoldModel,
    x: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let u: f64 = loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let magnitude = cfg.truncation * u.powf(-1.0 / cfg.alpha);
    let dir = m.random_unit_tangent(x, rng); // flat space: isotropic unit vector
    scale(&dir.vec, magnitude)
}

/// Pushes a driver path through a map into a manifold. Points become h(Z_t);
/// jump events of Z become jump events with tangent-projection marks
/// Π_{h(Z_{s−})}(h(Z_s) − h(Z_{s−})). Events that do not move the image
/// (within machine precision) are dropped, so constant maps yield constant
/// paths with no jumps.
pub fn pushforward(h: &MapIntoManifold, z_path: &DeltaPath) -> Result<DeltaPath> {
    let target = h.target();
    let src = z_path.events();
    let mut events: Vec<PathEvent> = Vec::with_capacity(src.len());
    for (k, ev) in src.iter().enumerate() {
        let point = h.eval(&ev.point);
        target.check_point(&point, &format!("pushforward image at t = {}", ev.t))?;
        if k == 0 {
            events.push(PathEvent { t: ev.t, point, mark: None });
            continue;
        }
        let prev = &events.last().expect("initial event exists").point;
        let disp = sub(&point, prev);
        if norm(&disp) <= 1e-15 {
            continue;
        }
        let mark = if ev.mark.is_some() {
            Some(target.tangent_projection(prev, &disp))
        } else {
            None
        };
        events.push(PathEvent { t: ev.t, point, mark });
    }
    DeltaPath::new(target.clone(), events, z_path.horizon(), z_path.interpolation())
}

/// Binary verdict of the tail-window test. On compact manifolds escape to
/// infinity cannot occur, so these two cases are exhaustive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convergence {
    Converged,
    Oscillating,
}

/// Tail-window classifier settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Fraction ρ of the horizon forming the tail window [(1−ρ)T, T].
    pub tail_fraction: f64,
    /// Geodesic diameter threshold for "converged".
    pub eps: f64,
}

impl ClassifierConfig {
    /// Pilot-calibrated defaults: ρ = 0.2 and eps = 5% of the manifold
    /// diameter. Only available when the diameter is finite.
    pub fn with_defaults(m: &ManifoldModel) -> Result<Self> {
        let diam = m.diameter().ok_or_else(|| {
            Error::InvalidParameter(
                "classifier defaults need a finite manifold diameter; pass eps explicitly".into(),
            )
        })?;
        Ok(Self { tail_fraction: 0.2, eps: 0.05 * diam })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.tail_fraction && self.tail_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail fraction must lie in (0, 1), got {}",
                self.tail_fraction
            )));
        }
        if self.eps <= 0.0 {
            return Err(Error::InvalidParameter("classifier eps must be positive".into()));
        }
        Ok(())
    }
}

/// Points the path visits in the tail window, including the value in force
/// as the window opens.
fn tail_points(path: &DeltaPath, tail_fraction: f64) -> Result<Vec<&[f64]>> {
    let t0 = (1.0 - tail_fraction) * path.horizon();
    let (entering, _) = path.sample_at(t0)?;
    let mut pts = vec![entering];
    for ev in path.events() {
        if ev.t > t0 {
            pts.push(&ev.point);
        }
    }
    Ok(pts)
}

/// Number of events strictly inside the tail window.
pub fn tail_event_count(path: &DeltaPath, tail_fraction: f64) -> usize {
    let t0 = (1.0 - tail_fraction) * path.horizon();
    path.events().iter().filter(|e| e.t > t0).count()
}

/// Geodesic diameter of the path restricted to the tail window.
pub fn tail_diameter(path: &DeltaPath, tail_fraction: f64) -> Result<f64> {
    let pts = tail_points(path, tail_fraction)?;
    let m = path.manifold();
    let mut diam = 0.0_f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            diam = diam.max(m.geodesic_distance(pts[i], pts[j])?);
        }
    }
    Ok(diam)
}

/// Deterministic tail test: converged iff the geodesic diameter of the path
/// over [(1−ρ)T, T] is at most eps.
pub fn classify_convergence(path: &DeltaPath, cfg: &ClassifierConfig) -> Result<Convergence> {
    cfg.validate()?;
    if path.events().is_empty() {
        return Err(Error::InvalidParameter("cannot classify an empty path".into()));
    }
    if tail_diameter(path, cfg.tail_fraction)? <= cfg.eps {
        Ok(Convergence::Converged)
    } else {
        Ok(Convergence::Oscillating)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{ConnectionRule, RuleKind};
    use crate::integrator::{self, fields, CotangentField};
    use crate::linalg::dist;
    use crate::paths::jump_skeleton;
    use std::f64::consts::PI;

    #[test]
    fn poisson_basics() {
        assert!(simulate_poisson(1.0, 0.0, 3).unwrap().is_empty());
        let a = simulate_poisson(2.0, 100.0, 9).unwrap();
        let b = simulate_poisson(2.0, 100.0, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_poisson(2.0, 100.0, 10).unwrap());
    }

    #[test]
    fn poisson_count_concentrates() {
        let n = simulate_poisson(2.0, 1e4, 1234).unwrap().len() as f64;
        let expected = 2.0 * 1e4;
        assert!((n - expected).abs() <= 3.0 * expected.sqrt(), "count {n}");
    }

    #[test]
    fn antipodal_path_structure() {
        let quiet = antipodal_poisson_circle(1.0, 0.0, 5).unwrap();
        assert_eq!(quiet.events().len(), 1);
        assert_eq!(quiet.initial_point(), &[1.0, 0.0]);

        let path = antipodal_poisson_circle(1.0, 50.0, 5).unwrap();
        for (k, ev) in path.events().iter().enumerate().skip(1) {
            assert_eq!(ev.mark.as_deref(), Some(&[0.0, 0.0][..]));
            let expected = if k % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(ev.point, vec![expected, 0.0]);
        }
    }

    #[test]
    fn antipodal_path_has_zero_qv_and_zero_integrals() {
        let path = antipodal_poisson_circle(1.5, 30.0, 8).unwrap();
        let p = jump_skeleton(&path).unwrap();
        let qv = integrator::riemannian_qv(&path, &p).unwrap();
        assert!(qv.total.iter().all(|v| *v == 0.0));

        let rule = ConnectionRule::new(RuleKind::Projection, path.manifold().clone()).unwrap();
        for f in fields::test_battery(2) {
            let phi = CotangentField::differential(f);
            let series = integrator::ito_integral_delta(&phi, &path, &rule, &p).unwrap();
            assert!(series.values.iter().all(|v| *v == 0.0));
        }
    }

    fn fixed_schedule(count: usize, c: f64, beta: f64) -> JumpSchedule {
        JumpSchedule {
            mode: ScheduleMode::FixedTimes(
                (1..=count).map(|k| k as f64 / count as f64).collect(),
            ),
            radius_scale: c,
            radius_decay: beta,
        }
    }

    #[test]
    fn geodesic_martingale_qv_is_sum_of_squared_radii() {
        let m = ManifoldModel::sphere(2).unwrap();
        let schedule = fixed_schedule(100, 0.4, 0.7);
        let path = geodesic_jump_martingale(&m, &schedule, 1.0, 42).unwrap();
        let p = jump_skeleton(&path).unwrap();
        let qv = integrator::riemannian_qv(&path, &p).unwrap();
        let mut expected = crate::linalg::KahanSum::new();
        for k in 1..=100 {
            let r = schedule.radius(k);
            expected.add(r * r);
        }
        assert!((qv.terminal_total() - expected.value()).abs() <= 1e-12);
        assert!(qv.continuous_part.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn geodesic_martingale_marks_satisfy_exp_condition() {
        let m = ManifoldModel::sphere(2).unwrap();
        let path =
            geodesic_jump_martingale(&m, &fixed_schedule(50, 0.5, 0.6), 1.0, 7).unwrap();
        for k in 1..path.events().len() {
            let mark = path.mark_at(k).unwrap();
            let reached = m.exp_map(&mark).unwrap();
            assert!(dist(&reached, &path.events()[k].point) <= 1e-9);
            // and the mark is exactly the logarithm
            let log = m.log_map(&mark.base, &path.events()[k].point).unwrap();
            assert!(crate::linalg::max_abs_diff(&log.vec, &mark.vec) <= 1e-9);
        }
    }

    #[test]
    fn radius_at_injectivity_is_rejected() {
        let m = ManifoldModel::sphere(2).unwrap();
        let schedule = fixed_schedule(3, PI, 0.0); // r_k = π everywhere
        assert!(geodesic_jump_martingale(&m, &schedule, 1.0, 1).is_err());
    }

    #[test]
    fn projection_martingale_marks_match_projection_rule() {
        let m = ManifoldModel::sphere(2).unwrap();
        let schedule = fixed_schedule(60, 0.5, 0.6);
        let path = projection_martingale(&m, &schedule, 1.0, 13).unwrap();
        let rule = ConnectionRule::new(RuleKind::Projection, m.clone()).unwrap();
        for k in 1..path.events().len() {
            let mark = path.mark_at(k).unwrap();
            let expected = rule
                .evaluate(&path.events()[k - 1].point, &path.events()[k].point)
                .unwrap();
            assert_eq!(mark.vec, expected.vec);
            // length sin(r_k) on the unit sphere
            let r = schedule.radius(k);
            assert!((mark.norm() - r.sin()).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_martingale_qv_is_sum_of_sin_squared() {
        let m = ManifoldModel::sphere(2).unwrap();
        let schedule = JumpSchedule {
            mode: ScheduleMode::FixedTimes(vec![0.5]),
            radius_scale: PI / 2.0,
            radius_decay: 0.0,
        };
        let path = projection_martingale(&m, &schedule, 1.0, 3).unwrap();
        let p = jump_skeleton(&path).unwrap();
        let qv = integrator::riemannian_qv(&path, &p).unwrap();
        assert!((qv.terminal_total() - 1.0).abs() <= 1e-12); // sin²(π/2) = 1
    }

    #[test]
    fn stable_intensity_closed_form() {
        // m = 2, α = 1: λ_ε = 2π c_{2,1} ε^{−1}
        let cfg = StableProcessConfig {
            alpha: 1.0,
            dim: 2,
            truncation: 0.05,
            horizon: 1.0,
            small_jump_mode: SmallJumpMode::Drop,
        };
        let lambda = stable_jump_intensity(&cfg).unwrap();
        let c = levy_constant(2, 1.0).unwrap();
        assert!((lambda - 2.0 * PI * c / 0.05).abs() < 1e-12);
    }

    #[test]
    fn stable_simulation_is_deterministic_and_truncated() {
        let cfg = StableProcessConfig {
            alpha: 1.2,
            dim: 2,
            truncation: 0.1,
            horizon: 5.0,
            small_jump_mode: SmallJumpMode::Drop,
        };
        let a = simulate_stable(&cfg, 77).unwrap();
        let b = simulate_stable(&cfg, 77).unwrap();
        assert_eq!(a.events().len(), b.events().len());
        for (x, y) in a.events().iter().zip(b.events()) {
            assert_eq!(x.point, y.point);
        }
        for k in 1..a.events().len() {
            let mark = a.mark_at(k).unwrap();
            assert!(mark.norm() > cfg.truncation);
        }
    }

    #[test]
    fn stable_increments_are_isotropic() {
        let cfg = StableProcessConfig {
            alpha: 1.5,
            dim: 2,
            truncation: 0.2,
            horizon: 1.0,
            small_jump_mode: SmallJumpMode::Drop,
        };
        // collect many jumps across replicas
        let mut samples: Vec<Vec<f64>> = Vec::new();
        let mut seed = 0;
        while samples.len() < 100_000 {
            let path = simulate_stable(&cfg, crate::rng::split_seed(500, seed)).unwrap();
            for k in 1..path.events().len() {
                samples.push(path.mark_at(k).unwrap().vec);
            }
            seed += 1;
        }
        for coord in 0..2 {
            let vals: Vec<f64> = samples.iter().map(|v| v[coord]).collect();
            let (mean, se) = crate::stats::mean_se(&vals);
            assert!(mean.abs() <= 3.0 * se, "coordinate {coord}: mean {mean}, se {se}");
        }
    }

    #[test]
    fn stable_tail_count_is_monotone_in_alpha() {
        let count_above = |alpha: f64| -> usize {
            let cfg = StableProcessConfig {
                alpha,
                dim: 2,
                truncation: 0.1,
                horizon: 2000.0,
                small_jump_mode: SmallJumpMode::Drop,
            };
            let path = simulate_stable(&cfg, 9001).unwrap();
            (1..path.events().len())
                .filter(|&k| path.mark_at(k).unwrap().norm() > 1.0)
                .count()
        };
        assert!(count_above(0.5) > count_above(1.9));
    }

    #[test]
    fn gaussian_compensation_adds_grid_events() {
        let cfg = StableProcessConfig {
            alpha: 1.0,
            dim: 2,
            truncation: 0.5,
            horizon: 1.0,
            small_jump_mode: SmallJumpMode::GaussianCompensate,
        };
        let path = simulate_stable(&cfg, 4).unwrap();
        let grid_events = path.events().iter().filter(|e| e.mark.is_none()).count();
        assert_eq!(grid_events - 1, COMPENSATION_GRID_CELLS); // initial + grid
        assert!(!path.is_pure_jump());
    }

    #[test]
    fn pushforward_of_constant_map_is_constant() {
        let cfg = StableProcessConfig {
            alpha: 1.0,
            dim: 2,
            truncation: 0.1,
            horizon: 1.0,
            small_jump_mode: SmallJumpMode::Drop,
        };
        let z = simulate_stable(&cfg, 11).unwrap();
        let h = MapIntoManifold::constant_circle();
        let pushed = pushforward(&h, &z).unwrap();
        assert_eq!(pushed.events().len(), 1);
        assert!(pushed.jump_times().is_empty());
    }

    #[test]
    fn pushforward_identity_keeps_increments() {
        let cfg = StableProcessConfig {
            alpha: 1.0,
            dim: 2,
            truncation: 0.1,
            horizon: 1.0,
            small_jump_mode: SmallJumpMode::Drop,
        };
        let z = simulate_stable(&cfg, 21).unwrap();
        let h = MapIntoManifold::identity_euclidean(2);
        let pushed = pushforward(&h, &z).unwrap();
        assert_eq!(pushed.events().len(), z.events().len());
        for k in 1..z.events().len() {
            // the pushforward recomputes increments from the points, so the
            // original jump vector reappears up to one rounding
            let got = pushed.mark_at(k).unwrap().vec;
            let want = z.mark_at(k).unwrap().vec;
            assert!(crate::linalg::max_abs_diff(&got, &want) <= 1e-12);
        }
    }

    #[test]
    fn pushforward_chord_is_at_most_arc() {
        // h(z) = (cos θ, sin θ), θ = arctan(z₁): mark length ≤ |Δθ|
        let cfg = StableProcessConfig {
            alpha: 1.0,
            dim: 1,
            truncation: 0.1,
            horizon: 2.0,
            small_jump_mode: SmallJumpMode::Drop,
        };
        let z = simulate_stable(&cfg, 31).unwrap();
        let h = MapIntoManifold::circle_arctan();
        let pushed = pushforward(&h, &z).unwrap();
        let mut zk = 0usize; // pushforward may drop immobile events
        for k in 1..pushed.events().len() {
            let t = pushed.events()[k].t;
            while z.events()[zk].t < t {
                zk += 1;
            }
            let theta_pre = z.events()[zk - 1].point[0].atan();
            let theta_post = z.events()[zk].point[0].atan();
            let mark_len = pushed.mark_at(k).unwrap().norm();
            assert!(mark_len <= (theta_post - theta_pre).abs() + 1e-12);
        }
    }

    #[test]
    fn classifier_examples() {
        let m = ManifoldModel::circle();
        let constant = DeltaPath::new(
            m.clone(),
            vec![PathEvent { t: 0.0, point: vec![1.0, 0.0], mark: None }],
            10.0,
            Interpolation::PiecewiseConstant,
        )
        .unwrap();
        let cfg = ClassifierConfig::with_defaults(&m).unwrap();
        assert_eq!(classify_convergence(&constant, &cfg).unwrap(), Convergence::Converged);

        // single early jump then constant
        let early = DeltaPath::new(
            m.clone(),
            vec![
                PathEvent { t: 0.0, point: vec![1.0, 0.0], mark: None },
                PathEvent { t: 1.0, point: vec![-1.0, 0.0], mark: Some(vec![0.0, 0.0]) },
            ],
            10.0,
            Interpolation::PiecewiseConstant,
        )
        .unwrap();
        assert_eq!(classify_convergence(&early, &cfg).unwrap(), Convergence::Converged);

        // any tail activity on the antipodal path spans the whole circle
        let mut seed = 0;
        loop {
            let path = antipodal_poisson_circle(1.0, 50.0, seed).unwrap();
            if tail_event_count(&path, cfg.tail_fraction) >= 2 {
                assert_eq!(
                    classify_convergence(&path, &cfg).unwrap(),
                    Convergence::Oscillating
                );
                break;
            }
            seed += 1;
        }
    }

    #[test]
    fn schedule_flags_square_summability() {
        assert!(fixed_schedule(10, 0.3, 0.6).square_summable());
        assert!(!fixed_schedule(10, 0.3, 0.4).square_summable());
    }

    #[test]
    fn projection_martingale_with_summable_radii_mostly_converges() {
        let m = ManifoldModel::sphere(2).unwrap();
        let cfg = ClassifierConfig::with_defaults(&m).unwrap();
        let schedule = fixed_schedule(1000, 0.30, 0.6);
        let replicas = 400u64;
        let converged = crate::parallel::replica_map(replicas, |i| {
            let path = projection_martingale(
                &m,
                &schedule,
                1.0,
                crate::rng::split_seed(606, i),
            )
            .unwrap();
            classify_convergence(&path, &cfg).unwrap() == Convergence::Converged
        })
        .into_iter()
        .filter(|c| *c)
        .count();
        let fraction = converged as f64 / replicas as f64;
        assert!(fraction >= 0.95, "converged fraction {fraction}");
    }
}
