//! Finite càdlàg sample paths with jump marks, and the partitions their
//! Riemann sums run on.
//!
//! A [`DeltaPath`] records an ordered list of events `(t_k, x_k, Δ_k?)`. An
//! event with a mark is a jump: the mark is a tangent vector at the previous
//! point x_{k−1} (possibly the zero vector — the antipodal counterexample has
//! zero projection marks). Events without marks are recorded grid samples of
//! a continuous component. Paths are immutable after construction and carry
//! their manifold, so they can be shared freely across replica threads.
//!
//! The CSV interchange format is
//! `t,x_0,...,x_{a-1},jump,dx_0,...,dx_{a-1}` with one row per event,
//! `jump ∈ {0,1}`, absent marks written as zeros with `jump=0`, and floats
//! printed with 17 significant digits so round trips are bit-exact.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, TangentVector};

/// Events closer than this (in time) collapse to one partition point.
pub const TIME_DEDUP_TOL: f64 = 1e-12;

/// Geodesic displacement above which an unmarked event would indicate an
/// undeclared jump when ingesting raw sample grids.
pub const JUMP_DETECTION_THRESHOLD: f64 = 1e-9;

/// How inter-event values are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// The path is constant between events (pure-jump constructions).
    PiecewiseConstant,
    /// Unmarked events are samples of a continuous component on a grid.
    RecordedDiffusionGrid,
}

/// One recorded event. `mark`, when present, is the jump direction based at
/// the previous event's point.
#[derive(Debug, Clone)]
pub struct PathEvent {
    pub t: f64,
    pub point: Vec<f64>,
    pub mark: Option<Vec<f64>>,
}

/// A finite Δ-semimartingale sample: the pair (ΔX, X) at desk scale.
#[derive(Debug, Clone)]
pub struct DeltaPath {
    manifold: ManifoldModel,
    events: Vec<PathEvent>,
    horizon: f64,
    interpolation: Interpolation,
}

impl DeltaPath {
    /// Builds a path from raw recorded samples, detecting jumps: any move of
    /// geodesic displacement above [`JUMP_DETECTION_THRESHOLD`] becomes a
    /// jump event carrying the tangent-projection mark Π_{x_{k−1}}(x_k − x_{k−1});
    /// smaller moves are kept as grid records.
    pub fn from_samples(
        manifold: ManifoldModel,
        times: &[f64],
        points: &[Vec<f64>],
        horizon: f64,
    ) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::InvalidParameter(format!(
                "{} sample times for {} points",
                times.len(),
                points.len()
            )));
        }
        let mut events = Vec::with_capacity(times.len());
        for (k, (t, point)) in times.iter().zip(points).enumerate() {
            let mark = if k > 0 && displacement_is_jump(&manifold, &points[k - 1], point) {
                Some(manifold.tangent_projection(
                    &points[k - 1],
                    &crate::linalg::sub(point, &points[k - 1]),
                ))
            } else {
                None
            };
            events.push(PathEvent { t: *t, point: point.clone(), mark });
        }
        DeltaPath::new(manifold, events, horizon, Interpolation::RecordedDiffusionGrid)
    }

    /// Validates and freezes a path:
    /// times strictly increasing from t₀ = 0, no mark at t₀, marks tangent
    /// at their pre-jump points, every point on the manifold.
    pub fn new(
        manifold: ManifoldModel,
        events: Vec<PathEvent>,
        horizon: f64,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidParameter("path needs at least the initial event".into()));
        }
        if events[0].t != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "first event must be at t = 0, got {}",
                events[0].t
            )));
        }
        if events[0].mark.is_some() {
            return Err(Error::InvalidParameter("no jump mark allowed at t = 0".into()));
        }
        if horizon < events[events.len() - 1].t {
            return Err(Error::InvalidParameter(format!(
                "horizon {} precedes last event at {}",
                horizon,
                events[events.len() - 1].t
            )));
        }
        for (k, ev) in events.iter().enumerate() {
            manifold.check_point(&ev.point, &format!("path event {k}"))?;
            if k > 0 {
                if ev.t <= events[k - 1].t {
                    return Err(Error::InvalidParameter(format!(
                        "event times must be strictly increasing ({} after {})",
                        ev.t,
                        events[k - 1].t
                    )));
                }
                if let Some(mark) = &ev.mark {
                    manifold.check_tangent(&TangentVector {
                        base: events[k - 1].point.clone(),
                        vec: mark.clone(),
                    })?;
                }
            }
        }
        Ok(Self { manifold, events, horizon, interpolation })
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.manifold
    }

    pub fn events(&self) -> &[PathEvent] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn initial_point(&self) -> &[f64] {
        &self.events[0].point
    }

    pub fn terminal_point(&self) -> &[f64] {
        &self.events[self.events.len() - 1].point
    }

    /// Times of marked (jump) events.
    pub fn jump_times(&self) -> Vec<f64> {
        self.events.iter().filter(|e| e.mark.is_some()).map(|e| e.t).collect()
    }

    /// True when every event after t = 0 is a jump.
    pub fn is_pure_jump(&self) -> bool {
        self.events.iter().skip(1).all(|e| e.mark.is_some())
    }

    /// Jump mark at event index `k` as a based tangent vector.
    pub fn mark_at(&self, k: usize) -> Option<TangentVector> {
        let mark = self.events[k].mark.as_ref()?;
        Some(TangentVector {
            base: self.events[k - 1].point.clone(),
            vec: mark.clone(),
        })
    }

    /// Index of the last event with t_k ≤ t.
    fn event_index_at(&self, t: f64) -> usize {
        match self.events.binary_search_by(|e| e.t.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Right-continuous value and left limit (X_t, X_{t−}).
    ///
    /// At a jump time this is (post-jump, pre-jump); at unmarked events and
    /// between events both components agree.
    pub fn sample_at(&self, t: f64) -> Result<(&[f64], &[f64])> {
        if t < 0.0 || t > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "sample time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let i = self.event_index_at(t);
        let ev = &self.events[i];
        let left = if i > 0 && ev.t == t && ev.mark.is_some() {
            &self.events[i - 1].point
        } else {
            &ev.point
        };
        Ok((&ev.point, left))
    }

    /// Writes the path in the interchange CSV format.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let a = self.manifold.ambient_dim();
        let mut header = String::from("t");
        for i in 0..a {
            header.push_str(&format!(",x_{i}"));
        }
        header.push_str(",jump");
        for i in 0..a {
            header.push_str(&format!(",dx_{i}"));
        }
        writeln!(out, "{header}")?;
        let zeros = vec![0.0; a];
        for ev in &self.events {
            let mark = ev.mark.as_deref().unwrap_or(&zeros);
            let mut row = fmt_f64(ev.t);
            for c in &ev.point {
                row.push(',');
                row.push_str(&fmt_f64(*c));
            }
            row.push_str(if ev.mark.is_some() { ",1" } else { ",0" });
            for c in mark {
                row.push(',');
                row.push_str(&fmt_f64(*c));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }

    /// Parses a path previously written by [`Self::write_csv`].
    pub fn read_csv<R: BufRead>(
        manifold: ManifoldModel,
        reader: R,
        horizon: f64,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let a = manifold.ambient_dim();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty path CSV".into()))?
            .map_err(|e| Error::InvalidParameter(format!("path CSV read: {e}")))?;
        let expected = expected_header(a);
        if header.trim() != expected {
            return Err(Error::InvalidParameter(format!(
                "path CSV header mismatch: got `{header}`, want `{expected}`"
            )));
        }
        let mut events = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::InvalidParameter(format!("path CSV read: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 * a + 2 {
                return Err(Error::InvalidParameter(format!(
                    "path CSV row {} has {} fields, want {}",
                    lineno + 2,
                    fields.len(),
                    2 * a + 2
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!("path CSV row {}: {e}", lineno + 2))
                })
            };
            let t = parse(fields[0])?;
            let point: Vec<f64> =
                fields[1..=a].iter().map(|s| parse(s)).collect::<Result<_>>()?;
            let jump = fields[a + 1].trim();
            let mark: Vec<f64> =
                fields[a + 2..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
            let mark = match jump {
                "1" => Some(mark),
                "0" => None,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "path CSV row {}: jump flag `{other}` not in {{0,1}}",
                        lineno + 2
                    )))
                }
            };
            events.push(PathEvent { t, point, mark });
        }
        DeltaPath::new(manifold, events, horizon, interpolation)
    }
}

/// 17 significant digits: enough for bit-exact f64 round trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn expected_header(a: usize) -> String {
    let mut h = String::from("t");
    for i in 0..a {
        h.push_str(&format!(",x_{i}"));
    }
    h.push_str(",jump");
    for i in 0..a {
        h.push_str(&format!(",dx_{i}"));
    }
    h
}

/// A finite partition 0 = T₀ < T₁ < … < T_k ≤ horizon. Integrator
/// preconditions require it to contain every jump time of the path it is
/// applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    times: Vec<f64>,
    horizon: f64,
}

impl Partition {
    /// Uniform grid of spacing ≤ `mesh` on [0, horizon], united with
    /// `mandatory_times`, sorted and deduplicated within [`TIME_DEDUP_TOL`].
    pub fn build(horizon: f64, mesh: f64, mandatory_times: &[f64]) -> Result<Self> {
        if mesh <= 0.0 {
            return Err(Error::InvalidParameter(format!("mesh must be positive, got {mesh}")));
        }
        if horizon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        for &t in mandatory_times {
            if !(0.0..=horizon).contains(&t) {
                return Err(Error::InvalidParameter(format!(
                    "mandatory time {t} outside [0, {horizon}]"
                )));
            }
        }
        let cells = (horizon / mesh).ceil().max(1.0) as usize;
        let mut times: Vec<f64> = (0..=cells).map(|j| horizon * j as f64 / cells as f64).collect();
        times.extend_from_slice(mandatory_times);
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup_by(|a, b| (*a - *b).abs() <= TIME_DEDUP_TOL);
        Ok(Self { times, horizon })
    }

    /// Partition holding exactly `times` (must start at 0, strictly
    /// increasing); used when the jump skeleton itself is the partition.
    pub fn from_times(horizon: f64, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::InvalidParameter("partition must start at 0".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidParameter("partition times must increase".into()));
            }
        }
        if *times.last().unwrap() > horizon {
            return Err(Error::InvalidParameter("partition exceeds horizon".into()));
        }
        Ok(Self { times, horizon })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Largest gap between consecutive times.
    pub fn mesh(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Splits every cell into `factor` equal parts; original times are
    /// retained, so refinements only ever grow the partition.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::InvalidParameter(format!("refine factor must be ≥ 2, got {factor}")));
        }
        let mut times = Vec::with_capacity(self.times.len() * factor);
        for w in self.times.windows(2) {
            times.push(w[0]);
            for j in 1..factor {
                times.push(w[0] + (w[1] - w[0]) * j as f64 / factor as f64);
            }
        }
        times.push(*self.times.last().unwrap());
        Ok(Self { times, horizon: self.horizon })
    }

    /// True when `t` matches a partition point within [`TIME_DEDUP_TOL`].
    pub fn contains_time(&self, t: f64) -> bool {
        match self.times.binary_search_by(|p| p.partial_cmp(&t).unwrap()) {
            Ok(_) => true,
            Err(i) => {
                (i < self.times.len() && (self.times[i] - t).abs() <= TIME_DEDUP_TOL)
                    || (i > 0 && (t - self.times[i - 1]).abs() <= TIME_DEDUP_TOL)
            }
        }
    }
}

/// Convenience: the partition spanned by a path's own jump times (plus 0 and
/// the horizon), the minimal partition valid for its integrals.
pub fn jump_skeleton(path: &DeltaPath) -> Result<Partition> {
    let mut times = vec![0.0];
    times.extend(path.jump_times());
    let horizon = path.horizon();
    if (times.last().unwrap() - horizon).abs() > TIME_DEDUP_TOL && horizon > 0.0 {
        times.push(horizon);
    }
    Partition::from_times(horizon, times)
}

/// Membership-checked helper shared by process constructors: did the path
/// move more than the jump-detection threshold between these points?
pub fn displacement_is_jump(m: &ManifoldModel, from: &[f64], to: &[f64]) -> bool {
    m.geodesic_distance(from, to).map(|d| d > JUMP_DETECTION_THRESHOLD).unwrap_or(true)
}
