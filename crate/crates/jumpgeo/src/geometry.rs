//! Embedded Riemannian manifolds in ambient coordinates.
//!
//! Points live in ℝ^a and are never charted; the metric is the ambient inner
//! product restricted to tangent spaces. Spheres and circles use closed
//! forms for all operations:
//!
//! ```text
//! Π_x v    = v − ⟨v, x⟩ x
//! exp_x v  = cos(‖v‖) x + sin(‖v‖) v/‖v‖
//! log_x y  = θ/sin(θ) · (y − ⟨x,y⟩ x),    θ = arccos⟨x, y⟩
//! d(x, y)  = arccos⟨x, y⟩
//! ```
//!
//! The `Generic` kind accepts user callbacks (nearest-point retraction onto
//! the manifold and tangent projection) and integrates the geodesic equation
//! by projection retraction with fixed step `h = 1e-3` plus a Richardson
//! consistency check at step `h/2`. The tubular-neighborhood radius that
//! makes the retraction well defined is not constructible from the callbacks
//! alone, so it is a user-supplied parameter.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, dist, dot, norm, scale, sub};

/// Membership tolerance on the defining constraint (|‖x‖² − 1| for spheres).
pub const MEMBERSHIP_TOL: f64 = 1e-12;
/// Membership tolerance for callback-defined manifolds (|retract(x) − x|).
pub const GENERIC_MEMBERSHIP_TOL: f64 = 1e-9;
/// Tangency tolerance |Π_x v − v|.
pub const TANGENT_TOL: f64 = 1e-10;
/// Cut-locus guard for the sphere logarithm, applied to 1 + ⟨x, y⟩.
pub const CUT_LOCUS_TOL: f64 = 1e-8;
/// Fixed step for generic geodesic integration.
pub const GEODESIC_STEP: f64 = 1e-3;

type RetractFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type TangentProjFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Which closed-form family (or callback set) backs the model.
#[derive(Clone)]
pub enum ManifoldKind {
    /// Flat ℝ^a.
    Euclidean,
    /// Unit circle S¹ ⊂ ℝ².
    Circle,
    /// Unit sphere S^n ⊂ ℝ^{n+1}.
    Sphere,
    /// Callback-defined submanifold of ℝ^a.
    Generic {
        retract: RetractFn,
        tangent_proj: TangentProjFn,
        /// Radius of the tubular neighborhood on which `retract` is valid.
        tube_radius: f64,
    },
}

impl fmt::Debug for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Euclidean => write!(f, "Euclidean"),
            ManifoldKind::Circle => write!(f, "Circle"),
            ManifoldKind::Sphere => write!(f, "Sphere"),
            ManifoldKind::Generic { tube_radius, .. } => {
                write!(f, "Generic {{ tube_radius: {tube_radius} }}")
            }
        }
    }
}

/// An embedded manifold N ⊂ ℝ^a with its ambient-induced metric.
#[derive(Debug, Clone)]
pub struct ManifoldModel {
    kind: ManifoldKind,
    ambient_dim: usize,
    intrinsic_dim: usize,
    injectivity_radius: f64,
}

/// A tangent vector `vec` ∈ T_base M, both in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub vec: Vec<f64>,
}

impl TangentVector {
    pub fn zero(base: Vec<f64>) -> Self {
        let vec = vec![0.0; base.len()];
        Self { base, vec }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }
}

impl ManifoldModel {
    /// Flat ℝ^a.
    pub fn euclidean(a: usize) -> Result<Self> {
        if a == 0 {
            return Err(Error::InvalidParameter("ambient dimension must be ≥ 1".into()));
        }
        Ok(Self {
            kind: ManifoldKind::Euclidean,
            ambient_dim: a,
            intrinsic_dim: a,
            injectivity_radius: f64::INFINITY,
        })
    }

    /// Unit circle S¹ ⊂ ℝ².
    pub fn circle() -> Self {
        Self {
            kind: ManifoldKind::Circle,
            ambient_dim: 2,
            intrinsic_dim: 1,
            injectivity_radius: std::f64::consts::PI,
        }
    }

    /// Unit sphere S^n ⊂ ℝ^{n+1}, n ≥ 1.
    pub fn sphere(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sphere dimension must be ≥ 1".into()));
        }
        Ok(Self {
            kind: ManifoldKind::Sphere,
            ambient_dim: n + 1,
            intrinsic_dim: n,
            injectivity_radius: std::f64::consts::PI,
        })
    }

    /// Callback-defined submanifold. `retract` maps ambient points within the
    /// tube of radius `tube_radius` to the manifold; `tangent_proj(x, v)` is
    /// the orthogonal projection onto T_xM. `injectivity_radius` bounds where
    /// log/exp round trips are attempted; pass `None` to reuse `tube_radius`.
    pub fn generic(
        ambient_dim: usize,
        intrinsic_dim: usize,
        retract: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        tangent_proj: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        tube_radius: f64,
        injectivity_radius: Option<f64>,
    ) -> Result<Self> {
        if intrinsic_dim == 0 || intrinsic_dim >= ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "generic manifold needs 0 < intrinsic ({intrinsic_dim}) < ambient ({ambient_dim})"
            )));
        }
        if tube_radius <= 0.0 {
            return Err(Error::InvalidParameter("tube radius must be positive".into()));
        }
        Ok(Self {
            kind: ManifoldKind::Generic {
                retract: Arc::new(retract),
                tangent_proj: Arc::new(tangent_proj),
                tube_radius,
            },
            ambient_dim,
            intrinsic_dim,
            injectivity_radius: injectivity_radius.unwrap_or(tube_radius),
        })
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    /// Geodesic diameter, when finite (π for circles and spheres).
    pub fn diameter(&self) -> Option<f64> {
        match self.kind {
            ManifoldKind::Circle | ManifoldKind::Sphere => Some(std::f64::consts::PI),
            _ => None,
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self.kind, ManifoldKind::Euclidean)
    }

    fn is_round(&self) -> bool {
        matches!(self.kind, ManifoldKind::Circle | ManifoldKind::Sphere)
    }

    /// Deviation from the membership predicate (0 = exactly on manifold).
    pub fn membership_deviation(&self, x: &[f64]) -> f64 {
        if x.len() != self.ambient_dim {
            return f64::INFINITY;
        }
        match &self.kind {
            ManifoldKind::Euclidean => 0.0,
            ManifoldKind::Circle | ManifoldKind::Sphere => (dot(x, x) - 1.0).abs(),
            ManifoldKind::Generic { retract, .. } => dist(&retract(x), x),
        }
    }

    /// Membership predicate at the kind's tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = if self.is_round() { MEMBERSHIP_TOL } else { GENERIC_MEMBERSHIP_TOL };
        self.membership_deviation(x) <= tol
    }

    /// Errors unless `x` passes membership.
    pub fn check_point(&self, x: &[f64], context: &str) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "{context}: point has dimension {}, ambient is {}",
                x.len(),
                self.ambient_dim
            )));
        }
        let dev = self.membership_deviation(x);
        let tol = if self.is_round() { MEMBERSHIP_TOL } else { GENERIC_MEMBERSHIP_TOL };
        if dev > tol {
            return Err(Error::NotOnManifold {
                context: context.to_string(),
                deviation: dev,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// Errors unless `v.vec` is tangent at `v.base` within [`TANGENT_TOL`].
    pub fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        let projected = self.tangent_projection(&v.base, &v.vec);
        let dev = dist(&projected, &v.vec);
        if dev > TANGENT_TOL {
            return Err(Error::NotTangent { deviation: dev });
        }
        Ok(())
    }

    /// Raw tangent projection Π_x v (no membership check).
    pub fn tangent_projection(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        match &self.kind {
            ManifoldKind::Euclidean => v.to_vec(),
            ManifoldKind::Circle | ManifoldKind::Sphere => add_scaled(v, -dot(v, x), x),
            ManifoldKind::Generic { tangent_proj, .. } => tangent_proj(x, v),
        }
    }

    /// Π_x v as a [`TangentVector`] at x, with membership validation.
    pub fn project_to_tangent(&self, x: &[f64], v: &[f64]) -> Result<TangentVector> {
        self.check_point(x, "project_to_tangent")?;
        Ok(TangentVector {
            base: x.to_vec(),
            vec: self.tangent_projection(x, v),
        })
    }

    /// Exponential map exp_base(vec).
    pub fn exp_map(&self, v: &TangentVector) -> Result<Vec<f64>> {
        self.check_point(&v.base, "exp_map")?;
        let len = v.norm();
        if len < 1e-15 {
            return Ok(v.base.clone());
        }
        match &self.kind {
            ManifoldKind::Euclidean => Ok(add_scaled(&v.base, 1.0, &v.vec)),
            ManifoldKind::Circle | ManifoldKind::Sphere => {
                let mut out: Vec<f64> = v
                    .base
                    .iter()
                    .zip(&v.vec)
                    .map(|(x, u)| len.cos() * x + len.sin() * u / len)
                    .collect();
                let n = norm(&out);
                for c in &mut out {
                    *c /= n;
                }
                Ok(out)
            }
            ManifoldKind::Generic { .. } => self.exp_generic(&v.base, &v.vec, len),
        }
    }

    /// Inverse exponential log_x(y) ∈ T_xM.
    ///
    /// For circles and spheres the antipodal cut locus is rejected when
    /// 1 + ⟨x, y⟩ ≤ [`CUT_LOCUS_TOL`]. Generic manifolds solve
    /// exp_x(v) = y by projected-residual shooting.
    pub fn log_map(&self, x: &[f64], y: &[f64]) -> Result<TangentVector> {
        self.check_point(x, "log_map (base)")?;
        self.check_point(y, "log_map (target)")?;
        match &self.kind {
            ManifoldKind::Euclidean => Ok(TangentVector {
                base: x.to_vec(),
                vec: sub(y, x),
            }),
            ManifoldKind::Circle | ManifoldKind::Sphere => {
                let c = dot(x, y).clamp(-1.0, 1.0);
                if 1.0 + c <= CUT_LOCUS_TOL {
                    return Err(Error::CutLocus(format!(
                        "log_map at antipodal pair (1 + ⟨x,y⟩ = {:.3e})",
                        1.0 + c
                    )));
                }
                let w = add_scaled(y, -c, x); // = Π_x(y − x), norm sin θ
                let s = norm(&w);
                // atan2 keeps θ/sin θ well conditioned down to tiny angles,
                // where acos(c) would lose half the digits
                let theta = s.atan2(c);
                let vec = if s < 1e-14 { vec![0.0; x.len()] } else { scale(&w, theta / s) };
                Ok(TangentVector { base: x.to_vec(), vec })
            }
            ManifoldKind::Generic { .. } => self.log_generic(x, y),
        }
    }

    /// Geodesic distance d(x, y).
    pub fn geodesic_distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x, "geodesic_distance")?;
        self.check_point(y, "geodesic_distance")?;
        match &self.kind {
            ManifoldKind::Euclidean => Ok(dist(x, y)),
            ManifoldKind::Circle | ManifoldKind::Sphere => {
                let c = dot(x, y).clamp(-1.0, 1.0);
                let s = norm(&add_scaled(y, -c, x));
                Ok(s.atan2(c))
            }
            ManifoldKind::Generic { .. } => Ok(self.log_generic(x, y)?.norm()),
        }
    }

    /// Induced metric g(u, v) = ⟨u.vec, v.vec⟩ for tangent vectors at the
    /// same base point.
    pub fn riemannian_inner(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        let base_gap = dist(&u.base, &v.base);
        if base_gap > 1e-12 {
            return Err(Error::MismatchedBase(base_gap));
        }
        Ok(dot(&u.vec, &v.vec))
    }

    /// Orthonormal basis of T_xM, Gram–Schmidt over projected ambient axes.
    pub fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.intrinsic_dim);
        for j in 0..self.ambient_dim {
            if basis.len() == self.intrinsic_dim {
                break;
            }
            let mut axis = vec![0.0; self.ambient_dim];
            axis[j] = 1.0;
            let mut w = self.tangent_projection(x, &axis);
            for b in &basis {
                let c = dot(&w, b);
                w = add_scaled(&w, -c, b);
            }
            let n = norm(&w);
            if n > 1e-8 {
                basis.push(scale(&w, 1.0 / n));
            }
        }
        basis
    }

    /// Uniform random point (spheres: normalized Gaussian; flat: standard
    /// Gaussian; generic: retraction of a Gaussian perturbation of a seed
    /// point — callers should prefer intrinsic constructions there).
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            ManifoldKind::Euclidean => {
                (0..self.ambient_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
            }
            ManifoldKind::Circle | ManifoldKind::Sphere => loop {
                let g: Vec<f64> =
                    (0..self.ambient_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let n = norm(&g);
                if n > 1e-12 {
                    return scale(&g, 1.0 / n);
                }
            },
            ManifoldKind::Generic { retract, tube_radius, .. } => {
                let base = self.base_point();
                let g: Vec<f64> = base
                    .iter()
                    .map(|b| b + 0.1 * tube_radius * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                retract(&g)
            }
        }
    }

    /// Uniform unit tangent direction at `x`: isotropic ambient Gaussian
    /// projected to T_xM and normalized, rejecting projections with norm
    /// below 1e-12.
    pub fn random_unit_tangent<R: Rng>(&self, x: &[f64], rng: &mut R) -> TangentVector {
        loop {
            let g: Vec<f64> =
                (0..self.ambient_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let v = self.tangent_projection(x, &g);
            let n = norm(&v);
            if n >= 1e-12 {
                return TangentVector {
                    base: x.to_vec(),
                    vec: scale(&v, 1.0 / n),
                };
            }
        }
    }

    /// A canonical base point: last-axis pole for round manifolds, the
    /// origin for flat space, the retracted last-axis unit vector for
    /// generic kinds (which must therefore cover it with their tube).
    pub fn base_point(&self) -> Vec<f64> {
        match &self.kind {
            ManifoldKind::Euclidean => vec![0.0; self.ambient_dim],
            ManifoldKind::Circle | ManifoldKind::Sphere => {
                let mut p = vec![0.0; self.ambient_dim];
                p[self.ambient_dim - 1] = 1.0;
                p
            }
            ManifoldKind::Generic { retract, .. } => {
                let mut p = vec![0.0; self.ambient_dim];
                p[self.ambient_dim - 1] = 1.0;
                retract(&p)
            }
        }
    }

    // ---- generic-kind geodesic integration ------------------------------

    /// Midpoint projection-retraction integration of the geodesic equation,
    /// `steps` uniform steps of the unit-speed curve of length `len`.
    fn integrate_geodesic(&self, x0: &[f64], unit: &[f64], len: f64, steps: usize) -> Vec<f64> {
        let (retract, proj) = match &self.kind {
            ManifoldKind::Generic { retract, tangent_proj, .. } => (retract, tangent_proj),
            _ => unreachable!("integrate_geodesic is generic-only"),
        };
        let h = len / steps as f64;
        let mut x = x0.to_vec();
        let mut u = unit.to_vec();
        for _ in 0..steps {
            let xm = retract(&add_scaled(&x, 0.5 * h, &u));
            let mut um = proj(&xm, &u);
            let nm = norm(&um);
            if nm > 0.0 {
                um = scale(&um, 1.0 / nm);
            }
            x = retract(&add_scaled(&x, h, &um));
            let mut un = proj(&x, &um);
            let nn = norm(&un);
            if nn > 0.0 {
                un = scale(&un, 1.0 / nn);
            }
            u = un;
        }
        x
    }

    fn exp_generic(&self, x: &[f64], v: &[f64], len: f64) -> Result<Vec<f64>> {
        let unit = scale(v, 1.0 / len);
        let steps = (len / GEODESIC_STEP).ceil().max(1.0) as usize;
        let coarse = self.integrate_geodesic(x, &unit, len, steps);
        let fine = self.integrate_geodesic(x, &unit, len, 2 * steps);
        let err = dist(&coarse, &fine);
        if err > 1e-5 * (1.0 + len) {
            return Err(Error::Accuracy(format!(
                "generic geodesic integration: Richardson check failed (h vs h/2 differ by {err:.3e})"
            )));
        }
        // second-order scheme: Richardson-extrapolate, then retract
        let extrapolated = add_scaled(&fine, 1.0 / 3.0, &sub(&fine, &coarse));
        match &self.kind {
            ManifoldKind::Generic { retract, .. } => Ok(retract(&extrapolated)),
            _ => unreachable!(),
        }
    }

    /// Solve exp_x(v) = y by iterating v ← v + Π_x(y − exp_x(v)).
    fn log_generic(&self, x: &[f64], y: &[f64]) -> Result<TangentVector> {
        let mut v = self.tangent_projection(x, &sub(y, x));
        let scale_ref = 1.0 + norm(y);
        for _ in 0..60 {
            let reached = self.exp_generic(x, &v, norm(&v).max(1e-15))?;
            let residual = sub(y, &reached);
            if norm(&residual) <= 1e-10 * scale_ref {
                return Ok(TangentVector { base: x.to_vec(), vec: v });
            }
            v = add_scaled(&v, 1.0, &self.tangent_projection(x, &residual));
        }
        Err(Error::Accuracy(
            "generic log_map shooting did not converge in 60 iterations".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use std::f64::consts::PI;

    fn sphere2() -> ManifoldModel {
        ManifoldModel::sphere(2).unwrap()
    }

    /// Sphere(2) wrapped as a Generic manifold; the callbacks know nothing
    /// about great-circle formulas, so the integrator cross-checks them.
    fn generic_sphere2() -> ManifoldModel {
        ManifoldModel::generic(
            3,
            2,
            |x| scale(x, 1.0 / norm(x)),
            |x, v| {
                let xn = scale(x, 1.0 / norm(x));
                add_scaled(v, -dot(v, &xn), &xn)
            },
            0.9,
            Some(PI),
        )
        .unwrap()
    }

    #[test]
    fn project_removes_normal_component() {
        let m = sphere2();
        let t = m.project_to_tangent(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.vec, vec![1.0, 2.0, 0.0]);

        let t = m.project_to_tangent(&[1.0, 0.0, 0.0], &[5.0, 0.0, 0.0]).unwrap();
        assert_eq!(t.vec, vec![0.0, 0.0, 0.0]);

        let e = ManifoldModel::euclidean(3).unwrap();
        let t = e.project_to_tangent(&[9.0, 9.0, 9.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.vec, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn project_rejects_off_manifold_points() {
        let m = sphere2();
        assert!(matches!(
            m.project_to_tangent(&[0.0, 0.0, 1.5], &[1.0, 0.0, 0.0]),
            Err(Error::NotOnManifold { .. })
        ));
    }

    #[test]
    fn exp_closed_forms() {
        let c = ManifoldModel::circle();
        let half = c
            .exp_map(&TangentVector { base: vec![1.0, 0.0], vec: vec![0.0, PI] })
            .unwrap();
        assert!(dist(&half, &[-1.0, 0.0]) < 1e-12);

        let m = sphere2();
        let x = vec![0.0, 0.0, 1.0];
        assert_eq!(m.exp_map(&TangentVector::zero(x.clone())).unwrap(), x);

        let q = m
            .exp_map(&TangentVector { base: x, vec: vec![PI / 2.0, 0.0, 0.0] })
            .unwrap();
        assert!(dist(&q, &[1.0, 0.0, 0.0]) < 1e-12);
    }

    #[test]
    fn exp_cross_checked_by_geodesic_ode() {
        // closed-form great circle vs the generic projection integrator
        let closed = sphere2();
        let generic = generic_sphere2();
        let x = vec![0.0, 0.0, 1.0];
        for vec in [vec![PI / 2.0, 0.0, 0.0], vec![0.3, -0.4, 0.0], vec![-1.1, 0.25, 0.0]] {
            let a = closed
                .exp_map(&TangentVector { base: x.clone(), vec: vec.clone() })
                .unwrap();
            let b = generic
                .exp_map(&TangentVector { base: x.clone(), vec })
                .unwrap();
            assert!(dist(&a, &b) < 1e-8, "closed {a:?} vs ode {b:?}");
        }
    }

    #[test]
    fn log_closed_forms_and_cut_locus() {
        let m = sphere2();
        let x = vec![0.0, 0.0, 1.0];
        let l = m.log_map(&x, &x).unwrap();
        assert_eq!(l.vec, vec![0.0, 0.0, 0.0]);

        let c = ManifoldModel::circle();
        let l = c.log_map(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(dist(&l.vec, &[0.0, PI / 2.0]) < 1e-12);

        assert!(matches!(
            m.log_map(&x, &[0.0, 0.0, -1.0]),
            Err(Error::CutLocus(_))
        ));
    }

    #[test]
    fn distances() {
        let m = sphere2();
        let d = m.geodesic_distance(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
        assert_eq!(m.geodesic_distance(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap(), 0.0);

        let e = ManifoldModel::euclidean(2).unwrap();
        assert_eq!(e.geodesic_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn riemannian_inner_is_ambient_dot() {
        let m = sphere2();
        let base = vec![0.0, 0.0, 1.0];
        let u = TangentVector { base: base.clone(), vec: vec![2.0, 0.0, 0.0] };
        let v = TangentVector { base: base.clone(), vec: vec![1.0, 1.0, 0.0] };
        assert_eq!(m.riemannian_inner(&u, &v).unwrap(), 2.0);
        assert_eq!(m.riemannian_inner(&u, &u).unwrap(), 4.0);

        let unit = TangentVector { base: base.clone(), vec: vec![0.0, 1.0, 0.0] };
        assert_eq!(m.riemannian_inner(&unit, &unit).unwrap(), 1.0);
        let ortho = TangentVector { base: base.clone(), vec: vec![1.0, 0.0, 0.0] };
        assert_eq!(m.riemannian_inner(&unit, &ortho).unwrap(), 0.0);

        let w = TangentVector { base: vec![1.0, 0.0, 0.0], vec: vec![0.0, 1.0, 0.0] };
        assert!(matches!(m.riemannian_inner(&u, &w), Err(Error::MismatchedBase(_))));
    }

    #[test]
    fn exp_log_round_trip_below_injectivity() {
        let m = sphere2();
        let mut rng = rng_from_seed(11);
        for _ in 0..200 {
            let x = m.random_point(&mut rng);
            let dir = m.random_unit_tangent(&x, &mut rng);
            let r = 0.9 * m.injectivity_radius() * rng.random::<f64>();
            let v = TangentVector { base: x.clone(), vec: scale(&dir.vec, r) };
            let y = m.exp_map(&v).unwrap();
            let back = m.log_map(&x, &y).unwrap();
            assert!(crate::linalg::max_abs_diff(&back.vec, &v.vec) <= 1e-8);
            let d = m.geodesic_distance(&x, &y).unwrap();
            assert!((d - r).abs() <= 1e-9);
        }
    }

    #[test]
    fn projection_idempotent_and_self_adjoint() {
        let m = sphere2();
        let mut rng = rng_from_seed(3);
        for _ in 0..1000 {
            let x = m.random_point(&mut rng);
            let u: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let pu = m.tangent_projection(&x, &u);
            let ppu = m.tangent_projection(&x, &pu);
            assert!(crate::linalg::max_abs_diff(&pu, &ppu) <= 1e-12);
            let pv = m.tangent_projection(&x, &v);
            assert!((dot(&pu, &v) - dot(&u, &pv)).abs() <= 1e-12);
            // radial direction is normal
            assert!(norm(&m.tangent_projection(&x, &x)) <= 1e-12);
        }
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let m = sphere2();
        let mut rng = rng_from_seed(21);
        for _ in 0..50 {
            let x = m.random_point(&mut rng);
            let basis = m.tangent_basis(&x);
            assert_eq!(basis.len(), 2);
            for (i, b) in basis.iter().enumerate() {
                assert!((norm(b) - 1.0).abs() < 1e-12);
                assert!(dot(b, &x).abs() < 1e-12);
                for c in basis.iter().skip(i + 1) {
                    assert!(dot(b, c).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generic_log_inverts_exp() {
        let g = generic_sphere2();
        let x = g.base_point();
        let v = TangentVector { base: x.clone(), vec: vec![0.4, -0.2, 0.0] };
        let y = g.exp_map(&v).unwrap();
        let back = g.log_map(&x, &y).unwrap();
        let reached = g.exp_map(&back).unwrap();
        assert!(dist(&reached, &y) <= 1e-9);
    }
}
