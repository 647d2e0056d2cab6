//! Connection rules γ : M × M → TM.
//!
//! A connection rule sends a pair of points to a tangent vector at the
//! first, with γ(x, x) = 0 and the differential of γ(x, ·) at x equal to the
//! identity on T_xM. Three rules are provided:
//!
//! - `Euclidean`: γ(x, y) = y − x, valid on flat space only;
//! - `Projection`: γ(x, y) = Π_x(y − x) on an embedded submanifold;
//! - `Exponential`: γ(x, y) = exp_x⁻¹ y away from the cut locus.
//!
//! All three induce the Levi-Civita connection, so on a sphere the
//! projection and exponential rules agree to second order in d(x, y).
//! [`ConnectionRule::check_axioms`] certifies the axioms numerically with
//! central finite differences in an orthonormal tangent basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, TangentVector};
use crate::linalg::{dot, scale, sub};

/// Step for the finite-difference differential in axiom (iii).
pub const AXIOM_FD_STEP: f64 = 1e-5;
/// Tolerance certified by the axiom checker.
pub const AXIOM_TOL: f64 = 1e-5;

/// Which γ to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleKind {
    /// y − x (flat space only).
    Euclidean,
    /// Π_x(y − x).
    Projection,
    /// exp_x⁻¹ y.
    Exponential,
}

impl RuleKind {
    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::Euclidean => "euclidean",
            RuleKind::Projection => "projection",
            RuleKind::Exponential => "exponential",
        }
    }
}

/// A connection rule bound to a manifold model.
#[derive(Debug, Clone)]
pub struct ConnectionRule {
    pub kind: RuleKind,
    pub manifold: ManifoldModel,
}

/// Worst-case deviations from the three axioms over random samples.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub rule: &'static str,
    pub samples: usize,
    pub seed: u64,
    /// max |γ(x,y) − Π_x γ(x,y)| — axiom (i), tangency.
    pub max_dev_tangency: f64,
    /// max |γ(x,x)| — axiom (ii), zero on the diagonal.
    pub max_dev_diagonal: f64,
    /// max entrywise |Dγ(x,·)|_x − id| over tangent bases — axiom (iii).
    pub max_dev_differential: f64,
}

impl AxiomReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_dev_tangency <= tol
            && self.max_dev_diagonal <= tol
            && self.max_dev_differential <= tol
    }
}

impl ConnectionRule {
    pub fn new(kind: RuleKind, manifold: ManifoldModel) -> Result<Self> {
        if kind == RuleKind::Euclidean && !manifold.is_flat() {
            return Err(Error::InvalidParameter(
                "the Euclidean rule y − x is only a connection rule on flat space \
                 (the ambient difference is not tangent on a curved manifold)"
                    .into(),
            ));
        }
        Ok(Self { kind, manifold })
    }

    /// γ(x, y) ∈ T_xM.
    ///
    /// γ(x, x) is the exact zero vector for all kinds. The exponential kind
    /// propagates a cut-locus error near antipodal pairs.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<TangentVector> {
        self.manifold.check_point(x, "connection rule (x)")?;
        self.manifold.check_point(y, "connection rule (y)")?;
        if x == y {
            return Ok(TangentVector::zero(x.to_vec()));
        }
        match self.kind {
            RuleKind::Euclidean => Ok(TangentVector {
                base: x.to_vec(),
                vec: sub(y, x),
            }),
            RuleKind::Projection => Ok(TangentVector {
                base: x.to_vec(),
                vec: self.manifold.tangent_projection(x, &sub(y, x)),
            }),
            RuleKind::Exponential => self.manifold.log_map(x, y),
        }
    }

    /// Numeric certificate for Definition-style axioms (i)–(iii) over
    /// `samples` random base points. Deterministic given `seed`.
    ///
    /// Axiom (iii) moves y along geodesics through x: for each orthonormal
    /// tangent direction e_i the column (γ(x, exp_x(δe_i)) − γ(x, exp_x(−δe_i)))/2δ
    /// is compared against e_i, with δ = [`AXIOM_FD_STEP`].
    pub fn check_axioms(&self, samples: usize, seed: u64) -> Result<AxiomReport> {
        if samples == 0 {
            return Err(Error::InvalidParameter("axiom check needs samples ≥ 1".into()));
        }
        let mut rng = crate::rng::rng_from_seed(seed);
        let m = &self.manifold;
        let mut dev_tan = 0.0_f64;
        let mut dev_diag = 0.0_f64;
        let mut dev_diff = 0.0_f64;

        // near-diagonal sampling radius; the checker certifies behavior
        // where the rule must be C², not far-field
        let r_max = (0.3_f64).min(0.45 * m.injectivity_radius());

        for _ in 0..samples {
            let x = m.random_point(&mut rng);

            // (ii) exact zero on the diagonal
            dev_diag = dev_diag.max(self.evaluate(&x, &x)?.norm());

            // (i) tangency at a random nearby target
            let dir = m.random_unit_tangent(&x, &mut rng);
            let r = r_max * rand::Rng::random::<f64>(&mut rng);
            let y = m.exp_map(&TangentVector {
                base: x.clone(),
                vec: scale(&dir.vec, r),
            })?;
            let g = self.evaluate(&x, &y)?;
            let projected = m.tangent_projection(&x, &g.vec);
            dev_tan = dev_tan.max(crate::linalg::max_abs_diff(&projected, &g.vec));

            // (iii) differential = identity on T_xM
            let basis = m.tangent_basis(&x);
            for (i, e_i) in basis.iter().enumerate() {
                let y_plus = m.exp_map(&TangentVector {
                    base: x.clone(),
                    vec: scale(e_i, AXIOM_FD_STEP),
                })?;
                let y_minus = m.exp_map(&TangentVector {
                    base: x.clone(),
                    vec: scale(e_i, -AXIOM_FD_STEP),
                })?;
                let g_plus = self.evaluate(&x, &y_plus)?;
                let g_minus = self.evaluate(&x, &y_minus)?;
                let column = scale(&sub(&g_plus.vec, &g_minus.vec), 0.5 / AXIOM_FD_STEP);
                for (j, e_j) in basis.iter().enumerate() {
                    let entry = dot(&column, e_j);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    dev_diff = dev_diff.max((entry - expected).abs());
                }
            }
        }

        Ok(AxiomReport {
            rule: self.kind.name(),
            samples,
            seed,
            max_dev_tangency: dev_tan,
            max_dev_diagonal: dev_diag,
            max_dev_differential: dev_diff,
        })
    }
}
