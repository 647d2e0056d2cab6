//! Discrete Itô integrals, quadratic variations, and the Itô decomposition
//! along [`DeltaPath`]s.
//!
//! Everything is a cell walk over a partition that contains the path's jump
//! times. For a cell [T_{j−1}, T_j]:
//!
//! - the rule sum accumulates ⟨φ(X_{T_{j−1}}), γ(X_{T_{j−1}}, X_{T_j})⟩;
//! - the jump-corrected integral adds ⟨φ(X_{s−}), ΔX_s − γ(X_{s−}, X_s)⟩
//!   for the jump s = T_j, so its jump is exactly ⟨φ(X_{s−}), ΔX_s⟩ and the
//!   result is independent of the rule used internally;
//! - the quadratic variation splits into a continuous part, the Riemann sum
//!   of b(γ, γ) over non-jump moves (mark-free by construction), and a jump
//!   part Σ b(ΔX_s, ΔX_s).
//!
//! For pure-jump paths whose jump times are partition points the cell walk
//! is exact and refinement-invariant; paths with recorded continuous
//! components are handled by refinement sweeps ([`ito_refinement_sweep`])
//! that report empirical stabilization instead of a single number. All
//! series accumulate through compensated summation.

use std::io::Write;
use std::sync::Arc;

use crate::connection::ConnectionRule;
use crate::error::{Error, Result};
use crate::linalg::{dot, sub, KahanSum};
use crate::paths::{fmt_f64, DeltaPath, Partition, TIME_DEDUP_TOL};
use crate::stats::{z_test, ZTestReport};

/// A scalar function with ambient gradient and Hessian evaluators. Values on
/// the manifold only ever see tangent pairings, so any smooth ambient
/// extension works.
pub trait ScalarField: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Row-major a×a second-derivative matrix.
    fn hessian(&self, x: &[f64]) -> Vec<f64>;
}

type CovectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type BilinearFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync>;

/// A cotangent field above the path: the differential of a scalar field, or
/// a raw covector evaluator.
#[derive(Clone)]
pub enum CotangentField {
    Differential(Arc<dyn ScalarField>),
    Raw(CovectorFn),
}

impl CotangentField {
    pub fn differential(f: Arc<dyn ScalarField>) -> Self {
        CotangentField::Differential(f)
    }

    pub fn raw(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        CotangentField::Raw(Arc::new(f))
    }

    pub fn covector(&self, x: &[f64]) -> Vec<f64> {
        match self {
            CotangentField::Differential(f) => f.gradient(x),
            CotangentField::Raw(f) => f(x),
        }
    }

    /// ⟨φ(x), v⟩.
    pub fn pair(&self, x: &[f64], v: &[f64]) -> f64 {
        dot(&self.covector(x), v)
    }
}

/// A 2-tensor field evaluated as a bilinear form on ambient tangent vectors.
#[derive(Clone)]
pub enum TensorField2 {
    /// The induced Riemannian metric (ambient dot product on tangents).
    Metric,
    /// φ ⊗ ψ, i.e. (u, v) ↦ ⟨φ(x), u⟩⟨ψ(x), v⟩.
    Outer(CotangentField, CotangentField),
    Raw(BilinearFn),
}

impl TensorField2 {
    pub fn apply(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match self {
            TensorField2::Metric => dot(u, v),
            TensorField2::Outer(phi, psi) => phi.pair(x, u) * psi.pair(x, v),
            TensorField2::Raw(b) => b(x, u, v),
        }
    }
}

/// A piecewise-constant series sampled at partition times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("series is never empty")
    }

    /// `t,value` rows, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Quadratic variation series split into continuous and jump parts;
/// `total = continuous_part + jump_part` at every partition time.
#[derive(Debug, Clone)]
pub struct QuadraticVariationResult {
    pub times: Vec<f64>,
    pub total: Vec<f64>,
    pub continuous_part: Vec<f64>,
    pub jump_part: Vec<f64>,
}

impl QuadraticVariationResult {
    pub fn terminal_total(&self) -> f64 {
        *self.total.last().expect("series is never empty")
    }

    pub fn terminal_jump(&self) -> f64 {
        *self.jump_part.last().expect("series is never empty")
    }
}

/// The decomposition f(X) = f(X₀) + N + A + B with pointwise residual.
#[derive(Debug, Clone)]
pub struct ItoDecomposition {
    pub times: Vec<f64>,
    /// f(X_t) at partition times.
    pub f: Vec<f64>,
    /// Martingale part: the jump-corrected integral of df.
    pub martingale: Vec<f64>,
    /// Continuous compensator: ½ Hessian contraction against non-jump moves.
    pub compensator: Vec<f64>,
    /// Jump residual sum: Σ f(X_s) − f(X_{s−}) − ⟨df(X_{s−}), ΔX_s⟩.
    pub jump_residual: Vec<f64>,
    /// Pointwise |f(X_t) − f(X₀) − N_t − A_t − B_t|.
    pub residual: Vec<f64>,
}

impl ItoDecomposition {
    /// Worst identity violation over partition times.
    pub fn residual_max(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(*r))
    }

    pub fn terminal_martingale(&self) -> f64 {
        *self.martingale.last().expect("series is never empty")
    }

    /// `t,f,N,A,B,residual` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,f,N,A,B,residual")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(self.times[i]),
                fmt_f64(self.f[i]),
                fmt_f64(self.martingale[i]),
                fmt_f64(self.compensator[i]),
                fmt_f64(self.jump_residual[i]),
                fmt_f64(self.residual[i]),
            )?;
        }
        Ok(())
    }
}

/// One partition cell with resolved endpoint values and jump info.
struct Cell<'p> {
    x_start: &'p [f64],
    x_end: &'p [f64],
    /// Present when a jump lands at the cell's right endpoint:
    /// (pre-jump point X_{s−}, mark ΔX_s based there).
    jump: Option<(&'p [f64], &'p [f64])>,
}

/// Resolves the cell walk, validating that every jump time is a partition
/// point (the integrals' precondition).
fn cells<'p>(path: &'p DeltaPath, partition: &Partition) -> Result<Vec<Cell<'p>>> {
    let events = path.events();
    let times = partition.times();
    let mut out = Vec::with_capacity(times.len().saturating_sub(1));
    let mut ev = 0usize;
    let mut x_prev: &[f64] = &events[0].point;
    for &t in &times[1..] {
        let prev_ev = ev;
        while ev + 1 < events.len() && events[ev + 1].t <= t + TIME_DEDUP_TOL {
            ev += 1;
        }
        let mut jump = None;
        for k in (prev_ev + 1)..=ev {
            if events[k].mark.is_some() {
                let at_cell_end = k == ev && (events[k].t - t).abs() <= TIME_DEDUP_TOL;
                if !at_cell_end {
                    return Err(Error::InvalidParameter(format!(
                        "partition must contain every jump time of the path; jump at t = {} \
                         falls inside a cell",
                        events[k].t
                    )));
                }
                jump = Some((
                    events[k - 1].point.as_slice(),
                    events[k].mark.as_deref().unwrap(),
                ));
            }
        }
        out.push(Cell { x_start: x_prev, x_end: &events[ev].point, jump });
        x_prev = &events[ev].point;
    }
    Ok(out)
}

/// Discrete rule sum J_t = Σ ⟨φ(X_{T_{j−1}}), γ(X_{T_{j−1}}, X_{T_j})⟩ on
/// partition times. Exact and refinement-invariant for pure-jump paths whose
/// jumps are partition points.
pub fn ito_sum(
    phi: &CotangentField,
    path: &DeltaPath,
    rule: &ConnectionRule,
    partition: &Partition,
) -> Result<TimeSeries> {
    let cells = cells(path, partition)?;
    let mut acc = KahanSum::new();
    let mut values = Vec::with_capacity(cells.len() + 1);
    values.push(0.0);
    for cell in &cells {
        if cell.x_start != cell.x_end {
            let gamma = rule.evaluate(cell.x_start, cell.x_end)?;
            acc.add(phi.pair(cell.x_start, &gamma.vec));
        }
        values.push(acc.value());
    }
    Ok(TimeSeries { times: partition.times().to_vec(), values })
}

/// Jump-corrected Itô integral: the rule sum plus, per jump,
/// ⟨φ(X_{s−}), ΔX_s − γ(X_{s−}, X_s)⟩.
///
/// When the path's marks are produced by the same rule the correction
/// vanishes identically; for any marks the output's jump at s is
/// ⟨φ(X_{s−}), ΔX_s⟩, independent of the internal rule.
pub fn ito_integral_delta(
    phi: &CotangentField,
    path: &DeltaPath,
    rule: &ConnectionRule,
    partition: &Partition,
) -> Result<TimeSeries> {
    let cells = cells(path, partition)?;
    let mut acc = KahanSum::new();
    let mut values = Vec::with_capacity(cells.len() + 1);
    values.push(0.0);
    for cell in &cells {
        if cell.x_start != cell.x_end {
            let gamma = rule.evaluate(cell.x_start, cell.x_end)?;
            acc.add(phi.pair(cell.x_start, &gamma.vec));
        }
        if let Some((x_pre, mark)) = cell.jump {
            let gamma_jump = rule.evaluate(x_pre, cell.x_end)?;
            acc.add(phi.pair(x_pre, &sub(mark, &gamma_jump.vec)));
        }
        values.push(acc.value());
    }
    Ok(TimeSeries { times: partition.times().to_vec(), values })
}

/// Quadratic variation of the 2-tensor `b` along the path.
///
/// Jump cells are split at the pre-jump point: the grid move
/// X_{T_{j−1}} → X_{s−} feeds the continuous Riemann sum, the jump itself
/// contributes b(X_{s−})(ΔX_s, ΔX_s) to the jump part. The continuous part
/// therefore never sees the marks, and for pure-jump paths it is exactly 0.
pub fn quadratic_variation(
    b: &TensorField2,
    path: &DeltaPath,
    rule: &ConnectionRule,
    partition: &Partition,
) -> Result<QuadraticVariationResult> {
    let cells = cells(path, partition)?;
    let mut cont = KahanSum::new();
    let mut jump = KahanSum::new();
    let n = cells.len() + 1;
    let mut total = Vec::with_capacity(n);
    let mut continuous_part = Vec::with_capacity(n);
    let mut jump_part = Vec::with_capacity(n);
    total.push(0.0);
    continuous_part.push(0.0);
    jump_part.push(0.0);
    for cell in &cells {
        match cell.jump {
            Some((x_pre, mark)) => {
                if cell.x_start != x_pre {
                    let gamma = rule.evaluate(cell.x_start, x_pre)?;
                    cont.add(b.apply(cell.x_start, &gamma.vec, &gamma.vec));
                }
                jump.add(b.apply(x_pre, mark, mark));
            }
            None => {
                if cell.x_start != cell.x_end {
                    let gamma = rule.evaluate(cell.x_start, cell.x_end)?;
                    cont.add(b.apply(cell.x_start, &gamma.vec, &gamma.vec));
                }
            }
        }
        continuous_part.push(cont.value());
        jump_part.push(jump.value());
        total.push(cont.value() + jump.value());
    }
    Ok(QuadraticVariationResult {
        times: partition.times().to_vec(),
        total,
        continuous_part,
        jump_part,
    })
}

/// Riemannian quadratic variation: [`quadratic_variation`] specialized to
/// the metric tensor, with the path's own marks in the jump part. Grid moves
/// use the tangent-projection rule of the path's manifold.
pub fn riemannian_qv(path: &DeltaPath, partition: &Partition) -> Result<QuadraticVariationResult> {
    let rule_kind = if path.manifold().is_flat() {
        crate::connection::RuleKind::Euclidean
    } else {
        crate::connection::RuleKind::Projection
    };
    let rule = ConnectionRule::new(rule_kind, path.manifold().clone())?;
    quadratic_variation(&TensorField2::Metric, path, &rule, partition)
}

/// Itô decomposition of f(X): martingale part from the jump-corrected
/// integral of df, compensator from ½ Hessian against non-jump moves, jump
/// residual sum, and the pointwise identity residual.
pub fn ito_decompose(
    f: &Arc<dyn ScalarField>,
    path: &DeltaPath,
    rule: &ConnectionRule,
    partition: &Partition,
) -> Result<ItoDecomposition> {
    let cells = cells(path, partition)?;
    let phi = CotangentField::differential(f.clone());
    let x0 = path.initial_point();
    let f0 = f.value(x0);

    let mut n_acc = KahanSum::new();
    let mut a_acc = KahanSum::new();
    let mut b_acc = KahanSum::new();

    let len = cells.len() + 1;
    let mut f_vals = Vec::with_capacity(len);
    let mut n_vals = Vec::with_capacity(len);
    let mut a_vals = Vec::with_capacity(len);
    let mut b_vals = Vec::with_capacity(len);
    let mut residual = Vec::with_capacity(len);
    f_vals.push(f0);
    n_vals.push(0.0);
    a_vals.push(0.0);
    b_vals.push(0.0);
    residual.push(0.0);

    let hess_quadform = |x: &[f64], v: &[f64]| -> f64 {
        let h = f.hessian(x);
        let a = x.len();
        let mut q = 0.0;
        for i in 0..a {
            for j in 0..a {
                q += h[i * a + j] * v[i] * v[j];
            }
        }
        q
    };

    for cell in &cells {
        // martingale increment (rule sum + jump correction)
        if cell.x_start != cell.x_end {
            let gamma = rule.evaluate(cell.x_start, cell.x_end)?;
            n_acc.add(phi.pair(cell.x_start, &gamma.vec));
        }
        match cell.jump {
            Some((x_pre, mark)) => {
                let gamma_jump = rule.evaluate(x_pre, cell.x_end)?;
                n_acc.add(phi.pair(x_pre, &sub(mark, &gamma_jump.vec)));
                // compensator only sees the continuous sub-move
                if cell.x_start != x_pre {
                    let gamma = rule.evaluate(cell.x_start, x_pre)?;
                    a_acc.add(0.5 * hess_quadform(cell.x_start, &gamma.vec));
                }
                // jump residual f(X_s) − f(X_{s−}) − ⟨df(X_{s−}), ΔX_s⟩
                b_acc.add(f.value(cell.x_end) - f.value(x_pre) - phi.pair(x_pre, mark));
            }
            None => {
                if cell.x_start != cell.x_end {
                    let gamma = rule.evaluate(cell.x_start, cell.x_end)?;
                    a_acc.add(0.5 * hess_quadform(cell.x_start, &gamma.vec));
                }
            }
        }
        let ft = f.value(cell.x_end);
        let (n_t, a_t, b_t) = (n_acc.value(), a_acc.value(), b_acc.value());
        f_vals.push(ft);
        n_vals.push(n_t);
        a_vals.push(a_t);
        b_vals.push(b_t);
        residual.push((ft - f0 - n_t - a_t - b_t).abs());
    }

    Ok(ItoDecomposition {
        times: partition.times().to_vec(),
        f: f_vals,
        martingale: n_vals,
        compensator: a_vals,
        jump_residual: b_vals,
        residual,
    })
}

/// z-test that replica terminal values of a martingale part have mean zero.
/// Requires ≥ 30 replicas; callers accept |z| ≤ 3.
pub fn martingale_ztest(samples: &[f64]) -> Result<ZTestReport> {
    z_test(samples)
}

/// One mesh level of a refinement sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub mesh: f64,
    pub terminal: f64,
}

/// Terminal rule-sum values across meshes (each partition carries the
/// path's jump times as mandatory points). Successive differences report
/// the empirical Cauchy rate behind every convergence-in-probability claim.
pub fn ito_refinement_sweep(
    phi: &CotangentField,
    path: &DeltaPath,
    rule: &ConnectionRule,
    meshes: &[f64],
) -> Result<Vec<SweepPoint>> {
    let jump_times = path.jump_times();
    meshes
        .iter()
        .map(|&mesh| {
            let partition = Partition::build(path.horizon(), mesh, &jump_times)?;
            let series = ito_sum(phi, path, rule, &partition)?;
            Ok(SweepPoint { mesh, terminal: series.terminal() })
        })
        .collect()
}

/// Ready-made scalar fields for tests and experiment configs.
pub mod fields {
    use super::ScalarField;
    use std::sync::Arc;

    struct Coordinate(usize);

    impl ScalarField for Coordinate {
        fn value(&self, x: &[f64]) -> f64 {
            x[self.0]
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let mut g = vec![0.0; x.len()];
            g[self.0] = 1.0;
            g
        }
        fn hessian(&self, x: &[f64]) -> Vec<f64> {
            vec![0.0; x.len() * x.len()]
        }
    }

    struct Linear(Vec<f64>);

    impl ScalarField for Linear {
        fn value(&self, x: &[f64]) -> f64 {
            crate::linalg::dot(&self.0, x)
        }
        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            self.0.clone()
        }
        fn hessian(&self, x: &[f64]) -> Vec<f64> {
            vec![0.0; x.len() * x.len()]
        }
    }

    struct Constant(f64);

    impl ScalarField for Constant {
        fn value(&self, _x: &[f64]) -> f64 {
            self.0
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![0.0; x.len()]
        }
        fn hessian(&self, x: &[f64]) -> Vec<f64> {
            vec![0.0; x.len() * x.len()]
        }
    }

    /// f = x_i x_j.
    struct Product(usize, usize);

    impl ScalarField for Product {
        fn value(&self, x: &[f64]) -> f64 {
            x[self.0] * x[self.1]
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let mut g = vec![0.0; x.len()];
            g[self.0] += x[self.1];
            g[self.1] += x[self.0];
            g
        }
        fn hessian(&self, x: &[f64]) -> Vec<f64> {
            let a = x.len();
            let mut h = vec![0.0; a * a];
            h[self.0 * a + self.1] += 1.0;
            h[self.1 * a + self.0] += 1.0;
            h
        }
    }

    /// f = ‖x‖².
    struct NormSq;

    impl ScalarField for NormSq {
        fn value(&self, x: &[f64]) -> f64 {
            crate::linalg::norm_sq(x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            crate::linalg::scale(x, 2.0)
        }
        fn hessian(&self, x: &[f64]) -> Vec<f64> {
            let a = x.len();
            let mut h = vec![0.0; a * a];
            for i in 0..a {
                h[i * a + i] = 2.0;
            }
            h
        }
    }

    /// f = exp(x_i).
    struct ExpCoord(usize);

    impl ScalarField for ExpCoord {
        fn value(&self, x: &[f64]) -> f64 {
            x[self.0].exp()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let mut g = vec![0.0; x.len()];
            g[self.0] = x[self.0].exp();
            g
        }
        fn hessian(&self, x: &[f64]) -> Vec<f64> {
            let a = x.len();
            let mut h = vec![0.0; a * a];
            h[self.0 * a + self.0] = x[self.0].exp();
            h
        }
    }

    pub fn coordinate(i: usize) -> Arc<dyn ScalarField> {
        Arc::new(Coordinate(i))
    }

    pub fn linear(coeffs: Vec<f64>) -> Arc<dyn ScalarField> {
        Arc::new(Linear(coeffs))
    }

    pub fn constant(c: f64) -> Arc<dyn ScalarField> {
        Arc::new(Constant(c))
    }

    pub fn product(i: usize, j: usize) -> Arc<dyn ScalarField> {
        Arc::new(Product(i, j))
    }

    pub fn norm_sq() -> Arc<dyn ScalarField> {
        Arc::new(NormSq)
    }

    pub fn exp_coord(i: usize) -> Arc<dyn ScalarField> {
        Arc::new(ExpCoord(i))
    }

    /// A standard batch of smooth test functions on ℝ^a.
    pub fn test_battery(ambient_dim: usize) -> Vec<Arc<dyn ScalarField>> {
        let mut fs: Vec<Arc<dyn ScalarField>> = vec![
            coordinate(0),
            linear((0..ambient_dim).map(|i| (i + 1) as f64).collect()),
            norm_sq(),
            exp_coord(0),
        ];
        if ambient_dim >= 2 {
            fs.push(product(0, 1));
        } else {
            fs.push(constant(2.5));
        }
        fs
    }
}
