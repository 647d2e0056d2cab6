//! Replica-parallel experiment drivers shared by the CLI and the acceptance
//! suite. Each driver owns its seed-splitting layout, so identical
//! (config, seed) pairs reproduce identical outputs regardless of threading.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::connection::{AxiomReport, ConnectionRule, RuleKind};
use crate::error::{Error, Result};
use crate::fractional::{
    jump_energy_phi, lagrange_residual, levy_system_check, FractionalConfig, FractionalReport,
    MapIntoManifold,
};
use crate::geometry::{ManifoldModel, TangentVector};
use crate::integrator::{self, fields, CotangentField, ScalarField};
use crate::linalg::scale;
use crate::parallel::replica_map;
use crate::paths::{fmt_f64, jump_skeleton, DeltaPath};
use crate::processes::{
    antipodal_poisson_circle, classify_convergence, geodesic_jump_martingale,
    projection_martingale, simulate_stable, tail_event_count, truncated_pareto_cdf,
    ClassifierConfig, Convergence, JumpSchedule, ScheduleMode, SmallJumpMode,
    StableProcessConfig,
};
use crate::rng::{rng_from_seed, split_seed};
use crate::stats::{ks_critical_1pct, ks_statistic, z_test, ZTestReport};

/// Which martingale constructor drives a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MartingaleKind {
    Geodesic,
    Projection,
}

impl MartingaleKind {
    pub fn build(
        &self,
        m: &ManifoldModel,
        schedule: &JumpSchedule,
        horizon: f64,
        seed: u64,
    ) -> Result<DeltaPath> {
        match self {
            MartingaleKind::Geodesic => geodesic_jump_martingale(m, schedule, horizon, seed),
            MartingaleKind::Projection => projection_martingale(m, schedule, horizon, seed),
        }
    }
}

/// One replica's row in the results CSV.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicaRecord {
    pub replica: u64,
    pub converged: bool,
    pub qv_total: f64,
    pub nf_terminal: f64,
}

/// `replica,converged,qv_total,Nf_terminal` rows.
pub fn write_replica_csv<W: Write>(records: &[ReplicaRecord], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "replica,converged,qv_total,Nf_terminal")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{}",
            r.replica,
            u8::from(r.converged),
            fmt_f64(r.qv_total),
            fmt_f64(r.nf_terminal)
        )?;
    }
    Ok(())
}

fn integration_rule(m: &ManifoldModel) -> Result<ConnectionRule> {
    let kind = if m.is_flat() { RuleKind::Euclidean } else { RuleKind::Projection };
    ConnectionRule::new(kind, m.clone())
}

fn replica_record(
    replica: u64,
    path: &DeltaPath,
    f: &Arc<dyn ScalarField>,
    classifier: &ClassifierConfig,
) -> Result<ReplicaRecord> {
    let partition = jump_skeleton(path)?;
    let qv = integrator::riemannian_qv(path, &partition)?;
    let rule = integration_rule(path.manifold())?;
    let phi = CotangentField::differential(f.clone());
    let nf = integrator::ito_integral_delta(&phi, path, &rule, &partition)?;
    let verdict = classify_convergence(path, classifier)?;
    Ok(ReplicaRecord {
        replica,
        converged: verdict == Convergence::Converged,
        qv_total: qv.terminal_total(),
        nf_terminal: nf.terminal(),
    })
}

/// Replica sweep of one martingale constructor: per replica the Riemannian
/// QV, the terminal martingale part of `f`, and the tail verdict.
#[allow(clippy::too_many_arguments)]
pub fn martingale_sweep(
    m: &ManifoldModel,
    kind: MartingaleKind,
    schedule: &JumpSchedule,
    horizon: f64,
    replicas: usize,
    seed: u64,
    classifier: &ClassifierConfig,
    f: &Arc<dyn ScalarField>,
) -> Result<Vec<ReplicaRecord>> {
    let out: Vec<Result<ReplicaRecord>> = replica_map(replicas as u64, |i| {
        let path = kind.build(m, schedule, horizon, split_seed(seed, i))?;
        replica_record(i, &path, f, classifier)
    });
    out.into_iter().collect()
}

/// Terminal martingale-part samples for every ambient coordinate function,
/// one inner vector per coordinate.
pub fn martingale_coordinate_samples(
    m: &ManifoldModel,
    kind: MartingaleKind,
    schedule: &JumpSchedule,
    horizon: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let dim = m.ambient_dim();
    let coord_fields: Vec<CotangentField> = (0..dim)
        .map(|i| CotangentField::differential(fields::coordinate(i)))
        .collect();
    let per_replica: Vec<Result<Vec<f64>>> = replica_map(replicas as u64, |i| {
        let path = kind.build(m, schedule, horizon, split_seed(seed, i))?;
        let partition = jump_skeleton(&path)?;
        let rule = integration_rule(m)?;
        coord_fields
            .iter()
            .map(|phi| {
                integrator::ito_integral_delta(phi, &path, &rule, &partition)
                    .map(|s| s.terminal())
            })
            .collect()
    });
    let mut samples = vec![Vec::with_capacity(replicas); dim];
    for row in per_replica {
        for (c, v) in row?.into_iter().enumerate() {
            samples[c].push(v);
        }
    }
    Ok(samples)
}

/// z-test per ambient coordinate function.
pub fn martingale_coordinate_ztests(
    m: &ManifoldModel,
    kind: MartingaleKind,
    schedule: &JumpSchedule,
    horizon: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<ZTestReport>> {
    martingale_coordinate_samples(m, kind, schedule, horizon, replicas, seed)?
        .iter()
        .map(|s| z_test(s))
        .collect()
}

/// Schedule with `count` uniform jump times on (0, horizon] and radii
/// r_k = c·k^{−β}.
pub fn uniform_fixed_schedule(count: usize, horizon: f64, c: f64, beta: f64) -> JumpSchedule {
    JumpSchedule {
        mode: ScheduleMode::FixedTimes(
            (1..=count).map(|k| horizon * k as f64 / count as f64).collect(),
        ),
        radius_scale: c,
        radius_decay: beta,
    }
}

/// Converged fraction for one radius-decay exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub beta: f64,
    pub replicas: usize,
    pub converged_fraction: f64,
    /// Binomial standard error of the fraction.
    pub std_error: f64,
}

/// Convergence dichotomy sweep across radius-decay exponents β. Larger β
/// (faster-shrinking jumps, square-summable radii) must classify as
/// converged more often.
#[allow(clippy::too_many_arguments)]
pub fn convergence_sweep(
    m: &ManifoldModel,
    kind: MartingaleKind,
    betas: &[f64],
    radius_scale: f64,
    jumps: usize,
    horizon: f64,
    replicas: usize,
    seed: u64,
    classifier: &ClassifierConfig,
) -> Result<Vec<(ConvergenceSummary, Vec<ReplicaRecord>)>> {
    betas
        .iter()
        .enumerate()
        .map(|(b_idx, &beta)| {
            let schedule = uniform_fixed_schedule(jumps, horizon, radius_scale, beta);
            let records = martingale_sweep(
                m,
                kind,
                &schedule,
                horizon,
                replicas,
                split_seed(seed, 1_000_000 + b_idx as u64),
                classifier,
                &fields::coordinate(0),
            )?;
            let k = records.iter().filter(|r| r.converged).count();
            let p = k as f64 / replicas as f64;
            let se = (p * (1.0 - p) / replicas as f64).sqrt();
            Ok((
                ConvergenceSummary {
                    beta,
                    replicas,
                    converged_fraction: p,
                    std_error: se,
                },
                records,
            ))
        })
        .collect()
}

/// Replica outcome of the antipodal Poisson counterexample.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleSummary {
    pub replicas: usize,
    /// Riemannian QV vanished identically on every replica.
    pub qv_identically_zero: bool,
    /// Martingale parts of the whole test battery vanished identically.
    pub integrals_identically_zero: bool,
    /// Every replica with ≥ 2 tail events classified as oscillating.
    pub tail_activity_implies_oscillation: bool,
    pub oscillating_count: usize,
}

/// Runs the antipodal Poisson counterexample: zero quadratic variation and
/// zero martingale parts, yet oscillation whenever the tail stays active.
pub fn counterexample_run(
    rate: f64,
    horizon: f64,
    replicas: usize,
    seed: u64,
    classifier: &ClassifierConfig,
) -> Result<(CounterexampleSummary, Vec<ReplicaRecord>)> {
    let battery = fields::test_battery(2);
    let per: Vec<Result<(ReplicaRecord, bool, bool, bool)>> =
        replica_map(replicas as u64, |i| {
            let path = antipodal_poisson_circle(rate, horizon, split_seed(seed, i))?;
            let partition = jump_skeleton(&path)?;
            let qv = integrator::riemannian_qv(&path, &partition)?;
            let qv_zero = qv.total.iter().all(|v| *v == 0.0);
            let rule = integration_rule(path.manifold())?;
            let mut integrals_zero = true;
            for f in &battery {
                let phi = CotangentField::differential(f.clone());
                let series = integrator::ito_integral_delta(&phi, &path, &rule, &partition)?;
                integrals_zero &= series.values.iter().all(|v| *v == 0.0);
            }
            let verdict = classify_convergence(&path, classifier)?;
            let tail_ok = tail_event_count(&path, classifier.tail_fraction) < 2
                || verdict == Convergence::Oscillating;
            let record = ReplicaRecord {
                replica: i,
                converged: verdict == Convergence::Converged,
                qv_total: qv.terminal_total(),
                nf_terminal: 0.0,
            };
            Ok((record, qv_zero, integrals_zero, tail_ok))
        });

    let mut records = Vec::with_capacity(replicas);
    let mut qv_all = true;
    let mut int_all = true;
    let mut tail_all = true;
    let mut oscillating = 0;
    for r in per {
        let (rec, qv_zero, int_zero, tail_ok) = r?;
        qv_all &= qv_zero;
        int_all &= int_zero;
        tail_all &= tail_ok;
        if !rec.converged {
            oscillating += 1;
        }
        records.push(rec);
    }
    Ok((
        CounterexampleSummary {
            replicas,
            qv_identically_zero: qv_all,
            integrals_identically_zero: int_all,
            tail_activity_implies_oscillation: tail_all,
            oscillating_count: oscillating,
        },
        records,
    ))
}

/// Worst telescoping residual over random pure-jump paths and the standard
/// function battery.
#[derive(Debug, Clone, Serialize)]
pub struct ItoIdentitySummary {
    pub paths: usize,
    pub functions: usize,
    pub worst_residual: f64,
}

/// Random pure-jump paths (random schedules, both mark kinds) pushed through
/// the full decomposition; the identity f(X_T) = f(X₀) + N + A + B must
/// telescope to machine accumulation. Returns the summary and the worst
/// residual per path.
pub fn ito_identity_run_detailed(
    m: &ManifoldModel,
    paths: usize,
    max_jumps: usize,
    seed: u64,
) -> Result<(ItoIdentitySummary, Vec<f64>)> {
    let battery = fields::test_battery(m.ambient_dim());
    let rule = integration_rule(m)?;
    let per: Vec<Result<f64>> = replica_map(paths as u64, |i| {
        let mut rng = rng_from_seed(split_seed(seed, i));
        let jumps = 1 + (rand::Rng::random::<u64>(&mut rng) as usize) % max_jumps;
        let c = 0.05 + 0.4 * rand::Rng::random::<f64>(&mut rng);
        let beta = 0.3 + 0.6 * rand::Rng::random::<f64>(&mut rng);
        let schedule = uniform_fixed_schedule(jumps, 1.0, c, beta);
        let kind = if i % 2 == 0 { MartingaleKind::Geodesic } else { MartingaleKind::Projection };
        let path = kind.build(m, &schedule, 1.0, split_seed(seed, 1_000_000 + i))?;
        let partition = jump_skeleton(&path)?;
        let mut worst = 0.0_f64;
        for f in &battery {
            let d = integrator::ito_decompose(f, &path, &rule, &partition)?;
            worst = worst.max(d.residual_max());
        }
        Ok(worst)
    });
    let residuals: Vec<f64> = per.into_iter().collect::<Result<_>>()?;
    let worst = residuals.iter().fold(0.0_f64, |m, r| m.max(*r));
    Ok((
        ItoIdentitySummary { paths, functions: battery.len(), worst_residual: worst },
        residuals,
    ))
}

/// [`ito_identity_run_detailed`] without the per-path table.
pub fn ito_identity_run(
    m: &ManifoldModel,
    paths: usize,
    max_jumps: usize,
    seed: u64,
) -> Result<ItoIdentitySummary> {
    ito_identity_run_detailed(m, paths, max_jumps, seed).map(|(s, _)| s)
}

/// Worst difference between internal Projection and Exponential rules for
/// the jump-corrected integral with fixed marks.
pub fn rule_independence_run(paths: usize, jumps: usize, seed: u64) -> Result<f64> {
    let m = ManifoldModel::sphere(2)?;
    let proj = ConnectionRule::new(RuleKind::Projection, m.clone())?;
    let exp = ConnectionRule::new(RuleKind::Exponential, m.clone())?;
    let battery = fields::test_battery(3);
    let per: Vec<Result<f64>> = replica_map(paths as u64, |i| {
        let schedule = uniform_fixed_schedule(jumps, 1.0, 0.4, 0.6);
        let kind = if i % 2 == 0 { MartingaleKind::Geodesic } else { MartingaleKind::Projection };
        let path = kind.build(&m, &schedule, 1.0, split_seed(seed, i))?;
        let partition = jump_skeleton(&path)?;
        let mut worst = 0.0_f64;
        for f in &battery {
            let phi = CotangentField::differential(f.clone());
            let a = integrator::ito_integral_delta(&phi, &path, &proj, &partition)?;
            let b = integrator::ito_integral_delta(&phi, &path, &exp, &partition)?;
            for (x, y) in a.values.iter().zip(&b.values) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(worst)
    });
    let mut worst = 0.0_f64;
    for r in per {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Axiom certification over the standard rule/manifold matrix.
pub fn axiom_matrix(samples: usize, seed: u64) -> Result<Vec<(String, AxiomReport)>> {
    let mut out = Vec::new();
    let sphere = ManifoldModel::sphere(2)?;
    let circle = ManifoldModel::circle();
    let flat = ManifoldModel::euclidean(3)?;
    for (label, rule) in [
        ("projection/sphere2", ConnectionRule::new(RuleKind::Projection, sphere.clone())?),
        ("exponential/sphere2", ConnectionRule::new(RuleKind::Exponential, sphere)?),
        ("projection/circle", ConnectionRule::new(RuleKind::Projection, circle.clone())?),
        ("exponential/circle", ConnectionRule::new(RuleKind::Exponential, circle)?),
        ("euclidean/euclidean3", ConnectionRule::new(RuleKind::Euclidean, flat)?),
    ] {
        out.push((label.to_string(), rule.check_axioms(samples, seed)?));
    }
    Ok(out)
}

/// Worst |γ_Proj − γ_Exp| − d³ margin over random near pairs on the sphere;
/// negative means the second-order agreement bound holds everywhere.
pub fn rule_agreement_run(pairs: usize, max_distance: f64, seed: u64) -> Result<f64> {
    let m = ManifoldModel::sphere(2)?;
    let proj = ConnectionRule::new(RuleKind::Projection, m.clone())?;
    let exp = ConnectionRule::new(RuleKind::Exponential, m.clone())?;
    let mut rng = rng_from_seed(seed);
    let mut worst_margin = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let x = m.random_point(&mut rng);
        let dir = m.random_unit_tangent(&x, &mut rng);
        let r = max_distance * rand::Rng::random::<f64>(&mut rng);
        let y = m.exp_map(&TangentVector { base: x.clone(), vec: scale(&dir.vec, r) })?;
        let gp = proj.evaluate(&x, &y)?;
        let ge = exp.evaluate(&x, &y)?;
        let d = m.geodesic_distance(&x, &y)?;
        let gap = crate::linalg::dist(&gp.vec, &ge.vec);
        worst_margin = worst_margin.max(gap - d.powi(3));
    }
    Ok(worst_margin)
}

/// Exactness check of the closed-form QV laws for both constructors.
#[derive(Debug, Clone, Serialize)]
pub struct QvLawSummary {
    pub jumps: usize,
    pub geodesic_error: f64,
    pub projection_error: f64,
}

/// |QV − Σ r_k²| for geodesic marks and |QV − Σ sin² r_k| for projection
/// marks on fixed schedules.
pub fn qv_law_run(jumps: usize, c: f64, beta: f64, seed: u64) -> Result<QvLawSummary> {
    let m = ManifoldModel::sphere(2)?;
    let schedule = uniform_fixed_schedule(jumps, 1.0, c, beta);

    let geodesic = geodesic_jump_martingale(&m, &schedule, 1.0, seed)?;
    let p = jump_skeleton(&geodesic)?;
    let qv_g = integrator::riemannian_qv(&geodesic, &p)?.terminal_total();
    let mut expected_g = crate::linalg::KahanSum::new();
    for k in 1..=jumps {
        let r = schedule.radius(k);
        expected_g.add(r * r);
    }

    let projection = projection_martingale(&m, &schedule, 1.0, split_seed(seed, 1))?;
    let p = jump_skeleton(&projection)?;
    let qv_p = integrator::riemannian_qv(&projection, &p)?.terminal_total();
    let mut expected_p = crate::linalg::KahanSum::new();
    for k in 1..=jumps {
        let r = schedule.radius(k);
        expected_p.add(r.sin() * r.sin());
    }

    Ok(QvLawSummary {
        jumps,
        geodesic_error: (qv_g - expected_g.value()).abs(),
        projection_error: (qv_p - expected_p.value()).abs(),
    })
}

/// Empirical jump-magnitude law of the truncated stable driver vs the exact
/// truncated Pareto CDF.
#[derive(Debug, Clone, Serialize)]
pub struct StableTailSummary {
    pub dim: usize,
    pub alpha: f64,
    pub truncation: f64,
    pub sample_size: usize,
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
    pub pass: bool,
}

/// Collects `count` jump magnitudes from truncated stable paths and runs the
/// KS test against the truncated Pareto law at the 1% level.
pub fn stable_tail_run(
    dim: usize,
    alpha: f64,
    truncation: f64,
    count: usize,
    seed: u64,
) -> Result<(StableTailSummary, Vec<f64>)> {
    let intensity = crate::processes::stable_jump_intensity(&StableProcessConfig {
        alpha,
        dim,
        truncation,
        horizon: 1.0,
        small_jump_mode: SmallJumpMode::Drop,
    })?;
    // one long path sized to overshoot the requested count slightly
    let horizon = 1.25 * count as f64 / intensity;
    let cfg = StableProcessConfig {
        alpha,
        dim,
        truncation,
        horizon,
        small_jump_mode: SmallJumpMode::Drop,
    };
    let mut magnitudes = Vec::with_capacity(count + 64);
    let mut attempt = 0u64;
    while magnitudes.len() < count {
        let path = simulate_stable(&cfg, split_seed(seed, attempt))?;
        for k in 1..path.events().len() {
            magnitudes.push(path.mark_at(k).expect("pure jump").norm());
        }
        attempt += 1;
    }
    magnitudes.truncate(count);
    let d = ks_statistic(&magnitudes, truncated_pareto_cdf(truncation, alpha));
    let crit = ks_critical_1pct(count);
    Ok((
        StableTailSummary {
            dim,
            alpha,
            truncation,
            sample_size: count,
            ks_statistic: d,
            ks_critical_1pct: crit,
            pass: d <= crit,
        },
        magnitudes,
    ))
}

/// Fraction of pushforward replicas classified converged, with the binomial
/// standard error.
pub fn pushforward_convergence_fraction(
    h: &MapIntoManifold,
    stable_cfg: &StableProcessConfig,
    replicas: usize,
    seed: u64,
    classifier: &ClassifierConfig,
) -> Result<(f64, f64)> {
    let per: Vec<Result<bool>> = replica_map(replicas as u64, |i| {
        let z = simulate_stable(stable_cfg, split_seed(seed, i))?;
        let pushed = crate::processes::pushforward(h, &z)?;
        Ok(classify_convergence(&pushed, classifier)? == Convergence::Converged)
    });
    let mut k = 0usize;
    for r in per {
        if r? {
            k += 1;
        }
    }
    let p = k as f64 / replicas as f64;
    let se = (p * (1.0 - p) / replicas as f64).sqrt();
    Ok((p, se))
}

/// Named map registry for configs.
pub fn named_map(name: &str) -> Result<MapIntoManifold> {
    match name {
        "circle-arctan" => Ok(MapIntoManifold::circle_arctan()),
        "circle-linear" => Ok(MapIntoManifold::circle_linear()),
        "constant-circle" => Ok(MapIntoManifold::constant_circle()),
        other => Err(Error::InvalidParameter(format!(
            "unknown map `{other}` (known: circle-arctan, circle-linear, constant-circle)"
        ))),
    }
}

/// Full fractional residual report at a point.
pub fn fractional_residual_report(
    map_name: &str,
    point: &[f64],
    cfg: &FractionalConfig,
) -> Result<FractionalReport> {
    let h = named_map(map_name)?;
    let lr = lagrange_residual(&h, point, cfg)?;
    let phi = jump_energy_phi(&h, point, cfg)?;
    Ok(FractionalReport {
        alpha: cfg.alpha,
        m: cfg.m,
        point: point.to_vec(),
        operator_value: Some(lr.operator_value),
        residual: Some(lr.residual),
        phi: Some(phi.value[0]),
        lhs: None,
        rhs: None,
        se_lhs: None,
        se_rhs: None,
        compatible: None,
    })
}

/// Full Lévy-system report at a start point.
pub fn levy_system_report(
    map_name: &str,
    z0: &[f64],
    cfg: &FractionalConfig,
    stable_cfg: &StableProcessConfig,
    replicas: usize,
    seed: u64,
) -> Result<FractionalReport> {
    let h = named_map(map_name)?;
    let r = levy_system_check(&h, z0, cfg, stable_cfg, replicas, seed)?;
    Ok(FractionalReport {
        alpha: cfg.alpha,
        m: cfg.m,
        point: z0.to_vec(),
        operator_value: None,
        residual: None,
        phi: Some(r.phi_at_start),
        lhs: Some(r.lhs),
        rhs: Some(r.rhs),
        se_lhs: Some(r.se_lhs),
        se_rhs: Some(r.se_rhs),
        compatible: Some(r.compatible),
    })
}

/// Harness used by tests that need a quick mean/se of replica statistics.
pub fn fraction_with_se(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;

    #[test]
    fn replica_sweep_is_thread_invariant() {
        // results keyed by replica index, not by scheduling
        let m = ManifoldModel::sphere(2).unwrap();
        let schedule = uniform_fixed_schedule(16, 1.0, 0.3, 0.6);
        let classifier = ClassifierConfig::with_defaults(&m).unwrap();
        let a = martingale_sweep(
            &m,
            MartingaleKind::Projection,
            &schedule,
            1.0,
            64,
            9,
            &classifier,
            &fields::coordinate(0),
        )
        .unwrap();
        let b = martingale_sweep(
            &m,
            MartingaleKind::Projection,
            &schedule,
            1.0,
            64,
            9,
            &classifier,
            &fields::coordinate(0),
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.qv_total, y.qv_total);
            assert_eq!(x.nf_terminal, y.nf_terminal);
        }
    }

    #[test]
    fn counterexample_summary_holds() {
        let m = ManifoldModel::circle();
        let classifier = ClassifierConfig::with_defaults(&m).unwrap();
        let (summary, records) = counterexample_run(1.0, 50.0, 32, 5, &classifier).unwrap();
        assert!(summary.qv_identically_zero);
        assert!(summary.integrals_identically_zero);
        assert!(summary.tail_activity_implies_oscillation);
        assert_eq!(records.len(), 32);
    }

    #[test]
    fn ito_identity_residuals_are_machine_level() {
        let m = ManifoldModel::sphere(2).unwrap();
        let summary = ito_identity_run(&m, 20, 100, 77).unwrap();
        assert!(summary.worst_residual <= 1e-9, "{summary:?}");
    }

    #[test]
    fn qv_laws_exact() {
        let summary = qv_law_run(200, 0.5, 0.7, 11).unwrap();
        assert!(summary.geodesic_error <= 1e-12);
        assert!(summary.projection_error <= 1e-12);
    }

    #[test]
    fn rule_agreement_margin_negative() {
        let margin = rule_agreement_run(2000, 0.3, 13).unwrap();
        assert!(margin <= 0.0, "margin {margin}");
    }

    #[test]
    fn mean_se_helper() {
        let (p, se) = fraction_with_se(30, 100);
        assert_eq!(p, 0.3);
        assert!(se > 0.0);
        let (m, s) = mean_se(&[1.0, 1.0, 1.0]);
        assert_eq!(m, 1.0);
        assert_eq!(s, 0.0);
    }
}
