//! Mode pipelines.

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;
use weylstrip_core::evolution::{
    admissible_domains_with, evolve_weyl, quarterplane_weyl_with, DomainBounds,
};
use weylstrip_core::linalg::op_norm;
use weylstrip_core::recovery::{corner_jet, ingest_boundary, BoundarySamples, BoundaryTrace, TraceSource};
use weylstrip_core::verify::{dnls_residual, factorization_residual, zero_curvature_residual, ClosedForm, SolutionField};
use weylstrip_core::weyl::weyl_estimate;
use weylstrip_core::{dirac, CMat, SpectralParameter, C64};

use crate::config::{BoundarySpec, Mode, ScenarioConfig};
use crate::error::CliError;
use crate::report::{Record, Report};

fn zpair(z: SpectralParameter) -> [f64; 2] {
    [z.re(), z.im()]
}

fn at(stage: &str, z: SpectralParameter) -> String {
    format!("{stage} at z = {} {:+}i", z.re(), z.im())
}

/// Run one scenario on a pool of `workers` threads (0: rayon default).
pub fn run_scenario(mode: Mode, cfg: &ScenarioConfig, workers: usize) -> Result<Report, CliError> {
    cfg.validate(mode)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Schema(format!("cannot start {workers} workers: {e}")))?;
    info!("running {} over {} spectral points", mode.name(), cfg.z_list.len());
    pool.install(|| match mode {
        Mode::Weyl => run_weyl(cfg),
        Mode::Evolve => run_evolve(cfg),
        Mode::Quarterplane => run_quarterplane(cfg),
        Mode::Recover => run_recover(cfg),
        Mode::Verify => run_verify(cfg),
    })
}

fn collect<T: Send>(items: Vec<Result<Vec<T>, CliError>>) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for r in items {
        out.extend(r?);
    }
    Ok(out)
}

fn run_weyl(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let sig = cfg.signature()?;
    let profile = cfg.profile()?;
    let zs = cfg.spectral_points()?;
    let (x_max, tol, accept) = (cfg.grids.x_max, cfg.tolerances.ode_tol, cfg.tolerances.accept_tol);
    let rows: Vec<_> = zs
        .par_iter()
        .map(|&z| {
            debug!("weyl estimate at z = {:?}", z.value());
            let est = weyl_estimate(&profile, z, x_max, tol).map_err(|e| CliError::numerical(at("weyl_estimate", z), e))?;
            let contractive = op_norm(&est.phi) <= 1.0 + est.uncertainty + 1e-10;
            let mut rec = Record::new(Some(zpair(z)), x_max)
                .with_phi(&est.phi)
                .flag("converged", est.uncertainty <= accept)
                .flag("non_expansive", contractive);
            rec.uncertainty = Some(est.uncertainty);
            Ok(vec![rec])
        })
        .collect();
    Ok(Report::new("weyl", cfg.clone(), [sig.m2(), sig.m1()], collect(rows)?, BTreeMap::new()))
}

fn run_evolve(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let sig = cfg.signature()?;
    let field = cfg.closed_form()?;
    let zs = cfg.spectral_points()?;
    let g = &cfg.grids;
    let (tol, accept) = (cfg.tolerances.ode_tol, cfg.tolerances.accept_tol);
    let times: Vec<f64> = (0..=g.steps).map(|i| g.t_max * i as f64 / g.steps as f64).collect();
    let gamma = cfg.profile()?.sup_norm(g.x_max);
    let bounds = DomainBounds::new(gamma, gamma, gamma, 0.0).map_err(|e| CliError::Schema(e.to_string()))?;
    let domains = admissible_domains_with(bounds, g.t_max, g.min_im);
    let rows: Vec<_> = zs
        .par_iter()
        .map(|&z| {
            let est0 = weyl_estimate(&field.profile_at(0.0), z, g.x_max, tol)
                .map_err(|e| CliError::numerical(at("weyl_estimate(t = 0)", z), e))?;
            let r = dirac::propagate_r_on_grid(&field.line(0.0), z, &times, tol)
                .map_err(|e| CliError::numerical(at("propagate_r", z), e))?;
            let mut recs = Vec::new();
            for (i, &t) in times.iter().enumerate().skip(1) {
                let ev = evolve_weyl(&est0.phi, &r.value(i), sig).map_err(|e| CliError::numerical(at(&format!("evolve_weyl(t = {t})"), z), e))?;
                let direct = weyl_estimate(&field.profile_at(t), z, g.x_max, tol)
                    .map_err(|e| CliError::numerical(at(&format!("weyl_estimate(t = {t})"), z), e))?;
                let deviation = op_norm(&(&ev.phi_t - &direct.phi));
                let mut rec = Record::new(Some(zpair(z)), t)
                    .with_phi(&ev.phi_t)
                    .flag("within_tol", deviation <= accept)
                    .flag("in_omega_t", domains.omega_t.contains(z.value()))
                    .flag("in_omega_hat_t", domains.omega_hat_t.contains(z.value()))
                    .value("denominator_condition", ev.denominator_condition);
                rec.uncertainty = Some(est0.uncertainty.max(direct.uncertainty));
                rec.residual = Some(deviation);
                recs.push(rec);
            }
            Ok(recs)
        })
        .collect();
    Ok(Report::new("evolve", cfg.clone(), [sig.m2(), sig.m1()], collect(rows)?, BTreeMap::new()))
}

/// The boundary trace fitted on `[0, t_max]`.
fn boundary_trace(cfg: &ScenarioConfig) -> Result<BoundaryTrace, CliError> {
    let sig = cfg.signature()?;
    let g = &cfg.grids;
    let fit = |e: weylstrip_core::Error| match e {
        weylstrip_core::Error::InvalidArgument(_)
        | weylstrip_core::Error::Dimension { .. }
        | weylstrip_core::Error::NonFiniteInput(_)
        | weylstrip_core::Error::Parse(_) => CliError::Schema(format!("boundary: {e}")),
        other => CliError::numerical("ingest_boundary", other),
    };
    if let Some(field) = cfg.boundary_closed_form()? {
        let v0 = |t: f64| field.value(0.0, t);
        let v1 = |t: f64| field.dx(0.0, t);
        return ingest_boundary(TraceSource::Function(&v0), TraceSource::Function(&v1), sig, g.t_max, g.degree).map_err(fit);
    }
    let Some(BoundarySpec::Csv { path }) = cfg.boundary.as_ref() else {
        return Err(CliError::Schema("missing boundary".into()));
    };
    let full = cfg.resolve(path);
    let file = std::fs::File::open(&full).map_err(|e| CliError::Schema(format!("cannot read {}: {e}", full.display())))?;
    let samples = BoundarySamples::read_csv(file, sig).map_err(fit)?;
    info!("read {} boundary samples from {}", samples.t.len(), full.display());
    ingest_boundary(
        TraceSource::Samples { t: &samples.t, values: &samples.v0 },
        TraceSource::Samples { t: &samples.t, values: &samples.v1 },
        sig,
        g.t_max,
        g.degree,
    )
    .map_err(fit)
}

fn run_quarterplane(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let sig = cfg.signature()?;
    let trace = boundary_trace(cfg)?;
    let zs = cfg.spectral_points()?;
    let g = &cfg.grids;
    let (tol, accept) = (cfg.tolerances.ode_tol, cfg.tolerances.accept_tol);
    let m_hat = trace.sup_v0();
    let bounds = DomainBounds::new(m_hat, m_hat, m_hat, trace.sup_v1()).map_err(|e| CliError::Schema(e.to_string()))?;
    let omega = admissible_domains_with(bounds, 0.0, g.min_im).omega;
    let profile = match cfg.potential {
        Some(_) => Some(cfg.profile()?),
        None => None,
    };
    let rows: Vec<_> = zs
        .par_iter()
        .map(|&z| {
            if !omega.contains(z.value()) {
                return Ok(vec![Record::new(Some(zpair(z)), 0.0).flag("in_omega", false)]);
            }
            let est = quarterplane_weyl_with(&trace, m_hat, z, g.t_max, tol, g.min_im)
                .map_err(|e| CliError::numerical(at("quarterplane_weyl", z), e))?;
            let mut rec = Record::new(Some(zpair(z)), est.t_used)
                .with_phi(&est.phi0)
                .flag("in_omega", true)
                .flag("converged", est.converged)
                .flag("r22_at_least_one", est.r22_min_sv >= 1.0 - 1e-8)
                .value("decay_residual", est.residual)
                .value("r22_min_sv", est.r22_min_sv)
                .value("window", est.window);
            if let Some(p) = &profile {
                let direct = weyl_estimate(p, z, g.x_max, tol).map_err(|e| CliError::numerical(at("weyl_estimate", z), e))?;
                let deviation = op_norm(&(&est.phi0 - &direct.phi));
                rec.residual = Some(deviation);
                rec.uncertainty = Some(direct.uncertainty);
                rec = rec.flag("within_tol", deviation <= accept);
            }
            Ok(vec![rec])
        })
        .collect();
    let mut values = BTreeMap::new();
    values.insert("m_hat".to_string(), m_hat);
    values.insert("fit_residual".to_string(), trace.fit_residual());
    Ok(Report::new("quarterplane", cfg.clone(), [sig.m2(), sig.m1()], collect(rows)?, values))
}

fn run_recover(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let sig = cfg.signature()?;
    let trace = boundary_trace(cfg)?;
    let order = cfg.grids.jet_order;
    let jet = corner_jet(&trace, order).map_err(|e| match e {
        weylstrip_core::Error::InvalidArgument(m) => CliError::Schema(format!("corner jet: {m}")),
        other => CliError::numerical("corner_jet", other),
    })?;
    let exact: Option<Vec<CMat>> = cfg.boundary_closed_form()?.map(|field| match field {
        ClosedForm::Zero(s) => vec![CMat::zeros(s.m1(), s.m2()); order + 1],
        ClosedForm::PlaneWave(p) => (0..=order)
            .map(|k| p.amplitude() * C64::new(0.0, p.wavenumber()).powu(k as u32))
            .collect(),
    });
    let records = jet
        .jet0
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut rec = Record::new(None, k as f64).with_phi(w);
            if let Some(ex) = &exact {
                let scale = op_norm(&ex[k]).max(f64::MIN_POSITIVE);
                let dev = if op_norm(&ex[k]) == 0.0 { op_norm(&(w - &ex[k])) } else { op_norm(&(w - &ex[k])) / scale };
                rec.residual = Some(dev);
                rec = rec.flag("within_tol", dev <= cfg.tolerances.accept_tol);
            }
            rec
        })
        .collect();
    let mut values = BTreeMap::new();
    values.insert("recursion_residual".to_string(), jet.recursion_residual);
    values.insert("fit_residual".to_string(), trace.fit_residual());
    Ok(Report::new("recover", cfg.clone(), [sig.m1(), sig.m2()], records, values))
}

fn run_verify(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let field = cfg.closed_form()?;
    let zs = cfg.spectral_points()?;
    let g = &cfg.grids;
    let (tol, accept) = (cfg.tolerances.ode_tol, cfg.tolerances.accept_tol);
    let span = g.x.max(10.0 * g.h);
    let nx = (span / g.h).round() as usize + 1;
    let nt = (g.t_max / g.h).round() as usize + 1;
    let sampled = SolutionField::sample(&field, (0.0, g.h, nx), (0.0, g.h, nt)).map_err(|e| CliError::Schema(e.to_string()))?;
    let grid_err = |e: weylstrip_core::Error| match e {
        weylstrip_core::Error::GridTooCoarse(m) => CliError::Schema(format!("grid too coarse: {m}")),
        other => CliError::numerical("dnls_residual", other),
    };
    let dnls = dnls_residual(&sampled).map_err(grid_err)?;
    let rows: Vec<_> = zs
        .par_iter()
        .map(|&z| {
            let zc = zero_curvature_residual(&sampled, z).map_err(|e| CliError::numerical(at("zero_curvature_residual", z), e))?;
            let fac = factorization_residual(&field, z, g.x, g.t_max, tol)
                .map_err(|e| CliError::numerical(at("factorization_residual", z), e))?;
            let mut rec = Record::new(Some(zpair(z)), g.t_max)
                .flag("within_tol", fac <= accept)
                .value("zero_curvature_residual", zc);
            rec.residual = Some(fac);
            Ok(vec![rec])
        })
        .collect();
    let mut values = BTreeMap::new();
    values.insert("dnls_residual".to_string(), dnls);
    values.insert("scale".to_string(), sampled.sup_norm());
    Ok(Report::new("verify", cfg.clone(), [0, 0], collect(rows)?, values))
}
