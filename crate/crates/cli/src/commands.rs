use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::BufWriter;

use qfim_core::bounds::{
    attainability, covariance_report, crb_covariance, fim_dominance, is_attainable, weight_from_real,
    wmse_bound_right, wmse_bound_right_real, wmse_bound_symmetric, WeightBlocks,
};
use qfim_core::complex_map::{from_complex, to_complex, verify_map_properties_with, MapDims};
use qfim_core::homodyne::{
    empirical_fim, estimate_two_mode, gaussian_classical_fim, sample_homodyne, HomodyneSpec, MIN_RECOMMENDED_SHOTS,
};
use qfim_core::linalg::{c64, min_eigenvalue, psd_order};
use qfim_core::models::{CoherentKey, CoherentModel, FockConfig};
use qfim_core::param::identity_jacobian;
use qfim_core::qfim::{
    complex_from_real, gated_inverse, k_blocks_pure, k_real_pure, rqfim_complex, rqfim_inv_pure, rqfim_inv_pure_real,
    rqfim_real, sqfim_complex, sqfim_pure_complex, sqfim_pure_real, sqfim_real, Kind, QfimBlocks,
};
use qfim_core::{CMatrix, NumericPolicy, ParamPoint, C64};

use crate::config::{Representation, RunConfig};
use crate::error::CliError;
use crate::model::{build, point, Built};
use crate::report::Report;

pub const MAP_TOLERANCE: f64 = 1e-9;
pub const ROUTE_TOLERANCE: f64 = 1e-8;

fn inputs(cfg: &RunConfig) -> serde_json::Value {
    let mut echo = cfg.clone();
    echo.out = None;
    echo.csv = None;
    serde_json::to_value(echo).expect("config serializes")
}

fn relative(a: &CMatrix, b: &CMatrix) -> f64 {
    a.distance(b) / a.norm().max(b.norm()).max(1.0)
}

pub fn cmd_verify_map(mut cfg: RunConfig, corrupt: bool) -> Result<Report, CliError> {
    let trials = *cfg.trials.get_or_insert(100);
    let d = *cfg.d.get_or_insert(2);
    let k = *cfg.k.get_or_insert(2);
    let seed = *cfg.seed.get_or_insert(0);
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let dims = MapDims::new(d, k).map_err(|e| CliError::Config(e.to_string()))?;
    let corrupted = |g: &CMatrix| -> qfim_core::Result<CMatrix> {
        let h = to_complex(g)?;
        Ok(&h + &h * &h.scale_real(1e-3))
    };
    let result = if corrupt {
        verify_map_properties_with(trials, dims, seed, &corrupted)?
    } else {
        verify_map_properties_with(trials, dims, seed, &to_complex)?
    };
    let mut r = Report::new("verify-map", inputs(&cfg), Some(seed));
    for p in &result.properties {
        r.check(p.name, p.max_violation, MAP_TOLERANCE);
    }
    r.scalar("max_violation", result.max_violation());
    r.scalar("resampled", result.resampled as f64);
    if corrupt {
        r.note("map corrupted by the test hook");
    }
    Ok(r)
}

fn symmetric_blocks(built: &Built, p: &ParamPoint, policy: &NumericPolicy) -> Result<(QfimBlocks, CMatrix), CliError> {
    if let Some(m) = built.pure() {
        return Ok((sqfim_pure_complex(m, p, policy)?, sqfim_pure_real(m, p, policy)?));
    }
    built
        .with_density(|m| Ok((sqfim_complex(m, p, policy)?, sqfim_real(m, p, policy)?)))
        .expect("density view exists off the pure route")
}

/// `(𝒥^R)⁻¹` and its real counterpart `(J̄^R)⁻¹`.
fn right_inverse(built: &Built, p: &ParamPoint, policy: &NumericPolicy) -> Result<(CMatrix, CMatrix, f64), CliError> {
    if let Some(m) = built.pure() {
        let det = sqfim_pure_complex(m, p, policy)?.determinant().norm();
        return Ok((rqfim_inv_pure(m, p, policy)?, rqfim_inv_pure_real(m, p, policy)?, det));
    }
    built
        .with_density(|m| {
            let full = rqfim_complex(m, p, policy)?.full();
            let inv = gated_inverse(&full, policy)?;
            let inv_real = gated_inverse(&rqfim_real(m, p, policy)?, policy)?;
            Ok((inv, inv_real, full.determinant()?.norm()))
        })
        .expect("density view exists off the pure route")
}

pub fn cmd_qfim(mut cfg: RunConfig) -> Result<Report, CliError> {
    let built = build(&mut cfg)?;
    let p = point(&mut cfg)?;
    let kind = *cfg.kind.get_or_insert(Kind::Symmetric);
    let repr = *cfg.representation.get_or_insert(Representation::Complex);
    let policy = cfg.policy()?;
    let mut r = Report::new("qfim", inputs(&cfg), cfg.seed);
    for w in built.warnings(&p) {
        r.note(format!("truncation: {w}"));
    }
    match kind {
        Kind::Symmetric => {
            let (blocks, real) = symmetric_blocks(&built, &p, &policy)?;
            qfim_blocks_out(&mut r, &blocks, &real, repr, &policy);
        }
        Kind::Right => match built.pure() {
            Some(m) => {
                r.note("the right QFIM of a pure state diverges; reporting K and the pure-limit inverse");
                let kb = k_blocks_pure(m, &p, &policy)?;
                let kf = kb.full();
                let k_real = k_real_pure(m, &p, &policy)?;
                match repr {
                    Representation::Complex => {
                        r.matrix("k", &kb.k);
                        r.matrix("r", &kb.r);
                    }
                    Representation::Real => r.matrix("k_real", &k_real),
                }
                r.check("k_map_route_residual", relative(&kf, &complex_from_real(&k_real)?), ROUTE_TOLERANCE);
                let js = sqfim_pure_complex(m, &p, &policy)?;
                r.scalar("sqfim_determinant", js.determinant().re);
                match right_inverse(&built, &p, &policy) {
                    Ok((inv, inv_real, _)) => {
                        r.check("inverse_map_route_residual", relative(&inv, &to_complex(&inv_real)?), ROUTE_TOLERANCE);
                        let rep = covariance_report(Kind::Right, inv.clone(), 0.0, &policy);
                        r.scalar("inverse_rank", rep.rank as f64);
                        rep.notes.into_iter().for_each(|n| r.note(n));
                        match repr {
                            Representation::Complex => r.matrix("inverse", &inv),
                            Representation::Real => r.matrix("inverse_real", &inv_real),
                        }
                    }
                    Err(e) => r.note(format!("inversion refused: {e}")),
                }
            }
            None => {
                let (blocks, real) = built
                    .with_density(|m| Ok((rqfim_complex(m, &p, &policy)?, rqfim_real(m, &p, &policy)?)))
                    .expect("density route")?;
                qfim_blocks_out(&mut r, &blocks, &real, repr, &policy);
            }
        },
    }
    Ok(r)
}

fn qfim_blocks_out(r: &mut Report, blocks: &QfimBlocks, real: &CMatrix, repr: Representation, policy: &NumericPolicy) {
    match repr {
        Representation::Complex => {
            r.matrix("j", &blocks.j);
            r.matrix("q", &blocks.q);
            if blocks.kind == Kind::Right {
                r.matrix("q_lower", &blocks.q_lower);
                r.matrix("j_lower", &blocks.j_lower);
            }
        }
        Representation::Real => r.matrix("j_real", real),
    }
    let full = blocks.full();
    r.scalar("determinant", blocks.determinant().re);
    match complex_from_real(real) {
        Ok(mapped) => r.check("map_route_residual", relative(&full, &mapped), ROUTE_TOLERANCE),
        Err(e) => r.note(format!("map route unavailable: {e}")),
    }
    match gated_inverse(&full, policy) {
        Ok(inv) => r.matrix("inverse", &inv),
        Err(e) => r.note(format!("inversion refused: {e}")),
    }
}

fn weight(cfg: &mut RunConfig, k: usize, policy: &NumericPolicy) -> Result<WeightBlocks, CliError> {
    if let Some(rows) = &cfg.weight_real {
        if cfg.weight.is_some() {
            return Err(CliError::Config("give either weight or weight_real, not both".into()));
        }
        let m = CMatrix::from_real_rows(rows).map_err(|e| CliError::Config(format!("weight_real: {e}")))?;
        if m.shape() != (2 * k, 2 * k) {
            return Err(CliError::Config(format!("weight_real must be {0}x{0}", 2 * k)));
        }
        return weight_from_real(&m, policy).map_err(|e| CliError::Config(format!("weight_real: {e}")));
    }
    let w0 = *cfg.weight.get_or_insert(1.0);
    Ok(WeightBlocks::diagonal(CMatrix::identity(k).scale_real(w0))?)
}

pub fn cmd_crb(mut cfg: RunConfig) -> Result<Report, CliError> {
    let built = build(&mut cfg)?;
    let p = point(&mut cfg)?;
    let kind = *cfg.kind.get_or_insert(Kind::Symmetric);
    let policy = cfg.policy()?;
    let k = built.num_params();
    let w = weight(&mut cfg, k, &policy)?;
    let mut r = Report::new("crb", inputs(&cfg), cfg.seed);
    for msg in built.warnings(&p) {
        r.note(format!("truncation: {msg}"));
    }

    let (sym, _) = symmetric_blocks(&built, &p, &policy)?;
    let sym_scale = sym.full().norm();
    match kind {
        Kind::Symmetric => {
            let rep = crb_covariance(&sym, &identity_jacobian(k), &policy)?;
            r.matrix("covariance_bound", rep.matrix.as_ref().expect("covariance"));
            r.scalar("determinant", rep.determinant);
            r.scalar("rank", rep.rank as f64);
            rep.notes.into_iter().for_each(|n| r.note(n));
        }
        Kind::Right => {
            let (inv, _, det) = right_inverse(&built, &p, &policy)?;
            let rep = covariance_report(Kind::Right, inv, det, &policy);
            r.matrix("covariance_bound", rep.matrix.as_ref().expect("covariance"));
            r.scalar("rank", rep.rank as f64);
            rep.notes.into_iter().for_each(|n| r.note(n));
        }
    }

    match wmse_bound_symmetric(&w, &sym, &policy) {
        Ok(ws) => {
            r.scalar("w_s", ws.trace_form);
            r.check(
                "w_s_block_form_residual",
                (ws.trace_form - ws.block_form).abs(),
                MAP_TOLERANCE * ws.trace_form.abs().max(1.0),
            );
        }
        Err(e) => r.note(format!("w_s unavailable: {e}")),
    }
    match right_inverse(&built, &p, &policy) {
        Ok((inv, inv_real, _)) => {
            let wr = wmse_bound_right(&w, &inv, &policy)?;
            let w_real = from_complex(&w.full())?.scale_real(4.0);
            let wr_real = wmse_bound_right_real(&w_real, &inv_real, &policy)?;
            r.scalar("w_r", wr);
            r.check("w_r_real_route_residual", (wr - wr_real).abs(), ROUTE_TOLERANCE * wr.abs().max(1.0));
        }
        Err(e) => r.note(format!("w_r unavailable: {e}")),
    }

    if let Some(m) = built.as_pure_model() {
        let c = attainability(m, &p, &policy)?;
        r.matrix("attainability", &c);
        r.scalar("attainability_max", c.max_abs());
        let ok = is_attainable(&c, sym_scale, &policy);
        r.note(if ok {
            "attainability commutators vanish: the symmetric bound is attainable"
        } else {
            "attainability commutators do not vanish: the symmetric bound is not attainable"
        });
    }
    Ok(r)
}

fn coherent_only(built: &Built) -> Result<&CoherentModel, CliError> {
    built
        .as_pure_model()
        .ok_or_else(|| CliError::Config("simulate needs a coherent model".into()))
}

pub fn cmd_simulate(mut cfg: RunConfig) -> Result<Report, CliError> {
    let built = build(&mut cfg)?;
    let p = point(&mut cfg)?;
    let policy = cfg.policy()?;
    let model = coherent_only(&built)?;
    let key = model.key().clone();
    let modes = key.num_modes();
    let phases = cfg
        .phases
        .get_or_insert_with(|| match modes {
            2 => vec![0.0, FRAC_PI_2],
            n => vec![0.0; n],
        })
        .clone();
    let shots = *cfg.shots.get_or_insert(100_000);
    let seed = *cfg.seed.get_or_insert(0);
    let variance = *cfg.variance.get_or_insert(qfim_core::homodyne::VACUUM_VARIANCE);
    let spec = HomodyneSpec::new(phases, shots, seed).with_variance(variance);
    let z = p.theta()[0];
    let samples = sample_homodyne(&key, z, &spec)?;
    let mut r = Report::new("simulate", inputs(&cfg), Some(seed));
    samples.warnings().into_iter().for_each(|w| r.note(w));
    for w in built.warnings(&p) {
        r.note(format!("truncation: {w}"));
    }
    if let Some(path) = &cfg.csv {
        samples.write_csv(BufWriter::new(File::create(path)?))?;
    }

    let quantum = sqfim_pure_complex(model, &p, &policy)?.full();
    let scale = quantum.norm() / (quantum.rows() as f64).sqrt();
    r.matrix("sqfim", &quantum);

    if modes == 2 {
        let est = estimate_two_mode(&samples, &key)?;
        r.matrix("estimator_covariance", &est.covariance);
        r.scalar("estimate_mean_re", est.mean.re);
        r.scalar("estimate_mean_im", est.mean.im);
        match gated_inverse(&quantum, &policy) {
            Ok(crb) => {
                let v = psd_order(&est.covariance, &crb, est.covariance_tolerance(), &policy)?;
                r.matrix("crb", &crb);
                r.scalar("covariance_minus_crb_min_eigenvalue", v.min_eigenvalue);
                r.check("covariance_dominates_crb", -v.min_eigenvalue, est.covariance_tolerance());
            }
            Err(e) => r.note(format!("no covariance bound: {e}")),
        }
    } else {
        r.note("linear inversion needs two modes; estimator statistics skipped");
    }

    if variance > 0.0 {
        let classical = gaussian_classical_fim(&key, &spec, z)?.full();
        r.matrix("classical_fim", &classical);
        let dom = fim_dominance(&classical, &quantum, 1e-6 * scale, &policy)?;
        r.check("classical_fim_dominated", -dom.min_eigenvalue, 1e-6 * scale);
        let margin = min_eigenvalue(&(&quantum - &classical))?;
        r.scalar("saturation_margin", margin);
        if margin.abs() > 1e-6 * scale {
            r.note(format!(
                "FLAGGED: classical FIM does not saturate the SQFIM at variance {variance} (margin {margin:.6})"
            ));
        }
        let emp = empirical_fim(&samples, &key)?;
        let emp_full = emp.blocks.full();
        r.matrix("empirical_fim", &emp_full);
        let rel = emp_full.distance(&classical) / classical.norm();
        r.scalar("empirical_fim_relative_error", rel);
        if shots >= MIN_RECOMMENDED_SHOTS {
            r.check("empirical_fim_agreement", rel, 0.03);
        }
    } else {
        r.note("zero variance: classical FIM is unbounded and was not computed");
    }
    Ok(r)
}

fn single(e: C64, n: C64, truncation: usize) -> Result<CoherentModel, CliError> {
    Ok(CoherentModel::new(CoherentKey::single(e, n), FockConfig::new(truncation)?))
}

pub fn cmd_demo_coherent(mut cfg: RunConfig) -> Result<Report, CliError> {
    let n = *cfg.truncation.get_or_insert(40);
    let policy = cfg.policy()?;
    let z = c64(0.3, 0.1);
    let p = ParamPoint::scalar(z)?;
    let mut r = Report::new("demo-coherent", inputs(&cfg), None);
    let tol = 1e-6;

    // single-mode SQFIM 2[[a+b, 2ε*η], [2εη*, a+b]] and det 4(a−b)² at (ε, η) = (1, ½)
    let (e, h) = (c64(1.0, 0.0), c64(0.5, 0.0));
    let (a, b, c) = (e.norm_sqr(), h.norm_sqr(), e.conj() * h);
    let m = single(e, h, n)?;
    let s = sqfim_pure_complex(&m, &p, &policy)?;
    let closed = CMatrix::from_rows(&[vec![C64::from(2.0 * (a + b)), c * 4.0], vec![c.conj() * 4.0, C64::from(2.0 * (a + b))]])?;
    r.matrix("single_mode.sqfim", &s.full());
    r.check("single_mode.sqfim_closed_form", s.full().distance(&closed), tol);
    let det = s.determinant().re;
    r.scalar("single_mode.determinant", det);
    r.check("single_mode.determinant_closed_form", (det - 4.0 * (a - b) * (a - b)).abs(), tol);

    // balanced key: optimality condition holds exactly where the bound ceases to exist
    let bal = single(c64(1.0, 0.0), c64(1.0, 0.0), n)?;
    let sb = sqfim_pure_complex(&bal, &p, &policy)?;
    let cb = attainability(&bal, &p, &policy)?;
    r.scalar("balanced.determinant", sb.determinant().re);
    r.scalar("balanced.attainability_max", cb.max_abs());
    r.check("balanced.attainability_vanishes", cb.max_abs(), 1e-8);
    let refused = crb_covariance(&sb, &identity_jacobian(1), &policy).is_err();
    r.check("balanced.inversion_refused", if refused { 0.0 } else { 1.0 }, 0.0);

    // two-mode key (1, 0, 0, 1)
    let two = CoherentModel::new(
        CoherentKey::new(vec![(c64(1.0, 0.0), c64(0.0, 0.0)), (c64(0.0, 0.0), c64(1.0, 0.0))])?,
        FockConfig::new(n.min(20))?,
    );
    let s2 = sqfim_pure_complex(&two, &p, &policy)?;
    let crb = crb_covariance(&s2, &identity_jacobian(1), &policy)?.matrix.expect("covariance");
    let c2 = attainability(&two, &p, &policy)?;
    r.matrix("two_mode.crb", &crb);
    r.check("two_mode.crb_quarter_identity", crb.distance(&CMatrix::identity(2).scale_real(0.25)), tol);
    r.scalar("two_mode.attainability_max", c2.max_abs());
    r.check("two_mode.attainability_vanishes", c2.max_abs(), 1e-8);

    // 𝒦 = −2i(a−b) diag(1, −1) at (1, ½)
    let kk = k_blocks_pure(&m, &p, &policy)?.full();
    r.matrix("single_mode.k", &kk);
    let k_closed = CMatrix::from_diagonal(&[c64(0.0, -2.0 * (a - b)), c64(0.0, 2.0 * (a - b))]);
    r.check("single_mode.k_closed_form", kk.distance(&k_closed), tol);

    // right CRB at (1, 0) has rank one
    let vac = single(c64(1.0, 0.0), c64(0.0, 0.0), n)?;
    let inv = rqfim_inv_pure(&vac, &p, &policy)?;
    let rep = covariance_report(Kind::Right, inv.clone(), 0.0, &policy);
    r.matrix("vacuum_key.right_crb", &inv);
    r.scalar("vacuum_key.right_crb_rank", rep.rank as f64);
    r.check("vacuum_key.right_crb_rank_one", (rep.rank as f64 - 1.0).abs(), 0.0);
    rep.notes.into_iter().for_each(|x| r.note(x));

    // w^R − w^S = |W|/|a−b| at (1, ½), W = 1
    let w = WeightBlocks::diagonal(CMatrix::identity(1))?;
    let ws = wmse_bound_symmetric(&w, &s, &policy)?.trace_form;
    let wr = wmse_bound_right(&w, &rqfim_inv_pure(&m, &p, &policy)?, &policy)?;
    r.scalar("single_mode.w_s", ws);
    r.scalar("single_mode.w_r", wr);
    r.check("single_mode.w_s_closed_form", (ws - (a + b) / ((a - b) * (a - b))).abs(), tol);
    r.check("single_mode.w_r_minus_w_s", (wr - ws - 1.0 / (a - b).abs()).abs(), tol);
    Ok(r)
}
