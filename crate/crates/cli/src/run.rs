//! Subcommand execution. Each run produces named tables plus everything
//! the manifest must record: seeds, rules and tolerances.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use spinconc::acceptance::{self, CriterionResult};
use spinconc::concentration::{concentrate, deficit, fraenkel_asymmetry, max_disc_concentration, stability_report, NEAR_KERNEL, NEAR_ZERO_DEFICIT};
use spinconc::fock::{convergence_table, FockPoly, PlanarRegion, EXACT_FLOOR, ORDER_THRESHOLD};
use spinconc::levelsets::{LevelSets, CERTIFY_GRID, MAX_DEPTH, MU_BUDGET, SIGN_BUDGET};
use spinconc::localization::{assemble, NEGATIVE_EIGENVALUE_FLOOR};
use spinconc::mixed::{density_from_ensemble, mixed_functionals, DensityOp};
use spinconc::polyspace::Poly;
use spinconc::quadrature::{Purpose, QuadRule};
use spinconc::random::{random_unit_poly, trial_rng};
use spinconc::region::{region_measure, Region};
use spinconc::sharpness::{asymptotic_fit, CONSTANT_REL_TOL, EXPONENT_BAND, GAP_TOL, RATIO_REL_TOL};
use spinconc::table::{fock_table, mixed_table, profile_table, sharpness_table, spectrum_table, stability_table, wehrl_table, Table};
use spinconc::wehrl::{wehrl_stability_report, PhiSpec, GAP_SLACK, MAX_DOUBLINGS};

use crate::experiment::{ExperimentSpec, Kind};
use crate::CliError;

/// Rank of the random ensembles drawn when no density is given.
pub const DEFAULT_RANK: usize = 3;

#[derive(Debug, Default)]
pub struct RunOutput {
    /// `(file stem, table)`; the first is echoed to stdout.
    pub tables: Vec<(String, Table)>,
    pub seeds: Vec<Value>,
    pub rules: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, Value>,
    /// Named certification failures; non-empty means exit 3.
    pub failures: Vec<String>,
    /// Extra lines for stdout.
    pub lines: Vec<String>,
}

impl RunOutput {
    fn rule(&mut self, name: &str, rule: &QuadRule) {
        self.rules.insert(name.into(), serde_json::to_value(rule).expect("rule serializes"));
    }

    fn tol(&mut self, name: &str, v: impl Serialize) {
        self.tolerances.insert(name.into(), serde_json::to_value(v).expect("tolerance serializes"));
    }

    fn fail(&mut self, what: String) {
        self.failures.push(what);
    }
}

/// Trial `i` polynomial: the given one, or a seeded random unit polynomial.
fn trial_polys(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<Vec<(u64, Poly<f64>)>, CliError> {
    let n = spec.n.expect("normalized");
    let seed = spec.seed.expect("normalized");
    if let Some(p) = &spec.poly {
        out.seeds.push(json!({"poly": "given"}));
        return Ok(vec![(0, p.to_poly()?.normalized()?)]);
    }
    let trials = spec.trials.expect("normalized") as u64;
    out.seeds.push(json!({"batch_seed": seed, "streams": format!("0..{trials}"), "generator": "ChaCha8"}));
    Ok((0..trials).map(|i| (i, random_unit_poly(n, &mut trial_rng(seed, i)))).collect())
}

/// Prepends a `trial` column.
fn with_trial(trials: impl Iterator<Item = u64>, t: Table) -> Table {
    let cols: Vec<&str> = std::iter::once("trial").chain(t.columns().iter().map(String::as_str)).collect();
    let mut out = Table::new(&cols);
    for (i, row) in trials.zip(t.rows()) {
        out.push(std::iter::once(i.into()).chain(row.iter().cloned()).collect());
    }
    out
}

fn region_of(spec: &ExperimentSpec) -> Result<Region<f64>, CliError> {
    Ok(spec.region.as_ref().expect("normalized").to_region()?)
}

fn rule_for(spec: &ExperimentSpec, n: usize, purpose: Purpose) -> Result<QuadRule, CliError> {
    spec.rule.unwrap_or_default().rule(n, purpose)
}

pub fn run(kind: Kind, spec: &ExperimentSpec) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    match kind {
        Kind::Concentrate | Kind::Deficit => concentration(kind, spec, &mut out)?,
        Kind::Stability => stability(spec, &mut out)?,
        Kind::Asymmetry => asymmetry(spec, &mut out)?,
        Kind::Wehrl => wehrl(spec, &mut out)?,
        Kind::Levelsets => levelsets(spec, &mut out)?,
        Kind::Schatten => schatten(spec, &mut out)?,
        Kind::Mixed => mixed(spec, &mut out)?,
        Kind::FockLimit => fock_limit(spec, &mut out)?,
        Kind::Sharpness => sharpness(spec, &mut out)?,
        Kind::Acceptance => acceptance_suite(spec, &mut out)?,
    }
    Ok(out)
}

fn concentration(kind: Kind, spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let n = spec.n.expect("normalized");
    let region = region_of(spec)?;
    let rule = rule_for(spec, n, Purpose::ExactPoly)?;
    out.rule("concentration", &rule);
    out.tol("deficit_floor", -GAP_SLACK);
    let m = region_measure(&region).value;
    let c_max = max_disc_concentration(n, m);
    let polys = trial_polys(spec, out)?;
    let rows = polys
        .par_iter()
        .map(|(i, p)| Ok((*i, concentrate(p, &region, &rule)?, deficit(p, &region, &rule)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = match kind {
        Kind::Concentrate => Table::new(&["trial", "N", "m_omega", "C", "C_max"]),
        _ => Table::new(&["trial", "N", "m_omega", "deficit"]),
    };
    for (i, c, d) in rows {
        if d < -GAP_SLACK {
            out.fail(format!("trial {i}: deficit {d:e} below -{GAP_SLACK:e} (C ≤ C_max violated)"));
        }
        t.push(match kind {
            Kind::Concentrate => vec![i.into(), n.into(), m.into(), c.into(), c_max.into()],
            _ => vec![i.into(), n.into(), m.into(), d.into()],
        });
    }
    out.tables.push(("results".into(), t));
    Ok(())
}

fn stability(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let n = spec.n.expect("normalized");
    let region = region_of(spec)?;
    let rule = rule_for(spec, n, Purpose::ExactPoly)?;
    out.rule("concentration", &rule);
    out.tol("near_kernel", NEAR_KERNEL);
    out.tol("near_zero_deficit", NEAR_ZERO_DEFICIT);
    let polys = trial_polys(spec, out)?;
    let rows = polys
        .par_iter()
        .map(|(i, p)| Ok((*i, stability_report(p, &region, &rule)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    for (i, r) in &rows {
        if r.deficit < -GAP_SLACK {
            out.fail(format!("trial {i}: deficit {:e} below -{GAP_SLACK:e}", r.deficit));
        }
    }
    out.tables.push(("results".into(), stability_table(&rows)));
    Ok(())
}

fn asymmetry(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let region = region_of(spec)?;
    let a = fraenkel_asymmetry(&region)?;
    let (s, theta) = a.best_cap.center().to_s_theta();
    let mut t = Table::new(&["m_omega", "asymmetry", "best_cap_s", "best_cap_theta", "best_cap_measure"]);
    t.push(vec![
        region_measure(&region).value.into(),
        a.value.into(),
        s.into(),
        theta.into(),
        a.best_cap.measure().into(),
    ]);
    out.tol("asymmetry_grid", spinconc::concentration::ASYMMETRY_GRID);
    out.tables.push(("results".into(), t));
    Ok(())
}

fn wehrl(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let n = spec.n.expect("normalized");
    let rule = rule_for(spec, n, Purpose::Entropy)?;
    out.rule("entropy_start", &rule);
    out.tol("gap_slack", GAP_SLACK);
    out.tol("max_doublings", MAX_DOUBLINGS);
    let phis = spec.phi.clone().expect("normalized");
    let polys = trial_polys(spec, out)?;
    let jobs: Vec<(u64, &Poly<f64>, PhiSpec)> =
        polys.iter().flat_map(|(i, p)| phis.iter().map(move |f| (*i, p, *f))).collect();
    let rows = jobs
        .par_iter()
        .map(|(i, p, f)| Ok((*i, wehrl_stability_report(p, f, &rule)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    for (i, r) in &rows {
        if !r.minimal {
            out.fail(format!("trial {i} Φ={}: entropy gap {:e} below -{GAP_SLACK:e}", r.phi.kind_name(), r.gap));
        }
        if !r.converged {
            out.lines.push(format!(
                "warning: trial {i} Φ={}: node doubling stopped at difference {:e}",
                r.phi.kind_name(),
                r.entropy_error
            ));
        }
    }
    let reports: Vec<_> = rows.iter().map(|(_, r)| *r).collect();
    if let Some(last) = reports.last() {
        out.rule("entropy_final_example", &last.rule);
    }
    let t = with_trial(rows.iter().map(|(i, _)| *i), wehrl_table(&reports));
    out.tables.push(("results".into(), t));
    Ok(())
}

fn levelsets(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let points = spec.profile_points.expect("normalized");
    out.tol("mu_budget", MU_BUDGET);
    out.tol("sign_budget", SIGN_BUDGET);
    out.tol("max_depth", MAX_DEPTH);
    out.tol("certify_grid", CERTIFY_GRID);
    let polys = trial_polys(spec, out)?;
    let mut summary = Table::new(&[
        "trial",
        "N",
        "T",
        "layer_cake",
        "layer_cake_target",
        "t_star",
        "sign_changes",
        "certified",
        "max_increase_F",
        "max_increase_H",
    ]);
    for (i, p) in &polys {
        let ls = LevelSets::new(p)?;
        let n = ls.degree();
        if *i == 0 {
            let (ns, nt) = ls.base_grid();
            out.rules.insert("level_set_base_grid".into(), json!({"n_s": ns, "n_theta": nt}));
        }
        let profile = ls.profile(points);
        let crossing = ls.crossing_point()?;
        let mono = ls.monotone_ratio_check(CERTIFY_GRID)?;
        if !crossing.certified {
            out.fail(format!("trial {i}: crossing of μ and μ₀ not certified ({} sign changes)", crossing.sign_changes));
        }
        summary.push(vec![
            (*i).into(),
            n.into(),
            ls.t_max().into(),
            ls.layer_cake().into(),
            (1.0 / (n + 1) as f64).into(),
            crossing.t_star.into(),
            crossing.sign_changes.into(),
            crossing.certified.into(),
            mono.max_increase_f.into(),
            mono.max_increase_h.into(),
        ]);
        out.tables.push((format!("profile_{i}"), profile_table(&profile)));
    }
    out.tables.insert(0, ("results".into(), summary));
    Ok(())
}

fn schatten(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let n = spec.n.expect("normalized");
    let p = spec.p.expect("normalized");
    let region = region_of(spec)?;
    let rule = rule_for(spec, n, Purpose::ExactPoly)?;
    out.rule("assembly", &rule);
    out.tol("negative_eigenvalue_floor", NEGATIVE_EIGENVALUE_FLOOR);
    let l = assemble(n, &region, &rule)?;
    let spectrum = l.spectrum()?;
    let norm = l.schatten_norm(p)?;
    let m = region_measure(&region).value;
    let mut t = Table::new(&["N", "p", "m_omega", "schatten_norm", "trace", "trace_target"]);
    t.push(vec![n.into(), p.into(), m.into(), norm.into(), l.trace().into(), ((n + 1) as f64 * m).into()]);
    out.tables.push(("results".into(), t));
    out.tables.push(("spectrum".into(), spectrum_table(&spectrum)));
    Ok(())
}

fn mixed(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let n = spec.n.expect("normalized");
    let seed = spec.seed.expect("normalized");
    let region = region_of(spec)?;
    let rule = rule_for(spec, n, Purpose::ExactPoly)?;
    out.rule("concentration", &rule);
    out.tol("gap_slack", GAP_SLACK);
    let rhos: Vec<(u64, DensityOp)> = match &spec.density {
        Some(d) => {
            out.seeds.push(json!({"density": "given"}));
            vec![(0, d.to_density()?)]
        }
        None => {
            let trials = spec.trials.expect("normalized") as u64;
            out.seeds.push(json!({"batch_seed": seed, "streams": format!("0..{trials}"), "generator": "ChaCha8", "rank": DEFAULT_RANK}));
            (0..trials)
                .map(|i| {
                    use rand::Rng;
                    let mut rng = trial_rng(seed, i);
                    let w: Vec<f64> = (0..DEFAULT_RANK).map(|_| rng.random_range(0.05..1.0)).collect();
                    let total: f64 = w.iter().sum();
                    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
                    let polys: Vec<Poly<f64>> = (0..DEFAULT_RANK).map(|_| random_unit_poly(n, &mut rng)).collect();
                    Ok((i, density_from_ensemble(&w, &polys)?))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let phis = spec.phi.clone().expect("normalized");
    let jobs: Vec<(u64, &DensityOp, PhiSpec)> =
        rhos.iter().flat_map(|(i, r)| phis.iter().map(move |f| (*i, r, *f))).collect();
    let rows = jobs
        .par_iter()
        .map(|(i, rho, f)| Ok((*i, mixed_functionals(rho, &region, f, &rule)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    for (i, r) in &rows {
        if !r.concentration_holds {
            out.fail(format!("trial {i}: mixed deficit {:e} below -{GAP_SLACK:e}", r.deficit));
        }
        if !r.entropy_holds {
            out.fail(format!("trial {i} Φ={}: mixed entropy gap {:e} below -{GAP_SLACK:e}", r.phi.kind_name(), r.gap));
        }
    }
    let reports: Vec<_> = rows.iter().map(|(_, r)| *r).collect();
    let t = with_trial(rows.iter().map(|(i, _)| *i), mixed_table(&reports));
    out.tables.push(("results".into(), t));
    Ok(())
}

fn fock_limit(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let p = spec.fock_poly.as_ref().expect("normalized").to_fock()?;
    let q = match &spec.fock_poly_q {
        Some(q) => q.to_fock()?,
        None => p.clone(),
    };
    let omega = match &spec.planar_region {
        Some(r) => r.to_planar()?,
        None => PlanarRegion::unit_area_disc(),
    };
    let phi = spec.phi.as_ref().expect("normalized")[0];
    let n_list = spec.n_list.clone().expect("normalized");
    out.tol("order_threshold", ORDER_THRESHOLD);
    out.tol("exact_floor", EXACT_FLOOR);
    out.tol("entropy_tol", spinconc::fock::ENTROPY_TOL);
    out.rules.insert("planar_region".into(), serde_json::to_value(&omega).expect("region serializes"));
    let unit = |f: &FockPoly| (f.norm_sq() - 1.0).abs() <= 1e-12;
    if !unit(&p) {
        out.lines.push("note: fock_poly is normalized before rescaling".into());
    }
    let ct = convergence_table(&p.normalized()?, &q.normalized()?, &omega, &phi, &n_list)?;
    let mut fits = Table::new(&["quantity", "order", "exact", "max_error"]);
    for f in &ct.fits {
        fits.push(vec![f.quantity.name().into(), f.order.into(), f.exact.into(), f.max_error.into()]);
    }
    out.tables.push(("results".into(), fock_table(&ct)));
    out.tables.push(("fits".into(), fits));
    Ok(())
}

fn sharpness(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    let eps = spec.eps.clone().expect("normalized");
    out.tol("gap_tol", GAP_TOL);
    out.tol("exponent_band", EXPONENT_BAND);
    out.tol("constant_rel_tol", CONSTANT_REL_TOL);
    out.tol("ratio_rel_tol", RATIO_REL_TOL);
    let mut fits = Vec::new();
    for &n in spec.n_list.as_ref().expect("normalized") {
        out.rule(&format!("entropy_start_N{n}"), &spinconc::quadrature::build_rule(n, Purpose::Entropy)?.with_tolerance(GAP_TOL));
        let f = asymptotic_fit(n, &eps)?;
        if !f.passes() {
            out.fail(format!(
                "N={n}: sharpness fit outside tolerance (exponents {:.4}/{:.4}, relative errors {:.3e}/{:.3e})",
                f.d_exponent, f.gap_exponent, f.d_rel_error, f.gap_rel_error
            ));
        }
        fits.push(f);
    }
    let mut summary = Table::new(&[
        "N",
        "d_exponent",
        "d_prefactor",
        "gap_exponent",
        "gap_prefactor",
        "D_sq_target",
        "gap_target",
        "d_rel_error",
        "gap_rel_error",
        "ratio",
        "ratio_target",
        "passes",
    ]);
    for f in &fits {
        summary.push(vec![
            f.n.into(),
            f.d_exponent.into(),
            f.d_prefactor.into(),
            f.gap_exponent.into(),
            f.gap_prefactor.into(),
            f.d_target.into(),
            f.gap_target.into(),
            f.d_rel_error.into(),
            f.gap_rel_error.into(),
            f.ratio.into(),
            f.ratio_target.into(),
            f.passes().into(),
        ]);
    }
    out.tables.push(("results".into(), sharpness_table(&fits)));
    out.tables.push(("fits".into(), summary));
    Ok(())
}

fn acceptance_suite(spec: &ExperimentSpec, out: &mut RunOutput) -> Result<(), CliError> {
    out.seeds.push(json!({"suite_seed": acceptance::SUITE_SEED, "criterion_stream": "suite_seed + id", "generator": "ChaCha8"}));
    let ids = spec.criteria.clone().expect("normalized");
    out.rules.insert(
        "purpose_multipliers".into(),
        json!({
            "exact_poly": [1, 1],
            "level_set": spinconc::quadrature::LEVEL_SET_MULTIPLIERS,
            "entropy": spinconc::quadrature::ENTROPY_MULTIPLIERS,
            "generic": spinconc::quadrature::GENERIC_MULTIPLIERS,
            "base": "(N+1, 2N+1)",
        }),
    );
    let results: Vec<CriterionResult> = ids.iter().map(|&id| acceptance::run(id)).collect::<Result<_, _>>()?;
    let mut summary = Table::new(&["criterion", "name", "passed", "measured", "threshold", "summary"]);
    for r in &results {
        out.lines.push(r.line());
        out.tol(&format!("criterion_{:02}", r.id), r.threshold);
        if !r.passed {
            out.fail(format!("criterion {} ({})", r.id, r.name));
        }
        summary.push(vec![
            (r.id as u64).into(),
            r.name.into(),
            r.passed.into(),
            r.measured.into(),
            r.threshold.into(),
            r.summary.clone().into(),
        ]);
    }
    out.tables.push(("summary".into(), summary));
    for r in results {
        out.tables.push((format!("criterion_{:02}", r.id), r.table));
    }
    Ok(())
}
