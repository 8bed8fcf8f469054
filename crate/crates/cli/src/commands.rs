//! One pipeline per subcommand. Each returns JSON results, CSV artifacts and
//! the checks evaluated when `--gate` is set.

use ham_levy::field::kernel_identity_report;
use ham_levy::identities::{builtin_laws, fuzz_identities, FuzzConfig};
use ham_levy::levy::JumpLaw;
use ham_levy::quad::QuadConfig;
use ham_levy::rng::{path_rng, DOMAIN_AUX};
use ham_levy::stats::distance::ks_standard_error;
use ham_levy::stats::estimate::{mean_with_se, variance_ratio_jackknife};
use ham_levy::stats::{
    distance_report, fmt17, holder_diagnostic, run_mc, variance_diagnostic, McConfig, Normalization, SampleSet,
};
use ham_levy::theory::{clt_rate_exponent, poincare_scaling_integrals, CovarianceModel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};

/// Default number of simplex samples per chaos order.
const CHAOS_SAMPLES: usize = 1_000_000;
const FUZZ_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(checks: &mut Vec<Check>, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
    checks.push(Check { name: name.into(), passed, detail: detail.into() });
}

/// A named CSV file.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub file: String,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub results: Value,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
}

enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt17(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

fn table(file: &str, header: &[&str], rows: &[Vec<Cell>]) -> CliResult<Artifact> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::io(file, std::io::Error::other(e));
    writer.write_record(header).map_err(wrap)?;
    for row in rows {
        writer.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::io(file, std::io::Error::other(e.to_string())))?;
    Ok(Artifact { file: file.to_string(), bytes })
}

fn require_law(cfg: &RunConfig) -> CliResult<JumpLaw> {
    match &cfg.law {
        Some(spec) => spec.to_law(),
        None => Err(CliError::schema("law", format!("required by command {}", cfg.command.name()))),
    }
}

fn require_paths(cfg: &RunConfig) -> CliResult<usize> {
    cfg.mc
        .paths
        .ok_or_else(|| CliError::schema("mc.paths", format!("required by command {}", cfg.command.name())))
}

fn covariance_model(cfg: &RunConfig) -> CliResult<CovarianceModel> {
    let m2 = match (cfg.targets.m2, &cfg.law) {
        (Some(m2), _) => m2,
        (None, Some(spec)) => spec.to_law()?.moment_m(2.0),
        (None, None) => return Err(CliError::schema("targets.m2", "required when no law is given")),
    };
    Ok(CovarianceModel::new(m2)?)
}

fn positive_times(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let times: Vec<f64> = cfg.targets.t.iter().copied().filter(|t| *t > 0.0).collect();
    if times.is_empty() {
        return Err(CliError::schema("targets.t", "needs at least one positive time"));
    }
    Ok(times)
}

fn sorted_radii(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let mut radii = cfg.targets.radii.clone();
    if radii.is_empty() {
        return Err(CliError::schema("targets.R", "needs at least one radius"));
    }
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup();
    Ok(radii)
}

fn mc_config(cfg: &RunConfig, law: JumpLaw, times: Vec<f64>, radii: Vec<f64>) -> CliResult<McConfig> {
    let mut mc = McConfig::new(cfg.mc.seed, require_paths(cfg)?, law);
    mc.times = times;
    mc.radii = radii;
    mc.probes = cfg.targets.probes.clone();
    mc.threads = cfg.mc.threads;
    Ok(mc)
}

pub fn execute(cfg: &RunConfig) -> CliResult<Outcome> {
    match cfg.command {
        Command::Moments => moments(cfg),
        Command::Simulate => simulate(cfg),
        Command::Variance => variance(cfg),
        Command::Clt => clt(cfg),
        Command::Derivatives => derivatives(cfg),
        Command::Chaos => chaos(cfg),
        Command::Bounds => bounds(cfg),
        Command::Covariance => covariance(cfg),
    }
}

fn moments(cfg: &RunConfig) -> CliResult<Outcome> {
    let law = require_law(cfg)?;
    let alpha = cfg.targets.alpha;
    let rows: Vec<Vec<Cell>> = cfg
        .targets
        .p
        .iter()
        .map(|&p| vec![Cell::F(p), Cell::F(law.moment_m(p)), Cell::F(law.tail_moment(p))])
        .collect();
    let moments: Vec<Value> = cfg
        .targets
        .p
        .iter()
        .map(|&p| json!({ "p": p, "m_p": law.moment_m(p), "M_p": law.tail_moment(p) }))
        .collect();
    let assumptions = law.check_assumptions(alpha);
    let mut checks = Vec::new();
    check(
        &mut checks,
        "assumptions",
        assumptions.m2_finite && assumptions.clt_ok && assumptions.centered,
        format!("alpha = {alpha}: {assumptions:?}"),
    );
    let results = json!({
        "total_rate": law.total_rate(),
        "mean_jump": law.mean_jump().ok(),
        "truncated_variance": law.truncated_variance(),
        "assumptions": {
            "alpha": alpha,
            "m2_finite": assumptions.m2_finite,
            "clt_ok": assumptions.clt_ok,
            "centered": assumptions.centered,
        },
        "moments": moments,
    });
    Ok(Outcome {
        results,
        artifacts: vec![table("moments.csv", &["p", "m_p", "M_p"], &rows)?],
        checks,
    })
}

fn column_summary(name: String, xs: &[f64], target: f64, checks: &mut Vec<Check>) -> Value {
    let est = mean_with_se(xs);
    let passed = if est.se > 0.0 { est.within(target, 4.0) } else { est.value == target };
    check(checks, format!("mean {name}"), passed, format!("{} ± {} vs {target}", est.value, est.se));
    json!({ "column": name, "mean": est.value, "se": est.se, "expected": target })
}

fn simulate(cfg: &RunConfig) -> CliResult<Outcome> {
    let law = require_law(cfg)?;
    let mc = mc_config(cfg, law, cfg.targets.t.clone(), cfg.targets.radii.clone())?;
    let set = run_mc(&mc)?;
    let mut checks = Vec::new();
    let mut columns = Vec::new();
    for (key, col) in set.average_keys.iter().zip(&set.averages) {
        columns.push(column_summary(format!("F(t={};R={})", key.t, key.radius), col, 0.0, &mut checks));
    }
    for (key, col) in set.probe_keys.iter().zip(&set.probes) {
        columns.push(column_summary(format!("u(t={};x={})", key.t, key.x), col, 1.0, &mut checks));
    }
    let mut bytes = Vec::new();
    set.write_csv(&mut bytes).map_err(|e| CliError::io("simulate.csv", e))?;
    let results = json!({
        "paths": set.n_paths,
        "window": set.window,
        "mean_atoms": set.atom_counts.iter().sum::<usize>() as f64 / set.n_paths as f64,
        "columns": columns,
    });
    Ok(Outcome { results, artifacts: vec![Artifact { file: "simulate.csv".into(), bytes }], checks })
}

fn variance(cfg: &RunConfig) -> CliResult<Outcome> {
    let law = require_law(cfg)?;
    let model = CovarianceModel::from_law(&law)?;
    let times = positive_times(cfg)?;
    let radii = sorted_radii(cfg)?;
    let set = run_mc(&mc_config(cfg, law, times.clone(), radii.clone())?)?;
    let table_rows = variance_diagnostic(&set, &model)?;

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut push = |kind: &str, t: f64, s: f64, radius: f64, est: ham_levy::stats::Estimate, sigma: f64| -> CliResult<()> {
        let exact = model.finite_radius_covariance(t, s, radius)?;
        let z_exact = est.z_score(exact);
        check(
            &mut checks,
            format!("{kind}(t={t};s={s};R={radius})"),
            z_exact.abs() <= 3.0,
            format!("{} ± {} vs finite-R {exact}", est.value, est.se),
        );
        rows.push(vec![
            Cell::S(kind.into()),
            Cell::F(t),
            Cell::F(s),
            Cell::F(radius),
            Cell::F(est.value),
            Cell::F(est.se),
            Cell::F(sigma),
            Cell::F(est.z_score(sigma)),
            Cell::F(exact),
            Cell::F(z_exact),
        ]);
        entries.push(json!({
            "kind": kind, "t": t, "s": s, "R": radius, "estimate": est.value, "se": est.se,
            "sigma_limit": sigma, "z_limit": est.z_score(sigma), "finite_radius": exact, "z_finite_radius": z_exact,
        }));
        Ok(())
    };
    for row in &table_rows.variances {
        push("var", row.t, row.t, row.radius, row.var_over_r, row.sigma_limit)?;
    }
    for row in &table_rows.covariances {
        push("cov", row.t, row.s, row.radius, row.cov_over_r, row.sigma_limit)?;
    }

    // Var(F_R / R) should fall like 1/R.
    let mut lln = Vec::new();
    for &t in &times {
        for w in radii.windows(2) {
            let (r1, r2) = (w[0], w[1]);
            let ratio = variance_ratio_jackknife(
                set.average(t, r2).expect("recorded"),
                set.average(t, r1).expect("recorded"),
            )
            .scaled((r1 / r2).powi(2));
            lln.push(json!({
                "t": t, "R1": r1, "R2": r2, "ratio": ratio.value, "se": ratio.se,
                "expected": r1 / r2, "z": ratio.z_score(r1 / r2),
            }));
        }
    }
    let holder: Vec<Value> = if times.len() >= 4 {
        radii
            .iter()
            .map(|&r| holder_diagnostic(&set, r).map(|fit| json!(fit)))
            .collect::<ham_levy::Result<_>>()?
    } else {
        Vec::new()
    };
    let artifact = table(
        "variance.csv",
        &["kind", "t", "s", "R", "estimate", "se", "sigma_limit", "z_limit", "finite_radius", "z_finite_radius"],
        &rows,
    )?;
    let results = json!({ "paths": set.n_paths, "rows": entries, "lln_ratios": lln, "holder": holder });
    Ok(Outcome { results, artifacts: vec![artifact], checks })
}

fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

fn clt(cfg: &RunConfig) -> CliResult<Outcome> {
    let law = require_law(cfg)?;
    let paths = require_paths(cfg)?;
    let model = CovarianceModel::from_law(&law)?;
    let times = positive_times(cfg)?;
    let radii = sorted_radii(cfg)?;
    let set: SampleSet = run_mc(&mc_config(cfg, law, times.clone(), radii.clone())?)?;
    let ks_se = ks_standard_error(paths);

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut per_time = Vec::new();
    for &t in &times {
        let mut d_kol = Vec::new();
        let mut ladder = Vec::new();
        for &r in &radii {
            let xs = set.average(t, r).expect("recorded");
            let sample = distance_report(xs, Normalization::SampleSd)?;
            let sd = (r * model.finite_radius_covariance(t, t, r)?).sqrt();
            let exact = distance_report(xs, Normalization::Theoretical { sd })?;
            rows.push(vec![
                Cell::F(t),
                Cell::F(r),
                Cell::U(paths as u64),
                Cell::F(sample.d_kol),
                Cell::F(sample.d_w1),
                Cell::F(ks_se),
                Cell::F(exact.d_kol),
                Cell::F(exact.d_w1),
            ]);
            ladder.push(json!({
                "R": r, "d_kol": sample.d_kol, "d_w1": sample.d_w1, "sample_sd": sample.scale,
                "d_kol_exact_sd": exact.d_kol, "d_w1_exact_sd": exact.d_w1, "exact_sd": sd,
            }));
            d_kol.push(sample.d_kol);
        }
        let monotone = d_kol.windows(2).all(|w| w[1] <= w[0] + 2.0 * ks_se);
        check(&mut checks, format!("d_kol non-increasing (t={t})"), monotone, format!("{d_kol:?}, 2 SE = {}", 2.0 * ks_se));
        let last = *d_kol.last().expect("non-empty ladder");
        check(&mut checks, format!("d_kol below 0.02 (t={t})"), last < 0.02, format!("{last} at R={}", radii[radii.len() - 1]));
        let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let log_d: Vec<f64> = d_kol.iter().map(|d| d.ln()).collect();
        per_time.push(json!({
            "t": t,
            "ladder": ladder,
            "log_log_slope": slope(&logs, &log_d),
            "predicted_slope": -clt_rate_exponent(cfg.targets.alpha),
        }));
    }
    let artifact = table(
        "clt.csv",
        &["t", "R", "paths", "d_kol", "d_w1", "ks_se", "d_kol_exact_sd", "d_w1_exact_sd"],
        &rows,
    )?;
    let results = json!({ "paths": paths, "ks_standard_error": ks_se, "times": per_time });
    Ok(Outcome { results, artifacts: vec![artifact], checks })
}

fn derivatives(cfg: &RunConfig) -> CliResult<Outcome> {
    let laws: Vec<(String, JumpLaw)> = match &cfg.law {
        Some(spec) => vec![("configured".to_string(), spec.to_law()?)],
        None => builtin_laws().into_iter().map(|(n, l)| (n.to_string(), l)).collect(),
    };
    let fuzz = FuzzConfig { seed: cfg.mc.seed, cases: cfg.mc.cases, ..FuzzConfig::default() };
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (name, law) in &laws {
        let r = fuzz_identities(law, &fuzz)?;
        max_residual = max_residual.max(r.max_one_residual).max(r.max_two_residual);
        check(&mut checks, format!("identities ({name})"), r.passes(FUZZ_TOLERANCE), format!("{r:?}"));
        rows.push(vec![
            Cell::S(name.clone()),
            Cell::U(r.cases as u64),
            Cell::U(r.inside_cone as u64),
            Cell::F(r.mean_atoms),
            Cell::U(r.max_atoms as u64),
            Cell::F(r.max_one_residual),
            Cell::F(r.max_two_residual),
            Cell::U(r.outside_cone_nonzero as u64),
            Cell::F(r.max_half_residual),
        ]);
        reports.push(json!({ "law": name, "report": r }));
    }
    let artifact = table(
        "derivatives.csv",
        &[
            "law",
            "cases",
            "inside_cone",
            "mean_atoms",
            "max_atoms",
            "max_one_residual",
            "max_two_residual",
            "outside_cone_nonzero",
            "max_half_residual",
        ],
        &rows,
    )?;
    let results = json!({
        "tolerance": FUZZ_TOLERANCE,
        "max_residual": max_residual,
        "laws": reports,
    });
    Ok(Outcome { results, artifacts: vec![artifact], checks })
}

fn chaos(cfg: &RunConfig) -> CliResult<Outcome> {
    let model = covariance_model(cfg)?;
    let samples = cfg.mc.paths.unwrap_or(CHAOS_SAMPLES);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut per_time = Vec::new();
    for (i, &t) in cfg.targets.t.iter().enumerate() {
        let mut rng = path_rng(cfg.mc.seed, DOMAIN_AUX, i as u64);
        let mut terms = Vec::new();
        let (mut partial, mut var) = (1.0, 0.0);
        for n in 1..=3u32 {
            let est = model.chaos_term(n, t, samples, &mut rng)?;
            let taylor = model.cosh_taylor_term(n, t);
            let passed = if n == 1 {
                est.estimate == taylor
            } else {
                (est.estimate - taylor).abs() <= 3.0 * est.std_error
            };
            check(&mut checks, format!("chaos n={n} t={t}"), passed, format!("{} ± {} vs {taylor}", est.estimate, est.std_error));
            partial += est.estimate;
            var += est.std_error * est.std_error;
            let z = if est.std_error > 0.0 { (est.estimate - taylor) / est.std_error } else { 0.0 };
            rows.push(vec![
                Cell::U(u64::from(n)),
                Cell::F(t),
                Cell::F(est.estimate),
                Cell::F(est.std_error),
                Cell::F(taylor),
                Cell::F(z),
            ]);
            terms.push(json!({ "n": n, "estimate": est.estimate, "std_error": est.std_error, "taylor": taylor }));
        }
        let total = model.second_moment(t);
        let tail = total - (1.0 + (1..=3).map(|n| model.cosh_taylor_term(n, t)).sum::<f64>());
        check(
            &mut checks,
            format!("partial sum t={t}"),
            (partial + tail - total).abs() <= 3.0 * var.sqrt() + 1e-15 * total,
            format!("1 + sum = {partial}, second moment = {total}, analytic tail = {tail}"),
        );
        per_time.push(json!({
            "t": t, "terms": terms, "partial_sum": partial, "second_moment": total, "tail_n_ge_4": tail,
        }));
    }
    let artifact = table("chaos.csv", &["n", "t", "estimate", "std_error", "taylor", "z"], &rows)?;
    let results = json!({ "m2": model.m2(), "samples": samples, "times": per_time });
    Ok(Outcome { results, artifacts: vec![artifact], checks })
}

fn bounds(cfg: &RunConfig) -> CliResult<Outcome> {
    let quad = QuadConfig::default();
    let alpha = cfg.targets.alpha;
    let times = positive_times(cfg)?;
    let radii = sorted_radii(cfg)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut scaling = Vec::new();
    for &t in &times {
        for &r in &radii {
            let rep = poincare_scaling_integrals(t, r, alpha, &quad)?;
            let s = rep.at_radius;
            let within = s.i1 <= s.i1_bound && s.i2 <= s.i2_bound && s.i3 <= s.i3_bound;
            check(&mut checks, format!("bounds t={t} R={r}"), within, format!("{s:?}"));
            if r >= 20.0 * t {
                check(
                    &mut checks,
                    format!("I1 doubling t={t} R={r}"),
                    (1.9..=2.1).contains(&rep.ratios[0]),
                    format!("I1(2R)/I1(R) = {}", rep.ratios[0]),
                );
            }
            rows.push(vec![
                Cell::F(t),
                Cell::F(r),
                Cell::F(alpha),
                Cell::F(rep.q),
                Cell::F(s.i1),
                Cell::F(s.i1_bound),
                Cell::F(s.i2),
                Cell::F(s.i2_bound),
                Cell::F(s.i3),
                Cell::F(s.i3_bound),
                Cell::F(rep.ratios[0]),
                Cell::F(rep.ratios[1]),
                Cell::F(rep.ratios[2]),
            ]);
            scaling.push(json!(rep));
        }
    }
    let mut artifacts = vec![table(
        "bounds.csv",
        &["t", "R", "alpha", "q", "i1", "i1_bound", "i2", "i2_bound", "i3", "i3_bound", "i1_ratio", "i2_ratio", "i3_ratio"],
        &rows,
    )?];

    let mut kernel = Vec::new();
    let mut kernel_rows = Vec::new();
    for &t in &times {
        for &s in cfg.targets.s.iter().filter(|s| **s <= t) {
            for &r in &radii {
                let rep = kernel_identity_report(t, s, r, 0.5 * s, &quad)?;
                let d = rep.difference_integral;
                let passed = (d.value - d.reference).abs() <= 1e-10 && rep.phi_sq_integral.holds && rep.phi_fourth_integral.holds;
                check(&mut checks, format!("kernel t={t} s={s} R={r}"), passed, format!("{rep:?}"));
                kernel_rows.push(vec![
                    Cell::F(t),
                    Cell::F(s),
                    Cell::F(r),
                    Cell::F(d.value),
                    Cell::F(d.reference),
                    Cell::F(rep.phi_sq_integral.value),
                    Cell::F(rep.phi_sq_integral.reference),
                    Cell::F(rep.phi_fourth_integral.value),
                    Cell::F(rep.phi_fourth_integral.reference),
                ]);
                kernel.push(json!(rep));
            }
        }
    }
    if !kernel_rows.is_empty() {
        artifacts.push(table(
            "kernel.csv",
            &["t", "s", "R", "difference", "difference_exact", "phi_sq", "phi_sq_bound", "phi_fourth", "phi_fourth_bound"],
            &kernel_rows,
        )?);
    }
    let results = json!({ "alpha": alpha, "scaling": scaling, "kernel": kernel });
    Ok(Outcome { results, artifacts, checks })
}

fn covariance(cfg: &RunConfig) -> CliResult<Outcome> {
    let model = covariance_model(cfg)?;
    let times = &cfg.targets.t;
    let mut moments = Vec::new();
    for &t in times {
        moments.push(json!({
            "t": t,
            "second_moment": model.second_moment(t),
            "sigma_tt": model.sigma_limit(t, t)?,
        }));
    }
    let pairs: Vec<(f64, f64)> = if cfg.targets.s.is_empty() {
        times
            .iter()
            .enumerate()
            .flat_map(|(i, &t)| times[i..].iter().map(move |&s| (t, s)))
            .collect()
    } else {
        times.iter().flat_map(|&t| cfg.targets.s.iter().map(move |&s| (t, s))).collect()
    };
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for &(t, s) in &pairs {
        let sigma = model.sigma_limit(t, s)?;
        let mut finite = Vec::new();
        for &r in &cfg.targets.radii {
            let exact = model.finite_radius_covariance(t, s, r)?;
            rows.push(vec![Cell::F(t), Cell::F(s), Cell::F(r), Cell::F(sigma), Cell::F(exact)]);
            finite.push(json!({ "R": r, "covariance_over_r": exact }));
        }
        entries.push(json!({ "t": t, "s": s, "sigma_limit": sigma, "finite_radius": finite }));
    }
    let artifact = table("covariance.csv", &["t", "s", "R", "sigma_limit", "finite_radius"], &rows)?;
    let results = json!({ "m2": model.m2(), "moments": moments, "pairs": entries });
    Ok(Outcome { results, artifacts: vec![artifact], checks: Vec::new() })
}
