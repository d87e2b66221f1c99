//! One function per subcommand: effective config in, table + JSON out.

use std::path::Path;

use cubic_cw_core::glauber::{sample_chains, SampleResult, SamplerConfig};
use cubic_cw_core::rate::{parse_grid, parse_n_grid};
use cubic_cw_core::stein::concentration::{concentration_check, quartic_tail_fit};
use cubic_cw_core::stein::cramer::{
    cramer_grid, cramer_sup, cramer_table, default_truncation, hypothesis_constants, mdp_table, phase_window,
    HypothesisConstants,
};
use cubic_cw_core::stein::threshold::{alpha_zero_table, threshold_experiment, ThresholdCase};
use cubic_cw_core::stein::{
    be_certificate, critical_certificate, exact_delta2, exact_regression, lambda_forms, pure_phase_certificate,
    RegressionDecomposition, SteinReport,
};
use cubic_cw_core::{
    build_law, find_stationary_points, gamma_of_k, m_star, phase_portrait, Couplings, Error, GammaConfig, Interval,
    LimitDensity, MagnetizationLaw, PhaseConfig, RateFit, RescaledVariable,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::output::{to_json, Report, Table};

type Out = Result<(Value, Report), CliError>;

const DEFAULT_N_GRID: &str = "1024:65536:x2";
const DEFAULT_WINDOW: f64 = 0.2;

fn require<T>(v: Option<T>, key: &str, command: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{key} (or `{key} = …` in the [{command}] config table)")))
}

fn grid(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(raw).map_err(|e| CliError::Usage(format!("--{what}: {e}")))
}

/// Parses a size grid and checks that it is strictly increasing.
fn n_grid(raw: &str) -> Result<Vec<usize>, CliError> {
    let ns = parse_n_grid(raw).map_err(|e| CliError::Usage(format!("--n-grid: {e}")))?;
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!("--n-grid '{raw}' must be strictly increasing")));
    }
    Ok(ns)
}

fn couplings(k: Option<f64>, j: Option<f64>, command: &str) -> Result<Couplings, CliError> {
    Ok(Couplings::new(require(k, "K", command)?, require(j, "J", command)?)?)
}

fn fit_note(label: &str, ns: &[usize], values: &[f64]) -> Option<(String, RateFit)> {
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    RateFit::fit(&xs, values).ok().map(|f| {
        (format!("fit {label}: slope={} intercept={} r2={} points={}", f.slope, f.intercept, f.r2, f.points), f)
    })
}

/// Global minimizer selected by `which` and the conditioning window around it.
fn conditioned_phase(c: Couplings, which: Phase, width: f64, cfg: &PhaseConfig) -> Result<(f64, Interval), CliError> {
    if !(width > 0.0 && width < 0.5) {
        return Err(CliError::Usage(format!("--window must lie in (0, 0.5), got {width}")));
    }
    let portrait = phase_portrait(c, cfg);
    let mins = &portrait.global_minimizers;
    let m_i = match which {
        Phase::Low => mins[0],
        Phase::High => mins[mins.len() - 1],
    };
    let other = if mins.len() > 1 {
        match which {
            Phase::Low => mins[mins.len() - 1],
            Phase::High => mins[0],
        }
    } else {
        find_stationary_points(c, cfg)
            .iter()
            .map(|p| p.m)
            .filter(|m| (m - m_i).abs() > cfg.dedup_tol)
            .min_by(|a, b| (a - m_i).abs().total_cmp(&(b - m_i).abs()))
            .ok_or_else(|| {
                CliError::Usage(format!("only one stationary point at m = {m_i}; no window to condition on"))
            })?
    };
    Ok((m_i, phase_window(m_i, other, width)))
}

pub fn phase(a: PhaseArgs) -> Out {
    let cfg =
        PhaseConfig { scan_points: a.scan_points.unwrap_or(PhaseConfig::default().scan_points), ..Default::default() };
    if cfg.scan_points < 10 {
        return Err(CliError::Usage("--scan-points must be at least 10".into()));
    }
    match (&a.k_grid, &a.j_grid) {
        (Some(kg), Some(jg)) => {
            let (ks, js) = (grid(kg, "k-grid")?, grid(jg, "j-grid")?);
            let effective = json!({"k-grid": kg, "j-grid": jg, "scan-points": cfg.scan_points});
            let cells: Vec<(f64, f64)> = ks.iter().flat_map(|&k| js.iter().map(move |&j| (k, j))).collect();
            let rows: Vec<Value> = cells
                .par_iter()
                .map(|&(k, j)| {
                    let c = Couplings::new(k, j)?;
                    let p = phase_portrait(c, &cfg);
                    let m = m_star(c, &cfg).ok().map(|r| r.0);
                    Ok(json!({"K": k, "J": j, "label": p.phase_label, "m_star": m}))
                })
                .collect::<Result<_, Error>>()?;
            let mut table = Table::new("K,J,label,m_star");
            for r in &rows {
                table.rows.push(format!(
                    "{},{},{},{}",
                    r["K"],
                    r["J"],
                    r["label"].as_str().unwrap_or_default(),
                    r["m_star"].as_f64().map(|m| m.to_string()).unwrap_or_default()
                ));
            }
            Ok((effective, Report { table, json: Value::Array(rows) }))
        }
        (None, None) => {
            let c = couplings(a.k, a.j, "phase")?;
            let effective = json!({"K": c.k, "J": c.j, "scan-points": cfg.scan_points});
            let p = phase_portrait(c, &cfg);
            let mut table = Table::new("m,phi,phi_dd,kind,global_min");
            for e in &p.stationary_points {
                let global = p.global_minimizers.iter().any(|g| (g - e.m).abs() <= cfg.dedup_tol);
                table.rows.push(format!(
                    "{},{},{},{},{}",
                    e.m,
                    e.phi_value,
                    e.phi_dd,
                    to_json(&e.kind).as_str().unwrap_or_default(),
                    global
                ));
            }
            table.notes.push(format!("label: {}", to_json(&p.phase_label).as_str().unwrap_or_default()));
            Ok((effective, Report { table, json: to_json(&p) }))
        }
        _ => Err(CliError::Usage("--k-grid and --j-grid must be given together".into())),
    }
}

pub fn gamma(a: GammaArgs) -> Out {
    let d = GammaConfig::default();
    let cfg = GammaConfig {
        j_lo: a.j_lo.unwrap_or(d.j_lo),
        j_hi: a.j_hi.unwrap_or(d.j_hi),
        j_tol: a.j_tol.unwrap_or(d.j_tol),
        ..d
    };
    let raw = a.k_grid.unwrap_or_else(|| "0.3,0.1,0.03,0.01".into());
    let ks = grid(&raw, "k-grid")?;
    let effective = json!({"k-grid": raw, "j-lo": cfg.j_lo, "j-hi": cfg.j_hi, "j-tol": cfg.j_tol});
    let points = ks.par_iter().map(|&k| gamma_of_k(k, &cfg)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new("K,gamma,m_low,m_high,equal_depth_gap");
    for g in &points {
        table.rows.push(format!("{},{},{},{},{}", g.k, g.j_gamma, g.m_low, g.m_high, g.equal_depth_gap));
    }
    Ok((effective, Report { table, json: to_json(&points) }))
}

pub fn law(a: LawArgs) -> Out {
    let c = couplings(a.k, a.j, "law")?;
    let n = require(a.n, "n", "law")?;
    let effective = json!({"K": c.k, "J": c.j, "n": n});
    let law = build_law(c.with_n(n)?)?;
    let mut table = Table::new("s,m,pmf,cdf");
    let mut cdf = 0.0;
    for (s, q) in law.support().zip(law.pmf()) {
        cdf += q;
        table.rows.push(format!("{},{},{},{}", s, s as f64 / n as f64, q, cdf.min(1.0)));
    }
    table.notes.push(format!("log_z: {}", law.log_z()));
    Ok((effective, Report { table, json: to_json(&law.to_export()) }))
}

/// Law, rescaling and decomposition for a Stein certificate at one n.
fn certificate(c: Couplings, n: usize, cond: Option<(f64, Interval)>, cfg: &PhaseConfig) -> Result<SteinReport, Error> {
    let law = build_law(c.with_n(n)?)?;
    match cond {
        Some((m, window)) => {
            let law = law.conditional(window)?;
            let rv = RescaledVariable::around(n, c, m)?;
            let (lambda, _) = lambda_forms(c, m, n)?;
            be_certificate(&law, &rv, &LimitDensity::standard_normal(), &RegressionDecomposition::linear(lambda))
        }
        None if c.is_critical() => critical_certificate(&law),
        None => pure_phase_certificate(&law, cfg),
    }
}

#[derive(Serialize)]
struct BeRow {
    n: usize,
    phase_m: f64,
    lambda: f64,
    d_k: f64,
    term_delta2: f64,
    term_r: f64,
    term_a: f64,
    be_bound: f64,
    nonuniform_sup: f64,
    abs_first_moment: f64,
    hypothesis_ok: bool,
}

pub fn be(a: BeArgs) -> Out {
    let c = couplings(a.k, a.j, "be")?;
    let raw = a.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.into());
    let ns = n_grid(&raw)?;
    let cfg = PhaseConfig::default();
    let width = a.window.unwrap_or(DEFAULT_WINDOW);
    let cond = a.condition.map(|w| conditioned_phase(c, w, width, &cfg)).transpose()?;
    let effective = json!({"K": c.k, "J": c.j, "n-grid": raw, "condition": a.condition, "window": width});
    let reports = ns.par_iter().map(|&n| certificate(c, n, cond, &cfg)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(SteinReport::CSV_HEADER);
    table.rows = reports.iter().map(SteinReport::csv_row).collect();
    let rows: Vec<BeRow> = reports
        .iter()
        .map(|r| BeRow {
            n: r.params.n,
            phase_m: r.phase_m,
            lambda: r.lambda,
            d_k: r.kolmogorov,
            term_delta2: r.term_delta2,
            term_r: r.term_r,
            term_a: r.term_a,
            be_bound: r.be_bound,
            nonuniform_sup: r.nonuniform_sup,
            abs_first_moment: r.abs_first_moment,
            hypothesis_ok: r.hypothesis_ok,
        })
        .collect();
    let mut fits = serde_json::Map::new();
    for (label, values) in [
        ("dK", rows.iter().map(|r| r.d_k).collect::<Vec<_>>()),
        ("be_bound", rows.iter().map(|r| r.be_bound).collect()),
    ] {
        if let Some((note, f)) = fit_note(label, &ns, &values) {
            table.notes.push(note);
            fits.insert(label.into(), to_json(&f));
        }
    }
    Ok((effective, Report { table, json: json!({"rows": rows, "fits": fits}) }))
}

pub fn threshold(a: ThresholdArgs) -> Out {
    let raw = a.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.into());
    let ns = n_grid(&raw)?;
    let cfg = PhaseConfig::default();
    if a.explore_alpha_zero {
        let effective = json!({"explore-alpha-zero": true, "n-grid": raw});
        let rows = alpha_zero_table(&ns, &cfg)?;
        let mut table = Table::new("n,K_n,m_star,dK_candidate,dK_standardized_normal,dK_quartic");
        for r in &rows {
            table.rows.push(format!(
                "{},{},{},{},{},{}",
                r.n, r.k_n, r.m_star, r.d_k_candidate, r.d_k_standardized_normal, r.d_k_quartic
            ));
        }
        table.notes.push("exploratory: no limit law is certified at alpha = 0".into());
        return Ok((effective, Report { table, json: to_json(&rows) }));
    }
    let number = a.case.unwrap_or(1);
    let alpha = a.alpha.unwrap_or(-1.0);
    let delta = a.delta.unwrap_or(0.1);
    let mut case = ThresholdCase::from_number(number, delta)?;
    if let (ThresholdCase::Quartic { .. }, Some(e)) = (case, a.exponent) {
        case = ThresholdCase::Quartic { exponent: e };
    }
    let effective =
        json!({"case": number, "alpha": alpha, "delta": delta, "exponent": a.exponent.unwrap_or(0.75), "n-grid": raw});
    let rep = threshold_experiment(case, alpha, &ns, &cfg)?;
    let mut table = Table::new(cubic_cw_core::stein::threshold::ThresholdReport::CSV_HEADER);
    table.rows = rep.csv_rows();
    if let Some(f) = rep.fit {
        table
            .notes
            .push(format!("fit dK: slope={} intercept={} r2={} points={}", f.slope, f.intercept, f.r2, f.points));
    }
    Ok((effective, Report { table, json: to_json(&rep) }))
}

pub fn concentration(a: ConcentrationArgs) -> Out {
    let c = couplings(a.k, a.j, "concentration")?;
    let raw = a.n_grid.unwrap_or_else(|| "100,1000,10000".into());
    let ns = n_grid(&raw)?;
    let t_raw = a.t_grid.unwrap_or_else(|| "0:5:0.5".into());
    let ts = grid(&t_raw, "t-grid")?;
    let effective = json!({"K": c.k, "J": c.j, "n-grid": raw, "t-grid": t_raw, "quartic": a.quartic});
    let laws = ns.par_iter().map(|&n| build_law(c.with_n(n)?)).collect::<Result<Vec<MagnetizationLaw>, _>>()?;
    if a.quartic {
        let fits: Vec<_> = laws.iter().map(|l| quartic_tail_fit(l, &ts)).collect();
        let mut table = Table::new("n,t,prob,c_t");
        for f in &fits {
            for r in &f.rows {
                table.rows.push(format!("{},{},{},{}", f.n, r.t, r.prob, r.c_t));
            }
            table.notes.push(format!("c_fit n={}: {}", f.n, f.c_fit));
        }
        return Ok((effective, Report { table, json: to_json(&fits) }));
    }
    let mut rows = Vec::new();
    for l in &laws {
        rows.extend(concentration_check(l, &ts)?);
    }
    let mut table = Table::new("n,t,lhs,rhs,holds");
    for r in &rows {
        table.rows.push(format!("{},{},{},{},{}", r.n, r.t, r.lhs, r.rhs, r.holds));
    }
    let violations = rows.iter().filter(|r| !r.holds).count();
    table.notes.push(format!("violations: {violations} of {}", rows.len()));
    Ok((effective, Report { table, json: json!({"rows": rows, "violations": violations}) }))
}

pub fn cramer(a: CramerArgs) -> Out {
    let c = couplings(a.k, a.j, "cramer")?;
    let raw = a.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.into());
    let ns = n_grid(&raw)?;
    let range_c = a.c.unwrap_or(1.0);
    let points = a.points.unwrap_or(50);
    if !(range_c > 0.0) || points < 2 {
        return Err(CliError::Usage("--c must be positive and --points at least 2".into()));
    }
    let xs = a.x_grid.as_deref().map(|s| grid(s, "x-grid")).transpose()?;
    let cfg = PhaseConfig::default();
    let width = a.window.unwrap_or(DEFAULT_WINDOW);
    let cond = a.condition.map(|w| conditioned_phase(c, w, width, &cfg)).transpose()?;
    let effective = json!({
        "K": c.k, "J": c.j, "n-grid": raw, "x-grid": a.x_grid, "c": range_c, "points": points,
        "condition": a.condition, "window": width,
    });
    let per_n = ns
        .par_iter()
        .map(|&n| {
            let law = build_law(c.with_n(n)?)?;
            let (law, rv) = match cond {
                Some((m, window)) => (law.conditional(window)?, RescaledVariable::around(n, c, m)?),
                None => (law.clone(), RescaledVariable::pure_phase(law.params(), &cfg)?),
            };
            let x_grid = xs.clone().unwrap_or_else(|| cramer_grid(n, range_c, points));
            let x_max = x_grid.iter().cloned().fold(0.0, f64::max);
            Ok((cramer_table(&law, &rv, &x_grid), cramer_sup(&law, &rv, x_max)))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut table = Table::new("n,x,p_exact,p_normal,ratio,normalized_residual");
    for (rows, sup) in &per_n {
        for r in rows {
            table
                .rows
                .push(format!("{},{},{},{},{},{}", r.n, r.x, r.p_exact, r.p_normal, r.ratio, r.normalized_residual));
        }
        table.notes.push(format!("sup n={}: x={} normalized_residual={}", sup.n, sup.x, sup.normalized_residual));
    }
    let json = json!(per_n.iter().map(|(rows, sup)| json!({"rows": rows, "sup": sup})).collect::<Vec<_>>());
    Ok((effective, Report { table, json }))
}

pub fn mdp(a: MdpArgs) -> Out {
    let c = couplings(a.k, a.j, "mdp")?;
    let raw = a.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.into());
    let ns = n_grid(&raw)?;
    let x_raw = a.x_grid.unwrap_or_else(|| "0.5,1,1.5".into());
    let xs = grid(&x_raw, "x-grid")?;
    if xs.iter().any(|x| !(*x > 0.0)) {
        return Err(CliError::Usage("--x-grid values must be positive".into()));
    }
    let effective = json!({"K": c.k, "J": c.j, "n-grid": raw, "x-grid": x_raw});
    let rows = mdp_table(c.with_n(ns[0])?, &PhaseConfig::default(), &ns, &xs)?;
    let mut table = Table::new("n,x,a_n,value,target,rel_err");
    for r in &rows {
        table.rows.push(format!("{},{},{},{},{},{}", r.n, r.x, r.a_n, r.value, r.target, r.rel_err));
    }
    Ok((effective, Report { table, json: to_json(&rows) }))
}

pub fn stein(a: SteinArgs) -> Out {
    let c = couplings(a.k, a.j, "stein")?;
    let n = require(a.n, "n", "stein")?;
    let cfg = PhaseConfig::default();
    let width = a.window.unwrap_or(DEFAULT_WINDOW);
    let cond = a.condition.map(|w| conditioned_phase(c, w, width, &cfg)).transpose()?;
    let effective = json!({"K": c.k, "J": c.j, "n": n, "condition": a.condition, "window": width});
    let report = certificate(c, n, cond, &cfg)?;
    let p = c.with_n(n)?;
    let (rv, phase_m) = if c.is_critical() && cond.is_none() {
        (RescaledVariable::quartic(n), 0.0)
    } else {
        let m = match cond {
            Some((m, _)) => m,
            None => m_star(c, &cfg)?.0,
        };
        (RescaledVariable::around(n, c, m)?, m)
    };
    let mut law = build_law(p)?;
    if let Some((_, window)) = cond {
        law = law.conditional(window)?;
    }
    let mut table = Table::new("s,w,pmf,regression,delta2,remainder");
    for (s, q) in law.support().zip(law.pmf()) {
        table.rows.push(format!(
            "{},{},{},{},{},{}",
            s,
            rv.map(s),
            q,
            exact_regression(s, p, &rv)?,
            exact_delta2(s, p, &rv)?,
            report.decomposition.remainder_at(s, p, &rv)?
        ));
    }
    let hypothesis: Option<HypothesisConstants> = if c.is_critical() && cond.is_none() {
        None
    } else {
        let d = default_truncation(c, phase_m, &cfg)?;
        Some(hypothesis_constants(p, phase_m, d)?)
    };
    table.notes.push(format!(
        "lambda={} term_delta2={} term_r={} term_a={} be_bound={} dK={}",
        report.lambda, report.term_delta2, report.term_r, report.term_a, report.be_bound, report.kolmogorov
    ));
    if let Some(h) = &hypothesis {
        table.notes.push(format!(
            "hypothesis d={} delta1={} delta2={} delta2_quadratic={} alpha={} theta={}",
            h.d, h.delta1, h.delta2, h.delta2_quadratic, h.alpha, h.theta
        ));
    }
    Ok((effective, Report { table, json: json!({"report": report, "hypothesis": hypothesis}) }))
}

fn write_dumps(dir: &Path, format: DumpFormat, chains: &[SampleResult]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for r in chains {
        let stem = dir.join(format!("chain{}", r.metadata.stream));
        match format {
            DumpFormat::Csv => std::fs::write(stem.with_extension("csv"), r.to_csv())?,
            DumpFormat::Bin => r.write_binary(std::fs::File::create(stem.with_extension("bin"))?)?,
        }
        std::fs::write(stem.with_extension("json"), r.metadata_json())?;
    }
    Ok(())
}

pub fn sample(a: SampleArgs) -> Out {
    let c = couplings(a.k, a.j, "sample")?;
    let n = require(a.n, "n", "sample")?;
    let p = c.with_n(n)?;
    let mut cfg = SamplerConfig::new(a.samples.unwrap_or(10_000), a.seed.unwrap_or(0));
    cfg.burn_in_sweeps = Some(a.burn_in.unwrap_or(100));
    cfg.thinning = Some(a.thinning.unwrap_or(n));
    cfg.tau_budget = a.tau_budget.unwrap_or(cfg.tau_budget);
    let chains = a.chains.unwrap_or(1);
    if chains < 1 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    let dump_format = a.dump_format.unwrap_or(DumpFormat::Csv);
    let effective = json!({
        "K": c.k, "J": c.j, "n": n, "samples": cfg.n_samples, "burn-in": cfg.burn_in_sweeps,
        "thinning": cfg.thinning, "seed": cfg.seed, "chains": chains, "tau-budget": cfg.tau_budget,
        "dump-dir": a.dump_dir, "dump-format": dump_format,
    });
    let results = sample_chains(p, &cfg, chains)?;
    if let Some(dir) = &a.dump_dir {
        write_dumps(dir, dump_format, &results)?;
    }
    let law = build_law(p)?;
    let mut pooled = vec![0.0; n + 1];
    for r in &results {
        for (acc, q) in pooled.iter_mut().zip(&r.pmf) {
            *acc += q / chains as f64;
        }
    }
    let mut table = Table::new("s,exact,empirical");
    for ((s, exact), emp) in law.support().zip(law.pmf()).zip(&pooled) {
        table.rows.push(format!("{s},{exact},{emp}"));
    }
    let mut summaries = Vec::new();
    for r in &results {
        let ks = r.ks_distance(&law)?;
        table.notes.push(format!(
            "chain {}: ks={} tau_int={} mean_s={} stderr={}",
            r.metadata.stream,
            ks,
            r.tau_int,
            r.mean_s(),
            r.std_error_s()
        ));
        if let Some(w) = &r.mixing_warning {
            table.notes.push(format!("warning chain {}: {w}", r.metadata.stream));
        }
        summaries.push(json!({
            "metadata": r.metadata, "ks": ks, "tau_int": r.tau_int, "mean_s": r.mean_s(),
            "std_error_s": r.std_error_s(), "mixing_warning": r.mixing_warning, "pmf": r.pmf,
        }));
    }
    Ok((effective, Report { table, json: json!({"chains": summaries, "exact_pmf": law.pmf()}) }))
}
