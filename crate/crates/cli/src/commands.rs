//! One function per subcommand, each returning a JSON result and, for `sum`,
//! CSV rows.

use quartdiv_core::arith::{l_one_chi, CharacterData};
use quartdiv_core::densities::{constant_c, constant_c_star, sigma_p_dd, sigma_product, sigma_star_p_dd};
use quartdiv_core::geometry::{archimedean_density, Polytope, RegionMetrics};
use quartdiv_core::lattice::{
    a_factor, a_prime_factor, delta_d, delta_lower_bound, psi0, rho_multiplicative, rho_star_multiplicative,
};
use quartdiv_core::sums::{lod_discrepancy, m_x_v, main_constant, run_sum, MainTerm, SumKind, SumReport, SumRequest};
use quartdiv_core::verify::{self, Case, Scale};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Header of the `sum` CSV output.
pub const CSV_HEADER: &str = "kind,X,Y,exact_sum,predicted_main,ratio,nu_cutoff,prime_cutoff,wall_time_ms";

pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    /// False when `verify` found a violated property.
    pub passed: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            csv: None,
            passed: true,
        }
    }
}

fn core(e: quartdiv_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn rho(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (_, t, _) = cfg.problem()?;
    let indices = cfg.indices.clone().unwrap_or_else(|| vec![cfg.d()]);
    let mut out = Vec::new();
    for d in &indices {
        out.push(json!({
            "d": d,
            "rho": rho_multiplicative(d, &t).map_err(core)?,
            "rho_star": rho_star_multiplicative(d, &t).map_err(core)?,
        }));
    }
    Ok(Outcome::ok(Value::Array(out)))
}

pub fn delta(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (_, t, _) = cfg.problem()?;
    let indices = cfg.indices.clone().unwrap_or_else(|| vec![cfg.big_d()]);
    let mut out = Vec::new();
    for dd in &indices {
        // the lower bound needs (D1, D3) and (D2, D3) squarefree
        let lb = delta_lower_bound(dd, &t).ok();
        out.push(json!({
            "D": dd,
            "delta": delta_d(dd, &t).map_err(core)?,
            "delta_lower_bound": lb,
            "psi0": psi0(dd).map_err(core)?,
            "a": a_factor(dd, &t),
            "a_prime": a_prime_factor(dd, &t),
        }));
    }
    Ok(Outcome::ok(Value::Array(out)))
}

pub fn sigma(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (_, t, _) = cfg.problem()?;
    let (d, dd, nu_max) = (cfg.d(), cfg.big_d(), cfg.nu_max());
    let primes = cfg.primes.clone().unwrap_or_else(|| {
        let mut v = vec![2, 3, 5, 7];
        v.extend(t.bad_primes());
        v.sort_unstable();
        v.dedup();
        v
    });
    let mut local = Vec::new();
    for &p in &primes {
        local.push(json!({
            "p": p,
            "sigma": sigma_p_dd(p, &d, &dd, &t, nu_max).map_err(core)?,
            "sigma_star": sigma_star_p_dd(p, &d, &dd, &t, nu_max).map_err(core)?,
        }));
    }
    let cutoff = cfg.prime_cutoff();
    Ok(Outcome::ok(json!({
        "d": d,
        "D": dd,
        "local": local,
        "product": sigma_product(&t, &d, &dd, cutoff, nu_max, false).map_err(core)?,
        "product_star": sigma_product(&t, &d, &dd, cutoff, nu_max, true).map_err(core)?,
    })))
}

pub fn constants(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (_, t, r) = cfg.problem()?;
    let (cutoff, nu_max, acc) = (cfg.prime_cutoff(), cfg.nu_max(), cfg.accelerate());
    let h = cfg.h();
    let chi = CharacterData::new(t.resultants().delta);
    let v = match &cfg.v {
        Some(v) => v.clone(),
        None => Polytope::unit_cube(3).map_err(core)?,
    };
    let mut arch = Vec::new();
    for &x in cfg.x_list.as_deref().unwrap_or(&[]) {
        arch.push(to_value(
            &archimedean_density(&r, &t, &v, x as f64, cfg.samples(), cfg.seed()).map_err(core)?,
        ));
    }
    Ok(Outcome::ok(json!({
        "C": constant_c(&t, cutoff, nu_max, acc).map_err(core)?,
        "C_star": constant_c_star(&t, &h, cutoff, nu_max, acc).map_err(core)?,
        "L_one_chi": l_one_chi(&chi, 1e-6).map_err(core)?,
        "h_prefix": h.prefix_report(10_000, cfg.eta0.unwrap_or(0.1)),
        "region": RegionMetrics::compute(&r, &t),
        "archimedean": arch,
    })))
}

fn csv_row(r: &SumReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let (nu, pc) = match &r.constant {
        Some(c) => (c.nu_cutoff.to_string(), c.prime_cutoff.to_string()),
        None => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.kind,
        r.x,
        r.y.clone().unwrap_or_default(),
        r.exact_sum,
        opt(r.predicted_main),
        opt(r.ratio),
        nu,
        pc,
        r.wall_time_ms
    )
}

pub fn sum(cfg: &ExperimentConfig, timing: bool) -> Result<Outcome, CliError> {
    let (_, t, r) = cfg.problem()?;
    let xs = cfg.x_list()?;
    let kinds = cfg.kinds.clone().unwrap_or_else(|| vec![SumKind::T]);
    let mut reports = Vec::new();
    let mut csv = format!("{CSV_HEADER}\n");
    for &kind in &kinds {
        let mut req = SumRequest::new(t, r.clone(), xs[0]);
        req.v = match kind {
            SumKind::TgPrime => cfg.v_prime.clone(),
            _ => cfg.v.clone(),
        };
        req.y = cfg.y.map(|y| quartdiv_core::rational::int(y as i64));
        req.d = cfg.d();
        req.big_d = cfg.big_d();
        req.h = cfg.h();
        req.coprime = cfg.coprime.unwrap_or(false);
        req.workers = cfg.workers();
        req.x_budget = cfg.x_budget();
        if cfg.main.unwrap_or(true) {
            req.main = MainTerm::Compute {
                prime_cutoff: cfg.prime_cutoff(),
                nu_max: cfg.nu_max(),
            };
            // computed once for the whole sweep
            if let Some(c) = main_constant(kind, &req).map_err(core)? {
                req.main = MainTerm::Given(c);
            }
        }
        for &x in xs {
            req.x = quartdiv_core::rational::int(x as i64);
            let mut rep = run_sum(kind, &req).map_err(core)?;
            if !timing {
                rep.wall_time_ms = 0;
            }
            csv.push_str(&csv_row(&rep));
            csv.push('\n');
            reports.push(rep);
        }
    }
    Ok(Outcome {
        result: to_value(&reports),
        csv: Some(csv),
        passed: true,
    })
}

pub fn verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut cases = Vec::new();
    if cfg.forms.is_some() {
        let (name, forms, region) = cfg.problem()?;
        cases.push(Case { name, forms, region });
    }
    cases.extend(verify::bundled_cases());
    let report = verify::run(&cases, cfg.scale.unwrap_or(Scale::Full));
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("{tag} {}::{} {}", c.module, c.name, c.detail);
    }
    Ok(Outcome {
        passed: report.passed(),
        result: to_value(&report),
        csv: None,
    })
}

pub fn discrepancy(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (_, t, r) = cfg.problem()?;
    let lod_v = cfg.lod_v.unwrap_or([4, 4, 4]);
    let v = match &cfg.v {
        Some(v) => v.clone(),
        None => Polytope::unit_cube(3).map_err(core)?,
    };
    let c = cfg.m_exponent.unwrap_or(1.0);
    let mut out = Vec::new();
    for &x in cfg.x_list()? {
        out.push(json!({
            "X": x,
            "level_of_distribution": lod_discrepancy(&t, &r, x, lod_v, cfg.workers()).map_err(core)?,
            "M": m_x_v(&t, &r, x, &v, c).map_err(core)?,
        }));
    }
    Ok(Outcome::ok(json!({ "lod_v": lod_v, "m_exponent": c, "rows": out })))
}
