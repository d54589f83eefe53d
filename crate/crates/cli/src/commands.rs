//! One function per subcommand. Each returns the rendered artifact and
//! whether the run counts as a pass.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use fraclab::barriers::{
    bracket_beta0, cone_test_points, verify_cone_barrier, verify_halfspace_supersolution, verify_psi_barrier, BarrierFn,
    ExtendedField, ExteriorData,
};
use fraclab::geometry::Domain;
use fraclab::kernels::validate_kernel;
use fraclab::nonlocal_op::{apply_l, apply_l_1d, Affine, Constant, Field, OperatorValue, PlusPower};
use fraclab::point::{axpy, perp};
use fraclab::quad::logspace;
use fraclab::regularity::{
    boundary_profile, exponent_experiment, fit_holder, BoundaryProfile, ExperimentConfig, FitModel, HolderFit,
    ProfileSample, ProfileSolver,
};
use fraclab::wos::{halfplane_constant, halfplane_poisson, kappa_s, solve};
use fraclab::Point;

use crate::config::{anchored_data, default_anchor, BarrierKind, Format, RunConfig};
use crate::output::{companion, render_csv, render_json, Table};

pub struct Outcome {
    pub text: String,
    /// Extra artifact, written next to the main output.
    pub companion: Option<(&'static str, String)>,
    pub pass: bool,
    /// One line for stderr.
    pub summary: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome {
            text,
            companion: None,
            pass: true,
            summary: None,
        }
    }
}

fn table_json(t: &Table) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = t
        .rows
        .iter()
        .map(|r| {
            let obj: serde_json::Map<String, serde_json::Value> = t
                .columns
                .iter()
                .zip(r)
                .map(|(c, v)| {
                    let val = v
                        .parse::<f64>()
                        .ok()
                        .and_then(serde_json::Number::from_f64)
                        .map(serde_json::Value::Number)
                        .unwrap_or_else(|| serde_json::Value::String(v.clone()));
                    (c.clone(), val)
                })
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::Value::Array(rows)
}

fn emit_table(command: &str, cfg: &RunConfig, table: &Table) -> Result<String> {
    match cfg.format {
        Format::Csv => render_csv(command, cfg, table),
        Format::Json => render_json(command, cfg, &table_json(table)),
    }
}

/// Reads a CSV with a header row; `#` lines are comments.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        rows.push(row.with_context(|| format!("{} row {}: non-numeric field", path.display(), i + 1))?);
    }
    Ok((header, rows))
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("missing column `{name}` (have {})", header.join(",")))
}

pub fn read_points(path: &Path) -> Result<Vec<Point>> {
    let (h, rows) = read_csv(path)?;
    let (ix, iy) = (column(&h, "x")?, column(&h, "y")?);
    Ok(rows.iter().map(|r| [r[ix], r[iy]]).collect())
}

/// `name(a, b, ...)` into the name and its numeric arguments.
fn parse_call(spec: &str) -> Result<(String, Vec<f64>)> {
    let spec = spec.trim();
    let (name, rest) = match spec.find('(') {
        Some(i) => (&spec[..i], &spec[i + 1..]),
        None => return Ok((spec.to_string(), Vec::new())),
    };
    let body = rest.strip_suffix(')').with_context(|| format!("missing `)` in `{spec}`"))?;
    let args: Result<Vec<f64>, _> = body
        .split(',')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .map(str::parse::<f64>)
        .collect();
    Ok((name.trim().to_string(), args.with_context(|| format!("bad argument in `{spec}`"))?))
}

/// Built-in fields of `apply-op`.
fn build_field<'a>(spec: &str, dom: &'a Domain, g: Option<&'a ExteriorData>, rel_tol: f64) -> Result<Box<dyn Field + 'a>> {
    let (name, a) = parse_call(spec)?;
    let need = |n: usize| -> Result<()> {
        if a.len() != n {
            bail!("`{name}` takes {n} argument(s), got {}", a.len());
        }
        Ok(())
    };
    Ok(match name.as_str() {
        "plus_power" => match a.len() {
            1 => Box::new(PlusPower::line(0.0, a[0])),
            2 => Box::new(PlusPower::line(a[1], a[0])),
            n => bail!("`plus_power` takes 1 or 2 arguments, got {n}"),
        },
        "constant" => {
            need(1)?;
            Box::new(Constant(a[0]))
        }
        "affine" => {
            need(3)?;
            Box::new(Affine {
                grad: [a[0], a[1]],
                offset: a[2],
            })
        }
        "halfspace" => {
            need(3)?;
            Box::new(BarrierFn::half_space([a[1], a[2]], a[0])?)
        }
        "psi_power" => {
            need(1)?;
            Box::new(BarrierFn::psi_power(dom.clone(), a[0])?)
        }
        "cone" => {
            need(4)?;
            Box::new(BarrierFn::cone([a[2], a[3]], a[1], a[0])?)
        }
        "extension" => {
            need(0)?;
            let g = g.context("`extension` needs exterior data")?;
            Box::new(ExtendedField::new(dom, g, rel_tol)?)
        }
        other => bail!(
            "unknown field `{other}`; built-ins: plus_power(a[, shift]), constant(c), affine(gx, gy, c), \
             halfspace(alpha, nx, ny), psi_power(alpha), cone(beta, eta, ax, ay), extension"
        ),
    })
}

fn operator_row(x: Point, v: &OperatorValue) -> Vec<String> {
    vec![
        x[0].to_string(),
        x[1].to_string(),
        v.value.to_string(),
        v.err_estimate.to_string(),
        v.near_part.to_string(),
        v.far_part.to_string(),
        v.converged.to_string(),
    ]
}

pub fn apply_op(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.kernel_spec()?;
    let dom = cfg.domain()?;
    let g = cfg.data()?;
    if cfg.points.is_empty() {
        bail!("apply-op needs evaluation points (`points` in the config, --point or --points)");
    }
    let field = build_field(&cfg.field, &dom, g.as_ref(), 0.01 * cfg.quadrature.target_rel_tol)?;
    let mut t = Table::new(&["x", "y", "value", "err_estimate", "near_part", "far_part", "converged"]);
    for x in &cfg.points {
        let v = if k.dim() == 1 {
            apply_l_1d(k.s(), field.as_ref(), x[0], &cfg.quadrature)?
        } else {
            apply_l(&k, field.as_ref(), *x, &cfg.quadrature)?
        };
        t.push(operator_row(*x, &v));
    }
    Ok(Outcome::ok(emit_table("apply-op", cfg, &t)?))
}

#[derive(Serialize)]
struct BarrierOut {
    kind: BarrierKind,
    points: Vec<Point>,
    values: Vec<f64>,
    errors: Vec<f64>,
    pass: bool,
    min_value: f64,
    min_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trend_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_bracket: Option<fraclab::barriers::BetaBracket>,
    #[serde(skip_serializing_if = "String::is_empty")]
    note: String,
}

fn min_margin(values: &[OperatorValue]) -> f64 {
    values
        .iter()
        .map(|v| if v.err_estimate > 0.0 { v.value / v.err_estimate } else { f64::INFINITY })
        .fold(f64::INFINITY, f64::min)
}

pub fn verify_barrier(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.kernel_spec()?;
    let b = &cfg.barrier;
    let q = &cfg.quadrature;
    let out = match b.kind {
        BarrierKind::Halfspace => {
            let points = if cfg.points.is_empty() {
                let nu = fraclab::point::normalize(b.normal).context("zero normal")?;
                logspace(0.05, 20.0, b.n)
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let side = if i % 2 == 0 { 0.3 } else { -0.3 };
                        axpy(side * t, perp(nu), fraclab::point::scale(nu, *t))
                    })
                    .collect()
            } else {
                cfg.points.clone()
            };
            let r = verify_halfspace_supersolution(&k, b.alpha, b.normal, &points, q)?;
            BarrierOut {
                kind: b.kind,
                values: r.values.iter().map(|v| v.value).collect(),
                errors: r.values.iter().map(|v| v.err_estimate).collect(),
                points: r.points,
                pass: r.pass,
                min_value: r.min_value,
                min_margin: r.min_margin,
                normalized: None,
                c0: None,
                trend_slope: None,
                beta_bracket: None,
                note: String::new(),
            }
        }
        BarrierKind::Psi => {
            let dom = cfg.domain()?;
            let ds = logspace(b.band.0, b.band.1, b.n);
            let r = verify_psi_barrier(&k, &dom, b.alpha, b.band, &ds, q)?;
            BarrierOut {
                kind: b.kind,
                values: r.values.iter().map(|v| v.value).collect(),
                errors: r.values.iter().map(|v| v.err_estimate).collect(),
                min_value: r.values.iter().map(|v| v.value).fold(f64::INFINITY, f64::min),
                min_margin: min_margin(&r.values),
                points: r.points,
                pass: r.pass,
                normalized: Some(r.normalized),
                c0: Some(r.c0),
                trend_slope: Some(r.trend_slope),
                beta_bracket: None,
                note: r.note,
            }
        }
        BarrierKind::Cone => {
            let points = if cfg.points.is_empty() {
                cone_test_points(b.axis, b.eta, b.n)
            } else {
                cfg.points.clone()
            };
            let r = verify_cone_barrier(&k, b.axis, b.eta, b.beta, &points, q)?;
            let bracket = match b.beta_range {
                Some(range) => Some(bracket_beta0(&k, b.axis, b.eta, &points, range, b.iterations, q)?),
                None => None,
            };
            BarrierOut {
                kind: b.kind,
                values: r.values.iter().map(|v| v.value).collect(),
                errors: r.values.iter().map(|v| v.err_estimate).collect(),
                points: r.points,
                pass: r.pass,
                min_value: r.min_value,
                min_margin: r.min_margin,
                normalized: None,
                c0: None,
                trend_slope: None,
                beta_bracket: bracket,
                note: String::new(),
            }
        }
    };
    let summary = format!(
        "{} {:?} barrier: min value {:.4e}, min margin {:.3e}",
        if out.pass { "PASS" } else { "FAIL" },
        out.kind,
        out.min_value,
        out.min_margin
    );
    Ok(Outcome {
        pass: out.pass,
        text: render_json("verify-barrier", cfg, &out)?,
        companion: None,
        summary: Some(summary),
    })
}

pub fn solve_points(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.kernel_spec()?;
    let dom = cfg.domain()?;
    let g = cfg.require_data()?;
    if cfg.points.is_empty() {
        bail!("solve needs points (`points` in the config, --point or --points)");
    }
    let mut t = Table::new(&["x", "y", "estimate", "stderr", "mean_steps", "snapped_fraction", "bias_bound"]);
    for x in &cfg.points {
        let r = solve(&dom, &g, *x, &k, &cfg.wos)?;
        t.push_numbers(&[x[0], x[1], r.estimate, r.stderr, r.mean_steps, r.snapped_fraction, r.bias_bound]);
    }
    Ok(Outcome::ok(emit_table("solve", cfg, &t)?))
}

fn profile_anchor(dom: &Domain, g: &ExteriorData, z0: Option<Point>) -> Result<Point> {
    if let Some(z) = z0 {
        return Ok(z);
    }
    let scale = dom.diameter().unwrap_or(1.0);
    let on_boundary = g.kinks().into_iter().find(|z| dom.dist(*z) <= 1e-12 * scale && !dom.contains(*z));
    match on_boundary {
        Some(z) => Ok(z),
        None => default_anchor(dom),
    }
}

pub fn profile(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.kernel_spec()?;
    let dom = cfg.domain()?;
    let g = cfg.require_data()?;
    let z0 = profile_anchor(&dom, &g, cfg.profile.z0)?;
    let grid = &cfg.profile.grid;
    let ts = logspace(grid.tmin, grid.tmax, grid.n);
    let solver = match dom {
        Domain::HalfPlane { .. } => ProfileSolver::HalfPlane {
            s: k.s(),
            q: cfg.quadrature,
        },
        _ => ProfileSolver::WalkOnSpheres { kernel: &k, cfg: cfg.wos },
    };
    let p = boundary_profile(&solver, &dom, &g, z0, &ts)?;
    let mut t = Table::new(&["t", "value", "stderr"]);
    for q in &p.samples {
        t.push_numbers(&[q.t, q.value, q.stderr]);
    }
    let summary = (!p.warnings.is_empty()).then(|| p.warnings.join("; "));
    Ok(Outcome {
        text: emit_table("profile", cfg, &t)?,
        companion: None,
        pass: true,
        summary,
    })
}

fn fit_row(f: &HolderFit) -> Vec<String> {
    let model = match f.model {
        FitModel::Plain => "plain",
        FitModel::LogCorrected => "log_corrected",
    };
    let (h0, h1) = f.half_window_slopes.unwrap_or((f64::NAN, f64::NAN));
    vec![
        f.alpha_hat.to_string(),
        f.constant_hat.to_string(),
        f.log_coeff.to_string(),
        model.to_string(),
        f.residual_rms.to_string(),
        f.window.0.to_string(),
        f.window.1.to_string(),
        f.samples_used.to_string(),
        f.plain_aic.to_string(),
        f.log_fit.map_or(f64::NAN, |l| l.aic).to_string(),
        h0.to_string(),
        h1.to_string(),
    ]
}

const FIT_COLUMNS: [&str; 12] = [
    "alpha_hat",
    "constant_hat",
    "log_coeff",
    "model",
    "residual_rms",
    "t_min",
    "t_max",
    "samples_used",
    "plain_aic",
    "log_aic",
    "half_window_slope_low",
    "half_window_slope_high",
];

pub fn fit(cfg: &RunConfig) -> Result<Outcome> {
    let input = cfg.fit.input.as_deref().context("fit needs an input profile (--input)")?;
    let (h, rows) = read_csv(Path::new(input))?;
    let (it, iv) = (column(&h, "t")?, column(&h, "value")?);
    let ie = column(&h, "stderr").ok();
    let samples = rows
        .iter()
        .map(|r| ProfileSample {
            t: r[it],
            value: r[iv],
            stderr: ie.map_or(0.0, |i| r[i]),
        })
        .collect();
    let p = BoundaryProfile::from_samples([0.0, 0.0], [0.0, 0.0], 0.0, samples)?;
    let f = fit_holder(&p, cfg.fit.s, cfg.fit.window)?;
    let text = match cfg.format {
        Format::Json => render_json("fit", cfg, &f)?,
        Format::Csv => {
            let mut t = Table::new(&FIT_COLUMNS);
            t.push(fit_row(&f));
            render_csv("fit", cfg, &t)?
        }
    };
    Ok(Outcome {
        text,
        companion: None,
        pass: true,
        summary: Some(format!("alpha_hat {:.4}, model {:?}", f.alpha_hat, f.model)),
    })
}

pub fn experiment(cfg: &RunConfig, alpha: Option<f64>) -> Result<Outcome> {
    let k = cfg.kernel_spec()?;
    let dom = cfg.domain()?;
    let g = match (cfg.data()?, alpha) {
        (Some(g), _) => g,
        (None, Some(a)) => anchored_data(&dom, a)?,
        (None, None) => bail!("experiment needs data (--data) or a Hölder exponent (--alpha)"),
    };
    let ecfg = ExperimentConfig {
        points: cfg.experiment.points.clone(),
        window: cfg.experiment.window,
        samples: cfg.experiment.samples,
        wos: cfg.wos,
        tolerance: cfg.experiment.tolerance,
    };
    let r = exponent_experiment(&dom, &g, &k, &ecfg)?;
    let report = render_json("experiment", cfg, &r)?;
    let mut t = Table::new(&["z0_x", "z0_y", "t", "value", "stderr"]);
    for p in &r.points {
        for q in &p.profile.samples {
            t.push_numbers(&[p.z0[0], p.z0[1], q.t, q.value, q.stderr]);
        }
    }
    let (text, companion) = match cfg.format {
        Format::Csv => (render_csv("experiment", cfg, &t)?, Some(("report.json", report))),
        Format::Json => (report, None),
    };
    Ok(Outcome {
        text,
        companion,
        pass: r.pass,
        summary: Some(r.verdict),
    })
}

pub fn counterexample(cfg: &RunConfig) -> Result<Outcome> {
    let s = cfg.kernel.s;
    let g = match cfg.data()? {
        Some(g) => g,
        None => ExteriorData::counterexample_min_rs_1(s)?,
    };
    let grid = &cfg.counterexample;
    if !(grid.tmin > 0.0 && grid.tmax > grid.tmin && grid.tmax < 1.0 && grid.n >= 2) {
        bail!("need 0 < tmin < tmax < 1 and n ≥ 2");
    }
    let ts = logspace(grid.tmin, grid.tmax, grid.n);
    let mut t = Table::new(&["t", "u", "t_pow_s", "t_pow_s_log", "ratio", "err_estimate"]);
    let mut ratios = Vec::new();
    for &tt in &ts {
        let v = halfplane_poisson(&g, [0.0, tt], s, &cfg.quadrature)?;
        let ts_ = tt.powf(s);
        let tl = ts_ * (1.0 / tt).ln();
        ratios.push(v.value / tl);
        t.push_numbers(&[tt, v.value, ts_, tl, v.value / tl, v.err_estimate]);
    }
    let (c, k) = (halfplane_constant(s), kappa_s(s));
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
    Ok(Outcome {
        text: emit_table("counterexample", cfg, &t)?,
        companion: None,
        pass: true,
        summary: Some(format!(
            "ratio u/(t^s ln(1/t)) in [{lo:.4}, {hi:.4}]; c_s = {c:.6}, κ_s = {k:.6}, c_s κ_s = {:.6}",
            c * k
        )),
    })
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.kernel_spec()?;
    let r = validate_kernel(&k, cfg.samples);
    let body = serde_json::json!({
        "violations": r.violations(),
        "valid": r.is_valid(),
        "details": r,
    });
    Ok(Outcome {
        pass: r.is_valid(),
        text: render_json("validate-kernel", cfg, &body)?,
        companion: None,
        summary: Some(format!("{} violation(s) in {} samples", r.violations(), r.samples)),
    })
}

/// Path of a companion artifact for `output`.
pub fn companion_path(output: &Path, suffix: &str) -> std::path::PathBuf {
    companion(output, suffix)
}
