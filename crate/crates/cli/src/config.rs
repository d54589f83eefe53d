//! Run configuration: JSON file, then command-line overrides.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fraclab::barriers::{DataRecord, ExteriorData};
use fraclab::geometry::{Domain, DomainRecord, Polygon};
use fraclab::kernels::{KernelKind, KernelRecord, KernelSpec};
use fraclab::nonlocal_op::QuadratureSpec;
use fraclab::wos::WoSConfig;
use fraclab::Point;

/// Exterior data as a built-in call like `"holder_point_singularity(0.3, 1, 0)"`
/// or as a tagged record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Name(String),
    Record(DataRecord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BarrierKind {
    Halfspace,
    Psi,
    Cone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierParams {
    pub kind: BarrierKind,
    /// Exponent of the half-space and ψ barriers.
    pub alpha: f64,
    /// Exponent of the cone barrier.
    pub beta: f64,
    pub eta: f64,
    pub normal: Point,
    pub axis: Point,
    /// Distance band of the ψ check.
    pub band: (f64, f64),
    /// Number of test points (distances for ψ).
    pub n: usize,
    /// Search interval for the cone exponent bracket; none skips the search.
    pub beta_range: Option<(f64, f64)>,
    pub iterations: usize,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            kind: BarrierKind::Halfspace,
            alpha: 0.25,
            beta: 0.05,
            eta: 1.0,
            normal: [1.0, 0.0],
            axis: [0.0, 1.0],
            band: (1e-3, 1e-1),
            n: 10,
            beta_range: None,
            iterations: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    pub tmin: f64,
    pub tmax: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileParams {
    /// Boundary point; by default the first boundary kink of the data.
    pub z0: Option<Point>,
    pub grid: GridParams,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            z0: None,
            grid: GridParams {
                tmin: 1e-4,
                tmax: 1e-2,
                n: 12,
            },
        }
    }
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            tmin: 1e-4,
            tmax: 1e-2,
            n: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FitParams {
    /// Profile CSV with columns `t,value,stderr`.
    pub input: Option<String>,
    /// Order used by the log-corrected model; none fits the power law only.
    pub s: Option<f64>,
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub points: Option<Vec<Point>>,
    /// Profile window as fractions of the diameter.
    pub window: (f64, f64),
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        let d = fraclab::regularity::ExperimentConfig::default();
        ExperimentParams {
            points: d.points,
            window: d.window,
            samples: d.samples,
            tolerance: d.tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub kernel: KernelRecord,
    pub domain: DomainRecord,
    pub data: Option<DataSpec>,
    pub quadrature: QuadratureSpec,
    pub wos: WoSConfig,
    pub seed: u64,
    /// Evaluation points of `apply-op` and `solve`.
    pub points: Vec<Point>,
    /// Built-in field of `apply-op`.
    pub field: String,
    pub barrier: BarrierParams,
    pub profile: ProfileParams,
    pub counterexample: GridParams,
    pub fit: FitParams,
    pub experiment: ExperimentParams,
    /// Directions sampled by `validate-kernel`.
    pub samples: usize,
    pub output: Option<String>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            kernel: KernelRecord {
                kind: KernelKind::FracLap,
                s: 0.5,
                dim: 2,
                lambda: 1.0,
                big_lambda: 1.0,
                angular: None,
            },
            domain: DomainRecord::Ball {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            data: None,
            quadrature: QuadratureSpec::default(),
            wos: WoSConfig::default(),
            seed: 0,
            points: Vec::new(),
            field: "plus_power(0.5)".into(),
            barrier: BarrierParams::default(),
            profile: ProfileParams::default(),
            counterexample: GridParams::default(),
            fit: FitParams::default(),
            experiment: ExperimentParams::default(),
            samples: 4096,
            output: None,
            format: Format::Csv,
        }
    }
}

/// Parses a config from JSON, or from the `# config:` line of an earlier
/// output file. Errors name the offending field and position.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let json = match embedded_config(text) {
        Some(line) => line,
        None => text,
    };
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        anyhow::anyhow!(
            "config error at `{}` (line {}, column {}): {}",
            e.path(),
            inner.line(),
            inner.column(),
            inner
        )
    })
}

/// The JSON after `# config: ` in a self-describing output file.
pub fn embedded_config(text: &str) -> Option<&str> {
    text.lines().take_while(|l| l.starts_with('#')).find_map(|l| l.strip_prefix("# config: "))
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

/// Domain from a short name (`ball`, `square`, `l-shape`) or a JSON record.
pub fn parse_domain(spec: &str) -> Result<DomainRecord> {
    let rec = match spec.trim() {
        "ball" | "unit-ball" => DomainRecord::Ball {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        "square" | "unit-square" => DomainRecord::Polygon {
            vertices: Polygon::unit_square().vertices().to_vec(),
        },
        "l-shape" | "l_shape" => DomainRecord::Polygon {
            vertices: Polygon::l_shape().vertices().to_vec(),
        },
        "halfplane" | "half-plane" => DomainRecord::Halfplane { normal: [0.0, 1.0] },
        other => serde_json::from_str(other)
            .with_context(|| format!("`{other}` is neither a built-in domain name nor a domain record"))?,
    };
    Ok(rec)
}

/// Parses `"x,y"`.
pub fn parse_point(spec: &str) -> Result<Point> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("expected a point `x,y`, got `{spec}`");
    }
    Ok([parts[0].parse()?, parts[1].parse()?])
}

/// Parses `"a,b"` as an interval.
pub fn parse_pair(spec: &str) -> Result<(f64, f64)> {
    let p = parse_point(spec)?;
    Ok((p[0], p[1]))
}

impl RunConfig {
    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        Ok(KernelSpec::from_record(&self.kernel)?)
    }

    pub fn domain(&self) -> Result<Domain> {
        Ok(Domain::from_record(&self.domain)?)
    }

    pub fn data(&self) -> Result<Option<ExteriorData>> {
        Ok(match &self.data {
            None => None,
            Some(DataSpec::Name(n)) => Some(ExteriorData::parse(n)?),
            Some(DataSpec::Record(r)) => Some(ExteriorData::new(r.clone())?),
        })
    }

    pub fn require_data(&self) -> Result<ExteriorData> {
        self.data()?.context("this command needs exterior data (`data` in the config or --data)")
    }

    /// Canonical JSON of the resolved config.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }
}

/// A boundary anchor for point-singular data: the rightmost point of a ball,
/// or the re-entrant (else first) vertex of a polygon.
pub fn default_anchor(dom: &Domain) -> Result<Point> {
    match dom {
        Domain::Ball { center, radius } => Ok([center[0] + radius, center[1]]),
        Domain::Polygon(p) => {
            let v = p.vertices();
            let reentrant = (0..v.len()).find(|&i| p.interior_angle(i) > std::f64::consts::PI + 1e-12);
            Ok(v[reentrant.unwrap_or(0)])
        }
        Domain::HalfPlane { .. } => Ok([0.0, 0.0]),
        _ => bail!("no default boundary anchor for a {} domain; give --z0", dom.variant_name()),
    }
}

/// `|y - z₀|^α` capped at ten diameters, which keeps walk payloads square
/// integrable without changing the behavior near `z₀`.
pub fn anchored_data(dom: &Domain, alpha: f64) -> Result<ExteriorData> {
    let z0 = default_anchor(dom)?;
    let cap = dom.diameter().map(|d| 10.0 * d);
    Ok(ExteriorData::new(DataRecord::HolderPointSingularity { alpha, z0, cap })?)
}
