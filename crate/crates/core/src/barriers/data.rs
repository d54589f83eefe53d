//! Exterior Dirichlet data with a declared Hölder certificate `(α, C₀)`:
//! `|g(x) - g(z)| ≤ C₀|x - z|^α` for `x ∉ Ω`, `z ∈ ∂Ω`, and
//! `|g(x)| ≤ C₀(1 + |x|^α)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::geometry::Domain;
use crate::point::{self, dot, norm, Point};

/// Built-in data families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataRecord {
    /// `min(|y - z0|, cap)^α`, uncapped when `cap` is absent.
    HolderPointSingularity {
        alpha: f64,
        z0: Point,
        #[serde(default)]
        cap: Option<f64>,
    },
    /// `min(|y|^s, 1)`.
    CounterexampleMinRs1 { s: f64 },
    Constant { value: f64 },
    Linear {
        grad: Point,
        #[serde(default)]
        offset: f64,
    },
    /// `min(|y - center|, cap)`.
    CappedDistance { center: Point, cap: f64 },
    /// `|arg y|^α` with `arg ∈ (-π, π]`.
    AnglePower { alpha: f64 },
    /// `Σ coef·g_i`.
    Combination { terms: Vec<(f64, DataRecord)> },
}

impl DataRecord {
    /// Parses `name(arg, ...)`, e.g. `holder_point_singularity(0.3, 1, 0)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
            None => (spec, ""),
            _ => return Err(FracError::Parameter(format!("malformed data spec `{spec}`"))),
        };
        let nums: Vec<f64> = args
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(|a| {
                a.parse::<f64>()
                    .map_err(|_| FracError::Parameter(format!("bad number `{a}` in data spec `{spec}`")))
            })
            .collect::<Result<_>>()?;
        let arity = |lo: usize, hi: usize| -> Result<()> {
            if nums.len() < lo || nums.len() > hi {
                Err(FracError::Parameter(format!(
                    "`{name}` takes {lo}..={hi} arguments, got {}",
                    nums.len()
                )))
            } else {
                Ok(())
            }
        };
        match name.trim() {
            "holder_point_singularity" => {
                arity(3, 4)?;
                Ok(DataRecord::HolderPointSingularity {
                    alpha: nums[0],
                    z0: [nums[1], nums[2]],
                    cap: nums.get(3).copied(),
                })
            }
            "counterexample_min_rs_1" => {
                arity(0, 1)?;
                Ok(DataRecord::CounterexampleMinRs1 {
                    s: nums.first().copied().unwrap_or(0.5),
                })
            }
            "constant" => {
                arity(1, 1)?;
                Ok(DataRecord::Constant { value: nums[0] })
            }
            "linear" => {
                arity(2, 3)?;
                Ok(DataRecord::Linear {
                    grad: [nums[0], nums[1]],
                    offset: nums.get(2).copied().unwrap_or(0.0),
                })
            }
            "capped_distance" => {
                arity(3, 3)?;
                Ok(DataRecord::CappedDistance {
                    center: [nums[0], nums[1]],
                    cap: nums[2],
                })
            }
            "angle_power" => {
                arity(1, 1)?;
                Ok(DataRecord::AnglePower { alpha: nums[0] })
            }
            other => Err(FracError::Parameter(format!("unknown data built-in `{other}`"))),
        }
    }

    fn eval(&self, y: Point) -> f64 {
        match self {
            DataRecord::HolderPointSingularity { alpha, z0, cap } => {
                let r = point::dist(y, *z0);
                let r = cap.map_or(r, |c| r.min(c));
                r.powf(*alpha)
            }
            DataRecord::CounterexampleMinRs1 { s } => norm(y).powf(*s).min(1.0),
            DataRecord::Constant { value } => *value,
            DataRecord::Linear { grad, offset } => dot(*grad, y) + offset,
            DataRecord::CappedDistance { center, cap } => point::dist(y, *center).min(*cap),
            DataRecord::AnglePower { alpha } => y[1].atan2(y[0]).abs().powf(*alpha),
            DataRecord::Combination { terms } => terms.iter().map(|(c, g)| c * g.eval(y)).sum(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FracError::Parameter(m));
        match self {
            DataRecord::HolderPointSingularity { alpha, cap, .. } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("Hölder exponent {alpha} must lie in (0, 1]"));
                }
                if let Some(c) = cap {
                    if !(*c > 0.0) {
                        return bad(format!("cap {c} must be positive"));
                    }
                }
                Ok(())
            }
            DataRecord::CounterexampleMinRs1 { s } if !(*s > 0.0 && *s < 1.0) => bad(format!("s = {s} must lie in (0, 1)")),
            DataRecord::CappedDistance { cap, .. } if !(*cap > 0.0) => bad(format!("cap {cap} must be positive")),
            DataRecord::AnglePower { alpha } if !(*alpha > 0.0 && *alpha <= 1.0) => {
                bad(format!("exponent {alpha} must lie in (0, 1]"))
            }
            DataRecord::Combination { terms } => terms.iter().try_for_each(|(_, g)| g.validate()),
            _ => Ok(()),
        }
    }

    /// Certificate `(α, C₀)` valid on all of R².
    fn certificate(&self) -> (f64, f64) {
        match self {
            DataRecord::HolderPointSingularity { alpha, z0, .. } => (*alpha, norm(*z0).powf(*alpha).max(1.0)),
            DataRecord::CounterexampleMinRs1 { s } => (*s, 1.0),
            DataRecord::Constant { value } => (1.0, value.abs()),
            DataRecord::Linear { grad, offset } => (1.0, norm(*grad).max(offset.abs())),
            DataRecord::CappedDistance { center, cap } => (1.0, cap.max(1.0).max(norm(*center))),
            // not a true global certificate; only checked by sampling
            DataRecord::AnglePower { alpha } => (*alpha, std::f64::consts::PI.powf(*alpha)),
            DataRecord::Combination { terms } => {
                let alpha = terms.iter().map(|(_, g)| g.certificate().0).fold(1.0, f64::min);
                // the smallest exponent, with a factor 2 to absorb far pairs
                let c0 = terms.iter().map(|(c, g)| 2.0 * c.abs() * g.certificate().1).sum();
                (alpha, c0)
            }
        }
    }

    fn growth_exponent(&self) -> f64 {
        match self {
            DataRecord::HolderPointSingularity { alpha, cap: None, .. } => *alpha,
            DataRecord::Linear { grad, .. } if norm(*grad) > 0.0 => 1.0,
            DataRecord::Combination { terms } => terms.iter().map(|(_, g)| g.growth_exponent()).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    fn kinks(&self) -> Vec<Point> {
        match self {
            DataRecord::HolderPointSingularity { z0, .. } => vec![*z0],
            DataRecord::CounterexampleMinRs1 { .. } => vec![[0.0, 0.0]],
            DataRecord::CappedDistance { center, .. } => vec![*center],
            DataRecord::AnglePower { .. } => vec![[1.0, 0.0], [-1.0, 0.0]],
            DataRecord::Combination { terms } => terms.iter().flat_map(|(_, g)| g.kinks()).collect(),
            _ => Vec::new(),
        }
    }
}

/// The exterior datum `g` with its declared certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorData {
    pub record: DataRecord,
    pub alpha: f64,
    pub c0: f64,
    pub tag: String,
}

impl ExteriorData {
    pub fn new(record: DataRecord) -> Result<Self> {
        record.validate()?;
        let (alpha, c0) = record.certificate();
        let tag = match &record {
            DataRecord::HolderPointSingularity { alpha, z0, cap: None } => {
                format!("holder_point_singularity({alpha}, {}, {})", z0[0], z0[1])
            }
            DataRecord::HolderPointSingularity { alpha, z0, cap: Some(c) } => {
                format!("holder_point_singularity({alpha}, {}, {}, {c})", z0[0], z0[1])
            }
            DataRecord::CounterexampleMinRs1 { s } => format!("counterexample_min_rs_1({s})"),
            DataRecord::Constant { value } => format!("constant({value})"),
            DataRecord::Linear { grad, offset } => format!("linear({}, {}, {offset})", grad[0], grad[1]),
            DataRecord::CappedDistance { center, cap } => {
                format!("capped_distance({}, {}, {cap})", center[0], center[1])
            }
            DataRecord::AnglePower { alpha } => format!("angle_power({alpha})"),
            DataRecord::Combination { .. } => "combination".to_string(),
        };
        Ok(ExteriorData { record, alpha, c0, tag })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        ExteriorData::new(DataRecord::parse(spec)?)
    }

    pub fn holder_point_singularity(alpha: f64, z0: Point) -> Result<Self> {
        ExteriorData::new(DataRecord::HolderPointSingularity { alpha, z0, cap: None })
    }

    pub fn counterexample_min_rs_1(s: f64) -> Result<Self> {
        ExteriorData::new(DataRecord::CounterexampleMinRs1 { s })
    }

    pub fn constant(value: f64) -> Self {
        ExteriorData::new(DataRecord::Constant { value }).expect("constants are valid")
    }

    pub fn linear(grad: Point, offset: f64) -> Self {
        ExteriorData::new(DataRecord::Linear { grad, offset }).expect("affine data are valid")
    }

    /// Overrides the declared certificate.
    pub fn with_certificate(mut self, alpha: f64, c0: f64) -> Self {
        self.alpha = alpha;
        self.c0 = c0;
        self
    }

    /// `Σ cᵢ gᵢ`.
    pub fn combination(terms: &[(f64, &ExteriorData)]) -> Result<Self> {
        ExteriorData::new(DataRecord::Combination {
            terms: terms.iter().map(|(c, g)| (*c, g.record.clone())).collect(),
        })
    }

    #[inline]
    pub fn eval(&self, y: Point) -> f64 {
        self.record.eval(y)
    }

    /// Exponent `e` with `|g(y)| ≲ 1 + |y|^e`; 0 for bounded data.
    pub fn growth_exponent(&self) -> f64 {
        self.record.growth_exponent()
    }

    pub fn is_bounded(&self) -> bool {
        self.growth_exponent() == 0.0
    }

    /// Points where `g` fails to be smooth, used as quadrature hints.
    pub fn kinks(&self) -> Vec<Point> {
        self.record.kinks()
    }

    /// Samples both certificate inequalities: `samples` pairs `x ∉ Ω`,
    /// `z ∈ ∂Ω` drawn inside a box of half-width `half_width`.
    pub fn check_certificate(&self, dom: &Domain, samples: usize, half_width: f64, seed: u64) -> CertificateReport {
        let mut rng = crate::rng::stream(seed, crate::rng::mix(0xce27, samples as u64), 0);
        let mut report = CertificateReport {
            samples: 0,
            holder_violations: 0,
            growth_violations: 0,
            worst_holder_ratio: 0.0,
            worst_growth_ratio: 0.0,
        };
        let mut attempts = 0;
        while report.samples < samples && attempts < 100 * samples + 1000 {
            attempts += 1;
            let x = [half_width * (2.0 * rng.gen::<f64>() - 1.0), half_width * (2.0 * rng.gen::<f64>() - 1.0)];
            if dom.contains(x) {
                continue;
            }
            let z = dom.boundary_point(rng.gen::<f64>(), half_width);
            report.samples += 1;
            let gx = self.eval(x);
            let gap = point::dist(x, z);
            if gap > 0.0 {
                let ratio = (gx - self.eval(z)).abs() / (self.c0 * gap.powf(self.alpha));
                report.worst_holder_ratio = report.worst_holder_ratio.max(ratio);
                if ratio > 1.0 + 1e-12 {
                    report.holder_violations += 1;
                }
            }
            let ratio = gx.abs() / (self.c0 * (1.0 + norm(x).powf(self.alpha)));
            report.worst_growth_ratio = report.worst_growth_ratio.max(ratio);
            if ratio > 1.0 + 1e-12 {
                report.growth_violations += 1;
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub samples: usize,
    pub holder_violations: usize,
    pub growth_violations: usize,
    /// Largest `|g(x)-g(z)| / (C₀|x-z|^α)`.
    pub worst_holder_ratio: f64,
    /// Largest `|g(x)| / (C₀(1+|x|^α))`.
    pub worst_growth_ratio: f64,
}

impl CertificateReport {
    pub fn holds(&self) -> bool {
        self.holder_violations == 0 && self.growth_violations == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_evaluate() {
        let g = ExteriorData::parse("holder_point_singularity(0.3, 1, 0)").unwrap();
        assert_eq!(g.alpha, 0.3);
        assert!((g.eval([2.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((g.eval([1.0, 0.5]) - 0.5f64.powf(0.3)).abs() < 1e-15);
        let c = ExteriorData::parse("counterexample_min_rs_1").unwrap();
        assert_eq!(c.eval([0.0, -4.0]), 1.0);
        assert!((c.eval([0.0, -0.25]) - 0.5).abs() < 1e-15);
        assert!(ExteriorData::parse("nope(1)").is_err());
        assert!(ExteriorData::parse("holder_point_singularity(0.3)").is_err());
        assert!(ExteriorData::parse("holder_point_singularity(1.3, 0, 0)").is_err());
    }

    #[test]
    fn certificates_hold_on_samples() {
        let ball = Domain::unit_ball();
        for spec in [
            "holder_point_singularity(0.3, 1, 0)",
            "holder_point_singularity(0.8, 1, 0, 4)",
            "counterexample_min_rs_1(0.5)",
            "capped_distance(2, 0, 3)",
            "linear(1, 0, 0)",
        ] {
            let g = ExteriorData::parse(spec).unwrap();
            let rep = g.check_certificate(&ball, 2000, 6.0, 1);
            assert!(rep.holds(), "{spec}: {rep:?}");
        }
        let hp = Domain::half_plane([0.0, 1.0]).unwrap();
        let g = ExteriorData::counterexample_min_rs_1(0.5).unwrap();
        assert!(g.check_certificate(&hp, 2000, 10.0, 2).holds());
    }

    #[test]
    fn overstated_exponent_is_caught() {
        let g = ExteriorData::linear([1.0, 0.0], 0.0).with_certificate(1.0, 0.1);
        let rep = g.check_certificate(&Domain::unit_ball(), 500, 4.0, 3);
        assert!(rep.holder_violations > 0);
    }
}
