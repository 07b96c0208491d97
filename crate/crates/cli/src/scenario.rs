//! Scenario files: declarative descriptions of one check.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use bmlab_core::concavity::{GridFunction1D, GridFunction2D};
use bmlab_core::counterexamples::FamilyKind;
use bmlab_core::measures::DensityDescriptor;
use bmlab_core::quadrature::QuadraturePolicy;
use bmlab_core::sets::{DirectionUnit, SetDescriptor};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckBm,
    ScanDilates,
    BProperty,
    PropConcave,
    Slab,
    Bonnesen,
    Hm,
    DancsUhrin,
    CounterexamplePower,
    CounterexampleSearch,
    Parallel,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckBm => "check-bm",
            Command::ScanDilates => "scan-dilates",
            Command::BProperty => "b-property",
            Command::PropConcave => "prop-concave",
            Command::Slab => "slab",
            Command::Bonnesen => "bonnesen",
            Command::Hm => "hm",
            Command::DancsUhrin => "dancs-uhrin",
            Command::CounterexamplePower => "counterexample-power",
            Command::CounterexampleSearch => "counterexample-search",
            Command::Parallel => "parallel",
        }
    }
}

/// A real number that may also be written `"inf"` or `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl FromStr for ExtReal {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtReal(f64::INFINITY)),
            "-inf" | "-infinity" => Ok(ExtReal(f64::NEG_INFINITY)),
            t => {
                let v: f64 = t.parse().with_context(|| format!("not an extended real: {t:?}"))?;
                if v.is_nan() {
                    bail!("NaN is not an extended real");
                }
                Ok(ExtReal(v))
            }
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            v if v == f64::INFINITY => f.write_str("inf"),
            v if v == f64::NEG_INFINITY => f.write_str("-inf"),
            v => write!(f, "{v}"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal(v)),
            Raw::Str(s) => s.parse().map_err(|e: anyhow::Error| de::Error::custom(e.to_string())),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

/// Either an explicit list or a range `"a:b:step"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range(String),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range(s) => parse_range(s)?,
        };
        if v.is_empty() {
            bail!("grid is empty");
        }
        if v.iter().any(|x| !x.is_finite()) {
            bail!("grid values must be finite");
        }
        Ok(v)
    }
}

/// `a:b:step`, inclusive of `b` when it lies on the lattice.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        bail!("grid {s:?} is not of the form a:b:step");
    };
    let (a, b, step): (f64, f64, f64) = (
        a.trim().parse().with_context(|| format!("bad start in {s:?}"))?,
        b.trim().parse().with_context(|| format!("bad end in {s:?}"))?,
        step.trim().parse().with_context(|| format!("bad step in {s:?}"))?,
    );
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        bail!("grid {s:?} needs finite a <= b and step > 0");
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| (a + step * i as f64).min(b)).collect())
}

/// One-dimensional grid function, sampled on a [`Grid1`].
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Func1 {
    /// `height exp(-|(x - center) / width|^power)`
    Bump {
        center: f64,
        width: f64,
        #[serde(default = "two")]
        power: f64,
        #[serde(default = "one")]
        height: f64,
    },
    Indicator {
        interval: [f64; 2],
        #[serde(default = "one")]
        height: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl Func1 {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Func1::Bump {
                center,
                width,
                power,
                height,
            } => height * (-((x - center) / width).abs().powf(*power)).exp(),
            Func1::Indicator { interval, height } => {
                // half-cell slack so grid nodes on the boundary count
                if x >= interval[0] - 1e-9 && x <= interval[1] + 1e-9 {
                    *height
                } else {
                    0.0
                }
            }
            Func1::Values { .. } => unreachable!("sampled directly"),
        }
    }

    pub fn sample(&self, g: &Grid1) -> Result<GridFunction1D> {
        match self {
            Func1::Values { values } => {
                if values.len() != g.n {
                    bail!("values has length {}, grid has {}", values.len(), g.n);
                }
                Ok(GridFunction1D::new(g.x0, g.step, values.clone())?)
            }
            f => Ok(GridFunction1D::from_fn(g.x0, g.step, g.n, |x| f.eval(x))?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1 {
    pub x0: f64,
    pub step: f64,
    pub n: usize,
}

/// Two-dimensional grid function: a product `scale f(x) g(y)` or raw values
/// indexed `i * ny + j`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Func2 {
    Product {
        factors: [Func1; 2],
        #[serde(default = "one")]
        scale: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2 {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Func2 {
    pub fn sample(&self, g: &Grid2) -> Result<GridFunction2D> {
        match self {
            Func2::Values { values } => Ok(GridFunction2D::new(g.x0, g.y0, g.dx, g.dy, g.nx, g.ny, values.clone())?),
            Func2::Product { factors, scale } => {
                if factors.iter().any(|f| matches!(f, Func1::Values { .. })) {
                    bail!("product factors must be bump or indicator functions");
                }
                Ok(GridFunction2D::from_fn(g.x0, g.y0, g.dx, g.dy, g.nx, g.ny, |x, y| {
                    scale * factors[0].eval(x) * factors[1].eval(y)
                })?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Direction {
    Named(String),
    Vector([f64; 2]),
}

impl Direction {
    pub fn unit(&self) -> Result<DirectionUnit> {
        match self {
            Direction::Named(s) => match s.as_str() {
                "e1" => Ok(DirectionUnit::E1),
                "e2" => Ok(DirectionUnit::E2),
                other => bail!("unknown direction {other:?} (use e1, e2 or [x, y])"),
            },
            Direction::Vector([x, y]) => Ok(DirectionUnit::normalized(*x, *y)?),
        }
    }
}

/// Everything a run needs. Fields a command does not use are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub command: Command,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub measure: Option<DensityDescriptor>,
    #[serde(default)]
    pub sets: Vec<SetDescriptor>,
    #[serde(default)]
    pub s: Option<ExtReal>,
    #[serde(default)]
    pub lambda_grid: Option<GridSpec>,
    #[serde(default)]
    pub t_grid: Option<GridSpec>,
    #[serde(default)]
    pub policy: Option<QuadraturePolicy>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<String>,
    /// Exponent of the dilate scan; `1/n` by default.
    #[serde(default)]
    pub p: Option<ExtReal>,
    /// Run the radial, B-property and dilate checks together.
    #[serde(default)]
    pub pipeline: bool,
    #[serde(default)]
    pub direction: Option<Direction>,
    /// Rescale `B` (or `g`) so that its maximal section matches.
    #[serde(default)]
    pub match_sections: bool,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub functions: Vec<serde_json::Value>,
    #[serde(default)]
    pub grid: Option<serde_json::Value>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub family: Option<FamilyKind>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
}

impl ScenarioConfig {
    pub fn new(command: Command) -> Self {
        ScenarioConfig {
            command,
            name: None,
            measure: None,
            sets: Vec::new(),
            s: None,
            lambda_grid: None,
            t_grid: None,
            policy: None,
            seed: None,
            output: None,
            p: None,
            pipeline: false,
            direction: None,
            match_sections: false,
            gamma: None,
            functions: Vec::new(),
            grid: None,
            r: None,
            a: None,
            b: None,
            family: None,
            budget: None,
            restarts: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| anyhow!("invalid scenario: {e}"))?;
        Ok(cfg)
    }

    pub fn measure(&self) -> Result<&DensityDescriptor> {
        self.measure
            .as_ref()
            .ok_or_else(|| anyhow!("{} needs field `measure`", self.command.name()))
    }

    pub fn s(&self) -> Result<f64> {
        self.s
            .map(|v| v.0)
            .ok_or_else(|| anyhow!("{} needs field `s`", self.command.name()))
    }

    pub fn set_count(&self, n: usize) -> Result<()> {
        if self.sets.len() != n {
            bail!(
                "{} needs {n} entries in `sets`, found {}",
                self.command.name(),
                self.sets.len()
            );
        }
        Ok(())
    }

    pub fn functions_1d(&self) -> Result<(Vec<Func1>, Grid1)> {
        let grid = self.grid.clone().ok_or_else(|| anyhow!("{} needs field `grid`", self.command.name()))?;
        let grid: Grid1 = serde_json::from_value(grid).context("field `grid`")?;
        let f = self
            .functions
            .iter()
            .enumerate()
            .map(|(i, v)| serde_json::from_value(v.clone()).with_context(|| format!("field `functions[{i}]`")))
            .collect::<Result<Vec<Func1>>>()?;
        Ok((f, grid))
    }

    pub fn functions_2d(&self) -> Result<(Vec<Func2>, Grid2)> {
        let grid = self.grid.clone().ok_or_else(|| anyhow!("{} needs field `grid`", self.command.name()))?;
        let grid: Grid2 = serde_json::from_value(grid).context("field `grid`")?;
        let f = self
            .functions
            .iter()
            .enumerate()
            .map(|(i, v)| serde_json::from_value(v.clone()).with_context(|| format!("field `functions[{i}]`")))
            .collect::<Result<Vec<Func2>>>()?;
        Ok((f, grid))
    }
}

/// Named measures accepted on the command line in place of JSON.
pub fn measure_alias(s: &str) -> Result<DensityDescriptor> {
    let t = s.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| anyhow!("invalid measure JSON: {e}"));
    }
    Ok(match t {
        "exp-product" => DensityDescriptor::ExponentialProduct {
            dimension: 2,
            normalize: true,
        },
        "gaussian" | "gaussian-2d" => DensityDescriptor::GaussianStandard { dimension: 2 },
        "lebesgue" | "lebesgue-2d" => DensityDescriptor::Lebesgue { dimension: 2 },
        "inverse-quadratic" => DensityDescriptor::InverseQuadratic,
        other => bail!("unknown measure {other:?} (exp-product, gaussian, lebesgue, inverse-quadratic or JSON)"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_range("0:2:0.05").unwrap().len(), 41);
        assert_eq!(*parse_range("0:1:0.1").unwrap().last().unwrap(), 1.0);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
    }

    #[test]
    fn extended_reals() {
        let v: Vec<ExtReal> = serde_json::from_str(r#"[0.5, "inf", "-inf", "2"]"#).unwrap();
        assert_eq!(v[1].0, f64::INFINITY);
        assert_eq!(v[2].0, f64::NEG_INFINITY);
        assert_eq!(v[3].0, 2.0);
        assert!(serde_json::from_str::<ExtReal>(r#""nan""#).is_err());
    }

    #[test]
    fn missing_measure_is_reported() {
        let cfg = ScenarioConfig::from_json(r#"{"command": "check-bm", "s": 0.5}"#).unwrap();
        assert!(cfg.measure().unwrap_err().to_string().contains("measure"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let e = ScenarioConfig::from_json("{\"command\": \"check-bm\",\n \"lamda\": 1}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("lamda") && msg.contains("line 2"), "{msg}");
    }
}
