//! Densities, their structural hypotheses, and the Borell correspondence
//! between concavity of a density and concavity of its measure.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::concavity::s_mean;
use crate::error::{Error, Result};
use crate::report::{ConcavityReport, DeficitSample, Witness};

/// Concavity index of a function, an extended real in `[-inf, +inf]`.
///
/// A function of class `g1` is also of class `g2` for every `g2 <= g1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct GammaClass(pub f64);

impl GammaClass {
    /// Convex level sets (quasi-concave).
    pub const QUASI_CONCAVE: GammaClass = GammaClass(f64::NEG_INFINITY);
    pub const LOG_CONCAVE: GammaClass = GammaClass(0.0);
    /// Constant on its support.
    pub const CONSTANT: GammaClass = GammaClass(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn implies(self, weaker: GammaClass) -> bool {
        weaker.0 <= self.0
    }
}

/// Anything that can be evaluated pointwise as a nonnegative density.
pub trait PointDensity {
    fn dimension(&self) -> usize;

    /// Strict evaluation: out-of-range queries on tabulated data are errors.
    fn density_at(&self, x: &[f64]) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneFlags {
    pub nondecreasing_left: bool,
    pub nonincreasing_right: bool,
}

impl MonotoneFlags {
    const BOTH: MonotoneFlags = MonotoneFlags {
        nondecreasing_left: true,
        nonincreasing_right: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub enum Kind1D {
    Gaussian { sigma: f64 },
    /// `e^{-rate |x|}`, multiplied by `rate / 2` when normalized.
    TwoSidedExponential { rate: f64, normalized: bool },
    /// `x^{1/gamma}` on `x >= 0`, zero elsewhere.
    PowerPlus { gamma: f64 },
    /// Indicator of a closed interval.
    Uniform { lo: f64, hi: f64 },
    /// Piecewise linear interpolation of nonnegative values on a sorted grid.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    Lebesgue,
}

/// A one-dimensional density with mode and monotonicity metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Density1D {
    kind: Kind1D,
    mode: Option<f64>,
    flags: MonotoneFlags,
}

impl Density1D {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Density1D {
            kind: Kind1D::Gaussian { sigma },
            mode: Some(0.0),
            flags: MonotoneFlags::BOTH,
        })
    }

    /// The unnormalized density `e^{-rate |x|}`.
    pub fn two_sided_exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Density1D {
            kind: Kind1D::TwoSidedExponential {
                rate,
                normalized: false,
            },
            mode: Some(0.0),
            flags: MonotoneFlags::BOTH,
        })
    }

    /// The probability density `(rate / 2) e^{-rate |x|}`.
    pub fn normalized_exponential(rate: f64) -> Result<Self> {
        let mut d = Self::two_sided_exponential(rate)?;
        d.kind = Kind1D::TwoSidedExponential {
            rate,
            normalized: true,
        };
        Ok(d)
    }

    pub fn power_plus(gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Ok(Density1D {
            kind: Kind1D::PowerPlus { gamma },
            mode: None,
            flags: MonotoneFlags {
                nondecreasing_left: true,
                nonincreasing_right: false,
            },
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Density1D {
            kind: Kind1D::Uniform { lo, hi },
            mode: Some(lo),
            flags: MonotoneFlags::BOTH,
        })
    }

    pub fn lebesgue() -> Self {
        Density1D {
            kind: Kind1D::Lebesgue,
            mode: Some(0.0),
            flags: MonotoneFlags::BOTH,
        }
    }

    /// Tabulated density. The mode is the first maximizer; the flags are set
    /// by scanning the table.
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::domain(format!(
                "tabulated density needs matching grid/values of length >= 2, got {} and {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::domain("tabulated grid must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("tabulated values must be finite and nonnegative"));
        }
        let imax = values
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
        let flags = MonotoneFlags {
            nondecreasing_left: values[..=imax].windows(2).all(|w| w[1] >= w[0]),
            nonincreasing_right: values[imax..].windows(2).all(|w| w[1] <= w[0]),
        };
        Ok(Density1D {
            mode: Some(grid[imax]),
            kind: Kind1D::Tabulated { grid, values },
            flags,
        })
    }

    pub fn kind(&self) -> &Kind1D {
        &self.kind
    }

    pub fn mode(&self) -> Option<f64> {
        self.mode
    }

    pub fn monotone_flags(&self) -> MonotoneFlags {
        self.flags
    }

    pub fn is_unimodal(&self) -> bool {
        self.mode.is_some() && self.flags == MonotoneFlags::BOTH
    }

    /// The closed interval of maximizers, when the maximum is attained.
    pub fn modal_interval(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind1D::Gaussian { .. } | Kind1D::TwoSidedExponential { .. } => Some((0.0, 0.0)),
            Kind1D::PowerPlus { .. } => None,
            Kind1D::Uniform { lo, hi } => Some((*lo, *hi)),
            Kind1D::Lebesgue => Some((f64::NEG_INFINITY, f64::INFINITY)),
            Kind1D::Tabulated { grid, values } => {
                let max = values.iter().cloned().fold(0.0, f64::max);
                let first = values.iter().position(|v| *v == max)?;
                let mut last = first;
                while last + 1 < values.len() && values[last + 1] == max {
                    last += 1;
                }
                Some((grid[first], grid[last]))
            }
        }
    }

    /// Closed-form value. Tabulated queries outside the grid hull are errors.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let Kind1D::Tabulated { grid, .. } = &self.kind {
            if x < grid[0] || x > grid[grid.len() - 1] {
                return Err(Error::domain(format!(
                    "x = {x} outside tabulated range [{}, {}]",
                    grid[0],
                    grid[grid.len() - 1]
                )));
            }
        }
        Ok(self.value_or_zero(x))
    }

    /// Density value, taking tabulated data as zero outside the grid hull.
    pub fn value_or_zero(&self, x: f64) -> f64 {
        match &self.kind {
            Kind1D::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            Kind1D::TwoSidedExponential { rate, normalized } => {
                let v = (-rate * x.abs()).exp();
                if *normalized {
                    0.5 * rate * v
                } else {
                    v
                }
            }
            Kind1D::PowerPlus { gamma } => {
                if x >= 0.0 {
                    x.powf(1.0 / gamma)
                } else {
                    0.0
                }
            }
            Kind1D::Uniform { lo, hi } => {
                if *lo <= x && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Kind1D::Tabulated { grid, values } => interpolate(grid, values, x),
            Kind1D::Lebesgue => 1.0,
        }
    }

    /// Points where the density fails to be smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind1D::Gaussian { .. } | Kind1D::TwoSidedExponential { .. } => vec![0.0],
            Kind1D::PowerPlus { .. } => vec![0.0],
            Kind1D::Uniform { lo, hi } => vec![*lo, *hi],
            Kind1D::Tabulated { grid, .. } => grid.clone(),
            Kind1D::Lebesgue => vec![],
        }
    }

    /// Closed support hull (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind1D::PowerPlus { .. } => (0.0, f64::INFINITY),
            Kind1D::Uniform { lo, hi } => (*lo, *hi),
            Kind1D::Tabulated { grid, .. } => (grid[0], grid[grid.len() - 1]),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Interval outside of which the density is below `cutoff`.
    pub fn effective_support(&self, cutoff: f64) -> (f64, f64) {
        match &self.kind {
            Kind1D::Gaussian { sigma } => {
                let peak = 1.0 / (sigma * (2.0 * PI).sqrt());
                let r = if peak > cutoff {
                    sigma * (2.0 * (peak / cutoff).ln()).sqrt()
                } else {
                    0.0
                };
                (-r, r)
            }
            Kind1D::TwoSidedExponential { rate, normalized } => {
                let peak = if *normalized { 0.5 * rate } else { 1.0 };
                let r = if peak > cutoff {
                    (peak / cutoff).ln() / rate
                } else {
                    0.0
                };
                (-r, r)
            }
            _ => self.support(),
        }
    }

    /// Total mass, `None` when infinite.
    pub fn total_mass(&self) -> Option<f64> {
        match &self.kind {
            Kind1D::Gaussian { .. } => Some(1.0),
            Kind1D::TwoSidedExponential { rate, normalized } => {
                Some(if *normalized { 1.0 } else { 2.0 / rate })
            }
            Kind1D::Uniform { lo, hi } => Some(hi - lo),
            Kind1D::Tabulated { grid, values } => Some(
                grid.windows(2)
                    .zip(values.windows(2))
                    .map(|(g, v)| 0.5 * (g[1] - g[0]) * (v[0] + v[1]))
                    .sum(),
            ),
            Kind1D::PowerPlus { .. } | Kind1D::Lebesgue => None,
        }
    }

    /// Declared concavity class of the density, when one is known.
    pub fn declared_gamma(&self) -> Option<GammaClass> {
        match &self.kind {
            Kind1D::Gaussian { .. } | Kind1D::TwoSidedExponential { .. } => {
                Some(GammaClass::LOG_CONCAVE)
            }
            Kind1D::PowerPlus { gamma } => Some(GammaClass(*gamma)),
            Kind1D::Uniform { .. } | Kind1D::Lebesgue => Some(GammaClass::CONSTANT),
            // in one dimension quasi-concavity is unimodality
            Kind1D::Tabulated { .. } => self.is_unimodal().then_some(GammaClass::QUASI_CONCAVE),
        }
    }

    pub fn is_even(&self) -> bool {
        match &self.kind {
            Kind1D::Gaussian { .. } | Kind1D::TwoSidedExponential { .. } | Kind1D::Lebesgue => {
                true
            }
            Kind1D::PowerPlus { .. } => false,
            Kind1D::Uniform { lo, hi } => *lo == -*hi,
            Kind1D::Tabulated { grid, values } => {
                let n = grid.len();
                (0..n).all(|i| grid[i] == -grid[n - 1 - i] && values[i] == values[n - 1 - i])
            }
        }
    }
}

impl PointDensity for Density1D {
    fn dimension(&self) -> usize {
        1
    }

    fn density_at(&self, x: &[f64]) -> Result<f64> {
        check_dim(1, x.len())?;
        self.eval(x[0])
    }
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    if x < grid[0] || x > grid[n - 1] {
        return 0.0;
    }
    let i = grid.partition_point(|g| *g <= x).clamp(1, n - 1);
    let (x0, x1) = (grid[i - 1], grid[i]);
    let w = (x - x0) / (x1 - x0);
    values[i - 1] * (1.0 - w) + values[i] * w
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A two-dimensional density given by a function handle and a declared class.
#[derive(Clone)]
pub struct Custom2d {
    pub name: String,
    pub func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub gamma: Option<GammaClass>,
    pub mode: Option<[f64; 2]>,
    pub unconditional: bool,
}

impl Custom2d {
    pub fn new(
        name: impl Into<String>,
        gamma: Option<GammaClass>,
        func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Custom2d {
            name: name.into(),
            func: Arc::new(func),
            gamma,
            mode: None,
            unconditional: false,
        }
    }

    /// `1 / (1 + x^2 + y^2)`: its reciprocal is convex, so it is (-1)-concave.
    pub fn inverse_quadratic() -> Self {
        Custom2d {
            mode: Some([0.0, 0.0]),
            unconditional: true,
            ..Custom2d::new("inverse-quadratic", Some(GammaClass(-1.0)), |x, y| {
                1.0 / (1.0 + x * x + y * y)
            })
        }
    }

    /// Standard Gaussian density translated to `center`.
    pub fn shifted_gaussian(center: [f64; 2]) -> Self {
        let [cx, cy] = center;
        Custom2d {
            mode: Some(center),
            unconditional: cx == 0.0 && cy == 0.0,
            ..Custom2d::new("shifted-gaussian", Some(GammaClass::LOG_CONCAVE), move |x, y| {
                let (dx, dy) = (x - cx, y - cy);
                (-0.5 * (dx * dx + dy * dy)).exp() / (2.0 * PI)
            })
        }
    }
}

impl fmt::Debug for Custom2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Custom2d")
            .field("name", &self.name)
            .field("gamma", &self.gamma)
            .field("mode", &self.mode)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum KindND {
    Product(Vec<Density1D>),
    GaussianStandard { dimension: usize },
    /// `prod e^{-|x_i|}`, times `2^{-n}` when normalized.
    ExponentialProduct { dimension: usize, normalized: bool },
    Lebesgue { dimension: usize },
    Custom2d(Custom2d),
}

/// A density on `R^n`.
#[derive(Debug, Clone)]
pub struct DensityND {
    kind: KindND,
}

impl DensityND {
    pub fn product(factors: Vec<Density1D>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::domain("product density needs at least one factor"));
        }
        Ok(DensityND {
            kind: KindND::Product(factors),
        })
    }

    pub fn gaussian_standard(dimension: usize) -> Result<Self> {
        nonzero_dim(dimension)?;
        Ok(DensityND {
            kind: KindND::GaussianStandard { dimension },
        })
    }

    pub fn exponential_product(dimension: usize, normalized: bool) -> Result<Self> {
        nonzero_dim(dimension)?;
        Ok(DensityND {
            kind: KindND::ExponentialProduct {
                dimension,
                normalized,
            },
        })
    }

    pub fn lebesgue(dimension: usize) -> Result<Self> {
        nonzero_dim(dimension)?;
        Ok(DensityND {
            kind: KindND::Lebesgue { dimension },
        })
    }

    pub fn custom_2d(custom: Custom2d) -> Self {
        DensityND {
            kind: KindND::Custom2d(custom),
        }
    }

    pub fn kind(&self) -> &KindND {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            KindND::Product(f) => f.len(),
            KindND::GaussianStandard { dimension }
            | KindND::ExponentialProduct { dimension, .. }
            | KindND::Lebesgue { dimension } => *dimension,
            KindND::Custom2d(_) => 2,
        }
    }

    /// One-dimensional factors when the density is a product.
    pub fn marginals(&self) -> Option<Vec<Density1D>> {
        match &self.kind {
            KindND::Product(f) => Some(f.clone()),
            KindND::GaussianStandard { dimension } => {
                Some(vec![Density1D::gaussian(1.0).expect("unit sigma"); *dimension])
            }
            KindND::ExponentialProduct {
                dimension,
                normalized,
            } => {
                let d = if *normalized {
                    Density1D::normalized_exponential(1.0)
                } else {
                    Density1D::two_sided_exponential(1.0)
                };
                Some(vec![d.expect("unit rate"); *dimension])
            }
            KindND::Lebesgue { dimension } => Some(vec![Density1D::lebesgue(); *dimension]),
            KindND::Custom2d(_) => None,
        }
    }

    /// Value at a 2-D point, zero outside tabulated ranges.
    pub(crate) fn value2(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            KindND::Product(f) => f[0].value_or_zero(x) * f[1].value_or_zero(y),
            KindND::GaussianStandard { .. } => (-0.5 * (x * x + y * y)).exp() / (2.0 * PI),
            KindND::ExponentialProduct { normalized, .. } => {
                let v = (-(x.abs() + y.abs())).exp();
                if *normalized {
                    0.25 * v
                } else {
                    v
                }
            }
            KindND::Lebesgue { .. } => 1.0,
            KindND::Custom2d(c) => (c.func)(x, y),
        }
    }

    pub(crate) fn value_or_zero(&self, x: &[f64]) -> f64 {
        match &self.kind {
            KindND::Product(f) => f.iter().zip(x).map(|(d, xi)| d.value_or_zero(*xi)).product(),
            KindND::GaussianStandard { dimension } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-0.5 * r2).exp() / (2.0 * PI).powf(*dimension as f64 / 2.0)
            }
            KindND::ExponentialProduct {
                dimension,
                normalized,
            } => {
                let l1: f64 = x.iter().map(|v| v.abs()).sum();
                let v = (-l1).exp();
                if *normalized {
                    v / 2f64.powi(*dimension as i32)
                } else {
                    v
                }
            }
            KindND::Lebesgue { .. } => 1.0,
            KindND::Custom2d(c) => (c.func)(x[0], x[1]),
        }
    }

    /// Kink locations along coordinate `axis`.
    pub fn breakpoints_along(&self, axis: usize) -> Vec<f64> {
        match &self.kind {
            KindND::Product(f) => f.get(axis).map(|d| d.breakpoints()).unwrap_or_default(),
            KindND::GaussianStandard { .. } | KindND::ExponentialProduct { .. } => vec![0.0],
            KindND::Lebesgue { .. } => vec![],
            KindND::Custom2d(c) => c.mode.map(|m| vec![m[axis]]).unwrap_or_default(),
        }
    }

    pub fn mode(&self) -> Option<Vec<f64>> {
        match &self.kind {
            KindND::Product(f) => f.iter().map(|d| d.mode()).collect(),
            KindND::Custom2d(c) => c.mode.map(|m| m.to_vec()),
            _ => Some(vec![0.0; self.dimension()]),
        }
    }

    pub fn declared_gamma(&self) -> Option<GammaClass> {
        match &self.kind {
            KindND::Product(f) => {
                let classes: Option<Vec<GammaClass>> =
                    f.iter().map(|d| d.declared_gamma()).collect();
                let classes = classes?;
                if classes.iter().all(|g| *g == GammaClass::CONSTANT) {
                    Some(GammaClass::CONSTANT)
                } else if classes.iter().all(|g| g.0 >= 0.0) {
                    // products of log-concave functions in separate variables
                    Some(GammaClass::LOG_CONCAVE)
                } else if f.len() == 1 {
                    Some(classes[0])
                } else {
                    None
                }
            }
            KindND::GaussianStandard { .. } | KindND::ExponentialProduct { .. } => {
                Some(GammaClass::LOG_CONCAVE)
            }
            KindND::Lebesgue { .. } => Some(GammaClass::CONSTANT),
            KindND::Custom2d(c) => c.gamma,
        }
    }

    /// Whether the density is invariant under coordinate sign flips.
    pub fn is_unconditional(&self) -> bool {
        match &self.kind {
            KindND::Product(f) => f.iter().all(|d| d.is_even()),
            KindND::Custom2d(c) => c.unconditional,
            _ => true,
        }
    }

    /// Total mass, `None` when infinite or unknown.
    pub fn total_mass(&self) -> Option<f64> {
        self.marginals()?
            .iter()
            .map(|d| d.total_mass())
            .product::<Option<f64>>()
    }
}

fn nonzero_dim(dimension: usize) -> Result<()> {
    if dimension == 0 {
        Err(Error::domain("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

impl PointDensity for DensityND {
    fn dimension(&self) -> usize {
        DensityND::dimension(self)
    }

    fn density_at(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension(), x.len())?;
        if let KindND::Product(f) = &self.kind {
            let mut v = 1.0;
            for (d, xi) in f.iter().zip(x) {
                v *= d.eval(*xi)?;
            }
            return Ok(v);
        }
        Ok(self.value_or_zero(x))
    }
}

/// Either kind of density.
#[derive(Debug, Clone)]
pub enum Density {
    Univariate(Density1D),
    Multivariate(DensityND),
}

impl Density {
    pub fn dimension(&self) -> usize {
        match self {
            Density::Univariate(_) => 1,
            Density::Multivariate(d) => d.dimension(),
        }
    }

    pub fn declared_gamma(&self) -> Option<GammaClass> {
        match self {
            Density::Univariate(d) => d.declared_gamma(),
            Density::Multivariate(d) => d.declared_gamma(),
        }
    }

    /// One-dimensional factors: the density itself in 1-D, marginals of products otherwise.
    pub fn marginals(&self) -> Option<Vec<Density1D>> {
        match self {
            Density::Univariate(d) => Some(vec![d.clone()]),
            Density::Multivariate(d) => d.marginals(),
        }
    }

    pub fn is_unconditional(&self) -> bool {
        match self {
            Density::Univariate(d) => d.is_even(),
            Density::Multivariate(d) => d.is_unconditional(),
        }
    }

    pub(crate) fn value_or_zero(&self, x: &[f64]) -> f64 {
        match self {
            Density::Univariate(d) => d.value_or_zero(x[0]),
            Density::Multivariate(d) => d.value_or_zero(x),
        }
    }
}

impl From<Density1D> for Density {
    fn from(d: Density1D) -> Self {
        Density::Univariate(d)
    }
}

impl From<DensityND> for Density {
    fn from(d: DensityND) -> Self {
        Density::Multivariate(d)
    }
}

impl PointDensity for Density {
    fn dimension(&self) -> usize {
        Density::dimension(self)
    }

    fn density_at(&self, x: &[f64]) -> Result<f64> {
        match self {
            Density::Univariate(d) => d.density_at(x),
            Density::Multivariate(d) => d.density_at(x),
        }
    }
}

/// Borell correspondence: the measure concavity `s` matching a density of
/// class `gamma` in dimension `n`, i.e. the inverse of `gamma = s / (1 - s n)`.
pub fn borell_gamma_to_s(gamma: f64, n: usize) -> Result<f64> {
    if n == 0 || gamma.is_nan() {
        return Err(Error::domain("need n >= 1 and a non-NaN gamma"));
    }
    let nf = n as f64;
    if gamma < -1.0 / nf {
        return Err(Error::SubConvexOnly {
            gamma,
            dimension: n,
        });
    }
    if gamma == f64::INFINITY {
        return Ok(1.0 / nf);
    }
    let denom = 1.0 + nf * gamma;
    if denom <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(gamma / denom)
}

/// `gamma = s / (1 - s n)` for `s <= 1/n`.
pub fn borell_s_to_gamma(s: f64, n: usize) -> Result<f64> {
    if n == 0 || s.is_nan() {
        return Err(Error::domain("need n >= 1 and a non-NaN s"));
    }
    let nf = n as f64;
    if s > 1.0 / nf {
        return Err(Error::domain(format!("s = {s} exceeds 1/n = {}", 1.0 / nf)));
    }
    if s == f64::NEG_INFINITY {
        return Ok(-1.0 / nf);
    }
    let denom = 1.0 - s * nf;
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(s / denom)
}

const UNIMODAL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalCheck {
    pub unimodal: bool,
    /// First grid point breaking monotonicity.
    pub violation: Option<f64>,
}

/// Samples `d` on `grid` and confirms it rises up to the mode and falls after.
///
/// Without a declared mode the sample maximizer is used; a maximizer sitting on
/// the right end of a strictly increasing tail counts as "no interior mode".
pub fn check_unimodal(d: &Density1D, grid: &[f64]) -> Result<UnimodalCheck> {
    if grid.len() < 3 {
        return Err(Error::domain("unimodality check needs at least 3 grid points"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let values = grid
        .iter()
        .map(|x| d.eval(*x))
        .collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    let mode = match d.mode() {
        Some(m) => m,
        None => {
            let imax = values
                .iter()
                .enumerate()
                .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
            if imax == n - 1 && values[n - 1] > values[n - 2] + UNIMODAL_SLACK {
                return Ok(UnimodalCheck {
                    unimodal: false,
                    violation: Some(grid[n - 1]),
                });
            }
            grid[imax]
        }
    };
    for i in 0..n - 1 {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let ok = if x1 <= mode {
            values[i + 1] >= values[i] - UNIMODAL_SLACK
        } else if x0 >= mode {
            values[i + 1] <= values[i] + UNIMODAL_SLACK
        } else {
            true
        };
        if !ok {
            return Ok(UnimodalCheck {
                unimodal: false,
                violation: Some(x1),
            });
        }
    }
    Ok(UnimodalCheck {
        unimodal: true,
        violation: None,
    })
}

/// Checks that `t -> phi(t) + phi(-t)` is non-increasing on the nonnegative
/// sorted grid `ts`. Returns the first offending `t`, if any.
pub fn check_symmetrized_monotone(d: &Density1D, ts: &[f64]) -> Option<f64> {
    let sym = |t: f64| d.value_or_zero(t) + d.value_or_zero(-t);
    ts.windows(2)
        .find(|w| sym(w[1]) > sym(w[0]) + UNIMODAL_SLACK)
        .map(|w| w[1])
}

/// Relative slack of the sampled concavity check.
pub const GAMMA_CHECK_REL_TOL: f64 = 1e-9;

/// A sample `(x, y, lambda)` for the pointwise concavity check.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTriple {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

/// Verifies `f((1-l)x + l y) >= M_gamma(f(x), f(y); l)` on every triple with
/// `f(x) f(y) > 0`. Triples with a zero endpoint value are skipped.
pub fn check_gamma_concavity<D: PointDensity + ?Sized>(
    d: &D,
    gamma: f64,
    samples: &[PointTriple],
) -> Result<ConcavityReport> {
    let mut trace = Vec::with_capacity(samples.len());
    for s in samples {
        if !(0.0..=1.0).contains(&s.lambda) {
            return Err(Error::domain(format!("lambda = {} outside [0, 1]", s.lambda)));
        }
        let fx = d.density_at(&s.x)?;
        let fy = d.density_at(&s.y)?;
        if !(fx * fy > 0.0) {
            continue;
        }
        let z: Vec<f64> = s
            .x
            .iter()
            .zip(&s.y)
            .map(|(a, b)| (1.0 - s.lambda) * a + s.lambda * b)
            .collect();
        let fz = d.density_at(&z)?;
        let mean = s_mean(fx, fy, gamma, s.lambda);
        let mut witness = Witness::lambda(s.lambda);
        for (i, (a, b)) in s.x.iter().zip(&s.y).enumerate() {
            witness = witness.with(&format!("x{i}"), *a).with(&format!("y{i}"), *b);
        }
        trace.push(DeficitSample {
            witness,
            lhs: fz,
            rhs: mean,
            deficit: fz - mean,
            tolerance: GAMMA_CHECK_REL_TOL * fz.max(mean),
        });
    }
    if trace.is_empty() {
        return Ok(ConcavityReport::vacuous(
            "no sample triple with f(x) f(y) > 0",
        ));
    }
    Ok(ConcavityReport::from_samples(trace))
}

/// JSON descriptor of a density, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityDescriptor {
    Gaussian {
        sigma: f64,
    },
    TwoSidedExponential {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default)]
        normalize: bool,
    },
    PowerPlus {
        gamma: f64,
    },
    Uniform {
        interval: [f64; 2],
    },
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
    },
    Lebesgue {
        #[serde(default = "one_usize")]
        dimension: usize,
    },
    Product {
        factors: Vec<DensityDescriptor>,
    },
    GaussianStandard {
        dimension: usize,
    },
    ExponentialProduct {
        dimension: usize,
        #[serde(default)]
        normalize: bool,
    },
    InverseQuadratic,
    ShiftedGaussian {
        center: [f64; 2],
    },
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl DensityDescriptor {
    pub fn build(&self) -> Result<Density> {
        use DensityDescriptor as D;
        Ok(match self {
            D::Product { factors } => {
                let f = factors
                    .iter()
                    .map(|d| d.build_1d())
                    .collect::<Result<Vec<_>>>()?;
                DensityND::product(f)?.into()
            }
            D::GaussianStandard { dimension } => DensityND::gaussian_standard(*dimension)?.into(),
            D::ExponentialProduct {
                dimension,
                normalize,
            } => DensityND::exponential_product(*dimension, *normalize)?.into(),
            D::Lebesgue { dimension } if *dimension != 1 => {
                DensityND::lebesgue(*dimension)?.into()
            }
            D::InverseQuadratic => DensityND::custom_2d(Custom2d::inverse_quadratic()).into(),
            D::ShiftedGaussian { center } => {
                DensityND::custom_2d(Custom2d::shifted_gaussian(*center)).into()
            }
            _ => self.build_1d()?.into(),
        })
    }

    pub fn build_1d(&self) -> Result<Density1D> {
        use DensityDescriptor as D;
        match self {
            D::Gaussian { sigma } => Density1D::gaussian(*sigma),
            D::TwoSidedExponential { rate, normalize } => {
                if *normalize {
                    Density1D::normalized_exponential(*rate)
                } else {
                    Density1D::two_sided_exponential(*rate)
                }
            }
            D::PowerPlus { gamma } => Density1D::power_plus(*gamma),
            D::Uniform { interval } => Density1D::uniform(interval[0], interval[1]),
            D::Tabulated { grid, values } => Density1D::tabulated(grid.clone(), values.clone()),
            D::Lebesgue { dimension: 1 } => Ok(Density1D::lebesgue()),
            other => Err(Error::domain(format!(
                "{other:?} is not a one-dimensional density"
            ))),
        }
    }
}
