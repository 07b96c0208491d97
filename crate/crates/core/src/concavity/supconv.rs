use super::s_mean;
use crate::error::{Error, Result};
use crate::report::{ConcavityReport, DeficitSample, Witness};
use crate::sets::{check_lambda, DirectionUnit};

/// Nonnegative samples on the uniform grid `x0 + i step`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    pub x0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

fn check_values(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!("grid value {v} is not a nonnegative real")));
    }
    Ok(())
}

impl GridFunction1D {
    pub fn new(x0: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && x0.is_finite()) {
            return Err(Error::domain("grid needs a finite origin and positive step"));
        }
        if values.len() < 2 {
            return Err(Error::domain("grid function needs at least 2 nodes"));
        }
        check_values(&values)?;
        Ok(GridFunction1D { x0, step, values })
    }

    pub fn from_fn(x0: f64, step: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(x0, step, (0..n).map(|i| f(x0 + step * i as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.step * i as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Trapezoidal integral.
    pub fn integral(&self) -> f64 {
        let v = &self.values;
        self.step * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.x0 - other.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// Smallest grid function `h` with `h((1-λ)x + λy) >= min(f(x), g(y))` for
/// all grid pairs, the combination rounded to the nearest node.
pub fn supconv_min(f: &GridFunction1D, g: &GridFunction1D, lambda: f64) -> Result<GridFunction1D> {
    check_lambda(lambda)?;
    if !f.same_grid(g) {
        return Err(Error::domain("supconv_min needs a common grid"));
    }
    let n = f.len();
    let mut h = vec![0.0; n];
    for (i, fi) in f.values.iter().enumerate() {
        if *fi == 0.0 {
            continue;
        }
        for (j, gj) in g.values.iter().enumerate() {
            if *gj == 0.0 {
                continue;
            }
            // (1-λ) x_i + λ x_j sits at fractional index (1-λ) i + λ j
            let k = ((1.0 - lambda) * i as f64 + lambda * j as f64).round() as usize;
            let v = fi.min(*gj);
            if v > h[k] {
                h[k] = v;
            }
        }
    }
    GridFunction1D::new(f.x0, f.step, h)
}

/// Integral inequality for the minimal sup-convolution of two grid functions
/// with equal maxima. Vacuous when the maxima differ by more than 1e-9.
pub fn check_henstock_macbeath(f: &GridFunction1D, g: &GridFunction1D, lambda: f64) -> Result<ConcavityReport> {
    let (mf, mg) = (f.max(), g.max());
    if (mf - mg).abs() > 1e-9 * mf.max(mg).max(1.0) {
        return Ok(ConcavityReport::vacuous(format!("max(f) = {mf} differs from max(g) = {mg}")));
    }
    let h = supconv_min(f, g, lambda)?;
    let lhs = h.integral();
    let rhs = (1.0 - lambda) * f.integral() + lambda * g.integral();
    let slack = f.step * (mf + mg) + 1e-12 * lhs.max(rhs);
    Ok(ConcavityReport::from_samples(vec![DeficitSample {
        witness: Witness::lambda(lambda),
        lhs,
        rhs,
        deficit: lhs - rhs,
        tolerance: slack,
    }]))
}

/// Largest grid accepted by the 2-D pairing (per axis).
pub const MAX_GRID_2D: usize = 64;

/// Nonnegative samples on `(x0 + i dx, y0 + j dy)`, stored row by row in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GridFunction2D {
    #[allow(clippy::too_many_arguments)]
    pub fn new(x0: f64, y0: f64, dx: f64, dy: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0 && dy > 0.0 && x0.is_finite() && y0.is_finite()) {
            return Err(Error::domain("grid needs a finite origin and positive steps"));
        }
        if nx < 2 || ny < 2 || values.len() != nx * ny {
            return Err(Error::domain("grid shape does not match the values"));
        }
        check_values(&values)?;
        Ok(GridFunction2D {
            x0,
            y0,
            dx,
            dy,
            nx,
            ny,
            values,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_fn(
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        nx: usize,
        ny: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut v = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                v.push(f(x0 + dx * i as f64, y0 + dy * j as f64));
            }
        }
        Self::new(x0, y0, dx, dy, nx, ny, v)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    fn trapezoid_weight(k: usize, n: usize) -> f64 {
        if k == 0 || k == n - 1 {
            0.5
        } else {
            1.0
        }
    }

    /// Tensor trapezoidal integral.
    pub fn integral(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.nx {
            let wi = Self::trapezoid_weight(i, self.nx);
            for j in 0..self.ny {
                s += wi * Self::trapezoid_weight(j, self.ny) * self.at(i, j);
            }
        }
        s * self.dx * self.dy
    }

    /// Largest section integral over lines orthogonal to a coordinate axis,
    /// sections taken at grid nodes.
    pub fn max_section(&self, u: DirectionUnit) -> Result<f64> {
        let along_x = if u == DirectionUnit::E1 {
            true
        } else if u == DirectionUnit::E2 {
            false
        } else {
            return Err(Error::Unsupported("grid sections only along e1 or e2".into()));
        };
        let (outer, inner) = if along_x { (self.nx, self.ny) } else { (self.ny, self.nx) };
        let step = if along_x { self.dy } else { self.dx };
        Ok((0..outer)
            .map(|a| {
                step * (0..inner)
                    .map(|b| {
                        let v = if along_x { self.at(a, b) } else { self.at(b, a) };
                        Self::trapezoid_weight(b, inner) * v
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }

    fn same_grid(&self, o: &Self) -> bool {
        self.nx == o.nx
            && self.ny == o.ny
            && (self.x0 - o.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
            && (self.y0 - o.y0).abs() <= 1e-12 * (1.0 + self.y0.abs())
            && (self.dx - o.dx).abs() <= 1e-12 * self.dx
            && (self.dy - o.dy).abs() <= 1e-12 * self.dy
    }
}

/// Smallest grid function `h` with `h((1-λ)x + λy) >= M_γ(f(x), g(y); λ)` over
/// all grid pairs with `f(x) g(y) > 0`, combinations rounded to the nearest node.
pub fn supconv_gamma_2d(f: &GridFunction2D, g: &GridFunction2D, lambda: f64, gamma: f64) -> Result<GridFunction2D> {
    check_lambda(lambda)?;
    if f.nx > MAX_GRID_2D || f.ny > MAX_GRID_2D || g.nx > MAX_GRID_2D || g.ny > MAX_GRID_2D {
        return Err(Error::Resource(format!(
            "2-D sup-convolution is limited to {MAX_GRID_2D}x{MAX_GRID_2D} grids"
        )));
    }
    if !f.same_grid(g) {
        return Err(Error::domain("supconv_gamma_2d needs a common grid"));
    }
    let (nx, ny) = (f.nx, f.ny);
    let fs: Vec<(usize, usize, f64)> = (0..nx)
        .flat_map(|i| (0..ny).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, f.at(i, j)))
        .filter(|t| t.2 > 0.0)
        .collect();
    let gs: Vec<(usize, usize, f64)> = (0..nx)
        .flat_map(|i| (0..ny).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, g.at(i, j)))
        .filter(|t| t.2 > 0.0)
        .collect();
    let mut h = vec![0.0; nx * ny];
    for &(i, j, a) in &fs {
        for &(k, l, b) in &gs {
            let p = ((1.0 - lambda) * i as f64 + lambda * k as f64).round() as usize;
            let q = ((1.0 - lambda) * j as f64 + lambda * l as f64).round() as usize;
            let v = s_mean(a, b, gamma, lambda);
            let cell = &mut h[p * ny + q];
            if v > *cell {
                *cell = v;
            }
        }
    }
    GridFunction2D::new(f.x0, f.y0, f.dx, f.dy, nx, ny, h)
}

/// Relative agreement required between `m_u(f)` and `m_u(g)`.
pub const SECTION_MATCH_TOL_2D: f64 = 1e-6;

/// Integral inequality for the minimal γ-sup-convolution of two grid
/// functions with equal maximal sections along `u` (`e1` or `e2`).
///
/// The pass threshold is the one-cell rounding slack `(max f + max g)(dx Ly + dy Lx)`,
/// `Lx`, `Ly` the grid extents. Vacuous when the maximal sections differ.
pub fn check_dancs_uhrin(
    f: &GridFunction2D,
    g: &GridFunction2D,
    u: DirectionUnit,
    lambda: f64,
    gamma: f64,
) -> Result<ConcavityReport> {
    if !(gamma >= -1.0) {
        return Err(Error::domain(format!("gamma = {gamma} is below -1/(n-1) = -1")));
    }
    let (mf, mg) = (f.max_section(u)?, g.max_section(u)?);
    if (mf - mg).abs() > SECTION_MATCH_TOL_2D * mf.max(mg) {
        return Ok(ConcavityReport::vacuous(format!(
            "maximal sections differ: {mf} vs {mg}"
        )));
    }
    let h = supconv_gamma_2d(f, g, lambda, gamma)?;
    let lhs = h.integral();
    let rhs = (1.0 - lambda) * f.integral() + lambda * g.integral();
    let (lx, ly) = (f.dx * (f.nx - 1) as f64, f.dy * (f.ny - 1) as f64);
    let slack = (f.max() + g.max()) * (f.dx * ly + f.dy * lx) + 1e-12 * lhs.max(rhs);
    Ok(ConcavityReport::from_samples(vec![DeficitSample {
        witness: Witness::lambda(lambda).with("gamma", gamma),
        lhs,
        rhs,
        deficit: lhs - rhs,
        tolerance: slack,
    }]))
}
