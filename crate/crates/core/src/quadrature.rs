//! Measures of sets: adaptive Simpson quadrature split at density kinks,
//! iterated integrals over convex polygons, sections and maximal sections.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Density, Density1D, Kind1D};
use crate::sets::{Axis, ConvexPolygon, DirectionUnit, IntervalUnion, ProductSet, SetRep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraturePolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    pub section_grid: usize,
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        QuadraturePolicy {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 40,
            section_grid: 512,
        }
    }
}

impl QuadraturePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_depth < 10 {
            return Err(Error::domain("max-depth must be at least 10"));
        }
        if self.section_grid < 3 {
            return Err(Error::domain("section-grid needs at least 3 points"));
        }
        Ok(())
    }

    /// Tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadraturePolicy {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            ..*self
        }
    }

    /// Slack for comparing two measured quantities of size `scale`.
    pub fn slack(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale.abs()
    }
}

/// Value and estimated error of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const EVALUATION_BUDGET: usize = 20_000_000;

struct Simpson<'a, F> {
    f: &'a F,
    max_depth: u32,
    evaluations: usize,
    error: f64,
    unconverged: f64,
}

impl<F: Fn(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, a: f64, fa: f64, m: f64, fm: f64, b: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> Result<f64> {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        self.evaluations += 2;
        if self.evaluations > EVALUATION_BUDGET {
            return Err(Error::QuadratureFailed {
                lo: a,
                hi: b,
                estimate: whole,
                error: f64::INFINITY,
            });
        }
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * eps || !(lm > a && rm < b) {
            self.error += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        if depth >= self.max_depth {
            self.unconverged += delta.abs() / 15.0;
            return Ok(left + right + delta / 15.0);
        }
        Ok(self.step(a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1)?
            + self.step(m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1)?)
    }
}

/// Adaptive Simpson with Richardson correction on one smooth panel.
///
/// Fails if the evaluation budget runs out or if the error left on panels
/// that hit `max_depth` exceeds the requested tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("quadrature limits must be finite: [{a}, {b}]")));
    }
    if a >= b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    // coarse composite rule to set the relative target
    let n = 8;
    let h = (b - a) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + h * i as f64 }).collect();
    let fs: Vec<f64> = xs.iter().map(|x| f(*x)).collect();
    let coarse: f64 = (0..n / 2)
        .map(|i| (xs[2 * i + 2] - xs[2 * i]) / 6.0 * (fs[2 * i] + 4.0 * fs[2 * i + 1] + fs[2 * i + 2]))
        .sum();
    let tol = abs_tol.max(rel_tol * coarse.abs());
    let mut s = Simpson {
        f,
        max_depth,
        evaluations: n + 1,
        error: 0.0,
        unconverged: 0.0,
    };
    let mut value = 0.0;
    for i in 0..n / 2 {
        let (a0, m0, b0) = (xs[2 * i], xs[2 * i + 1], xs[2 * i + 2]);
        let (fa, fm, fb) = (fs[2 * i], fs[2 * i + 1], fs[2 * i + 2]);
        let whole = (b0 - a0) / 6.0 * (fa + 4.0 * fm + fb);
        value += s.step(a0, fa, m0, fm, b0, fb, whole, tol / (n / 2) as f64, 1)?;
    }
    if s.unconverged > tol {
        return Err(Error::QuadratureFailed {
            lo: a,
            hi: b,
            estimate: value,
            error: s.unconverged,
        });
    }
    Ok(Quadrature {
        value,
        error: s.error + s.unconverged,
        evaluations: s.evaluations,
    })
}

/// Integrates over `[a, b]` split at the given breakpoints.
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Quadrature> {
    let mut cuts: Vec<f64> = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|p| *p > a && *p < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);
    let panels = (cuts.len() - 1) as f64;
    let mut total = Quadrature {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in cuts.windows(2) {
        let q = adaptive_simpson(f, w[0], w[1], abs_tol / panels, rel_tol, max_depth)?;
        total.value += q.value;
        total.error += q.error;
        total.evaluations += q.evaluations;
    }
    Ok(total)
}

/// Exact mass of `[a, b]` when the density has an elementary antiderivative.
pub fn mass_closed_form(d: &Density1D, a: f64, b: f64) -> Option<f64> {
    if a >= b {
        return Some(0.0);
    }
    match d.kind() {
        Kind1D::Gaussian { sigma } => {
            let k = 1.0 / (sigma * std::f64::consts::SQRT_2);
            let (za, zb) = (a * k, b * k);
            // erfc keeps tail masses accurate
            Some(if za >= 0.0 {
                0.5 * (libm::erfc(za) - libm::erfc(zb))
            } else if zb <= 0.0 {
                0.5 * (libm::erfc(-zb) - libm::erfc(-za))
            } else {
                0.5 * (libm::erf(zb) - libm::erf(za))
            })
        }
        Kind1D::TwoSidedExponential { rate, normalized } => {
            let g = |x: f64| x.signum() * -(-rate * x.abs()).exp_m1() / rate;
            let m = if a >= 0.0 {
                ((-rate * a).exp() - (-rate * b).exp()) / rate
            } else if b <= 0.0 {
                ((rate * b).exp() - (rate * a).exp()) / rate
            } else {
                g(b) - g(a)
            };
            Some(if *normalized { 0.5 * rate * m } else { m })
        }
        Kind1D::PowerPlus { gamma } => {
            let q = 1.0 + 1.0 / gamma;
            let (lo, hi) = (a.max(0.0), b.max(0.0));
            Some((hi.powf(q) - lo.powf(q)) / q)
        }
        Kind1D::Uniform { lo, hi } => Some((b.min(*hi) - a.max(*lo)).max(0.0)),
        Kind1D::Lebesgue => Some(b - a),
        Kind1D::Tabulated { grid, values } => {
            let mut m = 0.0;
            for i in 0..grid.len() - 1 {
                let (g0, g1) = (grid[i], grid[i + 1]);
                let (lo, hi) = (a.max(g0), b.min(g1));
                if lo < hi {
                    let v = |x: f64| values[i] + (values[i + 1] - values[i]) * (x - g0) / (g1 - g0);
                    m += 0.5 * (hi - lo) * (v(lo) + v(hi));
                }
            }
            Some(m)
        }
    }
}

/// A density paired with a quadrature policy.
#[derive(Debug, Clone)]
pub struct MeasureEvaluator {
    density: Density,
    policy: QuadraturePolicy,
    marginals: Option<Vec<Density1D>>,
}

impl MeasureEvaluator {
    pub fn new(density: impl Into<Density>, policy: QuadraturePolicy) -> Result<Self> {
        policy.validate()?;
        let density = density.into();
        let marginals = density.marginals();
        Ok(MeasureEvaluator {
            density,
            policy,
            marginals,
        })
    }

    pub fn with_default_policy(density: impl Into<Density>) -> Self {
        Self::new(density, QuadraturePolicy::default()).expect("default policy is valid")
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn policy(&self) -> &QuadraturePolicy {
        &self.policy
    }

    pub fn dimension(&self) -> usize {
        self.density.dimension()
    }

    pub fn with_policy(&self, policy: QuadraturePolicy) -> Result<Self> {
        policy.validate()?;
        Ok(MeasureEvaluator {
            policy,
            ..self.clone()
        })
    }

    fn cutoff(&self) -> f64 {
        self.policy.abs_tol * 1e-3
    }

    fn marginal(&self, i: usize) -> Option<&Density1D> {
        self.marginals.as_ref().and_then(|m| m.get(i))
    }

    /// Mass of a bounded interval under a 1-D density, by quadrature.
    fn interval_mass(&self, d: &Density1D, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
        let (lo, hi) = d.effective_support(self.cutoff());
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            return Ok(0.0);
        }
        let f = |x: f64| d.value_or_zero(x);
        Ok(integrate_split(
            &f,
            a,
            b,
            &d.breakpoints(),
            abs_tol,
            self.policy.rel_tol,
            self.policy.max_depth,
        )?
        .value)
    }

    fn union_mass(&self, d: &Density1D, a: &IntervalUnion) -> Result<f64> {
        if a.is_full_line() {
            return d.total_mass().ok_or_else(|| {
                Error::InfiniteMeasure(format!("{:?} has infinite total mass", d.kind()))
            });
        }
        let k = a.intervals().len().max(1) as f64;
        a.intervals()
            .iter()
            .map(|&(lo, hi)| self.interval_mass(d, lo, hi, self.policy.abs_tol / k))
            .sum()
    }

    pub fn measure_1d(&self, a: &IntervalUnion) -> Result<f64> {
        if self.dimension() != 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: 1,
            });
        }
        let d = self.marginal(0).expect("1-D densities are their own marginal");
        self.union_mass(d, a)
    }

    pub fn measure_product(&self, a: &ProductSet) -> Result<f64> {
        if a.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: a.dimension(),
            });
        }
        if a.is_empty() {
            return Ok(0.0);
        }
        match &self.marginals {
            Some(m) => {
                let mut v = 1.0;
                for (d, f) in m.iter().zip(a.factors()) {
                    v *= self.union_mass(d, f)?;
                }
                Ok(v)
            }
            None => {
                let bounds: Option<Vec<(f64, f64)>> = a.factors().iter().map(|f| f.as_single()).collect();
                match bounds.as_deref() {
                    Some([(x0, x1), (y0, y1)]) => {
                        if x0 == x1 || y0 == y1 {
                            Ok(0.0)
                        } else {
                            self.measure_polygon(&ConvexPolygon::rectangle(*x0, *x1, *y0, *y1)?)
                        }
                    }
                    _ => Err(Error::Unsupported(
                        "non-separable density on a non-box product set".into(),
                    )),
                }
            }
        }
    }

    /// Bounded window outside of which the density is negligible, per axis.
    fn window(&self, axis: usize) -> (f64, f64) {
        match self.marginal(axis) {
            Some(d) => d.effective_support(self.cutoff()),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Integral of the density along the vertical line at `x` for `y` in `[lo, hi]`.
    fn vertical_mass(&self, x: f64, lo: f64, hi: f64, abs_tol: f64) -> Result<f64> {
        if let Some(m) = &self.marginals {
            let fx = m[0].value_or_zero(x);
            if fx == 0.0 {
                return Ok(0.0);
            }
            if let Some(v) = mass_closed_form(&m[1], lo, hi) {
                return Ok(fx * v);
            }
            return Ok(fx * self.interval_mass(&m[1], lo, hi, abs_tol / fx.max(1e-300))?);
        }
        let Density::Multivariate(d) = &self.density else {
            unreachable!("2-D densities are multivariate")
        };
        let f = |y: f64| d.value2(x, y);
        Ok(integrate_split(
            &f,
            lo,
            hi,
            &d.breakpoints_along(1),
            abs_tol,
            self.policy.rel_tol * 0.1,
            self.policy.max_depth,
        )?
        .value)
    }

    fn require_2d(&self) -> Result<()> {
        if self.dimension() != 2 {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: 2,
            });
        }
        Ok(())
    }

    /// Iterated integral: outer in `x`, inner over the vertical chord.
    pub fn measure_polygon(&self, p: &ConvexPolygon) -> Result<f64> {
        self.require_2d()?;
        let (mut x0, mut x1) = p.project_axis(Axis::X);
        let (wx0, wx1) = self.window(0);
        let (wy0, wy1) = self.window(1);
        x0 = x0.max(wx0);
        x1 = x1.min(wx1);
        if x0 >= x1 {
            return Ok(0.0);
        }
        let inner_tol = 0.1 * self.policy.abs_tol / (x1 - x0).max(1.0);
        let failure = std::cell::Cell::new(None);
        let g = |x: f64| match p.chord(DirectionUnit::E1, x) {
            Some((lo, hi)) => {
                let (lo, hi) = (lo.max(wy0), hi.min(wy1));
                if lo >= hi {
                    return 0.0;
                }
                match self.vertical_mass(x, lo, hi, inner_tol) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.set(Some(e));
                        0.0
                    }
                }
            }
            None => 0.0,
        };
        let mut breaks: Vec<f64> = p.vertices().iter().map(|v| v[0]).collect();
        match &self.density {
            Density::Multivariate(d) => breaks.extend(d.breakpoints_along(0)),
            Density::Univariate(_) => {}
        }
        let q = integrate_split(
            &g,
            x0,
            x1,
            &breaks,
            self.policy.abs_tol,
            self.policy.rel_tol,
            self.policy.max_depth,
        )?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(q.value)
    }

    pub fn measure(&self, a: &SetRep) -> Result<f64> {
        if a.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: a.dimension(),
            });
        }
        match a {
            SetRep::Intervals(i) => self.measure_1d(i),
            SetRep::Product(p) => self.measure_product(p),
            SetRep::Polygon(p) => self.measure_polygon(p),
            SetRep::Point(_) => Ok(0.0),
        }
    }

    /// Mass of the chord `P ∩ {x . u = t}` under the density restricted to that line.
    pub fn section_measure(&self, p: &ConvexPolygon, u: DirectionUnit, t: f64) -> Result<f64> {
        self.require_2d()?;
        let Some((s0, s1)) = p.chord(u, t) else {
            return Ok(0.0);
        };
        if u == DirectionUnit::E1 && self.marginals.is_some() {
            let (w0, w1) = self.window(1);
            let (lo, hi) = (s0.max(w0), s1.min(w1));
            if lo >= hi {
                return Ok(0.0);
            }
            return self.vertical_mass(t, lo, hi, self.policy.abs_tol);
        }
        let [u0, u1] = u.vector();
        let [w0, w1] = u.perp();
        let (mut lo, mut hi) = (s0, s1);
        if self.marginals.is_some() {
            // beyond radius sqrt(2) R some coordinate leaves the window
            let r = [self.window(0), self.window(1)]
                .iter()
                .map(|(a, b)| a.abs().max(b.abs()))
                .fold(0.0, f64::max)
                * std::f64::consts::SQRT_2;
            lo = lo.max(-r);
            hi = hi.min(r);
        }
        if lo >= hi {
            return Ok(0.0);
        }
        let Density::Multivariate(d) = &self.density else {
            unreachable!("2-D densities are multivariate")
        };
        let f = |s: f64| d.value2(t * u0 + s * w0, t * u1 + s * w1);
        let mut breaks = Vec::new();
        if w0 != 0.0 {
            breaks.extend(d.breakpoints_along(0).iter().map(|b| (b - t * u0) / w0));
        }
        if w1 != 0.0 {
            breaks.extend(d.breakpoints_along(1).iter().map(|b| (b - t * u1) / w1));
        }
        Ok(integrate_split(
            &f,
            lo,
            hi,
            &breaks,
            self.policy.abs_tol,
            self.policy.rel_tol,
            self.policy.max_depth,
        )?
        .value)
    }

    /// `sup_t` of the section measure: grid scan over the projection of `P`
    /// on `u`, then golden-section refinement around the best grid node.
    /// Ties go to the smallest `t`.
    pub fn max_section(&self, p: &ConvexPolygon, u: DirectionUnit) -> Result<(f64, f64)> {
        self.require_2d()?;
        let (lo, hi) = p.project_direction(u);
        let n = self.policy.section_grid;
        let ts: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        let vals = ts
            .par_iter()
            .map(|t| self.section_measure(p, u, *t))
            .collect::<Result<Vec<f64>>>()?;
        let tie = |a: f64, b: f64| a > b + 1e-12 * b.abs().max(1e-300);
        let mut best = 0;
        for i in 1..n {
            if tie(vals[i], vals[best]) {
                best = i;
            }
        }
        let (mut a, mut b) = (ts[best.saturating_sub(1)], ts[(best + 1).min(n - 1)]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let f = |t: f64| self.section_measure(p, u, t);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        for _ in 0..80 {
            if b - a <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d)?;
            }
        }
        let (tr, vr) = if fc >= fd { (c, fc) } else { (d, fd) };
        if tie(vr, vals[best]) {
            Ok((tr, vr))
        } else {
            Ok((ts[best], vals[best]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Custom2d, DensityND};

    const ERF_1: f64 = 0.682_689_492_137_085_9; // erf(1/sqrt 2)

    #[test]
    fn simpson_polynomials_and_budget() {
        let q = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12, 1e-12, 40).unwrap();
        assert!((q.value - 4.0).abs() < 1e-13);
        let q = adaptive_simpson(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-10, 1e-10, 40).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-9);
        let q = adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-10, 1e-10, 40).unwrap();
        assert_eq!(q.value, 0.0);
        // a jump cannot be resolved to 1e-14 at depth 10
        let r = adaptive_simpson(&|x: f64| if x < 0.3 { 0.0 } else { 1.0 }, 0.0, 1.0, 1e-14, 1e-14, 10);
        assert!(matches!(r, Err(Error::QuadratureFailed { .. })));
    }

    #[test]
    fn gaussian_interval() {
        let ev = MeasureEvaluator::with_default_policy(Density1D::gaussian(1.0).unwrap());
        let m = ev.measure_1d(&IntervalUnion::symmetric(1.0).unwrap()).unwrap();
        assert!((m - ERF_1).abs() < 1e-9);
        assert_eq!(ev.measure_1d(&IntervalUnion::empty()).unwrap(), 0.0);
        assert_eq!(ev.measure_1d(&IntervalUnion::full_line()).unwrap(), 1.0);
    }

    #[test]
    fn power_plus_interval() {
        let ev = MeasureEvaluator::with_default_policy(Density1D::power_plus(1.0).unwrap());
        let m = ev.measure_1d(&IntervalUnion::symmetric(1.0).unwrap()).unwrap();
        assert!((m - 0.5).abs() < 1e-12);
        assert!(matches!(
            ev.measure_1d(&IntervalUnion::full_line()),
            Err(Error::InfiniteMeasure(_))
        ));
    }

    #[test]
    fn exponential_boxes() {
        let ev = MeasureEvaluator::with_default_policy(DensityND::exponential_product(2, true).unwrap());
        let m = ev
            .measure_product(&ProductSet::boxed(&[(0.0, 1.0), (0.0, 1.0)]).unwrap())
            .unwrap();
        let exact = (0.5 * (1.0 - (-1.0f64).exp())).powi(2);
        assert!((m - exact).abs() < 1e-10);
        let m = ev
            .measure_product(&ProductSet::boxed(&[(-0.5, 0.5), (-0.5, 0.5)]).unwrap())
            .unwrap();
        assert!((m - (1.0 - (-0.5f64).exp()).powi(2)).abs() < 1e-10);
        let empty = ProductSet::new(vec![IntervalUnion::empty(), IntervalUnion::interval(0.0, 1.0).unwrap()]).unwrap();
        assert_eq!(ev.measure_product(&empty).unwrap(), 0.0);
    }

    #[test]
    fn polygons() {
        let leb = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        assert!((leb.measure_polygon(&ConvexPolygon::unit_square()).unwrap() - 1.0).abs() < 1e-14);
        let g = MeasureEvaluator::with_default_policy(DensityND::gaussian_standard(2).unwrap());
        let sq = ConvexPolygon::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert!((g.measure_polygon(&sq).unwrap() - ERF_1 * ERF_1).abs() < 1e-9);
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]]).unwrap();
        assert!((g.measure_polygon(&tri).unwrap() - 0.233_339_788_511_520_4).abs() < 1e-9);
    }

    #[test]
    fn closed_form_masses_match_quadrature() {
        let ds = [
            Density1D::gaussian(0.7).unwrap(),
            Density1D::two_sided_exponential(1.3).unwrap(),
            Density1D::normalized_exponential(0.4).unwrap(),
            Density1D::power_plus(0.6).unwrap(),
            Density1D::uniform(-0.2, 0.9).unwrap(),
            Density1D::tabulated(vec![-1.0, 0.0, 0.5, 2.0], vec![0.1, 1.0, 0.7, 0.0]).unwrap(),
        ];
        for d in ds {
            let ev = MeasureEvaluator::with_default_policy(d.clone());
            for (a, b) in [(-3.0, -0.5), (-0.4, 1.7), (0.2, 5.0)] {
                let q = ev.measure_1d(&IntervalUnion::interval(a, b).unwrap()).unwrap();
                let c = mass_closed_form(&d, a, b).unwrap();
                assert!((q - c).abs() < 1e-9, "{d:?} [{a},{b}] {q} {c}");
            }
        }
    }

    #[test]
    fn sections() {
        let leb = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let sq = ConvexPolygon::unit_square();
        assert!((leb.section_measure(&sq, DirectionUnit::E1, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(leb.section_measure(&sq, DirectionUnit::E1, 2.0).unwrap(), 0.0);
        let iq = MeasureEvaluator::with_default_policy(DensityND::custom_2d(Custom2d::inverse_quadratic()));
        let big = ConvexPolygon::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let v = iq.section_measure(&big, DirectionUnit::E1, 0.0).unwrap();
        assert!((v - 2.0 * 1f64.atan()).abs() < 1e-9);
    }

    #[test]
    fn maximal_sections() {
        let leb = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let (t, m) = leb.max_section(&ConvexPolygon::unit_square(), DirectionUnit::E1).unwrap();
        assert_eq!(t, 0.0);
        assert!((m - 1.0).abs() < 1e-14);
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let (t, m) = leb.max_section(&tri, DirectionUnit::E1).unwrap();
        assert!(t.abs() < 1e-12 && (m - 1.0).abs() < 1e-12);
        let g = MeasureEvaluator::with_default_policy(DensityND::gaussian_standard(2).unwrap());
        let sq = ConvexPolygon::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap();
        let (t, m) = g.max_section(&sq, DirectionUnit::E1).unwrap();
        assert!(t.abs() < 1e-6);
        assert!((m - 0.272_353_702_799_265).abs() < 1e-9);
    }

    #[test]
    fn rectangles_agree_with_products() {
        let g = MeasureEvaluator::with_default_policy(DensityND::exponential_product(2, false).unwrap());
        let b = ProductSet::boxed(&[(-0.3, 1.2), (0.4, 2.0)]).unwrap();
        let p = b.to_polygon().unwrap();
        let (x, y) = (g.measure_product(&b).unwrap(), g.measure_polygon(&p).unwrap());
        assert!((x - y).abs() <= 1e-8 * x);
    }
}
