//! Parallel volume curves `t -> μ(A + tB)` and the Steiner formula.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concavity::check_curve_power_concavity;
use crate::error::{Error, Result};
use crate::quadrature::MeasureEvaluator;
use crate::report::{ConcavityReport, Tolerance};
use crate::sets::{ConvexPolygon, SetRep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelCurve {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// Error of each value, from the quadrature policy.
    pub value_tol: Tolerance,
    pub measure_id: String,
    pub a_id: String,
    pub b_id: String,
}

impl ParallelCurve {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// Whether the values never decrease beyond their tolerance.
    pub fn is_nondecreasing(&self) -> bool {
        self.values
            .windows(2)
            .all(|w| w[1] >= w[0] - self.value_tol.threshold(w[0]) - self.value_tol.threshold(w[1]))
    }

    /// Running minimum of the three-point deficits of `report`, per grid
    /// point. Points before the first complete triple carry 0.
    pub fn cumulative_deficits(&self, report: &ConcavityReport) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut run = 0.0f64;
        for i in 0..self.len() {
            // the triple centred on point i is trace entry i - 1
            if i >= 1 {
                if let Some(s) = report.trace.get(i - 1) {
                    run = run.min(s.deficit);
                }
            }
            out.push(run);
        }
        out
    }
}

/// Evaluates `μ(A + tB)` on the grid with exact Minkowski sums.
pub fn parallel_curve(ev: &MeasureEvaluator, a: &SetRep, b: &SetRep, ts: &[f64]) -> Result<ParallelCurve> {
    if !b.is_convex() {
        return Err(Error::domain("B must be convex"));
    }
    if ts.is_empty() {
        return Err(Error::domain("empty t grid"));
    }
    if ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("t grid must be nonnegative and strictly increasing"));
    }
    let values = ts
        .par_iter()
        .map(|t| {
            let set = if *t == 0.0 { a.clone() } else { a.linear_combination(1.0, b, *t)? };
            ev.measure(&set).map_err(|e| e.at("t", *t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParallelCurve {
        ts: ts.to_vec(),
        values,
        value_tol: Tolerance::new(ev.policy().abs_tol, ev.policy().rel_tol),
        measure_id: String::new(),
        a_id: String::new(),
        b_id: String::new(),
    })
}

/// `s`-concavity of the curve by three-point tests.
pub fn check_parallel_concavity(curve: &ParallelCurve, s: f64) -> Result<ConcavityReport> {
    check_curve_power_concavity(&curve.ts, &curve.values, s, curve.value_tol)
}

/// Area of `P + t B_2`: `area + perimeter t + π t^2`.
pub fn steiner_area(p: &ConvexPolygon, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t = {t} must be nonnegative")));
    }
    Ok(p.area() + p.perimeter() * t + PI * t * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Density1D, DensityND};
    use crate::sets::{IntervalUnion, ProductSet};

    #[test]
    fn steiner_values() {
        let sq = ConvexPolygon::unit_square();
        assert_eq!(steiner_area(&sq, 0.0).unwrap(), 1.0);
        assert!((steiner_area(&sq, 1.0).unwrap() - (5.0 + PI)).abs() < 1e-14);
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let v = 0.5 + (2.0 + 2f64.sqrt()) * 0.5 + PI * 0.25;
        assert!((steiner_area(&tri, 0.5).unwrap() - v).abs() < 1e-14);
    }

    #[test]
    fn square_plus_disk() {
        let ev = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let a: SetRep = ConvexPolygon::unit_square().into();
        let b: SetRep = ConvexPolygon::disk(64).into();
        let c = parallel_curve(&ev, &a, &b, &[0.0, 1.0]).unwrap();
        assert_eq!(c.values[0], 1.0);
        assert!((c.values[1] / (5.0 + PI) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn exponential_boxes_closed_form() {
        let ev = MeasureEvaluator::with_default_policy(DensityND::exponential_product(2, true).unwrap());
        let a: SetRep = ProductSet::boxed(&[(0.0, 1.0), (0.0, 1.0)]).unwrap().into();
        let c = parallel_curve(&ev, &a, &a, &[0.0, 0.5, 1.0]).unwrap();
        for (t, v) in c.ts.iter().zip(&c.values) {
            let exact = (0.5 * (1.0 - (-(1.0 + t)).exp())).powi(2);
            assert!((v - exact).abs() < 1e-10);
        }
        assert!(c.is_nondecreasing());
    }

    #[test]
    fn nonconvex_one_dimensional_failure() {
        // the inner ends of A travel toward the Gaussian mode, so the curve
        // accelerates until the gap closes at t = 4
        let ev = MeasureEvaluator::with_default_policy(Density1D::gaussian(1.0).unwrap());
        let a: SetRep = IntervalUnion::new([(-5.0, -4.0), (4.0, 5.0)]).unwrap().into();
        let b: SetRep = IntervalUnion::interval(-1.0, 1.0).unwrap().into();
        let ts: Vec<f64> = (0..=24).map(|i| 0.25 * i as f64).collect();
        let c = parallel_curve(&ev, &a, &b, &ts).unwrap();
        let r = check_parallel_concavity(&c, 1.0).unwrap();
        assert!(r.is_violation());
        let cum = c.cumulative_deficits(&r);
        assert_eq!(cum.len(), ts.len());
        assert!(cum.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*cum.last().unwrap(), r.min_deficit().min(0.0));
    }

    #[test]
    fn affine_curve() {
        let ts = [0.0, 1.0, 2.0, 3.0];
        let c = ParallelCurve {
            ts: ts.to_vec(),
            values: ts.iter().map(|t| 2.0 * t + 1.0).collect(),
            value_tol: Tolerance::exact(),
            measure_id: String::new(),
            a_id: String::new(),
            b_id: String::new(),
        };
        let r = check_parallel_concavity(&c, 1.0).unwrap();
        assert!(r.passed() && r.worst_deficit == 0.0);
    }
}
