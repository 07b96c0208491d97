use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::s_mean;
use crate::error::{Error, Result};
use crate::measures::Density;
use crate::quadrature::MeasureEvaluator;
use crate::report::{ConcavityReport, DeficitSample, Tolerance, Witness};
use crate::sets::SetRep;

/// Three-point power-concavity test of a sampled curve `t -> F(t)`.
///
/// For finite `p` the test runs on `G = F^p` (`p > 0`), `log F` (`p = 0`) or
/// `-F^p` (`p < 0`): `G(t2) >= (1-λ) G(t1) + λ G(t3)` on each consecutive
/// triple, `λ = (t2 - t1) / (t3 - t1)`. For `p = ±inf` the comparison is made
/// on `F` against the max or min of the endpoints. `value_tol` is the error
/// of each `F` value; it is carried through `|G'(F)|` into the sample tolerance.
pub fn check_curve_power_concavity(
    ts: &[f64],
    fs: &[f64],
    p: f64,
    value_tol: Tolerance,
) -> Result<ConcavityReport> {
    if ts.len() != fs.len() {
        return Err(Error::DimensionMismatch {
            expected: ts.len(),
            found: fs.len(),
        });
    }
    if ts.len() < 3 {
        return Err(Error::domain("curve check needs at least 3 points"));
    }
    if ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("curve abscissae must be strictly increasing"));
    }
    if p.is_nan() {
        return Err(Error::domain("p must not be NaN"));
    }
    if let Some(f) = fs.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
        return Err(Error::domain(format!("curve value {f} is not a nonnegative real")));
    }
    if p.is_finite() && p <= 0.0 {
        if let Some(i) = fs.iter().position(|f| *f == 0.0) {
            return Err(Error::domain(format!(
                "power {p} needs positive values, F({}) = 0",
                ts[i]
            )));
        }
    }
    let g = |f: f64| -> f64 {
        if p == 0.0 {
            f.ln()
        } else if p > 0.0 {
            f.powf(p)
        } else {
            -f.powf(p)
        }
    };
    // |G'(F)| e_F
    let err = |f: f64| -> f64 {
        let e = value_tol.threshold(f);
        if p == 0.0 {
            e / f
        } else if f == 0.0 {
            if p >= 1.0 { p * e } else { e.powf(p) }
        } else {
            (p.abs() * f.powf(p - 1.0) * e).max((f + e).powf(p) - f.powf(p))
        }
    };
    let mut trace = Vec::with_capacity(ts.len() - 2);
    for i in 0..ts.len() - 2 {
        let (t1, t2, t3) = (ts[i], ts[i + 1], ts[i + 2]);
        let lambda = (t2 - t1) / (t3 - t1);
        let witness = Witness::t(t2).with("t1", t1).with("t3", t3);
        let (f1, f2, f3) = (fs[i], fs[i + 1], fs[i + 2]);
        let (lhs, rhs, tol) = if p.is_infinite() {
            let e = value_tol.threshold(f2) + value_tol.threshold(f1.max(f3));
            (f2, s_mean(f1, f3, p, lambda), e)
        } else {
            let (g1, g2, g3) = (g(f1), g(f2), g(f3));
            let interp = (1.0 - lambda) * g1 + lambda * g3;
            let rounding = 4.0 * f64::EPSILON * (g2.abs() + g1.abs() + g3.abs());
            let e = err(f2) + (1.0 - lambda) * err(f1) + lambda * err(f3) + rounding;
            (g2, interp, e)
        };
        trace.push(DeficitSample {
            witness,
            lhs,
            rhs,
            deficit: lhs - rhs,
            tolerance: tol,
        });
    }
    Ok(ConcavityReport::from_samples(trace))
}

fn positive_grid(ts: &[f64]) -> Result<()> {
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("dilation grid must lie in (0, inf), got {t}")));
    }
    Ok(())
}

fn value_tol(ev: &MeasureEvaluator) -> Tolerance {
    Tolerance::new(ev.policy().abs_tol, ev.policy().rel_tol)
}

fn dilate_curve(ev: &MeasureEvaluator, a: &SetRep, factors: &[f64]) -> Result<Vec<f64>> {
    factors
        .par_iter()
        .map(|k| ev.measure(&a.dilate(*k)?).map_err(|e| e.at("t", *k)))
        .collect()
}

/// `t -> μ(tA)` is `p`-concave on the grid. Vacuous unless `0 ∈ A`.
pub fn scan_dilates(ev: &MeasureEvaluator, a: &SetRep, ts: &[f64], p: f64) -> Result<ConcavityReport> {
    positive_grid(ts)?;
    if !a.contains_origin() {
        return Ok(ConcavityReport::vacuous("A does not contain 0"));
    }
    let fs = dilate_curve(ev, a, ts)?;
    check_curve_power_concavity(ts, &fs, p, value_tol(ev))
}

/// `t -> μ(e^t A)` is log-concave on the grid. Vacuous unless `0 ∈ A`.
pub fn check_b_property(ev: &MeasureEvaluator, a: &SetRep, ts: &[f64]) -> Result<ConcavityReport> {
    if !a.contains_origin() {
        return Ok(ConcavityReport::vacuous("A does not contain 0"));
    }
    let factors: Vec<f64> = ts.iter().map(|t| t.exp()).collect();
    positive_grid(&factors)?;
    let fs = dilate_curve(ev, a, &factors)?;
    check_curve_power_concavity(ts, &fs, 0.0, value_tol(ev))
}

/// `t -> φ(t x)` is non-increasing along every ray `x`, for `t` on the sorted grid.
pub fn check_radial_monotone(d: &Density, rays: &[Vec<f64>], ts: &[f64]) -> bool {
    rays.iter().all(|x| {
        let vals: Vec<f64> = ts
            .iter()
            .map(|t| {
                let p: Vec<f64> = x.iter().map(|v| t * v).collect();
                d.value_or_zero(&p)
            })
            .collect();
        vals.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0]))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivOutcome {
    /// Both hypotheses and the conclusion hold.
    ImplicationConfirmed,
    /// Dilate concavity holds although the log-concavity hypothesis fails.
    ConverseNotImplied,
    /// Hypotheses hold but the conclusion fails: a tolerance audit is needed.
    NumericalContradiction,
    /// The radial hypothesis fails, or a step was vacuous, or both the
    /// hypothesis and the conclusion fail: nothing is asserted.
    HypothesisNotMet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivReport {
    pub radial_monotone: bool,
    pub b_property: ConcavityReport,
    pub dilates: ConcavityReport,
    pub outcome: EquivOutcome,
}

/// Grids used by [`prop_equiv_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquivGrids {
    pub rays: Vec<Vec<f64>>,
    pub radial_ts: Vec<f64>,
    pub log_ts: Vec<f64>,
    pub dilate_ts: Vec<f64>,
}

impl EquivGrids {
    /// 100 seeded random directions (both signs in 1-D), radial samples on
    /// `[0, 5]`, 33 log-scale points on `[-2, 2]` and 23 dilates on `[0.25, 3]`.
    pub fn standard(dimension: usize) -> Self {
        let rays = if dimension == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
            (0..100)
                .map(|_| loop {
                    let v: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n > 1e-3 && n <= 1.0 {
                        break v.iter().map(|x| x / n).collect();
                    }
                })
                .collect()
        };
        EquivGrids {
            rays,
            radial_ts: (0..=100).map(|i| 0.05 * i as f64).collect(),
            log_ts: (0..33).map(|i| -2.0 + 0.125 * i as f64).collect(),
            dilate_ts: (0..23).map(|i| 0.25 + 0.125 * i as f64).collect(),
        }
    }
}

/// Radial monotonicity and the log-concavity of `t -> μ(e^t A)` imply
/// `1/n`-concavity of `t -> μ(tA)`. Runs all three and classifies the instance.
pub fn prop_equiv_pipeline(ev: &MeasureEvaluator, a: &SetRep, grids: &EquivGrids) -> Result<EquivReport> {
    let n = ev.dimension();
    let radial = check_radial_monotone(ev.density(), &grids.rays, &grids.radial_ts);
    let b = check_b_property(ev, a, &grids.log_ts)?;
    let d = scan_dilates(ev, a, &grids.dilate_ts, 1.0 / n as f64)?;
    let outcome = if !radial || b.is_vacuous() || d.is_vacuous() {
        EquivOutcome::HypothesisNotMet
    } else {
        match (b.passed(), d.passed()) {
            (true, true) => EquivOutcome::ImplicationConfirmed,
            (true, false) => EquivOutcome::NumericalContradiction,
            (false, true) => EquivOutcome::ConverseNotImplied,
            (false, false) => EquivOutcome::HypothesisNotMet,
        }
    };
    Ok(EquivReport {
        radial_monotone: radial,
        b_property: b,
        dilates: d,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Custom2d, Density1D, DensityND};
    use crate::report::Verdict;
    use crate::sets::{ConvexPolygon, IntervalUnion};

    const ERF: [f64; 3] = [0.682_689_492_137_085_9, 0.954_499_736_103_641_6, 0.997_300_203_936_739_8];

    #[test]
    fn affine_power() {
        let ts: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let r = check_curve_power_concavity(&ts, &fs, 0.5, Tolerance::exact()).unwrap();
        assert!(r.passed());
        assert!(r.worst_deficit.abs() < 1e-15);
    }

    #[test]
    fn erf_spot_value() {
        let r = check_curve_power_concavity(&[1.0, 2.0, 3.0], &ERF, 1.0, Tolerance::exact()).unwrap();
        assert!(r.passed());
        assert!((r.trace[0].rhs - 0.839_994_848_036_912_8).abs() < 1e-15);
        assert_eq!(r.trace[0].lhs, ERF[1]);
    }

    #[test]
    fn log_convex_fails_and_zero_is_error() {
        let ts: Vec<f64> = (0..=10).map(|i| 0.2 * i as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|t| (t * t).exp()).collect();
        let r = check_curve_power_concavity(&ts, &fs, 0.0, Tolerance::exact()).unwrap();
        assert_eq!(r.verdict, Verdict::Violation);
        assert!(check_curve_power_concavity(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], 0.0, Tolerance::exact()).is_err());
        assert!(check_curve_power_concavity(&[0.0, 1.0], &[1.0, 1.0], 1.0, Tolerance::exact()).is_err());
    }

    #[test]
    fn negative_and_infinite_powers() {
        let ts = [0.0, 1.0, 2.0, 3.0];
        let fs = [1.0, 2.0, 2.0, 0.5];
        // quasi-concave (unimodal) but not constant
        assert!(check_curve_power_concavity(&ts, &fs, f64::NEG_INFINITY, Tolerance::exact()).unwrap().passed());
        let dip = [1.0, 2.0, 1.5, 0.5];
        assert!(check_curve_power_concavity(&ts, &dip, f64::NEG_INFINITY, Tolerance::exact()).unwrap().passed());
        assert!(check_curve_power_concavity(&ts, &dip, f64::INFINITY, Tolerance::exact()).unwrap().is_violation());
        // 1/F convex for F = 1/(1+t^2)? 1+t^2 is convex, so F is (-1)-concave
        let ts: Vec<f64> = (0..=20).map(|i| -2.0 + 0.2 * i as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|t| 1.0 / (1.0 + t * t)).collect();
        assert!(check_curve_power_concavity(&ts, &fs, -1.0, Tolerance::exact()).unwrap().passed());
        assert!(check_curve_power_concavity(&ts, &fs, 0.0, Tolerance::exact()).unwrap().is_violation());
    }

    #[test]
    fn dilates_of_gaussian_square() {
        let ev = MeasureEvaluator::with_default_policy(DensityND::gaussian_standard(2).unwrap());
        let a: SetRep = ConvexPolygon::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap().into();
        let ts: Vec<f64> = (0..12).map(|i| 0.25 * (i + 1) as f64).collect();
        assert!(scan_dilates(&ev, &a, &ts, 0.5).unwrap().passed());
        let lebesgue = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let r = scan_dilates(&lebesgue, &a, &ts, 0.5).unwrap();
        assert!(r.passed() && r.worst_deficit.abs() < 1e-12);
        let off: SetRep = ConvexPolygon::rectangle(1.0, 2.0, 1.0, 2.0).unwrap().into();
        assert!(scan_dilates(&ev, &off, &ts, 0.5).unwrap().is_vacuous());
        assert!(scan_dilates(&ev, &a, &[0.0, 1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn b_property_cases() {
        let ts: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
        let leb = MeasureEvaluator::with_default_policy(DensityND::lebesgue(2).unwrap());
        let hex: SetRep = ConvexPolygon::regular(6, 1.0, 0.0).unwrap().into();
        let r = check_b_property(&leb, &hex, &ts).unwrap();
        assert!(r.passed() && r.worst_deficit.abs() < 1e-9);
        let ex = MeasureEvaluator::with_default_policy(DensityND::exponential_product(2, false).unwrap());
        let sq: SetRep = ConvexPolygon::rectangle(-1.0, 1.0, -1.0, 1.0).unwrap().into();
        assert!(check_b_property(&ex, &sq, &ts).unwrap().passed());
    }

    #[test]
    fn radial_monotone() {
        let g = DensityND::gaussian_standard(2).unwrap().into();
        let grids = EquivGrids::standard(2);
        assert!(check_radial_monotone(&g, &grids.rays, &grids.radial_ts));
        let e = DensityND::exponential_product(2, true).unwrap().into();
        assert!(check_radial_monotone(&e, &grids.rays, &grids.radial_ts));
        let s = DensityND::custom_2d(Custom2d::shifted_gaussian([1.0, 0.0])).into();
        assert!(!check_radial_monotone(&s, &[vec![1.0, 0.0]], &grids.radial_ts));
    }

    #[test]
    fn converse_example() {
        let ev = MeasureEvaluator::with_default_policy(Density1D::uniform(-1.0, 2.0).unwrap());
        let a: SetRep = IntervalUnion::symmetric(1.0).unwrap().into();
        let r = prop_equiv_pipeline(&ev, &a, &EquivGrids::standard(1)).unwrap();
        assert!(r.radial_monotone);
        assert!(r.b_property.is_violation());
        assert!(r.dilates.passed());
        assert_eq!(r.outcome, EquivOutcome::ConverseNotImplied);
    }
}
