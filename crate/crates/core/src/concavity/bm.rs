use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::s_mean;
use crate::error::{Error, Result};
use crate::measures::{check_gamma_concavity, check_unimodal, PointTriple};
use crate::quadrature::MeasureEvaluator;
use crate::report::{ConcavityReport, DeficitSample, Tolerance, Witness};
use crate::sets::{combine, project_axis, Axis, ConvexPolygon, DirectionUnit, IntervalUnion, SetRep};

/// `{0, 0.1, ..., 1}`
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Pass threshold and λ refinement of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmOptions {
    /// `None` uses the evaluator's quadrature tolerances.
    pub tolerance: Option<Tolerance>,
    /// Golden-section steps around the worst grid λ (0 disables).
    pub refine_steps: usize,
}

impl Default for BmOptions {
    fn default() -> Self {
        BmOptions {
            tolerance: None,
            refine_steps: 24,
        }
    }
}

impl BmOptions {
    pub fn grid_only() -> Self {
        BmOptions {
            refine_steps: 0,
            ..Default::default()
        }
    }

    fn tolerance(&self, ev: &MeasureEvaluator) -> Tolerance {
        self.tolerance
            .unwrap_or_else(|| Tolerance::new(ev.policy().abs_tol, ev.policy().rel_tol))
    }
}

fn sample(lambda: f64, lhs: f64, rhs: f64, tol: &Tolerance) -> DeficitSample {
    DeficitSample {
        witness: Witness::lambda(lambda),
        lhs,
        rhs,
        deficit: lhs - rhs,
        tolerance: tol.threshold(lhs.max(rhs)),
    }
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::domain("empty lambda grid"));
    }
    for l in lambdas {
        crate::sets::check_lambda(*l)?;
    }
    Ok(())
}

/// Evaluates `lhs(λ) - rhs(λ)` on the grid, then refines around the worst node.
fn scan<F>(lambdas: &[f64], tol: Tolerance, refine_steps: usize, eval: F) -> Result<ConcavityReport>
where
    F: Fn(f64) -> Result<(f64, f64)> + Sync,
{
    check_grid(lambdas)?;
    let mut trace = lambdas
        .par_iter()
        .map(|l| {
            let (lhs, rhs) = eval(*l).map_err(|e| e.at("lambda", *l))?;
            Ok(sample(*l, lhs, rhs, &tol))
        })
        .collect::<Result<Vec<_>>>()?;
    if refine_steps > 0 && lambdas.len() >= 3 {
        let mut sorted: Vec<f64> = lambdas.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let worst = trace
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.margin().total_cmp(&b.margin()).then(i.cmp(j)))
            .map(|(_, s)| s.witness.lambda.unwrap_or(0.0))
            .unwrap_or(0.0);
        let k = sorted.partition_point(|l| *l < worst);
        let (mut a, mut b) = (sorted[k.saturating_sub(1)], sorted[(k + 1).min(sorted.len() - 1)]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut at = |l: f64| -> Result<f64> {
            let (lhs, rhs) = eval(l).map_err(|e| e.at("lambda", l))?;
            let s = sample(l, lhs, rhs, &tol);
            let m = s.margin();
            trace.push(s);
            Ok(m)
        };
        if b > a {
            let mut c = b - phi * (b - a);
            let mut d = a + phi * (b - a);
            let (mut fc, mut fd) = (at(c)?, at(d)?);
            for _ in 2..refine_steps {
                if fc <= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = at(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = at(d)?;
                }
            }
        }
    }
    Ok(ConcavityReport::from_samples(trace))
}

/// Scans `μ((1-λ)A + λB) >= M_s(μ(A), μ(B); λ)` over the λ grid.
///
/// Vacuous when `μ(A) μ(B) = 0`.
pub fn check_bm(
    ev: &MeasureEvaluator,
    a: &SetRep,
    b: &SetRep,
    s: f64,
    lambdas: &[f64],
    opts: &BmOptions,
) -> Result<ConcavityReport> {
    if s.is_nan() {
        return Err(Error::domain("s must not be NaN"));
    }
    check_grid(lambdas)?;
    let ma = ev.measure(a)?;
    let mb = ev.measure(b)?;
    if !(ma * mb > 0.0) {
        return Ok(ConcavityReport::vacuous(format!(
            "mu(A) mu(B) = 0 (mu(A) = {ma}, mu(B) = {mb})"
        )));
    }
    scan(lambdas, opts.tolerance(ev), opts.refine_steps, |l| {
        let c = combine(a, b, l)?;
        Ok((ev.measure(&c)?, s_mean(ma, mb, s, l)))
    })
}

fn intersects(a: &IntervalUnion, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if a.is_full_line() {
        return Some((lo, hi));
    }
    a.intervals().iter().find_map(|&(x, y)| {
        let (l, h) = (x.max(lo), y.min(hi));
        (l <= h).then_some((l, h))
    })
}

/// Whether a maximizer of the density lies in `A ∩ B`.
fn mode_in_both(modal: (f64, f64), a: &IntervalUnion, b: &IntervalUnion) -> bool {
    let pieces: Vec<(f64, f64)> = if a.is_full_line() {
        vec![modal]
    } else {
        a.intervals()
            .iter()
            .filter_map(|&(x, y)| {
                let (l, h) = (x.max(modal.0), y.min(modal.1));
                (l <= h).then_some((l, h))
            })
            .collect()
    };
    pieces.iter().any(|&(l, h)| intersects(b, l, h).is_some())
}

/// Arithmetic-mean scan for a unimodal 1-D density whose maximum is attained in `A ∩ B`.
///
/// Vacuous when the density is not unimodal or no maximizer lies in `A ∩ B`.
pub fn check_prop_concave(
    ev: &MeasureEvaluator,
    a: &IntervalUnion,
    b: &IntervalUnion,
    lambdas: &[f64],
    opts: &BmOptions,
) -> Result<ConcavityReport> {
    if ev.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: ev.dimension(),
        });
    }
    let d = ev.density().marginals().expect("1-D density")[0].clone();
    let Some(modal) = d.modal_interval() else {
        return Ok(ConcavityReport::vacuous("density attains no maximum"));
    };
    if !d.is_unimodal() {
        return Ok(ConcavityReport::vacuous("density is not declared unimodal"));
    }
    // confirm the declared shape on a grid covering both sets
    let (mut lo, mut hi) = (modal.0, modal.1);
    for s in [a, b] {
        if let Some((x, y)) = s.hull() {
            lo = lo.min(x);
            hi = hi.max(y);
        }
    }
    let (slo, shi) = d.support();
    let (lo, hi) = ((lo - 1.0).max(slo), (hi + 1.0).min(shi));
    if lo < hi && lo.is_finite() && hi.is_finite() {
        let mut grid: Vec<f64> = (0..=400)
            .map(|i| (lo + (hi - lo) * i as f64 / 400.0).min(hi))
            .collect();
        grid.extend(d.breakpoints().into_iter().filter(|p| *p > lo && *p < hi));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let u = check_unimodal(&d, &grid)?;
        if !u.unimodal {
            return Ok(ConcavityReport::vacuous(format!(
                "density is not unimodal (first violation at {:?})",
                u.violation
            )));
        }
    }
    if !mode_in_both(modal, a, b) {
        return Ok(ConcavityReport::vacuous(format!(
            "no maximizer of the density in A ∩ B (modal interval [{}, {}])",
            modal.0, modal.1
        )));
    }
    check_bm(ev, &a.clone().into(), &b.clone().into(), 1.0, lambdas, opts)
}

/// Arithmetic-mean scan for the slab `A = A_1 x R` against a polygon `B`.
///
/// The combination is `((1-λ)A_1 + λ P_{e1}B) x R` for `λ < 1`, so the left
/// side factors into a 1-D mass times the total mass of the second marginal.
pub fn check_slab(
    ev: &MeasureEvaluator,
    a1: &IntervalUnion,
    b: &ConvexPolygon,
    lambdas: &[f64],
    opts: &BmOptions,
) -> Result<ConcavityReport> {
    check_grid(lambdas)?;
    let Some(m) = ev.density().marginals().filter(|m| m.len() == 2) else {
        return Err(Error::Unsupported("slab check needs a 2-D product density".into()));
    };
    let m2 = m[1].total_mass().ok_or_else(|| {
        Error::domain("the second marginal has infinite total mass")
    })?;
    if !(m[0].is_unimodal() && m[0].modal_interval().is_some_and(|(l, h)| l <= 0.0 && 0.0 <= h)) {
        return Ok(ConcavityReport::vacuous("first marginal is not unimodal with a maximum at 0"));
    }
    if !a1.contains(0.0) {
        return Ok(ConcavityReport::vacuous("0 is not in A_1"));
    }
    if !b.contains_origin() {
        return Ok(ConcavityReport::vacuous("0 is not in B"));
    }
    let e1 = MeasureEvaluator::new(m[0].clone(), *ev.policy())?;
    let mu_a = e1.measure_1d(a1)? * m2;
    let mu_b = ev.measure_polygon(b)?;
    if !(mu_a * mu_b > 0.0) {
        return Ok(ConcavityReport::vacuous("mu(A) mu(B) = 0"));
    }
    let (p0, p1) = project_axis(b, Axis::X);
    let pb = IntervalUnion::interval(p0, p1)?;
    scan(lambdas, opts.tolerance(ev), opts.refine_steps, |l| {
        let lhs = if l == 1.0 {
            mu_b
        } else {
            e1.measure_1d(&a1.linear_combination(1.0 - l, &pb, l)?)? * m2
        };
        Ok((lhs, (1.0 - l) * mu_a + l * mu_b))
    })
}

/// Relative agreement required between the two maximal sections.
pub const SECTION_MATCH_TOL: f64 = 1e-6;

/// Rescales `B` about its centroid so that its maximal section along `u`
/// matches that of `A`, by bisection on the scale factor.
pub fn match_max_section(
    ev: &MeasureEvaluator,
    a: &ConvexPolygon,
    b: &ConvexPolygon,
    u: DirectionUnit,
) -> Result<ConvexPolygon> {
    let target = ev.max_section(a, u)?.1;
    let c = b.centroid();
    let m = |k: f64| -> Result<f64> { Ok(ev.max_section(&b.scale_about(c, k)?, u)?.1) };
    let (mut lo, mut hi) = (1.0, 1.0);
    for _ in 0..60 {
        if m(lo)? <= target {
            break;
        }
        lo *= 0.5;
    }
    for _ in 0..60 {
        if m(hi)? >= target {
            break;
        }
        hi *= 2.0;
    }
    if !(m(lo)? <= target && m(hi)? >= target) {
        return Err(Error::domain("could not bracket the maximal section of A"));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let v = m(mid)?;
        if (v - target).abs() <= 1e-3 * SECTION_MATCH_TOL * target {
            return b.scale_about(c, mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    b.scale_about(c, 0.5 * (lo + hi))
}

/// Arithmetic-mean scan for convex polygons with equal maximal sections
/// along `u`, under a density of class at least `-1`.
///
/// Vacuous when the density class is missing or fails its spot check, or
/// when the maximal sections differ by more than [`SECTION_MATCH_TOL`].
pub fn check_bonnesen_sections(
    ev: &MeasureEvaluator,
    a: &ConvexPolygon,
    b: &ConvexPolygon,
    u: DirectionUnit,
    lambdas: &[f64],
    opts: &BmOptions,
) -> Result<ConcavityReport> {
    if ev.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ev.dimension(),
        });
    }
    match ev.density().declared_gamma() {
        Some(g) if g.value() >= -1.0 => {}
        other => {
            return Ok(ConcavityReport::vacuous(format!(
                "density class {other:?} is not (-1)-concave"
            )))
        }
    }
    // spot check of the declared class over the bounding box of both sets
    let (x0, x1) = (a.project_axis(Axis::X).0.min(b.project_axis(Axis::X).0), a.project_axis(Axis::X).1.max(b.project_axis(Axis::X).1));
    let (y0, y1) = (a.project_axis(Axis::Y).0.min(b.project_axis(Axis::Y).0), a.project_axis(Axis::Y).1.max(b.project_axis(Axis::Y).1));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let triples: Vec<PointTriple> = (0..200)
        .map(|_| PointTriple {
            x: vec![rng.gen_range(x0..=x1), rng.gen_range(y0..=y1)],
            y: vec![rng.gen_range(x0..=x1), rng.gen_range(y0..=y1)],
            lambda: rng.gen_range(0.0..=1.0),
        })
        .collect();
    let spot = check_gamma_concavity(ev.density(), -1.0, &triples)?;
    if spot.is_violation() {
        return Ok(ConcavityReport::vacuous(format!(
            "density fails the (-1)-concavity spot check (deficit {})",
            spot.worst_deficit
        )));
    }
    let ma = ev.max_section(a, u)?.1;
    let mb = ev.max_section(b, u)?.1;
    let gap = (ma - mb).abs();
    if gap > SECTION_MATCH_TOL * ma.max(mb) {
        return Ok(ConcavityReport::vacuous(format!(
            "maximal sections differ: {ma} vs {mb} (gap {gap})"
        )));
    }
    check_bm(ev, &a.clone().into(), &b.clone().into(), 1.0, lambdas, opts)
}
