//! The closed-form one-dimensional counterexample family and a randomized
//! search for planar violations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concavity::{check_bm, default_lambda_grid, s_mean, BmOptions};
use crate::error::{Error, Result};
use crate::quadrature::{MeasureEvaluator, QuadraturePolicy};
use crate::report::{ConcavityReport, Tolerance};
use crate::sets::{ConvexPolygon, Point, SetRep};

/// `μ([-a, a]) = s a^{1/s}` for the density `x^{1/γ} 1_{x >= 0}`, `γ = s / (1 - s)`.
pub fn power_mass(s: f64, a: f64) -> f64 {
    s * a.powf(1.0 / s)
}

/// Symmetric intervals `A = [-a, a]`, `B = [-b, b]` under the `s`-concave
/// power measure, tested against the stronger exponent `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFamilyInstance {
    pub s: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
}

impl PowerFamilyInstance {
    pub fn new(s: f64, r: f64, a: f64, b: f64) -> Result<Self> {
        if !(0.0 < s && s < 1.0) {
            return Err(Error::domain(format!("s = {s} outside (0, 1)")));
        }
        if !(r > s) {
            return Err(Error::domain(format!("r = {r} must exceed s = {s}")));
        }
        if !(0.0 < a && a < b && b.is_finite()) {
            return Err(Error::domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        Ok(PowerFamilyInstance { s, r, a, b })
    }

    /// `μ((1-λ)A + λB)`, the mass of `[-c, c]` with `c = (1-λ)a + λb`.
    pub fn combined_mass(&self, lambda: f64) -> f64 {
        power_mass(self.s, (1.0 - lambda) * self.a + lambda * self.b)
    }
}

/// Deficit `μ((1-λ)A + λB) - M_r(μ(A), μ(B); λ)` without the family
/// constraints, so that `r = s` and `a = 0` can be probed.
pub fn power_deficit(s: f64, r: f64, a: f64, b: f64, lambda: f64) -> f64 {
    let mid = power_mass(s, (1.0 - lambda) * a + lambda * b);
    mid - s_mean(power_mass(s, a), power_mass(s, b), r, lambda)
}

/// Closed-form deficit of an instance; negative values certify a violation.
pub fn power_family_deficit(inst: &PowerFamilyInstance, lambda: f64) -> Result<f64> {
    crate::sets::check_lambda(lambda)?;
    Ok(power_deficit(inst.s, inst.r, inst.a, inst.b, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSearchResult {
    pub s: f64,
    pub r: f64,
    pub b: f64,
    pub a: f64,
    pub deficit: f64,
    /// The deficit is negative beyond closed-form rounding.
    pub certified: bool,
}

/// Minimizes the `λ = 1/2` deficit over `a ∈ (0, b)`: a scan of 400 nodes,
/// then golden-section refinement between the neighbours of the best node.
pub fn power_family_search(s: f64, r: f64, b: f64) -> Result<PowerSearchResult> {
    PowerFamilyInstance::new(s, r, 0.5 * b, b)?;
    let f = |a: f64| power_deficit(s, r, a, b, 0.5);
    let n = 400;
    let nodes: Vec<f64> = (1..n).map(|i| b * i as f64 / n as f64).collect();
    let best = (0..nodes.len())
        .min_by(|&i, &j| f(nodes[i]).total_cmp(&f(nodes[j])).then(i.cmp(&j)))
        .expect("non-empty scan");
    let mut lo = if best == 0 { b * 1e-12 } else { nodes[best - 1] };
    let mut hi = if best + 1 == nodes.len() { b * (1.0 - 1e-12) } else { nodes[best + 1] };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    for _ in 0..100 {
        if f(c) <= f(d) {
            hi = d;
            d = c;
            c = hi - phi * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + phi * (hi - lo);
        }
    }
    let (mut a, mut deficit) = (nodes[best], f(nodes[best]));
    for cand in [c, d] {
        if f(cand) < deficit {
            a = cand;
            deficit = f(cand);
        }
    }
    let scale = power_mass(s, b);
    Ok(PowerSearchResult {
        s,
        r,
        b,
        a,
        deficit,
        certified: deficit < -1e-12 * scale,
    })
}

/// Parametric planar families with `0 ∈ A ⊂ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `B` a triangle around the origin, `A = ρB + (1-ρ)q` a homothetic copy
    /// inside `B` translated so that it contains 0.
    Triangle,
    /// `B` a box around the origin, `A = B ∩ {x . n <= c}` with `c >= 0`.
    ClippedHalfplane,
    /// `B` a centrally symmetric hexagon, `A = ρB`.
    SymmetricDilate,
}

impl FamilyKind {
    fn names(self) -> &'static [&'static str] {
        match self {
            FamilyKind::Triangle => &[
                "theta", "gap1", "gap2", "r1", "r2", "r3", "rho", "w1", "w2", "reach",
            ],
            FamilyKind::ClippedHalfplane => &["left", "right", "bottom", "top", "phi", "cut"],
            FamilyKind::SymmetricDilate => &["theta", "gap1", "gap2", "r1", "r2", "r3", "rho"],
        }
    }

    /// Physical ranges of the parameters.
    fn ranges(self) -> &'static [(f64, f64)] {
        const TAU: f64 = 2.0 * PI;
        match self {
            FamilyKind::Triangle => &[
                (0.0, TAU),
                (0.3, PI - 0.05),
                (0.3, PI - 0.05),
                (0.3, 3.0),
                (0.3, 3.0),
                (0.3, 3.0),
                (0.05, 0.95),
                (0.0, 1.0),
                (0.0, 1.0),
                (0.0, 1.0),
            ],
            FamilyKind::ClippedHalfplane => &[
                (0.1, 3.0),
                (0.1, 3.0),
                (0.1, 3.0),
                (0.1, 3.0),
                (0.0, TAU),
                (0.0, 1.0),
            ],
            FamilyKind::SymmetricDilate => &[
                (0.0, PI),
                (0.2, PI / 2.0),
                (0.2, PI / 2.0),
                (0.3, 3.0),
                (0.3, 3.0),
                (0.3, 3.0),
                (0.05, 1.0),
            ],
        }
    }

    pub fn dimension(self) -> usize {
        self.names().len()
    }

    /// Maps a point of the unit cube to physical parameters.
    pub fn physical(self, unit: &[f64]) -> Vec<f64> {
        self.ranges()
            .iter()
            .zip(unit)
            .map(|((lo, hi), u)| lo + (hi - lo) * u)
            .collect()
    }

    /// Builds `(A, B)` from physical parameters; `None` when degenerate.
    pub fn build(self, p: &[f64]) -> Option<(ConvexPolygon, ConvexPolygon)> {
        let polar = |theta: f64, r: f64| -> Point { [r * theta.cos(), r * theta.sin()] };
        match self {
            FamilyKind::Triangle => {
                let (t0, g1, g2) = (p[0], p[1], p[2]);
                let g3 = 2.0 * PI - g1 - g2;
                if !(g3 > 0.05 && g3 < PI - 0.05) {
                    return None;
                }
                let b = ConvexPolygon::new(vec![
                    polar(t0, p[3]),
                    polar(t0 + g1, p[4]),
                    polar(t0 + g1 + g2, p[5]),
                ])
                .ok()?;
                let rho = p[6];
                // a point v of B from barycentric weights
                let (w1, w2) = if p[7] + p[8] <= 1.0 { (p[7], p[8]) } else { (1.0 - p[7], 1.0 - p[8]) };
                let vs = b.vertices();
                let v = [
                    (1.0 - w1 - w2) * vs[0][0] + w1 * vs[1][0] + w2 * vs[2][0],
                    (1.0 - w1 - w2) * vs[0][1] + w1 * vs[1][1] + w2 * vs[2][1],
                ];
                // A = ρB + (1-ρ)q with q = -ρκv/(1-ρ) ∈ B, so ρκv ∈ ρB gives 0 ∈ A
                let g = gauge(&b, [-v[0], -v[1]]);
                let kmax = if g > 0.0 { (1.0 - rho) / (rho * g) } else { f64::INFINITY };
                let kappa = (p[9] * kmax).min(1.0);
                let k = -rho * kappa / (1.0 - rho);
                let q = [k * v[0], k * v[1]];
                let a = b.scale(rho).ok()?.translate([(1.0 - rho) * q[0], (1.0 - rho) * q[1]]);
                Some((a, b))
            }
            FamilyKind::ClippedHalfplane => {
                let b = ConvexPolygon::rectangle(-p[0], p[1], -p[2], p[3]).ok()?;
                let n = [p[4].cos(), p[4].sin()];
                let c = (0.02 + 0.96 * p[5]) * b.support(n);
                let a = b.clip_halfplane(n, c).ok()?;
                Some((a, b))
            }
            FamilyKind::SymmetricDilate => {
                let (t0, g1, g2) = (p[0], p[1], p[2]);
                let v1 = polar(t0, p[3]);
                let v2 = polar(t0 + g1, p[4]);
                let v3 = polar(t0 + g1 + g2, p[5]);
                let b = ConvexPolygon::hull(&[
                    v1,
                    v2,
                    v3,
                    [-v1[0], -v1[1]],
                    [-v2[0], -v2[1]],
                    [-v3[0], -v3[1]],
                ])
                .ok()?;
                let a = b.scale(p[6]).ok()?;
                Some((a, b))
            }
        }
    }
}

/// Minkowski gauge of `x` with respect to a polygon containing 0 in its interior.
fn gauge(p: &ConvexPolygon, x: Point) -> f64 {
    let v = p.vertices();
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            // outward normal of the edge and its offset
            let nrm = [b[1] - a[1], a[0] - b[0]];
            let h = nrm[0] * a[0] + nrm[1] * a[1];
            (nrm[0] * x[0] + nrm[1] * x[1]) / h
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SearchFamily {
    pub kind: FamilyKind,
    pub evaluator: MeasureEvaluator,
    pub s: f64,
    pub seed: u64,
    /// Independent restarts, each with its own random stream.
    pub restarts: usize,
}

impl SearchFamily {
    pub fn new(kind: FamilyKind, evaluator: MeasureEvaluator, s: f64, seed: u64) -> Result<Self> {
        if evaluator.dimension() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: evaluator.dimension(),
            });
        }
        if s.is_nan() {
            return Err(Error::domain("s must not be NaN"));
        }
        Ok(SearchFamily {
            kind,
            evaluator,
            s,
            seed,
            restarts: 8,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub family: FamilyKind,
    pub s: f64,
    pub seed: u64,
    pub budget: usize,
    pub evaluations: usize,
    pub params: BTreeMap<String, f64>,
    pub a_vertices: Vec<[f64; 2]>,
    pub b_vertices: Vec<[f64; 2]>,
    /// Best `λ = 1/2` deficit found by the search.
    pub deficit: f64,
    /// Full λ scan of the winner at the evaluator's own tolerances.
    pub scan: ConcavityReport,
    /// The `λ = 1/2` deficit re-evaluated at 10x tighter quadrature tolerances.
    pub tightened_deficit: f64,
    /// Negative beyond tolerance both at search and at tightened tolerances.
    pub certified: bool,
    /// Searched witnesses are never presented as established constructions.
    pub exploratory: bool,
}

struct Restart {
    index: usize,
    best: f64,
    unit: Vec<f64>,
    evaluations: usize,
}

fn objective(fam: &SearchFamily, ev: &MeasureEvaluator, unit: &[f64]) -> f64 {
    let Some((a, b)) = fam.kind.build(&fam.kind.physical(unit)) else {
        return f64::INFINITY;
    };
    let eval = || -> Result<f64> {
        let ma = ev.measure_polygon(&a)?;
        let mb = ev.measure_polygon(&b)?;
        if !(ma * mb > 0.0) {
            return Ok(f64::INFINITY);
        }
        let mid = ev.measure_polygon(&a.linear_combination(0.5, &b, 0.5)?)?;
        Ok(mid - s_mean(ma, mb, fam.s, 0.5))
    };
    eval().unwrap_or(f64::INFINITY)
}

fn run_restart(fam: &SearchFamily, ev: &MeasureEvaluator, index: usize, budget: usize) -> Restart {
    let mut rng = ChaCha8Rng::seed_from_u64(fam.seed);
    rng.set_stream(index as u64);
    let k = fam.kind.dimension();
    let mut evaluations = 0;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..k).map(|_| rng.gen::<f64>()).collect() };
    let mut x = draw(&mut rng);
    let mut fx = objective(fam, ev, &x);
    evaluations += 1;
    let (mut best, mut best_x) = (fx, x.clone());
    let mut step = 0.25;
    while evaluations < budget {
        let mut improved = false;
        for i in 0..k {
            for dir in [1.0, -1.0] {
                if evaluations >= budget {
                    break;
                }
                let mut y = x.clone();
                y[i] = (y[i] + dir * step).clamp(0.0, 1.0);
                if y[i] == x[i] {
                    continue;
                }
                let fy = objective(fam, ev, &y);
                evaluations += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if fx < best {
            best = fx;
            best_x = x.clone();
        }
        if !improved {
            step *= 0.5;
            if step < 1e-4 {
                // local optimum: start over from a fresh point of the same stream
                x = draw(&mut rng);
                fx = objective(fam, ev, &x);
                evaluations += 1;
                step = 0.25;
            }
        }
    }
    if fx < best {
        best = fx;
        best_x = x;
    }
    Restart {
        index,
        best,
        unit: best_x,
        evaluations,
    }
}

/// Coordinate descent with random restarts minimizing the `λ = 1/2` deficit
/// of `μ((A+B)/2) >= M_s(μ(A), μ(B); 1/2)` over the family.
///
/// `budget` counts objective evaluations over all restarts. The search runs
/// at 10x looser tolerances than the evaluator; the winner is then scanned
/// over the full λ grid and re-checked at 10x tighter tolerances.
/// Deterministic for a given seed, budget and restart count.
pub fn violation_search(fam: &SearchFamily, budget: usize) -> Result<SearchReport> {
    if budget < fam.restarts.max(1) {
        return Err(Error::domain("budget must allow one evaluation per restart"));
    }
    let base = *fam.evaluator.policy();
    let loose = fam.evaluator.with_policy(QuadraturePolicy {
        abs_tol: base.abs_tol * 10.0,
        rel_tol: base.rel_tol * 10.0,
        ..base
    })?;
    let per = budget / fam.restarts;
    let runs: Vec<Restart> = (0..fam.restarts)
        .into_par_iter()
        .map(|i| run_restart(fam, &loose, i, per))
        .collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let win = runs
        .iter()
        .min_by(|a, b| a.best.total_cmp(&b.best).then(a.index.cmp(&b.index)))
        .expect("at least one restart");
    if !win.best.is_finite() {
        return Err(Error::domain("no valid parameter found in the family"));
    }
    let phys = fam.kind.physical(&win.unit);
    let (a, b) = fam.kind.build(&phys).expect("winner is valid");
    let sa: SetRep = a.clone().into();
    let sb: SetRep = b.clone().into();
    let scan = check_bm(&fam.evaluator, &sa, &sb, fam.s, &default_lambda_grid(), &BmOptions::default())?;
    let tight_ev = fam.evaluator.with_policy(base.tightened(10.0))?;
    let tight = check_bm(&tight_ev, &sa, &sb, fam.s, &[0.5], &BmOptions::grid_only())?;
    let at_half = check_bm(&fam.evaluator, &sa, &sb, fam.s, &[0.5], &BmOptions::grid_only())?;
    let tightened_deficit = tight.worst_deficit;
    let tol = Tolerance::new(base.abs_tol, base.rel_tol);
    let certified = at_half.is_violation()
        && tight.is_violation()
        && tightened_deficit < -tol.scaled(0.1).threshold(tight.trace[0].lhs.max(tight.trace[0].rhs));
    Ok(SearchReport {
        family: fam.kind,
        s: fam.s,
        seed: fam.seed,
        budget,
        evaluations,
        params: fam
            .kind
            .names()
            .iter()
            .zip(&phys)
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        a_vertices: a.vertices().to_vec(),
        b_vertices: b.vertices().to_vec(),
        deficit: win.best,
        scan,
        tightened_deficit,
        certified,
        exploratory: true,
    })
}
