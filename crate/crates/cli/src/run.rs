//! Dispatch from a scenario to the library checks.

use anyhow::{anyhow, bail, Context, Result};
use bmlab_core::concavity::{
    check_b_property, check_bm, check_bonnesen_sections, check_dancs_uhrin,
    check_henstock_macbeath, check_prop_concave, check_slab, default_lambda_grid, match_max_section,
    prop_equiv_pipeline, s_mean, scan_dilates, BmOptions, EquivGrids, EquivOutcome,
};
use bmlab_core::counterexamples::{
    power_family_search, power_mass, violation_search, PowerFamilyInstance, SearchFamily,
};
use bmlab_core::parallel::{check_parallel_concavity, parallel_curve, ParallelCurve};
use bmlab_core::quadrature::MeasureEvaluator;
use bmlab_core::sets::{ConvexPolygon, DirectionUnit, IntervalUnion, SetRep};
use bmlab_core::{ConcavityReport, DeficitSample, Tolerance, Verdict, Witness};
use serde_json::{json, Map, Value};

use crate::scenario::{Command, ScenarioConfig};

pub struct Outcome {
    pub json: Value,
    pub csv: Option<String>,
    pub exit: u8,
}

struct Run {
    report: ConcavityReport,
    extras: Map<String, Value>,
    curve: Option<(Vec<f64>, Vec<f64>)>,
}

impl Run {
    fn plain(report: ConcavityReport) -> Self {
        Run {
            report,
            extras: Map::new(),
            curve: None,
        }
    }
}

/// Exit status for a verdict: 1 only for a violation in a check command.
pub fn exit_code(command: Command, verdict: Verdict) -> u8 {
    match (command, verdict) {
        (Command::CounterexampleSearch, _) => 0,
        (_, Verdict::Violation) => 1,
        _ => 0,
    }
}

pub fn run_scenario(cfg: &ScenarioConfig, name: &str) -> Result<Outcome> {
    let run = match cfg.command {
        Command::CheckBm => run_check_bm(cfg)?,
        Command::ScanDilates => run_scan_dilates(cfg)?,
        Command::BProperty => run_b_property(cfg)?,
        Command::PropConcave => run_prop_concave(cfg)?,
        Command::Slab => run_slab(cfg)?,
        Command::Bonnesen => run_bonnesen(cfg)?,
        Command::Hm => run_hm(cfg)?,
        Command::DancsUhrin => run_dancs_uhrin(cfg)?,
        Command::CounterexamplePower => run_power(cfg)?,
        Command::CounterexampleSearch => run_search(cfg)?,
        Command::Parallel => run_parallel(cfg)?,
    };
    let csv = run.curve.as_ref().map(|(ts, values)| {
        let curve = ParallelCurve {
            ts: ts.clone(),
            values: values.clone(),
            value_tol: Tolerance::exact(),
            measure_id: String::new(),
            a_id: String::new(),
            b_id: String::new(),
        };
        crate::emit::curve_csv(ts, values, &curve.cumulative_deficits(&run.report))
    });
    let exit = exit_code(cfg.command, run.report.verdict);
    let json = json!({
        "command": cfg.command.name(),
        "name": name,
        "report": serde_json::to_value(&run.report)?,
        "extras": Value::Object(run.extras),
    });
    Ok(Outcome { json, csv, exit })
}

fn evaluator(cfg: &ScenarioConfig) -> Result<MeasureEvaluator> {
    let density = cfg.measure()?.build().context("field `measure`")?;
    let policy = cfg.policy.unwrap_or_default();
    Ok(MeasureEvaluator::new(density, policy).context("field `policy`")?)
}

fn sets(cfg: &ScenarioConfig, n: usize) -> Result<Vec<SetRep>> {
    cfg.set_count(n)?;
    cfg.sets
        .iter()
        .enumerate()
        .map(|(i, d)| d.build().with_context(|| format!("field `sets[{i}]`")))
        .collect()
}

fn lambdas(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    match &cfg.lambda_grid {
        Some(g) => g.values().context("field `lambda_grid`"),
        None => Ok(default_lambda_grid()),
    }
}

fn t_grid(cfg: &ScenarioConfig) -> Result<Option<Vec<f64>>> {
    cfg.t_grid.as_ref().map(|g| g.values().context("field `t_grid`")).transpose()
}

fn required_t_grid(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    t_grid(cfg)?.ok_or_else(|| anyhow!("{} needs field `t_grid`", cfg.command.name()))
}

fn polygon(set: SetRep, field: &str) -> Result<ConvexPolygon> {
    match set {
        SetRep::Polygon(p) => Ok(p),
        SetRep::Product(p) => p
            .to_polygon()
            .ok_or_else(|| anyhow!("{field} must be a bounded convex planar set")),
        _ => bail!("{field} must be a planar polygon"),
    }
}

fn intervals(set: SetRep, field: &str) -> Result<IntervalUnion> {
    match set {
        SetRep::Intervals(a) => Ok(a),
        _ => bail!("{field} must be a union of intervals"),
    }
}

fn direction(cfg: &ScenarioConfig) -> Result<DirectionUnit> {
    match &cfg.direction {
        Some(d) => d.unit().context("field `direction`"),
        None => Ok(DirectionUnit::E1),
    }
}

fn curve_values(ev: &MeasureEvaluator, a: &SetRep, factors: &[f64]) -> Result<Vec<f64>> {
    factors.iter().map(|k| Ok(ev.measure(&a.dilate(*k)?)?)).collect()
}

fn run_check_bm(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let s = sets(cfg, 2)?;
    let r = check_bm(&ev, &s[0], &s[1], cfg.s()?, &lambdas(cfg)?, &BmOptions::default())?;
    let mut run = Run::plain(r);
    run.extras.insert("s".into(), json!(cfg.s));
    Ok(run)
}

fn run_scan_dilates(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let a = sets(cfg, 1)?.remove(0);
    let n = ev.dimension();
    if cfg.pipeline {
        let mut grids = EquivGrids::standard(n);
        if let Some(ts) = t_grid(cfg)? {
            grids.dilate_ts = ts;
        }
        let eq = prop_equiv_pipeline(&ev, &a, &grids)?;
        let mut extras = Map::new();
        extras.insert("outcome".into(), serde_json::to_value(eq.outcome)?);
        extras.insert("radial_monotone".into(), json!(eq.radial_monotone));
        extras.insert("b_property".into(), serde_json::to_value(&eq.b_property)?);
        let report = match eq.outcome {
            EquivOutcome::HypothesisNotMet => ConcavityReport::vacuous("hypotheses of the equivalence not met"),
            _ => eq.dilates,
        };
        let curve = if report.is_vacuous() {
            None
        } else {
            Some((grids.dilate_ts.clone(), curve_values(&ev, &a, &grids.dilate_ts)?))
        };
        return Ok(Run { report, extras, curve });
    }
    let ts = required_t_grid(cfg)?;
    let p = cfg.p.map(|p| p.0).unwrap_or(1.0 / n as f64);
    let report = scan_dilates(&ev, &a, &ts, p)?;
    let curve = if report.is_vacuous() {
        None
    } else {
        Some((ts.clone(), curve_values(&ev, &a, &ts)?))
    };
    let mut extras = Map::new();
    extras.insert("p".into(), json!(crate::scenario::ExtReal(p)));
    Ok(Run { report, extras, curve })
}

fn run_b_property(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let a = sets(cfg, 1)?.remove(0);
    let ts = required_t_grid(cfg)?;
    let report = check_b_property(&ev, &a, &ts)?;
    let curve = if report.is_vacuous() {
        None
    } else {
        let factors: Vec<f64> = ts.iter().map(|t| t.exp()).collect();
        Some((ts.clone(), curve_values(&ev, &a, &factors)?))
    };
    Ok(Run {
        report,
        extras: Map::new(),
        curve,
    })
}

fn run_prop_concave(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let mut s = sets(cfg, 2)?;
    let b = intervals(s.remove(1), "sets[1]")?;
    let a = intervals(s.remove(0), "sets[0]")?;
    Ok(Run::plain(check_prop_concave(&ev, &a, &b, &lambdas(cfg)?, &BmOptions::default())?))
}

fn run_slab(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let mut s = sets(cfg, 2)?;
    let b = polygon(s.remove(1), "sets[1]")?;
    let a1 = intervals(s.remove(0), "sets[0]")?;
    Ok(Run::plain(check_slab(&ev, &a1, &b, &lambdas(cfg)?, &BmOptions::default())?))
}

fn run_bonnesen(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let mut s = sets(cfg, 2)?;
    let mut b = polygon(s.remove(1), "sets[1]")?;
    let a = polygon(s.remove(0), "sets[0]")?;
    let u = direction(cfg)?;
    let mut extras = Map::new();
    if cfg.match_sections {
        b = match_max_section(&ev, &a, &b, u)?;
        extras.insert("b_vertices".into(), json!(b.vertices()));
    }
    let report = check_bonnesen_sections(&ev, &a, &b, u, &lambdas(cfg)?, &BmOptions::default())?;
    Ok(Run {
        report,
        extras,
        curve: None,
    })
}

fn run_hm(cfg: &ScenarioConfig) -> Result<Run> {
    let (funcs, grid) = cfg.functions_1d()?;
    if funcs.len() != 2 {
        bail!("hm needs 2 entries in `functions`, found {}", funcs.len());
    }
    let f = funcs[0].sample(&grid).context("field `functions[0]`")?;
    let g = funcs[1].sample(&grid).context("field `functions[1]`")?;
    let reports = lambdas(cfg)?
        .iter()
        .map(|l| Ok(check_henstock_macbeath(&f, &g, *l)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Run::plain(ConcavityReport::merge(reports)))
}

fn run_dancs_uhrin(cfg: &ScenarioConfig) -> Result<Run> {
    let (funcs, grid) = cfg.functions_2d()?;
    if funcs.len() != 2 {
        bail!("dancs-uhrin needs 2 entries in `functions`, found {}", funcs.len());
    }
    let f = funcs[0].sample(&grid).context("field `functions[0]`")?;
    let g = funcs[1].sample(&grid).context("field `functions[1]`")?;
    let u = direction(cfg)?;
    let gamma = cfg.gamma.ok_or_else(|| anyhow!("dancs-uhrin needs field `gamma`"))?;
    let reports = lambdas(cfg)?
        .iter()
        .map(|l| Ok(check_dancs_uhrin(&f, &g, u, *l, gamma)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Run::plain(ConcavityReport::merge(reports)))
}

fn run_power(cfg: &ScenarioConfig) -> Result<Run> {
    let s = cfg.s()?;
    let r = cfg.r.ok_or_else(|| anyhow!("counterexample-power needs field `r`"))?;
    let b = cfg.b.ok_or_else(|| anyhow!("counterexample-power needs field `b`"))?;
    let mut extras = Map::new();
    let a = match cfg.a {
        Some(a) => a,
        None => {
            let found = power_family_search(s, r, b)?;
            extras.insert("search".into(), serde_json::to_value(found)?);
            found.a
        }
    };
    let inst = PowerFamilyInstance::new(s, r, a, b)?;
    let (ma, mb) = (power_mass(s, a), power_mass(s, b));
    // closed forms: only rounding separates the two sides
    let tol = 1e-12 * mb;
    let trace = lambdas(cfg)?
        .iter()
        .map(|l| {
            let lhs = inst.combined_mass(*l);
            let rhs = s_mean(ma, mb, r, *l);
            DeficitSample {
                witness: Witness::lambda(*l).with("a", a),
                lhs,
                rhs,
                deficit: lhs - rhs,
                tolerance: tol,
            }
        })
        .collect();
    extras.insert("a".into(), json!(a));
    extras.insert("mass_a".into(), json!(ma));
    extras.insert("mass_b".into(), json!(mb));
    Ok(Run {
        report: ConcavityReport::from_samples(trace),
        extras,
        curve: None,
    })
}

fn run_search(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let kind = cfg
        .family
        .ok_or_else(|| anyhow!("counterexample-search needs field `family`"))?;
    let mut fam = SearchFamily::new(kind, ev, cfg.s()?, cfg.seed.unwrap_or(0))?;
    if let Some(r) = cfg.restarts {
        fam.restarts = r;
    }
    let found = violation_search(&fam, cfg.budget.unwrap_or(20_000))?;
    let mut extras = match serde_json::to_value(&found)? {
        Value::Object(m) => m,
        _ => unreachable!("struct serializes to an object"),
    };
    extras.remove("scan");
    Ok(Run {
        report: found.scan,
        extras,
        curve: None,
    })
}

fn run_parallel(cfg: &ScenarioConfig) -> Result<Run> {
    let ev = evaluator(cfg)?;
    let s = sets(cfg, 2)?;
    let ts = required_t_grid(cfg)?;
    let curve = parallel_curve(&ev, &s[0], &s[1], &ts)?;
    let report = check_parallel_concavity(&curve, cfg.s()?)?;
    let mut extras = Map::new();
    extras.insert("nondecreasing".into(), json!(curve.is_nondecreasing()));
    Ok(Run {
        report,
        extras,
        curve: Some((curve.ts, curve.values)),
    })
}

/// Applies command-line overrides on top of a scenario.
pub struct Overrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub section_grid: Option<usize>,
    pub seed: Option<u64>,
    pub lambda_grid: Option<String>,
    pub t_grid: Option<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) -> Result<()> {
        use crate::scenario::GridSpec;
        if self.abs_tol.is_some() || self.rel_tol.is_some() || self.section_grid.is_some() {
            let mut p = cfg.policy.unwrap_or_default();
            if let Some(v) = self.abs_tol {
                p.abs_tol = v;
            }
            if let Some(v) = self.rel_tol {
                p.rel_tol = v;
            }
            if let Some(v) = self.section_grid {
                p.section_grid = v;
            }
            p.validate().context("tolerance flags")?;
            cfg.policy = Some(p);
        }
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(g) = &self.lambda_grid {
            crate::scenario::parse_range(g).context("--lambda-grid")?;
            cfg.lambda_grid = Some(GridSpec::Range(g.clone()));
        }
        if let Some(g) = &self.t_grid {
            crate::scenario::parse_range(g).context("--t-grid")?;
            cfg.t_grid = Some(GridSpec::Range(g.clone()));
        }
        Ok(())
    }
}
