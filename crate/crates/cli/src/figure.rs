//! Convergence figures: each is a set of curves run over several seeds, then
//! written as a long-format CSV with per-iteration medians and an SVG plot.

use std::collections::BTreeMap;
use std::path::PathBuf;

use iimhhl::hhl::ReadoutMode;
use iimhhl::refine::{IterationTrace, ShiftStrategy};
use rayon::prelude::*;

use crate::args::{FigureArgs, FigureId};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, FigureRow, OutputSet, Plot, Series, FIGURE_HEADER};
use crate::runs::{median, RunSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum XAxis {
    Iteration,
    Measurements,
}

#[derive(Debug, Clone)]
struct Curve {
    label: String,
    spec: RunSpec,
}

#[derive(Debug, Clone)]
struct FigurePlan {
    name: &'static str,
    title: String,
    p: usize,
    x_axis: XAxis,
    curves: Vec<Curve>,
}

/// Shot counts for the single-solve shot sweep.
pub const SHOT_LEVELS: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

fn strategy_curves(kappa: f64, solution: usize, p: usize, shots: u64, args: &FigureArgs, pre_shift: Option<Vec<f64>>) -> Vec<Curve> {
    let base = |strategy| RunSpec {
        iterations: args.iters,
        evolution: args.evolution.into(),
        slices: args.slices,
        pre_shift: pre_shift.clone(),
        ..RunSpec::new(kappa, solution, p, shots, strategy)
    };
    let mut curves: Vec<Curve> = ShiftStrategy::ALL
        .iter()
        .map(|&s| Curve {
            label: s.to_string(),
            spec: base(s),
        })
        .collect();
    curves.push(Curve {
        label: "statevector".into(),
        spec: RunSpec {
            readout: ReadoutMode::Statevector,
            ..base(ShiftStrategy::None)
        },
    });
    curves
}

fn plan(args: &FigureArgs) -> FigurePlan {
    let shift_plan = |name, kappa: f64, solution, p, shots: u64, pre: Option<Vec<f64>>| FigurePlan {
        name,
        title: format!(
            "kappa={kappa}, x{solution}{}, p={p}, {shots} shots per iteration",
            if pre.is_some() { " + [2,2,2,2]" } else { "" }
        ),
        p,
        x_axis: XAxis::Iteration,
        curves: strategy_curves(kappa, solution, p, shots, args, pre),
    };
    match args.id {
        FigureId::F1 => {
            let mut curves: Vec<Curve> = SHOT_LEVELS
                .iter()
                .map(|&shots| Curve {
                    label: "sampled".into(),
                    spec: RunSpec {
                        iterations: 1,
                        evolution: args.evolution.into(),
                        slices: args.slices,
                        ..RunSpec::new(10.0, 1, 9, shots, ShiftStrategy::None)
                    },
                })
                .collect();
            curves.push(Curve {
                label: "statevector".into(),
                spec: RunSpec {
                    iterations: 1,
                    readout: ReadoutMode::Statevector,
                    evolution: args.evolution.into(),
                    slices: args.slices,
                    ..RunSpec::new(10.0, 1, 9, 1, ShiftStrategy::None)
                },
            });
            FigurePlan {
                name: "f1",
                title: "single HHL, kappa=10, x1, p=9".into(),
                p: 9,
                x_axis: XAxis::Measurements,
                curves,
            }
        }
        FigureId::F2 => shift_plan("f2", 10.0, 1, 4, 1000, None),
        FigureId::F3 => shift_plan("f3", 10.0, 2, 4, 1000, None),
        FigureId::F4 => shift_plan("f4", 100.0, 1, 7, 10_000, None),
        FigureId::F5 => shift_plan("f5", 100.0, 2, 7, 10_000, None),
        FigureId::F6 => shift_plan("f6", 10.0, 2, 4, 1000, Some(vec![2.0; 4])),
        FigureId::F7 => {
            let curves = [1000u64, 10_000]
                .iter()
                .map(|&shots| Curve {
                    label: format!("abs-sqrt-ratio, {shots} shots"),
                    spec: RunSpec {
                        iterations: args.iters,
                        evolution: args.evolution.into(),
                        slices: args.slices,
                        ..RunSpec::new(10.0, 1, 4, shots, ShiftStrategy::AbsSqrtRatio)
                    },
                })
                .collect();
            FigurePlan {
                name: "f7",
                title: "error vs total measurements, kappa=10, x1, p=4".into(),
                p: 4,
                x_axis: XAxis::Measurements,
                curves,
            }
        }
    }
}

#[derive(Debug)]
pub struct FigureReport {
    pub rows: usize,
    pub files: Vec<PathBuf>,
}

struct CurveResult {
    label: String,
    /// Per-iteration median error and median cumulative measurements.
    medians: Vec<(usize, f64, u64)>,
}

pub fn figure(args: &FigureArgs) -> CliResult<FigureReport> {
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    if args.iters == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    if args.slices == 0 {
        return Err(CliError::Usage("--slices must be at least 1".into()));
    }
    let plan = plan(args);
    let seeds: Vec<u64> = (0..args.repeats as u64).map(|i| args.seed + i).collect();

    let jobs: Vec<(usize, u64)> = (0..plan.curves.len())
        .flat_map(|c| seeds.iter().map(move |&s| (c, s)))
        .collect();
    let traces: Vec<IterationTrace> = jobs
        .par_iter()
        .map(|&(c, seed)| {
            let spec = RunSpec {
                seed,
                ..plan.curves[c].spec.clone()
            };
            spec.run()
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut results = Vec::new();
    for (c, curve) in plan.curves.iter().enumerate() {
        let runs: Vec<(u64, &IterationTrace)> = jobs
            .iter()
            .zip(&traces)
            .filter(|((jc, _), _)| *jc == c)
            .map(|((_, s), t)| (*s, t))
            .collect();
        for (seed, trace) in &runs {
            for r in &trace.records {
                rows.push(FigureRow {
                    figure: plan.name.into(),
                    strategy: curve.label.clone(),
                    seed: seed.to_string(),
                    iteration: r.iteration,
                    rel_error: r.rel_error.unwrap_or(f64::NAN),
                    cumulative_measurements: r.cumulative_measurements,
                });
            }
        }
        let len = runs.iter().map(|(_, t)| t.len()).min().unwrap_or(0);
        let medians: Vec<(usize, f64, u64)> = (0..len)
            .map(|m| {
                let mut errs: Vec<f64> = runs
                    .iter()
                    .map(|(_, t)| t.records[m].rel_error.unwrap_or(f64::NAN))
                    .collect();
                let mut meas: Vec<f64> = runs
                    .iter()
                    .map(|(_, t)| t.records[m].cumulative_measurements as f64)
                    .collect();
                (m, median(&mut errs), median(&mut meas).round() as u64)
            })
            .collect();
        for &(m, err, meas) in &medians {
            rows.push(FigureRow {
                figure: plan.name.into(),
                strategy: curve.label.clone(),
                seed: "median".into(),
                iteration: m,
                rel_error: err,
                cumulative_measurements: meas,
            });
        }
        results.push(CurveResult {
            label: curve.label.clone(),
            medians,
        });
    }

    let svg = build_plot(&plan, &results).to_svg();
    let csv = csv_bytes(&FIGURE_HEADER, &rows)?;
    let mut out = OutputSet::new();
    out.write(&args.out.join(format!("{}.csv", plan.name)), &csv)?;
    out.write(&args.out.join(format!("{}.svg", plan.name)), svg.as_bytes())?;
    Ok(FigureReport {
        rows: rows.len(),
        files: out.commit(),
    })
}

fn build_plot(plan: &FigurePlan, results: &[CurveResult]) -> Plot {
    let mut grouped: BTreeMap<usize, Series> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut flat: Vec<(String, f64)> = Vec::new();
    for res in results {
        let pos = match order.iter().position(|l| *l == res.label) {
            Some(i) => i,
            None => {
                order.push(res.label.clone());
                order.len() - 1
            }
        };
        let series = grouped.entry(pos).or_insert_with(|| Series {
            name: res.label.clone(),
            points: Vec::new(),
        });
        for &(m, err, meas) in &res.medians {
            match plan.x_axis {
                XAxis::Iteration => series.points.push(((m + 1) as f64, err)),
                // statevector runs take no shots, drawn as a flat reference line
                XAxis::Measurements if meas == 0 => flat.push((res.label.clone(), err)),
                XAxis::Measurements => series.points.push((meas as f64, err)),
            }
        }
    }
    let xs: Vec<f64> = grouped.values().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    for (label, err) in flat {
        if let Some(s) = grouped.values_mut().find(|s| s.name == label) {
            if lo.is_finite() {
                s.points = vec![(lo, err), (hi, err)];
            }
        }
    }
    let mut series: Vec<Series> = grouped.into_values().collect();
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Plot {
        title: plan.title.clone(),
        x_label: match plan.x_axis {
            XAxis::Iteration => "iteration".into(),
            XAxis::Measurements => "total measurements".into(),
        },
        y_label: "relative error (median over seeds)".into(),
        log_x: plan.x_axis == XAxis::Measurements,
        series,
        guide: Some((format!("resolution 2^-{}", plan.p), 2f64.powi(-(plan.p as i32)))),
    }
}
