//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turbine_inspect::control::{pid_step, simulate_flight, simulate_route, PidGains, PidState, WindModel};
use turbine_inspect::geometry::{compute_zone, Point3};
use turbine_inspect::metrics::{compare_report, inspection_time, parse_metrics_csv, MetricsReport};
use turbine_inspect::pipeline::{angle_sweep, run_pipeline, write_outputs, OutputFormat};
use turbine_inspect::scenario::{load_scenario, ImagingParams, Scenario};
use turbine_inspect::trajectory::{plan_return, UavRoute};
use turbine_inspect::vision::{
    binarize, classify_tilt, contour_area, filter_by_area, find_contours, min_area_rect_points,
    BinaryMask, ComponentKind, Segment, LABEL_TOWER,
};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < budget, format!("took {took:.2?}, budget {budget:?}"))?;
    Ok(took)
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn zone_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let n = rng.random_range(1..=8);
        let tips: Vec<Point3> = (0..n)
            .map(|_| {
                Point3::new(
                    rng.random_range(-200.0..200.0),
                    rng.random_range(-200.0..200.0),
                    rng.random_range(0.0..250.0),
                )
            })
            .collect();
        let zone = compute_zone(&tips).map_err(|e| e.to_string())?;
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for t in &tips {
            sx += t.x;
            sy += t.y;
            sz += t.z;
        }
        let c = (sx / n as f64, sy / n as f64, sz / n as f64);
        let r = tips
            .iter()
            .map(|t| ((t.x - c.0).powi(2) + (t.y - c.1).powi(2) + (t.z - c.2).powi(2)).sqrt())
            .fold(0.0, f64::max);
        let dc = (zone.center.x - c.0).abs().max((zone.center.y - c.1).abs()).max((zone.center.z - c.2).abs());
        check(dc <= 1e-9, format!("case {case}: center off by {dc:e}"))?;
        check((zone.radius - r).abs() <= 1e-9, format!("case {case}: radius off"))?;
        check(tips.iter().all(|&t| zone.contains(t)), format!("case {case}: tip outside zone"))?;
    }
    let took = within_budget(start, Duration::from_secs(1))?;
    Ok(format!("1000 tip sets in {took:.2?}"))
}

/// Smallest bounding-box area over a fixed-step rotation sweep.
fn sweep_min_area(points: &[(f64, f64)], step_deg: f64) -> f64 {
    let steps = (90.0 / step_deg).round() as usize;
    (0..steps)
        .map(|i| {
            let a = (i as f64 * step_deg).to_radians();
            let (c, s) = (a.cos(), a.sin());
            let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for &(x, y) in points {
                let (u, v) = (x * c + y * s, -x * s + y * c);
                x0 = x0.min(u);
                x1 = x1.max(u);
                y0 = y0.min(v);
                y1 = y1.max(v);
            }
            (x1 - x0) * (y1 - y0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn rectangle_corners(cx: f64, cy: f64, w: f64, h: f64, deg: f64) -> Vec<(f64, f64)> {
    let (c, s) = (deg.to_radians().cos(), deg.to_radians().sin());
    [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(a, b)| {
            let (u, v) = (a * w / 2.0, b * h / 2.0);
            (cx + u * c - v * s, cy + u * s + v * c)
        })
        .collect()
}

fn min_area_rect_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.random_range(3..60);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(-100.0..100.0), rng.random_range(-50.0..50.0)))
            .collect();
        let rect = min_area_rect_points(&pts).ok_or(format!("case {case}: no rectangle"))?;
        let oracle = sweep_min_area(&pts, 0.05);
        let ratio = rect.area() / oracle;
        worst = worst.max(ratio);
        check(ratio <= 1.005, format!("case {case}: area ratio {ratio}"))?;
    }
    for (deg, label) in [(0.0, "axis-aligned"), (30.0, "30 deg")] {
        let mut pts = rectangle_corners(12.0, -4.0, 40.0, 10.0, deg);
        pts.extend(rectangle_corners(12.0, -4.0, 20.0, 4.0, deg));
        let r = min_area_rect_points(&pts).ok_or("no rectangle")?;
        check(
            (r.width - 40.0).abs() <= 1e-6 && (r.height - 10.0).abs() <= 1e-6,
            format!("{label}: dims {} x {}", r.width, r.height),
        )?;
        let da = (r.angle - deg).rem_euclid(180.0);
        check(da.min(180.0 - da) <= 0.01, format!("{label}: angle {}", r.angle))?;
    }
    let took = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("200 sets, worst area ratio {worst:.6}, exact rectangles recovered, {took:.2?}"))
}

fn near_class_boundary(theta: f64) -> bool {
    [30.0, 60.0, 120.0, 150.0].iter().any(|b| (theta - b).abs() < 2.0)
}

fn angle_recovery() -> Outcome {
    let start = Instant::now();
    let steps = angle_sweep(180, &ImagingParams::default()).map_err(|e| e.to_string())?;
    let within = steps.iter().filter(|s| s.error <= 2.0).count();
    let worst = steps.iter().map(|s| s.error).fold(0.0, f64::max);
    check(
        within as f64 >= 0.99 * steps.len() as f64,
        format!("only {within}/180 within 2 deg (max {worst:.3})"),
    )?;
    let mut checked = 0;
    for s in steps.iter().filter(|s| !near_class_boundary(s.truth)) {
        checked += 1;
        let truth_class = classify_tilt(s.truth).map_err(|e| e.to_string())?;
        check(
            truth_class == s.estimated_class,
            format!("class mismatch at {}: {} vs {}", s.truth, truth_class, s.estimated_class),
        )?;
    }
    let took = within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "{within}/180 within 2 deg (max {worst:.3}), {checked} non-boundary classes match, {took:.2?}"
    ))
}

fn random_mask(rng: &mut ChaCha8Rng) -> BinaryMask {
    let (w, h) = (rng.random_range(4..48), rng.random_range(4..48));
    let blobs: Vec<(f64, f64, f64)> = (0..rng.random_range(1..5))
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(0.5..8.0),
            )
        })
        .collect();
    let noise = rng.random_range(0.0..0.15);
    let mut m = BinaryMask::from_fn(w, h, |x, y| {
        blobs
            .iter()
            .any(|&(cx, cy, r)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r)
    });
    for y in 0..h {
        for x in 0..w {
            if rng.random_bool(noise) {
                m.set(x, y, !m.get(x, y));
            }
        }
    }
    if m.is_empty() {
        m.set(0, 0, true);
    }
    m
}

fn shoelace(points: &[(i64, i64)]) -> f64 {
    let n = points.len();
    let mut twice = 0i64;
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        twice += a.0 * b.1 - b.0 * a.1;
    }
    twice.abs() as f64 / 2.0
}

fn mask_pipeline_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut contours_seen = 0;
    for case in 0..500 {
        let mask = random_mask(&mut rng);
        let set = mask.count_ones();
        let segment = Segment::new(ComponentKind::Tower, LABEL_TOWER, mask.clone()).map_err(|e| e.to_string())?;
        let bin = binarize(&segment);
        check(bin.count_ones() == set, format!("case {case}: popcount {} vs {set}", bin.count_ones()))?;
        check(bin == mask, format!("case {case}: binarized mask differs"))?;
        let contours = find_contours(&bin);
        for c in &contours {
            contours_seen += 1;
            check(c.is_closed(), format!("case {case}: open contour"))?;
            let pts: Vec<(i64, i64)> = c.points.iter().map(|p| (p.x, p.y)).collect();
            let area = shoelace(&pts);
            check(contour_area(c) == area, format!("case {case}: shoelace mismatch"))?;
            check(
                filter_by_area(vec![c.clone()], area).is_empty(),
                format!("case {case}: contour kept at area == threshold"),
            )?;
            if area > 0.0 {
                check(
                    filter_by_area(vec![c.clone()], area - 0.25).len() == 1,
                    format!("case {case}: contour dropped below threshold"),
                )?;
            }
        }
    }
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!("500 masks, {contours_seen} contours, {took:.2?}"))
}

fn straight_leg(length: f64, speed: f64) -> UavRoute {
    UavRoute {
        uav_id: 0,
        origin: Point3::ZERO,
        turbines: vec![],
        segments: vec![plan_return(Point3::ZERO, Point3::new(length, 0.0, 0.0), length / speed).unwrap()],
    }
}

/// Max and mean deviation over the last fifth of a log.
fn tail_deviation(log: &turbine_inspect::control::FlightLog) -> (f64, f64) {
    let t_end = log.samples.last().unwrap().t;
    let tail: Vec<f64> = log
        .samples
        .iter()
        .filter(|s| s.t >= 0.8 * t_end)
        .map(|s| s.position.distance(s.reference))
        .collect();
    (
        tail.iter().copied().fold(0.0, f64::max),
        tail.iter().sum::<f64>() / tail.len() as f64,
    )
}

fn pid_behavior() -> Outcome {
    let start = Instant::now();
    let e = |x| Point3::new(x, 0.0, 0.0);
    let (u, _) = pid_step(&PidGains::new(2.0, 0.0, 0.0), &PidState::default(), e(1.5), 0.05).map_err(|e| e.to_string())?;
    check(u == Point3::new(3.0, 0.0, 0.0), format!("pure P gave {u:?}"))?;
    let (u, _) = pid_step(&PidGains::default(), &PidState::default(), Point3::ZERO, 0.05).map_err(|e| e.to_string())?;
    check(u == Point3::ZERO, "zero error gave non-zero output")?;
    let mut state = PidState::default();
    let mut u = Point3::ZERO;
    for _ in 0..10 {
        (u, state) = pid_step(&PidGains::new(0.0, 1.0, 0.0), &state, e(1.0), 0.1).map_err(|e| e.to_string())?;
    }
    check((u.x - 1.0).abs() < 1e-12, format!("integral example gave {}", u.x))?;

    let leg = straight_leg(200.0, 4.0);
    let crosswind = WindModel::constant(Point3::new(0.0, 5.0, 0.0));
    let pid = simulate_route(&leg, &PidGains::default(), &crosswind, 0.05).map_err(|e| e.to_string())?;
    let (pid_max, _) = tail_deviation(&pid);
    check(pid_max <= 0.1, format!("PID steady-state deviation {pid_max:.4} m"))?;
    let pd = simulate_route(&leg, &PidGains::new(1.2, 0.0, 0.4), &crosswind, 0.05).map_err(|e| e.to_string())?;
    let (_, pd_mean) = tail_deviation(&pd);
    check(pd_mean >= 0.5, format!("ki = 0 steady-state deviation only {pd_mean:.4} m"))?;

    let gusty = WindModel {
        mean: Point3::new(3.0, 2.0, 0.0),
        gust_amplitude: 1.5,
        gust_correlation_time: 2.0,
        seed: 42,
    };
    let scenario = load_scenario(scenario_path("three_turbines_weak_wind.toml")).map_err(|e| e.to_string())?;
    let plan = run_pipeline(&scenario).map_err(|e| e.to_string())?.plan;
    let dev = |g: &PidGains| -> Result<f64, String> {
        let logs = simulate_flight(&plan, g, &gusty, 0.05).map_err(|e| e.to_string())?;
        Ok(turbine_inspect::metrics::pooled_mean_deviation(&logs))
    };
    let (on, off) = (dev(&PidGains::default())?, dev(&PidGains::zero())?);
    check(on <= 0.5 * off, format!("gusty: PID {on:.3} m vs baseline {off:.3} m"))?;
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "steady state {pid_max:.4} m (ki=0: {pd_mean:.3} m), gusty {on:.3} vs {off:.1} m ({:.1}%), {took:.2?}",
        100.0 * on / off
    ))
}

fn coverage_target() -> Outcome {
    let start = Instant::now();
    let weak = load_scenario(scenario_path("three_turbines_weak_wind.toml")).map_err(|e| e.to_string())?;
    let mut calm = weak.clone();
    calm.wind = WindModel::calm();
    let mut parts = Vec::new();
    for (name, s) in [("calm", &calm), ("weak wind", &weak)] {
        let r = run_pipeline(s).map_err(|e| e.to_string())?.report;
        check(r.blade_coverage_pct >= 95.0, format!("{name}: coverage {:.2}%", r.blade_coverage_pct))?;
        parts.push(format!("{name} {:.2}%", r.blade_coverage_pct));
    }
    let took = within_budget(start, Duration::from_secs(60))?;
    Ok(format!("{}, {took:.2?}", parts.join(", ")))
}

fn fleet_time() -> Outcome {
    let fleet = load_scenario(scenario_path("three_turbines_weak_wind.toml")).map_err(|e| e.to_string())?;
    check(fleet.uav_count == 3 && fleet.turbines.len() == 3, "scenario is not 3 turbines / 3 UAVs")?;
    let solo = Scenario {
        uav_count: 1,
        ..fleet.clone()
    };
    let fleet_out = run_pipeline(&fleet).map_err(|e| e.to_string())?;
    let solo_out = run_pipeline(&solo).map_err(|e| e.to_string())?;
    let per_uav: Vec<f64> = fleet_out
        .logs
        .iter()
        .map(|l| (l.samples.last().unwrap().t - l.samples[0].t) / 60.0)
        .collect();
    let max = per_uav.iter().copied().fold(0.0, f64::max);
    let t3 = fleet_out.report.total_time_min;
    check(t3 == max, format!("fleet time {t3} != max per-UAV {max}"))?;
    check(inspection_time(&fleet_out.logs) == t3, "report time differs from inspection_time")?;
    let t1 = solo_out.report.total_time_min;
    check(t3 < 0.4 * t1, format!("3 UAVs {t3:.2} min vs 1 UAV {t1:.2} min"))?;
    Ok(format!("3 UAVs {t3:.2} min = max of {per_uav:.2?}; 1 UAV {t1:.2} min ({:.1}%)", 100.0 * t3 / t1))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut names: Vec<_> = std::fs::read_dir(scenario_path(""))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    names.sort();
    let mut files = 0;
    for path in &names {
        let s = load_scenario(path).map_err(|e| e.to_string())?;
        let stem = path.file_stem().unwrap().to_string_lossy();
        for format in [OutputFormat::Csv, OutputFormat::JsonLines] {
            let mut runs = Vec::new();
            for run in 0..2 {
                let dir = tmp.path().join(format!("{stem}-{format:?}-{run}"));
                let out = run_pipeline(&s).map_err(|e| e.to_string())?;
                write_outputs(&dir, &s, &out, format).map_err(|e| e.to_string())?;
                runs.push(read_dir_bytes(&dir));
            }
            check(runs[0] == runs[1], format!("{stem} ({format:?}): outputs differ"))?;
            files += runs[0].len();
        }
    }
    Ok(format!("{} scenarios, {files} files byte-identical across runs", names.len()))
}

fn comparison_arithmetic() -> Outcome {
    let row = |t: f64, l: f64, c: f64, d: f64, uavs, ops| MetricsReport {
        total_time_min: t,
        total_length_m: l,
        blade_coverage_pct: c,
        mean_deviation_m: d,
        uav_count: uavs,
        operator_count: ops,
    };
    // (manual, automated, expected time and length change, rounded to 0.1)
    let pairs = [
        (row(90.0, 1400.0, 88.0, 3.0, 1, 3), row(8.0, 1100.0, 95.0, 1.0, 3, 0), -91.1, -21.4),
        (row(35.0, 600.0, 82.0, 5.0, 1, 1), row(7.0, 480.0, 92.0, 1.5, 1, 0), -80.0, -20.0),
        (row(50.0, 1000.0, 86.0, 3.5, 1, 2), row(9.0, 800.0, 94.0, 1.2, 1, 0), -82.0, -20.0),
        (row(150.0, 2300.0, 89.0, 2.5, 1, 5), row(12.0, 1900.0, 96.0, 0.6, 1, 0), -92.0, -17.4),
    ];
    let labels = vec!["manual".to_string(), "automated".to_string()];
    for (manual, auto, time, length) in pairs {
        let c = compare_report(&[manual, auto], &labels).map_err(|e| e.to_string())?;
        let ch = c.rows[1].change_pct;
        let (t, l) = (ch[0].ok_or("no time change")?, ch[1].ok_or("no length change")?);
        check(
            (t - time).abs() < 0.05 && (l - length).abs() < 0.05,
            format!("{} -> {}: got {t:.2}% / {l:.2}%", manual.total_time_min, auto.total_time_min),
        )?;
    }
    let read = |name: &str| -> Result<MetricsReport, String> {
        let text = std::fs::read_to_string(scenario_path("reference").join(name)).map_err(|e| e.to_string())?;
        parse_metrics_csv(&text).map_err(|e| e.to_string())?.into_iter().next().ok_or("empty".into())
    };
    let c = compare_report(
        &[read("manual_three_turbines.csv")?, read("automated_three_turbines.csv")?],
        &labels,
    )
    .map_err(|e| e.to_string())?;
    let csv = c.to_csv();
    check(csv.contains("-91.111") && csv.contains("-21.429"), "bundled reference tables disagree")?;
    Ok("90->8 min -91.1%, 1400->1100 m -21.4%, all four scenario pairs match".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 zone correctness", zone_correctness),
        ("2 min-area rectangle oracle", min_area_rect_oracle),
        ("3 angle recovery", angle_recovery),
        ("4 mask/contour/filter properties", mask_pipeline_properties),
        ("5 PID behavior", pid_behavior),
        ("6 coverage target", coverage_target),
        ("7 fleet time semantics", fleet_time),
        ("8 determinism", determinism),
        ("9 comparison arithmetic", comparison_arithmetic),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
