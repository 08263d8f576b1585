//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use triple_bubbles::classify::{classify_triple, DEFAULT_TIE_THRESHOLD};
use triple_bubbles::nested::{
    build_3123, build_32123, build_double, build_triple, exists_2313, nested_2313_geometric, Pair,
    Triple, TypeLabel,
};
use triple_bubbles::oracle::{admissible_orderings, global_bruteforce, minimize_ordering, ten_orderings};
use triple_bubbles::standard::{solve_standard, DEFAULT_TOL};
use triple_bubbles::sweep::AxisSpec;
use triple_bubbles::{sweep_frame, DensityProfile};

type Outcome = Result<String, String>;

/// Published perimeters; `None` marks "Not exist".
const TABLE: [((f64, f64, f64), [Option<f64>; 4], TypeLabel); 4] = [
    ((5.0, 100.0, 500.0), [Some(1479.6294773), Some(1667.8737745), None, Some(1661.4875997)], TypeLabel::T213),
    ((5.0, 40.0, 2000.0), [Some(5608.7794571), Some(5467.6249803), None, Some(5469.4347271)], TypeLabel::T3123),
    (
        (0.01, 100.0, 1500.0),
        [Some(4271.5195673), Some(4351.3210336), Some(4271.5168203), Some(4335.5242035)],
        TypeLabel::T2313,
    ),
    ((2.0, 80.0, 2500.0), [Some(7167.5032872), Some(7080.5694767), None, Some(7071.1211666)], TypeLabel::T32123),
];

fn densities() -> [DensityProfile; 2] {
    [DensityProfile::f1(), DensityProfile::f2()]
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let elapsed = started.elapsed();
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

/// Sorted triple with each volume log-uniform on `[lo, hi]`.
fn log_uniform_triple(rng: &mut impl Rng, lo: f64, hi: f64) -> Triple {
    let mut v: Vec<f64> = (0..3).map(|_| (rng.gen_range(lo.ln()..hi.ln())).exp()).collect();
    v.sort_by(f64::total_cmp);
    Triple::new(v[0], v[1], v[2]).unwrap()
}

fn table_reproduction() -> Outcome {
    let started = Instant::now();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = triple_bubbles::cli::run(
        ["triple-bubbles", "--format", "csv", "table", "--density", "f2"],
        &mut out,
        &mut err,
    );
    if code != 0 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    let text = String::from_utf8(out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    if rows.len() != 4 {
        return Err(format!("expected 4 rows, got {}", rows.len()));
    }
    let mut finite = 0;
    let mut worst: f64 = 0.0;
    for (row, (_, published, _)) in rows.iter().zip(TABLE.iter()) {
        let fields: Vec<&str> = row.split(',').collect();
        for (cell, expected) in fields[3..7].iter().zip(published) {
            match expected {
                None if *cell == "Not exist" => {}
                None => return Err(format!("row `{row}`: expected Not exist, got {cell}")),
                Some(p) => {
                    let got: f64 = cell.parse().map_err(|_| format!("row `{row}`: bad cell {cell}"))?;
                    let diff = (got - p).abs();
                    worst = worst.max(diff);
                    if diff > 1e-3 {
                        return Err(format!("row `{row}`: {got} vs published {p}"));
                    }
                    finite += 1;
                }
            }
        }
    }
    if finite != 13 {
        return Err(format!("expected 13 finite perimeters, got {finite}"));
    }
    within(Duration::from_secs(1), started)?;
    Ok(format!("13 perimeters, max deviation {worst:.2e}; Not exist on rows 1, 2, 4"))
}

fn winner_agreement() -> Outcome {
    let d = DensityProfile::f2();
    let mut notes = Vec::new();
    for (i, ((a, b, c), _, expected)) in TABLE.iter().enumerate() {
        let t = Triple::new(*a, *b, *c).unwrap();
        let cl = classify_triple(&d, t, DEFAULT_TOL, DEFAULT_TIE_THRESHOLD).map_err(|e| e.to_string())?;
        if cl.winner != *expected {
            return Err(format!("{t}: winner {} expected {expected}", cl.winner));
        }
        if !(cl.margin > 1e-4) {
            return Err(format!("{t}: margin {} not above 1e-4", cl.margin));
        }
        if i == 2 {
            if cl.runner_up != Some(TypeLabel::T213) || (cl.margin - 2.747e-3).abs() > 1e-5 {
                return Err(format!("{t}: runner-up {:?} margin {}", cl.runner_up, cl.margin));
            }
        }
        notes.push(format!("{}({:.2e})", cl.winner, cl.margin));
    }
    Ok(notes.join(" "))
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for d in densities() {
        for _ in 0..20 {
            let t = log_uniform_triple(&mut rng, 0.01, 3000.0);
            for (label, ordering) in admissible_orderings() {
                let Some(b) = build_triple(&d, label, t, DEFAULT_TOL).map_err(|e| e.to_string())? else {
                    continue;
                };
                let m = minimize_ordering(&d, &ordering, &t.as_array(), 512).map_err(|e| e.to_string())?;
                let rel = (m.perimeter - b.perimeter).abs() / b.perimeter;
                worst = worst.max(rel);
                checks += 1;
                if rel > 1e-3 {
                    return Err(format!(
                        "{} {t} {label}: oracle {} vs equilibrium {}",
                        d.name(),
                        m.perimeter,
                        b.perimeter
                    ));
                }
            }
        }
    }
    within(Duration::from_secs(120), started)?;
    Ok(format!("{checks} type/triple pairs, max relative gap {worst:.2e}, {:?}", started.elapsed()))
}

fn four_type_theorem() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let orderings = ten_orderings();
    let mut winners = std::collections::BTreeMap::new();
    let mut worst_advantage = f64::NEG_INFINITY;
    for d in densities() {
        let mut accepted = 0;
        while accepted < 10 {
            let t = log_uniform_triple(&mut rng, 0.01, 3000.0);
            let cl = classify_triple(&d, t, DEFAULT_TOL, DEFAULT_TIE_THRESHOLD).map_err(|e| e.to_string())?;
            if !cl.decisive {
                continue;
            }
            accepted += 1;
            let bf = global_bruteforce(&d, &t.as_array(), 512, &orderings).map_err(|e| e.to_string())?;
            let shape = bf.winning_ordering().shape();
            if shape != Some(cl.winner) {
                return Err(format!(
                    "{} {t}: brute force picked {} ({shape:?}), classifier {}",
                    d.name(),
                    bf.winning_ordering(),
                    cl.winner
                ));
            }
            let advantage = bf.non_admissible_advantage().unwrap();
            worst_advantage = worst_advantage.max(advantage);
            if advantage > 1e-4 {
                return Err(format!("{} {t}: a non-admissible ordering wins by {advantage}", d.name()));
            }
            *winners.entry(cl.winner.to_string()).or_insert(0) += 1;
        }
    }
    within(Duration::from_secs(300), started)?;
    Ok(format!(
        "20 decisive triples, winners {winners:?}, best non-admissible never closer than {:.3e}, {:?}",
        -worst_advantage,
        started.elapsed()
    ))
}

fn equilibrium_residual() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut check = |d: &DensityProfile, volumes: &[f64]| -> Result<(), String> {
        let b = solve_standard(d, volumes, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let scale = b.derivative_scale(d);
        let ratio = b.residual.abs() / scale;
        worst = worst.max(ratio);
        count += 1;
        if b.residual.abs() > 1e-9 * scale {
            return Err(format!("{} {volumes:?}: residual {} vs scale {scale}", d.name(), b.residual));
        }
        Ok(())
    };
    for d in densities() {
        for _ in 0..1000 {
            let n = rng.gen_range(1..=5);
            let volumes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01f64.ln()..3000f64.ln()).exp()).collect();
            check(&d, &volumes)?;
        }
        for ((a, b, c), _, _) in TABLE {
            let t = Triple::new(a, b, c).unwrap();
            for label in TypeLabel::TRIPLES {
                if let Some(nb) = build_triple(&d, label, t, DEFAULT_TOL).map_err(|e| e.to_string())? {
                    for part in &nb.constituents {
                        check(&d, &part.volumes)?;
                    }
                }
            }
        }
    }
    Ok(format!("{count} solutions, max |residual|/max|f'| = {worst:.2e}"))
}

fn existence_consistency() -> Outcome {
    let d = DensityProfile::f2();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut exist = 0;
    for _ in 0..1000 {
        let t = log_uniform_triple(&mut rng, 0.01, 3000.0);
        let closed = exists_2313(&d, t);
        let geometric = nested_2313_geometric(&d, t, DEFAULT_TOL).map_err(|e| e.to_string())?;
        if closed != geometric {
            return Err(format!("{t}: inequality says {closed}, geometry says {geometric}"));
        }
        exist += closed as usize;
    }
    Ok(format!("1000 triples agree ({exist} with a 2313 equilibrium)"))
}

fn tie_line_invariance() -> Outcome {
    let d = DensityProfile::f2();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let v1 = rng.gen_range(0.01f64.ln()..100f64.ln()).exp();
        let v2 = v1 * rng.gen_range(1.0..50.0);
        let p = Pair::new(v1, v2).unwrap();
        let double = build_double(&d, p, TypeLabel::D12, DEFAULT_TOL).map_err(|e| e.to_string())?.perimeter
            - build_double(&d, p, TypeLabel::D212, DEFAULT_TOL).map_err(|e| e.to_string())?.perimeter;
        let base = v2 * rng.gen_range(1.0..5.0);
        let mut ties = Vec::new();
        for k in 0..10 {
            let v3 = base * 10f64.powf(k as f64 / 9.0);
            let t = Triple::new(v1, v2, v3).unwrap();
            ties.push(
                build_3123(&d, t, DEFAULT_TOL).map_err(|e| e.to_string())?.perimeter
                    - build_32123(&d, t, DEFAULT_TOL).map_err(|e| e.to_string())?.perimeter,
            );
        }
        let scale = double.abs();
        for tie in &ties {
            let rel = (tie - ties[0]).abs().max((tie - double).abs()) / scale;
            worst = worst.max(rel);
            if rel > 1e-9 {
                return Err(format!("({v1}, {v2}): tie {tie} vs first {} vs double {double}", ties[0]));
            }
        }
    }
    Ok(format!("5 pairs x 10 values of V3, max relative spread {worst:.2e}"))
}

fn phenomenology() -> Outcome {
    let v2 = AxisSpec::linear(0.01, 120.0, 200).unwrap();
    let v3 = AxisSpec::linear(0.01, 3000.0, 200).unwrap();
    let cases = [
        (DensityProfile::f2(), 0.01, true),
        (DensityProfile::f2(), 6.0, false),
        (DensityProfile::f1(), 0.5, false),
        (DensityProfile::f1(), 6.0, false),
    ];
    let mut notes = Vec::new();
    for (d, v1, want_green) in cases {
        let started = Instant::now();
        let frame = sweep_frame(&d, v1, &v2, &v3, DEFAULT_TIE_THRESHOLD, DEFAULT_TOL).map_err(|e| e.to_string())?;
        within(Duration::from_secs(180), started)?;
        let green = frame.count_winner(TypeLabel::T2313);
        if (green > 0) != want_green {
            return Err(format!("{} V1={v1}: {green} cells with winner 2313", d.name()));
        }
        notes.push(format!("{} V1={v1}: {green} green", d.name()));
    }
    Ok(notes.join(", "))
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let f1 = DensityProfile::f1();
    let f2 = DensityProfile::f2();
    for i in 0..10_000 {
        let d = if i % 2 == 0 { &f1 } else { &f2 };
        let n = rng.gen_range(0..=8);
        let mut xs: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1000.0..1000.0)).collect();
        xs.sort_by(f64::total_cmp);
        let ys: Vec<f64> = xs.windows(2).map(|w| rng.gen_range(w[0]..=w[1])).collect();
        let lhs: f64 = xs.iter().map(|&x| d.value(x)).sum();
        let rhs: f64 = ys.iter().map(|&y| d.value(y)).sum();
        if !(lhs > rhs) {
            return Err(format!("interval squeezing fails for x={xs:?} y={ys:?}"));
        }
    }
    let mut lemma_hits = 0;
    for i in 0..10_000 {
        let d = if i % 2 == 0 { &f1 } else { &f2 };
        let a = rng.gen_range(-3000.0..3000.0);
        let b = if i % 4 < 2 { -a + rng.gen_range(-1.0..1.0) } else { rng.gen_range(-3000.0..3000.0) };
        if d.derivative(a) + d.derivative(b) > 0.0 {
            lemma_hits += 1;
            if !(a + b >= 0.0) {
                return Err(format!("f'({a}) + f'({b}) > 0 but {a} + {b} < 0"));
            }
        }
    }
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let volumes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01f64.ln()..3000f64.ln()).exp()).collect();
        let reversed: Vec<f64> = volumes.iter().rev().copied().collect();
        let a = solve_standard(&f2, &volumes, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let b = solve_standard(&f2, &reversed, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let total: f64 = volumes.iter().sum();
        for (p, q) in a.boundary_points.iter().zip(b.boundary_points.iter().rev()) {
            if (p + q).abs() > 1e-10 * total {
                return Err(format!("reflection of {volumes:?}: {p} vs {q}"));
            }
        }
        if (a.perimeter - b.perimeter).abs() > 1e-10 * a.perimeter {
            return Err(format!("reflection of {volumes:?}: perimeters {} vs {}", a.perimeter, b.perimeter));
        }
    }
    Ok(format!("10^4 squeezing, 10^4 derivative-sum pairs ({lemma_hits} with positive sum), 100 reflections"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = triple_bubbles::cli::run(std::iter::once("triple-bubbles").chain(args.iter().copied()), &mut out, &mut err);
    if code == 0 {
        Ok(())
    } else {
        Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn read_sorted(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let csv_dir = tmp.path().join(format!("csv_{threads}"));
        let ppm_dir = tmp.path().join(format!("ppm_{threads}"));
        run_cli(&[
            "--threads", threads, "sweep", "--density", "f2", "--v1", "log:0.01:6:3", "--v2", "lin:0.01:120:60",
            "--v3", "lin:0.01:3000:60", "--out", csv_dir.to_str().unwrap(),
        ])?;
        run_cli(&["render", "--in", csv_dir.to_str().unwrap(), "--out", ppm_dir.to_str().unwrap()])?;
        outputs.push((read_sorted(&csv_dir), read_sorted(&ppm_dir)));
    }
    if outputs[0] != outputs[1] {
        return Err("1-thread and 4-thread outputs differ".into());
    }
    let files = outputs[0].0.len() + outputs[0].1.len();
    Ok(format!("{files} files byte-identical across 1 and 4 threads"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("table reproduction", table_reproduction),
        ("winner agreement", winner_agreement),
        ("oracle equivalence", oracle_equivalence),
        ("four-type theorem check", four_type_theorem),
        ("equilibrium residual", equilibrium_residual),
        ("2313 existence consistency", existence_consistency),
        ("tie-line invariance", tie_line_invariance),
        ("phenomenology", phenomenology),
        ("property suites", property_suites),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, criterion) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match criterion() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
