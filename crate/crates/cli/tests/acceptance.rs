//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed. Set `BINARISE_STRETCH=1` to
//! also run the non-blocking binarised CGLMP cells N = 6..8.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use binarise::classicality::*;
use binarise::constructions::*;
use binarise::qcore::maximally_entangled;
use binarise::scenarios::*;
use binarise_cli::commands::table2::{PAPER_BINARISED, PAPER_MULTI};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_binarise");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cglmp_v(n: usize, binarised: bool) -> f64 {
    let inst = cglmp_instance(n, StateChoice::Optimal).unwrap();
    let family = if binarised {
        inst.family.map(binarise_bell).unwrap()
    } else {
        inst.family
    };
    bell_critical_visibility(&family).unwrap().certificate.v_critical
}

fn table_row(ns: std::ops::RangeInclusive<usize>, binarised: bool, paper: &[f64], tol: f64) -> Outcome {
    let mut cells = Vec::new();
    let mut bad = Vec::new();
    for n in ns {
        let v = cglmp_v(n, binarised);
        let p = paper[n - 2];
        cells.push(format!("N={n} {:.1}%", 100.0 * v));
        if (v - p).abs() > tol {
            bad.push(format!("N={n}: {v:.5} vs {p}"));
        }
    }
    if bad.is_empty() {
        Ok(cells.join(", "))
    } else {
        Err(format!("{} | out of tolerance: {}", cells.join(", "), bad.join("; ")))
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let row = table_row(2..=8, false, &PAPER_MULTI, 0.003)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 60.0, format!("took {secs:.1}s > 60s"))?;
    Ok(format!("{row} ({secs:.1}s)"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let row = table_row(2..=5, true, &PAPER_BINARISED, 0.005)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 1800.0, format!("took {secs:.1}s > 30 min"))?;
    Ok(format!("{row} ({secs:.1}s)"))
}

fn criterion_2_stretch() -> Outcome {
    let start = Instant::now();
    let row = table_row(6..=8, true, &PAPER_BINARISED, 0.005)?;
    Ok(format!("{row} ({:.1}s)", start.elapsed().as_secs_f64()))
}

fn rac3() -> RacInstance {
    rac_instance(3, &SeesawConfig::default()).unwrap()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let rac = rac3();
    let multi = pm_critical_visibility(&rac.family, 3).unwrap().certificate.v_critical;
    let bin = pm_critical_visibility(&rac.family.map(binarise_pm).unwrap(), 3)
        .unwrap()
        .certificate
        .v_critical;
    let secs = start.elapsed().as_secs_f64();
    let msg = format!(
        "multi {:.2}%, binarised {:.2}% ({secs:.1}s)",
        100.0 * multi,
        100.0 * bin
    );
    ensure((multi - 0.732).abs() <= 0.005, format!("{msg}: multi off"))?;
    ensure((bin - 0.788).abs() <= 0.005, format!("{msg}: binarised off"))?;
    ensure(secs <= 1800.0, format!("{msg}: too slow"))?;
    Ok(msg)
}

fn criterion_4() -> Outcome {
    let max = rac_binarised_witness_classical_max(3);
    ensure(max == 72, format!("integer classical maximum {max} != 72 (= 9 x 8)"))?;
    let rac = rac3();
    let value = rac_binarised_witness_value(rac.family.map(binarise_pm).unwrap().quantum()).unwrap();
    ensure(value >= 9.1, format!("quantum value {value:.6} < 9.1"))?;
    Ok(format!("classical max 72/8 = 9, quantum {value:.6}"))
}

fn criterion_5() -> Outcome {
    let mut instances = Vec::new();
    for n in 2..=5 {
        instances.push(BatteryInstance::Bell {
            label: format!("cglmp N={n}"),
            family: cglmp_instance(n, StateChoice::Optimal).unwrap().family,
        });
    }
    instances.push(BatteryInstance::Pm {
        label: "rac d=3".into(),
        family: rac3().family,
        message_dimension: 3,
    });
    for d in [2, 3] {
        instances.push(BatteryInstance::Steering {
            label: format!("mub d={d} k=2"),
            family: mub_assemblage(d, 2, &maximally_entangled(d)).unwrap(),
        });
    }
    for seed in 0..50 {
        instances.push(BatteryInstance::Steering {
            label: format!("random pure qutrit seed={seed}"),
            family: random_steering_instance(3, 2, seed, StateModel::Pure).unwrap(),
        });
    }
    for seed in 0..10 {
        instances.push(BatteryInstance::Steering {
            label: format!("random mixed qutrit seed={seed}"),
            family: random_steering_instance(3, 2, 100 + seed, StateModel::Mixed { rank: 3 }).unwrap(),
        });
    }
    let report = monotonicity_battery(&instances, &SolveOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        report.passed(),
        format!("violations: {:?} (min gap {:.3e})", report.violations, report.min_gap),
    )?;
    Ok(format!(
        "{} pairs, gap min {:.2e} mean {:.2e} max {:.2e}",
        report.results.len(),
        report.min_gap,
        report.mean_gap,
        report.max_gap
    ))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for d in [2, 3] {
        let family = mub_assemblage(d, 2, &maximally_entangled(d)).unwrap();
        let multi = steering_critical_visibility(&family).unwrap().certificate.v_critical;
        let bin = steering_critical_visibility(&family.map(binarise_assemblage).unwrap())
            .unwrap()
            .certificate
            .v_critical;
        ensure((bin - multi).abs() <= 1e-4, format!("d={d}: {multi} vs {bin}"))?;
        if d == 2 {
            ensure(
                (multi - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-4,
                format!("d=2 value {multi} != 1/sqrt2"),
            )?;
        }
        parts.push(format!("d={d}: {multi:.6} / {bin:.6}"));
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let family = random_bell_family(2, 2, seed).unwrap();
        let fast = bell_critical_visibility(&family).unwrap().certificate.v_critical;
        let slow = bell_bruteforce_visibility(&family, 1e-9).unwrap();
        worst = worst.max((fast - slow).abs());
    }
    let mut worst_pm = 0.0f64;
    for seed in 0..25 {
        let family = random_pm_family(2, 4, 2, 1000 + seed).unwrap();
        let fast = pm_critical_visibility(&family, 2).unwrap().certificate.v_critical;
        let slow = pm_bruteforce_visibility(&family, 2, 1e-9).unwrap();
        worst_pm = worst_pm.max((fast - slow).abs());
    }
    let msg = format!("max |dv| Bell {worst:.2e}, PM {worst_pm:.2e}");
    ensure(worst <= 1e-6 && worst_pm <= 1e-6, msg.clone())?;
    Ok(msg)
}

fn run_cli(out: &Path, args: &[&str]) -> i32 {
    let status = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    status.status.code().unwrap_or(-1)
}

fn certificate_pairs(dir: &Path) -> Vec<(PathBuf, PathBuf)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                if let Some(stem) = name.strip_suffix(".certificate.json") {
                    out.push((path.clone(), path.with_file_name(format!("{stem}.object.json"))));
                }
            }
        }
    }
    out.sort();
    out
}

fn verify_code(cert: &Path, object: &Path) -> i32 {
    Command::new(BIN)
        .arg("verify")
        .arg(cert)
        .arg(object)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

/// Path of the numeric leaf with the largest object weight, so a change in
/// it moves the value. For operator payloads only real parts of diagonal
/// entries qualify, keeping the perturbed operator Hermitian.
fn heaviest(object: &Value) -> Vec<usize> {
    let complex = object.get("operators").is_some();
    fn walk(v: &Value, path: &mut Vec<usize>, complex: bool, best: &mut (f64, Vec<usize>)) {
        match v {
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    path.push(i);
                    walk(item, path, complex, best);
                    path.pop();
                }
            }
            Value::Number(x) => {
                let n = path.len();
                if complex && (n < 3 || path[n - 1] != 0 || path[n - 2] != path[n - 3]) {
                    return;
                }
                let x = x.as_f64().unwrap().abs();
                if x > best.0 {
                    *best = (x, path.clone());
                }
            }
            _ => {}
        }
    }
    let mut best = (-1.0, Vec::new());
    walk(object_tensor(object), &mut Vec::new(), complex, &mut best);
    best.1
}

fn at_path<'a>(v: &'a mut Value, path: &[usize]) -> &'a mut Value {
    path.iter().fold(v, |v, &i| &mut v[i])
}

fn object_tensor(object: &Value) -> &Value {
    object
        .get("tensor")
        .or_else(|| object.get("operators"))
        .expect("object payload")
}

struct Corruption {
    name: &'static str,
    cert: PathBuf,
    object: PathBuf,
    edit: Box<dyn Fn(&mut Value, &Value)>,
    expected: i32,
}

fn bump_heaviest(delta: f64) -> Box<dyn Fn(&mut Value, &Value)> {
    Box::new(move |cert, object| {
        let path = heaviest(object);
        let entry = at_path(&mut cert["coefficients"], &path);
        match entry {
            Value::Number(x) => *entry = Value::from(x.as_f64().unwrap() + delta),
            other => panic!("unexpected coefficient {other}"),
        }
    })
}

fn bump_field(field: &'static str, delta: f64) -> Box<dyn Fn(&mut Value, &Value)> {
    Box::new(move |cert, _| {
        let x = cert[field].as_f64().unwrap();
        cert[field] = Value::from(x + delta);
    })
}

fn map_coefficients(f: fn(f64) -> f64) -> Box<dyn Fn(&mut Value, &Value)> {
    fn walk(v: &mut Value, f: fn(f64) -> f64) {
        match v {
            Value::Array(items) => items.iter_mut().for_each(|i| walk(i, f)),
            Value::Number(x) => *v = Value::from(f(x.as_f64().unwrap())),
            _ => {}
        }
    }
    Box::new(move |cert, _| walk(&mut cert["coefficients"], f))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path();
    for args in [
        vec!["cglmp", "-N", "3", "--mode", "both"],
        vec!["rac", "-N", "3", "--mode", "both"],
        vec!["steering", "--construction", "mub", "-N", "3", "--mode", "both"],
        vec![
            "steering",
            "--construction",
            "random",
            "-N",
            "3",
            "--trials",
            "3",
            "--seed",
            "11",
        ],
        vec!["reproduce-table2", "-N", "3"],
    ] {
        let code = run_cli(out, &args);
        ensure(code == 0, format!("`{}` exited with {code}", args.join(" ")))?;
    }
    let pairs = certificate_pairs(out);
    ensure(pairs.len() >= 14, format!("only {} certificates emitted", pairs.len()))?;
    for (cert, object) in &pairs {
        let code = verify_code(cert, object);
        ensure(code == 0, format!("verify {} exited with {code}", cert.display()))?;
    }

    let bell = out.join("cglmp/N3-optimal-binarised.certificate.json");
    let bell_obj = out.join("cglmp/N3-optimal-binarised.object.json");
    let bell_multi_obj = out.join("cglmp/N3-optimal-multi.object.json");
    let pm = out.join("rac/d3-binarised.certificate.json");
    let pm_obj = out.join("rac/d3-binarised.object.json");
    let pm_multi_obj = out.join("rac/d3-multi.object.json");
    let st = out.join("steering/mub-d3-k2/trial0000-multi.certificate.json");
    let st_obj = out.join("steering/mub-d3-k2/trial0000-multi.object.json");
    let triples = [(&bell, &bell_obj), (&pm, &pm_obj), (&st, &st_obj)];

    let mut corpus = vec![
        Corruption {
            name: "bell coefficient +0.1",
            cert: bell.clone(),
            object: bell_obj.clone(),
            edit: bump_heaviest(0.1),
            expected: 4,
        },
        Corruption {
            name: "pm coefficient +0.1",
            cert: pm.clone(),
            object: pm_obj.clone(),
            edit: bump_heaviest(0.1),
            expected: 4,
        },
        Corruption {
            name: "steering diagonal +0.1",
            cert: st.clone(),
            object: st_obj.clone(),
            edit: bump_heaviest(0.1),
            expected: 4,
        },
        Corruption {
            name: "bell coefficients negated",
            cert: bell.clone(),
            object: bell_obj.clone(),
            edit: map_coefficients(|x| -x),
            expected: 4,
        },
        Corruption {
            name: "pm coefficients doubled",
            cert: pm.clone(),
            object: pm_obj.clone(),
            edit: map_coefficients(|x| 2.0 * x),
            expected: 4,
        },
        Corruption {
            name: "bell certificate on multi-outcome object",
            cert: bell.clone(),
            object: bell_multi_obj,
            edit: Box::new(|_, _| {}),
            expected: 2,
        },
        Corruption {
            name: "pm certificate on multi-outcome object",
            cert: pm.clone(),
            object: pm_multi_obj,
            edit: Box::new(|_, _| {}),
            expected: 2,
        },
        Corruption {
            name: "bell v_critical 1.5",
            cert: bell.clone(),
            object: bell_obj.clone(),
            edit: Box::new(|cert, _| cert["v_critical"] = Value::from(1.5)),
            expected: 4,
        },
    ];
    for (cert, object) in triples {
        for (name, field, delta) in [
            ("bound lowered", "classical_bound", -0.05),
            ("bound raised", "classical_bound", 0.05),
            ("achieved value shifted", "achieved_value", 0.01),
            ("v_critical shifted", "v_critical", -0.01),
        ] {
            corpus.push(Corruption {
                name,
                cert: cert.clone(),
                object: object.clone(),
                edit: bump_field(field, delta),
                expected: 4,
            });
        }
    }
    ensure(corpus.len() == 20, format!("corpus has {} entries", corpus.len()))?;

    let tampered_dir = out.join("tampered");
    fs::create_dir_all(&tampered_dir).unwrap();
    let mut wrong = Vec::new();
    for (i, c) in corpus.iter().enumerate() {
        let mut cert: Value = serde_json::from_str(&fs::read_to_string(&c.cert).unwrap()).unwrap();
        let object: Value = serde_json::from_str(&fs::read_to_string(&c.object).unwrap()).unwrap();
        (c.edit)(&mut cert, &object);
        let path = tampered_dir.join(format!("{i:02}.json"));
        fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();
        let code = verify_code(&path, &c.object);
        if code != c.expected {
            wrong.push(format!("{}: exit {code}, expected {}", c.name, c.expected));
        }
    }
    ensure(wrong.is_empty(), wrong.join("; "))?;
    Ok(format!(
        "{} certificates verify, 20/20 corruptions rejected",
        pairs.len()
    ))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let args = [
        "steering",
        "--construction",
        "random",
        "-N",
        "3",
        "--trials",
        "6",
        "--seed",
        "7",
    ];
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let code = run_cli(&out, &args);
        ensure(code == 0, format!("run {run} exited with {code}"))?;
        let base = out.join("steering/random-d3-m2-s7");
        outputs.push((
            fs::read(base.join("results.csv")).unwrap(),
            fs::read(base.join("gap_histogram.csv")).unwrap(),
        ));
    }
    ensure(outputs[0] == outputs[1], "CSV outputs differ between runs")?;
    Ok(format!("{} bytes identical", outputs[0].0.len() + outputs[0].1.len()))
}

fn main() {
    let stretch = std::env::var("BINARISE_STRETCH").is_ok_and(|v| v == "1");
    let criteria: Vec<(&str, &str, fn() -> Outcome, bool)> = vec![
        ("1", "CGLMP multi-outcome row N=2..8", criterion_1, true),
        ("2", "CGLMP binarised row N=2..5", criterion_2, true),
        ("2s", "CGLMP binarised row N=6..8 (stretch)", criterion_2_stretch, false),
        ("3", "RAC d=3 critical visibilities", criterion_3, true),
        ("4", "binarised RAC witness", criterion_4, true),
        ("5", "monotonicity battery", criterion_5, true),
        ("6", "MUB steering parity", criterion_6, true),
        ("7", "efficient vs brute-force oracles", criterion_7, true),
        ("8", "certificate round-trip and corruption corpus", criterion_8, true),
        ("9", "steering CSV determinism", criterion_9, true),
    ];
    let mut failures = 0;
    for (id, name, f, blocking) in criteria {
        if !blocking && !stretch {
            println!("SKIP [{id}] {name}: set BINARISE_STRETCH=1 to run");
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                println!("FAIL [{id}] {name}: {detail} [{secs:.1}s]");
                if blocking {
                    failures += 1;
                }
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
