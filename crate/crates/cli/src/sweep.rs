//! `sweep`: re-runs one experiment over a list of values for a single
//! numeric key. Runs may be dispatched to a worker pool (capped by
//! FDE_LAB_THREADS, default 1); the aggregate CSV is assembled in input
//! order regardless of completion order.

use crate::config::{set_key, ExperimentConfig};
use crate::report::{format_float, write_outputs, CsvTable, Report};
use crate::experiments::run_experiment;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub fn worker_count() -> usize {
    std::env::var("FDE_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

/// Returns the process exit code: 0 all checks pass, 1 some check failed,
/// 2 configuration or numerical error.
pub fn run_sweep(base: &ExperimentConfig, key: &str, values: &[String], out_dir: &Path) -> i32 {
    if values.is_empty() {
        eprintln!("error: sweep needs at least one value");
        return 2;
    }
    // validate every configuration up front so a bad value aborts the whole
    // sweep before any work is done
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut cfg = base.clone();
        if let Err(e) = set_key(&mut cfg, key, v) {
            eprintln!("error: {e}");
            return 2;
        }
        configs.push(cfg);
    }

    let workers = worker_count().min(configs.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<(Report, Vec<CsvTable>), String>>>> =
        Mutex::new(vec![None; configs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let result = run_experiment(&configs[i]);
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });
    let results = slots.into_inner().unwrap();

    let mut reports = Vec::with_capacity(values.len());
    for (v, r) in values.iter().zip(results) {
        match r.expect("worker filled every slot") {
            Ok((report, tables)) => {
                let sub = out_dir.join(format!("{key}-{v}"));
                if let Err(e) = write_outputs(&sub, &report, &tables, 0.0) {
                    eprintln!("error: cannot write {}: {e}", sub.display());
                    return 2;
                }
                reports.push(report);
            }
            Err(e) => {
                eprintln!("error: {key} = {v}: {e}");
                return 2;
            }
        }
    }

    // aggregate CSV: one row per value, columns from the first report
    let names: Vec<String> = reports[0].checks.iter().map(|c| c.name.clone()).collect();
    let mut csv = String::new();
    csv.push_str(key);
    for n in &names {
        csv.push(',');
        csv.push_str(n);
    }
    csv.push_str(",pass\n");
    for (v, report) in values.iter().zip(&reports) {
        csv.push_str(&format_float(v.parse::<f64>().unwrap_or(f64::NAN)));
        for n in &names {
            let cell = report
                .checks
                .iter()
                .find(|c| &c.name == n)
                .map_or(f64::NAN, |c| c.value);
            csv.push(',');
            csv.push_str(&format_float(cell));
        }
        csv.push_str(if report.pass { ",1\n" } else { ",0\n" });
    }
    if let Err(e) = std::fs::create_dir_all(out_dir)
        .and_then(|_| std::fs::write(out_dir.join("sweep.csv"), csv))
    {
        eprintln!("error: cannot write sweep.csv: {e}");
        return 2;
    }

    let mut all_pass = true;
    for (v, report) in values.iter().zip(&reports) {
        let status = if report.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {key} = {v}");
        all_pass &= report.pass;
    }
    if all_pass {
        0
    } else {
        1
    }
}
