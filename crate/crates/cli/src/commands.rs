use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result as AnyResult};
use pde_select::equivalence::{run_battery, BatteryConfig};
use pde_select::pde::{
    add_target_noise, build_library, discovery_sweep, simulate_burgers, PenaltyScale, SweepConfig,
};
use pde_select::regression::best_subsets_per_size;
use pde_select::{scan_a_n, CandidateLibrary, FieldData, FieldMeta};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn create(path: &Path) -> AnyResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create directory {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> pde_select::Result<()>) -> AnyResult<()> {
    let mut w = create(path)?;
    f(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> AnyResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).with_context(|| format!("cannot write {}", path.display()))?;
    writeln!(w)?;
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

fn open(path: &Path) -> AnyResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn print_json<S: Serialize>(value: &S) -> AnyResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_config(cfg: &RunConfig) -> AnyResult<()> {
    write_json(&cfg.out_path("config.json"), cfg)
}

fn field(cfg: &RunConfig) -> AnyResult<FieldData> {
    match &cfg.library.field {
        Some(path) => FieldData::read_csv(open(path)?).with_context(|| format!("cannot read field {}", path.display())),
        None => {
            let sim = &cfg.simulate;
            Ok(simulate_burgers(sim.nu, &sim.domain, &sim.initial)?)
        }
    }
}

fn library(cfg: &RunConfig, library_path: Option<&Path>) -> AnyResult<CandidateLibrary> {
    if let Some(path) = library_path {
        return CandidateLibrary::read_csv(open(path)?).with_context(|| format!("cannot read library {}", path.display()));
    }
    let lib = &cfg.library;
    let clean = build_library(&field(cfg)?, &lib.spec(), lib.n_samples, cfg.seed)?;
    Ok(add_target_noise(&clean, lib.target_noise, cfg.seed)?)
}

pub fn simulate(cfg: &RunConfig, json: bool) -> Result<()> {
    let sim = &cfg.simulate;
    let field = simulate_burgers(sim.nu, &sim.domain, &sim.initial).map_err(anyhow::Error::from)?;
    let meta = FieldMeta::describe(&field, sim.nu, cfg.seed);
    let csv = cfg.out_path("field.csv");
    write_with(&csv, |w| field.write_csv(w))?;
    write_json(&cfg.out_path("field.json"), &meta)?;
    write_config(cfg)?;
    if json {
        print_json(&meta)?;
    } else {
        println!("wrote {} ({} x {} grid)", csv.display(), meta.n_x, meta.n_t);
    }
    Ok(())
}

pub fn build(cfg: &RunConfig, json: bool) -> Result<()> {
    let lib = library(cfg, None)?;
    let path = cfg.out_path("library.csv");
    write_with(&path, |w| lib.write_csv(w))?;
    write_config(cfg)?;
    if json {
        print_json(&serde_json::json!({
            "n_samples": lib.n_samples(),
            "column_names": lib.column_names(),
        }))?;
    } else {
        println!("wrote {} ({} samples, {} terms)", path.display(), lib.n_samples(), lib.n_terms());
    }
    Ok(())
}

fn scale_label(scale: &PenaltyScale<f64>) -> String {
    match scale {
        PenaltyScale::Named(_) => "log N".into(),
        PenaltyScale::Value(v) => format!("{v}"),
    }
}

pub fn discover(cfg: &RunConfig, json: bool) -> Result<()> {
    let lib = library(cfg, cfg.sweep.library.as_deref())?;
    let max_size = cfg.sweep.max_size.unwrap_or(lib.n_terms());
    if max_size > lib.n_terms() {
        return Err(CliError::Usage(format!(
            "max_size {max_size} exceeds the {} library terms",
            lib.n_terms()
        )));
    }
    let sweep_config = SweepConfig {
        a_n: cfg.sweep.a_n.clone(),
        n_boot: cfg.sweep.n_boot,
        seed: cfg.seed,
        strategy: cfg.sweep.strategy,
    };
    let sweep = discovery_sweep(&lib, max_size, &sweep_config).map_err(anyhow::Error::from)?;

    write_with(&cfg.out_path("sweep.json"), |w| sweep.write_json(w))?;
    write_with(&cfg.out_path("fig1.csv"), |w| sweep.write_fig1_csv(w))?;
    write_with(&cfg.out_path("fig2.csv"), |w| sweep.write_fig2_csv(w))?;
    write_config(cfg)?;

    if json {
        print_json(&sweep.selections)?;
    } else {
        for sel in &sweep.selections {
            let label = match sel.a_n {
                None => sel.criterion.clone(),
                Some(a) => {
                    let i = sweep.a_n.iter().position(|&v| v == a).unwrap_or(0);
                    format!("{}(a_N={})", sel.criterion, scale_label(&cfg.sweep.a_n[i]))
                }
            };
            println!("{label}: {}", sel.equation);
        }
    }
    for row in sweep.rows.iter().filter(|r| r.failed()) {
        eprintln!("warning: k = {}: {}", row.k, row.errors.join("; "));
    }
    if !sweep.complexity_nondecreasing {
        eprintln!("warning: complexity decreases with support size somewhere in the sweep");
    }
    Ok(())
}

pub fn verify_equivalence(cfg: &RunConfig, json: bool) -> Result<()> {
    let battery = BatteryConfig {
        instances: cfg.equivalence.instances,
        seed: cfg.seed,
        perturb: cfg.equivalence.perturb,
    };
    let report = run_battery::<f64>(&battery).map_err(anyhow::Error::from)?;
    write_json(&cfg.out_path("equivalence.json"), &report)?;
    write_config(cfg)?;
    let s = &report.summary;
    if json {
        print_json(s)?;
    } else {
        println!(
            "{} passed, {} failed, max |UBIC - BIC_aug| = {:e}",
            s.pass_count, s.fail_count, s.max_abs_diff
        );
    }
    if s.fail_count > 0 {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "{} of {} equivalence checks failed",
            s.fail_count,
            s.pass_count + s.fail_count
        )));
    }
    Ok(())
}

pub fn scan_an(cfg: &RunConfig, json: bool) -> Result<()> {
    let lib = library(cfg, cfg.sweep.library.as_deref())?;
    let names: Vec<&str> = cfg.scan.oracle.iter().map(String::as_str).collect();
    let oracle = lib
        .support_of(&names)
        .map_err(|e| CliError::Usage(format!("oracle support: {e}")))?;
    let max_size = cfg.sweep.max_size.unwrap_or(lib.n_terms()).min(lib.n_terms());
    let fits: Vec<_> = best_subsets_per_size(&lib, max_size, cfg.sweep.strategy)
        .map_err(anyhow::Error::from)?
        .into_iter()
        .filter_map(|f| f.ok())
        .collect();
    let schedule: Vec<f64> = cfg.scan.schedule.iter().map(|s| s.resolve(lib.n_samples())).collect();
    if schedule.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Usage(format!("a_N schedule must be ascending, resolves to {schedule:?}")));
    }
    let report = scan_a_n(&fits, &lib, &schedule, &oracle).map_err(anyhow::Error::from)?;
    write_json(&cfg.out_path("scan_an.json"), &report)?;
    write_config(cfg)?;
    if json {
        print_json(&report)?;
    } else {
        for e in &report.entries {
            let terms: Vec<&str> = e.selected_support.iter().map(|&j| lib.column_names()[j].as_str()).collect();
            println!("a_N = {:.4}: {{{}}}", e.a_n, terms.join(", "));
        }
        match report.matched_a_n {
            Some(a) => println!("oracle support first selected at a_N = {a:.4}"),
            None => println!("oracle support not selected on this schedule"),
        }
    }
    Ok(())
}
