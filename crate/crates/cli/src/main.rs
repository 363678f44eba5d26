mod args;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{material_json, AuditArgs, Cli, CoeffsArgs, Command, FitArgs, HeatArgs, ReproduceArgs, SpectrumArgs};
use elastospec::asymptotics::{comparison_report, fit_second_coefficient, heat_trace, remainder_profile};
use elastospec::boxes::{elastic_box_spectrum, scalar_box_spectrum, DEFAULT_MODE_BUDGET};
use elastospec::disk::disk_spectrum;
use elastospec::lame::BoundaryCondition;
use elastospec::special::gamma;
use elastospec::spectrum::{Spectrum, FORMAT_VERSION};
use elastospec::weyl::{heat_coefficients, leading_coefficient, WeylCoefficients};
use elastospec::Error;

/// Directory used for relative output paths when set.
const OUT_DIR_ENV: &str = "ELASTOSPEC_OUT_DIR";

enum Failure {
    Input(String),
    Integrity(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_integrity() {
            Failure::Integrity(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Coeffs(a) => coeffs(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Fit(a) => fit(a),
        Command::Heattrace(a) => heattrace(a),
        Command::Audit(a) => audit(a),
        Command::Reproduce(a) => reproduce(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Integrity(msg)) => {
            eprintln!("integrity error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run leaves nothing behind.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> elastospec::Result<()>) -> Result<(), Failure> {
    let path = resolve(path);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(io)?;
    }
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, fill: impl FnOnce(&mut dyn Write) -> elastospec::Result<()>) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, fill),
        None => {
            let mut buf = Vec::new();
            fill(&mut buf)?;
            std::io::stdout()
                .write_all(&buf)
                .map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<(), Failure> {
    emit(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

fn coeffs(a: &CoeffsArgs) -> Outcome {
    let params = a.material.params()?;
    let bc = a.material.bc;
    let families: Vec<serde_json::Value> = WeylCoefficients::all_families(bc, a.d, &params)
        .into_iter()
        .collect::<elastospec::Result<Vec<_>>>()?
        .into_iter()
        .map(|c| json!({ "family": c.family, "a0": c.a0, "a1": c.a1 }))
        .collect();
    let heat = match bc {
        BoundaryCondition::DirichletFree | BoundaryCondition::FreeDirichlet => {
            let h = heat_coefficients(bc, a.d, &params)?;
            json!({ "b0": h.b0, "b1": h.b1 })
        }
        _ => serde_json::Value::Null,
    };
    let mut config = material_json(&a.material);
    config["d"] = json!(a.d);
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "config": config,
        "a0": leading_coefficient(a.d, &params),
        "families": families,
        "heat": heat,
    });
    emit_json(a.out.as_deref(), &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn build_spectrum(a: &SpectrumArgs) -> Result<Spectrum, Failure> {
    let domain = a.geometry.domain().map_err(Failure::Input)?;
    let bc = a.material.bc;
    let params = a.material.params()?;
    let spectrum = if domain.is_disk() {
        disk_spectrum(bc, &params, a.lmax)?.spectrum
    } else if bc.is_scalar() {
        scalar_box_spectrum(&domain, bc, a.lmax, DEFAULT_MODE_BUDGET)?
    } else {
        elastic_box_spectrum(&domain, &params, bc, a.lmax)?
    };
    Ok(spectrum)
}

fn spectrum(a: &SpectrumArgs) -> Outcome {
    let s = build_spectrum(a)?;
    emit(a.out.as_deref(), |w| s.write_csv(w))?;
    Ok(ExitCode::SUCCESS)
}

fn fit(a: &FitArgs) -> Outcome {
    let s = build_spectrum(&a.spectrum)?;
    let params = a.spectrum.material.params()?;
    let bc = a.spectrum.material.bc;
    if bc.is_scalar() {
        return Err(Failure::Input(format!("fit compares elastic coefficients; {bc} is scalar")));
    }
    let d = s.domain().dimension();
    let a0 = leading_coefficient(d, &params);
    let profile = remainder_profile(&s, a0, s.domain(), a.grid)?;
    let estimate = fit_second_coefficient(&profile)?;
    let candidates = WeylCoefficients::all_families(bc, d, &params)
        .into_iter()
        .collect::<elastospec::Result<Vec<_>>>()?;
    let report = comparison_report(&estimate, &candidates, s.domain(), &params)?;
    if let Some(path) = &a.profile {
        write_atomic(path, |w| profile.write_csv(w))?;
    }
    let mut doc = serde_json::to_value(&report).map_err(Error::from)?;
    doc["config"] = s.config_json();
    match &a.spectrum.out {
        Some(path) => {
            emit_json(Some(path), &doc)?;
            println!("{report}");
        }
        None => emit_json(None, &doc)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn heattrace(a: &HeatArgs) -> Outcome {
    let s = build_spectrum(&a.spectrum)?;
    let params = a.spectrum.material.params()?;
    let top = s.lambda_max();
    let times: Vec<f64> = match &a.t {
        Some(list) => list
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Failure::Input(format!("bad time {t:?}: {e}"))))
            .collect::<Result<_, _>>()?,
        None => {
            let n = a.points.max(2);
            (0..n)
                .map(|i| 20.0 / top * 100f64.powf(i as f64 / (n - 1) as f64))
                .collect()
        }
    };
    let d = s.domain().dimension();
    let a0 = if a.spectrum.material.bc.is_scalar() {
        let half = d as f64 / 2.0;
        1.0 / ((4.0 * std::f64::consts::PI).powf(half) * gamma(1.0 + half))
    } else {
        leading_coefficient(d, &params)
    };
    let rows = times
        .iter()
        .map(|&t| heat_trace(&s, t, a0, s.domain().volume()))
        .collect::<elastospec::Result<Vec<_>>>()?;
    emit(a.spectrum.out.as_deref(), |w| {
        writeln!(w, "# elastospec format_version={FORMAT_VERSION}")?;
        writeln!(w, "# config={}", s.config_json())?;
        writeln!(w, "t,Z,tail_bound")?;
        for r in &rows {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", r.t, r.value, r.tail_bound)?;
        }
        Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn audit(a: &AuditArgs) -> Outcome {
    let params = a.material.params()?;
    let ds = disk_spectrum(a.material.bc, &params, a.lmax)?;
    let report = ds.audit(&params)?;
    let mut doc = report.to_json();
    doc["format_version"] = json!(FORMAT_VERSION);
    doc["config"] = ds.spectrum.config_json();
    emit_json(a.out.as_deref(), &doc)?;
    Ok(ExitCode::SUCCESS)
}

fn reproduce(a: &ReproduceArgs) -> Outcome {
    let ids: Vec<u8> = if a.only.is_empty() { (1..=8).collect() } else { a.only.clone() };
    if let Some(bad) = ids.iter().find(|id| !(1..=8).contains(*id)) {
        return Err(Failure::Input(format!("criteria are numbered 1 to 8, got {bad}")));
    }
    let suite = elastospec_acceptance::Suite::new();
    let mut all_pass = true;
    println!("{:<10} {:<6} {:>9}  title", "criterion", "status", "seconds");
    for id in ids {
        let outcome = suite.run(id);
        all_pass &= outcome.passed();
        let status = if outcome.passed() { "PASS" } else { "FAIL" };
        println!("{:<10} {status:<6} {:>9.1}  {}", outcome.id, outcome.seconds, outcome.title);
        for c in outcome.failures() {
            println!("{:<18}{}: {}", "", c.name, c.detail);
        }
    }
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}
