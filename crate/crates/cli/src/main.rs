//! `gmcycles`: limit cycles of predator-prey models, their generalized (scale/elasticity)
//! description and Floquet stability, and random sampling of periodic generalized models.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use gmcycles::floquet::{self, FloquetResult};
use gmcycles::fourier::{algebraic_residuals, dft, FourierSeries, GenCoefficients};
use gmcycles::genfunc::{compute_gen_functions, moduli_residual, second_order_check, specific_terms};
use gmcycles::model::{ModelSpec, State};
use gmcycles::orbit::{find_limit_cycle, monodromy, CycleOptions, PeriodicOrbit};
use gmcycles::sampler::{run_sampling, summarize, SampleRecord, SamplingOptions};

#[derive(Parser)]
#[command(name = "gmcycles", version, about = "Periodic orbits and Floquet stability in generalized predator-prey models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the attracting cycle and write orbit.csv, orbit.json.
    Orbit(OrbitArgs),
    /// Orbit, generalized functions, Fourier data and Floquet multiplier.
    Analyze(AnalyzeArgs),
    /// Random search in Fourier-coefficient space with stability statistics.
    Sample(SampleArgs),
}

#[derive(Args)]
struct OrbitArgs {
    /// Preset name (rm, lv) or path to a model JSON file.
    #[arg(long)]
    model: String,
    /// Initial state "x,y"; defaults to (1,1), or (1.2,1) for lv.
    #[arg(long, value_parser = parse_pair)]
    start: Option<(f64, f64)>,
    #[arg(long, default_value_t = 200.0)]
    burn_in: f64,
    /// Grid points per period (power of two).
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Integrator tolerance (absolute and relative).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    orbit: OrbitArgs,
    /// Fourier truncation for C-constants and exported series.
    #[arg(long, default_value_t = floquet::DEFAULT_KAPPA)]
    kappa: usize,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    kappa_m: usize,
    /// Acceptance tolerance on the objective.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Uniform range of the initial coefficients, "lo:hi".
    #[arg(long, default_value = "0.5:1.5", value_parser = parse_range)]
    range: (f64, f64),
    #[arg(long)]
    enforce_constant_beta_m: bool,
    #[arg(long)]
    strict_positivity: bool,
    /// Worker threads (default: GMCYCLES_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Continue an interrupted run in the same output directory.
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    out: PathBuf,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected \"x,y\"")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected \"lo:hi\"")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo < hi) {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn load_model(arg: &str) -> Result<(ModelSpec<f64>, (f64, f64))> {
    if let Some(m) = ModelSpec::preset(arg) {
        let start = if arg.eq_ignore_ascii_case("lv") { (1.2, 1.0) } else { (1.0, 1.0) };
        return Ok((m, start));
    }
    let text = fs::read_to_string(arg).with_context(|| format!("model {arg:?} is neither a preset nor a readable file"))?;
    Ok((ModelSpec::from_json(&text)?, (1.0, 1.0)))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn compute_orbit(a: &OrbitArgs) -> Result<(ModelSpec<f64>, PeriodicOrbit<f64>)> {
    let (model, default_start) = load_model(&a.model)?;
    let (x, y) = a.start.unwrap_or(default_start);
    let start = State::new(x, y)?;
    let opts = CycleOptions { burn_in: a.burn_in, n: a.n, tol: a.tol, ..CycleOptions::default() };
    let orbit = find_limit_cycle(&model, &start, &opts)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_file(&a.out, "orbit.csv", &orbit.to_csv())?;
    write_file(&a.out, "orbit.json", &to_json(&orbit)?)?;
    eprintln!("cycle: T = {}, n = {}", orbit.period(), orbit.n());
    Ok((model, orbit))
}

#[derive(Serialize)]
struct FloquetReport {
    #[serde(flatten)]
    result: FloquetResult<f64>,
    /// "theorem3" when g_y ≡ 1 ≡ m_y along the orbit, otherwise "general".
    method: &'static str,
    general_multiplier: f64,
    monodromy_multiplier: f64,
    monodromy_eigenvalues: [[f64; 2]; 2],
    relative_gap: f64,
    liouville_gap: f64,
    monodromy_far_from_one: bool,
}

/// Relative gap between formula and monodromy multipliers accepted by `analyze`.
const MULTIPLIER_GAP_TOL: f64 = 1e-3;
const LIOUVILLE_TOL: f64 = 1e-6;

fn cmd_analyze(a: &AnalyzeArgs) -> Result<bool> {
    let (model, orbit) = compute_orbit(&a.orbit)?;
    let out = &a.orbit.out;
    let gf = compute_gen_functions(&model, &orbit)?;
    write_file(out, "genfuncs.csv", &gf.to_csv())?;

    let kappa = a.kappa;
    let period = gf.period;
    let series = |s: &[f64]| dft(s, period, kappa);
    let named: Vec<(&str, FourierSeries<f64>)> = vec![
        ("gamma1", series(orbit.gamma1())?),
        ("gamma2", series(orbit.gamma2())?),
        ("beta_s", series(&gf.beta_s)?),
        ("beta_1", series(&gf.beta_1)?),
        ("beta_2", series(&gf.beta_2)?),
        ("beta_m", series(&gf.beta_m)?),
        ("s_x", series(&gf.s_x)?),
        ("g_x", series(&gf.g_x)?),
        ("g_y", series(&gf.g_y)?),
        ("m_y", series(&gf.m_y)?),
    ];
    let fourier_doc: serde_json::Map<String, serde_json::Value> = named
        .iter()
        .map(|(k, v)| Ok((k.to_string(), serde_json::to_value(v)?)))
        .collect::<Result<_>>()?;
    write_file(out, "fourier.json", &to_json(&fourier_doc)?)?;

    let coeffs = GenCoefficients {
        beta_s: named[2].1.clone(),
        beta_1: named[3].1.clone(),
        beta_2: named[4].1.clone(),
        beta_m: named[5].1.clone(),
        s_x: named[6].1.clone(),
        g_x: named[7].1.clone(),
    };
    let algebraic = algebraic_residuals(&coeffs, kappa)?;
    let deviation = gf.predator_elasticity_deviation();
    let residuals = json!({
        "kappa": kappa,
        "moduli_residual": moduli_residual(&gf)?,
        "second_order_residual": second_order_check(&model, &orbit)?,
        "specific_terms_gap": specific_terms(&model, &orbit)?.max_gap(),
        "predator_elasticity_deviation": deviation,
        "algebraic_max_abs": algebraic.max_abs(),
        "algebraic": algebraic,
    });
    write_file(out, "residuals.json", &to_json(&residuals)?)?;

    let theorem3 = deviation < 1e-8;
    let result = if theorem3 {
        floquet::multiplier_from_gen_functions(&gf, kappa)?
    } else {
        let (c1, c2) = floquet::general_constants(&gf);
        floquet::multiplier(c1, c2, period)?
    };
    let mono = monodromy(&model, &orbit, 1e-12)?;
    let mono_lambda = mono.multiplier_modulus();
    let relative_gap = (result.lambda - mono_lambda).abs() / mono_lambda;
    let report = FloquetReport {
        result,
        method: if theorem3 { "theorem3" } else { "general" },
        general_multiplier: floquet::general_multiplier(&gf),
        monodromy_multiplier: mono_lambda,
        monodromy_eigenvalues: mono.eigenvalues.map(|z| [z.re, z.im]),
        relative_gap,
        liouville_gap: mono.liouville_gap(),
        monodromy_far_from_one: mono.far_from_one,
    };
    write_file(out, "floquet.json", &to_json(&report)?)?;
    eprintln!(
        "lambda = {} (monodromy {}), relative gap {:e}, {}",
        result.lambda,
        mono_lambda,
        relative_gap,
        if result.stable { "stable" } else { "unstable" }
    );
    let mut ok = true;
    if mono.far_from_one {
        eprintln!("warning: no monodromy eigenvalue is close to 1");
    }
    if !(relative_gap < MULTIPLIER_GAP_TOL) {
        eprintln!("check failed: formula and monodromy multipliers differ by {relative_gap:e}");
        ok = false;
    }
    if !(report.liouville_gap < LIOUVILLE_TOL) {
        eprintln!("check failed: Liouville gap {:e}", report.liouville_gap);
        ok = false;
    }
    Ok(ok)
}

/// Parameters that must match when resuming a sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunParams {
    count: u64,
    seed: u64,
    kappa_m: usize,
    tol: f64,
    range: (f64, f64),
    enforce_constant_beta_m: bool,
    strict_positivity: bool,
}

const BATCH: u64 = 250;

fn read_records(path: &Path) -> Result<Vec<SampleRecord<f64>>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord<f64> =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.push(rec);
    }
    Ok(out)
}

fn cmd_sample(a: &SampleArgs) -> Result<bool> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let params = RunParams {
        count: a.count,
        seed: a.seed,
        kappa_m: a.kappa_m,
        tol: a.tol,
        range: a.range,
        enforce_constant_beta_m: a.enforce_constant_beta_m,
        strict_positivity: a.strict_positivity,
    };
    let params_path = a.out.join("run.json");
    let samples_path = a.out.join("samples.jsonl");

    let mut records = Vec::new();
    if a.resume && samples_path.exists() {
        let previous: RunParams = serde_json::from_str(
            &fs::read_to_string(&params_path).context("resuming requires run.json from the earlier run")?,
        )?;
        // Records depend on their index only, so a resumed run may extend the count.
        if (RunParams { count: params.count, ..previous.clone() }) != params {
            bail!("cannot resume: parameters differ from the earlier run ({previous:?})");
        }
        records = read_records(&samples_path)?;
        records.truncate(a.count as usize);
        if records.iter().enumerate().any(|(i, r)| r.seed_index != i as u64) {
            bail!("cannot resume: {} is not a contiguous prefix", samples_path.display());
        }
        eprintln!("resuming after {} samples", records.len());
    } else {
        File::create(&samples_path)?;
    }
    write_file(&a.out, "run.json", &to_json(&params)?)?;

    let mut base = SamplingOptions::<f64>::new(1, a.seed).with_kappa_m(a.kappa_m);
    base.tol = a.tol;
    base.lo = a.range.0;
    base.hi = a.range.1;
    base.enforce_constant_beta_m = a.enforce_constant_beta_m;
    base.strict_positivity = a.strict_positivity;
    base.threads = a.threads;

    let mut next = records.len() as u64;
    let mut sink = BufWriter::new(OpenOptions::new().append(true).open(&samples_path)?);
    while next < a.count {
        let n = BATCH.min(a.count - next);
        let mut opts = base.clone();
        opts.count = n as usize;
        opts.first_index = next;
        let batch = run_sampling(&opts)?;
        for r in &batch {
            serde_json::to_writer(&mut sink, r)?;
            sink.write_all(b"\n")?;
        }
        sink.flush()?;
        next += n;
        records.extend(batch);
        let accepted = records.iter().filter(|r| r.accepted).count();
        eprintln!("sampled {next}/{} (accepted {accepted})", a.count);
    }

    let summary = summarize(&records, a.kappa_m);
    write_file(&a.out, "stats.json", &to_json(&summary)?)?;
    write_file(&a.out, "hist.csv", &summary.hist_csv())?;

    let per = 2 * a.kappa_m + 1;
    let bad = records
        .iter()
        .filter(|r| r.accepted)
        .filter(|r| !(r.objective < a.tol) || (0..4).any(|i| !(r.x[i * per] > 0.0)))
        .count();
    let c = &summary.counts;
    eprintln!(
        "accepted {} of {} ({} stable, {} unstable), mean accepted objective {:e}",
        c.accepted,
        c.total,
        c.stable,
        c.unstable,
        summary.mean_accepted_objective.unwrap_or(f64::NAN)
    );
    if bad > 0 || c.stable + c.unstable != c.accepted {
        eprintln!("check failed: {bad} accepted records violate the acceptance rule");
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Orbit(a) => compute_orbit(a).map(|_| true),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
