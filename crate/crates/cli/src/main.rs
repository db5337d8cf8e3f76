//! Command-line interface: Harder-Narasimhan filtrations, filtered rank
//! invariant queries, distances, the seeded property harness, and
//! one-parameter chamber breakpoints, over module/stability files.
//!
//! Exit codes: 0 success, 1 harness violation, 2 parse error, 3 validation
//! error, 4 budget refusal, 5 internal invariant violation.

mod formats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use formats::{parse_module_text, Failure, FieldChoice, ModuleDoc, StabilityDoc};
use hnpers::chamber::x_breakpoints_1d;
use hnpers::distance::{
    erosion_distance, landscape_distance, sample_lattice, sample_s, theta_candidates,
    SampledFunctor,
};
use hnpers::grid::GridPoset;
use hnpers::harness::{run_check, HarnessConfig, Mutation, CHECK_COUNT};
use hnpers::hn::{hn_type_of, oracle_hn_filtration, HNType};
use hnpers::invariants::{skyscraper_invariant, FilteredRankInvariant};
use hnpers::module::{realise, Presentation, RankValue};
use hnpers::scalar::{format_rat, parse_rat, Field, PrimeField, Rat, Rationals};
use hnpers::stability::StabilityCondition;
use num_traits::Zero;

#[derive(Parser)]
#[command(
    name = "hnpers",
    version,
    about = "Exact Harder-Narasimhan invariants of multiparameter persistence modules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the HN filtration, slopes, and type of a module.
    Hn(HnArgs),
    /// Query the HN filtered rank invariant (single value, window sample,
    /// threshold profile, or per-vertex skyscraper types).
    S(SArgs),
    /// Distances between two modules under one stability condition.
    Distance(DistanceArgs),
    /// Run the seeded property suite.
    Harness(HarnessArgs),
    /// Exact shift-chamber breakpoints for one-parameter modules.
    Breakpoints(BreakpointsArgs),
}

#[derive(Args)]
struct HnArgs {
    /// Module file (JSON document or firep text).
    #[arg(long)]
    module: PathBuf,
    /// Stability condition file (JSON document).
    #[arg(long)]
    stab: PathBuf,
    /// Compute over F_p instead of the field named in the module file.
    #[arg(long)]
    prime: Option<u64>,
    /// Also compute over F_p and report whether the HN types agree.
    #[arg(long)]
    prime2: Option<u64>,
    /// Cross-check against the exhaustive oracle; the optional value caps
    /// the total dimension the oracle accepts.
    #[arg(long, num_args(0..=1), default_missing_value = "8")]
    oracle: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SArgs {
    #[arg(long)]
    module: PathBuf,
    #[arg(long)]
    stab: PathBuf,
    #[arg(long)]
    prime: Option<u64>,
    /// Query shift, comma-separated rationals (with --y and --theta).
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Query target point (with --x and --theta).
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Slope threshold.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Sample the invariant at --theta over this window (with --res); emits
    /// CSV columns x…, y…, theta, value.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Sampling step.
    #[arg(long)]
    res: Option<String>,
    /// Emit the threshold profile at this shift instead of a value.
    #[arg(long, allow_hyphen_values = true)]
    profile: Option<String>,
    /// Emit the HN type under the skyscraper condition at every module grid
    /// vertex (uses the density from --stab).
    #[arg(long)]
    skyscraper: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistanceArgs {
    /// First module file.
    #[arg(long)]
    module: PathBuf,
    /// Second module file.
    #[arg(long)]
    module2: PathBuf,
    #[arg(long)]
    stab: PathBuf,
    #[arg(long)]
    prime: Option<u64>,
    /// Sampling window "lo1,…,lon..hi1,…,hin".
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    /// Sampling step.
    #[arg(long)]
    res: String,
    /// Comma-separated thresholds; omitted = the exact finite candidate set.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HarnessArgs {
    /// Master seed for every generator stream.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Run the sub-minute reduced quotas.
    #[arg(long)]
    quick: bool,
    /// Run a single check (1..=10) instead of the whole suite.
    #[arg(long)]
    check: Option<usize>,
    /// Corrupt a reference computation to demonstrate the suite has teeth.
    #[arg(long, value_parser = ["slope-sign"])]
    mutate: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BreakpointsArgs {
    #[arg(long)]
    module: PathBuf,
    #[arg(long)]
    stab: PathBuf,
    #[arg(long)]
    prime: Option<u64>,
    /// Shift region "lo..hi" (one parameter).
    #[arg(long, allow_hyphen_values = true)]
    window: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// report documents

#[derive(Serialize)]
struct TypeEntry {
    slope: String,
    dims: Vec<usize>,
}

fn type_entries(ty: &HNType) -> Vec<TypeEntry> {
    ty.entries()
        .iter()
        .map(|(slope, dims)| TypeEntry {
            slope: format_rat(slope),
            dims: dims.clone(),
        })
        .collect()
}

#[derive(Serialize)]
struct HnReport {
    field: String,
    adapted_grid: Vec<Vec<String>>,
    module_dims: Vec<usize>,
    alpha: Vec<String>,
    beta: Vec<String>,
    steps: Vec<Vec<usize>>,
    slopes: Vec<String>,
    hn_type: Vec<TypeEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_agrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_field: Option<SecondFieldReport>,
}

#[derive(Serialize)]
struct SecondFieldReport {
    field: String,
    hn_type: Vec<TypeEntry>,
    agrees: bool,
}

#[derive(Serialize)]
struct ValueReport {
    x: Vec<String>,
    y: Vec<String>,
    theta: String,
    value: String,
}

#[derive(Serialize)]
struct ProfileReport {
    x: Vec<String>,
    breakpoints: Vec<String>,
}

#[derive(Serialize)]
struct SkyscraperReport {
    points: Vec<SkyscraperEntry>,
}

#[derive(Serialize)]
struct SkyscraperEntry {
    point: Vec<String>,
    hn_type: Vec<TypeEntry>,
}

#[derive(Serialize)]
struct DistanceReport {
    field: String,
    window_lo: Vec<String>,
    window_hi: Vec<String>,
    resolution: String,
    theta_strategy: String,
    per_theta: Vec<ThetaDistances>,
    hn_distance: String,
    landscape_k_max: usize,
    landscape_tol: String,
}

#[derive(Serialize)]
struct ThetaDistances {
    theta: String,
    erosion: String,
    landscape: String,
}

#[derive(Serialize)]
struct HarnessReport {
    seed: u64,
    quick: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mutation: Option<String>,
    passed: bool,
    checks: Vec<CheckEntry>,
}

#[derive(Serialize)]
struct CheckEntry {
    index: usize,
    name: String,
    passed: bool,
    cases: usize,
    detail: String,
}

#[derive(Serialize)]
struct BreakpointsReport {
    field: String,
    region: Vec<String>,
    breakpoints: Vec<String>,
    interval_types: Vec<Vec<TypeEntry>>,
}

// ---------------------------------------------------------------------------
// plumbing

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    let body = content.trim_end_matches('\n');
    match out {
        Some(path) => std::fs::write(path, format!("{body}\n"))
            .map_err(|e| Failure::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, report: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("reports serialise");
    emit(out, &text)
}

fn load_module(path: &Path, prime: Option<u64>) -> Result<(Presentation, FieldChoice), Failure> {
    let (pres, file_field) = parse_module_text(&read_text(path)?).map_err(Failure::Parse)?;
    // self-check: the canonical emitted document re-parses to the same value
    let json = ModuleDoc::from_presentation(&pres, file_field).to_json();
    let (again, field_again) = ModuleDoc::from_json(&json)
        .and_then(|doc| doc.to_presentation())
        .map_err(|e| round_trip_broken("module", e))?;
    if again != pres || field_again != file_field {
        return Err(round_trip_broken("module", "re-parsed value differs".to_string()));
    }
    Ok((
        pres,
        match prime {
            Some(p) => FieldChoice::Prime(p),
            None => file_field,
        },
    ))
}

fn load_condition(path: &Path, n: usize) -> Result<StabilityCondition, Failure> {
    let z = StabilityDoc::from_json(&read_text(path)?)
        .map_err(Failure::Parse)?
        .to_condition(n)?;
    let again = StabilityDoc::from_json(&StabilityDoc::from_condition(&z).to_json())
        .map_err(|e| round_trip_broken("stability", e))?
        .to_condition(n)?;
    if again != z {
        return Err(round_trip_broken(
            "stability",
            "re-parsed value differs".to_string(),
        ));
    }
    Ok(z)
}

fn round_trip_broken(what: &str, detail: String) -> Failure {
    Failure::Lib(hnpers::Error::InvariantViolation {
        op: "document round-trip",
        detail: format!("emitted {what} document does not re-parse to an equal value: {detail}"),
    })
}

fn parse_coords(s: &str, what: &str) -> Result<Vec<Rat>, Failure> {
    s.split(',')
        .map(|t| {
            parse_rat(t.trim())
                .map_err(|e| Failure::Parse(format!("{what}: bad rational {t:?}: {e}")))
        })
        .collect()
}

fn parse_window(s: &str) -> Result<(Vec<Rat>, Vec<Rat>), Failure> {
    let Some((lo, hi)) = s.split_once("..") else {
        return Err(Failure::Parse(format!(
            "window {s:?} must be \"lo1,…..hi1,…\" with \"..\" between the corners"
        )));
    };
    let lo = parse_coords(lo, "window lower corner")?;
    let hi = parse_coords(hi, "window upper corner")?;
    if lo.len() != hi.len() {
        return Err(Failure::Parse(format!(
            "window corners have {} and {} coordinates",
            lo.len(),
            hi.len()
        )));
    }
    Ok((lo, hi))
}

fn rank_str(v: RankValue) -> String {
    match v {
        RankValue::Finite(r) => r.to_string(),
        RankValue::Infinite => "inf".to_string(),
    }
}

fn rats_str(rs: &[Rat]) -> Vec<String> {
    rs.iter().map(format_rat).collect()
}

/// Runs `f` over the computation field selected for the module.
macro_rules! with_field {
    ($choice:expr, $field:ident => $body:expr) => {
        match $choice {
            FieldChoice::Rational => {
                let $field = Rationals;
                $body
            }
            FieldChoice::Prime(p) => {
                let $field = PrimeField::new(p)?;
                $body
            }
        }
    };
}

// ---------------------------------------------------------------------------
// hn

fn cmd_hn(args: &HnArgs) -> Result<ExitCode, Failure> {
    let (pres, choice) = load_module(&args.module, args.prime)?;
    let z = load_condition(&args.stab, pres.n)?;
    let mut report = with_field!(choice, field => hn_report(&pres, field, &z, args.oracle))?;
    report.field = choice.to_string();
    if let Some(p2) = args.prime2 {
        let second = hn_report(&pres, PrimeField::new(p2)?, &z, None)?;
        let agrees = second
            .hn_type
            .iter()
            .map(|e| (&e.slope, &e.dims))
            .eq(report.hn_type.iter().map(|e| (&e.slope, &e.dims)));
        report.second_field = Some(SecondFieldReport {
            field: FieldChoice::Prime(p2).to_string(),
            hn_type: second.hn_type,
            agrees,
        });
    }
    emit_json(&args.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

fn hn_report<K: Field>(
    pres: &Presentation,
    field: K,
    z: &StabilityCondition,
    oracle: Option<usize>,
) -> Result<HnReport, Failure> {
    let v = realise(pres, field)?.module;
    let mut inv = FilteredRankInvariant::new(v, z.clone())?;
    let origin = vec![Rat::zero(); z.n()];
    let (evaluated, ds, filt) = inv.filtration_at(&origin)?;
    let oracle_agrees = match oracle {
        Some(budget) => Some(oracle_hn_filtration(&evaluated, &ds, budget)? == filt),
        None => None,
    };
    let ty = hn_type_of(&filt);
    let grid = evaluated.grid();
    Ok(HnReport {
        field: String::new(), // the caller fills in the resolved field
        adapted_grid: (0..grid.n()).map(|i| rats_str(grid.axis(i))).collect(),
        module_dims: evaluated.dims().to_vec(),
        alpha: rats_str(ds.alpha()),
        beta: rats_str(ds.beta()),
        steps: filt.steps().iter().map(|s| s.dims()).collect(),
        slopes: rats_str(filt.slopes()),
        hn_type: type_entries(&ty),
        oracle_agrees,
        second_field: None,
    })
}

// ---------------------------------------------------------------------------
// s

fn cmd_s(args: &SArgs) -> Result<ExitCode, Failure> {
    let (pres, choice) = load_module(&args.module, args.prime)?;
    let z = load_condition(&args.stab, pres.n)?;
    with_field!(choice, field => run_s(args, &pres, field, &z))
}

fn run_s<K>(
    args: &SArgs,
    pres: &Presentation,
    field: K,
    z: &StabilityCondition,
) -> Result<ExitCode, Failure>
where
    K: Field + Send + Sync,
    K::Elem: Send + Sync,
{
    let v = realise(pres, field)?.module;
    if args.skyscraper {
        let entries = skyscraper_invariant(&v, z.beta(), None)?;
        let report = SkyscraperReport {
            points: entries
                .iter()
                .map(|(q, ty)| SkyscraperEntry {
                    point: rats_str(q),
                    hn_type: type_entries(ty),
                })
                .collect(),
        };
        emit_json(&args.out, &report)?;
        return Ok(ExitCode::SUCCESS);
    }

    let mut inv = FilteredRankInvariant::new(v, z.clone())?;
    if let Some(profile_at) = &args.profile {
        let x = parse_coords(profile_at, "--profile")?;
        let profile = inv.theta_profile(&x)?;
        let report = ProfileReport {
            x: rats_str(&profile.x),
            breakpoints: rats_str(&profile.breakpoints),
        };
        emit_json(&args.out, &report)?;
        return Ok(ExitCode::SUCCESS);
    }

    let Some(theta) = &args.theta else {
        return Err(Failure::Parse(
            "s needs --theta with either --x/--y, or --window/--res, \
             or --profile, or --skyscraper"
                .to_string(),
        ));
    };
    let theta = parse_rat(theta).map_err(|e| Failure::Parse(format!("--theta: {e}")))?;

    match (&args.x, &args.y, &args.window, &args.res) {
        (Some(x), Some(y), None, None) => {
            let x = parse_coords(x, "--x")?;
            let y = parse_coords(y, "--y")?;
            let value = inv.s_eval(&theta, &x, &y)?;
            let report = ValueReport {
                x: rats_str(&x),
                y: rats_str(&y),
                theta: format_rat(&theta),
                value: rank_str(value),
            };
            emit_json(&args.out, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        (None, None, Some(window), Some(res)) => {
            let (lo, hi) = parse_window(window)?;
            let res = parse_rat(res).map_err(|e| Failure::Parse(format!("--res: {e}")))?;
            let lattice = sample_lattice(&lo, &hi, &res)?;
            let values = parallel_sample(&inv, &theta, &lattice)?;
            let functor = SampledFunctor::new(lattice.clone(), res, values)?;
            emit(&args.out, &functor_csv(&functor, &theta))?;
            Ok(ExitCode::SUCCESS)
        }
        _ => Err(Failure::Parse(
            "s takes exactly one query form: --x/--y/--theta for one value, \
             --window/--res/--theta for a CSV sample, --profile, or --skyscraper"
                .to_string(),
        )),
    }
}

/// Samples `s(theta; x, y)` over all lattice pairs, splitting the x rows
/// across threads; each worker owns a clone of the evaluator so its memo of
/// filtrations covers its rows.
fn parallel_sample<K>(
    inv: &FilteredRankInvariant<K>,
    theta: &Rat,
    lattice: &GridPoset,
) -> Result<Vec<RankValue>, Failure>
where
    K: Field + Send + Sync,
    K::Elem: Send + Sync,
{
    let len = lattice.len();
    let workers = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1)
        .min(len.max(1));
    let rows_per = len.div_ceil(workers);
    let mut values = vec![RankValue::Finite(0); len * len];
    let failure = std::sync::Mutex::new(None::<hnpers::Error>);
    std::thread::scope(|scope| {
        for (w, slice) in values.chunks_mut(rows_per * len).enumerate() {
            let mut local = inv.clone();
            let failure = &failure;
            scope.spawn(move || {
                let mut run = || -> Result<(), hnpers::Error> {
                    for (row_off, row) in slice.chunks_mut(len).enumerate() {
                        let x_flat = w * rows_per + row_off;
                        let x = lattice.coords(&lattice.unflat(x_flat));
                        for (y_flat, out) in row.iter_mut().enumerate() {
                            let y = lattice.coords(&lattice.unflat(y_flat));
                            *out = local.s_eval(theta, &x, &y)?;
                        }
                    }
                    Ok(())
                };
                if let Err(e) = run() {
                    *failure.lock().expect("no poisoned workers") = Some(e);
                }
            });
        }
    });
    match failure.into_inner().expect("no poisoned workers") {
        Some(e) => Err(Failure::Lib(e)),
        None => Ok(values),
    }
}

fn functor_csv(functor: &SampledFunctor, theta: &Rat) -> String {
    let lattice = functor.lattice();
    let n = lattice.n();
    let mut out = String::new();
    for i in 1..=n {
        out.push_str(&format!("x{i},"));
    }
    for i in 1..=n {
        out.push_str(&format!("y{i},"));
    }
    out.push_str("theta,value\n");
    let theta = format_rat(theta);
    for xf in 0..lattice.len() {
        let x = lattice.coords(&lattice.unflat(xf));
        for yf in 0..lattice.len() {
            let y = lattice.coords(&lattice.unflat(yf));
            for c in &x {
                out.push_str(&format_rat(c));
                out.push(',');
            }
            for c in &y {
                out.push_str(&format_rat(c));
                out.push(',');
            }
            out.push_str(&theta);
            out.push(',');
            out.push_str(&rank_str(functor.value(xf, yf)));
            out.push('\n');
        }
    }
    out
}

// ---------------------------------------------------------------------------
// distance

fn cmd_distance(args: &DistanceArgs) -> Result<ExitCode, Failure> {
    let (pres_a, choice_a) = load_module(&args.module, args.prime)?;
    let (pres_b, choice_b) = load_module(&args.module2, args.prime)?;
    if choice_a != choice_b {
        return Err(Failure::Parse(format!(
            "the two modules select different fields ({choice_a} vs {choice_b}); \
             use --prime to force one"
        )));
    }
    if pres_a.n != pres_b.n {
        return Err(Failure::Parse(format!(
            "the two modules have {} and {} parameters",
            pres_a.n, pres_b.n
        )));
    }
    let z = load_condition(&args.stab, pres_a.n)?;
    let (lo, hi) = parse_window(&args.window)?;
    let res = parse_rat(&args.res).map_err(|e| Failure::Parse(format!("--res: {e}")))?;
    let thetas = match &args.theta {
        Some(list) => Some(parse_coords(list, "--theta")?),
        None => None,
    };
    let report = with_field!(choice_a, field => {
        distance_report(&pres_a, &pres_b, field, &z, &lo, &hi, &res, thetas.clone())
    })?;
    let report = DistanceReport {
        field: choice_a.to_string(),
        ..report
    };
    emit_json(&args.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn distance_report<K: Field>(
    pres_a: &Presentation,
    pres_b: &Presentation,
    field: K,
    z: &StabilityCondition,
    lo: &[Rat],
    hi: &[Rat],
    res: &Rat,
    thetas: Option<Vec<Rat>>,
) -> Result<DistanceReport, Failure> {
    let va = realise(pres_a, field.clone())?.module;
    let vb = realise(pres_b, field)?.module;
    let mut iv = FilteredRankInvariant::new(va, z.clone())?;
    let mut iw = FilteredRankInvariant::new(vb, z.clone())?;
    let (strategy, thetas) = match thetas {
        Some(ts) => ("given", ts),
        None => ("auto", theta_candidates(&mut iv, &mut iw, lo, hi, res)?),
    };
    let k_max = 3;
    let tol = parse_rat("1/64").expect("the tolerance literal parses");
    let mut per_theta = Vec::with_capacity(thetas.len());
    let mut hn = Rat::zero();
    for theta in &thetas {
        let sv = sample_s(&mut iv, theta, lo, hi, res)?;
        let sw = sample_s(&mut iw, theta, lo, hi, res)?;
        let erosion = erosion_distance(&sv, &sw)?;
        let landscape = landscape_distance(&mut iv, &mut iw, theta, k_max, lo, hi, res, &tol)?;
        hn = hn.max(erosion.clone());
        per_theta.push(ThetaDistances {
            theta: format_rat(theta),
            erosion: format_rat(&erosion),
            landscape: format_rat(&landscape),
        });
    }
    Ok(DistanceReport {
        field: String::new(),
        window_lo: rats_str(lo),
        window_hi: rats_str(hi),
        resolution: format_rat(res),
        theta_strategy: strategy.to_string(),
        per_theta,
        hn_distance: format_rat(&hn),
        landscape_k_max: k_max,
        landscape_tol: format_rat(&tol),
    })
}

// ---------------------------------------------------------------------------
// harness

fn cmd_harness(args: &HarnessArgs) -> Result<ExitCode, Failure> {
    let mutation = args.mutate.as_deref().map(|_| Mutation::SlopeSignFlip);
    let cfg = HarnessConfig {
        seed: args.seed,
        quick: args.quick,
        mutation,
    };
    let indices: Vec<usize> = match args.check {
        Some(k) => vec![k],
        None => (1..=CHECK_COUNT).collect(),
    };
    let mut checks = Vec::with_capacity(indices.len());
    for k in indices {
        let report = run_check(k, &cfg)?;
        eprintln!(
            "check {} ({}): {}{}",
            report.index,
            report.name,
            if report.passed { "PASS" } else { "FAIL" },
            if report.passed {
                format!(" ({} cases)", report.cases)
            } else {
                format!(" — {}", report.detail)
            }
        );
        checks.push(report);
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = HarnessReport {
        seed: args.seed,
        quick: args.quick,
        mutation: args.mutate.clone(),
        passed,
        checks: checks
            .into_iter()
            .map(|c| CheckEntry {
                index: c.index,
                name: c.name.to_string(),
                passed: c.passed,
                cases: c.cases,
                detail: c.detail,
            })
            .collect(),
    };
    emit_json(&args.out, &report)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ---------------------------------------------------------------------------
// breakpoints

fn cmd_breakpoints(args: &BreakpointsArgs) -> Result<ExitCode, Failure> {
    let (pres, choice) = load_module(&args.module, args.prime)?;
    let z = load_condition(&args.stab, pres.n)?;
    let (lo, hi) = parse_window(&args.window)?;
    if lo.len() != 1 {
        return Err(Failure::Parse(format!(
            "breakpoints takes a one-parameter window, got {} coordinates",
            lo.len()
        )));
    }
    let report = with_field!(choice, field => {
        let v = realise(&pres, field)?.module;
        let bp = x_breakpoints_1d(&v, &z, &lo[0], &hi[0])?;
        let (region_lo, region_hi) = bp.region();
        Ok::<_, Failure>(BreakpointsReport {
            field: choice.to_string(),
            region: vec![format_rat(region_lo), format_rat(region_hi)],
            breakpoints: rats_str(bp.breakpoints()),
            interval_types: bp.interval_types().iter().map(type_entries).collect(),
        })
    })?;
    emit_json(&args.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Hn(args) => cmd_hn(args),
        Command::S(args) => cmd_s(args),
        Command::Distance(args) => cmd_distance(args),
        Command::Harness(args) => cmd_harness(args),
        Command::Breakpoints(args) => cmd_breakpoints(args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
