//! Seeded property harness: randomised cross-validation of the filtration
//! engine, the invariants, and the distances.
//!
//! The harness packages ten numbered checks. Each one generates a seeded
//! stream of random modules, stability conditions, refinements, maps, or
//! perturbation pairs, runs the library against an independent reference
//! (the brute-force oracle, a closed-form formula, a theorem-level
//! inequality, or dense sampling), and reports pass/fail with the first
//! violation spelled out. All randomness is ChaCha8 from an explicit seed,
//! so every run is reproducible.
//!
//! [`Mutation::SlopeSignFlip`] is a self-test hook: it corrupts the slope
//! comparator handed to the reference oracle, and a healthy suite must then
//! fail check 1 — proving the harness can actually catch a sign bug.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chamber::{hn_shape_at, x_breakpoints_1d, HNShape};
use crate::distance::{
    erosion_distance, hn_distance, landscape_distance, perturb_presentation, sample_s,
    verify_interleaving,
};
use crate::grid::{point_leq, GridPoset};
use crate::hn::{
    check_functoriality, hn_filtration, is_semistable_oracle, oracle_hn_filtration, HNFiltration,
};
use crate::invariants::FilteredRankInvariant;
use crate::module::{
    hom_basis, realise, realise_on_grid, GridModule, Presentation, RankValue, Relation, Submodule,
};
use crate::scalar::{rat, rat_int, PrimeField, Rat};
use crate::stability::{
    theta_min, AlphaSpec, AlphaTerm, BetaSpec, CarrierAxis, DiscreteStability, SignPolicy,
    StabilityCondition,
};
use crate::Error;
use num_traits::One;

/// Submodule-enumeration budget handed to the brute-force oracle.
pub const ORACLE_BUDGET: usize = 1 << 20;

/// Number of checks in the suite.
pub const CHECK_COUNT: usize = 10;

/// A deliberate corruption injected into a check's reference computation,
/// used to demonstrate that the suite has teeth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the sign of the slope numerator seen by the reference oracle.
    SlopeSignFlip,
}

/// Configuration of a harness run.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    /// Master seed; every check derives its own stream from it.
    pub seed: u64,
    /// Run reduced case counts (sub-minute smoke version).
    pub quick: bool,
    /// Optional self-test corruption; a healthy suite fails under it.
    pub mutation: Option<Mutation>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 42,
            quick: false,
            mutation: None,
        }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    /// 1-based index of the check.
    pub index: usize,
    /// Short stable name.
    pub name: &'static str,
    pub passed: bool,
    /// Number of cases exercised (0 when the check failed before counting).
    pub cases: usize,
    /// "ok" or the first violation.
    pub detail: String,
}

/// The stable names of the ten checks, in order.
pub const CHECK_NAMES: [&str; CHECK_COUNT] = [
    "oracle-equivalence",
    "commuting-diagram",
    "semistability-transfer",
    "skyscraper-closed-form",
    "low-threshold-rank",
    "interleaving-stability",
    "functoriality",
    "landscape-chain",
    "chamber-breakpoints",
    "validation-guardrails",
];

type CheckResult = std::result::Result<usize, String>;

fn finish(index: usize, result: CheckResult) -> CheckReport {
    let name = CHECK_NAMES[index - 1];
    match result {
        Ok(cases) => CheckReport {
            index,
            name,
            passed: true,
            cases,
            detail: "ok".to_string(),
        },
        Err(detail) => CheckReport {
            index,
            name,
            passed: false,
            cases: 0,
            detail,
        },
    }
}

/// Runs one check (1 through 10).
pub fn run_check(index: usize, cfg: &HarnessConfig) -> crate::Result<CheckReport> {
    let result = match index {
        1 => check_oracle_equivalence(cfg),
        2 => check_commuting_diagram(cfg),
        3 => check_semistability_transfer(cfg),
        4 => check_skyscraper_closed_form(cfg),
        5 => check_low_threshold_rank(cfg),
        6 => check_interleaving_stability(cfg),
        7 => check_functoriality_suite(cfg),
        8 => check_landscape_chain(cfg),
        9 => check_chamber_breakpoints(cfg),
        10 => check_validation_guardrails(cfg),
        _ => {
            return Err(Error::InvalidArgument {
                op: "run_check",
                detail: format!("check index {index} is not in 1..=10"),
            })
        }
    };
    Ok(finish(index, result))
}

/// Runs the whole suite in order.
pub fn run_all(cfg: &HarnessConfig) -> Vec<CheckReport> {
    (1..=CHECK_COUNT)
        .map(|k| run_check(k, cfg).expect("check indices 1..=10 are valid"))
        .collect()
}

fn rng_for(seed: u64, check: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ check.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn quota(cfg: &HarnessConfig, full: usize, quick: usize) -> usize {
    if cfg.quick {
        quick
    } else {
        full
    }
}

fn internal(case: usize, e: Error) -> String {
    format!("case {case}: internal error: {e}")
}

// ---------------------------------------------------------------------------
// random generators

fn f2() -> PrimeField {
    PrimeField::new(2).expect("2 is prime")
}

/// Small half-integer coordinate pool; keeps natural grids at three or fewer
/// values per axis.
fn pool_rat(rng: &mut ChaCha8Rng) -> Rat {
    match rng.gen_range(0..3) {
        0 => rat_int(0),
        1 => rat(1, 2),
        _ => rat_int(1),
    }
}

fn pool_bump(v: &Rat) -> Option<Rat> {
    if *v < rat(1, 2) {
        Some(rat(1, 2))
    } else if *v < rat_int(1) {
        Some(rat_int(1))
    } else {
        None
    }
}

/// A random presentation with generators on the coordinate pool and
/// relations placed at joins of the generators they involve (valid by
/// construction).
fn random_presentation(rng: &mut ChaCha8Rng, n: usize, max_gens: usize) -> Presentation {
    let g = rng.gen_range(1..=max_gens);
    let generators: Vec<Vec<Rat>> = (0..g)
        .map(|_| (0..n).map(|_| pool_rat(rng)).collect())
        .collect();
    let r = rng.gen_range(0..=2usize);
    let mut relations = Vec::with_capacity(r);
    for _ in 0..r {
        let size = rng.gen_range(1..=g.min(2));
        let mut idxs: Vec<usize> = (0..g).collect();
        idxs.shuffle(rng);
        idxs.truncate(size);
        let mut position: Vec<Rat> = (0..n)
            .map(|axis| {
                idxs.iter()
                    .map(|&gi| generators[gi][axis].clone())
                    .max()
                    .expect("a relation involves at least one generator")
            })
            .collect();
        for p in position.iter_mut() {
            if rng.gen_bool(0.5) {
                if let Some(up) = pool_bump(p) {
                    *p = up;
                }
            }
        }
        let mut coeffs = vec![rat_int(0); g];
        for &gi in &idxs {
            coeffs[gi] = rat_int(1);
        }
        relations.push(Relation { position, coeffs });
    }
    Presentation {
        n,
        generators,
        relations,
    }
}

/// A random nonzero module over F_2 with bounded total dimension.
fn random_f2_module(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_gens: usize,
    max_total: usize,
) -> GridModule<PrimeField> {
    for _ in 0..200 {
        let p = random_presentation(rng, n, max_gens);
        if let Ok(re) = realise(&p, f2()) {
            let m = re.module;
            let total = m.total_dim();
            if total > 0 && total <= max_total {
                return m;
            }
        }
    }
    // a single generator at the top corner always realises to total dim 1
    let p = Presentation {
        n,
        generators: vec![vec![rat_int(1); n]],
        relations: Vec::new(),
    };
    realise(&p, f2())
        .expect("a single-generator presentation realises")
        .module
}

/// Random per-vertex weights: nonnegative numerator (zero half the time),
/// strictly positive denominator.
fn random_discrete_stability(rng: &mut ChaCha8Rng, grid: &GridPoset) -> DiscreteStability {
    let alpha: Vec<Rat> = (0..grid.len())
        .map(|_| {
            if rng.gen_bool(0.5) {
                rat_int(0)
            } else {
                match rng.gen_range(0..3) {
                    0 => rat(1, 2),
                    1 => rat_int(1),
                    _ => rat_int(2),
                }
            }
        })
        .collect();
    let beta: Vec<Rat> = (0..grid.len())
        .map(|_| match rng.gen_range(0..4) {
            0 => rat(1, 2),
            1 => rat_int(1),
            2 => rat(3, 2),
            _ => rat_int(2),
        })
        .collect();
    DiscreteStability::new(grid.clone(), alpha, beta)
        .expect("positive denominators always validate")
}

/// A random continuous stability condition on the unit window: a skyscraper
/// or a short nonnegative evaluation functional, over the default density.
fn random_condition(rng: &mut ChaCha8Rng, n: usize) -> crate::Result<StabilityCondition> {
    let zeros = vec![rat_int(0); n];
    let ones = vec![rat_int(1); n];
    let beta = BetaSpec::default_for_bbox(&zeros, &ones)?;
    if rng.gen_bool(0.5) {
        let q: Vec<Rat> = (0..n).map(|_| pool_rat(rng)).collect();
        StabilityCondition::skyscraper(&q, beta)
    } else {
        let t = rng.gen_range(1..=2);
        let terms: Vec<(Vec<Rat>, Rat)> = (0..t)
            .map(|_| {
                let q: Vec<Rat> = (0..n).map(|_| pool_rat(rng)).collect();
                let c = match rng.gen_range(0..3) {
                    0 => rat(1, 2),
                    1 => rat_int(1),
                    _ => rat_int(2),
                };
                (q, c)
            })
            .collect();
        StabilityCondition::new(n, AlphaSpec::Eval(terms), beta, SignPolicy::Engine)
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, pool: &[Rat]) -> Vec<Rat> {
    (0..n)
        .map(|_| pool[rng.gen_range(0..pool.len())].clone())
        .collect()
}

/// Per-axis extra refinement coordinates off the usual pool.
fn random_extra(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Rat>> {
    let pool = [rat(-1, 4), rat(1, 4), rat(3, 4), rat(5, 4)];
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=2);
            let mut axis: Vec<Rat> = (0..k)
                .map(|_| pool[rng.gen_range(0..pool.len())].clone())
                .collect();
            axis.sort();
            axis.dedup();
            axis
        })
        .collect()
}

/// A random bounded half-open box presentation, optionally a direct sum of
/// two boxes when `n == 1`.
fn random_box_presentation(rng: &mut ChaCha8Rng, n: usize) -> crate::Result<Presentation> {
    let one_box = |rng: &mut ChaCha8Rng| -> crate::Result<Presentation> {
        let lo: Vec<Rat> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { rat_int(0) } else { rat(1, 2) })
            .collect();
        let hi: Vec<Option<Rat>> = lo
            .iter()
            .map(|l| {
                let d = if rng.gen_bool(0.5) {
                    rat_int(1)
                } else {
                    rat(3, 2)
                };
                Some(l + d)
            })
            .collect();
        Presentation::half_open_box(&lo, &hi)
    };
    let mut p = one_box(rng)?;
    if n == 1 && rng.gen_bool(0.5) {
        p = p.direct_sum(&one_box(rng)?)?;
    }
    Ok(p)
}

/// The reference condition for distance checks: a skyscraper at the origin
/// over the default density on the unit box.
fn distance_condition(n: usize) -> crate::Result<StabilityCondition> {
    let zeros = vec![rat_int(0); n];
    let ones = vec![rat_int(1); n];
    StabilityCondition::skyscraper(&zeros, BetaSpec::default_for_bbox(&zeros, &ones)?)
}

/// Pushforward of a per-vertex dimension function along a grid inclusion:
/// read through floors, zero below the coarse grid.
fn pushforward_dims(dims: &[usize], coarse: &GridPoset, fine: &GridPoset) -> Vec<usize> {
    fine.all_indices()
        .iter()
        .map(|fi| match coarse.floor(&fine.coords(fi)) {
            Some(ci) => dims[coarse.flat(&ci)],
            None => 0,
        })
        .collect()
}

fn filtration_dims<K: crate::scalar::Field>(filt: &HNFiltration<K>) -> Vec<Vec<usize>> {
    filt.steps().iter().map(Submodule::dims).collect()
}

// ---------------------------------------------------------------------------
// check 1: engine vs brute-force oracle

fn check_oracle_equivalence(cfg: &HarnessConfig) -> CheckResult {
    let mut rng = rng_for(cfg.seed, 1);
    let total = quota(cfg, 300, 40);
    for case in 0..total {
        let n = rng.gen_range(1..=2);
        let u = random_f2_module(&mut rng, n, 3, 8);
        let ds = random_discrete_stability(&mut rng, u.grid());
        let engine = hn_filtration(&u, &ds).map_err(|e| internal(case, e))?;
        let reference_ds = match cfg.mutation {
            Some(Mutation::SlopeSignFlip) => {
                let flipped: Vec<Rat> = ds.alpha().iter().map(|a| -a).collect();
                DiscreteStability::new(ds.grid().clone(), flipped, ds.beta().to_vec())
                    .map_err(|e| internal(case, e))?
            }
            None => ds.clone(),
        };
        let reference = oracle_hn_filtration(&u, &reference_ds, ORACLE_BUDGET)
            .map_err(|e| internal(case, e))?;
        if engine.steps() != reference.steps() || engine.slopes() != reference.slopes() {
            return Err(format!(
                "case {case}: the engine filtration disagrees with the exhaustive oracle \
                 ({} vs {} steps)",
                engine.len(),
                reference.len()
            ));
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// check 2: invariance under refinement of the adapted grid

fn check_commuting_diagram(cfg: &HarnessConfig) -> CheckResult {
    let mut rng = rng_for(cfg.seed, 2);
    let total = quota(cfg, 100, 15);
    let shift_pool = [rat(-1, 2), rat_int(0), rat(1, 2)];
    let gap_pool = [rat_int(0), rat(1, 2), rat_int(1)];
    let theta_pool = [rat_int(-1), rat_int(0), rat(1, 2), rat_int(1), rat_int(2)];
    for case in 0..total {
        let n = rng.gen_range(1..=2);
        let u = random_f2_module(&mut rng, n, 3, 8);
        let z = random_condition(&mut rng, n).map_err(|e| internal(case, e))?;
        let mut inv =
            FilteredRankInvariant::new(u.clone(), z.clone()).map_err(|e| internal(case, e))?;
        let x = random_point(&mut rng, n, &shift_pool);
        let y: Vec<Rat> = x
            .iter()
            .map(|c| c + &gap_pool[rng.gen_range(0..gap_pool.len())])
            .collect();
        let theta = theta_pool[rng.gen_range(0..theta_pool.len())].clone();
        let extra = random_extra(&mut rng, n);

        // the scalar invariant must not see the refinement
        let plain = inv.s_eval(&theta, &x, &y).map_err(|e| internal(case, e))?;
        let refined = inv
            .s_eval_refined(&theta, &x, &y, &extra)
            .map_err(|e| internal(case, e))?;
        if plain != refined {
            return Err(format!(
                "case {case}: s({theta}; x, y) changed under grid refinement: \
                 {plain} vs {refined}"
            ));
        }

        // the filtration must push forward step by step
        let (ea, dsa) = inv.discretise_at(&x).map_err(|e| internal(case, e))?;
        let (er, dsr) = inv
            .discretise_refined(&x, &extra)
            .map_err(|e| internal(case, e))?;
        let filt_a = hn_filtration(&ea, &dsa).map_err(|e| internal(case, e))?;
        let filt_r = hn_filtration(&er, &dsr).map_err(|e| internal(case, e))?;
        if filt_a.slopes() != filt_r.slopes() {
            return Err(format!(
                "case {case}: refinement changed the quotient slopes: {:?} vs {:?}",
                filt_a.slopes(),
                filt_r.slopes()
            ));
        }
        for (i, (sa, sr)) in filtration_dims(&filt_a)
            .iter()
            .zip(filtration_dims(&filt_r).iter())
            .enumerate()
        {
            let pushed = pushforward_dims(sa, ea.grid(), er.grid());
            if &pushed != sr {
                return Err(format!(
                    "case {case}: step {i} of the refined filtration is not the \
                     pushforward of the coarse step"
                ));
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// check 3: semistability transfers along refinement, both ways

fn check_semistability_transfer(cfg: &HarnessConfig) -> CheckResult {
    let mut rng = rng_for(cfg.seed, 3);
    let needed = quota(cfg, 100, 15);
    let mut semistable_seen = 0usize;
    let mut attempts = 0usize;
    let cap = needed * 30;
    while semistable_seen < needed {
        if attempts >= cap {
            return Err(format!(
                "generator starved: only {semistable_seen} of {needed} semistable modules \
                 in {cap} attempts"
            ));
        }
        let case = attempts;
        attempts += 1;
        let n = rng.gen_range(1..=2);
        let u = random_f2_module(&mut rng, n, 2, 6);
        let z = random_condition(&mut rng, n).map_err(|e| internal(case, e))?;
        let inv =
            FilteredRankInvariant::new(u.clone(), z.clone()).map_err(|e| internal(case, e))?;
        let origin = vec![rat_int(0); n];
        let extra = random_extra(&mut rng, n);
        let (ea, dsa) = inv.discretise_at(&origin).map_err(|e| internal(case, e))?;
        let (er, dsr) = inv
            .discretise_refined(&origin, &extra)
            .map_err(|e| internal(case, e))?;
        let ss_coarse = match is_semistable_oracle(&ea, &dsa, ORACLE_BUDGET) {
            Ok(b) => b,
            Err(Error::BudgetExceeded { .. }) => continue,
            Err(e) => return Err(internal(case, e)),
        };
        let ss_fine = match is_semistable_oracle(&er, &dsr, ORACLE_BUDGET) {
            Ok(b) => b,
            Err(Error::BudgetExceeded { .. }) => continue,
            Err(e) => return Err(internal(case, e)),
        };
        if ss_coarse != ss_fine {
            return Err(format!(
                "case {case}: semistability is not preserved by refinement \
                 (coarse {ss_coarse}, refined {ss_fine})"
            ));
        }
        if ss_coarse {
            semistable_seen += 1;
        }
    }
    Ok(semistable_seen)
}

// ---------------------------------------------------------------------------
// check 4: closed form for the unit square under the origin skyscraper

fn check_skyscraper_closed_form(cfg: &HarnessConfig) -> CheckResult {
    let total = quota(cfg, 200, 50);
    let mut rng = rng_for(cfg.seed, 4);
    let zero = rat_int(0);
    let one = Rat::one();
    let pres = Presentation::half_open_box(
        &[zero.clone(), zero.clone()],
        &[Some(one.clone()), Some(one.clone())],
    )
    .map_err(|e| internal(0, e))?;
    let v = realise(&pres, f2()).map_err(|e| internal(0, e))?.module;
    let beta = BetaSpec::new(
        vec![vec![rat_int(0), rat_int(1)], vec![rat_int(0), rat_int(1)]],
        vec![rat_int(1)],
        vec![(rat(1, 2), rat(1, 2)); 2],
    )
    .map_err(|e| internal(0, e))?;
    let z = StabilityCondition::skyscraper(&[zero.clone(), zero.clone()], beta)
        .map_err(|e| internal(0, e))?;
    let mut inv = FilteredRankInvariant::new(v, z).map_err(|e| internal(0, e))?;

    let x_pool = [
        rat(-1, 5),
        rat_int(0),
        rat(1, 5),
        rat(2, 5),
        rat(1, 2),
        rat(3, 5),
        rat(4, 5),
        rat(7, 8),
    ];
    let gap_pool = [rat_int(0), rat(1, 5), rat(1, 2), rat_int(1)];
    let theta_pool = [rat(1, 2), rat_int(1), rat(3, 2), rat_int(2), rat_int(3), rat_int(4)];
    for case in 0..total {
        let theta = theta_pool[rng.gen_range(0..theta_pool.len())].clone();
        let x = random_point(&mut rng, 2, &x_pool);
        let mut y: Vec<Rat> = x
            .iter()
            .map(|c| c + &gap_pool[rng.gen_range(0..gap_pool.len())])
            .collect();
        if rng.gen_bool(0.15) {
            // deliberately incomparable pair
            y[rng.gen_range(0..2)] = &x[0] - rat(1, 5) - rat(1, 5);
        }
        let got = inv.s_eval(&theta, &x, &y).map_err(|e| internal(case, e))?;
        let expected = if !point_leq(&x, &y) {
            RankValue::Infinite
        } else {
            let in_square = |p: &[Rat]| p.iter().all(|c| *c >= zero && *c < one);
            let vol = (&one - &x[0]) * (&one - &x[1]);
            let survives = vol * &theta <= one;
            if in_square(&x) && in_square(&y) && survives {
                RankValue::Finite(1)
            } else {
                RankValue::Finite(0)
            }
        };
        if got != expected {
            return Err(format!(
                "case {case}: s({theta}; {x:?}, {y:?}) = {got}, closed form says {expected}"
            ));
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// check 5: below the minimal threshold, s is the rank invariant

fn check_low_threshold_rank(cfg: &HarnessConfig) -> CheckResult {
    let mut rng = rng_for(cfg.seed, 5);
    let total = quota(cfg, 50, 10);
    let shift_pool = [rat(-1, 2), rat_int(0), rat(1, 2), rat_int(1)];
    let gap_pool = [rat_int(0), rat(1, 2), rat_int(1)];
    for case in 0..total {
        let n = rng.gen_range(1..=2);
        let u = random_f2_module(&mut rng, n, 3, 8);
        let z = random_condition(&mut rng, n).map_err(|e| internal(case, e))?;
        let low = theta_min(&z) - Rat::one();
        let mut inv =
            FilteredRankInvariant::new(u.clone(), z).map_err(|e| internal(case, e))?;
        for _ in 0..5 {
            let x = random_point(&mut rng, n, &shift_pool);
            let y: Vec<Rat> = x
                .iter()
                .map(|c| c + &gap_pool[rng.gen_range(0..gap_pool.len())])
                .collect();
            let s = inv.s_eval(&low, &x, &y).map_err(|e| internal(case, e))?;
            let rho = u.rank_invariant(&x, &y);
            if s != rho {
                return Err(format!(
                    "case {case}: s below the minimal threshold is {s} but the rank \
                     invariant is {rho} at ({x:?}, {y:?})"
                ));
            }
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// checks 6 and 8: perturbation pairs

struct PerturbedPair {
    v: GridModule<PrimeField>,
    w: GridModule<PrimeField>,
    cert: crate::distance::InterleavingCertificate<PrimeField>,
    epsilon: Rat,
    n: usize,
}

fn perturbation_pairs(cfg: &HarnessConfig) -> std::result::Result<Vec<PerturbedPair>, String> {
    let mut rng = rng_for(cfg.seed, 6);
    let (n1, n2) = if cfg.quick { (5, 1) } else { (40, 10) };
    let eps_pool = [rat(1, 4), rat(1, 2), rat_int(1)];
    let mut out = Vec::with_capacity(n1 + n2);
    for case in 0..n1 + n2 {
        let n = if case < n1 { 1 } else { 2 };
        let pres = random_box_presentation(&mut rng, n).map_err(|e| internal(case, e))?;
        let epsilon = eps_pool[case % eps_pool.len()].clone();
        let perturb_seed = rng.gen::<u64>();
        let (moved, cert) = perturb_presentation(&pres, f2(), &epsilon, perturb_seed)
            .map_err(|e| internal(case, e))?;
        let v = realise(&pres, f2()).map_err(|e| internal(case, e))?.module;
        let w = realise(&moved, f2()).map_err(|e| internal(case, e))?.module;
        out.push(PerturbedPair {
            v,
            w,
            cert,
            epsilon,
            n,
        });
    }
    Ok(out)
}

/// Window and resolution ladder for sampled distances: full resolution 1/8
/// on a window around the unit box, finer 1/16 on the unit box itself.
fn distance_windows(n: usize) -> Vec<(Vec<Rat>, Vec<Rat>, Rat)> {
    if n == 1 {
        vec![
            (vec![rat_int(-1)], vec![rat_int(2)], rat(1, 8)),
            (vec![rat_int(-1)], vec![rat_int(2)], rat(1, 16)),
        ]
    } else {
        vec![
            (vec![rat(-1, 2); n], vec![rat(3, 2); n], rat(1, 8)),
            (vec![rat_int(0); n], vec![rat_int(1); n], rat(1, 16)),
        ]
    }
}

fn check_interleaving_stability(cfg: &HarnessConfig) -> CheckResult {
    let pairs = perturbation_pairs(cfg)?;
    for (case, pair) in pairs.iter().enumerate() {
        let ok = verify_interleaving(&pair.cert, &pair.v, &pair.w)
            .map_err(|e| internal(case, e))?;
        if !ok {
            return Err(format!(
                "case {case}: the perturbation certificate fails verification at \
                 radius {}",
                pair.epsilon
            ));
        }
        let z = distance_condition(pair.n).map_err(|e| internal(case, e))?;
        for (lo, hi, res) in distance_windows(pair.n) {
            let d = hn_distance(&pair.v, &pair.w, &z, &lo, &hi, &res)
                .map_err(|e| internal(case, e))?;
            if d > pair.epsilon {
                return Err(format!(
                    "case {case}: filtered-invariant distance {d} exceeds the \
                     perturbation radius {} at resolution {res}",
                    pair.epsilon
                ));
            }
        }
    }
    Ok(pairs.len())
}

// ---------------------------------------------------------------------------
// check 7: the theta-step is functorial in the module

fn check_functoriality_suite(cfg: &HarnessConfig) -> CheckResult {
    let mut rng = rng_for(cfg.seed, 7);
    let needed = quota(cfg, 200, 30);
    let mut maps_checked = 0usize;
    let mut attempts = 0usize;
    let cap = needed * 20;
    while maps_checked < needed {
        if attempts >= cap {
            return Err(format!(
                "generator starved: only {maps_checked} of {needed} maps in {cap} attempts"
            ));
        }
        let case = attempts;
        attempts += 1;
        let n = rng.gen_range(1..=2);
        let axes: Vec<Vec<Rat>> = if n == 1 {
            vec![vec![rat_int(0), rat(1, 2), rat_int(1)]]
        } else {
            vec![vec![rat_int(0), rat_int(1)]; 2]
        };
        let grid = GridPoset::new(axes).map_err(|e| internal(case, e))?;
        let src_pres = random_presentation(&mut rng, n, 2);
        let tgt_pres = random_presentation(&mut rng, n, 2);
        let source = match realise_on_grid(&src_pres, f2(), &grid) {
            Ok(re) => re.module,
            Err(_) => continue,
        };
        let target = match realise_on_grid(&tgt_pres, f2(), &grid) {
            Ok(re) => re.module,
            Err(_) => continue,
        };
        if source.is_zero() || target.is_zero() {
            continue;
        }
        let basis = hom_basis(&source, &target).map_err(|e| internal(case, e))?;
        if basis.is_empty() {
            continue;
        }
        let ds = random_discrete_stability(&mut rng, &grid);
        let fs = hn_filtration(&source, &ds).map_err(|e| internal(case, e))?;
        let ft = hn_filtration(&target, &ds).map_err(|e| internal(case, e))?;
        let mut thetas: BTreeSet<Rat> = BTreeSet::new();
        thetas.extend(fs.slopes().iter().cloned());
        thetas.extend(ft.slopes().iter().cloned());
        let lowest = thetas.iter().next().cloned();
        let highest = thetas.iter().next_back().cloned();
        if let Some(t) = lowest {
            thetas.insert(t - Rat::one());
        }
        if let Some(t) = highest {
            thetas.insert(t + Rat::one());
        }
        for f in basis.iter().take(3) {
            for theta in &thetas {
                let ok =
                    check_functoriality(f, &ds, theta).map_err(|e| internal(case, e))?;
                if !ok {
                    return Err(format!(
                        "case {case}: a module map carries the step at threshold {theta} \
                         outside the target's step"
                    ));
                }
            }
            maps_checked += 1;
            if maps_checked >= needed {
                break;
            }
        }
    }
    Ok(maps_checked)
}

// ---------------------------------------------------------------------------
// check 8: landscape distance <= sampled erosion <= perturbation radius

fn check_landscape_chain(cfg: &HarnessConfig) -> CheckResult {
    let pairs = perturbation_pairs(cfg)?;
    let tol = rat(1, 64);
    for (case, pair) in pairs.iter().enumerate() {
        let z = distance_condition(pair.n).map_err(|e| internal(case, e))?;
        let thetas = [theta_min(&z) - Rat::one(), rat(1, 2), rat_int(2)];
        let (lo, hi, res) = distance_windows(pair.n)
            .into_iter()
            .next()
            .expect("the window ladder is nonempty");
        let mut iv = FilteredRankInvariant::new(pair.v.clone(), z.clone())
            .map_err(|e| internal(case, e))?;
        let mut iw = FilteredRankInvariant::new(pair.w.clone(), z.clone())
            .map_err(|e| internal(case, e))?;
        for theta in &thetas {
            let sv = sample_s(&mut iv, theta, &lo, &hi, &res).map_err(|e| internal(case, e))?;
            let sw = sample_s(&mut iw, theta, &lo, &hi, &res).map_err(|e| internal(case, e))?;
            let erosion = erosion_distance(&sv, &sw).map_err(|e| internal(case, e))?;
            if erosion > pair.epsilon {
                return Err(format!(
                    "case {case}: sampled erosion {erosion} at threshold {theta} exceeds \
                     the perturbation radius {}",
                    pair.epsilon
                ));
            }
            let lambda = landscape_distance(&mut iv, &mut iw, theta, 3, &lo, &hi, &res, &tol)
                .map_err(|e| internal(case, e))?;
            if lambda > erosion {
                return Err(format!(
                    "case {case}: landscape distance {lambda} at threshold {theta} exceeds \
                     the sampled erosion {erosion}"
                ));
            }
        }
    }
    Ok(pairs.len())
}

// ---------------------------------------------------------------------------
// check 9: exact 1-d breakpoints vs dense sampling

fn check_chamber_breakpoints(cfg: &HarnessConfig) -> CheckResult {
    let mut rng = rng_for(cfg.seed, 9);
    let needed = quota(cfg, 30, 6);
    let mut done = 0usize;
    let mut attempts = 0usize;
    let cap = needed * 10;
    let lo = rat_int(-2);
    let hi = rat_int(2);
    let step = rat(1, 64);
    let carrier_pool = [rat_int(0), rat(1, 2), rat_int(1)];
    while done < needed {
        if attempts >= cap {
            return Err(format!(
                "generator starved: only {done} of {needed} modules in {cap} attempts"
            ));
        }
        let case = attempts;
        attempts += 1;
        let v = random_f2_module(&mut rng, 1, 2, 3);
        let q = [carrier_pool[rng.gen_range(0..carrier_pool.len())].clone()];
        let beta = BetaSpec::default_for_bbox(&[rat_int(0)], &[rat_int(1)])
            .map_err(|e| internal(case, e))?;
        let z = StabilityCondition::skyscraper(&q, beta).map_err(|e| internal(case, e))?;
        let bp = match x_breakpoints_1d(&v, &z, &lo, &hi) {
            Ok(bp) => bp,
            // modules whose walls the exact sweep cannot represent or afford
            // are regenerated rather than silently mis-scored
            Err(Error::BudgetExceeded { .. }) => continue,
            Err(Error::InvariantViolation { detail, .. }) if detail.contains("irrational") => {
                continue
            }
            Err(e) => return Err(internal(case, e)),
        };
        let mut inv =
            FilteredRankInvariant::new(v.clone(), z.clone()).map_err(|e| internal(case, e))?;
        let mut samples: Vec<(Rat, HNShape)> = Vec::new();
        let count = 257; // steps of 1/64 across [-2, 2]
        for k in 0..count {
            let x = &lo + &step * rat_int(k);
            let shape =
                hn_shape_at(&mut inv, std::slice::from_ref(&x)).map_err(|e| internal(case, e))?;
            samples.push((x, shape));
        }
        // direction 1: a sampled change must be covered by a breakpoint
        for pair in samples.windows(2) {
            let (x0, s0) = &pair[0];
            let (x1, s1) = &pair[1];
            if s0 != s1 {
                let covered = bp.breakpoints().iter().any(|b| b >= x0 && b <= x1);
                if !covered {
                    return Err(format!(
                        "case {case}: the filtration shape changes between {x0} and {x1} \
                         with no recorded breakpoint"
                    ));
                }
            }
        }
        // direction 2: every recorded breakpoint marks a real change
        for b in bp.breakpoints() {
            let straddling = samples.windows(2).any(|pair| {
                let (x0, s0) = &pair[0];
                let (x1, s1) = &pair[1];
                b >= x0 && b <= x1 && s0 != s1
            });
            if straddling {
                continue;
            }
            let delta = {
                let margin_lo = (b - &lo) / rat_int(2);
                let margin_hi = (&hi - b) / rat_int(2);
                rat(1, 128).min(margin_lo).min(margin_hi)
            };
            let left = hn_shape_at(&mut inv, std::slice::from_ref(&(b - &delta)))
                .map_err(|e| internal(case, e))?;
            let mid = hn_shape_at(&mut inv, std::slice::from_ref(b))
                .map_err(|e| internal(case, e))?;
            let right = hn_shape_at(&mut inv, std::slice::from_ref(&(b + &delta)))
                .map_err(|e| internal(case, e))?;
            if left == mid && mid == right {
                return Err(format!(
                    "case {case}: recorded breakpoint {b} witnesses no change in the \
                     filtration shape"
                ));
            }
        }
        done += 1;
    }
    Ok(done)
}

// ---------------------------------------------------------------------------
// check 10: the classic pathological conditions are rejected by name

fn check_validation_guardrails(_cfg: &HarnessConfig) -> CheckResult {
    let unit_beta = || {
        BetaSpec::new(
            vec![vec![rat_int(0), rat_int(1)]],
            vec![rat_int(1)],
            vec![(rat(1, 2), rat(1, 2))],
        )
        .expect("the unit density validates")
    };

    // a negative evaluation coefficient admits no maximal destabiliser
    let r = StabilityCondition::new(
        1,
        AlphaSpec::Eval(vec![(vec![rat_int(0)], rat_int(-1))]),
        unit_beta(),
        SignPolicy::OracleSigned,
    );
    if !matches!(
        r,
        Err(Error::InvalidStability(
            crate::stability::Diagnostic::NegativePointMass { .. }
        ))
    ) {
        return Err("a negative point evaluation was not rejected as such".to_string());
    }

    // a limit functional needs an unbounded carrier
    let r = StabilityCondition::new(
        1,
        AlphaSpec::Step(vec![AlphaTerm {
            carrier: vec![CarrierAxis::Interval(rat_int(0), None)],
            coeff: rat_int(1),
        }]),
        unit_beta(),
        SignPolicy::Engine,
    );
    if !matches!(
        r,
        Err(Error::InvalidStability(
            crate::stability::Diagnostic::UnboundedAlphaCarrier { .. }
        ))
    ) {
        return Err("an unbounded carrier was not rejected as such".to_string());
    }

    // a non-decaying density is not integrable, so slopes are undefined
    let r = BetaSpec::new(
        vec![vec![rat_int(0), rat_int(1)]],
        vec![rat_int(1)],
        vec![(rat(1, 2), rat(3, 2))],
    );
    if !matches!(
        r,
        Err(Error::InvalidStability(
            crate::stability::Diagnostic::NonintegrableTail { .. }
        ))
    ) {
        return Err("a non-integrable density was not rejected as such".to_string());
    }

    Ok(3)
}
