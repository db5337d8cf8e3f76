//! Harder-Narasimhan machinery for grid modules over finite fields: the
//! maximal destabilising submodule, semistability tests, the HN filtration
//! and its type, a brute-force oracle that enumerates every submodule, and
//! the functoriality check.
//!
//! The engine relies on two structural facts that hold whenever the discrete
//! imaginary part is nonnegative and the real part strictly positive: every
//! slope-maximising submodule is generated by its components at vertices
//! carrying imaginary mass, and the set of maximisers is closed under sums,
//! so the maximal one is the sum of all of them.

use crate::module::{quotient, sub_generated, GridModule, ModuleMap, Submodule};
use crate::linalg::{enumerate_subspaces, Subspace};
use crate::scalar::{Field, Rat};
use crate::stability::{Diagnostic, DiscreteStability};
use crate::{Error, Result};
use num_traits::Zero;

/// Default cap on the total dimension accepted by the brute-force oracle.
pub const ORACLE_DEFAULT_BUDGET: usize = 8;

/// Cap on the number of subspace tuples the engine will enumerate.
const ENGINE_TUPLE_BUDGET: u64 = 1 << 20;

/// The Harder-Narasimhan filtration of a nonzero module: a strictly
/// increasing chain of submodules ending at the full module, whose successive
/// quotients are semistable of strictly decreasing slope. The zero module has
/// the empty filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct HNFiltration<K: Field> {
    steps: Vec<Submodule<K>>,
    slopes: Vec<Rat>,
}

impl<K: Field> HNFiltration<K> {
    fn new(steps: Vec<Submodule<K>>, slopes: Vec<Rat>) -> Result<Self> {
        if steps.len() != slopes.len() {
            return Err(Error::InvariantViolation {
                op: "HNFiltration::new",
                detail: format!("{} steps but {} slopes", steps.len(), slopes.len()),
            });
        }
        for i in 1..steps.len() {
            if !(steps[i].contains(&steps[i - 1]) && steps[i] != steps[i - 1]) {
                return Err(Error::InvariantViolation {
                    op: "HNFiltration::new",
                    detail: format!("step {i} does not strictly contain step {}", i - 1),
                });
            }
            if slopes[i] >= slopes[i - 1] {
                return Err(Error::InvariantViolation {
                    op: "HNFiltration::new",
                    detail: format!("quotient slopes fail to decrease strictly at step {i}"),
                });
            }
        }
        Ok(HNFiltration { steps, slopes })
    }

    /// The empty filtration of the zero module.
    pub fn empty() -> Self {
        HNFiltration {
            steps: Vec::new(),
            slopes: Vec::new(),
        }
    }

    /// The nonzero filtration steps, strictly increasing; the last one is the
    /// whole module.
    pub fn steps(&self) -> &[Submodule<K>] {
        &self.steps
    }

    /// Slopes of the successive quotients, strictly decreasing, aligned with
    /// `steps`.
    pub fn slopes(&self) -> &[Rat] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The filtration step selected by a slope threshold: the largest step
    /// whose quotient slope is at least `theta` (all thresholds above every
    /// slope select the zero submodule).
    pub fn step_at_threshold(&self, theta: &Rat, parent: &GridModule<K>) -> Submodule<K> {
        let j = self.slopes.iter().take_while(|s| *s >= theta).count();
        if j == 0 {
            Submodule::zero(parent)
        } else {
            self.steps[j - 1].clone()
        }
    }
}

/// The HN type: for each filtration step, the quotient slope paired with the
/// step's dimension vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HNType {
    entries: Vec<(Rat, Vec<usize>)>,
}

impl HNType {
    pub fn entries(&self) -> &[(Rat, Vec<usize>)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// The strictly decreasing quotient slopes.
    pub fn slopes(&self) -> Vec<Rat> {
        self.entries.iter().map(|(s, _)| s.clone()).collect()
    }
}

fn check_context<K: Field>(
    op: &'static str,
    u: &GridModule<K>,
    ds: &DiscreteStability,
) -> Result<()> {
    if u.grid() != ds.grid() {
        return Err(Error::ContextMismatch {
            op,
            detail: "module and discrete stability live on different grids".to_string(),
        });
    }
    Ok(())
}

fn check_engine_alpha(ds: &DiscreteStability) -> Result<()> {
    if let Some(term) = ds.alpha().iter().position(|a| a < &Rat::zero()) {
        return Err(Diagnostic::NegativeAlphaCoefficient { term }.into());
    }
    Ok(())
}

/// Shared state of the engine's depth-first search over subspace tuples at
/// the imaginary-support vertices.
struct Search<'a, K: Field> {
    u: &'a GridModule<K>,
    ds: &'a DiscreteStability,
    supp: Vec<usize>,
    choices: Vec<Vec<Subspace<K>>>,
    seeds: Vec<Subspace<K>>,
    best_slope: Rat,
    best: Submodule<K>,
}

impl<'a, K: Field> Search<'a, K> {
    fn new(u: &'a GridModule<K>, ds: &'a DiscreteStability) -> Result<Self> {
        if u.field().elements().is_none() {
            return Err(Error::InfiniteField {
                op: "max_slope_destabilizer",
            });
        }
        let supp: Vec<usize> = ds
            .supp_alpha()
            .into_iter()
            .filter(|&f| u.dims()[f] > 0)
            .collect();
        let mut choices = Vec::with_capacity(supp.len());
        let mut tuples: u64 = 1;
        for &f in &supp {
            let subs = enumerate_subspaces(u.field(), u.dims()[f], ENGINE_TUPLE_BUDGET)?;
            tuples = tuples.saturating_mul(subs.len() as u64);
            if tuples > ENGINE_TUPLE_BUDGET {
                return Err(Error::BudgetExceeded {
                    op: "max_slope_destabilizer",
                    detail: format!(
                        "more than {ENGINE_TUPLE_BUDGET} subspace tuples at the imaginary support"
                    ),
                });
            }
            choices.push(subs);
        }
        let seeds = (0..u.grid().len())
            .map(|f| Subspace::zero(u.field().clone(), u.dims()[f]))
            .collect();
        let best_slope = ds.slope(&u.dims().to_vec())?;
        let best = Submodule::full(u);
        Ok(Search {
            u,
            ds,
            supp,
            choices,
            seeds,
            best_slope,
            best,
        })
    }

    fn closure(&self) -> Submodule<K> {
        sub_generated(self.u, &self.seeds).expect("seeds match the parent shapes")
    }

    /// Upper bound on the slope of any completion of the current partial
    /// tuple: chosen support vertices have final dimensions (later seeds sit
    /// at lex-greater vertices and only flow upward), unchosen ones are
    /// bounded by the ambient dimension, and the real mass only grows.
    fn prune(&self, depth: usize) -> bool {
        let partial = self.closure();
        let dims = partial.dims();
        let mut num = Rat::zero();
        for (i, &f) in self.supp.iter().enumerate() {
            let d = if i < depth { dims[f] } else { self.u.dims()[f] };
            if d > 0 {
                num += &self.ds.alpha()[f] * Rat::from_integer(d.into());
            }
        }
        let den = self.ds.beta_total(&dims);
        if den.is_zero() {
            // empty partial closure constrains nothing
            return false;
        }
        num / den < self.best_slope
    }

    fn dfs(&mut self, depth: usize) {
        if depth == self.supp.len() {
            let cand = self.closure();
            if cand.is_zero() {
                return;
            }
            let slope = self
                .ds
                .slope(&cand.dims())
                .expect("candidate is a nonzero submodule");
            if slope > self.best_slope {
                self.best_slope = slope;
                self.best = cand;
            } else if slope == self.best_slope {
                self.best = self.best.sum(&cand);
            }
            return;
        }
        if depth > 0 && self.prune(depth) {
            return;
        }
        for i in 0..self.choices[depth].len() {
            self.seeds[self.supp[depth]] = self.choices[depth][i].clone();
            self.dfs(depth + 1);
        }
        let f = self.supp[depth];
        self.seeds[f] = Subspace::zero(self.u.field().clone(), self.u.dims()[f]);
    }
}

/// The maximal submodule of maximal slope, together with that slope. Requires
/// a nonzero module over a finite field and a nonnegative discrete imaginary
/// part.
pub fn max_slope_destabilizer<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
) -> Result<(Submodule<K>, Rat)> {
    check_context("max_slope_destabilizer", u, ds)?;
    if u.is_zero() {
        return Err(Error::ZeroSlope);
    }
    check_engine_alpha(ds)?;
    let mut search = Search::new(u, ds)?;
    if search.supp.is_empty() {
        // the imaginary part vanishes on the module: every slope is zero and
        // the maximal maximiser is the whole module
        return Ok((Submodule::full(u), search.best_slope));
    }
    search.dfs(0);
    Ok((search.best, search.best_slope))
}

/// Dinkelbach-style alternative to the direct search: iterate the parametric
/// objective `alpha - lambda * beta` over the same closure family until the
/// optimum reaches zero. Must agree with `max_slope_destabilizer` exactly.
pub fn max_slope_destabilizer_dinkelbach<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
) -> Result<(Submodule<K>, Rat)> {
    check_context("max_slope_destabilizer", u, ds)?;
    if u.is_zero() {
        return Err(Error::ZeroSlope);
    }
    check_engine_alpha(ds)?;
    let search = Search::new(u, ds)?;
    if search.supp.is_empty() {
        return Ok((Submodule::full(u), search.best_slope));
    }
    let full_dims = u.dims().to_vec();
    let mut lambda = ds.slope(&full_dims)?;
    loop {
        // maximise alpha - lambda*beta over all closures plus the full module
        let mut best_g = ds.alpha_total(&full_dims) - &lambda * ds.beta_total(&full_dims);
        let mut best_sum = Submodule::full(u);
        let mut representative: Option<Submodule<K>> = None;
        let mut seeds = search.seeds.clone();
        enumerate_closures(u, &search.supp, &search.choices, &mut seeds, 0, &mut |c| {
            if c.is_zero() {
                return;
            }
            let dims = c.dims();
            let g = ds.alpha_total(&dims) - &lambda * ds.beta_total(&dims);
            if g > best_g {
                best_g = g;
                best_sum = c.clone();
                representative = Some(c.clone());
            } else if g == best_g {
                best_sum = best_sum.sum(c);
            }
        });
        if best_g.is_zero() {
            return Ok((best_sum, lambda));
        }
        let rep = representative.expect("positive optimum comes from a candidate");
        lambda = ds.slope(&rep.dims())?;
    }
}

fn enumerate_closures<K: Field>(
    u: &GridModule<K>,
    supp: &[usize],
    choices: &[Vec<Subspace<K>>],
    seeds: &mut Vec<Subspace<K>>,
    depth: usize,
    visit: &mut impl FnMut(&Submodule<K>),
) {
    if depth == supp.len() {
        let cand = sub_generated(u, seeds).expect("seeds match the parent shapes");
        visit(&cand);
        return;
    }
    for choice in &choices[depth] {
        seeds[supp[depth]] = choice.clone();
        enumerate_closures(u, supp, choices, seeds, depth + 1, visit);
    }
    seeds[supp[depth]] = Subspace::zero(u.field().clone(), u.dims()[supp[depth]]);
}

/// Whether no submodule has a strictly larger slope than the module itself.
/// The zero module is semistable.
pub fn is_semistable<K: Field>(u: &GridModule<K>, ds: &DiscreteStability) -> Result<bool> {
    if u.is_zero() {
        return Ok(true);
    }
    let (_, max) = max_slope_destabilizer(u, ds)?;
    Ok(max == ds.slope(&u.dims().to_vec())?)
}

fn peel<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
    max_fn: &impl Fn(&GridModule<K>, &DiscreteStability) -> Result<(Submodule<K>, Rat)>,
) -> Result<HNFiltration<K>> {
    if u.is_zero() {
        return Ok(HNFiltration::empty());
    }
    let (w1, slope1) = max_fn(u, ds)?;
    let mut steps = vec![w1.clone()];
    let mut slopes = vec![slope1];
    if w1 != Submodule::full(u) {
        let (q, proj) = quotient(u, &w1)?;
        let tail = peel(&q, ds, max_fn)?;
        for (step, slope) in tail.steps.iter().zip(tail.slopes.iter()) {
            steps.push(proj.preimage_submodule(step));
            slopes.push(slope.clone());
        }
    }
    HNFiltration::new(steps, slopes)
}

/// The Harder-Narasimhan filtration, by recursive peeling of maximal
/// destabilisers.
pub fn hn_filtration<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
) -> Result<HNFiltration<K>> {
    check_context("hn_filtration", u, ds)?;
    check_engine_alpha(ds)?;
    peel(u, ds, &max_slope_destabilizer)
}

/// The filtration step selected by a slope threshold.
pub fn hn_theta<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
    theta: &Rat,
) -> Result<Submodule<K>> {
    Ok(hn_filtration(u, ds)?.step_at_threshold(theta, u))
}

/// The HN type of a filtration: quotient slopes with step dimension vectors.
pub fn hn_type_of<K: Field>(filt: &HNFiltration<K>) -> HNType {
    HNType {
        entries: filt
            .steps
            .iter()
            .zip(filt.slopes.iter())
            .map(|(w, s)| (s.clone(), w.dims()))
            .collect(),
    }
}

/// The HN type of a module under a discrete stability condition.
pub fn hn_type<K: Field>(u: &GridModule<K>, ds: &DiscreteStability) -> Result<HNType> {
    Ok(hn_type_of(&hn_filtration(u, ds)?))
}

/// Enumerates every submodule of a finite-field module, in a deterministic
/// order, as closed vertex-subspace tuples built vertex by vertex in
/// ascending flat order. Refuses modules whose total dimension exceeds the
/// budget.
pub fn enumerate_submodules<K: Field>(
    u: &GridModule<K>,
    budget: usize,
    visit: &mut impl FnMut(&Submodule<K>),
) -> Result<()> {
    if u.field().elements().is_none() {
        return Err(Error::InfiniteField {
            op: "enumerate_submodules",
        });
    }
    if u.total_dim() > budget {
        return Err(Error::BudgetExceeded {
            op: "enumerate_submodules",
            detail: format!(
                "total dimension {} exceeds the enumeration budget {budget}",
                u.total_dim()
            ),
        });
    }
    let grid = u.grid();
    let mut spaces: Vec<Subspace<K>> = (0..grid.len())
        .map(|f| Subspace::zero(u.field().clone(), u.dims()[f]))
        .collect();
    fn rec<K: Field>(
        u: &GridModule<K>,
        flat: usize,
        spaces: &mut Vec<Subspace<K>>,
        visit: &mut impl FnMut(&Submodule<K>),
    ) {
        let grid = u.grid();
        if flat == grid.len() {
            let sub = Submodule::from_spaces(u, spaces.clone())
                .expect("construction maintains closure");
            visit(&sub);
            return;
        }
        let idx = grid.unflat(flat);
        // the subspace here must contain the images of the chosen subspaces
        // at all lower covers
        let mut forced = Subspace::zero(u.field().clone(), u.dims()[flat]);
        for below in grid.lower_covers(&idx) {
            let axis = below
                .iter()
                .zip(idx.iter())
                .position(|(b, i)| b != i)
                .expect("covers differ in exactly one axis");
            let img = u
                .edge(&below, axis)
                .push_subspace(&spaces[grid.flat(&below)]);
            forced = forced.sum(&img);
        }
        let (proj, _) = forced.quotient_maps();
        let free = u.dims()[flat] - forced.dim();
        let quotient_subs = enumerate_subspaces(u.field(), free, u64::MAX)
            .expect("finite field enumeration cannot exceed an unlimited budget");
        for t in quotient_subs {
            spaces[flat] = proj.preimage_subspace(&t);
            rec(u, flat + 1, spaces, visit);
        }
        spaces[flat] = Subspace::zero(u.field().clone(), u.dims()[flat]);
    }
    rec(u, 0, &mut spaces, visit);
    Ok(())
}

/// Maximal maximal-slope submodule found by exhaustive enumeration.
pub fn oracle_max_slope<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
    budget: usize,
) -> Result<(Submodule<K>, Rat)> {
    check_context("oracle_max_slope", u, ds)?;
    if u.is_zero() {
        return Err(Error::ZeroSlope);
    }
    let mut best: Option<(Submodule<K>, Rat)> = None;
    enumerate_submodules(u, budget, &mut |cand| {
        if cand.is_zero() {
            return;
        }
        let slope = ds.slope(&cand.dims()).expect("nonzero candidate");
        match &mut best {
            None => best = Some((cand.clone(), slope)),
            Some((b, s)) => {
                if slope > *s {
                    *b = cand.clone();
                    *s = slope;
                } else if slope == *s {
                    *b = b.sum(cand);
                }
            }
        }
    })?;
    Ok(best.expect("nonzero module has nonzero submodules"))
}

/// First-principles HN filtration: every peeling step finds its maximal
/// destabiliser by enumerating all submodules.
pub fn oracle_hn_filtration<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
    budget: usize,
) -> Result<HNFiltration<K>> {
    check_context("oracle_hn_filtration", u, ds)?;
    peel(u, ds, &|m, d| oracle_max_slope(m, d, budget))
}

/// Semistability by exhaustive enumeration.
pub fn is_semistable_oracle<K: Field>(
    u: &GridModule<K>,
    ds: &DiscreteStability,
    budget: usize,
) -> Result<bool> {
    if u.is_zero() {
        return Ok(true);
    }
    let (_, max) = oracle_max_slope(u, ds, budget)?;
    Ok(max == ds.slope(&u.dims().to_vec())?)
}

/// Whether a module map carries the θ-step of the source's HN filtration
/// into the θ-step of the target's.
pub fn check_functoriality<K: Field>(
    f: &ModuleMap<K>,
    ds: &DiscreteStability,
    theta: &Rat,
) -> Result<bool> {
    check_context("check_functoriality", f.source(), ds)?;
    let src_step = hn_theta(f.source(), ds, theta)?;
    let tgt_step = hn_theta(f.target(), ds, theta)?;
    Ok(tgt_step.contains(&f.apply_to_submodule(&src_step)))
}
