//! The Harder-Narasimhan filtered rank invariant `s^theta` of a module under
//! a stability condition, its theta-profile (the HN slopes at a query
//! point), the universal lower threshold below which `s` collapses to the
//! plain rank invariant, the skyscraper invariant, and HN filtered
//! landscapes.
//!
//! Every query shifts the module so the query point becomes the origin,
//! discretises module and condition on a common adapted grid, and runs the
//! HN engine there; exact rational arithmetic makes results independent of
//! the chosen adapted grid, which `s_eval_refined` exposes for testing.

use std::collections::HashMap;

use crate::grid::{origin, point_leq, point_neg, point_sub};
use crate::hn::{hn_filtration, hn_type_of, oracle_hn_filtration, HNFiltration, HNType};
use crate::module::{GridModule, RankValue, Submodule};
use crate::scalar::{Field, Rat};
use crate::stability::{pullback_z, BetaSpec, DiscreteStability, StabilityCondition};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

pub use crate::stability::theta_min;

/// How HN filtrations are computed for each discretised query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// The pruned search over generation-closed subspace tuples; requires a
    /// nonnegative discretised numerator.
    Engine,
    /// Exhaustive enumeration of all submodules up to a total-dimension
    /// budget; accepts signed numerators.
    OracleBrute { budget: usize },
}

/// The HN slopes of the shifted module at a query point, strictly
/// decreasing. The filtered rank invariant in theta is constant between
/// consecutive breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaProfile {
    pub x: Vec<Rat>,
    pub breakpoints: Vec<Rat>,
}

/// Evaluator for the HN filtered rank invariant of one module under one
/// stability condition, with a memo of discretised HN filtrations.
#[derive(Debug, Clone)]
pub struct FilteredRankInvariant<K: Field> {
    module: GridModule<K>,
    condition: StabilityCondition,
    strategy: Strategy,
    memo: HashMap<(GridModule<K>, Vec<Rat>, Vec<Rat>), HNFiltration<K>>,
}

impl<K: Field> FilteredRankInvariant<K> {
    pub fn new(module: GridModule<K>, condition: StabilityCondition) -> Result<Self> {
        Self::with_strategy(module, condition, Strategy::Engine)
    }

    pub fn with_strategy(
        module: GridModule<K>,
        condition: StabilityCondition,
        strategy: Strategy,
    ) -> Result<Self> {
        if module.grid().n() != condition.n() {
            return Err(Error::ShapeMismatch {
                op: "FilteredRankInvariant::new",
                detail: format!(
                    "module has {} parameters, condition has {}",
                    module.grid().n(),
                    condition.n()
                ),
            });
        }
        Ok(FilteredRankInvariant {
            module,
            condition,
            strategy,
            memo: HashMap::new(),
        })
    }

    pub fn module(&self) -> &GridModule<K> {
        &self.module
    }

    pub fn condition(&self) -> &StabilityCondition {
        &self.condition
    }

    /// Number of distinct discretised queries answered so far.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Shifts the module so `x` becomes the origin and discretises both the
    /// module and the condition on an adapted grid containing the shifted
    /// module grid, the origin, and any extra per-axis coordinates.
    fn discretise(
        &self,
        x: &[Rat],
        extra: &[Vec<Rat>],
    ) -> Result<(GridModule<K>, DiscreteStability)> {
        let n = self.condition.n();
        if x.len() != n {
            return Err(Error::ShapeMismatch {
                op: "FilteredRankInvariant::discretise",
                detail: format!("query point has {} coordinates, expected {n}", x.len()),
            });
        }
        let shifted = self.module.translate(&point_neg(x));
        let mut added: Vec<Vec<Rat>> = vec![vec![Rat::zero()]; n];
        if !extra.is_empty() {
            if extra.len() != n {
                return Err(Error::ShapeMismatch {
                    op: "FilteredRankInvariant::discretise",
                    detail: format!("{} extra coordinate axes, expected {n}", extra.len()),
                });
            }
            for (a, e) in added.iter_mut().zip(extra) {
                a.extend(e.iter().cloned());
            }
        }
        let seed = shifted.grid().extend_with_coords(&added)?;
        let adapted = self.condition.adapted_grid(&seed)?;
        let ds = pullback_z(&self.condition, &adapted)?;
        let evaluated = shifted.evaluate_on_grid(&adapted)?;
        Ok((evaluated, ds))
    }

    fn filtration(
        &mut self,
        evaluated: &GridModule<K>,
        ds: &DiscreteStability,
    ) -> Result<HNFiltration<K>> {
        let key = (evaluated.clone(), ds.alpha().to_vec(), ds.beta().to_vec());
        if let Some(f) = self.memo.get(&key) {
            return Ok(f.clone());
        }
        let filt = match self.strategy {
            Strategy::Engine => hn_filtration(evaluated, ds)?,
            Strategy::OracleBrute { budget } => oracle_hn_filtration(evaluated, ds, budget)?,
        };
        self.memo.insert(key, filt.clone());
        Ok(filt)
    }

    /// The HN filtered rank invariant at a pair of points: the rank of the
    /// structure map from `x` to `y` restricted to the theta-step of the HN
    /// filtration of the shifted module, or the infinity marker when the
    /// points are incomparable.
    pub fn s_eval(&mut self, theta: &Rat, x: &[Rat], y: &[Rat]) -> Result<RankValue> {
        self.s_eval_refined(theta, x, y, &[])
    }

    /// Same value computed through an adapted grid refined by extra per-axis
    /// coordinates; the result must not depend on them.
    pub fn s_eval_refined(
        &mut self,
        theta: &Rat,
        x: &[Rat],
        y: &[Rat],
        extra: &[Vec<Rat>],
    ) -> Result<RankValue> {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch {
                op: "s_eval",
                detail: format!("{} and {} coordinates", x.len(), y.len()),
            });
        }
        if !point_leq(x, y) {
            return Ok(RankValue::Infinite);
        }
        let (evaluated, ds) = self.discretise(x, extra)?;
        let filt = self.filtration(&evaluated, &ds)?;
        let step = filt.step_at_threshold(theta, &evaluated);
        let grid = evaluated.grid();
        let a = grid
            .floor(&origin(x.len()))
            .expect("the adapted grid contains the origin");
        let b = grid
            .floor(&point_sub(y, x))
            .expect("y - x is above the origin");
        let image = evaluated
            .map_between(&a, &b)
            .push_subspace(step.space_at(grid.flat(&a)));
        Ok(RankValue::Finite(image.dim()))
    }

    /// The discretised module at shift `x` together with the theta-step of
    /// its Harder-Narasimhan filtration: the pair every `s` query at `x`
    /// reads from. Bulk samplers call this once per base point and then take
    /// ranks of structure maps against the returned step.
    pub fn theta_step(
        &mut self,
        theta: &Rat,
        x: &[Rat],
    ) -> Result<(GridModule<K>, Submodule<K>)> {
        let (evaluated, ds) = self.discretise(x, &[])?;
        let filt = self.filtration(&evaluated, &ds)?;
        let step = filt.step_at_threshold(theta, &evaluated);
        Ok((evaluated, step))
    }

    /// The discretised module and discrete stability data at shift `x`,
    /// without running the HN engine.
    pub fn discretise_at(&self, x: &[Rat]) -> Result<(GridModule<K>, DiscreteStability)> {
        self.discretise(x, &[])
    }

    /// The discretised module and discrete stability data at shift `x` on an
    /// adapted grid refined by extra per-axis coordinates. The refined grid
    /// contains the unrefined one, so the two discretisations are related by
    /// pushforward along a grid inclusion.
    pub fn discretise_refined(
        &self,
        x: &[Rat],
        extra: &[Vec<Rat>],
    ) -> Result<(GridModule<K>, DiscreteStability)> {
        self.discretise(x, extra)
    }

    /// The discretised module at shift `x`, its discrete stability data, and
    /// the full Harder-Narasimhan filtration, for callers that inspect the
    /// filtration itself rather than a single rank.
    pub fn filtration_at(
        &mut self,
        x: &[Rat],
    ) -> Result<(GridModule<K>, DiscreteStability, HNFiltration<K>)> {
        let (evaluated, ds) = self.discretise(x, &[])?;
        let filt = self.filtration(&evaluated, &ds)?;
        Ok((evaluated, ds, filt))
    }

    /// The HN slopes of the shifted module, strictly decreasing (empty when
    /// the module vanishes).
    pub fn theta_profile(&mut self, x: &[Rat]) -> Result<ThetaProfile> {
        let (evaluated, ds) = self.discretise(x, &[])?;
        let filt = self.filtration(&evaluated, &ds)?;
        Ok(ThetaProfile {
            x: x.to_vec(),
            breakpoints: filt.slopes().to_vec(),
        })
    }

    /// The HN filtered landscape: the largest corridor half-width around `x`
    /// through which at least `k` dimensions survive at threshold `theta`,
    /// located by bisection to within `tol` (the returned value is the lower
    /// end of the final bracket, never exceeding the supremum).
    pub fn landscape_eval(
        &mut self,
        k: usize,
        x: &[Rat],
        theta: &Rat,
        tol: &Rat,
    ) -> Result<Rat> {
        if k == 0 {
            return Err(Error::InvalidArgument {
                op: "landscape_eval",
                detail: "the level k must be a positive integer".to_string(),
            });
        }
        if !tol.is_positive() {
            return Err(Error::InvalidArgument {
                op: "landscape_eval",
                detail: "the tolerance must be positive".to_string(),
            });
        }
        let holds = |inv: &mut Self, eps: &Rat| -> Result<bool> {
            let lo: Vec<Rat> = x.iter().map(|c| c - eps).collect();
            let hi: Vec<Rat> = x.iter().map(|c| c + eps).collect();
            Ok(match inv.s_eval(theta, &lo, &hi)? {
                RankValue::Infinite => true,
                RankValue::Finite(r) => r >= k,
            })
        };
        if !holds(self, &Rat::zero())? {
            return Ok(Rat::zero());
        }
        // beyond this width the lower corner leaves the module's support,
        // forcing rank zero, so the predicate must eventually fail
        let mut hi = Rat::one();
        for (i, c) in x.iter().enumerate() {
            let reach = c - &self.module.grid().axis(i)[0] + Rat::one();
            hi = hi.max(reach);
        }
        let mut doubled = 0;
        while holds(self, &hi)? {
            hi = hi * Rat::from_integer(2.into());
            doubled += 1;
            if doubled > 64 {
                return Err(Error::BudgetExceeded {
                    op: "landscape_eval",
                    detail: "could not bracket the landscape value".to_string(),
                });
            }
        }
        let mut lo = Rat::zero();
        while &hi - &lo > *tol {
            let mid = (&lo + &hi) / Rat::from_integer(2.into());
            if holds(self, &mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// The skyscraper invariant: for each sample point, the HN type of the
/// module under the skyscraper condition at that point (with the given real
/// density). Sampling defaults to the module's grid vertices.
pub fn skyscraper_invariant<K: Field>(
    v: &GridModule<K>,
    beta: &BetaSpec,
    sample: Option<&[Vec<Rat>]>,
) -> Result<Vec<(Vec<Rat>, HNType)>> {
    let grid = v.grid();
    let default_sample: Vec<Vec<Rat>>;
    let points: &[Vec<Rat>] = match sample {
        Some(s) => s,
        None => {
            default_sample = (0..grid.len()).map(|f| grid.coords(&grid.unflat(f))).collect();
            &default_sample
        }
    };
    let mut out = Vec::with_capacity(points.len());
    for q in points {
        let z = StabilityCondition::skyscraper(q, beta.clone())?;
        let added: Vec<Vec<Rat>> = q.iter().map(|c| vec![c.clone()]).collect();
        let seed = grid.extend_with_coords(&added)?;
        let adapted = z.adapted_grid(&seed)?;
        let ds = pullback_z(&z, &adapted)?;
        let evaluated = v.evaluate_on_grid(&adapted)?;
        out.push((q.clone(), hn_type_of(&hn_filtration(&evaluated, &ds)?)));
    }
    Ok(out)
}

/// Convenience wrapper building a skyscraper-condition evaluator at `q`.
pub fn skyscraper_evaluator<K: Field>(
    module: GridModule<K>,
    q: &[Rat],
    beta: BetaSpec,
) -> Result<FilteredRankInvariant<K>> {
    FilteredRankInvariant::new(module, StabilityCondition::skyscraper(q, beta)?)
}
