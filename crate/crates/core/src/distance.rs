//! Distances for the stability harness: the erosion distance between
//! sampled rank functors, the Harder-Narasimhan distance (the supremum over
//! thresholds of the erosion distance between filtered rank invariants), the
//! landscape distance, and exact verification of interleaving certificates.
//!
//! Sampling happens on a uniform rational lattice over a window. The
//! reported erosion is the least lattice-quantised shift under which both
//! erosion inequalities hold at every sampled pair: a lower bound for the
//! true erosion distance that converges from below as the resolution shrinks
//! and is exact for integer-grid modules sampled on an integer lattice that
//! covers their support.

use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{origin, point_neg, point_sub, GridPoset, MultiIdx};
use crate::invariants::{theta_min, FilteredRankInvariant};
use crate::linalg::Matrix;
use crate::module::{
    realise_on_grid, GridModule, ModuleMap, Presentation, RankValue, Realisation, Relation,
};
use crate::scalar::{Field, Rat};
use crate::stability::StabilityCondition;
use crate::{Error, Result};

/// Hard cap on the number of stored sample values (`lattice size` squared)
/// so a careless window/resolution pair fails fast instead of exhausting
/// memory.
pub const MAX_SAMPLE_VALUES: usize = 1 << 22;

/// Exact values of a functor on pairs of points of a uniform lattice: the
/// value at each ordered lattice pair `(x, y)`, with the infinity marker at
/// incomparable pairs. Values are stored row-major as `flat(x) * len +
/// flat(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledFunctor {
    lattice: GridPoset,
    resolution: Rat,
    values: Vec<RankValue>,
}

/// The uniform lattice over the window `[lo, hi]` with the given step: per
/// axis the coordinates `lo_i, lo_i + h, ...` up to `hi_i`.
pub fn sample_lattice(lo: &[Rat], hi: &[Rat], resolution: &Rat) -> Result<GridPoset> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::ShapeMismatch {
            op: "sample_lattice",
            detail: format!("{} lower and {} upper corner coordinates", lo.len(), hi.len()),
        });
    }
    if !resolution.is_positive() {
        return Err(Error::InvalidArgument {
            op: "sample_lattice",
            detail: "the resolution must be positive".to_string(),
        });
    }
    let mut axes = Vec::with_capacity(lo.len());
    for (i, (a, b)) in lo.iter().zip(hi).enumerate() {
        if b < a {
            return Err(Error::InvalidArgument {
                op: "sample_lattice",
                detail: format!("axis {i}: window upper corner lies below the lower corner"),
            });
        }
        let steps = ((b - a) / resolution)
            .floor()
            .to_integer()
            .to_usize()
            .ok_or(Error::BudgetExceeded {
                op: "sample_lattice",
                detail: format!("axis {i}: too many lattice steps"),
            })?;
        let axis: Vec<Rat> = (0..=steps)
            .map(|k| a + resolution * Rat::from_integer(k.into()))
            .collect();
        axes.push(axis);
    }
    let lattice = GridPoset::new(axes)?;
    let len = lattice.len();
    if len.checked_mul(len).is_none_or(|p| p > MAX_SAMPLE_VALUES) {
        return Err(Error::BudgetExceeded {
            op: "sample_lattice",
            detail: format!(
                "{len} lattice points give {} sample pairs (limit {MAX_SAMPLE_VALUES})",
                (len as u128) * (len as u128)
            ),
        });
    }
    Ok(lattice)
}

impl SampledFunctor {
    /// Wraps raw sample values, checking the shape, that incomparable pairs
    /// carry the infinity marker, and the functor law: shrinking the box
    /// `[x, y]` never decreases the value.
    pub fn new(lattice: GridPoset, resolution: Rat, values: Vec<RankValue>) -> Result<Self> {
        let len = lattice.len();
        if values.len() != len * len {
            return Err(Error::ShapeMismatch {
                op: "SampledFunctor::new",
                detail: format!("{} values for {} lattice pairs", values.len(), len * len),
            });
        }
        let idxs = lattice.all_indices();
        let strides = lattice_strides(&lattice);
        for xf in 0..len {
            for yf in 0..len {
                let v = values[xf * len + yf];
                if !GridPoset::leq(&idxs[xf], &idxs[yf]) {
                    if v != RankValue::Infinite {
                        return Err(Error::InvariantViolation {
                            op: "SampledFunctor::new",
                            detail: format!(
                                "incomparable pair ({:?}, {:?}) carries a finite value",
                                idxs[xf], idxs[yf]
                            ),
                        });
                    }
                    continue;
                }
                for axis in 0..lattice.n() {
                    // raising the lower corner one step shrinks the box
                    if idxs[xf][axis] + 1 <= idxs[yf][axis]
                        && values[(xf + strides[axis]) * len + yf] < v
                    {
                        return Err(Error::InvariantViolation {
                            op: "SampledFunctor::new",
                            detail: format!(
                                "value decreases when the lower corner of ({:?}, {:?}) rises on axis {axis}",
                                idxs[xf], idxs[yf]
                            ),
                        });
                    }
                    // lowering the upper corner one step shrinks the box
                    if idxs[yf][axis] > idxs[xf][axis]
                        && values[xf * len + (yf - strides[axis])] < v
                    {
                        return Err(Error::InvariantViolation {
                            op: "SampledFunctor::new",
                            detail: format!(
                                "value decreases when the upper corner of ({:?}, {:?}) drops on axis {axis}",
                                idxs[xf], idxs[yf]
                            ),
                        });
                    }
                }
            }
        }
        Ok(SampledFunctor {
            lattice,
            resolution,
            values,
        })
    }

    pub fn lattice(&self) -> &GridPoset {
        &self.lattice
    }

    pub fn resolution(&self) -> &Rat {
        &self.resolution
    }

    /// Value at a pair of flat lattice indices.
    pub fn value(&self, xf: usize, yf: usize) -> RankValue {
        self.values[xf * self.lattice.len() + yf]
    }
}

fn lattice_strides(lattice: &GridPoset) -> Vec<usize> {
    let n = lattice.n();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * lattice.axis(i + 1).len();
    }
    strides
}

/// Samples the plain rank invariant of a module over a window.
pub fn sample_rho<K: Field>(
    v: &GridModule<K>,
    lo: &[Rat],
    hi: &[Rat],
    resolution: &Rat,
) -> Result<SampledFunctor> {
    if v.grid().n() != lo.len() {
        return Err(Error::ShapeMismatch {
            op: "sample_rho",
            detail: format!(
                "window has {} coordinates, module has {}",
                lo.len(),
                v.grid().n()
            ),
        });
    }
    let lattice = sample_lattice(lo, hi, resolution)?;
    let len = lattice.len();
    let idxs = lattice.all_indices();
    let pts: Vec<Vec<Rat>> = idxs.iter().map(|i| lattice.coords(i)).collect();
    let mut values = vec![RankValue::Infinite; len * len];
    for xf in 0..len {
        for yf in 0..len {
            if GridPoset::leq(&idxs[xf], &idxs[yf]) {
                values[xf * len + yf] = v.rank_invariant(&pts[xf], &pts[yf]);
            }
        }
    }
    SampledFunctor::new(lattice, resolution.clone(), values)
}

/// Samples the HN filtered rank invariant at a fixed threshold over a
/// window. Each lattice base point is discretised once; the values at all
/// upper points are then ranks of structure maps against the cached
/// theta-step, so the cost is one HN filtration per base point.
pub fn sample_s<K: Field>(
    inv: &mut FilteredRankInvariant<K>,
    theta: &Rat,
    lo: &[Rat],
    hi: &[Rat],
    resolution: &Rat,
) -> Result<SampledFunctor> {
    let n = inv.condition().n();
    if lo.len() != n {
        return Err(Error::ShapeMismatch {
            op: "sample_s",
            detail: format!("window has {} coordinates, condition has {n}", lo.len()),
        });
    }
    let lattice = sample_lattice(lo, hi, resolution)?;
    let len = lattice.len();
    let idxs = lattice.all_indices();
    let pts: Vec<Vec<Rat>> = idxs.iter().map(|i| lattice.coords(i)).collect();
    let mut values = vec![RankValue::Infinite; len * len];
    for xf in 0..len {
        let x = &pts[xf];
        let (evaluated, step) = inv.theta_step(theta, x)?;
        let egrid = evaluated.grid();
        let a = egrid
            .floor(&origin(n))
            .expect("adapted grids contain the origin");
        let basis = step.space_at(egrid.flat(&a));
        // values only depend on the floor of y - x in the adapted grid
        let mut by_floor: Vec<Option<RankValue>> = vec![None; egrid.len()];
        for yf in 0..len {
            if !GridPoset::leq(&idxs[xf], &idxs[yf]) {
                continue;
            }
            let b = egrid
                .floor(&point_sub(&pts[yf], x))
                .expect("y - x is above the origin");
            let bf = egrid.flat(&b);
            let val = match by_floor[bf] {
                Some(v) => v,
                None => {
                    let rank = evaluated.map_between(&a, &b).push_subspace(basis).dim();
                    let v = RankValue::Finite(rank);
                    by_floor[bf] = Some(v);
                    v
                }
            };
            values[xf * len + yf] = val;
        }
    }
    SampledFunctor::new(lattice, resolution.clone(), values)
}

/// The least lattice-quantised shift under which both erosion inequalities
/// hold at every sampled pair, found by a monotone scan over multiples of
/// the resolution. Pairs whose shifted endpoints leave the window impose no
/// constraint, so the reported value is a lower-bound estimator of the true
/// erosion distance at this resolution.
pub fn erosion_distance(a: &SampledFunctor, b: &SampledFunctor) -> Result<Rat> {
    if a.lattice != b.lattice || a.resolution != b.resolution {
        return Err(Error::ContextMismatch {
            op: "erosion_distance",
            detail: "the sampled functors live on different lattices".to_string(),
        });
    }
    let lattice = &a.lattice;
    let len = lattice.len();
    let n = lattice.n();
    let idxs = lattice.all_indices();
    let lens: Vec<usize> = (0..n).map(|i| lattice.axis(i).len()).collect();
    let stride_sum: usize = lattice_strides(lattice).iter().sum();
    // beyond the shortest axis every shifted pair leaves the window and the
    // constraint set is empty, so the scan always terminates
    let k_max = *lens.iter().min().expect("lattices have at least one axis");
    let holds_at = |k: usize| -> bool {
        let shift = k * stride_sum;
        for xf in 0..len {
            'pair: for yf in 0..len {
                let (xi, yi) = (&idxs[xf], &idxs[yf]);
                for ax in 0..n {
                    // skip incomparable pairs and pairs whose shifted
                    // endpoints leave the window
                    if xi[ax] > yi[ax] || xi[ax] < k || yi[ax] + k >= lens[ax] {
                        continue 'pair;
                    }
                }
                let inner = (xf - shift) * len + (yf + shift);
                let outer = xf * len + yf;
                if b.values[inner] > a.values[outer] || a.values[inner] > b.values[outer] {
                    return false;
                }
            }
        }
        true
    };
    for k in 0..=k_max {
        if holds_at(k) {
            return Ok(&a.resolution * Rat::from_integer(k.into()));
        }
    }
    Ok(&a.resolution * Rat::from_integer(k_max.into()))
}

/// The Harder-Narasimhan distance between two modules under a stability
/// condition, sampled over a window: the maximum over thresholds of the
/// erosion distance between the sampled filtered rank invariants. The
/// supremum over all real thresholds is realised on a finite candidate set:
/// the filtered invariant of each module at each lattice point is constant
/// in theta between consecutive HN slopes, so it suffices to test every
/// collected slope, the midpoints between consecutive ones, and one value
/// below the universal lower threshold.
pub fn hn_distance<K: Field>(
    v: &GridModule<K>,
    w: &GridModule<K>,
    z: &StabilityCondition,
    lo: &[Rat],
    hi: &[Rat],
    resolution: &Rat,
) -> Result<Rat> {
    let mut inv_v = FilteredRankInvariant::new(v.clone(), z.clone())?;
    let mut inv_w = FilteredRankInvariant::new(w.clone(), z.clone())?;
    let candidates = theta_candidates(&mut inv_v, &mut inv_w, lo, hi, resolution)?;
    let mut best = Rat::zero();
    for theta in &candidates {
        let sv = sample_s(&mut inv_v, theta, lo, hi, resolution)?;
        let sw = sample_s(&mut inv_w, theta, lo, hi, resolution)?;
        best = best.max(erosion_distance(&sv, &sw)?);
    }
    Ok(best)
}

/// The finite threshold set realising the supremum in [`hn_distance`]: every
/// profile breakpoint of either invariant at any lattice point, the midpoint
/// between each consecutive pair, and one value below the universal lower
/// threshold. Sorted ascending.
pub fn theta_candidates<K: Field>(
    inv_v: &mut FilteredRankInvariant<K>,
    inv_w: &mut FilteredRankInvariant<K>,
    lo: &[Rat],
    hi: &[Rat],
    resolution: &Rat,
) -> Result<Vec<Rat>> {
    if inv_w.condition() != inv_v.condition() {
        return Err(Error::ContextMismatch {
            op: "theta_candidates",
            detail: "the two invariants use different stability conditions".to_string(),
        });
    }
    let floor_theta = theta_min(inv_v.condition()) - Rat::one();
    let lattice = sample_lattice(lo, hi, resolution)?;
    let mut slopes: BTreeSet<Rat> = BTreeSet::new();
    for f in 0..lattice.len() {
        let x = lattice.coords(&lattice.unflat(f));
        slopes.extend(inv_v.theta_profile(&x)?.breakpoints);
        slopes.extend(inv_w.theta_profile(&x)?.breakpoints);
    }
    let sorted: Vec<Rat> = slopes.into_iter().collect();
    let mut candidates = vec![floor_theta];
    for (i, s) in sorted.iter().enumerate() {
        candidates.push(s.clone());
        if let Some(next) = sorted.get(i + 1) {
            candidates.push((s + next) / Rat::from_integer(2.into()));
        }
    }
    candidates.sort();
    candidates.dedup();
    Ok(candidates)
}

/// The landscape distance at a fixed threshold: the maximum over levels `k =
/// 1..=k_max` and sampled base points of the difference of the two landscape
/// values. Landscapes are read off the sampled functors, where corridor
/// half-widths are exact multiples of the resolution; this keeps the chain
/// `landscape_distance <= erosion_distance` exact on the shared lattice. The
/// tolerance must be positive; lattice values are exact, so any positive
/// tolerance is already met.
#[allow(clippy::too_many_arguments)]
pub fn landscape_distance<K: Field>(
    inv_v: &mut FilteredRankInvariant<K>,
    inv_w: &mut FilteredRankInvariant<K>,
    theta: &Rat,
    k_max: usize,
    lo: &[Rat],
    hi: &[Rat],
    resolution: &Rat,
    tol: &Rat,
) -> Result<Rat> {
    if k_max == 0 {
        return Err(Error::InvalidArgument {
            op: "landscape_distance",
            detail: "the level range must contain at least level 1".to_string(),
        });
    }
    if !tol.is_positive() {
        return Err(Error::InvalidArgument {
            op: "landscape_distance",
            detail: "the tolerance must be positive".to_string(),
        });
    }
    let sv = sample_s(inv_v, theta, lo, hi, resolution)?;
    let sw = sample_s(inv_w, theta, lo, hi, resolution)?;
    let lattice = sv.lattice().clone();
    let len = lattice.len();
    let n = lattice.n();
    let idxs = lattice.all_indices();
    let lens: Vec<usize> = (0..n).map(|i| lattice.axis(i).len()).collect();
    let stride_sum: usize = lattice_strides(&lattice).iter().sum();
    // the largest number of corridor steps around a base point that stays
    // inside the window
    let max_steps = |xi: &MultiIdx| -> usize {
        (0..n)
            .map(|ax| xi[ax].min(lens[ax] - 1 - xi[ax]))
            .min()
            .unwrap_or(0)
    };
    // the widest sampled corridor around `xf` through which at least `k`
    // dimensions survive; the sampled value is non-increasing in the width,
    // so the first failure ends the scan
    let quantised = |s: &SampledFunctor, xf: usize, k: usize, reach: usize| -> usize {
        let mut best = 0;
        for m in 0..=reach {
            let val = s.value(xf - m * stride_sum, xf + m * stride_sum);
            if val >= RankValue::Finite(k) {
                best = m;
            } else {
                break;
            }
        }
        best
    };
    let mut best = Rat::zero();
    for xf in 0..len {
        let reach = max_steps(&idxs[xf]);
        for k in 1..=k_max {
            let lv = quantised(&sv, xf, k, reach);
            let lw = quantised(&sw, xf, k, reach);
            let diff = Rat::from_integer((lv.abs_diff(lw)).into()) * resolution;
            best = best.max(diff);
        }
    }
    Ok(best)
}

/// An interleaving certificate: a nonnegative shift together with the two
/// structure-compatible maps, given over a common refined grid. `f` maps `V`
/// to the shift of `W` down by `epsilon` in every coordinate, `g` maps `W`
/// to the shift of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterleavingCertificate<K: Field> {
    pub epsilon: Rat,
    pub f: ModuleMap<K>,
    pub g: ModuleMap<K>,
}

fn missing_axis_coords(host: &GridPoset, axes: &[Vec<Rat>]) -> Option<(usize, Vec<Rat>)> {
    for (i, axis) in axes.iter().enumerate() {
        let missing: Vec<Rat> = axis
            .iter()
            .filter(|c| host.axis(i).binary_search(c).is_err())
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Some((i, missing));
        }
    }
    None
}

fn translated_axes(grid: &GridPoset, delta: &Rat) -> Vec<Vec<Rat>> {
    (0..grid.n())
        .map(|i| grid.axis(i).iter().map(|c| c + delta).collect())
        .collect()
}

/// Checks an interleaving certificate exactly: the maps must be the
/// evaluations of `v`, `w` and their shifts on the certificate grid, be
/// natural, and satisfy both composite identities (each composite equals the
/// `2 epsilon` structure map) at every vertex of a refinement fine enough to
/// pin the maps at every rational point.
pub fn verify_interleaving<K: Field>(
    cert: &InterleavingCertificate<K>,
    v: &GridModule<K>,
    w: &GridModule<K>,
) -> Result<bool> {
    let eps = &cert.epsilon;
    if eps.is_negative() {
        return Err(Error::InvalidArgument {
            op: "verify_interleaving",
            detail: "the interleaving shift must be nonnegative".to_string(),
        });
    }
    let host = cert.f.source().grid().clone();
    let n = host.n();
    if v.grid().n() != n || w.grid().n() != n {
        return Err(Error::ShapeMismatch {
            op: "verify_interleaving",
            detail: "modules and certificate have different numbers of parameters".to_string(),
        });
    }
    for (what, grid) in [
        ("target of f", cert.f.target().grid()),
        ("source of g", cert.g.source().grid()),
        ("target of g", cert.g.target().grid()),
    ] {
        if grid != &host {
            return Err(Error::ContextMismatch {
                op: "verify_interleaving",
                detail: format!("the {what} lives on a different grid than the source of f"),
            });
        }
    }
    // the certificate grid must refine both module grids and their shifts so
    // that every map is constant on its fibers
    let neg_eps = -eps;
    for grid in [v.grid(), w.grid()] {
        for axes in [translated_axes(grid, &Rat::zero()), translated_axes(grid, &neg_eps)] {
            if let Some((axis, missing)) = missing_axis_coords(&host, &axes) {
                return Err(Error::RefinementNeeded {
                    axis,
                    missing: missing.iter().map(|c| c.to_string()).collect(),
                });
            }
        }
    }
    // the maps must connect exactly the evaluations of v, w and their shifts
    let eps_vec = vec![eps.clone(); n];
    let down = point_neg(&eps_vec);
    if cert.f.source() != &v.evaluate_on_grid(&host)?
        || cert.f.target() != &w.translate(&down).evaluate_on_grid(&host)?
        || cert.g.source() != &w.evaluate_on_grid(&host)?
        || cert.g.target() != &v.translate(&down).evaluate_on_grid(&host)?
    {
        return Ok(false);
    }
    // naturality of both maps on every covering edge
    let renatural = |m: &ModuleMap<K>| -> bool {
        let mats: Vec<Matrix<K>> = (0..host.len()).map(|f| m.mat_at(f).clone()).collect();
        ModuleMap::new(m.source().clone(), m.target().clone(), mats).is_ok()
    };
    if !renatural(&cert.f) || !renatural(&cert.g) {
        return Ok(false);
    }
    // composite identities, checked at every vertex of a refinement on which
    // all the floors involved are constant
    let mut adds = translated_axes(&host, &neg_eps);
    let two_down = &neg_eps + &neg_eps;
    for (add, more) in adds.iter_mut().zip(translated_axes(&host, &two_down)) {
        add.extend(more);
    }
    let probe = host.extend_with_coords(&adds)?;
    for flat in 0..probe.len() {
        let c = probe.coords(&probe.unflat(flat));
        let Some(a) = host.floor(&c) else {
            // below the certificate grid both modules vanish
            continue;
        };
        let c_eps: Vec<Rat> = c.iter().map(|t| t + eps).collect();
        let c_2eps: Vec<Rat> = c_eps.iter().map(|t| t + eps).collect();
        let u = host
            .floor(&c_eps)
            .expect("a point above an existing floor has a floor");
        let af = host.flat(&a);
        let uf = host.flat(&u);
        // g after f must be the 2-epsilon structure map of v
        let fa = cert.f.mat_at(af);
        if fa.cols() > 0 {
            let av = v.grid().floor(&c).expect("the fiber of v at c is nonzero");
            let bv = v
                .grid()
                .floor(&c_2eps)
                .expect("a point above an existing floor has a floor");
            if cert.g.mat_at(uf).mul(fa) != v.map_between(&av, &bv) {
                return Ok(false);
            }
        }
        // f after g must be the 2-epsilon structure map of w
        let ga = cert.g.mat_at(af);
        if ga.cols() > 0 {
            let aw = w.grid().floor(&c).expect("the fiber of w at c is nonzero");
            let bw = w
                .grid()
                .floor(&c_2eps)
                .expect("a point above an existing floor has a floor");
            if cert.f.mat_at(uf).mul(ga) != w.map_between(&aw, &bw) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The translated module together with the canonical interleaving
/// certificate between a module and its translate: both maps are structure
/// maps of `v`, valid whenever every component of the translation is at most
/// `epsilon` in absolute value.
pub fn build_shift_certificate<K: Field>(
    v: &GridModule<K>,
    delta: &[Rat],
    epsilon: &Rat,
) -> Result<(GridModule<K>, InterleavingCertificate<K>)> {
    let n = v.grid().n();
    if delta.len() != n {
        return Err(Error::ShapeMismatch {
            op: "build_shift_certificate",
            detail: format!("{} shift coordinates for {n} parameters", delta.len()),
        });
    }
    if epsilon.is_negative() || delta.iter().any(|d| &d.abs() > epsilon) {
        return Err(Error::InvalidArgument {
            op: "build_shift_certificate",
            detail: "every shift component must be at most epsilon in absolute value".to_string(),
        });
    }
    let w = v.translate(delta);
    let field = v.field().clone();
    let neg_eps = -epsilon;
    // host grid: the union of both module grids and their down-shifts
    let mut adds = translated_axes(v.grid(), &Rat::zero());
    for (i, add) in adds.iter_mut().enumerate() {
        for c in v.grid().axis(i) {
            add.push(c + &delta[i]);
            add.push(c + &neg_eps);
            add.push(c + &delta[i] + &neg_eps);
        }
    }
    let host = v.grid().extend_with_coords(&adds)?;
    let eps_vec = vec![epsilon.clone(); n];
    let down = point_neg(&eps_vec);
    let vg = v.evaluate_on_grid(&host)?;
    let wg = w.evaluate_on_grid(&host)?;
    let wt = w.translate(&down).evaluate_on_grid(&host)?;
    let vt = v.translate(&down).evaluate_on_grid(&host)?;
    // f at c is the structure map of v from c to c + eps - delta, g at c the
    // one from c - delta to c + eps
    let point_rule = |src: &GridModule<K>,
                      dst: &GridModule<K>,
                      from_shift: &[Rat],
                      to_shift: &[Rat]|
     -> Result<ModuleMap<K>> {
        let mut mats = Vec::with_capacity(host.len());
        for flat in 0..host.len() {
            let c = host.coords(&host.unflat(flat));
            let from: Vec<Rat> = c.iter().zip(from_shift).map(|(t, s)| t + s).collect();
            let to: Vec<Rat> = c.iter().zip(to_shift).map(|(t, s)| t + s).collect();
            let mat = match v.grid().floor(&from) {
                None => Matrix::zero(field.clone(), dst.dims()[flat], src.dims()[flat]),
                Some(a) => {
                    let b = v
                        .grid()
                        .floor(&to)
                        .expect("the target point lies above the source point");
                    v.map_between(&a, &b)
                }
            };
            mats.push(mat);
        }
        ModuleMap::new(src.clone(), dst.clone(), mats)
    };
    let zero_shift = vec![Rat::zero(); n];
    let eps_minus_delta: Vec<Rat> = eps_vec.iter().zip(delta).map(|(e, d)| e - d).collect();
    let minus_delta = point_neg(delta);
    let f = point_rule(&vg, &wt, &zero_shift, &eps_minus_delta)?;
    let g = point_rule(&wg, &vt, &minus_delta, &eps_vec)?;
    Ok((
        w,
        InterleavingCertificate {
            epsilon: epsilon.clone(),
            f,
            g,
        },
    ))
}

/// Moves every generator and relation point of a presentation by a random
/// vector of sup-norm at most `epsilon` (relation points are pushed up to
/// the join of their support generators where needed, staying within
/// `epsilon` of the original), and returns the moved presentation together
/// with the canonical interleaving certificate between the two realisations.
pub fn perturb_presentation<K: Field>(
    p: &Presentation,
    field: K,
    epsilon: &Rat,
    seed: u64,
) -> Result<(Presentation, InterleavingCertificate<K>)> {
    if epsilon.is_negative() {
        return Err(Error::InvalidArgument {
            op: "perturb_presentation",
            detail: "the perturbation radius must be nonnegative".to_string(),
        });
    }
    p.validate()?;
    let n = p.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = epsilon / Rat::from_integer(4.into());
    let draw = |rng: &mut ChaCha8Rng| -> Rat {
        let ticks: i64 = rng.gen_range(-4..=4);
        &step * Rat::from_integer(ticks.into())
    };
    let generators: Vec<Vec<Rat>> = p
        .generators
        .iter()
        .map(|g| g.iter().map(|c| c + draw(&mut rng)).collect())
        .collect();
    let relations: Vec<Relation> = p
        .relations
        .iter()
        .map(|r| {
            let mut position: Vec<Rat> =
                r.position.iter().map(|c| c + draw(&mut rng)).collect();
            // lift the moved point above every moved support generator; the
            // join stays within epsilon of the original position because
            // each support generator sat below it
            for (g, coeff) in r.coeffs.iter().enumerate() {
                if !coeff.is_zero() {
                    for (a, c) in position.iter_mut().zip(&generators[g]) {
                        if &*a < c {
                            *a = c.clone();
                        }
                    }
                }
            }
            Relation {
                position,
                coeffs: r.coeffs.clone(),
            }
        })
        .collect();
    let q = Presentation {
        n,
        generators,
        relations,
    };
    q.validate()?;
    // certificate: on a grid refining both presentations and their
    // down-shifts, each map sends a generator to the generator with the same
    // index, which is live in the shifted target because no point moved by
    // more than epsilon
    let eps_vec = vec![epsilon.clone(); n];
    let down = point_neg(&eps_vec);
    let p_down = p.translate(&down);
    let q_down = q.translate(&down);
    let base = p.natural_grid()?;
    let mut adds: Vec<Vec<Rat>> = vec![Vec::new(); n];
    for other in [q.natural_grid()?, p_down.natural_grid()?, q_down.natural_grid()?] {
        for (i, add) in adds.iter_mut().enumerate() {
            add.extend(other.axis(i).iter().cloned());
        }
    }
    let host = base.extend_with_coords(&adds)?;
    let rv = realise_on_grid(p, field.clone(), &host)?;
    let rw = realise_on_grid(&q, field.clone(), &host)?;
    let rvt = realise_on_grid(&p_down, field.clone(), &host)?;
    let rwt = realise_on_grid(&q_down, field.clone(), &host)?;
    let f = generator_reindex_map(&rv, &rwt, &field)?;
    let g = generator_reindex_map(&rw, &rvt, &field)?;
    Ok((
        q,
        InterleavingCertificate {
            epsilon: epsilon.clone(),
            f,
            g,
        },
    ))
}

/// The map between two realisations on a common grid that sends each live
/// generator of the source to the generator with the same index in the
/// target, composed with the quotient scaffolding at each vertex.
fn generator_reindex_map<K: Field>(
    src: &Realisation<K>,
    dst: &Realisation<K>,
    field: &K,
) -> Result<ModuleMap<K>> {
    let len = src.module.grid().len();
    let mut mats = Vec::with_capacity(len);
    for c in 0..len {
        let live_s = &src.live[c];
        let live_d = &dst.live[c];
        let mut reindex = Matrix::zero(field.clone(), live_d.len(), live_s.len());
        for (col, gen) in live_s.iter().enumerate() {
            let row = live_d
                .binary_search(gen)
                .map_err(|_| Error::InvariantViolation {
                    op: "perturb_presentation",
                    detail: format!("generator {gen} is not live in the shifted target"),
                })?;
            reindex.set(row, col, field.one());
        }
        mats.push(dst.proj[c].mul(&reindex).mul(&src.lift[c]));
    }
    ModuleMap::new(src.module.clone(), dst.module.clone(), mats)
}
