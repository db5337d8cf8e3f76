//! Wall-and-chamber structure of the shift parameter space.
//!
//! Shifting a module before discretising sweeps a family of HN filtrations
//! parametrised by the shift `x`. The filtration is locally constant: the
//! shift space splits into chambers cut out by two kinds of loci. First,
//! *alignment* loci, where a shifted module coordinate meets a coordinate of
//! the condition (or the origin) and the combinatorics of the common adapted
//! grid changes. Second, *walls*, where two sub-dimension vectors have equal
//! slope and the order of slope comparisons inside the HN engine can flip.
//!
//! [`wall_system`] enumerates the candidate walls for a module shape,
//! [`cube_partition`] computes the alignment decomposition of a rectangular
//! search region (one or two parameters), [`x_breakpoints_1d`] returns the
//! exact chamber boundaries along one parameter together with the HN type on
//! each interval, and [`constancy_check`] probes a region for constancy of
//! the HN shape at a threshold.
//!
//! Within a chamber the exact HN slopes still vary continuously with `x`;
//! what is constant is the [`HNShape`]: the number of filtration steps, the
//! sign of each quotient slope, and each step's dimensions over the module's
//! own grid points. Chamber comparisons therefore work with shapes, never
//! with raw slope values.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::grid::{point_sub, GridMap, GridPoset};
use crate::hn::{hn_type_of, HNFiltration, HNType};
use crate::invariants::FilteredRankInvariant;
use crate::module::GridModule;
use crate::scalar::{Field, Rat};
use crate::stability::{DiscreteStability, StabilityCondition};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Cap on the number of sub-dimension vectors (the product of `dim + 1` over
/// all vertices) that wall enumeration is willing to walk.
pub const WALL_ENUMERATION_BUDGET: usize = 512;

/// Dyadic precision, in bits, used to bracket irrational wall crossings.
const SQRT_BRACKET_BITS: u32 = 40;

/// All candidate walls for modules of a fixed dimension vector: unordered
/// pairs of distinct nonzero sub-dimension vectors. A discrete stability
/// condition lies on the wall of a pair exactly when it gives both vectors
/// the same slope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallSystem {
    base: GridPoset,
    dims: Vec<usize>,
    walls: Vec<(Vec<usize>, Vec<usize>)>,
}

impl WallSystem {
    /// The grid the dimension vectors live on.
    pub fn base(&self) -> &GridPoset {
        &self.base
    }

    /// The per-vertex dimension bound the sub-dimension vectors respect.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// The unordered pairs of distinct nonzero sub-dimension vectors.
    pub fn walls(&self) -> &[(Vec<usize>, Vec<usize>)] {
        &self.walls
    }

    /// Whether a discrete stability condition lies on the given wall, i.e.
    /// assigns equal slopes to both sub-dimension vectors. Cross-multiplied,
    /// so no division is involved.
    pub fn on_wall(&self, wall: usize, ds: &DiscreteStability) -> Result<bool> {
        let (d, e) = self.walls.get(wall).ok_or_else(|| Error::InvalidArgument {
            op: "WallSystem::on_wall",
            detail: format!("wall index {wall} out of range ({} walls)", self.walls.len()),
        })?;
        if ds.grid() != &self.base {
            return Err(Error::ContextMismatch {
                op: "WallSystem::on_wall",
                detail: "discrete stability lives on a different grid than the wall system"
                    .to_string(),
            });
        }
        Ok(ds.alpha_total(d) * ds.beta_total(e) == ds.alpha_total(e) * ds.beta_total(d))
    }
}

/// Enumerates all nonzero vectors `0 <= d <= dims` componentwise, refusing
/// when their number (including zero) exceeds [`WALL_ENUMERATION_BUDGET`].
fn enumerate_subdim_vectors(dims: &[usize], op: &'static str) -> Result<Vec<Vec<usize>>> {
    let mut product: usize = 1;
    for &d in dims {
        product = product
            .checked_mul(d + 1)
            .filter(|p| *p <= WALL_ENUMERATION_BUDGET)
            .ok_or_else(|| Error::BudgetExceeded {
                op,
                detail: format!(
                    "more than {WALL_ENUMERATION_BUDGET} sub-dimension vectors to enumerate"
                ),
            })?;
    }
    let mut out = Vec::with_capacity(product - 1);
    let mut cur = vec![0usize; dims.len()];
    loop {
        // advance the odometer, last vertex fastest; stop after wrapping
        let mut i = dims.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] < dims[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
        out.push(cur.clone());
    }
}

/// The candidate walls for the module `u` discretised on `ds_shape`: all
/// unordered pairs of distinct nonzero sub-dimension vectors of the
/// discretised dimension vector.
pub fn wall_system<K: Field>(u: &GridModule<K>, ds_shape: &GridPoset) -> Result<WallSystem> {
    let evaluated = u.evaluate_on_grid(ds_shape)?;
    let dims = evaluated.dims().to_vec();
    let vectors = enumerate_subdim_vectors(&dims, "wall_system")?;
    let mut walls = Vec::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            walls.push((vectors[i].clone(), vectors[j].clone()));
        }
    }
    Ok(WallSystem {
        base: ds_shape.clone(),
        dims,
        walls,
    })
}

/// One axis factor of a partition cell: a single point or an interval with
/// explicit endpoint membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Point(Rat),
    Interval {
        lo: Rat,
        hi: Rat,
        closed_lo: bool,
        closed_hi: bool,
    },
}

impl Piece {
    pub fn contains(&self, x: &Rat) -> bool {
        match self {
            Piece::Point(v) => x == v,
            Piece::Interval {
                lo,
                hi,
                closed_lo,
                closed_hi,
            } => (x > lo || (*closed_lo && x == lo)) && (x < hi || (*closed_hi && x == hi)),
        }
    }

    /// A point in the relative interior (the midpoint for intervals).
    pub fn representative(&self) -> Rat {
        match self {
            Piece::Point(v) => v.clone(),
            Piece::Interval { lo, hi, .. } => (lo + hi) / Rat::from_integer(2.into()),
        }
    }

    /// The `k`-th of `total` stratified interior probe points.
    fn probe(&self, k: usize, total: usize) -> Rat {
        match self {
            Piece::Point(v) => v.clone(),
            Piece::Interval { lo, hi, .. } => {
                lo + (hi - lo) * Rat::new(BigInt::from(k as i64), BigInt::from(total as i64 + 1))
            }
        }
    }
}

/// One cell of a shift-space partition, with the adapted-grid combinatorics
/// shared by every shift inside it: inclusion maps of the shifted module
/// grid and of the condition grid into their common refinement, built at the
/// cell's representative point (the index patterns, not the coordinates, are
/// what stays constant across the cell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPart {
    pieces: Vec<Piece>,
    module_map: GridMap,
    condition_map: GridMap,
}

impl PartitionPart {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn module_map(&self) -> &GridMap {
        &self.module_map
    }

    pub fn condition_map(&self) -> &GridMap {
        &self.condition_map
    }

    pub fn contains(&self, q: &[Rat]) -> bool {
        q.len() == self.pieces.len() && self.pieces.iter().zip(q).all(|(p, x)| p.contains(x))
    }

    pub fn representative(&self) -> Vec<Rat> {
        self.pieces.iter().map(Piece::representative).collect()
    }
}

/// A partition of a rectangular shift region into cells on which the sign of
/// every comparator `v - x_i - z` and `v - x_i` (module coordinate vs.
/// condition coordinate, module coordinate vs. origin) is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubePartition {
    axis_cuts: Vec<Vec<Rat>>,
    parts: Vec<PartitionPart>,
}

impl CubePartition {
    /// Per-axis comparator zeros inside the region.
    pub fn axis_cuts(&self) -> &[Vec<Rat>] {
        &self.axis_cuts
    }

    pub fn parts(&self) -> &[PartitionPart] {
        &self.parts
    }

    /// Index of the unique part containing `q`, if `q` is in the region.
    pub fn part_containing(&self, q: &[Rat]) -> Option<usize> {
        self.parts.iter().position(|p| p.contains(q))
    }
}

/// Splits one axis of the region at the given cut values: a point piece for
/// every cut and open intervals in between, with the region's own endpoints
/// kept closed when they are not cuts themselves.
fn axis_pieces(cuts: &[Rat], lo: &Rat, hi: &Rat) -> Vec<Piece> {
    if lo == hi {
        return vec![Piece::Point(lo.clone())];
    }
    let mut anchors: Vec<Rat> = vec![lo.clone(), hi.clone()];
    anchors.extend(cuts.iter().cloned());
    anchors.sort();
    anchors.dedup();
    let mut pieces = Vec::new();
    for w in anchors.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        pieces.push(Piece::Interval {
            lo: a.clone(),
            hi: b.clone(),
            closed_lo: a == lo && cuts.binary_search(a).is_err(),
            closed_hi: b == hi && cuts.binary_search(b).is_err(),
        });
        if cuts.binary_search(b).is_ok() {
            pieces.push(Piece::Point(b.clone()));
        }
    }
    if cuts.binary_search(lo).is_ok() {
        pieces.insert(0, Piece::Point(lo.clone()));
    }
    pieces
}

/// Per-axis comparator zeros of the pair of grids: `v - z` for every module
/// coordinate `v` and condition coordinate `z`, plus `v` itself (the
/// comparison against the origin), restricted to `[lo, hi]`.
fn comparator_cuts(gv_axis: &[Rat], gz_axis: &[Rat], lo: &Rat, hi: &Rat) -> Vec<Rat> {
    let mut cuts = Vec::new();
    for v in gv_axis {
        for z in gz_axis {
            cuts.push(v - z);
        }
        cuts.push(v.clone());
    }
    cuts.retain(|c| c >= lo && c <= hi);
    cuts.sort();
    cuts.dedup();
    cuts
}

/// Partitions the rectangular shift region `[lo, hi]` into cells on which
/// the relative order of the shifted module coordinates, the condition
/// coordinates, and the origin is constant on every axis, so all shifts in a
/// cell share one adapted-grid combinatorics. Supports one and two
/// parameters.
pub fn cube_partition(
    gv: &GridPoset,
    gz: &GridPoset,
    lo: &[Rat],
    hi: &[Rat],
) -> Result<CubePartition> {
    let n = gv.n();
    if n > 2 {
        return Err(Error::UnsupportedDimension {
            op: "cube_partition",
            max_n: 2,
            got: n,
        });
    }
    if gz.n() != n || lo.len() != n || hi.len() != n {
        return Err(Error::ShapeMismatch {
            op: "cube_partition",
            detail: format!(
                "grids have {} / {} axes, region has {} / {} coordinates",
                n,
                gz.n(),
                lo.len(),
                hi.len()
            ),
        });
    }
    for i in 0..n {
        if lo[i] > hi[i] {
            return Err(Error::InvalidArgument {
                op: "cube_partition",
                detail: format!("axis {i}: region is empty"),
            });
        }
    }
    let mut axis_cuts = Vec::with_capacity(n);
    let mut pieces_per_axis = Vec::with_capacity(n);
    for i in 0..n {
        let cuts = comparator_cuts(gv.axis(i), gz.axis(i), &lo[i], &hi[i]);
        pieces_per_axis.push(axis_pieces(&cuts, &lo[i], &hi[i]));
        axis_cuts.push(cuts);
    }
    // cartesian product of the per-axis pieces
    let mut parts = Vec::new();
    let shape: Vec<usize> = pieces_per_axis.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    for flat in 0..total {
        let mut idx = Vec::with_capacity(n);
        let mut f = flat;
        for s in shape.iter().rev() {
            idx.push(f % s);
            f /= s;
        }
        idx.reverse();
        let pieces: Vec<Piece> = idx
            .iter()
            .enumerate()
            .map(|(i, &j)| pieces_per_axis[i][j].clone())
            .collect();
        let x: Vec<Rat> = pieces.iter().map(Piece::representative).collect();
        let mut shifted_axes = Vec::with_capacity(n);
        let mut merged_axes = Vec::with_capacity(n);
        for i in 0..n {
            let shifted: Vec<Rat> = gv.axis(i).iter().map(|v| v - &x[i]).collect();
            let mut merged = shifted.clone();
            merged.extend(gz.axis(i).iter().cloned());
            merged.sort();
            merged.dedup();
            shifted_axes.push(shifted);
            merged_axes.push(merged);
        }
        let merged = GridPoset::new(merged_axes)?;
        let module_map = GridMap::inclusion(&GridPoset::new(shifted_axes)?, &merged)?;
        let condition_map = GridMap::inclusion(gz, &merged)?;
        parts.push(PartitionPart {
            pieces,
            module_map,
            condition_map,
        });
    }
    Ok(CubePartition { axis_cuts, parts })
}

/// The chamber-stable shape of an HN filtration at a shift: per filtration
/// step, the sign of the quotient slope and the step's dimensions at the
/// module's own grid points (read through floors in the adapted grid).
/// Within a chamber the shape is constant, while the exact slopes vary
/// continuously with the shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HNShape {
    steps: Vec<(Ordering, Vec<usize>)>,
}

impl HNShape {
    /// `(slope sign, dimensions at the module grid points)` per step.
    pub fn steps(&self) -> &[(Ordering, Vec<usize>)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn shape_from<K: Field>(
    module: &GridModule<K>,
    evaluated: &GridModule<K>,
    filt: &HNFiltration<K>,
    x: &[Rat],
) -> HNShape {
    let egrid = evaluated.grid();
    let probes: Vec<Option<usize>> = module
        .grid()
        .all_indices()
        .iter()
        .map(|idx| {
            let c = point_sub(&module.grid().coords(idx), x);
            egrid.floor(&c).map(|f| egrid.flat(&f))
        })
        .collect();
    let zero = Rat::zero();
    let steps = filt
        .steps()
        .iter()
        .zip(filt.slopes())
        .map(|(step, slope)| {
            let dims: Vec<usize> = probes
                .iter()
                .map(|p| p.map_or(0, |f| step.space_at(f).dim()))
                .collect();
            (slope.cmp(&zero), dims)
        })
        .collect();
    HNShape { steps }
}

/// The HN shape of the module shifted by `x` under the invariant's
/// condition.
pub fn hn_shape_at<K: Field>(inv: &mut FilteredRankInvariant<K>, x: &[Rat]) -> Result<HNShape> {
    let (evaluated, _ds, filt) = inv.filtration_at(x)?;
    Ok(shape_from(inv.module(), &evaluated, &filt, x))
}

/// Exact chamber boundaries along a single shift parameter: the values of
/// `x` in `(lo, hi)` where the HN shape of the shifted module changes,
/// together with the HN type on each of the resulting intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoints1D {
    region: (Rat, Rat),
    breakpoints: Vec<Rat>,
    interval_types: Vec<HNType>,
}

impl Breakpoints1D {
    fn new(
        lo: Rat,
        hi: Rat,
        breakpoints: Vec<Rat>,
        interval_types: Vec<HNType>,
    ) -> Result<Self> {
        if interval_types.len() != breakpoints.len() + 1 {
            return Err(Error::InvariantViolation {
                op: "Breakpoints1D::new",
                detail: format!(
                    "{} interval types for {} breakpoints",
                    interval_types.len(),
                    breakpoints.len()
                ),
            });
        }
        let sorted = breakpoints.windows(2).all(|w| w[0] < w[1]);
        let inside = breakpoints.iter().all(|b| *b > lo && *b < hi);
        if !(sorted && inside) {
            return Err(Error::InvariantViolation {
                op: "Breakpoints1D::new",
                detail: "breakpoints must be strictly increasing inside the region".to_string(),
            });
        }
        Ok(Breakpoints1D {
            region: (lo, hi),
            breakpoints,
            interval_types,
        })
    }

    pub fn region(&self) -> (&Rat, &Rat) {
        (&self.region.0, &self.region.1)
    }

    /// The shape-change points, strictly increasing, strictly inside the
    /// region.
    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    /// The HN type on each open interval between consecutive breakpoints
    /// (with the region endpoints closing the outer two), evaluated at the
    /// interval's midpoint. The type exactly *at* a breakpoint is not
    /// stored: the filtration can degenerate there and differ from both
    /// neighbouring intervals.
    pub fn interval_types(&self) -> &[HNType] {
        &self.interval_types
    }

    /// The stored type for the interval containing `x`, or `None` outside
    /// the region. At a breakpoint itself this reports the type of the
    /// interval to its right, which may differ from the true type at that
    /// single point.
    pub fn type_at(&self, x: &Rat) -> Option<&HNType> {
        if *x < self.region.0 || *x > self.region.1 {
            return None;
        }
        let idx = self.breakpoints.partition_point(|b| b <= x);
        Some(&self.interval_types[idx])
    }
}

/// Exact roots of `q x^2 + p x + r = 0`.
enum QuadRoots {
    /// No real roots (or a contradiction like `p = q = 0, r != 0`).
    None,
    /// The equation holds identically.
    All,
    /// All roots are rational, listed in increasing order.
    Rational(Vec<Rat>),
    /// Irrational roots, each enclosed in a rational bracket of width at
    /// most `2^-SQRT_BRACKET_BITS`.
    Brackets(Vec<(Rat, Rat)>),
}

/// The exact rational square root, when one exists.
fn rational_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let sn = n.sqrt();
    let sd = d.sqrt();
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Rat::new(sn, sd))
}

/// A dyadic bracket `[lo, hi]` with `lo <= sqrt(x) <= hi` and
/// `hi - lo <= 2^-bits`, for `x >= 0`.
fn sqrt_bracket(x: &Rat, bits: u32) -> (Rat, Rat) {
    let (n, d) = (x.numer(), x.denom());
    // sqrt(n/d) = sqrt(n*d)/d, bracketed by scaled integer square roots
    let s: BigInt = n * d;
    let t = (s << (2 * bits as usize)).sqrt();
    let denom: BigInt = d * (BigInt::one() << bits as usize);
    (
        Rat::new(t.clone(), denom.clone()),
        Rat::new(t + BigInt::one(), denom),
    )
}

fn quadratic_roots(q: &Rat, p: &Rat, r: &Rat) -> QuadRoots {
    if q.is_zero() {
        return if p.is_zero() {
            if r.is_zero() {
                QuadRoots::All
            } else {
                QuadRoots::None
            }
        } else {
            QuadRoots::Rational(vec![-(r / p)])
        };
    }
    // normalise to a positive leading coefficient
    let (q, p, r) = if q.is_negative() {
        (-q, -p, -r)
    } else {
        (q.clone(), p.clone(), r.clone())
    };
    let two_q = &q * Rat::from_integer(2.into());
    let disc = &p * &p - Rat::from_integer(4.into()) * &q * &r;
    match disc.cmp(&Rat::zero()) {
        Ordering::Less => QuadRoots::None,
        Ordering::Equal => QuadRoots::Rational(vec![-&p / &two_q]),
        Ordering::Greater => {
            if let Some(s) = rational_sqrt(&disc) {
                QuadRoots::Rational(vec![(-&p - &s) / &two_q, (-&p + &s) / &two_q])
            } else {
                let (slo, shi) = sqrt_bracket(&disc, SQRT_BRACKET_BITS);
                QuadRoots::Brackets(vec![
                    ((-&p - &shi) / &two_q, (-&p - &slo) / &two_q),
                    ((-&p + &slo) / &two_q, (-&p + &shi) / &two_q),
                ])
            }
        }
    }
}

/// The condition's coordinates extended with every unit tail breakpoint the
/// adapted grid can produce while the module is shifted across `[lo, hi]`.
fn tail_extended_axis<K: Field>(
    v: &GridModule<K>,
    z: &StabilityCondition,
    lo: &Rat,
    hi: &Rat,
) -> Vec<Rat> {
    let vaxis = v.grid().axis(0);
    let base = z.base_grid().axis(0);
    let bounds = &z.beta().bounds()[0];
    let (wlo, whi) = (&bounds[0], bounds.last().unwrap());
    let zero = Rat::zero();
    // extreme span of the adapted grid over all shifts in the region
    let gmin = (vaxis[0].clone() - hi).min(zero.clone()).min(base[0].clone());
    let gmax = (vaxis.last().unwrap().clone() - lo)
        .max(zero)
        .max(base.last().unwrap().clone());
    let mut axis = base.to_vec();
    let mut t = whi + Rat::one();
    while t < gmax {
        axis.push(t.clone());
        t += Rat::one();
    }
    let mut t = wlo - Rat::one();
    while t > gmin {
        axis.push(t.clone());
        t -= Rat::one();
    }
    axis.sort();
    axis.dedup();
    axis
}

/// Samples the HN shape and type at `x`, caching by the exact shift value.
fn shape_and_type_at<K: Field>(
    inv: &mut FilteredRankInvariant<K>,
    cache: &mut BTreeMap<Rat, (HNShape, HNType)>,
    x: &Rat,
) -> Result<(HNShape, HNType)> {
    if let Some(hit) = cache.get(x) {
        return Ok(hit.clone());
    }
    let xs = std::slice::from_ref(x);
    let (evaluated, _ds, filt) = inv.filtration_at(xs)?;
    let shape = shape_from(inv.module(), &evaluated, &filt, xs);
    let ty = hn_type_of(&filt);
    cache.insert(x.clone(), (shape.clone(), ty.clone()));
    Ok((shape, ty))
}

/// The exact chamber boundaries of the shifted-module HN shape along one
/// parameter.
///
/// Candidates are the alignment cuts, where a shifted module coordinate
/// meets a condition coordinate (including unit tail breakpoints) or the
/// origin, plus the wall crossings inside each alignment interval: on such
/// an interval the discretised numerator and denominator of every nonzero
/// sub-dimension vector are affine in the shift, so slope ties are roots of
/// explicit rational quadratics and are solved exactly. Candidates where the
/// HN shape does not actually change are discarded.
///
/// Each stored type is sampled at the midpoint of its open interval
/// `(b, next)`. The shape need not be one-sidedly continuous at a
/// breakpoint: at an alignment, coordinates of the shifted module coincide
/// with condition coordinates and the filtration can degenerate at exactly
/// that shift (a module generated on the carrier of the numerator is
/// semistable there, while arbitrarily close shifts split off a proper
/// destabiliser). The type *at* a breakpoint may therefore differ from the
/// types on both neighbouring intervals, and a candidate is also kept when
/// only the point itself deviates. A wall crossing at an irrational shift
/// cannot be represented by rational breakpoints; if the shape actually
/// changes across such a crossing, this returns
/// [`Error::InvariantViolation`] rather than misreporting it.
pub fn x_breakpoints_1d<K: Field>(
    v: &GridModule<K>,
    z: &StabilityCondition,
    lo: &Rat,
    hi: &Rat,
) -> Result<Breakpoints1D> {
    if v.grid().n() != 1 {
        return Err(Error::UnsupportedDimension {
            op: "x_breakpoints_1d",
            max_n: 1,
            got: v.grid().n(),
        });
    }
    if z.n() != 1 {
        return Err(Error::ShapeMismatch {
            op: "x_breakpoints_1d",
            detail: format!("condition has {} parameters, module has 1", z.n()),
        });
    }
    if lo > hi {
        return Err(Error::InvalidArgument {
            op: "x_breakpoints_1d",
            detail: "region is empty".to_string(),
        });
    }
    let mut inv = FilteredRankInvariant::new(v.clone(), z.clone())?;
    let mut cache: BTreeMap<Rat, (HNShape, HNType)> = BTreeMap::new();
    if lo == hi {
        let (_, ty) = shape_and_type_at(&mut inv, &mut cache, lo)?;
        return Breakpoints1D::new(lo.clone(), hi.clone(), Vec::new(), vec![ty]);
    }

    // alignment cuts from the comparator zeros, tails included
    let zaxis = tail_extended_axis(v, z, lo, hi);
    let mut cuts = comparator_cuts(v.grid().axis(0), &zaxis, lo, hi);
    cuts.retain(|c| c > lo && c < hi);
    let mut candidates: BTreeSet<Rat> = cuts.iter().cloned().collect();

    // wall crossings inside each alignment interval
    let mut anchors = vec![lo.clone()];
    anchors.extend(cuts.iter().cloned());
    anchors.push(hi.clone());
    let third = Rat::new(BigInt::one(), BigInt::from(3));
    for w in anchors.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let gap = b - a;
        let x1 = a + &gap * &third;
        let x2 = a + &gap * &third * Rat::from_integer(2.into());
        let (e1, ds1) = inv.discretise_at(std::slice::from_ref(&x1))?;
        let (e2, ds2) = inv.discretise_at(std::slice::from_ref(&x2))?;
        let cells = e1.grid().len();
        if e2.grid().len() != cells || e1.dims() != e2.dims() {
            return Err(Error::InvariantViolation {
                op: "x_breakpoints_1d",
                detail: "alignment cuts failed to pin the adapted-grid pattern".to_string(),
            });
        }
        // per-cell affine interpolation of the discretised condition
        let dx = &x2 - &x1;
        let mut affine = Vec::with_capacity(cells);
        for c in 0..cells {
            let a_sl = (&ds2.alpha()[c] - &ds1.alpha()[c]) / &dx;
            let b_sl = (&ds2.beta()[c] - &ds1.beta()[c]) / &dx;
            affine.push((
                &ds1.alpha()[c] - &a_sl * &x1,
                a_sl,
                &ds1.beta()[c] - &b_sl * &x1,
                b_sl,
            ));
        }
        let vectors = enumerate_subdim_vectors(e1.dims(), "x_breakpoints_1d")?;
        let totals: Vec<(Rat, Rat, Rat, Rat)> = vectors
            .iter()
            .map(|d| {
                let mut t = (Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero());
                for (c, &m) in d.iter().enumerate() {
                    if m > 0 {
                        let mult = Rat::from_integer(m.into());
                        let (ai, asl, bi, bsl) = &affine[c];
                        t.0 += ai * &mult;
                        t.1 += asl * &mult;
                        t.2 += bi * &mult;
                        t.3 += bsl * &mult;
                    }
                }
                t
            })
            .collect();
        for i in 0..totals.len() {
            let (ai, asl, bi, bsl) = &totals[i];
            for (aj, ajsl, bj, bjsl) in totals.iter().skip(i + 1) {
                // slope tie: alpha_i * beta_j = alpha_j * beta_i, a quadratic in x
                let q = asl * bjsl - ajsl * bsl;
                let p = ai * bjsl + asl * bj - aj * bsl - ajsl * bi;
                let r = ai * bj - aj * bi;
                match quadratic_roots(&q, &p, &r) {
                    QuadRoots::None | QuadRoots::All => {}
                    QuadRoots::Rational(roots) => {
                        for root in roots {
                            if root > *a && root < *b {
                                candidates.insert(root);
                            }
                        }
                    }
                    QuadRoots::Brackets(brackets) => {
                        for (bl, bh) in brackets {
                            // compare shapes across the bracket, clipped to
                            // the strict interior of the alignment interval;
                            // crossings within the bracket width of an
                            // endpoint are attributed to that endpoint
                            let l = bl.max(a.clone());
                            let h = bh.min(b.clone());
                            if l <= *a || h >= *b || l >= h {
                                continue;
                            }
                            let (sl, _) = shape_and_type_at(&mut inv, &mut cache, &l)?;
                            let (sh, _) = shape_and_type_at(&mut inv, &mut cache, &h)?;
                            if sl != sh {
                                return Err(Error::InvariantViolation {
                                    op: "x_breakpoints_1d",
                                    detail:
                                        "the HN shape changes at an irrational wall crossing, \
                                         which rational breakpoints cannot represent"
                                            .to_string(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    // type the open gaps between candidates at their midpoints and keep the
    // candidates where the shape actually changes: either the neighbouring
    // gaps disagree, or the shape at the point itself deviates from both
    // (at an alignment the shifted module can degenerate at that one shift)
    let candidates: Vec<Rat> = candidates.into_iter().collect();
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let mut gap_data = Vec::with_capacity(candidates.len() + 1);
    for i in 0..=candidates.len() {
        let a = if i == 0 { lo } else { &candidates[i - 1] };
        let b = if i == candidates.len() {
            hi
        } else {
            &candidates[i]
        };
        let mid = (a + b) * &half;
        gap_data.push(shape_and_type_at(&mut inv, &mut cache, &mid)?);
    }
    let mut kept = Vec::new();
    let mut types = vec![gap_data[0].1.clone()];
    for (i, c) in candidates.iter().enumerate() {
        let side_change = gap_data[i].0 != gap_data[i + 1].0;
        let keep = side_change || {
            let (at_point, _) = shape_and_type_at(&mut inv, &mut cache, c)?;
            at_point != gap_data[i + 1].0
        };
        if keep {
            kept.push(c.clone());
            types.push(gap_data[i + 1].1.clone());
        }
    }
    Breakpoints1D::new(lo.clone(), hi.clone(), kept, types)
}

/// Probes a partition cell with stratified interior points and reports
/// whether the HN shape, together with the number of filtration steps at or
/// above `theta`, is the same at every probe.
pub fn constancy_check<K: Field>(
    v: &GridModule<K>,
    z: &StabilityCondition,
    part: &[Piece],
    theta: &Rat,
    probes: usize,
) -> Result<bool> {
    let n = v.grid().n();
    if part.len() != n || z.n() != n {
        return Err(Error::ShapeMismatch {
            op: "constancy_check",
            detail: format!(
                "module has {} parameters, condition {}, part {}",
                n,
                z.n(),
                part.len()
            ),
        });
    }
    if probes == 0 {
        return Err(Error::InvalidArgument {
            op: "constancy_check",
            detail: "at least one probe point is required".to_string(),
        });
    }
    let mut inv = FilteredRankInvariant::new(v.clone(), z.clone())?;
    let mut reference: Option<(HNShape, usize)> = None;
    for k in 1..=probes {
        let x: Vec<Rat> = part.iter().map(|p| p.probe(k, probes)).collect();
        let (evaluated, _ds, filt) = inv.filtration_at(&x)?;
        let shape = shape_from(inv.module(), &evaluated, &filt, &x);
        let above = filt.slopes().iter().filter(|s| *s >= theta).count();
        match &reference {
            None => reference = Some((shape, above)),
            Some((s, a)) => {
                if *s != shape || *a != above {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::module::{realise, Presentation};
    use crate::scalar::{rat, rat_int, PrimeField};
    use crate::stability::{AlphaSpec, BetaSpec, SignPolicy};

    fn f2() -> PrimeField {
        PrimeField::new(2).unwrap()
    }

    /// The thin module supported on the half-open interval [a, b).
    fn interval(a: i64, b: i64) -> GridModule<PrimeField> {
        let pres = Presentation::half_open_box(&[rat_int(a)], &[Some(rat_int(b))]).unwrap();
        realise(&pres, f2()).unwrap().module
    }

    /// Unit skyscraper numerator at 0 with density 1 on the window [0,1).
    fn unit_condition() -> StabilityCondition {
        StabilityCondition::new(
            1,
            AlphaSpec::Eval(vec![(vec![rat_int(0)], rat_int(1))]),
            BetaSpec::new(
                vec![vec![rat_int(0), rat_int(1)]],
                vec![rat_int(1)],
                vec![(rat(1, 2), rat(1, 2))],
            )
            .unwrap(),
            SignPolicy::Engine,
        )
        .unwrap()
    }

    fn grid01() -> GridPoset {
        GridPoset::new(vec![vec![rat_int(0), rat_int(1)]]).unwrap()
    }

    #[test]
    fn wall_system_counts() {
        // a single vertex of dimension one admits no nontrivial walls
        let point = GridPoset::new(vec![vec![rat_int(0)]]).unwrap();
        let unit = GridModule::from_edge_fn(f2(), point.clone(), vec![1], |_, _| {
            Matrix::from_rows(f2(), 1, vec![vec![1]]).unwrap()
        })
        .unwrap();
        assert!(wall_system(&unit, &point).unwrap().walls().is_empty());
        // dimension vector (1, 1) on a two-point chain: three nonzero
        // sub-dimension vectors, hence three unordered pairs
        let ws = wall_system(&interval(0, 2), &grid01()).unwrap();
        assert_eq!(ws.dims(), &[1, 1]);
        assert_eq!(ws.walls().len(), 3);
        // the enumeration budget refuses oversized dimension vectors
        let big = GridModule::from_edge_fn(f2(), point.clone(), vec![512], |_, _| {
            Matrix::from_rows(f2(), 512, vec![vec![1; 512]]).unwrap()
        })
        .unwrap();
        assert!(matches!(
            wall_system(&big, &point),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn wall_membership_is_slope_equality() {
        let ws = wall_system(&interval(0, 2), &grid01()).unwrap();
        let find = |d: &[usize], e: &[usize]| {
            ws.walls()
                .iter()
                .position(|(a, b)| (a == d && b == e) || (a == e && b == d))
                .unwrap()
        };
        // slopes 1/1 and 2/2 agree: on the wall of (1,0) against (1,1)
        let balanced =
            DiscreteStability::new(grid01(), vec![rat_int(1), rat_int(1)], vec![
                rat_int(1),
                rat_int(1),
            ])
            .unwrap();
        assert!(ws
            .on_wall(find(&[1, 0], &[1, 1]), &balanced)
            .unwrap());
        // slopes 1/1 and 1/2 differ: off the wall
        let skewed =
            DiscreteStability::new(grid01(), vec![rat_int(1), rat_int(0)], vec![
                rat_int(1),
                rat_int(1),
            ])
            .unwrap();
        assert!(!ws.on_wall(find(&[1, 0], &[1, 1]), &skewed).unwrap());
        // a condition on another grid is rejected
        let other = DiscreteStability::new(
            GridPoset::new(vec![vec![rat_int(0)]]).unwrap(),
            vec![rat_int(1)],
            vec![rat_int(1)],
        )
        .unwrap();
        assert!(matches!(
            ws.on_wall(0, &other),
            Err(Error::ContextMismatch { .. })
        ));
        assert!(matches!(
            ws.on_wall(99, &balanced),
            Err(Error::InvalidArgument { .. })
        ));
    }

    #[test]
    fn partition_of_a_region_with_cuts() {
        // module coordinates {0, 1} against condition coordinates {0, 1}:
        // comparator zeros at -1, 0, 1
        let partition = cube_partition(
            &grid01(),
            &grid01(),
            &[rat_int(-2)],
            &[rat_int(2)],
        )
        .unwrap();
        assert_eq!(partition.axis_cuts(), &[vec![rat_int(-1), rat_int(0), rat_int(1)]]);
        // four open intervals and three cut points
        assert_eq!(partition.parts().len(), 7);
        let points = partition
            .parts()
            .iter()
            .filter(|p| matches!(p.pieces()[0], Piece::Point(_)))
            .count();
        assert_eq!(points, 3);
        // the parts tile the region: every sample lies in exactly one part
        for num in -8..=8i64 {
            let q = vec![rat(num, 4)];
            let hits = partition.parts().iter().filter(|p| p.contains(&q)).count();
            assert_eq!(hits, 1, "sample {num}/4 must lie in exactly one part");
        }
        // the refinement maps land in a common codomain
        let part = &partition.parts()[partition.part_containing(&[rat(1, 2)]).unwrap()];
        assert_eq!(
            part.module_map().codomain(),
            part.condition_map().codomain()
        );
        assert_eq!(
            part.module_map().domain().axis(0),
            &[rat(-1, 2), rat(1, 2)]
        );
    }

    #[test]
    fn partition_away_from_all_cuts_is_trivial() {
        let partition = cube_partition(
            &grid01(),
            &grid01(),
            &[rat_int(5)],
            &[rat_int(6)],
        )
        .unwrap();
        assert_eq!(partition.parts().len(), 1);
        let piece = &partition.parts()[0].pieces()[0];
        assert!(piece.contains(&rat_int(5)) && piece.contains(&rat_int(6)));
    }

    #[test]
    fn two_parameter_partition_is_a_product() {
        let g2 = GridPoset::new(vec![
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(0), rat_int(1)],
        ])
        .unwrap();
        let lo = [rat_int(-2), rat_int(-2)];
        let hi = [rat_int(2), rat_int(2)];
        let partition = cube_partition(&g2, &g2, &lo, &hi).unwrap();
        assert_eq!(partition.parts().len(), 49);
        for qx in [-2, -1, 0, 1, 2] {
            for qy in [rat(-3, 2), rat(1, 2)] {
                let q = vec![rat_int(qx), qy];
                let hits = partition.parts().iter().filter(|p| p.contains(&q)).count();
                assert_eq!(hits, 1);
            }
        }
        // three parameters are out of scope
        let g3 = GridPoset::new(vec![
            vec![rat_int(0)],
            vec![rat_int(0)],
            vec![rat_int(0)],
        ])
        .unwrap();
        assert!(matches!(
            cube_partition(&g3, &g3, &vec![rat_int(0); 3], &vec![rat_int(1); 3]),
            Err(Error::UnsupportedDimension { max_n: 2, .. })
        ));
    }

    #[test]
    fn quadratic_roots_are_exact() {
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&rat_int(2)), None);
        // distinct rational roots
        match quadratic_roots(&rat_int(1), &rat_int(-3), &rat_int(2)) {
            QuadRoots::Rational(r) => assert_eq!(r, vec![rat_int(1), rat_int(2)]),
            _ => panic!("expected rational roots"),
        }
        // linear case
        match quadratic_roots(&rat_int(0), &rat_int(2), &rat_int(-4)) {
            QuadRoots::Rational(r) => assert_eq!(r, vec![rat_int(2)]),
            _ => panic!("expected a rational root"),
        }
        // negative discriminant
        assert!(matches!(
            quadratic_roots(&rat_int(1), &rat_int(0), &rat_int(2)),
            QuadRoots::None
        ));
        assert!(matches!(
            quadratic_roots(&rat_int(0), &rat_int(0), &rat_int(0)),
            QuadRoots::All
        ));
        // irrational roots come bracketed tightly around +-sqrt(2)
        match quadratic_roots(&rat_int(1), &rat_int(0), &rat_int(-2)) {
            QuadRoots::Brackets(br) => {
                assert_eq!(br.len(), 2);
                let (lo, hi) = &br[1];
                assert!(lo * lo <= rat_int(2) && rat_int(2) <= hi * hi);
                assert!(hi - lo <= Rat::new(BigInt::one(), BigInt::one() << 40));
            }
            _ => panic!("expected bracketed roots"),
        }
    }

    #[test]
    fn breakpoints_of_the_unit_interval_module() {
        // the skyscraper numerator sees the shifted interval exactly while
        // the origin lies in its support: the shape changes at 0 and 1
        let bp = x_breakpoints_1d(
            &interval(0, 1),
            &unit_condition(),
            &rat_int(-2),
            &rat_int(2),
        )
        .unwrap();
        assert_eq!(bp.breakpoints(), &[rat_int(0), rat_int(1)]);
        assert_eq!(bp.interval_types().len(), 3);
        // before entry and after exit the module is semistable of slope 0
        assert_eq!(bp.interval_types()[0].slopes(), vec![rat_int(0)]);
        assert_eq!(bp.interval_types()[2].slopes(), vec![rat_int(0)]);
        // inside (0, 1), typed at the midpoint: the submodule generated on
        // the carrier destabilises (mass 1 over window mass 1/2), leaving a
        // slope-0 quotient below the carrier
        assert_eq!(
            bp.interval_types()[1].slopes(),
            vec![rat_int(2), rat_int(0)]
        );
        assert_eq!(
            bp.type_at(&rat(1, 2)).unwrap().slopes(),
            vec![rat_int(2), rat_int(0)]
        );
        // at a breakpoint the lookup reports the interval to its right
        assert_eq!(bp.type_at(&rat_int(1)).unwrap().slopes(), vec![rat_int(0)]);
        assert!(bp.type_at(&rat_int(-3)).is_none());
    }

    #[test]
    fn vanishing_numerator_gives_no_breakpoints() {
        let z = StabilityCondition::new(
            1,
            AlphaSpec::Eval(Vec::new()),
            BetaSpec::new(
                vec![vec![rat_int(0), rat_int(1)]],
                vec![rat_int(1)],
                vec![(rat(1, 2), rat(1, 2))],
            )
            .unwrap(),
            SignPolicy::Engine,
        )
        .unwrap();
        let bp = x_breakpoints_1d(&interval(0, 1), &z, &rat_int(-2), &rat_int(2)).unwrap();
        assert!(bp.breakpoints().is_empty());
        assert_eq!(bp.interval_types().len(), 1);
        assert_eq!(bp.interval_types()[0].slopes(), vec![rat_int(0)]);
    }

    #[test]
    fn breakpoints_are_stable_under_region_refinement() {
        let v = interval(0, 1);
        let z = unit_condition();
        let whole = x_breakpoints_1d(&v, &z, &rat_int(-2), &rat_int(2)).unwrap();
        let left = x_breakpoints_1d(&v, &z, &rat_int(-2), &rat(1, 3)).unwrap();
        let right = x_breakpoints_1d(&v, &z, &rat(1, 3), &rat_int(2)).unwrap();
        let mut union = left.breakpoints().to_vec();
        union.extend(right.breakpoints().iter().cloned());
        assert_eq!(union, whole.breakpoints());
    }

    #[test]
    fn breakpoints_account_for_every_sampled_shape_change() {
        // dense sampling in steps of 1/8, offset by 1/16 so no sample lands
        // on a breakpoint (the type exactly at a breakpoint may differ from
        // both neighbouring intervals): consecutive shapes differ exactly
        // when a recorded breakpoint lies between them, and every recorded
        // breakpoint is witnessed by such a pair
        let v = interval(0, 1);
        let z = unit_condition();
        let bp = x_breakpoints_1d(&v, &z, &rat_int(-2), &rat_int(2)).unwrap();
        let mut inv = FilteredRankInvariant::new(v.clone(), z).unwrap();
        let step = rat(1, 8);
        let mut witnessed = vec![false; bp.breakpoints().len()];
        let mut prev: Option<(Rat, HNShape)> = None;
        for k in 0..32 {
            let x = rat_int(-2) + rat(1, 16) + &step * rat_int(k);
            let shape = hn_shape_at(&mut inv, std::slice::from_ref(&x)).unwrap();
            if let Some((px, pshape)) = prev {
                let between: Vec<usize> = bp
                    .breakpoints()
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b > px && **b < x)
                    .map(|(i, _)| i)
                    .collect();
                assert_eq!(
                    shape != pshape,
                    !between.is_empty(),
                    "sampled change between {px} and {x} must match the breakpoint list"
                );
                for i in between {
                    witnessed[i] = true;
                }
            }
            prev = Some((x, shape));
        }
        assert!(witnessed.iter().all(|w| *w), "unwitnessed breakpoint");
    }

    #[test]
    fn constancy_holds_inside_a_chamber_and_fails_across_one() {
        let v = interval(0, 1);
        let z = unit_condition();
        let inside = [Piece::Interval {
            lo: rat(1, 8),
            hi: rat(7, 8),
            closed_lo: false,
            closed_hi: false,
        }];
        assert!(constancy_check(&v, &z, &inside, &rat_int(0), 5).unwrap());
        let across = [Piece::Interval {
            lo: rat(-1, 2),
            hi: rat(1, 2),
            closed_lo: false,
            closed_hi: false,
        }];
        assert!(!constancy_check(&v, &z, &across, &rat_int(0), 6).unwrap());
        let point = [Piece::Point(rat(1, 4))];
        assert!(constancy_check(&v, &z, &point, &rat_int(0), 3).unwrap());
        assert!(matches!(
            constancy_check(&v, &z, &point, &rat_int(0), 0),
            Err(Error::InvalidArgument { .. })
        ));
    }

    #[test]
    fn the_type_at_a_breakpoint_can_differ_from_both_sides() {
        // at shift 0 the generator of the interval sits exactly on the
        // numerator's carrier, so the module is semistable of slope 1 at
        // that single shift, while both neighbouring intervals disagree:
        // slope 0 below, a two-step filtration above
        let v = interval(0, 1);
        let z = unit_condition();
        let mut inv = FilteredRankInvariant::new(v.clone(), z).unwrap();
        let mut at = |x: Rat| {
            let (_, _, filt) = inv.filtration_at(std::slice::from_ref(&x)).unwrap();
            hn_type_of(&filt).slopes()
        };
        assert_eq!(at(rat_int(0)), vec![rat_int(1)]);
        assert_eq!(at(rat(-1, 8)), vec![rat_int(0)]);
        assert_eq!(at(rat(1, 8)), vec![rat(8, 7), rat_int(0)]);
    }

    #[test]
    fn degenerate_regions_and_bad_inputs() {
        let v = interval(0, 1);
        let z = unit_condition();
        // a single-point region has one interval and no breakpoints
        let bp = x_breakpoints_1d(&v, &z, &rat(1, 2), &rat(1, 2)).unwrap();
        assert!(bp.breakpoints().is_empty());
        assert_eq!(bp.interval_types().len(), 1);
        assert!(matches!(
            x_breakpoints_1d(&v, &z, &rat_int(2), &rat_int(-2)),
            Err(Error::InvalidArgument { .. })
        ));
        // more than one parameter is rejected
        let g2 = GridPoset::new(vec![vec![rat_int(0)], vec![rat_int(0)]]).unwrap();
        let v2 = GridModule::from_edge_fn(f2(), g2, vec![1], |_, _| {
            Matrix::from_rows(f2(), 1, vec![vec![1]]).unwrap()
        })
        .unwrap();
        assert!(matches!(
            x_breakpoints_1d(&v2, &z, &rat_int(0), &rat_int(1)),
            Err(Error::UnsupportedDimension { max_n: 1, .. })
        ));
    }
}
