//! Stability conditions `Z = (alpha, beta)`: an imaginary part given by
//! nonnegative point evaluations or signed step densities with point/face
//! masses, and a real part given by a strictly positive, integrable step
//! density. All evaluation, integration, pullback, and slope arithmetic is
//! exact over the rationals.
//!
//! The real part `b` is a per-cell positive step function on a bounded
//! window, extended beyond the window by per-axis geometric tails on unit
//! cells, so every cube integral is a finite sum plus closed-form geometric
//! series.

use crate::grid::{AxisInterval, Cube, GridPoset};
use crate::scalar::{rat_floor_i64, Rat};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// A reason a candidate stability condition is rejected by validation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Diagnostic {
    #[error("numerator term {term} has a negative coefficient, which the filtration engine does not accept")]
    NegativeAlphaCoefficient { term: usize },
    #[error("numerator term {term} has an unbounded carrier")]
    UnboundedAlphaCarrier { term: usize },
    #[error("denominator density is not positive on cell {cell}")]
    NonpositiveBetaValue { cell: String },
    #[error("denominator tail ratio on axis {axis} ({ratio}) is not in (0, 1), so the density is not integrable")]
    NonintegrableTail { axis: usize, ratio: String },
    #[error("numerator term {term} puts negative weight on a lower-dimensional carrier, which admits no maximal destabiliser")]
    NegativePointMass { term: usize },
}

fn rat_pow(r: &Rat, k: u64) -> Rat {
    let mut acc = Rat::one();
    let mut base = r.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// The strictly positive, integrable real-part density: positive rational
/// values on the cells of a bounded window, times per-axis geometric factors
/// on unit cells beyond the window (ratio per direction, strictly between 0
/// and 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaSpec {
    /// Per-axis cell boundaries (strictly increasing, at least two entries;
    /// first and last are the window bounds).
    bounds: Vec<Vec<Rat>>,
    /// Positive value per window cell, row-major with the last axis fastest.
    values: Vec<Rat>,
    /// Per-axis `(left ratio, right ratio)`, each strictly inside `(0, 1)`.
    tails: Vec<(Rat, Rat)>,
}

impl BetaSpec {
    pub fn new(bounds: Vec<Vec<Rat>>, values: Vec<Rat>, tails: Vec<(Rat, Rat)>) -> Result<Self> {
        if bounds.is_empty() || bounds.len() != tails.len() {
            return Err(Error::ShapeMismatch {
                op: "BetaSpec::new",
                detail: format!("{} bound axes and {} tail axes", bounds.len(), tails.len()),
            });
        }
        for (i, b) in bounds.iter().enumerate() {
            if b.len() < 2 || b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument {
                    op: "BetaSpec::new",
                    detail: format!("axis {i}: window bounds must be strictly increasing with at least one cell"),
                });
            }
        }
        let cells: Vec<usize> = bounds.iter().map(|b| b.len() - 1).collect();
        let total: usize = cells.iter().product();
        if values.len() != total {
            return Err(Error::ShapeMismatch {
                op: "BetaSpec::new",
                detail: format!("{} cell values for {total} window cells", values.len()),
            });
        }
        for (flat, v) in values.iter().enumerate() {
            if !v.is_positive() {
                // recover the multi-index of the offending cell
                let mut idx = vec![0usize; cells.len()];
                let mut f = flat;
                for i in (0..cells.len()).rev() {
                    idx[i] = f % cells[i];
                    f /= cells[i];
                }
                return Err(Diagnostic::NonpositiveBetaValue {
                    cell: format!("{idx:?}"),
                }
                .into());
            }
        }
        for (i, (lo, hi)) in tails.iter().enumerate() {
            for r in [lo, hi] {
                if !r.is_positive() || *r >= Rat::one() {
                    return Err(Diagnostic::NonintegrableTail {
                        axis: i,
                        ratio: crate::scalar::format_rat(r),
                    }
                    .into());
                }
            }
        }
        Ok(BetaSpec {
            bounds,
            values,
            tails,
        })
    }

    /// The canonical default: one unit-padded window cell around a bounding
    /// box, constant value one, tail ratios one half.
    pub fn default_for_bbox(lo: &[Rat], hi: &[Rat]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::ShapeMismatch {
                op: "BetaSpec::default_for_bbox",
                detail: format!("{} lower and {} upper corners", lo.len(), hi.len()),
            });
        }
        let one = Rat::one();
        let bounds = lo
            .iter()
            .zip(hi)
            .map(|(l, h)| vec![l - &one, h + &one])
            .collect();
        let half = Rat::new(1.into(), 2.into());
        BetaSpec::new(bounds, vec![Rat::one()], vec![(half.clone(), half); lo.len()])
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    /// Per-axis window cell boundaries.
    pub fn bounds(&self) -> &[Vec<Rat>] {
        &self.bounds
    }

    /// Per-cell density values, row-major over the per-axis cell indices.
    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// Per-axis geometric tail ratios `(below, above)`.
    pub fn tails(&self) -> &[(Rat, Rat)] {
        &self.tails
    }

    /// The window as a half-open cube.
    pub fn window(&self) -> Cube {
        Cube {
            intervals: self
                .bounds
                .iter()
                .map(|b| AxisInterval {
                    lo: b[0].clone(),
                    hi: Some(b.last().unwrap().clone()),
                })
                .collect(),
        }
    }

    fn cell_counts(&self) -> Vec<usize> {
        self.bounds.iter().map(|b| b.len() - 1).collect()
    }

    fn cell_value(&self, idx: &[usize]) -> &Rat {
        let counts = self.cell_counts();
        let mut flat = 0;
        for (i, &x) in idx.iter().enumerate() {
            flat = flat * counts[i] + x;
        }
        &self.values[flat]
    }

    /// The density value at a rational point.
    pub fn eval(&self, q: &[Rat]) -> Rat {
        debug_assert_eq!(q.len(), self.n());
        let mut cell = Vec::with_capacity(self.n());
        let mut factor = Rat::one();
        for i in 0..self.n() {
            let b = &self.bounds[i];
            let (lo, hi) = (&b[0], b.last().unwrap());
            if q[i] < *lo {
                // unit cell [lo - m, lo - m + 1) with m = ceil(lo - q)
                let m = -rat_floor_i64(&(&q[i] - lo)).expect("coordinate in range");
                factor *= rat_pow(&self.tails[i].0, m as u64);
                cell.push(0);
            } else if q[i] >= *hi {
                let m = rat_floor_i64(&(&q[i] - hi)).expect("coordinate in range");
                factor *= rat_pow(&self.tails[i].1, m as u64 + 1);
                cell.push(b.len() - 2);
            } else {
                cell.push(b.partition_point(|c| c <= &q[i]) - 1);
            }
        }
        self.cell_value(&cell) * factor
    }

    /// Mass of `rho^(floor(t)+1)` over distances `t` in `[d0, d1)` (both
    /// relative to the window edge, `d1 = None` meaning infinity).
    fn tail_mass(d0: &Rat, d1: Option<&Rat>, rho: &Rat) -> Rat {
        if let Some(d1) = d1 {
            if d1 <= d0 {
                return Rat::zero();
            }
        }
        let m0 = rat_floor_i64(d0).expect("distance in range");
        debug_assert!(m0 >= 0);
        let m0u = m0 as u64;
        match d1 {
            Some(d1) => {
                let m1 = rat_floor_i64(d1).expect("distance in range");
                let m1u = m1 as u64;
                if m1 == m0 {
                    return (d1 - d0) * rat_pow(rho, m0u + 1);
                }
                let first = (Rat::from_integer((m0 + 1).into()) - d0) * rat_pow(rho, m0u + 1);
                // full unit cells m0+1 .. m1-1
                let middle = if m1u > m0u + 1 {
                    rat_pow(rho, m0u + 2) * (Rat::one() - rat_pow(rho, m1u - m0u - 1))
                        / (Rat::one() - rho)
                } else {
                    Rat::zero()
                };
                let last = (d1 - Rat::from_integer(m1.into())) * rat_pow(rho, m1u + 1);
                first + middle + last
            }
            None => {
                let first = (Rat::from_integer((m0 + 1).into()) - d0) * rat_pow(rho, m0u + 1);
                first + rat_pow(rho, m0u + 2) / (Rat::one() - rho)
            }
        }
    }

    /// Per-axis decomposition of an interval into `(cell index, mass)` pieces:
    /// window cells carry their overlap length, tail portions carry their
    /// exact geometric mass attributed to the boundary cell they extend.
    fn axis_masses(&self, axis: usize, iv: &AxisInterval) -> Vec<(usize, Rat)> {
        let b = &self.bounds[axis];
        let (wlo, whi) = (&b[0], b.last().unwrap());
        let mut out = Vec::new();
        // below-window part, extends the first cell
        if iv.lo < *wlo {
            let hi_cap = match &iv.hi {
                Some(h) => {
                    if h < wlo {
                        h.clone()
                    } else {
                        wlo.clone()
                    }
                }
                None => wlo.clone(),
            };
            // distances measured leftwards from the lower window edge
            let d0 = wlo - &hi_cap;
            let d1 = wlo - &iv.lo;
            let mass = Self::tail_mass(&d0, Some(&d1), &self.tails[axis].0);
            if !mass.is_zero() {
                out.push((0, mass));
            }
        }
        // window cells
        for j in 0..b.len() - 1 {
            let lo = if iv.lo > b[j] { iv.lo.clone() } else { b[j].clone() };
            let hi = match &iv.hi {
                Some(h) => {
                    if h < &b[j + 1] {
                        h.clone()
                    } else {
                        b[j + 1].clone()
                    }
                }
                None => b[j + 1].clone(),
            };
            if hi > lo {
                out.push((j, &hi - &lo));
            }
        }
        // above-window part, extends the last cell
        let beyond_lo = if iv.lo > *whi { &iv.lo } else { whi };
        let d0 = beyond_lo - whi;
        let mass = match &iv.hi {
            Some(h) => {
                if h <= beyond_lo {
                    Rat::zero()
                } else {
                    Self::tail_mass(&d0, Some(&(h - whi)), &self.tails[axis].1)
                }
            }
            None => Self::tail_mass(&d0, None, &self.tails[axis].1),
        };
        if !mass.is_zero() {
            out.push((b.len() - 2, mass));
        }
        out
    }

    /// Exact integral of the density over a cube (which may be unbounded
    /// above; empty cubes integrate to zero).
    pub fn integral(&self, c: &Cube) -> Rat {
        debug_assert_eq!(c.n(), self.n());
        let per_axis: Vec<Vec<(usize, Rat)>> = (0..self.n())
            .map(|i| self.axis_masses(i, &c.intervals[i]))
            .collect();
        let mut total = Rat::zero();
        let mut cell = vec![0usize; self.n()];
        let mut mass = vec![Rat::one(); self.n() + 1];
        self.sum_cells(&per_axis, 0, &mut cell, &mut mass, &mut total);
        total
    }

    fn sum_cells(
        &self,
        per_axis: &[Vec<(usize, Rat)>],
        axis: usize,
        cell: &mut Vec<usize>,
        mass: &mut Vec<Rat>,
        total: &mut Rat,
    ) {
        if axis == per_axis.len() {
            *total += &mass[axis] * self.cell_value(cell);
            return;
        }
        for (j, m) in &per_axis[axis] {
            cell[axis] = *j;
            mass[axis + 1] = &mass[axis] * m;
            self.sum_cells(per_axis, axis + 1, cell, mass, total);
        }
    }

    /// Infimum of the density over a box `[lo, hi]` or `[lo, hi)` per axis
    /// (`open_above[i]` excludes the upper face on axis `i`). Exact because
    /// the density is a step function.
    pub fn min_on_box(&self, lo: &[Rat], hi: &[Rat], open_above: &[bool]) -> Rat {
        debug_assert_eq!(lo.len(), self.n());
        // per axis: candidate (cell index, minimal tail factor) pairs
        let mut per_axis: Vec<Vec<(usize, Rat)>> = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let b = &self.bounds[i];
            let (wlo, whi) = (&b[0], b.last().unwrap());
            let mut cands = Vec::new();
            if lo[i] < *wlo {
                // deepest point of the below-window portion is at lo[i]
                let m = -rat_floor_i64(&(&lo[i] - wlo)).expect("coordinate in range");
                cands.push((0, rat_pow(&self.tails[i].0, m as u64)));
            }
            for j in 0..b.len() - 1 {
                let touches = if open_above[i] {
                    hi[i] > b[j]
                } else {
                    hi[i] >= b[j]
                };
                if touches && lo[i] < b[j + 1] {
                    cands.push((j, Rat::one()));
                }
            }
            let d = &hi[i] - whi;
            if open_above[i] {
                if hi[i] > *whi {
                    // deepest unit cell touched by [.., hi) is ceil(d) - 1
                    let m = -rat_floor_i64(&(-&d)).expect("coordinate in range");
                    cands.push((b.len() - 2, rat_pow(&self.tails[i].1, m as u64)));
                }
            } else if hi[i] >= *whi {
                let m = rat_floor_i64(&d).expect("coordinate in range");
                cands.push((b.len() - 2, rat_pow(&self.tails[i].1, m as u64 + 1)));
            }
            per_axis.push(cands);
        }
        let mut best: Option<Rat> = None;
        let mut cell = vec![0usize; self.n()];
        let mut factor = vec![Rat::one(); self.n() + 1];
        self.min_cells(&per_axis, 0, &mut cell, &mut factor, &mut best);
        best.expect("boxes overlap at least one cell")
    }

    fn min_cells(
        &self,
        per_axis: &[Vec<(usize, Rat)>],
        axis: usize,
        cell: &mut Vec<usize>,
        factor: &mut Vec<Rat>,
        best: &mut Option<Rat>,
    ) {
        if axis == per_axis.len() {
            let v = &factor[axis] * self.cell_value(cell);
            if best.as_ref().map_or(true, |b| v < *b) {
                *best = Some(v);
            }
            return;
        }
        for (j, f) in &per_axis[axis] {
            cell[axis] = *j;
            factor[axis + 1] = &factor[axis] * f;
            self.min_cells(per_axis, axis + 1, cell, factor, best);
        }
    }

    /// The same density with the window translated by `delta`.
    pub fn translate(&self, delta: &[Rat]) -> BetaSpec {
        BetaSpec {
            bounds: self
                .bounds
                .iter()
                .enumerate()
                .map(|(i, b)| b.iter().map(|c| c + &delta[i]).collect())
                .collect(),
            values: self.values.clone(),
            tails: self.tails.clone(),
        }
    }
}

/// One axis of an imaginary-part carrier: a single rational point or a
/// half-open interval (`None` upper bound marks the unbounded pathology,
/// which validation rejects).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CarrierAxis {
    Point(Rat),
    Interval(Rat, Option<Rat>),
}

/// A weighted carrier of the imaginary part: a face of a cube (per-axis point
/// or interval) together with a rational coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaTerm {
    pub carrier: Vec<CarrierAxis>,
    pub coeff: Rat,
}

impl AlphaTerm {
    /// A pure point mass.
    pub fn point(q: &[Rat], coeff: Rat) -> AlphaTerm {
        AlphaTerm {
            carrier: q.iter().map(|c| CarrierAxis::Point(c.clone())).collect(),
            coeff,
        }
    }

    fn is_full_dimensional(&self) -> bool {
        self.carrier
            .iter()
            .all(|a| matches!(a, CarrierAxis::Interval(_, _)))
    }

    fn is_bounded(&self) -> bool {
        self.carrier
            .iter()
            .all(|a| !matches!(a, CarrierAxis::Interval(_, None)))
    }
}

/// The imaginary part: either a nonnegative combination of point evaluations
/// or a list of signed step/face terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaSpec {
    /// Point evaluations `(q, coeff)` with nonnegative coefficients.
    Eval(Vec<(Vec<Rat>, Rat)>),
    /// Step densities and face masses.
    Step(Vec<AlphaTerm>),
}

/// Whether signed step densities are acceptable: the filtration engine
/// requires a nonnegative imaginary part; the brute-force oracle also accepts
/// signed coefficients on full-dimensional carriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignPolicy {
    Engine,
    OracleSigned,
}

/// A validated stability condition: imaginary part, real part, sign policy,
/// and the base grid spanned by all carrier breakpoints and window cell
/// boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityCondition {
    n: usize,
    alpha: AlphaSpec,
    beta: BetaSpec,
    policy: SignPolicy,
    base_grid: GridPoset,
}

impl StabilityCondition {
    pub fn new(n: usize, alpha: AlphaSpec, beta: BetaSpec, policy: SignPolicy) -> Result<Self> {
        if beta.n() != n {
            return Err(Error::ShapeMismatch {
                op: "StabilityCondition::new",
                detail: format!("denominator has {} axes, expected {n}", beta.n()),
            });
        }
        match &alpha {
            AlphaSpec::Eval(points) => {
                for (t, (q, coeff)) in points.iter().enumerate() {
                    if q.len() != n {
                        return Err(Error::ShapeMismatch {
                            op: "StabilityCondition::new",
                            detail: format!("evaluation point {t} has {} coordinates", q.len()),
                        });
                    }
                    if coeff.is_negative() {
                        return Err(Diagnostic::NegativePointMass { term: t }.into());
                    }
                }
            }
            AlphaSpec::Step(terms) => {
                for (t, term) in terms.iter().enumerate() {
                    if term.carrier.len() != n {
                        return Err(Error::ShapeMismatch {
                            op: "StabilityCondition::new",
                            detail: format!("carrier {t} has {} axes", term.carrier.len()),
                        });
                    }
                    for a in &term.carrier {
                        if let CarrierAxis::Interval(lo, Some(hi)) = a {
                            if lo >= hi {
                                return Err(Error::InvalidArgument {
                                    op: "StabilityCondition::new",
                                    detail: format!("carrier {t} has an empty interval axis"),
                                });
                            }
                        }
                    }
                    if !term.is_bounded() {
                        return Err(Diagnostic::UnboundedAlphaCarrier { term: t }.into());
                    }
                    if term.coeff.is_negative() {
                        if !term.is_full_dimensional() {
                            return Err(Diagnostic::NegativePointMass { term: t }.into());
                        }
                        if policy == SignPolicy::Engine {
                            return Err(Diagnostic::NegativeAlphaCoefficient { term: t }.into());
                        }
                    }
                }
            }
        }
        let mut axes: Vec<Vec<Rat>> = beta.bounds.to_vec();
        match &alpha {
            AlphaSpec::Eval(points) => {
                for (q, _) in points {
                    for (i, c) in q.iter().enumerate() {
                        axes[i].push(c.clone());
                    }
                }
            }
            AlphaSpec::Step(terms) => {
                for term in terms {
                    for (i, a) in term.carrier.iter().enumerate() {
                        match a {
                            CarrierAxis::Point(v) => axes[i].push(v.clone()),
                            CarrierAxis::Interval(lo, hi) => {
                                axes[i].push(lo.clone());
                                if let Some(hi) = hi {
                                    axes[i].push(hi.clone());
                                }
                            }
                        }
                    }
                }
            }
        }
        for a in axes.iter_mut() {
            a.sort();
            a.dedup();
        }
        let base_grid = GridPoset::new(axes)?;
        Ok(StabilityCondition {
            n,
            alpha,
            beta,
            policy,
            base_grid,
        })
    }

    /// The skyscraper condition at a point: imaginary part evaluating there
    /// with weight one.
    pub fn skyscraper(q: &[Rat], beta: BetaSpec) -> Result<Self> {
        StabilityCondition::new(
            q.len(),
            AlphaSpec::Eval(vec![(q.to_vec(), Rat::one())]),
            beta,
            SignPolicy::Engine,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn alpha(&self) -> &AlphaSpec {
        &self.alpha
    }
    pub fn beta(&self) -> &BetaSpec {
        &self.beta
    }
    pub fn policy(&self) -> SignPolicy {
        self.policy
    }

    /// The grid spanned by all carrier breakpoints and window cell
    /// boundaries.
    pub fn base_grid(&self) -> &GridPoset {
        &self.base_grid
    }

    /// All terms in carrier form (evaluation points become point masses).
    fn terms(&self) -> Vec<AlphaTerm> {
        match &self.alpha {
            AlphaSpec::Eval(points) => points
                .iter()
                .map(|(q, c)| AlphaTerm::point(q, c.clone()))
                .collect(),
            AlphaSpec::Step(terms) => terms.clone(),
        }
    }

    /// The same condition translated by `delta` (all carriers and the window
    /// move together).
    pub fn translate(&self, delta: &[Rat]) -> StabilityCondition {
        let alpha = match &self.alpha {
            AlphaSpec::Eval(points) => AlphaSpec::Eval(
                points
                    .iter()
                    .map(|(q, c)| {
                        (
                            q.iter().zip(delta).map(|(a, d)| a + d).collect(),
                            c.clone(),
                        )
                    })
                    .collect(),
            ),
            AlphaSpec::Step(terms) => AlphaSpec::Step(
                terms
                    .iter()
                    .map(|t| AlphaTerm {
                        carrier: t
                            .carrier
                            .iter()
                            .enumerate()
                            .map(|(i, a)| match a {
                                CarrierAxis::Point(v) => CarrierAxis::Point(v + &delta[i]),
                                CarrierAxis::Interval(lo, hi) => CarrierAxis::Interval(
                                    lo + &delta[i],
                                    hi.as_ref().map(|h| h + &delta[i]),
                                ),
                            })
                            .collect(),
                        coeff: t.coeff.clone(),
                    })
                    .collect(),
            ),
        };
        StabilityCondition::new(self.n, alpha, self.beta.translate(delta), self.policy)
            .expect("translation preserves validity")
    }

    /// Face-dimensional integral of a piecewise-constant dimension function
    /// (given on a grid, zero below it) over a carrier, together with the
    /// face volume.
    fn carrier_integral(
        &self,
        carrier: &[CarrierAxis],
        grid: &GridPoset,
        dims: &[usize],
    ) -> (Rat, Rat) {
        // per-axis segments: (mass, grid axis index or None when below grid)
        let mut per_axis: Vec<Vec<(Rat, Option<usize>)>> = Vec::with_capacity(self.n);
        let mut volume = Rat::one();
        for (i, a) in carrier.iter().enumerate() {
            let axis = grid.axis(i);
            let mut segs = Vec::new();
            match a {
                CarrierAxis::Point(v) => {
                    if v < &axis[0] {
                        segs.push((Rat::one(), None));
                    } else {
                        let pos = axis.partition_point(|c| c <= v) - 1;
                        segs.push((Rat::one(), Some(pos)));
                    }
                }
                CarrierAxis::Interval(lo, hi) => {
                    let hi = hi.as_ref().expect("carriers are bounded after validation");
                    volume *= hi - lo;
                    // portion below the grid
                    if *lo < axis[0] {
                        let cap = if hi < &axis[0] { hi } else { &axis[0] };
                        segs.push((cap - lo, None));
                    }
                    // portions over grid cells [axis[j], axis[j+1]) and the
                    // top cell [axis[last], infinity)
                    for j in 0..axis.len() {
                        let cell_lo = if *lo > axis[j] { lo } else { &axis[j] };
                        let cell_hi: &Rat = if j + 1 < axis.len() {
                            if hi < &axis[j + 1] {
                                hi
                            } else {
                                &axis[j + 1]
                            }
                        } else {
                            hi
                        };
                        if cell_hi > cell_lo {
                            segs.push((cell_hi - cell_lo, Some(j)));
                        }
                    }
                }
            }
            per_axis.push(segs);
        }
        let mut total = Rat::zero();
        let mut idx = vec![None; self.n];
        fn rec(
            per_axis: &[Vec<(Rat, Option<usize>)>],
            grid: &GridPoset,
            dims: &[usize],
            axis: usize,
            mass: Rat,
            idx: &mut Vec<Option<usize>>,
            total: &mut Rat,
        ) {
            if axis == per_axis.len() {
                if idx.iter().all(|p| p.is_some()) {
                    let multi: Vec<usize> = idx.iter().map(|p| p.unwrap()).collect();
                    let d = dims[grid.flat(&multi)];
                    if d > 0 {
                        *total += mass * Rat::from_integer(d.into());
                    }
                }
                return;
            }
            for (m, p) in &per_axis[axis] {
                idx[axis] = *p;
                rec(per_axis, grid, dims, axis + 1, &mass * m, idx, total);
            }
        }
        rec(&per_axis, grid, dims, 0, Rat::one(), &mut idx, &mut total);
        (total, volume)
    }

    /// The imaginary part applied to a dimension function given on a grid
    /// (zero below the grid): the weighted sum of normalised face averages.
    pub fn alpha_apply(&self, grid: &GridPoset, dims: &[usize]) -> Rat {
        let mut total = Rat::zero();
        for term in self.terms() {
            if term.coeff.is_zero() {
                continue;
            }
            let (integral, volume) = self.carrier_integral(&term.carrier, grid, dims);
            total += &term.coeff * integral / volume;
        }
        total
    }

    /// The real part applied to a dimension function given on a grid: the
    /// exact integral of the density times the function.
    pub fn beta_apply(&self, grid: &GridPoset, dims: &[usize]) -> Rat {
        let mut total = Rat::zero();
        for flat in 0..grid.len() {
            if dims[flat] == 0 {
                continue;
            }
            let cube = grid.fiber(&grid.unflat(flat));
            total += self.beta.integral(&cube) * Rat::from_integer(dims[flat].into());
        }
        total
    }

    /// Measure of the imaginary part on a single half-open fiber cube.
    fn alpha_of_cube(&self, cube: &Cube) -> Rat {
        let mut total = Rat::zero();
        for term in self.terms() {
            if term.coeff.is_zero() {
                continue;
            }
            let mut frac = Rat::one();
            for (i, a) in term.carrier.iter().enumerate() {
                let iv = &cube.intervals[i];
                match a {
                    CarrierAxis::Point(v) => {
                        if !iv.contains(v) {
                            frac = Rat::zero();
                            break;
                        }
                    }
                    CarrierAxis::Interval(lo, hi) => {
                        let hi = hi.as_ref().expect("carriers are bounded after validation");
                        let cap_lo = if *lo > iv.lo { lo } else { &iv.lo };
                        let cap_hi: &Rat = match &iv.hi {
                            Some(h) => {
                                if hi < h {
                                    hi
                                } else {
                                    h
                                }
                            }
                            None => hi,
                        };
                        if cap_hi <= cap_lo {
                            frac = Rat::zero();
                            break;
                        }
                        frac *= (cap_hi - cap_lo) / (hi - lo);
                    }
                }
            }
            total += &term.coeff * frac;
        }
        total
    }

    /// The grid obtained from `extra` by adjoining the base grid, plus the
    /// unit tail breakpoints needed to span `extra`'s range outside the
    /// window; the result always satisfies the pullback precondition.
    pub fn adapted_grid(&self, extra: &GridPoset) -> Result<GridPoset> {
        if extra.n() != self.n {
            return Err(Error::ShapeMismatch {
                op: "StabilityCondition::adapted_grid",
                detail: format!("grid has dimension {}, condition has {}", extra.n(), self.n),
            });
        }
        let mut coords: Vec<Vec<Rat>> = (0..self.n)
            .map(|i| self.base_grid.axis(i).to_vec())
            .collect();
        for i in 0..self.n {
            let b = &self.beta.bounds[i];
            let (wlo, whi) = (b[0].clone(), b.last().unwrap().clone());
            // span of the union of the given grid and the base grid: tail
            // breakpoints strictly inside it must all be present
            let base = self.base_grid.axis(i);
            let gmin = extra.axis(i)[0].clone().min(base[0].clone());
            let gmax = extra
                .axis(i)
                .last()
                .unwrap()
                .clone()
                .max(base.last().unwrap().clone());
            let mut t = &whi + Rat::one();
            while t < gmax {
                coords[i].push(t.clone());
                t += Rat::one();
            }
            let mut t = &wlo - Rat::one();
            while t > gmin {
                coords[i].push(t.clone());
                t -= Rat::one();
            }
        }
        extra.extend_with_coords(&coords)
    }

    /// Checks the pullback precondition for a grid: on each axis, every
    /// carrier breakpoint must be on the grid unless it lies at or below the
    /// grid minimum, never beyond the maximum; window cell boundaries and
    /// unit tail breakpoints strictly inside the grid's range must be on the
    /// grid.
    fn check_pullback_grid(&self, g: &GridPoset) -> Result<()> {
        for i in 0..self.n {
            let axis = g.axis(i);
            let (gmin, gmax) = (&axis[0], axis.last().unwrap());
            let mut missing: Vec<Rat> = Vec::new();
            // carrier breakpoints
            for term in self.terms() {
                match &term.carrier[i] {
                    CarrierAxis::Point(v) => {
                        if v > gmax || (v > gmin && axis.binary_search(v).is_err()) {
                            missing.push(v.clone());
                        }
                    }
                    CarrierAxis::Interval(lo, hi) => {
                        let hi = hi.as_ref().expect("carriers are bounded after validation");
                        if hi > gmax {
                            missing.push(hi.clone());
                        }
                        for c in [lo, hi] {
                            if c > gmin && c < gmax && axis.binary_search(c).is_err() {
                                missing.push(c.clone());
                            }
                        }
                    }
                }
            }
            // window cell boundaries strictly inside the grid range
            for c in &self.beta.bounds[i] {
                if c > gmin && c < gmax && axis.binary_search(c).is_err() {
                    missing.push(c.clone());
                }
            }
            // unit tail breakpoints strictly inside the grid range
            let b = &self.beta.bounds[i];
            let (wlo, whi) = (&b[0], b.last().unwrap());
            let mut t = whi + Rat::one();
            while t < *gmax {
                if t > *gmin && axis.binary_search(&t).is_err() {
                    missing.push(t.clone());
                }
                t += Rat::one();
            }
            let mut t = wlo - Rat::one();
            while t > *gmin {
                if t < *gmax && axis.binary_search(&t).is_err() {
                    missing.push(t.clone());
                }
                t -= Rat::one();
            }
            if !missing.is_empty() {
                missing.sort();
                missing.dedup();
                return Err(Error::RefinementNeeded {
                    axis: i,
                    missing: missing.iter().map(crate::scalar::format_rat).collect(),
                });
            }
        }
        Ok(())
    }
}

/// The pullback of a stability condition to a grid: per-vertex imaginary
/// masses and real integrals over the fiber cubes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteStability {
    grid: GridPoset,
    alpha: Vec<Rat>,
    beta: Vec<Rat>,
}

impl DiscreteStability {
    /// Wraps per-vertex data, checking the real part is strictly positive.
    pub fn new(grid: GridPoset, alpha: Vec<Rat>, beta: Vec<Rat>) -> Result<Self> {
        if alpha.len() != grid.len() || beta.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                op: "DiscreteStability::new",
                detail: format!(
                    "{} imaginary and {} real entries for {} vertices",
                    alpha.len(),
                    beta.len(),
                    grid.len()
                ),
            });
        }
        if let Some(flat) = beta.iter().position(|b| !b.is_positive()) {
            return Err(Diagnostic::NonpositiveBetaValue {
                cell: format!("{:?}", grid.unflat(flat)),
            }
            .into());
        }
        Ok(DiscreteStability { grid, alpha, beta })
    }

    pub fn grid(&self) -> &GridPoset {
        &self.grid
    }
    pub fn alpha(&self) -> &[Rat] {
        &self.alpha
    }
    pub fn beta(&self) -> &[Rat] {
        &self.beta
    }

    /// Vertices carrying nonzero imaginary mass.
    pub fn supp_alpha(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&f| !self.alpha[f].is_zero())
            .collect()
    }

    pub fn is_alpha_nonnegative(&self) -> bool {
        self.alpha.iter().all(|a| !a.is_negative())
    }

    pub fn alpha_total(&self, dims: &[usize]) -> Rat {
        debug_assert_eq!(dims.len(), self.grid.len());
        let mut t = Rat::zero();
        for (a, &d) in self.alpha.iter().zip(dims) {
            if d > 0 {
                t += a * Rat::from_integer(d.into());
            }
        }
        t
    }

    pub fn beta_total(&self, dims: &[usize]) -> Rat {
        debug_assert_eq!(dims.len(), self.grid.len());
        let mut t = Rat::zero();
        for (b, &d) in self.beta.iter().zip(dims) {
            if d > 0 {
                t += b * Rat::from_integer(d.into());
            }
        }
        t
    }

    /// The slope of a nonzero dimension vector.
    pub fn slope(&self, dims: &[usize]) -> Result<Rat> {
        if dims.iter().all(|&d| d == 0) {
            return Err(Error::ZeroSlope);
        }
        Ok(self.alpha_total(dims) / self.beta_total(dims))
    }
}

/// Pulls a stability condition back to a grid satisfying the refinement
/// precondition: per-vertex imaginary mass of the fiber cube (zero on
/// unbounded cubes by construction) and exact real integral over it.
pub fn pullback_z(z: &StabilityCondition, g: &GridPoset) -> Result<DiscreteStability> {
    if g.n() != z.n() {
        return Err(Error::ShapeMismatch {
            op: "pullback_z",
            detail: format!("grid has dimension {}, condition has {}", g.n(), z.n()),
        });
    }
    z.check_pullback_grid(g)?;
    let mut alpha = Vec::with_capacity(g.len());
    let mut beta = Vec::with_capacity(g.len());
    for flat in 0..g.len() {
        let cube = g.fiber(&g.unflat(flat));
        alpha.push(z.alpha_of_cube(&cube));
        beta.push(z.beta.integral(&cube));
    }
    DiscreteStability::new(g.clone(), alpha, beta)
}

/// The shift of a stability condition by `x`: all carriers and the window
/// translated by `-x`, so that the shifted condition paired with the shifted
/// module reproduces the original slopes.
pub fn shift_z(z: &StabilityCondition, x: &[Rat]) -> StabilityCondition {
    let neg: Vec<Rat> = x.iter().map(|c| -c).collect();
    z.translate(&neg)
}

/// A lower bound for every achievable slope under the condition: the minimum
/// (capped at zero) of the per-cube imaginary masses divided by the minimum
/// per-cube real mass, over the bounded cubes of the condition's own adapted
/// base grid. Below this threshold the filtration step always absorbs the
/// whole module.
pub fn theta_min(z: &StabilityCondition) -> Rat {
    let g = z
        .adapted_grid(z.base_grid())
        .expect("base grid matches the condition dimension");
    let ds = pullback_z(z, &g).expect("adapted grids satisfy the pullback precondition");
    let mut a_min = Rat::zero();
    let mut b_min: Option<Rat> = None;
    for flat in 0..g.len() {
        let idx = g.unflat(flat);
        let bounded = idx
            .iter()
            .zip(g.shape())
            .all(|(&i, len)| i + 1 < len);
        if !bounded {
            continue;
        }
        if ds.alpha()[flat] < a_min {
            a_min = ds.alpha()[flat].clone();
        }
        let b = &ds.beta()[flat];
        if b_min.as_ref().map_or(true, |m| b < m) {
            b_min = Some(b.clone());
        }
    }
    a_min / b_min.expect("window bounds guarantee at least one bounded cube")
}
