//! Finite rational grids in `Q^n`: the index posets over which modules live,
//! together with floors, half-open fiber cubes, translation, and common
//! refinement.
//!
//! A grid is a product of strictly increasing coordinate lists, one per axis.
//! Multi-indices are ordered componentwise; flat indices enumerate points
//! lexicographically (last axis fastest).

use crate::scalar::{format_rat, Rat};
use crate::{Error, Result};
use num_traits::Zero;

/// Multi-index of a grid point, one entry per axis.
pub type MultiIdx = Vec<usize>;

/// A finite product grid in `Q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoset {
    axes: Vec<Vec<Rat>>,
}

impl GridPoset {
    /// Builds a grid from per-axis coordinate lists, which must be nonempty
    /// and strictly increasing.
    pub fn new(axes: Vec<Vec<Rat>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument {
                op: "GridPoset::new",
                detail: "a grid needs at least one axis".into(),
            });
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::InvalidArgument {
                    op: "GridPoset::new",
                    detail: format!("axis {i} has no coordinates"),
                });
            }
            for w in axis.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidArgument {
                        op: "GridPoset::new",
                        detail: format!(
                            "axis {i} is not strictly increasing at {} >= {}",
                            format_rat(&w[0]),
                            format_rat(&w[1])
                        ),
                    });
                }
            }
        }
        Ok(GridPoset { axes })
    }

    /// Uniform grid over the closed box `[lo, hi]` with `steps[i]` equal
    /// intervals (hence `steps[i] + 1` coordinates) per axis.
    pub fn uniform(lo: &[Rat], hi: &[Rat], steps: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != steps.len() {
            return Err(Error::ShapeMismatch {
                op: "GridPoset::uniform",
                detail: format!(
                    "lo/hi/steps have lengths {}/{}/{}",
                    lo.len(),
                    hi.len(),
                    steps.len()
                ),
            });
        }
        let mut axes = Vec::with_capacity(lo.len());
        for i in 0..lo.len() {
            if steps[i] == 0 || lo[i] >= hi[i] {
                return Err(Error::InvalidArgument {
                    op: "GridPoset::uniform",
                    detail: format!("axis {i}: need lo < hi and at least one step"),
                });
            }
            let width = (&hi[i] - &lo[i]) / Rat::from_integer(steps[i].into());
            axes.push(
                (0..=steps[i])
                    .map(|j| &lo[i] + &width * Rat::from_integer(j.into()))
                    .collect(),
            );
        }
        GridPoset::new(axes)
    }

    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &[Rat] {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        false // axes are validated nonempty
    }

    /// Flat index of a multi-index (lexicographic, last axis fastest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.n());
        let mut acc = 0;
        for (i, &x) in idx.iter().enumerate() {
            debug_assert!(x < self.axes[i].len());
            acc = acc * self.axes[i].len() + x;
        }
        acc
    }

    pub fn unflat(&self, mut flat: usize) -> MultiIdx {
        let mut idx = vec![0; self.n()];
        for i in (0..self.n()).rev() {
            let s = self.axes[i].len();
            idx[i] = flat % s;
            flat /= s;
        }
        idx
    }

    /// Coordinates of a grid point.
    pub fn coords(&self, idx: &[usize]) -> Vec<Rat> {
        idx.iter()
            .enumerate()
            .map(|(i, &x)| self.axes[i][x].clone())
            .collect()
    }

    /// All multi-indices in flat (lexicographic) order.
    pub fn all_indices(&self) -> Vec<MultiIdx> {
        (0..self.len()).map(|f| self.unflat(f)).collect()
    }

    /// Componentwise partial order on multi-indices.
    pub fn leq(a: &[usize], b: &[usize]) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }

    pub fn join(a: &[usize], b: &[usize]) -> MultiIdx {
        a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
    }

    pub fn meet(a: &[usize], b: &[usize]) -> MultiIdx {
        a.iter().zip(b).map(|(x, y)| *x.min(y)).collect()
    }

    /// Multi-indices directly below `idx` (one step down along one axis).
    pub fn lower_covers(&self, idx: &[usize]) -> Vec<MultiIdx> {
        (0..self.n())
            .filter(|&i| idx[i] > 0)
            .map(|i| {
                let mut j = idx.to_vec();
                j[i] -= 1;
                j
            })
            .collect()
    }

    /// Multi-indices directly above `idx` (one step up along one axis).
    pub fn upper_covers(&self, idx: &[usize]) -> Vec<MultiIdx> {
        (0..self.n())
            .filter(|&i| idx[i] + 1 < self.axes[i].len())
            .map(|i| {
                let mut j = idx.to_vec();
                j[i] += 1;
                j
            })
            .collect()
    }

    /// All grid edges as `(index, axis)` pairs with `index[axis] + 1` valid.
    pub fn edges(&self) -> Vec<(MultiIdx, usize)> {
        let mut out = Vec::new();
        for idx in self.all_indices() {
            for i in 0..self.n() {
                if idx[i] + 1 < self.axes[i].len() {
                    out.push((idx.clone(), i));
                }
            }
        }
        out
    }

    /// Largest grid point `<= q` componentwise, or `None` when `q` lies below
    /// the grid on some axis (the "minus infinity" region).
    pub fn floor(&self, q: &[Rat]) -> Option<MultiIdx> {
        debug_assert_eq!(q.len(), self.n());
        let mut idx = Vec::with_capacity(self.n());
        for (axis, qi) in self.axes.iter().zip(q) {
            if *qi < axis[0] {
                return None;
            }
            // last position with coordinate <= qi
            let pos = axis.partition_point(|c| c <= qi);
            idx.push(pos - 1);
        }
        Some(idx)
    }

    /// Multi-index of a point whose coordinates lie exactly on the grid.
    pub fn index_of_coords(&self, q: &[Rat]) -> Option<MultiIdx> {
        debug_assert_eq!(q.len(), self.n());
        let mut idx = Vec::with_capacity(self.n());
        for (axis, qi) in self.axes.iter().zip(q) {
            idx.push(axis.iter().position(|c| c == qi)?);
        }
        Some(idx)
    }

    pub fn min_corner(&self) -> Vec<Rat> {
        self.axes.iter().map(|a| a[0].clone()).collect()
    }

    pub fn max_corner(&self) -> Vec<Rat> {
        self.axes.iter().map(|a| a.last().unwrap().clone()).collect()
    }

    /// The half-open fiber cube of a grid point: on each axis
    /// `[coord, next coord)`, unbounded above on the last coordinate.
    pub fn fiber(&self, idx: &[usize]) -> Cube {
        let intervals = idx
            .iter()
            .enumerate()
            .map(|(i, &x)| AxisInterval {
                lo: self.axes[i][x].clone(),
                hi: self.axes[i].get(x + 1).cloned(),
            })
            .collect();
        Cube { intervals }
    }

    /// The region of points below the grid minimum on at least one axis;
    /// floors are undefined (minus infinity) exactly there.
    pub fn minus_inf_region(&self) -> MinusInfRegion {
        MinusInfRegion {
            mins: self.min_corner(),
        }
    }

    /// Translates every coordinate by `delta` (componentwise).
    pub fn translate(&self, delta: &[Rat]) -> Self {
        debug_assert_eq!(delta.len(), self.n());
        GridPoset {
            axes: self
                .axes
                .iter()
                .enumerate()
                .map(|(i, a)| a.iter().map(|c| c + &delta[i]).collect())
                .collect(),
        }
    }

    /// Per-axis union with extra coordinates (idempotent for coordinates
    /// already present).
    pub fn extend_with_coords(&self, extra: &[Vec<Rat>]) -> Result<GridPoset> {
        if extra.len() != self.n() {
            return Err(Error::ShapeMismatch {
                op: "GridPoset::extend_with_coords",
                detail: format!("{} coordinate sets for {} axes", extra.len(), self.n()),
            });
        }
        let axes = self
            .axes
            .iter()
            .zip(extra)
            .map(|(a, e)| {
                let mut merged = a.clone();
                merged.extend(e.iter().cloned());
                merged.sort();
                merged.dedup();
                merged
            })
            .collect();
        Ok(GridPoset { axes })
    }
}

/// An order embedding of one grid into a refinement of it, given by per-axis
/// strictly increasing index maps that preserve coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    domain: GridPoset,
    codomain: GridPoset,
    tau: Vec<Vec<usize>>,
}

impl GridMap {
    /// Validates that `tau` is per-axis strictly increasing, in range, and
    /// coordinate-preserving (codomain coordinate at `tau[i][j]` equals the
    /// domain coordinate at `j`).
    pub fn new(domain: GridPoset, codomain: GridPoset, tau: Vec<Vec<usize>>) -> Result<Self> {
        if domain.n() != codomain.n() || tau.len() != domain.n() {
            return Err(Error::ShapeMismatch {
                op: "GridMap::new",
                detail: format!(
                    "domain/codomain/map have dimensions {}/{}/{}",
                    domain.n(),
                    codomain.n(),
                    tau.len()
                ),
            });
        }
        for i in 0..domain.n() {
            if tau[i].len() != domain.axis(i).len() {
                return Err(Error::ShapeMismatch {
                    op: "GridMap::new",
                    detail: format!("axis {i}: map has {} entries", tau[i].len()),
                });
            }
            for (j, &t) in tau[i].iter().enumerate() {
                if t >= codomain.axis(i).len()
                    || (j > 0 && tau[i][j - 1] >= t)
                    || codomain.axis(i)[t] != domain.axis(i)[j]
                {
                    return Err(Error::InvalidArgument {
                        op: "GridMap::new",
                        detail: format!(
                            "axis {i}: entry {j} is not a coordinate-preserving order embedding"
                        ),
                    });
                }
            }
        }
        Ok(GridMap {
            domain,
            codomain,
            tau,
        })
    }

    pub fn identity(g: &GridPoset) -> GridMap {
        GridMap {
            domain: g.clone(),
            codomain: g.clone(),
            tau: g.shape().iter().map(|&s| (0..s).collect()).collect(),
        }
    }

    /// The inclusion of `domain` into `codomain`, which must contain every
    /// domain coordinate on every axis.
    pub fn inclusion(domain: &GridPoset, codomain: &GridPoset) -> Result<GridMap> {
        if domain.n() != codomain.n() {
            return Err(Error::ShapeMismatch {
                op: "GridMap::inclusion",
                detail: format!("grids have dimensions {} and {}", domain.n(), codomain.n()),
            });
        }
        let mut tau = Vec::with_capacity(domain.n());
        for i in 0..domain.n() {
            let mut missing = Vec::new();
            let mut map = Vec::with_capacity(domain.axis(i).len());
            for c in domain.axis(i) {
                match codomain.axis(i).binary_search(c) {
                    Ok(pos) => map.push(pos),
                    Err(_) => missing.push(format_rat(c)),
                }
            }
            if !missing.is_empty() {
                return Err(Error::RefinementNeeded { axis: i, missing });
            }
            tau.push(map);
        }
        Ok(GridMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            tau,
        })
    }

    pub fn domain(&self) -> &GridPoset {
        &self.domain
    }
    pub fn codomain(&self) -> &GridPoset {
        &self.codomain
    }

    /// Per-axis index map.
    pub fn axis_map(&self, i: usize) -> &[usize] {
        &self.tau[i]
    }

    pub fn apply(&self, idx: &[usize]) -> MultiIdx {
        debug_assert_eq!(idx.len(), self.tau.len());
        idx.iter().enumerate().map(|(i, &x)| self.tau[i][x]).collect()
    }

    /// Floor of a codomain index in the domain: the largest domain index
    /// mapping below it, or `None` for the minus-infinity region.
    pub fn floor_index(&self, codomain_idx: &[usize]) -> Option<MultiIdx> {
        let mut out = Vec::with_capacity(self.tau.len());
        for (i, &q) in codomain_idx.iter().enumerate() {
            let pos = self.tau[i].partition_point(|&t| t <= q);
            if pos == 0 {
                return None;
            }
            out.push(pos - 1);
        }
        Some(out)
    }

    pub fn is_identity(&self) -> bool {
        self.domain == self.codomain
            && self
                .tau
                .iter()
                .all(|m| m.iter().enumerate().all(|(j, &t)| j == t))
    }
}

/// Common refinement of two grids of the same dimension: the per-axis sorted
/// union of coordinates, with the two inclusion maps into it.
pub fn common_refinement(a: &GridPoset, b: &GridPoset) -> Result<(GridPoset, GridMap, GridMap)> {
    if a.n() != b.n() {
        return Err(Error::ShapeMismatch {
            op: "common_refinement",
            detail: format!("grids have dimensions {} and {}", a.n(), b.n()),
        });
    }
    let refined = a.extend_with_coords(&b.axes)?;
    let ta = GridMap::inclusion(a, &refined)?;
    let tb = GridMap::inclusion(b, &refined)?;
    Ok((refined, ta, tb))
}

/// Common refinement of any number of grids of equal dimension.
pub fn common_refinement_many(grids: &[&GridPoset]) -> Result<GridPoset> {
    let mut it = grids.iter();
    let first = it.next().ok_or(Error::InvalidArgument {
        op: "common_refinement_many",
        detail: "no grids given".into(),
    })?;
    let mut acc = (*first).clone();
    for g in it {
        acc = common_refinement(&acc, g)?.0;
    }
    Ok(acc)
}

/// A half-open interval `[lo, hi)`, unbounded above when `hi` is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisInterval {
    pub lo: Rat,
    pub hi: Option<Rat>,
}

impl AxisInterval {
    pub fn contains(&self, q: &Rat) -> bool {
        *q >= self.lo && self.hi.as_ref().map_or(true, |h| q < h)
    }

    /// Length of the interval; `None` when unbounded.
    pub fn length(&self) -> Option<Rat> {
        self.hi.as_ref().map(|h| h - &self.lo)
    }
}

/// A product of half-open axis intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cube {
    pub intervals: Vec<AxisInterval>,
}

impl Cube {
    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, q: &[Rat]) -> bool {
        debug_assert_eq!(q.len(), self.n());
        self.intervals.iter().zip(q).all(|(iv, qi)| iv.contains(qi))
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(|iv| iv.hi.is_some())
    }

    /// Volume of the cube; `None` when unbounded on some axis.
    pub fn volume(&self) -> Option<Rat> {
        let mut v = Rat::from_integer(1.into());
        for iv in &self.intervals {
            v *= iv.length()?;
        }
        Some(v)
    }

    pub fn min_corner(&self) -> Vec<Rat> {
        self.intervals.iter().map(|iv| iv.lo.clone()).collect()
    }
}

/// The set `{q : q_i < m_i for some i}` of points strictly below a grid
/// minimum on at least one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinusInfRegion {
    mins: Vec<Rat>,
}

impl MinusInfRegion {
    pub fn contains(&self, q: &[Rat]) -> bool {
        debug_assert_eq!(q.len(), self.mins.len());
        self.mins.iter().zip(q).any(|(m, qi)| qi < m)
    }
}

/// Componentwise sum of two rational points.
pub fn point_add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Componentwise difference `a - b`.
pub fn point_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Componentwise negation.
pub fn point_neg(a: &[Rat]) -> Vec<Rat> {
    a.iter().map(|x| -x).collect()
}

/// Componentwise partial order on rational points.
pub fn point_leq(a: &[Rat], b: &[Rat]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// The all-zero point in `Q^n`.
pub fn origin(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn q(v: &[(i64, i64)]) -> Vec<Rat> {
        v.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    fn grid_2x3() -> GridPoset {
        GridPoset::new(vec![
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(0), rat(1, 2), rat_int(2)],
        ])
        .unwrap()
    }

    #[test]
    fn construction_validates_axes() {
        assert!(GridPoset::new(vec![vec![rat_int(0), rat_int(0)]]).is_err());
        assert!(GridPoset::new(vec![vec![rat_int(1), rat_int(0)]]).is_err());
        assert!(GridPoset::new(vec![vec![]]).is_err());
        assert!(GridPoset::new(vec![]).is_err());
        assert!(GridPoset::new(vec![vec![rat_int(3)]]).is_ok());
    }

    #[test]
    fn flat_indexing_is_lexicographic() {
        let g = grid_2x3();
        assert_eq!(g.len(), 6);
        let order: Vec<MultiIdx> = g.all_indices();
        assert_eq!(
            order,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        for (f, idx) in order.iter().enumerate() {
            assert_eq!(g.flat(idx), f);
            assert_eq!(g.unflat(f), *idx);
        }
    }

    #[test]
    fn floor_layers() {
        let g = grid_2x3();
        // below the minimum on one axis => minus infinity
        assert_eq!(g.floor(&q(&[(-1, 1), (0, 1)])), None);
        assert!(g.minus_inf_region().contains(&q(&[(-1, 1), (0, 1)])));
        // exactly a grid point
        assert_eq!(g.floor(&q(&[(1, 1), (1, 2)])), Some(vec![1, 1]));
        // strictly inside a cell
        assert_eq!(g.floor(&q(&[(1, 2), (3, 4)])), Some(vec![0, 1]));
        // above the maximum clamps to the last index
        assert_eq!(g.floor(&q(&[(10, 1), (10, 1)])), Some(vec![1, 2]));
        assert!(!g.minus_inf_region().contains(&q(&[(10, 1), (10, 1)])));
    }

    #[test]
    fn fibers_partition_the_upper_region() {
        let g = grid_2x3();
        // interior cube is a half-open box
        let c = g.fiber(&[0, 1]);
        assert!(c.contains(&q(&[(0, 1), (1, 2)])));
        assert!(c.contains(&q(&[(1, 2), (1, 1)])));
        assert!(!c.contains(&q(&[(1, 1), (1, 2)])));
        assert_eq!(c.volume(), Some(rat(3, 2)));
        // the last cube on an axis is unbounded
        let top = g.fiber(&[1, 2]);
        assert!(!top.is_bounded());
        assert_eq!(top.volume(), None);
        assert!(top.contains(&q(&[(100, 1), (100, 1)])));
        // floor and fiber agree on sample points
        for p in [q(&[(0, 1), (0, 1)]), q(&[(3, 4), (7, 5)]), q(&[(2, 1), (1, 3)])] {
            let idx = g.floor(&p).unwrap();
            assert!(g.fiber(&idx).contains(&p));
        }
    }

    #[test]
    fn uniform_grid_coordinates() {
        let g = GridPoset::uniform(&q(&[(0, 1)]), &q(&[(2, 1)]), &[4]).unwrap();
        assert_eq!(
            g.axis(0),
            &[rat_int(0), rat(1, 2), rat_int(1), rat(3, 2), rat_int(2)][..]
        );
        assert!(GridPoset::uniform(&q(&[(0, 1)]), &q(&[(0, 1)]), &[1]).is_err());
    }

    #[test]
    fn covers_and_lattice_ops() {
        let g = grid_2x3();
        assert_eq!(g.lower_covers(&[0, 0]), Vec::<MultiIdx>::new());
        assert_eq!(g.lower_covers(&[1, 1]), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(g.upper_covers(&[1, 2]), Vec::<MultiIdx>::new());
        assert_eq!(g.upper_covers(&[0, 1]), vec![vec![1, 1], vec![0, 2]]);
        assert!(GridPoset::leq(&[0, 1], &[1, 1]));
        assert!(!GridPoset::leq(&[1, 0], &[0, 2]));
        assert_eq!(GridPoset::join(&[1, 0], &[0, 2]), vec![1, 2]);
        assert_eq!(GridPoset::meet(&[1, 0], &[0, 2]), vec![0, 0]);
        assert_eq!(g.edges().len(), 1 * 3 + 2 * 2); // axis-0 edges + axis-1 edges
    }

    #[test]
    fn refinement_merges_axes() {
        let a = GridPoset::new(vec![vec![rat_int(0), rat_int(1)]]).unwrap();
        let b = GridPoset::new(vec![vec![rat(1, 2), rat_int(1)]]).unwrap();
        let (r, ta, tb) = common_refinement(&a, &b).unwrap();
        assert_eq!(r.axis(0), &[rat_int(0), rat(1, 2), rat_int(1)][..]);
        assert_eq!(ta.axis_map(0), &[0, 2]);
        assert_eq!(tb.axis_map(0), &[1, 2]);
        // coordinate-preserving triangle
        for (g, t) in [(&a, &ta), (&b, &tb)] {
            for idx in g.all_indices() {
                assert_eq!(g.coords(&idx), r.coords(&t.apply(&idx)));
            }
        }
        let r2 = common_refinement_many(&[&a, &b, &r]).unwrap();
        assert_eq!(r2, r);
        // refining a grid with itself is the identity
        let (same, t1, t2) = common_refinement(&a, &a).unwrap();
        assert_eq!(same, a);
        assert!(t1.is_identity() && t2.is_identity());
    }

    #[test]
    fn grid_maps_floor_and_validate() {
        let coarse = GridPoset::new(vec![vec![rat_int(0), rat_int(1)]]).unwrap();
        let fine = GridPoset::new(vec![vec![rat_int(0), rat(1, 2), rat_int(1)]]).unwrap();
        let t = GridMap::inclusion(&coarse, &fine).unwrap();
        assert_eq!(t.apply(&[1]), vec![2]);
        assert_eq!(t.floor_index(&[0]), Some(vec![0]));
        assert_eq!(t.floor_index(&[1]), Some(vec![0])); // 1/2 floors to 0
        assert_eq!(t.floor_index(&[2]), Some(vec![1]));
        // inclusion the wrong way round reports the missing coordinate
        let err = GridMap::inclusion(&fine, &coarse).unwrap_err();
        assert!(matches!(err, Error::RefinementNeeded { axis: 0, .. }));
        // non-coordinate-preserving maps are rejected
        assert!(GridMap::new(coarse.clone(), fine.clone(), vec![vec![0, 1]]).is_err());
        assert!(GridMap::new(coarse.clone(), fine.clone(), vec![vec![2, 2]]).is_err());
    }

    #[test]
    fn extension_is_idempotent() {
        let g = GridPoset::new(vec![vec![rat_int(0), rat_int(2)]]).unwrap();
        let e = g.extend_with_coords(&[vec![rat_int(1)]]).unwrap();
        assert_eq!(e.axis(0), &[rat_int(0), rat_int(1), rat_int(2)][..]);
        assert_eq!(e.extend_with_coords(&[vec![rat_int(1)]]).unwrap(), e);
        assert_eq!(g.extend_with_coords(&[vec![]]).unwrap(), g);
    }

    #[test]
    fn translation_shifts_coordinates() {
        let g = grid_2x3();
        let t = g.translate(&q(&[(-1, 1), (1, 2)]));
        assert_eq!(t.axis(0), &[rat_int(-1), rat_int(0)][..]);
        assert_eq!(t.axis(1), &[rat(1, 2), rat_int(1), rat(5, 2)][..]);
        assert_eq!(g.coords(&[1, 2]), q(&[(1, 1), (2, 1)]));
    }

    #[test]
    fn exact_coordinate_lookup() {
        let g = grid_2x3();
        assert_eq!(g.index_of_coords(&q(&[(1, 1), (1, 2)])), Some(vec![1, 1]));
        assert_eq!(g.index_of_coords(&q(&[(1, 1), (1, 3)])), None);
    }
}
