//! Finitely presentable persistence modules as finite grid representations:
//! presentations and their realisation over a field, spread modules,
//! submodules, quotients, module maps, direct sums, pushforward/pullback, and
//! the rank invariant.
//!
//! A [`GridModule`] assigns a finite-dimensional space to every vertex of a
//! [`GridPoset`] and a matrix to every covering edge, with all square faces
//! commuting; it stands for the module over `Q^n` obtained by extending
//! constantly along fiber cubes (zero below the grid).

use crate::grid::{common_refinement, point_leq, GridMap, GridPoset, MultiIdx};
use crate::linalg::{Matrix, Subspace};
use crate::scalar::{Field, Rat};
use crate::{Error, Result};
use num_traits::Zero;
use std::hash::{Hash, Hasher};

/// A rank invariant value: finite for comparable pairs, the infinity marker
/// otherwise. `Infinite` compares greater than every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RankValue {
    Finite(usize),
    Infinite,
}

impl RankValue {
    pub fn as_finite(self) -> Option<usize> {
        match self {
            RankValue::Finite(k) => Some(k),
            RankValue::Infinite => None,
        }
    }
}

impl std::fmt::Display for RankValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankValue::Finite(k) => write!(f, "{k}"),
            RankValue::Infinite => write!(f, "inf"),
        }
    }
}

/// A pointwise finite-dimensional representation of a finite grid, with one
/// matrix per covering edge and commuting square faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridModule<K: Field> {
    field: K,
    grid: GridPoset,
    dims: Vec<usize>,              // per flat vertex index
    edges: Vec<Option<Matrix<K>>>, // indexed by flat * n + axis
}

impl<K: Field> Hash for GridModule<K> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.grid.hash(state);
        self.dims.hash(state);
        self.edges.hash(state);
    }
}

impl<K: Field> GridModule<K> {
    /// Builds and validates a grid module: edge matrices must be present
    /// exactly on covering edges, have matching shapes, and every square face
    /// must commute.
    pub fn new(
        field: K,
        grid: GridPoset,
        dims: Vec<usize>,
        edges: Vec<Option<Matrix<K>>>,
    ) -> Result<Self> {
        let n = grid.n();
        if dims.len() != grid.len() || edges.len() != grid.len() * n {
            return Err(Error::ShapeMismatch {
                op: "GridModule::new",
                detail: format!(
                    "{} dims and {} edge slots for a grid with {} vertices",
                    dims.len(),
                    edges.len(),
                    grid.len()
                ),
            });
        }
        let m = GridModule {
            field,
            grid,
            dims,
            edges,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds a module by computing each covering-edge matrix from a closure.
    pub fn from_edge_fn(
        field: K,
        grid: GridPoset,
        dims: Vec<usize>,
        f: impl Fn(&[usize], usize) -> Matrix<K>,
    ) -> Result<Self> {
        let n = grid.n();
        let mut edges = vec![None; grid.len() * n];
        for flat in 0..grid.len() {
            let idx = grid.unflat(flat);
            for axis in 0..n {
                if idx[axis] + 1 < grid.axis(axis).len() {
                    edges[flat * n + axis] = Some(f(&idx, axis));
                }
            }
        }
        GridModule::new(field, grid, dims, edges)
    }

    fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        for flat in 0..self.grid.len() {
            let idx = self.grid.unflat(flat);
            for axis in 0..n {
                let interior = idx[axis] + 1 < self.grid.axis(axis).len();
                match (&self.edges[flat * n + axis], interior) {
                    (None, false) => {}
                    (None, true) => {
                        return Err(Error::ShapeMismatch {
                            op: "GridModule::new",
                            detail: format!("missing edge matrix at vertex {idx:?}, axis {axis}"),
                        })
                    }
                    (Some(_), false) => {
                        return Err(Error::ShapeMismatch {
                            op: "GridModule::new",
                            detail: format!("edge matrix beyond the grid at {idx:?}, axis {axis}"),
                        })
                    }
                    (Some(m), true) => {
                        let mut up = idx.clone();
                        up[axis] += 1;
                        let (ds, dt) = (self.dims[flat], self.dims[self.grid.flat(&up)]);
                        if m.cols() != ds || m.rows() != dt {
                            return Err(Error::ShapeMismatch {
                                op: "GridModule::new",
                                detail: format!(
                                    "edge at {idx:?} axis {axis} is {}x{}, expected {dt}x{ds}",
                                    m.rows(),
                                    m.cols()
                                ),
                            });
                        }
                    }
                }
            }
            // commutativity of every square face based at idx
            for i in 0..n {
                for j in (i + 1)..n {
                    if idx[i] + 1 >= self.grid.axis(i).len() || idx[j] + 1 >= self.grid.axis(j).len()
                    {
                        continue;
                    }
                    let mut up_i = idx.clone();
                    up_i[i] += 1;
                    let mut up_j = idx.clone();
                    up_j[j] += 1;
                    let via_i = self.edge(&up_i, j).mul(self.edge(&idx, i));
                    let via_j = self.edge(&up_j, i).mul(self.edge(&idx, j));
                    if via_i != via_j {
                        return Err(Error::InvariantViolation {
                            op: "GridModule::new",
                            detail: format!(
                                "square face at {idx:?} along axes {i},{j} does not commute"
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The zero module on a grid.
    pub fn zero(field: K, grid: GridPoset) -> Self {
        let dims = vec![0; grid.len()];
        GridModule::from_edge_fn(field.clone(), grid, dims, |_, _| {
            Matrix::zero(field.clone(), 0, 0)
        })
        .expect("zero module is valid")
    }

    pub fn field(&self) -> &K {
        &self.field
    }
    pub fn grid(&self) -> &GridPoset {
        &self.grid
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim_at(&self, idx: &[usize]) -> usize {
        self.dims[self.grid.flat(idx)]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// The matrix on the covering edge from `idx` one step up along `axis`.
    pub fn edge(&self, idx: &[usize], axis: usize) -> &Matrix<K> {
        self.edges[self.grid.flat(idx) * self.grid.n() + axis]
            .as_ref()
            .expect("edge exists on covering pairs only")
    }

    /// The composite matrix from vertex `a` to vertex `b >= a` (well defined
    /// by commutativity).
    pub fn map_between(&self, a: &[usize], b: &[usize]) -> Matrix<K> {
        assert!(GridPoset::leq(a, b), "map_between requires a <= b");
        let mut acc = Matrix::identity(self.field.clone(), self.dim_at(a));
        let mut cur = a.to_vec();
        for axis in 0..self.grid.n() {
            while cur[axis] < b[axis] {
                acc = self.edge(&cur, axis).mul(&acc);
                cur[axis] += 1;
            }
        }
        acc
    }

    /// The rank invariant at a pair of rational points: the rank of the
    /// composite map between the floors when `x <= y` (zero dimensional below
    /// the grid), the infinity marker otherwise.
    pub fn rank_invariant(&self, x: &[Rat], y: &[Rat]) -> RankValue {
        if !point_leq(x, y) {
            return RankValue::Infinite;
        }
        match (self.grid.floor(x), self.grid.floor(y)) {
            (Some(a), Some(b)) => RankValue::Finite(self.map_between(&a, &b).rank()),
            _ => RankValue::Finite(0),
        }
    }

    /// Dimension of the module at a rational point (zero below the grid).
    pub fn dim_at_point(&self, x: &[Rat]) -> usize {
        match self.grid.floor(x) {
            Some(idx) => self.dim_at(&idx),
            None => 0,
        }
    }

    /// Same representation on the translated grid (every coordinate moved by
    /// `delta`).
    pub fn translate(&self, delta: &[Rat]) -> GridModule<K> {
        GridModule {
            field: self.field.clone(),
            grid: self.grid.translate(delta),
            dims: self.dims.clone(),
            edges: self.edges.clone(),
        }
    }

    /// Reads the module off on an arbitrary grid of the same dimension via
    /// floors: the value at a target vertex is the value at the floor of its
    /// coordinates (zero below the source grid). For a refining target grid
    /// this is the pushforward; for a coarser one it samples.
    pub fn evaluate_on_grid(&self, target: &GridPoset) -> Result<GridModule<K>> {
        if target.n() != self.grid.n() {
            return Err(Error::ShapeMismatch {
                op: "GridModule::evaluate_on_grid",
                detail: format!(
                    "target grid has dimension {}, module has {}",
                    target.n(),
                    self.grid.n()
                ),
            });
        }
        let floors: Vec<Option<MultiIdx>> = (0..target.len())
            .map(|f| self.grid.floor(&target.coords(&target.unflat(f))))
            .collect();
        let dims: Vec<usize> = floors
            .iter()
            .map(|fl| fl.as_ref().map_or(0, |i| self.dim_at(i)))
            .collect();
        let n = target.n();
        let mut edges = vec![None; target.len() * n];
        for flat in 0..target.len() {
            let idx = target.unflat(flat);
            for axis in 0..n {
                if idx[axis] + 1 >= target.axis(axis).len() {
                    continue;
                }
                let mut up = idx.clone();
                up[axis] += 1;
                let upflat = target.flat(&up);
                let mat = match (&floors[flat], &floors[upflat]) {
                    (Some(a), Some(b)) => self.map_between(a, b),
                    (None, Some(b)) => Matrix::zero(self.field.clone(), self.dim_at(b), 0),
                    (None, None) => Matrix::zero(self.field.clone(), 0, 0),
                    (Some(_), None) => unreachable!("floors are monotone"),
                };
                edges[flat * n + axis] = Some(mat);
            }
        }
        GridModule::new(self.field.clone(), target.clone(), dims, edges)
    }

    /// Direct sum; the summands are first pushed onto the common refinement
    /// of their grids.
    pub fn direct_sum(&self, other: &GridModule<K>) -> Result<GridModule<K>> {
        if self.field != other.field {
            return Err(Error::ContextMismatch {
                op: "GridModule::direct_sum",
                detail: format!(
                    "fields {} and {} differ",
                    self.field.name(),
                    other.field.name()
                ),
            });
        }
        let (g, _, _) = common_refinement(&self.grid, &other.grid)?;
        let a = self.evaluate_on_grid(&g)?;
        let b = other.evaluate_on_grid(&g)?;
        let f = self.field.clone();
        let dims: Vec<usize> = (0..g.len()).map(|v| a.dims[v] + b.dims[v]).collect();
        GridModule::from_edge_fn(f.clone(), g.clone(), dims, |idx, axis| {
            let (ma, mb) = (a.edge(idx, axis), b.edge(idx, axis));
            Matrix::from_fn(
                f.clone(),
                ma.rows() + mb.rows(),
                ma.cols() + mb.cols(),
                |r, c| match (r < ma.rows(), c < ma.cols()) {
                    (true, true) => ma.get(r, c).clone(),
                    (false, false) => mb.get(r - ma.rows(), c - ma.cols()).clone(),
                    _ => f.zero(),
                },
            )
        })
    }
}

/// The shift of a module by `x`: the same representation with every grid
/// coordinate moved by `-x`, so that the shifted module at `q` is the
/// original module at `q + x`.
pub fn shift_module<K: Field>(v: &GridModule<K>, x: &[Rat]) -> GridModule<K> {
    let neg: Vec<Rat> = x.iter().map(|c| -c).collect();
    v.translate(&neg)
}

/// Pushforward of a module along a grid refinement map: values extend
/// constantly over the refined cells via floors.
pub fn pushforward<K: Field>(t: &GridMap, u: &GridModule<K>) -> Result<GridModule<K>> {
    if u.grid() != t.domain() {
        return Err(Error::ContextMismatch {
            op: "pushforward",
            detail: "module grid is not the domain of the grid map".into(),
        });
    }
    u.evaluate_on_grid(t.codomain())
}

/// Pullback of a module along a grid map: precomposition, restricting values
/// and maps to the image vertices.
pub fn pullback<K: Field>(t: &GridMap, v: &GridModule<K>) -> Result<GridModule<K>> {
    if v.grid() != t.codomain() {
        return Err(Error::ContextMismatch {
            op: "pullback",
            detail: "module grid is not the codomain of the grid map".into(),
        });
    }
    let g = t.domain().clone();
    let dims: Vec<usize> = (0..g.len())
        .map(|f| v.dim_at(&t.apply(&g.unflat(f))))
        .collect();
    GridModule::from_edge_fn(v.field().clone(), g.clone(), dims, |idx, axis| {
        let mut up = idx.to_vec();
        up[axis] += 1;
        v.map_between(&t.apply(idx), &t.apply(&up))
    })
}

/// The indicator module of a spread: one-dimensional on the indicated
/// vertices with identity internal maps, zero elsewhere. The indicated set
/// must be convex (all vertices between two members are members) and
/// connected in the covering graph.
pub fn spread_module<K: Field>(
    field: K,
    grid: &GridPoset,
    indicator: &[bool],
) -> Result<GridModule<K>> {
    if indicator.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            op: "spread_module",
            detail: format!(
                "{} indicator entries for {} vertices",
                indicator.len(),
                grid.len()
            ),
        });
    }
    let members: Vec<usize> = (0..grid.len()).filter(|&f| indicator[f]).collect();
    if members.is_empty() {
        return Err(Error::NotASpread {
            reason: "the indicated set is empty".into(),
        });
    }
    // convexity
    for &a in &members {
        let ia = grid.unflat(a);
        for &b in &members {
            let ib = grid.unflat(b);
            if !GridPoset::leq(&ia, &ib) {
                continue;
            }
            for c in 0..grid.len() {
                let ic = grid.unflat(c);
                if !indicator[c] && GridPoset::leq(&ia, &ic) && GridPoset::leq(&ic, &ib) {
                    return Err(Error::NotASpread {
                        reason: format!(
                            "not convex: {ic:?} lies between members {ia:?} and {ib:?}"
                        ),
                    });
                }
            }
        }
    }
    // connectivity in the (undirected) covering graph
    let mut seen = vec![false; grid.len()];
    let mut queue = vec![members[0]];
    seen[members[0]] = true;
    while let Some(f) = queue.pop() {
        let idx = grid.unflat(f);
        for nb in grid.lower_covers(&idx).into_iter().chain(grid.upper_covers(&idx)) {
            let nf = grid.flat(&nb);
            if indicator[nf] && !seen[nf] {
                seen[nf] = true;
                queue.push(nf);
            }
        }
    }
    if let Some(&stranded) = members.iter().find(|&&f| !seen[f]) {
        return Err(Error::NotASpread {
            reason: format!(
                "not connected: {:?} and {:?} lie in different components",
                grid.unflat(members[0]),
                grid.unflat(stranded)
            ),
        });
    }
    let dims: Vec<usize> = indicator.iter().map(|&b| usize::from(b)).collect();
    GridModule::from_edge_fn(field.clone(), grid.clone(), dims, |idx, axis| {
        let mut up = idx.to_vec();
        up[axis] += 1;
        let (s, t) = (indicator[grid.flat(idx)], indicator[grid.flat(&up)]);
        if s && t {
            Matrix::identity(field.clone(), 1)
        } else {
            Matrix::zero(field.clone(), usize::from(t), usize::from(s))
        }
    })
}

/// A submodule: one subspace per vertex, closed under the edge maps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Submodule<K: Field> {
    spaces: Vec<Subspace<K>>,
}

impl<K: Field> Submodule<K> {
    pub fn zero(parent: &GridModule<K>) -> Self {
        Submodule {
            spaces: parent
                .dims()
                .iter()
                .map(|&d| Subspace::zero(parent.field().clone(), d))
                .collect(),
        }
    }

    pub fn full(parent: &GridModule<K>) -> Self {
        Submodule {
            spaces: parent
                .dims()
                .iter()
                .map(|&d| Subspace::full(parent.field().clone(), d))
                .collect(),
        }
    }

    /// Wraps per-vertex subspaces after checking ambient dimensions and
    /// closure under the edge maps.
    pub fn from_spaces(parent: &GridModule<K>, spaces: Vec<Subspace<K>>) -> Result<Self> {
        if spaces.len() != parent.grid().len() {
            return Err(Error::ShapeMismatch {
                op: "Submodule::from_spaces",
                detail: format!(
                    "{} spaces for {} vertices",
                    spaces.len(),
                    parent.grid().len()
                ),
            });
        }
        for (f, s) in spaces.iter().enumerate() {
            if s.ambient() != parent.dims()[f] {
                return Err(Error::ShapeMismatch {
                    op: "Submodule::from_spaces",
                    detail: format!(
                        "space at vertex {f} has ambient {} but the fiber has dimension {}",
                        s.ambient(),
                        parent.dims()[f]
                    ),
                });
            }
        }
        let sub = Submodule { spaces };
        sub.check_closed(parent)?;
        Ok(sub)
    }

    /// Verifies closure under every edge map, reporting the violating edge.
    pub fn check_closed(&self, parent: &GridModule<K>) -> Result<()> {
        let grid = parent.grid();
        for flat in 0..grid.len() {
            let idx = grid.unflat(flat);
            for axis in 0..grid.n() {
                if idx[axis] + 1 >= grid.axis(axis).len() {
                    continue;
                }
                let mut up = idx.clone();
                up[axis] += 1;
                let pushed = parent.edge(&idx, axis).push_subspace(&self.spaces[flat]);
                if !self.spaces[grid.flat(&up)].contains(&pushed) {
                    return Err(Error::NotClosed { vertex: flat, axis });
                }
            }
        }
        Ok(())
    }

    pub fn is_closed(&self, parent: &GridModule<K>) -> bool {
        self.check_closed(parent).is_ok()
    }

    pub fn space_at(&self, flat: usize) -> &Subspace<K> {
        &self.spaces[flat]
    }

    pub fn spaces(&self) -> &[Subspace<K>] {
        &self.spaces
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(|s| s.dim()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn contains(&self, other: &Submodule<K>) -> bool {
        self.spaces
            .iter()
            .zip(&other.spaces)
            .all(|(a, b)| a.contains(b))
    }

    /// Pointwise sum of two submodules of the same parent (closed again).
    pub fn sum(&self, other: &Submodule<K>) -> Submodule<K> {
        Submodule {
            spaces: self
                .spaces
                .iter()
                .zip(&other.spaces)
                .map(|(a, b)| a.sum(b))
                .collect(),
        }
    }

    /// Pointwise intersection of two submodules (closed again).
    pub fn intersect(&self, other: &Submodule<K>) -> Submodule<K> {
        Submodule {
            spaces: self
                .spaces
                .iter()
                .zip(&other.spaces)
                .map(|(a, b)| a.intersect(b))
                .collect(),
        }
    }
}

/// Smallest submodule containing the given per-vertex seed spaces: a single
/// ascending sweep suffices because every path from below factors through the
/// lower covers, which precede their target in flat order.
pub fn sub_generated<K: Field>(
    parent: &GridModule<K>,
    seeds: &[Subspace<K>],
) -> Result<Submodule<K>> {
    let grid = parent.grid();
    if seeds.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            op: "sub_generated",
            detail: format!("{} seeds for {} vertices", seeds.len(), grid.len()),
        });
    }
    let mut spaces: Vec<Subspace<K>> = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        if seeds[flat].ambient() != parent.dims()[flat] {
            return Err(Error::ShapeMismatch {
                op: "sub_generated",
                detail: format!("seed at vertex {flat} has the wrong ambient dimension"),
            });
        }
        let idx = grid.unflat(flat);
        let mut acc = seeds[flat].clone();
        for cover in grid.lower_covers(&idx) {
            let cf = grid.flat(&cover);
            debug_assert!(cf < flat);
            let pushed = parent
                .edge(&cover, idx.iter().zip(&cover).position(|(a, b)| a != b).unwrap())
                .push_subspace(&spaces[cf]);
            acc = acc.sum(&pushed);
        }
        spaces.push(acc);
    }
    let sub = Submodule { spaces };
    debug_assert!(sub.is_closed(parent));
    Ok(sub)
}

/// Quotient of a module by a closed submodule, together with the projection
/// map. Fails with the violating edge if the submodule is not closed.
pub fn quotient<K: Field>(
    parent: &GridModule<K>,
    w: &Submodule<K>,
) -> Result<(GridModule<K>, ModuleMap<K>)> {
    w.check_closed(parent)?;
    let grid = parent.grid();
    let f = parent.field().clone();
    let mut projs = Vec::with_capacity(grid.len());
    let mut lifts = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let (p, l) = w.spaces[flat].quotient_maps();
        projs.push(p);
        lifts.push(l);
    }
    let dims: Vec<usize> = projs.iter().map(|p| p.rows()).collect();
    let q = GridModule::from_edge_fn(f, grid.clone(), dims, |idx, axis| {
        let mut up = idx.to_vec();
        up[axis] += 1;
        let (src, dst) = (grid.flat(idx), grid.flat(&up));
        projs[dst].mul(parent.edge(idx, axis)).mul(&lifts[src])
    })?;
    let proj_map = ModuleMap::new(parent.clone(), q.clone(), projs)?;
    Ok((q, proj_map))
}

/// A natural transformation between modules on a common grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap<K: Field> {
    source: GridModule<K>,
    target: GridModule<K>,
    mats: Vec<Matrix<K>>, // per flat vertex: target dim x source dim
}

impl<K: Field> ModuleMap<K> {
    /// Validates shapes and naturality on every covering edge.
    pub fn new(source: GridModule<K>, target: GridModule<K>, mats: Vec<Matrix<K>>) -> Result<Self> {
        if source.grid() != target.grid() {
            return Err(Error::ContextMismatch {
                op: "ModuleMap::new",
                detail: "source and target live on different grids".into(),
            });
        }
        let grid = source.grid();
        if mats.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                op: "ModuleMap::new",
                detail: format!("{} matrices for {} vertices", mats.len(), grid.len()),
            });
        }
        for flat in 0..grid.len() {
            let m = &mats[flat];
            if m.rows() != target.dims()[flat] || m.cols() != source.dims()[flat] {
                return Err(Error::ShapeMismatch {
                    op: "ModuleMap::new",
                    detail: format!(
                        "matrix at vertex {flat} is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        target.dims()[flat],
                        source.dims()[flat]
                    ),
                });
            }
        }
        for flat in 0..grid.len() {
            let idx = grid.unflat(flat);
            for axis in 0..grid.n() {
                if idx[axis] + 1 >= grid.axis(axis).len() {
                    continue;
                }
                let mut up = idx.clone();
                up[axis] += 1;
                let upflat = grid.flat(&up);
                let lhs = target.edge(&idx, axis).mul(&mats[flat]);
                let rhs = mats[upflat].mul(source.edge(&idx, axis));
                if lhs != rhs {
                    return Err(Error::InvariantViolation {
                        op: "ModuleMap::new",
                        detail: format!("naturality fails at vertex {idx:?}, axis {axis}"),
                    });
                }
            }
        }
        Ok(ModuleMap {
            source,
            target,
            mats,
        })
    }

    pub fn identity(m: &GridModule<K>) -> Self {
        let mats = m
            .dims()
            .iter()
            .map(|&d| Matrix::identity(m.field().clone(), d))
            .collect();
        ModuleMap {
            source: m.clone(),
            target: m.clone(),
            mats,
        }
    }

    pub fn zero(source: &GridModule<K>, target: &GridModule<K>) -> Result<Self> {
        let mats = (0..source.grid().len())
            .map(|f| Matrix::zero(source.field().clone(), target.dims()[f], source.dims()[f]))
            .collect();
        ModuleMap::new(source.clone(), target.clone(), mats)
    }

    pub fn source(&self) -> &GridModule<K> {
        &self.source
    }
    pub fn target(&self) -> &GridModule<K> {
        &self.target
    }
    pub fn mat_at(&self, flat: usize) -> &Matrix<K> {
        &self.mats[flat]
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(|m| m.is_zero())
    }

    /// Composite `self . g` (apply `g` first).
    pub fn compose(&self, g: &ModuleMap<K>) -> Result<ModuleMap<K>> {
        if g.target != self.source {
            return Err(Error::ContextMismatch {
                op: "ModuleMap::compose",
                detail: "inner target differs from outer source".into(),
            });
        }
        let mats = (0..self.mats.len())
            .map(|f| self.mats[f].mul(&g.mats[f]))
            .collect();
        ModuleMap::new(g.source.clone(), self.target.clone(), mats)
    }

    /// Pointwise image of a submodule of the source; closed by naturality.
    pub fn apply_to_submodule(&self, w: &Submodule<K>) -> Submodule<K> {
        let spaces: Vec<Subspace<K>> = (0..self.mats.len())
            .map(|f| self.mats[f].push_subspace(w.space_at(f)))
            .collect();
        let sub = Submodule { spaces };
        debug_assert!(sub.is_closed(&self.target));
        sub
    }

    /// Pointwise preimage of a submodule of the target; closed by naturality.
    pub fn preimage_submodule(&self, w: &Submodule<K>) -> Submodule<K> {
        let spaces: Vec<Subspace<K>> = (0..self.mats.len())
            .map(|f| self.mats[f].preimage_subspace(w.space_at(f)))
            .collect();
        let sub = Submodule { spaces };
        debug_assert!(sub.is_closed(&self.source));
        sub
    }

    pub fn kernel_submodule(&self) -> Submodule<K> {
        let spaces: Vec<Subspace<K>> = self.mats.iter().map(|m| m.kernel_basis()).collect();
        let sub = Submodule { spaces };
        debug_assert!(sub.is_closed(&self.source));
        sub
    }

    pub fn image_submodule(&self) -> Submodule<K> {
        self.apply_to_submodule(&Submodule::full(&self.source))
    }
}

/// A basis of the space of natural transformations between two modules on a
/// common grid, found by solving the naturality equations exactly.
pub fn hom_basis<K: Field>(
    source: &GridModule<K>,
    target: &GridModule<K>,
) -> Result<Vec<ModuleMap<K>>> {
    if source.grid() != target.grid() {
        return Err(Error::ContextMismatch {
            op: "hom_basis",
            detail: "source and target live on different grids".into(),
        });
    }
    let grid = source.grid();
    let f = source.field().clone();
    // unknowns: entries of the per-vertex matrices, vertex by vertex, row-major
    let offsets: Vec<usize> = {
        let mut off = vec![0];
        for flat in 0..grid.len() {
            off.push(off[flat] + target.dims()[flat] * source.dims()[flat]);
        }
        off
    };
    let total = *offsets.last().unwrap();
    let mut rows: Vec<Vec<K::Elem>> = Vec::new();
    for flat in 0..grid.len() {
        let idx = grid.unflat(flat);
        for axis in 0..grid.n() {
            if idx[axis] + 1 >= grid.axis(axis).len() {
                continue;
            }
            let mut up = idx.clone();
            up[axis] += 1;
            let upflat = grid.flat(&up);
            let te = target.edge(&idx, axis);
            let se = source.edge(&idx, axis);
            // (te * m_flat - m_upflat * se)[i][j] = 0
            for i in 0..target.dims()[upflat] {
                for j in 0..source.dims()[flat] {
                    let mut row = vec![f.zero(); total];
                    for k in 0..target.dims()[flat] {
                        // m_flat[k][j] with coefficient te[i][k]
                        row[offsets[flat] + k * source.dims()[flat] + j] = te.get(i, k).clone();
                    }
                    for l in 0..source.dims()[upflat] {
                        // m_upflat[i][l] with coefficient -se[l][j]
                        let pos = offsets[upflat] + i * source.dims()[upflat] + l;
                        row[pos] = f.sub(&row[pos], se.get(l, j));
                    }
                    rows.push(row);
                }
            }
        }
    }
    let constraint = Matrix::from_rows(f.clone(), total, rows)?;
    let ker = if total == 0 {
        return Ok(Vec::new());
    } else {
        constraint.kernel_basis()
    };
    let mut out = Vec::with_capacity(ker.dim());
    for b in 0..ker.dim() {
        let v = ker.basis_row(b);
        let mats: Vec<Matrix<K>> = (0..grid.len())
            .map(|flat| {
                Matrix::from_fn(f.clone(), target.dims()[flat], source.dims()[flat], |r, c| {
                    v[offsets[flat] + r * source.dims()[flat] + c].clone()
                })
            })
            .collect();
        out.push(ModuleMap::new(source.clone(), target.clone(), mats)?);
    }
    Ok(out)
}

/// A relation of a presentation: a linear combination of the generators that
/// is declared zero from `position` onwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub position: Vec<Rat>,
    pub coeffs: Vec<Rat>,
}

/// A finite presentation with rational data: generators at points of `Q^n`
/// and relations at points above the generators they involve. The field is
/// chosen at realisation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub n: usize,
    pub generators: Vec<Vec<Rat>>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            if g.len() != self.n {
                return Err(Error::ShapeMismatch {
                    op: "Presentation::validate",
                    detail: format!("generator {i} has {} coordinates, expected {}", g.len(), self.n),
                });
            }
        }
        for (r, rel) in self.relations.iter().enumerate() {
            if rel.position.len() != self.n || rel.coeffs.len() != self.generators.len() {
                return Err(Error::ShapeMismatch {
                    op: "Presentation::validate",
                    detail: format!("relation {r} has mismatched position or coefficient row"),
                });
            }
            for (g, coeff) in rel.coeffs.iter().enumerate() {
                if !coeff.is_zero() && !point_leq(&self.generators[g], &rel.position) {
                    return Err(Error::MalformedRelation {
                        relation: r,
                        generator: g,
                    });
                }
            }
        }
        Ok(())
    }

    /// The minimal grid supporting the presentation: per-axis sorted union of
    /// all generator and relation coordinates (a single origin vertex for the
    /// empty presentation).
    pub fn natural_grid(&self) -> Result<GridPoset> {
        let mut axes: Vec<Vec<Rat>> = vec![Vec::new(); self.n];
        for p in self
            .generators
            .iter()
            .chain(self.relations.iter().map(|r| &r.position))
        {
            for (i, c) in p.iter().enumerate() {
                axes[i].push(c.clone());
            }
        }
        for a in axes.iter_mut() {
            if a.is_empty() {
                a.push(Rat::from_integer(0.into()));
            }
            a.sort();
            a.dedup();
        }
        GridPoset::new(axes)
    }

    /// Translates all generator and relation positions by `delta`.
    pub fn translate(&self, delta: &[Rat]) -> Presentation {
        let mv = |p: &Vec<Rat>| -> Vec<Rat> { p.iter().zip(delta).map(|(c, d)| c + d).collect() };
        Presentation {
            n: self.n,
            generators: self.generators.iter().map(mv).collect(),
            relations: self
                .relations
                .iter()
                .map(|r| Relation {
                    position: mv(&r.position),
                    coeffs: r.coeffs.clone(),
                })
                .collect(),
        }
    }

    /// Presentation of the indicator module of a half-open box
    /// `[lo_i, hi_i)` per axis, unbounded above where `hi_i` is `None`: one
    /// generator at `lo` and one relation per finite upper bound.
    pub fn half_open_box(lo: &[Rat], hi: &[Option<Rat>]) -> Result<Presentation> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::ShapeMismatch {
                op: "Presentation::half_open_box",
                detail: format!("{} lower and {} upper bounds", lo.len(), hi.len()),
            });
        }
        for (i, h) in hi.iter().enumerate() {
            if let Some(h) = h {
                if h <= &lo[i] {
                    return Err(Error::NotASpread {
                        reason: format!("axis {i}: upper bound is not above the lower bound"),
                    });
                }
            }
        }
        let mut relations = Vec::new();
        for (i, h) in hi.iter().enumerate() {
            if let Some(h) = h {
                let mut pos = lo.to_vec();
                pos[i] = h.clone();
                relations.push(Relation {
                    position: pos,
                    coeffs: vec![Rat::from_integer(1.into())],
                });
            }
        }
        Ok(Presentation {
            n: lo.len(),
            generators: vec![lo.to_vec()],
            relations,
        })
    }

    /// Direct sum of presentations: disjoint union of generators and
    /// relations with coefficient rows padded accordingly.
    pub fn direct_sum(&self, other: &Presentation) -> Result<Presentation> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch {
                op: "Presentation::direct_sum",
                detail: format!("dimensions {} and {} differ", self.n, other.n),
            });
        }
        let (ga, gb) = (self.generators.len(), other.generators.len());
        let mut relations = Vec::with_capacity(self.relations.len() + other.relations.len());
        for r in &self.relations {
            let mut coeffs = r.coeffs.clone();
            coeffs.extend(std::iter::repeat(Rat::from_integer(0.into())).take(gb));
            relations.push(Relation {
                position: r.position.clone(),
                coeffs,
            });
        }
        for r in &other.relations {
            let mut coeffs = vec![Rat::from_integer(0.into()); ga];
            coeffs.extend(r.coeffs.iter().cloned());
            relations.push(Relation {
                position: r.position.clone(),
                coeffs,
            });
        }
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Ok(Presentation {
            n: self.n,
            generators,
            relations,
        })
    }
}

/// A realised presentation: the grid module together with the per-vertex
/// scaffolding (live generators, relation row space, projection and section
/// matrices) that identifies each fiber as a quotient of the free space on
/// the live generators.
#[derive(Debug, Clone)]
pub struct Realisation<K: Field> {
    pub module: GridModule<K>,
    /// Sorted indices of generators born at or below each vertex.
    pub live: Vec<Vec<usize>>,
    /// Row space of the relations applicable at each vertex, inside the free
    /// space on the live generators.
    pub rel_space: Vec<Subspace<K>>,
    /// Projection from the free space on live generators onto the fiber.
    pub proj: Vec<Matrix<K>>,
    /// Section of the projection.
    pub lift: Vec<Matrix<K>>,
}

/// Realises a presentation over a field on its natural grid.
pub fn realise<K: Field>(pres: &Presentation, field: K) -> Result<Realisation<K>> {
    let grid = pres.natural_grid()?;
    realise_on_grid(pres, field, &grid)
}

/// Realises a presentation over a field on an arbitrary grid of the right
/// dimension: each vertex value is the cokernel of the relations applicable
/// at or below it, on the generators born at or below it.
pub fn realise_on_grid<K: Field>(
    pres: &Presentation,
    field: K,
    grid: &GridPoset,
) -> Result<Realisation<K>> {
    pres.validate()?;
    if grid.n() != pres.n {
        return Err(Error::ShapeMismatch {
            op: "realise_on_grid",
            detail: format!("grid dimension {} but presentation has {}", grid.n(), pres.n),
        });
    }
    let prime = field.order().unwrap_or(0);
    let mut live: Vec<Vec<usize>> = Vec::with_capacity(grid.len());
    let mut rel_space: Vec<Subspace<K>> = Vec::with_capacity(grid.len());
    let mut projs: Vec<Matrix<K>> = Vec::with_capacity(grid.len());
    let mut lifts: Vec<Matrix<K>> = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let coords = grid.coords(&grid.unflat(flat));
        let lv: Vec<usize> = (0..pres.generators.len())
            .filter(|&g| point_leq(&pres.generators[g], &coords))
            .collect();
        let mut rows: Vec<Vec<K::Elem>> = Vec::new();
        for (ri, rel) in pres.relations.iter().enumerate() {
            if !point_leq(&rel.position, &coords) {
                continue;
            }
            let mut row = Vec::with_capacity(lv.len());
            for &g in &lv {
                row.push(field.from_rat(&rel.coeffs[g]).ok_or(Error::DenominatorVanishes {
                    relation: ri,
                    prime,
                })?);
            }
            rows.push(row);
        }
        let w = Subspace::from_rows(field.clone(), lv.len(), rows);
        let (p, l) = w.quotient_maps();
        live.push(lv);
        rel_space.push(w);
        projs.push(p);
        lifts.push(l);
    }
    let dims: Vec<usize> = projs.iter().map(|p| p.rows()).collect();
    let module = GridModule::from_edge_fn(field.clone(), grid.clone(), dims, |idx, axis| {
        let mut up = idx.to_vec();
        up[axis] += 1;
        let (src, dst) = (grid.flat(idx), grid.flat(&up));
        // inclusion of free spaces: live generators at src into those at dst
        let incl = Matrix::from_fn(field.clone(), live[dst].len(), live[src].len(), |r, c| {
            if live[dst][r] == live[src][c] {
                field.one()
            } else {
                field.zero()
            }
        });
        projs[dst].mul(&incl).mul(&lifts[src])
    })?;
    Ok(Realisation {
        module,
        live,
        rel_space,
        proj: projs,
        lift: lifts,
    })
}

/// Realises a presentation on its natural grid and returns just the module.
pub fn from_presentation<K: Field>(pres: &Presentation, field: K) -> Result<GridModule<K>> {
    Ok(realise(pres, field)?.module)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, PrimeField, Rationals};

    fn pt(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&a| rat_int(a)).collect()
    }

    /// The interval module on `[0,1)` in one parameter.
    fn interval_01() -> Presentation {
        Presentation::half_open_box(&pt(&[0]), &[Some(rat_int(1))]).unwrap()
    }

    /// The direct sum of intervals `[0,1)` and `[0,2)` on one axis.
    fn two_chain() -> Presentation {
        let a = interval_01();
        let b = Presentation::half_open_box(&pt(&[0]), &[Some(rat_int(2))]).unwrap();
        a.direct_sum(&b).unwrap()
    }

    #[test]
    fn free_module_realisation() {
        let pres = Presentation {
            n: 1,
            generators: vec![pt(&[0])],
            relations: vec![],
        };
        let m = from_presentation(&pres, Rationals).unwrap();
        assert_eq!(m.grid().len(), 1);
        assert_eq!(m.dims(), &[1]);
    }

    #[test]
    fn interval_module_realisation() {
        let m = from_presentation(&interval_01(), Rationals).unwrap();
        assert_eq!(m.grid().axis(0), &[rat_int(0), rat_int(1)][..]);
        assert_eq!(m.dims(), &[1, 0]);
    }

    #[test]
    fn two_generators_one_difference_relation() {
        // generators at (0,0) twice, relation at (1,1) killing the difference
        let pres = Presentation {
            n: 2,
            generators: vec![pt(&[0, 0]), pt(&[0, 0])],
            relations: vec![Relation {
                position: pt(&[1, 1]),
                coeffs: vec![rat_int(1), rat_int(-1)],
            }],
        };
        let m = from_presentation(&pres, Rationals).unwrap();
        // grid {0,1}^2; the relation only applies at (1,1)
        assert_eq!(m.dim_at(&[0, 0]), 2);
        assert_eq!(m.dim_at(&[1, 0]), 2);
        assert_eq!(m.dim_at(&[0, 1]), 2);
        assert_eq!(m.dim_at(&[1, 1]), 1);
        // the edge into (1,1) identifies the generators
        let e = m.map_between(&[0, 0], &[1, 1]);
        assert_eq!(e.rank(), 1);
    }

    #[test]
    fn malformed_relation_is_rejected() {
        let pres = Presentation {
            n: 1,
            generators: vec![pt(&[1])],
            relations: vec![Relation {
                position: pt(&[0]),
                coeffs: vec![rat_int(1)],
            }],
        };
        let err = from_presentation(&pres, Rationals).unwrap_err();
        assert!(matches!(
            err,
            Error::MalformedRelation {
                relation: 0,
                generator: 0
            }
        ));
    }

    #[test]
    fn fractional_coefficients_need_invertible_denominators() {
        let pres = Presentation {
            n: 1,
            generators: vec![pt(&[0])],
            relations: vec![Relation {
                position: pt(&[1]),
                coeffs: vec![rat(1, 2)],
            }],
        };
        let f2 = PrimeField::new(2).unwrap();
        let err = from_presentation(&pres, f2).unwrap_err();
        assert!(matches!(err, Error::DenominatorVanishes { relation: 0, prime: 2 }));
        let f3 = PrimeField::new(3).unwrap();
        let m = from_presentation(&pres, f3).unwrap();
        assert_eq!(m.dims(), &[1, 0]);
    }

    #[test]
    fn commutativity_is_enforced() {
        // 2x2 grid, dims 1 everywhere; one route is the identity, the other zero
        let grid = GridPoset::new(vec![pt(&[0, 1]), pt(&[0, 1])]).unwrap();
        let id = Matrix::identity(Rationals, 1);
        let zero = Matrix::zero(Rationals, 1, 1);
        // edges: from (0,0) axis0 -> id, axis1 -> id;
        // from (1,0) axis1 -> id; from (0,1) axis0 -> zero
        let mut edges = vec![None; 4 * 2];
        edges[grid.flat(&[0, 0]) * 2] = Some(id.clone());
        edges[grid.flat(&[0, 0]) * 2 + 1] = Some(id.clone());
        edges[grid.flat(&[1, 0]) * 2 + 1] = Some(id.clone());
        edges[grid.flat(&[0, 1]) * 2] = Some(zero);
        let err = GridModule::new(Rationals, grid, vec![1, 1, 1, 1], edges).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }));
    }

    #[test]
    fn rank_invariant_of_an_interval() {
        let m = from_presentation(&interval_01(), Rationals).unwrap();
        let half = vec![rat(1, 2)];
        let zero = vec![rat_int(0)];
        let one = vec![rat_int(1)];
        assert_eq!(m.rank_invariant(&zero, &half), RankValue::Finite(1));
        assert_eq!(m.rank_invariant(&zero, &one), RankValue::Finite(0));
        assert_eq!(m.rank_invariant(&half, &zero), RankValue::Infinite);
        // below the grid the module vanishes
        assert_eq!(m.rank_invariant(&[rat_int(-1)], &half), RankValue::Finite(0));
        assert_eq!(m.dim_at_point(&half), 1);
        assert_eq!(m.dim_at_point(&[rat_int(-1)]), 0);
    }

    #[test]
    fn pushforward_and_pullback_unit() {
        let m = from_presentation(&interval_01(), Rationals).unwrap();
        let fine = GridPoset::new(vec![vec![rat_int(0), rat(1, 2), rat_int(1)]]).unwrap();
        let t = GridMap::inclusion(m.grid(), &fine).unwrap();
        let pushed = pushforward(&t, &m).unwrap();
        assert_eq!(pushed.dims(), &[1, 1, 0]);
        assert_eq!(pushed.edge(&[0], 0), &Matrix::identity(Rationals, 1));
        let back = pullback(&t, &pushed).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn shift_moves_support() {
        let m = from_presentation(&interval_01(), Rationals).unwrap();
        let s = shift_module(&m, &[rat(1, 2)]);
        assert_eq!(s.grid().axis(0), &[rat(-1, 2), rat(1, 2)][..]);
        assert_eq!(s.dim_at_point(&[rat_int(0)]), 1);
        assert_eq!(s.dim_at_point(&[rat(1, 2)]), 0);
        // shifting back is the identity
        assert_eq!(shift_module(&s, &[rat(-1, 2)]), m);
    }

    #[test]
    fn spreads_validate_convexity_and_connectivity() {
        let grid = GridPoset::new(vec![pt(&[0, 1]), pt(&[0, 1])]).unwrap();
        // full grid: the constant module
        let full = spread_module(Rationals, &grid, &[true; 4]).unwrap();
        assert_eq!(full.dims(), &[1, 1, 1, 1]);
        assert_eq!(full.map_between(&[0, 0], &[1, 1]).rank(), 1);
        // single vertex
        let mut ind = [false; 4];
        ind[grid.flat(&[1, 0])] = true;
        let single = spread_module(Rationals, &grid, &ind).unwrap();
        assert_eq!(single.total_dim(), 1);
        // hook {(0,0),(1,0),(0,1)} is a genuine spread
        let mut hook = [true; 4];
        hook[grid.flat(&[1, 1])] = false;
        assert!(spread_module(Rationals, &grid, &hook).is_ok());
        // {(0,0),(1,0),(1,1)} misses (0,1) between (0,0) and (1,1): not convex
        let mut ell = [true; 4];
        ell[grid.flat(&[0, 1])] = false;
        let err = spread_module(Rationals, &grid, &ell).unwrap_err();
        assert!(matches!(err, Error::NotASpread { .. }));
        // two isolated corners of a 3-chain: not connected
        let chain = GridPoset::new(vec![pt(&[0, 1, 2])]).unwrap();
        let err = spread_module(Rationals, &chain, &[true, false, true]).unwrap_err();
        assert!(matches!(err, Error::NotASpread { .. }));
    }

    #[test]
    fn sub_generated_closure() {
        let m = from_presentation(&two_chain(), Rationals).unwrap();
        assert_eq!(m.dims(), &[2, 1, 0]);
        // seed the first summand at the origin: it dies at 1
        let mut seeds: Vec<Subspace<Rationals>> = m
            .dims()
            .iter()
            .map(|&d| Subspace::zero(Rationals, d))
            .collect();
        seeds[0] = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(0)]]);
        let w = sub_generated(&m, &seeds).unwrap();
        assert_eq!(w.dims(), vec![1, 0, 0]);
        // seeding nothing gives zero; seeding everything gives the module
        let z = sub_generated(&m, &Submodule::zero(&m).spaces().to_vec()).unwrap();
        assert!(z.is_zero());
        let f = sub_generated(&m, &Submodule::full(&m).spaces().to_vec()).unwrap();
        assert_eq!(f, Submodule::full(&m));
        // closure operator laws: extensive and idempotent
        assert!(w.contains(&sub_generated(&m, &seeds).unwrap()));
        assert_eq!(sub_generated(&m, w.spaces()).unwrap(), w);
    }

    #[test]
    fn closure_violations_name_the_edge() {
        let m = from_presentation(&two_chain(), Rationals).unwrap();
        // the second summand at the origin maps onto the fiber at 1
        let mut spaces: Vec<Subspace<Rationals>> = m
            .dims()
            .iter()
            .map(|&d| Subspace::zero(Rationals, d))
            .collect();
        spaces[0] = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(0), rat_int(1)]]);
        let err = Submodule::from_spaces(&m, spaces).unwrap_err();
        assert!(matches!(err, Error::NotClosed { vertex: 0, axis: 0 }));
    }

    #[test]
    fn quotient_of_two_chain() {
        let m = from_presentation(&two_chain(), Rationals).unwrap();
        let mut seeds: Vec<Subspace<Rationals>> = m
            .dims()
            .iter()
            .map(|&d| Subspace::zero(Rationals, d))
            .collect();
        seeds[0] = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(0)]]);
        let w = sub_generated(&m, &seeds).unwrap();
        let (q, proj) = quotient(&m, &w).unwrap();
        assert_eq!(q.dims(), &[1, 1, 0]);
        assert_eq!(q.edge(&[0], 0).rank(), 1);
        assert!(proj.apply_to_submodule(&Submodule::full(&m)).total_dim() == q.total_dim());
        // quotient by zero and by the whole module
        let (q0, _) = quotient(&m, &Submodule::zero(&m)).unwrap();
        assert_eq!(q0.dims(), m.dims());
        let (qf, _) = quotient(&m, &Submodule::full(&m)).unwrap();
        assert!(qf.is_zero());
        // the kernel of the projection is the submodule itself
        assert_eq!(proj.kernel_submodule(), w);
    }

    #[test]
    fn direct_sum_aligns_grids() {
        let a = from_presentation(&interval_01(), Rationals).unwrap();
        let shifted =
            Presentation::half_open_box(&[rat(1, 2)], &[Some(rat(3, 2))]).unwrap();
        let b = from_presentation(&shifted, Rationals).unwrap();
        let s = a.direct_sum(&b).unwrap();
        assert_eq!(
            s.grid().axis(0),
            &[rat_int(0), rat(1, 2), rat_int(1), rat(3, 2)][..]
        );
        assert_eq!(s.dims(), &[1, 2, 1, 0]);
        // mismatched fields are a context error
        let p2 = from_presentation(&interval_01(), PrimeField::new(2).unwrap()).unwrap();
        let p3 = from_presentation(&interval_01(), PrimeField::new(3).unwrap()).unwrap();
        assert!(matches!(
            p2.direct_sum(&p3),
            Err(Error::ContextMismatch { .. })
        ));
    }

    #[test]
    fn module_maps_validate_naturality() {
        let m = from_presentation(&two_chain(), Rationals).unwrap();
        let id = ModuleMap::identity(&m);
        assert_eq!(id.apply_to_submodule(&Submodule::full(&m)), Submodule::full(&m));
        let z = ModuleMap::zero(&m, &m).unwrap();
        assert!(z.apply_to_submodule(&Submodule::full(&m)).is_zero());
        // an endomorphism that breaks naturality: swap the summands at 0 only
        let mut mats: Vec<Matrix<Rationals>> = m
            .dims()
            .iter()
            .map(|&d| Matrix::identity(Rationals, d))
            .collect();
        mats[0] = Matrix::from_rows(
            Rationals,
            2,
            vec![vec![rat_int(0), rat_int(1)], vec![rat_int(1), rat_int(0)]],
        )
        .unwrap();
        let err = ModuleMap::new(m.clone(), m.clone(), mats).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }));
    }

    #[test]
    fn hom_spaces_of_intervals() {
        // maps go against inclusion of half-open intervals: [0,2) -> [0,1)
        // admits the restriction map, [0,1) -> [0,2) only zero.
        let a = from_presentation(&interval_01(), Rationals).unwrap();
        let b = from_presentation(
            &Presentation::half_open_box(&pt(&[0]), &[Some(rat_int(2))]).unwrap(),
            Rationals,
        )
        .unwrap();
        let g = common_refinement(a.grid(), b.grid()).unwrap().0;
        let ar = a.evaluate_on_grid(&g).unwrap();
        let br = b.evaluate_on_grid(&g).unwrap();
        assert_eq!(hom_basis(&br, &ar).unwrap().len(), 1);
        assert_eq!(hom_basis(&ar, &br).unwrap().len(), 0);
        // endomorphisms of a summed module include both projections
        let s = ar.direct_sum(&br).unwrap();
        assert_eq!(hom_basis(&s, &s).unwrap().len(), 3);
    }

    #[test]
    fn kernels_and_images_of_projections() {
        let m = from_presentation(&two_chain(), Rationals).unwrap();
        let mut seeds: Vec<Subspace<Rationals>> = m
            .dims()
            .iter()
            .map(|&d| Subspace::zero(Rationals, d))
            .collect();
        seeds[0] = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(0)]]);
        let w = sub_generated(&m, &seeds).unwrap();
        let (_, proj) = quotient(&m, &w).unwrap();
        assert_eq!(proj.kernel_submodule(), w);
        assert_eq!(proj.image_submodule(), Submodule::full(proj.target()));
        // preimage of zero is the kernel
        let z = Submodule::zero(proj.target());
        assert_eq!(proj.preimage_submodule(&z), w);
    }

    #[test]
    fn pushforward_preserves_exactness_of_dimension_counts() {
        // short exact triple: W -> M -> M/W has additive dimension vectors,
        // and stays additive after pushing onto a refinement.
        let m = from_presentation(&two_chain(), Rationals).unwrap();
        let mut seeds: Vec<Subspace<Rationals>> = m
            .dims()
            .iter()
            .map(|&d| Subspace::zero(Rationals, d))
            .collect();
        seeds[0] = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(0)]]);
        let w = sub_generated(&m, &seeds).unwrap();
        let (q, _) = quotient(&m, &w).unwrap();
        let fine = GridPoset::new(vec![vec![
            rat_int(0),
            rat(1, 2),
            rat_int(1),
            rat(3, 2),
            rat_int(2),
        ]])
        .unwrap();
        let mf = m.evaluate_on_grid(&fine).unwrap();
        let qf = q.evaluate_on_grid(&fine).unwrap();
        for flat in 0..fine.len() {
            let w_dim_here = match m.grid().floor(&fine.coords(&fine.unflat(flat))) {
                Some(i) => w.space_at(m.grid().flat(&i)).dim(),
                None => 0,
            };
            assert_eq!(mf.dims()[flat], qf.dims()[flat] + w_dim_here);
        }
    }
}
