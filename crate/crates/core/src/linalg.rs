//! Exact linear algebra over a [`Field`]: matrices, reduced row echelon form,
//! kernels/images, and a calculus of subspaces in canonical form.
//!
//! A [`Subspace`] is stored as the reduced row echelon form of a spanning set
//! with zero rows dropped; since the reduced form is unique per subspace,
//! subspace equality is plain syntactic equality and subspaces can be hashed.

use crate::scalar::Field;
use crate::{Error, Result};
use std::hash::{Hash, Hasher};

/// Dense matrix over the field `K`, acting on column vectors:
/// an `r x c` matrix maps `K^c -> K^r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<K: Field> {
    field: K,
    rows: usize,
    cols: usize,
    entries: Vec<K::Elem>, // row-major
}

impl<K: Field> Hash for Matrix<K> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.entries.hash(state);
    }
}

impl<K: Field> Matrix<K> {
    pub fn zero(field: K, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        Matrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(field: K, n: usize) -> Self {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            let one = m.field.one();
            m.set(i, i, one);
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(field: K, cols: usize, rows: Vec<Vec<K::Elem>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch {
                    op: "Matrix::from_rows",
                    detail: format!("row {i} has length {}, expected {cols}", row.len()),
                });
            }
        }
        let nrows = rows.len();
        Ok(Matrix {
            field,
            rows: nrows,
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(field: K, rows: usize, cols: usize, f: impl Fn(usize, usize) -> K::Elem) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Matrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn field(&self) -> &K {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &K::Elem {
        debug_assert!(r < self.rows && c < self.cols);
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: K::Elem) {
        debug_assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[K::Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| self.field.is_zero(e))
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.field.clone(), self.cols, self.rows, |r, c| {
            self.get(c, r).clone()
        })
    }

    /// Matrix product `self * rhs`. Shapes must agree (internal invariant).
    pub fn mul(&self, rhs: &Matrix<K>) -> Matrix<K> {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let f = &self.field;
        let mut out = Matrix::zero(f.clone(), self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if f.is_zero(a) {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = f.add(out.get(r, c), &f.mul(a, rhs.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[K::Elem]) -> Vec<K::Elem> {
        assert_eq!(
            v.len(),
            self.cols,
            "matrix-vector shape mismatch: {}x{} * {}",
            self.rows,
            self.cols,
            v.len()
        );
        let f = &self.field;
        (0..self.rows)
            .map(|r| {
                let mut acc = f.zero();
                for c in 0..self.cols {
                    acc = f.add(&acc, &f.mul(self.get(r, c), &v[c]));
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix<K>, Vec<usize>) {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            // find a row with a nonzero entry in column c
            let Some(pr) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let tmp = m.get(r, j).clone();
                    let v = m.get(pr, j).clone();
                    m.set(r, j, v);
                    m.set(pr, j, tmp);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in 0..m.cols {
                let v = f.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || f.is_zero(m.get(i, c)) {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}` as a subspace of the domain `K^cols`.
    pub fn kernel_basis(&self) -> Subspace<K> {
        let f = self.field.clone();
        let (rr, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut rows = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![f.zero(); self.cols];
            v[fc] = f.one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(rr.get(i, fc));
            }
            rows.push(v);
        }
        Subspace::from_rows(f, self.cols, rows)
    }

    /// Column space of the matrix as a subspace of the codomain `K^rows`.
    pub fn image_basis(&self) -> Subspace<K> {
        let cols: Vec<Vec<K::Elem>> = (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c).clone()).collect())
            .collect();
        Subspace::from_rows(self.field.clone(), self.rows, cols)
    }

    /// Image of a subspace of the domain under this matrix.
    pub fn push_subspace(&self, s: &Subspace<K>) -> Subspace<K> {
        assert_eq!(
            s.ambient(),
            self.cols,
            "push_subspace: subspace of K^{} under a {}x{} matrix",
            s.ambient(),
            self.rows,
            self.cols
        );
        let rows: Vec<Vec<K::Elem>> = (0..s.dim()).map(|i| self.apply(s.basis_row(i))).collect();
        Subspace::from_rows(self.field.clone(), self.rows, rows)
    }

    /// Preimage `{x : self * x in s}` of a subspace of the codomain.
    pub fn preimage_subspace(&self, s: &Subspace<K>) -> Subspace<K> {
        assert_eq!(
            s.ambient(),
            self.rows,
            "preimage_subspace: subspace of K^{} under a {}x{} matrix",
            s.ambient(),
            self.rows,
            self.cols
        );
        // rows of `ann` span the annihilator of s under the standard pairing,
        // so x lands in s iff (ann * self) x = 0.
        let ann = s.annihilator();
        if ann.dim() == 0 {
            return Subspace::full(self.field.clone(), self.cols);
        }
        ann.basis_matrix().mul(self).kernel_basis()
    }
}

/// A linear subspace of `K^ambient` in canonical (reduced row echelon) form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace<K: Field> {
    ambient: usize,
    basis: Matrix<K>, // RREF, no zero rows
}

impl<K: Field> Subspace<K> {
    pub fn zero(field: K, ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::zero(field, 0, ambient),
        }
    }

    pub fn full(field: K, ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(field, ambient),
        }
    }

    /// Canonicalises an arbitrary spanning set.
    pub fn from_rows(field: K, ambient: usize, rows: Vec<Vec<K::Elem>>) -> Self {
        let m = Matrix::from_rows(field.clone(), ambient, rows).expect("rows of ambient length");
        let (rr, pivots) = m.rref();
        let basis = Matrix::from_fn(field, pivots.len(), ambient, |r, c| rr.get(r, c).clone());
        Subspace { ambient, basis }
    }

    pub fn field(&self) -> &K {
        self.basis.field()
    }
    pub fn ambient(&self) -> usize {
        self.ambient
    }
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }
    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }
    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// The canonical basis matrix (rows are basis vectors, in RREF).
    pub fn basis_matrix(&self) -> &Matrix<K> {
        &self.basis
    }

    pub fn basis_row(&self, i: usize) -> &[K::Elem] {
        self.basis.row(i)
    }

    /// Pivot columns of the canonical basis.
    pub fn pivot_cols(&self) -> Vec<usize> {
        let f = self.field().clone();
        (0..self.dim())
            .map(|r| {
                (0..self.ambient)
                    .find(|&c| !f.is_zero(self.basis.get(r, c)))
                    .expect("basis rows are nonzero")
            })
            .collect()
    }

    /// Remainder of `v` after eliminating all pivot coordinates; the result is
    /// zero iff `v` lies in the subspace.
    pub fn reduce_vec(&self, v: &[K::Elem]) -> Vec<K::Elem> {
        assert_eq!(v.len(), self.ambient, "reduce_vec: ambient mismatch");
        let f = self.field().clone();
        let mut v = v.to_vec();
        for (r, &pc) in self.pivot_cols().iter().enumerate() {
            if f.is_zero(&v[pc]) {
                continue;
            }
            let factor = v[pc].clone();
            for c in 0..self.ambient {
                v[c] = f.sub(&v[c], &f.mul(&factor, self.basis.get(r, c)));
            }
        }
        v
    }

    pub fn contains_vec(&self, v: &[K::Elem]) -> bool {
        let f = self.field().clone();
        self.reduce_vec(v).iter().all(|e| f.is_zero(e))
    }

    pub fn contains(&self, other: &Subspace<K>) -> bool {
        assert_eq!(self.ambient, other.ambient, "contains: ambient mismatch");
        (0..other.dim()).all(|i| self.contains_vec(other.basis_row(i)))
    }

    /// Sum of two subspaces of the same ambient space.
    pub fn sum(&self, other: &Subspace<K>) -> Subspace<K> {
        assert_eq!(self.ambient, other.ambient, "sum: ambient mismatch");
        let mut rows: Vec<Vec<K::Elem>> = (0..self.dim()).map(|i| self.basis_row(i).to_vec()).collect();
        rows.extend((0..other.dim()).map(|i| other.basis_row(i).to_vec()));
        Subspace::from_rows(self.field().clone(), self.ambient, rows)
    }

    /// Intersection of two subspaces of the same ambient space.
    pub fn intersect(&self, other: &Subspace<K>) -> Subspace<K> {
        assert_eq!(self.ambient, other.ambient, "intersect: ambient mismatch");
        let f = self.field().clone();
        let (k, l) = (self.dim(), other.dim());
        if k == 0 || l == 0 {
            return Subspace::zero(f, self.ambient);
        }
        // Solve u^T A = v^T B: the kernel of [A^T | -B^T] gives the
        // coefficient pairs; the intersection is spanned by the u^T A.
        let stacked = Matrix::from_fn(f.clone(), self.ambient, k + l, |r, c| {
            if c < k {
                self.basis.get(c, r).clone()
            } else {
                f.neg(other.basis.get(c - k, r))
            }
        });
        let ker = stacked.kernel_basis();
        let rows: Vec<Vec<K::Elem>> = (0..ker.dim())
            .map(|i| {
                let uv = ker.basis_row(i);
                (0..self.ambient)
                    .map(|c| {
                        let mut acc = f.zero();
                        for j in 0..k {
                            acc = f.add(&acc, &f.mul(&uv[j], self.basis.get(j, c)));
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Subspace::from_rows(f, self.ambient, rows)
    }

    /// The annihilator `{f : f(v) = 0 for all v in self}` under the standard
    /// pairing, as a subspace of the (identified) dual.
    pub fn annihilator(&self) -> Subspace<K> {
        if self.dim() == 0 {
            return Subspace::full(self.field().clone(), self.ambient);
        }
        self.basis.kernel_basis()
    }

    /// Quotient scaffolding for `K^ambient / self`: a projection `proj`
    /// (`q x ambient`, kernel exactly `self`, surjective) and a section
    /// `lift` (`ambient x q`) with `proj * lift = identity`. The quotient
    /// coordinates are the non-pivot coordinates after reduction.
    pub fn quotient_maps(&self) -> (Matrix<K>, Matrix<K>) {
        let f = self.field().clone();
        let pivots = self.pivot_cols();
        let free: Vec<usize> = (0..self.ambient).filter(|c| !pivots.contains(c)).collect();
        let q = free.len();
        let mut proj = Matrix::zero(f.clone(), q, self.ambient);
        for j in 0..self.ambient {
            let mut e = vec![f.zero(); self.ambient];
            e[j] = f.one();
            let reduced = self.reduce_vec(&e);
            for (r, &fc) in free.iter().enumerate() {
                proj.set(r, j, reduced[fc].clone());
            }
        }
        let mut lift = Matrix::zero(f.clone(), self.ambient, q);
        for (r, &fc) in free.iter().enumerate() {
            lift.set(fc, r, f.one());
        }
        (proj, lift)
    }
}

/// Enumerates every subspace of `K^ambient` for a finite field `K`, by
/// Schubert cell: choose pivot columns, then fill the free entries in all
/// possible ways. Refuses once more than `budget` subspaces would be produced.
pub fn enumerate_subspaces<K: Field>(
    field: &K,
    ambient: usize,
    budget: u64,
) -> Result<Vec<Subspace<K>>> {
    let elems = field.elements().ok_or(Error::InfiniteField {
        op: "enumerate_subspaces",
    })?;
    let mut out: Vec<Subspace<K>> = Vec::new();
    let mut pivots = Vec::new();
    for k in 0..=ambient {
        enumerate_pivot_sets(field, &elems, ambient, k, 0, &mut pivots, &mut out, budget)?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_pivot_sets<K: Field>(
    field: &K,
    elems: &[K::Elem],
    ambient: usize,
    k: usize,
    start: usize,
    pivots: &mut Vec<usize>,
    out: &mut Vec<Subspace<K>>,
    budget: u64,
) -> Result<()> {
    if pivots.len() == k {
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (r, &p) in pivots.iter().enumerate() {
            for c in (p + 1)..ambient {
                if !pivots.contains(&c) {
                    free.push((r, c));
                }
            }
        }
        let mut basis = Matrix::zero(field.clone(), k, ambient);
        for (r, &p) in pivots.iter().enumerate() {
            basis.set(r, p, field.one());
        }
        fill_free_entries(field, elems, &free, 0, &mut basis, out, budget)?;
        return Ok(());
    }
    // Need enough columns to the right for the remaining pivots.
    for c in start..ambient {
        if ambient - c < k - pivots.len() {
            break;
        }
        pivots.push(c);
        enumerate_pivot_sets(field, elems, ambient, k, c + 1, pivots, out, budget)?;
        pivots.pop();
    }
    Ok(())
}

fn fill_free_entries<K: Field>(
    field: &K,
    elems: &[K::Elem],
    free: &[(usize, usize)],
    idx: usize,
    basis: &mut Matrix<K>,
    out: &mut Vec<Subspace<K>>,
    budget: u64,
) -> Result<()> {
    if idx == free.len() {
        if out.len() as u64 >= budget {
            return Err(Error::BudgetExceeded {
                op: "enumerate_subspaces",
                detail: format!("more than {budget} subspaces"),
            });
        }
        out.push(Subspace {
            ambient: basis.cols(),
            basis: basis.clone(),
        });
        return Ok(());
    }
    let (r, c) = free[idx];
    for e in elems {
        basis.set(r, c, e.clone());
        fill_free_entries(field, elems, free, idx + 1, basis, out, budget)?;
    }
    basis.set(r, c, field.zero());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, PrimeField, Rationals};

    fn qmat(rows: Vec<Vec<i64>>) -> Matrix<Rationals> {
        let cols = rows[0].len();
        Matrix::from_rows(
            Rationals,
            cols,
            rows.into_iter()
                .map(|r| r.into_iter().map(rat_int).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rref_canonical_over_q() {
        let m = qmat(vec![vec![2, 4], vec![1, 3]]);
        let (rr, pivots) = m.rref();
        assert_eq!(rr, Matrix::identity(Rationals, 2));
        assert_eq!(pivots, vec![0, 1]);

        let m = qmat(vec![vec![1, 2, 3], vec![2, 4, 6]]);
        let (rr, pivots) = m.rref();
        assert_eq!(pivots, vec![0]);
        assert_eq!(rr.row(0), &[rat_int(1), rat_int(2), rat_int(3)]);
        assert!(rr.row(1).iter().all(|e| *e == rat_int(0)));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn rref_with_fractional_pivots() {
        // [[1/2, 1], [1, 3]] reduces to the identity.
        let m = Matrix::from_rows(
            Rationals,
            2,
            vec![vec![rat(1, 2), rat_int(1)], vec![rat_int(1), rat_int(3)]],
        )
        .unwrap();
        assert_eq!(m.rref().0, Matrix::identity(Rationals, 2));
    }

    #[test]
    fn rank_nullity_holds() {
        let m = qmat(vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(m.rank() + k.dim(), m.cols());
        for i in 0..k.dim() {
            let img = m.apply(k.basis_row(i));
            assert!(img.iter().all(|e| *e == rat_int(0)));
        }
        assert_eq!(m.image_basis().dim(), m.rank());
    }

    #[test]
    fn kernel_over_f2() {
        let f2 = PrimeField::new(2).unwrap();
        let m = Matrix::from_rows(f2, 2, vec![vec![1u64, 1u64]]).unwrap();
        let k = m.kernel_basis();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis_row(0), &[1, 1]);
    }

    #[test]
    fn subspace_canonical_equality() {
        // Two spanning sets of the same plane in Q^3 canonicalise identically.
        let a = Subspace::from_rows(
            Rationals,
            3,
            vec![
                vec![rat_int(1), rat_int(1), rat_int(0)],
                vec![rat_int(0), rat_int(1), rat_int(1)],
            ],
        );
        let b = Subspace::from_rows(
            Rationals,
            3,
            vec![
                vec![rat_int(1), rat_int(2), rat_int(1)],
                vec![rat_int(2), rat_int(3), rat_int(1)],
            ],
        );
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
    }

    #[test]
    fn sum_and_intersection() {
        let e1 = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(0)]]);
        let e2 = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(0), rat_int(1)]]);
        let diag = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(1)]]);
        assert_eq!(e1.sum(&e2), Subspace::full(Rationals, 2));
        assert_eq!(e1.intersect(&e2), Subspace::zero(Rationals, 2));
        let plane = e1.sum(&e2);
        assert_eq!(plane.intersect(&diag), diag);
        // modular law sanity: (e1 + diag) ∩ e2 has dimension 1
        assert_eq!(e1.sum(&diag).intersect(&e2), e2);
    }

    #[test]
    fn containment_and_reduction() {
        let diag = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(2), rat_int(2)]]);
        assert!(diag.contains_vec(&[rat_int(5), rat_int(5)]));
        assert!(!diag.contains_vec(&[rat_int(1), rat_int(0)]));
        assert!(Subspace::full(Rationals, 2).contains(&diag));
        assert!(!diag.contains(&Subspace::full(Rationals, 2)));
    }

    #[test]
    fn push_and_preimage() {
        // m projects onto the first coordinate: (x, y) -> (x, 0).
        let m = qmat(vec![vec![1, 0], vec![0, 0]]);
        let line = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(0)]]);
        assert_eq!(m.preimage_subspace(&line), Subspace::full(Rationals, 2));
        let diag = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(1)]]);
        assert_eq!(m.push_subspace(&diag), line);
        // preimage of 0 is the kernel
        let z = Subspace::zero(Rationals, 2);
        assert_eq!(m.preimage_subspace(&z), m.kernel_basis());
        // push then preimage recovers at least the original
        assert!(m.preimage_subspace(&m.push_subspace(&diag)).contains(&diag));
    }

    #[test]
    fn quotient_maps_are_a_retraction() {
        let w = Subspace::from_rows(Rationals, 2, vec![vec![rat_int(1), rat_int(1)]]);
        let (proj, lift) = w.quotient_maps();
        assert_eq!((proj.rows(), proj.cols()), (1, 2));
        // kernel of proj is exactly w
        assert_eq!(proj.kernel_basis(), w);
        // proj * lift = identity on the quotient
        assert_eq!(proj.mul(&lift), Matrix::identity(Rationals, 1));
        // degenerate cases
        let (p0, l0) = Subspace::zero(Rationals, 2).quotient_maps();
        assert_eq!(p0, Matrix::identity(Rationals, 2));
        assert_eq!(l0, Matrix::identity(Rationals, 2));
        let (pf, _) = Subspace::full(Rationals, 2).quotient_maps();
        assert_eq!(pf.rows(), 0);
    }

    #[test]
    fn enumerate_subspaces_of_f2_squared() {
        let f2 = PrimeField::new(2).unwrap();
        let all = enumerate_subspaces(&f2, 2, 100).unwrap();
        // 1 + (number of lines = 3) + 1
        assert_eq!(all.len(), 5);
        let dims: Vec<usize> = all.iter().map(|s| s.dim()).collect();
        assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 3);
        // all distinct
        for i in 0..all.len() {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn galois_numbers_for_f2() {
        let f2 = PrimeField::new(2).unwrap();
        // #subspaces of F_2^d for d = 0..4: 1, 2, 5, 16, 67
        for (d, count) in [(0usize, 1usize), (1, 2), (2, 5), (3, 16), (4, 67)] {
            let all = enumerate_subspaces(&f2, d, 1000).unwrap();
            assert_eq!(all.len(), count, "d = {d}");
        }
    }

    #[test]
    fn enumerate_respects_budget() {
        let f2 = PrimeField::new(2).unwrap();
        let err = enumerate_subspaces(&f2, 4, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn enumerate_subspaces_over_f3() {
        let f3 = PrimeField::new(3).unwrap();
        // lines in F_3^2: (9-1)/(3-1) = 4, so 1 + 4 + 1 = 6 subspaces
        let all = enumerate_subspaces(&f3, 2, 100).unwrap();
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn zero_row_and_zero_col_matrices() {
        let m = Matrix::<Rationals>::zero(Rationals, 0, 3);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.kernel_basis(), Subspace::full(Rationals, 3));
        let m = Matrix::<Rationals>::zero(Rationals, 3, 0);
        assert_eq!(m.kernel_basis(), Subspace::zero(Rationals, 0));
        assert_eq!(m.image_basis(), Subspace::zero(Rationals, 3));
    }
}
