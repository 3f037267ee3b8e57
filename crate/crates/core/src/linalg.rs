//! Exact linear algebra over F_p: row-major matrices, canonical subspaces, and
//! exhaustive subspace enumeration.
//!
//! Subspaces are stored as bases in reduced row-echelon form with zero rows
//! stripped. The reduced echelon form of a row space is unique, so two
//! [`Subspace`] values are equal (as `Eq`/`Hash`/`Ord`) exactly when they are
//! the same subspace. Everything downstream leans on that canonicity: coset
//! representatives, tie-breaking in greedy searches, and byte-stable reports.
//!
//! Enumeration of all intermediate subspaces `b ⊆ C ⊆ a` walks the reduced
//! echelon forms of the quotient `a/b` dimension by dimension. It is guarded by
//! a hard cap on the quotient dimension because the count grows like p^(d²/4).

use crate::fp::Prime;
use itertools::Itertools;
use thiserror::Error;

/// Errors from matrix and subspace operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    /// Shapes (or ambient dimensions) disagree.
    #[error("dimension mismatch: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    /// Two operands live over different moduli.
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    /// The purported base of an enumeration is not contained in the top space.
    #[error("base subspace is not contained in the top subspace")]
    BaseNotContained,
    /// An exhaustive enumeration would exceed the configured cap.
    #[error("enumeration of {count} subspaces (quotient dimension {quotient}) exceeds cap {cap}")]
    EnumerationTooLarge {
        quotient: usize,
        cap: usize,
        count: u128,
    },
    /// A list of spanning vectors was expected to be linearly independent.
    #[error("vectors are linearly dependent")]
    DependentVectors,
}

/// A dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    p: Prime,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zero(p: Prime, rows: usize, cols: usize) -> Matrix {
        Matrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: Prime, n: usize) -> Matrix {
        let mut m = Matrix::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows, reducing every entry mod p.
    pub fn from_rows(p: Prime, cols: usize, rows: &[Vec<u32>]) -> Result<Matrix, LinalgError> {
        let mut m = Matrix::zero(p, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    left_rows: rows.len(),
                    left_cols: cols,
                    right_rows: 1,
                    right_cols: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, p.reduce(x));
            }
        }
        Ok(m)
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<u32> {
        self.row(i).to_vec()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    /// Stacks `other` below `self`.
    pub fn stack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_compatible(other)?;
        if self.cols != other.cols {
            return Err(self.shape_error(other));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            p: self.p,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Row vector times matrix: `v * self`, for `v` of length `rows()`.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.rows, "apply: vector length != row count");
        let mut out = vec![0u32; self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c % self.p.get() == 0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] = self.p.add(out[j], self.p.mul(c, self.get(i, j)));
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_compatible(other)?;
        if self.cols != other.rows {
            return Err(self.shape_error(other));
        }
        let mut out = Matrix::zero(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            let img = other.apply(self.row(i));
            for (j, x) in img.into_iter().enumerate() {
                out.set(i, j, x);
            }
        }
        Ok(out)
    }

    /// In-place reduction to reduced row-echelon form; returns pivot columns.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(pivot_row) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, pivot_row);
            let inv = p.inv(self.get(r, c));
            for j in 0..self.cols {
                self.set(r, j, p.mul(inv, self.get(r, j)));
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) != 0 {
                    let factor = self.get(i, c);
                    for j in 0..self.cols {
                        let x = p.sub(self.get(i, j), p.mul(factor, self.get(r, j)));
                        self.set(i, j, x);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        pivots
    }

    /// Reduced row-echelon form with zero rows stripped, plus pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.row_reduce();
        m.truncate_rows(pivots.len());
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.clone().row_reduce().len()
    }

    /// Solves `x * self = rhs` for a row vector `x` of length `rows()`.
    /// Returns a particular solution (free variables zero), or `None` if the
    /// system is inconsistent.
    pub fn solve_left(&self, rhs: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(rhs.len(), self.cols, "solve_left: rhs length != col count");
        let p = self.p;
        // Work on the transpose with an augmented column.
        let mut aug = Matrix::zero(p, self.cols, self.rows + 1);
        for i in 0..self.cols {
            for j in 0..self.rows {
                aug.set(i, j, self.get(j, i));
            }
            aug.set(i, self.rows, p.reduce(rhs[i]));
        }
        let pivots = aug.row_reduce();
        let mut x = vec![0u32; self.rows];
        for (r, &c) in pivots.iter().enumerate() {
            if c == self.rows {
                return None; // pivot in the augmented column: inconsistent
            }
            x[c] = aug.get(r, self.rows);
        }
        Some(x)
    }

    /// The left kernel `{ x : x * self = 0 }`, via row reduction of the
    /// block matrix `[self | I]`: rows whose left block vanishes carry a
    /// kernel basis in the right block.
    pub fn left_kernel(&self) -> Subspace {
        let p = self.p;
        let mut block = Matrix::zero(p, self.rows, self.cols + self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                block.set(i, j, self.get(i, j));
            }
            block.set(i, self.cols + i, 1);
        }
        block.row_reduce();
        let mut rows = Vec::new();
        for i in 0..self.rows {
            let left_zero = (0..self.cols).all(|j| block.get(i, j) == 0);
            if left_zero {
                let right: Vec<u32> = (self.cols..self.cols + self.rows)
                    .map(|j| block.get(i, j))
                    .collect();
                if !is_zero_vec(&right) {
                    rows.push(right);
                }
            }
        }
        Subspace::span(p, self.rows, &rows).unwrap()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn truncate_rows(&mut self, rows: usize) {
        self.data.truncate(rows * self.cols);
        self.rows = rows;
    }

    fn check_compatible(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.p != other.p {
            return Err(LinalgError::ModulusMismatch {
                left: self.p.get(),
                right: other.p.get(),
            });
        }
        Ok(())
    }

    fn shape_error(&self, other: &Matrix) -> LinalgError {
        LinalgError::DimensionMismatch {
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }
}

/// Adds `c * b` into `a` componentwise (mod p).
pub fn add_scaled(p: Prime, a: &mut [u32], b: &[u32], c: u32) {
    assert_eq!(a.len(), b.len());
    for (x, &y) in a.iter_mut().zip(b) {
        *x = p.add(*x, p.mul(c, y));
    }
}

/// Componentwise negation.
pub fn neg_vec(p: Prime, v: &[u32]) -> Vec<u32> {
    v.iter().map(|&x| p.neg(x)).collect()
}

/// Componentwise sum.
pub fn add_vecs(p: Prime, a: &[u32], b: &[u32]) -> Vec<u32> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| p.add(x, y)).collect()
}

/// Componentwise difference `a - b`.
pub fn sub_vecs(p: Prime, a: &[u32], b: &[u32]) -> Vec<u32> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| p.sub(x, y)).collect()
}

/// Scalar multiple.
pub fn scale_vec(p: Prime, c: u32, v: &[u32]) -> Vec<u32> {
    v.iter().map(|&x| p.mul(c, x)).collect()
}

pub fn is_zero_vec(v: &[u32]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// A linear subspace of F_p^ambient in canonical form.
///
/// The stored basis is the reduced row-echelon form of any spanning set, with
/// zero rows removed, so equality of `Subspace` values is equality of
/// subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(p: Prime, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::zero(p, 0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: Prime, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::identity(p, ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of the given rows.
    pub fn span(p: Prime, ambient: usize, rows: &[Vec<u32>]) -> Result<Subspace, LinalgError> {
        let m = Matrix::from_rows(p, ambient, rows)?;
        Ok(Subspace::from_matrix(&m))
    }

    /// Span of the rows of a matrix.
    pub fn from_matrix(m: &Matrix) -> Subspace {
        let (basis, pivots) = m.rref();
        Subspace {
            ambient: m.cols(),
            basis,
            pivots,
        }
    }

    /// Span of a single vector.
    pub fn line(p: Prime, v: &[u32]) -> Subspace {
        Subspace::span(p, v.len(), &[v.to_vec()]).unwrap()
    }

    pub fn modulus(&self) -> Prime {
        self.basis.modulus()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// The canonical (echelon) basis.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_rows(&self) -> Vec<Vec<u32>> {
        self.basis.iter_rows().map(|r| r.to_vec()).collect()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical coset representative: eliminates every pivot coordinate of
    /// this subspace from `v`. The result is zero iff `v` lies in the subspace.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.ambient, "reduce: ambient mismatch");
        let p = self.modulus();
        let mut out = v.iter().map(|&x| p.reduce(x)).collect::<Vec<_>>();
        for (i, &col) in self.pivots.iter().enumerate() {
            if out[col] != 0 {
                let c = p.neg(out[col]);
                add_scaled(p, &mut out, self.basis.row(i), c);
            }
        }
        out
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        is_zero_vec(&self.reduce(v))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter_rows().all(|r| other.contains(r))
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the subspace.
    ///
    /// Because the basis is reduced echelon, the coordinate along row `i` is
    /// just the entry of `v` at the i-th pivot column.
    pub fn coordinates_of(&self, v: &[u32]) -> Option<Vec<u32>> {
        if !self.contains(v) {
            return None;
        }
        let p = self.modulus();
        Some(self.pivots.iter().map(|&c| p.reduce(v[c])).collect())
    }

    /// Sum of subspaces.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        let stacked = self.basis.stack(&other.basis)?;
        Ok(Subspace::from_matrix(&stacked))
    }

    /// Adds a single vector to the span.
    pub fn with_vector(&self, v: &[u32]) -> Subspace {
        let other = Subspace::line(self.modulus(), v);
        self.sum(&other).unwrap()
    }

    /// Intersection via the Zassenhaus block construction: row-reducing
    /// [A | A; B | 0] makes the right block of the rows whose left block
    /// vanished a basis of the intersection.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.modulus() != other.modulus() {
            return Err(LinalgError::ModulusMismatch {
                left: self.modulus().get(),
                right: other.modulus().get(),
            });
        }
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.dim(),
                left_cols: self.ambient,
                right_rows: other.dim(),
                right_cols: other.ambient,
            });
        }
        let p = self.modulus();
        let n = self.ambient;
        let rows = self.dim() + other.dim();
        let mut block = Matrix::zero(p, rows, 2 * n);
        for (i, r) in self.basis.iter_rows().enumerate() {
            for j in 0..n {
                block.set(i, j, r[j]);
                block.set(i, n + j, r[j]);
            }
        }
        for (i, r) in other.basis.iter_rows().enumerate() {
            for j in 0..n {
                block.set(self.dim() + i, j, r[j]);
            }
        }
        block.row_reduce();
        let mut inter_rows = Vec::new();
        for i in 0..rows {
            let left_zero = (0..n).all(|j| block.get(i, j) == 0);
            let right = (n..2 * n).map(|j| block.get(i, j)).collect::<Vec<_>>();
            if left_zero && !is_zero_vec(&right) {
                inter_rows.push(right);
            }
        }
        Subspace::span(p, n, &inter_rows)
    }

    /// Canonical complement representatives of `self` inside `bigger`: the
    /// echelon rows of `bigger` whose pivot is not a pivot of `self`, each
    /// reduced modulo `self`. Their classes form a basis of `bigger / self`.
    pub fn complement_in(&self, bigger: &Subspace) -> Vec<Vec<u32>> {
        debug_assert!(self.is_subspace_of(bigger));
        bigger
            .basis
            .iter_rows()
            .zip(bigger.pivots.iter())
            .filter(|(_, piv)| !self.pivots.contains(piv))
            .map(|(row, _)| self.reduce(row))
            .collect()
    }

    /// Re-embeds into a larger ambient by zero-padding on the right.
    pub fn pad_to(&self, ambient: usize) -> Subspace {
        assert!(ambient >= self.ambient, "pad_to: ambient must not shrink");
        let rows: Vec<Vec<u32>> = self
            .basis
            .iter_rows()
            .map(|r| {
                let mut v = r.to_vec();
                v.resize(ambient, 0);
                v
            })
            .collect();
        // Padding with zero columns on the right preserves reduced echelon
        // form, so re-spanning is exact and cheap.
        Subspace::span(self.modulus(), ambient, &rows).unwrap()
    }

    /// Iterates over every element of the subspace (p^dim of them), in the
    /// canonical order given by base-p counters over the echelon basis.
    pub fn elements(&self) -> ElementIter<'_> {
        ElementIter {
            space: self,
            counter: vec![0; self.dim()],
            done: false,
        }
    }

    pub fn element_count(&self) -> u128 {
        (self.modulus().get() as u128).pow(self.dim() as u32)
    }
}

/// Iterator over all elements of a subspace.
pub struct ElementIter<'a> {
    space: &'a Subspace,
    counter: Vec<u32>,
    done: bool,
}

impl Iterator for ElementIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let p = self.space.modulus();
        let mut v = vec![0u32; self.space.ambient_dim()];
        for (i, &c) in self.counter.iter().enumerate() {
            if c != 0 {
                add_scaled(p, &mut v, self.space.basis().row(i), c);
            }
        }
        // Increment the base-p counter.
        let mut i = 0;
        loop {
            if i == self.counter.len() {
                self.done = true;
                break;
            }
            self.counter[i] += 1;
            if self.counter[i] < p.get() {
                break;
            }
            self.counter[i] = 0;
            i += 1;
        }
        Some(v)
    }
}

/// Number of subspaces of F_p^d (the Galois number), via the recurrence
/// G_{n+1} = 2 G_n + (p^n - 1) G_{n-1}.
pub fn subspace_count(p: Prime, d: usize) -> u128 {
    let q = p.get() as u128;
    let mut prev: u128 = 1; // G_0
    if d == 0 {
        return prev;
    }
    let mut cur: u128 = 2; // G_1
    let mut qn: u128 = 1;
    for _ in 1..d {
        let next = 2 * cur + (qn * q - 1) * prev;
        prev = cur;
        cur = next;
        qn *= q;
    }
    cur
}

/// Exhaustively enumerates every subspace `C` with `base ⊆ C ⊆ top`, in a
/// fixed order: quotient dimension ascending, then pivot-column sets in
/// lexicographic order, then free entries as ascending base-p counters.
///
/// The walk enumerates reduced echelon matrices in the quotient `top / base`
/// (one per intermediate subspace, so each `C` appears exactly once) and maps
/// them up through the canonical complement basis.
pub fn intermediate_subspaces(
    base: &Subspace,
    top: &Subspace,
    cap: usize,
) -> Result<IntermediateIter, LinalgError> {
    if !base.is_subspace_of(top) {
        return Err(LinalgError::BaseNotContained);
    }
    let quotient = top.dim() - base.dim();
    if quotient > cap {
        return Err(LinalgError::EnumerationTooLarge {
            quotient,
            cap,
            count: subspace_count(base.modulus(), quotient),
        });
    }
    Ok(IntermediateIter {
        base: base.clone(),
        complement: base.complement_in(top),
        quotient,
        rref_iter: RrefIter::new(base.modulus(), quotient),
    })
}

/// See [`intermediate_subspaces`].
#[derive(Debug)]
pub struct IntermediateIter {
    base: Subspace,
    complement: Vec<Vec<u32>>,
    quotient: usize,
    rref_iter: RrefIter,
}

impl Iterator for IntermediateIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        let rows = self.rref_iter.next()?;
        let p = self.base.modulus();
        let ambient = self.base.ambient_dim();
        let mut vecs = self.base.basis_rows();
        for row in &rows {
            let mut v = vec![0u32; ambient];
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    add_scaled(p, &mut v, &self.complement[j], c);
                }
            }
            vecs.push(v);
        }
        debug_assert!(rows.len() <= self.quotient);
        Some(Subspace::span(p, ambient, &vecs).unwrap())
    }
}

/// Enumerates all reduced row-echelon matrices over F_p^d, every rank:
/// rank ascending, pivot sets lexicographic, free entries counting up.
#[derive(Debug)]
struct RrefIter {
    p: Prime,
    d: usize,
    rank: usize,
    pivot_sets: std::vec::IntoIter<Vec<usize>>,
    current: Option<PivotBlock>,
}

#[derive(Debug)]
struct PivotBlock {
    pivots: Vec<usize>,
    /// Positions (row, col) that may hold arbitrary entries.
    free: Vec<(usize, usize)>,
    counter: Vec<u32>,
    exhausted: bool,
}

impl RrefIter {
    fn new(p: Prime, d: usize) -> RrefIter {
        let mut it = RrefIter {
            p,
            d,
            rank: 0,
            pivot_sets: Vec::new().into_iter(),
            current: None,
        };
        it.start_rank(0);
        it
    }

    fn start_rank(&mut self, rank: usize) {
        self.rank = rank;
        self.pivot_sets = (0..self.d)
            .combinations(rank)
            .collect::<Vec<_>>()
            .into_iter();
        self.advance_pivot_set();
    }

    fn advance_pivot_set(&mut self) {
        self.current = self.pivot_sets.next().map(|pivots| {
            let mut free = Vec::new();
            for (i, &pc) in pivots.iter().enumerate() {
                for c in pc + 1..self.d {
                    if !pivots.contains(&c) {
                        free.push((i, c));
                    }
                }
            }
            let len = free.len();
            PivotBlock {
                pivots,
                free,
                counter: vec![0; len],
                exhausted: false,
            }
        });
    }
}

impl Iterator for RrefIter {
    type Item = Vec<Vec<u32>>;

    fn next(&mut self) -> Option<Vec<Vec<u32>>> {
        loop {
            match &mut self.current {
                None => {
                    if self.rank >= self.d {
                        return None;
                    }
                    let next_rank = self.rank + 1;
                    self.start_rank(next_rank);
                }
                Some(block) if block.exhausted => {
                    self.advance_pivot_set();
                }
                Some(block) => {
                    let mut rows = vec![vec![0u32; self.d]; block.pivots.len()];
                    for (i, &pc) in block.pivots.iter().enumerate() {
                        rows[i][pc] = 1;
                    }
                    for (&(i, c), &x) in block.free.iter().zip(block.counter.iter()) {
                        rows[i][c] = x;
                    }
                    // Increment the free-entry counter.
                    let mut i = 0;
                    loop {
                        if i == block.counter.len() {
                            block.exhausted = true;
                            break;
                        }
                        block.counter[i] += 1;
                        if block.counter[i] < self.p.get() {
                            break;
                        }
                        block.counter[i] = 0;
                        i += 1;
                    }
                    return Some(rows);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn p3() -> Prime {
        Prime::new(3).unwrap()
    }

    /// Brute-force row-space oracle: the set of all linear combinations,
    /// computed without any elimination.
    fn span_set(p: Prime, ambient: usize, rows: &[Vec<u32>]) -> HashSet<Vec<u32>> {
        let mut set = HashSet::new();
        let mut counters = vec![0u32; rows.len()];
        loop {
            let mut v = vec![0u32; ambient];
            for (c, row) in counters.iter().zip(rows) {
                add_scaled(p, &mut v, row, *c);
            }
            set.insert(v);
            let mut i = 0;
            loop {
                if i == counters.len() {
                    return set;
                }
                counters[i] += 1;
                if counters[i] < p.get() {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn rref_two_by_two_frozen() {
        // Rows (2,1) and (1,2) over F_3 span the line through (1,2):
        // (2,1) = 2*(1,2) mod 3.
        let s = Subspace::span(p3(), 2, &[vec![2, 1], vec![1, 2]]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis_rows(), vec![vec![1, 2]]);
        let oracle = span_set(p3(), 2, &[vec![2, 1], vec![1, 2]]);
        let from_basis = span_set(p3(), 2, &s.basis_rows());
        assert_eq!(oracle, from_basis);
    }

    #[test]
    fn rref_strips_zero_rows_and_orders_pivots() {
        let s = Subspace::span(
            p3(),
            4,
            &[vec![0, 0, 0, 0], vec![1, 1, 1, 1], vec![2, 2, 2, 2], vec![0, 2, 0, 1]],
        )
        .unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.pivots(), &[0, 1]);
        assert_eq!(s.basis_rows(), vec![vec![1, 0, 1, 2], vec![0, 1, 0, 2]]);
        // Reduced echelon: pivot columns are cleared everywhere else.
        for (i, &c) in s.pivots().iter().enumerate() {
            for (j, row) in s.basis_rows().iter().enumerate() {
                assert_eq!(row[c], if i == j { 1 } else { 0 });
            }
        }
    }

    #[test]
    fn sum_and_contains_frozen() {
        let e1 = Subspace::line(p3(), &[1, 0, 0]);
        let e2 = Subspace::line(p3(), &[0, 1, 0]);
        let s = e1.sum(&e2).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[2, 1, 0]));
        assert!(!s.contains(&[0, 0, 1]));

        let t = Subspace::span(p3(), 3, &[vec![1, 1, 0], vec![0, 0, 1]]).unwrap();
        assert!(t.contains(&[1, 1, 2]));
        assert!(!t.contains(&[1, 0, 0]));
    }

    #[test]
    fn intersect_frozen() {
        let a = Subspace::span(p3(), 3, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let b = Subspace::span(p3(), 3, &[vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let i = a.intersect(&b).unwrap();
        assert_eq!(i, Subspace::line(p3(), &[0, 1, 0]));
    }

    #[test]
    fn coordinates_of_echelon_basis() {
        let s = Subspace::span(p3(), 4, &[vec![1, 0, 2, 0], vec![0, 1, 1, 0]]).unwrap();
        let p = p3();
        let mut v = vec![0u32; 4];
        add_scaled(p, &mut v, &s.basis().row_vec(0), 2);
        add_scaled(p, &mut v, &s.basis().row_vec(1), 1);
        assert_eq!(s.coordinates_of(&v), Some(vec![2, 1]));
        assert_eq!(s.coordinates_of(&[0, 0, 0, 1]), None);
    }

    #[test]
    fn complement_in_gives_quotient_basis() {
        let base = Subspace::line(p3(), &[1, 1, 0]);
        let top = Subspace::full(p3(), 3);
        let comp = base.complement_in(&top);
        assert_eq!(comp.len(), 2);
        let mut all = base.clone();
        for v in &comp {
            assert!(!all.contains(v));
            all = all.with_vector(v);
        }
        assert_eq!(all, top);
    }

    #[test]
    fn pad_to_preserves_membership() {
        let s = Subspace::span(p3(), 3, &[vec![1, 2, 0], vec![0, 0, 1]]).unwrap();
        let padded = s.pad_to(5);
        assert_eq!(padded.ambient_dim(), 5);
        assert_eq!(padded.dim(), s.dim());
        assert!(padded.contains(&[1, 2, 0, 0, 0]));
        assert!(!padded.contains(&[0, 0, 0, 1, 0]));
    }

    #[test]
    fn elements_iterates_all_vectors_once() {
        let s = Subspace::span(p3(), 3, &[vec![1, 0, 1], vec![0, 1, 2]]).unwrap();
        let elems: Vec<_> = s.elements().collect();
        assert_eq!(elems.len(), 9);
        let set: HashSet<_> = elems.into_iter().collect();
        assert_eq!(set.len(), 9);
        for v in &set {
            assert!(s.contains(v));
        }
    }

    /// Independent oracle: number of k-dim subspaces of F_q^n as the product
    /// formula for the Gaussian binomial, summed over k.
    fn galois_number_by_sum(q: u128, n: usize) -> u128 {
        (0..=n)
            .map(|k| {
                let mut num: u128 = 1;
                let mut den: u128 = 1;
                for i in 0..k {
                    num *= q.pow((n - i) as u32) - 1;
                    den *= q.pow((k - i) as u32) - 1;
                }
                num / den
            })
            .sum()
    }

    #[test]
    fn subspace_count_matches_gaussian_binomial_sums() {
        // Frozen anchors over F_3: 1, 2, 6, 28, 212, 2664, 56632.
        let expected: [u128; 7] = [1, 2, 6, 28, 212, 2664, 56632];
        for (d, &e) in expected.iter().enumerate() {
            assert_eq!(subspace_count(p3(), d), e, "G_{d} over F_3");
        }
        for q in [3u32, 5, 7, 11] {
            let p = Prime::new(q).unwrap();
            for d in 0..=6 {
                assert_eq!(
                    subspace_count(p, d),
                    galois_number_by_sum(q as u128, d),
                    "G_{d} over F_{q}"
                );
            }
        }
    }

    #[test]
    fn enumeration_counts_match_galois_numbers() {
        for d in 0..=4 {
            let base = Subspace::zero(p3(), d);
            let top = Subspace::full(p3(), d);
            let all: Vec<_> = intermediate_subspaces(&base, &top, 6).unwrap().collect();
            assert_eq!(all.len() as u128, subspace_count(p3(), d));
            let set: HashSet<_> = all.into_iter().collect();
            assert_eq!(set.len() as u128, subspace_count(p3(), d));
        }
    }

    #[test]
    fn enumeration_respects_bounds() {
        let base = Subspace::line(p3(), &[1, 0, 0, 0]);
        let top = Subspace::span(p3(), 4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 1]])
            .unwrap();
        let all: Vec<_> = intermediate_subspaces(&base, &top, 6).unwrap().collect();
        // Quotient dimension 2 over F_3: six subspaces.
        assert_eq!(all.len(), 6);
        for c in &all {
            assert!(base.is_subspace_of(c));
            assert!(c.is_subspace_of(&top));
        }
        // base == top yields exactly the base.
        let single: Vec<_> = intermediate_subspaces(&top, &top, 6).unwrap().collect();
        assert_eq!(single, vec![top.clone()]);
    }

    #[test]
    fn enumeration_cap_error_carries_count() {
        let base = Subspace::zero(p3(), 7);
        let top = Subspace::full(p3(), 7);
        let err = intermediate_subspaces(&base, &top, 6).unwrap_err();
        assert_eq!(
            err,
            LinalgError::EnumerationTooLarge {
                quotient: 7,
                cap: 6,
                count: 2_052_656,
            }
        );
    }

    #[test]
    fn enumeration_base_not_contained() {
        let base = Subspace::line(p3(), &[0, 0, 1]);
        let top = Subspace::span(p3(), 3, &[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        assert_eq!(
            intermediate_subspaces(&base, &top, 6).unwrap_err(),
            LinalgError::BaseNotContained
        );
    }

    #[test]
    fn mixed_modulus_is_rejected() {
        let a = Subspace::line(p3(), &[1, 0]);
        let b = Subspace::line(Prime::new(5).unwrap(), &[1, 0]);
        assert!(matches!(
            a.intersect(&b),
            Err(LinalgError::ModulusMismatch { left: 3, right: 5 })
        ));
    }

    #[test]
    fn solve_left_and_kernel() {
        let m = Matrix::from_rows(p3(), 3, &[vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 2]]).unwrap();
        // Row 3 = row 1 + row 2, so the kernel is spanned by (1, 1, -1).
        let k = m.left_kernel();
        assert_eq!(k.dim(), 1);
        assert!(k.contains(&[1, 1, 2]));
        let x = m.solve_left(&[1, 2, 0]).unwrap();
        assert_eq!(m.apply(&x), vec![1, 2, 0]);
        assert_eq!(m.solve_left(&[0, 0, 1]), None);
    }

    // --- property tests ---

    fn arb_vec(p: u32, n: usize) -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0..p, n)
    }

    fn arb_rows(p: u32, n: usize, max_rows: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
        proptest::collection::vec(arb_vec(p, n), 0..=max_rows)
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(rows in arb_rows(3, 5, 4)) {
            let m = Matrix::from_rows(p3(), 5, &rows).unwrap();
            let (r1, piv1) = m.rref();
            let (r2, piv2) = r1.rref();
            prop_assert_eq!(r1, r2);
            prop_assert_eq!(piv1, piv2);
        }

        #[test]
        fn subspace_canonical_under_row_ops(rows in arb_rows(3, 4, 3), c in 1u32..3, i in 0usize..3, j in 0usize..3) {
            let s1 = Subspace::span(p3(), 4, &rows).unwrap();
            // Apply a row operation (add c * row_j to row_i) and re-span.
            let mut mutated = rows.clone();
            if i < mutated.len() && j < mutated.len() && i != j {
                let rj = mutated[j].clone();
                add_scaled(p3(), &mut mutated[i], &rj, c);
            }
            let s2 = Subspace::span(p3(), 4, &mutated).unwrap();
            prop_assert_eq!(s1, s2);
        }

        #[test]
        fn intersect_matches_bruteforce(rows_a in arb_rows(3, 4, 3), rows_b in arb_rows(3, 4, 3)) {
            let a = Subspace::span(p3(), 4, &rows_a).unwrap();
            let b = Subspace::span(p3(), 4, &rows_b).unwrap();
            let i = a.intersect(&b).unwrap();
            let set_a = span_set(p3(), 4, &rows_a);
            let set_b = span_set(p3(), 4, &rows_b);
            let common: Vec<Vec<u32>> = set_a.intersection(&set_b).cloned().collect();
            let oracle = Subspace::span(p3(), 4, &common).unwrap();
            prop_assert_eq!(i, oracle);
        }

        #[test]
        fn modular_dimension_law(rows_a in arb_rows(3, 4, 3), rows_b in arb_rows(3, 4, 3)) {
            let a = Subspace::span(p3(), 4, &rows_a).unwrap();
            let b = Subspace::span(p3(), 4, &rows_b).unwrap();
            let sum = a.sum(&b).unwrap();
            let inter = a.intersect(&b).unwrap();
            prop_assert_eq!(sum.dim() + inter.dim(), a.dim() + b.dim());
        }

        #[test]
        fn reduce_is_coset_canonical(rows in arb_rows(3, 4, 3), v in arb_vec(3, 4), w in arb_vec(3, 4)) {
            let s = Subspace::span(p3(), 4, &rows).unwrap();
            let rv = s.reduce(&v);
            let rw = s.reduce(&w);
            let diff = sub_vecs(p3(), &v, &w);
            // Same coset iff same canonical representative.
            prop_assert_eq!(s.contains(&diff), rv == rw);
            // The representative is in the same coset as the input.
            prop_assert!(s.contains(&sub_vecs(p3(), &v, &rv)));
        }
    }
}
