//! The exterior square of F_p^n: wedge vectors, induced maps, Leibniz lifts,
//! and the decomposability scan.
//!
//! A vector of the exterior square is stored by its coefficients on the
//! canonical basis `{e_i ∧ e_j : i < j}`, flattened in lexicographic order of
//! `(i, j)`. Degree-1 linear maps induce maps on wedges through
//! `e_i ∧ e_j ↦ σ(e_i) ∧ σ(e_j)`; a linear map `f` defined on a subspace
//! induces the Leibniz lift `x ∧ y ↦ f(x) ∧ y + x ∧ f(y)`, the degree-2 shadow
//! of a graded derivation.
//!
//! Decomposability (`w = v ∧ w'` for some vectors) is equivalent to the
//! associated antisymmetric matrix having rank 2, and is decided by an
//! exhaustive scan of the nonzero elements of a subspace up to scalar, guarded
//! by a cap on the element count.

use crate::fp::Prime;
use crate::linalg::{add_scaled, add_vecs, is_zero_vec, scale_vec, Matrix, Subspace};
use thiserror::Error;

/// Default cap on `p^dim` for the decomposability scan.
pub const DEFAULT_SCAN_CAP: u128 = 1_000_000;

/// Errors from exterior-square operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExteriorError {
    /// Operands disagree on the degree-1 dimension or modulus.
    #[error("ambient mismatch: expected degree-1 dimension {expected}, got {got}")]
    AmbientMismatch { expected: usize, got: usize },
    /// An exhaustive element scan would exceed its cap.
    #[error("scan of {count} elements exceeds cap {cap}")]
    ScanTooLarge { count: u128, cap: u128 },
    /// A wedge vector was expected to lie in the wedge square of a subspace.
    #[error("wedge vector does not lie in the wedge square of the domain")]
    NotInWedgeSquare,
}

/// Number of basis wedges `e_i ∧ e_j`, `i < j < n`.
pub fn pair_count(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// Flat position of the basis wedge `e_i ∧ e_j` (requires `i < j < n`).
pub fn pair_to_flat(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n, "pair_to_flat: need i < j < n");
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`pair_to_flat`].
pub fn flat_to_pair(n: usize, mut k: usize) -> (usize, usize) {
    debug_assert!(k < pair_count(n));
    for i in 0..n {
        let block = n - 1 - i;
        if k < block {
            return (i, i + 1 + k);
        }
        k -= block;
    }
    unreachable!("flat index out of range")
}

/// An element of the exterior square of F_p^n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WedgeVector {
    p: Prime,
    n: usize,
    coeffs: Vec<u32>,
}

impl WedgeVector {
    pub fn zero(p: Prime, n: usize) -> WedgeVector {
        WedgeVector {
            p,
            n,
            coeffs: vec![0; pair_count(n)],
        }
    }

    pub fn from_coeffs(p: Prime, n: usize, coeffs: Vec<u32>) -> WedgeVector {
        assert_eq!(coeffs.len(), pair_count(n), "coefficient length mismatch");
        WedgeVector {
            p,
            n,
            coeffs: coeffs.into_iter().map(|c| p.reduce(c)).collect(),
        }
    }

    /// Builds from sparse triples `(i, j, c)` meaning `c * e_i ∧ e_j`; indices
    /// may come in either order (the sign flips accordingly) and repeated
    /// pairs accumulate.
    pub fn from_triples(p: Prime, n: usize, triples: &[(usize, usize, u32)]) -> WedgeVector {
        let mut w = WedgeVector::zero(p, n);
        for &(i, j, c) in triples {
            w.add_term(i, j, c);
        }
        w
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn degree1_dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient on `e_i ∧ e_j`, for any `i != j` (antisymmetric in the
    /// argument order).
    pub fn coeff(&self, i: usize, j: usize) -> u32 {
        if i < j {
            self.coeffs[pair_to_flat(self.n, i, j)]
        } else {
            self.p.neg(self.coeffs[pair_to_flat(self.n, j, i)])
        }
    }

    /// Adds `c * e_i ∧ e_j` in place.
    pub fn add_term(&mut self, i: usize, j: usize, c: u32) {
        assert!(i != j, "wedge basis term needs distinct indices");
        let (pos, val) = if i < j {
            (pair_to_flat(self.n, i, j), self.p.reduce(c))
        } else {
            (pair_to_flat(self.n, j, i), self.p.neg(c))
        };
        self.coeffs[pos] = self.p.add(self.coeffs[pos], val);
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.coeffs)
    }

    pub fn add(&self, other: &WedgeVector) -> WedgeVector {
        assert_eq!(self.n, other.n, "wedge add: ambient mismatch");
        WedgeVector {
            p: self.p,
            n: self.n,
            coeffs: add_vecs(self.p, &self.coeffs, &other.coeffs),
        }
    }

    pub fn scale(&self, c: u32) -> WedgeVector {
        WedgeVector {
            p: self.p,
            n: self.n,
            coeffs: scale_vec(self.p, c, &self.coeffs),
        }
    }

    pub fn neg(&self) -> WedgeVector {
        self.scale(self.p.neg(1))
    }

    pub fn sub(&self, other: &WedgeVector) -> WedgeVector {
        self.add(&other.neg())
    }

    /// The associated antisymmetric n x n matrix `M[i][j] = coeff(i, j)`.
    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zero(self.p, self.n, self.n);
        for k in 0..self.coeffs.len() {
            let (i, j) = flat_to_pair(self.n, k);
            m.set(i, j, self.coeffs[k]);
            m.set(j, i, self.p.neg(self.coeffs[k]));
        }
        m
    }

    /// The support: the smallest subspace `W` with `self ∈ ∧²W`, which is the
    /// row space of the associated antisymmetric matrix.
    pub fn support(&self) -> Subspace {
        Subspace::from_matrix(&self.to_matrix())
    }

    /// Re-embeds into a larger degree-1 ambient, remapping flat positions.
    pub fn pad_to(&self, n: usize) -> WedgeVector {
        assert!(n >= self.n, "pad_to: ambient must not shrink");
        let mut out = WedgeVector::zero(self.p, n);
        for k in 0..self.coeffs.len() {
            if self.coeffs[k] != 0 {
                let (i, j) = flat_to_pair(self.n, k);
                out.coeffs[pair_to_flat(n, i, j)] = self.coeffs[k];
            }
        }
        out
    }
}

/// The wedge `x ∧ y` of two degree-1 vectors.
pub fn wedge(p: Prime, x: &[u32], y: &[u32]) -> WedgeVector {
    assert_eq!(x.len(), y.len(), "wedge: length mismatch");
    let n = x.len();
    let mut w = WedgeVector::zero(p, n);
    for i in 0..n {
        for j in i + 1..n {
            let c = p.sub(p.mul(x[i], y[j]), p.mul(x[j], y[i]));
            w.coeffs[pair_to_flat(n, i, j)] = c;
        }
    }
    w
}

/// Span of all wedges of pairs of basis vectors of `sub`: the wedge square
/// `∧² sub` as a subspace of the flat wedge ambient.
pub fn wedge_square_span(sub: &Subspace) -> Subspace {
    let p = sub.modulus();
    let n = sub.ambient_dim();
    let rows: Vec<Vec<u32>> = basis_wedges(sub)
        .into_iter()
        .map(|w| w.coeffs)
        .collect();
    Subspace::span(p, pair_count(n), &rows).unwrap()
}

/// The wedges `d_r ∧ d_s`, `r < s`, of the canonical basis of `sub`, in
/// lexicographic order of `(r, s)`. For linearly independent `d_r` these are
/// linearly independent.
pub fn basis_wedges(sub: &Subspace) -> Vec<WedgeVector> {
    let p = sub.modulus();
    let k = sub.dim();
    let mut out = Vec::with_capacity(pair_count(k.max(1)));
    for r in 0..k {
        for s in r + 1..k {
            out.push(wedge(p, sub.basis().row(r), sub.basis().row(s)));
        }
    }
    out
}

/// The map induced on exterior squares by a degree-1 linear map.
///
/// The underlying map sends the i-th source basis vector to row i of `map`;
/// the induced map sends `e_i ∧ e_j` to `map(e_i) ∧ map(e_j)`.
#[derive(Debug, Clone)]
pub struct InducedWedgeMap {
    source_dim: usize,
    target_dim: usize,
    matrix: Matrix,
}

impl InducedWedgeMap {
    pub fn new(map: &Matrix) -> InducedWedgeMap {
        let p = map.modulus();
        let m = map.rows();
        let n = map.cols();
        let mut matrix = Matrix::zero(p, pair_count(m), pair_count(n));
        for i in 0..m {
            for j in i + 1..m {
                let w = wedge(p, map.row(i), map.row(j));
                let r = pair_to_flat(m, i, j);
                for (c, &x) in w.coeffs().iter().enumerate() {
                    matrix.set(r, c, x);
                }
            }
        }
        InducedWedgeMap {
            source_dim: m,
            target_dim: n,
            matrix,
        }
    }

    pub fn apply(&self, w: &WedgeVector) -> WedgeVector {
        assert_eq!(w.degree1_dim(), self.source_dim, "induced map: ambient mismatch");
        WedgeVector::from_coeffs(
            self.matrix.modulus(),
            self.target_dim,
            self.matrix.apply(w.coeffs()),
        )
    }

    /// Image of a subspace of the source wedge ambient.
    pub fn apply_subspace(&self, sub: &Subspace) -> Subspace {
        let rows: Vec<Vec<u32>> = sub
            .basis_rows()
            .into_iter()
            .map(|r| {
                self.apply(&WedgeVector::from_coeffs(
                    self.matrix.modulus(),
                    self.source_dim,
                    r,
                ))
                .coeffs
            })
            .collect();
        Subspace::span(self.matrix.modulus(), pair_count(self.target_dim), &rows).unwrap()
    }
}

/// The Leibniz lift of a linear map `f` defined on a subspace `domain`:
/// on wedges of domain vectors, `x ∧ y ↦ f(x) ∧ y + x ∧ f(y)`.
///
/// `images` row i is the image of the i-th canonical basis vector of the
/// domain; images live in the same ambient. The lift is well defined on all of
/// `∧² domain` because the defining formula is bilinear and alternating in
/// `(x, y)`, so it does not depend on the choice of expression.
#[derive(Debug, Clone)]
pub struct LeibnizLift {
    domain: Subspace,
    images: Matrix,
    /// Rows: wedges of domain basis pairs, in lex order of `(r, s)`.
    basis_wedge_matrix: Matrix,
    /// Lift images of those basis wedges, same order.
    lifted: Vec<WedgeVector>,
}

impl LeibnizLift {
    pub fn new(domain: &Subspace, images: &Matrix) -> LeibnizLift {
        assert_eq!(images.rows(), domain.dim(), "one image per basis vector");
        assert_eq!(images.cols(), domain.ambient_dim(), "images in same ambient");
        let p = domain.modulus();
        let n = domain.ambient_dim();
        let k = domain.dim();
        let mut rows = Vec::new();
        let mut lifted = Vec::new();
        for r in 0..k {
            for s in r + 1..k {
                let dr = domain.basis().row(r);
                let ds = domain.basis().row(s);
                rows.push(wedge(p, dr, ds).coeffs);
                let lift = wedge(p, images.row(r), ds).add(&wedge(p, dr, images.row(s)));
                lifted.push(lift);
            }
        }
        let basis_wedge_matrix = Matrix::from_rows(p, pair_count(n), &rows).unwrap();
        LeibnizLift {
            domain: domain.clone(),
            images: images.clone(),
            basis_wedge_matrix,
            lifted,
        }
    }

    pub fn domain(&self) -> &Subspace {
        &self.domain
    }

    pub fn images(&self) -> &Matrix {
        &self.images
    }

    /// Applies the lift to `w ∈ ∧² domain`.
    pub fn apply(&self, w: &WedgeVector) -> Result<WedgeVector, ExteriorError> {
        let p = self.domain.modulus();
        let n = self.domain.ambient_dim();
        if w.degree1_dim() != n {
            return Err(ExteriorError::AmbientMismatch {
                expected: n,
                got: w.degree1_dim(),
            });
        }
        let coords = self
            .basis_wedge_matrix
            .solve_left(w.coeffs())
            .ok_or(ExteriorError::NotInWedgeSquare)?;
        let mut out = WedgeVector::zero(p, n);
        for (c, lift) in coords.iter().zip(&self.lifted) {
            if *c != 0 {
                out = out.add(&lift.scale(*c));
            }
        }
        Ok(out)
    }

    /// Applies the lift to each canonical generator of a subspace of
    /// `∧² domain`, preserving the generator correspondence.
    pub fn apply_generators(&self, sub: &Subspace) -> Result<Vec<WedgeVector>, ExteriorError> {
        let p = self.domain.modulus();
        let n = self.domain.ambient_dim();
        sub.basis_rows()
            .into_iter()
            .map(|r| self.apply(&WedgeVector::from_coeffs(p, n, r)))
            .collect()
    }
}

/// Searches a subspace of the wedge ambient for a nonzero decomposable
/// element, scanning all nonzero elements up to scalar in a fixed order
/// (leading basis coefficient normalized to 1, remaining coefficients as
/// ascending base-p counters).
///
/// Returns vectors `(v, w)` with `v ∧ w` equal to the element found, exactly.
/// `n` is the degree-1 dimension; `sub` lives in the flat wedge ambient.
pub fn find_decomposable(
    n: usize,
    sub: &Subspace,
    cap: u128,
) -> Result<Option<(Vec<u32>, Vec<u32>)>, ExteriorError> {
    assert_eq!(
        sub.ambient_dim(),
        pair_count(n),
        "subspace does not live in the wedge ambient of F^{n}"
    );
    let count = sub.element_count();
    if count > cap {
        return Err(ExteriorError::ScanTooLarge { count, cap });
    }
    let p = sub.modulus();
    let d = sub.dim();
    // Projective representatives: leading coefficient 1 at position `lead`,
    // zero before, arbitrary after.
    for lead in 0..d {
        let tail = d - lead - 1;
        let mut counter = vec![0u32; tail];
        loop {
            let mut flat = sub.basis().row_vec(lead);
            for (t, &c) in counter.iter().enumerate() {
                if c != 0 {
                    add_scaled(p, &mut flat, sub.basis().row(lead + 1 + t), c);
                }
            }
            let w = WedgeVector::from_coeffs(p, n, flat);
            if let Some(pair) = decompose_rank_two(&w) {
                return Ok(Some(pair));
            }
            let mut i = 0;
            loop {
                if i == counter.len() {
                    // exhausted this leading position
                    break;
                }
                counter[i] += 1;
                if counter[i] < p.get() {
                    break;
                }
                counter[i] = 0;
                i += 1;
            }
            if counter.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    Ok(None)
}

/// If `w` is decomposable (associated matrix of rank 2), returns `(v, v')`
/// with `v ∧ v' == w` exactly; `None` otherwise.
///
/// Canonical choice: `v` is the first nonzero row of the associated matrix
/// normalized to leading coefficient 1; `v'` is the next row independent of
/// `v`, scaled so the wedge matches, then reduced modulo `⟨v⟩`.
pub fn decompose_rank_two(w: &WedgeVector) -> Option<(Vec<u32>, Vec<u32>)> {
    let p = w.modulus();
    let m = w.to_matrix();
    if m.rank() != 2 {
        return None;
    }
    let first = (0..m.rows()).find(|&i| !is_zero_vec(m.row(i)))?;
    let lead = m.row(first).iter().position(|&x| x != 0).unwrap();
    let v1 = scale_vec(p, p.inv(m.get(first, lead)), m.row(first));
    let line = Subspace::line(p, &v1);
    let second = (first + 1..m.rows()).find(|&i| !line.contains(m.row(i)))?;
    let mut v2 = m.row_vec(second);
    // Fix the scale so that v1 ∧ v2 equals w on some nonzero coordinate, then
    // verify the full equality (guaranteed for rank 2).
    let probe = wedge(p, &v1, &v2);
    let k = probe.coeffs().iter().position(|&x| x != 0)?;
    let lambda = p.mul(w.coeffs()[k], p.inv(probe.coeffs()[k]));
    v2 = scale_vec(p, lambda, &v2);
    v2 = line.reduce(&v2);
    debug_assert_eq!(&wedge(p, &v1, &v2), w, "rank-2 decomposition must reproduce the element");
    Some((v1, v2))
}
