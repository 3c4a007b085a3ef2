//! Truncated bosonic Fock space over a finite set of momentum modes.
//!
//! Modes live on the dual lattice of a periodic box of side `L`:
//! `k = 2π n / L` with integer labels `n` in `{-n_max, .., n_max}^d`.
//! The basis is the set of occupation vectors with total particle number
//! at most `n_cut`, enumerated by total number first and then
//! lexicographically — so the basis for a smaller cutoff is always a
//! prefix of the basis for a larger one over the same modes.
//!
//! Creation and annihilation operators are *hard-truncated*: matrix
//! elements that would leave the basis are dropped. Identities that hold
//! exactly in the untruncated theory therefore hold only on states that
//! stay away from the top layers; [`FockBasis::safe_indices`] selects
//! those states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Finite set of box momentum modes, with the dispersion data needed by
/// field operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    dim: usize,
    n_max: i64,
    box_length: f64,
    mass: f64,
    labels: Vec<Vec<i64>>,
}

impl ModeSet {
    pub fn new(space_dim: usize, n_max: i64, box_length: f64, mass: f64) -> Result<Self> {
        if space_dim == 0 || space_dim > 3 {
            return Err(Error::Parameter(format!(
                "space dimension must be 1..=3, got {space_dim}"
            )));
        }
        if n_max < 0 {
            return Err(Error::Parameter(format!("n_max must be >= 0, got {n_max}")));
        }
        if !(box_length > 0.0) || !(mass > 0.0) {
            return Err(Error::Parameter(format!(
                "box_length and mass must be positive, got ({box_length}, {mass})"
            )));
        }
        // Lexicographic enumeration of integer labels.
        let side = (2 * n_max + 1) as usize;
        let count = side.pow(space_dim as u32);
        let mut labels = Vec::with_capacity(count);
        let mut cur = vec![-n_max; space_dim];
        loop {
            labels.push(cur.clone());
            let mut axis = space_dim;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                if cur[axis] < n_max {
                    cur[axis] += 1;
                    for c in cur.iter_mut().skip(axis + 1) {
                        *c = -n_max;
                    }
                    break;
                } else if axis == 0 {
                    return Ok(ModeSet {
                        dim: space_dim,
                        n_max,
                        box_length,
                        mass,
                        labels,
                    });
                }
            }
        }
    }

    pub fn space_dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Box volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Number of modes `(2 n_max + 1)^d`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Vec<i64>] {
        &self.labels
    }

    /// Momentum vector of mode `i`.
    pub fn k(&self, i: usize) -> Vec<f64> {
        self.labels[i]
            .iter()
            .map(|n| 2.0 * std::f64::consts::PI * *n as f64 / self.box_length)
            .collect()
    }

    /// Euclidean norm of the momentum of mode `i`.
    pub fn k_norm(&self, i: usize) -> f64 {
        self.k(i).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest momentum norm over the set.
    pub fn k_norm_max(&self) -> f64 {
        (0..self.len()).map(|i| self.k_norm(i)).fold(0.0, f64::max)
    }

    /// On-shell energy `k0 = sqrt(‖k‖² + m²)` of mode `i`.
    pub fn k0(&self, i: usize) -> f64 {
        let k2: f64 = self.k(i).iter().map(|c| c * c).sum();
        (k2 + self.mass * self.mass).sqrt()
    }
}

/// Number of occupation vectors over `modes` modes with total at most
/// `n_cut` (computed in wide arithmetic so capacity checks do not
/// overflow).
pub fn basis_size(modes: usize, n_cut: u32) -> u128 {
    // sum_{n=0..n_cut} C(n + modes - 1, modes - 1)  =  C(n_cut + modes, modes)
    let mut acc: u128 = 1;
    for j in 1..=modes as u128 {
        acc = acc * (n_cut as u128 + j) / j;
    }
    acc
}

/// Occupation-number basis of the truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: ModeSet,
    n_cut: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl FockBasis {
    /// Enumerate all occupation vectors with total particle number at
    /// most `n_cut`, graded by total then lexicographic. `max_dim` is a
    /// capacity guard: enumeration larger than that is refused.
    pub fn new(modes: ModeSet, n_cut: u32, max_dim: usize) -> Result<Self> {
        let predicted = basis_size(modes.len(), n_cut);
        if predicted > max_dim as u128 {
            return Err(Error::Capacity(format!(
                "basis would have {predicted} states (limit {max_dim})"
            )));
        }
        let m = modes.len();
        let mut states = Vec::with_capacity(predicted as usize);
        for total in 0..=n_cut {
            enumerate_layer(m, total, &mut states);
        }
        let index = states
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        Ok(FockBasis {
            modes,
            n_cut,
            states,
            index,
        })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_cut(&self) -> u32 {
        self.n_cut
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn occupation(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    /// Total particle number of basis state `i`.
    pub fn total(&self, i: usize) -> u32 {
        self.states[i].iter().sum()
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Indices of states with total number at most `n_cut - margin`.
    /// On these states, polynomials of degree `margin` in the ladder
    /// operators act exactly as in the untruncated space.
    pub fn safe_indices(&self, margin: u32) -> Result<Vec<usize>> {
        if margin > self.n_cut {
            return Err(Error::Parameter(format!(
                "safe margin {margin} exceeds particle cutoff {}",
                self.n_cut
            )));
        }
        let keep = self.n_cut - margin;
        Ok((0..self.dim()).filter(|&i| self.total(i) <= keep).collect())
    }

    /// The vacuum state as a dense vector.
    pub fn vacuum(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }

    /// Smeared creation operator `a⁺(ψ) = Σ_m ψ_m a⁺_m`, hard-truncated
    /// at the particle cutoff. `psi` has one amplitude per mode.
    pub fn a_plus(&self, psi: &[C64]) -> Result<SparseOp> {
        if psi.len() != self.modes.len() {
            return Err(Error::Shape(format!(
                "amplitude vector has {} entries for {} modes",
                psi.len(),
                self.modes.len()
            )));
        }
        let dim = self.dim();
        let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        let mut scratch: Vec<u32> = Vec::new();
        for (j, occ) in self.states.iter().enumerate() {
            let total: u32 = occ.iter().sum();
            if total >= self.n_cut {
                continue; // transitions above the cutoff are dropped
            }
            for (m, amp) in psi.iter().enumerate() {
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                scratch.clear();
                scratch.extend_from_slice(occ);
                scratch[m] += 1;
                let i = self.index[scratch.as_slice()];
                cols[j].push((i, amp * ((occ[m] + 1) as f64).sqrt()));
            }
        }
        Ok(SparseOp { dim, cols })
    }

    /// Smeared annihilation operator, the adjoint of `a⁺(ψ)`:
    /// `a⁻(ψ) = Σ_m ψ̄_m a_m`.
    pub fn a_minus(&self, psi: &[C64]) -> Result<SparseOp> {
        Ok(self.a_plus(psi)?.adjoint())
    }

    /// Creation operator of a single mode.
    pub fn a_plus_mode(&self, mode: usize) -> Result<SparseOp> {
        let mut psi = vec![C64::default(); self.modes.len()];
        psi[mode] = C64::new(1.0, 0.0);
        self.a_plus(&psi)
    }

    /// Number operator of a single mode (diagonal).
    pub fn number_op(&self, mode: usize) -> SparseOp {
        let cols = (0..self.dim())
            .map(|j| vec![(j, C64::new(self.states[j][mode] as f64, 0.0))])
            .collect();
        SparseOp {
            dim: self.dim(),
            cols,
        }
    }

    /// Hermitian inner product, antilinear in the first argument.
    pub fn inner(&self, f: &DVector<C64>, g: &DVector<C64>) -> C64 {
        f.dotc(g)
    }
}

fn enumerate_layer(modes: usize, total: u32, out: &mut Vec<Vec<u32>>) {
    // Lexicographic enumeration of compositions of `total` into `modes`
    // parts.
    fn rec(modes: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if modes == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for take in 0..=left {
            cur.push(take);
            rec(modes - 1, left - take, cur, out);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(modes);
    rec(modes, total, &mut cur, out);
}

/// Column-sparse complex operator on the truncated Fock space. Ladder
/// polynomials are very sparse (a handful of entries per column), which
/// keeps operator products cheap even when the dense dimension is large.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        SparseOp {
            dim,
            cols: vec![Vec::new(); dim],
        }
    }

    /// Build from explicit columns (entries `(row, value)` per column).
    pub fn from_cols(dim: usize, cols: Vec<Vec<(usize, C64)>>) -> Self {
        assert_eq!(cols.len(), dim);
        SparseOp { dim, cols }
    }

    pub fn identity(dim: usize) -> Self {
        SparseOp {
            dim,
            cols: (0..dim).map(|j| vec![(j, C64::new(1.0, 0.0))]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> SparseOp {
        let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i].push((j, v.conj()));
            }
        }
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
        }
        SparseOp { dim: self.dim, cols }
    }

    pub fn scale(&self, c: C64) -> SparseOp {
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|&(i, v)| (i, c * v)).collect())
            .collect();
        SparseOp { dim: self.dim, cols }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SparseOp, c: C64) -> SparseOp {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut cols = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mut map: HashMap<usize, C64> = HashMap::new();
            for &(i, v) in &self.cols[j] {
                *map.entry(i).or_default() += v;
            }
            for &(i, v) in &other.cols[j] {
                *map.entry(i).or_default() += c * v;
            }
            let mut col: Vec<(usize, C64)> =
                map.into_iter().filter(|(_, v)| v.norm_sqr() > 0.0).collect();
            col.sort_by_key(|e| e.0);
            cols.push(col);
        }
        SparseOp { dim: self.dim, cols }
    }

    /// Operator product `self * other`.
    pub fn matmul(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut cols = Vec::with_capacity(self.dim);
        let mut scratch: Vec<C64> = vec![C64::default(); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for j in 0..self.dim {
            for &(mid, v) in &other.cols[j] {
                for &(i, w) in &self.cols[mid] {
                    if scratch[i].norm_sqr() == 0.0 {
                        touched.push(i);
                    }
                    scratch[i] += w * v;
                }
            }
            touched.sort_unstable();
            let col: Vec<(usize, C64)> = touched
                .iter()
                .map(|&i| {
                    let v = scratch[i];
                    scratch[i] = C64::default();
                    (i, v)
                })
                .filter(|(_, v)| v.norm_sqr() > 0.0)
                .collect();
            touched.clear();
            cols.push(col);
        }
        SparseOp { dim: self.dim, cols }
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &SparseOp) -> SparseOp {
        self.matmul(other)
            .add_scaled(&other.matmul(self), C64::new(-1.0, 0.0))
    }

    /// Apply to a dense vector.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.dim);
        let mut out = DVector::zeros(self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            let x = v[j];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for &(i, w) in col {
                out[i] += w * x;
            }
        }
        out
    }

    /// Keep only the leading `new_dim` rows and columns. Because bases
    /// over the same modes are prefix-compatible, this is the orthogonal
    /// projection onto the smaller truncated space.
    pub fn project_prefix(&self, new_dim: usize) -> SparseOp {
        assert!(new_dim <= self.dim);
        let cols = self.cols[..new_dim]
            .iter()
            .map(|col| col.iter().copied().filter(|&(i, _)| i < new_dim).collect())
            .collect();
        SparseOp {
            dim: new_dim,
            cols,
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Largest entry magnitude of the matrix restricted to the given
    /// rows and columns (used for residuals on safe subspaces).
    pub fn max_abs_on(&self, keep: &[usize]) -> f64 {
        let mask: std::collections::HashSet<usize> = keep.iter().copied().collect();
        let mut best = 0.0f64;
        for &j in keep {
            for &(i, v) in &self.cols[j] {
                if mask.contains(&i) {
                    best = best.max(v.norm());
                }
            }
        }
        best
    }
}
