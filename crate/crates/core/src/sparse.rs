//! Compressed-row complex matrices and basis-bound operators.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::FockBasis;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for hermiticity and operator-identity checks.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Complex matrix in CSR layout with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Build from coordinate triplets. Duplicates are summed and entries
    /// that cancel exactly are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
            if let (Some(&lr), Some(&lc)) = (rows.last(), indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            values.push(v);
        }
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_idx = Vec::with_capacity(rows.len());
        let mut keep_val = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != C64::new(0.0, 0.0) {
                keep_rows.push(r);
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for &r in &keep_rows {
            indptr[r + 1] += 1;
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices: keep_idx,
            values: keep_val,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        match self.indices[lo..hi].binary_search(&c) {
            Ok(k) => self.values[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "vector length mismatch");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Real-valued matvec; valid only when every stored value is real.
    pub fn mul_vec_real(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "vector length mismatch");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v.re * x[c]).sum())
            .collect()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        let trips = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, trips)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: C64, other: &CsrMatrix, b: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "shape mismatch");
        let trips = self
            .iter()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.iter().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, trips)
    }

    pub fn matmul(&self, rhs: &CsrMatrix) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "inner dimension mismatch");
        let mut trips = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); rhs.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; rhs.ncols];
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trips.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                mark[c] = false;
            }
            touched.clear();
        }
        Self::from_triplets(self.nrows, rhs.ncols, trips)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0)).max_abs()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Keep only the rows and columns selected by the maps (old -> new).
    fn reindex(
        &self,
        row_map: &[Option<usize>],
        new_rows: usize,
        col_map: &[Option<usize>],
        new_cols: usize,
    ) -> (Self, f64) {
        let mut dropped: f64 = 0.0;
        let mut trips = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.iter() {
            match (row_map[r], col_map[c]) {
                (Some(nr), Some(nc)) => trips.push((nr, nc, v)),
                _ => dropped = dropped.max(v.norm()),
            }
        }
        (Self::from_triplets(new_rows, new_cols, trips), dropped)
    }
}

/// A sparse matrix bound to explicit domain and codomain bases.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    domain: Arc<FockBasis>,
    codomain: Arc<FockBasis>,
    matrix: CsrMatrix,
    hermitian: bool,
}

impl SparseOperator {
    pub fn new(domain: Arc<FockBasis>, codomain: Arc<FockBasis>, matrix: CsrMatrix) -> Self {
        assert_eq!(matrix.ncols(), domain.dim());
        assert_eq!(matrix.nrows(), codomain.dim());
        SparseOperator {
            domain,
            codomain,
            matrix,
            hermitian: false,
        }
    }

    /// Flag the operator hermitian after checking it.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let dev = self.hermiticity_error()?;
        if dev > IDENTITY_TOL * (1.0 + self.matrix.max_abs()) {
            return Err(Error::NotHermitian(dev));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn hermiticity_error(&self) -> Result<f64> {
        if !self.domain.same_space(&self.codomain) {
            return Err(Error::BasisMismatch("hermiticity needs equal domain and codomain".into()));
        }
        Ok(self.matrix.max_abs_diff(&self.matrix.adjoint()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn domain(&self) -> &Arc<FockBasis> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FockBasis> {
        &self.codomain
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(amps)
    }

    /// `self * rhs`: apply `rhs` first.
    pub fn compose(&self, rhs: &SparseOperator) -> Result<SparseOperator> {
        if !rhs.codomain.same_space(&self.domain) {
            return Err(Error::BasisMismatch(format!(
                "cannot compose: inner bases {:?} vs {:?}",
                rhs.codomain.filter(),
                self.domain.filter()
            )));
        }
        Ok(SparseOperator::new(
            rhs.domain.clone(),
            self.codomain.clone(),
            self.matrix.matmul(&rhs.matrix),
        ))
    }

    fn check_same_shape(&self, other: &SparseOperator) -> Result<()> {
        if !self.domain.same_space(&other.domain) || !self.codomain.same_space(&other.codomain) {
            return Err(Error::BasisMismatch("operators act between different bases".into()));
        }
        Ok(())
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: C64, other: &SparseOperator, b: C64) -> Result<SparseOperator> {
        self.check_same_shape(other)?;
        let mut out = SparseOperator::new(
            self.domain.clone(),
            self.codomain.clone(),
            self.matrix.lin_comb(a, &other.matrix, b),
        );
        out.hermitian = self.hermitian && other.hermitian && a.im == 0.0 && b.im == 0.0;
        Ok(out)
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn scale(&self, s: C64) -> SparseOperator {
        let mut out = SparseOperator::new(self.domain.clone(), self.codomain.clone(), self.matrix.scale(s));
        out.hermitian = self.hermitian && s.im == 0.0;
        out
    }

    pub fn scale_real(&self, s: f64) -> SparseOperator {
        self.scale(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> SparseOperator {
        let mut out = SparseOperator::new(self.codomain.clone(), self.domain.clone(), self.matrix.adjoint());
        out.hermitian = self.hermitian;
        out
    }

    /// `[self, other]` for operators on one common basis.
    pub fn commutator(&self, other: &SparseOperator) -> Result<SparseOperator> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.lin_comb(C64::new(1.0, 0.0), &ba, C64::new(-1.0, 0.0))
    }

    pub fn max_abs_diff(&self, other: &SparseOperator) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.matrix.max_abs_diff(&other.matrix))
    }

    /// Restrict the codomain to `target`, a subset of the current codomain.
    /// Fails if a dropped entry exceeds `leak_tol` in magnitude.
    pub fn restrict_codomain(&self, target: &Arc<FockBasis>, leak_tol: f64) -> Result<SparseOperator> {
        if !target.is_subset_of(&self.codomain) {
            return Err(Error::BasisMismatch("restriction target is not a subset".into()));
        }
        let row_map: Vec<Option<usize>> = self.codomain.states().iter().map(|s| target.index_of(s)).collect();
        let col_map: Vec<Option<usize>> = (0..self.domain.dim()).map(Some).collect();
        let (m, leak) = self.matrix.reindex(&row_map, target.dim(), &col_map, self.domain.dim());
        if leak > leak_tol {
            return Err(Error::BlockLeak { leak });
        }
        Ok(SparseOperator::new(self.domain.clone(), target.clone(), m))
    }

    /// Restrict both domain and codomain to `target` (a subset of each).
    pub fn restrict(&self, target: &Arc<FockBasis>, leak_tol: f64) -> Result<SparseOperator> {
        if !target.is_subset_of(&self.codomain) || !target.is_subset_of(&self.domain) {
            return Err(Error::BasisMismatch("restriction target is not a subset".into()));
        }
        let row_map: Vec<Option<usize>> = self.codomain.states().iter().map(|s| target.index_of(s)).collect();
        let col_map: Vec<Option<usize>> = self.domain.states().iter().map(|s| target.index_of(s)).collect();
        let (m, _) = self.matrix.reindex(&row_map, target.dim(), &col_map, target.dim());
        // Leakage only matters for columns we keep.
        let mut leak: f64 = 0.0;
        for (r, c, v) in self.matrix.iter() {
            if col_map[c].is_some() && row_map[r].is_none() {
                leak = leak.max(v.norm());
            }
        }
        if leak > leak_tol {
            return Err(Error::BlockLeak { leak });
        }
        let mut out = SparseOperator::new(target.clone(), target.clone(), m);
        out.hermitian = self.hermitian;
        Ok(out)
    }

    /// `<psi| A |psi>` for `psi` given on the domain basis. Codomain states
    /// missing from the domain contribute nothing.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        let image = self.apply(psi);
        self.codomain
            .states()
            .iter()
            .zip(image.iter())
            .filter_map(|(s, v)| self.domain.index_of(s).map(|j| psi[j].conj() * v))
            .sum()
    }

    /// Coordinate-list dump: one `row col re im` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# rows={} cols={} nnz={}", self.matrix.nrows(), self.matrix.ncols(), self.matrix.nnz())?;
        for (r, c, v) in self.matrix.iter() {
            writeln!(out, "{} {} {:.17e} {:.17e}", r, c, v.re, v.im)?;
        }
        Ok(())
    }
}
