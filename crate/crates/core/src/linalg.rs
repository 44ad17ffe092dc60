//! Small dense linear algebra: a row-major matrix, a thin SVD for tall
//! matrices with few columns, minimum-norm least squares and the Kronecker
//! singular basis of `ȳᵀ ⊗ Uᵀ`.
//!
//! The SVD diagonalizes the `n × n` Gram matrix `AᵀA` with cyclic Jacobi
//! rotations. Singular values are then read off as `‖A v_i‖` rather than
//! `sqrt(λ_i)`, which keeps tiny singular values (exact rank deficiency) near
//! machine precision instead of near `sqrt(eps)`.

use crate::error::{check_finite, check_len, Error, Result};

/// Default relative threshold below which singular values are dropped.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        check_len(rows * cols, data.len())?;
        check_finite("matrix", &data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            check_len(n_cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(n_rows, n_cols, data)
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_cols(cols: &[Vec<f64>]) -> Result<Self> {
        let n_cols = cols.len();
        let n_rows = cols.first().map_or(0, Vec::len);
        let mut data = vec![0.0; n_rows * n_cols];
        for (j, col) in cols.iter().enumerate() {
            check_len(n_rows, col.len())?;
            for (i, &v) in col.iter().enumerate() {
                data[i * n_cols + j] = v;
            }
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ b`.
    pub fn tr_mul_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, b.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, &bi) in b.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * bi;
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_len(self.cols, other.rows)?;
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Largest absolute entry-wise difference; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Rank-`r` factorization `A = U diag(sigma) Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    /// `m × r`, orthonormal columns.
    pub u: Matrix,
    /// Non-increasing, all above `rank_tol * sigma[0]`.
    pub sigma: Vec<f64>,
    /// `n × r`, orthonormal columns.
    pub v: Matrix,
    pub rank: usize,
}

impl ThinSvd {
    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[i * n + j] = (0..self.rank)
                    .map(|k| self.u.get(i, k) * self.sigma[k] * self.v.get(j, k))
                    .sum();
            }
        }
        Matrix {
            rows: m,
            cols: n,
            data,
        }
    }

    /// Minimum-norm solution of `diag(sigma) Vᵀ x = w`, i.e. `V diag(sigma)⁻¹ w`.
    pub fn solve_coefficients(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rank, w.len())?;
        let scaled: Vec<f64> = w.iter().zip(&self.sigma).map(|(wi, s)| wi / s).collect();
        self.v.mul_vec(&scaled)
    }
}

/// Thin SVD of `a`, keeping singular values above `rank_tol * sigma_max`.
pub fn thin_svd(a: &Matrix, rank_tol: f64) -> Result<ThinSvd> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "rank_tol must lie in (0, 1), got {rank_tol}"
        )));
    }
    check_finite("matrix", a.as_slice())?;
    let (m, n) = (a.rows(), a.cols());

    let mut gram = vec![0.0; n * n];
    for i in 0..m {
        let row = a.row(i);
        for p in 0..n {
            for q in p..n {
                gram[p * n + q] += row[p] * row[q];
            }
        }
    }
    for p in 0..n {
        for q in 0..p {
            gram[p * n + q] = gram[q * n + p];
        }
    }
    let eigvecs = jacobi_eigenvectors(&mut gram, n);

    // (sigma, A v, v) per eigenvector.
    let mut triples: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..n)
        .map(|k| {
            let v: Vec<f64> = (0..n).map(|i| eigvecs[i * n + k]).collect();
            let av = a.mul_vec(&v).expect("shape checked");
            (norm2(&av), av, v)
        })
        .collect();
    triples.sort_by(|x, y| y.0.total_cmp(&x.0));

    let sigma_max = triples[0].0;
    if sigma_max == 0.0 {
        return Err(Error::RankZero);
    }
    let threshold = rank_tol * sigma_max;
    triples.retain(|t| t.0 > threshold);
    let rank = triples.len();

    let mut u_cols = Vec::with_capacity(rank);
    let mut v_cols = Vec::with_capacity(rank);
    let mut sigma = Vec::with_capacity(rank);
    for (s, mut av, mut v) in triples {
        if sign_of_dominant(&v) < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
            av.iter_mut().for_each(|x| *x = -*x);
        }
        av.iter_mut().for_each(|x| *x /= s);
        sigma.push(s);
        u_cols.push(av);
        v_cols.push(v);
    }
    modified_gram_schmidt(&mut u_cols);

    Ok(ThinSvd {
        u: Matrix::from_cols(&u_cols)?,
        sigma,
        v: Matrix::from_cols(&v_cols)?,
        rank,
    })
}

/// Minimum-norm minimizer of `‖A x − b‖₂` through the thin SVD pseudo-inverse.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    check_len(a.rows(), b.len())?;
    check_finite("right-hand side", b)?;
    let svd = thin_svd(a, DEFAULT_RANK_TOL)?;
    let w = svd.u.tr_mul_vec(b)?;
    svd.solve_coefficients(&w)
}

/// Right singular vectors of `K = ȳᵀ ⊗ U_Aᵀ`: the `m² × r` matrix whose
/// column `i` is `ȳ ⊗ u_i`. All singular values of `K` equal one.
pub fn kron_singular_basis(y_bar: &[f64], u_a: &Matrix) -> Result<Matrix> {
    let m = y_bar.len();
    check_len(m, u_a.rows())?;
    check_finite("y_bar", y_bar)?;
    let norm = norm2(y_bar);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "y_bar must have unit norm, got {norm}"
        )));
    }
    let r = u_a.cols();
    let mut data = vec![0.0; m * m * r];
    for (j, &yj) in y_bar.iter().enumerate() {
        for k in 0..m {
            for i in 0..r {
                data[(j * m + k) * r + i] = yj * u_a.get(k, i);
            }
        }
    }
    Matrix::new(m * m, r, data)
}

fn sign_of_dominant(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn modified_gram_schmidt(cols: &mut [Vec<f64>]) {
    for k in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(k);
        let col = &mut rest[0];
        for q in done.iter() {
            let proj = dot(q, col);
            for (c, qi) in col.iter_mut().zip(q) {
                *c -= proj * qi;
            }
        }
        let nrm = norm2(col);
        col.iter_mut().for_each(|c| *c /= nrm);
    }
}

/// Cyclic Jacobi on a symmetric `n × n` row-major matrix. On return `a` is
/// (numerically) diagonal; the result holds the eigenvectors as columns.
fn jacobi_eigenvectors(a: &mut [f64], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return v;
    }
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let negligible = apq.abs() <= 1e-3 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt()
                    || apq.abs() <= tiny * scale;
                if negligible {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    v
}
