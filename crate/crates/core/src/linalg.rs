//! Small dense complex linear algebra: just what zero-forcing needs.

use num_complex::Complex64;

use crate::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "CMat::from_rows: wrong data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(Complex64::new(0.0, 0.0));
    }

    /// Largest row Euclidean norm.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows).map(|r| norm_sq(self.row(r)).sqrt()).fold(0.0, f64::max)
    }
}

/// `Σ |x_i|²`, accumulated left to right.
pub fn norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Bilinear (unconjugated) product `Σ a_i b_i`, i.e. `aᵀb`.
pub fn dot_t(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian product `Σ conj(a_i) b_i`, i.e. `aᴴb`.
pub fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Thin QR factorization of the `m × n` matrix (`m ≥ n`) whose columns are `cols`.
///
/// Householder reflections; returns the `n` orthonormal columns of `Q`
/// (each of length `m`) and the upper triangular `R` as row-major `n × n`.
/// A diagonal entry of `R` below `1e-12` times the largest column norm is
/// reported as rank deficiency.
#[derive(Debug, Clone)]
pub struct ThinQr {
    pub q: Vec<Vec<Complex64>>,
    pub r: CMat,
}

pub fn thin_qr(cols: &[Vec<Complex64>]) -> Result<ThinQr> {
    let n = cols.len();
    let m = cols.first().map_or(0, |c| c.len());
    if n > m {
        return Err(Error::RankDeficient { pivot: 0.0 });
    }
    let scale = cols.iter().map(|c| norm_sq(c).sqrt()).fold(0.0, f64::max);
    let mut a: Vec<Vec<Complex64>> = cols.to_vec();
    let mut vs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut r = CMat::zeros(n, n);
    let zero = Complex64::new(0.0, 0.0);

    for j in 0..n {
        let x = &a[j][j..];
        let s = norm_sq(x).sqrt();
        if !(s > 1e-12 * scale) || scale == 0.0 {
            return Err(Error::RankDeficient {
                pivot: if scale > 0.0 { s / scale } else { 0.0 },
            });
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * s;
        let mut v: Vec<Complex64> = x.to_vec();
        v[0] -= alpha;
        let vv = norm_sq(&v);
        // apply I − 2vvᴴ/(vᴴv) to the remaining columns
        for col in a.iter_mut().skip(j + 1) {
            let y = &mut col[j..];
            let f = dot_h(&v, y) * (2.0 / vv);
            for (yi, vi) in y.iter_mut().zip(&v) {
                *yi -= vi * f;
            }
        }
        r.set(j, j, alpha);
        for (k, col) in a.iter().enumerate().skip(j + 1) {
            r.set(j, k, col[j]);
        }
        let inv = 1.0 / vv.sqrt();
        vs.push(v.into_iter().map(|z| z * inv).collect());
    }

    let mut q = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![zero; m];
        e[j] = Complex64::new(1.0, 0.0);
        for (i, v) in vs.iter().enumerate().rev() {
            let y = &mut e[i..];
            let f = dot_h(v, y) * 2.0;
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi -= vi * f;
            }
        }
        q.push(e);
    }
    Ok(ThinQr { q, r })
}

/// Solves `Rᴴ y = b` for upper triangular `R` (forward substitution on the adjoint).
pub fn solve_upper_adjoint(r: &CMat, b: &[Complex64]) -> Vec<Complex64> {
    let n = r.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut acc = y[i];
        for j in 0..i {
            acc -= r.get(j, i).conj() * y[j];
        }
        y[i] = acc / r.get(i, i).conj();
    }
    y
}

/// In-place Cholesky `A = L·Lᴴ` of a Hermitian positive definite `n × n`
/// row-major matrix; the lower triangle is overwritten with `L`, the strict
/// upper triangle is left untouched. A pivot `L_jj² ≤ rel_pivot·max_i A_ii`
/// is reported as rank deficiency.
pub fn cholesky_in_place(a: &mut [Complex64], n: usize, rel_pivot: f64) -> Result<()> {
    let scale = (0..n).map(|i| a[i * n + i].re).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if !(d > rel_pivot * scale) {
            return Err(Error::RankDeficient {
                pivot: if scale > 0.0 { d.max(0.0) / scale } else { 0.0 },
            });
        }
        let ljj = d.sqrt();
        a[j * n + j] = Complex64::new(ljj, 0.0);
        let inv = 1.0 / ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s * inv;
        }
    }
    Ok(())
}

/// Solves `L·Lᴴ x = b` in place given the factor from [`cholesky_in_place`].
pub fn cholesky_solve(l: &[Complex64], n: usize, b: &mut [Complex64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i].re;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i].conj() * b[k];
        }
        b[i] = s / l[i * n + i].re;
    }
}

/// Diagonal of `(L·Lᴴ)⁻¹`: entry `l` is `‖L⁻¹e_l‖²`.
pub fn cholesky_inverse_diag(l: &[Complex64], n: usize, out: &mut [f64], scratch: &mut [Complex64]) {
    let zero = Complex64::new(0.0, 0.0);
    for col in 0..n {
        scratch[..n].fill(zero);
        let mut acc = 0.0;
        for i in col..n {
            let mut s = if i == col { Complex64::new(1.0, 0.0) } else { zero };
            for k in col..i {
                s -= l[i * n + k] * scratch[k];
            }
            let v = s / l[i * n + i].re;
            scratch[i] = v;
            acc += v.norm_sqr();
        }
        out[col] = acc;
    }
}
