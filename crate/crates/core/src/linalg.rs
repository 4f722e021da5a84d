//! Dense and banded complex linear algebra for finite operator models.
//!
//! Dense factorizations come from nalgebra. Large banded systems (lattice
//! windows in lexicographic order) use a partial-pivoting band LU so that a
//! single row of an inverse is available without forming the dense inverse.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coefficient::{ONE, ZERO};
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Dimension up to which singular values come from a dense SVD.
pub const DENSE_SVD_LIMIT: usize = 800;

/// Iteration cap for inverse power iteration.
const POWER_ITERATIONS: usize = 300;

/// Relative change at which inverse power iteration stops.
const POWER_TOL: f64 = 1e-10;

/// Lower and upper bandwidth of a square matrix (exact zeros ignored).
pub fn bandwidths(a: &CMatrix) -> (usize, usize) {
    let mut kl = 0;
    let mut ku = 0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)] != ZERO {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
    }
    (kl, ku)
}

/// Whether the banded path applies: total band below 10% of the dimension.
pub fn prefers_banded(a: &CMatrix) -> bool {
    let (kl, ku) = bandwidths(a);
    let n = a.nrows();
    n > 0 && 10 * (kl + ku + 1) < n
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Conjugate transpose.
pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// Largest entrywise modulus of `a - b` over the given rows and columns.
pub fn max_difference_on(a: &CMatrix, b: &CMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    let mut m = 0.0f64;
    for &i in rows {
        for &j in cols {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Largest entrywise modulus of `a - b`.
pub fn max_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sym = (a + a.adjoint()).scale(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let sym = (a + a.adjoint()).scale(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Dense inverse; fails when LU finds the matrix singular.
pub fn dense_inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone().lu().try_inverse().ok_or(Error::Singular {
        min_singular_value: 0.0,
    })
}

/// Smallest singular value: dense SVD for small matrices, otherwise inverse
/// power iteration on `AᴴA` with banded solves. The iterate converges from
/// above; with clustered small singular values it stops at an upper estimate
/// accurate to a few digits, which suffices for a singularity margin.
pub fn min_singular_value(a: &CMatrix) -> Result<f64> {
    let n = a.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if n <= DENSE_SVD_LIMIT || !prefers_banded(a) {
        return Ok(a
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min));
    }
    let fa = match BandLu::factor(&BandMatrix::from_dense(a)) {
        Ok(f) => f,
        Err(_) => return Ok(0.0),
    };
    let fh = match BandLu::factor(&BandMatrix::from_dense(&a.adjoint())) {
        Ok(f) => f,
        Err(_) => return Ok(0.0),
    };
    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut est = 0.0f64;
    for _ in 0..POWER_ITERATIONS {
        // w = (AᴴA)⁻¹ v = A⁻¹ A⁻ᴴ v
        let w = fa.solve(&fh.solve(&v));
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Ok(0.0);
        }
        v = w.into_iter().map(|z| z / norm).collect();
        let prev = est;
        est = norm;
        if (est - prev).abs() <= POWER_TOL * est {
            break;
        }
    }
    Ok(1.0 / est.sqrt())
}

/// Row `c` of `A⁻¹`, computed from `Aᵀu = e_c`.
pub fn inverse_row(a: &CMatrix, c: usize) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let mut e = vec![ZERO; n];
    e[c] = ONE;
    if prefers_banded(a) {
        let lu = BandLu::factor(&BandMatrix::from_dense(&a.transpose()))?;
        Ok(lu.solve(&e))
    } else {
        let lu = a.transpose().lu();
        let b = nalgebra::DVector::from_vec(e);
        let x = lu.solve(&b).ok_or(Error::Singular {
            min_singular_value: 0.0,
        })?;
        Ok(x.iter().copied().collect())
    }
}

/// Square band matrix with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i-kl ..= i+ku`.
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![ZERO; n * (kl + ku + 1)],
        }
    }

    pub fn from_dense(a: &CMatrix) -> Self {
        let (kl, ku) = bandwidths(a);
        let n = a.nrows();
        let mut b = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                b.set(i, j, a[(i, j)]);
            }
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.slot(i, j).map_or(ZERO, |s| self.data[s])
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = v;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

/// Band LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    /// Upper bandwidth of U after pivoting fill-in.
    ku: usize,
    width: usize,
    /// Row `i` holds columns `i-kl ..= i+ku`; multipliers sit below the diagonal.
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let ku = a.kl + a.ku;
        let width = kl + ku + 1;
        let mut data = vec![ZERO; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(a.kl);
            let hi = (i + a.ku).min(n.saturating_sub(1));
            for j in lo..=hi {
                data[idx(i, j)] = a.get(i, j);
            }
        }
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let mut p = k;
            let mut best = data[idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = data[idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || best <= f64::EPSILON * scale * 1e-4 {
                return Err(Error::Singular {
                    min_singular_value: best,
                });
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    data.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = data[idx(k, k)];
            for i in k + 1..=last_row {
                let l = data[idx(i, k)] / pivot;
                data[idx(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = data[idx(k, j)];
                    data[idx(i, j)] -= l * u;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            width,
            data,
            pivots,
        })
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.width + (j + self.kl - i)]
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != ZERO {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.at(i, k) * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.ku).min(n - 1) {
                s -= self.at(k, j) * x[j];
            }
            x[k] = s / self.at(k, k);
        }
        x
    }
}

/// Write an operator as CSV: index records first, then every entry in
/// row-major order.
pub fn write_operator_csv<W: std::io::Write>(
    out: W,
    index: &[String],
    a: &CMatrix,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "row", "col", "element", "re", "im"])?;
    for (i, e) in index.iter().enumerate() {
        w.write_record(["index", &i.to_string(), "", e, "", ""])?;
    }
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)];
            w.write_record([
                "entry",
                &i.to_string(),
                &j.to_string(),
                "",
                &format!("{:e}", v.re),
                &format!("{:e}", v.im),
            ])?;
        }
    }
    w.flush()
}

/// Binary layout, little endian: magic `TCAOP001`, `u64` dimension `n`,
/// `u64` coordinate count `d`, `n·d` `i64` coordinates of the index
/// elements, then `n·n` pairs of `f64` (re, im) in row-major order.
pub fn write_operator_binary<W: std::io::Write>(
    mut out: W,
    index: &[Vec<i64>],
    a: &CMatrix,
) -> std::io::Result<()> {
    let d = index.first().map_or(0, Vec::len);
    out.write_all(b"TCAOP001")?;
    out.write_all(&(a.nrows() as u64).to_le_bytes())?;
    out.write_all(&(d as u64).to_le_bytes())?;
    for coords in index {
        for c in coords {
            out.write_all(&c.to_le_bytes())?;
        }
    }
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.write_all(&a[(i, j)].re.to_le_bytes())?;
            out.write_all(&a[(i, j)].im.to_le_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tridiagonal(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(2.0)
            } else if j == i + 1 {
                Complex64::new(0.0, 1.0)
            } else if i == j + 1 {
                c(-1.0)
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn bandwidths_of_tridiagonal() {
        assert_eq!(bandwidths(&tridiagonal(6)), (1, 1));
        assert!(prefers_banded(&tridiagonal(40)));
        assert!(!prefers_banded(&tridiagonal(10)));
    }

    #[test]
    fn band_solve_needs_pivoting() {
        // zero leading diagonal entry forces a row swap
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[ZERO, c(1.0), ZERO, c(1.0), ZERO, c(2.0), ZERO, c(3.0), c(1.0)],
        );
        let lu = BandLu::factor(&BandMatrix::from_dense(&a)).unwrap();
        let b = vec![c(1.0), c(2.0), c(3.0)];
        let x = lu.solve(&b);
        let ax = &a * nalgebra::DVector::from_vec(x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_band_matrix_is_reported() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        assert!(matches!(
            BandLu::factor(&BandMatrix::from_dense(&a)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn inverse_row_matches_dense_inverse() {
        let a = tridiagonal(60);
        let inv = dense_inverse(&a).unwrap();
        let row = inverse_row(&a, 30).unwrap();
        for (j, v) in row.iter().enumerate() {
            assert!((v - inv[(30, j)]).norm() < 1e-13);
        }
    }

    #[test]
    fn power_iteration_matches_svd() {
        // banded matrix with an isolated small singular value
        let n = 900;
        let a = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(if i == n / 2 { 0.05 } else { 4.0 })
            } else if i.abs_diff(j) == 1 {
                Complex64::new(0.0, 1.0)
            } else {
                ZERO
            }
        });
        let want = a.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        let got = min_singular_value(&a).unwrap();
        assert!((got - want).abs() < 1e-8 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn hermitian_spectrum() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), c(2.0)]);
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!((operator_norm(&a) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn csv_layout_lists_index_first() {
        let mut buf = Vec::new();
        let a = CMatrix::from_row_slice(1, 1, &[Complex64::new(0.5, -1.0)]);
        write_operator_csv(&mut buf, &["(0)".into()], &a).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "kind,row,col,element,re,im\nindex,0,,(0),,\nentry,0,0,,5e-1,-1e0\n");
        let mut bin = Vec::new();
        write_operator_binary(&mut bin, &[vec![0]], &a).unwrap();
        assert_eq!(bin.len(), 8 + 8 + 8 + 8 + 16);
    }

    proptest! {
        #[test]
        fn band_lu_solves_random_banded(seed in 0u64..200, n in 2usize..40, kl in 0usize..4, ku in 0usize..4) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = CMatrix::from_fn(n, n, |i, j| {
                if (i > j && i - j > kl) || (j > i && j - i > ku) {
                    ZERO
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            });
            let b: Vec<Complex64> = (0..n).map(|i| c(i as f64)).collect();
            if let Ok(lu) = BandLu::factor(&BandMatrix::from_dense(&a)) {
                let x = lu.solve(&b);
                let r = &a * nalgebra::DVector::from_vec(x.clone());
                let xn = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
                for (u, v) in r.iter().zip(&b) {
                    prop_assert!((u - v).norm() < 1e-9 * xn * n as f64);
                }
            }
        }
    }
}
