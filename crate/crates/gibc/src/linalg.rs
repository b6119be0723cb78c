//! Dense complex linear algebra: blocked products and a pivoted LU with a
//! 1-norm condition estimate.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64 as C;
use std::sync::atomic::{AtomicUsize, Ordering};

pub type CMatrix = DMatrix<C>;
pub type CVector = DVector<C>;

/// `a * b` through the blocked complex kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // Complex64 is #[repr(C)] { re, im }, identical in layout to [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// Matrix-vector product `a * x`.
pub fn matvec(a: &CMatrix, x: &[C]) -> Vec<C> {
    let xm = CMatrix::from_column_slice(x.len(), 1, x);
    matmul(a, &xm).as_slice().to_vec()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("condition estimate {estimate:e} exceeds {limit:e}")]
    IllConditioned { estimate: f64, limit: f64 },
}

/// Default condition-number ceiling for boundary integral systems.
pub const CONDITION_LIMIT: f64 = 1e13;

/// Row-pivoted LU factorization, kept for repeated solves.
pub struct Factorization {
    lu: LU<C, Dyn, Dyn>,
    norm1: f64,
    n: usize,
    solves: AtomicUsize,
}

impl Factorization {
    pub fn new(a: CMatrix) -> Result<Self, SolveError> {
        let norm1 = one_norm(&a);
        let n = a.nrows();
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(SolveError::Singular);
        }
        Ok(Self { lu, norm1, n, solves: AtomicUsize::new(0) })
    }

    /// Factorizes and rejects systems whose condition estimate exceeds `limit`.
    pub fn new_checked(a: CMatrix, limit: f64) -> Result<Self, SolveError> {
        let f = Self::new(a)?;
        let estimate = f.condition_estimate();
        if !estimate.is_finite() || estimate > limit {
            return Err(SolveError::IllConditioned { estimate, limit });
        }
        f.solves.store(0, Ordering::Relaxed);
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of right-hand sides solved so far.
    pub fn solve_count(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn solve(&self, b: &[C]) -> Vec<C> {
        let mut x = CVector::from_column_slice(b);
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.lu.solve_mut(&mut x);
        x.as_slice().to_vec()
    }

    /// Solves for every column of `b`.
    pub fn solve_many(&self, b: &CMatrix) -> CMatrix {
        let mut x = b.clone();
        self.solves.fetch_add(b.ncols(), Ordering::Relaxed);
        self.lu.solve_mut(&mut x);
        x
    }

    /// Solves `A^H X = B` for every column of `B`.
    pub fn solve_adjoint_many(&self, b: &CMatrix) -> CMatrix {
        let u = self.lu.u();
        let l = self.lu.l();
        let mut x = b.clone();
        self.solves.fetch_add(b.ncols(), Ordering::Relaxed);
        u.ad_solve_upper_triangular_mut(&mut x);
        l.ad_solve_lower_triangular_mut(&mut x);
        self.lu.p().inv_permute_rows(&mut x);
        x
    }

    /// Solves `A^H x = b`.
    fn solve_adjoint(&self, b: &[C]) -> Vec<C> {
        // P A = L U, so A^H = U^H L^H P.
        let u = self.lu.u();
        let l = self.lu.l();
        let mut x = CVector::from_column_slice(b);
        u.ad_solve_upper_triangular_mut(&mut x);
        l.ad_solve_lower_triangular_mut(&mut x);
        self.lu.p().inv_permute_rows(&mut x);
        x.as_slice().to_vec()
    }

    /// Estimate of the 1-norm condition number (Hager's method with the
    /// complex sign vector of Higham).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![C::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            let ny: f64 = y.iter().map(|v| v.norm()).sum();
            if ny <= est {
                break;
            }
            est = ny;
            let xi: Vec<C> = y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { C::new(1.0, 0.0) }).collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= zx || j == last {
                break;
            }
            last = j;
            x = vec![C::default(); n];
            x[j] = C::new(1.0, 0.0);
        }
        // alternative probe guards against the worst cases of the iteration
        let alt: Vec<C> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                C::new(s * (1.0 + i as f64 / (n as f64 - 1.0).max(1.0)), 0.0)
            })
            .collect();
        let ya = self.solve(&alt);
        let alt_est = 2.0 * ya.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est) * self.norm1
    }
}

/// Maximum absolute column sum.
pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_abs(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn norm2(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn product_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(7, 5, &mut rng);
        let b = random(5, 9, &mut rng);
        let d = matmul(&a, &b) - &a * &b;
        assert!(d.iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn adjoint_solve_and_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(12, 12, &mut rng);
        let f = Factorization::new(a.clone()).unwrap();
        let b: Vec<C> = (0..12).map(|i| C::new(i as f64, 1.0)).collect();
        let x = f.solve_adjoint(&b);
        let r = a.adjoint() * CVector::from_column_slice(&x) - CVector::from_column_slice(&b);
        assert!(r.norm() < 1e-10);
        let exact = one_norm(&a) * one_norm(&a.clone().try_inverse().unwrap());
        let est = f.condition_estimate();
        assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 10.0, "{est} vs {exact}");
    }

    #[test]
    fn singular_rejected() {
        let mut a = CMatrix::identity(3, 3);
        a[(2, 2)] = C::default();
        assert!(matches!(Factorization::new(a), Err(SolveError::Singular)));
    }

    #[test]
    fn ill_conditioned_rejected() {
        let mut a = CMatrix::identity(3, 3);
        a[(2, 2)] = C::new(1e-15, 0.0);
        assert!(matches!(Factorization::new_checked(a, CONDITION_LIMIT), Err(SolveError::IllConditioned { .. })));
    }
}
