//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection and
//! eigenvectors by inverse iteration.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid("off", "need off.len() == diag.len() - 1"));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..self.diag.len() {
            d = if i == 0 {
                self.diag[0] - x
            } else {
                self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / d
            };
            if d.abs() < tiny {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::TooManyModes {
                requested: k + 1,
                max: self.len(),
            });
        }
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `m` smallest eigenvalues in increasing order.
    pub fn lowest_eigenvalues(&self, m: usize) -> Result<Vec<f64>> {
        (0..m).map(|k| self.eigenvalue(k)).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Unit eigenvector for the eigenvalue estimate `lambda`, orthogonalised
    /// against `previous` (assumed orthonormal).
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let shift = lambda + 8.0 * f64::EPSILON * lo.abs().max(hi.abs());
        let lu = TridiagLu::factor(&self.off, &self.diag.iter().map(|d| d - shift).collect::<Vec<_>>(), &self.off);
        // Deterministic, non-degenerate start vector.
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
        for _ in 0..3 {
            x = lu.solve(&x);
            orthogonalise(&mut x, previous);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::Numerical(format!("inverse iteration broke down at lambda = {lambda}")));
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(x)
    }
}

fn orthogonalise(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let p: f64 = x.iter().zip(q).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
        }
    }
}

/// LU factorisation with partial pivoting of a general tridiagonal matrix
/// (LAPACK `gttrf` layout: `du2` holds the fill-in from row swaps).
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let f = dl[i] / d[i];
                    dl[i] = f;
                    d[i + 1] -= f * du[i];
                }
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                swapped[i] = true;
            }
        }
        let tiny = f64::MIN_POSITIVE * 1e10;
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let tmp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = tmp - self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * x[i + 2];
            }
            x[i] = s / self.d[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 50;
        let a = laplacian(n);
        for k in 0..5 {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(a.eigenvalue(k).unwrap(), exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn sturm_count_is_monotone() {
        let a = laplacian(20);
        let mut last = 0;
        for i in 0..=40 {
            let c = a.count_below(i as f64 * 0.1);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(a.count_below(5.0), 20);
        assert_eq!(a.count_below(0.0), 0);
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_accurate() {
        let a = laplacian(64);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for k in 0..4 {
            let lam = a.eigenvalue(k).unwrap();
            let v = a.eigenvector(lam, &basis).unwrap();
            let av = a.matvec(&v);
            let res = av.iter().zip(&v).map(|(x, y)| (x - lam * y).abs()).fold(0.0, f64::max);
            assert!(res < 1e-12, "residual {res}");
            for q in &basis {
                let p: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
                assert!(p.abs() < 1e-12);
            }
            basis.push(v);
        }
    }

    #[test]
    fn pivoted_solve_matches_matvec() {
        let lower = vec![3.0, 0.5, -1.0, 2.0];
        let diag = vec![0.1, 4.0, 1e-3, 2.0, -1.0];
        let upper = vec![1.0, -2.0, 0.7, 0.3];
        let lu = TridiagLu::factor(&lower, &diag, &upper);
        let x = lu.solve(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        for i in 0..5 {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += lower[i - 1] * x[i - 1];
            }
            if i < 4 {
                s += upper[i] * x[i + 1];
            }
            assert_abs_diff_eq!(s, (i + 1) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_many_modes() {
        assert!(matches!(laplacian(4).eigenvalue(4), Err(Error::TooManyModes { .. })));
    }
}
