//! Affine semilinear systems A·Z^(q) + B = Z over F_{q^M}.
//!
//! Entrywise x ↦ x^q is F_p-linear, so each column z of Z satisfies the F_p-linear
//! system (A∘Frob − 1)·z = −b in n·e·M unknowns. All columns share the operator, which
//! is factored once and reused (the fundamental-matrix recursion solves many layers
//! against the same constant term).

use std::sync::Arc;

use super::fp_poly;
use super::linalg::{Echelon, FpMatrix};
use super::mat::Mat;
use super::{FieldCtx, FieldElem};
use crate::error::{Error, Result};

/// Solution set `particular + span_{F_p}(homogeneous)`.
#[derive(Debug, Clone)]
pub struct SemilinearSolution {
    pub particular: Mat,
    pub homogeneous: Vec<Mat>,
}

/// The factored F_p-linear operator z ↦ A·z^(q) − z on F_{q^M}^n.
pub struct SemilinearOperator {
    ctx: Arc<FieldCtx>,
    n: usize,
    ech: Echelon,
}

impl SemilinearOperator {
    pub fn new(a: &Mat) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Precondition("A must be square".into()));
        }
        let ctx = a.ctx().clone();
        let k = ctx.degree();
        let p = ctx.p();
        let q = ctx.q() as usize;
        let tail: Vec<(usize, u64)> =
            ctx.modulus()[..k].iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, (p - c) as u64)).collect();
        let dim = n * k;
        let mut op = FpMatrix::zeros(p, dim, dim);
        for r in 0..n {
            for i in 0..n {
                // column j of block (r, i) is A[r][i]·x^(q·j), built by repeated shifting
                let mut cur = a.get(r, i).coeffs().to_vec();
                for j in 0..k {
                    for (row, &v) in cur.iter().enumerate() {
                        if v != 0 {
                            op.set(r * k + row, i * k + j, v);
                        }
                    }
                    if j + 1 < k {
                        cur = fp_poly::shift_reduce(&cur, q, &tail, p);
                    }
                }
            }
        }
        for d in 0..dim {
            let v = op.get(d, d);
            op.set(d, d, (v + p - 1) % p);
        }
        Ok(SemilinearOperator { ctx, n, ech: op.factor() })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    /// F_p-dimension of the solutions of A·z^(q) = z for a single column.
    pub fn column_kernel_dim(&self) -> usize {
        self.ech.nullity()
    }

    /// F_p-basis of the column solution space of A·z^(q) = z.
    pub fn column_kernel(&self) -> Vec<Vec<FieldElem>> {
        self.ech.nullspace().into_iter().map(|v| self.unflatten(&v)).collect()
    }

    fn unflatten(&self, v: &[u32]) -> Vec<FieldElem> {
        let k = self.ctx.degree();
        (0..self.n).map(|i| self.ctx.from_coeffs(&v[i * k..(i + 1) * k]).unwrap()).collect()
    }

    /// One column z with A·z^(q) + b = z.
    pub fn solve_column(&self, b: &[FieldElem]) -> Result<Vec<FieldElem>> {
        let p = self.ctx.p();
        let rhs: Vec<u32> =
            b.iter().flat_map(|x| x.coeffs().iter().map(move |&c| if c == 0 { 0 } else { p - c })).collect();
        let z = self.ech.solve(&rhs).ok_or(Error::Inconsistent)?;
        Ok(self.unflatten(&z))
    }

    /// One particular solution Z of A·Z^(q) + B = Z.
    pub fn solve_particular(&self, b: &Mat) -> Result<Mat> {
        let n = self.n;
        let mut z = Mat::zeros(&self.ctx, n, b.cols());
        for c in 0..b.cols() {
            let col: Vec<FieldElem> = (0..n).map(|r| b.get(r, c).clone()).collect();
            for (r, v) in self.solve_column(&col)?.into_iter().enumerate() {
                z.set(r, c, v);
            }
        }
        Ok(z)
    }

    /// Full solution set of A·Z^(q) + B = Z.
    pub fn solve(&self, b: &Mat) -> Result<SemilinearSolution> {
        let particular = self.solve_particular(b)?;
        let kernel = self.column_kernel();
        let mut homogeneous = Vec::with_capacity(kernel.len() * b.cols());
        for c in 0..b.cols() {
            for v in &kernel {
                let mut z = Mat::zeros(&self.ctx, self.n, b.cols());
                for (r, x) in v.iter().enumerate() {
                    z.set(r, c, x.clone());
                }
                homogeneous.push(z);
            }
        }
        Ok(SemilinearSolution { particular, homogeneous })
    }
}

/// Solves A·Z^(q) + B = Z over the field of A and B.
pub fn solve_affine_semilinear(a: &Mat, b: &Mat) -> Result<SemilinearSolution> {
    if a.inv().is_none() {
        return Err(Error::Precondition("A must be invertible".into()));
    }
    SemilinearOperator::new(a)?.solve(b)
}

/// Residual A·Z^(q) + B − Z, zero exactly for solutions.
pub fn semilinear_residual(a: &Mat, b: &Mat, z: &Mat) -> Mat {
    a.mul(&z.frobenius(1)).add(b).sub(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_extension;

    #[test]
    fn identity_gives_fixed_points() {
        let ctx = build_extension(5, 1, 3).unwrap();
        let a = Mat::identity(&ctx, 2);
        let b = Mat::zeros(&ctx, 2, 2);
        let sol = solve_affine_semilinear(&a, &b).unwrap();
        assert_eq!(sol.homogeneous.len(), 4);
        for h in &sol.homogeneous {
            assert!(semilinear_residual(&a, &b, h).is_zero());
            assert!(h.is_phi_fixed());
        }
    }

    #[test]
    fn scalar_two_over_f5_has_only_zero() {
        let ctx = build_extension(5, 1, 1).unwrap();
        let a = Mat::from_ints(&ctx, &[&[2]]);
        let b = Mat::zeros(&ctx, 1, 1);
        let sol = solve_affine_semilinear(&a, &b).unwrap();
        assert!(sol.homogeneous.is_empty());
        assert!(sol.particular.is_zero());
    }

    #[test]
    fn artin_schreier_inconsistent_over_prime_field() {
        let ctx = build_extension(5, 1, 1).unwrap();
        let a = Mat::from_ints(&ctx, &[&[1]]);
        let b = Mat::from_ints(&ctx, &[&[3]]);
        assert_eq!(solve_affine_semilinear(&a, &b).unwrap_err(), Error::Inconsistent);
    }

    #[test]
    fn random_system_verified_by_substitution() {
        let ctx = build_extension(3, 2, 2).unwrap();
        let g = ctx.generator();
        let a = Mat::from_fn(2, 2, |i, j| g.pow((3 * i + j + 1) as u64).add(&ctx.from_int(i as i64)));
        let b = Mat::from_fn(2, 2, |i, j| g.pow((i + 5 * j) as u64));
        if let Ok(sol) = solve_affine_semilinear(&a, &b) {
            assert!(semilinear_residual(&a, &b, &sol.particular).is_zero());
            let zero = Mat::zeros(&ctx, 2, 2);
            for h in &sol.homogeneous {
                assert!(semilinear_residual(&a, &zero, h).is_zero());
            }
        }
    }
}
