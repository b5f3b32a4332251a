//! Dense matrices over a finite field context.

use std::fmt;
use std::sync::Arc;

use super::{Embedding, FieldCtx, FieldElem};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(ctx: &Arc<FieldCtx>, rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: &Arc<FieldCtx>, n: usize) -> Mat {
        let mut m = Mat::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = ctx.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> FieldElem) -> Mat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_ints(ctx: &Arc<FieldCtx>, rows: &[&[i64]]) -> Mat {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        Mat::from_fn(r, c, |i, j| ctx.from_int(rows[i][j]))
    }

    pub fn diag(entries: &[FieldElem]) -> Mat {
        let n = entries.len();
        let zero = entries[0].ctx().zero();
        Mat::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { zero.clone() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.data[0].ctx()
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&FieldElem) -> FieldElem) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Mat {
        self.map(|x| x.neg())
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let ctx = self.ctx().clone();
        Mat::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = ctx.zero();
            for l in 0..self.cols {
                let a = self.get(i, l);
                let b = o.get(l, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = acc.add(&a.mul(b));
                }
            }
            acc
        })
    }

    pub fn scale(&self, s: &FieldElem) -> Mat {
        self.map(|x| x.mul(s))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    /// Entrywise x ↦ x^(q^k).
    pub fn frobenius(&self, k: usize) -> Mat {
        self.map(|x| x.frobenius(k))
    }

    pub fn frobenius_inv(&self) -> Mat {
        self.map(|x| x.frobenius_inv())
    }

    pub fn is_phi_fixed(&self) -> bool {
        self.data.iter().all(|x| x.is_phi_fixed())
    }

    pub fn embed(&self, emb: &Embedding, target: &Arc<FieldCtx>) -> Mat {
        self.map(|x| emb.apply(target, x))
    }

    /// Determinant by elimination.
    pub fn det(&self) -> FieldElem {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ctx = self.ctx().clone();
        let mut a = self.data.clone();
        let mut det = ctx.one();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !a[r * n + c].is_zero()) else {
                return ctx.zero();
            };
            if piv != c {
                for j in 0..n {
                    a.swap(piv * n + j, c * n + j);
                }
                det = det.neg();
            }
            let pv = a[c * n + c].clone();
            det = det.mul(&pv);
            let inv = pv.inv().unwrap();
            for r in c + 1..n {
                let f = a[r * n + c].mul(&inv);
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let t = f.mul(&a[c * n + j]);
                    a[r * n + j] = a[r * n + j].sub(&t);
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination, `None` if singular.
    pub fn inv(&self) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ctx = self.ctx().clone();
        let mut a = self.data.clone();
        let mut b = Mat::identity(&ctx, n).data;
        for c in 0..n {
            let piv = (c..n).find(|&r| !a[r * n + c].is_zero())?;
            if piv != c {
                for j in 0..n {
                    a.swap(piv * n + j, c * n + j);
                    b.swap(piv * n + j, c * n + j);
                }
            }
            let inv = a[c * n + c].inv().unwrap();
            for j in 0..n {
                a[c * n + j] = a[c * n + j].mul(&inv);
                b[c * n + j] = b[c * n + j].mul(&inv);
            }
            for r in 0..n {
                if r == c || a[r * n + c].is_zero() {
                    continue;
                }
                let f = a[r * n + c].clone();
                for j in 0..n {
                    let ta = f.mul(&a[c * n + j]);
                    a[r * n + j] = a[r * n + j].sub(&ta);
                    let tb = f.mul(&b[c * n + j]);
                    b[r * n + j] = b[r * n + j].sub(&tb);
                }
            }
        }
        Some(Mat { rows: n, cols: n, data: b })
    }

    /// Characteristic polynomial det(X·I − A), low degree first, by Berkowitz's
    /// division-free algorithm.
    pub fn charpoly(&self) -> Vec<FieldElem> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let ctx = self.ctx().clone();
        // v holds the coefficients high degree first
        let mut v = vec![ctx.one()];
        for r in 0..n {
            // leading principal block of size r+1: a = A[r][r], R = A[r][0..r], C = A[0..r][r], S = A[0..r][0..r]
            let a = self.get(r, r).clone();
            let c: Vec<FieldElem> = (0..r).map(|i| self.get(i, r).clone()).collect();
            let mut toeplitz = vec![ctx.one().neg(), a];
            let mut pw = c.clone();
            for _ in 0..r {
                // R·S^j·C
                let val = (0..r).fold(ctx.zero(), |acc, i| acc.add(&self.get(r, i).mul(&pw[i])));
                toeplitz.push(val);
                pw = (0..r).map(|i| (0..r).fold(ctx.zero(), |acc, l| acc.add(&self.get(i, l).mul(&pw[l])))).collect();
            }
            // new v = T · v with T lower-triangular Toeplitz built from toeplitz (length r+2)
            let mut nv = Vec::with_capacity(r + 2);
            for i in 0..r + 2 {
                let mut acc = ctx.zero();
                for j in 0..v.len() {
                    if i >= j && i - j < toeplitz.len() {
                        acc = acc.add(&toeplitz[i - j].mul(&v[j]));
                    }
                }
                nv.push(acc);
            }
            v = nv;
        }
        // v = (-1)^n · charpoly, high first
        if n % 2 == 1 {
            v = v.iter().map(|x| x.neg()).collect();
        }
        v.reverse();
        v
    }
}
