//! Dense linear algebra over F_p: row-echelon factorization with partial pivot
//! search, reusable for many right-hand sides.

use super::fp_poly::inv_mod;

/// Row-major dense matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        Self { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(p: u32, rows: Vec<Vec<u32>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row.into_iter().map(|v| v % p));
        }
        Self { p, rows: r, cols: c, data }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    /// Writes `v` as column `j`.
    pub fn set_col(&mut self, j: usize, v: &[u32]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.data[i * self.cols + j] = x % self.p;
        }
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols);
        let p = self.p as u64;
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64 % p).sum::<u64>() % p) as u32
            })
            .collect()
    }

    pub fn factor(&self) -> Echelon {
        Echelon::new(self)
    }
}

/// `P·A = L·U` style factorization, with `U` in row-echelon form (unit pivots).
/// Multipliers are kept so that new right-hand sides replay the elimination.
#[derive(Debug, Clone)]
pub struct Echelon {
    p: u32,
    rows: usize,
    cols: usize,
    /// Row-major; above/right of the staircase holds `U`, below it the multipliers.
    data: Vec<u32>,
    swaps: Vec<usize>,
    pivot_cols: Vec<usize>,
    pivot_inv: Vec<u32>,
}

impl Echelon {
    fn new(m: &FpMatrix) -> Self {
        let (rows, cols, p) = (m.rows, m.cols, m.p);
        let p64 = p as u64;
        let mut a: Vec<u64> = m.data.iter().map(|&v| v as u64).collect();
        let mut swaps = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut pivot_inv = Vec::new();
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let mut found = None;
            for r in rank..rows {
                let v = a[r * cols + col] % p64;
                a[r * cols + col] = v;
                if v != 0 && found.is_none() {
                    found = Some(r);
                }
            }
            let Some(r) = found else { continue };
            if r != rank {
                for j in 0..cols {
                    a.swap(r * cols + j, rank * cols + j);
                }
            }
            swaps.push(r);
            let inv = inv_mod(a[rank * cols + col] as u32, p) as u64;
            {
                let row = &mut a[rank * cols..(rank + 1) * cols];
                for v in row[col..].iter_mut() {
                    *v = (*v % p64) * inv % p64;
                }
            }
            let (head, tail) = a.split_at_mut((rank + 1) * cols);
            let pivot_row = &head[rank * cols..];
            for chunk in tail.chunks_mut(cols) {
                let f = chunk[col] % p64;
                chunk[col] = f;
                if f == 0 {
                    continue;
                }
                let neg = p64 - f;
                for (x, &y) in chunk[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                    *x += neg * y;
                }
                // keep headroom: entries grow by < p^2 per update
                if p64 > 1 << 16 {
                    for x in chunk[col + 1..].iter_mut() {
                        *x %= p64;
                    }
                }
            }
            pivot_cols.push(col);
            pivot_inv.push(inv as u32);
            rank += 1;
        }
        let data = a.into_iter().map(|v| (v % p64) as u32).collect();
        Echelon { p, rows, cols, data, swaps, pivot_cols, pivot_inv }
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    fn at(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    /// One solution of `A x = b` (free variables zero), or `None` when inconsistent.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let p = self.p as u64;
        let mut y: Vec<u64> = b.iter().map(|&v| v as u64 % p).collect();
        for (s, &r) in self.swaps.iter().enumerate() {
            y.swap(s, r);
        }
        for s in 0..self.rank() {
            y[s] = y[s] * self.pivot_inv[s] as u64 % p;
            let ys = y[s];
            if ys == 0 {
                continue;
            }
            let col = self.pivot_cols[s];
            for (i, yi) in y.iter_mut().enumerate().skip(s + 1) {
                let f = self.at(i, col) as u64;
                if f != 0 {
                    *yi = (*yi + (p - f) * ys) % p;
                }
            }
        }
        if y[self.rank()..].iter().any(|&v| v != 0) {
            return None;
        }
        Some(self.back_substitute(&y[..self.rank()], None))
    }

    fn back_substitute(&self, y: &[u64], free: Option<usize>) -> Vec<u32> {
        let p = self.p as u64;
        let mut x = vec![0u64; self.cols];
        if let Some(f) = free {
            x[f] = 1;
        }
        for s in (0..self.rank()).rev() {
            let col = self.pivot_cols[s];
            let row = &self.data[s * self.cols..(s + 1) * self.cols];
            let mut acc = y.get(s).copied().unwrap_or(0);
            for j in col + 1..self.cols {
                if x[j] != 0 && row[j] != 0 {
                    acc += (p - row[j] as u64) * x[j] % p;
                }
            }
            x[col] = acc % p;
        }
        x.into_iter().map(|v| v as u32).collect()
    }

    /// Basis of the kernel, one vector per non-pivot column in increasing order.
    pub fn nullspace(&self) -> Vec<Vec<u32>> {
        let mut is_pivot = vec![false; self.cols];
        for &c in &self.pivot_cols {
            is_pivot[c] = true;
        }
        let zeros = vec![0u64; self.rank()];
        (0..self.cols).filter(|&c| !is_pivot[c]).map(|c| self.back_substitute(&zeros, Some(c))).collect()
    }
}

/// A linear system `A x = b` over F_p.
#[derive(Debug, Clone)]
pub struct LinSystem {
    pub matrix: FpMatrix,
    pub rhs: Vec<u32>,
}

/// Affine solution set: `particular + span(homogeneous)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<u32>,
    pub homogeneous: Vec<Vec<u32>>,
}

impl LinSystem {
    pub fn new(matrix: FpMatrix, rhs: Vec<u32>) -> Self {
        assert_eq!(matrix.rows(), rhs.len(), "dimension mismatch");
        Self { matrix, rhs }
    }

    pub fn solve(&self) -> Option<AffineSolution> {
        let ech = self.matrix.factor();
        let particular = ech.solve(&self.rhs)?;
        Some(AffineSolution { particular, homogeneous: ech.nullspace() })
    }
}
