//! Dense polynomials over a prime field F_p, stored little-endian as `Vec<u32>`.
//!
//! These are the raw helpers behind modulus selection and field inversion; they
//! carry no context and take the characteristic explicitly.

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a, p as u64 - 2, p)
}

pub(crate) fn pow_mod(a: u32, mut e: u64, p: u32) -> u32 {
    let p64 = p as u64;
    let mut base = a as u64 % p64;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p64;
        }
        base = base * base % p64;
        e >>= 1;
    }
    acc as u32
}

pub(crate) fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Degree, with `None` for the zero polynomial.
pub(crate) fn degree(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out.push((x + p - y) % p);
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let ai = ai as u64;
        for (slot, &bj) in acc[i..].iter_mut().zip(b) {
            *slot += ai * bj as u64;
        }
    }
    let mut out: Vec<u32> = acc.into_iter().map(|c| (c % p as u64) as u32).collect();
    trim(&mut out);
    out
}

/// Remainder of `a` modulo a nonzero `b`.
pub(crate) fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    divrem(a, b, p).1
}

pub(crate) fn divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let db = degree(b).expect("division by zero polynomial");
    let mut r: Vec<u32> = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let lead_inv = inv_mod(b[db], p) as u64;
    let p64 = p as u64;
    let mut quot = vec![0u32; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = r[i] as u64 * lead_inv % p64;
        if c == 0 {
            continue;
        }
        quot[i - db] = c as u32;
        let neg = p64 - c;
        for (j, &bj) in b[..=db].iter().enumerate() {
            let slot = &mut r[i - db + j];
            *slot = ((*slot as u64 + neg * bj as u64) % p64) as u32;
        }
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut quot);
    (quot, r)
}

pub(crate) fn make_monic(a: &mut [u32], p: u32) {
    if let Some(d) = degree(a) {
        let inv = inv_mod(a[d], p) as u64;
        for c in a.iter_mut() {
            *c = (*c as u64 * inv % p as u64) as u32;
        }
    }
}

pub(crate) fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    make_monic(&mut x, p);
    x
}

/// Inverse of `a` modulo `m` (assumed coprime), by the extended Euclidean algorithm.
pub(crate) fn inv_modulo(a: &[u32], m: &[u32], p: u32) -> Option<Vec<u32>> {
    let mut r0 = m.to_vec();
    let mut r1 = rem(a, m, p);
    let mut s0: Vec<u32> = Vec::new();
    let mut s1: Vec<u32> = vec![1];
    trim(&mut r0);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod(r0[0], p) as u64;
    let mut out: Vec<u32> = s0.iter().map(|&v| (v as u64 * c % p as u64) as u32).collect();
    trim(&mut out);
    Some(out)
}

pub(crate) fn eval(a: &[u32], x: u32, p: u32) -> u32 {
    let p64 = p as u64;
    a.iter().rev().fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p64) as u32
}

/// Columns `x^(step*j) mod f` for `j < deg f`, computed by repeated shifting.
/// `f` must be monic of degree `k >= 1`.
pub(crate) fn power_columns(f: &[u32], step: usize, p: u32) -> Vec<Vec<u32>> {
    let k = f.len() - 1;
    let tail: Vec<(usize, u64)> =
        f[..k].iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, (p - c) as u64)).collect();
    let mut cols = Vec::with_capacity(k);
    let mut cur = vec![0u32; k];
    cur[0] = 1;
    for _ in 0..k {
        cols.push(cur.clone());
        cur = shift_reduce(&cur, step, &tail, p);
    }
    cols
}

/// `a * x^shift mod f`, where `tail` encodes `x^k = sum tail_i x^i` with negated coefficients.
pub(crate) fn shift_reduce(a: &[u32], shift: usize, tail: &[(usize, u64)], p: u32) -> Vec<u32> {
    let k = a.len();
    let mut acc = vec![0u64; k + shift];
    for (i, &c) in a.iter().enumerate() {
        acc[i + shift] = c as u64;
    }
    reduce_in_place(&mut acc, k, tail, p);
    acc[..k].iter().map(|&c| (c % p as u64) as u32).collect()
}

/// Reduces an accumulator of any length modulo the monic degree-`k` polynomial encoded by `tail`.
/// Only the first `k` slots are meaningful afterwards and they are NOT yet reduced mod p.
pub(crate) fn reduce_in_place(acc: &mut [u64], k: usize, tail: &[(usize, u64)], p: u32) {
    let p64 = p as u64;
    for i in (k..acc.len()).rev() {
        let c = acc[i] % p64;
        acc[i] = 0;
        if c == 0 {
            continue;
        }
        for &(d, neg) in tail {
            acc[i - k + d] += c * neg;
        }
    }
}

/// Ben-Or irreducibility test for a monic polynomial over F_p.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = match degree(f) {
        Some(k) => k,
        None => return false,
    };
    if k == 0 {
        return false;
    }
    if k == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    if (0..p).any(|x| eval(f, x, p) == 0) {
        return false;
    }
    let cols = power_columns(f, p as usize, p);
    let mut h = vec![0u32; k];
    h[1] = 1;
    let x = vec![0u32, 1];
    for _ in 1..=k / 2 {
        h = apply_columns(&cols, &h, p);
        let diff = sub(&h, &x, p);
        let g = gcd(&diff, f, p);
        if degree(&g).unwrap_or(0) > 0 || g.is_empty() {
            return false;
        }
    }
    true
}

/// Applies the linear map whose `j`-th column is `cols[j]` to the coefficient vector `v`.
pub(crate) fn apply_columns(cols: &[Vec<u32>], v: &[u32], p: u32) -> Vec<u32> {
    let k = cols.first().map(|c| c.len()).unwrap_or(0);
    let mut acc = vec![0u64; k];
    for (col, &c) in cols.iter().zip(v) {
        if c == 0 {
            continue;
        }
        let c = c as u64;
        for (slot, &x) in acc.iter_mut().zip(col) {
            *slot += c * x as u64;
        }
    }
    acc.into_iter().map(|c| (c % p as u64) as u32).collect()
}

/// Lexicographically smallest monic irreducible polynomial of degree `k` over F_p.
/// Candidates are ordered by the integer whose base-p digits are the lower coefficients,
/// so the highest lower coefficient is the most significant.
pub(crate) fn smallest_irreducible(p: u32, k: usize) -> Vec<u32> {
    let mut tail = vec![0u32; k];
    loop {
        let mut f = tail.clone();
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
        // increment base-p counter, least significant digit = constant coefficient
        let mut i = 0;
        loop {
            tail[i] += 1;
            if tail[i] < p {
                break;
            }
            tail[i] = 0;
            i += 1;
            assert!(i < k, "no irreducible polynomial found");
        }
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_quadratic_over_f5() {
        assert_eq!(smallest_irreducible(5, 2), vec![2, 0, 1]);
    }

    #[test]
    fn f4_modulus() {
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1]);
    }

    #[test]
    fn degree_one_modulus_is_x() {
        assert_eq!(smallest_irreducible(5, 1), vec![0, 1]);
    }

    #[test]
    fn ben_or_matches_trial_division() {
        // all monic cubics over F_3: irreducible iff no root
        for c0 in 0..3 {
            for c1 in 0..3 {
                for c2 in 0..3 {
                    let f = vec![c0, c1, c2, 1];
                    let has_root = (0..3).any(|x| eval(&f, x, 3) == 0);
                    assert_eq!(is_irreducible(&f, 3), !has_root, "{f:?}");
                }
            }
        }
    }

    #[test]
    fn inverse_mod_polynomial() {
        let m = vec![2, 0, 1];
        let a = vec![3, 4];
        let inv = inv_modulo(&a, &m, 5).unwrap();
        assert_eq!(rem(&mul(&a, &inv, 5), &m, 5), vec![1]);
    }
}
