//! Small exact linear algebra: fraction-free determinants, resultants,
//! rational row reduction and Smith normal form over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Determinant by Bareiss fraction-free elimination.
pub fn det_bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    det_bareiss(m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
}

/// Resultant of two integer polynomials (coefficients low to high) via the
/// Sylvester matrix.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let trim = |v: &[BigInt]| -> Vec<BigInt> {
        let mut v = v.to_vec();
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        v
    };
    let f = trim(f);
    let g = trim(g);
    if f.is_empty() || g.is_empty() {
        return BigInt::zero();
    }
    let df = f.len() - 1;
    let dg = g.len() - 1;
    if df == 0 {
        return num_traits::pow(f[0].clone(), dg);
    }
    if dg == 0 {
        return num_traits::pow(g[0].clone(), df);
    }
    let size = df + dg;
    let mut s = vec![vec![BigInt::zero(); size]; size];
    // rows hold coefficients from the leading one down
    for r in 0..dg {
        for (i, c) in f.iter().rev().enumerate() {
            s[r][r + i] = c.clone();
        }
    }
    for r in 0..df {
        for (i, c) in g.iter().rev().enumerate() {
            s[dg + r][r + i] = c.clone();
        }
    }
    det_bareiss(s)
}

/// p-adic valuation of a nonzero integer.
pub fn vp(x: &BigInt, p: u64) -> u64 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Reduced row echelon form over Q; returns the pivot columns.
pub fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let v = &m[r][j] * &f;
                    m[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_i64(vectors: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    rref(&mut m).len()
}

/// A primitive integer vector spanning the kernel of `m` (which must have
/// a one-dimensional kernel), or `None`.
pub fn kernel_line(m: &[Vec<i64>]) -> Option<Vec<i64>> {
    let cols = m.first()?.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|v| v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let pivots = rref(&mut a);
    if pivots.len() + 1 != cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); cols];
    v[free] = BigRational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -a[row][free].clone();
    }
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter()
        .map(|x| i64::try_from(x / &g).ok())
        .collect()
}

/// Solves `m x = b` exactly for square nonsingular `m`.
pub fn solve(m: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut aug: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// Smith normal form `u * m * v = diag(s)` with unimodular `u`, `v`.
/// Returns `(s, u, v)`; diagonal entries are nonnegative.
pub fn smith_normal_form(m: &[Vec<i64>]) -> (Vec<i64>, Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let ident = |n: usize| -> Vec<Vec<i128>> {
        (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
    };
    let mut u = ident(n);
    let mut v = ident(n);

    for t in 0..n {
        loop {
            // pivot: smallest nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let f = a[i][t] / a[t][t];
                if f != 0 {
                    for j in 0..n {
                        a[i][j] -= f * a[t][j];
                        u[i][j] -= f * u[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let f = a[t][j] / a[t][t];
                if f != 0 {
                    for i in 0..n {
                        a[i][j] -= f * a[i][t];
                        v[i][j] -= f * v[i][t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: pivot must divide the rest of the block
            let bad = (t + 1..n).flat_map(|i| (t + 1..n).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[t][t] != 0);
            match bad {
                None => break,
                Some((i, _)) => {
                    for j in 0..n {
                        a[t][j] += a[i][j];
                        u[t][j] += u[i][j];
                    }
                }
            }
        }
        if a[t][t] < 0 {
            for j in 0..n {
                a[t][j] = -a[t][j];
                u[t][j] = -u[t][j];
            }
        }
    }
    let to64 = |m: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        m.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
    };
    let s = (0..n).map(|i| a[i][i] as i64).collect();
    (s, to64(u), to64(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn det_small() {
        assert_eq!(det_i64(&[vec![2, 1], vec![1, 3]]), BigInt::from(5));
        assert_eq!(det_i64(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(det_i64(&[vec![1, 2], vec![2, 4]]), BigInt::from(0));
        // cofactor expansion oracle for a 4x4
        let m = vec![vec![3, -1, 2, 0], vec![1, 4, -2, 5], vec![0, 2, 1, -3], vec![2, 0, 1, 1]];
        fn cofactor(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|c| {
                    let minor: Vec<Vec<i64>> =
                        m[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect()).collect();
                    let s = if c % 2 == 0 { 1 } else { -1 };
                    s * m[0][c] * cofactor(&minor)
                })
                .sum()
        }
        assert_eq!(det_i64(&m), BigInt::from(cofactor(&m)));
    }

    #[test]
    fn resultant_of_linear_factors() {
        // Res((x-1)(x-2), x-3) = (1-3)(2-3) = 2
        assert_eq!(resultant(&bi(&[2, -3, 1]), &bi(&[-3, 1])), BigInt::from(2));
        // Res(1 + x + x^2, x - x^2): norm of zeta - zeta^2 in Q(zeta_3) is 3
        assert_eq!(resultant(&bi(&[1, 1, 1]), &bi(&[0, 1, -1])), BigInt::from(3));
        assert_eq!(resultant(&bi(&[1, 1, 1]), &bi(&[5])), BigInt::from(25));
    }

    #[test]
    fn snf_reconstructs() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let (s, u, v) = smith_normal_form(&m);
        assert_eq!(s, vec![2, 6, 12]);
        let mul = |a: &[Vec<i64>], b: &[Vec<i64>]| -> Vec<Vec<i64>> {
            (0..a.len()).map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
        };
        let d = mul(&mul(&u, &m), &v);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[i][j], if i == j { s[i] } else { 0 });
            }
        }
        assert_eq!(det_i64(&u).abs(), BigInt::from(1));
        assert_eq!(det_i64(&v).abs(), BigInt::from(1));
    }

    #[test]
    fn kernel_of_plane() {
        let k = kernel_line(&[vec![1, 0, -1], vec![0, 2, -2]]).unwrap();
        assert!(k == vec![1, 1, 1] || k == vec![-1, -1, -1]);
    }
}
