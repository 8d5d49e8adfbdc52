//! Exact values of character sums.
//!
//! A [`SumValue`] is an integer histogram over `(t, j)`, standing for
//! `sum c[t][j] * zeta_p^t * zeta_m^j` in `Z[zeta_p, zeta_m]` (with `p` and `m`
//! coprime). The histogram is not a canonical form; [`SumValue::canonical`]
//! reduces it onto the integral basis so that values can be compared exactly.
//!
//! A [`CycloRational`] is an element of `Q(zeta_p)` in the basis
//! `1, zeta, ..., zeta^{p-2}`, the carrier for L-polynomial coefficients and
//! their q-adic valuations.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;

/// Default bound on `nnz(a) * nnz(b)` for a single histogram product.
pub const DEFAULT_PRODUCT_BUDGET: u64 = 200_000_000;

fn root_table(n: u32) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

/// An element of `Z[zeta_p, zeta_m]` as a `p x m` integer histogram.
///
/// `m` must be prime to `p` (conductors here are always `q^k - 1`), so that
/// `zeta_p^t zeta_m^j` with `t < p - 1`, `j < phi(m)` is a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumValue {
    p: u32,
    m: u32,
    counts: Vec<BigInt>,
}

impl SumValue {
    pub fn zero(p: u32, m: u32) -> Self {
        debug_assert!(m % p != 0 || p == 1, "conductor {m} shares a factor with {p}");
        SumValue { p, m, counts: vec![BigInt::zero(); (p * m) as usize] }
    }

    /// Builds from a row-major histogram, entry `t * m + j`.
    pub fn from_counts<T: Into<BigInt> + Copy>(p: u32, m: u32, counts: &[T]) -> Self {
        assert_eq!(counts.len(), (p * m) as usize, "histogram shape");
        debug_assert!(m % p != 0 || p == 1, "conductor {m} shares a factor with {p}");
        SumValue { p, m, counts: counts.iter().map(|&c| c.into()).collect() }
    }

    pub fn from_int(p: u32, m: u32, c: impl Into<BigInt>) -> Self {
        let mut v = Self::zero(p, m);
        v.counts[0] = c.into();
        v
    }

    /// The root of unity `zeta_p^t zeta_m^j`.
    pub fn root(p: u32, m: u32, t: u64, j: u64) -> Self {
        let mut v = Self::zero(p, m);
        v.counts[((t % p as u64) * m as u64 + j % m as u64) as usize] = BigInt::one();
        v
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn count(&self, t: u32, j: u32) -> &BigInt {
        &self.counts[(t * self.m + j) as usize]
    }

    pub fn counts(&self) -> &[BigInt] {
        &self.counts
    }

    /// Total absolute count mass `sum |c|`.
    pub fn mass(&self) -> BigInt {
        self.counts.iter().map(|c| c.abs()).sum()
    }

    fn nnz(&self) -> usize {
        self.counts.iter().filter(|c| !c.is_zero()).count()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.m != other.m {
            return Err(Error::Conductor(format!(
                "({}, {}) vs ({}, {})",
                self.p, self.m, other.p, other.m
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(SumValue { p: self.p, m: self.m, counts })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a - b).collect();
        Ok(SumValue { p: self.p, m: self.m, counts })
    }

    pub fn neg(&self) -> Self {
        SumValue { p: self.p, m: self.m, counts: self.counts.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        SumValue { p: self.p, m: self.m, counts: self.counts.iter().map(|x| x * c).collect() }
    }

    /// Multiplies by `zeta_p^t zeta_m^j` (a permutation of the histogram).
    pub fn shift(&self, t: u64, j: u64) -> Self {
        let (p, m) = (self.p as u64, self.m as u64);
        let mut out = Self::zero(self.p, self.m);
        for (idx, c) in self.counts.iter().enumerate() {
            let (tt, jj) = (idx as u64 / m, idx as u64 % m);
            let dst = ((tt + t) % p) * m + (jj + j) % m;
            out.counts[dst as usize] = c.clone();
        }
        out
    }

    /// Complex conjugate: `t -> -t`, `j -> -j`.
    pub fn conjugate(&self) -> Self {
        let (p, m) = (self.p as usize, self.m as usize);
        let mut out = Self::zero(self.p, self.m);
        for t in 0..p {
            for j in 0..m {
                out.counts[((p - t) % p) * m + (m - j) % m] = self.counts[t * m + j].clone();
            }
        }
        out
    }

    /// Galois action `zeta_p -> zeta_p^c` on the additive part.
    pub fn galois_p(&self, c: u32) -> Self {
        let (p, m) = (self.p as usize, self.m as usize);
        let mut out = Self::zero(self.p, self.m);
        for t in 0..p {
            let dst = (t * c as usize) % p;
            for j in 0..m {
                out.counts[dst * m + j] += &self.counts[t * m + j];
            }
        }
        out
    }

    /// Re-expresses in conductor `m2`, a multiple of `m`.
    pub fn lift(&self, m2: u32) -> Result<Self> {
        if m2 % self.m != 0 {
            return Err(Error::Conductor(format!("{} does not divide {}", self.m, m2)));
        }
        let f = (m2 / self.m) as usize;
        let mut out = Self::zero(self.p, m2);
        for t in 0..self.p as usize {
            for j in 0..self.m as usize {
                out.counts[t * m2 as usize + j * f] = self.counts[t * self.m as usize + j].clone();
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_budgeted(other, DEFAULT_PRODUCT_BUDGET)
    }

    /// Convolution product indexed mod `p` and mod `m`, refused when the
    /// sparse cost `nnz(a) * nnz(b)` exceeds `budget`.
    pub fn mul_budgeted(&self, other: &Self, budget: u64) -> Result<Self> {
        self.check_shape(other)?;
        let cost = self.nnz() as u128 * other.nnz() as u128;
        if cost > budget as u128 {
            return Err(Error::Budget { points: cost, budget: budget as u128 });
        }
        let (p, m) = (self.p as usize, self.m as usize);
        let sparse = |v: &Self| -> Vec<(usize, usize, BigInt)> {
            v.counts
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i / m, i % m, c.clone()))
                .collect()
        };
        let a = sparse(self);
        let b = sparse(other);
        let mut out = Self::zero(self.p, self.m);
        for (ta, ja, ca) in &a {
            for (tb, jb, cb) in &b {
                out.counts[((ta + tb) % p) * m + (ja + jb) % m] += ca * cb;
            }
        }
        Ok(out)
    }

    /// Complex value at `zeta_p = e^{2 pi i/p}`, `zeta_m = e^{2 pi i/m}`.
    ///
    /// Rounding error is at most about `mass * 1e-14`.
    pub fn embed_complex(&self) -> Complex64 {
        let zp = root_table(self.p);
        let zm = root_table(self.m);
        let m = self.m as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = zp[i / m] * zm[i % m];
            acc += w * c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Coordinates on the integral basis `zeta_p^t zeta_m^j`,
    /// `t < p - 1`, `j < phi(m)`; equal elements have equal coordinates.
    pub fn canonical(&self) -> Vec<Vec<BigInt>> {
        let (p, m) = (self.p as usize, self.m as usize);
        let phi_m = cyclotomic_polynomial(self.m);
        let deg = phi_m.len() - 1;
        let rows = p.saturating_sub(1).max(1);
        let mut out = Vec::with_capacity(rows);
        for t in 0..rows {
            let mut row: Vec<BigInt> = (0..m)
                .map(|j| {
                    if p == 1 {
                        self.counts[j].clone()
                    } else {
                        &self.counts[t * m + j] - &self.counts[(p - 1) * m + j]
                    }
                })
                .collect();
            // reduce the zeta_m polynomial modulo the monic Phi_m
            for top in (deg..row.len()).rev() {
                let c = std::mem::take(&mut row[top]);
                if c.is_zero() {
                    continue;
                }
                let shift = top - deg;
                for (i, phi) in phi_m.iter().enumerate().take(deg) {
                    row[shift + i] -= &c * phi;
                }
            }
            row.truncate(deg);
            out.push(row);
        }
        out
    }

    pub fn exact_eq(&self, other: &Self) -> Result<bool> {
        self.check_shape(other)?;
        Ok(self.canonical() == other.canonical())
    }

    pub fn is_zero_exact(&self) -> bool {
        self.canonical().iter().all(|r| r.iter().all(|c| c.is_zero()))
    }

    /// Divides by an integer after canonical reduction; `None` unless exact.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let can = self.canonical();
        let (p, m) = (self.p as usize, self.m as usize);
        let mut out = Self::zero(self.p, self.m);
        for (t, row) in can.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let (q, r) = c.div_rem(d);
                if !r.is_zero() {
                    return None;
                }
                let t = if p == 1 { 0 } else { t };
                out.counts[t * m + j] = q;
            }
        }
        Some(out)
    }
}

/// `Phi_m` with integer coefficients, low to high. Memoized.
pub fn cyclotomic_polynomial(m: u32) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    // Phi_m = prod_{d | m} (x^d - 1)^{mu(m/d)}
    let divisors: Vec<u32> = (1..=m).filter(|d| m % d == 0).collect();
    let mut num: Vec<BigInt> = vec![BigInt::one()];
    let mut dens = Vec::new();
    for &d in &divisors {
        match mobius(m / d) {
            1 => {
                let mut next = vec![BigInt::zero(); num.len() + d as usize];
                for (i, c) in num.iter().enumerate() {
                    next[i + d as usize] += c;
                    next[i] -= c;
                }
                num = next;
            }
            -1 => dens.push(d),
            _ => {}
        }
    }
    for d in dens {
        let d = d as usize;
        // exact division by x^d - 1: f = g x^d - g
        let glen = num.len() - d;
        let mut g = vec![BigInt::zero(); glen];
        for i in 0..glen {
            let prev = if i >= d { g[i - d].clone() } else { BigInt::zero() };
            g[i] = prev - &num[i];
        }
        num = g;
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

fn mobius(mut n: u32) -> i32 {
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// An element of `Q(zeta_p)` on the basis `1, zeta, ..., zeta^{p-2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloRational {
    p: u32,
    coeffs: Vec<BigRational>,
}

/// A valuation value; `Infinite` sorts above every finite value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(BigRational),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl CycloRational {
    fn dim(p: u32) -> usize {
        (p as usize - 1).max(1)
    }

    pub fn zero(p: u32) -> Self {
        CycloRational { p, coeffs: vec![BigRational::zero(); Self::dim(p)] }
    }

    pub fn from_int(p: u32, c: impl Into<BigInt>) -> Self {
        Self::from_rational(p, BigRational::from_integer(c.into()))
    }

    pub fn from_rational(p: u32, c: BigRational) -> Self {
        let mut v = Self::zero(p);
        v.coeffs[0] = c;
        v
    }

    /// From `sum_{t < p} c_t zeta^t` (length `p`), using
    /// `zeta^{p-1} = -1 - zeta - ... - zeta^{p-2}`.
    pub fn from_full(p: u32, full: &[BigRational]) -> Self {
        assert_eq!(full.len(), p as usize);
        if p == 1 {
            return CycloRational { p, coeffs: vec![full[0].clone()] };
        }
        let last = &full[p as usize - 1];
        let coeffs = full[..p as usize - 1].iter().map(|c| c - last).collect();
        CycloRational { p, coeffs }
    }

    pub fn from_basis(p: u32, coeffs: Vec<BigRational>) -> Self {
        assert_eq!(coeffs.len(), Self::dim(p));
        CycloRational { p, coeffs }
    }

    /// `zeta^t`.
    pub fn root(p: u32, t: u64) -> Self {
        let mut full = vec![BigRational::zero(); p as usize];
        full[(t % p as u64) as usize] = BigRational::one();
        Self::from_full(p, &full)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// True when the element lies in `Q`.
    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    /// True when all basis coordinates are integers (i.e. the element is in
    /// `Z[zeta_p]`, since the power basis is integral).
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Conductor(format!("{} vs {}", self.p, other.p)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other).expect("conductor");
        CycloRational { p: self.p, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other).expect("conductor");
        CycloRational { p: self.p, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        CycloRational { p: self.p, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        CycloRational { p: self.p, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_int(&self, c: impl Into<BigInt>) -> Self {
        self.scale(&BigRational::from_integer(c.into()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other).expect("conductor");
        let p = self.p as usize;
        if p <= 2 {
            // Q(zeta_2) = Q(zeta_1) = Q
            let c = &self.coeffs[0] * &other.coeffs[0];
            return Self::from_rational(self.p, c);
        }
        let mut full = vec![BigRational::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                full[(i + j) % p] += a * b;
            }
        }
        Self::from_full(self.p, &full)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::from_int(self.p, 1);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// Galois automorphism `zeta -> zeta^c`, `p` not dividing `c`.
    pub fn galois(&self, c: u32) -> Self {
        let p = self.p as usize;
        if p <= 2 {
            return self.clone();
        }
        let mut full = vec![BigRational::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            full[(i * c as usize) % p] += a;
        }
        Self::from_full(self.p, &full)
    }

    pub fn conjugate(&self) -> Self {
        self.galois(self.p.saturating_sub(1).max(1))
    }

    pub fn embed_complex(&self) -> Complex64 {
        let z = root_table(self.p);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| z[i % z.len()] * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// `(d, X)` with `d > 0` and `X = d * self` integral.
    pub fn integral_scaling(&self) -> (BigInt, Vec<BigInt>) {
        let d = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let x = self.coeffs.iter().map(|c| (c * BigRational::from_integer(d.clone())).to_integer()).collect();
        (d, x)
    }

    /// Norm to `Q`, computed as `Res(Phi_p, X) / d^{p-1}`.
    pub fn norm(&self) -> BigRational {
        let (d, x) = self.integral_scaling();
        let phi = cyclotomic_polynomial(self.p);
        let res = linalg::resultant(&phi, &x);
        let deg = (self.p as usize - 1).max(1);
        BigRational::new(res, num_traits::pow(d, deg))
    }

    /// `ord_pi` of the element, where `pi` is a uniformizer above `p`.
    pub fn ord_pi(&self) -> Option<BigInt> {
        if self.is_zero() {
            return None;
        }
        let p = self.p as u64;
        let (d, x) = self.integral_scaling();
        let phi = cyclotomic_polynomial(self.p);
        let res = linalg::resultant(&phi, &x);
        let v_res = linalg::vp(&res, p) as i64;
        let v_d = linalg::vp(&d, p) as i64;
        Some(BigInt::from(v_res - (p as i64 - 1).max(1) * v_d))
    }

    /// The q-adic valuation for `q = p^a`.
    pub fn ord_q(&self, a: u32) -> Valuation {
        match self.ord_pi() {
            None => Valuation::Infinite,
            Some(v) => {
                let e = (self.p as i64 - 1).max(1) * a as i64;
                Valuation::Finite(BigRational::new(v, BigInt::from(e)))
            }
        }
    }
}

impl fmt::Display for CycloRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if i == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Reduces an untwisted (`m = 1`) sum value into `Z[zeta_p]`.
pub fn reduce_mod_phi(v: &SumValue) -> Result<CycloRational> {
    if v.m() != 1 {
        return Err(Error::Conductor(format!("expected m = 1, found m = {}", v.m())));
    }
    let full: Vec<BigRational> = v.counts().iter().map(|c| BigRational::from_integer(c.clone())).collect();
    Ok(CycloRational::from_full(v.p(), &full))
}

/// `ord_q(x)` for `q = p^a`; fails if `q` is not a power of `x`'s conductor.
pub fn ord_q_coeff(x: &CycloRational, p: u32, a: u32) -> Result<Valuation> {
    if x.p() != p {
        return Err(Error::Conductor(format!("coefficient conductor {} vs q = {}^{}", x.p(), p, a)));
    }
    Ok(x.ord_q(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn reduce_examples() {
        let v = SumValue::from_counts(3, 1, &[1i64, 1, 1]);
        assert!(reduce_mod_phi(&v).unwrap().is_zero());
        let v = SumValue::from_counts(3, 1, &[0i64, 1, 1]);
        assert_eq!(reduce_mod_phi(&v).unwrap(), CycloRational::from_int(3, -1));
        let v = SumValue::from_counts(5, 1, &[2i64, 0, 0, 0, 0]);
        assert_eq!(reduce_mod_phi(&v).unwrap().coeffs(), &[r(2), r(0), r(0), r(0)]);
        let twisted = SumValue::zero(3, 2);
        assert!(reduce_mod_phi(&twisted).is_err());
    }

    #[test]
    fn valuation_examples() {
        let pi = CycloRational::root(3, 1).sub(&CycloRational::from_int(3, 1));
        assert_eq!(ord_q_coeff(&pi, 3, 1).unwrap(), Valuation::Finite(BigRational::new(1.into(), 2.into())));
        for p in [3u32, 5, 7, 11] {
            let x = CycloRational::from_int(p, p as i64);
            assert_eq!(x.ord_q(1), Valuation::Finite(r(1)));
        }
        let x = CycloRational::root(3, 1).sub(&CycloRational::root(3, 2));
        assert_eq!(x.ord_q(1), Valuation::Finite(BigRational::new(1.into(), 2.into())));
        assert_eq!(CycloRational::zero(5).ord_q(1), Valuation::Infinite);
        // 1/p has negative valuation; q = p^2 halves it
        let x = CycloRational::from_rational(5, BigRational::new(1.into(), 5.into()));
        assert_eq!(x.ord_q(2), Valuation::Finite(BigRational::new((-1).into(), 2.into())));
    }

    #[test]
    fn embed_examples() {
        let v = SumValue::from_counts(3, 1, &[0i64, 1, 1]);
        let z = v.embed_complex();
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let v = SumValue::from_counts(3, 1, &[0i64, 1, -1]);
        let z = v.embed_complex();
        assert!((z - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        assert_eq!(SumValue::zero(7, 6).embed_complex(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cyclotomic_polynomials() {
        let small = |m| cyclotomic_polynomial(m).iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(small(1), vec![-1, 1]);
        assert_eq!(small(2), vec![1, 1]);
        assert_eq!(small(4), vec![1, 0, 1]);
        assert_eq!(small(6), vec![1, -1, 1]);
        assert_eq!(small(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(small(7), vec![1; 7]);
        // Phi_105 famously has a coefficient -2
        assert!(small(105).contains(&-2));
    }

    #[test]
    fn canonical_detects_relations() {
        // 1 + zeta_3 + zeta_3^2 = 0 on the additive side
        let v = SumValue::from_counts(3, 1, &[1i64, 1, 1]);
        assert!(v.is_zero_exact());
        // zeta_6^0 + zeta_6^2 + zeta_6^4 = 0 on the multiplicative side
        let v = SumValue::from_counts(5, 6, &{
            let mut c = [0i64; 30];
            c[0] = 1;
            c[2] = 1;
            c[4] = 1;
            c
        });
        assert!(v.is_zero_exact());
        let v = SumValue::root(5, 6, 1, 3).add(&SumValue::root(5, 6, 1, 0)).unwrap();
        assert!(v.is_zero_exact());
        assert!(!SumValue::root(5, 6, 2, 1).is_zero_exact());
    }

    #[test]
    fn norm_matches_complex_product() {
        for p in [3u32, 5, 7] {
            let x = CycloRational::from_basis(
                p,
                (0..p as i64 - 1).map(|i| r((i * 7 + 3) % 5 - 2)).collect(),
            );
            let mut prod = Complex64::new(1.0, 0.0);
            for c in 1..p {
                prod *= x.galois(c).embed_complex();
            }
            let n = x.norm().to_f64().unwrap();
            assert!((prod.re - n).abs() < 1e-6 * n.abs().max(1.0), "p={p}: {prod} vs {n}");
            assert!(prod.im.abs() < 1e-6);
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn cyclo(p: u32) -> impl Strategy<Value = CycloRational> {
        prop::collection::vec(-6i64..6, (p - 1) as usize).prop_map(move |v| {
            CycloRational::from_basis(p, v.into_iter().map(|c| BigRational::from_integer(c.into())).collect())
        })
    }

    fn sumvalue(p: u32, m: u32) -> impl Strategy<Value = SumValue> {
        prop::collection::vec(-3i64..4, (p * m) as usize).prop_map(move |v| SumValue::from_counts(p, m, &v))
    }

    proptest! {
        #[test]
        fn ord_is_a_valuation(p in prop::sample::select(vec![3u32, 5, 7]), seed in 0u64..1000) {
            let mk = |s: u64| CycloRational::from_basis(p, (0..p as u64 - 1)
                .map(|i| BigRational::from_integer((((s * 31 + i * 17) % 11) as i64 - 5).into())).collect());
            let x = mk(seed);
            let y = mk(seed / 7 + 3);
            let (vx, vy) = (x.ord_q(1), y.ord_q(1));
            let vxy = x.mul(&y).ord_q(1);
            if let (Valuation::Finite(a), Valuation::Finite(b)) = (&vx, &vy) {
                prop_assert_eq!(vxy, Valuation::Finite(a + b));
            }
            let vsum = x.add(&y).ord_q(1);
            prop_assert!(vsum >= vx.clone().min(vy.clone()));
        }

        #[test]
        fn cyclo_mul_matches_embedding(x in cyclo(7), y in cyclo(7)) {
            let lhs = x.mul(&y).embed_complex();
            let rhs = x.embed_complex() * y.embed_complex();
            prop_assert!((lhs - rhs).norm() < 1e-9);
            prop_assert_eq!(x.mul(&y), y.mul(&x));
        }

        #[test]
        fn histogram_mul_matches_embedding(x in sumvalue(5, 4), y in sumvalue(5, 4)) {
            let xy = x.mul(&y).unwrap();
            prop_assert!((xy.embed_complex() - x.embed_complex() * y.embed_complex()).norm() < 1e-9);
            prop_assert!((x.add(&y).unwrap().embed_complex() - x.embed_complex() - y.embed_complex()).norm() < 1e-9);
        }

        #[test]
        fn reduction_is_a_ring_map(x in sumvalue(5, 1), y in sumvalue(5, 1)) {
            let rx = reduce_mod_phi(&x).unwrap();
            let ry = reduce_mod_phi(&y).unwrap();
            prop_assert_eq!(reduce_mod_phi(&x.add(&y).unwrap()).unwrap(), rx.add(&ry));
            prop_assert_eq!(reduce_mod_phi(&x.mul(&y).unwrap()).unwrap(), rx.mul(&ry));
        }

        #[test]
        fn canonical_equality_agrees_with_embedding(x in sumvalue(3, 8), y in sumvalue(3, 8)) {
            let eq = x.exact_eq(&y).unwrap();
            let close = (x.embed_complex() - y.embed_complex()).norm() < 1e-9;
            // exact equality implies equal embeddings; a shared embedding
            // with distinct canonical forms would be a reduction bug
            prop_assert_eq!(eq, close);
        }
    }
}
