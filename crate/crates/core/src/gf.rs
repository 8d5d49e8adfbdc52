//! Table-driven finite fields `F_{p^a}` and relative trace/norm maps between
//! a field and one of its extensions.
//!
//! Elements are encoded as integers in `[0, q)`: the coefficient vector of the
//! polynomial-basis representative, read as base-`p` digits with the constant
//! term least significant. `0` encodes the zero element and `1` the unit.
//!
//! All tables are built once; a [`FieldTable`] is immutable afterwards and can
//! be shared freely between worker threads.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default upper bound on the number of field elements that may be tabulated.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 26;

/// Marker in the Zech table for `1 + g^d = 0`.
pub const ZECH_ZERO: u32 = u32::MAX;

/// Marker in the discrete-log table for the zero element.
pub const LOG_ZERO: u32 = u32::MAX;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors of `n` in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense polynomials over Z/p, coefficients low to high, no trailing zeros.
mod poly {
    pub type Poly = Vec<u64>;

    pub fn trim(mut f: Poly) -> Poly {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn inv_mod(x: u64, p: u64) -> u64 {
        // p is prime and small enough that Fermat is cheap
        pow_mod(x, p - 2, p)
    }

    pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1 % p;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    pub fn rem(f: &[u64], m: &[u64], p: u64) -> Poly {
        let mut r: Poly = trim(f.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let dr = r.len() - 1;
            let c = r[dr] * lead_inv % p;
            let shift = dr - dm;
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - c * mi % p) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn mul_mod(f: &[u64], g: &[u64], m: &[u64], p: u64) -> Poly {
        if f.is_empty() || g.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; f.len() + g.len() - 1];
        for (i, &a) in f.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in g.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % p;
            }
        }
        rem(&out, m, p)
    }

    pub fn pow_poly_mod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Poly {
        let mut result: Poly = vec![1];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mul_mod(&result, &b, m, p);
            }
            b = mul_mod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin-style test: `f` (monic, degree a) is irreducible iff
    /// gcd(x^{p^i} - x, f) = 1 for 1 <= i <= a/2.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let a = f.len() - 1;
        if a <= 1 {
            return a == 1;
        }
        let x: Poly = vec![0, 1];
        let mut h = rem(&x, f, p);
        for _ in 1..=a / 2 {
            h = pow_poly_mod(&h, p, f, p);
            let mut diff = h.clone();
            if diff.len() < 2 {
                diff.resize(2, 0);
            }
            diff[1] = (diff[1] + p - 1) % p;
            let g = gcd(&trim(diff), f, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

/// A tabulated finite field `F_q`, `q = p^a`.
#[derive(Debug, Clone)]
pub struct FieldTable {
    p: u32,
    a: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: u32,
    exp: Vec<u32>,
    dlog: Vec<u32>,
    inv: Vec<u32>,
    trace: Vec<u32>,
    zech: Vec<u32>,
    trace_by_log: Vec<u32>,
}

fn table_bytes(q: u128) -> u128 {
    // exp, dlog, inv, trace, zech, trace_by_log: six u32 tables
    q * 4 * 6
}

fn check_cap(order: u128, cap: u64) -> Result<()> {
    if order > cap as u128 {
        return Err(Error::TableCap { order, cap, bytes: table_bytes(order) });
    }
    Ok(())
}

/// Builds `F_{p^a}` with the default table cap.
pub fn build_field(p: u64, a: u32) -> Result<FieldTable> {
    build_field_capped(p, a, DEFAULT_TABLE_CAP)
}

/// Builds `F_{p^a}`.
///
/// The modulus is the smallest monic irreducible of degree `a` when the
/// coefficients are compared from the constant term upward; the generator is
/// the primitive element with the smallest encoding.
pub fn build_field_capped(p: u64, a: u32, cap: u64) -> Result<FieldTable> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if a == 0 {
        return Err(Error::ZeroDegree);
    }
    let order = (p as u128).checked_pow(a).unwrap_or(u128::MAX);
    check_cap(order, cap)?;
    let q = order as u64;
    let modulus = smallest_irreducible(p, a as usize);
    FieldTable::from_modulus(p, a, q, modulus)
}

fn smallest_irreducible(p: u64, a: usize) -> Vec<u64> {
    if a == 1 {
        return vec![0, 1];
    }
    let count = p.pow(a as u32);
    for idx in 0..count {
        // the constant term is the most significant digit of the search index
        let mut f = vec![0u64; a + 1];
        let mut rest = idx;
        for i in (0..a).rev() {
            f[i] = rest % p;
            rest /= p;
        }
        f[a] = 1;
        if f[0] == 0 {
            continue;
        }
        if poly::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldTable {
    fn from_modulus(p: u64, a: u32, q: u64, modulus: Vec<u64>) -> Result<Self> {
        let au = a as usize;
        let to_poly = |x: u64| -> Vec<u64> {
            let mut v = Vec::with_capacity(au);
            let mut r = x;
            for _ in 0..au {
                v.push(r % p);
                r /= p;
            }
            poly::trim(v)
        };
        let from_poly = |f: &[u64]| -> u64 {
            f.iter().rev().fold(0u64, |acc, &c| acc * p + c)
        };
        let n = q - 1;
        let factors = prime_factors(n);

        // smallest primitive element
        let mut generator = None;
        for cand in 1..q {
            let g = to_poly(cand);
            let ok = factors
                .iter()
                .all(|&r| poly::pow_poly_mod(&g, n / r, &modulus, p) != vec![1]);
            if ok {
                generator = Some(cand);
                break;
            }
        }
        let generator = generator.expect("F_q* is cyclic");

        let mut exp = vec![0u32; n as usize];
        let mut dlog = vec![LOG_ZERO; q as usize];
        let gpoly = to_poly(generator);
        let mut cur: Vec<u64> = vec![1];
        for i in 0..n as usize {
            let e = from_poly(&cur) as u32;
            exp[i] = e;
            dlog[e as usize] = i as u32;
            cur = poly::mul_mod(&cur, &gpoly, &modulus, p);
        }
        if from_poly(&cur) != 1 {
            return Err(Error::Mismatch("generator order".into()));
        }

        let mut inv = vec![0u32; q as usize];
        for x in 1..q as usize {
            let l = dlog[x] as u64;
            inv[x] = exp[((n - l) % n) as usize];
        }

        // trace of each basis monomial X^i: sum_j (X^i)^{p^j}
        let mut basis_trace = Vec::with_capacity(au);
        for i in 0..au {
            let mut xi = vec![0u64; i + 1];
            xi[i] = 1;
            let mut term = poly::rem(&xi, &modulus, p);
            let mut acc = vec![0u64; au];
            for _ in 0..au {
                for (c, t) in acc.iter_mut().zip(term.iter()) {
                    *c = (*c + t) % p;
                }
                term = poly::pow_poly_mod(&term, p, &modulus, p);
            }
            if acc.iter().skip(1).any(|&c| c != 0) {
                return Err(Error::Mismatch("trace not in prime field".into()));
            }
            basis_trace.push(acc[0]);
        }
        let mut trace = vec![0u32; q as usize];
        for x in 0..q {
            let mut r = x;
            let mut t = 0u64;
            for bt in &basis_trace {
                t = (t + (r % p) * bt) % p;
                r /= p;
            }
            trace[x as usize] = t as u32;
        }

        let mut zech = vec![ZECH_ZERO; n as usize];
        for d in 0..n as usize {
            let e = exp[d] as u64;
            let c0 = e % p;
            let one_plus = e - c0 + (c0 + 1) % p;
            if one_plus != 0 {
                zech[d] = dlog[one_plus as usize];
            }
        }
        let trace_by_log = exp.iter().map(|&e| trace[e as usize]).collect();

        Ok(FieldTable {
            p: p as u32,
            a,
            q: q as u32,
            modulus: modulus.into_iter().map(|c| c as u32).collect(),
            generator: generator as u32,
            exp,
            dlog,
            inv,
            trace,
            zech,
            trace_by_log,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Extension degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.a
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Order of the multiplicative group, `q - 1`.
    pub fn units(&self) -> u32 {
        self.q - 1
    }

    /// Modulus coefficients from the constant term up to the leading 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn exp(&self, i: u64) -> u32 {
        self.exp[(i % self.units() as u64) as usize]
    }

    /// Discrete log to base `g`, `None` for zero.
    pub fn log(&self, x: u32) -> Option<u32> {
        let l = self.dlog[x as usize];
        (l != LOG_ZERO).then_some(l)
    }

    pub fn inv(&self, x: u32) -> Option<u32> {
        (x != 0).then(|| self.inv[x as usize])
    }

    /// Absolute trace to the prime field.
    pub fn trace(&self, x: u32) -> u32 {
        self.trace[x as usize]
    }

    pub fn exp_table(&self) -> &[u32] {
        &self.exp
    }

    pub fn log_table(&self) -> &[u32] {
        &self.dlog
    }

    /// `zech[d] = log(1 + g^d)`, or [`ZECH_ZERO`] when `1 + g^d = 0`.
    pub fn zech_table(&self) -> &[u32] {
        &self.zech
    }

    /// `trace(g^i)` indexed by `i`.
    pub fn trace_by_log(&self) -> &[u32] {
        &self.trace_by_log
    }

    pub fn add(&self, x: u32, y: u32) -> u32 {
        let p = self.p;
        if self.a == 1 {
            return (x + y) % p;
        }
        let (mut x, mut y) = (x, y);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.a {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    pub fn neg(&self, x: u32) -> u32 {
        let p = self.p;
        if self.a == 1 {
            return (p - x) % p;
        }
        let mut x = x;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.a {
            out += ((p - x % p) % p) * place;
            x /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    pub fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: u32, y: u32) -> u32 {
        if x == 0 || y == 0 {
            return 0;
        }
        let n = self.units() as u64;
        let l = self.dlog[x as usize] as u64 + self.dlog[y as usize] as u64;
        self.exp[(l % n) as usize]
    }

    pub fn pow(&self, x: u32, e: u64) -> u32 {
        if x == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let n = self.units() as u64;
        let l = self.dlog[x as usize] as u64 % n;
        self.exp[((l as u128 * e as u128) % n as u128) as usize]
    }

    /// Embeds a prime-field residue `c mod p` as a field element.
    pub fn from_prime(&self, c: i64) -> u32 {
        c.rem_euclid(self.p as i64) as u32
    }

    /// Integer scalar multiple `c * x`.
    pub fn scale(&self, c: i64, x: u32) -> u32 {
        self.mul(self.from_prime(c), x)
    }
}

/// The relative maps between `F_q` and its degree-`k` extension `F_{q^k}`.
#[derive(Debug, Clone)]
pub struct ExtensionMaps {
    base: Arc<FieldTable>,
    ext: Arc<FieldTable>,
    k: u32,
    embed: Vec<u32>,
    restrict: HashMap<u32, u32>,
    norm_log_factor: u64,
}

/// Builds the degree-`k` extension of `base` with the default table cap.
pub fn field_maps(base: &Arc<FieldTable>, k: u32) -> Result<ExtensionMaps> {
    field_maps_capped(base, k, DEFAULT_TABLE_CAP)
}

pub fn field_maps_capped(base: &Arc<FieldTable>, k: u32, cap: u64) -> Result<ExtensionMaps> {
    if k == 0 {
        return Err(Error::ZeroDegree);
    }
    let p = base.p() as u64;
    let q = base.order() as u64;
    if k == 1 {
        let embed: Vec<u32> = (0..q as u32).collect();
        let restrict = embed.iter().map(|&x| (x, x)).collect();
        return Ok(ExtensionMaps {
            base: base.clone(),
            ext: base.clone(),
            k,
            embed,
            restrict,
            norm_log_factor: 1,
        });
    }
    let ext_degree = base.degree().checked_mul(k).ok_or(Error::Invalid("degree overflow".into()))?;
    let ext = Arc::new(build_field_capped(p, ext_degree, cap)?);
    let big_q = ext.order() as u64;
    let cofactor = (big_q - 1) / (q - 1);

    // the copy of F_q inside F_{q^k}: zero plus the powers of h = g^{(Q-1)/(q-1)}
    let h_log = cofactor;
    let mut subfield: Vec<u32> = vec![0];
    subfield.extend((0..q - 1).map(|i| ext.exp(i * h_log)));

    // a root of the base modulus fixes the embedding of the polynomial basis
    let m = base.modulus();
    let eval = |y: u32| -> u32 {
        m.iter()
            .rev()
            .fold(0u32, |acc, &c| ext.add(ext.mul(acc, y), ext.from_prime(c as i64)))
    };
    let root = subfield
        .iter()
        .copied()
        .filter(|&y| eval(y) == 0)
        .min()
        .ok_or_else(|| Error::Mismatch("base modulus has no root in the extension".into()))?;

    let a = base.degree() as usize;
    let mut embed = vec![0u32; q as usize];
    for (x, slot) in embed.iter_mut().enumerate() {
        let mut r = x as u64;
        let mut acc = 0u32;
        let mut power = 1u32;
        for _ in 0..a {
            let c = (r % p) as i64;
            r /= p;
            acc = ext.add(acc, ext.scale(c, power));
            power = ext.mul(power, root);
        }
        *slot = acc;
    }
    let restrict: HashMap<u32, u32> = embed.iter().enumerate().map(|(x, &y)| (y, x as u32)).collect();
    if restrict.len() != q as usize {
        return Err(Error::Mismatch("embedding is not injective".into()));
    }

    let h = ext.exp(h_log);
    let h_base = restrict[&h];
    let norm_log_factor = base.log(h_base).expect("norm of a generator is nonzero") as u64;

    Ok(ExtensionMaps { base: base.clone(), ext, k, embed, restrict, norm_log_factor })
}

impl ExtensionMaps {
    pub fn base(&self) -> &Arc<FieldTable> {
        &self.base
    }

    pub fn ext(&self) -> &Arc<FieldTable> {
        &self.ext
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn embed(&self, y: u32) -> u32 {
        self.embed[y as usize]
    }

    /// Preimage of a subfield element, `None` if `x` is not in `F_q`.
    pub fn restrict(&self, x: u32) -> Option<u32> {
        self.restrict.get(&x).copied()
    }

    /// `N(g_ext) = g_base^e`; so `log_base N(g_ext^t) = e t mod (q - 1)`.
    pub fn norm_log_factor(&self) -> u64 {
        self.norm_log_factor
    }

    /// Relative trace `x + x^q + ... + x^{q^{k-1}}`.
    pub fn tr_rel(&self, x: u32) -> u32 {
        let q = self.base.order() as u64;
        let mut acc = 0u32;
        let mut e = 1u64;
        for _ in 0..self.k {
            acc = self.ext.add(acc, self.ext.pow(x, e));
            e *= q;
        }
        self.restrict(acc).expect("relative trace lands in the base field")
    }

    /// Relative norm `x^{(q^k - 1)/(q - 1)}`.
    pub fn norm_rel(&self, x: u32) -> u32 {
        match self.ext.log(x) {
            None => 0,
            Some(t) => {
                let n = self.base.units() as u64;
                self.base.exp(self.norm_log_factor * t as u64 % n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f7_generator_is_three() {
        let f = build_field(7, 1).unwrap();
        assert_eq!(f.generator(), 3);
        assert_eq!(f.order(), 7);
    }

    #[test]
    fn f9_modulus_is_x2_plus_1() {
        let f = build_field(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn rejects_composite_characteristic() {
        assert_eq!(build_field(4, 1).unwrap_err(), Error::NotPrime(4));
    }

    #[test]
    fn cap_is_enforced() {
        let err = build_field_capped(3, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::TableCap { order: 59049, .. }));
    }

    #[test]
    fn smallest_irreducibles_brute_force() {
        // compare against exhaustive root/factor search in degrees 2 and 3
        for &(p, a) in &[(2u64, 2usize), (2, 3), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let f = smallest_irreducible(p, a);
            // no roots is sufficient for degree <= 3
            for x in 0..p {
                let v = f.iter().rev().fold(0, |acc, &c| (acc * x + c) % p);
                assert_ne!(v, 0, "p={p} a={a} f={f:?} has root {x}");
            }
            // every earlier candidate has a root
            let key = |g: &[u64]| g[..a].to_vec();
            for idx in 0..p.pow(a as u32) {
                let mut g = vec![0u64; a + 1];
                let mut rest = idx;
                for i in (0..a).rev() {
                    g[i] = rest % p;
                    rest /= p;
                }
                g[a] = 1;
                if key(&g) >= key(&f) {
                    break;
                }
                let has_root = (0..p).any(|x| g.iter().rev().fold(0, |acc, &c| (acc * x + c) % p) == 0);
                assert!(has_root, "p={p} a={a}: {g:?} precedes {f:?} but is irreducible");
            }
        }
    }

    #[test]
    fn generator_has_full_order_and_is_smallest() {
        for &(p, a) in &[(2, 3), (3, 2), (5, 2), (7, 1), (13, 1), (2, 5)] {
            let f = build_field(p, a).unwrap();
            let n = f.units() as u64;
            let order = |x: u32| (1..=n).find(|&d| f.pow(x, d) == 1).unwrap();
            assert_eq!(order(f.generator()), n);
            for c in 1..f.generator() {
                assert!(order(c) < n);
            }
        }
    }

    #[test]
    fn tables_are_consistent_exhaustively() {
        for &(p, a) in &[(2, 4), (3, 3), (5, 2), (7, 2), (3, 6)] {
            let f = build_field(p, a).unwrap();
            let q = f.order();
            let n = f.units() as u64;
            for i in 0..n {
                assert_eq!(f.log(f.exp(i)), Some(i as u32));
            }
            for x in 1..q {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
                // trace is Frobenius invariant
                assert_eq!(f.trace(f.pow(x, p)), f.trace(x));
            }
            for x in 0..q {
                for y in (0..q).step_by(((q / 50) as usize).max(1)) {
                    assert_eq!(f.trace(f.add(x, y)), (f.trace(x) + f.trace(y)) % p as u32);
                }
            }
        }
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        let f = build_field(7, 4).unwrap();
        let n = f.units() as u64;
        for x in (1..f.order()).step_by(7) {
            for y in (1..f.order()).step_by(11) {
                let lhs = f.log(f.mul(x, y)).unwrap() as u64;
                let rhs = (f.log(x).unwrap() as u64 + f.log(y).unwrap() as u64) % n;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn multiplication_matches_polynomial_arithmetic() {
        let f = build_field(3, 3).unwrap();
        let m: Vec<u64> = f.modulus().iter().map(|&c| c as u64).collect();
        let to_poly = |x: u32| {
            let mut v = vec![];
            let mut r = x as u64;
            for _ in 0..3 {
                v.push(r % 3);
                r /= 3;
            }
            poly::trim(v)
        };
        for x in 0..27u32 {
            for y in 0..27u32 {
                let prod = poly::mul_mod(&to_poly(x), &to_poly(y), &m, 3);
                let enc = prod.iter().rev().fold(0u64, |acc, &c| acc * 3 + c) as u32;
                assert_eq!(f.mul(x, y), enc);
            }
        }
    }

    #[test]
    fn f9_relative_trace_of_i_vanishes() {
        let base = Arc::new(build_field(3, 1).unwrap());
        let maps = field_maps(&base, 2).unwrap();
        let ext = maps.ext();
        // t = X with X^2 = -1
        let t = 3u32;
        assert_eq!(ext.mul(t, t), ext.neg(1));
        assert_eq!(maps.tr_rel(t), 0);
    }

    #[test]
    fn degree_one_maps_are_identity() {
        let base = Arc::new(build_field(5, 2).unwrap());
        let maps = field_maps(&base, 1).unwrap();
        for x in 0..25 {
            assert_eq!(maps.tr_rel(x), x);
            assert_eq!(maps.norm_rel(x), x);
            assert_eq!(maps.embed(x), x);
        }
    }

    #[test]
    fn norm_from_f49_is_surjective() {
        let base = Arc::new(build_field(7, 1).unwrap());
        let maps = field_maps(&base, 2).unwrap();
        let ext = maps.ext();
        let x = ext.generator();
        assert_eq!(maps.norm_rel(x), maps.restrict(ext.pow(x, 8)).unwrap());
        let mut image: Vec<u32> = (1..49).map(|y| maps.norm_rel(y)).collect();
        image.sort();
        image.dedup();
        assert_eq!(image, (1..7).collect::<Vec<_>>());
        let g_norm = maps.norm_rel(x);
        assert_eq!((1..=6).find(|&d| base.pow(g_norm, d) == 1), Some(6));
    }

    #[test]
    fn extension_invariants_exhaustive() {
        for &(p, a, k) in &[(3u64, 1u32, 2u32), (3, 2, 3), (2, 2, 3), (5, 1, 3), (2, 1, 4), (3, 1, 6)] {
            let base = Arc::new(build_field(p, a).unwrap());
            let maps = field_maps(&base, k).unwrap();
            let ext = maps.ext();
            let q = base.order();
            for y in 0..q {
                for z in 0..q {
                    let (ey, ez) = (maps.embed(y), maps.embed(z));
                    assert_eq!(ext.add(ey, ez), maps.embed(base.add(y, z)));
                    assert_eq!(ext.mul(ey, ez), maps.embed(base.mul(y, z)));
                }
                assert_eq!(maps.tr_rel(maps.embed(y)), base.scale(k as i64, y));
                assert_eq!(maps.norm_rel(maps.embed(y)), base.pow(y, k as u64));
            }
            let big_q = ext.order();
            for x in 0..big_q {
                // absolute trace factors through the relative trace
                assert_eq!(ext.trace(x), base.trace(maps.tr_rel(x)));
                let e = (big_q as u64 - 1) / (q as u64 - 1);
                assert_eq!(maps.embed(maps.norm_rel(x)), ext.pow(x, e));
            }
        }
    }

    #[test]
    fn zech_table_matches_addition() {
        let f = build_field(5, 3).unwrap();
        for d in 0..f.units() as u64 {
            let s = f.add(1, f.exp(d));
            match f.zech_table()[d as usize] {
                ZECH_ZERO => assert_eq!(s, 0),
                z => assert_eq!(f.exp(z as u64), s),
            }
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn norm_multiplicative_trace_additive(x in 0u32..16807, y in 0u32..16807) {
            let base = Arc::new(build_field(7, 1).unwrap());
            let maps = field_maps(&base, 5).unwrap();
            let ext = maps.ext();
            prop_assert_eq!(maps.norm_rel(ext.mul(x, y)), base.mul(maps.norm_rel(x), maps.norm_rel(y)));
            prop_assert_eq!(maps.tr_rel(ext.add(x, y)), base.add(maps.tr_rel(x), maps.tr_rel(y)));
        }
    }
}
