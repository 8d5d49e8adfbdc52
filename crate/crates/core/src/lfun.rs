//! The L-function of the untwisted inverted Kloosterman sums.
//!
//! `L_n(b, T)^{(-1)^{n+1}} = (1-T)^{n+1} prod_{j=2}^{n} (1 - q^{j-1} T)^{C(n,j)(-1)^{j-1}} P(T)`
//! with `deg P = 2n`. The shape of the trivial factors is taken as known, so
//! the first `2n` sums determine `P`; further sums are predicted and checked
//! against fresh enumeration.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::cyclotomic::{ord_q_coeff, reduce_mod_phi, CycloRational, Valuation};
use crate::error::{Error, Result};
use crate::expsum::{kloosterman_cost, kloosterman_sum, CharacterTuple, Limits};
use crate::gf::FieldTable;

/// A factor `(1 - q^e T)^m` of the trivial part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivialFactor {
    pub q_power: u32,
    pub multiplicity: i64,
}

/// Result of comparing one predicted sum with a freshly enumerated one.
#[derive(Clone, Debug, PartialEq)]
pub struct HeldOut {
    pub k: u32,
    pub predicted: CycloRational,
    pub actual: CycloRational,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LFactorization {
    pub n: usize,
    pub p: u32,
    pub a: u32,
    pub q: u64,
    pub b: u32,
    /// `(-1)^{n+1}`
    pub sign: i32,
    pub trivial: Vec<TrivialFactor>,
    /// `S_{k,n}(b)` for `k = 1..2n`
    pub sums: Vec<CycloRational>,
    /// coefficients of `P(T)`, constant term first
    pub p_coeffs: Vec<CycloRational>,
    pub np_points: Vec<(usize, BigRational)>,
    /// `(slope, horizontal length)`, increasing
    pub slopes: Vec<(BigRational, usize)>,
    pub complex_roots: Vec<Complex64>,
    pub heldout: Vec<HeldOut>,
}

fn q_pow(q: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(q), k as usize)
}

fn check_nondegenerate(p: u32, n: usize) -> Result<()> {
    if (n as u64 + 1) % p as u64 == 0 {
        return Err(Error::Degenerate { p: p as u64, n1: n as u64 + 1 });
    }
    Ok(())
}

/// `S_{k,n}(b)` over `F_{q^k}` for `k = 1..=kmax`, as elements of `Z[zeta_p]`.
/// The whole enumeration is costed before any of it starts.
pub fn kloosterman_values(
    base: &Arc<FieldTable>,
    n: usize,
    b: u32,
    ks: &[u32],
    limits: &Limits,
) -> Result<Vec<CycloRational>> {
    let total: u128 = ks.iter().map(|&k| kloosterman_cost(base.order() as u64, k, n)).sum();
    limits.check(total)?;
    let chi = CharacterTuple::trivial(n + 1, base.units());
    ks.iter()
        .map(|&k| reduce_mod_phi(&kloosterman_sum(base, k, n, b, &chi, limits)?))
        .collect()
}

/// `S*_k = q^k S_{k,n}(b) + (q^k - 1)^n` for `k = 1..=kmax`.
pub fn power_sums(base: &Arc<FieldTable>, n: usize, b: u32, kmax: u32, limits: &Limits) -> Result<Vec<CycloRational>> {
    check_nondegenerate(base.p(), n)?;
    let ks: Vec<u32> = (1..=kmax).collect();
    let sums = kloosterman_values(base, n, b, &ks, limits)?;
    Ok(toric_from_kloosterman(&sums, n, base.order() as u64))
}

/// Maps `S_{k,n}` (listed for `k = 1, 2, ...`) to `S*_k`.
pub fn toric_from_kloosterman(sums: &[CycloRational], n: usize, q: u64) -> Vec<CycloRational> {
    sums.iter()
        .enumerate()
        .map(|(i, s)| {
            let qk = q_pow(q, i as u32 + 1);
            let shift = num_traits::pow(&qk - 1, n);
            s.scale_int(qk).add(&CycloRational::from_int(s.p(), shift))
        })
        .collect()
}

/// Newton's identities: `e_k = (1/k) sum_{i=1}^{k} (-1)^{i-1} e_{k-i} p_i`.
/// Returns `e_1..e_d`.
pub fn newton_to_elementary(power: &[CycloRational]) -> Vec<CycloRational> {
    let Some(first) = power.first() else { return Vec::new() };
    let p = first.p();
    let mut e = vec![CycloRational::from_int(p, 1)];
    for k in 1..=power.len() {
        let mut acc = CycloRational::zero(p);
        for i in 1..=k {
            let term = e[k - i].mul(&power[i - 1]);
            acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        }
        e.push(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(k))));
    }
    e.remove(0);
    e
}

/// The inverse direction: power sums `p_1..p_kmax` of the roots whose
/// elementary symmetric functions are `e_1..e_d` (zero beyond `d`).
pub fn elementary_to_power(e: &[CycloRational], p: u32, kmax: usize) -> Vec<CycloRational> {
    let get = |i: usize| if i <= e.len() { e[i - 1].clone() } else { CycloRational::zero(p) };
    let mut pw: Vec<CycloRational> = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let mut acc = get(k).scale_int(k as i64);
        if k % 2 == 0 {
            acc = acc.neg();
        }
        for i in 1..k {
            let term = get(i).mul(&pw[k - i - 1]);
            acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
        }
        pw.push(acc);
    }
    pw
}

/// Recovers `P(T) = prod (1 - alpha_i T)` from `S*_1..S*_{2n}`.
pub fn strip_trivial_roots(s_star: &[CycloRational], n: usize, q: u64) -> Result<Vec<CycloRational>> {
    if s_star.len() < 2 * n {
        return Err(Error::Invalid(format!("need {} power sums, got {}", 2 * n, s_star.len())));
    }
    let p = s_star[0].p();
    let power: Vec<CycloRational> = s_star[..2 * n]
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let signed = if n % 2 == 0 { s.clone() } else { s.neg() };
            let trivial = BigInt::one() + q_pow(q, i as u32 + 1);
            signed.sub(&CycloRational::from_int(p, trivial))
        })
        .collect();
    let e = newton_to_elementary(&power);
    let mut coeffs = vec![CycloRational::from_int(p, 1)];
    for (i, ek) in e.iter().enumerate() {
        let k = i + 1;
        let mut c = ek.scale(&BigRational::new(BigInt::one(), q_pow(q, k as u32)));
        if k % 2 == 1 {
            c = c.neg();
        }
        if !c.is_integral() {
            return Err(Error::NonIntegral(k));
        }
        coeffs.push(c);
    }
    Ok(coeffs)
}

/// `(1-T)^{n+1}` and `(1 - q^{j-1} T)^{C(n,j)(-1)^{j-1}}` for `j = 2..n`.
pub fn trivial_part(n: usize) -> Vec<TrivialFactor> {
    let mut out = vec![TrivialFactor { q_power: 0, multiplicity: n as i64 + 1 }];
    for j in 2..=n {
        let sign = if j % 2 == 0 { -1 } else { 1 };
        out.push(TrivialFactor { q_power: j as u32 - 1, multiplicity: sign * binomial(n as i64, j as i64) });
    }
    out
}

/// Lower convex hull of `(k, ord_q a_k)`, skipping zero coefficients.
/// Returns the hull vertices and the slopes with their horizontal lengths.
pub fn newton_polygon(
    coeffs: &[CycloRational],
    p: u32,
    a: u32,
) -> Result<(Vec<(usize, BigRational)>, Vec<(BigRational, usize)>)> {
    let mut pts = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        if let Valuation::Finite(v) = ord_q_coeff(c, p, a)? {
            pts.push((k, v));
        }
    }
    let hull = lower_hull(&pts);
    let slopes = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            ((&w[1].1 - &w[0].1) / BigRational::from_integer(BigInt::from(len)), len)
        })
        .collect();
    Ok((hull, slopes))
}

fn lower_hull(pts: &[(usize, BigRational)]) -> Vec<(usize, BigRational)> {
    let mut hull: Vec<(usize, BigRational)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (x1, y1) = &hull[hull.len() - 2];
            let (x2, y2) = &hull[hull.len() - 1];
            // drop the middle point unless it lies strictly below the chord
            let lhs = (y2 - y1) * BigRational::from_integer(BigInt::from(pt.0 - x1));
            let rhs = (&pt.1 - y1) * BigRational::from_integer(BigInt::from(x2 - x1));
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt.clone());
    }
    hull
}

/// Expands `(slope, length)` pairs into a sorted slope sequence.
pub fn slope_sequence(slopes: &[(BigRational, usize)]) -> Vec<BigRational> {
    slopes.iter().flat_map(|(s, len)| std::iter::repeat_n(s.clone(), *len)).collect()
}

/// `{0, 1, 1, 2, 2, ..., n-1, n-1, n}`.
pub fn hodge_slopes(n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero()];
    for i in 1..n {
        v.push(BigRational::from_integer(i.into()));
        v.push(BigRational::from_integer(i.into()));
    }
    v.push(BigRational::from_integer(n.into()));
    v
}

/// How a Newton polygon sits relative to a Hodge polygon, both given as
/// sorted slope sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygonRelation {
    Equal,
    /// on or above, same endpoints, touching at fewer vertices
    StrictlyAbove,
    /// below somewhere, or with different endpoints
    Violates,
}

pub fn compare_polygons(np: &[BigRational], hp: &[BigRational]) -> PolygonRelation {
    if np.len() != hp.len() {
        return PolygonRelation::Violates;
    }
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    for (x, y) in np.iter().zip(hp) {
        a += x;
        b += y;
        if a < b {
            return PolygonRelation::Violates;
        }
    }
    if a != b {
        PolygonRelation::Violates
    } else if np == hp {
        PolygonRelation::Equal
    } else {
        PolygonRelation::StrictlyAbove
    }
}

/// Complex reciprocal roots of `P(T) = sum c_k T^k` with `c_0 = 1`.
pub fn complex_roots(coeffs: &[CycloRational]) -> Result<Vec<Complex64>> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    // reciprocal roots are the roots of the reversed (monic) polynomial
    let monic: Vec<Complex64> = coeffs.iter().rev().map(|c| c.embed_complex()).collect();
    aberth(&monic)
}

/// Magnitudes of the reciprocal roots, sorted.
pub fn complex_weights(coeffs: &[CycloRational]) -> Result<Vec<f64>> {
    let mut m: Vec<f64> = complex_roots(coeffs)?.iter().map(|z| z.norm()).collect();
    m.sort_by(f64::total_cmp);
    Ok(m)
}

/// All roots of `sum_i c_i x^i` (low to high, leading coefficient last)
/// by Aberth-Ehrlich iteration.
pub fn aberth(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = c.len() - 1;
    let lead = c[d];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| {
        let mut v = Complex64::zero();
        let mut dv = Complex64::zero();
        for &ci in c.iter().rev() {
            dv = dv * z + v;
            v = v * z + ci;
        }
        (v, dv)
    };
    // Cauchy bound for the starting circle
    let radius = 1.0 + c[..d].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let r0 = radius.min(c[0].norm().powf(1.0 / d as f64).max(1e-3));
    let mut z: Vec<Complex64> =
        (0..d).map(|i| Complex64::from_polar(r0, std::f64::consts::TAU * (i as f64 + 0.4) / d as f64)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (v, dv) = eval(z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulse: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::one() - ratio * repulse);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-15 {
            break;
        }
    }
    let scale: f64 = c.iter().map(|x| x.norm()).sum();
    let residual = z
        .iter()
        .map(|&zi| eval(zi).0.norm() / (scale * zi.norm().max(1.0).powi(d as i32)))
        .fold(0.0, f64::max);
    if residual > 1e-9 || !residual.is_finite() {
        return Err(Error::RootFinding(residual));
    }
    Ok(z)
}

/// `S_{k,n}(b)` as predicted by the assembled factorization:
/// `S_k = -(-1)^{n+1} [ (n+1) + sum_j m_j q^{(j-1)k} + sum_i alpha_i^k ]`.
pub fn predicted_sums(p_coeffs: &[CycloRational], n: usize, q: u64, ks: &[u32]) -> Vec<CycloRational> {
    let p = p_coeffs[0].p();
    let e: Vec<CycloRational> = p_coeffs[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { c.neg() } else { c.clone() })
        .collect();
    let kmax = ks.iter().copied().max().unwrap_or(0) as usize;
    let alpha_powers = elementary_to_power(&e, p, kmax);
    let trivial = trivial_part(n);
    ks.iter()
        .map(|&k| {
            let mut t = BigInt::zero();
            for f in &trivial {
                t += BigInt::from(f.multiplicity) * num_traits::pow(q_pow(q, f.q_power), k as usize);
            }
            let inner = alpha_powers[k as usize - 1].add(&CycloRational::from_int(p, t));
            if n % 2 == 1 {
                inner.neg()
            } else {
                inner
            }
        })
        .collect()
}

/// Options for [`lfunction`].
#[derive(Clone, Debug)]
pub struct LOptions {
    /// extension degrees beyond `2n` to predict and verify
    pub heldout: Vec<u32>,
    pub limits: Limits,
}

impl Default for LOptions {
    fn default() -> Self {
        LOptions { heldout: Vec::new(), limits: Limits::default() }
    }
}

/// Runs the full pipeline: enumerate `S_{k,n}(b)` for `k <= 2n` (plus
/// held-out degrees), recover `P`, its Newton polygon and complex roots,
/// and check the held-out predictions.
pub fn lfunction(base: &Arc<FieldTable>, n: usize, b: u32, opts: &LOptions) -> Result<LFactorization> {
    check_nondegenerate(base.p(), n)?;
    if b == 0 || b >= base.order() {
        return Err(Error::ZeroB);
    }
    let q = base.order() as u64;
    let train: Vec<u32> = (1..=2 * n as u32).collect();
    let mut all = train.clone();
    all.extend(opts.heldout.iter().copied());
    let total: u128 = all.iter().map(|&k| kloosterman_cost(q, k, n)).sum();
    opts.limits.check(total)?;

    let sums = kloosterman_values(base, n, b, &train, &opts.limits)?;
    let s_star = toric_from_kloosterman(&sums, n, q);
    let p_coeffs = strip_trivial_roots(&s_star, n, q)?;
    let (np_points, slopes) = newton_polygon(&p_coeffs, base.p(), base.degree())?;
    let complex_roots = complex_roots(&p_coeffs)?;

    let mut heldout = Vec::new();
    if !opts.heldout.is_empty() {
        let predicted = predicted_sums(&p_coeffs, n, q, &opts.heldout);
        let actual = kloosterman_values(base, n, b, &opts.heldout, &opts.limits)?;
        for ((&k, pred), act) in opts.heldout.iter().zip(predicted).zip(actual) {
            let matched = pred == act;
            heldout.push(HeldOut { k, predicted: pred, actual: act, matched });
        }
    }

    Ok(LFactorization {
        n,
        p: base.p(),
        a: base.degree(),
        q,
        b,
        sign: if n % 2 == 0 { -1 } else { 1 },
        trivial: trivial_part(n),
        sums,
        p_coeffs,
        np_points,
        slopes,
        complex_roots,
        heldout,
    })
}

fn rational_json(r: &BigRational) -> Value {
    if r.is_integer() {
        json!(r.to_integer().to_i64().map(Value::from).unwrap_or_else(|| Value::String(r.to_string())))
    } else {
        Value::String(r.to_string())
    }
}

fn pair_json(r: &BigRational) -> Value {
    json!([r.numer().to_string().parse::<Value>().unwrap(), r.denom().to_string().parse::<Value>().unwrap()])
}

impl LFactorization {
    /// True when every coefficient of `P` lies in `Z`.
    pub fn is_rational(&self) -> bool {
        self.p_coeffs.iter().all(|c| c.is_rational())
    }

    pub fn slope_sequence(&self) -> Vec<BigRational> {
        slope_sequence(&self.slopes)
    }

    pub fn relation_to_hodge(&self) -> PolygonRelation {
        compare_polygons(&self.slope_sequence(), &hodge_slopes(self.n))
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.complex_roots.iter().map(|z| z.norm()).collect();
        m.sort_by(f64::total_cmp);
        m
    }

    pub fn heldout_ok(&self) -> bool {
        self.heldout.iter().all(|h| h.matched)
    }

    pub fn to_json(&self) -> Value {
        let basis: Vec<Value> =
            self.p_coeffs.iter().map(|c| Value::Array(c.coeffs().iter().map(pair_json).collect())).collect();
        let mut obj = json!({
            "n": self.n,
            "p": self.p,
            "a": self.a,
            "b": self.b,
            "sign": self.sign,
            "trivial": self.trivial.iter().map(|t| json!({
                "root": q_pow(self.q, t.q_power).to_string().parse::<Value>().unwrap(),
                "q_power": t.q_power,
                "multiplicity": t.multiplicity,
            })).collect::<Vec<_>>(),
            "rational": self.is_rational(),
            "P_basis": basis,
            "newton_polygon": self.np_points.iter().map(|(k, v)| json!([k, rational_json(v)])).collect::<Vec<_>>(),
            "slopes": self.slopes.iter().map(|(s, len)| json!([rational_json(s), len])).collect::<Vec<_>>(),
            "hodge_relation": format!("{:?}", self.relation_to_hodge()),
            "complex_magnitudes": self.magnitudes(),
            "heldout": self.heldout.iter().map(|h| json!({
                "k": h.k,
                "predicted": h.predicted.to_string(),
                "actual": h.actual.to_string(),
                "match": h.matched,
            })).collect::<Vec<_>>(),
        });
        if self.is_rational() {
            obj["P"] = Value::Array(self.p_coeffs.iter().map(|c| pair_json(&c.coeffs()[0])).collect());
        }
        obj
    }

    /// `P(T)` as text, coefficients in `Z[z]` with `z = zeta_p`.
    pub fn p_text(&self) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.p_coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let body = if c.coeffs().iter().filter(|x| !x.is_zero()).count() > 1 {
                format!("({c})")
            } else {
                c.to_string()
            };
            let var = if k == 1 { "T".to_string() } else { format!("T^{k}") };
            parts.push(match (k, body.as_str()) {
                (0, _) => body,
                (_, "1") => var,
                (_, "-1") => format!("-{var}"),
                _ => format!("{body}*{var}"),
            });
        }
        let mut out = String::new();
        for (i, part) in parts.iter().enumerate() {
            match (i, part.strip_prefix('-')) {
                (0, _) => out.push_str(part),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                (_, None) => {
                    out.push_str(" + ");
                    out.push_str(part);
                }
            }
        }
        out
    }
}

/// Magnitude check used by the weight tests: every entry within relative
/// `tol` of `target`.
pub fn all_close(values: &[f64], target: f64, tol: f64) -> bool {
    values.iter().all(|v| ((v - target) / target).abs() <= tol)
}

/// `q^{n/2}` as a float.
pub fn expected_weight(q: u64, n: usize) -> f64 {
    (q as f64).powf(n as f64 / 2.0)
}
