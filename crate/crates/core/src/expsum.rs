//! Exact evaluators for the character sums: Gauss sums, twisted and
//! untwisted inverted Kloosterman sums over any `F_{q^k}`, toric sums of
//! Laurent polynomials, the auxiliary sum `E_n`, the Gauss-sum formula used
//! as an independent oracle, and the `T_n` change of variables.
//!
//! Additive character: `psi(x) = zeta_p^{Tr(x)}` with `Tr` the absolute trace.
//! Multiplicative characters of `F_q^*` are indexed by exponents against the
//! fixed generator: `chi_j(g^t) = zeta_{q-1}^{j t}`. Over `F_{q^k}` a base
//! character acts through the norm.
//!
//! Enumeration kernels work entirely on discrete logs: field addition goes
//! through the Zech table, so each point costs a handful of lookups. The
//! index space is split into chunks; every worker owns its histogram and the
//! histograms are merged by integer addition, so results do not depend on
//! the number of threads.

use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::cyclotomic::SumValue;
use crate::error::{Error, Result};
use crate::gf::{field_maps_capped, ExtensionMaps, FieldTable, DEFAULT_TABLE_CAP, ZECH_ZERO};
use crate::laurent::{LaurentPoly, Term};

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000_000;

/// Resource limits shared by all evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of torus points a kernel may visit.
    pub enumeration: u128,
    /// Maximum field order to tabulate.
    pub table_cap: u64,
    /// Maximum sparse cost of the histogram products in the Gauss formula.
    pub products: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { enumeration: DEFAULT_ENUMERATION_BUDGET, table_cap: DEFAULT_TABLE_CAP, products: 2_000_000_000 }
    }
}

impl Limits {
    pub fn check(&self, points: u128) -> Result<()> {
        if points > self.enumeration {
            return Err(Error::Budget { points, budget: self.enumeration });
        }
        Ok(())
    }

    pub fn unlimited() -> Self {
        Limits { enumeration: u128::MAX, table_cap: DEFAULT_TABLE_CAP, products: u128::MAX }
    }
}

/// Multiplicative characters `chi_1, ..., chi_r` of `F_q^*` as generator
/// exponents mod `q - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharacterTuple {
    indices: Vec<u32>,
    modulus: u32,
}

impl CharacterTuple {
    pub fn new(indices: &[i64], q_minus_1: u32) -> Self {
        let indices = indices.iter().map(|&j| j.rem_euclid(q_minus_1 as i64) as u32).collect();
        CharacterTuple { indices, modulus: q_minus_1 }
    }

    pub fn trivial(len: usize, q_minus_1: u32) -> Self {
        CharacterTuple { indices: vec![0; len], modulus: q_minus_1 }
    }

    /// Parses `"0,0,1"`.
    pub fn parse(s: &str, q_minus_1: u32) -> Result<Self> {
        let idx = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Invalid(format!("bad character index '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(&idx, q_minus_1))
    }

    /// Every tuple of the given length, in lexicographic order.
    pub fn all(len: usize, q_minus_1: u32) -> Vec<Self> {
        let total = (q_minus_1 as usize).pow(len as u32);
        (0..total)
            .map(|mut code| {
                let mut idx = vec![0u32; len];
                for slot in idx.iter_mut().rev() {
                    *slot = (code % q_minus_1 as usize) as u32;
                    code /= q_minus_1 as usize;
                }
                CharacterTuple { indices: idx, modulus: q_minus_1 }
            })
            .collect()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.indices.iter().all(|&j| j == 0)
    }

    pub fn all_equal(&self) -> bool {
        self.indices.windows(2).all(|w| w[0] == w[1])
    }

    pub fn sum(&self) -> u32 {
        (self.indices.iter().map(|&j| j as u64).sum::<u64>() % self.modulus as u64) as u32
    }
}

/// Number of points visited by [`kloosterman_sum`].
pub fn kloosterman_cost(q: u64, k: u32, n: usize) -> u128 {
    let big = (q as u128).pow(k) - 1;
    big.saturating_pow(n as u32)
}

fn extension(base: &Arc<FieldTable>, k: u32, limits: &Limits) -> Result<ExtensionMaps> {
    field_maps_capped(base, k, limits.table_cap)
}

#[inline(always)]
fn add_mod(a: u32, b: u32, n: u32) -> u32 {
    let s = a + b;
    if s >= n {
        s - n
    } else {
        s
    }
}

#[inline(always)]
fn sub_mod(a: u32, b: u32, n: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + n - b
    }
}

const NONE: u32 = u32::MAX;

/// `log(g^x + g^y)` with `NONE` standing for the zero element.
#[inline(always)]
fn add_logs(x: u32, y: u32, zech: &[u32], n: u32) -> u32 {
    if x == NONE {
        return y;
    }
    if y == NONE {
        return x;
    }
    let z = zech[sub_mod(y, x, n) as usize];
    if z == ZECH_ZERO {
        NONE
    } else {
        add_mod(x, z, n)
    }
}

/// Kernel for sums of the shape
/// `sum_{x in (F^*)^n, s != 0} chi(x) psi(c' / s)`, `s = x_1 + ... + x_n + c/(x_1...x_n)`.
struct InvertedKernel<'a> {
    n: usize,
    units: u32,
    zech: &'a [u32],
    /// trace of `c' / s`, indexed by `log s`
    trace_of: Vec<u32>,
    /// `log c`
    last_log: u32,
    p: u32,
    /// conductor of the histogram's multiplicative part (1 when untwisted)
    m: u32,
    /// per-variable character step, and the constant offset
    steps: Vec<u32>,
    offset: u32,
}

impl InvertedKernel<'_> {
    fn run(&self) -> Vec<u64> {
        let n = self.units;
        let chunk = (n as usize).div_ceil(64).max(1);
        let starts: Vec<u32> = (0..n).step_by(chunk).collect();
        let twisted = self.m > 1;
        starts
            .into_par_iter()
            .map(|start| {
                let end = (start + chunk as u32).min(n);
                let mut hist = vec![0u64; (self.p * self.m) as usize];
                if twisted {
                    self.walk::<true>(0, start..end, NONE, 0, self.offset, &mut hist);
                } else {
                    let fact: Vec<u64> = (0..=self.n as u64).scan(1u64, |f, i| {
                        *f *= i.max(1);
                        Some(*f)
                    }).collect();
                    let ctx = Sym { fact: &fact };
                    self.walk_sym(&ctx, 0, start..end, NONE, 0, NONE, 0, 1, &mut hist);
                }
                hist
            })
            .reduce(
                || vec![0u64; (self.p * self.m) as usize],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }

    fn walk<const TW: bool>(
        &self,
        depth: usize,
        range: std::ops::Range<u32>,
        sum: u32,
        prod: u32,
        j: u32,
        hist: &mut [u64],
    ) {
        let n = self.units;
        let zech = self.zech;
        if depth + 1 < self.n {
            for l in range {
                let s = add_logs(sum, l, zech, n);
                let jj = if TW { (j as u64 + self.steps[depth] as u64 * l as u64) as u32 % self.m } else { 0 };
                self.walk::<TW>(depth + 1, 0..n, s, add_mod(prod, l, n), jj, hist);
            }
            return;
        }
        let m = self.m;
        let step = if TW { self.steps[depth] } else { 0 };
        let mut jj = if TW { (j as u64 + step as u64 * range.start as u64) as u32 % m } else { 0 };
        let mut t3 = sub_mod(sub_mod(self.last_log, prod, n), range.start, n);
        for l in range {
            let s1 = add_logs(sum, l, zech, n);
            let s = add_logs(s1, t3, zech, n);
            if s != NONE {
                let t = self.trace_of[s as usize];
                if TW {
                    hist[(t * m + jj) as usize] += 1;
                } else {
                    hist[t as usize] += 1;
                }
            }
            t3 = if t3 == 0 { n - 1 } else { t3 - 1 };
            if TW {
                jj = add_mod(jj, step, m);
            }
        }
    }
}

struct Sym<'a> {
    fact: &'a [u64],
}

impl InvertedKernel<'_> {
    /// Untwisted sums are symmetric in `x_1..x_n`: walk non-decreasing log
    /// tuples only, weighting each by its number of distinct orderings.
    /// `run` is the length of the trailing run of equal logs, `denom` the
    /// product of factorials of the closed runs.
    #[allow(clippy::too_many_arguments)]
    fn walk_sym(
        &self,
        ctx: &Sym,
        depth: usize,
        range: std::ops::Range<u32>,
        sum: u32,
        prod: u32,
        prev: u32,
        run: u64,
        denom: u64,
        hist: &mut [u64],
    ) {
        let n = self.units;
        let zech = self.zech;
        let fact = ctx.fact;
        let full = fact[self.n];
        if depth + 1 < self.n {
            for l in range {
                let s = add_logs(sum, l, zech, n);
                let (r, d) = if l == prev { (run + 1, denom) } else { (1, denom * fact[run as usize]) };
                self.walk_sym(ctx, depth + 1, l..n, s, add_mod(prod, l, n), l, r, d, hist);
            }
            return;
        }
        let w_new = full / (denom * fact[run as usize]);
        let w_eq = full / (denom * fact[run as usize + 1]);
        let mut t3 = sub_mod(sub_mod(self.last_log, prod, n), range.start, n);
        for l in range {
            let s1 = add_logs(sum, l, zech, n);
            let s = add_logs(s1, t3, zech, n);
            if s != NONE {
                hist[self.trace_of[s as usize] as usize] += if l == prev { w_eq } else { w_new };
            }
            t3 = if t3 == 0 { n - 1 } else { t3 - 1 };
        }
    }
}

/// The Gauss sum `G(chi_j) = sum_{x != 0} chi_j(x) psi(x)` over the field
/// `f`, as a histogram with `m = |f^*|`.
pub fn gauss_sum(f: &FieldTable, j: u64) -> SumValue {
    let n = f.units();
    let p = f.p();
    let mut counts = vec![0i64; (p * n) as usize];
    let j = j % n as u64;
    for (t, &tr) in f.trace_by_log().iter().enumerate() {
        let idx = (j * t as u64 % n as u64) as u32;
        counts[(tr * n + idx) as usize] += 1;
    }
    SumValue::from_counts(p, n, &counts)
}

/// The inverted Kloosterman sum `S_n(chi, b)` over `F_{q^k}`.
///
/// Untwisted input (all indices zero) yields a pure trace histogram with
/// `m = 1`. Twisted input yields `m = q - 1`: the base characters composed
/// with the norm only take `(q-1)`-th roots of unity as values.
pub fn kloosterman_sum(
    base: &Arc<FieldTable>,
    k: u32,
    n: usize,
    b: u32,
    chi: &CharacterTuple,
    limits: &Limits,
) -> Result<SumValue> {
    if b == 0 || b >= base.order() {
        return Err(Error::ZeroB);
    }
    if n == 0 || chi.len() != n + 1 || chi.modulus() != base.units() {
        return Err(Error::Invalid(format!("need n >= 1 and {} character indices mod {}", n + 1, base.units())));
    }
    limits.check(kloosterman_cost(base.order() as u64, k, n))?;
    let maps = extension(base, k, limits)?;
    let ext = maps.ext();
    let units = ext.units();
    let lb = ext.log(maps.embed(b)).unwrap();
    // trace of 1/s indexed by log s
    let tr = ext.trace_by_log();
    let trace_of: Vec<u32> = (0..units).map(|l| tr[((units - l) % units) as usize]).collect();
    let kernel = inverted_kernel(&maps, n, lb, trace_of, chi);
    let hist = kernel.run();
    Ok(SumValue::from_counts(base.p(), kernel.m, &hist))
}

fn inverted_kernel<'a>(
    maps: &'a ExtensionMaps,
    n: usize,
    last_log: u32,
    trace_of: Vec<u32>,
    chi: &CharacterTuple,
) -> InvertedKernel<'a> {
    let ext = maps.ext();
    let units = ext.units();
    let (m, steps, offset) = if chi.is_trivial() {
        (1, vec![0; n], 0)
    } else {
        let m = chi.modulus();
        let e = maps.norm_log_factor() % m as u64;
        let last = chi.indices()[n] as u64;
        let steps = (0..n)
            .map(|i| (((chi.indices()[i] as u64 + m as u64 - last) % m as u64) * e % m as u64) as u32)
            .collect();
        let offset = (last * e % m as u64 * last_log as u64 % m as u64) as u32;
        (m, steps, offset)
    };
    InvertedKernel {
        n,
        units,
        zech: ext.zech_table(),
        trace_of,
        last_log,
        p: ext.p(),
        m,
        steps,
        offset,
    }
}

/// The twisted toric sum
/// `S*_k(chi, f) = sum_{x in (F_{q^k}^*)^n} prod chi_i(N(x_i)) psi(Tr f(x))`.
pub fn toric_sum(
    base: &Arc<FieldTable>,
    k: u32,
    f: &LaurentPoly,
    chi: &CharacterTuple,
    limits: &Limits,
) -> Result<SumValue> {
    if !f.matches_field(base) {
        return Err(Error::Invalid("polynomial is not defined over the given field".into()));
    }
    let vars = f.n_vars();
    if chi.len() != vars || chi.modulus() != base.units() {
        return Err(Error::Invalid(format!("need {vars} character indices mod {}", base.units())));
    }
    let points = kloosterman_cost(base.order() as u64, k, vars);
    limits.check(points)?;
    let maps = extension(base, k, limits)?;
    let ext = maps.ext();
    let units = ext.units();
    let p = base.p();
    let (m, steps) = if chi.is_trivial() {
        (1u32, vec![0u32; vars])
    } else {
        let m = chi.modulus();
        let e = maps.norm_log_factor() % m as u64;
        (m, chi.indices().iter().map(|&j| (j as u64 * e % m as u64) as u32).collect())
    };

    if vars == 0 {
        // a constant polynomial: one summand
        let c = f.terms().iter().fold(0, |acc, t: &Term| ext.add(acc, maps.embed(t.coeff)));
        let mut hist = vec![0u64; (p * m) as usize];
        hist[(ext.trace(c) * m) as usize] = 1;
        return Ok(SumValue::from_counts(p, m, &hist));
    }

    let coeff_logs: Vec<u32> = f.terms().iter().map(|t| ext.log(maps.embed(t.coeff)).unwrap()).collect();
    let exps: Vec<Vec<u32>> = f
        .terms()
        .iter()
        .map(|t| t.exps.iter().map(|&e| e.rem_euclid(units as i64) as u32).collect())
        .collect();
    let kernel = ToricKernel {
        vars,
        units,
        zech: ext.zech_table(),
        trace_by_log: ext.trace_by_log(),
        coeff_logs,
        exps,
        p,
        m,
        steps,
    };
    let hist = kernel.run();
    Ok(SumValue::from_counts(p, m, &hist))
}

struct ToricKernel<'a> {
    vars: usize,
    units: u32,
    zech: &'a [u32],
    trace_by_log: &'a [u32],
    coeff_logs: Vec<u32>,
    /// exponent of variable i in term j, reduced mod q^k - 1, as `exps[j][i]`
    exps: Vec<Vec<u32>>,
    p: u32,
    m: u32,
    steps: Vec<u32>,
}

impl ToricKernel<'_> {
    fn run(&self) -> Vec<u64> {
        let n = self.units;
        let chunk = (n as usize).div_ceil(64).max(1);
        let starts: Vec<u32> = (0..n).step_by(chunk).collect();
        starts
            .into_par_iter()
            .map(|start| {
                let end = (start + chunk as u32).min(n);
                let mut hist = vec![0u64; (self.p * self.m) as usize];
                let mut partial = self.coeff_logs.clone();
                self.walk(0, start..end, &mut partial, 0, &mut hist);
                hist
            })
            .reduce(
                || vec![0u64; (self.p * self.m) as usize],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }

    fn walk(&self, depth: usize, range: std::ops::Range<u32>, partial: &mut [u32], j: u32, hist: &mut [u64]) {
        let n = self.units;
        let m = self.m;
        let step = self.steps[depth];
        let col: Vec<u32> = self.exps.iter().map(|e| e[depth]).collect();
        let mut cur: Vec<u32> = partial
            .iter()
            .zip(&col)
            .map(|(&base, &e)| ((base as u64 + e as u64 * range.start as u64) % n as u64) as u32)
            .collect();
        let mut jj = ((j as u64 + step as u64 * range.start as u64) % m as u64) as u32;
        let last = depth + 1 == self.vars;
        for _l in range {
            if last {
                let mut s = NONE;
                for &c in &cur {
                    s = add_logs(s, c, self.zech, n);
                }
                let t = if s == NONE { 0 } else { self.trace_by_log[s as usize] };
                hist[(t * m + jj) as usize] += 1;
            } else {
                let mut next = cur.clone();
                self.walk(depth + 1, 0..n, &mut next, jj, hist);
            }
            for (c, &e) in cur.iter_mut().zip(&col) {
                *c = add_mod(*c, e, n);
            }
            jj = add_mod(jj, step, m);
        }
    }
}

/// The `(n+2)`-variable Laurent polynomial
/// `x_{n+1} (1 - x_{n+2} (x_1 + ... + x_n + b/(x_1...x_n))) + x_{n+2}`
/// with its terms ordered as the vertices `V_1, ..., V_{n+3}`.
pub fn auxiliary_laurent(f: &FieldTable, n: usize, b: u32) -> Result<LaurentPoly> {
    let vars = n + 2;
    let minus_one = f.neg(1);
    let mut terms = Vec::with_capacity(n + 3);
    for i in 0..n {
        let mut e = vec![0i64; vars];
        e[i] = 1;
        e[n] = 1;
        e[n + 1] = 1;
        terms.push(Term { coeff: minus_one, exps: e });
    }
    let mut e = vec![-1i64; vars];
    e[n] = 1;
    e[n + 1] = 1;
    terms.push(Term { coeff: f.neg(b), exps: e });
    let mut e = vec![0i64; vars];
    e[n] = 1;
    terms.push(Term { coeff: 1, exps: e });
    let mut e = vec![0i64; vars];
    e[n + 1] = 1;
    terms.push(Term { coeff: 1, exps: e });
    LaurentPoly::new(f.p(), f.degree(), vars, terms)
}

/// `E_n(chi, b)`: the toric sum of [`auxiliary_laurent`] with the twist
/// `(chi_1 conj(chi_{n+1}), ..., chi_n conj(chi_{n+1}), 1, 1)`.
pub fn e_sum(base: &Arc<FieldTable>, n: usize, b: u32, chi: &CharacterTuple, limits: &Limits) -> Result<SumValue> {
    if b == 0 {
        return Err(Error::ZeroB);
    }
    if chi.len() != n + 1 {
        return Err(Error::Invalid(format!("need {} character indices", n + 1)));
    }
    let f = auxiliary_laurent(base, n, b)?;
    let m = chi.modulus() as i64;
    let last = chi.indices()[n] as i64;
    let mut twist: Vec<i64> = chi.indices()[..n].iter().map(|&j| (j as i64 - last).rem_euclid(m)).collect();
    twist.extend([0, 0]);
    toric_sum(base, 1, &f, &CharacterTuple::new(&twist, chi.modulus()), limits)
}

/// `q^k * S_n(chi, b)` over `F_{q^k}` via orthogonality of characters and
/// Gauss sums, as a canonical histogram with `m = q^k - 1`.
///
/// The result is the main term `q^k S_1` plus the character sum of Gauss
/// products `q^k S_2`; it never enumerates the torus and so serves as an
/// independent check on [`kloosterman_sum`].
pub fn gauss_formula_sum(
    base: &Arc<FieldTable>,
    k: u32,
    n: usize,
    b: u32,
    chi: &CharacterTuple,
    limits: &Limits,
) -> Result<SumValue> {
    let gauss = GaussTable::new(base, k, limits)?;
    gauss.scaled_sum(n, b, chi, limits)
}

/// All Gauss sums of one field, reusable across many parameter choices.
pub struct GaussTable {
    maps: ExtensionMaps,
    sums: Vec<SumValue>,
}

impl GaussTable {
    pub fn new(base: &Arc<FieldTable>, k: u32, limits: &Limits) -> Result<Self> {
        let maps = extension(base, k, limits)?;
        let ext = maps.ext().clone();
        let units = ext.units() as u128;
        limits.check(units * units)?;
        let sums = (0..ext.units() as u64).into_par_iter().map(|j| gauss_sum(&ext, j)).collect();
        Ok(GaussTable { maps, sums })
    }

    pub fn get(&self, j: u64) -> &SumValue {
        &self.sums[(j % self.sums.len() as u64) as usize]
    }

    /// Lifts a base character index to the extension's character group.
    pub fn lift_index(&self, j: u32) -> u64 {
        let big_n = self.maps.ext().units() as u64;
        let small_n = self.maps.base().units() as u64;
        (j as u64 * self.maps.norm_log_factor() % small_n) * (big_n / small_n) % big_n
    }

    pub fn scaled_sum(&self, n: usize, b: u32, chi: &CharacterTuple, limits: &Limits) -> Result<SumValue> {
        if b == 0 || b >= self.maps.base().order() {
            return Err(Error::ZeroB);
        }
        if chi.len() != n + 1 {
            return Err(Error::Invalid(format!("need {} character indices", n + 1)));
        }
        let ext = self.maps.ext();
        let big_n = ext.units() as u64;
        let p = ext.p();
        let m = big_n as u32;
        // dense factor sizes: p*N entries against N nonzeros, n+2 products per character
        let cost = big_n as u128 * (n as u128 + 2) * (p as u128 * big_n as u128) * big_n as u128;
        if cost > limits.products {
            return Err(Error::Budget { points: cost, budget: limits.products });
        }
        let lifted: Vec<u64> = chi.indices().iter().map(|&j| self.lift_index(j)).collect();
        let lb = ext.log(self.maps.embed(b)).unwrap() as u64;
        let log_minus_one = ext.log(ext.neg(1)).unwrap() as u64;
        let sum_lifted: u64 = lifted.iter().sum::<u64>() % big_n;

        let terms: Vec<SumValue> = (0..big_n)
            .into_par_iter()
            .map(|c| -> Result<SumValue> {
                let r = ((n as u64 + 1) * c + sum_lifted) % big_n;
                let r_bar = (big_n - r) % big_n;
                // chi^{-1}(b) rho(-1)
                let root_j = ((big_n - c) % big_n * lb + r * log_minus_one) % big_n;
                let mut acc = self.get(lifted[0] + c).clone();
                for &li in &lifted[1..] {
                    acc = acc.mul_budgeted(self.get(li + c), u64::MAX)?;
                }
                let g = self.get(r_bar);
                acc = acc.mul_budgeted(g, u64::MAX)?;
                acc = acc.mul_budgeted(g, u64::MAX)?;
                Ok(acc.shift(0, root_j))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = SumValue::zero(p, m);
        for t in &terms {
            total = total.add(t)?;
        }
        let scaled_s2 = total
            .div_exact(&BigInt::from(big_n))
            .ok_or_else(|| Error::Mismatch("Gauss-sum total not divisible by q^k - 1".into()))?;
        let main = if lifted.windows(2).all(|w| w[0] == w[1]) {
            let coeff = -BigInt::from(big_n).pow(n as u32);
            SumValue::root(p, m, 0, lifted[0] * lb % big_n).scale(&coeff)
        } else {
            SumValue::zero(p, m)
        };
        main.add(&scaled_s2)
    }
}

/// `T_n(chi, b) = sum_{x_1...x_{n+1} = 1, sum != 0} chi(x) psi(b / sum)` over
/// `F_q`, checked against `chi_1...chi_{n+1}(b) S_n(chi, b^{-(n+1)})`.
pub fn tn_transform(base: &Arc<FieldTable>, n: usize, b: u32, chi: &CharacterTuple, limits: &Limits) -> Result<SumValue> {
    if b == 0 || b >= base.order() {
        return Err(Error::ZeroB);
    }
    if n == 0 || chi.len() != n + 1 {
        return Err(Error::Invalid(format!("need {} character indices", n + 1)));
    }
    limits.check(kloosterman_cost(base.order() as u64, 1, n))?;
    let maps = extension(base, 1, limits)?;
    let f = maps.ext();
    let units = f.units();
    let lb = f.log(b).unwrap();
    // trace of b/s indexed by log s
    let trace_of: Vec<u32> = (0..units).map(|l| f.trace(f.exp((lb + units - l) as u64))).collect();
    let kernel = inverted_kernel(&maps, n, 0, trace_of, chi);
    let direct = SumValue::from_counts(f.p(), kernel.m, &kernel.run());

    let b_shifted = f.inv(f.pow(b, n as u64 + 1)).unwrap();
    let s = kloosterman_sum(base, 1, n, b_shifted, chi, limits)?;
    let via_s = if chi.is_trivial() { s } else { s.shift(0, chi.sum() as u64 * lb as u64 % chi.modulus() as u64) };
    if !direct.exact_eq(&via_s)? {
        return Err(Error::Mismatch(format!("T_n and the transformed S_n differ for b = {b}")));
    }
    Ok(direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::{reduce_mod_phi, CycloRational};
    use crate::gf::build_field;
    use num_complex::Complex64;

    fn field(p: u64, a: u32) -> Arc<FieldTable> {
        Arc::new(build_field(p, a).unwrap())
    }

    /// Straight-from-the-definition evaluation in complex floats, used as an
    /// oracle for the log-domain kernels.
    fn naive_kloosterman(base: &Arc<FieldTable>, k: u32, n: usize, b: u32, chi: &CharacterTuple) -> Complex64 {
        let maps = field_maps_capped(base, k, DEFAULT_TABLE_CAP).unwrap();
        let ext = maps.ext();
        let q1 = base.units() as f64;
        let chi_val = |j: u32, x: u32| {
            let nx = maps.norm_rel(x);
            let l = base.log(nx).unwrap() as f64;
            Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 * l / q1)
        };
        let psi = |y: u32| Complex64::from_polar(1.0, std::f64::consts::TAU * ext.trace(y) as f64 / ext.p() as f64);
        let eb = maps.embed(b);
        let mut total = Complex64::new(0.0, 0.0);
        let mut x = vec![1u32; n];
        let big_q = ext.order();
        loop {
            let prod = x.iter().fold(1, |acc, &xi| ext.mul(acc, xi));
            let last = ext.mul(eb, ext.inv(prod).unwrap());
            let s = x.iter().fold(last, |acc, &xi| ext.add(acc, xi));
            if s != 0 {
                let mut w = psi(ext.inv(s).unwrap());
                for (i, &xi) in x.iter().enumerate() {
                    w *= chi_val(chi.indices()[i], xi);
                }
                w *= chi_val(chi.indices()[n], last);
                total += w;
            }
            // odometer over nonzero elements
            let mut i = 0;
            loop {
                if i == n {
                    return total;
                }
                x[i] += 1;
                if x[i] < big_q {
                    break;
                }
                x[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn gauss_sum_examples() {
        let f3 = build_field(3, 1).unwrap();
        let g0 = gauss_sum(&f3, 0);
        assert!((g0.embed_complex() - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        // quadratic character over F_3: zeta - zeta^2
        let g1 = gauss_sum(&f3, 1);
        // chi(1) = 1 at trace 1, chi(2) = zeta_2 at trace 2
        let expect = SumValue::from_counts(3, 2, &[0i64, 0, 1, 0, 0, 1]);
        assert!((g1.embed_complex() - expect.embed_complex()).norm() < 1e-12);
        assert!((g1.embed_complex().norm() - 3f64.sqrt()).abs() < 1e-12);
        for &(p, a) in &[(5u64, 1u32), (7, 1), (3, 2), (2, 3)] {
            let f = build_field(p, a).unwrap();
            let q = f.order() as f64;
            for j in 1..f.units() as u64 {
                assert!((gauss_sum(&f, j).embed_complex().norm() - q.sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kloosterman_f3_examples() {
        let f = field(3, 1);
        let s = kloosterman_sum(&f, 1, 1, 1, &CharacterTuple::trivial(2, 2), &Limits::default()).unwrap();
        // x = 1 gives 1/s = 2, x = 2 gives 1/s = 1; no excluded points
        assert_eq!(s.m(), 1);
        assert_eq!(s.counts().iter().map(|c| i64::try_from(c).unwrap()).collect::<Vec<_>>(), vec![0, 1, 1]);
        assert_eq!(reduce_mod_phi(&s).unwrap(), CycloRational::from_int(3, -1));
    }

    #[test]
    fn rejects_zero_b_and_budget() {
        let f = field(7, 1);
        let chi = CharacterTuple::trivial(3, 6);
        assert_eq!(kloosterman_sum(&f, 1, 2, 0, &chi, &Limits::default()).unwrap_err(), Error::ZeroB);
        let tight = Limits { enumeration: 10, ..Limits::default() };
        assert!(matches!(kloosterman_sum(&f, 1, 2, 1, &chi, &tight), Err(Error::Budget { points: 36, .. })));
    }

    #[test]
    fn kernel_matches_naive_definition() {
        for &(p, a, k, n) in &[(3u64, 1u32, 1u32, 1usize), (3, 1, 2, 2), (5, 1, 1, 2), (2, 2, 2, 1), (7, 1, 1, 3), (3, 2, 1, 2), (5, 1, 2, 1)] {
            let f = field(p, a);
            let qm1 = f.units();
            let tuples = CharacterTuple::all(n + 1, qm1);
            for (_, chi) in tuples.iter().enumerate().filter(|(i, _)| i % 3 == 0 || *i < 4) {
                for b in 1..f.order() {
                    let fast = kloosterman_sum(&f, k, n, b, chi, &Limits::default()).unwrap().embed_complex();
                    let slow = naive_kloosterman(&f, k, n, b, chi);
                    assert!((fast - slow).norm() < 1e-7, "p={p} a={a} k={k} n={n} b={b} chi={chi:?}: {fast} vs {slow}");
                }
            }
        }
    }

    #[test]
    fn gauss_formula_agrees_exactly() {
        for &(p, a, k, n) in &[(3u64, 1u32, 1u32, 1usize), (5, 1, 1, 2), (3, 1, 2, 1), (7, 1, 1, 1), (2, 2, 1, 2), (2, 1, 3, 1)] {
            let f = field(p, a);
            let table = GaussTable::new(&f, k, &Limits::default()).unwrap();
            let big_q = (f.order() as u64).pow(k);
            let big_n = (big_q - 1) as u32;
            for chi in CharacterTuple::all(n + 1, f.units()) {
                for b in 1..f.order() {
                    let formula = table.scaled_sum(n, b, &chi, &Limits::default()).unwrap();
                    let direct = kloosterman_sum(&f, k, n, b, &chi, &Limits::default()).unwrap();
                    let direct = direct.lift(big_n).unwrap().scale(&BigInt::from(big_q));
                    assert!(formula.exact_eq(&direct).unwrap(), "p={p} k={k} n={n} b={b} chi={chi:?}");
                }
            }
        }
    }

    #[test]
    fn gauss_formula_f3_untwisted() {
        let f = field(3, 1);
        let v = gauss_formula_sum(&f, 1, 1, 1, &CharacterTuple::trivial(2, 2), &Limits::default()).unwrap();
        assert!((v.embed_complex() / 3.0 - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn toric_examples() {
        let f = field(5, 1);
        let lim = Limits::default();
        let x = crate::laurent::parse_laurent_text("x1", 5, 1, None).unwrap();
        let v = toric_sum(&f, 1, &x, &CharacterTuple::trivial(1, 4), &lim).unwrap();
        assert_eq!(reduce_mod_phi(&v).unwrap(), CycloRational::from_int(5, -1));
        // constant polynomial in two variables: (q^k - 1)^2 psi(Tr_k c)
        let c = crate::laurent::parse_laurent_text("3", 5, 1, Some(2)).unwrap();
        for k in 1..=2u32 {
            let v = toric_sum(&f, k, &c, &CharacterTuple::trivial(2, 4), &lim).unwrap();
            let count = (5i64.pow(k) - 1).pow(2);
            let t = (3 * k as i64) % 5;
            let mut expect = vec![0i64; 5];
            expect[t as usize] = count;
            assert_eq!(v, SumValue::from_counts(5, 1, &expect));
        }
    }

    #[test]
    fn toric_of_auxiliary_polynomial_f3() {
        let f = field(3, 1);
        let aux = auxiliary_laurent(&f, 1, 1).unwrap();
        let v = toric_sum(&f, 1, &aux, &CharacterTuple::trivial(3, 2), &Limits::default()).unwrap();
        // q S_{1,1}(1) + (q - 1) = -3 + 2
        assert_eq!(reduce_mod_phi(&v).unwrap(), CycloRational::from_int(3, -1));
    }

    #[test]
    fn toric_matches_pointwise_evaluation() {
        let f = field(5, 1);
        let poly = crate::laurent::parse_laurent_text("x1 + 2*x2^-1 + 3*x1^2*x2 - x1^-1", 5, 1, None).unwrap();
        let chi = CharacterTuple::new(&[1, 3], 4);
        let v = toric_sum(&f, 1, &poly, &chi, &Limits::default()).unwrap();
        let mut expect = vec![0i64; 20];
        for x1 in 1..5u32 {
            for x2 in 1..5u32 {
                let y = poly.eval(&f, &[x1, x2]);
                let j = (f.log(x1).unwrap() + 3 * f.log(x2).unwrap()) % 4;
                expect[(f.trace(y) * 4 + j) as usize] += 1;
            }
        }
        assert_eq!(v, SumValue::from_counts(5, 4, &expect));
    }

    #[test]
    fn e_sum_relation_f3() {
        let f = field(3, 1);
        let e = e_sum(&f, 1, 1, &CharacterTuple::trivial(2, 2), &Limits::default()).unwrap();
        assert_eq!(reduce_mod_phi(&e).unwrap(), CycloRational::from_int(3, -1));
    }

    #[test]
    fn tn_examples() {
        let f = field(3, 1);
        let lim = Limits::default();
        let t = tn_transform(&f, 1, 2, &CharacterTuple::trivial(2, 2), &lim).unwrap();
        assert_eq!(reduce_mod_phi(&t).unwrap(), CycloRational::from_int(3, -1));
        let f7 = field(7, 1);
        for chi in CharacterTuple::all(3, 6).iter().step_by(7) {
            let t = tn_transform(&f7, 2, 1, chi, &lim).unwrap();
            let s = kloosterman_sum(&f7, 1, 2, 1, chi, &lim).unwrap();
            assert!(t.exact_eq(&s).unwrap());
        }
    }

    #[test]
    fn results_independent_of_thread_count() {
        let f = field(7, 1);
        let chi = CharacterTuple::new(&[1, 2, 5], 6);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| kloosterman_sum(&f, 2, 2, 3, &chi, &Limits::default()).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn conjugating_psi_conjugates_the_value() {
        let f = field(5, 1);
        let chi = CharacterTuple::new(&[1, 0, 3], 4);
        let s = kloosterman_sum(&f, 1, 2, 2, &chi, &Limits::default()).unwrap();
        // psi-bar corresponds to trace index -t; character part conjugated too
        let z = s.embed_complex();
        assert!((s.conjugate().embed_complex() - z.conj()).norm() < 1e-9);
        let psi_bar = s.galois_p(4);
        let chi_bar = CharacterTuple::new(&[3, 0, 1], 4);
        let s_bar = kloosterman_sum(&f, 1, 2, 2, &chi_bar, &Limits::default()).unwrap();
        assert!((psi_bar.conjugate().embed_complex() - s_bar.embed_complex()).norm() < 1e-9);
    }
}
