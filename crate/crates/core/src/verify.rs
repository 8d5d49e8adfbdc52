//! Verification suites: each suite runs one family of checks over a small
//! parameter grid and collects per-case verdicts into a [`VerifyReport`].
//!
//! Reports are deterministic: cases are produced in grid order, values are
//! printed with fixed precision, and runtimes are only recorded when
//! explicitly requested.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cyclotomic::{reduce_mod_phi, CycloRational, SumValue};
use crate::error::{Error, Result};
use crate::expsum::{
    auxiliary_laurent, e_sum, kloosterman_cost, kloosterman_sum, tn_transform, toric_sum, CharacterTuple, GaussTable,
    Limits,
};
use crate::gf::{build_field_capped, is_prime, FieldTable};
use crate::lfun::{
    compare_polygons, expected_weight, hodge_slopes, lfunction, toric_from_kloosterman, LOptions, PolygonRelation,
};
use crate::linalg::det_i64;
use crate::polytope::{diagonal_nondegenerate, facial_ordinary, ik_polytope, DEFAULT_BOX_BUDGET, DEFAULT_DIM_CAP};

/// Absolute tolerance for the complex-valued bounds.
pub const BOUND_TOLERANCE: f64 = 1e-6;
/// Relative tolerance for root magnitudes.
pub const WEIGHT_TOLERANCE: f64 = 1e-5;
/// Default per-case cap on brute-force toric enumerations.
pub const DEFAULT_TORIC_CAP: u128 = 1_000_000_000;

pub const SUITES: [&str; 8] = ["thm0", "thm2", "cor1", "thm1", "prop31", "thm33", "identities", "ordinary"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub check: String,
    pub lhs: String,
    pub rhs: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl Case {
    fn new(name: impl Into<String>, check: impl Into<String>, lhs: impl Into<String>, rhs: impl Into<String>, ok: bool) -> Self {
        Case {
            name: name.into(),
            check: check.into(),
            lhs: lhs.into(),
            rhs: rhs.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            reason: None,
            runtime_ms: None,
        }
    }

    fn skip(name: impl Into<String>, check: impl Into<String>, reason: impl Into<String>) -> Self {
        Case {
            name: name.into(),
            check: check.into(),
            lhs: String::new(),
            rhs: String::new(),
            status: Status::Skip,
            reason: Some(reason.into()),
            runtime_ms: None,
        }
    }

    fn failed(name: impl Into<String>, check: impl Into<String>, err: &Error) -> Self {
        let mut c = Case::new(name, check, "", "", false);
        c.reason = Some(err.to_string());
        c
    }
}

/// The fixed conventions of one field used in a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldHeader {
    pub p: u32,
    pub a: u32,
    /// modulus coefficients, constant term first
    pub modulus: Vec<u32>,
    /// generator, as its base-p digit encoding
    pub generator: u32,
}

impl FieldHeader {
    fn of(f: &FieldTable) -> Self {
        FieldHeader { p: f.p(), a: f.degree(), modulus: f.modulus().to_vec(), generator: f.generator() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub statement: String,
    pub grid: Value,
    pub fields: Vec<FieldHeader>,
    pub cases: Vec<Case>,
    pub notes: Vec<String>,
    pub summary: Summary,
    pub verdict: Status,
}

impl VerifyReport {
    fn new(suite: &str, statement: &str, grid: Value) -> Self {
        VerifyReport {
            suite: suite.into(),
            statement: statement.into(),
            grid,
            fields: Vec::new(),
            cases: Vec::new(),
            notes: Vec::new(),
            summary: Summary { pass: 0, fail: 0, skip: 0 },
            verdict: Status::Pass,
        }
    }

    fn add_field(&mut self, f: &FieldTable) {
        let h = FieldHeader::of(f);
        if !self.fields.contains(&h) {
            self.fields.push(h);
        }
    }

    fn push(&mut self, case: Case, started: Option<Instant>) {
        let mut case = case;
        case.runtime_ms = started.map(|t| (t.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3);
        self.cases.push(case);
    }

    fn finish(mut self) -> Self {
        let count = |s| self.cases.iter().filter(|c| c.status == s).count();
        self.summary = Summary { pass: count(Status::Pass), fail: count(Status::Fail), skip: count(Status::Skip) };
        self.verdict = if self.summary.fail == 0 { Status::Pass } else { Status::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn skips(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| c.status == Status::Skip)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let timed = self.cases.iter().any(|c| c.runtime_ms.is_some());
        let mut header = vec!["suite", "case", "check", "lhs", "rhs", "status", "reason"];
        if timed {
            header.push("runtime_ms");
        }
        w.write_record(&header).unwrap();
        for c in &self.cases {
            let mut row = vec![
                self.suite.clone(),
                c.name.clone(),
                c.check.clone(),
                c.lhs.clone(),
                c.rhs.clone(),
                status_word(c.status).into(),
                c.reason.clone().unwrap_or_default(),
            ];
            if timed {
                row.push(c.runtime_ms.map(|t| format!("{t:.3}")).unwrap_or_default());
            }
            w.write_record(&row).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "suite: {}", self.suite).unwrap();
        writeln!(s, "checks: {}", self.statement).unwrap();
        for f in &self.fields {
            writeln!(s, "field: p={} a={} modulus={:?} g={}", f.p, f.a, f.modulus, f.generator).unwrap();
        }
        writeln!(s, "grid: {}", self.grid).unwrap();
        let rows: Vec<[String; 5]> = self
            .cases
            .iter()
            .map(|c| {
                let mut lhs = c.lhs.clone();
                if let Some(r) = &c.reason {
                    lhs = if lhs.is_empty() { r.clone() } else { format!("{lhs} ({r})") };
                }
                let mut name = c.name.clone();
                if let Some(t) = c.runtime_ms {
                    name = format!("{name} [{t:.1} ms]");
                }
                [status_word(c.status).to_uppercase(), name, c.check.clone(), lhs, c.rhs.clone()]
            })
            .collect();
        let head = ["STATUS", "CASE", "CHECK", "LHS", "RHS"];
        let mut width = head.map(str::len);
        for r in &rows {
            for (w, cell) in width.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: [&str; 5]| {
            let mut l = String::new();
            for (i, c) in cells.iter().enumerate() {
                if i + 1 == cells.len() {
                    l.push_str(c);
                } else {
                    write!(l, "{c:<w$}  ", w = width[i]).unwrap();
                }
            }
            l.trim_end().to_string()
        };
        writeln!(s, "{}", line(head)).unwrap();
        for r in &rows {
            writeln!(s, "{}", line([&r[0], &r[1], &r[2], &r[3], &r[4]])).unwrap();
        }
        for n in &self.notes {
            writeln!(s, "note: {n}").unwrap();
        }
        writeln!(
            s,
            "verdict: {} ({} pass, {} fail, {} skip)",
            status_word(self.verdict).to_uppercase(),
            self.summary.pass,
            self.summary.fail,
            self.summary.skip
        )
        .unwrap();
        s
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skip => "skip",
    }
}

/// Grid overrides and resource limits for a suite run.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub p: Option<Vec<u64>>,
    pub a: u32,
    pub n: Option<Vec<usize>>,
    pub b: Option<Vec<u32>>,
    pub kmax: Option<u32>,
    pub limits: Limits,
    /// per-case cap on brute-force toric enumerations
    pub toric_cap: u128,
    pub timings: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            p: None,
            a: 1,
            n: None,
            b: None,
            kmax: None,
            limits: Limits::default(),
            toric_cap: DEFAULT_TORIC_CAP,
            timings: false,
        }
    }
}

impl SuiteOptions {
    fn clock(&self) -> Option<Instant> {
        self.timings.then(Instant::now)
    }

    fn field(&self, p: u64) -> Result<Arc<FieldTable>> {
        Ok(Arc::new(build_field_capped(p, self.a, self.limits.table_cap)?))
    }

    /// Cartesian grid of primes and `n` values.
    fn product(&self, ps: &[u64], ns: &[usize]) -> Vec<(usize, u64)> {
        let ps = self.p.clone().unwrap_or_else(|| ps.to_vec());
        let ns = self.n.clone().unwrap_or_else(|| ns.to_vec());
        ns.iter().flat_map(|&n| ps.iter().map(move |&p| (n, p))).collect()
    }

    /// A default list of `(n, p)` pairs filtered by the overrides; if the
    /// filter leaves nothing, the overrides are combined freely.
    fn pairs(&self, defaults: &[(usize, u64)]) -> Vec<(usize, u64)> {
        let keep: Vec<(usize, u64)> = defaults
            .iter()
            .copied()
            .filter(|(n, p)| {
                self.n.as_ref().is_none_or(|ns| ns.contains(n)) && self.p.as_ref().is_none_or(|ps| ps.contains(p))
            })
            .collect();
        if !keep.is_empty() || (self.n.is_none() && self.p.is_none()) {
            return keep;
        }
        let ns: Vec<usize> = self.n.clone().unwrap_or_else(|| dedup(defaults.iter().map(|d| d.0)));
        let ps: Vec<u64> = self.p.clone().unwrap_or_else(|| dedup(defaults.iter().map(|d| d.1)));
        ns.iter().flat_map(|&n| ps.iter().map(move |&p| (n, p))).collect()
    }

    fn bs(&self, f: &FieldTable) -> Vec<u32> {
        match &self.b {
            Some(bs) => bs.iter().copied().filter(|&b| b != 0 && b < f.order()).collect(),
            None => (1..f.order()).collect(),
        }
    }

    fn grid_json(&self, pairs: &[(usize, u64)]) -> Value {
        json!({
            "a": self.a,
            "n_p": pairs.iter().map(|(n, p)| json!([n, p])).collect::<Vec<_>>(),
            "b": self.b.clone().map(Value::from).unwrap_or(Value::String("all".into())),
            "kmax": self.kmax,
        })
    }
}

fn dedup<T: Ord + Copy>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = it.collect();
    v.sort();
    v.dedup();
    v
}

/// Runs the named suite.
///
/// Budget refusals abort the whole suite with [`Error::Budget`]; any other
/// failure inside a case is recorded as a failing case.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<VerifyReport> {
    let report = match name {
        "thm0" => bound_suite(opts, false)?,
        "thm2" => bound_suite(opts, true)?,
        "cor1" => extension_bound_suite(opts)?,
        "thm1" => lfunction_suite(opts)?,
        "prop31" => polytope_suite(opts)?,
        "thm33" => hodge_suite(opts)?,
        "identities" => identities_suite(opts)?,
        "ordinary" => ordinary_suite(opts)?,
        _ => return Err(Error::Invalid(format!("unknown suite '{name}'; expected one of {}", SUITES.join(", ")))),
    };
    Ok(report.finish())
}

fn budget_only<T>(r: Result<T>) -> Result<std::result::Result<T, Error>> {
    match r {
        Err(e @ Error::Budget { .. }) => Err(e),
        Err(e @ Error::TableCap { .. }) => Err(e),
        other => Ok(other),
    }
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

fn chi_text(chi: &CharacterTuple) -> String {
    chi.indices().iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")
}

/// `chi_j(b)` as a complex number.
fn char_value(f: &FieldTable, j: u32, b: u32) -> Complex64 {
    let l = f.log(b).expect("b is nonzero") as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 * l / f.units() as f64)
}

fn qf(q: u64) -> f64 {
    q as f64
}

/// The two bounds over `F_q` with all character twists: the square-root
/// bound (`refined = false`) or the sharper `q^{n/2}` bound for `p` prime to
/// `n + 1` (`refined = true`).
fn bound_suite(opts: &SuiteOptions, refined: bool) -> Result<VerifyReport> {
    let pairs = opts.product(&[3, 5, 7], &[1, 2]);
    let (name, statement) = if refined {
        (
            "thm2",
            "for p prime to n+1: |S_n(chi,b) + ((q-1)^n - (-1)^n)/q chi_1(b)| <= (2n+1) q^{n/2} if all chi_i are equal, \
             |S_n(chi,b)| <= 2(n+1) q^{n/2} otherwise",
        )
    } else {
        (
            "thm0",
            "|S_n(chi,b) + (q-1)^n/q chi_1(b)| <= q^{(n+1)/2} if all chi_i are equal, |S_n(chi,b)| <= q^{(n+1)/2} otherwise",
        )
    };
    let mut rep = VerifyReport::new(name, statement, opts.grid_json(&pairs));
    for (n, p) in pairs {
        let f = opts.field(p)?;
        rep.add_field(&f);
        let q = f.order() as u64;
        let degenerate = refined && (n as u64 + 1) % p == 0;
        let mut observed = 0f64;
        for b in opts.bs(&f) {
            for chi in CharacterTuple::all(n + 1, f.units()) {
                let t = opts.clock();
                let s = kloosterman_sum(&f, 1, n, b, &chi, &opts.limits)?.embed_complex();
                let equal = chi.all_equal();
                let c1 = char_value(&f, chi.indices()[0], b);
                let (val, bound, check) = match (refined, equal) {
                    (false, true) => (
                        s + c1 * ((qf(q) - 1.0).powi(n as i32) / qf(q)),
                        qf(q).powf((n as f64 + 1.0) / 2.0),
                        "|S + (q-1)^n/q chi_1(b)| <= q^{(n+1)/2}",
                    ),
                    (false, false) => (s, qf(q).powf((n as f64 + 1.0) / 2.0), "|S| <= q^{(n+1)/2}"),
                    (true, true) => (
                        s + c1 * (((qf(q) - 1.0).powi(n as i32) - (-1f64).powi(n as i32)) / qf(q)),
                        (2 * n + 1) as f64 * qf(q).powf(n as f64 / 2.0),
                        "|S + ((q-1)^n - (-1)^n)/q chi_1(b)| <= (2n+1) q^{n/2}",
                    ),
                    (true, false) => (s, 2.0 * (n + 1) as f64 * qf(q).powf(n as f64 / 2.0), "|S| <= 2(n+1) q^{n/2}"),
                };
                let lhs = val.norm();
                let case_name = format!("q={q} n={n} b={b} chi=({})", chi_text(&chi));
                if degenerate {
                    observed = observed.max(lhs / bound);
                    continue;
                }
                rep.push(Case::new(case_name, check, fmt_f(lhs), fmt_f(bound), lhs <= bound + BOUND_TOLERANCE), t);
            }
        }
        if degenerate {
            rep.push(
                Case::skip(
                    format!("q={q} n={n}"),
                    "q^{n/2} bounds",
                    format!(
                        "p = {p} divides n + 1 = {}: hypothesis fails; observed max of |lhs| / bound = {}",
                        n + 1,
                        fmt_f(observed)
                    ),
                ),
                None,
            );
        }
    }
    Ok(rep)
}

/// The untwisted bound over every extension `F_{q^k}`, `k <= kmax`.
fn extension_bound_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let pairs = opts.pairs(&[(1, 3), (1, 5), (2, 7)]);
    let mut rep = VerifyReport::new(
        "cor1",
        "|S_{k,n}(b) + ((q^k-1)^n - (-1)^n (q^k+1))/q^k| <= 2n q^{nk/2} for k <= 2n",
        opts.grid_json(&pairs),
    );
    for (n, p) in pairs {
        let f = opts.field(p)?;
        rep.add_field(&f);
        let q = f.order() as u64;
        if (n as u64 + 1) % p == 0 {
            rep.push(Case::skip(format!("q={q} n={n}"), "2n q^{nk/2} bound", "p divides n + 1"), None);
            continue;
        }
        let kmax = opts.kmax.unwrap_or(2 * n as u32);
        for k in 1..=kmax {
            for b in opts.bs(&f) {
                let t = opts.clock();
                let chi = CharacterTuple::trivial(n + 1, f.units());
                let s = kloosterman_sum(&f, k, n, b, &chi, &opts.limits)?.embed_complex();
                let qk = qf(q).powi(k as i32);
                let main = ((qk - 1.0).powi(n as i32) - (-1f64).powi(n as i32) * (qk + 1.0)) / qk;
                let lhs = (s + main).norm();
                let bound = 2.0 * n as f64 * qk.powf(n as f64 / 2.0);
                rep.push(
                    Case::new(
                        format!("q={q} n={n} k={k} b={b}"),
                        "|S_k + main term| <= 2n q^{nk/2}",
                        fmt_f(lhs),
                        fmt_f(bound),
                        lhs <= bound + BOUND_TOLERANCE,
                    ),
                    t,
                );
            }
        }
    }
    Ok(rep)
}

fn slopes_text(s: &[BigRational]) -> String {
    format!("{{{}}}", s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

/// Default held-out degrees for the L-function suite.
fn default_heldout(n: usize, q: u64) -> Vec<u32> {
    match (n, q) {
        (1, _) => vec![3, 4],
        (2, 7) => vec![5],
        _ => Vec::new(),
    }
}

/// L-function reconstruction: degree, integrality, Newton slopes against
/// the Hodge slopes, weights, and held-out power sums.
fn lfunction_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let pairs = opts.pairs(&[(1, 3), (1, 5), (2, 7), (2, 13), (2, 5)]);
    let mut rep = VerifyReport::new(
        "thm1",
        "the nontrivial factor P(T) of L_n(b,T) has degree 2n, integral coefficients and roots of absolute value \
         q^{n/2}; its q-adic Newton polygon has slopes {0,1,1,...,n-1,n-1,n} when p = 1 mod n+1 and lies strictly \
         above them otherwise; power sums beyond 2n are predicted exactly",
        opts.grid_json(&pairs),
    );
    for (n, p) in pairs {
        let f = opts.field(p)?;
        rep.add_field(&f);
        let q = f.order() as u64;
        if (n as u64 + 1) % p == 0 {
            rep.push(
                Case::skip(format!("q={q} n={n}"), "L-function structure", "p divides n + 1: degenerate"),
                None,
            );
            continue;
        }
        let ordinary = p % (n as u64 + 1) == 1;
        let heldout = match opts.kmax {
            Some(k) => (2 * n as u32 + 1..=k).collect(),
            None => default_heldout(n, q),
        };
        let lopts = LOptions { heldout, limits: opts.limits };
        let mut rational = Vec::new();
        let mut slope_sets = Vec::new();
        for b in opts.bs(&f) {
            let t = opts.clock();
            let base = format!("q={q} n={n} b={b}");
            let l = match budget_only(lfunction(&f, n, b, &lopts))? {
                Ok(l) => l,
                Err(e) => {
                    rep.push(Case::failed(base, "L-function reconstruction", &e), t);
                    continue;
                }
            };
            let deg = l.p_coeffs.len() - 1;
            let integral = l.p_coeffs.iter().all(|c| c.is_integral());
            rep.push(
                Case::new(
                    base.clone(),
                    "deg P = 2n, coefficients integral",
                    format!("deg {deg}, {}", if integral { "integral" } else { "non-integral" }),
                    format!("deg {}, integral", 2 * n),
                    deg == 2 * n && !l.p_coeffs[deg].is_zero() && integral,
                ),
                t,
            );
            if l.is_rational() {
                rational.push(b);
            }
            let np = l.slope_sequence();
            let hp = hodge_slopes(n);
            if !slope_sets.contains(&np) {
                slope_sets.push(np.clone());
            }
            let (check, ok) = if ordinary {
                ("Newton slopes = Hodge slopes", np == hp)
            } else {
                ("Newton polygon strictly above Hodge polygon, same endpoints", compare_polygons(&np, &hp) == PolygonRelation::StrictlyAbove)
            };
            rep.push(Case::new(base.clone(), check, slopes_text(&np), slopes_text(&hp), ok), None);

            let target = expected_weight(q, n);
            let mags = l.magnitudes();
            let worst = mags.iter().map(|m| ((m - target) / target).abs()).fold(0.0, f64::max);
            rep.push(
                Case::new(
                    base.clone(),
                    format!("|alpha_i| = q^{{n/2}} = {}, max relative deviation <= {WEIGHT_TOLERANCE:e}", fmt_f(target)),
                    format!("{worst:.3e}"),
                    format!("{WEIGHT_TOLERANCE:e}"),
                    mags.len() == 2 * n && worst <= WEIGHT_TOLERANCE,
                ),
                None,
            );
            for h in &l.heldout {
                rep.push(
                    Case::new(
                        format!("{base} k={}", h.k),
                        "predicted S_k = enumerated S_k",
                        h.predicted.to_string(),
                        h.actual.to_string(),
                        h.matched,
                    ),
                    None,
                );
            }
        }
        let bs = opts.bs(&f);
        if !bs.is_empty() {
            let seen: Vec<String> = slope_sets.iter().map(|s| slopes_text(s)).collect();
            rep.notes.push(format!("q={q} n={n}: observed slope sequences over b: {}", seen.join(" ")));
        }
        rep.notes.push(if rational.len() == bs.len() {
            format!("q={q} n={n}: P(T) has rational integer coefficients for every b")
        } else {
            if rational.is_empty() {
                format!("q={q} n={n}: P(T) is not in Z[T] for any b; its coefficients are integers of Q(zeta_p)")
            } else {
                format!("q={q} n={n}: P(T) is in Z[T] only for b in {rational:?}; the rest need Z[zeta_p] coefficients")
            }
        });
    }
    Ok(rep)
}

fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|&p| is_prime(p)).collect()
}

/// The polytope of the auxiliary polynomial: denominator, facet
/// determinants, volume and diagonal non-degeneracy.
fn polytope_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let ns = opts.n.clone().unwrap_or_else(|| vec![1, 2, 3, 4]);
    let ps = opts.p.clone().unwrap_or_else(|| primes_below(30));
    let mut rep = VerifyReport::new(
        "prop31",
        "the Newton polytope of the auxiliary polynomial has denominator D = 1, facet determinants -(n+1) and n+1, \
         normalized volume 2n+2, and is non-degenerate exactly when p does not divide n+1",
        json!({ "n": ns, "p": ps }),
    );
    for n in ns {
        let t = opts.clock();
        let ik = match budget_only(ik_polytope(n))? {
            Ok(ik) => ik,
            Err(e) => {
                rep.push(Case::failed(format!("n={n}"), "polytope construction", &e), t);
                continue;
            }
        };
        let name = format!("n={n}");
        let d = ik.data.denominator;
        rep.push(Case::new(name.clone(), "denominator D = 1", d.to_string(), "1", d == 1), t);
        let n1 = n as i64 + 1;
        let d1 = det_i64(&ik.m1);
        let d2 = det_i64(&ik.m2);
        rep.push(Case::new(name.clone(), "det M(delta_1) = -(n+1)", d1.to_string(), (-n1).to_string(), d1 == BigInt::from(-n1)), None);
        rep.push(Case::new(name.clone(), "det M(delta_2) = n+1", d2.to_string(), n1.to_string(), d2 == BigInt::from(n1)), None);
        let vol = ik.data.normalized_volume();
        rep.push(
            Case::new(name.clone(), "(n+2)! Vol = 2n+2", vol.to_string(), (2 * n + 2).to_string(), vol == 2 * n as u64 + 2),
            None,
        );
        let mut wrong = Vec::new();
        for &p in &ps {
            let nondeg = diagonal_nondegenerate(&ik.m1, p)? && diagonal_nondegenerate(&ik.m2, p)?;
            if nondeg != ((n as u64 + 1) % p != 0) {
                wrong.push(p);
            }
        }
        rep.push(
            Case::new(
                name,
                "non-degenerate <=> p does not divide n+1",
                format!("mismatches {wrong:?}"),
                "mismatches []",
                wrong.is_empty(),
            ),
            None,
        );
    }
    Ok(rep)
}

fn binom(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

/// Hodge numbers of the auxiliary polytope from lattice-point weights.
fn hodge_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let ns = opts.n.clone().unwrap_or_else(|| vec![1, 2, 3, 4]);
    let mut rep = VerifyReport::new(
        "thm33",
        "the Hodge numbers of the auxiliary polytope are H(0..n+1) = 1,2,...,2,1 and vanish beyond (n+2)D; \
         sum H = 2n+2 = (n+2)! Vol; the weight counts satisfy sum_k W(k) x^k = H(x)/(1-x)^{n+2}",
        json!({ "n": ns, "kmax": opts.kmax }),
    );
    for n in ns {
        let t = opts.clock();
        let name = format!("n={n}");
        let ik = match budget_only(ik_polytope(n))? {
            Ok(ik) => ik,
            Err(e) => {
                rep.push(Case::failed(name, "polytope construction", &e), t);
                continue;
            }
        };
        let dim = n as u64 + 2;
        let d = ik.data.denominator as u64;
        let k_max = opts.kmax.map(u64::from).unwrap_or(dim * d + 1).max(dim * d + 1);
        let hd = match ik.data.hodge_data(Some(k_max), DEFAULT_BOX_BUDGET) {
            Ok(h) => h,
            Err(e @ Error::Budget { .. }) => return Err(e),
            Err(e) => {
                rep.push(Case::failed(name, "weight counts", &e), t);
                continue;
            }
        };
        let mut expect = vec![0i64; k_max as usize + 1];
        expect[0] = 1;
        expect[n + 1] = 1;
        for e in expect.iter_mut().take(n + 1).skip(1) {
            *e = 2;
        }
        let shown = |h: &[i64]| format!("{:?}", &h[..(n + 2).min(h.len())]);
        rep.push(
            Case::new(name.clone(), "H(0..n+1) = 1,2,...,2,1", shown(&hd.h), shown(&expect), hd.h[..n + 2] == expect[..n + 2]),
            t,
        );
        let tail: Vec<i64> = hd.h[(dim * d) as usize + 1..].to_vec();
        rep.push(
            Case::new(
                name.clone(),
                format!("H(k) = 0 for (n+2)D < k <= {k_max}"),
                format!("{tail:?}"),
                format!("{:?}", vec![0; tail.len()]),
                tail.iter().all(|&x| x == 0),
            ),
            None,
        );
        let total = hd.hodge_sum();
        rep.push(
            Case::new(
                name.clone(),
                "sum H = 2n+2 = (n+2)! Vol",
                format!("{total}, {}", hd.normalized_volume),
                format!("{}, {}", 2 * n + 2, 2 * n + 2),
                total == 2 * n as i64 + 2 && hd.normalized_volume == 2 * n as u64 + 2,
            ),
            None,
        );
        // W(k) = sum_j h_j C(k - j + n + 1, n + 1), independent of the H tabulation
        let predicted: Vec<i64> = (0..=k_max as i64)
            .map(|k| (0..=n as i64 + 1).map(|j| expect[j as usize] * binom(k - j + n as i64 + 1, n as i64 + 1)).sum())
            .collect();
        let counted: Vec<i64> = hd.w.iter().map(|&w| w as i64).collect();
        rep.push(
            Case::new(
                name,
                format!("W(k) = [x^k] H(x)/(1-x)^{{n+2}} for k <= {k_max}"),
                format!("{counted:?}"),
                format!("{predicted:?}"),
                counted == predicted,
            ),
            None,
        );
    }
    Ok(rep)
}

fn cyclo_eq_text(a: &CycloRational, b: &CycloRational) -> (String, String, bool) {
    (a.to_string(), b.to_string(), a == b)
}

/// Exact identities: the auxiliary sum `E_n`, the toric power sums `S*_k`,
/// the `T_n` change of variables, and the Gauss-sum formula.
fn identities_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let small = opts.product(&[3, 5, 7], &[1, 2]);
    let lgrid = opts.pairs(&[(1, 3), (1, 5), (2, 7), (2, 13)]);
    let mut rep = VerifyReport::new(
        "identities",
        "exact: q S_n = chi_1(b)(E_n - (q-1)^n) for equal characters and chi_{n+1}(b) E_n otherwise; \
         S*_k = q^k S_{k,n} + (q^k-1)^n against a brute-force toric sum; T_n(chi,b) = chi_1...chi_{n+1}(b) S_n(chi, b^{-(n+1)}); \
         Gauss-sum formula vs enumeration within 1e-6 q^{(n+1)/2}",
        json!({
            "small": opts.grid_json(&small),
            "toric": opts.grid_json(&lgrid),
            "toric_cap": opts.toric_cap.to_string(),
        }),
    );

    // E_n and T_n, exact
    for &(n, p) in &small {
        let f = opts.field(p)?;
        rep.add_field(&f);
        let q = f.order() as u64;
        let units = f.units();
        for b in opts.bs(&f) {
            let lb = f.log(b).unwrap() as u64;
            for chi in CharacterTuple::all(n + 1, units) {
                let t = opts.clock();
                let name = format!("q={q} n={n} b={b} chi=({})", chi_text(&chi));
                let s = kloosterman_sum(&f, 1, n, b, &chi, &opts.limits)?;
                let s = if s.m() == units { s } else { s.lift(units)? };
                let e = e_sum(&f, n, b, &chi, &opts.limits)?;
                let e = if e.m() == units { e } else { e.lift(units)? };
                let lhs = s.scale(&BigInt::from(q));
                let (rhs, check) = if chi.all_equal() {
                    let shifted = e.sub(&SumValue::from_int(f.p(), units, BigInt::from(q - 1).pow(n as u32)))?;
                    (shifted.shift(0, chi.indices()[0] as u64 * lb), "q S = chi_1(b)(E_n - (q-1)^n)")
                } else {
                    (e.shift(0, chi.indices()[n] as u64 * lb), "q S = chi_{n+1}(b) E_n")
                };
                let ok = lhs.exact_eq(&rhs)?;
                rep.push(Case::new(name, check, fmt_c(lhs.embed_complex()), fmt_c(rhs.embed_complex()), ok), t);
            }
        }
    }
    for &(n, p) in &small {
        let f = opts.field(p)?;
        let q = f.order() as u64;
        for b in opts.bs(&f) {
            for chi in CharacterTuple::all(n + 1, f.units()) {
                let t = opts.clock();
                let name = format!("q={q} n={n} b={b} chi=({})", chi_text(&chi));
                let check = "T_n(chi,b) = chi_1...chi_{n+1}(b) S_n(chi, b^{-(n+1)})";
                match budget_only(tn_transform(&f, n, b, &chi, &opts.limits))? {
                    Ok(v) => {
                        let z = fmt_c(v.embed_complex());
                        rep.push(Case::new(name, check, z.clone(), z, true), t)
                    }
                    Err(e) => rep.push(Case::failed(name, check, &e), t),
                }
            }
        }
    }
    // Gauss-sum oracle
    for &(n, p) in &small {
        let f = opts.field(p)?;
        let q = f.order() as u64;
        let units = f.units();
        let gauss = GaussTable::new(&f, 1, &opts.limits)?;
        let tol = BOUND_TOLERANCE * qf(q).powf((n as f64 + 1.0) / 2.0);
        for b in opts.bs(&f) {
            for chi in CharacterTuple::all(n + 1, units) {
                let t = opts.clock();
                let name = format!("q={q} n={n} b={b} chi=({})", chi_text(&chi));
                let formula = gauss.scaled_sum(n, b, &chi, &opts.limits)?.embed_complex() / qf(q);
                let direct = kloosterman_sum(&f, 1, n, b, &chi, &opts.limits)?.embed_complex();
                let diff = (formula - direct).norm();
                rep.push(
                    Case::new(name, "|Gauss formula - enumeration| <= 1e-6 q^{(n+1)/2}", format!("{diff:.3e}"), format!("{tol:.3e}"), diff <= tol),
                    t,
                );
            }
        }
    }
    // S*_k against the toric sum of the auxiliary polynomial
    for &(n, p) in &lgrid {
        let f = opts.field(p)?;
        rep.add_field(&f);
        let q = f.order() as u64;
        if (n as u64 + 1) % p == 0 {
            rep.push(Case::skip(format!("q={q} n={n}"), "S*_k relation", "p divides n + 1"), None);
            continue;
        }
        let kmax = opts.kmax.unwrap_or(2 * n as u32);
        let check = "toric sum S*_k = q^k S_{k,n} + (q^k-1)^n";
        for k in 1..=kmax {
            let points = kloosterman_cost(q, k, n + 2);
            for b in opts.bs(&f) {
                let name = format!("q={q} n={n} k={k} b={b}");
                if points > opts.toric_cap {
                    rep.push(
                        Case::skip(
                            name,
                            check,
                            format!("brute-force toric sum needs {points} points, above the cap of {}", opts.toric_cap),
                        ),
                        None,
                    );
                    continue;
                }
                let t = opts.clock();
                let aux = auxiliary_laurent(&f, n, b)?;
                let toric = reduce_mod_phi(&toric_sum(&f, k, &aux, &CharacterTuple::trivial(n + 2, f.units()), &opts.limits)?)?;
                let chi = CharacterTuple::trivial(n + 1, f.units());
                let s = reduce_mod_phi(&kloosterman_sum(&f, k, n, b, &chi, &opts.limits)?)?;
                // the relation for degree k alone: pad so the k-th entry is S_{k,n}
                let mut sums = vec![CycloRational::zero(f.p()); k as usize];
                sums[k as usize - 1] = s;
                let via = toric_from_kloosterman(&sums, n, q).pop().unwrap();
                let (l, r, ok) = cyclo_eq_text(&toric, &via);
                rep.push(Case::new(name, check, l, r, ok), t);
            }
        }
    }
    Ok(rep)
}

/// Facial ordinariness of the auxiliary polynomial against `p = 1 mod n+1`.
fn ordinary_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let ns = opts.n.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let ps = opts.p.clone().unwrap_or_else(|| primes_below(30));
    let mut rep = VerifyReport::new(
        "ordinary",
        "for p prime to n+1 the auxiliary polynomial is ordinary (Stickelberger test on both facets) iff p = 1 mod n+1",
        json!({ "n": ns, "p": ps }),
    );
    for n in ns {
        for &p in &ps {
            let name = format!("n={n} p={p}");
            if (n as u64 + 1) % p == 0 {
                continue;
            }
            let t = opts.clock();
            let f = build_field_capped(p, 1, opts.limits.table_cap)?;
            let aux = auxiliary_laurent(&f, n, 1)?;
            let expected = p % (n as u64 + 1) == 1;
            match budget_only(facial_ordinary(&aux, p, DEFAULT_DIM_CAP.max(n + 2)))? {
                Ok(v) => rep.push(
                    Case::new(
                        name,
                        "ordinary <=> p = 1 mod n+1",
                        v.ordinary.to_string(),
                        expected.to_string(),
                        v.ordinary == expected,
                    ),
                    t,
                ),
                Err(e) => rep.push(Case::failed(name, "ordinary <=> p = 1 mod n+1", &e), t),
            }
        }
    }
    Ok(rep)
}
