//! Newton polyhedra: facets and their functionals, the weight (gauge)
//! function, weight counts, Hodge numbers, normalized volume, and the
//! diagonal non-degeneracy and ordinariness criteria.
//!
//! A polytope here is always `conv(0, points)`; the weight of a lattice
//! point is the least `c >= 0` with `u in c * Delta`, computed as the largest
//! value of the facet functionals once `u` is known to lie in the cone.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::{field_maps_capped, FieldTable, DEFAULT_TABLE_CAP};
use crate::laurent::LaurentPoly;
use crate::linalg::{det_i64, kernel_line, rank_i64, smith_normal_form};

pub const DEFAULT_DIM_CAP: usize = 6;
pub const MAX_POINTS: usize = 64;
/// Largest number of candidate hyperplanes examined during facet search.
pub const MAX_HYPERPLANE_CANDIDATES: u128 = 5_000_000;
pub const DEFAULT_BOX_BUDGET: u128 = 100_000_000;
pub const MAX_SOLUTION_GROUP: u64 = 1_000_000;

/// A codimension-one face: `normal . x <= offset` on the polytope, with
/// equality exactly on the facet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// indices into [`PolytopeData::vertices`]
    pub vertices: Vec<usize>,
    /// primitive integer normal
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn contains_origin(&self) -> bool {
        self.offset == 0
    }

    /// `l(x) = normal . x / offset`, equal to 1 on the facet; `None` for
    /// facets through the origin.
    pub fn functional(&self) -> Option<Vec<Rational64>> {
        (self.offset != 0).then(|| self.normal.iter().map(|&a| Rational64::new(a, self.offset)).collect())
    }

    /// `D(delta)`: lcm of the functional's coefficient denominators.
    pub fn denominator(&self) -> Option<i64> {
        self.functional().map(|l| l.iter().fold(1i64, |acc, c| acc.lcm(c.denom())))
    }

    pub fn is_simplicial(&self, dim: usize) -> bool {
        self.vertices.len() == dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytopeData {
    pub dim: usize,
    /// vertices of `conv(0, points)`; the origin is listed when it is one
    pub vertices: Vec<Vec<i64>>,
    pub facets: Vec<Facet>,
    /// lcm of the facet denominators over facets missing the origin
    pub denominator: i64,
}

#[derive(Deserialize)]
struct VertexJson {
    vertices: Vec<Vec<i64>>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn affine_rank(points: &[&Vec<i64>]) -> usize {
    let Some(first) = points.first() else { return 0 };
    let diffs: Vec<Vec<i64>> =
        points[1..].iter().map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect()).collect();
    if diffs.is_empty() {
        0
    } else {
        rank_i64(&diffs)
    }
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl PolytopeData {
    /// `conv(0, points)` in `R^dim` with `dim <= dim_cap`.
    pub fn from_points(points: &[Vec<i64>], dim_cap: usize) -> Result<Self> {
        let Some(dim) = points.first().map(|p| p.len()) else {
            return Err(Error::Invalid("no points given".into()));
        };
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Invalid("points have different dimensions".into()));
        }
        if dim == 0 || dim > dim_cap {
            return Err(Error::Invalid(format!("dimension {dim} outside 1..={dim_cap}")));
        }
        let mut set: BTreeSet<Vec<i64>> = points.iter().cloned().collect();
        set.insert(vec![0; dim]);
        let pts: Vec<Vec<i64>> = set.into_iter().collect();
        if pts.len() > MAX_POINTS + 1 {
            return Err(Error::Invalid(format!("{} points exceed the limit of {MAX_POINTS}", pts.len() - 1)));
        }
        let hull = affine_rank(&pts.iter().collect::<Vec<_>>());
        if hull < dim {
            return Err(Error::NotFullDimensional { hull, dim });
        }
        let candidates = binomial(pts.len() as u128, dim as u128);
        if candidates > MAX_HYPERPLANE_CANDIDATES {
            return Err(Error::Invalid(format!("{candidates} candidate hyperplanes exceed the search limit")));
        }

        // exhaustive hyperplane search through d-subsets
        let mut planes: BTreeSet<(Vec<i64>, i64)> = BTreeSet::new();
        for_each_subset(pts.len(), dim, |sub| {
            let rows: Vec<Vec<i64>> = sub
                .iter()
                .map(|&i| {
                    let mut r = pts[i].clone();
                    r.push(-1);
                    r
                })
                .collect();
            let Some(mut h) = kernel_line(&rows) else { return };
            let c = h.pop().unwrap();
            if h.iter().all(|&x| x == 0) {
                return;
            }
            let vals: Vec<i64> = pts.iter().map(|p| dot(&h, p) - c).collect();
            let (normal, offset) = if vals.iter().all(|&v| v <= 0) {
                (h, c)
            } else if vals.iter().all(|&v| v >= 0) {
                (h.iter().map(|x| -x).collect(), -c)
            } else {
                return;
            };
            planes.insert((normal, offset));
        });

        let on = |normal: &[i64], offset: i64| -> Vec<usize> {
            (0..pts.len()).filter(|&i| dot(normal, &pts[i]) == offset).collect()
        };
        // vertices: points where the incident facet normals span R^d
        let is_vertex: Vec<bool> = (0..pts.len())
            .map(|i| {
                let normals: Vec<Vec<i64>> =
                    planes.iter().filter(|(a, c)| dot(a, &pts[i]) == *c).map(|(a, _)| a.clone()).collect();
                !normals.is_empty() && rank_i64(&normals) == dim
            })
            .collect();
        let vertices: Vec<Vec<i64>> = pts.iter().zip(&is_vertex).filter(|(_, &v)| v).map(|(p, _)| p.clone()).collect();
        let index_of = |p: &Vec<i64>| vertices.iter().position(|v| v == p).unwrap();
        let facets: Vec<Facet> = planes
            .iter()
            .map(|(normal, offset)| {
                let vs = on(normal, *offset).into_iter().filter(|&i| is_vertex[i]).map(|i| index_of(&pts[i])).collect();
                Facet { vertices: vs, normal: normal.clone(), offset: *offset }
            })
            .collect();
        let denominator = facets.iter().filter_map(Facet::denominator).fold(1i64, |acc, d| acc.lcm(&d));
        Ok(PolytopeData { dim, vertices, facets, denominator })
    }

    /// The Newton polyhedron `conv(0, exponents of f)`.
    pub fn from_laurent(f: &LaurentPoly, dim_cap: usize) -> Result<Self> {
        Self::from_points(&f.exponents(), dim_cap)
    }

    /// Parses `{"vertices": [[...], ...]}`.
    pub fn from_json(s: &str, dim_cap: usize) -> Result<Self> {
        let v: VertexJson = serde_json::from_str(s)
            .map_err(|e| Error::Parse { line: e.line(), col: e.column(), msg: e.to_string() })?;
        Self::from_points(&v.vertices, dim_cap)
    }

    pub fn nonorigin_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| !f.contains_origin())
    }

    /// `D * w(u)` as an integer, or `None` when `u` is outside the cone.
    pub fn scaled_weight(&self, u: &[i64]) -> Option<i64> {
        let mut best = 0i64;
        for f in &self.facets {
            let v = dot(&f.normal, u);
            if f.offset == 0 {
                if v > 0 {
                    return None;
                }
            } else {
                // D * v / offset is integral because D clears the denominators
                let scaled = v * self.denominator;
                best = best.max(Integer::div_floor(&scaled, &f.offset));
                debug_assert_eq!(scaled % f.offset, 0);
            }
        }
        Some(best)
    }

    /// The gauge `w(u)`, or `None` for `+infinity`.
    pub fn weight(&self, u: &[i64]) -> Option<Rational64> {
        self.scaled_weight(u).map(|k| Rational64::new(k, self.denominator))
    }

    /// Weight counts `W(k)`, `k = 0..=k_max`, by enumerating the lattice
    /// points of the box around `(k_max / D) * Delta`.
    pub fn weight_counts(&self, k_max: u64, box_budget: u128) -> Result<Vec<u64>> {
        let d = self.denominator;
        let k = k_max as i64;
        let (lo, hi): (Vec<i64>, Vec<i64>) = (0..self.dim)
            .map(|i| {
                let mn = self.vertices.iter().map(|v| v[i]).min().unwrap().min(0);
                let mx = self.vertices.iter().map(|v| v[i]).max().unwrap().max(0);
                (Integer::div_floor(&(mn * k), &d), Integer::div_ceil(&(mx * k), &d))
            })
            .unzip();
        let points: u128 = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as u128).product();
        if points > box_budget {
            return Err(Error::Budget { points, budget: box_budget });
        }
        let slabs: Vec<i64> = (lo[0]..=hi[0]).collect();
        let counts = slabs
            .into_par_iter()
            .map(|x0| {
                let mut w = vec![0u64; k_max as usize + 1];
                let mut u = lo.clone();
                u[0] = x0;
                loop {
                    if let Some(s) = self.scaled_weight(&u) {
                        if s <= k {
                            w[s as usize] += 1;
                        }
                    }
                    let mut i = 1;
                    loop {
                        if i == self.dim {
                            return w;
                        }
                        u[i] += 1;
                        if u[i] <= hi[i] {
                            break;
                        }
                        u[i] = lo[i];
                        i += 1;
                    }
                }
            })
            .reduce(
                || vec![0u64; k_max as usize + 1],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Ok(counts)
    }

    /// Every face of dimension `0..dim-1` that avoids the origin, as sorted
    /// vertex-index lists.
    pub fn faces_avoiding_origin(&self) -> Vec<Vec<usize>> {
        let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut frontier: Vec<Vec<usize>> = self.nonorigin_facets().map(|f| f.vertices.clone()).collect();
        while let Some(face) = frontier.pop() {
            if !out.insert(face.clone()) {
                continue;
            }
            let dim = self.face_dim(&face);
            if dim == 0 {
                continue;
            }
            frontier.extend(self.subfaces(&face, dim));
        }
        out.into_iter().collect()
    }

    fn face_dim(&self, face: &[usize]) -> usize {
        affine_rank(&face.iter().map(|&i| &self.vertices[i]).collect::<Vec<_>>())
    }

    /// Codimension-one faces of `face` (which has dimension `dim`).
    fn subfaces(&self, face: &[usize], dim: usize) -> Vec<Vec<usize>> {
        let mut subs: BTreeSet<Vec<usize>> = BTreeSet::new();
        for f in &self.facets {
            let inter: Vec<usize> = face.iter().copied().filter(|i| f.vertices.contains(i)).collect();
            if inter.len() < face.len() && !inter.is_empty() && self.face_dim(&inter) + 1 == dim {
                subs.insert(inter);
            }
        }
        subs.into_iter().collect()
    }

    /// Simplices (as vertex lists) of a pulling triangulation of `face`.
    fn triangulate(&self, face: &[usize]) -> Vec<Vec<usize>> {
        let dim = self.face_dim(face);
        if dim == 0 {
            return vec![vec![face[0]]];
        }
        let apex = face[0];
        let mut out = Vec::new();
        for sub in self.subfaces(face, dim) {
            if sub.contains(&apex) {
                continue;
            }
            for mut s in self.triangulate(&sub) {
                s.push(apex);
                out.push(s);
            }
        }
        out
    }

    /// `dim! * Vol(Delta)`, from the cones over triangulated facets that
    /// miss the origin. Independent of the weight counts.
    pub fn normalized_volume(&self) -> u64 {
        let mut total = BigInt::zero();
        for f in self.nonorigin_facets() {
            for s in self.triangulate(&f.vertices) {
                let m: Vec<Vec<i64>> = s.iter().map(|&i| self.vertices[i].clone()).collect();
                total += det_i64(&m).abs();
            }
        }
        u64::try_from(total).expect("volume fits in u64")
    }

    /// Hodge data with `W` and `H` tabulated for `k = 0..=k_max`
    /// (default `dim * D`).
    pub fn hodge_data(&self, k_max: Option<u64>, box_budget: u128) -> Result<HodgeData> {
        let d = self.denominator as u64;
        let k_max = k_max.unwrap_or(self.dim as u64 * d);
        let w = self.weight_counts(k_max, box_budget)?;
        let h: Vec<i64> = (0..=k_max)
            .map(|k| {
                (0..=self.dim as u64)
                    .filter(|i| i * d <= k)
                    .map(|i| {
                        let c = binomial(self.dim as i64, i as i64) * w[(k - i * d) as usize] as i64;
                        if i % 2 == 0 {
                            c
                        } else {
                            -c
                        }
                    })
                    .sum()
            })
            .collect();
        let top = (self.dim as u64 * d).min(k_max);
        let mut polygon = vec![(0i64, Rational64::zero())];
        let (mut x, mut y) = (0i64, 0i64);
        for (k, &hk) in h.iter().enumerate().take(top as usize + 1) {
            x += hk;
            y += k as i64 * hk;
            polygon.push((x, Rational64::new(y, d as i64)));
        }
        Ok(HodgeData { d, k_max, w, h, polygon, normalized_volume: self.normalized_volume() })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "vertices": self.vertices,
            "D": self.denominator,
            "facets": self.facets.iter().map(|f| json!({
                "vertices": f.vertices,
                "normal": f.normal,
                "offset": f.offset,
                "functional": f.functional().map(|l| l.iter().map(|c| json!([c.numer(), c.denom()])).collect::<Vec<_>>()),
                "simplicial": f.is_simplicial(self.dim),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeData {
    pub d: u64,
    pub k_max: u64,
    /// `W(k)`: lattice points of weight exactly `k / D`
    pub w: Vec<u64>,
    /// `H(k) = sum_i (-1)^i C(n, i) W(k - iD)`
    pub h: Vec<i64>,
    /// `(0,0)` followed by `(sum_{m<=k} H(m), (1/D) sum_{m<=k} m H(m))`
    pub polygon: Vec<(i64, Rational64)>,
    pub normalized_volume: u64,
}

impl HodgeData {
    pub fn hodge_sum(&self) -> i64 {
        self.h.iter().sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "D": self.d,
            "W": self.w,
            "H": self.h,
            "polygon": self.polygon.iter().map(|(x, y)| json!([x, y.numer(), y.denom()])).collect::<Vec<_>>(),
            "nvol": self.normalized_volume,
        })
    }

    /// Polygon vertices as CSV for plotting.
    pub fn polygon_csv(&self) -> String {
        let mut s = String::from("x,y_num,y_den,y\n");
        for (x, y) in &self.polygon {
            s.push_str(&format!("{x},{},{},{}\n", y.numer(), y.denom(), *y.numer() as f64 / *y.denom() as f64));
        }
        s
    }
}

/// The polytope of the auxiliary Laurent polynomial in `n + 2` variables,
/// with the vertex matrices of its two facets missing the origin.
#[derive(Clone, Debug)]
pub struct IkPolytope {
    pub n: usize,
    pub data: PolytopeData,
    /// exponent vectors `V_1..V_{n+3}` in the order of the polynomial's terms
    pub exponents: Vec<Vec<i64>>,
    /// columns `V_1..V_{n+2}` (facet `x_{n+1} = 1`)
    pub m1: Vec<Vec<i64>>,
    /// columns `V_1..V_{n+1}, V_{n+3}` (facet `x_{n+2} = 1`)
    pub m2: Vec<Vec<i64>>,
}

/// Matrix whose columns are the given vectors.
pub fn column_matrix(cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = cols[0].len();
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

pub fn ik_exponents(n: usize) -> Vec<Vec<i64>> {
    let d = n + 2;
    let mut v = Vec::with_capacity(n + 3);
    for i in 0..n {
        let mut e = vec![0; d];
        e[i] = 1;
        e[n] = 1;
        e[n + 1] = 1;
        v.push(e);
    }
    let mut e = vec![-1; d];
    e[n] = 1;
    e[n + 1] = 1;
    v.push(e);
    let mut e = vec![0; d];
    e[n] = 1;
    v.push(e);
    let mut e = vec![0; d];
    e[n + 1] = 1;
    v.push(e);
    v
}

pub fn ik_polytope(n: usize) -> Result<IkPolytope> {
    if !(1..=8).contains(&n) {
        return Err(Error::Invalid(format!("n = {n} outside 1..=8")));
    }
    let exps = ik_exponents(n);
    let data = PolytopeData::from_points(&exps, n + 2)?;
    let m1 = column_matrix(&exps[..n + 2]);
    let mut cols2: Vec<Vec<i64>> = exps[..n + 1].to_vec();
    cols2.push(exps[n + 2].clone());
    let m2 = column_matrix(&cols2);

    // the facets missing the origin must be x_{n+1} = 1 and x_{n+2} = 1
    let mut split: Vec<BTreeSet<Vec<i64>>> = data
        .nonorigin_facets()
        .map(|f| f.vertices.iter().map(|&i| data.vertices[i].clone()).collect())
        .collect();
    split.sort();
    let mut expect: Vec<BTreeSet<Vec<i64>>> =
        vec![exps[..n + 2].iter().cloned().collect(), cols2.iter().cloned().collect()];
    expect.sort();
    if split != expect {
        return Err(Error::Mismatch("unexpected facet structure".into()));
    }
    Ok(IkPolytope { n, data, exponents: exps, m1, m2 })
}

/// `gcd(|det M|, p) = 1`.
pub fn diagonal_nondegenerate(m: &[Vec<i64>], p: u64) -> Result<bool> {
    let det = det_i64(m);
    if det.is_zero() {
        return Err(Error::Singular);
    }
    Ok(det.abs().gcd(&BigInt::from(p)) == BigInt::from(1))
}

/// `S(M) = { r in [0,1)^n : M r in Z^n }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionGroup {
    pub matrix: Vec<Vec<i64>>,
    /// all elements, sorted
    pub elements: Vec<Vec<Rational64>>,
    /// elements of order prime to `p`
    pub prime_to_p: Vec<Vec<Rational64>>,
}

pub fn norm(r: &[Rational64]) -> Rational64 {
    r.iter().sum()
}

fn frac(x: Rational64) -> Rational64 {
    x - x.floor()
}

fn order(r: &[Rational64]) -> i64 {
    r.iter().fold(1i64, |acc, c| acc.lcm(c.denom()))
}

/// Enumerates the solution group via a Smith normal form `U M V = S`:
/// the solutions are `r = V (c_1/s_1, ..., c_n/s_n) mod 1`.
pub fn solution_group(m: &[Vec<i64>], p: u64) -> Result<SolutionGroup> {
    let det = det_i64(m);
    if det.is_zero() {
        return Err(Error::Singular);
    }
    if det.abs() > BigInt::from(MAX_SOLUTION_GROUP) {
        return Err(Error::Invalid(format!("|det M| = {} exceeds {MAX_SOLUTION_GROUP}", det.abs())));
    }
    let n = m.len();
    let (s, _u, v) = smith_normal_form(m);
    let mut elements = Vec::new();
    let mut c = vec![0i64; n];
    loop {
        let r: Vec<Rational64> = (0..n)
            .map(|i| frac((0..n).map(|j| Rational64::new(v[i][j] * c[j], s[j])).sum()))
            .collect();
        elements.push(r);
        let mut i = 0;
        loop {
            if i == n {
                elements.sort();
                let prime_to_p =
                    elements.iter().filter(|r| order(r).gcd(&(p as i64)) == 1).cloned().collect();
                return Ok(SolutionGroup { matrix: m.to_vec(), elements, prime_to_p });
            }
            c[i] += 1;
            if c[i] < s[i] {
                break;
            }
            c[i] = 0;
            i += 1;
        }
    }
}

/// The Stickelberger criterion: `|r| = |{p r}|` for every `r` of order
/// prime to `p`.
pub fn ordinary_test(m: &[Vec<i64>], p: u64) -> Result<(SolutionGroup, bool)> {
    let g = solution_group(m, p)?;
    let pp = Rational64::from_integer(p as i64);
    let ok = g.prime_to_p.iter().all(|r| {
        let pr: Vec<Rational64> = r.iter().map(|&x| frac(x * pp)).collect();
        norm(r) == norm(&pr)
    });
    Ok((g, ok))
}

/// Per-facet and combined ordinariness of a Laurent polynomial whose facets
/// missing the origin are all diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacialVerdict {
    /// `(vertex matrix, ordinary)` for each facet missing the origin
    pub facets: Vec<(Vec<Vec<i64>>, bool)>,
    pub ordinary: bool,
}

pub fn facial_ordinary(f: &LaurentPoly, p: u64, dim_cap: usize) -> Result<FacialVerdict> {
    let poly = PolytopeData::from_laurent(f, dim_cap)?;
    let exps = f.exponents();
    let mut facets = Vec::new();
    for facet in poly.nonorigin_facets() {
        let on: Vec<Vec<i64>> = exps.iter().filter(|e| dot(&facet.normal, e) == facet.offset).cloned().collect();
        let name = format!("{:?}", facet.vertices.iter().map(|&i| &poly.vertices[i]).collect::<Vec<_>>());
        if !facet.is_simplicial(poly.dim) || on.len() != poly.dim {
            return Err(Error::NonSimplicialFacet(name));
        }
        let m = column_matrix(&on);
        if !diagonal_nondegenerate(&m, p)? {
            return Err(Error::Invalid(format!("facet {name} is degenerate at p = {p}")));
        }
        let (_, ok) = ordinary_test(&m, p)?;
        facets.push((m, ok));
    }
    let ordinary = facets.iter().all(|(_, ok)| *ok);
    Ok(FacialVerdict { facets, ordinary })
}

/// Outcome of the bounded non-degeneracy search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NonDegeneracy {
    /// every facet missing the origin is diagonal with `gcd(det, p) = 1`
    DiagonalCertified,
    /// the face-restricted log-derivatives have a common toric zero over
    /// `F_{q^k}` (point given as extension-field encodings); `point` is
    /// empty when degeneracy follows from a diagonal facet's determinant
    Degenerate { face: Vec<Vec<i64>>, k: u32, point: Vec<u32> },
    NoWitnessFound { searched_points: u128 },
}

/// Searches for common zeros of `x_i d/dx_i f^sigma` on the torus over
/// `F_{q^k}`, `k <= max_k`, for every face `sigma` avoiding the origin.
/// Only a counterexample finder: absence of a witness proves nothing
/// unless the diagonal criterion applies.
pub fn nondegeneracy_search(
    f: &LaurentPoly,
    base: &Arc<FieldTable>,
    max_k: u32,
    budget: u128,
) -> Result<NonDegeneracy> {
    if !f.matches_field(base) {
        return Err(Error::Invalid("polynomial is not defined over the given field".into()));
    }
    let poly = PolytopeData::from_laurent(f, DEFAULT_DIM_CAP.max(f.n_vars()))?;
    let exps = f.exponents();
    let p = base.p() as u64;
    let n = poly.dim;

    let mut all_diagonal = true;
    for facet in poly.nonorigin_facets() {
        let on: Vec<Vec<i64>> = exps.iter().filter(|e| dot(&facet.normal, e) == facet.offset).cloned().collect();
        if on.len() == n && facet.is_simplicial(n) {
            let m = column_matrix(&on);
            if !diagonal_nondegenerate(&m, p)? {
                return Ok(NonDegeneracy::Degenerate { face: on, k: 0, point: Vec::new() });
            }
        } else {
            all_diagonal = false;
        }
    }
    if all_diagonal {
        return Ok(NonDegeneracy::DiagonalCertified);
    }

    let faces: Vec<Vec<usize>> = poly.faces_avoiding_origin();
    let mut searched = 0u128;
    for k in 1..=max_k {
        let maps = field_maps_capped(base, k, DEFAULT_TABLE_CAP)?;
        let ext = maps.ext();
        let units = ext.units() as u128;
        let per_face = units.pow(n as u32);
        if searched + per_face * faces.len() as u128 > budget {
            break;
        }
        for face in &faces {
            let pts: Vec<&Vec<i64>> = face.iter().map(|&i| &poly.vertices[i]).collect();
            // terms of f lying on the face's affine span: those in the face
            let terms: Vec<(u32, &Vec<i64>)> = f
                .terms()
                .iter()
                .filter(|t| {
                    poly.facets.iter().filter(|fc| pts.iter().all(|v| dot(&fc.normal, v) == fc.offset)).all(
                        |fc| dot(&fc.normal, &t.exps) == fc.offset,
                    )
                })
                .map(|t| (maps.embed(t.coeff), &t.exps))
                .collect();
            searched += per_face;
            let mut logs = vec![0u32; n];
            loop {
                let x: Vec<u32> = logs.iter().map(|&l| ext.exp(l as u64)).collect();
                let mono: Vec<u32> = terms
                    .iter()
                    .map(|(c, e)| {
                        e.iter().zip(&x).fold(*c, |acc, (&ei, &xi)| {
                            let base = if ei < 0 { ext.inv(xi).unwrap() } else { xi };
                            ext.mul(acc, ext.pow(base, ei.unsigned_abs()))
                        })
                    })
                    .collect();
                let zero = (0..n).all(|i| {
                    terms.iter().zip(&mono).fold(0u32, |acc, ((_, e), &m)| ext.add(acc, ext.scale(e[i], m))) == 0
                });
                if zero {
                    let face_pts = pts.iter().map(|v| (*v).clone()).collect();
                    return Ok(NonDegeneracy::Degenerate { face: face_pts, k, point: x });
                }
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    logs[i] += 1;
                    if (logs[i] as u128) < units {
                        break;
                    }
                    logs[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
    Ok(NonDegeneracy::NoWitnessFound { searched_points: searched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_laurent_text;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn standard_simplex() {
        for n in 1..=4 {
            let pts: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
            let p = PolytopeData::from_points(&pts, 6).unwrap();
            let outer: Vec<&Facet> = p.nonorigin_facets().collect();
            assert_eq!(outer.len(), 1);
            assert_eq!(outer[0].functional().unwrap(), vec![r(1, 1); n]);
            assert_eq!(p.denominator, 1);
            // unimodular simplex: W(k) = C(k + n - 1, n - 1), H = (1, 0, ..., 0)
            let h = p.hodge_data(Some(4), DEFAULT_BOX_BUDGET).unwrap();
            for k in 0..=4u64 {
                assert_eq!(h.w[k as usize], binomial(k + n as u64 - 1, n as u64 - 1));
            }
            assert_eq!(h.h[0], 1);
            assert!(h.h[1..].iter().all(|&x| x == 0));
            assert_eq!(h.normalized_volume, 1);
        }
    }

    #[test]
    fn segment_denominator() {
        let p = PolytopeData::from_points(&[vec![2]], 6).unwrap();
        let f: Vec<&Facet> = p.nonorigin_facets().collect();
        assert_eq!(f[0].functional().unwrap(), vec![r(1, 2)]);
        assert_eq!(p.denominator, 2);
        assert_eq!(p.weight(&[1]), Some(r(1, 2)));
        assert_eq!(p.weight(&[-1]), None);
        let h = p.hodge_data(None, DEFAULT_BOX_BUDGET).unwrap();
        assert_eq!(h.h, vec![1, 1, 0]);
        assert_eq!(h.normalized_volume, 2);
    }

    #[test]
    fn rejects_flat_input() {
        assert_eq!(
            PolytopeData::from_points(&[vec![1, 1], vec![2, 2]], 6).unwrap_err(),
            Error::NotFullDimensional { hull: 1, dim: 2 }
        );
    }

    #[test]
    fn redundant_points_dropped() {
        let p = PolytopeData::from_points(&[vec![2, 0], vec![0, 2], vec![1, 1], vec![1, 0]], 6).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.denominator, 2);
    }

    #[test]
    fn interior_origin() {
        // the square [-1,1]^2: origin is interior, every facet has a functional
        let p = PolytopeData::from_points(&[vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]], 6).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(p.nonorigin_facets().count(), 4);
        assert_eq!(p.weight(&[3, -2]), Some(r(3, 1)));
        assert_eq!(p.normalized_volume(), 8);
        let h = p.hodge_data(None, DEFAULT_BOX_BUDGET).unwrap();
        assert_eq!(h.hodge_sum(), 8);
    }

    #[test]
    fn ik_polytope_facts() {
        for n in 1..=4 {
            let ik = ik_polytope(n).unwrap();
            assert_eq!(ik.data.vertices.len(), n + 4);
            assert_eq!(det_i64(&ik.m1), BigInt::from(-(n as i64 + 1)));
            assert_eq!(det_i64(&ik.m2), BigInt::from(n as i64 + 1));
            assert_eq!(ik.data.denominator, 1);
            for v in &ik.exponents {
                assert_eq!(ik.data.weight(v), Some(r(1, 1)));
            }
            let mut u = vec![0i64; n + 2];
            for k in 0..4 {
                u[n] = k;
                u[n + 1] = k;
                assert_eq!(ik.data.weight(&u), Some(r(k, 1)));
            }
        }
        // n = 1: the two outer facets are x_2 = 1 and x_3 = 1
        let ik = ik_polytope(1).unwrap();
        let normals: BTreeSet<(Vec<i64>, i64)> =
            ik.data.nonorigin_facets().map(|f| (f.normal.clone(), f.offset)).collect();
        assert_eq!(normals, [(vec![0, 1, 0], 1), (vec![0, 0, 1], 1)].into_iter().collect());
        assert!(ik_polytope(8).is_ok());
    }

    #[test]
    fn ik_hodge_numbers() {
        for n in 1..=3 {
            let ik = ik_polytope(n).unwrap();
            let h = ik.data.hodge_data(Some(n as u64 + 4), DEFAULT_BOX_BUDGET).unwrap();
            let mut expect = vec![1i64];
            expect.extend(std::iter::repeat_n(2, n));
            expect.push(1);
            expect.resize(n + 5, 0);
            assert_eq!(h.h, expect);
            assert_eq!(h.hodge_sum(), 2 * n as i64 + 2);
            assert_eq!(h.normalized_volume, 2 * n as u64 + 2);
        }
    }

    /// Weight counts on the simplicial cone spanned by the columns of `m`,
    /// computed independently by solving `m r = u` and summing `r`.
    fn cone_counts(m: &[Vec<i64>], k_max: i64, bound: i64) -> Vec<u64> {
        use num_rational::BigRational;
        let dim = m.len();
        let mq: Vec<Vec<BigRational>> =
            m.iter().map(|row| row.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
        let mut w = vec![0u64; k_max as usize + 1];
        let mut u = vec![-bound; dim];
        loop {
            let rhs: Vec<BigRational> = u.iter().map(|&x| BigRational::from_integer(x.into())).collect();
            let sol = crate::linalg::solve(&mq, &rhs).unwrap();
            if sol.iter().all(|x| !x.is_negative()) {
                let s: BigRational = sol.iter().sum();
                if s.is_integer() && s <= BigRational::from_integer(k_max.into()) {
                    w[i64::try_from(s.to_integer()).unwrap() as usize] += 1;
                }
            }
            let mut i = 0;
            loop {
                if i == dim {
                    return w;
                }
                u[i] += 1;
                if u[i] <= bound {
                    break;
                }
                u[i] = -bound;
                i += 1;
            }
        }
    }

    #[test]
    fn inclusion_exclusion_of_facial_cones() {
        for n in 1..=2 {
            let ik = ik_polytope(n).unwrap();
            let k_max = 3i64;
            let whole = ik.data.weight_counts(k_max as u64, DEFAULT_BOX_BUDGET).unwrap();
            let c1 = cone_counts(&ik.m1, k_max, k_max);
            let c2 = cone_counts(&ik.m2, k_max, k_max);
            // the shared cone over V_1..V_{n+1} inside its own span: points of
            // cone 1 with r_{n+2} = 0 have x_{n+1} = x_{n+2}
            let mut c3 = vec![0u64; k_max as usize + 1];
            {
                let shared = column_matrix(&ik.exponents[..n + 1]);
                // drop the last row (equal to the previous one on this cone)
                let square: Vec<Vec<i64>> = shared[..n + 1].to_vec();
                let sub = cone_counts(&square, k_max, k_max);
                c3.copy_from_slice(&sub);
            }
            for k in 0..=k_max as usize {
                assert_eq!(whole[k], c1[k] + c2[k] - c3[k], "n={n} k={k}");
            }
        }
    }

    #[test]
    fn gauge_properties() {
        let ik = ik_polytope(2).unwrap();
        let pts: Vec<Vec<i64>> = vec![vec![1, 0, 2, 2], vec![-1, -1, 2, 1], vec![0, 1, 1, 3], vec![0, 0, 0, 1]];
        for a in &pts {
            let wa = ik.data.weight(a).unwrap();
            for c in 0..4 {
                let ca: Vec<i64> = a.iter().map(|x| x * c).collect();
                assert_eq!(ik.data.weight(&ca).unwrap(), wa * Rational64::from_integer(c));
            }
            for b in &pts {
                let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                assert!(ik.data.weight(&s).unwrap() <= wa + ik.data.weight(b).unwrap());
            }
        }
    }

    #[test]
    fn nondegenerate_diagonal() {
        let id = vec![vec![1, 0], vec![0, 1]];
        assert!(diagonal_nondegenerate(&id, 2).unwrap());
        assert_eq!(diagonal_nondegenerate(&[vec![1, 2], vec![2, 4]], 3).unwrap_err(), Error::Singular);
        let ik = ik_polytope(1).unwrap();
        assert!(!diagonal_nondegenerate(&ik.m1, 2).unwrap());
        assert!(diagonal_nondegenerate(&ik.m1, 3).unwrap());
    }

    #[test]
    fn solution_group_order_and_closure() {
        for n in 1..=3 {
            let ik = ik_polytope(n).unwrap();
            for m in [&ik.m1, &ik.m2] {
                let g = solution_group(m, 101).unwrap();
                assert_eq!(g.elements.len(), n + 1);
                for a in &g.elements {
                    for b in &g.elements {
                        let s: Vec<Rational64> = a.iter().zip(b).map(|(x, y)| frac(x + y)).collect();
                        assert!(g.elements.contains(&s));
                    }
                }
            }
            let g = solution_group(&ik.m1, 101).unwrap();
            let mut unit = vec![r(1, n as i64 + 1); n + 1];
            unit.push(r(0, 1));
            assert!(g.elements.contains(&unit));
            assert_eq!(norm(&unit), r(1, 1));
        }
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        let g = solution_group(&m, 5).unwrap();
        assert_eq!(BigInt::from(g.elements.len()), det_i64(&m).abs());
        // p = 2 removes the 2-part: order 144 = 16 * 9
        let g2 = solution_group(&m, 2).unwrap();
        assert_eq!(g2.prime_to_p.len(), 9);
    }

    #[test]
    fn ordinary_examples() {
        let ik = ik_polytope(2).unwrap();
        assert!(ordinary_test(&ik.m1, 7).unwrap().1);
        assert!(!ordinary_test(&ik.m1, 5).unwrap().1);
        let f = parse_laurent_text("x1", 5, 1, None).unwrap();
        for p in [2u64, 3, 5] {
            assert!(facial_ordinary(&f, p, 6).unwrap().ordinary);
        }
    }

    #[test]
    fn facial_rejects_non_simplicial() {
        // in the plane every edge is a simplex
        let f = parse_laurent_text("x1*x2 + x1*x2^-1 + x1^-1*x2 + x1^-1*x2^-1", 5, 1, None).unwrap();
        assert!(facial_ordinary(&f, 5, 6).is_ok());
        // a square facet at x3 = 1
        let sq = parse_laurent_text("x3 + x1*x3 + x2*x3 + x1*x2*x3", 5, 1, None).unwrap();
        assert!(matches!(facial_ordinary(&sq, 5, 6), Err(Error::NonSimplicialFacet(_))));
    }

    #[test]
    fn witness_search() {
        let f3 = Arc::new(crate::gf::build_field(3, 1).unwrap());
        // x^3 has vanishing log-derivative in characteristic 3
        let f = parse_laurent_text("x1^3 + x1^-1", 3, 1, None).unwrap();
        let verdict = nondegeneracy_search(&f, &f3, 2, 1_000_000).unwrap();
        assert!(matches!(verdict, NonDegeneracy::Degenerate { .. }), "{verdict:?}");
        let ik = crate::expsum::auxiliary_laurent(&f3, 1, 1).unwrap();
        assert_eq!(nondegeneracy_search(&ik, &f3, 1, 1_000_000).unwrap(), NonDegeneracy::DiagonalCertified);
        let f2 = Arc::new(crate::gf::build_field(2, 1).unwrap());
        let ik2 = crate::expsum::auxiliary_laurent(&f2, 1, 1).unwrap();
        assert!(matches!(nondegeneracy_search(&ik2, &f2, 1, 1_000_000).unwrap(), NonDegeneracy::Degenerate { .. }));
        // a facet carrying three collinear terms is not diagonal; the face
        // polynomial x1 (1 + c x2 + x2^2) degenerates exactly when it has a
        // repeated root
        let f5 = Arc::new(crate::gf::build_field(5, 1).unwrap());
        let good = parse_laurent_text("x1 + x1*x2 + x1*x2^2", 5, 1, None).unwrap();
        assert!(matches!(
            nondegeneracy_search(&good, &f5, 2, 10_000_000).unwrap(),
            NonDegeneracy::NoWitnessFound { .. }
        ));
        let bad = parse_laurent_text("x1 + 2*x1*x2 + x1*x2^2", 5, 1, None).unwrap();
        match nondegeneracy_search(&bad, &f5, 2, 10_000_000).unwrap() {
            NonDegeneracy::Degenerate { k, point, .. } => {
                assert_eq!(k, 1);
                assert_eq!(point[1], 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let p = PolytopeData::from_json(r#"{"vertices":[[1,0],[0,1]]}"#, 6).unwrap();
        assert_eq!(p.denominator, 1);
        let h = p.hodge_data(None, DEFAULT_BOX_BUDGET).unwrap();
        let v = h.to_json();
        assert_eq!(v["H"], json!([1, 0, 0]));
        assert_eq!(v["nvol"], 1);
        assert!(h.polygon_csv().starts_with("x,y_num,y_den,y\n0,0,1,0\n"));
        assert!(matches!(PolytopeData::from_json("{\"vertices\": [1,", 6), Err(Error::Parse { .. })));
    }
}
