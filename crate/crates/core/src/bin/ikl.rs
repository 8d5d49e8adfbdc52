//! `ikl`: command-line front end for the inverted Kloosterman library.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or parse error,
//! 3 refused because of a budget or table cap.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use inverted_kloosterman::cyclotomic::{reduce_mod_phi, SumValue};
use inverted_kloosterman::expsum::{gauss_sum, kloosterman_sum, toric_sum, CharacterTuple, GaussTable, Limits};
use inverted_kloosterman::gf::{build_field_capped, field_maps_capped, FieldTable};
use inverted_kloosterman::laurent::parse_laurent;
use inverted_kloosterman::lfun::{lfunction, LOptions};
use inverted_kloosterman::polytope::{
    facial_ordinary, ik_polytope, PolytopeData, DEFAULT_BOX_BUDGET, DEFAULT_DIM_CAP,
};
use inverted_kloosterman::verify::{run_suite, SuiteOptions, DEFAULT_TORIC_CAP, SUITES};
use inverted_kloosterman::Error;

#[derive(Parser)]
#[command(name = "ikl", version, about = "Inverted Kloosterman sums, their L-functions and polytopes")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Output format
    #[arg(long, value_enum, default_value_t = Out::Table, global = true)]
    out: Out,
    /// Worker threads (default: all cores); never changes any reported value
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Lift the enumeration budget and the toric cap entirely
    #[arg(long, global = true)]
    force: bool,
    /// Maximum number of points any single enumeration may visit
    #[arg(long, global = true)]
    budget: Option<u128>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Out {
    Json,
    Csv,
    Table,
}

#[derive(Args, Clone)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    a: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Field conventions: modulus and generator
    Field {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Gauss sum of a base character over F_{q^k}
    Gauss {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// character index against the fixed generator
        #[arg(long, default_value = "1")]
        chi: String,
    },
    /// Inverted Kloosterman sum S_n(chi, b) over F_{q^k}
    Sum {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        b: u32,
        /// n+1 comma-separated character indices (default: all trivial)
        #[arg(long)]
        chi: Option<String>,
    },
    /// Toric exponential sum of a Laurent polynomial
    Toric {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// polynomial as text or JSON, inline or a file path
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        chi: Option<String>,
    },
    /// Reconstruct L_n(b, T) and its Newton polygon
    Lfun {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        b: u32,
        /// predict and check power sums for 2n < k <= kmax
        #[arg(long)]
        kmax: Option<u32>,
    },
    /// Polytope facets, weights and Hodge numbers
    Polytope {
        /// polynomial (text/JSON) or {"vertices": ...}, inline or a file path
        #[arg(long, conflicts_with = "n", allow_hyphen_values = true)]
        poly: Option<String>,
        /// use the auxiliary polytope in n+2 variables
        #[arg(long)]
        n: Option<usize>,
        /// field for text polynomials; also runs the ordinariness test at p
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        a: u32,
        #[arg(long)]
        kmax: Option<u64>,
    },
    /// Run a verification suite
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1)]
        a: u32,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<u32>>,
        #[arg(long)]
        kmax: Option<u32>,
        /// record per-case runtimes (reports are then no longer reproducible)
        #[arg(long)]
        timings: bool,
    },
}

/// Outcome of a command: rendered output plus whether all its checks held.
struct Output {
    json: Value,
    rows: Vec<(String, String)>,
    csv: Option<String>,
    table: Option<String>,
    ok: bool,
}

impl Output {
    fn computed(json: Value, rows: Vec<(String, String)>) -> Self {
        Output { json, rows, csv: None, table: None, ok: true }
    }

    fn render(&self, out: Out) -> String {
        match out {
            Out::Json => serde_json::to_string_pretty(&self.json).unwrap() + "\n",
            Out::Csv => self.csv.clone().unwrap_or_else(|| {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["key", "value"]).unwrap();
                for (k, v) in &self.rows {
                    w.write_record([k, v]).unwrap();
                }
                String::from_utf8(w.into_inner().unwrap()).unwrap()
            }),
            Out::Table => self.table.clone().unwrap_or_else(|| {
                let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                self.rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
            }),
        }
    }
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn limits(g: &Global) -> Limits {
    let mut l = if g.force { Limits::unlimited() } else { Limits::default() };
    if let Some(b) = g.budget {
        l.enumeration = b;
    }
    l
}

fn field(f: &FieldArgs, l: &Limits) -> Result<Arc<FieldTable>, Error> {
    Ok(Arc::new(build_field_capped(f.p, f.a, l.table_cap)?))
}

fn modulus_text(m: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &c) in m.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && i > 0 { String::new() } else { c.to_string() };
        parts.push(match i {
            0 => coeff,
            1 => format!("{coeff}x"),
            _ => format!("{coeff}x^{i}"),
        });
    }
    parts.join(" + ")
}

fn field_json(f: &FieldTable) -> Value {
    json!({
        "p": f.p(),
        "a": f.degree(),
        "q": f.order(),
        "modulus": f.modulus(),
        "g": f.generator(),
    })
}

fn field_rows(f: &FieldTable) -> Vec<(String, String)> {
    vec![
        row("p", f.p()),
        row("a", f.degree()),
        row("q", f.order()),
        row("modulus", modulus_text(f.modulus())),
        row("g", f.generator()),
    ]
}

fn value_json(v: &SumValue) -> Value {
    let z = v.embed_complex();
    let entries: Vec<Value> = v
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != BigInt::from(0))
        .map(|(i, c)| json!([i as u32 / v.m(), i as u32 % v.m(), c.to_string()]))
        .collect();
    let mut obj = json!({
        "value": [z.re, z.im],
        "abs": z.norm(),
        "m": v.m(),
        "histogram": entries,
    });
    if v.m() == 1 {
        obj["exact"] = Value::String(reduce_mod_phi(v).unwrap().to_string());
    }
    obj
}

fn value_rows(v: &SumValue) -> Vec<(String, String)> {
    let z = v.embed_complex();
    let mut rows = vec![row("value", format!("{:.9}{:+.9}i", z.re, z.im)), row("abs", format!("{:.9}", z.norm()))];
    if v.m() == 1 {
        rows.push(row("exact", reduce_mod_phi(v).unwrap()));
    }
    rows
}

fn read_input(s: &str) -> Result<String, Error> {
    let path = std::path::Path::new(s);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{s}: {e}")))
    } else {
        Ok(s.to_string())
    }
}

fn chi_or_trivial(chi: &Option<String>, len: usize, f: &FieldTable) -> Result<CharacterTuple, Error> {
    let t = match chi {
        Some(s) => CharacterTuple::parse(s, f.units())?,
        None => CharacterTuple::trivial(len, f.units()),
    };
    if t.len() != len {
        return Err(Error::Invalid(format!("expected {len} character indices, got {}", t.len())));
    }
    Ok(t)
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let l = limits(&cli.global);
    match &cli.cmd {
        Command::Field { field: fa } => {
            let f = field(fa, &l)?;
            let mut j = field_json(&f);
            j["modulus_text"] = Value::String(modulus_text(f.modulus()));
            Ok(Output::computed(j, field_rows(&f)))
        }
        Command::Gauss { field: fa, k, chi } => {
            let f = field(fa, &l)?;
            let j = CharacterTuple::parse(chi, f.units())?;
            if j.len() != 1 {
                return Err(Error::Invalid("gauss takes a single character index".into()));
            }
            let maps = field_maps_capped(&f, *k, l.table_cap)?;
            let table = GaussTable::new(&f, *k, &l)?;
            let lifted = table.lift_index(j.indices()[0]);
            let g = gauss_sum(maps.ext(), lifted);
            let mut out = json!({ "field": field_json(&f), "k": k, "chi": j.indices()[0], "lifted_index": lifted });
            out["sum"] = value_json(&g);
            let mut rows = field_rows(&f);
            rows.extend([row("k", k), row("chi", j.indices()[0]), row("lifted_index", lifted)]);
            rows.extend(value_rows(&g));
            Ok(Output::computed(out, rows))
        }
        Command::Sum { field: fa, n, k, b, chi } => {
            let f = field(fa, &l)?;
            let chi = chi_or_trivial(chi, n + 1, &f)?;
            let s = kloosterman_sum(&f, *k, *n, *b, &chi, &l)?;
            let mut out = json!({ "field": field_json(&f), "n": n, "k": k, "b": b, "chi": chi.indices() });
            out["sum"] = value_json(&s);
            let mut rows = field_rows(&f);
            rows.extend([row("n", n), row("k", k), row("b", b), row("chi", format!("{:?}", chi.indices()))]);
            rows.extend(value_rows(&s));
            Ok(Output::computed(out, rows))
        }
        Command::Toric { field: fa, k, poly, chi } => {
            let f = field(fa, &l)?;
            let poly = parse_laurent(&read_input(poly)?, f.p(), f.degree(), None)?;
            let chi = chi_or_trivial(chi, poly.n_vars(), &f)?;
            let s = toric_sum(&f, *k, &poly, &chi, &l)?;
            let mut out = json!({ "field": field_json(&f), "k": k, "chi": chi.indices() });
            out["poly"] = serde_json::from_str(&poly.to_json()).unwrap();
            out["sum"] = value_json(&s);
            let mut rows = field_rows(&f);
            rows.extend([row("k", k), row("poly", poly.to_json()), row("chi", format!("{:?}", chi.indices()))]);
            rows.extend(value_rows(&s));
            Ok(Output::computed(out, rows))
        }
        Command::Lfun { field: fa, n, b, kmax } => {
            let f = field(fa, &l)?;
            let heldout = kmax.map(|k| (2 * *n as u32 + 1..=k).collect()).unwrap_or_default();
            let lf = lfunction(&f, *n, *b, &LOptions { heldout, limits: l })?;
            let mut out = lf.to_json();
            out["field"] = field_json(&f);
            let mut rows = field_rows(&f);
            rows.extend([
                row("n", n),
                row("b", b),
                row("P(T)", lf.p_text()),
                row("rational", lf.is_rational()),
                row(
                    "slopes",
                    lf.slope_sequence().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
                ),
                row("hodge relation", format!("{:?}", lf.relation_to_hodge())),
                row(
                    "|roots|",
                    lf.magnitudes().iter().map(|m| format!("{m:.9}")).collect::<Vec<_>>().join(" "),
                ),
            ]);
            for h in &lf.heldout {
                rows.push(row(&format!("S_{} predicted", h.k), &h.predicted));
                rows.push(row(&format!("S_{} actual", h.k), &h.actual));
            }
            let mut o = Output::computed(out, rows);
            o.ok = lf.heldout_ok();
            Ok(o)
        }
        Command::Polytope { poly, n, p, a, kmax } => {
            let (data, source) = match (poly, n) {
                (_, Some(n)) => {
                    let ik = ik_polytope(*n)?;
                    let pp = p.unwrap_or(2);
                    let f = build_field_capped(pp, 1, l.table_cap)?;
                    (ik.data, Some(inverted_kloosterman::expsum::auxiliary_laurent(&f, *n, 1)?))
                }
                (Some(s), None) => {
                    let text = read_input(s)?;
                    if text.contains("\"vertices\"") {
                        (PolytopeData::from_json(&text, DEFAULT_DIM_CAP)?, None)
                    } else {
                        let pp = p.ok_or_else(|| Error::Invalid("--p is required for a polynomial".into()))?;
                        let f = parse_laurent(&text, pp as u32, *a, None)?;
                        (PolytopeData::from_laurent(&f, DEFAULT_DIM_CAP)?, Some(f))
                    }
                }
                (None, None) => return Err(Error::Invalid("give --poly or --n".into())),
            };
            let box_budget = if cli.global.force { u128::MAX } else { cli.global.budget.unwrap_or(DEFAULT_BOX_BUDGET) };
            let hd = data.hodge_data(*kmax, box_budget)?;
            let mut out = hd.to_json();
            out["polytope"] = data.to_json();
            let mut rows = vec![
                row("dim", data.dim),
                row("vertices", format!("{:?}", data.vertices)),
                row("D", hd.d),
                row("W", format!("{:?}", hd.w)),
                row("H", format!("{:?}", hd.h)),
                row("nvol", hd.normalized_volume),
            ];
            if let (Some(pp), Some(f)) = (p, source) {
                let v = facial_ordinary(&f, *pp, DEFAULT_DIM_CAP.max(f.n_vars()))?;
                out["ordinary"] = json!({ "p": pp, "ordinary": v.ordinary, "facets": v.facets.iter().map(|(m, ok)| json!({"matrix": m, "ordinary": ok})).collect::<Vec<_>>() });
                rows.push(row("ordinary at p", format!("{} (p = {pp})", v.ordinary)));
            }
            let mut o = Output::computed(out, rows);
            o.csv = Some(hd.polygon_csv());
            Ok(o)
        }
        Command::Verify { suite, p, a, n, b, kmax, timings } => {
            let opts = SuiteOptions {
                p: p.clone(),
                a: *a,
                n: n.clone(),
                b: b.clone(),
                kmax: *kmax,
                limits: l,
                toric_cap: if cli.global.force {
                    u128::MAX
                } else {
                    cli.global.budget.map_or(DEFAULT_TORIC_CAP, |b| b.min(DEFAULT_TORIC_CAP))
                },
                timings: *timings,
            };
            let rep = run_suite(suite, &opts)?;
            Ok(Output {
                json: serde_json::to_value(&rep).unwrap(),
                rows: Vec::new(),
                csv: Some(rep.to_csv()),
                table: Some(rep.to_table()),
                ok: rep.passed(),
            })
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } | Error::TableCap { .. } => 3,
        Error::Mismatch(_) | Error::NonIntegral(_) | Error::RootFinding(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.render(cli.global.out));
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
