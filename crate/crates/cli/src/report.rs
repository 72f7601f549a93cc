//! Output records and their text, CSV and JSON renderings.
//!
//! Records hold only values that are fixed by the run configuration, plus
//! `runtime_ms`. Worker counts, memo settings and traversal statistics are
//! left out so equal configurations print equal bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use cavity_core::bounds::{DecayCertificate, Normalization, Regime, SurfaceTerm};
use cavity_core::interval::{ParityBracket, RoundingSlack};
use cavity_core::oracle::{Method, OracleResult, TransferResult};
use cavity_core::{Error, ModelKind, ModelSpec, Pattern};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (text, csv or json)")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TextOptions {
    pub digits: usize,
    pub exp: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub depth: u32,
    pub phi: f64,
    pub psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyRecord {
    pub model: ModelKind,
    pub d: usize,
    pub lambda: f64,
    pub pattern: Pattern,
    pub normalization: Normalization,
    pub t: u32,
    pub lower: f64,
    pub upper: f64,
    pub exp_lower: f64,
    pub exp_upper: f64,
    pub regime: Regime,
    pub certificate: DecayCertificate,
    pub rounding: Option<RoundingSlack>,
    pub parities: Vec<ParityBracket>,
    pub notes: Vec<String>,
    pub seedless: Option<Vec<SeedRecord>>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRecord {
    pub model: ModelKind,
    pub d: usize,
    pub lambda: f64,
    pub shape: Vec<f64>,
    pub t: u32,
    pub k_max: u32,
    pub lower: f64,
    pub upper: f64,
    pub tail: Option<f64>,
    pub regime: Regime,
    pub certificate: DecayCertificate,
    pub rounding: Option<RoundingSlack>,
    pub terms: Vec<SurfaceTerm>,
    pub warnings: Vec<String>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub quantity: String,
    pub model: ModelKind,
    pub lambda: f64,
    /// Inclusive coordinate range per axis.
    pub ranges: Vec<(i32, i32)>,
    pub vertex: Option<Vec<i32>>,
    pub vertices: usize,
    pub method: Method,
    pub value: f64,
    /// Exact rational, `p/q`.
    pub exact: Option<String>,
    /// Configuration counts by size, as decimal strings.
    pub counts: Option<Vec<String>>,
}

impl OracleRecord {
    pub fn from_result(
        quantity: &str,
        spec: &ModelSpec,
        ranges: Vec<(i32, i32)>,
        vertex: Option<Vec<i32>>,
        vertices: usize,
        res: OracleResult,
    ) -> Self {
        Self {
            quantity: quantity.to_string(),
            model: spec.kind,
            lambda: spec.lambda,
            ranges,
            vertex,
            vertices,
            method: res.method,
            value: res.value,
            exact: res.exact_string(),
            counts: res.counts.map(|c| c.iter().map(u128::to_string).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub model: ModelKind,
    pub d: usize,
    pub lambda: f64,
    pub result: TransferResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Report {
    FreeEnergy { records: Vec<FreeEnergyRecord> },
    SurfacePressure { records: Vec<SurfaceRecord> },
    Oracle(OracleRecord),
    Transfer(TransferRecord),
}

#[derive(Serialize)]
struct FreeEnergyRow<'a> {
    model: String,
    d: usize,
    lambda: f64,
    pattern: String,
    t: u32,
    lower: f64,
    upper: f64,
    exp_lower: f64,
    exp_upper: f64,
    regime: &'a str,
}

#[derive(Serialize)]
struct SurfaceRow {
    model: String,
    d: usize,
    lambda: f64,
    shape: String,
    t: u32,
    k_max: u32,
    lower: f64,
    upper: f64,
    tail: Option<f64>,
    regime: String,
}

#[derive(Serialize)]
struct OracleRow {
    quantity: String,
    model: String,
    lambda: f64,
    method: String,
    vertices: usize,
    value: f64,
    exact: String,
}

#[derive(Serialize)]
struct TransferRow {
    model: String,
    d: usize,
    lambda: f64,
    width: usize,
    free_energy: f64,
    spectral_radius: f64,
    surface_offset: Option<f64>,
}

pub fn render(rep: &Report, format: Format, text: &TextOptions) -> Result<String, Error> {
    match format {
        Format::Json => to_json(rep),
        Format::Csv => to_csv(rep),
        Format::Text => Ok(to_text(rep, text)),
    }
}

pub fn to_json(rep: &Report) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(rep)
        .map_err(|e| Error::InternalConsistency(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn regime_str(r: Regime) -> &'static str {
    match r {
        Regime::ProvenSsm => "proven_ssm",
        Regime::Unproven => "unproven",
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn to_csv(rep: &Report) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let res = match rep {
        Report::FreeEnergy { records } => records.iter().try_for_each(|r| {
            w.serialize(FreeEnergyRow {
                model: r.model.to_string(),
                d: r.d,
                lambda: r.lambda,
                pattern: r.pattern.to_string(),
                t: r.t,
                lower: r.lower,
                upper: r.upper,
                exp_lower: r.exp_lower,
                exp_upper: r.exp_upper,
                regime: regime_str(r.regime),
            })
        }),
        Report::SurfacePressure { records } => records.iter().try_for_each(|r| {
            w.serialize(SurfaceRow {
                model: r.model.to_string(),
                d: r.d,
                lambda: r.lambda,
                shape: join(&r.shape),
                t: r.t,
                k_max: r.k_max,
                lower: r.lower,
                upper: r.upper,
                tail: r.tail,
                regime: regime_str(r.regime).to_string(),
            })
        }),
        Report::Oracle(r) => w.serialize(OracleRow {
            quantity: r.quantity.clone(),
            model: r.model.to_string(),
            lambda: r.lambda,
            method: r.method.to_string(),
            vertices: r.vertices,
            value: r.value,
            exact: r.exact.clone().unwrap_or_default(),
        }),
        Report::Transfer(r) => w.serialize(TransferRow {
            model: r.model.to_string(),
            d: r.d,
            lambda: r.lambda,
            width: r.result.width,
            free_energy: r.result.free_energy,
            spectral_radius: r.result.spectral_radius,
            surface_offset: r.result.surface_offset,
        }),
    };
    res.map_err(|e| Error::InternalConsistency(format!("csv encoding: {e}")))?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InternalConsistency(format!("csv encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InternalConsistency(e.to_string()))
}

/// Left-aligned columns separated by two spaces.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn to_text(rep: &Report, o: &TextOptions) -> String {
    let f = |x: f64| format!("{x:.*}", o.digits);
    let mut out = String::new();
    match rep {
        Report::FreeEnergy { records } => {
            let (lo, hi) = if o.exp { ("exp_lower", "exp_upper") } else { ("lower", "upper") };
            let mut rows = vec![["model", "d", "lambda", "pattern", "t", lo, hi, "regime", "ms"]
                .map(String::from)
                .to_vec()];
            for r in records {
                let (l, u) = if o.exp { (r.exp_lower, r.exp_upper) } else { (r.lower, r.upper) };
                rows.push(vec![
                    r.model.to_string(),
                    r.d.to_string(),
                    r.lambda.to_string(),
                    r.pattern.to_string(),
                    r.t.to_string(),
                    f(l),
                    f(u),
                    regime_str(r.regime).to_string(),
                    r.runtime_ms.to_string(),
                ]);
            }
            out.push_str(&table(&rows));
            for r in records {
                for s in r.seedless.iter().flatten() {
                    let _ = writeln!(
                        out,
                        "lambda {} depth {}: phi {:.17e}  psi {:.17e}",
                        r.lambda, s.depth, s.phi, s.psi
                    );
                }
                for n in &r.notes {
                    let _ = writeln!(out, "note (lambda {}): {n}", r.lambda);
                }
            }
        }
        Report::SurfacePressure { records } => {
            for r in records {
                let _ = writeln!(
                    out,
                    "{} d={} lambda={} shape=[{}] t={} k_max={} regime={}",
                    r.model,
                    r.d,
                    r.lambda,
                    join(&r.shape),
                    r.t,
                    r.k_max,
                    regime_str(r.regime)
                );
                let mut rows = vec![["axis", "k", "lower", "upper"].map(String::from).to_vec()];
                for term in &r.terms {
                    rows.push(vec![term.axis.to_string(), term.k.to_string(), f(term.lower), f(term.upper)]);
                }
                out.push_str(&table(&rows));
                match r.tail {
                    Some(tb) => {
                        let _ = writeln!(out, "tail bound: {tb:.3e}");
                    }
                    None => out.push_str("tail bound: none (no decay guarantee)\n"),
                }
                let _ = writeln!(out, "surface pressure: [{}, {}]", f(r.lower), f(r.upper));
                for w in &r.warnings {
                    let _ = writeln!(out, "warning: {w}");
                }
            }
        }
        Report::Oracle(r) => {
            let ranges: Vec<String> = r.ranges.iter().map(|(a, b)| format!("{a}:{b}")).collect();
            let _ = writeln!(
                out,
                "{} {} lambda={} box={} vertices={} method={}",
                r.quantity,
                r.model,
                r.lambda,
                ranges.join(","),
                r.vertices,
                r.method
            );
            if let Some(v) = &r.vertex {
                let _ = writeln!(out, "vertex: {v:?}");
            }
            if let Some(e) = &r.exact {
                let _ = writeln!(out, "exact: {e}");
            }
            let _ = writeln!(out, "value: {}", f(r.value));
            if let Some(c) = &r.counts {
                let _ = writeln!(out, "counts: {}", c.join(" "));
            }
        }
        Report::Transfer(r) => {
            let _ = writeln!(
                out,
                "transfer {} d={} lambda={} width={} states={}",
                r.model, r.d, r.lambda, r.result.width, r.result.states
            );
            let _ = writeln!(out, "free energy: {}", f(r.result.free_energy));
            let _ = writeln!(out, "spectral radius: {}", f(r.result.spectral_radius));
            if let Some(s) = r.result.surface_offset {
                let _ = writeln!(out, "surface offset: {}", f(s));
            }
        }
    }
    out
}
