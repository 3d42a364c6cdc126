//! JSON and CSV documents for the core types.
//!
//! Types that already derive serde in `adinkra-core` are written as they
//! are; graphs, codes, origamis and coset actions get document types with
//! the documented field names.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use adinkra_core::adinkra::{Adinkra, Chromotopology, Dashing, Edge, Parity, Ranking};
use adinkra_core::codes::{parse_word, BinaryCode};
use adinkra_core::hyperbolic::{CosetAction, GeodesicClass, LengthSpectrum};
use adinkra_core::origami::Monodromy;
use adinkra_core::torus::{PeriodData, SpectrumEntry};
use adinkra_core::{Error, Result};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

fn io_error(ctx: &str, e: impl std::fmt::Display) -> Error {
    Error::invalid(ctx, e.to_string())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| io_error("json", e))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| io_error("json", e))
}

pub fn read_json_file<T: DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error("io", format!("{}: {e}", path.display())))?;
    from_json(&text)
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `{"n": 4, "generators": ["1111"]}` with bit strings written
/// most-significant bit first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDoc {
    pub n: u32,
    pub generators: Vec<String>,
}

impl CodeDoc {
    pub fn from_code(code: &BinaryCode) -> Self {
        CodeDoc { n: code.length(), generators: code.generator_strings() }
    }

    pub fn to_code(&self) -> Result<BinaryCode> {
        BinaryCode::from_strings(self.n, &self.generators)
    }
}

/// Parses `trivial`, or comma-separated generator strings such as `1111,0011`.
pub fn parse_code(n: u32, spec: &str) -> Result<BinaryCode> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "trivial" {
        return BinaryCode::trivial(n);
    }
    let rows: Vec<&str> = spec.split(',').map(str::trim).collect();
    BinaryCode::from_strings(n, &rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub label: String,
    pub height: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub u: usize,
    pub v: usize,
    pub color: u32,
    pub dash: u8,
}

/// A ranked, dashed chromotopology.
///
/// Vertex labels are coset representatives written as N-bit strings when
/// the graph comes from a code, decimal integers otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub n: usize,
    pub colors: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeDoc>,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    pub bipartition: Vec<Parity>,
}

impl GraphDoc {
    pub fn from_adinkra(a: &Adinkra) -> Self {
        let g = &a.graph;
        let vertices = (0..g.vertex_count())
            .map(|v| VertexDoc { label: g.vertex_label_string(v), height: a.ranking.h[v] })
            .collect();
        let edges = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeDoc { u: e.u, v: e.v, color: e.color, dash: a.dashing.is_dashed(i) as u8 })
            .collect();
        GraphDoc {
            n: g.n(),
            colors: g.colors().to_vec(),
            code: g.code().map(CodeDoc::from_code),
            vertices,
            edges,
            bipartition: g.bipartition().to_vec(),
        }
    }

    pub fn to_adinkra(&self) -> Result<Adinkra> {
        if self.colors.len() != self.n {
            return Err(Error::invalid("graph", format!("n = {} but {} colors listed", self.n, self.colors.len())));
        }
        let code = self.code.as_ref().map(CodeDoc::to_code).transpose()?;
        let labels = self
            .vertices
            .iter()
            .map(|v| match &code {
                Some(c) => parse_word(&v.label, c.length()),
                None => v.label.parse::<u64>().map_err(|e| io_error("graph", format!("label '{}': {e}", v.label))),
            })
            .collect::<Result<Vec<u64>>>()?;
        let mut flags = Vec::with_capacity(self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.dash > 1 {
                return Err(Error::invalid("graph", format!("dash must be 0 or 1, got {}", e.dash)));
            }
            flags.push(e.dash == 1);
            edges.push(Edge { u: e.u, v: e.v, color: e.color });
        }
        let mut graph = Chromotopology::from_parts(labels, self.colors.clone(), edges, self.bipartition.clone())?;
        if let Some(c) = code {
            graph = graph.with_code(c);
        }
        let ranking = Ranking { h: self.vertices.iter().map(|v| v.height).collect() };
        Ok(Adinkra { graph, ranking, dashing: Dashing::from_flags(&flags) })
    }
}

/// `{"d": 3, "sigma_x": [...], "sigma_y": [...]}`, 1-indexed image arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrigamiDoc {
    pub d: usize,
    pub sigma_x: Vec<usize>,
    pub sigma_y: Vec<usize>,
}

impl OrigamiDoc {
    pub fn from_monodromy(m: &Monodromy) -> Self {
        let (sigma_x, sigma_y) = m.one_indexed();
        OrigamiDoc { d: m.degree(), sigma_x, sigma_y }
    }

    pub fn to_monodromy(&self) -> Result<Monodromy> {
        if self.sigma_x.len() != self.d {
            return Err(Error::invalid("origami", format!("d = {} but σ_x has {} entries", self.d, self.sigma_x.len())));
        }
        Monodromy::from_one_indexed(&self.sigma_x, &self.sigma_y)
    }
}

/// One 1-indexed permutation per generator symbol, like [`OrigamiDoc`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetActionDoc {
    pub d: usize,
    pub permutations: BTreeMap<String, Vec<usize>>,
}

impl CosetActionDoc {
    pub fn from_action(a: &CosetAction) -> Self {
        let permutations = a.images.iter().map(|(k, p)| (k.clone(), p.iter().map(|&x| x + 1).collect())).collect();
        CosetActionDoc { d: a.degree, permutations }
    }

    /// Transitivity is not required, so direct sums of actions are accepted.
    pub fn to_action(&self) -> Result<CosetAction> {
        let mut images = BTreeMap::new();
        for (k, p) in &self.permutations {
            let shifted = p
                .iter()
                .map(|&x| x.checked_sub(1).ok_or_else(|| Error::invalid("coset", "entries are 1-indexed")))
                .collect::<Result<Vec<usize>>>()?;
            images.insert(k.clone(), shifted);
        }
        CosetAction::permutations(self.d, images)
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumRow {
    length: String,
    trace: String,
    multiplicity: u64,
    word: String,
    primitive_flag: u8,
}

/// Writes `length, trace, multiplicity, word, primitive_flag`, one row per
/// stored class; several words sharing a length are joined with `;`.
pub fn write_spectrum_csv<W: Write>(classes: &[GeodesicClass], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in classes {
        w.serialize(SpectrumRow {
            length: format_float(c.length),
            trace: format_float(c.trace),
            multiplicity: c.multiplicity,
            word: c.words.join(";"),
            primitive_flag: c.primitive as u8,
        })
        .map_err(|e| io_error("csv", e))?;
    }
    w.flush().map_err(|e| io_error("csv", e))
}

/// Reads a spectrum CSV. A non-primitive row is attached to the primitive
/// row whose length divides it with the same multiplicity.
pub fn read_spectrum_csv<R: Read>(input: R) -> Result<Vec<GeodesicClass>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.deserialize::<SpectrumRow>() {
        let row = rec.map_err(|e| io_error("csv", e))?;
        let length: f64 = row.length.trim().parse().map_err(|e| io_error("csv", format!("length: {e}")))?;
        let trace: f64 = row.trace.trim().parse().map_err(|e| io_error("csv", format!("trace: {e}")))?;
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid("csv", format!("length {length} must be positive")));
        }
        if row.primitive_flag > 1 {
            return Err(Error::invalid("csv", "primitive_flag must be 0 or 1"));
        }
        let mut c = GeodesicClass::from_length(length, row.multiplicity);
        c.trace = trace;
        c.words = if row.word.is_empty() { Vec::new() } else { row.word.split(';').map(String::from).collect() };
        c.primitive = row.primitive_flag == 1;
        rows.push(c);
    }
    let primitives: Vec<(f64, u64)> = rows.iter().filter(|c| c.primitive).map(|c| (c.length, c.multiplicity)).collect();
    for c in rows.iter_mut().filter(|c| !c.primitive) {
        let base = primitives.iter().find(|&&(l, m)| {
            let k = (c.length / l).round();
            m == c.multiplicity && k >= 2.0 && (c.length - k * l).abs() <= 1e-9 * (1.0 + c.length)
        });
        match base {
            Some(&(l, _)) => c.primitive_length = l,
            None => {
                return Err(Error::invalid(
                    "csv",
                    format!("non-primitive length {} has no primitive root in the file", c.length),
                ))
            }
        }
    }
    Ok(rows)
}

/// A spectrum from a `.csv` (taken as complete) or a `.json` [`LengthSpectrum`].
pub fn read_spectrum_file(path: &std::path::Path) -> Result<LengthSpectrum> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        return read_json_file(path);
    }
    let f = std::fs::File::open(path).map_err(|e| io_error("io", format!("{}: {e}", path.display())))?;
    Ok(LengthSpectrum::synthetic(read_spectrum_csv(f)?))
}

fn join_ints(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

fn split_ints(s: &str) -> Result<Vec<i64>> {
    s.split(';').map(|t| t.trim().parse::<i64>().map_err(|e| io_error("csv", format!("'{t}': {e}")))).collect()
}

#[derive(Serialize, Deserialize)]
struct TorusRow {
    n: String,
    m: String,
    lambda: String,
    rho: String,
}

/// Writes `n, m, lambda, rho` with the integer vectors joined by `;`.
pub fn write_torus_csv<W: Write>(entries: &[SpectrumEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in entries {
        w.serialize(TorusRow {
            n: join_ints(&e.n),
            m: join_ints(&e.m),
            lambda: format_float(e.lambda),
            rho: format_float(e.rho),
        })
        .map_err(|e| io_error("csv", e))?;
    }
    w.flush().map_err(|e| io_error("csv", e))
}

/// The rows of a torus CSV as `(n′, m′, λ, ρ)`.
pub fn read_torus_csv<R: Read>(input: R) -> Result<Vec<(Vec<i64>, Vec<i64>, f64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize::<TorusRow>() {
        let row = rec.map_err(|e| io_error("csv", e))?;
        let lambda = row.lambda.trim().parse().map_err(|e| io_error("csv", format!("lambda: {e}")))?;
        let rho = row.rho.trim().parse().map_err(|e| io_error("csv", format!("rho: {e}")))?;
        out.push((split_ints(&row.n)?, split_ints(&row.m)?, lambda, rho));
    }
    Ok(out)
}

/// Period matrix input: either a full [`PeriodData`] object or a bare
/// row-major list of `[re, im]` pairs.
#[derive(Deserialize)]
#[serde(untagged)]
enum OmegaInput {
    Full(PeriodData),
    Matrix { omega: Vec<Complex64> },
    Bare(Vec<Complex64>),
}

/// Reads Ω, taking `n` and `m` from the file unless given.
pub fn read_period_data(text: &str, n: Option<Vec<i64>>, m: Option<Vec<i64>>) -> Result<PeriodData> {
    let input: OmegaInput = from_json(text)?;
    let (omega, fn_, fm) = match input {
        OmegaInput::Full(pd) => (pd.omega, Some(pd.n), Some(pd.m)),
        OmegaInput::Matrix { omega } | OmegaInput::Bare(omega) => (omega, None, None),
    };
    let n = n.or(fn_).ok_or_else(|| Error::invalid("torus", "missing n"))?;
    let m = m.or(fm).ok_or_else(|| Error::invalid("torus", "missing m"))?;
    PeriodData::new(omega, n, m)
}
