//! The `adinkra` command line.
//!
//! Every subcommand writes one JSON document (or CSV, where offered) to
//! standard output or to `--output`. Failures print
//! `{"error": {"kind", "context", "message"}}` on standard error and exit
//! with 1 for invalid input and 2 for exceeded resource bounds.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use adinkra_core::adinkra::{
    check_ranking, dashing_space_summary, two_colored_cycles, validate_chromotopology, Adinkra, DashingCensus,
    DashingSpaceSummary, RankingCheck, ValidationReport,
};
use adinkra_core::codes::{analyze_code, enumerate_cosets, format_word, CodeReport};
use adinkra_core::embedding::{
    attach_faces, cartesian_product, closed_form_genus, dual_origami_graph, fibered_genus_report, fibered_product,
    triangulation_stats, DualOrigami, FiberedGenusReport, SurfaceData, TriangulationStats,
};
use adinkra_core::hyperbolic::{
    character_value, cover_length_spectrum, triangle_generators, with_powers, LengthSpectrum, SpectrumOptions,
    SpinCharacter,
};
use adinkra_core::origami::{
    graph_from_monodromy, m_origami_embeddings, monodromy, validate_origami_graph, DoubledGraph, Embedding,
    EmbeddingMode, OrigamiValidation,
};
use adinkra_core::spectral::{
    dirac_action, laplace_action_conjugacy, laplace_action_geodesic, make_test_pair, selberg_log_derivative,
    selberg_log_zeta, super_action, ActionResult, SuperVariant, TestFunction,
};
use adinkra_core::torus::{
    action_tail_bound, check_cover_condition, origami_action_with, poisson_reference, ActionFunction, CoverCondition,
    OrigamiAction, PeriodData, PoissonCheck,
};
use adinkra_core::transfer::{
    build_transfer_matrix, extend_to_coset, fredholm_det, gauss_system, BranchSystem, DetMethod, FredholmDet,
};
use adinkra_core::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::formats::{
    parse_code, read_json_file, read_period_data, read_spectrum_file, to_json, write_spectrum_csv, write_torus_csv,
    CodeDoc, CosetActionDoc, GraphDoc, OrigamiDoc,
};
use crate::parallel;

#[derive(Parser, Debug)]
#[command(name = "adinkra", version, about = "Adinkras, their Riemann surfaces and spectral actions")]
pub struct Cli {
    /// Numerical tolerance for singularity and residue checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Worker threads for parallel stages; 0 uses every CPU.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Seed for sampled stages; required whenever sampling happens.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Binary codes and their cosets.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Quotient Adinkras: build, validate, dashing census.
    #[command(subcommand)]
    Adinkra(AdinkraCmd),
    /// Riemann surface obtained by attaching faces.
    Surface(SurfaceArgs),
    /// Origamis and M-origami embeddings.
    #[command(subcommand)]
    Origami(OrigamiCmd),
    /// Cartesian and fibered products.
    #[command(subcommand)]
    Product(ProductCmd),
    /// Primitive closed geodesics of a triangle group.
    Geodesics(GeodesicsArgs),
    /// Spectral actions from the trace formula.
    #[command(subcommand)]
    Action(ActionCmd),
    /// Transfer operators and zeta functions.
    #[command(subcommand)]
    Zeta(ZetaCmd),
    /// Origami spectra on principally polarized abelian varieties.
    #[command(subcommand)]
    Torus(TorusCmd),
    /// Code → Adinkra → surface → dual origami report.
    Pipeline(GraphInput),
}

#[derive(Args, Debug, Clone)]
pub struct GraphInput {
    /// Number of colors.
    #[arg(long)]
    pub n: Option<u32>,
    /// `trivial` or comma-separated generator strings.
    #[arg(long, default_value = "trivial")]
    pub code: String,
    /// Read a graph document instead of building from a code.
    #[arg(long, conflicts_with = "n")]
    pub graph: Option<PathBuf>,
}

impl GraphInput {
    fn load(&self) -> Result<Adinkra> {
        if let Some(p) = &self.graph {
            let doc: GraphDoc = read_json_file(p)?;
            return doc.to_adinkra();
        }
        let n = self.n.ok_or_else(|| Error::invalid("cli", "either --n or --graph is required"))?;
        Adinkra::from_code(n, &parse_code(n, &self.code)?)
    }
}

#[derive(Subcommand, Debug)]
pub enum CodeCmd {
    /// Size, weight distribution and evenness.
    Analyze {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "trivial")]
        code: String,
        /// Also list the cosets.
        #[arg(long)]
        cosets: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum AdinkraCmd {
    /// Quotient Adinkra with its ranking, dashing and genus.
    Build(GraphInput),
    /// Checks the axioms, the ranking and the dashing of a graph.
    Validate(GraphInput),
    /// Counts well-dashed and Kasteleyn dashings.
    Census {
        #[command(flatten)]
        input: GraphInput,
        /// Samples to draw when the graph is too large to scan.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Cycles that must be odd-dashed: the surface faces or every 2-colored 4-cycle.
        #[arg(long, value_enum, default_value_t = FaceSet::Surface)]
        faces: FaceSet,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaceSet {
    Surface,
    Cycles,
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Also write the labeled dual graph to this file.
    #[arg(long)]
    pub emit_dual: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum OrigamiCmd {
    /// Validates an origami document and reports its genus.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
    /// The dual origami of an Adinkra surface.
    Dual(GraphInput),
    /// Counts, enumerates or samples M-origami embeddings.
    Embeddings {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, conflicts_with = "sample")]
        enumerate: Option<u64>,
        #[arg(long)]
        sample: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProductCmd {
    Cartesian(ProductArgs),
    Fibered {
        #[command(flatten)]
        factors: ProductArgs,
        #[arg(long, default_value_t = 0)]
        residue: usize,
    },
}

#[derive(Args, Debug)]
pub struct ProductArgs {
    #[arg(long)]
    pub n1: u32,
    #[arg(long, default_value = "trivial")]
    pub code1: String,
    #[arg(long)]
    pub n2: u32,
    #[arg(long, default_value = "trivial")]
    pub code2: String,
}

#[derive(Args, Debug)]
pub struct GeodesicsArgs {
    #[arg(long, default_value_t = 5)]
    pub p: u32,
    #[arg(long, default_value_t = 5)]
    pub q: u32,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long = "l-max")]
    pub l_max: f64,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_elements: usize,
    /// Lift through a coset action document.
    #[arg(long)]
    pub cover: Option<PathBuf>,
    /// Add the powers of each class up to the length bound.
    #[arg(long)]
    pub powers: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Bump,
    Coswin,
    Poly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    R,
    Lambda,
}

#[derive(Args, Debug)]
pub struct ActionArgs {
    #[arg(long, default_value_t = 2)]
    pub genus: u32,
    /// `.csv` or `.json`; an empty spectrum when omitted.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = TestKind::Bump)]
    pub test: TestKind,
    /// Per-class values `[[re, im], ...]` or generator values `{"values": {...}}`.
    #[arg(long)]
    pub chi: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VariantArg::Lambda)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
}

#[derive(Subcommand, Debug)]
pub enum ActionCmd {
    Laplace(ActionArgs),
    Dirac(ActionArgs),
    Super(ActionArgs),
}

#[derive(Subcommand, Debug)]
pub enum ZetaCmd {
    /// `det(1 − L_β)` of a transfer operator.
    Det {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta_im: f64,
        /// Branch system document; the Gauss map when omitted.
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        gauss_n_max: u32,
        /// Drop the analytic tail of the Gauss map.
        #[arg(long)]
        no_tail: bool,
        #[arg(long, default_value_t = 32)]
        nodes: usize,
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Use the trace expansion to this order instead of the exact determinant.
        #[arg(long)]
        truncate: Option<u32>,
        /// Report this many leading eigenvalues.
        #[arg(long, default_value_t = 4)]
        eigenvalues: usize,
    },
    /// `log Z(s)` and `Z′/Z(s)` from a length spectrum.
    Selberg {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s_im: f64,
        #[arg(long, default_value_t = 50)]
        k_max: u32,
        #[arg(long)]
        chi: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct TorusArgs {
    /// Period matrix document.
    #[arg(long)]
    pub omega: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub n: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m: Option<Vec<i64>>,
    #[arg(long = "box", default_value_t = 10)]
    pub bound: i64,
}

#[derive(Subcommand, Debug)]
pub enum TorusCmd {
    /// The solution set and its eigenvalues.
    Spectrum(TorusArgs),
    /// `Σ f(ρ/Λ)` over the solution set.
    Action {
        #[command(flatten)]
        args: TorusArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Gaussian width; the zero function when omitted.
        #[arg(long)]
        width: Option<f64>,
    },
    /// The ratio condition on the period vector.
    Cover(TorusArgs),
    /// Direct and Poisson-dual Gaussian sums, genus 1.
    Poisson {
        #[command(flatten)]
        args: TorusArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub kind: String,
    pub context: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: ErrorDoc,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport {
            error: ErrorDoc { kind: e.kind().into(), context: e.context().into(), message: e.message().into() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeAnalysis {
    pub code: CodeDoc,
    pub dimension: usize,
    pub report: CodeReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosets: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenusReport {
    pub genus: i64,
    pub closed_form: Option<i64>,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub graph: GraphDoc,
    pub genus: GenusReport,
    pub well_dashed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdinkraValidation {
    pub axioms: ValidationReport,
    pub ranking: RankingCheck,
    pub well_dashed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub census: DashingCensus,
    pub space: DashingSpaceSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub surface: SurfaceData,
    pub triangulation: TriangulationStats,
    pub closed_form_genus: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrigamiReport {
    pub origami: OrigamiDoc,
    pub genus: usize,
    pub canonical: OrigamiDoc,
    pub validation: OrigamiValidation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub dual: DualOrigami,
    pub origami: OrigamiDoc,
    pub genus: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingsReport {
    /// Decimal, since the count is 2^|E|.
    pub count: String,
    pub doubled: DoubledGraph,
    pub embeddings: Vec<Embedding>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianReport {
    pub graph: GraphDoc,
    pub genus: GenusReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberedReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub colors: usize,
    pub genus: FiberedGenusReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetReport {
    pub beta: Complex64,
    pub nodes: usize,
    pub size: usize,
    pub value: Complex64,
    pub log_abs: f64,
    pub spectral_radius: f64,
    pub distance_to_one: f64,
    /// Absent when an eigenvalue is exactly 1.
    pub condition: Option<f64>,
    pub singular: bool,
    pub warning: Option<String>,
    pub eigenvalues: Vec<Complex64>,
}

impl DetReport {
    fn new(beta: Complex64, nodes: usize, size: usize, d: FredholmDet, eigenvalues: Vec<Complex64>) -> Self {
        DetReport {
            beta,
            nodes,
            size,
            value: d.value,
            log_abs: d.log_abs,
            spectral_radius: d.spectral_radius,
            distance_to_one: d.distance_to_one,
            condition: d.condition.is_finite().then_some(d.condition),
            singular: d.singular,
            warning: d.warning,
            eigenvalues,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelbergReport {
    pub s: Complex64,
    pub log_zeta: Complex64,
    pub log_derivative: Complex64,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualStatus {
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origami: Option<OrigamiDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origami_genus: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n: usize,
    pub code: Option<CodeDoc>,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub genus: GenusReport,
    pub triangulation: TriangulationStats,
    /// Total area in units of π.
    pub area_over_pi: String,
    pub area: f64,
    pub dual: DualStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpectrumReport {
    pub period: PeriodData,
    pub bound: i64,
    pub entries: Vec<adinkra_core::torus::SpectrumEntry>,
}

struct Context {
    tolerance: f64,
    workers: usize,
    seed: Option<u64>,
    format: Format,
}

impl Context {
    fn pool(&self) -> Result<ThreadPool> {
        parallel::pool(self.workers)
    }

    fn json_only(&self, what: &str) -> Result<()> {
        if self.format == Format::Csv {
            return Err(Error::invalid("cli", format!("{what} has no CSV output")));
        }
        Ok(())
    }
}

fn genus_report(a: &Adinkra, surface: &SurfaceData) -> GenusReport {
    let closed_form = a.graph.code().and_then(|c| closed_form_genus(c.length(), c.dimension() as u32));
    GenusReport { genus: surface.euler_genus, closed_form, components: surface.components }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    to_json(v).map(|mut s| {
        s.push('\n');
        s
    })
}

fn run_code(ctx: &Context, cmd: CodeCmd) -> Result<String> {
    ctx.json_only("code")?;
    let CodeCmd::Analyze { n, code, cosets } = cmd;
    let c = parse_code(n, &code)?;
    let cosets = if cosets {
        Some(
            enumerate_cosets(&c)?
                .into_iter()
                .map(|k| k.members.iter().map(|&w| format_word(w, n)).collect())
                .collect(),
        )
    } else {
        None
    };
    json(&CodeAnalysis { code: CodeDoc::from_code(&c), dimension: c.dimension(), report: analyze_code(&c)?, cosets })
}

fn run_adinkra(ctx: &Context, cmd: AdinkraCmd) -> Result<String> {
    ctx.json_only("adinkra")?;
    match cmd {
        AdinkraCmd::Build(input) => {
            let a = input.load()?;
            let surface = attach_faces(&a.graph)?;
            json(&BuildReport {
                graph: GraphDoc::from_adinkra(&a),
                genus: genus_report(&a, &surface),
                well_dashed: a.is_well_dashed()?,
            })
        }
        AdinkraCmd::Validate(input) => {
            let a = input.load()?;
            let axioms = validate_chromotopology(&a.graph);
            let ranking = check_ranking(&a.graph, &a.ranking)?;
            let well_dashed = axioms.is_chromotopology() && a.is_well_dashed()?;
            json(&AdinkraValidation { axioms, ranking, well_dashed })
        }
        AdinkraCmd::Census { input, samples, faces } => {
            let a = input.load()?;
            let g = &a.graph;
            let surface = attach_faces(g)?;
            let faces = match faces {
                FaceSet::Surface => surface.faces.clone(),
                FaceSet::Cycles => two_colored_cycles(g)?,
            };
            let exhaustive = g.edge_count() <= adinkra_core::adinkra::EXHAUSTIVE_EDGE_LIMIT;
            let seed = match (exhaustive, ctx.seed) {
                (true, s) => s.unwrap_or(0),
                (false, Some(s)) => s,
                (false, None) => {
                    return Err(Error::invalid(
                        "cli",
                        format!("{} edges is too many to scan; sampling needs an explicit --seed", g.edge_count()),
                    ))
                }
            };
            let census = parallel::dashing_census(&ctx.pool()?, g, &faces, &surface.faces, seed, samples)?;
            json(&CensusReport { census, space: dashing_space_summary(g, &faces)? })
        }
    }
}

fn run_surface(ctx: &Context, args: SurfaceArgs) -> Result<String> {
    ctx.json_only("surface")?;
    let a = args.input.load()?;
    let surface = attach_faces(&a.graph)?;
    if let Some(path) = &args.emit_dual {
        let dual = dual_origami_graph(&a.graph, &surface)?;
        write_file(path, &json(&dual)?)?;
    }
    let triangulation = triangulation_stats(&surface)?;
    let closed_form_genus = genus_report(&a, &surface).closed_form;
    json(&SurfaceReport { surface, triangulation, closed_form_genus })
}

fn dual_report(a: &Adinkra, surface: &SurfaceData) -> Result<DualReport> {
    let dual = dual_origami_graph(&a.graph, surface)?;
    let m = monodromy(&dual.graph)?;
    Ok(DualReport { origami: OrigamiDoc::from_monodromy(&m), genus: m.genus(), dual })
}

fn run_origami(ctx: &Context, cmd: OrigamiCmd) -> Result<String> {
    ctx.json_only("origami")?;
    match cmd {
        OrigamiCmd::Validate { file } => {
            let doc: OrigamiDoc = read_json_file(&file)?;
            let m = doc.to_monodromy()?;
            let validation = validate_origami_graph(&graph_from_monodromy(&m));
            json(&OrigamiReport {
                origami: OrigamiDoc::from_monodromy(&m),
                genus: m.genus(),
                canonical: OrigamiDoc::from_monodromy(&m.canonical()),
                validation,
            })
        }
        OrigamiCmd::Dual(input) => {
            let a = input.load()?;
            let surface = attach_faces(&a.graph)?;
            json(&dual_report(&a, &surface)?)
        }
        OrigamiCmd::Embeddings { input, enumerate, sample } => {
            let a = input.load()?;
            let mode = match (enumerate, sample) {
                (Some(limit), _) => EmbeddingMode::Enumerate { limit },
                (None, Some(n)) => {
                    let seed =
                        ctx.seed.ok_or_else(|| Error::invalid("cli", "sampling embeddings needs an explicit --seed"))?;
                    EmbeddingMode::Sample { seed, n }
                }
                (None, None) => EmbeddingMode::Count,
            };
            let r = m_origami_embeddings(&a.graph, mode)?;
            json(&EmbeddingsReport { count: r.count.to_string(), doubled: r.doubled, embeddings: r.embeddings })
        }
    }
}

fn run_product(ctx: &Context, cmd: ProductCmd) -> Result<String> {
    ctx.json_only("product")?;
    let load = |p: &ProductArgs| -> Result<(Adinkra, Adinkra)> {
        Ok((
            Adinkra::from_code(p.n1, &parse_code(p.n1, &p.code1)?)?,
            Adinkra::from_code(p.n2, &parse_code(p.n2, &p.code2)?)?,
        ))
    };
    match cmd {
        ProductCmd::Cartesian(p) => {
            let (a1, a2) = load(&p)?;
            let a2 = Adinkra { graph: a2.graph.shift_colors(p.n1), ..a2 };
            let prod = cartesian_product(&a1, &a2)?;
            let surface = attach_faces(&prod.graph)?;
            json(&CartesianReport { graph: GraphDoc::from_adinkra(&prod), genus: genus_report(&prod, &surface) })
        }
        ProductCmd::Fibered { factors, residue } => {
            let (a1, a2) = load(&factors)?;
            let prod = fibered_product(&a1.graph, &a1.ranking, &a2.graph, &a2.ranking, residue)?;
            let genus = fibered_genus_report(&a1.graph, &a2.graph, &prod)?;
            json(&FiberedReport {
                vertex_count: prod.graph.vertex_count(),
                edge_count: prod.graph.edge_count(),
                colors: prod.graph.n(),
                genus,
            })
        }
    }
}

fn run_geodesics(ctx: &Context, args: GeodesicsArgs) -> Result<String> {
    let group = triangle_generators(args.p, args.q, args.r)?;
    let mut opts = SpectrumOptions::new(args.l_max);
    opts.max_depth = args.max_depth;
    opts.max_elements = args.max_elements;
    opts.dedupe_tol = ctx.tolerance;
    let mut spectrum = parallel::length_spectrum(&ctx.pool()?, &group, &opts)?;
    if let Some(path) = &args.cover {
        let doc: CosetActionDoc = read_json_file(path)?;
        let lifted = cover_length_spectrum(&spectrum.classes, &doc.to_action()?)?;
        spectrum.classes = lifted.into_iter().filter(|c| c.length <= args.l_max).collect();
        spectrum.class_count = spectrum.classes.iter().map(|c| c.multiplicity).sum();
        spectrum.reversible_classes = 0;
    }
    if args.powers {
        spectrum.classes = with_powers(&spectrum.classes, args.l_max);
    }
    match ctx.format {
        Format::Json => json(&spectrum),
        Format::Csv => {
            let mut buf = Vec::new();
            write_spectrum_csv(&spectrum.classes, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::invalid("csv", e.to_string()))
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ChiInput {
    PerClass(Vec<Complex64>),
    Character(SpinCharacter),
}

/// Character values per stored class; trivial when no file is given.
fn load_chi(path: Option<&Path>, spectrum: &LengthSpectrum) -> Result<Vec<Complex64>> {
    let Some(path) = path else {
        return Ok(vec![Complex64::new(1.0, 0.0); spectrum.classes.len()]);
    };
    match read_json_file::<ChiInput>(path)? {
        ChiInput::PerClass(v) => Ok(v),
        ChiInput::Character(chi) => {
            let chi = SpinCharacter::new(chi.values)?;
            spectrum
                .classes
                .iter()
                .map(|c| {
                    let first = c.words.first().ok_or_else(|| {
                        Error::invalid("cli", format!("class of length {} has no word to evaluate χ on", c.length))
                    })?;
                    let v = character_value(&chi, first, 1)?;
                    for w in &c.words[1..] {
                        if (character_value(&chi, w, 1)? - v).norm() > 1e-12 {
                            return Err(Error::invalid(
                                "cli",
                                format!("χ differs between classes grouped at length {}", c.length),
                            ));
                        }
                    }
                    Ok(v)
                })
                .collect()
        }
    }
}

fn run_action(ctx: &Context, cmd: ActionCmd) -> Result<String> {
    ctx.json_only("action")?;
    let (kind, args) = match cmd {
        ActionCmd::Laplace(a) => ("laplace", a),
        ActionCmd::Dirac(a) => ("dirac", a),
        ActionCmd::Super(a) => ("super", a),
    };
    let spectrum = match &args.spectrum {
        Some(p) => read_spectrum_file(p)?,
        None => LengthSpectrum::synthetic(Vec::new()),
    };
    let h = match args.test {
        TestKind::Bump => TestFunction::Bump,
        TestKind::Coswin => TestFunction::CosineWindow,
        TestKind::Poly => TestFunction::Polynomial,
    };
    let pair = make_test_pair(h, args.nodes)?;
    let result: ActionResult = match kind {
        "laplace" => {
            if spectrum.classes.iter().all(|c| c.primitive) {
                laplace_action_conjugacy(args.genus, &spectrum, &pair, args.lambda)?
            } else {
                laplace_action_geodesic(args.genus, &spectrum, &pair, args.lambda)?
            }
        }
        "dirac" => {
            let chi = load_chi(args.chi.as_deref(), &spectrum)?;
            dirac_action(args.genus, &spectrum, &chi, &pair, args.lambda)?
        }
        _ => {
            let chi = load_chi(args.chi.as_deref(), &spectrum)?;
            let variant = match args.variant {
                VariantArg::R => SuperVariant::RScaled,
                VariantArg::Lambda => SuperVariant::LambdaScaled,
            };
            super_action(args.genus, &spectrum, &chi, &pair, args.lambda, variant, ctx.tolerance)?
        }
    };
    json(&result)
}

fn run_zeta(ctx: &Context, cmd: ZetaCmd) -> Result<String> {
    ctx.json_only("zeta")?;
    match cmd {
        ZetaCmd::Det { beta, beta_im, system, gauss_n_max, no_tail, nodes, cover, truncate, eigenvalues } => {
            let sys: BranchSystem = match &system {
                Some(p) => read_json_file(p)?,
                None => gauss_system(gauss_n_max, !no_tail),
            };
            let beta = Complex64::new(beta, beta_im);
            let tm = match &cover {
                Some(p) => {
                    let doc: CosetActionDoc = read_json_file(p)?;
                    extend_to_coset(&sys, &doc.to_action()?, beta, nodes)?
                }
                None => build_transfer_matrix(&sys, beta, nodes)?,
            };
            let method = truncate.map_or(DetMethod::Exact, DetMethod::Truncated);
            let det = fredholm_det(&tm, method, ctx.tolerance);
            let ev: Vec<Complex64> = tm.eigenvalues().into_iter().take(eigenvalues).collect();
            json(&DetReport::new(beta, nodes, tm.size(), det, ev))
        }
        ZetaCmd::Selberg { spectrum, s, s_im, k_max, chi } => {
            let spec = read_spectrum_file(&spectrum)?;
            if let Some(c) = spec.classes.iter().find(|c| !c.primitive) {
                return Err(Error::invalid("cli", format!("expected primitive classes; length {} is a power", c.length)));
            }
            let chi = load_chi(chi.as_deref(), &spec)?;
            if chi.len() != spec.classes.len() {
                return Err(Error::invalid("cli", "missing character value for some class"));
            }
            let s = Complex64::new(s, s_im);
            if s.re <= 1.0 {
                return Err(Error::invalid("cli", format!("the Euler product needs Re(s) > 1, got {s}")));
            }
            json(&SelbergReport {
                s,
                log_zeta: selberg_log_zeta(&spec.classes, &chi, s, k_max),
                log_derivative: selberg_log_derivative(&spec.classes, &chi, s),
                classes: spec.classes.len(),
            })
        }
    }
}

fn load_period(args: &TorusArgs) -> Result<PeriodData> {
    let text = std::fs::read_to_string(&args.omega)
        .map_err(|e| Error::invalid("io", format!("{}: {e}", args.omega.display())))?;
    let pd = read_period_data(&text, args.n.clone(), args.m.clone())?;
    pd.validate()?;
    Ok(pd)
}

fn run_torus(ctx: &Context, cmd: TorusCmd) -> Result<String> {
    match cmd {
        TorusCmd::Spectrum(args) => {
            let pd = load_period(&args)?;
            let entries = parallel::solution_set(&ctx.pool()?, &pd, args.bound)?;
            match ctx.format {
                Format::Json => json(&TorusSpectrumReport { period: pd, bound: args.bound, entries }),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_torus_csv(&entries, &mut buf)?;
                    String::from_utf8(buf).map_err(|e| Error::invalid("csv", e.to_string()))
                }
            }
        }
        TorusCmd::Action { args, lambda, width } => {
            ctx.json_only("torus action")?;
            let pd = load_period(&args)?;
            let func = match width {
                Some(w) if w > 0.0 => ActionFunction::Gaussian { width: w },
                Some(w) => return Err(Error::invalid("cli", format!("width {w} must be positive"))),
                None => ActionFunction::Zero,
            };
            let entries = parallel::solution_set(&ctx.pool()?, &pd, args.bound)?;
            let partial_sum = origami_action_with(&entries, |x| func.eval(x), lambda)?;
            let tail_bound = action_tail_bound(&pd, &func, lambda, args.bound)?;
            json(&OrigamiAction { partial_sum, tail_bound, terms: entries.len(), bound: args.bound, lambda })
        }
        TorusCmd::Cover(args) => {
            ctx.json_only("torus cover")?;
            let pd = load_period(&args)?;
            let c: CoverCondition = check_cover_condition(&pd)?;
            json(&c)
        }
        TorusCmd::Poisson { args, lambda, width } => {
            ctx.json_only("torus poisson")?;
            let pd = load_period(&args)?;
            let p: PoissonCheck = poisson_reference(&pd, width, lambda, args.bound)?;
            json(&p)
        }
    }
}

fn run_pipeline(ctx: &Context, input: GraphInput) -> Result<String> {
    ctx.json_only("pipeline")?;
    let a = input.load()?;
    let surface = attach_faces(&a.graph)?;
    let triangulation = triangulation_stats(&surface)?;
    let area = triangulation.total_area();
    let area_over_pi = triangulation.total_area_over_pi.to_string();
    let dual = match dual_report(&a, &surface) {
        Ok(r) => DualStatus { accepted: true, reason: None, origami: Some(r.origami), origami_genus: Some(r.genus) },
        Err(e) if !e.is_resource() => {
            DualStatus { accepted: false, reason: Some(e.message().to_string()), origami: None, origami_genus: None }
        }
        Err(e) => return Err(e),
    };
    json(&PipelineReport {
        n: a.graph.n(),
        code: a.graph.code().map(CodeDoc::from_code),
        vertex_count: a.graph.vertex_count(),
        edge_count: a.graph.edge_count(),
        genus: genus_report(&a, &surface),
        triangulation,
        area_over_pi,
        area,
        dual,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::resource("io", format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = Error::invalid("cli", e.render().to_string().trim());
            let _ = writeln!(stderr, "{}", to_json(&ErrorReport::from(&err)).unwrap_or_default());
            return 1;
        }
    };
    match execute(cli) {
        Ok((text, None)) => {
            let _ = stdout.write_all(text.as_bytes());
            0
        }
        Ok((text, Some(path))) => match write_file(&path, &text) {
            Ok(()) => 0,
            Err(e) => report(&e, stderr),
        },
        Err(e) => report(&e, stderr),
    }
}

fn report(e: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "{}", to_json(&ErrorReport::from(e)).unwrap_or_default());
    if e.is_resource() {
        2
    } else {
        1
    }
}

/// Runs a parsed command, returning the rendered output and its destination.
pub fn execute(cli: Cli) -> Result<(String, Option<PathBuf>)> {
    if !(cli.tolerance > 0.0) || !cli.tolerance.is_finite() {
        return Err(Error::invalid("cli", format!("tolerance {} must be positive", cli.tolerance)));
    }
    let ctx = Context { tolerance: cli.tolerance, workers: cli.workers, seed: cli.seed, format: cli.format };
    let text = match cli.command {
        Command::Code(c) => run_code(&ctx, c),
        Command::Adinkra(c) => run_adinkra(&ctx, c),
        Command::Surface(c) => run_surface(&ctx, c),
        Command::Origami(c) => run_origami(&ctx, c),
        Command::Product(c) => run_product(&ctx, c),
        Command::Geodesics(c) => run_geodesics(&ctx, c),
        Command::Action(c) => run_action(&ctx, c),
        Command::Zeta(c) => run_zeta(&ctx, c),
        Command::Torus(c) => run_torus(&ctx, c),
        Command::Pipeline(c) => run_pipeline(&ctx, c),
    }?;
    Ok((text, cli.output))
}
