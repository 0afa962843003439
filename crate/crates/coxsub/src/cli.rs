//! Command-line front end: job files, graph export, verification sweeps and
//! the table of cycle lengths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coxeter::{CartanType, CoxeterError, CoxeterSystem, Multiplicity};
use crate::cycles::{
    certificate, check_certificate, decompose, fundamental_cycles, verify_span, CertificateEntry, CycleError, EdgeSet,
};
use crate::subexpr::{bit_string, build_all_graphs, build_graph, parse_bits, Expression, SubexprError, SubexprGraph, DEFAULT_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read or write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed job file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid job: {0}")]
    Invalid(String),
    #[error("unsupported type {0}")]
    UnsupportedType(String),
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
    #[error(transparent)]
    Subexpr(#[from] SubexprError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Target of a job: a word in the generators, or every target class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Word(Vec<String>),
    All(String),
}

impl Default for Target {
    fn default() -> Self {
        Target::All("all".into())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobOptions {
    /// Longest expression accepted.
    pub limit: Option<usize>,
    pub eps: Option<f64>,
    /// Directory for output files.
    pub out: Option<PathBuf>,
    /// Longest expression of a sweep, used when no expression is given.
    pub max_len: Option<usize>,
}

/// A job file. Without `expression` the job sweeps all expressions up to
/// `max_len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub coxeter_matrix: Vec<Vec<Multiplicity>>,
    #[serde(default)]
    pub generators: Option<Vec<String>>,
    #[serde(default)]
    pub expression: Option<Vec<String>>,
    #[serde(default)]
    pub target: Target,
    #[serde(default)]
    pub options: JobOptions,
}

impl JobSpec {
    pub fn parse(text: &str) -> Result<JobSpec, CliError> {
        let spec: JobSpec = serde_json::from_str(text)?;
        spec.labels()?;
        Ok(spec)
    }

    pub fn for_type(t: CartanType) -> JobSpec {
        JobSpec {
            coxeter_matrix: t.cox_matrix(),
            generators: None,
            expression: None,
            target: Target::default(),
            options: JobOptions::default(),
        }
    }

    /// Generator labels, `s1, s2, ...` unless given.
    pub fn labels(&self) -> Result<Vec<String>, CliError> {
        let n = self.coxeter_matrix.len();
        let labels = match &self.generators {
            Some(g) => g.clone(),
            None => (1..=n).map(|k| format!("s{k}")).collect(),
        };
        if labels.len() != n {
            return Err(CliError::Invalid(format!("{} generator labels for a rank {n} matrix", labels.len())));
        }
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(CliError::Invalid("generator labels repeat".into()));
        }
        Ok(labels)
    }

    pub fn resolve(&self, word: &[String]) -> Result<Vec<usize>, CliError> {
        let labels = self.labels()?;
        word.iter()
            .map(|name| {
                labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| CliError::Invalid(format!("unknown generator {name:?}")))
            })
            .collect()
    }

    pub fn system(&self, eps: Option<f64>) -> Result<Arc<CoxeterSystem>, CliError> {
        let mut sys = CoxeterSystem::new(self.coxeter_matrix.clone())?;
        if let Some(e) = eps.or(self.options.eps) {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::Invalid(format!("eps must be positive, got {e}")));
            }
            sys = sys.with_eps(e);
        }
        Ok(Arc::new(sys))
    }

    fn limit(&self) -> usize {
        self.options.limit.unwrap_or(DEFAULT_LIMIT)
    }
}

#[derive(Parser, Debug)]
#[command(name = "coxsub", about = "Subexpression graphs of Coxeter groups and their cycle spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Job file (JSON).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Named system instead of a job file, e.g. A3, B2, G2, ~A2.
    #[arg(long = "type")]
    pub type_name: Option<String>,
    /// Longest expression of a sweep.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Tolerance for root comparisons.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Connectivity,
    Span,
    Decompose,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write DOT files and statistics for a single expression.
    Graph {
        #[command(flatten)]
        common: Common,
    },
    /// Check connectivity, spanning or decomposition.
    Verify {
        what: Check,
        #[command(flatten)]
        common: Common,
        /// Replay a decomposition certificate instead of producing one.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Sweep a root system and compare cycle lengths with the expected row.
    Table1 {
        /// A1, An, B2, Bn, Dn, F4 or G2; the rank may be part of the name.
        type_name: String,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(passed) => {
            if passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Invalid("--jobs must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Invalid(e.to_string())),
    }
}

fn execute(cmd: Command) -> Result<bool, CliError> {
    match cmd {
        Command::Graph { common } => {
            let spec = load_spec(&common)?;
            let out = out_dir(&common, &spec);
            let report = with_jobs(common.jobs, || cmd_graph(&spec, common.eps, &out))??;
            print_json(&report)?;
            Ok(true)
        }
        Command::Verify { what, common, certificate } => {
            let spec = load_spec(&common)?;
            let report = match certificate {
                Some(path) => replay_certificate(&spec, common.eps, &path)?,
                None => with_jobs(common.jobs, || cmd_verify(&spec, what, common.eps, common.max_len))??,
            };
            if let Some(dir) = common.out.clone().or(spec.options.out.clone()) {
                write_json(&dir, "report.json", &report)?;
            }
            print_json(&report)?;
            Ok(report.passed)
        }
        Command::Table1 { type_name, rank, max_len, eps, out, jobs } => {
            let t = table_type(&type_name, rank)?;
            let cap = max_len.unwrap_or_else(|| default_cap(t));
            let report = with_jobs(jobs, || cmd_table1(t, cap, eps))??;
            if let Some(dir) = out {
                write_json(&dir, "table1.json", &report)?;
            }
            print_json(&report)?;
            Ok(report.passed)
        }
    }
}

fn load_spec(common: &Common) -> Result<JobSpec, CliError> {
    let mut spec = match (&common.spec, &common.type_name) {
        (Some(path), None) => JobSpec::parse(&fs::read_to_string(path).map_err(io_err(path))?)?,
        (None, Some(name)) => {
            JobSpec::for_type(CartanType::parse(name).ok_or_else(|| CliError::UnsupportedType(name.clone()))?)
        }
        _ => return Err(CliError::Invalid("give exactly one of --spec and --type".into())),
    };
    if common.max_len.is_some() {
        spec.options.max_len = common.max_len;
    }
    Ok(spec)
}

fn out_dir(common: &Common, spec: &JobSpec) -> PathBuf {
    common.out.clone().or(spec.options.out.clone()).unwrap_or_else(|| PathBuf::from("."))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    // a closed pipe downstream is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n").map_err(io_err(&path))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(io_err(&path))
}

/// The graphs a single-expression job asks for.
fn job_graphs(spec: &JobSpec, eps: Option<f64>) -> Result<(Arc<Expression>, Vec<SubexprGraph>), CliError> {
    let sys = spec.system(eps)?;
    let word = spec
        .expression
        .as_ref()
        .ok_or_else(|| CliError::Invalid("this command needs an expression".into()))?;
    let expr = Arc::new(Expression::new(sys.clone(), spec.resolve(word)?)?);
    let graphs = match &spec.target {
        Target::All(s) if s == "all" => build_all_graphs(&expr, spec.limit())?,
        Target::All(s) => return Err(CliError::Invalid(format!("target must be a word or \"all\", got {s:?}"))),
        Target::Word(w) => {
            let target = sys.word(&spec.resolve(w)?)?;
            let g = build_graph(&expr, &target, spec.limit())?;
            if g.vertex_count() == 0 {
                Vec::new()
            } else {
                vec![g]
            }
        }
    };
    Ok((expr, graphs))
}

/// Bit string of the minimal vertex, naming a target class.
fn class_name(g: &SubexprGraph) -> String {
    bit_string(g.vertex(0).bits())
}

/// Graphviz rendering: bit strings on vertices, rounded colors on edges.
pub fn to_dot(g: &SubexprGraph) -> String {
    let mut s = String::from("graph sub {\n");
    for (k, v) in g.vertices().iter().enumerate() {
        let _ = writeln!(s, "  n{k} [label=\"{}\"];", bit_string(v.bits()));
    }
    for e in g.edges() {
        let _ = writeln!(s, "  n{} -- n{} [label=\"{}\"];", e.u, e.v, e.color);
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphStats {
    pub class: String,
    pub file: String,
    pub vertices: usize,
    pub edges: usize,
    pub components: usize,
    pub dim: usize,
    pub lengths: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphReport {
    pub expression: Vec<String>,
    pub graphs: Vec<GraphStats>,
}

pub fn cmd_graph(spec: &JobSpec, eps: Option<f64>, out: &Path) -> Result<GraphReport, CliError> {
    let (_, graphs) = job_graphs(spec, eps)?;
    let mut stats = Vec::new();
    for (k, g) in graphs.iter().enumerate() {
        let file = format!("graph_{k}.dot");
        write_text(out, &file, &to_dot(g))?;
        let span = verify_span(g);
        stats.push(GraphStats {
            class: class_name(g),
            file,
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            components: g.components().1,
            dim: span.dim,
            lengths: span.basis_lengths,
        });
    }
    let report = GraphReport { expression: spec.expression.clone().unwrap_or_default(), graphs: stats };
    write_json(out, "stats.json", &report)?;
    Ok(report)
}

/// The first failing graph of a verification.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub expression: Vec<String>,
    pub class: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassResult {
    pub class: String,
    pub vertices: usize,
    pub edges: usize,
    pub dim: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub check: Check,
    pub passed: bool,
    pub expressions: usize,
    pub graphs: usize,
    /// Lengths of the generators used, with multiplicities.
    pub lengths: BTreeMap<usize, usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

/// Decomposition certificate for the fundamental cycles of every class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub expression: Vec<String>,
    pub graphs: Vec<GraphCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphCertificate {
    pub class: String,
    pub cycles: Vec<CycleCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCertificate {
    /// Edges of the decomposed cycle as pairs of vertex bit strings.
    pub input: Vec<[String; 2]>,
    pub entries: Vec<CertificateEntry>,
}

/// Outcome of one check on one graph.
struct Checked {
    result: ClassResult,
    lengths: BTreeMap<usize, usize>,
    detail: Option<String>,
    cycles: Vec<CycleCertificate>,
}

fn edge_names(g: &SubexprGraph, set: &EdgeSet) -> Vec<[String; 2]> {
    set.edges()
        .into_iter()
        .map(|e| {
            let e = &g.edges()[e];
            [bit_string(g.vertex(e.u).bits()), bit_string(g.vertex(e.v).bits())]
        })
        .collect()
}

fn check_graph(g: &SubexprGraph, what: Check, keep_certificate: bool) -> Checked {
    let components = g.components().1;
    let dim = g.edge_count() + components - g.vertex_count();
    let mut result = ClassResult {
        class: class_name(g),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        dim,
        passed: true,
        rank: None,
        generators: None,
    };
    let mut lengths = BTreeMap::new();
    let mut cycles = Vec::new();
    let detail = match what {
        Check::Connectivity => (components > 1).then(|| format!("{components} components")),
        Check::Span => {
            let rep = verify_span(g);
            result.rank = Some(rep.rank);
            result.generators = Some(rep.generator_count);
            lengths = rep.basis_lengths;
            (!rep.spanned).then(|| format!("rank {} below dimension {}", rep.rank, rep.dim))
        }
        Check::Decompose => {
            let mut detail = None;
            let mut used = 0;
            for cycle in fundamental_cycles(g) {
                match decompose_checked(g, &cycle) {
                    Ok(entries) => {
                        used += entries.len();
                        for e in &entries {
                            *lengths.entry(e.vertices.len()).or_insert(0) += 1;
                        }
                        if keep_certificate {
                            cycles.push(CycleCertificate { input: edge_names(g, &cycle), entries });
                        }
                    }
                    Err(why) => {
                        detail = Some(why);
                        break;
                    }
                }
            }
            result.generators = Some(used);
            detail
        }
    };
    result.passed = detail.is_none();
    Checked { result, lengths, detail, cycles }
}

/// Decomposes `cycle` and checks the sum, the support and the certificate.
pub fn decompose_checked(g: &SubexprGraph, cycle: &EdgeSet) -> Result<Vec<CertificateEntry>, String> {
    let d = decompose(g, cycle).map_err(|e| e.to_string())?;
    if let Some(why) = &d.failure {
        return Err(why.clone());
    }
    let top = cycle.edges().iter().map(|&e| g.edges()[e].v).max().unwrap_or(0);
    let mut sum = EdgeSet::new(g.edge_count());
    for c in &d.generators {
        if c.vertices.iter().any(|&v| v > top) {
            return Err(format!("a {:?} generator leaves the support below vertex {top}", c.kind));
        }
        sum.add(&c.edges);
    }
    if &sum != cycle {
        return Err("generators do not sum to the cycle".into());
    }
    let entries = certificate(g, &d.generators);
    check_certificate(g, &entries, cycle).map_err(|e| e.to_string())?;
    Ok(entries)
}

/// Every word of length `len` over `rank` letters, in lexicographic order.
pub fn words(rank: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = rank.checked_pow(len as u32).unwrap_or(usize::MAX);
    (0..total).map(move |code| word_of(rank, len, code))
}

fn word_of(rank: usize, len: usize, mut code: usize) -> Vec<usize> {
    let mut w = vec![0; len];
    for slot in w.iter_mut().rev() {
        *slot = code % rank;
        code /= rank;
    }
    w
}

/// Per-expression outcome of a sweep.
struct SweepItem {
    graphs: usize,
    lengths: BTreeMap<usize, usize>,
    failure: Option<Witness>,
}

fn sweep_expression(
    sys: &Arc<CoxeterSystem>,
    labels: &[String],
    letters: Vec<usize>,
    what: Check,
    limit: usize,
) -> Result<SweepItem, CliError> {
    let names: Vec<String> = letters.iter().map(|&s| labels[s].clone()).collect();
    let expr = Arc::new(Expression::new(sys.clone(), letters)?);
    let graphs = build_all_graphs(&expr, limit)?;
    let mut item = SweepItem { graphs: graphs.len(), lengths: BTreeMap::new(), failure: None };
    for g in &graphs {
        let checked = check_graph(g, what, false);
        for (l, n) in checked.lengths {
            *item.lengths.entry(l).or_insert(0) += n;
        }
        if let Some(detail) = checked.detail {
            item.failure = Some(Witness { expression: names, class: checked.result.class, detail });
            break;
        }
    }
    Ok(item)
}

/// Runs `what` on every expression of length at most `max_len`.
pub fn sweep(spec: &JobSpec, what: Check, eps: Option<f64>, max_len: usize) -> Result<VerifyReport, CliError> {
    let sys = spec.system(eps)?;
    let labels = spec.labels()?;
    let rank = sys.rank();
    let mut report = VerifyReport {
        check: what,
        passed: true,
        expressions: 0,
        graphs: 0,
        lengths: BTreeMap::new(),
        classes: Vec::new(),
        failure: None,
        certificate: None,
    };
    for len in 0..=max_len {
        let total = rank
            .checked_pow(len as u32)
            .ok_or_else(|| CliError::Invalid(format!("too many expressions of length {len}")))?;
        let items: Vec<SweepItem> = (0..total)
            .into_par_iter()
            .map(|code| sweep_expression(&sys, &labels, word_of(rank, len, code), what, spec.limit()))
            .collect::<Result<_, _>>()?;
        for item in items {
            report.expressions += 1;
            report.graphs += item.graphs;
            for (l, n) in item.lengths {
                *report.lengths.entry(l).or_insert(0) += n;
            }
            if report.failure.is_none() {
                report.failure = item.failure;
            }
        }
        if report.failure.is_some() {
            report.passed = false;
            break;
        }
    }
    Ok(report)
}

pub fn cmd_verify(spec: &JobSpec, what: Check, eps: Option<f64>, max_len: Option<usize>) -> Result<VerifyReport, CliError> {
    if spec.expression.is_none() {
        let cap = max_len
            .or(spec.options.max_len)
            .ok_or_else(|| CliError::Invalid("a sweep needs --max-len".into()))?;
        return sweep(spec, what, eps, cap);
    }
    let (_, graphs) = job_graphs(spec, eps)?;
    let expression = spec.expression.clone().unwrap_or_default();
    let checked: Vec<Checked> = graphs.par_iter().map(|g| check_graph(g, what, true)).collect();
    let mut report = VerifyReport {
        check: what,
        passed: true,
        expressions: 1,
        graphs: graphs.len(),
        lengths: BTreeMap::new(),
        classes: Vec::new(),
        failure: None,
        certificate: None,
    };
    let mut certs = Vec::new();
    for c in checked {
        for (l, n) in c.lengths {
            *report.lengths.entry(l).or_insert(0) += n;
        }
        if let (Some(detail), None) = (&c.detail, &report.failure) {
            report.failure = Some(Witness { expression: expression.clone(), class: c.result.class.clone(), detail: detail.clone() });
        }
        report.passed &= c.result.passed;
        certs.push(GraphCertificate { class: c.result.class.clone(), cycles: c.cycles });
        report.classes.push(c.result);
    }
    if what == Check::Decompose {
        report.certificate = Some(Certificate { expression, graphs: certs });
    }
    Ok(report)
}

fn bits_of(name: &str) -> Result<Vec<bool>, CliError> {
    parse_bits(name).ok_or_else(|| CliError::Invalid(format!("{name:?} is not a bit string")))
}

/// Checks a certificate by summation alone. Reads either a bare certificate
/// or a report containing one.
pub fn replay_certificate(spec: &JobSpec, eps: Option<f64>, path: &Path) -> Result<VerifyReport, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let cert: Certificate = serde_json::from_value(value.get("certificate").cloned().unwrap_or(value))?;
    let sys = spec.system(eps)?;
    let expr = Arc::new(Expression::new(sys, spec.resolve(&cert.expression)?)?);
    let mut report = VerifyReport {
        check: Check::Decompose,
        passed: true,
        expressions: 1,
        graphs: cert.graphs.len(),
        lengths: BTreeMap::new(),
        classes: Vec::new(),
        failure: None,
        certificate: None,
    };
    for gc in &cert.graphs {
        let bits = bits_of(&gc.class)?;
        if bits.len() != expr.len() {
            return Err(CliError::Invalid(format!("class {:?} has the wrong length", gc.class)));
        }
        let g = build_graph(&expr, &expr.target_of(&bits), spec.limit())?;
        let mut detail = None;
        for (n, cc) in gc.cycles.iter().enumerate() {
            let mut input = EdgeSet::new(g.edge_count());
            for [a, b] in &cc.input {
                let (u, v) = (g.vertex_by_bits(&bits_of(a)?), g.vertex_by_bits(&bits_of(b)?));
                match u.zip(v).and_then(|(u, v)| g.edge_between(u, v)) {
                    Some(e) => input.toggle(e),
                    None => {
                        detail = Some(format!("cycle {n} names a non-edge"));
                        break;
                    }
                }
            }
            if detail.is_none() {
                if let Err(e) = check_certificate(&g, &cc.entries, &input) {
                    detail = Some(format!("cycle {n}: {e}"));
                }
            }
            if detail.is_some() {
                break;
            }
            for e in &cc.entries {
                *report.lengths.entry(e.vertices.len()).or_insert(0) += 1;
            }
        }
        let passed = detail.is_none();
        report.classes.push(ClassResult {
            class: gc.class.clone(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            dim: g.edge_count() + g.components().1 - g.vertex_count(),
            passed,
            rank: None,
            generators: Some(gc.cycles.iter().map(|c| c.entries.len()).sum()),
        });
        if let (Some(d), None) = (detail, &report.failure) {
            report.failure = Some(Witness { expression: cert.expression.clone(), class: gc.class.clone(), detail: d });
        }
        report.passed &= passed;
    }
    Ok(report)
}

/// The expected set of cycle lengths for a crystallographic type.
pub fn table_row(t: CartanType) -> Result<BTreeSet<usize>, CliError> {
    let row: &[usize] = match t {
        CartanType::A(1) => &[3],
        CartanType::A(_) | CartanType::D(_) => &[3, 4, 5],
        CartanType::B(2) => &[3, 4, 6],
        CartanType::B(_) | CartanType::F4 => &[3, 4, 5, 6],
        CartanType::G2 => &[3, 4, 5, 8],
        CartanType::AffineA(_) => return Err(CliError::UnsupportedType(t.to_string())),
    };
    Ok(row.iter().copied().collect())
}

fn table_type(name: &str, rank: Option<usize>) -> Result<CartanType, CliError> {
    let unsupported = || CliError::UnsupportedType(name.to_string());
    let full = match (name.trim_end_matches('n'), rank) {
        (letter, Some(r)) if letter.len() == 1 => format!("{letter}{r}"),
        _ if name.ends_with('n') => return Err(unsupported()),
        _ => name.to_string(),
    };
    let t = CartanType::parse(&full).ok_or_else(unsupported)?;
    if let Some(r) = rank {
        if t.rank() != r {
            return Err(unsupported());
        }
    }
    table_row(t)?;
    Ok(t)
}

/// Sweep cap reaching every length of the row.
pub fn default_cap(t: CartanType) -> usize {
    match t {
        CartanType::G2 => 12,
        CartanType::A(1) | CartanType::A(2) | CartanType::B(2) => 10,
        _ => 7,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub system: String,
    pub max_len: usize,
    pub expected: BTreeSet<usize>,
    pub observed: BTreeSet<usize>,
    pub all_spanned: bool,
    pub passed: bool,
    pub sweep: VerifyReport,
}

pub fn cmd_table1(t: CartanType, max_len: usize, eps: Option<f64>) -> Result<TableReport, CliError> {
    let expected = table_row(t)?;
    let sweep = sweep(&JobSpec::for_type(t), Check::Span, eps, max_len)?;
    let observed: BTreeSet<usize> = sweep.lengths.keys().copied().collect();
    Ok(TableReport {
        system: t.to_string(),
        max_len,
        all_spanned: sweep.passed,
        passed: sweep.passed && observed == expected,
        expected,
        observed,
        sweep,
    })
}
