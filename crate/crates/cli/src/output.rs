//! Report rendering.

use serde::Serialize;

use geobundle::cotangent::{HAMILTONIAN_SIGN, OMEGA_SIGN};
use geobundle::{CheckEntry, StructureReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Run-level header values.
#[derive(Clone, Debug)]
pub struct Header {
    pub seed: u64,
    pub algebraic: f64,
    pub finite_difference: f64,
}

#[derive(Serialize)]
struct Conventions {
    omega_sign: &'static str,
    hamiltonian_sign: &'static str,
}

#[derive(Serialize)]
struct Tolerances {
    algebraic: f64,
    finite_difference: f64,
}

#[derive(Serialize)]
struct Task<'a> {
    name: &'a str,
    paper_ref: &'a str,
    verdict: &'static str,
    max_abs_residual: f64,
    max_rel_residual: f64,
    elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a str>,
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    tool_version: &'static str,
    conventions: Conventions,
    seed: u64,
    tolerances: Tolerances,
    tasks: Vec<Task<'a>>,
}

fn task(e: &CheckEntry) -> Task<'_> {
    Task {
        name: &e.name,
        paper_ref: &e.paper_ref,
        verdict: e.verdict.as_str(),
        max_abs_residual: e.max_abs_residual,
        max_rel_residual: e.max_rel_residual,
        elapsed_ms: e.elapsed_ms,
        detail: e.detail.as_deref(),
    }
}

pub fn render(report: &StructureReport, header: &Header, format: Format) -> String {
    match format {
        Format::Json => render_json(report, header),
        Format::Text => render_text(report, header),
    }
}

pub fn render_json(report: &StructureReport, header: &Header) -> String {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        conventions: Conventions { omega_sign: OMEGA_SIGN, hamiltonian_sign: HAMILTONIAN_SIGN },
        seed: header.seed,
        tolerances: Tolerances { algebraic: header.algebraic, finite_difference: header.finite_difference },
        tasks: report.entries.iter().map(task).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_text(report: &StructureReport, header: &Header) -> String {
    let mut out = format!(
        "geobundle {} (schema {SCHEMA_VERSION})\nconventions: {OMEGA_SIGN}; {HAMILTONIAN_SIGN}\nseed {}  tolerance {:e}  finite-difference {:e}\n\n",
        env!("CARGO_PKG_VERSION"),
        header.seed,
        header.algebraic,
        header.finite_difference
    );
    let width = report.entries.iter().map(|e| e.name.len()).max().unwrap_or(4).max(4);
    out.push_str(&format!("{:<width$}  {:<13}  {:>10}  {:>10}  {:>9}\n", "name", "verdict", "max_abs", "max_rel", "ms"));
    for e in &report.entries {
        out.push_str(&format!(
            "{:<width$}  {:<13}  {:>10.3e}  {:>10.3e}  {:>9.3}\n",
            e.name,
            e.verdict.as_str(),
            e.max_abs_residual,
            e.max_rel_residual,
            e.elapsed_ms
        ));
        if let Some(d) = &e.detail {
            out.push_str(&format!("{:width$}    {d}\n", ""));
        }
    }
    let pass = report.entries.iter().filter(|e| e.verdict.passes(false)).count();
    out.push_str(&format!("\n{pass}/{} passed\n", report.entries.len()));
    out
}
