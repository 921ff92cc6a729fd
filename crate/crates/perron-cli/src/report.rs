//! Report structure and its reproducible JSON rendering.
//!
//! Field order is fixed by struct declaration order and every float is
//! written with 17 significant digits, so identical inputs and flags
//! produce byte-identical files.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io::{self, Write};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub input: InputDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<Normalization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<Regularity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_limit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<Vec<f64>>,
    #[serde(rename = "A0", skip_serializing_if = "Option::is_none")]
    pub a0: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalue_check: Option<EigenvalueCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<FixtureSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSection>,
    pub timings: Option<Timings>,
}

#[derive(Serialize)]
pub struct InputDescriptor {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub dim: usize,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    pub normalize: bool,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct Normalization {
    pub applied: bool,
    pub spectral_radius: f64,
}

#[derive(Serialize)]
pub struct Regularity {
    pub per_basis_index: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_index: Option<usize>,
    pub cap: usize,
}

#[derive(Serialize)]
pub struct Certificate {
    pub p: usize,
    pub beta: f64,
    pub delta0: f64,
}

#[derive(Serialize)]
pub struct EigenvalueCheck {
    pub nullity: usize,
    pub fixed_vector_residual: f64,
    pub adjoint_residual: f64,
}

#[derive(Serialize)]
pub struct Residuals {
    pub limit: f64,
    pub idempotent: f64,
    pub commute_left: f64,
    pub commute_right: f64,
    pub power_identity: f64,
    pub fundamental_inverse: f64,
    pub fundamental_terms: u64,
}

#[derive(Serialize)]
pub struct SemigroupSection {
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub row_sum_zero: bool,
    pub commutation_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_fixed_point_residual: Option<f64>,
    pub sample_mode: String,
    pub bound_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_csv: Option<String>,
}

#[derive(Serialize)]
pub struct FixtureSection {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markov_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed_f0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leading_deviation: Option<f64>,
}

#[derive(Serialize)]
pub struct TraceSection {
    pub converged: bool,
    pub steps: usize,
    pub final_delta: f64,
    pub threshold: f64,
    pub csv: String,
}

#[derive(Serialize)]
pub struct Timings {
    pub total_ms: u64,
    pub analysis_ms: u64,
}

/// JSON formatter writing every float with 17 significant digits.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn render(report: &Report) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    report
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}
