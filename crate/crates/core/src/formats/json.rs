//! Versioned JSON envelopes for templates and concrete instances (`.sanx`).

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::san::ConcreteSan;
use crate::template::SanTemplate;

pub const SCHEMA_VERSION: u32 = 1;
pub const TEMPLATE_FORMAT: &str = "sant-template";
pub const INSTANCE_FORMAT: &str = "sant-instance";

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("expected a `{expected}` document, found `{found}`")]
    WrongFormat { expected: &'static str, found: String },
    #[error("unsupported schema version {0} (this build reads version {SCHEMA_VERSION})")]
    Version(u32),
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct TemplateDoc {
    format: String,
    version: u32,
    template: SanTemplate,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    format: String,
    version: u32,
    san: ConcreteSan,
    #[serde(default)]
    warnings: Vec<Diagnostic>,
}

fn check_header(text: &str, expected: &'static str) -> Result<(), JsonError> {
    let h: Header = serde_json::from_str(text)?;
    if h.format != expected {
        return Err(JsonError::WrongFormat { expected, found: h.format });
    }
    if h.version != SCHEMA_VERSION {
        return Err(JsonError::Version(h.version));
    }
    Ok(())
}

pub fn template_to_json(t: &SanTemplate) -> String {
    let doc = TemplateDoc { format: TEMPLATE_FORMAT.into(), version: SCHEMA_VERSION, template: t.clone() };
    serde_json::to_string_pretty(&doc).expect("templates serialize")
}

pub fn template_from_json(text: &str) -> Result<SanTemplate, JsonError> {
    check_header(text, TEMPLATE_FORMAT)?;
    Ok(serde_json::from_str::<TemplateDoc>(text)?.template)
}

pub fn instance_to_json(san: &ConcreteSan, warnings: &[Diagnostic]) -> String {
    let doc = InstanceDoc {
        format: INSTANCE_FORMAT.into(),
        version: SCHEMA_VERSION,
        san: san.clone(),
        warnings: warnings.to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("instances serialize")
}

pub fn instance_from_json(text: &str) -> Result<(ConcreteSan, Vec<Diagnostic>), JsonError> {
    check_header(text, INSTANCE_FORMAT)?;
    let doc: InstanceDoc = serde_json::from_str(text)?;
    Ok((doc.san, doc.warnings))
}
