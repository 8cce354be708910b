//! Diagnostics reported by the template and SAN validators.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticKind {
    SortMismatch,
    UnknownParameter,
    DuplicateName,
    DanglingGate,
    UnknownPlace,
    PlaceOutsideGate,
    PlaceholderMisuse,
    DistributionMismatch,
    MissingInitialMarking,
    UnsupportedReactivation,
    NormalizationError,
    CaseOutOfRange,
    InvalidCaseCount,
    InvalidDistribution,
    IndexOutsideDomain,
    NonStabilizing,
    EvalError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    /// Name of the offending model element (place, activity, gate...).
    pub element: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, element: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, kind, element: element.into(), message: message.into() }
    }

    pub fn warning(kind: DiagnosticKind, element: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, kind, element: element.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{:?}] {}: {}", self.kind, self.element, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
