//! File formats: the `.sant` template language, `.sasg` assignment files,
//! versioned JSON for templates and `.sanx` instances, and DOT export.

mod assign;
mod dot;
mod json;
mod model;
mod print;

pub use assign::{AssignmentDocument, AssignmentError};
pub use dot::{instance_to_dot, template_elements, template_to_dot};
pub use json::{
    instance_from_json, instance_to_json, template_from_json, template_to_json, JsonError, INSTANCE_FORMAT,
    SCHEMA_VERSION, TEMPLATE_FORMAT,
};
pub use model::{parse_model, ElementKind, ModelDocument, Span};
pub use print::{distribution, print_model};
