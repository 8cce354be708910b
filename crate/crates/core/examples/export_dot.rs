//! Writes Graphviz drawings of the TMI template and one of its instances.
//!
//! Usage: `cargo run --example export_dot -- OUT_DIR`, then for example
//! `dot -Tsvg OUT_DIR/tmi_template.dot -o tmi.svg`.

use std::path::PathBuf;

use sant::concretize::concretize;
use sant::formats::{instance_to_dot, parse_model, template_elements, template_to_dot, AssignmentDocument};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let template = parse_model(include_str!("tmi.sant")).expect("tmi.sant parses");
    let assignments = AssignmentDocument::parse(include_str!("tmi.sasg")).expect("tmi.sasg parses");
    let san = concretize(&template, assignments.get("Coupled").unwrap()).expect("instantiates").san;

    std::fs::write(dir.join("tmi_template.dot"), template_to_dot(&template))?;
    std::fs::write(dir.join("tmi_coupled.dot"), instance_to_dot(&san))?;

    println!("elements that depend on the assignment (drawn dashed):");
    for (kind, name) in template_elements(&template) {
        println!("  {kind:?} {name}");
    }
    println!("wrote {}", dir.join("tmi_template.dot").display());
    println!("wrote {}", dir.join("tmi_coupled.dot").display());
    Ok(())
}
