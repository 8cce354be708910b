//! Instantiates the User template for two different users.

use sant::concretize::concretize;
use sant::formats::{parse_model, AssignmentDocument};

fn main() {
    let template = parse_model(include_str!("user.sant")).expect("user.sant parses");
    let assignments = AssignmentDocument::parse(include_str!("users.sasg")).expect("users.sasg parses");

    for name in assignments.names() {
        let xi = assignments.get(name).unwrap();
        let inst = concretize(&template, xi).expect("assignment instantiates");
        let san = &inst.san;
        println!("{name}: {}", san.summary());
        let places: Vec<&str> = san.places.iter().map(|p| p.name.as_str()).collect();
        println!("  places: {}", places.join(", "));
        for a in &san.activities {
            let probs: Vec<String> = a.case_probs.iter().map(|p| format!("{p:.2}")).collect();
            println!("  {} ({} case(s)): [{}]", a.name, a.cases, probs.join(", "));
        }
        for g in &san.output_gates {
            println!("  output gate {} -> case {} of {}", g.name, g.case, san.activities[g.activity].name);
        }
    }
}
