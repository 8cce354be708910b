//! Checks that firing in the template and firing in the instance agree.
//!
//! Every reachable marking of a TMI instance is lifted to a template
//! marking, fired there, projected back and compared with the concrete
//! firing.

use std::collections::{HashSet, VecDeque};

use sant::concretize::{concretize, fire_template, index_map, lift_marking, project_marking};
use sant::formats::{parse_model, AssignmentDocument};

fn main() {
    let template = parse_model(include_str!("tmi.sant")).expect("tmi.sant parses");
    let assignments = AssignmentDocument::parse(include_str!("tmi.sasg")).expect("tmi.sasg parses");

    for name in assignments.names() {
        let xi = assignments.get(name).unwrap();
        let san = concretize(&template, xi).expect("instantiates").san;
        let map = index_map(&template, xi).unwrap();

        let mut seen = HashSet::from([san.initial_marking.clone()]);
        let mut queue = VecDeque::from([san.initial_marking.clone()]);
        let mut firings = 0;
        while let Some(m) = queue.pop_front() {
            let mu = lift_marking(&m, &map);
            for a in san.enabled(&m) {
                let activity = &san.activities[a];
                for case in san.possible_cases(a) {
                    let concrete = san.fire(&m, a, case).unwrap();
                    let lifted = fire_template(&template, xi, &mu, &activity.name, case).unwrap();
                    assert_eq!(project_marking(&lifted, &map, xi).unwrap(), concrete);
                    firings += 1;
                    if seen.insert(concrete.clone()) {
                        queue.push_back(concrete);
                    }
                }
            }
        }
        println!("{name}: {} reachable markings, {firings} firings agree", seen.len());
    }
}
