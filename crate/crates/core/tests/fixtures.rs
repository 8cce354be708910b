mod common;

use sant::concretize::concretize;
use sant::formats::{parse_model, print_model, AssignmentDocument};
use sant::template::{build_geo_template, build_tmi_template, build_user_template, validate_template};

use common::*;

#[test]
fn bundled_models_match_builders() {
    assert_eq!(model(USER_SANT), build_user_template());
    assert_eq!(model(GEO_SANT), build_geo_template());
    assert_eq!(model(TMI_SANT), build_tmi_template());
}

#[test]
fn bundled_models_are_clean() {
    for src in [USER_SANT, GEO_SANT, TMI_SANT] {
        let t = model(src);
        assert!(validate_template(&t).is_empty(), "{}: {:?}", t.name, validate_template(&t));
        assert_eq!(parse_model(&print_model(&t)).unwrap(), t);
    }
}

#[test]
fn bundled_assignments_instantiate() {
    for (src, asg) in [(USER_SANT, USERS_SASG), (GEO_SANT, GEO_SASG), (TMI_SANT, TMI_SASG)] {
        let t = model(src);
        let doc = AssignmentDocument::parse(asg).unwrap();
        assert!(doc.names().count() >= 2);
        for name in doc.names() {
            let inst = concretize(&t, doc.get(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(inst.warnings.is_empty(), "{name}: {:?}", inst.warnings);
        }
        assert_eq!(AssignmentDocument::parse(&doc.to_string()).unwrap(), doc);
    }
}
