//! Prints the bundled User, GEO and TMI templates in `.sant` syntax.

use sant::formats::print_model;
use sant::template::{build_geo_template, build_tmi_template, build_user_template};

fn main() {
    for t in [build_user_template(), build_geo_template(), build_tmi_template()] {
        println!("{}", print_model(&t));
    }
}
