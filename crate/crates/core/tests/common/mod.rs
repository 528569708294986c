#![allow(dead_code)]

use nls_cascade::lambda_set::scale_set;
use nls_cascade::LambdaSet;

pub fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Loads a fixture set, rescaled by `(p, q)`.
pub fn fixture(name: &str, p: i64, q: i64) -> LambdaSet {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    let set = LambdaSet::from_json(&text).expect("fixture parses");
    if (p, q) == (1, 1) {
        set
    } else {
        scale_set(set.base(), p, q).expect("rescale")
    }
}
