mod support {
    // The acceptance suite also uses the aggregate runner.
    #[allow(dead_code)]
    pub mod geometry_oracle;
}

use support::geometry_oracle::run_property;

const CASES: u32 = 256;

fn check(name: &str) {
    if let Err(e) = run_property(name, CASES) {
        panic!("{name}: {e}");
    }
}

#[test]
fn emptiness_matches_oracle() {
    check("emptiness");
}

#[test]
fn witness_satisfies_every_row() {
    check("witness");
}

#[test]
fn membership_follows_constraints() {
    check("membership");
}

#[test]
fn elimination_is_exact_projection() {
    check("elimination");
}

#[test]
fn inclusion_matches_oracle() {
    check("inclusion");
}

#[test]
fn complement_partitions_the_domain() {
    check("complement");
}

#[test]
fn simplify_preserves_semantics() {
    check("simplification");
}

#[test]
fn elapse_matches_point_sampling() {
    check("elapse");
}

#[test]
fn reset_matches_oracle() {
    check("reset");
}

#[test]
fn canonical_form_ignores_order() {
    check("canonical");
}
