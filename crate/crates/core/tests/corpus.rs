//! The shipped example inputs parse and agree with the built-in families.

use crystal_strata::artin_schreier::{crystal_fiber_system, geometric_count};
use crystal_strata::family::{legendre_family, rank_three_family, two_parameter_family, CrystalFamily};
use crystal_strata::wire;
use serde_json::Value;
use std::path::Path;

fn load(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn crystals() {
    let ord = wire::parse_crystal(&load("ordinary.json")).unwrap();
    assert_eq!(ord.newton_slopes().unwrap().to_string(), "{0,1}");
    let ss = wire::parse_crystal(&load("supersingular.json")).unwrap();
    assert_eq!(ss.newton_slopes().unwrap().to_string(), "{1/2,1/2}");
    assert_eq!(ss.p_rank_stable(), 0);
    let mixed = wire::parse_crystal(&load("mixed_f4.json")).unwrap();
    assert_eq!(mixed.field().deg(), 2);
    assert_eq!(mixed.newton_slopes().unwrap().to_string(), "{0,3/2,3/2}");
}

#[test]
fn families_match_the_built_in_ones() {
    let same = |file: &str, f: CrystalFamily| {
        let g = wire::parse_family(&load(file)).unwrap();
        assert_eq!(g.entries(), f.entries(), "{file}");
        assert_eq!(g.params(), f.params());
        assert_eq!(g.det_valuation(), f.det_valuation());
    };
    same("legendre.json", legendre_family(2).unwrap());
    same("two_parameter.json", two_parameter_family(2).unwrap());
    same("rank_three.json", rank_three_family(2).unwrap());
}

#[test]
fn fiber_systems_match_their_sources() {
    let sys = wire::parse_as_system(&load("as_legendre.json")).unwrap();
    assert_eq!(sys, legendre_family(2).unwrap().fiber_system().unwrap());
    let sys = wire::parse_as_system(&load("as_two_parameter.json")).unwrap();
    assert_eq!(sys, two_parameter_family(2).unwrap().fiber_system().unwrap());
    let ss = wire::parse_crystal(&load("supersingular.json")).unwrap();
    let sys = wire::parse_as_system(&load("as_supersingular.json")).unwrap();
    assert_eq!(sys, crystal_fiber_system(&ss).unwrap());
    assert_eq!(geometric_count(&sys, ss.field(), &[]).unwrap().log_p, 0);
}
