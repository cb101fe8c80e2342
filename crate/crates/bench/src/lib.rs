//! Shared fixtures for the benchmark suite: standard algebras, staircases,
//! and generator families, built once per benchmark.

use takiff::degree::DegVec;
use takiff::invariants::InvariantFamily;
use takiff::lie::LieAlgebra;
use takiff::multicurrent::{MCElement, MulticurrentAlgebra};
use takiff::rational::rat_int;
use takiff::slice::{build_slice, PrincipalSlice};
use takiff::staircase::Staircase;

pub struct Fixture {
    pub mca: MulticurrentAlgebra,
    pub slice: PrincipalSlice,
    pub dual: Vec<InvariantFamily>,
    pub primal: Vec<InvariantFamily>,
}

pub fn fixture(n: usize, mu: &[i64]) -> Fixture {
    let g = LieAlgebra::sl_n_chevalley(n).expect("n >= 2");
    let staircase = Staircase::from_box(&DegVec(mu.to_vec()));
    let slice = build_slice(&g, staircase.ell()).expect("slice for sl_n");
    let kappa = g.killing_form();
    let mut dual = Vec::new();
    let mut primal = Vec::new();
    for (idx, gen) in slice.generators.iter().enumerate() {
        dual.push(InvariantFamily::expand_seed(idx + 1, gen.clone(), &staircase).unwrap());
        let seed = takiff::invariants::seed_to_primal(gen, &kappa, staircase.ell()).unwrap();
        primal.push(InvariantFamily::expand_seed(idx + 1, seed, &staircase).unwrap());
    }
    let mca = MulticurrentAlgebra::new(g, staircase);
    Fixture {
        mca,
        slice,
        dual,
        primal,
    }
}

/// A deterministic regular element with small integer coordinates.
pub fn regular_element(fx: &Fixture) -> MCElement {
    let mut x = MCElement::zero();
    for (pos, (i, d)) in fx.mca.basis().iter().enumerate() {
        x.add_coord(*i, d.clone(), rat_int((pos as i64 % 7) - 3));
    }
    // nudge the degree-zero part until it is regular
    let mut bump = 1;
    while !fx.mca.is_regular_element(&x).unwrap() {
        x.add_coord(0, DegVec::zero(fx.mca.ell()), rat_int(bump));
        bump += 1;
        assert!(bump < 100, "could not find a regular element");
    }
    x
}
