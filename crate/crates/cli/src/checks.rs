//! The verification checks orchestrated by `verify`, each one pinned to a
//! mathematical claim and producing a deterministic result.

use crate::config::Job;
use crate::report::CheckResult;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use takiff::degree::DegVec;
use takiff::invariants::{
    check_double_expansion, check_independence, check_invariance, positive_degree_support,
    IndependenceOptions,
};
use takiff::multicurrent::{is_nondegenerate, MCElement, MCForm};
use takiff::poly::{Polynomial, VarId};
use takiff::rational::{rat_int, Rational};
use takiff::slice::TruncatedSlice;

pub const CHECK_NAMES: [&str; 10] = [
    "invariance",
    "independence",
    "index",
    "forms",
    "double-expansion",
    "support",
    "positive-degree",
    "slice-restriction",
    "slice-derivative",
    "orbit-reduction",
];

/// Runs one named check.  Unknown names are caught at config time.
pub fn run_check(name: &str, job: &Job, exact_rank: bool) -> CheckResult {
    match name {
        "invariance" => check_invariance_families(job),
        "independence" => check_independence_families(job, exact_rank),
        "index" => check_index(job),
        "forms" => check_forms(job),
        "double-expansion" => check_double(job),
        "support" => check_support(job),
        "positive-degree" => check_positive_degree(job),
        "slice-restriction" => check_slice_restriction(job),
        "slice-derivative" => check_slice_derivative(job),
        "orbit-reduction" => check_orbit_reduction(job),
        _ => unreachable!("check names are validated at config time"),
    }
}

fn check_invariance_families(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "invariance",
        "expanded generator components at admissible degrees are annihilated exactly by every adjoint derivation",
    );
    if job.dual_families.is_empty() {
        return res.skipped("no built-in invariant generators for this algebra");
    }
    let has_mu = job.staircase.greatest_element().is_some();
    let mut components = 0i64;
    let mut derivations = 0i64;
    let mut extra = 0i64;
    let mut artifacts = Vec::new();
    let families: Vec<_> = if has_mu {
        job.dual_families
            .iter()
            .chain(job.primal_families.iter())
            .collect()
    } else {
        // without a greatest element only the primal claim is available
        job.primal_families.iter().collect()
    };
    for fam in families {
        match check_invariance(fam, &job.mca) {
            Ok(report) => {
                components += report.admissible_verified.len() as i64;
                derivations += report.derivations_applied as i64;
                extra += report.extra_invariant.len() as i64;
            }
            Err(e) => return res.failed(e.to_string()),
        }
        artifacts.push(fam.to_json(&job.staircase));
    }
    res.count("admissible_components", components);
    res.count("derivation_applications", derivations);
    res.count("extra_invariant_components", extra);
    res.artifacts = Some(serde_json::json!({ "families": artifacts }));
    res
}

fn check_independence_families(job: &Job, exact_rank: bool) -> CheckResult {
    let mut res = CheckResult::new(
        "independence",
        "the generator components are algebraically independent: the Jacobian has full exact rank, and a duplicated family is detected as dependent",
    );
    if job.dual_families.is_empty() {
        return res.skipped("no built-in invariant generators for this algebra");
    }
    if job.staircase.greatest_element().is_none() {
        return res.skipped("independence is only claimed when a greatest element exists");
    }
    let expected: usize = job.dual_families.len() * job.staircase.len();
    let opts = IndependenceOptions {
        seed: job.seed,
        exact: exact_rank,
        ..Default::default()
    };
    let report = match check_independence(&job.dual_families, &job.mca, &opts) {
        Ok(r) => r,
        Err(e) => return res.failed(e.to_string()),
    };
    res.count("rank", report.rank as i64);
    res.count("expected", expected as i64);
    res.count("attempts", report.attempts as i64);
    res.count("exact_mode", report.exact_mode as i64);
    if !report.independent || report.rank != expected {
        return res.failed(format!("rank {} but expected {expected}", report.rank));
    }

    // negative control: duplicating a family must be reported dependent
    let mut duplicated = job.dual_families.clone();
    duplicated.push(job.dual_families[0].clone());
    let control_opts = IndependenceOptions {
        seed: job.seed,
        exact: false,
        ..Default::default()
    };
    match check_independence(&duplicated, &job.mca, &control_opts) {
        Ok(control) => {
            res.count("control_rank", control.rank as i64);
            if control.independent {
                return res.failed("duplicated family was not detected as dependent");
            }
        }
        Err(e) => return res.failed(e.to_string()),
    }
    res
}

fn check_index(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "index",
        "the sampled index of the truncated algebra equals the base index times the algebra dimension, and a form is regular iff its top component is a regular form on the base",
    );
    let sampled = job.mca.index_sampled(takiff::lie::INDEX_SAMPLES, job.seed);
    res.count("sampled_index", sampled as i64);
    let Some(mu) = job.staircase.greatest_element() else {
        return res.skipped("index product formula needs a greatest element");
    };
    let expected = job.mca.expected_index();
    res.count("expected_index", expected as i64);
    if sampled != expected {
        return res.failed(format!("sampled index {sampled}, expected {expected}"));
    }

    // regular-form panel: random forms plus forms with the top component
    // zeroed, which are never regular
    let dim = job.lie.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed.wrapping_add(1));
    let mut regular = 0i64;
    let mut irregular = 0i64;
    for i in 0..20 {
        let mut f = MCForm::zero();
        for (b, d) in job.mca.basis() {
            f.add_coord(*b, d.clone(), rat_int(rng.gen_range(-10_000..=10_000)));
        }
        if i >= 12 {
            // zero out the top component
            let top = f.degree_part(dim, &mu);
            let mut neg = MCForm::zero();
            neg.insert_degree_part(&mu, &top.iter().map(|v| -v.clone()).collect::<Vec<_>>());
            f = f.add(&neg);
        }
        let full_regular = job.mca.form_stabilizer_dim(&f) == expected;
        let top_regular =
            job.lie.form_stabilizer_dim(&f.degree_part(dim, &mu)) == job.mca.base_index();
        if full_regular != top_regular {
            return res.failed(format!(
                "form {i} is a counterexample to the top-component criterion"
            ));
        }
        if full_regular {
            regular += 1;
        } else {
            irregular += 1;
        }
    }
    res.count("panel_regular", regular);
    res.count("panel_irregular", irregular);
    // irregular forms exist at all only when the index is below the
    // dimension; the zero form is then already irregular
    let irregular_forms_exist = job.mca.base_index() < dim;
    if regular == 0 || (irregular_forms_exist && irregular == 0) {
        return res.failed("panel did not exercise both branches of the criterion");
    }
    res
}

fn check_forms(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "forms",
        "graded forms are symmetric and invariant inside the staircase; the top form is nondegenerate iff the base form is; the degree-zero form is degenerate iff the algebra is larger than the base field",
    );
    let kappa = job.lie.killing_form();
    if !kappa.is_symmetric() {
        return res.failed("base form is not symmetric");
    }
    // symmetry for every degree in the pairing support Ω₁ + Ω₁
    let support = job
        .staircase
        .degrees()
        .minkowski_pow(2, job.staircase.ell());
    let mut symmetric = 0i64;
    for omega in support.iter() {
        if !job.mca.kappa_omega(&kappa, omega).is_symmetric() {
            return res.failed(format!("graded form at {omega} is not symmetric"));
        }
        symmetric += 1;
    }
    res.count("symmetric_degrees", symmetric);

    // invariance on random triples for degrees inside the staircase
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed.wrapping_add(2));
    let rand_el = |rng: &mut ChaCha8Rng| {
        let mut e = MCElement::zero();
        for (i, d) in job.mca.basis() {
            e.add_coord(*i, d.clone(), rat_int(rng.gen_range(-9..=9)));
        }
        e
    };
    let mut invariance_checks = 0i64;
    for omega in job.staircase.iter() {
        for _ in 0..5 {
            let (x, y, z) = (rand_el(&mut rng), rand_el(&mut rng), rand_el(&mut rng));
            let lhs = job
                .mca
                .kappa_omega_pairing(&kappa, omega, &job.mca.bracket(&x, &y), &z);
            let rhs = job
                .mca
                .kappa_omega_pairing(&kappa, omega, &x, &job.mca.bracket(&y, &z));
            if lhs != rhs {
                return res.failed(format!("graded form at {omega} is not invariant"));
            }
            invariance_checks += 1;
        }
    }
    res.count("invariance_triples", invariance_checks);

    let base_nondegenerate = is_nondegenerate(&kappa);
    res.count("base_nondegenerate", base_nondegenerate as i64);
    if let Some(mu) = job.staircase.greatest_element() {
        let top = job.mca.kappa_omega(&kappa, &mu);
        if is_nondegenerate(&top) != base_nondegenerate {
            return res.failed("top form nondegeneracy disagrees with the base form");
        }
        let zero_form = job
            .mca
            .kappa_omega(&kappa, &DegVec::zero(job.staircase.ell()));
        let zero_nondegenerate = is_nondegenerate(&zero_form);
        let expected_zero = job.staircase.len() == 1 && base_nondegenerate;
        if zero_nondegenerate != expected_zero {
            return res.failed("degree-zero form degeneracy is wrong");
        }
    }
    res
}

fn check_double(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "double-expansion",
        "expanding over the leading coordinates and then the last one agrees with the one-shot expansion, component by component",
    );
    if job.staircase.ell() < 2 {
        return res.skipped("needs at least two staircase coordinates");
    }
    if job.staircase.greatest_element().is_none() {
        return res.skipped("needs a greatest element");
    }
    let mut seeds: Vec<Polynomial> = Vec::new();
    for fam in job.dual_families.iter().chain(job.primal_families.iter()) {
        seeds.push(fam.seed.clone());
    }
    if seeds.is_empty() {
        // a generic quadratic exercises the identity for custom algebras
        let sum = (0..job.lie.dim())
            .map(|i| Polynomial::variable(VarId::primal(i, DegVec::zero(job.staircase.ell()))))
            .fold(Polynomial::zero(), |acc, v| &acc + &v);
        seeds.push(sum.pow(2));
    }
    for (i, seed) in seeds.iter().enumerate() {
        if let Err(e) = check_double_expansion(seed, &job.staircase) {
            return res.failed(format!("seed {i}: {e}"));
        }
    }
    res.count("seeds", seeds.len() as i64);
    res
}

fn check_support(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "support",
        "expanded components vanish outside the k-fold staircase sumset, and over a box the admissible degrees are the reflected staircase",
    );
    if job.dual_families.is_empty() {
        return res.skipped("no built-in invariant generators for this algebra");
    }
    let ell = job.staircase.ell();
    let mut components = 0i64;
    for fam in job.dual_families.iter().chain(job.primal_families.iter()) {
        let sumset = job.staircase.degrees().minkowski_pow(fam.k, ell);
        for gamma in fam.components.keys() {
            if !sumset.contains(gamma) {
                return res.failed(format!(
                    "family {} has a component at {gamma} outside the sumset",
                    fam.j
                ));
            }
            components += 1;
        }
        if let Some(mu) = job.staircase.greatest_element() {
            let admissible = job.staircase.admissible_gammas(fam.k);
            let reflected = job.staircase.degrees().sub_from(&mu.scale(fam.k as i64));
            if admissible != reflected {
                return res.failed(format!(
                    "admissible degrees differ from the reflected staircase at degree {}",
                    fam.k
                ));
            }
        }
    }
    res.count("components", components);
    res
}

fn check_positive_degree(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "positive-degree",
        "every admissible component of every generator has strictly positive degree and every monomial contains a positive-degree variable",
    );
    if job.primal_families.is_empty() {
        return res.skipped("no built-in invariant generators for this algebra");
    }
    match job.staircase.greatest_element() {
        None => return res.skipped("needs a greatest element"),
        Some(mu) if !mu.is_positive() => {
            return res.skipped("the algebra is the base field (greatest element is zero)")
        }
        Some(_) => {}
    }
    match positive_degree_support(&job.primal_families, &job.staircase) {
        Ok(()) => {
            let total: usize = job
                .primal_families
                .iter()
                .map(|f| f.generator_components(&job.staircase).len())
                .sum();
            res.count("components", total as i64);
            res
        }
        Err(e) => res.failed(e.to_string()),
    }
}

fn check_slice_restriction(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "slice-restriction",
        "restriction to the slice sends each generator component to its coordinate function",
    );
    let Some(slice) = &job.slice else {
        return res.skipped("slice is only built for the special linear algebras");
    };
    if job.staircase.greatest_element().is_none() {
        return res.skipped("no greatest element");
    }
    let ts = TruncatedSlice::new(slice, &job.mca);
    let mut identities = 0i64;
    for (idx, fam) in job.dual_families.iter().enumerate() {
        for omega in job.staircase.iter() {
            let Some(component) = fam.components.get(omega) else {
                return res.failed(format!("family {} has no component at {omega}", idx + 1));
            };
            match ts.restrict(component) {
                Ok(r) => {
                    let expected = Polynomial::variable(ts.epsilon_var(idx + 1, omega));
                    if r != expected {
                        return res.failed(format!(
                            "restriction of generator {} at {omega} is not the coordinate",
                            idx + 1
                        ));
                    }
                    identities += 1;
                }
                Err(e) => return res.failed(e.to_string()),
            }
        }
    }
    res.count("identities", identities);
    res
}

fn check_slice_derivative(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "slice-derivative",
        "directional derivatives of generator components against the centralizer basis form the identity pattern at every slice point",
    );
    let Some(slice) = &job.slice else {
        return res.skipped("slice is only built for the special linear algebras");
    };
    if job.staircase.greatest_element().is_none() {
        return res.skipped("no greatest element");
    }
    let ts = TruncatedSlice::new(slice, &job.mca);
    let r = ts.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed.wrapping_add(3));
    let mut pairs = 0i64;
    for _ in 0..3 {
        let mut eps = BTreeMap::new();
        for i in 1..=r {
            for omega in job.staircase.iter() {
                eps.insert((i, omega.clone()), rat_int(rng.gen_range(-9..=9)));
            }
        }
        let x = ts.point_from_epsilon(&eps);
        for j in 1..=r {
            for omega in job.staircase.iter() {
                for i in 1..=r {
                    for lambda in job.staircase.iter() {
                        let got = match ts.derivative_pairing(
                            &job.dual_families,
                            j,
                            omega,
                            i,
                            lambda,
                            &x,
                        ) {
                            Ok(v) => v,
                            Err(e) => return res.failed(e.to_string()),
                        };
                        let expected = if i == j && lambda == omega {
                            Rational::from_integer(1.into())
                        } else {
                            Rational::from_integer(0.into())
                        };
                        if got != expected {
                            return res.failed(format!(
                                "derivative of generator {j} at {omega} against ({i}, {lambda}) is {got}"
                            ));
                        }
                        pairs += 1;
                    }
                }
            }
        }
    }
    res.count("pairings", pairs);
    res.count("points", 3);
    res
}

fn check_orbit_reduction(job: &Job) -> CheckResult {
    let mut res = CheckResult::new(
        "orbit-reduction",
        "every regular element is conjugated onto the slice within the step bound; the slice coordinates equal the invariant values, the intersection is transversal, and replaying the log reproduces the output",
    );
    let Some(slice) = &job.slice else {
        return res.skipped("slice is only built for the special linear algebras");
    };
    if job.staircase.greatest_element().is_none() {
        return res.skipped("no greatest element");
    }
    let ts = TruncatedSlice::new(slice, &job.mca);
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed.wrapping_add(4));
    let step_bound = 1 + (job.staircase.len() - 1);
    let mut reduced = 0i64;
    let mut max_steps = 0i64;
    let mut first_log = None;
    let mut attempts = 0;
    while reduced < 10 && attempts < 1000 {
        attempts += 1;
        let mut x = MCElement::zero();
        for (i, d) in job.mca.basis() {
            x.add_coord(*i, d.clone(), rat_int(rng.gen_range(-9..=9)));
        }
        match job.mca.is_regular_element(&x) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(e) => return res.failed(e.to_string()),
        }
        let result = match ts.reduce_to_slice(&x) {
            Ok(r) => r,
            Err(e) => return res.failed(e.to_string()),
        };
        if result.log.len() > step_bound {
            return res.failed(format!(
                "reduction used {} steps, bound is {step_bound}",
                result.log.len()
            ));
        }
        max_steps = max_steps.max(result.log.len() as i64);
        if !ts.contains(&result.output) {
            return res.failed("reduced element is not in the slice");
        }
        if let Err(e) = ts.verify_uniqueness(&x, &result.output, &job.dual_families) {
            return res.failed(e.to_string());
        }
        if let Err(e) = ts.transversality(&result.output) {
            return res.failed(e.to_string());
        }
        match ts.apply_log(&x, &result.log) {
            Ok(replayed) if replayed == result.output => {}
            Ok(_) => return res.failed("replaying the log does not reproduce the output"),
            Err(e) => return res.failed(e.to_string()),
        }
        match job.mca.is_regular_element(&result.output) {
            Ok(true) => {}
            Ok(false) => return res.failed("regularity lost along the reduction"),
            Err(e) => return res.failed(e.to_string()),
        }
        if first_log.is_none() {
            first_log = Some(serde_json::Value::Array(
                result.log.iter().map(|s| s.to_json()).collect(),
            ));
        }
        reduced += 1;
    }
    if reduced < 10 {
        return res.failed(format!(
            "found only {reduced} regular elements in {attempts} draws"
        ));
    }
    res.count("elements", reduced);
    res.count("max_steps", max_steps);
    res.count("step_bound", step_bound as i64);
    if let Some(log) = first_log {
        res.artifacts = Some(serde_json::json!({ "first_reduction_log": log }));
    }
    res
}
