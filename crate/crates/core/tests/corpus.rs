//! Every shipped model verifies against its problem, agrees with the brute
//! force evaluator, and survives a certificate round trip.

mod support;

use semdis::checker::verify;
use semdis::formats::{parse_certificate, serialize_certificate};
use semdis::pipeline::{oracle_check, PipelineOptions};

use support::{corpus, model, naive_refutation, shipped_cases, problem};

#[test]
fn shipped_models_verify() {
    for case in shipped_cases() {
        let p = problem(case.system, case.query, case.opts);
        let s = model(&p, case.model);
        let cert = verify(&p.theory, &p.obligations, &s);
        assert!(cert.is_verified(), "{}: {:?}", case.label, cert.first_failure());
        assert_eq!(naive_refutation(&p.theory, &p.obligations, &s), None, "{}", case.label);
    }
}

#[test]
fn critical_pair_model_verifies() {
    let p = problem("fab.trs", "FEASIBLE(x == a, x == b)", PipelineOptions::default());
    let s = model(&p, "fab_infeasible.model");
    assert!(verify(&p.theory, &p.obligations, &s).is_verified());
}

#[test]
fn division_query_file_matches_the_shared_query() {
    assert_eq!(corpus("division.query").trim(), support::DIVISION_QUERY);
}

#[test]
fn certificates_round_trip() {
    for case in shipped_cases() {
        let p = problem(case.system, case.query, case.opts);
        let s = model(&p, case.model);
        let cert = verify(&p.theory, &p.obligations, &s);
        let text = serialize_certificate(&cert, &[("system", &corpus(case.system)), ("query", case.query)]);
        let doc = parse_certificate(&text).unwrap_or_else(|e| panic!("{}: {e}", case.label));
        assert_eq!(doc.structure().unwrap(), s, "{}", case.label);
        assert_eq!(serialize_certificate(&cert, &[("system", &corpus(case.system)), ("query", case.query)]), text);
    }
}

#[test]
fn shipped_models_agree_with_bounded_derivations() {
    for case in shipped_cases() {
        let p = problem(case.system, case.query, case.opts);
        let s = model(&p, case.model);
        let report = oracle_check(&p, &s, 2, 4).unwrap();
        assert!(report.is_clean(), "{}: {:?}", case.label, report.violations);
    }
}
