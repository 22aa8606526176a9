use binarise::classicality::*;
use binarise::constructions::*;
use binarise::qcore::maximally_entangled;
use binarise::scenarios::*;
use binarise::Error;

fn bell_certificate() -> (Certificate, CorrelationObject) {
    let inst = cglmp_instance(3, StateChoice::Optimal).unwrap();
    let family = inst.family.map(binarise_bell).unwrap();
    let r = bell_critical_visibility(&family).unwrap();
    (r.certificate, CorrelationObject::Bell(family.quantum().clone()))
}

#[test]
fn binarised_cglmp_certificate_verifies() {
    let (cert, object) = bell_certificate();
    assert!(cert.violation() > 0.0);
    let report = verify_certificate(&cert, &object).unwrap();
    assert!(report.passed, "{:?}", report.messages);
    assert!(report.violation);
    assert!(report.value_residual < 1e-7);
    assert!(report.bound_residual.abs() < 1e-9);
}

#[test]
fn json_round_trip_keeps_verification() {
    let (cert, object) = bell_certificate();
    let text = cert.to_json().unwrap();
    let back = Certificate::from_json(&text).unwrap();
    assert_eq!(back, cert);
    assert!(verify_certificate(&back, &object).unwrap().passed);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "kind",
        "scenario",
        "index_convention",
        "coefficients",
        "classical_bound",
        "achieved_value",
        "v_critical",
        "enumeration_order",
        "solver_stats",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["enumeration_order"], "lex");
}

#[test]
fn perturbed_coefficient_fails() {
    let (mut cert, object) = bell_certificate();
    let Coefficients::Real(c) = &mut cert.coefficients else {
        unreachable!()
    };
    let p = object.clone();
    let CorrelationObject::Bell(b) = &p else { unreachable!() };
    let heavy = (0..c.len())
        .max_by(|&i, &j| b.probabilities()[i].total_cmp(&b.probabilities()[j]))
        .unwrap();
    c[heavy] += 0.1;
    let report = verify_certificate(&cert, &object).unwrap();
    assert!(!report.passed);
}

#[test]
fn lowered_bound_is_a_bound_violation() {
    let (mut cert, object) = bell_certificate();
    cert.classical_bound -= 0.01;
    let report = verify_certificate(&cert, &object).unwrap();
    assert!(!report.passed);
    assert!(report.messages.iter().any(|m| m.contains("classical bound violated")));
}

#[test]
fn scenario_mismatch_is_an_error() {
    let (cert, _) = bell_certificate();
    let other = cglmp_instance(3, StateChoice::Optimal).unwrap();
    let object = CorrelationObject::Bell(other.family.quantum().clone());
    assert!(matches!(
        verify_certificate(&cert, &object),
        Err(Error::ScenarioMismatch(_))
    ));
}

#[test]
fn pm_and_steering_certificates_verify() {
    let rac = rac_instance(2, &SeesawConfig::default()).unwrap();
    let r = pm_critical_visibility(&rac.family, 2).unwrap();
    let object = CorrelationObject::PrepareMeasure(rac.family.quantum().clone());
    let report = verify_certificate(&r.certificate, &object).unwrap();
    assert!(report.passed && report.violation, "{:?}", report.messages);
    let back = Certificate::from_json(&r.certificate.to_json().unwrap()).unwrap();
    assert_eq!(back, r.certificate);

    let family = mub_assemblage(3, 2, &maximally_entangled(3)).unwrap();
    let r = steering_critical_visibility(&family).unwrap();
    let object = CorrelationObject::Assemblage(family.quantum().clone());
    let report = verify_certificate(&r.certificate, &object).unwrap();
    assert!(report.passed && report.violation, "{:?}", report.messages);
    let back = Certificate::from_json(&r.certificate.to_json().unwrap()).unwrap();
    assert!(verify_certificate(&back, &object).unwrap().passed);
}

#[test]
fn certificate_visibility_matches_lp_value() {
    let (cert, _) = bell_certificate();
    let inst = cglmp_instance(3, StateChoice::Optimal).unwrap();
    let r = bell_critical_visibility(&inst.family.map(binarise_bell).unwrap()).unwrap();
    assert!((r.v_lp - cert.v_critical).abs() < 1e-6);
    assert!((cert.v_critical - 0.794).abs() < 0.005);
}

#[test]
fn rac_witness_values() {
    assert_eq!(rac_binarised_witness_classical_max(3), 72);
    let rac = rac_instance(3, &SeesawConfig::default()).unwrap();
    let bin = rac.family.map(binarise_pm).unwrap();
    let quantum = rac_binarised_witness_value(bin.quantum()).unwrap();
    assert!(quantum > 9.1, "{quantum}");
    // oracle: direct sum over the binarised tensor
    let p = bin.quantum();
    let mut direct = 0.0;
    for x in 0..9 {
        for y in 0..2 {
            let target = if y == 0 { x / 3 } else { x % 3 };
            for b in 0..3 {
                let click = p.get(CLICK, x, y * 3 + b);
                direct += if b == target { click } else { -0.625 * click };
            }
        }
    }
    assert!((quantum - direct).abs() < 1e-12);
    let zeros = PmBehavior::deterministic(*p.scenario(), |_, _| NO_CLICK).unwrap();
    assert_eq!(rac_binarised_witness_value(&zeros).unwrap(), 0.0);
    let noise_value = rac_binarised_witness_value(&bin.at(0.0).unwrap()).unwrap();
    assert!(noise_value <= 9.0);
}
