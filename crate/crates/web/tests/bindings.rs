use middleconv::fixtures;
use middleconv_web::{convolve_text, group_text, k3_text};

#[test]
fn convolve_fixtures() {
    let out = convolve_text("fixture:L", "fixture:L").unwrap();
    assert!(out.starts_with("dimension 2 (rank formula 2), 3 finite points"));
    assert!(out.contains("T1: J(1,2)"));
    let text = fixtures::find("L").unwrap().text;
    assert_eq!(convolve_text(text, "fixture:L").unwrap(), out);
}

#[test]
fn convolve_reports_errors() {
    let err = convolve_text("fixture:L", "field = \"rational\"").unwrap_err();
    assert!(err.starts_with("Format"));
    assert!(convolve_text("fixture:missing", "fixture:L").is_err());
}

#[test]
fn k3_values() {
    let out = k3_text(5).unwrap();
    assert!(out.contains("N(5) = 27\nt_5 = -3\n"));
    assert!(out.contains("t_5^2 = -21"));
    assert!(out.contains("alpha_5 = (1+sqrt(-24))/5"));
    assert!(k3_text(3).unwrap_err().starts_with("SmallPrime"));
}

#[test]
fn group_orders() {
    let out = group_text("fixture:V", 5).unwrap();
    assert!(out.contains("order 240"));
    assert!(out.contains("recognized O3(F_5)"));
    assert!(group_text("fixture:LstarL", 7).unwrap().contains("order "));
}
