use acn_core::backend::lie::f5_algebra;
use acn_core::{AcnStructure, Rational};
use acn_lab::registry::{find, EXAMPLES};
use acn_lab::spec::{parse_spec, parse_spec_str, SpecBody, SpecError, WarpSpec};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

const HEADER: &str = "name = \"test\"\nn = 1\nbackend = \"lie\"\n";

fn bracket(i: usize, j: usize, k: usize, v: &str) -> String {
    format!("\n[[bracket]]\ni = {i}\nj = {j}\nk = {k}\nvalue = \"{v}\"\n")
}

#[test]
fn bundled_f5_is_the_f5_algebra() {
    let spec = find("ex-f5").unwrap().manifold();
    assert_eq!(spec.name, "EX-F5(1)");
    let SpecBody::Lie { constants, structure } = spec.body else { panic!("lie spec expected") };
    assert_eq!(constants, f5_algebra(1, q(1, 1)));
    assert_eq!(structure, AcnStructure::canonical(1));
}

#[test]
fn bundled_chart_is_at_the_origin() {
    let spec = find("ex-chart").unwrap().manifold();
    let SpecBody::Chart(chart) = spec.body else { panic!("chart spec expected") };
    assert_eq!(chart.warp, WarpSpec::Exp { rate: q(-1, 2) });
    assert_eq!(chart.point, vec![0.0, 0.0, 0.0]);
    assert_eq!(chart.step, 1e-3);
    assert!(!chart.richardson);
}

#[test]
fn every_bundled_spec_parses() {
    for e in &EXAMPLES {
        let spec = e.manifold();
        assert_eq!(spec.dim(), 3, "{}", e.name);
    }
}

#[test]
fn spec_files_parse_from_disk() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/ex-f45.spec");
    assert_eq!(parse_spec(&path).unwrap(), find("ex-f45").unwrap().manifold());
    let missing = parse_spec(std::path::Path::new("/nonexistent/x.spec")).unwrap_err();
    assert!(matches!(missing, SpecError::Io { .. }));
}

#[test]
fn non_antisymmetric_brackets_are_rejected() {
    let text = format!("{HEADER}{}{}", bracket(0, 1, 2, "1"), bracket(1, 0, 2, "1"));
    let err = parse_spec_str(&text).unwrap_err();
    assert!(matches!(err, SpecError::Antisymmetry { .. }), "{err}");
}

#[test]
fn jacobi_failure_is_reported() {
    // [e1, e2] = xi, [xi, e1] = e1 breaks Jacobi on (e1, e2, xi).
    let text = format!("{HEADER}{}{}", bracket(0, 1, 2, "1"), bracket(2, 0, 0, "1"));
    let err = parse_spec_str(&text).unwrap_err();
    assert!(matches!(err, SpecError::Jacobi { .. }), "{err}");
}

#[test]
fn structure_axiom_failure_is_reported() {
    let text = format!(
        "{HEADER}\n[structure]\nsource = \"explicit\"\nphi = [[\"1\",\"0\",\"0\"],[\"0\",\"1\",\"0\"],[\"0\",\"0\",\"0\"]]\n\
         xi = [\"0\",\"0\",\"1\"]\ng = [[\"1\",\"0\",\"0\"],[\"0\",\"-1\",\"0\"],[\"0\",\"0\",\"1\"]]\n"
    );
    let err = parse_spec_str(&text).unwrap_err();
    assert!(matches!(err, SpecError::StructureAxiom { .. }), "{err}");
}

#[test]
fn explicit_canonical_structure_is_accepted() {
    let text = format!(
        "{HEADER}\n[structure]\nsource = \"explicit\"\nphi = [[\"0\",\"-1\",\"0\"],[\"1\",\"0\",\"0\"],[\"0\",\"0\",\"0\"]]\n\
         xi = [\"0\",\"0\",\"1\"]\ng = [[\"1\",\"0\",\"0\"],[\"0\",\"-1\",\"0\"],[\"0\",\"0\",\"1\"]]\n"
    );
    let spec = parse_spec_str(&text).unwrap();
    let SpecBody::Lie { structure, .. } = spec.body else { panic!() };
    assert_eq!(structure, AcnStructure::canonical(1));
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let err = parse_spec_str("name = \"x\"\nn = = 1\n").unwrap_err();
    match err {
        SpecError::Syntax { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn field_errors_name_the_field() {
    let cases = [
        (format!("{HEADER}{}", bracket(0, 5, 2, "1")), "bracket[0].j"),
        (format!("{HEADER}{}", bracket(0, 1, 2, "x/y")), "bracket[0].value"),
        ("name = \"x\"\nn = 0\nbackend = \"lie\"\n".to_string(), "n"),
        ("name = \"x\"\nn = 1\nbackend = \"mesh\"\n".to_string(), "backend"),
        ("name = \"x\"\nn = 1\nbackend = \"chart\"\n".to_string(), "chart"),
        (
            "name = \"x\"\nn = 1\nbackend = \"chart\"\n[chart]\nwarp = \"exp\"\nrate = \"1\"\npoint = [0.0, 0.0]\n".to_string(),
            "chart.point",
        ),
        (
            "name = \"x\"\nn = 1\nbackend = \"chart\"\n[chart]\nwarp = \"exp\"\nrate = \"1\"\npoint = [0.0, 0.0, 0.0]\nstep = 0.5\n"
                .to_string(),
            "chart.step",
        ),
    ];
    for (text, field) in cases {
        match parse_spec_str(&text).unwrap_err() {
            SpecError::Field { field: f, .. } => assert_eq!(f, field, "{text}"),
            other => panic!("{text}: unexpected {other}"),
        }
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let err = parse_spec_str(&format!("{HEADER}colour = \"red\"\n")).unwrap_err();
    assert!(matches!(err, SpecError::Syntax { .. }), "{err}");
}
