use num_complex::Complex64;
use spingeo_core::fieldgrid::{AxialMode, Couplings, ResidualField, SpinorField};
use spingeo_core::io::*;
use spingeo_core::radial::{solve_bound_state, AxialProfile, GridKind, Potential, RadialProblem};
use spingeo_core::sampling::random_spinor;
use spingeo_core::{Error, Spinor};

fn small_field() -> SpinorField {
    let couplings = Couplings { charge: 0.5, axial: 0.25, mass: 1.5 };
    SpinorField::from_fn([1, 5, 1, 5], [0.1, 0.2, 0.3, 0.4], [1.0, 0.0, -1.0, 2.0], couplings, |x| {
        random_spinor(3, (10.0 * (x[1] + 3.0 * x[3])) as u64)
    })
    .unwrap()
    .with_potential_fn(|x| [x[0], x[1], 0.5, -x[3]])
    .with_aleph_fn(|x| [0.0, x[3], x[1], 1.0 / 3.0])
}

#[test]
fn field_document_round_trips() {
    let mut field = small_field();
    field.axial_mode = AxialMode::Gradient;
    let text = to_json(&FieldDoc::from_field(&field));
    assert!(text.ends_with('\n'));
    let back = match parse_grid_input(&text).unwrap() {
        GridInput::Field(doc) => doc.into_field().unwrap(),
        GridInput::Refinement(_) => panic!("read as refinement"),
    };
    assert_eq!(back.dims, field.dims);
    assert_eq!(back.spacing, field.spacing);
    assert_eq!(back.origin, field.origin);
    assert_eq!(back.psi, field.psi);
    assert_eq!(back.potential, field.potential);
    assert_eq!(back.aleph, field.aleph);
    assert_eq!(back.axial_mode, AxialMode::Gradient);
    assert_eq!(
        (back.couplings.charge, back.couplings.axial, back.couplings.mass),
        (0.5, 0.25, 1.5)
    );
}

#[test]
fn field_document_accepts_long_coupling_names() {
    let text = r#"{"dims": [1, 1, 1, 1], "spacing": [1, 1, 1, 1],
        "couplings": {"charge": 2, "mass": 1},
        "psi": [1, 0, 0, 0, 0, 0, 0, 0]}"#;
    let GridInput::Field(doc) = parse_grid_input(text).unwrap() else { panic!() };
    let field = doc.into_field().unwrap();
    assert_eq!((field.couplings.charge, field.couplings.axial, field.couplings.mass), (2.0, 0.0, 1.0));
    assert_eq!(field.psi[0], Spinor::new(Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()));
    assert_eq!(field.axial_mode, AxialMode::Given);
    assert!(field.potential.is_none());
}

#[test]
fn field_document_length_errors() {
    let base = r#"{"dims": [1, 1, 1, 1], "spacing": [1, 1, 1, 1], "couplings": {"m": 1}, "psi": PSI, "A": POT}"#;
    let psi_ok = "[1,0,0,0,0,0,0,0]";
    let bad_psi = base.replace("PSI", "[1,0,0,0]").replace("POT", "[0,0,0,0]");
    let bad_pot = base.replace("PSI", psi_ok).replace("POT", "[0,0,0]");
    for text in [bad_psi, bad_pot] {
        let GridInput::Field(doc) = parse_grid_input(&text).unwrap() else { panic!() };
        assert!(matches!(doc.into_field(), Err(Error::Format(_))));
    }
    let unknown = base.replace("PSI", psi_ok).replace(", \"A\": POT", ", \"axial_mode\": \"sideways\"");
    let GridInput::Field(doc) = parse_grid_input(&unknown).unwrap() else { panic!() };
    assert!(doc.into_field().is_err());
}

#[test]
fn refinement_documents_are_recognised() {
    let text = r#"{"refinement": ["a.json", "b.json"], "families": ["dirac"]}"#;
    match parse_grid_input(text).unwrap() {
        GridInput::Refinement(r) => {
            assert_eq!(r.refinement, vec!["a.json", "b.json"]);
            assert_eq!(r.families.unwrap(), vec!["dirac"]);
        }
        GridInput::Field(_) => panic!("read as field"),
    }
}

#[test]
fn parse_errors_carry_a_position() {
    let text = "{\n  \"m\": 1,\n  \"k\": oops\n}";
    match parse_json::<ProblemDoc>(text) {
        Err(Error::Format(msg)) => assert!(msg.starts_with("line 3, column"), "{msg}"),
        other => panic!("{:?}", other.map(|d| d.k)),
    }
}

#[test]
fn float_formatting() {
    assert_eq!(fmt_f64(f64::NAN), "nan");
    assert_eq!(fmt_f64(f64::INFINITY), "inf");
    assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, f64::MAX] {
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }
}

#[test]
fn problem_document_builds_the_problem() {
    let text = r#"{"m": 1, "Zalpha": 0.3, "k": 1,
        "grid": {"r_min": 1e-6, "r_max": 200, "n": 1000},
        "bracket": [0.9, 0.99], "nonlinear": {"damping": 0.3}}"#;
    let doc: ProblemDoc = parse_json(text).unwrap();
    let p = doc.to_problem().unwrap();
    assert_eq!((p.mass, p.charge, p.axial_coupling, p.k), (1.0, 1.0, 0.0, 1));
    assert!(matches!(p.potential, Potential::Coulomb { z_alpha } if z_alpha == 0.3));
    assert!(matches!(p.axial, AxialProfile::Zero));
    assert_eq!(p.grid.kind, GridKind::Log);
    let opts = doc.nonlinear.unwrap().options();
    assert_eq!(opts.damping, 0.3);
    assert_eq!(opts.max_iterations, 60);

    let tabled = r#"{"m": 2, "g": 1, "k": 2, "A0_table": [[0, -1], [10, 0]],
        "aleph": {"r": [1, 2, 3], "values": [0.1, 0.2, 0.3]},
        "grid": {"r_min": 0.01, "r_max": 20, "n": 400, "kind": "uniform"}, "bracket": [0, 1]}"#;
    let p = parse_json::<ProblemDoc>(tabled).unwrap().to_problem().unwrap();
    assert!((p.potential_energy(5.0) + 0.5).abs() <= 1e-15);
    assert!((p.axial_energy(1.5) - 0.15).abs() <= 1e-15);
    assert_eq!(p.grid.kind, GridKind::Uniform);

    let preset = r#"{"m": 1, "g": 1, "k": 1, "aleph": "arcsin_angle",
        "grid": {"r_min": 1.5, "r_max": 20, "n": 400}, "bracket": [0, 1]}"#;
    let p = parse_json::<ProblemDoc>(preset).unwrap().to_problem().unwrap();
    assert!(matches!(p.axial, AxialProfile::ArcsinAngle));
}

#[test]
fn problem_document_errors() {
    let cases = [
        r#"{"m": 1, "k": 1, "Zalpha": 0.3, "A0_table": [[0, 0], [1, 0]], "grid": {"r_min": 1e-6, "r_max": 10, "n": 400}, "bracket": [0, 1]}"#,
        r#"{"m": 1, "k": 1, "aleph": "sideways", "grid": {"r_min": 1e-6, "r_max": 10, "n": 400}, "bracket": [0, 1]}"#,
        r#"{"m": 1, "k": 1, "grid": {"r_min": 1e-6, "r_max": 10, "n": 400, "kind": "cubic"}, "bracket": [0, 1]}"#,
        r#"{"m": 1, "k": 1, "A0_table": [[1, 0], [0, 0]], "grid": {"r_min": 1e-6, "r_max": 10, "n": 400}, "bracket": [0, 1]}"#,
        r#"{"m": 1, "k": 1, "grid": {"r_min": 1e-6, "r_max": 10, "n": 10}, "bracket": [0, 1]}"#,
    ];
    for text in cases {
        let doc: ProblemDoc = parse_json(text).unwrap();
        assert!(doc.to_problem().is_err(), "{text}");
    }
}

#[test]
fn state_csv_layout() {
    let z = 0.3;
    let grid = spingeo_core::radial::RadialGrid { r_min: 1e-6, r_max: 200.0, n: 400, kind: GridKind::Log };
    let s = solve_bound_state(&RadialProblem::coulomb(1.0, z, 1, grid), (0.9, 0.99)).unwrap();
    let csv = state_csv(&s);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# r,re_uL,im_uL,re_dL,im_dL,re_uR,im_uR,re_dR,im_dR,density");
    assert_eq!(lines.len(), 401);
    let row: Vec<f64> = lines[200].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[0], s.r[199]);
    let c = s.components[199];
    assert_eq!(row[1], c[0].re);
    assert_eq!(row[8], c[3].im);
    let dens: f64 = row[1..9].iter().map(|v| v * v).sum();
    assert!((row[9] - dens).abs() <= 1e-15 * dens.max(1e-300));
}

#[test]
fn residual_csv_layout() {
    let field = small_field();
    let residual = ResidualField {
        name: "x".into(),
        values: (0..field.len()).map(|k| if k == 1 { f64::NAN } else { k as f64 }).collect(),
        degenerate: vec![false; field.len()],
        max_interior: 0.0,
        rms_interior: 0.0,
        masked: 1,
    };
    let csv = residual_csv(&field, &residual);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# i0,i1,i2,i3,value");
    assert_eq!(lines.len(), 1 + field.len());
    assert_eq!(lines[2], "0,0,0,1,nan");
    assert_eq!(lines[6], "0,1,0,0,5.0000000000000000e0");
}

#[test]
fn spinor_lists_in_both_shapes() {
    let bare: SpinorListDoc = parse_json("[[1,2,3,4,5,6,7,8]]").unwrap();
    let wrapped: SpinorListDoc = parse_json(r#"{"spinors": [[1,2,3,4,5,6,7,8]]}"#).unwrap();
    let expected = Spinor::new(
        Complex64::new(1.0, 2.0),
        Complex64::new(3.0, 4.0),
        Complex64::new(5.0, 6.0),
        Complex64::new(7.0, 8.0),
    );
    assert_eq!(bare.spinors(), vec![expected]);
    assert_eq!(wrapped.spinors(), vec![expected]);
    assert!(parse_json::<SpinorListDoc>("[[1,2,3]]").is_err());
}

#[test]
fn file_errors_name_the_path() {
    let err = read_text(std::path::Path::new("/nonexistent/spingeo/input.json")).unwrap_err();
    assert!(err.to_string().starts_with("/nonexistent/spingeo/input.json"));
}
