use std::fs;
use std::io::BufWriter;

use proptest::prelude::*;
use smectic::export::*;
use smectic::flow::LayerCurve;
use smectic::{GridSpec, ScalarField3, VectorField3};

#[test]
fn scalar_vtk_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.vtk");
    let g = GridSpec::new([0.0, -1.0, 2.0], [4, 4, 5], [0.5, 0.25, 1.0]).unwrap();
    let mut f = ScalarField3::from_fn(g, |p| p[0] + p[1] * p[2]).unwrap();
    f.mask[7] = true;
    {
        let mut w = BufWriter::new(fs::File::create(&path).unwrap());
        write_scalar_vtk(&mut w, &f, "phi").unwrap();
    }
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("DIMENSIONS 4 4 5"));
    assert!(text.contains("POINT_DATA 80"));
    let values: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("LOOKUP_TABLE")).skip(1).take(80).collect();
    assert_eq!(values[7], "nan");
    assert_eq!(values[8].parse::<f64>().unwrap(), f.values[8]);
}

#[test]
fn vector_and_stack_csv() {
    let g = GridSpec::new([0.0; 3], [4, 4, 4], [1.0; 3]).unwrap();
    let v = VectorField3::from_fn(g, |p| [p[0], -p[1], 0.5]).unwrap();
    let mut buf = Vec::new();
    write_vector_csv(&mut buf, &v).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 65);
    let stack = vec![LayerCurve::flat(0.0, 1.0, 0.0, 4, 0.0).unwrap(), LayerCurve::flat(0.0, 1.0, 1.0, 4, 1.0).unwrap()];
    let mut buf = Vec::new();
    write_stack_csv(&mut buf, &stack).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("n,x,z"));
    assert_eq!(text.lines().count(), 9);
}

proptest! {
    #[test]
    fn csv_values_round_trip(v in prop::collection::vec(-1e300f64..1e300, 64)) {
        let g = GridSpec::new([0.0; 3], [4, 4, 4], [1.0; 3]).unwrap();
        let f = ScalarField3::new(g, v.clone(), vec![false; 64]).unwrap();
        let mut buf = Vec::new();
        write_scalar_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for (line, x) in text.lines().skip(1).zip(&v) {
            prop_assert_eq!(line.split(',').nth(3).unwrap().parse::<f64>().unwrap(), *x);
        }
    }
}
