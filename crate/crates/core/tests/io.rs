use std::fs::File;
use std::io::BufReader;

use anisoperim_core::anorm::{Norm, NormSpec, PolarNorm};
use anisoperim_core::convex_geom::ConvexCurve;
use anisoperim_core::field::{profile, read_field, read_profile_csv, write_field, write_profile_csv};
use anisoperim_core::geom::Vec2;
use anisoperim_core::manufactured::FieldPreset;

#[test]
fn field_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let norm = Norm::ellipse(2.0, 1.0).unwrap();
    let polar = PolarNorm::analytic(norm.clone()).unwrap();
    let f = FieldPreset::RotatedEllipse.field(&polar, 1.0 / 32.0).unwrap();
    let csv_path = dir.path().join("u.csv");
    let sidecar = write_field(&f, NormSpec::of(&norm), File::create(&csv_path).unwrap()).unwrap();
    std::fs::write(dir.path().join("u.toml"), &sidecar).unwrap();

    let text = std::fs::read_to_string(dir.path().join("u.toml")).unwrap();
    let (g, desc) = read_field(File::open(&csv_path).unwrap(), &text).unwrap();
    assert_eq!(desc.norm, NormSpec::of(&norm));
    assert_eq!(g.grid(), f.grid());
    assert_eq!(g.values(), f.values());
    assert_eq!(g.boundary().vertices(), f.boundary().vertices());
    assert!(g.model().is_none());
}

#[test]
fn profile_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let norm = Norm::pnorm(4.0).unwrap();
    let polar = PolarNorm::best(norm.clone()).unwrap();
    let f = FieldPreset::SoftSquare.field(&polar, 1.0 / 32.0).unwrap();
    let p = profile(&f, &norm, 16).unwrap();
    let path = dir.path().join("profile.csv");
    write_profile_csv(&p, File::create(&path).unwrap()).unwrap();
    let q = read_profile_csv(File::open(&path).unwrap(), p.max_value, p.max_grad, p.cell_area).unwrap();
    assert_eq!(q.levels, p.levels);
    assert_eq!(q.mu, p.mu);
    assert_eq!(q.lambda, p.lambda);
}

#[test]
fn polygon_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let k = ConvexCurve::regular_polygon(7, 1.3, Vec2::new(0.1, -0.4), 0.2).unwrap();
    let path = dir.path().join("k.txt");
    k.write(File::create(&path).unwrap()).unwrap();
    let back = ConvexCurve::read(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back.vertices(), k.vertices());
}
