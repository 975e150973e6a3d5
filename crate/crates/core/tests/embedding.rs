use twisted_cylinder::embedding::{
    boundary_loops, isometry_report, triangulate, write_obj, CylinderEmbedding, EmbeddingConfig, EmbeddingReport,
};
use twisted_cylinder::flat_domain::{CreasePattern, PatternId, Piece};
use twisted_cylinder::topology::min_loop_distance;

fn build(id: PatternId, eps: f64) -> CylinderEmbedding {
    CylinderEmbedding::build(&CreasePattern::catalog(id), eps, &EmbeddingConfig::default()).unwrap()
}

#[test]
fn image_lies_in_a_slab_of_three_layer_gaps() {
    let e = build(PatternId::P1, 0.1);
    let mesh = triangulate(&e, 64, 24);
    let (lo, hi) = mesh
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    assert!((hi - lo - 3.0 * e.layer_gap()).abs() < 1e-12, "{} vs {}", hi - lo, e.layer_gap());
}

#[test]
fn seam_points_agree() {
    for id in PatternId::ALL {
        let e = build(id, 0.2);
        for k in 0..=32 {
            let y = k as f64 / 32.0;
            assert!((e.point(0.0, y) - e.point(e.lambda(), y)).norm() <= 1e-9);
        }
    }
}

#[test]
fn junctions_agree_from_both_sides() {
    for id in PatternId::ALL {
        let e = build(id, 0.1);
        let t = e.pattern();
        let lines = t.lines();
        let pieces = t.pieces();
        let lambda = t.lambda();
        for m in 0..pieces.len() {
            let right_piece = pieces[(m + 1) % pieces.len()];
            let shift = if m + 1 == pieces.len() { lambda } else { 0.0 };
            for k in 0..64 {
                let y = (k as f64 + 0.5) / 64.0;
                let u = lines[m + 1].at(y);
                let a = e.point_unrolled(pieces[m], u, y);
                let b = e.point_unrolled(right_piece, u - shift, y);
                assert!((a - b).norm() <= 1e-9, "{id} junction {m} y={y}: {}", (a - b).norm());
            }
        }
    }
}

#[test]
fn gram_defect_on_all_patterns_and_epsilons() {
    for id in PatternId::ALL {
        for eps in [0.5, 0.2, 0.1, 0.05] {
            let r = isometry_report(&build(id, eps), 32, 20, 1);
            assert!(r.max_gram_defect <= 1e-8, "{id} {eps}: {r:?}");
            assert!(r.fd_max_error <= 1e-6, "{id} {eps}: {r:?}");
        }
    }
}

#[test]
fn p1_isometry_report_at_grid_64() {
    let e = build(PatternId::P1, 0.1);
    let r = isometry_report(&e, 64, 100, 9);
    assert!(r.max_gram_defect <= 1e-8);
    assert!(r.fd_max_error <= 1e-6);
    assert_eq!(r.fd_samples, 100);
    let s = isometry_report(&e.scaled(1.01), 64, 0, 9);
    assert!((s.max_gram_defect - 0.0201).abs() < 1e-9);
}

#[test]
fn limit_fixture_is_a_piecewise_isometry() {
    for id in PatternId::ALL {
        let e = CylinderEmbedding::limit(&CreasePattern::catalog(id)).unwrap();
        assert!(isometry_report(&e, 64, 0, 0).max_gram_defect <= 1e-12);
        assert!(e.seam_defect() <= 1e-12);
    }
}

#[test]
fn boundary_length_converges_quadratically() {
    let e = build(PatternId::P1, 0.1);
    let err = |n: usize| {
        let (f, _) = boundary_loops(&e, n).unwrap();
        e.lambda() - f.length
    };
    let (a, b, c) = (err(128), err(256), err(512));
    assert!(a > b && b > c && c > 0.0);
    assert!(a / b > 3.0 && b / c > 3.0, "{a} {b} {c}");
}

#[test]
fn boundary_loops_have_the_circumference_and_do_not_touch() {
    let e = build(PatternId::P1, 0.1);
    let (f, g) = boundary_loops(&e, 1024).unwrap();
    assert!((f.length - 2.1).abs() <= 0.01 && (g.length - 2.1).abs() <= 0.01);
    assert!(min_loop_distance(&f.points, &g.points) > 0.0);
}

#[test]
fn mesh_is_an_annulus_with_quadratic_distortion() {
    let e = build(PatternId::P2, 0.2);
    let coarse = triangulate(&e, 32, 12);
    let fine = triangulate(&e, 64, 24);
    for m in [&coarse, &fine] {
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_cycles(), 2);
        assert!(m.is_manifold());
    }
    let (dc, df) = (coarse.max_edge_distortion(e.lambda()), fine.max_edge_distortion(e.lambda()));
    assert!(dc / df > 3.0, "{dc} {df}");
}

#[test]
fn band_pieces_are_curved_and_regions_are_flat() {
    let e = build(PatternId::P1, 0.1);
    let t = e.pattern();
    let b = &t.bands[0];
    let mid = 0.5 * (b.near.at(0.5) + b.far.at(0.5));
    let (_, j) = e.eval(t.to_domain(mid), 0.5);
    let (_, j0) = e.eval(t.to_domain(b.near.at(0.5) - 1e-3), 0.5);
    assert!((j.column(0) - j0.column(0)).norm() > 0.1);
    assert!(matches!(t.locate(t.to_domain(mid), 0.5).0, Piece::Band(0)));
}

#[test]
fn obj_and_report_export() {
    let e = build(PatternId::P1m, 0.1);
    let mesh = triangulate(&e, 32, 8);
    let loops = boundary_loops(&e, 256).unwrap();
    let mut buf = Vec::new();
    write_obj(&mesh, Some((&loops.0, &loops.1)), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let loop_points = loops.0.points.len() + loops.1.points.len();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), mesh.vertices.len() + loop_points);
    assert_eq!(text.lines().filter(|l| l.starts_with("l ")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), mesh.triangles.len());
    assert!(text.contains("g F") && text.contains("g G"));
    let iso = isometry_report(&e, 32, 10, 0);
    let rep = EmbeddingReport::new(&e, &iso, &loops, &mesh);
    let v = serde_json::to_value(&rep).unwrap();
    for key in ["schema_version", "pattern", "epsilon", "max_gram_defect", "seam_defect", "boundary_lengths"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["pattern"], "P1m");
}
