use pseudospec::bounds::BoundReport;
use pseudospec::tracer::*;
use pseudospec::Complex64;
use std::collections::HashSet;
use std::f64::consts::PI;

fn circle(z: Complex64) -> f64 {
    z.norm() - 1.0
}

/// Distance to the segment `[-1, 1]` on the real axis.
fn stadium(z: Complex64) -> f64 {
    let x = z.re.clamp(-1.0, 1.0);
    (z - Complex64::new(x, 0.0)).norm()
}

fn square() -> BBox {
    BBox::new(-1.5, 1.5, -1.5, 1.5)
}

#[test]
fn unit_circle_is_closed_and_accurate() {
    let h = 0.05;
    let set = trace_contour(&circle, 0.0, square(), h, &[], 8);
    assert_eq!(set.polylines.len(), 1, "{:?}", set.diagnostic);
    let line = &set.polylines[0];
    assert!(line.closed);
    for p in &line.points {
        assert!((p.norm() - 1.0).abs() <= h);
    }
    assert!((line.length() - 2.0 * PI).abs() <= 0.05 * 2.0 * PI);
    assert!(set.evaluations <= set.sign_data.len());
}

#[test]
fn circle_radius_and_threshold_agree() {
    // |z| - 1 = 0.5 is the circle of radius 1.5
    let h = 0.04;
    let bbox = BBox::new(-2.0, 2.0, -2.0, 2.0);
    let set = trace_contour(&circle, 0.5, bbox, h, &[Complex64::new(1.5, 0.0)], 8);
    assert_eq!(set.polylines.len(), 1);
    assert!(set.polylines[0].closed);
    for p in &set.polylines[0].points {
        assert!((p.norm() - 1.5).abs() <= h);
    }
}

#[test]
fn stadium_boundary() {
    let h = 0.05;
    let bbox = BBox::new(-2.0, 2.0, -1.0, 1.0);
    let set = trace_contour(&stadium, 0.5, bbox, h, &[], 6);
    assert_eq!(set.polylines.len(), 1);
    let line = &set.polylines[0];
    assert!(line.closed);
    for p in &line.points {
        assert!((stadium(*p) - 0.5).abs() <= h);
    }
    let exact = 4.0 + PI;
    assert!((line.length() - exact).abs() <= 0.05 * exact);
}

#[test]
fn two_components_are_both_found() {
    let f = |z: Complex64| (z - 0.8).norm().min((z + 0.8).norm()) - 0.4;
    let set = trace_contour(&f, 0.0, BBox::new(-1.5, 1.5, -1.0, 1.0), 0.04, &[], 4);
    assert_eq!(set.polylines.len(), 2);
    assert!(set.polylines.iter().all(|p| p.closed));
}

#[test]
fn open_curve_ends_on_the_box() {
    let f = |z: Complex64| z.re;
    let set = trace_contour(&f, 0.25, square(), 0.1, &[], 4);
    assert_eq!(set.polylines.len(), 1);
    let line = &set.polylines[0];
    assert!(!line.closed);
    for p in &line.points {
        assert!((p.re - 0.25).abs() < 1e-12);
    }
    let span = line.points.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max)
        - line.points.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
    assert!(span > 2.7);
}

#[test]
fn visited_set_does_not_depend_on_the_seed() {
    let tri = Triangulation::new(square(), 0.07);
    let run = |seed: Complex64| {
        let cache = VertexCache::new(tri, &circle);
        let t = seed_near(&cache, 0.0, seed).unwrap();
        let set = trace_from(&cache, 0.0, &[t]);
        let pts: HashSet<(i64, i64)> =
            set.polylines[0].points.iter().map(|p| ((p.re * 1e9).round() as i64, (p.im * 1e9).round() as i64)).collect();
        (set.triangles_visited, pts)
    };
    let a = run(Complex64::new(1.0, 0.0));
    for z in [Complex64::new(0.0, 1.0), Complex64::new(-0.7, -0.7), Complex64::new(0.2, -0.98)] {
        assert_eq!(run(z), a);
    }
}

#[test]
fn every_vertex_is_evaluated_once() {
    let tri = Triangulation::new(square(), 0.1);
    let cache = VertexCache::new(tri, &circle);
    let seeds = find_seeds(&cache, 0.0, 5);
    assert!(!seeds.is_empty());
    let set = trace_from(&cache, 0.0, &seeds);
    assert_eq!(set.polylines.len(), 1);
    assert!(cache.evaluations() <= cache.distinct_vertices());
}

#[test]
fn no_level_set_gives_a_diagnostic() {
    let set = trace_contour(&|_| 1.0, 0.0, square(), 0.1, &[], 4);
    assert!(set.polylines.is_empty());
    assert!(set.diagnostic.is_some());
}

#[test]
fn neighbors_share_two_vertices() {
    for up in [true, false] {
        let t = Triangle { i: 3, j: -2, up };
        let vs = t.vertices();
        for k in 0..3 {
            let n = t.neighbor(k);
            assert_ne!(n.up, up);
            let nv = n.vertices();
            let shared: Vec<_> = vs.iter().filter(|v| nv.contains(v)).collect();
            assert_eq!(shared.len(), 2);
            assert!(!shared.contains(&&vs[k]));
        }
    }
}

#[test]
fn locate_returns_the_containing_triangle() {
    let tri = Triangulation::new(square(), 0.13);
    for k in 0..200 {
        let z = Complex64::new(-1.4 + 0.0137 * k as f64, 1.3 - 0.0121 * k as f64);
        let t = tri.locate(z);
        let [a, b, c] = t.vertices().map(|v| tri.point(v));
        let cross = |p: Complex64, q: Complex64| (q - p).re * (z - p).im - (q - p).im * (z - p).re;
        let s = [cross(a, b), cross(b, c), cross(c, a)];
        assert!(s.iter().all(|&x| x >= -1e-12) || s.iter().all(|&x| x <= 1e-12));
    }
}

fn report(lambda: Complex64, f: f64) -> BoundReport {
    BoundReport { lambda, f_l: f, f_u: f, per_offset: vec![(0, f)], eta_d: 0.0, delta_n: 0.0, tol: 1e-12 }
}

#[test]
fn grid_classification_is_nested_in_eps() {
    let eval = |z: Complex64| Ok(report(z, (z - 1.0).norm()));
    let eps = [0.25, 0.5, 1.0];
    let field = grid_scan(&eval, BBox::new(-2.0, 2.0, -2.0, 2.0), 21, 17, &eps).unwrap();
    assert_eq!(field.points.len(), 21 * 17);
    let rank = |c: Classification| match c {
        Classification::CertifiedOut => 0,
        Classification::Undecided => 1,
        Classification::CertifiedIn => 2,
    };
    for p in &field.points {
        for w in p.classes.windows(2) {
            assert!(rank(w[0]) <= rank(w[1]));
        }
        let inside = (p.lambda - 1.0).norm() < 0.5;
        assert_eq!(p.classes[1] == Classification::CertifiedIn, inside);
    }
    let corner = field.at(20, 16).lambda;
    assert_eq!(corner, Complex64::new(2.0, 2.0));
}
