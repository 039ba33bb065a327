//! Reference values computed independently (high-precision quadrature and
//! direct simulation) and frozen here.

use ostat_core::chaos::{sigma_t, variance_u, UStatSpec};
use ostat_core::geometry::ConvexBody;
use ostat_core::limits::{beta_numeric, NumericOptions, Parametrization};
use ostat_core::models::ModelSpec;
use ostat_core::sampling::SeededStream;

fn opts(p: Parametrization, seed: u64) -> NumericOptions {
    NumericOptions { points: 1 << 13, randomizations: 16, stream: SeededStream::new(seed, 0), parametrization: p }
}

#[test]
fn gilbert_square_variance() {
    let spec = UStatSpec::new(ModelSpec::gilbert(ConvexBody::unit_cube(2).unwrap()), 0.06).unwrap();
    let s = sigma_t(&spec, 50.0).unwrap();
    let v = variance_u(&spec, 50.0).unwrap();
    assert!((s - 13.4252669412).abs() < 1e-9, "{s}");
    assert!((v - 28.074469762).abs() < 1e-7, "{v}");
}

#[test]
fn gilbert_interval_variance() {
    let spec = UStatSpec::new(ModelSpec::gilbert(ConvexBody::unit_cube(1).unwrap()), 0.1).unwrap();
    assert!((variance_u(&spec, 10.0).unwrap() - 46.166666666666667).abs() < 1e-9);
}

#[test]
fn hyperplane_triangles_beta_in_the_plane() {
    let w = ConvexBody::unit_cube(2).unwrap();
    let spec = ModelSpec::HyperplaneSimplices { window: w };
    let oracle = 0.205698231263;
    for p in [Parametrization::Anchored, Parametrization::Crofton] {
        let e = beta_numeric(&spec, &opts(p, 3)).unwrap();
        let tol = (4.0 * e.std_error).max(2e-3 * oracle);
        assert!((e.estimate - oracle).abs() < tol, "{p:?}: {} ± {}", e.estimate, e.std_error);
    }
}

#[test]
fn hyperplane_beta_scales_with_area() {
    let w = ConvexBody::cuboid(vec![0.0, 0.0], vec![2.0, 1.5]).unwrap();
    let e = beta_numeric(&ModelSpec::HyperplaneSimplices { window: w }, &opts(Parametrization::Anchored, 5)).unwrap();
    let oracle = 0.205698231263 * 3.0;
    assert!((e.estimate - oracle).abs() < (4.0 * e.std_error).max(2e-3 * oracle), "{e:?}");
}

#[test]
fn point_triangles_beta_in_the_plane() {
    let spec = ModelSpec::PointSimplices { window: ConvexBody::unit_cube(2).unwrap() };
    for p in [Parametrization::Anchored, Parametrization::Crofton] {
        let e = beta_numeric(&spec, &opts(p, 7)).unwrap();
        assert!((e.estimate - 2.0).abs() < (3.0 * e.std_error).max(2e-3), "{p:?}: {e:?}");
    }
}

#[test]
fn point_simplices_parametrizations_agree_in_space() {
    let spec = ModelSpec::PointSimplices { window: ConvexBody::unit_ball(3).unwrap() };
    let a = beta_numeric(&spec, &opts(Parametrization::Anchored, 1)).unwrap();
    let c = beta_numeric(&spec, &opts(Parametrization::Crofton, 2)).unwrap();
    let se = (a.std_error.powi(2) + c.std_error.powi(2)).sqrt();
    assert!((a.estimate - c.estimate).abs() < 4.0 * se + 1e-3 * a.estimate, "{a:?} {c:?}");
}
