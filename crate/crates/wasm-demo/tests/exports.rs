use stablebranch_wasm::{point_spectrum, radial_curve, sample_path};

#[test]
fn density_curve_approaches_its_tail() {
    let v = radial_curve(2, 1.0, 0.0, 1.0, 200.0, 8).unwrap();
    let last = &v[v.len() - 3..];
    assert!((last[1] / last[2] - 1.0).abs() < 0.02);
    assert!(v.chunks(3).zip(v.chunks(3).skip(1)).all(|(a, b)| b[1] < a[1]));
}

#[test]
fn spectrum_cdf_is_monotone() {
    let v = point_spectrum(1.5, 1.0, 2.0, 10.0, 20).unwrap();
    assert!((v[0] + 1.8247119618832608).abs() < 1e-10);
    let cdf: Vec<f64> = v[5..].chunks(2).map(|r| r[1]).collect();
    assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn sample_path_depends_on_seed() {
    let a = sample_path(1.5, 1.0, 2.0, 0.05, 0.01, 200, 20, 100_000, 1).unwrap();
    let b = sample_path(1.5, 1.0, 2.0, 0.05, 0.01, 200, 20, 100_000, 2).unwrap();
    assert_eq!(a.len(), b.len());
    assert_ne!(a, b);
    assert!(a.chunks(3).all(|r| r[1] >= 0.0));
}
