use sm_pricer_wasm::{price_curves, scaling_convergence, simulate_path};

#[test]
fn curves_are_ordered_and_bounded() {
    let n = 9;
    let out = price_curves(0.7, 50.0, 1.0, 1.0, 0.0, 0.5, 1.5, n).unwrap();
    assert_eq!(out.len(), 4 * n);
    for i in 0..n {
        let x = out[i];
        for c in 1..4 {
            let p = out[c * n + i];
            assert!(p >= (x - 1.0).max(0.0) - 1e-12 && p <= x, "curve {c} at {x}: {p}");
        }
    }
}

#[test]
fn series_error_shrinks_with_rate() {
    let out = scaling_convergence(0.7, 1.0, 0.0, vec![10.0, 100.0, 1000.0]).unwrap();
    assert_eq!(out.len(), 12);
    assert!(out[3] > out[7] && out[7] > out[11], "{out:?}");
}

#[test]
fn path_starts_at_one_and_ends_at_horizon() {
    let out = simulate_path(0.7, 50.0, 1.0, 0.0, 3).unwrap();
    assert_eq!(&out[..2], &[0.0, 1.0]);
    assert_eq!(out[out.len() - 2], 1.0);
    assert!(out.chunks(2).all(|p| p[1] > 0.0));
    assert_eq!(out, simulate_path(0.7, 50.0, 1.0, 0.0, 3).unwrap());
}
