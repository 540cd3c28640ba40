use num_complex::Complex64 as C64;
use quadromech::hilbert::TruncatedSpace;
use quadromech::model::{build_h_eff, derive_effective, j_opt, EffectiveParams, PhysicalParams};

const OMEGA_M: f64 = 1000.0;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `|α|` solving `|α| = 2|Ω| / √(γ_c² + 4Δ_c²)` with `Δ_c = 2(ω_m + 2g|α|²)`.
fn self_consistent_amplitude(omega: f64, g: f64) -> f64 {
    let residual = |a: f64| {
        let dc = 2.0 * (OMEGA_M + 2.0 * g * a * a);
        a - 2.0 * omega / (1.0 + 4.0 * dc * dc).sqrt()
    };
    bisect(0.0, 2.0 * omega, residual)
}

fn physical(omega: f64, g: f64) -> (PhysicalParams, f64) {
    let a = self_consistent_amplitude(omega, g);
    let omega_0 = OMEGA_M + 2.0 * g * a * a;
    let p = PhysicalParams {
        omega_c: 1.0e6,
        omega_l: 1.0e6 - 2.0 * omega_0,
        omega_m: OMEGA_M,
        omega_d: omega_0,
        g,
        omega_drive: C64::new(omega, 0.0),
        epsilon: 0.05,
        gamma_c: 1.0,
        gamma_m: 0.1,
        n_th: 1e-4,
    };
    (p, a)
}

#[test]
fn self_consistent_operating_point() {
    let omega = 4.0e4;
    let target = 0.406;
    let g = bisect(1e-6, 1.0, |g| g * self_consistent_amplitude(omega, g) - target);
    let (p, a) = physical(omega, g);
    let ep = derive_effective(&p).unwrap();
    assert!((ep.j.norm() - g * a).abs() < 1e-9);
    assert!((ep.j.norm() - target).abs() < 1e-9);
    assert!(ep.delta.abs() < 1e-6);
    assert!(ep.delta_m.abs() < 1e-6);
    assert!((ep.alpha.unwrap().norm() - a).abs() < 1e-9);
    assert!(ep.warnings.is_empty(), "{:?}", ep.warnings);
}

#[test]
fn optimal_coupling_limits() {
    assert!((j_opt(1.0, 1e-12).unwrap() - (1.0f64 / 8.0).sqrt()).abs() < 1e-10);
    assert!((j_opt(2.0, 0.2).unwrap() - 2.0 * j_opt(1.0, 0.1).unwrap()).abs() < 1e-14);
}

#[test]
fn manifold_four_block() {
    let j = 0.37;
    let space = TruncatedSpace::default();
    let h = build_h_eff(&EffectiveParams::resonant(j, 0.0, 0.1, 0.0).unwrap(), space).unwrap();
    let states = [(2, 0), (1, 2), (0, 4)];
    let s3 = 3f64.sqrt();
    let expect = [
        [0.0, 2.0 * j, 0.0],
        [2.0 * j, 0.0, 2.0 * s3 * j],
        [0.0, 2.0 * s3 * j, 0.0],
    ];
    for (r, &(nr, mr)) in states.iter().enumerate() {
        for (c, &(nc, mc)) in states.iter().enumerate() {
            let v = h.get(space.index(nr, mr), space.index(nc, mc));
            assert!((v - C64::new(expect[r][c], 0.0)).norm() < 1e-14, "({r},{c})");
        }
    }
}
