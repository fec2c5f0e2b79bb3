//! Cross-validation of the reference oracles against independent solvers.

mod common;

use common::fd_burgers;
use olpinn::problems::oracles;
use std::f64::consts::PI;

#[test]
fn viscous_oracle_agrees_with_finite_difference_solver() {
    // nu = 0.03/pi at (x, t) = (0.25, 0.5): quadrature vs an explicit
    // finite-difference march on a 2001 x 20001 grid.
    let nu = 0.03 / PI;
    let (profile, dx) = fd_burgers::solve(nu, 0.5, 2001, 20_001);
    let fd = fd_burgers::sample(&profile, dx, 0.25);
    let quad = oracles::burgers_viscous(nu, 0.25, 0.5).unwrap();
    assert!(
        (fd - quad).abs() < 1e-3,
        "fd {fd} vs quadrature {quad} (diff {})",
        (fd - quad).abs()
    );
}

#[test]
fn viscous_oracle_agrees_with_fd_across_profile() {
    let nu = 0.03 / PI;
    let (profile, dx) = fd_burgers::solve(nu, 0.5, 2001, 20_001);
    for i in 0..21 {
        let x = -1.0 + 0.1 * i as f64;
        let fd = fd_burgers::sample(&profile, dx, x);
        let quad = oracles::burgers_viscous(nu, x, 0.5).unwrap();
        assert!((fd - quad).abs() < 2e-3, "x={x}: fd {fd} vs quadrature {quad}");
    }
}

#[test]
fn viscous_oracle_gh_node_count_insensitive() {
    // >= 100 nodes all agree in the Gauss-Hermite regime
    let nu = 0.03 / PI;
    let a = oracles::burgers_viscous_gh(nu, 0.25, 0.5, 100).unwrap();
    let b = oracles::burgers_viscous_gh(nu, 0.25, 0.5, 150).unwrap();
    let c = oracles::burgers_viscous_gh(nu, 0.25, 0.5, 220).unwrap();
    assert!((a - b).abs() < 1e-10);
    assert!((b - c).abs() < 1e-10);
}

#[test]
fn case2_family_fd_cross_check() {
    // one spot check inside the Case II pretraining family
    let nu = 0.008 / PI;
    let (profile, dx) = fd_burgers::solve(nu, 0.6, 2001, 20_001);
    let fd = fd_burgers::sample(&profile, dx, 0.4);
    let quad = oracles::burgers_viscous(nu, 0.4, 0.6).unwrap();
    assert!((fd - quad).abs() < 2e-3, "fd {fd} vs quadrature {quad}");
}
