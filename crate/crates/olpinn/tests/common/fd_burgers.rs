//! Explicit finite-difference solver for viscous Burgers on [-1, 1] with
//! u(x,0) = -sin(pi x) and homogeneous Dirichlet boundaries. Test-only
//! oracle, independent of the quadrature-based reference implementation.

/// March u_t + u u_x = nu u_xx with central differences in space and forward
/// Euler in time on an (nx, nt) grid up to t_end; returns the final profile
/// and the spatial step.
pub fn solve(nu: f64, t_end: f64, nx: usize, nt: usize) -> (Vec<f64>, f64) {
    let dx = 2.0 / (nx - 1) as f64;
    let dt = t_end / nt as f64;
    // stability guards for the explicit scheme
    assert!(nu * dt / (dx * dx) < 0.5, "diffusion number too large");
    assert!(dt / dx < 0.5, "advective CFL too large");
    let mut u: Vec<f64> = (0..nx)
        .map(|i| {
            let x = -1.0 + i as f64 * dx;
            -(std::f64::consts::PI * x).sin()
        })
        .collect();
    let mut next = u.clone();
    for _ in 0..nt {
        for i in 1..nx - 1 {
            let ux = (u[i + 1] - u[i - 1]) / (2.0 * dx);
            let uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
            next[i] = u[i] + dt * (nu * uxx - u[i] * ux);
        }
        next[0] = 0.0;
        next[nx - 1] = 0.0;
        std::mem::swap(&mut u, &mut next);
    }
    (u, dx)
}

/// Linear interpolation of the final profile at x.
pub fn sample(profile: &[f64], dx: f64, x: f64) -> f64 {
    let pos = (x + 1.0) / dx;
    let i = (pos.floor() as usize).min(profile.len() - 2);
    let frac = pos - i as f64;
    profile[i] * (1.0 - frac) + profile[i + 1] * frac
}
