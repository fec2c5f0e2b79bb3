//! Reference solutions for the benchmark PDEs.
//!
//! The viscous Burgers oracle evaluates the Cole-Hopf closed form
//!
//!   u(x,t) = Int (x-eta)/t K deta / Int K deta,
//!   K = exp( (1 - cos(pi eta)) / (2 pi nu) - (x - eta)^2 / (4 nu t) ),
//!
//! for the initial condition u(x,0) = -sin(pi x). Two quadratures back it:
//! Gauss-Hermite after the heat-kernel substitution eta = x - 2 sqrt(nu t) z,
//! which is spectrally accurate while the non-Gaussian exponent (bounded by
//! 1/(pi nu)) stays within the node span, and a stabilized composite
//! Gauss-Legendre rule over eta that resolves the integrand for arbitrarily
//! small nu. The switch happens at 1/(pi nu) = 150, well inside the region
//! where both rules agree to machine precision.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Exact solution of the nonlinear diffusion-reaction benchmark.
pub fn dr_exact(a: f64, x: f64) -> f64 {
    a * (PI * x).sin()
}

/// Forcing that makes `dr_exact` solve -u'' + u^3 - u = f.
pub fn dr_forcing(a: f64, x: f64) -> f64 {
    let s = (PI * x).sin();
    a * (PI * PI - 1.0) * s + (a * s).powi(3)
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rule
// ---------------------------------------------------------------------------

/// Orthonormal Hermite recurrence at z: returns (h_n, h_{n-1}, log rescale
/// exponent). Values grow like exp(z^2/2) towards the outer nodes, so they
/// are rescaled in flight; signs and the h_n/h_{n-1} ratio are unaffected.
fn hermite_pair(n: usize, z: f64) -> (f64, f64, f64) {
    const RESCALE: f64 = 1e150;
    let mut h_km1 = 0.0f64;
    let mut h_k = PI.powf(-0.25);
    let mut log_scale = 0.0;
    for k in 0..n {
        let h_kp1 = z * (2.0 / (k as f64 + 1.0)).sqrt() * h_k
            - ((k as f64) / (k as f64 + 1.0)).sqrt() * h_km1;
        h_km1 = h_k;
        h_k = h_kp1;
        if h_k.abs() > RESCALE {
            h_k /= RESCALE;
            h_km1 /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (h_k, h_km1, log_scale)
}

/// Nodes and weights for n-point Gauss-Hermite quadrature (weight e^{-x^2}).
///
/// Positive roots of h_n are bracketed by a sign scan at a resolution finer
/// than the minimal node spacing pi/sqrt(2n+1), then polished by bisection
/// with Newton steps inside the bracket. Weights come from
/// w = 1/(n h_{n-1}(x)^2); extreme-node weights below f64 range underflow to
/// zero, which the quadrature tolerates.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2);
    let nf = n as f64;
    let upper = (2.0 * nf + 1.0).sqrt() + 0.5;
    let step = 0.4 * PI / (2.0 * nf + 1.0).sqrt();
    let n_scan = (upper / step).ceil() as usize;

    // Scan downward from above the largest root; collect sign-change brackets.
    let mut brackets = Vec::with_capacity(n / 2 + 1);
    let mut prev_x = upper;
    let mut prev_sign = hermite_pair(n, upper).0.signum();
    for i in 1..=n_scan {
        let x = upper - i as f64 * step;
        if x < 0.0 {
            break;
        }
        let s = hermite_pair(n, x).0.signum();
        if s != prev_sign {
            brackets.push((x, prev_x));
            prev_sign = s;
        }
        prev_x = x;
    }
    let m = n / 2;
    assert!(
        brackets.len() >= m,
        "Gauss-Hermite scan found {} brackets, expected at least {m} (n={n})",
        brackets.len()
    );

    let mut pairs = vec![(0.0f64, 0.0f64); n];
    for (i, &(mut lo, mut hi)) in brackets.iter().take(m).enumerate() {
        let sign_hi = hermite_pair(n, hi).0.signum();
        let mut z = 0.5 * (lo + hi);
        let mut h_last = 0.0;
        let mut log_scale = 0.0;
        for _ in 0..200 {
            let (h, hm, ls) = hermite_pair(n, z);
            h_last = hm;
            log_scale = ls;
            if h.signum() == sign_hi {
                hi = z;
            } else {
                lo = z;
            }
            let newton = z - h / ((2.0 * nf).sqrt() * hm);
            let next = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - z).abs() < 1e-15 {
                z = next;
                break;
            }
            z = next;
        }
        let log_w = -(nf.ln() + 2.0 * (h_last.abs().ln() + log_scale));
        let w = log_w.exp();
        pairs[i] = (z, w);
        pairs[n - 1 - i] = (-z, w);
    }
    if n % 2 == 1 {
        let (_, hm, ls) = hermite_pair(n, 0.0);
        let w = (-(nf.ln() + 2.0 * (hm.abs().ln() + ls))).exp();
        pairs[m] = (0.0, w);
    }
    let total: f64 = pairs.iter().map(|&(_, w)| w).sum();
    assert!(
        (total - PI.sqrt()).abs() < 1e-9,
        "Gauss-Hermite rule for n={n} failed its moment check"
    );
    pairs
}

fn gh150() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| gauss_hermite(150))
}

/// 10-point Gauss-Legendre nodes/weights on [-1, 1].
const GL10: [(f64, f64); 10] = [
    (-0.9739065285171717, 0.06667134430868814),
    (-0.8650633666889845, 0.14945134915058059),
    (-0.6794095682990244, 0.21908636251598204),
    (-0.4333953941292472, 0.26926671930999635),
    (-0.14887433898163122, 0.29552422471475287),
    (0.14887433898163122, 0.29552422471475287),
    (0.4333953941292472, 0.26926671930999635),
    (0.6794095682990244, 0.21908636251598204),
    (0.8650633666889845, 0.14945134915058059),
    (0.9739065285171717, 0.06667134430868814),
];

/// Exponent of the Cole-Hopf kernel at eta.
#[inline]
fn kernel_exponent(nu: f64, x: f64, t: f64, eta: f64) -> f64 {
    (1.0 - (PI * eta).cos()) / (2.0 * PI * nu) - (x - eta) * (x - eta) / (4.0 * nu * t)
}

fn viscous_gauss_hermite(nu: f64, x: f64, t: f64, nodes: &[(f64, f64)]) -> Result<f64> {
    let s = 2.0 * (nu * t).sqrt();
    let mut g_max = f64::NEG_INFINITY;
    for &(z, _) in nodes {
        let eta = x - s * z;
        let g = (1.0 - (PI * eta).cos()) / (2.0 * PI * nu);
        if g > g_max {
            g_max = g;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(z, w) in nodes {
        let eta = x - s * z;
        let g = (1.0 - (PI * eta).cos()) / (2.0 * PI * nu);
        let k = w * (g - g_max).exp();
        num += k * (s * z / t);
        den += k;
    }
    if !num.is_finite() || !den.is_finite() || den == 0.0 {
        return Err(Error::Oracle(format!(
            "Gauss-Hermite quadrature degenerate at nu={nu}, x={x}, t={t}; increase the node count"
        )));
    }
    Ok(num / den)
}

fn viscous_panels(nu: f64, x: f64, t: f64) -> Result<f64> {
    // Window where the shifted exponent can exceed exp(-45) of its maximum.
    let half = (4.0 * nu * t * (1.0 / (PI * nu) + 45.0)).sqrt();
    let width = ((2.0 * nu * t).sqrt() / 3.0).clamp(1e-6, 0.02);
    let n_panels = ((2.0 * half / width).ceil() as usize).clamp(8, 40_000);
    let panel_w = 2.0 * half / n_panels as f64;
    let lo = x - half;

    let mut exponents = Vec::with_capacity(n_panels * GL10.len());
    let mut e_max = f64::NEG_INFINITY;
    for p in 0..n_panels {
        let mid = lo + (p as f64 + 0.5) * panel_w;
        for &(gz, _) in GL10.iter() {
            let eta = mid + 0.5 * panel_w * gz;
            let e = kernel_exponent(nu, x, t, eta);
            exponents.push(e);
            if e > e_max {
                e_max = e;
            }
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut idx = 0;
    for p in 0..n_panels {
        let mid = lo + (p as f64 + 0.5) * panel_w;
        for &(gz, gw) in GL10.iter() {
            let eta = mid + 0.5 * panel_w * gz;
            let k = gw * 0.5 * panel_w * (exponents[idx] - e_max).exp();
            num += k * ((x - eta) / t);
            den += k;
            idx += 1;
        }
    }
    if !num.is_finite() || !den.is_finite() || den == 0.0 {
        return Err(Error::Oracle(format!(
            "panel quadrature degenerate at nu={nu}, x={x}, t={t}; increase the node count"
        )));
    }
    Ok(num / den)
}

/// Viscous Burgers solution u(x,t) for u(x,0) = -sin(pi x), u(+-1,t)=0.
pub fn burgers_viscous(nu: f64, x: f64, t: f64) -> Result<f64> {
    burgers_viscous_gh(nu, x, t, 150)
}

/// Same oracle with an explicit Gauss-Hermite node count (the panel fallback
/// ignores it).
pub fn burgers_viscous_gh(nu: f64, x: f64, t: f64, gh_nodes: usize) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::contract(format!("viscous oracle requires nu > 0, got {nu}")));
    }
    if t < 0.0 {
        return Err(Error::contract(format!("viscous oracle requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(-(PI * x).sin());
    }
    if 1.0 / (PI * nu) <= 150.0 {
        if gh_nodes == 150 {
            viscous_gauss_hermite(nu, x, t, gh150())
        } else {
            viscous_gauss_hermite(nu, x, t, &gauss_hermite(gh_nodes))
        }
    } else {
        viscous_panels(nu, x, t)
    }
}

// ---------------------------------------------------------------------------
// Inviscid entropy solution
// ---------------------------------------------------------------------------

/// Breaking time of the inviscid solution: characteristics first cross at
/// t = -1 / min u0'(x) = 1/pi.
pub const SHOCK_FORMATION_TIME: f64 = 1.0 / PI;

/// Entropy solution of u_t + u u_x = 0 with u(x,0) = -sin(pi x).
///
/// Solved along characteristics: on x in (0,1] the foot xi of the
/// characteristic through (x,t) satisfies xi - t sin(pi xi) = x, restricted
/// to the branch right of the stationary shock at x = 0; the solution is
/// u = -sin(pi xi). Odd symmetry handles x < 0, and u(0,t) = 0.
pub fn burgers_inviscid(x: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::contract(format!("inviscid oracle requires t >= 0, got {t}")));
    }
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::contract(format!("inviscid oracle domain is x in [-1,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < 0.0 {
        return Ok(-burgers_inviscid(-x, t)?);
    }
    let x = x.min(1.0);
    if t == 0.0 {
        return Ok(-(PI * x).sin());
    }

    // Left end of the admissible foot interval: for t > 1/pi the positive
    // root of xi = t sin(pi xi) (foot feeding the right side of the shock).
    let foot_lo = if t > SHOCK_FORMATION_TIME {
        // g(xi) = xi - t sin(pi xi) is negative at its interior minimum and
        // reaches 1 at xi = 1; bisect on [argmin, 1].
        let xi_c = (1.0 / (PI * t)).min(1.0).acos() / PI;
        let g = |xi: f64| xi - t * (PI * xi).sin();
        let mut lo = xi_c;
        let mut hi = 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        0.0
    };

    // Solve f(xi) = xi - t sin(pi xi) - x = 0 on [max(foot_lo, x), 1], where
    // f is monotone increasing. Newton with a bisection bracket fallback.
    let f = |xi: f64| xi - t * (PI * xi).sin() - x;
    let df = |xi: f64| 1.0 - PI * t * (PI * xi).cos();
    let mut lo = foot_lo.max(x);
    let mut hi = 1.0;
    if f(lo) > 0.0 {
        // x sits exactly at the shock-side limit within round-off.
        return Ok(-(PI * lo).sin());
    }
    let mut xi = x.max(foot_lo);
    let mut converged = false;
    for _ in 0..100 {
        let fv = f(xi);
        if fv.abs() < 1e-14 {
            converged = true;
            break;
        }
        if fv < 0.0 {
            lo = xi;
        } else {
            hi = xi;
        }
        let d = df(xi);
        let mut next = if d.abs() > 1e-12 { xi - fv / d } else { f64::NAN };
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - xi).abs() < 1e-16 {
            xi = next;
            converged = true;
            break;
        }
        xi = next;
    }
    if !converged && f(xi).abs() > 1e-10 {
        return Err(Error::Oracle(format!(
            "characteristic solve failed to converge at x={x}, t={t}"
        )));
    }
    Ok(-(PI * xi).sin())
}
