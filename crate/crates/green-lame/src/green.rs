//! The torus Green function G, its regular part, analytic gradient and
//! Hessian, and the multiple Green function G_n.
//!
//! G is realized as G(z) = -(1/2π) log|θ₁(z)| + (Im z)²/(2 Im tau), which
//! solves -ΔG = δ₀ - 1/|E| and is exactly doubly periodic. The ∫G = 0
//! constant is not added: every quantity derived downstream is invariant
//! under G ↦ G + κ (see the normalization-independence test), and the
//! optional shift on [`Lattice`] exercises exactly that.
//!
//! Derivatives come from differentiating
//!   -4π ∂G/∂z = ζ(z) - z η₁ + 2πi s,   z = r + s·tau,
//! with the bookkeeping ∇G = (G_x, G_y), G_z = (G_x - i G_y)/2. Note the
//! trace: away from 0, ΔG = G_xx + G_yy = +1/Im tau (the +1/|E| background
//! charge), which pins the sign of the whole Hessian convention.

use crate::lame::Configuration;
use crate::{tol, Error, Result, C};
use std::f64::consts::PI;

/// Symmetric 2x2 Hessian of G at a point.
#[derive(Debug, Clone, Copy)]
pub struct GreenHessian {
    pub m: [[f64; 2]; 2],
}

impl GreenHessian {
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }
}

fn require_off_lattice(lat: &crate::Lattice, z: C) -> Result<()> {
    let dist = lat.dist_to_lattice(z);
    if dist < tol::GREEN_POLE_DISTANCE {
        return Err(Error::NearPole { dist, min: tol::GREEN_POLE_DISTANCE });
    }
    Ok(())
}

/// G(z) up to the global additive constant.
pub fn green(z: C, lat: &crate::Lattice) -> Result<f64> {
    require_off_lattice(lat, z)?;
    let p = lat.reduce(z);
    let t = lat.theta_bundle(p.z);
    Ok(-t.d0.norm().ln() / (2.0 * PI) + p.z.im * p.z.im / (2.0 * lat.area()) + lat.green_shift())
}

/// ∇G = (G_x, G_y).
pub fn green_grad(z: C, lat: &crate::Lattice) -> Result<[f64; 2]> {
    require_off_lattice(lat, z)?;
    let p = lat.reduce(z);
    let w = lat.zeta_unchecked(p.z) - lat.eta(1) * p.z; // (log θ₁)'
    Ok([
        -w.re / (2.0 * PI),
        (w.im + 2.0 * PI * p.s) / (2.0 * PI),
    ])
}

/// D²G as a symmetric 2x2 matrix; trace(D²G) = 1/Im tau away from 0.
pub fn green_hess(z: C, lat: &crate::Lattice) -> Result<GreenHessian> {
    require_off_lattice(lat, z)?;
    let w = -lat.wp_unchecked(z) - lat.eta(1); // (log θ₁)''
    let (u, v) = (w.re, w.im);
    Ok(GreenHessian {
        m: [
            [-u / (2.0 * PI), v / (2.0 * PI)],
            [v / (2.0 * PI), u / (2.0 * PI) + 1.0 / lat.area()],
        ],
    })
}

/// Regular part G̃(z, w) = G(z - w) + (1/2π) log|z - w|, finite at z = w.
pub fn regular_part(z: C, w: C, lat: &crate::Lattice) -> f64 {
    let d = z - w;
    if lat.dist_to_lattice(d) < 1e-14 {
        return robin_constant(lat);
    }
    let p = lat.reduce(d);
    let t = lat.theta_bundle(p.z);
    -t.d0.norm().ln() / (2.0 * PI) + p.z.im * p.z.im / (2.0 * lat.area()) + lat.green_shift()
        + d.norm().ln() / (2.0 * PI)
}

/// G̃(w, w): on a flat torus the coincidence value is position independent.
pub fn robin_constant(lat: &crate::Lattice) -> f64 {
    let t = lat.theta_bundle(C::new(0.0, 0.0));
    -t.d1.norm().ln() / (2.0 * PI) + lat.green_shift()
}

/// G_n(a) = Σ_{i<j} G(a_i - a_j) - n Σ_i G(a_i).
pub fn multiple_green(a: &Configuration, lat: &crate::Lattice) -> Result<f64> {
    let v = a.values();
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += green(v[i] - v[j], lat)?;
        }
        s -= n as f64 * green(v[i], lat)?;
    }
    Ok(s)
}

/// Blockwise gradient: ∇_i G_n = Σ_{j≠i} ∇G(a_i - a_j) - n ∇G(a_i).
pub fn multiple_green_grad(a: &Configuration, lat: &crate::Lattice) -> Result<Vec<[f64; 2]>> {
    let v = a.values();
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut g = [0.0, 0.0];
        for j in 0..n {
            if j != i {
                let d = green_grad(v[i] - v[j], lat)?;
                g[0] += d[0];
                g[1] += d[1];
            }
        }
        let d = green_grad(v[i], lat)?;
        g[0] -= n as f64 * d[0];
        g[1] -= n as f64 * d[1];
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_lattice;

    #[test]
    fn even_and_periodic() {
        let tau = C::new(0.3, 1.2);
        let lat = make_lattice(tau).unwrap();
        for z in [C::new(0.21, 0.4), C::new(-0.37, 0.81), C::new(0.11, 0.05)] {
            let g = green(z, &lat).unwrap();
            assert!((g - green(-z, &lat).unwrap()).abs() < 1e-12);
            assert!((g - green(z + 1.0, &lat).unwrap()).abs() < 1e-10);
            assert!((g - green(z + tau, &lat).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn log_singularity_coefficient() {
        // G(z) + (1/2π) log|z| stays bounded as z -> 0
        let lat = make_lattice(C::new(0.0, 1.0)).unwrap();
        let mut vals = vec![];
        for eps in [1e-2, 1e-3, 1e-4] {
            let z = C::new(eps, eps / 3.0);
            vals.push(green(z, &lat).unwrap() + z.norm().ln() / (2.0 * PI));
        }
        assert!((vals[0] - vals[2]).abs() < 1e-3);
        assert!((vals[1] - vals[2]).abs() < 1e-5);
        // and the bounded value is the Robin constant in the limit
        assert!((vals[2] - robin_constant(&lat)).abs() < 1e-6);
    }

    #[test]
    fn gradient_vanishes_at_half_periods_and_is_odd() {
        let lat = make_lattice(C::new(0.3, 1.2)).unwrap();
        for k in 1..=3 {
            let g = green_grad(lat.half_period(k), &lat).unwrap();
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12, "k={k}: {g:?}");
        }
        let z = C::new(0.23, 0.31);
        let gp = green_grad(z, &lat).unwrap();
        let gm = green_grad(-z, &lat).unwrap();
        assert!((gp[0] + gm[0]).abs() < 1e-12 && (gp[1] + gm[1]).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let tau = C::new(0.25, 1.3);
        let lat = make_lattice(tau).unwrap();
        let h = 1e-5;
        for z in [C::new(0.21, 0.4), C::new(-0.32, 0.77), C::new(0.4, 0.15)] {
            let g = green_grad(z, &lat).unwrap();
            // Richardson-extrapolated central differences
            let fd = |dz: C| {
                let d1 = (green(z + dz, &lat).unwrap() - green(z - dz, &lat).unwrap()) / (2.0 * dz.norm());
                let d2 = (green(z + dz / 2.0, &lat).unwrap() - green(z - dz / 2.0, &lat).unwrap()) / dz.norm();
                (4.0 * d2 - d1) / 3.0
            };
            let gx = fd(C::new(h, 0.0));
            let gy = fd(C::new(0.0, h));
            assert!((g[0] - gx).abs() < 1e-8 && (g[1] - gy).abs() < 1e-8);
        }
    }

    #[test]
    fn hessian_trace_and_finite_differences() {
        let tau = C::new(0.3, 1.2);
        let lat = make_lattice(tau).unwrap();
        let h = 1e-5;
        for z in [C::new(0.21, 0.4), C::new(-0.32, 0.77)] {
            let hm = green_hess(z, &lat).unwrap();
            assert!((hm.trace() - 1.0 / lat.area()).abs() < 1e-10);
            assert_eq!(hm.m[0][1], hm.m[1][0]);
            let gxp = green_grad(z + C::new(h, 0.0), &lat).unwrap();
            let gxm = green_grad(z - C::new(h, 0.0), &lat).unwrap();
            let gyp = green_grad(z + C::new(0.0, h), &lat).unwrap();
            let gym = green_grad(z - C::new(0.0, h), &lat).unwrap();
            let fd = [
                (gxp[0] - gxm[0]) / (2.0 * h),
                (gyp[0] - gym[0]) / (2.0 * h),
                (gyp[1] - gym[1]) / (2.0 * h),
            ];
            assert!((hm.m[0][0] - fd[0]).abs() < 1e-7);
            assert!((hm.m[0][1] - fd[1]).abs() < 1e-7);
            assert!((hm.m[1][1] - fd[2]).abs() < 1e-7);
        }
    }

    #[test]
    fn hessian_determinant_closed_form_at_half_periods() {
        // det D²G(ω_i/2) = -(1/4π²)(|e_i + η₁|² - (2π/Im tau) Re(e_i + η₁))
        let lat = make_lattice(C::new(0.3, 1.2)).unwrap();
        for k in 1..=3 {
            let det = green_hess(lat.half_period(k), &lat).unwrap().det();
            let w = lat.e(k) + lat.eta(1);
            let closed =
                -(w.norm_sqr() - 2.0 * PI / lat.area() * w.re) / (4.0 * PI * PI);
            assert!((det - closed).abs() < 1e-9 * closed.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn multiple_green_reduces_to_minus_green_for_n1() {
        let lat = make_lattice(C::new(0.0, 1.1)).unwrap();
        let z = C::new(0.4, 0.31);
        let a = Configuration::new(vec![z], &lat).unwrap();
        assert!((multiple_green(&a, &lat).unwrap() + green(z, &lat).unwrap()).abs() < 1e-14);
        let g1 = multiple_green_grad(&a, &lat).unwrap()[0];
        let g = green_grad(z, &lat).unwrap();
        assert!((g1[0] + g[0]).abs() < 1e-14 && (g1[1] + g[1]).abs() < 1e-14);
    }

    #[test]
    fn multiple_green_permutation_invariant() {
        let lat = make_lattice(C::new(0.3, 1.2)).unwrap();
        let z1 = C::new(0.14, 0.31);
        let z2 = C::new(-0.27, 0.65);
        let a = Configuration::new(vec![z1, z2], &lat).unwrap();
        let b = Configuration::new(vec![z2, z1], &lat).unwrap();
        assert!(
            (multiple_green(&a, &lat).unwrap() - multiple_green(&b, &lat).unwrap()).abs() < 1e-14
        );
    }

    #[test]
    fn regular_part_symmetric_and_continuous() {
        let lat = make_lattice(C::new(0.3, 1.2)).unwrap();
        let (z, w) = (C::new(0.21, 0.33), C::new(-0.14, 0.72));
        assert!((regular_part(z, w, &lat) - regular_part(w, z, &lat)).abs() < 1e-13);
        let d = regular_part(z, w, &lat)
            - green(z - w, &lat).unwrap()
            - (z - w).norm().ln() / (2.0 * PI);
        assert!(d.abs() < 1e-13);
        // limit onto the diagonal
        let exact = regular_part(w, w, &lat);
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
            let v = regular_part(w + C::new(eps, 0.0), w, &lat);
            let err = (v - exact).abs();
            assert!(err < prev.max(1e-6));
            prev = err;
        }
        assert!(prev < 1e-6);
    }
}
