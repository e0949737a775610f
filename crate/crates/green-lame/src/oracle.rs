//! Slow, direct lattice sums. These exist purely as independent oracles for
//! the test suite; the production path in [`crate::elliptic`] never calls
//! them. Convergence is only polynomial in the truncation radius, which is
//! the point: they share no code and no series with the theta route.

use crate::C;

fn lattice_points(tau: C, radius: f64) -> impl Iterator<Item = C> {
    // enough (m, n) to cover |m + n tau| <= radius
    let b = tau.im;
    let m_max = (radius * (1.0 + tau.re.abs() / b)).ceil() as i64 + 2;
    let n_max = (radius / b).ceil() as i64 + 2;
    (-m_max..=m_max).flat_map(move |m| {
        (-n_max..=n_max).filter_map(move |n| {
            if m == 0 && n == 0 {
                return None;
            }
            let w = C::new(m as f64, 0.0) + n as f64 * tau;
            (w.norm_sqr() <= radius * radius).then_some(w)
        })
    })
}

/// g₂ = 60 Σ' ω^{-4} truncated at |ω| <= radius. Tail is O(radius^{-2}).
pub fn g2_lattice_sum(tau: C, radius: f64) -> C {
    let mut s = C::new(0.0, 0.0);
    for w in lattice_points(tau, radius) {
        let w2 = w * w;
        s += 1.0 / (w2 * w2);
    }
    60.0 * s
}

/// g₃ = 140 Σ' ω^{-6} truncated at |ω| <= radius. Tail is O(radius^{-4}).
pub fn g3_lattice_sum(tau: C, radius: f64) -> C {
    let mut s = C::new(0.0, 0.0);
    for w in lattice_points(tau, radius) {
        let w2 = w * w;
        s += 1.0 / (w2 * w2 * w2);
    }
    140.0 * s
}

/// ℘(z) by the defining sum 1/z² + Σ' [1/(z-ω)² - 1/ω²]. Tail is O(radius^{-1}),
/// so expect no better than a couple of digits at practical radii.
pub fn wp_lattice_sum(z: C, tau: C, radius: f64) -> C {
    let mut s = 1.0 / (z * z);
    for w in lattice_points(tau, radius) {
        let d = z - w;
        s += 1.0 / (d * d) - 1.0 / (w * w);
    }
    s
}
