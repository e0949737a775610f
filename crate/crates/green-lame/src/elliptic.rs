//! Weierstrass elliptic kernel for the lattice Λ = Z + Z·tau.
//!
//! All five functions (℘, ℘', ℘'', ζ, σ) are evaluated through the odd theta
//! function θ₁ and its first three z-derivatives, whose q-series converge
//! like exp(-π Im(tau) n²) once the argument is reduced to the fundamental
//! cell. Quasi-periodicity is restored exactly from the integer reduction
//! counts. Slowly convergent lattice sums exist only in [`crate::oracle`] as
//! an independent cross-check for the test suite.
//!
//! Conventions, fixed once and used everywhere downstream:
//! * periods ω₁ = 1, ω₂ = tau, ω₃ = 1 + tau; half-period values
//!   e_k = ℘(ω_k/2) keep exactly these labels (no SL(2,Z) reduction of tau
//!   is ever applied — it would silently permute the e_k and change η₁);
//! * ζ(z + ω_i) = ζ(z) + η_i with the Legendre relation η₁·tau - η₂ = 2πi;
//! * θ₁(z) = 2 Σ (-1)^n q^{(n+1/2)²} sin((2n+1)πz), q = exp(iπ·tau), so
//!   σ(z) = exp(η₁ z²/2) θ₁(z)/θ₁'(0) and ζ(z) = η₁ z + θ₁'(z)/θ₁(z).

use crate::{tol, Error, Result, C};
use std::f64::consts::PI;

const I: C = C::new(0.0, 1.0);

/// A point of the torus: complex value plus lattice coordinates (r, s) with
/// z = r + s·tau and r, s ∈ [-1/2, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub z: C,
    pub r: f64,
    pub s: f64,
}

/// Immutable per-torus data: modulus, nome cutoff, quasi-periods, half-period
/// values and the Weierstrass invariants. Construct with [`make_lattice`].
#[derive(Debug, Clone)]
pub struct Lattice {
    tau: C,
    q: C,
    nome_cutoff: usize,
    eta1: C,
    eta2: C,
    e: [C; 3],
    g2: C,
    g3: C,
    theta1_prime0: C,
    area: f64,
    slow_nome: bool,
    green_shift: f64,
}

/// Build the lattice data for `tau` (requires Im tau > 0). The nome cutoff N
/// is the smallest one with |q|^{2N} below the tail bound, floored at 4.
pub fn make_lattice(tau: C) -> Result<Lattice> {
    Lattice::new(tau)
}

impl Lattice {
    pub fn new(tau: C) -> Result<Self> {
        let b = tau.im;
        if !(b > 0.0) || !tau.re.is_finite() {
            return Err(Error::InvalidTau(tau));
        }
        let cutoff = ((-tol::NOME_TAIL.ln()) / (2.0 * PI * b)).ceil() as usize;
        Self::with_cutoff(tau, cutoff.max(4))
    }

    /// Same as [`Lattice::new`] but with an explicit nome cutoff override.
    pub fn with_cutoff(tau: C, nome_cutoff: usize) -> Result<Self> {
        let b = tau.im;
        if !(b > 0.0) || !tau.re.is_finite() {
            return Err(Error::InvalidTau(tau));
        }
        let q = (I * PI * tau).exp();
        let mut lat = Lattice {
            tau,
            q,
            nome_cutoff,
            eta1: C::new(0.0, 0.0),
            eta2: C::new(0.0, 0.0),
            e: [C::new(0.0, 0.0); 3],
            g2: C::new(0.0, 0.0),
            g3: C::new(0.0, 0.0),
            theta1_prime0: C::new(0.0, 0.0),
            area: b,
            slow_nome: q.norm() > tol::SLOW_NOME,
            green_shift: 0.0,
        };
        let t0 = lat.theta_bundle(C::new(0.0, 0.0));
        lat.theta1_prime0 = t0.d1;
        lat.eta1 = -t0.d3 / (3.0 * t0.d1);
        lat.eta2 = lat.eta1 * tau - 2.0 * PI * I;
        for k in 0..3 {
            lat.e[k] = lat.wp_unchecked(lat.omega(k + 1) / 2.0);
        }
        let [e1, e2, e3] = lat.e;
        lat.g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1);
        lat.g3 = 4.0 * e1 * e2 * e3;
        Ok(lat)
    }

    /// Diagnostic knob: evaluate G with an additive constant. Every quantity
    /// the crate reports is invariant under it (tested), so the default 0 is
    /// as good as the ∫G = 0 normalization.
    pub fn with_green_shift(mut self, shift: f64) -> Self {
        self.green_shift = shift;
        self
    }

    pub fn tau(&self) -> C {
        self.tau
    }
    /// Period ω_k for k = 1, 2, 3 (ω₁ = 1, ω₂ = tau, ω₃ = 1 + tau).
    pub fn omega(&self, k: usize) -> C {
        match k {
            1 => C::new(1.0, 0.0),
            2 => self.tau,
            3 => self.tau + 1.0,
            _ => panic!("omega index must be 1, 2 or 3"),
        }
    }
    pub fn half_period(&self, k: usize) -> C {
        self.omega(k) / 2.0
    }
    pub fn e(&self, k: usize) -> C {
        self.e[k - 1]
    }
    pub fn g2(&self) -> C {
        self.g2
    }
    pub fn g3(&self) -> C {
        self.g3
    }
    pub fn eta(&self, k: usize) -> C {
        match k {
            1 => self.eta1,
            2 => self.eta2,
            _ => panic!("eta index must be 1 or 2"),
        }
    }
    pub fn nome(&self) -> C {
        self.q
    }
    pub fn nome_cutoff(&self) -> usize {
        self.nome_cutoff
    }
    /// |E| = Im tau.
    pub fn area(&self) -> f64 {
        self.area
    }
    /// True when |q| > 0.9; evaluation still works but converges slowly.
    pub fn slow_nome(&self) -> bool {
        self.slow_nome
    }
    pub fn green_shift(&self) -> f64 {
        self.green_shift
    }

    /// Reduce z to the fundamental cell: r, s ∈ [-1/2, 1/2).
    pub fn reduce(&self, z: C) -> TorusPoint {
        let (zr, r, s, _, _) = self.reduce_full(z);
        TorusPoint { z: zr, r, s }
    }

    pub(crate) fn reduce_full(&self, z: C) -> (C, f64, f64, i64, i64) {
        let s_raw = z.im / self.tau.im;
        let r_raw = z.re - s_raw * self.tau.re;
        let m = (r_raw + 0.5).floor();
        let n = (s_raw + 0.5).floor();
        let r = r_raw - m;
        let s = s_raw - n;
        (C::new(r, 0.0) + s * self.tau, r, s, m as i64, n as i64)
    }

    /// Distance from z to the nearest lattice point.
    pub fn dist_to_lattice(&self, z: C) -> f64 {
        self.torus_dist(z, C::new(0.0, 0.0))
    }

    /// Distance between the images of u and v on the torus.
    pub fn torus_dist(&self, u: C, v: C) -> f64 {
        let (d, ..) = self.reduce_full(u - v);
        let mut best = f64::INFINITY;
        for m in -1..=1 {
            for n in -1..=1 {
                let cand = (d + m as f64 + n as f64 * self.tau).norm();
                if cand < best {
                    best = cand;
                }
            }
        }
        best
    }

    /// θ₁ and its first three z-derivatives at z (expects |Im z| ≲ Im tau).
    /// Terms are assembled from exp(iπ tau (n+1/2)² ± i(2n+1)πz) so no
    /// intermediate factor can overflow.
    pub(crate) fn theta_bundle(&self, z: C) -> Theta {
        let mut t = Theta::default();
        let mut sign = 1.0;
        for n in 0..=self.nome_cutoff {
            let h = n as f64 + 0.5;
            let m = (2 * n + 1) as f64 * PI;
            let base = I * PI * self.tau * (h * h);
            let wp = (base + I * m * z).exp();
            let wm = (base - I * m * z).exp();
            let diff = wp - wm;
            let sum = wp + wm;
            t.d0 += sign * diff;
            t.d1 += sign * m * sum;
            t.d2 += sign * (m * m) * diff;
            t.d3 += sign * (m * m * m) * sum;
            sign = -sign;
        }
        t.d0 *= -I;
        t.d2 *= I;
        t.d3 = -t.d3;
        t
    }

    fn require_off_lattice(&self, z: C, min: f64) -> Result<()> {
        let dist = self.dist_to_lattice(z);
        if dist < min {
            Err(Error::NearPole { dist, min })
        } else {
            Ok(())
        }
    }

    /// ℘(z). Errors within [`tol::POLE_DISTANCE`] of a lattice point.
    pub fn wp(&self, z: C) -> Result<C> {
        self.require_off_lattice(z, tol::POLE_DISTANCE)?;
        Ok(self.wp_unchecked(z))
    }

    /// ℘'(z).
    pub fn wp_prime(&self, z: C) -> Result<C> {
        self.require_off_lattice(z, tol::POLE_DISTANCE)?;
        Ok(self.wp_prime_unchecked(z))
    }

    /// ℘''(z), via the differentiated cubic ℘'' = 6℘² - g₂/2.
    pub fn wp_pp(&self, z: C) -> Result<C> {
        self.require_off_lattice(z, tol::POLE_DISTANCE)?;
        Ok(self.wp_pp_unchecked(z))
    }

    /// ζ(z).
    pub fn zeta(&self, z: C) -> Result<C> {
        self.require_off_lattice(z, tol::POLE_DISTANCE)?;
        Ok(self.zeta_unchecked(z))
    }

    /// σ(z). Entire; returns exactly 0 on the lattice.
    pub fn sigma(&self, z: C) -> C {
        let (z0, _, _, m, n) = self.reduce_full(z);
        if self.dist_to_lattice(z0) < 1e-15 {
            return C::new(0.0, 0.0);
        }
        let s0 = (self.eta1 * z0 * z0 / 2.0).exp() * self.theta_bundle(z0).d0 / self.theta1_prime0;
        let eta = m as f64 * self.eta1 + n as f64 * self.eta2;
        let sign = if (m + n + m * n) % 2 == 0 { 1.0 } else { -1.0 };
        sign * s0 * (eta * (z0 + (m as f64 + n as f64 * self.tau) / 2.0)).exp()
    }

    pub(crate) fn wp_unchecked(&self, z: C) -> C {
        let (z0, ..) = self.reduce_full(z);
        let t = self.theta_bundle(z0);
        -self.eta1 - (t.d2 * t.d0 - t.d1 * t.d1) / (t.d0 * t.d0)
    }

    pub(crate) fn wp_prime_unchecked(&self, z: C) -> C {
        let (z0, ..) = self.reduce_full(z);
        let t = self.theta_bundle(z0);
        let l1 = t.d1 / t.d0;
        -(t.d3 / t.d0 - 3.0 * t.d2 * t.d1 / (t.d0 * t.d0) + 2.0 * l1 * l1 * l1)
    }

    pub(crate) fn wp_pp_unchecked(&self, z: C) -> C {
        let w = self.wp_unchecked(z);
        6.0 * w * w - self.g2 / 2.0
    }

    pub(crate) fn zeta_unchecked(&self, z: C) -> C {
        let (z0, _, _, m, n) = self.reduce_full(z);
        let t = self.theta_bundle(z0);
        self.eta1 * z0 + t.d1 / t.d0 + m as f64 * self.eta1 + n as f64 * self.eta2
    }

    /// k-th z-derivative of ℘ for k >= 0, through the polynomial recursion
    /// ℘^{(k)} = A_k(℘) + B_k(℘) ℘' induced by ℘'² = 4℘³ - g₂℘ - g₃.
    pub fn wp_derivative(&self, k: usize, z: C) -> Result<C> {
        self.require_off_lattice(z, tol::POLE_DISTANCE)?;
        let w = self.wp_unchecked(z);
        let w1 = self.wp_prime_unchecked(z);
        let (pa, pb) = wp_derivative_poly(k, self.g2, self.g3);
        Ok(eval_poly(&pa, w) + eval_poly(&pb, w) * w1)
    }
}

/// θ₁ and derivatives bundle.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Theta {
    pub d0: C,
    pub d1: C,
    pub d2: C,
    pub d3: C,
}

fn eval_poly(p: &[C], x: C) -> C {
    let mut acc = C::new(0.0, 0.0);
    for &c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Coefficients (A_k, B_k) with ℘^{(k)} = A_k(℘) + B_k(℘)·℘'.
fn wp_derivative_poly(k: usize, g2: C, g3: C) -> (Vec<C>, Vec<C>) {
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    // start: ℘^{(0)} = ℘
    let mut a = vec![zero, one];
    let mut b = vec![zero];
    for _ in 0..k {
        // d/dz [A(℘) + B(℘)℘'] = A'℘' + B'(4℘³ - g₂℘ - g₃) + B(6℘² - g₂/2)
        let da = diff_poly(&a);
        let db = diff_poly(&b);
        // new A = B' * cubic + B * (6x² - g₂/2)
        let cubic = [-g3, -g2, zero, 4.0 * one];
        let mut na = poly_mul(&db, &cubic);
        let quad = [-g2 / 2.0, zero, 6.0 * one];
        let t = poly_mul(&b, &quad);
        poly_add(&mut na, &t);
        let nb = da;
        a = na;
        b = nb;
    }
    (a, b)
}

fn diff_poly(p: &[C]) -> Vec<C> {
    if p.len() <= 1 {
        return vec![];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

fn poly_mul(p: &[C], q: &[C]) -> Vec<C> {
    if p.is_empty() || q.is_empty() {
        return vec![];
    }
    let mut out = vec![C::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, &pi) in p.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

fn poly_add(p: &mut Vec<C>, q: &[C]) {
    if q.len() > p.len() {
        p.resize(q.len(), C::new(0.0, 0.0));
    }
    for (i, &qi) in q.iter().enumerate() {
        p[i] += qi;
    }
}

/// LHS - RHS of the zeta addition formula
/// ζ(u+v) - ζ(u) - ζ(v) = (℘'(u) - ℘'(v)) / (2(℘(u) - ℘(v))).
pub fn addition_defect(u: C, v: C, lat: &Lattice) -> Result<C> {
    let wu = lat.wp(u)?;
    let wv = lat.wp(v)?;
    let denom = wu - wv;
    let scale = wu.norm().max(wv.norm()).max(1.0);
    if denom.norm() < 1e-12 * scale {
        return Err(Error::Degenerate(format!(
            "℘(u) = ℘(v) = {wu} makes the addition formula singular"
        )));
    }
    let lhs = lat.zeta(u + v)? - lat.zeta(u)? - lat.zeta(v)?;
    let rhs = 0.5 * (lat.wp_prime(u)? - lat.wp_prime(v)?) / denom;
    Ok(lhs - rhs)
}
