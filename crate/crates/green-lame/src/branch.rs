//! Branch points of Y_n — the trivial critical points of G_n — together
//! with their pairing structure, tangent data and the constant e^c that
//! turns K(z) into e^c Π |℘(z) - ℘(p_i)|^{-2}.
//!
//! A branch point is stored with 2-torsion entries first and ± pairs as
//! adjacent entries (q_l, -q_l). The tangent vector c⃗ is the coefficient
//! vector of the partial-fraction expansion
//!   P_p(z) = Π (℘(z) - ℘(p_i))^{-1} = Σ c_j ℘(z - p_j) + c₀,
//! and simultaneously 2·a'(0) for the curve parametrized by C near p.

use crate::lame::{zeta_constraints_raw, Configuration};
use crate::{green, lame, tol, Error, Lattice, Result, C};
use std::f64::consts::PI;

/// How a symmetric configuration {p} = {-p} is assembled: a subset of the
/// three half-periods plus some number of ± pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchTemplate {
    /// half-period labels in {1, 2, 3}, each at most once
    pub half_periods: Vec<usize>,
    pub pairs: usize,
}

impl BranchTemplate {
    pub fn n(&self) -> usize {
        self.half_periods.len() + 2 * self.pairs
    }

    pub fn label(&self) -> String {
        let mut s = String::new();
        if !self.half_periods.is_empty() {
            s.push_str("hp");
            for k in &self.half_periods {
                s.push_str(&k.to_string());
            }
        }
        for _ in 0..self.pairs {
            if !s.is_empty() {
                s.push('-');
            }
            s.push_str("pair");
        }
        s
    }
}

/// A branch point of Y_n with everything the invariant formulas consume.
#[derive(Debug, Clone)]
pub struct BranchPointData {
    pub config: Configuration,
    /// indices of 2-torsion entries (0-based)
    pub lambda2: Vec<usize>,
    /// pairing[i] = Some(i*) with p_{i*} = -p_i for non-torsion entries
    pub pairing: Vec<Option<usize>>,
    pub c_vec: Vec<C>,
    pub c0: C,
    pub c_sum: C,
    pub exp_c: f64,
    pub b: C,
    pub singular: bool,
    pub label: String,
}

/// All branch points for n = 1 (three half-periods) or n = 2 (three
/// half-period pairs plus the two ℘(q) = ±sqrt(g2/12) pairs, which merge
/// into one flagged point on singular tori).
pub fn enumerate_branch_points(n: usize, lat: &Lattice) -> Result<Vec<BranchPointData>> {
    match n {
        1 => (1..=3)
            .map(|k| {
                finish_branch_point(
                    vec![lat.half_period(k)],
                    format!("hp{k}"),
                    false,
                    lat,
                )
            })
            .collect(),
        2 => {
            let mut out = Vec::with_capacity(5);
            for (i, j) in [(1, 2), (1, 3), (2, 3)] {
                out.push(finish_branch_point(
                    vec![lat.half_period(i), lat.half_period(j)],
                    format!("hp{i}{j}"),
                    false,
                    lat,
                )?);
            }
            let w = (lat.g2() / 12.0).sqrt();
            let e_max = (1..=3).map(|k| lat.e(k).norm()).fold(0.0, f64::max);
            let singular = w.norm() < tol::SINGULAR_WP_REL * e_max;
            let roots = solve_wp_square_equation(lat)?;
            if singular {
                // the two families coincide up to numerical noise; report once
                let q = roots
                    .first()
                    .ok_or_else(|| Error::NoConvergence { iterations: tol::NEWTON_MAX_ITER, residual: f64::NAN })?;
                out.push(finish_branch_point(vec![*q, -q], "q-merged".into(), true, lat)?);
            } else {
                for (sign, label) in [(1.0, "qp"), (-1.0, "qm")] {
                    let q = roots
                        .iter()
                        .find(|&&q| {
                            let v = lat.wp_unchecked(q);
                            (v - sign * w).norm() < (v + sign * w).norm()
                        })
                        .ok_or_else(|| Error::NoConvergence { iterations: tol::NEWTON_MAX_ITER, residual: f64::NAN })?;
                    out.push(finish_branch_point(vec![*q, -q], label.into(), false, lat)?);
                }
            }
            Ok(out)
        }
        _ => Err(Error::UnsupportedN(n)),
    }
}

/// Newton on ℘(q)² - g2/12 = 0 from a 16-point grid of starts; dedup by
/// torus distance treating q and -q as the same configuration.
fn solve_wp_square_equation(lat: &Lattice) -> Result<Vec<C>> {
    let target = lat.g2() / 12.0;
    let mut roots: Vec<C> = Vec::new();
    let scale = lat.g2().norm().max(1.0);
    for r in [0.13, 0.29, 0.37, 0.43] {
        for s in [0.11, 0.21, 0.33, 0.41] {
            let mut q = C::new(r, 0.0) + s * lat.tau();
            let mut ok = false;
            for _ in 0..tol::NEWTON_MAX_ITER {
                if lat.dist_to_lattice(q) < tol::POLE_DISTANCE {
                    break;
                }
                let w = lat.wp_unchecked(q);
                let f = w * w - target;
                if f.norm() < 1e-13 * scale {
                    ok = true;
                    break;
                }
                let d = 2.0 * w * lat.wp_prime_unchecked(q);
                if d.norm() < 1e-14 {
                    break;
                }
                q -= f / d;
            }
            if ok
                && lat.dist_to_lattice(q) > tol::POLE_DISTANCE
                && lat.dist_to_lattice(2.0 * q) > tol::PAIR_DETECT
                && !roots.iter().any(|&r0| {
                    lat.torus_dist(q, r0) < tol::DEDUP_DISTANCE
                        || lat.torus_dist(q, -r0) < tol::DEDUP_DISTANCE
                })
            {
                roots.push(lat.reduce(q).z);
            }
        }
    }
    if roots.is_empty() {
        return Err(Error::NoConvergence { iterations: tol::NEWTON_MAX_ITER, residual: f64::NAN });
    }
    Ok(roots)
}

/// Solve the ζ-constraints inside the symmetric ansatz given by `template`,
/// one complex seed per ± pair, by damped Gauss-Newton on the pair
/// representatives (half-period slots are pinned).
pub fn solve_branch_point(
    template: &BranchTemplate,
    seeds: &[C],
    lat: &Lattice,
) -> Result<BranchPointData> {
    if template.n() == 0 {
        return Err(Error::TemplateViolation("empty template".into()));
    }
    if seeds.len() != template.pairs {
        return Err(Error::TemplateViolation(format!(
            "{} seeds for {} pairs",
            seeds.len(),
            template.pairs
        )));
    }
    for (idx, &k) in template.half_periods.iter().enumerate() {
        if !(1..=3).contains(&k) || template.half_periods[..idx].contains(&k) {
            return Err(Error::TemplateViolation("half-period labels must be distinct in 1..=3".into()));
        }
    }
    let h = template.half_periods.len();
    let n = template.n();
    let m = template.pairs;
    let assemble = |qs: &[C]| -> Vec<C> {
        let mut v: Vec<C> = template.half_periods.iter().map(|&k| lat.half_period(k)).collect();
        for &q in qs {
            v.push(q);
            v.push(-q);
        }
        v
    };
    let mut qs = seeds.to_vec();
    let mut residual = f64::INFINITY;
    if m > 0 {
        for _ in 0..tol::NEWTON_MAX_ITER {
            let v = assemble(&qs);
            let f = zeta_constraints_raw(&v, lat)
                .map_err(|e| Error::TemplateViolation(format!("constraint evaluation failed: {e}")))?;
            residual = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if residual < tol::NEWTON_TOL {
                break;
            }
            // reduced Jacobian: column l is (∂/∂q_l) = col(h+2l) - col(h+2l+1)
            let full = lame::g_jacobian_full(&v, lat)
                .map_err(|e| Error::TemplateViolation(format!("jacobian failed: {e}")))?;
            let jred: Vec<Vec<C>> = full
                .iter()
                .map(|row| (0..m).map(|l| row[h + 2 * l] - row[h + 2 * l + 1]).collect())
                .collect();
            // Gauss-Newton least squares via normal equations (m is tiny)
            let mut jtj = vec![vec![C::new(0.0, 0.0); m]; m];
            let mut jtf = vec![C::new(0.0, 0.0); m];
            for row in 0..n - 1 {
                for a in 0..m {
                    jtf[a] += jred[row][a].conj() * f[row];
                    for b in 0..m {
                        jtj[a][b] += jred[row][a].conj() * jred[row][b];
                    }
                }
            }
            let step = crate::linalg::csolve(&jtj, &jtf)?;
            let f0 = f.iter().map(|x| x.norm_sqr()).sum::<f64>();
            let mut lambda = 1.0;
            let mut moved = false;
            for _ in 0..=tol::NEWTON_MAX_HALVINGS {
                let trial: Vec<C> = qs.iter().zip(&step).map(|(q, d)| q - lambda * d).collect();
                if let Ok(ft) = zeta_constraints_raw(&assemble(&trial), lat) {
                    if ft.iter().map(|x| x.norm_sqr()).sum::<f64>() < f0 {
                        qs = trial;
                        moved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !moved {
                return Err(Error::NoConvergence { iterations: tol::NEWTON_MAX_ITER, residual });
            }
        }
    } else {
        let f = zeta_constraints_raw(&assemble(&qs), lat)?;
        residual = f.iter().map(|x| x.norm()).fold(0.0, f64::max);
    }
    if residual >= tol::NEWTON_TOL {
        return Err(Error::NoConvergence { iterations: tol::NEWTON_MAX_ITER, residual });
    }
    // template integrity: no pair may have collapsed onto 2-torsion
    for &q in &qs {
        if lat.dist_to_lattice(2.0 * q) < tol::PAIR_DETECT {
            return Err(Error::TemplateViolation("a pair collapsed onto a half-period".into()));
        }
    }
    finish_branch_point(assemble(&qs), template.label(), false, lat)
}

/// Classify entries into 2-torsion and ± pairs.
pub(crate) fn detect_structure(v: &[C], lat: &Lattice) -> Result<(Vec<usize>, Vec<Option<usize>>)> {
    let n = v.len();
    let mut lambda2 = Vec::new();
    let mut pairing: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    for i in 0..n {
        if lat.dist_to_lattice(2.0 * v[i]) < tol::PAIR_DETECT {
            lambda2.push(i);
            used[i] = true;
        }
    }
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut partner = None;
        for j in 0..n {
            if j != i && !used[j] && lat.torus_dist(v[i], -v[j]) < tol::PAIR_DETECT {
                partner = Some(j);
                break;
            }
        }
        let j = partner.ok_or_else(|| {
            Error::TemplateViolation(format!("entry {} has no ± partner; {{p}} ≠ {{-p}}", i + 1))
        })?;
        pairing[i] = Some(j);
        pairing[j] = Some(i);
        used[i] = true;
        used[j] = true;
    }
    Ok((lambda2, pairing))
}

/// c_i from the expansion of P_p: for 2-torsion entries
/// c_i = 2 ℘''(p_i)^{-1} Π_{j≠i} (℘(p_i) - ℘(p_j))^{-1}, for pair entries
/// c_i = ℘'(p_i)^{-2} Π_{j≠i,i*} (℘(p_i) - ℘(p_j))^{-1}; c₀ = -Σ c_j ℘(p_j).
pub fn tangent_vector(
    v: &[C],
    lambda2: &[usize],
    pairing: &[Option<usize>],
    lat: &Lattice,
) -> Result<(Vec<C>, C, C)> {
    let n = v.len();
    let wp: Vec<C> = v.iter().map(|&z| lat.wp(z)).collect::<Result<_>>()?;
    let scale = wp.iter().map(|w| w.norm()).fold(1.0, f64::max);
    let mut c = vec![C::new(0.0, 0.0); n];
    for i in 0..n {
        if lambda2.contains(&i) {
            let wpp = lat.wp_pp(v[i])?;
            if wpp.norm() < 1e-10 * scale {
                return Err(Error::Degenerate(format!("℘''(p_{}) = 0 at a 2-torsion entry", i + 1)));
            }
            let mut t = 2.0 / wpp;
            for j in 0..n {
                if j != i {
                    t /= wp[i] - wp[j];
                }
            }
            c[i] = t;
        } else {
            let istar = pairing[i].expect("non-torsion entry must be paired");
            let wp1 = lat.wp_prime(v[i])?;
            if wp1.norm() < 1e-10 * scale.sqrt() {
                return Err(Error::Degenerate(format!("℘'(p_{}) = 0 at a pair entry", i + 1)));
            }
            let mut t = 1.0 / (wp1 * wp1);
            for j in 0..n {
                if j != i && j != istar {
                    t /= wp[i] - wp[j];
                }
            }
            c[i] = t;
        }
    }
    let mut c0 = C::new(0.0, 0.0);
    for i in 0..n {
        c0 -= c[i] * wp[i];
    }
    let s: C = c.iter().sum();
    Ok((c, c0, s))
}

fn finish_branch_point(
    v: Vec<C>,
    label: String,
    singular: bool,
    lat: &Lattice,
) -> Result<BranchPointData> {
    let config = Configuration::new(v, lat)?;
    let v = config.values();
    let (lambda2, pairing) = detect_structure(&v, lat)?;
    // branch points are critical points of G_n
    let grad = green::multiple_green_grad(&config, lat)?;
    let gnorm = grad
        .iter()
        .map(|g| (g[0] * g[0] + g[1] * g[1]).sqrt())
        .fold(0.0, f64::max);
    if gnorm > 1e-9 {
        return Err(Error::Inconsistent { what: "∇G_n at claimed branch point", spread: gnorm, tol: 1e-9 });
    }
    let (c_vec, c0, c_sum) = tangent_vector(&v, &lambda2, &pairing, lat)?;
    let (exp_c, _) = exp_c_sampled(&v, lat)?;
    let b = lame::accessory_b(&config, lat)?;
    Ok(BranchPointData {
        config,
        lambda2,
        pairing,
        c_vec,
        c0,
        c_sum,
        exp_c,
        b,
        singular,
        label,
    })
}

/// Π (℘(z) - ℘(p_i))^{-1} with precomputed ℘(p_i); returns the limit 0 on
/// the lattice, where the product vanishes to order 2n.
pub(crate) fn pp_value(z: C, wp_p: &[C], lat: &Lattice) -> C {
    if lat.dist_to_lattice(z) < 1e-9 {
        return C::new(0.0, 0.0);
    }
    let w = lat.wp_unchecked(z);
    let mut t = C::new(1.0, 0.0);
    for &wpi in wp_p {
        t /= w - wpi;
    }
    t
}

impl BranchPointData {
    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub(crate) fn wp_at_points(&self, lat: &Lattice) -> Result<Vec<C>> {
        self.config.values().iter().map(|&z| lat.wp(z)).collect()
    }

    /// Move onto the curve at coordinate C = eps, seeded first order along c⃗.
    pub fn continue_to(&self, eps: C, lat: &Lattice) -> Result<lame::CurvePointData> {
        let v = self.config.values();
        let seed: Vec<C> = v
            .iter()
            .zip(&self.c_vec)
            .map(|(&p, &c)| p + 0.5 * c * eps)
            .collect();
        let seed = Configuration::new(seed, lat)?;
        lame::newton_on_curve(&seed, eps, lat)
    }

    /// Cross-check c⃗ against 2·a'(0) from two-sided continuation with
    /// Richardson elimination; returns the worst relative deviation.
    pub fn validate_tangent(&self, eps: f64, lat: &Lattice) -> Result<f64> {
        let p = self.config.values();
        let sol = |e: C| -> Result<Vec<C>> { Ok(self.continue_to(e, lat)?.config.values()) };
        let a_p = sol(C::new(eps, 0.0))?;
        let a_m = sol(C::new(-eps, 0.0))?;
        let a_p2 = sol(C::new(eps / 2.0, 0.0))?;
        let a_m2 = sol(C::new(-eps / 2.0, 0.0))?;
        let mut worst: f64 = 0.0;
        for i in 0..p.len() {
            // difference on the torus: nearest representative of a_i(e) - a_i(-e)
            let d1 = lat.reduce(a_p[i] - a_m[i]).z / (2.0 * eps);
            let d2 = lat.reduce(a_p2[i] - a_m2[i]).z / eps;
            let deriv = (4.0 * d2 - d1) / 3.0;
            let rel = (2.0 * deriv - self.c_vec[i]).norm() / self.c_vec[i].norm();
            worst = worst.max(rel);
        }
        Ok(worst)
    }

    /// LHS - RHS of the expansion P_p(z) = Σ c_j ℘(z - p_j) + c₀.
    pub fn pp_expansion_defect(&self, z: C, lat: &Lattice) -> Result<C> {
        let v = self.config.values();
        for &pi in &v {
            let d = lat.torus_dist(z, pi).min(lat.torus_dist(z, -pi));
            if d < tol::POLE_DISTANCE {
                return Err(Error::NearPole { dist: d, min: tol::POLE_DISTANCE });
            }
        }
        let lhs = pp_value(z, &self.wp_at_points(lat)?, lat);
        let mut rhs = self.c0;
        for (i, &pi) in v.iter().enumerate() {
            rhs += self.c_vec[i] * lat.wp(z - pi)?;
        }
        Ok(lhs - rhs)
    }

    /// Residue of P_p at p_i by a trapezoid contour integral (radius 1e-2);
    /// vanishes because the expansion has no simple-pole part.
    pub fn pp_residue(&self, i: usize, lat: &Lattice) -> Result<C> {
        let v = self.config.values();
        let wp_p = self.wp_at_points(lat)?;
        let r = 1e-2;
        let m = 64;
        let mut acc = C::new(0.0, 0.0);
        for k in 0..m {
            let ang = 2.0 * PI * k as f64 / m as f64;
            let e = C::from_polar(1.0, ang);
            acc += pp_value(v[i] + r * e, &wp_p, lat) * e;
        }
        Ok(acc * r / m as f64)
    }

    /// Σ c_j ℘^{(k)}(-p_j) for k = 1..2n-1: the vanishing-order constraints
    /// of P_p at z = 0.
    pub fn derivative_constraints(&self, lat: &Lattice) -> Result<Vec<C>> {
        let v = self.config.values();
        let n = v.len();
        let mut out = Vec::with_capacity(2 * n - 1);
        for k in 1..2 * n {
            let mut t = C::new(0.0, 0.0);
            for (j, &pj) in v.iter().enumerate() {
                t += self.c_vec[j] * lat.wp_derivative(k, -pj)?;
            }
            out.push(t);
        }
        Ok(out)
    }

    /// μ_i = exp(8π (G̃(p_i, p_i) + Σ_{j≠i} G(p_i - p_j) - n G(p_i))).
    pub fn mu(&self, lat: &Lattice) -> Result<Vec<f64>> {
        let v = self.config.values();
        let n = v.len();
        let robin = green::robin_constant(lat);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut t = robin - n as f64 * green::green(v[i], lat)?;
            for j in 0..n {
                if j != i {
                    t += green::green(v[i] - v[j], lat)?;
                }
            }
            out.push((8.0 * PI * t).exp());
        }
        Ok(out)
    }
}

/// e^c from the constancy of K(z) Π |℘(z) - ℘(p_i)|², sampled at 12
/// well-separated deterministic points; returns (geometric mean, spread of
/// the logs). A large spread means p is not actually a branch point.
pub fn exp_c(p: &BranchPointData, lat: &Lattice) -> Result<f64> {
    Ok(exp_c_sampled(&p.config.values(), lat)?.0)
}

pub(crate) fn exp_c_sampled(v: &[C], lat: &Lattice) -> Result<(f64, f64)> {
    let n = v.len();
    let wp_p: Vec<C> = v.iter().map(|&z| lat.wp(z)).collect::<Result<_>>()?;
    let mut logs = Vec::with_capacity(12);
    let mut min_sep = 0.12 * lat.area().min(1.0);
    'outer: for _ in 0..3 {
        logs.clear();
        // Kronecker low-discrepancy offsets in lattice coordinates
        let (ar, asx) = (0.754_877_666_2_f64, 0.569_840_291_0_f64);
        for j in 1..=96 {
            let r = (0.5 + ar * j as f64).fract() - 0.5;
            let s = (0.5 + asx * j as f64).fract() - 0.5;
            let z = C::new(r, 0.0) + s * lat.tau();
            if lat.dist_to_lattice(z) < min_sep {
                continue;
            }
            if v.iter().any(|&pi| {
                lat.torus_dist(z, pi).min(lat.torus_dist(z, -pi)) < min_sep
            }) {
                continue;
            }
            let mut lk = -(n as f64) * green::green(z, lat)?;
            for &pj in v {
                lk += green::green(z - pj, lat)?;
            }
            let mut lp = 0.0;
            let w = lat.wp_unchecked(z);
            for &wpi in &wp_p {
                lp += 2.0 * (w - wpi).norm().ln();
            }
            logs.push(8.0 * PI * lk + lp);
            if logs.len() == 12 {
                break 'outer;
            }
        }
        min_sep *= 0.5;
    }
    if logs.len() < 12 {
        return Err(Error::Inconsistent { what: "e^c sample census", spread: logs.len() as f64, tol: 12.0 });
    }
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let spread = logs.iter().map(|l| (l - mean).abs()).fold(0.0, f64::max) * 2.0;
    if spread > tol::EXP_C_SPREAD {
        return Err(Error::Inconsistent { what: "K(z) Π |℘(z) - ℘(p_i)|² constancy", spread, tol: tol::EXP_C_SPREAD });
    }
    Ok((mean.exp(), spread))
}
