//! Machine-readable verification reports: for one (tau, n) the full chain is
//! enumerate → tangent data → D by three routes → Hessian → c_p → adjunction,
//! with every supporting identity measured and recorded as a named defect.
//! Serialization conventions: complex numbers as [re, im], torus points as
//! {z: [re, im], r, s}, schema tag "green-lame/1".

use crate::branch::{enumerate_branch_points, BranchPointData};
use crate::lame::{fc8_residuals, zeta_constraints};
use crate::{adjunction, branch, dinv, elliptic, lame, tol, Lattice, Result, C};
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

pub const SCHEMA: &str = "green-lame/1";

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub z: [f64; 2],
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPointRecord {
    pub label: String,
    pub points: Vec<PointRecord>,
    pub lambda2: Vec<usize>,
    pub pairing: Vec<Option<usize>>,
    pub c_vec: Vec<[f64; 2]>,
    pub c0: [f64; 2],
    pub c_sum: [f64; 2],
    pub exp_c: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DRoutes {
    pub closed: f64,
    pub area: f64,
    pub quad: f64,
    pub quad_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub schema: &'static str,
    pub tau: [f64; 2],
    pub n: usize,
    pub branch_point: BranchPointRecord,
    pub b: [f64; 2],
    pub d_routes: DRoutes,
    pub h: f64,
    pub c_p: f64,
    pub adjunction_defect: f64,
    pub identity_defects: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    pub tolerances_used: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub quad_budget: usize,
    pub fd_step: f64,
    /// skip the expensive quadrature route (fields become NaN)
    pub skip_quad: bool,
    /// record per-stage wall times (off by default: reports stay bit-identical)
    pub timings: bool,
    /// pass/fail gate on the kernel-level identity defects
    pub tol_kernel: f64,
    /// pass/fail gate on constraint-system residual defects
    pub tol_newton: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quad_budget: tol::QUAD_BUDGET,
            fd_step: tol::FD_STEP,
            skip_quad: false,
            timings: false,
            tol_kernel: 1e-10,
            tol_newton: 1e-9,
        }
    }
}

fn complex_pair(z: C) -> [f64; 2] {
    [z.re, z.im]
}

fn record_branch_point(p: &BranchPointData) -> BranchPointRecord {
    BranchPointRecord {
        label: p.label.clone(),
        points: p
            .config
            .points()
            .iter()
            .map(|tp| PointRecord { z: complex_pair(tp.z), r: tp.r, s: tp.s })
            .collect(),
        lambda2: p.lambda2.clone(),
        pairing: p.pairing.clone(),
        c_vec: p.c_vec.iter().map(|&c| complex_pair(c)).collect(),
        c0: complex_pair(p.c0),
        c_sum: complex_pair(p.c_sum),
        exp_c: p.exp_c,
        singular: p.singular,
    }
}

fn tolerances_map(opts: &VerifyOptions) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("kernel-gate".into(), opts.tol_kernel);
    m.insert("newton-gate".into(), opts.tol_newton);
    m.insert("newton-accept".into(), tol::NEWTON_TOL);
    m.insert("exp-c-spread".into(), tol::EXP_C_SPREAD);
    m.insert("adjunction-gate".into(), 1e-7);
    m.insert("quad-abs-target".into(), tol::QUAD_ABS_TARGET);
    m.insert("fd-step".into(), opts.fd_step);
    m
}

/// Full verification of one branch point.
pub fn report_for_point(
    p: &BranchPointData,
    lat: &Lattice,
    opts: &VerifyOptions,
) -> Result<InvariantReport> {
    let mut defects = BTreeMap::new();
    let mut timings = BTreeMap::new();
    let clock = |t0: Instant, name: &str, timings: &mut BTreeMap<String, f64>| {
        timings.insert(name.to_string(), t0.elapsed().as_secs_f64() * 1e3);
    };

    // kernel-level identities at this tau
    let t0 = Instant::now();
    let legendre = (lat.eta(1) * lat.omega(2) - lat.eta(2) - C::new(0.0, 2.0 * std::f64::consts::PI)).norm();
    defects.insert("legendre".into(), legendre);
    let mut addition: f64 = 0.0;
    for (u, v) in [
        (C::new(0.31, 0.07), C::new(-0.12, 0.0) + 0.23 * lat.tau()),
        (C::new(0.11, 0.0) + 0.41 * lat.tau(), C::new(0.27, 0.05)),
    ] {
        addition = addition.max(elliptic::addition_defect(u, v, lat)?.norm());
    }
    defects.insert("addition".into(), addition);
    clock(t0, "kernel", &mut timings);

    // constraint-system equivalence at a nearby on-curve point (the branch
    // point itself has coinciding ℘ values whenever it contains a ± pair)
    let t0 = Instant::now();
    let eq = {
        let mut eps = 1e-2;
        loop {
            match p.continue_to(C::new(eps, 0.0), lat) {
                Ok(cp) => {
                    let g = zeta_constraints(&cp.config, lat)?;
                    let f8 = fc8_residuals(&cp.config, lat)?;
                    let gmax = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    let f8max = f8.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    let scale = cp
                        .config
                        .values()
                        .iter()
                        .map(|&z| lat.wp_prime(z).map(|w| w.norm()))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .fold(1.0, f64::max);
                    break gmax.max(f8max / scale);
                }
                Err(_) if eps > 1e-4 => eps /= 4.0,
                Err(e) => return Err(e),
            }
        }
    };
    defects.insert("constraint-equivalence".into(), eq);
    clock(t0, "constraints", &mut timings);

    // expansion of P_p, its residues and the vanishing-order constraints
    let t0 = Instant::now();
    let mut pp_defect: f64 = 0.0;
    let mut tested = 0;
    let mut j = 1usize;
    while tested < 30 && j < 400 {
        let r = (0.5 + 0.754_877_666_2 * j as f64).fract() - 0.5;
        let s = (0.5 + 0.569_840_291 * j as f64).fract() - 0.5;
        j += 1;
        let z = C::new(r, 0.0) + s * lat.tau();
        match p.pp_expansion_defect(z, lat) {
            Ok(d) => {
                let scale: f64 = p
                    .c_vec
                    .iter()
                    .zip(p.config.values())
                    .map(|(&c, pi)| (c * lat.wp_unchecked(z - pi)).norm())
                    .sum::<f64>()
                    .max(p.c0.norm())
                    .max(1e-300);
                pp_defect = pp_defect.max(d.norm() / scale);
                tested += 1;
            }
            Err(_) => continue,
        }
    }
    defects.insert("pp-expansion".into(), pp_defect);
    let mut residues: f64 = 0.0;
    for i in 0..p.n() {
        residues = residues.max(p.pp_residue(i, lat)?.norm());
    }
    defects.insert("residues".into(), residues);
    let dc = p
        .derivative_constraints(lat)?
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    defects.insert("pp-order-constraints".into(), dc);
    clock(t0, "expansion", &mut timings);

    // μ_i against e^c |c_i|²
    let t0 = Instant::now();
    let mu = p.mu(lat)?;
    let mut mu_defect: f64 = 0.0;
    for (i, &m) in mu.iter().enumerate() {
        mu_defect = mu_defect.max((m - p.exp_c * p.c_vec[i].norm_sqr()).abs() / m);
    }
    defects.insert("mu-tangent".into(), mu_defect);
    clock(t0, "mu", &mut timings);

    // tangent vector against two-sided continuation
    let t0 = Instant::now();
    defects.insert("tangent-continuation".into(), p.validate_tangent(1e-4, lat)?);
    clock(t0, "tangent", &mut timings);

    // D by all routes
    let t0 = Instant::now();
    let d_closed = dinv::d_closed_form(p, lat);
    let d_area = dinv::d_area_form(p, lat)?;
    let (quad, quad_err, quad_defect) = if opts.skip_quad {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let q = dinv::d_quadrature(p, lat, opts.quad_budget)?;
        let rel = (q.value - d_closed).abs() / d_closed.abs().max(1.0);
        (q.value, q.error_bar, rel)
    };
    defects.insert(
        "d-area-agreement".into(),
        (d_closed - d_area).abs() / d_closed.abs().max(1.0),
    );
    defects.insert("d-quad-agreement".into(), quad_defect);
    let jac = dinv::phi_jacobian(p, lat);
    defects.insert(
        "d-jacobian".into(),
        (d_closed + lat.area() * p.exp_c * jac).abs() / d_closed.abs().max(1.0),
    );
    clock(t0, "d-invariant", &mut timings);

    // Hessian, c_p, adjunction, bridge
    let t0 = Instant::now();
    let adj = adjunction::verify_adjunction(p, lat)?;
    let closed_forms = adj
        .closed_form_defects
        .iter()
        .map(|(_, d)| *d)
        .fold(0.0, f64::max);
    defects.insert("closed-forms".into(), closed_forms);
    defects.insert("minor-spread".into(), adj.minor_spread);
    defects.insert("jg-bridge".into(), adjunction::jg_bridge_defect(&p.config, opts.fd_step, lat)?);
    defects.insert("adjunction".into(), adj.defect);
    clock(t0, "adjunction", &mut timings);

    Ok(InvariantReport {
        schema: SCHEMA,
        tau: complex_pair(lat.tau()),
        n: p.n(),
        branch_point: record_branch_point(p),
        b: complex_pair(p.b),
        d_routes: DRoutes { closed: d_closed, area: d_area, quad, quad_err },
        h: adj.h,
        c_p: adj.c_p,
        adjunction_defect: adj.defect,
        identity_defects: defects,
        timings_ms: opts.timings.then_some(timings),
        tolerances_used: tolerances_map(opts),
    })
}

impl InvariantReport {
    /// Gate used for the process exit code: every recorded defect within its
    /// tolerance. Quadrature is judged against its own error bar. The kernel
    /// and constraint gates honor the flags echoed in `tolerances_used`.
    pub fn within_tolerance(&self) -> bool {
        let gate = |key: &str, fallback: f64| {
            self.tolerances_used.get(key).copied().unwrap_or(fallback)
        };
        let tolerance_for = |name: &str| -> f64 {
            match name {
                "legendre" | "addition" => gate("kernel-gate", 1e-10),
                "constraint-equivalence" => gate("newton-gate", 1e-9),
                "pp-expansion" => 1e-8,
                "residues" => 1e-9,
                "pp-order-constraints" => 1e-7,
                "mu-tangent" => 1e-7,
                "tangent-continuation" => 1e-6,
                "d-area-agreement" => 1e-9,
                "d-jacobian" => 1e-9,
                "closed-forms" => 1e-8,
                "minor-spread" => 1e-8,
                "jg-bridge" => 1e-5,
                "adjunction" => 1e-7,
                _ => f64::INFINITY,
            }
        };
        for (name, value) in &self.identity_defects {
            if name == "d-quad-agreement" {
                if value.is_nan() {
                    continue; // quadrature skipped on request
                }
                let bar = (self.d_routes.quad_err / self.d_routes.closed.abs().max(1.0)).max(1e-3);
                if *value > bar {
                    return false;
                }
            } else if !(*value <= tolerance_for(name)) {
                return false;
            }
        }
        self.c_p >= 0.0
    }
}

/// Run the full chain for every enumerated branch point of G_n on E_tau.
pub fn verify_tau(tau: C, n: usize, opts: &VerifyOptions) -> Result<Vec<InvariantReport>> {
    let lat = crate::make_lattice(tau)?;
    let pts = enumerate_branch_points(n, &lat)?;
    pts.iter().map(|p| report_for_point(p, &lat, opts)).collect()
}

/// One CSV row of a tau sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub tau: [f64; 2],
    pub n: usize,
    pub point_id: String,
    pub b: [f64; 2],
    pub d_closed: f64,
    pub d_area: f64,
    pub d_quad: f64,
    pub d_quad_err: f64,
    pub h: f64,
    pub c_p: f64,
    pub defect: f64,
    pub singular: bool,
}

/// Fixed CSV header for sweep output.
pub const SWEEP_HEADER: &str =
    "tau_re,tau_im,n,point_id,B_re,B_im,D_closed,D_area,D_quad,D_quad_err,H,c_p,defect,singular";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.tau[0],
            self.tau[1],
            self.n,
            self.point_id,
            self.b[0],
            self.b[1],
            self.d_closed,
            self.d_area,
            self.d_quad,
            self.d_quad_err,
            self.h,
            self.c_p,
            self.defect,
            self.singular
        )
    }
}

/// Sweep rows for one tau, ordered by the deterministic census order.
pub fn sweep_tau(tau: C, n: usize, opts: &VerifyOptions) -> Result<Vec<SweepRow>> {
    let lat = crate::make_lattice(tau)?;
    let pts = enumerate_branch_points(n, &lat)?;
    let mut rows = Vec::with_capacity(pts.len());
    for p in &pts {
        let adj = adjunction::verify_adjunction(p, &lat)?;
        let d_area = dinv::d_area_form(p, &lat)?;
        let (quad, quad_err) = if opts.skip_quad {
            (f64::NAN, f64::NAN)
        } else {
            let q = dinv::d_quadrature(p, &lat, opts.quad_budget)?;
            (q.value, q.error_bar)
        };
        rows.push(SweepRow {
            tau: complex_pair(tau),
            n,
            point_id: p.label.clone(),
            b: complex_pair(p.b),
            d_closed: adj.d,
            d_area,
            d_quad: quad,
            d_quad_err: quad_err,
            h: adj.h,
            c_p: adj.c_p,
            defect: adj.defect,
            singular: p.singular,
        })
    }
    Ok(rows)
}

/// Detail table for one kernel evaluation (the `kernel` CLI command).
#[derive(Debug, Clone, Serialize)]
pub struct KernelReport {
    pub schema: &'static str,
    pub tau: [f64; 2],
    pub z: [f64; 2],
    pub nome_cutoff: usize,
    pub slow_nome: bool,
    pub wp: [f64; 2],
    pub wp_prime: [f64; 2],
    pub wp_pp: [f64; 2],
    pub zeta: [f64; 2],
    pub sigma: [f64; 2],
    pub g2: [f64; 2],
    pub g3: [f64; 2],
    pub e: [[f64; 2]; 3],
    pub eta1: [f64; 2],
    pub eta2: [f64; 2],
    pub identity_residuals: BTreeMap<String, f64>,
}

pub fn kernel_report(tau: C, z: C) -> Result<KernelReport> {
    let lat = crate::make_lattice(tau)?;
    let wp = lat.wp(z)?;
    let wp1 = lat.wp_prime(z)?;
    let wp2 = lat.wp_pp(z)?;
    let zeta = lat.zeta(z)?;
    let sigma = lat.sigma(z);
    let mut res = BTreeMap::new();
    let cubic = wp1 * wp1 - (4.0 * wp * wp * wp - lat.g2() * wp - lat.g3());
    res.insert(
        "differential-equation".into(),
        cubic.norm() / wp.norm().powi(3).max(1.0),
    );
    res.insert(
        "legendre".into(),
        (lat.eta(1) * lat.omega(2) - lat.eta(2) - C::new(0.0, 2.0 * std::f64::consts::PI)).norm(),
    );
    let esum = lat.e(1) + lat.e(2) + lat.e(3);
    let escale = (1..=3).map(|k| lat.e(k).norm()).fold(0.0, f64::max);
    res.insert("e-trace".into(), esum.norm() / escale.max(1.0));
    res.insert(
        "quasi-periodicity".into(),
        (1..=2)
            .map(|k| {
                (lat.zeta(z + lat.omega(k)).unwrap_or(C::new(f64::NAN, 0.0))
                    - zeta
                    - lat.eta(k))
                .norm()
            })
            .fold(0.0, f64::max),
    );
    res.insert(
        "wp-pp-consistency".into(),
        (wp2 - (6.0 * wp * wp - lat.g2() / 2.0)).norm() / wp2.norm().max(1.0),
    );
    Ok(KernelReport {
        schema: SCHEMA,
        tau: complex_pair(tau),
        z: complex_pair(z),
        nome_cutoff: lat.nome_cutoff(),
        slow_nome: lat.slow_nome(),
        wp: complex_pair(wp),
        wp_prime: complex_pair(wp1),
        wp_pp: complex_pair(wp2),
        zeta: complex_pair(zeta),
        sigma: complex_pair(sigma),
        g2: complex_pair(lat.g2()),
        g3: complex_pair(lat.g3()),
        e: [
            complex_pair(lat.e(1)),
            complex_pair(lat.e(2)),
            complex_pair(lat.e(3)),
        ],
        eta1: complex_pair(lat.eta(1)),
        eta2: complex_pair(lat.eta(2)),
        identity_residuals: res,
    })
}

/// Branch-point records for the `branch` CLI command.
pub fn branch_records(tau: C, n: usize) -> Result<Vec<BranchPointRecord>> {
    let lat = crate::make_lattice(tau)?;
    Ok(enumerate_branch_points(n, &lat)?
        .iter()
        .map(record_branch_point)
        .collect())
}

/// Record for a user-templated branch-point solve.
pub fn solve_record(
    tau: C,
    template: &branch::BranchTemplate,
    seeds: &[C],
) -> Result<BranchPointRecord> {
    let lat = crate::make_lattice(tau)?;
    let p = branch::solve_branch_point(template, seeds, &lat)?;
    // general n: the census invariants still must hold
    let g = lame::zeta_constraints(&p.config, &lat)?;
    debug_assert!(g.iter().all(|x| x.norm() < tol::NEWTON_TOL * 10.0));
    Ok(record_branch_point(&p))
}
