//! Quantitative verification suite: every criterion pins its tolerance in
//! code and reports measured values. The CLI `acceptance` subcommand and
//! the `acceptance` integration-test target both run through here.

use crate::error::Result;
use crate::freeprop::{
    apply_sine, fundamental_integral_check, spectral_sine_apply, zonal_projection,
    zonal_projection_via_sine, SphericalProfile, TimeWeight,
};
use crate::geometry::{distance, random_point, Space};
use crate::jacobi::{
    fit_decay_rate, integrate_transport, scalar_j, scattering_data, PerturbationField,
    PerturbationShape, RadialArea,
};
use crate::kato::{kato_norm, modified_kato_norm, RadialPotential, SweepConfig};
use crate::mat2::Mat2;
use crate::parametrix::{
    born_series_potential, error_term, iterate_error_series, RadialFn, SpaceTimeKernel,
};
use crate::schrodinger::{
    decay_scan_free, decay_scan_perturbed, free_kernel_closed_form, free_kernel_oscillatory,
    transform_sine_kernel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::f64::consts::PI;

/// One measured quantity compared against its pinned threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub threshold: f64,
    /// "<=" or ">=" comparison of measured against threshold
    pub cmp: String,
    pub pass: bool,
}

impl Check {
    fn le(label: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check {
            label: label.into(),
            measured,
            threshold,
            cmp: "<=".into(),
            pass: measured <= threshold && measured.is_finite(),
        }
    }

    fn ge(label: impl Into<String>, measured: f64, threshold: f64) -> Check {
        Check {
            label: label.into(),
            measured,
            threshold,
            cmp: ">=".into(),
            pass: measured >= threshold && measured.is_finite(),
        }
    }

    fn finite(label: impl Into<String>, measured: f64) -> Check {
        Check {
            label: label.into(),
            measured,
            threshold: f64::INFINITY,
            cmp: "finite".into(),
            pass: measured.is_finite(),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub wall_ms: u128,
}

fn finish(id: usize, name: &str, checks: Vec<Check>, start: std::time::Instant) -> CriterionResult {
    CriterionResult {
        id,
        name: name.into(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        wall_ms: start.elapsed().as_millis(),
    }
}

/// 1. Geometric spherical-mean propagator vs the S³ spectral oracle for
/// band-limited data, 20 random (t, x), relative error ≤ 1e-6.
pub fn criterion_01() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let s3 = Space::sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let center = random_point(&s3, &mut rng);
    let coeffs: Vec<f64> = (0..=8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    let f = SphericalProfile::new(center, coeffs);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = random_point(&s3, &mut rng);
        let t = rng.gen_range(0.2..2.0 * PI - 0.2);
        let geo = apply_sine(&s3, t, &f, &x, 16)?;
        let theta = distance(&s3, &center, &x)?;
        let spec = spectral_sine_apply(&f, t, theta);
        let rel = (geo - spec).abs() / spec.abs().max(1e-2 * scale);
        worst = worst.max(rel);
    }
    let checks = vec![Check::le("max rel err, apply_sine vs spectral (20 samples)", worst, 1e-6)];
    Ok(finish(1, "S3 propagator oracle equivalence", checks, start))
}

/// 2. S³ antisymmetry S₀(t) = -S₀(2π-t) and the vanishing propagator at
/// t = π, both to 1e-8.
pub fn criterion_02() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let s3 = Space::sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let center = random_point(&s3, &mut rng);
    let coeffs: Vec<f64> = (0..=6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = SphericalProfile::new(center, coeffs);
    let mut worst_sym: f64 = 0.0;
    let mut worst_pi: f64 = 0.0;
    for _ in 0..10 {
        let x = random_point(&s3, &mut rng);
        let t = rng.gen_range(0.1..PI - 0.1);
        let a = apply_sine(&s3, t, &f, &x, 16)?;
        let b = apply_sine(&s3, 2.0 * PI - t, &f, &x, 16)?;
        worst_sym = worst_sym.max((a + b).abs());
        worst_pi = worst_pi.max(apply_sine(&s3, PI, &f, &x, 16)?.abs());
    }
    let checks = vec![
        Check::le("sup |S0(t)f + S0(2pi-t)f|", worst_sym, 1e-8),
        Check::le("sup |S0(pi)f|", worst_pi, 1e-8),
    ];
    Ok(finish(2, "S3 antisymmetry and conjugate time", checks, start))
}

/// 3. Fundamental time integrals of the shell propagator against their
/// closed forms, relative error ≤ 1e-8.
pub fn criterion_03() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let mut checks = Vec::new();
    let h3 = Space::hyperbolic();
    for &r in &[0.5, 1.0, 2.0, 4.0] {
        let (num, closed) = fundamental_integral_check(&h3, r, TimeWeight::One)?;
        checks.push(Check::le(
            format!("H3 unweighted rel err at r = {r}"),
            (num - closed).abs() / closed,
            1e-8,
        ));
        let (num, closed) = fundamental_integral_check(&h3, r, TimeWeight::Jacobi)?;
        checks.push(Check::le(
            format!("H3 j-weighted rel err at r = {r}"),
            (num - closed).abs() / closed,
            1e-8,
        ));
    }
    // the S³ analogue lives below the diameter π, so the largest separation
    // is capped at 2.8 instead of 4
    let s3 = Space::sphere();
    for &r in &[0.5, 1.0, 2.0, 2.8] {
        let (num, closed) = fundamental_integral_check(&s3, r, TimeWeight::One)?;
        checks.push(Check::le(
            format!("S3 unweighted rel err at r = {r}"),
            (num - closed).abs() / closed,
            1e-8,
        ));
    }
    Ok(finish(3, "fundamental shell integrals", checks, start))
}

/// 4. Zonal projections: exact traces (ℓ+1)² for ℓ ≤ 16, and the closed
/// form against the sine-propagator integral formula to 1e-10.
pub fn criterion_04() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let mut worst_trace: f64 = 0.0;
    let mut worst_route: f64 = 0.0;
    for ell in 0..=16usize {
        let want = ((ell + 1) * (ell + 1)) as f64;
        let trace = zonal_projection(ell, 0.0) * 2.0 * PI * PI;
        worst_trace = worst_trace.max((trace - want).abs() / want);
        for &theta in &[0.4, 1.3, 2.2] {
            let a = zonal_projection(ell, theta);
            let b = zonal_projection_via_sine(ell, theta);
            worst_route = worst_route.max((a - b).abs());
        }
    }
    let checks = vec![
        Check::le("max trace rel defect, l <= 16", worst_trace, 1e-13),
        Check::le("max |closed - sine-integral route|", worst_route, 1e-10),
    ];
    Ok(finish(4, "zonal projections", checks, start))
}

/// 5. Jacobi contraction suite: sup |T - jI|/j ≤ 2ε and
/// sup |T' - j'I|/j ≤ 2ε for the built-in family, and small-r residual
/// slopes ≥ 2.9 (T) and ≥ 1.9 (T').
pub fn criterion_05() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let mut checks = Vec::new();
    for shape in [PerturbationShape::Isotropic, PerturbationShape::Traceless] {
        for eps in [1e-3, 1e-2, 1e-1] {
            let pert = PerturbationField::gaussian_bump(eps, shape);
            let path = integrate_transport(-1.0, &pert, 12.0, 1e-10)?;
            let mut sup_t: f64 = 0.0;
            let mut sup_dt: f64 = 0.0;
            for st in path.states().iter().skip(1) {
                let (j, dj) = scalar_j(-1.0, st.r);
                sup_t = sup_t.max((st.t - Mat2::scalar(j)).op_norm() / j);
                sup_dt = sup_dt.max((st.dt - Mat2::scalar(dj)).op_norm() / j);
            }
            let tag = format!("{shape:?} eps={eps}");
            checks.push(Check::le(format!("sup |T-jI|/j / eps, {tag}"), sup_t / eps, 2.0));
            checks.push(Check::le(format!("sup |T'-j'I|/j / eps, {tag}"), sup_dt / eps, 2.0));
        }
    }
    // small-r residual slopes on r in [1e-3, 1e-1], via the well-conditioned
    // variation-of-parameters form
    let pert = PerturbationField::exp_decay(0.1, PerturbationShape::Isotropic);
    let path = integrate_transport(-1.0, &pert, 1.0, 1e-12)?;
    let rs: Vec<f64> = (0..=20).map(|i| 1e-3 * 10f64.powf(i as f64 / 10.0)).collect();
    let res_t: Vec<f64> =
        rs.iter().map(|&r| crate::jacobi::transport_residual(&path, r).norm()).collect();
    let res_dt: Vec<f64> =
        rs.iter().map(|&r| crate::jacobi::transport_deriv_residual(&path, r).norm()).collect();
    let loglog = |ys: &[f64]| {
        let n = ys.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for (r, y) in rs.iter().zip(ys.iter()) {
            let (x, y) = (r.ln(), y.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    checks.push(Check::ge("small-r slope of |T - jI|", loglog(&res_t), 2.9));
    checks.push(Check::ge("small-r slope of |T' - j'I|", loglog(&res_dt), 1.9));
    Ok(finish(5, "Jacobi contraction estimates", checks, start))
}

/// 6. Scattering limit: fitted decay rate of ‖T(r)/j(r) - T∞‖ for the
/// e^{-2s} perturbation within 5% of 2α₀ (power-law prefactor absorbed).
pub fn criterion_06() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let pert = PerturbationField::exp_decay(0.05, PerturbationShape::Isotropic);
    let (data, path) = scattering_data(-1.0, &pert, 1e-12)?;
    let rs: Vec<f64> = (0..=25).map(|i| 1.0 + 0.2 * i as f64).collect();
    let devs: Vec<f64> = rs
        .iter()
        .map(|&r| {
            let st = path.eval(r);
            let j = scalar_j(-1.0, r).0;
            (st.t * (1.0 / j) - data.t_inf).norm()
        })
        .collect();
    let (lambda, _nu) = fit_decay_rate(&rs, &devs, true);
    let checks = vec![
        Check::ge("fitted decay rate of ||T/j - Tinf||", lambda, 1.9),
        Check::le("deviation of fitted rate from 2*alpha0", (lambda - 2.0).abs(), 0.1),
    ];
    Ok(finish(6, "scattering limit rate", checks, start))
}

/// 7. Parametrix defect: identically zero for the exact area element (to
/// 1e-8), and for an ε-perturbation ‖Error‖_{L¹} ≤ 2ε and
/// sup |Error(r)| j(r) ≤ 2ε, where ε bounds both the along-geodesic and
/// the volume-weighted L¹ norms of the perturbation.
pub fn criterion_07() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let rs: Vec<f64> = (1..=500).map(|i| i as f64 * 0.02).collect();
    let exact = error_term(&RadialArea::Exact { kappa0: -1.0 }, &rs)?;
    let sup_exact = exact.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let eps = 1e-2;
    // normalize so that max(L¹(Γ), L¹(ℳ)) = ε
    let probe = PerturbationField::gaussian_bump(1.0, PerturbationShape::Isotropic);
    let ratio = probe.l1_manifold(-1.0).max(1.0);
    let pert = PerturbationField::gaussian_bump(eps / ratio, PerturbationShape::Isotropic);
    let path = integrate_transport(-1.0, &pert, 10.0, 1e-11)?;
    let field = error_term(&RadialArea::Path(path), &rs)?;
    let checks = vec![
        Check::le("sup |Error| for a = j^2", sup_exact, 1e-8),
        Check::le("||Error||_L1 / eps (joint normalization)", field.l1_norm / eps, 2.0),
        Check::le("sup |Error| j / eps", field.sup_weighted / eps, 2.0),
    ];
    Ok(finish(7, "parametrix exactness and defect size", checks, start))
}

/// 8. Error-series convergence: per-term 𝒰(L¹) norms consistent with the
/// factorial bound — fitted C with term_n ≤ term_0 (CεT)^n/n! stays ≤ 4
/// for ε = 0.01, T = 5.
pub fn criterion_08() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let eps = 1e-2;
    let t_max = 5.0;
    let dt = 0.01;
    let (nt, nr) = (500, 520);
    let pert = PerturbationField::gaussian_bump(eps, PerturbationShape::Isotropic);
    let path = integrate_transport(-1.0, &pert, nr as f64 * dt + 1.0, 1e-10)?;
    let area = RadialArea::Path(path);
    let s0 = SpaceTimeKernel::parametrix(&area, dt, nt, nr)?;
    let rs: Vec<f64> = (1..=nr).map(|i| i as f64 * dt).collect();
    let field = error_term(&area, &rs)?;
    let e = field.kernel(dt, nt, nr);
    let series = iterate_error_series(&s0, &e, 5, 1e-12)?;
    let mut fitted_c: f64 = 0.0;
    let base = series.term_l1[0];
    for (n, m) in series.term_l1.iter().enumerate().skip(1) {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let c = (m / base * fact).powf(1.0 / n as f64) / (eps * t_max);
        fitted_c = fitted_c.max(c);
    }
    let checks = vec![
        Check::ge("number of series terms", (series.term_l1.len() - 1) as f64, 2.0),
        Check::le("fitted factorial-bound constant C", fitted_c, 4.0),
    ];
    Ok(finish(8, "error-series factorial decay", checks, start))
}

/// 9. Potential Born series vs an independent 1D radial finite-difference
/// reference for V = 0.05 χ_{B(0,1)}. Both sides evolve the same mollified
/// point source (so the mollification bias cancels): the reference solves
/// `v_tt - v_rr + V v = 0` with `v_t(0,r) = sinh(r) ψ_η(r)`, the kernel
/// side composes the resummed kernel with ψ_η. 20 samples (t, r) inside
/// the light cone and away from the kernel's kink radii, rel err ≤ 1e-3;
/// successive-term ratios ≤ 2 ‖V‖_𝒦.
pub fn criterion_09() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let amp = 0.05;
    let v = RadialPotential::ball(amp, 1.0);
    let dt = 0.01;
    let (nt, nr) = (500, 550);
    let series = born_series_potential(-1.0, &v, dt, nt, nr, 8, 1e-9)?;

    // normalized mollifier ψ_η on the H³ volume element
    let eta = 0.03;
    let q = move |r: f64| {
        let x = r / eta;
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - x * x).powi(3)
        }
    };
    let mass = crate::quad::integrate_gl(
        |r: f64| q(r) * 4.0 * PI * r.sinh() * r.sinh(),
        0.0,
        eta,
        32,
    );
    let psi = move |r: f64| q(r) / mass;
    let f = RadialFn::new(-1.0, psi, 12.0, eta / 20.0)?;
    let u_kernel = series.sum.apply_radial(&f);

    let sol = crate::reference::wave_1d(
        &|r| if r < 1.0 { amp } else { 0.0 },
        &|r| r.sinh() * psi(r),
        9.0,
        2.5e-4,
        0.995,
        1.0,
        5,
    )?;
    // sample radii per time, inside the cone and at least 0.1 away from the
    // kink radii ρ = |t-2|, ρ = 2-t of the first Born kernel
    let samples: [(f64, &[f64]); 5] = [
        (1.0, &[0.35, 0.6, 0.8]),
        (2.0, &[0.3, 0.75, 1.3, 1.75]),
        (3.0, &[0.4, 1.4, 2.2, 2.7]),
        (4.0, &[0.5, 1.2, 2.75, 3.3]),
        (5.0, &[0.6, 1.5, 2.4, 3.6, 4.2]),
    ];
    let mut worst_rel: f64 = 0.0;
    let mut count = 0;
    for (t, rhos) in samples {
        let (_, row) = sol
            .samples
            .iter()
            .find(|(ts, _)| (ts - t).abs() < 1e-9)
            .expect("sample time present");
        let i = (t / dt).round() as usize;
        for &rho in rhos {
            let k_kernel = (rho / dt).round() as usize;
            let k_pde = (rho / sol.dr).round() as usize;
            let u_ref = row[k_pde] / rho.sinh();
            let got = u_kernel[i][k_kernel];
            let rel = (got - u_ref).abs() / u_ref.abs();
            worst_rel = worst_rel.max(rel);
            count += 1;
        }
    }
    let mut checks = vec![
        Check::ge("number of sampled (t, r) points", count as f64, 20.0),
        Check::le("max rel err vs radial FD reference", worst_rel, 1e-3),
    ];
    let cfg = SweepConfig::default();
    let vk = kato_norm(&Space::hyperbolic(), &v, &cfg)?.value;
    let worst_ratio = series.ratios.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::le("max successive-term ratio / ||V||_K", worst_ratio / vk, 2.0));
    Ok(finish(9, "Born series vs PDE reference", checks, start))
}

/// 10. Schrödinger decay: free column t^{3/2} sup|K| constant to 1e-6 at
/// the value (4π)^{-3/2}; oscillatory vs closed-form route to 1e-6;
/// time-domain route vs spectral to 1e-4; perturbed column bounded.
pub fn criterion_10() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let mut checks = Vec::new();
    let rs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    let ts: Vec<f64> = (0..=14).map(|i| 1.0 + 3.5 * i as f64).collect();
    let rows = decay_scan_free(&ts, &rs)?;
    let want = (4.0 * PI).powf(-1.5);
    let worst =
        rows.iter().map(|r| (r.weighted - want).abs() / want).fold(0.0, f64::max);
    checks.push(Check::le("free decay column flatness (rel)", worst, 1e-6));

    let mut worst_cf: f64 = 0.0;
    for &t in &[0.5, 1.0, 7.0, 50.0] {
        let k = free_kernel_oscillatory(t, &rs)?;
        for (r, v) in k.rs.iter().zip(k.values.iter()) {
            let want = free_kernel_closed_form(t, *r);
            worst_cf = worst_cf.max((v - want).norm() / want.norm());
        }
    }
    checks.push(Check::le("oscillatory vs closed form (rel)", worst_cf, 1e-6));

    // time-domain route on the grid-sampled free sine kernel
    let s0 = SpaceTimeKernel::free_sine(-1.0, 0.01, 1800, 1800);
    let rs_td: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
    let mut worst_td: f64 = 0.0;
    for &t in &[1.0, 3.0] {
        let (k, _) = transform_sine_kernel(&s0, t, &rs_td)?;
        let spec = free_kernel_oscillatory(t, &rs_td)?;
        for (a, b) in k.values.iter().zip(spec.values.iter()) {
            worst_td = worst_td.max((a - b).norm() / b.norm());
        }
    }
    checks.push(Check::le("time-domain route vs spectral (rel)", worst_td, 1e-4));

    // perturbed kernel: bounded decay column over the convergent window
    let v = RadialPotential::ball(0.05, 1.0);
    let series = born_series_potential(-1.0, &v, 0.01, 800, 820, 8, 1e-9)?;
    let ts_p: Vec<f64> = (0..=8).map(|i| 1.0 + 0.5 * i as f64).collect();
    let rows = decay_scan_perturbed(&series.sum, &ts_p, &rs_td)?;
    let sup_p = rows.iter().map(|r| r.weighted).fold(0.0, f64::max);
    checks.push(Check::finite("perturbed decay column sup (reported)", sup_p));
    checks.push(Check::le(
        "perturbed column within 2x of free constant",
        sup_p / want,
        2.0,
    ));
    Ok(finish(10, "Schrodinger t^{-3/2} decay", checks, start))
}

/// 11. Weighted algebra: the computable composition inequalities on 100
/// random kernel pairs with 1e-6 slack, and the exact t-derivation
/// identity. Weights j and j_δ with the dual-norm factors replaced by
/// their computable (L¹-source) counterparts.
pub fn criterion_11() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let (dt, nt, nr) = (0.05, 24, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst_slack: f64 = 0.0;
    let mut worst_deriv: f64 = 0.0;
    let alpha0 = 1.0;
    let delta = 0.1 * alpha0;
    let j = |t: f64| scalar_j(-1.0, t).0;
    let dj = |t: f64| scalar_j(-1.0, t).1;
    let jd = move |t: f64| crate::jacobi::scalar_j_delta(alpha0, delta, t).unwrap();
    let djd = move |t: f64| crate::jacobi::scalar_j_delta_deriv(alpha0, delta, t).unwrap();

    for pair in 0..100 {
        let f = random_kernel(&mut rng, dt, nt, nr, pair % 3 == 0);
        let g = random_kernel(&mut rng, dt, nt, nr, pair % 4 == 0);
        let fg = f.convolve(&g)?;

        // comp1-form, target (L¹, K~):
        // ||j(F*G)|| <= ||jF|| ||j'G||_L1 + ||j'F|| ||jG||_L1
        let lhs = fg.u_l1_ktilde_weighted(j)?;
        let rhs = f.u_l1_ktilde_weighted(j)? * g.u_l1_weighted(dj)
            + f.u_l1_ktilde_weighted(dj)? * g.u_l1_weighted(j);
        worst_slack = worst_slack.max(lhs / rhs.max(1e-300));

        // comp2-form, target (L¹, L^∞)
        let lhs = fg.u_l1_linf_weighted(j);
        let rhs = f.u_l1_linf_weighted(j) * g.u_l1_weighted(dj)
            + f.u_l1_linf_weighted(dj) * g.u_l1_weighted(j);
        worst_slack = worst_slack.max(lhs / rhs.max(1e-300));

        // comp3-form: ||j'(F*G)||_L1 <= 2 ||j'F||_L1 ||j'G||_L1, and with j_δ
        let lhs = fg.u_l1_weighted(dj);
        let rhs = 2.0 * f.u_l1_weighted(dj) * g.u_l1_weighted(dj);
        worst_slack = worst_slack.max(lhs / rhs.max(1e-300));
        let lhs = fg.u_l1_weighted(djd);
        let rhs = 2.0 * f.u_l1_weighted(djd) * g.u_l1_weighted(djd);
        worst_slack = worst_slack.max(lhs / rhs.max(1e-300));

        // comp4-form: ||j'(F*G)||_{L¹,L^∞} <= 2 ||j'F||_{L¹,L^∞} ||j'G||_L1
        let lhs = fg.u_l1_linf_weighted(dj);
        let rhs = 2.0 * f.u_l1_linf_weighted(dj) * g.u_l1_weighted(dj);
        worst_slack = worst_slack.max(lhs / rhs.max(1e-300));
        let lhs = fg.u_l1_linf_weighted(jd);
        let rhs = f.u_l1_linf_weighted(jd) * g.u_l1_weighted(djd)
            + f.u_l1_linf_weighted(djd) * g.u_l1_weighted(jd);
        worst_slack = worst_slack.max(lhs / rhs.max(1e-300));

        if pair % 10 == 0 {
            // derivation identity t(F*G) = (tF)*G + F*(tG), exact on grids
            let lhs_k = fg.weighted_in_time(|t| t);
            let r1 = f.weighted_in_time(|t| t).convolve(&g)?;
            let r2 = f.convolve(&g.weighted_in_time(|t| t))?;
            for i in (0..=nt).step_by(5) {
                for k in (0..=nr).step_by(7) {
                    let lhs_v = lhs_k.ac_value(i, k);
                    let rhs_v = r1.ac_value(i, k) + r2.ac_value(i, k);
                    worst_deriv =
                        worst_deriv.max((lhs_v - rhs_v).abs() / (1.0 + lhs_v.abs()));
                }
            }
        }
    }
    let checks = vec![
        Check::le("max LHS/RHS over composition inequalities", worst_slack, 1.0 + 1e-6),
        Check::le("t-derivation identity defect", worst_deriv, 1e-12),
    ];
    Ok(finish(11, "weighted algebra inequalities", checks, start))
}

fn random_kernel(
    rng: &mut ChaCha8Rng,
    dt: f64,
    nt: usize,
    nr: usize,
    with_shell: bool,
) -> SpaceTimeKernel {
    let amp = rng.gen_range(0.1..1.0);
    let ct = rng.gen_range(0.2..1.0);
    let cr = rng.gen_range(0.2..1.4);
    let wt = rng.gen_range(0.15..0.4);
    let wr = rng.gen_range(0.15..0.4);
    let mut k = SpaceTimeKernel::from_ac(-1.0, dt, nt, nr, |t, r| {
        amp * (-((t - ct) / wt).powi(2) - ((r - cr) / wr).powi(2)).exp()
    });
    if with_shell {
        let a = rng.gen_range(0.05..0.3);
        let c = rng.gen_range(0.2..0.8);
        let pot = RadialPotential::gaussian(a, c, 0.3);
        let shell = SpaceTimeKernel::potential_shell(-1.0, &pot, dt, nt, nr);
        let mut merged = shell;
        merged.add_ac(&k).expect("grids match");
        k = merged;
    }
    k
}

/// 12. Exponential decay with a 𝒦̃ potential: for a mollified point source
/// ψ_η, `sinh((α₀-δ)t) ‖S_V(t)ψ_η‖_∞` stays bounded on t ∈ [1, 8] with
/// δ = 0.1 α₀ (bound reported, compared against the free propagator's), and
/// the time-integrated norm ‖j_δ S_V‖_{𝒰(L¹,L∞)} is finite.
pub fn criterion_12() -> Result<CriterionResult> {
    let start = std::time::Instant::now();
    let v = RadialPotential::gaussian(0.05, 1.0, 0.4);
    let cfg = SweepConfig::default();
    let h3 = Space::hyperbolic();
    let ktilde = modified_kato_norm(&h3, &v, &cfg)?.value;
    let dt = 0.02;
    let (nt, nr) = (400, 420); // T = 8
    let series = born_series_potential(-1.0, &v, dt, nt, nr, 8, 1e-9)?;
    let s0 = SpaceTimeKernel::free_sine(-1.0, dt, nt, nr);

    let eta = 0.1;
    let q = move |r: f64| {
        let x = r / eta;
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - x * x).powi(3)
        }
    };
    let mass = crate::quad::integrate_gl(
        |r: f64| q(r) * 4.0 * PI * r.sinh() * r.sinh(),
        0.0,
        eta,
        32,
    );
    let psi = move |r: f64| q(r) / mass;
    let f = RadialFn::new(-1.0, psi, 12.0, eta / 20.0)?;

    let delta = 0.1;
    let weighted_sup = |u: &[Vec<f64>]| -> f64 {
        let mut sup: f64 = 0.0;
        for (i, row) in u.iter().enumerate() {
            let t = i as f64 * dt;
            if t < 1.0 {
                continue;
            }
            let sup_r = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            sup = sup.max(((1.0 - delta) * t).sinh() * sup_r);
        }
        sup
    };
    let b_pert = weighted_sup(&series.sum.apply_radial(&f));
    let b_free = weighted_sup(&s0.apply_radial(&f));
    let norms = crate::parametrix::weighted_u_norms(&series.sum, delta)?;
    let checks = vec![
        Check::finite("||V||_Ktilde (reported)", ktilde),
        Check::finite("sup_t sinh((a0-d)t) ||S_V(t) psi||_inf (reported)", b_pert),
        Check::le("perturbed / free weighted sup", b_pert / b_free, 2.0),
        Check::finite("||j_d S_V||_{U(L1,Linf)} (reported)", norms.l1_linf_jdelta),
    ];
    Ok(finish(12, "exponential decay with Ktilde potential", checks, start))
}

/// Run the entire suite in order.
pub fn run_all() -> Result<Vec<CriterionResult>> {
    Ok(vec![
        criterion_01()?,
        criterion_02()?,
        criterion_03()?,
        criterion_04()?,
        criterion_05()?,
        criterion_06()?,
        criterion_07()?,
        criterion_08()?,
        criterion_09()?,
        criterion_10()?,
        criterion_11()?,
        criterion_12()?,
    ])
}

/// One line per criterion, as printed by the test target and the CLI.
pub fn format_line(r: &CriterionResult) -> String {
    let status = if r.pass { "PASS" } else { "FAIL" };
    let worst = r
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} = {:.3e} (want {} {:.3e})", c.label, c.measured, c.cmp, c.threshold))
        .collect::<Vec<_>>()
        .join("; ");
    if worst.is_empty() {
        format!("criterion {:02} [{status}] {} ({} ms)", r.id, r.name, r.wall_ms)
    } else {
        format!("criterion {:02} [{status}] {}: {} ({} ms)", r.id, r.name, worst, r.wall_ms)
    }
}
