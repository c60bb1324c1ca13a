//! Kato-class norms for radial potentials on H³.
//!
//! The global Kato norm is `sup_{x₀} ∫ |V(x)| / j(d(x₀,x)) dx`; the modified
//! norm replaces the weight by `1/min(1, d)` and the δ-variant by `1/j_δ(d)`.
//! For radial potentials the sup reduces to a one-dimensional sweep in
//! ρ = d(center, x₀), and each integral collapses through the chord identity
//! `∫_{S²} g(d(x, y)) dω = (2π / (j(ρ) j(u))) ∫ g(w) j(w) dw` to nested 1D
//! quadrature.

use crate::error::{Error, Result};
use crate::geometry::{chord_window, Space, SpaceKind};
use crate::jacobi::{scalar_j, scalar_j_delta};
use crate::quad::{integrate_gl_panels, integrate_gl_split};
use crate::spline::CubicSpline;
use std::sync::Arc;

/// Tail behaviour of a radial potential, used to pick integration cutoffs
/// and detect divergent norms before quadrature.
#[derive(Debug, Clone, Copy)]
pub enum Tail {
    /// Identically zero beyond the support radius.
    Compact,
    /// |V(r)| ≲ amplitude · e^{-rate·r}.
    Exponential { rate: f64 },
    /// V = (1 + j(r))^{-p}: exponential decay at rate p·α₀.
    JacobiPower { p: f64 },
}

/// Rotation-invariant scalar potential about a fixed center.
#[derive(Clone)]
pub struct RadialPotential {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: f64,
    amplitude: f64,
    tail: Tail,
    breakpoints: Vec<f64>,
    label: String,
}

impl std::fmt::Debug for RadialPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialPotential")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

impl RadialPotential {
    pub fn zero() -> Self {
        RadialPotential {
            f: Arc::new(|_| 0.0),
            support: 1.0,
            amplitude: 0.0,
            tail: Tail::Compact,
            breakpoints: vec![],
            label: "zero".into(),
        }
    }

    /// `amplitude · χ_{B(0, radius)}`.
    pub fn ball(amplitude: f64, radius: f64) -> Self {
        RadialPotential {
            f: Arc::new(move |r| if r < radius { amplitude } else { 0.0 }),
            support: radius,
            amplitude,
            tail: Tail::Compact,
            breakpoints: vec![radius],
            label: format!("ball(a={amplitude},R={radius})"),
        }
    }

    /// `amplitude · e^{-rate·r}`.
    pub fn exp_decay(amplitude: f64, rate: f64) -> Self {
        RadialPotential {
            f: Arc::new(move |r| amplitude * (-rate * r).exp()),
            support: f64::INFINITY,
            amplitude,
            tail: Tail::Exponential { rate },
            breakpoints: vec![],
            label: format!("exp(a={amplitude},rate={rate})"),
        }
    }

    /// `amplitude · exp(-(r-center)²/(2σ²))`.
    pub fn gaussian(amplitude: f64, center: f64, sigma: f64) -> Self {
        RadialPotential {
            f: Arc::new(move |r| {
                amplitude * (-(r - center) * (r - center) / (2.0 * sigma * sigma)).exp()
            }),
            support: center + 12.0 * sigma,
            amplitude,
            tail: Tail::Compact,
            breakpoints: vec![],
            label: format!("gaussian(a={amplitude},c={center},s={sigma})"),
        }
    }

    /// `(1 + j(r))^{-p}` for the curvature of `space`.
    pub fn jacobi_power(space: &Space, p: f64) -> Self {
        let kappa0 = space.kappa0;
        RadialPotential {
            f: Arc::new(move |r| (1.0 + scalar_j(kappa0, r).0).powf(-p)),
            support: f64::INFINITY,
            amplitude: 1.0,
            tail: Tail::JacobiPower { p },
            breakpoints: vec![],
            label: format!("jpow(p={p})"),
        }
    }

    /// Tabulated potential (r, V) with cubic interpolation, zero outside the
    /// table range.
    pub fn from_table(rows: &[(f64, f64)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Parse("potential table needs at least two rows".into()));
        }
        let rs: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let vs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let spline = CubicSpline::new(&rs, &vs)?;
        let (lo, hi) = (rs[0], *rs.last().unwrap());
        let amplitude = vs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(RadialPotential {
            f: Arc::new(move |r| if r < lo || r > hi { 0.0 } else { spline.eval(r) }),
            support: hi,
            amplitude,
            tail: Tail::Compact,
            breakpoints: vec![lo, hi],
            label: "table".into(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        let f = self.f.clone();
        RadialPotential {
            f: Arc::new(move |r| c * f(r)),
            support: self.support,
            amplitude: self.amplitude * c.abs(),
            tail: self.tail,
            breakpoints: self.breakpoints.clone(),
            label: format!("{} * {c}", self.label),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Radius beyond which `|V| · e^{growth·r}` is negligible, or an error
    /// when that product diverges (norm infinite).
    pub fn cutoff(&self, growth: f64, alpha0: f64) -> Result<f64> {
        match self.tail {
            Tail::Compact => Ok(self.support),
            Tail::Exponential { rate } => {
                if rate <= growth + 1e-12 {
                    return Err(Error::Divergent(format!(
                        "potential tail rate {rate} does not beat weight growth {growth}"
                    )));
                }
                let amp = self.amplitude.max(1e-300);
                Ok(((amp.ln() + 45.0) / (rate - growth)).max(5.0))
            }
            Tail::JacobiPower { p } => {
                let rate = p * alpha0;
                if rate <= growth + 1e-12 {
                    return Err(Error::Divergent(format!(
                        "jacobi-power tail p·α₀ = {rate} does not beat weight growth {growth}"
                    )));
                }
                Ok((45.0 / (rate - growth)).max(5.0) + 5.0)
            }
        }
    }
}

/// Sweep configuration for the sup over base points.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub n_rho: usize,
    pub gl_order: usize,
    pub panels_per_unit: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { n_rho: 48, gl_order: 16, panels_per_unit: 4 }
    }
}

/// One evaluated norm with its sweep diagnostics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NormValue {
    pub value: f64,
    pub argmax_rho: f64,
    pub sweep: Vec<(f64, f64)>,
}

fn require_hyperbolic(space: &Space) -> Result<f64> {
    if space.kind != SpaceKind::Hyperbolic {
        return Err(Error::Domain("Kato norms are defined for kappa0 < 0 here".into()));
    }
    Ok(space.alpha0())
}

/// Index and value of the first maximum (ties resolve towards the interior).
fn first_argmax(vals: &[f64]) -> (usize, f64) {
    let mut imax = 0;
    let mut vmax = vals[0];
    for (i, &v) in vals.iter().enumerate().skip(1) {
        if v > vmax {
            imax = i;
            vmax = v;
        }
    }
    (imax, vmax)
}

/// Arc lengths at which `d(b, s)` crosses the potential's breakpoints.
fn arclength_breakpoints(space: &Space, b: f64, pot: &RadialPotential) -> Vec<f64> {
    let k = match space.kind {
        SpaceKind::Hyperbolic => space.alpha0(),
        _ => 1.0,
    };
    let mut out = Vec::new();
    for &radius in pot.breakpoints() {
        match space.kind {
            SpaceKind::Hyperbolic => {
                let q = (radius * k).cosh() / (b * k).cosh();
                if q > 1.0 {
                    out.push(q.acosh() / k);
                }
            }
            SpaceKind::Flat => {
                if radius > b {
                    out.push((radius * radius - b * b).sqrt());
                }
            }
            SpaceKind::Sphere => {
                let q = (radius * k).cos() / (b * k).cos();
                if q.abs() <= 1.0 {
                    out.push(q.acos() / k);
                }
            }
        }
    }
    out
}

/// Generic sweep over base points at distance ρ from the potential center.
/// `weighted_chord(wlo, whi)` is `∫ j(w)/W(w) dw` over the chord window and
/// `center_value(u)` the integrand of the ρ = 0 (base point at center) case;
/// `inner_growth` is the exponential growth rate the potential tail must
/// beat for the norm to be finite.
fn sweep_norm(
    space: &Space,
    pot: &RadialPotential,
    cfg: &SweepConfig,
    inner_growth: f64,
    weighted_chord: &(dyn Fn(f64, f64) -> f64 + Sync),
    center_value: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<NormValue> {
    let alpha0 = require_hyperbolic(space)?;
    let r_cut = pot.cutoff(inner_growth, alpha0)?;
    let j = |r: f64| scalar_j(space.kappa0, r).0;

    let integral_at = |rho: f64| -> f64 {
        if rho == 0.0 {
            return integrate_gl_split(
                |u| center_value(u),
                0.0,
                r_cut,
                cfg.gl_order,
                pot.breakpoints(),
            );
        }
        let inner = |u: f64| {
            let (wlo, whi) = chord_window(space, rho, u);
            j(u) * pot.eval(u).abs() * weighted_chord(wlo, whi)
        };
        let mut cuts = pot.breakpoints().to_vec();
        cuts.push(rho);
        let panels = ((r_cut * cfg.panels_per_unit as f64).ceil() as usize).max(4);
        let h = r_cut / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
            acc += integrate_gl_split(inner, a, b, cfg.gl_order, &cuts);
        }
        2.0 * std::f64::consts::PI * acc / j(rho)
    };

    let mut rho_max = r_cut + 2.0;
    for _attempt in 0..4 {
        let rhos: Vec<f64> =
            (0..cfg.n_rho).map(|i| rho_max * i as f64 / (cfg.n_rho - 1) as f64).collect();
        let vals: Vec<f64> = rhos.iter().map(|&r| integral_at(r)).collect();
        let (imax, vmax) = first_argmax(&vals);
        if imax + 1 < cfg.n_rho {
            return Ok(NormValue {
                value: vmax,
                argmax_rho: rhos[imax],
                sweep: rhos.into_iter().zip(vals).collect(),
            });
        }
        rho_max *= 2.0; // sup at the sweep boundary: extend and retry
    }
    Err(Error::Divergent("sup over base points not attained on an extendable grid".into()))
}

/// Global Kato norm `sup_{x₀} ∫ |V| / j(d(x₀, ·))`. The chord integral of
/// 1/j is the plain window length, so the inner integral reduces to
/// `(4π/j(ρ)) ∫ j(u) |V(u)| min(ρ, u) du`.
pub fn kato_norm(space: &Space, pot: &RadialPotential, cfg: &SweepConfig) -> Result<NormValue> {
    let alpha0 = require_hyperbolic(space)?;
    let kappa0 = space.kappa0;
    let j = move |r: f64| scalar_j(kappa0, r).0;
    sweep_norm(
        space,
        pot,
        cfg,
        alpha0,
        &|wlo: f64, whi: f64| whi - wlo,
        &move |u: f64| 4.0 * std::f64::consts::PI * j(u) * pot.eval(u).abs(),
    )
}

/// Modified Kato norm with weight `1/min(1, d)`; quadrature split at the
/// kink w = 1.
pub fn modified_kato_norm(
    space: &Space,
    pot: &RadialPotential,
    cfg: &SweepConfig,
) -> Result<NormValue> {
    let alpha0 = require_hyperbolic(space)?;
    let kappa0 = space.kappa0;
    let j = move |r: f64| scalar_j(kappa0, r).0;
    let order = cfg.gl_order;
    sweep_norm(
        space,
        pot,
        cfg,
        2.0 * alpha0,
        &move |wlo: f64, whi: f64| {
            integrate_gl_split(|w| j(w) / w.min(1.0), wlo, whi, order, &[1.0])
        },
        &move |u: f64| {
            4.0 * std::f64::consts::PI * j(u) * j(u) * pot.eval(u).abs() / u.min(1.0)
        },
    )
}

/// Kato norm with the slower weight `1/j_δ(d)`.
pub fn kato_delta_norm(
    space: &Space,
    pot: &RadialPotential,
    delta: f64,
    cfg: &SweepConfig,
) -> Result<NormValue> {
    let alpha0 = require_hyperbolic(space)?;
    if delta <= 0.0 || delta >= alpha0 {
        return Err(Error::Domain(format!("delta = {delta} outside (0, {alpha0})")));
    }
    let kappa0 = space.kappa0;
    let j = move |r: f64| scalar_j(kappa0, r).0;
    let jd = move |r: f64| scalar_j_delta(alpha0, delta, r).unwrap();
    let order = cfg.gl_order;
    sweep_norm(
        space,
        pot,
        cfg,
        alpha0 + delta,
        &move |wlo: f64, whi: f64| {
            integrate_gl_panels(
                |w| if w < 1e-14 { 1.0 } else { j(w) / jd(w) },
                wlo,
                whi,
                order,
                2,
            )
        },
        &move |u: f64| {
            let w = if u < 1e-14 { 1.0 } else { j(u) / jd(u) };
            4.0 * std::f64::consts::PI * j(u) * w * pot.eval(u).abs()
        },
    )
}

/// `sup_γ ∫_γ F` over geodesics, for F radial about the center: the sweep
/// runs over the impact parameter b, with `d(s) = impact_distance(b, s)`
/// along each geodesic.
pub fn l1_gamma_norm(
    space: &Space,
    field: &RadialPotential,
    cfg: &SweepConfig,
) -> Result<NormValue> {
    let alpha0 = match space.kind {
        SpaceKind::Hyperbolic => space.alpha0(),
        SpaceKind::Flat => 0.0,
        SpaceKind::Sphere => return l1_gamma_sphere(space, field, cfg),
    };
    let s_cut = field.cutoff(0.0, alpha0.max(1e-6))?;
    let line_integral = |b: f64| -> f64 {
        let cuts = arclength_breakpoints(space, b, field);
        2.0 * crate::quad::integrate_gl_panels_split(
            |s| field.eval(crate::geometry::impact_distance(space, b, s)).abs(),
            0.0,
            s_cut,
            cfg.gl_order,
            cfg.panels_per_unit.max(1),
            &cuts,
        )
    };
    let mut b_max = s_cut;
    for _ in 0..4 {
        let bs: Vec<f64> =
            (0..cfg.n_rho).map(|i| b_max * i as f64 / (cfg.n_rho - 1) as f64).collect();
        let vals: Vec<f64> = bs.iter().map(|&b| line_integral(b)).collect();
        let (imax, vmax) = first_argmax(&vals);
        if imax + 1 < cfg.n_rho {
            return Ok(NormValue {
                value: vmax,
                argmax_rho: bs[imax],
                sweep: bs.into_iter().zip(vals).collect(),
            });
        }
        b_max *= 2.0;
    }
    Err(Error::Divergent("sup over geodesics not attained on an extendable grid".into()))
}

fn l1_gamma_sphere(
    space: &Space,
    field: &RadialPotential,
    cfg: &SweepConfig,
) -> Result<NormValue> {
    // geodesics are closed great circles of length 2π/√κ₀
    let k = space.kappa0.sqrt();
    let half = std::f64::consts::PI / k;
    let line_integral = |b: f64| -> f64 {
        2.0 * integrate_gl_panels(
            |s| field.eval(crate::geometry::impact_distance(space, b, s)).abs(),
            0.0,
            half,
            cfg.gl_order,
            cfg.panels_per_unit.max(8),
        )
    };
    let bs: Vec<f64> =
        (0..cfg.n_rho).map(|i| half * i as f64 / (cfg.n_rho - 1) as f64).collect();
    let vals: Vec<f64> = bs.iter().map(|&b| line_integral(b)).collect();
    let (imax, vmax) = first_argmax(&vals);
    Ok(NormValue { value: vmax, argmax_rho: bs[imax], sweep: bs.into_iter().zip(vals).collect() })
}

/// All norms of one potential, as emitted by the `kato-norm` CLI subcommand.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KatoReport {
    pub label: String,
    pub kato: f64,
    pub modified_kato: Option<f64>,
    pub kato_delta: f64,
    pub delta: f64,
    pub l1_gamma: f64,
}

/// Evaluate the full report; the modified norm is omitted (None) when the
/// potential is not integrable against the heavier weight.
pub fn kato_report(
    space: &Space,
    pot: &RadialPotential,
    delta: f64,
    cfg: &SweepConfig,
) -> Result<KatoReport> {
    let kato = kato_norm(space, pot, cfg)?;
    let modified = match modified_kato_norm(space, pot, cfg) {
        Ok(v) => Some(v.value),
        Err(Error::Divergent(_)) => None,
        Err(e) => return Err(e),
    };
    let kd = kato_delta_norm(space, pot, delta, cfg)?;
    let l1g = l1_gamma_norm(space, pot, cfg)?;
    Ok(KatoReport {
        label: pot.label().to_string(),
        kato: kato.value,
        modified_kato: modified,
        kato_delta: kd.value,
        delta,
        l1_gamma: l1g.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3() -> Space {
        Space::hyperbolic()
    }

    #[test]
    fn zero_potential_all_norms_vanish() {
        let cfg = SweepConfig::default();
        assert_eq!(kato_norm(&h3(), &RadialPotential::zero(), &cfg).unwrap().value, 0.0);
        assert_eq!(
            modified_kato_norm(&h3(), &RadialPotential::zero(), &cfg).unwrap().value,
            0.0
        );
        assert_eq!(l1_gamma_norm(&h3(), &RadialPotential::zero(), &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn ball_kato_norm_attained_at_center() {
        let cfg = SweepConfig::default();
        let v = RadialPotential::ball(1.0, 1.0);
        let out = kato_norm(&h3(), &v, &cfg).unwrap();
        let center = 4.0 * std::f64::consts::PI * (1.0f64.cosh() - 1.0);
        assert!((center - 6.8245).abs() < 5e-4);
        assert!(out.value >= center - 1e-9);
        assert!((out.value - center).abs() < 1e-8 * center, "sup should sit at the center");
        assert!(out.argmax_rho == 0.0);
    }

    #[test]
    fn kato_norm_is_homogeneous() {
        let cfg = SweepConfig::default();
        let v = RadialPotential::gaussian(0.7, 0.5, 0.4);
        let a = kato_norm(&h3(), &v, &cfg).unwrap().value;
        let b = kato_norm(&h3(), &v.scaled(3.5), &cfg).unwrap().value;
        assert!((b - 3.5 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn refinement_convergence() {
        let v = RadialPotential::ball(1.0, 1.0);
        let coarse = SweepConfig { n_rho: 48, gl_order: 16, panels_per_unit: 4 };
        let fine = SweepConfig { n_rho: 48, gl_order: 32, panels_per_unit: 8 };
        for f in [kato_norm, modified_kato_norm] {
            let a = f(&h3(), &v, &coarse).unwrap().value;
            let b = f(&h3(), &v, &fine).unwrap().value;
            assert!((a - b).abs() < 1e-6 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn modified_dominates_l1() {
        let cfg = SweepConfig::default();
        let v = RadialPotential::ball(1.0, 1.0);
        let modified = modified_kato_norm(&h3(), &v, &cfg).unwrap().value;
        // ∫ |V| dx = 4π ∫ sinh²u du on [0,1]
        let l1 = 4.0
            * std::f64::consts::PI
            * crate::quad::integrate_gl(|u: f64| u.sinh() * u.sinh(), 0.0, 1.0, 32);
        assert!(modified >= l1);
    }

    #[test]
    fn jacobi_power_family_finite_and_monotone() {
        let cfg = SweepConfig::default();
        let mut prev = f64::INFINITY;
        for p in [1.5, 2.0, 3.0] {
            let v = RadialPotential::jacobi_power(&h3(), p);
            let val = kato_norm(&h3(), &v, &cfg).unwrap().value;
            assert!(val.is_finite() && val > 0.0);
            assert!(val < prev, "kato norm should decrease in p");
            prev = val;
        }
        let shallow = RadialPotential::jacobi_power(&h3(), 0.9);
        assert!(matches!(kato_norm(&h3(), &shallow, &cfg), Err(Error::Divergent(_))));
    }

    #[test]
    fn exp_tail_must_beat_weight_growth() {
        let cfg = SweepConfig::default();
        let v = RadialPotential::exp_decay(1.0, 0.8);
        assert!(matches!(kato_norm(&h3(), &v, &cfg), Err(Error::Divergent(_))));
        // rate 1.5 beats the Kato weight but not the modified one
        let v = RadialPotential::exp_decay(1.0, 1.5);
        assert!(kato_norm(&h3(), &v, &cfg).is_ok());
        assert!(matches!(modified_kato_norm(&h3(), &v, &cfg), Err(Error::Divergent(_))));
        let report = kato_report(&h3(), &v, 0.1, &cfg).unwrap();
        assert!(report.modified_kato.is_none());
        assert!(report.kato_delta.is_finite());
    }

    #[test]
    fn l1_gamma_examples() {
        let cfg = SweepConfig { n_rho: 64, ..Default::default() };
        // chord through the center of a unit ball has length 2
        let v = RadialPotential::ball(1.0, 1.0);
        let out = l1_gamma_norm(&h3(), &v, &cfg).unwrap();
        assert!((out.value - 2.0).abs() < 1e-6, "{}", out.value);
        assert_eq!(out.argmax_rho, 0.0);
        // F = e^{-d}: sup at b = 0 with value 2, decreasing in b
        let v = RadialPotential::exp_decay(1.0, 1.0);
        let out = l1_gamma_norm(&h3(), &v, &cfg).unwrap();
        assert!((out.value - 2.0).abs() < 1e-9, "{}", out.value);
        for w in out.sweep.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "line integral should decrease in b");
        }
    }

    #[test]
    fn delta_norm_between_kato_and_modified_scales() {
        let cfg = SweepConfig::default();
        let v = RadialPotential::ball(0.3, 1.0);
        let kato = kato_norm(&h3(), &v, &cfg).unwrap().value;
        let kd = kato_delta_norm(&h3(), &v, 0.1, &cfg).unwrap().value;
        assert!(kd.is_finite() && kd > 0.5 * kato && kd < 3.0 * kato);
        assert!(kato_delta_norm(&h3(), &v, 2.0, &cfg).is_err());
    }
}
