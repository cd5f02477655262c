//! The EHD energy, its one-phase restriction, and domain-variation
//! residuals.
//!
//! Weights follow the sign of `x2 - x2_0`: positivity above the datum costs
//! `(x2 - x2_0)^+`, negativity below costs `(x2_0 - x2)^+`, and both weights
//! vanish on the datum line itself. Phase indicators are strict: a sampled
//! value of exactly zero belongs to neither phase.
//!
//! Ball regions are integrated in polar form; the `chi . phi_2` terms of the
//! first variation jump across the datum line, so those rings are split at
//! the datum crossing angles. Hull regions use the discrete form of the
//! functional (trapezoid-weighted edge differences plus nodal weights),
//! which is also the object the minimizer descends on.

use crate::field::{quad, ScalarField};
use crate::geom::Vec2;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Gravity weight on the positive phase.
pub fn weight_plus(y: f64, x2_0: f64) -> f64 {
    (y - x2_0).max(0.0)
}

/// Gravity weight on the negative phase: `(x2 - x2_0)^+ + x2_0 - x2`,
/// equal to `(x2_0 - x2)^+`.
pub fn weight_minus(y: f64, x2_0: f64) -> f64 {
    (y - x2_0).max(0.0) + x2_0 - y
}

/// Which weight family an integral uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightSelector {
    TwoPhase,
    OnePhaseNegative,
}

/// Weight specification: datum height plus selector.
#[derive(Clone, Copy, Debug)]
pub struct WeightSpec {
    pub x2_0: f64,
    pub selector: WeightSelector,
}

/// Integration region for the energy operations.
#[derive(Clone, Copy, Debug)]
pub enum Region {
    Ball { center: Vec2, radius: f64 },
    Hull,
}

/// Quadrature controls for the ball-region paths.
#[derive(Clone, Debug)]
pub struct EnergyOpts {
    pub n_theta: usize,
    pub n_rho: Option<usize>,
    pub ring_offset: bool,
}

impl Default for EnergyOpts {
    fn default() -> Self {
        EnergyOpts {
            n_theta: 1024,
            n_rho: None,
            ring_offset: true,
        }
    }
}

fn ball_quad(opts: &EnergyOpts) -> quad::BallQuad {
    quad::BallQuad {
        n_theta: opts.n_theta,
        n_rho: opts.n_rho,
        breakpoints: Vec::new(),
        ring_offset: opts.ring_offset,
    }
}

/// Discrete EHD energy on the full hull: trapezoid-weighted edge
/// differences for the Dirichlet part, nodal gravity weights with strict
/// sign indicators for the phase terms.
pub fn discrete_energy(field: &ScalarField) -> f64 {
    let (nx, ny, h) = (field.nx(), field.ny(), field.h());
    let x2_0 = field.x2_0();
    let mut dirichlet = 0.0;
    for iy in 0..ny {
        let row_w = if iy == 0 || iy == ny - 1 { 0.5 } else { 1.0 };
        for ix in 0..nx - 1 {
            let d = field.value(ix + 1, iy) - field.value(ix, iy);
            dirichlet += row_w * d * d;
        }
    }
    for ix in 0..nx {
        let col_w = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
        for iy in 0..ny - 1 {
            let d = field.value(ix, iy + 1) - field.value(ix, iy);
            dirichlet += col_w * d * d;
        }
    }
    let mut weight = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let mut w = 1.0;
            if ix == 0 || ix == nx - 1 {
                w *= 0.5;
            }
            if iy == 0 || iy == ny - 1 {
                w *= 0.5;
            }
            let v = field.value(ix, iy);
            let y = field.position(ix, iy).y;
            if v > 0.0 {
                weight += w * weight_plus(y, x2_0);
            } else if v < 0.0 {
                weight += w * weight_minus(y, x2_0);
            }
        }
    }
    dirichlet + weight * h * h
}

/// EHD functional `int |grad u|^2 + w+ chi_{u>0} + w- chi_{u<0}`.
pub fn e_ehd(field: &ScalarField, region: Region, opts: &EnergyOpts) -> Result<f64> {
    match region {
        Region::Hull => Ok(discrete_energy(field)),
        Region::Ball { center, radius } => {
            field.require_ball(center, radius, 2.0 * field.h())?;
            let x2_0 = field.x2_0();
            let f = |p: Vec2| {
                let g = field.one_sided_grad(p).map_or(0.0, |g| g.norm_sq());
                let ph = field.phase_indicator(p);
                let mut e = g;
                if ph > 0 {
                    e += weight_plus(p.y, x2_0);
                } else if ph < 0 {
                    e += weight_minus(p.y, x2_0);
                }
                e
            };
            Ok(quad::ball(f, center, radius, field.h(), &ball_quad(opts)))
        }
    }
}

/// One-phase energy of `u-`; rejects fields with visible positive mass.
pub fn e_onephase(field: &ScalarField, region: Region, opts: &EnergyOpts) -> Result<f64> {
    let pos_mass = match region {
        Region::Hull => field
            .values()
            .iter()
            .map(|v| v.max(0.0))
            .sum::<f64>()
            * field.h()
            * field.h(),
        Region::Ball { center, radius } => {
            field.require_ball(center, radius, 2.0 * field.h())?;
            quad::ball(
                |p| field.sample(p).unwrap_or(0.0).max(0.0),
                center,
                radius,
                field.h(),
                &ball_quad(opts),
            )
        }
    };
    if pos_mass > 1e-9 {
        return Err(Error::NotOnePhase(pos_mass));
    }
    let neg = field.negative_part();
    let x2_0 = field.x2_0();
    match region {
        Region::Hull => Ok(discrete_energy(&neg)),
        Region::Ball { center, radius } => {
            let f = |p: Vec2| {
                let g = neg.one_sided_grad(p).map_or(0.0, |g| g.norm_sq());
                let w = if neg.phase_indicator(p) < 0 {
                    weight_minus(p.y, x2_0).max(0.0)
                } else {
                    0.0
                };
                g + w
            };
            Ok(quad::ball(f, center, radius, field.h(), &ball_quad(opts)))
        }
    }
}

/// Compactly supported closed-form test vector field with exact Jacobian.
///
/// `phi(x) = psi(|x-c|^2 / R^2) v(x)` with `psi(s) = (1-s)^2` inside the
/// support disk; `v` is a constant direction or the solid rotation about
/// the center.
#[derive(Clone, Copy, Debug)]
pub struct TestVectorField {
    pub center: Vec2,
    pub radius: f64,
    pub kind: BumpKind,
}

#[derive(Clone, Copy, Debug)]
pub enum BumpKind {
    Translate(Vec2),
    Rotate,
}

impl TestVectorField {
    fn psi(s: f64) -> f64 {
        if s < 1.0 {
            (1.0 - s) * (1.0 - s)
        } else {
            0.0
        }
    }

    fn dpsi(s: f64) -> f64 {
        if s < 1.0 {
            -2.0 * (1.0 - s)
        } else {
            0.0
        }
    }

    fn direction(&self, d: Vec2) -> Vec2 {
        match self.kind {
            BumpKind::Translate(v) => v,
            BumpKind::Rotate => d.perp(),
        }
    }

    pub fn eval(&self, p: Vec2) -> Vec2 {
        let d = p - self.center;
        let s = d.norm_sq() / (self.radius * self.radius);
        self.direction(d) * Self::psi(s)
    }

    /// Exact Jacobian `D phi`, rows indexed by component, columns by
    /// derivative direction.
    pub fn jacobian(&self, p: Vec2) -> [[f64; 2]; 2] {
        let d = p - self.center;
        let r2 = self.radius * self.radius;
        let s = d.norm_sq() / r2;
        let psi = Self::psi(s);
        let dpsi = Self::dpsi(s);
        let v = self.direction(d);
        let (dv11, dv12, dv21, dv22) = match self.kind {
            BumpKind::Translate(_) => (0.0, 0.0, 0.0, 0.0),
            BumpKind::Rotate => (0.0, -1.0, 1.0, 0.0),
        };
        let gx = 2.0 * d.x / r2;
        let gy = 2.0 * d.y / r2;
        [
            [dpsi * gx * v.x + psi * dv11, dpsi * gy * v.x + psi * dv12],
            [dpsi * gx * v.y + psi * dv21, dpsi * gy * v.y + psi * dv22],
        ]
    }

    pub fn divergence(&self, p: Vec2) -> f64 {
        let j = self.jacobian(p);
        j[0][0] + j[1][1]
    }

    /// `sup |phi| + sup |D phi|` (spectral norm), estimated on a dense
    /// deterministic sample of the support.
    pub fn c1_norm(&self) -> f64 {
        let mut sup_phi = 0.0f64;
        let mut sup_jac = 0.0f64;
        let n = 160;
        for i in 0..=n {
            for j in 0..=n {
                let p = self.center
                    + Vec2::new(
                        (-1.0 + 2.0 * i as f64 / n as f64) * self.radius,
                        (-1.0 + 2.0 * j as f64 / n as f64) * self.radius,
                    );
                sup_phi = sup_phi.max(self.eval(p).norm());
                let m = self.jacobian(p);
                // Spectral norm of a 2x2 matrix.
                let a = m[0][0] * m[0][0] + m[0][1] * m[0][1];
                let b = m[1][0] * m[1][0] + m[1][1] * m[1][1];
                let c = m[0][0] * m[1][0] + m[0][1] * m[1][1];
                let tr = a + b;
                let det = (a - b) * (a - b) + 4.0 * c * c;
                sup_jac = sup_jac.max((0.5 * (tr + det.sqrt())).sqrt());
            }
        }
        sup_phi + sup_jac
    }

    /// A deterministic battery of ten test fields inside the box of the
    /// given half-extent around `center`.
    pub fn standard_set(center: Vec2, extent: f64) -> Vec<TestVectorField> {
        let r = 0.30 * extent;
        let s = 0.40 * extent;
        let e1 = Vec2::new(1.0, 0.0);
        let e2 = Vec2::new(0.0, 1.0);
        vec![
            TestVectorField { center: center + Vec2::new(0.25, -0.30) * extent, radius: r, kind: BumpKind::Translate(e1) },
            TestVectorField { center: center + Vec2::new(-0.25, -0.30) * extent, radius: r, kind: BumpKind::Translate(e2) },
            TestVectorField { center: center + Vec2::new(0.0, 0.35) * extent, radius: r, kind: BumpKind::Translate(e1 * -1.0) },
            TestVectorField { center: center + Vec2::new(0.0, -0.40) * extent, radius: r, kind: BumpKind::Translate(e2 * -1.0) },
            TestVectorField { center: center + Vec2::new(0.30, 0.20) * extent, radius: s, kind: BumpKind::Rotate },
            TestVectorField { center: center + Vec2::new(-0.30, 0.20) * extent, radius: s, kind: BumpKind::Rotate },
            TestVectorField { center: center + Vec2::new(0.35, -0.10) * extent, radius: 0.22 * extent, kind: BumpKind::Translate(Vec2::new(0.6, 0.8)) },
            TestVectorField { center: center + Vec2::new(-0.35, -0.10) * extent, radius: 0.22 * extent, kind: BumpKind::Translate(Vec2::new(-0.6, 0.8)) },
            TestVectorField { center, radius: 0.45 * extent, kind: BumpKind::Rotate },
            TestVectorField { center: center + Vec2::new(0.10, -0.20) * extent, radius: 0.35 * extent, kind: BumpKind::Translate(Vec2::new(0.8, -0.6)) },
        ]
    }
}

/// Ball integral split per ring at the datum crossing angles, for
/// integrands that jump across `y = x2_0`.
fn ball_datum_split<F: Fn(Vec2) -> f64>(
    f: F,
    center: Vec2,
    r: f64,
    h: f64,
    x2_0: f64,
    n_theta: usize,
) -> f64 {
    let n_rho = ((r / h).ceil() as usize).max(8);
    let d_rho = r / n_rho as f64;
    let mut total = 0.0;
    for i in 0..n_rho {
        let rho = (i as f64 + 0.5) * d_rho;
        let s = (x2_0 - center.y) / rho;
        let breaks: Vec<f64> = if s.abs() < 1.0 {
            vec![s.asin(), PI - s.asin()]
        } else {
            Vec::new()
        };
        let ring = quad::circle(&f, center, rho, n_theta, &breaks) / rho;
        total += ring * rho * d_rho;
    }
    total
}

/// First variation of the EHD functional with respect to the domain
/// variation `phi`; vanishes (up to discretization) at weak solutions.
pub fn first_variation(field: &ScalarField, phi: &TestVectorField, opts: &EnergyOpts) -> Result<f64> {
    field.require_ball(phi.center, phi.radius, 2.0 * field.h())?;
    let x2_0 = field.x2_0();
    let f = |p: Vec2| {
        let g = match field.one_sided_grad(p) {
            Ok(g) => g,
            Err(_) => return 0.0,
        };
        let ph = field.phase_indicator(p);
        let jac = phi.jacobian(p);
        let div = jac[0][0] + jac[1][1];
        let jg = Vec2::new(
            jac[0][0] * g.x + jac[0][1] * g.y,
            jac[1][0] * g.x + jac[1][1] * g.y,
        );
        let mut t = g.norm_sq() * div - 2.0 * g.dot(jg);
        let phi2 = phi.eval(p).y;
        if p.y < x2_0 && ph < 0 {
            t += (x2_0 - p.y) * div - phi2;
        }
        if p.y > x2_0 && ph > 0 {
            t += (p.y - x2_0) * div + phi2;
        }
        t
    };
    Ok(ball_datum_split(
        f,
        phi.center,
        phi.radius,
        field.h(),
        x2_0,
        opts.n_theta,
    ))
}

/// One-phase first variation for `u-` alone.
pub fn first_variation_onephase(
    field: &ScalarField,
    phi: &TestVectorField,
    opts: &EnergyOpts,
) -> Result<f64> {
    field.require_ball(phi.center, phi.radius, 2.0 * field.h())?;
    let neg = field.negative_part();
    let x2_0 = field.x2_0();
    let f = |p: Vec2| {
        let g = match neg.one_sided_grad(p) {
            Ok(g) => g,
            Err(_) => return 0.0,
        };
        let jac = phi.jacobian(p);
        let div = jac[0][0] + jac[1][1];
        let jg = Vec2::new(
            jac[0][0] * g.x + jac[0][1] * g.y,
            jac[1][0] * g.x + jac[1][1] * g.y,
        );
        let mut t = g.norm_sq() * div - 2.0 * g.dot(jg);
        if p.y < x2_0 && neg.phase_indicator(p) < 0 {
            t += (x2_0 - p.y) * div - phi.eval(p).y;
        }
        t
    };
    Ok(ball_datum_split(
        f,
        phi.center,
        phi.radius,
        field.h(),
        x2_0,
        opts.n_theta,
    ))
}

/// Per-vertex residual of the transition condition
/// `|grad u-|^2 - |grad u+|^2 = x2_0 - x2` along `partial {u < 0}`,
/// with one-sided gradients sampled a fixed offset into each phase.
#[derive(Clone, Debug)]
pub struct TransitionResiduals {
    pub count: usize,
    pub mean_abs: f64,
    pub max_abs: f64,
}

pub fn transition_residuals(
    field: &ScalarField,
    r_min: f64,
    r_max: f64,
    center: Vec2,
) -> TransitionResiduals {
    let h = field.h();
    let x2_0 = field.x2_0();
    let neg = field.negative_part();
    let pos = field.positive_part();
    let polys = field.extract_level_set(crate::profiles::Phase::Negative);
    let mut residuals: Vec<f64> = Vec::new();
    for poly in &polys {
        let m = poly.vertices.len();
        for (i, &v) in poly.vertices.iter().enumerate() {
            let rho = v.dist(center);
            if rho < r_min || rho > r_max {
                continue;
            }
            // Tangent from neighbors, normal oriented into {u < 0}.
            let a = poly.vertices[if i == 0 { 0 } else { i - 1 }];
            let b = poly.vertices[if i + 1 < m { i + 1 } else { m - 1 }];
            let t = b - a;
            if t.norm() < 1e-14 {
                continue;
            }
            let mut n = t.perp() * (1.0 / t.norm());
            let probe = v + n * (2.0 * h);
            let inside = field.sample(probe).map_or(false, |s| s < 0.0);
            if !inside {
                n = -n;
            }
            let p_in = v + n * (2.0 * h);
            let p_out = v - n * (2.0 * h);
            let (g_in, g_out) = match (neg.grad(p_in), pos.grad(p_out)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            let res = g_in.norm_sq() - g_out.norm_sq() - (x2_0 - v.y);
            residuals.push(res.abs());
        }
    }
    let count = residuals.len();
    let mean_abs = if count == 0 {
        0.0
    } else {
        residuals.iter().sum::<f64>() / count as f64
    };
    let max_abs = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    TransitionResiduals {
        count,
        mean_abs,
        max_abs,
    }
}

/// One-phase boundary height diagnostic: vertices of `Gamma_op+` must not
/// fall below `x2_0 - 2h`, vertices of `Gamma_op-` must not rise above
/// `x2_0 + 2h`.
#[derive(Clone, Debug, Default)]
pub struct HeightCheck {
    pub op_plus_vertices: usize,
    pub op_plus_violations: usize,
    pub op_minus_vertices: usize,
    pub op_minus_violations: usize,
    pub max_violation: f64,
}

pub fn one_phase_height_check(field: &ScalarField) -> HeightCheck {
    let h = field.h();
    let x2_0 = field.x2_0();
    let mut out = HeightCheck::default();
    let ring = |v: Vec2| -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..8 {
            let t = 2.0 * PI * k as f64 / 8.0;
            let p = v + Vec2::from_polar(2.0 * h, t);
            match field.sample(p) {
                Ok(s) => {
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                Err(_) => return None,
            }
        }
        Some((lo, hi))
    };
    for poly in field.extract_level_set(crate::profiles::Phase::Positive) {
        for &v in &poly.vertices {
            if let Some((lo, _hi)) = ring(v) {
                if lo >= -1e-12 {
                    out.op_plus_vertices += 1;
                    let gap = (x2_0 - 2.0 * h) - v.y;
                    if gap > 0.0 {
                        out.op_plus_violations += 1;
                        out.max_violation = out.max_violation.max(gap);
                    }
                }
            }
        }
    }
    for poly in field.extract_level_set(crate::profiles::Phase::Negative) {
        for &v in &poly.vertices {
            if let Some((_lo, hi)) = ring(v) {
                if hi <= 1e-12 {
                    out.op_minus_vertices += 1;
                    let gap = v.y - (x2_0 + 2.0 * h);
                    if gap > 0.0 {
                        out.op_minus_violations += 1;
                        out.max_violation = out.max_violation.max(gap);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::PiecewiseProfile;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn ball1() -> Region {
        Region::Ball {
            center: Vec2::ZERO,
            radius: 1.0,
        }
    }

    #[test]
    fn weights_are_consistent() {
        for y in [-1.0, -0.25, 0.0, 0.3, 2.0] {
            for x2_0 in [-0.5, 0.0, 0.7] {
                let w = weight_minus(y, x2_0);
                assert_close(w, (x2_0 - y).max(0.0), 1e-15);
                assert!(w >= 0.0);
                assert!(weight_plus(y, x2_0) >= 0.0);
            }
        }
    }

    #[test]
    fn ehd_energy_values() {
        let h = 1.0 / 128.0;
        let zero = ScalarField::centered(1.2, h, 0.0, |_| 0.0).unwrap();
        assert_close(e_ehd(&zero, ball1(), &EnergyOpts::default()).unwrap(), 0.0, 1e-12);

        let lower = ScalarField::centered(1.2, h, 0.0, |p| p.y.min(0.0)).unwrap();
        let e = e_ehd(&lower, ball1(), &EnergyOpts::default()).unwrap();
        assert_close(e, PI / 2.0 + 2.0 / 3.0, 2e-2);

        let lin = ScalarField::centered(1.2, h, 0.0, |p| p.y).unwrap();
        let e = e_ehd(&lin, ball1(), &EnergyOpts::default()).unwrap();
        assert_close(e, PI + 4.0 / 3.0, 1e-3);
    }

    #[test]
    fn onephase_energy() {
        let h = 1.0 / 128.0;
        let lower = ScalarField::centered(1.2, h, 0.0, |p| p.y.min(0.0)).unwrap();
        let e = e_onephase(&lower, ball1(), &EnergyOpts::default()).unwrap();
        assert_close(e, PI / 2.0 + 2.0 / 3.0, 2e-2);

        let zero = ScalarField::centered(1.2, h, 0.0, |_| 0.0).unwrap();
        assert_close(
            e_onephase(&zero, ball1(), &EnergyOpts::default()).unwrap(),
            0.0,
            1e-12,
        );

        let a1 = PiecewiseProfile::a1();
        let f = ScalarField::from_profile(&a1, 1.2, h, 0.0).unwrap();
        let e = e_onephase(&f, ball1(), &EnergyOpts::default()).unwrap();
        // Dirichlet part pi/9 by the homogeneity identity, plus the density.
        assert_close(e, PI / 9.0 + 3f64.sqrt() / 3.0, 1e-2);

        let lin = ScalarField::centered(1.2, h, 0.0, |p| p.y).unwrap();
        assert!(matches!(
            e_onephase(&lin, ball1(), &EnergyOpts::default()),
            Err(Error::NotOnePhase(_))
        ));
    }

    #[test]
    fn ehd_equals_onephase_plus_positive_terms() {
        let h = 1.0 / 96.0;
        let lower = ScalarField::centered(1.2, h, 0.0, |p| p.y.min(0.0)).unwrap();
        let full = e_ehd(&lower, ball1(), &EnergyOpts::default()).unwrap();
        let one = e_onephase(&lower, ball1(), &EnergyOpts::default()).unwrap();
        assert_close(full, one, 1e-12);
    }

    #[test]
    fn isolated_node_perturbation_is_second_order() {
        let h = 1.0 / 64.0;
        let base = ScalarField::centered(1.0, h, 0.0, |p| p.y).unwrap();
        let e0 = discrete_energy(&base);
        let mut values = base.values().to_vec();
        let n = base.nx();
        values[(n / 2) * n + n / 2 - 7] += 0.4 * h;
        let bumped = ScalarField::new(base.origin(), h, n, n, 0.0, values).unwrap();
        let e1 = discrete_energy(&bumped);
        assert!((e1 - e0).abs() <= 8.0 * h * h, "{}", (e1 - e0).abs());
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let fields = TestVectorField::standard_set(Vec2::ZERO, 1.0);
        let d = 1e-6;
        for (k, phi) in fields.iter().enumerate() {
            for p in [
                phi.center + Vec2::new(0.1 * phi.radius, -0.4 * phi.radius),
                phi.center + Vec2::new(-0.6 * phi.radius, 0.2 * phi.radius),
                phi.center + Vec2::new(0.5 * phi.radius, 0.5 * phi.radius),
            ] {
                let j = phi.jacobian(p);
                let fx = (phi.eval(Vec2::new(p.x + d, p.y)) - phi.eval(Vec2::new(p.x - d, p.y)))
                    * (0.5 / d);
                let fy = (phi.eval(Vec2::new(p.x, p.y + d)) - phi.eval(Vec2::new(p.x, p.y - d)))
                    * (0.5 / d);
                assert_close(j[0][0], fx.x, 1e-6);
                assert_close(j[1][0], fx.y, 1e-6);
                assert_close(j[0][1], fy.x, 1e-6);
                assert_close(j[1][1], fy.y, 1e-6);
                assert!(phi.c1_norm() > 0.0, "field {k}");
            }
        }
    }

    #[test]
    fn first_variation_flat_interface() {
        let h = 1.0 / 128.0;
        let lin = ScalarField::centered(1.2, h, 0.0, |p| p.y).unwrap();
        let phi = TestVectorField {
            center: Vec2::new(0.1, -0.05),
            radius: 0.5,
            kind: BumpKind::Translate(Vec2::new(0.3, 1.0)),
        };
        let fv = first_variation(&lin, &phi, &EnergyOpts::default()).unwrap();
        assert!(fv.abs() < 2e-3 * phi.c1_norm(), "{fv:.3e}");
    }

    #[test]
    fn first_variation_constant_above_datum() {
        let one = ScalarField::centered(1.0, 0.05, 5.0, |_| 1.0).unwrap();
        let phi = TestVectorField {
            center: Vec2::ZERO,
            radius: 0.5,
            kind: BumpKind::Rotate,
        };
        let fv = first_variation(&one, &phi, &EnergyOpts::default()).unwrap();
        assert!(fv.abs() < 1e-28, "{fv:.3e}");
    }

    #[test]
    fn first_variation_a1_decays_with_h() {
        let a1 = PiecewiseProfile::a1();
        let phi = TestVectorField {
            center: Vec2::new(0.25, -0.35),
            radius: 0.4,
            kind: BumpKind::Translate(Vec2::new(0.0, 1.0)),
        };
        let mut vals = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let f = ScalarField::from_profile(&a1, 1.2, h, 0.0).unwrap();
            vals.push(first_variation(&f, &phi, &EnergyOpts::default()).unwrap().abs());
        }
        assert!(vals[2] < vals[0], "{vals:?}");
        assert!(vals[2] < 0.05 * phi.c1_norm(), "{vals:?}");
    }

    #[test]
    fn onephase_first_variation() {
        let h = 1.0 / 128.0;
        let a1 = PiecewiseProfile::a1();
        let f = ScalarField::from_profile(&a1, 1.2, h, 0.0).unwrap();
        let phi = TestVectorField {
            center: Vec2::new(-0.2, -0.4),
            radius: 0.35,
            kind: BumpKind::Rotate,
        };
        let fv = first_variation_onephase(&f, &phi, &EnergyOpts::default()).unwrap();
        assert!(fv.abs() < 0.05 * phi.c1_norm(), "{fv:.3e}");

        let zero = ScalarField::centered(1.0, 0.05, 0.0, |_| 0.0).unwrap();
        let fv = first_variation_onephase(&zero, &phi, &EnergyOpts::default()).unwrap();
        assert_eq!(fv, 0.0);

        let lower = ScalarField::centered(1.2, h, 0.0, |p| p.y.min(0.0)).unwrap();
        let fv = first_variation_onephase(&lower, &phi, &EnergyOpts::default()).unwrap();
        assert!(fv.abs() < 0.02 * phi.c1_norm(), "{fv:.3e}");
    }

    #[test]
    fn transition_residuals_decay_first_order() {
        let a1 = PiecewiseProfile::a1();
        let mut means = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let f = ScalarField::from_profile(&a1, 1.2, h, 0.0).unwrap();
            let r = transition_residuals(&f, 0.2, 0.6, Vec2::ZERO);
            assert!(r.count > 10);
            means.push(r.mean_abs);
        }
        assert!(means[1] < means[0], "{means:?}");
        assert!(means[2] < means[1], "{means:?}");
        assert!(means[2] < means[0] / 2.5, "{means:?}");
    }

    #[test]
    fn height_check_clean_on_catalog() {
        let a4 = PiecewiseProfile::a4_left();
        let f = ScalarField::from_profile(&a4, 1.0, 1.0 / 64.0, 0.0).unwrap();
        let check = one_phase_height_check(&f);
        assert_eq!(check.op_minus_violations, 0);
        assert_eq!(check.op_plus_violations, 0);
    }
}
