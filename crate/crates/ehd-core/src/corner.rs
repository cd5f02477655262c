//! Algebraic corner systems: for a fixed opening position `theta1` the
//! squared amplitudes solve a small linear system, so roots are found by a
//! scan over `theta1 in [-pi, -2pi/3]` with a linear least-squares solve at
//! each grid point, followed by Gauss-Newton polish on the full system.
//!
//! Unilateral systems couple one negative and one positive cone through a
//! shared ray; the two configurations differ in which ray carries the
//! two-phase condition. The bilateral system surrounds the negative cone
//! with two positive cones.

use crate::profiles::{CatalogTag, Phase, PiecewiseProfile, SectorProfile};
use crate::report::{format_f64, Summary};
use crate::{Error, Result};
use std::f64::consts::PI;

const THETA_LO: f64 = -PI;
const THETA_HI: f64 = -2.0 * PI / 3.0;

/// Which displayed equation set the system carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CornerVariant {
    /// Two-phase condition on the ray `theta1`.
    Unilateral1,
    /// Two-phase condition on the ray `theta1 + 2pi/3`.
    Unilateral2,
    /// Negative cone flanked by two positive cones.
    Bilateral,
}

impl CornerVariant {
    pub fn unknowns(self) -> usize {
        match self {
            CornerVariant::Unilateral1 | CornerVariant::Unilateral2 => 2,
            CornerVariant::Bilateral => 3,
        }
    }

    pub fn equations(self) -> usize {
        match self {
            CornerVariant::Unilateral1 | CornerVariant::Unilateral2 => 3,
            CornerVariant::Bilateral => 4,
        }
    }
}

impl std::fmt::Display for CornerVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CornerVariant::Unilateral1 => write!(f, "unilateral-1"),
            CornerVariant::Unilateral2 => write!(f, "unilateral-2"),
            CornerVariant::Bilateral => write!(f, "bilateral"),
        }
    }
}

/// Corner system: a variant plus the gravity switch (zeroing the right-hand
/// sides removes the forcing and degenerates the root set).
#[derive(Clone, Copy, Debug)]
pub struct CornerSystem {
    pub variant: CornerVariant,
    pub gravity: bool,
}

impl CornerSystem {
    pub fn new(variant: CornerVariant) -> Self {
        CornerSystem {
            variant,
            gravity: true,
        }
    }

    pub fn without_gravity(variant: CornerVariant) -> Self {
        CornerSystem {
            variant,
            gravity: false,
        }
    }

    fn rhs(&self, theta: f64) -> f64 {
        if self.gravity {
            theta.sin()
        } else {
            0.0
        }
    }

    /// Componentwise residuals of the displayed equations at the given
    /// squared amplitudes and opening position.
    pub fn residual(&self, amps_sq: &[f64], theta1: f64) -> Vec<f64> {
        let q = 2.25; // 9/4
        let s1 = self.rhs(theta1);
        let s2 = self.rhs(theta1 + 2.0 * PI / 3.0);
        let s3 = self.rhs(theta1 + 4.0 * PI / 3.0);
        match self.variant {
            CornerVariant::Unilateral1 => {
                assert_eq!(amps_sq.len(), 2);
                let (cm, cp) = (amps_sq[0], amps_sq[1]);
                vec![q * (cm - cp) + s1, q * cm + s2, q * cp - s3]
            }
            CornerVariant::Unilateral2 => {
                assert_eq!(amps_sq.len(), 2);
                let (cm, cp) = (amps_sq[0], amps_sq[1]);
                vec![q * (cm - cp) + s2, q * cm + s1, q * cp - s3]
            }
            CornerVariant::Bilateral => {
                assert_eq!(amps_sq.len(), 3);
                let (c1, c2, c3) = (amps_sq[0], amps_sq[1], amps_sq[2]);
                vec![
                    q * (c1 - c3) + s1,
                    q * (c1 - c2) + s2,
                    q * c2 - s3,
                    q * c3 - s3,
                ]
            }
        }
    }

    /// Least-squares amplitudes for fixed `theta1` (the amplitude
    /// subsystem is linear), clamped to the physical branch.
    fn solve_amplitudes(&self, theta1: f64) -> Vec<f64> {
        let q = 2.25;
        match self.variant {
            // Equations 2 and 3 determine the amplitudes; equation 1 is
            // the consistency condition picked up by the residual filter.
            CornerVariant::Unilateral1 => {
                let cm = -self.rhs(theta1 + 2.0 * PI / 3.0) / q;
                let cp = self.rhs(theta1 + 4.0 * PI / 3.0) / q;
                vec![cm.max(0.0), cp.max(0.0)]
            }
            CornerVariant::Unilateral2 => {
                let cm = -self.rhs(theta1) / q;
                let cp = self.rhs(theta1 + 4.0 * PI / 3.0) / q;
                vec![cm.max(0.0), cp.max(0.0)]
            }
            CornerVariant::Bilateral => {
                let c2 = self.rhs(theta1 + 4.0 * PI / 3.0) / q;
                let c3 = c2;
                // Least squares between equations 1 and 2 for c1.
                let c1 = 0.5 * ((c3 - self.rhs(theta1) / q) + (c2 - self.rhs(theta1 + 2.0 * PI / 3.0) / q));
                vec![c1.max(0.0), c2.max(0.0), c3.max(0.0)]
            }
        }
    }

    fn residual_inf(&self, amps_sq: &[f64], theta1: f64) -> f64 {
        self.residual(amps_sq, theta1)
            .iter()
            .fold(0.0f64, |a, r| a.max(r.abs()))
    }

    /// Gauss-Newton polish on the full system in `(amps_sq, theta1)`.
    fn polish(&self, amps_sq: &mut Vec<f64>, theta1: &mut f64) {
        let n = amps_sq.len() + 1;
        for _ in 0..60 {
            let r0 = self.residual(amps_sq, *theta1);
            let m = r0.len();
            if r0.iter().all(|r| r.abs() < 1e-15) {
                break;
            }
            // Numerical Jacobian (tiny system; exact enough at 1e-7 steps).
            let eps = 1e-7;
            let mut jac = vec![vec![0.0f64; n]; m];
            for c in 0..n {
                let mut a = amps_sq.clone();
                let mut t = *theta1;
                if c < amps_sq.len() {
                    a[c] += eps;
                } else {
                    t += eps;
                }
                let r1 = self.residual(&a, t);
                for row in 0..m {
                    jac[row][c] = (r1[row] - r0[row]) / eps;
                }
            }
            // Normal equations J^T J dx = -J^T r, solved by Gauss
            // elimination with partial pivoting.
            let mut ata = vec![vec![0.0f64; n + 1]; n];
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for row in 0..m {
                        s += jac[row][a] * jac[row][b];
                    }
                    ata[a][b] = s;
                }
                let mut s = 0.0;
                for row in 0..m {
                    s += jac[row][a] * r0[row];
                }
                ata[a][n] = -s;
            }
            for col in 0..n {
                let mut piv = col;
                for row in col + 1..n {
                    if ata[row][col].abs() > ata[piv][col].abs() {
                        piv = row;
                    }
                }
                ata.swap(col, piv);
                if ata[col][col].abs() < 1e-14 {
                    // Rank-deficient direction (degenerate family); freeze it.
                    continue;
                }
                for row in 0..n {
                    if row != col {
                        let f = ata[row][col] / ata[col][col];
                        for k in col..=n {
                            ata[row][k] -= f * ata[col][k];
                        }
                    }
                }
            }
            let mut step = vec![0.0f64; n];
            for c in 0..n {
                step[c] = if ata[c][c].abs() < 1e-14 {
                    0.0
                } else {
                    ata[c][n] / ata[c][c]
                };
            }
            for (c, a) in amps_sq.iter_mut().enumerate() {
                *a += step[c];
            }
            *theta1 += step[n - 1];
            if step.iter().all(|s| s.abs() < 1e-15) {
                break;
            }
        }
    }
}

/// Polished root of a corner system.
#[derive(Clone, Debug)]
pub struct CornerRoot {
    pub theta1: f64,
    pub amps_sq: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub residual_inf: f64,
}

/// Root set, or the report that the system degenerated to a continuum.
#[derive(Clone, Debug)]
pub enum CornerSolution {
    Roots(Vec<CornerRoot>),
    DegenerateFamily { grid_hits: usize, grid_size: usize },
}

/// Scan `theta1` on a 1e-3 grid, keep residual minima with nonnegative
/// squared amplitudes, polish by Gauss-Newton, deduplicate within 1e-6.
pub fn solve(system: &CornerSystem) -> Result<CornerSolution> {
    let step = 1e-3;
    let n = ((THETA_HI - THETA_LO) / step).round() as usize;
    let mut grid: Vec<(f64, f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    let mut hits = 0usize;
    for k in 0..=n {
        let theta = THETA_LO + (THETA_HI - THETA_LO) * k as f64 / n as f64;
        let amps = system.solve_amplitudes(theta);
        let res = system.residual_inf(&amps, theta);
        if res < 1e-9 && amps.iter().all(|&a| a >= -1e-15) {
            hits += 1;
        }
        grid.push((theta, res, amps));
    }
    if hits > n / 2 {
        return Ok(CornerSolution::DegenerateFamily {
            grid_hits: hits,
            grid_size: n + 1,
        });
    }
    // Candidate starts: local minima of the residual plus the endpoints.
    let mut candidates: Vec<usize> = Vec::new();
    for k in 0..=n {
        let r = grid[k].1;
        let left = if k == 0 { f64::INFINITY } else { grid[k - 1].1 };
        let right = if k == n { f64::INFINITY } else { grid[k + 1].1 };
        if r <= left && r <= right && r < 0.5 {
            candidates.push(k);
        }
    }
    candidates.push(0);
    candidates.push(n);

    let mut roots: Vec<CornerRoot> = Vec::new();
    for &k in &candidates {
        let (mut theta, _, amps) = grid[k].clone();
        let mut amps = amps;
        system.polish(&mut amps, &mut theta);
        let res = system.residual_inf(&amps, theta);
        if res >= 1e-12 {
            continue;
        }
        if amps.iter().any(|&a| a < -1e-12) {
            continue;
        }
        if theta < THETA_LO - 1e-9 || theta > THETA_HI + 1e-9 {
            continue;
        }
        let amps_sq: Vec<f64> = amps.iter().map(|&a| a.max(0.0)).collect();
        if roots.iter().any(|r| (r.theta1 - theta).abs() < 1e-6) {
            continue;
        }
        roots.push(CornerRoot {
            theta1: theta,
            amplitudes: amps_sq.iter().map(|a| a.sqrt()).collect(),
            amps_sq,
            residual_inf: res,
        });
    }
    roots.sort_by(|a, b| a.theta1.total_cmp(&b.theta1));
    if roots.is_empty() {
        return Err(Error::NoSolution);
    }
    Ok(CornerSolution::Roots(roots))
}

/// Builds the piecewise profile carried by a unilateral root: the negative
/// cone `(theta1, theta1 + 2pi/3)` plus the adjacent positive cone, with
/// phases chosen so every piece vanishes on its rays with the right sign.
pub fn root_to_profile(variant: CornerVariant, root: &CornerRoot) -> Result<PiecewiseProfile> {
    if variant == CornerVariant::Bilateral {
        return Err(Error::InvalidArgument(
            "bilateral roots correspond to the A3 entry, not a two-piece profile".into(),
        ));
    }
    let t1 = root.theta1;
    let cm = root.amplitudes[0];
    let cp = root.amplitudes[1];
    // Negative cone [t1, t1 + 2pi/3): argument runs over [pi/2, 3pi/2).
    let phi_m = crate::geom::normalize_angle(PI / 2.0 - 1.5 * t1);
    let neg = SectorProfile::new(
        cm,
        1.5,
        phi_m,
        crate::geom::normalize_angle(t1),
        crate::geom::normalize_angle(t1) + 2.0 * PI / 3.0,
        Phase::Negative,
    );
    // Positive cone on the other side of the two-phase ray.
    let (p_lo, phi_p) = match variant {
        CornerVariant::Unilateral1 => {
            // Shares the ray theta1; occupies (theta1 - 2pi/3, theta1).
            let lo = t1 - 2.0 * PI / 3.0;
            (lo, -PI / 2.0 - 1.5 * lo)
        }
        CornerVariant::Unilateral2 => {
            // Shares the ray theta1 + 2pi/3; occupies the next cone up.
            let lo = t1 + 2.0 * PI / 3.0;
            (lo, -PI / 2.0 - 1.5 * lo)
        }
        CornerVariant::Bilateral => unreachable!(),
    };
    // Renormalize the positive sector into [-pi, pi): the phase follows the
    // shift t -> t + 2pi k as phi -> phi - 3 pi k (mod 2pi).
    let mut lo = p_lo;
    let mut phi = phi_p;
    while lo < -PI - 1e-12 {
        lo += 2.0 * PI;
        phi -= 3.0 * PI;
    }
    while lo + 2.0 * PI / 3.0 > PI + 1e-12 {
        lo -= 2.0 * PI;
        phi += 3.0 * PI;
    }
    let pos = SectorProfile::new(
        cp,
        1.5,
        crate::geom::normalize_angle(phi),
        lo,
        lo + 2.0 * PI / 3.0,
        Phase::Positive,
    );
    let tag = if (crate::geom::normalize_angle(t1) + PI).abs() < 1e-6 {
        CatalogTag::A4Left
    } else {
        CatalogTag::A4Right
    };
    PiecewiseProfile::new(tag, vec![neg, pos])
}

/// Root table rendered as summary lines.
pub fn solution_summary(
    system: &CornerSystem,
    solution: &CornerSolution,
    config_hash: u64,
) -> String {
    match solution {
        CornerSolution::DegenerateFamily {
            grid_hits,
            grid_size,
        } => {
            let mut s = Summary::new();
            s.push_str("record", "corner-roots");
            s.push_str("variant", &system.variant.to_string());
            s.push_str("result", "degenerate-family");
            s.push_int("grid_hits", *grid_hits as i64);
            s.push_int("grid_size", *grid_size as i64);
            s.render(config_hash)
        }
        CornerSolution::Roots(roots) => {
            let mut out = String::new();
            for root in roots {
                let mut s = Summary::new();
                s.push_str("record", "corner-root");
                s.push_str("variant", &system.variant.to_string());
                s.push_f64("theta1", root.theta1);
                for (i, a) in root.amplitudes.iter().enumerate() {
                    s.push_str(&format!("c{}", i + 1), &format_f64(*a));
                }
                s.push_f64("residual_inf", root.residual_inf);
                out.push_str(&s.render(config_hash));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::consts;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn roots(variant: CornerVariant) -> Vec<CornerRoot> {
        match solve(&CornerSystem::new(variant)).unwrap() {
            CornerSolution::Roots(r) => r,
            CornerSolution::DegenerateFamily { .. } => panic!("unexpected degenerate family"),
        }
    }

    #[test]
    fn unilateral_config1_residual_at_the_paper_root() {
        let sys = CornerSystem::new(CornerVariant::Unilateral1);
        let c = 2.0 * 3f64.sqrt() / 9.0;
        let r = sys.residual(&[c, c], -PI);
        for v in &r {
            assert!(v.abs() < 1e-15, "{r:?}");
        }
        // All-zero amplitudes at theta1 = -5pi/6 leave the pure gravity
        // forcing in each equation.
        let r = sys.residual(&[0.0, 0.0], -5.0 * PI / 6.0);
        assert_close(r[0], (-5.0 * PI / 6.0).sin(), 1e-15); // -sin(5pi/6) = -1/2
        assert_close(r[1], (-5.0 * PI / 6.0 + 2.0 * PI / 3.0).sin(), 1e-15);
        assert_close(r[2], -(-5.0 * PI / 6.0 + 4.0 * PI / 3.0).sin(), 1e-15);
    }

    #[test]
    fn bilateral_residual_at_the_paper_root() {
        let sys = CornerSystem::new(CornerVariant::Bilateral);
        let r = sys.residual(&[2.0 / 3.0, 4.0 / 9.0, 4.0 / 9.0], -5.0 * PI / 6.0);
        for v in &r {
            assert!(v.abs() < 1e-15, "{r:?}");
        }
    }

    #[test]
    fn unilateral_root_sets() {
        let r1 = roots(CornerVariant::Unilateral1);
        assert_eq!(r1.len(), 1);
        assert_close(r1[0].theta1, -PI, 1e-9);
        assert_close(r1[0].amplitudes[0], consts::amp_a4(), 1e-12);
        assert_close(r1[0].amplitudes[1], consts::amp_a4(), 1e-12);
        assert!(r1[0].residual_inf < 1e-12);

        let r2 = roots(CornerVariant::Unilateral2);
        assert_eq!(r2.len(), 1);
        assert_close(r2[0].theta1, -2.0 * PI / 3.0, 1e-9);
        assert_close(r2[0].amplitudes[0], consts::amp_a4(), 1e-12);

        // No roots strictly inside the interval.
        for r in r1.iter().chain(r2.iter()) {
            let interior = r.theta1 > -PI + 1e-6 && r.theta1 < -2.0 * PI / 3.0 - 1e-6;
            assert!(!interior, "interior root at {}", r.theta1);
        }
    }

    #[test]
    fn bilateral_root_set() {
        let r = roots(CornerVariant::Bilateral);
        assert_eq!(r.len(), 1);
        assert_close(r[0].theta1, -5.0 * PI / 6.0, 1e-9);
        assert_close(r[0].amplitudes[0], consts::amp_a3_negative(), 1e-12);
        assert_close(r[0].amplitudes[1], 2.0 / 3.0, 1e-12);
        assert_close(r[0].amplitudes[2], 2.0 / 3.0, 1e-12);
        assert!(r[0].residual_inf < 1e-12);
    }

    #[test]
    fn zero_gravity_degenerates() {
        for variant in [
            CornerVariant::Unilateral1,
            CornerVariant::Unilateral2,
            CornerVariant::Bilateral,
        ] {
            match solve(&CornerSystem::without_gravity(variant)).unwrap() {
                CornerSolution::DegenerateFamily { grid_hits, grid_size } => {
                    assert!(grid_hits > grid_size / 2);
                }
                CornerSolution::Roots(_) => panic!("expected degenerate family"),
            }
        }
    }

    #[test]
    fn unilateral_roots_reproduce_catalog_profiles() {
        let r1 = &roots(CornerVariant::Unilateral1)[0];
        let p1 = root_to_profile(CornerVariant::Unilateral1, r1).unwrap();
        assert_eq!(p1.name, CatalogTag::A4Left);
        for res in p1.fb_residual(0.0).unwrap() {
            assert!(res.residual.abs() < 1e-12, "{res:?}");
        }

        let r2 = &roots(CornerVariant::Unilateral2)[0];
        let p2 = root_to_profile(CornerVariant::Unilateral2, r2).unwrap();
        assert_eq!(p2.name, CatalogTag::A4Right);
        for res in p2.fb_residual(0.0).unwrap() {
            assert!(res.residual.abs() < 1e-12, "{res:?}");
        }
    }
}
