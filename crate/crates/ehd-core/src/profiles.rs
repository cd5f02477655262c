//! Closed-form catalog of homogeneous blowup profiles.
//!
//! Each profile is a union of angular sector pieces `C rho^kappa cos(kappa
//! theta + phi)`. The corner catalog (A1, A2, A3, A4L, A4R) carries the
//! degree-3/2 profiles that can appear at a stagnation point, `W(N)` carries
//! the normalized degree-N half-plane oscillation used as a frequency
//! oracle, and LINEAR is the flat interface `u = x2`.
//!
//! Angles live in `[-pi, pi)` and sectors are half-open `[theta_lo,
//! theta_hi)`: a value on a shared ray belongs to the piece whose sector
//! starts there. Pieces whose logical cone crosses the `+-pi` seam are
//! stored split, with the phase adjusted so the numerical trace matches on
//! both sides of the seam (the degree-3/2 forms are not 2pi-periodic).
//!
//! Plain-text catalog schema (one record per piece, 17 significant digits):
//!
//! ```text
//! # name C kappa phi theta_lo theta_hi sign
//! A1 4.7140452079103168e-1 1.5e0 ... neg
//! ```

use crate::geom::normalize_angle;
use crate::geom::Vec2;
use crate::report::format_f64;
use crate::{Error, Result};
use std::f64::consts::PI;
use std::fmt;

/// Angular tolerance for deciding that a query angle sits on a sector ray.
pub const RAY_EPS: f64 = 1e-12;

/// Tolerance for trace matching and sector bookkeeping in validation.
const SEAM_EPS: f64 = 1e-9;

/// Which phase of `u` a sector piece represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Negative,
    Positive,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Negative => write!(f, "neg"),
            Phase::Positive => write!(f, "pos"),
        }
    }
}

/// One homogeneous piece `C rho^kappa cos(kappa theta + phi)` on a half-open
/// angular sector.
#[derive(Clone, Copy, Debug)]
pub struct SectorProfile {
    pub amplitude: f64,
    pub exponent: f64,
    pub phase: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub sign: Phase,
}

impl SectorProfile {
    pub fn new(
        amplitude: f64,
        exponent: f64,
        phase: f64,
        theta_lo: f64,
        theta_hi: f64,
        sign: Phase,
    ) -> Self {
        SectorProfile {
            amplitude,
            exponent,
            phase,
            theta_lo,
            theta_hi,
            sign,
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_lo && theta < self.theta_hi
    }

    pub fn width(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }

    /// Trace value at `rho = 1`.
    pub fn trace(&self, theta: f64) -> f64 {
        self.amplitude * (self.exponent * theta + self.phase).cos()
    }

    pub fn value(&self, rho: f64, theta: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        self.amplitude * rho.powf(self.exponent) * (self.exponent * theta + self.phase).cos()
    }

    /// Cartesian gradient, valid strictly inside the sector.
    pub fn gradient(&self, rho: f64, theta: f64) -> Vec2 {
        let k = self.exponent;
        let arg = k * theta + self.phase;
        let u_rho = self.amplitude * k * rho.powf(k - 1.0) * arg.cos();
        let u_theta_over_rho = -self.amplitude * k * rho.powf(k - 1.0) * arg.sin();
        let e_rho = Vec2::new(theta.cos(), theta.sin());
        let e_theta = Vec2::new(-theta.sin(), theta.cos());
        e_rho * u_rho + e_theta * u_theta_over_rho
    }

    /// `kappa^2 C^2`, so that `|grad|^2 = grad_sq_coeff * rho^(2 kappa - 2)`.
    pub fn grad_sq_coeff(&self) -> f64 {
        self.exponent * self.exponent * self.amplitude * self.amplitude
    }
}

/// Polar Laplacian `u_rr + u_r / rho + u_tt / rho^2` of the separated form
/// `C rho^kappa cos(m theta + phi)`, as the sum of the three hand-coded
/// terms. Radial degree and angular frequency are independent so that
/// non-harmonic test pieces can be probed.
pub fn separated_laplacian(c: f64, kappa: f64, m: f64, phi: f64, rho: f64, theta: f64) -> f64 {
    let ang = (m * theta + phi).cos();
    let scale = c * rho.powf(kappa - 2.0) * ang;
    let radial2 = kappa * (kappa - 1.0) * scale;
    let radial1 = kappa * scale;
    let angular = -m * m * scale;
    radial2 + radial1 + angular
}

/// Catalog tag of a piecewise profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogTag {
    A1,
    A2,
    A3,
    A4Left,
    A4Right,
    W(u32),
    Linear,
}

impl fmt::Display for CatalogTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogTag::A1 => write!(f, "A1"),
            CatalogTag::A2 => write!(f, "A2"),
            CatalogTag::A3 => write!(f, "A3"),
            CatalogTag::A4Left => write!(f, "A4L"),
            CatalogTag::A4Right => write!(f, "A4R"),
            CatalogTag::W(n) => write!(f, "W{n}"),
            CatalogTag::Linear => write!(f, "LINEAR"),
        }
    }
}

impl std::str::FromStr for CatalogTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A1" => Ok(CatalogTag::A1),
            "A2" => Ok(CatalogTag::A2),
            "A3" => Ok(CatalogTag::A3),
            "A4L" => Ok(CatalogTag::A4Left),
            "A4R" => Ok(CatalogTag::A4Right),
            "LINEAR" => Ok(CatalogTag::Linear),
            _ => {
                if let Some(num) = s.strip_prefix('W') {
                    num.parse::<u32>()
                        .map(CatalogTag::W)
                        .map_err(|_| Error::Parse(format!("unknown catalog tag {s}")))
                } else {
                    Err(Error::Parse(format!("unknown catalog tag {s}")))
                }
            }
        }
    }
}

/// Exact density constants of the catalog.
pub mod consts {
    use std::f64::consts::PI;

    /// `sqrt(3)/3`, the Stokes corner density.
    pub fn stokes_density() -> f64 {
        3f64.sqrt() / 3.0
    }

    /// `1/2`, the asymmetric corner density.
    pub fn asymmetric_density() -> f64 {
        0.5
    }

    /// `2/3`, the lower half-plane density.
    pub fn halfplane_density() -> f64 {
        2.0 / 3.0
    }

    /// `sqrt(2)/3`, A1/A2 amplitude.
    pub fn amp_a1() -> f64 {
        2f64.sqrt() / 3.0
    }

    /// `sqrt(6)/3`, the A3 negative-phase amplitude.
    pub fn amp_a3_negative() -> f64 {
        6f64.sqrt() / 3.0
    }

    /// `2/3`, the A3 positive-phase amplitude.
    pub fn amp_a3_positive() -> f64 {
        2.0 / 3.0
    }

    /// `sqrt(2 sqrt(3))/3`, the A4 amplitude.
    pub fn amp_a4() -> f64 {
        (2.0 * 3f64.sqrt()).sqrt() / 3.0
    }

    /// `1/sqrt(pi/2)`, the unit-trace normalization of the W profiles
    /// (`int_{-pi}^{0} sin^2(N t) dt = pi/2` for every integer N >= 1).
    pub fn w_amplitude() -> f64 {
        (2.0 / PI).sqrt()
    }
}

/// Classified exact density of a profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub kind: DensityKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    Stokes,
    Asymmetric,
    Halfplane,
    Zero,
    Other,
}

impl DensityValue {
    fn classify(value: f64) -> Self {
        let kind = if (value - consts::stokes_density()).abs() < 1e-12 {
            DensityKind::Stokes
        } else if (value - consts::asymmetric_density()).abs() < 1e-12 {
            DensityKind::Asymmetric
        } else if (value - consts::halfplane_density()).abs() < 1e-12 {
            DensityKind::Halfplane
        } else if value.abs() < 1e-12 {
            DensityKind::Zero
        } else {
            DensityKind::Other
        };
        DensityValue { value, kind }
    }
}

/// Kind of free-boundary ray in a degree-3/2 profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayKind {
    TwoPhase,
    OnePhaseNegative,
    OnePhasePositive,
}

/// Residual of the applicable free boundary condition on one ray, at
/// `rho = 1` (the residual scales linearly in `rho`).
#[derive(Clone, Copy, Debug)]
pub struct RayResidual {
    pub theta: f64,
    pub kind: RayKind,
    pub residual: f64,
}

/// Ordered union of sector pieces with a catalog tag.
#[derive(Clone, Debug)]
pub struct PiecewiseProfile {
    pieces: Vec<SectorProfile>,
    pub name: CatalogTag,
}

impl PiecewiseProfile {
    /// Validates the piece list: sector sanity, pairwise disjointness,
    /// continuity across shared rays, sign consistency and the 2pi/3 cone
    /// opening for degree-3/2 entries.
    pub fn new(name: CatalogTag, mut pieces: Vec<SectorProfile>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidProfile("no pieces".into()));
        }
        for p in &pieces {
            if !(p.theta_lo >= -PI - SEAM_EPS
                && p.theta_lo < p.theta_hi
                && p.theta_hi <= PI + SEAM_EPS)
            {
                return Err(Error::InvalidProfile(format!(
                    "sector [{}, {}) outside [-pi, pi]",
                    p.theta_lo, p.theta_hi
                )));
            }
            if p.amplitude < 0.0 {
                return Err(Error::InvalidProfile("negative amplitude".into()));
            }
            if !(1.0..=4.0).contains(&p.exponent) {
                return Err(Error::InvalidProfile(format!(
                    "exponent {} outside [1, 4]",
                    p.exponent
                )));
            }
        }
        pieces.sort_by(|a, b| a.theta_lo.total_cmp(&b.theta_lo));
        for w in pieces.windows(2) {
            if w[1].theta_lo < w[0].theta_hi - SEAM_EPS {
                return Err(Error::InvalidProfile(format!(
                    "sectors [{}, {}) and [{}, {}) overlap",
                    w[0].theta_lo, w[0].theta_hi, w[1].theta_lo, w[1].theta_hi
                )));
            }
        }
        let profile = PiecewiseProfile { pieces, name };
        profile.check_traces()?;
        profile.check_signs()?;
        profile.check_cone_openings()?;
        Ok(profile)
    }

    pub fn pieces(&self) -> &[SectorProfile] {
        &self.pieces
    }

    /// Endpoint bookkeeping: every piece must vanish on its rays unless an
    /// adjacent piece carries the same trace there (the `+-pi` seam counts
    /// as adjacency).
    fn check_traces(&self) -> Result<()> {
        for (i, p) in self.pieces.iter().enumerate() {
            for (angle, _is_lo) in [(p.theta_lo, true), (p.theta_hi, false)] {
                let trace = p.trace(angle);
                let mut matched = trace.abs() < SEAM_EPS;
                if !matched {
                    for (j, q) in self.pieces.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        for other in [q.theta_lo, q.theta_hi] {
                            let wrapped = (normalize_angle(angle) - normalize_angle(other)).abs();
                            if wrapped < SEAM_EPS || (wrapped - 2.0 * PI).abs() < SEAM_EPS {
                                if (q.trace(other) - trace).abs() < SEAM_EPS {
                                    matched = true;
                                }
                            }
                        }
                    }
                }
                if !matched {
                    return Err(Error::InvalidProfile(format!(
                        "piece {} has nonvanishing unmatched trace {trace:.3e} at theta = {angle}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_signs(&self) -> Result<()> {
        for p in &self.pieces {
            for frac in [0.25, 0.5, 0.75] {
                let theta = p.theta_lo + frac * p.width();
                let v = p.value(1.0, theta);
                let ok = match p.sign {
                    Phase::Negative => v <= 1e-12,
                    Phase::Positive => v >= -1e-12,
                };
                if !ok {
                    return Err(Error::InvalidProfile(format!(
                        "piece sign {:?} contradicts value {v:.3e} at theta = {theta}",
                        p.sign
                    )));
                }
            }
        }
        Ok(())
    }

    /// Each connected component of `{u != 0}` of a degree-3/2 profile is a
    /// cone of opening exactly 2pi/3. Components are maximal runs of pieces
    /// joined across rays with nonzero shared trace (the stored split at
    /// the `+-pi` seam rejoins here).
    fn check_cone_openings(&self) -> Result<()> {
        if self.pieces.iter().any(|p| (p.exponent - 1.5).abs() > 1e-12) {
            return Ok(());
        }
        let n = self.pieces.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&self.pieces[i], &self.pieces[j]);
                for (x, y) in [
                    (a.theta_hi, b.theta_lo),
                    (a.theta_lo, b.theta_hi),
                    (a.theta_hi, b.theta_hi),
                    (a.theta_lo, b.theta_lo),
                ] {
                    let wrapped = (normalize_angle(x) - normalize_angle(y)).abs();
                    let same_ray = wrapped < SEAM_EPS || (wrapped - 2.0 * PI).abs() < SEAM_EPS;
                    if same_ray && a.trace(x).abs() > SEAM_EPS {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut widths = vec![0.0f64; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            widths[r] += self.pieces[i].width();
        }
        for i in 0..n {
            if find(&mut parent, i) == i && (widths[i] - 2.0 * PI / 3.0).abs() > SEAM_EPS {
                return Err(Error::InvalidProfile(format!(
                    "{}: cone opening {} differs from 2pi/3",
                    self.name, widths[i]
                )));
            }
        }
        Ok(())
    }

    fn piece_at(&self, theta: f64) -> Option<&SectorProfile> {
        self.pieces.iter().find(|p| p.contains(theta))
    }

    /// Value at polar coordinates; total (0 outside all sectors).
    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let theta = normalize_angle(theta);
        self.piece_at(theta).map_or(0.0, |p| p.value(rho, theta))
    }

    pub fn eval_xy(&self, p: Vec2) -> f64 {
        let (rho, theta) = p.to_polar();
        self.eval(rho, theta)
    }

    fn nearest_ray_distance(&self, theta: f64) -> f64 {
        let mut best = f64::INFINITY;
        for p in &self.pieces {
            for ray in [p.theta_lo, p.theta_hi] {
                let d = (normalize_angle(theta) - normalize_angle(ray)).abs();
                best = best.min(d.min((d - 2.0 * PI).abs()));
            }
        }
        best
    }

    /// Cartesian gradient at a point strictly inside a sector or strictly
    /// inside the zero region; sector rays and the origin are rejected.
    pub fn gradient(&self, rho: f64, theta: f64) -> Result<Vec2> {
        if rho <= 0.0 {
            return Err(Error::OnBoundary("gradient at the origin".into()));
        }
        let theta = normalize_angle(theta);
        if self.nearest_ray_distance(theta) < RAY_EPS {
            return Err(Error::OnBoundary(format!(
                "gradient on the ray theta = {theta}"
            )));
        }
        Ok(self
            .piece_at(theta)
            .map_or(Vec2::ZERO, |p| p.gradient(rho, theta)))
    }

    /// Polar Laplacian at an interior point; analytically zero for the
    /// harmonic catalog pieces, so this returns pure rounding noise there.
    pub fn laplacian_residual(&self, rho: f64, theta: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::OnBoundary("laplacian at the origin".into()));
        }
        let theta = normalize_angle(theta);
        if self.nearest_ray_distance(theta) < RAY_EPS {
            return Err(Error::OnBoundary(format!(
                "laplacian on the ray theta = {theta}"
            )));
        }
        Ok(self.piece_at(theta).map_or(0.0, |p| {
            separated_laplacian(p.amplitude, p.exponent, p.exponent, p.phase, rho, theta)
        }))
    }

    /// Residuals of the free boundary conditions on every ray, at `rho = 1`.
    ///
    /// Two-phase rays check `|grad u-|^2 - |grad u+|^2 - (x2_0 - x2)`,
    /// one-phase rays check the single-phase conditions. Rays where two
    /// pieces meet with equal nonzero trace are interior seams and carry no
    /// condition. The profile must be a degree-3/2 blowup.
    pub fn fb_residual(&self, x2_0: f64) -> Result<Vec<RayResidual>> {
        for p in &self.pieces {
            if (p.exponent - 1.5).abs() > 1e-12 {
                return Err(Error::UnsupportedExponent(p.exponent));
            }
        }
        // Gather rays with the adjacent pieces on each side.
        let mut rays: Vec<(f64, Vec<(&SectorProfile, f64)>)> = Vec::new();
        for p in &self.pieces {
            for angle in [p.theta_lo, p.theta_hi] {
                let key = normalize_angle(angle);
                let entry = rays.iter_mut().find(|(a, _)| {
                    let d = (*a - key).abs();
                    d < SEAM_EPS || (d - 2.0 * PI).abs() < SEAM_EPS
                });
                match entry {
                    Some((_, list)) => list.push((p, p.trace(angle))),
                    None => rays.push((key, vec![(p, p.trace(angle))])),
                }
            }
        }
        rays.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut out = Vec::new();
        for (theta, sides) in rays {
            let weight_neg = x2_0 - theta.sin();
            let weight_pos = theta.sin() - x2_0;
            let zero_trace: Vec<_> = sides
                .iter()
                .filter(|(_, t)| t.abs() < SEAM_EPS)
                .map(|(p, _)| *p)
                .collect();
            if zero_trace.is_empty() {
                continue; // interior seam with matching nonzero trace
            }
            let neg: Vec<_> = zero_trace
                .iter()
                .filter(|p| p.sign == Phase::Negative)
                .collect();
            let pos: Vec<_> = zero_trace
                .iter()
                .filter(|p| p.sign == Phase::Positive)
                .collect();
            if !neg.is_empty() && !pos.is_empty() {
                let r = neg[0].grad_sq_coeff() - pos[0].grad_sq_coeff() - weight_neg;
                out.push(RayResidual {
                    theta,
                    kind: RayKind::TwoPhase,
                    residual: r,
                });
            } else if !neg.is_empty() {
                let r = neg
                    .iter()
                    .map(|p| p.grad_sq_coeff() - weight_neg)
                    .fold(0.0f64, |acc, r| if r.abs() > acc.abs() { r } else { acc });
                out.push(RayResidual {
                    theta,
                    kind: RayKind::OnePhaseNegative,
                    residual: r,
                });
            } else if !pos.is_empty() {
                let r = pos
                    .iter()
                    .map(|p| p.grad_sq_coeff() - weight_pos)
                    .fold(0.0f64, |acc, r| if r.abs() > acc.abs() { r } else { acc });
                out.push(RayResidual {
                    theta,
                    kind: RayKind::OnePhasePositive,
                    residual: r,
                });
            }
        }
        Ok(out)
    }

    /// Exact density `int_{B_1} (-x2)^+ chi_{u<0} dx`, in closed form:
    /// `(cos th_hi - cos th_lo)/3` per negative sector clipped to the lower
    /// half plane.
    pub fn density(&self) -> DensityValue {
        let mut total = 0.0;
        for p in &self.pieces {
            if p.sign == Phase::Negative {
                let lo = p.theta_lo.max(-PI);
                let hi = p.theta_hi.min(0.0);
                if hi > lo {
                    total += (hi.cos() - lo.cos()) / 3.0;
                }
            }
        }
        DensityValue::classify(total)
    }

    // ----- catalog -----

    /// Stokes corner: single negative cone bisected by gravity.
    pub fn a1() -> Self {
        let c = consts::amp_a1();
        PiecewiseProfile::new(
            CatalogTag::A1,
            vec![SectorProfile::new(
                c,
                1.5,
                -PI / 4.0,
                -5.0 * PI / 6.0,
                -PI / 6.0,
                Phase::Negative,
            )],
        )
        .expect("catalog entry")
    }

    /// Stokes-type corner with single-point contact: the A1 cone plus a
    /// mirror positive cone above.
    pub fn a2() -> Self {
        let c = consts::amp_a1();
        PiecewiseProfile::new(
            CatalogTag::A2,
            vec![
                SectorProfile::new(c, 1.5, -3.0 * PI / 4.0, PI / 6.0, 5.0 * PI / 6.0, Phase::Positive),
                SectorProfile::new(c, 1.5, -PI / 4.0, -5.0 * PI / 6.0, -PI / 6.0, Phase::Negative),
            ],
        )
        .expect("catalog entry")
    }

    /// Stokes-type corner with bilateral contact: negative cone flanked by
    /// two positive cones covering the rest of the circle. The positive
    /// cone crossing `+-pi` is stored split with an adjusted phase.
    pub fn a3() -> Self {
        let cp = consts::amp_a3_positive();
        let cn = consts::amp_a3_negative();
        PiecewiseProfile::new(
            CatalogTag::A3,
            vec![
                SectorProfile::new(cp, 1.5, 3.0 * PI / 4.0, PI / 2.0, PI, Phase::Positive),
                SectorProfile::new(cp, 1.5, -PI / 4.0, -PI, -5.0 * PI / 6.0, Phase::Positive),
                SectorProfile::new(cp, 1.5, -PI / 4.0, -PI / 6.0, PI / 2.0, Phase::Positive),
                SectorProfile::new(cn, 1.5, -PI / 4.0, -5.0 * PI / 6.0, -PI / 6.0, Phase::Negative),
            ],
        )
        .expect("catalog entry")
    }

    /// Left-sided unilateral contact: shared two-phase ray along `theta =
    /// -pi`, one-phase negative ray at `-pi/3`.
    pub fn a4_left() -> Self {
        let c = consts::amp_a4();
        PiecewiseProfile::new(
            CatalogTag::A4Left,
            vec![
                SectorProfile::new(c, 1.5, -PI, PI / 3.0, PI, Phase::Positive),
                SectorProfile::new(c, 1.5, 0.0, -PI, -PI / 3.0, Phase::Negative),
            ],
        )
        .expect("catalog entry")
    }

    /// Right-sided unilateral contact: shared two-phase ray along `theta =
    /// 0`, one-phase negative ray at `-2pi/3`.
    pub fn a4_right() -> Self {
        let c = consts::amp_a4();
        PiecewiseProfile::new(
            CatalogTag::A4Right,
            vec![
                SectorProfile::new(c, 1.5, -PI / 2.0, 0.0, 2.0 * PI / 3.0, Phase::Positive),
                SectorProfile::new(c, 1.5, -PI / 2.0, -2.0 * PI / 3.0, 0.0, Phase::Negative),
            ],
        )
        .expect("catalog entry")
    }

    /// Degree-`n` frequency oracle `-rho^n |sin(n theta)| / sqrt(pi/2)` on
    /// the lower half plane, with unit L2 trace on the unit circle.
    pub fn w(n: u32) -> Self {
        assert!((2..=8).contains(&n), "W(N) catalog covers N in 2..=8");
        let amp = consts::w_amplitude();
        let mut pieces = Vec::new();
        for k in 0..n {
            let lo = -PI + k as f64 * PI / n as f64;
            let hi = -PI + (k + 1) as f64 * PI / n as f64;
            // -|sin(n t)| = -s sin(n t) with s the sign of sin(n t) on the
            // sector; write it as amp * cos(n t + phi).
            let s = if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
            let phi = if s > 0.0 { PI / 2.0 } else { -PI / 2.0 };
            pieces.push(SectorProfile::new(
                amp,
                n as f64,
                phi,
                lo,
                hi,
                Phase::Negative,
            ));
        }
        PiecewiseProfile::new(CatalogTag::W(n), pieces).expect("catalog entry")
    }

    /// The flat interface `u = x2`.
    pub fn linear() -> Self {
        PiecewiseProfile::new(
            CatalogTag::Linear,
            vec![
                SectorProfile::new(1.0, 1.0, -PI / 2.0, 0.0, PI, Phase::Positive),
                SectorProfile::new(1.0, 1.0, -PI / 2.0, -PI, 0.0, Phase::Negative),
            ],
        )
        .expect("catalog entry")
    }

    /// The five corner-catalog entries of the classification.
    pub fn corner_catalog() -> Vec<Self> {
        vec![
            Self::a1(),
            Self::a2(),
            Self::a3(),
            Self::a4_left(),
            Self::a4_right(),
        ]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let tag: CatalogTag = name.parse()?;
        Ok(match tag {
            CatalogTag::A1 => Self::a1(),
            CatalogTag::A2 => Self::a2(),
            CatalogTag::A3 => Self::a3(),
            CatalogTag::A4Left => Self::a4_left(),
            CatalogTag::A4Right => Self::a4_right(),
            CatalogTag::W(n) => Self::w(n),
            CatalogTag::Linear => Self::linear(),
        })
    }

    // ----- plain-text records -----

    pub fn to_records(&self) -> String {
        let mut out = String::from("# name C kappa phi theta_lo theta_hi sign\n");
        for p in &self.pieces {
            out.push_str(&format!(
                "{} {} {} {} {} {} {}\n",
                self.name,
                format_f64(p.amplitude),
                format_f64(p.exponent),
                format_f64(p.phase),
                format_f64(p.theta_lo),
                format_f64(p.theta_hi),
                p.sign
            ));
        }
        out
    }

    pub fn from_records(text: &str) -> Result<Self> {
        let mut name: Option<CatalogTag> = None;
        let mut pieces = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 7 {
                return Err(Error::Parse(format!("expected 7 fields, got: {line}")));
            }
            let tag: CatalogTag = tok[0].parse()?;
            match name {
                None => name = Some(tag),
                Some(t) if t == tag => {}
                Some(t) => {
                    return Err(Error::Parse(format!(
                        "mixed catalog tags {t} and {tag} in one record block"
                    )))
                }
            }
            let f = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad float {s}")))
            };
            let sign = match tok[6] {
                "neg" => Phase::Negative,
                "pos" => Phase::Positive,
                other => return Err(Error::Parse(format!("bad sign {other}"))),
            };
            pieces.push(SectorProfile::new(
                f(tok[1])?,
                f(tok[2])?,
                f(tok[3])?,
                f(tok[4])?,
                f(tok[5])?,
                sign,
            ));
        }
        let name = name.ok_or_else(|| Error::Parse("empty record block".into()))?;
        PiecewiseProfile::new(name, pieces)
    }
}
