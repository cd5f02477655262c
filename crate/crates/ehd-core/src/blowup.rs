//! Stagnation-point detection, blowup diagnostics and singularity
//! classification.
//!
//! Classification maps the measured blowup density into disjoint decision
//! bands around the exact values `sqrt(3)/3` (Stokes corner), `1/2`
//! (asymmetric corner), `0` (degenerate) and `2/3` (the excluded
//! half-plane value). The nominal half-widths are 0.06 around the corner
//! values; since `sqrt(3)/3 - 1/2 < 0.12`, the overlap is resolved in
//! favor of the Stokes band and the effective intervals are kept pairwise
//! disjoint (asserted at load). Inside the `2/3` band, the growth of the
//! degree-3/2 trace quotient separates genuinely degenerate points (the
//! blowup escapes the 3/2 scaling) from half-plane candidates, and the
//! limiting area fraction of the fluid phase splits cusp from horizontal
//! point.

use crate::field::{quad, Polyline, ScalarField};
use crate::geom::Vec2;
use crate::profiles::Phase;
use crate::report::{CsvCell, CsvTable, Summary};
use crate::weiss::{density_limit, DensityPhase, WeissOpts};
use crate::{Error, Result};

/// Candidate stagnation point on the extracted fluid boundary.
#[derive(Clone, Copy, Debug)]
pub struct StagnationCandidate {
    pub location: Vec2,
    pub grad_norm: f64,
    pub height_gap: f64,
}

/// Detection output: candidates at the datum height, plus any anomalous
/// low-gradient vertices sitting above it.
#[derive(Clone, Debug, Default)]
pub struct StagnationScan {
    pub candidates: Vec<StagnationCandidate>,
    pub anomalous: Vec<StagnationCandidate>,
}

/// Gradient threshold: three times the expected `|grad u-|` one cell from
/// a degree-3/2 vertex.
pub fn stagnation_grad_tol(h: f64) -> f64 {
    3.0 * 1.5 * (2.0 * h).sqrt()
}

/// Height threshold around the datum.
pub fn stagnation_height_tol(h: f64) -> f64 {
    3.0 * h
}

/// One-sided estimate of `|grad u-|` at a boundary vertex: the gradient is
/// probed a fixed offset into the fluid side, where the stencil does not
/// straddle the interface kink. Falls back to the on-vertex value when
/// neither side samples negative (degenerate tips).
fn fluid_side_grad(
    field: &ScalarField,
    neg: &ScalarField,
    prev: Vec2,
    v: Vec2,
    next: Vec2,
) -> Option<f64> {
    let t = next - prev;
    if t.norm() < 1e-14 {
        return neg.grad(v).ok().map(|g| g.norm());
    }
    let n = t.perp() * (1.0 / t.norm());
    for dir in [n, -n] {
        let probe = v + dir * (2.0 * field.h());
        if field.sample(probe).map_or(false, |s| s < 0.0) {
            return neg.grad(probe).ok().map(|g| g.norm());
        }
    }
    neg.grad(v).ok().map(|g| g.norm())
}

/// One pass of corner refinement: intersect the two branch lines fitted
/// radially around the current vertex estimate; falls back to the vertex
/// when the branches are near parallel or the intersection runs away.
fn refine_corner_once(poly: &Polyline, idx: usize, h: f64) -> Vec2 {
    let v = poly.vertices[idx];
    let window = (3.0 * h, 16.0 * h);
    let fit = |branch: &mut dyn Iterator<Item = Vec2>| -> Option<(Vec2, Vec2)> {
        let pts: Vec<Vec2> = branch
            .filter(|p| {
                let d = p.dist(v);
                d >= window.0 && d <= window.1
            })
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let c = pts.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / n);
        // Principal direction of the centered scatter.
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in &pts {
            let d = *p - c;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        let tr = sxx + syy;
        let det = ((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy).sqrt();
        let l1 = 0.5 * (tr + det);
        let dir = if sxy.abs() > 1e-30 {
            Vec2::new(l1 - syy, sxy)
        } else if sxx >= syy {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(0.0, 1.0)
        };
        let norm = dir.norm();
        if norm < 1e-30 {
            None
        } else {
            Some((c, dir * (1.0 / norm)))
        }
    };
    let a = fit(&mut poly.vertices[..idx].iter().rev().copied());
    let b = fit(&mut poly.vertices[idx + 1..].iter().copied());
    if let (Some((ca, da)), Some((cb, db))) = (a, b) {
        // Solve ca + s da = cb + t db for the branch intersection.
        let d = da.x * db.y - da.y * db.x;
        if d.abs() > 0.15 {
            let rhs = cb - ca;
            let s = (rhs.x * db.y - rhs.y * db.x) / d;
            let p = ca + da * s;
            if p.dist(v) <= 8.0 * h {
                return p;
            }
        }
    }
    v
}

/// Iterated corner refinement: each pass re-splits the polyline at the
/// vertex nearest the current estimate, so the branch fits stop mixing
/// rays once the estimate crosses to the right side of the corner.
fn refine_corner(poly: &Polyline, idx: usize, h: f64) -> Vec2 {
    let mut split = idx;
    let mut estimate = poly.vertices[idx];
    for _ in 0..3 {
        let next = refine_corner_once(poly, split, h);
        let next_split = poly.nearest_vertex(next);
        if next.dist(estimate) < 0.2 * h && next_split == split {
            return next;
        }
        estimate = next;
        split = next_split;
    }
    estimate
}

/// Turn angle at a run vertex: the angle between the incoming and
/// outgoing mean directions over `[2h, 10h]` windows. Zero along straight
/// stretches, the exterior angle at a corner.
fn turn_angle(poly: &Polyline, idx: usize, h: f64) -> Option<f64> {
    let v = poly.vertices[idx];
    let mean_dir = |pts: &mut dyn Iterator<Item = Vec2>| -> Option<Vec2> {
        let mut sum = Vec2::ZERO;
        let mut count = 0;
        for p in pts {
            let d = p - v;
            let r = d.norm();
            if r >= 2.0 * h && r <= 10.0 * h {
                sum = sum + d * (1.0 / r);
                count += 1;
            }
        }
        if count >= 2 {
            Some(sum * (1.0 / sum.norm().max(1e-30)))
        } else {
            None
        }
    };
    let back = mean_dir(&mut poly.vertices[..idx].iter().rev().copied())?;
    let fwd = mean_dir(&mut poly.vertices[idx + 1..].iter().copied())?;
    // Straight continuation has fwd = -back; the turn is the deviation.
    let cos = (-back.x) * fwd.x + (-back.y) * fwd.y;
    Some(cos.clamp(-1.0, 1.0).acos())
}

/// Scans the fluid boundary for low-gradient vertices near the datum
/// height. Each maximal run of passing vertices reduces to one candidate:
/// the vertex of maximal turn angle when the run contains a genuine
/// corner, otherwise the gradient minimizer; the result is refined to the
/// branch-line intersection. Gradient contrast alone is a weak corner
/// detector here because `|grad u-|` is set by the height, which is
/// nearly constant along datum-hugging boundaries.
pub fn find_stagnation(field: &ScalarField) -> StagnationScan {
    let h = field.h();
    let tol_g = stagnation_grad_tol(h);
    let tol_h = stagnation_height_tol(h);
    let neg = field.negative_part();
    let mut scan = StagnationScan::default();
    for poly in field.extract_level_set(Phase::Negative) {
        let m = poly.vertices.len();
        let mut run: Vec<(usize, StagnationCandidate)> = Vec::new();
        let mut run_anomalous = false;
        let flush = |run: &mut Vec<(usize, StagnationCandidate)>,
                     anomalous: bool,
                     scan: &mut StagnationScan| {
            if run.is_empty() {
                return;
            }
            // Prefer the sharpest corner of the run; gradient minimum only
            // when no vertex turns appreciably.
            let by_turn = run
                .iter()
                .filter_map(|&(idx, c)| turn_angle(&poly, idx, h).map(|t| (t, idx, c)))
                .max_by(|a, b| a.0.total_cmp(&b.0));
            let (idx, mut best) = match by_turn {
                Some((t, idx, c)) if t > 0.35 => (idx, c),
                _ => run
                    .iter()
                    .min_by(|a, b| a.1.grad_norm.total_cmp(&b.1.grad_norm))
                    .copied()
                    .unwrap(),
            };
            best.location = refine_corner(&poly, idx, h);
            best.height_gap = best.location.y - field.x2_0();
            if anomalous {
                scan.anomalous.push(best);
            } else {
                scan.candidates.push(best);
            }
            run.clear();
        };
        for (i, &v) in poly.vertices.iter().enumerate() {
            let prev = poly.vertices[if i == 0 { 0 } else { i - 1 }];
            let next = poly.vertices[if i + 1 < m { i + 1 } else { m - 1 }];
            let grad_norm = match fluid_side_grad(field, &neg, prev, v, next) {
                Some(g) => g,
                None => {
                    flush(&mut run, run_anomalous, &mut scan);
                    run_anomalous = false;
                    continue;
                }
            };
            let gap = v.y - field.x2_0();
            let low_grad = grad_norm <= tol_g;
            let near_datum = gap.abs() <= tol_h;
            let above = gap > tol_h;
            if low_grad && (near_datum || above) {
                let anomalous = above;
                if !run.is_empty() && anomalous != run_anomalous {
                    flush(&mut run, run_anomalous, &mut scan);
                }
                run_anomalous = anomalous;
                run.push((
                    i,
                    StagnationCandidate {
                        location: v,
                        grad_norm,
                        height_gap: gap,
                    },
                ));
            } else {
                flush(&mut run, run_anomalous, &mut scan);
                run_anomalous = false;
            }
        }
        flush(&mut run, run_anomalous, &mut scan);
    }
    scan
}

/// Normalized L2 distance on the unit ball between two blowup rescalings;
/// near zero indicates an emerged blowup limit.
#[derive(Clone, Copy, Debug)]
pub struct HomogeneityDeviation {
    pub value: f64,
    pub degenerate: bool,
}

pub fn homogeneity_deviation(
    field: &ScalarField,
    x0: Vec2,
    kappa: f64,
    r1: f64,
    r2: f64,
) -> Result<HomogeneityDeviation> {
    field.require_ball(x0, r1.max(r2), 0.0)?;
    let spec = quad::BallQuad {
        n_theta: 512,
        n_rho: Some(128),
        breakpoints: Vec::new(),
        ring_offset: true,
    };
    let s1 = r1.powf(kappa);
    let s2 = r2.powf(kappa);
    let u1 = |y: Vec2| field.sample_clamped(x0 + y * r1) / s1;
    let u2 = |y: Vec2| field.sample_clamped(x0 + y * r2) / s2;
    let dist2 = quad::ball(
        |y| {
            let d = u1(y) - u2(y);
            d * d
        },
        Vec2::ZERO,
        1.0,
        1.0 / 128.0,
        &spec,
    );
    let n1 = quad::ball(|y| u1(y) * u1(y), Vec2::ZERO, 1.0, 1.0 / 128.0, &spec);
    let n2 = quad::ball(|y| u2(y) * u2(y), Vec2::ZERO, 1.0, 1.0 / 128.0, &spec);
    let norm = n1.max(n2).sqrt();
    if norm < 1e-14 {
        return Ok(HomogeneityDeviation {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(HomogeneityDeviation {
        value: dist2.sqrt() / norm,
        degenerate: false,
    })
}

/// Splits the polyline at its vertex nearest to `x0` and fits one slope
/// per branch over the window radii; `l-` is the branch entering from
/// `x1 < x1(x0)`.
pub fn tangent_slopes(poly: &Polyline, x0: Vec2, window: (f64, f64)) -> Result<(f64, f64)> {
    let split = poly.nearest_vertex(x0);
    if poly.vertices[split].dist(x0) > window.0.max(0.5 * window.1) {
        return Err(Error::InsufficientArc(0));
    }
    let branch_a: Vec<Vec2> = poly.vertices[..=split].to_vec();
    let branch_b: Vec<Vec2> = poly.vertices[split..].to_vec();
    let fit = |branch: &[Vec2]| -> Result<(f64, f64)> {
        let pts: Vec<Vec2> = branch
            .iter()
            .map(|&v| v - x0)
            .filter(|d| {
                let r = d.norm();
                r >= window.0 && r <= window.1
            })
            .collect();
        if pts.len() < 4 {
            return Err(Error::InsufficientArc(pts.len()));
        }
        let sxx: f64 = pts.iter().map(|d| d.x * d.x).sum();
        let sxy: f64 = pts.iter().map(|d| d.x * d.y).sum();
        let mean_x: f64 = pts.iter().map(|d| d.x).sum::<f64>() / pts.len() as f64;
        if sxx < 1e-30 {
            return Err(Error::InsufficientArc(pts.len()));
        }
        Ok((sxy / sxx, mean_x))
    };
    let (slope_a, mx_a) = fit(&branch_a)?;
    let (slope_b, mx_b) = fit(&branch_b)?;
    if mx_a <= mx_b {
        Ok((slope_a, slope_b))
    } else {
        Ok((slope_b, slope_a))
    }
}

/// Mean direction angle of each branch (the `l-` branch first), for
/// checking membership in the permitted tangential direction sets.
pub fn branch_directions(poly: &Polyline, x0: Vec2, window: (f64, f64)) -> Result<(f64, f64)> {
    let split = poly.nearest_vertex(x0);
    let dir = |branch: &[Vec2]| -> Result<(f64, f64)> {
        let pts: Vec<Vec2> = branch
            .iter()
            .map(|&v| v - x0)
            .filter(|d| {
                let r = d.norm();
                r >= window.0 && r <= window.1
            })
            .collect();
        if pts.len() < 4 {
            return Err(Error::InsufficientArc(pts.len()));
        }
        let sx: f64 = pts.iter().map(|d| d.x / d.norm()).sum();
        let sy: f64 = pts.iter().map(|d| d.y / d.norm()).sum();
        Ok((sy.atan2(sx), sx / pts.len() as f64))
    };
    let a = dir(&poly.vertices[..=split])?;
    let b = dir(&poly.vertices[split..])?;
    if a.1 <= b.1 {
        Ok((a.0, b.0))
    } else {
        Ok((b.0, a.0))
    }
}

/// Area fraction of the fluid phase in the rescaled lower half ball.
pub fn chi_minus_fraction(field: &ScalarField, x0: Vec2, r: f64) -> Result<f64> {
    field.require_ball(x0, r, 0.0)?;
    let area = quad::half_disk_lower(
        |y| {
            if field.phase_indicator(x0 + y * r) < 0 {
                1.0
            } else {
                0.0
            }
        },
        Vec2::ZERO,
        1.0,
        1024,
        256,
    );
    Ok(area / (std::f64::consts::PI / 2.0))
}

/// Singularity label of the classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    StokesCorner,
    AsymmetricLeft,
    AsymmetricRight,
    Cusp,
    HorizontalPoint,
    NonStagnation,
    Unclassified,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Label::StokesCorner => "stokes-corner",
            Label::AsymmetricLeft => "asymmetric-left",
            Label::AsymmetricRight => "asymmetric-right",
            Label::Cusp => "cusp",
            Label::HorizontalPoint => "horizontal-point",
            Label::NonStagnation => "non-stagnation",
            Label::Unclassified => "unclassified",
        };
        write!(f, "{s}")
    }
}

/// Effective decision bands on the measured density; pairwise disjoint.
#[derive(Clone, Copy, Debug)]
pub struct DensityBands {
    pub zero: (f64, f64),
    pub asymmetric: (f64, f64),
    pub stokes: (f64, f64),
    pub sigma: (f64, f64),
}

impl DensityBands {
    pub fn standard() -> Self {
        let stokes_center = 3f64.sqrt() / 3.0;
        let stokes_lo = stokes_center - 0.06;
        let bands = DensityBands {
            zero: (0.0, 0.12),
            // The nominal 1/2 +- 0.06 band is trimmed where it would meet
            // the Stokes band.
            asymmetric: (0.44, stokes_lo),
            stokes: (stokes_lo, stokes_center + 0.06),
            sigma: (2.0 / 3.0 - 0.02, 2.0 / 3.0 + 0.02),
        };
        bands.assert_disjoint();
        bands
    }

    fn assert_disjoint(&self) {
        let list = [self.zero, self.asymmetric, self.stokes, self.sigma];
        for (i, a) in list.iter().enumerate() {
            assert!(a.0 < a.1, "band {i} is empty");
            for b in list.iter().skip(i + 1) {
                assert!(a.1 <= b.0 || b.1 <= a.0, "bands overlap: {a:?} vs {b:?}");
            }
        }
    }

    fn contains(interval: (f64, f64), x: f64) -> bool {
        x >= interval.0 && x < interval.1
    }
}

/// Classification controls.
#[derive(Clone, Debug)]
pub struct ClassifyParams {
    pub r_max: f64,
    pub slope_window: (f64, f64),
    pub bands: DensityBands,
    pub weiss: WeissOpts,
}

impl ClassifyParams {
    pub fn for_field(field: &ScalarField, candidate: Vec2) -> Self {
        let margin = 4.0 * field.h();
        let room = [
            candidate.x - field.origin().x,
            field.x_max() - candidate.x,
            candidate.y - field.origin().y,
            field.y_max() - candidate.y,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
            - margin;
        let r_max = room.max(8.0 * field.h()).min(0.75);
        ClassifyParams {
            r_max,
            slope_window: (6.0 * field.h(), (0.45 * r_max).max(9.0 * field.h())),
            bands: DensityBands::standard(),
            weiss: WeissOpts::default(),
        }
    }
}

/// Per-radius classification evidence.
#[derive(Clone, Copy, Debug)]
pub struct EvidenceRow {
    pub r: f64,
    pub density: f64,
    pub chi_minus: f64,
    pub trace_quotient: f64,
}

/// Classification outcome with the measurements backing it.
#[derive(Clone, Debug)]
pub struct ClassificationResult {
    pub label: Label,
    pub density: f64,
    pub slopes: Option<(f64, f64)>,
    pub chi_minus_fraction: f64,
    pub evidence: Vec<EvidenceRow>,
    pub positive_decay_exponent: Option<f64>,
    pub notes: Vec<String>,
}

/// Exponent fit of `max |grad u+|` against the radius, reported as
/// evidence (never part of the hard label).
fn positive_decay_exponent(field: &ScalarField, x0: Vec2, radii: &[f64]) -> Option<f64> {
    let pos = field.positive_part();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &r in radii {
        let mut m = 0.0f64;
        let n = 256;
        for k in 0..n {
            let t = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let p = x0 + Vec2::from_polar(r, t);
            if let Ok(g) = pos.grad(p) {
                m = m.max(g.norm());
            }
        }
        if m > 1e-10 {
            pts.push((r.ln(), m.ln()));
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx < 1e-12 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Full classification of a stagnation candidate.
pub fn classify(
    field: &ScalarField,
    candidate: &StagnationCandidate,
    params: &ClassifyParams,
) -> Result<ClassificationResult> {
    let x0 = candidate.location;
    let mut notes = Vec::new();

    if candidate.grad_norm > stagnation_grad_tol(field.h()) {
        return Ok(ClassificationResult {
            label: Label::NonStagnation,
            density: f64::NAN,
            slopes: None,
            chi_minus_fraction: f64::NAN,
            evidence: Vec::new(),
            positive_decay_exponent: None,
            notes: vec![format!(
                "gradient {:.3e} above the stagnation threshold",
                candidate.grad_norm
            )],
        });
    }

    let density_rep = density_limit(
        field,
        x0,
        1.5,
        params.r_max,
        DensityPhase::Negative,
        &params.weiss,
    )?;
    if !density_rep.converged {
        notes.push("density sequence did not settle; using last value".into());
    }
    let density = density_rep.estimate;
    let radii = density_rep.radii.clone();

    // Evidence table: density, fluid area fraction and 3/2 trace quotient
    // per radius.
    let neg = field.negative_part();
    let mut evidence = Vec::new();
    for (idx, &r) in radii.iter().enumerate() {
        let chi = chi_minus_fraction(field, x0, r)?;
        let j = quad::circle(
            |p| neg.sample_clamped(p).min(0.0).powi(2),
            x0,
            r,
            1024,
            &[],
        );
        evidence.push(EvidenceRow {
            r,
            density: density_rep.values[idx],
            chi_minus: chi,
            trace_quotient: j / r.powi(4),
        });
    }
    let chi_small = evidence.last().map(|e| e.chi_minus).unwrap_or(f64::NAN);

    // Trace-quotient growth across the window: the degree-3/2 scaling is
    // escaped from below (quotient grows as r shrinks) at genuinely
    // degenerate points, and from above (quotient shrinks) at
    // higher-order candidates.
    let q_large = evidence.first().map(|e| e.trace_quotient).unwrap_or(0.0);
    let q_small = evidence.last().map(|e| e.trace_quotient).unwrap_or(0.0);
    let q_ratio = if q_large > 1e-300 {
        q_small / q_large
    } else {
        f64::INFINITY
    };

    // Tangent slopes from the fluid boundary polyline through the
    // candidate.
    let polys = field.extract_level_set(Phase::Negative);
    let slopes = polys
        .iter()
        .filter(|p| p.vertices[p.nearest_vertex(x0)].dist(x0) <= 3.0 * field.h())
        .filter_map(|p| tangent_slopes(p, x0, params.slope_window).ok())
        .next();
    if slopes.is_none() {
        notes.push("no slope fit within the window".into());
    }

    let decay = positive_decay_exponent(field, x0, &radii);

    let bands = &params.bands;
    let label = if DensityBands::contains(bands.stokes, density) {
        Label::StokesCorner
    } else if DensityBands::contains(bands.asymmetric, density) {
        match slopes {
            Some((lm, lp)) => {
                if lm.abs() < lp.abs() {
                    Label::AsymmetricLeft
                } else {
                    Label::AsymmetricRight
                }
            }
            None => {
                notes.push("asymmetric density band but no slope fit".into());
                Label::Unclassified
            }
        }
    } else if DensityBands::contains(bands.zero, density) {
        if chi_small < 0.5 {
            Label::Cusp
        } else {
            Label::HorizontalPoint
        }
    } else if DensityBands::contains(bands.sigma, density) {
        if q_ratio > 2.0 {
            // The 3/2 rescaling blows up: degenerate point.
            if chi_small >= 0.5 {
                Label::HorizontalPoint
            } else {
                Label::Cusp
            }
        } else {
            notes.push(format!(
                "density within the half-plane band 2/3 (trace quotient ratio {q_ratio:.2}); \
                 excluded for exact solutions"
            ));
            Label::Unclassified
        }
    } else {
        notes.push(format!("density {density:.4} outside every band"));
        Label::Unclassified
    };

    Ok(ClassificationResult {
        label,
        density,
        slopes,
        chi_minus_fraction: chi_small,
        evidence,
        positive_decay_exponent: decay,
        notes,
    })
}

impl ClassificationResult {
    pub fn evidence_csv(&self, config_hash: u64) -> String {
        let mut t = CsvTable::new(&["r", "density", "chi_minus", "trace_quotient"]);
        for e in &self.evidence {
            t.push_row(&[
                CsvCell::F(e.r),
                CsvCell::F(e.density),
                CsvCell::F(e.chi_minus),
                CsvCell::F(e.trace_quotient),
            ]);
        }
        t.render(config_hash)
    }

    pub fn to_summary(&self, config_hash: u64) -> String {
        let mut s = Summary::new();
        s.push_str("record", "classification");
        s.push_str("label", &self.label.to_string());
        s.push_f64("density", self.density);
        match self.slopes {
            Some((lm, lp)) => {
                s.push_f64("slope_minus", lm);
                s.push_f64("slope_plus", lp);
            }
            None => s.push_str("slopes", "none"),
        }
        s.push_f64("chi_minus_fraction", self.chi_minus_fraction);
        match self.positive_decay_exponent {
            Some(e) => s.push_f64("positive_decay_exponent", e),
            None => s.push_str("positive_decay_exponent", "none"),
        }
        s.push_str("notes", &self.notes.join("; "));
        s.render(config_hash)
    }
}

/// Convenience: scan for candidates and classify the one nearest to the
/// requested center (or the first candidate when none is given).
pub fn classify_at(
    field: &ScalarField,
    center: Option<Vec2>,
    params: Option<ClassifyParams>,
) -> Result<(StagnationCandidate, ClassificationResult)> {
    let scan = find_stagnation(field);
    let candidate = match center {
        Some(c) => scan
            .candidates
            .iter()
            .min_by(|a, b| a.location.dist(c).total_cmp(&b.location.dist(c)))
            .copied(),
        None => scan.candidates.first().copied(),
    }
    .ok_or_else(|| Error::InvalidArgument("no stagnation candidates found".into()))?;
    let params = params.unwrap_or_else(|| ClassifyParams::for_field(field, candidate.location));
    let result = classify(field, &candidate, &params)?;
    Ok((candidate, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{consts, PiecewiseProfile};
    use std::f64::consts::PI;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn profile_field(prof: &PiecewiseProfile, h: f64) -> ScalarField {
        ScalarField::from_profile(prof, 1.2, h, 0.0).unwrap()
    }

    #[test]
    fn stagnation_detection_on_catalog() {
        let h = 1.0 / 128.0;
        for prof in [
            PiecewiseProfile::a1(),
            PiecewiseProfile::a4_left(),
            PiecewiseProfile::a4_right(),
        ] {
            let f = profile_field(&prof, h);
            let scan = find_stagnation(&f);
            assert_eq!(
                scan.candidates.len(),
                1,
                "{}: {:?}",
                prof.name,
                scan.candidates
            );
            let c = scan.candidates[0];
            assert!(c.location.norm() <= 3.0 * h, "{}: {:?}", prof.name, c);
            assert!(scan.anomalous.is_empty());
        }
    }

    #[test]
    fn no_candidates_on_flat_interface() {
        let f = ScalarField::centered(1.0, 1.0 / 64.0, 0.0, |p| p.y).unwrap();
        let scan = find_stagnation(&f);
        assert!(scan.candidates.is_empty(), "{:?}", scan.candidates);
    }

    #[test]
    fn homogeneity_deviation_behaviour() {
        let h = 1.0 / 128.0;
        let a1 = profile_field(&PiecewiseProfile::a1(), h);
        let dev = homogeneity_deviation(&a1, Vec2::ZERO, 1.5, 0.5, 0.25).unwrap();
        assert!(!dev.degenerate);
        assert!(dev.value < 12.0 * h, "{}", dev.value);

        // u = x2 + x2^2 at kappa = 1: the quadratic term dies linearly in
        // r, so the deviation between r and r/4 shrinks ~4x when both
        // radii shrink 4x.
        let f = ScalarField::centered(1.0, h, 0.0, |p| p.y + p.y * p.y).unwrap();
        let d1 = homogeneity_deviation(&f, Vec2::ZERO, 1.0, 0.25, 0.0625).unwrap();
        let d2 = homogeneity_deviation(&f, Vec2::ZERO, 1.0, 0.0625, 0.015625).unwrap();
        assert!(d2.value < d1.value / 2.5, "{} -> {}", d1.value, d2.value);

        let zero = ScalarField::centered(1.0, h, 0.0, |_| 0.0).unwrap();
        let dz = homogeneity_deviation(&zero, Vec2::ZERO, 1.5, 0.5, 0.25).unwrap();
        assert!(dz.degenerate);
        assert_eq!(dz.value, 0.0);
    }

    #[test]
    fn tangent_slopes_on_catalog() {
        let h = 1.0 / 128.0;
        let window = (0.05, 0.45);

        let a1 = profile_field(&PiecewiseProfile::a1(), h);
        let polys = a1.extract_level_set(Phase::Negative);
        let poly = &polys[0];
        let (lm, lp) = tangent_slopes(poly, Vec2::ZERO, window).unwrap();
        assert_close(lm, 3f64.sqrt() / 3.0, 0.05);
        assert_close(lp, -(3f64.sqrt()) / 3.0, 0.05);

        let a4l = profile_field(&PiecewiseProfile::a4_left(), h);
        let polys = a4l.extract_level_set(Phase::Negative);
        let (lm, lp) = tangent_slopes(&polys[0], Vec2::ZERO, window).unwrap();
        assert_close(lm, 0.0, 0.05);
        assert_close(lp, -(3f64.sqrt()), 0.08);

        let a4r = profile_field(&PiecewiseProfile::a4_right(), h);
        let polys = a4r.extract_level_set(Phase::Negative);
        let (lm, lp) = tangent_slopes(&polys[0], Vec2::ZERO, window).unwrap();
        assert_close(lm, 3f64.sqrt(), 0.08);
        assert_close(lp, 0.0, 0.05);
    }

    #[test]
    fn straight_line_slopes() {
        // A tilted flat interface: both branches carry the same tangent.
        let theta0 = 0.4f64;
        let f = ScalarField::centered(1.0, 1.0 / 64.0, 0.0, |p| {
            p.y - theta0.tan() * p.x
        })
        .unwrap();
        let polys = f.extract_level_set(Phase::Negative);
        let (lm, lp) = tangent_slopes(&polys[0], Vec2::ZERO, (0.05, 0.5)).unwrap();
        assert_close(lm, theta0.tan(), 0.02);
        assert_close(lp, theta0.tan(), 0.02);
    }

    #[test]
    fn branch_direction_sets() {
        let h = 1.0 / 128.0;
        let window = (0.05, 0.45);
        let stokes_set = [-PI, -5.0 * PI / 6.0, -PI / 6.0, 0.0];
        let left_set = [-PI, -PI / 3.0, 0.0];
        let right_set = [-PI, -2.0 * PI / 3.0, 0.0];
        let check = |prof: &PiecewiseProfile, permitted: &[f64]| {
            let f = profile_field(prof, h);
            let polys = f.extract_level_set(Phase::Negative);
            let (da, db) = branch_directions(&polys[0], Vec2::ZERO, window).unwrap();
            for d in [da, db] {
                let ok = permitted.iter().any(|&t| {
                    let diff = crate::geom::angle_diff(d, t).abs();
                    diff < 0.06 || (diff - 2.0 * PI).abs() < 0.06
                });
                assert!(ok, "{}: direction {d} not permitted", prof.name);
            }
        };
        check(&PiecewiseProfile::a1(), &stokes_set);
        check(&PiecewiseProfile::a2(), &stokes_set);
        check(&PiecewiseProfile::a3(), &stokes_set);
        check(&PiecewiseProfile::a4_left(), &left_set);
        check(&PiecewiseProfile::a4_right(), &right_set);
    }

    #[test]
    fn chi_fraction_values() {
        let h = 1.0 / 128.0;
        let a1 = profile_field(&PiecewiseProfile::a1(), h);
        for r in [0.25, 0.5] {
            let chi = chi_minus_fraction(&a1, Vec2::ZERO, r).unwrap();
            assert_close(chi, 2.0 / 3.0, 0.02);
        }

        let lower = ScalarField::centered(1.2, h, 0.0, |p| p.y.min(0.0)).unwrap();
        assert_close(chi_minus_fraction(&lower, Vec2::ZERO, 0.5).unwrap(), 1.0, 1e-2);

        // Thin cusp: fluid only inside |x1| <= x2^2 below the datum.
        let cusp = ScalarField::centered(1.2, h, 0.0, |p| {
            if p.y < 0.0 {
                -(p.y * p.y - p.x.abs()).max(0.0)
            } else {
                0.0
            }
        })
        .unwrap();
        let big = chi_minus_fraction(&cusp, Vec2::ZERO, 0.5).unwrap();
        let small = chi_minus_fraction(&cusp, Vec2::ZERO, 0.1).unwrap();
        assert!(small < big);
        assert!(small < 0.1, "{small}");
    }

    #[test]
    fn classify_catalog_profiles() {
        let h = 1.0 / 64.0;
        let cases = [
            (PiecewiseProfile::a1(), Label::StokesCorner),
            (PiecewiseProfile::a2(), Label::StokesCorner),
            (PiecewiseProfile::a3(), Label::StokesCorner),
            (PiecewiseProfile::a4_left(), Label::AsymmetricLeft),
            (PiecewiseProfile::a4_right(), Label::AsymmetricRight),
        ];
        for (prof, expected) in cases {
            let f = profile_field(&prof, h);
            let (cand, result) = classify_at(&f, Some(Vec2::ZERO), None).unwrap();
            assert!(cand.location.norm() <= 4.0 * h);
            assert_eq!(result.label, expected, "{}: {:?}", prof.name, result);
        }
    }

    #[test]
    fn classify_is_scale_equivariant() {
        let h = 1.0 / 128.0;
        let f = profile_field(&PiecewiseProfile::a1(), h);
        let (_, direct) = classify_at(&f, Some(Vec2::ZERO), None).unwrap();
        let rescaled = f.rescale(Vec2::ZERO, 0.5, 1.5).unwrap();
        let (_, scaled) = classify_at(&rescaled, Some(Vec2::ZERO), None).unwrap();
        assert_eq!(direct.label, scaled.label);
        assert_close(direct.density, scaled.density, 0.02);
    }

    #[test]
    fn classify_degenerate_cases() {
        let h = 1.0 / 128.0;
        // Thin cusp.
        let cusp = ScalarField::centered(1.2, h, 0.0, |p| {
            if p.y < 0.0 {
                -(p.y * p.y - p.x.abs()).max(0.0)
            } else {
                0.0
            }
        })
        .unwrap();
        let candidate = StagnationCandidate {
            location: Vec2::ZERO,
            grad_norm: 0.0,
            height_gap: 0.0,
        };
        let params = ClassifyParams::for_field(&cusp, Vec2::ZERO);
        let res = classify(&cusp, &candidate, &params).unwrap();
        assert_eq!(res.label, Label::Cusp, "{res:?}");
        assert!(res.density <= 0.05, "{}", res.density);
        assert!(res.chi_minus_fraction <= 0.2, "{}", res.chi_minus_fraction);

        // Degenerate horizontal point: fluid fills the lower half plane
        // with a blowup exponent strictly below 3/2.
        let horizontal =
            ScalarField::centered(1.2, h, 0.0, |p| -(0.3) * (-p.y).max(0.0).powf(1.2)).unwrap();
        let res = classify(&horizontal, &candidate, &params).unwrap();
        assert_eq!(res.label, Label::HorizontalPoint, "{res:?}");
        assert!(res.chi_minus_fraction >= 0.9);
    }

    #[test]
    fn classify_positive_decay_exponent() {
        let h = 1.0 / 128.0;
        let a2 = profile_field(&PiecewiseProfile::a2(), h);
        let candidate = StagnationCandidate {
            location: Vec2::ZERO,
            grad_norm: 0.0,
            height_gap: 0.0,
        };
        let params = ClassifyParams::for_field(&a2, Vec2::ZERO);
        let res = classify(&a2, &candidate, &params).unwrap();
        let e = res.positive_decay_exponent.expect("positive phase present");
        assert_close(e, 0.5, 0.1);

        let a1 = profile_field(&PiecewiseProfile::a1(), h);
        let res = classify(&a1, &candidate, &params).unwrap();
        assert!(res.positive_decay_exponent.is_none());
        assert_close(res.density, consts::stokes_density(), 0.02);
    }

    #[test]
    fn bands_are_disjoint() {
        DensityBands::standard();
    }
}
