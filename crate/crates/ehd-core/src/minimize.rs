//! Discrete local minimization of the EHD functional on a rectangle with
//! prescribed boundary data.
//!
//! The exact functional has discontinuous indicator integrands, so descent
//! runs on the smoothed energy `E_eps(u) = sum (grad_h u)^2 + h^2 sum (w+
//! S_eps(u) + w- S_eps(-u))` with the clamped-linear step `S_eps(t) =
//! clamp(t/eps + 1/2, 0, 1)`, annealing `eps` down a geometric schedule to
//! a floor of order `h^2`. Each stage descends by projected gradient with
//! backtracking line search on the interior nodes (the boundary trace is
//! never touched); optional harmonic-replacement sweeps between stages
//! resolve the bulk harmonic part quickly. After the last stage the dead
//! zone `|u| <= eps_floor / 2` is snapped to exactly zero so that sign
//! indicators of the result are noise-free.
//!
//! Energies in the recorded history are per-stage values of `E_eps`; the
//! smoothed energy is not comparable across different `eps`.

use crate::energy::{discrete_energy, weight_minus, weight_plus};
use crate::field::{Polyline, ScalarField};
use crate::geom::Vec2;
use crate::profiles::{Phase, PiecewiseProfile};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lattice extent and datum for a minimization run.
#[derive(Clone, Copy, Debug)]
pub struct DomainSpec {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub x2_0: f64,
}

impl DomainSpec {
    /// Square `[-half, half]^2` with `n` nodes per side.
    pub fn square_centered(half: f64, n: usize, x2_0: f64) -> Self {
        let h = 2.0 * half / (n - 1) as f64;
        DomainSpec {
            origin: Vec2::new(-half, -half),
            h,
            nx: n,
            ny: n,
            x2_0,
        }
    }
}

/// Boundary trace source.
#[derive(Clone, Debug)]
pub enum BoundaryData {
    Catalog(PiecewiseProfile),
    Constant(f64),
    /// The flat interface `u = x2`.
    Linear,
    /// Trace sampled from an existing field (clamped at its hull).
    FromField(ScalarField),
}

impl BoundaryData {
    fn eval(&self, p: Vec2) -> f64 {
        match self {
            BoundaryData::Catalog(prof) => prof.eval_xy(p),
            BoundaryData::Constant(c) => *c,
            BoundaryData::Linear => p.y,
            BoundaryData::FromField(f) => f.sample_clamped(p),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum StepRule {
    Fixed(f64),
    Backtracking,
}

/// Interior initialization of the descent.
#[derive(Clone, Debug)]
pub enum InitKind {
    /// Harmonic extension of the boundary trace.
    HarmonicExtension,
    /// Zero interior: phases grow inward from the trace.
    Zero,
    /// Sampled closed-form profile (descent then verifies stationarity
    /// and relaxes the discretization, rather than searching basins).
    Profile(PiecewiseProfile),
}

/// Continuation and descent controls.
#[derive(Clone, Debug)]
pub struct MinimizeParams {
    /// Strictly decreasing smoothing widths; the floor stays >= h^2.
    pub eps_schedule: Vec<f64>,
    /// Iteration cap per smoothing stage.
    pub max_outer_iters: usize,
    /// Relative energy-decrease tolerance ending a stage.
    pub inner_tol: f64,
    pub step_rule: StepRule,
    /// Seed for the initialization noise.
    pub seed: u64,
    /// Interior initialization.
    pub init: InitKind,
    /// Harmonic-replacement sweeps applied between stages.
    pub harmonic_sweeps: usize,
    /// Exact-indicator nodal polish sweeps after the continuation.
    pub polish_sweeps: usize,
    /// Snap `|u| <= eps_floor/2` to zero after the last stage.
    pub snap_dead_zone: bool,
}

impl MinimizeParams {
    pub fn default_for(h: f64) -> Self {
        let floor = (h * h).max(1e-6);
        let mut eps_schedule = Vec::new();
        let mut eps = 0.25f64;
        while eps > floor * 2.0 {
            eps_schedule.push(eps);
            eps *= 0.5;
        }
        eps_schedule.push(floor);
        MinimizeParams {
            eps_schedule,
            max_outer_iters: 2500,
            inner_tol: 1e-15,
            step_rule: StepRule::Backtracking,
            seed: 0,
            init: InitKind::HarmonicExtension,
            harmonic_sweeps: 1,
            polish_sweeps: 800,
            snap_dead_zone: true,
        }
    }
}

/// Minimization output: the field, the per-stage energy history, the
/// extracted free boundary and the exact-indicator energy of the result.
#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub field: ScalarField,
    /// `(stage index, E_eps)` per accepted iteration.
    pub energy_history: Vec<(usize, f64)>,
    pub converged: bool,
    pub fb: Vec<Polyline>,
    pub exact_energy: f64,
}

fn smoothed_step(t: f64, eps: f64) -> f64 {
    (t / eps + 0.5).clamp(0.0, 1.0)
}

fn smoothed_step_slope(t: f64, eps: f64) -> f64 {
    if t.abs() < 0.5 * eps {
        1.0 / eps
    } else {
        0.0
    }
}

struct Grid {
    nx: usize,
    ny: usize,
    h: f64,
    origin: Vec2,
    w_plus: Vec<f64>,
    w_minus: Vec<f64>,
    node_weight: Vec<f64>,
    boundary: Vec<bool>,
    above_datum: Vec<bool>,
}

impl Grid {
    fn new(spec: &DomainSpec) -> Self {
        let (nx, ny) = (spec.nx, spec.ny);
        let mut w_plus = vec![0.0; nx * ny];
        let mut w_minus = vec![0.0; nx * ny];
        let mut node_weight = vec![1.0; nx * ny];
        let mut boundary = vec![false; nx * ny];
        let mut above_datum = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let idx = iy * nx + ix;
                let y = spec.origin.y + iy as f64 * spec.h;
                above_datum[idx] = y >= spec.x2_0 - 1e-12 * spec.h;
                w_plus[idx] = weight_plus(y, spec.x2_0);
                w_minus[idx] = weight_minus(y, spec.x2_0);
                let mut w = 1.0;
                if ix == 0 || ix == nx - 1 {
                    w *= 0.5;
                }
                if iy == 0 || iy == ny - 1 {
                    w *= 0.5;
                }
                node_weight[idx] = w;
                boundary[idx] = ix == 0 || ix == nx - 1 || iy == 0 || iy == ny - 1;
            }
        }
        Grid {
            nx,
            ny,
            h: spec.h,
            origin: spec.origin,
            w_plus,
            w_minus,
            node_weight,
            boundary,
            above_datum,
        }
    }

    /// Projection onto the admissible set: interior nodes on or above the
    /// datum carry no fluid.
    fn project(&self, u: &mut [f64]) {
        for idx in 0..u.len() {
            if self.above_datum[idx] && !self.boundary[idx] && u[idx] < 0.0 {
                u[idx] = 0.0;
            }
        }
    }

    fn energy_eps(&self, u: &[f64], eps: f64) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let mut dirichlet = 0.0;
        for iy in 0..ny {
            let row_w = if iy == 0 || iy == ny - 1 { 0.5 } else { 1.0 };
            for ix in 0..nx - 1 {
                let d = u[iy * nx + ix + 1] - u[iy * nx + ix];
                dirichlet += row_w * d * d;
            }
        }
        for ix in 0..nx {
            let col_w = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
            for iy in 0..ny - 1 {
                let d = u[(iy + 1) * nx + ix] - u[iy * nx + ix];
                dirichlet += col_w * d * d;
            }
        }
        let mut weight = 0.0;
        for idx in 0..nx * ny {
            weight += self.node_weight[idx]
                * (self.w_plus[idx] * smoothed_step(u[idx], eps)
                    + self.w_minus[idx] * smoothed_step(-u[idx], eps));
        }
        dirichlet + weight * self.h * self.h
    }

    /// Gradient on interior nodes (zero on the boundary).
    fn grad_eps(&self, u: &[f64], eps: f64, g: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let h2 = self.h * self.h;
        for iy in 0..ny {
            for ix in 0..nx {
                let idx = iy * nx + ix;
                if self.boundary[idx] {
                    g[idx] = 0.0;
                    continue;
                }
                let c = u[idx];
                let mut gv = 2.0
                    * (4.0 * c - u[idx - 1] - u[idx + 1] - u[idx - nx] - u[idx + nx]);
                gv += h2
                    * (self.w_plus[idx] * smoothed_step_slope(c, eps)
                        - self.w_minus[idx] * smoothed_step_slope(-c, eps));
                g[idx] = gv;
            }
        }
    }
}

/// Exact discrete energy with strict sign indicators (the eps -> 0 limit
/// of the stage energy; ties at zero carry no phase weight).
fn energy_exact(grid: &Grid, u: &[f64]) -> f64 {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut dirichlet = 0.0;
    for iy in 0..ny {
        let row_w = if iy == 0 || iy == ny - 1 { 0.5 } else { 1.0 };
        for ix in 0..nx - 1 {
            let d = u[iy * nx + ix + 1] - u[iy * nx + ix];
            dirichlet += row_w * d * d;
        }
    }
    for ix in 0..nx {
        let col_w = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
        for iy in 0..ny - 1 {
            let d = u[(iy + 1) * nx + ix] - u[iy * nx + ix];
            dirichlet += col_w * d * d;
        }
    }
    let mut weight = 0.0;
    for idx in 0..nx * ny {
        if u[idx] > 0.0 {
            weight += grid.node_weight[idx] * grid.w_plus[idx];
        } else if u[idx] < 0.0 {
            weight += grid.node_weight[idx] * grid.w_minus[idx];
        }
    }
    dirichlet + weight * grid.h * grid.h
}

/// Energy-guarded level lift: shallow phase films inside the smoothing
/// band are collapsed to the dead zone in one collective move when that
/// lowers the exact energy. The annealed clamped step has zero slope once
/// saturated, so a wet film frozen at an earlier stage is invisible to
/// the descent; lifting the whole `(-band, 0)` (resp. `(0, band)`) layer
/// at once removes it, and the guard protects genuine interface layers
/// (whose lift would cost more Dirichlet energy than the weight saved).
fn level_lift(grid: &Grid, u: &mut Vec<f64>, band: f64) {
    for (phase_neg, weighted) in [(true, &grid.w_minus), (false, &grid.w_plus)] {
        let mut trial = u.clone();
        let mut touched = false;
        for idx in 0..trial.len() {
            if grid.boundary[idx] || weighted[idx] <= 0.0 {
                continue;
            }
            let v = trial[idx];
            if (phase_neg && v < 0.0 && v > -band) || (!phase_neg && v > 0.0 && v < band) {
                trial[idx] = 0.0;
                touched = true;
            }
        }
        if touched && energy_exact(grid, &trial) <= energy_exact(grid, u) {
            *u = trial;
        }
    }
}

/// Exact-indicator nodal polish: red-black sweeps where each interior node
/// is set to the exact minimizer of the unsmoothed energy given its
/// neighbors. The nodal objective is quadratic on each sign, so the
/// candidates are the clamped averages and zero; picking the best is an
/// exact coordinate descent step on the true functional. This removes
/// low-amplitude films that the smoothed continuation cannot see (the
/// clamped-linear step has zero slope once saturated), at monotonically
/// nonincreasing exact energy.
fn exact_polish(grid: &Grid, u: &mut [f64], sweeps: usize) {
    let (nx, ny) = (grid.nx, grid.ny);
    let h2 = grid.h * grid.h;
    let omega = 1.85;
    for _ in 0..sweeps {
        let mut moved = false;
        for color in 0..2 {
            for iy in 1..ny - 1 {
                for ix in 1..nx - 1 {
                    if (ix + iy) % 2 != color {
                        continue;
                    }
                    let idx = iy * nx + ix;
                    let cur = u[idx];
                    let avg = 0.25
                        * (u[idx - 1] + u[idx + 1] + u[idx - nx] + u[idx + nx]);
                    // Local energy: 4 (v - avg)^2 + h^2 (w+ [v>0] + w- [v<0])
                    // up to a constant; weights carry the nodal factor.
                    let wp = grid.w_plus[idx] * grid.node_weight[idx];
                    let wm = grid.w_minus[idx] * grid.node_weight[idx];
                    let local = |v: f64| -> f64 {
                        let mut e = 4.0 * (v - avg) * (v - avg);
                        if v > 0.0 {
                            e += h2 * wp;
                        } else if v < 0.0 {
                            e += h2 * wm;
                        }
                        e
                    };
                    let best_e0 = local(cur);
                    let mut best = cur;
                    let mut best_e = best_e0;
                    // Candidates: the over-relaxed Gauss-Seidel point (still
                    // on the decreasing side of the local quadratic for
                    // omega < 2), the exact quadratic minimizer, and the
                    // phase boundary.
                    let mut candidates = [cur + omega * (avg - cur), avg, 0.0];
                    if grid.above_datum[idx] {
                        candidates[0] = candidates[0].max(0.0);
                        candidates[1] = candidates[1].max(0.0);
                    }
                    for c in candidates {
                        let e = local(c);
                        if e < best_e - 1e-18 {
                            best_e = e;
                            best = c;
                        }
                    }
                    if best != cur {
                        u[idx] = best;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            break;
        }
    }
}

/// One energy-guarded harmonic replacement pass on the same-sign bulk.
fn harmonic_sweep(grid: &Grid, u: &mut Vec<f64>, eps: f64, history: &mut Vec<(usize, f64)>, stage: usize) {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = nx * ny;
    let mut mask = vec![false; n];
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let idx = iy * nx + ix;
            let c = u[idx];
            if c.abs() <= 3.0 * eps {
                continue;
            }
            let same_sign = [idx - 1, idx + 1, idx - nx, idx + nx]
                .iter()
                .all(|&j| u[j] * c > 0.0 && u[j].abs() > 0.5 * eps);
            mask[idx] = same_sign;
        }
    }
    let before = grid.energy_eps(u, eps);
    let mut trial = u.clone();
    if sor_harmonic(&mut trial, &mask, nx, ny, 1e-11, 20_000).is_ok() {
        grid.project(&mut trial);
        let after = grid.energy_eps(&trial, eps);
        if after <= before + 1e-10 * (1.0 + before.abs()) {
            *u = trial;
            history.push((stage, after));
        }
    }
}

/// Red-black SOR solve of the five-point Laplace system on the masked
/// nodes, boundary and unmasked values held fixed.
fn sor_harmonic(
    values: &mut [f64],
    mask: &[bool],
    nx: usize,
    ny: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<()> {
    let omega = 1.85;
    let mut last_res = f64::INFINITY;
    for _ in 0..max_sweeps {
        let mut res_max = 0.0f64;
        for color in 0..2 {
            for iy in 1..ny - 1 {
                for ix in 1..nx - 1 {
                    if (ix + iy) % 2 != color {
                        continue;
                    }
                    let idx = iy * nx + ix;
                    if !mask[idx] {
                        continue;
                    }
                    let nb = 0.25
                        * (values[idx - 1] + values[idx + 1] + values[idx - nx] + values[idx + nx]);
                    let r = nb - values[idx];
                    res_max = res_max.max(r.abs());
                    values[idx] += omega * r;
                }
            }
        }
        last_res = res_max;
        if res_max < tol {
            return Ok(());
        }
    }
    Err(Error::InnerSolverFailed(last_res))
}

/// Replaces the masked values by the discrete harmonic extension of the
/// surrounding ones. The mask must avoid the lattice frame.
pub fn harmonic_replace(field: &ScalarField, mask: &[bool]) -> Result<ScalarField> {
    let (nx, ny) = (field.nx(), field.ny());
    if mask.len() != nx * ny {
        return Err(Error::InvalidArgument("mask shape mismatch".into()));
    }
    for iy in 0..ny {
        for ix in 0..nx {
            if mask[iy * nx + ix] && (ix == 0 || ix == nx - 1 || iy == 0 || iy == ny - 1) {
                return Err(Error::InvalidArgument(
                    "mask touches the lattice frame".into(),
                ));
            }
        }
    }
    let mut values = field.values().to_vec();
    if mask.iter().any(|&m| m) {
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        sor_harmonic(&mut values, mask, nx, ny, 1e-12 * scale, 40_000)?;
    }
    ScalarField::new(field.origin(), field.h(), nx, ny, field.x2_0(), values)
}

/// Local minimization by smoothed continuation.
pub fn minimize(
    domain: &DomainSpec,
    boundary: &BoundaryData,
    params: &MinimizeParams,
) -> Result<MinimizeResult> {
    if domain.nx < 64 || domain.ny < 64 {
        return Err(Error::InvalidArgument(format!(
            "resolution {}x{} below the 64x64 minimum",
            domain.nx, domain.ny
        )));
    }
    let floor = (params.eps_schedule.last().copied()).unwrap_or(0.0);
    if params.eps_schedule.is_empty()
        || floor < domain.h * domain.h - 1e-15
        || params
            .eps_schedule
            .windows(2)
            .any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument(
            "eps schedule must decrease strictly to a floor >= h^2".into(),
        ));
    }
    let grid = Grid::new(domain);
    let (nx, ny) = (grid.nx, grid.ny);
    let n = nx * ny;

    // Boundary trace.
    let mut u = vec![0.0f64; n];
    for iy in 0..ny {
        for ix in 0..nx {
            let idx = iy * nx + ix;
            if grid.boundary[idx] {
                let p = Vec2::new(
                    grid.origin.x + ix as f64 * grid.h,
                    grid.origin.y + iy as f64 * grid.h,
                );
                let v = boundary.eval(p);
                if !v.is_finite() {
                    return Err(Error::InvalidArgument("unbounded boundary data".into()));
                }
                u[idx] = v;
            }
        }
    }
    match &params.init {
        InitKind::HarmonicExtension => {
            let interior_mask: Vec<bool> = grid.boundary.iter().map(|&b| !b).collect();
            let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
            sor_harmonic(&mut u, &interior_mask, nx, ny, 1e-10 * scale, 40_000)?;
        }
        InitKind::Zero => {}
        InitKind::Profile(prof) => {
            for iy in 0..ny {
                for ix in 0..nx {
                    let idx = iy * nx + ix;
                    if !grid.boundary[idx] {
                        let p = Vec2::new(
                            grid.origin.x + ix as f64 * grid.h,
                            grid.origin.y + iy as f64 * grid.h,
                        );
                        u[idx] = prof.eval_xy(p);
                    }
                }
            }
        }
    }
    // Seeded symmetry-breaking noise of amplitude h on the interior.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for (idx, v) in u.iter_mut().enumerate() {
        if !grid.boundary[idx] {
            *v += grid.h * (2.0 * rng.gen::<f64>() - 1.0);
        }
    }
    grid.project(&mut u);

    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut converged = true;
    let mut g = vec![0.0f64; n];
    let w_max = grid
        .w_plus
        .iter()
        .chain(grid.w_minus.iter())
        .fold(0.0f64, |a, &w| a.max(w));

    let mut last_stage_converged = true;
    for (stage, &eps) in params.eps_schedule.iter().enumerate() {
        // Collapse films frozen by the previous stage before descending at
        // the new width.
        if stage > 0 {
            level_lift(&grid, &mut u, 2.0 * eps);
        }
        // Harmonic replacement on nodes far from the current interface,
        // where the smoothed weight terms are locally constant; resolves
        // the slow bulk-harmonic modes before descent works the interface.
        for _ in 0..params.harmonic_sweeps {
            harmonic_sweep(&grid, &mut u, eps, &mut history, stage);
        }
        let mut energy = grid.energy_eps(&u, eps);
        history.push((stage, energy));
        let lipschitz = 16.0 + grid.h * grid.h * w_max / eps;
        let mut step = 1.0 / lipschitz;
        let mut stalled = 0usize;
        let mut iters = 0usize;
        let mut stage_converged = false;
        let tail_start = (3 * params.max_outer_iters) / 4;
        let mut tail_energy = energy;
        while iters < params.max_outer_iters {
            iters += 1;
            grid.grad_eps(&u, eps, &mut g);
            let gnorm2: f64 = g.iter().map(|x| x * x).sum();
            if !gnorm2.is_finite() {
                return Err(Error::NumericalFailure);
            }
            let (new_u, new_energy, used_step, travel2) = match params.step_rule {
                StepRule::Fixed(t) => {
                    let mut trial: Vec<f64> =
                        u.iter().zip(g.iter()).map(|(v, gv)| v - t * gv).collect();
                    grid.project(&mut trial);
                    let e = grid.energy_eps(&trial, eps);
                    let d2: f64 = trial
                        .iter()
                        .zip(u.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (trial, e, t, d2)
                }
                StepRule::Backtracking => {
                    let mut t = (step * 2.0).min(4.0 / lipschitz);
                    loop {
                        let mut trial: Vec<f64> =
                            u.iter().zip(g.iter()).map(|(v, gv)| v - t * gv).collect();
                        grid.project(&mut trial);
                        let e = grid.energy_eps(&trial, eps);
                        let d2: f64 = trial
                            .iter()
                            .zip(u.iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        if e <= energy - 0.25 * d2 / t || t < 1e-18 {
                            break (trial, e, t, d2);
                        }
                        t *= 0.5;
                    }
                }
            };
            if !new_energy.is_finite() {
                return Err(Error::NumericalFailure);
            }
            if travel2 <= 1e-24 * n as f64 {
                stage_converged = true;
                u = new_u;
                energy = new_energy;
                history.push((stage, energy));
                break;
            }
            if new_energy > energy + 1e-10 * (1.0 + energy.abs()) {
                return Err(Error::Diverged {
                    iteration: iters,
                    history: history.iter().map(|&(_, e)| e).collect(),
                });
            }
            let drop = energy - new_energy;
            u = new_u;
            energy = new_energy;
            step = used_step;
            history.push((stage, energy));
            if iters == tail_start {
                tail_energy = energy;
            }
            if drop <= params.inner_tol * (1.0 + energy.abs()) {
                stalled += 1;
                if stalled >= 2 {
                    stage_converged = true;
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        // A capped stage still counts as settled when the tail quarter
        // contributed a negligible share of the descent.
        if !stage_converged && iters >= params.max_outer_iters {
            stage_converged = (tail_energy - energy).abs() <= 1e-8 * (1.0 + energy.abs());
        }
        last_stage_converged = stage_converged;
    }
    // Final cleanup sweep at the floor width.
    if params.harmonic_sweeps > 0 {
        let eps = floor;
        let stage = params.eps_schedule.len() - 1;
        harmonic_sweep(&grid, &mut u, eps, &mut history, stage);
    }
    // Exact-indicator polish: coordinate descent on the unsmoothed energy,
    // interleaved with film lifts at a shrinking band.
    if params.polish_sweeps > 0 {
        let rounds = 4usize;
        let per_round = (params.polish_sweeps / rounds).max(1);
        let mut band = 8.0 * floor;
        for _ in 0..rounds {
            level_lift(&grid, &mut u, band);
            exact_polish(&grid, &mut u, per_round);
            band *= 0.5;
        }
    }
    converged = converged && last_stage_converged;

    // Collapse the dead zone left by the final smoothing width.
    if params.snap_dead_zone {
        let snap = 0.5 * floor;
        for (idx, v) in u.iter_mut().enumerate() {
            if !grid.boundary[idx] && v.abs() <= snap {
                *v = 0.0;
            }
        }
    }

    let field = ScalarField::new(domain.origin, domain.h, nx, ny, domain.x2_0, u)?;
    let fb = field.extract_level_set(Phase::Negative);
    let exact_energy = discrete_energy(&field);
    Ok(MinimizeResult {
        field,
        energy_history: history,
        converged,
        fb,
        exact_energy,
    })
}

/// Multi-start minimization. Runs the configured descent; for catalog
/// boundary data it additionally runs a floor-scale continuation started
/// at the profile itself, and the lower exact-energy result wins.
///
/// The exact functional carries nearly tied competing local minima for
/// corner-type data: on the unit square the wet half-plane competitor
/// sits only ~0.1% above the corner state, and the smoothed continuation
/// from generic starts ratchets into the wet basin (the clamped step
/// half-prices the dead zone, so the interface creeps wherever the
/// gravity weight vanishes). Descending from the profile at floor-scale
/// smoothing keeps the corner basin; comparing exact energies keeps the
/// procedure a minimization rather than an assumption.
pub fn minimize_best(
    domain: &DomainSpec,
    boundary: &BoundaryData,
    params: &MinimizeParams,
) -> Result<MinimizeResult> {
    let base = minimize(domain, boundary, params)?;
    if let BoundaryData::Catalog(prof) = boundary {
        let h = domain.h;
        let mut alt = params.clone();
        alt.init = InitKind::Profile(prof.clone());
        alt.eps_schedule = vec![4.0 * h * h, h * h];
        if let Ok(alt_result) = minimize(domain, boundary, &alt) {
            if alt_result.exact_energy < base.exact_energy {
                return Ok(alt_result);
            }
        }
    }
    Ok(base)
}

/// Random compact perturbation probe of local minimality: returns the
/// minimum of `E(u + v) - E(u)` over seeded bump perturbations `v`.
#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub trials: usize,
    pub min_delta: f64,
    pub descent_found: bool,
}

pub fn local_perturbation_test(
    field: &ScalarField,
    trials: usize,
    amplitude: f64,
    seed: u64,
) -> PerturbationReport {
    let (nx, ny, h) = (field.nx(), field.ny(), field.h());
    let base = discrete_energy(field);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_delta = f64::INFINITY;
    let width = field.x_max() - field.origin().x;
    let height = field.y_max() - field.origin().y;
    for _ in 0..trials {
        let radius = h * 4.0 + rng.gen::<f64>() * (0.18 * width.min(height) - 4.0 * h).max(h);
        let cx = field.origin().x + radius + 2.0 * h + rng.gen::<f64>() * (width - 2.0 * radius - 4.0 * h).max(h);
        let cy = field.origin().y + radius + 2.0 * h + rng.gen::<f64>() * (height - 2.0 * radius - 4.0 * h).max(h);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mut values = field.values().to_vec();
        for iy in 1..ny - 1 {
            for ix in 1..nx - 1 {
                let p = field.position(ix, iy);
                let s = ((p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy)) / (radius * radius);
                if s < 1.0 {
                    values[iy * nx + ix] += sign * amplitude * (1.0 - s) * (1.0 - s);
                }
            }
        }
        let bumped =
            ScalarField::new(field.origin(), h, nx, ny, field.x2_0(), values).expect("finite");
        let delta = discrete_energy(&bumped) - base;
        min_delta = min_delta.min(delta);
    }
    PerturbationReport {
        trials,
        min_delta,
        descent_found: min_delta < 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn constant_boundary_above_datum_stays_constant() {
        let domain = DomainSpec::square_centered(1.0, 64, 10.0);
        let params = MinimizeParams::default_for(domain.h);
        let r = minimize(&domain, &BoundaryData::Constant(1.0), &params).unwrap();
        for &v in r.field.values() {
            assert_close(v, 1.0, 0.05);
        }
        assert!(r.converged);
    }

    #[test]
    fn flat_interface_is_recovered() {
        let domain = DomainSpec::square_centered(1.0, 96, 0.0);
        let params = MinimizeParams::default_for(domain.h);
        let r = minimize(&domain, &BoundaryData::Linear, &params).unwrap();
        let mut worst = 0.0f64;
        for iy in 0..96 {
            for ix in 0..96 {
                let p = r.field.position(ix, iy);
                worst = worst.max((r.field.value(ix, iy) - p.y).abs());
            }
        }
        assert!(worst <= 5.0 * domain.h, "max deviation {worst:.3e}");

        // Energy close to the exact-indicator energy of the flat interface.
        let exact = ScalarField::from_fn(
            domain.origin,
            domain.h,
            domain.nx,
            domain.ny,
            0.0,
            |p| p.y,
        )
        .unwrap();
        let e_flat = discrete_energy(&exact);
        assert!(
            (r.exact_energy - e_flat).abs() <= 0.02 * e_flat,
            "{} vs {}",
            r.exact_energy,
            e_flat
        );
    }

    #[test]
    fn history_is_monotone_within_stages() {
        let domain = DomainSpec::square_centered(1.0, 64, 0.0);
        let params = MinimizeParams::default_for(domain.h);
        let r = minimize(
            &domain,
            &BoundaryData::Catalog(PiecewiseProfile::a1()),
            &params,
        )
        .unwrap();
        for w in r.energy_history.windows(2) {
            if w[0].0 == w[1].0 {
                assert!(w[1].1 <= w[0].1 + 1e-10 * (1.0 + w[0].1.abs()));
            }
        }
    }

    #[test]
    fn determinism_bit_for_bit() {
        let domain = DomainSpec::square_centered(1.0, 64, 0.0);
        let mut params = MinimizeParams::default_for(domain.h);
        params.seed = 42;
        let boundary = BoundaryData::Catalog(PiecewiseProfile::a4_right());
        let a = minimize(&domain, &boundary, &params).unwrap();
        let b = minimize(&domain, &boundary, &params).unwrap();
        assert_eq!(a.field.values(), b.field.values());
        assert_eq!(a.energy_history.len(), b.energy_history.len());
        for (x, y) in a.energy_history.iter().zip(b.energy_history.iter()) {
            assert_eq!(x, y);
        }
        // A different seed perturbs the iterates.
        params.seed = 43;
        let c = minimize(&domain, &boundary, &params).unwrap();
        assert_ne!(a.field.values(), c.field.values());
    }

    #[test]
    fn boundary_trace_is_preserved() {
        let domain = DomainSpec::square_centered(1.0, 64, 0.0);
        let params = MinimizeParams::default_for(domain.h);
        let prof = PiecewiseProfile::a1();
        let r = minimize(&domain, &BoundaryData::Catalog(prof.clone()), &params).unwrap();
        for ix in 0..domain.nx {
            for iy in [0, domain.ny - 1] {
                let p = r.field.position(ix, iy);
                assert_eq!(r.field.value(ix, iy), prof.eval_xy(p));
            }
        }
    }

    #[test]
    fn harmonic_replace_basics() {
        let h = 2.0 / 63.0;
        let f = ScalarField::centered(1.0, h, 0.0, |p| p.y * p.y).unwrap();
        let n = f.nx();
        // Disk mask of radius 0.5 around the center.
        let mut mask = vec![false; n * n];
        for iy in 0..n {
            for ix in 0..n {
                if f.position(ix, iy).norm() < 0.5 {
                    mask[iy * n + ix] = true;
                }
            }
        }
        let replaced = harmonic_replace(&f, &mask).unwrap();
        // Mean value property: center ~ average of x2^2 on the circle.
        let center = replaced.sample(Vec2::ZERO).unwrap();
        assert_close(center, 0.5 * 0.5 * 0.5, 0.02);

        // Empty mask is the identity.
        let same = harmonic_replace(&f, &vec![false; n * n]).unwrap();
        assert_eq!(same.values(), f.values());

        // Already-harmonic data is unchanged up to solver tolerance.
        let harm = ScalarField::centered(1.0, h, 0.0, |p| p.x * p.y).unwrap();
        let replaced = harmonic_replace(&harm, &mask).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in replaced.values().iter().zip(harm.values()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-8, "{worst:.3e}");
    }

    #[test]
    fn zero_field_is_a_global_floor() {
        let domain = DomainSpec::square_centered(1.0, 64, 10.0);
        let f = ScalarField::from_fn(domain.origin, domain.h, 64, 64, 10.0, |_| 0.0).unwrap();
        let rep = local_perturbation_test(&f, 30, 0.05, 7);
        assert!(rep.min_delta >= 0.0, "{}", rep.min_delta);
        assert!(!rep.descent_found);
    }
}
