//! Discrete scalar fields on uniform Cartesian lattices.
//!
//! Fields are immutable after construction. Interpolation is bilinear,
//! gradients are central differences of the interpolant at step `h/2`
//! (exact on quadratics), disk and circle integrals use tensor trapezoid in
//! `theta` times composite midpoint in `rho`, and the zero level set is
//! extracted by marching squares restricted to cells touching the requested
//! sign region.
//!
//! Field file format (`# ehd-field v1`): a small header followed by `ny`
//! rows of `nx` values, row `iy` holding the lattice line `y = origin_y +
//! iy h` with `x` increasing along the row.

use crate::geom::Vec2;
use crate::profiles::{Phase, PiecewiseProfile};
use crate::report::format_f64;
use crate::{Error, Result};
use std::io::{BufRead, Write};

/// Discrete sample of the state function `u` plus the datum height.
#[derive(Clone, Debug)]
pub struct ScalarField {
    origin: Vec2,
    h: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    x2_0: f64,
}

/// Ordered vertex chain; a discrete free-boundary curve.
#[derive(Clone, Debug)]
pub struct Polyline {
    pub vertices: Vec<Vec2>,
    pub closed: bool,
}

impl Polyline {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Index of the vertex closest to `p`.
    pub fn nearest_vertex(&self, p: Vec2) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = v.dist(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for v in &self.vertices {
            out.push_str(&format!("{},{}\n", format_f64(v.x), format_f64(v.y)));
        }
        out
    }
}

impl ScalarField {
    pub fn new(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        x2_0: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::InvalidArgument(format!(
                "lattice {nx}x{ny} below the 8x8 minimum"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad spacing h = {h}")));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidArgument("value buffer size mismatch".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite field value".into()));
        }
        Ok(ScalarField {
            origin,
            h,
            nx,
            ny,
            values,
            x2_0,
        })
    }

    pub fn from_fn<F: Fn(Vec2) -> f64>(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        x2_0: f64,
        f: F,
    ) -> Result<Self> {
        let mut values = vec![0.0; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                values[iy * nx + ix] = f(Vec2::new(
                    origin.x + ix as f64 * h,
                    origin.y + iy as f64 * h,
                ));
            }
        }
        ScalarField::new(origin, h, nx, ny, x2_0, values)
    }

    /// Square lattice centered at the origin covering `[-half, half]^2`,
    /// with the origin exactly on a node.
    pub fn centered<F: Fn(Vec2) -> f64>(half: f64, h: f64, x2_0: f64, f: F) -> Result<Self> {
        let m = (half / h).ceil() as usize;
        let n = 2 * m + 1;
        let o = -(m as f64) * h;
        ScalarField::from_fn(Vec2::new(o, o), h, n, n, x2_0, f)
    }

    /// Centered sample of a catalog profile with vertex at the origin.
    pub fn from_profile(profile: &PiecewiseProfile, half: f64, h: f64, x2_0: f64) -> Result<Self> {
        ScalarField::centered(half, h, x2_0, |p| profile.eval_xy(p))
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn x2_0(&self) -> f64 {
        self.x2_0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn position(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + ix as f64 * self.h,
            self.origin.y + iy as f64 * self.h,
        )
    }

    pub fn x_max(&self) -> f64 {
        self.origin.x + (self.nx - 1) as f64 * self.h
    }

    pub fn y_max(&self) -> f64 {
        self.origin.y + (self.ny - 1) as f64 * self.h
    }

    /// True when `p` lies in the hull shrunk by `margin` on every side.
    pub fn contains(&self, p: Vec2, margin: f64) -> bool {
        p.x >= self.origin.x + margin
            && p.x <= self.x_max() - margin
            && p.y >= self.origin.y + margin
            && p.y <= self.y_max() - margin
    }

    /// Checks that the closed ball of radius `r + margin` fits in the hull.
    pub fn require_ball(&self, center: Vec2, r: f64, margin: f64) -> Result<()> {
        if self.contains(center, r + margin) {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!(
                "ball of radius {:.4} around ({:.4}, {:.4}) leaves the hull",
                r + margin,
                center.x,
                center.y
            )))
        }
    }

    fn bilinear(&self, p: Vec2) -> f64 {
        let fx = (p.x - self.origin.x) / self.h;
        let fy = (p.y - self.origin.y) / self.h;
        let ix = (fx.floor() as isize).clamp(0, self.nx as isize - 2) as usize;
        let iy = (fy.floor() as isize).clamp(0, self.ny as isize - 2) as usize;
        let tx = (fx - ix as f64).clamp(0.0, 1.0);
        let ty = (fy - iy as f64).clamp(0.0, 1.0);
        let v00 = self.value(ix, iy);
        let v10 = self.value(ix + 1, iy);
        let v01 = self.value(ix, iy + 1);
        let v11 = self.value(ix + 1, iy + 1);
        (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10 + (1.0 - tx) * ty * v01 + tx * ty * v11
    }

    /// Bilinear interpolation; exact on bilinear functions.
    pub fn sample(&self, p: Vec2) -> Result<f64> {
        if !self.contains(p, -1e-12 * self.h) {
            return Err(Error::OutOfDomain(format!(
                "point ({:.4}, {:.4}) outside hull",
                p.x, p.y
            )));
        }
        Ok(self.bilinear(p))
    }

    /// Bilinear interpolation with clamped extension outside the hull.
    pub fn sample_clamped(&self, p: Vec2) -> f64 {
        self.bilinear(Vec2::new(
            p.x.clamp(self.origin.x, self.x_max()),
            p.y.clamp(self.origin.y, self.y_max()),
        ))
    }

    /// Central differences of the interpolant at step `h/2`; second-order
    /// in smooth regions and exact on quadratics.
    pub fn grad(&self, p: Vec2) -> Result<Vec2> {
        if !self.contains(p, self.h) {
            return Err(Error::OutOfDomain(format!(
                "gradient stencil at ({:.4}, {:.4}) leaves the hull",
                p.x, p.y
            )));
        }
        let d = 0.5 * self.h;
        let gx = (self.bilinear(Vec2::new(p.x + d, p.y)) - self.bilinear(Vec2::new(p.x - d, p.y)))
            / (2.0 * d);
        let gy = (self.bilinear(Vec2::new(p.x, p.y + d)) - self.bilinear(Vec2::new(p.x, p.y - d)))
            / (2.0 * d);
        Ok(Vec2::new(gx, gy))
    }

    /// Phase-consistent gradient estimate: like [`grad`](Self::grad), but
    /// when the central stencil straddles the sign interface the
    /// evaluation point is first moved two cells into the phase carried at
    /// `p` (along the local gradient direction), so the difference stencil
    /// never averages across the interface kink. Since the correction acts
    /// only on an `O(h)`-wide band and is itself `O(h)`-accurate there,
    /// integrals of the squared gradient become second-order near free
    /// boundaries instead of first-order.
    pub fn one_sided_grad(&self, p: Vec2) -> Result<Vec2> {
        let g = self.grad(p)?;
        let v = self.bilinear(p);
        if v == 0.0 {
            return Ok(g);
        }
        let d = self.h;
        let mut straddles = false;
        let mut max_abs = 0.0f64;
        for q in [
            Vec2::new(p.x + d, p.y),
            Vec2::new(p.x - d, p.y),
            Vec2::new(p.x, p.y + d),
            Vec2::new(p.x, p.y - d),
        ] {
            let s = self.sample_clamped(q);
            max_abs = max_abs.max(s.abs());
            if (v > 0.0 && s <= 0.0) || (v < 0.0 && s >= 0.0) {
                straddles = true;
            }
        }
        // A value much smaller than the stencil scale marks a nearby zero
        // line of u (the gradient direction may flip across it even when
        // the sign does not, as on interior kink rays).
        straddles |= v.abs() < 0.5 * max_abs;
        if !straddles {
            return Ok(g);
        }
        let gn = g.norm();
        if gn < 1e-300 {
            return Ok(g);
        }
        // The gradient points toward increasing u, i.e. toward the
        // interface from inside the negative phase and away from it in the
        // positive phase; step deeper into the local phase.
        let inward = g * (v.signum() / gn);
        let p_in = p + inward * (2.0 * d);
        match self.grad(p_in) {
            Ok(gi) if self.bilinear(p_in) * v > 0.0 => Ok(gi),
            _ => Ok(g),
        }
    }

    /// Phase indicator with plateau-corrected interfaces: `+1` in the gas
    /// phase, `-1` in the fluid phase, `0` on the dead zone.
    ///
    /// A bilinear cell with a single nonzero corner takes that corner's
    /// sign on its whole open interior, so the raw sign of the interpolant
    /// overhangs an exact-zero plateau by up to one cell. Nodes adjacent
    /// to an exact-zero neighborhood are therefore thresholded at half a
    /// cell of local gradient, centering the discrete interface on the
    /// true one to first order. Genuine sign-crossing interfaces (no
    /// plateau) keep the raw sign, which is already unbiased there.
    pub fn phase_indicator(&self, p: Vec2) -> i8 {
        let v = self.bilinear(p);
        if v == 0.0 {
            return 0;
        }
        let d = self.h;
        let mut plateau = false;
        let mut opposite = false;
        for q in [
            Vec2::new(p.x + d, p.y),
            Vec2::new(p.x - d, p.y),
            Vec2::new(p.x, p.y + d),
            Vec2::new(p.x, p.y - d),
        ] {
            let s = self.sample_clamped(q);
            if s == 0.0 {
                plateau = true;
            } else if s * v < 0.0 {
                opposite = true;
            }
        }
        if !plateau || opposite {
            return if v > 0.0 { 1 } else { -1 };
        }
        let g = self.grad(p).map_or(0.0, |g| g.norm());
        if v.abs() > PLATEAU_SHIFT * d * g {
            if v > 0.0 {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    pub fn positive_part(&self) -> ScalarField {
        let mut f = self.clone();
        for v in &mut f.values {
            *v = v.max(0.0);
        }
        f
    }

    pub fn negative_part(&self) -> ScalarField {
        let mut f = self.clone();
        for v in &mut f.values {
            *v = v.min(0.0);
        }
        f
    }

    /// Circle integral with arc-length factor; hull-checked with a 2h
    /// margin so gradient-based integrands stay inside.
    pub fn circle_integral<F: Fn(Vec2) -> f64>(
        &self,
        integrand: F,
        center: Vec2,
        r: f64,
        n_theta: usize,
    ) -> Result<f64> {
        self.require_ball(center, r, 2.0 * self.h)?;
        Ok(quad::circle(integrand, center, r, n_theta, &[]))
    }

    /// Disk integral; hull-checked with a 2h margin.
    pub fn ball_integral<F: Fn(Vec2) -> f64>(
        &self,
        integrand: F,
        center: Vec2,
        r: f64,
        spec: &quad::BallQuad,
    ) -> Result<f64> {
        self.require_ball(center, r, 2.0 * self.h)?;
        Ok(quad::ball(integrand, center, r, self.h, spec))
    }

    /// Blowup rescaling `u_m(y) = u(center + r y) / r^kappa` resampled on
    /// the unit-ball bounding lattice `[-1, 1]^2`. Values outside the
    /// source hull (box corners when the ball hugs the hull) are clamped
    /// edge extensions; diagnostics read only the inscribed ball.
    pub fn rescale(&self, center: Vec2, r: f64, kappa: f64) -> Result<ScalarField> {
        self.require_ball(center, r, 0.0)?;
        if !(r > 0.0) || !(0.5..=4.0).contains(&kappa) {
            return Err(Error::InvalidArgument(format!(
                "rescale with r = {r}, kappa = {kappa}"
            )));
        }
        let ht = (self.h / r).min(0.25);
        let m = (1.0 / ht).ceil() as usize;
        let n = (2 * m + 1).max(9).min(2049);
        let ht = 2.0 / (n - 1) as f64;
        let scale = r.powf(kappa);
        let mut values = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let y = Vec2::new(-1.0 + ix as f64 * ht, -1.0 + iy as f64 * ht);
                values[iy * n + ix] = self.sample_clamped(center + y * r) / scale;
            }
        }
        ScalarField::new(
            Vec2::new(-1.0, -1.0),
            ht,
            n,
            n,
            (self.x2_0 - center.y) / r,
            values,
        )
    }

    /// Marching-squares zero level set restricted to cells adjacent to the
    /// chosen sign region. Polylines are ordered and injective per
    /// component; an empty level set yields an empty list.
    pub fn extract_level_set(&self, interest: Phase) -> Vec<Polyline> {
        let inside = |v: f64| match interest {
            Phase::Negative => v < 0.0,
            Phase::Positive => v > 0.0,
        };
        let mut segments: Vec<(Vec2, Vec2)> = Vec::new();
        for iy in 0..self.ny - 1 {
            for ix in 0..self.nx - 1 {
                let v = [
                    self.value(ix, iy),
                    self.value(ix + 1, iy),
                    self.value(ix + 1, iy + 1),
                    self.value(ix, iy + 1),
                ];
                let corner = [
                    self.position(ix, iy),
                    self.position(ix + 1, iy),
                    self.position(ix + 1, iy + 1),
                    self.position(ix, iy + 1),
                ];
                let b: Vec<bool> = v.iter().map(|&x| inside(x)).collect();
                if !b.iter().any(|&x| x) || b.iter().all(|&x| x) {
                    continue;
                }
                // Crossing point on the edge from corner i to corner j.
                let cross = |i: usize, j: usize| -> Vec2 {
                    let (vi, vj) = (v[i], v[j]);
                    let t = if (vi - vj).abs() < f64::MIN_POSITIVE {
                        0.5
                    } else {
                        (vi / (vi - vj)).clamp(0.0, 1.0)
                    };
                    corner[i] + (corner[j] - corner[i]) * t
                };
                let edges = [(0usize, 1usize), (1, 2), (2, 3), (3, 0)];
                let mut pts: Vec<Vec2> = Vec::new();
                let mut ids: Vec<usize> = Vec::new();
                for (e, &(i, j)) in edges.iter().enumerate() {
                    if b[i] != b[j] {
                        pts.push(cross(i, j));
                        ids.push(e);
                    }
                }
                match pts.len() {
                    2 => segments.push((pts[0], pts[1])),
                    4 => {
                        // Saddle: connect by the sign of the cell center.
                        let centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                        // edge order is bottom, right, top, left
                        if inside(centre) == b[0] {
                            segments.push((pts[0], pts[1]));
                            segments.push((pts[2], pts[3]));
                        } else {
                            segments.push((pts[0], pts[3]));
                            segments.push((pts[1], pts[2]));
                        }
                    }
                    _ => {}
                }
            }
        }
        stitch_segments(segments, self.h)
    }

    // ----- text format -----

    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# ehd-field v1")?;
        writeln!(w, "nx {}", self.nx)?;
        writeln!(w, "ny {}", self.ny)?;
        writeln!(w, "h {}", format_f64(self.h))?;
        writeln!(
            w,
            "origin {} {}",
            format_f64(self.origin.x),
            format_f64(self.origin.y)
        )?;
        writeln!(w, "x2_0 {}", format_f64(self.x2_0))?;
        for iy in 0..self.ny {
            let row: Vec<String> = (0..self.nx)
                .map(|ix| format_f64(self.value(ix, iy)))
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii field text")
    }

    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut lines = r.lines();
        let mut header = std::collections::HashMap::new();
        let mut first = true;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in &mut lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if first {
                if line != "# ehd-field v1" {
                    return Err(Error::Parse("missing field header".into()));
                }
                first = false;
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok[0] {
                "nx" | "ny" | "h" | "x2_0" if tok.len() == 2 => {
                    header.insert(tok[0].to_string(), vec![tok[1].to_string()]);
                }
                "origin" if tok.len() == 3 => {
                    header.insert(
                        "origin".into(),
                        vec![tok[1].to_string(), tok[2].to_string()],
                    );
                }
                _ => {
                    let row: std::result::Result<Vec<f64>, _> =
                        tok.iter().map(|s| s.parse::<f64>()).collect();
                    rows.push(row.map_err(|_| Error::Parse(format!("bad value row: {line}")))?);
                }
            }
        }
        let get = |k: &str| -> Result<&Vec<String>> {
            header
                .get(k)
                .ok_or_else(|| Error::Parse(format!("missing header field {k}")))
        };
        let nx: usize = get("nx")?[0]
            .parse()
            .map_err(|_| Error::Parse("bad nx".into()))?;
        let ny: usize = get("ny")?[0]
            .parse()
            .map_err(|_| Error::Parse("bad ny".into()))?;
        let h: f64 = get("h")?[0]
            .parse()
            .map_err(|_| Error::Parse("bad h".into()))?;
        let o = get("origin")?;
        let origin = Vec2::new(
            o[0].parse().map_err(|_| Error::Parse("bad origin".into()))?,
            o[1].parse().map_err(|_| Error::Parse("bad origin".into()))?,
        );
        let x2_0: f64 = get("x2_0")?[0]
            .parse()
            .map_err(|_| Error::Parse("bad x2_0".into()))?;
        if rows.len() != ny || rows.iter().any(|r| r.len() != nx) {
            return Err(Error::Parse("value block shape mismatch".into()));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        ScalarField::new(origin, h, nx, ny, x2_0, values)
    }
}

/// Level shift (in cells of local gradient) centering plateau-adjacent
/// sign boundaries of the bilinear interpolant on the true interface.
/// Calibrated once against the closed-form catalog: it balances the
/// expected overhang of single-signed-corner cells across profile types
/// and radii.
const PLATEAU_SHIFT: f64 = 0.4;

/// Chains loose segments into ordered polylines.
fn stitch_segments(segments: Vec<(Vec2, Vec2)>, h: f64) -> Vec<Polyline> {
    use std::collections::HashMap;
    let tol = h * 1e-7;
    let key = |p: Vec2| -> (i64, i64) { ((p.x / tol).round() as i64, (p.y / tol).round() as i64) };

    // Drop degenerate segments.
    let segments: Vec<(Vec2, Vec2)> = segments
        .into_iter()
        .filter(|(a, b)| a.dist(*b) > tol)
        .collect();

    let mut adj: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adj.entry(key(*a)).or_default().push(i);
        adj.entry(key(*b)).or_default().push(i);
    }

    let mut used = vec![false; segments.len()];
    let mut polys: Vec<Polyline> = Vec::new();

    // Walk from a starting segment end; returns the chain of vertices.
    let walk = |start_seg: usize,
                start_from_a: bool,
                used: &mut Vec<bool>|
     -> Vec<Vec2> {
        let (a, b) = segments[start_seg];
        let (first, mut cur) = if start_from_a { (a, b) } else { (b, a) };
        used[start_seg] = true;
        let mut chain = vec![first, cur];
        loop {
            let mut advanced = false;
            if let Some(cands) = adj.get(&key(cur)) {
                for &j in cands {
                    if used[j] {
                        continue;
                    }
                    let (p, q) = segments[j];
                    let next = if p.dist(cur) <= tol {
                        q
                    } else if q.dist(cur) <= tol {
                        p
                    } else {
                        continue;
                    };
                    used[j] = true;
                    chain.push(next);
                    cur = next;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
        chain
    };

    // Open chains first: find endpoints of odd degree.
    let mut degree: HashMap<(i64, i64), usize> = HashMap::new();
    for (a, b) in &segments {
        *degree.entry(key(*a)).or_default() += 1;
        *degree.entry(key(*b)).or_default() += 1;
    }
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&i, &j| {
        let a = segments[i].0;
        let b = segments[j].0;
        (a.y, a.x).partial_cmp(&(b.y, b.x)).unwrap()
    });
    for &i in &order {
        if used[i] {
            continue;
        }
        let (a, b) = segments[i];
        let a_open = degree.get(&key(a)).copied().unwrap_or(0) == 1;
        let b_open = degree.get(&key(b)).copied().unwrap_or(0) == 1;
        let mut chain = if a_open {
            walk(i, true, &mut used)
        } else if b_open {
            walk(i, false, &mut used)
        } else {
            walk(i, true, &mut used)
        };
        // Dedupe consecutive identical vertices.
        chain.dedup_by(|x, y| x.dist(*y) <= tol);
        if chain.len() < 2 {
            continue;
        }
        let closed = chain.first().unwrap().dist(*chain.last().unwrap()) <= tol;
        let mut vertices = chain;
        if closed {
            vertices.pop();
        }
        // Canonical direction: start from the lexicographically smaller end.
        if !closed {
            let f = vertices.first().unwrap();
            let l = vertices.last().unwrap();
            if (l.y, l.x) < (f.y, f.x) {
                vertices.reverse();
            }
        }
        if vertices.len() >= 2 {
            polys.push(Polyline { vertices, closed });
        }
    }
    polys.sort_by(|p, q| {
        let a = p.vertices[0];
        let b = q.vertices[0];
        (a.y, a.x).partial_cmp(&(b.y, b.x)).unwrap()
    });
    polys
}

/// Quadrature rules over disks and circles.
pub mod quad {
    use super::Vec2;
    use std::f64::consts::PI;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    /// Disk rule parameters. `breakpoints` split the angular range at known
    /// integrand kinks; `ring_offset` rotates each ring by a deterministic
    /// irrational fraction of the node spacing, which decorrelates the
    /// panel placement of jump discontinuities across rings.
    #[derive(Clone, Debug)]
    pub struct BallQuad {
        pub n_theta: usize,
        pub n_rho: Option<usize>,
        pub breakpoints: Vec<f64>,
        pub ring_offset: bool,
    }

    impl Default for BallQuad {
        fn default() -> Self {
            BallQuad {
                n_theta: 512,
                n_rho: None,
                breakpoints: Vec::new(),
                ring_offset: false,
            }
        }
    }

    impl BallQuad {
        pub fn with_n_theta(n_theta: usize) -> Self {
            BallQuad {
                n_theta,
                ..Default::default()
            }
        }
    }

    /// Trapezoid rule around one circle of radius `r` (no arc-length
    /// factor), optionally split at breakpoints, optionally phase-shifted.
    fn circle_mean<F: Fn(Vec2) -> f64>(
        f: &F,
        center: Vec2,
        r: f64,
        n_theta: usize,
        breakpoints: &[f64],
        offset: f64,
    ) -> f64 {
        let n = n_theta.max(8);
        if breakpoints.is_empty() {
            // Periodic trapezoid: equal weights.
            let dt = 2.0 * PI / n as f64;
            let mut sum = 0.0;
            for j in 0..n {
                let t = -PI + (j as f64 + offset) * dt;
                sum += f(center + Vec2::from_polar(r, t));
            }
            return sum * dt;
        }
        // Split the circle at the breakpoints and run composite trapezoid
        // on each arc.
        let mut brk: Vec<f64> = breakpoints
            .iter()
            .map(|&t| crate::geom::normalize_angle(t))
            .collect();
        brk.sort_by(|a, b| a.total_cmp(b));
        brk.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let dt_target = 2.0 * PI / n as f64;
        let mut total = 0.0;
        let m = brk.len();
        for i in 0..m {
            let a = brk[i];
            let b = if i + 1 < m { brk[i + 1] } else { brk[0] + 2.0 * PI };
            let len = b - a;
            if len < 1e-13 {
                continue;
            }
            let steps = ((len / dt_target).round() as usize).max(2);
            let dt = len / steps as f64;
            let mut sum = 0.5 * (f(center + Vec2::from_polar(r, a)) + f(center + Vec2::from_polar(r, b)));
            for j in 1..steps {
                sum += f(center + Vec2::from_polar(r, a + j as f64 * dt));
            }
            total += sum * dt;
        }
        total
    }

    /// `int_{\partial B_r(c)} f dS`, including the arc-length factor `r`.
    pub fn circle<F: Fn(Vec2) -> f64>(
        f: F,
        center: Vec2,
        r: f64,
        n_theta: usize,
        breakpoints: &[f64],
    ) -> f64 {
        r * circle_mean(&f, center, r, n_theta, breakpoints, 0.0)
    }

    /// `int_{B_r(c)} f dx` by midpoint in `rho` and trapezoid in `theta`.
    /// `h` sets the default radial panel count `~ r/h`.
    pub fn ball<F: Fn(Vec2) -> f64>(f: F, center: Vec2, r: f64, h: f64, spec: &BallQuad) -> f64 {
        let n_rho = spec.n_rho.unwrap_or(((r / h).ceil() as usize).max(8));
        let d_rho = r / n_rho as f64;
        let mut total = 0.0;
        for i in 0..n_rho {
            let rho = (i as f64 + 0.5) * d_rho;
            let offset = if spec.ring_offset {
                (i as f64 * GOLDEN).fract()
            } else {
                0.0
            };
            let ring = circle_mean(&f, center, rho, spec.n_theta, &spec.breakpoints, offset);
            total += ring * rho * d_rho;
        }
        total
    }

    /// `int_{B_r(c) \cap \{y < c_y\}} f dx` with midpoint nodes in `theta`
    /// strictly inside the lower half, avoiding endpoint evaluations on the
    /// horizontal diameter.
    pub fn half_disk_lower<F: Fn(Vec2) -> f64>(
        f: F,
        center: Vec2,
        r: f64,
        n_theta: usize,
        n_rho: usize,
    ) -> f64 {
        let d_rho = r / n_rho.max(4) as f64;
        let m = (n_theta / 2).max(16);
        let dt = PI / m as f64;
        let mut total = 0.0;
        for i in 0..n_rho.max(4) {
            let rho = (i as f64 + 0.5) * d_rho;
            let mut ring = 0.0;
            for j in 0..m {
                let t = -PI + (j as f64 + 0.5) * dt;
                ring += f(center + Vec2::from_polar(rho, t));
            }
            total += ring * dt * rho * d_rho;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::quad::BallQuad;
    use super::*;
    use crate::profiles::consts;
    use std::f64::consts::PI;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// Independent adaptive Simpson quadrature used as a 1-D oracle.
    fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth > 40 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth + 1) + rec(f, m, b, right, tol / 2.0, depth + 1)
            }
        }
        rec(&f, a, b, simpson(&f, a, b), tol, 0)
    }

    #[test]
    fn sampling_basics() {
        let c5 = ScalarField::centered(1.0, 0.05, 0.0, |_| 5.0).unwrap();
        assert_eq!(c5.sample(Vec2::new(0.31, -0.87)).unwrap(), 5.0);

        let lin = ScalarField::centered(1.0, 0.05, 0.0, |p| p.y).unwrap();
        assert_close(lin.sample(Vec2::new(0.3, 0.7)).unwrap(), 0.7, 1e-15);

        assert!(matches!(
            lin.sample(Vec2::new(2.0, 0.0)),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn sampling_second_order_on_smooth_profiles() {
        let a1 = PiecewiseProfile::a1();
        // Mid-cell points strictly inside the cone, away from the rays.
        let probes = [
            Vec2::from_polar(0.52, -1.5),
            Vec2::from_polar(0.77, -1.9),
            Vec2::from_polar(0.33, -1.2),
        ];
        let mut errs = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let f = ScalarField::from_profile(&a1, 1.0, h, 0.0).unwrap();
            let e = probes
                .iter()
                .map(|&p| {
                    let mid = p + Vec2::new(h / 2.0, h / 2.0);
                    (f.sample(mid).unwrap() - a1.eval_xy(mid)).abs()
                })
                .fold(0.0f64, f64::max);
            errs.push(e);
        }
        // Second-order: each halving of h cuts the error by ~4.
        assert!(errs[1] < errs[0] / 2.5, "{errs:?}");
        assert!(errs[2] < errs[1] / 2.5, "{errs:?}");
    }

    #[test]
    fn gradient_exactness() {
        let lin = ScalarField::centered(1.0, 0.05, 0.0, |p| p.y).unwrap();
        let g = lin.grad(Vec2::new(0.2, -0.3)).unwrap();
        assert_close(g.x, 0.0, 1e-14);
        assert_close(g.y, 1.0, 1e-13);

        let sq = ScalarField::centered(1.5, 0.05, 0.0, |p| p.x * p.x).unwrap();
        let g = sq.grad(Vec2::new(1.0, 0.0)).unwrap();
        assert_close(g.x, 2.0, 1e-12);
        assert_close(g.y, 0.0, 1e-14);
    }

    #[test]
    fn gradient_convergence_on_profile() {
        let a1 = PiecewiseProfile::a1();
        let p = Vec2::from_polar(0.5, -1.7); // interior of the cone
        let mut errs = Vec::new();
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let f = ScalarField::from_profile(&a1, 1.0, h, 0.0).unwrap();
            let g = f.grad(p).unwrap();
            let exact = a1.gradient(p.norm(), p.to_polar().1).unwrap();
            errs.push((g - exact).norm());
        }
        assert!(errs[2] < errs[0] / 4.0, "{errs:?}");
    }

    #[test]
    fn circle_integrals() {
        let f = ScalarField::centered(3.0, 0.05, 0.0, |p| p.y).unwrap();
        // Constant integrand on radius 2.
        let v = f
            .circle_integral(|_| 1.0, Vec2::ZERO, 2.0, 512)
            .unwrap();
        assert_close(v, 4.0 * PI, 1e-10);

        // x2^2 on the unit circle -> pi, cross-checked by 1-D quadrature.
        let v = f
            .circle_integral(|p| f.sample(p).unwrap_or(0.0).powi(2), Vec2::ZERO, 1.0, 512)
            .unwrap();
        let oracle = adaptive_simpson(|t| t.sin().powi(2), -PI, PI, 1e-12);
        assert_close(v, PI, 1e-6);
        assert_close(v, oracle, 1e-6);
    }

    #[test]
    fn circle_integral_of_a1_squared() {
        // (2/9) int cos^2(3t/2 - pi/4) over the cone = 2 pi / 27.
        let a1 = PiecewiseProfile::a1();
        let f = ScalarField::from_profile(&a1, 1.5, 1.0 / 128.0, 0.0).unwrap();
        let v = f
            .circle_integral(|p| f.sample(p).unwrap_or(0.0).powi(2), Vec2::ZERO, 1.0, 2048)
            .unwrap();
        let c2 = consts::amp_a1() * consts::amp_a1();
        let oracle = c2
            * adaptive_simpson(
                |t| (1.5 * t - PI / 4.0).cos().powi(2),
                -5.0 * PI / 6.0,
                -PI / 6.0,
                1e-13,
            );
        assert_close(oracle, 2.0 * PI / 27.0, 1e-12);
        assert_close(v, 2.0 * PI / 27.0, 2e-4);
    }

    #[test]
    fn ball_integrals() {
        let f = ScalarField::centered(1.6, 0.025, 0.0, |p| p.y).unwrap();
        let one = f
            .ball_integral(|_| 1.0, Vec2::ZERO, 1.0, &BallQuad::default())
            .unwrap();
        assert_close(one, PI, 1e-9);

        // Lower half-plane weight: int (-y)^+ over B_1 = 2/3.
        let w = f
            .ball_integral(|p| (-p.y).max(0.0), Vec2::ZERO, 1.0, &BallQuad::default())
            .unwrap();
        assert_close(w, 2.0 / 3.0, 5e-4);

        // Stokes sector weight using the exact profile sign as indicator.
        let a1 = PiecewiseProfile::a1();
        let spec = BallQuad {
            n_theta: 4096,
            ring_offset: true,
            ..Default::default()
        };
        let d = f
            .ball_integral(
                |p| {
                    if a1.eval_xy(p) < 0.0 {
                        (-p.y).max(0.0)
                    } else {
                        0.0
                    }
                },
                Vec2::ZERO,
                1.0,
                &spec,
            )
            .unwrap();
        assert_close(d, consts::stokes_density(), 5e-4);
    }

    #[test]
    fn quadrature_linearity_and_monotonicity() {
        let f = ScalarField::centered(1.5, 0.05, 0.0, |p| p.x + 2.0 * p.y).unwrap();
        let spec = BallQuad::default();
        let g1 = |p: Vec2| p.x * p.x;
        let g2 = |p: Vec2| (p.y - 0.3).abs();
        let a = f.ball_integral(g1, Vec2::ZERO, 1.0, &spec).unwrap();
        let b = f.ball_integral(g2, Vec2::ZERO, 1.0, &spec).unwrap();
        let combo = f
            .ball_integral(|p| 2.0 * g1(p) - 0.5 * g2(p), Vec2::ZERO, 1.0, &spec)
            .unwrap();
        assert_close(combo, 2.0 * a - 0.5 * b, 1e-10);
        assert!(b >= 0.0);
    }

    #[test]
    fn quadrature_refinement_gains() {
        // Halving h and doubling n_theta must cut the error by >= 3x on a
        // smooth integrand.
        let g = |p: Vec2| (1.0 + p.x).sqrt() * (2.0 + (3.0 * p.y).sin());
        let reference = quad::ball(
            g,
            Vec2::ZERO,
            1.0,
            1.0 / 1024.0,
            &BallQuad::with_n_theta(8192),
        );
        let coarse = quad::ball(g, Vec2::ZERO, 1.0, 1.0 / 32.0, &BallQuad::with_n_theta(128));
        let fine = quad::ball(g, Vec2::ZERO, 1.0, 1.0 / 64.0, &BallQuad::with_n_theta(256));
        let e0 = (coarse - reference).abs();
        let e1 = (fine - reference).abs();
        assert!(e1 * 3.0 <= e0, "errors {e0:.3e} -> {e1:.3e}");
    }

    #[test]
    fn level_set_flat_interface() {
        let h = 1.0 / 64.0;
        let f = ScalarField::centered(1.0, h, 0.0, |p| p.y).unwrap();
        let polys = f.extract_level_set(Phase::Negative);
        assert_eq!(polys.len(), 1);
        for v in &polys[0].vertices {
            assert!(v.y.abs() <= h / 2.0);
        }
        // Spans the hull horizontally.
        let xs: Vec<f64> = polys[0].vertices.iter().map(|v| v.x).collect();
        let span = xs.iter().fold(f64::MIN, |a, &b| a.max(b))
            - xs.iter().fold(f64::MAX, |a, &b| a.min(b));
        assert!(span > 1.8);
    }

    #[test]
    fn level_set_a1_rays() {
        let h = 1.0 / 64.0;
        let a1 = PiecewiseProfile::a1();
        let f = ScalarField::from_profile(&a1, 1.0, h, 0.0).unwrap();
        let polys = f.extract_level_set(Phase::Negative);
        assert!(!polys.is_empty());
        let mut seen_left = false;
        let mut seen_right = false;
        for poly in &polys {
            for v in &poly.vertices {
                let (rho, theta) = v.to_polar();
                if rho < 0.1 || rho > 0.8 {
                    continue;
                }
                let d_left = (theta + 5.0 * PI / 6.0).abs();
                let d_right = (theta + PI / 6.0).abs();
                assert!(
                    d_left < 4.0 * h || d_right < 4.0 * h,
                    "stray contour vertex at theta = {theta}"
                );
                seen_left |= d_left < 4.0 * h;
                seen_right |= d_right < 4.0 * h;
            }
        }
        assert!(seen_left && seen_right);
    }

    #[test]
    fn level_set_empty() {
        let f = ScalarField::centered(1.0, 0.1, 0.0, |_| -1.0).unwrap();
        assert!(f.extract_level_set(Phase::Negative).is_empty());
        let z = ScalarField::centered(1.0, 0.1, 0.0, |_| 0.0).unwrap();
        assert!(z.extract_level_set(Phase::Negative).is_empty());
    }

    #[test]
    fn rescale_homogeneous_profiles() {
        let h = 1.0 / 128.0;
        let a1 = PiecewiseProfile::a1();
        let f = ScalarField::from_profile(&a1, 1.0, h, 0.0).unwrap();
        for r in [0.5, 0.25] {
            let m = f.rescale(Vec2::ZERO, r, 1.5).unwrap();
            let mut worst = 0.0f64;
            for &p in &[
                Vec2::from_polar(0.5, -1.5),
                Vec2::from_polar(0.9, -0.8),
                Vec2::from_polar(0.3, 2.0),
            ] {
                worst = worst.max((m.sample(p).unwrap() - a1.eval_xy(p)).abs());
            }
            assert!(worst < 10.0 * h / r * h, "r = {r}, err = {worst:.3e}");
        }

        let zero = ScalarField::centered(1.0, 0.05, 0.0, |_| 0.0).unwrap();
        let mz = zero.rescale(Vec2::ZERO, 0.5, 1.5).unwrap();
        assert!(mz.values().iter().all(|&v| v == 0.0));

        let lin = ScalarField::centered(1.0, 0.05, 0.0, |p| p.y).unwrap();
        let ml = lin.rescale(Vec2::ZERO, 0.25, 1.0).unwrap();
        assert_close(ml.sample(Vec2::new(0.3, 0.6)).unwrap(), 0.6, 1e-12);
    }

    #[test]
    fn rescale_composes() {
        let a1 = PiecewiseProfile::a1();
        let f = ScalarField::from_profile(&a1, 1.0, 1.0 / 96.0, 0.0).unwrap();
        let once = f.rescale(Vec2::ZERO, 0.5, 1.5).unwrap();
        let twice = once.rescale(Vec2::ZERO, 0.5, 1.5).unwrap();
        let direct = f.rescale(Vec2::ZERO, 0.25, 1.5).unwrap();
        for &p in &[Vec2::new(0.3, -0.4), Vec2::new(-0.2, -0.6)] {
            let a = twice.sample(p).unwrap();
            let b = direct.sample(p).unwrap();
            assert!((a - b).abs() < 3e-2 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn rescale_datum_transforms() {
        let f = ScalarField::centered(1.0, 0.05, 0.25, |p| p.y).unwrap();
        let m = f.rescale(Vec2::new(0.0, 0.1), 0.5, 1.0).unwrap();
        assert_close(m.x2_0(), (0.25 - 0.1) / 0.5, 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let f = ScalarField::centered(0.5, 0.1, -0.125, |p| p.x * p.y + 0.3).unwrap();
        let text = f.to_text();
        let g = ScalarField::read_text(&mut text.as_bytes()).unwrap();
        assert_eq!(f.nx(), g.nx());
        assert_eq!(f.ny(), g.ny());
        assert_eq!(f.x2_0(), g.x2_0());
        assert_eq!(f.values(), g.values());
        assert_eq!(text, g.to_text());
    }

    #[test]
    fn half_disk_rule() {
        let v = quad::half_disk_lower(|_| 1.0, Vec2::ZERO, 1.0, 512, 128);
        assert_close(v, PI / 2.0, 1e-9);
        let w = quad::half_disk_lower(|p| -p.y, Vec2::ZERO, 1.0, 512, 128);
        assert_close(w, 2.0 / 3.0, 2e-5);
    }
}
