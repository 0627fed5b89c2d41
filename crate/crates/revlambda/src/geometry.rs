//! Profile curves in the open right half-plane and the curve-surgery moves
//! used by the maximizer.
//!
//! A profile curve is a uniform-parameter polyline `(F, G)` joining two fixed
//! boundary points, staying strictly in `x > 0`. Everything downstream
//! (quadrature, finite elements) works directly on this grid.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Point of the open right half-plane: `x` is the radial coordinate (> 0),
/// `y` the axial coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    /// Checked constructor; `x` must be strictly positive and finite.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!(
                "point ({x}, {y}) is not in the open right half-plane"
            )));
        }
        Ok(Self { x, y })
    }

    pub fn dist(&self, other: &HalfPlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Discretized curve: `n + 1` samples at uniform parameter values `t_i = i/n`,
/// pinned to `p` at `t = 0` and `q` at `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    p: HalfPlanePoint,
    q: HalfPlanePoint,
    samples: Vec<HalfPlanePoint>,
}

/// One failed curve invariant, pointing at the offending sample.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveViolation {
    /// Sample left the open half-plane (`x <= 0`).
    NonPositiveRadius { index: usize, x: f64 },
    /// `samples[0] != p` or `samples[n] != q`.
    EndpointMismatch { index: usize },
    /// Two consecutive samples coincide.
    RepeatedSample { index: usize },
    /// Fewer than two samples.
    TooFewSamples { len: usize },
    /// Non-finite coordinate.
    NotFinite { index: usize },
}

impl std::fmt::Display for CurveViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveViolation::NonPositiveRadius { index, x } => {
                write!(f, "sample {index}: x = {x} violates x > 0")
            }
            CurveViolation::EndpointMismatch { index } => {
                write!(f, "sample {index} does not equal the pinned endpoint")
            }
            CurveViolation::RepeatedSample { index } => {
                write!(f, "samples {} and {index} coincide", index - 1)
            }
            CurveViolation::TooFewSamples { len } => {
                write!(f, "curve has {len} samples, need at least 2")
            }
            CurveViolation::NotFinite { index } => {
                write!(f, "sample {index} has a non-finite coordinate")
            }
        }
    }
}

impl ProfileCurve {
    /// Builds a curve from its sample list; endpoints are pinned to the first
    /// and last sample. Fails if any invariant is violated.
    pub fn new(samples: Vec<HalfPlanePoint>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidCurve(
                CurveViolation::TooFewSamples { len: samples.len() }.to_string(),
            ));
        }
        let curve = Self {
            p: samples[0],
            q: samples[samples.len() - 1],
            samples,
        };
        curve.into_validated()
    }

    /// Builds a curve with explicitly declared endpoints (as read from disk);
    /// the samples must match them exactly.
    pub fn with_endpoints(
        p: HalfPlanePoint,
        q: HalfPlanePoint,
        samples: Vec<HalfPlanePoint>,
    ) -> Result<Self> {
        let curve = Self { p, q, samples };
        curve.into_validated()
    }

    /// Straight chord from `p` to `q` sampled uniformly.
    pub fn chord(p: HalfPlanePoint, q: HalfPlanePoint, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("chord needs n >= 1".into()));
        }
        let samples = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                HalfPlanePoint {
                    x: p.x + t * (q.x - p.x),
                    y: p.y + t * (q.y - p.y),
                }
            })
            .collect();
        Self::with_endpoints(p, q, samples)
    }

    /// Samples a parametric map at `t_i = i/n`. The map must stay in `x > 0`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let samples = (0..=n)
            .map(|i| {
                let (x, y) = f(i as f64 / n as f64);
                HalfPlanePoint { x, y }
            })
            .collect();
        Self::new(samples)
    }

    fn into_validated(self) -> Result<Self> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(self)
        } else {
            let msg = violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidCurve(msg))
        }
    }

    /// Checks every invariant; empty list means the curve is valid. Each entry
    /// names the failing sample and the invariant it breaks.
    pub fn validate(&self) -> Vec<CurveViolation> {
        let mut out = Vec::new();
        let n = self.samples.len();
        if n < 2 {
            out.push(CurveViolation::TooFewSamples { len: n });
            return out;
        }
        if self.samples[0] != self.p {
            out.push(CurveViolation::EndpointMismatch { index: 0 });
        }
        if self.samples[n - 1] != self.q {
            out.push(CurveViolation::EndpointMismatch { index: n - 1 });
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !s.x.is_finite() || !s.y.is_finite() {
                out.push(CurveViolation::NotFinite { index: i });
            } else if s.x <= 0.0 {
                out.push(CurveViolation::NonPositiveRadius { index: i, x: s.x });
            }
        }
        for i in 1..n {
            if self.samples[i] == self.samples[i - 1] {
                out.push(CurveViolation::RepeatedSample { index: i });
            }
        }
        out
    }

    pub fn p(&self) -> HalfPlanePoint {
        self.p
    }

    pub fn q(&self) -> HalfPlanePoint {
        self.q
    }

    /// Number of elements (`samples.len() - 1`).
    pub fn n(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[HalfPlanePoint] {
        &self.samples
    }

    /// Polyline length: sum of chord lengths. Converges to the arclength of a
    /// smooth curve as the sample count grows.
    pub fn length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].dist(&w[1]))
            .sum()
    }

    /// Range `(a, b)` of the radial coordinate over the samples.
    pub fn radial_extent(&self) -> (f64, f64) {
        let mut a = f64::INFINITY;
        let mut b = f64::NEG_INFINITY;
        for s in &self.samples {
            a = a.min(s.x);
            b = b.max(s.x);
        }
        (a, b)
    }

    /// Chord lengths of the polyline, one per element.
    pub fn chord_lengths(&self) -> Vec<f64> {
        self.samples.windows(2).map(|w| w[0].dist(&w[1])).collect()
    }
}

/// Circle admissible for the inversion move: small relative to its distance
/// from the axis (`5 r <= center.x`), so the inversion of the admissible
/// annular region stays in the half-plane.
#[derive(Debug, Clone, Copy)]
pub struct CircleSpec {
    center: HalfPlanePoint,
    radius: f64,
}

impl CircleSpec {
    pub fn new(center: HalfPlanePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("circle radius {radius} must be > 0")));
        }
        if 5.0 * radius > center.x {
            return Err(Error::Domain(format!(
                "circle radius {radius} too large: 5r = {} exceeds center.x = {}",
                5.0 * radius,
                center.x
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> HalfPlanePoint {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Resamples the polyline image at `m + 1` points with all consecutive
/// straight-line distances equal, keeping both endpoints. The common chord
/// length is located by bisection; the marching step intersects the polyline
/// with a circle around the previous output sample.
pub fn resample_constant_speed(curve: &ProfileCurve, m: usize) -> Result<ProfileCurve> {
    curve.clone().into_validated()?;
    if m < 1 {
        return Err(Error::Domain("resample needs m >= 1".into()));
    }
    let total = curve.length();
    if total <= 0.0 {
        return Err(Error::ConstantCurve);
    }
    let pts = curve.samples();
    let end = *pts.last().unwrap();
    let nseg = pts.len() - 1;
    let seg_len: Vec<f64> = pts.windows(2).map(|w| w[0].dist(&w[1])).collect();
    let mut prefix = vec![0.0f64; nseg + 1];
    for i in 0..nseg {
        prefix[i + 1] = prefix[i] + seg_len[i];
    }
    let arc_eps = 1e-13 * total;

    // March m equal chords of length c from the start; returns the landing
    // points and a positive surplus if the polyline runs out early. Roots are
    // accepted by forward arc position, which keeps crossings that land
    // exactly on a vertex from falling between two segments.
    let march = |c: f64| -> (Vec<HalfPlanePoint>, f64) {
        let mut out = Vec::with_capacity(m + 1);
        out.push(pts[0]);
        let mut seg = 0usize;
        let mut cur = pts[0];
        let mut cur_arc = 0.0f64;
        for step in 0..m {
            let mut found = None;
            let mut s = seg;
            while s < nseg {
                let a = pts[s];
                let b = pts[s + 1];
                let dx = b.x - a.x;
                let dy = b.y - a.y;
                let wx = a.x - cur.x;
                let wy = a.y - cur.y;
                let qa = dx * dx + dy * dy;
                let qb = 2.0 * (wx * dx + wy * dy);
                let qc = wx * wx + wy * wy - c * c;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 && qa > 0.0 {
                    let sq = disc.sqrt();
                    // stable quadratic roots, ascending
                    let q = -0.5 * (qb + qb.signum() * sq);
                    let (mut r1, mut r2) = (q / qa, if q != 0.0 { qc / q } else { 0.0 });
                    if r1 > r2 {
                        std::mem::swap(&mut r1, &mut r2);
                    }
                    for r in [r1, r2] {
                        if (-1e-9..=1.0 + 1e-9).contains(&r) {
                            let u = r.clamp(0.0, 1.0);
                            let arc = prefix[s] + u * seg_len[s];
                            if arc > cur_arc + arc_eps {
                                found = Some((s, u, arc));
                                break;
                            }
                        }
                    }
                }
                if found.is_some() {
                    break;
                }
                s += 1;
            }
            match found {
                Some((si, ui, arc)) => {
                    let a = pts[si];
                    let b = pts[si + 1];
                    cur = HalfPlanePoint {
                        x: a.x + ui * (b.x - a.x),
                        y: a.y + ui * (b.y - a.y),
                    };
                    seg = si;
                    cur_arc = arc;
                    out.push(cur);
                }
                None => {
                    // Remaining polyline fits inside the circle: surplus.
                    let short = c - cur.dist(&end);
                    return (out, short.max(f64::MIN_POSITIVE) + (m - 1 - step) as f64 * c);
                }
            }
        }
        (out, 0.0)
    };

    let point_at_arc = |arc: f64| -> HalfPlanePoint {
        let arc = arc.clamp(0.0, total);
        let s = match prefix.binary_search_by(|v| v.partial_cmp(&arc).unwrap()) {
            Ok(i) => i.min(nseg - 1),
            Err(i) => i - 1,
        };
        let u = if seg_len[s] > 0.0 { (arc - prefix[s]) / seg_len[s] } else { 0.0 };
        HalfPlanePoint {
            x: pts[s].x + u * (pts[s + 1].x - pts[s].x),
            y: pts[s].y + u * (pts[s + 1].y - pts[s].y),
        }
    };

    let mut hi = total / m as f64;
    let mut lo = (pts[0].dist(&end) / m as f64).max(1e-15 * total / m as f64);
    if lo >= hi {
        lo = 0.5 * hi;
    }
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        let (samples, surplus) = march(mid);
        if surplus > 0.0 || samples.len() < m + 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (samples, surplus) = march(lo);
    if surplus > 0.0 || samples.len() != m + 1 {
        return Err(Error::Integration(
            "constant-speed resampling failed to bracket the chord length".into(),
        ));
    }
    let miss = samples[m].dist(&end);
    // A macroscopic landing miss means the marching map jumps across the
    // target: the exact equal-chord resample need not exist (the polyline
    // retraces itself). Report it rather than emitting unequal chords.
    if miss > 1e-6 * total {
        return Err(Error::Integration(format!(
            "equal-chord resampling landed {miss:.3e} short of the endpoint; \
             the curve may retrace itself"
        )));
    }

    // Recover the arc positions of the landings, stretch them onto the full
    // length, then relax: each interior node is moved along the polyline until
    // its two chords agree, repeated until the spread is at machine level.
    let mut arcs = Vec::with_capacity(m + 1);
    arcs.push(0.0);
    {
        let mut cursor = 0usize;
        for s in samples.iter().take(m).skip(1) {
            // Landings are marched in order; find the matching arc by a
            // forward scan from the previous landing's segment.
            let mut best_arc = arcs[arcs.len() - 1];
            let mut best_err = f64::INFINITY;
            for seg in cursor..nseg {
                if seg_len[seg] == 0.0 {
                    continue;
                }
                let dx = pts[seg + 1].x - pts[seg].x;
                let dy = pts[seg + 1].y - pts[seg].y;
                let u = ((s.x - pts[seg].x) * dx + (s.y - pts[seg].y) * dy)
                    / (seg_len[seg] * seg_len[seg]);
                if (-1e-9..=1.0 + 1e-9).contains(&u) {
                    let u = u.clamp(0.0, 1.0);
                    let px = pts[seg].x + u * dx;
                    let py = pts[seg].y + u * dy;
                    let err = (px - s.x).hypot(py - s.y);
                    if err < best_err {
                        best_err = err;
                        best_arc = prefix[seg] + u * seg_len[seg];
                        cursor = seg;
                    }
                    if err <= 1e-12 * total {
                        break;
                    }
                }
            }
            arcs.push(best_arc);
        }
    }
    arcs.push(total);
    let stretch = if arcs[m - 1] > 0.0 { total / (arcs[m - 1] + lo) } else { 1.0 };
    for a in arcs.iter_mut().take(m).skip(1) {
        *a *= stretch;
    }

    // Damped Newton on the chord-equalization chain: unknowns are the
    // interior arc positions, equations chord_i = chord_{i+1}. The Jacobian is
    // tridiagonal in the unit tangents, so each iteration is O(m); quadratic
    // convergence mops up whatever landing error the march left behind.
    let tangent_at = |arc: f64| -> (f64, f64) {
        let arc = arc.clamp(0.0, total);
        let s = match prefix.binary_search_by(|v| v.partial_cmp(&arc).unwrap()) {
            Ok(i) => i.min(nseg - 1),
            Err(i) => i - 1,
        };
        let len = seg_len[s];
        ((pts[s + 1].x - pts[s].x) / len, (pts[s + 1].y - pts[s].y) / len)
    };
    let residual = |arcs: &[f64], points: &[HalfPlanePoint]| -> (Vec<f64>, f64) {
        let _ = arcs;
        let chords: Vec<f64> = points.windows(2).map(|w| w[0].dist(&w[1])).collect();
        let f: Vec<f64> = (1..m).map(|i| chords[i - 1] - chords[i]).collect();
        let norm = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        (f, norm)
    };

    let mut points: Vec<HalfPlanePoint> = arcs.iter().map(|&a| point_at_arc(a)).collect();
    let (mut f, mut fnorm) = residual(&arcs, &points);
    let mean_chord = total / m as f64;
    for _ in 0..60 {
        if fnorm <= 1e-14 * mean_chord {
            break;
        }
        // Tridiagonal Jacobian rows for F_i = |chord_i| - |chord_{i+1}|.
        let mut sub = vec![0.0f64; m - 1];
        let mut diag = vec![0.0f64; m - 1];
        let mut sup = vec![0.0f64; m - 1];
        for i in 1..m {
            let u = {
                let dx = points[i].x - points[i - 1].x;
                let dy = points[i].y - points[i - 1].y;
                let l = dx.hypot(dy).max(1e-300);
                (dx / l, dy / l)
            };
            let w = {
                let dx = points[i + 1].x - points[i].x;
                let dy = points[i + 1].y - points[i].y;
                let l = dx.hypot(dy).max(1e-300);
                (dx / l, dy / l)
            };
            let t_prev = tangent_at(arcs[i - 1]);
            let t_here = tangent_at(arcs[i]);
            let t_next = tangent_at(arcs[i + 1]);
            sub[i - 1] = -(u.0 * t_prev.0 + u.1 * t_prev.1);
            diag[i - 1] = (u.0 * t_here.0 + u.1 * t_here.1) + (w.0 * t_here.0 + w.1 * t_here.1);
            sup[i - 1] = -(w.0 * t_next.0 + w.1 * t_next.1);
        }
        // Thomas solve J delta = -F (interior unknowns only).
        let mut delta = vec![0.0f64; m - 1];
        {
            let mut d = diag.clone();
            let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            for i in 1..m - 1 {
                let w = sub[i] / d[i - 1];
                d[i] -= w * sup[i - 1];
                let prev = rhs[i - 1];
                rhs[i] -= w * prev;
            }
            if d.iter().any(|v| v.abs() < 1e-300) {
                break;
            }
            delta[m - 2] = rhs[m - 2] / d[m - 2];
            for i in (0..m - 2).rev() {
                delta[i] = (rhs[i] - sup[i] * delta[i + 1]) / d[i];
            }
        }
        // Backtrack on the residual, keeping the arc ordering intact.
        let mut step = 1.0f64;
        let mut advanced = false;
        for _ in 0..12 {
            let mut trial = arcs.clone();
            let mut ordered = true;
            for i in 1..m {
                trial[i] = (arcs[i] + step * delta[i - 1]).clamp(0.0, total);
                if trial[i] <= trial[i - 1] {
                    ordered = false;
                    break;
                }
            }
            if ordered && trial[m - 1] < total {
                let trial_points: Vec<HalfPlanePoint> =
                    trial.iter().map(|&a| point_at_arc(a)).collect();
                let (tf, tnorm) = residual(&trial, &trial_points);
                if tnorm < fnorm {
                    arcs = trial;
                    points = trial_points;
                    f = tf;
                    fnorm = tnorm;
                    advanced = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    if fnorm > 1e-11 * mean_chord {
        return Err(Error::Integration(format!(
            "equal-chord relaxation stalled with spread {:.3e}; \
             the curve may approach itself below the chord length",
            fnorm / mean_chord
        )));
    }
    points[0] = pts[0];
    points[m] = end;
    ProfileCurve::with_endpoints(curve.p(), curve.q(), points)
}

/// Reparametrizes the curve to constant speed: same polyline image traversed
/// with equal chord lengths, same endpoints and sample count. Never decreases
/// the first eigenvalue.
pub fn arclength_reparametrize(curve: &ProfileCurve) -> Result<ProfileCurve> {
    resample_constant_speed(curve, curve.n())
}

/// Replaces the open arc between samples `i1` and `i2` by its image under
/// inversion through the circle (`r -> r0^2 / r` at fixed polar angle about
/// the center). The bracketing samples must lie on the circle boundary and
/// the arc strictly outside it, within twice the radius of the center.
pub fn invert_in_circle(
    curve: &ProfileCurve,
    circle: &CircleSpec,
    i1: usize,
    i2: usize,
) -> Result<ProfileCurve> {
    curve.clone().into_validated()?;
    let n = curve.n();
    if i1 >= i2 || i2 > n {
        return Err(Error::Domain(format!(
            "invalid arc indices ({i1}, {i2}) for n = {n}"
        )));
    }
    let c = circle.center();
    let r0 = circle.radius();
    let on_tol = 1e-8 * r0;
    let pts = curve.samples();
    for idx in [i1, i2] {
        let r = pts[idx].dist(&c);
        if (r - r0).abs() > on_tol {
            return Err(Error::MovePrecondition {
                index: idx,
                reason: format!("sample is not on the circle boundary: |r - r0| = {:.3e}", (r - r0).abs()),
            });
        }
    }
    let mut samples = pts.to_vec();
    for (idx, s) in samples.iter_mut().enumerate().take(i2).skip(i1 + 1) {
        let r = s.dist(&c);
        // The inversion maps the band (r0/2, 2 r0) onto itself, which keeps
        // the move an involution; the improvement move only ever feeds it
        // arcs on the outside half of the band.
        if r <= 0.5 * r0 * (1.0 - 1e-12) {
            return Err(Error::MovePrecondition {
                index: idx,
                reason: format!("sample too close to center: r = {r:.6e} <= r0/2 = {:.6e}", 0.5 * r0),
            });
        }
        if r >= 2.0 * r0 * (1.0 + 1e-12) {
            return Err(Error::MovePrecondition {
                index: idx,
                reason: format!("sample too far from center: r = {r:.6e} >= 2 r0 = {:.6e}", 2.0 * r0),
            });
        }
        let scale = (r0 * r0) / (r * r);
        *s = HalfPlanePoint {
            x: c.x + scale * (s.x - c.x),
            y: c.y + scale * (s.y - c.y),
        };
    }
    ProfileCurve::with_endpoints(curve.p(), curve.q(), samples)
}

/// Replaces the samples strictly between `i1` and `i2` by a uniform sampling
/// of the straight chord, preserving the total sample count.
pub fn chord_replace(curve: &ProfileCurve, i1: usize, i2: usize) -> Result<ProfileCurve> {
    curve.clone().into_validated()?;
    let n = curve.n();
    if i1 >= i2 || i2 > n {
        return Err(Error::Domain(format!(
            "invalid chord indices ({i1}, {i2}) for n = {n}"
        )));
    }
    let a = curve.samples()[i1];
    let b = curve.samples()[i2];
    if a.dist(&b) == 0.0 {
        return Err(Error::MovePrecondition {
            index: i2,
            reason: "chord endpoints coincide".into(),
        });
    }
    let mut samples = curve.samples().to_vec();
    let span = (i2 - i1) as f64;
    for j in i1 + 1..i2 {
        let t = (j - i1) as f64 / span;
        samples[j] = HalfPlanePoint {
            x: a.x + t * (b.x - a.x),
            y: a.y + t * (b.y - a.y),
        };
    }
    // x > 0 is convex, so the chord cannot exit the half-plane; validation
    // still gates the output.
    ProfileCurve::with_endpoints(curve.p(), curve.q(), samples).map_err(|e| match e {
        Error::InvalidCurve(msg) => Error::InvalidCurve(format!("chord exits the domain: {msg}")),
        other => other,
    })
}

/// On-disk JSON schema for curves:
/// `{ "p": [x,y], "q": [x,y], "n": int, "samples": [[x,y],...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRecord {
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub n: usize,
    pub samples: Vec<[f64; 2]>,
}

impl From<&ProfileCurve> for CurveRecord {
    fn from(curve: &ProfileCurve) -> Self {
        CurveRecord {
            p: [curve.p().x, curve.p().y],
            q: [curve.q().x, curve.q().y],
            n: curve.n(),
            samples: curve.samples().iter().map(|s| [s.x, s.y]).collect(),
        }
    }
}

impl TryFrom<CurveRecord> for ProfileCurve {
    type Error = Error;

    fn try_from(rec: CurveRecord) -> Result<ProfileCurve> {
        if rec.samples.len() != rec.n + 1 {
            return Err(Error::InvalidCurve(format!(
                "record declares n = {} but carries {} samples",
                rec.n,
                rec.samples.len()
            )));
        }
        let samples = rec
            .samples
            .iter()
            .map(|&[x, y]| HalfPlanePoint { x, y })
            .collect();
        ProfileCurve::with_endpoints(
            HalfPlanePoint { x: rec.p[0], y: rec.p[1] },
            HalfPlanePoint { x: rec.q[0], y: rec.q[1] },
            samples,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> HalfPlanePoint {
        HalfPlanePoint { x, y }
    }

    fn vertical_segment(n: usize) -> ProfileCurve {
        ProfileCurve::from_fn(n, |t| (1.0, t)).unwrap()
    }

    #[test]
    fn straight_segment_is_valid() {
        let c = vertical_segment(10);
        assert!(c.validate().is_empty());
    }

    #[test]
    fn zero_radius_sample_is_flagged() {
        let mut samples: Vec<_> = (0..=10).map(|i| pt(1.0, i as f64 / 10.0)).collect();
        samples[4] = pt(0.0, 0.4);
        let curve = ProfileCurve {
            p: samples[0],
            q: samples[10],
            samples,
        };
        let v = curve.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0], CurveViolation::NonPositiveRadius { index: 4, x: 0.0 });
    }

    #[test]
    fn endpoint_mismatch_is_flagged() {
        let samples: Vec<_> = (0..=10).map(|i| pt(1.0, i as f64 / 10.0)).collect();
        let curve = ProfileCurve {
            p: pt(2.0, 0.0),
            q: samples[10],
            samples,
        };
        let v = curve.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0], CurveViolation::EndpointMismatch { index: 0 });
    }

    #[test]
    fn length_of_unit_segment() {
        assert_relative_eq!(vertical_segment(10).length(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn length_of_semicircle() {
        // Radius-1 semicircle centered at (2, 0), sampled densely.
        let c = ProfileCurve::from_fn(10_000, |t| {
            let a = std::f64::consts::PI * t;
            (2.0 - a.cos(), a.sin())
        })
        .unwrap();
        assert_relative_eq!(c.length(), std::f64::consts::PI, epsilon = 1e-6);
    }

    #[test]
    fn length_of_two_sample_curve_is_the_chord() {
        let c = ProfileCurve::new(vec![pt(1.0, 0.0), pt(4.0, 4.0)]).unwrap();
        assert_relative_eq!(c.length(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn radial_extent_cases() {
        assert_eq!(vertical_segment(8).radial_extent(), (1.0, 1.0));
        let flat = ProfileCurve::from_fn(8, |t| (1.0 + t, 0.0)).unwrap();
        assert_eq!(flat.radial_extent(), (1.0, 2.0));
        let semi = ProfileCurve::from_fn(256, |t| {
            let a = std::f64::consts::PI * t;
            (2.0 - 0.5 * a.cos(), 0.5 * a.sin())
        })
        .unwrap();
        let (a, b) = semi.radial_extent();
        assert_relative_eq!(a, 1.5, epsilon = 1e-12);
        assert_relative_eq!(b, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn reparametrize_is_identity_on_constant_speed_segment() {
        let c = vertical_segment(16);
        let r = arclength_reparametrize(&c).unwrap();
        for (a, b) in c.samples().iter().zip(r.samples()) {
            assert!(a.dist(b) < 1e-12);
        }
    }

    #[test]
    fn reparametrize_unwarps_clustered_segment() {
        // Quadratic clustering of parameters on a straight vertical segment.
        let n = 20;
        let c = ProfileCurve::from_fn(n, |t| (1.0, t * t)).unwrap();
        let r = arclength_reparametrize(&c).unwrap();
        for (i, s) in r.samples().iter().enumerate() {
            assert_relative_eq!(s.x, 1.0, epsilon = 1e-12);
            assert_relative_eq!(s.y, i as f64 / n as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn reparametrize_equalizes_chords() {
        let c = ProfileCurve::from_fn(64, |t| {
            (1.0 + 0.3 * (2.0 * std::f64::consts::PI * t).sin(), t + 0.1 * (3.0 * t).sin())
        })
        .unwrap();
        let r = arclength_reparametrize(&c).unwrap();
        let chords = r.chord_lengths();
        let mean = chords.iter().sum::<f64>() / chords.len() as f64;
        for c in chords {
            assert!((c - mean).abs() <= 1e-10 * mean, "chord {c} vs mean {mean}");
        }
    }

    #[test]
    fn reparametrize_rejects_degenerate_input() {
        let curve = ProfileCurve {
            p: pt(1.0, 0.0),
            q: pt(1.0, 0.0),
            samples: vec![pt(1.0, 0.0), pt(1.0, 0.0)],
        };
        match arclength_reparametrize(&curve) {
            Err(Error::InvalidCurve(_)) | Err(Error::ConstantCurve) => {}
            other => panic!("expected degenerate-curve error, got {other:?}"),
        }
    }

    #[test]
    fn inversion_fixes_points_on_the_boundary() {
        // Arc running along the circle boundary itself.
        let circle = CircleSpec::new(pt(1.0, 0.5), 0.1).unwrap();
        let c = ProfileCurve::from_fn(16, |t| {
            let a = -0.5 * std::f64::consts::PI + std::f64::consts::PI * t;
            (1.0 + 0.1 * a.cos(), 0.5 + 0.1 * a.sin())
        })
        .unwrap();
        let inv = invert_in_circle(&c, &circle, 0, 16).unwrap();
        for (a, b) in c.samples().iter().zip(inv.samples()) {
            assert!(a.dist(b) < 1e-9);
        }
    }

    #[test]
    fn inversion_halves_distance_at_twice_the_radius() {
        // Sample at distance 2 r0 (edge of the admissible band) maps to r0 / 2.
        let r0 = 0.1;
        let center = pt(1.0, 0.5);
        let circle = CircleSpec::new(center, r0).unwrap();
        let d = 2.0 * r0 * (1.0 - 1e-12);
        let samples = vec![
            pt(1.0, 0.4),             // on boundary (angle -90 deg)
            pt(1.0 + d, 0.5),         // distance 2 r0 from center
            pt(1.0, 0.6),             // on boundary (angle +90 deg)
        ];
        let curve = ProfileCurve::new(samples).unwrap();
        let inv = invert_in_circle(&curve, &circle, 0, 2).unwrap();
        let mapped = inv.samples()[1];
        assert_relative_eq!(mapped.dist(&center), r0 / 2.0, epsilon = 1e-10);
        // Polar angle about the center is preserved.
        assert_relative_eq!(mapped.y, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn inversion_rejects_offending_samples() {
        let circle = CircleSpec::new(pt(1.0, 0.5), 0.1).unwrap();
        let samples = vec![pt(1.0, 0.4), pt(1.03, 0.5), pt(1.0, 0.6)];
        let curve = ProfileCurve::new(samples).unwrap();
        // Middle sample at distance 0.03 < r0/2 from the center.
        match invert_in_circle(&curve, &circle, 0, 2) {
            Err(Error::MovePrecondition { index: 1, .. }) => {}
            other => panic!("expected precondition failure at sample 1, got {other:?}"),
        }
    }

    #[test]
    fn chord_of_a_chord_is_identity() {
        let c = ProfileCurve::chord(pt(1.0, 0.0), pt(2.0, 1.0), 12).unwrap();
        let r = chord_replace(&c, 0, 12).unwrap();
        for (a, b) in c.samples().iter().zip(r.samples()) {
            assert!(a.dist(b) < 1e-15);
        }
    }

    #[test]
    fn chord_replace_straightens_detour() {
        let curve = ProfileCurve::new(vec![pt(1.0, 0.0), pt(2.0, 0.5), pt(1.0, 1.0)]).unwrap();
        let r = chord_replace(&curve, 0, 2).unwrap();
        assert_relative_eq!(r.samples()[1].x, 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.samples()[1].y, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn curve_record_round_trip() {
        let c = ProfileCurve::from_fn(8, |t| (1.0 + t, t * t)).unwrap();
        let rec = CurveRecord::from(&c);
        let back = ProfileCurve::try_from(rec).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn curve_record_rejects_inconsistent_n() {
        let c = ProfileCurve::from_fn(8, |t| (1.0 + t, t)).unwrap();
        let mut rec = CurveRecord::from(&c);
        rec.n = 7;
        assert!(ProfileCurve::try_from(rec).is_err());
    }

    /// Random wiggly-but-valid curves for property tests. Both wiggles are
    /// bounded by a fraction of the monotone axial slope, so the curve stays
    /// graph-like: its reach is well above the resampling chord length, which
    /// keeps exact equal-chord resampling well posed.
    fn curve_strategy() -> impl Strategy<Value = ProfileCurve> {
        (
            0.8f64..2.0,     // base radius
            -0.3f64..0.3,    // radial drift
            0.4f64..1.0,     // height
            -0.7f64..0.7,    // radial wiggle, fraction of slope
            -0.7f64..0.7,    // axial wiggle, fraction of slope
            1u32..4,         // mode
            48usize..128,    // samples
        )
            .prop_map(|(x0, dx, h, ax_frac, ay_frac, k, n)| {
                let scale = h / (k as f64 * std::f64::consts::PI);
                let (ax, ay) = (ax_frac * scale, ay_frac * scale);
                ProfileCurve::from_fn(n, |t| {
                    let w = (k as f64 * std::f64::consts::PI * t).sin();
                    (x0 + dx * t + ax * w, h * t + ay * w)
                })
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn prop_reparametrize_is_idempotent(c in curve_strategy()) {
            let once = arclength_reparametrize(&c).unwrap();
            let twice = arclength_reparametrize(&once).unwrap();
            let scale = c.length();
            for (a, b) in once.samples().iter().zip(twice.samples()) {
                prop_assert!(a.dist(b) <= 1e-10 * scale.max(1.0));
            }
        }

        #[test]
        fn prop_reparametrize_output_is_valid_and_preserves_length_roughly(c in curve_strategy()) {
            let r = arclength_reparametrize(&c).unwrap();
            prop_assert!(r.validate().is_empty());
            prop_assert_eq!(r.n(), c.n());
            // Corner cutting can only shorten the polyline, and only slightly.
            prop_assert!(r.length() <= c.length() * (1.0 + 1e-12));
            prop_assert!(r.length() >= c.length() * 0.9);
        }

        #[test]
        fn prop_radial_extent_bounds_every_sample(c in curve_strategy()) {
            let (a, b) = c.radial_extent();
            prop_assert!(a > 0.0);
            for s in c.samples() {
                prop_assert!(s.x >= a && s.x <= b);
            }
        }

        #[test]
        fn prop_chord_replace_output_is_valid(c in curve_strategy(), raw_i in 0usize..100, raw_j in 0usize..100) {
            let n = c.n();
            let i = raw_i % n;
            let j = i + 1 + raw_j % (n - i);
            if c.samples()[i].dist(&c.samples()[j]) > 0.0 {
                let r = chord_replace(&c, i, j).unwrap();
                prop_assert!(r.validate().is_empty());
            }
        }

        #[test]
        fn prop_inversion_is_an_involution(amp in 0.005f64..0.09, sweep in 0.6f64..1.0) {
            // Outward bulge living in the admissible band (r0, 2 r0).
            let r0 = 0.1;
            let center = pt(1.0, 0.5);
            let circle = CircleSpec::new(center, r0).unwrap();
            let n = 40;
            let curve = ProfileCurve::from_fn(n, |t| {
                let a = sweep * std::f64::consts::PI * (t - 0.5);
                let r = r0 + amp * (std::f64::consts::PI * t).sin();
                (center.x + r * a.cos(), center.y + r * a.sin())
            }).unwrap();
            let once = invert_in_circle(&curve, &circle, 0, n).unwrap();
            prop_assert!(once.validate().is_empty());
            let twice = invert_in_circle(&once, &circle, 0, n).unwrap();
            for (a, b) in curve.samples().iter().zip(twice.samples()) {
                prop_assert!(a.dist(b) <= 1e-10);
            }
        }
    }
}
