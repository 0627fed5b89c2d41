//! First Dirichlet eigenvalue of the surface of revolution generated by a
//! profile curve, through its weighted one-dimensional reduction.
//!
//! The quotient minimized over functions vanishing at the endpoints is
//!
//! ```text
//!   integral |w'|^2 F / |g'| dt   /   integral |w|^2 F |g'| dt
//! ```
//!
//! with the weights taken piecewise constant per element (values at chord
//! midpoints, |g'| = n * chord length). P1 elements keep both forms
//! tridiagonal; the smallest two generalized eigenvalues come from
//! Sturm-sequence bisection on the LDL^T inertia of `K - lambda M`, and the
//! ground eigenvector from shifted inverse iteration.

use crate::error::Error;
use crate::geometry::ProfileCurve;
use crate::Result;

/// Pivot floor for inertia counts and tridiagonal solves.
const PIVOT_MIN: f64 = 1e-290;
/// Relative bisection width for eigenvalues; effectively a few ulps, which
/// the shape gradient needs to resolve near-stationary configurations.
const EIG_RTOL: f64 = 1e-15;

/// Symmetric tridiagonal stiffness/mass pair over the interior nodes.
#[derive(Debug, Clone)]
pub struct TridiagonalPencil {
    /// Diagonal of K (length n-1).
    pub k_diag: Vec<f64>,
    /// Off-diagonal of K (length n-2).
    pub k_off: Vec<f64>,
    /// Diagonal of M (length n-1).
    pub m_diag: Vec<f64>,
    /// Off-diagonal of M (length n-2).
    pub m_off: Vec<f64>,
}

impl TridiagonalPencil {
    pub fn dim(&self) -> usize {
        self.k_diag.len()
    }

    /// Number of generalized eigenvalues strictly below `shift`: negative
    /// pivots of the LDL^T factorization of `K - shift M`.
    fn inertia_below(&self, shift: f64) -> usize {
        let n = self.dim();
        let mut count = 0usize;
        let mut d_prev = 0.0f64;
        for i in 0..n {
            let mut d = self.k_diag[i] - shift * self.m_diag[i];
            if i > 0 {
                let e = self.k_off[i - 1] - shift * self.m_off[i - 1];
                d -= e * e / d_prev;
            }
            if d.abs() < PIVOT_MIN {
                d = -PIVOT_MIN;
            }
            if d < 0.0 {
                count += 1;
            }
            d_prev = d;
        }
        count
    }

    /// Solves `(K - shift M) x = b` by unpivoted LDL^T with a pivot floor;
    /// adequate for inverse iteration where blowup along the eigenvector is
    /// the desired outcome.
    fn solve_shifted(&self, shift: f64, b: &[f64], x: &mut [f64]) {
        let n = self.dim();
        let mut d = vec![0.0f64; n];
        let mut l = vec![0.0f64; n.saturating_sub(1)];
        for i in 0..n {
            let mut di = self.k_diag[i] - shift * self.m_diag[i];
            if i > 0 {
                let e = self.k_off[i - 1] - shift * self.m_off[i - 1];
                l[i - 1] = e / d[i - 1];
                di -= l[i - 1] * e;
            }
            if di.abs() < PIVOT_MIN {
                di = PIVOT_MIN;
            }
            d[i] = di;
        }
        // Forward substitution (unit lower bidiagonal), diagonal scale, back.
        x[0] = b[0];
        for i in 1..n {
            x[i] = b[i] - l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= l[i] * x[i + 1];
        }
    }

    fn mass_apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut v = self.m_diag[i] * x[i];
            if i > 0 {
                v += self.m_off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.m_off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    fn stiffness_apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut v = self.k_diag[i] * x[i];
            if i > 0 {
                v += self.k_off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.k_off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }
}

/// Per-element weights of the quotient: `cond = F/|g'|` drives the stiffness
/// form and `mass = F |g'|` the mass form.
struct ElementWeights {
    /// Element count n; parameter step is 1/n.
    n: usize,
    cond: Vec<f64>,
    mass: Vec<f64>,
}

fn element_weights(curve: &ProfileCurve) -> Result<ElementWeights> {
    let violations = curve.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidCurve(
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ));
    }
    let n = curve.n();
    if n < 2 {
        return Err(Error::Domain("spectral assembly needs n >= 2".into()));
    }
    let pts = curve.samples();
    let mut cond = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for e in 0..n {
        let chord = pts[e].dist(&pts[e + 1]);
        if chord <= 0.0 {
            return Err(Error::Domain(format!("zero-length chord at element {e}")));
        }
        let f_mid = 0.5 * (pts[e].x + pts[e + 1].x);
        let speed = n as f64 * chord;
        cond.push(f_mid / speed);
        mass.push(f_mid * speed);
    }
    Ok(ElementWeights { n, cond, mass })
}

/// Assembles the P1 stiffness/mass pencil of the weighted quotient over the
/// interior nodes (Dirichlet conditions at both ends).
pub fn assemble(curve: &ProfileCurve) -> Result<TridiagonalPencil> {
    let w = element_weights(curve)?;
    let n = w.n;
    let h = 1.0 / n as f64;
    let mut k_diag = vec![0.0f64; n - 1];
    let mut k_off = vec![0.0f64; n.saturating_sub(2)];
    let mut m_diag = vec![0.0f64; n - 1];
    let mut m_off = vec![0.0f64; n.saturating_sub(2)];
    for e in 0..n {
        let k_loc = w.cond[e] / h;
        let m_loc = w.mass[e] * h / 6.0;
        // Element e couples nodes e and e+1; interior node j maps to index j-1.
        if e > 0 {
            k_diag[e - 1] += k_loc;
            m_diag[e - 1] += 2.0 * m_loc;
        }
        if e + 1 < n {
            k_diag[e] += k_loc;
            m_diag[e] += 2.0 * m_loc;
        }
        if e > 0 && e + 1 < n {
            k_off[e - 1] += -k_loc;
            m_off[e - 1] += m_loc;
        }
    }
    Ok(TridiagonalPencil { k_diag, k_off, m_diag, m_off })
}

/// Smallest two eigenvalues with the mass-normalized ground eigenfunction.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub lambda2: f64,
    /// First eigenfunction sampled on the full parameter grid (n + 1 values,
    /// zero at both ends, positive inside).
    pub phi: Vec<f64>,
    /// Weighted L2 norm of phi after normalization (should be 1).
    pub normalization: f64,
    pub mesh_size: usize,
}

fn bisect_kth_eigenvalue(pencil: &TridiagonalPencil, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    // Invariant: inertia(lo) < k <= inertia(hi).
    for _ in 0..400 {
        if hi - lo <= EIG_RTOL * hi.max(PIVOT_MIN) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval is down to adjacent floats
        }
        if pencil.inertia_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Computes the two smallest generalized eigenvalues of `(K, M)` and the
/// ground eigenvector, sign-normalized positive and mass-normalized.
pub fn lambda1(curve: &ProfileCurve) -> Result<SpectralResult> {
    let pencil = assemble(curve)?;
    let n = curve.n();
    let dim = pencil.dim();

    // Upper bound from the Rayleigh quotient of a half-sine test vector,
    // expanded until at least two eigenvalues are below it.
    let test: Vec<f64> = (1..n)
        .map(|i| (std::f64::consts::PI * i as f64 / n as f64).sin())
        .collect();
    let mut hi = {
        let mut kx = vec![0.0; dim];
        let mut mx = vec![0.0; dim];
        pencil.stiffness_apply(&test, &mut kx);
        pencil.mass_apply(&test, &mut mx);
        let num: f64 = test.iter().zip(&kx).map(|(a, b)| a * b).sum();
        let den: f64 = test.iter().zip(&mx).map(|(a, b)| a * b).sum();
        (num / den) * 1.0001
    };
    let want = if dim >= 2 { 2 } else { 1 };
    for _ in 0..200 {
        if pencil.inertia_below(hi) >= want {
            break;
        }
        hi *= 2.0;
    }

    let l1 = bisect_kth_eigenvalue(&pencil, 1, 0.0, hi);
    let l2 = if dim >= 2 {
        bisect_kth_eigenvalue(&pencil, 2, l1, hi)
    } else {
        f64::INFINITY
    };

    // Inverse iteration at the bisected shift; the near-singular factorization
    // amplifies exactly the component we want.
    let mut x: Vec<f64> = test.clone();
    let norm0 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm0);
    let mut b = vec![0.0; dim];
    for _ in 0..4 {
        pencil.mass_apply(&x, &mut b);
        let mut y = vec![0.0; dim];
        pencil.solve_shifted(l1, &b, &mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
    }

    // Fix the sign, then normalize in the mass inner product.
    let total: f64 = x.iter().sum();
    if total < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let mut mx = vec![0.0; dim];
    pencil.mass_apply(&x, &mut mx);
    let m_norm: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
    let scale = m_norm.sqrt();
    x.iter_mut().for_each(|v| *v /= scale);

    let mut phi = Vec::with_capacity(n + 1);
    phi.push(0.0);
    phi.extend_from_slice(&x);
    phi.push(0.0);

    // Recompute the normalization as stored metadata.
    let mut mx = vec![0.0; dim];
    pencil.mass_apply(&x, &mut mx);
    let normalization: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();

    Ok(SpectralResult {
        lambda1: l1,
        lambda2: l2,
        phi,
        normalization,
        mesh_size: n,
    })
}

/// Smallest eigenvalue only, skipping the eigenvector and `lambda2`.
pub fn lambda1_value(curve: &ProfileCurve) -> Result<f64> {
    let pencil = assemble(curve)?;
    let n = curve.n();
    let dim = pencil.dim();
    let test: Vec<f64> = (1..n)
        .map(|i| (std::f64::consts::PI * i as f64 / n as f64).sin())
        .collect();
    let mut hi = {
        let mut kx = vec![0.0; dim];
        let mut mx = vec![0.0; dim];
        pencil.stiffness_apply(&test, &mut kx);
        pencil.mass_apply(&test, &mut mx);
        let num: f64 = test.iter().zip(&kx).map(|(a, b)| a * b).sum();
        let den: f64 = test.iter().zip(&mx).map(|(a, b)| a * b).sum();
        (num / den) * 1.0001
    };
    for _ in 0..200 {
        if pencil.inertia_below(hi) >= 1 {
            break;
        }
        hi *= 2.0;
    }
    Ok(bisect_kth_eigenvalue(&pencil, 1, 0.0, hi))
}

/// Smallest eigenvalue with a bracket hint from a nearby curve; falls back to
/// the cold path if the hint does not bracket. This is what the
/// finite-difference shape gradient hammers on.
pub fn lambda1_value_hinted(curve: &ProfileCurve, hint: f64) -> Result<f64> {
    let pencil = assemble(curve)?;
    let mut lo = hint * (1.0 - 3e-4);
    let mut hi = hint * (1.0 + 3e-4);
    for _ in 0..20 {
        if pencil.inertia_below(lo) == 0 {
            break;
        }
        lo *= 1.0 - 3e-3;
    }
    for _ in 0..20 {
        if pencil.inertia_below(hi) >= 1 {
            break;
        }
        hi *= 1.0 + 3e-3;
    }
    if pencil.inertia_below(lo) != 0 || pencil.inertia_below(hi) < 1 {
        return lambda1_value(curve);
    }
    Ok(bisect_kth_eigenvalue(&pencil, 1, lo, hi))
}

/// Discrete Rayleigh quotient of a sampled test function vanishing at the
/// endpoints, with the same element weights as [`assemble`]. Always at least
/// `lambda1` up to solver tolerance.
pub fn rayleigh_quotient(curve: &ProfileCurve, w: &[f64]) -> Result<f64> {
    let ew = element_weights(curve)?;
    let n = ew.n;
    if w.len() != n + 1 {
        return Err(Error::BadTestFunction(format!(
            "test function has {} samples, expected {}",
            w.len(),
            n + 1
        )));
    }
    if w[0] != 0.0 || w[n] != 0.0 {
        return Err(Error::BadTestFunction(
            "test function must vanish at both endpoints".into(),
        ));
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::BadTestFunction("test function is identically zero".into()));
    }
    let h = 1.0 / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for e in 0..n {
        let dw = (w[e + 1] - w[e]) / h;
        num += ew.cond[e] * dw * dw * h;
        // Exact P1 integral of w^2 over the element.
        let quad = (w[e] * w[e] + w[e] * w[e + 1] + w[e + 1] * w[e + 1]) / 3.0;
        den += ew.mass[e] * quad * h;
    }
    if den <= 0.0 {
        return Err(Error::BadTestFunction("test function has zero weighted norm".into()));
    }
    Ok(num / den)
}

/// Relative spread of the chord lengths; the Euler-Lagrange equations assume
/// constant speed, enforced up to this spread.
const SPEED_SPREAD_LIMIT: f64 = 0.01;

/// Weak residuals of the stationarity system satisfied by eigenvalue-maximizing
/// constant-speed curves, tested against the interior P1 hat functions:
///
/// ```text
///   res_F[i] = ((|phi'|^2 + Lam L^2 phi^2) F F', psi_i')
///              + ((Lam L^4 phi^2 - L^2 |phi'|^2), psi_i)
///   res_G[i] = ((|phi'|^2 + Lam L^2 phi^2) F G', psi_i')
/// ```
///
/// Both vanish (up to discretization) precisely when the curve is critical.
pub fn euler_lagrange_residual(
    curve: &ProfileCurve,
    spec: &SpectralResult,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = curve.n();
    if spec.phi.len() != n + 1 {
        return Err(Error::Domain(format!(
            "spectral result carries {} samples, curve has {}",
            spec.phi.len(),
            n + 1
        )));
    }
    let chords = curve.chord_lengths();
    let (min_c, max_c) = chords
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let spread = (max_c - min_c) / max_c;
    if spread > SPEED_SPREAD_LIMIT {
        return Err(Error::NotConstantSpeed {
            spread,
            limit: SPEED_SPREAD_LIMIT,
        });
    }

    let h = 1.0 / n as f64;
    let len = curve.length();
    let lam = spec.lambda1;
    let pts = curve.samples();
    let phi = &spec.phi;

    // Per-element quantities at midpoints.
    let mut flux_f = Vec::with_capacity(n); // (|phi'|^2 + Lam L^2 phi^2) F F'
    let mut flux_g = Vec::with_capacity(n); // (|phi'|^2 + Lam L^2 phi^2) F G'
    let mut source = Vec::with_capacity(n); // Lam L^4 phi^2 - L^2 |phi'|^2
    for e in 0..n {
        let dphi = (phi[e + 1] - phi[e]) / h;
        let phim = 0.5 * (phi[e] + phi[e + 1]);
        let fm = 0.5 * (pts[e].x + pts[e + 1].x);
        let df = (pts[e + 1].x - pts[e].x) / h;
        let dg = (pts[e + 1].y - pts[e].y) / h;
        let weight = dphi * dphi + lam * len * len * phim * phim;
        flux_f.push(weight * fm * df);
        flux_g.push(weight * fm * dg);
        source.push(lam * len.powi(4) * phim * phim - len * len * dphi * dphi);
    }

    let mut res_f = Vec::with_capacity(n - 1);
    let mut res_g = Vec::with_capacity(n - 1);
    for i in 1..n {
        // Hat psi_i: slope +1/h on element i-1, -1/h on element i, integral h.
        res_f.push((flux_f[i - 1] - flux_f[i]) + 0.5 * h * (source[i - 1] + source[i]));
        res_g.push(flux_g[i - 1] - flux_g[i]);
    }
    Ok((res_f, res_g))
}

/// Max-norm of the Euler-Lagrange residual pair.
pub fn residual_max(res: &(Vec<f64>, Vec<f64>)) -> f64 {
    res.0
        .iter()
        .chain(res.1.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
}
