//! Embedded Dormand-Prince 5(4) integrator with cubic dense output and
//! zero-crossing event location for one state component.
//!
//! The event machinery brackets the crossing on an accepted step, roots the
//! cubic Hermite interpolant, then re-steps to the candidate time and polishes
//! it with Newton updates on the actual state until the component is below the
//! event tolerance. This keeps the located endpoint as accurate as the
//! integration itself, which is what the shooting Jacobians need.

use crate::error::Error;

pub(crate) struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_initial: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Absolute tolerance on the event component at the located crossing.
    pub event_tol: f64,
}

pub(crate) struct OdeSolution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
    /// Crossing time; the final grid entry when present.
    pub event_time: Option<f64>,
}

struct StepOutcome<const N: usize> {
    y1: [f64; N],
    f1: [f64; N],
    err_norm: f64,
}

/// One Dormand-Prince step of size `h` from `(t, y)` with `f0 = f(t, y)`.
fn dp_step<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
    atol: f64,
    rtol: f64,
) -> StepOutcome<N> {
    let mut k = [[0.0f64; N]; 7];
    k[0] = *f0;

    let stage = |coeffs: &[(usize, f64)], k: &[[f64; N]; 7]| {
        let mut out = *y;
        for &(j, a) in coeffs {
            for i in 0..N {
                out[i] += h * a * k[j][i];
            }
        }
        out
    };

    let y2 = stage(&[(0, 1.0 / 5.0)], &k);
    k[1] = f(t + h / 5.0, &y2);
    let y3 = stage(&[(0, 3.0 / 40.0), (1, 9.0 / 40.0)], &k);
    k[2] = f(t + 3.0 * h / 10.0, &y3);
    let y4 = stage(&[(0, 44.0 / 45.0), (1, -56.0 / 15.0), (2, 32.0 / 9.0)], &k);
    k[3] = f(t + 4.0 * h / 5.0, &y4);
    let y5 = stage(
        &[
            (0, 19372.0 / 6561.0),
            (1, -25360.0 / 2187.0),
            (2, 64448.0 / 6561.0),
            (3, -212.0 / 729.0),
        ],
        &k,
    );
    k[4] = f(t + 8.0 * h / 9.0, &y5);
    let y6 = stage(
        &[
            (0, 9017.0 / 3168.0),
            (1, -355.0 / 33.0),
            (2, 46732.0 / 5247.0),
            (3, 49.0 / 176.0),
            (4, -5103.0 / 18656.0),
        ],
        &k,
    );
    k[5] = f(t + h, &y6);
    let y1 = stage(
        &[
            (0, 35.0 / 384.0),
            (2, 500.0 / 1113.0),
            (3, 125.0 / 192.0),
            (4, -2187.0 / 6784.0),
            (5, 11.0 / 84.0),
        ],
        &k,
    );
    k[6] = f(t + h, &y1);

    // Difference between the 5th and embedded 4th order solutions.
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let mut err_norm = 0.0f64;
    for i in 0..N {
        let mut e = 0.0;
        for (j, kj) in k.iter().enumerate() {
            e += E[j] * kj[i];
        }
        e *= h;
        let scale = atol + rtol * y[i].abs().max(y1[i].abs());
        err_norm += (e / scale) * (e / scale);
    }
    err_norm = (err_norm / N as f64).sqrt();

    StepOutcome { y1, f1: k[6], err_norm }
}

/// Cubic Hermite interpolation of one component over an accepted step.
fn hermite(theta: f64, h: f64, y0: f64, f0: f64, y1: f64, f1: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + theta) * h * f0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * f1
}

/// Integrates until component `event_idx` crosses back to zero after having
/// been positive. `guard` is evaluated at every accepted grid point and may
/// abort the run (half-plane exit, phase degeneracy, horizon cap).
pub(crate) fn integrate_to_zero<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    event_idx: usize,
    opts: &OdeOptions,
    guard: &mut dyn FnMut(f64, &[f64; N]) -> Result<(), Error>,
) -> Result<OdeSolution<N>, Error> {
    let mut t = 0.0f64;
    let mut y = y0;
    let mut fy = f(t, &y);
    let mut h = opts.h_initial.min(opts.h_max);

    let mut sol = OdeSolution {
        t: vec![0.0],
        y: vec![y0],
        dy: vec![fy],
        event_time: None,
    };
    guard(0.0, &y0)?;

    let mut armed = y0[event_idx] > 0.0;
    let mut steps = 0usize;
    let mut rejects_in_a_row = 0usize;

    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Integration(format!(
                "exceeded {} steps at t = {t:.6e}",
                opts.max_steps
            )));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration(format!("step size underflow at t = {t:.6e}")));
        }

        let out = dp_step(f, t, &y, &fy, h, opts.atol, opts.rtol);
        if !out.err_norm.is_finite() {
            h *= 0.25;
            rejects_in_a_row += 1;
            if rejects_in_a_row > 60 {
                return Err(Error::Integration(format!("repeated step failures at t = {t:.6e}")));
            }
            continue;
        }
        if out.err_norm > 1.0 {
            h *= (0.9 * out.err_norm.powf(-0.2)).clamp(0.2, 1.0);
            rejects_in_a_row += 1;
            if rejects_in_a_row > 60 {
                return Err(Error::Integration(format!("repeated step rejections at t = {t:.6e}")));
            }
            continue;
        }

        let v1 = out.y1[event_idx];
        if !armed && v1 <= 0.0 {
            // Stepped over the entire positive hump; resolve it.
            h *= 0.5;
            rejects_in_a_row += 1;
            if rejects_in_a_row > 60 {
                return Err(Error::Integration(
                    "could not resolve the initial positive phase of the event component".into(),
                ));
            }
            continue;
        }
        rejects_in_a_row = 0;

        if armed && v1 <= 0.0 {
            // Bracketed: root the cubic interpolant, then polish on the state.
            let v0 = y[event_idx];
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let vm = hermite(mid, h, v0, fy[event_idx], v1, out.f1[event_idx]);
                if vm > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut h_star = 0.5 * (lo + hi) * h;
            let mut y_star;
            let mut f_star;
            let mut polished = false;
            for _ in 0..12 {
                let fine = dp_step(f, t, &y, &fy, h_star, opts.atol, opts.rtol);
                y_star = fine.y1;
                f_star = fine.f1;
                let v = y_star[event_idx];
                if v.abs() <= opts.event_tol {
                    let t_star = t + h_star;
                    guard(t_star, &y_star)?;
                    sol.t.push(t_star);
                    sol.y.push(y_star);
                    sol.dy.push(f_star);
                    sol.event_time = Some(t_star);
                    polished = true;
                    break;
                }
                let slope = f_star[event_idx];
                if slope == 0.0 {
                    break;
                }
                h_star -= v / slope;
                if !(h_star > 0.0 && h_star <= 2.0 * h) {
                    break;
                }
            }
            if !polished {
                return Err(Error::Integration(format!(
                    "event polish failed near t = {:.6e}",
                    t + h_star
                )));
            }
            return Ok(sol);
        }

        t += h;
        y = out.y1;
        fy = out.f1;
        guard(t, &y)?;
        sol.t.push(t);
        sol.y.push(y);
        sol.dy.push(fy);
        if v1 > 0.0 {
            armed = true;
        }

        h = (h * (0.9 * out.err_norm.max(1e-10).powf(-0.2)).clamp(0.2, 5.0)).min(opts.h_max);
    }
}

/// Integrates from `t = 0`, clipping steps so every target time is hit
/// exactly, and records the state at each target. Used for resampling
/// trajectories without interpolation error.
pub(crate) fn integrate_path<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    targets: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>, Error> {
    let mut t = 0.0f64;
    let mut y = y0;
    let mut fy = f(t, &y);
    let mut h = opts.h_initial.min(opts.h_max);
    let mut out = Vec::with_capacity(targets.len());
    let mut steps = 0usize;

    for &target in targets {
        while t < target - 1e-15 * target.abs().max(1.0) {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration(format!(
                    "exceeded {} steps at t = {t:.6e}",
                    opts.max_steps
                )));
            }
            let step = h.min(target - t);
            let trial = dp_step(f, t, &y, &fy, step, opts.atol, opts.rtol);
            if !trial.err_norm.is_finite() || trial.err_norm > 1.0 {
                h = step * (0.9 * trial.err_norm.max(1.0).powf(-0.2)).clamp(0.1, 1.0);
                if h < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::Integration(format!(
                        "step size underflow at t = {t:.6e}"
                    )));
                }
                continue;
            }
            t += step;
            y = trial.y1;
            fy = trial.f1;
            h = (step * (0.9 * trial.err_norm.max(1e-10).powf(-0.2)).clamp(0.2, 5.0))
                .min(opts.h_max);
        }
        out.push(y);
    }
    Ok(out)
}
