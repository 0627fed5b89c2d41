//! Shooting inversion of the endpoint map: given boundary points `p` and `q`,
//! find the angle/eigenvalue pair whose critical trajectory from `p` lands on
//! `q`. Near the puncture the map is a perturbation of `pi * identity`, so
//! `(q - p)/pi` seeds a damped Newton iteration with finite-difference
//! Jacobians; a scan over initial angles provides numerical evidence for
//! uniqueness of the solution class.

use rayon::prelude::*;

use crate::critical_ode::{integrate_critical, CriticalTrajectory};
use crate::error::Error;
use crate::geometry::HalfPlanePoint;
use crate::reference_spectra::disc_lambda1;
use crate::Result;

/// Integration tolerance for endpoint evaluations inside the solver.
const SHOOT_TOL: f64 = 1e-13;
/// Relative endpoint accuracy of a successful solve, measured against |q - p|.
pub const SOLVE_RTOL: f64 = 1e-10;
/// Matching tolerance for deduplicating solution classes: radians on the
/// angle (mod 2 pi) and relative on the eigenvalue.
pub const CLASS_TOL: f64 = 1e-6;

/// A solved shooting configuration: parameters, landing point, and the full
/// trajectory realizing them.
#[derive(Debug, Clone)]
pub struct EndpointRecord {
    pub theta0: f64,
    pub lambda: f64,
    pub endpoint: HalfPlanePoint,
    pub trajectory: CriticalTrajectory,
}

/// Physical-route endpoint evaluation for a shooting parameter `z`.
fn endpoint_at(z: [f64; 2], p: HalfPlanePoint) -> Result<(HalfPlanePoint, f64, f64)> {
    let r2 = z[0] * z[0] + z[1] * z[1];
    if r2 == 0.0 {
        return Err(Error::Domain("shooting parameter hit the puncture".into()));
    }
    let lambda = 1.0 / r2;
    let theta0 = z[1].atan2(z[0]);
    let traj = integrate_critical(theta0, lambda, p, SHOOT_TOL)?;
    Ok((traj.endpoint(), theta0, lambda))
}

struct NewtonOutcome {
    z: [f64; 2],
    history: Vec<f64>,
    iterations: usize,
}

/// Damped Newton iteration on the endpoint residual `Phi(z) - q`, with step
/// halving (up to 20 times) whenever the residual fails to decrease or the
/// iterate leaves the parameter disc.
fn newton_invert(
    p: HalfPlanePoint,
    q: HalfPlanePoint,
    z0: [f64; 2],
    domain_radius: f64,
    fd_step: f64,
    target: f64,
) -> Result<NewtonOutcome> {
    let eval = |z: [f64; 2]| -> Result<[f64; 2]> {
        let (e, _, _) = endpoint_at(z, p)?;
        Ok([e.x - q.x, e.y - q.y])
    };

    let mut z = z0;
    let mut r = eval(z)?;
    let mut rnorm = r[0].hypot(r[1]);
    let mut history = vec![rnorm];

    for iter in 0..60 {
        if rnorm <= target {
            return Ok(NewtonOutcome { z, history, iterations: iter });
        }

        // Central-difference Jacobian; keep probes inside the disc.
        let mut j = [[0.0f64; 2]; 2];
        for col in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[col] += fd_step;
            zm[col] -= fd_step;
            if zp[0].hypot(zp[1]) >= domain_radius || zm[0].hypot(zm[1]) >= domain_radius {
                return Err(Error::InversionFailed {
                    iterations: iter,
                    reason: "finite-difference probe left the parameter disc".into(),
                    history,
                });
            }
            let rp = eval(zp)?;
            let rm = eval(zm)?;
            j[0][col] = (rp[0] - rm[0]) / (2.0 * fd_step);
            j[1][col] = (rp[1] - rm[1]) / (2.0 * fd_step);
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let jnorm = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if det.abs() <= 1e-12 * jnorm * jnorm {
            return Err(Error::InversionFailed {
                iterations: iter,
                reason: format!("jacobian near singular (det = {det:.3e})"),
                history,
            });
        }
        let dz = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];

        // Backtracking: halve on residual increase or domain exit.
        let mut step = 1.0f64;
        let mut accepted = false;
        for _ in 0..20 {
            let trial = [z[0] + step * dz[0], z[1] + step * dz[1]];
            if trial[0].hypot(trial[1]) < domain_radius {
                if let Ok(rt) = eval(trial) {
                    let tnorm = rt[0].hypot(rt[1]);
                    if tnorm < rnorm {
                        z = trial;
                        r = rt;
                        rnorm = tnorm;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        history.push(rnorm);
        if !accepted {
            return Err(Error::InversionFailed {
                iterations: iter,
                reason: "backtracking exhausted without residual decrease".into(),
                history,
            });
        }
    }

    if rnorm <= target {
        let iterations = history.len();
        Ok(NewtonOutcome { z, history, iterations })
    } else {
        Err(Error::InversionFailed {
            iterations: 60,
            reason: format!("residual {rnorm:.3e} above target {target:.3e}"),
            history,
        })
    }
}

fn validate_target(p: HalfPlanePoint, q: HalfPlanePoint, b_floor: f64) -> Result<f64> {
    if !(q.x > 0.0) {
        return Err(Error::Domain(format!("q must lie in the half-plane, got q.x = {}", q.x)));
    }
    let disc = disc_lambda1(p.x)?;
    if !(b_floor > disc) {
        return Err(Error::Domain(format!(
            "eigenvalue floor B = {b_floor} must exceed the disc eigenvalue {disc}"
        )));
    }
    let gap = p.dist(&q);
    if gap == 0.0 {
        return Err(Error::Domain("q must differ from p".into()));
    }
    let reach = std::f64::consts::PI / b_floor.sqrt();
    if gap >= reach {
        return Err(Error::Domain(format!(
            "|q - p| = {gap:.6e} outside the shooting regime (< {reach:.6e} for B = {b_floor})"
        )));
    }
    Ok(gap)
}

fn record_from(z: [f64; 2], p: HalfPlanePoint) -> Result<EndpointRecord> {
    let (endpoint, theta0, lambda) = endpoint_at(z, p)?;
    let trajectory = integrate_critical(theta0, lambda, p, SHOOT_TOL)?;
    Ok(EndpointRecord { theta0, lambda, endpoint, trajectory })
}

/// Solves the two-point problem by shooting: finds `(Theta, lambda)` whose
/// critical trajectory from `p` ends at `q`, with
/// `|endpoint - q| <= SOLVE_RTOL * |q - p|`.
pub fn solve_boundary(
    p: HalfPlanePoint,
    q: HalfPlanePoint,
    b_floor: f64,
) -> Result<EndpointRecord> {
    let gap = validate_target(p, q, b_floor)?;
    let z0 = [(q.x - p.x) / std::f64::consts::PI, (q.y - p.y) / std::f64::consts::PI];
    let fd_step = (1e-3 * gap).max(1e-6);
    let target = (0.3 * SOLVE_RTOL * gap).max(5e-15);
    let out = newton_invert(p, q, z0, 1.0 / b_floor.sqrt(), fd_step, target)?;
    let record = record_from(out.z, p)?;
    let miss = record.endpoint.dist(&q);
    if miss > SOLVE_RTOL * gap {
        return Err(Error::InversionFailed {
            iterations: out.iterations,
            reason: format!("final endpoint misses q by {miss:.3e}"),
            history: out.history,
        });
    }
    Ok(record)
}

/// Runs Newton from `m` equally spaced initial angles at the asymptotic
/// eigenvalue guess and groups the successes into `(Theta mod 2 pi, lambda)`
/// classes. A single class for small `|q - p|` is the numerical uniqueness
/// evidence; failed starts are dropped.
pub fn uniqueness_scan(
    p: HalfPlanePoint,
    q: HalfPlanePoint,
    b_floor: f64,
    m: usize,
) -> Result<Vec<EndpointRecord>> {
    let gap = validate_target(p, q, b_floor)?;
    if m == 0 {
        return Err(Error::Domain("scan needs at least one initial angle".into()));
    }
    let sigma_guess = gap / std::f64::consts::PI;
    let fd_step = (1e-3 * gap).max(1e-6);
    let target = (0.3 * SOLVE_RTOL * gap).max(5e-15);
    let radius = 1.0 / b_floor.sqrt();

    let solutions: Vec<[f64; 2]> = (0..m)
        .into_par_iter()
        .filter_map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let z0 = [sigma_guess * angle.cos(), sigma_guess * angle.sin()];
            newton_invert(p, q, z0, radius, fd_step, target)
                .ok()
                .map(|out| out.z)
        })
        .collect();

    let mut classes: Vec<[f64; 2]> = Vec::new();
    for z in solutions {
        let lambda = 1.0 / (z[0] * z[0] + z[1] * z[1]);
        let theta = z[1].atan2(z[0]);
        let duplicate = classes.iter().any(|c| {
            let c_lambda = 1.0 / (c[0] * c[0] + c[1] * c[1]);
            let c_theta = c[1].atan2(c[0]);
            let mut dt = (theta - c_theta).abs() % (2.0 * std::f64::consts::PI);
            if dt > std::f64::consts::PI {
                dt = 2.0 * std::f64::consts::PI - dt;
            }
            dt <= CLASS_TOL && (lambda - c_lambda).abs() <= CLASS_TOL * c_lambda
        });
        if !duplicate {
            classes.push(z);
        }
    }

    classes.into_iter().map(|z| record_from(z, p)).collect()
}
