//! Critical-surface initial value problem and its endpoint map.
//!
//! State order is `(v, v', theta, F, G)`:
//!
//! ```text
//!   v''     = -(cos(theta)/F) v' - lambda v
//!   theta'  = sin(theta) (v'^2 - lambda v^2) / (F (v'^2 + lambda v^2))
//!   F'      = cos(theta),   G' = sin(theta)
//!   v(0) = 0, v'(0) = 1, theta(0) = Theta, (F, G)(0) = p
//! ```
//!
//! Integration stops at the first zero `L` of `v`. Along the way the a priori
//! guards are enforced: `F > 0`, the phase `lambda v^2 + v'^2` stays away from
//! zero, and the running horizon `t <= 2 pi sqrt(b/(a lambda))` (with `a`, `b`
//! the running extremes of `F`) must contain the zero.
//!
//! The rescaled system substitutes `lambda = 1/sigma^2`, `v = sigma v0(t/sigma)`,
//! `F = p1 + sigma F0(t/sigma)`; it is regular down to `sigma = 0`, where the
//! solution is exactly `v0 = sin t`, `theta0 = Theta`, and it is what the
//! endpoint map evaluates so that shooting stays accurate near the puncture.

use crate::error::Error;
use crate::geometry::{HalfPlanePoint, ProfileCurve};
use crate::reference_spectra::disc_lambda1;
use crate::rk::{integrate_path, integrate_to_zero, OdeOptions, OdeSolution};
use crate::Result;

/// Safety factor applied to the horizon bound `pi sqrt(b/(a lambda))`.
const HORIZON_SAFETY: f64 = 2.0;
/// Floor for the phase invariant `lambda v^2 + v'^2`.
const PHASE_FLOOR: f64 = 1e-14;

/// Solution of the critical system up to the first zero of `v`.
#[derive(Debug, Clone)]
pub struct CriticalTrajectory {
    pub theta0: f64,
    pub lambda: f64,
    pub p: HalfPlanePoint,
    /// Accepted integration times in `[0, L]`, strictly increasing.
    pub grid: Vec<f64>,
    /// Per-time state `(v, v', theta, F, G)`.
    pub states: Vec<[f64; 5]>,
    /// Per-time state derivatives from the right-hand side; `derivs[i][2]` is
    /// the reconstructed `theta'`.
    pub derivs: Vec<[f64; 5]>,
    /// First zero of `v`.
    pub length: f64,
    /// Integration tolerance the trajectory was computed at.
    pub tol: f64,
}

fn sample_state(grid: &[f64], states: &[[f64; 5]], derivs: &[[f64; 5]], t: f64) -> [f64; 5] {
    let last = grid.len() - 1;
    if t <= grid[0] {
        return states[0];
    }
    if t >= grid[last] {
        return states[last];
    }
    let i = match grid.binary_search_by(|g| g.partial_cmp(&t).unwrap()) {
        Ok(i) => return states[i],
        Err(i) => i - 1,
    };
    let h = grid[i + 1] - grid[i];
    let theta = (t - grid[i]) / h;
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let (h00, h10, h01, h11) = (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + theta,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    );
    let mut out = [0.0; 5];
    for c in 0..5 {
        out[c] = h00 * states[i][c]
            + h10 * h * derivs[i][c]
            + h01 * states[i + 1][c]
            + h11 * h * derivs[i + 1][c];
    }
    out
}

impl CriticalTrajectory {
    /// Far endpoint `(F(L), G(L))`.
    pub fn endpoint(&self) -> HalfPlanePoint {
        let s = self.states.last().unwrap();
        HalfPlanePoint { x: s[3], y: s[4] }
    }

    /// Dense state at an arbitrary time via per-interval cubic Hermite.
    pub fn sample_at(&self, t: f64) -> [f64; 5] {
        sample_state(&self.grid, &self.states, &self.derivs, t)
    }

    /// Running extremes of `F` along the stored grid.
    pub fn radial_extent(&self) -> (f64, f64) {
        self.states.iter().fold((f64::INFINITY, 0.0f64), |(a, b), s| {
            (a.min(s[3]), b.max(s[3]))
        })
    }

    /// Resamples `(F, G)` uniformly in arclength onto `n + 1` points as a
    /// profile curve on `[0, 1]` (the trajectory is unit speed, so uniform
    /// time is uniform arclength). Re-integrates with steps clipped at the
    /// sample times, so the samples carry no interpolation error; adjacent
    /// samples share smoothly accumulated error, which keeps difference
    /// quantities (speeds, residuals) clean.
    pub fn to_profile_curve(&self, n: usize) -> Result<ProfileCurve> {
        let times: Vec<f64> = (0..=n).map(|i| self.length * i as f64 / n as f64).collect();
        let time_scale = std::f64::consts::PI / self.lambda.sqrt();
        let opts = OdeOptions {
            rtol: self.tol,
            atol: self.tol,
            h_initial: 1e-3 * time_scale,
            h_max: 0.25 * time_scale,
            max_steps: 2_000_000,
            event_tol: 1e-12,
        };
        let rhs = critical_rhs(self.lambda);
        let states = integrate_path(&rhs, [0.0, 1.0, self.theta0, self.p.x, self.p.y], &times, &opts)?;
        let samples = states
            .iter()
            .map(|s| HalfPlanePoint { x: s[3], y: s[4] })
            .collect();
        ProfileCurve::new(samples)
    }
}

fn critical_rhs(lambda: f64) -> impl Fn(f64, &[f64; 5]) -> [f64; 5] {
    move |_t, y| {
        let [v, vp, theta, f, _g] = *y;
        let (sin_t, cos_t) = theta.sin_cos();
        let d = vp * vp - lambda * v * v;
        let s = vp * vp + lambda * v * v;
        [
            vp,
            -(cos_t / f) * vp - lambda * v,
            sin_t * d / (f * s),
            cos_t,
            sin_t,
        ]
    }
}

/// Integrates the critical system from `p` with initial angle `theta0` and
/// eigenvalue parameter `lambda` to the first zero of `v`.
///
/// Requires `lambda > lambda1(D_{p1})`; below that the zero need not exist.
pub fn integrate_critical(
    theta0: f64,
    lambda: f64,
    p: HalfPlanePoint,
    tol: f64,
) -> Result<CriticalTrajectory> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(p.x > 0.0) {
        return Err(Error::Domain(format!("p1 must be positive, got {}", p.x)));
    }
    let disc = disc_lambda1(p.x)?;
    if !(lambda > disc) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} must exceed the disc eigenvalue {disc}"
        )));
    }

    let time_scale = std::f64::consts::PI / lambda.sqrt();
    let opts = OdeOptions {
        rtol: tol,
        atol: tol,
        h_initial: 1e-3 * time_scale,
        h_max: 0.25 * time_scale,
        max_steps: 2_000_000,
        event_tol: 1e-12,
    };

    let mut f_min = p.x;
    let mut f_max = p.x;
    let rhs = critical_rhs(lambda);
    let sol: OdeSolution<5> = integrate_to_zero(
        &rhs,
        [0.0, 1.0, theta0, p.x, p.y],
        0,
        &opts,
        &mut |t, y| {
            let f = y[3];
            if f <= 0.0 {
                return Err(Error::LeftHalfPlane { t, f });
            }
            f_min = f_min.min(f);
            f_max = f_max.max(f);
            let phase = lambda * y[0] * y[0] + y[1] * y[1];
            if phase < PHASE_FLOOR {
                return Err(Error::DegeneratePhase { t, value: phase });
            }
            let cap = HORIZON_SAFETY * std::f64::consts::PI * (f_max / (f_min * lambda)).sqrt();
            if t > cap {
                return Err(Error::NoZeroBeforeBound { t, cap, v: y[0] });
            }
            Ok(())
        },
    )?;

    let length = sol
        .event_time
        .ok_or_else(|| Error::Integration("no event recorded".into()))?;
    Ok(CriticalTrajectory {
        theta0,
        lambda,
        p,
        grid: sol.t,
        states: sol.y,
        derivs: sol.dy,
        length,
        tol,
    })
}

/// Maximum normalized defect of the reduced curvature identity
///
/// ```text
///   (|v'|^2 - lambda v^2)(theta' + sin(theta)/F) = 2 |v'|^2 theta'
/// ```
///
/// over the stored grid, using the `theta'` values reconstructed from the
/// right-hand side during integration. The identity is algebraically implied
/// by the `theta` equation, so a consistent trajectory scores roundoff; it is
/// sensitive to any mismatch between the stored angles and their derivatives.
pub fn berger_residual(traj: &CriticalTrajectory) -> f64 {
    let lambda = traj.lambda;
    let mut worst = 0.0f64;
    for (y, dy) in traj.states.iter().zip(&traj.derivs) {
        let [v, vp, theta, f, _g] = *y;
        let theta_prime = dy[2];
        let d = vp * vp - lambda * v * v;
        let lhs = d * (theta_prime + theta.sin() / f);
        let rhs = 2.0 * vp * vp * theta_prime;
        let scale = d.abs() * (theta_prime.abs() + theta.sin().abs() / f)
            + 2.0 * vp * vp * theta_prime.abs();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    worst
}

/// Solution of the sigma-rescaled system up to the first zero of `v0`.
#[derive(Debug, Clone)]
pub struct RescaledTrajectory {
    pub sigma: f64,
    pub theta0: f64,
    pub p1: f64,
    pub grid: Vec<f64>,
    /// Per-time state `(v0, v0', theta0, F0, G0)`.
    pub states: Vec<[f64; 5]>,
    pub derivs: Vec<[f64; 5]>,
    /// First zero of `v0`.
    pub length: f64,
}

impl RescaledTrajectory {
    /// Endpoint `(F0(L0), G0(L0))` of the rescaled coordinates.
    pub fn endpoint0(&self) -> (f64, f64) {
        let s = self.states.last().unwrap();
        (s[3], s[4])
    }

    pub fn sample_at(&self, t: f64) -> [f64; 5] {
        sample_state(&self.grid, &self.states, &self.derivs, t)
    }
}

/// Integrates the rescaled system; regular uniformly in `sigma >= 0`. At
/// `sigma = 0` it reduces to `v0'' = -v0` with a straight profile ray, so the
/// endpoint is exactly `pi (cos Theta, sin Theta)`.
///
/// Requires `sigma^2 * lambda1(D_{p1}) < 1`, the rescaled form of the
/// eigenvalue floor `lambda > lambda1(D)`.
pub fn integrate_rescaled(
    sigma: f64,
    theta0: f64,
    p1: f64,
    tol: f64,
) -> Result<RescaledTrajectory> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    if !(p1 > 0.0) {
        return Err(Error::Domain(format!("p1 must be positive, got {p1}")));
    }
    let disc = disc_lambda1(p1)?;
    if sigma * sigma * disc >= 1.0 {
        return Err(Error::Domain(format!(
            "sigma = {sigma} too large: lambda = 1/sigma^2 must exceed the disc eigenvalue {disc}"
        )));
    }

    let opts = OdeOptions {
        rtol: tol,
        atol: tol,
        h_initial: 1e-3 * std::f64::consts::PI,
        h_max: 0.25 * std::f64::consts::PI,
        max_steps: 2_000_000,
        event_tol: 1e-12,
    };

    let mut f_min = p1;
    let mut f_max = p1;
    let rhs = move |_t: f64, y: &[f64; 5]| {
        let [v0, v0p, th0, f0, _g0] = *y;
        let (sin_t, cos_t) = th0.sin_cos();
        let radius = p1 + sigma * f0;
        let d = v0p * v0p - v0 * v0;
        let s = v0p * v0p + v0 * v0;
        [
            v0p,
            -sigma * (cos_t / radius) * v0p - v0,
            sigma * sin_t * d / (radius * s),
            cos_t,
            sin_t,
        ]
    };
    let sol: OdeSolution<5> = integrate_to_zero(
        &rhs,
        [0.0, 1.0, theta0, 0.0, 0.0],
        0,
        &opts,
        &mut |t, y| {
            let radius = p1 + sigma * y[3];
            if radius <= 0.0 {
                return Err(Error::LeftHalfPlane { t, f: radius });
            }
            f_min = f_min.min(radius);
            f_max = f_max.max(radius);
            let phase = y[0] * y[0] + y[1] * y[1];
            if phase < PHASE_FLOOR {
                return Err(Error::DegeneratePhase { t, value: phase });
            }
            // Rescaled horizon: t/sigma <= 2 pi sqrt(b/(a lambda)) becomes
            // t <= 2 pi sqrt(b/a) uniformly in sigma.
            let cap = HORIZON_SAFETY * std::f64::consts::PI * (f_max / f_min).sqrt();
            if t > cap {
                return Err(Error::NoZeroBeforeBound { t, cap, v: y[0] });
            }
            Ok(())
        },
    )?;

    let length = sol
        .event_time
        .ok_or_else(|| Error::Integration("no event recorded".into()))?;
    Ok(RescaledTrajectory {
        sigma,
        theta0,
        p1,
        grid: sol.t,
        states: sol.y,
        derivs: sol.dy,
        length,
    })
}

/// The endpoint map of shooting parameters: `(x, y)` encodes
/// `lambda^{-1/2} (cos Theta, sin Theta)`, and the image is the far endpoint
/// of the corresponding critical trajectory, with `(0,0)` mapped to `p`.
/// Defined on the open disc of radius `1/sqrt(B)` for a floor `B` above the
/// disc eigenvalue of radius `p1`.
#[derive(Debug, Clone)]
pub struct EndpointMap {
    p: HalfPlanePoint,
    b_floor: f64,
    tol: f64,
}

impl EndpointMap {
    pub fn new(p: HalfPlanePoint, b_floor: f64, tol: f64) -> Result<Self> {
        let disc = disc_lambda1(p.x)?;
        if !(b_floor > disc) {
            return Err(Error::Domain(format!(
                "eigenvalue floor B = {b_floor} must exceed the disc eigenvalue {disc}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        Ok(Self { p, b_floor, tol })
    }

    pub fn p(&self) -> HalfPlanePoint {
        self.p
    }

    /// Radius of the parameter disc `U`.
    pub fn domain_radius(&self) -> f64 {
        1.0 / self.b_floor.sqrt()
    }

    /// Evaluates the map through the rescaled system (uniformly accurate in
    /// the distance to the puncture).
    pub fn eval(&self, x: f64, y: f64) -> Result<HalfPlanePoint> {
        let sigma = x.hypot(y);
        if sigma == 0.0 {
            return Ok(self.p);
        }
        let limit = self.domain_radius();
        if sigma >= limit {
            return Err(Error::OutOfDomain { radius: sigma, limit });
        }
        let theta0 = y.atan2(x);
        let traj = integrate_rescaled(sigma, theta0, self.p.x, self.tol)?;
        let (f0, g0) = traj.endpoint0();
        Ok(HalfPlanePoint {
            x: self.p.x + sigma * f0,
            y: self.p.y + sigma * g0,
        })
    }

    /// Scaled difference map `Psi(sigma, Theta) = (Phi - p)/sigma`, extended by
    /// its limit `pi (cos Theta, sin Theta)` at `sigma = 0`. Evaluated without
    /// cancellation from the rescaled endpoint.
    pub fn psi(&self, sigma: f64, theta0: f64) -> Result<(f64, f64)> {
        if sigma == 0.0 {
            return Ok((
                std::f64::consts::PI * theta0.cos(),
                std::f64::consts::PI * theta0.sin(),
            ));
        }
        let limit = self.domain_radius();
        if !(0.0..limit).contains(&sigma) {
            return Err(Error::OutOfDomain { radius: sigma, limit });
        }
        let traj = integrate_rescaled(sigma, theta0, self.p.x, self.tol)?;
        Ok(traj.endpoint0())
    }

    /// Central finite-difference Jacobian at `(x, y)` with the given step.
    pub fn jacobian(&self, x: f64, y: f64, step: f64) -> Result<[[f64; 2]; 2]> {
        let xp = self.eval(x + step, y)?;
        let xm = self.eval(x - step, y)?;
        let yp = self.eval(x, y + step)?;
        let ym = self.eval(x, y - step)?;
        Ok([
            [(xp.x - xm.x) / (2.0 * step), (yp.x - ym.x) / (2.0 * step)],
            [(xp.y - xm.y) / (2.0 * step), (yp.y - ym.y) / (2.0 * step)],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_spectra::radial_wave_first_zero;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p_unit() -> HalfPlanePoint {
        HalfPlanePoint { x: 1.0, y: 0.0 }
    }

    #[test]
    fn zero_angle_reduces_to_the_radial_bessel_problem() {
        // Theta = 0 forces theta == 0, G == p2, F = p1 + t; the first zero of
        // v sits where the outward radial wave first vanishes.
        for lambda in [50.0, 100.0, 400.0] {
            let traj = integrate_critical(0.0, lambda, p_unit(), 1e-12).unwrap();
            let predicted = radial_wave_first_zero(lambda.sqrt(), 1.0).unwrap();
            let endpoint = traj.endpoint();
            assert_relative_eq!(endpoint.x, predicted, epsilon = 1e-9);
            assert!(endpoint.y.abs() < 1e-12);
            assert_relative_eq!(traj.length, predicted - 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn trajectories_reflect_across_the_initial_height() {
        let (theta, lambda) = (0.7, 120.0);
        let up = integrate_critical(theta, lambda, p_unit(), 1e-12).unwrap();
        let down = integrate_critical(-theta, lambda, p_unit(), 1e-12).unwrap();
        assert_relative_eq!(up.length, down.length, epsilon = 1e-10);
        let e_up = up.endpoint();
        let e_down = down.endpoint();
        assert_relative_eq!(e_up.x, e_down.x, epsilon = 1e-10);
        assert_relative_eq!(e_up.y, -e_down.y, epsilon = 1e-10);
        for frac in [0.25, 0.5, 0.75] {
            let a = up.sample_at(frac * up.length);
            let b = down.sample_at(frac * down.length);
            assert_relative_eq!(a[0], b[0], epsilon = 1e-9); // v
            assert_relative_eq!(a[3], b[3], epsilon = 1e-9); // F
            assert_relative_eq!(a[4], -b[4], epsilon = 1e-9); // G mirrored
        }
    }

    #[test]
    fn flux_inequality_holds_along_the_grid() {
        for (theta, lambda) in [(0.0, 50.0), (0.9, 80.0), (2.5, 200.0)] {
            let traj = integrate_critical(theta, lambda, p_unit(), 1e-11).unwrap();
            for s in &traj.states {
                assert!(s[1] * s[3] <= 1.0 + 1e-9, "flux v' F = {}", s[1] * s[3]);
            }
        }
    }

    #[test]
    fn positivity_and_terminal_zero() {
        let traj = integrate_critical(1.2, 90.0, p_unit(), 1e-11).unwrap();
        let n = traj.grid.len();
        assert_eq!(traj.states[0][0], 0.0);
        assert_eq!(traj.states[0][1], 1.0);
        for s in &traj.states[1..n - 1] {
            assert!(s[0] > 0.0, "v must stay positive inside");
        }
        assert!(traj.states[n - 1][0].abs() <= 1e-12);
    }

    #[test]
    fn resampled_curve_has_unit_speed_length() {
        let traj = integrate_critical(0.6, 150.0, p_unit(), 1e-11).unwrap();
        let curve = traj.to_profile_curve(2048).unwrap();
        assert_relative_eq!(curve.length(), traj.length, max_relative = 1e-7);
        let start = curve.samples()[0];
        assert_relative_eq!(start.x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn berger_identity_holds_to_roundoff() {
        let traj = integrate_critical(0.8, 100.0, p_unit(), 1e-11).unwrap();
        assert!(berger_residual(&traj) <= 1e-12);
    }

    #[test]
    fn berger_identity_is_trivial_at_zero_angle() {
        let traj = integrate_critical(0.0, 100.0, p_unit(), 1e-11).unwrap();
        assert_eq!(berger_residual(&traj), 0.0);
    }

    #[test]
    fn berger_residual_detects_perturbed_angles() {
        let mut traj = integrate_critical(0.8, 100.0, p_unit(), 1e-11).unwrap();
        for s in traj.states.iter_mut() {
            s[2] += 1e-3;
        }
        let res = berger_residual(&traj);
        assert!(
            (1e-5..1e-1).contains(&res),
            "expected residual of order 1e-3, got {res:.3e}"
        );
    }

    #[test]
    fn lambda_floor_is_enforced() {
        match integrate_critical(0.0, 5.0, p_unit(), 1e-10) {
            Err(Error::Domain(_)) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn rescaled_at_sigma_zero_is_the_sine_solution() {
        for theta in [0.0, 0.4, 2.0, -1.1] {
            let traj = integrate_rescaled(0.0, theta, 1.0, 1e-12).unwrap();
            assert_relative_eq!(traj.length, PI, epsilon = 1e-10);
            let (f0, g0) = traj.endpoint0();
            assert_relative_eq!(f0, PI * theta.cos(), epsilon = 1e-10);
            assert_relative_eq!(g0, PI * theta.sin(), epsilon = 1e-10);
            let mid = traj.sample_at(0.5 * PI);
            assert_relative_eq!(mid[0], 1.0, epsilon = 1e-9); // v0 = sin t
            assert_relative_eq!(mid[2], theta, epsilon = 1e-12); // angle frozen
        }
    }

    #[test]
    fn rescaled_departure_from_the_limit_is_first_order_in_sigma() {
        let map = EndpointMap::new(p_unit(), 2.0 * disc_lambda1(1.0).unwrap(), 1e-12).unwrap();
        let theta = 0.9;
        let base = map.psi(0.0, theta).unwrap();
        let d1 = {
            let v = map.psi(1e-3, theta).unwrap();
            ((v.0 - base.0).powi(2) + (v.1 - base.1).powi(2)).sqrt()
        };
        let d2 = {
            let v = map.psi(5e-4, theta).unwrap();
            ((v.0 - base.0).powi(2) + (v.1 - base.1).powi(2)).sqrt()
        };
        assert!(d1 < 0.05, "Psi should be close to its limit, moved {d1}");
        // Departure vanishes at least linearly in sigma (quadratically at
        // this base point); halving sigma must cut it by at least ~2x.
        let ratio = d1 / d2;
        assert!(
            (1.8..8.5).contains(&ratio),
            "halving sigma should shrink the departure, ratio = {ratio}"
        );
    }

    #[test]
    fn rescaled_route_matches_the_physical_system() {
        // lambda = 1/sigma^2 with matching angles: endpoints must agree.
        let sigma = 0.1f64;
        let theta = 0.5;
        let lambda = 1.0 / (sigma * sigma);
        let phys = integrate_critical(theta, lambda, p_unit(), 1e-13).unwrap();
        let map = EndpointMap::new(p_unit(), 2.0 * disc_lambda1(1.0).unwrap(), 1e-13).unwrap();
        let mapped = map.eval(sigma * theta.cos(), sigma * theta.sin()).unwrap();
        let direct = phys.endpoint();
        assert!(
            mapped.dist(&direct) < 1e-10,
            "routes differ by {:.3e}",
            mapped.dist(&direct)
        );
        // Lengths match under the time rescaling.
        let resc = integrate_rescaled(sigma, theta, 1.0, 1e-13).unwrap();
        assert_relative_eq!(phys.length, sigma * resc.length, epsilon = 1e-10);
    }

    #[test]
    fn endpoint_map_basics() {
        let b = 2.0 * disc_lambda1(1.0).unwrap();
        let map = EndpointMap::new(p_unit(), b, 1e-12).unwrap();
        let origin = map.eval(0.0, 0.0).unwrap();
        assert_eq!(origin.x, 1.0);
        assert_eq!(origin.y, 0.0);
        let r = map.domain_radius();
        match map.eval(r * 1.01, 0.0) {
            Err(Error::OutOfDomain { .. }) => {}
            other => panic!("expected out-of-domain, got {other:?}"),
        }
        // B at or below the disc eigenvalue is rejected.
        assert!(EndpointMap::new(p_unit(), 1.0, 1e-12).is_err());
    }

    #[test]
    fn jacobian_at_the_puncture_is_pi_times_identity() {
        let b = 2.0 * disc_lambda1(1.0).unwrap();
        let map = EndpointMap::new(p_unit(), b, 1e-12).unwrap();
        let j = map.jacobian(0.0, 0.0, 1e-4).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { PI } else { 0.0 };
                assert!(
                    (j[r][c] - expect).abs() < 1e-3,
                    "J[{r}][{c}] = {} vs {expect}",
                    j[r][c]
                );
            }
        }
    }
}
