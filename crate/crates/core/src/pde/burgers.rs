//! Viscous Burgers' equation `u_t = −u·u_x + ν·u_xx` on a periodic domain,
//! integrated with forward-Euler / central-difference (FTCS) steps.
//!
//! Each output interval is split into equal substeps small enough for both
//! the diffusive limit `dt ≤ 0.4·dx²/ν` and the central-advection limit
//! `dt ≤ ν/max|u|²`.

use serde::{Deserialize, Serialize};

use super::field::FieldData;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Values above this magnitude mean the scheme went unstable.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Fraction of the diffusive stability limit `dx²/ν` used per substep.
pub const DIFFUSIVE_CFL: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Domain<T> {
    pub x_min: T,
    pub x_max: T,
    pub n_x: usize,
    pub t_max: T,
    pub n_t: usize,
}

impl Default for Domain<f64> {
    fn default() -> Self {
        Self {
            x_min: -8.0,
            x_max: 8.0,
            n_x: 256,
            t_max: 10.0,
            n_t: 101,
        }
    }
}

impl<T: Scalar> Domain<T> {
    /// Periodic grid: `x_max` is identified with `x_min` and not sampled.
    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_count(self.n_x)
    }

    pub fn x_axis(&self) -> Vec<T> {
        let dx = self.dx();
        (0..self.n_x).map(|i| self.x_min + T::from_count(i) * dx).collect()
    }

    pub fn t_axis(&self) -> Vec<T> {
        let dt = self.t_max / T::from_count(self.n_t - 1);
        (0..self.n_t).map(|j| T::from_count(j) * dt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum InitialCondition<T> {
    /// `amplitude · exp(−((x − center)/width)²)`
    GaussianPulse { amplitude: T, center: T, width: T },
    /// `amplitude · sin(2π·modes·(x − x_min)/L)`
    Sine { amplitude: T, modes: usize },
}

impl<T: Scalar> InitialCondition<T> {
    pub fn gaussian() -> Self {
        Self::GaussianPulse {
            amplitude: T::one(),
            center: -T::one(),
            width: T::one(),
        }
    }

    pub fn sine() -> Self {
        Self::Sine {
            amplitude: T::one(),
            modes: 1,
        }
    }

    fn evaluate(&self, domain: &Domain<T>) -> Vec<T> {
        let length = domain.x_max - domain.x_min;
        domain
            .x_axis()
            .into_iter()
            .map(|x| match *self {
                Self::GaussianPulse {
                    amplitude,
                    center,
                    width,
                } => amplitude * (-((x - center) / width).powi(2)).exp(),
                Self::Sine { amplitude, modes } => {
                    let phase = T::lit(std::f64::consts::TAU) * T::from_count(modes) * (x - domain.x_min) / length;
                    amplitude * phase.sin()
                }
            })
            .collect()
    }
}

fn ftcs_step<T: Scalar>(u: &[T], next: &mut [T], nu: T, dx: T, dt: T) {
    let n = u.len();
    let half_inv_dx = T::lit(0.5) / dx;
    let inv_dx2 = T::one() / (dx * dx);
    let two = T::lit(2.0);
    for i in 0..n {
        let left = u[(i + n - 1) % n];
        let right = u[(i + 1) % n];
        let ux = (right - left) * half_inv_dx;
        let uxx = (right - two * u[i] + left) * inv_dx2;
        next[i] = u[i] + dt * (nu * uxx - u[i] * ux);
    }
}

/// Integrates Burgers' equation and samples the solution on the domain's
/// `n_x × n_t` output grid.
pub fn simulate_burgers<T: Scalar>(
    nu: T,
    domain: &Domain<T>,
    initial: &InitialCondition<T>,
) -> Result<FieldData<T>> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    if domain.n_x < 64 || domain.n_t < 50 {
        return Err(Error::InvalidArgument(format!(
            "grid must be at least 64x50, got {}x{}",
            domain.n_x, domain.n_t
        )));
    }
    if !(domain.x_max > domain.x_min) || !(domain.t_max > T::zero()) {
        return Err(Error::InvalidArgument("empty space or time interval".into()));
    }
    let dx = domain.dx();
    let t_axis = domain.t_axis();
    let out_dt = t_axis[1] - t_axis[0];
    let diffusive_dt = T::lit(DIFFUSIVE_CFL) * dx * dx / nu;

    let (n_x, n_t) = (domain.n_x, domain.n_t);
    let mut u = initial.evaluate(domain);
    let mut scratch = vec![T::zero(); n_x];
    let mut out = vec![T::zero(); n_x * n_t];
    let store = |out: &mut [T], u: &[T], j: usize| {
        for (i, &v) in u.iter().enumerate() {
            out[i * n_t + j] = v;
        }
    };
    store(&mut out, &u, 0);
    for (j, &t_j) in t_axis.iter().enumerate().skip(1) {
        let u_max = u.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        let mut dt_max = diffusive_dt;
        if u_max > T::zero() {
            dt_max = dt_max.min(nu / (u_max * u_max));
        }
        let steps = (out_dt / dt_max).ceil().to_usize().unwrap_or(usize::MAX).max(1);
        let dt = out_dt / T::from_count(steps);
        for _ in 0..steps {
            ftcs_step(&u, &mut scratch, nu, dx, dt);
            std::mem::swap(&mut u, &mut scratch);
        }
        let peak = u.iter().fold(T::zero(), |m, &v| if v.is_finite() { m.max(v.abs()) } else { T::infinity() });
        if !(peak <= T::lit(BLOWUP_THRESHOLD)) {
            return Err(Error::UnstableSimulation {
                value: peak.as_f64(),
                time: t_j.as_f64(),
            });
        }
        store(&mut out, &u, j);
    }
    FieldData::new(domain.x_axis(), t_axis, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_domain() -> Domain<f64> {
        Domain {
            x_min: -8.0,
            x_max: 8.0,
            n_x: 128,
            t_max: 2.0,
            n_t: 51,
        }
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let ic = InitialCondition::GaussianPulse {
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
        };
        let f = simulate_burgers(0.1, &small_domain(), &ic).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mass_is_conserved_with_strong_viscosity() {
        let f = simulate_burgers(10.0, &small_domain(), &InitialCondition::gaussian()).unwrap();
        let dx = f.dx();
        let mass = |j: usize| f.snapshot(j).iter().sum::<f64>() * dx;
        let m0 = mass(0);
        for j in 0..f.n_t() {
            assert!(((mass(j) - m0) / m0).abs() < 1e-3, "mass drift at t = {}", f.t()[j]);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let ic = InitialCondition::gaussian();
        assert!(simulate_burgers(-1.0, &small_domain(), &ic).is_err());
        let mut d = small_domain();
        d.n_x = 32;
        assert!(simulate_burgers(0.1, &d, &ic).is_err());
    }
}
