//! Candidate-term libraries `uᵃ·∂ₓᵇu` evaluated from a sampled field.
//!
//! `u_t` is always a second-order central difference in time, so the first
//! and last snapshots are unusable. Spatial derivatives are either
//! second-order central differences (grid points within the stencil
//! half-width of either edge are dropped) or periodic spectral derivatives.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::field::FieldData;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::regression::CandidateLibrary;
use crate::scalar::Scalar;

/// Highest derivative order the central-difference stencils provide.
pub const MAX_FD_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Differentiation {
    CentralFd,
    /// FFT-based; assumes the field is periodic in x.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibrarySpec {
    pub max_poly_degree: usize,
    pub max_deriv_order: usize,
    pub differentiation: Differentiation,
}

impl Default for LibrarySpec {
    fn default() -> Self {
        Self {
            max_poly_degree: 3,
            max_deriv_order: 3,
            differentiation: Differentiation::CentralFd,
        }
    }
}

impl LibrarySpec {
    /// `(d + 1)(q + 1) − 1`: every product except the bare constant.
    pub fn n_terms(&self) -> usize {
        (self.max_poly_degree + 1) * (self.max_deriv_order + 1) - 1
    }

    /// `(power, derivative order)` pairs in column order.
    pub fn term_orders(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_terms());
        for a in 0..=self.max_poly_degree {
            for b in 0..=self.max_deriv_order {
                if a + b > 0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn term_names(&self) -> Vec<String> {
        self.term_orders().into_iter().map(|(a, b)| term_name(a, b)).collect()
    }

    fn halo(&self) -> usize {
        match self.differentiation {
            Differentiation::CentralFd => self.max_deriv_order.div_ceil(2),
            Differentiation::Spectral => 0,
        }
    }
}

/// `u^a*u_x…x`, e.g. `u`, `u^2`, `u_xx`, `u*u_x`, `u^3*u_xxx`.
pub fn term_name(power: usize, order: usize) -> String {
    let poly = match power {
        0 => String::new(),
        1 => "u".to_owned(),
        a => format!("u^{a}"),
    };
    let deriv = if order == 0 {
        String::new()
    } else {
        format!("u_{}", "x".repeat(order))
    };
    match (poly.is_empty(), deriv.is_empty()) {
        (false, false) => format!("{poly}*{deriv}"),
        (true, _) => deriv,
        (_, true) => poly,
    }
}

/// Second-order central difference of a given order at interior index `i`.
fn central_fd<T: Scalar>(u: &[T], i: usize, order: usize, dx: T) -> T {
    let c = |k: isize| u[(i as isize + k) as usize];
    let two = T::lit(2.0);
    match order {
        0 => c(0),
        1 => (c(1) - c(-1)) / (two * dx),
        2 => (c(1) - two * c(0) + c(-1)) / (dx * dx),
        3 => (c(2) - two * c(1) + two * c(-1) - c(-2)) / (two * dx.powi(3)),
        4 => (c(2) - T::lit(4.0) * c(1) + T::lit(6.0) * c(0) - T::lit(4.0) * c(-1) + c(-2)) / dx.powi(4),
        _ => unreachable!("order checked by caller"),
    }
}

/// Derivatives `∂ₓᵇu` for `b = 0..=order` of one periodic profile via FFT.
fn spectral_derivatives<T: Scalar>(profile: &[T], order: usize, dx: T, planner: &mut FftPlanner<T>) -> Vec<Vec<T>> {
    let n = profile.len();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut hat: Vec<Complex<T>> = profile.iter().map(|&v| Complex::new(v, T::zero())).collect();
    forward.process(&mut hat);
    let length = dx * T::from_count(n);
    let base = T::lit(std::f64::consts::TAU) / length;
    let wavenumber = |k: usize| -> T {
        if k <= n / 2 {
            T::from_count(k) * base
        } else {
            -(T::from_count(n - k) * base)
        }
    };
    let scale = T::one() / T::from_count(n);
    let mut out = vec![profile.to_vec()];
    for b in 1..=order {
        let mut spec: Vec<Complex<T>> = hat
            .iter()
            .enumerate()
            .map(|(k, &h)| {
                // Nyquist mode has no consistent sign for odd orders
                if n.is_multiple_of(2) && k == n / 2 && !b.is_multiple_of(2) {
                    return Complex::new(T::zero(), T::zero());
                }
                let ik = Complex::new(T::zero(), wavenumber(k));
                let mut factor = Complex::new(T::one(), T::zero());
                for _ in 0..b {
                    factor = factor * ik;
                }
                h * factor
            })
            .collect();
        inverse.process(&mut spec);
        out.push(spec.iter().map(|c| c.re * scale).collect());
    }
    out
}

/// Every library term plus `u_t`, evaluated at all usable grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct TermTable<T> {
    pub names: Vec<String>,
    /// One column per term, aligned with `points`.
    pub columns: Vec<Vec<T>>,
    pub u_t: Vec<T>,
    /// `(i, j)` grid indices of the usable points, x-major.
    pub points: Vec<(usize, usize)>,
}

impl<T: Scalar> TermTable<T> {
    pub fn column(&self, name: &str) -> Option<&[T]> {
        self.names.iter().position(|n| n == name).map(|j| self.columns[j].as_slice())
    }
}

/// Evaluates every term of `spec` on the usable interior of the grid.
pub fn library_terms<T: Scalar>(field: &FieldData<T>, spec: &LibrarySpec) -> Result<TermTable<T>> {
    let q = spec.max_deriv_order;
    if spec.n_terms() == 0 {
        return Err(Error::InvalidArgument("library spec produces no terms".into()));
    }
    if spec.differentiation == Differentiation::CentralFd && q > MAX_FD_ORDER {
        return Err(Error::InvalidArgument(format!(
            "central differences support derivative orders up to {MAX_FD_ORDER}, got {q}"
        )));
    }
    let (n_x, n_t) = (field.n_x(), field.n_t());
    let halo = spec.halo();
    if n_x <= 2 * halo || n_t < 3 {
        return Err(Error::TooFewInteriorPoints {
            requested: 1,
            available: 0,
        });
    }
    let dx = field.dx();
    let dt = field.dt();

    // derivs[b][i * n_t + j] for every snapshot j (valid only away from the x halo)
    let mut derivs = vec![vec![T::zero(); n_x * n_t]; q + 1];
    let mut planner = FftPlanner::new();
    for j in 0..n_t {
        let profile = field.snapshot(j);
        match spec.differentiation {
            Differentiation::CentralFd => {
                for (b, d) in derivs.iter_mut().enumerate() {
                    for i in halo..n_x - halo {
                        d[i * n_t + j] = central_fd(&profile, i, b, dx);
                    }
                }
            }
            Differentiation::Spectral => {
                let all = spectral_derivatives(&profile, q, dx, &mut planner);
                for (b, d) in derivs.iter_mut().enumerate() {
                    for i in 0..n_x {
                        d[i * n_t + j] = all[b][i];
                    }
                }
            }
        }
    }

    let points: Vec<(usize, usize)> = (halo..n_x - halo)
        .flat_map(|i| (1..n_t - 1).map(move |j| (i, j)))
        .collect();
    let two_dt = T::lit(2.0) * dt;
    let u_t = points
        .iter()
        .map(|&(i, j)| (field.at(i, j + 1) - field.at(i, j - 1)) / two_dt)
        .collect();
    let orders = spec.term_orders();
    let columns = orders
        .iter()
        .map(|&(a, b)| {
            points
                .iter()
                .map(|&(i, j)| field.at(i, j).powi(a as i32) * derivs[b][i * n_t + j])
                .collect()
        })
        .collect();
    Ok(TermTable {
        names: spec.term_names(),
        columns,
        u_t,
        points,
    })
}

/// Candidate library on `n_samples` usable points drawn uniformly without
/// replacement (sorted grid order), target `u_t`.
pub fn build_library<T: Scalar>(
    field: &FieldData<T>,
    spec: &LibrarySpec,
    n_samples: usize,
    seed: u64,
) -> Result<CandidateLibrary<T>> {
    let table = library_terms(field, spec)?;
    let available = table.points.len();
    if n_samples == 0 || n_samples > available {
        return Err(Error::TooFewInteriorPoints {
            requested: n_samples,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, available, n_samples).into_vec();
    picked.sort_unstable();
    let columns: Vec<Vec<T>> = table
        .columns
        .iter()
        .map(|c| picked.iter().map(|&p| c[p]).collect())
        .collect();
    let target = picked.iter().map(|&p| table.u_t[p]).collect();
    CandidateLibrary::new(Matrix::from_columns(&columns)?, table.names, target)
}

/// Adds i.i.d. Gaussian observation noise to the target, with standard
/// deviation `relative_sd · RMS(target)`. The draws come from stream 1 of
/// the seeded generator, so they never overlap the point sampling stream.
pub fn add_target_noise<T: Scalar>(lib: &CandidateLibrary<T>, relative_sd: T, seed: u64) -> Result<CandidateLibrary<T>> {
    if !(relative_sd >= T::zero()) || !relative_sd.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target noise level must be a finite non-negative number, got {relative_sd}"
        )));
    }
    if relative_sd == T::zero() {
        return Ok(lib.clone());
    }
    let y = lib.target();
    let rms = (y.iter().map(|&v| v * v).sum::<T>() / T::from_count(y.len())).sqrt();
    let sd = (relative_sd * rms).as_f64();
    let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let noisy = y.iter().map(|&v| v + T::lit(normal.sample(&mut rng))).collect();
    lib.with_target(noisy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_count() {
        let spec = LibrarySpec::default();
        assert_eq!(spec.n_terms(), 15);
        let names = spec.term_names();
        assert_eq!(names.len(), 15);
        assert!(names.contains(&"u*u_x".to_owned()));
        assert!(names.contains(&"u_xx".to_owned()));
        assert!(names.contains(&"u^3*u_xxx".to_owned()));
        assert!(names.contains(&"u^2".to_owned()));
        assert_eq!(names[0], "u_x");
    }

    fn axis(n: usize, lo: f64, step: f64) -> Vec<f64> {
        (0..n).map(|i| lo + i as f64 * step).collect()
    }

    #[test]
    fn linear_field_differentiates_exactly() {
        let f = FieldData::from_fn(axis(40, -1.0, 0.05), axis(10, 0.0, 0.1), |x, _| x).unwrap();
        let table = library_terms(&f, &LibrarySpec::default()).unwrap();
        assert!(table.column("u_x").unwrap().iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(table.column("u_xx").unwrap().iter().all(|v| v.abs() < 1e-10));
        assert!(table.column("u_xxx").unwrap().iter().all(|v| v.abs() < 1e-10));
        assert!(table.u_t.iter().all(|v| v.abs() < 1e-10));
        assert_eq!(table.points.len(), (40 - 4) * (10 - 2));
        // identically zero columns are not a valid regression library
        assert!(matches!(
            build_library(&f, &LibrarySpec::default(), 10, 0),
            Err(Error::InvalidLibrary(_))
        ));
    }

    #[test]
    fn spectral_matches_analytic_on_periodic_profile() {
        let n = 64;
        let l = std::f64::consts::TAU;
        let x = axis(n, 0.0, l / n as f64);
        let f = FieldData::from_fn(x, axis(5, 0.0, 0.1), |x, t| (2.0 * x).sin() * (-t).exp()).unwrap();
        let spec = LibrarySpec {
            max_poly_degree: 0,
            max_deriv_order: 3,
            differentiation: Differentiation::Spectral,
        };
        let table = library_terms(&f, &spec).unwrap();
        for (p, &(i, j)) in table.points.iter().enumerate() {
            let (x, t) = (f.x()[i], f.t()[j]);
            let e = (-t).exp();
            assert!((table.column("u_x").unwrap()[p] - 2.0 * (2.0 * x).cos() * e).abs() < 1e-10);
            assert!((table.column("u_xx").unwrap()[p] + 4.0 * (2.0 * x).sin() * e).abs() < 1e-10);
            assert!((table.column("u_xxx").unwrap()[p] + 8.0 * (2.0 * x).cos() * e).abs() < 1e-9);
        }
    }

    #[test]
    fn too_many_samples_rejected() {
        let f = FieldData::from_fn(axis(20, 0.0, 0.1), axis(5, 0.0, 0.1), |x, t| (x + t).sin()).unwrap();
        assert!(matches!(
            build_library(&f, &LibrarySpec::default(), 10_000, 0),
            Err(Error::TooFewInteriorPoints { available: 48, .. })
        ));
    }
}
