use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_sci, Scalar};

/// Scalar field `u(x, t)` on a uniform grid. Values are stored x-major:
/// `u[i * n_t + j] = u(x_i, t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldData<T> {
    x: Vec<T>,
    t: Vec<T>,
    u: Vec<T>,
}

fn check_uniform<T: Scalar>(axis: &[T], name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidField(format!("{name} axis needs at least 2 points")));
    }
    let step = axis[1] - axis[0];
    if !(step > T::zero()) {
        return Err(Error::InvalidField(format!("{name} axis is not strictly increasing")));
    }
    let rtol = T::lit(1e-12).max(T::epsilon() * T::lit(1e3));
    // spacing relative to the coordinate magnitude, so grids built as
    // x0 + i·dx pass for any offset
    let scale = axis.iter().fold(step, |m, &v| m.max(v.abs()));
    for w in axis.windows(2) {
        let d = w[1] - w[0];
        if (d - step).abs() > rtol * scale {
            return Err(Error::InvalidField(format!("{name} axis is not uniformly spaced")));
        }
    }
    Ok(())
}

impl<T: Scalar> FieldData<T> {
    pub fn new(x: Vec<T>, t: Vec<T>, u: Vec<T>) -> Result<Self> {
        check_uniform(&x, "x")?;
        check_uniform(&t, "t")?;
        if u.len() != x.len() * t.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values for a {}x{} grid, got {}",
                x.len() * t.len(),
                x.len(),
                t.len(),
                u.len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("field contains non-finite values".into()));
        }
        Ok(Self { x, t, u })
    }

    /// Samples `f(x, t)` on the given axes.
    pub fn from_fn(x: Vec<T>, t: Vec<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let u = x
            .iter()
            .flat_map(|&xi| t.iter().map(move |&tj| (xi, tj)))
            .map(|(xi, tj)| f(xi, tj))
            .collect();
        Self::new(x, t, u)
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn t(&self) -> &[T] {
        &self.t
    }

    pub fn values(&self) -> &[T] {
        &self.u
    }

    pub fn n_x(&self) -> usize {
        self.x.len()
    }

    pub fn n_t(&self) -> usize {
        self.t.len()
    }

    pub fn dx(&self) -> T {
        (self.x[self.n_x() - 1] - self.x[0]) / T::from_count(self.n_x() - 1)
    }

    pub fn dt(&self) -> T {
        (self.t[self.n_t() - 1] - self.t[0]) / T::from_count(self.n_t() - 1)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.u[i * self.t.len() + j]
    }

    /// Spatial profile `u(·, t_j)`.
    pub fn snapshot(&self, j: usize) -> Vec<T> {
        (0..self.n_x()).map(|i| self.at(i, j)).collect()
    }

    /// CSV with header `x,t,u`, x as the outer loop.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,t,u")?;
        for (i, &xi) in self.x.iter().enumerate() {
            for (j, &tj) in self.t.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{}",
                    format_sci(xi),
                    format_sci(tj),
                    format_sci(self.at(i, j))
                )?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim_end() == "x,t,u" => {}
            Some((_, Err(e))) => return Err(e.into()),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header x,t,u".into(),
                })
            }
        }
        let mut rows: Vec<[T; 3]> = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut vals = [T::zero(); 3];
            let mut fields = line.split(',');
            for v in &mut vals {
                let f = fields.next().ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    message: "expected 3 fields".into(),
                })?;
                *v = f.trim().parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("bad number {f:?}"),
                })?;
            }
            if fields.next().is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "expected 3 fields".into(),
                });
            }
            rows.push(vals);
        }
        let first_x = rows.first().map(|r| r[0]).ok_or(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        })?;
        let n_t = rows.iter().take_while(|r| r[0] == first_x).count();
        if !rows.len().is_multiple_of(n_t) {
            return Err(Error::InvalidField("row count is not a multiple of n_t".into()));
        }
        let t: Vec<T> = rows[..n_t].iter().map(|r| r[1]).collect();
        let x: Vec<T> = rows.iter().step_by(n_t).map(|r| r[0]).collect();
        for (k, r) in rows.iter().enumerate() {
            if r[0] != x[k / n_t] || r[1] != t[k % n_t] {
                return Err(Error::InvalidField(format!(
                    "row {} breaks the x-major grid layout",
                    k + 2
                )));
            }
        }
        let u = rows.iter().map(|r| r[2]).collect();
        Self::new(x, t, u)
    }
}

/// JSON sidecar written next to a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FieldMeta<T> {
    pub n_x: usize,
    pub n_t: usize,
    pub dx: T,
    pub dt: T,
    pub nu: T,
    pub seed: u64,
}

impl<T: Scalar> FieldMeta<T> {
    pub fn describe(field: &FieldData<T>, nu: T, seed: u64) -> Self {
        Self {
            n_x: field.n_x(),
            n_t: field.n_t(),
            dx: field.dx(),
            dt: field.dt(),
            nu,
            seed,
        }
    }
}
