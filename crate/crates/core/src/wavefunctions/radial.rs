use serde::{Deserialize, Serialize};

use super::RydbergState;
use crate::atomic::SpeciesData;
use crate::{Error, Result};

/// Where the inward integration stops.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerCutoff {
    /// `0.7 · (n*² − n*·sqrt(n*² − l(l+1)))` for states with a quantum defect,
    /// close to the origin for hydrogenic states.
    #[default]
    Auto,
    Fixed(f64),
}

/// Radial grid, uniform in `x = sqrt(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Step in `sqrt(r)`, atomic units.
    pub step: f64,
    pub inner: InnerCutoff,
    /// Outer edge in Bohr; `None` uses `max(2 n* (n* + 15), 3 n*²)`.
    pub outer: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { step: 0.005, inner: InnerCutoff::Auto, outer: None }
    }
}

/// Smallest radius reached for hydrogenic states.
const HYDROGENIC_INNER: f64 = 1e-4;

/// Normalized reduced radial function `u(r) = r R(r)` on the solver grid.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RadialWave {
    pub l: u32,
    pub n_star: f64,
    pub x0: f64,
    pub step: f64,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub du_dr: Vec<f64>,
    pub norm_check: f64,
    pub nodes: usize,
}

/// Integrates the Coulomb radial equation at the quantum-defect energy
/// `-1/(2 n*²)` inward from the outer classically forbidden region.
///
/// With `x = sqrt(r)` and `u = x^{1/2} y` the equation becomes
/// `y'' = [8x²(-1/x² - E) + (2l+1/2)(2l+3/2)/x²] y`, which has a uniform
/// oscillation rate in `x` and is integrated with the Numerov stencil.
pub fn radial_solve(species: &SpeciesData, state: &RydbergState, grid: &GridSpec) -> Result<RadialWave> {
    let n_star = species.effective_principal(state.n, state.l, state.j)?;
    solve_coulomb(n_star, state.l, state.n as i64 - state.l as i64 - 1, grid)
}

pub(crate) fn solve_coulomb(n_star: f64, l: u32, expected_nodes: i64, grid: &GridSpec) -> Result<RadialWave> {
    if !(grid.step > 0.0) {
        return Err(Error::Validation("grid step must be positive".into()));
    }
    let lf = f64::from(l);
    let energy = -0.5 / (n_star * n_star);
    let hydrogenic = (n_star - n_star.round()).abs() < 1e-12;
    let r_in = match grid.inner {
        InnerCutoff::Fixed(r) => r,
        InnerCutoff::Auto if hydrogenic => {
            // Inward integration under the centrifugal barrier amplifies the
            // irregular solution by about (r_turn/r)^(2l+1); stop where that reaches 1e8.
            let disc = (n_star * n_star - lf * (lf + 1.0)).max(0.0);
            let r_turn = n_star * n_star - n_star * disc.sqrt();
            (r_turn * 1e-8f64.powf(1.0 / (2.0 * lf + 1.0))).max(HYDROGENIC_INNER)
        }
        InnerCutoff::Auto => {
            let disc = (n_star * n_star - lf * (lf + 1.0)).max(0.0);
            (0.7 * (n_star * n_star - n_star * disc.sqrt())).max(HYDROGENIC_INNER)
        }
    };
    let r_out = grid.outer.unwrap_or((2.0 * n_star * (n_star + 15.0)).max(3.0 * n_star * n_star));
    if r_out <= r_in {
        return Err(Error::Validation(format!("grid outer edge {r_out} is inside the inner cutoff {r_in}")));
    }
    let h = grid.step;
    let x_out = r_out.sqrt();
    let centrifugal = (2.0 * lf + 0.5) * (2.0 * lf + 1.5);
    let c = h * h / 12.0;
    let f = |x: f64| 8.0 * x * x * (-1.0 / (x * x) - energy) + centrifugal / (x * x);

    // Stop where the centrifugal term would make the stencil ill-conditioned.
    let x_stencil = (c * centrifugal / 0.01).sqrt();
    let x_in = r_in.sqrt().max(x_stencil);
    let count = ((x_out - x_in) / h).floor() as usize + 1;
    if count < 16 {
        return Err(Error::Convergence(format!("grid has only {count} points; step {h} too coarse")));
    }
    let x0 = x_out - (count - 1) as f64 * h;
    let xs: Vec<f64> = (0..count).map(|i| x0 + i as f64 * h).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let mut y = vec![0.0; count];
    y[count - 1] = 0.0;
    y[count - 2] = 1e-10;
    for i in (1..count - 1).rev() {
        let next = 2.0 * (1.0 + 5.0 * c * fs[i]) * y[i] - (1.0 - c * fs[i + 1]) * y[i + 1];
        y[i - 1] = next / (1.0 - c * fs[i - 1]);
        if y[i - 1].abs() > 1e200 {
            let s = 1e-200;
            y[i - 1..].iter_mut().for_each(|v| *v *= s);
        }
    }

    // ∫u² dr = 2∫x² y² dx
    let weights: Vec<f64> = xs.iter().zip(&y).map(|(x, v)| 2.0 * x * x * v * v).collect();
    let norm = simpson(&weights, h).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Convergence("radial solution has zero or non-finite norm".into()));
    }
    y.iter_mut().for_each(|v| *v /= norm);

    let dy = derivative5(&y, h);
    let grid_r: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let u: Vec<f64> = xs.iter().zip(&y).map(|(x, v)| x.sqrt() * v).collect();
    let du_dr: Vec<f64> = xs
        .iter()
        .zip(y.iter().zip(&dy))
        .map(|(&x, (&v, &dv))| (0.5 * v / x.sqrt() + x.sqrt() * dv) / (2.0 * x))
        .collect();
    let weights: Vec<f64> = xs.iter().zip(&y).map(|(x, v)| 2.0 * x * x * v * v).collect();
    let norm_check = simpson(&weights, h);

    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-6 * peak;
    let mut nodes = 0;
    let mut last_sign = 0.0;
    for &v in &u {
        if v.abs() > floor {
            let s = v.signum();
            if last_sign != 0.0 && s != last_sign {
                nodes += 1;
            }
            last_sign = s;
        }
    }
    if hydrogenic && expected_nodes >= 0 && nodes as i64 != expected_nodes {
        return Err(Error::Convergence(format!(
            "node count {nodes} differs from n-l-1 = {expected_nodes}; grid too coarse"
        )));
    }
    if !hydrogenic {
        // With a quantum defect the core region is cut away; the solution keeps
        // the nodes outside r_in, about n* - l - 1 of them.
        let expect = n_star - lf - 1.0;
        if (nodes as f64 - expect).abs() > 1.5 {
            return Err(Error::Convergence(format!(
                "node count {nodes} inconsistent with n*-l-1 = {expect:.3}; grid too coarse"
            )));
        }
    }

    Ok(RadialWave { l, n_star, x0, step: h, grid: grid_r, u, du_dr, norm_check, nodes })
}

fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    if n < 3 {
        return v.iter().sum::<f64>() * h;
    }
    let (body, tail) = if n % 2 == 1 { (n, 0.0) } else { (n - 1, 0.5 * h * (v[n - 2] + v[n - 1])) };
    let mut s = v[0] + v[body - 1];
    for (i, x) in v.iter().enumerate().take(body - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s * h / 3.0 + tail
}

/// Fourth-order finite-difference derivative on a uniform grid.
fn derivative5(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
    }
    let fwd = |i: usize| (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4]) / (12.0 * h);
    let bwd = |i: usize| (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) / (12.0 * h);
    d[0] = fwd(0);
    d[1] = fwd(1);
    d[n - 1] = bwd(n - 1);
    d[n - 2] = bwd(n - 2);
    d
}

impl RadialWave {
    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    /// `(u, du/dr)` at `r` by cubic Hermite interpolation; zero outside the grid.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if !(r >= self.r_min() && r <= self.r_max()) {
            return (0.0, 0.0);
        }
        let pos = (r.sqrt() - self.x0) / self.step;
        let i = (pos.floor() as usize).min(self.grid.len() - 2);
        let (r0, r1) = (self.grid[i], self.grid[i + 1]);
        let dr = r1 - r0;
        let t = (r - r0) / dr;
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let (m0, m1) = (self.du_dr[i] * dr, self.du_dr[i + 1] * dr);
        let t2 = t * t;
        let t3 = t2 * t;
        let val = (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * m1;
        let der = ((6.0 * t2 - 6.0 * t) * u0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * u1 + (3.0 * t2 - 2.0 * t) * m1) / dr;
        (val, der)
    }

    /// `(R, dR/dr)` with `R = u / r`.
    pub fn radial(&self, r: f64) -> (f64, f64) {
        let (u, du) = self.eval(r);
        (u / r, du / r - u / (r * r))
    }

    /// `∫ u_a u_b dr` over the overlap of two grids sharing `step` and `x0` alignment.
    pub fn overlap(&self, other: &RadialWave) -> f64 {
        let lo = self.r_min().max(other.r_min());
        let hi = self.r_max().min(other.r_max());
        if hi <= lo {
            return 0.0;
        }
        let h = self.step.min(other.step) * 0.5;
        let (xa, xb) = (lo.sqrt(), hi.sqrt());
        let n = (((xb - xa) / h).ceil() as usize).max(2) | 1;
        let hx = (xb - xa) / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let x = xa + i as f64 * hx;
                let r = x * x;
                self.eval(r).0 * other.eval(r).0 * 2.0 * x
            })
            .collect();
        simpson(&vals, hx)
    }

    /// `⟨r⟩ = ∫ r u² dr`.
    pub fn expectation_r(&self) -> f64 {
        let vals: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.u)
            .map(|(r, u)| {
                let x = r.sqrt();
                r * u * u * 2.0 * x
            })
            .collect();
        simpson(&vals, self.step)
    }
}
