//! Adaptive Dormand-Prince 5(4) integration of complex linear systems
//! `dy/dt = f(t, y)`.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Largest step allowed; keeps the integrator from stepping over pulses.
    pub max_step: f64,
    pub min_step: f64,
}

impl Tolerance {
    pub fn new(tol: f64) -> Tolerance {
        Tolerance { rel: tol, abs: tol * 1e-3, max_step: f64::INFINITY, min_step: 1e-14 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    /// Sum of accepted local error estimates in the scaled norm times `tol`.
    pub error_estimate: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates from `t0` to each time in `outputs` (ascending, ≥ t0) and calls
/// `observe(t, y)` there. The state is advanced in place.
pub fn integrate<F, O>(
    mut f: F,
    y: &mut [C64],
    t0: f64,
    outputs: &[f64],
    tol: &Tolerance,
    mut observe: O,
) -> Result<Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(f64, &[C64]),
{
    let n = y.len();
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::default(); n]).collect();
    let mut tmp = vec![C64::default(); n];
    let mut y_new = vec![C64::default(); n];
    let mut stats = Stats::default();
    let mut t = t0;
    let span = outputs.last().map_or(0.0, |&e| e - t0);
    let mut h = (span * 1e-3).min(tol.max_step).max(tol.min_step * 10.0);
    f(t, y, &mut k[0]);

    for &target in outputs {
        if target < t - 1e-12 {
            return Err(Error::Integration(format!("output time {target} precedes current time {t}")));
        }
        while t < target {
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let (lo, hi) = k.split_at_mut(1);
            let k1 = &lo[0];
            stage(&mut tmp, y, step, &[(A21, k1)]);
            f(t + C2 * step, &tmp, &mut hi[0]);
            let (k2, rest) = hi.split_at_mut(1);
            let k2 = &k2[0];
            stage(&mut tmp, y, step, &[(A31, k1), (A32, k2)]);
            f(t + C3 * step, &tmp, &mut rest[0]);
            let (k3, rest) = rest.split_at_mut(1);
            let k3 = &k3[0];
            stage(&mut tmp, y, step, &[(A41, k1), (A42, k2), (A43, k3)]);
            f(t + C4 * step, &tmp, &mut rest[0]);
            let (k4, rest) = rest.split_at_mut(1);
            let k4 = &k4[0];
            stage(&mut tmp, y, step, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
            f(t + C5 * step, &tmp, &mut rest[0]);
            let (k5, rest) = rest.split_at_mut(1);
            let k5 = &k5[0];
            stage(&mut tmp, y, step, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
            f(t + step, &tmp, &mut rest[0]);
            let (k6, rest) = rest.split_at_mut(1);
            let k6 = &k6[0];
            stage(&mut y_new, y, step, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
            f(t + step, &y_new, &mut rest[0]);
            let k7 = &rest[0];

            let mut err = 0.0f64;
            for i in 0..n {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
                err = err.max(e.norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                stats.accepted += 1;
                stats.error_estimate += err * tol.rel;
                t = if last { target } else { t + step };
                y.copy_from_slice(&y_new);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
            } else {
                stats.rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = (step * factor).min(tol.max_step);
            }
            if h < tol.min_step {
                return Err(Error::Integration(format!(
                    "step size underflow ({h:e}) at t = {t}, local error ratio {err:.3e}"
                )));
            }
        }
        observe(t, y);
    }
    Ok(stats)
}

fn stage(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &Vec<C64>)]) {
    for i in 0..y.len() {
        let mut acc = C64::default();
        for (a, k) in terms {
            acc += *a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Composite Simpson rule on uniform samples with spacing `h`; needs an odd
/// number of samples.
pub fn simpson<T>(y: &[T], h: f64) -> T
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    assert!(y.len() % 2 == 1, "Simpson's rule needs an even number of intervals");
    if y.len() == 1 {
        return T::default();
    }
    let n = y.len() - 1;
    let mut acc = y[0] + y[n];
    for (i, &v) in y.iter().enumerate().take(n).skip(1) {
        acc = acc + v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}
