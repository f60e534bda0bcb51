//! One-dimensional parameter sweeps of the gate and the three operating-regime panels.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::reduced::two_level_reduction;
use crate::exec::Exec;
use crate::gate::{run_gate, Encoding, GateOptions, LevelScheme, LogicalState, PulseSchedule};
use crate::{Error, Result};

/// Largest grid accepted by [`sweep`].
pub const MAX_POINTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "field")]
pub enum SweepAxis {
    /// A named field of the level scheme or schedule, e.g. `gamma_c` or `sigma_us`.
    Field(String),
    /// `δ = δ_RF/ε`, realized through `V_RF = δε/2`.
    DeltaRatio,
    /// `Γ_c/Ω_eff` against the baseline `Ω_eff` (fixed pulse width).
    GammaRatio,
    /// `Ω_r/Ω_s`, applied to every color.
    RabiRatio,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<SweepAxis> {
        Ok(match s {
            "delta_ratio" => SweepAxis::DeltaRatio,
            "gamma_ratio" => SweepAxis::GammaRatio,
            "rabi_ratio" => SweepAxis::RabiRatio,
            "sigma" => SweepAxis::Field("sigma_us".into()),
            f if FIELDS.contains(&f) => SweepAxis::Field(f.into()),
            other => return Err(Error::Validation(format!("unknown sweep axis `{other}`"))),
        })
    }

    pub fn name(&self) -> &str {
        match self {
            SweepAxis::Field(f) => f,
            SweepAxis::DeltaRatio => "delta_ratio",
            SweepAxis::GammaRatio => "gamma_ratio",
            SweepAxis::RabiRatio => "rabi_ratio",
        }
    }

    /// Baseline with the axis set to `x`.
    pub fn apply(&self, scheme: &LevelScheme, schedule: &PulseSchedule, x: f64) -> Result<(LevelScheme, PulseSchedule)> {
        let mut s = scheme.clone();
        let mut p = schedule.clone();
        match self {
            SweepAxis::Field(f) => match f.as_str() {
                "omega_s" => s.omega_s = x,
                "omega_r" => s.omega_r.iter_mut().for_each(|o| *o = x),
                "g" => s.g = x,
                "delta" => s.delta = x,
                "v_rf" => s.v_rf = x,
                "gamma_c" => s.gamma_c = x,
                "gamma_p" => s.gamma_p = x,
                "gamma_r" => s.gamma_r = x,
                "sigma_us" => p.sigma_us = x,
                "separation_us" => p.separation_us = Some(x),
                other => return Err(Error::Validation(format!("unknown sweep field `{other}`"))),
            },
            SweepAxis::DeltaRatio => s.v_rf = 0.5 * x * scheme.epsilon(),
            SweepAxis::GammaRatio => {
                let base = two_level_reduction(scheme, 2.0 * scheme.v_rf, 3.0)?;
                s.gamma_c = x * base.params.omega_eff;
            }
            SweepAxis::RabiRatio => s.omega_r.iter_mut().for_each(|o| *o = x * scheme.omega_s),
        }
        Ok((s, p))
    }
}

const FIELDS: [&str; 10] =
    ["omega_s", "omega_r", "g", "delta", "v_rf", "gamma_c", "gamma_p", "gamma_r", "sigma_us", "separation_us"];

/// One grid point. Probabilities are weighted by the input amplitudes;
/// `fidelity` is the heralded, sign-resolved value against the gate target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub p_early: f64,
    pub p_late: f64,
    pub p_none: f64,
    pub fidelity: f64,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(value: f64, e: Error) -> SweepRow {
        SweepRow { value, p_early: f64::NAN, p_late: f64::NAN, p_none: f64::NAN, fidelity: f64::NAN, error: Some(e.to_string()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub const HEADER: &'static str = "value,p_early,p_late,p_none,fidelity,error";

    pub fn to_csv(&self) -> String {
        let mut out = format!("# axis = {}\n{}\n", self.axis.name(), Self::HEADER);
        for r in &self.rows {
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{}", r.value, r.p_early, r.p_late, r.p_none, r.fidelity, err);
        }
        out
    }

    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Runs the gate at every grid value. Points run through `exec`; each point
/// integrates its branches sequentially. A failing point is recorded in its
/// row and the sweep continues.
pub fn sweep(
    input: &LogicalState,
    scheme: &LevelScheme,
    schedule: &PulseSchedule,
    options: &GateOptions,
    axis: &SweepAxis,
    values: &[f64],
    exec: Exec,
) -> Result<SweepTable> {
    if values.is_empty() || values.len() > MAX_POINTS {
        return Err(Error::Validation(format!("sweep grid must hold 1..={MAX_POINTS} points")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("sweep values must be finite".into()));
    }
    let rows = exec.map(values, |_, &x| {
        let point = || -> Result<SweepRow> {
            let (s, p) = axis.apply(scheme, schedule, x)?;
            let out = run_gate(input, &s, &p, options, Exec::Sequential)?;
            let weighted = |f: &dyn Fn(&crate::gate::BranchReport) -> f64| -> f64 {
                out.branches.iter().map(|b| b.amplitude.norm_sqr() * f(b)).sum()
            };
            Ok(SweepRow {
                value: x,
                p_early: weighted(&|b| b.p_early),
                p_late: weighted(&|b| b.p_late),
                p_none: weighted(&|b| b.p_none),
                fidelity: out.sign_resolved.fidelity.raw,
                error: None,
            })
        };
        point().unwrap_or_else(|e| SweepRow::failed(x, e))
    });
    Ok(SweepTable { axis: axis.clone(), rows })
}

/// `n` evenly spaced points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` log-spaced points on `[a, b]`, `a, b > 0`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// Operating-regime baseline: `δ_RF = 130`, `Δ = 33`, `Ω_r = 40`, `Ω_s = 10`,
/// `g = 8.5` (2π×MHz), `Γ_c = Ω_eff` and `σΓ_c = 10`.
pub fn fig3_baseline() -> Result<(LevelScheme, PulseSchedule)> {
    let mut scheme = LevelScheme {
        omega_s: 10.0,
        omega_r: vec![40.0],
        g: 8.5,
        delta: 33.0,
        v_rf: 65.0,
        gamma_c: 1.0,
        gamma_p: 0.0,
        gamma_r: 0.0,
        light_shift_compensation: true,
    };
    scheme.gamma_c = two_level_reduction(&scheme, 2.0 * scheme.v_rf, 3.0)?.params.omega_eff;
    let sigma = 10.0 / (2.0 * PI * scheme.gamma_c);
    Ok((scheme, PulseSchedule::gaussian(sigma)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Panel {
    pub name: String,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Logical input, 0 or 1.
    pub logical: u8,
}

/// Panels a (`δ`), b (`Γ_c/Ω_eff`) and c (`Ω_r/Ω_s`, blocked input).
pub fn fig3_panels() -> [Fig3Panel; 3] {
    [
        Fig3Panel { name: "a".into(), axis: SweepAxis::DeltaRatio, values: linspace(0.0, 1.5, 31), logical: 0 },
        Fig3Panel { name: "b".into(), axis: SweepAxis::GammaRatio, values: logspace(0.1, 10.0, 21), logical: 0 },
        Fig3Panel { name: "c".into(), axis: SweepAxis::RabiRatio, values: linspace(1.0, 6.0, 26), logical: 1 },
    ]
}

/// Runs one operating-regime panel on the four-qubit code.
pub fn fig3_panel(panel: &Fig3Panel, options: &GateOptions, exec: Exec) -> Result<SweepTable> {
    let (scheme, schedule) = fig3_baseline()?;
    let input = if panel.logical == 0 { LogicalState::zero(Encoding::FourQubit) } else { LogicalState::one(Encoding::FourQubit) };
    sweep(&input, &scheme, &schedule, options, &panel.axis, &panel.values, exec)
}
