//! Explicit Runge–Kutta integrators over a dense complex state.
//!
//! The state is a `CMatrix` (a column for pure states, square for density
//! matrices). Integration always lands exactly on the output grid.

use crate::error::{Error, Result};
use crate::statespace::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Classic fixed-step fourth order.
    Rk4,
    /// Dormand–Prince 5(4) with step-size control.
    DormandPrince,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Stepping {
    pub method: Method,
    pub tol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand–Prince tableau
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
// b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// out = y + h Σ aᵢ kᵢ
fn combine(out: &mut CMatrix, y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) {
    let o = out.as_mut_slice();
    o.copy_from_slice(y.as_slice());
    for &(a, k) in terms {
        if a == 0.0 {
            continue;
        }
        let s = h * a;
        for (oi, ki) in o.iter_mut().zip(k.as_slice()) {
            *oi += ki * s;
        }
    }
}

pub(crate) struct Integrator<F> {
    rhs: F,
    cfg: Stepping,
    k: [CMatrix; 7],
    tmp: CMatrix,
    y_new: CMatrix,
    h: f64,
    fsal_valid: bool,
    pub stats: StepStats,
}

impl<F> Integrator<F>
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    pub fn new(rhs: F, cfg: Stepping, shape: (usize, usize)) -> Self {
        let z = || CMatrix::zeros(shape.0, shape.1);
        Integrator {
            rhs,
            cfg,
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            y_new: z(),
            h: cfg.max_step,
            fsal_valid: false,
            stats: StepStats::default(),
        }
    }

    fn eval(&mut self, t: f64, stage: usize, use_tmp: bool) {
        let (input, out) = if use_tmp {
            (&self.tmp, &mut self.k[stage])
        } else {
            (&self.y_new, &mut self.k[stage])
        };
        (self.rhs)(t, input, out);
        self.stats.rhs_evals += 1;
    }

    /// Advance `y` from `t0` to exactly `t1`.
    pub fn advance(&mut self, y: &mut CMatrix, t0: f64, t1: f64) -> Result<()> {
        match self.cfg.method {
            Method::Rk4 => self.advance_rk4(y, t0, t1),
            Method::DormandPrince => self.advance_dp(y, t0, t1),
        }
    }

    /// Invalidate cached derivatives (after the caller modified `y`).
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    fn advance_rk4(&mut self, y: &mut CMatrix, t0: f64, t1: f64) -> Result<()> {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / self.cfg.max_step).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for step in 0..n {
            let t = t0 + step as f64 * h;
            self.tmp.copy_from(y);
            self.eval(t, 0, true);
            combine(&mut self.tmp, y, h, &[(0.5, &self.k[0])]);
            self.eval(t + 0.5 * h, 1, true);
            combine(&mut self.tmp, y, h, &[(0.5, &self.k[1])]);
            self.eval(t + 0.5 * h, 2, true);
            combine(&mut self.tmp, y, h, &[(1.0, &self.k[2])]);
            self.eval(t + h, 3, true);
            let w = [(1.0 / 6.0, 0), (1.0 / 3.0, 1), (1.0 / 3.0, 2), (1.0 / 6.0, 3)];
            let ys = y.as_mut_slice();
            for (c, i) in w {
                let s = C64::new(h * c, 0.0);
                for (yi, ki) in ys.iter_mut().zip(self.k[i].as_slice()) {
                    *yi += ki * s;
                }
            }
            self.stats.accepted += 1;
        }
        Ok(())
    }

    fn advance_dp(&mut self, y: &mut CMatrix, t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        let tol = self.cfg.tol;
        while t < t1 {
            let remaining = t1 - t;
            let mut h = self.h.min(self.cfg.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            if !self.fsal_valid {
                self.tmp.copy_from(y);
                self.eval(t, 0, true);
                self.fsal_valid = true;
            }
            let [k1, k2, k3, k4, k5, k6, _] = &mut self.k;
            combine(&mut self.tmp, y, h, &[(A21, k1)]);
            (self.rhs)(t + C2 * h, &self.tmp, k2);
            combine(&mut self.tmp, y, h, &[(A31, k1), (A32, k2)]);
            (self.rhs)(t + C3 * h, &self.tmp, k3);
            combine(&mut self.tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
            (self.rhs)(t + C4 * h, &self.tmp, k4);
            combine(&mut self.tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
            (self.rhs)(t + C5 * h, &self.tmp, k5);
            combine(&mut self.tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
            (self.rhs)(t + h, &self.tmp, k6);
            combine(&mut self.y_new, y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
            self.stats.rhs_evals += 5;
            let t_new = if last { t1 } else { t + h };
            self.eval(t_new, 6, false);

            let mut err: f64 = 0.0;
            {
                let k = &self.k;
                let ys = y.as_slice();
                let yn = self.y_new.as_slice();
                for i in 0..ys.len() {
                    let e = (k[0].as_slice()[i] * E1
                        + k[2].as_slice()[i] * E3
                        + k[3].as_slice()[i] * E4
                        + k[4].as_slice()[i] * E5
                        + k[5].as_slice()[i] * E6
                        + k[6].as_slice()[i] * E7)
                        * h;
                    let scale = tol + tol * ys[i].norm().max(yn[i].norm());
                    err = err.max(e.norm() / scale);
                }
            }

            if err <= 1.0 {
                y.copy_from(&self.y_new);
                self.k.swap(0, 6);
                t = t_new;
                self.stats.accepted += 1;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    self.h = (h * grow).min(self.cfg.max_step);
                } else {
                    self.h = self.h.max(h * grow.min(1.0)).min(self.cfg.max_step);
                }
            } else {
                self.stats.rejected += 1;
                let shrink = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                self.h = h * shrink;
                if self.h < self.cfg.min_step {
                    return Err(Error::StepFailure { t, step: self.h });
                }
            }
        }
        Ok(())
    }
}
