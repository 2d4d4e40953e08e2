//! Dormand–Prince 5(4) with PI step-size control.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { atol: 1e-10, rtol: 1e-10, h0: 1e-2, max_steps: 200_000 }
    }
}

/// What the per-step observer wants the driver to do next.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Debug)]
pub struct OdeStats {
    pub t: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub stopped_early: bool,
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates y' = f(t, y) from t0 to t1 (either direction) in place.
/// `observe` sees every accepted step and may stop the integration.
pub fn integrate<F, O>(
    f: F,
    t0: f64,
    t1: f64,
    y: &mut [f64],
    opts: OdeOptions,
    mut observe: O,
) -> Result<OdeStats>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(f64, &[f64]) -> Result<Control>,
{
    let n = y.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut h = opts.h0.min(span).max(1e-300);
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut stats = OdeStats { t, accepted: 0, rejected: 0, stopped_early: false };
    let mut err_prev: f64 = 1e-4;
    f(t, y, &mut k1)?;
    if span == 0.0 {
        return Ok(stats);
    }
    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Step(format!("step budget exhausted at t = {t}")));
        }
        let remaining = (t1 - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;
        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + hs, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i]
                + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + hs, &ynew, &mut k7)?;
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::Step(format!("non-finite derivative near t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y.copy_from_slice(&ynew);
            k1.copy_from_slice(&k7);
            stats.accepted += 1;
            stats.t = t;
            if observe(t, y)? == Control::Stop {
                stats.stopped_early = true;
                return Ok(stats);
            }
            if last {
                return Ok(stats);
            }
            // PI controller (Hairer's defaults).
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-4);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::Step(format!("step size underflow at t = {t}")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let mut y = [1.0, 0.0];
        let opts = OdeOptions { atol: 1e-12, rtol: 1e-12, ..Default::default() };
        integrate(
            |_, y: &[f64], d: &mut [f64]| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            10.0,
            &mut y,
            opts,
            |_, _| Ok(Control::Continue),
        )
        .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn backward_direction() {
        let mut y = [1.0];
        integrate(
            |_, y: &[f64], d: &mut [f64]| {
                d[0] = y[0];
                Ok(())
            },
            0.0,
            -2.0,
            &mut y,
            OdeOptions::default(),
            |_, _| Ok(Control::Continue),
        )
        .unwrap();
        assert!((y[0] - (-2f64).exp()).abs() < 1e-9);
    }
}
