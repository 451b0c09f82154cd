//! Explicit Runge-Kutta integration: Dormand-Prince 5(4) with dense output
//! and the classical fixed-step fourth-order method.

use crate::error::{Result, RodError};

/// First-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;

    /// Hook after every accepted step. Returns `true` if `y` was modified.
    fn accept(&mut self, _t: f64, _y: &mut [f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Adaptive {
        rtol: f64,
        atol: f64,
        h_max: f64,
    },
    /// Classical Runge-Kutta with constant step `h`.
    Fixed {
        h: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Explicit integrator driven by a [`StepControl`].
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub control: StepControl,
}

struct Work {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y1: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y1: vec![0.0; n],
        }
    }
}

impl Dopri5 {
    pub fn new(control: StepControl) -> Self {
        Self { control }
    }

    /// Integrates from `(t0, y0)` to `t_end`. `on_sample` receives the state at
    /// each of the increasing `sample_times` inside `[t0, t_end]`.
    pub fn integrate<S, F>(
        &self,
        sys: &mut S,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        sample_times: &[f64],
        mut on_sample: F,
    ) -> Result<(Vec<f64>, OdeStats)>
    where
        S: OdeSystem,
        F: FnMut(f64, &[f64]),
    {
        let n = sys.dim();
        if y0.len() != n {
            return Err(RodError::Dimension {
                expected: n,
                got: y0.len(),
            });
        }
        if !(t_end >= t0) {
            return Err(RodError::InvalidModel(
                "integration end before start".into(),
            ));
        }
        let mut samples = sample_times
            .iter()
            .copied()
            .filter(|&s| s >= t0 && s <= t_end)
            .peekable();
        while let Some(&s) = samples.peek() {
            if s > t0 {
                break;
            }
            on_sample(s, y0);
            samples.next();
        }
        let mut stats = OdeStats::default();
        let mut y = y0.to_vec();
        let mut w = Work::new(n);
        sys.rhs(t0, &y, &mut w.k[0])?;
        stats.rhs_evals += 1;
        let mut t = t0;
        match self.control {
            StepControl::Fixed { h } => {
                if !(h > 0.0) {
                    return Err(RodError::InvalidModel("step size must be positive".into()));
                }
                let mut dense = vec![0.0; n];
                let mut f1 = vec![0.0; n];
                while t < t_end {
                    let h = h.min(t_end - t);
                    rk4_step(sys, t, &y, h, &mut w, &mut stats)?;
                    let t1 = if t_end - (t + h) < 1e-12 * h {
                        t_end
                    } else {
                        t + h
                    };
                    sys.rhs(t1, &w.y1, &mut f1)?;
                    stats.rhs_evals += 1;
                    while let Some(&s) = samples.peek() {
                        if s > t1 {
                            break;
                        }
                        hermite(t, t1, &y, &w.k[0], &w.y1, &f1, s, &mut dense);
                        on_sample(s, &dense);
                        samples.next();
                    }
                    stats.accepted += 1;
                    t = t1;
                    y.copy_from_slice(&w.y1);
                    w.k[0].copy_from_slice(&f1);
                    if sys.accept(t, &mut y) {
                        sys.rhs(t, &y, &mut w.k[0])?;
                        stats.rhs_evals += 1;
                    }
                }
            }
            StepControl::Adaptive { rtol, atol, h_max } => {
                let mut h = initial_step(sys, t, &y, t_end, rtol, atol, h_max, &mut w, &mut stats)?;
                let mut dense = vec![0.0; n];
                let mut rcont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
                let mut last_rejected = false;
                while t < t_end {
                    if t + 1.01 * h >= t_end {
                        h = t_end - t;
                    }
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(RodError::StepSizeUnderflow { t, h });
                    }
                    dopri_stages(sys, t, &y, h, &mut w, &mut stats)?;
                    let err = error_norm(&y, &w, h, rtol, atol);
                    if !err.is_finite() {
                        h *= 0.2;
                        stats.rejected += 1;
                        last_rejected = true;
                        continue;
                    }
                    if err <= 1.0 {
                        let h_old = h;
                        for i in 0..n {
                            let dy = w.y1[i] - y[i];
                            let bspl = h * w.k[0][i] - dy;
                            rcont[0][i] = y[i];
                            rcont[1][i] = dy;
                            rcont[2][i] = bspl;
                            rcont[3][i] = dy - h * w.k[6][i] - bspl;
                            rcont[4][i] = h
                                * (D1 * w.k[0][i]
                                    + D3 * w.k[2][i]
                                    + D4 * w.k[3][i]
                                    + D5 * w.k[4][i]
                                    + D6 * w.k[5][i]
                                    + D7 * w.k[6][i]);
                        }
                        let t1 = if h == t_end - t { t_end } else { t + h };
                        while let Some(&s) = samples.peek() {
                            if s > t1 {
                                break;
                            }
                            let th = ((s - t) / h_old).clamp(0.0, 1.0);
                            let th1 = 1.0 - th;
                            for i in 0..n {
                                dense[i] = rcont[0][i]
                                    + th * (rcont[1][i]
                                        + th1
                                            * (rcont[2][i]
                                                + th * (rcont[3][i] + th1 * rcont[4][i])));
                            }
                            on_sample(s, &dense);
                            samples.next();
                        }
                        stats.accepted += 1;
                        t = t1;
                        y.copy_from_slice(&w.y1);
                        let k7 = std::mem::take(&mut w.k[6]);
                        w.k[6] = std::mem::replace(&mut w.k[0], k7);
                        if sys.accept(t, &mut y) {
                            sys.rhs(t, &y, &mut w.k[0])?;
                            stats.rhs_evals += 1;
                        }
                        let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
                        if last_rejected {
                            fac = fac.min(1.0);
                        }
                        h = (h_old * fac).min(h_max);
                        last_rejected = false;
                    } else {
                        h *= (0.9 * err.powf(-0.2)).max(0.2);
                        stats.rejected += 1;
                        last_rejected = true;
                    }
                }
            }
        }
        Ok((y, stats))
    }
}

fn rk4_step<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    h: f64,
    w: &mut Work,
    stats: &mut OdeStats,
) -> Result<()> {
    let n = y.len();
    let [k1, k2, k3, k4, ..] = &mut w.k;
    for i in 0..n {
        w.tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &w.tmp, k2)?;
    for i in 0..n {
        w.tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, &w.tmp, k3)?;
    for i in 0..n {
        w.tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(t + h, &w.tmp, k4)?;
    for i in 0..n {
        w.y1[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    stats.rhs_evals += 3;
    Ok(())
}

/// Cubic Hermite interpolation between two states with known slopes.
#[allow(clippy::too_many_arguments)]
fn hermite(
    t0: f64,
    t1: f64,
    y0: &[f64],
    f0: &[f64],
    y1: &[f64],
    f1: &[f64],
    s: f64,
    out: &mut [f64],
) {
    let h = t1 - t0;
    let th = ((s - t0) / h).clamp(0.0, 1.0);
    let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
    let h10 = th * (1.0 - th) * (1.0 - th);
    let h01 = th * th * (3.0 - 2.0 * th);
    let h11 = th * th * (th - 1.0);
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

fn dopri_stages<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    h: f64,
    w: &mut Work,
    stats: &mut OdeStats,
) -> Result<()> {
    let n = y.len();
    let [k1, k2, k3, k4, k5, k6, k7] = &mut w.k;
    let tmp = &mut w.tmp;
    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    sys.rhs(t + C2 * h, tmp, k2)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    sys.rhs(t + C3 * h, tmp, k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    sys.rhs(t + C4 * h, tmp, k4)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    sys.rhs(t + C5 * h, tmp, k5)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    sys.rhs(t + h, tmp, k6)?;
    for i in 0..n {
        w.y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    sys.rhs(t + h, &w.y1, k7)?;
    stats.rhs_evals += 6;
    Ok(())
}

fn error_norm(y: &[f64], w: &Work, h: f64, rtol: f64, atol: f64) -> f64 {
    let k = &w.k;
    let mut sum = 0.0;
    for i in 0..y.len() {
        let e = h
            * (E1 * k[0][i]
                + E3 * k[2][i]
                + E4 * k[3][i]
                + E5 * k[4][i]
                + E6 * k[5][i]
                + E7 * k[6][i]);
        let sc = atol + rtol * y[i].abs().max(w.y1[i].abs());
        sum += (e / sc).powi(2);
    }
    (sum / y.len() as f64).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn initial_step<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
    h_max: f64,
    w: &mut Work,
    stats: &mut OdeStats,
) -> Result<f64> {
    let n = y.len();
    let span = t_end - t;
    let h_max = h_max.min(span);
    if span == 0.0 {
        return Ok(0.0);
    }
    let sc: Vec<f64> = y.iter().map(|v| atol + rtol * v.abs()).collect();
    let rms = |v: &mut dyn Iterator<Item = f64>| (v.map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    let d0 = rms(&mut y.iter().zip(&sc).map(|(a, s)| a / s));
    let d1 = rms(&mut w.k[0].iter().zip(&sc).map(|(a, s)| a / s));
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(h_max);
    for i in 0..n {
        w.tmp[i] = y[i] + h0 * w.k[0][i];
    }
    sys.rhs(t + h0, &w.tmp, &mut w.k[1])?;
    stats.rhs_evals += 1;
    let d2 = rms(&mut (0..n).map(|i| (w.k[1][i] - w.k[0][i]) / sc[i])) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(h_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator {
        calls: usize,
    }

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }

        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            self.calls += 1;
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    #[test]
    fn dopri_harmonic_oscillator() {
        let mut sys = Oscillator { calls: 0 };
        let solver = Dopri5::new(StepControl::Adaptive {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 1.0,
        });
        let times: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let mut max_err: f64 = 0.0;
        let (y, stats) = solver
            .integrate(&mut sys, 0.0, &[1.0, 0.0], 10.0, &times, |t, y| {
                max_err = max_err
                    .max((y[0] - t.cos()).abs())
                    .max((y[1] + t.sin()).abs());
            })
            .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!(max_err < 1e-8, "dense output error {max_err}");
        assert_eq!(stats.rhs_evals, sys.calls);
    }

    #[test]
    fn rk4_order() {
        let mut errs = Vec::new();
        for h in [0.1, 0.05] {
            let mut sys = Oscillator { calls: 0 };
            let (y, _) = Dopri5::new(StepControl::Fixed { h })
                .integrate(&mut sys, 0.0, &[1.0, 0.0], 2.0, &[], |_, _| {})
                .unwrap();
            errs.push((y[0] - 2f64.cos()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 4.0).abs() < 0.3, "{order}");
    }

    #[test]
    fn dopri_fifth_order() {
        // error of a single step scales like h^6, global like h^5
        let mut errs = Vec::new();
        for tol in [1e-6, 1e-9] {
            let mut sys = Oscillator { calls: 0 };
            let (y, stats) = Dopri5::new(StepControl::Adaptive {
                rtol: tol,
                atol: tol,
                h_max: 10.0,
            })
            .integrate(&mut sys, 0.0, &[1.0, 0.0], 5.0, &[], |_, _| {})
            .unwrap();
            errs.push(((y[0] - 5f64.cos()).abs(), stats.accepted));
        }
        assert!(errs[1].0 < errs[0].0);
        assert!(errs[1].1 > errs[0].1);
    }

    struct Hook;

    impl OdeSystem for Hook {
        fn dim(&self) -> usize {
            1
        }

        fn rhs(&mut self, _t: f64, _y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = 1.0;
            Ok(())
        }

        fn accept(&mut self, _t: f64, y: &mut [f64]) -> bool {
            if y[0] > 1.0 {
                y[0] -= 1.0;
                true
            } else {
                false
            }
        }
    }

    #[test]
    fn accept_hook_wraps_state() {
        let (y, _) = Dopri5::new(StepControl::Fixed { h: 0.1 })
            .integrate(&mut Hook, 0.0, &[0.0], 2.55, &[], |_, _| {})
            .unwrap();
        assert!((y[0] - 0.55).abs() < 1e-12);
    }
}
