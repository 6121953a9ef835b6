//! Closed-form profiles used as initial data and reference solutions.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Complete elliptic integral of the first kind, `K(m) = π / (2 agm(1, sqrt(1-m)))`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidConfig(format!("elliptic parameter {m} outside [0, 1)")));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(PI / (2.0 * a))
}

/// Jacobi elliptic functions `(sn, cn, dn)(u | m)` by the descending Landen (AGM) scheme.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> (f64, f64, f64) {
    if m < 1e-16 {
        return (u.sin(), u.cos(), 1.0);
    }
    if (1.0 - m).abs() < 1e-16 {
        let s = 1.0 / u.cosh();
        return (u.tanh(), s, s);
    }
    let mut a = vec![1.0f64];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > 1e-15 && a.len() < 40 {
        let an = a.last().unwrap();
        let next_a = 0.5 * (an + b);
        let next_c = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(next_c);
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    let mut prev = phi;
    for i in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = (phi.sin(), phi.cos());
    let dn = if n == 0 { (1.0 - m * sn * sn).sqrt() } else { cn / (prev - phi).cos() };
    (sn, cn, dn)
}

pub fn jacobi_cn(u: f64, m: f64) -> f64 {
    jacobi_sn_cn_dn(u, m).1
}

/// Speed and position of one travelling wave.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub c: f64,
    pub x0: f64,
}

/// Reference profiles `u(x, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(sin(x + t))`.
    ExpSine,
    /// `(sin(cos(x + t)) + sin(cos(x - t))) / 2`.
    SinCos,
    /// `a sin(κ (x + c t))`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
        #[serde(default = "one")]
        speed: f64,
    },
    /// BBM cnoidal wave `3mc/(2m-1) cn²((x - ct - x0) / sqrt(4(2m-1)σ); m)`.
    Cnoidal { m: f64, c: f64, x0: f64, sigma: f64 },
    /// Sum of BBM solitary waves `3c sech²(½ sqrt(1/σ)(x - x0 - ct))`.
    BbmSolitons { sigma: f64, waves: Vec<Wave> },
    /// Sum of periodic Camassa–Holm peakons on `(0, x_r)`.
    Peakons { period: f64, waves: Vec<Wave> },
    /// KdV soliton `(3c/η) sech²(sqrt(c)/(2ε) (x - x0 - ct))` of
    /// `u_t + η u u_x + ε² u_xxx = 0`.
    KdvSoliton { eta: f64, eps: f64, c: f64, x0: f64 },
    /// NLS plane wave `p + iq = a exp(i(κx - ωt))`, `ω = κ² - α a²`.
    PlaneWave { amplitude: f64, wavenumber: f64, alpha: f64 },
    /// `a exp(-((x - x0)/w)²)`, not a solution of anything.
    Gaussian { amplitude: f64, center: f64, width: f64 },
}

fn one() -> f64 {
    1.0
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn peakon(xi: f64, period: f64, c: f64) -> (f64, f64) {
    let arg = -xi + period * (xi / period + 0.5).floor();
    let s = c / (0.5 * period).cosh();
    (s * arg.cosh(), -s * arg.sinh())
}

impl Profile {
    /// `(u, u_x, u_t)` at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        match self {
            Profile::ExpSine => {
                let e = (x + t).sin().exp();
                let d = (x + t).cos() * e;
                (e, d, d)
            }
            Profile::SinCos => {
                let (a, b) = (x + t, x - t);
                let da = -a.sin() * a.cos().cos();
                let db = -b.sin() * b.cos().cos();
                (0.5 * (a.cos().sin() + b.cos().sin()), 0.5 * (da + db), 0.5 * (da - db))
            }
            Profile::Sine {
                amplitude,
                wavenumber,
                speed,
            } => {
                let th = wavenumber * (x + speed * t);
                let d = amplitude * wavenumber * th.cos();
                (amplitude * th.sin(), d, d * speed)
            }
            Profile::Cnoidal { m, c, x0, sigma } => {
                let width = (4.0 * (2.0 * m - 1.0) * sigma).sqrt();
                let amp = 3.0 * m * c / (2.0 * m - 1.0);
                let (sn, cn, dn) = jacobi_sn_cn_dn((x - c * t - x0) / width, *m);
                let ux = -2.0 * amp * cn * sn * dn / width;
                (amp * cn * cn, ux, -c * ux)
            }
            Profile::BbmSolitons { sigma, waves } => {
                let kappa = 0.5 / sigma.sqrt();
                waves.iter().fold((0.0, 0.0, 0.0), |acc, w| {
                    let s = sech(kappa * (x - w.x0 - w.c * t));
                    let th = (kappa * (x - w.x0 - w.c * t)).tanh();
                    let u = 3.0 * w.c * s * s;
                    let ux = -2.0 * kappa * u * th;
                    (acc.0 + u, acc.1 + ux, acc.2 - w.c * ux)
                })
            }
            Profile::Peakons { period, waves } => waves.iter().fold((0.0, 0.0, 0.0), |acc, w| {
                let (u, ux) = peakon(x - w.x0 - w.c * t, *period, w.c);
                (acc.0 + u, acc.1 + ux, acc.2 - w.c * ux)
            }),
            Profile::KdvSoliton { eta, eps, c, x0 } => {
                let kappa = c.sqrt() / (2.0 * eps);
                let s = sech(kappa * (x - x0 - c * t));
                let th = (kappa * (x - x0 - c * t)).tanh();
                let u = 3.0 * c / eta * s * s;
                let ux = -2.0 * kappa * u * th;
                (u, ux, -c * ux)
            }
            Profile::PlaneWave {
                amplitude,
                wavenumber,
                alpha,
            } => {
                let omega = wavenumber * wavenumber - alpha * amplitude * amplitude;
                let th = wavenumber * x - omega * t;
                (
                    amplitude * th.cos(),
                    -amplitude * wavenumber * th.sin(),
                    amplitude * omega * th.sin(),
                )
            }
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let r = (x - center) / width;
                let u = amplitude * (-r * r).exp();
                (u, -2.0 * r / width * u, 0.0)
            }
        }
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.eval(x, t).0
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        self.eval(x, t).1
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        self.eval(x, t).2
    }

    /// Imaginary part `q` for complex profiles, zero otherwise.
    pub fn imag(&self, x: f64, t: f64) -> f64 {
        match self {
            Profile::PlaneWave {
                amplitude,
                wavenumber,
                alpha,
            } => {
                let omega = wavenumber * wavenumber - alpha * amplitude * amplitude;
                amplitude * (wavenumber * x - omega * t).sin()
            }
            _ => 0.0,
        }
    }

    /// Whether `u(x, t)` solves the model it is paired with (so errors are meaningful).
    pub fn is_exact(&self) -> bool {
        match self {
            Profile::BbmSolitons { waves, .. } | Profile::Peakons { waves, .. } => waves.len() == 1,
            Profile::Gaussian { .. } => false,
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Profile::Cnoidal { m, sigma, .. } => {
                if !(*m > 0.5 && *m < 1.0) || *sigma <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "cnoidal profile needs 1/2 < m < 1 and σ > 0 (m = {m}, σ = {sigma})"
                    )));
                }
            }
            Profile::BbmSolitons { sigma, .. } if *sigma <= 0.0 => {
                return Err(Error::InvalidConfig("soliton profile needs σ > 0".into()));
            }
            Profile::Peakons { period, .. } if *period <= 0.0 => {
                return Err(Error::InvalidConfig("peakon period must be positive".into()));
            }
            Profile::KdvSoliton { eta, eps, c, .. } if *eta == 0.0 || *eps == 0.0 || *c <= 0.0 => {
                return Err(Error::InvalidConfig("KdV soliton needs η, ε ≠ 0 and c > 0".into()));
            }
            Profile::Gaussian { width, .. } if *width <= 0.0 => {
                return Err(Error::InvalidConfig("gaussian width must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Period `4 K(m) sqrt(σ(2m-1))` of the cnoidal profile.
pub fn cnoidal_period(m: f64, sigma: f64) -> Result<f64> {
    Ok(4.0 * elliptic_k(m)? * (sigma * (2.0 * m - 1.0)).sqrt())
}
