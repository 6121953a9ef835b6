//! Explicit Runge–Kutta stepping and a filtered SSPRK3 variant.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An explicit Butcher tableau.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    pub name: &'static str,
    /// Strictly lower-triangular stage matrix, row `i` has `i` entries.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl Tableau {
    pub fn euler() -> Self {
        Tableau {
            name: "euler",
            a: vec![vec![]],
            b: vec![1.0],
            c: vec![0.0],
            order: 1,
        }
    }

    pub fn heun2() -> Self {
        Tableau {
            name: "heun2",
            a: vec![vec![], vec![1.0]],
            b: vec![0.5, 0.5],
            c: vec![0.0, 1.0],
            order: 2,
        }
    }

    /// Shu–Osher SSPRK3 in Butcher form.
    pub fn ssprk3() -> Self {
        Tableau {
            name: "ssprk3",
            a: vec![vec![], vec![1.0], vec![0.25, 0.25]],
            b: vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            c: vec![0.0, 1.0, 0.5],
            order: 3,
        }
    }

    pub fn rk4() -> Self {
        Tableau {
            name: "rk4",
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
            order: 4,
        }
    }

    /// Butcher's six-stage fifth-order method.
    pub fn rk5() -> Self {
        Tableau {
            name: "rk5",
            a: vec![
                vec![],
                vec![0.25],
                vec![0.125, 0.125],
                vec![0.0, -0.5, 1.0],
                vec![3.0 / 16.0, 0.0, 0.0, 9.0 / 16.0],
                vec![-3.0 / 7.0, 2.0 / 7.0, 12.0 / 7.0, -12.0 / 7.0, 8.0 / 7.0],
            ],
            b: [7.0, 0.0, 32.0, 12.0, 32.0, 7.0].iter().map(|v| v / 90.0).collect(),
            c: vec![0.0, 0.25, 0.25, 0.5, 0.75, 1.0],
            order: 5,
        }
    }

    /// The shipped tableau of a given order (1 to 5).
    pub fn of_order(p: usize) -> Result<Self> {
        match p {
            1 => Ok(Self::euler()),
            2 => Ok(Self::heun2()),
            3 => Ok(Self::ssprk3()),
            4 => Ok(Self::rk4()),
            5 => Ok(Self::rk5()),
            _ => Err(Error::InvalidConfig(format!("no explicit RK tableau of order {p}"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Exponential modal damping: coefficient `i` of every cell block is scaled by
/// `exp(-s (i/k)^{2q} dt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Filter {
    pub strength: f64,
    #[serde(default = "default_filter_order")]
    pub order: u32,
}

fn default_filter_order() -> u32 {
    Filter::DEFAULT.order
}

impl Filter {
    /// Damps essentially only the top mode; smooth solutions on the peakon
    /// meshes move by less than 1e-8 over unit time.
    pub const DEFAULT: Filter = Filter {
        strength: 1.0,
        order: 8,
    };
}

impl Default for Filter {
    fn default() -> Self {
        Filter::DEFAULT
    }
}

impl Filter {
    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0 && self.strength.is_finite()) || self.order < 1 {
            return Err(Error::InvalidConfig(format!(
                "filter needs strength >= 0 and order >= 1, got {:?}",
                self
            )));
        }
        Ok(())
    }

    /// Damping factors for a block of `k + 1` modes.
    pub fn factors(&self, k: usize, dt: f64) -> Vec<f64> {
        (0..=k)
            .map(|i| {
                if k == 0 {
                    1.0
                } else {
                    let r = i as f64 / k as f64;
                    (-self.strength * r.powi(2 * self.order as i32) * dt).exp()
                }
            })
            .collect()
    }

    /// Applies the filter to a state made of DG fields with `k + 1` modes per cell.
    pub fn apply(&self, y: &mut [f64], k: usize, dt: f64) {
        if self.strength == 0.0 {
            return;
        }
        let f = self.factors(k, dt);
        for block in y.chunks_mut(k + 1) {
            block.iter_mut().zip(&f).for_each(|(v, g)| *v *= g);
        }
    }
}

/// A right-hand side `dy/dt = f(t, y)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64]) -> Result<Vec<f64>>;
}

impl<F> Rhs for F
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    fn eval(&mut self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        self(t, y)
    }
}

/// One explicit RK step from `(t, y)`.
pub fn rk_step(f: &mut impl Rhs, t: f64, y: &[f64], dt: f64, tab: &Tableau) -> Result<Vec<f64>> {
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(tab.stages());
    let mut stage = y.to_vec();
    for i in 0..tab.stages() {
        stage.copy_from_slice(y);
        for (j, &a) in tab.a[i].iter().enumerate() {
            if a != 0.0 {
                stage.iter_mut().zip(&ks[j]).for_each(|(s, k)| *s += dt * a * k);
            }
        }
        ks.push(f.eval(t + tab.c[i] * dt, &stage)?);
    }
    let mut out = y.to_vec();
    for (k, &b) in ks.iter().zip(&tab.b) {
        if b != 0.0 {
            out.iter_mut().zip(k).for_each(|(o, v)| *o += dt * b * v);
        }
    }
    Ok(out)
}

/// Shu–Osher SSPRK3 with the filter applied after every stage.
pub fn ssprk3_filtered_step(
    f: &mut impl Rhs,
    t: f64,
    y: &[f64],
    dt: f64,
    filter: &Filter,
    k: usize,
) -> Result<Vec<f64>> {
    let k1 = f.eval(t, y)?;
    let mut y1: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + dt * b).collect();
    filter.apply(&mut y1, k, dt);
    let k2 = f.eval(t + dt, &y1)?;
    let mut y2: Vec<f64> = y
        .iter()
        .zip(&y1)
        .zip(&k2)
        .map(|((a, b), c)| 0.75 * a + 0.25 * (b + dt * c))
        .collect();
    filter.apply(&mut y2, k, dt);
    let k3 = f.eval(t + 0.5 * dt, &y2)?;
    let mut y3: Vec<f64> = y
        .iter()
        .zip(&y2)
        .zip(&k3)
        .map(|((a, b), c)| a / 3.0 + 2.0 / 3.0 * (b + dt * c))
        .collect();
    filter.apply(&mut y3, k, dt);
    Ok(y3)
}

/// Time stepping method.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Rk(Tableau),
    /// SSPRK3 with post-stage filtering of fields of polynomial degree `k`.
    FilteredSsprk3 { filter: Filter, k: usize },
}

impl Method {
    pub fn step(&self, f: &mut impl Rhs, t: f64, y: &[f64], dt: f64) -> Result<Vec<f64>> {
        match self {
            Method::Rk(tab) => rk_step(f, t, y, dt, tab),
            Method::FilteredSsprk3 { filter, k } => ssprk3_filtered_step(f, t, y, dt, filter, *k),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Method::Rk(tab) => tab.order,
            Method::FilteredSsprk3 { .. } => 3,
        }
    }
}

/// Fixed-step march from `t0` to `t_end`. The last step is shortened to land on `t_end`.
///
/// `observe(step, t, y)` is called at the start, every `stride` steps and at the end.
pub fn integrate(
    f: &mut impl Rhs,
    method: &Method,
    y0: Vec<f64>,
    t0: f64,
    t_end: f64,
    dt: f64,
    stride: usize,
    mut observe: impl FnMut(usize, f64, &[f64]) -> Result<()>,
) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= t0) {
        return Err(Error::InvalidConfig(format!("final time {t_end} before start {t0}")));
    }
    let stride = stride.max(1);
    let span = t_end - t0;
    let mut n_steps = (span / dt).ceil() as usize;
    // avoid a sliver step from rounding of span/dt
    if n_steps > 0 && span - (n_steps - 1) as f64 * dt <= 1e-10 * dt {
        n_steps -= 1;
    }
    let mut y = y0;
    observe(0, t0, &y)?;
    for step in 1..=n_steps {
        let t = t0 + (step - 1) as f64 * dt;
        let t_next = if step == n_steps { t_end } else { t0 + step as f64 * dt };
        y = method.step(f, t, &y, t_next - t)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { step, time: t_next });
        }
        if step % stride == 0 || step == n_steps {
            observe(step, t_next, &y)?;
        }
    }
    Ok(y)
}
