//! The numerical flux family `K̂z = K{z} + A[z] + B[z]_t` with symmetric `A` and
//! anti-symmetric `B`, the block decomposition of `K`, and the interface form `F`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Exact symmetry tolerance for flux matrices.
pub const SYMMETRY_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct FluxSpec {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Outcome of [`FluxSpec::validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxReport {
    /// `max |A - A^T|`.
    pub asymmetry_a: f64,
    /// `max |B + B^T|`.
    pub symmetry_b: f64,
}

impl FluxReport {
    pub fn ok(&self) -> bool {
        self.asymmetry_a <= SYMMETRY_TOL && self.symmetry_b <= SYMMETRY_TOL
    }
}

impl FluxSpec {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::DimensionMismatch(format!(
                "flux matrices {:?} and {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok(FluxSpec { a, b })
    }

    /// `A = B = 0`.
    pub fn central(m: usize) -> Self {
        FluxSpec {
            a: DMatrix::zeros(m, m),
            b: DMatrix::zeros(m, m),
        }
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn has_b(&self) -> bool {
        self.b.iter().any(|v| *v != 0.0)
    }

    pub fn validate(&self) -> FluxReport {
        FluxReport {
            asymmetry_a: (&self.a - self.a.transpose()).amax(),
            symmetry_b: (&self.b + self.b.transpose()).amax(),
        }
    }
}

/// `K = Q^T [[0, 0, -Λ^T], [0, 0, 0], [Λ, 0, 0]] Q` (the middle row and column only
/// for odd `m`).
#[derive(Clone, Debug)]
pub struct KDecomposition {
    pub q: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
}

impl KDecomposition {
    pub fn m(&self) -> usize {
        self.q.nrows()
    }

    pub fn half(&self) -> usize {
        self.lambda.nrows()
    }

    /// The block matrix `Q K Q^T`.
    pub fn block_form(&self, lambda_sign: f64) -> DMatrix<f64> {
        let m = self.m();
        let r = self.half();
        let off = m - r;
        let mut blk = DMatrix::zeros(m, m);
        for i in 0..r {
            for j in 0..r {
                blk[(off + i, j)] = self.lambda[(i, j)];
                blk[(j, off + i)] = lambda_sign * self.lambda[(i, j)];
            }
        }
        blk
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.q.transpose() * self.block_form(-1.0) * &self.q
    }

    /// `Q^T diag(I, 1, -I) Q A`.
    pub fn tilde_a(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.m();
        let r = self.half();
        let mut d = DMatrix::identity(m, m);
        for i in m - r..m {
            d[(i, i)] = -1.0;
        }
        self.q.transpose() * d * &self.q * a
    }
}

fn check_antisymmetric(k: &DMatrix<f64>) -> Result<()> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!("K is {:?}", k.shape())));
    }
    let asym = (k + k.transpose()).amax();
    if asym > 1e-12 * k.amax().max(1.0) {
        return Err(Error::InvalidConfig(format!(
            "K is not anti-symmetric (max |K + K^T| = {asym:.3e})"
        )));
    }
    Ok(())
}

/// Orthogonal reduction of an anti-symmetric `K` to the paired block form with
/// diagonal non-negative `Λ`.
///
/// Eigenvectors `q` of `-K² = K^T K` with eigenvalue `λ² > 0` pair with
/// `p = K q / λ`; then `K q = λ p` and `K p = -λ q`. Rows of `Q` are
/// `(q_1, ..., q_r, [kernel vector], p_1, ..., p_r)`.
pub fn decompose_k(k: &DMatrix<f64>) -> Result<KDecomposition> {
    check_antisymmetric(k)?;
    let m = k.nrows();
    let r = m / 2;
    let scale = k.amax().max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::new(k.transpose() * k);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut picked: Vec<DVector<f64>> = Vec::new();
    let mut qs = Vec::new();
    let mut ps = Vec::new();
    let mut lambdas = Vec::new();
    let project_out = |v: &mut DVector<f64>, basis: &[DVector<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = v.dot(b);
                *v -= b * c;
            }
        }
    };
    for &i in &order {
        if qs.len() == r {
            break;
        }
        let lam2 = eig.eigenvalues[i].max(0.0);
        let lam = lam2.sqrt();
        if lam <= 1e-12 * scale {
            break;
        }
        let mut q = eig.eigenvectors.column(i).into_owned();
        project_out(&mut q, &picked);
        let nq = q.norm();
        if nq < 1e-8 {
            continue;
        }
        q /= nq;
        let p = k * &q / lam;
        picked.push(q.clone());
        picked.push(p.clone());
        qs.push(q);
        ps.push(p);
        lambdas.push(lam);
    }
    // remaining directions span the kernel; pair them with zero entries in Λ
    let mut kernel = Vec::new();
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        project_out(&mut e, &picked);
        project_out(&mut e, &kernel);
        let ne = e.norm();
        if ne > 1e-6 {
            kernel.push(e / ne);
        }
    }
    let mut kernel = kernel.into_iter();
    while qs.len() < r {
        qs.push(kernel.next().expect("kernel dimension"));
        ps.push(kernel.next().expect("kernel dimension"));
        lambdas.push(0.0);
    }
    let mut q = DMatrix::zeros(m, m);
    for (row, v) in qs.iter().enumerate() {
        q.set_row(row, &v.transpose());
    }
    if m % 2 == 1 {
        q.set_row(r, &kernel.next().expect("odd dimension has a kernel").transpose());
    }
    for (i, v) in ps.iter().enumerate() {
        q.set_row(m - r + i, &v.transpose());
    }
    let lambda = DMatrix::from_diagonal(&DVector::from_vec(lambdas));
    Ok(KDecomposition { q, lambda })
}

/// `A = α Q^T [[0, 0, Λ^T], [0, 0, 0], [Λ, 0, 0]] Q`.
pub fn alternating_a(dec: &KDecomposition, alpha: f64) -> Result<DMatrix<f64>> {
    if !(-0.5..=0.5).contains(&alpha) {
        return Err(Error::InvalidConfig(format!(
            "alternating parameter {alpha} outside [-1/2, 1/2]"
        )));
    }
    let a = dec.q.transpose() * dec.block_form(1.0) * &dec.q * alpha;
    Ok((&a + a.transpose()) * 0.5)
}

/// One-sided values at an interface: `z^-`, `z^+` and their time derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Traces {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    pub dt_minus: Vec<f64>,
    pub dt_plus: Vec<f64>,
}

impl Traces {
    pub fn new(minus: Vec<f64>, plus: Vec<f64>, dt_minus: Vec<f64>, dt_plus: Vec<f64>) -> Self {
        Traces {
            minus,
            plus,
            dt_minus,
            dt_plus,
        }
    }

    /// Traces with zero time derivatives.
    pub fn steady(minus: Vec<f64>, plus: Vec<f64>) -> Self {
        let m = minus.len();
        Traces::new(minus, plus, vec![0.0; m], vec![0.0; m])
    }

    pub fn m(&self) -> usize {
        self.minus.len()
    }

    pub fn avg(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.minus.iter().zip(&self.plus).map(|(a, b)| 0.5 * (a + b)))
    }

    pub fn jump(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.minus.iter().zip(&self.plus).map(|(a, b)| b - a))
    }

    pub fn jump_dt(&self) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.dt_minus.iter().zip(&self.dt_plus).map(|(a, b)| b - a))
    }

    fn check(&self, m: usize) -> Result<()> {
        if [&self.minus, &self.plus, &self.dt_minus, &self.dt_plus]
            .iter()
            .any(|v| v.len() != m)
        {
            return Err(Error::DimensionMismatch(format!("traces must have length {m}")));
        }
        Ok(())
    }
}

/// `K̂z = K{z} + A[z] + B[z]_t`.
pub fn eval_flux(k: &DMatrix<f64>, spec: &FluxSpec, z: &Traces) -> Result<DVector<f64>> {
    z.check(k.nrows())?;
    if spec.m() != k.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "flux for m = {} used with K of size {}",
            spec.m(),
            k.nrows()
        )));
    }
    Ok(k * z.avg() + &spec.a * z.jump() + &spec.b * z.jump_dt())
}

/// `F(z, ž) = {Kz·ž} - K̂z·{ž} + K̂ž·{z}`.
pub fn interface_form_f(k: &DMatrix<f64>, spec: &FluxSpec, z: &Traces, zc: &Traces) -> Result<f64> {
    let kz = eval_flux(k, spec, z)?;
    let kzc = eval_flux(k, spec, zc)?;
    zc.check(k.nrows())?;
    let zm = DVector::from_column_slice(&z.minus);
    let zp = DVector::from_column_slice(&z.plus);
    let cm = DVector::from_column_slice(&zc.minus);
    let cp = DVector::from_column_slice(&zc.plus);
    let kzz = 0.5 * ((k * &zm).dot(&cm) + (k * &zp).dot(&cp));
    Ok(kzz - kz.dot(&zc.avg()) + kzc.dot(&z.avg()))
}

/// `d/dt (B[ž]·[z])` from the supplied time-derivative traces.
pub fn b_jump_rate(spec: &FluxSpec, z: &Traces, zc: &Traces) -> f64 {
    (&spec.b * zc.jump_dt()).dot(&z.jump()) + (&spec.b * zc.jump()).dot(&z.jump_dt())
}

/// Residuals of the two interface identities
///
/// `Kz^-·ž^- - K̂z·ž^- + K̂ž·z^- = F(z, ž) - ½ (B[ž]·[z])_t` and
/// `Kz^+·ž^+ - K̂z·ž^+ + K̂ž·z^+ = F(z, ž) + ½ (B[ž]·[z])_t`.
pub fn interface_residuals(k: &DMatrix<f64>, spec: &FluxSpec, z: &Traces, zc: &Traces) -> Result<(f64, f64)> {
    let kz = eval_flux(k, spec, z)?;
    let kzc = eval_flux(k, spec, zc)?;
    let f = interface_form_f(k, spec, z, zc)?;
    let bt = b_jump_rate(spec, z, zc);
    let side = |zs: &[f64], cs: &[f64]| {
        let zs = DVector::from_column_slice(zs);
        let cs = DVector::from_column_slice(cs);
        (k * &zs).dot(&cs) - kz.dot(&cs) + kzc.dot(&zs)
    };
    let rm = side(&z.minus, &zc.minus) - f + 0.5 * bt;
    let rp = side(&z.plus, &zc.plus) - f - 0.5 * bt;
    Ok((rm, rp))
}
