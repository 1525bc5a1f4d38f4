//! Symmetric positive-definite matrices `P(k)` with the affine-invariant
//! metric `<u, v>_p = Tr(p^-1 u p^-1 v)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{congruence, symmetrize, SymEigen};
use crate::manifold::{Manifold, ManifoldDescriptor, Tangent, MEMBERSHIP_TOL};

/// Eigenvalues below this are treated as singular.
pub const MIN_EIGENVALUE: f64 = 1e-14;

/// Lower sectional-curvature bound of `P(k)` under the affine-invariant metric.
pub const SPD_KAPPA_MIN: f64 = -0.5;

/// Draws inspected before the Wishart rejection sampler may give up.
const WISHART_PROBE: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SpdPoint(DMatrix<f64>);

impl SpdPoint {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn new_unchecked(m: DMatrix<f64>) -> Self {
        SpdPoint(m)
    }
}

pub type SymTangent = Tangent<Spd>;

/// Square root, inverse square root and eigenvalues of a base point.
struct Frame {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spd {
    k: usize,
}

impl Spd {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("matrix size must be positive"));
        }
        Ok(Spd { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn identity(&self) -> SpdPoint {
        SpdPoint(DMatrix::identity(self.k, self.k))
    }

    pub fn point(&self, m: DMatrix<f64>) -> Result<SpdPoint> {
        let p = SpdPoint(m);
        self.check_point(&p)?;
        Ok(p)
    }

    fn check_shape(&self, m: &DMatrix<f64>, what: &str) -> Result<()> {
        if m.nrows() != self.k || m.ncols() != self.k {
            return Err(Error::ContractViolation(format!(
                "{what} is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.k,
                self.k
            )));
        }
        Ok(())
    }

    fn frame(&self, p: &SpdPoint) -> Result<Frame> {
        self.check_shape(&p.0, "point")?;
        let e = SymEigen::new(&p.0);
        let min = e.min_value();
        if !(min >= MIN_EIGENVALUE) {
            return Err(Error::Conditioning { min_eigenvalue: min });
        }
        Ok(Frame {
            sqrt: e.map(f64::sqrt),
            inv_sqrt: e.map(|l| 1.0 / l.sqrt()),
        })
    }

    /// Matrix logarithm of `q^-1/2 p q^-1/2` (the "whitened" log).
    fn whitened_log(&self, frame: &Frame, p: &SpdPoint) -> Result<DMatrix<f64>> {
        self.check_shape(&p.0, "point")?;
        let w = congruence(&frame.inv_sqrt, &p.0);
        let e = SymEigen::new(&w);
        let min = e.min_value();
        if !(min >= MIN_EIGENVALUE) {
            return Err(Error::Conditioning { min_eigenvalue: min });
        }
        Ok(e.map(f64::ln))
    }

    /// Euclidean radius in `Sym_k` of a ball enclosing the geodesic ball
    /// `B_r(I)`: `e^r - 1`.
    pub fn ambient_radius(r: f64) -> f64 {
        r.exp_m1()
    }

    /// Wishart draw `W(V = I/k, df = k)` via the Bartlett decomposition.
    pub fn sample_wishart<R: Rng + ?Sized>(&self, rng: &mut R) -> SpdPoint {
        let k = self.k;
        let df = k as f64;
        let mut a = DMatrix::zeros(k, k);
        for i in 0..k {
            let chi = ChiSquared::new(df - i as f64).expect("positive degrees of freedom");
            a[(i, i)] = chi.sample(rng).sqrt();
            for j in 0..i {
                a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        SpdPoint(symmetrize(&(&a * a.transpose())) / df)
    }

    /// Rejection sampler: Wishart draws kept when within geodesic distance
    /// `r` of the identity, until `count` have been accepted.
    pub fn sample_wishart_ball<R: Rng + ?Sized>(
        &self,
        r: f64,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<SpdPoint>> {
        if !(r > 0.0) {
            return Err(Error::domain("sample_wishart_ball", format!("radius {r} must be positive")));
        }
        let id = self.identity();
        let mut out = Vec::with_capacity(count);
        let mut draws = 0usize;
        while out.len() < count {
            let w = self.sample_wishart(rng);
            draws += 1;
            // Near-singular draws are far outside any reasonable ball.
            if let Ok(d) = self.distance(&id, &w) {
                if d <= r {
                    out.push(w);
                }
            }
            if draws % WISHART_PROBE == 0 && (out.len() as f64) < 1e-4 * draws as f64 {
                return Err(Error::config(format!(
                    "Wishart acceptance rate {} / {draws} too low for radius {r}",
                    out.len()
                )));
            }
        }
        Ok(out)
    }
}

/// Half-vectorization: the lower triangle, column by column.
pub fn vech(m: &DMatrix<f64>) -> DVector<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for i in j..k {
            out.push(m[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`vech`].
pub fn unvech(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let len = v.len();
    let k = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if k == 0 || k * (k + 1) / 2 != len {
        return Err(Error::domain("unvech", format!("length {len} is not triangular")));
    }
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            m[(i, j)] = v[idx];
            m[(j, i)] = v[idx];
            idx += 1;
        }
    }
    Ok(m)
}

impl Manifold for Spd {
    type Point = SpdPoint;
    type Vector = DMatrix<f64>;

    fn descriptor(&self) -> ManifoldDescriptor {
        let d = self.k * (self.k + 1) / 2;
        ManifoldDescriptor {
            dimension: d,
            ambient_dimension: d,
            kappa_max: 0.0,
            kappa_min: SPD_KAPPA_MIN,
            injectivity_radius: f64::INFINITY,
        }
    }

    fn name(&self) -> &'static str {
        "spd"
    }

    fn check_point(&self, p: &SpdPoint) -> Result<()> {
        self.check_shape(&p.0, "point")?;
        let asym = (&p.0 - p.0.transpose()).amax();
        if !(asym <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "spd",
                reason: format!("asymmetry {asym:e}"),
            });
        }
        let min = SymEigen::new(&p.0).min_value();
        if !(min > 0.0) {
            return Err(Error::Membership {
                space: "spd",
                reason: format!("smallest eigenvalue {min:e}"),
            });
        }
        Ok(())
    }

    fn check_tangent(&self, v: &SymTangent) -> Result<()> {
        self.check_point(&v.base)?;
        self.check_shape(&v.vector, "tangent")?;
        let asym = (&v.vector - v.vector.transpose()).amax();
        if !(asym <= MEMBERSHIP_TOL) {
            return Err(Error::Membership {
                space: "Sym_k",
                reason: format!("asymmetry {asym:e}"),
            });
        }
        Ok(())
    }

    fn point_gap(&self, p: &SpdPoint, q: &SpdPoint) -> f64 {
        if p.0.shape() != q.0.shape() {
            return f64::INFINITY;
        }
        (&p.0 - &q.0).amax()
    }

    fn exp_map(&self, p: &SpdPoint, v: &SymTangent) -> Result<SpdPoint> {
        self.ensure_base(p, v)?;
        self.check_shape(&v.vector, "tangent")?;
        let f = self.frame(p)?;
        let inner = congruence(&f.inv_sqrt, &symmetrize(&v.vector));
        let e = SymEigen::new(&inner).map(f64::exp);
        Ok(SpdPoint(congruence(&f.sqrt, &e)))
    }

    fn log_map(&self, p: &SpdPoint, q: &SpdPoint) -> Result<SymTangent> {
        let f = self.frame(p)?;
        let l = self.whitened_log(&f, q)?;
        Ok(Tangent::new_unchecked(p.clone(), congruence(&f.sqrt, &l)))
    }

    fn distance(&self, p: &SpdPoint, q: &SpdPoint) -> Result<f64> {
        let f = self.frame(p)?;
        Ok(self.whitened_log(&f, q)?.norm())
    }

    fn inner(&self, p: &SpdPoint, u: &SymTangent, v: &SymTangent) -> Result<f64> {
        self.ensure_base(p, u)?;
        self.ensure_base(p, v)?;
        let f = self.frame(p)?;
        let a = congruence(&f.inv_sqrt, &u.vector);
        let b = congruence(&f.inv_sqrt, &v.vector);
        Ok(a.dot(&b))
    }

    fn project_tangent(&self, p: &SpdPoint, w: &DMatrix<f64>) -> SymTangent {
        Tangent::new_unchecked(p.clone(), symmetrize(w))
    }

    fn random_ambient<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |_, _| rng.sample(StandardNormal))
    }

    fn zero_tangent(&self, p: &SpdPoint) -> SymTangent {
        Tangent::new_unchecked(p.clone(), DMatrix::zeros(self.k, self.k))
    }

    fn mean_log(&self, x: &SpdPoint, points: &[SpdPoint]) -> Result<SymTangent> {
        let f = self.frame(x)?;
        let s = self.mean_whitened_log(&f, points)?;
        Ok(Tangent::new_unchecked(x.clone(), congruence(&f.sqrt, &s)))
    }

    fn mean_log_norm(&self, x: &SpdPoint, points: &[SpdPoint]) -> Result<f64> {
        // |x^1/2 S x^1/2|_x = |S|_F
        let f = self.frame(x)?;
        Ok(self.mean_whitened_log(&f, points)?.norm())
    }
}

impl Spd {
    fn mean_whitened_log(&self, f: &Frame, points: &[SpdPoint]) -> Result<DMatrix<f64>> {
        if points.is_empty() {
            return Err(Error::domain("mean_log", "empty point set"));
        }
        if self.k == 2 {
            return self.mean_whitened_log_2x2(f, points);
        }
        let mut acc = DMatrix::zeros(self.k, self.k);
        for q in points {
            acc += self.whitened_log(f, q)?;
        }
        Ok(acc / points.len() as f64)
    }

    /// Allocation-free path for `k = 2`, the hot loop of SPD sampling.
    fn mean_whitened_log_2x2(&self, f: &Frame, points: &[SpdPoint]) -> Result<DMatrix<f64>> {
        let (a00, a10, a11) = (f.inv_sqrt[(0, 0)], f.inv_sqrt[(1, 0)], f.inv_sqrt[(1, 1)]);
        let (mut s00, mut s10, mut s11) = (0.0, 0.0, 0.0);
        for q in points {
            self.check_shape(&q.0, "point")?;
            let m = &q.0;
            let (p00, p10, p11) = (m[(0, 0)], 0.5 * (m[(1, 0)] + m[(0, 1)]), m[(1, 1)]);
            // a * p, then (a * p) * a
            let (b00, b01) = (a00 * p00 + a10 * p10, a00 * p10 + a10 * p11);
            let (b10, b11) = (a10 * p00 + a11 * p10, a10 * p10 + a11 * p11);
            let w00 = b00 * a00 + b01 * a10;
            let w10 = 0.5 * (b10 * a00 + b11 * a10 + b00 * a10 + b01 * a11);
            let w11 = b10 * a10 + b11 * a11;
            let (l00, l10, l11) = log_sym2(w00, w10, w11)?;
            s00 += l00;
            s10 += l10;
            s11 += l11;
        }
        let n = points.len() as f64;
        Ok(DMatrix::from_row_slice(2, 2, &[s00 / n, s10 / n, s10 / n, s11 / n]))
    }
}

/// Matrix logarithm of `[[a, b], [b, c]]` from its closed-form spectrum:
/// `log W = ln(l2) I + g (W - l2 I)` with `g` the divided difference of `ln`.
fn log_sym2(a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
    let half = 0.5 * (a - c);
    let d = half.hypot(b);
    let l1 = 0.5 * (a + c) + d;
    let l2 = if l1 > 0.0 { (a * c - b * b) / l1 } else { l1 - 2.0 * d };
    if !(l2 >= MIN_EIGENVALUE) {
        return Err(Error::Conditioning { min_eigenvalue: l2 });
    }
    let x = 2.0 * d / l2;
    let g = if x == 0.0 { 1.0 / l2 } else { x.ln_1p() / (2.0 * d) };
    let ln2 = l2.ln();
    Ok((ln2 + g * (half + d), g * b, ln2 + g * (d - half)))
}
