//! Quaternion scalars and dense quaternion matrices.
//!
//! Everything downstream reduces quaternionic linear algebra to real linear
//! algebra through the left-multiplication embedding: a quaternion becomes a
//! 4×4 real matrix, an m×n quaternion matrix becomes a 4m×4n real matrix, and
//! the embedding is an algebra homomorphism that preserves Euclidean norms of
//! vectors. Operator norms are exact largest singular values of the embedded
//! matrix, and spectral information (maximal real part of eigenvalues) is
//! read off the embedded matrix as well.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quaternion w + x·i + y·j + z·k over f64 coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Modulus |q| = sqrt(w² + x² + y² + z²).
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn re(self) -> f64 {
        self.w
    }

    /// Norm of the imaginary part.
    pub fn imag_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_real(self, tol: f64) -> bool {
        self.imag_norm() <= tol * (1.0 + self.w.abs())
    }

    /// True for a unit imaginary: |q| = 1 and Re q = 0 (so q² = −1).
    pub fn is_unit_imaginary(self, tol: f64) -> bool {
        self.w.abs() <= tol && (self.norm() - 1.0).abs() <= tol
    }

    pub fn inverse(self) -> Option<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            None
        } else {
            Some(self.conj() * (1.0 / n2))
        }
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Writes q = w + u·b with b = |imag| ≥ 0 and u the unit imaginary
    /// direction (arbitrary i when b = 0).
    fn polar_split(self) -> (f64, Quaternion, f64) {
        let b = self.imag_norm();
        if b == 0.0 {
            (self.w, I, 0.0)
        } else {
            let u = Quaternion::new(0.0, self.x / b, self.y / b, self.z / b);
            (self.w, u, b)
        }
    }

    /// Lifts a complex function along the embedded copy of ℂ spanned by the
    /// quaternion's own imaginary direction. Returns None when the input is
    /// real but the principal value leaves the real axis (e.g. ln of a
    /// negative real), since no imaginary direction is distinguished.
    fn complex_lift(self, f: impl Fn(Complex64) -> Complex64) -> Option<Quaternion> {
        let (a, u, b) = self.polar_split();
        let r = f(Complex64::new(a, b));
        if b == 0.0 && r.im.abs() > 1e-14 * (1.0 + r.re.abs()) {
            return None;
        }
        Some(Quaternion::real(r.re) + u * r.im)
    }

    pub fn exp(self) -> Quaternion {
        self.complex_lift(Complex64::exp).expect("exp is entire")
    }

    pub fn sin(self) -> Quaternion {
        self.complex_lift(Complex64::sin).expect("sin is entire")
    }

    pub fn cos(self) -> Quaternion {
        self.complex_lift(Complex64::cos).expect("cos is entire")
    }

    pub fn ln(self) -> Option<Quaternion> {
        if self.norm() == 0.0 {
            return None;
        }
        self.complex_lift(Complex64::ln)
    }

    pub fn sqrt(self) -> Option<Quaternion> {
        self.complex_lift(Complex64::sqrt)
    }

    pub fn powi(self, n: i64) -> Option<Quaternion> {
        if n < 0 {
            return self.inverse().and_then(|inv| inv.powi(-n));
        }
        let mut acc = ONE;
        let mut base = self;
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    }

    /// q^p for a real exponent: exact integer powers, exp(p·ln q) otherwise.
    pub fn powf(self, p: f64) -> Option<Quaternion> {
        if p.fract() == 0.0 && p.abs() < 1e15 {
            return self.powi(p as i64);
        }
        if self.norm() == 0.0 {
            return if p > 0.0 { Some(ZERO) } else { None };
        }
        Some((self.ln()? * p).exp())
    }

    /// The 4×4 real matrix of left multiplication by q, acting on the
    /// coefficient vector (w, x, y, z). Satisfies L(ab) = L(a)·L(b) and
    /// L(q̄) = L(q)ᵀ.
    pub fn left_matrix(self) -> [[f64; 4]; 4] {
        let Quaternion { w, x, y, z } = self;
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product: i² = j² = k² = ijk = −1, ij = −ji = k.
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

/// Dense quaternion matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Self {
        let r = rows.len();
        assert!(r > 0, "matrix must have at least one row");
        let c = rows[0].len();
        assert!(c > 0 && rows.iter().all(|row| row.len() == c));
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn diagonal(d: &[Quaternion]) -> Self {
        Self::from_fn(d.len(), d.len(), |r, c| if r == c { d[r] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        self.data[r * self.cols + c] = q;
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    /// Conjugate transpose M*.
    pub fn dagger(&self) -> QMatrix {
        QMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * s)
    }

    /// Left scalar multiple q·M (order matters over the quaternions).
    pub fn scale_left(&self, q: Quaternion) -> QMatrix {
        QMatrix::from_fn(self.rows, self.cols, |r, c| q * self.get(r, c))
    }

    pub fn add(&self, o: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + o.get(r, c))
    }

    pub fn sub(&self, o: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) - o.get(r, c))
    }

    pub fn mul(&self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, o.rows, "inner dimensions must agree");
        QMatrix::from_fn(self.rows, o.cols, |r, c| {
            let mut acc = ZERO;
            for k in 0..self.cols {
                acc = acc + self.get(r, k) * o.get(k, c);
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Quaternion]) -> Vec<Quaternion> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = ZERO;
                for k in 0..self.cols {
                    acc = acc + self.get(r, k) * v[k];
                }
                acc
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// The 4·rows × 4·cols real matrix with L(M_rc) blocks. An algebra
    /// homomorphism; Euclidean norms of embedded vectors equal quaternionic
    /// norms, so operator norms transfer exactly.
    pub fn real_embedding(&self) -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(4 * self.rows, 4 * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let block = self.get(r, c).left_matrix();
                for (br, row) in block.iter().enumerate() {
                    for (bc, v) in row.iter().enumerate() {
                        m[(4 * r + br, 4 * c + bc)] = *v;
                    }
                }
            }
        }
        m
    }

    /// Operator norm sup ‖M𝔮‖ / ‖𝔮‖, computed as the largest singular value
    /// of the real embedding.
    pub fn op_norm(&self) -> f64 {
        let sv = self.real_embedding().svd(false, false).singular_values;
        sv.iter().cloned().fold(0.0, f64::max)
    }

    /// True iff ‖MM* − M*M‖ ≤ tol · ‖M‖².
    pub fn is_normal(&self, tol: f64) -> bool {
        assert!(self.is_square(), "normality is defined for square matrices");
        let d = self.dagger();
        let comm = self.mul(&d).sub(&d.mul(self));
        let scale = self.op_norm();
        comm.op_norm() <= tol * scale * scale + f64::MIN_POSITIVE
    }

    /// True iff UU* and U*U are within tol of the identity, in operator norm.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.unitarity_residual() <= tol
    }

    pub fn unitarity_residual(&self) -> f64 {
        let id = QMatrix::identity(self.rows);
        let d = self.dagger();
        let r1 = self.mul(&d).sub(&id).op_norm();
        let r2 = d.mul(self).sub(&id).op_norm();
        r1.max(r2)
    }

    /// Largest real part over the eigenvalues of the matrix (the right
    /// spectrum has constant real part on each similarity class, and the
    /// real embedding's spectrum consists of those classes and their
    /// conjugates, so the maximum transfers exactly).
    ///
    /// The embedding is reduced before the eigen-solve: a real matrix keeps
    /// its own n×n form and a matrix within one complex subfield uses the
    /// 2n×2n realification. Besides being cheaper, this avoids the 4-fold
    /// artificial eigenvalue multiplicity of the full embedding, on which
    /// QR iteration can stall.
    pub fn max_re_eigenvalue(&self) -> Result<f64> {
        assert!(self.is_square());
        let n = self.rows;
        let scale = self.max_entry_norm();
        if scale == 0.0 {
            // The eigenvalue iteration also stalls on the zero matrix.
            return Ok(0.0);
        }
        let imag_scale = self
            .data
            .iter()
            .map(|q| q.imag_norm())
            .fold(0.0, f64::max);
        let real = if imag_scale <= 1e-14 * scale {
            DMatrix::<f64>::from_fn(n, n, |r, c| self.get(r, c).re())
        } else if let Some(j) = self.common_complex_structure(1e-13) {
            // q = α + Jβ ↦ [[α, −β], [β, α]] blocks.
            let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
            for r in 0..n {
                for c in 0..n {
                    let q = self.get(r, c);
                    let alpha = q.re();
                    let beta = q.x * j.x + q.y * j.y + q.z * j.z;
                    m[(r, c)] = alpha;
                    m[(r, n + c)] = -beta;
                    m[(n + r, c)] = beta;
                    m[(n + r, n + c)] = alpha;
                }
            }
            m
        } else {
            self.real_embedding()
        };
        let eig = real.complex_eigenvalues();
        eig.iter()
            .map(|l| l.re)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
            .ok_or_else(|| Error::Eigen("empty spectrum".into()))
    }

    /// Largest eigenvalue of the Hermitian part (M + M*)/2.
    pub fn hermitian_part_max_eigenvalue(&self) -> f64 {
        assert!(self.is_square());
        let h = self.add(&self.dagger()).scale(0.5);
        let emb = h.real_embedding();
        // The embedding of a Hermitian quaternion matrix is real symmetric.
        let sym = (&emb + emb.transpose()).scale(0.5);
        let eig = sym.symmetric_eigen().eigenvalues;
        eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Finds a unit imaginary J such that every entry lies in the complex
    /// subfield ℂ_J = {α + Jβ}. Real matrices report J = i. Returns None
    /// when the imaginary directions of the entries are not collinear.
    pub fn common_complex_structure(&self, tol: f64) -> Option<Quaternion> {
        let scale = self.max_entry_norm().max(1e-300);
        let mut axis: Option<[f64; 3]> = None;
        for q in &self.data {
            let v = [q.x, q.y, q.z];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n <= tol * scale {
                continue;
            }
            let u = [v[0] / n, v[1] / n, v[2] / n];
            match axis {
                None => axis = Some(u),
                Some(a) => {
                    let dot = a[0] * u[0] + a[1] * u[1] + a[2] * u[2];
                    let perp = (1.0 - dot * dot).max(0.0).sqrt();
                    if perp > tol.max(1e-12) {
                        return None;
                    }
                }
            }
        }
        let a = axis.unwrap_or([1.0, 0.0, 0.0]);
        Some(Quaternion::new(0.0, a[0], a[1], a[2]))
    }
}

/// Stacks quaternion components of a vector into a real 4n vector; the
/// Euclidean norm equals the quaternionic norm ‖𝔮‖.
pub fn embed_vector(v: &[Quaternion]) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * v.len());
    for q in v {
        out.extend_from_slice(&[q.w, q.x, q.y, q.z]);
    }
    out
}

pub fn unembed_vector(v: &[f64]) -> Vec<Quaternion> {
    assert_eq!(v.len() % 4, 0);
    v.chunks_exact(4)
        .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
        .collect()
}

pub fn vector_norm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm of exp(M) for M = U diag{m_1, …, m_n} U*, together with the
/// spectral bound exp(max Re m_l) that dominates it. U must be unitary.
pub fn exp_norm_bound(u: &QMatrix, m: &[Quaternion], tol: f64) -> Result<(f64, f64)> {
    if !u.is_square() || u.rows() != m.len() {
        return Err(Error::Dimension(format!(
            "U is {}x{} but {} diagonal entries were given",
            u.rows(),
            u.cols(),
            m.len()
        )));
    }
    let residual = u.unitarity_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    let exp_diag = QMatrix::diagonal(&m.iter().map(|q| q.exp()).collect::<Vec<_>>());
    let exp_m = u.mul(&exp_diag).mul(&u.dagger());
    let bound = m.iter().map(|q| q.re()).fold(f64::NEG_INFINITY, f64::max).exp();
    Ok((exp_m.op_norm(), bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_quat(rng: &mut impl Rng, scale: f64) -> Quaternion {
        Quaternion::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    /// Product of two quaternions through 4×4 left-multiplication matrices;
    /// independent check of the Hamilton product.
    fn mul_via_left_matrices(a: Quaternion, b: Quaternion) -> Quaternion {
        let la = a.left_matrix();
        let vb = [b.w, b.x, b.y, b.z];
        let mut out = [0.0; 4];
        for (r, row) in la.iter().enumerate() {
            out[r] = row.iter().zip(vb.iter()).map(|(p, q)| p * q).sum();
        }
        Quaternion::new(out[0], out[1], out[2], out[3])
    }

    #[test]
    fn multiplication_table() {
        assert_eq!(I * J, K);
        assert_eq!(J * I, -K);
        assert_eq!(J * K, I);
        assert_eq!(K * I, J);
        assert_eq!(I * I, -ONE);
        assert_eq!(J * J, -ONE);
        assert_eq!(K * K, -ONE);
        assert_eq!(I * J * K, -ONE);
    }

    #[test]
    fn identity_element() {
        let q = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        assert_eq!(q * ONE, q);
        assert_eq!(ONE * q, q);
    }

    #[test]
    fn product_matches_left_matrix_oracle() {
        // (1+i)(1+j) = 1+i+j+k, and random pairs.
        let a = ONE + I;
        let b = ONE + J;
        let expect = Quaternion::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!(a * b, expect);
        assert_eq!(mul_via_left_matrices(a, b), expect);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let a = rand_quat(&mut rng, 3.0);
            let b = rand_quat(&mut rng, 3.0);
            let p = a * b;
            let o = mul_via_left_matrices(a, b);
            assert!((p - o).norm() <= 1e-12 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn modulus_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = rand_quat(&mut rng, 5.0);
            let b = rand_quat(&mut rng, 5.0);
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn conjugate_recovers_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let q = rand_quat(&mut rng, 4.0);
            let p = q * q.conj();
            assert!((p.w - q.norm_sqr()).abs() <= 1e-12 * (1.0 + q.norm_sqr()));
            assert!(p.imag_norm() <= 1e-12 * (1.0 + q.norm_sqr()));
        }
    }

    #[test]
    fn associative_and_distributive_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let a = rand_quat(&mut rng, 2.0);
            let b = rand_quat(&mut rng, 2.0);
            let c = rand_quat(&mut rng, 2.0);
            let assoc = ((a * b) * c - a * (b * c)).norm();
            let dist = (a * (b + c) - (a * b + a * c)).norm();
            assert!(assoc <= 1e-12 * (1.0 + a.norm() * b.norm() * c.norm()));
            assert!(dist <= 1e-12 * (1.0 + a.norm() * (b.norm() + c.norm())));
        }
    }

    #[test]
    fn exp_of_unit_imaginary_has_unit_modulus() {
        // |e^{m}| = e^{Re m}; for m = i this is 1.
        let e = I.exp();
        assert!((e.norm() - 1.0).abs() < 1e-14);
        assert!((e.w - 1.0_f64.cos()).abs() < 1e-14);
        let m = Quaternion::new(0.5, 1.0, -2.0, 0.25);
        assert!((m.exp().norm() - m.re().exp()).abs() < 1e-12 * m.re().exp());
    }

    #[test]
    fn ln_of_negative_real_is_domain_error() {
        assert!(Quaternion::real(-2.0).ln().is_none());
        assert!(Quaternion::real(2.0).ln().is_some());
        let q = Quaternion::new(1.0, 2.0, 0.0, 0.0);
        let back = q.ln().unwrap().exp();
        assert!((back - q).norm() < 1e-12);
    }

    #[test]
    fn embedding_is_homomorphism_on_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = QMatrix::from_fn(2, 3, |_, _| rand_quat(&mut rng, 2.0));
            let b = QMatrix::from_fn(3, 2, |_, _| rand_quat(&mut rng, 2.0));
            let lhs = a.mul(&b).real_embedding();
            let rhs = a.real_embedding() * b.real_embedding();
            assert!((lhs - rhs).norm() <= 1e-11);
        }
    }

    #[test]
    fn embedding_respects_matrix_vector_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let m = QMatrix::from_fn(3, 2, |_, _| rand_quat(&mut rng, 2.0));
            let v: Vec<Quaternion> = (0..2).map(|_| rand_quat(&mut rng, 2.0)).collect();
            let direct = embed_vector(&m.mul_vec(&v));
            let emb = m.real_embedding();
            let ev = nalgebra::DVector::from_vec(embed_vector(&v));
            let via = emb * ev;
            let scale = direct.iter().map(|x| x * x).sum::<f64>().sqrt();
            let diff: f64 = direct
                .iter()
                .zip(via.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(diff <= 1e-12 * (1.0 + scale));
        }
    }

    #[test]
    fn embedded_vector_norm_matches_quaternionic_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let v: Vec<Quaternion> = (0..4).map(|_| rand_quat(&mut rng, 3.0)).collect();
            let e = embed_vector(&v);
            let en = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((en - vector_norm(&v)).abs() <= 1e-12 * (1.0 + en));
        }
    }

    #[test]
    fn op_norm_identity_and_diagonal() {
        for n in 1..=4 {
            assert!((QMatrix::identity(n).op_norm() - 1.0).abs() < 1e-12);
        }
        let d = QMatrix::diagonal(&[Quaternion::real(3.0), I * 4.0]);
        assert!((d.op_norm() - 4.0).abs() < 1e-12);
    }

    fn random_unitary_2x2_in_cj(rng: &mut impl Rng, j: Quaternion) -> QMatrix {
        // Complex 2×2 unitary [[c, s̄·e], [-s, c̄·e]] pattern mapped into ℂ_J.
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let ph = rng.gen_range(0.0..std::f64::consts::TAU);
        let ps = rng.gen_range(0.0..std::f64::consts::TAU);
        let cj = |a: f64, b: f64| Quaternion::real(a) + j * b;
        let c = cj(th.cos() * ph.cos(), th.cos() * ph.sin());
        let s = cj(th.sin() * ps.cos(), th.sin() * ps.sin());
        QMatrix::from_rows(vec![vec![c, s], vec![-s.conj(), c.conj()]])
    }

    fn random_unit_imaginary(rng: &mut impl Rng) -> Quaternion {
        loop {
            let q = Quaternion::new(0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = q.norm();
            if n > 1e-3 {
                return q * (1.0 / n);
            }
        }
    }

    #[test]
    fn unitary_matrices_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let j = random_unit_imaginary(&mut rng);
            let u = random_unitary_2x2_in_cj(&mut rng, j);
            assert!(u.is_unitary(1e-10));
            assert!((u.op_norm() - 1.0).abs() < 1e-10);
            assert!((u.dagger().op_norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dagger_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let m = QMatrix::from_fn(3, 2, |_, _| rand_quat(&mut rng, 2.0));
        assert_eq!(m.dagger().dagger(), m);
    }

    #[test]
    fn normality_examples() {
        // Hermitian matrices are normal.
        let h = QMatrix::from_rows(vec![
            vec![Quaternion::real(2.0), ONE + I],
            vec![(ONE + I).conj(), Quaternion::real(-1.0)],
        ]);
        assert_eq!(h, h.dagger());
        assert!(h.is_normal(1e-9));

        // The cyclic permutation matrix is normal.
        let n = 4;
        let cyc = QMatrix::from_fn(n, n, |r, c| if c == (r + 1) % n { ONE } else { ZERO });
        assert!(cyc.is_normal(1e-9));

        // A nilpotent Jordan block is not.
        let nil = QMatrix::from_rows(vec![vec![ZERO, ONE], vec![ZERO, ZERO]]);
        assert!(!nil.is_normal(1e-9));
    }

    #[test]
    fn op_norm_is_submultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let a = QMatrix::from_fn(2, 2, |_, _| rand_quat(&mut rng, 2.0));
            let b = QMatrix::from_fn(2, 2, |_, _| rand_quat(&mut rng, 2.0));
            let prod = a.mul(&b).op_norm();
            assert!(prod <= a.op_norm() * b.op_norm() * (1.0 + 1e-10));
        }
    }

    /// Matrix exponential of the real embedding by scaling and squaring with
    /// a Taylor series; independent of the diagonalized route.
    fn expm_real(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let norm = m.iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
        let s = norm.log2().ceil().max(0.0) as u32 + 1;
        let scaled = m / 2f64.powi(s as i32);
        let mut term = DMatrix::<f64>::identity(n, n);
        let mut acc = DMatrix::<f64>::identity(n, n);
        for k in 1..40 {
            term = (&term * &scaled) / k as f64;
            acc += &term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn exp_norm_bound_basics() {
        let (norm, bound) = exp_norm_bound(&QMatrix::identity(1), &[ZERO], 1e-9).unwrap();
        assert!((norm - 1.0).abs() < 1e-12 && (bound - 1.0).abs() < 1e-12);

        // m = i: |e^{i}| = e^{Re i} = 1.
        let (norm, bound) = exp_norm_bound(&QMatrix::identity(1), &[I], 1e-9).unwrap();
        assert!((norm - 1.0).abs() < 1e-12 && (bound - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let j = random_unit_imaginary(&mut rng);
        let u = random_unitary_2x2_in_cj(&mut rng, j);
        let m = [Quaternion::real(1.0), Quaternion::real(-1.0)];
        let (norm, bound) = exp_norm_bound(&u, &m, 1e-9).unwrap();
        assert!(norm <= std::f64::consts::E + 1e-9);
        assert!((bound - std::f64::consts::E).abs() < 1e-12);

        // Cross-check opNorm(exp M) against a series expm of the embedding.
        let diag = QMatrix::diagonal(&m);
        let full = u.mul(&diag).mul(&u.dagger());
        let emb_exp = expm_real(&full.real_embedding());
        let sv = emb_exp.svd(false, false).singular_values;
        let oracle = sv.iter().cloned().fold(0.0, f64::max);
        assert!((norm - oracle).abs() <= 1e-9 * (1.0 + oracle));
    }

    #[test]
    fn exp_norm_bound_rejects_non_unitary() {
        let u = QMatrix::diagonal(&[Quaternion::real(2.0)]);
        assert!(matches!(
            exp_norm_bound(&u, &[ZERO], 1e-9),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn exp_norm_bound_holds_on_random_diagonalizable_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let j = random_unit_imaginary(&mut rng);
            let u = random_unitary_2x2_in_cj(&mut rng, j);
            let m: Vec<Quaternion> = (0..2).map(|_| rand_quat(&mut rng, 1.5)).collect();
            let (norm, bound) = exp_norm_bound(&u, &m, 1e-8).unwrap();
            assert!(
                norm <= bound + 1e-9,
                "spectral bound violated: {norm} > {bound}"
            );
        }
    }

    #[test]
    fn common_complex_structure_detection() {
        let m = QMatrix::from_rows(vec![
            vec![ONE + J * 2.0, Quaternion::real(0.5)],
            vec![J * -1.0, ONE],
        ]);
        let axis = m.common_complex_structure(1e-12).unwrap();
        assert!((axis.y.abs() - 1.0).abs() < 1e-12);

        let mixed = QMatrix::from_rows(vec![vec![ONE + I, J], vec![ZERO, ONE]]);
        assert!(mixed.common_complex_structure(1e-12).is_none());

        let real = QMatrix::identity(2);
        assert_eq!(real.common_complex_structure(1e-12).unwrap(), I);
    }

    #[test]
    fn max_re_eigenvalue_examples() {
        let d = QMatrix::diagonal(&[Quaternion::real(-1.0), Quaternion::real(-2.0)]);
        assert!((d.max_re_eigenvalue().unwrap() + 1.0).abs() < 1e-9);

        // Real skew matrix: eigenvalues ±iω, max real part 0.
        let w = 3.0;
        let skew = QMatrix::from_rows(vec![
            vec![ZERO, Quaternion::real(w)],
            vec![Quaternion::real(-w), ZERO],
        ]);
        assert!(skew.max_re_eigenvalue().unwrap().abs() < 1e-8);
    }

    #[test]
    fn hermitian_part_eigenvalue() {
        let m = QMatrix::from_rows(vec![
            vec![Quaternion::real(-1.0), Quaternion::real(2.0)],
            vec![Quaternion::real(0.2), Quaternion::real(-1.5)],
        ]);
        // Symmetric part [[-1, 1.1], [1.1, -1.5]]: top eigenvalue by hand.
        let expect = (-2.5 + (0.25_f64 + 4.0 * 1.1 * 1.1).sqrt()) / 2.0;
        assert!((m.hermitian_part_max_eigenvalue() - expect).abs() < 1e-10);
    }
}
