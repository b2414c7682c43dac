//! Dense 2×2 operators and their 4×4 Liouville-space superoperators.
//!
//! Vectorization is column-stacking throughout the crate:
//! `vec(M) = (M00, M10, M01, M11)`. With this convention left
//! multiplication `X ↦ A·X` is `I ⊗ A` and right multiplication `X ↦ X·A`
//! is `Aᵀ ⊗ I`.

#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Hermiticity gate for [`DensityMatrix`] (max-abs entry deviation).
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace gate for [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const POSITIVITY_GATE: f64 = -1e-10;
/// Slack on the Bloch-vector length.
pub const BLOCH_TOL: f64 = 1e-10;

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Complex2(pub [[C64; 2]; 2]);

impl Complex2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Complex2([[m00, m01], [m10, m11]])
    }

    pub fn from_real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Complex2::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub const fn zero() -> Self {
        Complex2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Complex2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn pauli_x() -> Self {
        Complex2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Complex2([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Complex2::from_real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Complex2::from_real(h, h, h, -h)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Complex2::new(a, ZERO, ZERO, d)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Complex2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Complex2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-abs deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    /// Max-abs deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Complex2::identity()).max_abs()
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    /// Eigenvalues of the Hermitian part, ascending, in closed form.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let h = self.hermitian_part();
        let a = h.0[0][0].re;
        let d = h.0[1][1].re;
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + h.0[0][1].norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    /// Principal square root of the Hermitian part, with negative eigenvalues
    /// clamped to zero. Closed-form spectral decomposition.
    pub fn psd_sqrt(&self) -> Self {
        let h = self.hermitian_part();
        let [lo, hi] = h.hermitian_eigenvalues();
        let (lo, hi) = (lo.max(0.0), hi.max(0.0));
        let gap = hi - lo;
        if gap <= 1e-14 * hi.max(1.0) {
            return Complex2::identity().scale_re((0.5 * (lo + hi)).sqrt());
        }
        // Spectral projector onto the upper eigenvalue.
        let p_hi = (h - Complex2::identity().scale_re(lo)).scale_re(1.0 / gap);
        let p_lo = Complex2::identity() - p_hi;
        p_hi.scale_re(hi.sqrt()) + p_lo.scale_re(lo.sqrt())
    }

    pub fn apply(&self, k: &Ket2) -> Ket2 {
        let m = &self.0;
        Ket2([
            m[0][0] * k.0[0] + m[0][1] * k.0[1],
            m[1][0] * k.0[0] + m[1][1] * k.0[1],
        ])
    }
}

impl Default for Complex2 {
    fn default() -> Self {
        Complex2::zero()
    }
}

impl fmt::Debug for Complex2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl Index<(usize, usize)> for Complex2 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Complex2 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for Complex2 {
    type Output = Complex2;
    fn add(self, o: Complex2) -> Complex2 {
        let (a, b) = (&self.0, &o.0);
        Complex2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Complex2 {
    type Output = Complex2;
    fn sub(self, o: Complex2) -> Complex2 {
        let (a, b) = (&self.0, &o.0);
        Complex2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Neg for Complex2 {
    type Output = Complex2;
    fn neg(self) -> Complex2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Complex2 {
    type Output = Complex2;
    fn mul(self, o: Complex2) -> Complex2 {
        let (a, b) = (&self.0, &o.0);
        Complex2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// A qubit state vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket2(pub [C64; 2]);

impl Ket2 {
    pub fn new(a: C64, b: C64) -> Self {
        Ket2([a, b])
    }

    /// Normalizes `(a, b)`; fails for the zero vector.
    pub fn normalized(a: C64, b: C64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidState(format!("cannot normalize ket ({a}, {b})")));
        }
        Ok(Ket2([a / n, b / n]))
    }

    pub fn zero() -> Self {
        Ket2([ONE, ZERO])
    }

    pub fn one() -> Self {
        Ket2([ZERO, ONE])
    }

    /// `(|0⟩ + |1⟩)/√2`
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([h.into(), h.into()])
    }

    /// `(|0⟩ − |1⟩)/√2`
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Ket2([h.into(), (-h).into()])
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Ket2([
            C64::new((0.5 * theta).cos(), 0.0),
            C64::from_polar((0.5 * theta).sin(), phi),
        ])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// `⟨self|M|self⟩`
    pub fn expectation(&self, m: &Complex2) -> C64 {
        self.inner(&m.apply(self))
    }

    /// `|self⟩⟨self|`
    pub fn projector(&self) -> Complex2 {
        let [a, b] = self.0;
        Complex2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj())
    }

    pub fn scale(&self, s: C64) -> Ket2 {
        Ket2([self.0[0] * s, self.0[1] * s])
    }

    pub fn add(&self, o: &Ket2) -> Ket2 {
        Ket2([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

/// Real 3-vector `a` with `ρ = (I + a·σ)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVector { x, y, z };
        let n = v.norm();
        if !n.is_finite() || n > 1.0 + BLOCH_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length {n} exceeds 1")));
        }
        Ok(v)
    }

    /// `radius·(sinθ cosφ, sinθ sinφ, cosθ)`
    pub fn from_spherical(radius: f64, theta: f64, phi: f64) -> Result<Self> {
        BlochVector::new(
            radius * theta.sin() * phi.cos(),
            radius * theta.sin() * phi.sin(),
            radius * theta.cos(),
        )
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }
}

/// Diagnostic for the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl DensityReport {
    pub fn passes(&self) -> bool {
        self.passes_within(HERMITICITY_TOL, TRACE_TOL, POSITIVITY_GATE)
    }

    pub fn passes_within(&self, hermiticity: f64, trace: f64, positivity: f64) -> bool {
        self.hermiticity_defect <= hermiticity
            && self.trace_defect <= trace
            && self.min_eigenvalue >= positivity
    }
}

/// Hermiticity defect, trace defect and smallest eigenvalue of `m`.
pub fn validate_density(m: &Complex2) -> DensityReport {
    if !m.is_finite() {
        return DensityReport {
            hermiticity_defect: f64::INFINITY,
            trace_defect: f64::INFINITY,
            min_eigenvalue: f64::NEG_INFINITY,
        };
    }
    DensityReport {
        hermiticity_defect: m.hermiticity_defect(),
        trace_defect: (m.trace() - ONE).norm(),
        min_eigenvalue: m.hermitian_eigenvalues()[0],
    }
}

/// A qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Complex2);

impl DensityMatrix {
    /// Validates `m` against the strict invariants.
    pub fn new(m: Complex2) -> Result<Self> {
        let report = validate_density(&m);
        if report.passes() {
            Ok(DensityMatrix(m))
        } else {
            Err(Error::InvalidState(format!("{report:?}")))
        }
    }

    /// Wraps solver output without checking; callers validate with a relaxed
    /// gate where needed.
    pub(crate) fn from_solver(m: Complex2) -> Self {
        DensityMatrix(m)
    }

    pub fn pure(k: &Ket2) -> Self {
        DensityMatrix(k.projector())
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Complex2::identity().scale_re(0.5))
    }

    pub fn from_bloch(a: &BlochVector) -> Self {
        bloch_to_density(a)
    }

    pub fn bloch(&self) -> BlochVector {
        density_to_bloch(self)
    }

    pub fn mat(&self) -> &Complex2 {
        &self.0
    }

    pub fn report(&self) -> DensityReport {
        validate_density(&self.0)
    }

    /// Convex combination `p·a + (1 − p)·b`.
    pub fn mix(p: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        crate::error::check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        Ok(DensityMatrix(a.0.scale_re(p) + b.0.scale_re(1.0 - p)))
    }
}

/// `ρ = (I + a·σ)/2`.
pub fn bloch_to_density(a: &BlochVector) -> DensityMatrix {
    let half = 0.5;
    DensityMatrix(Complex2::new(
        C64::new(half * (1.0 + a.z), 0.0),
        C64::new(half * a.x, -half * a.y),
        C64::new(half * a.x, half * a.y),
        C64::new(half * (1.0 - a.z), 0.0),
    ))
}

pub fn density_to_bloch(rho: &DensityMatrix) -> BlochVector {
    let m = &rho.0;
    let off = m[(1, 0)] + m[(0, 1)].conj();
    BlochVector {
        x: off.re,
        y: off.im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    }
}

/// Column-stacking: `(M00, M10, M01, M11)`.
pub fn vectorize(m: &Complex2) -> [C64; 4] {
    [m.0[0][0], m.0[1][0], m.0[0][1], m.0[1][1]]
}

pub fn devectorize(v: &[C64; 4]) -> Complex2 {
    Complex2::new(v[0], v[2], v[1], v[3])
}

#[inline]
fn vec_index(row: usize, col: usize) -> usize {
    2 * col + row
}

/// A 4×4 complex matrix acting on column-stacked 2×2 matrices.
#[derive(Clone, Copy, PartialEq)]
pub struct Superop(pub [[C64; 4]; 4]);

impl Superop {
    pub const fn zero() -> Self {
        Superop([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut s = Superop::zero();
        for i in 0..4 {
            s.0[i][i] = ONE;
        }
        s
    }

    pub fn diag(d: [C64; 4]) -> Self {
        let mut s = Superop::zero();
        for i in 0..4 {
            s.0[i][i] = d[i];
        }
        s
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..4)
            .map(|c| (0..4).map(|r| self.0[r][c].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply_vec(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.0[r][c] * v[c]).sum();
        }
        out
    }

    pub fn apply(&self, m: &Complex2) -> Complex2 {
        devectorize(&self.apply_vec(&vectorize(m)))
    }

    /// Max-abs of the row functional `Tr ∘ G`; zero for generators that
    /// preserve the trace.
    pub fn trace_defect(&self) -> f64 {
        let t0 = vec_index(0, 0);
        let t1 = vec_index(1, 1);
        (0..4)
            .map(|c| (self.0[t0][c] + self.0[t1][c]).norm())
            .fold(0.0, f64::max)
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Superop) -> Result<Superop> {
        let mut a = self.0;
        let mut b = rhs.0;
        for k in 0..4 {
            let p = (k..4)
                .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
                .unwrap_or(k);
            if a[p][k].norm() == 0.0 {
                return Err(Error::Expm("singular Padé denominator".into()));
            }
            a.swap(k, p);
            b.swap(k, p);
            let pivot = a[k][k];
            for i in (k + 1)..4 {
                let f = a[i][k] / pivot;
                if f == ZERO {
                    continue;
                }
                for j in k..4 {
                    let akj = a[k][j];
                    a[i][j] -= f * akj;
                }
                for j in 0..4 {
                    let bkj = b[k][j];
                    b[i][j] -= f * bkj;
                }
            }
        }
        let mut x = [[ZERO; 4]; 4];
        for col in 0..4 {
            for i in (0..4).rev() {
                let mut s = b[i][col];
                for j in (i + 1)..4 {
                    s -= a[i][j] * x[j][col];
                }
                x[i][col] = s / a[i][i];
            }
        }
        Ok(Superop(x))
    }
}

impl Default for Superop {
    fn default() -> Self {
        Superop::zero()
    }
}

impl fmt::Debug for Superop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Add for Superop {
    type Output = Superop;
    fn add(mut self, o: Superop) -> Superop {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] += o.0[r][c];
            }
        }
        self
    }
}

impl Sub for Superop {
    type Output = Superop;
    fn sub(mut self, o: Superop) -> Superop {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] -= o.0[r][c];
            }
        }
        self
    }
}

impl Mul for Superop {
    type Output = Superop;
    fn mul(self, o: Superop) -> Superop {
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for k in 0..4 {
                let a = self.0[r][k];
                if a == ZERO {
                    continue;
                }
                for c in 0..4 {
                    row[c] += a * o.0[k][c];
                }
            }
        }
        Superop(out)
    }
}

/// `X ↦ A·X`
pub fn left_mult_superop(a: &Complex2) -> Superop {
    let mut s = Superop::zero();
    for col in 0..2 {
        for r in 0..2 {
            for k in 0..2 {
                s.0[vec_index(r, col)][vec_index(k, col)] = a.0[r][k];
            }
        }
    }
    s
}

/// `X ↦ X·A`
pub fn right_mult_superop(a: &Complex2) -> Superop {
    let mut s = Superop::zero();
    for col in 0..2 {
        for r in 0..2 {
            for k in 0..2 {
                s.0[vec_index(r, col)][vec_index(r, k)] = a.0[k][col];
            }
        }
    }
    s
}

/// `X ↦ A·X·B`
pub fn sandwich_superop(a: &Complex2, b: &Complex2) -> Superop {
    left_mult_superop(a) * right_mult_superop(b)
}

// Padé coefficients b_k for degrees 3..13 (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Backward-error bounds θ_m for the 1-norm.
const THETA: [f64; 4] = [
    1.495585217958292e-2,
    2.53939833006323e-1,
    9.504178996162932e-1,
    2.097847961257068,
];
const THETA13: f64 = 5.371920351148152;
const MAX_SQUARINGS: i32 = 128;

/// `exp(G·t)` by scaling and squaring with a diagonal Padé kernel.
pub fn expm(g: &Superop, t: f64) -> Result<Superop> {
    if !t.is_finite() || !g.is_finite() {
        return Err(Error::Expm(format!("non-finite argument (t = {t})")));
    }
    let a = g.scale_re(t);
    let norm = a.norm1();
    if norm == 0.0 {
        return Ok(Superop::identity());
    }
    let small: [&[f64]; 4] = [&PADE3, &PADE5, &PADE7, &PADE9];
    for (coeffs, theta) in small.iter().zip(THETA) {
        if norm <= theta {
            return pade_low(&a, coeffs);
        }
    }
    let s = (norm / THETA13).log2().ceil().max(0.0);
    if s > MAX_SQUARINGS as f64 {
        return Err(Error::Expm(format!(
            "norm {norm:.3e} needs {s} squarings to reach the Padé bound"
        )));
    }
    let s = s as i32;
    let mut x = pade13(&a.scale_re(2f64.powi(-s)))?;
    for _ in 0..s {
        x = x * x;
    }
    if !x.is_finite() {
        return Err(Error::Expm(format!("overflow while squaring (norm {norm:.3e})")));
    }
    Ok(x)
}

fn pade_low(a: &Superop, b: &[f64]) -> Result<Superop> {
    let m = b.len() - 1;
    let a2 = *a * *a;
    // powers[k] = A^(2k)
    let mut powers = vec![Superop::identity(), a2];
    while powers.len() <= m / 2 {
        let next = *powers.last().unwrap() * a2;
        powers.push(next);
    }
    let mut u = Superop::zero();
    let mut v = Superop::zero();
    for (k, &bk) in b.iter().enumerate() {
        let p = powers[k / 2].scale_re(bk);
        if k % 2 == 1 {
            u = u + p;
        } else {
            v = v + p;
        }
    }
    let u = *a * u;
    (v - u).solve(&(v + u))
}

fn pade13(a: &Superop) -> Result<Superop> {
    let b = &PADE13;
    let id = Superop::identity();
    let a2 = *a * *a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6.scale_re(b[13]) + a4.scale_re(b[11]) + a2.scale_re(b[9]))
        + a6.scale_re(b[7])
        + a4.scale_re(b[5])
        + a2.scale_re(b[3])
        + id.scale_re(b[1]);
    let u = *a * u_inner;
    let v = a6 * (a6.scale_re(b[12]) + a4.scale_re(b[10]) + a2.scale_re(b[8]))
        + a6.scale_re(b[6])
        + a4.scale_re(b[4])
        + a2.scale_re(b[2])
        + id.scale_re(b[0]);
    (v - u).solve(&(v + u))
}
