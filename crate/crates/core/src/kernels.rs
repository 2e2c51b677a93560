//! Dirac/Pauli matrices and the pointwise kernels of the shell operators.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Num, One, Zero};
use thiserror::Error;

use crate::geometry::{self, Vec3};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated at the singular point x = 0")]
    SingularPoint,
    #[error("invalid parameters: {0}")]
    Parameter(String),
}

/// Dense `N × N` matrix over any ring-like element type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareMatrix<E, const N: usize>(pub [[E; N]; N]);

impl<E: Clone + Zero, const N: usize> SquareMatrix<E, N> {
    pub fn zero() -> Self {
        Self(std::array::from_fn(|_| std::array::from_fn(|_| E::zero())))
    }
}

impl<E: Clone + Zero + One, const N: usize> SquareMatrix<E, N> {
    pub fn identity() -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { E::one() } else { E::zero() })))
    }
}

impl<E: Clone, const N: usize> SquareMatrix<E, N> {
    pub fn map<F, G: Fn(&E) -> F>(&self, f: G) -> SquareMatrix<F, N> {
        SquareMatrix(std::array::from_fn(|i| std::array::from_fn(|j| f(&self.0[i][j]))))
    }

    pub fn get(&self, i: usize, j: usize) -> E {
        self.0[i][j].clone()
    }
}

impl<S: Clone + Num + Neg<Output = S>, const N: usize> SquareMatrix<Complex<S>, N> {
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i].conj())))
    }

    pub fn scale(&self, s: Complex<S>) -> Self {
        self.map(|e| e.clone() * s.clone())
    }
}

impl<E: Clone + Add<Output = E>, const N: usize> Add for SquareMatrix<E, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].clone() + rhs.0[i][j].clone())))
    }
}

impl<E: Clone + Sub<Output = E>, const N: usize> Sub for SquareMatrix<E, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].clone() - rhs.0[i][j].clone())))
    }
}

impl<E: Clone + Neg<Output = E>, const N: usize> Neg for SquareMatrix<E, N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|e| -e.clone())
    }
}

impl<E: Clone + Zero + Mul<Output = E>, const N: usize> Mul for SquareMatrix<E, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..N).fold(E::zero(), |acc, k| acc + self.0[i][k].clone() * rhs.0[k][j].clone())
            })
        }))
    }
}

pub type Matrix2<T> = SquareMatrix<Complex<T>, 2>;
pub type Matrix4<T> = SquareMatrix<Complex<T>, 4>;

/// The Pauli matrices, the Dirac matrices `α_j = [[0, σ_j], [σ_j, 0]]`,
/// `β = diag(I₂, −I₂)` and the identities.
#[derive(Clone, Debug)]
pub struct DiracAlgebra<S> {
    pub sigma: [SquareMatrix<Complex<S>, 2>; 3],
    pub alpha: [SquareMatrix<Complex<S>, 4>; 3],
    pub beta: SquareMatrix<Complex<S>, 4>,
    pub i2: SquareMatrix<Complex<S>, 2>,
    pub i4: SquareMatrix<Complex<S>, 4>,
}

impl<S: Clone + Num + Neg<Output = S>> DiracAlgebra<S> {
    pub fn new() -> Self {
        let z = || Complex::new(S::zero(), S::zero());
        let one = || Complex::new(S::one(), S::zero());
        let i = || Complex::new(S::zero(), S::one());
        let sigma = [
            SquareMatrix([[z(), one()], [one(), z()]]),
            SquareMatrix([[z(), -i()], [i(), z()]]),
            SquareMatrix([[one(), z()], [z(), -one()]]),
        ];
        let alpha = std::array::from_fn(|k| {
            let mut m = SquareMatrix::<Complex<S>, 4>::zero();
            for r in 0..2 {
                for c in 0..2 {
                    m.0[r][c + 2] = sigma[k].0[r][c].clone();
                    m.0[r + 2][c] = sigma[k].0[r][c].clone();
                }
            }
            m
        });
        let mut beta = SquareMatrix::<Complex<S>, 4>::identity();
        beta.0[2][2] = -one();
        beta.0[3][3] = -one();
        Self { sigma, alpha, beta, i2: SquareMatrix::identity(), i4: SquareMatrix::identity() }
    }
}

impl<S: Clone + Num + Neg<Output = S>> Default for DiracAlgebra<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// `σ·v` as a 2×2 matrix.
#[inline]
pub fn pauli_dot<T: Real>(v: Vec3<T>) -> [[Complex<T>; 2]; 2] {
    let z = T::zero();
    [
        [Complex::new(v[2], z), Complex::new(v[0], -v[1])],
        [Complex::new(v[0], v[1]), Complex::new(-v[2], z)],
    ]
}

/// `α·v` as a 4×4 matrix.
pub fn alpha_dot<T: Real>(v: Vec3<T>) -> Matrix4<T> {
    let p = pauli_dot(v);
    let mut m = Matrix4::<T>::zero();
    for r in 0..2 {
        for c in 0..2 {
            m.0[r][c + 2] = p[r][c];
            m.0[r + 2][c] = p[r][c];
        }
    }
    m
}

/// Mass `m > 0` and spectral parameter `a ∈ [−m, m]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams<T> {
    pub m: T,
    pub a: T,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(m: T, a: T) -> Result<Self, KernelError> {
        if !(m > T::zero()) || !m.is_finite() {
            return Err(KernelError::Parameter(format!("mass must be positive, got {m}")));
        }
        if !a.is_finite() || a.abs() > m * (T::one() + T::lit(1e-12)) {
            return Err(KernelError::Parameter(format!("spectral parameter {a} outside [-m, m]")));
        }
        Ok(Self { m, a: a.max(-m).min(m) })
    }

    /// Decay rate `√(m² − a²)`.
    #[inline]
    pub fn kappa(&self) -> T {
        (self.m * self.m - self.a * self.a).max(T::zero()).sqrt()
    }

    pub fn cast<U: Real>(&self) -> PhysicalParams<U> {
        PhysicalParams { m: U::lit(self.m.to_f64_lossy()), a: U::lit(self.a.to_f64_lossy()) }
    }
}

fn check_point<T: Real>(x: Vec3<T>) -> Result<T, KernelError> {
    let r = geometry::norm(x);
    if r > T::zero() && r.is_finite() {
        Ok(r)
    } else {
        Err(KernelError::SingularPoint)
    }
}

fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

fn imag<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// Fundamental solution of `H − a`:
/// `e^{−κr}/(4πr)·(a + mβ + (1 + κr) iα·x/r²)` with `κ = √(m² − a²)`.
pub fn phi_a<T: Real>(x: Vec3<T>, p: &PhysicalParams<T>) -> Result<Matrix4<T>, KernelError> {
    let r = check_point(x)?;
    let kappa = p.kappa();
    let alg = DiracAlgebra::<T>::new();
    let pre = (-kappa * r).exp() / (T::lit(4.0) * T::PI() * r);
    let scalar = alg.i4.scale(real(p.a)) + alg.beta.scale(real(p.m));
    let vector = alpha_dot(x).scale(imag((T::one() + kappa * r) / (r * r)));
    Ok((scalar + vector).scale(real(pre)))
}

/// Scalar single-layer kernel `e^{−κr}/(4πr)`.
pub fn k_a<T: Real>(x: Vec3<T>, p: &PhysicalParams<T>) -> Result<T, KernelError> {
    let r = check_point(x)?;
    Ok((-p.kappa() * r).exp() / (T::lit(4.0) * T::PI() * r))
}

/// Pauli kernel `e^{−κr}(1 + κr)/(4πr³)·iσ·x`.
pub fn w_a<T: Real>(x: Vec3<T>, p: &PhysicalParams<T>) -> Result<Matrix2<T>, KernelError> {
    let r = check_point(x)?;
    let kappa = p.kappa();
    let c = (-kappa * r).exp() * (T::one() + kappa * r) / (T::lit(4.0) * T::PI() * r * r * r);
    let s = pauli_dot(x);
    Ok(SquareMatrix(std::array::from_fn(|i| std::array::from_fn(|j| s[i][j] * imag(c)))))
}

/// Derivative of [`phi_a`] in `a`, valid for `|a| < m`:
/// `a e^{−κr}/(4πκ)·(a + mβ + iκ α·x/r) + e^{−κr}/(4πr)`.
pub fn dphi_da<T: Real>(x: Vec3<T>, p: &PhysicalParams<T>) -> Result<Matrix4<T>, KernelError> {
    let r = check_point(x)?;
    if p.a.abs() >= p.m {
        return Err(KernelError::Parameter("the a-derivative kernel needs |a| < m".into()));
    }
    let kappa = p.kappa();
    let alg = DiracAlgebra::<T>::new();
    let four_pi = T::lit(4.0) * T::PI();
    let e = (-kappa * r).exp();
    let scalar = alg.i4.scale(real(p.a)) + alg.beta.scale(real(p.m));
    let vector = alpha_dot(x).scale(imag(kappa / r));
    let first = (scalar + vector).scale(real(p.a * e / (four_pi * kappa)));
    Ok(first + alg.i4.scale(real(e / (four_pi * r))))
}

/// Splits [`phi_a`] into `ω₁ = e^{−κr}/(4πr)(a + mβ + iκα·x/r)`,
/// `ω₂ = (e^{−κr} − 1) iα·x/(4πr³)` and the `a`-independent
/// `ω₃ = iα·x/(4πr³)`.
pub fn kernel_split<T: Real>(
    x: Vec3<T>,
    p: &PhysicalParams<T>,
) -> Result<(Matrix4<T>, Matrix4<T>, Matrix4<T>), KernelError> {
    let r = check_point(x)?;
    let kappa = p.kappa();
    let alg = DiracAlgebra::<T>::new();
    let four_pi = T::lit(4.0) * T::PI();
    let e = (-kappa * r).exp();
    let ax = alpha_dot(x);
    let scalar = alg.i4.scale(real(p.a)) + alg.beta.scale(real(p.m));
    let w1 = (scalar + ax.scale(imag(kappa / r))).scale(real(e / (four_pi * r)));
    let w2 = ax.scale(imag((-kappa * r).exp_m1() / (four_pi * r * r * r)));
    let w3 = ax.scale(imag(T::one() / (four_pi * r * r * r)));
    Ok((w1, w2, w3))
}
