//! Two-qubit Born-rule engine.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::locality::{FiniteHVModel, SettingTables};
use crate::real::Real;
use crate::toyqm::norm_tol;

/// Measurement direction, as an angle in a fixed plane of the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinSetting<T> {
    pub angle: T,
}

impl<T: Real> SpinSetting<T> {
    pub fn new(angle: T) -> Self {
        Self { angle }
    }

    /// Components of the eigenvector with eigenvalue `outcome` (`+1`/`-1`)
    /// in the reference basis.
    pub fn eigenvector(&self, outcome: i8) -> [T; 2] {
        let half = self.angle / T::lit(2.0);
        let (s, c) = half.sin_cos();
        if outcome > 0 {
            [c, s]
        } else {
            [-s, c]
        }
    }
}

/// Settings `a₁, a₂` (left) and `b₁, b₂` (right).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellSettings<T> {
    pub a1: SpinSetting<T>,
    pub a2: SpinSetting<T>,
    pub b1: SpinSetting<T>,
    pub b2: SpinSetting<T>,
}

impl<T: Real> BellSettings<T> {
    pub fn new(a1: T, a2: T, b1: T, b2: T) -> Self {
        Self {
            a1: SpinSetting::new(a1),
            a2: SpinSetting::new(a2),
            b1: SpinSetting::new(b1),
            b2: SpinSetting::new(b2),
        }
    }

    /// `(0, π/2, π/4, 3π/4)`.
    pub fn canonical() -> Self {
        let q = T::FRAC_PI_4();
        Self::new(T::zero(), T::FRAC_PI_2(), q, T::lit(3.0) * q)
    }

    pub fn left(&self, i: usize) -> SpinSetting<T> {
        [self.a1, self.a2][i]
    }

    pub fn right(&self, j: usize) -> SpinSetting<T> {
        [self.b1, self.b2][j]
    }
}

/// Pure two-qubit state; amplitudes ordered `++, +−, −+, −−` (left spin
/// first) in the reference basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Ket4<T: Real> {
    amplitudes: [Complex<T>; 4],
}

impl<T: Real> Ket4<T> {
    pub fn new(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let n: T = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (n - T::one()).abs() > norm_tol::<T>() {
            return Err(Error::Unnormalized(n.as_f64()));
        }
        Ok(Self { amplitudes })
    }

    /// Normalises an arbitrary non-zero vector.
    pub fn normalized(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let n: T = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Unnormalized(n.as_f64()));
        }
        Self::new(amplitudes.map(|z| z / n))
    }

    pub fn product(left: [Complex<T>; 2], right: [Complex<T>; 2]) -> Result<Self> {
        Self::normalized([
            left[0] * right[0],
            left[0] * right[1],
            left[1] * right[0],
            left[1] * right[1],
        ])
    }

    /// Haar-ish random pure state from Gaussian components.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = || {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            T::lit(g)
        };
        let amps = [(); 4].map(|_| Complex::new(z(), z()));
        Self::normalized(amps).expect("Gaussian vector is non-zero")
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Exchanges the two qubits.
    pub fn swapped(&self) -> Self {
        let a = self.amplitudes;
        Self {
            amplitudes: [a[0], a[2], a[1], a[3]],
        }
    }

    /// `⟨χ_A(a) ⊗ χ_B(b) | ψ⟩`.
    pub fn projection(&self, a: SpinSetting<T>, b: SpinSetting<T>, out_a: i8, out_b: i8) -> Complex<T> {
        let ea = a.eigenvector(out_a);
        let eb = b.eigenvector(out_b);
        let psi = &self.amplitudes;
        let mut acc = Complex::new(T::zero(), T::zero());
        for s in 0..2 {
            for t in 0..2 {
                acc = acc + psi[2 * s + t] * (ea[s] * eb[t]);
            }
        }
        acc
    }
}

/// `(|+−⟩ − |−+⟩)/√2`.
pub fn singlet<T: Real>() -> Ket4<T> {
    let h = T::FRAC_1_SQRT_2();
    let z = T::zero();
    Ket4 {
        amplitudes: [
            Complex::new(z, z),
            Complex::new(h, z),
            Complex::new(-h, z),
            Complex::new(z, z),
        ],
    }
}

/// Born probability of outcomes `(A, B)` for settings `(a, b)`.
pub fn joint_prob<T: Real>(psi: &Ket4<T>, a: SpinSetting<T>, b: SpinSetting<T>, out_a: i8, out_b: i8) -> T {
    psi.projection(a, b, out_a, out_b).norm_sqr()
}

/// Joint table `[A][B]` with index 0 for `+1`.
pub fn joint_table<T: Real>(psi: &Ket4<T>, a: SpinSetting<T>, b: SpinSetting<T>) -> [[T; 2]; 2] {
    let o = [1i8, -1];
    let mut p = [[T::zero(); 2]; 2];
    for (ia, &oa) in o.iter().enumerate() {
        for (ib, &ob) in o.iter().enumerate() {
            p[ia][ib] = joint_prob(psi, a, b, oa, ob);
        }
    }
    p
}

/// `E(a, b) = Σ A·B·P(A, B)`.
pub fn quantum_correlator<T: Real>(psi: &Ket4<T>, a: SpinSetting<T>, b: SpinSetting<T>) -> T {
    crate::locality::correlator(&joint_table(psi, a, b))
}

/// Orthodox model: the quantum state is the only "hidden variable".
pub fn state_hv_model<T: Real>(psi: &Ket4<T>, settings: &BellSettings<T>) -> FiniteHVModel<T> {
    let mut tables: SettingTables<T> = [[[[T::zero(); 2]; 2]; 2]; 2];
    for (i, row) in tables.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = joint_table(psi, settings.left(i), settings.right(j));
        }
    }
    FiniteHVModel::with_shared_measure(vec!["psi".into()], vec![T::one()], vec![tables])
        .expect("Born tables of a normalised state are normalised")
}

pub fn singlet_hv_model<T: Real>(settings: &BellSettings<T>) -> FiniteHVModel<T> {
    state_hv_model(&singlet(), settings)
}

const NO_SIGNALLING_SEED: u64 = 0x5167_4e41_4c4c_494e;

/// Checks on 100 random setting pairs that each wing's marginal is
/// independent of the distant setting.
pub fn no_signalling_check<T: Real>(psi: &Ket4<T>, tol: T) -> bool {
    no_signalling_residual(psi) <= tol
}

/// Largest marginal discrepancy found by [`no_signalling_check`].
pub fn no_signalling_residual<T: Real>(psi: &Ket4<T>) -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(NO_SIGNALLING_SEED);
    let mut angle = || SpinSetting::new(T::lit(rng.random_range(0.0..std::f64::consts::TAU)));
    let mut worst = T::zero();
    for _ in 0..100 {
        let (local, far1, far2) = (angle(), angle(), angle());
        let l1 = joint_table(psi, local, far1);
        let l2 = joint_table(psi, local, far2);
        let r1 = joint_table(psi, far1, local);
        let r2 = joint_table(psi, far2, local);
        for o in 0..2 {
            let dl = (l1[o][0] + l1[o][1]) - (l2[o][0] + l2[o][1]);
            let dr = (r1[0][o] + r1[1][o]) - (r2[0][o] + r2[1][o]);
            worst = worst.max(dl.abs()).max(dr.abs());
        }
    }
    worst
}
