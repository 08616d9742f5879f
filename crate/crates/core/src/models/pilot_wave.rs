//! Pilot-wave dynamics for two spin-½ particles on a line.
//!
//! Each particle gets a momentum kick along its measurement axis: the
//! spin-`A` part of the left packet moves with velocity `A·v` after the
//! left impulse time, and likewise on the right. In the measurement basis
//! the wavefunction has four components
//!
//! ```text
//! ψ_AB(yL, yR, t) = ⟨A,B|ψ⟩ · G(yL − A·v·τL) e^{iA·k·yL} · G(yR − B·v·τR) e^{iB·k·yR}
//! ```
//!
//! with `τ = (t − t_impulse)₊` and the phase present only once the impulse
//! has happened. The guidance law is `v = Im(ψ†∂ψ) / ψ†ψ`; since the
//! components are orthogonal this reduces to a density-weighted mean of
//! the kicks, which is what [`Guidance::velocity`] evaluates.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::locality::{FiniteHVModel, SettingTables};
use crate::models::born::{joint_prob, BellSettings, Ket4, SpinSetting};
use crate::real::{compensated_sum, Real};

/// Densities below this count as a node of the wavefunction.
pub const NODE_DENSITY: f64 = 1e-300;
/// Final positions closer to the origin than this are re-integrated.
pub const UNRESOLVED_BAND: f64 = 1e-6;
const MAX_EXTENSIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Real")]
pub struct PWConfig<T> {
    pub sigma: T,
    pub v: T,
    pub k: T,
    pub dt: T,
    pub t_max: T,
    pub t_left: T,
    pub t_right: T,
}

impl<T: Real> Default for PWConfig<T> {
    fn default() -> Self {
        Self {
            sigma: T::one(),
            v: T::one(),
            k: T::one(),
            dt: T::lit(1e-3),
            t_max: T::lit(10.0),
            t_left: T::zero(),
            t_right: T::zero(),
        }
    }
}

impl<T: Real> PWConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        let all = [self.sigma, self.v, self.k, self.dt, self.t_max, self.t_left, self.t_right];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("pilot-wave parameters must be finite");
        }
        if !(self.sigma > T::zero()) {
            return bad("sigma > 0 violated");
        }
        if !(self.v > T::zero()) {
            return bad("v > 0 violated");
        }
        if (self.k - self.v).abs() > T::lit(1e-12) * self.v {
            return bad("k = v violated (the packet drift must match its wavenumber)");
        }
        if !(self.dt > T::zero()) || self.dt > self.t_max {
            return bad("0 < dt <= t_max violated");
        }
        if self.t_left < T::zero() || self.t_right < T::zero() {
            return bad("impulse times must be >= 0");
        }
        let latest = self.t_left.max(self.t_right);
        if T::lit(2.0) * self.v * (self.t_max - latest) < T::lit(5.0) * self.sigma {
            return bad("t_max too short: the outgoing packets must separate by at least 5 sigma");
        }
        Ok(())
    }
}

/// Configuration point `(yL, yR)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PWState<T> {
    pub y_left: T,
    pub y_right: T,
    pub t: T,
}

/// Born weights `|⟨A,B|ψ⟩|²`, indexed `[A][B]` with `0` for `+1`.
fn component_weights<T: Real>(psi: &Ket4<T>, a: SpinSetting<T>, b: SpinSetting<T>) -> [[T; 2]; 2] {
    let o = [1i8, -1];
    let mut w = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            w[i][j] = joint_prob(psi, a, b, o[i], o[j]);
        }
    }
    w
}

/// Guidance field for one choice of settings.
#[derive(Debug, Clone, Copy)]
pub struct Guidance<T> {
    cfg: PWConfig<T>,
    weights: [[T; 2]; 2],
    amplitudes: [[Complex<T>; 2]; 2],
}

impl<T: Real> Guidance<T> {
    pub fn new(cfg: &PWConfig<T>, psi: &Ket4<T>, a: SpinSetting<T>, b: SpinSetting<T>) -> Result<Self> {
        cfg.validate()?;
        let o = [1i8, -1];
        let mut amplitudes = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                amplitudes[i][j] = psi.projection(a, b, o[i], o[j]);
            }
        }
        Ok(Self {
            cfg: *cfg,
            weights: component_weights(psi, a, b),
            amplitudes,
        })
    }

    fn elapsed(&self, t: T, impulse: T) -> Option<T> {
        (t >= impulse).then(|| t - impulse)
    }

    /// Wavefunction components `ψ_AB`, indexed like the weights.
    pub fn components(&self, s: PWState<T>) -> [[Complex<T>; 2]; 2] {
        let c = &self.cfg;
        let packet = |y: T, impulse: T, sign: T| {
            let (shift, kick) = match self.elapsed(s.t, impulse) {
                Some(tau) => (sign * c.v * tau, sign * c.k),
                None => (T::zero(), T::zero()),
            };
            let g = gaussian_amplitude(y - shift, c.sigma);
            Complex::from_polar(g, kick * y)
        };
        let signs = [T::one(), -T::one()];
        let mut out = self.amplitudes;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = self.amplitudes[i][j]
                    * packet(s.y_left, c.t_left, signs[i])
                    * packet(s.y_right, c.t_right, signs[j]);
            }
        }
        out
    }

    /// `|ψ|²` at the configuration point.
    pub fn density(&self, s: PWState<T>) -> T {
        self.log_density_and_velocity(s).0.exp()
    }

    /// `(ln ρ, vL, vR)`, evaluated without underflow in the packet tails.
    fn log_density_and_velocity(&self, s: PWState<T>) -> (T, T, T) {
        let c = &self.cfg;
        let two = T::lit(2.0);
        let var2 = two * c.sigma * c.sigma;
        // exp(A·u) relative to the nearer packet: 1 for the favoured sign,
        // exp(-2|u|) for the other one
        let wing = |y: T, impulse: T| match self.elapsed(s.t, impulse) {
            Some(tau) => {
                let shift = c.v * tau;
                let u = two * y * shift / var2;
                let other = (-two * u.abs()).exp();
                let f = if u >= T::zero() { [T::one(), other] } else { [other, T::one()] };
                let near = y.abs() - shift;
                (f, -(near * near) / var2, c.k)
            }
            None => ([T::one(), T::one()], -(y * y) / var2, T::zero()),
        };
        let (fl, ql, kl) = wing(s.y_left, c.t_left);
        let (fr, qr, kr) = wing(s.y_right, c.t_right);
        let w = &self.weights;
        let mut total = T::zero();
        let mut left = T::zero();
        let mut right = T::zero();
        let signs = [T::one(), -T::one()];
        for i in 0..2 {
            for j in 0..2 {
                let x = w[i][j] * fl[i] * fr[j];
                total += x;
                left += signs[i] * x;
                right += signs[j] * x;
            }
        }
        let log_rho = ql + qr - (T::TAU() * c.sigma * c.sigma).ln() + total.ln();
        (log_rho, kl * left / total, kr * right / total)
    }

    /// Guidance velocity `(vL, vR)`.
    pub fn velocity(&self, s: PWState<T>) -> Result<(T, T)> {
        let (log_rho, vl, vr) = self.log_density_and_velocity(s);
        if !(log_rho >= T::lit(NODE_DENSITY.ln())) {
            return Err(Error::DegenerateNode {
                y_left: s.y_left.as_f64(),
                y_right: s.y_right.as_f64(),
                t: s.t.as_f64(),
                density: log_rho.as_f64().exp(),
            });
        }
        Ok((vl, vr))
    }

    fn rk4_step(&self, s: PWState<T>, h: T) -> Result<PWState<T>> {
        let half = h / T::lit(2.0);
        let at = |dl: T, dr: T, dt: T| PWState {
            y_left: s.y_left + dl,
            y_right: s.y_right + dr,
            t: s.t + dt,
        };
        let k1 = self.velocity(s)?;
        let k2 = self.velocity(at(half * k1.0, half * k1.1, half))?;
        let k3 = self.velocity(at(half * k2.0, half * k2.1, half))?;
        let k4 = self.velocity(at(h * k3.0, h * k3.1, h))?;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        Ok(PWState {
            y_left: s.y_left + sixth * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
            y_right: s.y_right + sixth * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
            t: s.t + h,
        })
    }

    /// Fixed-step RK4 from `s` up to time `until`; the last step is
    /// shortened to land exactly on `until`.
    fn integrate(&self, mut s: PWState<T>, until: T, mut record: impl FnMut(PWState<T>)) -> Result<PWState<T>> {
        let dt = self.cfg.dt;
        let span = until - s.t;
        if span <= T::zero() {
            return Ok(s);
        }
        let n = (span / dt).ceil().to_usize().unwrap_or(usize::MAX).max(1);
        let t0 = s.t;
        for step in 0..n {
            let h = if step + 1 == n {
                until - s.t
            } else {
                dt
            };
            s = self.rk4_step(s, h)?;
            if step + 1 == n {
                s.t = until;
            } else {
                s.t = t0 + T::from_usize(step + 1).expect("step") * dt;
            }
            record(s);
        }
        Ok(s)
    }

    /// Integrates to `t_max`, extending the horizon if a particle is still
    /// within [`UNRESOLVED_BAND`] of the origin.
    fn run(&self, initial: PWState<T>, mut record: impl FnMut(PWState<T>)) -> Result<(i8, i8)> {
        let band = T::lit(UNRESOLVED_BAND);
        let mut horizon = self.cfg.t_max;
        let mut s = self.integrate(initial, horizon, &mut record)?;
        for _ in 0..MAX_EXTENSIONS {
            if s.y_left.abs() >= band && s.y_right.abs() >= band {
                break;
            }
            horizon += self.cfg.t_max;
            s = self.integrate(s, horizon, &mut record)?;
        }
        for y in [s.y_left, s.y_right] {
            if y.abs() < band {
                return Err(Error::UnresolvedOutcome(y.as_f64()));
            }
        }
        let sign = |y: T| if y > T::zero() { 1 } else { -1 };
        Ok((sign(s.y_left), sign(s.y_right)))
    }

    /// Outcome pair only, no trajectory storage.
    pub fn outcome(&self, initial: PWState<T>) -> Result<(i8, i8)> {
        self.run(initial, |_| {})
    }
}

/// `(2πσ²)^{-1/4} exp(−y²/(4σ²))`.
pub fn gaussian_amplitude<T: Real>(y: T, sigma: T) -> T {
    (T::TAU() * sigma * sigma).powf(T::lit(-0.25)) * (-(y * y) / (T::lit(4.0) * sigma * sigma)).exp()
}

/// Trajectory (including the initial point) and outcome `(sign yL, sign yR)`.
pub fn pw_evolve<T: Real>(
    cfg: &PWConfig<T>,
    psi: &Ket4<T>,
    initial: PWState<T>,
    a: SpinSetting<T>,
    b: SpinSetting<T>,
) -> Result<(Vec<PWState<T>>, (i8, i8))> {
    let g = Guidance::new(cfg, psi, a, b)?;
    let mut path = vec![initial];
    let outcome = g.run(initial, |s| path.push(s))?;
    Ok((path, outcome))
}

/// Equilibrium sampling summary for one setting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PWStats<T> {
    pub settings: (T, T),
    #[serde(rename = "E")]
    pub e: T,
    pub stderr_estimate: T,
    pub n_samples: usize,
    pub n_failed_nodes: usize,
    pub n_unresolved: usize,
    /// Outcome counts `[A][B]`, `0` for `+1`.
    pub counts: [[u64; 2]; 2],
}

impl<T: Real> PWStats<T> {
    pub fn n_resolved(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Empirical joint distribution over resolved samples.
    pub fn frequencies(&self) -> [[T; 2]; 2] {
        let n = T::from_u64(self.n_resolved().max(1)).expect("count");
        self.counts.map(|r| r.map(|c| T::from_u64(c).expect("count") / n))
    }
}

/// Initial positions drawn from `|ψ(·, 0)|²`; for the per-particle
/// Gaussians used here that is an independent normal of width σ per
/// particle whatever the spin state.
pub fn equilibrium_sample<T: Real>(cfg: &PWConfig<T>, seed: u64, index: u64) -> PWState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let yl: f64 = rng.sample(StandardNormal);
    let yr: f64 = rng.sample(StandardNormal);
    PWState {
        y_left: T::lit(yl) * cfg.sigma,
        y_right: T::lit(yr) * cfg.sigma,
        t: T::zero(),
    }
}

/// Samples `n` equilibrium initial conditions and integrates each one.
/// Sample `i` uses its own RNG stream, so results do not depend on the
/// thread schedule.
pub fn pw_equilibrium_stats<T: Real>(
    cfg: &PWConfig<T>,
    psi: &Ket4<T>,
    a: SpinSetting<T>,
    b: SpinSetting<T>,
    n: usize,
    seed: u64,
) -> Result<PWStats<T>> {
    let g = Guidance::new(cfg, psi, a, b)?;
    #[derive(Default, Clone, Copy)]
    struct Tally {
        counts: [[u64; 2]; 2],
        nodes: usize,
        unresolved: usize,
    }
    let tally = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::default();
            match g.outcome(equilibrium_sample(cfg, seed, i)) {
                Ok((oa, ob)) => t.counts[usize::from(oa < 0)][usize::from(ob < 0)] = 1,
                Err(Error::DegenerateNode { .. }) => t.nodes = 1,
                Err(_) => t.unresolved = 1,
            }
            t
        })
        .reduce(Tally::default, |mut x, y| {
            for i in 0..2 {
                for j in 0..2 {
                    x.counts[i][j] += y.counts[i][j];
                }
            }
            x.nodes += y.nodes;
            x.unresolved += y.unresolved;
            x
        });
    let c = tally.counts;
    let resolved = c.iter().flatten().sum::<u64>();
    if resolved == 0 {
        return Err(Error::InvalidConfig("no sample reached a definite outcome".into()));
    }
    let nr = T::from_u64(resolved).expect("count");
    let same = T::from_u64(c[0][0] + c[1][1]).expect("count");
    let diff = T::from_u64(c[0][1] + c[1][0]).expect("count");
    let e = (same - diff) / nr;
    let stderr = ((T::one() - e * e).max(T::zero()) / nr).sqrt();
    Ok(PWStats {
        settings: (a.angle, b.angle),
        e,
        stderr_estimate: stderr,
        n_samples: n,
        n_failed_nodes: tally.nodes,
        n_unresolved: tally.unresolved,
        counts: c,
    })
}

/// Outcome of the left particle as a function of the initial point, for
/// two different right-hand settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceWitness<T> {
    pub initial: PWState<T>,
    pub right_settings: (T, T),
    pub left_outcomes: (i8, i8),
}

/// Scans an `n × n` grid of initial points in `[-extent, extent]²` (cell
/// centres) and returns the points where the left outcome changes when
/// only the right setting changes.
pub fn parameter_dependence_witnesses<T: Real>(
    cfg: &PWConfig<T>,
    psi: &Ket4<T>,
    a: SpinSetting<T>,
    b1: SpinSetting<T>,
    b2: SpinSetting<T>,
    n: usize,
    extent: T,
) -> Result<Vec<DependenceWitness<T>>> {
    let g1 = Guidance::new(cfg, psi, a, b1)?;
    let g2 = Guidance::new(cfg, psi, a, b2)?;
    let points = grid_points(n, extent);
    let found: Vec<Option<DependenceWitness<T>>> = points
        .par_iter()
        .map(|&p| {
            let (Ok(o1), Ok(o2)) = (g1.outcome(p), g2.outcome(p)) else {
                return None;
            };
            (o1.0 != o2.0).then_some(DependenceWitness {
                initial: p,
                right_settings: (b1.angle, b2.angle),
                left_outcomes: (o1.0, o2.0),
            })
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Hidden-variable model whose λ are initial configurations, weighted by
/// the equilibrium density at `t = 0` (the same for every setting pair).
/// Each table is the deterministic outcome pair for that setting pair.
pub fn pilot_wave_hv_model<T: Real>(
    cfg: &PWConfig<T>,
    psi: &Ket4<T>,
    settings: &BellSettings<T>,
    points: &[PWState<T>],
) -> Result<FiniteHVModel<T>> {
    if points.is_empty() {
        return Err(Error::MalformedModel("no initial configurations given".into()));
    }
    let mut guides = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            guides.push(Guidance::new(cfg, psi, settings.left(i), settings.right(j))?);
        }
    }
    let weights: Vec<T> = points.iter().map(|p| guides[0].density(*p)).collect();
    let total = compensated_sum(weights.iter().copied());
    if !(total > T::zero()) {
        return Err(Error::MalformedModel("initial configurations carry no density".into()));
    }
    let measure = weights.iter().map(|w| *w / total).collect();
    let cond = points
        .par_iter()
        .map(|p| {
            let mut t: SettingTables<T> = [[[[T::zero(); 2]; 2]; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let (oa, ob) = guides[2 * i + j].outcome(*p)?;
                    t[i][j][usize::from(oa < 0)][usize::from(ob < 0)] = T::one();
                }
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let lambdas = points
        .iter()
        .map(|p| format!("({}, {})", p.y_left, p.y_right))
        .collect();
    FiniteHVModel::with_shared_measure(lambdas, measure, cond)
}

/// Cell centres of an `n × n` grid over `[-extent, extent]²` at `t = 0`.
pub fn grid_points<T: Real>(n: usize, extent: T) -> Vec<PWState<T>> {
    let nn = T::from_usize(n).expect("size");
    let step = T::lit(2.0) * extent / nn;
    let coord = |k: usize| -extent + (T::from_usize(k).expect("index") + T::lit(0.5)) * step;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| PWState {
            y_left: coord(i),
            y_right: coord(j),
            t: T::zero(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::born::singlet;
    use std::f64::consts::PI;

    fn s(x: f64) -> SpinSetting<f64> {
        SpinSetting::new(x)
    }

    fn fast() -> PWConfig<f64> {
        PWConfig {
            dt: 0.01,
            ..PWConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(PWConfig::<f64>::default().validate().is_ok());
        let bad = [
            PWConfig { sigma: 0.0, ..Default::default() },
            PWConfig { k: 2.0, ..Default::default() },
            PWConfig { dt: -1.0, ..Default::default() },
            PWConfig { t_max: 2.0, ..Default::default() },
            PWConfig { t_left: -1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))), "{c:?}");
        }
    }

    #[test]
    fn velocity_matches_wavefunction_current() {
        // Im(ψ†∂ψ)/ψ†ψ by central differences of the explicit components
        let cfg = PWConfig { t_left: 0.5, t_right: 1.5, ..fast() };
        let g = Guidance::new(&cfg, &singlet(), s(0.3), s(1.2)).unwrap();
        let h = 1e-6;
        for &(yl, yr, t) in &[(0.3, -0.2, 1.0), (-1.1, 0.7, 2.0), (2.0, 1.5, 0.2), (0.05, -0.4, 3.0)] {
            let st = PWState { y_left: yl, y_right: yr, t };
            let psi = g.components(st);
            let rho: f64 = psi.iter().flatten().map(|z| z.norm_sqr()).sum();
            assert!((rho - g.density(st)).abs() <= 1e-12 * rho.max(1e-300));
            let current = |dl: f64, dr: f64| {
                let p = g.components(PWState { y_left: yl + dl, y_right: yr + dr, t });
                let m = g.components(PWState { y_left: yl - dl, y_right: yr - dr, t });
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let d = (p[i][j] - m[i][j]) / (2.0 * h);
                        acc += (psi[i][j].conj() * d).im;
                    }
                }
                acc / rho
            };
            let (vl, vr) = g.velocity(st).unwrap();
            assert!((vl - current(h, 0.0)).abs() < 1e-6, "{vl}");
            assert!((vr - current(0.0, h)).abs() < 1e-6, "{vr}");
        }
    }

    #[test]
    fn components_start_as_product_of_gaussians() {
        let g = Guidance::new(&fast(), &singlet(), s(0.0), s(0.7)).unwrap();
        let st = PWState { y_left: 0.4, y_right: -1.3, t: 0.0 };
        let expect = gaussian_amplitude(0.4f64, 1.0).powi(2) * gaussian_amplitude(-1.3f64, 1.0).powi(2);
        assert!((g.density(st) - expect).abs() < 1e-15);
    }

    #[test]
    fn far_tail_is_a_node() {
        let g = Guidance::new(&fast(), &singlet(), s(0.0), s(0.7)).unwrap();
        let st = PWState { y_left: 60.0, y_right: 0.0, t: 0.0 };
        assert!(matches!(g.velocity(st), Err(Error::DegenerateNode { .. })));
    }

    #[test]
    fn trajectory_endpoints_and_outcome() {
        let cfg = fast();
        let init = PWState { y_left: 0.5, y_right: -0.5, t: 0.0 };
        let (path, out) = pw_evolve(&cfg, &singlet(), init, s(0.0), s(PI / 4.0)).unwrap();
        assert_eq!(path[0], init);
        assert_eq!(path.last().unwrap().t, 10.0);
        assert_eq!(path.len(), 1001);
        let last = path.last().unwrap();
        assert_eq!(out, (last.y_left.signum() as i8, last.y_right.signum() as i8));
    }

    #[test]
    fn perfect_anticorrelation_at_equal_settings() {
        let st = pw_equilibrium_stats(&fast(), &singlet(), s(0.4), s(0.4), 400, 11).unwrap();
        assert_eq!(st.counts[0][0] + st.counts[1][1], 0, "{st:?}");
        assert!((st.e + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = pw_equilibrium_stats(&fast(), &singlet(), s(0.0), s(1.0), 200, 5).unwrap();
        let b = pw_equilibrium_stats(&fast(), &singlet(), s(0.0), s(1.0), 200, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_resolved(), 200);
    }

    #[test]
    fn pilot_wave_model_violates_parameter_independence() {
        use crate::locality::{audit, check_oi, check_pi};
        let cfg = fast();
        let psi = singlet();
        let q = PI / 4.0;
        let wit = parameter_dependence_witnesses(&cfg, &psi, s(0.0), s(q), s(3.0 * q), 10, 2.5).unwrap();
        assert!(!wit.is_empty());
        let settings = BellSettings::new(0.0, PI / 2.0, q, 3.0 * q);
        let points: Vec<_> = wit.iter().take(3).map(|w| w.initial).collect();
        let m = pilot_wave_hv_model(&cfg, &psi, &settings, &points).unwrap();
        assert_eq!(check_pi(&m, 1e-9).residual, 1.0);
        assert_eq!(check_oi(&m, 0.0).residual, 0.0);
        let r = audit(&m, 1e-9);
        assert!(r.no_conspiracy_pass && !r.pi_pass && !r.fact_pass);
    }

    #[test]
    fn grid_is_cell_centred() {
        let g = grid_points(4, 2.0f64);
        assert_eq!(g.len(), 16);
        assert_eq!(g[0].y_left, -1.5);
        assert_eq!(g[15].y_right, 1.5);
    }
}
