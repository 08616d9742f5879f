//! Semi-relativistic toy quantum mechanics in one spatial dimension.
//!
//! Massive systems are idealised as point lumps with zero self-Hamiltonian;
//! photons follow exact lightlike worldlines and reverse direction whenever
//! they meet a lump of their own branch. The state is kept branch-resolved:
//! one [`Branch`] per superposition component, each a classical
//! configuration weighted by a complex amplitude.
//!
//! Two scenarios are supported:
//!
//! * single system: `a ψ(x₁) + b ψ(x₂)` probed by one photon launched
//!   rightwards so that it would reach `x₁` at `t₁`;
//! * Bell pair: `a ψ(x₁)ψ(x₄) + b ψ(x₂)ψ(x₃)` probed by a rightward photon
//!   on the left and a leftward photon on the right.
//!
//! Every branch is traced up to a late final surface `t = T`, where photons
//! and lumps leave [`Registration`]s. A [`FinalCondition`] is the set of
//! registrations of one branch together with its Born weight.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spacetime::{Boost, Event};

/// Energy carried by a registered photon. Only presence or absence matters.
pub const PHOTON_NOMINAL_ENERGY: f64 = 1.0;

const MAX_REFLECTIONS: usize = 64;

/// Tolerance on `Σ|amplitude|² = 1`, widened for low-precision scalars.
pub fn norm_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

mod amplitude_serde {
    use num_complex::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr<T> {
        Real(T),
        Pair([T; 2]),
        Object { re: T, im: T },
    }

    pub fn serialize<T: Serialize + Copy, S: Serializer>(
        z: &Complex<T>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Complex<T>, D::Error>
    where
        T: Deserialize<'de> + num_traits::Zero,
        D: Deserializer<'de>,
    {
        Ok(match Repr::<T>::deserialize(d)? {
            Repr::Real(re) => Complex::new(re, T::zero()),
            Repr::Pair([re, im]) | Repr::Object { re, im } => Complex::new(re, im),
        })
    }
}

fn default_mass<T: Real>() -> T {
    T::one()
}

/// Parameters of a toy universe.
///
/// Amplitudes are read from JSON either as a real number or as `[re, im]`.
/// `t1` is the time at which the left photon would reach `x1`; it is launched
/// at `t = 0` from `x1 - t1`. For the Bell scenario the right photon is
/// launched at `t = 0` from `x4 + t4` moving left (`t4` defaults to `t1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Real")]
pub struct ToyConfig<T: Real> {
    #[serde(with = "amplitude_serde")]
    pub a: Complex<T>,
    #[serde(with = "amplitude_serde")]
    pub b: Complex<T>,
    pub x1: T,
    pub x2: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x3: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x4: Option<T>,
    pub t1: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t4: Option<T>,
    #[serde(rename = "T")]
    pub t_final: T,
    #[serde(rename = "m", default = "default_mass")]
    pub mass: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    SingleSystem,
    Bell,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::SingleSystem => "single-system",
            Scenario::Bell => "bell",
        }
    }
}

impl<T: Real> ToyConfig<T> {
    pub fn single_system(
        a: Complex<T>,
        b: Complex<T>,
        x1: T,
        x2: T,
        t1: T,
        t_final: T,
        mass: T,
    ) -> Self {
        Self {
            a,
            b,
            x1,
            x2,
            x3: None,
            x4: None,
            t1,
            t4: None,
            t_final,
            mass,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn bell(
        a: Complex<T>,
        b: Complex<T>,
        sites: [T; 4],
        t1: T,
        t4: T,
        t_final: T,
        mass: T,
    ) -> Self {
        Self {
            a,
            b,
            x1: sites[0],
            x2: sites[1],
            x3: Some(sites[2]),
            x4: Some(sites[3]),
            t1,
            t4: Some(t4),
            t_final,
            mass,
        }
    }

    pub fn scenario(&self) -> Scenario {
        if self.x3.is_some() || self.x4.is_some() {
            Scenario::Bell
        } else {
            Scenario::SingleSystem
        }
    }

    /// Time at which the left photon would reach `x2`.
    pub fn t2(&self) -> T {
        self.t1 + (self.x2 - self.x1)
    }

    pub fn t4_or_default(&self) -> T {
        self.t4.unwrap_or(self.t1)
    }

    /// Time at which the right photon would reach `x3` (Bell only).
    pub fn t3(&self) -> Option<T> {
        Some(self.t4_or_default() + (self.x4? - self.x3?))
    }

    /// Checks every configuration invariant, naming the first violated one.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let finite = [self.x1, self.x2, self.t1, self.t_final, self.mass]
            .into_iter()
            .chain(self.x3)
            .chain(self.x4)
            .chain(self.t4)
            .chain([self.a.re, self.a.im, self.b.re, self.b.im])
            .all(|v| v.is_finite());
        if !finite {
            return bad("all parameters must be finite".into());
        }
        let norm = self.a.norm_sqr() + self.b.norm_sqr();
        if (norm - T::one()).abs() > norm_tol::<T>() {
            return bad(format!("|a|² + |b|² = 1 violated (got {norm})"));
        }
        if self.mass <= T::zero() {
            return bad(format!("m > 0 violated (got {})", self.mass));
        }
        if self.x2 <= self.x1 {
            return bad(format!("x2 > x1 violated ({} <= {})", self.x2, self.x1));
        }
        if self.t1 <= T::zero() {
            return bad(format!(
                "t1 > 0 violated: the photon launched at t = 0 must start left of x1 (t1 = {})",
                self.t1
            ));
        }
        let t2 = self.t2();
        if self.t_final <= t2 {
            return bad(format!("T > t2 violated (T = {}, t2 = {t2})", self.t_final));
        }
        match (self.x3, self.x4) {
            (None, None) => {
                if self.t4.is_some() {
                    return bad("t4 given without a Bell configuration (x3, x4)".into());
                }
            }
            (Some(x3), Some(x4)) => {
                if x3 <= self.x2 {
                    return bad(format!("x3 > x2 violated ({x3} <= {})", self.x2));
                }
                if x4 <= x3 {
                    return bad(format!("x4 > x3 violated ({x4} <= {x3})"));
                }
                let t4 = self.t4_or_default();
                if t4 <= T::zero() {
                    return bad(format!(
                        "t4 > 0 violated: the right photon must start right of x4 (t4 = {t4})"
                    ));
                }
                let t3 = t4 + (x4 - x3);
                if self.t_final <= t3 {
                    return bad(format!("T > t3 violated (T = {}, t3 = {t3})", self.t_final));
                }
            }
            _ => return bad("Bell configuration needs both x3 and x4".into()),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::Left => -T::one(),
            Direction::Right => T::one(),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

/// A massive system idealised as a point following a straight timelike
/// worldline. In the lab frame the velocity is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lump<T> {
    pub system_id: String,
    pub mass: T,
    pub anchor: Event<T>,
    pub velocity: T,
}

impl<T: Real> Lump<T> {
    pub fn at_rest(system_id: impl Into<String>, position: T, mass: T) -> Self {
        Self {
            system_id: system_id.into(),
            mass,
            anchor: Event::new(T::zero(), position),
            velocity: T::zero(),
        }
    }

    pub fn position_at(&self, t: T) -> T {
        self.anchor.x + self.velocity * (t - self.anchor.t)
    }

    fn boosted(&self, boost: &Boost<T>) -> Self {
        Self {
            system_id: self.system_id.clone(),
            mass: self.mass,
            anchor: boost.apply(self.anchor),
            velocity: boost.transform_velocity(self.velocity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonPiece<T> {
    pub start: Event<T>,
    pub direction: Direction,
}

/// Piecewise lightlike photon path, from launch to its registration on the
/// final surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonWorldline<T> {
    pub pieces: Vec<PhotonPiece<T>>,
    pub registration: Event<T>,
}

impl<T: Real> PhotonWorldline<T> {
    /// Position at time `t`. Before the launch event the first piece is
    /// extended backwards (the photon arrives from spatial infinity).
    pub fn position_at(&self, t: T) -> T {
        let idx = self
            .pieces
            .iter()
            .rposition(|p| p.start.t <= t)
            .unwrap_or(0);
        let piece = &self.pieces[idx];
        piece.start.x + piece.direction.sign::<T>() * (t - piece.start.t)
    }

    /// Direction reversal events.
    pub fn reflections(&self) -> impl Iterator<Item = Event<T>> + '_ {
        self.pieces.iter().skip(1).map(|p| p.start)
    }

    fn boosted(&self, boost: &Boost<T>) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| PhotonPiece {
                    start: boost.apply(p.start),
                    direction: p.direction,
                })
                .collect(),
            registration: boost.apply(self.registration),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegistrationKind {
    Photon,
    Lump,
}

/// Energy recorded where a worldline meets the final surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Registration<T> {
    pub event: Event<T>,
    pub kind: RegistrationKind,
    pub magnitude: T,
}

impl<T: Real> Registration<T> {
    pub fn position(&self) -> T {
        self.event.x
    }

    fn boosted(&self, boost: &Boost<T>) -> Self {
        Self {
            event: boost.apply(self.event),
            ..*self
        }
    }
}

/// The late spacelike line `t = anchor.t + slope · (x − anchor.x)` on which
/// registrations are read off. In the lab frame it is `t = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalSurface<T> {
    pub anchor: Event<T>,
    pub slope: T,
}

impl<T: Real> FinalSurface<T> {
    pub fn at_time(t_final: T) -> Self {
        Self {
            anchor: Event::new(t_final, T::zero()),
            slope: T::zero(),
        }
    }

    pub fn time_at(&self, x: T) -> T {
        self.anchor.t + self.slope * (x - self.anchor.x)
    }

    pub fn is_strictly_before(&self, e: Event<T>) -> bool {
        e.t < self.time_at(e.x)
    }

    /// Where a straight worldline `x = x₀ + u (t − t₀)` crosses the surface.
    fn crossing(&self, through: Event<T>, velocity: T) -> Event<T> {
        // t = A + s (x0 + u (t - t0) - ax)  =>  t (1 - s u) = A + s (x0 - u t0 - ax)
        let s = self.slope;
        let t = (self.anchor.t + s * (through.x - velocity * through.t - self.anchor.x))
            / (T::one() - s * velocity);
        Event::new(t, through.x + velocity * (t - through.t))
    }

    fn boosted(&self, boost: &Boost<T>) -> Self {
        Self {
            anchor: boost.apply(self.anchor),
            slope: boost.transform_slope(self.slope),
        }
    }
}

/// One superposition component: a classical configuration with its
/// amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Branch<T: Real> {
    /// Index of the superposition component (0 for `a`, 1 for `b`).
    pub component: usize,
    pub label: String,
    pub amplitude: Complex<T>,
    pub lumps: Vec<Lump<T>>,
    pub photons: Vec<PhotonWorldline<T>>,
    /// Registrations on the final surface, sorted by position.
    pub registrations: Vec<Registration<T>>,
}

impl<T: Real> Branch<T> {
    pub fn weight(&self) -> T {
        self.amplitude.norm_sqr()
    }

    fn boosted(&self, boost: &Boost<T>) -> Self {
        Self {
            component: self.component,
            label: self.label.clone(),
            amplitude: self.amplitude,
            lumps: self.lumps.iter().map(|l| l.boosted(boost)).collect(),
            photons: self.photons.iter().map(|p| p.boosted(boost)).collect(),
            registrations: self.registrations.iter().map(|r| r.boosted(boost)).collect(),
        }
    }
}

/// Branch-resolved state of the toy universe up to the final surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BranchSet<T: Real> {
    pub branches: Vec<Branch<T>>,
    pub surface: FinalSurface<T>,
    pub config: ToyConfig<T>,
    /// Velocity of the frame the geometry is expressed in, relative to the
    /// lab frame.
    pub frame_velocity: T,
}

/// Snapshot of one branch at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchState<T: Real> {
    pub amplitude: Complex<T>,
    pub photon_positions: Vec<T>,
    pub lump_positions: Vec<T>,
}

/// A Born-selected final boundary condition: the registration pattern of
/// one branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalCondition<T> {
    pub registrations: Vec<Registration<T>>,
    pub branch_index: usize,
    pub probability: T,
}

impl<T: Real> FinalCondition<T> {
    pub fn boosted(&self, boost: &Boost<T>) -> Self {
        Self {
            registrations: self.registrations.iter().map(|r| r.boosted(boost)).collect(),
            branch_index: self.branch_index,
            probability: self.probability,
        }
    }
}

fn trace_photon<T: Real>(
    launch: Event<T>,
    direction: Direction,
    lumps: &[Lump<T>],
    t_final: T,
) -> Result<PhotonWorldline<T>> {
    let mut pieces = vec![PhotonPiece {
        start: launch,
        direction,
    }];
    loop {
        let cur = *pieces.last().expect("non-empty");
        let ahead = lumps
            .iter()
            .map(|l| l.anchor.x)
            .filter(|&p| match cur.direction {
                Direction::Right => p > cur.start.x,
                Direction::Left => p < cur.start.x,
            })
            .min_by(|p, q| {
                (*p - cur.start.x)
                    .abs()
                    .partial_cmp(&(*q - cur.start.x).abs())
                    .expect("finite positions")
            });
        let Some(site) = ahead else { break };
        let hit_t = cur.start.t + (site - cur.start.x).abs();
        if hit_t >= t_final {
            break;
        }
        if pieces.len() > MAX_REFLECTIONS {
            return Err(Error::InvalidConfig(
                "photon trapped between lumps (unbounded reflections)".into(),
            ));
        }
        pieces.push(PhotonPiece {
            start: Event::new(hit_t, site),
            direction: cur.direction.reversed(),
        });
    }
    let mut line = PhotonWorldline {
        pieces,
        registration: Event::origin(),
    };
    line.registration = Event::new(t_final, line.position_at(t_final));
    Ok(line)
}

fn make_branch<T: Real>(
    component: usize,
    label: &str,
    amplitude: Complex<T>,
    lumps: Vec<Lump<T>>,
    launches: &[(Event<T>, Direction)],
    surface: &FinalSurface<T>,
) -> Result<Branch<T>> {
    let t_final = surface.anchor.t;
    let photons = launches
        .iter()
        .map(|&(e, d)| trace_photon(e, d, &lumps, t_final))
        .collect::<Result<Vec<_>>>()?;
    let mut registrations: Vec<_> = photons
        .iter()
        .map(|p| Registration {
            event: p.registration,
            kind: RegistrationKind::Photon,
            magnitude: T::lit(PHOTON_NOMINAL_ENERGY),
        })
        .chain(lumps.iter().map(|l| Registration {
            event: surface.crossing(l.anchor, l.velocity),
            kind: RegistrationKind::Lump,
            magnitude: l.mass,
        }))
        .collect();
    sort_registrations(&mut registrations);
    Ok(Branch {
        component,
        label: label.to_string(),
        amplitude,
        lumps,
        photons,
        registrations,
    })
}

pub(crate) fn sort_registrations<T: Real>(regs: &mut [Registration<T>]) {
    regs.sort_by(|p, q| {
        p.event
            .x
            .partial_cmp(&q.event.x)
            .expect("finite positions")
            .then(p.kind.cmp(&q.kind))
    });
}

fn assemble<T: Real>(
    config: &ToyConfig<T>,
    components: Vec<(Complex<T>, &str, Vec<Lump<T>>)>,
    launches: &[(Event<T>, Direction)],
) -> Result<BranchSet<T>> {
    let surface = FinalSurface::at_time(config.t_final);
    let branches = components
        .into_iter()
        .enumerate()
        // zero-weight components are not branches of the state
        .filter(|(_, (amp, _, _))| amp.norm_sqr() > T::zero())
        .map(|(i, (amp, label, lumps))| make_branch(i, label, amp, lumps, launches, &surface))
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchSet {
        branches,
        surface,
        config: config.clone(),
        frame_velocity: T::zero(),
    })
}

/// Single system in a two-site superposition, probed by one photon.
pub fn build_single_system<T: Real>(config: &ToyConfig<T>) -> Result<BranchSet<T>> {
    config.validate()?;
    if config.scenario() != Scenario::SingleSystem {
        return Err(Error::WrongScenario {
            expected: Scenario::SingleSystem.name(),
            found: config.scenario().name(),
        });
    }
    let m = config.mass;
    let launch = Event::new(T::zero(), config.x1 - config.t1);
    assemble(
        config,
        vec![
            (config.a, "1", vec![Lump::at_rest("sys", config.x1, m)]),
            (config.b, "2", vec![Lump::at_rest("sys", config.x2, m)]),
        ],
        &[(launch, Direction::Right)],
    )
}

/// Entangled pair: outer/outer with amplitude `a`, inner/inner with `b`.
pub fn build_bell<T: Real>(config: &ToyConfig<T>) -> Result<BranchSet<T>> {
    config.validate()?;
    let (Some(x3), Some(x4)) = (config.x3, config.x4) else {
        return Err(Error::WrongScenario {
            expected: Scenario::Bell.name(),
            found: config.scenario().name(),
        });
    };
    let m = config.mass;
    let left_launch = Event::new(T::zero(), config.x1 - config.t1);
    let right_launch = Event::new(T::zero(), x4 + config.t4_or_default());
    assemble(
        config,
        vec![
            (
                config.a,
                "outer/outer",
                vec![Lump::at_rest("L", config.x1, m), Lump::at_rest("R", x4, m)],
            ),
            (
                config.b,
                "inner/inner",
                vec![Lump::at_rest("L", config.x2, m), Lump::at_rest("R", x3, m)],
            ),
        ],
        &[
            (left_launch, Direction::Right),
            (right_launch, Direction::Left),
        ],
    )
}

/// Builds whichever scenario the configuration describes.
pub fn build<T: Real>(config: &ToyConfig<T>) -> Result<BranchSet<T>> {
    match config.scenario() {
        Scenario::SingleSystem => build_single_system(config),
        Scenario::Bell => build_bell(config),
    }
}

impl<T: Real> BranchSet<T> {
    pub fn scenario(&self) -> Scenario {
        self.config.scenario()
    }

    pub fn is_lab_frame(&self) -> bool {
        self.frame_velocity.is_zero()
    }

    pub fn total_weight(&self) -> T {
        crate::real::compensated_sum(self.branches.iter().map(Branch::weight))
    }

    /// Total lump mass of one branch.
    pub fn total_mass(&self) -> T {
        self.branches
            .iter()
            .map(|b| b.lumps.iter().map(|l| l.mass).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn photon_count(&self) -> usize {
        self.branches
            .iter()
            .map(|b| b.photons.len())
            .max()
            .unwrap_or(0)
    }

    /// Index of the branch built from superposition component `component`.
    pub fn branch_for_component(&self, component: usize) -> Option<usize> {
        self.branches.iter().position(|b| b.component == component)
    }

    /// The same universe described in a boosted frame.
    pub fn boosted(&self, boost: &Boost<T>) -> Self {
        let v = self.frame_velocity;
        let u = boost.velocity();
        Self {
            branches: self.branches.iter().map(|b| b.boosted(boost)).collect(),
            surface: self.surface.boosted(boost),
            config: self.config.clone(),
            frame_velocity: (v + u) / (T::one() + v * u),
        }
    }

    /// Photon and lump positions of every branch at time `t`.
    ///
    /// In the lab frame `t` must lie in `[0, T]`.
    pub fn state_at(&self, t: T) -> Result<Vec<BranchState<T>>> {
        if !t.is_finite()
            || (self.is_lab_frame() && (t < T::zero() || t > self.config.t_final))
        {
            return Err(Error::TimeOutOfRange {
                t: t.as_f64(),
                t_final: self.config.t_final.as_f64(),
            });
        }
        Ok(self
            .branches
            .iter()
            .map(|b| BranchState {
                amplitude: b.amplitude,
                photon_positions: b.photons.iter().map(|p| p.position_at(t)).collect(),
                lump_positions: b.lumps.iter().map(|l| l.position_at(t)).collect(),
            })
            .collect())
    }

    pub fn final_condition(&self, branch_index: usize) -> Result<FinalCondition<T>> {
        let b = self.branches.get(branch_index).ok_or(Error::NoSuchWorld {
            index: branch_index,
            count: self.branches.len(),
        })?;
        Ok(FinalCondition {
            registrations: b.registrations.clone(),
            branch_index,
            probability: b.weight(),
        })
    }
}

/// One final condition per branch, weighted by its Born probability.
pub fn enumerate_worlds<T: Real>(bs: &BranchSet<T>) -> Vec<FinalCondition<T>> {
    (0..bs.branches.len())
        .map(|i| bs.final_condition(i).expect("index in range"))
        .collect()
}

/// Born-rule selection of one final condition, reproducible from `seed`.
pub fn sample_world<T: Real>(bs: &BranchSet<T>, seed: u64) -> FinalCondition<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let total = bs.total_weight().as_f64();
    let mut acc = 0.0;
    let last = bs.branches.len() - 1;
    let idx = bs
        .branches
        .iter()
        .position(|b| {
            acc += b.weight().as_f64() / total;
            u < acc
        })
        .unwrap_or(last);
    bs.final_condition(idx).expect("index in range")
}
