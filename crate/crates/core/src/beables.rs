//! Light-cone-conditioned energy-density beables.
//!
//! The beable at an event `y` is the Born expectation of the energy density
//! at `y`, conditioned on the selected final condition restricted to the
//! part of the final surface outside the closed future light cone of `y`.
//! Branches whose restricted registration pattern differs from the selected
//! one (including a registration present in one and absent in the other)
//! are discarded and the remaining Born weights renormalised.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{compensated_sum, Real};
use crate::spacetime::{strictly_outside_future_cone_tol, Event, DEFAULT_INTERVAL_TOL};
use crate::toyqm::{
    build_single_system, BranchSet, FinalCondition, Registration, Scenario, ToyConfig,
    PHOTON_NOMINAL_ENERGY,
};

pub const DEFAULT_DELTA_X: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeableOptions<T> {
    /// Spatial match tolerance for "present at y" and for comparing
    /// registration patterns.
    pub delta_x: T,
    /// Squared-interval tolerance for lightlike classification.
    pub interval_tol: T,
    /// Count the nominal photon energy in addition to lump mass.
    pub include_photons: bool,
}

impl<T: Real> Default for BeableOptions<T> {
    fn default() -> Self {
        Self {
            delta_x: T::lit(DEFAULT_DELTA_X),
            interval_tol: T::lit(DEFAULT_INTERVAL_TOL),
            include_photons: true,
        }
    }
}

impl<T: Real> BeableOptions<T> {
    /// Lump mass only; the system's mass density.
    pub fn mass_only() -> Self {
        Self {
            include_photons: false,
            ..Self::default()
        }
    }
}

/// Registrations usable for conditioning at `apex`, per branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningSet<T> {
    pub apex: Event<T>,
    pub selected: Vec<Registration<T>>,
    pub used_registrations: Vec<Vec<Registration<T>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeableSample<T> {
    pub event: Event<T>,
    pub value: T,
}

fn check_apex<T: Real>(bs: &BranchSet<T>, y: Event<T>) -> Result<()> {
    if bs.surface.is_strictly_before(y) {
        Ok(())
    } else {
        Err(Error::ApexBeyondSurface {
            t: y.t.as_f64(),
            x: y.x.as_f64(),
        })
    }
}

fn restrict<T: Real>(regs: &[Registration<T>], y: Event<T>, tol: T) -> Vec<Registration<T>> {
    regs.iter()
        .filter(|r| strictly_outside_future_cone_tol(y, r.event, tol))
        .copied()
        .collect()
}

pub fn conditioning_set<T: Real>(
    fc: &FinalCondition<T>,
    bs: &BranchSet<T>,
    y: Event<T>,
) -> Result<ConditioningSet<T>> {
    conditioning_set_with(fc, bs, y, &BeableOptions::default())
}

pub fn conditioning_set_with<T: Real>(
    fc: &FinalCondition<T>,
    bs: &BranchSet<T>,
    y: Event<T>,
    opts: &BeableOptions<T>,
) -> Result<ConditioningSet<T>> {
    check_apex(bs, y)?;
    Ok(ConditioningSet {
        apex: y,
        selected: restrict(&fc.registrations, y, opts.interval_tol),
        used_registrations: bs
            .branches
            .iter()
            .map(|b| restrict(&b.registrations, y, opts.interval_tol))
            .collect(),
    })
}

/// Equal as multisets, matching positions within `delta` and magnitudes
/// within `delta`.
fn same_pattern<T: Real>(lhs: &[Registration<T>], rhs: &[Registration<T>], delta: T) -> bool {
    if lhs.len() != rhs.len() {
        return false;
    }
    let mut taken = vec![false; rhs.len()];
    lhs.iter().all(|r| {
        let hit = rhs.iter().enumerate().position(|(j, s)| {
            !taken[j]
                && s.kind == r.kind
                && (s.event.x - r.event.x).abs() <= delta
                && (s.event.t - r.event.t).abs() <= delta
                && (s.magnitude - r.magnitude).abs() <= delta
        });
        match hit {
            Some(j) => {
                taken[j] = true;
                true
            }
            None => false,
        }
    })
}

/// Branches agreeing with the selected world on the conditioning region at
/// `y`, with renormalised Born weights.
pub fn consistent_branches<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    y: Event<T>,
) -> Result<Vec<(usize, T)>> {
    consistent_branches_with(bs, fc, y, &BeableOptions::default())
}

pub fn consistent_branches_with<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    y: Event<T>,
    opts: &BeableOptions<T>,
) -> Result<Vec<(usize, T)>> {
    let cs = conditioning_set_with(fc, bs, y, opts)?;
    let hits: Vec<usize> = cs
        .used_registrations
        .iter()
        .enumerate()
        .filter(|(_, regs)| same_pattern(&cs.selected, regs, opts.delta_x))
        .map(|(i, _)| i)
        .collect();
    assert!(
        !hits.is_empty(),
        "final condition is inconsistent with every branch of the branch set"
    );
    let total = compensated_sum(hits.iter().map(|&i| bs.branches[i].weight()));
    Ok(hits
        .into_iter()
        .map(|i| (i, bs.branches[i].weight() / total))
        .collect())
}

/// Energy present within `delta_x` of `y` in one branch at time `y.t`.
fn local_energy<T: Real>(
    bs: &BranchSet<T>,
    branch: usize,
    y: Event<T>,
    opts: &BeableOptions<T>,
) -> T {
    let b = &bs.branches[branch];
    let near = |p: T| (p - y.x).abs() <= opts.delta_x;
    let mass: T = b
        .lumps
        .iter()
        .filter(|l| near(l.position_at(y.t)))
        .map(|l| l.mass)
        .sum();
    if !opts.include_photons {
        return mass;
    }
    let photons = b
        .photons
        .iter()
        .filter(|p| near(p.position_at(y.t)))
        .count();
    mass + T::lit(PHOTON_NOMINAL_ENERGY) * T::from_usize(photons).expect("small count")
}

/// Conditional expected energy density at `y`.
pub fn beable_energy_density<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    y: Event<T>,
) -> Result<T> {
    beable_energy_density_with(bs, fc, y, &BeableOptions::default())
}

pub fn beable_energy_density_with<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    y: Event<T>,
    opts: &BeableOptions<T>,
) -> Result<T> {
    let weights = consistent_branches_with(bs, fc, y, opts)?;
    Ok(compensated_sum(
        weights
            .into_iter()
            .map(|(i, w)| w * local_energy(bs, i, y, opts)),
    ))
}

/// Unconditioned Born average of the energy at `y`.
pub fn born_average_energy<T: Real>(bs: &BranchSet<T>, y: Event<T>, opts: &BeableOptions<T>) -> T {
    compensated_sum(
        (0..bs.branches.len()).map(|i| bs.branches[i].weight() * local_energy(bs, i, y, opts)),
    )
}

/// Beables at arbitrary events, in input order.
pub fn beables_at<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    events: &[Event<T>],
    opts: &BeableOptions<T>,
) -> Result<Vec<BeableSample<T>>> {
    events
        .par_iter()
        .map(|&event| {
            beable_energy_density_with(bs, fc, event, opts).map(|value| BeableSample { event, value })
        })
        .collect()
}

/// Rectangular lab-frame lattice; endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub t_min: T,
    pub t_max: T,
    pub nt: usize,
    pub x_min: T,
    pub x_max: T,
    pub nx: usize,
}

fn axis<T: Real>(lo: T, hi: T, n: usize) -> (Vec<T>, T) {
    if n <= 1 {
        return (vec![lo], T::zero());
    }
    let step = (hi - lo) / T::from_usize(n - 1).expect("grid size");
    let pts = (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + step * T::from_usize(k).expect("grid index")
            }
        })
        .collect();
    (pts, step)
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self, t_final: T) -> Result<()> {
        let bad = |m: String| Err(Error::GridOutOfRange(m));
        if self.nt == 0 || self.nx == 0 {
            return bad("grid needs at least one point per axis".into());
        }
        let finite = [self.t_min, self.t_max, self.x_min, self.x_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("grid bounds must be finite".into());
        }
        if self.t_min > self.t_max || self.x_min > self.x_max {
            return bad("grid bounds are reversed".into());
        }
        if self.t_min <= T::zero() || self.t_max >= t_final {
            return bad(format!(
                "time axis [{}, {}] must lie strictly inside (0, {t_final})",
                self.t_min, self.t_max
            ));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<T> {
        axis(self.t_min, self.t_max, self.nt).0
    }

    pub fn positions(&self) -> Vec<T> {
        axis(self.x_min, self.x_max, self.nx).0
    }

    /// Lattice events, row-major in t then x.
    pub fn events(&self) -> Vec<Event<T>> {
        let xs = self.positions();
        self.times()
            .into_iter()
            .flat_map(|t| xs.iter().map(move |&x| Event::new(t, x)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeableField<T> {
    pub grid: GridSpec<T>,
    pub dt: T,
    pub dx: T,
    pub delta_x: T,
    pub samples: Vec<BeableSample<T>>,
}

impl<T: Real> BeableField<T> {
    /// `t,x,value` rows, row-major in t then x.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,value\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", s.event.t, s.event.x, s.value));
        }
        out
    }

    pub fn value_at(&self, it: usize, ix: usize) -> T {
        self.samples[it * self.grid.nx + ix].value
    }
}

pub fn beable_field<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    grid: &GridSpec<T>,
) -> Result<BeableField<T>> {
    beable_field_with(bs, fc, grid, &BeableOptions::default())
}

pub fn beable_field_with<T: Real>(
    bs: &BranchSet<T>,
    fc: &FinalCondition<T>,
    grid: &GridSpec<T>,
    opts: &BeableOptions<T>,
) -> Result<BeableField<T>> {
    if !bs.is_lab_frame() {
        return Err(Error::GridOutOfRange(
            "lattice fields are defined in the lab frame".into(),
        ));
    }
    grid.validate(bs.config.t_final)?;
    let samples = beables_at(bs, fc, &grid.events(), opts)?;
    Ok(BeableField {
        grid: *grid,
        dt: axis(grid.t_min, grid.t_max, grid.nt).1,
        dx: axis(grid.x_min, grid.x_max, grid.nx).1,
        delta_x: opts.delta_x,
        samples,
    })
}

/// Open time interval; `None` bounds are the remote past and the final
/// surface respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval<T> {
    pub after: Option<T>,
    pub before: Option<T>,
}

impl<T: Real> TimeInterval<T> {
    pub fn contains(&self, t: T) -> bool {
        self.after.is_none_or(|a| t > a) && self.before.is_none_or(|b| t < b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow<T> {
    pub interval: TimeInterval<T>,
    pub site: T,
    pub value: T,
}

/// Value exactly at a regime boundary, kept apart from both regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow<T> {
    pub t: T,
    pub site: T,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTable<T> {
    /// Superposition component of the selected world (0 for `a`, 1 for `b`).
    pub selected_component: usize,
    pub sites: Vec<T>,
    pub boundaries: Vec<T>,
    pub rows: Vec<RegimeRow<T>>,
    pub boundary_rows: Vec<BoundaryRow<T>>,
}

impl<T: Real> RegimeTable<T> {
    pub fn value(&self, site: T, t: T) -> Option<T> {
        self.rows
            .iter()
            .find(|r| r.site == site && r.interval.contains(t))
            .map(|r| r.value)
    }
}

/// Piecewise-constant system mass density at the lump sites of a
/// single-system universe, for the world built from `selected_component`.
///
/// Candidate regime boundaries are the times at which some registration
/// leaves the future light cone of a site; adjacent regimes with equal
/// values at every site are merged.
pub fn regime_table<T: Real>(
    config: &ToyConfig<T>,
    selected_component: usize,
) -> Result<RegimeTable<T>> {
    if config.scenario() != Scenario::SingleSystem {
        return Err(Error::WrongScenario {
            expected: Scenario::SingleSystem.name(),
            found: config.scenario().name(),
        });
    }
    let bs = build_single_system(config)?;
    let branch = bs
        .branch_for_component(selected_component)
        .ok_or(Error::NoSuchWorld {
            index: selected_component,
            count: bs.branches.len(),
        })?;
    let fc = bs.final_condition(branch)?;
    let opts = BeableOptions::mass_only();
    let t_final = config.t_final;
    let sites = vec![config.x1, config.x2];

    let mut candidates: Vec<T> = sites
        .iter()
        .flat_map(|&s| {
            bs.branches
                .iter()
                .flat_map(|b| b.registrations.iter())
                .map(move |r| r.event.t - (r.event.x - s).abs())
        })
        .filter(|&t| t < t_final)
        .collect();
    candidates.sort_by(|p, q| p.partial_cmp(q).expect("finite times"));
    candidates.dedup_by(|p, q| (*p - *q).abs() <= T::lit(1e-12) * (T::one() + q.abs()));

    let eval = |t: T| -> Result<Vec<T>> {
        sites
            .iter()
            .map(|&s| beable_energy_density_with(&bs, &fc, Event::new(t, s), &opts))
            .collect()
    };

    let mut edges: Vec<Option<T>> = vec![None];
    edges.extend(candidates.iter().map(|&t| Some(t)));
    edges.push(None);
    let mut regimes: Vec<(TimeInterval<T>, Vec<T>)> = Vec::new();
    for w in edges.windows(2) {
        let interval = TimeInterval {
            after: w[0],
            before: w[1],
        };
        let upper = w[1].unwrap_or(t_final);
        let rep = match w[0] {
            Some(lo) => (lo + upper) / T::lit(2.0),
            None => upper - T::one(),
        };
        let values = eval(rep)?;
        match regimes.last_mut() {
            Some((prev, prev_values)) if *prev_values == values => prev.before = w[1],
            _ => regimes.push((interval, values)),
        }
    }

    let boundaries: Vec<T> = regimes.iter().filter_map(|(iv, _)| iv.after).collect();
    let mut rows = Vec::new();
    for (interval, values) in &regimes {
        for (&site, &value) in sites.iter().zip(values) {
            rows.push(RegimeRow {
                interval: *interval,
                site,
                value,
            });
        }
    }
    let mut boundary_rows = Vec::new();
    for &t in &boundaries {
        for (&site, value) in sites.iter().zip(eval(t)?) {
            boundary_rows.push(BoundaryRow { t, site, value });
        }
    }
    Ok(RegimeTable {
        selected_component,
        sites,
        boundaries,
        rows,
        boundary_rows,
    })
}
