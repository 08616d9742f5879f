use lightcone_core::beables::{
    beable_energy_density_with, beable_field, beables_at, born_average_energy, conditioning_set,
    consistent_branches, BeableOptions, GridSpec,
};
use lightcone_core::spacetime::{Boost, Event};
use lightcone_core::toyqm::{build, enumerate_worlds, BranchSet, ToyConfig};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy(a: f64) -> BranchSet<f64> {
    let b = (1.0 - a * a).sqrt();
    build(&ToyConfig::single_system(
        Complex::new(a, 0.0),
        Complex::new(b, 0.0),
        0.0,
        4.0,
        5.0,
        100.0,
        1.0,
    ))
    .unwrap()
}

fn ev(t: f64, x: f64) -> Event<f64> {
    Event::new(t, x)
}

#[test]
fn late_times_are_deterministic() {
    let bs = toy(0.6);
    let fc0 = &enumerate_worlds(&bs)[0];
    assert_eq!(consistent_branches(&bs, fc0, ev(7.5, -3.0)).unwrap().len(), 2);
    for fc in enumerate_worlds(&bs) {
        for t in [5.5, 20.0, 99.0] {
            for x in [0.0f64, 4.0, 30.0, -3.0] {
                // left of x1 the reflection news arrives only at t1 + (x1 - x)
                if t <= 5.0 + (0.0 - x).max(0.0) {
                    continue;
                }
                let c = consistent_branches(&bs, &fc, ev(t, x)).unwrap();
                assert_eq!(c.len(), 1, "t={t} x={x}");
                assert_eq!(c[0].0, fc.branch_index);
            }
        }
    }
}

#[test]
fn non_conservation_window() {
    let opts = BeableOptions::mass_only();
    for a in [0.3, 0.6, 0.9] {
        let bs = toy(a);
        let fc = &enumerate_worlds(&bs)[0];
        for t in [1.5, 3.0, 4.9] {
            let total = beable_energy_density_with(&bs, fc, ev(t, 0.0), &opts).unwrap()
                + beable_energy_density_with(&bs, fc, ev(t, 4.0), &opts).unwrap();
            assert!((total - a * a).abs() < 1e-12, "a={a} t={t} total={total}");
            assert!(total < 1.0);
        }
    }
}

#[test]
fn unconditioned_limit_is_the_born_average() {
    // the future cone of an early event far to the left of everything
    // contains no registration only if it sits in their past cones; use
    // events before every registration leaves the cone
    let bs = toy(0.6);
    let opts = BeableOptions::default();
    for fc in enumerate_worlds(&bs) {
        for y in [ev(0.5, 0.0), ev(0.5, 4.0), ev(0.2, -4.8)] {
            let cs = conditioning_set(&fc, &bs, y).unwrap();
            if cs.selected.is_empty() && cs.used_registrations.iter().all(|r| r.is_empty()) {
                let v = beable_energy_density_with(&bs, &fc, y, &opts).unwrap();
                assert!((v - born_average_energy(&bs, y, &opts)).abs() < 1e-12);
            } else {
                panic!("expected an unconditioned event at {y:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn information_grows_with_time(x in -10.0f64..15.0, t1 in 0.1f64..90.0, dt in 0.0f64..9.0) {
        let bs = toy(0.6);
        let fc = &enumerate_worlds(&bs)[0];
        let early = conditioning_set(fc, &bs, ev(t1, x)).unwrap();
        let late = conditioning_set(fc, &bs, ev(t1 + dt, x)).unwrap();
        // the later event's future cone is nested inside the earlier one's
        for r in &early.selected {
            prop_assert!(late.selected.contains(r));
        }
    }

    #[test]
    fn beable_bounded_by_total_energy(t in 0.1f64..99.0, x in -100.0f64..100.0, a in 0.0f64..=1.0) {
        let bs = toy(a);
        let cap = bs.total_mass() + bs.photon_count() as f64;
        for fc in enumerate_worlds(&bs) {
            let v = beable_energy_density_with(&bs, &fc, ev(t, x), &BeableOptions::default()).unwrap();
            prop_assert!((0.0..=cap + 1e-12).contains(&v));
        }
    }
}

/// Field on the lab lattice against the same events recomputed in a
/// boosted frame with every worldline and registration boosted.
fn boost_residual(bs: &BranchSet<f64>, boosts: usize, n: usize, seed: u64) -> f64 {
    let grid = GridSpec {
        t_min: 0.5,
        t_max: 0.5 + 0.25 * (n - 1) as f64,
        nt: n,
        x_min: -5.0,
        x_max: -5.0 + 0.25 * (n - 1) as f64,
        nx: n,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for fc in enumerate_worlds(bs) {
        let lab = beable_field(bs, &fc, &grid).unwrap();
        for _ in 0..boosts {
            let b = Boost::new(rng.random_range(-0.9..=0.9)).unwrap();
            let events: Vec<_> = lab.samples.iter().map(|s| b.apply(s.event)).collect();
            let moved = beables_at(&bs.boosted(&b), &fc.boosted(&b), &events, &BeableOptions::default()).unwrap();
            for (p, q) in lab.samples.iter().zip(&moved) {
                worst = worst.max((p.value - q.value).abs());
            }
        }
    }
    worst
}

#[test]
fn field_is_boost_invariant() {
    assert!(boost_residual(&toy(0.6), 10, 30, 3) <= 1e-9);
}

#[test]
fn bell_field_is_boost_invariant() {
    let bs = build(&ToyConfig::bell(
        Complex::new(0.6, 0.0),
        Complex::new(0.8, 0.0),
        [0.0, 1.0, 3.0, 4.0],
        2.0,
        1.5,
        60.0,
        1.0,
    ))
    .unwrap();
    assert!(boost_residual(&bs, 10, 30, 4) <= 1e-9);
}

#[test]
fn field_is_independent_of_evaluation_order() {
    let bs = toy(0.6);
    let fc = &enumerate_worlds(&bs)[1];
    let grid = GridSpec { t_min: 0.5, t_max: 12.0, nt: 24, x_min: -6.0, x_max: 8.0, nx: 29 };
    let f = beable_field(&bs, fc, &grid).unwrap();
    let mut events: Vec<_> = f.samples.iter().map(|s| s.event).collect();
    events.reverse();
    let rev = beables_at(&bs, fc, &events, &BeableOptions::default()).unwrap();
    for (s, r) in f.samples.iter().rev().zip(&rev) {
        assert_eq!(s.value.to_bits(), r.value.to_bits());
    }
}
