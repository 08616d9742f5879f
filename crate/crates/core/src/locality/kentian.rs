//! Hidden-variable models built from the worlds of the toy Bell universe.
//!
//! Each final condition plays the role of λ. Its photon registrations fix
//! where each photon reflected, and so which lump positions the systems
//! occupied: "outer" (`x₁` on the left, `x₄` on the right) is read as `+1`,
//! "inner" as `−1`. Apparatus settings are not modelled, so the same table
//! fills all four setting slots.

use super::{average_over_lambda, check_oi, FiniteHVModel, SettingTables};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::toyqm::{enumerate_worlds, BranchSet, FinalCondition, RegistrationKind, Scenario};

/// Outcome pair `(left, right)` implied by a final condition, as outcome
/// indices (`0` for `+1`).
pub fn implied_outcomes<T: Real>(bs: &BranchSet<T>, fc: &FinalCondition<T>) -> Result<(usize, usize)> {
    let cfg = &bs.config;
    let (Some(x3), Some(x4)) = (cfg.x3, cfg.x4) else {
        return Err(Error::WrongScenario {
            expected: Scenario::Bell.name(),
            found: cfg.scenario().name(),
        });
    };
    if !bs.is_lab_frame() {
        return Err(Error::InvalidConfig(
            "outcome decoding needs lab-frame registrations".into(),
        ));
    }
    let t_final = cfg.t_final;
    let two = T::lit(2.0);
    let divide = (cfg.x2 + x3) / two;
    let nearer_first = |s: T, first: T, second: T| (s - first).abs() <= (s - second).abs();
    let mut left = None;
    let mut right = None;
    for r in fc.registrations.iter().filter(|r| r.kind == RegistrationKind::Photon) {
        let p = r.event.x;
        if p < divide {
            // launched rightwards from x1 - t1 at t = 0, registered moving left
            let site = (p + t_final + cfg.x1 - cfg.t1) / two;
            left = Some(if nearer_first(site, cfg.x1, cfg.x2) { 0 } else { 1 });
        } else {
            // launched leftwards from x4 + t4 at t = 0, registered moving right
            let site = (p - t_final + x4 + cfg.t4_or_default()) / two;
            right = Some(if nearer_first(site, x4, x3) { 0 } else { 1 });
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(Error::InvalidConfig(
            "final condition lacks a photon registration on one wing".into(),
        )),
    }
}

/// λ ranges over the Born-weighted worlds; every conditional probability is
/// 0 or 1.
pub fn kentian_micro_model<T: Real>(bs: &BranchSet<T>) -> Result<FiniteHVModel<T>> {
    if bs.scenario() != Scenario::Bell {
        return Err(Error::WrongScenario {
            expected: Scenario::Bell.name(),
            found: bs.scenario().name(),
        });
    }
    let worlds = enumerate_worlds(bs);
    let mut lambdas = Vec::with_capacity(worlds.len());
    let mut measure = Vec::with_capacity(worlds.len());
    let mut cond = Vec::with_capacity(worlds.len());
    for fc in &worlds {
        let (a, b) = implied_outcomes(bs, fc)?;
        let mut table = [[T::zero(); 2]; 2];
        table[a][b] = T::one();
        let tables: SettingTables<T> = [[table, table], [table, table]];
        lambdas.push(bs.branches[fc.branch_index].label.clone());
        measure.push(fc.probability);
        cond.push(tables);
    }
    FiniteHVModel::with_shared_measure(lambdas, measure, cond)
}

/// OI residual once λ is averaged out with its Born weights.
pub fn kentian_observable_oi_residual<T: Real>(bs: &BranchSet<T>) -> Result<T> {
    let micro = kentian_micro_model(bs)?;
    Ok(check_oi(&average_over_lambda(&micro), T::zero()).residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locality::{check_no_conspiracy, observable_stats};
    use crate::toyqm::{build_bell, build_single_system, ToyConfig};
    use num_complex::Complex;

    fn bell(a: f64) -> BranchSet<f64> {
        let b = (1.0 - a * a).sqrt();
        build_bell(&ToyConfig::bell(
            Complex::new(a, 0.0),
            Complex::new(b, 0.0),
            [0.0, 4.0, 100.0, 104.0],
            5.0,
            5.0,
            300.0,
            1.0,
        ))
        .unwrap()
    }

    #[test]
    fn decoded_outcomes_follow_branches() {
        let bs = bell(0.6);
        let worlds = enumerate_worlds(&bs);
        assert_eq!(implied_outcomes(&bs, &worlds[0]).unwrap(), (0, 0));
        assert_eq!(implied_outcomes(&bs, &worlds[1]).unwrap(), (1, 1));
    }

    #[test]
    fn micro_model_is_deterministic_and_born_weighted() {
        let bs = bell(0.6);
        let m = kentian_micro_model(&bs).unwrap();
        assert_eq!(m.lambdas(), ["outer/outer", "inner/inner"]);
        for t in m.cond() {
            for p in t.iter().flatten().flatten().flatten() {
                assert!(*p == 0.0 || *p == 1.0);
            }
        }
        assert!((m.measure(0, 0)[0] - 0.36).abs() < 1e-12);
        assert!((m.measure(1, 1)[1] - 0.64).abs() < 1e-12);
        assert_eq!(check_oi(&m, 0.0).residual, 0.0);
        assert_eq!(check_no_conspiracy(&m, 0.0).residual, 0.0);
        let s = observable_stats(&m);
        assert!((s.joint[0][0][0][0] - 0.36).abs() < 1e-12);
        assert!((s.joint[0][0][1][1] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn observable_residual_examples() {
        let r = kentian_observable_oi_residual(&bell(std::f64::consts::FRAC_1_SQRT_2)).unwrap();
        assert!((r - 0.25).abs() < 1e-12);
        let r = kentian_observable_oi_residual(&bell(0.6)).unwrap();
        assert!((r - 0.2304).abs() < 1e-12);
        assert_eq!(kentian_observable_oi_residual(&bell(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn single_system_is_rejected() {
        let bs = build_single_system(&ToyConfig::single_system(
            Complex::new(0.6, 0.0),
            Complex::new(0.8, 0.0),
            0.0,
            4.0,
            5.0,
            100.0,
            1.0,
        ))
        .unwrap();
        assert!(matches!(kentian_micro_model(&bs), Err(Error::WrongScenario { .. })));
    }
}
