//! Local deterministic baseline: λ is an angle on a uniform grid and each
//! wing answers `±sign(cos(λ − θ))` for its own setting `θ`.

use crate::error::{Error, Result};
use crate::locality::FiniteHVModel;
use crate::models::born::BellSettings;
use crate::real::Real;

fn sign<T: Real>(v: T) -> usize {
    // outcome index: 0 for +1 (sign(0) taken as +1), 1 for -1
    if v >= T::zero() {
        0
    } else {
        1
    }
}

/// `n_lambda` equally weighted angles `λ_k = 2π(k + ½)/n`;
/// `A = sign(cos(λ − a))`, `B = −sign(cos(λ − b))`.
pub fn local_deterministic_model<T: Real>(
    settings: &BellSettings<T>,
    n_lambda: usize,
) -> Result<FiniteHVModel<T>> {
    if n_lambda < 4 {
        return Err(Error::MalformedModel(format!(
            "n_lambda >= 4 required (got {n_lambda})"
        )));
    }
    let n = T::from_usize(n_lambda).expect("size");
    let half = T::lit(0.5);
    let mut lambdas = Vec::with_capacity(n_lambda);
    let mut left = Vec::with_capacity(n_lambda);
    let mut right = Vec::with_capacity(n_lambda);
    let to_prob = |idx: usize| if idx == 0 { T::one() } else { T::zero() };
    for k in 0..n_lambda {
        let lambda = T::TAU() * (T::from_usize(k).expect("index") + half) / n;
        lambdas.push(format!("lambda{k}"));
        left.push([0, 1].map(|i| to_prob(sign((lambda - settings.left(i).angle).cos()))));
        right.push([0, 1].map(|j| to_prob(1 - sign((lambda - settings.right(j).angle).cos()))));
    }
    let w = T::one() / n;
    FiniteHVModel::product(lambdas, vec![w; n_lambda], &left, &right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locality::{audit, observable_stats};
    use std::f64::consts::PI;

    #[test]
    fn passes_every_locality_audit() {
        let m = local_deterministic_model(&BellSettings::<f64>::canonical(), 360).unwrap();
        let r = audit(&m, 1e-12);
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.oi_residual, 0.0);
        assert!(observable_stats(&m).chsh <= 2.0 + 1e-12);
        assert!(local_deterministic_model(&BellSettings::<f64>::canonical(), 3).is_err());
    }

    #[test]
    fn sawtooth_correlator() {
        // brute force over the lambda grid, independent of the table path
        let n = 3600;
        for &(a, b) in &[(0.0, 0.0), (0.0, PI / 4.0), (0.3, 1.7), (0.0, PI)] {
            let brute: f64 = (0..n)
                .map(|k| {
                    let l = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                    let sa = if (l - a).cos() >= 0.0 { 1.0 } else { -1.0 };
                    let sb = if (l - b).cos() >= 0.0 { -1.0 } else { 1.0 };
                    sa * sb
                })
                .sum::<f64>()
                / n as f64;
            let m = local_deterministic_model(&BellSettings::new(a, a, b, b), n).unwrap();
            let e = observable_stats(&m).correlators[0][0];
            assert!((e - brute).abs() < 1e-12);
            let sawtooth = -(1.0 - 2.0 * (a - b).abs() / PI);
            assert!((e - sawtooth).abs() < 4.0 / n as f64, "{e} vs {sawtooth}");
        }
    }
}
