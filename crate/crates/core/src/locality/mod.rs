//! Finite hidden-variable models of a two-wing, two-setting, two-outcome
//! experiment and audits of the locality conditions they satisfy.
//!
//! Indices: settings `i` (left, `a₁`/`a₂`) and `j` (right, `b₁`/`b₂`) are
//! `0`/`1`; outcomes are `0` for `+1` and `1` for `−1`.

mod json;
pub mod kentian;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{compensated_sum, Real};

pub use kentian::{kentian_micro_model, kentian_observable_oi_residual};

pub const DEFAULT_AUDIT_TOL: f64 = 1e-9;

/// Tolerance on normalisation of measures and outcome tables.
pub fn normalization_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

/// Joint outcome probabilities `[A][B]`.
pub type JointTable<T> = [[T; 2]; 2];

/// One joint table per setting pair `[i][j]`.
pub type SettingTables<T> = [[JointTable<T>; 2]; 2];

pub const OUTCOMES: [i8; 2] = [1, -1];

pub fn setting_pair_name(i: usize, j: usize) -> String {
    format!("a{}b{}", i + 1, j + 1)
}

fn left_marginal<T: Real>(p: &JointTable<T>) -> [T; 2] {
    [p[0][0] + p[0][1], p[1][0] + p[1][1]]
}

/// Non-negative, finite entries summing to 1.
pub(crate) fn check_distribution<T: Real>(path: &str, values: impl Iterator<Item = T> + Clone) -> Result<()> {
    if let Some(v) = values.clone().find(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::MalformedModel(format!(
            "{path}: entry {v} is negative or non-finite"
        )));
    }
    let s = compensated_sum(values);
    if (s - T::one()).abs() > normalization_tol::<T>() {
        return Err(Error::MalformedModel(format!("{path}: sums to {s}, not 1")));
    }
    Ok(())
}

fn right_marginal<T: Real>(p: &JointTable<T>) -> [T; 2] {
    [p[0][0] + p[1][0], p[0][1] + p[1][1]]
}

/// A finite sample space Λ, a measure over Λ for each setting pair, and the
/// conditional outcome tables `pr[λ][i][j][A][B]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "json::ModelDoc<T>", bound = "T: Real")]
pub struct FiniteHVModel<T: Real> {
    lambdas: Vec<String>,
    measures: [[Vec<T>; 2]; 2],
    cond: Vec<SettingTables<T>>,
}

impl<T: Real> FiniteHVModel<T> {
    pub fn new(
        lambdas: Vec<String>,
        measures: [[Vec<T>; 2]; 2],
        cond: Vec<SettingTables<T>>,
    ) -> Result<Self> {
        let model = Self {
            lambdas,
            measures,
            cond,
        };
        model.validate()?;
        Ok(model)
    }

    /// Same measure for every setting pair.
    pub fn with_shared_measure(
        lambdas: Vec<String>,
        measure: Vec<T>,
        cond: Vec<SettingTables<T>>,
    ) -> Result<Self> {
        let m = measure;
        Self::new(
            lambdas,
            [[m.clone(), m.clone()], [m.clone(), m]],
            cond,
        )
    }

    /// Tables that factor into wing-local outcome distributions.
    /// `left[λ][i]` and `right[λ][j]` are the probabilities of outcome `+1`.
    pub fn product(
        lambdas: Vec<String>,
        measure: Vec<T>,
        left: &[[T; 2]],
        right: &[[T; 2]],
    ) -> Result<Self> {
        if left.len() != lambdas.len() || right.len() != lambdas.len() {
            return Err(Error::MalformedModel(
                "wing tables must have one entry per lambda".into(),
            ));
        }
        let one = T::one();
        let cond = left
            .iter()
            .zip(right)
            .map(|(l, r)| {
                let mut t = [[[[T::zero(); 2]; 2]; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        let pl = [l[i], one - l[i]];
                        let pr = [r[j], one - r[j]];
                        for a in 0..2 {
                            for b in 0..2 {
                                t[i][j][a][b] = pl[a] * pr[b];
                            }
                        }
                    }
                }
                t
            })
            .collect();
        Self::with_shared_measure(lambdas, measure, cond)
    }

    pub fn lambdas(&self) -> &[String] {
        &self.lambdas
    }

    pub fn measure(&self, i: usize, j: usize) -> &[T] {
        &self.measures[i][j]
    }

    pub fn measures(&self) -> &[[Vec<T>; 2]; 2] {
        &self.measures
    }

    pub fn tables(&self, lambda: usize) -> &SettingTables<T> {
        &self.cond[lambda]
    }

    pub fn cond(&self) -> &[SettingTables<T>] {
        &self.cond
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedModel(m));
        let n = self.lambdas.len();
        if n == 0 {
            return bad("lambdas: sample space is empty".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &self.lambdas {
            if !seen.insert(l.as_str()) {
                return bad(format!("lambdas: duplicate identifier {l:?}"));
            }
        }
        if self.cond.len() != n {
            return bad(format!(
                "cond: expected tables for {n} lambdas, found {}",
                self.cond.len()
            ));
        }
        for i in 0..2 {
            for j in 0..2 {
                let name = setting_pair_name(i, j);
                let m = &self.measures[i][j];
                if m.len() != n {
                    return bad(format!(
                        "measures.{name}: expected {n} entries, found {}",
                        m.len()
                    ));
                }
                check_distribution(&format!("measures.{name}"), m.iter().copied())?;
                for (lambda, tables) in self.lambdas.iter().zip(&self.cond) {
                    let cells = tables[i][j].iter().flatten().copied();
                    check_distribution(&format!("cond.{lambda}.{name}"), cells)?;
                }
            }
        }
        Ok(())
    }

    /// Re-checks normalisation and non-negativity.
    pub fn is_normalized(&self) -> bool {
        self.validate().is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult<T> {
    pub pass: bool,
    pub residual: T,
}

impl<T: Real> CheckResult<T> {
    fn new(residual: T, tol: T) -> Self {
        Self {
            pass: residual <= tol,
            residual,
        }
    }
}

fn max_over<T: Real>(it: impl Iterator<Item = T>) -> T {
    it.fold(T::zero(), T::max)
}

/// Outcome Independence: at fixed λ and settings the joint equals the
/// product of its own marginals.
pub fn check_oi<T: Real>(m: &FiniteHVModel<T>, tol: T) -> CheckResult<T> {
    let residual = max_over(m.cond.iter().flat_map(|tables| {
        tables.iter().flatten().flat_map(|p| {
            let (l, r) = (left_marginal(p), right_marginal(p));
            (0..2).flat_map(move |a| (0..2).map(move |b| (p[a][b] - l[a] * r[b]).abs()))
        })
    }));
    CheckResult::new(residual, tol)
}

/// Parameter Independence: at fixed λ each wing's marginal does not depend
/// on the distant setting.
pub fn check_pi<T: Real>(m: &FiniteHVModel<T>, tol: T) -> CheckResult<T> {
    let residual = max_over(m.cond.iter().flat_map(|t| {
        (0..2).flat_map(move |local| {
            let l1 = left_marginal(&t[local][0]);
            let l2 = left_marginal(&t[local][1]);
            let r1 = right_marginal(&t[0][local]);
            let r2 = right_marginal(&t[1][local]);
            (0..2).flat_map(move |o| [(l1[o] - l2[o]).abs(), (r1[o] - r2[o]).abs()])
        })
    }));
    CheckResult::new(residual, tol)
}

/// Index of the distant setting whose marginal defines single-wing
/// probabilities for the factorizability check.
pub const REFERENCE_SETTING: usize = 0;

/// Factorizability: the joint equals the product of single-wing
/// probabilities, each read off as a marginal under the reference distant
/// setting.
pub fn check_factorizability<T: Real>(m: &FiniteHVModel<T>, tol: T) -> CheckResult<T> {
    let residual = max_over(m.cond.iter().flat_map(|t| {
        (0..2).flat_map(move |i| {
            (0..2).flat_map(move |j| {
                let l = left_marginal(&t[i][REFERENCE_SETTING]);
                let r = right_marginal(&t[REFERENCE_SETTING][j]);
                let p = t[i][j];
                (0..2).flat_map(move |a| (0..2).map(move |b| (p[a][b] - l[a] * r[b]).abs()))
            })
        })
    }));
    CheckResult::new(residual, tol)
}

/// Total-variation distance between two probability vectors.
pub fn total_variation<T: Real>(p: &[T], q: &[T]) -> T {
    compensated_sum(p.iter().zip(q).map(|(a, b)| (*a - *b).abs())) / T::lit(2.0)
}

/// No-conspiracy: the measure over Λ is the same for every setting pair.
pub fn check_no_conspiracy<T: Real>(m: &FiniteHVModel<T>, tol: T) -> CheckResult<T> {
    let all: Vec<&Vec<T>> = m.measures.iter().flatten().collect();
    let residual = max_over(
        all.iter()
            .enumerate()
            .flat_map(|(k, p)| all[k + 1..].iter().map(move |q| total_variation(p, q))),
    );
    CheckResult::new(residual, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditReport<T> {
    pub normalization_ok: bool,
    pub oi_residual: T,
    pub pi_residual: T,
    pub fact_residual: T,
    pub no_conspiracy_residual: T,
    pub tolerance: T,
    pub oi_pass: bool,
    pub pi_pass: bool,
    pub fact_pass: bool,
    pub no_conspiracy_pass: bool,
}

impl<T> AuditReport<T> {
    pub fn all_pass(&self) -> bool {
        self.normalization_ok
            && self.oi_pass
            && self.pi_pass
            && self.fact_pass
            && self.no_conspiracy_pass
    }
}

pub fn audit<T: Real>(m: &FiniteHVModel<T>, tol: T) -> AuditReport<T> {
    let oi = check_oi(m, tol);
    let pi = check_pi(m, tol);
    let fact = check_factorizability(m, tol);
    let nc = check_no_conspiracy(m, tol);
    AuditReport {
        normalization_ok: m.is_normalized(),
        oi_residual: oi.residual,
        pi_residual: pi.residual,
        fact_residual: fact.residual,
        no_conspiracy_residual: nc.residual,
        tolerance: tol,
        oi_pass: oi.pass,
        pi_pass: pi.pass,
        fact_pass: fact.pass,
        no_conspiracy_pass: nc.pass,
    }
}

/// Observable statistics after averaging over λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats<T> {
    pub joint: SettingTables<T>,
    pub correlators: [[T; 2]; 2],
    /// `chsh_variants[k]` puts the minus sign on setting pair `k`
    /// (row-major `a₁b₁, a₁b₂, a₂b₁, a₂b₂`).
    pub chsh_variants: [T; 4],
    /// Largest of the four variants.
    pub chsh: T,
}

pub fn correlator<T: Real>(p: &JointTable<T>) -> T {
    (p[0][0] + p[1][1]) - (p[0][1] + p[1][0])
}

/// `|ΣE − 2E(aᵢ,bⱼ)|` for each choice of the negated pair.
pub fn chsh_variants<T: Real>(e: &[[T; 2]; 2]) -> [T; 4] {
    let total = e[0][0] + e[0][1] + e[1][0] + e[1][1];
    let two = T::lit(2.0);
    [e[0][0], e[0][1], e[1][0], e[1][1]].map(|x| (total - two * x).abs())
}

/// CHSH value: the largest of the four sign placements. The placement with
/// the minus sign on `E(a₂,b₂)` is `chsh_variants(e)[3]`.
pub fn chsh<T: Real>(e: &[[T; 2]; 2]) -> T {
    chsh_variants(e).into_iter().fold(T::zero(), T::max)
}

pub fn observable_stats<T: Real>(m: &FiniteHVModel<T>) -> ObservableStats<T> {
    let mut joint = [[[[T::zero(); 2]; 2]; 2]; 2];
    let mut correlators = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let rho = &m.measures[i][j];
            for a in 0..2 {
                for b in 0..2 {
                    joint[i][j][a][b] = compensated_sum(
                        rho.iter().zip(&m.cond).map(|(w, t)| *w * t[i][j][a][b]),
                    );
                }
            }
            correlators[i][j] = correlator(&joint[i][j]);
        }
    }
    ObservableStats {
        joint,
        correlators,
        chsh_variants: chsh_variants(&correlators),
        chsh: chsh(&correlators),
    }
}

/// Single-λ model whose tables are the observable joint distributions.
pub fn average_over_lambda<T: Real>(m: &FiniteHVModel<T>) -> FiniteHVModel<T> {
    let stats = observable_stats(m);
    FiniteHVModel::with_shared_measure(vec!["avg".into()], vec![T::one()], vec![stats.joint])
        .expect("averages of normalised tables are normalised")
}

fn random_wing_probability(rng: &mut ChaCha8Rng) -> f64 {
    // a quarter of the entries sit on each deterministic vertex so that the
    // generator also probes the classical bound itself
    match rng.random_range(0..4u8) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random(),
    }
}

/// Random model that satisfies OI, PI and no-conspiracy by construction.
pub fn random_compliant_model<T: Real>(seed: u64, n_lambda: usize) -> Result<FiniteHVModel<T>> {
    if n_lambda == 0 {
        return Err(Error::MalformedModel("n_lambda must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n_lambda).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut measure: Vec<T> = raw.iter().map(|w| T::lit(w / total)).collect();
    // absorb rounding so the measure sums to one in T
    let head = compensated_sum(measure[1..].iter().copied());
    measure[0] = T::one() - head;
    let mut wing = || -> Vec<[T; 2]> {
        (0..n_lambda)
            .map(|_| {
                [
                    T::lit(random_wing_probability(&mut rng)),
                    T::lit(random_wing_probability(&mut rng)),
                ]
            })
            .collect()
    };
    let left = wing();
    let right = wing();
    let lambdas = (0..n_lambda).map(|k| format!("l{k}")).collect();
    FiniteHVModel::product(lambdas, measure, &left, &right)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(tables: SettingTables<f64>) -> FiniteHVModel<f64> {
        FiniteHVModel::with_shared_measure(vec!["x".into()], vec![1.0], vec![tables]).unwrap()
    }

    fn constant(p: JointTable<f64>) -> SettingTables<f64> {
        [[p, p], [p, p]]
    }

    #[test]
    fn validation_rejects_malformed_tables() {
        let ok = constant([[0.25; 2]; 2]);
        let err = FiniteHVModel::with_shared_measure(vec!["x".into()], vec![0.9], vec![ok])
            .unwrap_err();
        assert!(matches!(err, Error::MalformedModel(m) if m.contains("measures.a1b1")));
        let mut bad = ok;
        bad[1][0][0][0] = 0.5;
        let err = FiniteHVModel::with_shared_measure(vec!["x".into()], vec![1.0], vec![bad])
            .unwrap_err();
        assert!(matches!(err, Error::MalformedModel(m) if m.contains("cond.x.a2b1")));
        let err = FiniteHVModel::with_shared_measure(
            vec!["x".into(), "x".into()],
            vec![0.5, 0.5],
            vec![ok, ok],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedModel(m) if m.contains("duplicate")));
        let mut neg = ok;
        neg[0][0] = [[1.25, -0.25], [0.0, 0.0]];
        assert!(FiniteHVModel::with_shared_measure(vec!["x".into()], vec![1.0], vec![neg]).is_err());
    }

    #[test]
    fn setting_independent_single_lambda_has_no_pi_residual() {
        let m = single(constant([[0.4, 0.1], [0.2, 0.3]]));
        assert_eq!(check_pi(&m, 0.0).residual, 0.0);
        assert_eq!(check_no_conspiracy(&m, 0.0).residual, 0.0);
        // correlated table: outcome dependent
        assert!((check_oi(&m, 1e-9).residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn tv_distance_example() {
        let t = constant([[0.25; 2]; 2]);
        let m = FiniteHVModel::new(
            vec!["x".into(), "y".into()],
            [
                [vec![0.5, 0.5], vec![0.5, 0.5]],
                [vec![0.6, 0.4], vec![0.5, 0.5]],
            ],
            vec![t, t],
        )
        .unwrap();
        let r = check_no_conspiracy(&m, 1e-9);
        assert!((r.residual - 0.1).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn constant_deterministic_outcomes() {
        let m = single(constant([[1.0, 0.0], [0.0, 0.0]]));
        let s = observable_stats(&m);
        assert_eq!(s.correlators, [[1.0; 2]; 2]);
        assert_eq!(s.chsh, 2.0);
        let r = audit(&m, 1e-12);
        assert!(r.all_pass());
    }

    #[test]
    fn pi_violation_detected_and_factorization_follows() {
        // left outcome copies the distant setting
        let mut t = constant([[0.0; 2]; 2]);
        for row in t.iter_mut() {
            row[0] = [[1.0, 0.0], [0.0, 0.0]];
            row[1] = [[0.0, 0.0], [1.0, 0.0]];
        }
        let m = single(t);
        assert_eq!(check_pi(&m, 1e-9).residual, 1.0);
        assert_eq!(check_oi(&m, 1e-9).residual, 0.0);
        assert!(!check_factorizability(&m, 1e-9).pass);
    }

    #[test]
    fn random_compliant_models_pass_by_construction() {
        for seed in 0..50 {
            let m = random_compliant_model::<f64>(seed, 1 + (seed as usize % 7)).unwrap();
            assert!(check_oi(&m, 1e-12).pass, "seed {seed}");
            assert!(check_pi(&m, 1e-12).pass);
            assert!(check_no_conspiracy(&m, 1e-12).pass);
            assert!(observable_stats(&m).chsh <= 2.0 + 1e-9);
        }
        assert!(random_compliant_model::<f64>(0, 0).is_err());
        assert_eq!(
            random_compliant_model::<f64>(9, 4).unwrap(),
            random_compliant_model::<f64>(9, 4).unwrap()
        );
    }

    #[test]
    fn deterministic_vertices_reach_two() {
        // brute force over the 16 local deterministic strategies
        let mut best: f64 = 0.0;
        for code in 0..16u32 {
            let bit = |k: u32| if code >> k & 1 == 1 { 1.0 } else { 0.0 };
            let m = FiniteHVModel::product(
                vec!["v".into()],
                vec![1.0],
                &[[bit(0), bit(1)]],
                &[[bit(2), bit(3)]],
            )
            .unwrap();
            best = best.max(observable_stats(&m).chsh);
        }
        assert_eq!(best, 2.0);
    }

    #[test]
    fn averaging_collapses_lambda() {
        let m = random_compliant_model::<f64>(3, 5).unwrap();
        let avg = average_over_lambda(&m);
        assert_eq!(avg.len(), 1);
        let (s, sa) = (observable_stats(&m), observable_stats(&avg));
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.correlators[i][j] - sa.correlators[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let m = random_compliant_model::<f32>(1, 3).unwrap();
        assert!(check_oi(&m, 1e-5).pass);
        assert!(observable_stats(&m).chsh <= 2.0 + 1e-5);
    }
}
