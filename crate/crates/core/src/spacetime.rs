//! 1+1D Minkowski geometry with c = 1.
//!
//! Events are `(t, x)` pairs. The metric signature is `(+, -)`, so timelike
//! separations have positive [`interval2`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Default tolerance on the squared interval below which a separation with
/// non-zero time difference counts as lightlike.
pub const DEFAULT_INTERVAL_TOL: f64 = 1e-9;

/// A point of 1+1D Minkowski spacetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub t: T,
    pub x: T,
}

impl<T: Real> Event<T> {
    /// Panics on non-finite coordinates; use [`Event::try_new`] for
    /// untrusted input.
    pub fn new(t: T, x: T) -> Self {
        Self::try_new(t, x).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_new(t: T, x: T) -> Result<Self> {
        if t.is_finite() && x.is_finite() {
            Ok(Self { t, x })
        } else {
            Err(Error::NonFiniteEvent {
                t: t.as_f64(),
                x: x.as_f64(),
            })
        }
    }

    pub fn origin() -> Self {
        Self {
            t: T::zero(),
            x: T::zero(),
        }
    }

    pub fn boosted(self, boost: &Boost<T>) -> Self {
        boost.apply(self)
    }
}

/// Position of `e2` relative to `e1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalRelation {
    FutureTimelike,
    PastTimelike,
    FutureLightlike,
    PastLightlike,
    Spacelike,
    Coincident,
}

impl CausalRelation {
    /// The relation of `e1` to `e2` given the relation of `e2` to `e1`.
    pub fn reversed(self) -> Self {
        use CausalRelation::*;
        match self {
            FutureTimelike => PastTimelike,
            PastTimelike => FutureTimelike,
            FutureLightlike => PastLightlike,
            PastLightlike => FutureLightlike,
            Spacelike => Spacelike,
            Coincident => Coincident,
        }
    }

    /// True for the closed future cone `J⁺`, apex included.
    pub fn in_closed_future_cone(self) -> bool {
        matches!(
            self,
            CausalRelation::FutureTimelike
                | CausalRelation::FutureLightlike
                | CausalRelation::Coincident
        )
    }
}

/// Squared interval `(Δt)² − (Δx)²`.
pub fn interval2<T: Real>(e1: Event<T>, e2: Event<T>) -> T {
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    // factored form loses less precision near the light cone
    (dt - dx) * (dt + dx)
}

/// Classifies `e2` relative to `e1`.
pub fn causal_relation<T: Real>(e1: Event<T>, e2: Event<T>, tol: T) -> CausalRelation {
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    if dt.is_zero() && dx.is_zero() {
        return CausalRelation::Coincident;
    }
    let s = interval2(e1, e2);
    if s.abs() <= tol && !dt.is_zero() {
        if dt > T::zero() {
            CausalRelation::FutureLightlike
        } else {
            CausalRelation::PastLightlike
        }
    } else if s > T::zero() {
        if dt > T::zero() {
            CausalRelation::FutureTimelike
        } else {
            CausalRelation::PastTimelike
        }
    } else {
        CausalRelation::Spacelike
    }
}

/// True iff `probe` lies outside the closed future light cone of `apex`:
/// spacelike to it or in its causal past. Lightlike-future probes are
/// excluded.
pub fn strictly_outside_future_cone<T: Real>(apex: Event<T>, probe: Event<T>) -> bool {
    strictly_outside_future_cone_tol(apex, probe, T::lit(DEFAULT_INTERVAL_TOL))
}

pub fn strictly_outside_future_cone_tol<T: Real>(apex: Event<T>, probe: Event<T>, tol: T) -> bool {
    !causal_relation(apex, probe, tol).in_closed_future_cone()
}

/// Lorentz boost to a frame moving with velocity `v` along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boost<T> {
    v: T,
}

impl<T: Real> Boost<T> {
    pub fn new(v: T) -> Result<Self> {
        if v.is_finite() && v.abs() < T::one() {
            Ok(Self { v })
        } else {
            Err(Error::InvalidBoost(v.as_f64().abs()))
        }
    }

    pub fn identity() -> Self {
        Self { v: T::zero() }
    }

    pub fn velocity(&self) -> T {
        self.v
    }

    pub fn gamma(&self) -> T {
        (T::one() - self.v * self.v).sqrt().recip()
    }

    pub fn inverse(&self) -> Self {
        Self { v: -self.v }
    }

    pub fn apply(&self, e: Event<T>) -> Event<T> {
        let g = self.gamma();
        Event {
            t: g * (e.t - self.v * e.x),
            x: g * (e.x - self.v * e.t),
        }
    }

    /// Velocity `dx/dt` of a worldline as seen in the boosted frame.
    pub fn transform_velocity(&self, u: T) -> T {
        (u - self.v) / (T::one() - u * self.v)
    }

    /// Slope `dt/dx` of a spacelike line as seen in the boosted frame.
    pub fn transform_slope(&self, s: T) -> T {
        // same algebra as velocity addition with the roles of t and x swapped
        (s - self.v) / (T::one() - s * self.v)
    }
}

/// Convenience wrapper matching the free-function form of the other
/// geometry operations.
pub fn boost_event<T: Real>(e: Event<T>, v: T) -> Result<Event<T>> {
    Ok(Boost::new(v)?.apply(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(t: f64, x: f64) -> Event<f64> {
        Event::new(t, x)
    }

    #[test]
    fn interval_examples() {
        assert_eq!(interval2(ev(0., 0.), ev(1., 0.)), 1.0);
        assert_eq!(interval2(ev(0., 0.), ev(0., 1.)), -1.0);
        assert_eq!(interval2(ev(0., 0.), ev(2., 2.)), 0.0);
    }

    #[test]
    fn classification_examples() {
        let tol = DEFAULT_INTERVAL_TOL;
        assert_eq!(
            causal_relation(ev(0., 0.), ev(1., 0.5), tol),
            CausalRelation::FutureTimelike
        );
        assert_eq!(
            causal_relation(ev(0., 0.), ev(1., 2.), tol),
            CausalRelation::Spacelike
        );
        assert_eq!(
            causal_relation(ev(0., 0.), ev(0., 0.), tol),
            CausalRelation::Coincident
        );
        assert_eq!(
            causal_relation(ev(0., 0.), ev(-1., 1.), tol),
            CausalRelation::PastLightlike
        );
        assert_eq!(
            causal_relation(ev(0., 0.), ev(-3., 1.), tol),
            CausalRelation::PastTimelike
        );
    }

    #[test]
    fn on_cone_probe_is_not_outside() {
        assert!(!strictly_outside_future_cone(ev(0., 0.), ev(1., 1.)));
        assert!(!strictly_outside_future_cone(ev(0., 0.), ev(0., 0.)));
        assert!(strictly_outside_future_cone(ev(0., 0.), ev(1., 1.5)));
        // the causal past counts as outside
        assert!(strictly_outside_future_cone(ev(0., 0.), ev(-2., 0.)));
    }

    #[test]
    fn late_registration_regimes() {
        // photon reflected at (x1, t1) registers at (T, x1 + t1 - T)
        let (x1, x2, t1, big_t) = (0.0, 4.0, 5.0, 100.0);
        let t2 = t1 + (x2 - x1);
        let probe = ev(big_t, x1 + t1 - big_t);
        for &t in &[0.0, 1.0, 2.0, 4.9, 5.0, 5.1, 20.0, 99.0] {
            assert_eq!(
                strictly_outside_future_cone(ev(t, x1), probe),
                t > t1,
                "site x1, t = {t}"
            );
            assert_eq!(
                strictly_outside_future_cone(ev(t, x2), probe),
                t > 2.0 * t1 - t2,
                "site x2, t = {t}"
            );
        }
    }

    #[test]
    fn boost_examples() {
        let b0 = Boost::new(0.0).unwrap();
        assert_eq!(b0.apply(ev(1., 0.)), ev(1., 0.));
        let b = Boost::new(0.6).unwrap();
        assert_eq!(b.apply(ev(0., 0.)), ev(0., 0.));
        let e = b.apply(ev(1., 1.));
        assert!((e.t - 0.5).abs() < 1e-15 && (e.x - 0.5).abs() < 1e-15);
        assert_eq!(Boost::<f64>::new(1.0), Err(Error::InvalidBoost(1.0)));
        assert!(boost_event(ev(1., 1.), -1.5).is_err());
    }

    #[test]
    fn boost_inverse_round_trips() {
        let b = Boost::new(0.8).unwrap();
        let e = ev(3.0, -7.0);
        let back = b.inverse().apply(b.apply(e));
        assert!((back.t - e.t).abs() < 1e-12 && (back.x - e.x).abs() < 1e-12);
    }

    #[test]
    fn worldline_velocity_and_slope_transform() {
        let b = Boost::<f64>::new(0.3).unwrap();
        // a static worldline moves at -v in the boosted frame
        assert!((b.transform_velocity(0.0) + 0.3).abs() < 1e-15);
        // light stays light
        assert!((b.transform_velocity(1.0) - 1.0).abs() < 1e-15);
        let p = b.apply(ev(0.0, 0.0));
        let q = b.apply(ev(0.0, 1.0));
        let slope = (q.t - p.t) / (q.x - p.x);
        assert!((b.transform_slope(0.0) - slope).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let b = Boost::<f32>::new(0.6).unwrap();
        let e = b.apply(Event::new(1.0_f32, 1.0));
        assert!((e.t - 0.5).abs() < 1e-6);
        assert_eq!(
            causal_relation(Event::new(0.0_f32, 0.0), Event::new(1.0, 0.5), 1e-6),
            CausalRelation::FutureTimelike
        );
    }

    #[test]
    fn non_finite_rejected() {
        assert!(Event::try_new(f64::NAN, 0.0).is_err());
        assert!(Event::try_new(0.0, f64::INFINITY).is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1e3..1e3f64
    }

    proptest! {
        #[test]
        fn relation_time_reverses(t1 in coord(), x1 in coord(), t2 in coord(), x2 in coord()) {
            let (a, b) = (ev(t1, x1), ev(t2, x2));
            let tol = DEFAULT_INTERVAL_TOL;
            prop_assert_eq!(causal_relation(a, b, tol), causal_relation(b, a, tol).reversed());
        }

        #[test]
        fn relation_is_boost_invariant(
            t1 in coord(), x1 in coord(), t2 in coord(), x2 in coord(), v in -0.99..0.99f64
        ) {
            let (a, b) = (ev(t1, x1), ev(t2, x2));
            let boost = Boost::new(v).unwrap();
            let tol = DEFAULT_INTERVAL_TOL;
            prop_assert_eq!(
                causal_relation(a, b, tol),
                causal_relation(boost.apply(a), boost.apply(b), tol)
            );
            prop_assert_eq!(
                strictly_outside_future_cone(a, b),
                strictly_outside_future_cone(boost.apply(a), boost.apply(b))
            );
        }

        #[test]
        fn lightlike_pairs_stay_lightlike(
            t in -10.0..10.0f64, x in -10.0..10.0f64, d in 0.01..10.0f64,
            dir in prop::bool::ANY, v in -0.99..0.99f64
        ) {
            let a = ev(t, x);
            let b = ev(t + d, if dir { x + d } else { x - d });
            let boost = Boost::new(v).unwrap();
            let tol = DEFAULT_INTERVAL_TOL;
            prop_assert_eq!(causal_relation(a, b, tol), CausalRelation::FutureLightlike);
            prop_assert_eq!(
                causal_relation(boost.apply(a), boost.apply(b), tol),
                CausalRelation::FutureLightlike
            );
            prop_assert!(!strictly_outside_future_cone(boost.apply(a), boost.apply(b)));
        }

        #[test]
        fn interval_is_boost_invariant(
            t1 in coord(), x1 in coord(), t2 in coord(), x2 in coord(), v in -0.99..0.99f64
        ) {
            let (a, b) = (ev(t1, x1), ev(t2, x2));
            let boost = Boost::new(v).unwrap();
            let s = interval2(a, b);
            let s_boosted = interval2(boost.apply(a), boost.apply(b));
            let scale = (t2 - t1).powi(2) + (x2 - x1).powi(2);
            prop_assert!((s - s_boosted).abs() <= 1e-9 * scale.max(1.0));
        }
    }
}
