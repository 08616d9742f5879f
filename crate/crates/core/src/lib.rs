//! Local beables on a toy 1+1D spacetime, and locality audits for Bell-type
//! hidden-variable models.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod beables;
pub mod error;
pub mod locality;
pub mod models;
pub mod real;
pub mod spacetime;
pub mod toyqm;

pub use error::{Error, Result};
pub use real::Real;

pub type Event64 = spacetime::Event<f64>;
pub type Boost64 = spacetime::Boost<f64>;
pub type ToyConfig64 = toyqm::ToyConfig<f64>;
pub type BranchSet64 = toyqm::BranchSet<f64>;
pub type FinalCondition64 = toyqm::FinalCondition<f64>;
pub type GridSpec64 = beables::GridSpec<f64>;
pub type BeableField64 = beables::BeableField<f64>;
pub type RegimeTable64 = beables::RegimeTable<f64>;
pub type FiniteHVModel64 = locality::FiniteHVModel<f64>;
pub type AuditReport64 = locality::AuditReport<f64>;
pub type ObservableStats64 = locality::ObservableStats<f64>;
pub type Ket4_64 = models::Ket4<f64>;
pub type BellSettings64 = models::BellSettings<f64>;
pub type PWConfig64 = models::PWConfig<f64>;
pub type PWStats64 = models::PWStats<f64>;
