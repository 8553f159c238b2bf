//! Multiple cache paging: `m` caches of `k` slots each serve a batch of `m`
//! requests per time slot, one request per cache.
//!
//! The crate provides the slot engine, request generators, online policies,
//! offline baselines, closed-form bounds and an experiment harness.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod harness;
pub mod model;
pub mod offline;
pub mod policies;
pub mod popularity;
pub mod workloads;

pub use engine::{
    apply_service, run_simulation, run_simulation_keeping_batches, BatchSource, Policy,
    SimulationOptions, SimulationRun, SimulationTrace, Workload,
};
pub use error::{Error, Result};
pub use model::{
    CacheBankState, CacheState, ContentId, FaultLedger, Matching, PolicyDecision, RequestBatch,
};
pub use popularity::{CatalogPopularity, ContentSampler};
