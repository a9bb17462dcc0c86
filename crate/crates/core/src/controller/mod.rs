//! Address mapping, per-bank request queues and the FR-FCFS scheduler.

mod mapping;
mod request;
mod scheduler;
mod state_bytes;

pub use mapping::{map_address, unmap_address, MappingPolicy};
pub use request::{MemoryRequest, RowOutcome, RowPolicy};
pub use scheduler::{Controller, ControllerParams, Decision};
pub use state_bytes::{controller_state_bits, controller_state_bytes};
