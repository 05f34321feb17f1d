//! Kernelization toolkit for the Traveling Salesperson Problem, Subset TSP
//! and Waypoint Routing.

pub mod fes;
pub mod gadgets;
mod graph;
pub mod instance;
pub mod modulator;
pub mod oracle;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod vc;

pub use instance::{parse_instance, Capacity, Edge, Instance, Kind};
pub use report::{KernelOutcome, KernelReport, KernelResult};

/// The user guide; its examples run as doc-tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/instances.md")]
    pub mod instances {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    pub mod oracles {}
    #[doc = include_str!("../../../book/src/kernel_fes.md")]
    pub mod kernel_fes {}
    #[doc = include_str!("../../../book/src/kernel_vc.md")]
    pub mod kernel_vc {}
    #[doc = include_str!("../../../book/src/kernel_modulator.md")]
    pub mod kernel_modulator {}
    #[doc = include_str!("../../../book/src/gadgets.md")]
    pub mod gadgets {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
