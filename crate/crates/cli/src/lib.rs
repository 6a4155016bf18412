//! IO, file formats, travel-provider construction, LP export, and the
//! experiment harness around `lad-core`.

pub mod bench;
pub mod generator;
pub mod io;
pub mod lp;
pub mod travel;

use thiserror::Error;

/// Scenario or argument problems: exit code 1.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

/// Solver reported infeasibility (or ran out of time empty-handed): exit
/// code 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct SolverFailure(pub String);

/// External provider trouble (network, protocol, malformed tables): exit
/// code 3.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct ProviderFailure(pub String);

/// Maps an error chain to the documented process exit codes.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<SolverFailure>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<ProviderFailure>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
        {
            return 3;
        }
        if cause.downcast_ref::<ValidationError>().is_some() {
            return 1;
        }
    }
    1
}
