//! Travelling-wave solutions of autonomous polynomial PDEs by single, double
//! and triple function-expansion ansatze, with exact verification.

pub mod symcore;
pub mod pdeparse;
pub mod reduce;
pub mod auxreg;
pub mod ansatz;
pub mod collect;
pub mod algsolve;
pub mod verify;
pub mod pipeline;
