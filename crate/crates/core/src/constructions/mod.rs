//! Executable agents that realise classical machines on the Quest Graph
//! engines, each paired with a conformance check against its oracle.

pub mod cfl_nfqdp;
pub mod dpda_fqdp;
pub mod lm_fsm;
pub mod tm_qg;
pub mod tm_rqdp;
