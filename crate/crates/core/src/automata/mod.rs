//! Classical machines and their direct executions. These serve as oracles
//! for every construction built on the Quest Graph engines.

pub mod cfg;
pub mod dpda;
pub mod fixtures;
pub mod fsm;
pub mod lm;
pub mod tm;

pub use cfg::{cyk_member, cyk_table, CnfGrammar, CykResult};
pub use dpda::{dpda_run, validate_dpda, Acceptance, Dpda, DpdaConfig, DpdaOutcome, DpdaRule, DpdaStatus, StackOp};
pub use fsm::{fsm_run, Fsm, FsmOutcome};
pub use lm::{lm_run, LmError, LmTable};
pub use tm::{tm_run, Move, TmOutcome, TmStatus, TuringMachine};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("{0}")]
    Invalid(String),
}
