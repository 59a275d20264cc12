//! Epistemic logic with common knowledge over groups of agents described by
//! formulas.

pub mod agentlogic;
pub mod formula;
pub mod partition;
pub mod semantics;
pub mod translate;
pub mod mucalc;
pub mod decide;
pub mod proofs;
pub mod scenarios;
pub mod gen;
