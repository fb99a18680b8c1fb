//! Ordered adjoint logic: mode theories, propositions, a sequent-calculus
//! kernel, cut elimination, explicit and implicit natural deduction, context
//! normal forms and bounded proof search.
pub mod fresh;
pub mod implicit;
pub mod meta;
pub mod modes;
pub mod nd;
pub mod nf;
pub mod parse;
pub mod prop;
pub mod search;
pub mod seq;
pub mod structural;
pub mod translate;
pub mod workspace;

pub use implicit::{check_implicit, elaborate, Skeleton};
pub use meta::{admit_multicut, eliminate_cuts, expand_identity, MetaError};
pub use modes::{ModeDecls, ModeError, ModeId, ModeTheory, Sigma, StructuralProperty};
pub use nd::{check_nd, NdDeriv, NdError, NdRule};
pub use nf::{normal_forms, nf_lift, ContextSet};
pub use prop::{Ctx, Hyp, Prop, PropError, Signature, UnorderedCtx};
pub use search::{decide_small, prove, SearchBudget, Verdict};
pub use seq::{check_seq, CheckOptions, SeqDeriv, SeqRule, Sequent, VarRef};
pub use structural::{Expansion, Structural};
pub use translate::{nd_to_seq, seq_to_nd, substitute};
pub use workspace::{parse_workspace, ProofBody, Workspace};
