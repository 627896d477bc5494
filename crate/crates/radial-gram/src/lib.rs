//! Numerical certification of length-radial positive definite and
//! conditionally negative definite functions on free products.
//!
//! The crate is organized around one pipeline:
//!
//! * [`words`] — reduced words of the free group, the free real line,
//!   and the coordinate direct sum, with their `l^p` length functionals;
//! * [`embedding`] — the exact prefix-key embedding realizing squared
//!   `l^2` lengths as squared Hilbert-space distances;
//! * [`gram`] — symmetric Gram assembly and a self-contained Jacobi
//!   eigensolver backing the PSD / CND verdicts;
//! * [`profiles`] — discrete representing measures and the profile
//!   evaluations they induce on the length semigroups;
//! * [`moments`] — the inverse direction: Hankel feasibility and
//!   Prony-style recovery of representing measures from moments;
//! * [`transfer`] — replicated witness families moving group-level
//!   positivity to the length semigroup with an explicit defect;
//! * [`campaigns`] — seeded trial campaigns certifying each statement,
//!   shared by the CLI and the acceptance suite.

pub mod campaigns;
pub mod embedding;
pub mod gram;
pub mod moments;
pub mod profiles;
pub mod transfer;
pub mod words;

pub use campaigns::{run_campaign, CampaignConfig, CampaignReport, CampaignTag};
pub use embedding::{classify_pair, embed, sq_distance, EmbeddingVector, PairCase};
pub use gram::{
    check_cnd, check_psd, default_tol, group_gram, semigroup_gram, GramReport, SymMatrix, Verdict,
};
pub use moments::{
    hankel_feasible, recover_laplace, recover_measure, uniqueness_gap, MomentSequence,
};
pub use profiles::{Atom, DiscreteMeasure, ProfileFile};
pub use transfer::{
    build_family_d, build_family_f, build_family_r, pair_index, radial_to_semigroup,
    transfer_bound_check, FamilySpace, FamilySpec, WitnessFamily,
};
pub use words::{CoordVector, FreeWord, GeneratorId, LengthValue, RealFreeWord, Space, Word};
