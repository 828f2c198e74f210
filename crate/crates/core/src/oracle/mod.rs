//! Exact dense computations on finite ensembles and randomized checks of the
//! supporting inequalities. Used as ground truth for the estimators.

mod dense;
mod ensembles;
mod exact;
mod lemmas;
mod suites;

pub use ensembles::{
    random_graph_ensemble, random_orthogonal, random_psd, random_spd, random_unshifted, random_wide, with_spectrum,
    RandomEnsemble,
};
pub use exact::{
    exact_accelerated_factor, exact_beta_ag, exact_beta_basic, exact_beta_energy, exact_energy_errors,
    exact_truncated_chain, exact_truncated_factor, explicit_order_two, shift_for, AgFactors, ExactMoments,
    MAX_ORACLE_DIM, MAX_ORACLE_ORDER,
};
pub use lemmas::{check_loewner, check_monotone_ratio, check_neumann_tail, check_trace_inequality, LemmaReport, NeumannReport, EIG_SLACK};
pub use suites::{
    ag_bound_suite, chain_violation, loewner_suite, monotone_ratio_suite, neumann_suite, run_lemma_suites,
    shifted_chain_suite, soft_chain_suite, trace_inequality_suite, SuiteResult, SuiteSizes, CHAIN_TOL,
};

use nalgebra::DMatrix;

use crate::linalg::SpdOperator;
use crate::noise::DiscreteEnsemble;

/// The scalar ensemble `Â ∈ {0.5, 1.5}` with equal mass about `A = 1`.
pub fn scalar_two_point() -> (DMatrix<f64>, DiscreteEnsemble) {
    let e = DiscreteEnsemble::uniform(vec![SpdOperator::scalar(0.5), SpdOperator::scalar(1.5)])
        .expect("two equal-mass scalar outcomes form a valid ensemble");
    (DMatrix::from_element(1, 1, 1.0), e)
}
