//! Quantitative side of the construction: domain-loss sequence, combinatorial
//! sequences, recursive norm bounds, Cauchy estimates and the convergence certificate.

mod cauchy;
mod estimates;
mod ledger;
mod sequences;

pub use cauchy::{
    cauchy_trials, verify_cauchy, CauchyCheck, CauchyReport, CauchySuiteReport, CauchyTrialConfig, CheckSummary,
    CAUCHY_CHECKS,
};
pub use estimates::{constant_c, lemma3_bounds, majorize_input, InputMajorant, Lemma3Bounds, LedgerInputs, TailBound};
pub use ledger::{
    build_ledger, chi_norms, fit_certificate, ledger_from_states, ledger_gamma, BoundLedger, Certificate, LedgerRow,
    TailRow, DEFAULT_MARGIN,
};
pub use sequences::{
    catalan, catalan_closed, catalan_table, check_integer_sequences, check_t_properties, mu, pow4, t_bound, t_definition, t_exact, t_value,
    DeltaSequence, MuTable, PropertyViolation, SequenceReport, TPath, TPropertyReport, T_DEFINITION_MAX_VISITS, T_EXACT_MAX_S,
    T_PROPERTY_TOLERANCE,
};
