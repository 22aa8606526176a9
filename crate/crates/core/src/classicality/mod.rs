//! Membership in classical sets, critical visibilities, and dual
//! certificates.

pub mod battery;
pub mod bell;
pub mod bruteforce;
pub mod certificate;
pub mod conic;
pub mod pm;
pub mod simplex;
pub mod steering;
pub mod strategies;

pub use battery::{monotonicity_battery, BatteryInstance, BatteryReport, PairResult};
pub use bell::{bell_critical_visibility, bell_critical_visibility_with, BellAnalysis};
pub use bruteforce::{
    bell_bruteforce_visibility, bell_membership_bruteforce, pm_bruteforce_visibility, pm_membership_bruteforce,
    Membership,
};
pub use certificate::{
    bell_local_bound, pm_classical_bound, steering_lhs_bound, verify_certificate, Certificate, CertificateDocument,
    CertificateKind, Coefficients, VerificationReport,
};
pub use conic::{ProgressHook, SolveOptions, SolverStats};
pub use pm::{
    pm_critical_visibility, pm_critical_visibility_with, pm_no_communication_visibility, rac_binarised_witness,
    rac_binarised_witness_classical_max, rac_binarised_witness_value, PmAnalysis,
};
pub use steering::{steering_critical_visibility, steering_critical_visibility_with, SteeringAnalysis};
pub use strategies::DeterministicStrategy;
