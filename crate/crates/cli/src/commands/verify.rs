use std::fs;
use std::path::Path;

use binarise::classicality::{verify_certificate, Certificate, VerificationReport};
use binarise::scenarios::CorrelationObject;
use binarise::Error;

use crate::error::{CliError, CliResult};

/// Loads both files and verifies. A failed check is reported as
/// [`CliError::Invariant`], a scenario mismatch as [`CliError::Usage`].
pub fn run(certificate: &Path, object: &Path) -> CliResult<VerificationReport> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| CliError::io(p, e));
    let cert_text = read(certificate)?;
    let object_text = read(object)?;
    let cert = Certificate::from_json(&cert_text)
        .map_err(|e| CliError::Usage(format!("{}: not a certificate: {e}", certificate.display())))?;
    let object = CorrelationObject::from_json(&object_text)
        .map_err(|e| CliError::Usage(format!("{}: not a correlation object: {e}", object.display())))?;
    let report = match verify_certificate(&cert, &object) {
        Ok(r) => r,
        Err(e @ Error::ScenarioMismatch(_)) => return Err(CliError::Usage(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::Invariant(report.messages.join("; ")))
    }
}
