//! Whole-input entry points: schema bytes to a compiled schema, document
//! bytes to an outcome.

use crate::content::{compile_schema, CompiledSchema};
use crate::diag::Diagnostic;
use crate::limits::Limits;
use crate::validate::{validate_document, Verdict};
use crate::xml::parse_document;
use crate::xsd::{build_schema, resolve_refs, screen_constructs, SchemaError};

fn diagnostics(errors: Vec<SchemaError>) -> Vec<Diagnostic> {
    errors.iter().map(SchemaError::to_diagnostic).collect()
}

/// parse, screen, build, resolve, compile. Stops at the first stage that
/// reports anything and returns all of that stage's diagnostics.
pub fn compile_schema_bytes(bytes: &[u8], limits: &Limits) -> Result<CompiledSchema, Vec<Diagnostic>> {
    let doc = parse_document(bytes, limits).map_err(|e| vec![e.to_diagnostic()])?;
    screen_constructs(&doc).map_err(diagnostics)?;
    let model = build_schema(&doc, limits).map_err(diagnostics)?;
    let resolved = resolve_refs(&model).map_err(diagnostics)?;
    compile_schema(&resolved, limits).map_err(diagnostics)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DocOutcome {
    NotWellFormed(Diagnostic),
    Checked(Verdict),
}

impl DocOutcome {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            DocOutcome::NotWellFormed(d) => std::slice::from_ref(d),
            DocOutcome::Checked(v) => v.diagnostics(),
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            DocOutcome::NotWellFormed(_) => false,
            DocOutcome::Checked(v) => v.is_valid(),
        }
    }
}

pub fn check_document(bytes: &[u8], schema: &CompiledSchema, limits: &Limits) -> DocOutcome {
    match parse_document(bytes, limits) {
        Ok(doc) => DocOutcome::Checked(validate_document(&doc, schema)),
        Err(e) => DocOutcome::NotWellFormed(e.to_diagnostic()),
    }
}
