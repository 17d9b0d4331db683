//! Seeded audit harness: the case registry, reports, the scheme expression
//! language and scheme files.

mod cases_math;
mod cases_schemes;
pub mod expr;
pub mod gallery;
pub mod io;
pub mod registry;
pub mod report;

pub use expr::{eval_attack, eval_scheme, parse_expr, SchemeValue, ATTACK_NAMES};
pub use gallery::{attack_gallery, evaluate_gallery, GalleryAttack, GalleryResult, GallerySummary};
pub use io::{load_channel, load_scheme, save_channel, save_scheme, SchemeFile, SCHEMA_VERSION};
pub use registry::{list_audits, run_all, run_audit, AuditCase, AuditInfo, Ctx, Outcome, MAX_DIM_CAP};
pub use report::{emit_report, emit_reports, AuditReport, Check, CheckKind, ReportFormat, IDENTITY_TOL, INEQUALITY_TOL};
