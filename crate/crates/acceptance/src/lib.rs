//! Test-only crate; see `tests/acceptance.rs`. Each criterion prints one
//! `criterion N: PASS|FAIL` line to stderr (uncaptured), followed by
//! indented detail lines.
