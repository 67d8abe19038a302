//! Holds the workspace acceptance suite (`tests/acceptance.rs`), which checks
//! each acceptance criterion end to end and prints one PASS/FAIL line per
//! criterion.
