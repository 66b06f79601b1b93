//! Holds the `acceptance` test target, which prints one pass/fail line per
//! criterion and exits non-zero if any criterion fails.
//!
//! It is a separate package so that it runs after every other test binary in
//! `cargo test --workspace`.
