//! Carrier crate for the acceptance suite in `tests/acceptance.rs`, which
//! checks every acceptance criterion at its pinned tolerance and prints one
//! pass/fail line per criterion.
