//! Placeholder library target; the package exists for its criterion benches.
