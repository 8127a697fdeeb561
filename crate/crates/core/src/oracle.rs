//! Discrete solvers (stub).
