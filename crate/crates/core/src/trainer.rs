//! Trainer (stub).
