//! Holds the workspace acceptance suite (`cargo test -p rydpol-validation --test acceptance`).
