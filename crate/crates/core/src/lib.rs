// SPDX-License-Identifier: Apache-2.0

//! Concurrency bug report classification with linguistic patterns.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod lexicon;
pub mod llmbridge;
pub mod manifest;
pub mod patterns;
pub mod pipeline;
pub mod synth;
pub mod textproc;
