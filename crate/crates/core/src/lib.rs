//! Code-mixed machine translation lab.
//!
//! * [`corpus`]: parallel datasets, splitting, output cleaning, diagnostics
//! * [`prompts`]: k-shot, rule-chain, extraction and chatbot prompts
//! * [`llm`]: chat-completion backends with retries, rate limiting and replay
//! * [`metrics`]: corpus BLEU, ROUGE-L and METEOR
//! * [`runner`]: end-to-end experiments and result tables
//! * [`chatbot`]: hierarchical retrieval and the code-mixed answer pipeline

pub mod chatbot;
pub mod corpus;
pub mod llm;
pub mod metrics;
pub mod par;
pub mod prompts;
pub mod runner;
