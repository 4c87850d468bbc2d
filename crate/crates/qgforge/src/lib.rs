//! qgforge constructs executable query graphs from natural-language
//! questions over an in-memory knowledge graph. Generation is
//! hierarchical: an abstract query graph (AQG) is outlined first, then
//! its slots are filled with concrete instances under execution-guided
//! beam search. A SPARQL-subset bridge converts between programs and
//! graphs, and a small trainable scorer drives both decoding phases.

pub mod graph;
pub mod sparql;
pub mod value;
