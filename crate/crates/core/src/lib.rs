//! Building blocks for retrieval-augmented in-context emotion recognition.
//!
//! Auxiliary-model outputs (one emotion vector and one probability
//! distribution per sample) are read from store files. For each query the
//! pipeline retrieves the most emotion-similar training samples, gives each a
//! soft label mixing its gold emotion with the auxiliary model's top
//! predictions, splits the label space into possible and impossible
//! candidates, and renders a prompt asking the model to prefer the possible
//! set.

pub mod corpus;
pub mod error;
pub mod label;
pub mod labeling;
pub mod metrics;
pub mod partition;
pub mod pilot;
pub mod prompting;
pub mod report;
pub mod retrieval;
pub mod store;

pub use corpus::{filter_corpus, load_corpus, Corpus, Sample, Split, SplitSpec};
pub use error::{Error, Result};
pub use label::{align_label_spaces, EmotionLabel, LabelSpace};
pub use labeling::{build_soft_label, top_k2_emotions, SoftLabel, SoftLabelEntry};
pub use partition::{divide_candidates, CandidatePartition};
pub use prompting::{
    parse_response, render_prompt, Demonstration, ParsedPrediction, RenderedPrompt, Template,
    TemplateRegistry,
};
pub use retrieval::{cosine, top_k_among, top_k_similar, ScoredNeighbor};
pub use store::{ingest_store, project_distribution, AuxRecord, AuxStore, EmotionDistribution, EmotionVector};
