//! Speech-act and deception labelling of meeting utterances, plus the
//! agreement and stability measures used to judge the labels.

pub mod agreement;
pub mod backend;
pub mod corpus;
mod error;
pub mod keys;
pub mod labels;
pub mod prompts;

pub use agreement::{agreement, stability, Agreement, PairAgreement, StabilityReport};
pub use backend::{classify_deception, classify_speech_act, Backend, ChatBackend, ClassifyRequest, ReplayBackend, RuleBackend};
pub use corpus::{AnnotatedCorpus, AnnotatedUtterance, AnnotationRun, DiscussionWindow, RunInfo, Task, UNCLASSIFIABLE};
pub use error::AnnotateError;
pub use keys::UtteranceKey;
pub use labels::{DeceptionLabel, SpeechAct};
