//! Players for the deduction game: deterministic scripted policies and an
//! adapter for chat-completion models.

pub mod chat;
pub mod llm;
pub mod mock;
pub mod prompt;
pub mod response;
pub mod scripted;

pub use chat::{ChatClient, ChatEndpointConfig, Completion, ConfigError};
pub use llm::{Completer, LlmAgent, DEFAULT_HISTORY_WINDOW};
pub use prompt::{build_prompt, Prompt, PromptContext, RoleInstructions};
pub use response::{parse_response, render_response, AgentResponse, ActionMenu, Parsed};
pub use scripted::{scripted_roster, MeetingScript, ScriptedAgent, ScriptedProfile, TaskPolicy};
