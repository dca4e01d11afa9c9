use serde::{Deserialize, Serialize};

use crate::document::Summary;

pub const TEMPLATE_ID: &str = "claims-v1";

/// Instruction block with one worked example. The target summary is appended
/// after the final `INPUT:` line.
pub const INSTRUCTIONS: &str = r#"We define a claim as an "elementary information unit in a sentence, which no longer needs to be further split."
For example, given the following sentence:
INPUT:
NASA's Perseverance rover has discovered ancient microbial life on Mars according to a recent study published in the journal Science. It established a set of new paradigms for space exploration"

OUTPUT:
{'claims': ["NASA's Perseverance rover discovered ancient microbial life.",
"Ancient microbial life was discovered on Mars.",
"The discovery was made according to a recent study.",
"The study was published in the journal Science.",
"The study established a set of new paradigms for space exploration."]}

Please consider the following recommendations:
If possible, use a noun as the subject in the claim (try to avoid pronouns), such as "The study established a set of new paradigms for space exploration." in the previous example.
Do not generate any novel word, be faithful to the provided input.
Your response must be directly the json, do not add any other text, such as "Here is the output:" and similar. Note that, each fact expressed in the source text must be present in the output. 

Now do this task for this input
INPUT: "#;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimPrompt {
    pub template_id: String,
    pub rendered: String,
}

impl ClaimPrompt {
    /// The summary text as inserted into the prompt.
    pub fn input(&self) -> &str {
        &self.rendered[INSTRUCTIONS.len()..]
    }
}

/// Render the extraction prompt for `summary`. The summary is inserted
/// verbatim, without escaping.
pub fn build_prompt(summary: &Summary) -> ClaimPrompt {
    let mut rendered = String::with_capacity(INSTRUCTIONS.len() + summary.text.len());
    rendered.push_str(INSTRUCTIONS);
    rendered.push_str(&summary.text);
    ClaimPrompt {
        template_id: TEMPLATE_ID.to_string(),
        rendered,
    }
}
