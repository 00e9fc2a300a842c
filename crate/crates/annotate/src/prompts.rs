//! Classification prompt templates. The files are kept byte-for-byte; only
//! the placeholders are substituted.

pub const SPEECH_ACT_TEMPLATE: &str = include_str!("../prompts/speech_act.txt");
pub const DECEPTION_TEMPLATE: &str = include_str!("../prompts/deception.txt");

pub const TEXT_PLACEHOLDER: &str = "[TEXT]";
pub const DISCUSSION_PLACEHOLDER: &str = "[DISCUSSION]";

/// Replaces placeholders in one left-to-right pass, so substituted text is
/// never scanned again.
fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    loop {
        let next = values
            .iter()
            .filter_map(|(ph, v)| rest.find(ph).map(|i| (i, *ph, *v)))
            .min_by_key(|(i, _, _)| *i);
        match next {
            Some((i, ph, v)) => {
                out.push_str(&rest[..i]);
                out.push_str(v);
                rest = &rest[i + ph.len()..];
            }
            None => {
                out.push_str(rest);
                return out;
            }
        }
    }
}

pub fn speech_act_prompt(text: &str) -> String {
    fill(SPEECH_ACT_TEMPLATE, &[(TEXT_PLACEHOLDER, text)])
}

pub fn deception_prompt(text: &str, discussion: &str) -> String {
    fill(
        DECEPTION_TEMPLATE,
        &[(DISCUSSION_PLACEHOLDER, discussion), (TEXT_PLACEHOLDER, text)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_substituted_once() {
        let p = deception_prompt("says [DISCUSSION]", "Red: hi [TEXT]");
        assert!(p.contains("Discussion: Red: hi [TEXT]\n"));
        assert!(p.contains("Text: says [DISCUSSION]\n"));
        let p = speech_act_prompt("Let's go.");
        assert!(p.contains("\nText: Let's go.\n"));
        assert!(!p.contains(TEXT_PLACEHOLDER));
    }
}
