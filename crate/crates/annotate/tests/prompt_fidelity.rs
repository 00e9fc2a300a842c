use deceit_annotate::prompts::{deception_prompt, speech_act_prompt, DECEPTION_TEMPLATE, SPEECH_ACT_TEMPLATE};
use sha2::{Digest, Sha256};

const SPEECH_ACT_EXPECTED: &str = "You are a library assistant. Assign one of the following words to the following text based on the definition of the word and the content of the text. \n\nText: [TEXT]\n\nWord options:\n\nRepresentatives \u{2014} The speaker commits themselves to the belief that the propositional content is true.\n\nDirectives \u{2014} The speaker tries to get the hearer to commit to an action in the future.\n\nCommissives \u{2014} The speaker commits to doing something in the future.\n\nExpressives \u{2014} The speaker expresses their state of mind about something that happened in the past.\n\nDeclarations \u{2014} The speaker, with institutional recognition, declares something to be true and makes it true by declaring it.\n\nOnly output one word. Do not output any words not in the list of word options.";

const DECEPTION_EXPECTED: &str = "You are a library assistant. Assign one of the following words to each \u{2018}text\u{2019} entry based on its content and the provided \u{2018}discussion\u{2019}.\n\nDiscussion: [DISCUSSION]\n\nText: [TEXT]\n\nWord options:  \nFalsification (lying), Concealment (omitting material facts), or Equivocation (skirting issues by changing the subject or responding indirectly).\n\nOnly output one word per entry. Do not output any words that are not in the list of word options.";

const SPEECH_ACT_SHA256: &str = "f1cea95659e53a7b7cf0db80a7b235e8165a401db64a230518951693edae14dd";
const DECEPTION_SHA256: &str = "6f36a730f43001604799da41fda3f0b77d5ff7377a1dd950021c7e7b41871bfb";

fn sha256_hex(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn templates_match_reference_bytes() {
    assert_eq!(SPEECH_ACT_TEMPLATE, SPEECH_ACT_EXPECTED);
    assert_eq!(DECEPTION_TEMPLATE, DECEPTION_EXPECTED);
    assert_eq!(sha256_hex(SPEECH_ACT_TEMPLATE), SPEECH_ACT_SHA256);
    assert_eq!(sha256_hex(DECEPTION_TEMPLATE), DECEPTION_SHA256);
    assert!(SPEECH_ACT_TEMPLATE.contains("Only output one word."));
    assert!(DECEPTION_TEMPLATE.contains("Only output one word per entry."));
}

#[test]
fn rendered_prompts_differ_only_at_placeholders() {
    let p = speech_act_prompt("Let's all check Electrical next.");
    assert_eq!(p, SPEECH_ACT_EXPECTED.replace("[TEXT]", "Let's all check Electrical next."));
    let p = deception_prompt("I was in Medbay the whole time", "Red: where were you?");
    assert_eq!(
        p,
        DECEPTION_EXPECTED
            .replace("[DISCUSSION]", "Red: where were you?")
            .replace("[TEXT]", "I was in Medbay the whole time")
    );
}
