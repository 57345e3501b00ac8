//! Small tokenization and casing helpers shared across the pipeline.

/// Whitespace tokenization with terminal punctuation split off, so
/// `"...Mckinley?"` and `"...Mckinley ?"` tokenize identically.
pub fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in line.split_whitespace() {
        let mut word = raw;
        let mut tail = Vec::new();
        while let Some(last) = word.chars().last() {
            if matches!(last, '?' | '.' | ',' | '!') && word.chars().count() > 1 {
                tail.push(last.to_string());
                word = &word[..word.len() - last.len_utf8()];
            } else {
                break;
            }
        }
        if !word.is_empty() {
            out.push(word.to_string());
        }
        out.extend(tail.into_iter().rev());
    }
    out
}

pub fn is_punct(token: &str) -> bool {
    token.chars().all(|c| c.is_ascii_punctuation()) && !token.starts_with('<')
}

pub fn capitalize(token: &str) -> String {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

pub fn join(tokens: &[String]) -> String {
    tokens.join(" ")
}

pub fn eq_tokens_ci(a: &[String], b: &[String]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.to_lowercase() == y.to_lowercase())
}
