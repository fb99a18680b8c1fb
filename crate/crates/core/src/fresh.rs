use std::collections::HashSet;

/// Prefix reserved for generated variable names.
pub const RESERVED_PREFIX: char = '_';

/// Generates variable names that avoid every name it has been told about.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    used: HashSet<String>,
    counter: usize,
}

impl NameSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn avoid<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.used.extend(names.into_iter().map(Into::into));
    }

    pub fn fresh(&mut self, hint: &str) -> String {
        let base: String = hint
            .trim_start_matches(RESERVED_PREFIX)
            .trim_end_matches(|c: char| c.is_ascii_digit())
            .to_string();
        let base = if base.is_empty() { "v".to_string() } else { base };
        loop {
            self.counter += 1;
            let name = format!("{RESERVED_PREFIX}{base}{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}
