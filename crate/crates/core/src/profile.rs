//! Lexing profiles: the per-language knobs the tokenizer needs.
//!
//! A profile is a plain TOML document. Three profiles ship embedded in the
//! binary (`python-like`, `java-like`, `mini`); anything else passed to
//! [`load_profile`] is treated as a path.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

const PYTHON_LIKE: &str = include_str!("../profiles/python_like.toml");
const JAVA_LIKE: &str = include_str!("../profiles/java_like.toml");
const MINI: &str = include_str!("../profiles/mini.toml");

/// Names of the profiles compiled into the crate.
pub const BUILTIN_PROFILES: &[&str] = &["python-like", "java-like", "mini"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexProfile {
    pub name: String,
    pub keywords: BTreeSet<String>,
    /// Keywords that open definition/import lines; must be a subset of `keywords`.
    pub def_keywords: BTreeSet<String>,
    /// Operator token texts, scanned longest-match-first.
    pub operators: Vec<String>,
    #[serde(default)]
    pub line_comments: Vec<String>,
    /// (open, close) marker pairs.
    #[serde(default)]
    pub block_comments: Vec<(String, String)>,
    /// String delimiters; an entry longer than one character may span lines.
    #[serde(default)]
    pub string_delims: Vec<String>,
}

impl LexProfile {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(CoreError::config("name", "profile name must be non-empty"));
        }
        if self.operators.is_empty() {
            return Err(CoreError::config(
                "operators",
                "operator list must be non-empty",
            ));
        }
        let mut seen = BTreeSet::new();
        for op in &self.operators {
            if op.is_empty() {
                return Err(CoreError::config("operators", "empty operator text"));
            }
            if !seen.insert(op.as_str()) {
                return Err(CoreError::config(
                    "operators",
                    format!("duplicate operator `{op}`"),
                ));
            }
        }
        for kw in &self.def_keywords {
            if !self.keywords.contains(kw) {
                return Err(CoreError::config(
                    "def_keywords",
                    format!("`{kw}` is not in keywords"),
                ));
            }
        }
        for marker in &self.line_comments {
            if marker.is_empty() {
                return Err(CoreError::config("line_comments", "empty marker"));
            }
        }
        for (open, close) in &self.block_comments {
            if open.is_empty() || close.is_empty() {
                return Err(CoreError::config("block_comments", "empty marker"));
            }
        }
        for d in &self.string_delims {
            if d.is_empty() {
                return Err(CoreError::config("string_delims", "empty delimiter"));
            }
        }
        Ok(())
    }

    /// Operators ordered for longest-match scanning.
    pub(crate) fn operators_longest_first(&self) -> Vec<&str> {
        let mut ops: Vec<&str> = self.operators.iter().map(String::as_str).collect();
        ops.sort_by(|a, b| b.len().cmp(&a.len()));
        ops
    }
}

fn parse(text: &str, origin: &str) -> Result<LexProfile> {
    let profile: LexProfile = toml::from_str(text).map_err(|e| CoreError::Config {
        field: "profile".into(),
        message: format!("{origin}: {e}"),
    })?;
    profile.validate()?;
    Ok(profile)
}

/// Resolve a builtin profile name or a path to a profile document.
pub fn load_profile(name_or_path: &str) -> Result<LexProfile> {
    match name_or_path {
        "python-like" => return parse(PYTHON_LIKE, "builtin python-like"),
        "java-like" => return parse(JAVA_LIKE, "builtin java-like"),
        "mini" => return parse(MINI, "builtin mini"),
        _ => {}
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        parse(&text, name_or_path)
    } else {
        Err(CoreError::config(
            "profile",
            format!(
                "`{name_or_path}` is neither a builtin profile ({}) nor an existing file",
                BUILTIN_PROFILES.join(", ")
            ),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load_and_validate() {
        for name in BUILTIN_PROFILES {
            let p = load_profile(name).unwrap();
            assert_eq!(&p.name, name);
        }
    }

    #[test]
    fn python_def_keywords() {
        let p = load_profile("python-like").unwrap();
        let expected: BTreeSet<String> = ["def", "import", "from", "class"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(p.def_keywords, expected);
    }

    #[test]
    fn java_def_keywords() {
        let p = load_profile("java-like").unwrap();
        assert!(p.def_keywords.contains("package"));
        assert!(p.def_keywords.contains("public"));
    }

    #[test]
    fn unknown_name_is_config_error() {
        let err = load_profile("no-such-profile").unwrap_err();
        assert!(matches!(err, CoreError::Config { .. }), "{err}");
    }

    #[test]
    fn duplicate_operator_rejected() {
        let doc = r#"
            name = "x"
            keywords = []
            def_keywords = []
            operators = ["+", "+"]
        "#;
        let err = parse(doc, "inline").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("operators"), "{msg}");
    }

    #[test]
    fn def_keyword_outside_keywords_rejected() {
        let doc = r#"
            name = "x"
            keywords = ["if"]
            def_keywords = ["def"]
            operators = ["+"]
        "#;
        let err = parse(doc, "inline").unwrap_err();
        assert!(err.to_string().contains("def_keywords"), "{err}");
    }

    #[test]
    fn profile_loads_from_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.toml");
        std::fs::write(
            &path,
            "name = \"toy\"\nkeywords = [\"fn\"]\ndef_keywords = [\"fn\"]\noperators = [\"+\"]\n",
        )
        .unwrap();
        let p = load_profile(path.to_str().unwrap()).unwrap();
        assert_eq!(p.name, "toy");
    }
}
