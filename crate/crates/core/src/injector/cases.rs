//! On-disk program cases: a correct program plus the tests defining it.
//!
//! Layout per case directory:
//!
//! ```text
//! countdown/
//!   meta.toml        # name/profile, optional command tests
//!   correct.mini     # the known-good program (any `correct.*` name)
//!   tests/
//!     01.in  01.out  # stdin / expected-stdout pairs, paired by stem
//!     02.in  02.out
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CoreError, Result};
use crate::injector::runner::TestSpec;

#[derive(Debug, Clone)]
pub struct ProgramCase {
    pub name: String,
    pub correct_source: String,
    pub profile_name: String,
    pub tests: Vec<TestSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    name: Option<String>,
    profile: String,
    #[serde(default)]
    tests: Vec<MetaTest>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaTest {
    command: String,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))
}

/// Load one case directory.
pub fn load_case(dir: &Path) -> Result<ProgramCase> {
    let meta_path = dir.join("meta.toml");
    let meta: MetaFile = toml::from_str(&read(&meta_path)?)
        .map_err(|e| CoreError::config("meta.toml", format!("{}: {e}", meta_path.display())))?;
    let name = meta.name.unwrap_or_else(|| {
        dir.file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| "case".into())
    });

    let mut correct: Option<PathBuf> = None;
    for entry in std::fs::read_dir(dir).map_err(|e| CoreError::io(dir, e))? {
        let path = entry.map_err(|e| CoreError::io(dir, e))?.path();
        if path.is_file()
            && path
                .file_stem()
                .is_some_and(|s| s.to_string_lossy() == "correct")
        {
            if let Some(previous) = &correct {
                return Err(CoreError::config(
                    "correct",
                    format!(
                        "case `{name}` has both {} and {}",
                        previous.display(),
                        path.display()
                    ),
                ));
            }
            correct = Some(path);
        }
    }
    let correct = correct.ok_or_else(|| {
        CoreError::config("correct", format!("case `{name}` has no correct.* file"))
    })?;
    let correct_source = read(&correct)?;

    let mut tests: Vec<TestSpec> = Vec::new();
    let tests_dir = dir.join("tests");
    if tests_dir.is_dir() {
        let mut stems: Vec<PathBuf> = std::fs::read_dir(&tests_dir)
            .map_err(|e| CoreError::io(&tests_dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "in"))
            .collect();
        stems.sort();
        for input_path in stems {
            let output_path = input_path.with_extension("out");
            if !output_path.is_file() {
                return Err(CoreError::config(
                    "tests",
                    format!("{} has no matching .out file", input_path.display()),
                ));
            }
            tests.push(TestSpec::Io {
                input: read(&input_path)?,
                expected: read(&output_path)?,
            });
        }
    }
    for t in meta.tests {
        tests.push(TestSpec::Command { command: t.command });
    }
    if tests.is_empty() {
        return Err(CoreError::config(
            "tests",
            format!("case `{name}` defines no tests"),
        ));
    }

    Ok(ProgramCase {
        name,
        correct_source,
        profile_name: meta.profile,
        tests,
    })
}

/// Load every case directory under `root`, sorted by name.
pub fn load_cases(root: &Path) -> Result<Vec<ProgramCase>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(|e| CoreError::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("meta.toml").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CoreError::config(
            "cases",
            format!("no case directories under {}", root.display()),
        ));
    }
    dirs.iter().map(|d| load_case(d)).collect()
}
