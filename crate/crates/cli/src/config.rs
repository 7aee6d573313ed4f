use std::path::{Path, PathBuf};

use roadkernel::{Bindings, Coefficients, KnowledgeGraph};

use crate::CliError;

/// Rules document picked up from the working directory when `--rules` and
/// the environment variable are both absent.
pub const DEFAULT_RULES_PATH: &str = "rules/two_lane_highway.json";

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn load_graph(path: Option<&PathBuf>) -> Result<KnowledgeGraph, CliError> {
    let path = match path {
        Some(p) => p.clone(),
        None if Path::new(DEFAULT_RULES_PATH).is_file() => PathBuf::from(DEFAULT_RULES_PATH),
        None => return Ok(KnowledgeGraph::shipped()),
    };
    KnowledgeGraph::load(read(&path)?.as_bytes())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_coefficients(path: Option<&PathBuf>) -> Result<Coefficients, CliError> {
    match path {
        None => Ok(Coefficients::default()),
        Some(p) => {
            Coefficients::from_json(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn load_bindings(path: Option<&PathBuf>) -> Result<Bindings, CliError> {
    match path {
        None => Ok(Bindings::default()),
        Some(p) => Bindings::from_json(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
    }
}
