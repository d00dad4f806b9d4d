//! System specification files (TOML) and trial-count CSVs.
//!
//! A cyclic spec lists, per context `i`, `[Pr[R_i^i = 1], Pr[R_{i+1}^i = 1]]`
//! and `Pr[R_i^i = R_{i+1}^i = 1]`:
//!
//! ```toml
//! kind = "cyclic"
//! label = "PR box"
//! marginals = [[0.5, 0.5], [0.5, 0.5], [0.5, 0.5], [0.5, 0.5]]
//! bunch_products = [0.5, 0.5, 0.5, 0.0]
//! ```
//!
//! A general spec names its contents and gives each context a full pmf over
//! `{0,1}^k`, where bit `j` of the pmf index is the value of the context's
//! `j`-th listed content:
//!
//! ```toml
//! kind = "general"
//! contents = ["a", "b"]
//!
//! [[contexts]]
//! contents = ["a", "b"]
//! pmf = [0.25, 0.25, 0.25, 0.25]
//! ```

use serde::Deserialize;

use contextuality::general::{Context, GeneralSystem};
use contextuality::{CyclicSystem, TrialCounts};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Cyclic,
    General,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    kind: Kind,
    label: Option<String>,
    rank: Option<usize>,
    marginals: Option<Vec<[f64; 2]>>,
    bunch_products: Option<Vec<f64>>,
    contents: Option<Vec<String>>,
    contexts: Option<Vec<ContextSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextSpec {
    contents: Vec<String>,
    pmf: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum SystemSpec {
    Cyclic(CyclicSystem),
    General(GeneralSystem),
}

#[derive(Debug, Clone)]
pub struct ParsedSpec {
    pub label: Option<String>,
    pub system: SystemSpec,
}

fn missing(kind: &str, field: &str) -> CliError {
    CliError::Parse(format!("{kind} spec needs `{field}`"))
}

fn stray(kind: &str, field: &str) -> CliError {
    CliError::Parse(format!("`{field}` does not apply to {kind} specs"))
}

pub fn parse_spec(text: &str) -> CliResult<ParsedSpec> {
    let spec: SpecFile = toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))?;
    let system = match spec.kind {
        Kind::Cyclic => {
            if spec.contents.is_some() {
                return Err(stray("cyclic", "contents"));
            }
            if spec.contexts.is_some() {
                return Err(stray("cyclic", "contexts"));
            }
            let marginals = spec.marginals.ok_or_else(|| missing("cyclic", "marginals"))?;
            let products = spec.bunch_products.ok_or_else(|| missing("cyclic", "bunch_products"))?;
            if let Some(rank) = spec.rank {
                if rank != marginals.len() || rank != products.len() {
                    return Err(CliError::Validation(format!(
                        "rank {rank} disagrees with {} marginal pairs and {} bunch products",
                        marginals.len(),
                        products.len()
                    )));
                }
            }
            SystemSpec::Cyclic(CyclicSystem::new(marginals, products))
        }
        Kind::General => {
            for (field, present) in [
                ("rank", spec.rank.is_some()),
                ("marginals", spec.marginals.is_some()),
                ("bunch_products", spec.bunch_products.is_some()),
            ] {
                if present {
                    return Err(stray("general", field));
                }
            }
            let contents = spec.contents.ok_or_else(|| missing("general", "contents"))?;
            let contexts = spec
                .contexts
                .ok_or_else(|| missing("general", "contexts"))?
                .into_iter()
                .enumerate()
                .map(|(c, ctx)| {
                    let indices = ctx
                        .contents
                        .iter()
                        .map(|name| {
                            contents.iter().position(|q| q == name).ok_or_else(|| {
                                CliError::Validation(format!("context {c} names unknown content `{name}`"))
                            })
                        })
                        .collect::<CliResult<_>>()?;
                    Ok(Context {
                        contents: indices,
                        pmf: ctx.pmf,
                    })
                })
                .collect::<CliResult<_>>()?;
            SystemSpec::General(GeneralSystem::new(contents, contexts)?)
        }
    };
    Ok(ParsedSpec {
        label: spec.label,
        system,
    })
}

#[derive(Debug, Deserialize)]
struct CountRow {
    context_id: u64,
    c00: u64,
    c01: u64,
    c10: u64,
    c11: u64,
}

/// Trial counts from a CSV with header `context_id,c00,c01,c10,c11`.
/// Contexts are ordered by id, which must be distinct.
pub fn parse_counts(text: &str) -> CliResult<TrialCounts> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Parse(e.to_string()))?.clone();
    let expected = ["context_id", "c00", "c01", "c10", "c11"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CliError::Parse(format!("expected header {}", expected.join(","))));
    }
    let mut rows: Vec<CountRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Parse(e.to_string()))?;
    rows.sort_by_key(|r| r.context_id);
    if let Some(w) = rows.windows(2).find(|w| w[0].context_id == w[1].context_id) {
        return Err(CliError::Validation(format!("context_id {} appears twice", w[0].context_id)));
    }
    Ok(TrialCounts {
        contexts: rows.iter().map(|r| [r.c00, r.c01, r.c10, r.c11]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_spec() {
        let s = parse_spec("kind = \"cyclic\"\nmarginals = [[0.5, 0.5], [0.5, 0.5]]\nbunch_products = [0.25, 0.25]\n")
            .unwrap();
        assert!(matches!(s.system, SystemSpec::Cyclic(ref c) if c.rank() == 2));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = parse_spec("kind = \"cyclic\"\nmarginals = []\nbunch_products = []\ncolour = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse(_)));
    }

    #[test]
    fn rank_mismatch() {
        let err = parse_spec("kind = \"cyclic\"\nrank = 3\nmarginals = [[0.5, 0.5]]\nbunch_products = [0.25]\n")
            .unwrap_err();
        assert!(matches!(err, CliError::Validation(_)));
    }

    #[test]
    fn general_spec_resolves_names() {
        let text = r#"
kind = "general"
contents = ["a", "b"]
[[contexts]]
contents = ["b", "a"]
pmf = [0.25, 0.25, 0.25, 0.25]
"#;
        let SystemSpec::General(g) = parse_spec(text).unwrap().system else {
            panic!("general expected");
        };
        assert_eq!(g.contexts[0].contents, vec![1, 0]);
    }

    #[test]
    fn counts_sorted_by_id() {
        let t = parse_counts("context_id,c00,c01,c10,c11\n2,1,0,0,1\n1,0,1,1,0\n").unwrap();
        assert_eq!(t.contexts, vec![[0, 1, 1, 0], [1, 0, 0, 1]]);
        assert!(matches!(
            parse_counts("context_id,c00,c01,c10,c11\n1,1,0,0,1\n1,0,1,1,0\n"),
            Err(CliError::Validation(_))
        ));
        assert!(matches!(parse_counts("id,a\n1,2\n"), Err(CliError::Parse(_))));
    }
}
