use serde::{Deserialize, Serialize};

pub const SYSTEM_TEMPLATE: &str = include_str!("../../templates/system.txt");
pub const USER_TEMPLATE: &str = include_str!("../../templates/user.txt");
pub const REPAIR_TEMPLATE: &str = include_str!("../../templates/repair.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("{0} is empty")]
    EmptyInput(&'static str),
}

/// Replace each placeholder in one left-to-right pass over `template`.
/// Substituted values are never rescanned.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = template;
    loop {
        let next = values
            .iter()
            .filter_map(|(key, value)| rest.find(key).map(|at| (at, *key, *value)))
            .min_by_key(|(at, key, _)| (*at, std::cmp::Reverse(key.len())));
        match next {
            Some((at, key, value)) => {
                out.push_str(&rest[..at]);
                out.push_str(value);
                rest = &rest[at + key.len()..];
            }
            None => {
                out.push_str(rest);
                return out;
            }
        }
    }
}

fn require(value: &str, what: &'static str) -> Result<(), PromptError> {
    if value.trim().is_empty() {
        Err(PromptError::EmptyInput(what))
    } else {
        Ok(())
    }
}

pub fn build_prompts(ddl: &str, question: &str) -> Result<PromptBundle, PromptError> {
    require(ddl, "DDL")?;
    require(question, "question")?;
    Ok(PromptBundle {
        system: fill(SYSTEM_TEMPLATE, &[("{{ DDL_statements }}", ddl)]),
        user: fill(USER_TEMPLATE, &[("{{ question }}", question)]),
    })
}

pub fn build_repair_prompt(sql: &str, error_message: &str) -> Result<String, PromptError> {
    require(sql, "SQL")?;
    require(error_message, "error message")?;
    Ok(fill(REPAIR_TEMPLATE, &[("{{ sql }}", sql), ("{{ error_message }}", error_message)]))
}
