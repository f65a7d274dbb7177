//! Small value grammars shared by several commands.

use crate::error::{CliError, CliResult};

/// `5`, `5,7,9` or the inclusive range `5..10`.
pub fn lengths(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Validation(format!("bad tuple lengths '{text}' (expected e.g. 5, 5,7 or 5..10)"));
    let out: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if out.iter().any(|&k| k == 0 || k > algoprob::dist::MAX_TUPLE_LEN) {
        return Err(CliError::Validation(format!(
            "tuple lengths must lie in 1..={}, got '{text}'",
            algoprob::dist::MAX_TUPLE_LEN
        )));
    }
    Ok(out)
}

/// `all`, `30,110` or `0..255`.
pub fn rules(text: &str) -> CliResult<Vec<u8>> {
    let bad = || CliError::Validation(format!("bad rule set '{text}' (expected all, 30,110 or 0..255)"));
    if text == "all" {
        return Ok(algoprob::eca::all_rules());
    }
    if let Some((a, b)) = text.split_once("..") {
        let a: u8 = a.trim().parse().map_err(|_| bad())?;
        let b: u8 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let mut out: Vec<u8> = text.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Reference for `market compare`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reference {
    Eca,
    Machines(u32),
    File(std::path::PathBuf),
}

pub fn reference(text: &str) -> CliResult<Reference> {
    if text == "eca" {
        return Ok(Reference::Eca);
    }
    if let Some(n) = text.strip_prefix("d:") {
        return n
            .parse()
            .map(Reference::Machines)
            .map_err(|_| CliError::Validation(format!("bad reference '{text}' (expected d:N)")));
    }
    Ok(Reference::File(text.into()))
}
