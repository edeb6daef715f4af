//! TSV element input: `key<TAB>value` per line, value optional.

use std::io::BufRead;

use capsketch::Element;

use crate::error::{CliError, CliResult};

/// Parses one line. Blank lines yield `None`.
pub fn parse_line(line: &[u8], number: u64) -> CliResult<Option<Element>> {
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    if line.is_empty() {
        return Ok(None);
    }
    let err = |msg: String| CliError::Parse { line: number, msg };
    let (key, value) = match line.iter().position(|&b| b == b'\t') {
        None => (line, 1.0),
        Some(tab) => {
            let text = std::str::from_utf8(&line[tab + 1..]).map_err(|_| err("value is not UTF-8".into()))?;
            let text = text.trim();
            let value: f64 = text.parse().map_err(|_| err(format!("cannot parse value {text:?}")))?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(err(format!("value must be positive and finite, got {text}")));
            }
            (&line[..tab], value)
        }
    };
    if key.is_empty() {
        return Err(err("empty key".into()));
    }
    Element::new(key.to_vec(), value).map(Some).map_err(|e| err(e.to_string()))
}

/// Calls `f` with every element of `input` and its 0-based position among
/// the elements.
pub fn for_each_element<R, F>(input: R, mut f: F) -> CliResult<u64>
where
    R: BufRead,
    F: FnMut(&Element, u64) -> CliResult<()>,
{
    let mut count = 0;
    for (i, line) in input.split(b'\n').enumerate() {
        let line = line.map_err(|e| CliError::io("input", e))?;
        if let Some(e) = parse_line(&line, i as u64 + 1)? {
            f(&e, count)?;
            count += 1;
        }
    }
    Ok(count)
}
