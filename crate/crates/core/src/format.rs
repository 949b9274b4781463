//! Family text format.
//!
//! One family per line, members separated by single spaces, each member a
//! comma-separated ascending element list with `0` for the empty set. Lines
//! starting with `#` are comments, except `#universe n` which fixes the
//! universe to `[n]` for the lines that follow. Without a header the
//! universe of a line is `[max element]`.
//!
//! ```text
//! #universe 3
//! 0 1 2 1,2
//! ```

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::family::{MultiFamily, SetFamily, SetMask};

/// A family together with the 1-based line it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located<T> {
    pub line: usize,
    pub value: T,
}

fn parse_header(rest: &str, line: usize) -> Result<Option<u32>> {
    let Some(arg) = rest.strip_prefix("universe") else {
        return Ok(None);
    };
    let arg = arg.trim();
    let n: u32 = arg.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad universe header `#universe {arg}`"),
    })?;
    if n > 64 {
        return Err(Error::Parse { line, message: format!("universe {n} exceeds 64 elements") });
    }
    Ok(Some(n))
}

/// Parses every family line, keeping repeated members.
fn parse_lines(text: &str) -> Result<Vec<Located<(Vec<SetMask>, SetMask)>>> {
    let mut header: Option<u32> = None;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches(['\r', '\n']).trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(n) = parse_header(rest, line)? {
                header = Some(n);
            }
            continue;
        }
        let mut members = Vec::new();
        for tok in trimmed.split(' ') {
            if tok.is_empty() {
                return Err(Error::Parse { line, message: "members must be separated by single spaces".into() });
            }
            let m: SetMask = tok.parse().map_err(|message| Error::Parse { line, message })?;
            members.push(m);
        }
        let spanned = members.iter().fold(SetMask::EMPTY, |acc, &m| acc | m);
        let universe = match header {
            Some(n) => {
                let u = SetMask::full(n);
                if !spanned.is_subset_of(u) {
                    return Err(Error::Parse {
                        line,
                        message: format!("member outside declared universe 1..{n}"),
                    });
                }
                u
            }
            None => SetMask::full(spanned.max_element().map_or(0, |k| k.get() as u32)),
        };
        out.push(Located { line, value: (members, universe) });
    }
    Ok(out)
}

/// Parses families; duplicate members on a line are merged.
pub fn parse_families(text: &str) -> Result<Vec<Located<SetFamily>>> {
    parse_lines(text)?
        .into_iter()
        .map(|Located { line, value: (members, universe) }| {
            SetFamily::new(members, universe).map(|value| Located { line, value })
        })
        .collect()
}

/// Parses multisets of sets; repeated members are kept in line order.
pub fn parse_multi_families(text: &str) -> Result<Vec<Located<MultiFamily>>> {
    parse_lines(text)?
        .into_iter()
        .map(|Located { line, value: (members, universe) }| {
            MultiFamily::new(members, universe).map(|value| Located { line, value })
        })
        .collect()
}

pub fn render_members(members: &[SetMask]) -> String {
    let mut s = String::new();
    for (i, m) in members.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&m.to_string());
    }
    s
}

pub fn render_family(family: &SetFamily) -> String {
    render_members(family.members())
}

/// Writes a `#universe n` header followed by one line per family.
pub fn write_families<'a, W, I>(out: &mut W, universe_size: Option<u32>, families: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SetFamily>,
{
    if let Some(n) = universe_size {
        writeln!(out, "#universe {n}")?;
    }
    for f in families {
        writeln!(out, "{}", render_family(f))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{fam, set};

    #[test]
    fn parses_example_line() {
        let fams = parse_families("# comment\n0 1 2 1,2\n").unwrap();
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].line, 2);
        assert_eq!(fams[0].value, SetFamily::power_set(2));
    }

    #[test]
    fn header_overrides_universe() {
        let fams = parse_families("#universe 4\n1 1,2\n\n2\n").unwrap();
        assert_eq!(fams[0].value.universe(), SetMask::full(4));
        assert_eq!(fams[1].value.universe(), SetMask::full(4));
        assert_eq!(fams[1].line, 4);
        let err = parse_families("#universe 2\n1,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let err = parse_families("1\n1,,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_families("1  2").is_err());
        assert!(parse_families("2,1").is_err());
        assert!(parse_families("x").is_err());
    }

    #[test]
    fn multi_families_keep_repeats() {
        let m = parse_multi_families("1 1 2 0").unwrap();
        assert_eq!(m[0].value.members(), &[set(&[1]), set(&[1]), set(&[2]), SetMask::EMPTY]);
    }

    #[test]
    fn render_then_parse() {
        let f = fam(&[&[], &[1, 3], &[2]]);
        let line = render_family(&f);
        assert_eq!(line, "0 2 1,3");
        assert_eq!(parse_families(&line).unwrap()[0].value, f);
    }
}
