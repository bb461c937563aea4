//! Text syntax for weight sets, sequences and modulus ranges.

use std::fmt;

use wzs_core::{ModuleSpec, Sequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based character position in the input.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at position {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

fn fail<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position: position + 1,
        message: message.into(),
    })
}

/// Comma-separated pieces with their 0-based start offsets.
fn pieces(input: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in input.char_indices() {
        if c == ',' {
            out.push((start, &input[start..i]));
            start = i + 1;
        }
    }
    out.push((start, &input[start..]));
    out
}

fn int_at(text: &str, offset: usize) -> Result<i64, ParseError> {
    let trimmed = text.trim();
    let lead = text.len() - text.trim_start().len();
    if trimmed.is_empty() {
        return fail(offset + lead, "expected an integer");
    }
    trimmed
        .parse::<i64>()
        .or_else(|_| fail(offset + lead, format!("'{trimmed}' is not an integer")))
}

/// Signed residues separated by commas; `+-k` stands for `k` and `-k`.
/// Returns the raw integers; reduction happens in the weight config.
pub fn weight_set(input: &str) -> Result<Vec<i64>, ParseError> {
    let mut out = Vec::new();
    for (offset, piece) in pieces(input) {
        let lead = piece.len() - piece.trim_start().len();
        let t = piece.trim();
        if let Some(rest) = t.strip_prefix("+-").or_else(|| t.strip_prefix("±")) {
            let skip = t.len() - rest.len();
            let k = int_at(rest, offset + lead + skip)?;
            out.push(k);
            out.push(-k);
        } else {
            out.push(int_at(piece, offset)?);
        }
    }
    Ok(out)
}

/// Comma-separated terms. Rank-one terms are integers; higher-rank terms
/// are `(a,b,...)` or `a:b:...`. Values are reduced mod `m`.
pub fn sequence(input: &str, module: &ModuleSpec) -> Result<Sequence, ParseError> {
    let rank = module.rank() as usize;
    let chars: Vec<(usize, char)> = input.char_indices().collect();
    let mut terms = Vec::new();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].1.is_whitespace() {
            *i += 1;
        }
    };
    let pos = |i: usize| chars.get(i).map_or(input.len(), |c| c.0);
    skip_ws(&mut i);
    if i == chars.len() {
        return fail(0, "empty sequence");
    }
    loop {
        skip_ws(&mut i);
        let start = pos(i);
        let coords: Vec<i64> = if chars.get(i).map(|c| c.1) == Some('(') {
            let close = match chars[i..].iter().position(|c| c.1 == ')') {
                Some(p) => i + p,
                None => return fail(start, "unclosed '('"),
            };
            let inner_start = pos(i + 1);
            let inner = &input[inner_start..pos(close)];
            i = close + 1;
            pieces(inner)
                .into_iter()
                .map(|(o, p)| int_at(p, inner_start + o))
                .collect::<Result<_, _>>()?
        } else {
            let end = chars[i..]
                .iter()
                .position(|c| c.1 == ',' || c.1.is_whitespace())
                .map_or(chars.len(), |p| i + p);
            let text = &input[start..pos(end)];
            i = end;
            let mut out = Vec::new();
            let mut o = 0;
            for part in text.split(':') {
                out.push(int_at(part, start + o)?);
                o += part.len() + 1;
            }
            out
        };
        if coords.len() != rank {
            return fail(
                start,
                format!("term has {} coordinates, expected {rank}", coords.len()),
            );
        }
        terms.push(module.element(&coords).expect("rank checked"));
        skip_ws(&mut i);
        match chars.get(i) {
            None => break,
            Some((_, ',')) => i += 1,
            Some((p, c)) => return fail(*p, format!("unexpected '{c}'")),
        }
    }
    Ok(Sequence::new(terms))
}

/// `3..8` (inclusive), `3..=8`, `3,5,7`, or empty.
pub fn modulus_list(input: &str) -> Result<Vec<u32>, ParseError> {
    let t = input.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let lead = input.len() - input.trim_start().len();
    if let Some((lo, hi)) = t.split_once("..") {
        let hi_offset = lead + lo.len() + 2;
        let (hi, hi_offset) = match hi.strip_prefix('=') {
            Some(h) => (h, hi_offset + 1),
            None => (hi, hi_offset),
        };
        let lo = int_at(lo, lead)?;
        let hi = int_at(hi, hi_offset)?;
        let lo = u32::try_from(lo).or_else(|_| fail(lead, "modulus out of range"))?;
        let hi = u32::try_from(hi).or_else(|_| fail(hi_offset, "modulus out of range"))?;
        return Ok((lo..=hi).collect());
    }
    pieces(input)
        .into_iter()
        .map(|(o, p)| {
            let v = int_at(p, o)?;
            u32::try_from(v).or_else(|_| fail(o, "modulus out of range"))
        })
        .collect()
}
