//! Nested coefficient lists such as `[[1,0],[3,4]]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Nested {
    Int(i64),
    List(Vec<Nested>),
}

pub fn parse_nested(s: &str) -> Result<Nested> {
    let b = s.as_bytes();
    let mut pos = 0;
    let v = parse_at(b, &mut pos)?;
    skip_ws(b, &mut pos);
    if pos != b.len() {
        return Err(Error::Parse { pos, msg: "trailing characters".into() });
    }
    Ok(v)
}

fn skip_ws(b: &[u8], pos: &mut usize) {
    while *pos < b.len() && b[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn parse_at(b: &[u8], pos: &mut usize) -> Result<Nested> {
    skip_ws(b, pos);
    if *pos < b.len() && b[*pos] == b'[' {
        *pos += 1;
        let mut items = Vec::new();
        skip_ws(b, pos);
        if *pos < b.len() && b[*pos] == b']' {
            *pos += 1;
            return Ok(Nested::List(items));
        }
        loop {
            items.push(parse_at(b, pos)?);
            skip_ws(b, pos);
            match b.get(*pos) {
                Some(b',') => *pos += 1,
                Some(b']') => {
                    *pos += 1;
                    return Ok(Nested::List(items));
                }
                _ => return Err(Error::Parse { pos: *pos, msg: "expected ',' or ']'".into() }),
            }
        }
    }
    let start = *pos;
    if *pos < b.len() && (b[*pos] == b'-' || b[*pos] == b'+') {
        *pos += 1;
    }
    while *pos < b.len() && b[*pos].is_ascii_digit() {
        *pos += 1;
    }
    let tok = std::str::from_utf8(&b[start..*pos]).unwrap();
    tok.parse::<i64>()
        .map(Nested::Int)
        .map_err(|_| Error::Parse { pos: start, msg: format!("expected integer or list near '{tok}'") })
}
