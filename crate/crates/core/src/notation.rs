//! Text notation for marked groups.
//!
//! ```text
//! free:2                 free group of rank 2
//! cyclic:12              Z/12 (cyclic:0 is Z)
//! abelian:[0,0,3]        Z x Z x Z/3
//! finite:<table-file>    multiplication table, see `finite`
//! product(G,H,...)       direct product
//! freeprod(G,H,...)      free product
//! onerel:free:4:abABcdCD one-relator quotient solved by Dehn's algorithm
//! ```

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::finite::FiniteTable;
use crate::group::Group;
use crate::word::Word;

/// Parses group notation, resolving `finite:` paths against the working directory.
pub fn parse_group(text: &str) -> Result<Group> {
    parse_group_in(text, Path::new("."))
}

/// Parses group notation, resolving relative `finite:` paths against `base`.
pub fn parse_group_in(text: &str, base: &Path) -> Result<Group> {
    let mut parser = Parser {
        src: text.trim(),
        pos: 0,
        base: base.to_path_buf(),
    };
    let g = parser.group()?;
    if parser.pos != parser.src.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(g)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    base: PathBuf,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse(1, self.pos + 1, message)
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected {token:?}")))
        }
    }

    fn number(&mut self) -> Result<u64> {
        let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
        if digits.is_empty() {
            return Err(self.error("expected a number"));
        }
        let value = digits.parse().map_err(|_| self.error("number out of range"))?;
        self.pos += digits.len();
        Ok(value)
    }

    /// Reads up to the next `,` or `)` (or end of input).
    fn token(&mut self) -> &str {
        let start = self.pos;
        let len = self.rest().find([',', ')']).unwrap_or(self.rest().len());
        self.pos += len;
        self.src[start..self.pos].trim()
    }

    fn list(&mut self) -> Result<Vec<Group>> {
        let mut parts = vec![self.group()?];
        while self.eat(",") {
            self.skip_ws();
            parts.push(self.group()?);
        }
        self.skip_ws();
        self.expect(")")?;
        Ok(parts)
    }

    fn skip_ws(&mut self) {
        let n = self.rest().len() - self.rest().trim_start().len();
        self.pos += n;
    }

    fn positive(&mut self, what: &str) -> Result<usize> {
        let at = self.pos;
        let n = self.number()?;
        if n == 0 {
            self.pos = at;
            return Err(self.error(format!("{what} must be at least 1")));
        }
        Ok(n as usize)
    }

    fn group(&mut self) -> Result<Group> {
        self.skip_ws();
        if self.eat("free:") {
            return Ok(Group::free(self.positive("rank")?));
        }
        if self.eat("cyclic:") {
            return Ok(Group::cyclic(self.number()?));
        }
        if self.eat("abelian:") {
            self.expect("[")?;
            let mut torsion = vec![self.number()?];
            while self.eat(",") {
                self.skip_ws();
                torsion.push(self.number()?);
            }
            self.expect("]")?;
            return Ok(Group::abelian(torsion));
        }
        if self.eat("finite:") {
            let at = self.pos;
            let path = self.token().to_string();
            if path.is_empty() {
                self.pos = at;
                return Err(self.error("expected a table file"));
            }
            let full = self.base.join(&path);
            let text = std::fs::read_to_string(&full).map_err(|e| {
                Error::parse(1, at + 1, format!("cannot read table {}: {e}", full.display()))
            })?;
            return Ok(Group::finite(FiniteTable::parse(&text)?));
        }
        if self.eat("product(") {
            return Ok(Group::Product(self.list()?));
        }
        if self.eat("freeprod(") {
            return Ok(Group::FreeProduct(self.list()?));
        }
        if self.eat("onerel:free:") {
            let rank = self.positive("rank")?;
            self.expect(":")?;
            let at = self.pos;
            let text = self.token().to_string();
            let relator = Word::parse(&text).map_err(|e| match e {
                Error::Parse { column, message, .. } => Error::parse(1, at + column, message),
                other => other,
            })?;
            return Group::one_relator(rank, &relator);
        }
        Err(self.error("expected one of free:, cyclic:, abelian:, finite:, product(, freeprod(, onerel:"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    #[test]
    fn parses_every_form() {
        assert_eq!(parse_group("free:2").unwrap(), Group::free(2));
        assert_eq!(parse_group("cyclic:12").unwrap(), Group::cyclic(12));
        assert_eq!(parse_group("abelian:[0,0]").unwrap(), Group::abelian(vec![0, 0]));
        assert_eq!(
            parse_group("product(free:2, cyclic:0)").unwrap(),
            Group::Product(vec![Group::free(2), Group::integers()])
        );
        assert_eq!(
            parse_group("freeprod(cyclic:2,cyclic:3)").unwrap(),
            Group::FreeProduct(vec![Group::cyclic(2), Group::cyclic(3)])
        );
        let g = parse_group("onerel:free:4:abABcdCD").unwrap();
        assert_eq!(g, Group::one_relator(4, &w("abABcdCD")).unwrap());
    }

    #[test]
    fn finite_table_from_file() {
        let dir = std::env::temp_dir().join(format!("redgrp-notation-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let table = FiniteTable::symmetric(3).unwrap();
        std::fs::write(dir.join("s3.txt"), table.to_text()).unwrap();
        let g = parse_group_in("product(finite:s3.txt,cyclic:2)", &dir).unwrap();
        assert_eq!(g.finite_order(), Some(12));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn errors_carry_columns() {
        let err = parse_group("product(free:2,bogus:3)").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 16, .. }), "{err}");
        let err = parse_group("free:0").unwrap_err();
        assert!(matches!(err, Error::Parse { column: 6, .. }), "{err}");
        let err = parse_group("onerel:free:2:ab?").unwrap_err();
        assert!(matches!(err, Error::Parse { column: 17, .. }), "{err}");
        assert!(parse_group("free:2 x").is_err());
    }
}
