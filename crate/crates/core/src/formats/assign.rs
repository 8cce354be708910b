//! `.sasg` files: named parameter assignments.
//!
//! ```text
//! assignment UserInternal {
//!     s = {1, 6, 7};
//!     pb = {0.7, 0.2, 0.1};
//! }
//! ```
//!
//! Values are ground terms, evaluated when the file is read.

use std::fmt;

use crate::lex::{Cursor, ParseError, Tok};
use crate::terms::{eval, Assignment, EvalContext, EvalError, TermParser};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssignmentError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("assignment `{assignment}`, parameter `{param}`: {source}")]
    Eval { assignment: String, param: String, source: EvalError },
    #[error("no assignment named `{name}` (available: {})", .available.join(", "))]
    Unknown { name: String, available: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssignmentDocument {
    pub assignments: Vec<(String, Assignment)>,
}

impl AssignmentDocument {
    pub fn parse(src: &str) -> Result<Self, AssignmentError> {
        let mut cur = Cursor::new(src)?;
        let mut doc = AssignmentDocument::default();
        while !cur.at_eof() {
            cur.expect_ident_word("assignment")?;
            let (name, pos) = cur.expect_name()?;
            if doc.get(&name).is_some() {
                return Err(ParseError::new(pos, format!("assignment `{name}` is defined twice")).into());
            }
            cur.expect(&Tok::LBrace)?;
            let mut xi = Assignment::new();
            while !cur.eat(&Tok::RBrace) {
                let (param, pos) = cur.expect_name()?;
                if xi.get(&param).is_some() {
                    return Err(ParseError::new(pos, format!("parameter `{param}` is bound twice")).into());
                }
                cur.expect(&Tok::Eq)?;
                let term = TermParser::new(&mut cur).expr()?;
                cur.expect(&Tok::Semi)?;
                let value = eval(&term, &Assignment::new(), EvalContext::NONE).map_err(|source| {
                    AssignmentError::Eval { assignment: name.clone(), param: param.clone(), source }
                })?;
                xi.bind(param, value);
            }
            doc.assignments.push((name, xi));
        }
        Ok(doc)
    }

    pub fn get(&self, name: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    /// The named assignment, or the only one when `name` is `None`.
    pub fn select(&self, name: Option<&str>) -> Result<&Assignment, AssignmentError> {
        let found = match name {
            Some(n) => self.get(n),
            None if self.assignments.len() == 1 => Some(&self.assignments[0].1),
            None => None,
        };
        found.ok_or_else(|| AssignmentError::Unknown {
            name: name.unwrap_or("<unnamed>").to_string(),
            available: self.names().map(String::from).collect(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.assignments.iter().map(|(n, _)| n.as_str())
    }
}

impl fmt::Display for AssignmentDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, xi)) in self.assignments.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "assignment {name} {{")?;
            for (param, v) in xi.iter() {
                writeln!(f, "    {param} = {};", v.to_term())?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::Value;

    const USERS: &str = "
assignment UserInternal { s = {1, 6, 7}; pb = {0.7, 0.2, 0.1}; }
assignment UserPress { s = {3, 7}; pb = {0.6, 0.4}; }
";

    #[test]
    fn parses_named_assignments() {
        let doc = AssignmentDocument::parse(USERS).unwrap();
        assert_eq!(doc.names().collect::<Vec<_>>(), ["UserInternal", "UserPress"]);
        let press = doc.get("UserPress").unwrap();
        assert_eq!(press.get("s"), Some(&Value::IntSeq(vec![3, 7])));
        assert_eq!(press.get("pb"), Some(&Value::RealSeq(vec![0.6, 0.4])));
        assert!(matches!(doc.select(None), Err(AssignmentError::Unknown { .. })));
        assert_eq!(AssignmentDocument::parse(&doc.to_string()).unwrap(), doc);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(AssignmentDocument::parse("assignment A { x = 1; x = 2; }").is_err());
        assert!(AssignmentDocument::parse("assignment A { x = y; }").is_err());
        assert!(AssignmentDocument::parse("assignment A { x = 1 }").is_err());
        assert!(AssignmentDocument::parse("assignment A {}\nassignment A {}").is_err());
    }
}
