//! Canonical infix rendering of terms. `parse_term(&t.to_string()) == t`.

use std::fmt;

use super::parse::is_syntactic_bool;
use super::{BinaryOp, Term, UnaryOp};

const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const UNION: u8 = 5;
const ADD: u8 = 6;
const MUL: u8 = 7;
const NEG: u8 = 8;
const POSTFIX: u8 = 9;
const ATOM: u8 = 10;

fn level(t: &Term) -> u8 {
    use BinaryOp as B;
    match t {
        Term::Unary(UnaryOp::Not, _) => NOT,
        Term::Unary(UnaryOp::Neg, _) => NEG,
        Term::Binary(op, _, _) => match op {
            B::Or => OR,
            B::And => AND,
            B::Eq | B::Ne | B::Lt | B::Le | B::Gt | B::Ge | B::Member => CMP,
            B::Union => UNION,
            B::Add | B::Sub => ADD,
            B::Mul | B::Div | B::IntDiv | B::Mod => MUL,
            B::Index => POSTFIX,
        },
        _ => ATOM,
    }
}

/// Where a subterm is printed; decides whether `int(c)` may be written `(c)`.
#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Arith,
    Other,
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, min: u8, slot: Slot) -> fmt::Result {
    if let Term::Unary(UnaryOp::BoolToInt, inner) = t {
        if slot == Slot::Arith && is_syntactic_bool(inner) {
            f.write_str("(")?;
            write_term(f, inner, 0, Slot::Other)?;
            return f.write_str(")");
        }
    }
    if level(t) < min {
        f.write_str("(")?;
        write_bare(f, t)?;
        return f.write_str(")");
    }
    write_bare(f, t)
}

fn write_bare(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    use BinaryOp as B;
    match t {
        Term::Int(v) => write!(f, "{v}"),
        Term::Real(v) => write!(f, "{v:?}"),
        Term::Bool(v) => write!(f, "{v}"),
        Term::Param(p) => f.write_str(p),
        Term::Placeholder(p) => write!(f, "{p}"),
        Term::SetLiteral(items) => {
            f.write_str("{")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_term(f, item, 0, Slot::Other)?;
            }
            f.write_str("}")
        }
        Term::Unary(op, inner) => match op {
            UnaryOp::Neg => {
                f.write_str("-")?;
                // `-3` would read back as a literal
                if matches!(**inner, Term::Int(_) | Term::Real(_)) || level(inner) < POSTFIX {
                    f.write_str("(")?;
                    write_term(f, inner, 0, Slot::Arith)?;
                    f.write_str(")")
                } else {
                    write_term(f, inner, POSTFIX, Slot::Arith)
                }
            }
            UnaryOp::Not => {
                f.write_str("not ")?;
                write_term(f, inner, NOT, Slot::Other)
            }
            UnaryOp::Size => {
                f.write_str("|")?;
                write_term(f, inner, 0, Slot::Other)?;
                f.write_str("|")
            }
            UnaryOp::ToReal => {
                f.write_str("to_real(")?;
                write_term(f, inner, 0, Slot::Other)?;
                f.write_str(")")
            }
            UnaryOp::BoolToInt => {
                f.write_str("int(")?;
                write_term(f, inner, 0, Slot::Other)?;
                f.write_str(")")
            }
        },
        Term::Binary(B::Index, seq, idx) => {
            write_term(f, seq, POSTFIX, Slot::Other)?;
            f.write_str("[")?;
            write_term(f, idx, 0, Slot::Other)?;
            f.write_str("]")
        }
        Term::Binary(op, l, r) => {
            let lv = level(t);
            let (lmin, rmin, slot) = match lv {
                CMP => (UNION, UNION, Slot::Other),
                ADD | MUL => (lv, lv + 1, Slot::Arith),
                _ => (lv, lv + 1, Slot::Other),
            };
            write_term(f, l, lmin, slot)?;
            write!(f, " {} ", op.symbol())?;
            write_term(f, r, rmin, slot)
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0, Slot::Other)
    }
}
