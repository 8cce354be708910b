//! Parser for the `.sant` template language.
//!
//! ```text
//! template User;
//!
//! param s : OrderedSet<Int>;
//! place Req [s];
//! activity Request timed {
//!     cases |s|;
//!     time uniform(1.0, 2.0);
//!     prob 1 <= <CASE> and <CASE> <= |s| : pb[<CASE>];
//! }
//! input IGRequest -> Request { places Idle; enable forall Idle >= 1; Idle -= 1; }
//! output OGRequest -> Request { places Req; Req[s[<CASE>]] := 1; }
//! arc Fail -> Idle "" as ArcOutFail;
//! init Req = 0;
//! ```
//!
//! Declarations may appear in any order. Gates and arcs keep their relative
//! order, which is the order they run in when an activity fires.

use crate::arclabel::{arc_gate_name, desugar_input_arc, desugar_output_arc, parse_input_label, parse_output_label};
use crate::diag::Diagnostic;
use crate::lex::{Cursor, ParseError, Pos, Tok};
use crate::template::{
    Action, ActivityKind, ActivityTemplate, CaseDistribution, CaseProbability, Comparison, DistributionSpec,
    GateFunction, GateOrigin, GatePredicate, InputGateTemplate, MarkingTemplateFn, OutputGateTemplate,
    PlaceTemplate, Quantifier, ReactivationSpec, SanTemplate, Selector, UpdateRule,
};
use crate::terms::{Sort, Term, TermParser};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Template,
    Parameter,
    Place,
    Activity,
    InputGate,
    OutputGate,
    Marking,
}

/// Where a named element was declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub kind: ElementKind,
    pub name: String,
    pub pos: Pos,
}

/// A parsed template together with the source position of every named element.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub template: SanTemplate,
    pub spans: Vec<Span>,
}

impl ModelDocument {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut p = ModelParser { cur: Cursor::new(src)?, tpl: SanTemplate::new(""), spans: Vec::new(), gates: Vec::new() };
        p.document()?;
        Ok(ModelDocument { template: p.tpl, spans: p.spans })
    }

    /// Position of the first declaration named `name`.
    pub fn span(&self, name: &str) -> Option<Pos> {
        self.spans.iter().find(|s| s.name == name).map(|s| s.pos)
    }

    pub fn locate(&self, d: &Diagnostic) -> Option<Pos> {
        self.span(&d.element)
    }
}

pub fn parse_model(src: &str) -> Result<SanTemplate, ParseError> {
    ModelDocument::parse(src).map(|d| d.template)
}

enum PendingGate {
    Input(InputGateTemplate),
    Output(OutputGateTemplate),
    Arc { src: String, dst: String, label: String, label_pos: Pos, name: Option<String>, pos: Pos },
}

struct ModelParser {
    cur: Cursor,
    tpl: SanTemplate,
    spans: Vec<Span>,
    gates: Vec<PendingGate>,
}

impl ModelParser {
    fn span(&mut self, kind: ElementKind, name: &str, pos: Pos) {
        self.spans.push(Span { kind, name: name.to_string(), pos });
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        TermParser::new(&mut self.cur).expr()
    }

    /// A term that stops at comparison operators.
    fn operand(&mut self) -> Result<Term, ParseError> {
        TermParser::label(&mut self.cur).expr()
    }

    fn semi(&mut self) -> Result<(), ParseError> {
        self.cur.expect(&Tok::Semi).map(|_| ())
    }

    fn document(&mut self) -> Result<(), ParseError> {
        self.cur.expect_ident_word("template")?;
        let (name, pos) = self.cur.expect_name()?;
        self.semi()?;
        self.tpl.name = name.clone();
        self.span(ElementKind::Template, &name, pos);
        while !self.cur.at_eof() {
            let pos = self.cur.pos();
            match self.cur.peek().clone() {
                Tok::Ident(w) if w == "param" => self.param()?,
                Tok::Ident(w) if w == "place" => self.place()?,
                Tok::Ident(w) if w == "activity" => self.activity()?,
                Tok::Ident(w) if w == "input" => self.input_gate()?,
                Tok::Ident(w) if w == "output" => self.output_gate()?,
                Tok::Ident(w) if w == "arc" => self.arc()?,
                Tok::Ident(w) if w == "init" => self.init()?,
                other => {
                    return Err(ParseError::expected(
                        pos,
                        &other,
                        &["param", "place", "activity", "input", "output", "arc", "init"],
                    ))
                }
            }
        }
        self.resolve_gates()
    }

    fn param(&mut self) -> Result<(), ParseError> {
        self.cur.bump();
        let (name, pos) = self.cur.expect_name()?;
        self.cur.expect(&Tok::Colon)?;
        let sort = self.sort()?;
        self.semi()?;
        self.span(ElementKind::Parameter, &name, pos);
        self.tpl.parameters.declare(name, sort);
        Ok(())
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let (word, pos) = self.cur.expect_name()?;
        let spelled = if self.cur.eat(&Tok::Lt) {
            let (inner, _) = self.cur.expect_name()?;
            self.cur.expect(&Tok::Gt)?;
            format!("{word}<{inner}>")
        } else {
            word
        };
        Sort::from_name(&spelled).ok_or_else(|| {
            ParseError {
                pos,
                message: format!("unknown sort `{spelled}`"),
                expected: ["Int", "Real", "Bool", "OrderedSet<Int>", "OrderedSet<Real>"].map(String::from).to_vec(),
            }
        })
    }

    fn place(&mut self) -> Result<(), ParseError> {
        self.cur.bump();
        let (name, pos) = self.cur.expect_name()?;
        let place = if self.cur.eat(&Tok::LBracket) {
            let m = self.term()?;
            self.cur.expect(&Tok::RBracket)?;
            PlaceTemplate::new(&name, m)
        } else {
            PlaceTemplate::single(&name)
        };
        self.semi()?;
        self.span(ElementKind::Place, &name, pos);
        self.tpl.places.push(place);
        Ok(())
    }

    fn activity(&mut self) -> Result<(), ParseError> {
        self.cur.bump();
        let (name, pos) = self.cur.expect_name()?;
        let kind_pos = self.cur.pos();
        let kind = if self.cur.eat_ident("timed") {
            ActivityKind::Timed
        } else if self.cur.eat_ident("instantaneous") {
            ActivityKind::Instantaneous
        } else {
            return Err(ParseError::expected(kind_pos, self.cur.peek(), &["timed", "instantaneous"]));
        };
        let mut a = ActivityTemplate::instantaneous(&name);
        a.kind = kind;
        if !self.cur.eat(&Tok::Semi) {
            self.cur.expect(&Tok::LBrace)?;
            let mut entries = Vec::new();
            while !self.cur.eat(&Tok::RBrace) {
                let pos = self.cur.pos();
                if self.cur.eat_ident("cases") {
                    a.cases = self.term()?;
                } else if self.cur.eat_ident("time") {
                    a.time = Some(self.distribution()?);
                } else if self.cur.eat_ident("prob") {
                    let guard = self.term()?;
                    self.cur.expect(&Tok::Colon)?;
                    entries.push(CaseProbability { guard, probability: self.term()? });
                } else if self.cur.eat_ident("reactivation") {
                    let text = match self.cur.bump().tok {
                        Tok::Str(s) => s,
                        other => return Err(ParseError::expected(pos, &other, &["string"])),
                    };
                    a.reactivation = ReactivationSpec::Unsupported(text);
                } else {
                    return Err(ParseError::expected(
                        pos,
                        self.cur.peek(),
                        &["cases", "time", "prob", "reactivation", "}"],
                    ));
                }
                self.semi()?;
            }
            if !entries.is_empty() {
                a.case_distribution = CaseDistribution { entries };
            }
        }
        self.span(ElementKind::Activity, &name, pos);
        self.tpl.activities.push(a);
        Ok(())
    }

    fn distribution(&mut self) -> Result<DistributionSpec, ParseError> {
        let (family, pos) = self.cur.expect_name()?;
        let arity = match family.as_str() {
            "exponential" | "deterministic" => 1,
            "uniform" => 2,
            _ => {
                return Err(ParseError::expected(pos, &Tok::Ident(family), &["exponential", "uniform", "deterministic"]))
            }
        };
        self.cur.expect(&Tok::LParen)?;
        let mut args = vec![self.term()?];
        while args.len() < arity {
            self.cur.expect(&Tok::Comma)?;
            args.push(self.term()?);
        }
        self.cur.expect(&Tok::RParen)?;
        let mut args = args.into_iter();
        let mut next = || args.next().expect("arity checked");
        Ok(match family.as_str() {
            "exponential" => DistributionSpec::Exponential { rate: next() },
            "deterministic" => DistributionSpec::Deterministic { delay: next() },
            _ => DistributionSpec::Uniform { low: next(), high: next() },
        })
    }

    /// `NAME -> ACTIVITY {`
    fn gate_head(&mut self) -> Result<(String, Pos, String), ParseError> {
        self.cur.bump();
        let (name, pos) = self.cur.expect_name()?;
        self.cur.expect(&Tok::Arrow)?;
        let (activity, _) = self.cur.expect_name()?;
        self.cur.expect(&Tok::LBrace)?;
        Ok((name, pos, activity))
    }

    fn input_gate(&mut self) -> Result<(), ParseError> {
        let (name, pos, activity) = self.gate_head()?;
        let mut places = None;
        let mut predicate = None;
        let mut rules = Vec::new();
        while !self.cur.eat(&Tok::RBrace) {
            if self.cur.eat_ident("places") {
                places = Some(self.place_list()?);
            } else if self.cur.eat_ident("enable") {
                predicate = Some(self.predicate()?);
            } else {
                rules.push(self.rule()?);
                continue;
            }
            self.semi()?;
        }
        let predicate = predicate.unwrap_or(GatePredicate::True);
        let places = places.unwrap_or_else(|| implied_places(predicate.places(), &rules));
        self.span(ElementKind::InputGate, &name, pos);
        self.gates.push(PendingGate::Input(InputGateTemplate {
            name,
            activity,
            places,
            predicate,
            function: GateFunction::new(rules),
            origin: GateOrigin::Gate,
        }));
        Ok(())
    }

    fn output_gate(&mut self) -> Result<(), ParseError> {
        let (name, pos, activity) = self.gate_head()?;
        let mut places = None;
        let mut rules = Vec::new();
        while !self.cur.eat(&Tok::RBrace) {
            if self.cur.eat_ident("places") {
                places = Some(self.place_list()?);
                self.semi()?;
            } else {
                rules.push(self.rule()?);
            }
        }
        let places = places.unwrap_or_else(|| implied_places(Vec::new(), &rules));
        self.span(ElementKind::OutputGate, &name, pos);
        self.gates.push(PendingGate::Output(OutputGateTemplate {
            name,
            activity,
            places,
            function: GateFunction::new(rules),
            origin: GateOrigin::Gate,
        }));
        Ok(())
    }

    fn place_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.cur.expect_name()?.0];
        while self.cur.eat(&Tok::Comma) {
            out.push(self.cur.expect_name()?.0);
        }
        Ok(out)
    }

    fn comparison(&mut self) -> Result<Comparison, ParseError> {
        let c = match self.cur.peek() {
            Tok::Eq => Comparison::Eq,
            Tok::Gt => Comparison::Gt,
            Tok::Ge => Comparison::Ge,
            other => return Err(ParseError::expected(self.cur.pos(), other, &["=", ">", ">="])),
        };
        self.cur.bump();
        Ok(c)
    }

    fn predicate(&mut self) -> Result<GatePredicate, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.cur.eat_ident("or") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { GatePredicate::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<GatePredicate, ParseError> {
        let mut parts = vec![self.negation()?];
        while self.cur.eat_ident("and") {
            parts.push(self.negation()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one part") } else { GatePredicate::And(parts) })
    }

    fn negation(&mut self) -> Result<GatePredicate, ParseError> {
        if self.cur.eat_ident("not") {
            return Ok(GatePredicate::Not(Box::new(self.negation()?)));
        }
        if self.cur.eat(&Tok::LParen) {
            let p = self.predicate()?;
            self.cur.expect(&Tok::RParen)?;
            return Ok(p);
        }
        if self.cur.eat_ident("true") {
            return Ok(GatePredicate::True);
        }
        if self.cur.eat_ident("false") {
            return Ok(GatePredicate::False);
        }
        let quantifier = if self.cur.eat_ident("forall") {
            Some(Quantifier::ForAll)
        } else if self.cur.eat_ident("exists") {
            Some(Quantifier::Exists)
        } else {
            None
        };
        let (place, _) = self.cur.expect_name()?;
        let quantifier = match quantifier {
            Some(q) => q,
            None => {
                self.cur.expect(&Tok::LBracket)?;
                let i = self.term()?;
                self.cur.expect(&Tok::RBracket)?;
                Quantifier::AtIndex(i)
            }
        };
        let cmp = self.comparison()?;
        Ok(GatePredicate::Atom { quantifier, place, cmp, value: self.operand()? })
    }

    /// `PLACE [ [i] | where CMP t ] (:= | += | -=) t [when g];`
    fn rule(&mut self) -> Result<UpdateRule, ParseError> {
        let (place, _) = self.cur.expect_name()?;
        let selector = if self.cur.eat(&Tok::LBracket) {
            let i = self.term()?;
            self.cur.expect(&Tok::RBracket)?;
            Selector::AtIndex(i)
        } else if self.cur.eat_ident("where") {
            let cmp = self.comparison()?;
            Selector::WhereSatisfied { cmp, value: self.operand()? }
        } else {
            Selector::All
        };
        let pos = self.cur.pos();
        let op = self.cur.bump().tok;
        let value = self.term()?;
        let action = match op {
            Tok::Assign => Action::SetTo(value),
            Tok::PlusAssign => Action::Add(value),
            Tok::MinusAssign => Action::Sub(value),
            other => return Err(ParseError::expected(pos, &other, &["[", "where", ":=", "+=", "-="])),
        };
        let guard = if self.cur.eat_ident("when") { Some(self.term()?) } else { None };
        self.semi()?;
        Ok(UpdateRule { place, selector, action, guard })
    }

    fn arc(&mut self) -> Result<(), ParseError> {
        self.cur.bump();
        let (src, pos) = self.cur.expect_name()?;
        self.cur.expect(&Tok::Arrow)?;
        let (dst, _) = self.cur.expect_name()?;
        let label_pos = self.cur.pos();
        let label = match self.cur.peek().clone() {
            Tok::Str(s) => {
                self.cur.bump();
                s
            }
            _ => String::new(),
        };
        let name = if self.cur.eat_ident("as") { Some(self.cur.expect_name()?.0) } else { None };
        self.semi()?;
        self.gates.push(PendingGate::Arc { src, dst, label, label_pos, name, pos });
        Ok(())
    }

    fn init(&mut self) -> Result<(), ParseError> {
        self.cur.bump();
        let (place, pos) = self.cur.expect_name()?;
        self.cur.expect(&Tok::Eq)?;
        let f = self.marking_fn()?;
        self.semi()?;
        self.span(ElementKind::Marking, &place, pos);
        self.tpl.initial_marking.set(place, f);
        Ok(())
    }

    fn marking_fn(&mut self) -> Result<MarkingTemplateFn, ParseError> {
        if self.cur.eat_ident("identity") {
            return Ok(MarkingTemplateFn::Identity);
        }
        if self.cur.eat_ident("expr") {
            return Ok(MarkingTemplateFn::Expr(self.term()?));
        }
        if self.cur.eat_ident("table") {
            self.cur.expect(&Tok::LBrace)?;
            let mut table = std::collections::BTreeMap::new();
            if !self.cur.eat(&Tok::RBrace) {
                loop {
                    let i = self.int_literal()?;
                    self.cur.expect(&Tok::Colon)?;
                    let pos = self.cur.pos();
                    let v = u64::try_from(self.int_literal()?)
                        .map_err(|_| ParseError::new(pos, "token counts cannot be negative"))?;
                    table.insert(i, v);
                    if !self.cur.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.cur.expect(&Tok::RBrace)?;
            }
            return Ok(MarkingTemplateFn::Table(table));
        }
        let value = self.term()?;
        if self.cur.eat_ident("at") {
            let index = self.term()?;
            self.cur.expect_ident_word("over")?;
            return Ok(MarkingTemplateFn::set_at(value, index, self.marking_fn()?));
        }
        if self.cur.eat_ident("on") {
            let indices = self.term()?;
            self.cur.expect_ident_word("over")?;
            return Ok(MarkingTemplateFn::set_on(value, indices, self.marking_fn()?));
        }
        Ok(MarkingTemplateFn::Const(value))
    }

    fn int_literal(&mut self) -> Result<i64, ParseError> {
        let pos = self.cur.pos();
        let neg = self.cur.eat(&Tok::Minus);
        match self.cur.peek().clone() {
            Tok::Int(v) => {
                self.cur.bump();
                Ok(if neg { -v } else { v })
            }
            other => Err(ParseError::expected(pos, &other, &["integer"])),
        }
    }

    fn resolve_gates(&mut self) -> Result<(), ParseError> {
        for g in std::mem::take(&mut self.gates) {
            match g {
                PendingGate::Input(g) => self.tpl.input_gates.push(g),
                PendingGate::Output(g) => self.tpl.output_gates.push(g),
                PendingGate::Arc { src, dst, label, label_pos, name, pos } => {
                    let shift = |e: ParseError| label_error(e, label_pos);
                    if let (Some(p), Some(a)) = (self.tpl.place(&src), self.tpl.activity(&dst)) {
                        let spec = parse_input_label(&label).map_err(shift)?;
                        let mut g = desugar_input_arc(&spec, p, a);
                        g.name = name.unwrap_or(g.name);
                        self.span(ElementKind::InputGate, &g.name.clone(), pos);
                        self.tpl.input_gates.push(g);
                    } else if let (Some(a), Some(p)) = (self.tpl.activity(&src), self.tpl.place(&dst)) {
                        let spec = parse_output_label(&label).map_err(shift)?;
                        let mut g = desugar_output_arc(&spec, p, a);
                        g.name = name.unwrap_or(g.name);
                        self.span(ElementKind::OutputGate, &g.name.clone(), pos);
                        self.tpl.output_gates.push(g);
                    } else {
                        return Err(ParseError::new(
                            pos,
                            format!(
                                "arc `{}` must connect a declared place and a declared activity",
                                name.unwrap_or_else(|| arc_gate_name(&src, &dst))
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Maps a position inside a label string to the model file, assuming the
/// label is written on one line right after its opening quote.
fn label_error(mut e: ParseError, label_pos: Pos) -> ParseError {
    e.pos = Pos {
        offset: label_pos.offset + 1 + e.pos.offset,
        line: label_pos.line,
        column: label_pos.column + e.pos.column,
    };
    e.message = format!("in arc label: {}", e.message);
    e
}

fn implied_places(from_predicate: Vec<&str>, rules: &[UpdateRule]) -> Vec<String> {
    let mut places: Vec<String> = from_predicate.into_iter().map(String::from).collect();
    for r in rules {
        if !places.contains(&r.place) {
            places.push(r.place.clone());
        }
    }
    places
}
