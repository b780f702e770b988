//! Recursive-descent parser. Errors inside one top-level item are recorded
//! and parsing resumes at the next section keyword, so a single run reports
//! as many problems as possible.

use crate::behavior::{ChronologyDecl, GroupDecl, Occurrence, Trace};
use crate::diag::{SourceFile, Span};
use crate::eventize::{Event, Subdiagram, Window};
use crate::ids::{ArcId, EventId, StageRef, ThimacId};
use crate::model::{build_model, ArcDecl, ArcKind, ModelDecl, ModelError, Notation, StageKind, ThimacDecl};

use super::lexer::{lex, Tok, Token};
use super::{Document, ParseError, Parsed, SpanTable};

const SECTIONS: [&str; 5] = ["model", "subdiagram", "event", "chronology", "trace"];

pub fn parse(file: &SourceFile) -> Result<Parsed, Vec<ParseError>> {
    parse_str(file.text())
}

pub fn parse_str(src: &str) -> Result<Parsed, Vec<ParseError>> {
    let (tokens, lex_errors) = lex(src);
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
        errors: lex_errors,
        spans: SpanTable::new(),
    };
    let doc = p.document();
    if p.errors.is_empty() {
        Ok(Parsed {
            document: doc,
            spans: p.spans,
        })
    } else {
        p.errors.sort_by_key(|e| e.span());
        Err(p.errors)
    }
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    errors: Vec<ParseError>,
    spans: SpanTable,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        match t.tok {
            Tok::LBrace => self.depth += 1,
            Tok::RBrace => self.depth = self.depth.saturating_sub(1),
            _ => {}
        }
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError::Syntax {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.unexpected(&[&tok.to_string()])
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_keyword(kw) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => self.unexpected(&["identifier"]),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(&["string"]),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected(&["integer"]),
        }
    }

    fn stage_kind(&mut self) -> PResult<(StageKind, Span)> {
        if let Tok::Ident(s) = self.peek() {
            if let Some(k) = StageKind::from_keyword(s) {
                return Ok((k, self.bump().span));
            }
        }
        let kinds: Vec<&str> = StageKind::ALL.iter().map(|k| k.keyword()).collect();
        self.unexpected(&kinds)
    }

    fn stage_ref(&mut self) -> PResult<(StageRef, Span)> {
        let (t, start) = self.ident()?;
        self.expect(Tok::Dot)?;
        let (k, end) = self.stage_kind()?;
        Ok((StageRef::new(t, k), start.to(end)))
    }

    /// `item (, item)* ;` — the list may be empty.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat(&Tok::Semi) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::Semi)?;
            return Ok(out);
        }
    }

    fn record(&mut self, key: impl Into<String>, span: Span) {
        self.spans.entry(key.into()).or_insert(span);
    }

    fn recover(&mut self, item_start: usize) {
        if self.pos == item_start {
            self.bump();
        }
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Ident(s) if self.depth == 0 && SECTIONS.contains(&s.as_str()) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn document(&mut self) -> Document {
        let mut doc = Document::default();
        let mut rank = 0usize;
        let mut last_section = String::new();
        let mut seen_model = false;

        while *self.peek() != Tok::Eof {
            if self.eat(&Tok::Semi) {
                continue;
            }
            let start = self.pos;
            self.depth = 0;
            let span = self.span();
            let section = match self.peek() {
                Tok::Ident(s) if SECTIONS.contains(&s.as_str()) => s.clone(),
                _ => {
                    let e = self.unexpected::<()>(&SECTIONS.map(|s| s)).unwrap_err();
                    self.errors.push(e);
                    self.recover(start);
                    continue;
                }
            };
            let r = SECTIONS.iter().position(|s| *s == section).unwrap_or(0);
            if section == "model" && seen_model {
                self.errors.push(ParseError::DuplicateSection {
                    span,
                    section: section.clone(),
                });
            } else if r < rank {
                self.errors.push(ParseError::SectionOrder {
                    span,
                    section: section.clone(),
                    after: last_section.clone(),
                });
            }
            rank = rank.max(r);
            last_section = section.clone();

            let result = match section.as_str() {
                "model" => {
                    seen_model = true;
                    self.model().map(|m| {
                        if let Some(m) = m {
                            doc.model = m;
                        }
                    })
                }
                "subdiagram" => self.subdiagram().map(|s| doc.subdiagrams.push(s)),
                "event" => self.event().map(|e| doc.events.push(e)),
                "chronology" => self.chronology().map(|c| doc.chronologies.push(c)),
                _ => self.trace().map(|t| {
                    if let Some(t) = t {
                        doc.traces.push(t)
                    }
                }),
            };
            if let Err(e) = result {
                self.errors.push(e);
                self.recover(start);
            }
        }
        doc
    }

    // model <name> [simplified] { ... }
    fn model(&mut self) -> PResult<Option<crate::model::StaticModel>> {
        self.keyword("model")?;
        let (name, _) = self.ident()?;
        let notation = if self.at_keyword("simplified") {
            self.bump();
            Notation::Simplified
        } else {
            Notation::Full
        };
        let mut decl = ModelDecl {
            name,
            notation,
            ..ModelDecl::default()
        };
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Semi => {
                    self.bump();
                }
                Tok::Ident(s) if s == "thimac" => self.thimac(None, &mut decl.thimacs)?,
                Tok::Ident(s) if s == "flow" || s == "trigger" => {
                    let kind = if s == "flow" { ArcKind::Flow } else { ArcKind::Trigger };
                    self.bump();
                    let (id, span) = self.ident()?;
                    self.record(id.clone(), span);
                    self.expect(Tok::Colon)?;
                    let (from, _) = self.stage_ref()?;
                    self.expect(Tok::Arrow)?;
                    let (to, _) = self.stage_ref()?;
                    self.expect(Tok::Semi)?;
                    decl.arcs.push(ArcDecl {
                        id: ArcId::new(id),
                        kind,
                        from,
                        to,
                    });
                }
                _ => return self.unexpected(&["`thimac`", "`flow`", "`trigger`", "`}`"]),
            }
        }
        match build_model(decl) {
            Ok(m) => Ok(Some(m)),
            Err(errs) => {
                for e in errs {
                    let span = self.element_span(&e);
                    self.errors.push(ParseError::Semantic {
                        span,
                        message: e.to_string(),
                    });
                }
                Ok(None)
            }
        }
    }

    fn element_span(&self, e: &ModelError) -> Span {
        let key = match e {
            ModelError::DuplicateStage { thimac, kind } => format!("{thimac}.{kind}"),
            _ => e.element(),
        };
        self.spans.get(&key).copied().unwrap_or_default()
    }

    // thimac <id> ["label"] { stages: ...; things: ...; memory; thimac ... }
    fn thimac(&mut self, parent: Option<ThimacId>, out: &mut Vec<ThimacDecl>) -> PResult<()> {
        self.keyword("thimac")?;
        let (id, span) = self.ident()?;
        self.record(id.clone(), span);
        let label = match self.peek() {
            Tok::Str(_) => self.string()?,
            _ => id.clone(),
        };
        let mut decl = ThimacDecl::new(id.as_str(), label);
        decl.parent = parent;
        let me = out.len();
        out.push(decl);
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(());
                }
                Tok::Semi => {
                    self.bump();
                }
                Tok::Ident(s) if s == "stages" => {
                    self.bump();
                    self.expect(Tok::Colon)?;
                    let kinds = self.list(|p| p.stage_kind())?;
                    for (k, span) in kinds {
                        self.record(format!("{id}.{k}"), span);
                        out[me].stages.push(k);
                    }
                }
                Tok::Ident(s) if s == "things" => {
                    self.bump();
                    self.expect(Tok::Colon)?;
                    let things = self.list(|p| p.string())?;
                    out[me].things.extend(things);
                }
                Tok::Ident(s) if s == "memory" => {
                    self.bump();
                    self.expect(Tok::Semi)?;
                    out[me].memory = true;
                }
                Tok::Ident(s) if s == "thimac" => self.thimac(Some(ThimacId::new(id.as_str())), out)?,
                _ => return self.unexpected(&["`stages`", "`things`", "`memory`", "`thimac`", "`}`"]),
            }
        }
    }

    // subdiagram <id> ["LABEL"] { stages: a.create, ...; arcs: f1, ...; }
    fn subdiagram(&mut self) -> PResult<Subdiagram> {
        self.keyword("subdiagram")?;
        let (id, span) = self.ident()?;
        self.record(id.clone(), span);
        let label = match self.peek() {
            Tok::Str(_) => self.string()?,
            _ => id.clone(),
        };
        let mut sub = Subdiagram::new(id, label);
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(sub);
                }
                Tok::Semi => {
                    self.bump();
                }
                Tok::Ident(s) if s == "stages" => {
                    self.bump();
                    self.expect(Tok::Colon)?;
                    let refs = self.list(|p| p.stage_ref())?;
                    sub.stages.extend(refs.into_iter().map(|(r, _)| r));
                }
                Tok::Ident(s) if s == "arcs" => {
                    self.bump();
                    self.expect(Tok::Colon)?;
                    let ids = self.list(|p| p.ident())?;
                    sub.arcs.extend(ids.into_iter().map(|(a, _)| ArcId::new(a)));
                }
                _ => return self.unexpected(&["`stages`", "`arcs`", "`}`"]),
            }
        }
    }

    // event <id> = <subdiagram> [window t0..t1];
    fn event(&mut self) -> PResult<Event> {
        self.keyword("event")?;
        let (id, span) = self.ident()?;
        self.record(id.clone(), span);
        self.expect(Tok::Eq)?;
        let (sub, _) = self.ident()?;
        let mut event = Event::new(id, sub);
        if self.at_keyword("window") {
            self.bump();
            let start = self.int()?;
            self.expect(Tok::DotDot)?;
            let end = self.int()?;
            event.window = Some(Window { start, end });
        }
        self.expect(Tok::Semi)?;
        Ok(event)
    }

    fn event_ids(&mut self) -> PResult<Vec<EventId>> {
        Ok(self
            .list(|p| p.ident())?
            .into_iter()
            .map(|(e, _)| EventId::new(e))
            .collect())
    }

    // chronology <id> { events: ...; a -> b -> c; exclusive [name] { a | b }; start: ...; end: ...; }
    fn chronology(&mut self) -> PResult<ChronologyDecl> {
        self.keyword("chronology")?;
        let (id, span) = self.ident()?;
        self.record(id.clone(), span);
        let mut decl = ChronologyDecl::new(id);
        self.expect(Tok::LBrace)?;
        loop {
            let word = match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(decl);
                }
                Tok::Semi => {
                    self.bump();
                    continue;
                }
                Tok::Ident(s) => s.clone(),
                _ => return self.unexpected(&["event id", "`exclusive`", "`start`", "`end`", "`}`"]),
            };
            if *self.peek_at(1) == Tok::Arrow {
                let (mut prev, _) = self.ident()?;
                while self.eat(&Tok::Arrow) {
                    let (next, _) = self.ident()?;
                    decl.edges
                        .push((EventId::new(prev.as_str()), EventId::new(next.as_str())));
                    prev = next;
                }
                self.expect(Tok::Semi)?;
                continue;
            }
            match (word.as_str(), self.peek_at(1)) {
                ("events", Tok::Colon) => {
                    self.bump();
                    self.bump();
                    let ids = self.event_ids()?;
                    decl.events.extend(ids);
                }
                ("start", Tok::Colon) => {
                    self.bump();
                    self.bump();
                    let ids = self.event_ids()?;
                    decl.start.get_or_insert_with(Vec::new).extend(ids);
                }
                ("end", Tok::Colon) => {
                    self.bump();
                    self.bump();
                    let ids = self.event_ids()?;
                    decl.end.get_or_insert_with(Vec::new).extend(ids);
                }
                ("exclusive", Tok::LBrace | Tok::Ident(_)) => {
                    self.bump();
                    let name = match self.peek() {
                        Tok::Ident(_) => Some(self.ident()?.0),
                        _ => None,
                    };
                    self.expect(Tok::LBrace)?;
                    let mut members = vec![EventId::new(self.ident()?.0)];
                    while self.eat(&Tok::Pipe) {
                        members.push(EventId::new(self.ident()?.0));
                    }
                    self.expect(Tok::RBrace)?;
                    decl.exclusive.push(GroupDecl { name, members });
                }
                _ => {
                    self.bump();
                    return self.unexpected(&["`->`"]);
                }
            }
        }
    }

    // trace <id> = [E1 @ 0, E2 @ 1];
    fn trace(&mut self) -> PResult<Option<Trace>> {
        self.keyword("trace")?;
        let (id, span) = self.ident()?;
        self.record(id.clone(), span);
        self.expect(Tok::Eq)?;
        self.expect(Tok::LBracket)?;
        let mut occ = Vec::new();
        if !self.eat(&Tok::RBracket) {
            loop {
                let (e, _) = self.ident()?;
                self.expect(Tok::At)?;
                let t = self.int()?;
                occ.push(Occurrence::new(e, t));
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RBracket)?;
                break;
            }
        }
        let end = self.expect(Tok::Semi)?;
        match Trace::new(id, occ) {
            Ok(t) => Ok(Some(t)),
            Err(e) => {
                self.errors.push(ParseError::Semantic {
                    span: span.to(end),
                    message: e.to_string(),
                });
                Ok(None)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_model() {
        let p = parse_str("model m { thimac a \"A\" { stages: create; } }").unwrap();
        assert_eq!(p.document.model.thimac_count(), 1);
        assert!(p.document.events.is_empty());
        assert!(p.document.chronologies.is_empty());
        assert!(p.spans.contains_key("a.create"));
    }

    #[test]
    fn empty_source_is_empty_model() {
        let p = parse_str("").unwrap();
        assert_eq!(p.document, Document::default());
    }

    #[test]
    fn reversed_arrow() {
        let src = "model m { thimac a { stages: create, process; } flow f: a.create <- a.process; }";
        let errs = parse_str(src).unwrap_err();
        let at = src.find("<-").unwrap();
        assert!(errs.iter().any(|e| e.span() == Span::new(at, at + 2)));
    }

    #[test]
    fn unresolved_stage_gets_span() {
        let src = "model m {\n thimac a { stages: create; }\n flow f: a.create -> ghost.process;\n}";
        let errs = parse_str(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].to_string().contains("ghost"));
        assert_eq!(errs[0].span().start, src.find("f:").unwrap());
    }

    #[test]
    fn sections_out_of_order_and_duplicated() {
        let errs = parse_str("event E1 = S1; model m {} model n {}").unwrap_err();
        assert!(matches!(errs[0], ParseError::SectionOrder { .. }));
        assert!(errs.iter().any(|e| matches!(e, ParseError::DuplicateSection { .. })));
    }

    #[test]
    fn recovery_reports_several_errors() {
        let errs = parse_str("event E1 = ; event E2 = S2 window 3; event E3 = S3;").unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn chronology_forms() {
        let src = "event A = S; event B = S; event C = S;
            chronology K { events: A; A -> B -> C; exclusive x { B | C }; exclusive { A | C } start: A; end: C; }";
        let p = parse_str(src).unwrap();
        let c = &p.document.chronologies[0];
        assert_eq!(c.edges.len(), 2);
        assert_eq!(c.exclusive[0].name.as_deref(), Some("x"));
        assert_eq!(c.exclusive[1].name, None);
        assert_eq!(c.start.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn keyword_named_events() {
        let src = "event start = S; event end = S; chronology B { start -> end; }";
        let p = parse_str(src).unwrap();
        assert_eq!(p.document.chronologies[0].edges[0].0.as_str(), "start");
    }

    #[test]
    fn trace_invariants_are_parse_errors() {
        assert!(parse_str("trace t = [E1 @ 2, E2 @ 1];").is_err());
        assert!(parse_str("trace t = [E1 @ 0, E1 @ 1];").is_err());
        let p = parse_str("trace t = [];").unwrap();
        assert!(p.document.traces[0].is_empty());
    }
}
