use super::lexer::{tokenize, Tok, Token};
use crate::bat::SuccessorStateAxiom;
use crate::congolog::Program;
use crate::error::{Error, Result};
use crate::kernel::{sym, ActionTerm, FluentAtom, Formula, GroundAction, Sym, Term, ACTION_VAR};
use crate::mapping::{ActionRefinement, FluentRefinement};

const SECTIONS: &[&str] = &["domain", "fluents", "action", "ssa", "init", "map"];
const RESERVED: &[&str] = &[
    "forall", "exists", "true", "false", "pi", "nil", "if", "then", "else", "endif", "while", "do",
    "endwhile",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: Sym,
    pub params: Vec<Sym>,
    pub precondition: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub positive: bool,
    pub fluent: Sym,
    pub args: Vec<Sym>,
}

/// A theory file as written, before the object domain is fixed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TheoryDecl {
    pub domain: Vec<Sym>,
    pub fluents: Vec<(Sym, usize)>,
    pub actions: Vec<ActionDecl>,
    pub ssas: Vec<SuccessorStateAxiom>,
    pub models: Vec<Vec<Literal>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MappingDecl {
    pub actions: Vec<ActionRefinement>,
    pub fluents: Vec<FluentRefinement>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<Sym>,
    in_ssa: bool,
}

type P<T> = Result<T>;

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            scope: Vec::new(),
            in_ssa: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> P<T> {
        let t = &self.toks[self.pos];
        Err(Error::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> P<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.error(format!("expected {}, found {found}", tok.describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> P<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.error(format!("expected `{kw}`, found {found}"))
        }
    }

    fn ident(&mut self) -> P<Sym> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(sym(&s))
            }
            other => self.error(format!("expected a name, found {}", other.describe())),
        }
    }

    fn end(&self) -> P<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.peek().describe()))
        }
    }

    /// `(x, y, ...)`, or nothing for zero parameters.
    fn params(&mut self) -> P<Vec<Sym>> {
        let mut out = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                let v = self.ident()?;
                if out.contains(&v) {
                    return self.error(format!("parameter `{v}` repeated"));
                }
                out.push(v);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(out)
    }

    fn term(&mut self) -> P<Term> {
        let name = self.ident()?;
        Ok(if self.scope.contains(&name) {
            Term::Var(name)
        } else {
            Term::Obj(name)
        })
    }

    fn terms(&mut self) -> P<Vec<Term>> {
        let mut out = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                out.push(self.term()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(out)
    }

    // ---- formulas ----

    fn formula(&mut self) -> P<Formula> {
        let mut f = self.implication()?;
        while self.eat(&Tok::Iff) {
            let g = self.implication()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn implication(&mut self) -> P<Formula> {
        let f = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let g = self.implication()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn disjunction(&mut self) -> P<Formula> {
        let mut f = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let g = self.conjunction()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> P<Formula> {
        let mut f = self.unary()?;
        while self.eat(&Tok::Amp) {
            let g = self.unary()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> P<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_keyword("forall") || self.is_keyword("exists") {
            let universal = self.is_keyword("forall");
            self.bump();
            let mut vars = vec![self.ident()?];
            while self.eat(&Tok::Comma) {
                vars.push(self.ident()?);
            }
            self.expect(Tok::Dot)?;
            let depth = self.scope.len();
            self.scope.extend(vars.iter().cloned());
            let body = self.formula();
            self.scope.truncate(depth);
            let body = body?;
            return Ok(vars.into_iter().rev().fold(body, |b, v| {
                if universal {
                    Formula::Forall(v, Box::new(b))
                } else {
                    Formula::Exists(v, Box::new(b))
                }
            }));
        }
        self.primary()
    }

    fn primary(&mut self) -> P<Formula> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s)
                if self.in_ssa
                    && s == ACTION_VAR
                    && matches!(self.peek_at(1), Tok::Eq | Tok::Neq) =>
            {
                self.bump();
                let negated = self.bump() == Tok::Neq;
                let name = self.ident()?;
                let args = self.terms()?;
                let f = Formula::ActionIs(ActionTerm { name, args });
                Ok(if negated { Formula::not(f) } else { f })
            }
            Tok::Ident(_) => {
                if matches!(self.peek_at(1), Tok::LParen) {
                    let fluent = self.ident()?;
                    let args = self.terms()?;
                    if matches!(self.peek(), Tok::Eq | Tok::Neq) {
                        return self.error("function terms are not supported");
                    }
                    return Ok(Formula::Atom(FluentAtom { fluent, args }));
                }
                if matches!(self.peek_at(1), Tok::Eq | Tok::Neq) {
                    let x = self.term()?;
                    let negated = self.bump() == Tok::Neq;
                    let y = self.term()?;
                    let f = Formula::eq(x, y);
                    return Ok(if negated { Formula::not(f) } else { f });
                }
                let fluent = self.ident()?;
                if self.scope.contains(&fluent) {
                    self.pos -= 1;
                    return self.error(format!("variable `{fluent}` used as a formula"));
                }
                Ok(Formula::Atom(FluentAtom {
                    fluent,
                    args: Vec::new(),
                }))
            }
            other => self.error(format!("expected a formula, found {}", other.describe())),
        }
    }

    // ---- programs ----

    fn program(&mut self) -> P<Program> {
        let mut items = vec![self.interleaving()?];
        while self.eat(&Tok::Bar) {
            items.push(self.interleaving()?);
        }
        Ok(Program::alternatives(items))
    }

    fn interleaving(&mut self) -> P<Program> {
        let mut items = vec![self.sequence()?];
        while self.eat(&Tok::BarBar) {
            items.push(self.sequence()?);
        }
        Ok(items
            .into_iter()
            .rev()
            .reduce(|acc, p| Program::interleave(p, acc))
            .expect("nonempty"))
    }

    fn sequence(&mut self) -> P<Program> {
        let mut items = vec![self.postfix()?];
        while self.eat(&Tok::Semi) {
            items.push(self.postfix()?);
        }
        Ok(items
            .into_iter()
            .rev()
            .reduce(|acc, p| Program::seq(p, acc))
            .expect("nonempty"))
    }

    fn postfix(&mut self) -> P<Program> {
        let mut p = self.program_primary()?;
        while self.eat(&Tok::Star) {
            p = Program::star(p);
        }
        Ok(p)
    }

    /// A test `phi?`, if one starts here.
    fn try_test(&mut self) -> Option<Program> {
        let save = self.pos;
        match self.unary() {
            Ok(f) if self.eat(&Tok::Question) => Some(Program::Test(f)),
            _ => {
                self.pos = save;
                None
            }
        }
    }

    fn program_primary(&mut self) -> P<Program> {
        if let Some(t) = self.try_test() {
            return Ok(t);
        }
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(s) if s == "nil" => {
                self.bump();
                Ok(Program::Nil)
            }
            Tok::Ident(s) if s == "pi" => {
                self.bump();
                let mut vars = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    vars.push(self.ident()?);
                }
                self.expect(Tok::Dot)?;
                let depth = self.scope.len();
                self.scope.extend(vars.iter().cloned());
                let body = self.postfix();
                self.scope.truncate(depth);
                let body = body?;
                Ok(vars
                    .into_iter()
                    .rev()
                    .fold(body, |b, v| Program::Pick(v, Box::new(b))))
            }
            Tok::Ident(s) if s == "if" => {
                self.bump();
                let phi = self.formula()?;
                self.keyword("then")?;
                let p = self.program()?;
                let q = if self.is_keyword("else") {
                    self.bump();
                    self.program()?
                } else {
                    Program::Nil
                };
                self.keyword("endif")?;
                Ok(Program::if_then_else(phi, p, q))
            }
            Tok::Ident(s) if s == "while" => {
                self.bump();
                let phi = self.formula()?;
                self.keyword("do")?;
                let p = self.program()?;
                self.keyword("endwhile")?;
                Ok(Program::while_do(phi, p))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                let args = self.terms()?;
                Ok(Program::Action(ActionTerm { name, args }))
            }
            other => self.error(format!("expected a program, found {}", other.describe())),
        }
    }

    // ---- files ----

    fn list_follows(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !SECTIONS.contains(&s.as_str()))
    }

    fn theory(&mut self) -> P<TheoryDecl> {
        let mut t = TheoryDecl::default();
        loop {
            let Tok::Ident(kw) = self.peek().clone() else {
                if *self.peek() == Tok::Eof {
                    return Ok(t);
                }
                return self.error(format!(
                    "expected a section, found {}",
                    self.peek().describe()
                ));
            };
            self.bump();
            match kw.as_str() {
                "domain" => {
                    self.expect(Tok::Colon)?;
                    if self.list_follows() {
                        loop {
                            t.domain.push(self.ident()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                }
                "fluents" => {
                    self.expect(Tok::Colon)?;
                    if self.list_follows() {
                        loop {
                            let name = self.ident()?;
                            self.expect(Tok::Slash)?;
                            let arity = match self.bump() {
                                Tok::Ident(n) => n.parse::<usize>().ok(),
                                _ => None,
                            };
                            let Some(arity) = arity else {
                                self.pos -= 1;
                                return self.error("expected an arity");
                            };
                            t.fluents.push((name, arity));
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                }
                "action" => {
                    let name = self.ident()?;
                    let params = self.params()?;
                    self.keyword("possible")?;
                    self.keyword("when")?;
                    self.scope = params.clone();
                    let precondition = self.formula();
                    self.scope.clear();
                    t.actions.push(ActionDecl {
                        name,
                        params,
                        precondition: precondition?,
                    });
                }
                "ssa" => {
                    let fluent = self.ident()?;
                    let params = self.params()?;
                    self.expect(Tok::LeftArrow)?;
                    self.scope = params.clone();
                    self.in_ssa = true;
                    let rhs = self.formula();
                    self.in_ssa = false;
                    self.scope.clear();
                    t.ssas.push(SuccessorStateAxiom {
                        fluent,
                        params,
                        rhs: rhs?,
                    });
                }
                "init" => {
                    self.keyword("model")?;
                    self.expect(Tok::LBrace)?;
                    let mut lits = Vec::new();
                    if !self.eat(&Tok::RBrace) {
                        loop {
                            let positive = !self.eat(&Tok::Tilde);
                            let fluent = self.ident()?;
                            let mut args = Vec::new();
                            if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                                loop {
                                    args.push(self.ident()?);
                                    if self.eat(&Tok::RParen) {
                                        break;
                                    }
                                    self.expect(Tok::Comma)?;
                                }
                            }
                            lits.push(Literal {
                                positive,
                                fluent,
                                args,
                            });
                            if self.eat(&Tok::RBrace) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    t.models.push(lits);
                }
                _ => {
                    self.pos -= 1;
                    return self.error(format!("expected a section, found `{kw}`"));
                }
            }
        }
    }

    fn mapping(&mut self) -> P<MappingDecl> {
        let mut m = MappingDecl::default();
        while *self.peek() != Tok::Eof {
            self.keyword("map")?;
            if self.is_keyword("action") {
                self.bump();
                let action = self.ident()?;
                let params = self.params()?;
                self.expect(Tok::Eq)?;
                self.scope = params.clone();
                let program = self.program();
                self.scope.clear();
                m.actions.push(ActionRefinement {
                    action,
                    params,
                    program: program?,
                });
            } else if self.is_keyword("fluent") {
                self.bump();
                let fluent = self.ident()?;
                let params = self.params()?;
                self.expect(Tok::Eq)?;
                self.scope = params.clone();
                let formula = self.formula();
                self.scope.clear();
                m.fluents.push(FluentRefinement {
                    fluent,
                    params,
                    formula: formula?,
                });
            } else {
                let found = self.peek().describe();
                return self.error(format!("expected `action` or `fluent`, found {found}"));
            }
        }
        Ok(m)
    }
}

pub fn parse_theory(src: &str) -> Result<TheoryDecl> {
    Parser::new(src)?.theory()
}

pub fn parse_mapping(src: &str) -> Result<MappingDecl> {
    Parser::new(src)?.mapping()
}

/// Parses a formula; identifiers in `vars` are variables, all others
/// object names.
pub fn parse_formula(src: &str, vars: &[&str]) -> Result<Formula> {
    let mut p = Parser::new(src)?;
    p.scope = vars.iter().map(|v| sym(v)).collect();
    let f = p.formula()?;
    p.end()?;
    Ok(f)
}

pub fn parse_program(src: &str, vars: &[&str]) -> Result<Program> {
    let mut p = Parser::new(src)?;
    p.scope = vars.iter().map(|v| sym(v)).collect();
    let prog = p.program()?;
    p.end()?;
    Ok(prog)
}

/// A comma-separated list of ground actions, e.g. `go(A,B), stop`.
pub fn parse_actions(src: &str) -> Result<Vec<GroundAction>> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    if *p.peek() == Tok::Eof {
        return Ok(out);
    }
    loop {
        let name = p.ident()?;
        let mut args = Vec::new();
        if p.eat(&Tok::LParen) && !p.eat(&Tok::RParen) {
            loop {
                args.push(p.ident()?);
                if p.eat(&Tok::RParen) {
                    break;
                }
                p.expect(Tok::Comma)?;
            }
        }
        out.push(GroundAction { name, args });
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    p.end()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_of_connectives() {
        let f = parse_formula("P | Q & ~R -> S <-> T", &[]).unwrap();
        assert_eq!(f.to_string(), "(((P | (Q & ~R)) -> S) <-> T)");
        let g = parse_formula("forall x. P(x) & Q(x)", &[]).unwrap();
        assert_eq!(g.to_string(), "(forall x. (P(x) & Q(x)))");
    }

    #[test]
    fn identifiers_resolve_by_scope() {
        let f = parse_formula("exists l. At(s, l) & l != Cf", &["s"]).unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "l",
                Formula::and(
                    Formula::atom("At", vec![Term::var("s"), Term::var("l")]),
                    Formula::not(Formula::eq(Term::var("l"), Term::obj("Cf")))
                )
            )
        );
    }

    #[test]
    fn programs_with_tests_and_picks() {
        let p = parse_program(
            "(r = A & C(o))?; pi t. go(s, t); done | nil",
            &["r", "o", "s"],
        )
        .unwrap();
        assert_eq!(
            p.to_string(),
            "((((r = A & C(o)))? ; ((pi t . go(s, t)) ; done)) | nil)"
        );
    }

    #[test]
    fn while_and_if_expand() {
        let p = parse_program("while ~Done do step endwhile", &[]).unwrap();
        assert_eq!(p.to_string(), "((((~Done)? ; step))* ; (~~Done)?)");
        let q = parse_program("if P then a else b endif", &[]).unwrap();
        assert_eq!(q.to_string(), "(((P)? ; a) | ((~P)? ; b))");
    }

    #[test]
    fn action_lists() {
        let acts = parse_actions("takeRoad(123,Rd_a,W,L1), unload(123), noop").unwrap();
        assert_eq!(acts.len(), 3);
        assert_eq!(acts[0].to_string(), "takeRoad(123, Rd_a, W, L1)");
        assert!(parse_actions("").unwrap().is_empty());
    }

    #[test]
    fn theory_sections() {
        let t = parse_theory(
            "domain: A, B\nfluents:\naction go(x) possible when ~Q(x)\n\
             ssa Q(x) <- a = go(x) | Q(x)\ninit model { }\ninit model { Q(A) }",
        );
        // Q is not declared, but that is a semantic error found later
        let t = t.unwrap();
        assert_eq!(t.domain.len(), 2);
        assert!(t.fluents.is_empty());
        assert_eq!(t.models.len(), 2);
        assert_eq!(t.ssas[0].rhs.to_string(), "(a = go(x) | Q(x))");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_theory("domain: A\naction go(x) possible ~Q(x)").unwrap_err();
        assert_eq!(
            e,
            Error::Syntax {
                line: 2,
                col: 23,
                message: "expected `when`, found `~`".into()
            }
        );
    }
}
