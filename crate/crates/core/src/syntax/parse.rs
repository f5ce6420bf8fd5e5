use std::collections::BTreeSet;

use super::{Formula, Modality, Sort, SortContext, SyntaxError, Term, Var};
use crate::rational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    LaneLit(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Comma,
    Dot,
    Colon,
    Tilde,
    VBar2,
    Bar,
    Amp,
    Bang,
    Eq,
    Neq,
    Arrow,
    DArrow,
    Plus,
    Caret,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::LaneLit(n) => format!("lane `#{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", punct(other)),
        }
    }
}

fn punct(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrack => "[",
        Tok::RBrack => "]",
        Tok::Lt => "<",
        Tok::Gt => ">",
        Tok::Comma => ",",
        Tok::Dot => ".",
        Tok::Colon => ":",
        Tok::Tilde => "~",
        Tok::VBar2 => "||",
        Tok::Bar => "|",
        Tok::Amp => "&",
        Tok::Bang => "!",
        Tok::Eq => "=",
        Tok::Neq => "!=",
        Tok::Arrow => "->",
        Tok::DArrow => "<->",
        Tok::Plus => "+",
        Tok::Caret => "^",
        _ => "?",
    }
}

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| SyntaxError::Parse { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let at = |j: usize| chars.get(j).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while at(i).is_some_and(|d| d.is_ascii_alphanumeric() || d == '_' || d == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() || (c == '-' && at(i + 1).is_some_and(|d| d.is_ascii_digit())) || c == '.' && at(i + 1).is_some_and(|d| d.is_ascii_digit()) {
            i += 1;
            while at(i).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
            }
            if matches!(at(i), Some('/') | Some('.')) && at(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
                while at(i).is_some_and(|d| d.is_ascii_digit()) {
                    i += 1;
                }
            }
            Tok::Num(chars[start..i].iter().collect())
        } else if c == '#' {
            i += 1;
            while at(i).is_some_and(|d| d.is_ascii_digit()) {
                i += 1;
            }
            let digits: String = chars[start + 1..i].iter().collect();
            let n = digits
                .parse()
                .map_err(|_| err(tl, tc, "expected a lane number after `#`".into()))?;
            Tok::LaneLit(n)
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let three: String = chars[i..(i + 3).min(chars.len())].iter().collect();
            let (tok, len) = if three == "<->" {
                (Tok::DArrow, 3)
            } else if two == "->" {
                (Tok::Arrow, 2)
            } else if two == "||" {
                (Tok::VBar2, 2)
            } else if two == "!=" {
                (Tok::Neq, 2)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '<' => Tok::Lt,
                    '>' => Tok::Gt,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    '~' => Tok::Tilde,
                    '|' => Tok::Bar,
                    '&' => Tok::Amp,
                    '!' => Tok::Bang,
                    '=' => Tok::Eq,
                    '+' => Tok::Plus,
                    '^' => Tok::Caret,
                    other => return Err(err(tl, tc, format!("unexpected character `{other}`"))),
                };
                (t, 1)
            };
            i += len;
            tok
        };
        col += i - start;
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

const RESERVED: &[&str] = &[
    "bot", "top", "free", "re", "cl", "not", "and", "or", "forall", "exists", "somewhere", "everywhere", "l", "w",
    "ego", "tau",
];

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a SortContext,
    scope: Vec<Var>,
    pending: BTreeSet<String>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(SyntaxError::Parse {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.error(format!("expected `{}`, found {found}", punct(&tok)))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let a = self.implication()?;
        if *self.peek() == Tok::DArrow {
            self.bump();
            let b = self.implication()?;
            if *self.peek() == Tok::DArrow {
                return self.error("`<->` does not associate; add parentheses");
            }
            return Ok(Formula::iff(a, b));
        }
        Ok(a)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let a = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let b = self.implication()?;
            return Ok(Formula::implies(a, b));
        }
        Ok(a)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut a = self.conjunction()?;
        while self.is_kw("or") || *self.peek() == Tok::Bar {
            self.bump();
            a = Formula::or(a, self.conjunction()?);
        }
        Ok(a)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut a = self.vertical()?;
        while self.is_kw("and") || *self.peek() == Tok::Amp {
            self.bump();
            a = Formula::and(a, self.vertical()?);
        }
        Ok(a)
    }

    fn vertical(&mut self) -> PResult<Formula> {
        let mut a = self.horizontal()?;
        while *self.peek() == Tok::VBar2 {
            self.bump();
            a = Formula::vchop(a, self.horizontal()?);
        }
        Ok(a)
    }

    fn horizontal(&mut self) -> PResult<Formula> {
        let mut a = self.restriction()?;
        while *self.peek() == Tok::Tilde {
            self.bump();
            a = Formula::hchop(a, self.restriction()?);
        }
        Ok(a)
    }

    fn restriction(&mut self) -> PResult<Formula> {
        let mut a = self.unary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            a = Formula::restrict(a, self.term()?);
        }
        Ok(a)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat_kw("not") || (*self.peek() == Tok::Bang && self.bump() == Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat_kw("somewhere") {
            return Ok(Formula::somewhere(self.unary()?));
        }
        if self.eat_kw("everywhere") {
            return Ok(Formula::everywhere(self.unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantifier();
        }
        match self.peek() {
            Tok::LBrack => {
                self.bump();
                let m = self.modality()?;
                self.expect(Tok::RBrack)?;
                let body = self.unary()?;
                Ok(match m {
                    None => Formula::box_l(body),
                    Some(m) => Formula::boxm(m, body),
                })
            }
            Tok::Lt => {
                self.bump();
                let m = self.modality()?;
                self.expect(Tok::Gt)?;
                let body = self.unary()?;
                Ok(match m {
                    None => Formula::diamond_l(body),
                    Some(m) => Formula::diamond(m, body),
                })
            }
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> PResult<Formula> {
        let universal = self.is_kw("forall");
        self.bump();
        let name = self.var_name()?;
        self.expect(Tok::Colon)?;
        let sort = match self.bump() {
            Tok::Ident(s) => s.parse::<Sort>().or_else(|_| {
                self.pos -= 1;
                self.error(format!("unknown sort `{s}`, expected car, real or lane"))
            })?,
            _ => {
                self.pos -= 1;
                return self.error("expected a sort");
            }
        };
        self.expect(Tok::Dot)?;
        let var = Var::new(name, sort);
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        Ok(if universal {
            Formula::forall(var, body)
        } else {
            Formula::exists(var, body)
        })
    }

    fn var_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected a variable name, found {}", other.describe())),
        }
    }

    /// `None` stands for the length modality `l`.
    fn modality(&mut self) -> PResult<Option<Modality>> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            other => {
                let found = other.describe();
                return self.error(format!("expected a modality, found {found}"));
            }
        };
        if kw == "l" {
            self.bump();
            return Ok(None);
        }
        if kw == "tau" {
            self.bump();
            return Ok(Some(Modality::Tau));
        }
        let build: fn(Term) -> Modality = match kw.as_str() {
            "r" => Modality::Reserve,
            "c" => Modality::Claim,
            "wd_c" => Modality::WithdrawClaim,
            "wd_r" => Modality::WithdrawReserve,
            _ => return self.error(format!("unknown modality `{kw}`")),
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let car = self.car_term()?;
        self.expect(Tok::RParen)?;
        Ok(Some(build(car)))
    }

    fn car_term(&mut self) -> PResult<Term> {
        if self.eat_kw("ego") {
            return Ok(Term::Ego);
        }
        let name = self.var_name()?;
        let v = self.resolve(&name);
        if let Term::Var(v) = &v {
            if v.sort != Sort::Car && !self.pending.contains(&v.name) {
                return Err(SyntaxError::Sort(format!("`{}` is a {} variable, expected a car", v.name, v.sort)));
            }
        }
        Ok(v)
    }

    fn resolve(&mut self, name: &str) -> Term {
        if let Some(v) = self.scope.iter().rev().find(|v| v.name == name) {
            return Term::Var(v.clone());
        }
        if let Some(sort) = self.ctx.get(name) {
            return Term::Var(Var::new(name, *sort));
        }
        self.pending.insert(name.to_string());
        Term::Var(Var::new(name, Sort::Real))
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat_kw("bot") {
            return Ok(Formula::Bot);
        }
        if self.eat_kw("top") {
            return Ok(Formula::Top);
        }
        if self.eat_kw("free") {
            return Ok(Formula::Free);
        }
        for (kw, build) in [("re", Formula::Re as fn(Term) -> Formula), ("cl", Formula::Cl)] {
            if self.is_kw(kw) && *self.peek_at(1) == Tok::LParen {
                self.bump();
                self.bump();
                let c = self.car_term()?;
                self.expect(Tok::RParen)?;
                return Ok(build(c));
            }
        }
        if *self.peek() == Tok::LParen {
            let save = (self.pos, self.pending.clone());
            if let Ok(f) = self.comparison() {
                return Ok(f);
            }
            (self.pos, self.pending) = save;
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        let op = self.peek().clone();
        match op {
            Tok::Eq | Tok::Neq => {
                self.bump();
                let rhs = self.term()?;
                Ok(if op == Tok::Eq {
                    Formula::Eq(lhs, rhs)
                } else {
                    Formula::Neq(lhs, rhs)
                })
            }
            Tok::Lt | Tok::Gt => {
                let build = match (&lhs, &op) {
                    (Term::Length, Tok::Lt) => Formula::LengthLt,
                    (Term::Length, Tok::Gt) => Formula::LengthGt,
                    (Term::Width, Tok::Lt) => Formula::WidthLt,
                    (Term::Width, Tok::Gt) => Formula::WidthGt,
                    _ => return self.error("`<` and `>` compare only `l` or `w` against a term"),
                };
                self.bump();
                Ok(build(self.term()?))
            }
            other => self.error(format!("expected a formula, found {}", other.describe())),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.term_primary()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            t = Term::plus(t, self.term_primary()?);
        }
        Ok(t)
    }

    fn term_primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "l" => {
                self.bump();
                Ok(Term::Length)
            }
            Tok::Ident(s) if s == "w" => {
                self.bump();
                Ok(Term::Width)
            }
            Tok::Ident(s) if s == "ego" => {
                self.bump();
                Ok(Term::Ego)
            }
            Tok::Ident(_) => {
                let name = self.var_name()?;
                Ok(self.resolve(&name))
            }
            Tok::Num(s) => {
                let q = rational::parse(&s).or_else(|_| self.error(format!("bad number `{s}`")))?;
                self.bump();
                Ok(Term::RealConst(q))
            }
            Tok::LaneLit(n) => {
                self.bump();
                Ok(Term::LaneConst(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => self.error(format!("expected a term, found {}", other.describe())),
        }
    }
}

/// Parses a formula whose free variables are all inferred from usage.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    parse_formula_in(text, &SortContext::new())
}

/// Parses a formula; free variables named in `ctx` get the given sorts,
/// others are inferred (car when used as a car, otherwise from the sort of
/// the compared term, real by default).
pub fn parse_formula_in(text: &str, ctx: &SortContext) -> Result<Formula, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        ctx,
        scope: vec![],
        pending: BTreeSet::new(),
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        let found = p.peek().describe();
        return p.error(format!("unexpected {found} after the formula"));
    }
    let f = infer::run(f, &p.pending);
    f.check_sorts()?;
    Ok(f)
}

/// Parses a single term in a sort context.
pub fn parse_term_in(text: &str, ctx: &SortContext) -> Result<Term, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        ctx,
        scope: vec![],
        pending: BTreeSet::new(),
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        let found = p.peek().describe();
        return p.error(format!("unexpected {found} after the term"));
    }
    t.check_sorts()?;
    Ok(t)
}

mod infer {
    use std::collections::{BTreeMap, BTreeSet};

    use super::super::{Formula, Sort, Term};

    struct State<'a> {
        pending: &'a BTreeSet<String>,
        known: BTreeMap<String, Sort>,
        changed: bool,
    }

    impl State<'_> {
        fn is_pending(&self, name: &str, bound: &[String]) -> bool {
            self.pending.contains(name) && !bound.iter().any(|b| b == name)
        }

        fn assign(&mut self, name: &str, sort: Sort) {
            if !self.known.contains_key(name) {
                self.known.insert(name.to_string(), sort);
                self.changed = true;
            }
        }

        /// Sort of `t` if determined; integer literals are undetermined.
        fn sort_of(&self, t: &Term, bound: &[String]) -> Option<Sort> {
            match t {
                Term::LaneConst(_) => Some(Sort::Lane),
                Term::RealConst(q) => (!q.is_integer()).then_some(Sort::Real),
                Term::Length | Term::Width => Some(Sort::Real),
                Term::Ego => Some(Sort::Car),
                Term::Var(v) if self.is_pending(&v.name, bound) => self.known.get(&v.name).copied(),
                Term::Var(v) => Some(v.sort),
                Term::Plus(a, b) => self.sort_of(a, bound).or_else(|| self.sort_of(b, bound)),
            }
        }

        fn push_down(&mut self, t: &Term, sort: Sort, bound: &[String]) {
            match t {
                Term::Var(v) if self.is_pending(&v.name, bound) => self.assign(&v.name, sort),
                Term::Plus(a, b) => {
                    self.push_down(a, sort, bound);
                    self.push_down(b, sort, bound);
                }
                _ => {}
            }
        }

        fn term(&mut self, t: &Term, bound: &[String]) {
            if let Term::Plus(a, b) = t {
                if let Some(s) = self.sort_of(t, bound) {
                    self.push_down(t, s, bound);
                }
                self.term(a, bound);
                self.term(b, bound);
            }
        }

        fn walk(&mut self, f: &Formula, bound: &mut Vec<String>) {
            use Formula::*;
            match f {
                Eq(a, b) | Neq(a, b) => {
                    self.term(a, bound);
                    self.term(b, bound);
                    let s = self.sort_of(a, bound).or_else(|| self.sort_of(b, bound));
                    if let Some(s) = s {
                        self.push_down(a, s, bound);
                        self.push_down(b, s, bound);
                    }
                }
                Re(c) | Cl(c) => self.push_down(c, Sort::Car, bound),
                BoxM(m, _) | DiamondM(m, _) => {
                    if let Some(c) = m.car() {
                        self.push_down(c, Sort::Car, bound);
                    }
                }
                LengthLt(t) | LengthGt(t) | WidthLt(t) | WidthGt(t) | Restrict(_, t) => {
                    self.term(t, bound);
                    self.push_down(t, Sort::Real, bound);
                }
                _ => {}
            }
            if let Forall(v, body) | Exists(v, body) = f {
                bound.push(v.name.clone());
                self.walk(body, bound);
                bound.pop();
            } else {
                for c in f.children() {
                    self.walk(c, bound);
                }
            }
        }
    }

    fn set_term(t: &Term, known: &BTreeMap<String, Sort>, pending: &BTreeSet<String>, bound: &[String]) -> Term {
        match t {
            Term::Var(v) if pending.contains(&v.name) && !bound.contains(&v.name) => {
                let mut v = v.clone();
                v.sort = known.get(&v.name).copied().unwrap_or(Sort::Real);
                Term::Var(v)
            }
            Term::Plus(a, b) => Term::plus(set_term(a, known, pending, bound), set_term(b, known, pending, bound)),
            other => other.clone(),
        }
    }

    /// Rewrites natural literals to lane constants where the context is a lane term.
    fn coerce(t: Term, sort: Sort) -> Term {
        match t {
            Term::RealConst(q) if sort == Sort::Lane && crate::rational::is_natural(&q) => {
                match u32::try_from(q.numer()) {
                    Ok(n) => Term::LaneConst(n),
                    Err(_) => Term::RealConst(q),
                }
            }
            Term::Plus(a, b) => Term::plus(coerce(*a, sort), coerce(*b, sort)),
            other => other,
        }
    }

    fn determined(t: &Term) -> Option<Sort> {
        match t {
            Term::RealConst(_) => None,
            Term::Plus(a, b) => determined(a).or_else(|| determined(b)),
            other => Some(other.sort()),
        }
    }

    fn rebuild(f: &Formula, known: &BTreeMap<String, Sort>, pending: &BTreeSet<String>, bound: &mut Vec<String>) -> Formula {
        use Formula::*;
        let st = |t: &Term, bound: &Vec<String>| set_term(t, known, pending, bound);
        let sub = |g: &Formula, bound: &mut Vec<String>| Box::new(rebuild(g, known, pending, bound));
        match f {
            Eq(a, b) | Neq(a, b) => {
                let (a, b) = (st(a, bound), st(b, bound));
                let s = determined(&a).or_else(|| determined(&b)).unwrap_or(Sort::Real);
                let (a, b) = (coerce(a, s), coerce(b, s));
                if matches!(f, Eq(..)) {
                    Eq(a, b)
                } else {
                    Neq(a, b)
                }
            }
            Re(c) => Re(st(c, bound)),
            Cl(c) => Cl(st(c, bound)),
            LengthLt(t) => LengthLt(st(t, bound)),
            LengthGt(t) => LengthGt(st(t, bound)),
            WidthLt(t) => WidthLt(st(t, bound)),
            WidthGt(t) => WidthGt(st(t, bound)),
            Restrict(a, t) => Restrict(sub(a, bound), st(t, bound)),
            BoxM(m, a) => BoxM(m.map_car(|c| st(c, bound)), sub(a, bound)),
            DiamondM(m, a) => DiamondM(m.map_car(|c| st(c, bound)), sub(a, bound)),
            Forall(v, a) | Exists(v, a) => {
                bound.push(v.name.clone());
                let body = sub(a, bound);
                bound.pop();
                if matches!(f, Forall(..)) {
                    Forall(v.clone(), body)
                } else {
                    Exists(v.clone(), body)
                }
            }
            Implies(a, b) => Implies(sub(a, bound), sub(b, bound)),
            And(a, b) => And(sub(a, bound), sub(b, bound)),
            Or(a, b) => Or(sub(a, bound), sub(b, bound)),
            Iff(a, b) => Iff(sub(a, bound), sub(b, bound)),
            ChopH(a, b) => ChopH(sub(a, bound), sub(b, bound)),
            ChopV { lower, upper } => ChopV {
                lower: sub(lower, bound),
                upper: sub(upper, bound),
            },
            Not(a) => Not(sub(a, bound)),
            Somewhere(a) => Somewhere(sub(a, bound)),
            Everywhere(a) => Everywhere(sub(a, bound)),
            DiamondL(a) => DiamondL(sub(a, bound)),
            BoxL(a) => BoxL(sub(a, bound)),
            Bot | Top | Free => f.clone(),
        }
    }

    pub(super) fn run(f: Formula, pending: &BTreeSet<String>) -> Formula {
        let mut st = State {
            pending,
            known: BTreeMap::new(),
            changed: true,
        };
        while st.changed {
            st.changed = false;
            st.walk(&f, &mut vec![]);
        }
        rebuild(&f, &st.known, pending, &mut vec![])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn atoms() {
        assert_eq!(p("re(ego)"), Formula::Re(Term::Ego));
        assert_eq!(p("cl(c)"), Formula::Cl(Term::Var(Var::car("c"))));
        assert_eq!(p("l = 5"), Formula::Eq(Term::Length, Term::int(5)));
        assert_eq!(p("l = 3.5"), Formula::Eq(Term::Length, Term::real(ratio(7, 2))));
        assert_eq!(p("w = -1/2"), Formula::Eq(Term::Width, Term::real(ratio(-1, 2))));
        assert_eq!(p("l = w"), Formula::Eq(Term::Length, Term::Width));
        assert_eq!(p("l < 3"), Formula::LengthLt(Term::int(3)));
    }

    #[test]
    fn precedence() {
        let re = |c: &str| Formula::Re(Term::Var(Var::car(c)));
        assert_eq!(p("re(a) ~ re(b) || re(c)"), Formula::vchop(Formula::hchop(re("a"), re("b")), re("c")));
        assert_eq!(p("re(a) and re(b) || re(c)"), Formula::and(re("a"), Formula::vchop(re("b"), re("c"))));
        assert_eq!(
            p("re(a) -> re(b) -> re(c)"),
            Formula::implies(re("a"), Formula::implies(re("b"), re("c")))
        );
        assert_eq!(p("re(a) ~ re(b) ~ re(c)"), Formula::hchop(Formula::hchop(re("a"), re("b")), re("c")));
        assert_eq!(p("not re(a) ^ 2"), Formula::restrict(Formula::not(re("a")), Term::int(2)));
        assert_eq!(
            p("forall c:car. re(c) ~ top"),
            Formula::forall(Var::car("c"), Formula::hchop(re("c"), Formula::Top))
        );
    }

    #[test]
    fn parenthesised_terms_and_formulas() {
        assert_eq!(
            p("(l + 1) = 3"),
            Formula::Eq(Term::plus(Term::Length, Term::int(1)), Term::int(3))
        );
        assert_eq!(p("(l = 1) ~ top"), Formula::hchop(Formula::length_is(Term::int(1)), Formula::Top));
    }

    #[test]
    fn modalities() {
        let c = Term::Var(Var::car("c"));
        assert_eq!(p("[r(c)] re(c)"), Formula::boxm(Modality::Reserve(c.clone()), Formula::Re(c.clone())));
        assert_eq!(p("<tau> top"), Formula::diamond(Modality::Tau, Formula::Top));
        assert_eq!(p("<l> free"), Formula::diamond_l(Formula::Free));
        assert_eq!(p("[l] free"), Formula::box_l(Formula::Free));
        assert_eq!(p("[wd_r(ego)] bot"), Formula::boxm(Modality::WithdrawReserve(Term::Ego), Formula::Bot));
    }

    #[test]
    fn sort_inference() {
        let f = p("x = #2");
        assert_eq!(f, Formula::Eq(Term::Var(Var::lane("x")), Term::LaneConst(2)));
        let g = p("exists n:lane. n = 2");
        assert_eq!(
            g,
            Formula::exists(Var::lane("n"), Formula::Eq(Term::Var(Var::lane("n")), Term::LaneConst(2)))
        );
        assert_eq!(p("x = y"), Formula::Eq(Term::Var(Var::real("x")), Term::Var(Var::real("y"))));
        assert_eq!(p("re(c) and c = d"), {
            let c = Term::Var(Var::car("c"));
            Formula::and(Formula::Re(c.clone()), Formula::Eq(c, Term::Var(Var::car("d"))))
        });
        let ctx: SortContext = [("x".to_string(), Sort::Lane)].into_iter().collect();
        assert_eq!(
            parse_formula_in("x = y", &ctx).unwrap(),
            Formula::Eq(Term::Var(Var::lane("x")), Term::Var(Var::lane("y")))
        );
    }

    #[test]
    fn sort_errors() {
        assert!(matches!(parse_formula("ego + 1 = l"), Err(SyntaxError::Sort(_))));
        assert!(matches!(parse_formula("ego = l"), Err(SyntaxError::Sort(_))));
        assert!(matches!(parse_formula("forall x:real. re(x)"), Err(SyntaxError::Sort(_))));
        assert!(matches!(parse_formula("#1 = 1/2"), Err(SyntaxError::Sort(_))));
    }

    #[test]
    fn parse_errors_have_positions() {
        match parse_formula("re(c) ~\n  ~ top") {
            Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("re(c) re(d)").is_err());
        assert!(parse_formula("x < 1").is_err());
        assert!(parse_formula("a <-> b <-> c").is_err());
        assert!(parse_formula("forall x:int. top").is_err());
    }

    #[test]
    fn terms() {
        let ctx = SortContext::new();
        assert_eq!(parse_term_in("3/4", &ctx).unwrap(), Term::real(ratio(3, 4)));
        assert_eq!(parse_term_in("l + 1 + w", &ctx).unwrap(), Term::plus(Term::plus(Term::Length, Term::RealConst(int(1))), Term::Width));
    }
}
