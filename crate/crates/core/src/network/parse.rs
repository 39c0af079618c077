//! Line-oriented reader for the network input language.
//!
//! ```text
//! [constants]
//! kappa = 1.0
//! T_env = 1.0
//! energy_mode = isolated        # or isothermal
//!
//! [species]
//! X1 { z = 1, p = 1.5, e = 0 }
//!
//! [reactions]
//! X1 + X2 <-> X3 { kf = 2, kb = 1, gas = (0, 0, 0) }
//! X3 -> X1 + X2  { k = 1, gas = (0, 0, 0) }
//! @in X1  { k = 0.5 }
//! @out X1 { k = 0.5 }
//! @heat   { k = 1 }
//! ```

use std::collections::HashMap;

use super::{Activation, Complex, EnergyMode, NetworkSpec, Reaction, ReactionKind};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::thermo::{SpeciesThermo, ThermoConstants, ThermoModel};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64, String),
    Plus,
    Arrow,
    BiArrow,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Eq,
    At,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(_, s) => format!("number `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::BiArrow => "`<->`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::At => "`@`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
            || ((c == '-' || c == '+')
                && chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_digit() || *d == '.')
                && !matches!(out.last(), Some(Spanned { tok: Tok::Ident(_) | Tok::Number(..) | Tok::RParen, .. })));
        if starts_number {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                let exp = (d == 'e' || d == 'E')
                    && chars
                        .get(i + 1)
                        .is_some_and(|n| n.is_ascii_digit() || *n == '-' || *n == '+');
                if d.is_ascii_digit() || d == '.' || exp || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| syntax(line_no, col, format!("malformed number `{s}`")))?;
            out.push(Spanned {
                tok: Tok::Number(v, s),
                col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        let (tok, len) = match c {
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => (Tok::BiArrow, 3),
            '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
            '+' => (Tok::Plus, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '=' => (Tok::Eq, 1),
            '@' => (Tok::At, 1),
            other => return Err(syntax(line_no, col, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, col });
        i += len;
    }
    Ok(out)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [Spanned],
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        syntax(self.line, self.col(), msg)
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of line")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Number(v, _)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn finish(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Triple([f64; 3]),
}

/// `{ key = value, ... }`
fn attributes(cur: &mut Cursor) -> Result<Vec<(String, Value, usize)>> {
    cur.expect(Tok::LBrace, "`{`")?;
    let mut out = Vec::new();
    loop {
        if cur.peek() == Some(&Tok::RBrace) {
            cur.next();
            break;
        }
        let col = cur.col();
        let key = cur.ident()?;
        cur.expect(Tok::Eq, "`=`")?;
        let value = match cur.peek() {
            Some(Tok::LParen) => {
                cur.next();
                let a = cur.number()?;
                cur.expect(Tok::Comma, "`,`")?;
                let b = cur.number()?;
                cur.expect(Tok::Comma, "`,`")?;
                let c = cur.number()?;
                cur.expect(Tok::RParen, "`)`")?;
                Value::Triple([a, b, c])
            }
            _ => Value::Number(cur.number()?),
        };
        if out.iter().any(|(k, _, _)| *k == key) {
            return Err(syntax(cur.line, col, format!("duplicate attribute `{key}`")));
        }
        out.push((key, value, col));
        match cur.peek() {
            Some(Tok::Comma) => {
                cur.next();
            }
            Some(Tok::RBrace) => {}
            _ => return Err(cur.unexpected("`,` or `}`")),
        }
    }
    cur.finish()?;
    Ok(out)
}

struct Attrs {
    line: usize,
    items: Vec<(String, Value, usize)>,
}

impl Attrs {
    fn take(&mut self, key: &str) -> Option<(Value, usize)> {
        let i = self.items.iter().position(|(k, _, _)| k == key)?;
        let (_, v, c) = self.items.remove(i);
        Some((v, c))
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.take(key) {
            Some((Value::Number(v), _)) => {
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonpositiveParameter {
                        line: self.line,
                        name: key.to_string(),
                        value: v,
                    })
                }
            }
            Some((_, col)) => Err(syntax(self.line, col, format!("`{key}` expects a number"))),
            None => default.ok_or_else(|| syntax(self.line, 1, format!("missing attribute `{key}`"))),
        }
    }

    fn nonnegative(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some((Value::Number(v), _)) if v >= 0.0 && v.is_finite() => Ok(v),
            Some((Value::Number(v), _)) => Err(Error::NonpositiveParameter {
                line: self.line,
                name: key.to_string(),
                value: v,
            }),
            Some((_, col)) => Err(syntax(self.line, col, format!("`{key}` expects a number"))),
            None => Ok(default),
        }
    }

    fn triple(&mut self, key: &str) -> Result<[f64; 3]> {
        match self.take(key) {
            Some((Value::Triple(t), _)) => Ok(t),
            Some((_, col)) => Err(syntax(self.line, col, format!("`{key}` expects (a, b, c)"))),
            None => Ok([0.0; 3]),
        }
    }

    fn done(self) -> Result<()> {
        match self.items.first() {
            Some((k, _, col)) => Err(syntax(self.line, *col, format!("unknown attribute `{k}`"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Constants,
    Species,
    Reactions,
}

enum RawReaction {
    Reversible {
        lhs: Complex,
        rhs: Complex,
        kf: f64,
        kb: f64,
        gas: [f64; 3],
    },
    Forward {
        line: usize,
        lhs: Complex,
        rhs: Complex,
        k: f64,
        gas: [f64; 3],
    },
    In { line: usize, species: usize, k: f64 },
    Out { line: usize, species: usize, k: f64 },
    Heat { k: f64 },
}

/// A raw reaction line whose species names are resolved later, once the
/// `[species]` section is known.
struct Pending {
    line: usize,
    toks: Vec<Spanned>,
    end_col: usize,
}

fn complex(cur: &mut Cursor, index: &HashMap<String, usize>) -> Result<Complex> {
    if let Some(Tok::Number(v, s)) = cur.peek() {
        if *v == 0.0 && s == "0" {
            cur.next();
            return Ok(Complex::zero());
        }
    }
    let mut terms = Vec::new();
    loop {
        let coef = match cur.peek() {
            Some(Tok::Number(v, s)) => {
                let (v, s) = (*v, s.clone());
                if v < 1.0 || v.fract() != 0.0 || s.contains(['.', 'e', 'E', '-', '+']) {
                    return Err(cur.error(format!("stoichiometric coefficient must be a positive integer, got `{s}`")));
                }
                cur.next();
                v as u32
            }
            _ => 1,
        };
        let name = cur.ident()?;
        let &s = index.get(&name).ok_or(Error::UnknownSpecies {
            line: cur.line,
            name: name.clone(),
        })?;
        terms.push((s, coef));
        if cur.peek() == Some(&Tok::Plus) {
            cur.next();
            if !matches!(cur.peek(), Some(Tok::Ident(_) | Tok::Number(..))) {
                return Err(cur.unexpected("a species term"));
            }
        } else {
            break;
        }
    }
    Ok(Complex::from_terms(terms))
}

fn reaction_line(p: &Pending, index: &HashMap<String, usize>) -> Result<RawReaction> {
    let mut cur = Cursor {
        line: p.line,
        toks: &p.toks,
        pos: 0,
        end_col: p.end_col,
    };
    if cur.peek() == Some(&Tok::At) {
        cur.next();
        let col = cur.col();
        let word = cur.ident()?;
        match word.as_str() {
            "in" | "out" => {
                let name = cur.ident()?;
                let &species = index.get(&name).ok_or(Error::UnknownSpecies {
                    line: p.line,
                    name,
                })?;
                let mut a = Attrs {
                    line: p.line,
                    items: attributes(&mut cur)?,
                };
                let k = a.positive("k", None)?;
                a.done()?;
                Ok(if word == "in" {
                    RawReaction::In { line: p.line, species, k }
                } else {
                    RawReaction::Out { line: p.line, species, k }
                })
            }
            "heat" => {
                let mut a = Attrs {
                    line: p.line,
                    items: attributes(&mut cur)?,
                };
                let k = a.positive("k", None)?;
                a.done()?;
                Ok(RawReaction::Heat { k })
            }
            other => Err(syntax(p.line, col, format!("unknown directive `@{other}`"))),
        }
    } else {
        let lhs_col = cur.col();
        let lhs = complex(&mut cur, index)?;
        let arrow = match cur.peek() {
            Some(Tok::Arrow) => false,
            Some(Tok::BiArrow) => true,
            _ => return Err(cur.unexpected("`->` or `<->`")),
        };
        cur.next();
        let rhs = complex(&mut cur, index)?;
        if lhs.is_zero() || rhs.is_zero() {
            return Err(syntax(
                p.line,
                lhs_col,
                "chemical reactions need nonzero complexes on both sides; use @in/@out/@heat for boundary exchange",
            ));
        }
        if lhs == rhs {
            return Err(syntax(p.line, lhs_col, "substrate and product complexes coincide"));
        }
        let mut a = Attrs {
            line: p.line,
            items: attributes(&mut cur)?,
        };
        let gas = a.triple("gas")?;
        let r = if arrow {
            let kf = a.positive("kf", None)?;
            let kb = a.positive("kb", None)?;
            RawReaction::Reversible {
                lhs,
                rhs,
                kf,
                kb,
                gas,
            }
        } else {
            let k = a.positive("k", None)?;
            RawReaction::Forward {
                line: p.line,
                lhs,
                rhs,
                k,
                gas,
            }
        };
        a.done()?;
        Ok(r)
    }
}

/// Parses the document and checks syntax, names, parameters and pairing, but
/// reports Condition 3 and Condition 5 violations through
/// [`validate_conditions`](super::validate_conditions) rather than failing.
pub fn parse_document<R: Real>(text: &str) -> Result<NetworkSpec<R>> {
    let mut section = Section::None;
    let mut kappa = 1.0;
    let mut t_env: Option<f64> = None;
    let mut mode = EnergyMode::Isolated;
    let mut reversible = false;
    let mut species: Vec<SpeciesThermo<R>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut pending: Vec<Pending> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        // section header: `[` is not a token, detect on the raw text
        let trimmed = raw.trim();
        if trimmed.starts_with('[') {
            let body = trimmed.split('#').next().unwrap_or("").trim();
            section = match body {
                "[constants]" => Section::Constants,
                "[species]" => Section::Species,
                "[reactions]" => Section::Reactions,
                _ => {
                    let col = raw.find('[').unwrap_or(0) + 1;
                    return Err(syntax(line, col, format!("unknown section `{body}`")));
                }
            };
            continue;
        }
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let end_col = raw.chars().count() + 1;
        let mut cur = Cursor {
            line,
            toks: &toks,
            pos: 0,
            end_col,
        };
        match section {
            Section::None => return Err(syntax(line, toks[0].col, "content before the first section header")),
            Section::Constants => {
                while !cur.at_end() {
                    let col = cur.col();
                    let key = cur.ident()?;
                    cur.expect(Tok::Eq, "`=`")?;
                    match key.as_str() {
                        "kappa" => {
                            kappa = cur.number()?;
                            if !(kappa > 0.0) {
                                return Err(Error::NonpositiveParameter {
                                    line,
                                    name: key,
                                    value: kappa,
                                });
                            }
                        }
                        "T_env" => {
                            let t = cur.number()?;
                            if !(t > 0.0) {
                                return Err(Error::NonpositiveParameter {
                                    line,
                                    name: key,
                                    value: t,
                                });
                            }
                            t_env = Some(t);
                        }
                        "energy_mode" => {
                            let vcol = cur.col();
                            mode = match cur.ident()?.as_str() {
                                "isolated" => EnergyMode::Isolated,
                                "isothermal" => EnergyMode::Isothermal,
                                other => {
                                    return Err(syntax(
                                        line,
                                        vcol,
                                        format!("energy_mode must be isolated or isothermal, got `{other}`"),
                                    ))
                                }
                            };
                        }
                        "reversible" => {
                            let vcol = cur.col();
                            reversible = match cur.ident()?.as_str() {
                                "true" => true,
                                "false" => false,
                                other => {
                                    return Err(syntax(line, vcol, format!("expected true or false, got `{other}`")))
                                }
                            };
                        }
                        _ => return Err(syntax(line, col, format!("unknown constant `{key}`"))),
                    }
                    if cur.peek() == Some(&Tok::Comma) {
                        cur.next();
                    }
                }
            }
            Section::Species => {
                let col = cur.col();
                let name = cur.ident()?;
                let mut a = Attrs {
                    line,
                    items: attributes(&mut cur)?,
                };
                let z = a.positive("z", Some(1.0))?;
                let p = a.positive("p", None)?;
                let e = a.nonnegative("e", 0.0)?;
                a.done()?;
                if index.contains_key(&name) {
                    return Err(syntax(line, col, format!("species `{name}` declared twice")));
                }
                index.insert(name.clone(), species.len());
                species.push(SpeciesThermo::new(name, R::lit(z), R::lit(p), R::lit(e))?);
            }
            Section::Reactions => pending.push(Pending { line, toks, end_col }),
        }
    }

    let raws: Vec<RawReaction> = pending
        .iter()
        .map(|p| reaction_line(p, &index))
        .collect::<Result<_>>()?;

    let needs_bath = mode == EnergyMode::Isothermal
        || raws
            .iter()
            .any(|r| matches!(r, RawReaction::In { .. } | RawReaction::Out { .. } | RawReaction::Heat { .. }));
    if needs_bath && t_env.is_none() {
        let why = if mode == EnergyMode::Isothermal {
            "isothermal energy mode"
        } else {
            "boundary fluxes or heat exchange present"
        };
        return Err(Error::TEnvRequired(why.to_string()));
    }

    let constants = ThermoConstants::new(R::lit(kappa))?;
    let kr = constants.kappa;
    let thermo = ThermoModel::new(constants, species);
    let gas = |g: [f64; 3]| Activation::new(R::lit(g[0]), R::lit(g[1]), R::lit(g[2]));

    let mut reactions: Vec<Reaction<R>> = Vec::new();
    let mut forward_lines: Vec<(usize, usize)> = Vec::new(); // (reaction index, line)
    let mut inflow: HashMap<usize, usize> = HashMap::new();
    let mut outflow: HashMap<usize, usize> = HashMap::new();
    for raw in raws {
        match raw {
            RawReaction::Reversible {
                lhs, rhs, kf, kb, gas: g, ..
            } => {
                let j = reactions.len();
                reactions.push(Reaction {
                    kind: ReactionKind::Chemical,
                    substrate: lhs.clone(),
                    product: rhs.clone(),
                    k: R::lit(kf),
                    gas: gas(g),
                    pair: Some(j + 1),
                });
                reactions.push(Reaction {
                    kind: ReactionKind::Chemical,
                    substrate: rhs,
                    product: lhs,
                    k: R::lit(kb),
                    gas: gas(g),
                    pair: Some(j),
                });
            }
            RawReaction::Forward {
                line, lhs, rhs, k, gas: g,
            } => {
                forward_lines.push((reactions.len(), line));
                reactions.push(Reaction {
                    kind: ReactionKind::Chemical,
                    substrate: lhs,
                    product: rhs,
                    k: R::lit(k),
                    gas: gas(g),
                    pair: None,
                });
            }
            RawReaction::In { line, species: i, k } => {
                if inflow.insert(i, reactions.len()).is_some() {
                    return Err(syntax(line, 1, format!("second @in for `{}`", thermo.species[i].name)));
                }
                reactions.push(Reaction {
                    kind: ReactionKind::Inflow,
                    substrate: Complex::zero(),
                    product: Complex::single(i),
                    k: R::lit(k),
                    gas: Activation::flux(kr),
                    pair: None,
                });
            }
            RawReaction::Out { line, species: i, k } => {
                if outflow.insert(i, reactions.len()).is_some() {
                    return Err(syntax(line, 1, format!("second @out for `{}`", thermo.species[i].name)));
                }
                reactions.push(Reaction {
                    kind: ReactionKind::Outflow,
                    substrate: Complex::single(i),
                    product: Complex::zero(),
                    k: R::lit(k),
                    gas: Activation::outflow(kr, &thermo.species[i]),
                    pair: None,
                });
            }
            RawReaction::Heat { k } => {
                let j = reactions.len();
                reactions.push(Reaction {
                    kind: ReactionKind::HeatExchange,
                    substrate: Complex::zero(),
                    product: Complex::zero(),
                    k: R::lit(k),
                    gas: Activation::flux(kr),
                    pair: Some(j),
                });
            }
        }
    }

    // one-way lines that are exact reverses of each other form a pair
    for a in 0..forward_lines.len() {
        let (ja, _) = forward_lines[a];
        if reactions[ja].pair.is_some() {
            continue;
        }
        for &(jb, _) in &forward_lines[a + 1..] {
            if reactions[jb].pair.is_none()
                && reactions[jb].substrate == reactions[ja].product
                && reactions[jb].product == reactions[ja].substrate
            {
                reactions[ja].pair = Some(jb);
                reactions[jb].pair = Some(ja);
                break;
            }
        }
    }
    for (&i, &jin) in &inflow {
        if let Some(&jout) = outflow.get(&i) {
            reactions[jin].pair = Some(jout);
            reactions[jout].pair = Some(jin);
        }
    }

    if reversible {
        if let Some(j) = reactions.iter().position(|r| r.pair.is_none()) {
            let r = &reactions[j];
            let what = match r.kind {
                ReactionKind::Inflow => format!("@in {} has no matching @out", thermo.species[r.product.as_single().unwrap()].name),
                ReactionKind::Outflow => format!("@out {} has no matching @in", thermo.species[r.substrate.as_single().unwrap()].name),
                _ => {
                    let line = forward_lines.iter().find(|(jj, _)| *jj == j).map_or(0, |x| x.1);
                    format!(
                        "line {line}: `{} -> {}` has no reverse reaction",
                        r.substrate.render(&thermo.species),
                        r.product.render(&thermo.species)
                    )
                }
            };
            return Err(Error::Unpaired(what));
        }
    }

    Ok(NetworkSpec::assemble(
        thermo,
        t_env.map(R::lit),
        mode,
        reversible,
        reactions,
    ))
}

/// Parses a network and rejects any violation of Conditions 3 and 5.
pub fn parse_network<R: Real>(text: &str) -> Result<NetworkSpec<R>> {
    let spec = parse_document(text)?;
    let report = super::validate_conditions(&spec);
    if let Some(c) = report.conditions.iter().find(|c| !c.passed) {
        return Err(Error::Condition {
            condition: c.condition,
            detail: c.detail.clone(),
        });
    }
    Ok(spec)
}
