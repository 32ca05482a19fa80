//! Structure-only reader for the textual BIF network format.
//!
//! Recognized blocks are `network`, `variable` (with a
//! `type discrete [k] { ... }` declaration) and `probability ( child | parents )`.
//! Table entries must be numeric but are otherwise discarded; `property`
//! statements are skipped. Every variable becomes one binary node.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::CausalDag;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BifVariable {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BifNetwork {
    pub name: String,
    /// Declaration order.
    pub variables: Vec<BifVariable>,
    /// Parents of each variable, indexed like `variables`, in the order
    /// the probability block lists them.
    pub parents: Vec<Vec<String>>,
}

impl BifNetwork {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn parents_of(&self, name: &str) -> Option<&[String]> {
        let i = self.variables.iter().position(|v| v.name == name)?;
        Some(&self.parents[i])
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Writes the structural content back as BIF. Tables are uniform.
    pub fn to_bif_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "network {} {{\n}}", quote(&self.name));
        for v in &self.variables {
            let _ = writeln!(
                out,
                "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}",
                quote(&v.name),
                v.states.len(),
                v.states.iter().map(|s| quote(s)).collect::<Vec<_>>().join(", ")
            );
        }
        let k_of: HashMap<&str, usize> = self
            .variables
            .iter()
            .map(|v| (v.name.as_str(), v.states.len()))
            .collect();
        for (v, parents) in self.variables.iter().zip(&self.parents) {
            let k = v.states.len();
            let cells = k * parents.iter().map(|p| k_of[p.as_str()]).product::<usize>();
            let entry = format!("{}", 1.0 / k as f64);
            let table = vec![entry; cells].join(", ");
            if parents.is_empty() {
                let _ = writeln!(out, "probability ( {} ) {{\n  table {table};\n}}", quote(&v.name));
            } else {
                let _ = writeln!(
                    out,
                    "probability ( {} | {} ) {{\n  table {table};\n}}",
                    quote(&v.name),
                    parents.iter().map(|p| quote(p)).collect::<Vec<_>>().join(", ")
                );
            }
        }
        out
    }
}

fn quote(name: &str) -> String {
    let bare = !name.is_empty()
        && !name.contains(|c: char| c.is_whitespace() || PUNCT.contains(&c) || c == '"')
        && !name.contains("//")
        && !name.contains("/*");
    if bare {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Bif {
        line,
        column,
        message: message.into(),
    }
}

const PUNCT: &[char] = &['{', '}', '(', ')', '[', ']', '|', ',', ';'];

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            loop {
                if i >= chars.len() {
                    return Err(err(l0, c0, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    break;
                }
                advance(&mut i, &mut line, &mut col);
            }
        } else if c == '"' {
            advance(&mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(err(l0, c0, "unterminated string")),
                    Some('"') => break,
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            advance(&mut i, &mut line, &mut col);
            tokens.push(Token {
                tok: Tok::Str(s),
                line: l0,
                column: c0,
            });
        } else if PUNCT.contains(&c) {
            advance(&mut i, &mut line, &mut col);
            tokens.push(Token {
                tok: Tok::Punct(c),
                line: l0,
                column: c0,
            });
        } else {
            let mut s = String::new();
            while i < chars.len() {
                let ch = chars[i];
                if ch.is_whitespace() || PUNCT.contains(&ch) || ch == '"' {
                    break;
                }
                if ch == '/' && matches!(chars.get(i + 1), Some('/') | Some('*')) {
                    break;
                }
                s.push(ch);
                advance(&mut i, &mut line, &mut col);
            }
            tokens.push(Token {
                tok: Tok::Word(s),
                line: l0,
                column: c0,
            });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, context: &str) -> Result<Token> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| {
            err(self.end.0, self.end.1, format!("unexpected end of input in {context}"))
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, c: char, context: &str) -> Result<Token> {
        let t = self.next(context)?;
        if t.tok == Tok::Punct(c) {
            Ok(t)
        } else {
            Err(err(t.line, t.column, format!("expected '{c}' in {context}, found {}", describe(&t.tok))))
        }
    }

    fn name(&mut self, context: &str) -> Result<(String, Token)> {
        let t = self.next(context)?;
        match &t.tok {
            Tok::Word(s) | Tok::Str(s) => Ok((s.clone(), t)),
            other => Err(err(t.line, t.column, format!("expected a name in {context}, found {}", describe(other)))),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().is_some_and(|t| t.tok == Tok::Punct(c))
    }

    /// Consumes tokens through the next `;` at the current nesting depth.
    fn skip_statement(&mut self, open: &Token) -> Result<()> {
        loop {
            let t = self.tokens.get(self.pos).ok_or_else(|| {
                err(open.line, open.column, "unbalanced braces: block is never closed")
            })?;
            match t.tok {
                Tok::Punct(';') => {
                    self.pos += 1;
                    return Ok(());
                }
                Tok::Punct('}') => return Err(err(t.line, t.column, "expected ';' before '}'")),
                _ => self.pos += 1,
            }
        }
    }

    /// Consumes a comma-separated list of numbers through the next `;`.
    fn numbers_until_semicolon(&mut self, open: &Token) -> Result<()> {
        loop {
            let t = self.tokens.get(self.pos).cloned().ok_or_else(|| {
                err(open.line, open.column, "unbalanced braces: block is never closed")
            })?;
            self.pos += 1;
            match &t.tok {
                Tok::Punct(';') => return Ok(()),
                Tok::Punct(',') => {}
                Tok::Word(w) if w.parse::<f64>().is_ok() => {}
                other => {
                    return Err(err(t.line, t.column, format!("expected a number, found {}", describe(other))))
                }
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("'{w}'"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Punct(c) => format!("'{c}'"),
    }
}

struct ProbabilityBlock {
    child: String,
    parents: Vec<(String, Token)>,
    at: Token,
}

pub fn parse_bif(text: &str) -> Result<BifNetwork> {
    let tokens = tokenize(text)?;
    let end = text.lines().enumerate().last().map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut p = Parser { tokens, pos: 0, end };
    let mut name = None;
    let mut variables: Vec<BifVariable> = Vec::new();
    let mut declared: HashMap<String, usize> = HashMap::new();
    let mut blocks: Vec<ProbabilityBlock> = Vec::new();

    while let Some(t) = p.peek().cloned() {
        p.pos += 1;
        let keyword = match &t.tok {
            Tok::Word(w) => w.as_str(),
            Tok::Punct('}') => return Err(err(t.line, t.column, "unbalanced braces: unexpected '}'")),
            other => return Err(err(t.line, t.column, format!("expected a keyword, found {}", describe(other)))),
        };
        match keyword {
            "network" => {
                let (n, _) = p.name("network header")?;
                name = Some(n);
                let open = p.expect('{', "network block")?;
                while !p.is_punct('}') {
                    let (w, wt) = p.name("network block").map_err(|e| close_error(e, &open))?;
                    if w != "property" {
                        return Err(err(wt.line, wt.column, format!("unknown keyword '{w}' in network block")));
                    }
                    p.skip_statement(&open)?;
                }
                p.pos += 1;
            }
            "variable" => {
                let (vname, vt) = p.name("variable header")?;
                let open = p.expect('{', "variable block")?;
                let mut states = None;
                while !p.is_punct('}') {
                    let (w, wt) = p.name("variable block").map_err(|e| close_error(e, &open))?;
                    match w.as_str() {
                        "property" => p.skip_statement(&open)?,
                        "type" => {
                            let (kind, kt) = p.name("type declaration")?;
                            if kind != "discrete" {
                                return Err(err(kt.line, kt.column, format!("unsupported variable type '{kind}'")));
                            }
                            p.expect('[', "type declaration")?;
                            let (k, ktok) = p.name("state count")?;
                            let k: usize = k
                                .parse()
                                .map_err(|_| err(ktok.line, ktok.column, format!("invalid state count '{k}'")))?;
                            p.expect(']', "type declaration")?;
                            p.expect('{', "state list")?;
                            let mut list = Vec::new();
                            loop {
                                let (s, _) = p.name("state list")?;
                                list.push(s);
                                if p.is_punct(',') {
                                    p.pos += 1;
                                } else {
                                    break;
                                }
                            }
                            let close = p.expect('}', "state list")?;
                            if list.len() != k {
                                return Err(err(
                                    close.line,
                                    close.column,
                                    format!("declared {k} states but listed {}", list.len()),
                                ));
                            }
                            p.expect(';', "type declaration")?;
                            states = Some(list);
                        }
                        other => {
                            return Err(err(wt.line, wt.column, format!("unknown keyword '{other}' in variable block")))
                        }
                    }
                }
                p.pos += 1;
                let states =
                    states.ok_or_else(|| err(vt.line, vt.column, format!("variable '{vname}' has no type")))?;
                if declared.insert(vname.clone(), variables.len()).is_some() {
                    return Err(err(vt.line, vt.column, format!("variable '{vname}' declared twice")));
                }
                variables.push(BifVariable { name: vname, states });
            }
            "probability" => {
                p.expect('(', "probability header")?;
                let (child, _) = p.name("probability header")?;
                let mut parents = Vec::new();
                if p.is_punct('|') {
                    p.pos += 1;
                    loop {
                        parents.push(p.name("parent list")?);
                        if p.is_punct(',') {
                            p.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                p.expect(')', "probability header")?;
                let open = p.expect('{', "probability block")?;
                while !p.is_punct('}') {
                    let t = p.next("probability block").map_err(|e| close_error(e, &open))?;
                    match &t.tok {
                        Tok::Word(w) if w == "table" || w == "default" => p.numbers_until_semicolon(&open)?,
                        Tok::Word(w) if w == "property" => p.skip_statement(&open)?,
                        Tok::Punct('(') => {
                            loop {
                                p.name("table row")?;
                                if p.is_punct(',') {
                                    p.pos += 1;
                                } else {
                                    break;
                                }
                            }
                            p.expect(')', "table row")?;
                            p.numbers_until_semicolon(&open)?;
                        }
                        Tok::Word(w) => {
                            return Err(err(t.line, t.column, format!("unknown keyword '{w}' in probability block")))
                        }
                        other => {
                            return Err(err(t.line, t.column, format!("unexpected {} in probability block", describe(other))))
                        }
                    }
                }
                p.pos += 1;
                blocks.push(ProbabilityBlock { child, parents, at: t });
            }
            other => return Err(err(t.line, t.column, format!("unknown keyword '{other}'"))),
        }
    }

    let mut parents = vec![Vec::new(); variables.len()];
    let mut seen = vec![None; variables.len()];
    for b in &blocks {
        let i = *declared
            .get(&b.child)
            .ok_or_else(|| err(b.at.line, b.at.column, format!("probability for undeclared variable '{}'", b.child)))?;
        if seen[i].is_some() {
            return Err(err(b.at.line, b.at.column, format!("second probability block for '{}'", b.child)));
        }
        seen[i] = Some(b.at.clone());
        for (pn, pt) in &b.parents {
            if !declared.contains_key(pn) {
                return Err(err(pt.line, pt.column, format!("unresolved parent '{pn}'")));
            }
            if parents[i].contains(pn) || *pn == b.child {
                return Err(err(pt.line, pt.column, format!("invalid parent '{pn}' of '{}'", b.child)));
            }
            parents[i].push(pn.clone());
        }
    }

    let net = BifNetwork {
        name: name.unwrap_or_else(|| "unknown".into()),
        variables,
        parents,
    };
    if let Some(v) = cycle_member(&net) {
        let (line, column) = seen[v].as_ref().map_or((1, 1), |t| (t.line, t.column));
        return Err(err(line, column, format!("cycle through '{}'", net.variables[v].name)));
    }
    Ok(net)
}

fn close_error(e: Error, open: &Token) -> Error {
    match e {
        Error::Bif { message, .. } if message.starts_with("unexpected end of input") => {
            err(open.line, open.column, "unbalanced braces: block is never closed")
        }
        other => other,
    }
}

/// Stable topological order, or `Err(v)` with a node left on a cycle.
fn topological_order(net: &BifNetwork) -> std::result::Result<Vec<usize>, usize> {
    let index: HashMap<&str, usize> = net
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let n = net.variables.len();
    let mut indegree: Vec<usize> = net.parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in net.parents.iter().enumerate() {
        for p in ps {
            children[index[p.as_str()]].push(c);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&i| indegree[i] > 0).expect("a node is left"))
    }
}

fn cycle_member(net: &BifNetwork) -> Option<usize> {
    topological_order(net).err()
}

/// A network mapped onto node indices.
#[derive(Debug, Clone)]
pub struct BifDag {
    pub dag: CausalDag,
    /// Variable name of each node.
    pub names: Vec<String>,
    pub index: HashMap<String, usize>,
    /// Parentless nodes, ascending.
    pub targets: Vec<usize>,
}

/// Orders nodes topologically, breaking ties by declaration order.
pub fn to_causal_dag(net: &BifNetwork) -> Result<BifDag> {
    let order = topological_order(net)
        .map_err(|v| Error::Scope(format!("cycle through '{}'", net.variables[v].name)))?;
    let names: Vec<String> = order.iter().map(|&i| net.variables[i].name.clone()).collect();
    let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let parents: Vec<Vec<usize>> = order
        .iter()
        .map(|&i| {
            let mut ps: Vec<usize> = net.parents[i].iter().map(|p| index[p]).collect();
            ps.sort_unstable();
            ps
        })
        .collect();
    let targets = (0..parents.len()).filter(|&i| parents[i].is_empty()).collect();
    let dag = CausalDag::new(parents)?;
    Ok(BifDag {
        dag,
        names,
        index,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = include_str!("../data/chain.bif");

    #[test]
    fn chain_fixture() {
        let net = parse_bif(CHAIN).unwrap();
        assert_eq!(net.variable_count(), 2);
        assert_eq!(net.parents_of("B").unwrap(), ["A".to_string()]);
        let d = to_causal_dag(&net).unwrap();
        assert_eq!(d.targets, vec![0]);
        assert_eq!(d.names, vec!["A", "B"]);
        assert_eq!(d.dag.row_count(), 3);
    }

    #[test]
    fn errors_carry_positions() {
        let cases = [
            ("network x {\n}\nfoo bar;", 3, 1, "unknown keyword"),
            ("variable A {\n  type discrete [ 2 ] { a, b };\n", 1, 12, "unbalanced"),
            ("}", 1, 1, "unbalanced"),
            (
                "variable A {\n type discrete [ 2 ] { a, b };\n}\nprobability ( A | Z ) {\n table 0.5, 0.5;\n}",
                4,
                19,
                "unresolved parent",
            ),
        ];
        for (text, line, column, msg) in cases {
            match parse_bif(text) {
                Err(Error::Bif { line: l, column: c, message }) => {
                    assert_eq!((l, c), (line, column), "{message}");
                    assert!(message.contains(msg), "{message}");
                }
                other => panic!("expected BIF error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn cycles_are_rejected() {
        let text = "variable A { type discrete [2] {x, y}; }\nvariable B { type discrete [2] {x, y}; }\n\
                    probability (A | B) { table 1, 0, 0, 1; }\nprobability (B | A) { table 1, 0, 0, 1; }";
        match parse_bif(text) {
            Err(Error::Bif { message, .. }) => assert!(message.contains("cycle")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_table_entry_is_rejected() {
        let text = "variable A { type discrete [2] {x, y}; }\nprobability (A) { table 0.5, half; }";
        assert!(matches!(parse_bif(text), Err(Error::Bif { line: 2, column: 30, .. })));
    }
}
