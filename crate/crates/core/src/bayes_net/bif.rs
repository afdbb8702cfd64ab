//! Parser for the discrete subset of the BIF interchange format.
//!
//! Supported: `network` blocks (empty body), `variable` blocks with
//! `type discrete [ k ] { s1, ..., sk };`, and `probability` blocks holding
//! either a `table` line or one `(parent states) p1, ..., pk;` line per parent
//! combination. `//` and `/* */` comments are skipped.
//!
//! For a node with parents, a `table` line lists probabilities grouped by the
//! node's state: every parent combination for state 0 first, then state 1, and
//! so on, with parent combinations in row-major order (last parent fastest).

use std::collections::HashMap;

use super::{BayesNet, BayesNetError, Cpt};
use crate::graph::CausalGraph;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, BayesNetError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            let start = line;
            i += 2;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(BayesNetError::Syntax {
                            line: start,
                            token: "/*".into(),
                            message: "unterminated comment".into(),
                        })
                    }
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        break;
                    }
                    Some('\n') => line += 1,
                    _ => {}
                }
                i += 1;
            }
        } else if "{}()[];,|".contains(c) {
            tokens.push(Token {
                tok: Tok::Punct(c),
                line,
            });
            i += 1;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && !"{}()[];,|".contains(chars[i]) {
                if chars[i] == '/' && matches!(chars.get(i + 1), Some('/') | Some('*')) {
                    break;
                }
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                line,
            });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn last_line(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.line)
    }

    fn error(&self, message: impl Into<String>) -> BayesNetError {
        match self.peek() {
            Some(t) => BayesNetError::Syntax {
                line: t.line,
                token: match &t.tok {
                    Tok::Word(w) => w.clone(),
                    Tok::Punct(p) => p.to_string(),
                },
                message: message.into(),
            },
            None => BayesNetError::Syntax {
                line: self.last_line(),
                token: "<eof>".into(),
                message: message.into(),
            },
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_punct(&mut self, p: char) -> Result<(), BayesNetError> {
        match self.peek() {
            Some(Token { tok: Tok::Punct(c), .. }) if *c == p => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{p}`"))),
        }
    }

    fn eat_punct(&mut self, p: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Punct(c), .. }) if *c == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, usize), BayesNetError> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), line }) => {
                let out = (w.clone(), *line);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), BayesNetError> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), .. }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{kw}`"))),
        }
    }

    fn number(&mut self) -> Result<f64, BayesNetError> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), .. }) => match w.parse::<f64>() {
                Ok(x) if x.is_finite() => {
                    self.pos += 1;
                    Ok(x)
                }
                _ => Err(self.error("expected a probability")),
            },
            _ => Err(self.error("expected a probability")),
        }
    }

    /// Comma-separated list terminated by `end` (consumed).
    fn word_list(&mut self, end: char, what: &str) -> Result<Vec<String>, BayesNetError> {
        let mut out = vec![self.word(what)?.0];
        while self.eat_punct(',') {
            out.push(self.word(what)?.0);
        }
        self.expect_punct(end)?;
        Ok(out)
    }

    fn number_list(&mut self) -> Result<Vec<f64>, BayesNetError> {
        let mut out = vec![self.number()?];
        while self.eat_punct(',') {
            out.push(self.number()?);
        }
        self.expect_punct(';')?;
        Ok(out)
    }

    fn reject_unsupported(&self) -> Result<(), BayesNetError> {
        if let Some(Token { tok: Tok::Word(w), .. }) = self.peek() {
            match w.as_str() {
                "property" => return Err(self.error("`property` entries are not supported")),
                "default" => return Err(self.error("`default` rows are not supported")),
                _ => {}
            }
        }
        Ok(())
    }
}

struct VariableDecl {
    name: String,
    states: Vec<String>,
}

struct ProbabilityDecl {
    node: String,
    parents: Vec<String>,
    line: usize,
    table: Option<Vec<f64>>,
    rows: Vec<(Vec<String>, Vec<f64>)>,
}

pub(super) fn parse(text: &str) -> Result<BayesNet, BayesNetError> {
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let mut name = String::from("unknown");
    let mut variables: Vec<VariableDecl> = Vec::new();
    let mut probabilities: Vec<ProbabilityDecl> = Vec::new();

    while let Some(tok) = p.peek().cloned() {
        match &tok.tok {
            Tok::Word(w) if w == "network" => {
                p.next();
                if let Some(Token { tok: Tok::Word(n), .. }) = p.peek() {
                    name = n.clone();
                    p.next();
                }
                p.expect_punct('{')?;
                p.reject_unsupported()?;
                if !p.eat_punct('}') {
                    return Err(p.error("unsupported content in network block"));
                }
            }
            Tok::Word(w) if w == "variable" => {
                p.next();
                variables.push(parse_variable(&mut p)?);
            }
            Tok::Word(w) if w == "probability" => {
                p.next();
                probabilities.push(parse_probability(&mut p, tok.line)?);
            }
            _ => return Err(p.error("expected `network`, `variable` or `probability`")),
        }
    }
    assemble(name, variables, probabilities)
}

fn parse_variable(p: &mut Parser) -> Result<VariableDecl, BayesNetError> {
    let (name, _) = p.word("variable name")?;
    p.expect_punct('{')?;
    p.reject_unsupported()?;
    p.keyword("type")?;
    match p.peek() {
        Some(Token { tok: Tok::Word(w), .. }) if w == "discrete" => {
            p.next();
        }
        Some(Token { tok: Tok::Word(w), .. }) if w == "continuous" => {
            return Err(p.error("continuous variables are not supported"))
        }
        _ => return Err(p.error("expected `discrete`")),
    }
    p.expect_punct('[')?;
    let (count_word, _) = p.word("state count")?;
    let count: usize = count_word.parse().map_err(|_| BayesNetError::Syntax {
        line: p.tokens[p.pos - 1].line,
        token: count_word.clone(),
        message: "state count must be a positive integer".into(),
    })?;
    p.expect_punct(']')?;
    p.expect_punct('{')?;
    let states = p.word_list('}', "state name")?;
    p.expect_punct(';')?;
    if states.len() != count {
        return Err(BayesNetError::CptShape {
            node: name,
            message: format!("declares {count} states but lists {}", states.len()),
        });
    }
    p.reject_unsupported()?;
    p.expect_punct('}')?;
    Ok(VariableDecl { name, states })
}

fn parse_probability(p: &mut Parser, line: usize) -> Result<ProbabilityDecl, BayesNetError> {
    p.expect_punct('(')?;
    let (node, _) = p.word("variable name")?;
    let parents = if p.eat_punct('|') {
        p.word_list(')', "parent name")?
    } else {
        p.expect_punct(')')?;
        Vec::new()
    };
    p.expect_punct('{')?;
    let mut decl = ProbabilityDecl {
        node,
        parents,
        line,
        table: None,
        rows: Vec::new(),
    };
    loop {
        p.reject_unsupported()?;
        if p.eat_punct('}') {
            break;
        }
        if p.eat_punct('(') {
            let states = p.word_list(')', "parent state")?;
            let probs = p.number_list()?;
            decl.rows.push((states, probs));
        } else if matches!(p.peek(), Some(Token { tok: Tok::Word(w), .. }) if w == "table") {
            p.next();
            if decl.table.is_some() {
                return Err(p.error("duplicate `table` entry"));
            }
            decl.table = Some(p.number_list()?);
        } else {
            return Err(p.error("expected `table`, `(` or `}`"));
        }
    }
    Ok(decl)
}

fn assemble(
    name: String,
    variables: Vec<VariableDecl>,
    probabilities: Vec<ProbabilityDecl>,
) -> Result<BayesNet, BayesNetError> {
    let index: HashMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; variables.len()];
    let mut cpts: Vec<Option<Cpt>> = vec![None; variables.len()];

    for decl in &probabilities {
        let &node = index
            .get(decl.node.as_str())
            .ok_or_else(|| BayesNetError::UnknownVariable(decl.node.clone()))?;
        if cpts[node].is_some() {
            return Err(BayesNetError::Syntax {
                line: decl.line,
                token: decl.node.clone(),
                message: "second probability block for variable".into(),
            });
        }
        let parent_ids: Vec<usize> = decl
            .parents
            .iter()
            .map(|p| {
                index.get(p.as_str()).copied().ok_or_else(|| BayesNetError::UnknownParent {
                    node: decl.node.clone(),
                    parent: p.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        let n_states = variables[node].states.len();
        let cards: Vec<usize> = parent_ids.iter().map(|&p| variables[p].states.len()).collect();
        let n_rows: usize = cards.iter().product();
        let mut probs = vec![f64::NAN; n_rows * n_states];

        if let Some(table) = &decl.table {
            if !decl.rows.is_empty() {
                return Err(BayesNetError::CptShape {
                    node: decl.node.clone(),
                    message: "mixes `table` and per-row entries".into(),
                });
            }
            if table.len() != n_rows * n_states {
                return Err(BayesNetError::CptShape {
                    node: decl.node.clone(),
                    message: format!("table has {} entries, expected {}", table.len(), n_rows * n_states),
                });
            }
            for state in 0..n_states {
                for row in 0..n_rows {
                    probs[row * n_states + state] = table[state * n_rows + row];
                }
            }
        } else {
            let mut filled = vec![false; n_rows];
            for (states, values) in &decl.rows {
                if states.len() != parent_ids.len() {
                    return Err(BayesNetError::CptShape {
                        node: decl.node.clone(),
                        message: format!("row ({}) names {} parent states", states.join(", "), states.len()),
                    });
                }
                let mut row = 0;
                for ((label, &parent), &card) in states.iter().zip(&parent_ids).zip(&cards) {
                    let s = variables[parent]
                        .states
                        .iter()
                        .position(|x| x == label)
                        .ok_or_else(|| BayesNetError::CptShape {
                            node: decl.node.clone(),
                            message: format!("unknown state `{label}` of parent `{}`", variables[parent].name),
                        })?;
                    row = row * card + s;
                }
                if values.len() != n_states {
                    return Err(BayesNetError::CptShape {
                        node: decl.node.clone(),
                        message: format!("row ({}) has {} values, expected {n_states}", states.join(", "), values.len()),
                    });
                }
                if std::mem::replace(&mut filled[row], true) {
                    return Err(BayesNetError::CptShape {
                        node: decl.node.clone(),
                        message: format!("row ({}) given twice", states.join(", ")),
                    });
                }
                probs[row * n_states..(row + 1) * n_states].copy_from_slice(values);
            }
            if let Some(missing) = filled.iter().position(|f| !f) {
                return Err(BayesNetError::CptShape {
                    node: decl.node.clone(),
                    message: format!("missing row {missing} of {n_rows}"),
                });
            }
        }
        parents[node] = Some(parent_ids);
        cpts[node] = Some(Cpt::new(&decl.node, n_states, cards, probs)?);
    }

    let names: Vec<String> = variables.iter().map(|v| v.name.clone()).collect();
    let mut parent_lists = Vec::with_capacity(variables.len());
    let mut tables = Vec::with_capacity(variables.len());
    for (i, (ps, cpt)) in parents.into_iter().zip(cpts).enumerate() {
        match (ps, cpt) {
            (Some(ps), Some(cpt)) => {
                parent_lists.push(ps);
                tables.push(cpt);
            }
            _ => {
                return Err(BayesNetError::CptShape {
                    node: names[i].clone(),
                    message: "no probability block".into(),
                })
            }
        }
    }
    let graph = CausalGraph::from_parents(names, parent_lists)?;
    let states = variables.into_iter().map(|v| v.states).collect();
    BayesNet::new(name, graph, states, tables)
}
