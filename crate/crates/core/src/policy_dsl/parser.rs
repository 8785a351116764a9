use super::lexer::{tokenize, Tok, Token};
use super::{
    ActionSpec, Clause, Comparator, CondExpr, DslError, LogicOp, Result, StateSchema, TemplateAst,
    VarKind,
};

/// Parses a template file (schema header, `%%`, body) or a bare body over the
/// default dialog schema.
pub fn parse_template(source: &str) -> Result<TemplateAst> {
    let mut offset = 0;
    for (idx, line) in source.split_inclusive('\n').enumerate() {
        if line.trim() == "%%" {
            let schema = parse_schema(&source[..offset])?;
            let body = &source[offset + line.len()..];
            return parse_body(body, idx + 2, schema);
        }
        offset += line.len();
    }
    parse_body(source, 1, StateSchema::dialog_default())
}

fn parse_schema(header: &str) -> Result<StateSchema> {
    let tokens = tokenize(header, 1, true)?;
    let mut schema = StateSchema::new();
    let mut lines = tokens.split(|t| matches!(t.tok, Tok::Newline | Tok::Eof));
    for line in &mut lines {
        match line {
            [] => continue,
            [kw, name] => {
                let (Tok::Ident(kw_text), Tok::Ident(name_text)) = (&kw.tok, &name.tok) else {
                    return Err(syntax(
                        kw,
                        "expected `bool <name>`, `num <name>` or `action <label>`",
                    ));
                };
                let fresh = match kw_text.as_str() {
                    "bool" => schema.declare_var(name_text.clone(), VarKind::Bool),
                    "num" => schema.declare_var(name_text.clone(), VarKind::Num),
                    "action" => schema.declare_action(name_text.clone()),
                    other => return Err(syntax(kw, &format!("unknown declaration `{other}`"))),
                };
                if !fresh {
                    return Err(DslError::DuplicateDeclaration {
                        line: name.line,
                        column: name.column,
                        name: name_text.clone(),
                    });
                }
            }
            [first, ..] => {
                return Err(syntax(
                    first,
                    "expected `bool <name>`, `num <name>` or `action <label>`",
                ))
            }
        }
    }
    Ok(schema)
}

fn syntax(at: &Token, message: &str) -> DslError {
    DslError::Syntax {
        line: at.line,
        column: at.column,
        message: message.to_string(),
    }
}

fn parse_body(body: &str, first_line: usize, schema: StateSchema) -> Result<TemplateAst> {
    let tokens = tokenize(body, first_line, false)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        schema: &schema,
        param_sites: Vec::new(),
    };
    let clauses = parser.template()?;
    parser.expect(Tok::Eof, "end of template")?;
    let eof = parser.tokens.last().expect("eof token").clone();
    let param_sites = std::mem::take(&mut parser.param_sites);
    drop(parser);
    TemplateAst::new(schema, clauses).map_err(|e| match e {
        DslError::DanglingElse { .. } => DslError::DanglingElse {
            line: eof.line,
            column: eof.column,
        },
        DslError::SparseParameters {
            missing, highest, ..
        } => {
            let (line, column) = param_sites
                .iter()
                .find(|(p, _, _)| *p == highest)
                .map_or((eof.line, eof.column), |&(_, l, c)| (l, c));
            DslError::SparseParameters {
                line,
                column,
                missing,
                highest,
            }
        }
        other => other,
    })
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    schema: &'s StateSchema,
    /// Every `p<N>` reference with its position, for error reporting.
    param_sites: Vec<(usize, usize, usize)>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        let t = self.peek().clone();
        if t.tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&t, what))
        }
    }

    fn unexpected(&self, at: &Token, what: &str) -> DslError {
        if at.tok == Tok::Eof && matches!(what, "`else`" | "action" | "`if` or action") {
            return DslError::DanglingElse {
                line: at.line,
                column: at.column,
            };
        }
        syntax(at, &format!("expected {what}, found {}", at.tok.describe()))
    }

    // template := [tag] 'if' cond 'then' action 'else' template | [tag] action
    fn template(&mut self) -> Result<Vec<Clause>> {
        let mut clauses = Vec::new();
        loop {
            let tag = self.tag()?;
            if self.peek().tok == Tok::If {
                self.bump();
                let condition = self.or_expr()?;
                self.expect(Tok::Then, "`then`")?;
                let action = self.action()?;
                clauses.push(Clause {
                    tag,
                    condition: Some(condition),
                    action,
                });
                self.expect(Tok::Else, "`else`")?;
            } else {
                let action = match self.peek().tok {
                    Tok::Ident(_) => self.action()?,
                    _ => {
                        let t = self.peek().clone();
                        return Err(self.unexpected(&t, "`if` or action"));
                    }
                };
                clauses.push(Clause {
                    tag,
                    condition: None,
                    action,
                });
                return Ok(clauses);
            }
        }
    }

    fn tag(&mut self) -> Result<Option<String>> {
        if self.peek().tok != Tok::LBracket {
            return Ok(None);
        }
        self.bump();
        let t = self.bump();
        let Tok::Ident(name) = t.tok else {
            return Err(self.unexpected(&t, "clause tag"));
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Some(name))
    }

    fn or_expr(&mut self) -> Result<CondExpr> {
        let mut lhs = self.and_expr()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = CondExpr::Logic {
                op: LogicOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<CondExpr> {
        let mut lhs = self.atom()?;
        while self.peek().tok == Tok::And {
            self.bump();
            let rhs = self.atom()?;
            lhs = CondExpr::Logic {
                op: LogicOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<CondExpr> {
        let t = self.bump();
        match t.tok {
            Tok::LParen => {
                let inner = self.or_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(ref name) => {
                let kind =
                    self.schema
                        .var_kind(name)
                        .ok_or_else(|| DslError::UnknownIdentifier {
                            line: t.line,
                            column: t.column,
                            kind: "state variable",
                            name: name.clone(),
                        })?;
                let op = match self.peek().tok {
                    Tok::Less => Some(Comparator::Less),
                    Tok::Greater => Some(Comparator::Greater),
                    Tok::EqEq => Some(Comparator::Equal),
                    _ => None,
                };
                match (op, kind) {
                    (None, VarKind::Bool) => Ok(CondExpr::Flag(name.clone())),
                    (Some(op), VarKind::Num) => {
                        self.bump();
                        let p = self.bump();
                        let Tok::Param(param) = p.tok else {
                            return Err(self.unexpected(&p, "free parameter `p<N>`"));
                        };
                        self.param_sites.push((param, p.line, p.column));
                        Ok(CondExpr::Compare {
                            var: name.clone(),
                            op,
                            param,
                        })
                    }
                    (None, VarKind::Num) => Err(DslError::KindMismatch {
                        line: t.line,
                        column: t.column,
                        name: name.clone(),
                        expected: "bool",
                        actual: "num",
                    }),
                    (Some(_), VarKind::Bool) => Err(DslError::KindMismatch {
                        line: t.line,
                        column: t.column,
                        name: name.clone(),
                        expected: "num",
                        actual: "bool",
                    }),
                }
            }
            _ => Err(self.unexpected(&t, "condition")),
        }
    }

    fn action(&mut self) -> Result<ActionSpec> {
        let t = self.bump();
        let Tok::Ident(act) = t.tok.clone() else {
            return Err(self.unexpected(&t, "action"));
        };
        if !self.schema.has_action(&act) {
            return Err(DslError::UnknownIdentifier {
                line: t.line,
                column: t.column,
                kind: "action",
                name: act,
            });
        }
        let mut structural = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.bump();
            loop {
                let key = self.bump();
                let Tok::Ident(name) = key.tok.clone() else {
                    return Err(self.unexpected(&key, "structural parameter name"));
                };
                if structural.iter().any(|(n, _)| *n == name) {
                    return Err(DslError::DuplicateDeclaration {
                        line: key.line,
                        column: key.column,
                        name,
                    });
                }
                self.expect(Tok::Assign, "`=`")?;
                let p = self.bump();
                let Tok::Param(index) = p.tok else {
                    return Err(self.unexpected(&p, "free parameter `p<N>`"));
                };
                self.param_sites.push((index, p.line, p.column));
                structural.push((name, index));
                let sep = self.bump();
                match sep.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => return Err(self.unexpected(&sep, "`,` or `)`")),
                }
            }
        }
        Ok(ActionSpec { act, structural })
    }
}
