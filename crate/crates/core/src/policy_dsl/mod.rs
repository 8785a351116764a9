//! Prioritized condition-action policy templates.
//!
//! A template file has an optional schema header followed by a `%%` line and
//! the policy body:
//!
//! ```text
//! bool dialog_start
//! num top_slu_score
//! action Welcome
//! action Repeat
//! %%
//! if dialog_start then Welcome
//! else if top_slu_score < p0 then Repeat
//! else Welcome
//! ```
//!
//! Free parameters are written `p0`, `p1`, ... and must be dense. Clauses may
//! carry a `[tag]` used for ablation, and actions may bind structural
//! parameters, e.g. `Offer(filter=p3)`. `and` binds tighter than `or`;
//! parentheses group explicitly. Without a `%%` line the whole source is read
//! as a body over [`StateSchema::dialog_default`].

mod eval;
mod lexer;
mod parser;
mod print;
mod schema;

pub use eval::{evaluate_policy, ActionDecision, StateView};
pub use parser::parse_template;
pub use print::{pretty_print, pretty_print_instantiated, render_template};
pub use schema::{StateSchema, VarKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DslError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown {kind} `{name}` at {line}:{column}")]
    UnknownIdentifier {
        line: usize,
        column: usize,
        kind: &'static str,
        name: String,
    },
    #[error("`{name}` at {line}:{column} is a {actual} variable, expected {expected}")]
    KindMismatch {
        line: usize,
        column: usize,
        name: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("template ends at {line}:{column} without an unconditional action")]
    DanglingElse { line: usize, column: usize },
    #[error(
        "free parameters must be dense: p{missing} is never referenced (p{highest} at {line}:{column})"
    )]
    SparseParameters {
        line: usize,
        column: usize,
        missing: usize,
        highest: usize,
    },
    #[error("duplicate declaration of `{name}` at {line}:{column}")]
    DuplicateDeclaration {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("template has {expected} free parameters, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("parameter p{index} = {value} lies outside [0, 1]")]
    ParameterOutOfRange { index: usize, value: f64 },
    #[error("state lacks variable `{0}`")]
    MissingStateVariable(String),
    #[error("no clause tagged `{0}`")]
    UnknownTag(String),
    #[error("the terminal clause cannot be removed")]
    TerminalAblation,
}

pub type Result<T, E = DslError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Less,
    Greater,
    Equal,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Less => "<",
            Comparator::Greater => ">",
            Comparator::Equal => "==",
        }
    }
}

/// Tolerance used by `==` comparisons between a state variable and a parameter.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CondExpr {
    Flag(String),
    Compare {
        var: String,
        op: Comparator,
        param: usize,
    },
    Logic {
        op: LogicOp,
        lhs: Box<CondExpr>,
        rhs: Box<CondExpr>,
    },
}

impl CondExpr {
    pub fn and(lhs: CondExpr, rhs: CondExpr) -> Self {
        CondExpr::Logic {
            op: LogicOp::And,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn or(lhs: CondExpr, rhs: CondExpr) -> Self {
        CondExpr::Logic {
            op: LogicOp::Or,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    fn visit_params(&self, f: &mut impl FnMut(usize)) {
        match self {
            CondExpr::Flag(_) => {}
            CondExpr::Compare { param, .. } => f(*param),
            CondExpr::Logic { lhs, rhs, .. } => {
                lhs.visit_params(f);
                rhs.visit_params(f);
            }
        }
    }
}

/// An action label plus named structural parameters, e.g. `Offer(filter=p3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    pub act: String,
    pub structural: Vec<(String, usize)>,
}

impl ActionSpec {
    pub fn plain(act: impl Into<String>) -> Self {
        ActionSpec {
            act: act.into(),
            structural: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub tag: Option<String>,
    /// `None` only for the terminal clause.
    pub condition: Option<CondExpr>,
    pub action: ActionSpec,
}

/// Parsed template. Clause order is priority order and the last clause is
/// always unconditional.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateAst {
    pub schema: StateSchema,
    pub clauses: Vec<Clause>,
    pub param_count: usize,
}

impl TemplateAst {
    /// Builds an AST from clauses, checking the terminal and density invariants.
    pub fn new(schema: StateSchema, clauses: Vec<Clause>) -> Result<Self> {
        match clauses.last() {
            Some(c) if c.condition.is_none() => {}
            _ => return Err(DslError::DanglingElse { line: 0, column: 0 }),
        }
        if clauses[..clauses.len() - 1]
            .iter()
            .any(|c| c.condition.is_none())
        {
            return Err(DslError::Syntax {
                line: 0,
                column: 0,
                message: "unconditional clause before the end of the template".into(),
            });
        }
        let param_count = dense_param_count(&clauses)?;
        Ok(TemplateAst {
            schema,
            clauses,
            param_count,
        })
    }

    pub fn has_structural_params(&self) -> bool {
        self.clauses.iter().any(|c| !c.action.structural.is_empty())
    }

    /// Distinct clause tags in source order.
    pub fn tags(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for tag in self.clauses.iter().filter_map(|c| c.tag.as_deref()) {
            if !seen.contains(&tag) {
                seen.push(tag);
            }
        }
        seen
    }

    /// Removes every conditional clause carrying `tag`.
    ///
    /// Parameters that are no longer referenced stay in the chromosome so that
    /// ablated and full templates share the same parameter layout; they simply
    /// have no effect on decisions.
    pub fn without_tag(&self, tag: &str) -> Result<TemplateAst> {
        let terminal = self.clauses.last().expect("non-empty");
        if terminal.tag.as_deref() == Some(tag) {
            return Err(DslError::TerminalAblation);
        }
        if !self.clauses.iter().any(|c| c.tag.as_deref() == Some(tag)) {
            return Err(DslError::UnknownTag(tag.to_string()));
        }
        let clauses = self
            .clauses
            .iter()
            .filter(|c| c.tag.as_deref() != Some(tag))
            .cloned()
            .collect();
        Ok(TemplateAst {
            schema: self.schema.clone(),
            clauses,
            param_count: self.param_count,
        })
    }
}

fn dense_param_count(clauses: &[Clause]) -> Result<usize> {
    let mut used = Vec::<bool>::new();
    let mut mark = |i: usize| {
        if used.len() <= i {
            used.resize(i + 1, false);
        }
        used[i] = true;
    };
    for clause in clauses {
        if let Some(cond) = &clause.condition {
            cond.visit_params(&mut mark);
        }
        for (_, p) in &clause.action.structural {
            mark(*p);
        }
    }
    if let Some(missing) = used.iter().position(|u| !u) {
        return Err(DslError::SparseParameters {
            line: 0,
            column: 0,
            missing,
            highest: used.len() - 1,
        });
    }
    Ok(used.len())
}

/// A fixed-length vector of reals in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(DslError::ParameterOutOfRange { index, value });
        }
        Ok(ParameterVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for ParameterVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
