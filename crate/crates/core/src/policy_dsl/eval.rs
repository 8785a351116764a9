use super::{
    Comparator, CondExpr, DslError, LogicOp, ParameterVector, Result, TemplateAst,
    EQUALITY_TOLERANCE,
};

/// Read access to named state variables. Boolean variables are encoded as
/// numbers and read as true when greater than 0.5.
pub trait StateView {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl<S: StateView + ?Sized> StateView for &S {
    fn lookup(&self, name: &str) -> Option<f64> {
        (**self).lookup(name)
    }
}

/// Parallel name and value slices, e.g. a corpus feature vector.
impl StateView for (&[String], &[f64]) {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.0.iter().position(|n| n == name).map(|i| self.1[i])
    }
}

/// The fired clause, its action label, and bound structural parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDecision<'a> {
    pub clause: usize,
    pub act: &'a str,
    pub structural: Vec<(&'a str, f64)>,
}

impl ActionDecision<'_> {
    pub fn structural_value(&self, name: &str) -> Option<f64> {
        self.structural
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

fn lookup(state: &impl StateView, name: &str) -> Result<f64> {
    state
        .lookup(name)
        .ok_or_else(|| DslError::MissingStateVariable(name.to_string()))
}

fn holds(cond: &CondExpr, params: &[f64], state: &impl StateView) -> Result<bool> {
    Ok(match cond {
        CondExpr::Flag(name) => lookup(state, name)? > 0.5,
        CondExpr::Compare { var, op, param } => {
            let v = lookup(state, var)?;
            let p = params[*param];
            match op {
                Comparator::Less => v < p,
                Comparator::Greater => v > p,
                Comparator::Equal => (v - p).abs() <= EQUALITY_TOLERANCE,
            }
        }
        CondExpr::Logic {
            op: LogicOp::And,
            lhs,
            rhs,
        } => holds(lhs, params, state)? && holds(rhs, params, state)?,
        CondExpr::Logic {
            op: LogicOp::Or,
            lhs,
            rhs,
        } => holds(lhs, params, state)? || holds(rhs, params, state)?,
    })
}

/// First-match evaluation: the lowest-index clause whose condition holds fires.
pub fn evaluate_policy<'a>(
    ast: &'a TemplateAst,
    params: &ParameterVector,
    state: &impl StateView,
) -> Result<ActionDecision<'a>> {
    if params.len() != ast.param_count {
        return Err(DslError::ArityMismatch {
            expected: ast.param_count,
            got: params.len(),
        });
    }
    let values = params.values();
    for (i, clause) in ast.clauses.iter().enumerate() {
        let fires = match &clause.condition {
            Some(cond) => holds(cond, values, state)?,
            None => true,
        };
        if fires {
            return Ok(ActionDecision {
                clause: i,
                act: &clause.action.act,
                structural: clause
                    .action
                    .structural
                    .iter()
                    .map(|(n, p)| (n.as_str(), values[*p]))
                    .collect(),
            });
        }
    }
    unreachable!("terminal clause is unconditional")
}
