use std::fmt::Write;

use super::{
    ActionSpec, CondExpr, DslError, LogicOp, ParameterVector, Result, TemplateAst, VarKind,
};

fn precedence(op: LogicOp) -> u8 {
    match op {
        LogicOp::Or => 1,
        LogicOp::And => 2,
    }
}

fn write_cond(
    out: &mut String,
    cond: &CondExpr,
    parent: u8,
    right_child: bool,
    values: Option<&[f64]>,
) {
    match cond {
        CondExpr::Flag(name) => out.push_str(name),
        CondExpr::Compare { var, op, param } => {
            let _ = match values {
                Some(v) => write!(out, "{var} {} {}", op.symbol(), v[*param]),
                None => write!(out, "{var} {} p{param}", op.symbol()),
            };
        }
        CondExpr::Logic { op, lhs, rhs } => {
            let prec = precedence(*op);
            // Operators are left-associative, so a right operand of equal
            // precedence needs explicit grouping to survive a reparse.
            let paren = prec < parent || (right_child && prec == parent);
            if paren {
                out.push('(');
            }
            write_cond(out, lhs, prec, false, values);
            out.push_str(match op {
                LogicOp::And => " and ",
                LogicOp::Or => " or ",
            });
            write_cond(out, rhs, prec, true, values);
            if paren {
                out.push(')');
            }
        }
    }
}

fn write_action(out: &mut String, action: &ActionSpec, values: Option<&[f64]>) {
    out.push_str(&action.act);
    if !action.structural.is_empty() {
        out.push('(');
        for (i, (name, p)) in action.structural.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = match values {
                Some(v) => write!(out, "{name}={}", v[*p]),
                None => write!(out, "{name}=p{p}"),
            };
        }
        out.push(')');
    }
}

/// Canonical body text, one clause per line.
pub fn pretty_print(ast: &TemplateAst) -> String {
    write_body(ast, None)
}

/// Body text with every parameter replaced by its value.
pub fn pretty_print_instantiated(ast: &TemplateAst, params: &ParameterVector) -> Result<String> {
    if params.len() != ast.param_count {
        return Err(DslError::ArityMismatch {
            expected: ast.param_count,
            got: params.len(),
        });
    }
    Ok(write_body(ast, Some(params.values())))
}

fn write_body(ast: &TemplateAst, values: Option<&[f64]>) -> String {
    let mut out = String::new();
    for (i, clause) in ast.clauses.iter().enumerate() {
        if i > 0 {
            out.push_str("else ");
        }
        if let Some(tag) = &clause.tag {
            let _ = write!(out, "[{tag}] ");
        }
        match &clause.condition {
            Some(cond) => {
                out.push_str("if ");
                write_cond(&mut out, cond, 0, false, values);
                out.push_str(" then ");
                write_action(&mut out, &clause.action, values);
            }
            None => write_action(&mut out, &clause.action, values),
        }
        out.push('\n');
    }
    out
}

/// Full template file: schema header, `%%`, body.
pub fn render_template(ast: &TemplateAst) -> String {
    let mut out = String::new();
    for kind in [VarKind::Bool, VarKind::Num] {
        for (name, _) in ast.schema.vars().filter(|(_, k)| *k == kind) {
            let _ = writeln!(out, "{} {name}", kind.name());
        }
    }
    for label in ast.schema.actions() {
        let _ = writeln!(out, "action {label}");
    }
    out.push_str("%%\n");
    out.push_str(&pretty_print(ast));
    out
}
