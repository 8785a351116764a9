use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Bool,
    Num,
}

impl VarKind {
    pub fn name(self) -> &'static str {
        match self {
            VarKind::Bool => "bool",
            VarKind::Num => "num",
        }
    }
}

/// State variables and action labels a template may reference.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateSchema {
    vars: BTreeMap<String, VarKind>,
    actions: Vec<String>,
}

impl StateSchema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the name was already declared.
    pub fn declare_var(&mut self, name: impl Into<String>, kind: VarKind) -> bool {
        let name = name.into();
        if self.vars.contains_key(&name) {
            return false;
        }
        self.vars.insert(name, kind);
        true
    }

    pub fn declare_action(&mut self, label: impl Into<String>) -> bool {
        let label = label.into();
        if self.actions.contains(&label) {
            return false;
        }
        self.actions.push(label);
        true
    }

    pub fn var_kind(&self, name: &str) -> Option<VarKind> {
        self.vars.get(name).copied()
    }

    pub fn has_action(&self, label: &str) -> bool {
        self.actions.iter().any(|a| a == label)
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, VarKind)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    /// Schema of the restaurant-domain dialog state as seen by templates.
    pub fn dialog_default() -> Self {
        let mut schema = StateSchema::new();
        for name in [
            "dialog_start",
            "no_slu",
            "user_denied",
            "require_more_pending",
        ] {
            schema.declare_var(name, VarKind::Bool);
        }
        for name in ["top_slu_score", "min_slot_score", "filled_frac"] {
            schema.declare_var(name, VarKind::Num);
        }
        for label in crate::dialog_core::SYSTEM_ACTIONS {
            schema.declare_action(label);
        }
        schema
    }
}
