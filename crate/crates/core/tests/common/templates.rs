//! Random grammar-valid template sources.

use gadm_core::policy_dsl::{DslError, StateSchema};
use gadm_core::rng::RandomStream;
use rand::seq::SliceRandom;
use rand::Rng;

enum Piece {
    Text(String),
    Param(usize),
}

struct Gen<'r> {
    rng: &'r mut RandomStream,
    pieces: Vec<Piece>,
    n_params: usize,
    bools: Vec<String>,
    nums: Vec<String>,
    actions: Vec<String>,
}

impl Gen<'_> {
    fn text(&mut self, s: &str) {
        self.pieces.push(Piece::Text(s.to_string()));
    }

    fn space(&mut self) {
        let ws = *[" ", " ", " ", "  ", "\n", "\t", "\n  "]
            .choose(self.rng)
            .unwrap();
        self.text(ws);
    }

    fn param(&mut self) {
        let p = if self.n_params == 0 || self.rng.gen_bool(0.7) {
            self.n_params += 1;
            self.n_params - 1
        } else {
            self.rng.gen_range(0..self.n_params)
        };
        self.pieces.push(Piece::Param(p));
    }

    fn leaf(&mut self) {
        if self.nums.is_empty() || (!self.bools.is_empty() && self.rng.gen_bool(0.3)) {
            let v = self.bools.choose(self.rng).unwrap().clone();
            self.text(&v);
        } else {
            let v = self.nums.choose(self.rng).unwrap().clone();
            self.text(&v);
            self.space();
            let op = *["<", ">", "=="].choose(self.rng).unwrap();
            self.text(op);
            self.space();
            self.param();
        }
    }

    fn expr(&mut self, depth: usize) {
        let terms = if depth == 0 {
            1
        } else {
            self.rng.gen_range(1..=3)
        };
        for i in 0..terms {
            if i > 0 {
                self.space();
                let op = *["and", "or"].choose(self.rng).unwrap();
                self.text(op);
                self.space();
            }
            if depth > 0 && self.rng.gen_bool(0.3) {
                self.text("(");
                self.expr(depth - 1);
                self.text(")");
            } else {
                self.leaf();
            }
        }
    }

    fn action(&mut self) {
        let a = self.actions.choose(self.rng).unwrap().clone();
        self.text(&a);
        if self.rng.gen_bool(0.15) {
            self.text("(");
            let n = self.rng.gen_range(1..=2);
            for (i, name) in ["filter", "limit"][..n].iter().enumerate() {
                if i > 0 {
                    self.text(", ");
                }
                self.text(&format!("{name}="));
                self.param();
            }
            self.text(")");
        }
    }

    fn tag(&mut self) {
        if self.rng.gen_bool(0.5) {
            let t = format!("[t{}]", self.rng.gen_range(0..4));
            self.text(&t);
            self.space();
        }
    }
}

/// A random template source. About a third omit the schema header and use
/// the default dialog schema.
pub fn random_template(rng: &mut RandomStream) -> String {
    let headerless = rng.gen_bool(0.3);
    let (bools, nums, actions): (Vec<String>, Vec<String>, Vec<String>) = if headerless {
        let schema = StateSchema::dialog_default();
        let pick = |k| {
            schema
                .vars()
                .filter(|(_, kind)| *kind == k)
                .map(|(n, _)| n.to_string())
                .collect()
        };
        (
            pick(gadm_core::policy_dsl::VarKind::Bool),
            pick(gadm_core::policy_dsl::VarKind::Num),
            schema.actions().to_vec(),
        )
    } else {
        let nb = rng.gen_range(0..4);
        let nn = rng.gen_range(if nb == 0 { 1 } else { 0 }..4);
        (
            (0..nb).map(|i| format!("flag_{i}")).collect(),
            (0..nn).map(|i| format!("score{i}")).collect(),
            (0..rng.gen_range(1..5))
                .map(|i| format!("Act{i}"))
                .collect(),
        )
    };
    let mut g = Gen {
        rng,
        pieces: Vec::new(),
        n_params: 0,
        bools,
        nums,
        actions,
    };
    if !headerless {
        for b in g.bools.clone() {
            g.text(&format!("bool {b}\n"));
        }
        for n in g.nums.clone() {
            g.text(&format!("num {n}\n"));
        }
        for a in g.actions.clone() {
            g.text(&format!("action {a}\n"));
        }
        g.text("%%\n");
    }
    let conditional = g.rng.gen_range(0..7);
    for _ in 0..conditional {
        if g.rng.gen_bool(0.1) {
            g.text("# note\n");
        }
        g.tag();
        g.text("if");
        g.space();
        let depth = g.rng.gen_range(0..3);
        g.expr(depth);
        g.space();
        g.text("then");
        g.space();
        g.action();
        g.space();
        g.text("else");
        g.space();
    }
    g.tag();
    g.action();
    g.text("\n");

    // relabel parameters so first use is not always in index order
    let mut perm: Vec<usize> = (0..g.n_params).collect();
    perm.shuffle(g.rng);
    g.pieces
        .iter()
        .map(|p| match p {
            Piece::Text(s) => s.clone(),
            Piece::Param(i) => format!("p{}", perm[*i]),
        })
        .collect()
}

/// Sources every parser must reject.
pub const MALFORMED: &[&str] = &[
    "",
    "if no_slu then",
    "if no_slu Repeat else Offer",
    "if bogus then Repeat else Offer",
    "if no_slu then Dance else Offer",
    "if top_slu_score then Repeat else Offer",
    "if no_slu < p0 then Repeat else Offer",
    "if no_slu then Repeat else if dialog_start then Offer",
    "if (no_slu or dialog_start then Repeat else Offer",
    "if top_slu_score < q0 then Repeat else Offer",
    "[c0 if no_slu then Repeat else Offer",
    "if top_slu_score < 0.5 then Repeat else Offer",
    "if no_slu then Repeat else Offer(filter=)",
    "if no_slu then Repeat else Offer Offer",
    "if no_slu then Repeat\nelse Offer\n@",
    "if no_slu and then Repeat else Offer",
    "num x\nnum x\naction Offer\n%%\nOffer",
    "num x\naction Offer\n%%\nif x < p1 then Offer else Offer",
    "bool b\naction Go\n%%\nif b then Go else Stop",
    "if no_slu then Repeat else else Offer",
];

/// Source position carried by a parse error, if any.
pub fn error_position(e: &DslError) -> Option<(usize, usize)> {
    match e {
        DslError::Syntax { line, column, .. }
        | DslError::UnknownIdentifier { line, column, .. }
        | DslError::KindMismatch { line, column, .. }
        | DslError::DanglingElse { line, column }
        | DslError::DuplicateDeclaration { line, column, .. }
        | DslError::SparseParameters { line, column, .. } => Some((*line, *column)),
        _ => None,
    }
}
