use super::fitness::QValConfig;
use super::models::{ActionClassifier, QModel};
use super::{argmax, BatchError, CorpusPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonKind {
    /// Most probable logged action.
    SlOriginal,
    /// Greedy in `Q`.
    SlMaxQ,
    /// Greedy in `Q` among actions with probability above `delta`, else
    /// the most probable action.
    ThresholdedQ,
}

impl ComparisonKind {
    pub const ALL: [ComparisonKind; 3] = [
        ComparisonKind::SlOriginal,
        ComparisonKind::SlMaxQ,
        ComparisonKind::ThresholdedQ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComparisonKind::SlOriginal => "SL-Original",
            ComparisonKind::SlMaxQ => "SL-MaxQ",
            ComparisonKind::ThresholdedQ => "ThresholdedQ",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ComparisonDm<'a> {
    pub kind: ComparisonKind,
    q: &'a QModel,
    clf: &'a ActionClassifier,
    delta: f64,
}

impl ComparisonDm<'_> {
    pub fn action(&self, state: &[f64]) -> usize {
        match self.kind {
            ComparisonKind::SlOriginal => self.clf.predict(state),
            ComparisonKind::SlMaxQ => self.q.greedy(state),
            ComparisonKind::ThresholdedQ => {
                let p = self.clf.proba(state);
                let q = self.q.q_values(state);
                let mut best: Option<usize> = None;
                for a in 0..q.len() {
                    if p[a] > self.delta && best.is_none_or(|b| q[a] > q[b]) {
                        best = Some(a);
                    }
                }
                best.unwrap_or_else(|| argmax(&p))
            }
        }
    }
}

impl CorpusPolicy for ComparisonDm<'_> {
    fn choose(&self, state: &[f64]) -> Result<usize, BatchError> {
        Ok(self.action(state))
    }
}

/// SL-Original, SL-MaxQ and ThresholdedQ, in that order.
pub fn build_comparison_dms<'a>(
    q: &'a QModel,
    clf: &'a ActionClassifier,
    cfg: &QValConfig,
) -> Result<[ComparisonDm<'a>; 3], BatchError> {
    cfg.validate()?;
    if q.actions() != clf.actions() || q.feature_names() != clf.feature_names() {
        return Err(BatchError::SchemaMismatch(
            "Q model and classifier disagree on features or actions".into(),
        ));
    }
    Ok(ComparisonKind::ALL.map(|kind| ComparisonDm {
        kind,
        q,
        clf,
        delta: cfg.delta,
    }))
}
