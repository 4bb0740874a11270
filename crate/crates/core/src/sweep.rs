//! Budget sweeps: every selection × replacement combination at every budget,
//! evaluated against one original corpus.

use crate::attack::{attack_corpus, AttackConfig, AttackError, AttackResources, ReplacerKind};
use crate::corpus::Corpus;
use crate::evaluation::{CurveRow, EvalError, EvalOptions, Evaluator};
use crate::selection::SelectionMethod;
use nerperturb_backend::Client;
use thiserror::Error;

pub const DEFAULT_BUDGETS: std::ops::RangeInclusive<usize> = 1..=9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPlan {
    pub methods: Vec<SelectionMethod>,
    pub replacers: Vec<ReplacerKind>,
    pub budgets: Vec<usize>,
    /// Seed, top-k and overshoot shared by every run; method, replacer and
    /// budget are overwritten per row.
    pub base: AttackConfig,
    pub jobs: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            methods: SelectionMethod::ALL.to_vec(),
            replacers: ReplacerKind::ALL.to_vec(),
            budgets: DEFAULT_BUDGETS.collect(),
            base: AttackConfig::default(),
            jobs: 1,
        }
    }
}

impl SweepPlan {
    pub fn configs(&self) -> Vec<AttackConfig> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &replacer in &self.replacers {
                for &budget in &self.budgets {
                    out.push(AttackConfig {
                        method,
                        replacer,
                        budget,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{method}+{replacer} at budget {budget}: {source}")]
    Attack {
        method: SelectionMethod,
        replacer: ReplacerKind,
        budget: usize,
        #[source]
        source: AttackError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Runs the plan in method, replacer, budget order and returns one row per
/// configuration.
pub fn run_sweep(
    corpus: &Corpus,
    gold: Option<&Corpus>,
    plan: &SweepPlan,
    resources: AttackResources<'_>,
    evaluator_backend: &Client,
    options: EvalOptions,
) -> Result<Vec<CurveRow>, SweepError> {
    let evaluator = Evaluator::new(corpus, gold, evaluator_backend, options)?;
    let mut rows = Vec::new();
    for config in plan.configs() {
        let output = attack_corpus(corpus, &config, resources, plan.jobs).map_err(|source| SweepError::Attack {
            method: config.method,
            replacer: config.replacer,
            budget: config.budget,
            source,
        })?;
        let report = evaluator.evaluate(&output.corpus, Some(&config))?;
        log::info!(
            "{}+{} k={}: {}",
            config.method,
            config.replacer,
            config.budget,
            report.summary_line()
        );
        rows.push(CurveRow {
            method: config.method.to_string(),
            replacer: config.replacer.to_string(),
            budget: config.budget,
            similarity: report.mean_similarity,
            f1_original: report.f1_original,
            f1_adversarial: report.f1_adversarial,
            delta_perf: report.delta_perf,
            replacements: output.examples.iter().map(|e| e.replacements.len()).sum(),
        });
    }
    Ok(rows)
}
