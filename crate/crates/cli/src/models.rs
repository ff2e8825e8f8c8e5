//! Classifier construction from a [`ModelSpec`].

use crate::config::ModelSpec;
use crate::error::CliError;
use qeml_core::classical::{ClassicalSvm, GradientBoostedTrees, LogisticRegression};
use qeml_core::encoders::EncoderSpec;
use qeml_core::ensemble::{BaggedClassifier, StackedClassifier};
use qeml_core::model::Classifier;
use qeml_core::qsvm::{AnnealQsvm, KernelQsvm};
use qeml_core::vqc::{VqcClassifier, VqcConfig};

/// Instantiate an unfitted classifier; all randomness flows from `seed`.
pub fn build_classifier(spec: &ModelSpec, seed: u64) -> Result<Box<dyn Classifier>, CliError> {
    Ok(match spec {
        ModelSpec::Vqc {
            encoder,
            repetitions,
            ansatz,
            layers,
            max_evaluations,
            optimizer,
        } => {
            let mut config = VqcConfig::new(
                EncoderSpec::with_repetitions(*encoder, *repetitions),
                *ansatz,
                *layers,
                seed,
            );
            config.max_evaluations = *max_evaluations;
            config.optimizer = *optimizer;
            Box::new(VqcClassifier::new(config))
        }
        ModelSpec::QsvmKernel {
            encoder,
            repetitions,
            box_bound,
            kernel_cache,
        } => {
            let mut clf = KernelQsvm::with_box_bound(
                EncoderSpec::with_repetitions(*encoder, *repetitions),
                *box_bound,
            );
            clf.cache_dir = kernel_cache.clone();
            Box::new(clf)
        }
        ModelSpec::QsvmAnneal {
            sigma,
            solver,
            scale_features,
        } => {
            let mut clf = AnnealQsvm::new(seed)
                .with_sigma(*sigma)
                .with_solver(*solver);
            clf.scale_features = *scale_features;
            Box::new(clf)
        }
        ModelSpec::Logistic { l2, epochs } => Box::new(LogisticRegression::new(*l2, *epochs, seed)),
        ModelSpec::Gbt {
            n_rounds,
            learning_rate,
            max_depth,
        } => Box::new(GradientBoostedTrees::new(
            *n_rounds,
            *learning_rate,
            *max_depth,
            seed,
        )),
        ModelSpec::ClassicalSvm { sigma, box_bound } => {
            Box::new(ClassicalSvm::new(*sigma, *box_bound))
        }
        ModelSpec::Stack {
            level0,
            level1,
            meta,
            probability_columns,
        } => {
            let l0 = level0
                .iter()
                .enumerate()
                .map(|(i, m)| build_classifier(m, seed.wrapping_add(i as u64 + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            let l1 = level1
                .iter()
                .enumerate()
                .map(|(i, m)| build_classifier(m, seed.wrapping_add(100 + i as u64)))
                .collect::<Result<Vec<_>, _>>()?;
            let meta = build_classifier(meta, seed.wrapping_add(1000))?;
            let stack = StackedClassifier::new(l0, l1, meta)?;
            Box::new(if *probability_columns {
                stack.with_probability_columns()
            } else {
                stack
            })
        }
        ModelSpec::Bag {
            base,
            n_members,
            combine,
        } => {
            let members = (0..*n_members)
                .map(|i| build_classifier(base, seed.wrapping_add(i as u64 + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            Box::new(BaggedClassifier::new(members, *combine, seed)?)
        }
    })
}
