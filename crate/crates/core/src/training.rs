//! Seeded mini-batch training loop.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Example, Model};
use crate::neural::{adam_step, OptimizerState};
use crate::tensor::Parameters;
use crate::{Error, Result};

pub type Rng = ChaCha8Rng;

/// The crate-wide deterministic generator.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One pass over `data` in a freshly shuffled order. Gradients are summed in
/// sample order within a batch and averaged before each Adam step. Returns
/// the mean per-sample loss, each evaluated before its batch's update.
pub fn train_epoch(
    model: &mut Model,
    opt: &mut OptimizerState,
    data: &[Example],
    batch_size: usize,
    rng: &mut Rng,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if batch_size == 0 {
        return Err(Error::Invalid("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for batch in order.chunks(batch_size) {
        let mut acc = model.zero_gradient();
        for &k in batch {
            let (loss, grad) = model.loss_and_gradient(&data[k])?;
            if !loss.is_finite() {
                return Err(Error::Diverged(loss));
            }
            total += loss;
            acc.add_scaled(&grad, 1.0)?;
        }
        let scale = 1.0 / batch.len() as f64;
        for t in acc.tensors_mut() {
            t.values.iter_mut().for_each(|v| *v *= scale);
        }
        adam_step(opt, model, &acc)?;
        if !model.all_finite() {
            return Err(Error::Diverged(f64::NAN));
        }
    }
    Ok(total / data.len() as f64)
}

/// Mean loss over `data` without updating anything.
pub fn mean_loss(model: &Model, data: &[Example]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total = 0.0;
    for ex in data {
        let out = model.output(&ex.input)?;
        total += match model.task {
            crate::model::Task::Classify => crate::neural::bce_with_logit(out, ex.target)?.0,
            crate::model::Task::Sine => (out - ex.target) * (out - ex.target),
        };
    }
    Ok(total / data.len() as f64)
}
