use super::ParameterStore;
use crate::error::{Error, Result};

/// Plain gradient descent: `p -= lr * g` for every slot, then zeroes all
/// gradients. Refuses to touch anything if a gradient is not finite.
pub fn sgd_step(store: &mut ParameterStore, learning_rate: f64) -> Result<()> {
    for id in store.ids() {
        if !store.grad(id).all_finite() {
            return Err(Error::NonFinite(format!("gradient of `{}`", store.name(id))));
        }
    }
    let ids: Vec<_> = store.ids().collect();
    for id in ids {
        let (value, grad) = store.slot_mut_pair(id);
        for (p, g) in value.data_mut().iter_mut().zip(grad.data_mut()) {
            *p -= learning_rate * *g;
            *g = 0.0;
        }
    }
    Ok(())
}
