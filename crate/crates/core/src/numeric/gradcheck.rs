use std::fmt;

use super::{ParameterStore, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Settings for [`grad_check`].
#[derive(Clone, Copy, Debug)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub step: f64,
    /// Largest accepted relative error.
    pub tolerance: f64,
    /// Lower bound on the relative-error denominator, so that gradients
    /// near zero are compared in absolute terms.
    pub floor: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-5,
            tolerance: 1e-4,
            floor: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SlotReport {
    pub name: String,
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates whose finite-difference interval crosses a kink.
    pub excluded: usize,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub slots: Vec<SlotReport>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.slots.iter().all(|s| s.passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.slots.iter().map(|s| s.max_rel_error).fold(0.0, f64::max)
    }

    pub fn slot(&self, name: &str) -> Option<&SlotReport> {
        self.slots.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.slots {
            writeln!(
                f,
                "{:<28} max_rel={:.3e} checked={} excluded={} {}",
                s.name,
                s.max_rel_error,
                s.checked,
                s.excluded,
                if s.passed { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Compares reverse-mode gradients of the scalar `expr` against central
/// finite differences, slot by slot.
///
/// Coordinates where the `±step` evaluations fall on a different ReLU /
/// square-root piece than the base point are reported as excluded instead
/// of compared. `store` is restored bit-exactly afterwards.
pub fn grad_check<F>(store: &mut ParameterStore, expr: F, opts: GradCheckOptions) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &ParameterStore) -> Result<Var>,
{
    let eval = |store: &ParameterStore| -> Result<(f64, Vec<bool>)> {
        let mut tape = Tape::new();
        let out = expr(&mut tape, store)?;
        Ok((tape.scalar(out)?, tape.kink_signature()))
    };

    let mut tape = Tape::new();
    let out = expr(&mut tape, store)?;
    if tape.value(out).len() != 1 {
        return Err(Error::shape("grad_check", "expression must be scalar"));
    }
    let base_sig = tape.kink_signature();
    let analytic = tape.backward(out, &Tensor::scalar(1.0), store)?;
    drop(tape);

    let ids: Vec<_> = store.ids().collect();
    let mut slots = Vec::with_capacity(ids.len());
    for id in ids {
        let n = store.value(id).len();
        let grad = analytic.get(id).cloned();
        let mut report = SlotReport {
            name: store.name(id).to_owned(),
            max_rel_error: 0.0,
            checked: 0,
            excluded: 0,
            passed: true,
        };
        for k in 0..n {
            let orig = store.value(id).data()[k];
            store.value_mut(id).data_mut()[k] = orig + opts.step;
            let plus = eval(store);
            store.value_mut(id).data_mut()[k] = orig - opts.step;
            let minus = eval(store);
            store.value_mut(id).data_mut()[k] = orig;
            let ((fp, sp), (fm, sm)) = (plus?, minus?);
            if sp != base_sig || sm != base_sig {
                report.excluded += 1;
                continue;
            }
            let numeric = (fp - fm) / (2.0 * opts.step);
            let a = grad.as_ref().map_or(0.0, |g| g.data()[k]);
            let denom = a.abs().max(numeric.abs()).max(opts.floor);
            let rel = (a - numeric).abs() / denom;
            report.max_rel_error = report.max_rel_error.max(rel);
            report.checked += 1;
        }
        report.passed = report.max_rel_error <= opts.tolerance;
        slots.push(report);
    }
    Ok(GradCheckReport {
        slots,
        tolerance: opts.tolerance,
    })
}
