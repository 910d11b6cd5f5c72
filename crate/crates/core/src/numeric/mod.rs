//! Dense tensors, parameter storage and reverse-mode gradients.

mod gradcheck;
mod optim;
mod store;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport, SlotReport};
pub use optim::sgd_step;
pub use store::{Gradients, ParameterStore, SlotId};
pub use tape::{MessageEdge, Tape, Var};
pub use tensor::Tensor;

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(name: &str, t: Tensor) -> (ParameterStore, SlotId) {
        let mut s = ParameterStore::new();
        let id = s.add(name, t).unwrap();
        (s, id)
    }

    #[test]
    fn square_value_and_gradient() {
        let (mut s, x) = store_with("x", Tensor::scalar(3.0));
        let mut tape = Tape::new();
        let v = tape.param(&s, x).unwrap();
        let y = tape.mul(v, v).unwrap();
        assert_eq!(tape.scalar(y).unwrap(), 9.0);
        tape.backward_into(y, &Tensor::scalar(1.0), &mut s).unwrap();
        assert_eq!(s.grad(x).data(), &[6.0]);
    }

    #[test]
    fn concat_values() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::row(&[1.0, 2.0])).unwrap();
        let b = tape.constant(Tensor::row(&[3.0])).unwrap();
        let c = tape.concat_cols(&[a, b]).unwrap();
        assert_eq!(tape.value(c).data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn mean_gradient_is_one_over_k() {
        let (s, x) = store_with("x", Tensor::row(&[1.0, 5.0, -2.0, 4.0]));
        let mut tape = Tape::new();
        let v = tape.param(&s, x).unwrap();
        let m = tape.mean(v).unwrap();
        assert_eq!(tape.scalar(m).unwrap(), 2.0);
        let g = tape.backward(m, &Tensor::scalar(1.0), &s).unwrap();
        assert_eq!(g.get(x).unwrap().data(), &[0.25; 4]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::zeros(2, 3)).unwrap();
        let b = tape.constant(Tensor::zeros(2, 2)).unwrap();
        assert!(matches!(tape.add(a, b), Err(crate::Error::ShapeMismatch { .. })));
        assert!(matches!(tape.matmul(a, a), Err(crate::Error::ShapeMismatch { .. })));
    }

    #[test]
    fn non_finite_intermediate_is_reported() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::scalar(1e300)).unwrap();
        assert!(matches!(tape.mul(a, a), Err(crate::Error::NonFinite(_))));
    }

    #[test]
    fn trace_reuse_after_mutation_fails() {
        let (mut s, x) = store_with("x", Tensor::scalar(3.0));
        let mut tape = Tape::new();
        let v = tape.param(&s, x).unwrap();
        let y = tape.mul(v, v).unwrap();
        s.value_mut(x).data_mut()[0] = 4.0;
        assert!(matches!(
            tape.backward(y, &Tensor::scalar(1.0), &s),
            Err(crate::Error::StaleTrace)
        ));
        assert!(matches!(tape.param(&s, x), Err(crate::Error::StaleTrace)));
    }

    #[test]
    fn sgd_updates_and_zeroes() {
        let (mut s, p) = store_with("p", Tensor::scalar(1.0));
        let mut tape = Tape::new();
        let v = tape.param(&s, p).unwrap();
        let y = tape.scale(v, 2.0).unwrap();
        tape.backward_into(y, &Tensor::scalar(1.0), &mut s).unwrap();
        sgd_step(&mut s, 0.01).unwrap();
        assert_eq!(s.value(p).data(), &[0.98]);
        assert_eq!(s.grad(p).data(), &[0.0]);
        // zero gradient leaves the parameter alone
        sgd_step(&mut s, 0.01).unwrap();
        assert_eq!(s.value(p).data(), &[0.98]);
    }

    #[test]
    fn sgd_rejects_non_finite_gradient() {
        let (mut s, p) = store_with("p", Tensor::scalar(1.0));
        let mut g = s.gradients();
        g.slot_mut(p).data_mut()[0] = f64::NAN;
        s.accumulate(&g).unwrap();
        assert!(matches!(sgd_step(&mut s, 0.1), Err(crate::Error::NonFinite(_))));
        assert_eq!(s.value(p).data(), &[1.0]);
    }

    #[test]
    fn sgd_step_reduces_convex_quadratic() {
        // f(p) = sum((p - c)^2)
        let (mut s, p) = store_with("p", Tensor::row(&[2.0, -1.0, 0.5]));
        let c = Tensor::row(&[0.3, 0.1, -0.2]);
        let f = |s: &ParameterStore, tape: &mut Tape| {
            let v = tape.param(s, p).unwrap();
            let cc = tape.constant(c.clone()).unwrap();
            let d = tape.sub(v, cc).unwrap();
            let sq = tape.mul(d, d).unwrap();
            tape.sum(sq).unwrap()
        };
        let mut tape = Tape::new();
        let out = f(&s, &mut tape);
        let before = tape.scalar(out).unwrap();
        tape.backward_into(out, &Tensor::scalar(1.0), &mut s).unwrap();
        sgd_step(&mut s, 0.1).unwrap();
        let mut tape = Tape::new();
        let out = f(&s, &mut tape);
        assert!(tape.scalar(out).unwrap() < before);
    }

    #[test]
    fn gradcheck_linear_is_exact_and_kink_is_excluded() {
        let (mut s, x) = store_with("x", Tensor::row(&[0.7, -1.3]));
        let w = Tensor::row(&[2.0, 3.0]);
        let report = grad_check(
            &mut s,
            |tape, s| {
                let v = tape.param(s, x)?;
                let c = tape.constant(w.clone())?;
                let p = tape.mul(v, c)?;
                tape.sum(p)
            },
            GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.passed());
        assert!(report.max_rel_error() < 1e-9);

        // hinge away from the kink
        let (mut s, x) = store_with("x", Tensor::scalar(0.4));
        let hinge = |tape: &mut Tape, s: &ParameterStore| {
            let v = tape.param(s, x)?;
            let v = tape.add_scalar(v, -0.1)?;
            tape.hinge(v)
        };
        let r = grad_check(&mut s, hinge, GradCheckOptions::default()).unwrap();
        assert!(r.passed());
        assert_eq!((r.slots[0].checked, r.slots[0].excluded), (1, 0));

        // exactly at the kink
        s.value_mut(x).data_mut()[0] = 0.1;
        let r = grad_check(&mut s, hinge, GradCheckOptions::default()).unwrap();
        assert_eq!((r.slots[0].checked, r.slots[0].excluded), (0, 1));
        assert_eq!(s.value(x).data(), &[0.1]);
    }
}
