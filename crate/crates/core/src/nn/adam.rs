use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};

/// Moment estimates and step counter for bias-corrected Adam.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    first: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
}

impl Default for AdamState {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }
}

impl AdamState {
    pub fn steps(&self) -> u64 {
        self.step
    }
}

/// One Adam update over a parameter list. When `clip` is set, every
/// parameter is clamped to `[-clip, clip]` afterwards.
pub fn adam_step(
    params: &mut [&mut DenseMatrix],
    grads: &[DenseMatrix],
    state: &mut AdamState,
    lr: f64,
    clip: Option<f64>,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::shape(
            "adam_step",
            format!("{} gradients", params.len()),
            grads.len(),
        ));
    }
    for (p, g) in params.iter().zip(grads) {
        if p.shape() != g.shape() {
            return Err(Error::shape(
                "adam_step",
                format!("{:?}", p.shape()),
                format!("{:?}", g.shape()),
            ));
        }
    }
    if state.first.is_empty() {
        state.first = params
            .iter()
            .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
            .collect();
        state.second = state.first.clone();
    } else if state.first.len() != params.len()
        || state
            .first
            .iter()
            .zip(params.iter())
            .any(|(m, p)| m.shape() != p.shape())
    {
        return Err(Error::invalid("parameter list changed between Adam steps"));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first.iter_mut().zip(state.second.iter_mut()))
    {
        let it = p
            .as_mut_slice()
            .iter_mut()
            .zip(g.as_slice())
            .zip(m.as_mut_slice().iter_mut().zip(v.as_mut_slice()));
        for ((w, &g), (m, v)) in it {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            if let Some(c) = clip {
                *w = w.clamp(-c, c);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(x: f64) -> DenseMatrix {
        DenseMatrix::from_vec(1, 1, vec![x]).unwrap()
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut w = DenseMatrix::from_rows(&[vec![0.3, -0.2]]).unwrap();
        let before = w.clone();
        let mut state = AdamState::default();
        for _ in 0..3 {
            adam_step(
                &mut [&mut w],
                &[DenseMatrix::zeros(1, 2)],
                &mut state,
                0.01,
                None,
            )
            .unwrap();
        }
        assert_eq!(w, before);
    }

    #[test]
    fn first_step_magnitude() {
        for g in [2.5, -0.003, 1e-6] {
            let mut w = scalar(0.0);
            let mut state = AdamState::default();
            adam_step(&mut [&mut w], &[scalar(g)], &mut state, 0.001, None).unwrap();
            let want = -0.001 * g / (g.abs() + 1e-8);
            assert!(
                (w.get(0, 0) - want).abs() < 1e-15,
                "{g}: {} vs {want}",
                w.get(0, 0)
            );
        }
    }

    #[test]
    fn clipping() {
        let mut w = scalar(0.9995);
        let mut state = AdamState::default();
        adam_step(&mut [&mut w], &[scalar(-300.0)], &mut state, 0.3, Some(1.0)).unwrap();
        assert_eq!(w.get(0, 0), 1.0);
    }

    #[test]
    fn shape_mismatch() {
        let mut w = scalar(0.0);
        let mut state = AdamState::default();
        assert!(adam_step(
            &mut [&mut w],
            &[DenseMatrix::zeros(1, 2)],
            &mut state,
            0.1,
            None
        )
        .is_err());
        assert!(adam_step(&mut [&mut w], &[], &mut state, 0.1, None).is_err());
    }

    proptest! {
        #[test]
        fn clipped_weights_stay_bounded(grads in prop::collection::vec(-50.0f64..50.0, 1..40), lr in 0.001f64..2.0) {
            let mut w = DenseMatrix::from_rows(&[vec![0.5, -0.5, 0.0]]).unwrap();
            let mut state = AdamState::default();
            for g in grads {
                let gm = DenseMatrix::from_rows(&[vec![g, -g, g * 0.5]]).unwrap();
                adam_step(&mut [&mut w], &[gm], &mut state, lr, Some(1.0)).unwrap();
                prop_assert!(w.as_slice().iter().all(|x| (-1.0..=1.0).contains(x)));
            }
        }
    }
}
