use crate::bitlinalg::DenseMatrix;
use crate::error::{Error, Result};

/// Mean cross-entropy of `softmax(logits)` over the masked rows, and its
/// gradient. Rows outside the mask receive an exactly-zero gradient.
pub fn masked_softmax_xent(
    logits: &DenseMatrix,
    labels: &[usize],
    mask: &[bool],
) -> Result<(f64, DenseMatrix)> {
    let (n, c) = logits.shape();
    if labels.len() != n || mask.len() != n {
        return Err(Error::shape(
            "masked_softmax_xent",
            format!("{n} labels and mask entries"),
            format!("{} labels, {} mask entries", labels.len(), mask.len()),
        ));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::invalid("loss mask selects no nodes"));
    }
    let inv = 1.0 / count as f64;
    let mut grad = DenseMatrix::zeros(n, c);
    let mut loss = 0.0;
    for i in (0..n).filter(|&i| mask[i]) {
        let y = labels[i];
        if y >= c {
            return Err(Error::invalid(format!(
                "label {y} of node {i} >= {c} classes"
            )));
        }
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        let log_sum = sum.ln();
        loss -= row[y] - max - log_sum;
        for (g, &z) in grad.row_mut(i).iter_mut().zip(row) {
            *g = (z - max).exp() / sum * inv;
        }
        grad.row_mut(i)[y] -= inv;
    }
    Ok((loss * inv, grad))
}

/// Fraction of masked rows whose arg-max equals the label (ties pick the
/// lowest index).
pub fn masked_accuracy(logits: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<f64> {
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::invalid("accuracy mask selects no nodes"));
    }
    let correct = (0..logits.rows())
        .filter(|&i| mask[i])
        .filter(|&i| argmax(logits.row(i)) == labels[i])
        .count();
    Ok(correct as f64 / count as f64)
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_seven_classes() {
        let logits = DenseMatrix::zeros(1, 7);
        let (loss, _) = masked_softmax_xent(&logits, &[3], &[true]).unwrap();
        assert!((loss - 7f64.ln()).abs() < 1e-12);
        assert!((loss - 1.9459).abs() < 1e-4);
    }

    #[test]
    fn confident_correct_prediction() {
        let logits = DenseMatrix::from_rows(&[vec![0.0, 1000.0, 0.0]]).unwrap();
        let (loss, grad) = masked_softmax_xent(&logits, &[1], &[true]).unwrap();
        assert!(loss.abs() < 1e-12);
        assert!(grad.as_slice().iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn empty_mask_rejected() {
        let logits = DenseMatrix::zeros(2, 3);
        assert!(masked_softmax_xent(&logits, &[0, 1], &[false, false]).is_err());
        assert!(masked_accuracy(&logits, &[0, 1], &[false, false]).is_err());
    }

    #[test]
    fn random_case_matches_finite_differences() {
        let logits = DenseMatrix::from_fn(4, 3, |i, j| ((i * 3 + j) as f64 * 1.7).sin() * 2.0);
        let labels = [2, 0, 1, 1];
        let mask = [true, false, true, true];
        let (_, grad) = masked_softmax_xent(&logits, &labels, &mask).unwrap();
        let h = 1e-4;
        for i in 0..4 {
            for j in 0..3 {
                let mut plus = logits.clone();
                plus.set(i, j, logits.get(i, j) + h);
                let mut minus = logits.clone();
                minus.set(i, j, logits.get(i, j) - h);
                let fd = (masked_softmax_xent(&plus, &labels, &mask).unwrap().0
                    - masked_softmax_xent(&minus, &labels, &mask).unwrap().0)
                    / (2.0 * h);
                let g = grad.get(i, j);
                if !mask[i] {
                    assert_eq!(g, 0.0);
                }
                assert!(
                    (fd - g).abs() <= 1e-5 * g.abs().max(fd.abs()) + 1e-10,
                    "({i},{j}) {fd} vs {g}"
                );
            }
        }
    }

    #[test]
    fn accuracy_counts_masked_rows() {
        let logits =
            DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let acc = masked_accuracy(&logits, &[0, 0, 1], &[true, true, false]).unwrap();
        assert_eq!(acc, 0.5);
    }
}
