use crate::matrix::Matrix;

/// Row index of the largest entry in each column. Ties go to the lowest index.
pub fn argmax_columns(scores: &Matrix) -> Vec<usize> {
    let mut best = vec![0usize; scores.cols()];
    if scores.rows() == 0 {
        return best;
    }
    let mut max = scores.row(0).to_vec();
    for r in 1..scores.rows() {
        for ((b, m), &x) in best.iter_mut().zip(max.iter_mut()).zip(scores.row(r)) {
            if x > *m {
                *m = x;
                *b = r;
            }
        }
    }
    best
}

/// Fraction of columns whose argmax equals the label. An empty batch scores 0.
pub fn accuracy(scores: &Matrix, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = argmax_columns(scores)
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_right_and_all_wrong() {
        let s = Matrix::from_rows(&[[0.9, 0.1], [0.1, 0.9]]).unwrap();
        assert_eq!(accuracy(&s, &[0, 1]), 1.0);
        assert_eq!(accuracy(&s, &[1, 0]), 0.0);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let mut s = Matrix::zeros(10, 1);
        s.set(3, 0, 2.0);
        s.set(7, 0, 2.0);
        assert_eq!(argmax_columns(&s), vec![3]);
        assert_eq!(accuracy(&s, &[3]), 1.0);
        assert_eq!(accuracy(&s, &[7]), 0.0);
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_maps(
            values in prop::collection::vec(-5.0f64..5.0, 40),
            labels in prop::collection::vec(0usize..10, 4),
            scale in 0.1f64..10.0,
            shift in -3.0f64..3.0,
        ) {
            let s = Matrix::from_vec(10, 4, values).unwrap();
            let before = accuracy(&s, &labels);
            let affine = s.map(|x| scale * x + shift);
            let cubic = s.map(|x| x * x * x + x);
            let exp = s.map(f64::exp);
            prop_assert_eq!(argmax_columns(&affine), argmax_columns(&s));
            prop_assert_eq!(accuracy(&cubic, &labels), before);
            prop_assert_eq!(accuracy(&exp, &labels), before);
        }
    }
}
