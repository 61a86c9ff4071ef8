use crate::codec::ParamTensor;
use crate::error::{Error, Result};

/// Align-corners linear resampling of `w` (length `L`) to length `l_prime`:
///
/// `out[i] = (1 - a_i) * w[floor(x_i)] + a_i * w[ceil(x_i)]`,
/// `x_i = (L - 1) / (l_prime - 1) * i`, `a_i = x_i - floor(x_i)`.
///
/// Both endpoints map exactly onto the input endpoints.
pub fn interp1d(w: &[f64], l_prime: usize) -> Result<Vec<f64>> {
    let l = w.len();
    if l < 2 {
        return Err(Error::DegenerateLength(l));
    }
    if l_prime < 2 {
        return Err(Error::DegenerateLength(l_prime));
    }
    let span = (l - 1) as u64;
    let steps = (l_prime - 1) as u64;
    Ok((0..l_prime as u64)
        .map(|i| {
            // Integer numerator keeps x_i exact whenever it lands on a grid point.
            let num = span * i;
            let lo = (num / steps) as usize;
            let rem = num % steps;
            if rem == 0 {
                return w[lo];
            }
            let alpha = rem as f64 / steps as f64;
            let (a, b) = (w[lo], w[lo + 1]);
            ((1.0 - alpha) * a + alpha * b).clamp(a.min(b), a.max(b))
        })
        .collect())
}

/// Applies [`interp1d`] to every 1-D slice of a row-major tensor along `axis`.
pub fn interp_axis_f64(
    shape: &[usize],
    data: &[f64],
    axis: usize,
    l_prime: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    if axis >= shape.len() {
        return Err(Error::InvalidAxis {
            axis,
            rank: shape.len(),
        });
    }
    if shape.iter().product::<usize>() != data.len() {
        return Err(Error::Shape(format!(
            "shape {shape:?} does not match {} values",
            data.len()
        )));
    }
    let len = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out_shape = shape.to_vec();
    out_shape[axis] = l_prime;
    let mut out = vec![0f64; outer * l_prime * inner];
    let mut line = vec![0f64; len];
    for o in 0..outer {
        for n in 0..inner {
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[(o * len + j) * inner + n];
            }
            for (j, v) in interp1d(&line, l_prime)?.into_iter().enumerate() {
                out[(o * l_prime + j) * inner + n] = v;
            }
        }
    }
    Ok((out_shape, out))
}

/// [`interp_axis_f64`] on a stored parameter, computed in f64.
pub fn interp_axis(t: &ParamTensor, axis: usize, l_prime: usize) -> Result<ParamTensor> {
    let data: Vec<f64> = t.data.iter().map(|&v| v as f64).collect();
    let (shape, out) = interp_axis_f64(&t.shape, &data, axis, l_prime)?;
    ParamTensor::new(shape, out.into_iter().map(|v| v as f32).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_example() {
        assert_eq!(interp1d(&[1.0, 3.0], 3).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn same_length_is_identity() {
        let w = [0.3, -1.7, 2.5, 9.0, 1e-9];
        assert_eq!(interp1d(&w, w.len()).unwrap(), w.to_vec());
    }

    #[test]
    fn degenerate_lengths() {
        assert!(matches!(interp1d(&[1.0], 4), Err(Error::DegenerateLength(1))));
        assert!(matches!(interp1d(&[1.0, 2.0], 1), Err(Error::DegenerateLength(1))));
        assert!(interp1d(&[], 4).is_err());
    }

    #[test]
    fn identity_matrix_along_axis() {
        let eye = ParamTensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(interp_axis(&eye, 1, 2).unwrap(), eye);
        assert!(matches!(
            interp_axis(&eye, 2, 4),
            Err(Error::InvalidAxis { axis: 2, rank: 2 })
        ));
    }

    #[test]
    fn row_ramps_stay_affine() {
        // rows j*r for r = 1, 2, 3; resampled along axis 1 from 4 to 7
        let data: Vec<f64> = (1..=3).flat_map(|r| (0..4).map(move |j| (j * r) as f64)).collect();
        let (shape, out) = interp_axis_f64(&[3, 4], &data, 1, 7).unwrap();
        assert_eq!(shape, vec![3, 7]);
        for r in 0..3 {
            for i in 0..7 {
                let x = 3.0 / 6.0 * i as f64;
                assert!((out[r * 7 + i] - x * (r + 1) as f64).abs() < 1e-12);
            }
        }
        // axis 0 leaves the columns' own structure intact
        let (shape, out) = interp_axis_f64(&[3, 4], &data, 0, 5).unwrap();
        assert_eq!(shape, vec![5, 4]);
        assert_eq!(&out[..4], &data[..4]);
        assert_eq!(&out[16..], &data[8..]);
    }

    proptest! {
        #[test]
        fn endpoints_and_range(w in prop::collection::vec(-10.0f64..10.0, 2..40), lp in 2usize..200) {
            let out = interp1d(&w, lp).unwrap();
            prop_assert_eq!(out.len(), lp);
            prop_assert_eq!(out[0], w[0]);
            prop_assert_eq!(out[lp - 1], w[w.len() - 1]);
            let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(out.iter().all(|v| lo <= *v && *v <= hi));
        }

        #[test]
        fn affine_sequences_are_exact(a in -5.0f64..5.0, b in -5.0f64..5.0, l in 2usize..50, lp in 2usize..300) {
            let w: Vec<f64> = (0..l).map(|j| a * j as f64 + b).collect();
            let out = interp1d(&w, lp).unwrap();
            for (i, v) in out.iter().enumerate() {
                let x = (l - 1) as f64 / (lp - 1) as f64 * i as f64;
                prop_assert!((v - (a * x + b)).abs() <= 1e-12);
            }
        }

        #[test]
        fn resampling_to_own_length_composes(w in prop::collection::vec(-3.0f64..3.0, 2..30)) {
            let once = interp1d(&w, w.len()).unwrap();
            prop_assert_eq!(interp1d(&once, w.len()).unwrap(), w);
        }
    }
}
