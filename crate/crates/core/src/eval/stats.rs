use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Two-sided Student-t confidence interval for the mean of `xs`. A single
/// sample gives a degenerate interval.
pub fn t_interval(xs: &[f64], level: f64) -> Option<(f64, f64)> {
    let m = mean(xs)?;
    let n = xs.len();
    if n < 2 {
        return Some((m, m));
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid degrees of freedom")
        .inverse_cdf(0.5 + level / 2.0);
    let half = t * (var / n as f64).sqrt();
    Some((m - half, m + half))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_against_tabulated_quantile() {
        // t(0.975, 9) = 2.262157 from standard tables.
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let (lo, hi) = t_interval(&xs, 0.95).unwrap();
        let half = 2.262157 * (xs.iter().map(|x| (x - 5.5f64).powi(2)).sum::<f64>() / 9.0 / 10.0).sqrt();
        assert!((lo - (5.5 - half)).abs() < 1e-5);
        assert!((hi - (5.5 + half)).abs() < 1e-5);
        assert_eq!(t_interval(&[2.0], 0.95), Some((2.0, 2.0)));
        assert_eq!(t_interval(&[], 0.95), None);
    }
}
