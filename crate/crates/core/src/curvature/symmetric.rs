/// Elementary symmetric polynomials S₀ = 1, S₁, …, Sₙ of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (m, &x) in values.iter().enumerate() {
        for k in (1..=m + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// Elementary symmetric polynomials of `values` with the entries at `skip` removed.
pub fn elementary_symmetric_without(values: &[f64], skip: &[usize]) -> Vec<f64> {
    let kept: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, &x)| x)
        .collect();
    elementary_symmetric(&kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elementary_symmetric(&[]), vec![1.0]);
        assert_eq!(elementary_symmetric_without(&[1.0, 2.0, 3.0], &[1]), vec![1.0, 4.0, 3.0]);
    }
}
