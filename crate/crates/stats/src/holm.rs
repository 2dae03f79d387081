use crate::scalar::Scalar;

/// Holm–Bonferroni step-down adjustment.
///
/// Raw p-values are sorted ascending; the i-th smallest becomes
/// `max_{j <= i} min(1, (m - j + 1) * p_j)`. Output is in input order.
pub fn holm_adjust<T: Scalar>(raw: &[T]) -> Vec<T> {
    let m = raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| raw[a].partial_cmp(&raw[b]).expect("p-values are not NaN"));
    let mut adjusted = vec![T::zero(); m];
    let mut running = T::zero();
    for (rank, &idx) in order.iter().enumerate() {
        let factor = T::lit((m - rank) as f64);
        let candidate = (factor * raw[idx]).min(T::one());
        running = running.max(candidate);
        adjusted[idx] = running;
    }
    adjusted
}
