//! Small numeric helpers shared across modules.

/// Correctly rounded sum of a sequence of finite floats.
///
/// Shewchuk's partials algorithm; the result does not depend on the order in
/// which terms are supplied. Falls back to naive summation once a non-finite
/// term shows up.
pub fn exact_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    let mut special = 0.0;
    let mut has_special = false;
    for term in terms {
        if !term.is_finite() {
            special += term;
            has_special = true;
            continue;
        }
        let mut x = term;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if has_special {
        return special + partials.iter().sum::<f64>();
    }
    round_partials(&partials)
}

fn round_partials(partials: &[f64]) -> f64 {
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Half-way case: the remaining partials decide the rounding direction.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Empirical quantile of already sorted data using the left-continuous
/// inverse: the `⌈m·level⌉`-th smallest value.
pub fn sorted_quantile(sorted: &[f64], level: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let m = sorted.len();
    let idx = ((m as f64) * level).ceil() as usize;
    sorted[idx.clamp(1, m) - 1]
}

/// `u ∧ (1 − u)`.
#[inline]
pub fn edge_distance(u: f64) -> f64 {
    u.min(1.0 - u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_sum_beats_naive_cancellation() {
        let terms = [1e100, 1.0, -1e100, 1e-20];
        assert_eq!(exact_sum(terms), 1.0 + 1e-20);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn quantile_is_left_continuous_inverse() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(sorted_quantile(&data, 0.5), 2.0);
        assert_eq!(sorted_quantile(&data, 0.51), 3.0);
        assert_eq!(sorted_quantile(&data, 1.0), 4.0);
        assert_eq!(sorted_quantile(&data, 0.0), 1.0);
    }

    proptest! {
        #[test]
        fn exact_sum_is_order_independent(mut v in prop::collection::vec(-1e6f64..1e6, 0..40), seed in any::<u64>()) {
            let forward = exact_sum(v.iter().copied());
            // deterministic shuffle
            let mut s = seed | 1;
            for i in (1..v.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                v.swap(i, (s % (i as u64 + 1)) as usize);
            }
            prop_assert_eq!(forward, exact_sum(v.iter().copied()));
        }
    }
}
