/// Compensated (Neumaier) summation.
pub(crate) fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            carry += (total - t) + v;
        } else {
            carry += (v - t) + total;
        }
        total = t;
    }
    total + carry
}

/// Outcome (+1 or -1) stored at `bit` of an assignment index.
#[inline]
pub(crate) fn outcome(index: usize, bit: usize) -> i8 {
    1 - 2 * ((index >> bit) & 1) as i8
}

/// Product of the outcomes selected by `mask`.
#[inline]
pub(crate) fn parity_sign(index: usize, mask: usize) -> f64 {
    if (index & mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
