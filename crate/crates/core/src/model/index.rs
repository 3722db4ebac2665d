//! Mixed-radix index arithmetic shared by every table in the crate.
//!
//! A scope is an ascending list of variables with their domain sizes. An
//! assignment to the scope maps to a flat index little-endian: the first
//! variable is the least significant digit.

use super::VarId;

/// Encode per-variable value indices (in scope order) into a flat index.
pub fn encode(values: &[usize], radix: &[usize]) -> usize {
    debug_assert_eq!(values.len(), radix.len());
    let mut index = 0;
    let mut stride = 1;
    for (&v, &r) in values.iter().zip(radix) {
        debug_assert!(v < r);
        index += v * stride;
        stride *= r;
    }
    index
}

/// Inverse of [`encode`].
pub fn decode(mut index: usize, radix: &[usize]) -> Vec<usize> {
    radix
        .iter()
        .map(|&r| {
            let v = index % r;
            index /= r;
            v
        })
        .collect()
}

pub fn cardinality(radix: &[usize]) -> usize {
    radix.iter().product()
}

/// Flat index of `vars` read out of a full assignment (indexed by variable id).
pub fn encode_from(vars: &[VarId], radix: &[usize], full: &[usize]) -> usize {
    let mut index = 0;
    let mut stride = 1;
    for (v, &r) in vars.iter().zip(radix) {
        index += full[v.0] * stride;
        stride *= r;
    }
    index
}

/// Write the decoding of `index` over `vars` into a full assignment.
pub fn decode_into(mut index: usize, vars: &[VarId], radix: &[usize], full: &mut [usize]) {
    for (v, &r) in vars.iter().zip(radix) {
        full[v.0] = index % r;
        index /= r;
    }
}

/// Calls `f` once per assignment of `vars`, with the assignment written into
/// `full`. Variables outside `vars` keep whatever value `full` holds.
pub fn for_each_assignment(
    vars: &[VarId],
    radix: &[usize],
    full: &mut [usize],
    mut f: impl FnMut(&[usize]),
) {
    for i in 0..cardinality(radix) {
        decode_into(i, vars, radix, full);
        f(full);
    }
}

/// Sorted union of two ascending variable lists.
pub fn union(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out: Vec<VarId> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn difference(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| !b.contains(v)).collect()
}

pub fn intersection(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| b.contains(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_digit_is_least_significant() {
        assert_eq!(encode(&[1, 0], &[2, 2]), 1);
        assert_eq!(encode(&[0, 1], &[2, 2]), 2);
        assert_eq!(encode(&[2, 1], &[3, 2]), 5);
        assert_eq!(encode(&[], &[]), 0);
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(radix in prop::collection::vec(1usize..5, 0..6), seed in any::<u64>()) {
            let card = cardinality(&radix);
            let index = (seed as usize) % card;
            let values = decode(index, &radix);
            prop_assert_eq!(encode(&values, &radix), index);
        }
    }
}
