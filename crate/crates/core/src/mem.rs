//! Counted-byte helpers. Counts are derived from container sizes, not from the
//! allocator, so they are deterministic across runs.

use std::mem::size_of;

/// Approximate heap bytes of a std `HashMap<K, V>` with the given capacity,
/// following the SwissTable layout (one control byte per bucket plus a group of
/// trailing control bytes, buckets rounded to a power of two at 7/8 load).
pub fn hash_map_bytes<K, V>(capacity: usize) -> usize {
    if capacity == 0 {
        return 0;
    }
    let buckets = if capacity < 8 {
        if capacity < 4 {
            4
        } else {
            8
        }
    } else {
        (capacity * 8 / 7).next_power_of_two()
    };
    buckets * (size_of::<(K, V)>() + 1) + 16
}

/// Same as [`hash_map_bytes`] for a `HashSet<T>`.
pub fn hash_set_bytes<T>(capacity: usize) -> usize {
    hash_map_bytes::<T, ()>(capacity)
}
