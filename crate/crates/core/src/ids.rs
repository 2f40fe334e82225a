//! Integer newtypes shared by every label structure.

use std::fmt;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn is_null(self) -> bool {
                self.0 == 0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }

        impl From<u32> for $name {
            fn from(v: u32) -> Self {
                $name(v)
            }
        }
    };
}

id_type!(
    /// Dictionary-encoded label. Keys and values share this id space; 0 is never assigned.
    LabelId
);

id_type!(
    /// Names one distinct sorted set of labels. 0 means "unlabeled".
    TupleId
);

id_type!(
    /// Dense 0-based ordinal of a node or an edge within its class.
    EntityId
);

/// End-of-list marker for entity links. Keeps 0 usable as a real entity.
pub const NIL: u32 = u32::MAX;

/// Largest number of entities a single class can hold.
pub const MAX_ENTITIES: usize = (NIL - 1) as usize;
