//! Fixed-width bitsets used for coverage and feature bookkeeping.
//!
//! The width is fixed at construction and every operation that combines two
//! bitmaps asserts that the widths agree. Node, edge and feature bitmaps are
//! all instances of the same representation; the aliases exist to keep
//! signatures readable.

/// A fixed-width bitset backed by `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitmap {
    width: usize,
    words: Vec<u64>,
}

/// Bitset over node indices of a CFG.
pub type NodeBitmap = Bitmap;
/// Bitset over edge indices of a CFG.
pub type EdgeBitmap = Bitmap;
/// Bitset over feature indices (edges or frontier nodes, depending on mode).
pub type FeatureBitmap = Bitmap;

impl Bitmap {
    /// Creates an all-zero bitmap of the given width.
    pub fn new(width: usize) -> Self {
        Bitmap {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn check_index(&self, bit: usize) {
        assert!(
            bit < self.width,
            "bit index {bit} out of range for bitmap of width {}",
            self.width
        );
    }

    #[inline]
    fn check_width(&self, other: &Bitmap) {
        assert_eq!(
            self.width, other.width,
            "bitmap width mismatch: {} vs {}",
            self.width, other.width
        );
    }

    #[inline]
    pub fn set(&mut self, bit: usize) {
        self.check_index(bit);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    #[inline]
    pub fn clear(&mut self, bit: usize) {
        self.check_index(bit);
        self.words[bit / 64] &= !(1 << (bit % 64));
    }

    #[inline]
    pub fn get(&self, bit: usize) -> bool {
        self.check_index(bit);
        self.words[bit / 64] & (1 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True if the two bitmaps share at least one set bit.
    pub fn intersects(&self, other: &Bitmap) -> bool {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    /// Number of bits set in both bitmaps.
    pub fn intersection_count(&self, other: &Bitmap) -> usize {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_with(&mut self, other: &Bitmap) {
        self.check_width(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Removes every bit of `other` from `self`.
    pub fn subtract(&mut self, other: &Bitmap) {
        self.check_width(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bitmap) {
        self.check_width(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn is_subset_of(&self, other: &Bitmap) -> bool {
        self.check_width(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Iterates over the indices of set bits in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + bit)
                }
            })
        })
    }

    /// Builds a bitmap of the given width from a list of set indices.
    pub fn from_indices(width: usize, bits: &[usize]) -> Self {
        let mut bm = Bitmap::new(width);
        for &b in bits {
            bm.set(b);
        }
        bm
    }
}

impl std::fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bitmap({}; {:?})", self.width, self.iter_ones().collect::<Vec<_>>())
    }
}
