use super::ItemId;
use crate::prefs::CategoryId;

pub const MIB: u64 = 1 << 20;

/// A shareable file split into equally sized pieces (the last may be short).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContentItem {
    pub item_id: ItemId,
    pub category: CategoryId,
    pub size_bytes: u64,
    pub piece_size_bytes: u64,
}

impl ContentItem {
    pub fn new(item_id: ItemId, category: CategoryId, size_bytes: u64, piece_size_bytes: u64) -> Self {
        assert!(size_bytes > 0 && piece_size_bytes > 0);
        ContentItem {
            item_id,
            category,
            size_bytes,
            piece_size_bytes,
        }
    }

    pub fn piece_count(&self) -> u32 {
        self.size_bytes.div_ceil(self.piece_size_bytes) as u32
    }

    pub fn piece_bytes(&self, piece: u32) -> u64 {
        let start = piece as u64 * self.piece_size_bytes;
        (self.size_bytes - start).min(self.piece_size_bytes)
    }

    /// Bytes held by a set of pieces of this item.
    pub fn bytes_of(&self, pieces: &PieceSet) -> u64 {
        let n = pieces.count() as u64;
        if n == 0 {
            return 0;
        }
        let last = self.piece_count() - 1;
        if pieces.contains(last) {
            (n - 1) * self.piece_size_bytes + self.piece_bytes(last)
        } else {
            n * self.piece_size_bytes
        }
    }
}

/// The set of files peers may request; item `i` belongs to category
/// `i mod categories`.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    items: Vec<ContentItem>,
    by_category: Vec<Vec<ItemId>>,
}

impl Catalog {
    pub fn uniform(item_count: u32, categories: u32, size_bytes: u64, piece_size_bytes: u64) -> Self {
        let items: Vec<ContentItem> = (0..item_count)
            .map(|i| ContentItem::new(i, i % categories, size_bytes, piece_size_bytes))
            .collect();
        Catalog::from_items(items, categories)
    }

    /// Items must be numbered `0..len` in order.
    pub fn from_items(items: Vec<ContentItem>, categories: u32) -> Self {
        let mut by_category = vec![Vec::new(); categories as usize];
        for (i, item) in items.iter().enumerate() {
            assert_eq!(item.item_id as usize, i, "catalog ids must be dense");
            by_category[item.category as usize].push(item.item_id);
        }
        Catalog { items, by_category }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: ItemId) -> &ContentItem {
        &self.items[id as usize]
    }

    pub fn items(&self) -> &[ContentItem] {
        &self.items
    }

    pub fn in_category(&self, category: CategoryId) -> &[ItemId] {
        self.by_category
            .get(category as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn categories(&self) -> u32 {
        self.by_category.len() as u32
    }
}

/// Fixed-length piece bitmap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PieceSet {
    words: Vec<u64>,
    len: u32,
    count: u32,
}

impl PieceSet {
    pub fn empty(len: u32) -> Self {
        PieceSet {
            words: vec![0; (len as usize).div_ceil(64)],
            len,
            count: 0,
        }
    }

    pub fn full(len: u32) -> Self {
        let mut s = PieceSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.len
    }

    pub fn missing(&self) -> u32 {
        self.len - self.count
    }

    pub fn contains(&self, i: u32) -> bool {
        i < self.len && self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Returns true if newly inserted.
    pub fn insert(&mut self, i: u32) -> bool {
        assert!(i < self.len, "piece {i} out of range {}", self.len);
        let w = &mut self.words[(i / 64) as usize];
        let bit = 1u64 << (i % 64);
        if *w & bit != 0 {
            return false;
        }
        *w |= bit;
        self.count += 1;
        true
    }

    /// Number of pieces in `self` that `other` lacks.
    pub fn count_not_in(&self, other: &PieceSet) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones())
            .sum()
    }

    pub fn has_any_not_in(&self, other: &PieceSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & !b != 0)
    }

    /// Pieces in `self` but not in `other`, ascending.
    pub fn iter_not_in<'a>(&'a self, other: &'a PieceSet) -> impl Iterator<Item = u32> + 'a {
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .flat_map(|(wi, (a, b))| {
                let mut bits = a & !b;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        return None;
                    }
                    let t = bits.trailing_zeros();
                    bits &= bits - 1;
                    Some(wi as u32 * 64 + t)
                })
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        let none = PieceSet::empty(self.len);
        self.iter_not_in(&none).collect::<Vec<_>>().into_iter()
    }
}
