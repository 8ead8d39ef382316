use rand::Rng;

use crate::error::{Error, Result};

/// A two-bit message `x = x0 x1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    pub x0: bool,
    pub x1: bool,
}

impl Message {
    pub const ALL: [Message; 4] = [
        Message { x0: false, x1: false },
        Message { x0: false, x1: true },
        Message { x0: true, x1: false },
        Message { x0: true, x1: true },
    ];

    pub fn new(x0: bool, x1: bool) -> Self {
        Self { x0, x1 }
    }

    /// `2 x0 + x1`.
    pub fn index(self) -> usize {
        (self.x0 as usize) << 1 | self.x1 as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i & 3]
    }
}

/// All site pairs `(k, l)`, `1 <= k < l <= N`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexEncodingSet {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl IndexEncodingSet {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation(format!("index-encoding set needs N >= 2, got {n}")));
        }
        let pairs = (1..=n).flat_map(|k| (k + 1..=n).map(move |l| (k, l))).collect();
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn position(&self, pair: (usize, usize)) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        self.pairs[rng.random_range(0..self.pairs.len())]
    }
}

/// Assignment of a message to every pair of an [`IndexEncodingSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageEncodingVector {
    set: IndexEncodingSet,
    entries: Vec<Message>,
}

impl MessageEncodingVector {
    /// Builds from explicit `(pair, message)` entries; every pair must be
    /// covered exactly once.
    pub fn new(n: usize, entries: &[((usize, usize), Message)]) -> Result<Self> {
        let set = IndexEncodingSet::new(n)?;
        let mut slots: Vec<Option<Message>> = vec![None; set.len()];
        for &(pair, msg) in entries {
            let pos =
                set.position(pair).ok_or_else(|| Error::Validation(format!("pair {pair:?} is not in E for N={n}")))?;
            if slots[pos].replace(msg).is_some() {
                return Err(Error::Validation(format!("pair {pair:?} assigned twice")));
            }
        }
        let entries = slots
            .into_iter()
            .zip(set.pairs())
            .map(|(m, p)| m.ok_or_else(|| Error::Validation(format!("pair {p:?} has no message"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { set, entries })
    }

    pub fn constant(n: usize, msg: Message) -> Result<Self> {
        let set = IndexEncodingSet::new(n)?;
        let entries = vec![msg; set.len()];
        Ok(Self { set, entries })
    }

    /// The `index`-th vector in lexicographic order over `X^E` (first pair
    /// is the most significant base-4 digit).
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        let set = IndexEncodingSet::new(n)?;
        let e = set.len();
        if e >= 32 || index >= 1u64 << (2 * e) {
            return Err(Error::Validation(format!("encoding index {index} out of range for N={n}")));
        }
        let entries = (0..e).map(|p| Message::from_index(((index >> (2 * (e - 1 - p))) & 3) as usize)).collect();
        Ok(Self { set, entries })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let set = IndexEncodingSet::new(n)?;
        let entries = (0..set.len()).map(|_| Message::from_index(rng.random_range(0..4))).collect();
        Ok(Self { set, entries })
    }

    pub fn n(&self) -> usize {
        self.set.n()
    }

    pub fn encoding_set(&self) -> &IndexEncodingSet {
        &self.set
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Message)> + '_ {
        self.set.pairs().iter().copied().zip(self.entries.iter().copied())
    }

    pub fn get(&self, pair: (usize, usize)) -> Option<Message> {
        self.set.position(pair).map(|i| self.entries[i])
    }

    /// Entries for pairs inside the first `n - 1` sites.
    pub fn restrict_to_prefix(&self) -> Result<Self> {
        let n = self.n() - 1;
        let entries: Vec<_> = self.iter().filter(|((_, l), _)| *l <= n).collect();
        Self::new(n, &entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_count_is_n_choose_2() {
        for n in 2..12 {
            assert_eq!(IndexEncodingSet::new(n).unwrap().len(), n * (n - 1) / 2);
        }
        assert_eq!(IndexEncodingSet::new(3).unwrap().pairs(), &[(1, 2), (1, 3), (2, 3)]);
        assert!(IndexEncodingSet::new(1).is_err());
    }

    #[test]
    fn lexicographic_extremes() {
        let first = MessageEncodingVector::from_index(3, 0).unwrap();
        assert_eq!(first, MessageEncodingVector::constant(3, Message::new(false, false)).unwrap());
        let last = MessageEncodingVector::from_index(3, 63).unwrap();
        assert_eq!(last, MessageEncodingVector::constant(3, Message::new(true, true)).unwrap());
        assert!(MessageEncodingVector::from_index(3, 64).is_err());
        let one = MessageEncodingVector::from_index(3, 1).unwrap();
        assert_eq!(one.get((2, 3)), Some(Message::new(false, true)));
        assert_eq!(one.get((1, 2)), Some(Message::new(false, false)));
    }

    #[test]
    fn incomplete_vector_is_rejected() {
        let m = Message::new(false, false);
        assert!(MessageEncodingVector::new(3, &[((1, 2), m), ((1, 3), m)]).is_err());
        assert!(MessageEncodingVector::new(3, &[((1, 2), m), ((1, 3), m), ((1, 3), m)]).is_err());
        assert!(MessageEncodingVector::new(3, &[((1, 2), m), ((1, 3), m), ((3, 4), m)]).is_err());
        assert!(MessageEncodingVector::new(3, &[((1, 2), m), ((1, 3), m), ((2, 3), m)]).is_ok());
    }
}
