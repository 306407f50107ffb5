//! Sorted vertex sets with interval-compressed serialization.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Vertex = u32;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn from_vec(mut v: Vec<Vertex>) -> Self {
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    /// Caller guarantees `v` is strictly increasing.
    pub fn from_sorted(v: Vec<Vertex>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn range(start: Vertex, end: Vertex) -> Self {
        VertexSet((start..end).collect())
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        let mut j = 0;
        for &v in &self.0 {
            while j < other.0.len() && other.0[j] < v {
                j += 1;
            }
            if j == other.0.len() || other.0[j] != v {
                return false;
            }
        }
        true
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|v| !other.contains(*v)).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        VertexSet::from_vec(v)
    }

    /// Maximal half-open runs [a, b) of consecutive vertices.
    pub fn intervals(&self) -> Vec<[Vertex; 2]> {
        let mut out: Vec<[Vertex; 2]> = Vec::new();
        for &v in &self.0 {
            match out.last_mut() {
                Some(last) if last[1] == v => last[1] = v + 1,
                _ => out.push([v, v + 1]),
            }
        }
        out
    }

    pub fn from_intervals(runs: &[[Vertex; 2]]) -> Self {
        let mut v = Vec::new();
        for r in runs {
            v.extend(r[0]..r[1]);
        }
        VertexSet::from_vec(v)
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        VertexSet::from_vec(iter.into_iter().collect())
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.intervals().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let runs = Vec::<[Vertex; 2]>::deserialize(de)?;
        if runs.iter().any(|r| r[0] > r[1]) {
            return Err(serde::de::Error::custom("interval with start after end"));
        }
        Ok(VertexSet::from_intervals(&runs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_round_trip() {
        let s = VertexSet::from_vec(vec![9, 1, 2, 3, 7, 8, 2]);
        assert_eq!(s.intervals(), vec![[1, 4], [7, 10]]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[1,4],[7,10]]");
        assert_eq!(serde_json::from_str::<VertexSet>(&json).unwrap(), s);
    }

    #[test]
    fn set_algebra() {
        let a = VertexSet::from_vec(vec![1, 3, 5, 7]);
        let b = VertexSet::from_vec(vec![3, 7]);
        let c = VertexSet::from_vec(vec![2, 4]);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
        assert!(a.is_disjoint(&c));
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.difference(&b).as_slice(), &[1, 5]);
        assert_eq!(b.union(&c).as_slice(), &[2, 3, 4, 7]);
    }
}
