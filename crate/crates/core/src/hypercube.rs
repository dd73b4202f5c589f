//! Hypercube topology: vertex bitstrings, adjacency and marked-vertex sampling.
//!
//! A vertex of the degree-`n` hypercube `Q_n` is an `n`-bit string. Two
//! vertices are adjacent when their Hamming distance is exactly one.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Largest hypercube degree the simulator accepts.
pub const MAX_DEGREE: usize = 28;

/// Total draw budget for [`sample_non_adjacent_set`].
pub const SAMPLE_ATTEMPT_CAP: usize = 10_000;

/// Consecutive rejections after which the partial set is discarded and
/// sampling restarts. Greedy placement can paint itself into a corner on
/// small cubes (e.g. {0, 7} on `Q_3` blocks every other vertex).
const RESTART_AFTER: usize = 64;

/// A vertex of `Q_n`, stored as its bitstring value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Checks `value < 2^n`.
    pub fn checked(value: u64, degree: usize) -> Result<Self> {
        if degree > 63 || value >> degree != 0 {
            return Err(Error::VertexOutOfRange { vertex: value, degree });
        }
        Ok(VertexId(value))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// Number of bits in which `x` and `y` differ.
#[inline]
pub fn hamming_distance(x: VertexId, y: VertexId) -> u32 {
    (x.0 ^ y.0).count_ones()
}

/// The neighbor of `x` across edge `direction`, i.e. `x ⊕ e_direction`.
pub fn neighbor(x: VertexId, direction: usize, degree: usize) -> Result<VertexId> {
    if direction >= degree {
        return Err(Error::InvalidDirection { direction, degree });
    }
    Ok(VertexId(x.0 ^ (1u64 << direction)))
}

/// A set of marked (target) vertices of `Q_n`, kept sorted and duplicate-free.
///
/// Construction only checks range and distinctness; use
/// [`MarkedSet::non_adjacent`] when the search scenario requires pairwise
/// Hamming distance ≥ 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MarkedSetRepr", into = "MarkedSetRepr")]
pub struct MarkedSet {
    degree: usize,
    vertices: Vec<VertexId>,
}

#[derive(Serialize, Deserialize)]
struct MarkedSetRepr {
    n: usize,
    vertices: Vec<u64>,
}

impl TryFrom<MarkedSetRepr> for MarkedSet {
    type Error = Error;
    fn try_from(r: MarkedSetRepr) -> Result<Self> {
        MarkedSet::new(r.n, r.vertices)
    }
}

impl From<MarkedSet> for MarkedSetRepr {
    fn from(s: MarkedSet) -> Self {
        MarkedSetRepr {
            n: s.degree,
            vertices: s.vertices.iter().map(|v| v.0).collect(),
        }
    }
}

impl MarkedSet {
    pub fn new<I>(degree: usize, vertices: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        check_degree(degree)?;
        let mut vs = vertices
            .into_iter()
            .map(|v| VertexId::checked(v.into(), degree))
            .collect::<Result<Vec<_>>>()?;
        vs.sort_unstable();
        let before = vs.len();
        vs.dedup();
        if vs.len() != before {
            return Err(Error::config("marked set contains duplicate vertices"));
        }
        Ok(MarkedSet { degree, vertices: vs })
    }

    /// Like [`MarkedSet::new`] but also rejects adjacent pairs.
    pub fn non_adjacent<I>(degree: usize, vertices: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        let set = Self::new(degree, vertices)?;
        if !is_mutually_non_adjacent(&set) {
            return Err(Error::config("marked vertices must be mutually non-adjacent"));
        }
        Ok(set)
    }

    pub fn empty(degree: usize) -> Self {
        MarkedSet {
            degree,
            vertices: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

impl fmt::Display for MarkedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn check_degree(degree: usize) -> Result<()> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::config(format!(
            "hypercube degree must be in 1..={MAX_DEGREE}, got {degree}"
        )));
    }
    Ok(())
}

/// True iff every pair of vertices in `set` is at Hamming distance ≥ 2.
pub fn is_mutually_non_adjacent(set: &MarkedSet) -> bool {
    let vs = set.vertices();
    vs.iter()
        .enumerate()
        .all(|(i, &a)| vs[i + 1..].iter().all(|&b| hamming_distance(a, b) >= 2))
}

/// Draw `k` distinct, mutually non-adjacent vertices of `Q_n` uniformly by
/// rejection.
///
/// Each draw is a uniform vertex; a draw within Hamming distance 1 of the
/// partial set is rejected. Runs of [`RESTART_AFTER`] consecutive rejections
/// discard the partial set. Gives up after [`SAMPLE_ATTEMPT_CAP`] draws.
pub fn sample_non_adjacent_set<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<MarkedSet> {
    check_degree(n)?;
    if k == 0 {
        return Err(Error::config("marked-vertex count k must be at least 1"));
    }
    let fail = Error::SamplingFailed {
        n,
        k,
        attempts: SAMPLE_ATTEMPT_CAP,
    };
    // Independent sets of Q_n hold at most 2^(n-1) vertices (n ≥ 1).
    if n < 64 && k as u64 > (1u64 << (n - 1)).max(1) {
        return Err(fail);
    }
    let size = 1u64 << n;
    let mut chosen: Vec<VertexId> = Vec::with_capacity(k);
    let mut rejected_run = 0;
    for _ in 0..SAMPLE_ATTEMPT_CAP {
        let v = VertexId(rng.random_range(0..size));
        if chosen.iter().all(|&c| hamming_distance(c, v) >= 2) {
            chosen.push(v);
            rejected_run = 0;
            if chosen.len() == k {
                return MarkedSet::new(n, chosen.iter().map(|v| v.0));
            }
        } else {
            rejected_run += 1;
            if rejected_run >= RESTART_AFTER {
                chosen.clear();
                rejected_run = 0;
            }
        }
    }
    Err(fail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hamming_of_sample_pair() {
        let a = VertexId(0b000011111110);
        let b = VertexId(0b010111011010);
        assert_eq!(a.0, 254);
        assert_eq!(b.0, 1498);
        // explicit bit-by-bit count
        let by_hand = (0..12).filter(|i| (a.0 >> i) & 1 != (b.0 >> i) & 1).count();
        assert_eq!(a.0 ^ b.0, 0b010100100100);
        assert_eq!(by_hand, 4);
        assert_eq!(hamming_distance(a, b), 4);
    }

    #[test]
    fn hamming_trivial_cases() {
        assert_eq!(hamming_distance(VertexId(77), VertexId(77)), 0);
        assert_eq!(hamming_distance(VertexId(0), VertexId((1 << 12) - 1)), 12);
    }

    #[test]
    fn neighbor_flips_one_bit() {
        assert_eq!(neighbor(VertexId(0b0000), 2, 4).unwrap(), VertexId(0b0100));
        assert_eq!(neighbor(VertexId(0b0100), 2, 4).unwrap(), VertexId(0b0000));
        assert!(matches!(
            neighbor(VertexId(0), 4, 4),
            Err(Error::InvalidDirection { .. })
        ));
    }

    #[test]
    fn non_adjacency_checks() {
        assert!(is_mutually_non_adjacent(&MarkedSet::new(12, [254u64, 1498]).unwrap()));
        assert!(!is_mutually_non_adjacent(&MarkedSet::new(3, [0u64, 1]).unwrap()));
        assert!(is_mutually_non_adjacent(&MarkedSet::empty(3)));
        assert!(is_mutually_non_adjacent(&MarkedSet::new(3, [5u64]).unwrap()));
        assert!(MarkedSet::non_adjacent(3, [0u64, 1]).is_err());
    }

    #[test]
    fn marked_set_is_canonical() {
        let a = MarkedSet::new(12, [1498u64, 254]).unwrap();
        let b = MarkedSet::new(12, [254u64, 1498]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.vertices()[0], VertexId(254));
        assert!(MarkedSet::new(3, [1u64, 1]).is_err());
        assert!(MarkedSet::new(3, [8u64]).is_err());
    }

    #[test]
    fn marked_set_json_shape() {
        let s = MarkedSet::new(12, [1498u64, 254]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"n":12,"vertices":[254,1498]}"#);
        let back: MarkedSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<MarkedSet>(r#"{"n":3,"vertices":[9]}"#).is_err());
    }

    #[test]
    fn sampling_small_cube_exhaustive_check() {
        // Q_3 admits exactly two independent 4-sets: the even- and odd-weight vertices.
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = sample_non_adjacent_set(3, 4, &mut rng).unwrap();
            assert_eq!(s.len(), 4);
            for (i, &a) in s.vertices().iter().enumerate() {
                for &b in &s.vertices()[i + 1..] {
                    assert!(hamming_distance(a, b) >= 2);
                }
            }
            let parity: Vec<u32> = s.vertices().iter().map(|v| v.0.count_ones() % 2).collect();
            assert!(parity.iter().all(|&p| p == parity[0]));
        }
    }

    #[test]
    fn sampling_impossible_request_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_non_adjacent_set(3, 5, &mut rng),
            Err(Error::SamplingFailed { .. })
        ));
        assert!(sample_non_adjacent_set(3, 0, &mut rng).is_err());
    }

    #[test]
    fn singleton_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = sample_non_adjacent_set(12, 1, &mut rng).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.vertices()[0].0 < 4096);
    }

    proptest! {
        #[test]
        fn neighbor_is_involution(x in 0u64..4096, i in 0usize..12) {
            let y = neighbor(VertexId(x), i, 12).unwrap();
            prop_assert_eq!(hamming_distance(VertexId(x), y), 1);
            prop_assert_eq!(neighbor(y, i, 12).unwrap(), VertexId(x));
        }

        #[test]
        fn samples_are_non_adjacent_and_reproducible(seed in any::<u64>(), k in 1usize..=12) {
            let a = sample_non_adjacent_set(12, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = sample_non_adjacent_set(12, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert!(is_mutually_non_adjacent(&a));
            prop_assert_eq!(a.len(), k);
            prop_assert_eq!(a, b);
        }
    }
}
