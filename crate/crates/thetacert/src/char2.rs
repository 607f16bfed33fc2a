//! Theta characteristics over F₂ and the combinatorics of Steiner sets.
//!
//! A characteristic is a pair of bit vectors `(eps, delta)` of length `g`,
//! packed into integers (bit `k` is coordinate `k`). Differences of
//! characteristics are two-torsion points, added by XOR.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

pub const MAX_GENUS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Char2Error {
    #[error("genus {0} outside 1..=16")]
    BadGenus(usize),
    #[error("eps has length {eps}, delta has length {delta}")]
    LengthMismatch { eps: usize, delta: usize },
    #[error("entry {0} is not 0 or 1")]
    BadBit(i64),
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(usize, usize),
    #[error("a pair needs two distinct characteristics")]
    EqualCharacteristics,
    #[error("pairs {0} and {1} share a characteristic")]
    OverlappingPairs(CharPair, CharPair),
    #[error("characteristic {0} is not odd")]
    NotOdd(Characteristic),
    #[error("duplicate characteristic {0}")]
    Duplicate(Characteristic),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    genus: u8,
    eps: u16,
    delta: u16,
}

fn check_genus(g: usize) -> Result<(), Char2Error> {
    if g == 0 || g > MAX_GENUS {
        return Err(Char2Error::BadGenus(g));
    }
    Ok(())
}

fn pack(bits: &[u8]) -> Result<u16, Char2Error> {
    let mut v = 0u16;
    for (k, &b) in bits.iter().enumerate() {
        match b {
            0 => {}
            1 => v |= 1 << k,
            other => return Err(Char2Error::BadBit(other as i64)),
        }
    }
    Ok(v)
}

fn unpack(v: u16, g: usize) -> Vec<u8> {
    (0..g).map(|k| ((v >> k) & 1) as u8).collect()
}

impl Characteristic {
    pub fn new(eps: &[u8], delta: &[u8]) -> Result<Self, Char2Error> {
        if eps.len() != delta.len() {
            return Err(Char2Error::LengthMismatch { eps: eps.len(), delta: delta.len() });
        }
        check_genus(eps.len())?;
        Ok(Self { genus: eps.len() as u8, eps: pack(eps)?, delta: pack(delta)? })
    }

    /// From packed bit masks; bits above `g` are discarded.
    pub fn from_bits(g: usize, eps: u16, delta: u16) -> Result<Self, Char2Error> {
        check_genus(g)?;
        let mask = if g == 16 { u16::MAX } else { (1u16 << g) - 1 };
        Ok(Self { genus: g as u8, eps: eps & mask, delta: delta & mask })
    }

    pub fn genus(&self) -> usize {
        self.genus as usize
    }

    pub fn eps_bits(&self) -> u16 {
        self.eps
    }

    pub fn delta_bits(&self) -> u16 {
        self.delta
    }

    pub fn eps(&self) -> Vec<u8> {
        unpack(self.eps, self.genus())
    }

    pub fn delta(&self) -> Vec<u8> {
        unpack(self.delta, self.genus())
    }

    pub fn parity(&self) -> Parity {
        parity(self)
    }

    pub fn is_odd(&self) -> bool {
        parity(self) == Parity::Odd
    }

    /// Adds a two-torsion point.
    pub fn shift(&self, alpha: TwoTorsion) -> Self {
        Self { genus: self.genus, eps: self.eps ^ alpha.eps, delta: self.delta ^ alpha.delta }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: String = self.eps().iter().map(|b| char::from(b'0' + b)).collect();
        let d: String = self.delta().iter().map(|b| char::from(b'0' + b)).collect();
        write!(f, "[{e};{d}]")
    }
}

#[derive(Serialize, Deserialize)]
struct CharacteristicRepr {
    eps: Vec<i64>,
    delta: Vec<i64>,
}

impl Serialize for Characteristic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CharacteristicRepr {
            eps: self.eps().into_iter().map(i64::from).collect(),
            delta: self.delta().into_iter().map(i64::from).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Characteristic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CharacteristicRepr::deserialize(d)?;
        let to_bits = |v: &[i64]| -> Result<Vec<u8>, Char2Error> {
            v.iter().map(|&b| if b == 0 || b == 1 { Ok(b as u8) } else { Err(Char2Error::BadBit(b)) }).collect()
        };
        let e = to_bits(&r.eps).map_err(de::Error::custom)?;
        let dl = to_bits(&r.delta).map_err(de::Error::custom)?;
        Characteristic::new(&e, &dl).map_err(de::Error::custom)
    }
}

/// A point of order two in the Jacobian, written as a characteristic difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoTorsion {
    pub genus: u8,
    pub eps: u16,
    pub delta: u16,
}

impl TwoTorsion {
    pub fn zero(g: usize) -> Self {
        Self { genus: g as u8, eps: 0, delta: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.eps == 0 && self.delta == 0
    }

    pub fn add(self, other: Self) -> Self {
        Self { genus: self.genus, eps: self.eps ^ other.eps, delta: self.delta ^ other.delta }
    }

    /// All nonzero two-torsion points of genus `g`, in packed order.
    pub fn all_nonzero(g: usize) -> Vec<Self> {
        let n = 1u32 << g;
        let mut out = Vec::with_capacity((n * n - 1) as usize);
        for eps in 0..n {
            for delta in 0..n {
                if eps != 0 || delta != 0 {
                    out.push(Self { genus: g as u8, eps: eps as u16, delta: delta as u16 });
                }
            }
        }
        out
    }
}

impl fmt::Display for TwoTorsion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = Characteristic { genus: self.genus, eps: self.eps, delta: self.delta };
        write!(f, "{c}")
    }
}

/// Unordered pair of distinct characteristics, stored with the smaller first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharPair(Characteristic, Characteristic);

impl CharPair {
    pub fn new(a: Characteristic, b: Characteristic) -> Result<Self, Char2Error> {
        if a.genus != b.genus {
            return Err(Char2Error::GenusMismatch(a.genus(), b.genus()));
        }
        if a == b {
            return Err(Char2Error::EqualCharacteristics);
        }
        Ok(if a < b { Self(a, b) } else { Self(b, a) })
    }

    pub fn first(&self) -> Characteristic {
        self.0
    }

    pub fn second(&self) -> Characteristic {
        self.1
    }

    pub fn label(&self) -> TwoTorsion {
        TwoTorsion { genus: self.0.genus, eps: self.0.eps ^ self.1.eps, delta: self.0.delta ^ self.1.delta }
    }

    pub fn shares_with(&self, other: &Self) -> bool {
        self.0 == other.0 || self.0 == other.1 || self.1 == other.0 || self.1 == other.1
    }
}

impl fmt::Display for CharPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

pub fn parity(c: &Characteristic) -> Parity {
    if (c.eps & c.delta).count_ones() % 2 == 1 {
        Parity::Odd
    } else {
        Parity::Even
    }
}

pub fn all_characteristics(g: usize) -> Result<Vec<Characteristic>, Char2Error> {
    check_genus(g)?;
    let n = 1u32 << g;
    let mut out = Vec::with_capacity((n * n) as usize);
    for eps in 0..n {
        for delta in 0..n {
            out.push(Characteristic { genus: g as u8, eps: eps as u16, delta: delta as u16 });
        }
    }
    Ok(out)
}

pub fn odd_characteristics(g: usize) -> Result<Vec<Characteristic>, Char2Error> {
    Ok(all_characteristics(g)?.into_iter().filter(Characteristic::is_odd).collect())
}

/// `2^{g−1}(2^g − 1)`.
pub fn odd_count(g: usize) -> u64 {
    (1u64 << (g - 1)) * ((1u64 << g) - 1)
}

/// `2^{g−1}(2^g + 1)`.
pub fn even_count(g: usize) -> u64 {
    (1u64 << (g - 1)) * ((1u64 << g) + 1)
}

/// Pairs per complete Steiner set, `2^{g−2}(2^{g−1} − 1)`.
pub fn steiner_set_size(g: usize) -> u64 {
    if g < 2 {
        return 0;
    }
    (1u64 << (g - 2)) * ((1u64 << (g - 1)) - 1)
}

pub fn steiner_label(p: &Characteristic, q: &Characteristic) -> Result<TwoTorsion, Char2Error> {
    Ok(CharPair::new(*p, *q)?.label())
}

/// Whether two disjoint pairs form a syzygetic quadruple (their labels agree).
pub fn is_syzygetic(a: &CharPair, b: &CharPair) -> Result<bool, Char2Error> {
    if a.shares_with(b) {
        return Err(Char2Error::OverlappingPairs(*a, *b));
    }
    Ok(a.label() == b.label())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteinerSetLabel {
    pub alpha: TwoTorsion,
    pub pairs: Vec<CharPair>,
}

/// The Steiner set of `alpha`: all pairs `{θ, θ+α}` with both odd.
pub fn steiner_set(alpha: TwoTorsion) -> Result<SteinerSetLabel, Char2Error> {
    let g = alpha.genus as usize;
    check_genus(g)?;
    let mut pairs = Vec::new();
    if !alpha.is_zero() {
        for c in odd_characteristics(g)? {
            let d = c.shift(alpha);
            if c < d && d.is_odd() {
                pairs.push(CharPair(c, d));
            }
        }
    }
    Ok(SteinerSetLabel { alpha, pairs })
}

/// Groups every unordered pair of the given odd characteristics by label.
pub fn build_steiner_sets(odd: &[Characteristic]) -> Result<BTreeMap<TwoTorsion, SteinerSetLabel>, Char2Error> {
    let mut sorted = odd.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Char2Error::Duplicate(w[0]));
        }
        if w[0].genus != w[1].genus {
            return Err(Char2Error::GenusMismatch(w[0].genus(), w[1].genus()));
        }
    }
    if let Some(c) = sorted.iter().find(|c| !c.is_odd()) {
        return Err(Char2Error::NotOdd(*c));
    }
    let mut map: BTreeMap<TwoTorsion, SteinerSetLabel> = BTreeMap::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            let p = CharPair(*a, *b);
            map.entry(p.label())
                .or_insert_with(|| SteinerSetLabel { alpha: p.label(), pairs: Vec::new() })
                .pairs
                .push(p);
        }
    }
    Ok(map)
}

/// Result of a single certified pairwise test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    Cardinality { expected: usize, found: usize },
    RepresentativesAzygetic,
    SameSetSyzygetic,
    DistinguishedAzygetic,
    TransitivityMargin,
    CrossAzygetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionVerdict {
    Pass,
    Fail { hypothesis: Hypothesis, quadruple: Option<(CharPair, CharPair)> },
    Indeterminate { hypothesis: Hypothesis, quadruple: Option<(CharPair, CharPair)> },
}

impl PartitionVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, PartitionVerdict::Pass)
    }
}

struct Tally {
    fail: Option<PartitionVerdict>,
    indeterminate: Option<PartitionVerdict>,
}

impl Tally {
    fn record(&mut self, outcome: Outcome, hypothesis: Hypothesis, quad: Option<(CharPair, CharPair)>) -> bool {
        match outcome {
            Outcome::Holds => false,
            Outcome::Fails => {
                self.fail = Some(PartitionVerdict::Fail { hypothesis, quadruple: quad });
                true
            }
            Outcome::Indeterminate => {
                if self.indeterminate.is_none() {
                    self.indeterminate = Some(PartitionVerdict::Indeterminate { hypothesis, quadruple: quad });
                }
                false
            }
        }
    }

    fn finish(self) -> PartitionVerdict {
        self.fail.or(self.indeterminate).unwrap_or(PartitionVerdict::Pass)
    }
}

/// Certifies that `s` lies in one Steiner set, given one representative pair
/// per Steiner set in `s_bar` (`2^{2g} − 1` of them).
///
/// `distinguished = (index into s_bar, index into s)`. `transitivity` reports
/// whether `A/ε` exceeds the weak-transitivity bound. A definite failure wins
/// over an indeterminate test; PASS requires every test to hold.
pub fn partition_certify(
    g: usize,
    s: &[CharPair],
    s_bar: &[CharPair],
    distinguished: (usize, usize),
    transitivity: Outcome,
    mut azygetic: impl FnMut(&CharPair, &CharPair) -> Outcome,
    mut syzygetic: impl FnMut(&CharPair, &CharPair) -> Outcome,
) -> PartitionVerdict {
    let expected = (1usize << (2 * g)) - 1;
    if s_bar.len() != expected {
        return PartitionVerdict::Fail {
            hypothesis: Hypothesis::Cardinality { expected, found: s_bar.len() },
            quadruple: None,
        };
    }
    let (ib, is) = distinguished;
    if ib >= s_bar.len() || is >= s.len() {
        return PartitionVerdict::Fail {
            hypothesis: Hypothesis::Cardinality { expected: s.len(), found: is },
            quadruple: None,
        };
    }
    let mut tally = Tally { fail: None, indeterminate: None };
    if tally.record(transitivity, Hypothesis::TransitivityMargin, None) {
        return tally.finish();
    }
    let ds = s[is];
    for (k, t) in s.iter().enumerate() {
        if k != is && tally.record(syzygetic(&ds, t), Hypothesis::SameSetSyzygetic, Some((ds, *t))) {
            return tally.finish();
        }
    }
    for (k, t) in s_bar.iter().enumerate() {
        if k != ib && tally.record(azygetic(&ds, t), Hypothesis::DistinguishedAzygetic, Some((ds, *t))) {
            return tally.finish();
        }
    }
    for i in 0..s_bar.len() {
        for j in (i + 1)..s_bar.len() {
            let (a, b) = (s_bar[i], s_bar[j]);
            if a.shares_with(&b) {
                continue;
            }
            if tally.record(azygetic(&a, &b), Hypothesis::RepresentativesAzygetic, Some((a, b))) {
                return tally.finish();
            }
        }
    }
    tally.finish()
}

/// Strict form: `#s_bar = 2^{2g} − 2`, and every pair in `C(s_bar, 2)` and in
/// `s_bar × s` must test azygetic.
pub fn partition_certify_strict(
    g: usize,
    s: &[CharPair],
    s_bar: &[CharPair],
    mut azygetic: impl FnMut(&CharPair, &CharPair) -> Outcome,
) -> PartitionVerdict {
    let expected = (1usize << (2 * g)) - 2;
    if s_bar.len() != expected {
        return PartitionVerdict::Fail {
            hypothesis: Hypothesis::Cardinality { expected, found: s_bar.len() },
            quadruple: None,
        };
    }
    let mut tally = Tally { fail: None, indeterminate: None };
    for i in 0..s_bar.len() {
        for j in (i + 1)..s_bar.len() {
            let (a, b) = (s_bar[i], s_bar[j]);
            if tally.record(azygetic(&a, &b), Hypothesis::RepresentativesAzygetic, Some((a, b))) {
                return tally.finish();
            }
        }
    }
    for a in s_bar {
        for b in s {
            if tally.record(azygetic(a, b), Hypothesis::CrossAzygetic, Some((*a, *b))) {
                return tally.finish();
            }
        }
    }
    tally.finish()
}
