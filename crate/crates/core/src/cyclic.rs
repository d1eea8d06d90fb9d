//! Branch data arithmetic over `Z/k`.
//!
//! A genus-zero quadratic stratum is recorded by the tuple `kappa` of its
//! zero and pole orders (sum `-4`). A cover datum is a modulus `k` together
//! with residues `a_i` prescribing the local monodromy around the labeled
//! point `i`. The admissibility predicate below singles out the data whose
//! covers carry cylinders in isometric twin pairs: `k = 2*ell` with
//! `ell > 1`, `kappa_i == a_i (mod 2)` for every label, and for every label
//! subset `I` with `sum_I kappa_i = -2` the residue `sum_I a_i` generates the
//! index-two subgroup of `Z/2ell` (equivalently `gcd(sum, 2ell) = 2`).

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Zero/pole orders of a genus-zero quadratic stratum, sorted ascending.
/// Labels are 1-based positions in the sorted tuple, so smaller orders get
/// smaller labels; ties keep their input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumSignature {
    orders: Vec<i64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("signature is empty")]
    Empty,
    #[error("entry {value} at position {position} is below -1")]
    EntryBelowPole { position: usize, value: i64 },
    #[error("orders sum to {sum}, expected -4")]
    SumNotMinusFour { sum: i64 },
}

/// Validate and canonicalize a signature.
pub fn validate_signature(orders: &[i64]) -> Result<StratumSignature, SignatureError> {
    if orders.is_empty() {
        return Err(SignatureError::Empty);
    }
    for (position, &value) in orders.iter().enumerate() {
        if value < -1 {
            return Err(SignatureError::EntryBelowPole { position, value });
        }
    }
    let sum: i64 = orders.iter().sum();
    if sum != -4 {
        return Err(SignatureError::SumNotMinusFour { sum });
    }
    let mut sorted = orders.to_vec();
    sorted.sort_by_key(|&o| o); // stable: ties keep input position
    Ok(StratumSignature { orders: sorted })
}

impl StratumSignature {
    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn s(&self) -> usize {
        self.orders.len()
    }

    pub fn m_odd(&self) -> usize {
        self.orders.iter().filter(|o| o.rem_euclid(2) == 1).count()
    }

    /// Order of the point with the given 1-based label.
    pub fn order_of(&self, label: usize) -> i64 {
        self.orders[label - 1]
    }

    /// All labels except at most one carry a pole. Covers of these bases keep
    /// a boundary circle of each cylinder glued to its twin's.
    pub fn is_hyperelliptic_shape(&self) -> bool {
        self.orders.iter().filter(|&&o| o == -1).count() >= self.s() - 1
    }
}

/// Modulus and residue tuple for a cyclic cover, indexed by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDatum {
    k: u64,
    a: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatumError {
    #[error("modulus {k} is below 2")]
    ModulusTooSmall { k: u64 },
    #[error("residue tuple has length {got}, signature has {expected} labels")]
    LengthMismatch { expected: usize, got: usize },
    #[error("residues sum to {sum} mod {k}, expected 0")]
    SumNonzero { sum: u64, k: u64 },
    #[error("residues generate only the subgroup of index {index} in Z/{k}")]
    NotGenerating { index: u64, k: u64 },
}

/// Validate a residue tuple against a signature. Residues are reduced mod `k`.
pub fn validate_cover_datum(
    sig: &StratumSignature,
    k: u64,
    a: &[i64],
) -> Result<CoverDatum, DatumError> {
    if k < 2 {
        return Err(DatumError::ModulusTooSmall { k });
    }
    if a.len() != sig.s() {
        return Err(DatumError::LengthMismatch {
            expected: sig.s(),
            got: a.len(),
        });
    }
    let reduced: Vec<u64> = a.iter().map(|&x| x.rem_euclid(k as i64) as u64).collect();
    let sum = reduced.iter().fold(0u64, |acc, &x| (acc + x) % k);
    if sum != 0 {
        return Err(DatumError::SumNonzero { sum, k });
    }
    let g = reduced.iter().fold(k, |acc, &x| acc.gcd(&x));
    if g != 1 {
        return Err(DatumError::NotGenerating { index: g, k });
    }
    Ok(CoverDatum { k, a: reduced })
}

impl CoverDatum {
    pub fn k(&self) -> u64 {
        self.k
    }

    /// `k/2` when `k` is even.
    pub fn ell(&self) -> Option<u64> {
        (self.k % 2 == 0).then(|| self.k / 2)
    }

    pub fn residues(&self) -> &[u64] {
        &self.a
    }

    /// Residue at the given 1-based label.
    pub fn residue_of(&self, label: usize) -> u64 {
        self.a[label - 1]
    }
}

/// The covers are translation surfaces exactly when `k` is even and every
/// `a_i` has the parity of `kappa_i`.
pub fn is_square_of_abelian(sig: &StratumSignature, datum: &CoverDatum) -> bool {
    datum.k % 2 == 0
        && sig
            .orders
            .iter()
            .zip(&datum.a)
            .all(|(&o, &r)| o.rem_euclid(2) as u64 == r % 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EwFailure {
    /// `k` odd or `k = 2`.
    EllNotAboveOne,
    ParityMismatch { label: usize },
    /// A label subset with order sum `-2` whose residue sum does not
    /// generate `Z/ell` inside `Z/2ell`.
    BadSubset { labels: Vec<usize>, sum: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EwVerdict {
    pub pass: bool,
    pub failure: Option<EwFailure>,
    pub rank: i64,
    pub dim: i64,
}

/// Rank `m_odd/2 - 1` and dimension `s - 2` of the locus defined by a
/// signature. Both depend on the signature alone.
pub fn rank_dim(sig: &StratumSignature) -> (i64, i64) {
    (sig.m_odd() as i64 / 2 - 1, sig.s() as i64 - 2)
}

/// Full admissibility check. Subsets are enumerated exhaustively over all
/// `2^s` label subsets in increasing bitmask order, so the reported witness
/// is deterministic.
pub fn is_generalized_ew(sig: &StratumSignature, datum: &CoverDatum) -> EwVerdict {
    let (rank, dim) = rank_dim(sig);
    let verdict = |failure: Option<EwFailure>| EwVerdict {
        pass: failure.is_none(),
        failure,
        rank,
        dim,
    };
    if datum.k % 2 != 0 || datum.k == 2 {
        return verdict(Some(EwFailure::EllNotAboveOne));
    }
    for label in 1..=sig.s() {
        if sig.order_of(label).rem_euclid(2) as u64 != datum.residue_of(label) % 2 {
            return verdict(Some(EwFailure::ParityMismatch { label }));
        }
    }
    let s = sig.s();
    for mask in 1u32..(1 << s) {
        let mut order_sum = 0i64;
        let mut residue_sum = 0u64;
        for label in 1..=s {
            if mask >> (label - 1) & 1 == 1 {
                order_sum += sig.order_of(label);
                residue_sum = (residue_sum + datum.residue_of(label)) % datum.k;
            }
        }
        if order_sum == -2 && residue_sum.gcd(&datum.k) != 2 {
            let labels = (1..=s).filter(|l| mask >> (l - 1) & 1 == 1).collect();
            return verdict(Some(EwFailure::BadSubset {
                labels,
                sum: residue_sum,
            }));
        }
    }
    verdict(None)
}

/// An equivalence class of passing cover data: closed under multiplying all
/// residues by a unit of `Z/k` and under permutations of equal-order labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverClass {
    pub k: u64,
    /// Lexicographically least member.
    pub canonical: Vec<u64>,
    /// Every passing tuple in the class, sorted.
    pub members: Vec<Vec<u64>>,
    pub verdict: EwVerdict,
}

impl CoverClass {
    pub fn contains(&self, a: &[u64]) -> bool {
        self.members.iter().any(|m| m == a)
    }
}

/// All admissible data with even `k <= k_max`, one entry per class, ordered
/// by `(k, canonical)`.
pub fn enumerate_cover_data(sig: &StratumSignature, k_max: u64) -> Vec<CoverClass> {
    let mut classes = Vec::new();
    let mut k = 4;
    while k <= k_max {
        let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
        let mut tuple = vec![0u64; sig.s()];
        enumerate_rec(sig, k, 0, 0, &mut tuple, &mut seen, &mut classes);
        k += 2;
    }
    classes.sort_by(|x, y| (x.k, &x.canonical).cmp(&(y.k, &y.canonical)));
    classes
}

fn enumerate_rec(
    sig: &StratumSignature,
    k: u64,
    label0: usize,
    sum: u64,
    tuple: &mut Vec<u64>,
    seen: &mut std::collections::HashSet<Vec<u64>>,
    classes: &mut Vec<CoverClass>,
) {
    let s = sig.s();
    if label0 == s {
        if sum % k != 0 || seen.contains(tuple) {
            return;
        }
        let datum = match validate_cover_datum(sig, k, &tuple.iter().map(|&x| x as i64).collect::<Vec<_>>()) {
            Ok(d) => d,
            Err(_) => return,
        };
        let verdict = is_generalized_ew(sig, &datum);
        if !verdict.pass {
            return;
        }
        let members = class_members(sig, k, tuple);
        for m in &members {
            seen.insert(m.clone());
        }
        let canonical = members[0].clone();
        classes.push(CoverClass {
            k,
            canonical,
            members,
            verdict,
        });
        return;
    }
    // parity of a_i must match kappa_i for the verdict to pass; prune here
    let parity = sig.order_of(label0 + 1).rem_euclid(2) as u64;
    let mut r = if parity == 0 { 0 } else { 1 };
    while r < k {
        tuple[label0] = r;
        enumerate_rec(sig, k, label0 + 1, sum + r, tuple, seen, classes);
        r += 2;
    }
}

/// Orbit of a passing tuple under unit scaling and equal-order label
/// permutations, sorted.
fn class_members(sig: &StratumSignature, k: u64, a: &[u64]) -> Vec<Vec<u64>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..sig.s() {
        if i > 0 && sig.orders[i] == sig.orders[i - 1] {
            blocks.last_mut().unwrap().push(i);
        } else {
            blocks.push(vec![i]);
        }
    }
    let mut members = std::collections::BTreeSet::new();
    for u in (1..k).filter(|u| u.gcd(&k) == 1) {
        let scaled: Vec<u64> = a.iter().map(|&x| x * u % k).collect();
        let mut variants: Vec<Vec<u64>> = vec![Vec::new()];
        for block in &blocks {
            let values: Vec<u64> = block.iter().map(|&i| scaled[i]).collect();
            let mut next = Vec::new();
            for prefix in &variants {
                for perm in multiset_permutations(&values) {
                    let mut t = prefix.clone();
                    t.extend(perm);
                    next.push(t);
                }
            }
            variants = next;
        }
        members.extend(variants);
    }
    members.into_iter().collect()
}

fn multiset_permutations(values: &[u64]) -> Vec<Vec<u64>> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    permute_rec(&mut sorted, 0, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

fn permute_rec(values: &mut Vec<u64>, at: usize, out: &mut Vec<Vec<u64>>) {
    if at == values.len() {
        out.push(values.clone());
        return;
    }
    for i in at..values.len() {
        values.swap(at, i);
        permute_rec(values, at + 1, out);
        values.swap(at, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(orders: &[i64]) -> StratumSignature {
        validate_signature(orders).unwrap()
    }

    fn datum(s: &StratumSignature, k: u64, a: &[i64]) -> CoverDatum {
        validate_cover_datum(s, k, a).unwrap()
    }

    #[test]
    fn signature_validation() {
        let pillow = sig(&[-1, -1, -1, -1]);
        assert_eq!(pillow.s(), 4);
        assert_eq!(pillow.m_odd(), 4);

        let q1 = sig(&[1, -1, -1, -1, -1, -1]);
        assert_eq!(q1.s(), 6);
        assert_eq!(q1.m_odd(), 6);
        // sorted ascending: the order-1 zero takes the last label
        assert_eq!(q1.order_of(6), 1);

        assert_eq!(
            validate_signature(&[-1, -1, -1]),
            Err(SignatureError::SumNotMinusFour { sum: -3 })
        );
        assert_eq!(
            validate_signature(&[-2, -1, -1]),
            Err(SignatureError::EntryBelowPole {
                position: 0,
                value: -2
            })
        );
        assert_eq!(validate_signature(&[]), Err(SignatureError::Empty));
    }

    #[test]
    fn signature_derived_counts_hold() {
        // any valid signature has an even number of odd orders and a pole
        for orders in [
            vec![-1, -1, -1, -1],
            vec![0, -1, -1, -1, -1],
            vec![1, 1, -1, -1, -1, -1, -1, -1],
            vec![2, -1, -1, -1, -1, -1, -1],
        ] {
            let s = sig(&orders);
            assert_eq!(s.m_odd() % 2, 0);
            assert!(s.m_odd() >= 2);
            assert!(s.orders().contains(&-1));
        }
    }

    #[test]
    fn datum_validation() {
        let pillow = sig(&[-1, -1, -1, -1]);
        assert!(validate_cover_datum(&pillow, 4, &[1, 1, 1, 1]).is_ok());
        assert_eq!(
            validate_cover_datum(&pillow, 4, &[2, 2, 2, 2]),
            Err(DatumError::NotGenerating { index: 2, k: 4 })
        );
        assert_eq!(
            validate_cover_datum(&pillow, 4, &[1, 1, 1, 2]),
            Err(DatumError::SumNonzero { sum: 1, k: 4 })
        );
        assert_eq!(
            validate_cover_datum(&pillow, 4, &[1, 1, 1]),
            Err(DatumError::LengthMismatch {
                expected: 4,
                got: 3
            })
        );
    }

    #[test]
    fn square_of_abelian() {
        let pillow = sig(&[-1, -1, -1, -1]);
        assert!(is_square_of_abelian(&pillow, &datum(&pillow, 4, &[1, 1, 1, 1])));
        assert!(is_square_of_abelian(&pillow, &datum(&pillow, 4, &[1, 1, 3, 3])));
        // odd modulus: never a square
        assert!(!is_square_of_abelian(&pillow, &datum(&pillow, 3, &[1, 1, 2, 2])));
    }

    #[test]
    fn generalized_ew_catalog() {
        let pillow = sig(&[-1, -1, -1, -1]);
        assert!(is_generalized_ew(&pillow, &datum(&pillow, 4, &[1, 1, 1, 1])).pass);
        assert!(is_generalized_ew(&pillow, &datum(&pillow, 6, &[3, 1, 1, 1])).pass);

        let q1 = sig(&[1, -1, -1, -1, -1, -1]);
        assert!(is_generalized_ew(&q1, &datum(&q1, 6, &[1, 1, 1, 1, 1, 1])).pass);
    }

    #[test]
    fn generalized_ew_witness() {
        let pillow = sig(&[-1, -1, -1, -1]);
        let v = is_generalized_ew(&pillow, &datum(&pillow, 4, &[1, 1, 3, 3]));
        assert!(!v.pass);
        assert_eq!(
            v.failure,
            Some(EwFailure::BadSubset {
                labels: vec![1, 3],
                sum: 0
            })
        );
    }

    #[test]
    fn ell_must_exceed_one() {
        let pillow = sig(&[-1, -1, -1, -1]);
        let d = datum(&pillow, 2, &[1, 1, 1, 1]);
        assert_eq!(
            is_generalized_ew(&pillow, &d).failure,
            Some(EwFailure::EllNotAboveOne)
        );
    }

    #[test]
    fn rank_dim_formulas() {
        assert_eq!(rank_dim(&sig(&[1, -1, -1, -1, -1, -1])), (2, 4));
        assert_eq!(rank_dim(&sig(&[-1, -1, -1, -1])), (1, 2));
        assert_eq!(rank_dim(&sig(&[0, -1, -1, -1, -1])), (1, 3));
    }

    #[test]
    fn subset_condition_brute_force_agrees() {
        // independent subset scan, written against the raw definition
        let pillow = sig(&[-1, -1, -1, -1]);
        for a in [[1i64, 1, 1, 1], [1, 1, 3, 3], [3, 1, 1, 1]] {
            let k = if a == [3, 1, 1, 1] { 6 } else { 4 };
            let d = datum(&pillow, k, &a);
            let expected = (0usize..16).all(|m| {
                // all orders are -1 here, so the order sum is -|I|
                if m.count_ones() != 2 {
                    return true;
                }
                let asum: u64 = (0..4)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| d.residues()[i])
                    .sum::<u64>()
                    % k;
                num_integer::gcd(asum, k) == 2
            });
            assert_eq!(is_generalized_ew(&pillow, &d).pass, expected);
        }
    }

    #[test]
    fn enumerate_pillowcase() {
        let pillow = sig(&[-1, -1, -1, -1]);
        let classes = enumerate_cover_data(&pillow, 6);
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].k, 4);
        assert_eq!(classes[0].canonical, vec![1, 1, 1, 1]);
        assert!(classes[0].contains(&[3, 3, 3, 3]));
        assert_eq!(classes[1].k, 6);
        assert_eq!(classes[1].canonical, vec![1, 1, 1, 3]);
        // both presentations of the k=6 example land in one class
        assert!(classes[1].contains(&[3, 1, 1, 1]));
        assert!(classes[1].contains(&[1, 1, 1, 3]));

        assert!(enumerate_cover_data(&pillow, 2).is_empty());
    }

    #[test]
    fn enumerate_q1m15_contains_ones() {
        let q1 = sig(&[1, -1, -1, -1, -1, -1]);
        let classes = enumerate_cover_data(&q1, 6);
        assert!(classes
            .iter()
            .any(|c| c.k == 6 && c.contains(&[1, 1, 1, 1, 1, 1])));
    }

    #[test]
    fn enumerate_closed_under_symmetries() {
        let pillow = sig(&[-1, -1, -1, -1]);
        for class in enumerate_cover_data(&pillow, 6) {
            for member in &class.members {
                // unit scaling stays in the class
                for u in (1..class.k).filter(|u| num_integer::gcd(*u, class.k) == 1) {
                    let scaled: Vec<u64> = member.iter().map(|&x| x * u % class.k).collect();
                    assert!(class.contains(&scaled));
                }
                // all labels share order -1, so any permutation stays
                let mut rev = member.clone();
                rev.reverse();
                assert!(class.contains(&rev));
            }
        }
    }
}
