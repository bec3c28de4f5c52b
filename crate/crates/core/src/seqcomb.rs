//! Index and exponent sequences of normal words, the pattern sets `S`, `∂S`,
//! `A∂S`, the pivot maps `m` and `∂m`, and the `I_n` membership tests.
//!
//! `S` is the set of factors of the three translates (add a constant mod 3)
//! of the bi-infinite pattern `…0 2 1 0 2 1 0 1 2 0 1 2 0…`, whose pivot is the
//! `0` with both neighbours equal to `1`. `∂S` is the set of factors of
//! `…1 1 1 2 2 2…`, and `A∂S` is defined as `Σ⁻¹(S)` where `Σ` takes negated
//! partial sums.

use std::collections::{HashMap, HashSet};
use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric_enum::BallTable;
use crate::tree_group::{child_section, decompose, key, ElementKey, NormalWord, Rot, Syllable};

/// Syllable indices `c(g)` of a word, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct IndexSeq(pub Vec<u8>);

/// Syllable exponents `γ(g)` of a word, in order. Values lie in `{1, 2}` for
/// words, in `{0, 1, 2}` after merging.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ExpSeq(pub Vec<u8>);

impl Deref for IndexSeq {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl Deref for ExpSeq {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PivotKind {
    /// Factor of the increasing half: position 1.
    LeftEnd,
    /// Position `k` with equal neighbours (or the `1 → 2` switch for `∂m`).
    Interior,
    /// Factor of the decreasing half only: position `n`.
    RightEnd,
}

/// A pivot position, 1-based as in the sequence notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PivotInfo {
    pub position: usize,
    pub kind: PivotKind,
}

pub fn index_seq(w: &NormalWord) -> IndexSeq {
    IndexSeq(w.syllables().iter().map(|s| s.index().value()).collect())
}

pub fn exp_seq(w: &NormalWord) -> ExpSeq {
    ExpSeq(w.syllables().iter().map(|s| s.exp().value()).collect())
}

/// Value of the reference pattern at offset `j` from its pivot.
fn pattern_at(j: i64) -> u8 {
    (j.unsigned_abs() % 3) as u8
}

/// Factor test against explicit windows of all three translates. Windows
/// starting more than a period away from the pivot repeat earlier ones.
pub fn in_s(c: &[u8]) -> bool {
    let n = c.len() as i64;
    if n <= 1 {
        return c.iter().all(|&x| x < 3);
    }
    for shift in 0..3u8 {
        for start in -(n + 2)..=3 {
            if c.iter()
                .enumerate()
                .all(|(i, &x)| x == (pattern_at(start + i as i64) + shift) % 3)
            {
                return true;
            }
        }
    }
    false
}

/// A (possibly empty) run of 1s followed by a run of 2s.
pub fn in_ds(g: &[u8]) -> bool {
    g.iter().all(|&x| x == 1 || x == 2) && g.windows(2).all(|p| !(p[0] == 2 && p[1] == 1))
}

/// `Σs = (−∑_{k≤i} s_k mod 3)_i`.
pub fn sigma_transform(s: &[u8]) -> IndexSeq {
    let mut acc = 0u8;
    IndexSeq(
        s.iter()
            .map(|&x| {
                acc = (acc + x % 3) % 3;
                (3 - acc) % 3
            })
            .collect(),
    )
}

/// Membership in `A∂S`, taken to mean `Σs ∈ S`.
pub fn in_ads(s: &[u8]) -> bool {
    in_s(&sigma_transform(s))
}

fn increasing(c: &[u8]) -> bool {
    c.windows(2).all(|p| (p[0] + 1) % 3 == p[1])
}

fn decreasing(c: &[u8]) -> bool {
    c.windows(2).all(|p| (p[1] + 1) % 3 == p[0])
}

/// `m(c)`: 1 for factors of `(012)^∞`, the interior `k` with `c_{k−1} = c_{k+1}`,
/// or `n` for factors of `(021)^∞`. Sequences fitting several cases take the
/// smallest position.
pub fn pivot_m(c: &[u8]) -> Result<PivotInfo> {
    if c.is_empty() || !in_s(c) {
        return Err(Error::Domain(format!(
            "m: {c:?} is not a nonempty member of S"
        )));
    }
    let n = c.len();
    if increasing(c) {
        return Ok(PivotInfo {
            position: 1,
            kind: PivotKind::LeftEnd,
        });
    }
    if let Some(k) = (2..n).find(|&k| c[k - 2] == c[k]) {
        return Ok(PivotInfo {
            position: k,
            kind: PivotKind::Interior,
        });
    }
    debug_assert!(decreasing(c));
    Ok(PivotInfo {
        position: n,
        kind: PivotKind::RightEnd,
    })
}

/// `∂m(γ)`: 1 for all-2 sequences, the `k` with `γ_k = 1, γ_{k+1} = 2`, or `n`
/// for all-1 sequences.
pub fn pivot_dm(g: &[u8]) -> Result<PivotInfo> {
    if g.is_empty() || !in_ds(g) {
        return Err(Error::Domain(format!(
            "∂m: {g:?} is not a nonempty member of ∂S"
        )));
    }
    let n = g.len();
    if g.iter().all(|&x| x == 2) {
        return Ok(PivotInfo {
            position: 1,
            kind: PivotKind::LeftEnd,
        });
    }
    if let Some(k) = (1..n).find(|&k| g[k - 1] == 1 && g[k] == 2) {
        return Ok(PivotInfo {
            position: k,
            kind: PivotKind::Interior,
        });
    }
    Ok(PivotInfo {
        position: n,
        kind: PivotKind::RightEnd,
    })
}

/// `∂m` extended to `A∂S` through `∂m(s) = m(Σs)`.
pub fn pivot_adm(s: &[u8]) -> Result<PivotInfo> {
    pivot_m(&sigma_transform(s))
}

/// `γ̃(g_0)`: exponents of the syllables with index `c_m + 1` (those feeding
/// `t`-letters into the section at `c_m` and `a`-letters into the section at
/// `c_m + 1`), with the two pivot-adjacent entries merged mod 3 when the pivot
/// has a neighbour on both sides.
pub fn tilde_exp_seq(w: &NormalWord) -> Result<ExpSeq> {
    let c = index_seq(w);
    let piv = pivot_m(&c)?;
    let m = piv.position;
    let target = (c[m - 1] + 1) % 3;
    let mut out = Vec::new();
    let merge = piv.kind == PivotKind::Interior && m >= 2 && m < c.len();
    let gam = exp_seq(w);
    let mut k = 1;
    while k <= c.len() {
        if c[k - 1] == target {
            if merge && k == m - 1 {
                out.push((gam[m - 2] + gam[m]) % 3);
                k = m + 2;
                continue;
            }
            out.push(gam[k - 1]);
        }
        k += 1;
    }
    Ok(ExpSeq(out))
}

/// Pattern test of a single word: `(a)` `c ∈ S`, and `(b)` `γ_{m−1} = γ_{m+1}`
/// whenever the pivot has two neighbours on each side (`3 ≤ m ≤ n−2`). This is
/// exactly the condition under which no two same-slot `t`-letters of the level
/// one sections merge.
pub fn syntactic_i1(w: &NormalWord) -> bool {
    syntactic_i1_with_upper(w, 1)
}

/// Variant with the stricter printed range `2 < m < n − 2` for clause (b).
/// Kept for reporting; it accepts words whose sections do merge.
pub fn syntactic_i1_printed_range(w: &NormalWord) -> bool {
    syntactic_i1_with_upper(w, 2)
}

fn syntactic_i1_with_upper(w: &NormalWord, gap: usize) -> bool {
    let c = index_seq(w);
    if c.is_empty() {
        return true;
    }
    let Ok(piv) = pivot_m(&c) else {
        return false;
    };
    let (m, n) = (piv.position, c.len());
    if piv.kind == PivotKind::Interior && m > 2 && m + gap < n {
        let g = exp_seq(w);
        return g[m - 2] == g[m];
    }
    true
}

/// Word-level `I_n`: no syllable is lost in the normalized sections, and every
/// section is again in word-level `I_{n−1}`.
pub fn syntactic_in(w: &NormalWord, n: u32) -> bool {
    if n == 0 || w.is_empty() {
        return true;
    }
    let d = decompose(w);
    let total: usize = d.sections.iter().map(NormalWord::len).sum();
    total == w.len() && d.sections.iter().all(|s| syntactic_in(s, n - 1))
}

/// Smallest `k ≤ max_depth` with `w ∉` word-level `I_k`, if any.
pub fn syntactic_failure_level(w: &NormalWord, max_depth: u32) -> Option<u32> {
    (1..=max_depth).find(|&k| !syntactic_in(w, k))
}

fn minlen_of(table: &BallTable, w: &NormalWord) -> Result<u32> {
    table.minimal_length(w)
}

/// Element-level `I_n` with true minimal lengths from `table`.
pub fn semantic_in(g: &NormalWord, n: u32, table: &BallTable) -> Result<bool> {
    let mut memo = HashMap::new();
    semantic_in_memo(g, n, table, &mut memo)
}

fn semantic_in_memo(
    g: &NormalWord,
    n: u32,
    table: &BallTable,
    memo: &mut HashMap<(ElementKey, u32), bool>,
) -> Result<bool> {
    if n == 0 {
        return Ok(true);
    }
    let entry = table.lookup(g).ok_or_else(|| Error::OutOfRange {
        word: g.to_raw(),
        radius: table.radius(),
    })?;
    if entry.minlen == 0 {
        return Ok(true);
    }
    let k = (entry.key.clone(), n);
    if let Some(&v) = memo.get(&k) {
        return Ok(v);
    }
    // sections of the minimal word have at most minlen syllables, so they lie in the table
    let rep = entry.rep.clone();
    let minlen = entry.minlen;
    let d = decompose(&rep);
    let mut total = 0;
    for s in &d.sections {
        total += minlen_of(table, s)?;
    }
    let mut ok = total == minlen;
    if ok {
        for s in &d.sections {
            if !semantic_in_memo(s, n - 1, table, memo)? {
                ok = false;
                break;
            }
        }
    }
    memo.insert(k, ok);
    Ok(ok)
}

/// Membership in `I = ⋂ I_n`: every section `g_x`, at every depth, satisfies
/// `∑ ℓ((g_x)_i) = ℓ(g_x)`. The set of sections is finite, so this is exact.
pub fn semantic_in_all(g: &NormalWord, table: &BallTable) -> Result<bool> {
    let mut seen: HashSet<ElementKey> = HashSet::new();
    let mut stack = vec![g.clone()];
    while let Some(x) = stack.pop() {
        let entry = table.lookup(&x).ok_or_else(|| Error::OutOfRange {
            word: x.to_raw(),
            radius: table.radius(),
        })?;
        if entry.minlen == 0 || !seen.insert(entry.key.clone()) {
            continue;
        }
        let d = decompose(&entry.rep);
        let mut total = 0;
        for s in &d.sections {
            total += minlen_of(table, s)?;
        }
        if total != entry.minlen {
            return Ok(false);
        }
        stack.extend(d.sections);
    }
    Ok(true)
}

/// Builds the word with index sequence `c` and exponent sequence `gam`.
pub fn word_from_sequences(c: &[u8], gam: &[u8], tail: Rot) -> NormalWord {
    NormalWord::from_syllables(
        c.iter()
            .zip(gam)
            .map(|(&ci, &e)| Syllable::new(Rot::new(ci as i64), Rot::new(e as i64))),
        tail,
    )
}

/// Index sequence of length `n` in `S` with pivot at `m` (1-based) and pivot
/// value `cm`: decreasing toward the pivot, increasing after it.
pub fn s_sequence(n: usize, m: usize, cm: u8) -> Vec<u8> {
    (1..=n)
        .map(|k| {
            let off = m.abs_diff(k);
            ((off % 3) as u8 + cm) % 3
        })
        .collect()
}

/// Members of the family with `c ∈ S`, interior pivot `10 < m < n − 10` and
/// exponent sequence in `∂S`. Deterministic in `seed`.
pub fn not_in_i_family(n: usize, count: usize, seed: u64) -> Vec<NormalWord> {
    if n < 23 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(11..=n - 11);
            let cm = rng.gen_range(0..3u8);
            let switch = rng.gen_range(0..=n);
            let tail = Rot::new(rng.gen_range(0..3));
            let gam: Vec<u8> = (0..n).map(|i| if i < switch { 1 } else { 2 }).collect();
            word_from_sequences(&s_sequence(n, m, cm), &gam, tail)
        })
        .collect()
}

/// The family member with given pivot and `∂m` switch point: `γ_k = 1` for
/// `k ≤ dm`, `2` afterwards.
pub fn not_in_i_member(n: usize, m: usize, cm: u8, dm: usize) -> NormalWord {
    let gam: Vec<u8> = (1..=n).map(|k| if k <= dm { 1 } else { 2 }).collect();
    word_from_sequences(&s_sequence(n, m, cm), &gam, Rot::ZERO)
}

/// The three level-one sections of `w` reindexed so that slot `j` is the
/// section at vertex `c_m + j` (the orientation in which the pivot index is 0).
pub fn oriented_sections(w: &NormalWord) -> Result<[NormalWord; 3]> {
    let c = index_seq(w);
    let piv = pivot_m(&c)?;
    let cm = Rot::new(c[piv.position - 1] as i64);
    Ok(Rot::ALL.map(|j| child_section(w, cm + j)))
}

/// Outcome of evaluating the three pivot relations on one word.
#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub rel1: (usize, usize),
    pub rel2: (usize, usize),
    pub rel3: (usize, usize),
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        self.rel1.0 == self.rel1.1 && self.rel2.0 == self.rel2.1 && self.rel3.0 == self.rel3.1
    }
}

/// Evaluates `∂m(γ(g1)) + 1` vs `m(c(g2))`, `∂m(γ(g2)) + 1` vs `m(c(g0))` and
/// `∂m(γ̃(g0))` vs `m(c(g1))`, with `∂m` taken on `A∂S` via `m ∘ Σ`.
pub fn relation_check(w: &NormalWord) -> Result<RelationCheck> {
    let [g0, g1, g2] = oriented_sections(w)?;
    let dm = |s: &[u8]| pivot_adm(s).map(|p| p.position);
    let m = |x: &NormalWord| pivot_m(&index_seq(x)).map(|p| p.position);
    Ok(RelationCheck {
        rel1: (dm(&exp_seq(&g1))? + 1, m(&g2)?),
        rel2: (dm(&exp_seq(&g2))? + 1, m(&g0)?),
        rel3: (dm(&tilde_exp_seq(w)?)?, m(&g1)?),
    })
}

/// Key of every section `g_x` for `x` of depth at most `depth`.
pub fn section_keys(g: &NormalWord, depth: u32) -> Vec<(NormalWord, ElementKey)> {
    let mut out = Vec::new();
    let mut level = vec![g.clone()];
    for d in 0..=depth {
        for x in &level {
            out.push((x.clone(), key(x)));
        }
        if d == depth {
            break;
        }
        level = level.iter().flat_map(|x| decompose(x).sections).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: `S` is the set of sequences whose consecutive steps are a run of
    /// `−1`s followed by a run of `+1`s (mod 3).
    fn in_s_by_steps(c: &[u8]) -> bool {
        let steps: Vec<u8> = c.windows(2).map(|p| (p[1] + 3 - p[0]) % 3).collect();
        steps.iter().all(|&d| d == 1 || d == 2)
            && steps.windows(2).all(|p| !(p[0] == 1 && p[1] == 2))
    }

    fn all_seqs(len: usize, alphabet: &[u8]) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s| {
                    alphabet.iter().map(move |&x| {
                        let mut t = s.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn in_s_examples() {
        assert!(in_s(&[1, 0, 1]));
        assert!(!in_s(&[0, 1, 0]));
        assert!(in_s(&[]));
        for x in 0..3 {
            assert!(in_s(&[x]));
        }
        assert!(in_s(&[0, 2, 1, 0, 1, 2, 0]));
        assert!(!in_s(&[0, 0]));
    }

    #[test]
    fn in_s_agrees_with_step_oracle() {
        for len in 0..=9 {
            for c in all_seqs(len, &[0, 1, 2]) {
                assert_eq!(in_s(&c), in_s_by_steps(&c), "{c:?}");
            }
        }
    }

    #[test]
    fn in_ds_examples() {
        assert!(in_ds(&[1, 1, 2, 2, 2]));
        assert!(!in_ds(&[2, 1]));
        assert!(in_ds(&[1, 1, 1]));
        assert!(in_ds(&[2, 2]));
        assert!(in_ds(&[]));
        assert!(!in_ds(&[1, 0]));
    }

    #[test]
    fn sigma_examples() {
        assert!(sigma_transform(&[]).is_empty());
        assert_eq!(sigma_transform(&[1, 1, 2]).0, vec![2, 1, 2]);
        assert_eq!(sigma_transform(&[1, 1, 1]).0, vec![2, 1, 0]);
    }

    #[test]
    fn ads_examples() {
        assert!(in_ads(&[1, 1, 2]));
        assert!(in_ads(&[]));
        for len in 0..=12 {
            for s in all_seqs(len, &[1, 2]) {
                if in_ds(&s) {
                    assert!(in_ads(&s), "{s:?}");
                }
            }
        }
    }

    #[test]
    fn pivot_examples() {
        assert_eq!(pivot_m(&[0, 1, 2, 0]).unwrap().position, 1);
        let p = pivot_m(&[0, 2, 1, 0, 1, 2]).unwrap();
        assert_eq!((p.position, p.kind), (4, PivotKind::Interior));
        assert_eq!(pivot_m(&[0, 2, 1]).unwrap().position, 3);
        assert_eq!(pivot_m(&[2]).unwrap().position, 1);
        assert!(pivot_m(&[0, 1, 0]).is_err());
        assert!(pivot_m(&[]).is_err());

        let g = [1, 1, 2, 2];
        assert_eq!(pivot_dm(&g).unwrap().position, 2);
        assert_eq!(pivot_m(&sigma_transform(&g)).unwrap().position, 2);
        assert!(pivot_dm(&[2, 1]).is_err());
    }

    #[test]
    fn dm_equals_m_of_sigma() {
        for len in 1..=12 {
            for s in all_seqs(len, &[1, 2]) {
                if in_ds(&s) {
                    assert_eq!(
                        pivot_dm(&s).unwrap().position,
                        pivot_m(&sigma_transform(&s)).unwrap().position,
                        "{s:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sequence_extraction() {
        assert!(index_seq(&NormalWord::identity()).is_empty());
        let w = NormalWord::from_pairs(&[(0, 1), (1, 2), (0, 1)], 1);
        assert_eq!(index_seq(&w).0, vec![0, 1, 0]);
        assert_eq!(exp_seq(&w).0, vec![1, 2, 1]);
    }

    #[test]
    fn tilde_exp_seq_examples() {
        // m = 1: plain subsequence of index c_1 + 1
        let w = word_from_sequences(&[0, 1, 2, 0, 1], &[1, 2, 2, 1, 1], Rot::ZERO);
        assert_eq!(pivot_m(&index_seq(&w)).unwrap().position, 1);
        assert_eq!(tilde_exp_seq(&w).unwrap().0, vec![2, 1]);

        // n = 13, m = 7, γ6 = γ8 = 1 → merged entry 2
        let c = s_sequence(13, 7, 0);
        let mut g = vec![2u8; 13];
        g[5] = 1;
        g[7] = 1;
        let w = word_from_sequences(&c, &g, Rot::ZERO);
        let t = tilde_exp_seq(&w).unwrap();
        // c = 0212101201 20, index 1 at positions 3, 6, 8, 11 → (γ3, γ6+γ8, γ11)
        assert_eq!(t.0, vec![2, 2, 2]);
        let g1 = oriented_sections(&w).unwrap()[1].clone();
        let total: u8 = t.iter().sum::<u8>() % 3;
        assert_eq!(g1.tail().value(), total);
    }

    #[test]
    fn syntactic_i1_examples() {
        assert!(syntactic_i1(&NormalWord::t()));
        assert!(!syntactic_i1(&word_from_sequences(
            &[0, 1, 0],
            &[1, 1, 1],
            Rot::ZERO
        )));
        let w = word_from_sequences(&[0, 2, 1, 0, 1, 2, 0], &[1, 1, 1, 1, 2, 1, 1], Rot::ZERO);
        assert!(!syntactic_i1(&w));
        assert!(!syntactic_in(&w, 1));
        let d = decompose(&w);
        assert!(d.sections.iter().map(NormalWord::len).sum::<usize>() < 7);
    }

    #[test]
    fn syntactic_i1_is_word_level_i1() {
        for n in 0..=7 {
            for w in crate::metric_enum::candidate_words(n)
                .into_iter()
                .step_by(3)
            {
                assert_eq!(syntactic_i1(&w), syntactic_in(&w, 1), "{w}");
            }
        }
    }

    #[test]
    fn syntactic_in_examples() {
        for n in 0..5 {
            assert!(syntactic_in(&NormalWord::identity(), n));
        }
        assert!(syntactic_in(&NormalWord::t(), 5));
        let bad = word_from_sequences(&[0, 1, 0], &[1, 1, 1], Rot::ZERO);
        for n in 1..5 {
            assert!(!syntactic_in(&bad, n));
        }
    }

    #[test]
    fn family_shape() {
        assert!(not_in_i_family(22, 5, 0).is_empty());
        for w in not_in_i_family(30, 20, 7) {
            let c = index_seq(&w);
            let p = pivot_m(&c).unwrap();
            assert_eq!(p.kind, PivotKind::Interior);
            assert!(p.position > 10 && p.position < 20);
            assert!(in_ds(&exp_seq(&w)));
            assert_eq!(w.len(), 30);
        }
        assert_eq!(not_in_i_family(25, 3, 1), not_in_i_family(25, 3, 1));
    }
}
