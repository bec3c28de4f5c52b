//! Exhaustive and seeded checks of the structural lemmas about reduction-free
//! elements. Every suite returns a [`LemmaReport`]; an empty violation list
//! means the statement held on everything tested.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds;
use crate::error::Result;
use crate::metric_enum::{candidate_words, minimal_words, BallTable, GrowthSeries};
use crate::seqcomb::{
    exp_seq, in_ads, in_ds, in_s, index_seq, not_in_i_family, oriented_sections, pivot_adm,
    pivot_dm, pivot_m, relation_check, s_sequence, semantic_in, semantic_in_all, sigma_transform,
    syntactic_failure_level, syntactic_i1, syntactic_i1_printed_range, tilde_exp_seq,
    word_from_sequences, PivotKind,
};
use crate::tree_group::{child_section, decompose, key, ElementKey, NormalWord, Rot};

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub word: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub parameters: Value,
    pub tested: u64,
    pub violations: Vec<Violation>,
    /// Measured quantities that are reported rather than asserted.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub observed: Value,
}

impl LemmaReport {
    fn new(lemma: &str, parameters: Value) -> Self {
        LemmaReport {
            lemma: lemma.to_string(),
            parameters,
            tested: 0,
            violations: Vec::new(),
            observed: Value::Null,
        }
    }

    fn violate(&mut self, w: &NormalWord, detail: impl Into<String>) {
        self.violations.push(Violation {
            word: w.to_raw(),
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Suite names understood by the command line.
pub const SUITES: &[&str] = &[
    "mot-sans-red",
    "mot-sans-red-printed",
    "cara-I",
    "permut",
    "words-not-in-I",
    "structure-I",
    "delta-bounded",
    "equiv-suites",
    "rel-123",
    "w-split",
];

/// Which range of the pivot gets the neighbour condition in the one-level test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRange {
    /// `3 ≤ m ≤ n − 2`.
    TwoSided,
    /// `2 < m < n − 2`.
    Printed,
}

/// One-level characterization: for each element of length at most
/// `max_len`, `I_1` membership holds iff some minimal word passes the
/// pattern test.
pub fn mot_sans_red(table: &BallTable, max_len: u32, range: PivotRange) -> Result<LemmaReport> {
    let max_len = max_len.min(table.radius());
    let mut rep = LemmaReport::new(
        match range {
            PivotRange::TwoSided => "mot-sans-red",
            PivotRange::Printed => "mot-sans-red-printed",
        },
        json!({ "max_len": max_len, "range": range }),
    );
    let mw = minimal_words(table, max_len);
    let test: fn(&NormalWord) -> bool = match range {
        PivotRange::TwoSided => syntactic_i1,
        PivotRange::Printed => syntactic_i1_printed_range,
    };
    for e in table.entries().iter().filter(|e| e.minlen <= max_len) {
        rep.tested += 1;
        let sem = semantic_in(&e.rep, 1, table)?;
        let syn = mw[&e.key].iter().any(test);
        if sem != syn {
            rep.violate(
                &e.rep,
                format!("semantic I1 = {sem}, pattern test on minimal words = {syn}"),
            );
        }
    }
    Ok(rep)
}

/// All section elements of `g` reachable in the tree, one per element.
fn section_elements(g: &NormalWord, table: &BallTable) -> Result<Vec<ElementKey>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut stack = vec![g.clone()];
    while let Some(x) = stack.pop() {
        let k = key(&x);
        if !seen.insert(k.clone()) {
            continue;
        }
        let entry = table.get(&k).ok_or_else(|| crate::Error::OutOfRange {
            word: x.to_raw(),
            radius: table.radius(),
        })?;
        stack.extend(decompose(&entry.rep).sections);
        out.push(k);
    }
    Ok(out)
}

/// Pattern characterization of `I`: membership iff the index sequence of
/// every section (minimal representative from the table) lies in `S`.
/// The observed field also checks the refined form where every section has a
/// minimal word passing the full one-level test.
pub fn cara_i(table: &BallTable, max_len: u32) -> Result<LemmaReport> {
    let max_len = max_len.min(table.radius());
    let mut rep = LemmaReport::new("cara-I", json!({ "max_len": max_len }));
    let mw = minimal_words(table, max_len);
    let mut refined_mismatch = 0u64;
    let mut by_direction: BTreeMap<String, u64> = BTreeMap::new();
    for e in table.entries().iter().filter(|e| e.minlen <= max_len) {
        rep.tested += 1;
        let in_i = semantic_in_all(&e.rep, table)?;
        let secs = section_elements(&e.rep, table)?;
        let pattern = secs
            .iter()
            .all(|k| in_s(&index_seq(&table.get(k).unwrap().rep)));
        let refined = secs.iter().all(|k| mw[k].iter().any(syntactic_i1));
        if refined != in_i {
            refined_mismatch += 1;
        }
        if pattern != in_i {
            *by_direction
                .entry(format!("in I = {in_i}, all c(g_x) in S = {pattern}"))
                .or_default() += 1;
            rep.violate(
                &e.rep,
                format!("in I = {in_i}, every section index sequence in S = {pattern}"),
            );
        }
    }
    rep.observed = json!({
        "mismatches_by_direction": by_direction,
        "refined_one_level_test_mismatches": refined_mismatch,
    });
    Ok(rep)
}

/// Translating all indices by `σ` rotates the first-level sections by `σ`.
pub fn permut(max_syllables: u32) -> LemmaReport {
    let mut rep = LemmaReport::new("permut", json!({ "max_syllables": max_syllables }));
    for n in 0..=max_syllables {
        for w in candidate_words(n) {
            let d = decompose(&w);
            for sigma in Rot::ALL {
                rep.tested += 1;
                let moved = w.translate_indices(sigma);
                let ok = moved.tail() == w.tail()
                    && Rot::ALL.iter().all(|&x| {
                        key(&child_section(&moved, x + sigma))
                            == key(&d.sections[x.value() as usize])
                    });
                if !ok {
                    rep.violate(&w, format!("sections not rotated by {sigma}"));
                }
            }
        }
    }
    rep
}

/// Family members with a far-interior pivot and `∂S` exponents fail word-level
/// `I_k` for some `k ≤ 2`.
pub fn words_not_in_i(n_lo: usize, n_hi: usize, count: usize, seed: u64) -> LemmaReport {
    let mut rep = LemmaReport::new(
        "words-not-in-I",
        json!({ "n_lo": n_lo, "n_hi": n_hi, "count": count, "seed": seed }),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels: BTreeMap<u32, u64> = BTreeMap::new();
    for _ in 0..count {
        let n = rng.gen_range(n_lo.max(23)..=n_hi.max(23));
        let w = not_in_i_family(n, 1, rng.gen()).pop().expect("n ≥ 23");
        rep.tested += 1;
        match syntactic_failure_level(&w, 2) {
            Some(k) => *levels.entry(k).or_default() += 1,
            None => rep.violate(&w, "passes word-level I_2"),
        }
    }
    rep.observed = json!({ "failure_level_histogram": levels });
    rep
}

/// `I_3 ⊆ I_{deep}` on every element of length at most `max_len`.
pub fn structure_i(table: &BallTable, max_len: u32, deep: u32) -> Result<LemmaReport> {
    let max_len = max_len.min(table.radius());
    let mut rep = LemmaReport::new("structure-I", json!({ "max_len": max_len, "deep": deep }));
    let entries: Vec<_> = table
        .entries()
        .iter()
        .filter(|e| e.minlen <= max_len)
        .collect();
    let flags: Vec<(bool, bool)> = entries
        .par_iter()
        .map(|e| {
            Ok((
                semantic_in(&e.rep, 3, table)?,
                semantic_in(&e.rep, deep, table)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut in3 = 0u64;
    for (e, (i3, ideep)) in entries.iter().zip(flags) {
        rep.tested += 1;
        in3 += i3 as u64;
        if i3 && !ideep {
            rep.violate(&e.rep, format!("in I_3 but not in I_{deep}"));
        }
    }
    rep.observed = json!({ "in_I3": in3 });
    Ok(rep)
}

/// `δ(n) ≤ max_{1 ≤ k ≤ small} δ(k)` for `small < n`.
pub fn delta_bounded(growth: &GrowthSeries, small: u32) -> LemmaReport {
    let mut rep = LemmaReport::new(
        "delta-bounded",
        json!({ "small": small, "radius": growth.radius }),
    );
    let small = (small as usize).min(growth.delta.len().saturating_sub(1));
    let bound = growth.delta[1.min(small)..=small]
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    for (n, &d) in growth.delta.iter().enumerate().skip(1) {
        rep.tested += 1;
        if d > bound {
            rep.violations.push(Violation {
                word: String::new(),
                detail: format!("δ({n}) = {d} exceeds the small-length maximum {bound}"),
            });
        }
    }
    rep.observed = json!({ "delta": growth.delta, "small_max": bound });
    rep
}

fn all_12_sequences(len: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u32..1 << len).map(move |bits| (0..len).map(|i| 1 + ((bits >> i) & 1) as u8).collect())
}

/// `s ∈ ∂S ⇒ Σs ∈ S`, `A∂S` membership of every `∂S` word, `∂m = m ∘ Σ`,
/// and the converse `Σs ∈ S ⇒ (s_2, …) ∈ ∂S`.
pub fn equiv_suites(max_len: usize) -> LemmaReport {
    let mut rep = LemmaReport::new("equiv-suites", json!({ "max_len": max_len }));
    let violate = |s: &[u8], detail: &str| Violation {
        word: s.iter().map(|x| char::from(b'0' + x)).collect(),
        detail: detail.to_string(),
    };
    let mut found = Vec::new();
    let mut tested = 0;
    for len in 0..=max_len {
        for s in all_12_sequences(len) {
            tested += 1;
            let sig = sigma_transform(&s);
            if in_ds(&s) {
                if !in_s(&sig) || !in_ads(&s) {
                    found.push(violate(&s, "∂S word whose Σ is not in S"));
                }
                if len > 0
                    && pivot_dm(&s).ok().map(|p| p.position)
                        != pivot_m(&sig).ok().map(|p| p.position)
                {
                    found.push(violate(&s, "∂m differs from m ∘ Σ"));
                }
            }
            if in_s(&sig) != (len == 0 || in_ds(&s[1..])) {
                found.push(violate(&s, "Σs ∈ S does not match s_2.. ∈ ∂S"));
            }
        }
    }
    rep.tested = tested;
    rep.violations = found;
    rep
}

/// Why a word falls outside the hypotheses of the pivot relations, if it does.
pub fn relation_hypotheses(w: &NormalWord) -> std::result::Result<(), &'static str> {
    let c = index_seq(w);
    let piv = pivot_m(&c).map_err(|_| "index sequence not in S")?;
    if piv.kind != PivotKind::Interior {
        return Err("pivot at an end");
    }
    if c[0] != (c[piv.position - 1] + 1) % 3 {
        return Err("orientation c_1 ≠ c_m + 1");
    }
    if !syntactic_i1(w) {
        return Err("not in word-level I_1");
    }
    let secs = oriented_sections(w).map_err(|_| "no pivot")?;
    if !secs.iter().all(|s| in_s(&index_seq(s))) {
        return Err("a section index sequence is not in S");
    }
    let tilde = tilde_exp_seq(w).map_err(|_| "no merged sequence")?;
    let seqs = [exp_seq(&secs[1]).0, exp_seq(&secs[2]).0, tilde.0];
    if !seqs.iter().all(|s| in_ads(s)) {
        return Err("an exponent sequence is not in A∂S");
    }
    if !seqs
        .iter()
        .all(|s| pivot_adm(s).is_ok_and(|p| p.kind == PivotKind::Interior))
    {
        return Err("an exponent pivot at an end");
    }
    Ok(())
}

/// Word with pivot `m ≡ 2 (mod 3)` whose three exponent classes are each a
/// free letter followed by `1^a 2^b`.
fn random_relation_word(rng: &mut ChaCha8Rng) -> NormalWord {
    let n = rng.gen_range(13..=60usize);
    let m = 3 * rng.gen_range(1..=(n - 2) / 3) - 1;
    let cm = rng.gen_range(0..3u8);
    let c = s_sequence(n, m, cm);
    let mut gam = vec![0u8; n];
    for class in 0..3u8 {
        let target = (cm + class) % 3;
        let positions: Vec<usize> = (0..n).filter(|&i| c[i] == target).collect();
        let switch = rng.gen_range(0..=positions.len());
        for (k, &i) in positions.iter().enumerate() {
            gam[i] = if k == 0 {
                rng.gen_range(1..=2)
            } else if k < switch {
                1
            } else {
                2
            };
        }
    }
    // the one-level test wants γ_{m−1} = γ_{m+1}
    gam[m] = gam[m - 2];
    word_from_sequences(&c, &gam, Rot::new(rng.gen_range(0..3)))
}

/// The three pivot relations, in the orientation `c_1 = c_m + 1` and for
/// generic pivots (see [`relation_hypotheses`]): exhaustively over all index
/// sequences in `S` and exponent sequences of length at most `max_len`, then
/// on `random` seeded longer words.
pub fn rel_123(max_len: usize, random: usize, seed: u64) -> LemmaReport {
    let mut rep = LemmaReport::new(
        "rel-123",
        json!({ "max_len": max_len, "random": random, "seed": seed }),
    );
    let mut excluded: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut check = |w: &NormalWord, rep: &mut LemmaReport| -> bool {
        match relation_hypotheses(w) {
            Err(why) => {
                *excluded.entry(why).or_default() += 1;
                false
            }
            Ok(()) => {
                rep.tested += 1;
                match relation_check(w) {
                    Ok(r) if r.holds() => {}
                    Ok(r) => rep.violate(w, format!("{r:?}")),
                    Err(e) => rep.violate(w, e.to_string()),
                }
                true
            }
        }
    };
    for n in 1..=max_len {
        for m in 1..=n {
            for cm in 0..3 {
                let c = s_sequence(n, m, cm);
                for g in all_12_sequences(n) {
                    check(&word_from_sequences(&c, &g, Rot::ZERO), &mut rep);
                }
            }
        }
    }
    let exhaustive = rep.tested;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut drawn = 0u64;
    while accepted < random && drawn < 1000 * random as u64 + 1000 {
        drawn += 1;
        let w = random_relation_word(&mut rng);
        if check(&w, &mut rep) {
            accepted += 1;
        }
    }
    rep.observed = json!({
        "exhaustive_tested": exhaustive,
        "random_tested": accepted,
        "random_drawn": drawn,
        "excluded_by_reason": excluded,
    });
    rep
}

/// Sphere split at `λ = 2`: elements of length `n` that are in `I` or a
/// length-additive product of two elements of `I`, against the counting bound
/// `e^λ (n/λ)^{λ−1} δ(n/λ)^λ` with the increasing envelope of measured `δ`.
pub fn w_split(table: &BallTable, growth: &GrowthSeries, max_len: u32) -> Result<LemmaReport> {
    let max_len = max_len.min(table.radius());
    let mut rep = LemmaReport::new("w-split", json!({ "max_len": max_len, "lambda": 2 }));
    let mut i_by_len: Vec<Vec<NormalWord>> = vec![Vec::new(); max_len as usize + 1];
    let members: Vec<bool> = table
        .entries()
        .par_iter()
        .map(|e| {
            if e.minlen <= max_len {
                semantic_in_all(&e.rep, table)
            } else {
                Ok(false)
            }
        })
        .collect::<Result<_>>()?;
    for (e, inside) in table.entries().iter().zip(members) {
        if inside {
            i_by_len[e.minlen as usize].push(e.rep.clone());
        }
    }
    let envelope = |x: f64| {
        let k = (x.ceil() as usize).min(growth.delta.len() - 1);
        growth.delta[..=k].iter().copied().max().unwrap_or(1).max(1) as f64
    };
    let mut rows = Vec::new();
    for n in 4..=max_len as usize {
        let mut w_less: HashMap<ElementKey, ()> = HashMap::new();
        for x in &i_by_len[n] {
            w_less.insert(key(x), ());
        }
        for k in 1..n {
            let pairs: Vec<ElementKey> = i_by_len[k]
                .par_iter()
                .flat_map_iter(|u| i_by_len[n - k].iter().map(move |v| key(&u.multiply(v))))
                .collect();
            for kk in pairs {
                if table.get(&kk).is_some_and(|e| e.minlen as usize == n) {
                    w_less.insert(kk, ());
                }
            }
        }
        let measured = w_less.len() as f64;
        let bound = bounds::w_less_bound(n as f64, 2.0, envelope)?;
        let sphere = table.sphere(n as u32).len();
        rep.tested += 1;
        if measured > bound {
            rep.violations.push(Violation {
                word: String::new(),
                detail: format!("n = {n}: #W< = {measured} exceeds {bound}"),
            });
        }
        rows.push(json!({ "n": n, "w_less": measured, "w_greater": sphere as f64 - measured, "w_less_bound": bound }));
    }
    rep.observed = json!({ "rows": rows });
    Ok(rep)
}
