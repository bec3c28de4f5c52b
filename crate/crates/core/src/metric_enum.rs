//! Weighted word metric (`ℓ(t^±1) = 1`, `ℓ(a^±1) = 0`), exhaustive ball
//! enumeration with canonical dedup, growth series and the ball cache format.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seqcomb;
use crate::tree_group::{in_commutator_subgroup, key, psi, ElementKey, NormalWord, Rot, Syllable};

pub const CACHE_MAGIC: &[u8; 6] = b"FGBALL";
pub const CACHE_VERSION: u32 = 1;

/// Weighted length of a word: its syllable count.
pub fn weighted_len(w: &NormalWord) -> usize {
    w.len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallEntry {
    pub key: ElementKey,
    pub minlen: u32,
    /// Lexicographically smallest word of length `minlen` for the element.
    pub rep: NormalWord,
}

/// Every element of weighted length at most `radius`, exactly once.
/// Entries are stored by increasing `minlen`, then by representative word.
#[derive(Clone, Debug, Default)]
pub struct BallTable {
    radius: u32,
    entries: Vec<BallEntry>,
    index: HashMap<ElementKey, usize>,
    /// `sphere_start[n]` is the first entry of minimal length `n`.
    sphere_start: Vec<usize>,
}

impl PartialEq for BallTable {
    fn eq(&self, other: &Self) -> bool {
        self.radius == other.radius && self.entries == other.entries
    }
}

impl BallTable {
    fn from_entries(radius: u32, entries: Vec<BallEntry>) -> Result<BallTable> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut sphere_start = vec![0usize; radius as usize + 2];
        let mut prev = 0;
        for (i, e) in entries.iter().enumerate() {
            if e.minlen < prev || e.minlen > radius || e.rep.len() != e.minlen as usize {
                return Err(Error::Corrupt(format!(
                    "entry {i} breaks the table ordering"
                )));
            }
            if index.insert(e.key.clone(), i).is_some() {
                return Err(Error::Corrupt(format!("duplicate key at entry {i}")));
            }
            for s in (prev + 1)..=e.minlen {
                sphere_start[s as usize] = i;
            }
            prev = e.minlen;
        }
        for s in (prev + 1)..=(radius + 1) {
            sphere_start[s as usize] = entries.len();
        }
        Ok(BallTable {
            radius,
            entries,
            index,
            sphere_start,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BallEntry] {
        &self.entries
    }

    /// Entries of minimal length exactly `n`.
    pub fn sphere(&self, n: u32) -> &[BallEntry] {
        let n = n as usize;
        match (self.sphere_start.get(n), self.sphere_start.get(n + 1)) {
            (Some(&lo), Some(&hi)) if n <= self.radius as usize => &self.entries[lo..hi],
            _ => &[],
        }
    }

    pub fn get(&self, key: &ElementKey) -> Option<&BallEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn lookup(&self, w: &NormalWord) -> Option<&BallEntry> {
        self.get(&key(w))
    }

    /// The recorded minimal length, or an out-of-range error. Never falls
    /// back to the syllable count of `g`.
    pub fn minimal_length(&self, g: &NormalWord) -> Result<u32> {
        self.lookup(g)
            .map(|e| e.minlen)
            .ok_or_else(|| Error::OutOfRange {
                word: g.to_raw(),
                radius: self.radius,
            })
    }

    /// Drops every entry beyond `radius`.
    pub fn truncated(&self, radius: u32) -> BallTable {
        if radius >= self.radius {
            return self.clone();
        }
        let end = self.sphere_start[radius as usize + 1];
        BallTable::from_entries(radius, self.entries[..end].to_vec())
            .expect("prefix of a valid table is valid")
    }
}

pub fn minimal_length(g: &NormalWord, table: &BallTable) -> Result<u32> {
    table.minimal_length(g)
}

/// Decides `ℓ(h) ≤ bound` for `bound ≤ 2·radius` without a larger ball. A
/// minimal word longer than the radius splits after `radius` syllables into
/// `u ∈ B(radius)` and a remainder of length at most `bound − radius`.
pub fn length_at_most(h: &NormalWord, bound: u32, table: &BallTable) -> Result<bool> {
    let r = table.radius();
    if bound > 2 * r {
        return Err(Error::Domain(format!(
            "bound {bound} exceeds twice the table radius {r}"
        )));
    }
    if let Some(e) = table.lookup(h) {
        return Ok(e.minlen <= bound);
    }
    if bound <= r {
        return Ok(false);
    }
    let rest = bound - r;
    Ok(table.entries().par_iter().any(|u| {
        table
            .lookup(&u.rep.inverse().multiply(h))
            .is_some_and(|v| v.minlen <= rest)
    }))
}

#[derive(Clone, Copy, Debug)]
pub struct EnumConfig {
    /// Hard cap on the total number of candidate words.
    pub max_candidates: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_candidates: 5_000_000,
            workers: 0,
        }
    }
}

/// Number of normal-form candidate words with exactly `n` syllables, tails included.
pub fn candidates_with_len(n: u32) -> u64 {
    if n == 0 {
        3
    } else {
        3 * 6 * 4u64.pow(n - 1)
    }
}

/// Number of candidate words with at most `radius` syllables.
pub fn candidate_count(radius: u32) -> u64 {
    (0..=radius).map(candidates_with_len).sum()
}

/// Syllable sequences of length `n` with adjacent indices distinct, in
/// lexicographic order on `(index, exponent)`.
pub fn syllable_sequences(n: u32) -> Vec<Vec<Syllable>> {
    let mut seqs: Vec<Vec<Syllable>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(seqs.len() * 6);
        for s in &seqs {
            for syl in Syllable::all() {
                if s.last().is_some_and(|l| l.index() == syl.index()) {
                    continue;
                }
                let mut ext = s.clone();
                ext.push(syl);
                next.push(ext);
            }
        }
        seqs = next;
    }
    seqs
}

/// All candidate words with exactly `n` syllables, in word order.
pub fn candidate_words(n: u32) -> Vec<NormalWord> {
    syllable_sequences(n)
        .into_iter()
        .flat_map(|s| Rot::ALL.map(|tail| NormalWord::from_syllables(s.iter().copied(), tail)))
        .collect()
}

/// Exhaustive ball of weighted radius `radius`.
///
/// Candidates are visited by syllable count, then in word order, and the first
/// occurrence of a key is kept. Every element of length `n` has a normal form
/// with exactly `n` syllables, so that first occurrence carries the true
/// minimal length and the lexicographically smallest minimal word. Keys are
/// computed in parallel; insertion is sequential, so the table does not depend
/// on scheduling.
pub fn enumerate_ball(radius: u32, cfg: &EnumConfig) -> Result<BallTable> {
    let run = || enumerate_ball_inner(radius, cfg);
    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Construction(e.to_string()))?;
        pool.install(run)
    } else {
        run()
    }
}

fn enumerate_ball_inner(radius: u32, cfg: &EnumConfig) -> Result<BallTable> {
    let mut entries: Vec<BallEntry> = Vec::new();
    let mut index: HashMap<ElementKey, usize> = HashMap::new();
    let mut used = 0u64;
    for n in 0..=radius {
        let need = candidates_with_len(n);
        if used + need > cfg.max_candidates {
            let partial = if n == 0 {
                BallTable::default()
            } else {
                BallTable::from_entries(n - 1, entries)?
            };
            return Err(Error::ResourceLimit {
                candidates: candidate_count(radius),
                cap: cfg.max_candidates,
                partial: Box::new(partial),
            });
        }
        used += need;
        let words = candidate_words(n);
        let keys: Vec<ElementKey> = words.par_iter().map(key).collect();
        for (w, k) in words.into_iter().zip(keys) {
            if !index.contains_key(&k) {
                index.insert(k.clone(), entries.len());
                entries.push(BallEntry {
                    key: k,
                    minlen: n,
                    rep: w,
                });
            }
        }
    }
    BallTable::from_entries(radius, entries)
}

/// All minimal-length words of every element of the table, up to `max_len`.
pub fn minimal_words(table: &BallTable, max_len: u32) -> HashMap<ElementKey, Vec<NormalWord>> {
    let max_len = max_len.min(table.radius());
    let mut out: HashMap<ElementKey, Vec<NormalWord>> = HashMap::new();
    for n in 0..=max_len {
        let words = candidate_words(n);
        let keys: Vec<ElementKey> = words.par_iter().map(key).collect();
        for (w, k) in words.into_iter().zip(keys) {
            let e = table.get(&k).expect("every candidate lies in the ball");
            if e.minlen == n {
                out.entry(k).or_default().push(w);
            }
        }
    }
    out
}

/// `γ(n)`, `β(n)` and `δ(n)` for `0 ≤ n ≤ radius`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthSeries {
    pub radius: u32,
    /// `#{g : ℓ(g) ≤ n}`.
    pub gamma: Vec<u64>,
    /// `#{g ∈ G' : ℓ(g) ≤ n}`.
    pub beta: Vec<u64>,
    /// `#{g ∈ I : ℓ(g) = n}`, `I` being the elements without length reduction on any level.
    pub delta: Vec<u64>,
}

impl GrowthSeries {
    /// Sphere sizes `γ(n) − γ(n−1)`.
    pub fn sphere_sizes(&self) -> Vec<u64> {
        let mut prev = 0;
        self.gamma
            .iter()
            .map(|&g| {
                let s = g - prev;
                prev = g;
                s
            })
            .collect()
    }
}

pub fn growth(table: &BallTable) -> Result<GrowthSeries> {
    let radius = table.radius();
    let mut gamma = Vec::new();
    let mut beta = Vec::new();
    let mut delta = Vec::new();
    let (mut g, mut b) = (0u64, 0u64);
    for n in 0..=radius {
        let sphere = table.sphere(n);
        g += sphere.len() as u64;
        b += sphere
            .iter()
            .filter(|e| in_commutator_subgroup(&e.rep))
            .count() as u64;
        let flags: Vec<bool> = sphere
            .par_iter()
            .map(|e| seqcomb::semantic_in_all(&e.rep, table))
            .collect::<Result<_>>()?;
        gamma.push(g);
        beta.push(b);
        delta.push(flags.into_iter().filter(|&x| x).count() as u64);
    }
    Ok(GrowthSeries {
        radius,
        gamma,
        beta,
        delta,
    })
}

/// `(g1, g2, g3) ↦ ψ(g1) · ψ(g2)^a · ψ(g3)^(a²)`. Its level-one sections are
/// `(g1, g2, g3)` and its root is trivial, so it is injective.
pub fn triple_inject(g1: &NormalWord, g2: &NormalWord, g3: &NormalWord) -> Result<NormalWord> {
    let p1 = psi(g1)?;
    let p2 = psi(g2)?.conjugate_by_a(Rot::ONE);
    let p3 = psi(g3)?.conjugate_by_a(Rot::TWO);
    Ok(p1.multiply(&p2).multiply(&p3))
}

/// Ball cache layout (little endian):
/// `FGBALL`, version `u32`, radius `u32`, count `u64`, then per entry
/// key length `u32`, key bytes, minlen `u32`, rep length `u32`, rep in raw letters.
pub fn save_table(table: &BallTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_table(table, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_table(table: &BallTable, out: &mut impl Write) -> Result<()> {
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&table.radius.to_le_bytes())?;
    out.write_all(&(table.entries.len() as u64).to_le_bytes())?;
    for e in &table.entries {
        let k = e.key.as_bytes();
        out.write_all(&(k.len() as u32).to_le_bytes())?;
        out.write_all(k)?;
        out.write_all(&e.minlen.to_le_bytes())?;
        let raw = e.rep.to_raw();
        out.write_all(&(raw.len() as u32).to_le_bytes())?;
        out.write_all(raw.as_bytes())?;
    }
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<BallTable> {
    read_table(&mut BufReader::new(File::open(path)?))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Corrupt("truncated file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_table(r: &mut impl Read) -> Result<BallTable> {
    let mut magic = [0u8; 6];
    read_exact(r, &mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != CACHE_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: CACHE_VERSION,
        });
    }
    let radius = read_u32(r)?;
    let mut count = [0u8; 8];
    read_exact(r, &mut count)?;
    let count = u64::from_le_bytes(count);
    if count > candidate_count(radius.min(20)) {
        return Err(Error::Corrupt(format!("implausible entry count {count}")));
    }
    let mut entries = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let klen = read_u32(r)? as usize;
        if klen > 1 << 24 {
            return Err(Error::Corrupt("implausible key length".into()));
        }
        let mut kb = vec![0u8; klen];
        read_exact(r, &mut kb)?;
        let key = ElementKey::from_bytes(kb)?;
        let minlen = read_u32(r)?;
        let rlen = read_u32(r)? as usize;
        if rlen > 1 << 20 {
            return Err(Error::Corrupt("implausible word length".into()));
        }
        let mut rb = vec![0u8; rlen];
        read_exact(r, &mut rb)?;
        let raw = String::from_utf8(rb).map_err(|_| Error::Corrupt("non-ASCII word".into()))?;
        let rep = NormalWord::parse(&raw).map_err(|e| Error::Corrupt(e.to_string()))?;
        entries.push(BallEntry { key, minlen, rep });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Corrupt("trailing bytes".into()));
    }
    BallTable::from_entries(radius, entries)
}

/// Loads the cache at `path` if it covers `radius`, otherwise enumerates and
/// (re)writes it.
pub fn load_or_build(path: Option<&Path>, radius: u32, cfg: &EnumConfig) -> Result<BallTable> {
    if let Some(p) = path {
        if p.exists() {
            let t = load_table(p)?;
            if t.radius() >= radius {
                return Ok(t.truncated(radius));
            }
        }
    }
    let t = enumerate_ball(radius, cfg)?;
    if let Some(p) = path {
        save_table(&t, p)?;
    }
    Ok(t)
}
