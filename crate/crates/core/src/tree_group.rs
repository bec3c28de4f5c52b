//! Elements of the Fabrykowski-Gupta group as automorphisms of the ternary rooted tree.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * automorphisms act on the **right**: `(x w)^g = (x + root(g)) w^(g_x)`;
//! * products compose left to right, so `(gh)_x = g_x h_(x + root(g))`;
//! * conjugation is `g^h = h⁻¹ g h`, hence `t_c = t^(a^c) = a⁻ᶜ t aᶜ` and
//!   `t_0 = ⟨a,1,t⟩`, `t_1 = ⟨t,a,1⟩`, `t_2 = ⟨1,t,a⟩`.
//!
//! With these choices the generator recursions and the level-one developments
//! of a word reproduce the usual displayed expansions verbatim (see the
//! conformance tests at the bottom of this file).
//!
//! A [`NormalWord`] is a syllable sequence `t_{c1}^{e1} ⋯ t_{cn}^{en} a^τ` with
//! adjacent indices distinct. Normal words are representatives, not canonical
//! forms; element identity is decided by [`equal`] or by comparing [`key`]s.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of `A = ℤ/3ℤ`: a root rotation, a syllable index or an exponent.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Rot(u8);

impl Rot {
    pub const ZERO: Rot = Rot(0);
    pub const ONE: Rot = Rot(1);
    pub const TWO: Rot = Rot(2);
    pub const ALL: [Rot; 3] = [Rot(0), Rot(1), Rot(2)];

    pub const fn new(v: i64) -> Rot {
        Rot(v.rem_euclid(3) as u8)
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `k · self` in `ℤ/3ℤ`.
    pub const fn times(self, k: u64) -> Rot {
        Rot(((self.0 as u64 * (k % 3)) % 3) as u8)
    }

    /// Order of the rotation as a permutation of the first level.
    pub const fn order(self) -> u64 {
        if self.0 == 0 {
            1
        } else {
            3
        }
    }
}

impl Add for Rot {
    type Output = Rot;
    fn add(self, rhs: Rot) -> Rot {
        Rot((self.0 + rhs.0) % 3)
    }
}

impl Sub for Rot {
    type Output = Rot;
    fn sub(self, rhs: Rot) -> Rot {
        Rot((self.0 + 3 - rhs.0) % 3)
    }
}

impl Neg for Rot {
    type Output = Rot;
    fn neg(self) -> Rot {
        Rot((3 - self.0) % 3)
    }
}

impl AddAssign for Rot {
    fn add_assign(&mut self, rhs: Rot) {
        *self = *self + rhs;
    }
}

impl SubAssign for Rot {
    fn sub_assign(&mut self, rhs: Rot) {
        *self = *self - rhs;
    }
}

impl fmt::Display for Rot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A vertex of the tree, i.e. a word over `A`. The empty path is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub Vec<Rot>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, x: Rot) -> Vertex {
        let mut path = self.0.clone();
        path.push(x);
        Vertex(path)
    }

    /// All vertices of the given depth, in lexicographic order.
    pub fn level(depth: usize) -> impl Iterator<Item = Vertex> {
        let count = 3usize.pow(depth as u32);
        (0..count).map(move |mut idx| {
            let mut path = vec![Rot::ZERO; depth];
            for slot in path.iter_mut().rev() {
                *slot = Rot::new((idx % 3) as i64);
                idx /= 3;
            }
            Vertex(path)
        })
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.0 {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(pos, ch)| match ch {
                '0' => Ok(Rot::ZERO),
                '1' => Ok(Rot::ONE),
                '2' => Ok(Rot::TWO),
                _ => Err(Error::Parse { pos, ch }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

impl From<&[u8]> for Vertex {
    fn from(path: &[u8]) -> Self {
        Vertex(path.iter().map(|&x| Rot::new(x as i64)).collect())
    }
}

/// One raw generator letter. Uppercase in the text syntax denotes the inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    A,
    AInv,
    T,
    TInv,
}

impl Letter {
    pub fn from_char(ch: char) -> Option<Letter> {
        match ch {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            't' => Some(Letter::T),
            'T' => Some(Letter::TInv),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::T => 't',
            Letter::TInv => 'T',
        }
    }
}

/// Parses the `{a, A, t, T}` letter syntax. Whitespace is not accepted.
pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .enumerate()
        .map(|(pos, ch)| Letter::from_char(ch).ok_or(Error::Parse { pos, ch }))
        .collect()
}

/// `t_c^e` with `e ∈ {1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    index: Rot,
    exp: Rot,
}

impl Syllable {
    /// Panics if `exp` is zero; a vanishing syllable is not a syllable.
    pub fn new(index: Rot, exp: Rot) -> Syllable {
        assert!(!exp.is_zero(), "syllable exponent must be nonzero");
        Syllable { index, exp }
    }

    pub fn index(self) -> Rot {
        self.index
    }

    pub fn exp(self) -> Rot {
        self.exp
    }

    /// The six nontrivial syllables `t_c^e`, ordered by `(c, e)`.
    pub fn all() -> impl Iterator<Item = Syllable> {
        Rot::ALL
            .into_iter()
            .flat_map(|c| [Rot::ONE, Rot::TWO].map(|e| Syllable::new(c, e)))
    }
}

/// Word of the form `t_{c1}^{e1} ⋯ t_{cn}^{en} a^τ` with `c_i ≠ c_{i+1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NormalWord {
    syllables: Vec<Syllable>,
    tail: Rot,
}

impl NormalWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// The word `a^k`.
    pub fn a_power(k: Rot) -> Self {
        NormalWord {
            syllables: Vec::new(),
            tail: k,
        }
    }

    /// The generator `t` itself (`t_0^1`).
    pub fn t() -> Self {
        Self::syllable(Rot::ZERO, Rot::ONE)
    }

    pub fn syllable(index: Rot, exp: Rot) -> Self {
        Self::from_syllables([Syllable::new(index, exp)], Rot::ZERO)
    }

    /// Builds a word from syllables, merging adjacent equal indices.
    pub fn from_syllables(syllables: impl IntoIterator<Item = Syllable>, tail: Rot) -> Self {
        let mut w = NormalWord::identity();
        for s in syllables {
            w.push_syllable(s);
        }
        w.tail = tail;
        w
    }

    /// Builds a word from `(index, exponent)` pairs given as small integers.
    /// Zero exponents are skipped.
    pub fn from_pairs(pairs: &[(u8, u8)], tail: u8) -> Self {
        Self::from_syllables(
            pairs
                .iter()
                .filter(|&&(_, e)| e % 3 != 0)
                .map(|&(c, e)| Syllable::new(Rot::new(c as i64), Rot::new(e as i64))),
            Rot::new(tail as i64),
        )
    }

    /// Normalizes a raw letter sequence. A running `a`-exponent `x` is kept while
    /// scanning; each `t^{±1}` becomes the syllable `t_{-x}^{±1}` because
    /// `aˣ t = t_{-x} aˣ`.
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut w = NormalWord::identity();
        for &l in letters {
            match l {
                Letter::A => w.push_a(Rot::ONE),
                Letter::AInv => w.push_a(Rot::TWO),
                Letter::T => w.push_t(Rot::ONE),
                Letter::TInv => w.push_t(Rot::TWO),
            }
        }
        w
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_letters(s).map(|l| Self::from_letters(&l))
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn tail(&self) -> Rot {
        self.tail
    }

    /// Weighted length: the number of syllables (`t`-letters); `a` is free.
    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// True for the empty word. Other words may still represent the identity.
    pub fn is_trivial_word(&self) -> bool {
        self.syllables.is_empty() && self.tail.is_zero()
    }

    /// Sum of the syllable exponents: the image of the element in the
    /// `t`-factor of the abelianization.
    pub fn t_exponent_sum(&self) -> Rot {
        self.syllables.iter().fold(Rot::ZERO, |acc, s| acc + s.exp)
    }

    /// Appends a syllable to the syllable part, ignoring the tail.
    fn push_syllable(&mut self, s: Syllable) {
        match self.syllables.last_mut() {
            Some(last) if last.index == s.index => {
                let e = last.exp + s.exp;
                if e.is_zero() {
                    self.syllables.pop();
                } else {
                    last.exp = e;
                }
            }
            _ => self.syllables.push(s),
        }
    }

    /// Right-multiplies by `t^e`.
    pub(crate) fn push_t(&mut self, e: Rot) {
        if !e.is_zero() {
            self.push_syllable(Syllable::new(-self.tail, e));
        }
    }

    /// Right-multiplies by `a^e`.
    pub(crate) fn push_a(&mut self, e: Rot) {
        self.tail += e;
    }

    /// Product `self · other`: `a^τ t_c = t_{c-τ} a^τ` moves the tail through.
    pub fn multiply(&self, other: &NormalWord) -> NormalWord {
        let mut out = self.clone();
        for &s in &other.syllables {
            out.push_syllable(Syllable::new(s.index - self.tail, s.exp));
        }
        out.tail = self.tail + other.tail;
        out
    }

    pub fn inverse(&self) -> NormalWord {
        let mut out = NormalWord::identity();
        for &s in self.syllables.iter().rev() {
            out.push_syllable(Syllable::new(s.index + self.tail, -s.exp));
        }
        out.tail = -self.tail;
        out
    }

    pub fn pow(&self, k: u64) -> NormalWord {
        let mut out = NormalWord::identity();
        for _ in 0..k {
            out = out.multiply(self);
        }
        out
    }

    /// `a⁻ᵏ · self · aᵏ`, i.e. `self^(a^k)`: every index moves up by `k`.
    pub fn conjugate_by_a(&self, k: Rot) -> NormalWord {
        NormalWord {
            syllables: self
                .syllables
                .iter()
                .map(|s| Syllable::new(s.index + k, s.exp))
                .collect(),
            tail: self.tail,
        }
    }

    /// The word `s_σ`: every syllable index translated by `shift`, tail kept.
    pub fn translate_indices(&self, shift: Rot) -> NormalWord {
        self.conjugate_by_a(shift)
    }

    /// Short raw-letter spelling: the `a`-prefix exponent is steered to `-c`
    /// before each syllable, then to `τ` at the end.
    pub fn to_raw(&self) -> String {
        let mut out = String::new();
        let mut x = Rot::ZERO;
        let steer = |out: &mut String, x: &mut Rot, target: Rot| {
            match (target - *x).value() {
                1 => out.push('a'),
                2 => out.push('A'),
                _ => {}
            }
            *x = target;
        };
        for s in &self.syllables {
            steer(&mut out, &mut x, -s.index);
            out.push(if s.exp == Rot::ONE { 't' } else { 'T' });
        }
        steer(&mut out, &mut x, self.tail);
        out
    }

    /// Raw letter expansion with `t_c^e = a⁻ᶜ tᵉ aᶜ` written out literally.
    pub fn to_letters(&self) -> Vec<Letter> {
        self.to_raw()
            .chars()
            .map(|c| Letter::from_char(c).expect("to_raw emits only generator letters"))
            .collect()
    }

    /// Human-readable syllable form, e.g. `t0 t1^2 a^2`; `1` for the empty word.
    pub fn pretty(&self) -> String {
        if self.is_trivial_word() {
            return "1".to_string();
        }
        let mut parts: Vec<String> = self
            .syllables
            .iter()
            .map(|s| {
                if s.exp == Rot::ONE {
                    format!("t{}", s.index)
                } else {
                    format!("t{}^2", s.index)
                }
            })
            .collect();
        match self.tail.value() {
            1 => parts.push("a".into()),
            2 => parts.push("a^2".into()),
            _ => {}
        }
        parts.join(" ")
    }
}

impl Ord for NormalWord {
    /// Syllable count, then lexicographic on `(index, exponent)`, then tail.
    fn cmp(&self, other: &Self) -> Ordering {
        self.syllables
            .len()
            .cmp(&other.syllables.len())
            .then_with(|| self.syllables.cmp(&other.syllables))
            .then_with(|| self.tail.cmp(&other.tail))
    }
}

impl PartialOrd for NormalWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl FromStr for NormalWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NormalWord::parse(s)
    }
}

/// Normalizes a raw letter sequence.
pub fn normalize(raw: &[Letter]) -> NormalWord {
    NormalWord::from_letters(raw)
}

pub fn multiply(u: &NormalWord, v: &NormalWord) -> NormalWord {
    u.multiply(v)
}

pub fn inverse(w: &NormalWord) -> NormalWord {
    w.inverse()
}

/// One level of the wreath recursion: `w = ⟨s_0, s_1, s_2⟩ · a^root`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WreathDecomp {
    pub sections: [NormalWord; 3],
    pub root: Rot,
}

/// Level-one decomposition. Every syllable fixes the first level, so each
/// section is the in-order product of syllable sections, using
/// `t_c^e = ⟨…⟩` with `a^e` in slot `c` and `t^e` in slot `c - 1`.
pub fn decompose(w: &NormalWord) -> WreathDecomp {
    let mut sections: [NormalWord; 3] = Default::default();
    for s in &w.syllables {
        let c = s.index.value() as usize;
        sections[c].push_a(s.exp);
        sections[(c + 2) % 3].push_t(s.exp);
    }
    WreathDecomp {
        sections,
        root: w.tail,
    }
}

/// Section at a single first-level vertex `x`, without building the other two.
pub fn child_section(w: &NormalWord, x: Rot) -> NormalWord {
    let mut out = NormalWord::identity();
    for s in &w.syllables {
        if s.index == x {
            out.push_a(s.exp);
        } else if s.index == x + Rot::ONE {
            out.push_t(s.exp);
        }
    }
    out
}

/// Section `w_v` at the vertex `v` of the domain: `w_{xv} = (w_x)_v`.
pub fn section(w: &NormalWord, v: &Vertex) -> NormalWord {
    let mut cur = w.clone();
    for &x in &v.0 {
        cur = child_section(&cur, x);
    }
    cur
}

/// Image of a vertex: `(x v)^w = (x + root) v^(w_x)`.
pub fn act(w: &NormalWord, v: &Vertex) -> Vertex {
    let mut cur = w.clone();
    let mut out = Vec::with_capacity(v.depth());
    for &x in &v.0 {
        out.push(x + cur.tail);
        cur = child_section(&cur, x);
    }
    Vertex(out)
}

/// Coinductive word problem. A pair is assumed equal on revisit; the check
/// fails only if some reachable pair of sections has distinct roots. The set
/// of reachable pairs is finite because sections never gain syllables.
pub fn equal(u: &NormalWord, v: &NormalWord) -> bool {
    if u == v {
        return true;
    }
    let mut seen: HashSet<(NormalWord, NormalWord)> = HashSet::new();
    let mut stack = vec![(u.clone(), v.clone())];
    while let Some((x, y)) = stack.pop() {
        if x.tail != y.tail {
            return false;
        }
        if x == y || !seen.insert((x.clone(), y.clone())) {
            continue;
        }
        let dx = decompose(&x);
        let dy = decompose(&y);
        for (sx, sy) in dx.sections.into_iter().zip(dy.sections) {
            if sx != sy {
                stack.push((sx, sy));
            }
        }
    }
    true
}

/// Canonical identifier of a group element.
///
/// Bytes: a width byte (1 or 4), then for every state of the minimal section
/// automaton in breadth-first discovery order its root rotation followed by
/// its three successor ids in that width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementKey(Box<[u8]>);

impl ElementKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Result<ElementKey> {
        validate_key_bytes(&bytes)?;
        Ok(ElementKey(bytes.into_boxed_slice()))
    }

    /// Number of states of the minimal automaton.
    pub fn state_count(&self) -> usize {
        let width = self.0[0] as usize;
        (self.0.len() - 1) / (1 + 3 * width)
    }

    pub fn is_identity(&self) -> bool {
        *self == identity_key()
    }
}

fn validate_key_bytes(bytes: &[u8]) -> Result<()> {
    let Some((&width, body)) = bytes.split_first() else {
        return Err(Error::Corrupt("empty element key".into()));
    };
    if width != 1 && width != 4 {
        return Err(Error::Corrupt(format!("bad key width {width}")));
    }
    let stride = 1 + 3 * width as usize;
    if body.is_empty() || body.len() % stride != 0 {
        return Err(Error::Corrupt("truncated element key".into()));
    }
    let n = body.len() / stride;
    for rec in body.chunks(stride) {
        if rec[0] > 2 {
            return Err(Error::Corrupt("key root out of range".into()));
        }
        for id in rec[1..].chunks(width as usize) {
            let id = if width == 1 {
                id[0] as usize
            } else {
                u32::from_le_bytes([id[0], id[1], id[2], id[3]]) as usize
            };
            if id >= n {
                return Err(Error::Corrupt("key successor out of range".into()));
            }
        }
    }
    Ok(())
}

/// Key of the identity element: one state with trivial root looping to itself.
pub fn identity_key() -> ElementKey {
    ElementKey(vec![1, 0, 0, 0, 0].into_boxed_slice())
}

/// Finite section automaton of a word: states are distinct normal words.
struct SectionAutomaton {
    roots: Vec<u8>,
    succ: Vec<[u32; 3]>,
}

fn section_closure(w: &NormalWord) -> SectionAutomaton {
    let mut ids: HashMap<NormalWord, u32> = HashMap::new();
    let mut states: Vec<NormalWord> = vec![w.clone()];
    ids.insert(w.clone(), 0);
    let mut roots = Vec::new();
    let mut succ = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let d = decompose(&states[i]);
        roots.push(d.root.value());
        let mut row = [0u32; 3];
        for (slot, s) in row.iter_mut().zip(d.sections) {
            let next = states.len() as u32;
            *slot = *ids.entry(s.clone()).or_insert_with(|| {
                states.push(s);
                next
            });
        }
        succ.push(row);
        i += 1;
    }
    SectionAutomaton { roots, succ }
}

/// Moore partition refinement: returns the class of every state.
fn minimize(aut: &SectionAutomaton) -> (Vec<u32>, usize) {
    let n = aut.roots.len();
    let mut class: Vec<u32> = aut.roots.iter().map(|&r| r as u32).collect();
    let mut count = {
        let mut seen = [false; 3];
        aut.roots.iter().for_each(|&r| seen[r as usize] = true);
        seen.iter().filter(|&&b| b).count()
    };
    loop {
        let mut sig: HashMap<[u32; 4], u32> = HashMap::with_capacity(n);
        let next: Vec<u32> = (0..n)
            .map(|q| {
                let s = aut.succ[q];
                let k = [
                    class[q],
                    class[s[0] as usize],
                    class[s[1] as usize],
                    class[s[2] as usize],
                ];
                let fresh = sig.len() as u32;
                *sig.entry(k).or_insert(fresh)
            })
            .collect();
        let new_count = sig.len();
        class = next;
        if new_count == count {
            return (class, count);
        }
        count = new_count;
    }
}

/// Canonical key: closure under sections, minimization, BFS serialization.
pub fn key(w: &NormalWord) -> ElementKey {
    let aut = section_closure(w);
    let (class, count) = minimize(&aut);

    // one representative state per class
    let mut rep = vec![u32::MAX; count];
    for (q, &c) in class.iter().enumerate() {
        if rep[c as usize] == u32::MAX {
            rep[c as usize] = q as u32;
        }
    }

    let mut order = vec![u32::MAX; count];
    let mut queue = VecDeque::new();
    let mut discovered = Vec::with_capacity(count);
    order[class[0] as usize] = 0;
    queue.push_back(class[0]);
    while let Some(c) = queue.pop_front() {
        discovered.push(c);
        let q = rep[c as usize] as usize;
        for &s in &aut.succ[q] {
            let sc = class[s as usize];
            if order[sc as usize] == u32::MAX {
                order[sc as usize] = (discovered.len() + queue.len()) as u32;
                queue.push_back(sc);
            }
        }
    }

    let width: u8 = if count <= 256 { 1 } else { 4 };
    let mut bytes = Vec::with_capacity(1 + count * (1 + 3 * width as usize));
    bytes.push(width);
    for &c in &discovered {
        let q = rep[c as usize] as usize;
        bytes.push(aut.roots[q]);
        for &s in &aut.succ[q] {
            let id = order[class[s as usize] as usize];
            if width == 1 {
                bytes.push(id as u8);
            } else {
                bytes.extend_from_slice(&id.to_le_bytes());
            }
        }
    }
    ElementKey(bytes.into_boxed_slice())
}

/// Membership in `G'`, the kernel of the abelianization `G → (ℤ/3)²`
/// (`a`-exponent sum and `t`-exponent sum both vanish).
pub fn in_commutator_subgroup(w: &NormalWord) -> bool {
    w.tail.is_zero() && w.t_exponent_sum().is_zero()
}

/// The endomorphism of `G'` induced by `a ↦ t`, `t ↦ t^a`, applied to the raw
/// expansion `t_c^e = a⁻ᶜ tᵉ aᶜ`. Its image of `g` is `⟨g, 1, 1⟩`.
pub fn psi(w: &NormalWord) -> Result<NormalWord> {
    if !in_commutator_subgroup(w) {
        return Err(Error::Domain(format!("psi: {} is not in G'", w.pretty())));
    }
    let mut out = NormalWord::identity();
    for s in &w.syllables {
        // ψ(a) = t_0, ψ(t) = t_1; images stay in Stab(1) so the tail stays 0.
        if !s.index.is_zero() {
            out.push_syllable(Syllable::new(Rot::ZERO, -s.index));
        }
        out.push_syllable(Syllable::new(Rot::ONE, s.exp));
        if !s.index.is_zero() {
            out.push_syllable(Syllable::new(Rot::ZERO, s.index));
        }
    }
    if !w.tail.is_zero() {
        out.push_syllable(Syllable::new(Rot::ZERO, w.tail));
    }
    Ok(out)
}

/// Root labels of all sections down to a fixed depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Portrait {
    /// `levels[d]` holds the `3^d` labels of depth-`d` vertices in lexicographic order.
    pub levels: Vec<Vec<Rot>>,
}

impl Portrait {
    pub fn depth(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn label(&self, v: &Vertex) -> Option<Rot> {
        let idx =
            v.0.iter()
                .fold(0usize, |acc, x| acc * 3 + x.value() as usize);
        self.levels.get(v.depth()).and_then(|l| l.get(idx)).copied()
    }

    /// DOT digraph; node name is the vertex path, label the root rotation.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph portrait {\n");
        for (d, level) in self.levels.iter().enumerate() {
            for (v, label) in Vertex::level(d).zip(level) {
                out.push_str(&format!("  \"{v}\" [label=\"{label}\"];\n"));
                if d > 0 {
                    let parent = Vertex(v.0[..d - 1].to_vec());
                    out.push_str(&format!("  \"{parent}\" -> \"{v}\";\n"));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn portrait(w: &NormalWord, depth: usize) -> Portrait {
    let mut levels = Vec::with_capacity(depth + 1);
    let mut current = vec![w.clone()];
    for d in 0..=depth {
        levels.push(current.iter().map(|x| x.tail).collect());
        if d == depth {
            break;
        }
        let mut cache: HashMap<&NormalWord, [NormalWord; 3]> = HashMap::new();
        let mut next = Vec::with_capacity(current.len() * 3);
        for x in &current {
            let secs = cache.entry(x).or_insert_with(|| decompose(x).sections);
            next.extend(secs.iter().cloned());
        }
        current = next;
    }
    Portrait { levels }
}

/// Flattened portrait labels of depths `0..depth`; two elements act identically
/// on level `depth` iff their signatures agree.
pub fn action_signature(w: &NormalWord, depth: usize) -> Vec<u8> {
    if depth == 0 {
        return Vec::new();
    }
    portrait(w, depth - 1)
        .levels
        .into_iter()
        .flatten()
        .map(Rot::value)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> NormalWord {
        NormalWord::parse(s).unwrap()
    }

    fn p(pairs: &[(u8, u8)], tail: u8) -> NormalWord {
        NormalWord::from_pairs(pairs, tail)
    }

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert!(w("").is_trivial_word());
        assert_eq!(w("t"), p(&[(0, 1)], 0));
        // t_2 = a⁻² t a² = a t a²
        assert_eq!(w("ataa"), p(&[(2, 1)], 0));
        assert!(w("ttt").is_trivial_word());
        assert!(w("tT").is_trivial_word());
        assert!(w("aaa").is_trivial_word());
    }

    #[test]
    fn normalize_rejects_bad_letters() {
        match NormalWord::parse("atx") {
            Err(Error::Parse { pos: 2, ch: 'x' }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn merging_cascades() {
        // t0 t1 t1^2 t0^2: middle vanishes, then the outer pair vanishes
        let x = p(&[(0, 1), (1, 1), (1, 2), (0, 2)], 0);
        assert!(x.is_trivial_word());
    }

    #[test]
    fn multiply_examples() {
        let t = NormalWord::t();
        let a = NormalWord::a_power(Rot::ONE);
        assert!(t.multiply(&p(&[(0, 2)], 0)).is_trivial_word());
        assert_eq!(NormalWord::identity().multiply(&t), t);
        // a · t_0 = t_2 · a under g^h = h⁻¹gh
        assert_eq!(a.multiply(&t), p(&[(2, 1)], 1));
        let x = p(&[(0, 1)], 1).multiply(&t);
        assert_eq!(x, p(&[(0, 1), (2, 1)], 1));
        for depth in 1..=3 {
            for y in Vertex::level(depth) {
                assert_eq!(act(&x, &y), act(&t, &act(&a, &act(&t, &y))));
            }
        }
    }

    #[test]
    fn product_acts_left_to_right() {
        let u = w("atTat");
        let x = w("TaTTat");
        let ux = u.multiply(&x);
        for y in Vertex::level(4) {
            assert_eq!(act(&ux, &y), act(&x, &act(&u, &y)));
        }
    }

    #[test]
    fn inverse_examples() {
        assert!(NormalWord::identity().inverse().is_trivial_word());
        assert_eq!(NormalWord::t().inverse(), p(&[(0, 2)], 0));
        let x = p(&[(0, 1), (1, 1)], 2);
        let y = x.inverse();
        assert!(x.multiply(&y).is_trivial_word());
        assert!(equal(&y.multiply(&x), &NormalWord::identity()));
    }

    #[test]
    fn generator_recursions() {
        let d0 = decompose(&NormalWord::t());
        assert_eq!(d0.sections, [w("a"), w(""), w("t")]);
        assert_eq!(d0.root, Rot::ZERO);
        let d1 = decompose(&p(&[(1, 1)], 0));
        assert_eq!(d1.sections, [w("t"), w("a"), w("")]);
        let d2 = decompose(&p(&[(2, 1)], 0));
        assert_eq!(d2.sections, [w(""), w("t"), w("a")]);
        // t_1 really is t^a = a⁻¹ t a
        assert_eq!(w("Ata"), p(&[(1, 1)], 0));
    }

    #[test]
    fn decompose_products() {
        let d = decompose(&p(&[(0, 1), (1, 1)], 0));
        assert_eq!(d.sections, [w("at"), w("a"), w("t")]);
        assert_eq!(d.root, Rot::ZERO);
        let d = decompose(&w("a"));
        assert_eq!(d.root, Rot::ONE);
        assert!(d.sections.iter().all(NormalWord::is_trivial_word));
    }

    /// Level-one development of a word with interior pivot, `c_m = 0`, `c_1 = 1`:
    /// `g_0 = t^γ1 a^γ2 t^γ4 a^γ5 ⋯ t^γ(m-1) a^γm t^γ(m+1) a^γ(m+3) t^γ(m+4) ⋯`,
    /// `g_1 = a^γ1 t^γ3 a^γ4 t^γ6 ⋯ t^γ(m-2) a^(γ(m-1)+γ(m+1)) t^γ(m+2) a^γ(m+4) ⋯`,
    /// `g_2 = t^γ2 a^γ3 t^γ5 a^γ6 ⋯ t^γ(m-3) a^γ(m-2) t^γm a^γ(m+2) t^γ(m+3) ⋯`.
    #[test]
    fn developments_match_displayed_expansion() {
        // m = 8 ≡ 2 (mod 3), n = 14
        let n = 14usize;
        let m = 8usize;
        let idx: Vec<u8> = (1..=n)
            .map(|k| {
                if k <= m {
                    ((m - k) % 3) as u8
                } else {
                    ((k - m) % 3) as u8
                }
            })
            .collect();
        assert_eq!(idx[0], 1);
        let gam: Vec<u8> = vec![1, 2, 2, 1, 1, 2, 1, 2, 1, 2, 2, 1, 2, 1];
        let word = NormalWord::from_pairs(
            &idx.iter()
                .zip(&gam)
                .map(|(&c, &e)| (c, e))
                .collect::<Vec<_>>(),
            0,
        );
        assert_eq!(word.len(), n);
        let g = |k: usize| Rot::new(gam[k - 1] as i64);

        let build = |ops: &[(char, Rot)]| {
            let mut x = NormalWord::identity();
            for &(l, e) in ops {
                if l == 't' {
                    x.push_t(e)
                } else {
                    x.push_a(e)
                }
            }
            x
        };
        let g0 = build(&[
            ('t', g(1)),
            ('a', g(2)),
            ('t', g(4)),
            ('a', g(5)),
            ('t', g(7)),
            ('a', g(8)),
            ('t', g(9)),
            ('a', g(11)),
            ('t', g(12)),
            ('a', g(14)),
        ]);
        let g1 = build(&[
            ('a', g(1)),
            ('t', g(3)),
            ('a', g(4)),
            ('t', g(6)),
            ('a', g(7) + g(9)),
            ('t', g(10)),
            ('a', g(12)),
            ('t', g(13)),
        ]);
        let g2 = build(&[
            ('t', g(2)),
            ('a', g(3)),
            ('t', g(5)),
            ('a', g(6)),
            ('t', g(8)),
            ('a', g(10)),
            ('t', g(11)),
            ('a', g(13)),
            ('t', g(14)),
        ]);
        let d = decompose(&word);
        assert_eq!(d.sections[0], g0);
        assert_eq!(d.sections[1], g1);
        assert_eq!(d.sections[2], g2);
        // g_0 = t_0^γ1 t_{-γ2}^γ4 ⋯
        assert_eq!(g0.syllables()[0], Syllable::new(Rot::ZERO, g(1)));
        assert_eq!(g0.syllables()[1], Syllable::new(-g(2), g(4)));
    }

    #[test]
    fn section_examples() {
        let t = NormalWord::t();
        assert_eq!(section(&t, &v("2")), t);
        assert_eq!(section(&t, &v("222")), t);
        assert_eq!(section(&t, &v("0")), w("a"));
        assert_eq!(section(&t, &v("")), t);
        assert!(section(&NormalWord::identity(), &v("0121")).is_trivial_word());
    }

    #[test]
    fn act_examples() {
        let a = NormalWord::a_power(Rot::ONE);
        assert_eq!(act(&a, &v("0")), v("1"));
        assert_eq!(act(&NormalWord::identity(), &v("2101")), v("2101"));
        let t = NormalWord::t();
        // section at 2 is t (trivial root), section at 0 is a
        assert_eq!(act(&t, &v("20")), v("20"));
        assert_eq!(act(&t, &v("00")), v("01"));
        assert_eq!(act(&t, &v("220")), v("220"));
        assert_eq!(act(&t, &v("2200")), v("2201"));
    }

    #[test]
    fn act_is_level_permutation() {
        for word in ["t", "at", "tatTA", "TTaTatAt"] {
            let x = w(word);
            for depth in 0..=6 {
                let mut images: Vec<Vertex> = Vertex::level(depth).map(|y| act(&x, &y)).collect();
                assert!(images.iter().all(|y| y.depth() == depth));
                images.sort();
                images.dedup();
                assert_eq!(images.len(), 3usize.pow(depth as u32));
            }
        }
    }

    #[test]
    fn equal_examples() {
        assert!(equal(&w("ttt"), &NormalWord::identity()));
        let x = w("tatTaat");
        assert!(equal(&x, &x.clone()));
        assert!(!equal(&p(&[(0, 1)], 0), &p(&[(1, 1)], 0)));
        assert!(!equal(&w("t"), &w("T")));
        assert!(equal(&w("aaa"), &NormalWord::identity()));
    }

    #[test]
    fn key_examples() {
        assert_eq!(key(&w("ttt")), key(&NormalWord::identity()));
        assert_eq!(key(&NormalWord::identity()), identity_key());
        assert_ne!(key(&p(&[(0, 1)], 0)), key(&p(&[(0, 2)], 0)));
        let x = w("tAtaT");
        assert_eq!(key(&x.multiply(&NormalWord::identity())), key(&x));
        assert_eq!(key(&x.multiply(&x.inverse())), identity_key());
        assert!(ElementKey::from_bytes(key(&x).as_bytes().to_vec()).is_ok());
    }

    #[test]
    fn key_bytes_validation() {
        assert!(ElementKey::from_bytes(vec![]).is_err());
        assert!(ElementKey::from_bytes(vec![1, 0, 0, 0]).is_err());
        assert!(ElementKey::from_bytes(vec![1, 0, 0, 0, 1]).is_err());
        assert!(ElementKey::from_bytes(vec![2, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn commutator_subgroup_membership() {
        assert!(in_commutator_subgroup(&NormalWord::identity()));
        assert!(!in_commutator_subgroup(&NormalWord::t()));
        assert!(in_commutator_subgroup(&p(&[(0, 1), (1, 2)], 0)));
        assert!(!in_commutator_subgroup(&w("a")));
        // [a,t] = a⁻¹ t⁻¹ a t
        assert!(in_commutator_subgroup(&w("ATat")));
    }

    #[test]
    fn psi_examples() {
        assert!(psi(&NormalWord::identity()).unwrap().is_trivial_word());
        for g in [p(&[(0, 1), (1, 2)], 0), w("tattaa"), w("ATat")] {
            assert!(in_commutator_subgroup(&g), "{g}");
            let d = decompose(&psi(&g).unwrap());
            assert_eq!(d.root, Rot::ZERO);
            assert!(equal(&d.sections[0], &g));
            assert!(equal(&d.sections[1], &NormalWord::identity()));
            assert!(equal(&d.sections[2], &NormalWord::identity()));
        }
        assert!(matches!(psi(&NormalWord::t()), Err(Error::Domain(_))));
    }

    #[test]
    fn portrait_examples() {
        let id = portrait(&NormalWord::identity(), 2);
        assert!(id.levels.iter().flatten().all(|r| r.is_zero()));
        assert_eq!(
            id.levels.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 3, 9]
        );

        let pt = portrait(&NormalWord::t(), 1);
        assert_eq!(pt.levels[0], vec![Rot::ZERO]);
        assert_eq!(pt.levels[1], vec![Rot::ONE, Rot::ZERO, Rot::ZERO]);

        // t = ⟨a,1,t⟩: label 1 exactly at 0, 20, 220
        let pt = portrait(&NormalWord::t(), 3);
        for d in 0..=3 {
            for x in Vertex::level(d) {
                let expect = matches!(x.to_string().as_str(), "0" | "20" | "220");
                assert_eq!(pt.label(&x) == Some(Rot::ONE), expect, "{x}");
            }
        }
        let dot = pt.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("\"20\" [label=\"1\"]"));
    }

    #[test]
    fn raw_spelling_round_trips() {
        for s in ["", "t", "a", "tatTAt", "TTTaaAt", "AtAtAtAtA"] {
            let x = w(s);
            assert_eq!(NormalWord::parse(&x.to_raw()).unwrap(), x);
        }
    }

    #[test]
    fn translated_word_permutes_sections() {
        let s = w("tatTaTatA");
        let d = decompose(&s);
        for k in Rot::ALL {
            let ds = decompose(&s.translate_indices(k));
            assert_eq!(ds.root, d.root);
            for j in Rot::ALL {
                assert_eq!(
                    ds.sections[(j + k).value() as usize],
                    d.sections[j.value() as usize]
                );
            }
        }
    }
}
