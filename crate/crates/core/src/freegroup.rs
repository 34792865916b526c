//! Words in finitely generated free groups and maps between free groups.
//!
//! Generators are 0-based internally. In text they are written `a`..`e` and,
//! for any rank, `x1`..`xk` (1-based). A word is always stored freely reduced.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A generator or its inverse. Ordered `a < a^-1 < b < b^-1 < ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: u32,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: u32, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.generator == other.generator && self.inverse != other.inverse
    }
}

/// A freely reduced word in the free group of a given rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

/// Shortlex: by length, then letter by letter.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    /// The generator with 0-based index `index`.
    pub fn generator(rank: usize, index: usize) -> Result<Self> {
        check_generator(index, rank)?;
        Ok(Word {
            rank,
            letters: vec![Letter::new(index as u32, false)],
        })
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I>(rank: usize, letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = Letter>,
    {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            check_generator(l.generator as usize, rank)?;
            push_reduced(&mut out, l);
        }
        Ok(Word { rank, letters: out })
    }

    /// Builds a word from `(generator, exponent)` syllables.
    pub fn from_syllables(rank: usize, syllables: &[(usize, i64)]) -> Result<Self> {
        let mut out = Vec::new();
        for &(g, e) in syllables {
            check_generator(g, rank)?;
            let l = Letter::new(g as u32, e < 0);
            for _ in 0..e.unsigned_abs() {
                push_reduced(&mut out, l);
            }
        }
        Ok(Word { rank, letters: out })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        check_rank(self.rank, other.rank)?;
        let mut out = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        Ok(Word {
            rank: self.rank,
            letters: out,
        })
    }

    pub fn invert(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.invert() } else { self.clone() };
        let mut out = Vec::new();
        for _ in 0..e.unsigned_abs() {
            for &l in &base.letters {
                push_reduced(&mut out, l);
            }
        }
        Word {
            rank: self.rank,
            letters: out,
        }
    }

    /// `[u, v] = u v u^-1 v^-1`.
    pub fn commutator(u: &Word, v: &Word) -> Result<Word> {
        u.multiply(v)?.multiply(&u.invert())?.multiply(&v.invert())
    }

    /// Exponent sum of each generator.
    pub fn abelianize(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.rank];
        for l in &self.letters {
            v[l.generator as usize] += l.sign();
        }
        v
    }

    /// Prefix of the first `n` letters (already reduced).
    pub fn prefix(&self, n: usize) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters[..n].to_vec(),
        }
    }

    /// Inserts `w` after the first `pos` letters and reduces.
    pub fn insert_at(&self, pos: usize, w: &Word) -> Result<Word> {
        check_rank(self.rank, w.rank)?;
        let mut out = self.letters[..pos].to_vec();
        for &l in w.letters.iter().chain(&self.letters[pos..]) {
            push_reduced(&mut out, l);
        }
        Ok(Word {
            rank: self.rank,
            letters: out,
        })
    }

    pub fn parse(rank: usize, text: &str) -> Result<Word> {
        let mut p = Parser::new(text, rank);
        let w = p.word()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(Error::parse(text, p.pos, "unexpected character"));
        }
        Ok(w)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let long = self.rank > 5;
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut j = i;
            while j < self.letters.len() && self.letters[j] == l {
                j += 1;
            }
            let e = (j - i) as i64 * l.sign();
            if long && !first {
                write!(f, "*")?;
            }
            write!(f, "{}", generator_name(self.rank, l.generator as usize))?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
            first = false;
            i = j;
        }
        Ok(())
    }
}

pub fn generator_name(rank: usize, index: usize) -> String {
    if rank <= 5 {
        ((b'a' + index as u8) as char).to_string()
    } else {
        format!("x{}", index + 1)
    }
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if let Some(&last) = out.last() {
        if last.cancels(l) {
            out.pop();
            return;
        }
    }
    out.push(l);
}

fn check_generator(index: usize, rank: usize) -> Result<()> {
    if index >= rank {
        Err(Error::GeneratorOutOfRange { index, rank })
    } else {
        Ok(())
    }
}

pub(crate) fn check_rank(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::RankMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// A homomorphism between free groups, given by the images of the domain
/// generators. When both ranks agree it is an endomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Endomorphism {
    domain_rank: usize,
    codomain_rank: usize,
    images: Vec<Word>,
}

impl Endomorphism {
    pub fn new(domain_rank: usize, codomain_rank: usize, images: Vec<Word>) -> Result<Self> {
        if images.len() != domain_rank {
            return Err(Error::Dimension(format!(
                "{} images given for domain rank {}",
                images.len(),
                domain_rank
            )));
        }
        for w in &images {
            check_rank(codomain_rank, w.rank)?;
        }
        Ok(Endomorphism {
            domain_rank,
            codomain_rank,
            images,
        })
    }

    pub fn identity(rank: usize) -> Self {
        let images = (0..rank)
            .map(|i| Word {
                rank,
                letters: vec![Letter::new(i as u32, false)],
            })
            .collect();
        Endomorphism {
            domain_rank: rank,
            codomain_rank: rank,
            images,
        }
    }

    pub fn domain_rank(&self) -> usize {
        self.domain_rank
    }

    pub fn codomain_rank(&self) -> usize {
        self.codomain_rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &Word {
        &self.images[generator]
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain_rank == self.codomain_rank
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        check_rank(self.domain_rank, w.rank)?;
        let mut out = Vec::new();
        for l in &w.letters {
            let img = &self.images[l.generator as usize].letters;
            if l.inverse {
                for &m in img.iter().rev() {
                    push_reduced(&mut out, m.inv());
                }
            } else {
                for &m in img {
                    push_reduced(&mut out, m);
                }
            }
        }
        Ok(Word {
            rank: self.codomain_rank,
            letters: out,
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Endomorphism) -> Result<Endomorphism> {
        check_rank(self.domain_rank, inner.codomain_rank)?;
        let images = inner
            .images
            .iter()
            .map(|w| self.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Endomorphism {
            domain_rank: inner.domain_rank,
            codomain_rank: self.codomain_rank,
            images,
        })
    }

    /// The `n`-fold composite; `iterate(0)` is the identity.
    pub fn iterate(&self, n: u32) -> Result<Endomorphism> {
        if !self.is_endomorphism() {
            return Err(Error::NotEndomorphism {
                domain: self.domain_rank,
                codomain: self.codomain_rank,
            });
        }
        let mut acc = Endomorphism::identity(self.domain_rank);
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Abelianized matrix: column `j` is the exponent-sum vector of the image of generator `j`.
    pub fn abelian_matrix(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.domain_rank]; self.codomain_rank];
        for (j, w) in self.images.iter().enumerate() {
            for (i, e) in w.abelianize().into_iter().enumerate() {
                m[i][j] = e;
            }
        }
        m
    }

    /// Parses `a=ab, b=b^2a^4`. Every domain generator must appear exactly once.
    pub fn parse(domain_rank: usize, codomain_rank: usize, text: &str) -> Result<Self> {
        let mut images: Vec<Option<Word>> = vec![None; domain_rank];
        for (start, entry) in split_top_level(text) {
            let Some(eq) = entry.find('=') else {
                return Err(Error::parse(text, start, "expected `generator=word`"));
            };
            let name = entry[..eq].trim();
            let name_off = start + entry[..eq].find(|c: char| !c.is_whitespace()).unwrap_or(0);
            let g = parse_generator_name(name, domain_rank)
                .ok_or_else(|| Error::parse(text, name_off, format!("unknown generator `{name}`")))?;
            if images[g].is_some() {
                return Err(Error::parse(text, name_off, format!("generator `{name}` given twice")));
            }
            let body = &entry[eq + 1..];
            let w = Word::parse(codomain_rank, body).map_err(|e| shift_parse_error(e, text, start + eq + 1))?;
            images[g] = Some(w);
        }
        let mut out = Vec::with_capacity(domain_rank);
        for (g, img) in images.into_iter().enumerate() {
            match img {
                Some(w) => out.push(w),
                None => {
                    return Err(Error::parse(
                        text,
                        text.len(),
                        format!("missing image for generator `{}`", generator_name(domain_rank, g)),
                    ))
                }
            }
        }
        Endomorphism::new(domain_rank, codomain_rank, out)
    }
}

impl fmt::Display for Endomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", generator_name(self.domain_rank, i), w)?;
        }
        Ok(())
    }
}

fn shift_parse_error(e: Error, full: &str, offset: usize) -> Error {
    match e {
        Error::Parse { position, message, .. } => Error::parse(full, offset + position, message),
        other => other,
    }
}

/// Splits on `,` or `;` outside brackets, returning byte offsets.
fn split_top_level(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if !text[start..].trim().is_empty() || out.is_empty() {
        out.push((start, &text[start..]));
    }
    out.retain(|(_, s)| !s.trim().is_empty());
    out
}

pub(crate) fn parse_generator_name(name: &str, rank: usize) -> Option<usize> {
    let bytes = name.as_bytes();
    if bytes.len() == 1 && (b'a'..=b'e').contains(&bytes[0]) {
        let idx = (bytes[0] - b'a') as usize;
        return (idx < rank).then_some(idx);
    }
    if bytes.len() >= 2 && bytes[0] == b'x' && bytes[1..].iter().all(u8::is_ascii_digit) {
        let n: usize = name[1..].parse().ok()?;
        return (n >= 1 && n <= rank).then_some(n - 1);
    }
    None
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    rank: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, rank: usize) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            rank,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.src, self.pos, msg)
    }

    // word := term ( '*'? term )*
    fn word(&mut self) -> Result<Word> {
        let mut acc = Word::identity(self.rank);
        let mut any = false;
        loop {
            match self.peek() {
                Some(b'*') if any => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.multiply(&t)?;
                }
                Some(c) if c == b'(' || c == b'[' || c == b'1' || c.is_ascii_alphabetic() => {
                    let t = self.term()?;
                    acc = acc.multiply(&t)?;
                    any = true;
                }
                _ => break,
            }
        }
        if !any {
            return Err(self.err("expected a word"));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Word> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.integer()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Word> {
        match self.peek() {
            Some(b'1') => {
                self.pos += 1;
                Ok(Word::identity(self.rank))
            }
            Some(b'(') => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(b')')?;
                Ok(w)
            }
            Some(b'[') => {
                self.pos += 1;
                let u = self.word()?;
                self.expect(b',')?;
                let v = self.word()?;
                self.expect(b']')?;
                Word::commutator(&u, &v)
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match parse_generator_name(name, self.rank) {
                    Some(g) => Ok(Word::generator(self.rank, g).expect("checked")),
                    None => {
                        self.pos = start;
                        Err(self.err(format!("unknown generator `{name}` for rank {}", self.rank)))
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = (c as char).to_string();
                match parse_generator_name(&name, self.rank) {
                    Some(g) => {
                        self.pos += 1;
                        Ok(Word::generator(self.rank, g).expect("checked"))
                    }
                    None => Err(self.err(format!("unknown generator `{name}` for rank {}", self.rank))),
                }
            }
            _ => Err(self.err("expected a generator, `1`, `(` or `[`")),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.bytes.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.src[start..self.pos].parse().map_err(|_| {
            self.pos = start;
            self.err("expected an integer exponent")
        })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    const A: Letter = Letter::new(0, false);
    const AI: Letter = Letter::new(0, true);
    const B: Letter = Letter::new(1, false);
    const BI: Letter = Letter::new(1, true);

    #[test]
    fn reduce_examples() {
        assert_eq!(Word::reduce(2, [A, B, BI, A]).unwrap(), w("a^2"));
        assert!(Word::reduce(2, [A, AI]).unwrap().is_identity());
        assert!(Word::reduce(2, [B, A, AI, BI]).unwrap().is_identity());
        assert!(matches!(
            Word::reduce(2, [Letter::new(2, false)]),
            Err(Error::GeneratorOutOfRange { index: 2, rank: 2 })
        ));
    }

    #[test]
    fn multiply_and_invert() {
        assert_eq!(w("ab").multiply(&w("b^-1a")).unwrap(), w("a^2"));
        let x = w("ab^-2a");
        assert_eq!(x.multiply(&Word::identity(2)).unwrap(), x);
        assert!(x.multiply(&x.invert()).unwrap().is_identity());
        assert_eq!(w("ab^-2").invert(), w("b^2a^-1"));
        assert!(Word::identity(2).invert().is_identity());
        assert!(w("a").multiply(&Word::identity(3)).is_err());
    }

    #[test]
    fn apply_and_iterate() {
        let phi = Endomorphism::parse(2, 2, "a=ab, b=b^2a^4").unwrap();
        assert_eq!(phi.apply(&w("a")).unwrap(), w("ab"));
        assert_eq!(phi.apply(&w("ab")).unwrap(), w("ab^3a^4"));
        assert!(phi.apply(&Word::identity(2)).unwrap().is_identity());
        assert_eq!(phi.iterate(1).unwrap(), phi);
        assert_eq!(phi.iterate(0).unwrap(), Endomorphism::identity(2));
        assert_eq!(phi.iterate(2).unwrap().image(0), &w("ab^3a^4"));
        let psi = Endomorphism::parse(2, 3, "a=c, b=ab").unwrap();
        assert!(matches!(psi.iterate(2), Err(Error::NotEndomorphism { .. })));
        assert!(psi.apply(&Word::identity(3)).is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(w("a*b^-2"), w("ab^-2"));
        assert!(w("1").is_identity());
        assert_eq!(w("[a,b]"), w("aba^-1b^-1"));
        assert_eq!(w("(ab)^2"), w("abab"));
        assert_eq!(Word::parse(7, "x1*x7^-1").unwrap().to_string(), "x1*x7^-1");
        assert_eq!(w("a b b^-1 a"), w("a^2"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match Word::parse(2, "ab^c") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("{other:?}"),
        }
        match Word::parse(2, "abc") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        match Endomorphism::parse(2, 2, "a=ab, b=b^2q") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 11),
            other => panic!("{other:?}"),
        }
        assert!(Endomorphism::parse(2, 2, "a=ab").is_err());
        assert!(Endomorphism::parse(2, 2, "a=ab, a=b, b=a").is_err());
    }

    #[test]
    fn map_order_insensitive() {
        let f = Endomorphism::parse(2, 2, "b=b^2a^4, a=ab").unwrap();
        let g = Endomorphism::parse(2, 2, "a=ab; b=b^2a^4").unwrap();
        assert_eq!(f, g);
        assert_eq!(f.to_string(), "a=ab, b=b^2a^4");
        let c = Endomorphism::parse(2, 2, "a=[b,a], b=a^-1b").unwrap();
        assert_eq!(c.image(0), &w("bab^-1a^-1"));
    }

    #[test]
    fn shortlex_order() {
        let mut v = vec![w("b"), w("1"), w("a^-1"), w("a"), w("b^-1"), w("ab")];
        v.sort();
        let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["1", "a", "a^-1", "b", "b^-1", "ab"]);
    }
}
