//! K-out-of-M signature codes over F_q.
//!
//! A signature is a leading `1` (the multiplicity counter) followed by the
//! little-endian radix-`r` digits of the user's Sidon element. With
//! `r = floor(M/K)` and `q > M`, at most `K` digits of size `r - 1` add up
//! without wrapping mod `q`, so the receiver reads the integer subset sum
//! straight off the F_q sum and inverts it.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::error::{Result, ScraError};
use crate::numtheory::sidon::{for_each_subset, subsets_up_to, Construction};
use crate::numtheory::{build_sidon_set, prime_at_least, smallest_prime_greater, SidonSet};

/// Default bound on sum-table entries.
pub const DEFAULT_TABLE_LIMIT: u128 = 10_000_000;

/// A user identity, `1..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fixed-length vector of residues mod `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    q: u32,
    symbols: Vec<u32>,
}

impl SymbolWord {
    pub fn zeros(q: u32, len: usize) -> Self {
        SymbolWord { q, symbols: vec![0; len] }
    }

    pub fn new(q: u32, symbols: Vec<u32>) -> Result<Self> {
        if q < 2 {
            return Err(ScraError::argument("symbol modulus must be at least 2"));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= q) {
            return Err(ScraError::argument(format!("symbol {s} is not a residue mod {q}")));
        }
        Ok(SymbolWord { q, symbols })
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn is_zero(&self) -> bool {
        self.symbols.iter().all(|&s| s == 0)
    }

    fn check_compatible(&self, other: &SymbolWord) -> Result<()> {
        if self.q != other.q || self.len() != other.len() {
            return Err(ScraError::argument(format!(
                "word shape mismatch: ({} symbols mod {}) vs ({} symbols mod {})",
                self.len(),
                self.q,
                other.len(),
                other.q
            )));
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &SymbolWord) -> Result<()> {
        self.check_compatible(other)?;
        let q = self.q as u64;
        for (a, &b) in self.symbols.iter_mut().zip(&other.symbols) {
            *a = ((*a as u64 + b as u64) % q) as u32;
        }
        Ok(())
    }

    pub fn sub_assign(&mut self, other: &SymbolWord) -> Result<()> {
        self.check_compatible(other)?;
        let q = self.q as u64;
        for (a, &b) in self.symbols.iter_mut().zip(&other.symbols) {
            *a = ((*a as u64 + q - b as u64) % q) as u32;
        }
        Ok(())
    }

    pub fn minus(&self, other: &SymbolWord) -> Result<SymbolWord> {
        let mut w = self.clone();
        w.sub_assign(other)?;
        Ok(w)
    }

    pub fn concat(&self, tail: &SymbolWord) -> Result<SymbolWord> {
        if self.q != tail.q {
            return Err(ScraError::argument("cannot concatenate words over different fields"));
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&tail.symbols);
        Ok(SymbolWord { q: self.q, symbols })
    }

    /// Splits into the first `at` symbols and the rest.
    pub fn split_at(&self, at: usize) -> (SymbolWord, SymbolWord) {
        let (a, b) = self.symbols.split_at(at.min(self.len()));
        (SymbolWord { q: self.q, symbols: a.to_vec() }, SymbolWord { q: self.q, symbols: b.to_vec() })
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Componentwise sum mod `q` of equally shaped words; the empty sum is the
/// zero word of length `len`.
pub fn sum_words<'a, I>(q: u32, len: usize, words: I) -> Result<SymbolWord>
where
    I: IntoIterator<Item = &'a SymbolWord>,
{
    let mut acc = SymbolWord::zeros(q, len);
    for w in words {
        acc.add_assign(w)?;
    }
    Ok(acc)
}

/// Field and radix parameters of a codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldParams {
    /// Population served.
    pub m: u32,
    /// Prime population the Sidon set is built for (`m` unless lifted).
    pub m_prime: u32,
    pub k: u32,
    /// Smallest prime above `m_prime`.
    pub q: u32,
    /// `floor(m_prime / k)`.
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeKind {
    Empty,
    /// Active users in ascending order.
    Resolved(Vec<UserId>),
    Collision,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub multiplicity: u32,
    pub kind: DecodeKind,
}

impl DecodeOutcome {
    pub fn is_collision(&self) -> bool {
        matches!(self.kind, DecodeKind::Collision)
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            DecodeKind::Empty => "empty",
            DecodeKind::Resolved(_) => "resolved",
            DecodeKind::Collision => "collision",
        }
    }
}

/// Exact inversion map from `(subset size, integer sum)` to the subset.
#[derive(Debug, Clone)]
struct SumTable {
    index: HashMap<(u32, u128), u32>,
    /// Concatenated subsets; an entry at offset `o` of size `L` occupies
    /// `members[o..o + L]`.
    members: Vec<u32>,
}

impl SumTable {
    fn build(sidon: &SidonSet, k: u32, m: u32) -> Result<Self> {
        let values = &sidon.elements()[..m as usize];
        let mut index = HashMap::new();
        let mut members = Vec::new();
        let mut clash = None;
        for_each_subset(values, k as usize, |idx, sum| {
            let offset = members.len() as u32;
            if index.insert((idx.len() as u32, sum), offset).is_some() {
                clash.get_or_insert(sum);
            }
            members.extend(idx.iter().map(|&i| i as u32 + 1));
        });
        if let Some(sum) = clash {
            return Err(ScraError::integrity(format!("Sidon set has two equal-size subsets summing to {sum}")));
        }
        Ok(SumTable { index, members })
    }

    fn lookup(&self, size: u32, sum: u128) -> Option<Vec<UserId>> {
        let &o = self.index.get(&(size, sum))?;
        let o = o as usize;
        Some(self.members[o..o + size as usize].iter().map(|&u| UserId(u)).collect())
    }

    fn len(&self) -> usize {
        self.index.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CodebookOptions {
    /// Maximum number of sum-table entries to precompute. Bose-Chowla
    /// codebooks above the limit decode algebraically instead.
    pub table_limit: u128,
}

impl Default for CodebookOptions {
    fn default() -> Self {
        CodebookOptions { table_limit: DEFAULT_TABLE_LIMIT }
    }
}

#[derive(Debug, Clone)]
pub struct SignatureCodebook {
    params: FieldParams,
    digit_count: usize,
    sidon: SidonSet,
    signatures: Vec<SymbolWord>,
    sum_table: Option<SumTable>,
}

/// Builds the codebook for `m` users and resolution capability `k`.
pub fn build_codebook(m: u32, k: u32) -> Result<SignatureCodebook> {
    SignatureCodebook::build(m, k, CodebookOptions::default())
}

impl SignatureCodebook {
    pub fn build(m: u32, k: u32, options: CodebookOptions) -> Result<Self> {
        if m < 2 {
            return Err(ScraError::argument(format!("population M must be at least 2, got {m}")));
        }
        if k == 0 {
            return Err(ScraError::argument("K must be at least 1"));
        }
        if k > m / 2 {
            return Err(ScraError::capability(format!(
                "K exceeds floor(M/2): K={k}, M={m}; the radix floor(M/K) would drop below 2"
            )));
        }
        let m_prime = prime_at_least(m as u64)?;
        let sidon = build_sidon_set(m_prime, k)?;
        Self::from_sidon(m, sidon, options)
    }

    /// Builds a codebook on top of an existing Sidon set for a prime
    /// population `M' >= m`, keeping the first `m` elements.
    pub fn from_sidon(m: u32, sidon: SidonSet, options: CodebookOptions) -> Result<Self> {
        let k = sidon.order();
        let m_prime = u32::try_from(sidon.population())
            .map_err(|_| ScraError::capability("population does not fit in 32 bits"))?;
        if m > m_prime || m < 2 {
            return Err(ScraError::argument(format!("Sidon set for {m_prime} users cannot serve {m}")));
        }
        let q = smallest_prime_greater(m_prime as u64)?;
        let q = u32::try_from(q).map_err(|_| ScraError::capability("q does not fit in 32 bits"))?;
        let r = m_prime / k;
        if r < 2 {
            return Err(ScraError::capability(format!("K exceeds floor(M/2): radix floor({m_prime}/{k}) is below 2")));
        }
        let params = FieldParams { m, m_prime, k, q, r };
        if (r as u64) * (k as u64 - 1) >= q as u64 || (k as u64) * (r as u64 - 1) >= q as u64 {
            return Err(ScraError::integrity(format!("digit sums would wrap: r={r}, K={k}, q={q}")));
        }
        let digit_count = digit_count(m_prime, k, r, sidon.max_element())?;
        let signatures = sidon.elements()[..m as usize].iter().map(|&s| signature_word(q, r, digit_count, s)).collect();

        let entries = subsets_up_to(m as u64, k) - 1;
        let sum_table = if entries <= options.table_limit {
            Some(SumTable::build(&sidon, k, m)?)
        } else if matches!(sidon.construction(), Construction::BoseChowla(_)) {
            None
        } else {
            return Err(ScraError::capability(format!(
                "sum table of {entries} entries exceeds the limit of {}; use a smaller (M, K)",
                options.table_limit
            )));
        };
        Ok(SignatureCodebook { params, digit_count, sidon, signatures, sum_table })
    }

    pub fn params(&self) -> FieldParams {
        self.params
    }

    pub fn k(&self) -> u32 {
        self.params.k
    }

    pub fn population(&self) -> u32 {
        self.params.m
    }

    pub fn q(&self) -> u32 {
        self.params.q
    }

    pub fn digit_count(&self) -> usize {
        self.digit_count
    }

    /// Symbols per signature, `1 + digit_count`.
    pub fn signature_len(&self) -> usize {
        1 + self.digit_count
    }

    pub fn sidon(&self) -> &SidonSet {
        &self.sidon
    }

    pub fn has_sum_table(&self) -> bool {
        self.sum_table.is_some()
    }

    pub fn sum_table_len(&self) -> usize {
        self.sum_table.as_ref().map_or(0, SumTable::len)
    }

    fn check_user(&self, user: UserId) -> Result<()> {
        if user.0 == 0 || user.0 > self.params.m {
            return Err(ScraError::argument(format!("user {user} outside 1..={}", self.params.m)));
        }
        Ok(())
    }

    pub fn encode_signature(&self, user: UserId) -> Result<&SymbolWord> {
        self.check_user(user)?;
        Ok(&self.signatures[user.index()])
    }

    pub fn sidon_element(&self, user: UserId) -> Result<u128> {
        self.check_user(user)?;
        Ok(self.sidon.elements()[user.index()])
    }

    pub fn zero_signature(&self) -> SymbolWord {
        SymbolWord::zeros(self.params.q, self.signature_len())
    }

    /// Signature sum of a set of users.
    pub fn sum_signatures(&self, users: &[UserId]) -> Result<SymbolWord> {
        let words = users.iter().map(|&u| self.encode_signature(u)).collect::<Result<Vec<_>>>()?;
        sum_words(self.params.q, self.signature_len(), words)
    }

    /// Decodes an F_q sum of distinct signatures.
    pub fn decode_sum(&self, sum: &SymbolWord) -> Result<DecodeOutcome> {
        if sum.len() != self.signature_len() || sum.modulus() != self.params.q {
            return Err(ScraError::argument(format!(
                "expected a signature word of {} symbols mod {}, got {} mod {}",
                self.signature_len(),
                self.params.q,
                sum.len(),
                sum.modulus()
            )));
        }
        let multiplicity = sum.symbols()[0];
        if multiplicity == 0 {
            if !sum.is_zero() {
                return Err(ScraError::integrity("zero multiplicity with a nonzero signature body"));
            }
            return Ok(DecodeOutcome { multiplicity, kind: DecodeKind::Empty });
        }
        if multiplicity > self.params.k {
            return Ok(DecodeOutcome { multiplicity, kind: DecodeKind::Collision });
        }
        // Below the no-wrap bound the residues are the integer digit sums.
        let r = self.params.r as u128;
        let integer_sum = sum.symbols()[1..].iter().rev().fold(0u128, |acc, &d| acc * r + d as u128);
        let users = match &self.sum_table {
            Some(table) => table.lookup(multiplicity, integer_sum),
            None => self
                .sidon
                .invert_sum(multiplicity as usize, integer_sum)
                .map(|idx| idx.into_iter().map(|i| UserId(i as u32 + 1)).collect()),
        };
        match users {
            Some(users) if users.iter().all(|u| u.0 <= self.params.m) => {
                Ok(DecodeOutcome { multiplicity, kind: DecodeKind::Resolved(users) })
            }
            _ => Err(ScraError::integrity(format!(
                "signature sum {integer_sum} with multiplicity {multiplicity} matches no user set"
            ))),
        }
    }

    /// Decodes through the field structure only, ignoring any sum table.
    /// Returns `None` for codebooks without an algebraic inverse.
    pub fn decode_algebraic(&self, sum: &SymbolWord) -> Option<Vec<UserId>> {
        let l = sum.symbols()[0];
        if l == 0 || l > self.params.k {
            return None;
        }
        let r = self.params.r as u128;
        let integer_sum = sum.symbols()[1..].iter().rev().fold(0u128, |acc, &d| acc * r + d as u128);
        self.sidon
            .invert_sum(l as usize, integer_sum)
            .map(|idx| idx.into_iter().map(|i| UserId(i as u32 + 1)).collect())
    }

    /// Signature length in bits, `(1 + digit_count) * log2(q)`.
    pub fn signature_bits(&self) -> f64 {
        self.signature_len() as f64 * (self.params.q as f64).log2()
    }

    /// Plain-text dump: an optional `#` note on prime lifting, a header line
    /// `M K q r digit_count`, then `id s_i d_0 .. d_{n-1}` per user.
    pub fn dump(&self) -> String {
        let p = self.params;
        let mut out = String::new();
        if p.m != p.m_prime {
            let _ =
                writeln!(out, "# prime lift: population {} uses the first {} signatures of M'={}", p.m, p.m, p.m_prime);
        }
        let _ = writeln!(out, "{} {} {} {} {}", p.m, p.k, p.q, p.r, self.digit_count);
        for (i, sig) in self.signatures.iter().enumerate() {
            let _ = write!(out, "{} {}", i + 1, self.sidon.elements()[i]);
            for d in &sig.symbols()[1..] {
                let _ = write!(out, " {d}");
            }
            out.push('\n');
        }
        out
    }
}

/// `ceil(K ln M / ln r)` digits, raised if needed so that every element
/// fits. At `K = 1` one digit holding `s_i <= M < q` suffices.
fn digit_count(m_prime: u32, k: u32, r: u32, max_element: u128) -> Result<usize> {
    if k == 1 {
        return Ok(1);
    }
    let mut d = ((k as f64) * (m_prime as f64).ln() / (r as f64).ln()).ceil() as usize;
    let need = (m_prime as u128)
        .checked_pow(k)
        .ok_or_else(|| ScraError::capability(format!("M^K overflows 128 bits for M={m_prime}, K={k}")))?
        - 1;
    let need = need.max(max_element);
    while (r as u128).checked_pow(d as u32).is_some_and(|cap| cap <= need) {
        d += 1;
    }
    Ok(d)
}

fn signature_word(q: u32, r: u32, digit_count: usize, value: u128) -> SymbolWord {
    let mut symbols = Vec::with_capacity(1 + digit_count);
    symbols.push(1);
    let mut rest = value;
    for j in 0..digit_count {
        if j + 1 == digit_count {
            symbols.push(rest as u32);
        } else {
            symbols.push((rest % r as u128) as u32);
            rest /= r as u128;
        }
    }
    SymbolWord { q, symbols }
}

/// Upper bound on signature length in bits for `K` out of `M`:
/// `(K / (1 - log2 K / log2 M) + 1) (log2 M + 1)`. Infinite for `K >= M`.
pub fn signature_length_bound(m: f64, k: f64) -> f64 {
    let ratio = k.log2() / m.log2();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    (k / (1.0 - ratio) + 1.0) * (m.log2() + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn users(ids: &[u32]) -> Vec<UserId> {
        ids.iter().map(|&i| UserId(i)).collect()
    }

    #[test]
    fn codebook_parameters() {
        let cb = build_codebook(5, 2).unwrap();
        let p = cb.params();
        assert_eq!((p.q, p.r, cb.digit_count(), cb.signature_len()), (7, 2, 5, 6));

        let cb = build_codebook(5, 1).unwrap();
        assert_eq!((cb.q(), cb.params().r, cb.digit_count()), (7, 5, 1));
        for u in 1..=5 {
            assert_eq!(cb.encode_signature(UserId(u)).unwrap().symbols(), &[1, u]);
        }
    }

    #[test]
    fn large_parameters_arithmetic() {
        // M^K overflows u128 here, so only the closed form is checked.
        let raw = (16.0 * 1031f64.ln() / 64f64.ln()).ceil();
        assert_eq!(raw, 27.0);
        assert!(digit_count(1031, 16, 64, 0).is_err());
        assert_eq!(digit_count(1031, 8, 128, 0).unwrap(), 12);
    }

    #[test]
    fn encode_digits_reassemble_element() {
        let cb = build_codebook(5, 2).unwrap();
        for u in 1..=5 {
            let w = cb.encode_signature(UserId(u)).unwrap();
            assert_eq!(w.symbols()[0], 1);
            assert!(w.symbols()[1..].iter().all(|&d| d < 2));
            let v: u128 = w.symbols()[1..].iter().enumerate().map(|(j, &d)| d as u128 * (1u128 << j)).sum();
            assert_eq!(v, cb.sidon_element(UserId(u)).unwrap());
        }
        let all: Vec<_> = (1..=5).map(|u| cb.encode_signature(UserId(u)).unwrap()).collect();
        for i in 0..5 {
            for j in i + 1..5 {
                assert_ne!(all[i], all[j]);
            }
        }
        assert!(cb.encode_signature(UserId(0)).is_err());
        assert!(cb.encode_signature(UserId(6)).is_err());
    }

    #[test]
    fn sum_words_cases() {
        let q = 7;
        let z = sum_words(q, 4, []).unwrap();
        assert!(z.is_zero() && z.len() == 4);
        let w = SymbolWord::new(q, vec![1, 6, 3, 0]).unwrap();
        assert_eq!(sum_words(q, 4, [&w]).unwrap(), w);
        let cb = build_codebook(7, 2).unwrap();
        let s = cb.sum_signatures(&users(&[1, 4, 6])).unwrap();
        assert_eq!(s.symbols()[0], 3);
        let short = SymbolWord::zeros(q, 3);
        assert!(sum_words(q, 4, [&w, &short]).is_err());
    }

    #[test]
    fn decode_examples() {
        let cb = build_codebook(5, 2).unwrap();
        let one = cb.sum_signatures(&users(&[3])).unwrap();
        assert_eq!(
            cb.decode_sum(&one).unwrap(),
            DecodeOutcome { multiplicity: 1, kind: DecodeKind::Resolved(users(&[3])) }
        );
        let two = cb.sum_signatures(&users(&[2, 5])).unwrap();
        assert_eq!(cb.decode_sum(&two).unwrap().kind, DecodeKind::Resolved(users(&[2, 5])));
        let three = cb.sum_signatures(&users(&[1, 2, 3])).unwrap();
        assert_eq!(cb.decode_sum(&three).unwrap(), DecodeOutcome { multiplicity: 3, kind: DecodeKind::Collision });
        let empty = cb.zero_signature();
        assert_eq!(cb.decode_sum(&empty).unwrap().kind, DecodeKind::Empty);
    }

    #[test]
    fn corrupted_sum_is_integrity_error() {
        let cb = build_codebook(5, 2).unwrap();
        let mut w = cb.sum_signatures(&users(&[2, 5])).unwrap().symbols().to_vec();
        // Push the body to a value no pair sums to.
        for d in &mut w[1..] {
            *d = 2;
        }
        let w = SymbolWord::new(cb.q(), w).unwrap();
        assert!(matches!(cb.decode_sum(&w), Err(ScraError::Integrity(_))));
    }

    #[test]
    fn capability_errors() {
        assert!(matches!(build_codebook(5, 3), Err(ScraError::Capability(m)) if m.contains("floor(M/2)")));
        assert!(matches!(build_codebook(1, 1), Err(ScraError::Argument(_))));
        assert!(matches!(build_codebook(5, 0), Err(ScraError::Argument(_))));
    }

    #[test]
    fn prime_lift_uses_first_signatures() {
        let cb = build_codebook(4, 1).unwrap();
        let p = cb.params();
        assert_eq!((p.m, p.m_prime, p.q), (4, 5, 7));
        assert!(cb.dump().starts_with("# prime lift"));
        assert!(cb.encode_signature(UserId(5)).is_err());
    }

    #[test]
    fn signature_bits_values() {
        let cb = build_codebook(5, 2).unwrap();
        assert!((cb.signature_bits() - 6.0 * 7f64.log2()).abs() < 1e-12);
        let cb = build_codebook(1031, 1).unwrap();
        assert!((cb.signature_bits() - 2.0 * 1033f64.log2()).abs() < 1e-12);
        assert!((cb.signature_bits() - 20.03).abs() < 0.01);
        // Bound is loose from below at tiny M.
        assert!(signature_length_bound(5.0, 2.0) < cb.signature_bits());
        assert!(signature_length_bound(10.0, 10.0).is_infinite());
    }

    #[test]
    fn dump_format() {
        let cb = build_codebook(5, 2).unwrap();
        let dump = cb.dump();
        let mut lines = dump.lines();
        assert_eq!(lines.next(), Some("5 2 7 2 5"));
        assert_eq!(lines.clone().count(), 5);
        assert_eq!(lines.next(), Some("1 1 1 0 0 0 0"));
    }

    fn all_subsets_up_to(m: u32, k: u32) -> Vec<Vec<UserId>> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << m) {
            if mask.count_ones() <= k {
                out.push((1..=m).filter(|u| mask >> (u - 1) & 1 == 1).map(UserId).collect());
            }
        }
        out
    }

    #[test]
    fn exhaustive_decode_small() {
        for (m, k) in [(5, 2), (7, 2), (7, 3), (11, 3), (13, 3), (13, 6), (10, 3)] {
            let cb = build_codebook(m, k).unwrap();
            for set in all_subsets_up_to(m, k) {
                let w = cb.sum_signatures(&set).unwrap();
                let out = cb.decode_sum(&w).unwrap();
                assert_eq!(out.multiplicity as usize, set.len());
                assert_eq!(out.kind, DecodeKind::Resolved(set.clone()), "M={m} K={k}");
            }
        }
    }

    #[test]
    fn algebraic_decoder_matches_table() {
        // (31, 3) is beyond the search budget, so it is a Bose-Chowla book.
        let cb = build_codebook(31, 3).unwrap();
        assert!(cb.has_sum_table());
        assert!(matches!(cb.sidon().construction(), Construction::BoseChowla(_)));
        for set in all_subsets_up_to(12, 3) {
            let shifted: Vec<_> = set.iter().map(|u| UserId(u.0 + 19)).collect();
            let w = cb.sum_signatures(&shifted).unwrap();
            assert_eq!(cb.decode_algebraic(&w), Some(shifted.clone()));
            assert_eq!(cb.decode_sum(&w).unwrap().kind, DecodeKind::Resolved(shifted));
        }
    }

    #[test]
    fn table_limit_falls_back_to_algebra() {
        let cb = build_codebook(31, 3).unwrap();
        let lean = SignatureCodebook::from_sidon(31, cb.sidon().clone(), CodebookOptions { table_limit: 10 }).unwrap();
        assert!(!lean.has_sum_table());
        let set = users(&[2, 17, 30]);
        let w = lean.sum_signatures(&set).unwrap();
        assert_eq!(lean.decode_sum(&w).unwrap().kind, DecodeKind::Resolved(set));

        let searched = build_codebook(7, 3).unwrap();
        let err = SignatureCodebook::from_sidon(7, searched.sidon().clone(), CodebookOptions { table_limit: 10 });
        assert!(matches!(err, Err(ScraError::Capability(_))));
    }

    #[test]
    fn signature_length_against_bound_at_large_m() {
        let q_bits = 1033f64.log2();
        for (k, integral_fits) in [(2u32, false), (4, false), (8, true), (16, true)] {
            let r = (1031 / k) as f64;
            let exact = k as f64 * 1031f64.ln() / r.ln();
            let bound = signature_length_bound(1031.0, k as f64);
            // The fractional symbol count is what the bound is derived from.
            assert!((1.0 + exact) * q_bits <= bound, "K={k}");
            // Rounding up to whole digits costs at most one extra symbol.
            let bits = (1.0 + exact.ceil()) * q_bits;
            assert_eq!(bits <= bound, integral_fits, "K={k}");
            assert!(bits <= bound + q_bits, "K={k}");
        }
        let cb = build_codebook(1031, 8).unwrap();
        assert!(cb.signature_bits() <= signature_length_bound(1031.0, 8.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use std::sync::OnceLock;

        fn book() -> &'static SignatureCodebook {
            static CB: OnceLock<SignatureCodebook> = OnceLock::new();
            CB.get_or_init(|| build_codebook(1031, 8).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn decode_inverts_sum(ids in proptest::collection::btree_set(1u32..=1031, 0..=8)) {
                let cb = book();
                let set: Vec<_> = ids.into_iter().map(UserId).collect();
                let w = cb.sum_signatures(&set).unwrap();
                let out = cb.decode_sum(&w).unwrap();
                prop_assert_eq!(out.multiplicity as usize, set.len());
                if set.is_empty() {
                    prop_assert_eq!(out.kind, DecodeKind::Empty);
                } else {
                    prop_assert_eq!(out.kind, DecodeKind::Resolved(set));
                }
            }

            #[test]
            fn sum_is_linear(
                a in proptest::collection::btree_set(1u32..=1031, 0..=6),
                b in proptest::collection::btree_set(1u32..=1031, 0..=6),
            ) {
                let cb = book();
                let a: Vec<_> = a.into_iter().map(UserId).collect();
                let b: Vec<_> = b.into_iter().map(UserId).collect();
                let mut both = a.clone();
                both.extend(&b);
                let mut wa = cb.sum_signatures(&a).unwrap();
                wa.add_assign(&cb.sum_signatures(&b).unwrap()).unwrap();
                prop_assert_eq!(wa, cb.sum_signatures(&both).unwrap());
            }

            #[test]
            fn over_capacity_is_collision(ids in proptest::collection::btree_set(1u32..=1031, 9..=40)) {
                let cb = book();
                let set: Vec<_> = ids.into_iter().map(UserId).collect();
                let out = cb.decode_sum(&cb.sum_signatures(&set).unwrap()).unwrap();
                prop_assert!(out.is_collision());
                prop_assert_eq!(out.multiplicity as usize, set.len());
            }
        }
    }
}
