//! Dense LO vectors.
//!
//! Two providers sit behind [`embed_batch`]: a seeded signed feature-hashing
//! embedder that runs fully offline, and a precomputed cache file produced by
//! any external sentence encoder. Either way rows are L2-normalized `f32`
//! vectors; reductions accumulate in `f64`.
//!
//! Cache file layout (little-endian):
//!
//! ```text
//! magic "LOEMB1\0\0" | u32 version=1 | u32 dim | u64 count | u64 fnv1a(payload)
//! payload: count × { u16 id_len | id (UTF-8) | u8 zero_flag | dim × f32 }
//! ```

use std::collections::{HashMap, HashSet};
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::TokenizedDoc;

pub const DEFAULT_DIM: usize = 384;
const MAGIC: &[u8; 8] = b"LOEMB1\0\0";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 8;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("no vector for LO `{0}`")]
    MissingVector(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("cosine of a zero vector")]
    ZeroVector,
    #[error("not an embedding cache file (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    UnsupportedVersion(u32),
    #[error("cache checksum mismatch")]
    ChecksumMismatch,
    #[error("cache file truncated")]
    TruncatedFile,
    #[error("corrupt cache file: {0}")]
    Corrupt(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("no documents to embed")]
    EmptyInput,
    #[error("invalid provider config: {0}")]
    BadConfig(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProviderKind {
    HashFallback,
    PrecomputedFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub dim: usize,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

impl ProviderConfig {
    pub fn hash(dim: usize, seed: u64) -> Self {
        ProviderConfig {
            kind: ProviderKind::HashFallback,
            dim,
            seed,
            path: None,
        }
    }

    pub fn precomputed(path: impl Into<PathBuf>, dim: usize) -> Self {
        ProviderConfig {
            kind: ProviderKind::PrecomputedFile,
            dim,
            seed: 0,
            path: Some(path.into()),
        }
    }

    pub fn tag(&self) -> String {
        match self.kind {
            ProviderKind::HashFallback => format!("hash-fnv1a-v1:dim={}:seed={}", self.dim, self.seed),
            ProviderKind::PrecomputedFile => format!("precomputed:dim={}", self.dim),
        }
    }
}

/// Id-aligned matrix of unit-norm vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<f32>,
    zero: Vec<bool>,
    provider_tag: String,
    content_hash: u64,
}

impl EmbeddingSet {
    pub fn new(
        dim: usize,
        ids: Vec<String>,
        vectors: Vec<f32>,
        zero: Vec<bool>,
        provider_tag: impl Into<String>,
    ) -> Result<Self, EmbedError> {
        if vectors.len() != ids.len() * dim || zero.len() != ids.len() {
            return Err(EmbedError::DimMismatch {
                expected: ids.len() * dim,
                found: vectors.len(),
            });
        }
        let mut seen = HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(EmbedError::DuplicateId(id.clone()));
            }
        }
        let mut set = EmbeddingSet {
            dim,
            ids,
            vectors,
            zero,
            provider_tag: provider_tag.into(),
            content_hash: 0,
        };
        set.content_hash = fnv1a(&set.payload_bytes());
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_zero(&self, i: usize) -> bool {
        self.zero[i]
    }

    pub fn provider_tag(&self) -> &str {
        &self.provider_tag
    }

    pub fn content_hash(&self) -> u64 {
        self.content_hash
    }

    fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.ids.len() * (self.dim * 4 + 24));
        for (i, id) in self.ids.iter().enumerate() {
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            out.push(u8::from(self.zero[i]));
            for x in self.row(i) {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload_bytes();
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        out.extend_from_slice(&fnv1a(&payload).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8], provider_tag: &str) -> Result<Self, EmbedError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(EmbedError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(EmbedError::TruncatedFile);
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(EmbedError::UnsupportedVersion(version));
        }
        let dim = u32_at(12) as usize;
        let count = u64_at(16) as usize;
        let checksum = u64_at(24);
        let payload = &bytes[HEADER_LEN..];

        // structural pass first so truncation is reported as such
        let mut spans = Vec::with_capacity(count.min(1 << 20));
        let mut pos = 0usize;
        for _ in 0..count {
            if pos + 2 > payload.len() {
                return Err(EmbedError::TruncatedFile);
            }
            let id_len = u16::from_le_bytes([payload[pos], payload[pos + 1]]) as usize;
            let rec_len = 2 + id_len + 1 + dim * 4;
            if pos + rec_len > payload.len() {
                return Err(EmbedError::TruncatedFile);
            }
            spans.push((pos, id_len));
            pos += rec_len;
        }
        if fnv1a(payload) != checksum {
            return Err(EmbedError::ChecksumMismatch);
        }
        if pos != payload.len() {
            return Err(EmbedError::Corrupt("trailing bytes after last record".into()));
        }

        let mut ids = Vec::with_capacity(count);
        let mut zero = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        for (start, id_len) in spans {
            let id_bytes = &payload[start + 2..start + 2 + id_len];
            let id = std::str::from_utf8(id_bytes)
                .map_err(|_| EmbedError::Corrupt("id is not UTF-8".into()))?;
            ids.push(id.to_string());
            let flag_at = start + 2 + id_len;
            zero.push(match payload[flag_at] {
                0 => false,
                1 => true,
                f => return Err(EmbedError::Corrupt(format!("zero flag {f}"))),
            });
            vectors.extend(
                payload[flag_at + 1..flag_at + 1 + dim * 4]
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap())),
            );
        }
        EmbeddingSet::new(dim, ids, vectors, zero, provider_tag)
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A hashed vector; `zero` is set when no token contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct HashedVector {
    pub values: Vec<f32>,
    pub zero: bool,
}

/// Signed feature hashing: every token picks a bin and a ±1 sign from a seeded
/// 64-bit FNV-1a hash; the accumulated counts are L2-normalized.
pub fn hash_embed(tokens: &[String], dim: usize, seed: u64) -> HashedVector {
    assert!(dim >= 2, "hash_embed needs dim >= 2");
    let basis = FNV_OFFSET ^ splitmix64(seed);
    let mut acc = vec![0f64; dim];
    for tok in tokens {
        let mut h = FnvHasher::with_key(basis);
        h.write(tok.as_bytes());
        let mixed = splitmix64(h.finish());
        let bin = (mixed % dim as u64) as usize;
        acc[bin] += if mixed >> 63 == 0 { 1.0 } else { -1.0 };
    }
    let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return HashedVector {
            values: vec![0.0; dim],
            zero: true,
        };
    }
    HashedVector {
        values: acc.iter().map(|x| (x / norm) as f32).collect(),
        zero: false,
    }
}

pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::DimMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0f64, 0f64, 0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (f64::from(a), f64::from(b));
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

fn unit_normalize(v: &[f32]) -> Option<Vec<f32>> {
    let norm = v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    Some(v.iter().map(|&x| (f64::from(x) / norm) as f32).collect())
}

pub fn embed_batch(docs: &[TokenizedDoc], cfg: &ProviderConfig) -> Result<EmbeddingSet, EmbedError> {
    if cfg.dim < 2 {
        return Err(EmbedError::BadConfig(format!("dim must be >= 2, got {}", cfg.dim)));
    }
    if docs.is_empty() {
        return Err(EmbedError::EmptyInput);
    }
    let ids: Vec<String> = docs.iter().map(|d| d.lo_code.clone()).collect();
    let mut vectors = Vec::with_capacity(docs.len() * cfg.dim);
    let mut zero = Vec::with_capacity(docs.len());
    match cfg.kind {
        ProviderKind::HashFallback => {
            for doc in docs {
                let hv = hash_embed(&doc.tokens, cfg.dim, cfg.seed);
                vectors.extend_from_slice(&hv.values);
                zero.push(hv.zero);
            }
        }
        ProviderKind::PrecomputedFile => {
            let path = cfg
                .path
                .as_deref()
                .ok_or_else(|| EmbedError::BadConfig("precomputed provider needs a path".into()))?;
            let cache = load_embeddings(path)?;
            if cache.dim != cfg.dim {
                return Err(EmbedError::DimMismatch {
                    expected: cfg.dim,
                    found: cache.dim,
                });
            }
            let index: HashMap<&str, usize> = cache
                .ids
                .iter()
                .enumerate()
                .map(|(i, id)| (id.as_str(), i))
                .collect();
            for doc in docs {
                let &row = index
                    .get(doc.lo_code.as_str())
                    .ok_or_else(|| EmbedError::MissingVector(doc.lo_code.clone()))?;
                match unit_normalize(cache.row(row)).filter(|_| !cache.zero[row]) {
                    Some(v) => {
                        vectors.extend_from_slice(&v);
                        zero.push(false);
                    }
                    None => {
                        vectors.extend(std::iter::repeat_n(0.0, cfg.dim));
                        zero.push(true);
                    }
                }
            }
        }
    }
    EmbeddingSet::new(cfg.dim, ids, vectors, zero, cfg.tag())
}

pub fn save_embeddings(set: &EmbeddingSet, path: &Path) -> Result<(), EmbedError> {
    std::fs::write(path, set.to_bytes()).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet, EmbedError> {
    let bytes = std::fs::read(path).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    EmbeddingSet::from_bytes(&bytes, "precomputed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn doc(code: &str, toks: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            lo_code: code.into(),
            tokens: toks.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn batch_shape_and_norm() {
        let docs = [doc("A.1.1", &["water", "cycle"]), doc("A.1.2", &["energy"])];
        let set = embed_batch(&docs, &ProviderConfig::hash(384, 7)).unwrap();
        assert_eq!((set.len(), set.dim()), (2, 384));
        for i in 0..2 {
            let n: f64 = set.row(i).iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-4);
        }
        let again = embed_batch(&docs, &ProviderConfig::hash(384, 7)).unwrap();
        assert_eq!(set, again);
        assert_eq!(set.content_hash(), again.content_hash());
    }

    #[test]
    fn empty_tokens_are_flagged() {
        let hv = hash_embed(&[], 16, 7);
        assert!(hv.zero);
        assert!(hv.values.iter().all(|&x| x == 0.0));
        let a = hash_embed(&toks(&["x", "y"]), 16, 7);
        assert_eq!(a, hash_embed(&toks(&["x", "y"]), 16, 7));
        assert_ne!(a, hash_embed(&toks(&["x", "y"]), 16, 8));
    }

    #[test]
    fn shared_tokens_raise_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let word = |rng: &mut ChaCha8Rng| format!("w{}", rng.random_range(0..1_000_000u32));
        for _ in 0..100 {
            let base: Vec<String> = (0..10).map(|_| word(&mut rng)).collect();
            let mut near = base.clone();
            near[9] = word(&mut rng);
            let far: Vec<String> = (0..10).map(|_| word(&mut rng)).collect();
            let b = hash_embed(&base, 384, 7).values;
            let c_near = cosine(&b, &hash_embed(&near, 384, 7).values).unwrap();
            let c_far = cosine(&b, &hash_embed(&far, 384, 7).values).unwrap();
            assert!(c_near > c_far, "{c_near} <= {c_far}");
        }
    }

    #[test]
    fn cosine_cases() {
        let u = [1.0f32, 0.0];
        assert_eq!(cosine(&u, &u).unwrap(), 1.0);
        assert_eq!(cosine(&u, &[0.0, 1.0]).unwrap(), 0.0);
        let s = std::f32::consts::FRAC_1_SQRT_2;
        assert!((cosine(&u, &[s, s]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(matches!(cosine(&u, &[0.0, 0.0]), Err(EmbedError::ZeroVector)));
        assert!(matches!(cosine(&u, &[1.0]), Err(EmbedError::DimMismatch { .. })));
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.bin");
        let docs = [doc("A.1.1", &["a", "b"]), doc("A.1.2", &[]), doc("Ü.1.3", &["c"])];
        let set = embed_batch(&docs, &ProviderConfig::hash(8, 1)).unwrap();
        save_embeddings(&set, &path).unwrap();
        let back = load_embeddings(&path).unwrap();
        assert_eq!(back.ids(), set.ids());
        assert_eq!(back.vectors, set.vectors);
        assert_eq!(back.zero, set.zero);
        assert_eq!(back.content_hash(), set.content_hash());
        assert_eq!(back.to_bytes(), set.to_bytes());

        let mut bytes = std::fs::read(&path).unwrap();
        let last = bytes.len() - 2;
        bytes[last] ^= 0x40;
        assert!(matches!(
            EmbeddingSet::from_bytes(&bytes, "t"),
            Err(EmbedError::ChecksumMismatch)
        ));

        let mut bytes = set.to_bytes();
        bytes[0] = b'X';
        assert!(matches!(EmbeddingSet::from_bytes(&bytes, "t"), Err(EmbedError::BadMagic)));

        let bytes = set.to_bytes();
        assert!(matches!(
            EmbeddingSet::from_bytes(&bytes[..bytes.len() - 3], "t"),
            Err(EmbedError::TruncatedFile)
        ));
    }

    #[test]
    fn header_layout_is_fixed() {
        let set = EmbeddingSet::new(2, vec!["X.1.1".into()], vec![1.0, 0.0], vec![false], "t").unwrap();
        let b = set.to_bytes();
        assert_eq!(&b[..8], b"LOEMB1\0\0");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(b[24..32].try_into().unwrap()), fnv1a(&b[32..]));
        assert_eq!(&b[32..34], &5u16.to_le_bytes());
        assert_eq!(&b[34..39], b"X.1.1");
        assert_eq!(b[39], 0);
        assert_eq!(&b[40..44], &1f32.to_le_bytes());
        assert_eq!(b.len(), 48);
    }

    #[test]
    fn precomputed_provider() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.bin");
        let cache = EmbeddingSet::new(
            2,
            vec!["A.1.1".into(), "A.1.2".into()],
            vec![3.0, 4.0, 0.0, 2.0],
            vec![false, false],
            "ext",
        )
        .unwrap();
        save_embeddings(&cache, &path).unwrap();

        let cfg = ProviderConfig::precomputed(&path, 2);
        let set = embed_batch(&[doc("A.1.2", &[]), doc("A.1.1", &[])], &cfg).unwrap();
        assert_eq!(set.row(0), &[0.0, 1.0]);
        assert_eq!(set.row(1), &[0.6, 0.8]);

        let err = embed_batch(&[doc("A.1.9", &[])], &cfg).unwrap_err();
        assert!(matches!(err, EmbedError::MissingVector(c) if c == "A.1.9"));
        let err = embed_batch(&[doc("A.1.1", &[])], &ProviderConfig::precomputed(&path, 3)).unwrap_err();
        assert!(matches!(err, EmbedError::DimMismatch { expected: 3, found: 2 }));
    }

    proptest! {
        #[test]
        fn cosine_symmetric(u in prop::collection::vec(-1f32..1.0, 6), v in prop::collection::vec(-1f32..1.0, 6)) {
            prop_assume!(u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0));
            let (a, b) = (cosine(&u, &v).unwrap(), cosine(&v, &u).unwrap());
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }

        #[test]
        fn permuting_docs_permutes_rows(words in prop::collection::vec(prop::collection::vec("[a-z]{1,5}", 0..6), 2..8), rot in 0usize..8) {
            let docs: Vec<TokenizedDoc> = words.iter().enumerate()
                .map(|(i, w)| TokenizedDoc { lo_code: format!("A.1.{i}"), tokens: w.clone() })
                .collect();
            let mut rotated = docs.clone();
            let r = rot % docs.len();
            rotated.rotate_left(r);
            let cfg = ProviderConfig::hash(32, 3);
            let a = embed_batch(&docs, &cfg).unwrap();
            let b = embed_batch(&rotated, &cfg).unwrap();
            for i in 0..docs.len() {
                let j = (i + docs.len() - r) % docs.len();
                prop_assert_eq!(a.row(i), b.row(j));
                prop_assert_eq!(a.is_zero(i), b.is_zero(j));
            }
        }
    }
}
