//! Counter-based derivation of independent random streams from one master seed.
//!
//! A [`SeedTree`] is a master seed plus a path of labels and indices. Every
//! stream is a pure function of that path, so adding or removing consumers of
//! one stream never shifts the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The concrete generator used for every stream.
pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
    path: Vec<u64>,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            path: Vec::new(),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Child node keyed by a label.
    pub fn child(&self, label: &str) -> Self {
        let mut path = self.path.clone();
        path.push(label_hash(label));
        Self {
            master: self.master,
            path,
        }
    }

    /// Child node keyed by an index.
    pub fn index(&self, i: u64) -> Self {
        let mut path = self.path.clone();
        // Offset keeps index keys disjoint from label hashes in practice.
        path.push(i.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0x5151_5151);
        Self {
            master: self.master,
            path,
        }
    }

    /// Shorthand for `self.child(label).index(i)`.
    pub fn keyed(&self, label: &str, i: u64) -> Self {
        self.child(label).index(i)
    }

    pub fn stream(&self) -> Stream {
        let mut hasher = Sha256::new();
        hasher.update(self.master.to_le_bytes());
        for p in &self.path {
            hasher.update(p.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        Stream::from_seed(seed)
    }

    /// A 64-bit seed for APIs that take a plain integer.
    pub fn seed_u64(&self) -> u64 {
        use rand::RngCore;
        self.stream().next_u64()
    }
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Draws an index from a probability vector with one uniform variate.
pub fn sample_index<R: rand::Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    index_from_uniform(probs, u)
}

/// Inverse-CDF lookup; the final index absorbs rounding slack.
pub fn index_from_uniform(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Skip trailing zero-probability entries.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
